//! Per-case outcomes, Table I style summaries and the weighted timing table.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::cdr;

/// Seconds spent per stage. `clust` is the raw time over all candidate K.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimes {
    pub disc: f64,
    pub kernel: f64,
    pub affinity: f64,
    pub clust: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageWeights {
    pub disc: f64,
    pub kernel: f64,
    pub affinity: f64,
    pub clust: f64,
}

impl Default for StageWeights {
    fn default() -> Self {
        StageWeights { disc: 1.0, kernel: 1.0, affinity: 1.0, clust: 1.0 }
    }
}

impl StageWeights {
    /// w_disc = n_x·n_y·n_θ, w_kernel = w_disc·n_κ, w_affinity = w_clust = |v|².
    pub fn from_sizes(nx: usize, ny: usize, n_theta: usize, n_kappa: usize, points: usize) -> Self {
        let disc = (nx * ny * n_theta) as f64;
        let v2 = (points * points) as f64;
        StageWeights { disc, kernel: disc * n_kappa as f64, affinity: v2, clust: v2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub id: String,
    pub category: String,
    pub correct: bool,
    pub q_clust: f64,
    /// Lifted points in the case.
    pub points: usize,
    pub sigma_kappa_diff: f64,
    pub sigma_int: f64,
    /// Candidate cluster counts examined; the reported clustering time is divided by it.
    pub n_c: usize,
    pub times: StageTimes,
    pub weights: StageWeights,
}

impl Default for CaseOutcome {
    fn default() -> Self {
        CaseOutcome {
            id: String::new(),
            category: String::new(),
            correct: false,
            q_clust: 0.0,
            points: 0,
            sigma_kappa_diff: 0.0,
            sigma_int: 0.0,
            n_c: 1,
            times: StageTimes::default(),
            weights: StageWeights::default(),
        }
    }
}

impl CaseOutcome {
    /// Stage times as reported: clustering divided by n_c.
    pub fn reported_times(&self) -> [f64; 4] {
        let t = &self.times;
        [t.disc, t.kernel, t.affinity, t.clust / self.n_c.max(1) as f64]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.reported_times().iter().all(|t| t.is_finite() && *t >= 0.0)
            && [self.weights.disc, self.weights.kernel, self.weights.affinity, self.weights.clust]
                .iter()
                .all(|w| w.is_finite() && *w > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("case {:?} has negative times or non-positive weights", self.id)))
        }
    }
}

pub const STAGES: [&str; 4] = ["t_disc", "t_kernel", "t_affinity", "t_clust"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub stage: String,
    pub mean: f64,
    pub weighted_mean: f64,
}

/// Plain and weighted means per stage, in [`STAGES`] order.
pub fn timing_report(outcomes: &[CaseOutcome]) -> Result<Vec<TimingRow>> {
    if outcomes.is_empty() {
        return Err(Error::InvalidInput("timing report of an empty outcome list".into()));
    }
    outcomes.iter().try_for_each(CaseOutcome::validate)?;
    let n = outcomes.len() as f64;
    Ok((0..4)
        .map(|s| {
            let weight = |o: &CaseOutcome| match s {
                0 => o.weights.disc,
                1 => o.weights.kernel,
                2 => o.weights.affinity,
                _ => o.weights.clust,
            };
            let mean = outcomes.iter().map(|o| o.reported_times()[s]).sum::<f64>() / n;
            let wsum: f64 = outcomes.iter().map(weight).sum();
            let weighted = outcomes.iter().map(|o| weight(o) * o.reported_times()[s]).sum::<f64>() / wsum;
            TimingRow { stage: STAGES[s].to_string(), mean, weighted_mean: weighted }
        })
        .collect())
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub category: String,
    pub size: usize,
    pub sigma_kappa_diff: (f64, f64),
    pub sigma_int: (f64, f64),
    pub cdr: f64,
    pub q_clust: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// One row per category present, then an "All" row.
    pub rows: Vec<TableRow>,
    pub timing: Vec<TimingRow>,
}

fn row(category: &str, cases: &[&CaseOutcome]) -> TableRow {
    let col = |f: fn(&CaseOutcome) -> f64| mean_std(&cases.iter().map(|o| f(o)).collect::<Vec<_>>());
    TableRow {
        category: category.to_string(),
        size: cases.len(),
        sigma_kappa_diff: col(|o| o.sigma_kappa_diff),
        sigma_int: col(|o| o.sigma_int),
        cdr: cases.iter().filter(|o| o.correct).count() as f64 / cases.len() as f64,
        q_clust: col(|o| o.q_clust),
    }
}

impl Report {
    pub fn new(outcomes: &[CaseOutcome]) -> Result<Self> {
        let summary = cdr(outcomes)?;
        let mut by_cat: BTreeMap<&str, Vec<&CaseOutcome>> = BTreeMap::new();
        for o in outcomes {
            by_cat.entry(o.category.as_str()).or_default().push(o);
        }
        let mut rows: Vec<TableRow> = by_cat.iter().map(|(c, v)| row(c, v)).collect();
        let mut all = row("All", &outcomes.iter().collect::<Vec<_>>());
        all.cdr = summary.overall;
        rows.push(all);
        Ok(Report { rows, timing: timing_report(outcomes)? })
    }

    /// Aligned text: the parameter and performance table, then the timing table.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let pm = |v: (f64, f64), p: usize| format!("{:.p$} ± {:.p$}", v.0, v.1);
        let _ = writeln!(
            s,
            "{:<8} {:>5} {:>22} {:>18} {:>7} {:>18}",
            "Category", "Size", "sigma_kappa_diff", "sigma_int", "CDR%", "Q_clust"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<8} {:>5} {:>22} {:>18} {:>7.4} {:>18}",
                r.category,
                r.size,
                pm(r.sigma_kappa_diff, 5),
                pm(r.sigma_int, 3),
                r.cdr,
                pm(r.q_clust, 4)
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<12} {:>14} {:>16}", "Stage", "Mean (s)", "Weighted (s)");
        for t in &self.timing {
            let _ = writeln!(s, "{:<12} {:>14.6} {:>16.6}", t.stage, t.mean, t.weighted_mean);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(times: [f64; 4], weights: StageWeights) -> CaseOutcome {
        CaseOutcome {
            category: "A".into(),
            n_c: 20,
            times: StageTimes { disc: times[0], kernel: times[1], affinity: times[2], clust: times[3] },
            weights,
            ..CaseOutcome::default()
        }
    }

    #[test]
    fn weight_formulas() {
        let w = StageWeights::from_sizes(51, 51, 18, 9, 300);
        assert_eq!(w.disc, 46818.0);
        assert_eq!(w.kernel, 46818.0 * 9.0);
        assert_eq!(w.affinity, 90000.0);
        assert_eq!(w.clust, 90000.0);
    }

    #[test]
    fn single_case_weighted_equals_plain() {
        let t = timing_report(&[case([0.1, 4.0, 2.0, 20.0], StageWeights::from_sizes(51, 51, 18, 9, 300))]).unwrap();
        for r in &t {
            assert!((r.mean - r.weighted_mean).abs() < 1e-15);
        }
        assert_eq!(t[3].mean, 1.0);
    }

    #[test]
    fn equal_weights_give_plain_means() {
        let w = StageWeights::from_sizes(10, 10, 8, 3, 40);
        let cases = [case([1.0, 2.0, 3.0, 4.0], w), case([3.0, 6.0, 9.0, 12.0], w)];
        for r in timing_report(&cases).unwrap() {
            assert!((r.mean - r.weighted_mean).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_shift_the_mean() {
        let small = StageWeights::from_sizes(10, 10, 8, 3, 10);
        let big = StageWeights::from_sizes(20, 20, 8, 3, 40);
        let t = timing_report(&[case([1.0; 4], small), case([3.0; 4], big)]).unwrap();
        assert_eq!(t[0].mean, 2.0);
        assert!((t[0].weighted_mean - (800.0 + 3.0 * 3200.0) / 4000.0).abs() < 1e-12);
    }

    #[test]
    fn report_rows_and_text() {
        let mut a = case([0.0; 4], StageWeights::default());
        a.correct = true;
        a.q_clust = 1.0;
        let mut b = a.clone();
        b.category = "B".into();
        b.correct = false;
        let r = Report::new(&[a, b]).unwrap();
        assert_eq!(r.rows.iter().map(|r| r.category.as_str()).collect::<Vec<_>>(), ["A", "B", "All"]);
        assert_eq!(r.rows[2].cdr, 0.5);
        let text = r.to_text();
        assert!(text.contains("t_kernel") && text.contains("All"));
    }

    #[test]
    fn rejects_bad_timings() {
        assert!(timing_report(&[case([-1.0, 0.0, 0.0, 0.0], StageWeights::default())]).is_err());
        assert!(timing_report(&[]).is_err());
    }
}
