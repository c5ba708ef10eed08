//! Scoring groupings against ground truth and reporting.

pub mod av;
pub mod report;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::cluster::NOISE;
use crate::error::{Error, Result};
pub use av::{split_classes, ClassMap, UnitMap};
pub use report::{timing_report, CaseOutcome, Report, StageTimes, StageWeights, TableRow, TimingRow};

pub const DEFAULT_JACCARD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitMatch {
    pub unit: u32,
    pub group: Option<u32>,
    pub jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionMatch {
    pub correct: bool,
    /// One entry per ground-truth unit, ascending.
    pub units: Vec<UnitMatch>,
}

/// Points of `unit` as seen when comparing with `group`: single-label
/// points of the unit, plus multi-label points carrying the unit that were
/// predicted as `group` (a multi-label point predicted elsewhere is taken
/// as correct for one of its other units).
fn jaccard(pred: &[u32], truth: &[Vec<u32>], unit: u32, group: u32) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (p, t) in pred.iter().zip(truth) {
        if *p == NOISE || t.is_empty() {
            continue;
        }
        let in_group = *p == group;
        let in_unit = t.contains(&unit) && (t.len() == 1 || in_group);
        inter += (in_unit && in_group) as usize;
        union += (in_unit || in_group) as usize;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Greedy one-to-one matching of ground-truth units to predicted groups by
/// descending overlap. Correct iff every unit gets a distinct group with
/// Jaccard at least `threshold`. Points predicted as noise and points
/// without ground truth (an empty label set) are left out.
pub fn match_partition(pred: &[u32], truth: &[Vec<u32>], threshold: f64) -> Result<PartitionMatch> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "prediction covers {} points, ground truth {}",
            pred.len(),
            truth.len()
        )));
    }
    let units: BTreeSet<u32> = truth.iter().flatten().copied().collect();
    if units.contains(&NOISE) {
        return Err(Error::InvalidInput("ground-truth unit 0 is reserved for noise".into()));
    }
    let mut overlap: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for (p, t) in pred.iter().zip(truth) {
        if *p != NOISE {
            for &u in t {
                *overlap.entry((u, *p)).or_default() += 1;
            }
        }
    }
    // Ties go to the lower unit, then to the group whose first point comes
    // first, so the outcome does not depend on how groups are numbered.
    let mut first: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, &p) in pred.iter().enumerate() {
        first.entry(p).or_insert(i);
    }
    let mut pairs: Vec<((u32, u32), usize)> = overlap.into_iter().collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0 .0.cmp(&b.0 .0)).then(first[&a.0 .1].cmp(&first[&b.0 .1])));
    let mut assigned: BTreeMap<u32, u32> = BTreeMap::new();
    let mut taken = BTreeSet::new();
    for ((u, g), _) in pairs {
        if !assigned.contains_key(&u) && !taken.contains(&g) {
            assigned.insert(u, g);
            taken.insert(g);
        }
    }
    let units: Vec<UnitMatch> = units
        .into_iter()
        .map(|u| {
            let group = assigned.get(&u).copied();
            let jaccard = group.map_or(0.0, |g| jaccard(pred, truth, u, g));
            UnitMatch { unit: u, group, jaccard }
        })
        .collect();
    let correct = !units.is_empty() && units.iter().all(|m| m.group.is_some() && m.jaccard >= threshold);
    Ok(PartitionMatch { correct, units })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdrSummary {
    pub overall: f64,
    pub cases: usize,
    /// Category → (correct, total, rate); categories without cases are absent.
    pub per_category: BTreeMap<String, (usize, usize, f64)>,
}

/// Correct detection rate, overall and per category.
pub fn cdr(outcomes: &[CaseOutcome]) -> Result<CdrSummary> {
    if outcomes.is_empty() {
        return Err(Error::InvalidInput("CDR of an empty outcome list".into()));
    }
    let mut per: BTreeMap<String, (usize, usize, f64)> = BTreeMap::new();
    for o in outcomes {
        let e = per.entry(o.category.clone()).or_default();
        e.0 += o.correct as usize;
        e.1 += 1;
    }
    for e in per.values_mut() {
        e.2 = e.0 as f64 / e.1 as f64;
    }
    let correct = outcomes.iter().filter(|o| o.correct).count();
    Ok(CdrSummary { overall: correct as f64 / outcomes.len() as f64, cases: outcomes.len(), per_category: per })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(labels: &[u32]) -> Vec<Vec<u32>> {
        labels.iter().map(|&l| vec![l]).collect()
    }

    #[test]
    fn identical_partition_matches() {
        let t = single(&[1, 1, 2, 2, 3]);
        let m = match_partition(&[1, 1, 2, 2, 3], &t, 0.8).unwrap();
        assert!(m.correct);
        assert!(m.units.iter().all(|u| u.jaccard == 1.0));
    }

    #[test]
    fn merged_units_fail() {
        let t = single(&[1, 1, 1, 2, 2, 2]);
        let m = match_partition(&[5, 5, 5, 5, 5, 5], &t, 0.8).unwrap();
        assert!(!m.correct);
        assert_eq!(m.units.iter().filter(|u| u.group.is_some()).count(), 1);
    }

    #[test]
    fn ten_percent_mislabelled() {
        let mut truth = vec![1u32; 100];
        truth.extend(vec![2u32; 100]);
        let mut pred = truth.clone();
        for p in pred.iter_mut().take(10) {
            *p = 2;
        }
        let m = match_partition(&pred, &single(&truth), 0.8).unwrap();
        assert!(m.correct);
        assert!((m.units[0].jaccard - 0.9).abs() < 1e-12);
        assert!((m.units[1].jaccard - 100.0 / 110.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_points_count_for_either_unit() {
        let truth = vec![vec![1], vec![1], vec![1, 2], vec![2], vec![2]];
        assert!(match_partition(&[1, 1, 1, 2, 2], &truth, 1.0).unwrap().correct);
        assert!(match_partition(&[1, 1, 2, 2, 2], &truth, 1.0).unwrap().correct);
    }

    #[test]
    fn noise_is_left_out_and_length_checked() {
        let t = single(&[1, 1, 1, 2, 2, 2]);
        assert!(match_partition(&[1, 1, 0, 2, 2, 0], &t, 1.0).unwrap().correct);
        assert!(match_partition(&[1, 1], &t, 0.8).is_err());
        assert!(!match_partition(&[0; 6], &t, 0.8).unwrap().correct);
    }

    #[test]
    fn cdr_arithmetic() {
        let mk = |cat: &str, ok: bool| CaseOutcome { category: cat.into(), correct: ok, ..CaseOutcome::default() };
        let mut v: Vec<_> = (0..19).map(|_| mk("A", true)).collect();
        v.extend((0..6).map(|_| mk("B", false)));
        let s = cdr(&v).unwrap();
        assert!((s.overall - 0.76).abs() < 1e-12);
        assert_eq!(s.per_category["A"], (19, 19, 1.0));
        assert_eq!(s.per_category["B"], (0, 6, 0.0));
        assert!(!s.per_category.contains_key("C"));
        assert!(cdr(&[]).is_err());
    }
}
