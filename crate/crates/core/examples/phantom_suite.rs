//! Runs the full phantom suite (one case per category) and prints the
//! correct-detection report.
//!
//! ```text
//! cargo run --release --example phantom_suite -- [seed]
//! ```

use grouping5d::cli::pipeline::{run_phantom_suite, timed_bank};
use grouping5d::cli::Params;
use grouping5d::eval::{CaseOutcome, Report};

fn main() -> grouping5d::Result<()> {
    let seed = std::env::args().nth(1).map_or(Ok(1), |s| s.parse()).expect("seed must be an integer");
    let params =
        Params { kappa_min: -0.2, kappa_max: 0.2, kappa_step: 0.01, sigma_kappa_diff: 0.001, ..Params::default() };
    let (bank, secs) = timed_bank(&params, None)?;
    println!("bank of {} slices built in {secs:.1}s", bank.grids.len());
    let records = run_phantom_suite(seed, &bank, secs, &params)?;
    for r in &records {
        let o = &r.outcome;
        let verdict = if o.correct { "correct" } else { "missed" };
        println!("{:4} {verdict:7} K = {:2} Q = {:.3} points {}", o.category, r.result.k, o.q_clust, o.points);
    }
    let outcomes: Vec<CaseOutcome> = records.into_iter().map(|r| r.outcome).collect();
    println!("\n{}", Report::new(&outcomes)?.to_text());
    Ok(())
}
