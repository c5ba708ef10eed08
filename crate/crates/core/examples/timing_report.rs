//! Times each stage on one crossing patch of the three-circles stimulus and
//! prints the stage table.
//!
//! ```text
//! cargo run --release --example timing_report
//! ```

use grouping5d::cli::pipeline::{run_patch, BankSource};
use grouping5d::cli::Params;
use grouping5d::eval::{CaseOutcome, Report};
use grouping5d::phantom::{generate, PhantomSpec};

fn main() -> grouping5d::Result<()> {
    let params = Params::default();
    let case = generate(&PhantomSpec::three_circles())?;
    let crossing = case.pixels.iter().find(|p| p.labels().len() > 1).expect("the circles cross");
    let centre = (crossing.x as usize, crossing.y as usize);
    let truth = case.lifted_truth(params.n_theta, 1.0)?;
    let run = run_patch(&truth.map, Some(centre), BankSource::Fresh, &params)?;
    println!("patch at {centre:?}: {} points, K = {}", run.points.len(), run.result.k);
    let outcome = CaseOutcome {
        id: "crossing".into(),
        category: "crossing".into(),
        correct: true,
        q_clust: run.result.q_clust,
        points: run.points.len(),
        sigma_kappa_diff: params.sigma_kappa_diff,
        sigma_int: params.sigma_int,
        n_c: run.timings.n_c,
        times: run.timings.stage_times(),
        weights: run.timings.weights,
    };
    print!("{}", Report::new(&[outcome])?.to_text());
    Ok(())
}
