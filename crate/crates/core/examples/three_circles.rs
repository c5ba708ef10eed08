//! Groups the three-circles stimulus end to end and scores each circle.
//!
//! ```text
//! cargo run --release --example three_circles
//! ```

use grouping5d::cli::pipeline::{run_patch, BankSource};
use grouping5d::cli::Params;
use grouping5d::eval::{match_partition, DEFAULT_JACCARD};
use grouping5d::phantom::{generate, PhantomSpec};

fn main() -> grouping5d::Result<()> {
    let params = Params { paths: 30_000, ..Params::default() };
    let case = generate(&PhantomSpec::three_circles())?;
    let truth = case.lifted_truth(params.n_theta, 1.0)?;
    println!("{} lifted points on {} circles", truth.map.len(), case.unit_count());

    let run = run_patch(&truth.map, None, BankSource::Fresh, &params)?;
    let r = &run.result;
    println!("K = {} (cost rule picked {}), Q_clust = {:.4}, noise {}", r.k, r.selected_k, r.q_clust, r.noise.len());
    for (k, j) in &r.costs {
        println!("  K = {k:2}: J/N = {:.4}", j / r.n_active as f64);
    }
    let m = match_partition(&r.labels, &truth.labels, DEFAULT_JACCARD)?;
    for u in &m.units {
        println!("circle {} -> group {:?}, Jaccard {:.3}", u.unit, u.group, u.jaccard);
    }
    println!("correct: {}", m.correct);
    let t = &run.timings;
    println!(
        "times: disc {:.3}s, kernel {:.3}s, affinity {:.3}s, clustering {:.3}s",
        t.t_disc, t.t_kernel, t.t_affinity, t.t_clust
    );
    Ok(())
}
