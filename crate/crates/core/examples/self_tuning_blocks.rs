//! Self-tuning spectral clustering on a block-structured affinity: the
//! alignment cost per candidate K and the recovered groups, with and
//! without leakage between blocks.
//!
//! ```text
//! cargo run --release --example self_tuning_blocks
//! ```

use grouping5d::affinity::AffinityMatrix;
use grouping5d::cluster::{select_k_and_cluster, SpectralParams};

fn main() -> grouping5d::Result<()> {
    let sizes = [30, 40, 50];
    let block: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &n)| std::iter::repeat_n(b, n)).collect();
    let n = block.len();
    for eps in [0.0, 1e-3, 0.05, 0.3] {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[i * n + j] = if block[i] == block[j] { 1.0 } else { eps };
                }
            }
        }
        let r = select_k_and_cluster(&AffinityMatrix::from_dense(n, d)?, &SpectralParams::default())?;
        let costs: Vec<String> = r.costs.iter().take(5).map(|(k, j)| format!("{k}:{:.3}", j / n as f64)).collect();
        let spans: Vec<String> = [(0, 30), (30, 70), (70, 120)]
            .iter()
            .map(|&(a, b)| {
                let mut g: Vec<u32> = r.labels[a..b].to_vec();
                g.dedup();
                format!("{g:?}")
            })
            .collect();
        println!(
            "ε = {eps:<5}: K = {}, Q = {:.3}, J/N {} .., block labels {}",
            r.k,
            r.q_clust,
            costs.join(" "),
            spans.join(" ")
        );
    }
    Ok(())
}
