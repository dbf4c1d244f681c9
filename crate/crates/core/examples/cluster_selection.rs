//! Pick the number of mixture components by minimum KL[kde || gmm] on
//! synthetic blobs, for seeds 0..10.
//!
//! `cargo run --release --example cluster_selection -- [sigma]`

use synlearn::data::{gen_blobs, BlobSpec};
use synlearn::mixture::{select_cluster_number, SelectOptions};

fn main() -> synlearn::Result<()> {
    let sigma: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(BlobSpec::default().sigma);
    for (k_true, per_cluster_n, k_max) in [(3, 150, 6), (1, 300, 5)] {
        let mut hits = 0;
        for seed in 0..10 {
            let spec = BlobSpec {
                k: k_true,
                per_cluster_n,
                sigma,
                seed,
                ..Default::default()
            };
            let data = gen_blobs(&spec)?;
            let report = select_cluster_number(
                &data,
                1,
                k_max,
                &SelectOptions {
                    seed,
                    ..Default::default()
                },
            )?;
            let kl: Vec<String> = report
                .per_k
                .iter()
                .map(|r| format!("{}:{:.3}", r.k, r.kl_estimate))
                .collect();
            println!(
                "k_true={k_true} seed={seed} chosen={}  {}",
                report.chosen_k,
                kl.join(" ")
            );
            hits += usize::from(report.chosen_k == k_true);
        }
        println!("k_true={k_true}: recovered {hits}/10\n");
    }
    Ok(())
}
