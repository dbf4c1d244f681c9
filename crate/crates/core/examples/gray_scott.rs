//! Gray-Scott spots from a seeded square on a 128x128 periodic grid.

use synlearn::rd::{pattern_metric, seeded_square, simulate_2d, GrayScott, RdState2D, StepControl};

fn main() -> synlearn::Result<()> {
    let n = 128;
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let (u, v) = seeded_square(n, n, 10);
    let state = RdState2D::new(
        u,
        v,
        1.0 / n as f64,
        2e-5,
        1e-5,
        GrayScott {
            feed: 0.037,
            kill: 0.06,
        },
    )?;
    let ctrl = StepControl {
        dt: 0.8 * state.stability_bound(),
        steps,
        snapshot_every: 2_000,
    };
    let run = simulate_2d(&state, &ctrl)?;
    for p in &run.trace {
        println!("step {:>6}  t = {:>9.2}  std(v) = {:.5}", p.step, p.time, p.metric);
    }
    println!("final pattern metric {:.5}", pattern_metric(&run.final_state.v));
    Ok(())
}
