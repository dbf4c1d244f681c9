//! 1-D Allen-Cahn gradient flow: the discrete free energy never increases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synlearn::rd::{free_energy_1d, simulate_1d, stability_bound_1d, Boundary, Field1D, Potential, StepControl};

fn main() -> synlearn::Result<()> {
    let n = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let values = (0..n).map(|_| rng.random_range(-0.1..0.1)).collect();
    let field = Field1D::new(values, 1.0, Boundary::Periodic)?;
    let ctrl = StepControl {
        dt: 0.4 * stability_bound_1d(1.0, 1.0),
        steps: 10_000,
        snapshot_every: 1_000,
    };
    let run = simulate_1d(&field, 1.0, Potential::AllenCahn, &ctrl)?;
    for p in &run.trace {
        println!("step {:>6}  F = {:>10.4}", p.step, p.metric);
    }
    let walls = run
        .final_field
        .values
        .iter()
        .zip(run.final_field.values.iter().cycle().skip(1))
        .filter(|(a, b)| a.signum() != b.signum())
        .count();
    println!(
        "final F = {:.4}, {} domain walls",
        free_energy_1d(&run.final_field, 1.0, Potential::AllenCahn),
        walls
    );
    Ok(())
}
