//! Thermodynamics of a small degenerate spectrum across temperatures.

use synlearn::ensemble::{compute_thermodynamics, EnsembleSpec};

fn main() -> synlearn::Result<()> {
    let energies = vec![0.0, 1.0, 2.0, 5.0];
    let degeneracies = vec![1.0, 3.0, 3.0, 1.0];
    println!("{:>8} {:>12} {:>12} {:>10}  p(ground)", "T", "F", "<E>", "S");
    for t in [0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
        let spec = EnsembleSpec::new(energies.clone(), 1.0 / t).with_degeneracies(degeneracies.clone());
        let r = compute_thermodynamics(&spec)?;
        println!(
            "{t:>8.2} {:>12.5} {:>12.5} {:>10.5}  {:.4}",
            r.free_energy, r.mean_energy, r.entropy, r.probabilities[0]
        );
    }
    // high temperature: S -> ln(sum of degeneracies)
    println!("ln 8 = {:.5}", 8f64.ln());
    Ok(())
}
