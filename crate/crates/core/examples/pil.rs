//! Pseudoinverse learning: one linear solve for the output layer, with the
//! ridge term supplied by the Jacobian penalty.

use synlearn::data::{gen_regression, RegressionFn, RegressionSpec};
use synlearn::fnn::{estimate_reg_param, loss_regularized, train_pil, PilOptions};

fn main() -> synlearn::Result<()> {
    let data = gen_regression(&RegressionSpec {
        function: RegressionFn::Sine,
        n: 60,
        noise_sigma: 0.2,
        seed: 3,
        ..Default::default()
    })?;
    let opts = PilOptions {
        seed: 11,
        ..Default::default()
    };

    for hidden in [10, 40, 60] {
        let plain = train_pil(&data, hidden, 0.0, &opts)?;
        let h = estimate_reg_param(&plain, &data)?;
        let ridge = train_pil(&data, hidden, h, &opts)?;
        let a = loss_regularized(&plain, &data, 0.0, false)?;
        let b = loss_regularized(&ridge, &data, h, false)?;
        let norm = |m: &synlearn::fnn::SlfnModel| m.w_out.norm();
        println!(
            "H = {hidden:>2}: h = {h:.4e}  SSE {:.4} -> {:.4}  |W_out| {:.2} -> {:.2}",
            a.sse_term,
            b.sse_term,
            norm(&plain),
            norm(&ridge)
        );
    }
    Ok(())
}
