//! Acceptance gate. Runs every criterion in order, prints one PASS/FAIL line
//! each and exits non-zero if any failed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use synlearn::data::{gen_blobs, BlobSpec};
use synlearn::ensemble::{compute_thermodynamics, ensemble_free_energy, EnsembleSpec};
use synlearn::fnn::{
    estimate_reg_param, forward, loss_regularized, objective_gradient, train_pil, Activation, PilOptions, SlfnModel,
    SupervisedSet,
};
use synlearn::mixture::{
    estimate_bandwidth, fit_gmm_em, kl_free_energy, select_cluster_number, BandwidthMap, Dataset, GmmModel, KdeModel,
    McOptions, SelectOptions,
};
use synlearn::rd::{
    free_energy_1d, pattern_metric, seeded_square, simulate_2d, stability_bound_1d, step_gradient_flow_1d,
    step_turing_2d, Boundary, Field1D, GrayScott, Grid, Potential, RdState2D, StepControl,
};

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn within_time(detail: String, elapsed: Duration, limit_s: f64) -> Outcome {
    if elapsed.as_secs_f64() < limit_s {
        Ok(detail)
    } else {
        Err(format!(
            "{detail}; runtime {:.2}s exceeds {limit_s}s",
            elapsed.as_secs_f64()
        ))
    }
}

// ------------------------------------------------------------------ 1, 2

fn random_spec(r: &mut ChaCha8Rng) -> EnsembleSpec {
    let m = r.random_range(1..=40);
    let energies: Vec<f64> = (0..m).map(|_| r.random_range(-20.0..20.0)).collect();
    let degeneracies: Vec<f64> = (0..m).map(|_| r.random_range(1..=6) as f64).collect();
    let beta = 10f64.powf(r.random_range(-2.0..1.5));
    let mut spec = EnsembleSpec::new(energies, beta).with_degeneracies(degeneracies);
    spec.k_b = r.random_range(0.5..2.0);
    spec
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(1);
    let (mut worst_s, mut worst_p, mut worst_shift) = (0f64, 0f64, 0f64);
    for _ in 0..200 {
        let spec = random_spec(&mut r);
        let rep = compute_thermodynamics(&spec).map_err(|e| e.to_string())?;
        let t = spec.temperature();
        let s_identity = (rep.mean_energy - rep.free_energy) / t;
        worst_s = worst_s.max((rep.entropy - s_identity).abs() / s_identity.abs().max(f64::MIN_POSITIVE));
        worst_p = worst_p.max((rep.probabilities.iter().sum::<f64>() - 1.0).abs());

        let c = r.random_range(-50.0..50.0);
        let mut shifted = spec.clone();
        shifted.energies.iter_mut().for_each(|e| *e += c);
        let rs = compute_thermodynamics(&shifted).map_err(|e| e.to_string())?;
        let mut d = (rs.free_energy - (rep.free_energy + c)).abs();
        for (a, b) in rep.probabilities.iter().zip(&rs.probabilities) {
            d = d.max((a - b).abs());
        }
        let fb = ensemble_free_energy(&spec.energies, spec.beta).map_err(|e| e.to_string())?;
        let fbs = ensemble_free_energy(&shifted.energies, spec.beta).map_err(|e| e.to_string())?;
        d = d.max((fbs - (fb + c)).abs());
        worst_shift = worst_shift.max(d);
    }
    let detail = format!("max rel S err {worst_s:.1e}, max |sum p - 1| {worst_p:.1e}, max shift err {worst_shift:.1e}");
    if worst_s > 1e-10 || worst_p > 1e-12 || worst_shift > 1e-12 {
        return Err(detail);
    }
    within_time(detail, t0.elapsed(), 1.0)
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(2);
    for case in 0..200 {
        let m = r.random_range(1..=60);
        let energies: Vec<f64> = (0..m).map(|_| r.random_range(-10.0..10.0)).collect();
        let beta = 10f64.powf(r.random_range(-3.0..3.0));
        let f = ensemble_free_energy(&energies, beta).map_err(|e| e.to_string())?;
        let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let lower = min - (m as f64).ln() / beta;
        // a few ulps of slack for rounding in the bracket endpoints themselves
        let slack = 4.0 * f64::EPSILON * (min.abs() + lower.abs() + 1.0);
        if !(f >= lower - slack && f <= min + slack) {
            return Err(format!(
                "case {case}: F = {f} outside [{lower}, {min}] (beta {beta}, M {m})"
            ));
        }
    }
    let cold = ensemble_free_energy(&[0.7, -1.3, 2.0, 5.5, -0.2], 1000.0).map_err(|e| e.to_string())?;
    let err = (cold - (-1.3)).abs();
    if err > 1e-6 {
        return Err(format!("beta = 1000: |F - min E| = {err:.2e}"));
    }
    within_time(
        format!("200 cases bracketed; beta = 1000 error {err:.1e}"),
        t0.elapsed(),
        1.0,
    )
}

// ------------------------------------------------------------------ 3, 4, 5

struct Benchmark {
    name: &'static str,
    data: Dataset,
    seed: u64,
    k_max: usize,
}

fn benchmarks() -> Vec<Benchmark> {
    let mut out = Vec::new();
    for seed in 0..10 {
        let three = BlobSpec {
            k: 3,
            per_cluster_n: 150,
            dim: 2,
            separation: 8.0,
            sigma: 0.1,
            seed,
        };
        out.push(Benchmark {
            name: "three",
            data: gen_blobs(&three).unwrap(),
            seed,
            k_max: 6,
        });
    }
    for seed in 0..10 {
        let one = BlobSpec {
            k: 1,
            per_cluster_n: 300,
            dim: 2,
            separation: 8.0,
            sigma: 0.1,
            seed,
        };
        out.push(Benchmark {
            name: "one",
            data: gen_blobs(&one).unwrap(),
            seed,
            k_max: 5,
        });
    }
    out
}

fn criterion_3(runs: &[Benchmark]) -> Outcome {
    let t0 = Instant::now();
    let (mut three_ok, mut one_ok) = (0, 0);
    let mut misses = Vec::new();
    for b in runs {
        let opts = SelectOptions {
            seed: b.seed,
            ..Default::default()
        };
        let rep = select_cluster_number(&b.data, 1, b.k_max, &opts).map_err(|e| e.to_string())?;
        let want = if b.name == "three" { 3 } else { 1 };
        if rep.chosen_k == want {
            if want == 3 {
                three_ok += 1;
            } else {
                one_ok += 1;
            }
        } else {
            misses.push(format!("{} blob(s) seed {} -> k={}", b.name, b.seed, rep.chosen_k));
        }
    }
    let mut detail = format!("three blobs {three_ok}/10, single blob {one_ok}/10");
    if !misses.is_empty() {
        detail.push_str(&format!(" (misses: {})", misses.join(", ")));
    }
    if three_ok < 9 || one_ok < 9 {
        return Err(detail);
    }
    within_time(detail, t0.elapsed(), 60.0)
}

fn random_spd(r: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| r.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(d, d) * r.random_range(0.05..1.0)
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(4);
    let mc = McOptions {
        samples: 4000,
        seed: 44,
    };

    let n = 80;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)])
        .collect();
    let data = Dataset::from_rows(&rows).unwrap();
    let h_sq = 0.05;
    let kde = KdeModel::new(data.clone(), h_sq).unwrap();
    let own = GmmModel::isotropic(
        vec![1.0 / n as f64; n],
        rows.iter().map(|x| DVector::from_column_slice(x)).collect(),
        h_sq,
    )
    .unwrap();
    let selfkl = kl_free_energy(&kde, &own, &mc).map_err(|e| e.to_string())?;
    // the two densities agree to rounding, so the standard error can be ~1e-16
    if selfkl.kl_estimate.abs() > 3.0 * selfkl.std_error + 1e-12 {
        return Err(format!(
            "self-KL {:.3e} with std error {:.3e}",
            selfkl.kl_estimate, selfkl.std_error
        ));
    }

    let mut worst = f64::INFINITY;
    for pair in 0..50u64 {
        let d = r.random_range(1..=3);
        let n = r.random_range(20..=60);
        let pts: Vec<f64> = (0..n * d).map(|_| r.random_range(-3.0..3.0)).collect();
        let kde = KdeModel::new(
            Dataset::from_flat(n, d, pts).unwrap(),
            10f64.powf(r.random_range(-2.0..0.5)),
        )
        .unwrap();
        let k = r.random_range(1..=4);
        let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / total).collect();
        let means = (0..k)
            .map(|_| DVector::from_fn(d, |_, _| r.random_range(-3.0..3.0)))
            .collect();
        let covs = (0..k).map(|_| random_spd(&mut r, d)).collect();
        let gmm = GmmModel::new(weights, means, covs).unwrap();
        let est = kl_free_energy(
            &kde,
            &gmm,
            &McOptions {
                samples: 4000,
                seed: 400 + pair,
            },
        )
        .map_err(|e| e.to_string())?;
        let z = est.kl_estimate / est.std_error;
        worst = worst.min(z);
        if est.kl_estimate < -3.0 * est.std_error {
            return Err(format!(
                "pair {pair}: KL {:.4} < -3 x {:.4}",
                est.kl_estimate, est.std_error
            ));
        }
    }
    let detail = format!(
        "self-KL {:.1e} (SE {:.1e}); 50 random pairs, min KL/SE {worst:.1}",
        selfkl.kl_estimate, selfkl.std_error
    );
    within_time(detail, t0.elapsed(), 30.0)
}

fn criterion_5(runs: &[Benchmark]) -> Outcome {
    let mut checked = 0;
    let mut worst = 0f64;
    for b in runs {
        let opts = SelectOptions {
            seed: b.seed,
            ..Default::default()
        };
        for k in 1..=b.k_max {
            let fit = fit_gmm_em(&b.data, k, &opts.em_for(k)).map_err(|e| e.to_string())?;
            let bw = estimate_bandwidth(&b.data, &fit.model, &opts.bandwidth).map_err(|e| e.to_string())?;
            if !bw.converged {
                return Err(format!(
                    "{} seed {} k={k}: fixed point did not converge",
                    b.name, b.seed
                ));
            }
            let map = BandwidthMap::new(&b.data, &fit.model).map_err(|e| e.to_string())?;
            let next = map
                .apply(bw.h_sq)
                .ok_or_else(|| format!("{} seed {} k={k}: map undefined at h^2", b.name, b.seed))?;
            let ratio = (next - bw.h_sq).abs() / (opts.bandwidth.fp_tol * (1.0 + bw.h_sq));
            worst = worst.max(ratio);
            if ratio >= 1.0 {
                return Err(format!(
                    "{} seed {} k={k}: re-application moved h^2 by {ratio:.2} x tol",
                    b.name, b.seed
                ));
            }
            checked += 1;

            if k == 3 || k == 1 {
                let c = [3.7, -1.2];
                let moved = b.data.translated(&c).unwrap();
                let m = &fit.model;
                let shifted = GmmModel::new(
                    m.weights().to_vec(),
                    m.means().iter().map(|mu| mu + DVector::from_column_slice(&c)).collect(),
                    m.covariances().to_vec(),
                )
                .unwrap();
                let bw2 = estimate_bandwidth(&moved, &shifted, &opts.bandwidth).map_err(|e| e.to_string())?;
                let d = (bw2.h_sq - bw.h_sq).abs();
                if d > 1e-8 {
                    return Err(format!(
                        "{} seed {} k={k}: translated h^2 differs by {d:.2e}",
                        b.name, b.seed
                    ));
                }
            }
        }
    }
    Ok(format!(
        "{checked} fixed points re-applied, worst move {worst:.2e} x tol; translation invariant"
    ))
}

// ------------------------------------------------------------------ 6 to 9

/// Independent forward pass: value of `SSE + h·Σ‖∂g/∂x‖²_F`.
fn oracle_objective(m: &SlfnModel, x: &DMatrix<f64>, z: &DMatrix<f64>, h: f64) -> f64 {
    let sigmoid = matches!(m.activation, Activation::Sigmoid);
    let mut total = 0.0;
    for i in 0..x.nrows() {
        let a = &m.w_in * x.row(i).transpose() + &m.b_in;
        let (s, ds): (Vec<f64>, Vec<f64>) = a
            .iter()
            .map(|&a| {
                if sigmoid {
                    let s = 1.0 / (1.0 + (-a).exp());
                    (s, s * (1.0 - s))
                } else {
                    let t = a.tanh();
                    (t, 1.0 - t * t)
                }
            })
            .unzip();
        let g = &m.w_out * DVector::from_vec(s) + &m.b_out;
        total += (z.row(i).transpose() - g).norm_squared();
        let jac = &m.w_out * DMatrix::from_diagonal(&DVector::from_vec(ds)) * &m.w_in;
        total += h * jac.norm_squared();
    }
    total
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(6);
    let mut worst = 0f64;
    let mut compared = 0;
    for net in 0..20u64 {
        let act = if net % 2 == 0 {
            Activation::Tanh
        } else {
            Activation::Sigmoid
        };
        let m = SlfnModel::random(2, 3, 2, act, 600 + net);
        let x = DMatrix::from_fn(10, 2, |_, _| r.random_range(-1.5..1.5));
        let z = DMatrix::from_fn(10, 2, |_, _| r.random_range(-1.0..1.0));
        let data = SupervisedSet::new(x.clone(), z.clone()).unwrap();
        for h in [0.0, 0.1, 1.0] {
            let (_, grad) = objective_gradient(&m, &data, h).map_err(|e| e.to_string())?;
            for which in 0..4 {
                let analytic = match which {
                    0 => grad.w_in.as_slice(),
                    1 => grad.b_in.as_slice(),
                    2 => grad.w_out.as_slice(),
                    _ => grad.b_out.as_slice(),
                };
                for (idx, &an) in analytic.iter().enumerate() {
                    let eps = 1e-5;
                    let at = |delta: f64| {
                        let mut p = m.clone();
                        match which {
                            0 => p.w_in.as_mut_slice()[idx] += delta,
                            1 => p.b_in.as_mut_slice()[idx] += delta,
                            2 => p.w_out.as_mut_slice()[idx] += delta,
                            _ => p.b_out.as_mut_slice()[idx] += delta,
                        }
                        oracle_objective(&p, &x, &z, h)
                    };
                    let fd = (at(eps) - at(-eps)) / (2.0 * eps);
                    let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-5);
                    worst = worst.max(rel);
                    compared += 1;
                    if rel > 1e-4 {
                        return Err(format!("net {net} h={h} param {which}/{idx}: analytic {an} vs fd {fd}"));
                    }
                }
            }
        }
    }
    within_time(
        format!("{compared} partials, worst relative error {worst:.1e}"),
        t0.elapsed(),
        10.0,
    )
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0f64;
    for _ in 0..20 {
        let d = r.random_range(1..=5);
        let n = r.random_range(3..=30);
        let w: Vec<f64> = (0..d).map(|_| r.random_range(-3.0..3.0)).collect();
        let m = SlfnModel::new(
            DMatrix::identity(d, d),
            DVector::from_fn(d, |_, _| r.random_range(-1.0..1.0)),
            DMatrix::from_row_slice(1, d, &w),
            DVector::from_element(1, r.random_range(-1.0..1.0)),
            Activation::Identity,
        )
        .map_err(|e| e.to_string())?;
        let data = SupervisedSet::new(
            DMatrix::from_fn(n, d, |_, _| r.random_range(-2.0..2.0)),
            DMatrix::from_fn(n, 1, |_, _| r.random_range(-2.0..2.0)),
        )
        .unwrap();
        let l = loss_regularized(&m, &data, 1.0, false).map_err(|e| e.to_string())?;
        let decay = n as f64 * w.iter().map(|v| v * v).sum::<f64>();
        let rel = (l.jacobian_term - decay).abs() / decay.max(1e-300);
        worst = worst.max(rel);
        if rel > 1e-10 {
            return Err(format!("sum |g'|^2 = {} vs N sum w^2 = {decay}", l.jacobian_term));
        }
    }
    Ok(format!("20 linear nets, worst relative gap {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    // interpolation
    let m = SlfnModel::random(2, 5, 1, Activation::Tanh, 8);
    let x = DMatrix::from_fn(7, 2, |i, j| (0.4 * i as f64 + 0.9 * j as f64).cos());
    let fit = DMatrix::from_fn(7, 1, |i, _| forward(&m, &[x[(i, 0)], x[(i, 1)]]).unwrap()[0]);
    let h0 = estimate_reg_param(&m, &SupervisedSet::new(x.clone(), fit.clone()).unwrap()).map_err(|e| e.to_string())?;
    if h0 != 0.0 {
        return Err(format!("h = {h0} at interpolation"));
    }

    // residual scaling at a fixed model
    let noise = DMatrix::from_fn(7, 1, |i, _| (1.7 * i as f64).sin() + 0.3);
    let h_at = |s: f64| estimate_reg_param(&m, &SupervisedSet::new(x.clone(), &fit + &noise * s).unwrap()).unwrap();
    let base = h_at(1.0);
    let mut worst = 0f64;
    for s in [0.25, 0.5, 2.0, 10.0] {
        let rel = (h_at(s) - s * s * base).abs() / (s * s * base);
        worst = worst.max(rel);
    }
    if worst > 1e-10 {
        return Err(format!("quadratic scaling off by {worst:.2e}"));
    }

    // scalar hand case: g(x) = 2 tanh(x), d = 1 so the prefactor is 1
    let scalar = SlfnModel::new(
        DMatrix::from_element(1, 1, 1.0),
        DVector::zeros(1),
        DMatrix::from_element(1, 1, 2.0),
        DVector::zeros(1),
        Activation::Tanh,
    )
    .unwrap();
    let xs = [0.5, -1.0, 0.25];
    let zs = [0.8, -1.2, 0.9];
    let sse: f64 = xs.iter().zip(&zs).map(|(x, z)| (z - 2.0 * f64::tanh(*x)).powi(2)).sum();
    let jac: f64 = xs.iter().map(|x| (2.0 * (1.0 - x.tanh().powi(2))).powi(2)).sum();
    let data = SupervisedSet::new(
        DMatrix::from_column_slice(3, 1, &xs),
        DMatrix::from_column_slice(3, 1, &zs),
    )
    .unwrap();
    let h = estimate_reg_param(&scalar, &data).map_err(|e| e.to_string())?;
    let hand_err = (h - sse / jac).abs() / (sse / jac);
    if hand_err > 1e-12 {
        return Err(format!("hand case h = {h} vs {}", sse / jac));
    }
    Ok(format!(
        "h = 0 at interpolation; scaling error {worst:.1e}; hand case error {hand_err:.1e}"
    ))
}

fn hidden_matrix(m: &SlfnModel, x: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), m.hidden_dim(), |i, j| {
        let a = (m.w_in.row(j) * x.row(i).transpose())[0] + m.b_in[j];
        m.activation.eval(a).0
    })
}

fn criterion_9() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(9);
    let (mut worst_ne, mut worst_ratio) = (0f64, 0f64);
    for task in 0..10u64 {
        let d = r.random_range(1..=3);
        let n = r.random_range(30..=60);
        let hidden = r.random_range(5..=20);
        let x = DMatrix::from_fn(n, d, |_, _| r.random_range(-2.0..2.0));
        let z = DMatrix::from_fn(n, 2, |i, j| {
            (x[(i, 0)] * (j + 1) as f64).sin() + 0.1 * r.random_range(-1.0..1.0)
        });
        let data = SupervisedSet::new(x.clone(), z.clone()).unwrap();
        let opts = PilOptions {
            seed: 900 + task,
            ..Default::default()
        };

        let plain = train_pil(&data, hidden, 0.0, &opts).map_err(|e| e.to_string())?;
        let a = hidden_matrix(&plain, &x);
        let resid = a.transpose() * (&a * plain.w_out.transpose() - &z);
        let rel = resid.norm() / (a.transpose().norm() * z.norm());
        worst_ne = worst_ne.max(rel);
        if rel > 1e-8 {
            return Err(format!("task {task}: normal-equation residual {rel:.2e}"));
        }

        let ridge = train_pil(&data, hidden, 1.0, &opts).map_err(|e| e.to_string())?;
        let ratio = ridge.w_out.norm() / plain.w_out.norm();
        worst_ratio = worst_ratio.max(ratio);
        if ratio.is_nan() || ratio >= 1.0 {
            return Err(format!("task {task}: ridge norm ratio {ratio}"));
        }
    }
    within_time(
        format!("worst normal-equation residual {worst_ne:.1e}; largest ridge/plain norm ratio {worst_ratio:.3}"),
        t0.elapsed(),
        5.0,
    )
}

// ------------------------------------------------------------------ 10

fn criterion_10() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(10);

    // pure diffusion, periodic: zero kinetics with v = 0
    let n = 64;
    let u = Grid::from_fn(n, n, |_, _| r.random_range(0.0..1.0));
    let mut s = RdState2D::new(
        u,
        Grid::filled(n, n, 0.0),
        1.0 / 128.0,
        2e-5,
        1e-5,
        GrayScott { feed: 0.0, kill: 0.0 },
    )
    .map_err(|e| e.to_string())?;
    let dt = 0.9 * s.stability_bound();
    let mut worst_mass = 0f64;
    for _ in 0..200 {
        let next = step_turing_2d(&s, dt).map_err(|e| e.to_string())?;
        worst_mass = worst_mass.max((next.u.sum() - s.u.sum()).abs() / s.u.sum().abs());
        s = next;
    }
    let mut f = Field1D::new(
        (0..n).map(|_| r.random_range(-1.0..1.0)).collect(),
        0.5,
        Boundary::Periodic,
    )
    .unwrap();
    for _ in 0..200 {
        let next = step_gradient_flow_1d(&f, 1.0, Potential::Zero, 0.9 * stability_bound_1d(0.5, 1.0))
            .map_err(|e| e.to_string())?;
        let before: f64 = f.values.iter().sum();
        let after: f64 = next.values.iter().sum();
        worst_mass = worst_mass.max((after - before).abs() / before.abs().max(1.0));
        f = next;
    }
    if worst_mass > 1e-10 {
        return Err(format!("mass drift {worst_mass:.2e} per step"));
    }

    // Allen-Cahn dissipation
    let mut phi = Field1D::new(
        (0..128).map(|_| r.random_range(-0.1..0.1)).collect(),
        1.0,
        Boundary::Periodic,
    )
    .unwrap();
    let dt = 0.4 * stability_bound_1d(1.0, 1.0);
    let mut energy = free_energy_1d(&phi, 1.0, Potential::AllenCahn);
    let start_energy = energy;
    let mut worst_rise = 0f64;
    for step in 0..10_000 {
        phi = step_gradient_flow_1d(&phi, 1.0, Potential::AllenCahn, dt).map_err(|e| e.to_string())?;
        let e = free_energy_1d(&phi, 1.0, Potential::AllenCahn);
        let rise = e - energy;
        worst_rise = worst_rise.max(rise);
        // rounding of the energy sum itself
        if rise > 1e-12 * energy.abs().max(1.0) {
            return Err(format!("free energy rose by {rise:.2e} at step {step}"));
        }
        energy = e;
    }

    // homogeneous Gray-Scott fixed point
    let mut hom = RdState2D::new(
        Grid::filled(32, 32, 1.0),
        Grid::filled(32, 32, 0.0),
        1.0 / 128.0,
        2e-5,
        1e-5,
        GrayScott::default(),
    )
    .map_err(|e| e.to_string())?;
    let dt = 0.8 * hom.stability_bound();
    for _ in 0..1000 {
        hom = step_turing_2d(&hom, dt).map_err(|e| e.to_string())?;
    }
    let drift = hom
        .u
        .as_slice()
        .iter()
        .map(|u| (u - 1.0).abs())
        .chain(hom.v.as_slice().iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    if drift > f64::EPSILON {
        return Err(format!("homogeneous state drifted by {drift:.2e}"));
    }

    // seeded reference run, twice
    let reference = || {
        let (u, v) = seeded_square(128, 128, 10);
        let st = RdState2D::new(
            u,
            v,
            1.0 / 128.0,
            2e-5,
            1e-5,
            GrayScott {
                feed: 0.037,
                kill: 0.06,
            },
        )
        .unwrap();
        let ctrl = StepControl {
            dt: 0.8 * st.stability_bound(),
            steps: 20_000,
            snapshot_every: 20_000,
        };
        simulate_2d(&st, &ctrl)
    };
    let a = reference().map_err(|e| e.to_string())?;
    let b = reference().map_err(|e| e.to_string())?;
    let metric = pattern_metric(&a.final_state.v);
    let identical = a
        .final_state
        .u
        .as_slice()
        .iter()
        .zip(b.final_state.u.as_slice())
        .all(|(x, y)| x.to_bits() == y.to_bits())
        && a.final_state
            .v
            .as_slice()
            .iter()
            .zip(b.final_state.v.as_slice())
            .all(|(x, y)| x.to_bits() == y.to_bits())
        && a.trace == b.trace;
    if metric.is_nan() || metric <= 0.02 || !identical {
        return Err(format!("pattern metric {metric:.4}, replay identical: {identical}"));
    }
    within_time(
        format!(
            "mass drift {worst_mass:.1e}; F {start_energy:.3} -> {energy:.3}, max rise {worst_rise:.1e}; \
             fixed point drift {drift:.0e}; pattern metric {metric:.4}, replay identical"
        ),
        t0.elapsed(),
        120.0,
    )
}

// ------------------------------------------------------------------ 11

fn cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_synlearn"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .env_remove("SYNLEARN_SEED")
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited with {status}"))
    }
}

fn artifact_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "run.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn criterion_11() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        cli(&["gen-data", "--blobs", "k=3", "n=150", "d=2", "sep=8", "seed=0"], &out)?;
        cli(&["gmm-select", "--k-min", "1", "--k-max", "6", "--seed", "0"], &out)?;
        runs.push(artifact_files(&out));
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    if runs[0] != runs[1] {
        return Err(format!("artifacts differ between replays ({names:?})"));
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("a/selection.json")).unwrap())
            .map_err(|e| e.to_string())?;
    let chosen = report["chosen_k"].as_u64();
    if chosen != Some(3) {
        return Err(format!("chosen_k = {chosen:?}"));
    }
    Ok(format!(
        "{} artifacts byte-identical ({}), chosen_k = 3",
        names.len(),
        names.join(", ")
    ))
}

fn main() {
    let runs = benchmarks();
    let criteria: Vec<(&str, Check)> = vec![
        ("thermodynamic identities", Box::new(criterion_1)),
        ("free-energy limits", Box::new(criterion_2)),
        ("cluster-number recovery", Box::new(|| criterion_3(&runs))),
        ("KL estimator soundness", Box::new(criterion_4)),
        ("bandwidth fixed point", Box::new(|| criterion_5(&runs))),
        ("network gradient check", Box::new(criterion_6)),
        ("weight-decay reduction", Box::new(criterion_7)),
        ("regularization estimate", Box::new(criterion_8)),
        ("pseudoinverse optimality", Box::new(criterion_9)),
        ("reaction-diffusion suite", Box::new(criterion_10)),
        ("end-to-end determinism", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.2}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.2}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
