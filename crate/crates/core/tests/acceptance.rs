//! Acceptance suite: one line per criterion, non-zero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use depscale::ace::{ace_pair, AceStatus};
use depscale::gaussian::{self, GaussianJoint};
use depscale::spectral::{dependence_scale, gram_det_oracle, singular_spectrum};
use depscale::structure::{check_completeness, make_finite_rank_joint, Certificate};
use depscale::{augment_with_independent, coarsen_y, DiscreteJoint};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// 1. gram_det_oracle agrees with the spectral D_m on random small joints.
fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for case in 0..200 {
        let nx = rng.random_range(2..=5);
        let ny = rng.random_range(2..=5);
        let j = common::random_joint(&mut rng, nx, ny);
        let profile = dependence_scale(&j, 2).map_err(|e| e.to_string())?;
        for m in 0..=2 {
            let oracle = gram_det_oracle(&j, m, 32, case as u64 * 3 + m as u64)
                .map_err(|e| format!("case {case}, m = {m}: {e}"))?;
            let err = (oracle - profile.d[m]).abs();
            worst = worst.max(err);
            checks += 1;
            ensure(err <= 1e-6, || {
                format!("case {case} ({nx}×{ny}), m = {m}: oracle {oracle} vs spectral {}", profile.d[m])
            })?;
        }
    }
    Ok(format!("{checks} checks, max |Δ| = {worst:.2e}"))
}

/// 2. Finite-rank constructions with k components land in C_k but not C_{k−1}.
///
/// A draw counts as non-degenerate when its input-side bound on σ_k satisfies
/// bound^(2k) > 1e-6; that is decided before the joint is built.
fn finite_rank_sufficiency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut max_dk: f64 = 0.0;
    let mut min_dk1 = f64::INFINITY;
    let mut skipped = 0;
    let mut case = 0;
    while case < 100 {
        let k = 1 + case % 3;
        let nx = rng.random_range(k + 1..=6);
        let ny = rng.random_range(k + 1..=6);
        let (p0, comps, py) = common::finite_rank_inputs(&mut rng, k, nx, ny);
        let bound = common::finite_rank_conditioning(&p0, &comps, &py);
        if bound.powi(2 * k as i32) <= 1e-6 {
            skipped += 1;
            continue;
        }
        let j = make_finite_rank_joint(&p0, &comps, &py).map_err(|e| format!("case {case}: {e}"))?;
        let p = dependence_scale(&j, k).map_err(|e| e.to_string())?;
        max_dk = max_dk.max(p.d[k]);
        min_dk1 = min_dk1.min(p.d[k - 1]);
        ensure(p.d[k] <= 1e-10, || format!("case {case}: D_{k} = {:e}", p.d[k]))?;
        ensure(p.d[k - 1] > 1e-6, || {
            format!("case {case}: D_{} = {:e}", k - 1, p.d[k - 1])
        })?;
        case += 1;
    }
    Ok(format!(
        "100 draws ({skipped} ill-conditioned skipped), max D_k = {max_dk:.1e}, min D_(k-1) = {min_dk1:.2e}"
    ))
}

/// 3. Range, independence, coarsening, augmentation, Pearson bound, d0 = r²
/// and transpose symmetry on random joints.
fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tol = 1e-10;
    let max_order = 3;
    let joints = 500;
    let mut labelled = 0;
    for case in 0..joints {
        let nx = rng.random_range(2..=6);
        let ny = rng.random_range(2..=6);
        let j = common::random_joint(&mut rng, nx, ny);
        let p = dependence_scale(&j, max_order).map_err(|e| e.to_string())?;

        // Range.
        ensure(p.d.iter().all(|&d| (0.0..=1.0).contains(&d)), || {
            format!("case {case}: d = {:?} out of [0, 1]", p.d)
        })?;
        // Vanishing R forces a product table.
        if p.r <= tol {
            let (px, py) = (j.px(), j.py());
            let gap = (0..nx)
                .flat_map(|x| (0..ny).map(move |y| (x, y)))
                .map(|(x, y)| (j.p(x, y) - px[x] * py[y]).abs())
                .fold(0.0, f64::max);
            ensure(gap <= 1e-8, || format!("case {case}: r ≈ 0 but |P − pq| = {gap:e}"))?;
        }
        // Product tables give R = 0.
        let ind = common::random_independent(&mut rng, nx, ny);
        let pi = dependence_scale(&ind, max_order).map_err(|e| e.to_string())?;
        ensure(pi.r <= tol, || format!("case {case}: independent r = {:e}", pi.r))?;
        // Merging Y atoms never raises any D_m.
        let part = common::random_partition(&mut rng, ny);
        let coarse = coarsen_y(&j, &part).map_err(|e| e.to_string())?;
        let pc = dependence_scale(&coarse, max_order).map_err(|e| e.to_string())?;
        for m in 0..=max_order {
            ensure(pc.d[m] <= p.d[m] + tol, || {
                format!("case {case}: coarsened D_{m} {} > {}", pc.d[m], p.d[m])
            })?;
        }
        // An independent extra coordinate changes nothing.
        let nz = rng.random_range(1..=3);
        let r = common::probability_vector(&mut rng, nz);
        let aug = augment_with_independent(&j, &r).map_err(|e| e.to_string())?;
        let pa = dependence_scale(&aug, max_order).map_err(|e| e.to_string())?;
        for m in 0..=max_order {
            ensure((pa.d[m] - p.d[m]).abs() <= tol, || {
                format!("case {case}: augmented D_{m} {} vs {}", pa.d[m], p.d[m])
            })?;
        }
        // R bounds the Pearson correlation of numeric labels.
        let lj = j
            .clone()
            .with_labels(
                Some(common::numeric_labels(&mut rng, nx)),
                Some(common::numeric_labels(&mut rng, ny)),
            )
            .map_err(|e| e.to_string())?;
        if let Some(rho) = lj.pearson() {
            labelled += 1;
            ensure(p.r >= rho.abs() - tol, || {
                format!("case {case}: R = {} < |ρ| = {}", p.r, rho.abs())
            })?;
        }
        // d0 = r².
        ensure((p.d[0] - p.r * p.r).abs() <= tol, || {
            format!("case {case}: d0 = {} vs r² = {}", p.d[0], p.r * p.r)
        })?;
        // Symmetry.
        let pt = dependence_scale(&j.transpose(), max_order).map_err(|e| e.to_string())?;
        ensure((pt.r - p.r).abs() <= tol, || format!("case {case}: transpose r differs"))?;
        for m in 0..=max_order {
            ensure((pt.d[m] - p.d[m]).abs() <= tol, || {
                format!("case {case}: transpose D_{m} {} vs {}", pt.d[m], p.d[m])
            })?;
        }
    }
    Ok(format!("{joints} joints (+{joints} independent), {labelled} with numeric labels"))
}

/// λmax of V11⁻¹ V12 V22⁻¹ V21 by power iteration; shares no code with the
/// library's symmetric route.
fn brute_lambda_max(g: &GaussianJoint) -> f64 {
    let a = g.v11().clone().try_inverse().unwrap()
        * g.v12()
        * g.v22().clone().try_inverse().unwrap()
        * g.v12().transpose();
    let n = a.nrows();
    let mut v = DMatrix::from_element(n, 1, 1.0);
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w = &a * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = w / norm;
        let new_lambda = (&a * &next).norm();
        let done = (new_lambda - lambda).abs() < 1e-15;
        lambda = new_lambda;
        v = next;
        if done {
            break;
        }
    }
    lambda
}

/// 4. Gaussian closed forms.
fn gaussian_closed_forms() -> Outcome {
    for rho in [0.0, 0.25, -0.25, 0.5, -0.5, 0.9, -0.9] {
        let g = GaussianJoint::bivariate(rho).map_err(|e| e.to_string())?;
        let r = gaussian::gaussian_r(&g);
        ensure(r == rho.abs(), || format!("ρ = {rho}: R = {r}"))?;
    }
    let fixture = GaussianJoint::new(
        DMatrix::identity(2, 2),
        DMatrix::from_row_slice(2, 2, &[0.6, 0.0, 0.0, 0.3]),
        DMatrix::identity(2, 2),
    )
    .map_err(|e| e.to_string())?;
    let lm = gaussian::lambda_max(&fixture);
    let r = gaussian::gaussian_r(&fixture);
    ensure((lm - 0.36).abs() <= 1e-10, || format!("λmax = {lm}"))?;
    ensure((r - 0.6).abs() <= 1e-10, || format!("R = {r}"))?;

    let cov = [
        // 2 + 1
        (2, vec![2.0, 0.3, 0.8, 0.3, 1.0, -0.2, 0.8, -0.2, 1.5]),
        // 2 + 2
        (
            2,
            vec![
                1.0, 0.2, 0.3, 0.1, //
                0.2, 2.0, -0.4, 0.5, //
                0.3, -0.4, 1.5, 0.2, //
                0.1, 0.5, 0.2, 1.2,
            ],
        ),
        // 1 + 3
        (
            1,
            vec![
                1.0, 0.3, -0.2, 0.4, //
                0.3, 1.0, 0.1, 0.0, //
                -0.2, 0.1, 1.0, 0.2, //
                0.4, 0.0, 0.2, 1.0,
            ],
        ),
    ];
    let mut worst: f64 = 0.0;
    for (dim_x, entries) in cov {
        let d = (entries.len() as f64).sqrt() as usize;
        let g = GaussianJoint::from_covariance(&DMatrix::from_row_slice(d, d, &entries), dim_x)
            .map_err(|e| e.to_string())?;
        let brute = brute_lambda_max(&g);
        let lm = gaussian::lambda_max(&g);
        worst = worst.max((lm - brute).abs());
        ensure((lm - brute).abs() <= 1e-10, || format!("λmax {lm} vs brute {brute}"))?;
        ensure((gaussian::gaussian_r(&g) - brute.sqrt()).abs() <= 1e-10, || "R mismatch".into())?;
    }
    Ok(format!("scalar grid exact, fixture λmax = {lm:.12}, block max |Δ| = {worst:.1e}"))
}

/// 5. Quantile discretization of the ρ = 0.8 Gaussian approaches |ρ| from below.
fn discretization_convergence() -> Outcome {
    let g = GaussianJoint::bivariate(0.8).map_err(|e| e.to_string())?;
    let mut rs = Vec::new();
    for k in [8, 16, 32, 64] {
        let j = g.discretize(k, k).map_err(|e| e.to_string())?;
        rs.push(singular_spectrum(&j).map_err(|e| e.to_string())?.get(0));
    }
    ensure(rs.windows(2).all(|w| w[1] >= w[0]), || format!("not monotone: {rs:?}"))?;
    ensure(rs[3] >= 0.78, || format!("R(64) = {}", rs[3]))?;
    Ok(format!("R(8,16,32,64) = {:.5} {:.5} {:.5} {:.5}", rs[0], rs[1], rs[2], rs[3]))
}

/// 6. Noise curve is even, peaked at 0 and monotone on each side.
fn noise_curve_shape() -> Outcome {
    let g = GaussianJoint::bivariate(0.5).map_err(|e| e.to_string())?;
    let lambdas: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
    let c = gaussian::noise_curve(&g, 1.0, &lambdas).map_err(|e| e.to_string())?;
    let r = &c.r_values;
    for i in 0..61 {
        ensure((r[i] - r[60 - i]).abs() <= 1e-12, || format!("not even at λ = {}", lambdas[i]))?;
    }
    let peak = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ensure(r[30] == peak, || format!("peak {peak} is not at λ = 0 ({})", r[30]))?;
    ensure(c.is_unimodal(1e-12), || "not monotone on each side".into())?;
    Ok(format!("R(0) = {}, R(±3) = {:.6}", r[30], r[0]))
}

/// 7. ACE matches σ₁ on joints with a clear spectral gap.
fn ace_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    let mut max_iter_used = 0;
    while tested < 100 {
        let nx = rng.random_range(2..=6);
        let ny = rng.random_range(2..=6);
        let j = common::random_joint(&mut rng, nx, ny);
        let s = singular_spectrum(&j).map_err(|e| e.to_string())?;
        if s.get(0) - s.get(1) <= 1e-3 {
            continue;
        }
        let a = ace_pair(&j, 1e-10, 10_000, tested as u64).map_err(|e| e.to_string())?;
        ensure(a.status == AceStatus::Converged, || {
            format!("joint {tested}: status {:?} after {} sweeps", a.status, a.iterations)
        })?;
        let err = (a.pair.rho - s.get(0)).abs();
        worst = worst.max(err);
        max_iter_used = max_iter_used.max(a.iterations);
        ensure(err <= 1e-8, || format!("joint {tested}: ρ = {} vs σ₁ = {}", a.pair.rho, s.get(0)))?;
        tested += 1;
    }
    Ok(format!("max |Δ| = {worst:.1e}, at most {max_iter_used} sweeps"))
}

/// 8. Completeness verdicts with witnesses.
fn completeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 1..=6 {
        let w = common::probability_vector(&mut rng, n);
        let j = DiscreteJoint::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(w)))
            .map_err(|e| e.to_string())?;
        let c = check_completeness(&j, 1e-10).map_err(|e| e.to_string())?;
        ensure(c.complete, || format!("{n}×{n} diagonal reported incomplete"))?;
    }
    let mut worst: f64 = 0.0;
    for nx in 2..=6 {
        for ny in 1..=6 {
            let j = common::random_independent(&mut rng, nx, ny);
            let c = check_completeness(&j, 1e-10).map_err(|e| e.to_string())?;
            ensure(!c.complete, || format!("{nx}×{ny} independent reported complete"))?;
            let Certificate::Witness { image_variance, .. } = c.certificate else {
                return Err(format!("{nx}×{ny}: no witness"));
            };
            worst = worst.max(image_variance);
            ensure(image_variance <= 1e-12, || {
                format!("{nx}×{ny}: witness image variance {image_variance:e}")
            })?;
        }
    }
    Ok(format!("worst witness image variance {worst:.1e}"))
}

/// 9. Seeded Monte Carlo of the plug-in estimator, checked against the frozen
/// fixture and the target band.
fn estimation_sanity() -> Outcome {
    let mut r = common::monte_carlo_r_hat();
    r.sort_by(f64::total_cmp);
    let lo = common::quantile(&r, 0.025);
    let hi = common::quantile(&r, 0.975);

    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/estimate_gaussian_rho08.json"
    ))
    .map_err(|e| e.to_string())?;
    let fixture: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let frozen_lo = fixture["q025"].as_f64().ok_or("fixture lacks q025")?;
    let frozen_hi = fixture["q975"].as_f64().ok_or("fixture lacks q975")?;
    ensure((lo - frozen_lo).abs() <= 1e-12 && (hi - frozen_hi).abs() <= 1e-12, || {
        format!("range [{lo}, {hi}] differs from fixture [{frozen_lo}, {frozen_hi}]")
    })?;
    ensure(lo >= 0.74 && hi <= 0.84, || format!("range [{lo}, {hi}] ⊄ [0.74, 0.84]"))?;
    Ok(format!("central 95% range [{lo:.4}, {hi:.4}]"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("AC1 oracle equivalence for D_m", oracle_equivalence, Duration::from_secs(60)),
        ("AC2 finite-rank joints lie in C_k", finite_rank_sufficiency, Duration::from_secs(10)),
        ("AC3 dependence-index property suite", property_suite, Duration::from_secs(120)),
        ("AC4 Gaussian closed forms", gaussian_closed_forms, Duration::from_secs(1)),
        ("AC5 discretization convergence", discretization_convergence, Duration::from_secs(30)),
        ("AC6 noise-injection curve", noise_curve_shape, Duration::from_secs(1)),
        ("AC7 ACE agreement", ace_agreement, Duration::from_secs(30)),
        ("AC8 completeness", completeness, Duration::from_secs(1)),
        ("AC9 plug-in estimation sanity", estimation_sanity, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!(
                "{detail}; took {elapsed:.2?}, budget {budget:?}"
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({elapsed:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
