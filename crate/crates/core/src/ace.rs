//! Alternating conditional expectations on an exact joint table.
//!
//! `ace_pair` runs the alternation ψ ← std(E{φ|Y}), φ ← std(E{ψ|X}), which is
//! power iteration on the centered operator and converges to the maximal
//! correlation pair. `ace_subspace` iterates an orthonormal frame of k
//! functions with a Rayleigh-Ritz rotation each sweep, recovering the leading
//! k singular pairs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::joint::{
    orthonormalize, standardize, weighted_dot, weighted_mean, DiscreteJoint, FunctionTable, Side,
};
use crate::spectral::TransformPair;

/// Achieved correlations at or below this are reported as degenerate.
pub const DEGENERATE_RHO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AceStatus {
    Converged,
    /// Hit `max_iter` before the fixed-point residual dropped below `tol`;
    /// usually a near-tie between the leading singular values.
    NonConvergence,
    /// No non-trivial correlation exists along this direction (ρ = 0).
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AceResult {
    pub pair: TransformPair,
    pub status: AceStatus,
    pub iterations: usize,
    /// Achieved correlation after every sweep.
    pub trace: Vec<f64>,
}

impl AceResult {
    pub fn is_degenerate(&self) -> bool {
        self.status == AceStatus::Degenerate
    }
}

fn check_args(tol: f64, max_iter: usize) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be ≥ 1".into()));
    }
    Ok(())
}

fn random_standardized(n: usize, weights: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(s) = standardize(&v, weights) {
            return s;
        }
    }
}

/// Any standardized table on `weights`, used when the optimum is not unique.
fn placeholder(weights: &[f64]) -> Vec<f64> {
    let idx: Vec<f64> = (0..weights.len()).map(|i| i as f64).collect();
    standardize(&idx, weights).unwrap_or_else(|| vec![0.0; weights.len()])
}

/// First entry above `eps` in magnitude made positive; ψ flips along with φ.
fn normalize_sign(phi: &mut [f64], psi: &mut [f64]) {
    let eps = 1e-12;
    if let Some(first) = phi.iter().find(|v| v.abs() > eps) {
        if *first < 0.0 {
            phi.iter_mut().for_each(|v| *v = -*v);
            psi.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

fn l2_distance(a: &[f64], b: &[f64], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| w * (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn make_pair(j: &DiscreteJoint, phi: Vec<f64>, psi: Vec<f64>, rho: f64) -> TransformPair {
    let standardized_x = j.nx() > 1;
    let standardized_y = j.ny() > 1;
    TransformPair {
        phi: FunctionTable {
            values: phi,
            side: Side::X,
            standardized: standardized_x,
        },
        psi: FunctionTable {
            values: psi,
            side: Side::Y,
            standardized: standardized_y,
        },
        rho,
    }
}

fn degenerate_pair(j: &DiscreteJoint, phi: Option<Vec<f64>>) -> TransformPair {
    let mut phi = phi.unwrap_or_else(|| placeholder(j.px()));
    let mut psi = placeholder(j.py());
    normalize_sign(&mut phi, &mut psi);
    make_pair(j, phi, psi, 0.0)
}

/// Maximal correlation pair by alternating conditional expectations.
///
/// Stops when `‖φ_next − φ‖ ≤ tol` in L²(p_x). The returned correlation is
/// recomputed from the returned tables.
pub fn ace_pair(j: &DiscreteJoint, tol: f64, max_iter: usize, seed: u64) -> Result<AceResult> {
    check_args(tol, max_iter)?;
    let (px, py) = (j.px(), j.py());
    if j.nx() < 2 || j.ny() < 2 {
        return Ok(AceResult {
            pair: degenerate_pair(j, None),
            status: AceStatus::Degenerate,
            iterations: 0,
            trace: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi = random_standardized(j.nx(), px, &mut rng);
    let mut trace = Vec::new();
    let mut status = AceStatus::NonConvergence;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let image = j.expect_given_y(&phi);
        let rho = weighted_variance_centered(&image, py).sqrt();
        trace.push(rho);
        if rho <= DEGENERATE_RHO {
            status = AceStatus::Degenerate;
            break;
        }
        let psi = standardize(&image, py).expect("image has positive variance");
        let back = j.expect_given_x(&psi);
        let Some(next) = standardize(&back, px) else {
            status = AceStatus::Degenerate;
            break;
        };
        let residual = l2_distance(&next, &phi, px);
        phi = next;
        if residual <= tol {
            status = AceStatus::Converged;
            break;
        }
    }

    if status == AceStatus::Degenerate {
        return Ok(AceResult {
            pair: degenerate_pair(j, Some(phi)),
            status,
            iterations,
            trace,
        });
    }
    let image = j.expect_given_y(&phi);
    let mut psi = standardize(&image, py).unwrap_or_else(|| placeholder(py));
    normalize_sign(&mut phi, &mut psi);
    let rho = j.correlation(&phi, &psi).unwrap_or(0.0);
    Ok(AceResult {
        pair: make_pair(j, phi, psi, rho),
        status,
        iterations,
        trace,
    })
}

fn weighted_variance_centered(values: &[f64], weights: &[f64]) -> f64 {
    let mean = weighted_mean(values, weights);
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v - mean) * (v - mean))
        .sum()
}

/// Leading `k` singular pairs by block alternation with Rayleigh-Ritz.
///
/// Convergence is declared when every pair satisfies
/// `‖E{E{φᵢ|Y}|X} − ρᵢ² φᵢ‖ ≤ tol`, which stays meaningful inside clusters
/// of tied singular values where individual vectors do not settle.
pub fn ace_subspace(
    j: &DiscreteJoint,
    k: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<Vec<AceResult>> {
    check_args(tol, max_iter)?;
    let limit = j.nx().min(j.ny()) - 1;
    if k == 0 || k > limit {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={limit}, got {k}"
        )));
    }
    let (px, py) = (j.px(), j.py());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frame: Vec<Vec<f64>> = loop {
        let mut f: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..j.nx()).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        if orthonormalize(&mut f, px) {
            break f;
        }
    };

    let mut traces = vec![Vec::new(); k];
    let mut rhos = vec![0.0; k];
    let mut residuals = vec![f64::INFINITY; k];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let (rotated, images, eigenvalues) = ritz_rotate(j, &frame);
        frame = rotated;
        for i in 0..k {
            rhos[i] = eigenvalues[i].max(0.0).sqrt();
            traces[i].push(rhos[i]);
        }
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(k);
        for i in 0..k {
            let back = j.expect_given_x(&images[i]);
            residuals[i] = frame[i]
                .iter()
                .zip(&back)
                .zip(px)
                .map(|((f, b), w)| {
                    let r = b - eigenvalues[i] * f;
                    w * r * r
                })
                .sum::<f64>()
                .sqrt();
            if rhos[i] <= DEGENERATE_RHO {
                // Kernel direction: keep it, the operator has nothing to say.
                next.push(frame[i].clone());
            } else {
                next.push(back);
            }
        }
        if residuals.iter().all(|&r| r <= tol) {
            break;
        }
        if !orthonormalize(&mut next, px) {
            // Lost rank to rounding; restart the collapsed directions.
            for f in next.iter_mut() {
                if f.iter().all(|v| v.is_finite()) {
                    continue;
                }
                *f = (0..j.nx()).map(|_| StandardNormal.sample(&mut rng)).collect();
            }
            if !orthonormalize(&mut next, px) {
                return Err(Error::NonConvergence { iterations });
            }
        }
        frame = next;
    }

    let (frame, images, eigenvalues) = ritz_rotate(j, &frame);
    let mut results = Vec::with_capacity(k);
    for (i, (phi, image)) in frame.into_iter().zip(images).enumerate() {
        let rho = eigenvalues[i].max(0.0).sqrt();
        if rho <= DEGENERATE_RHO {
            results.push(AceResult {
                pair: degenerate_pair(j, Some(phi)),
                status: AceStatus::Degenerate,
                iterations,
                trace: std::mem::take(&mut traces[i]),
            });
            continue;
        }
        let mut phi = phi;
        let mut psi = standardize(&image, py).unwrap_or_else(|| placeholder(py));
        normalize_sign(&mut phi, &mut psi);
        let rho = j.correlation(&phi, &psi).unwrap_or(0.0);
        let status = if residuals[i] <= tol {
            AceStatus::Converged
        } else {
            AceStatus::NonConvergence
        };
        results.push(AceResult {
            pair: make_pair(j, phi, psi, rho),
            status,
            iterations,
            trace: std::mem::take(&mut traces[i]),
        });
    }
    Ok(results)
}

/// Rotates an orthonormal frame so that its images are uncorrelated, ordered
/// by decreasing image variance. Returns (frame, centered images, variances).
fn ritz_rotate(j: &DiscreteJoint, frame: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let py = j.py();
    let k = frame.len();
    let images: Vec<Vec<f64>> = frame
        .iter()
        .map(|phi| {
            let img = j.expect_given_y(phi);
            let mean = weighted_mean(&img, py);
            img.into_iter().map(|v| v - mean).collect()
        })
        .collect();
    let cov = DMatrix::from_fn(k, k, |a, b| weighted_dot(&images[a], &images[b], py));
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let combine = |tables: &[Vec<f64>], col: usize| -> Vec<f64> {
        let n = tables[0].len();
        (0..n)
            .map(|t| (0..k).map(|i| eig.eigenvectors[(i, col)] * tables[i][t]).sum())
            .collect()
    };
    let new_frame = order.iter().map(|&c| combine(frame, c)).collect();
    let new_images = order.iter().map(|&c| combine(&images, c)).collect();
    let values = order.iter().map(|&c| eig.eigenvalues[c]).collect();
    (new_frame, new_images, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::singular_spectrum;
    use approx::assert_abs_diff_eq;

    fn j(rows: &[&[f64]]) -> DiscreteJoint {
        DiscreteJoint::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_coupling() {
        let r = ace_pair(&j(&[&[0.5, 0.0], &[0.0, 0.5]]), 1e-12, 1000, 3).unwrap();
        assert_eq!(r.status, AceStatus::Converged);
        assert_abs_diff_eq!(r.pair.rho, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.pair.phi.values.as_slice(), [1.0, -1.0].as_slice(), epsilon = 1e-10);
        assert_abs_diff_eq!(r.pair.psi.values.as_slice(), [1.0, -1.0].as_slice(), epsilon = 1e-10);
    }

    #[test]
    fn symmetric_two_by_two() {
        let r = ace_pair(&j(&[&[0.4, 0.1], &[0.1, 0.4]]), 1e-12, 1000, 11).unwrap();
        assert_eq!(r.status, AceStatus::Converged);
        assert_abs_diff_eq!(r.pair.rho, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(r.pair.phi.values.as_slice(), [1.0, -1.0].as_slice(), epsilon = 1e-10);
        assert_abs_diff_eq!(r.pair.psi.values.as_slice(), [1.0, -1.0].as_slice(), epsilon = 1e-10);
    }

    #[test]
    fn independent_is_degenerate() {
        let ind = DiscreteJoint::independent(&[0.3, 0.7], &[0.2, 0.5, 0.3]).unwrap();
        let r = ace_pair(&ind, 1e-10, 100, 0).unwrap();
        assert_eq!(r.status, AceStatus::Degenerate);
        assert_eq!(r.pair.rho, 0.0);
        assert_abs_diff_eq!(r.pair.phi.variance(ind.px()), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.pair.psi.variance(ind.py()), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn trace_never_decreases() {
        let jt = j(&[
            &[0.10, 0.05, 0.02, 0.03],
            &[0.02, 0.12, 0.04, 0.02],
            &[0.05, 0.03, 0.15, 0.07],
            &[0.01, 0.06, 0.03, 0.20],
        ]);
        let r = ace_pair(&jt, 1e-12, 10_000, 5).unwrap();
        assert_eq!(r.status, AceStatus::Converged);
        for w in r.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-14, "{} then {}", w[0], w[1]);
        }
        let s = singular_spectrum(&jt).unwrap();
        assert_abs_diff_eq!(r.pair.rho, s.sigma[0], epsilon = 1e-10);
    }

    #[test]
    fn subspace_of_size_one_matches_pair() {
        let jt = j(&[&[0.2, 0.1, 0.05], &[0.05, 0.25, 0.1], &[0.05, 0.05, 0.15]]);
        let pair = ace_pair(&jt, 1e-12, 10_000, 1).unwrap();
        let sub = ace_subspace(&jt, 1, 1e-12, 10_000, 2).unwrap();
        assert_eq!(sub.len(), 1);
        assert_abs_diff_eq!(sub[0].pair.rho, pair.pair.rho, epsilon = 1e-10);
        assert_abs_diff_eq!(
            sub[0].pair.phi.values.as_slice(),
            pair.pair.phi.values.as_slice(),
            epsilon = 1e-6
        );
    }

    #[test]
    fn subspace_flags_rank_deficient_tail() {
        // Rank one centered operator on a 3×3 alphabet.
        // p(x|y) = 1/3 + p1(x) q1(y), p1 = (0.1, 0, -0.1), q1 = (1, -1, 0), p(y) = 1/3.
        let t = 1.0 / 3.0;
        let jt = j(&[
            &[(t + 0.1) * t, (t - 0.1) * t, t * t],
            &[t * t, t * t, t * t],
            &[(t - 0.1) * t, (t + 0.1) * t, t * t],
        ]);
        let s = singular_spectrum(&jt).unwrap();
        let sub = ace_subspace(&jt, 2, 1e-12, 10_000, 4).unwrap();
        assert_abs_diff_eq!(sub[0].pair.rho, s.sigma[0], epsilon = 1e-10);
        assert!(s.sigma[1] < 1e-12);
        assert!(sub[1].is_degenerate());
        assert_eq!(sub[1].pair.rho, 0.0);

        let ind = DiscreteJoint::independent(&[0.2, 0.3, 0.5], &[0.4, 0.4, 0.2]).unwrap();
        let sub = ace_subspace(&ind, 2, 1e-12, 1000, 4).unwrap();
        assert!(sub.iter().all(|r| r.is_degenerate() && r.pair.rho == 0.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        let jt = j(&[&[0.4, 0.1], &[0.1, 0.4]]);
        assert!(ace_pair(&jt, 0.0, 10, 0).is_err());
        assert!(ace_pair(&jt, 1e-8, 0, 0).is_err());
        assert!(ace_subspace(&jt, 0, 1e-8, 10, 0).is_err());
        assert!(ace_subspace(&jt, 2, 1e-8, 10, 0).is_err());
    }
}
