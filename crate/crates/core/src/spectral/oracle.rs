//! Direct maximization of the generalized variance of conditional-expectation
//! images, used to audit the spectral product formula.
//!
//! For φ₀..φ_m on X, mean 0 and mutually orthonormal under p_x, the images
//! φ̂ᵢ(y) = E{φᵢ(X)|Y=y} have covariance matrix V; we maximize det V by
//! orthogonal iteration `Φ ← orth(D_x⁻¹ G Φ)` with
//! `G[x][x'] = Σ_y P(x,y) P(x',y) / p(y)`, re-orthonormalizing under p_x each
//! step. The determinant is always re-evaluated from the explicitly computed
//! images, never from singular values.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::joint::{orthonormalize, weighted_dot, weighted_mean, DiscreteJoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub restarts: usize,
    /// Stop a restart once det V changes by less than this between sweeps.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            restarts: 32,
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

/// Best generalized variance found over `restarts` seeded ascents.
pub fn gram_det_oracle(j: &DiscreteJoint, m: usize, restarts: usize, seed: u64) -> Result<f64> {
    let config = OracleConfig {
        restarts,
        ..OracleConfig::default()
    };
    gram_det_oracle_with(j, m, &config, seed)
}

pub fn gram_det_oracle_with(
    j: &DiscreteJoint,
    m: usize,
    config: &OracleConfig,
    seed: u64,
) -> Result<f64> {
    if config.restarts == 0 || config.max_iter == 0 {
        return Err(Error::InvalidArgument(
            "oracle needs at least one restart and one iteration".into(),
        ));
    }
    let k = m + 1;
    // Only |X| - 1 mean-zero directions exist on X.
    if k > j.nx() - 1 {
        return Ok(0.0);
    }
    let px = j.px();
    let nx = j.nx();
    let gram = image_gram(j);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best = f64::NEG_INFINITY;
    let mut any_converged = false;
    let mut last_iterations = 0;
    for _ in 0..config.restarts {
        let mut frame: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..nx).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        if !orthonormalize(&mut frame, px) {
            continue;
        }
        let mut value = image_generalized_variance(j, &frame);
        let mut converged = false;
        let mut iterations = 0;
        while iterations < config.max_iter {
            iterations += 1;
            let next: Vec<Vec<f64>> = frame
                .iter()
                .map(|phi| {
                    (0..nx)
                        .map(|x| (0..nx).map(|x2| gram[(x, x2)] * phi[x2]).sum::<f64>() / px[x])
                        .collect()
                })
                .collect();
            let mut next = next;
            if !orthonormalize(&mut next, px) {
                // The frame collapsed into the kernel: every image is 0.
                value = value.max(0.0);
                converged = true;
                break;
            }
            let next_value = image_generalized_variance(j, &next);
            frame = next;
            let delta = (next_value - value).abs();
            value = next_value;
            if delta <= config.tol {
                converged = true;
                break;
            }
        }
        last_iterations = iterations;
        any_converged |= converged;
        best = best.max(value);
    }
    if !any_converged {
        return Err(Error::NonConvergence {
            iterations: last_iterations,
        });
    }
    Ok(best.max(0.0))
}

/// `G[x][x'] = Σ_y P(x,y) P(x',y) / p(y)`.
fn image_gram(j: &DiscreteJoint) -> DMatrix<f64> {
    let py = j.py();
    DMatrix::from_fn(j.nx(), j.nx(), |a, b| {
        (0..j.ny()).map(|y| j.p(a, y) * j.p(b, y) / py[y]).sum()
    })
}

/// det of the covariance matrix of E{φᵢ(X)|Y}, computed from the image tables.
pub(crate) fn image_generalized_variance(j: &DiscreteJoint, frame: &[Vec<f64>]) -> f64 {
    let py = j.py();
    let images: Vec<Vec<f64>> = frame
        .iter()
        .map(|phi| {
            let img = j.expect_given_y(phi);
            let mean = weighted_mean(&img, py);
            img.into_iter().map(|v| v - mean).collect()
        })
        .collect();
    let k = images.len();
    let cov = DMatrix::from_fn(k, k, |a, b| weighted_dot(&images[a], &images[b], py));
    cov.determinant()
}
