//! Completeness of the conditional family and the finite-rank classes C_m.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::joint::{
    check_probability_vector, standardize, weighted_variance, DiscreteJoint, FunctionTable, Side,
};
use crate::spectral::{self, centered_normalized_matrix};

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// |X| = 1: only constants exist on X.
    TrivialAlphabet,
    /// Complete: the smallest of the min(|X|,|Y|) − 1 singular values.
    SmallestSingularValue(f64),
    /// Incomplete: a standardized φ whose conditional expectation given Y is
    /// (numerically) constant, with the variance of that image.
    Witness {
        phi: FunctionTable,
        image_variance: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completeness {
    pub complete: bool,
    pub certificate: Certificate,
}

/// Decides whether E{φ(X)|Y} = const forces φ = const.
///
/// The family is complete iff the centered operator has trivial kernel on
/// mean-zero functions of X: this needs |X| ≤ |Y| and all |X| − 1 non-trivial
/// singular values above `tol`.
pub fn check_completeness(j: &DiscreteJoint, tol: f64) -> Result<Completeness> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    if j.nx() == 1 {
        return Ok(Completeness {
            complete: true,
            certificate: Certificate::TrivialAlphabet,
        });
    }
    if j.nx() <= j.ny() {
        let spectrum = spectral::singular_spectrum(j)?;
        let smallest = spectrum.sigma.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest > tol {
            return Ok(Completeness {
                complete: true,
                certificate: Certificate::SmallestSingularValue(smallest),
            });
        }
    }
    let (phi, image_variance) = kernel_witness(j);
    Ok(Completeness {
        complete: false,
        certificate: Certificate::Witness {
            phi,
            image_variance,
        },
    })
}

/// Mean-zero direction on X with the smallest image variance.
fn kernel_witness(j: &DiscreteJoint) -> (FunctionTable, f64) {
    let q = centered_normalized_matrix(j);
    let sx: Vec<f64> = j.px().iter().map(|p| p.sqrt()).collect();
    // Lift the constant direction to eigenvalue 1 so it is never picked.
    let mut m = &q * q.transpose();
    for a in 0..j.nx() {
        for b in 0..j.nx() {
            m[(a, b)] += sx[a] * sx[b];
        }
    }
    let eig = SymmetricEigen::new(m);
    let idx = eig.eigenvalues.imin();
    let u = eig.eigenvectors.column(idx);
    let raw: Vec<f64> = (0..j.nx()).map(|x| u[x] / sx[x]).collect();
    let mut values = standardize(&raw, j.px()).expect("eigenvector is orthogonal to constants");
    if let Some(first) = values.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            values.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let image = j.expect_given_y(&values);
    let image_variance = weighted_variance(&image, j.py());
    (
        FunctionTable {
            values,
            side: Side::X,
            standardized: true,
        },
        image_variance,
    )
}

/// One term p_i(x) q_i(y) of a finite-rank conditional density.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Signed table on X summing to 0.
    pub p: Vec<f64>,
    pub q: FunctionTable,
}

/// Joint with p(x|y) = p0(x) + Σᵢ pᵢ(x) qᵢ(y) and Y-marginal `p_y`; it lies in
/// C_m for m = number of components.
pub fn make_finite_rank_joint(
    p0: &[f64],
    components: &[Component],
    p_y: &[f64],
) -> Result<DiscreteJoint> {
    check_probability_vector(p0, "p0")?;
    check_probability_vector(p_y, "p_y")?;
    let (nx, ny) = (p0.len(), p_y.len());
    for (i, c) in components.iter().enumerate() {
        if c.p.len() != nx {
            return Err(Error::InvalidArgument(format!(
                "component {i}: p has {} entries, expected {nx}",
                c.p.len()
            )));
        }
        if c.q.side != Side::Y || c.q.len() != ny {
            return Err(Error::InvalidArgument(format!(
                "component {i}: q must be a Y table with {ny} entries"
            )));
        }
        if c.p.iter().chain(&c.q.values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "component {i} has non-finite entries"
            )));
        }
        let sum: f64 = c.p.iter().sum();
        let scale = c.p.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        if sum.abs() > 1e-12 * scale {
            return Err(Error::ComponentNotCentered { index: i, sum });
        }
    }
    let mut probs = DMatrix::zeros(nx, ny);
    for y in 0..ny {
        for x in 0..nx {
            let cond = p0[x]
                + components
                    .iter()
                    .map(|c| c.p[x] * c.q.values[y])
                    .sum::<f64>();
            if cond < -1e-15 {
                return Err(Error::NegativeConditional { x, y, value: cond });
            }
            probs[(x, y)] = p_y[y] * cond.max(0.0);
        }
    }
    DiscreteJoint::new(probs)
}

/// (X, Y) ∈ C_m, i.e. D_m ≤ tol.
pub fn verify_class_membership(j: &DiscreteJoint, m: usize, tol: f64) -> Result<bool> {
    let profile = spectral::dependence_scale(j, m)?;
    Ok(profile.d[m] <= tol)
}
