//! Singular spectrum of the centered conditional-expectation operator and the
//! dependence indices read off it.
//!
//! The operator φ ↦ E{φ(X)|Y} between L²(p_x) and L²(p_y) is represented by
//! the normalized table `Q[x][y] = P(x,y) / √(p(x) p(y))`. Its top singular
//! pair is always `(√p_x, √p_y)` with value 1 (constants map to constants);
//! the remaining singular values σ₁ ≥ σ₂ ≥ … carry all of the dependence:
//!
//! * maximal correlation `R = σ₁`,
//! * dependence index `D = σ₁²`,
//! * m-dependence index `D_m = σ₁² ⋯ σ_{m+1}²` (the generalized variance of the
//!   images of the top m+1 singular functions, which maximizes it).
//!
//! The product formula for `D_m` is cross-checked against the direct ascent in
//! [`oracle`].

pub mod oracle;

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::joint::{DiscreteJoint, FunctionTable};

pub use oracle::{gram_det_oracle, gram_det_oracle_with, OracleConfig};

/// Default threshold below which a singular value counts as zero.
pub const DEFAULT_TOL: f64 = 1e-10;

const SVD_MAX_ITER: usize = 10_000;

/// Non-trivial singular values, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    /// Length `min(|X|, |Y|) - 1`.
    pub sigma: Vec<f64>,
    /// Singular value along the constant direction; 1 up to rounding.
    pub sigma0: f64,
}

impl SingularSpectrum {
    /// `sigma[i]`, or 0 past the end of the spectrum.
    pub fn get(&self, i: usize) -> f64 {
        self.sigma.get(i).copied().unwrap_or(0.0)
    }

    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.sigma.iter().take_while(|&&s| s > tol).count()
    }
}

/// R, D_0..D_max_order and the smallest vanishing order.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceProfile {
    pub r: f64,
    pub d: Vec<f64>,
    /// Smallest m ≤ max_order with σ_{m+1} ≤ tol (so D_m = 0), if any.
    pub order: Option<usize>,
}

impl DependenceProfile {
    pub fn from_spectrum(spectrum: &SingularSpectrum, max_order: usize, tol: f64) -> Self {
        let mut d = Vec::with_capacity(max_order + 1);
        let mut acc = 1.0;
        for m in 0..=max_order {
            let s = spectrum.get(m);
            acc *= s * s;
            d.push(acc);
        }
        let order = (0..=max_order).find(|&m| spectrum.get(m) <= tol);
        DependenceProfile {
            r: spectrum.get(0),
            d,
            order,
        }
    }

    pub fn max_order(&self) -> usize {
        self.d.len() - 1
    }
}

/// Maximizing pair of transforms and the correlation it attains.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformPair {
    pub phi: FunctionTable,
    pub psi: FunctionTable,
    pub rho: f64,
}

/// `Q[x][y] = P(x,y) / √(p(x) p(y))`.
pub fn normalized_matrix(j: &DiscreteJoint) -> DMatrix<f64> {
    let (px, py) = (j.px(), j.py());
    DMatrix::from_fn(j.nx(), j.ny(), |x, y| j.p(x, y) / (px[x] * py[y]).sqrt())
}

/// Normalized matrix with the constant singular pair projected out.
pub(crate) fn centered_normalized_matrix(j: &DiscreteJoint) -> DMatrix<f64> {
    let sx: Vec<f64> = j.px().iter().map(|p| p.sqrt()).collect();
    let sy: Vec<f64> = j.py().iter().map(|p| p.sqrt()).collect();
    let q = normalized_matrix(j);
    DMatrix::from_fn(j.nx(), j.ny(), |x, y| q[(x, y)] - sx[x] * sy[y])
}

pub fn singular_spectrum(j: &DiscreteJoint) -> Result<SingularSpectrum> {
    let q = normalized_matrix(j);
    let sx: Vec<f64> = j.px().iter().map(|p| p.sqrt()).collect();
    let sy: Vec<f64> = j.py().iter().map(|p| p.sqrt()).collect();
    let mut sigma0 = 0.0;
    for x in 0..j.nx() {
        for y in 0..j.ny() {
            sigma0 += sx[x] * q[(x, y)] * sy[y];
        }
    }

    let n = j.nx().min(j.ny()) - 1;
    if n == 0 {
        return Ok(SingularSpectrum {
            sigma: Vec::new(),
            sigma0,
        });
    }
    let centered = centered_normalized_matrix(j);
    let svd = SVD::try_new(centered, false, false, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::SvdFailure)?;
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::SvdFailure);
    }
    values.sort_by(|a, b| b.total_cmp(a));
    // One of the min(|X|,|Y|) values belongs to the deflated constant direction.
    values.truncate(n);
    for v in &mut values {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(SingularSpectrum {
        sigma: values,
        sigma0,
    })
}

/// D(X:Y) = σ₁².
pub fn kolmogorov_index(j: &DiscreteJoint) -> Result<f64> {
    let s = singular_spectrum(j)?.get(0);
    Ok(s * s)
}

/// R(X,Y) = σ₁.
pub fn maximal_correlation(j: &DiscreteJoint) -> Result<f64> {
    Ok(singular_spectrum(j)?.get(0))
}

pub fn dependence_scale(j: &DiscreteJoint, max_order: usize) -> Result<DependenceProfile> {
    dependence_scale_with_tol(j, max_order, DEFAULT_TOL)
}

pub fn dependence_scale_with_tol(
    j: &DiscreteJoint,
    max_order: usize,
    tol: f64,
) -> Result<DependenceProfile> {
    Ok(DependenceProfile::from_spectrum(
        &singular_spectrum(j)?,
        max_order,
        tol,
    ))
}

/// Smallest m with σ_{m+1} ≤ tol; `min(|X|,|Y|) - 1` when nothing vanishes.
pub fn m_dependence_order(j: &DiscreteJoint, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    let spectrum = singular_spectrum(j)?;
    Ok(spectrum
        .sigma
        .iter()
        .position(|&s| s <= tol)
        .unwrap_or(spectrum.sigma.len()))
}
