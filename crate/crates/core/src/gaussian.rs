//! Closed forms for jointly Gaussian (X, Y).
//!
//! For a Gaussian vector the maximal correlation is the top canonical
//! correlation, `R = √λmax(Σ)` with
//! `Σ = V11^{-1/2} V12 V22^{-1} V21 V11^{-1/2}`, and `D = R²`.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::bvn;
use crate::error::{Error, Result};
use crate::joint::{weighted_mean, DiscreteJoint};

/// Smallest eigenvalue accepted for V11 and V22.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Block covariance of (X, Y); `v21` is the transpose of `v12`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianJoint {
    v11: DMatrix<f64>,
    v12: DMatrix<f64>,
    v22: DMatrix<f64>,
}

fn symmetric_check(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidBlock(format!("{name} is not symmetric")));
            }
        }
    }
    Ok(())
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

impl GaussianJoint {
    pub fn new(v11: DMatrix<f64>, v12: DMatrix<f64>, v22: DMatrix<f64>) -> Result<Self> {
        let (m, n) = (v11.nrows(), v22.nrows());
        if m == 0 || n == 0 {
            return Err(Error::InvalidBlock("empty block".into()));
        }
        if v11.ncols() != m || v22.ncols() != n {
            return Err(Error::InvalidBlock("V11 and V22 must be square".into()));
        }
        if v12.nrows() != m || v12.ncols() != n {
            return Err(Error::InvalidBlock(format!(
                "V12 is {}×{}, expected {m}×{n}",
                v12.nrows(),
                v12.ncols()
            )));
        }
        if v11.iter().chain(v12.iter()).chain(v22.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidBlock("non-finite entry".into()));
        }
        symmetric_check(&v11, "V11")?;
        symmetric_check(&v22, "V22")?;
        let e11 = min_eigenvalue(&v11);
        if e11 <= EIGENVALUE_FLOOR {
            return Err(Error::NotPositiveDefinite {
                block: "V11",
                eigenvalue: e11,
            });
        }
        let e22 = min_eigenvalue(&v22);
        if e22 <= EIGENVALUE_FLOOR {
            return Err(Error::NotPositiveDefinite {
                block: "V22",
                eigenvalue: e22,
            });
        }
        let g = GaussianJoint { v11, v12, v22 };
        let full = g.covariance();
        let e = min_eigenvalue(&full);
        if e < -1e-10 * full.amax().max(1.0) {
            return Err(Error::NotPositiveDefinite {
                block: "covariance",
                eigenvalue: e,
            });
        }
        Ok(g)
    }

    /// Splits a full (m+n)×(m+n) covariance after the first `dim_x` coordinates.
    pub fn from_covariance(cov: &DMatrix<f64>, dim_x: usize) -> Result<Self> {
        let d = cov.nrows();
        if cov.ncols() != d {
            return Err(Error::InvalidBlock("covariance must be square".into()));
        }
        if dim_x == 0 || dim_x >= d {
            return Err(Error::InvalidBlock(format!(
                "dim_x = {dim_x} must lie in 1..{d}"
            )));
        }
        symmetric_check(cov, "covariance")?;
        let n = d - dim_x;
        Self::new(
            cov.view((0, 0), (dim_x, dim_x)).into_owned(),
            cov.view((0, dim_x), (dim_x, n)).into_owned(),
            cov.view((dim_x, dim_x), (n, n)).into_owned(),
        )
    }

    pub fn scalar(var_x: f64, cov_xy: f64, var_y: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_element(1, 1, var_x),
            DMatrix::from_element(1, 1, cov_xy),
            DMatrix::from_element(1, 1, var_y),
        )
    }

    /// Unit variances with correlation `rho`.
    pub fn bivariate(rho: f64) -> Result<Self> {
        Self::scalar(1.0, rho, 1.0)
    }

    pub fn v11(&self) -> &DMatrix<f64> {
        &self.v11
    }

    pub fn v12(&self) -> &DMatrix<f64> {
        &self.v12
    }

    pub fn v22(&self) -> &DMatrix<f64> {
        &self.v22
    }

    pub fn dim_x(&self) -> usize {
        self.v11.nrows()
    }

    pub fn dim_y(&self) -> usize {
        self.v22.nrows()
    }

    pub fn is_scalar(&self) -> bool {
        self.dim_x() == 1 && self.dim_y() == 1
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let (m, n) = (self.dim_x(), self.dim_y());
        let mut full = DMatrix::zeros(m + n, m + n);
        full.view_mut((0, 0), (m, m)).copy_from(&self.v11);
        full.view_mut((0, m), (m, n)).copy_from(&self.v12);
        full.view_mut((m, 0), (n, m)).copy_from(&self.v12.transpose());
        full.view_mut((m, m), (n, n)).copy_from(&self.v22);
        full
    }

    /// Correlation of the scalar pair.
    pub fn rho(&self) -> Result<f64> {
        if !self.is_scalar() {
            return Err(Error::NotScalar);
        }
        Ok(self.v12[(0, 0)] / (self.v11[(0, 0)] * self.v22[(0, 0)]).sqrt())
    }

    /// Quantile discretization of a scalar joint into `bins_x × bins_y`
    /// equal-probability cells, with exact bivariate normal cell masses.
    pub fn discretize(&self, bins_x: usize, bins_y: usize) -> Result<DiscreteJoint> {
        let rho = self.rho()?;
        if bins_x == 0 || bins_y == 0 {
            return Err(Error::InvalidArgument("bins must be ≥ 1".into()));
        }
        let ex = normal_quantile_edges(bins_x);
        let ey = normal_quantile_edges(bins_y);
        let probs = DMatrix::from_fn(bins_x, bins_y, |a, b| {
            bvn::rectangle(ex[a], ex[a + 1], ey[b], ey[b + 1], rho).max(0.0)
        });
        let sum: f64 = probs.iter().sum();
        DiscreteJoint::new(probs / sum)
    }
}

/// Φ⁻¹(i/k) for i = 0..=k, with infinite ends.
fn normal_quantile_edges(k: usize) -> Vec<f64> {
    let n = Normal::standard();
    (0..=k)
        .map(|i| match i {
            0 => f64::NEG_INFINITY,
            i if i == k => f64::INFINITY,
            i => {
                let p = i as f64 / k as f64;
                // One Newton step on Φ(x) = p sharpens the library inverse.
                let x = n.inverse_cdf(p);
                x - (bvn::phi(x) - p) / n.pdf(x)
            }
        })
        .collect()
}

/// Symmetric inverse square root by eigendecomposition.
fn inverse_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// `Σ = V11^{-1/2} V12 V22^{-1} V21 V11^{-1/2}`, symmetrized.
pub fn sigma_matrix(g: &GaussianJoint) -> DMatrix<f64> {
    let w = inverse_sqrt(&g.v11);
    let v22_inv_v21 = g
        .v22
        .clone()
        .cholesky()
        .expect("V22 checked positive definite")
        .solve(&g.v12.transpose());
    let s = &w * &g.v12 * v22_inv_v21 * &w;
    (&s + s.transpose()) * 0.5
}

/// Largest eigenvalue of Σ, clamped to [0, 1].
pub fn lambda_max(g: &GaussianJoint) -> f64 {
    if g.is_scalar() {
        let r = scalar_r(g);
        return r * r;
    }
    SymmetricEigen::new(sigma_matrix(g))
        .eigenvalues
        .max()
        .clamp(0.0, 1.0)
}

fn scalar_r(g: &GaussianJoint) -> f64 {
    (g.v12[(0, 0)].abs() / (g.v11[(0, 0)] * g.v22[(0, 0)]).sqrt()).min(1.0)
}

/// Maximal correlation R = √λmax(Σ).
pub fn gaussian_r(g: &GaussianJoint) -> f64 {
    if g.is_scalar() {
        return scalar_r(g);
    }
    lambda_max(g).sqrt()
}

/// Dependence index D = R².
pub fn gaussian_d(g: &GaussianJoint) -> f64 {
    let r = gaussian_r(g);
    r * r
}

/// R(X : Y + λZ) over a grid of λ, for Gaussian Z independent of (X, Y).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCurve {
    pub lambdas: Vec<f64>,
    pub r_values: Vec<f64>,
}

impl NoiseCurve {
    /// Non-decreasing for λ < 0 and non-increasing for λ > 0 along the grid
    /// (taken in increasing λ order), up to `slack`.
    pub fn is_unimodal(&self, slack: f64) -> bool {
        let mut pts: Vec<(f64, f64)> = self
            .lambdas
            .iter()
            .copied()
            .zip(self.r_values.iter().copied())
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.windows(2).all(|w| {
            let ((l0, r0), (l1, r1)) = (w[0], w[1]);
            if l1 <= 0.0 {
                r1 >= r0 - slack
            } else if l0 >= 0.0 {
                r1 <= r0 + slack
            } else {
                true
            }
        })
    }
}

pub fn noise_curve(g: &GaussianJoint, var_z: f64, lambdas: &[f64]) -> Result<NoiseCurve> {
    if !g.is_scalar() {
        return Err(Error::NotScalar);
    }
    if !(var_z > 0.0) || !var_z.is_finite() {
        return Err(Error::InvalidArgument(format!("var_z must be > 0, got {var_z}")));
    }
    let mut r_values = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        if !l.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda {l} is not finite")));
        }
        let noisy = GaussianJoint::scalar(
            g.v11[(0, 0)],
            g.v12[(0, 0)],
            g.v22[(0, 0)] + l * l * var_z,
        )?;
        r_values.push(gaussian_r(&noisy));
    }
    Ok(NoiseCurve {
        lambdas: lambdas.to_vec(),
        r_values,
    })
}

/// Gaussian with the first and second moments of vector-valued features of a
/// discrete joint: X atom `x` carries `x_features[x]`, Y atom `y` carries
/// `y_features[y]`.
pub fn moment_matched(
    j: &DiscreteJoint,
    x_features: &[Vec<f64>],
    y_features: &[Vec<f64>],
) -> Result<GaussianJoint> {
    if x_features.len() != j.nx() || y_features.len() != j.ny() {
        return Err(Error::InvalidArgument("one feature vector per atom".into()));
    }
    let m = x_features.first().map_or(0, Vec::len);
    let n = y_features.first().map_or(0, Vec::len);
    if x_features.iter().any(|f| f.len() != m) || y_features.iter().any(|f| f.len() != n) {
        return Err(Error::InvalidArgument("ragged feature vectors".into()));
    }
    let column = |feats: &[Vec<f64>], i: usize| -> Vec<f64> { feats.iter().map(|f| f[i]).collect() };
    let xs: Vec<Vec<f64>> = (0..m).map(|i| column(x_features, i)).collect();
    let ys: Vec<Vec<f64>> = (0..n).map(|i| column(y_features, i)).collect();
    let mx: Vec<f64> = xs.iter().map(|c| weighted_mean(c, j.px())).collect();
    let my: Vec<f64> = ys.iter().map(|c| weighted_mean(c, j.py())).collect();

    let v11 = DMatrix::from_fn(m, m, |a, b| {
        (0..j.nx())
            .map(|x| j.px()[x] * (xs[a][x] - mx[a]) * (xs[b][x] - mx[b]))
            .sum()
    });
    let v22 = DMatrix::from_fn(n, n, |a, b| {
        (0..j.ny())
            .map(|y| j.py()[y] * (ys[a][y] - my[a]) * (ys[b][y] - my[b]))
            .sum()
    });
    let v12 = DMatrix::from_fn(m, n, |a, b| {
        let mut s = 0.0;
        for x in 0..j.nx() {
            for y in 0..j.ny() {
                s += j.p(x, y) * (xs[a][x] - mx[a]) * (ys[b][y] - my[b]);
            }
        }
        s
    });
    GaussianJoint::new(v11, v12, v22)
}
