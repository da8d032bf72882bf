//! Joint probability tables on finite alphabets and the function tables that
//! live on their margins.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Input tolerance on the total mass of a joint table.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Which margin a function table is defined on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

/// A real function on one of the two alphabets, stored as its value table.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTable {
    pub values: Vec<f64>,
    pub side: Side,
    /// Set when the table has mean 0 and variance 1 under its marginal.
    pub standardized: bool,
}

impl FunctionTable {
    pub fn new(values: Vec<f64>, side: Side) -> Self {
        FunctionTable {
            values,
            side,
            standardized: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self, weights: &[f64]) -> f64 {
        weighted_mean(&self.values, weights)
    }

    pub fn variance(&self, weights: &[f64]) -> f64 {
        weighted_variance(&self.values, weights)
    }

    /// Centers and scales to unit variance under `weights`. Returns `None`
    /// when the table is constant on the support.
    pub fn standardized(&self, weights: &[f64]) -> Option<FunctionTable> {
        let values = standardize(&self.values, weights)?;
        Some(FunctionTable {
            values,
            side: self.side,
            standardized: true,
        })
    }
}

pub(crate) fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(v, w)| v * w).sum()
}

pub(crate) fn weighted_variance(values: &[f64], weights: &[f64]) -> f64 {
    let mean = weighted_mean(values, weights);
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v - mean) * (v - mean))
        .sum()
}

pub(crate) fn weighted_dot(a: &[f64], b: &[f64], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| x * y * w)
        .sum()
}

/// Mean-zero, variance-one copy of `values`, or `None` if the variance is
/// below the floating point noise floor.
pub(crate) fn standardize(values: &[f64], weights: &[f64]) -> Option<Vec<f64>> {
    let mean = weighted_mean(values, weights);
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var = weighted_dot(&centered, &centered, weights);
    let scale: f64 = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(var > (1e-14 * scale.max(f64::MIN_POSITIVE)).powi(2)) {
        return None;
    }
    let sd = var.sqrt();
    Some(centered.into_iter().map(|v| v / sd).collect())
}

/// Centers each function under `weights` and runs two passes of modified
/// Gram-Schmidt. Returns false if the frame is numerically rank deficient.
pub(crate) fn orthonormalize(frame: &mut [Vec<f64>], weights: &[f64]) -> bool {
    for phi in frame.iter_mut() {
        let mean = weighted_mean(phi, weights);
        phi.iter_mut().for_each(|v| *v -= mean);
    }
    for _ in 0..2 {
        for i in 0..frame.len() {
            let (done, rest) = frame.split_at_mut(i);
            let phi = &mut rest[0];
            for prev in done.iter() {
                let c = weighted_dot(phi, prev, weights);
                phi.iter_mut().zip(prev).for_each(|(v, p)| *v -= c * p);
            }
            let norm = weighted_dot(phi, phi, weights).sqrt();
            if !(norm > 1e-150) {
                return false;
            }
            phi.iter_mut().for_each(|v| *v /= norm);
        }
    }
    true
}

/// Full joint pmf of (X, Y) with strictly positive marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    probs: DMatrix<f64>,
    px: Vec<f64>,
    py: Vec<f64>,
    labels_x: Option<Vec<String>>,
    labels_y: Option<Vec<String>>,
}

impl DiscreteJoint {
    /// Validates and renormalizes a probability table (rows = X atoms,
    /// columns = Y atoms).
    pub fn new(probs: DMatrix<f64>) -> Result<Self> {
        if probs.nrows() == 0 || probs.ncols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        for r in 0..probs.nrows() {
            for c in 0..probs.ncols() {
                let v = probs[(r, c)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        let probs = probs / sum;
        let px: Vec<f64> = probs.row_iter().map(|r| r.sum()).collect();
        let py: Vec<f64> = probs.column_iter().map(|c| c.sum()).collect();
        if let Some(i) = px.iter().position(|&p| p <= 0.0) {
            return Err(Error::ZeroMarginal { axis: "X", index: i });
        }
        if let Some(i) = py.iter().position(|&p| p <= 0.0) {
            return Err(Error::ZeroMarginal { axis: "Y", index: i });
        }
        Ok(DiscreteJoint {
            probs,
            px,
            py,
            labels_x: None,
            labels_y: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::EmptyMatrix);
        }
        let ncols = rows[0].as_ref().len();
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != ncols {
                return Err(Error::RaggedMatrix {
                    row: i,
                    found: r.as_ref().len(),
                    expected: ncols,
                });
            }
        }
        Self::new(DMatrix::from_fn(nrows, ncols, |r, c| rows[r].as_ref()[c]))
    }

    /// Product joint p(x)·q(y).
    pub fn independent(px: &[f64], py: &[f64]) -> Result<Self> {
        check_probability_vector(px, "p_x")?;
        check_probability_vector(py, "p_y")?;
        Self::new(DMatrix::from_fn(px.len(), py.len(), |r, c| px[r] * py[c]))
    }

    pub fn with_labels(
        mut self,
        labels_x: Option<Vec<String>>,
        labels_y: Option<Vec<String>>,
    ) -> Result<Self> {
        if let Some(l) = &labels_x {
            if l.len() != self.nx() {
                return Err(Error::InvalidArgument(format!(
                    "{} X labels for {} rows",
                    l.len(),
                    self.nx()
                )));
            }
        }
        if let Some(l) = &labels_y {
            if l.len() != self.ny() {
                return Err(Error::InvalidArgument(format!(
                    "{} Y labels for {} columns",
                    l.len(),
                    self.ny()
                )));
            }
        }
        self.labels_x = labels_x;
        self.labels_y = labels_y;
        Ok(self)
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.probs[(x, y)]
    }

    pub fn nx(&self) -> usize {
        self.probs.nrows()
    }

    pub fn ny(&self) -> usize {
        self.probs.ncols()
    }

    pub fn px(&self) -> &[f64] {
        &self.px
    }

    pub fn py(&self) -> &[f64] {
        &self.py
    }

    pub fn labels_x(&self) -> Option<&[String]> {
        self.labels_x.as_deref()
    }

    pub fn labels_y(&self) -> Option<&[String]> {
        self.labels_y.as_deref()
    }

    /// Joint of (Y, X).
    pub fn transpose(&self) -> DiscreteJoint {
        DiscreteJoint {
            probs: self.probs.transpose(),
            px: self.py.clone(),
            py: self.px.clone(),
            labels_x: self.labels_y.clone(),
            labels_y: self.labels_x.clone(),
        }
    }

    /// Table of E{φ(X) | Y = y}.
    pub fn expect_given_y(&self, phi: &[f64]) -> Vec<f64> {
        assert_eq!(phi.len(), self.nx());
        (0..self.ny())
            .map(|y| {
                let s: f64 = (0..self.nx()).map(|x| self.probs[(x, y)] * phi[x]).sum();
                s / self.py[y]
            })
            .collect()
    }

    /// Table of E{ψ(Y) | X = x}.
    pub fn expect_given_x(&self, psi: &[f64]) -> Vec<f64> {
        assert_eq!(psi.len(), self.ny());
        (0..self.nx())
            .map(|x| {
                let s: f64 = (0..self.ny()).map(|y| self.probs[(x, y)] * psi[y]).sum();
                s / self.px[x]
            })
            .collect()
    }

    /// Correlation of φ(X) and ψ(Y) under the joint.
    pub fn correlation(&self, phi: &[f64], psi: &[f64]) -> Option<f64> {
        let phi = standardize(phi, &self.px)?;
        let psi = standardize(psi, &self.py)?;
        let mut c = 0.0;
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                c += self.probs[(x, y)] * phi[x] * psi[y];
            }
        }
        Some(c)
    }

    /// Pearson correlation of the labelled variables, when both label sets
    /// parse as numbers and neither variable is constant.
    pub fn pearson(&self) -> Option<f64> {
        let lx = numeric_labels(self.labels_x.as_deref()?)?;
        let ly = numeric_labels(self.labels_y.as_deref()?)?;
        self.correlation(&lx, &ly)
    }
}

fn numeric_labels(labels: &[String]) -> Option<Vec<f64>> {
    labels.iter().map(|s| s.trim().parse::<f64>().ok()).collect()
}

pub(crate) fn check_probability_vector(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    if let Some(i) = v.iter().position(|p| !p.is_finite() || *p <= 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{what}[{i}] = {} is not strictly positive",
            v[i]
        )));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {sum}"
        )));
    }
    Ok(())
}

/// Validates a probability table; see [`DiscreteJoint::new`].
pub fn make_joint(probs: DMatrix<f64>) -> Result<DiscreteJoint> {
    DiscreteJoint::new(probs)
}

/// Row sums and column sums.
pub fn marginals(j: &DiscreteJoint) -> (Vec<f64>, Vec<f64>) {
    (j.px.clone(), j.py.clone())
}

/// K[x][y] = P(x, y) / p(y); every column is the conditional law of X given Y = y.
pub fn conditional_matrix(j: &DiscreteJoint) -> DMatrix<f64> {
    DMatrix::from_fn(j.nx(), j.ny(), |x, y| j.probs[(x, y)] / j.py[y])
}

/// Joint of (X, (Y, Z)) with Z ~ `r` independent of (X, Y). Column `y * |Z| + z`
/// holds P(x, y)·r(z).
pub fn augment_with_independent(j: &DiscreteJoint, r: &[f64]) -> Result<DiscreteJoint> {
    check_probability_vector(r, "r")?;
    let nz = r.len();
    let probs = DMatrix::from_fn(j.nx(), j.ny() * nz, |x, c| {
        j.probs[(x, c / nz)] * r[c % nz]
    });
    DiscreteJoint::new(probs)
}

/// Sums the columns inside each group of `partition` (0-based column indices).
pub fn coarsen_y(j: &DiscreteJoint, partition: &[Vec<usize>]) -> Result<DiscreteJoint> {
    let mut seen = vec![false; j.ny()];
    for group in partition {
        if group.is_empty() {
            return Err(Error::InvalidPartition("empty group".into()));
        }
        for &c in group {
            if c >= j.ny() {
                return Err(Error::InvalidPartition(format!(
                    "column {c} out of range (|Y| = {})",
                    j.ny()
                )));
            }
            if seen[c] {
                return Err(Error::InvalidPartition(format!(
                    "column {c} appears twice"
                )));
            }
            seen[c] = true;
        }
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("column {c} not covered")));
    }
    let probs = DMatrix::from_fn(j.nx(), partition.len(), |x, g| {
        partition[g].iter().map(|&c| j.probs[(x, c)]).sum()
    });
    DiscreteJoint::new(probs)
}
