//! Binning paired samples into a joint table and plug-in estimation of the
//! dependence profile.

use std::collections::BTreeMap;

use log::warn;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::joint::DiscreteJoint;
use crate::sample::{Column, SampleTable};
use crate::spectral::{self, DependenceProfile, SingularSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Quantile,
    UniformWidth,
    Categorical,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantile" => Ok(Strategy::Quantile),
            "uniform" | "uniform-width" => Ok(Strategy::UniformWidth),
            "categorical" => Ok(Strategy::Categorical),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinningSpec {
    pub strategy: Strategy,
    pub bins_x: usize,
    pub bins_y: usize,
}

impl Default for BinningSpec {
    fn default() -> Self {
        BinningSpec {
            strategy: Strategy::Quantile,
            bins_x: 8,
            bins_y: 8,
        }
    }
}

impl BinningSpec {
    pub fn quantile(bins_x: usize, bins_y: usize) -> Self {
        BinningSpec {
            strategy: Strategy::Quantile,
            bins_x,
            bins_y,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.strategy != Strategy::Categorical && (self.bins_x < 2 || self.bins_y < 2) {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 bins per axis, got {}×{}",
                self.bins_x, self.bins_y
            )));
        }
        Ok(())
    }
}

/// Atom index per observation plus one label per atom.
struct Binned {
    codes: Vec<usize>,
    labels: Vec<String>,
}

fn bin_column(col: &Column, strategy: Strategy, bins: usize) -> Binned {
    match col {
        Column::Categorical(values) => categorical_strings(values),
        Column::Numeric(values) => {
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if strategy == Strategy::Categorical {
                return categorical_numbers(values);
            }
            if lo == hi {
                warn!("constant column under {strategy:?} binning; treating it as categorical");
                return categorical_numbers(values);
            }
            let raw = match strategy {
                Strategy::Quantile => quantile_codes(values, bins),
                Strategy::UniformWidth => uniform_codes(values, bins, lo, hi),
                Strategy::Categorical => unreachable!(),
            };
            merge_empty(values, raw, bins)
        }
    }
}

fn categorical_strings(values: &[String]) -> Binned {
    let atoms: BTreeMap<&str, usize> = values
        .iter()
        .map(|s| (s.as_str(), 0))
        .collect::<BTreeMap<_, _>>()
        .into_keys()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    Binned {
        codes: values.iter().map(|s| atoms[s.as_str()]).collect(),
        labels: atoms.keys().map(|s| s.to_string()).collect(),
    }
}

fn categorical_numbers(values: &[f64]) -> Binned {
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let codes = values
        .iter()
        .map(|v| distinct.binary_search_by(|d| d.total_cmp(v)).expect("value is present"))
        .collect();
    Binned {
        codes,
        labels: distinct.iter().map(|v| v.to_string()).collect(),
    }
}

/// Interior edges at midpoints between consecutive order statistics around
/// the i/k quantile positions; a value goes to the number of edges strictly
/// below it, so ties always share a bin.
fn quantile_codes(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let edges: Vec<f64> = (1..bins)
        .map(|i| {
            let pos = (i * n / bins).clamp(1, n - 1);
            0.5 * (values[order[pos - 1]] + values[order[pos]])
        })
        .collect();
    values
        .iter()
        .map(|v| edges.partition_point(|e| e < v))
        .collect()
}

fn uniform_codes(values: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<usize> {
    let width = (hi - lo) / bins as f64;
    values
        .iter()
        .map(|v| (((v - lo) / width).floor() as usize).min(bins - 1))
        .collect()
}

/// Folds every empty bin into its nearest non-empty neighbour (lower one on
/// ties) and relabels atoms by the mean of their observations.
fn merge_empty(values: &[f64], raw: Vec<usize>, bins: usize) -> Binned {
    let mut counts = vec![0usize; bins];
    for &c in &raw {
        counts[c] += 1;
    }
    let nonempty: Vec<usize> = (0..bins).filter(|&b| counts[b] > 0).collect();
    let target: Vec<usize> = (0..bins)
        .map(|b| {
            let idx = nonempty.partition_point(|&e| e < b);
            if idx < nonempty.len() && nonempty[idx] == b {
                return idx;
            }
            match (idx.checked_sub(1), nonempty.get(idx)) {
                (Some(lo), Some(&hi)) if b - nonempty[lo] <= hi - b => lo,
                (Some(lo), None) => lo,
                _ => idx,
            }
        })
        .collect();
    let codes: Vec<usize> = raw.iter().map(|&c| target[c]).collect();
    let mut sums = vec![0.0; nonempty.len()];
    let mut n = vec![0usize; nonempty.len()];
    for (v, &c) in values.iter().zip(&codes) {
        sums[c] += v;
        n[c] += 1;
    }
    Binned {
        codes,
        labels: sums
            .iter()
            .zip(&n)
            .map(|(s, &k)| (s / k as f64).to_string())
            .collect(),
    }
}

/// Y atoms from several columns: the observed tuples of per-column atoms.
fn combine(parts: Vec<Binned>) -> Binned {
    if parts.len() == 1 {
        return parts.into_iter().next().expect("one part");
    }
    let n = parts[0].codes.len();
    let tuples: Vec<Vec<usize>> = (0..n)
        .map(|i| parts.iter().map(|p| p.codes[i]).collect())
        .collect();
    let atoms: BTreeMap<Vec<usize>, usize> = tuples
        .iter()
        .cloned()
        .map(|t| (t, 0))
        .collect::<BTreeMap<_, _>>()
        .into_keys()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
    let labels = atoms
        .keys()
        .map(|t| {
            t.iter()
                .zip(&parts)
                .map(|(&c, p)| p.labels[c].as_str())
                .collect::<Vec<_>>()
                .join("|")
        })
        .collect();
    Binned {
        codes: tuples.iter().map(|t| atoms[t]).collect(),
        labels,
    }
}

/// Empirical joint of the binned samples: cell mass = count / n.
pub fn empirical_joint(s: &SampleTable, spec: &BinningSpec) -> Result<DiscreteJoint> {
    spec.validate()?;
    let n = s.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    if spec.strategy != Strategy::Categorical && n < spec.bins_x * spec.bins_y {
        warn!(
            "{n} samples for {}×{} bins; expect a strongly biased estimate",
            spec.bins_x, spec.bins_y
        );
    }
    let bx = bin_column(s.x(), spec.strategy, spec.bins_x);
    let by = combine(
        s.y()
            .iter()
            .map(|c| bin_column(c, spec.strategy, spec.bins_y))
            .collect(),
    );
    let mut counts = DMatrix::<f64>::zeros(bx.labels.len(), by.labels.len());
    for (&a, &b) in bx.codes.iter().zip(&by.codes) {
        counts[(a, b)] += 1.0;
    }
    DiscreteJoint::new(counts / n as f64)?.with_labels(Some(bx.labels), Some(by.labels))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub profile: DependenceProfile,
    pub spectrum: SingularSpectrum,
    pub n: usize,
    /// Realized atom counts (|X|, |Y|) after merging.
    pub bins: (usize, usize),
    /// Set when n < 10 · |X| · |Y|.
    pub bias_warning: bool,
}

pub fn estimate_profile(
    s: &SampleTable,
    spec: &BinningSpec,
    max_order: usize,
) -> Result<EstimateReport> {
    estimate_profile_with_tol(s, spec, max_order, spectral::DEFAULT_TOL)
}

pub fn estimate_profile_with_tol(
    s: &SampleTable,
    spec: &BinningSpec,
    max_order: usize,
    tol: f64,
) -> Result<EstimateReport> {
    let j = empirical_joint(s, spec)?;
    let spectrum = spectral::singular_spectrum(&j)?;
    let profile = DependenceProfile::from_spectrum(&spectrum, max_order, tol);
    let n = s.len();
    let bins = (j.nx(), j.ny());
    Ok(EstimateReport {
        profile,
        spectrum,
        n,
        bins,
        bias_warning: n < 10 * bins.0 * bins.1,
    })
}
