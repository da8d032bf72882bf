#![allow(dead_code)]

use depscale::structure::Component;
use depscale::{DiscreteJoint, FunctionTable, SampleTable, Side};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn probability_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Random joint with strictly positive marginals; roughly a fifth of the
/// cells are zeroed to reach strongly dependent tables too.
pub fn random_joint(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> DiscreteJoint {
    loop {
        let m = DMatrix::from_fn(nx, ny, |_, _| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.0..1.0f64).powi(2)
            }
        });
        let total = m.sum();
        if total <= 0.0 {
            continue;
        }
        if let Ok(j) = DiscreteJoint::new(m / total) {
            return j;
        }
    }
}

pub fn random_independent(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> DiscreteJoint {
    let px = probability_vector(rng, nx);
    let py = probability_vector(rng, ny);
    DiscreteJoint::independent(&px, &py).unwrap()
}

/// Random grouping of `n` columns into between 1 and n groups.
pub fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<usize>> {
    let groups = rng.random_range(1..=n);
    let mut parts = vec![Vec::new(); groups];
    let mut cols: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        cols.swap(i, rng.random_range(0..=i));
    }
    for (i, c) in cols.into_iter().enumerate() {
        let g = if i < groups { i } else { rng.random_range(0..groups) };
        parts[g].push(c);
    }
    parts
}

pub fn numeric_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n)
        .map(|_| format!("{}", rng.random_range(-5.0..5.0f64)))
        .collect()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Inputs for a finite-rank joint with `k` components on an nx × ny alphabet,
/// scaled to 80% of the largest amplitude that keeps every p(x|y) ≥ 0.
pub fn finite_rank_inputs(
    rng: &mut ChaCha8Rng,
    k: usize,
    nx: usize,
    ny: usize,
) -> (Vec<f64>, Vec<Component>, Vec<f64>) {
    let p0 = probability_vector(rng, nx);
    let py = probability_vector(rng, ny);
    // Orthogonal directions keep the k components from nearly cancelling.
    let mut ps = orthonormal_columns(rng, nx, k, &vec![1.0; nx]);
    let qs = orthonormal_columns(rng, ny, k, &py);
    let mut limit = f64::INFINITY;
    for x in 0..nx {
        for y in 0..ny {
            let c: f64 = (0..k).map(|i| ps[i][x] * qs[i][y]).sum();
            if c < 0.0 {
                limit = limit.min(p0[x] / -c);
            }
        }
    }
    let scale = if limit.is_finite() { 0.8 * limit } else { 1.0 };
    for p in &mut ps {
        p.iter_mut().for_each(|v| *v *= scale);
        // Exact zero sum after scaling.
        let mean = p.iter().sum::<f64>() / nx as f64;
        p.iter_mut().for_each(|v| *v -= mean);
    }
    let components = ps
        .into_iter()
        .zip(qs)
        .map(|(p, q)| Component {
            p,
            q: FunctionTable::new(q, Side::Y),
        })
        .collect();
    (p0, components, py)
}

/// `k` random vectors of length `n`, centred and orthonormal under weights `w`.
fn orthonormal_columns(rng: &mut ChaCha8Rng, n: usize, k: usize, w: &[f64]) -> Vec<Vec<f64>> {
    let total: f64 = w.iter().sum();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(w).map(|((x, y), w)| x * y * w).sum::<f64>();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    while out.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        let mean = dot(&v, &vec![1.0; n]) / total;
        v.iter_mut().for_each(|x| *x -= mean);
        for _ in 0..2 {
            for u in &out {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, u)| *x -= c * u);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

pub fn gaussian_samples(rng: &mut ChaCha8Rng, rho: f64, n: usize) -> SampleTable {
    let s = (1.0 - rho * rho).sqrt();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = normal(rng);
        let z = normal(rng);
        xs.push(x);
        ys.push(rho * x + s * z);
    }
    SampleTable::pairs(xs, ys).unwrap()
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub const MC_SEED_BASE: u64 = 20_240_801;
pub const MC_REPLICATES: usize = 100;
pub const MC_SAMPLES: usize = 100_000;
pub const MC_RHO: f64 = 0.8;
pub const MC_BINS: usize = 16;

/// Plug-in R̂ for each seeded replicate of the ρ = 0.8 Gaussian experiment.
pub fn monte_carlo_r_hat() -> Vec<f64> {
    use depscale::estimate::{estimate_profile, BinningSpec};
    use rand::SeedableRng;
    (0..MC_REPLICATES)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(MC_SEED_BASE + i as u64);
            let s = gaussian_samples(&mut rng, MC_RHO, MC_SAMPLES);
            estimate_profile(&s, &BinningSpec::quantile(MC_BINS, MC_BINS), 0)
                .unwrap()
                .profile
                .r
        })
        .collect()
}

/// Lower bound on the k-th singular value of the dependence part, computed
/// from the inputs alone: the centred normalized matrix factors as A·Bᵀ with
/// A = p_i/√p_x and B = (q_i − E q_i)·√p_y, so σ_k ≥ σ_min(A)·σ_min(B).
pub fn finite_rank_conditioning(p0: &[f64], comps: &[Component], py: &[f64]) -> f64 {
    let (nx, ny, k) = (p0.len(), py.len(), comps.len());
    let means: Vec<f64> = comps
        .iter()
        .map(|c| c.q.values.iter().zip(py).map(|(q, w)| q * w).sum())
        .collect();
    let px: Vec<f64> = (0..nx)
        .map(|x| p0[x] + comps.iter().zip(&means).map(|(c, m)| c.p[x] * m).sum::<f64>())
        .collect();
    let a = DMatrix::from_fn(nx, k, |x, i| comps[i].p[x] / px[x].sqrt());
    let b = DMatrix::from_fn(ny, k, |y, i| (comps[i].q.values[y] - means[i]) * py[y].sqrt());
    let smin = |m: DMatrix<f64>| m.singular_values().min();
    smin(a) * smin(b)
}
