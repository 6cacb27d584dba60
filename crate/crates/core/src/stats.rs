//! Distribution-distance statistics used by the verification suites:
//! Kolmogorov-Smirnov distances, total variation, energy distance and a
//! cumulative-trapezoid CDF for gridded reference densities.

use crate::numeric::KahanSum;

/// Kolmogorov-Smirnov distance between a lattice (atomic) distribution and a
/// continuous reference CDF, with the atom CDF evaluated at jump midpoints:
/// `max_k |F(x_k) - p_k/2 - F_ref(x_k)|`.
///
/// A lattice law converging weakly to a continuous one keeps a raw sup-CDF
/// gap of half the largest atom mass forever; comparing at jump midpoints
/// removes that lattice offset so the statistic tracks the genuine
/// convergence trend. Atoms must be sorted by position with masses summing
/// to 1; zero-mass atoms are skipped.
pub fn ks_lattice_midpoint(atoms: &[(f64, f64)], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut acc = KahanSum::new();
    let mut worst = 0.0f64;
    for &(x, p) in atoms {
        if p <= 0.0 {
            continue;
        }
        acc.add(p);
        let mid = acc.value() - 0.5 * p;
        let d = (mid - cdf(x)).abs();
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Raw Kolmogorov-Smirnov distance between an atomic distribution and a
/// continuous CDF: the exact sup over both one-sided limits at every atom.
/// Reported alongside the midpoint variant for diagnostics.
pub fn ks_lattice_raw(atoms: &[(f64, f64)], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut acc = KahanSum::new();
    let mut worst = 0.0f64;
    for &(x, p) in atoms {
        if p <= 0.0 {
            continue;
        }
        let before = acc.value();
        acc.add(p);
        let after = acc.value();
        let f = cdf(x);
        worst = worst.max((before - f).abs()).max((after - f).abs());
    }
    worst
}

/// Classical one-sample Kolmogorov-Smirnov statistic of a sample against a
/// continuous CDF. Sorts the sample in place.
pub fn ks_samples_vs_cdf(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "empty sample");
    samples.sort_by(|a, b| a.partial_cmp(b).expect("NaN sample"));
    let n = samples.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        worst = worst.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    worst
}

/// Total variation distance between two probability vectors on the same
/// support enumeration.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    let mut acc = KahanSum::new();
    for (a, b) in p.iter().zip(q) {
        acc.add((a - b).abs());
    }
    0.5 * acc.value()
}

/// Two-sample energy distance for point clouds in R^d:
/// `sqrt(2 E|X-Y| - E|X-X'| - E|Y-Y'|)`. O(n*m) pairwise; intended for
/// subsampled clouds of a few thousand points.
pub fn energy_distance(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> f64 {
    fn mean_cross(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let mut acc = KahanSum::new();
        for u in a {
            for v in b {
                let d2: f64 = u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum();
                acc.add(d2.sqrt());
            }
        }
        acc.value() / (a.len() as f64 * b.len() as f64)
    }
    assert!(!xs.is_empty() && !ys.is_empty());
    let e_xy = mean_cross(xs, ys);
    let e_xx = mean_cross(xs, xs);
    let e_yy = mean_cross(ys, ys);
    (2.0 * e_xy - e_xx - e_yy).max(0.0).sqrt()
}

/// Sample mean and its standard error (independent replicas).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    assert!(n >= 2.0, "need at least two replicas");
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Normalised cumulative-trapezoid CDF of a density sampled on a uniform grid
/// starting at `x0` with spacing `dx`.
#[derive(Clone, Debug)]
pub struct GridCdf {
    x0: f64,
    dx: f64,
    cum: Vec<f64>,
}

impl GridCdf {
    pub fn from_density(density: &[f64], x0: f64, dx: f64) -> Self {
        assert!(density.len() >= 2);
        let mut cum = Vec::with_capacity(density.len());
        let mut acc = KahanSum::new();
        cum.push(0.0);
        for w in density.windows(2) {
            acc.add(0.5 * dx * (w[0] + w[1]));
            cum.push(acc.value());
        }
        let total = *cum.last().unwrap();
        assert!(total > 0.0, "density integrates to zero");
        for c in cum.iter_mut() {
            *c /= total;
        }
        Self { x0, dx, cum }
    }

    /// Total mass of the unnormalised density (before rescaling) is not kept;
    /// `eval` returns the normalised CDF, clamped to [0, 1] outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        crate::numeric::lerp_uniform(&self.cum, self.x0, self.dx, x)
    }
}
