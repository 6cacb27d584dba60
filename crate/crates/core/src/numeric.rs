//! Shared low-level numerics: compensated summation, log-space reductions and
//! scalar root/extremum finding.

/// Neumaier-compensated accumulator. Partition functions and quadratures sum
/// up to ~1e7 terms; plain summation would eat several digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// log(Σ exp(x_i)) with max-shift and compensated summation.
/// Returns -inf for an empty slice or all -inf entries.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add((x - m).exp());
    }
    m + acc.value().ln()
}

/// Two-term log-space addition: log(e^a + e^b).
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Bisection for a sign change of `f` on [lo, hi]. `f(lo)` and `f(hi)` must
/// have opposite signs (zero endpoints are returned directly). Iterates until
/// the bracket cannot be split further in f64, so the result is the best
/// representable root up to the monotonicity of `f`.
pub fn bisect_root(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Golden-section minimisation on [lo, hi] down to bracket width `tol`.
/// Assumes `f` is unimodal on the bracket; callers that cannot guarantee this
/// should seed the bracket with a grid scan first.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Linear interpolation of uniformly gridded samples `ys` on [x0, x0 + (len-1)*dx].
/// Clamps to the end values outside the grid.
#[inline]
pub fn lerp_uniform(ys: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let n = ys.len();
    debug_assert!(n >= 2);
    let s = (x - x0) / dx;
    if s <= 0.0 {
        return ys[0];
    }
    if s >= (n - 1) as f64 {
        return ys[n - 1];
    }
    let i = s.floor() as usize;
    let frac = s - i as f64;
    ys[i] * (1.0 - frac) + ys[i + 1] * frac
}

/// Greatest common divisor of two non-negative integers.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
