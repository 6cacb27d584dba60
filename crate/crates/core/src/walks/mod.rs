//! Single and ordered n-tuple random walks under generalized area tilts.
//!
//! A configuration is an n-tuple of lattice trajectories on the time window
//! [-N, N] subject to the hard-core constraint 0 <= X_n(t) <= ... <= X_1(t)
//! (weak ordering; path index 0 is the top path here). Path weights are
//! w(X) = exp(-sum_t V(X(t))) * prod p_steps with the self-potential charged
//! at every time including both endpoints. Exact quantities are computed by
//! transfer recursions over heights {0..M} in log space.

mod bruteforce_impl;
mod mcmc;
mod transfer;

pub mod bruteforce {
    //! Exhaustive reference implementations, deliberately independent of the
    //! transfer/DP code paths: verification oracles, not production paths.
    pub use super::bruteforce_impl::{enumerate_log_partition, enumerate_time_marginal};
}

pub use mcmc::{sample_stream, McmcChain, McmcSamples};
pub use transfer::{
    expected_height_sum, marginal_height, ordered_joint_marginal, ordered_log_partition,
    ordered_partition, transfer_log_partition, transfer_partition, OrderedMarginal,
    DEFAULT_DP_BUDGET,
};

use crate::numeric::gcd;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("invalid step kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid tilt potential: {0}")]
    InvalidTilt(String),
    #[error("tilt has no finite scale: {0}")]
    UnsolvableScale(String),
    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("no admissible path (partition function vanishes)")]
    NoAdmissiblePath,
    #[error("infeasible ensemble: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, WalkError>;

/// Finite-support zero-mean integer step distribution.
///
/// Finite support keeps every transfer computation exact and is a
/// strengthening of the finite-exponential-moment assumption. Irreducibility
/// means the support generates all of Z, i.e. the offsets have gcd 1; the
/// walk may still be periodic (the +/-1 walk is), which the exact recursions
/// and statistics handle through the actual support of each marginal.
#[derive(Clone, Debug)]
pub struct StepKernel {
    steps: Vec<(i64, f64)>,
    sigma2: f64,
    min_offset: i64,
    max_offset: i64,
    prob_lut: Vec<f64>,
    log_lut: Vec<f64>,
}

impl StepKernel {
    pub fn new(mut steps: Vec<(i64, f64)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(WalkError::InvalidKernel("empty support".into()));
        }
        steps.sort_by_key(|&(z, _)| z);
        if steps.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(WalkError::InvalidKernel("duplicate offsets".into()));
        }
        if steps.iter().any(|&(_, p)| !(p > 0.0) || !p.is_finite()) {
            return Err(WalkError::InvalidKernel("weights must be strictly positive".into()));
        }
        let total: f64 = steps.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(WalkError::InvalidKernel(format!("weights sum to {total}, not 1")));
        }
        let mean: f64 = steps.iter().map(|&(z, p)| z as f64 * p).sum();
        if mean.abs() > 1e-12 {
            return Err(WalkError::InvalidKernel(format!("mean step {mean} is not 0")));
        }
        let g = steps.iter().fold(0u64, |acc, &(z, _)| gcd(acc, z.unsigned_abs()));
        if g != 1 {
            return Err(WalkError::InvalidKernel(format!(
                "support does not generate Z (offset gcd {g})"
            )));
        }
        let sigma2: f64 = steps.iter().map(|&(z, p)| (z * z) as f64 * p).sum();
        if !(sigma2 > 0.0) {
            return Err(WalkError::InvalidKernel("zero variance".into()));
        }
        let min_offset = steps[0].0;
        let max_offset = steps[steps.len() - 1].0;
        let span = (max_offset - min_offset) as usize + 1;
        let mut prob_lut = vec![0.0; span];
        let mut log_lut = vec![f64::NEG_INFINITY; span];
        for &(z, p) in &steps {
            prob_lut[(z - min_offset) as usize] = p;
            log_lut[(z - min_offset) as usize] = p.ln();
        }
        Ok(Self { steps, sigma2, min_offset, max_offset, prob_lut, log_lut })
    }

    /// The symmetric +/-1 kernel, p_{-1} = p_{+1} = 1/2.
    pub fn simple() -> Self {
        Self::new(vec![(-1, 0.5), (1, 0.5)]).expect("valid by construction")
    }

    pub fn steps(&self) -> &[(i64, f64)] {
        &self.steps
    }

    pub fn variance(&self) -> f64 {
        self.sigma2
    }

    pub fn min_offset(&self) -> i64 {
        self.min_offset
    }

    pub fn max_offset(&self) -> i64 {
        self.max_offset
    }

    #[inline]
    pub fn prob(&self, offset: i64) -> f64 {
        if offset < self.min_offset || offset > self.max_offset {
            0.0
        } else {
            self.prob_lut[(offset - self.min_offset) as usize]
        }
    }

    #[inline]
    pub fn log_prob(&self, offset: i64) -> f64 {
        if offset < self.min_offset || offset > self.max_offset {
            f64::NEG_INFINITY
        } else {
            self.log_lut[(offset - self.min_offset) as usize]
        }
    }

    #[inline]
    pub fn contains(&self, offset: i64) -> bool {
        self.prob(offset) > 0.0
    }
}

/// A family member V_lambda of self-potentials with its spatial scale
/// H = H_lambda solving H^2 V(H) = 1.
#[derive(Clone, Debug)]
pub struct TiltPotential {
    form: TiltForm,
    h_lambda: std::result::Result<f64, String>,
}

#[derive(Clone, Debug)]
pub enum TiltForm {
    /// V(x) = lambda * x^alpha.
    PowerLaw { amplitude: f64, exponent: f64 },
    /// Piecewise-linear interpolation of (x, V) nodes starting at (0, 0);
    /// clamped to the last value beyond the table.
    Tabulated { nodes: Vec<(f64, f64)> },
    /// V = 0: the untilted ensemble. Has no scale H.
    Zero,
}

impl TiltPotential {
    pub fn power_law(amplitude: f64, exponent: f64) -> Result<Self> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(WalkError::InvalidTilt(format!("amplitude must be positive, got {amplitude}")));
        }
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(WalkError::InvalidTilt(format!("exponent must be positive, got {exponent}")));
        }
        // Closed form: H = lambda^(-1/(2 + alpha)).
        let h = amplitude.powf(-1.0 / (2.0 + exponent));
        Ok(Self { form: TiltForm::PowerLaw { amplitude, exponent }, h_lambda: Ok(h) })
    }

    pub fn tabulated(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(WalkError::InvalidTilt("need at least two nodes".into()));
        }
        if nodes[0] != (0.0, 0.0) {
            return Err(WalkError::InvalidTilt("table must start at (0, 0): V(0) = 0".into()));
        }
        for w in nodes.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(WalkError::InvalidTilt("abscissae must strictly increase".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(WalkError::InvalidTilt("V must be nondecreasing".into()));
            }
        }
        if nodes.iter().any(|&(_, v)| !v.is_finite() || v < 0.0) {
            return Err(WalkError::InvalidTilt("V values must be finite and >= 0".into()));
        }
        if nodes[nodes.len() - 1].1 <= 0.0 {
            return Err(WalkError::InvalidTilt("V vanishes identically on the table".into()));
        }
        let form = TiltForm::Tabulated { nodes };
        let h_lambda = solve_h_lambda(&form).map_err(|e| e.to_string());
        Ok(Self { form, h_lambda })
    }

    /// The untilted ensemble, V = 0 (the lambda = 0 member of any family).
    pub fn zero() -> Self {
        Self { form: TiltForm::Zero, h_lambda: Err("untilted ensemble has no scale H".into()) }
    }

    pub fn form(&self) -> &TiltForm {
        &self.form
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.form, TiltForm::Zero)
    }

    /// V(x) for x >= 0.
    pub fn value(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match &self.form {
            TiltForm::PowerLaw { amplitude, exponent } => amplitude * x.powf(*exponent),
            TiltForm::Tabulated { nodes } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let last = nodes.len() - 1;
                if x >= nodes[last].0 {
                    return nodes[last].1;
                }
                let i = nodes.partition_point(|&(a, _)| a <= x) - 1;
                let (x0, y0) = nodes[i];
                let (x1, y1) = nodes[i + 1];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
            TiltForm::Zero => 0.0,
        }
    }

    /// The scale H solving |H^2 V(H) - 1| <= 1e-10 (closed form for power
    /// laws). Errors for the untilted potential and for tabulated potentials
    /// whose range never reaches H^2 V(H) = 1.
    pub fn h_lambda(&self) -> Result<f64> {
        match &self.h_lambda {
            Ok(h) => Ok(*h),
            Err(msg) => Err(WalkError::UnsolvableScale(msg.clone())),
        }
    }

    /// The rescaled potential H^2 V(r H); converges to the limit shape q(r)
    /// as the amplitude vanishes (exactly r^alpha for power laws).
    pub fn rescaled(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(WalkError::Domain(format!("r must be >= 0, got {r}")));
        }
        let h = self.h_lambda()?;
        Ok(h * h * self.value(r * h))
    }
}

/// Alias for [`TiltPotential::h_lambda`], under the operation's own name.
pub fn compute_h_lambda(tilt: &TiltPotential) -> Result<f64> {
    tilt.h_lambda()
}

/// Solve H^2 V(H) = 1 by bisection for a non-closed-form potential.
pub fn solve_h_lambda(form: &TiltForm) -> Result<f64> {
    match form {
        TiltForm::PowerLaw { amplitude, exponent } => Ok(amplitude.powf(-1.0 / (2.0 + exponent))),
        TiltForm::Zero => Err(WalkError::UnsolvableScale("untilted ensemble has no scale H".into())),
        TiltForm::Tabulated { nodes } => {
            let tilt = TiltPotential { form: form.clone(), h_lambda: Err(String::new()) };
            let g = |x: f64| x * x * tilt.value(x) - 1.0;
            // g is nondecreasing; past the table V clamps, so the bracket can
            // be pushed beyond the last node if needed.
            let mut hi = nodes[nodes.len() - 1].0;
            if g(hi) < 0.0 {
                let tail = nodes[nodes.len() - 1].1;
                hi += (1.0 / tail).sqrt() * 1.01;
                if g(hi) < 0.0 {
                    return Err(WalkError::UnsolvableScale("table never reaches H^2 V(H) = 1".into()));
                }
            }
            let h = crate::numeric::bisect_root(g, 0.0, hi)
                .ok_or_else(|| WalkError::UnsolvableScale("no sign change for H^2 V(H) - 1".into()))?;
            let residual = (h * h * tilt.value(h) - 1.0).abs();
            if residual > 1e-10 {
                return Err(WalkError::UnsolvableScale(format!(
                    "bisection residual {residual} exceeds 1e-10"
                )));
            }
            Ok(h)
        }
    }
}

/// Ensemble of n ordered walks on the window [-N, N] with boundary tuples
/// `left` (at -N) and `right` (at +N), heights confined to {0..M}.
///
/// Boundary tuples are ordered top-first: index 0 is the top path.
#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    kernel: StepKernel,
    tilt: TiltPotential,
    half_window: usize,
    left: Vec<i64>,
    right: Vec<i64>,
    cutoff: i64,
}

impl EnsembleSpec {
    pub fn new(
        kernel: StepKernel,
        tilt: TiltPotential,
        half_window: usize,
        left: Vec<i64>,
        right: Vec<i64>,
        cutoff: i64,
    ) -> Result<Self> {
        if half_window == 0 {
            return Err(WalkError::InvalidSpec("half window N must be >= 1".into()));
        }
        if left.is_empty() || left.len() != right.len() {
            return Err(WalkError::InvalidSpec(format!(
                "boundary tuples must be nonempty and of equal length ({} vs {})",
                left.len(),
                right.len()
            )));
        }
        if cutoff < 0 {
            return Err(WalkError::InvalidSpec(format!("height cutoff {cutoff} must be >= 0")));
        }
        for (name, tuple) in [("left", &left), ("right", &right)] {
            for w in tuple.windows(2) {
                if w[0] < w[1] {
                    return Err(WalkError::InvalidSpec(format!(
                        "{name} boundary {tuple:?} is not ordered top-first"
                    )));
                }
            }
            if tuple[tuple.len() - 1] < 0 {
                return Err(WalkError::InvalidSpec(format!("{name} boundary dips below the wall")));
            }
            if tuple[0] > cutoff {
                return Err(WalkError::InvalidSpec(format!(
                    "{name} boundary {tuple:?} exceeds the cutoff {cutoff}"
                )));
            }
        }
        Ok(Self { kernel, tilt, half_window, left, right, cutoff })
    }

    pub fn paths(&self) -> usize {
        self.left.len()
    }

    pub fn half_window(&self) -> usize {
        self.half_window
    }

    /// Number of time points, 2N + 1.
    pub fn times(&self) -> usize {
        2 * self.half_window + 1
    }

    pub fn left(&self) -> &[i64] {
        &self.left
    }

    pub fn right(&self) -> &[i64] {
        &self.right
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn kernel(&self) -> &StepKernel {
        &self.kernel
    }

    pub fn tilt(&self) -> &TiltPotential {
        &self.tilt
    }

    /// Index of lattice time t in [-N, N] into the 0-based storage.
    pub fn time_index(&self, t: i64) -> Result<usize> {
        let n = self.half_window as i64;
        if t < -n || t > n {
            return Err(WalkError::Domain(format!("time {t} outside [-{n}, {n}]")));
        }
        Ok((t + n) as usize)
    }

    /// -V(x) table for x in 0..=M.
    pub(crate) fn log_tilt_table(&self) -> Vec<f64> {
        (0..=self.cutoff).map(|x| -self.tilt.value(x as f64)).collect()
    }
}

/// n non-crossing non-negative trajectories, stored path-major with path 0 on
/// top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPaths {
    paths: usize,
    times: usize,
    heights: Vec<i64>,
}

impl OrderedPaths {
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(WalkError::InvalidArgument("empty path array".into()));
        }
        let times = rows[0].len();
        if rows.iter().any(|r| r.len() != times) {
            return Err(WalkError::InvalidArgument("ragged path array".into()));
        }
        let paths = rows.len();
        let mut heights = Vec::with_capacity(paths * times);
        for r in &rows {
            heights.extend_from_slice(r);
        }
        Ok(Self { paths, times, heights })
    }

    pub(crate) fn from_flat(paths: usize, times: usize, heights: Vec<i64>) -> Self {
        debug_assert_eq!(heights.len(), paths * times);
        Self { paths, times, heights }
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    /// Number of time points, 2N + 1.
    pub fn times(&self) -> usize {
        self.times
    }

    pub fn half_window(&self) -> usize {
        (self.times - 1) / 2
    }

    #[inline]
    pub fn height(&self, path: usize, time_index: usize) -> i64 {
        self.heights[path * self.times + time_index]
    }

    pub fn row(&self, path: usize) -> &[i64] {
        &self.heights[path * self.times..(path + 1) * self.times]
    }

    /// Check every typed invariant against the generating spec: step support,
    /// weak ordering above the wall, cutoff, boundary pinning.
    pub fn validate(&self, spec: &EnsembleSpec) -> Result<()> {
        if self.paths != spec.paths() || self.times != spec.times() {
            return Err(WalkError::InvalidArgument("path array shape does not match spec".into()));
        }
        for l in 0..self.paths {
            let row = self.row(l);
            if row[0] != spec.left()[l] || row[self.times - 1] != spec.right()[l] {
                return Err(WalkError::InvalidSpec(format!("path {l} endpoints do not match boundaries")));
            }
            for w in row.windows(2) {
                if !spec.kernel().contains(w[1] - w[0]) {
                    return Err(WalkError::InvalidSpec(format!(
                        "step {} not in kernel support",
                        w[1] - w[0]
                    )));
                }
            }
        }
        for t in 0..self.times {
            if self.height(self.paths - 1, t) < 0 {
                return Err(WalkError::InvalidSpec(format!("bottom path below the wall at index {t}")));
            }
            if self.height(0, t) > spec.cutoff() {
                return Err(WalkError::InvalidSpec(format!("top path above the cutoff at index {t}")));
            }
            for l in 1..self.paths {
                if self.height(l - 1, t) < self.height(l, t) {
                    return Err(WalkError::InvalidSpec(format!(
                        "ordering violated between paths {} and {l} at index {t}",
                        l - 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Continuous view of rescaled paths: R_l(t) = X_l(H^2 t)/H with linear
/// interpolation between lattice times, defined for |t| <= N/H^2.
#[derive(Clone, Debug)]
pub struct RescaledPaths<'a> {
    paths: &'a OrderedPaths,
    h_lambda: f64,
}

/// Rescale by the tilt's spatial scale H (time by H^2).
pub fn rescale_path<'a>(paths: &'a OrderedPaths, tilt: &TiltPotential) -> Result<RescaledPaths<'a>> {
    Ok(RescaledPaths { paths, h_lambda: tilt.h_lambda()? })
}

impl<'a> RescaledPaths<'a> {
    pub fn h_lambda(&self) -> f64 {
        self.h_lambda
    }

    /// Half-width of the rescaled time window, N/H^2.
    pub fn time_span(&self) -> f64 {
        self.paths.half_window() as f64 / (self.h_lambda * self.h_lambda)
    }

    /// R_l(t); errors outside [-N/H^2, N/H^2].
    pub fn eval(&self, path: usize, t: f64) -> Result<f64> {
        let span = self.time_span();
        if !(t >= -span - 1e-12 && t <= span + 1e-12) {
            return Err(WalkError::Domain(format!("rescaled time {t} outside [-{span}, {span}]")));
        }
        let n = self.paths.half_window() as f64;
        let s = (t * self.h_lambda * self.h_lambda).clamp(-n, n) + n;
        let i = (s.floor() as usize).min(self.paths.times() - 2);
        let frac = s - i as f64;
        let a = self.paths.height(path, i) as f64;
        let b = self.paths.height(path, i + 1) as f64;
        Ok((a * (1.0 - frac) + b * frac) / self.h_lambda)
    }
}
