//! Euler-Maruyama simulation of Ferrari-Spohn and Dyson Ferrari-Spohn
//! diffusions driven by a solved [`SpectralBasis`].
//!
//! The drift is sigma^2 * grad log(ground state), i.e. sigma^2 * phi_0'/phi_0
//! for a single path and sigma^2 * grad log Delta for the ordered n-tuple;
//! with that scaling the scheme is reversible with respect to phi_0^2 dr
//! (resp. Delta^2 dr) for every diffusivity. Proposals that leave the open
//! cone {R > r_1 > ... > r_n > 0} are rejected and redrawn; the exact process
//! never touches the boundary, so rejection only perturbs the law at O(dt).

use super::{Result, SpectralBasis, SpectralError};
use crate::numeric::lerp_uniform;
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

/// A sampled diffusion trajectory: `steps + 1` states of dimension `dims`
/// stored flat, state-major.
#[derive(Clone, Debug)]
pub struct DiffusionPath {
    dt: f64,
    dims: usize,
    states: Vec<f64>,
}

impl DiffusionPath {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of recorded states (steps + 1).
    pub fn len(&self) -> usize {
        self.states.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dims..(k + 1) * self.dims]
    }

    /// Iterator over one coordinate of the trajectory.
    pub fn coordinate(&self, dim: usize) -> impl Iterator<Item = f64> + '_ {
        assert!(dim < self.dims);
        self.states.iter().skip(dim).step_by(self.dims).copied()
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }
}

/// Maximum redraws of the Gaussian increment before the local step is halved.
const MAX_RETRIES: usize = 100;
/// Maximum local halvings before the step is declared stiff.
const MAX_HALVINGS: u32 = 40;

/// Precomputed drift table for the single-path case.
struct GroundDrift {
    r_lo: f64,
    r_hi: f64,
    step: f64,
    values: Vec<f64>,
}

impl GroundDrift {
    fn build(basis: &SpectralBasis) -> Self {
        let phi0 = basis.eigenfunction(0);
        let peak = phi0.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let floor = 1e-10 * peak;
        let m = phi0.len();
        let mut lo = 1usize;
        while lo < m && phi0[lo].abs() <= floor {
            lo += 1;
        }
        let mut hi = m - 2;
        while hi > lo && phi0[hi].abs() <= floor {
            hi -= 1;
        }
        let h = basis.grid_step();
        let s2 = basis.sigma2();
        let mut values = Vec::with_capacity(hi - lo + 1);
        for i in lo..=hi {
            let d = (phi0[i + 1] - phi0[i - 1]) / (2.0 * h);
            values.push(s2 * d / phi0[i]);
        }
        Self { r_lo: lo as f64 * h, r_hi: hi as f64 * h, step: h, values }
    }

    #[inline]
    fn eval(&self, r: f64) -> f64 {
        if r < self.r_lo {
            // phi_0 ~ c r near the wall, so the drift continues as ~ sigma^2/r.
            return self.values[0] * self.r_lo / r.max(1e-12);
        }
        if r > self.r_hi {
            return *self.values.last().unwrap();
        }
        lerp_uniform(&self.values, self.r_lo, self.step, r)
    }
}

/// Euler-Maruyama simulation of the (Dyson) Ferrari-Spohn diffusion for
/// `x0.len()` ordered paths, starting from the strictly ordered interior
/// point `x0`, with time step `dt` over `steps` steps. Deterministic for a
/// fixed seed.
pub fn simulate_diffusion(
    basis: &SpectralBasis,
    x0: &[f64],
    dt: f64,
    steps: usize,
    seed: u64,
) -> Result<DiffusionPath> {
    let n = x0.len();
    if n == 0 || n > basis.len() {
        return Err(SpectralError::Size(format!(
            "need 1..={} paths for this basis, got {n}",
            basis.len()
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SpectralError::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !ordered_interior(x0, basis.r_max()) {
        return Err(SpectralError::Domain(format!(
            "x0 {x0:?} is not strictly inside the ordered cone within (0, {})",
            basis.r_max()
        )));
    }

    let ground = if n == 1 { Some(GroundDrift::build(basis)) } else { None };
    let sigma = basis.sigma();
    let s2 = basis.sigma2();
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut x = x0.to_vec();
    let mut drift = vec![0.0; n];
    let mut proposal = vec![0.0; n];
    let mut states = Vec::with_capacity((steps + 1) * n);
    states.extend_from_slice(&x);

    for step_idx in 0..steps {
        let mut remaining = dt;
        let mut local = dt;
        let mut halvings = 0u32;
        while remaining > 0.0 {
            let h = local.min(remaining);
            match &ground {
                Some(table) => drift[0] = table.eval(x[0]),
                None => {
                    let g = basis.dyson_drift(&x)?;
                    for (d, gi) in drift.iter_mut().zip(&g) {
                        *d = s2 * gi;
                    }
                }
            }
            let sqrt_h = h.sqrt();
            let mut accepted = false;
            for _ in 0..MAX_RETRIES {
                for i in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    proposal[i] = x[i] + drift[i] * h + sigma * sqrt_h * z;
                }
                if ordered_interior(&proposal, basis.r_max()) {
                    accepted = true;
                    break;
                }
            }
            if accepted {
                x.copy_from_slice(&proposal);
                remaining -= h;
            } else {
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(SpectralError::Stiff { state: x.clone(), step: step_idx });
                }
                local = h / 2.0;
            }
        }
        states.extend_from_slice(&x);
    }
    Ok(DiffusionPath { dt, dims: n, states })
}

fn ordered_interior(x: &[f64], r_max: f64) -> bool {
    if !(x[x.len() - 1] > 0.0) || !(x[0] < r_max) {
        return false;
    }
    x.windows(2).all(|w| w[0] > w[1])
}
