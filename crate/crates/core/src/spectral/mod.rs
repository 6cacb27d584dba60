//! Sturm-Liouville spectra on the half-line and the diffusions they generate.
//!
//! The operator is (sigma^2/2) d^2/dr^2 - q(r) on (0, R) with Dirichlet
//! conditions at both ends; its eigenvalues are written as -e_j with
//! 0 < e_0 < e_1 < ... . The ground state h-transform gives the Ferrari-Spohn
//! diffusion, and Slater determinants of the lowest n eigenfunctions give the
//! Dyson variant on the ordered cone.

mod sde;

pub use sde::{simulate_diffusion, DiffusionPath};

use crate::numeric::{lerp_uniform, KahanSum};
use crate::stats::GridCdf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigenpair resolution failed: {0}")]
    Resolution(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("Slater determinant near singular (|log det| guard at {0})")]
    NearSingular(f64),
    #[error("SDE step kept being rejected near state {state:?} (step {step})")]
    Stiff { state: Vec<f64>, step: usize },
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// Confining potential q together with the diffusivity sigma.
#[derive(Clone, Debug)]
pub struct Potential {
    form: PotentialForm,
    sigma: f64,
}

#[derive(Clone, Debug)]
pub enum PotentialForm {
    /// q(r) = c * r^alpha.
    PowerLaw { coefficient: f64, exponent: f64 },
    /// Piecewise-linear interpolation of (r, q) nodes; clamped past the last
    /// node. Must be nondecreasing from `monotone_from` on.
    Tabulated { nodes: Vec<(f64, f64)>, monotone_from: f64 },
    /// q = 0: no confinement. Exposes pure Dirichlet box modes; used to
    /// calibrate the SDE scheme against plain Brownian motion.
    Free,
}

impl Potential {
    pub fn power_law(coefficient: f64, exponent: f64, sigma: f64) -> Result<Self> {
        if !(coefficient > 0.0) || !(exponent > 0.0) {
            return Err(SpectralError::InvalidPotential(format!(
                "power law needs positive coefficient and exponent, got c={coefficient}, alpha={exponent}"
            )));
        }
        Self::check_sigma(sigma)?;
        Ok(Self { form: PotentialForm::PowerLaw { coefficient, exponent }, sigma })
    }

    /// Linear potential q(r) = c r.
    pub fn linear(c: f64, sigma: f64) -> Result<Self> {
        Self::power_law(c, 1.0, sigma)
    }

    pub fn free(sigma: f64) -> Result<Self> {
        Self::check_sigma(sigma)?;
        Ok(Self { form: PotentialForm::Free, sigma })
    }

    pub fn tabulated(nodes: Vec<(f64, f64)>, monotone_from: f64, sigma: f64) -> Result<Self> {
        Self::check_sigma(sigma)?;
        if nodes.len() < 2 {
            return Err(SpectralError::InvalidPotential("need at least two nodes".into()));
        }
        for w in nodes.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(SpectralError::InvalidPotential("node abscissae must increase".into()));
            }
        }
        if nodes[0].0 > 0.0 {
            return Err(SpectralError::InvalidPotential("table must start at r = 0".into()));
        }
        if nodes.iter().any(|&(_, v)| !v.is_finite() || v < 0.0) {
            return Err(SpectralError::InvalidPotential("q values must be finite and >= 0".into()));
        }
        for w in nodes.windows(2) {
            if w[0].0 >= monotone_from && w[1].1 < w[0].1 {
                return Err(SpectralError::InvalidPotential(format!(
                    "q decreases at r = {} beyond the declared monotone radius {monotone_from}",
                    w[1].0
                )));
            }
        }
        Ok(Self { form: PotentialForm::Tabulated { nodes, monotone_from }, sigma })
    }

    fn check_sigma(sigma: f64) -> Result<()> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(SpectralError::InvalidPotential(format!("sigma must be positive, got {sigma}")));
        }
        Ok(())
    }

    pub fn q(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match &self.form {
            PotentialForm::PowerLaw { coefficient, exponent } => coefficient * r.powf(*exponent),
            PotentialForm::Tabulated { nodes, .. } => {
                if r <= nodes[0].0 {
                    return nodes[0].1;
                }
                if r >= nodes[nodes.len() - 1].0 {
                    return nodes[nodes.len() - 1].1;
                }
                let i = nodes.partition_point(|&(x, _)| x <= r) - 1;
                let (x0, y0) = nodes[i];
                let (x1, y1) = nodes[i + 1];
                y0 + (y1 - y0) * (r - x0) / (x1 - x0)
            }
            PotentialForm::Free => 0.0,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn form(&self) -> &PotentialForm {
        &self.form
    }
}

/// chi = (2c / sigma^2)^(1/3) for the linear potential q(r) = c r.
pub fn airy_chi(c: f64, sigma: f64) -> f64 {
    assert!(c > 0.0 && sigma > 0.0);
    (2.0 * c / (sigma * sigma)).powf(1.0 / 3.0)
}

/// Ground-state energy e_0 = c * omega_1 / chi for the linear potential.
pub fn airy_ground_energy(c: f64, sigma: f64) -> f64 {
    c * crate::airy::AIRY_OMEGA1 / airy_chi(c, sigma)
}

/// Radius at which the linear-potential ground density has decayed far below
/// any tolerance used here; a convenient default truncation.
pub fn linear_suggested_r_max(c: f64, sigma: f64) -> f64 {
    (crate::airy::AIRY_OMEGA1 + 12.0) / airy_chi(c, sigma)
}

/// Discretised Dirichlet eigenpairs on the uniform grid of [0, R].
///
/// Eigenfunctions are stored on the full grid (boundary zeros included) and
/// normalised to unit discrete L2 norm: h * sum phi^2 = 1, matching the
/// continuum normalisation as h -> 0.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    sigma: f64,
    step: f64,
    r_max: f64,
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<Vec<f64>>,
    derivatives: Vec<Vec<f64>>,
}

/// Relative magnitude below which eigenfunction samples are treated as
/// numerically zero (inverse iteration noise floor in the decay tail).
const TAIL_REL: f64 = 1e-8;

impl SpectralBasis {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn grid_step(&self) -> f64 {
        self.step
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of eigenpairs held.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, j: usize) -> f64 {
        self.eigenvalues[j]
    }

    /// Full-grid samples of phi_j (boundary zeros included).
    pub fn eigenfunction(&self, j: usize) -> &[f64] {
        &self.eigenfunctions[j]
    }

    /// Grid abscissa of node i.
    pub fn r_at(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn grid_len(&self) -> usize {
        self.eigenfunctions[0].len()
    }

    /// phi_j(r) by linear interpolation; zero outside [0, R].
    pub fn phi(&self, j: usize, r: f64) -> f64 {
        if r < 0.0 || r > self.r_max {
            return 0.0;
        }
        lerp_uniform(&self.eigenfunctions[j], 0.0, self.step, r)
    }

    /// phi_j'(r) from the centred-difference table, linearly interpolated.
    pub fn phi_prime(&self, j: usize, r: f64) -> f64 {
        if r < 0.0 || r > self.r_max {
            return 0.0;
        }
        lerp_uniform(&self.derivatives[j], 0.0, self.step, r)
    }

    /// Ferrari-Spohn drift sigma^2 * phi_0'(r) / phi_0(r).
    ///
    /// Only defined strictly inside the grid, r in (h, R - h), and where the
    /// ground state is numerically bounded away from zero.
    pub fn fs_drift(&self, r: f64) -> Result<f64> {
        if !(r > self.step && r < self.r_max - self.step) {
            return Err(SpectralError::Domain(format!(
                "fs_drift defined on ({}, {}), got {r}",
                self.step,
                self.r_max - self.step
            )));
        }
        let phi0 = self.phi(0, r);
        let peak = self.eigenfunctions[0].iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if phi0 <= TAIL_REL * TAIL_REL * peak {
            return Err(SpectralError::Domain(format!("ground state vanishes at r = {r}")));
        }
        Ok(self.sigma2() * self.phi_prime(0, r) / phi0)
    }

    /// Slater determinant det[phi_{j}(r_i)]_{i,j=0..n-1} of the n lowest
    /// eigenfunctions at the points `r` (ordering of `r` is the row order).
    pub fn slater(&self, r: &[f64]) -> Result<f64> {
        let n = r.len();
        if n == 0 || n > self.len() {
            return Err(SpectralError::Size(format!(
                "need 1..={} points for this basis, got {n}",
                self.len()
            )));
        }
        for &ri in r {
            if !(0.0..=self.r_max).contains(&ri) {
                return Err(SpectralError::Domain(format!("point {ri} outside [0, {}]", self.r_max)));
            }
        }
        let mut m = vec![0.0; n * n];
        for (i, &ri) in r.iter().enumerate() {
            for j in 0..n {
                m[i * n + j] = self.phi(j, ri);
            }
        }
        Ok(det_in_place(&mut m, n))
    }

    /// Gradient of log Delta at a strictly ordered interior point
    /// (r_1 > r_2 > ... > r_n > 0), by cofactor expansion: component i is
    /// sum_j phi_j'(r_i) * (M^{-1})_{j i}.
    pub fn dyson_drift(&self, r: &[f64]) -> Result<Vec<f64>> {
        let n = r.len();
        if n == 0 || n > self.len() {
            return Err(SpectralError::Size(format!(
                "need 1..={} points for this basis, got {n}",
                self.len()
            )));
        }
        if !strictly_inside_cone(r, self.r_max) {
            return Err(SpectralError::Domain(format!(
                "point {r:?} not strictly inside the ordered cone within (0, {})",
                self.r_max
            )));
        }
        let mut m = vec![0.0; n * n];
        for (i, &ri) in r.iter().enumerate() {
            for j in 0..n {
                m[i * n + j] = self.phi(j, ri);
            }
        }
        let lu = LuFactors::new(m, n).ok_or(SpectralError::NearSingular(-300.0 * std::f64::consts::LN_10))?;
        if lu.log_abs_det() < -300.0 * std::f64::consts::LN_10 {
            return Err(SpectralError::NearSingular(lu.log_abs_det()));
        }
        let mut grad = Vec::with_capacity(n);
        for (i, &ri) in r.iter().enumerate() {
            let col = lu.solve_unit(i);
            let mut acc = KahanSum::new();
            for (j, cj) in col.iter().enumerate() {
                acc.add(self.phi_prime(j, ri) * cj);
            }
            grad.push(acc.value());
        }
        Ok(grad)
    }

    /// Stationary density phi_0^2 on the grid (integrates to 1 by trapezoid).
    pub fn ground_density(&self) -> Vec<f64> {
        self.eigenfunctions[0].iter().map(|v| v * v).collect()
    }

    pub fn ground_cdf(&self) -> GridCdf {
        GridCdf::from_density(&self.ground_density(), 0.0, self.step)
    }

    /// Apply the Ferrari-Spohn semigroup for time t to a grid function:
    /// S^t f = (1/phi_0) sum_j e^{-(e_j - e_0) t} <f phi_0, phi_j> phi_j.
    ///
    /// The h-transform ratio is formed where phi_0 is numerically nonzero;
    /// values in the far decay tail are extended as constants from the last
    /// trusted node. Conserves constants exactly up to discrete
    /// orthonormality error.
    pub fn semigroup_apply(&self, t: f64, f: &[f64]) -> Result<Vec<f64>> {
        if t < 0.0 {
            return Err(SpectralError::Domain(format!("semigroup time must be >= 0, got {t}")));
        }
        let m = self.grid_len();
        if f.len() != m {
            return Err(SpectralError::Size(format!("grid function has {} nodes, basis has {m}", f.len())));
        }
        let phi0 = &self.eigenfunctions[0];
        let e0 = self.eigenvalues[0];
        // Spectral coefficients of f * phi_0.
        let mut coeff = Vec::with_capacity(self.len());
        for j in 0..self.len() {
            let mut acc = KahanSum::new();
            let phij = &self.eigenfunctions[j];
            for i in 0..m {
                acc.add(f[i] * phi0[i] * phij[i]);
            }
            coeff.push(self.step * acc.value());
        }
        let peak = phi0.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let floor = TAIL_REL * peak;
        let mut out = vec![0.0; m];
        let mut last_good = coeff[0]; // mu_0 average: the t -> inf limit
        for i in 0..m {
            if phi0[i].abs() > floor {
                let mut acc = KahanSum::new();
                for j in 0..self.len() {
                    acc.add((-(self.eigenvalues[j] - e0) * t).exp() * coeff[j] * self.eigenfunctions[j][i]);
                }
                last_good = acc.value() / phi0[i];
            }
            out[i] = last_good;
        }
        // Nodes before the first trusted one (r = 0 endpoint) get the first
        // trusted value.
        if let Some(first) = (0..m).find(|&i| phi0[i].abs() > floor) {
            for i in 0..first {
                out[i] = out[first];
            }
        }
        Ok(out)
    }

    /// Assemble a basis from raw parts; checks shapes only, not the spectral
    /// invariants. Intended for calibration tests and foreign bindings.
    pub fn from_parts(
        sigma: f64,
        step: f64,
        r_max: f64,
        eigenvalues: Vec<f64>,
        eigenfunctions: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != eigenfunctions.len() {
            return Err(SpectralError::Size("eigenvalue/eigenfunction count mismatch".into()));
        }
        let m = (r_max / step).round() as usize + 1;
        if eigenfunctions.iter().any(|f| f.len() != m) {
            return Err(SpectralError::Size("eigenfunction grid length mismatch".into()));
        }
        let derivatives = eigenfunctions.iter().map(|f| centred_derivative(f, step)).collect();
        Ok(Self { sigma, step, r_max, eigenvalues, eigenfunctions, derivatives })
    }

    /// Typed invariants: positive strictly increasing eigenvalues, discrete
    /// orthonormality to 1e-8, and phi_j having exactly j interior sign
    /// changes (counted above the tail noise floor).
    pub fn validate(&self) -> Result<()> {
        for j in 0..self.len() {
            if !(self.eigenvalues[j] > 0.0) {
                return Err(SpectralError::Resolution(format!("e_{j} = {} not positive", self.eigenvalues[j])));
            }
            if j > 0 && self.eigenvalues[j] <= self.eigenvalues[j - 1] {
                return Err(SpectralError::Resolution(format!(
                    "eigenvalues not strictly increasing at j = {j}"
                )));
            }
        }
        for i in 0..self.len() {
            for j in i..self.len() {
                let mut acc = KahanSum::new();
                for (a, b) in self.eigenfunctions[i].iter().zip(&self.eigenfunctions[j]) {
                    acc.add(a * b);
                }
                let ip = self.step * acc.value();
                let target = if i == j { 1.0 } else { 0.0 };
                if (ip - target).abs() >= 1e-8 {
                    return Err(SpectralError::Resolution(format!(
                        "orthonormality defect <phi_{i}, phi_{j}> = {ip}"
                    )));
                }
            }
        }
        for j in 0..self.len() {
            let changes = interior_sign_changes(&self.eigenfunctions[j]);
            if changes != j {
                return Err(SpectralError::Resolution(format!(
                    "phi_{j} has {changes} interior sign changes, expected {j}"
                )));
            }
        }
        Ok(())
    }
}

fn strictly_inside_cone(r: &[f64], r_max: f64) -> bool {
    if r.is_empty() || !(r[r.len() - 1] > 0.0) || !(r[0] < r_max) {
        return false;
    }
    r.windows(2).all(|w| w[0] > w[1])
}

fn centred_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    let mut d = vec![0.0; m];
    d[0] = (f[1] - f[0]) / h;
    d[m - 1] = (f[m - 1] - f[m - 2]) / h;
    for i in 1..m - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d
}

/// Interior sign changes of a grid function, ignoring entries below the
/// relative noise floor of the decay tail.
pub(crate) fn interior_sign_changes(f: &[f64]) -> usize {
    let peak = f.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let floor = TAIL_REL * peak;
    let mut changes = 0;
    let mut last = 0.0f64;
    for &v in &f[1..f.len() - 1] {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Dense determinant with partial pivoting, in place. Small n only.
fn det_in_place(m: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if m[row * n + col].abs() > m[piv * n + col].abs() {
                piv = row;
            }
        }
        if m[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let d = m[col * n + col];
        det *= d;
        for row in col + 1..n {
            let factor = m[row * n + col] / d;
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
        }
    }
    det
}

/// LU factors with partial pivoting for the small Slater matrices.
struct LuFactors {
    lu: Vec<f64>,
    perm: Vec<usize>,
    n: usize,
    log_abs_det: f64,
}

impl LuFactors {
    fn new(mut m: Vec<f64>, n: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut log_abs_det = 0.0;
        for col in 0..n {
            let mut piv = col;
            for row in col + 1..n {
                if m[row * n + col].abs() > m[piv * n + col].abs() {
                    piv = row;
                }
            }
            if m[piv * n + col] == 0.0 {
                return None;
            }
            if piv != col {
                for k in 0..n {
                    m.swap(col * n + k, piv * n + k);
                }
                perm.swap(col, piv);
            }
            let d = m[col * n + col];
            log_abs_det += d.abs().ln();
            for row in col + 1..n {
                let factor = m[row * n + col] / d;
                m[row * n + col] = factor;
                for k in col + 1..n {
                    m[row * n + k] -= factor * m[col * n + k];
                }
            }
        }
        Some(Self { lu: m, perm, n, log_abs_det })
    }

    fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    /// Solve M x = e_i.
    fn solve_unit(&self, i: usize) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        for (row, &p) in self.perm.iter().enumerate() {
            x[row] = if p == i { 1.0 } else { 0.0 };
        }
        for row in 1..n {
            for k in 0..row {
                x[row] -= self.lu[row * n + k] * x[k];
            }
        }
        for row in (0..n).rev() {
            for k in row + 1..n {
                x[row] -= self.lu[row * n + k] * x[k];
            }
            x[row] /= self.lu[row * n + row];
        }
        x
    }
}

/// Solve the Dirichlet eigenproblem of (sigma^2/2) d^2/dr^2 - q on [0, R]
/// discretised with step `h`, returning the `k` lowest eigenpairs.
///
/// R/h must be integral and k < R/h - 1. The discretisation is the standard
/// second-order central difference, so eigenvalues converge at O(h^2).
pub fn solve_spectrum(potential: &Potential, r_max: f64, h: f64, k: usize) -> Result<SpectralBasis> {
    let ratio = r_max / h;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
        return Err(SpectralError::InvalidArgument(format!("R/h = {ratio} is not integral")));
    }
    let n_cells = ratio.round() as usize;
    if n_cells < 4 {
        return Err(SpectralError::InvalidArgument("grid too coarse".into()));
    }
    let n = n_cells - 1; // interior nodes
    if k == 0 || k >= n {
        return Err(SpectralError::InvalidArgument(format!(
            "requested {k} eigenpairs on a grid with {n} interior nodes"
        )));
    }
    let sigma2 = potential.sigma2();
    let half_s2_h2 = 0.5 * sigma2 / (h * h);
    let mut diag = Vec::with_capacity(n);
    for i in 1..=n {
        let q = potential.q(i as f64 * h);
        if !q.is_finite() || q < 0.0 {
            return Err(SpectralError::InvalidPotential(format!("q({}) = {q}", i as f64 * h)));
        }
        diag.push(q + 2.0 * half_s2_h2);
    }
    let off = -half_s2_h2;

    let brackets = lowest_eigenvalues(&diag, off, k)?;
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenfunctions = Vec::with_capacity(k);
    let mut derivatives = Vec::with_capacity(k);
    let mut prev: Vec<Vec<f64>> = Vec::new();
    for (j, &ev) in brackets.iter().enumerate() {
        let gap_ok = (j == 0 || brackets[j] - brackets[j - 1] > 1e-6 * ev.abs().max(1.0))
            && (j + 1 >= k || brackets[j + 1] - brackets[j] > 1e-6 * ev.abs().max(1.0));
        let (v, polished) = inverse_iteration(&diag, off, ev, if gap_ok { &[] } else { &prev })
            .ok_or_else(|| SpectralError::Resolution(format!("inverse iteration stalled for e_{j}")))?;
        eigenvalues.push(polished);
        prev.push(v.clone());
        // Full grid with Dirichlet zeros; normalise h * sum phi^2 = 1 and fix
        // the sign so the first significant sample is positive.
        let mut full = Vec::with_capacity(n + 2);
        full.push(0.0);
        full.extend_from_slice(&v);
        full.push(0.0);
        let norm = (h * full.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let peak = full.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let lead = full.iter().find(|x| x.abs() > 1e-6 * peak).copied().unwrap_or(1.0);
        let scale = lead.signum() / norm;
        for x in full.iter_mut() {
            *x *= scale;
        }
        derivatives.push(centred_derivative(&full, h));
        eigenfunctions.push(full);
    }

    let basis = SpectralBasis {
        sigma: potential.sigma(),
        step: h,
        r_max,
        eigenvalues,
        eigenfunctions,
        derivatives,
    };
    basis.validate()?;
    Ok(basis)
}

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly
/// below x, by the Sturm / LDL^T pivot count.
fn sturm_count_below(diag: &[f64], off: f64, x: f64) -> usize {
    let off2 = off * off;
    let mut count = 0usize;
    let mut q = 1.0f64;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off2 / q };
        if q < 0.0 {
            count += 1;
        } else if q == 0.0 {
            q = 1e-300;
        }
    }
    count
}

fn lowest_eigenvalues(diag: &[f64], off: f64, k: usize) -> Result<Vec<f64>> {
    let lo0 = diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 * off.abs();
    let hi0 = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 * off.abs();
    let scale = hi0.abs().max(lo0.abs()).max(1.0);
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let (mut lo, mut hi) = (lo0, hi0);
        // Bisect until the bracket is tight in absolute terms; the Rayleigh
        // polish in inverse iteration does the last digits.
        for _ in 0..120 {
            let mid = 0.5 * (lo + hi);
            if hi - lo < 1e-13 * scale || mid <= lo || mid >= hi {
                break;
            }
            if sturm_count_below(diag, off, mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let ev = 0.5 * (lo + hi);
        if j > 0 && ev <= out[j - 1] {
            return Err(SpectralError::Resolution(format!(
                "mesh cannot separate eigenvalues {j} and {}",
                j - 1
            )));
        }
        out.push(ev);
    }
    Ok(out)
}

/// Solve (T - mu I) x = b for symmetric tridiagonal T with partial pivoting.
/// Row swaps create a second superdiagonal; three bands are carried.
fn shifted_tridiag_solve(diag: &[f64], off: f64, mu: f64, b: &mut [f64]) {
    let n = diag.len();
    let mut d: Vec<f64> = diag.iter().map(|&x| x - mu).collect();
    let mut e1 = vec![0.0; n]; // A[i][i+1]
    let mut e2 = vec![0.0; n]; // A[i][i+2] fill-in
    for v in e1.iter_mut().take(n - 1) {
        *v = off;
    }
    for i in 0..n - 1 {
        let mut sub = off; // A[i+1][i] before elimination of column i
        if sub.abs() > d[i].abs() {
            // Swap rows i and i+1 (columns i, i+1, i+2).
            let row_i = (d[i], e1[i], e2[i]);
            let row_j = (sub, d[i + 1], e1[i + 1]);
            d[i] = row_j.0;
            e1[i] = row_j.1;
            e2[i] = row_j.2;
            sub = row_i.0;
            d[i + 1] = row_i.1;
            e1[i + 1] = row_i.2;
            b.swap(i, i + 1);
        }
        let pivot = if d[i] != 0.0 { d[i] } else { 1e-300 };
        let factor = sub / pivot;
        d[i + 1] -= factor * e1[i];
        e1[i + 1] -= factor * e2[i];
        b[i + 1] -= factor * b[i];
    }
    for i in (0..n).rev() {
        let mut rhs = b[i];
        if i + 1 < n {
            rhs -= e1[i] * b[i + 1];
        }
        if i + 2 < n {
            rhs -= e2[i] * b[i + 2];
        }
        b[i] = rhs / if d[i] != 0.0 { d[i] } else { 1e-300 };
    }
}

/// Inverse iteration with a Rayleigh-quotient polish. Returns the normalised
/// eigenvector and the polished eigenvalue. `orth` holds already-computed
/// near-degenerate neighbours to project out.
fn inverse_iteration(diag: &[f64], off: f64, ev: f64, orth: &[Vec<f64>]) -> Option<(Vec<f64>, f64)> {
    let n = diag.len();
    let scale = diag.iter().fold(0.0f64, |a, &b| a.max(b.abs())) + 2.0 * off.abs();
    // Deterministic pseudo-random start to avoid accidental orthogonality.
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let x = (i as u64).wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect();
    let mu = ev + 1e-12 * scale.max(1.0) * 1e-2;
    let mut lam = ev;
    let mut converged = false;
    for _ in 0..12 {
        shifted_tridiag_solve(diag, off, mu, &mut v);
        for o in orth {
            let ip: f64 = v.iter().zip(o).map(|(a, b)| a * b).sum();
            for (vi, oi) in v.iter_mut().zip(o) {
                *vi -= ip * oi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        let (rayleigh, res) = rayleigh_and_residual(diag, off, &v);
        lam = rayleigh;
        if res < 1e-14 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        // One more residual check with a looser bound before giving up.
        let (rayleigh, res) = rayleigh_and_residual(diag, off, &v);
        lam = rayleigh;
        if res > 1e-10 * scale {
            return None;
        }
    }
    Some((v, lam))
}

fn rayleigh_and_residual(diag: &[f64], off: f64, v: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut num = KahanSum::new();
    for i in 0..n {
        let mut av = diag[i] * v[i];
        if i > 0 {
            av += off * v[i - 1];
        }
        if i + 1 < n {
            av += off * v[i + 1];
        }
        num.add(v[i] * av);
    }
    let lam = num.value();
    let mut res2 = 0.0;
    for i in 0..n {
        let mut av = (diag[i] - lam) * v[i];
        if i > 0 {
            av += off * v[i - 1];
        }
        if i + 1 < n {
            av += off * v[i + 1];
        }
        res2 += av * av;
    }
    (lam, res2.sqrt())
}

#[cfg(test)]
mod tests;
