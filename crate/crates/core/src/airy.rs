//! Airy function Ai and its derivative, computed by integrating the defining
//! ODE y'' = x y rather than through a special-function library.
//!
//! The oracle seeds (Ai, Ai') at a large positive abscissa from the standard
//! asymptotic expansion and integrates the ODE backward with RK4 on a fine
//! grid; backward is the numerically stable direction because Ai is the
//! recessive solution for growing x. Values between nodes come from cubic
//! Hermite interpolation (the derivative is carried along).
//!
//! This module is the independent reference used to validate the
//! finite-difference Sturm-Liouville solver and to build the closed-form
//! Ferrari-Spohn ground-state density for the linear potential.

/// First zero of Ai lies at -AIRY_OMEGA1.
pub const AIRY_OMEGA1: f64 = 2.338_107_410_459_767;

/// Ai'(-omega_1); also the squared L2 norm of Ai on (-omega_1, inf) is this
/// value squared... precisely: integral of Ai(t)^2 over (-omega_1, inf)
/// equals Ai'(-omega_1)^2.
pub const AIRY_AI_PRIME_AT_FIRST_ZERO: f64 = 0.701_210_822_720_690_6;

/// Switch-over point above which the asymptotic expansion is used directly.
const X_ASYM: f64 = 14.0;
/// Backward RK4 step for the table.
const STEP: f64 = 1.0 / 4096.0;
const ASYM_TERMS: usize = 9;

/// Asymptotic expansion of (Ai, Ai') for large positive x.
fn ai_asymptotic(x: f64) -> (f64, f64) {
    debug_assert!(x >= X_ASYM - 1e-9);
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let pref = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    let mut u = 1.0f64;
    let mut sum_u = 1.0f64;
    let mut sum_v = 1.0f64;
    let mut sign = 1.0f64;
    let mut zk = 1.0f64;
    for k in 1..ASYM_TERMS {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = u * (6.0 * kf + 1.0) / (1.0 - 6.0 * kf);
        sign = -sign;
        zk *= zeta;
        sum_u += sign * u / zk;
        sum_v += sign * v / zk;
    }
    let ai = pref / x.powf(0.25) * sum_u;
    let aip = -pref * x.powf(0.25) * sum_v;
    (ai, aip)
}

/// One RK4 step of the system (y, p)' = (p, x*y); `h` may be negative.
#[inline]
fn rk4_step(x: f64, y: f64, p: f64, h: f64) -> (f64, f64) {
    let f = |x: f64, y: f64, p: f64| (p, x * y);
    let (k1y, k1p) = f(x, y, p);
    let (k2y, k2p) = f(x + 0.5 * h, y + 0.5 * h * k1y, p + 0.5 * h * k1p);
    let (k3y, k3p) = f(x + 0.5 * h, y + 0.5 * h * k2y, p + 0.5 * h * k2p);
    let (k4y, k4p) = f(x + h, y + h * k3y, p + h * k3p);
    (
        y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )
}

/// Tabulated (Ai, Ai') on [x_min, X_ASYM] plus the asymptotic branch above.
#[derive(Clone, Debug)]
pub struct AiryOracle {
    x_min: f64,
    ai: Vec<f64>,
    aip: Vec<f64>,
}

impl AiryOracle {
    /// Build the table down to `x_min` (must be <= 0; the interesting region
    /// for Ferrari-Spohn densities is x >= -omega_1).
    pub fn new(x_min: f64) -> Self {
        assert!(x_min < X_ASYM - 1.0);
        let n_steps = ((X_ASYM - x_min) / STEP).ceil() as usize;
        let x_min = X_ASYM - n_steps as f64 * STEP;
        let (mut y, mut p) = ai_asymptotic(X_ASYM);
        let mut ai_rev = Vec::with_capacity(n_steps + 1);
        let mut aip_rev = Vec::with_capacity(n_steps + 1);
        ai_rev.push(y);
        aip_rev.push(p);
        for i in 0..n_steps {
            let x = X_ASYM - i as f64 * STEP;
            let (ny, np) = rk4_step(x, y, p, -STEP);
            y = ny;
            p = np;
            ai_rev.push(y);
            aip_rev.push(p);
        }
        ai_rev.reverse();
        aip_rev.reverse();
        Self { x_min, ai: ai_rev, aip: aip_rev }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    /// Ai(x). Panics below `x_min`.
    pub fn ai(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// Ai'(x). Panics below `x_min`.
    pub fn ai_prime(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        assert!(x >= self.x_min - 1e-12, "Airy oracle queried below its table ({x})");
        if x >= X_ASYM {
            return ai_asymptotic(x);
        }
        let s = (x - self.x_min) / STEP;
        let i = (s.floor() as usize).min(self.ai.len() - 2);
        let t = s - i as f64;
        let x0 = self.x_min + i as f64 * STEP;
        let x1 = x0 + STEP;
        // Cubic Hermite with carried derivatives; second derivatives from the
        // ODE give the derivative interpolant one extra order.
        let (y0, y1) = (self.ai[i], self.ai[i + 1]);
        let (p0, p1) = (self.aip[i], self.aip[i + 1]);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let y = h00 * y0 + h10 * STEP * p0 + h01 * y1 + h11 * STEP * p1;
        let (q0, q1) = (x0 * y0, x1 * y1);
        let p = h00 * p0 + h10 * STEP * q0 + h01 * p1 + h11 * STEP * q1;
        (y, p)
    }

    /// First zero of Ai, located by bisection on the table.
    pub fn first_zero(&self) -> f64 {
        assert!(self.x_min <= -2.5);
        crate::numeric::bisect_root(|x| self.ai(x), -2.5, -2.0).expect("Ai changes sign in [-2.5, -2.0]")
    }
}

impl Default for AiryOracle {
    fn default() -> Self {
        Self::new(-3.0)
    }
}

/// Stationary density of the Ferrari-Spohn diffusion for a linear potential:
/// rho(r) = chi * Ai(chi*r - omega_1)^2 / Ai'(-omega_1)^2 on r > 0.
///
/// The CDF uses the exact antiderivative d/dt (t Ai^2 - Ai'^2) = Ai^2, so no
/// quadrature error enters reference comparisons.
#[derive(Clone, Debug)]
pub struct FsAiryDensity {
    chi: f64,
    oracle: AiryOracle,
    norm: f64,
}

impl FsAiryDensity {
    pub fn new(chi: f64) -> Self {
        assert!(chi > 0.0);
        let oracle = AiryOracle::default();
        let aip = oracle.ai_prime(oracle.first_zero());
        Self { chi, oracle, norm: aip * aip }
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn density(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        let a = self.oracle.ai(self.chi * r - AIRY_OMEGA1);
        self.chi * a * a / self.norm
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let t = self.chi * r - AIRY_OMEGA1;
        if t >= X_ASYM {
            return 1.0;
        }
        let (ai, aip) = self.oracle.eval(t);
        let g = t * ai * ai - aip * aip;
        ((g + self.norm) / self.norm).clamp(0.0, 1.0)
    }
}
