//! Single-site heat-bath Markov chain targeting the ordered tilted-walk
//! measure restricted to heights <= M.
//!
//! Each update picks a uniformly random interior site (path l, time t) and
//! resamples the height from its exact conditional law given the two
//! neighbours in time, the tilt weight e^{-V(x)}, and the ordering window
//! between the adjacent paths. Every single-site kernel is reversible for
//! the target, so the random-scan composite satisfies detailed balance.

use super::{EnsembleSpec, OrderedPaths, Result, WalkError};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

#[derive(Clone, Debug)]
pub struct McmcChain {
    spec: EnsembleSpec,
    heights: Vec<i64>,
    times: usize,
    paths: usize,
    tilt_weight: Vec<f64>,
    rng: SmallRng,
    sweeps_done: u64,
}

impl McmcChain {
    /// Build a chain at a greedily constructed feasible configuration.
    /// Errors when the greedy feasibility construction fails.
    pub fn new(spec: &EnsembleSpec, seed: u64) -> Result<Self> {
        let heights = greedy_feasible(spec)?;
        let tilt_weight = (0..=spec.cutoff()).map(|x| (-spec.tilt().value(x as f64)).exp()).collect();
        let chain = Self {
            spec: spec.clone(),
            heights,
            times: spec.times(),
            paths: spec.paths(),
            tilt_weight,
            rng: SmallRng::seed_from_u64(seed),
            sweeps_done: 0,
        };
        debug_assert!(chain.snapshot().validate(spec).is_ok());
        Ok(chain)
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// Interior sites per sweep: n * (2N - 1).
    pub fn sites_per_sweep(&self) -> usize {
        self.paths * (self.times - 2)
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    #[inline]
    pub fn height(&self, path: usize, time_index: usize) -> i64 {
        self.heights[path * self.times + time_index]
    }

    pub fn snapshot(&self) -> OrderedPaths {
        OrderedPaths::from_flat(self.paths, self.times, self.heights.clone())
    }

    /// One heat-bath update at a uniformly random interior site.
    #[inline]
    pub fn update_once(&mut self) {
        let sites = self.sites_per_sweep();
        let site = self.rng.gen_range(0..sites);
        let l = site / (self.times - 2);
        let ti = 1 + site % (self.times - 2);
        self.heat_bath(l, ti);
    }

    /// One sweep = n * (2N - 1) random single-site updates.
    pub fn sweep(&mut self) {
        for _ in 0..self.sites_per_sweep() {
            self.update_once();
        }
        self.sweeps_done += 1;
    }

    pub fn run(&mut self, sweeps: u64) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    #[inline]
    fn heat_bath(&mut self, l: usize, ti: usize) {
        let base = l * self.times;
        let prev = self.heights[base + ti - 1];
        let next = self.heights[base + ti + 1];
        let lower = if l + 1 < self.paths { self.heights[(l + 1) * self.times + ti] } else { 0 };
        let upper = if l > 0 { self.heights[(l - 1) * self.times + ti] } else { self.spec.cutoff() };

        // The conditional support is tiny (at most the kernel support size);
        // scan it twice: once for the normalisation, once to select.
        let kernel = self.spec.kernel();
        let mut total = 0.0f64;
        for &(z, p) in kernel.steps() {
            let x = prev + z;
            if x < lower || x > upper {
                continue;
            }
            let back = kernel.prob(next - x);
            if back > 0.0 {
                total += p * back * self.tilt_weight[x as usize];
            }
        }
        debug_assert!(total > 0.0, "current height is always admissible");
        let mut u = self.rng.gen::<f64>() * total;
        let mut chosen = self.heights[base + ti];
        for &(z, p) in kernel.steps() {
            let x = prev + z;
            if x < lower || x > upper {
                continue;
            }
            let back = kernel.prob(next - x);
            if back > 0.0 {
                let w = p * back * self.tilt_weight[x as usize];
                if u < w {
                    chosen = x;
                    break;
                }
                u -= w;
            }
        }
        self.heights[base + ti] = chosen;
    }
}

/// Iterator over thinned MCMC snapshots.
pub struct McmcSamples {
    chain: McmcChain,
    remaining: u64,
    thin: u64,
}

impl Iterator for McmcSamples {
    type Item = OrderedPaths;

    fn next(&mut self) -> Option<OrderedPaths> {
        if self.remaining == 0 {
            return None;
        }
        let burst = self.thin.min(self.remaining);
        self.chain.run(burst);
        self.remaining -= burst;
        Some(self.chain.snapshot())
    }
}

/// Run `sweeps` sweeps from the greedy feasible start, yielding a snapshot
/// every `thin` sweeps. Identical seeds produce identical streams.
pub fn sample_stream(spec: &EnsembleSpec, seed: u64, sweeps: u64, thin: u64) -> Result<McmcSamples> {
    if thin == 0 {
        return Err(WalkError::InvalidArgument("thin must be >= 1".into()));
    }
    Ok(McmcSamples { chain: McmcChain::new(spec, seed)?, remaining: sweeps, thin })
}

/// Greedy feasibility construction: per-path reachability sets forward and
/// backward, then paths built bottom-up, each the pointwise-lowest trajectory
/// that stays reachable and above the path below it.
fn greedy_feasible(spec: &EnsembleSpec) -> Result<Vec<i64>> {
    let m = spec.cutoff() as usize;
    let times = spec.times();
    let n = spec.paths();
    let offsets: Vec<i64> = spec.kernel().steps().iter().map(|&(z, _)| z).collect();

    let mut heights = vec![0i64; n * times];
    let mut lower = vec![0i64; times];
    for l in (0..n).rev() {
        // Reachable-from-left and co-reachable-to-right sets for this path.
        let mut fwd = vec![vec![false; m + 1]; times];
        fwd[0][spec.left()[l] as usize] = true;
        for t in 1..times {
            for x in 0..=m {
                if fwd[t - 1][x] {
                    for &z in &offsets {
                        let y = x as i64 + z;
                        if (0..=m as i64).contains(&y) {
                            fwd[t][y as usize] = true;
                        }
                    }
                }
            }
        }
        let mut bwd = vec![vec![false; m + 1]; times];
        bwd[times - 1][spec.right()[l] as usize] = true;
        for t in (0..times - 1).rev() {
            for x in 0..=m {
                if bwd[t + 1][x] {
                    for &z in &offsets {
                        let y = x as i64 - z;
                        if (0..=m as i64).contains(&y) {
                            bwd[t][y as usize] = true;
                        }
                    }
                }
            }
        }
        let feasible = |t: usize, x: i64| -> bool {
            (0..=m as i64).contains(&x) && fwd[t][x as usize] && bwd[t][x as usize]
        };
        if !feasible(0, spec.left()[l]) {
            return Err(WalkError::Infeasible(format!(
                "path {l} cannot connect its boundary heights within the cutoff"
            )));
        }
        let mut x = spec.left()[l];
        if x < lower[0] {
            return Err(WalkError::Infeasible(format!("left boundary of path {l} crosses the path below")));
        }
        heights[l * times] = x;
        for t in 1..times {
            let mut best: Option<i64> = None;
            for &z in &offsets {
                let y = x + z;
                if y >= lower[t] && feasible(t, y) && best.map_or(true, |b| y < b) {
                    best = Some(y);
                }
            }
            match best {
                Some(y) => {
                    x = y;
                    heights[l * times + t] = y;
                }
                None => {
                    return Err(WalkError::Infeasible(format!(
                        "greedy construction stuck for path {l} at time index {t}"
                    )));
                }
            }
        }
        for t in 0..times {
            lower[t] = heights[l * times + t];
        }
    }
    Ok(heights)
}
