//! Exact log-space transfer computations: single-path partition functions,
//! time marginals, and the ordered n-tuple dynamic programme.

use super::{EnsembleSpec, Result, WalkError};
use crate::numeric::{log_sum_exp, KahanSum};

/// Default ceiling on (M+1)^n * (2N+1) for the ordered DP.
pub const DEFAULT_DP_BUDGET: usize = 50_000_000;

/// log Z for a single tilted walk, by iterating the truncated transfer
/// operator on {0..M}. The potential is charged at every time in [-N, N],
/// endpoints included. Returns -inf when no admissible path exists.
pub fn transfer_log_partition(spec: &EnsembleSpec) -> Result<f64> {
    if spec.paths() != 1 {
        return Err(WalkError::InvalidArgument(format!(
            "transfer_log_partition needs n = 1, got n = {}",
            spec.paths()
        )));
    }
    let fwd = forward_messages(spec, 0);
    let last = &fwd[fwd.len() - 1];
    Ok(last[spec.right()[0] as usize])
}

/// Z itself; may underflow to 0 for strongly tilted ensembles, which is why
/// the log form is the primary interface.
pub fn transfer_partition(spec: &EnsembleSpec) -> Result<f64> {
    Ok(transfer_log_partition(spec)?.exp())
}

/// Exact law of X(t) on {0..M} under the tilted measure, by the
/// forward-backward factorisation. Errors with `NoAdmissiblePath` when Z = 0.
pub fn marginal_height(spec: &EnsembleSpec, t: i64) -> Result<Vec<f64>> {
    if spec.paths() != 1 {
        return Err(WalkError::InvalidArgument(format!(
            "marginal_height needs n = 1, got n = {}",
            spec.paths()
        )));
    }
    let idx = spec.time_index(t)?;
    let fwd = forward_messages(spec, 0);
    let bwd = backward_messages(spec, 0);
    let m = spec.cutoff() as usize;
    let mut logs = vec![f64::NEG_INFINITY; m + 1];
    for x in 0..=m {
        logs[x] = fwd[idx][x] + bwd[idx][x];
    }
    let log_z = log_sum_exp(&logs);
    if log_z == f64::NEG_INFINITY {
        return Err(WalkError::NoAdmissiblePath);
    }
    Ok(logs.iter().map(|l| (l - log_z).exp()).collect())
}

/// Forward messages for path component `l`: F_t(x) = log sum of partial path
/// weights from the left boundary to (t, x), potential charged on [-N, t].
fn forward_messages(spec: &EnsembleSpec, l: usize) -> Vec<Vec<f64>> {
    let m = spec.cutoff() as usize;
    let log_tilt = spec.log_tilt_table();
    let kernel = spec.kernel();
    let times = spec.times();
    let mut out = Vec::with_capacity(times);
    let mut cur = vec![f64::NEG_INFINITY; m + 1];
    cur[spec.left()[l] as usize] = log_tilt[spec.left()[l] as usize];
    out.push(cur.clone());
    let mut terms: Vec<f64> = Vec::with_capacity(kernel.steps().len());
    for _ in 1..times {
        let mut next = vec![f64::NEG_INFINITY; m + 1];
        for (y, slot) in next.iter_mut().enumerate() {
            terms.clear();
            for &(z, _) in kernel.steps() {
                let x = y as i64 - z;
                if (0..=m as i64).contains(&x) {
                    let v = cur[x as usize];
                    if v > f64::NEG_INFINITY {
                        terms.push(v + kernel.log_prob(z));
                    }
                }
            }
            if !terms.is_empty() {
                *slot = log_tilt[y] + log_sum_exp(&terms);
            }
        }
        out.push(next.clone());
        cur = next;
    }
    out
}

/// Backward messages: B_t(x) = log sum over completions from (t, x) to the
/// right boundary, potential charged on (t, N].
fn backward_messages(spec: &EnsembleSpec, l: usize) -> Vec<Vec<f64>> {
    let m = spec.cutoff() as usize;
    let log_tilt = spec.log_tilt_table();
    let kernel = spec.kernel();
    let times = spec.times();
    let mut out = vec![Vec::new(); times];
    let mut cur = vec![f64::NEG_INFINITY; m + 1];
    cur[spec.right()[l] as usize] = 0.0;
    out[times - 1] = cur.clone();
    let mut terms: Vec<f64> = Vec::with_capacity(kernel.steps().len());
    for idx in (0..times - 1).rev() {
        let mut prev = vec![f64::NEG_INFINITY; m + 1];
        for (x, slot) in prev.iter_mut().enumerate() {
            terms.clear();
            for &(z, _) in kernel.steps() {
                let y = x as i64 + z;
                if (0..=m as i64).contains(&y) {
                    let v = cur[y as usize];
                    if v > f64::NEG_INFINITY {
                        terms.push(v + kernel.log_prob(z) + log_tilt[y as usize]);
                    }
                }
            }
            if !terms.is_empty() {
                *slot = log_sum_exp(&terms);
            }
        }
        out[idx] = prev.clone();
        cur = prev;
    }
    out
}

/// Enumeration of weakly ordered non-negative n-tuples in {0..M}^n, with a
/// dense tuple -> state-id lookup.
struct OrderedStates {
    n: usize,
    base: usize,
    tuples: Vec<Vec<i64>>,
    lookup: Vec<u32>,
}

const NO_STATE: u32 = u32::MAX;

impl OrderedStates {
    fn build(n: usize, m: i64) -> Self {
        let base = m as usize + 1;
        let mut tuples = Vec::new();
        let mut cur = vec![0i64; n];
        fn rec(tuples: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>, depth: usize, lo: i64, hi: i64) {
            if depth == cur.len() {
                tuples.push(cur.clone());
                return;
            }
            // Component `depth` must not exceed the one above it.
            for v in lo..=hi {
                cur[depth] = v;
                rec(tuples, cur, depth + 1, lo, v);
            }
        }
        rec(&mut tuples, &mut cur, 0, 0, m);
        let mut lookup = vec![NO_STATE; base.pow(n as u32)];
        for (id, t) in tuples.iter().enumerate() {
            lookup[Self::key(t, base)] = id as u32;
        }
        Self { n, base, tuples, lookup }
    }

    fn key(tuple: &[i64], base: usize) -> usize {
        tuple.iter().fold(0usize, |acc, &x| acc * base + x as usize)
    }

    fn id(&self, tuple: &[i64]) -> Option<usize> {
        let mut prev = i64::MAX;
        for &x in tuple {
            if x < 0 || x as usize >= self.base || x > prev {
                return None;
            }
            prev = x;
        }
        let id = self.lookup[Self::key(tuple, self.base)];
        (id != NO_STATE).then_some(id as usize)
    }

    fn len(&self) -> usize {
        self.tuples.len()
    }
}

fn check_dp_budget(spec: &EnsembleSpec, budget: usize) -> Result<OrderedStates> {
    let n = spec.paths();
    if n > 3 {
        return Err(WalkError::Size(format!("ordered DP supports n <= 3, got {n}")));
    }
    let base = spec.cutoff() as usize + 1;
    let cost = base
        .checked_pow(n as u32)
        .and_then(|s| s.checked_mul(spec.times()))
        .ok_or_else(|| WalkError::Size("DP state space overflows".into()))?;
    if cost > budget {
        return Err(WalkError::Size(format!(
            "(M+1)^n (2N+1) = {cost} exceeds the DP budget {budget}"
        )));
    }
    Ok(OrderedStates::build(n, spec.cutoff()))
}

/// log Z over all ordered n-tuples consistent with the spec, by dynamic
/// programming over weakly ordered height tuples. n <= 3; the state-time
/// product (M+1)^n (2N+1) must stay within `budget`
/// ([`DEFAULT_DP_BUDGET`] when `None`).
pub fn ordered_log_partition(spec: &EnsembleSpec, budget: Option<usize>) -> Result<f64> {
    let states = check_dp_budget(spec, budget.unwrap_or(DEFAULT_DP_BUDGET))?;
    let fwd = ordered_forward(spec, &states);
    let target = states.id(spec.right()).expect("right boundary is an ordered state");
    Ok(fwd[spec.times() - 1][target])
}

pub fn ordered_partition(spec: &EnsembleSpec, budget: Option<usize>) -> Result<f64> {
    Ok(ordered_log_partition(spec, budget)?.exp())
}

/// Joint law of the ordered tuple at time t under the tilted measure.
#[derive(Clone, Debug)]
pub struct OrderedMarginal {
    /// Weakly ordered tuples (top path first) carrying positive probability
    /// support enumeration order.
    pub support: Vec<Vec<i64>>,
    pub probabilities: Vec<f64>,
}

impl OrderedMarginal {
    /// Marginal law of one path component on {0..M}.
    pub fn component(&self, path: usize, m: i64) -> Vec<f64> {
        let mut out = vec![0.0; m as usize + 1];
        for (tuple, p) in self.support.iter().zip(&self.probabilities) {
            out[tuple[path] as usize] += p;
        }
        out
    }
}

/// Exact joint marginal of the n ordered paths at time t (DP forward-backward
/// over ordered tuples).
pub fn ordered_joint_marginal(
    spec: &EnsembleSpec,
    t: i64,
    budget: Option<usize>,
) -> Result<OrderedMarginal> {
    let idx = spec.time_index(t)?;
    let states = check_dp_budget(spec, budget.unwrap_or(DEFAULT_DP_BUDGET))?;
    let fwd = ordered_forward(spec, &states);
    let bwd = ordered_backward(spec, &states);
    let mut logs = vec![f64::NEG_INFINITY; states.len()];
    for s in 0..states.len() {
        logs[s] = fwd[idx][s] + bwd[idx][s];
    }
    let log_z = log_sum_exp(&logs);
    if log_z == f64::NEG_INFINITY {
        return Err(WalkError::NoAdmissiblePath);
    }
    let mut support = Vec::new();
    let mut probabilities = Vec::new();
    for (s, &l) in logs.iter().enumerate() {
        if l > f64::NEG_INFINITY {
            support.push(states.tuples[s].clone());
            probabilities.push((l - log_z).exp());
        }
    }
    Ok(OrderedMarginal { support, probabilities })
}

/// All step combinations (z_1..z_n) with their summed log-probabilities.
fn step_combos(spec: &EnsembleSpec) -> Vec<(Vec<i64>, f64)> {
    let steps = spec.kernel().steps();
    let mut combos: Vec<(Vec<i64>, f64)> = vec![(Vec::new(), 0.0)];
    for _ in 0..spec.paths() {
        let mut next = Vec::with_capacity(combos.len() * steps.len());
        for (prefix, lp) in &combos {
            for &(z, p) in steps {
                let mut v = prefix.clone();
                v.push(z);
                next.push((v, lp + p.ln()));
            }
        }
        combos = next;
    }
    combos
}

fn tuple_log_tilt(tuple: &[i64], log_tilt: &[f64]) -> f64 {
    tuple.iter().map(|&x| log_tilt[x as usize]).sum()
}

fn ordered_forward(spec: &EnsembleSpec, states: &OrderedStates) -> Vec<Vec<f64>> {
    let combos = step_combos(spec);
    let log_tilt = spec.log_tilt_table();
    let times = spec.times();
    let mut out = Vec::with_capacity(times);
    let mut cur = vec![f64::NEG_INFINITY; states.len()];
    let start = states.id(spec.left()).expect("left boundary is an ordered state");
    cur[start] = tuple_log_tilt(spec.left(), &log_tilt);
    out.push(cur.clone());
    let mut source = vec![0i64; states.n];
    let mut terms: Vec<f64> = Vec::with_capacity(combos.len());
    for _ in 1..times {
        let mut next = vec![f64::NEG_INFINITY; states.len()];
        for (sid, slot) in next.iter_mut().enumerate() {
            let target = &states.tuples[sid];
            terms.clear();
            for (combo, lp) in &combos {
                for i in 0..states.n {
                    source[i] = target[i] - combo[i];
                }
                if let Some(pid) = states.id(&source) {
                    let v = cur[pid];
                    if v > f64::NEG_INFINITY {
                        terms.push(v + lp);
                    }
                }
            }
            if !terms.is_empty() {
                *slot = tuple_log_tilt(target, &log_tilt) + log_sum_exp(&terms);
            }
        }
        out.push(next.clone());
        cur = next;
    }
    out
}

fn ordered_backward(spec: &EnsembleSpec, states: &OrderedStates) -> Vec<Vec<f64>> {
    let combos = step_combos(spec);
    let log_tilt = spec.log_tilt_table();
    let times = spec.times();
    let mut out = vec![Vec::new(); times];
    let mut cur = vec![f64::NEG_INFINITY; states.len()];
    let end = states.id(spec.right()).expect("right boundary is an ordered state");
    cur[end] = 0.0;
    out[times - 1] = cur.clone();
    let mut target = vec![0i64; states.n];
    let mut terms: Vec<f64> = Vec::with_capacity(combos.len());
    for idx in (0..times - 1).rev() {
        let mut prev = vec![f64::NEG_INFINITY; states.len()];
        for (sid, slot) in prev.iter_mut().enumerate() {
            let src = &states.tuples[sid];
            terms.clear();
            for (combo, lp) in &combos {
                for i in 0..states.n {
                    target[i] = src[i] + combo[i];
                }
                if let Some(tid) = states.id(&target) {
                    let v = cur[tid];
                    if v > f64::NEG_INFINITY {
                        terms.push(v + lp + tuple_log_tilt(&target, &log_tilt));
                    }
                }
            }
            if !terms.is_empty() {
                *slot = log_sum_exp(&terms);
            }
        }
        out[idx] = prev.clone();
        cur = prev;
    }
    out
}

/// Expected total height sum under the single-path tilted measure,
/// sum_t E[X(t)]: the "generalized area" observable used in monotonicity
/// checks.
pub fn expected_height_sum(spec: &EnsembleSpec) -> Result<f64> {
    let n = spec.half_window() as i64;
    let mut acc = KahanSum::new();
    for t in -n..=n {
        let marg = marginal_height(spec, t)?;
        for (x, p) in marg.iter().enumerate() {
            acc.add(x as f64 * p);
        }
    }
    Ok(acc.value())
}
