//! Brute-force enumeration of ordered path tuples by depth-first search.
//! Shares only the domain types with the transfer code; the aggregation is
//! written independently so it can serve as an oracle.

use super::{EnsembleSpec, Result, WalkError};
use crate::numeric::log_sum_exp;
use std::collections::BTreeMap;

struct Ctx<'a> {
    spec: &'a EnsembleSpec,
    combos: Vec<(Vec<i64>, f64)>,
    mark_idx: Option<usize>,
    max_nodes: usize,
}

#[derive(Default)]
struct Acc {
    nodes: usize,
    all: Vec<f64>,
    by_tuple: BTreeMap<Vec<i64>, Vec<f64>>,
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a EnsembleSpec, mark_idx: Option<usize>, max_nodes: Option<usize>) -> Self {
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
        Self { spec, combos, mark_idx, max_nodes: max_nodes.unwrap_or(10_000_000) }
    }

    fn search(&self) -> Result<Acc> {
        let mut acc = Acc::default();
        let mut tuple = self.spec.left().to_vec();
        let mut marked = tuple.clone();
        let mut init = 0.0;
        for &x in self.spec.left() {
            init -= self.spec.tilt().value(x as f64);
        }
        self.dfs(&mut acc, &mut tuple, &mut marked, 0, init)?;
        Ok(acc)
    }

    fn dfs(
        &self,
        acc: &mut Acc,
        tuple: &mut Vec<i64>,
        marked: &mut Vec<i64>,
        idx: usize,
        log_w: f64,
    ) -> Result<()> {
        acc.nodes += 1;
        if acc.nodes > self.max_nodes {
            return Err(WalkError::Size(format!(
                "enumeration exceeded {} node expansions",
                self.max_nodes
            )));
        }
        if self.mark_idx == Some(idx) {
            marked.clone_from(tuple);
        }
        if idx == self.spec.times() - 1 {
            if tuple == self.spec.right() {
                acc.all.push(log_w);
                if self.mark_idx.is_some() {
                    acc.by_tuple.entry(marked.clone()).or_default().push(log_w);
                }
            }
            return Ok(());
        }
        let n = tuple.len();
        for (combo, lp) in &self.combos {
            let mut ok = true;
            let mut tilt = 0.0;
            let mut prev_component = i64::MAX;
            for i in 0..n {
                let y = tuple[i] + combo[i];
                if y < 0 || y > self.spec.cutoff() || y > prev_component {
                    ok = false;
                    break;
                }
                prev_component = y;
                tilt -= self.spec.tilt().value(y as f64);
            }
            if ok {
                for i in 0..n {
                    tuple[i] += combo[i];
                }
                let res = self.dfs(acc, tuple, marked, idx + 1, log_w + lp + tilt);
                for i in 0..n {
                    tuple[i] -= combo[i];
                }
                res?;
            }
        }
        Ok(())
    }
}

/// log Z by exhaustive depth-first enumeration of every admissible ordered
/// tuple of trajectories. `max_nodes` bounds the search (default 10^7).
pub fn enumerate_log_partition(spec: &EnsembleSpec, max_nodes: Option<usize>) -> Result<f64> {
    let acc = Ctx::new(spec, None, max_nodes).search()?;
    Ok(log_sum_exp(&acc.all))
}

/// Exact joint law of the ordered tuple at lattice time `t`, by exhaustive
/// enumeration. Returns (support tuples, probabilities) with the support
/// sorted lexicographically.
pub fn enumerate_time_marginal(
    spec: &EnsembleSpec,
    t: i64,
    max_nodes: Option<usize>,
) -> Result<(Vec<Vec<i64>>, Vec<f64>)> {
    let idx = spec.time_index(t)?;
    let acc = Ctx::new(spec, Some(idx), max_nodes).search()?;
    let log_z = log_sum_exp(&acc.all);
    if log_z == f64::NEG_INFINITY {
        return Err(WalkError::NoAdmissiblePath);
    }
    let mut support = Vec::with_capacity(acc.by_tuple.len());
    let mut probs = Vec::with_capacity(acc.by_tuple.len());
    for (tuple, logs) in acc.by_tuple {
        support.push(tuple);
        probs.push((log_sum_exp(&logs) - log_z).exp());
    }
    Ok((support, probs))
}
