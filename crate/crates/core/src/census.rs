//! Short-cycle census of the bipartite incidence graph and membership in the family of
//! instances whose short cycles are pairwise node-disjoint.

use std::collections::HashMap;

use serde::Serialize;

use crate::graph::FactorGraph;

/// A simple cycle `v_0 f_0 v_1 f_1 .. v_{l-1} f_{l-1} (v_0)`, where `f_i` joins `v_i` and `v_{i+1}`.
/// `v_0` is the smallest variable on the cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ShortCycle {
    pub vars: Vec<usize>,
    pub factors: Vec<usize>,
}

impl ShortCycle {
    /// Number of nodes (variables plus factors).
    pub fn len(&self) -> usize {
        self.vars.len() + self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleCensus {
    /// Cycles with fewer than `threshold` nodes are short.
    pub threshold: usize,
    pub short_cycles: Vec<ShortCycle>,
    pub in_family_g: bool,
}

/// `floor(log_{dk}(n) / 10)`, or 0 when `dk <= 1`.
pub fn default_threshold(n: usize, d: f64, k: usize) -> usize {
    let base = d * k as f64;
    if base <= 1.0 || n <= 1 {
        return 0;
    }
    ((n as f64).ln() / base.ln() / 10.0).floor().max(0.0) as usize
}

/// Enumerates all simple cycles shorter than the threshold (override or default).
pub fn cycle_census(g: &FactorGraph, d: f64, k: usize, override_threshold: Option<usize>) -> CycleCensus {
    let threshold = override_threshold.unwrap_or_else(|| default_threshold(g.n(), d, k));
    let short_cycles = enumerate_cycles(g, threshold);
    let in_family_g = pairwise_disjoint(&short_cycles);
    CycleCensus { threshold, short_cycles, in_family_g }
}

/// Census with the degree taken from the graph itself.
pub fn census_of(g: &FactorGraph, override_threshold: Option<usize>) -> CycleCensus {
    cycle_census(g, g.mean_degree(), g.k(), override_threshold)
}

fn pairwise_disjoint(cycles: &[ShortCycle]) -> bool {
    let mut seen_v: HashMap<usize, usize> = HashMap::new();
    let mut seen_f: HashMap<usize, usize> = HashMap::new();
    for (i, c) in cycles.iter().enumerate() {
        for &v in &c.vars {
            if seen_v.insert(v, i).is_some() {
                return false;
            }
        }
        for &f in &c.factors {
            if seen_f.insert(f, i).is_some() {
                return false;
            }
        }
    }
    true
}

// Depth-first search from each start variable s, visiting only variables larger than s.
// Each cycle is met twice (once per direction); keep the one whose first factor is smaller.
fn enumerate_cycles(g: &FactorGraph, threshold: usize) -> Vec<ShortCycle> {
    let mut out = Vec::new();
    if threshold <= 4 {
        return out;
    }
    let adj = g.adjacency();
    let mut vars = Vec::new();
    let mut factors = Vec::new();
    let mut on_path = vec![false; g.n()];
    for s in 0..g.n() {
        vars.clear();
        factors.clear();
        vars.push(s);
        on_path[s] = true;
        dfs(g, &adj, threshold, &mut vars, &mut factors, &mut on_path, &mut out);
        on_path[s] = false;
    }
    out
}

fn dfs(
    g: &FactorGraph,
    adj: &[Vec<(usize, usize)>],
    threshold: usize,
    vars: &mut Vec<usize>,
    factors: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<ShortCycle>,
) {
    let s = vars[0];
    let u = *vars.last().unwrap();
    for &(f, _) in &adj[u] {
        if factors.contains(&f) {
            continue;
        }
        for &w in &g.factor(f).vars {
            if w == u {
                continue;
            }
            if w == s {
                // closing factor f; cycle has 2 * |vars| nodes
                if !factors.is_empty() && 2 * vars.len() < threshold && factors[0] < f {
                    let mut fs = factors.clone();
                    fs.push(f);
                    out.push(ShortCycle { vars: vars.clone(), factors: fs });
                }
            } else if w > s && !on_path[w] && 2 * (vars.len() + 1) < threshold {
                vars.push(w);
                factors.push(f);
                on_path[w] = true;
                dfs(g, adj, threshold, vars, factors, on_path, out);
                on_path[w] = false;
                vars.pop();
                factors.pop();
            }
        }
    }
}

/// Lookup tables from nodes to the census cycles through them.
#[derive(Debug, Clone, Default)]
pub struct CycleIndex {
    pub cycles: Vec<ShortCycle>,
    by_factor: HashMap<usize, Vec<usize>>,
    by_var: HashMap<usize, Vec<usize>>,
}

impl CycleIndex {
    pub fn new(cycles: &[ShortCycle]) -> Self {
        let mut idx = CycleIndex { cycles: cycles.to_vec(), ..Default::default() };
        for (i, c) in cycles.iter().enumerate() {
            for &f in &c.factors {
                idx.by_factor.entry(f).or_default().push(i);
            }
            for &v in &c.vars {
                idx.by_var.entry(v).or_default().push(i);
            }
        }
        idx
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Cycles containing factor `f`.
    pub fn through_factor(&self, f: usize) -> &[usize] {
        self.by_factor.get(&f).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Cycles containing variable `v` as a cycle node.
    pub fn through_var(&self, v: usize) -> &[usize] {
        self.by_var.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }
}
