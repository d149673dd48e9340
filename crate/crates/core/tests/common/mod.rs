#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use gibbs_forge::exact::{for_each_config, Outcome};
use gibbs_forge::graph::{gibbs_weight, FactorGraph, WeightTable};
use rand::seq::SliceRandom;
use rand::Rng;

/// Pairwise Potts table; `None` is the hard-constraint colouring table.
pub fn pair_table(q: usize, beta: Option<f64>) -> Arc<WeightTable> {
    let mono = beta.map_or(0.0, f64::exp);
    Arc::new(WeightTable::from_fn(q, 2, |s| if s[0] == s[1] { mono } else { 1.0 }).unwrap())
}

pub fn pair_graph(n: usize, q: usize, beta: Option<f64>, edges: &[(usize, usize)]) -> FactorGraph {
    let t = pair_table(q, beta);
    let mut g = FactorGraph::new(n, q, 2).unwrap();
    for &(a, b) in edges {
        g.add_factor(vec![a, b], t.clone()).unwrap();
    }
    g
}

/// Random labelled tree on `n` vertices (random recursive tree under a random relabelling).
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    (1..n)
        .map(|i| {
            let p = rng.random_range(0..i);
            if rng.random() {
                (label[p], label[i])
            } else {
                (label[i], label[p])
            }
        })
        .collect()
}

/// A unicyclic fixture: a cycle of length `len` with trees hanging off it.
pub struct Unicyclic {
    pub edges: Vec<(usize, usize)>,
    /// Index in `edges` of the factor that closes the cycle.
    pub alpha: usize,
    pub cycle_len: usize,
}

pub fn random_unicyclic<R: Rng>(n: usize, len: usize, rng: &mut R) -> Unicyclic {
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (0..len).map(|i| (label[i], label[(i + 1) % len])).collect();
    for i in len..n {
        let p = rng.random_range(0..i);
        edges.push((label[p], label[i]));
    }
    let closing = rng.random_range(0..len);
    // move the closing factor to a random position
    let e = edges.remove(closing);
    let alpha = rng.random_range(0..=edges.len());
    edges.insert(alpha, e);
    Unicyclic { edges, alpha, cycle_len: len }
}

/// Exact conditional law of all spins as a list of (config, prob).
pub fn conditional_list(g: &FactorGraph, pins: &[(usize, usize)]) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut z = 0.0;
    for_each_config(g.n(), g.q(), pins, |s| {
        let w = gibbs_weight(g, s);
        if w > 0.0 {
            z += w;
            out.push((s.to_vec(), w));
        }
    })
    .unwrap();
    out.iter_mut().for_each(|(_, w)| *w /= z);
    out
}

/// Draw from a (config, prob) list.
pub fn draw<'a, R: Rng>(list: &'a [(Vec<usize>, f64)], rng: &mut R) -> &'a [usize] {
    let mut u: f64 = rng.random();
    for (c, p) in list {
        if u < *p {
            return c;
        }
        u -= p;
    }
    &list.last().unwrap().0
}

pub fn outcome(c: &[usize]) -> Outcome {
    Outcome::Config(c.to_vec())
}

/// Simple cycles of the variable/factor incidence graph with fewer than `threshold` nodes, by
/// depth-first search from each cycle's smallest node. Nodes `0..n` are variables and `n + a`
/// is factor `a`. Each cycle is returned as its node sequence starting at the smallest node,
/// oriented so the second node is smaller than the last.
pub fn brute_cycles(g: &FactorGraph, threshold: usize) -> Vec<Vec<usize>> {
    let n = g.n();
    let total = n + g.m();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (a, f) in g.factors().iter().enumerate() {
        for &v in &f.vars {
            adj[v].push(n + a);
            adj[n + a].push(v);
        }
    }
    let mut found = BTreeSet::new();
    for s in 0..total {
        let mut path = vec![s];
        let mut on = vec![false; total];
        on[s] = true;
        dfs(&adj, s, threshold, &mut path, &mut on, &mut found);
    }
    found.into_iter().collect()
}

fn dfs(
    adj: &[Vec<usize>],
    s: usize,
    threshold: usize,
    path: &mut Vec<usize>,
    on: &mut [bool],
    found: &mut BTreeSet<Vec<usize>>,
) {
    let u = *path.last().unwrap();
    for &w in &adj[u] {
        if w == s && path.len() >= 4 && path.len() < threshold {
            if path[1] < path[path.len() - 1] {
                found.insert(path.clone());
            }
        } else if w > s && !on[w] && path.len() + 1 < threshold {
            on[w] = true;
            path.push(w);
            dfs(adj, s, threshold, path, on, found);
            path.pop();
            on[w] = false;
        }
    }
}

/// Whether the given node sequences are pairwise node-disjoint.
pub fn pairwise_disjoint(cycles: &[Vec<usize>]) -> bool {
    let mut seen = BTreeSet::new();
    cycles.iter().flatten().all(|&v| seen.insert(v))
}
