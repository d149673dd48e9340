//! Exact marginals and exact sampling on factor forests and on unicyclic subgraphs.
//!
//! Pinned variables are folded into the factors that touch them, so a cycle running through
//! a pinned variable is cut. What remains must be a forest; it is solved by leaf-to-root
//! message passing with per-node normalization and sampled top-down.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::census::ShortCycle;
use crate::decide::{Decider, RngDecider, Site};
use crate::error::{Error, Result};
use crate::exact::{ExactDistribution, Outcome};
use crate::graph::{increment, FactorGraph};

/// A set of factors of a graph together with the variables they live on.
#[derive(Debug, Clone)]
pub struct FactorTree<'a> {
    pub graph: &'a FactorGraph,
    pub factors: Vec<usize>,
    pub vars: Vec<usize>,
}

impl<'a> FactorTree<'a> {
    /// Uses the given factors and every variable they touch plus `extra_vars`.
    pub fn new(graph: &'a FactorGraph, factors: Vec<usize>, extra_vars: &[usize]) -> Self {
        let mut vars: Vec<usize> = factors
            .iter()
            .flat_map(|&a| graph.factor(a).vars.iter().copied())
            .chain(extra_vars.iter().copied())
            .collect();
        vars.sort_unstable();
        vars.dedup();
        Self { graph, factors, vars }
    }

    /// The whole graph, which must be a forest.
    pub fn whole(graph: &'a FactorGraph) -> Self {
        Self { graph, factors: (0..graph.m()).collect(), vars: (0..graph.n()).collect() }
    }

    fn solve(&self, pins: &[(usize, usize)]) -> Result<Solved> {
        Solved::build(self.graph, &self.factors, &self.vars, pins)
    }

    /// Exact law of `node` given the pinned values.
    pub fn marginal(&self, node: usize, cond: &[(usize, usize)]) -> Result<ExactDistribution> {
        let s = self.solve(cond)?;
        let li = *s.local.get(&node).ok_or(Error::InvalidInput(format!("variable {node} not in tree")))?;
        let probs = s.node_marginal(li);
        let masses: BTreeMap<Outcome, f64> =
            probs.into_iter().enumerate().map(|(c, p)| (Outcome::Config(vec![c]), p)).collect();
        ExactDistribution::from_masses(vec![node], masses)
    }

    /// Natural log of the total weight of configurations agreeing with `pins`.
    pub fn log_mass(&self, pins: &[(usize, usize)]) -> Result<f64> {
        Ok(self.solve(pins)?.log_mass())
    }

    /// Exact draw of every unpinned variable, returned as `(variable, spin)` in variable order.
    pub fn sample(&self, pins: &[(usize, usize)], dec: &mut dyn Decider) -> Result<Vec<(usize, usize)>> {
        self.solve(pins)?.sample(dec)
    }

    /// Per-node marginals as `var,spin,prob` CSV.
    pub fn marginals_csv(&self, pins: &[(usize, usize)]) -> Result<String> {
        let s = self.solve(pins)?;
        let mut out = String::from("var,spin,prob\n");
        for (li, &v) in s.vars.iter().enumerate() {
            for (c, p) in s.node_marginal(li).iter().enumerate() {
                writeln!(out, "{v},{c},{p}").unwrap();
            }
        }
        Ok(out)
    }
}

/// Exact law of `node` on a factor forest.
pub fn tree_marginal(t: &FactorTree<'_>, node: usize, cond: &[(usize, usize)]) -> Result<ExactDistribution> {
    t.marginal(node, cond)
}

/// Exact draw of the free variables of a factor forest given the pinned values.
pub fn sample_tree<R: rand::Rng + ?Sized>(
    t: &FactorTree<'_>,
    cond: &[(usize, usize)],
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    t.sample(cond, &mut RngDecider::new(rng))
}

struct Reduced {
    vars: Vec<usize>, // local indices of free variables
    table: Vec<f64>,  // over [q]^vars.len(), row-major
}

struct Solved {
    q: usize,
    vars: Vec<usize>,
    local: HashMap<usize, usize>,
    pinned: Vec<Option<usize>>,
    unary: Vec<Vec<f64>>,
    factors: Vec<Reduced>,
    adj: Vec<Vec<usize>>,
    log_const: f64,
}

impl Solved {
    fn build(g: &FactorGraph, factors: &[usize], vars: &[usize], pins: &[(usize, usize)]) -> Result<Self> {
        let q = g.q();
        let local: HashMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut pinned = vec![None; vars.len()];
        for &(v, s) in pins {
            let li = *local.get(&v).ok_or(Error::InvalidInput(format!("pinned variable {v} not in tree")))?;
            if s >= q {
                return Err(Error::InvalidInput(format!("spin {s} outside alphabet")));
            }
            if matches!(pinned[li], Some(t) if t != s) {
                return Err(Error::InvalidInput(format!("variable {v} pinned twice")));
            }
            pinned[li] = Some(s);
        }
        let mut unary = vec![vec![1.0; q]; vars.len()];
        let mut reduced = Vec::new();
        let mut log_const = 0.0;
        let mut full = vec![0usize; g.k()];
        for &a in factors {
            let f = g.factor(a);
            let locs: Vec<usize> = f
                .vars
                .iter()
                .map(|v| local.get(v).copied().ok_or(Error::InvalidInput(format!("variable {v} not in tree"))))
                .collect::<Result<_>>()?;
            let free_pos: Vec<usize> = (0..locs.len()).filter(|&p| pinned[locs[p]].is_none()).collect();
            for (p, &l) in locs.iter().enumerate() {
                if let Some(s) = pinned[l] {
                    full[p] = s;
                }
            }
            let mut table = Vec::with_capacity(q.pow(free_pos.len() as u32));
            let mut odo = vec![0usize; free_pos.len()];
            loop {
                for (&p, &s) in free_pos.iter().zip(&odo) {
                    full[p] = s;
                }
                table.push(f.table.get(&full));
                if !increment(&mut odo, q) {
                    break;
                }
            }
            match free_pos.len() {
                0 => {
                    if table[0] <= 0.0 {
                        return Err(Error::ZeroMeasureCondition);
                    }
                    log_const += table[0].ln();
                }
                1 => {
                    let u = &mut unary[locs[free_pos[0]]];
                    for (x, w) in u.iter_mut().zip(&table) {
                        *x *= w;
                    }
                }
                _ => reduced.push(Reduced { vars: free_pos.iter().map(|&p| locs[p]).collect(), table }),
            }
        }
        // forest check by union-find over free variables
        let mut parent: Vec<usize> = (0..vars.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut adj = vec![Vec::new(); vars.len()];
        for (fi, r) in reduced.iter().enumerate() {
            for w in r.vars.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a == b {
                    return Err(Error::InvalidInput("factor subgraph is not a forest after pinning".into()));
                }
                parent[a] = b;
            }
            for &v in &r.vars {
                adj[v].push(fi);
            }
        }
        Ok(Self { q, vars: vars.to_vec(), local, pinned, unary, factors: reduced, adj, log_const })
    }

    // Rooted traversal of the component of `root`: (var order, parent factor of each var).
    fn traverse(&self, root: usize, seen: &mut [bool]) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut order = vec![root];
        let mut parent_factor = vec![None];
        let mut fseen = vec![false; self.factors.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let v = order[i];
            for &f in &self.adj[v] {
                if fseen[f] {
                    continue;
                }
                fseen[f] = true;
                for &u in &self.factors[f].vars {
                    if u != v && !seen[u] {
                        seen[u] = true;
                        order.push(u);
                        parent_factor.push(Some(f));
                        queue.push_back(order.len() - 1);
                    }
                }
            }
        }
        (order, parent_factor)
    }

    // Upward pass: normalized subtree beliefs for each var and accumulated log scale.
    fn upward(&self, order: &[usize], parent_factor: &[Option<usize>], up: &mut [Vec<f64>]) -> f64 {
        let q = self.q;
        let mut log_scale = 0.0;
        let pos_of: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for i in (0..order.len()).rev() {
            let v = order[i];
            let mut b = self.unary[v].clone();
            for &f in &self.adj[v] {
                if parent_factor[i] == Some(f) {
                    continue;
                }
                // f is a child factor of v: every other variable of f is a child of v
                let r = &self.factors[f];
                let vpos = r.vars.iter().position(|&u| u == v).unwrap();
                let mut msg = vec![0.0; q];
                let mut odo = vec![0usize; r.vars.len()];
                for &w in &r.table {
                    if w > 0.0 {
                        let mut x = w;
                        for (p, &u) in r.vars.iter().enumerate() {
                            if p != vpos {
                                debug_assert!(pos_of[&u] > i);
                                x *= up[u][odo[p]];
                            }
                        }
                        msg[odo[vpos]] += x;
                    }
                    increment(&mut odo, q);
                }
                for (bc, mc) in b.iter_mut().zip(&msg) {
                    *bc *= mc;
                }
            }
            let s: f64 = b.iter().sum();
            if s > 0.0 {
                b.iter_mut().for_each(|x| *x /= s);
                log_scale += s.ln();
            } else {
                log_scale = f64::NEG_INFINITY;
            }
            up[v] = b;
        }
        log_scale
    }

    fn log_mass(&self) -> f64 {
        let mut seen = self.pinned.iter().map(Option::is_some).collect::<Vec<_>>();
        let mut up = vec![Vec::new(); self.vars.len()];
        let mut total = self.log_const;
        for root in 0..self.vars.len() {
            if seen[root] {
                continue;
            }
            let (order, pf) = self.traverse(root, &mut seen);
            total += self.upward(&order, &pf, &mut up);
        }
        total
    }

    fn node_marginal(&self, li: usize) -> Vec<f64> {
        if let Some(s) = self.pinned[li] {
            let mut p = vec![0.0; self.q];
            p[s] = 1.0;
            return p;
        }
        let mut seen = self.pinned.iter().map(Option::is_some).collect::<Vec<_>>();
        let mut up = vec![Vec::new(); self.vars.len()];
        let (order, pf) = self.traverse(li, &mut seen);
        self.upward(&order, &pf, &mut up);
        up[li].clone()
    }

    fn sample(&self, dec: &mut dyn Decider) -> Result<Vec<(usize, usize)>> {
        let q = self.q;
        let mut seen = self.pinned.iter().map(Option::is_some).collect::<Vec<_>>();
        let mut value: Vec<Option<usize>> = self.pinned.clone();
        let mut up = vec![Vec::new(); self.vars.len()];
        if self.log_const == f64::NEG_INFINITY {
            return Err(Error::ZeroMeasureCondition);
        }
        for root in 0..self.vars.len() {
            if seen[root] {
                continue;
            }
            let (order, pf) = self.traverse(root, &mut seen);
            if self.upward(&order, &pf, &mut up) == f64::NEG_INFINITY {
                return Err(Error::ZeroMeasureCondition);
            }
            let c = dec.choose(Site::Var(self.vars[root]), &up[root]).ok_or(Error::ZeroMeasureCondition)?;
            value[root] = Some(c);
            for (i, &v) in order.iter().enumerate() {
                let c = value[v].expect("parent sampled first");
                for &f in &self.adj[v] {
                    if pf[i] == Some(f) {
                        continue;
                    }
                    // draw the children of f one at a time by the chain rule
                    let r = &self.factors[f];
                    let mut fixed: Vec<Option<usize>> =
                        r.vars.iter().map(|&u| if u == v { Some(c) } else { None }).collect();
                    for p in 0..r.vars.len() {
                        if fixed[p].is_some() {
                            continue;
                        }
                        let mut w = vec![0.0; q];
                        let mut odo = vec![0usize; r.vars.len()];
                        for &t in &r.table {
                            if t > 0.0 && fixed.iter().zip(&odo).all(|(f, &o)| f.is_none_or(|x| x == o)) {
                                let mut x = t;
                                for (pp, &u) in r.vars.iter().enumerate() {
                                    if fixed[pp].is_none() {
                                        x *= up[u][odo[pp]];
                                    }
                                }
                                w[odo[p]] += x;
                            }
                            increment(&mut odo, q);
                        }
                        let u = r.vars[p];
                        let s = dec.choose(Site::Var(self.vars[u]), &w).ok_or(Error::ZeroMeasureCondition)?;
                        fixed[p] = Some(s);
                        value[u] = Some(s);
                    }
                }
            }
        }
        Ok(self
            .vars
            .iter()
            .enumerate()
            .filter(|(li, _)| self.pinned[*li].is_none())
            .map(|(li, &v)| (v, value[li].unwrap()))
            .collect())
    }
}

/// The subgraph induced by a short cycle: its factors, the variables they touch, and the
/// two cycle neighbours `M` of the factor that closes the cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct HSubgraph {
    pub cycle: ShortCycle,
    /// The closing factor.
    pub closing: usize,
    /// Cycle factors other than the closing one.
    pub path_factors: Vec<usize>,
    /// All cycle factors.
    pub factors: Vec<usize>,
    /// Every variable adjacent to a cycle factor, sorted.
    pub vars: Vec<usize>,
    /// Variables adjacent to cycle factors but not on the cycle.
    pub pendants: Vec<usize>,
    /// The closing factor's two cycle neighbours, in the closing factor's argument order.
    pub boundary: [usize; 2],
}

impl HSubgraph {
    pub fn new(g: &FactorGraph, cycle: &ShortCycle, closing: usize) -> Result<Self> {
        let i = cycle
            .factors
            .iter()
            .position(|&f| f == closing)
            .ok_or(Error::InvalidInput(format!("factor {closing} is not on the cycle")))?;
        let l = cycle.vars.len();
        let (a, b) = (cycle.vars[i], cycle.vars[(i + 1) % l]);
        let dvars = &g.factor(closing).vars;
        let (pa, pb) = (dvars.iter().position(|&v| v == a), dvars.iter().position(|&v| v == b));
        let boundary = match (pa, pb) {
            (Some(x), Some(y)) if x < y => [a, b],
            (Some(_), Some(_)) => [b, a],
            _ => return Err(Error::InvalidInput("cycle does not match the graph".into())),
        };
        let factors = cycle.factors.clone();
        let path_factors = factors.iter().copied().filter(|&f| f != closing).collect();
        let tree = FactorTree::new(g, factors.clone(), &[]);
        let pendants = tree.vars.iter().copied().filter(|v| !cycle.vars.contains(v)).collect();
        Ok(Self { cycle: cycle.clone(), closing, path_factors, factors, vars: tree.vars, pendants, boundary })
    }

    /// Variables of `H` outside the closing factor.
    pub fn xi(&self, g: &FactorGraph) -> Vec<usize> {
        let d = &g.factor(self.closing).vars;
        self.vars.iter().copied().filter(|v| !d.contains(v)).collect()
    }
}

/// Exact law of the first boundary node under the Gibbs measure of `H`.
pub fn pinned_node_marginal(g: &FactorGraph, h: &HSubgraph) -> Result<Vec<f64>> {
    let tree = FactorTree::new(g, h.factors.clone(), &[]);
    let x = h.boundary[0];
    let logs: Vec<f64> = (0..g.q())
        .map(|c| match tree.log_mass(&[(x, c)]) {
            Ok(l) => Ok(l),
            Err(Error::ZeroMeasureCondition) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::DegenerateH);
    }
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / s).collect())
}

/// Exact draw of the closing factor's arguments from the Gibbs marginal of `H`.
/// Returned in the closing factor's argument order.
pub fn sample_boundary_of_h(g: &FactorGraph, h: &HSubgraph, dec: &mut dyn Decider) -> Result<Vec<usize>> {
    let x = h.boundary[0];
    let probs = pinned_node_marginal(g, h)?;
    let c = dec.choose(Site::Var(x), &probs).ok_or(Error::DegenerateH)?;
    let tree = FactorTree::new(g, h.factors.clone(), &[]);
    let rest = tree.sample(&[(x, c)], dec).map_err(|e| match e {
        Error::ZeroMeasureCondition => Error::DegenerateH,
        e => e,
    })?;
    let value: HashMap<usize, usize> = rest.into_iter().chain(std::iter::once((x, c))).collect();
    Ok(g.factor(h.closing).vars.iter().map(|v| value[v]).collect())
}

/// Exact draw of `H`'s variables outside the closing factor, given that factor's arguments.
/// `boundary` is in the closing factor's argument order.
pub fn sample_xi_given_boundary(
    g: &FactorGraph,
    h: &HSubgraph,
    boundary: &[usize],
    dec: &mut dyn Decider,
) -> Result<Vec<(usize, usize)>> {
    let dvars = &g.factor(h.closing).vars;
    if boundary.len() != dvars.len() {
        return Err(Error::InvalidInput("boundary has the wrong length".into()));
    }
    let pins: Vec<(usize, usize)> = dvars.iter().copied().zip(boundary.iter().copied()).collect();
    FactorTree::new(g, h.path_factors.clone(), &h.vars).sample(&pins, dec)
}
