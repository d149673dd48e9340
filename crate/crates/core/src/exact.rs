//! Brute-force enumeration: partition functions, exact conditionals, local edge measures
//! and total variation distance.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{gibbs_weight, increment, FactorGraph, WeightTable};

/// Largest enumerable state space, as a power of two.
pub const ENUM_CAP_LOG2: u32 = 24;

/// One atom of a distribution: a configuration on the distribution's variables, or failure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Outcome {
    Config(Vec<usize>),
    Fail,
}

/// Finite distribution over configurations of `vars` plus a reserved fail atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDistribution {
    vars: Vec<usize>,
    probs: BTreeMap<Outcome, f64>,
}

impl ExactDistribution {
    /// Normalizes nonnegative masses.
    pub fn from_masses(vars: Vec<usize>, masses: BTreeMap<Outcome, f64>) -> Result<Self> {
        let total: f64 = masses.values().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        let probs = masses
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(o, p)| (o, p / total))
            .collect();
        Ok(Self { vars, probs })
    }

    /// Takes probabilities as given; they must already sum to one.
    pub fn from_probs(vars: Vec<usize>, probs: BTreeMap<Outcome, f64>) -> Result<Self> {
        let total: f64 = probs.values().sum();
        if probs.values().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}")));
        }
        Ok(Self { vars, probs: probs.into_iter().filter(|(_, p)| *p > 0.0).collect() })
    }

    pub fn point(vars: Vec<usize>, outcome: Outcome) -> Self {
        Self { vars, probs: BTreeMap::from([(outcome, 1.0)]) }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn prob(&self, o: &Outcome) -> f64 {
        self.probs.get(o).copied().unwrap_or(0.0)
    }

    pub fn prob_of(&self, spins: &[usize]) -> f64 {
        self.prob(&Outcome::Config(spins.to_vec()))
    }

    pub fn fail_mass(&self) -> f64 {
        self.prob(&Outcome::Fail)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, f64)> {
        self.probs.iter().map(|(o, &p)| (o, p))
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Marginal on the positions `idx` of the configuration vectors; fail stays fail.
    pub fn project(&self, idx: &[usize]) -> ExactDistribution {
        let mut out: BTreeMap<Outcome, f64> = BTreeMap::new();
        for (o, p) in self.iter() {
            let key = match o {
                Outcome::Config(c) => Outcome::Config(idx.iter().map(|&i| c[i]).collect()),
                Outcome::Fail => Outcome::Fail,
            };
            *out.entry(key).or_default() += p;
        }
        ExactDistribution { vars: idx.iter().map(|&i| self.vars[i]).collect(), probs: out }
    }
}

/// Half the L1 distance; atoms missing from one side count as zero there.
pub fn total_variation(p: &ExactDistribution, r: &ExactDistribution) -> f64 {
    let mut acc = 0.0;
    for (o, pp) in p.iter() {
        acc += (pp - r.prob(o)).abs();
    }
    for (o, rp) in r.iter() {
        if !p.probs.contains_key(o) {
            acc += rp;
        }
    }
    0.5 * acc
}

fn check_cap(q: usize, free: usize) -> Result<()> {
    let bits = (q as f64).log2() * free as f64;
    if bits > ENUM_CAP_LOG2 as f64 + 1e-9 {
        return Err(Error::SizeExceeded { q, free, cap_log2: ENUM_CAP_LOG2 });
    }
    Ok(())
}

/// Calls `f` on every total configuration agreeing with `pins`.
pub fn for_each_config(
    n: usize,
    q: usize,
    pins: &[(usize, usize)],
    mut f: impl FnMut(&[usize]),
) -> Result<()> {
    let mut pinned = vec![None; n];
    for &(v, s) in pins {
        if v >= n || s >= q {
            return Err(Error::InvalidInput(format!("pin ({v}, {s}) out of range")));
        }
        if matches!(pinned[v], Some(t) if t != s) {
            return Err(Error::InvalidInput(format!("variable {v} pinned twice")));
        }
        pinned[v] = Some(s);
    }
    let free: Vec<usize> = (0..n).filter(|&v| pinned[v].is_none()).collect();
    check_cap(q, free.len())?;
    let mut sigma: Vec<usize> = pinned.iter().map(|p| p.unwrap_or(0)).collect();
    let mut odo = vec![0usize; free.len()];
    loop {
        for (&v, &s) in free.iter().zip(&odo) {
            sigma[v] = s;
        }
        f(&sigma);
        if !increment(&mut odo, q) {
            break;
        }
    }
    Ok(())
}

/// `Z(G)`: sum of Gibbs weights over all `q^n` configurations. A zero result is returned as is.
pub fn partition_function(g: &FactorGraph) -> Result<f64> {
    let mut z = 0.0;
    for_each_config(g.n(), g.q(), &[], |s| z += gibbs_weight(g, s))?;
    Ok(z)
}

/// Exact law of the spins on `target` under the Gibbs measure conditioned on `cond`.
pub fn exact_conditional(
    g: &FactorGraph,
    target: &[usize],
    cond: &[(usize, usize)],
) -> Result<ExactDistribution> {
    if let Some(&v) = target.iter().find(|&&v| v >= g.n()) {
        return Err(Error::InvalidInput(format!("target variable {v} out of range")));
    }
    let mut masses: BTreeMap<Outcome, f64> = BTreeMap::new();
    for_each_config(g.n(), g.q(), cond, |s| {
        let w = gibbs_weight(g, s);
        if w > 0.0 {
            let key = Outcome::Config(target.iter().map(|&v| s[v]).collect());
            *masses.entry(key).or_default() += w;
        }
    })?;
    ExactDistribution::from_masses(target.to_vec(), masses).map_err(|_| Error::ZeroMeasureCondition)
}

/// Full Gibbs distribution over all variables.
pub fn exact_gibbs(g: &FactorGraph) -> Result<ExactDistribution> {
    let all: Vec<usize> = (0..g.n()).collect();
    exact_conditional(g, &all, &[])
}

/// Local measure of a single factor: `psi / sum(psi)` over `[q]^k`, positions `0..k`.
pub fn edge_marginal(w: &WeightTable) -> Result<ExactDistribution> {
    edge_conditional(w, &[])
}

/// Local measure restricted to entries agreeing with `pins` (position, spin) and renormalized.
pub fn edge_conditional(w: &WeightTable, pins: &[(usize, usize)]) -> Result<ExactDistribution> {
    let mut masses = BTreeMap::new();
    let mut idx = vec![0usize; w.k()];
    for i in 0..w.values().len() {
        if pins.iter().all(|&(p, s)| idx[p] == s) && w.get_index(i) > 0.0 {
            masses.insert(Outcome::Config(idx.clone()), w.get_index(i));
        }
        increment(&mut idx, w.q());
    }
    if masses.is_empty() {
        return Err(if pins.is_empty() { Error::ZeroMass } else { Error::ZeroMeasureCondition });
    }
    ExactDistribution::from_masses((0..w.k()).collect(), masses)
}
