//! Sources of randomness for the processes.
//!
//! Every random choice made by a process goes through a [`Decider`]. Plugging in a random
//! number generator runs the process; a forcing decider reconstructs the probability of
//! one particular output; a scripted decider drives an exhaustive enumeration of all
//! branches, which yields exact output laws on small instances.

use rand::Rng;

/// Where a categorical draw happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    /// Drawing the spin of this variable.
    Var(usize),
    /// Any other draw, such as a removal order.
    Other,
}

/// One pending spin change `(variable, current spin, new spin)`.
pub type Flip = (usize, usize, usize);

pub trait Decider {
    /// Flip with probability `q`, keep otherwise. `flips` lists what a flip would write.
    /// `None` aborts the run.
    fn flip(&mut self, q: f64, flips: &[Flip]) -> Option<bool>;

    /// Draws an index with probability proportional to `weights`. `None` aborts the run.
    fn choose(&mut self, site: Site, weights: &[f64]) -> Option<usize>;

    /// Uniform draw from `0..n`.
    fn uniform(&mut self, site: Site, n: usize) -> Option<usize> {
        self.choose(site, &vec![1.0; n])
    }
}

/// Decides with a random number generator.
pub struct RngDecider<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> RngDecider<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        Self { rng }
    }
}

impl<R: Rng + ?Sized> Decider for RngDecider<'_, R> {
    fn flip(&mut self, q: f64, _flips: &[Flip]) -> Option<bool> {
        if q <= 0.0 {
            Some(false)
        } else if q >= 1.0 {
            Some(true)
        } else {
            Some(self.rng.random::<f64>() < q)
        }
    }

    fn choose(&mut self, _site: Site, weights: &[f64]) -> Option<usize> {
        if weights.len() == 1 {
            return Some(0);
        }
        let total: f64 = weights.iter().sum();
        let mut u = self.rng.random::<f64>() * total;
        let mut last = None;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                if u < w {
                    return Some(i);
                }
                u -= w;
                last = Some(i);
            }
        }
        last
    }

    fn uniform(&mut self, _site: Site, n: usize) -> Option<usize> {
        Some(self.rng.random_range(0..n))
    }
}

/// Follows the unique branch that leads to `target`, multiplying the branch probabilities.
pub struct ForcingDecider<'a> {
    target: &'a [usize],
    pub prob: f64,
    /// Set when a draw could not be matched against the target (e.g. a non-variable site).
    pub unsupported: bool,
}

impl<'a> ForcingDecider<'a> {
    pub fn new(target: &'a [usize]) -> Self {
        Self { target, prob: 1.0, unsupported: false }
    }
}

impl Decider for ForcingDecider<'_> {
    fn flip(&mut self, q: f64, flips: &[Flip]) -> Option<bool> {
        let keep = flips.iter().all(|&(v, old, _)| self.target[v] == old);
        let flip = flips.iter().all(|&(v, _, new)| self.target[v] == new);
        let (choice, p) = match (keep, flip) {
            (true, _) => (false, 1.0 - q.clamp(0.0, 1.0)),
            (false, true) => (true, q.clamp(0.0, 1.0)),
            _ => return None,
        };
        if p <= 0.0 {
            return None;
        }
        self.prob *= p;
        Some(choice)
    }

    fn choose(&mut self, site: Site, weights: &[f64]) -> Option<usize> {
        let Site::Var(v) = site else {
            self.unsupported = true;
            return None;
        };
        let i = self.target[v];
        let total: f64 = weights.iter().sum();
        let w = weights.get(i).copied().unwrap_or(0.0);
        if w <= 0.0 {
            return None;
        }
        self.prob *= w / total;
        Some(i)
    }
}

/// Replays a fixed prefix of choices, then takes the first positive-probability option,
/// recording every decision so the caller can advance to the next branch.
#[derive(Debug, Default)]
pub struct ScriptDecider {
    script: Vec<usize>,
    pos: usize,
    trace: Vec<(usize, Vec<f64>)>,
    pub prob: f64,
}

impl ScriptDecider {
    fn with_script(script: Vec<usize>) -> Self {
        Self { script, pos: 0, trace: Vec::new(), prob: 1.0 }
    }

    fn decide(&mut self, probs: Vec<f64>) -> usize {
        let choice = if self.pos < self.script.len() {
            self.script[self.pos]
        } else {
            probs.iter().position(|&p| p > 0.0).unwrap_or(0)
        };
        self.pos += 1;
        self.prob *= probs[choice];
        self.trace.push((choice, probs));
        choice
    }

    // Next branch in depth-first order, or None when all branches are done.
    fn next_script(&self) -> Option<Vec<usize>> {
        for p in (0..self.trace.len()).rev() {
            let (c, probs) = &self.trace[p];
            if let Some(j) = (c + 1..probs.len()).find(|&j| probs[j] > 0.0) {
                let mut s: Vec<usize> = self.trace[..p].iter().map(|(c, _)| *c).collect();
                s.push(j);
                return Some(s);
            }
        }
        None
    }
}

impl Decider for ScriptDecider {
    fn flip(&mut self, q: f64, _flips: &[Flip]) -> Option<bool> {
        let q = q.clamp(0.0, 1.0);
        Some(self.decide(vec![1.0 - q, q]) == 1)
    }

    fn choose(&mut self, _site: Site, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().sum();
        Some(self.decide(weights.iter().map(|w| w / total).collect()))
    }
}

/// Runs `f` once per branch of its decision tree and returns each result with its probability.
pub fn enumerate_branches<T>(mut f: impl FnMut(&mut dyn Decider) -> T) -> Vec<(T, f64)> {
    let mut out = Vec::new();
    let mut script = Some(Vec::new());
    while let Some(s) = script {
        let mut d = ScriptDecider::with_script(s);
        let result = f(&mut d);
        if d.prob > 0.0 {
            out.push((result, d.prob));
        }
        script = d.next_script();
    }
    out
}
