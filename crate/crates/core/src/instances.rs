//! Random instance generators: the null model and the planted (teacher-student) model.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{FactorGraph, WeightTable};
use crate::models::{family_max, make_weight, potts_table, Family, ModelSpec};

/// A planted instance together with the configuration it was tilted towards.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedPair {
    pub graph: FactorGraph,
    pub ground_truth: Vec<usize>,
}

/// Number of factors for average degree `d`: `round(d n / k)`.
pub fn factor_count(n: usize, d: f64, k: usize) -> usize {
    (d * n as f64 / k as f64).round() as usize
}

/// Uniform ordered tuple of `k` distinct variables.
pub fn random_tuple<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut t = Vec::with_capacity(k);
    while t.len() < k {
        let v = rng.random_range(0..n);
        if !t.contains(&v) {
            t.push(v);
        }
    }
    t
}

// Deterministic families share one table; NAE tables are cached by sign pattern.
struct TableSource {
    shared: Option<Arc<WeightTable>>,
    nae: HashMap<Vec<bool>, Arc<WeightTable>>,
}

impl TableSource {
    fn new(spec: &ModelSpec) -> Result<Self> {
        let shared = match spec.family {
            Family::Potts | Family::Ising | Family::Colouring => {
                Some(Arc::new(potts_table(spec.q, spec.k, spec.beta.unwrap_or(0.0))?))
            }
            _ => None,
        };
        Ok(Self { shared, nae: HashMap::new() })
    }

    fn draw<R: Rng + ?Sized>(&mut self, spec: &ModelSpec, rng: &mut R) -> Result<Arc<WeightTable>> {
        if let Some(t) = &self.shared {
            return Ok(t.clone());
        }
        let w = make_weight(spec, rng)?;
        Ok(match w.signs {
            Some(signs) => self.nae.entry(signs).or_insert_with(|| Arc::new(w.table)).clone(),
            None => Arc::new(w.table),
        })
    }
}

fn check_sizes(n: usize, k: usize, spec: &ModelSpec) -> Result<()> {
    spec.validate()?;
    if n < k {
        return Err(Error::InvalidSize(format!("need n >= k, got n={n} k={k}")));
    }
    if spec.k != k {
        return Err(Error::InvalidSize(format!("spec arity {} differs from k={k}", spec.k)));
    }
    Ok(())
}

/// `m` factors on uniform distinct ordered tuples with iid weights from the family.
pub fn sample_null<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    k: usize,
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<FactorGraph> {
    check_sizes(n, k, spec)?;
    let mut g = FactorGraph::new(n, spec.q, k)?;
    let mut tables = TableSource::new(spec)?;
    for _ in 0..m {
        let vars = random_tuple(n, k, rng);
        let t = tables.draw(spec, rng)?;
        g.add_factor(vars, t)?;
    }
    Ok(g)
}

/// Planted instance: uniform ground truth, then each factor's tuple and weight drawn jointly with
/// density proportional to the weight at the ground truth. Sampled by rejection from the null law.
pub fn sample_planted<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    k: usize,
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<PlantedPair> {
    check_sizes(n, k, spec)?;
    let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..spec.q)).collect();
    let mut g = FactorGraph::new(n, spec.q, k)?;
    let mut tables = TableSource::new(spec)?;
    let cap = family_max(spec);
    let mut buf = Vec::with_capacity(k);
    for _ in 0..m {
        loop {
            let vars = random_tuple(n, k, rng);
            let t = tables.draw(spec, rng)?;
            buf.clear();
            buf.extend(vars.iter().map(|&v| truth[v]));
            let accept = t.get(&buf) / cap;
            if rng.random::<f64>() < accept {
                g.add_factor(vars, t)?;
                break;
            }
        }
    }
    Ok(PlantedPair { graph: g, ground_truth: truth })
}

/// Every spin frequency is within `c n^{-2/3}` of `1/q`.
pub fn is_balanced(sigma: &[usize], q: usize, c: f64) -> bool {
    if sigma.is_empty() {
        return true;
    }
    let n = sigma.len() as f64;
    let mut counts = vec![0usize; q];
    for &s in sigma {
        if s >= q {
            return false;
        }
        counts[s] += 1;
    }
    let tol = c * n.powf(-2.0 / 3.0);
    counts.iter().all(|&cnt| (cnt as f64 / n - 1.0 / q as f64).abs() <= tol)
}
