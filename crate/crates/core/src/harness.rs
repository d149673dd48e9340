//! Experiment plumbing: replica farms, empirical total variation against the exact Gibbs
//! distribution, detailed-balance residual tables, timing runs and report serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::census::{census_of, CycleCensus};
use crate::error::{Error, Result};
use crate::exact::{for_each_config, Outcome, ExactDistribution, exact_gibbs, total_variation};
use crate::graph::{gibbs_weight, FactorGraph};
use crate::instances::{factor_count, sample_null, sample_planted};
use crate::models::{b1_slack, ModelSpec, SlackReport};
use crate::process::{exact_run_law, transition_probability, FailReason, ProcessKind, Status};
use crate::sampler::{FailPolicy, Sampler, SamplerKind};

/// Name of the random number generator recorded in every report.
pub const RNG_NAME: &str = "chacha8";

/// Exact TV is used up to this many configurations (as a power of two).
pub const EXACT_TV_LOG2: u32 = 18;

/// Package version, or `GIBBS_FORGE_BUILD_ID` when set at compile time.
pub fn build_id() -> String {
    option_env!("GIBBS_FORGE_BUILD_ID").unwrap_or(env!("CARGO_PKG_VERSION")).to_string()
}

/// Generator for replica `replica` of an experiment seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Gen,
    Sample,
    VerifyDb,
    Tv,
    Slack,
    Bench,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub model: ModelSpec,
    pub n: usize,
    pub d: f64,
    pub k: usize,
    pub replicas: usize,
    pub seed: u64,
    /// Census threshold override; `None` uses the default.
    pub threshold: Option<usize>,
    pub sampler: SamplerKind,
    /// Extra attempts after a failed run (0 keeps failures as outcomes).
    pub retry: usize,
    pub planted: bool,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, model: ModelSpec, n: usize, d: f64) -> Self {
        Self {
            mode,
            model,
            n,
            d,
            k: model.k,
            replicas: 1,
            seed: 0,
            threshold: None,
            sampler: SamplerKind::RSampler,
            retry: 0,
            planted: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replicas == 0 {
            return Err(Error::InvalidInput("replicas must be at least 1".into()));
        }
        if self.k != self.model.k {
            return Err(Error::InvalidSize(format!("k={} but the model has arity {}", self.k, self.model.k)));
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidInput(format!("bad degree d={}", self.d)));
        }
        Ok(())
    }

    /// Instance for this config: the null (or planted) model drawn from stream `u64::MAX`.
    pub fn instance(&self) -> Result<(FactorGraph, Option<Vec<usize>>)> {
        let mut rng = replica_rng(self.seed, u64::MAX);
        let m = factor_count(self.n, self.d, self.k);
        if self.planted {
            let p = sample_planted(self.n, m, self.k, &self.model, &mut rng)?;
            Ok((p.graph, Some(p.ground_truth)))
        } else {
            Ok((sample_null(self.n, m, self.k, &self.model, &mut rng)?, None))
        }
    }
}

/// A report wrapping any result with provenance of the run.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub build_id: String,
    pub rng: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(config: &ExperimentConfig, result: T) -> Self {
        Self { build_id: build_id(), rng: RNG_NAME, seed: config.seed, config: config.clone(), result }
    }
}

/// One sampler replica.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaRecord {
    pub replica: usize,
    pub status: Status,
    /// Run-length encoded output as `(spin, count)` pairs.
    pub config: Option<Vec<(usize, usize)>>,
    pub fail_reason: Option<FailReason>,
    pub steps: usize,
    pub attempts: usize,
    pub wall_ns: u64,
}

impl ReplicaRecord {
    pub fn outcome(&self) -> Outcome {
        match &self.config {
            Some(runs) => Outcome::Config(runs.iter().flat_map(|&(s, c)| std::iter::repeat_n(s, c)).collect()),
            None => Outcome::Fail,
        }
    }
}

/// Runs `replicas` independent sampler runs in parallel; results are in replica order.
pub fn run_replicas(
    g: &FactorGraph,
    kind: SamplerKind,
    census: &CycleCensus,
    replicas: usize,
    seed: u64,
    retry: usize,
) -> Result<Vec<ReplicaRecord>> {
    // fail early on a graph outside the family
    Sampler::with_census(g, kind, census.clone())?;
    (0..replicas)
        .into_par_iter()
        .map_init(
            || Sampler::with_census(g, kind, census.clone()).expect("checked above"),
            |s, r| {
                let mut rng = replica_rng(seed, r as u64);
                let start = Instant::now();
                let mut attempts = 0;
                loop {
                    attempts += 1;
                    let rec = s.run(&mut rng)?;
                    if rec.status == Status::Ok || attempts > retry {
                        return Ok(ReplicaRecord {
                            replica: r,
                            status: rec.status,
                            config: rec.run_length(),
                            fail_reason: rec.fail_reason,
                            steps: rec.steps,
                            attempts,
                            wall_ns: start.elapsed().as_nanos() as u64,
                        });
                    }
                }
            },
        )
        .collect()
}

/// Serializes records as JSON lines.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("serializable"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TvMethod {
    /// Against the full joint law.
    Exact,
    /// Maximum over all pairs of variables of the TV between pair marginals.
    PairwiseMax,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvReport {
    pub tv: f64,
    /// `sqrt(S / (2 pi N))` with `S` the oracle support size.
    pub noise_bound: f64,
    pub fail_mass: f64,
    pub replicas: usize,
    pub support: usize,
    pub method: TvMethod,
}

fn empirical<'a>(vars: Vec<usize>, samples: impl IntoIterator<Item = &'a Outcome>) -> Result<(ExactDistribution, usize)> {
    let mut counts: BTreeMap<Outcome, f64> = BTreeMap::new();
    let mut n = 0usize;
    for o in samples {
        *counts.entry(o.clone()).or_default() += 1.0;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptySampleSet);
    }
    Ok((ExactDistribution::from_masses(vars, counts)?, n))
}

fn noise_bound(support: usize, n: usize) -> f64 {
    (support as f64 / (2.0 * std::f64::consts::PI * n as f64)).sqrt()
}

/// Empirical TV between samples (fail atoms included) and an exact law without failures.
pub fn estimate_tv<'a>(samples: impl IntoIterator<Item = &'a Outcome>, oracle: &ExactDistribution) -> Result<TvReport> {
    let (emp, n) = empirical(oracle.vars().to_vec(), samples)?;
    Ok(TvReport {
        tv: total_variation(&emp, oracle),
        noise_bound: noise_bound(oracle.support_size(), n),
        fail_mass: emp.fail_mass(),
        replicas: n,
        support: oracle.support_size(),
        method: TvMethod::Exact,
    })
}

/// Exact pair marginals of the Gibbs distribution for every pair `i < j`, in one enumeration.
pub fn gibbs_pair_marginals(g: &FactorGraph) -> Result<Vec<((usize, usize), Vec<f64>)>> {
    let (n, q) = (g.n(), g.q());
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut acc = vec![vec![0.0; q * q]; pairs.len()];
    let mut z = 0.0;
    for_each_config(n, q, &[], |s| {
        let w = gibbs_weight(g, s);
        if w > 0.0 {
            z += w;
            for (t, &(i, j)) in pairs.iter().enumerate() {
                acc[t][s[i] * q + s[j]] += w;
            }
        }
    })?;
    if z <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(pairs.into_iter().zip(acc).map(|(p, a)| (p, a.into_iter().map(|x| x / z).collect())).collect())
}

/// Empirical TV against the Gibbs distribution of `g`: exact for `q^n <= 2^18`, otherwise the
/// maximum over pair marginals (a weaker proxy, computable up to `q^n <= 2^24`).
pub fn tv_against_gibbs(g: &FactorGraph, samples: &[Outcome]) -> Result<TvReport> {
    let bits = (g.q() as f64).log2() * g.n() as f64;
    if bits <= EXACT_TV_LOG2 as f64 + 1e-9 {
        return estimate_tv(samples, &exact_gibbs(g)?);
    }
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let q = g.q();
    let pairs = gibbs_pair_marginals(g)?;
    let n = samples.len() as f64;
    let fails = samples.iter().filter(|o| **o == Outcome::Fail).count() as f64;
    let mut worst: f64 = 0.0;
    for ((i, j), mu) in &pairs {
        let mut emp = vec![0.0; q * q];
        for o in samples {
            if let Outcome::Config(c) = o {
                emp[c[*i] * q + c[*j]] += 1.0 / n;
            }
        }
        let l1: f64 = emp.iter().zip(mu).map(|(a, b)| (a - b).abs()).sum::<f64>() + fails / n;
        worst = worst.max(0.5 * l1);
    }
    Ok(TvReport {
        tv: worst,
        noise_bound: noise_bound(q * q, samples.len()),
        fail_mass: fails / n,
        replicas: samples.len(),
        support: q * q,
        method: TvMethod::PairwiseMax,
    })
}

/// One `(theta, xi)` pair of a detailed-balance check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DbResidual {
    pub lambda: Vec<usize>,
    pub eta: Vec<usize>,
    pub kappa: Vec<usize>,
    pub theta: Vec<usize>,
    pub xi: Vec<usize>,
    /// `mu(theta) P_{eta,kappa}(theta, xi)` up to the common normalization.
    pub forward: f64,
    /// `mu(xi) P_{kappa,eta}(xi, theta)` up to the common normalization.
    pub backward: f64,
    pub residual: f64,
}

/// Both sides of the detailed-balance identity for every `theta` agreeing with `eta` on
/// `lambda` and every reachable `xi`. Residuals are relative.
pub fn detailed_balance(
    g: &FactorGraph,
    kind: ProcessKind,
    census: Option<&CycleCensus>,
    lambda: &[usize],
    eta: &[usize],
    kappa: &[usize],
) -> Result<Vec<DbResidual>> {
    let pins: Vec<(usize, usize)> = lambda.iter().copied().zip(eta.iter().copied()).collect();
    let mut thetas = Vec::new();
    for_each_config(g.n(), g.q(), &pins, |t| {
        if gibbs_weight(g, t) > 0.0 {
            thetas.push(t.to_vec());
        }
    })?;
    let mut out = Vec::new();
    for theta in thetas {
        let wt = gibbs_weight(g, &theta);
        let law = exact_run_law(g, kind, &theta, lambda, eta, kappa, census)?;
        for (o, p) in law.iter() {
            let Outcome::Config(xi) = o else { continue };
            let back = transition_probability(g, xi, &theta, lambda, kappa, eta, kind, census)?;
            let (forward, backward) = (wt * p, gibbs_weight(g, xi) * back);
            let residual = (forward - backward).abs() / forward.max(backward);
            out.push(DbResidual {
                lambda: lambda.to_vec(),
                eta: eta.to_vec(),
                kappa: kappa.to_vec(),
                theta: theta.clone(),
                xi: xi.clone(),
                forward,
                backward,
                residual,
            });
        }
    }
    Ok(out)
}

/// Detailed-balance residuals over every `Lambda` of size `1..=max_lambda`, every `eta` on it
/// that some positive configuration realizes, and every `kappa` differing from `eta` at one node.
pub fn detailed_balance_sweep(
    g: &FactorGraph,
    kind: ProcessKind,
    census: Option<&CycleCensus>,
    max_lambda: usize,
) -> Result<Vec<DbResidual>> {
    let (n, q) = (g.n(), g.q());
    let mut lambdas: Vec<Vec<usize>> = Vec::new();
    for size in 1..=max_lambda.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            lambdas.push(idx.clone());
            let Some(p) = (0..size).rev().find(|&p| idx[p] < n - size + p) else { break };
            idx[p] += 1;
            for t in p + 1..size {
                idx[t] = idx[t - 1] + 1;
            }
        }
    }
    let mut out = Vec::new();
    for lambda in lambdas {
        let mut etas: Vec<Vec<usize>> = Vec::new();
        for_each_config(lambda.len(), q, &[], |e| etas.push(e.to_vec()))?;
        for eta in etas {
            let pins: Vec<(usize, usize)> = lambda.iter().copied().zip(eta.iter().copied()).collect();
            let mut feasible = false;
            for_each_config(n, q, &pins, |t| feasible |= gibbs_weight(g, t) > 0.0)?;
            if !feasible {
                continue;
            }
            for pos in 0..lambda.len() {
                for c in 0..q {
                    if c == eta[pos] {
                        continue;
                    }
                    let mut kappa = eta.clone();
                    kappa[pos] = c;
                    out.extend(detailed_balance(g, kind, census, &lambda, &eta, &kappa)?);
                }
            }
        }
    }
    Ok(out)
}

/// CSV table of residuals, tagged with a fixture name.
pub fn residuals_csv(rows: &[(String, DbResidual)]) -> String {
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::from("fixture,lambda,eta,kappa,theta,xi,forward,backward,residual\n");
    for (name, r) in rows {
        writeln!(
            out,
            "{name},{},{},{},{},{},{:e},{:e},{:e}",
            join(&r.lambda),
            join(&r.eta),
            join(&r.kappa),
            join(&r.theta),
            join(&r.xi),
            r.forward,
            r.backward,
            r.residual
        )
        .unwrap();
    }
    out
}

/// Small fixtures on six variables for the detailed-balance check: edges and census threshold.
pub fn db_fixtures() -> Vec<(&'static str, Vec<(usize, usize)>, Option<usize>)> {
    vec![
        ("path", vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], None),
        ("star", vec![(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)], None),
        ("triangle_tail", vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)], Some(7)),
        ("square_pendants", vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (2, 5)], Some(9)),
        ("two_triangles", vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)], Some(7)),
        ("hexagon", vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], Some(13)),
        ("hexagon_plain", vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], None),
    ]
}

/// Detailed-balance residual table on the embedded fixtures for the given pairwise model.
pub fn verify_db(spec: &ModelSpec) -> Result<Vec<(String, DbResidual)>> {
    if spec.k != 2 {
        return Err(Error::InvalidInput("the embedded fixtures are pairwise (k = 2)".into()));
    }
    let table = std::sync::Arc::new(crate::models::potts_table(spec.q, 2, spec.beta.unwrap_or(0.0))?);
    let fixtures = db_fixtures();
    let per: Vec<Result<Vec<(String, DbResidual)>>> = fixtures
        .par_iter()
        .map(|(name, edges, thr)| {
            let mut g = FactorGraph::new(6, spec.q, 2)?;
            for &(a, b) in edges {
                g.add_factor(vec![a, b], table.clone())?;
            }
            let census = thr.map(|t| census_of(&g, Some(t)));
            let kind = if census.is_some() { ProcessKind::RSwitch } else { ProcessKind::Switch };
            let rows = detailed_balance_sweep(&g, kind, census.as_ref(), 1)?;
            Ok(rows.into_iter().map(|r| (name.to_string(), r)).collect())
        })
        .collect();
    let mut out = Vec::new();
    for p in per {
        out.extend(p?);
    }
    Ok(out)
}

/// One timing row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub status: Status,
    pub steps: usize,
    pub step_retries: usize,
    pub fail_reason: Option<FailReason>,
    pub generate_ns: u64,
    pub sample_ns: u64,
}

/// Times one instance generation and one sampler run per `n`.
pub fn bench(
    spec: &ModelSpec,
    d: f64,
    ns: &[usize],
    kind: SamplerKind,
    policy: FailPolicy,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    ns.iter()
        .map(|&n| {
            let mut rng = replica_rng(seed, n as u64);
            let t0 = Instant::now();
            let g = sample_null(n, factor_count(n, d, spec.k), spec.k, spec, &mut rng)?;
            let generate_ns = t0.elapsed().as_nanos() as u64;
            let t1 = Instant::now();
            let mut s = Sampler::new(&g, kind, None)?;
            s.set_fail_policy(policy);
            let rec = s.run(&mut rng)?;
            Ok(BenchRow {
                n,
                m: g.m(),
                status: rec.status,
                steps: rec.steps,
                step_retries: rec.step_retries,
                fail_reason: rec.fail_reason,
                generate_ns,
                sample_ns: t1.elapsed().as_nanos() as u64,
            })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Slack of the disagreement-rate condition for `cfg.model` at degree `cfg.d`.
pub fn slack(cfg: &ExperimentConfig) -> SlackReport {
    b1_slack(&cfg.model, cfg.d)
}

/// Samples from the config's instance and compares with its Gibbs distribution.
pub fn tv_experiment(cfg: &ExperimentConfig) -> Result<TvReport> {
    cfg.validate()?;
    let (g, _) = cfg.instance()?;
    let census = census_of(&g, cfg.threshold);
    let recs = run_replicas(&g, cfg.sampler, &census, cfg.replicas, cfg.seed, cfg.retry)?;
    let outcomes: Vec<Outcome> = recs.iter().map(ReplicaRecord::outcome).collect();
    tv_against_gibbs(&g, &outcomes)
}
