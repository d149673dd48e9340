//! The edge-by-edge samplers.
//!
//! Factors are inserted in a uniformly random order. The configuration starts iid uniform;
//! at each insertion the new factor's arguments are redrawn (from its local measure, or from
//! the cycle subgraph's marginal when the factor closes a short cycle) and the update process
//! repairs the rest of the configuration.

use rand::Rng;
use serde::Serialize;

use crate::census::{census_of, CycleCensus};
use crate::decide::{Decider, RngDecider, Site};
use crate::dp::{sample_boundary_of_h, HSubgraph};
use crate::error::{Error, Result};
use crate::exact::ExactDistribution;
use crate::graph::{FactorGraph, SpinConfiguration};
use crate::process::{exact_output_law, Engine, FailReason, ProcessOutcome, Scope, Status, Stop, UpdateOptions};

/// Insertion order of the factors and, per step, the census cycle the inserted factor closes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeSequence {
    /// `order[i]` is the factor inserted at step `i`.
    pub order: Vec<usize>,
    /// Inverse of `order`.
    pub rank: Vec<usize>,
    /// `closes[i]` is the census cycle closed at step `i`, if any.
    pub closes: Vec<Option<usize>>,
}

/// Uniform random insertion order.
pub fn build_sequence<R: Rng + ?Sized>(g: &FactorGraph, census: &CycleCensus, rng: &mut R) -> EdgeSequence {
    build_sequence_with(g, census, &mut RngDecider::new(rng)).expect("random decisions never abort")
}

/// Uniform random insertion order (Fisher-Yates) with draws from `dec`.
pub fn build_sequence_with(g: &FactorGraph, census: &CycleCensus, dec: &mut dyn Decider) -> Option<EdgeSequence> {
    let m = g.m();
    let mut order: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = dec.uniform(Site::Other, i + 1)?;
        order.swap(i, j);
    }
    Some(sequence_from_order(census, order))
}

/// Sequence for a given insertion order.
pub fn sequence_from_order(census: &CycleCensus, order: Vec<usize>) -> EdgeSequence {
    let mut rank = vec![0; order.len()];
    for (i, &a) in order.iter().enumerate() {
        rank[a] = i;
    }
    let mut closes = vec![None; order.len()];
    for (c, cyc) in census.short_cycles.iter().enumerate() {
        let last = cyc.factors.iter().map(|&f| rank[f]).max().expect("cycles have factors");
        closes[last] = Some(c);
    }
    EdgeSequence { order, rank, closes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    /// Cycle-aware sampler: requires pairwise disjoint short cycles.
    RSampler,
    /// Plain sampler for high-girth graphs: no cycle handling at all.
    FixSampler,
}

/// What a run does when an update fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailPolicy {
    /// The run ends with a fail outcome.
    #[default]
    Abort,
    /// Redraw the step's boundary and try again, up to this many times per step. The output
    /// law is then no longer the sampler's; meant for timing complete runs.
    RetryStep(usize),
}

/// One sampler run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub status: Status,
    pub config: Option<Vec<usize>>,
    pub fail_reason: Option<FailReason>,
    /// Insertion steps completed before the run ended.
    pub steps: usize,
    /// Failed updates that were retried under [`FailPolicy::RetryStep`].
    pub step_retries: usize,
}

impl RunRecord {
    pub fn into_outcome(self) -> ProcessOutcome {
        ProcessOutcome {
            status: self.status,
            config: self.config,
            fail_reason: self.fail_reason,
            visited: Vec::new(),
            disagreements: Vec::new(),
        }
    }

    /// Output spins as `(spin, run length)` pairs.
    pub fn run_length(&self) -> Option<Vec<(usize, usize)>> {
        self.config.as_ref().map(|c| SpinConfiguration::new(c.clone()).run_length())
    }
}

/// A sampler bound to one graph; reusable across replicas.
pub struct Sampler<'g> {
    g: &'g FactorGraph,
    kind: SamplerKind,
    census: CycleCensus,
    engine: Engine<'g>,
    opts: UpdateOptions,
    policy: FailPolicy,
}

impl<'g> Sampler<'g> {
    /// Builds the census (threshold override or default) and checks family membership for
    /// the cycle-aware sampler.
    pub fn new(g: &'g FactorGraph, kind: SamplerKind, threshold: Option<usize>) -> Result<Self> {
        let census = census_of(g, threshold);
        Self::with_census(g, kind, census)
    }

    pub fn with_census(g: &'g FactorGraph, kind: SamplerKind, census: CycleCensus) -> Result<Self> {
        if kind == SamplerKind::RSampler && !census.in_family_g {
            return Err(Error::NotInFamilyG);
        }
        let opts = UpdateOptions { cycles: kind == SamplerKind::RSampler, ..Default::default() };
        let mut engine = Engine::new(g, (kind == SamplerKind::RSampler).then_some(&census));
        engine.set_collect(false);
        Ok(Self { g, kind, census, engine, opts, policy: FailPolicy::Abort })
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn census(&self) -> &CycleCensus {
        &self.census
    }

    /// Cycle-step propagation mode (sequential by default).
    pub fn set_cycle_mode(&mut self, mode: crate::process::CycleMode) {
        self.opts.mode = mode;
    }

    pub fn set_fail_policy(&mut self, policy: FailPolicy) {
        self.policy = policy;
    }

    /// One run with draws from `dec`. `Ok(None)` means the decider aborted.
    pub fn run_with(&mut self, dec: &mut dyn Decider) -> Result<Option<RunRecord>> {
        let g = self.g;
        let Some(seq) = build_sequence_with(g, &self.census, dec) else { return Ok(None) };
        let mut cfg = Vec::with_capacity(g.n());
        for v in 0..g.n() {
            let Some(s) = dec.uniform(Site::Var(v), g.q()) else { return Ok(None) };
            cfg.push(s);
        }
        let cycles = self.kind == SamplerKind::RSampler;
        let mut step_retries = 0;
        for (i, &alpha) in seq.order.iter().enumerate() {
            let scope = Scope { rank: Some(&seq.rank), limit: i, excluded: &[], cycles };
            let mut tries = 0;
            loop {
                let kappa = match seq.closes[i].filter(|_| cycles) {
                    Some(c) => {
                        let h = HSubgraph::new(g, &self.census.short_cycles[c], alpha)?;
                        sample_boundary_of_h(g, &h, dec)?
                    }
                    None => match local_draw(g, alpha, dec) {
                        Some(k) => k,
                        None => return Ok(None),
                    },
                };
                match self.engine.update(&scope, alpha, &mut cfg, &kappa, &self.opts, dec) {
                    Ok(()) => break,
                    Err(Stop::Fail(reason)) => {
                        if matches!(self.policy, FailPolicy::RetryStep(max) if tries < max) {
                            tries += 1;
                            step_retries += 1;
                            continue;
                        }
                        let rec = RunRecord {
                            status: Status::Fail,
                            config: None,
                            fail_reason: Some(reason),
                            steps: i,
                            step_retries,
                        };
                        return Ok(Some(rec));
                    }
                    Err(Stop::Abort) => return Ok(None),
                    Err(Stop::Error(e)) => return Err(e),
                }
            }
        }
        Ok(Some(RunRecord { status: Status::Ok, config: Some(cfg), fail_reason: None, steps: g.m(), step_retries }))
    }

    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<RunRecord> {
        self.run_with(&mut RngDecider::new(rng)).map(|r| r.expect("random decisions never abort"))
    }

    /// Exact output law by enumerating every random decision (tiny instances only).
    pub fn exact_law(&mut self) -> Result<ExactDistribution> {
        let n = self.g.n();
        exact_output_law((0..n).collect(), |d| Ok(self.run_with(d)?.map(RunRecord::into_outcome)))
    }
}

/// Draw from the factor's local measure, one argument at a time.
fn local_draw(g: &FactorGraph, alpha: usize, dec: &mut dyn Decider) -> Option<Vec<usize>> {
    let f = g.factor(alpha);
    let (q, k) = (g.q(), g.k());
    let mut out: Vec<usize> = Vec::with_capacity(k);
    let mut spins = vec![0usize; k];
    for j in 0..k {
        let mut w = vec![0.0; q];
        for (idx, &x) in f.table.values().iter().enumerate() {
            if x > 0.0 {
                f.table.decode(idx, &mut spins);
                if spins[..j] == out[..] {
                    w[spins[j]] += x;
                }
            }
        }
        out.push(dec.choose(Site::Var(f.vars[j]), &w)?);
    }
    Some(out)
}

/// One cycle-aware sampler run on `g`.
pub fn rsampler_run<R: Rng + ?Sized>(g: &FactorGraph, threshold: Option<usize>, rng: &mut R) -> Result<ProcessOutcome> {
    Ok(Sampler::new(g, SamplerKind::RSampler, threshold)?.run(rng)?.into_outcome())
}

/// One plain sampler run on `g`.
pub fn fixsampler_run<R: Rng + ?Sized>(g: &FactorGraph, rng: &mut R) -> Result<ProcessOutcome> {
    Ok(Sampler::new(g, SamplerKind::FixSampler, None)?.run(rng)?.into_outcome())
}
