//! Disagreement-propagation processes.
//!
//! A run starts from a configuration `sigma` that agrees with `eta` on a set `Lambda`, rewrites
//! `Lambda` to `kappa`, and pushes the resulting disagreements outwards one factor at a time.
//! Frontier factors are taken from a FIFO queue filled in discovery order (factor index breaks
//! ties). Every run may fail; failure is an explicit outcome.

use std::collections::VecDeque;

use rand::Rng;
use serde::Serialize;

use crate::census::{CycleCensus, CycleIndex};
use crate::decide::{enumerate_branches, Decider, ForcingDecider, RngDecider};
use crate::dp::{sample_xi_given_boundary, HSubgraph};
use crate::error::{Error, Result};
use crate::exact::{ExactDistribution, Outcome};
use crate::graph::FactorGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    /// A frontier factor has two variables whose new value is already decided.
    Revisit,
    /// The cycle rule met a cycle neighbourhood that was already partly decided.
    ShortCycleConflict,
    /// A disagreement reached a second node of `Lambda`.
    BoundaryReached,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessOutcome {
    pub status: Status,
    /// Output configuration, present when the run succeeded.
    pub config: Option<Vec<usize>>,
    pub fail_reason: Option<FailReason>,
    /// Variables whose output value was decided (sorted).
    pub visited: Vec<usize>,
    /// Variables that carried a disagreement at some point (sorted).
    pub disagreements: Vec<usize>,
}

impl ProcessOutcome {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    /// The outcome as an atom of an output law.
    pub fn to_outcome(&self) -> Outcome {
        match &self.config {
            Some(c) => Outcome::Config(c.clone()),
            None => Outcome::Fail,
        }
    }
}

/// The spin pair of one initial disagreement. The frontier rule is always FIFO.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DisagreementContext {
    pub spin_pair: (usize, usize),
}

impl DisagreementContext {
    /// The other spin of the pair, or `s` itself when `s` is not in the pair.
    pub fn swap(&self, s: usize) -> usize {
        let (a, b) = self.spin_pair;
        if s == a {
            b
        } else if s == b {
            a
        } else {
            s
        }
    }

    pub fn contains(&self, s: usize) -> bool {
        s == self.spin_pair.0 || s == self.spin_pair.1
    }
}

/// Which single-run process to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessKind {
    /// Plain rule everywhere, one initial disagreement.
    Switch,
    /// Cycle-aware rule, one initial disagreement.
    RSwitch,
    /// Cycle-aware rule (when a census is given), any number of initial disagreements.
    MSwitch,
}

/// How the cycle step propagates the disagreements it creates on the cycle subgraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleMode {
    /// One single-disagreement run per changed node.
    #[default]
    Sequential,
    /// One run carrying all the changes at once.
    Concurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UpdateOptions {
    /// Use the cycle rule and the cycle step. Off gives the plain update.
    pub cycles: bool,
    pub mode: CycleMode,
}

impl Default for UpdateOptions {
    fn default() -> Self {
        Self { cycles: true, mode: CycleMode::Sequential }
    }
}

/// Which factors of the graph are present.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scope<'a> {
    /// Factor `f` is present iff `rank[f] < limit` (identity rank when `None`) ...
    pub rank: Option<&'a [usize]>,
    pub limit: usize,
    /// ... and `f` is not excluded.
    pub excluded: &'a [usize],
    pub cycles: bool,
}

impl Scope<'_> {
    fn active(&self, f: usize) -> bool {
        let r = self.rank.map_or(f, |r| r[f]);
        r < self.limit && !self.excluded.contains(&f)
    }
}

pub(crate) enum Stop {
    Fail(FailReason),
    /// The decider declined to continue (forced branch impossible).
    Abort,
    Error(Error),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        Stop::Error(e)
    }
}

#[derive(Default)]
struct Workspace {
    epoch: u32,
    var_mark: Vec<u32>,
    lam_mark: Vec<u32>,
    fac_mark: Vec<u32>,
    old: Vec<usize>,
    src: Vec<usize>,
    pairs: Vec<DisagreementContext>,
    queue: VecDeque<usize>,
    visited: Vec<usize>,
    changed: Vec<usize>,
}

impl Workspace {
    fn new(n: usize, m: usize) -> Self {
        Self {
            var_mark: vec![0; n],
            lam_mark: vec![0; n],
            fac_mark: vec![0; m],
            old: vec![0; n],
            src: vec![0; n],
            ..Default::default()
        }
    }

    fn begin(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.var_mark.fill(0);
            self.lam_mark.fill(0);
            self.fac_mark.fill(0);
            self.epoch = 1;
        }
        self.pairs.clear();
        self.queue.clear();
        self.visited.clear();
        self.changed.clear();
    }

    fn decided(&self, v: usize) -> bool {
        self.var_mark[v] == self.epoch
    }

    fn decide(&mut self, v: usize, current: usize) {
        self.var_mark[v] = self.epoch;
        self.old[v] = current;
        self.visited.push(v);
    }
}

/// Reusable state for running processes on one graph.
pub struct Engine<'g> {
    g: &'g FactorGraph,
    adj: Vec<Vec<(usize, usize)>>,
    cycles: CycleIndex,
    ws: Workspace,
    collect: bool,
    acc_visited: Vec<usize>,
    acc_changed: Vec<usize>,
}

impl<'g> Engine<'g> {
    pub fn new(g: &'g FactorGraph, census: Option<&CycleCensus>) -> Self {
        let cycles = census.map(|c| CycleIndex::new(&c.short_cycles)).unwrap_or_default();
        Self {
            g,
            adj: g.adjacency(),
            cycles,
            ws: Workspace::new(g.n(), g.m()),
            collect: true,
            acc_visited: Vec::new(),
            acc_changed: Vec::new(),
        }
    }

    pub fn graph(&self) -> &'g FactorGraph {
        self.g
    }

    /// Skips bookkeeping of visited nodes (used by the samplers).
    pub(crate) fn set_collect(&mut self, on: bool) {
        self.collect = on;
    }

    fn enqueue(&mut self, scope: &Scope<'_>, v: usize) {
        for &(f, _) in &self.adj[v] {
            if self.ws.fac_mark[f] != self.ws.epoch && scope.active(f) {
                self.ws.queue.push_back(f);
            }
        }
    }

    fn mark_disagreeing(&mut self, scope: &Scope<'_>, v: usize, src: usize) {
        self.ws.src[v] = src;
        self.ws.changed.push(v);
        self.enqueue(scope, v);
    }

    // One propagation run. On a stop, `cfg` is restored.
    pub(crate) fn propagate(
        &mut self,
        scope: &Scope<'_>,
        cfg: &mut [usize],
        lambda: &[usize],
        kappa: &[usize],
        dec: &mut dyn Decider,
    ) -> std::result::Result<(), Stop> {
        self.ws.begin();
        for &v in lambda {
            self.ws.decide(v, cfg[v]);
            self.ws.lam_mark[v] = self.ws.epoch;
        }
        let mut initial: Vec<usize> = Vec::new();
        for (&v, &k) in lambda.iter().zip(kappa) {
            if cfg[v] != k {
                self.ws.pairs.push(DisagreementContext { spin_pair: (cfg[v], k) });
                self.ws.src[v] = self.ws.pairs.len() - 1;
                cfg[v] = k;
                initial.push(v);
            }
        }
        initial.sort_unstable();
        for v in initial {
            let s = self.ws.src[v];
            self.mark_disagreeing(scope, v, s);
        }
        let result = self.drain(scope, cfg, dec);
        if self.collect {
            self.acc_visited.extend_from_slice(&self.ws.visited);
            self.acc_changed.extend_from_slice(&self.ws.changed);
        }
        if result.is_err() {
            for &v in &self.ws.visited {
                cfg[v] = self.ws.old[v];
            }
        }
        result
    }

    fn drain(&mut self, scope: &Scope<'_>, cfg: &mut [usize], dec: &mut dyn Decider) -> std::result::Result<(), Stop> {
        while let Some(b) = self.ws.queue.pop_front() {
            if self.ws.fac_mark[b] == self.ws.epoch {
                continue;
            }
            let vars = &self.g.factor(b).vars;
            let mut entry = None;
            let mut decided = 0;
            for (p, &y) in vars.iter().enumerate() {
                if self.ws.decided(y) {
                    decided += 1;
                    if entry.is_none() && cfg[y] != self.ws.old[y] {
                        entry = Some(p);
                    }
                }
            }
            let entry = entry.ok_or_else(|| Stop::Error(Error::Corrupt("frontier factor without a disagreement".into())))?;
            if decided > 1 {
                let x = vars[entry];
                let boundary = vars.iter().any(|&y| y != x && self.ws.decided(y) && self.ws.lam_mark[y] == self.ws.epoch);
                return Err(Stop::Fail(if boundary { FailReason::BoundaryReached } else { FailReason::Revisit }));
            }
            let cyc = if scope.cycles { self.cycles_near(scope, b) } else { Vec::new() };
            if cyc.is_empty() {
                self.standard_rule(scope, cfg, b, entry, dec)?;
            } else {
                self.cycle_rule(scope, cfg, b, entry, &cyc)?;
            }
        }
        Ok(())
    }

    // Present, not yet processed census cycles that contain `b` or one of its variables.
    fn cycles_near(&self, scope: &Scope<'_>, b: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.cycles.through_factor(b).to_vec();
        for &y in &self.g.factor(b).vars {
            out.extend_from_slice(self.cycles.through_var(y));
        }
        out.sort_unstable();
        out.dedup();
        out.retain(|&c| {
            let fs = &self.cycles.cycles[c].factors;
            fs.iter().all(|&f| scope.active(f)) && self.ws.fac_mark[fs[0]] != self.ws.epoch
        });
        out
    }

    fn standard_rule(
        &mut self,
        scope: &Scope<'_>,
        cfg: &mut [usize],
        b: usize,
        entry: usize,
        dec: &mut dyn Decider,
    ) -> std::result::Result<(), Stop> {
        let f = self.g.factor(b);
        let x = f.vars[entry];
        let pair = self.ws.pairs[self.ws.src[x]];
        let mut spins: Vec<usize> = f.vars.iter().map(|&y| cfg[y]).collect();
        let new_x = spins[entry];
        let old_x = self.ws.old[x];
        let hat = f.table.get(&spins) / f.table.row_sum(entry, new_x);
        spins[entry] = old_x;
        let psi = f.table.get(&spins);
        if psi <= 0.0 {
            return Err(Stop::Error(Error::Corrupt(format!("factor {b} has zero weight under the input"))));
        }
        let base = psi / f.table.row_sum(entry, old_x);
        let q = (1.0 - hat / base).max(0.0);
        let flips: Vec<(usize, usize, usize)> = f
            .vars
            .iter()
            .enumerate()
            .filter(|&(p, &y)| p != entry && pair.contains(cfg[y]))
            .map(|(_, &y)| (y, cfg[y], pair.swap(cfg[y])))
            .collect();
        let flip = if flips.is_empty() { false } else { dec.flip(q, &flips).ok_or(Stop::Abort)? };
        self.ws.fac_mark[b] = self.ws.epoch;
        for (p, &y) in f.vars.iter().enumerate() {
            if p != entry {
                self.ws.decide(y, cfg[y]);
            }
        }
        if flip {
            let s = self.ws.src[x];
            for &(y, _, new) in &flips {
                cfg[y] = new;
                self.mark_disagreeing(scope, y, s);
            }
        }
        Ok(())
    }

    // Deterministic sweep of the disagreement through the cycle neighbourhood.
    fn cycle_rule(
        &mut self,
        scope: &Scope<'_>,
        cfg: &mut [usize],
        b: usize,
        entry: usize,
        cycles: &[usize],
    ) -> std::result::Result<(), Stop> {
        let x = self.g.factor(b).vars[entry];
        let pair = self.ws.pairs[self.ws.src[x]];
        let mut sweep = vec![b];
        for &c in cycles {
            let fs = &self.cycles.cycles[c].factors;
            // cycle order, starting at the entry factor when it lies on the cycle
            let start = fs.iter().position(|&f| f == b).unwrap_or(0);
            sweep.extend(fs[start..].iter().chain(&fs[..start]).copied().filter(|&f| f != b));
        }
        let mut hood: Vec<usize> = sweep.iter().flat_map(|&a| self.g.factor(a).vars.iter().copied()).collect();
        hood.sort_unstable();
        hood.dedup();
        if hood.iter().any(|&y| y != x && self.ws.decided(y)) {
            return Err(Stop::Fail(FailReason::ShortCycleConflict));
        }
        let mut fresh = Vec::new();
        loop {
            let mut progress = false;
            for &a in &sweep {
                let vars = &self.g.factor(a).vars;
                let hot = vars.iter().any(|&y| self.ws.decided(y) && cfg[y] != self.ws.old[y]);
                if !hot || vars.iter().all(|&y| self.ws.decided(y)) {
                    continue;
                }
                for &y in vars {
                    if !self.ws.decided(y) {
                        self.ws.decide(y, cfg[y]);
                        if pair.contains(cfg[y]) {
                            cfg[y] = pair.swap(cfg[y]);
                            fresh.push(y);
                        }
                    }
                }
                progress = true;
            }
            if !progress {
                break;
            }
        }
        for &y in &hood {
            if !self.ws.decided(y) {
                self.ws.decide(y, cfg[y]);
            }
        }
        for &a in &sweep {
            self.ws.fac_mark[a] = self.ws.epoch;
        }
        fresh.sort_unstable();
        let s = self.ws.src[x];
        for y in fresh {
            self.mark_disagreeing(scope, y, s);
        }
        Ok(())
    }

    /// The cycle subgraph closed by `alpha`, if `alpha` closes a census cycle whose other
    /// factors are present.
    pub(crate) fn closing_cycle(&self, scope: &Scope<'_>, alpha: usize) -> Result<Option<HSubgraph>> {
        for &c in self.cycles.through_factor(alpha) {
            let cyc = &self.cycles.cycles[c];
            if cyc.factors.iter().all(|&f| f == alpha || scope.active(f)) {
                return HSubgraph::new(self.g, cyc, alpha).map(Some);
            }
        }
        Ok(None)
    }

    /// Redraws the cycle subgraph given the new boundary and propagates the changes on the
    /// graph without the cycle.
    pub(crate) fn cycle_step(
        &mut self,
        scope: &Scope<'_>,
        h: &HSubgraph,
        cfg: &mut [usize],
        kappa: &[usize],
        opts: &UpdateOptions,
        dec: &mut dyn Decider,
    ) -> std::result::Result<(), Stop> {
        let g = self.g;
        let dv = &g.factor(h.closing).vars;
        let eta: Vec<usize> = dv.iter().map(|&v| cfg[v]).collect();
        // conditioned on the new boundary, so the redrawn subgraph is consistent with it
        let xi = sample_xi_given_boundary(g, h, kappa, dec).map_err(|e| match e {
            Error::ZeroMeasureCondition => Stop::Error(Error::InfeasibleBoundary),
            e => Stop::Error(e),
        })?;
        let mut target: Vec<usize> = h.vars.iter().map(|&v| cfg[v]).collect();
        let slot = |v: usize| h.vars.binary_search(&v).expect("variable of H");
        for (&v, &k) in dv.iter().zip(kappa) {
            target[slot(v)] = k;
        }
        for &(v, s) in &xi {
            target[slot(v)] = s;
        }
        let mut order: Vec<usize> = (0..h.vars.len()).filter(|&i| cfg[h.vars[i]] != target[i]).collect();
        let pos = |v: usize| dv.iter().position(|&u| u == v).unwrap();
        let m_old: Vec<usize> = h.boundary.iter().map(|&v| eta[pos(v)]).collect();
        let m_new: Vec<usize> = h.boundary.iter().map(|&v| kappa[pos(v)]).collect();
        if m_old > m_new {
            order.reverse();
        }
        let mut excluded = scope.excluded.to_vec();
        excluded.extend_from_slice(&h.path_factors);
        let bar = Scope { excluded: &excluded, ..*scope };
        match opts.mode {
            CycleMode::Sequential => {
                for i in order {
                    let mut k: Vec<usize> = h.vars.iter().map(|&v| cfg[v]).collect();
                    k[i] = target[i];
                    self.propagate(&bar, cfg, &h.vars, &k, dec)?;
                }
            }
            CycleMode::Concurrent => self.propagate(&bar, cfg, &h.vars, &target, dec)?,
        }
        Ok(())
    }

    /// Moves the closing factor's arguments from their current values to `kappa`: first the
    /// disagreements off the cycle boundary, one at a time in variable order, then the cycle
    /// step when the boundary of a closed cycle changes.
    pub(crate) fn update(
        &mut self,
        scope: &Scope<'_>,
        alpha: usize,
        cfg: &mut [usize],
        kappa: &[usize],
        opts: &UpdateOptions,
        dec: &mut dyn Decider,
    ) -> std::result::Result<(), Stop> {
        let dv = self.g.factor(alpha).vars.clone();
        let h = if opts.cycles && scope.cycles { self.closing_cycle(scope, alpha)? } else { None };
        let in_m = |v: usize| h.as_ref().is_some_and(|h| h.boundary.contains(&v));
        let mut ys: Vec<usize> = (0..dv.len()).filter(|&i| cfg[dv[i]] != kappa[i] && !in_m(dv[i])).collect();
        ys.sort_unstable_by_key(|&i| dv[i]);
        for i in ys {
            let mut k: Vec<usize> = dv.iter().map(|&v| cfg[v]).collect();
            k[i] = kappa[i];
            self.propagate(scope, cfg, &dv, &k, dec)?;
        }
        if let Some(h) = h {
            if dv.iter().zip(kappa).any(|(&v, &k)| cfg[v] != k) {
                self.cycle_step(scope, &h, cfg, kappa, opts, dec)?;
            }
        }
        Ok(())
    }

    fn outcome(&mut self, cfg: Vec<usize>, r: std::result::Result<(), Stop>) -> Result<Option<ProcessOutcome>> {
        let mut visited = std::mem::take(&mut self.acc_visited);
        let mut changed = std::mem::take(&mut self.acc_changed);
        visited.sort_unstable();
        visited.dedup();
        changed.sort_unstable();
        changed.dedup();
        let (status, config, fail_reason) = match r {
            Ok(()) => (Status::Ok, Some(cfg), None),
            Err(Stop::Fail(reason)) => (Status::Fail, None, Some(reason)),
            Err(Stop::Abort) => return Ok(None),
            Err(Stop::Error(e)) => return Err(e),
        };
        Ok(Some(ProcessOutcome { status, config, fail_reason, visited, disagreements: changed }))
    }

    /// Single run of `kind` on the whole graph, with decisions from `dec`.
    /// `Ok(None)` means the decider aborted.
    pub fn run_with(
        &mut self,
        kind: ProcessKind,
        sigma: &[usize],
        lambda: &[usize],
        eta: &[usize],
        kappa: &[usize],
        dec: &mut dyn Decider,
    ) -> Result<Option<ProcessOutcome>> {
        let scope = Scope { rank: None, limit: self.g.m(), excluded: &[], cycles: kind != ProcessKind::Switch };
        validate_run(self.g, &scope, sigma, lambda, eta, kappa, kind != ProcessKind::MSwitch)?;
        self.acc_visited.clear();
        self.acc_changed.clear();
        let mut cfg = sigma.to_vec();
        let r = self.propagate(&scope, &mut cfg, lambda, kappa, dec);
        self.outcome(cfg, r)
    }

    /// Cycle step for the census cycle closed by `alpha` (the graph minus `alpha` is the
    /// current graph). `kappa` may differ from `sigma` only on the cycle boundary.
    pub fn cycleswitch_with(
        &mut self,
        alpha: usize,
        sigma: &[usize],
        kappa: &[usize],
        opts: &UpdateOptions,
        dec: &mut dyn Decider,
    ) -> Result<Option<ProcessOutcome>> {
        let excluded = [alpha];
        let scope = Scope { rank: None, limit: self.g.m(), excluded: &excluded, cycles: true };
        let dv = self.g.factor(alpha).vars.clone();
        let eta: Vec<usize> = dv.iter().map(|&v| sigma.get(v).copied().unwrap_or(usize::MAX)).collect();
        validate_run(self.g, &scope, sigma, &dv, &eta, kappa, false)?;
        let h = self
            .closing_cycle(&scope, alpha)?
            .ok_or_else(|| Error::InvalidInput(format!("factor {alpha} closes no census cycle")))?;
        if dv.iter().zip(kappa).any(|(&v, &k)| sigma[v] != k && !h.boundary.contains(&v)) {
            return Err(Error::InvalidInput("kappa differs from sigma off the cycle boundary".into()));
        }
        self.acc_visited.clear();
        self.acc_changed.clear();
        let mut cfg = sigma.to_vec();
        let r = if dv.iter().zip(kappa).any(|(&v, &k)| sigma[v] != k) {
            self.cycle_step(&scope, &h, &mut cfg, kappa, opts, dec)
        } else {
            Ok(())
        };
        self.outcome(cfg, r)
    }

    /// Full update of the arguments of `alpha` to `kappa` on the graph minus `alpha`.
    pub fn rupdate_with(
        &mut self,
        alpha: usize,
        sigma: &[usize],
        kappa: &[usize],
        opts: &UpdateOptions,
        dec: &mut dyn Decider,
    ) -> Result<Option<ProcessOutcome>> {
        let excluded = [alpha];
        let scope = Scope { rank: None, limit: self.g.m(), excluded: &excluded, cycles: opts.cycles };
        let dv = self.g.factor(alpha).vars.clone();
        let eta: Vec<usize> = dv.iter().map(|&v| sigma.get(v).copied().unwrap_or(usize::MAX)).collect();
        validate_run(self.g, &scope, sigma, &dv, &eta, kappa, false)?;
        self.acc_visited.clear();
        self.acc_changed.clear();
        let mut cfg = sigma.to_vec();
        let r = self.update(&scope, alpha, &mut cfg, kappa, opts, dec);
        self.outcome(cfg, r)
    }
}

fn validate_run(
    g: &FactorGraph,
    scope: &Scope<'_>,
    sigma: &[usize],
    lambda: &[usize],
    eta: &[usize],
    kappa: &[usize],
    single: bool,
) -> Result<()> {
    g.check_config(sigma)?;
    if eta.len() != lambda.len() || kappa.len() != lambda.len() {
        return Err(Error::InvalidInput("eta and kappa must have one spin per node of Lambda".into()));
    }
    let mut seen = lambda.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != lambda.len() || seen.last().is_some_and(|&v| v >= g.n()) {
        return Err(Error::InvalidInput("Lambda must hold distinct variables of the graph".into()));
    }
    if kappa.iter().any(|&k| k >= g.q()) {
        return Err(Error::InvalidInput("kappa spin outside alphabet".into()));
    }
    if lambda.iter().zip(eta).any(|(&v, &e)| sigma[v] != e) {
        return Err(Error::InvalidInput("sigma does not agree with eta on Lambda".into()));
    }
    if single && eta.iter().zip(kappa).filter(|(a, b)| a != b).count() > 1 {
        return Err(Error::InvalidInput("eta and kappa differ at more than one node".into()));
    }
    let mut buf = Vec::new();
    for (a, f) in g.factors().iter().enumerate() {
        if scope.active(a) && f.weight(sigma, &mut buf) <= 0.0 {
            return Err(Error::InvalidInput(format!("sigma violates factor {a}")));
        }
    }
    Ok(())
}

fn expect_ran(o: Option<ProcessOutcome>) -> ProcessOutcome {
    o.expect("random decisions never abort")
}

/// Plain propagation of a single disagreement.
pub fn switch_run<R: Rng + ?Sized>(
    g: &FactorGraph,
    sigma: &[usize],
    lambda: &[usize],
    eta: &[usize],
    kappa: &[usize],
    rng: &mut R,
) -> Result<ProcessOutcome> {
    Engine::new(g, None)
        .run_with(ProcessKind::Switch, sigma, lambda, eta, kappa, &mut RngDecider::new(rng))
        .map(expect_ran)
}

/// Propagation of a single disagreement with the cycle rule for the census cycles.
pub fn rswitch_run<R: Rng + ?Sized>(
    g: &FactorGraph,
    sigma: &[usize],
    lambda: &[usize],
    eta: &[usize],
    kappa: &[usize],
    census: &CycleCensus,
    rng: &mut R,
) -> Result<ProcessOutcome> {
    Engine::new(g, Some(census))
        .run_with(ProcessKind::RSwitch, sigma, lambda, eta, kappa, &mut RngDecider::new(rng))
        .map(expect_ran)
}

/// Concurrent propagation of any number of disagreements.
pub fn mswitch_run<R: Rng + ?Sized>(
    g: &FactorGraph,
    sigma: &[usize],
    lambda: &[usize],
    eta: &[usize],
    kappa: &[usize],
    census: Option<&CycleCensus>,
    rng: &mut R,
) -> Result<ProcessOutcome> {
    Engine::new(g, census)
        .run_with(ProcessKind::MSwitch, sigma, lambda, eta, kappa, &mut RngDecider::new(rng))
        .map(expect_ran)
}

/// Cycle step for the census cycle closed by `alpha`. `g` contains `alpha`; the process runs
/// on `g` minus `alpha`.
pub fn cycleswitch_run<R: Rng + ?Sized>(
    g: &FactorGraph,
    alpha: usize,
    sigma: &[usize],
    kappa: &[usize],
    census: &CycleCensus,
    opts: &UpdateOptions,
    rng: &mut R,
) -> Result<ProcessOutcome> {
    Engine::new(g, Some(census)).cycleswitch_with(alpha, sigma, kappa, opts, &mut RngDecider::new(rng)).map(expect_ran)
}

/// Update of the arguments of `alpha` to `kappa`. `g` contains `alpha`; the process runs on
/// `g` minus `alpha`.
pub fn rupdate_run<R: Rng + ?Sized>(
    g: &FactorGraph,
    alpha: usize,
    sigma: &[usize],
    kappa: &[usize],
    census: Option<&CycleCensus>,
    opts: &UpdateOptions,
    rng: &mut R,
) -> Result<ProcessOutcome> {
    Engine::new(g, census).rupdate_with(alpha, sigma, kappa, opts, &mut RngDecider::new(rng)).map(expect_ran)
}

/// Exact probability that a single run of `kind` maps `theta` to `xi`.
#[allow(clippy::too_many_arguments)]
pub fn transition_probability(
    g: &FactorGraph,
    theta: &[usize],
    xi: &[usize],
    lambda: &[usize],
    eta: &[usize],
    kappa: &[usize],
    kind: ProcessKind,
    census: Option<&CycleCensus>,
) -> Result<f64> {
    g.check_config(xi)?;
    if lambda.iter().zip(kappa).any(|(&v, &k)| xi[v] != k) {
        return Err(Error::InvalidInput("xi does not agree with kappa on Lambda".into()));
    }
    let mut engine = Engine::new(g, census);
    engine.set_collect(false);
    let mut dec = ForcingDecider::new(xi);
    let out = engine.run_with(kind, theta, lambda, eta, kappa, &mut dec)?;
    Ok(match out {
        Some(o) if o.config.as_deref() == Some(xi) => dec.prob,
        _ => 0.0,
    })
}

/// Exact output law of a randomized procedure, by enumerating all of its decisions.
/// `run` returns `Ok(None)` only if it aborted, which enumeration never causes.
pub fn exact_output_law(
    vars: Vec<usize>,
    mut run: impl FnMut(&mut dyn Decider) -> Result<Option<ProcessOutcome>>,
) -> Result<ExactDistribution> {
    let mut masses = std::collections::BTreeMap::new();
    for (r, p) in enumerate_branches(|d| run(d)) {
        let o = r?.ok_or_else(|| Error::Corrupt("enumeration aborted".into()))?;
        *masses.entry(o.to_outcome()).or_insert(0.0) += p;
    }
    ExactDistribution::from_probs(vars, masses)
}

/// Exact output law of a single run of `kind`.
pub fn exact_run_law(
    g: &FactorGraph,
    kind: ProcessKind,
    sigma: &[usize],
    lambda: &[usize],
    eta: &[usize],
    kappa: &[usize],
    census: Option<&CycleCensus>,
) -> Result<ExactDistribution> {
    let mut engine = Engine::new(g, census);
    engine.set_collect(false);
    exact_output_law((0..g.n()).collect(), |d| engine.run_with(kind, sigma, lambda, eta, kappa, d))
}

/// Exact output law of the full update of `alpha`'s arguments.
pub fn exact_rupdate_law(
    g: &FactorGraph,
    alpha: usize,
    sigma: &[usize],
    kappa: &[usize],
    census: Option<&CycleCensus>,
    opts: &UpdateOptions,
) -> Result<ExactDistribution> {
    let mut engine = Engine::new(g, census);
    engine.set_collect(false);
    exact_output_law((0..g.n()).collect(), |d| engine.rupdate_with(alpha, sigma, kappa, opts, d))
}

/// Exact output law of the cycle step closed by `alpha`.
pub fn exact_cycleswitch_law(
    g: &FactorGraph,
    alpha: usize,
    sigma: &[usize],
    kappa: &[usize],
    census: &CycleCensus,
    opts: &UpdateOptions,
) -> Result<ExactDistribution> {
    let mut engine = Engine::new(g, Some(census));
    engine.set_collect(false);
    exact_output_law((0..g.n()).collect(), |d| engine.cycleswitch_with(alpha, sigma, kappa, opts, d))
}
