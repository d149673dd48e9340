//! Canonical symmetric weight families, symmetry checks, disagreement rates and thresholds.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{increment, WeightRange, WeightTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Potts,
    Colouring,
    Ising,
    NaeSat,
    KSpin,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "potts" => Ok(Family::Potts),
            "colouring" | "coloring" => Ok(Family::Colouring),
            "ising" => Ok(Family::Ising),
            "nae" | "nae_sat" | "nae-sat" => Ok(Family::NaeSat),
            "kspin" | "k_spin" | "k-spin" => Ok(Family::KSpin),
            other => Err(Error::InvalidSpec(format!("unknown model `{other}`"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Potts => "potts",
            Family::Colouring => "colouring",
            Family::Ising => "ising",
            Family::NaeSat => "nae",
            Family::KSpin => "kspin",
        };
        f.write_str(s)
    }
}

/// Law of the k-spin coupling `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Fixed(f64),
    StandardGaussian,
}

/// Model family and parameters. `beta` is `None` for NAE-SAT and `-inf` for colourings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub q: usize,
    pub k: usize,
    #[serde(with = "beta_serde")]
    pub beta: Option<f64>,
    pub coupling: Coupling,
}

mod beta_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match b {
            None => s.serialize_none(),
            Some(v) if v.is_infinite() => s.serialize_str(if *v < 0.0 { "-inf" } else { "inf" }),
            Some(v) => s.serialize_f64(*v),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Num(v)) => Ok(Some(v)),
            Some(Raw::Text(t)) => super::parse_beta(&t).map(Some).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses a float, accepting `-inf`.
pub fn parse_beta(s: &str) -> Result<f64> {
    match s.trim() {
        "-inf" | "-infinity" | "-Inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().map_err(|_| Error::InvalidSpec(format!("bad beta `{t}`"))),
    }
}

impl ModelSpec {
    pub fn potts(q: usize, k: usize, beta: f64) -> Result<Self> {
        Self::build(Family::Potts, q, k, Some(beta), Coupling::Fixed(1.0), 0.0)
    }

    pub fn colouring(q: usize, k: usize) -> Result<Self> {
        Self::build(Family::Colouring, q, k, Some(f64::NEG_INFINITY), Coupling::Fixed(1.0), 0.0)
    }

    /// Zero-field Ising model; any nonzero `field` is rejected since it breaks spin symmetry.
    pub fn ising(k: usize, beta: f64, field: f64) -> Result<Self> {
        Self::build(Family::Ising, 2, k, Some(beta), Coupling::Fixed(1.0), field)
    }

    pub fn nae(k: usize) -> Result<Self> {
        Self::build(Family::NaeSat, 2, k, None, Coupling::Fixed(1.0), 0.0)
    }

    pub fn kspin(k: usize, beta: f64, coupling: Coupling) -> Result<Self> {
        Self::build(Family::KSpin, 2, k, Some(beta), coupling, 0.0)
    }

    fn build(
        family: Family,
        q: usize,
        k: usize,
        beta: Option<f64>,
        coupling: Coupling,
        field: f64,
    ) -> Result<Self> {
        let spec = ModelSpec { family, q, k, beta, coupling };
        if field != 0.0 {
            return Err(Error::InvalidSpec("external fields are not supported".into()));
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.q < 2 {
            return bad("q must be at least 2");
        }
        if self.k < 2 {
            return bad("k must be at least 2");
        }
        if let Some(b) = self.beta {
            if b.is_nan() {
                return bad("beta is NaN");
            }
        }
        match self.family {
            Family::Potts | Family::Ising => {
                if self.family == Family::Ising && self.q != 2 {
                    return bad("ising requires q = 2");
                }
                match self.beta {
                    Some(b) if b <= 0.0 => {}
                    Some(_) => return bad("only antiferromagnetic beta <= 0 is supported"),
                    None => return bad("beta required"),
                }
            }
            Family::Colouring => {
                if self.beta != Some(f64::NEG_INFINITY) {
                    return bad("colouring has beta = -inf");
                }
            }
            Family::NaeSat => {
                if self.q != 2 || self.beta.is_some() {
                    return bad("nae requires q = 2 and no beta");
                }
            }
            Family::KSpin => {
                if self.q != 2 || self.k % 2 != 0 {
                    return bad("k-spin requires q = 2 and even k");
                }
                match self.beta {
                    Some(b) if b.is_finite() => {}
                    _ => return bad("k-spin requires finite beta"),
                }
                if let Coupling::Fixed(j) = self.coupling {
                    if !j.is_finite() {
                        return bad("coupling must be finite");
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds a spec from CLI-style values; `beta` may be `"-inf"`.
    pub fn from_parts(model: &str, q: Option<usize>, k: usize, beta: Option<&str>) -> Result<Self> {
        let family: Family = model.parse()?;
        let beta = beta.map(parse_beta).transpose()?;
        match family {
            Family::Potts => Self::potts(q.unwrap_or(2), k, beta.unwrap_or(0.0)),
            Family::Colouring => Self::colouring(q.unwrap_or(3), k),
            Family::Ising => Self::ising(k, beta.unwrap_or(0.0), 0.0),
            Family::NaeSat => Self::nae(k),
            Family::KSpin => Self::kspin(k, beta.unwrap_or(0.0), Coupling::StandardGaussian),
        }
    }

    /// Parses `key=value` lines (`model`, `q`, `k`, `beta`, `coupling`, `field`); `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut model = None;
        let (mut q, mut k, mut beta, mut coupling, mut field) = (None, 2, None, None, 0.0);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or(Error::Parse { line: i + 1, msg: "expected key=value".into() })?;
            let (key, val) = (key.trim(), val.trim());
            let num_err = || Error::Parse { line: i + 1, msg: format!("bad value for {key}") };
            match key {
                "model" | "family" => model = Some(val.to_string()),
                "q" => q = Some(val.parse().map_err(|_| num_err())?),
                "k" => k = val.parse().map_err(|_| num_err())?,
                "beta" => beta = Some(parse_beta(val)?),
                "coupling" | "j" => coupling = Some(val.to_string()),
                "field" | "h" => field = val.parse().map_err(|_| num_err())?,
                _ => return Err(Error::Parse { line: i + 1, msg: format!("unknown key `{key}`") }),
            }
        }
        let family: Family =
            model.ok_or(Error::InvalidSpec("missing `model`".into()))?.parse()?;
        let coupling = match coupling.as_deref() {
            None | Some("gaussian") | Some("standard_gaussian") => Coupling::StandardGaussian,
            Some(v) => Coupling::Fixed(v.parse().map_err(|_| Error::InvalidSpec(format!("bad coupling `{v}`")))?),
        };
        let spec = match family {
            Family::Potts => ModelSpec::potts(q.unwrap_or(2), k, beta.unwrap_or(0.0)),
            Family::Colouring => ModelSpec::colouring(q.unwrap_or(3), k),
            Family::Ising => ModelSpec::ising(k, beta.unwrap_or(0.0), field),
            Family::NaeSat => ModelSpec::nae(k),
            Family::KSpin => ModelSpec::kspin(k, beta.unwrap_or(0.0), coupling),
        }?;
        if field != 0.0 {
            return Err(Error::InvalidSpec("external fields are not supported".into()));
        }
        Ok(spec)
    }
}

/// A table drawn from a family together with the random parameters used.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWeight {
    pub table: WeightTable,
    /// NAE literal negations, `true` = negated.
    pub signs: Option<Vec<bool>>,
    /// k-spin coupling.
    pub coupling: Option<f64>,
}

/// `+1` for spin 0, `-1` for spin 1.
fn pm(s: usize) -> f64 {
    if s == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn potts_table(q: usize, k: usize, beta: f64) -> Result<WeightTable> {
    let mono = beta.exp();
    WeightTable::from_fn(q, k, |s| if s.iter().all(|&x| x == s[0]) { mono } else { 1.0 })
}

pub fn nae_table(signs: &[bool]) -> Result<WeightTable> {
    WeightTable::from_fn(2, signs.len(), |s| {
        let lit = |i: usize| (s[i] == 1) ^ signs[i];
        let first = lit(0);
        if (1..signs.len()).all(|i| lit(i) == first) {
            0.0
        } else {
            1.0
        }
    })
}

/// `1 + t * prod(tau_i)` with `t = tanh(beta J)`.
pub fn kspin_table(k: usize, t: f64) -> Result<WeightTable> {
    let range = if t.abs() < 1.0 { WeightRange::Canonical } else { WeightRange::Raw };
    WeightTable::from_fn_with_range(2, k, range, |s| 1.0 + t * s.iter().map(|&x| pm(x)).product::<f64>())
}

/// Draws one weight table from the family law.
pub fn make_weight<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<SampledWeight> {
    spec.validate()?;
    let plain = |table| Ok(SampledWeight { table, signs: None, coupling: None });
    match spec.family {
        Family::Potts | Family::Ising | Family::Colouring => {
            plain(potts_table(spec.q, spec.k, spec.beta.unwrap())?)
        }
        Family::NaeSat => {
            let signs: Vec<bool> = (0..spec.k).map(|_| rng.random()).collect();
            Ok(SampledWeight { table: nae_table(&signs)?, signs: Some(signs), coupling: None })
        }
        Family::KSpin => {
            let j = match spec.coupling {
                Coupling::Fixed(j) => j,
                Coupling::StandardGaussian => rng.sample(StandardNormal),
            };
            let t = (spec.beta.unwrap() * j).tanh();
            Ok(SampledWeight { table: kspin_table(spec.k, t)?, signs: None, coupling: Some(j) })
        }
    }
}

/// Largest entry any table of the family can have.
pub fn family_max(spec: &ModelSpec) -> f64 {
    match spec.family {
        Family::KSpin => 2.0,
        _ => 1.0,
    }
}

/// `chi = q^{-k} E[sum psi]`.
pub fn chi(spec: &ModelSpec) -> f64 {
    let q = spec.q as f64;
    let qk = q.powi(spec.k as i32);
    match spec.family {
        Family::Potts | Family::Ising | Family::Colouring => {
            let mono = spec.beta.unwrap().exp();
            (qk - q + q * mono) / qk
        }
        Family::NaeSat => (qk - 2.0) / qk,
        Family::KSpin => 1.0,
    }
}

/// Whether `w` is a table the family can produce (used for the permutation-closure spot check).
pub fn family_produces(spec: &ModelSpec, w: &WeightTable) -> bool {
    if w.q() != spec.q || w.k() != spec.k {
        return false;
    }
    let same = |t: &WeightTable| t.values().iter().zip(w.values()).all(|(a, b)| (a - b).abs() <= 1e-12);
    match spec.family {
        Family::Potts | Family::Ising | Family::Colouring => {
            potts_table(spec.q, spec.k, spec.beta.unwrap()).map(|t| same(&t)).unwrap_or(false)
        }
        Family::NaeSat => {
            let mut signs = vec![0usize; spec.k];
            loop {
                let s: Vec<bool> = signs.iter().map(|&b| b == 1).collect();
                if nae_table(&s).map(|t| same(&t)).unwrap_or(false) {
                    return true;
                }
                if !increment(&mut signs, 2) {
                    return false;
                }
            }
        }
        Family::KSpin => {
            let t = w.values()[0] - 1.0;
            let ok_t = match spec.coupling {
                Coupling::Fixed(j) => (t - (spec.beta.unwrap() * j).tanh()).abs() <= 1e-12,
                Coupling::StandardGaussian => t.abs() < 1.0 || spec.beta == Some(0.0) && t == 0.0,
            };
            ok_t && kspin_table(spec.k, t).map(|x| same(&x)).unwrap_or(false)
        }
    }
}

/// Swapping any two spins everywhere in the argument leaves the weight unchanged.
pub fn check_sym1(w: &WeightTable) -> bool {
    let (q, k) = (w.q(), w.k());
    let mut s = vec![0usize; k];
    let mut t = vec![0usize; k];
    for a in 0..q {
        for b in a + 1..q {
            s.iter_mut().for_each(|x| *x = 0);
            loop {
                for (x, y) in s.iter().zip(t.iter_mut()) {
                    *y = if *x == a {
                        b
                    } else if *x == b {
                        a
                    } else {
                        *x
                    };
                }
                let (u, v) = (w.get(&s), w.get(&t));
                if (u - v).abs() > 1e-12 * u.abs().max(v.abs()).max(1.0) {
                    return false;
                }
                if !increment(&mut s, q) {
                    break;
                }
            }
        }
    }
    true
}

/// Every coordinate/spin row sum equals `q^{k-1} chi`.
pub fn check_sym2(w: &WeightTable, chi: f64) -> bool {
    let target = (w.q() as f64).powi(w.k() as i32 - 1) * chi;
    (0..w.k()).all(|j| {
        (0..w.q()).all(|c| (w.row_sum(j, c) - target).abs() <= 1e-12 * target.abs().max(1.0))
    })
}

/// All permutations of `0..k`.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, k - 1);
            out.push(v);
        }
    }
    out
}

/// Worst total variation between the conditionals of the last `k-1` coordinates given coordinate 0.
pub fn table_disagreement_rate(w: &WeightTable) -> f64 {
    let q = w.q();
    let block = w.values().len() / q;
    let rows: Vec<&[f64]> = (0..q).map(|c| &w.values()[c * block..(c + 1) * block]).collect();
    let mut worst: f64 = 0.0;
    for i in 0..q {
        for j in i + 1..q {
            let (si, sj) = (w.row_sum(0, i), w.row_sum(0, j));
            if si <= 0.0 || sj <= 0.0 {
                continue;
            }
            let tv: f64 =
                0.5 * rows[i].iter().zip(rows[j]).map(|(a, b)| (a / si - b / sj).abs()).sum::<f64>();
            worst = worst.max(tv);
        }
    }
    worst
}

/// Expected disagreement rate of one factor. Exact for deterministic families and fixed couplings;
/// for Gaussian k-spin couplings a Monte Carlo mean over `mc_budget` draws, or quadrature when the
/// budget is zero.
pub fn disagreement_rate<R: Rng + ?Sized>(spec: &ModelSpec, mc_budget: usize, rng: &mut R) -> f64 {
    match (spec.family, spec.coupling) {
        (Family::KSpin, Coupling::StandardGaussian) => {
            let beta = spec.beta.unwrap();
            if mc_budget == 0 {
                kspin_rate_quadrature(beta)
            } else {
                mc_mean(mc_budget, rng, |j| (beta * j).tanh().abs()).0
            }
        }
        _ => deterministic_rate(spec),
    }
}

fn deterministic_rate(spec: &ModelSpec) -> f64 {
    let table = match spec.family {
        Family::NaeSat => nae_table(&vec![false; spec.k]),
        Family::KSpin => {
            let j = match spec.coupling {
                Coupling::Fixed(j) => j,
                Coupling::StandardGaussian => unreachable!(),
            };
            kspin_table(spec.k, (spec.beta.unwrap() * j).tanh())
        }
        _ => potts_table(spec.q, spec.k, spec.beta.unwrap()),
    };
    table_disagreement_rate(&table.expect("canonical table"))
}

/// `E|tanh(beta J)|` for standard Gaussian `J`, which is the exact k-spin rate for every even `k`.
pub fn kspin_rate_quadrature(beta: f64) -> f64 {
    gaussian_expectation(|j| (beta * j).tanh().abs())
}

/// `E[F_k(beta J)]` by Gauss-Hermite quadrature.
pub fn fk_expectation_quadrature(beta: f64, k: usize) -> f64 {
    gaussian_expectation(|j| fk(beta * j, k))
}

/// Monte Carlo `E[F_k(beta J)]` with its standard error.
pub fn fk_expectation_mc<R: Rng + ?Sized>(beta: f64, k: usize, draws: usize, rng: &mut R) -> (f64, f64) {
    mc_mean(draws, rng, |j| fk(beta * j, k))
}

fn mc_mean<R: Rng + ?Sized>(draws: usize, rng: &mut R, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        let j: f64 = rng.sample(StandardNormal);
        let v = f(j);
        s += v;
        s2 += v * v;
    }
    let n = draws.max(1) as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// `E[f(J)]` for standard Gaussian `J` with the 64-point Gauss-Hermite rule.
pub fn gaussian_expectation(f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss_hermite(64);
    let s: f64 = rule.iter().map(|&(x, w)| w * f(std::f64::consts::SQRT_2 * x)).sum();
    s / std::f64::consts::PI.sqrt()
}

/// Nodes and weights of the `n`-point Gauss-Hermite rule for the weight `exp(-x^2)`.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    // Newton iteration on orthonormal Hermite polynomials, seeded by the usual asymptotic guesses.
    let mut out = vec![(0.0, 0.0); n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * out[0].0,
            3 => 1.91 * z - 0.91 * out[1].0,
            _ => 2.0 * z - out[i - 2].0,
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let w = 2.0 / (pp * pp);
        out[i] = (z, w);
        out[n - 1 - i] = (-z, w);
    }
    out
}

/// `F_k(x) = |e^x - e^{-x}| / ((2^{k-1} - 1) e^{-x} + e^x)`.
pub fn fk(x: f64, k: usize) -> f64 {
    let c = 2f64.powi(k as i32 - 1) - 1.0;
    // divide through by e^{|x|} to stay finite for large |x|
    let a = x.abs();
    let num = 1.0 - (-2.0 * a).exp();
    let den = if x >= 0.0 { c * (-2.0 * a).exp() + 1.0 } else { c + (-2.0 * a).exp() };
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Ising,
    Potts,
}

/// `log((D(k-1) - q^{k-1}) / (D(k-1)))`, with `q = 2` for the Ising form.
pub fn threshold(kind: ThresholdKind, delta: f64, q: usize, k: usize) -> Result<f64> {
    let q = match kind {
        ThresholdKind::Ising => 2,
        ThresholdKind::Potts => q,
    };
    let dk = delta * (k as f64 - 1.0);
    let arg = (dk - (q as f64).powi(k as i32 - 1)) / dk;
    if !(arg > 0.0) || !arg.is_finite() {
        return Err(Error::DomainError(format!("threshold log argument {arg} is not positive")));
    }
    Ok(arg.ln())
}

pub fn beta_ising(delta: f64, k: usize) -> Result<f64> {
    threshold(ThresholdKind::Ising, delta, 2, k)
}

pub fn beta_potts(delta: f64, q: usize, k: usize) -> Result<f64> {
    threshold(ThresholdKind::Potts, delta, q, k)
}

/// Rate against the bound `1/(d(k-1))`, with `rate = (1 - slack) * bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub rate: f64,
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
}

pub fn slack_from_rate(rate: f64, d: f64, k: usize) -> SlackReport {
    let dk = d * (k as f64 - 1.0);
    let slack = 1.0 - rate * dk;
    SlackReport { rate, bound: 1.0 / dk, slack, holds: slack > 0.0 }
}

/// Slack of the disagreement-rate condition at average degree `d` (quadrature for Gaussian couplings).
pub fn b1_slack(spec: &ModelSpec, d: f64) -> SlackReport {
    let rate = match (spec.family, spec.coupling) {
        (Family::KSpin, Coupling::StandardGaussian) => kspin_rate_quadrature(spec.beta.unwrap()),
        _ => deterministic_rate(spec),
    };
    slack_from_rate(rate, d, spec.k)
}
