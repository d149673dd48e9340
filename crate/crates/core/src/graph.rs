//! Factor graphs, weight tables and spin configurations.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spin alphabet `{0, .., q-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinAlphabet {
    q: usize,
}

impl SpinAlphabet {
    pub fn new(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidInput(format!("alphabet needs q >= 2, got {q}")));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> usize {
        self.q
    }
}

/// How strictly table entries are validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRange {
    /// Entries in `[0, 2)`, the range used by all canonical model families.
    Canonical,
    /// Any finite nonnegative entry.
    Raw,
}

/// Dense weight function over `[q]^k`, stored row-major (first coordinate most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    q: usize,
    k: usize,
    values: Vec<f64>,
    // rows[j * q + c] = sum of entries whose coordinate j equals c
    rows: Vec<f64>,
    total: f64,
}

impl WeightTable {
    pub fn new(q: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_range(q, k, values, WeightRange::Canonical)
    }

    pub fn with_range(q: usize, k: usize, values: Vec<f64>, range: WeightRange) -> Result<Self> {
        if q < 2 || k == 0 {
            return Err(Error::InvalidInput(format!("bad table shape q={q} k={k}")));
        }
        let size = table_len(q, k)?;
        if values.len() != size {
            return Err(Error::InvalidInput(format!(
                "table for q={q} k={k} needs {size} entries, got {}",
                values.len()
            )));
        }
        for &v in &values {
            let ok = match range {
                WeightRange::Canonical => (0.0..2.0).contains(&v),
                WeightRange::Raw => v.is_finite() && v >= 0.0,
            };
            if !ok {
                return Err(Error::InvalidInput(format!("weight entry {v} out of range")));
            }
        }
        if !values.iter().any(|&v| v > 0.0) {
            return Err(Error::ZeroMass);
        }
        let mut rows = vec![0.0; k * q];
        let mut idx = vec![0usize; k];
        for &v in &values {
            for (j, &c) in idx.iter().enumerate() {
                rows[j * q + c] += v;
            }
            increment(&mut idx, q);
        }
        let total = values.iter().sum();
        Ok(Self { q, k, values, rows, total })
    }

    pub fn from_fn(q: usize, k: usize, f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        Self::from_fn_with_range(q, k, WeightRange::Canonical, f)
    }

    pub fn from_fn_with_range(
        q: usize,
        k: usize,
        range: WeightRange,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let size = table_len(q, k)?;
        let mut idx = vec![0usize; k];
        let mut values = Vec::with_capacity(size);
        for _ in 0..size {
            values.push(f(&idx));
            increment(&mut idx, q);
        }
        Self::with_range(q, k, values, range)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Sum of all entries whose coordinate `j` holds spin `c`.
    pub fn row_sum(&self, j: usize, c: usize) -> f64 {
        self.rows[j * self.q + c]
    }

    pub fn index(&self, spins: &[usize]) -> usize {
        debug_assert_eq!(spins.len(), self.k);
        spins.iter().fold(0, |acc, &s| acc * self.q + s)
    }

    pub fn decode(&self, mut idx: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = idx % self.q;
            idx /= self.q;
        }
    }

    pub fn get(&self, spins: &[usize]) -> f64 {
        self.values[self.index(spins)]
    }

    pub fn get_index(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Table of `(s_1..s_k) -> psi(s_{perm[0]}, .., s_{perm[k-1]})`.
    pub fn permute_coords(&self, perm: &[usize]) -> WeightTable {
        let mut src = vec![0usize; self.k];
        let table = Self::from_fn_with_range(self.q, self.k, WeightRange::Raw, |s| {
            for (i, &p) in perm.iter().enumerate() {
                src[i] = s[p];
            }
            self.get(&src)
        });
        table.expect("permutation of a valid table is valid")
    }
}

fn table_len(q: usize, k: usize) -> Result<usize> {
    q.checked_pow(k as u32)
        .filter(|&s| s <= 1 << 24)
        .ok_or(Error::SizeExceeded { q, free: k, cap_log2: 24 })
}

/// Odometer increment over `[q]^len`, last coordinate fastest. Returns false on wrap-around.
pub(crate) fn increment(idx: &mut [usize], q: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < q {
            return true;
        }
        *slot = 0;
    }
    false
}

/// One factor node: an ordered tuple of distinct variables and its weight table.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub vars: Vec<usize>,
    pub table: Arc<WeightTable>,
}

impl Factor {
    pub fn weight(&self, sigma: &[usize], buf: &mut Vec<usize>) -> f64 {
        buf.clear();
        buf.extend(self.vars.iter().map(|&v| sigma[v]));
        self.table.get(buf)
    }
}

/// Factor graph with `n` variables over `q` spins and arity-`k` factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    n: usize,
    q: usize,
    k: usize,
    factors: Vec<Factor>,
}

impl FactorGraph {
    pub fn new(n: usize, q: usize, k: usize) -> Result<Self> {
        SpinAlphabet::new(q)?;
        if k == 0 {
            return Err(Error::InvalidInput("arity must be positive".into()));
        }
        Ok(Self { n, q, k, factors: Vec::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, a: usize) -> &Factor {
        &self.factors[a]
    }

    /// Average variable degree `k m / n`.
    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.k * self.m()) as f64 / self.n as f64
        }
    }

    pub fn add_factor(&mut self, vars: Vec<usize>, table: Arc<WeightTable>) -> Result<usize> {
        if vars.len() != self.k || table.k() != self.k {
            return Err(Error::InvalidInput(format!("factor must have arity {}", self.k)));
        }
        if table.q() != self.q {
            return Err(Error::InvalidInput("table alphabet does not match graph".into()));
        }
        for (i, &v) in vars.iter().enumerate() {
            if v >= self.n {
                return Err(Error::InvalidInput(format!("variable {v} out of range")));
            }
            if vars[..i].contains(&v) {
                return Err(Error::InvalidInput(format!("variable {v} repeated in a factor")));
            }
        }
        self.factors.push(Factor { vars, table });
        Ok(self.factors.len() - 1)
    }

    /// Copy of the graph keeping only the listed factors, in the given order.
    pub fn subgraph(&self, keep: &[usize]) -> FactorGraph {
        FactorGraph {
            n: self.n,
            q: self.q,
            k: self.k,
            factors: keep.iter().map(|&a| self.factors[a].clone()).collect(),
        }
    }

    /// For each variable, its incident `(factor, position)` pairs sorted by factor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (a, f) in self.factors.iter().enumerate() {
            for (pos, &v) in f.vars.iter().enumerate() {
                adj[v].push((a, pos));
            }
        }
        adj
    }

    pub fn check_config(&self, sigma: &[usize]) -> Result<()> {
        if sigma.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "configuration has {} spins, graph has {} variables",
                sigma.len(),
                self.n
            )));
        }
        if let Some(&s) = sigma.iter().find(|&&s| s >= self.q) {
            return Err(Error::InvalidInput(format!("spin {s} outside alphabet")));
        }
        Ok(())
    }

    /// Serialize to the line format: header `n k q`, then one line per factor
    /// with its variables followed by its `q^k` weights.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} {}", self.n, self.k, self.q).unwrap();
        for f in &self.factors {
            let mut first = true;
            for v in &f.vars {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{v}").unwrap();
            }
            for w in f.table.values() {
                write!(out, " {w}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parse the line format. A trailing `truth s_0 .. s_{n-1}` line carries a planted configuration.
    pub fn from_text(text: &str) -> Result<(FactorGraph, Option<Vec<usize>>)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty input".into() })?;
        let nums: Vec<usize> = parse_all(hline, header)?;
        if nums.len() != 3 {
            return Err(Error::Parse { line: hline, msg: "header must be `n k q`".into() });
        }
        let (n, k, q) = (nums[0], nums[1], nums[2]);
        let mut g = FactorGraph::new(n, q, k).map_err(|e| Error::Parse { line: hline, msg: e.to_string() })?;
        let size = table_len(q, k)?;
        let mut truth = None;
        for (ln, line) in lines {
            if let Some(rest) = line.strip_prefix("truth") {
                let spins: Vec<usize> = parse_all(ln, rest)?;
                g.check_config(&spins).map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
                truth = Some(spins);
                continue;
            }
            if truth.is_some() {
                return Err(Error::Parse { line: ln, msg: "factor after truth line".into() });
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != k + size {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {} fields, got {}", k + size, toks.len()),
                });
            }
            let vars = parse_all(ln, &toks[..k].join(" "))?;
            let weights: Vec<f64> = parse_all(ln, &toks[k..].join(" "))?;
            let table = WeightTable::with_range(q, k, weights, WeightRange::Raw)
                .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
            g.add_factor(vars, Arc::new(table))
                .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
        }
        Ok((g, truth))
    }
}

fn parse_all<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse { line, msg: format!("bad token `{t}`") }))
        .collect()
}

/// Product of all factor weights at a total configuration.
pub fn gibbs_weight(g: &FactorGraph, sigma: &[usize]) -> f64 {
    let mut buf = Vec::with_capacity(g.k());
    let mut w = 1.0;
    for f in g.factors() {
        w *= f.weight(sigma, &mut buf);
        if w == 0.0 {
            break;
        }
    }
    w
}

/// A total assignment of spins, with run-length encoding for compact output.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration {
    pub spins: Vec<usize>,
}

impl SpinConfiguration {
    pub fn new(spins: Vec<usize>) -> Self {
        Self { spins }
    }

    /// `(spin, run length)` pairs.
    pub fn run_length(&self) -> Vec<(usize, usize)> {
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &s in &self.spins {
            match runs.last_mut() {
                Some((last, len)) if *last == s => *len += 1,
                _ => runs.push((s, 1)),
            }
        }
        runs
    }

    pub fn from_run_length(runs: &[(usize, usize)]) -> Self {
        let spins = runs.iter().flat_map(|&(s, len)| std::iter::repeat_n(s, len)).collect();
        Self { spins }
    }
}
