use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gibbs_forge::census::census_of;
use gibbs_forge::graph::FactorGraph;
use gibbs_forge::harness::{
    bench, loglog_slope, residuals_csv, run_replicas, slack, to_jsonl, tv_against_gibbs, verify_db,
    ExperimentConfig, Mode, ReplicaRecord, Report,
};
use gibbs_forge::models::ModelSpec;
use gibbs_forge::sampler::{FailPolicy, SamplerKind};
use gibbs_forge::Error;

#[derive(Parser)]
#[command(name = "gibbs-forge", version, about = "Edge-by-edge sampling of symmetric Gibbs distributions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance in the text format.
    Gen(Common),
    /// Run sampler replicas and write one JSON record per replica.
    Sample(Common),
    /// Detailed-balance residuals on the embedded six-variable fixtures (CSV).
    VerifyDb(Common),
    /// Empirical total variation of the sampler against the exact Gibbs distribution.
    Tv(Common),
    /// Slack of the disagreement-rate condition.
    Slack(Common),
    /// Wall-clock timings over a range of sizes.
    Bench(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Rsampler,
    Fixsampler,
}

#[derive(Args)]
struct Common {
    /// Model family: potts, colouring, ising, nae, kspin.
    #[arg(long)]
    model: Option<String>,
    /// `key=value` model file (model, q, k, beta, coupling).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    d: f64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    q: Option<usize>,
    /// Inverse temperature; "-inf" for hard constraints.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Census threshold override.
    #[arg(long)]
    threshold: Option<usize>,
    /// Read the instance from a file instead of generating it.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Kind::Rsampler)]
    sampler: Kind,
    /// Rerun a failed replica up to this many extra times.
    #[arg(long, default_value_t = 0)]
    retry: usize,
    /// Generate a planted instance.
    #[arg(long)]
    planted: bool,
    /// Sizes for `bench` (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [1000usize, 10000, 100000])]
    sizes: Vec<usize>,
    /// `bench`: retry a failed step up to this many times so runs complete (timing only).
    #[arg(long, default_value_t = 0)]
    step_retry: usize,
    /// `tv` exits with code 3 when the estimate exceeds this.
    #[arg(long)]
    max_tv: Option<f64>,
}

enum Failure {
    Config(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl Common {
    fn spec(&self) -> Result<ModelSpec, Error> {
        match (&self.config, &self.model) {
            (Some(path), _) => ModelSpec::from_kv(&fs::read_to_string(path)?),
            (None, Some(m)) => ModelSpec::from_parts(m, self.q, self.k, self.beta.as_deref()),
            (None, None) => Err(Error::InvalidSpec("give --model or --config".into())),
        }
    }

    fn experiment(&self, mode: Mode) -> Result<ExperimentConfig, Error> {
        let model = self.spec()?;
        let mut cfg = ExperimentConfig::new(mode, model, self.n, self.d);
        cfg.replicas = self.samples;
        cfg.seed = self.seed;
        cfg.threshold = self.threshold;
        cfg.retry = self.retry;
        cfg.planted = self.planted;
        cfg.sampler = match self.sampler {
            Kind::Rsampler => SamplerKind::RSampler,
            Kind::Fixsampler => SamplerKind::FixSampler,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn instance(&self, cfg: &ExperimentConfig) -> Result<FactorGraph, Error> {
        match &self.input {
            Some(path) => Ok(FactorGraph::from_text(&fs::read_to_string(path)?)?.0),
            None => Ok(cfg.instance()?.0),
        }
    }

    fn emit(&self, body: &str) -> Result<(), Error> {
        match &self.out {
            Some(path) => Ok(fs::write(path, body)?),
            None => match std::io::stdout().lock().write_all(body.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            },
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Gen(c) => {
            let cfg = c.experiment(Mode::Gen)?;
            let (g, truth) = cfg.instance()?;
            let mut text = g.to_text();
            if let Some(t) = truth {
                text.push_str("truth");
                for s in t {
                    text.push_str(&format!(" {s}"));
                }
                text.push('\n');
            }
            c.emit(&text)?;
        }
        Cmd::Sample(c) => {
            let cfg = c.experiment(Mode::Sample)?;
            let g = c.instance(&cfg)?;
            let census = census_of(&g, cfg.threshold);
            let recs = run_replicas(&g, cfg.sampler, &census, cfg.replicas, cfg.seed, cfg.retry)?;
            match c.format {
                Format::Json => c.emit(&to_jsonl(&recs))?,
                Format::Csv => {
                    let mut out = String::from("replica,status,fail_reason,steps,attempts,wall_ns\n");
                    for r in &recs {
                        let reason = r.fail_reason.map(|f| format!("{f:?}")).unwrap_or_default();
                        out.push_str(&format!(
                            "{},{:?},{},{},{},{}\n",
                            r.replica, r.status, reason, r.steps, r.attempts, r.wall_ns
                        ));
                    }
                    c.emit(&out)?;
                }
            }
        }
        Cmd::VerifyDb(c) => {
            let cfg = c.experiment(Mode::VerifyDb)?;
            let rows = verify_db(&cfg.model)?;
            let worst = rows.iter().map(|(_, r)| r.residual).fold(0.0, f64::max);
            match c.format {
                Format::Csv => c.emit(&residuals_csv(&rows))?,
                Format::Json => {
                    #[derive(Serialize)]
                    struct Summary {
                        pairs: usize,
                        max_residual: f64,
                    }
                    c.emit(&json(&Report::new(&cfg, Summary { pairs: rows.len(), max_residual: worst })))?
                }
            }
            if worst > 1e-9 {
                return Err(Failure::Verification(format!("max residual {worst:e} exceeds 1e-9")));
            }
        }
        Cmd::Tv(c) => {
            let cfg = c.experiment(Mode::Tv)?;
            let g = c.instance(&cfg)?;
            let census = census_of(&g, cfg.threshold);
            let recs = run_replicas(&g, cfg.sampler, &census, cfg.replicas, cfg.seed, cfg.retry)?;
            let outcomes: Vec<_> = recs.iter().map(ReplicaRecord::outcome).collect();
            let rep = tv_against_gibbs(&g, &outcomes)?;
            match c.format {
                Format::Json => c.emit(&json(&Report::new(&cfg, &rep)))?,
                Format::Csv => c.emit(&format!(
                    "tv,noise_bound,fail_mass,replicas,support,method\n{},{},{},{},{},{:?}\n",
                    rep.tv, rep.noise_bound, rep.fail_mass, rep.replicas, rep.support, rep.method
                ))?,
            }
            if let Some(max) = c.max_tv {
                if rep.tv > max {
                    return Err(Failure::Verification(format!("tv {} exceeds {max}", rep.tv)));
                }
            }
        }
        Cmd::Slack(c) => {
            let cfg = c.experiment(Mode::Slack)?;
            let rep = slack(&cfg);
            match c.format {
                Format::Json => c.emit(&json(&Report::new(&cfg, rep)))?,
                Format::Csv => c.emit(&format!(
                    "rate,bound,slack,holds\n{},{},{},{}\n",
                    rep.rate, rep.bound, rep.slack, rep.holds
                ))?,
            }
        }
        Cmd::Bench(c) => {
            let cfg = c.experiment(Mode::Bench)?;
            let policy = if c.step_retry > 0 { FailPolicy::RetryStep(c.step_retry) } else { FailPolicy::Abort };
            let rows = bench(&cfg.model, cfg.d, &c.sizes, cfg.sampler, policy, cfg.seed)?;
            match c.format {
                Format::Json => c.emit(&json(&Report::new(&cfg, &rows)))?,
                Format::Csv => {
                    let mut out = String::from("n,m,status,steps,step_retries,generate_ns,sample_ns\n");
                    for r in &rows {
                        out.push_str(&format!(
                            "{},{},{:?},{},{},{},{}\n",
                            r.n, r.m, r.status, r.steps, r.step_retries, r.generate_ns, r.sample_ns
                        ));
                    }
                    c.emit(&out)?;
                }
            }
            if rows.len() >= 2 {
                let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.sample_ns.max(1) as f64)).collect();
                eprintln!("log-log slope: {:.3}", loglog_slope(&pts));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
    }
}
