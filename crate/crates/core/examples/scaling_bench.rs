//! Generation and sampling time against n, with the fitted log-log slope.

use gibbs_forge::harness::{bench, loglog_slope};
use gibbs_forge::models::ModelSpec;
use gibbs_forge::sampler::{FailPolicy, SamplerKind};

fn main() -> gibbs_forge::Result<()> {
    let spec = ModelSpec::colouring(5, 2)?;
    let ns = [1_000, 3_000, 10_000, 30_000];
    let rows = bench(&spec, 2.0, &ns, SamplerKind::RSampler, FailPolicy::RetryStep(10_000), 1)?;
    println!("{:>7} {:>7} {:>8} {:>8} {:>12}", "n", "m", "status", "retries", "sample_ms");
    for r in &rows {
        println!(
            "{:>7} {:>7} {:>8} {:>8} {:>12.3}",
            r.n,
            r.m,
            format!("{:?}", r.status),
            r.step_retries,
            r.sample_ns as f64 / 1e6
        );
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.sample_ns as f64)).collect();
    println!("log-log slope {:.2}", loglog_slope(&pts));
    Ok(())
}
