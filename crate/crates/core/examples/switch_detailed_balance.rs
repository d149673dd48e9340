//! Detailed-balance residuals of the switching processes on small fixtures.

use gibbs_forge::harness::{residuals_csv, verify_db};
use gibbs_forge::models::ModelSpec;

fn main() -> gibbs_forge::Result<()> {
    for spec in [ModelSpec::colouring(3, 2)?, ModelSpec::potts(2, 2, -0.9)?] {
        let rows = verify_db(&spec)?;
        let worst = rows.iter().map(|(_, r)| r.residual).fold(0.0, f64::max);
        println!("q={} beta={:?}: {} pairs, max residual {worst:.2e}", spec.q, spec.beta, rows.len());
        if std::env::args().any(|a| a == "--csv") {
            print!("{}", residuals_csv(&rows));
        }
    }
    Ok(())
}
