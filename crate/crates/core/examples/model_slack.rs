//! Disagreement rates and the slack of the rate condition across model families.

use gibbs_forge::models::{b1_slack, beta_potts, Coupling, ModelSpec};

fn main() -> gibbs_forge::Result<()> {
    let d = 2.5;
    let models = [
        ("colouring q=5", ModelSpec::colouring(5, 2)?),
        ("potts q=3 beta=-1", ModelSpec::potts(3, 2, -1.0)?),
        ("ising beta=-0.3", ModelSpec::ising(2, -0.3, 0.0)?),
        ("nae k=4", ModelSpec::nae(4)?),
        ("2-spin beta=0.4", ModelSpec::kspin(2, 0.4, Coupling::StandardGaussian)?),
    ];
    println!("{:<20} {:>8} {:>8} {:>8} holds", "model", "rate", "bound", "slack");
    for (name, spec) in &models {
        let s = b1_slack(spec, d);
        println!("{name:<20} {:>8.4} {:>8.4} {:>8.4} {}", s.rate, s.bound, s.slack, s.holds);
    }
    println!("antiferromagnetic Potts threshold at degree 6, q=3: {:.4}", beta_potts(6.0, 3, 2)?);
    Ok(())
}
