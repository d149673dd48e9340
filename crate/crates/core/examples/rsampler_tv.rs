//! Runs the cycle-aware sampler on a small random instance and compares with the exact law.

use gibbs_forge::harness::{tv_experiment, ExperimentConfig, Mode};
use gibbs_forge::models::ModelSpec;
use gibbs_forge::sampler::SamplerKind;

fn main() -> gibbs_forge::Result<()> {
    for kind in [SamplerKind::RSampler, SamplerKind::FixSampler] {
        let mut cfg = ExperimentConfig::new(Mode::Tv, ModelSpec::colouring(3, 2)?, 6, 1.6);
        cfg.replicas = 200_000;
        cfg.seed = 7;
        cfg.threshold = Some(13);
        cfg.sampler = kind;
        let r = tv_experiment(&cfg)?;
        println!(
            "{kind:?}: tv {:.4} (noise {:.4}), fail mass {:.4}, support {}",
            r.tv, r.noise_bound, r.fail_mass, r.support
        );
    }
    Ok(())
}
