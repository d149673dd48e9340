//! Null and planted instances of a random colouring model, with their short-cycle census.

use gibbs_forge::census::census_of;
use gibbs_forge::instances::{factor_count, is_balanced, sample_null, sample_planted};
use gibbs_forge::models::ModelSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gibbs_forge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let spec = ModelSpec::colouring(4, 2)?;
    let (n, d) = (2000, 3.0);
    let m = factor_count(n, d, 2);

    let null = sample_null(n, m, 2, &spec, &mut rng)?;
    let census = census_of(&null, Some(7));
    println!("null: n={} m={} mean degree {:.3}", null.n(), null.m(), null.mean_degree());
    println!("  cycles shorter than 7: {}, in family: {}", census.short_cycles.len(), census.in_family_g);

    let planted = sample_planted(n, m, 2, &spec, &mut rng)?;
    let violated = planted
        .graph
        .factors()
        .iter()
        .filter(|f| planted.ground_truth[f.vars[0]] == planted.ground_truth[f.vars[1]])
        .count();
    println!("planted: ground truth violates {violated} constraints");
    println!("  ground truth balanced (c=3): {}", is_balanced(&planted.ground_truth, 4, 3.0));
    Ok(())
}
