//! Exact draws on a short cycle: the closing factor's arguments, then the rest of the cycle.

use std::sync::Arc;

use gibbs_forge::census::census_of;
use gibbs_forge::decide::RngDecider;
use gibbs_forge::dp::{pinned_node_marginal, sample_boundary_of_h, sample_xi_given_boundary, HSubgraph};
use gibbs_forge::graph::FactorGraph;
use gibbs_forge::models::potts_table;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gibbs_forge::Result<()> {
    let len = 5;
    let table = Arc::new(potts_table(3, 2, -1.2)?);
    let mut g = FactorGraph::new(len, 3, 2)?;
    for i in 0..len {
        g.add_factor(vec![i, (i + 1) % len], table.clone())?;
    }
    let census = census_of(&g, Some(2 * len + 1));
    let closing = len - 1;
    let h = HSubgraph::new(&g, &census.short_cycles[0], closing)?;
    println!("cycle vars {:?}, boundary {:?}", h.cycle.vars, h.boundary);
    println!("law of the first boundary node: {:?}", pinned_node_marginal(&g, &h)?);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let mut dec = RngDecider::new(&mut rng);
        let kappa = sample_boundary_of_h(&g, &h, &mut dec)?;
        let xi = sample_xi_given_boundary(&g, &h, &kappa, &mut dec)?;
        println!("boundary {kappa:?} rest {xi:?}");
    }
    Ok(())
}
