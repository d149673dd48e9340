//! Partition function and conditional marginals of a small Potts instance by brute force.

use std::sync::Arc;

use gibbs_forge::exact::{exact_conditional, partition_function};
use gibbs_forge::graph::FactorGraph;
use gibbs_forge::models::potts_table;

fn main() -> gibbs_forge::Result<()> {
    let table = Arc::new(potts_table(3, 2, -0.8)?);
    let mut g = FactorGraph::new(5, 3, 2)?;
    for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)] {
        g.add_factor(vec![a, b], table.clone())?;
    }
    println!("Z = {:.6}", partition_function(&g)?);

    let law = exact_conditional(&g, &[2, 4], &[(0, 1)])?;
    println!("law of (x2, x4) given x0 = 1:");
    for (o, p) in law.iter() {
        println!("  {o:?}  {p:.6}");
    }
    Ok(())
}
