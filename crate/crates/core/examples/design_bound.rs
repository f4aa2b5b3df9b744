//! Dimensions of the U(N) irreps behind unitary t-designs and the resulting
//! lower bound on design size.

use plateau::haar::{design_cardinality_bound, design_dimension, irrep_dimension, Partition};

fn main() -> plateau::Result<()> {
    for n in [2usize, 4, 8] {
        let dims: Vec<String> = (1..=3).map(|t| design_cardinality_bound(n, t).map(|d| d.to_string())).collect::<Result<_, _>>()?;
        println!("N = {n}: |design| >= {} for t = 1, 2, 3", dims.join(", "));
    }
    println!("D(2,1,0) = {}, D(2,1,1) = {}", design_dimension(2, 1, 0)?, design_dimension(2, 1, 1)?);
    let adjoint = Partition::new(vec![1, 0, 0, -1])?;
    println!("dim of the (1,0,0,-1) irrep of U(4): {}", irrep_dimension(&adjoint, 4)?);
    Ok(())
}
