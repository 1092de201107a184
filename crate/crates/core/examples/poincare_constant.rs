//! λ₁ of the cotangent Laplacian on the unit sphere (exact value 2) and the next eigenvalues.

use dampwave::mesh::generate_icosphere;
use dampwave::operators::{lowest_eigenpairs, DiscreteOperators, EigenOptions};
use dampwave::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for s in 2..=4 {
        let m = generate_icosphere(Vec3::zeros(), 1.0, s)?;
        let ops = DiscreteOperators::assemble(&m)?;
        let pairs = lowest_eigenpairs(&ops.stiffness, &ops.mass, 8, EigenOptions::default())?;
        let vals: Vec<String> = pairs.values.iter().map(|v| format!("{v:.5}")).collect();
        println!("subdiv {s}: {}   (continuum: 2 ×3, 6 ×5)", vals.join(" "));
    }
    Ok(())
}
