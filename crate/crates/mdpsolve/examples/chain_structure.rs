//! Structural analysis of transition matrices: irreducibility, period,
//! primitivity, whole-MDP classification, and definiteness of the symmetric
//! part of the policy-evaluation coefficient matrix.
//!
//! ```bash
//! cargo run --example chain_structure
//! ```

use mdpsolve::linalg::CsrMatrix;
use mdpsolve::structure::{classify_matrix, classify_mdp, symmetric_part_analysis};
use mdpsolve::{generate_random, MdpModel, RandomMdpSpec};

fn main() -> mdpsolve::Result<()> {
    let swap = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)])?;
    let uniform = CsrMatrix::from_triplets(
        2,
        2,
        &[(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.5)],
    )?;
    let two_islands = CsrMatrix::identity(2);

    for (name, p) in [("swap", &swap), ("uniform", &uniform), ("islands", &two_islands)] {
        let c = classify_matrix(p)?;
        println!(
            "{name:<8} irreducible={} period={:?} primitive={}",
            c.irreducible, c.period, c.primitive
        );
    }

    // A model whose ergodicity depends on the policy: enumerate and classify.
    let mixed = MdpModel::build(
        2,
        2,
        0.5,
        &[
            (0, 0, 0, 1.0),
            (1, 0, 1, 1.0),
            (0, 1, 1, 1.0),
            (1, 1, 0, 1.0),
        ],
        vec![vec![0.0, 1.0], vec![2.0, 1.0]],
    )?;
    let class = classify_mdp(&mixed, 1000);
    println!(
        "mixed 2x2 model: verdict {:?} after {} policies",
        class.verdict, class.policies_checked
    );

    let regular = generate_random(&RandomMdpSpec {
        n: 6,
        m: 3,
        gamma: 0.9,
        density: 0.5,
        seed: 1,
        ensure_regular: true,
    })?;
    let class = classify_mdp(&regular, 1_000_000);
    println!(
        "seeded regular model: verdict {:?} after {} policies",
        class.verdict, class.policies_checked
    );

    // Definiteness of the symmetric part decides when residual-minimizing
    // solvers have guaranteed contraction.
    println!("\nsymmetric-part threshold on a lopsided chain:");
    let lopsided = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 0.2), (1, 1, 0.8)])?;
    for gamma in [0.5, 0.85, 0.95] {
        let a = symmetric_part_analysis(&lopsided, gamma)?;
        println!(
            "  gamma={gamma}: lambda_min={:+.4}, positive definite={}, threshold={:.4}",
            a.lambda_min, a.positive_definite, a.gamma_threshold
        );
    }
    Ok(())
}
