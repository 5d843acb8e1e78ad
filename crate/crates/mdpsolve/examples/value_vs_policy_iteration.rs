//! Race value iteration against policy iteration on a mid-size random
//! instance and compare iteration counts and wall-clock time.
//!
//! ```bash
//! cargo run --release --example value_vs_policy_iteration
//! ```

use mdpsolve::{
    generate_random, policy_iteration, value_iteration, OuterConfig, RandomMdpSpec, ValueVector,
};

fn main() -> mdpsolve::Result<()> {
    let spec = RandomMdpSpec {
        n: 100,
        m: 40,
        gamma: 0.9,
        density: 0.2,
        seed: 7,
        ensure_regular: false,
    };
    let model = generate_random(&spec)?;
    let v0 = ValueVector::zeros(model.num_states());
    let config = OuterConfig {
        tol: 1e-9,
        ..OuterConfig::default()
    };

    let pi = policy_iteration(&model, &v0, &config)?;
    let vi = value_iteration(&model, &v0, &config)?;

    println!("n={}, m={}, gamma={}, tol=1e-9", spec.n, spec.m, spec.gamma);
    println!(
        "policy iteration: {:>4} iterations, {:.4} s, final residual {:.2e}",
        pi.outer_iters,
        pi.wall_time_s,
        pi.final_residual_inf()
    );
    println!(
        "value iteration:  {:>4} iterations, {:.4} s, final residual {:.2e}",
        vi.outer_iters,
        vi.wall_time_s,
        vi.final_residual_inf()
    );

    let gap = pi
        .final_value
        .iter()
        .zip(vi.final_value.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("solutions agree within {gap:.2e}");
    Ok(())
}
