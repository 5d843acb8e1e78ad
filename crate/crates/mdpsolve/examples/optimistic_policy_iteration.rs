//! Optimistic policy iteration interpolates between value iteration (one
//! sweep per step) and policy iteration (infinitely many). More inner
//! sweeps buy fewer outer iterations at a higher cost per iteration.
//!
//! ```bash
//! cargo run --release --example optimistic_policy_iteration
//! ```

use mdpsolve::{generate_random, optimistic_policy_iteration, OuterConfig, RandomMdpSpec, ValueVector};

fn main() -> mdpsolve::Result<()> {
    let model = generate_random(&RandomMdpSpec {
        n: 200,
        m: 10,
        gamma: 0.95,
        density: 0.1,
        seed: 21,
        ensure_regular: false,
    })?;
    let v0 = ValueVector::zeros(model.num_states());

    println!("{:>6} {:>12} {:>14} {:>10}", "w", "outer iters", "total sweeps", "time [s]");
    for w in [1usize, 5, 20, 100] {
        let config = OuterConfig {
            tol: 1e-9,
            opi_w: w,
            ..OuterConfig::default()
        };
        let report = optimistic_policy_iteration(&model, &v0, &config)?;
        println!(
            "{:>6} {:>12} {:>14} {:>10.4}",
            w,
            report.outer_iters,
            report.total_inner_iters(),
            report.wall_time_s
        );
    }
    Ok(())
}
