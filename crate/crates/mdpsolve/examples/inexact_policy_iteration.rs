//! Inexact policy iteration replaces exact policy evaluation with an
//! iterative solve stopped at a relative residual alpha. This example runs
//! the same instance with each inner solver and shows how the choice drives
//! the inner-iteration bill.
//!
//! ```bash
//! cargo run --release --example inexact_policy_iteration
//! ```

use mdpsolve::{
    generate_random, inexact_policy_iteration, InnerMethod, OuterConfig, RandomMdpSpec,
    ValueVector,
};

fn main() -> mdpsolve::Result<()> {
    let model = generate_random(&RandomMdpSpec {
        n: 500,
        m: 10,
        gamma: 0.9,
        density: 0.05,
        seed: 11,
        ensure_regular: false,
    })?;
    let v0 = ValueVector::zeros(model.num_states());

    let methods = [
        InnerMethod::Richardson { nu: 1.0 },
        InnerMethod::Jacobi,
        InnerMethod::GaussSeidel,
        InnerMethod::Sor { omega: 1.2 },
        InnerMethod::SteepestDescent,
        InnerMethod::MinRes,
        InnerMethod::Gmres { restart: None },
    ];
    println!(
        "{:<12} {:>6} {:>12} {:>10} {:>14}",
        "inner", "outer", "total inner", "time [s]", "final residual"
    );
    for method in methods {
        let config = OuterConfig {
            tol: 1e-8,
            alpha: 0.1,
            inner_method: method,
            ..OuterConfig::default()
        };
        let report = inexact_policy_iteration(&model, &v0, &config)?;
        println!(
            "{:<12} {:>6} {:>12} {:>10.4} {:>14.2e}",
            method.to_string(),
            report.outer_iters,
            report.total_inner_iters(),
            report.wall_time_s,
            report.final_residual_inf()
        );
    }
    println!("\nper-outer inner iterations with gmres:");
    let config = OuterConfig {
        tol: 1e-8,
        alpha: 0.1,
        inner_method: InnerMethod::Gmres { restart: None },
        ..OuterConfig::default()
    };
    let report = inexact_policy_iteration(&model, &v0, &config)?;
    println!("{:?}", &report.inner_iters_history[1..]);
    Ok(())
}
