//! Compare the iterative solvers on a single policy-evaluation system and
//! dump one residual-trace CSV per method.
//!
//! ```bash
//! cargo run --release --example policy_evaluation_solvers
//! ```

use mdpsolve::eval::{solve_to_tolerance, InnerMethod, StoppingRule};
use mdpsolve::linalg::inf_norm;
use mdpsolve::report::write_inner_trace_csv;
use mdpsolve::{generate_random, Policy, RandomMdpSpec};

fn main() -> mdpsolve::Result<()> {
    let model = generate_random(&RandomMdpSpec {
        n: 100,
        m: 50,
        gamma: 0.9,
        density: 0.2,
        seed: 3,
        ensure_regular: true,
    })?;
    let policy = Policy::new((0..100).map(|i| (i * 13) % 50).collect());
    let system = model.policy_system(&policy)?;
    let exact = system.solve_direct()?;

    let theta0 = vec![0.0; system.n()];
    let reference = inf_norm(&system.residual(&theta0));
    let out_dir = std::env::temp_dir().join("mdpsolve_inner_traces");
    std::fs::create_dir_all(&out_dir)?;

    let methods = [
        InnerMethod::Richardson { nu: 1.0 },
        InnerMethod::Richardson { nu: 0.7 },
        InnerMethod::Jacobi,
        InnerMethod::GaussSeidel,
        InnerMethod::Sor { omega: 1.3 },
        InnerMethod::SteepestDescent,
        InnerMethod::MinRes,
        InnerMethod::Gmres { restart: None },
    ];
    println!(
        "{:<16} {:>6} {:>12} {:>12}",
        "method", "iters", "residual", "error"
    );
    for method in methods {
        let rule = StoppingRule::new(1e-10, reference, 2000)?;
        let (theta, trace) = solve_to_tolerance(&system, &theta0, method, &rule)?;
        let error = theta
            .iter()
            .zip(exact.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let tag = match method {
            InnerMethod::Richardson { nu } => format!("richardson_nu{nu}"),
            InnerMethod::Sor { omega } => format!("sor_w{omega}"),
            other => other.to_string(),
        };
        let path = out_dir.join(format!("{tag}.csv"));
        write_inner_trace_csv(&path, &trace)?;
        println!(
            "{:<16} {:>6} {:>12.2e} {:>12.2e}",
            tag,
            trace.iterations_used,
            trace.last_residual_inf(),
            error
        );
    }
    println!("\ntraces written to {}", out_dir.display());
    Ok(())
}
