//! Build a dynamic SIS epidemic model, solve it with exact and inexact
//! policy iteration, and read off the recommended intervention levels.
//!
//! ```bash
//! cargo run --release --example sis_policy
//! ```

use mdpsolve::report::{summarize, write_summary_json, write_trace_csv};
use mdpsolve::sis::action_levels;
use mdpsolve::{
    build_sis_mdp, inexact_policy_iteration, policy_iteration, InnerMethod, OuterConfig,
    SisParams, ValueVector,
};

fn main() -> mdpsolve::Result<()> {
    let params = SisParams::new(300, 0.9);
    let model = build_sis_mdp(&params)?;
    let n = model.num_states();
    println!(
        "SIS model: population {}, {} states x {} actions, {} transition entries",
        params.population,
        n,
        model.num_actions(),
        (0..model.num_actions()).map(|a| model.transition(a).nnz()).sum::<usize>()
    );

    let v0 = ValueVector::zeros(n);
    let config = OuterConfig {
        tol: 1e-8,
        ..OuterConfig::default()
    };
    let pi = policy_iteration(&model, &v0, &config)?;
    let ipi = inexact_policy_iteration(
        &model,
        &v0,
        &OuterConfig {
            alpha: 0.1,
            inner_method: InnerMethod::Gmres { restart: None },
            ..config
        },
    )?;
    println!(
        "exact PI:   {} outer iterations in {:.3} s",
        pi.outer_iters, pi.wall_time_s
    );
    println!(
        "iGMRES-PI:  {} outer iterations, {} inner, in {:.3} s",
        ipi.outer_iters,
        ipi.total_inner_iters(),
        ipi.wall_time_s
    );

    println!("\nrecommended measures by susceptible count:");
    println!("{:>12} {:>10} {:>12} {:>12}", "susceptible", "infected", "hygiene", "distancing");
    for s in (0..n).step_by(n / 10) {
        let (hygiene, distancing) = action_levels(ipi.final_policy.actions()[s]);
        println!(
            "{:>12} {:>10} {:>12} {:>12}",
            s,
            params.population - s,
            hygiene,
            distancing
        );
    }

    let out_dir = std::env::temp_dir().join("mdpsolve_sis");
    std::fs::create_dir_all(&out_dir)?;
    write_trace_csv(&out_dir.join("igmres_pi.trace.csv"), &ipi)?;
    write_summary_json(
        &out_dir.join("igmres_pi.summary.json"),
        &summarize("ipi-gmres", &model, Some(0.1), &ipi),
    )?;
    println!("\ntrace and summary written to {}", out_dir.display());
    Ok(())
}
