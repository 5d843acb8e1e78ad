//! Persist models to disk, read them back, and drive a small solver sweep
//! from the library (the `mdpsolve` binary exposes the same machinery as
//! subcommands).
//!
//! ```bash
//! cargo run --release --example model_files_and_sweeps
//! ```

use mdpsolve::io::{read_model, write_model};
use mdpsolve::sweep::{run_sweep, ModelSource, SolverSpec, SweepAxis, SweepSpec};
use mdpsolve::{generate_random, RandomMdpSpec, SisParams};

fn main() -> mdpsolve::Result<()> {
    let dir = std::env::temp_dir().join("mdpsolve_files");
    std::fs::create_dir_all(&dir)?;

    // Round-trip through both on-disk formats.
    let model = generate_random(&RandomMdpSpec {
        n: 50,
        m: 4,
        gamma: 0.9,
        density: 0.2,
        seed: 123,
        ensure_regular: false,
    })?;
    for name in ["model.json", "model.mdpb"] {
        let path = dir.join(name);
        write_model(&path, &model)?;
        let back = read_model(&path)?;
        println!(
            "{name}: {} bytes, reread n={} m={} nnz={}",
            std::fs::metadata(&path)?.len(),
            back.num_states(),
            back.num_actions(),
            (0..back.num_actions()).map(|a| back.transition(a).nnz()).sum::<usize>()
        );
    }

    // Discount-factor sweep of two solvers over a small epidemic model.
    let spec = SweepSpec {
        axis: SweepAxis::Gamma,
        values: vec![0.3, 0.6, 0.9],
        solvers: vec![
            SolverSpec {
                outer: "pi".into(),
                inner: None,
                alpha: None,
                nu: None,
                omega: None,
                restart: None,
                opi_w: None,
                label: None,
            },
            SolverSpec {
                outer: "ipi".into(),
                inner: Some("gmres".into()),
                alpha: Some(0.1),
                nu: None,
                omega: None,
                restart: None,
                opi_w: None,
                label: None,
            },
        ],
        base: ModelSource::Sis(SisParams::new(150, 0.9)),
        tol: 1e-8,
        max_outer: None,
        max_inner: None,
        time_budget_s: None,
    };
    let out_dir = dir.join("sweep");
    let cells = run_sweep(&spec, &out_dir)?;
    println!("\nsweep cells:");
    for cell in &cells {
        match &cell.summary {
            Some(s) => println!(
                "  gamma={:<4} {:<16} {:>3} outer, {:>5} inner, {:.4} s",
                cell.axis_value, cell.solver, s.outer_iters, s.total_inner_iters, s.wall_time_s
            ),
            None => println!("  gamma={:<4} {:<16} {}", cell.axis_value, cell.solver, cell.status),
        }
    }
    println!("aggregate CSV at {}", out_dir.join("sweep.csv").display());
    Ok(())
}
