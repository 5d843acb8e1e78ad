//! Command-line front end: model generation, classification, solving and
//! sweeps. The binary is a thin wrapper around [`run`].

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dp::{
    inexact_policy_iteration, optimistic_policy_iteration, policy_iteration, value_iteration,
    OuterConfig, TerminatedBy,
};
use crate::error::Result;
use crate::eval::InnerMethod;
use crate::io::{read_model, read_sis_params, write_model};
use crate::model::ValueVector;
use crate::random::{generate_random, RandomMdpSpec};
use crate::report::{summarize, write_summary_json, write_trace_csv};
use crate::sis::{build_sis_mdp, SisParams};
use crate::structure::{classify_matrix, classify_mdp};
use crate::sweep::{run_sweep, SweepSpec};

#[derive(Parser)]
#[command(
    name = "mdpsolve",
    version,
    about = "Solvers and benchmarks for discounted MDPs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random model and write it to a file.
    GenerateRandom {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        #[arg(long, default_value_t = 0.2)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Force every policy's transition matrix to be primitive.
        #[arg(long)]
        ensure_regular: bool,
        /// Output path (.json or .mdpb).
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a dynamic SIS epidemic model and write it to a file.
    GenerateSis {
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        /// JSON parameter file; fields missing there take defaults.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output path (.json or .mdpb).
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify the chain structure of a model.
    Classify {
        model: PathBuf,
        /// Policy enumeration cap.
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        /// Output JSON path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a model and write a trace CSV plus a summary JSON.
    Solve {
        model: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = InnerArg::Gmres)]
        inner: InnerArg,
        /// Richardson relaxation parameter.
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// Relaxation weight of the sor inner solver.
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// GMRES restart length (full GMRES when absent).
        #[arg(long)]
        restart: Option<usize>,
        /// Forcing parameter of inexact policy iteration.
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value_t = 10)]
        opi_w: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_outer: usize,
        #[arg(long, default_value_t = 500)]
        max_inner: usize,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 500.0)]
        time_budget: f64,
        /// Compute a reference solution first and fill the trace error
        /// column.
        #[arg(long, value_enum)]
        reference: Option<ReferenceArg>,
        /// Output prefix: writes <out>.trace.csv and <out>.summary.json.
        #[arg(long, default_value = "solve")]
        out: String,
    },
    /// Run a sweep described by a JSON spec file.
    Sweep {
        spec: PathBuf,
        #[arg(long, default_value = "sweep_out")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Vi,
    Pi,
    Opi,
    Ipi,
}

#[derive(Clone, Copy, ValueEnum)]
enum InnerArg {
    Richardson,
    Jacobi,
    Gs,
    Sor,
    Sd,
    Minres,
    Gmres,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReferenceArg {
    Pi,
}

#[derive(Serialize)]
struct ClassifyOutput {
    verdict: crate::structure::MdpVerdict,
    policies_checked: usize,
    per_action: Vec<ActionClassification>,
}

#[derive(Serialize)]
struct ActionClassification {
    action: usize,
    irreducible: bool,
    period: Option<usize>,
    primitive: bool,
}

/// Parses the process arguments and executes; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 1;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::GenerateRandom {
            n,
            m,
            gamma,
            density,
            seed,
            ensure_regular,
            out,
        } => {
            let spec = RandomMdpSpec {
                n,
                m,
                gamma,
                density,
                seed,
                ensure_regular,
            };
            let model = generate_random(&spec)?;
            write_model(&out, &model)?;
            println!(
                "wrote {} (n={}, m={}, gamma={})",
                out.display(),
                model.num_states(),
                model.num_actions(),
                model.gamma()
            );
            Ok(0)
        }
        Command::GenerateSis {
            population,
            gamma,
            params,
            out,
        } => {
            let mut sis = match params {
                Some(path) => read_sis_params(&path)?,
                None => SisParams::default(),
            };
            if let Some(p) = population {
                sis.population = p;
            }
            if let Some(g) = gamma {
                sis.gamma = g;
            }
            let model = build_sis_mdp(&sis)?;
            write_model(&out, &model)?;
            println!(
                "wrote {} (population={}, n={}, m={})",
                out.display(),
                sis.population,
                model.num_states(),
                model.num_actions()
            );
            Ok(0)
        }
        Command::Classify { model, cap, out } => {
            let mdp = read_model(&model)?;
            let class = classify_mdp(&mdp, cap);
            let per_action = (0..mdp.num_actions())
                .map(|a| {
                    let c = classify_matrix(mdp.transition(a))?;
                    Ok(ActionClassification {
                        action: a,
                        irreducible: c.irreducible,
                        period: c.period,
                        primitive: c.primitive,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let output = ClassifyOutput {
                verdict: class.verdict,
                policies_checked: class.policies_checked,
                per_action,
            };
            let text = serde_json::to_string_pretty(&output)?;
            match out {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => println!("{text}"),
            }
            Ok(0)
        }
        Command::Solve {
            model,
            method,
            inner,
            nu,
            omega,
            restart,
            alpha,
            opi_w,
            tol,
            max_outer,
            max_inner,
            time_budget,
            reference,
            out,
        } => {
            let mdp = read_model(&model)?;
            let inner_method = match inner {
                InnerArg::Richardson => InnerMethod::Richardson { nu },
                InnerArg::Jacobi => InnerMethod::Jacobi,
                InnerArg::Gs => InnerMethod::GaussSeidel,
                InnerArg::Sor => InnerMethod::Sor { omega },
                InnerArg::Sd => InnerMethod::SteepestDescent,
                InnerArg::Minres => InnerMethod::MinRes,
                InnerArg::Gmres => InnerMethod::Gmres { restart },
            };
            let mut config = OuterConfig {
                tol,
                max_outer_iters: max_outer,
                time_budget_s: Some(time_budget),
                alpha,
                inner_method,
                max_inner_iters: max_inner,
                opi_w,
                ..OuterConfig::default()
            };
            if matches!(reference, Some(ReferenceArg::Pi)) {
                let ref_config = OuterConfig {
                    tol: 1e-12,
                    ..OuterConfig::default()
                };
                let v0 = ValueVector::zeros(mdp.num_states());
                let reference_report = policy_iteration(&mdp, &v0, &ref_config)?;
                config.reference = Some(reference_report.final_value.to_vec());
            }
            let v0 = ValueVector::zeros(mdp.num_states());
            let (label, report, used_alpha) = match method {
                MethodArg::Vi => ("vi".to_string(), value_iteration(&mdp, &v0, &config)?, None),
                MethodArg::Pi => ("pi".to_string(), policy_iteration(&mdp, &v0, &config)?, None),
                MethodArg::Opi => (
                    format!("opi(w={opi_w})"),
                    optimistic_policy_iteration(&mdp, &v0, &config)?,
                    None,
                ),
                MethodArg::Ipi => (
                    format!("ipi-{}", config.inner_method),
                    inexact_policy_iteration(&mdp, &v0, &config)?,
                    Some(alpha),
                ),
            };
            write_trace_csv(Path::new(&format!("{out}.trace.csv")), &report)?;
            let summary = summarize(&label, &mdp, used_alpha, &report);
            write_summary_json(Path::new(&format!("{out}.summary.json")), &summary)?;
            println!(
                "{label}: outer_iters={} final_residual_inf={:e} wall_time_s={:.3} ({})",
                report.outer_iters,
                report.final_residual_inf(),
                report.wall_time_s,
                serde_json::to_value(report.terminated_by)?
                    .as_str()
                    .unwrap_or("?")
            );
            Ok(match report.terminated_by {
                TerminatedBy::Tolerance => 0,
                TerminatedBy::MaxIters | TerminatedBy::TimeBudget => 2,
            })
        }
        Command::Sweep { spec, out_dir } => {
            let text = std::fs::read_to_string(&spec)?;
            let sweep: SweepSpec = serde_json::from_str(&text)?;
            let cells = run_sweep(&sweep, &out_dir)?;
            let failures = cells.iter().filter(|c| c.status != "ok").count();
            println!(
                "sweep finished: {} cells, {} failed, results in {}",
                cells.len(),
                failures,
                out_dir.display()
            );
            Ok(0)
        }
    }
}
