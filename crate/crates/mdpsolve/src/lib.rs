//! Solvers for infinite-horizon discounted Markov decision processes with
//! finite state and action spaces.
//!
//! The crate provides:
//!
//! - the model itself with its Bellman operators ([`model`]),
//! - outer solvers: value iteration, policy iteration, optimistic policy
//!   iteration and inexact policy iteration ([`dp`]),
//! - iterative inner solvers for the policy-evaluation linear system:
//!   Richardson (plain and Jacobi/Gauss-Seidel/SOR preconditioned), steepest
//!   descent, minimal residual and GMRES ([`eval`]),
//! - structural analysis of transition matrices: irreducibility, period,
//!   MDP classification, relaxation intervals and definiteness of the
//!   symmetric part ([`structure`]),
//! - a dynamic SIS epidemic MDP generator for benchmarking ([`sis`]),
//! - seeded random instances, model files, traces and sweeps
//!   ([`random`], [`io`], [`report`], [`sweep`]).
//!
//! The `examples/` directory walks through each capability; the `mdpsolve`
//! binary exposes generation, classification, solving and sweeps on the
//! command line.
//!
//! ```
//! use mdpsolve::{build_sis_mdp, inexact_policy_iteration, OuterConfig, SisParams, ValueVector};
//!
//! let model = build_sis_mdp(&SisParams::new(50, 0.9)).unwrap();
//! let v0 = ValueVector::zeros(model.num_states());
//! let report = inexact_policy_iteration(&model, &v0, &OuterConfig::default()).unwrap();
//! assert!(report.final_residual_inf() <= 1e-8);
//! ```

pub mod cli;
pub mod dp;
pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod model;
pub mod random;
pub mod report;
pub mod sis;
pub mod structure;
pub mod sweep;

pub use dp::{
    brute_force_optimal, inexact_policy_iteration, optimistic_policy_iteration, policy_iteration,
    value_iteration, OuterConfig, SolveReport, TerminatedBy,
};
pub use error::{Error, Result};
pub use eval::{
    gauss_seidel_sweep, gmres, jacobi_step, minres_step, richardson_step, solve_to_tolerance,
    sor_sweep, steepest_descent_step, InnerMethod, InnerTrace, StoppingRule,
};
pub use linalg::CsrMatrix;
pub use model::{MdpModel, Policy, PolicyLinearSystem, ValueVector};
pub use random::{generate_random, RandomMdpSpec};
pub use sis::{build_sis_mdp, SisParams};
pub use structure::{
    classify_mdp, is_irreducible, minimal_polynomial_degree, period_and_primitivity,
    richardson_nu_lower, symmetric_part_analysis, MatrixClassification, MdpClass, MdpVerdict,
};
