//! Iterative solvers for the policy-evaluation system `(I - gamma P) theta
//! = g`: relaxation schemes, line-search methods and GMRES, driven by a
//! relative-residual stopping rule.

mod gmres;
mod steps;

pub use gmres::{gmres, gmres_restarted};
pub use steps::{
    gauss_seidel_sweep, jacobi_step, minres_step, richardson_step, sor_sweep,
    steepest_descent_step,
};

use crate::error::{Error, Result};
use crate::linalg::{inf_norm, two_norm};
use crate::model::PolicyLinearSystem;

/// Line-search denominators below this are treated as a numerically zero
/// residual and the iterate is returned unchanged.
pub(crate) const LINE_SEARCH_GUARD: f64 = 1e-300;

/// Default inner-iteration cap.
pub const DEFAULT_MAX_INNER_ITERS: usize = 500;

/// Relative-residual stopping rule: accept `theta` once
/// `||g - (I - gamma P) theta||_inf <= alpha * reference`.
#[derive(Debug, Clone, Copy)]
pub struct StoppingRule {
    alpha: f64,
    reference_residual_inf: f64,
    max_inner_iters: usize,
}

impl StoppingRule {
    pub fn new(alpha: f64, reference_residual_inf: f64, max_inner_iters: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
            });
        }
        if reference_residual_inf < 0.0 || !reference_residual_inf.is_finite() {
            return Err(Error::InvalidParameter {
                name: "reference_residual_inf",
                value: reference_residual_inf,
            });
        }
        if max_inner_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_inner_iters",
                value: 0.0,
            });
        }
        Ok(StoppingRule {
            alpha,
            reference_residual_inf,
            max_inner_iters,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn reference_residual_inf(&self) -> f64 {
        self.reference_residual_inf
    }

    pub fn max_inner_iters(&self) -> usize {
        self.max_inner_iters
    }

    pub fn satisfied(&self, residual_inf: f64) -> bool {
        residual_inf <= self.alpha * self.reference_residual_inf
    }
}

/// Which iterative scheme evaluates a policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerMethod {
    Richardson { nu: f64 },
    Jacobi,
    GaussSeidel,
    Sor { omega: f64 },
    SteepestDescent,
    MinRes,
    Gmres { restart: Option<usize> },
}

impl InnerMethod {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InnerMethod::Richardson { nu } if nu <= 0.0 => {
                Err(Error::InvalidParameter { name: "nu", value: nu })
            }
            InnerMethod::Sor { omega } if !(omega > 0.0 && omega < 2.0) => {
                Err(Error::InvalidParameter {
                    name: "omega",
                    value: omega,
                })
            }
            InnerMethod::Gmres { restart: Some(0) } => Err(Error::InvalidParameter {
                name: "restart",
                value: 0.0,
            }),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InnerMethod::Richardson { .. } => "richardson",
            InnerMethod::Jacobi => "jacobi",
            InnerMethod::GaussSeidel => "gs",
            InnerMethod::Sor { .. } => "sor",
            InnerMethod::SteepestDescent => "sd",
            InnerMethod::MinRes => "minres",
            InnerMethod::Gmres { .. } => "gmres",
        }
    }
}

impl std::fmt::Display for InnerMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-solve record: residual norms per iteration (entry 0 is the initial
/// residual), total iterations and whether the rule was met.
#[derive(Debug, Clone)]
pub struct InnerTrace {
    pub residual_inf_history: Vec<f64>,
    pub residual_2_history: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl InnerTrace {
    pub(crate) fn start(residual: &[f64]) -> Self {
        InnerTrace {
            residual_inf_history: vec![inf_norm(residual)],
            residual_2_history: vec![two_norm(residual)],
            iterations_used: 0,
            converged: false,
        }
    }

    pub(crate) fn record(&mut self, residual: &[f64]) {
        self.residual_inf_history.push(inf_norm(residual));
        self.residual_2_history.push(two_norm(residual));
        self.iterations_used += 1;
    }

    pub fn last_residual_inf(&self) -> f64 {
        *self.residual_inf_history.last().unwrap()
    }
}

/// Residual `g - (I - gamma P) theta` of the policy-evaluation system.
pub fn residual(system: &PolicyLinearSystem, theta: &[f64]) -> Result<Vec<f64>> {
    system.check_dim(theta)?;
    Ok(system.residual(theta))
}

/// Runs `method` from `theta0` until the rule's infinity-norm condition or
/// the iteration cap is reached. Non-convergence is not an error: the caller
/// sees it in the trace.
pub fn solve_to_tolerance(
    system: &PolicyLinearSystem,
    theta0: &[f64],
    method: InnerMethod,
    rule: &StoppingRule,
) -> Result<(Vec<f64>, InnerTrace)> {
    system.check_dim(theta0)?;
    method.validate()?;

    if let InnerMethod::Gmres { restart } = method {
        return gmres::gmres_impl(system, theta0, rule, restart);
    }

    let mut theta = theta0.to_vec();
    let mut trace = InnerTrace::start(&system.residual(&theta));
    loop {
        if rule.satisfied(trace.last_residual_inf()) {
            trace.converged = true;
            break;
        }
        if trace.iterations_used >= rule.max_inner_iters() {
            break;
        }
        theta = match method {
            InnerMethod::Richardson { nu } => richardson_step(system, &theta, nu)?,
            InnerMethod::Jacobi => jacobi_step(system, &theta)?,
            InnerMethod::GaussSeidel => gauss_seidel_sweep(system, &theta)?,
            InnerMethod::Sor { omega } => sor_sweep(system, &theta, omega)?,
            InnerMethod::SteepestDescent => steepest_descent_step(system, &theta)?,
            InnerMethod::MinRes => minres_step(system, &theta)?,
            InnerMethod::Gmres { .. } => unreachable!(),
        };
        trace.record(&system.residual(&theta));
    }
    Ok((theta, trace))
}
