//! Outer solvers: value iteration, exact policy iteration, optimistic policy
//! iteration, and inexact policy iteration with a relative-residual inner
//! stopping rule; plus a brute-force enumeration oracle for small instances.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{solve_to_tolerance, InnerMethod, StoppingRule, DEFAULT_MAX_INNER_ITERS};
use crate::linalg::{inf_dist, inf_norm};
use crate::model::{MdpModel, Policy, ValueVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    Tolerance,
    MaxIters,
    TimeBudget,
}

/// Optional per-outer-iteration forcing schedule; the constant `alpha` is
/// used when absent.
pub type AlphaSchedule = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Shared configuration for the outer solvers. Fields irrelevant to a given
/// solver are ignored by it.
#[derive(Clone)]
pub struct OuterConfig {
    /// Outer termination threshold.
    pub tol: f64,
    pub max_outer_iters: usize,
    /// Wall-clock cap, enforced between outer iterations only.
    pub time_budget_s: Option<f64>,
    /// Forcing parameter of the inexact policy-evaluation stopping rule.
    pub alpha: f64,
    pub alpha_schedule: Option<AlphaSchedule>,
    pub inner_method: InnerMethod,
    pub max_inner_iters: usize,
    /// Sweep count of optimistic policy iteration.
    pub opi_w: usize,
    /// Reference solution; when set the report carries per-iteration errors.
    pub reference: Option<Vec<f64>>,
}

impl Default for OuterConfig {
    fn default() -> Self {
        OuterConfig {
            tol: 1e-8,
            max_outer_iters: 100_000,
            time_budget_s: Some(500.0),
            alpha: 0.1,
            alpha_schedule: None,
            inner_method: InnerMethod::Gmres { restart: None },
            max_inner_iters: DEFAULT_MAX_INNER_ITERS,
            opi_w: 10,
            reference: None,
        }
    }
}

impl OuterConfig {
    fn check_tol(&self) -> Result<()> {
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(Error::InvalidParameter {
                name: "tol",
                value: self.tol,
            });
        }
        Ok(())
    }
}

impl std::fmt::Debug for OuterConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OuterConfig")
            .field("tol", &self.tol)
            .field("max_outer_iters", &self.max_outer_iters)
            .field("time_budget_s", &self.time_budget_s)
            .field("alpha", &self.alpha)
            .field(
                "alpha_schedule",
                &self.alpha_schedule.as_ref().map(|_| "<fn>"),
            )
            .field("inner_method", &self.inner_method)
            .field("max_inner_iters", &self.max_inner_iters)
            .field("opi_w", &self.opi_w)
            .field("reference", &self.reference.as_ref().map(|_| "<vec>"))
            .finish()
    }
}

/// Outer iteration record. All histories have `outer_iters + 1` entries,
/// one per iterate including the start.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub final_value: ValueVector,
    pub final_policy: Policy,
    pub outer_iters: usize,
    /// Infinity norm of the Bellman residual at each iterate.
    pub residual_history: Vec<f64>,
    /// Infinity-norm distance to the reference, when one was supplied.
    pub error_history: Option<Vec<f64>>,
    /// Inner iterations spent producing each iterate (0 for the start and
    /// for solvers without an inner loop).
    pub inner_iters_history: Vec<usize>,
    /// Elapsed seconds when each iterate was produced.
    pub cum_time_history: Vec<f64>,
    pub wall_time_s: f64,
    pub terminated_by: TerminatedBy,
}

impl SolveReport {
    pub fn total_inner_iters(&self) -> usize {
        self.inner_iters_history.iter().sum()
    }

    pub fn final_residual_inf(&self) -> f64 {
        *self.residual_history.last().unwrap()
    }
}

struct Recorder {
    start: Instant,
    residual_history: Vec<f64>,
    error_history: Option<Vec<f64>>,
    inner_iters_history: Vec<usize>,
    cum_time_history: Vec<f64>,
    reference: Option<Vec<f64>>,
}

impl Recorder {
    fn new(config: &OuterConfig) -> Self {
        Recorder {
            start: Instant::now(),
            residual_history: Vec::new(),
            error_history: config.reference.as_ref().map(|_| Vec::new()),
            inner_iters_history: Vec::new(),
            cum_time_history: Vec::new(),
            reference: config.reference.clone(),
        }
    }

    fn record_iterate(&mut self, v: &[f64], inner_iters: usize) {
        self.cum_time_history.push(self.start.elapsed().as_secs_f64());
        self.inner_iters_history.push(inner_iters);
        if let (Some(history), Some(reference)) = (&mut self.error_history, &self.reference) {
            history.push(inf_dist(v, reference));
        }
    }

    fn over_time(&self, budget: Option<f64>) -> bool {
        matches!(budget, Some(b) if self.start.elapsed().as_secs_f64() > b)
    }

    fn finish(
        self,
        value: ValueVector,
        policy: Policy,
        outer_iters: usize,
        terminated_by: TerminatedBy,
    ) -> SolveReport {
        let wall = self.start.elapsed().as_secs_f64();
        debug_assert_eq!(self.residual_history.len(), outer_iters + 1);
        debug_assert_eq!(self.cum_time_history.len(), outer_iters + 1);
        SolveReport {
            final_value: value,
            final_policy: policy,
            outer_iters,
            residual_history: self.residual_history,
            error_history: self.error_history,
            inner_iters_history: self.inner_iters_history,
            cum_time_history: self.cum_time_history,
            wall_time_s: wall,
            terminated_by,
        }
    }
}

/// Repeated applications of the optimality operator, terminating when
/// consecutive iterates are within `tol` in the infinity norm.
pub fn value_iteration(
    model: &MdpModel,
    v0: &ValueVector,
    config: &OuterConfig,
) -> Result<SolveReport> {
    config.check_tol()?;
    let mut recorder = Recorder::new(config);
    let mut v = v0.clone();
    recorder.record_iterate(&v, 0);
    let mut k = 0usize;
    loop {
        let (tv, _) = model.optimal_update(&v)?;
        // The step size equals the Bellman residual of the pre-step iterate.
        let diff = inf_dist(&v, &tv);
        recorder.residual_history.push(diff);
        v = tv;
        k += 1;
        recorder.record_iterate(&v, 0);
        let terminated = if diff <= config.tol {
            Some(TerminatedBy::Tolerance)
        } else if k >= config.max_outer_iters {
            Some(TerminatedBy::MaxIters)
        } else if recorder.over_time(config.time_budget_s) {
            Some(TerminatedBy::TimeBudget)
        } else {
            None
        };
        if let Some(terminated_by) = terminated {
            let (tv_final, greedy) = model.optimal_update(&v)?;
            recorder.residual_history.push(inf_dist(&v, &tv_final));
            return Ok(recorder.finish(v, greedy, k, terminated_by));
        }
    }
}

/// Alternates greedy policy extraction with exact policy evaluation.
pub fn policy_iteration(
    model: &MdpModel,
    v_tilde: &ValueVector,
    config: &OuterConfig,
) -> Result<SolveReport> {
    config.check_tol()?;
    let mut recorder = Recorder::new(config);
    let pi0 = model.greedy_policy(v_tilde)?;
    let mut v = model.evaluate_policy(&pi0)?;
    recorder.record_iterate(&v, 0);
    let mut prev: Option<ValueVector> = None;
    let mut k = 0usize;
    loop {
        let (tv, pi_next) = model.optimal_update(&v)?;
        recorder.residual_history.push(inf_dist(&v, &tv));
        let terminated = match &prev {
            Some(p) if inf_dist(&v, p) <= config.tol => Some(TerminatedBy::Tolerance),
            _ if k >= config.max_outer_iters => Some(TerminatedBy::MaxIters),
            _ if recorder.over_time(config.time_budget_s) => Some(TerminatedBy::TimeBudget),
            _ => None,
        };
        if let Some(terminated_by) = terminated {
            return Ok(recorder.finish(v, pi_next, k, terminated_by));
        }
        let next = model.evaluate_policy(&pi_next)?;
        prev = Some(v);
        v = next;
        k += 1;
        recorder.record_iterate(&v, 0);
    }
}

/// Policy iteration with the evaluation step replaced by `opi_w` sweeps of
/// the policy operator. With `opi_w = 1` the iterates coincide with value
/// iteration.
pub fn optimistic_policy_iteration(
    model: &MdpModel,
    v0: &ValueVector,
    config: &OuterConfig,
) -> Result<SolveReport> {
    if config.opi_w == 0 {
        return Err(Error::InvalidParameter {
            name: "opi_w",
            value: 0.0,
        });
    }
    config.check_tol()?;
    let mut recorder = Recorder::new(config);
    let mut v = v0.clone();
    recorder.record_iterate(&v, 0);
    let mut k = 0usize;
    loop {
        let (tv, pi_next) = model.optimal_update(&v)?;
        recorder.residual_history.push(inf_dist(&v, &tv));
        // The first sweep is the optimality update itself.
        let mut u = tv;
        for _ in 1..config.opi_w {
            u = model.policy_update(&pi_next, &u)?;
        }
        let diff = inf_dist(&v, &u);
        v = u;
        k += 1;
        recorder.record_iterate(&v, config.opi_w);
        let terminated = if diff <= config.tol {
            Some(TerminatedBy::Tolerance)
        } else if k >= config.max_outer_iters {
            Some(TerminatedBy::MaxIters)
        } else if recorder.over_time(config.time_budget_s) {
            Some(TerminatedBy::TimeBudget)
        } else {
            None
        };
        if let Some(terminated_by) = terminated {
            let (tv_final, greedy) = model.optimal_update(&v)?;
            recorder.residual_history.push(inf_dist(&v, &tv_final));
            return Ok(recorder.finish(v, greedy, k, terminated_by));
        }
    }
}

/// Policy iteration with the evaluation system solved only until its
/// residual drops below `alpha` times the residual at the current iterate.
/// An inner loop that hits its cap falls through to the outer update.
pub fn inexact_policy_iteration(
    model: &MdpModel,
    v0: &ValueVector,
    config: &OuterConfig,
) -> Result<SolveReport> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: config.alpha,
        });
    }
    config.inner_method.validate()?;
    config.check_tol()?;
    let mut recorder = Recorder::new(config);
    let mut v = v0.clone();
    recorder.record_iterate(&v, 0);
    let mut k = 0usize;
    loop {
        let (tv, pi_next) = model.optimal_update(&v)?;
        // The outer residual doubles as the reference residual of the inner
        // stopping rule: the evaluation system of the greedy policy has
        // residual g - (I - gamma P) v = Tv - v at the current iterate.
        let res = inf_dist(&v, &tv);
        recorder.residual_history.push(res);
        let terminated = if res <= config.tol {
            Some(TerminatedBy::Tolerance)
        } else if k >= config.max_outer_iters {
            Some(TerminatedBy::MaxIters)
        } else if recorder.over_time(config.time_budget_s) {
            Some(TerminatedBy::TimeBudget)
        } else {
            None
        };
        if let Some(terminated_by) = terminated {
            return Ok(recorder.finish(v, pi_next, k, terminated_by));
        }
        let system = model.policy_system(&pi_next)?;
        let alpha_k = config
            .alpha_schedule
            .as_ref()
            .map(|s| s(k))
            .unwrap_or(config.alpha);
        let rule = StoppingRule::new(alpha_k, res, config.max_inner_iters)?;
        let (theta, inner) = solve_to_tolerance(&system, &v, config.inner_method, &rule)?;
        v = ValueVector::new(theta)?;
        k += 1;
        recorder.record_iterate(&v, inner.iterations_used);
    }
}

/// Maximum number of policies the enumeration oracle will evaluate.
pub const BRUTE_FORCE_GUARD: u128 = 1_000_000;

/// Evaluates every deterministic stationary policy exactly and returns the
/// elementwise-minimal cost vector with a policy attaining it. A test
/// oracle; guarded to small instances.
pub fn brute_force_optimal(model: &MdpModel) -> Result<(ValueVector, Policy)> {
    let n = model.num_states();
    let m = model.num_actions();
    let total = (m as u128)
        .checked_pow(n as u32)
        .filter(|&t| t <= BRUTE_FORCE_GUARD)
        .ok_or(Error::TooLarge {
            what: "policy enumeration",
            size: (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX),
            max: BRUTE_FORCE_GUARD,
        })?;

    let mut minimum = vec![f64::INFINITY; n];
    for_each_policy(n, m, total, |actions| {
        let v = model.evaluate_policy(&Policy::new(actions.to_vec()))?;
        for (lo, x) in minimum.iter_mut().zip(v.iter()) {
            *lo = lo.min(*x);
        }
        Ok(())
    })?;

    // Second pass: some single policy must attain the elementwise minimum.
    let mut best: Option<(f64, Policy)> = None;
    for_each_policy(n, m, total, |actions| {
        let pi = Policy::new(actions.to_vec());
        let v = model.evaluate_policy(&pi)?;
        let gap = inf_dist(&v, &minimum);
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, pi));
        }
        Ok(())
    })?;
    let (gap, policy) = best.expect("at least one policy exists");
    assert!(
        gap <= 1e-8 * inf_norm(&minimum).max(1.0),
        "no single policy attains the elementwise minimum (gap {gap:e})"
    );
    Ok((ValueVector::new(minimum)?, policy))
}

fn for_each_policy<F>(n: usize, m: usize, total: u128, mut f: F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    let mut actions = vec![0usize; n];
    let mut seen = 0u128;
    loop {
        f(&actions)?;
        seen += 1;
        if seen == total {
            return Ok(());
        }
        let mut pos = 0;
        while pos < n {
            actions[pos] += 1;
            if actions[pos] < m {
                break;
            }
            actions[pos] = 0;
            pos += 1;
        }
    }
}
