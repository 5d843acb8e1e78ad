//! Finite discounted MDPs: the model itself, the Bellman operators, the
//! Bellman residual, greedy policies and exact policy evaluation.

use std::ops::Deref;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{inf_norm, CsrMatrix};

/// Tolerance on row sums when validating input transition matrices.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Relative bound on the residual accepted from a direct policy-evaluation
/// solve.
pub const DIRECT_SOLVE_TOL: f64 = 1e-10;

/// Below this state count the direct solve uses a dense factorization.
const DENSE_SOLVE_CUTOFF: usize = 64;

/// A deterministic stationary policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy(Vec<usize>);

impl Policy {
    pub fn new(actions: Vec<usize>) -> Self {
        Policy(actions)
    }

    pub fn constant(n: usize, action: usize) -> Self {
        Policy(vec![action; n])
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A cost vector over states. Construction rejects non-finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "value vector",
            });
        }
        Ok(ValueVector(values))
    }

    pub fn zeros(n: usize) -> Self {
        ValueVector(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ValueVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<ValueVector> for Vec<f64> {
    fn from(v: ValueVector) -> Vec<f64> {
        v.0
    }
}

/// An immutable finite MDP: per-action sparse row-stochastic transition
/// matrices, a dense cost table and a discount factor in (0, 1).
#[derive(Debug, Clone)]
pub struct MdpModel {
    n: usize,
    m: usize,
    gamma: f64,
    transitions: Vec<CsrMatrix>,
    /// Row-major n x m table of stage costs.
    costs: Vec<f64>,
    cost_bound: f64,
}

impl MdpModel {
    /// Builds and validates a model from `(state, action, next_state, prob)`
    /// triplets and an n x m cost table.
    pub fn build(
        n: usize,
        m: usize,
        gamma: f64,
        triplets: &[(usize, usize, usize, f64)],
        costs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); n]; m];
        for &(i, a, j, p) in triplets {
            if a >= m {
                return Err(Error::IndexOutOfRange {
                    what: "action",
                    index: a,
                    bound: m,
                });
            }
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    what: "state",
                    index: i.max(j),
                    bound: n,
                });
            }
            rows[a][i].push((j, p));
        }
        let mut matrices = Vec::with_capacity(m);
        for (a, action_rows) in rows.into_iter().enumerate() {
            let mat = CsrMatrix::from_rows(n, n, action_rows).map_err(|e| match e {
                Error::DuplicateColumn { row, col } => Error::DuplicateEntry {
                    action: a,
                    state: row,
                    next_state: col,
                },
                other => other,
            })?;
            matrices.push(mat);
        }
        let costs_flat = flatten_costs(n, m, costs)?;
        Self::from_parts(gamma, matrices, costs_flat)
    }

    /// Builds and validates a model from pre-assembled per-action matrices
    /// and a flat row-major cost table.
    pub fn from_parts(gamma: f64, transitions: Vec<CsrMatrix>, costs: Vec<f64>) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        let m = transitions.len();
        if m == 0 {
            return Err(Error::InvalidSpec("at least one action required".into()));
        }
        let n = transitions[0].nrows();
        if n == 0 {
            return Err(Error::InvalidSpec("at least one state required".into()));
        }
        for (a, p) in transitions.iter().enumerate() {
            if p.nrows() != n || p.ncols() != n {
                return Err(Error::DimensionMismatch {
                    what: "transition matrix",
                    expected: n,
                    found: p.nrows().max(p.ncols()),
                });
            }
            for (i, j, v) in p.iter() {
                if v < 0.0 {
                    return Err(Error::NegativeProbability {
                        action: a,
                        state: i,
                        next_state: j,
                        value: v,
                    });
                }
            }
            for i in 0..n {
                let sum = p.row_sum(i);
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::RowSum {
                        action: a,
                        state: i,
                        sum,
                        tol: ROW_SUM_TOL,
                    });
                }
            }
        }
        if costs.len() != n * m {
            return Err(Error::DimensionMismatch {
                what: "cost table",
                expected: n * m,
                found: costs.len(),
            });
        }
        if costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "cost table" });
        }
        let cost_bound = inf_norm(&costs);
        Ok(MdpModel {
            n,
            m,
            gamma,
            transitions,
            costs,
            cost_bound,
        })
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn num_actions(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Largest stage-cost magnitude.
    pub fn cost_bound(&self) -> f64 {
        self.cost_bound
    }

    pub fn cost(&self, state: usize, action: usize) -> f64 {
        self.costs[state * self.m + action]
    }

    pub fn transition(&self, action: usize) -> &CsrMatrix {
        &self.transitions[action]
    }

    /// Same dynamics and costs under a different discount factor.
    pub fn with_gamma(&self, gamma: f64) -> Result<MdpModel> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        let mut model = self.clone();
        model.gamma = gamma;
        Ok(model)
    }

    fn check_value(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "value vector",
                expected: self.n,
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_policy(&self, policy: &Policy) -> Result<()> {
        if policy.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "policy",
                expected: self.n,
                found: policy.len(),
            });
        }
        for &a in policy.actions() {
            if a >= self.m {
                return Err(Error::IndexOutOfRange {
                    what: "action",
                    index: a,
                    bound: self.m,
                });
            }
        }
        Ok(())
    }

    /// One application of the policy operator: `g(i, pi(i)) + gamma *
    /// sum_j P(i, pi(i), j) v(j)` per state.
    pub fn policy_update(&self, policy: &Policy, v: &ValueVector) -> Result<ValueVector> {
        self.check_value(v)?;
        self.check_policy(policy)?;
        let out = (0..self.n)
            .map(|i| {
                let a = policy.actions()[i];
                self.cost(i, a) + self.gamma * self.transitions[a].row_dot(i, v)
            })
            .collect();
        Ok(ValueVector(out))
    }

    /// One application of the optimality operator: the per-state minimum over
    /// actions together with the argmin policy. Ties break towards the lowest
    /// action index, so the result is deterministic and independent of how
    /// states are partitioned across workers.
    pub fn optimal_update(&self, v: &ValueVector) -> Result<(ValueVector, Policy)> {
        self.check_value(v)?;
        let per_state: Vec<(f64, usize)> = (0..self.n)
            .into_par_iter()
            .map(|i| self.min_over_actions(i, v))
            .collect();
        let mut values = Vec::with_capacity(self.n);
        let mut actions = Vec::with_capacity(self.n);
        for (q, a) in per_state {
            values.push(q);
            actions.push(a);
        }
        Ok((ValueVector(values), Policy(actions)))
    }

    fn min_over_actions(&self, i: usize, v: &[f64]) -> (f64, usize) {
        let mut best = f64::INFINITY;
        let mut best_a = 0;
        for a in 0..self.m {
            let q = self.cost(i, a) + self.gamma * self.transitions[a].row_dot(i, v);
            if q < best {
                best = q;
                best_a = a;
            }
        }
        (best, best_a)
    }

    /// `v - Tv`, zero exactly at the optimal cost.
    pub fn bellman_residual(&self, v: &ValueVector) -> Result<ValueVector> {
        let (tv, _) = self.optimal_update(v)?;
        let out = v.iter().zip(tv.iter()).map(|(x, y)| x - y).collect();
        Ok(ValueVector(out))
    }

    /// Greedy policy associated with `v`.
    pub fn greedy_policy(&self, v: &ValueVector) -> Result<Policy> {
        Ok(self.optimal_update(v)?.1)
    }

    /// Gathers row `i` of `P_{pi(i)}` and `g(i, pi(i))` into the linear
    /// system for evaluating `policy`.
    pub fn policy_system(&self, policy: &Policy) -> Result<PolicyLinearSystem> {
        self.check_policy(policy)?;
        let rows = (0..self.n)
            .map(|i| {
                let (cols, vals) = self.transitions[policy.actions()[i]].row(i);
                cols.iter().copied().zip(vals.iter().copied()).collect()
            })
            .collect();
        let p_pi = CsrMatrix::from_rows(self.n, self.n, rows)?;
        let g_pi = (0..self.n)
            .map(|i| self.cost(i, policy.actions()[i]))
            .collect();
        Ok(PolicyLinearSystem::new(p_pi, g_pi, self.gamma))
    }

    /// Exact policy evaluation by direct factorization.
    pub fn evaluate_policy(&self, policy: &Policy) -> Result<ValueVector> {
        let system = self.policy_system(policy)?;
        system.solve_direct()
    }
}

fn flatten_costs(n: usize, m: usize, costs: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    if costs.len() != n {
        return Err(Error::DimensionMismatch {
            what: "cost table rows",
            expected: n,
            found: costs.len(),
        });
    }
    let mut flat = Vec::with_capacity(n * m);
    for row in &costs {
        if row.len() != m {
            return Err(Error::DimensionMismatch {
                what: "cost table columns",
                expected: m,
                found: row.len(),
            });
        }
        flat.extend_from_slice(row);
    }
    Ok(flat)
}

/// The linear system `(I - gamma P) theta = g` for a fixed policy, stored
/// implicitly through the gathered transition matrix and cost vector.
#[derive(Debug)]
pub struct PolicyLinearSystem {
    p_pi: CsrMatrix,
    g_pi: Vec<f64>,
    gamma: f64,
    p_pi_t: OnceLock<CsrMatrix>,
}

impl PolicyLinearSystem {
    pub fn new(p_pi: CsrMatrix, g_pi: Vec<f64>, gamma: f64) -> Self {
        PolicyLinearSystem {
            p_pi,
            g_pi,
            gamma,
            p_pi_t: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.g_pi.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn transition(&self) -> &CsrMatrix {
        &self.p_pi
    }

    pub fn rhs(&self) -> &[f64] {
        &self.g_pi
    }

    pub fn check_dim(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "iterate",
                expected: self.n(),
                found: theta.len(),
            });
        }
        Ok(())
    }

    /// `(I - gamma P) x`.
    pub fn apply_coeff(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.p_pi.mul_vec(x);
        for i in 0..y.len() {
            y[i] = x[i] - self.gamma * y[i];
        }
        y
    }

    /// `(I - gamma P)^T x`; the transpose is built on first use.
    pub fn apply_coeff_transpose(&self, x: &[f64]) -> Vec<f64> {
        let pt = self.p_pi_t.get_or_init(|| self.p_pi.transpose());
        let mut y = pt.mul_vec(x);
        for i in 0..y.len() {
            y[i] = x[i] - self.gamma * y[i];
        }
        y
    }

    /// Residual `g - (I - gamma P) theta`.
    pub fn residual(&self, theta: &[f64]) -> Vec<f64> {
        let mut r = self.p_pi.mul_vec(theta);
        for i in 0..r.len() {
            r[i] = self.g_pi[i] - theta[i] + self.gamma * r[i];
        }
        r
    }

    /// Diagonal of `I - gamma P`; every entry is at least `1 - gamma`.
    pub fn coeff_diagonal(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                let (cols, vals) = self.p_pi.row(i);
                let p_ii = cols
                    .iter()
                    .position(|&j| j == i)
                    .map(|k| vals[k])
                    .unwrap_or(0.0);
                1.0 - self.gamma * p_ii
            })
            .collect()
    }

    /// Dense coefficient matrix `I - gamma P`, for oracles and small solves.
    pub fn coeff_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for (i, j, v) in self.p_pi.iter() {
            a[i][j] -= self.gamma * v;
        }
        a
    }

    /// Solves the system by LU factorization: dense below a size cutoff,
    /// sparse otherwise. One step of iterative refinement keeps the residual
    /// within `DIRECT_SOLVE_TOL * max(1, ||g||_inf)`.
    pub fn solve_direct(&self) -> Result<ValueVector> {
        let mut theta = if self.n() < DENSE_SOLVE_CUTOFF {
            self.solve_dense_lu(&self.g_pi)
        } else {
            self.solve_sparse_lu()?
        };
        let bound = DIRECT_SOLVE_TOL * inf_norm(&self.g_pi).max(1.0);
        if inf_norm(&self.residual(&theta)) > bound {
            let correction = if self.n() < DENSE_SOLVE_CUTOFF {
                self.solve_dense_lu(&self.residual(&theta))
            } else {
                let r = self.residual(&theta);
                self.sparse_lu_solve_rhs(&r)?
            };
            for i in 0..theta.len() {
                theta[i] += correction[i];
            }
        }
        let res = inf_norm(&self.residual(&theta));
        if !res.is_finite() || res > bound {
            return Err(Error::FactorizationFailure(format!(
                "direct solve residual {res:e} exceeds {bound:e}"
            )));
        }
        ValueVector::new(theta)
    }

    fn solve_dense_lu(&self, rhs: &[f64]) -> Vec<f64> {
        use faer::prelude::Solve;
        let n = self.n();
        let dense = self.coeff_dense();
        let a = faer::Mat::from_fn(n, n, |i, j| dense[i][j]);
        let b = faer::Mat::from_fn(n, 1, |i, _| rhs[i]);
        let x = a.partial_piv_lu().solve(&b);
        (0..n).map(|i| x[(i, 0)]).collect()
    }

    fn solve_sparse_lu(&self) -> Result<Vec<f64>> {
        self.sparse_lu_solve_rhs(&self.g_pi)
    }

    fn sparse_lu_solve_rhs(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        use faer::prelude::Solve;
        use faer::sparse::{SparseColMat, Triplet};
        let n = self.n();
        let mut trips = Vec::with_capacity(self.p_pi.nnz() + n);
        let mut has_diag = vec![false; n];
        for (i, j, v) in self.p_pi.iter() {
            if i == j {
                trips.push(Triplet::new(i, j, 1.0 - self.gamma * v));
                has_diag[i] = true;
            } else {
                trips.push(Triplet::new(i, j, -self.gamma * v));
            }
        }
        for (i, present) in has_diag.iter().enumerate() {
            if !present {
                trips.push(Triplet::new(i, i, 1.0));
            }
        }
        let a = SparseColMat::try_new_from_triplets(n, n, &trips)
            .map_err(|e| Error::FactorizationFailure(format!("assembly: {e:?}")))?;
        let lu = a
            .sp_lu()
            .map_err(|e| Error::FactorizationFailure(format!("sparse LU: {e:?}")))?;
        let b = faer::Mat::from_fn(n, 1, |i, _| rhs[i]);
        let x = lu.solve(&b);
        Ok((0..n).map(|i| x[(i, 0)]).collect())
    }
}
