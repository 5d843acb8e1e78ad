//! GMRES on the policy-evaluation system: Arnoldi with modified
//! Gram-Schmidt, progressive Givens rotations for the small least-squares
//! problem, and the stopping rule checked on the reconstructed true residual
//! every iteration.

use crate::error::Result;
use crate::linalg::{dot, inf_norm, two_norm};
use crate::model::PolicyLinearSystem;

use super::{InnerTrace, StoppingRule};

/// Subdiagonal entries below this end the Arnoldi process with the exact
/// solution of the system.
const HAPPY_BREAKDOWN_TOL: f64 = 1e-14;

/// Full GMRES (no restart).
pub fn gmres(
    system: &PolicyLinearSystem,
    theta0: &[f64],
    rule: &StoppingRule,
) -> Result<(Vec<f64>, InnerTrace)> {
    system.check_dim(theta0)?;
    gmres_impl(system, theta0, rule, None)
}

/// GMRES restarted from the current iterate every `restart` steps.
pub fn gmres_restarted(
    system: &PolicyLinearSystem,
    theta0: &[f64],
    rule: &StoppingRule,
    restart: usize,
) -> Result<(Vec<f64>, InnerTrace)> {
    system.check_dim(theta0)?;
    super::InnerMethod::Gmres {
        restart: Some(restart),
    }
    .validate()?;
    gmres_impl(system, theta0, rule, Some(restart))
}

pub(crate) fn gmres_impl(
    system: &PolicyLinearSystem,
    theta0: &[f64],
    rule: &StoppingRule,
    restart: Option<usize>,
) -> Result<(Vec<f64>, InnerTrace)> {
    let n = system.n();
    let mut theta = theta0.to_vec();
    let mut trace = InnerTrace::start(&system.residual(&theta));
    if rule.satisfied(trace.last_residual_inf()) {
        trace.converged = true;
        return Ok((theta, trace));
    }

    // The Krylov space saturates at dimension n, so a full restart there is
    // exact and costs nothing extra.
    let cycle_cap = restart.unwrap_or(n).min(n);

    'cycles: loop {
        let phi0 = system.residual(&theta);
        let beta = two_norm(&phi0);
        if beta <= HAPPY_BREAKDOWN_TOL {
            trace.converged = true;
            break;
        }

        let mut basis: Vec<Vec<f64>> = vec![phi0.iter().map(|x| x / beta).collect()];
        // Columns of the rotated Hessenberg matrix (upper triangular).
        let mut r_cols: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        let mut k = 0usize;

        loop {
            let mut w = system.apply_coeff(&basis[k]);
            let mut hcol = Vec::with_capacity(k + 1);
            for q in basis.iter().take(k + 1) {
                let h = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= h * qi;
                }
                hcol.push(h);
            }
            let h_sub = two_norm(&w);
            let happy = h_sub < HAPPY_BREAKDOWN_TOL;
            if !happy {
                basis.push(w.iter().map(|x| x / h_sub).collect());
            }

            for j in 0..k {
                let tmp = cs[j] * hcol[j] + sn[j] * hcol[j + 1];
                hcol[j + 1] = -sn[j] * hcol[j] + cs[j] * hcol[j + 1];
                hcol[j] = tmp;
            }
            let (c, s) = givens(hcol[k], h_sub);
            hcol[k] = c * hcol[k] + s * h_sub;
            cs.push(c);
            sn.push(s);
            let old = g[k];
            g[k] = c * old;
            g.push(-s * old);
            r_cols.push(hcol);

            let y = back_substitute(&r_cols, &g[..=k]);
            let mut candidate = theta.clone();
            for (j, &yj) in y.iter().enumerate() {
                for (ci, bi) in candidate.iter_mut().zip(&basis[j]) {
                    *ci += yj * bi;
                }
            }
            let res = system.residual(&candidate);
            trace.record(&res);

            let satisfied = rule.satisfied(inf_norm(&res));
            if satisfied || happy {
                theta = candidate;
                trace.converged = true;
                break 'cycles;
            }
            if trace.iterations_used >= rule.max_inner_iters() {
                theta = candidate;
                break 'cycles;
            }
            k += 1;
            if k >= cycle_cap {
                theta = candidate;
                continue 'cycles;
            }
        }
    }
    Ok((theta, trace))
}

/// Solves `R y = rhs` with `R[i][j] = r_cols[j][i]` upper triangular.
fn back_substitute(r_cols: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let s = rhs.len();
    let mut y = vec![0.0; s];
    for i in (0..s).rev() {
        let mut sum = rhs[i];
        for j in i + 1..s {
            sum -= r_cols[j][i] * y[j];
        }
        y[i] = sum / r_cols[i][i];
    }
    y
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a.abs() > b.abs() {
        let t = b / a;
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c, c * t)
    } else {
        let t = a / b;
        let s = 1.0 / (1.0 + t * t).sqrt();
        (s * t, s)
    }
}
