//! Single iterations of the stationary and line-search solvers.

use crate::error::{Error, Result};
use crate::linalg::{dot, two_norm};
use crate::model::PolicyLinearSystem;

use super::LINE_SEARCH_GUARD;

/// `theta + (1/nu) * (g - (I - gamma P) theta)`. With `nu = 1` this is one
/// application of the policy operator.
pub fn richardson_step(system: &PolicyLinearSystem, theta: &[f64], nu: f64) -> Result<Vec<f64>> {
    system.check_dim(theta)?;
    if nu <= 0.0 {
        return Err(Error::InvalidParameter { name: "nu", value: nu });
    }
    let phi = system.residual(theta);
    Ok(theta
        .iter()
        .zip(&phi)
        .map(|(t, p)| t + p / nu)
        .collect())
}

/// Diagonally preconditioned step `theta + D^{-1} (g - (I - gamma P) theta)`
/// with `D = diag(I - gamma P)`; every diagonal entry is at least
/// `1 - gamma`, so the preconditioner is always invertible.
pub fn jacobi_step(system: &PolicyLinearSystem, theta: &[f64]) -> Result<Vec<f64>> {
    system.check_dim(theta)?;
    let phi = system.residual(theta);
    let diag = system.coeff_diagonal();
    Ok(theta
        .iter()
        .zip(&phi)
        .zip(&diag)
        .map(|((t, p), d)| t + p / d)
        .collect())
}

/// One relaxation sweep in ascending state order, reusing interim results.
pub fn sor_sweep(system: &PolicyLinearSystem, theta: &[f64], omega: f64) -> Result<Vec<f64>> {
    system.check_dim(theta)?;
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            value: omega,
        });
    }
    let gamma = system.gamma();
    let g = system.rhs();
    let p = system.transition();
    let mut x = theta.to_vec();
    for i in 0..x.len() {
        let (cols, vals) = p.row(i);
        let mut px = 0.0;
        let mut p_ii = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            px += v * x[j];
            if j == i {
                p_ii = v;
            }
        }
        let row_residual = g[i] - x[i] + gamma * px;
        x[i] += omega * row_residual / (1.0 - gamma * p_ii);
    }
    Ok(x)
}

/// The relaxation sweep with unit weight.
pub fn gauss_seidel_sweep(system: &PolicyLinearSystem, theta: &[f64]) -> Result<Vec<f64>> {
    sor_sweep(system, theta, 1.0)
}

/// Exact line search along the negative gradient of `0.5 ||g - A theta||^2`
/// with `A = I - gamma P`. A numerically zero residual returns `theta`.
pub fn steepest_descent_step(system: &PolicyLinearSystem, theta: &[f64]) -> Result<Vec<f64>> {
    system.check_dim(theta)?;
    let phi = system.residual(theta);
    if two_norm(&phi) <= LINE_SEARCH_GUARD {
        return Ok(theta.to_vec());
    }
    let at_phi = system.apply_coeff_transpose(&phi);
    let a_at_phi = system.apply_coeff(&at_phi);
    let denom = dot(&a_at_phi, &a_at_phi);
    if denom <= LINE_SEARCH_GUARD {
        return Ok(theta.to_vec());
    }
    let eta = dot(&phi, &a_at_phi) / denom;
    Ok(theta
        .iter()
        .zip(&at_phi)
        .map(|(t, d)| t + eta * d)
        .collect())
}

/// Exact line search along the residual direction; minimizes the residual
/// 2-norm over the step length, so that norm never increases.
pub fn minres_step(system: &PolicyLinearSystem, theta: &[f64]) -> Result<Vec<f64>> {
    system.check_dim(theta)?;
    let phi = system.residual(theta);
    if two_norm(&phi) <= LINE_SEARCH_GUARD {
        return Ok(theta.to_vec());
    }
    let a_phi = system.apply_coeff(&phi);
    let denom = dot(&a_phi, &a_phi);
    if denom <= LINE_SEARCH_GUARD {
        return Ok(theta.to_vec());
    }
    let eta = dot(&a_phi, &phi) / denom;
    Ok(theta
        .iter()
        .zip(&phi)
        .map(|(t, p)| t + eta * p)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::residual;
    use crate::linalg::{inf_dist, inf_norm};
    use crate::model::fixtures::{e1, identity_chain};
    use crate::model::Policy;
    use crate::random::{generate_random, RandomMdpSpec};

    fn random_system(n: usize, gamma: f64, seed: u64) -> PolicyLinearSystem {
        let spec = RandomMdpSpec {
            n,
            m: 4,
            gamma,
            density: 0.35,
            seed,
            ensure_regular: false,
        };
        let model = generate_random(&spec).unwrap();
        let pi = Policy::new((0..n).map(|i| (i * 3) % 4).collect());
        model.policy_system(&pi).unwrap()
    }

    #[test]
    fn residual_examples() {
        let chain = identity_chain();
        let sys = chain.policy_system(&Policy::constant(2, 0)).unwrap();
        assert_eq!(residual(&sys, &[0.0, 0.0]).unwrap(), vec![1.0, 2.0]);
        let v = sys.solve_direct().unwrap();
        assert!(inf_norm(&residual(&sys, &v).unwrap()) <= 1e-10);

        let sys_e1 = e1().policy_system(&Policy::new(vec![0, 1])).unwrap();
        assert_eq!(residual(&sys_e1, &[0.0, 0.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn residual_checks_dimensions() {
        let sys = identity_chain().policy_system(&Policy::constant(2, 0)).unwrap();
        assert!(residual(&sys, &[0.0]).is_err());
    }

    #[test]
    fn richardson_unit_step_is_policy_operator() {
        let spec = RandomMdpSpec {
            n: 18,
            m: 3,
            gamma: 0.85,
            density: 0.5,
            seed: 33,
            ensure_regular: false,
        };
        let model = generate_random(&spec).unwrap();
        let pi = Policy::new((0..18).map(|i| i % 3).collect());
        let system = model.policy_system(&pi).unwrap();
        let theta: Vec<f64> = (0..18).map(|i| (i as f64 * 0.9).sin()).collect();
        let stepped = richardson_step(&system, &theta, 1.0).unwrap();
        let backed = model
            .policy_update(&pi, &crate::model::ValueVector::new(theta).unwrap())
            .unwrap();
        assert!(inf_dist(&stepped, &backed) <= 1e-12);
    }

    #[test]
    fn richardson_keeps_fixed_point() {
        let system = random_system(12, 0.7, 2);
        let v = system.solve_direct().unwrap();
        for nu in [0.6, 1.0, 1.7] {
            let stepped = richardson_step(&system, &v, nu).unwrap();
            assert!(inf_dist(&stepped, &v) <= 1e-10);
        }
    }

    #[test]
    fn richardson_iteration_matrix_spectrum() {
        // P uniform on two states, gamma = 0.9, nu = 0.7: the iteration
        // matrix is [[3/14, 9/14], [9/14, 3/14]] with eigenvalues 6/7 and
        // -3/7, so the spectral radius 6/7 beats gamma.
        let model = uniform_two_state();
        let system = model.policy_system(&Policy::constant(2, 0)).unwrap();
        let nu = 0.7;
        let a = system.coeff_dense();
        let m = faer::Mat::from_fn(2, 2, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - a[i][j] / nu
        });
        let mut eigs: Vec<f64> = m
            .eigenvalues()
            .unwrap()
            .into_iter()
            .map(|c: faer::c64| c.re)
            .collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((eigs[0] + 3.0 / 7.0).abs() <= 1e-12);
        assert!((eigs[1] - 6.0 / 7.0).abs() <= 1e-12);
        let rho = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        assert!(rho < 0.9);
    }

    fn uniform_two_state() -> crate::model::MdpModel {
        crate::model::MdpModel::build(
            2,
            1,
            0.9,
            &[(0, 0, 0, 0.5), (0, 0, 1, 0.5), (1, 0, 0, 0.5), (1, 0, 1, 0.5)],
            vec![vec![1.0], vec![-1.0]],
        )
        .unwrap()
    }

    #[test]
    fn richardson_contraction_number_bound() {
        // For nu above (1 + gamma) / 2 the iteration matrix has infinity
        // norm at most |nu - 1|/nu + gamma/nu, so every step contracts the
        // error by at least that factor.
        let system = random_system(26, 0.9, 41);
        let exact = system.solve_direct().unwrap();
        for nu in [0.96, 1.3, 2.0] {
            let h = (nu - 1.0f64).abs() / nu + 0.9 / nu;
            assert!(h < 1.0);
            let mut theta: Vec<f64> = (0..26).map(|i| (i as f64 * 0.17).cos()).collect();
            let mut err = inf_dist(&theta, &exact);
            for _ in 0..80 {
                theta = richardson_step(&system, &theta, nu).unwrap();
                let next = inf_dist(&theta, &exact);
                assert!(next <= h * err + 1e-13, "nu {nu}: {next} vs {}", h * err);
                err = next;
            }
        }
    }

    #[test]
    fn jacobi_solves_diagonal_system_in_one_step() {
        // P = I makes the preconditioner the whole coefficient matrix.
        let chain = identity_chain();
        let sys = chain.policy_system(&Policy::constant(2, 0)).unwrap();
        let stepped = jacobi_step(&sys, &[-3.0, 17.0]).unwrap();
        assert!(inf_dist(&stepped, &[2.0, 4.0]) <= 1e-12);
    }

    #[test]
    fn gauss_seidel_is_unit_sor() {
        let system = random_system(22, 0.9, 6);
        let theta: Vec<f64> = (0..22).map(|i| (i as f64).cos()).collect();
        let gs = gauss_seidel_sweep(&system, &theta).unwrap();
        let sor = sor_sweep(&system, &theta, 1.0).unwrap();
        for (a, b) in gs.iter().zip(&sor) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn jacobi_error_contracts_by_gamma() {
        let system = random_system(30, 0.85, 9);
        let exact = system.solve_direct().unwrap();
        let mut theta = vec![0.0; 30];
        let mut err = inf_dist(&theta, &exact);
        for _ in 0..120 {
            theta = jacobi_step(&system, &theta).unwrap();
            let next = inf_dist(&theta, &exact);
            assert!(next <= system.gamma() * err + 1e-14);
            err = next;
        }
        assert!(err <= 1e-6);
    }

    #[test]
    fn steepest_descent_one_step_on_scaled_identity() {
        let chain = identity_chain();
        let sys = chain.policy_system(&Policy::constant(2, 0)).unwrap();
        for theta in [[0.0, 0.0], [10.0, -4.0]] {
            let stepped = steepest_descent_step(&sys, &theta).unwrap();
            assert!(inf_dist(&stepped, &[2.0, 4.0]) <= 1e-12);
        }
    }

    #[test]
    fn steepest_descent_fixed_point_and_monotone_error() {
        let system = random_system(20, 0.5, 14);
        let exact = system.solve_direct().unwrap();
        let same = steepest_descent_step(&system, &exact).unwrap();
        assert!(inf_dist(&same, &exact) <= 1e-12);

        // The error in the A^T A norm is exactly the residual 2-norm, which
        // exact line search cannot increase.
        let mut theta = vec![1.0; 20];
        let mut prev = two_norm(&system.residual(&theta));
        for _ in 0..60 {
            theta = steepest_descent_step(&system, &theta).unwrap();
            let cur = two_norm(&system.residual(&theta));
            assert!(cur <= prev * (1.0 + 1e-12));
            prev = cur;
        }
    }

    #[test]
    fn minres_residual_never_grows() {
        let system = random_system(24, 0.9, 25);
        let mut theta: Vec<f64> = (0..24).map(|i| (i as f64 * 0.31).sin()).collect();
        let mut prev = two_norm(&system.residual(&theta));
        for _ in 0..200 {
            theta = minres_step(&system, &theta).unwrap();
            let cur = two_norm(&system.residual(&theta));
            assert!(cur <= prev * (1.0 + 1e-12));
            prev = cur;
        }
        let exact = system.solve_direct().unwrap();
        let same = minres_step(&system, &exact).unwrap();
        assert!(inf_dist(&same, &exact) <= 1e-12);
    }

    #[test]
    fn minres_converges_past_indefinite_symmetric_part() {
        // High discount factors push the symmetric part of the coefficient
        // matrix indefinite; the line search still drives the residual down.
        let spec = RandomMdpSpec {
            n: 500,
            m: 40,
            gamma: 0.99,
            density: 0.004,
            seed: 77,
            ensure_regular: false,
        };
        let model = generate_random(&spec).unwrap();
        let pi = Policy::new((0..500).map(|i| (i * 11) % 40).collect());
        let system = model.policy_system(&pi).unwrap();

        let analysis =
            crate::structure::symmetric_part_analysis(system.transition(), system.gamma())
                .unwrap();
        assert!(
            analysis.lambda_min < 0.0,
            "test instance should have an indefinite symmetric part, got {}",
            analysis.lambda_min
        );

        let mut theta = vec![0.0; 500];
        let mut converged = false;
        for _ in 0..20_000 {
            theta = minres_step(&system, &theta).unwrap();
            if inf_norm(&system.residual(&theta)) < 1e-8 {
                converged = true;
                break;
            }
        }
        assert!(converged, "minres stalled on the indefinite instance");
        let exact = system.solve_direct().unwrap();
        assert!(inf_dist(&theta, &exact) <= 1e-6);
    }
}
