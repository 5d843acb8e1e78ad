//! Structural and spectral predicates on transition matrices: strong
//! connectivity, graph period, MDP classification, the relaxation interval
//! for accelerated Richardson iterations, definiteness of the symmetric
//! part, and a Krylov-rank oracle for minimal polynomial degrees.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, two_norm, CsrMatrix};
use crate::model::MdpModel;

/// Largest dimension accepted by the dense eigensolve-based operations.
const DENSE_EIG_LIMIT: usize = 4096;

/// Irreducibility, graph period and primitivity of a nonnegative matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MatrixClassification {
    pub irreducible: bool,
    /// Index of cyclicity; defined only for irreducible matrices.
    pub period: Option<usize>,
    pub primitive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MdpVerdict {
    General,
    Ergodic,
    Regular,
    Unknown,
}

/// Outcome of enumerating policies and classifying each induced chain.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MdpClass {
    pub verdict: MdpVerdict,
    pub policies_checked: usize,
}

/// Definiteness data for the symmetric part `I - gamma (P + P^T)/2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymmetricPartAnalysis {
    pub lambda_min: f64,
    pub positive_definite: bool,
    /// `1 / lambda_max((P + P^T)/2)`; the symmetric part is positive
    /// definite exactly for discount factors below this.
    pub gamma_threshold: f64,
}

fn check_nonnegative_square(p: &CsrMatrix) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::DimensionMismatch {
            what: "square matrix",
            expected: p.nrows(),
            found: p.ncols(),
        });
    }
    for (i, j, v) in p.iter() {
        if v < 0.0 {
            return Err(Error::NegativeEntry {
                row: i,
                col: j,
                value: v,
            });
        }
    }
    Ok(())
}

fn bfs_reachable(adj: &CsrMatrix, start: usize, reversed: bool) -> Vec<bool> {
    let n = adj.nrows();
    let go = if reversed {
        adj.transpose()
    } else {
        adj.clone()
    };
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        let (cols, vals) = go.row(u);
        for (&v, &w) in cols.iter().zip(vals) {
            if w > 0.0 && !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// True when the digraph on strictly positive entries is strongly connected.
pub fn is_irreducible(p: &CsrMatrix) -> Result<bool> {
    check_nonnegative_square(p)?;
    let n = p.nrows();
    if n == 1 {
        // A single state is irreducible only with a positive self-loop.
        return Ok(p.row(0).1.iter().any(|&v| v > 0.0));
    }
    let forward = bfs_reachable(p, 0, false);
    if forward.iter().any(|&s| !s) {
        return Ok(false);
    }
    let backward = bfs_reachable(p, 0, true);
    Ok(backward.iter().all(|&s| s))
}

/// Graph period (= index of cyclicity) and primitivity of an irreducible
/// matrix, via the gcd of level differences along a breadth-first search.
pub fn period_and_primitivity(p: &CsrMatrix) -> Result<MatrixClassification> {
    if !is_irreducible(p)? {
        return Err(Error::NotIrreducible);
    }
    let n = p.nrows();
    let mut level = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    level[0] = 0;
    queue.push_back(0);
    while let Some(u) = queue.pop_front() {
        let (cols, vals) = p.row(u);
        for (&v, &w) in cols.iter().zip(vals) {
            if w > 0.0 && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g: u64 = 0;
    for i in 0..n {
        let (cols, vals) = p.row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            if w > 0.0 {
                let diff = (level[i] as i64 + 1 - level[j] as i64).unsigned_abs();
                g = gcd(g, diff);
            }
        }
    }
    debug_assert!(g >= 1);
    let period = g as usize;
    Ok(MatrixClassification {
        irreducible: true,
        period: Some(period),
        primitive: period == 1,
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Classifies the induced chain of a single matrix without requiring
/// irreducibility.
pub fn classify_matrix(p: &CsrMatrix) -> Result<MatrixClassification> {
    if is_irreducible(p)? {
        period_and_primitivity(p)
    } else {
        Ok(MatrixClassification {
            irreducible: false,
            period: None,
            primitive: false,
        })
    }
}

/// Enumerates deterministic policies (up to `cap`) and classifies the MDP:
/// every induced matrix irreducible means ergodic, every one primitive means
/// regular. A reducible counterexample settles the verdict even when the
/// policy space is too large to enumerate; otherwise an incomplete
/// enumeration is reported as unknown.
pub fn classify_mdp(model: &MdpModel, policy_enumeration_cap: usize) -> MdpClass {
    let n = model.num_states();
    let m = model.num_actions();
    let total = (m as u128).checked_pow(n as u32);
    let complete = matches!(total, Some(t) if t <= policy_enumeration_cap as u128);
    let budget = match total {
        Some(t) if t <= policy_enumeration_cap as u128 => t as usize,
        _ => policy_enumeration_cap,
    };

    let mut actions = vec![0usize; n];
    let mut checked = 0usize;
    let mut all_primitive = true;
    while checked < budget {
        let rows = (0..n)
            .map(|i| {
                let (cols, vals) = model.transition(actions[i]).row(i);
                cols.iter().copied().zip(vals.iter().copied()).collect()
            })
            .collect();
        let p_pi = CsrMatrix::from_rows(n, n, rows).expect("gathered rows are valid");
        checked += 1;
        match classify_matrix(&p_pi).expect("probabilities are nonnegative") {
            c if !c.irreducible => {
                return MdpClass {
                    verdict: MdpVerdict::General,
                    policies_checked: checked,
                }
            }
            c if !c.primitive => all_primitive = false,
            _ => {}
        }
        // Odometer over action assignments.
        let mut pos = 0;
        loop {
            if pos == n {
                break;
            }
            actions[pos] += 1;
            if actions[pos] < m {
                break;
            }
            actions[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }

    let verdict = if !complete {
        MdpVerdict::Unknown
    } else if all_primitive {
        MdpVerdict::Regular
    } else {
        MdpVerdict::Ergodic
    };
    MdpClass {
        verdict,
        policies_checked: checked,
    }
}

fn dense_eigenvalues(p: &CsrMatrix) -> Result<Vec<faer::c64>> {
    if p.nrows() > DENSE_EIG_LIMIT {
        return Err(Error::TooLarge {
            what: "dense eigensolve",
            size: p.nrows() as u128,
            max: DENSE_EIG_LIMIT as u128,
        });
    }
    let dense = p.to_dense();
    let mat = faer::Mat::from_fn(p.nrows(), p.ncols(), |i, j| dense[i][j]);
    mat.eigenvalues()
        .map_err(|e| Error::EigensolveFailure(format!("{e:?}")))
}

/// Lower endpoint of the relaxation interval: for every `nu` strictly
/// between the returned value and 1, the Richardson iteration matrix
/// `I - (1/nu)(I - gamma P)` has spectral radius below `gamma`. For
/// matrices with a single eigenvalue on the unit circle the interval is
/// non-empty.
pub fn richardson_nu_lower(p: &CsrMatrix, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    check_nonnegative_square(p)?;
    let eigs = dense_eigenvalues(p)?;
    let mut lower = f64::NEG_INFINITY;
    for lambda in eigs {
        let re = lambda.re;
        let im = lambda.im;
        let shifted = 1.0 - gamma * re;
        let radicand = ((gamma * gamma - 1.0) * im * im + shifted * shifted).max(0.0);
        let nu1 = (shifted - gamma * radicand.sqrt()) / (1.0 - gamma * gamma);
        lower = lower.max(nu1);
    }
    Ok(lower)
}

/// Spectral radius of a dense square matrix.
pub fn spectral_radius(a: &[Vec<f64>]) -> Result<f64> {
    let n = a.len();
    if n > DENSE_EIG_LIMIT {
        return Err(Error::TooLarge {
            what: "dense eigensolve",
            size: n as u128,
            max: DENSE_EIG_LIMIT as u128,
        });
    }
    let mat = faer::Mat::from_fn(n, n, |i, j| a[i][j]);
    let eigs = mat
        .eigenvalues()
        .map_err(|e| Error::EigensolveFailure(format!("{e:?}")))?;
    Ok(eigs
        .into_iter()
        .fold(0.0f64, |m, c: faer::c64| m.max(c.norm())))
}

/// Eigenvalue data for `I - gamma (P + P^T)/2`. The smallest eigenvalue and
/// the threshold come from two separate symmetric eigensolves, so the
/// positive-definiteness flag and the threshold comparison are independent
/// routes to the same answer.
pub fn symmetric_part_analysis(p: &CsrMatrix, gamma: f64) -> Result<SymmetricPartAnalysis> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    check_nonnegative_square(p)?;
    let n = p.nrows();
    if n > DENSE_EIG_LIMIT {
        return Err(Error::TooLarge {
            what: "dense eigensolve",
            size: n as u128,
            max: DENSE_EIG_LIMIT as u128,
        });
    }
    let dense = p.to_dense();
    let sym = faer::Mat::from_fn(n, n, |i, j| 0.5 * (dense[i][j] + dense[j][i]));
    let h = faer::Mat::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - gamma * sym[(i, j)]
    });
    let h_eigs = h
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::EigensolveFailure(format!("{e:?}")))?;
    let s_eigs = sym
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::EigensolveFailure(format!("{e:?}")))?;
    let lambda_min = h_eigs
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let lambda_max_sym = s_eigs
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SymmetricPartAnalysis {
        lambda_min,
        positive_definite: lambda_min > 0.0,
        gamma_threshold: 1.0 / lambda_max_sym,
    })
}

/// Numerical degree of the minimal polynomial: the smallest Krylov dimension
/// at which `[v, Av, A^2 v, ...]` becomes rank deficient, maximized over
/// several random starting vectors. A test oracle, guarded to small sizes.
pub fn minimal_polynomial_degree(a: &[Vec<f64>]) -> Result<usize> {
    let n = a.len();
    if n > 64 {
        return Err(Error::TooLarge {
            what: "minimal polynomial oracle",
            size: n as u128,
            max: 64,
        });
    }
    for row in a {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                what: "square matrix",
                expected: n,
                found: row.len(),
            });
        }
    }
    let mul = |x: &[f64]| -> Vec<f64> { a.iter().map(|row| dot(row, x)).collect() };

    let mut rng = ChaCha8Rng::seed_from_u64(0x6d69_6e70_6f6c);
    let mut degree = 0usize;
    for _ in 0..5 {
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let norm = two_norm(&v);
        let mut basis = vec![v.iter().map(|x| x / norm).collect::<Vec<f64>>()];
        loop {
            let mut w = mul(basis.last().unwrap());
            let scale = two_norm(&w).max(1e-300);
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
            let rem = two_norm(&w);
            if rem <= 1e-10 * scale {
                break;
            }
            for wi in &mut w {
                *wi /= rem;
            }
            basis.push(w);
            if basis.len() == n {
                break;
            }
        }
        degree = degree.max(basis.len());
    }
    Ok(degree)
}
