//! Seeded random MDP instances for benchmarks and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::model::MdpModel;

/// Specification of a random instance. The seed fully determines the output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomMdpSpec {
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    /// Fraction of states reachable from each (state, action); rows carry
    /// `round(density * n)` nonzeros.
    pub density: f64,
    pub seed: u64,
    /// Adds a shared random cycle plus a small diagonal weight to every row,
    /// which makes the transition matrix of every policy primitive.
    #[serde(default)]
    pub ensure_regular: bool,
}

impl RandomMdpSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidSpec("n and m must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::GammaOutOfRange(self.gamma));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "density {} outside (0, 1]",
                self.density
            )));
        }
        if self.density * (self.n as f64) < 1.0 {
            return Err(Error::InvalidSpec(
                "density * n < 1: rows would be empty".into(),
            ));
        }
        Ok(())
    }
}

const REGULAR_DIAGONAL_WEIGHT: f64 = 1e-3;

/// Generates a random MDP. Successors per row are sampled uniformly without
/// replacement and weighted by a flat Dirichlet draw; costs are uniform on
/// [0, 1).
pub fn generate_random(spec: &RandomMdpSpec) -> Result<MdpModel> {
    spec.validate()?;
    let n = spec.n;
    let k = ((spec.density * n as f64).round() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // One cycle shared by all actions: any gathered policy matrix then
    // contains the full cycle and a positive diagonal.
    let cycle_next: Option<Vec<usize>> = if spec.ensure_regular {
        let mut order: Vec<usize> = (0..n).collect();
        for t in (1..n).rev() {
            let u = rng.gen_range(0..=t);
            order.swap(t, u);
        }
        let mut next = vec![0usize; n];
        for t in 0..n {
            next[order[t]] = order[(t + 1) % n];
        }
        Some(next)
    } else {
        None
    };

    let mut matrices = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut successors = sample_distinct(&mut rng, n, k);
            if let Some(next) = &cycle_next {
                if !successors.contains(&next[i]) {
                    successors[0] = next[i];
                }
            }
            let mut row: Vec<(usize, f64)> = successors
                .into_iter()
                .map(|j| (j, exp_draw(&mut rng)))
                .collect();
            normalize(&mut row);
            if cycle_next.is_some() {
                match row.iter_mut().find(|(j, _)| *j == i) {
                    Some(entry) => entry.1 += REGULAR_DIAGONAL_WEIGHT,
                    None => row.push((i, REGULAR_DIAGONAL_WEIGHT)),
                }
                normalize(&mut row);
            }
            rows.push(row);
        }
        matrices.push(CsrMatrix::from_rows(n, n, rows)?);
    }

    let mut costs = Vec::with_capacity(n * spec.m);
    for _ in 0..n * spec.m {
        costs.push(rng.gen::<f64>());
    }
    MdpModel::from_parts(spec.gamma, matrices, costs)
}

fn normalize(row: &mut [(usize, f64)]) {
    let total: f64 = row.iter().map(|(_, w)| w).sum();
    for entry in row {
        entry.1 /= total;
    }
}

/// `k` distinct indices from `0..n`, by partial Fisher-Yates.
fn sample_distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for t in 0..k {
        let u = rng.gen_range(t..n);
        pool.swap(t, u);
    }
    pool.truncate(k);
    pool
}

fn exp_draw(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln()
}
