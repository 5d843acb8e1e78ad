//! Dynamic SIS epidemic MDP: the state is the susceptible count of a
//! fixed-size population, actions combine hygiene and distancing levels,
//! infections follow a binomial draw, and the stage cost trades financial
//! burden, quality of life and medical load.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::model::MdpModel;

pub const HYGIENE_LEVELS: usize = 5;
pub const DISTANCING_LEVELS: usize = 4;
pub const NUM_ACTIONS: usize = HYGIENE_LEVELS * DISTANCING_LEVELS;

/// Probability entries below this are pruned from transition rows, which are
/// then renormalized.
const PRUNE_THRESHOLD: f64 = 1e-15;

/// Flat action index of a (hygiene, distancing) pair.
pub fn action_index(hygiene: usize, distancing: usize) -> usize {
    hygiene * DISTANCING_LEVELS + distancing
}

/// Inverse of [`action_index`].
pub fn action_levels(action: usize) -> (usize, usize) {
    (action / DISTANCING_LEVELS, action % DISTANCING_LEVELS)
}

/// Model parameters. The default tables make stronger measures cost more,
/// lower the quality-of-life score, and reduce contact rate and per-contact
/// infection probability; all of them can be overridden from a JSON config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SisParams {
    /// Population size N; the state space is {0, ..., N}.
    pub population: usize,
    pub gamma: f64,
    pub w_f: f64,
    pub w_q: f64,
    pub w_h: f64,
    /// Medical cost per infected individual.
    pub c_h_per_case: f64,
    /// Financial cost per action, hygiene-major 5 x 4 table.
    pub c_f: Vec<Vec<f64>>,
    /// Quality-of-life score per action in [0, 1].
    pub c_q: Vec<Vec<f64>>,
    /// Contact rate per action, strictly positive.
    pub lambda: Vec<Vec<f64>>,
    /// Per-contact infection probability per action in [0, 1].
    pub psi: Vec<Vec<f64>>,
}

impl Default for SisParams {
    fn default() -> Self {
        let table = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
            (0..HYGIENE_LEVELS)
                .map(|a1| (0..DISTANCING_LEVELS).map(|a2| f(a1, a2)).collect())
                .collect()
        };
        SisParams {
            population: 100,
            gamma: 0.9,
            w_f: 1.0,
            w_q: 1.0,
            w_h: 1.0,
            c_h_per_case: 0.01,
            c_f: table(&|a1, a2| 0.1 * a1 as f64 + 0.2 * a2 as f64),
            c_q: table(&|a1, a2| {
                (1.0 - (a1 as f64 / 4.0 + a2 as f64 / 3.0) / 2.0).clamp(0.0, 1.0)
            }),
            lambda: table(&|_, a2| 5.0 * (1.0 - 0.2 * a2 as f64)),
            psi: table(&|a1, _| 0.2 * (1.0 - 0.2 * a1 as f64)),
        }
    }
}

impl SisParams {
    pub fn new(population: usize, gamma: f64) -> Self {
        SisParams {
            population,
            gamma,
            ..SisParams::default()
        }
    }

    pub fn num_states(&self) -> usize {
        self.population + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(Error::InvalidSpec("population must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::GammaOutOfRange(self.gamma));
        }
        for (name, table) in [
            ("c_f", &self.c_f),
            ("c_q", &self.c_q),
            ("lambda", &self.lambda),
            ("psi", &self.psi),
        ] {
            if table.len() != HYGIENE_LEVELS
                || table.iter().any(|row| row.len() != DISTANCING_LEVELS)
            {
                return Err(Error::InvalidSpec(format!(
                    "{name} table must be {HYGIENE_LEVELS} x {DISTANCING_LEVELS}"
                )));
            }
            if table.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec(format!("{name} table has non-finite entries")));
            }
        }
        if self.c_q.iter().flatten().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidSpec("c_q entries must lie in [0, 1]".into()));
        }
        if self.lambda.iter().flatten().any(|&v| v <= 0.0) {
            return Err(Error::InvalidSpec("lambda entries must be positive".into()));
        }
        if self.psi.iter().flatten().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidSpec("psi entries must lie in [0, 1]".into()));
        }
        if [self.w_f, self.w_q, self.w_h, self.c_h_per_case]
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::InvalidSpec(
                "weights and c_h_per_case must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    fn check_indices(&self, s: usize, action: usize) -> Result<(usize, usize)> {
        if s > self.population {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: s,
                bound: self.population + 1,
            });
        }
        if action >= NUM_ACTIONS {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: action,
                bound: NUM_ACTIONS,
            });
        }
        Ok(action_levels(action))
    }
}

/// Probability that one susceptible person becomes infected during the next
/// period: `1 - exp(-lambda(a) * beta(s) * psi(a))` with `beta(s) = (N - s)
/// / N` the fraction of infectious contacts.
pub fn infection_probability(params: &SisParams, s: usize, action: usize) -> Result<f64> {
    let (a1, a2) = params.check_indices(s, action)?;
    let n = params.population as f64;
    let beta = (n - s as f64) / n;
    let exponent = params.lambda[a1][a2] * beta * params.psi[a1][a2];
    Ok(-(-exponent).exp_m1())
}

/// Binomial transition row given the per-person infection probability `q`:
/// out of `s` susceptibles, `i` get infected with probability
/// `C(s, i) q^i (1 - q)^(s - i)`, everyone previously infected recovers, and
/// the next state is `N - i`. Entries are anchored at the distribution mode
/// in log space and walked outwards with the exact pmf ratio until pruning.
pub fn binomial_infection_row(s: usize, q: f64, population: usize) -> Vec<(usize, f64)> {
    let n = population;
    if s == 0 || q <= 0.0 {
        return vec![(n, 1.0)];
    }
    if q >= 1.0 {
        return vec![(n - s, 1.0)];
    }
    let ln_fact = ln_factorial_table(s);
    binomial_row_with_table(&ln_fact, s, q, n)
}

fn ln_factorial_table(up_to: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(up_to + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for k in 1..=up_to {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

fn binomial_row_with_table(
    ln_fact: &[f64],
    s: usize,
    q: f64,
    population: usize,
) -> Vec<(usize, f64)> {
    let ln_q = q.ln();
    let ln_1mq = (1.0 - q).ln();
    let ln_pmf = |i: usize| -> f64 {
        ln_fact[s] - ln_fact[i] - ln_fact[s - i] + i as f64 * ln_q + (s - i) as f64 * ln_1mq
    };
    let mode = (((s + 1) as f64 * q).floor() as usize).min(s);
    let p_mode = ln_pmf(mode).exp();

    // Infections and masses, walking each unimodal tail until prune.
    let mut masses: Vec<(usize, f64)> = vec![(mode, p_mode)];
    let mut p = p_mode;
    let mut i = mode;
    while i > 0 {
        // pmf(i-1) = pmf(i) * i / (s - i + 1) * (1 - q) / q
        p *= i as f64 / (s - i + 1) as f64 * (1.0 - q) / q;
        i -= 1;
        if p < PRUNE_THRESHOLD {
            break;
        }
        masses.push((i, p));
    }
    p = p_mode;
    i = mode;
    while i < s {
        // pmf(i+1) = pmf(i) * (s - i) / (i + 1) * q / (1 - q)
        p *= (s - i) as f64 / (i + 1) as f64 * q / (1.0 - q);
        i += 1;
        if p < PRUNE_THRESHOLD {
            break;
        }
        masses.push((i, p));
    }

    let total: f64 = masses.iter().map(|(_, p)| p).sum();
    let mut row: Vec<(usize, f64)> = masses
        .into_iter()
        .map(|(i, p)| (population - i, p / total))
        .collect();
    row.sort_unstable_by_key(|&(col, _)| col);
    row
}

/// Sparse transition probability row for state `s` under `action`. State N
/// is absorbing: with no infectious individuals left nobody gets infected.
pub fn transition_row(params: &SisParams, s: usize, action: usize) -> Result<Vec<(usize, f64)>> {
    params.check_indices(s, action)?;
    if s == params.population {
        return Ok(vec![(params.population, 1.0)]);
    }
    let q = infection_probability(params, s, action)?;
    Ok(binomial_infection_row(s, q, params.population))
}

/// Stage cost `w_f c_f(a) - w_q c_q(a) + w_h c_h_per_case (N - s)`.
pub fn stage_cost(params: &SisParams, s: usize, action: usize) -> Result<f64> {
    let (a1, a2) = params.check_indices(s, action)?;
    let infected = (params.population - s) as f64;
    Ok(params.w_f * params.c_f[a1][a2] - params.w_q * params.c_q[a1][a2]
        + params.w_h * params.c_h_per_case * infected)
}

/// Assembles the full model: N + 1 states by 20 actions. Rows are built in
/// parallel; assembly order is fixed, so the result does not depend on the
/// worker schedule.
pub fn build_sis_mdp(params: &SisParams) -> Result<MdpModel> {
    params.validate()?;
    let n_states = params.num_states();
    let population = params.population;
    let ln_fact = ln_factorial_table(population);

    let mut matrices = Vec::with_capacity(NUM_ACTIONS);
    for action in 0..NUM_ACTIONS {
        let rows: Result<Vec<Vec<(usize, f64)>>> = (0..n_states)
            .into_par_iter()
            .map(|s| {
                if s == population {
                    return Ok(vec![(population, 1.0)]);
                }
                let q = infection_probability(params, s, action)?;
                if q <= 0.0 {
                    return Ok(vec![(population, 1.0)]);
                }
                Ok(binomial_row_with_table(&ln_fact, s, q, population))
            })
            .collect();
        matrices.push(CsrMatrix::from_rows(n_states, n_states, rows?)?);
    }

    let mut costs = Vec::with_capacity(n_states * NUM_ACTIONS);
    for s in 0..n_states {
        for action in 0..NUM_ACTIONS {
            costs.push(stage_cost(params, s, action)?);
        }
    }
    MdpModel::from_parts(params.gamma, matrices, costs)
}
