//! Parameter sweeps: a solver matrix run over a grid of discount factors,
//! forcing parameters or population sizes, with one aggregate CSV row per
//! cell and a summary JSON per cell.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{
    inexact_policy_iteration, optimistic_policy_iteration, policy_iteration, value_iteration,
    OuterConfig, SolveReport,
};
use crate::error::{Error, Result};
use crate::eval::InnerMethod;
use crate::io::read_model;
use crate::model::{MdpModel, ValueVector};
use crate::random::{generate_random, RandomMdpSpec};
use crate::report::{summarize, write_summary_json, SolveSummary};
use crate::sis::{build_sis_mdp, SisParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Gamma,
    Alpha,
    Population,
}

/// One solver configuration of the sweep matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverSpec {
    /// One of `vi`, `pi`, `opi`, `ipi`.
    pub outer: String,
    #[serde(default)]
    pub inner: Option<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub restart: Option<usize>,
    #[serde(default)]
    pub opi_w: Option<usize>,
    #[serde(default)]
    pub label: Option<String>,
}

impl SolverSpec {
    pub fn label(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        let mut label = self.outer.clone();
        if self.outer == "ipi" {
            label.push('-');
            label.push_str(self.inner.as_deref().unwrap_or("gmres"));
            if let Some(alpha) = self.alpha {
                label.push_str(&format!("(a={alpha})"));
            }
        }
        if self.outer == "opi" {
            if let Some(w) = self.opi_w {
                label.push_str(&format!("(w={w})"));
            }
        }
        label
    }

    pub fn inner_method(&self) -> Result<InnerMethod> {
        let method = match self.inner.as_deref().unwrap_or("gmres") {
            "richardson" => InnerMethod::Richardson {
                nu: self.nu.unwrap_or(1.0),
            },
            "jacobi" => InnerMethod::Jacobi,
            "gs" => InnerMethod::GaussSeidel,
            "sor" => InnerMethod::Sor {
                omega: self.omega.unwrap_or(1.0),
            },
            "sd" => InnerMethod::SteepestDescent,
            "minres" => InnerMethod::MinRes,
            "gmres" => InnerMethod::Gmres {
                restart: self.restart,
            },
            other => {
                return Err(Error::InvalidSpec(format!("unknown inner solver {other:?}")))
            }
        };
        method.validate()?;
        Ok(method)
    }
}

/// Where the swept models come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Sis(SisParams),
    Random(RandomMdpSpec),
    File { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub solvers: Vec<SolverSpec>,
    pub base: ModelSource,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub max_outer: Option<usize>,
    #[serde(default)]
    pub max_inner: Option<usize>,
    #[serde(default)]
    pub time_budget_s: Option<f64>,
}

fn default_tol() -> f64 {
    1e-8
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidSpec("sweep has no axis values".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidSpec("sweep has no solvers".into()));
        }
        if matches!(self.axis, SweepAxis::Population)
            && !matches!(self.base, ModelSource::Sis(_))
        {
            return Err(Error::InvalidSpec(
                "population sweeps need an sis base model".into(),
            ));
        }
        Ok(())
    }
}

/// One (axis value, solver) result. Failed cells carry the error text and
/// leave the sweep running.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub axis_value: f64,
    pub solver: String,
    pub status: String,
    pub summary: Option<SolveSummary>,
}

/// Runs the whole matrix and writes `sweep.csv` plus one summary JSON per
/// successful cell into `out_dir`. Cells run in parallel; the worker count
/// honors the `IPI_THREADS` environment variable.
pub fn run_sweep(spec: &SweepSpec, out_dir: &Path) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    std::fs::create_dir_all(out_dir)?;

    let cells: Vec<(usize, usize)> = (0..spec.values.len())
        .flat_map(|vi| (0..spec.solvers.len()).map(move |si| (vi, si)))
        .collect();

    let run_all = || -> Vec<SweepCell> {
        cells
            .par_iter()
            .map(|&(vi, si)| run_cell(spec, spec.values[vi], &spec.solvers[si]))
            .collect()
    };
    let results = match ipi_threads() {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?
            .install(run_all),
        None => run_all(),
    };

    let csv_path = out_dir.join("sweep.csv");
    let mut out = BufWriter::new(File::create(&csv_path)?);
    writeln!(
        out,
        "axis,axis_value,solver,status,wall_time_s,outer_iters,total_inner_iters,terminated_by"
    )?;
    let axis = match spec.axis {
        SweepAxis::Gamma => "gamma",
        SweepAxis::Alpha => "alpha",
        SweepAxis::Population => "population",
    };
    for cell in &results {
        match &cell.summary {
            Some(s) => writeln!(
                out,
                "{axis},{},{},{},{},{},{},{}",
                cell.axis_value,
                cell.solver,
                cell.status,
                s.wall_time_s,
                s.outer_iters,
                s.total_inner_iters,
                serde_json::to_value(s.terminated_by)?.as_str().unwrap_or("?")
            )?,
            None => writeln!(
                out,
                "{axis},{},{},{},,,,",
                cell.axis_value,
                cell.solver,
                cell.status.replace(',', ";")
            )?,
        }
        if let Some(s) = &cell.summary {
            let name = format!(
                "cell_{}_{}.summary.json",
                format_value(cell.axis_value),
                sanitize(&cell.solver)
            );
            write_summary_json(&out_dir.join(name), s)?;
        }
    }
    out.flush()?;
    Ok(results)
}

fn ipi_threads() -> Option<usize> {
    std::env::var("IPI_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
}

fn format_value(v: f64) -> String {
    let s = format!("{v}");
    s.replace('.', "p").replace('-', "m")
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect()
}

fn run_cell(spec: &SweepSpec, value: f64, solver: &SolverSpec) -> SweepCell {
    match run_cell_inner(spec, value, solver) {
        Ok((model, report, alpha)) => SweepCell {
            axis_value: value,
            solver: solver.label(),
            status: "ok".into(),
            summary: Some(summarize(&solver.label(), &model, alpha, &report)),
        },
        Err(e) => SweepCell {
            axis_value: value,
            solver: solver.label(),
            status: format!("error: {e}"),
            summary: None,
        },
    }
}

fn build_base(spec: &SweepSpec, axis_value: f64) -> Result<MdpModel> {
    match (&spec.base, spec.axis) {
        (ModelSource::Sis(params), SweepAxis::Gamma) => {
            let mut p = params.clone();
            p.gamma = axis_value;
            build_sis_mdp(&p)
        }
        (ModelSource::Sis(params), SweepAxis::Population) => {
            let mut p = params.clone();
            p.population = axis_value as usize;
            build_sis_mdp(&p)
        }
        (ModelSource::Sis(params), SweepAxis::Alpha) => build_sis_mdp(params),
        (ModelSource::Random(r), SweepAxis::Gamma) => {
            let mut spec = r.clone();
            spec.gamma = axis_value;
            generate_random(&spec)
        }
        (ModelSource::Random(r), _) => generate_random(r),
        (ModelSource::File { path }, SweepAxis::Gamma) => {
            read_model(Path::new(path))?.with_gamma(axis_value)
        }
        (ModelSource::File { path }, _) => read_model(Path::new(path)),
    }
}

fn run_cell_inner(
    spec: &SweepSpec,
    value: f64,
    solver: &SolverSpec,
) -> Result<(MdpModel, SolveReport, Option<f64>)> {
    let model = build_base(spec, value)?;
    let alpha = if matches!(spec.axis, SweepAxis::Alpha) {
        value
    } else {
        solver.alpha.unwrap_or(0.1)
    };
    let mut config = OuterConfig {
        tol: spec.tol,
        alpha,
        inner_method: solver.inner_method()?,
        ..OuterConfig::default()
    };
    if let Some(mo) = spec.max_outer {
        config.max_outer_iters = mo;
    }
    if let Some(mi) = spec.max_inner {
        config.max_inner_iters = mi;
    }
    if let Some(tb) = spec.time_budget_s {
        config.time_budget_s = Some(tb);
    }
    if let Some(w) = solver.opi_w {
        config.opi_w = w;
    }
    let v0 = ValueVector::zeros(model.num_states());
    let (report, used_alpha) = match solver.outer.as_str() {
        "vi" => (value_iteration(&model, &v0, &config)?, None),
        "pi" => (policy_iteration(&model, &v0, &config)?, None),
        "opi" => (optimistic_policy_iteration(&model, &v0, &config)?, None),
        "ipi" => (
            inexact_policy_iteration(&model, &v0, &config)?,
            Some(config.alpha),
        ),
        other => {
            return Err(Error::InvalidSpec(format!(
                "unknown outer solver {other:?}"
            )))
        }
    };
    Ok((model, report, used_alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_sis_spec() -> SweepSpec {
        SweepSpec {
            axis: SweepAxis::Gamma,
            values: vec![0.1, 0.5],
            solvers: vec![
                SolverSpec {
                    outer: "pi".into(),
                    inner: None,
                    alpha: None,
                    nu: None,
                    omega: None,
                    restart: None,
                    opi_w: None,
                    label: None,
                },
                SolverSpec {
                    outer: "ipi".into(),
                    inner: Some("gmres".into()),
                    alpha: Some(0.1),
                    nu: None,
                    omega: None,
                    restart: None,
                    opi_w: None,
                    label: None,
                },
            ],
            base: ModelSource::Sis(SisParams::new(40, 0.9)),
            tol: 1e-8,
            max_outer: None,
            max_inner: None,
            time_budget_s: None,
        }
    }

    #[test]
    fn gamma_sweep_produces_all_cells() {
        let dir = tempfile::tempdir().unwrap();
        let cells = run_sweep(&tiny_sis_spec(), dir.path()).unwrap();
        assert_eq!(cells.len(), 4);
        for cell in &cells {
            assert_eq!(cell.status, "ok", "{:?}", cell);
            let summary = cell.summary.as_ref().unwrap();
            assert_eq!(
                summary.terminated_by,
                crate::dp::TerminatedBy::Tolerance
            );
        }
        let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        assert_eq!(csv.lines().count(), 5);
        // Per-cell summaries land next to the aggregate.
        let json_count = std::fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .file_name()
                    .to_string_lossy()
                    .ends_with(".summary.json")
            })
            .count();
        assert_eq!(json_count, 4);
    }

    #[test]
    fn empty_solver_list_rejected() {
        let mut spec = tiny_sis_spec();
        spec.solvers.clear();
        assert!(matches!(
            run_sweep(&spec, Path::new("/tmp/unused")),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn population_sweep_requires_sis() {
        let mut spec = tiny_sis_spec();
        spec.axis = SweepAxis::Population;
        spec.base = ModelSource::File {
            path: "nope.json".into(),
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn failed_cells_keep_sweep_running() {
        let mut spec = tiny_sis_spec();
        spec.solvers.push(SolverSpec {
            outer: "nonsense".into(),
            inner: None,
            alpha: None,
            nu: None,
            omega: None,
            restart: None,
            opi_w: None,
            label: Some("bad".into()),
        });
        let dir = tempfile::tempdir().unwrap();
        let cells = run_sweep(&spec, dir.path()).unwrap();
        assert_eq!(cells.len(), 6);
        let failed: Vec<_> = cells.iter().filter(|c| c.status != "ok").collect();
        assert_eq!(failed.len(), 2);
        assert!(failed.iter().all(|c| c.solver == "bad"));
        assert_eq!(cells.iter().filter(|c| c.status == "ok").count(), 4);
    }
}
