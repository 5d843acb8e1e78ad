//! Emission of solve results: a summary JSON per run and per-iteration
//! trace CSVs for plotting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dp::{SolveReport, TerminatedBy};
use crate::error::Result;
use crate::eval::InnerTrace;
use crate::model::MdpModel;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveSummary {
    pub solver: String,
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub alpha: Option<f64>,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    pub wall_time_s: f64,
    pub final_residual_inf: f64,
    pub terminated_by: TerminatedBy,
}

pub fn summarize(
    solver: &str,
    model: &MdpModel,
    alpha: Option<f64>,
    report: &SolveReport,
) -> SolveSummary {
    SolveSummary {
        solver: solver.to_string(),
        n: model.num_states(),
        m: model.num_actions(),
        gamma: model.gamma(),
        alpha,
        outer_iters: report.outer_iters,
        total_inner_iters: report.total_inner_iters(),
        wall_time_s: report.wall_time_s,
        final_residual_inf: report.final_residual_inf(),
        terminated_by: report.terminated_by,
    }
}

pub fn write_summary_json(path: &Path, summary: &SolveSummary) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, summary)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// One row per iterate: `iter,residual_inf,error_inf,inner_iters,cum_time_s`.
/// The error column stays empty when no reference was supplied.
pub fn write_trace_csv(path: &Path, report: &SolveReport) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "iter,residual_inf,error_inf,inner_iters,cum_time_s")?;
    for k in 0..=report.outer_iters {
        let error = report
            .error_history
            .as_ref()
            .map(|h| h[k].to_string())
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            k,
            report.residual_history[k],
            error,
            report.inner_iters_history[k],
            report.cum_time_history[k]
        )?;
    }
    out.flush()?;
    Ok(())
}

/// One row per inner iteration: `iter,residual_inf,residual_2`.
pub fn write_inner_trace_csv(path: &Path, trace: &InnerTrace) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "iter,residual_inf,residual_2")?;
    for (k, (inf, two)) in trace
        .residual_inf_history
        .iter()
        .zip(&trace.residual_2_history)
        .enumerate()
    {
        writeln!(out, "{k},{inf},{two}")?;
    }
    out.flush()?;
    Ok(())
}
