//! Plain-text renderings of result tables and summaries.

use std::fmt::Write;

use crate::reproduce::{Check, Reproduction};
use crate::scenario::{CalibrationOutcome, OptimizeReport, ResultRow, ScenarioReport};

pub const CSV_HEADER: &str =
    "swept_value,eta_formula,eta_sim,var_x,var_y,fidelity_avg,fidelity_benchmark,exceeds_benchmark";

/// Nine significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(r.swept_value),
            num(r.eta_formula),
            num(r.eta_sim),
            num(r.var_x),
            num(r.var_y),
            num(r.fidelity_avg),
            num(r.fidelity_benchmark),
            r.exceeds_benchmark
        );
    }
    out
}

/// Aligned table of the same columns as [`csv`].
pub fn table(title: &str, swept: &str, rows: &[ResultRow]) -> String {
    let mut out = format!("{title}\nrows: {}\n", rows.len());
    let _ = writeln!(
        out,
        "{swept:>16} {:>16} {:>16} {:>16} {:>16} {:>16} {:>16} {:>8}",
        "eta_formula", "eta_sim", "var_x", "var_y", "fidelity_avg", "benchmark", "exceeds"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>16} {:>16} {:>16} {:>16} {:>16} {:>16} {:>16} {:>8}",
            num(r.swept_value),
            num(r.eta_formula),
            num(r.eta_sim),
            num(r.var_x),
            num(r.var_y),
            num(r.fidelity_avg),
            num(r.fidelity_benchmark),
            r.exceeds_benchmark
        );
    }
    out
}

fn row_lines(out: &mut String, row: &ResultRow) {
    let _ = writeln!(out, "storage_time_s: {}", num(row.swept_value));
    let _ = writeln!(out, "eta_formula: {}", num(row.eta_formula));
    let _ = writeln!(out, "eta_sim: {}", num(row.eta_sim));
    let _ = writeln!(out, "var_x: {}", num(row.var_x));
    let _ = writeln!(out, "var_y: {}", num(row.var_y));
    let _ = writeln!(out, "fidelity_avg: {}", num(row.fidelity_avg));
    let _ = writeln!(out, "fidelity_benchmark: {}", num(row.fidelity_benchmark));
    let _ = writeln!(out, "exceeds_benchmark: {}", row.exceeds_benchmark);
}

pub fn scenario_summary(report: &ScenarioReport) -> String {
    let mut out = String::from("operating point\n");
    row_lines(&mut out, &report.row);
    let _ = writeln!(out, "spin_noise_weight: {}", num(report.point.spin_weight));
    match &report.trace {
        Some(trace) => {
            let _ = writeln!(
                out,
                "input: time-reversal optimized, {} iterations, converged = {}",
                trace.iterations.len(),
                trace.converged
            );
            out.push_str(&trace_lines(trace));
        }
        None => out.push_str("input: rising exponential\n"),
    }
    out
}

fn trace_lines(trace: &eitmem_core::OptimizationTrace) -> String {
    let mut out = format!(
        "{:>9} {:>16} {:>16} {:>16}\n",
        "iteration", "input_norm", "eta_sim", "overlap_next"
    );
    for (k, r) in trace.iterations.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>9} {:>16} {:>16} {:>16}",
            k + 1,
            num(r.input_norm),
            num(r.efficiency),
            num(r.overlap_with_next)
        );
    }
    out
}

pub fn optimize_summary(report: &OptimizeReport) -> String {
    let mut out = String::from("input mode optimization\n");
    let _ = writeln!(out, "best_exponential_rate_per_s: {}", num(report.exponential.rate));
    let _ = writeln!(out, "best_exponential_eta: {}", num(report.exponential.efficiency));
    let _ = writeln!(
        out,
        "time_reversal: {} iterations, converged = {}",
        report.trace.iterations.len(),
        report.trace.converged
    );
    out.push_str(&trace_lines(&report.trace));
    row_lines(&mut out, &report.row);
    out
}

pub fn calibration_summary(outcome: &CalibrationOutcome, row: &ResultRow) -> String {
    let mut out = String::from("calibration\n");
    let obs = &outcome.observables;
    let fit = &outcome.fit;
    let _ = writeln!(out, "efficiency_measured: {}", num(obs.efficiency_measured));
    let _ = writeln!(out, "external_transmission: {}", num(obs.external_transmission));
    let _ = writeln!(out, "efficiency_internal: {}", num(fit.efficiency_internal));
    let _ = writeln!(out, "reference_storage_time_s: {}", num(obs.reference_storage_time));
    let _ = writeln!(out, "gamma1_per_s: {}", num(outcome.gamma1));
    let _ = writeln!(out, "gamma2_per_s: {}", num(outcome.gamma2));
    let _ = writeln!(out, "gamma0_per_s: {}", num(fit.gamma0));
    let _ = writeln!(out, "kappa_per_s: {}", num(fit.kappa));
    let _ = writeln!(out, "detected_variance: {}", num(fit.retrieved_variance()));
    let _ = writeln!(out, "spin_noise_weight: {}", num(outcome.spin_weight));
    let _ = writeln!(out, "fitted_excess_noise: {}", num(outcome.fitted_excess_noise));
    let _ = writeln!(out, "excess_noise: {}", num(outcome.excess_noise));
    row_lines(&mut out, row);
    out
}

fn check_line(check: &Check) -> String {
    format!(
        "{:<4}  {:<28} computed {:<16} {}",
        if check.pass { "PASS" } else { "FAIL" },
        check.name,
        num(check.computed),
        check.target
    )
}

pub fn reproduction_summary(rep: &Reproduction) -> String {
    let mut out = String::from("reproduction of published values\n");
    for check in &rep.checks {
        out.push_str(&check_line(check));
        out.push('\n');
    }
    let failed = rep.checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(
        out,
        "overall: {} ({} of {} checks passed)",
        if failed == 0 { "PASS" } else { "FAIL" },
        rep.checks.len() - failed,
        rep.checks.len()
    );
    out
}
