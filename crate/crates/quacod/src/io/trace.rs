//! Convergence trace CSV.
//!
//! Header `iter,f,makespan,best_makespan,n_sel,q_sel,accepted`, one row per
//! iteration. Values are plain decimals with up to 9 significant digits, so
//! an emitted file re-parses to the values it shows and re-emits
//! byte-identically.

use crate::engine::TraceRecord;

use super::IoError;

/// Format a value as a plain decimal with up to 9 significant digits,
/// trailing zeros trimmed.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (9 - 1 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub const TRACE_HEADER: &str = "iter,f,makespan,best_makespan,n_sel,q_sel,accepted";

/// Render a trace as CSV text.
pub fn write_trace(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.iteration,
            format_value(rec.objective),
            format_value(rec.makespan),
            format_value(rec.best_makespan),
            rec.selected_routes,
            rec.selected_drones,
            rec.accepted
        ));
    }
    out
}

/// Parse a trace CSV, validating the header, strictly increasing iteration
/// numbers, and a non-increasing best-makespan column.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, IoError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| IoError::syntax(1, "empty trace file"))?;
    if header.trim() != TRACE_HEADER {
        return Err(IoError::syntax(1, format!("bad header `{header}`")));
    }

    let mut records = Vec::new();
    let mut last_iter: Option<usize> = None;
    let mut last_best = f64::INFINITY;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(IoError::syntax(
                line_no,
                format!("expected 7 fields, found {}", fields.len()),
            ));
        }
        let parse_usize = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| IoError::syntax(line_no, format!("bad {what} `{s}`")))
        };
        let parse_f64 = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| IoError::syntax(line_no, format!("bad {what} `{s}`")))
        };
        let record = TraceRecord {
            iteration: parse_usize(fields[0], "iteration")?,
            objective: parse_f64(fields[1], "objective")?,
            makespan: parse_f64(fields[2], "makespan")?,
            best_makespan: parse_f64(fields[3], "best makespan")?,
            selected_routes: parse_usize(fields[4], "route count")?,
            selected_drones: parse_usize(fields[5], "drone count")?,
            accepted: match fields[6] {
                "true" => true,
                "false" => false,
                other => {
                    return Err(IoError::syntax(
                        line_no,
                        format!("bad accepted flag `{other}`"),
                    ))
                }
            },
        };
        if let Some(prev) = last_iter {
            if record.iteration <= prev {
                return Err(IoError::syntax(
                    line_no,
                    format!(
                        "iteration {} does not increase past {prev}",
                        record.iteration
                    ),
                ));
            }
        }
        if record.best_makespan > last_best + 1e-12 {
            return Err(IoError::syntax(
                line_no,
                format!(
                    "best makespan {} increases past {last_best}",
                    record.best_makespan
                ),
            ));
        }
        last_iter = Some(record.iteration);
        last_best = record.best_makespan;
        records.push(record);
    }
    Ok(records)
}
