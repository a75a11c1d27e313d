//! Adapter for parallel-machine scheduling benchmark tables.
//!
//! Those benchmarks list per-job processing times in a whitespace-separated
//! numeric table. Jobs become routes and machines become drones: each job
//! contributes its first machine's completion time as the route time
//! (in minutes), and the recharge time defaults to 75 minutes. The file
//! syntax varies between benchmark dumps, so the column/row layout is
//! configurable while the adaptation rule itself is fixed.

use crate::model::ScheduleInstance;

use super::IoError;

/// Default recharge time for converted benchmarks, in minutes.
pub const DEFAULT_BENCH_RECHARGE: f64 = 75.0;

/// Where the per-job time lives in the raw table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkLayout {
    /// 1-based column holding each job's first-machine completion time.
    pub time_column: usize,
    /// Header rows to skip before the job rows start.
    pub skip_rows: usize,
    /// Expected job count; checked against the table when set.
    pub expected_jobs: Option<usize>,
}

impl Default for BenchmarkLayout {
    fn default() -> Self {
        Self {
            time_column: 1,
            skip_rows: 0,
            expected_jobs: None,
        }
    }
}

impl BenchmarkLayout {
    /// Parse a `key=value` list such as `col=1,skip=2,jobs=200`.
    pub fn parse(expr: &str) -> Result<Self, IoError> {
        let mut layout = Self::default();
        let mut column_seen = false;
        for part in expr.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| IoError::Layout(format!("expected key=value, got `{part}`")))?;
            let parse = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| IoError::Layout(format!("bad number `{v}` for `{key}`")))
            };
            match key {
                "col" => {
                    layout.time_column = parse(value)?;
                    column_seen = true;
                }
                "skip" => layout.skip_rows = parse(value)?,
                "jobs" => layout.expected_jobs = Some(parse(value)?),
                other => {
                    return Err(IoError::Layout(format!("unknown layout key `{other}`")));
                }
            }
        }
        if !column_seen {
            return Err(IoError::Layout("layout must name a column, e.g. col=1".into()));
        }
        if layout.time_column == 0 {
            return Err(IoError::Layout("columns are 1-based".into()));
        }
        Ok(layout)
    }
}

/// Convert a raw benchmark table into a scheduling instance with `drones`
/// drones and the given recharge time.
pub fn adapt_machine_scheduling(
    text: &str,
    layout: &BenchmarkLayout,
    drones: usize,
    recharge: f64,
) -> Result<ScheduleInstance, IoError> {
    if layout.time_column == 0 {
        return Err(IoError::Layout("columns are 1-based".into()));
    }
    let mut route_times = Vec::new();
    for (idx, raw) in text.lines().enumerate().skip(layout.skip_rows) {
        let line_no = idx + 1;
        let cells: Vec<&str> = raw.split_whitespace().collect();
        if cells.is_empty() {
            continue;
        }
        let cell = cells.get(layout.time_column - 1).ok_or_else(|| {
            IoError::Layout(format!(
                "line {line_no}: row has {} columns, layout wants column {}",
                cells.len(),
                layout.time_column
            ))
        })?;
        let value: f64 = cell
            .parse()
            .map_err(|_| IoError::syntax(line_no, format!("non-numeric cell `{cell}`")))?;
        route_times.push(value);
    }
    if route_times.is_empty() {
        return Err(IoError::Layout("table has no job rows".into()));
    }
    if let Some(expected) = layout.expected_jobs {
        if route_times.len() != expected {
            return Err(IoError::Layout(format!(
                "table has {} job rows, layout expects {expected}",
                route_times.len()
            )));
        }
    }
    Ok(ScheduleInstance::new(drones, recharge, route_times)?)
}
