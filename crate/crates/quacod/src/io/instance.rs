//! Plain-text instance files.
//!
//! One directive per line, `#` starts a comment:
//!
//! ```text
//! version 1
//! unit hours
//! q 2
//! c 1.15
//! r 3.4 2.8 4.4
//! ```
//!
//! `r` lines may repeat and append; the route count is the list length. The
//! time unit is an opaque label carried through unchanged.

use crate::model::ScheduleInstance;

use super::IoError;

/// A parsed instance plus its optional unit label.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDocument {
    pub instance: ScheduleInstance,
    pub unit: Option<String>,
}

/// Parse an instance document. Numbers use exact decimal (`f64`) parsing;
/// errors carry the 1-based line number.
pub fn parse_instance(text: &str) -> Result<InstanceDocument, IoError> {
    let mut version: Option<u32> = None;
    let mut drones: Option<usize> = None;
    let mut recharge: Option<f64> = None;
    let mut route_times: Vec<f64> = Vec::new();
    let mut unit: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut tokens = line.split_whitespace();
        let Some(key) = tokens.next() else {
            continue;
        };
        match key {
            "version" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| IoError::syntax(line_no, "`version` needs a value"))?;
                let v: u32 = value.parse().map_err(|_| {
                    IoError::syntax(line_no, format!("bad version `{value}`"))
                })?;
                if v != 1 {
                    return Err(IoError::syntax(line_no, format!("unsupported version {v}")));
                }
                if version.replace(v).is_some() {
                    return Err(IoError::syntax(line_no, "duplicate `version`"));
                }
            }
            "q" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| IoError::syntax(line_no, "`q` needs a value"))?;
                let v: usize = value
                    .parse()
                    .map_err(|_| IoError::syntax(line_no, format!("bad drone count `{value}`")))?;
                if drones.replace(v).is_some() {
                    return Err(IoError::syntax(line_no, "duplicate `q`"));
                }
            }
            "c" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| IoError::syntax(line_no, "`c` needs a value"))?;
                let v: f64 = value.parse().map_err(|_| {
                    IoError::syntax(line_no, format!("bad recharge time `{value}`"))
                })?;
                if recharge.replace(v).is_some() {
                    return Err(IoError::syntax(line_no, "duplicate `c`"));
                }
            }
            "r" => {
                for value in tokens.by_ref() {
                    let v: f64 = value.parse().map_err(|_| {
                        IoError::syntax(line_no, format!("bad route time `{value}`"))
                    })?;
                    route_times.push(v);
                }
                continue; // `r` consumes the rest of the line
            }
            "unit" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| IoError::syntax(line_no, "`unit` needs a value"))?;
                if unit.replace(value.to_string()).is_some() {
                    return Err(IoError::syntax(line_no, "duplicate `unit`"));
                }
            }
            other => {
                return Err(IoError::syntax(line_no, format!("unknown field `{other}`")));
            }
        }
        if let Some(extra) = tokens.next() {
            return Err(IoError::syntax(
                line_no,
                format!("unexpected trailing token `{extra}`"),
            ));
        }
    }

    version.ok_or(IoError::MissingField("version"))?;
    let drones = drones.ok_or(IoError::MissingField("q"))?;
    let recharge = recharge.ok_or(IoError::MissingField("c"))?;
    if route_times.is_empty() {
        return Err(IoError::MissingField("r"));
    }
    let instance = ScheduleInstance::new(drones, recharge, route_times)?;
    Ok(InstanceDocument { instance, unit })
}

/// Render an instance document; `parse_instance` on the output yields an
/// identical instance (floats are written in shortest round-trip form).
pub fn write_instance(doc: &InstanceDocument) -> String {
    let mut out = String::from("version 1\n");
    if let Some(unit) = &doc.unit {
        out.push_str(&format!("unit {unit}\n"));
    }
    out.push_str(&format!("q {}\n", doc.instance.num_drones()));
    out.push_str(&format!("c {:?}\n", doc.instance.recharge()));
    out.push('r');
    for r in doc.instance.route_times() {
        out.push_str(&format!(" {r:?}"));
    }
    out.push('\n');
    out
}
