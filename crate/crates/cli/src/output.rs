//! Result rows and their CSV form.
//!
//! Floats are rounded to 9 significant digits when a row is built and
//! written in shortest round-trip form, so reading a CSV back gives the
//! same rows bit for bit.

use crate::error::CliError;
use ilrep_core::Side;
use std::io::{Read, Write};

/// Rounds to 9 significant digits.
pub fn round_sig9(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    // `+ 0.0` folds −0 into 0
    format!("{v:.8e}").parse::<f64>().expect("formatted float parses") + 0.0
}

/// Shortest round-trip form, in scientific notation for very small or
/// very large magnitudes.
pub fn fmt_float(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn fmt_sig9(v: f64) -> String {
    fmt_float(round_sig9(v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub position: String,
    pub side: Side,
    pub lower: f64,
    pub upper: f64,
    pub direct: f64,
    /// Blank for closed-form rows.
    pub direct_std_error: Option<f64>,
    pub replication: f64,
    pub error_ratio: f64,
    pub wall_time: Option<f64>,
}

impl ResultRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scenario: impl Into<String>,
        position: impl Into<String>,
        side: Side,
        lower: f64,
        upper: f64,
        direct: f64,
        direct_std_error: Option<f64>,
        replication: f64,
    ) -> Self {
        ResultRow {
            scenario: scenario.into(),
            position: position.into(),
            side,
            lower: round_sig9(lower),
            upper: round_sig9(upper),
            direct: round_sig9(direct),
            direct_std_error: direct_std_error.map(round_sig9),
            replication: round_sig9(replication),
            // from the unrounded values, which may agree beyond 9 digits
            error_ratio: round_sig9(error_ratio(direct, replication)),
            wall_time: None,
        }
    }

    pub fn with_wall_time(mut self, seconds: f64) -> Self {
        self.wall_time = Some(round_sig9(seconds));
        self
    }
}

/// `|replication − direct| / |direct|`; zero when both vanish.
pub fn error_ratio(direct: f64, replication: f64) -> f64 {
    let diff = (replication - direct).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / direct.abs()
    }
}

const RESULT_HEADER: [&str; 9] =
    ["scenario", "position", "side", "lower", "upper", "direct", "direct_std_error", "replication", "error_ratio"];

pub fn write_results<W: Write>(rows: &[ResultRow], out: W, timings: bool) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = RESULT_HEADER.to_vec();
    if timings {
        header.push("wall_time_s");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.scenario.clone(),
            r.position.clone(),
            r.side.as_str().to_string(),
            fmt_float(r.lower),
            fmt_float(r.upper),
            fmt_float(r.direct),
            r.direct_std_error.map(fmt_float).unwrap_or_default(),
            fmt_float(r.replication),
            fmt_float(r.error_ratio),
        ];
        if timings {
            rec.push(r.wall_time.map(fmt_float).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io("writing csv", e))?;
    Ok(())
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>, CliError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let timings = match header.len() {
        9 => false,
        10 if header[9] == "wall_time_s" => true,
        _ => return Err(CliError::validation(format!("unexpected result header {header:?}"))),
    };
    if header[..9] != RESULT_HEADER {
        return Err(CliError::validation(format!("unexpected result header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |col: usize| -> Result<f64, CliError> {
            rec[col]
                .parse()
                .map_err(|_| CliError::validation(format!("line {line}: bad {} `{}`", RESULT_HEADER[col], &rec[col])))
        };
        let opt = |s: &str| -> Result<Option<f64>, CliError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| CliError::validation(format!("line {line}: bad number `{s}`")))
            }
        };
        rows.push(ResultRow {
            scenario: rec[0].to_string(),
            position: rec[1].to_string(),
            side: rec[2].parse().map_err(|e| CliError::validation(format!("line {line}: {e}")))?,
            lower: num(3)?,
            upper: num(4)?,
            direct: num(5)?,
            direct_std_error: opt(&rec[6])?,
            replication: num(7)?,
            error_ratio: num(8)?,
            wall_time: if timings { opt(&rec[9])? } else { None },
        });
    }
    Ok(rows)
}
