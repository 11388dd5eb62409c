//! Per-step metrics records and their CSV serialization.
//!
//! The CSV schema is fixed: a header plus one row per step, columns
//! `t,loss,accuracy,error_signal,delta_error,drift_signal,eta,alpha,action,cost,cumulative_cost,V,delta_V`,
//! floats rendered with 12 significant digits. Identical runs produce
//! byte-identical files.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::config::CostTable;
use crate::error::HarnessError;

/// Learning-rate component of a controller action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LrAction {
    #[default]
    None,
    Up,
    Down,
}

/// Fusion component of a controller action: which modality had its weight
/// shifted away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaAction {
    #[default]
    None,
    ShiftAwayM1,
    ShiftAwayM2,
}

/// What the controller did in one step. Both actuators can fire in the same
/// step; the cost is the sum of the two components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ControllerAction {
    pub lr: LrAction,
    pub alpha: AlphaAction,
}

impl ControllerAction {
    pub const NONE: ControllerAction = ControllerAction {
        lr: LrAction::None,
        alpha: AlphaAction::None,
    };

    pub fn is_none(&self) -> bool {
        self.lr == LrAction::None && self.alpha == AlphaAction::None
    }

    /// Total cost of the step under a cost table. A fully quiescent step is
    /// charged the `none` cost once; otherwise each firing actuator
    /// contributes its own entry.
    pub fn cost(&self, table: &CostTable) -> f64 {
        if self.is_none() {
            return table.none;
        }
        let lr = match self.lr {
            LrAction::None => 0.0,
            LrAction::Up => table.lr_up,
            LrAction::Down => table.lr_down,
        };
        let alpha = match self.alpha {
            AlphaAction::None => 0.0,
            AlphaAction::ShiftAwayM1 | AlphaAction::ShiftAwayM2 => table.alpha_shift,
        };
        lr + alpha
    }
}

impl fmt::Display for ControllerAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_none() {
            return write!(f, "none");
        }
        let lr = match self.lr {
            LrAction::None => None,
            LrAction::Up => Some("lr_up"),
            LrAction::Down => Some("lr_down"),
        };
        let alpha = match self.alpha {
            AlphaAction::None => None,
            AlphaAction::ShiftAwayM1 => Some("alpha_shift_m1"),
            AlphaAction::ShiftAwayM2 => Some("alpha_shift_m2"),
        };
        match (lr, alpha) {
            (Some(l), Some(a)) => write!(f, "{l}+{a}"),
            (Some(l), None) => write!(f, "{l}"),
            (None, Some(a)) => write!(f, "{a}"),
            (None, None) => unreachable!(),
        }
    }
}

impl FromStr for ControllerAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut action = ControllerAction::NONE;
        if s == "none" {
            return Ok(action);
        }
        for part in s.split('+') {
            match part {
                "lr_up" => action.lr = LrAction::Up,
                "lr_down" => action.lr = LrAction::Down,
                "alpha_shift_m1" => action.alpha = AlphaAction::ShiftAwayM1,
                "alpha_shift_m2" => action.alpha = AlphaAction::ShiftAwayM2,
                other => return Err(format!("unknown action {other:?}")),
            }
        }
        Ok(action)
    }
}

/// One row of the metrics log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Harness step (batch index within the phase).
    pub t: u64,
    /// Batch-mean binary cross entropy.
    pub loss: f64,
    /// Batch accuracy.
    pub accuracy: f64,
    /// Windowed error signal, 1 - windowed accuracy.
    pub error_signal: f64,
    /// error_signal(t) - error_signal(t-1); 0 at t = 0.
    pub delta_error: f64,
    pub drift_signal: f64,
    /// Learning rate after this step's controller pass.
    pub eta: f64,
    /// Effective fusion weight after this step's controller pass.
    pub alpha_effective: f64,
    pub action: ControllerAction,
    pub cost: f64,
    pub cumulative_cost: f64,
    /// Error energy, exactly error_signal^2 / 2.
    pub v: f64,
    /// v(t) - v(t-1); 0 at t = 0.
    pub delta_v: f64,
}

pub const CSV_HEADER: [&str; 13] = [
    "t",
    "loss",
    "accuracy",
    "error_signal",
    "delta_error",
    "drift_signal",
    "eta",
    "alpha",
    "action",
    "cost",
    "cumulative_cost",
    "V",
    "delta_V",
];

/// Renders a float with 12 significant digits, the log precision.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes records to any sink in the fixed schema.
pub fn write_csv_to<W: Write>(records: &[StepRecord], sink: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)
        .map_err(|e| HarnessError::Csv(e.to_string()))?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            fmt_float(r.loss),
            fmt_float(r.accuracy),
            fmt_float(r.error_signal),
            fmt_float(r.delta_error),
            fmt_float(r.drift_signal),
            fmt_float(r.eta),
            fmt_float(r.alpha_effective),
            r.action.to_string(),
            fmt_float(r.cost),
            fmt_float(r.cumulative_cost),
            fmt_float(r.v),
            fmt_float(r.delta_v),
        ])
        .map_err(|e| HarnessError::Csv(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes records to a file, creating parent directories as needed.
pub fn write_csv(records: &[StepRecord], path: &Path) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let file = std::fs::File::create(path)?;
    write_csv_to(records, std::io::BufWriter::new(file))
}

/// Parses records back from the fixed schema.
pub fn read_csv_from<R: Read>(source: R) -> Result<Vec<StepRecord>, HarnessError> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| HarnessError::Csv(e.to_string()))?;
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(HarnessError::Csv(format!("unexpected header {headers:?}")));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| HarnessError::Csv(e.to_string()))?;
        let field = |i: usize| -> Result<&str, HarnessError> {
            row.get(i)
                .ok_or_else(|| HarnessError::Csv(format!("short row {row:?}")))
        };
        let num = |i: usize| -> Result<f64, HarnessError> {
            field(i)?
                .parse::<f64>()
                .map_err(|e| HarnessError::Csv(format!("bad float in column {i}: {e}")))
        };
        out.push(StepRecord {
            t: field(0)?
                .parse()
                .map_err(|e| HarnessError::Csv(format!("bad step index: {e}")))?,
            loss: num(1)?,
            accuracy: num(2)?,
            error_signal: num(3)?,
            delta_error: num(4)?,
            drift_signal: num(5)?,
            eta: num(6)?,
            alpha_effective: num(7)?,
            action: field(8)?.parse().map_err(HarnessError::Csv)?,
            cost: num(9)?,
            cumulative_cost: num(10)?,
            v: num(11)?,
            delta_v: num(12)?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<StepRecord>, HarnessError> {
    let file = std::fs::File::open(path)?;
    read_csv_from(std::io::BufReader::new(file))
}
