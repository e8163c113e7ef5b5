use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::election::ElectionTrace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCount {
    pub index: usize,
    pub count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelocationReason {
    SingleCandidate,
    Election,
    Forced,
    /// No anchor was captured; the nearest line to the trajectory was used.
    Fallback,
}

/// Transitions emitted by the tracker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum TrackerEvent {
    HighlightUpdate {
        words: Vec<WordCount>,
    },
    LineSwitch {
        from: usize,
        to: usize,
    },
    JumpDetected {
        t_ms: i64,
    },
    RelocationApplied {
        /// `None` for forced and fallback relocations.
        anchor: Option<usize>,
        /// Word tracking resumes at.
        word: usize,
        line: usize,
        reason: RelocationReason,
        /// True when the relocation should be acknowledged to the user.
        confirm: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        election: Option<ElectionTrace>,
    },
    LineFinished {
        line: usize,
        /// Mean raw gaze Y over the line; absent when no sample was attributed.
        mean_y_gaze: Option<f64>,
        /// Calibration `[k, b]` in force after this line.
        calibration: [f64; 2],
    },
}

impl TrackerEvent {
    pub fn type_name(&self) -> &'static str {
        match self {
            Self::HighlightUpdate { .. } => "HighlightUpdate",
            Self::LineSwitch { .. } => "LineSwitch",
            Self::JumpDetected { .. } => "JumpDetected",
            Self::RelocationApplied { .. } => "RelocationApplied",
            Self::LineFinished { .. } => "LineFinished",
        }
    }
}

/// One line of the event log: `{t_ms, event: {type, ...payload}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t_ms: i64,
    pub event: TrackerEvent,
}

pub fn write_event_log(path: &Path, records: &[EventRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_event_log(path: &Path) -> Result<Vec<EventRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_shape() {
        let r = EventRecord { t_ms: 17, event: TrackerEvent::LineSwitch { from: 0, to: 1 } };
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v, serde_json::json!({"t_ms": 17, "event": {"type": "LineSwitch", "from": 0, "to": 1}}));
        let back: EventRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.event.type_name(), "LineSwitch");
        let jump = EventRecord { t_ms: 40, event: TrackerEvent::JumpDetected { t_ms: 40 } };
        let line = serde_json::to_string(&jump).unwrap();
        assert_eq!(serde_json::from_str::<EventRecord>(&line).unwrap(), jump);
    }

    #[test]
    fn relocation_reason_names() {
        let e = TrackerEvent::RelocationApplied {
            anchor: Some(2),
            word: 9,
            line: 1,
            reason: RelocationReason::SingleCandidate,
            confirm: false,
            election: None,
        };
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["reason"], "single-candidate");
        assert_eq!(v["type"], "RelocationApplied");
    }
}
