//! Wire format: one JSON object per text frame, every object carrying `v`.

use gazeread::layout::LayoutExport;
use gazeread::tracker::{EventRecord, WordCount};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const PROTOCOL_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Inbound {
    Gaze { t_ms: i64, x: f64, y: f64, valid: bool },
    DoubleClick { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    /// The page geometry. Its `anchors` are the punctuation marks a client
    /// shades on load.
    Layout {
        #[serde(flatten)]
        layout: LayoutExport<f64>,
    },
    Highlight { words: Vec<WordCount>, snapshot: bool },
    Event { event: EventRecord },
    Relocated { word: Option<usize>, confirm: bool },
    Error { msg: String },
}

/// An outbound message with its version stamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub v: u64,
    #[serde(flatten)]
    pub body: Outbound,
}

impl Frame {
    pub fn new(body: Outbound) -> Self {
        Self { v: PROTOCOL_VERSION, body }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frames always serialise")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    /// Answered with an error frame; the connection stays open.
    Malformed(String),
    /// The connection is closed.
    Version(Value),
}

const KNOWN_TYPES: [&str; 2] = ["gaze", "double_click"];

pub fn parse_inbound(text: &str) -> Result<Inbound, Rejection> {
    let value: Value = serde_json::from_str(text).map_err(|e| Rejection::Malformed(format!("invalid JSON: {e}")))?;
    let Some(obj) = value.as_object() else {
        return Err(Rejection::Malformed("expected a JSON object".into()));
    };
    match obj.get("v") {
        None => return Err(Rejection::Malformed("missing field `v`".into())),
        Some(v) if v.as_u64() != Some(PROTOCOL_VERSION) => return Err(Rejection::Version(v.clone())),
        Some(_) => {}
    }
    match obj.get("type").and_then(Value::as_str) {
        None => return Err(Rejection::Malformed("missing field `type`".into())),
        Some(t) if !KNOWN_TYPES.contains(&t) => return Err(Rejection::Malformed(format!("unknown type `{t}`"))),
        Some(_) => {}
    }
    serde_json::from_value(value).map_err(|e| Rejection::Malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_messages() {
        let g = parse_inbound(r#"{"v":1,"type":"gaze","t_ms":5,"x":1.5,"y":2,"valid":true}"#).unwrap();
        assert_eq!(g, Inbound::Gaze { t_ms: 5, x: 1.5, y: 2.0, valid: true });
        let d = parse_inbound(r#"{"v":1,"type":"double_click","x":3,"y":4,"button":"left"}"#).unwrap();
        assert_eq!(d, Inbound::DoubleClick { x: 3.0, y: 4.0 });
    }

    #[test]
    fn rejections() {
        assert!(matches!(parse_inbound("{"), Err(Rejection::Malformed(_))));
        assert!(matches!(parse_inbound("[1]"), Err(Rejection::Malformed(_))));
        assert!(matches!(parse_inbound(r#"{"type":"gaze"}"#), Err(Rejection::Malformed(_))));
        assert_eq!(parse_inbound(r#"{"v":2,"type":"gaze"}"#), Err(Rejection::Version(serde_json::json!(2))));
        assert_eq!(parse_inbound(r#"{"v":1,"type":"wink"}"#), Err(Rejection::Malformed("unknown type `wink`".into())));
        assert!(matches!(parse_inbound(r#"{"v":1,"type":"gaze","t_ms":1}"#), Err(Rejection::Malformed(_))));
    }

    #[test]
    fn frames_carry_the_version() {
        let f = Frame::new(Outbound::Relocated { word: None, confirm: false });
        assert_eq!(f.to_json(), r#"{"v":1,"type":"relocated","word":null,"confirm":false}"#);
        let e = Frame::new(Outbound::Error { msg: "x".into() });
        let back: Frame = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(back, e);
    }
}
