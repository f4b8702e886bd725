//! Line-delimited JSON form of OSC messages for browser clients.
//!
//! One message per line:
//!
//! ```json
//! {"address":"/mr4mr/note","args":[{"type":"i","value":0},{"type":"f","value":0.5}]}
//! ```
//!
//! Blob values are standard base64 strings.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use mr4mr::osc::{OscArg, OscMessage};
use serde::{Deserialize, Serialize};

use crate::BridgeError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", deny_unknown_fields)]
enum JsonArg {
    #[serde(rename = "i")]
    Int(i32),
    #[serde(rename = "f")]
    Float(f32),
    #[serde(rename = "s")]
    Str(String),
    #[serde(rename = "b")]
    Blob(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonMessage {
    address: String,
    #[serde(default)]
    args: Vec<JsonArg>,
}

/// Serializes without a trailing newline.
pub fn to_json(msg: &OscMessage) -> String {
    let args = msg
        .args
        .iter()
        .map(|a| match a {
            OscArg::Int(v) => JsonArg::Int(*v),
            OscArg::Float(v) => JsonArg::Float(*v),
            OscArg::Str(s) => JsonArg::Str(s.clone()),
            OscArg::Blob(b) => JsonArg::Blob(STANDARD.encode(b)),
        })
        .collect();
    let m = JsonMessage {
        address: msg.address.clone(),
        args,
    };
    serde_json::to_string(&m).expect("OSC message always serializes")
}

pub fn from_json(line: &str) -> Result<OscMessage, BridgeError> {
    let m: JsonMessage =
        serde_json::from_str(line).map_err(|e| BridgeError::Json(e.to_string()))?;
    if !m.address.starts_with('/') {
        return Err(BridgeError::Json(format!(
            "address {:?} must start with '/'",
            m.address
        )));
    }
    let args = m
        .args
        .into_iter()
        .map(|a| {
            Ok(match a {
                JsonArg::Int(v) => OscArg::Int(v),
                JsonArg::Float(v) => OscArg::Float(v),
                JsonArg::Str(s) => OscArg::Str(s),
                JsonArg::Blob(s) => OscArg::Blob(
                    STANDARD
                        .decode(s)
                        .map_err(|e| BridgeError::Json(format!("blob: {e}")))?,
                ),
            })
        })
        .collect::<Result<_, BridgeError>>()?;
    Ok(OscMessage::new(m.address, args))
}

/// Splits a text frame into messages. Blank lines are skipped; the first bad
/// line aborts.
pub fn parse_lines(text: &str) -> Result<Vec<OscMessage>, BridgeError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(from_json)
        .collect()
}
