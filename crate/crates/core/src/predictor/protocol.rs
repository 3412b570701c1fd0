//! Line-delimited JSON messages exchanged with an external model process.
//!
//! One UTF-8 JSON object per line:
//!
//! ```text
//! engine → bridge  {"type":"hello","protocol":1}
//! bridge → engine  {"type":"metadata","arity":N,"outputs":["name",...]}
//! engine → bridge  {"type":"predict","id":K,"x":[[...],...]}
//! bridge → engine  {"type":"result","id":K,"y":[[...],...]}
//!                  {"type":"error","id":K,"message":"..."}
//! engine → bridge  {"type":"shutdown"}
//! ```
//!
//! Categorical cells travel as JSON integers, numeric cells as 64-bit floats.

use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

/// A single cell of a request row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Index(i64),
    Real(f64),
}

impl Cell {
    pub fn value(self) -> f64 {
        match self {
            Cell::Index(i) => i as f64,
            Cell::Real(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EngineMessage {
    Hello { protocol: u32 },
    Predict { id: u64, x: Vec<Vec<Cell>> },
    Shutdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BridgeMessage {
    Metadata { arity: usize, outputs: Vec<String> },
    Result { id: u64, y: Vec<Vec<f64>> },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        message: String,
    },
}

/// Encode a batch, sending the flagged columns as integers.
pub fn encode_rows(batch: &[Vec<f64>], categorical: &[bool]) -> Vec<Vec<Cell>> {
    batch
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| {
                    if categorical.get(j).copied().unwrap_or(false) {
                        Cell::Index(v as i64)
                    } else {
                        Cell::Real(v)
                    }
                })
                .collect()
        })
        .collect()
}
