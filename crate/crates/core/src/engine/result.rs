use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_space::Instance;
use crate::minmax::Coalition;

pub const RESULT_SCHEMA: &str = "ciu-result/1";

/// One (coalition, output) explanation row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiuRow {
    pub label: String,
    pub coalition: Coalition,
    pub output_index: usize,
    pub output_name: String,
    /// Model output for the explained instance.
    pub out_value: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub ci: f64,
    pub cu: f64,
    pub influence: f64,
    pub cu_ref_used: f64,
    pub instability_flag: bool,
    /// Whether CI or CU was clamped by more than rounding noise.
    pub clamped: bool,
    /// Instance value(s) of the coalition, formatted for display.
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMetadata {
    pub seed: u64,
    pub n_samples: usize,
    pub neutral_cu: f64,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiuResult {
    pub rows: Vec<CiuRow>,
    pub instance: Instance,
    pub output_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_concept: Option<String>,
    pub metadata: ResultMetadata,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    #[serde(flatten)]
    result: &'a CiuResult,
}

#[derive(Deserialize)]
struct OwnedEnvelope {
    schema: String,
    #[serde(flatten)]
    result: CiuResult,
}

impl CiuResult {
    pub fn rows_for_output(&self, output: usize) -> impl Iterator<Item = &CiuRow> {
        self.rows.iter().filter(move |r| r.output_index == output)
    }

    pub fn row(&self, label: &str, output: usize) -> Option<&CiuRow> {
        self.rows
            .iter()
            .find(|r| r.label == label && r.output_index == output)
    }

    pub fn has_instability(&self) -> bool {
        self.rows.iter().any(|r| r.instability_flag)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&Envelope {
            schema: RESULT_SCHEMA,
            result: self,
        })?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: OwnedEnvelope = serde_json::from_str(text)?;
        if env.schema != RESULT_SCHEMA {
            return Err(Error::ResultMismatch(format!(
                "unsupported result schema '{}', expected '{RESULT_SCHEMA}'",
                env.schema
            )));
        }
        Ok(env.result)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "label",
            "output",
            "out_value",
            "ymin",
            "ymax",
            "ci",
            "cu",
            "influence",
            "cu_ref",
            "instability",
            "clamped",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.label.clone(),
                r.output_name.clone(),
                r.out_value.to_string(),
                r.ymin.to_string(),
                r.ymax.to_string(),
                r.ci.to_string(),
                r.cu.to_string(),
                r.influence.to_string(),
                r.cu_ref_used.to_string(),
                r.instability_flag.to_string(),
                r.clamped.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}
