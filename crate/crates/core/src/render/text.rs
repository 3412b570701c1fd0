use serde::{Deserialize, Serialize};

use crate::engine::{CiuResult, CiuRow};
use crate::error::{Error, Result};

/// Upper bound (inclusive) and the phrase used up to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub upper: f64,
    pub phrase: String,
}

impl Level {
    fn new(upper: f64, phrase: &str) -> Self {
        Level {
            upper,
            phrase: phrase.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextualThresholds {
    pub ci_levels: Vec<Level>,
    pub cu_levels: Vec<Level>,
}

impl Default for TextualThresholds {
    fn default() -> Self {
        TextualThresholds {
            ci_levels: vec![
                Level::new(0.2, "not important"),
                Level::new(0.4, "slightly important"),
                Level::new(0.6, "important"),
                Level::new(0.8, "very important"),
                Level::new(1.0, "highly important"),
            ],
            cu_levels: vec![
                Level::new(0.2, "very unfavourable"),
                Level::new(0.4, "rather unfavourable"),
                Level::new(0.6, "average"),
                Level::new(0.8, "rather favourable"),
                Level::new(1.0, "very favourable"),
            ],
        }
    }
}

fn check_levels(which: &str, levels: &[Level]) -> Result<()> {
    let Some(last) = levels.last() else {
        return Err(Error::InvalidThresholds(format!("{which} levels are empty")));
    };
    let mut prev = f64::NEG_INFINITY;
    for l in levels {
        if !(0.0..=1.0).contains(&l.upper) || l.upper <= prev {
            return Err(Error::InvalidThresholds(format!(
                "{which} bounds must be strictly increasing within [0, 1]"
            )));
        }
        if l.phrase.trim().is_empty() {
            return Err(Error::InvalidThresholds(format!("{which} phrase is empty")));
        }
        prev = l.upper;
    }
    if last.upper != 1.0 {
        return Err(Error::InvalidThresholds(format!("last {which} bound must be 1.0")));
    }
    Ok(())
}

impl TextualThresholds {
    pub fn validate(&self) -> Result<()> {
        check_levels("CI", &self.ci_levels)?;
        check_levels("CU", &self.cu_levels)
    }

    pub fn ci_phrase(&self, ci: f64) -> &str {
        phrase(&self.ci_levels, ci)
    }

    pub fn cu_phrase(&self, cu: f64) -> &str {
        phrase(&self.cu_levels, cu)
    }
}

fn phrase(levels: &[Level], v: f64) -> &str {
    levels
        .iter()
        .find(|l| v <= l.upper)
        .or(levels.last())
        .map(|l| l.phrase.as_str())
        .unwrap_or("")
}

fn sentence(row: &CiuRow, t: &TextualThresholds, markup: bool) -> String {
    let (ci_p, cu_p) = (t.ci_phrase(row.ci), t.cu_phrase(row.cu));
    let (ci_p, cu_p) = if markup {
        (format!("**{ci_p}**"), format!("**{cu_p}**"))
    } else {
        (ci_p.to_string(), cu_p.to_string())
    };
    format!(
        "{} ({}) is {ci_p} (CI={:.2}) and its value is {cu_p} (CU={:.2}).",
        row.label, row.value, row.ci, row.cu
    )
}

/// One sentence per row, strongest CI first, grouped by output.
pub fn textual_explanation(
    result: &CiuResult,
    thresholds: &TextualThresholds,
    markup: bool,
) -> Result<String> {
    thresholds.validate()?;
    if result.rows.is_empty() {
        return Err(Error::InvalidConfig("nothing to explain: result has no rows".into()));
    }
    let mut outputs: Vec<usize> = Vec::new();
    for r in &result.rows {
        if !outputs.contains(&r.output_index) {
            outputs.push(r.output_index);
        }
    }
    let mut out = String::new();
    for (k, &o) in outputs.iter().enumerate() {
        let mut rows: Vec<&CiuRow> = result.rows_for_output(o).collect();
        rows.sort_by(|a, b| b.ci.total_cmp(&a.ci));
        let first = rows[0];
        if k > 0 {
            out.push('\n');
        }
        let scope = match &result.target_concept {
            Some(tc) => format!(" within '{tc}'"),
            None => String::new(),
        };
        let heading = format!(
            "Output '{}' = {:.4}{scope}",
            first.output_name, first.out_value
        );
        if markup {
            out.push_str(&format!("### {heading}\n\n"));
        } else {
            out.push_str(&format!("{heading}\n"));
        }
        for r in rows {
            out.push_str("- ");
            out.push_str(&sentence(r, thresholds, markup));
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_upper_bounds() {
        let t = TextualThresholds::default();
        assert_eq!(t.ci_phrase(0.0), "not important");
        assert_eq!(t.ci_phrase(0.2), "not important");
        assert_eq!(t.ci_phrase(0.2000001), "slightly important");
        assert_eq!(t.ci_phrase(0.5), "important");
        assert_eq!(t.cu_phrase(0.3), "rather unfavourable");
        assert_eq!(t.cu_phrase(1.0), "very favourable");
    }

    #[test]
    fn malformed_thresholds() {
        let mut t = TextualThresholds::default();
        t.ci_levels.swap(0, 1);
        assert!(t.validate().is_err());
        let mut t = TextualThresholds::default();
        t.cu_levels.pop();
        assert!(t.validate().is_err());
        let mut t = TextualThresholds::default();
        t.cu_levels[0].phrase = " ".into();
        assert!(t.validate().is_err());
        let t = TextualThresholds {
            ci_levels: vec![],
            ..Default::default()
        };
        assert!(t.validate().is_err());
    }
}
