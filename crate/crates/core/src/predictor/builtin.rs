use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_space::FeatureSpace;

/// Analytic models shipped with the library. They make the engine runnable
/// end to end without any external process and serve as exact oracles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BuiltinModel {
    /// `bias + Σ wᵢ xᵢ`
    Linear { weights: Vec<f64>, bias: f64 },
    /// `σ(bias + Σ wᵢ xᵢ)`
    Logistic { weights: Vec<f64>, bias: f64 },
    /// Output vectors indexed by a combination of categorical cells.
    ///
    /// `values` is row-major over `features` with the last feature varying
    /// fastest, and holds `Π cardinalities` entries.
    TableLookup {
        arity: usize,
        features: Vec<usize>,
        cardinalities: Vec<usize>,
        values: Vec<Vec<f64>>,
    },
    /// `bias + Σ wᵢ xᵢ + Σ c·xₐ·x_b` over the listed `(a, b, c)` pairs.
    ProductInteraction {
        pairs: Vec<(usize, usize, f64)>,
        weights: Vec<f64>,
        bias: f64,
    },
}

impl BuiltinModel {
    pub fn linear(weights: Vec<f64>, bias: f64) -> Self {
        BuiltinModel::Linear { weights, bias }
    }

    pub fn logistic(weights: Vec<f64>, bias: f64) -> Self {
        BuiltinModel::Logistic { weights, bias }
    }

    /// Parse a compact descriptor:
    ///
    /// - `linear:0.5,0.5` or `linear:0.5,0.5;bias=0.1`
    /// - `logistic:1,-2;bias=0.3`
    /// - `product:0*1=1;linear=0,0;bias=0`
    /// - `file:model.json` (serialized `BuiltinModel`, needed for tables)
    pub fn parse(descriptor: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidConfig(format!("model '{descriptor}': {msg}"));
        let (kind, rest) = descriptor
            .split_once(':')
            .ok_or_else(|| bad("expected '<kind>:<parameters>'"))?;
        if kind == "file" {
            let text = std::fs::read_to_string(rest).map_err(|e| Error::io(rest, e))?;
            let model: BuiltinModel = serde_json::from_str(&text)?;
            model.check()?;
            return Ok(model);
        }
        let mut parts = rest.split(';');
        let head = parts.next().unwrap_or_default();
        let mut bias = 0.0;
        let mut linear: Option<Vec<f64>> = None;
        for opt in parts {
            let (k, v) = opt
                .split_once('=')
                .ok_or_else(|| bad(&format!("option '{opt}' is not key=value")))?;
            match k.trim() {
                "bias" => bias = parse_real(v).map_err(|e| bad(&e))?,
                "linear" => linear = Some(parse_list(v).map_err(|e| bad(&e))?),
                other => return Err(bad(&format!("unknown option '{other}'"))),
            }
        }
        let model = match kind {
            "linear" | "logistic" => {
                if linear.is_some() {
                    return Err(bad("'linear=' only applies to product models"));
                }
                let weights = parse_list(head).map_err(|e| bad(&e))?;
                if kind == "linear" {
                    BuiltinModel::Linear { weights, bias }
                } else {
                    BuiltinModel::Logistic { weights, bias }
                }
            }
            "product" => {
                let mut pairs = Vec::new();
                for term in head.split(',').filter(|t| !t.trim().is_empty()) {
                    let (idx, coef) = term
                        .split_once('=')
                        .ok_or_else(|| bad(&format!("term '{term}' is not a*b=c")))?;
                    let (a, b) = idx
                        .split_once('*')
                        .ok_or_else(|| bad(&format!("term '{term}' is not a*b=c")))?;
                    let a: usize = a.trim().parse().map_err(|_| bad("bad feature index"))?;
                    let b: usize = b.trim().parse().map_err(|_| bad("bad feature index"))?;
                    pairs.push((a, b, parse_real(coef).map_err(|e| bad(&e))?));
                }
                let weights = match linear {
                    Some(w) => w,
                    None => {
                        let n = pairs.iter().map(|&(a, b, _)| a.max(b) + 1).max().unwrap_or(0);
                        vec![0.0; n]
                    }
                };
                BuiltinModel::ProductInteraction {
                    pairs,
                    weights,
                    bias,
                }
            }
            other => return Err(bad(&format!("unknown model kind '{other}'"))),
        };
        model.check()?;
        Ok(model)
    }

    pub fn arity(&self) -> usize {
        match self {
            BuiltinModel::Linear { weights, .. }
            | BuiltinModel::Logistic { weights, .. }
            | BuiltinModel::ProductInteraction { weights, .. } => weights.len(),
            BuiltinModel::TableLookup { arity, .. } => *arity,
        }
    }

    pub fn n_outputs(&self) -> usize {
        match self {
            BuiltinModel::TableLookup { values, .. } => values.first().map_or(0, Vec::len),
            _ => 1,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        match self {
            BuiltinModel::Linear { weights, bias } | BuiltinModel::Logistic { weights, bias } => {
                if weights.is_empty() {
                    return bad("model needs at least one weight".into());
                }
                if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
                    return bad("model parameters must be finite".into());
                }
            }
            BuiltinModel::ProductInteraction {
                pairs,
                weights,
                bias,
            } => {
                if weights.is_empty() {
                    return bad("model needs at least one feature".into());
                }
                for &(a, b, c) in pairs {
                    if a >= weights.len() || b >= weights.len() {
                        return bad(format!(
                            "interaction {a}*{b} refers past arity {}",
                            weights.len()
                        ));
                    }
                    if !c.is_finite() {
                        return bad("model parameters must be finite".into());
                    }
                }
                if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
                    return bad("model parameters must be finite".into());
                }
            }
            BuiltinModel::TableLookup {
                arity,
                features,
                cardinalities,
                values,
            } => {
                if features.is_empty() || features.len() != cardinalities.len() {
                    return bad("table needs one cardinality per feature".into());
                }
                if let Some(f) = features.iter().find(|&&f| f >= *arity) {
                    return bad(format!("table feature {f} is outside arity {arity}"));
                }
                let cells: usize = cardinalities.iter().product();
                if cells != values.len() {
                    return bad(format!(
                        "table is not total: {} entries for {cells} combinations",
                        values.len()
                    ));
                }
                let k = values.first().map_or(0, Vec::len);
                if k == 0 || values.iter().any(|v| v.len() != k) {
                    return bad("every table entry needs the same non-zero output count".into());
                }
                if values.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("table values must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// Check the model against a feature space: arity, and for tables that
    /// every indexed feature is categorical with the declared cardinality.
    pub fn check_space(&self, space: &FeatureSpace) -> Result<()> {
        if self.arity() != space.len() {
            return Err(Error::ArityMismatch {
                expected: space.len(),
                actual: self.arity(),
            });
        }
        if let BuiltinModel::TableLookup {
            features,
            cardinalities,
            ..
        } = self
        {
            for (&f, &card) in features.iter().zip(cardinalities) {
                match space.feature(f).categories() {
                    Some(c) if c.len() == card => {}
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "table feature '{}' must be categorical with {card} categories",
                            space.feature(f).name
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn eval(&self, x: &[f64]) -> std::result::Result<Vec<f64>, String> {
        let dot = |w: &[f64]| w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
        Ok(match self {
            BuiltinModel::Linear { weights, bias } => vec![bias + dot(weights)],
            BuiltinModel::Logistic { weights, bias } => {
                vec![1.0 / (1.0 + (-(bias + dot(weights))).exp())]
            }
            BuiltinModel::ProductInteraction {
                pairs,
                weights,
                bias,
            } => {
                let inter: f64 = pairs.iter().map(|&(a, b, c)| c * x[a] * x[b]).sum();
                vec![bias + dot(weights) + inter]
            }
            BuiltinModel::TableLookup {
                features,
                cardinalities,
                values,
                ..
            } => {
                let mut idx = 0usize;
                for (&f, &card) in features.iter().zip(cardinalities) {
                    let v = x[f];
                    if v < 0.0 || v.fract() != 0.0 || v as usize >= card {
                        return Err(format!("cell {f} = {v} is not a category index below {card}"));
                    }
                    idx = idx * card + v as usize;
                }
                values[idx].clone()
            }
        })
    }
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(parse_real).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_descriptors() {
        assert_eq!(
            BuiltinModel::parse("linear:0.5,0.5").unwrap(),
            BuiltinModel::linear(vec![0.5, 0.5], 0.0)
        );
        assert_eq!(
            BuiltinModel::parse("logistic:1,-2;bias=0.3").unwrap(),
            BuiltinModel::logistic(vec![1.0, -2.0], 0.3)
        );
        assert_eq!(
            BuiltinModel::parse("product:0*1=1").unwrap(),
            BuiltinModel::ProductInteraction {
                pairs: vec![(0, 1, 1.0)],
                weights: vec![0.0, 0.0],
                bias: 0.0
            }
        );
        assert_eq!(
            BuiltinModel::parse("product:0*2=0.5;linear=1,0,0;bias=2")
                .unwrap()
                .arity(),
            3
        );
        assert!(BuiltinModel::parse("linear").is_err());
        assert!(BuiltinModel::parse("linear:a,b").is_err());
        assert!(BuiltinModel::parse("quadratic:1").is_err());
        assert!(BuiltinModel::parse("product:0*5=1;linear=0,0").is_err());
    }

    #[test]
    fn table_lookup_must_be_total() {
        let t = BuiltinModel::TableLookup {
            arity: 2,
            features: vec![0, 1],
            cardinalities: vec![2, 3],
            values: vec![vec![0.0]; 5],
        };
        assert!(t.check().is_err());
    }

    #[test]
    fn table_lookup_is_row_major() {
        let t = BuiltinModel::TableLookup {
            arity: 3,
            features: vec![0, 2],
            cardinalities: vec![2, 3],
            values: (0..6).map(|i| vec![i as f64]).collect(),
        };
        t.check().unwrap();
        assert_eq!(t.eval(&[1.0, 0.42, 2.0]).unwrap(), vec![5.0]);
        assert_eq!(t.eval(&[0.0, 0.0, 1.0]).unwrap(), vec![1.0]);
        assert!(t.eval(&[2.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn model_json_tag() {
        let json = serde_json::to_string(&BuiltinModel::linear(vec![1.0], 0.5)).unwrap();
        assert_eq!(json, r#"{"type":"linear","weights":[1.0],"bias":0.5}"#);
    }
}
