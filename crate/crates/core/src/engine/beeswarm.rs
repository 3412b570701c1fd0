use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{explain_rows, prepare, EngineConfig};
use crate::error::{Error, Result};
use crate::feature_space::{Dataset, FeatureKind};
use crate::minmax::Coalition;
use crate::predictor::PredictorHandle;

/// Stream key separating per-instance beeswarm streams from plain explanations.
const INSTANCE_STREAM: u64 = 0x6265_6573_7761_726d;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeeswarmRow {
    pub instance_id: String,
    pub label: String,
    pub ci: f64,
    pub cu: f64,
    pub influence: f64,
    pub instability_flag: bool,
    /// Feature value scaled to `[0, 1]` over the dataset; none for multi-feature coalitions.
    pub normalized_value: Option<f64>,
}

fn normalized_columns(dataset: &Dataset) -> Vec<Vec<f64>> {
    (0..dataset.space.len())
        .map(|j| {
            let values: Vec<f64> = dataset.column(j).collect();
            match &dataset.space.feature(j).kind {
                FeatureKind::Categorical { categories } => {
                    let k = categories.len();
                    values
                        .iter()
                        .map(|&v| if k < 2 { 0.5 } else { v / (k - 1) as f64 })
                        .collect()
                }
                FeatureKind::Numeric { .. } => {
                    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    values
                        .iter()
                        .map(|&v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
                        .collect()
                }
            }
        })
        .collect()
}

/// Explain every dataset row, one random stream per row, as a long table
/// ordered by row then coalition.
pub fn beeswarm_data(
    config: &EngineConfig,
    handle: &PredictorHandle,
    dataset: &Dataset,
    output: usize,
    coalitions: Option<&[(String, Coalition)]>,
) -> Result<Vec<BeeswarmRow>> {
    if dataset.is_empty() {
        return Err(Error::InvalidConfig("beeswarm needs a non-empty dataset".into()));
    }
    if dataset.space.len() != config.space.len() {
        return Err(Error::ArityMismatch {
            expected: config.space.len(),
            actual: dataset.space.len(),
        });
    }
    let default;
    let coalitions = match coalitions {
        Some(c) => c,
        None => {
            default = config.feature_coalitions();
            &default
        }
    };
    super::check_coalitions(config, coalitions)?;
    let norms = normalized_columns(dataset);
    let per_row: Vec<Vec<BeeswarmRow>> = dataset
        .rows
        .par_iter()
        .enumerate()
        .map(|(r, inst)| {
            let outputs = prepare(config, handle, inst, &[output])?;
            let rows = explain_rows(
                config,
                handle,
                inst,
                &outputs,
                coalitions,
                &[INSTANCE_STREAM, r as u64],
                &|o| Ok((config.outputs[o].min, config.outputs[o].max)),
            )?;
            let id = dataset.row_id(r);
            Ok(rows
                .into_iter()
                .map(|row| BeeswarmRow {
                    instance_id: id.clone(),
                    normalized_value: match row.coalition.indices() {
                        [j] => Some(norms[*j][r]),
                        _ => None,
                    },
                    label: row.label,
                    ci: row.ci,
                    cu: row.cu,
                    influence: row.influence,
                    instability_flag: row.instability_flag,
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_row.into_iter().flatten().collect())
}

/// Mean utility of the model's predictions over the dataset, a common
/// choice of neutral CU.
pub fn mean_output_utility(
    config: &EngineConfig,
    handle: &PredictorHandle,
    dataset: &Dataset,
    output: usize,
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::InvalidConfig("mean output utility needs a non-empty dataset".into()));
    }
    let spec = config
        .outputs
        .get(output)
        .ok_or_else(|| Error::InvalidConfig(format!("output index {output} out of range")))?;
    let batch: Vec<Vec<f64>> = dataset.rows.iter().map(|r| r.values().to_vec()).collect();
    let ys = handle.predict(&batch)?;
    let mean = ys.iter().map(|y| spec.utility(y[output])).sum::<f64>() / ys.len() as f64;
    Ok(mean.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_space::{FeatureSpace, FeatureSpec, Instance, OutputSpec};

    #[test]
    fn shape_and_normalization() {
        let space = FeatureSpace::new(vec![
            FeatureSpec::numeric("a", 0.0, 40.0).unwrap(),
            FeatureSpec::numeric("b", 0.0, 1.0).unwrap(),
            FeatureSpec::categorical("c", ["p", "q", "r"]).unwrap(),
        ])
        .unwrap();
        let data = Dataset::new(
            space.clone(),
            vec![
                Instance::new(vec![10.0, 0.5, 0.0]),
                Instance::new(vec![20.0, 0.5, 2.0]),
                Instance::new(vec![30.0, 0.5, 1.0]),
            ],
        )
        .unwrap();
        let cfg = EngineConfig::new(space, vec![OutputSpec::probability("y")]).unwrap();
        let h = PredictorHandle::from_fn(3, vec!["y".into()], |x| vec![x[0] / 80.0 + x[1] / 4.0 + x[2] / 8.0])
            .unwrap();
        let rows = beeswarm_data(&cfg, &h, &data, 0, None).unwrap();
        assert_eq!(rows.len(), 9);
        let a: Vec<_> = rows.iter().filter(|r| r.label == "a").map(|r| r.normalized_value).collect();
        assert_eq!(a, vec![Some(0.0), Some(0.5), Some(1.0)]);
        assert!(rows.iter().filter(|r| r.label == "b").all(|r| r.normalized_value == Some(0.5)));
        let c: Vec<_> = rows.iter().filter(|r| r.label == "c").map(|r| r.normalized_value).collect();
        assert_eq!(c, vec![Some(0.0), Some(1.0), Some(0.5)]);
        let joint = [("ab".to_string(), Coalition::new([0, 1], &cfg.space).unwrap())];
        let rows = beeswarm_data(&cfg, &h, &data, 0, Some(&joint)).unwrap();
        assert!(rows.iter().all(|r| r.normalized_value.is_none()));
    }
}
