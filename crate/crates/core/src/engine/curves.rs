use serde::{Deserialize, Serialize};

use super::{ci_cu_from_minmax, EngineConfig};
use crate::error::{Error, Result};
use crate::feature_space::{validate_instance, FeatureKind, FeatureSpace, Instance, UtilityDirection};
use crate::minmax::{linspace, Coalition};
use crate::predictor::PredictorHandle;

/// Values swept along one feature. Categorical axes carry their labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisValues {
    pub feature: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl AxisValues {
    fn for_feature(space: &FeatureSpace, index: usize, points: usize) -> Result<Self> {
        let f = space.feature(index);
        Ok(match &f.kind {
            FeatureKind::Numeric { min, max } => {
                if points < 2 {
                    return Err(Error::InvalidConfig("curves need at least 2 points".into()));
                }
                AxisValues {
                    feature: f.name.clone(),
                    values: linspace(*min, *max, points),
                    labels: None,
                }
            }
            FeatureKind::Categorical { categories } => AxisValues {
                feature: f.name.clone(),
                values: (0..categories.len()).map(|c| c as f64).collect(),
                labels: Some(categories.clone()),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoOutputCurve {
    pub output_index: usize,
    pub name: String,
    pub y: Vec<f64>,
    pub out_value: f64,
    /// Estimated extremes used for CI and CU.
    pub ymin: f64,
    pub ymax: f64,
    pub ci: f64,
    pub cu: f64,
    /// Output level at which utility equals the neutral CU.
    pub neutral: f64,
    pub direction: UtilityDirection,
    pub range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoCurve {
    pub axis: AxisValues,
    pub instance_value: f64,
    pub outputs: Vec<IoOutputCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoSurface {
    pub x: AxisValues,
    pub y: AxisValues,
    pub output_index: usize,
    pub output_name: String,
    /// `z[iy][ix]`
    pub z: Vec<Vec<f64>>,
    pub instance: (f64, f64),
    pub out_value: f64,
    pub range: (f64, f64),
}

fn neutral_level(ymin: f64, ymax: f64, cu_ref: f64, direction: UtilityDirection) -> f64 {
    match direction {
        UtilityDirection::Increasing => ymin + cu_ref * (ymax - ymin),
        UtilityDirection::Decreasing => ymax - cu_ref * (ymax - ymin),
    }
}

fn feature_index(space: &FeatureSpace, index: usize) -> Result<()> {
    if index >= space.len() {
        return Err(Error::UnknownFeature(format!("index {index}")));
    }
    Ok(())
}

/// Model outputs as one feature sweeps its range with the others held at the instance.
pub fn io_curve(
    config: &EngineConfig,
    handle: &PredictorHandle,
    inst: &Instance,
    feature: usize,
    outputs: &[usize],
    points: usize,
) -> Result<IoCurve> {
    config.validate()?;
    config.check_handle(handle)?;
    validate_instance(&config.space, inst)?;
    feature_index(&config.space, feature)?;
    let outputs = config.resolve_outputs(outputs)?;
    let axis = AxisValues::for_feature(&config.space, feature, points)?;
    let batch: Vec<Vec<f64>> = axis
        .values
        .iter()
        .map(|&v| {
            let mut row = inst.values().to_vec();
            row[feature] = v;
            row
        })
        .collect();
    let ys = handle.predict(&batch)?;
    let coalition = Coalition::single(feature, &config.space)?;
    let est = config.estimate(handle, inst, &coalition, &[])?;
    let outputs = outputs
        .iter()
        .map(|&o| {
            let spec = &config.outputs[o];
            let y: Vec<f64> = ys.iter().map(|r| r[o]).collect();
            // The sweep itself can reach values the sampler missed.
            let ymin = y.iter().copied().fold(est.ymin[o], f64::min);
            let ymax = y.iter().copied().fold(est.ymax[o], f64::max);
            let cc = ci_cu_from_minmax(
                est.y[o],
                ymin,
                ymax,
                spec.min,
                spec.max,
                spec.direction,
                super::ClampPolicy::ClampAndFlag,
            )?;
            Ok(IoOutputCurve {
                output_index: o,
                name: spec.name.clone(),
                y,
                out_value: est.y[o],
                ymin,
                ymax,
                ci: cc.ci,
                cu: cc.cu,
                neutral: neutral_level(ymin, ymax, config.neutral_cu, spec.direction),
                direction: spec.direction,
                range: (spec.min, spec.max),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IoCurve {
        axis,
        instance_value: inst[feature],
        outputs,
    })
}

/// One output over a two-feature grid, the rest held at the instance.
pub fn io_surface(
    config: &EngineConfig,
    handle: &PredictorHandle,
    inst: &Instance,
    features: (usize, usize),
    points: usize,
    output: usize,
) -> Result<IoSurface> {
    config.validate()?;
    config.check_handle(handle)?;
    validate_instance(&config.space, inst)?;
    let (fx, fy) = features;
    feature_index(&config.space, fx)?;
    feature_index(&config.space, fy)?;
    if fx == fy {
        return Err(Error::InvalidConfig("surface needs two different features".into()));
    }
    if output >= config.outputs.len() {
        return Err(Error::InvalidConfig(format!("output index {output} out of range")));
    }
    let x = AxisValues::for_feature(&config.space, fx, points)?;
    let y = AxisValues::for_feature(&config.space, fy, points)?;
    let mut batch = Vec::with_capacity(x.values.len() * y.values.len());
    for &vy in &y.values {
        for &vx in &x.values {
            let mut row = inst.values().to_vec();
            row[fx] = vx;
            row[fy] = vy;
            batch.push(row);
        }
    }
    let out = handle.predict(&batch)?;
    let z = out
        .chunks(x.values.len())
        .map(|chunk| chunk.iter().map(|r| r[output]).collect())
        .collect();
    let out_value = handle.predict_one(inst.values())?[output];
    let spec = &config.outputs[output];
    Ok(IoSurface {
        x,
        y,
        output_index: output,
        output_name: spec.name.clone(),
        z,
        instance: (inst[fx], inst[fy]),
        out_value,
        range: (spec.min, spec.max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_space::{FeatureSpec, OutputSpec};

    #[test]
    fn curve_and_surface_shapes() {
        let space = FeatureSpace::new(vec![
            FeatureSpec::numeric("a", 0.0, 1.0).unwrap(),
            FeatureSpec::categorical("b", ["lo", "hi"]).unwrap(),
        ])
        .unwrap();
        let cfg = EngineConfig::new(space, vec![OutputSpec::probability("p")]).unwrap();
        let h = PredictorHandle::from_fn(2, vec!["p".into()], |x| vec![0.5 * x[0] + 0.5 * x[1]]).unwrap();
        let inst = Instance::new(vec![0.4, 1.0]);
        let c = io_curve(&cfg, &h, &inst, 0, &[], 5).unwrap();
        assert_eq!(c.axis.values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(c.outputs[0].y[4], 1.0);
        assert!((c.outputs[0].neutral - 0.75).abs() < 1e-12);
        let c = io_curve(&cfg, &h, &inst, 1, &[], 5).unwrap();
        assert_eq!(c.axis.labels.as_deref(), Some(&["lo".to_string(), "hi".to_string()][..]));
        let s = io_surface(&cfg, &h, &inst, (0, 1), 3, 0).unwrap();
        assert_eq!(s.z.len(), 2);
        assert_eq!(s.z[1], vec![0.5, 0.75, 1.0]);
        assert!(io_surface(&cfg, &h, &inst, (0, 0), 3, 0).is_err());
    }
}
