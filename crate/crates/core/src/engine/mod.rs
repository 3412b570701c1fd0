//! Contextual importance, utility and influence.
//!
//! For a coalition `{i}` and output `j` with observed extremes
//! `ymin`/`ymax` and a reference range `[dmin, dmax]`:
//!
//! ```text
//! CI  = (ymax − ymin) / (dmax − dmin)
//! CU  = |y − yumin| / (ymax − ymin)      yumin = ymin (increasing) or ymax (decreasing)
//! φ   = CI × (CU − CU_ref)
//! ```
//!
//! The reference range is the output's declared range for plain and
//! vocabulary explanations, and the target concept's own extremes when
//! explaining within an intermediate concept.

mod beeswarm;
mod curves;
mod result;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use beeswarm::{beeswarm_data, mean_output_utility, BeeswarmRow};
pub use curves::{io_curve, io_surface, AxisValues, IoCurve, IoOutputCurve, IoSurface};
pub use result::{CiuResult, CiuRow, ResultMetadata, RESULT_SCHEMA};

use crate::error::{Error, Result};
use crate::feature_space::{validate_instance, FeatureSpace, Instance, OutputSpec, UtilityDirection};
use crate::minmax::{
    estimate_minmax, stream_rng, Coalition, MinMaxEstimate, SamplerLimits, DEFAULT_SAMPLES,
    DEFAULT_SEED,
};
use crate::predictor::PredictorHandle;
use crate::vocabulary::Vocabulary;

/// Raw values within this distance of `[0, 1]` count as rounding noise.
pub const UNIT_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_NEUTRAL_CU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClampPolicy {
    #[default]
    ClampAndFlag,
    Error,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub space: FeatureSpace,
    pub outputs: Vec<OutputSpec>,
    pub neutral_cu: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub clamp_policy: ClampPolicy,
    pub limits: SamplerLimits,
}

impl EngineConfig {
    pub fn new(space: FeatureSpace, outputs: Vec<OutputSpec>) -> Result<Self> {
        let cfg = EngineConfig {
            space,
            outputs,
            neutral_cu: DEFAULT_NEUTRAL_CU,
            n_samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            clamp_policy: ClampPolicy::default(),
            limits: SamplerLimits::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_neutral_cu(mut self, neutral_cu: f64) -> Result<Self> {
        self.neutral_cu = neutral_cu;
        self.validate()?;
        Ok(self)
    }

    pub fn with_samples(mut self, n: usize) -> Result<Self> {
        self.n_samples = n;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_clamp_policy(mut self, policy: ClampPolicy) -> Self {
        self.clamp_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.neutral_cu) {
            return Err(Error::InvalidConfig(format!(
                "neutral CU {} must lie in [0, 1]",
                self.neutral_cu
            )));
        }
        if self.n_samples < 1 {
            return Err(Error::InvalidConfig("sample count must be at least 1".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidConfig("at least one output spec is required".into()));
        }
        for o in &self.outputs {
            o.check()?;
        }
        Ok(())
    }

    fn check_handle(&self, handle: &PredictorHandle) -> Result<()> {
        if handle.arity() != self.space.len() {
            return Err(Error::ArityMismatch {
                expected: self.space.len(),
                actual: handle.arity(),
            });
        }
        if handle.n_outputs() != self.outputs.len() {
            return Err(Error::InvalidConfig(format!(
                "model has {} outputs but {} output specs were given",
                handle.n_outputs(),
                self.outputs.len()
            )));
        }
        Ok(())
    }

    /// Empty means every output.
    fn resolve_outputs(&self, outputs: &[usize]) -> Result<Vec<usize>> {
        if outputs.is_empty() {
            return Ok((0..self.outputs.len()).collect());
        }
        let mut seen = Vec::new();
        for &o in outputs {
            if o >= self.outputs.len() {
                return Err(Error::InvalidConfig(format!(
                    "output index {o} out of range for {} outputs",
                    self.outputs.len()
                )));
            }
            if !seen.contains(&o) {
                seen.push(o);
            }
        }
        Ok(seen)
    }

    /// One single-feature coalition per feature, labelled by feature name.
    pub fn feature_coalitions(&self) -> Vec<(String, Coalition)> {
        (0..self.space.len())
            .map(|i| {
                (
                    self.space.feature(i).name.clone(),
                    Coalition::single(i, &self.space).expect("index in range"),
                )
            })
            .collect()
    }

    pub fn metadata(&self) -> ResultMetadata {
        ResultMetadata {
            seed: self.seed,
            n_samples: self.n_samples,
            neutral_cu: self.neutral_cu,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            model: None,
        }
    }

    /// Estimate for one coalition on its own random stream.
    pub fn estimate(
        &self,
        handle: &PredictorHandle,
        inst: &Instance,
        coalition: &Coalition,
        stream_prefix: &[u64],
    ) -> Result<MinMaxEstimate> {
        let mut keys = stream_prefix.to_vec();
        keys.push(coalition.stream_key());
        let mut rng = stream_rng(self.seed, &keys);
        estimate_minmax(
            handle,
            &self.space,
            inst,
            coalition,
            self.n_samples,
            &mut rng,
            self.limits,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiCu {
    pub ci: f64,
    pub cu: f64,
    pub instability: bool,
    pub clamped: bool,
}

/// CI and CU from observed extremes against a reference range.
///
/// Flags instability when CI, CU, or the position of `ymin`/`ymax` within the
/// reference range falls outside `[0, 1]`, which means the model under- or
/// overshoots the permissible range on some sample.
#[allow(clippy::too_many_arguments)]
pub fn ci_cu_from_minmax(
    y: f64,
    ymin: f64,
    ymax: f64,
    denom_min: f64,
    denom_max: f64,
    direction: UtilityDirection,
    policy: ClampPolicy,
) -> Result<CiCu> {
    let denom = denom_max - denom_min;
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "reference range [{denom_min}, {denom_max}] must have max > min"
        )));
    }
    let span = ymax - ymin;
    let raw_ci = span / denom;
    let raw_cu = if span > 0.0 {
        let yumin = match direction {
            UtilityDirection::Increasing => ymin,
            UtilityDirection::Decreasing => ymax,
        };
        (y - yumin).abs() / span
    } else {
        0.5
    };
    let u_low = (ymin - denom_min) / denom;
    let u_high = (ymax - denom_min) / denom;

    let outside = |v: f64| !(-UNIT_TOLERANCE..=1.0 + UNIT_TOLERANCE).contains(&v);
    let offender = [
        ("CI", raw_ci),
        ("CU", raw_cu),
        ("utility of ymin", u_low),
        ("utility of ymax", u_high),
    ]
    .into_iter()
    .find(|&(_, v)| outside(v));

    if let (Some((quantity, value)), ClampPolicy::Error) = (offender, policy) {
        return Err(Error::Instability {
            label: String::new(),
            output: 0,
            quantity,
            value,
        });
    }
    let ci = raw_ci.clamp(0.0, 1.0);
    let cu = raw_cu.clamp(0.0, 1.0);
    Ok(CiCu {
        ci,
        cu,
        instability: offender.is_some(),
        clamped: outside(raw_ci) || outside(raw_cu),
    })
}

fn value_text(space: &FeatureSpace, inst: &Instance, coalition: &Coalition) -> String {
    match coalition.indices() {
        [i] => space.feature(*i).format_value(inst[*i]),
        many => many
            .iter()
            .map(|&i| {
                let f = space.feature(i);
                format!("{}={}", f.name, f.format_value(inst[i]))
            })
            .collect::<Vec<_>>()
            .join(", "),
    }
}

#[allow(clippy::too_many_arguments)]
fn build_row(
    config: &EngineConfig,
    inst: &Instance,
    label: &str,
    coalition: &Coalition,
    est: &MinMaxEstimate,
    output: usize,
    denom: (f64, f64),
) -> Result<CiuRow> {
    let spec = &config.outputs[output];
    let (ymin, ymax, y) = (est.ymin[output], est.ymax[output], est.y[output]);
    let cc = ci_cu_from_minmax(y, ymin, ymax, denom.0, denom.1, spec.direction, config.clamp_policy)
        .map_err(|e| match e {
            Error::Instability {
                quantity, value, ..
            } => Error::Instability {
                label: label.to_string(),
                output,
                quantity,
                value,
            },
            other => other,
        })?;
    let cu_ref = config.neutral_cu;
    Ok(CiuRow {
        label: label.to_string(),
        coalition: coalition.clone(),
        output_index: output,
        output_name: spec.name.clone(),
        out_value: y,
        ymin,
        ymax,
        ci: cc.ci,
        cu: cc.cu,
        influence: cc.ci * (cc.cu - cu_ref),
        cu_ref_used: cu_ref,
        instability_flag: cc.instability,
        clamped: cc.clamped,
        value: value_text(&config.space, inst, coalition),
    })
}

fn check_coalitions(config: &EngineConfig, coalitions: &[(String, Coalition)]) -> Result<()> {
    if coalitions.is_empty() {
        return Err(Error::InvalidConfig("no coalitions to explain".into()));
    }
    for (label, c) in coalitions {
        c.validate(&config.space)
            .map_err(|e| Error::InvalidCoalition(format!("'{label}': {e}")))?;
    }
    Ok(())
}

/// Rows for every coalition × output, estimating each coalition on its own stream.
pub(crate) fn explain_rows(
    config: &EngineConfig,
    handle: &PredictorHandle,
    inst: &Instance,
    outputs: &[usize],
    coalitions: &[(String, Coalition)],
    stream_prefix: &[u64],
    denominators: &(dyn Fn(usize) -> Result<(f64, f64)> + Sync),
) -> Result<Vec<CiuRow>> {
    let per_coalition: Vec<Vec<CiuRow>> = coalitions
        .par_iter()
        .map(|(label, coalition)| {
            let est = config.estimate(handle, inst, coalition, stream_prefix)?;
            outputs
                .iter()
                .map(|&o| build_row(config, inst, label, coalition, &est, o, denominators(o)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_coalition.into_iter().flatten().collect())
}

fn prepare(
    config: &EngineConfig,
    handle: &PredictorHandle,
    inst: &Instance,
    outputs: &[usize],
) -> Result<Vec<usize>> {
    config.validate()?;
    config.check_handle(handle)?;
    validate_instance(&config.space, inst)?;
    config.resolve_outputs(outputs)
}

/// Explain `inst` for each coalition (default: one per feature) and output
/// (empty slice: all outputs), using the output ranges as reference.
pub fn explain(
    config: &EngineConfig,
    handle: &PredictorHandle,
    inst: &Instance,
    outputs: &[usize],
    coalitions: Option<&[(String, Coalition)]>,
) -> Result<CiuResult> {
    let outputs = prepare(config, handle, inst, outputs)?;
    let default;
    let coalitions = match coalitions {
        Some(c) => c,
        None => {
            default = config.feature_coalitions();
            &default
        }
    };
    check_coalitions(config, coalitions)?;
    let rows = explain_rows(config, handle, inst, &outputs, coalitions, &[], &|o| {
        Ok((config.outputs[o].min, config.outputs[o].max))
    })?;
    Ok(CiuResult {
        rows,
        instance: inst.clone(),
        output_names: config.outputs.iter().map(|o| o.name.clone()).collect(),
        target_concept: None,
        metadata: config.metadata(),
    })
}

/// One row per concept; each concept's features are perturbed jointly.
pub fn explain_voc(
    config: &EngineConfig,
    handle: &PredictorHandle,
    inst: &Instance,
    vocabulary: &Vocabulary,
    outputs: &[usize],
) -> Result<CiuResult> {
    if vocabulary.is_empty() {
        return Err(Error::InvalidConfig("vocabulary is empty".into()));
    }
    explain(config, handle, inst, outputs, Some(&vocabulary.coalitions()))
}

/// An intermediate concept together with its own extremes, used as the
/// reference range for explanations inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetConcept {
    pub name: String,
    pub coalition: Coalition,
    /// `(ymin, ymax)` per output index, where known.
    pub ranges: Vec<Option<(f64, f64)>>,
    /// Instance the extremes were computed for, when known.
    pub instance: Option<Instance>,
}

impl TargetConcept {
    pub fn from_estimate(name: impl Into<String>, coalition: Coalition, est: &MinMaxEstimate) -> Self {
        TargetConcept {
            name: name.into(),
            coalition,
            ranges: est
                .ymin
                .iter()
                .zip(&est.ymax)
                .map(|(&lo, &hi)| Some((lo, hi)))
                .collect(),
            instance: None,
        }
    }

    /// Pick the concept's rows out of an earlier concept-level result.
    pub fn from_result(result: &CiuResult, name: &str) -> Result<Self> {
        let rows: Vec<&CiuRow> = result.rows.iter().filter(|r| r.label == name).collect();
        let Some(first) = rows.first() else {
            let mut available: Vec<String> = Vec::new();
            for r in &result.rows {
                if !available.contains(&r.label) {
                    available.push(r.label.clone());
                }
            }
            return Err(Error::UnknownConcept {
                name: name.to_string(),
                available,
            });
        };
        let mut ranges = vec![None; result.output_names.len()];
        for r in &rows {
            if r.coalition != first.coalition {
                return Err(Error::ResultMismatch(format!(
                    "concept '{name}' appears with different coalitions"
                )));
            }
            if r.output_index >= ranges.len() {
                ranges.resize(r.output_index + 1, None);
            }
            ranges[r.output_index] = Some((r.ymin, r.ymax));
        }
        Ok(TargetConcept {
            name: name.to_string(),
            coalition: first.coalition.clone(),
            ranges,
            instance: Some(result.instance.clone()),
        })
    }
}

/// Explain children (default: each feature of the target) relative to the
/// target concept's range instead of the output range.
pub fn explain_target_concept(
    config: &EngineConfig,
    handle: &PredictorHandle,
    inst: &Instance,
    children: Option<&[(String, Coalition)]>,
    target: &TargetConcept,
    outputs: &[usize],
) -> Result<CiuResult> {
    let outputs = prepare(config, handle, inst, outputs)?;
    target.coalition.validate(&config.space)?;
    if let Some(ti) = &target.instance {
        if ti != inst {
            return Err(Error::ResultMismatch(format!(
                "target concept '{}' was computed for a different instance",
                target.name
            )));
        }
    }
    let default;
    let children = match children {
        Some(c) => c,
        None => {
            default = target
                .coalition
                .indices()
                .iter()
                .map(|&i| {
                    (
                        config.space.feature(i).name.clone(),
                        Coalition::single(i, &config.space).expect("index in range"),
                    )
                })
                .collect::<Vec<_>>();
            &default
        }
    };
    check_coalitions(config, children)?;
    for (label, c) in children {
        if !c.is_subset_of(&target.coalition) {
            return Err(Error::NotSubset {
                child: label.clone(),
                target: target.name.clone(),
            });
        }
    }
    for &o in &outputs {
        match target.ranges.get(o).copied().flatten() {
            None => {
                return Err(Error::ResultMismatch(format!(
                    "target concept '{}' has no range for output {o}",
                    target.name
                )))
            }
            Some((lo, hi)) if hi <= lo || hi.is_nan() || lo.is_nan() => {
                return Err(Error::DegenerateTargetConcept(target.name.clone(), o))
            }
            Some(_) => {}
        }
    }
    let rows = explain_rows(config, handle, inst, &outputs, children, &[], &|o| {
        Ok(target.ranges[o].expect("checked above"))
    })?;
    Ok(CiuResult {
        rows,
        instance: inst.clone(),
        output_names: config.outputs.iter().map(|o| o.name.clone()).collect(),
        target_concept: Some(target.name.clone()),
        metadata: config.metadata(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContrastiveMode {
    /// `ci_A × (cu_A − cu_B)`: A explained with B's utilities as reference.
    #[default]
    Asymmetric,
    /// `ci_A·cu_A − ci_B·cu_B`
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveValue {
    pub label: String,
    pub output_index: usize,
    pub phi: f64,
}

/// Contrast two explanations row by row; both must list the same
/// labels, coalitions and outputs in the same order.
pub fn contrastive(
    a: &CiuResult,
    b: &CiuResult,
    mode: ContrastiveMode,
) -> Result<Vec<ContrastiveValue>> {
    if a.rows.is_empty() {
        return Err(Error::ResultMismatch("results are empty".into()));
    }
    if a.rows.len() != b.rows.len() {
        return Err(Error::ResultMismatch(format!(
            "{} rows versus {} rows",
            a.rows.len(),
            b.rows.len()
        )));
    }
    a.rows
        .iter()
        .zip(&b.rows)
        .map(|(ra, rb)| {
            if ra.label != rb.label || ra.coalition != rb.coalition || ra.output_index != rb.output_index
            {
                return Err(Error::ResultMismatch(format!(
                    "row '{}' (output {}) does not match row '{}' (output {})",
                    ra.label, ra.output_index, rb.label, rb.output_index
                )));
            }
            let phi = match mode {
                ContrastiveMode::Asymmetric => ra.ci * (ra.cu - rb.cu),
                ContrastiveMode::Symmetric => ra.ci * ra.cu - rb.ci * rb.cu,
            };
            Ok(ContrastiveValue {
                label: ra.label.clone(),
                output_index: ra.output_index,
                phi,
            })
        })
        .collect()
}
