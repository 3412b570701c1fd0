use serde::{Deserialize, Serialize};

use super::svg::gradient;
use super::{
    Bar, BeeswarmDot, BeeswarmLane, IoSeries, PiBar, PiColorBar, PlotArtifact, PlotData, Style,
};
use crate::engine::{BeeswarmRow, CiuResult, CiuRow, ContrastiveValue, IoCurve, IoSurface};
use crate::error::{Error, Result};

pub const BEESWARM_BINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PiMode {
    #[default]
    Overlap,
    Color,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeeswarmStatistic {
    Ci,
    Cu,
    #[default]
    Influence,
}

impl BeeswarmStatistic {
    fn of(self, row: &BeeswarmRow) -> f64 {
        match self {
            BeeswarmStatistic::Ci => row.ci,
            BeeswarmStatistic::Cu => row.cu,
            BeeswarmStatistic::Influence => row.influence,
        }
    }
}

impl std::str::FromStr for BeeswarmStatistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(BeeswarmStatistic::Ci),
            "cu" => Ok(BeeswarmStatistic::Cu),
            "influence" => Ok(BeeswarmStatistic::Influence),
            other => Err(Error::InvalidPlot(format!(
                "unknown beeswarm statistic '{other}' (expected ci, cu or influence)"
            ))),
        }
    }
}

fn output_rows(result: &CiuResult, output: usize) -> Result<Vec<&CiuRow>> {
    let rows: Vec<&CiuRow> = result.rows_for_output(output).collect();
    if rows.is_empty() {
        return Err(Error::InvalidPlot(format!("result has no rows for output {output}")));
    }
    Ok(rows)
}

/// Signed influence bars, largest magnitude first, on `[−cu_ref, 1 − cu_ref]`.
pub fn plot_influence(result: &CiuResult, output: usize) -> Result<PlotArtifact> {
    let mut rows = output_rows(result, output)?;
    let cu_ref = rows[0].cu_ref_used;
    rows.sort_by(|a, b| b.influence.abs().total_cmp(&a.influence.abs()));
    PlotArtifact::build(
        PlotData::InfluenceBar {
            output: rows[0].output_name.clone(),
            cu_ref,
            axis: (-cu_ref, 1.0 - cu_ref),
            bars: rows
                .iter()
                .map(|r| Bar {
                    label: r.label.clone(),
                    value: r.influence,
                })
                .collect(),
        },
        Some(&result.metadata),
    )
}

/// Potential-influence bars, highest CI first.
pub fn plot_pi(result: &CiuResult, output: usize, mode: PiMode) -> Result<PlotArtifact> {
    let mut rows = output_rows(result, output)?;
    rows.sort_by(|a, b| b.ci.total_cmp(&a.ci));
    let name = rows[0].output_name.clone();
    let data = match mode {
        PiMode::Overlap => PlotData::PiOverlap {
            output: name,
            axis: (0.0, 1.0),
            bars: rows
                .iter()
                .map(|r| PiBar {
                    label: r.label.clone(),
                    ci: r.ci,
                    cu: r.cu,
                    transparent: r.ci,
                    solid: r.ci * r.cu,
                })
                .collect(),
        },
        PiMode::Color => {
            let style = Style::default();
            PlotData::PiColor {
                output: name,
                axis: (0.0, 1.0),
                bars: rows
                    .iter()
                    .map(|r| PiColorBar {
                        label: r.label.clone(),
                        ci: r.ci,
                        cu: r.cu,
                        color: gradient(&style.negative, &style.positive, r.cu),
                    })
                    .collect(),
            }
        }
    };
    PlotArtifact::build(data, Some(&result.metadata))
}

pub fn plot_io(curve: &IoCurve, illustrate_ciu: bool) -> Result<PlotArtifact> {
    if curve.outputs.is_empty() {
        return Err(Error::InvalidPlot("curve has no outputs".into()));
    }
    let lo = curve.outputs.iter().map(|o| o.range.0).fold(f64::INFINITY, f64::min);
    let hi = curve.outputs.iter().map(|o| o.range.1).fold(f64::NEG_INFINITY, f64::max);
    PlotArtifact::build(
        PlotData::IoPlot {
            feature: curve.axis.feature.clone(),
            categories: curve.axis.labels.clone(),
            x: curve.axis.values.clone(),
            instance_x: curve.instance_value,
            y_range: (lo, hi),
            illustrate_ciu,
            series: curve
                .outputs
                .iter()
                .map(|o| IoSeries {
                    name: o.name.clone(),
                    y: o.y.clone(),
                    out_value: o.out_value,
                    ymin: illustrate_ciu.then_some(o.ymin),
                    ymax: illustrate_ciu.then_some(o.ymax),
                    neutral: illustrate_ciu.then_some(o.neutral),
                })
                .collect(),
        },
        None,
    )
}

pub fn plot_surface(surface: &IoSurface) -> Result<PlotArtifact> {
    PlotArtifact::build(
        PlotData::HeatmapSurface {
            output: surface.output_name.clone(),
            x_feature: surface.x.feature.clone(),
            y_feature: surface.y.feature.clone(),
            x_categories: surface.x.labels.clone(),
            y_categories: surface.y.labels.clone(),
            x: surface.x.values.clone(),
            y: surface.y.values.clone(),
            z: surface.z.clone(),
            range: surface.range,
            instance: surface.instance,
        },
        None,
    )
}

/// Slot sequence 0, +1, −1, +2, −2, …
fn stack_slot(k: usize) -> i32 {
    let half = k.div_ceil(2) as i32;
    if k % 2 == 1 {
        half
    } else {
        -half
    }
}

/// One lane per label (first-appearance order). Dots are binned along the
/// value axis and stacked symmetrically within each bin.
pub fn plot_beeswarm(
    rows: &[BeeswarmRow],
    statistic: BeeswarmStatistic,
    cu_ref: f64,
) -> Result<PlotArtifact> {
    if rows.is_empty() {
        return Err(Error::InvalidPlot("beeswarm table is empty".into()));
    }
    let axis = match statistic {
        BeeswarmStatistic::Influence => (-cu_ref, 1.0 - cu_ref),
        _ => (0.0, 1.0),
    };
    let mut lanes: Vec<(String, Vec<&BeeswarmRow>)> = Vec::new();
    for r in rows {
        match lanes.iter_mut().find(|(l, _)| *l == r.label) {
            Some((_, v)) => v.push(r),
            None => lanes.push((r.label.clone(), vec![r])),
        }
    }
    let lanes = lanes
        .into_iter()
        .map(|(label, members)| {
            let mut counts = vec![0usize; BEESWARM_BINS];
            let dots = members
                .iter()
                .map(|r| {
                    let value = statistic.of(r);
                    let t = ((value - axis.0) / (axis.1 - axis.0)).clamp(0.0, 1.0);
                    let bin = ((t * BEESWARM_BINS as f64) as usize).min(BEESWARM_BINS - 1);
                    let slot = stack_slot(counts[bin]);
                    counts[bin] += 1;
                    BeeswarmDot {
                        instance_id: r.instance_id.clone(),
                        value,
                        bin,
                        slot,
                        color_value: r.normalized_value,
                    }
                })
                .collect();
            BeeswarmLane { label, dots }
        })
        .collect();
    PlotArtifact::build(
        PlotData::Beeswarm {
            statistic,
            axis,
            bins: BEESWARM_BINS,
            lanes,
        },
        None,
    )
}

/// Diverging bars on `[−1, 1]`, in input order.
pub fn plot_contrastive(values: &[ContrastiveValue], title: Option<&str>) -> Result<PlotArtifact> {
    if values.is_empty() {
        return Err(Error::InvalidPlot("no contrastive values".into()));
    }
    let multi = values.iter().any(|v| v.output_index != values[0].output_index);
    let art = PlotArtifact::build(
        PlotData::ContrastiveBar {
            axis: (-1.0, 1.0),
            bars: values
                .iter()
                .map(|v| Bar {
                    label: if multi {
                        format!("{} [{}]", v.label, v.output_index)
                    } else {
                        v.label.clone()
                    },
                    value: v.phi,
                })
                .collect(),
        },
        None,
    )?;
    match title {
        Some(t) => art.with_title(t),
        None => Ok(art),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_alternate() {
        let s: Vec<i32> = (0..5).map(stack_slot).collect();
        assert_eq!(s, vec![0, 1, -1, 2, -2]);
    }

    #[test]
    fn statistic_parsing() {
        assert_eq!("cu".parse::<BeeswarmStatistic>().unwrap(), BeeswarmStatistic::Cu);
        assert!("phi".parse::<BeeswarmStatistic>().is_err());
    }
}
