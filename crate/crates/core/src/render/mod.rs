//! Textual explanations and plot artifacts.
//!
//! Every plot is first built as a [`PlotDocument`] (plain data, serializable
//! under the `ciu-plot/1` schema) and then drawn to SVG from that document
//! alone, so a stored document can be re-rendered later.

mod plots;
mod svg;
mod text;

use serde::{Deserialize, Serialize};

pub use plots::{
    plot_beeswarm, plot_contrastive, plot_influence, plot_io, plot_pi, plot_surface,
    BeeswarmStatistic, PiMode,
};
pub use svg::render_svg;
pub use text::{textual_explanation, Level, TextualThresholds};

use crate::engine::ResultMetadata;
use crate::error::{Error, Result};

pub const PLOT_SCHEMA: &str = "ciu-plot/1";

/// JSON Schema for plot documents.
pub const PLOT_JSON_SCHEMA: &str = include_str!("../../schema/ciu-plot-1.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    InfluenceBar,
    PiOverlap,
    PiColor,
    IoPlot,
    HeatmapSurface,
    Beeswarm,
    ContrastiveBar,
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::InfluenceBar => "influence-bar",
            PlotKind::PiOverlap => "pi-overlap",
            PlotKind::PiColor => "pi-color",
            PlotKind::IoPlot => "io-plot",
            PlotKind::HeatmapSurface => "heatmap-surface",
            PlotKind::Beeswarm => "beeswarm",
            PlotKind::ContrastiveBar => "contrastive-bar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiBar {
    pub label: String,
    pub ci: f64,
    pub cu: f64,
    /// Length of the transparent bar (CI).
    pub transparent: f64,
    /// Length of the solid bar (CI × CU).
    pub solid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiColorBar {
    pub label: String,
    pub ci: f64,
    pub cu: f64,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoSeries {
    pub name: String,
    pub y: Vec<f64>,
    pub out_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ymin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ymax: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neutral: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeeswarmDot {
    pub instance_id: String,
    pub value: f64,
    /// Histogram bin along the value axis.
    pub bin: usize,
    /// Stacking slot around the lane centre: 0, +1, −1, +2, …
    pub slot: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeeswarmLane {
    pub label: String,
    pub dots: Vec<BeeswarmDot>,
}

/// Kind-specific plot payload, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PlotData {
    InfluenceBar {
        output: String,
        cu_ref: f64,
        axis: (f64, f64),
        bars: Vec<Bar>,
    },
    PiOverlap {
        output: String,
        axis: (f64, f64),
        bars: Vec<PiBar>,
    },
    PiColor {
        output: String,
        axis: (f64, f64),
        bars: Vec<PiColorBar>,
    },
    IoPlot {
        feature: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        categories: Option<Vec<String>>,
        x: Vec<f64>,
        instance_x: f64,
        y_range: (f64, f64),
        illustrate_ciu: bool,
        series: Vec<IoSeries>,
    },
    HeatmapSurface {
        output: String,
        x_feature: String,
        y_feature: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_categories: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y_categories: Option<Vec<String>>,
        x: Vec<f64>,
        y: Vec<f64>,
        z: Vec<Vec<f64>>,
        range: (f64, f64),
        instance: (f64, f64),
    },
    Beeswarm {
        statistic: BeeswarmStatistic,
        axis: (f64, f64),
        bins: usize,
        lanes: Vec<BeeswarmLane>,
    },
    ContrastiveBar {
        axis: (f64, f64),
        bars: Vec<Bar>,
    },
}

impl PlotData {
    pub fn kind(&self) -> PlotKind {
        match self {
            PlotData::InfluenceBar { .. } => PlotKind::InfluenceBar,
            PlotData::PiOverlap { .. } => PlotKind::PiOverlap,
            PlotData::PiColor { .. } => PlotKind::PiColor,
            PlotData::IoPlot { .. } => PlotKind::IoPlot,
            PlotData::HeatmapSurface { .. } => PlotKind::HeatmapSurface,
            PlotData::Beeswarm { .. } => PlotKind::Beeswarm,
            PlotData::ContrastiveBar { .. } => PlotKind::ContrastiveBar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotDocument {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ResultMetadata>,
    #[serde(flatten)]
    pub data: PlotData,
}

impl PlotDocument {
    pub fn new(data: PlotData) -> Self {
        PlotDocument {
            schema: PLOT_SCHEMA.to_string(),
            title: None,
            metadata: None,
            data,
        }
    }

    pub fn kind(&self) -> PlotKind {
        self.data.kind()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PlotDocument = serde_json::from_str(text)?;
        if doc.schema != PLOT_SCHEMA {
            return Err(Error::InvalidPlot(format!(
                "unsupported plot schema '{}'",
                doc.schema
            )));
        }
        Ok(doc)
    }
}

/// Fixed colours and geometry, so output is byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Style {
    pub negative: String,
    pub positive: String,
    pub transparent_opacity: f64,
    pub instance: String,
    pub ymin_line: String,
    pub ymax_line: String,
    pub neutral_line: String,
    pub series: Vec<String>,
    pub low: String,
    pub high: String,
    pub missing: String,
    pub width: f64,
    pub row_height: f64,
    pub label_width: f64,
    pub dot_radius: f64,
    pub font_family: String,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            negative: "#d73027".into(),
            positive: "#1a9850".into(),
            transparent_opacity: 0.25,
            instance: "#e41a1c".into(),
            ymin_line: "#d73027".into(),
            ymax_line: "#1a9850".into(),
            neutral_line: "#ff7f00".into(),
            series: vec![
                "#377eb8".into(),
                "#984ea3".into(),
                "#4daf4a".into(),
                "#a65628".into(),
                "#f781bf".into(),
                "#999999".into(),
            ],
            low: "#2166ac".into(),
            high: "#b2182b".into(),
            missing: "#bdbdbd".into(),
            width: 720.0,
            row_height: 26.0,
            label_width: 170.0,
            dot_radius: 4.0,
            font_family: "sans-serif".into(),
        }
    }
}

/// A plot as data plus its SVG rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotArtifact {
    pub kind: PlotKind,
    pub data: PlotDocument,
    pub svg: String,
}

impl PlotArtifact {
    pub fn from_document(data: PlotDocument, style: &Style) -> Result<Self> {
        let svg = render_svg(&data, style)?;
        Ok(PlotArtifact {
            kind: data.kind(),
            data,
            svg,
        })
    }

    pub(crate) fn build(data: PlotData, metadata: Option<&ResultMetadata>) -> Result<Self> {
        let mut doc = PlotDocument::new(data);
        doc.metadata = metadata.cloned();
        PlotArtifact::from_document(doc, &Style::default())
    }

    pub fn with_title(self, title: impl Into<String>) -> Result<Self> {
        let mut doc = self.data;
        doc.title = Some(title.into());
        PlotArtifact::from_document(doc, &Style::default())
    }

    pub fn with_metadata(self, metadata: &ResultMetadata) -> Result<Self> {
        let mut doc = self.data;
        doc.metadata = Some(metadata.clone());
        PlotArtifact::from_document(doc, &Style::default())
    }

    pub fn restyle(self, style: &Style) -> Result<Self> {
        PlotArtifact::from_document(self.data, style)
    }
}
