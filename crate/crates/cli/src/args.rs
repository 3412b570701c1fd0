use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ciu", version, about = "Contextual importance and utility explanations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explain one instance feature by feature.
    Explain {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Explain one instance through the concepts of a vocabulary.
    ExplainVoc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        report: ReportArgs,
        /// JSON object of concept name → array of feature names.
        #[arg(long)]
        vocabulary: PathBuf,
    },
    /// Explain the parts of one concept relative to that concept.
    TargetConcept {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        report: ReportArgs,
        #[arg(long)]
        vocabulary: PathBuf,
        /// Concept to decompose.
        #[arg(long)]
        target_concept: String,
        /// Earlier concept-level result.json holding the concept's extremes.
        /// Without it the extremes are estimated now.
        #[arg(long)]
        target_ciu: Option<PathBuf>,
        /// Vocabulary concepts to explain inside the target (default: its features).
        #[arg(long, value_delimiter = ',')]
        children: Vec<String>,
    },
    /// Contrast two stored results.
    Contrastive {
        /// Result explained (A).
        #[arg(long)]
        a: PathBuf,
        /// Reference result (B).
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Asymmetric)]
        mode: ModeArg,
        #[arg(long)]
        title: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Explain every dataset row and draw a beeswarm.
    Beeswarm {
        #[command(flatten)]
        common: Common,
        /// Output to explain (name or index).
        #[arg(long, default_value = "0")]
        output: String,
        #[arg(long, value_enum, default_value_t = StatArg::Influence)]
        statistic: StatArg,
    },
    /// Output against one feature, others held at the instance.
    Io {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: InstanceArgs,
        /// Feature name or index.
        #[arg(long)]
        feature: String,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Leave out the ymin, ymax and neutral lines.
        #[arg(long)]
        no_illustrate: bool,
        /// Outputs to plot (names or indices; default all).
        #[arg(long = "output", value_delimiter = ',')]
        output_sel: Vec<String>,
    },
    /// One output over a grid of two features.
    Surface {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: InstanceArgs,
        /// Two feature names or indices.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        features: Vec<String>,
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[arg(long, default_value = "0")]
        output: String,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Training or reference data (CSV). Supplies the feature space.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Feature space as JSON, when no data is given.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Categorical column, optionally with its labels in order: `name` or `name=a,b,c`.
    #[arg(long = "category")]
    pub categories: Vec<String>,
    /// Numeric feature range: `name=lo,hi`.
    #[arg(long = "range")]
    pub ranges: Vec<String>,
    /// The CSV has no header row; columns are named x1, x2, ...
    #[arg(long)]
    pub no_header: bool,
    #[arg(long)]
    pub id_column: Option<String>,
    /// Column holding the training target; removed from the features and
    /// used for the output range unless --out-range is given.
    #[arg(long)]
    pub target_column: Option<String>,

    /// Built-in model descriptor, or `exec:<command line>` for an external process.
    #[arg(long)]
    pub model: String,
    /// Output names, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub outputs: Vec<String>,
    /// Output range `lo,hi`; repeat once per output, or give one for all.
    #[arg(long = "out-range", allow_hyphen_values = true)]
    pub out_ranges: Vec<String>,
    /// Utility direction per output (or one for all).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub direction: Vec<DirectionArg>,
    #[arg(long, default_value_t = 10.0)]
    pub handshake_timeout: f64,
    #[arg(long, default_value_t = 60.0)]
    pub predict_timeout: f64,

    /// Neutral CU in [0, 1], or `mean-output` for the data's mean output utility.
    #[arg(long, default_value = "0.5")]
    pub neutral_cu: String,
    #[arg(long, default_value_t = ciu_core::minmax::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, env = "CIU_SEED", default_value_t = ciu_core::minmax::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ClampArg::ClampAndFlag)]
    pub clamp_policy: ClampArg,
    /// Exit with status 3 when any row is flagged unstable.
    #[arg(long)]
    pub strict: bool,

    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = "ciu-out")]
    pub out: PathBuf,
    /// Allow writing into a non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Row index into --data.
    #[arg(long, group = "instance_source")]
    pub instance: Option<usize>,
    /// Comma separated values (category labels or indices allowed).
    #[arg(long, group = "instance_source", allow_hyphen_values = true)]
    pub instance_values: Option<String>,
    /// JSON (array, or object by feature name) or single-row CSV with header.
    #[arg(long, group = "instance_source")]
    pub instance_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Plots to write: influence, pi, pi-color.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub plots: Vec<PlotArg>,
    /// Write explanation.txt.
    #[arg(long)]
    pub text: bool,
    /// Write explanation.md.
    #[arg(long)]
    pub markdown: bool,
    /// Outputs to explain (names or indices; default all).
    #[arg(long = "output", value_delimiter = ',')]
    pub output_sel: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotArg {
    Influence,
    Pi,
    PiColor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClampArg {
    ClampAndFlag,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Asymmetric,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatArg {
    Ci,
    Cu,
    Influence,
}
