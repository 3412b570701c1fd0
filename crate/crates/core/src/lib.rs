//! Contextual importance and utility explanations for black-box models.
//!
//! The pipeline: describe inputs with a [`FeatureSpace`], wrap the model in a
//! [`PredictorHandle`], configure an [`EngineConfig`] and call [`explain`].
//! The [`render`] module turns results into text and plot artifacts.

pub mod engine;
pub mod error;
pub mod feature_space;
pub mod minmax;
pub mod predictor;
pub mod render;
pub mod vocabulary;

pub use engine::{
    beeswarm_data, ci_cu_from_minmax, contrastive, explain, explain_target_concept, explain_voc,
    io_curve, io_surface, mean_output_utility, BeeswarmRow, CiCu, CiuResult, CiuRow, ClampPolicy,
    ContrastiveMode, ContrastiveValue, EngineConfig, IoCurve, IoSurface, TargetConcept,
};
pub use error::{Error, Result};
pub use feature_space::{
    derive_output_spec, ingest_csv, ingest_csv_reader, validate_instance, CsvOptions, Dataset,
    FeatureKind, FeatureSpace, FeatureSpec, Instance, OutputSpec, UtilityDirection,
};
pub use minmax::{estimate_minmax, exhaustive_minmax, Coalition, MinMaxEstimate, SamplerLimits};
pub use predictor::{spawn_external, BuiltinModel, ExternalOptions, PredictorHandle};
pub use vocabulary::Vocabulary;
