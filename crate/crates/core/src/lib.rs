//! Data-morphology-guided undersampling for bias reduction in binary
//! classification, with a fairness-metric evaluation harness.
//!
//! The pipeline: load a dataset with declared protected features, assess
//! per-feature disparate impact, cover each (protected values, class) group
//! with pure open balls, and remove the instances assigned to balls whose
//! radius, coverage count, or density falls below percentile thresholds.
//! The evaluation side sweeps threshold grids over stratified folds and
//! reports SPD, DI, ADI, EPD, EOD, AUC, and accuracy per configuration.

pub mod coverage;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod fawos;
pub mod groups;
pub mod metrics;
pub mod synth;
pub mod tree;
pub mod undersample;

pub use coverage::{ball_attributes, build_coverage, euclidean, max_pure_radius, Ball, BallAttributes, Coverage};
pub use dataset::{load_csv, stratified_folds, Dataset, FeatureKind, FoldPlan, RowId, Schema, SchemaConfig};
pub use error::{Error, Result};
pub use experiments::{
    build_comparison, canonical_fawos_configs, run_fawos_grid, run_grid, select_best,
    write_plotdata_csv, write_report_csv, write_summary_csv, Aggregated, BestSelection,
    ComparisonRow, ConfigKind, ExperimentReport, FoldMetrics, FoldOutcome, FoldRecord,
    GridOptions,
};
pub use fawos::{label_neighborhoods, oversample, FawosConfig, FawosOutcome, NeighborhoodLabel};
pub use synth::{biased_blobs, biased_blobs_two_features};
pub use groups::{
    assess_bias, assign_groups, disadvantaged_groups, enumerate_groups, select_target_groups,
    AssessmentSource, BiasAssessment, FeatureBias, GroupId, GroupTable, Strategy,
};
pub use metrics::{Di, FairnessReport, FeatureFairness, GroupOutcomeCounts, OutcomeCounts};
pub use tree::{DecisionTree, TreeNode};
pub use undersample::{
    preprocess, resolve_thresholds, undersample, PreprocessOutcome, ResolvedThresholds,
    ThresholdConfig, UndersampleResult,
};
