//! Repository-mining and software-process-quality toolkit.
//!
//! The pipeline runs in five stages, each usable on its own:
//!
//! 1. [`mining`] extracts commits from a Git repository and computes
//!    gross/net size counters, the source code density (net over gross
//!    changed lines, in [0, 1]), keyword counts, and sojourn times.
//! 2. [`classify`] assigns maintenance activities (adaptive, corrective,
//!    perfective) to commits: baselines, joint-conditional-density chain
//!    models, and a discrete HMM, evaluated by accuracy and Cohen's
//!    kappa.
//! 3. [`activity`] turns classified commits and issue-tracking effort
//!    into continuous activity curves over normalized project time via
//!    weighted kernel density estimation, and composes severity-weighted
//!    mixture process models.
//! 4. [`deviation`] + [`scoring`] quantify how an observed project
//!    deviates from a process model on declared segments and calibrate
//!    those deviations into comparable scores in (0, 1) by simulating
//!    random processes (Automatic Calibration).
//! 5. [`assess`] trains small severity regressors under data scarcity,
//!    validates them with repeated leave-one-out cross-validation,
//!    weighs scores by permutation importance, and assembles
//!    interpretable reports.

pub mod activity;
pub mod assess;
pub mod classify;
pub mod deviation;
pub mod mining;
pub mod scoring;
pub mod stats;

pub use activity::{ActivityCurve, BandwidthRule, Event, ProcessModel};
pub use assess::{AssessmentReport, Dataset, GroundTruth, ProjectFeatures, RegressorSpec};
pub use classify::{Activity, ClassifierMetrics, CommitChain, FeatureSchema, JCDModel};
pub use deviation::{DeviationKind, DeviationValue, FeatureDef, Segment};
pub use mining::{CommitRecord, LanguageProfile, LineClass};
pub use scoring::{CalibrationConfig, IdealValue, ScoreTransform};
