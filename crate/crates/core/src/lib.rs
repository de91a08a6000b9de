//! Discrete Bayesian networks with exact inference, parameter learning from
//! case-audit records, and a negligence-litigation model built on both.

pub mod dataset;
pub mod error;
pub mod inference;
pub mod learning;
pub mod negligence;
pub mod network;
pub mod report;

pub use dataset::{parse_case_csv, summarize, write_case_csv, CaseRecord, Dataset, TotalsSummary};
pub use error::{Error, Result};
pub use inference::{
    elimination_order, enumerate_posterior, infer, joint_probability, probability_of_evidence,
    Inference, Posterior,
};
pub use learning::{
    family_counts, learn_parameters, FamilyCounts, LearningConfig, SchemaMapping, Skeleton,
};
pub use negligence::{
    build_negligence_skeleton, builtin_audit_extract, fit_default_model, run_scenario,
    NamedScenario, Scenario, ScenarioResult,
};
pub use network::{build_network, make_and_gate_cpt, Cpt, Evidence, ModelDoc, Network, Variable};
pub use report::{infer_report, InferReport, PosteriorMap};
