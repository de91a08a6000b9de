//! The negligence-litigation model: nine binary nodes, two AND gates and
//! two legally necessary zeros, fitted to the bundled case-audit extract.
//!
//! ```text
//! RiskExists ─┐
//!             ├─ ForeseeabilityEstablished ─┐
//! Knowledge ──┘                             │
//! DutyEstablished ── DutyBreached ──────────┼─ NecessaryRequirements ─┐
//! ButForSucceeds ───────────────────────────┘                         ├─ CaseOutcome
//! Ameliorated ────────────────────────────────────────────────────────┘
//! ```

use serde::{Deserialize, Serialize};

use crate::dataset::{parse_case_csv, Dataset};
use crate::error::{Error, Result};
use crate::learning::{
    learn_parameters, CaseField, CptTemplate, Extractor, LearningConfig, SchemaMapping, Skeleton,
};
use crate::network::{make_and_gate_cpt, Evidence, Network, Variable};
use crate::report::{infer_report, InferReport};

pub const RISK_EXISTS: &str = "RiskExists";
pub const KNOWLEDGE: &str = "Knowledge";
pub const FORESEEABILITY: &str = "ForeseeabilityEstablished";
pub const DUTY_ESTABLISHED: &str = "DutyEstablished";
pub const DUTY_BREACHED: &str = "DutyBreached";
pub const BUT_FOR: &str = "ButForSucceeds";
pub const NECESSARY_REQUIREMENTS: &str = "NecessaryRequirements";
pub const AMELIORATED: &str = "Ameliorated";
pub const CASE_OUTCOME: &str = "CaseOutcome";

/// Version tag of the bundled extract.
pub const AUDIT_EXTRACT_VERSION: &str = "v1";
pub const AUDIT_EXTRACT_CSV: &str = include_str!("../data/case_audit_extract.v1.csv");

pub type NegligenceSkeleton = Skeleton;

pub fn build_negligence_skeleton() -> NegligenceSkeleton {
    let bin = |id: &str| Variable::binary(id).expect("valid id");
    let risk = bin(RISK_EXISTS);
    let knowledge = bin(KNOWLEDGE);
    let foreseeable = bin(FORESEEABILITY);
    let duty = bin(DUTY_ESTABLISHED);
    let breached = bin(DUTY_BREACHED);
    let but_for = bin(BUT_FOR);
    let requirements = bin(NECESSARY_REQUIREMENTS);
    let ameliorated = bin(AMELIORATED);
    let outcome = Variable::new(CASE_OUTCOME, vec!["won".into(), "lost".into()]).expect("valid");

    let foreseeable_gate =
        make_and_gate_cpt(&foreseeable, &[&risk, &knowledge]).expect("binary parents");
    let requirements_gate = make_and_gate_cpt(&requirements, &[&foreseeable, &breached, &but_for])
        .expect("binary parents");

    let templates = vec![
        CptTemplate::learnable(&risk, &[]),
        CptTemplate::learnable(&knowledge, &[]),
        CptTemplate::fixed(&foreseeable_gate),
        CptTemplate::learnable(&duty, &[]),
        // no breach without an established duty
        CptTemplate::learnable(&breached, &[&duty]).with_fixed_row(1, &[0.0, 1.0]),
        CptTemplate::learnable(&but_for, &[]),
        CptTemplate::fixed(&requirements_gate),
        CptTemplate::learnable(&ameliorated, &[]),
        // rows: (req=t, am=t), (req=t, am=f), (req=f, am=t), (req=f, am=f)
        CptTemplate::learnable(&outcome, &[&requirements, &ameliorated])
            .with_fixed_row(2, &[0.0, 1.0])
            .with_fixed_row(3, &[0.0, 1.0]),
    ];

    let mapping = SchemaMapping::new()
        .with(RISK_EXISTS, Extractor::Field(CaseField::RiskExists))
        .with(KNOWLEDGE, Extractor::Field(CaseField::Knowledge))
        .with(
            FORESEEABILITY,
            Extractor::AllOf(vec![RISK_EXISTS.into(), KNOWLEDGE.into()]),
        )
        .with(
            DUTY_ESTABLISHED,
            Extractor::Field(CaseField::DutyEstablished),
        )
        .with(DUTY_BREACHED, Extractor::Field(CaseField::DutyBreached))
        .with(BUT_FOR, Extractor::Field(CaseField::Butfor))
        .with(
            NECESSARY_REQUIREMENTS,
            Extractor::AllOf(vec![
                FORESEEABILITY.into(),
                DUTY_BREACHED.into(),
                BUT_FOR.into(),
            ]),
        )
        .with(AMELIORATED, Extractor::Field(CaseField::Ameliorated))
        .with(CASE_OUTCOME, Extractor::Field(CaseField::Outcome));

    Skeleton {
        variables: vec![
            risk,
            knowledge,
            foreseeable,
            duty,
            breached,
            but_for,
            requirements,
            ameliorated,
            outcome,
        ],
        templates,
        mapping,
    }
}

pub fn builtin_audit_extract() -> Dataset {
    parse_case_csv(AUDIT_EXTRACT_CSV).expect("bundled extract parses")
}

/// Learns the model's CPTs from the bundled extract.
pub fn fit_default_model(cfg: &LearningConfig) -> Result<Network> {
    learn_parameters(&builtin_audit_extract(), &build_negligence_skeleton(), cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedScenario {
    /// Backward: observe a win, read off the causes.
    PlaintiffDoesWin,
    /// Forward: observe the three requirements, read off the outcome.
    PlaintiffShouldWin,
}

impl NamedScenario {
    pub const ALL: [NamedScenario; 2] = [
        NamedScenario::PlaintiffDoesWin,
        NamedScenario::PlaintiffShouldWin,
    ];

    pub fn id(self) -> &'static str {
        match self {
            NamedScenario::PlaintiffDoesWin => "plaintiff-does-win",
            NamedScenario::PlaintiffShouldWin => "plaintiff-should-win",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        NamedScenario::ALL
            .into_iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| Error::UnknownScenario(id.to_string()))
    }

    pub fn evidence(self) -> Evidence {
        match self {
            NamedScenario::PlaintiffDoesWin => Evidence::new().with(CASE_OUTCOME, "won"),
            NamedScenario::PlaintiffShouldWin => Evidence::new()
                .with(FORESEEABILITY, "true")
                .with(DUTY_BREACHED, "true")
                .with(BUT_FOR, "true"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Named(NamedScenario),
    Custom { name: String, evidence: Evidence },
}

impl Scenario {
    pub fn name(&self) -> &str {
        match self {
            Scenario::Named(s) => s.id(),
            Scenario::Custom { name, .. } => name,
        }
    }

    pub fn evidence(&self) -> Evidence {
        match self {
            Scenario::Named(s) => s.evidence(),
            Scenario::Custom { evidence, .. } => evidence.clone(),
        }
    }
}

impl From<NamedScenario> for Scenario {
    fn from(s: NamedScenario) -> Self {
        Scenario::Named(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: String,
    #[serde(flatten)]
    pub report: InferReport,
}

impl ScenarioResult {
    pub fn probability(&self, variable: &str, state: &str) -> Option<f64> {
        self.report.probability(variable, state)
    }
}

/// Posteriors of every variable (observed ones as point masses) under the
/// scenario's evidence. Impossible evidence is reported through
/// `zero_evidence`, not as an error.
pub fn run_scenario(net: &Network, scenario: &Scenario) -> Result<ScenarioResult> {
    let evidence = scenario.evidence();
    let all: Vec<&str> = net.variables().iter().map(|v| v.id()).collect();
    let report = infer_report(net, &evidence, Some(&all))?;
    Ok(ScenarioResult {
        scenario: scenario.name().to_string(),
        report,
    })
}
