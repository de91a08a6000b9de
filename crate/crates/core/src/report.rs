//! Serializable inference results shared by the CLI and the HTTP service.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{infer, Inference};
use crate::network::{Evidence, Network};

/// Per variable, probability per state in the variable's state order.
pub type PosteriorMap = IndexMap<String, IndexMap<String, f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferReport {
    pub evidence: Evidence,
    pub evidence_probability: f64,
    /// Set when the evidence is impossible under the model; `posteriors`
    /// is then empty.
    pub zero_evidence: bool,
    pub posteriors: PosteriorMap,
}

impl InferReport {
    pub fn from_inference(evidence: Evidence, inference: Inference) -> Self {
        let posteriors = inference
            .posteriors
            .into_iter()
            .map(|p| {
                let dist = p.states.into_iter().zip(p.distribution).collect();
                (p.variable, dist)
            })
            .collect();
        InferReport {
            evidence,
            evidence_probability: inference.evidence_probability,
            zero_evidence: false,
            posteriors,
        }
    }

    pub fn zero(evidence: Evidence) -> Self {
        InferReport {
            evidence,
            evidence_probability: 0.0,
            zero_evidence: true,
            posteriors: PosteriorMap::new(),
        }
    }

    pub fn probability(&self, variable: &str, state: &str) -> Option<f64> {
        self.posteriors.get(variable)?.get(state).copied()
    }
}

/// Runs [`infer`] and folds zero-probability evidence into the report.
/// With no query variables, every unobserved variable is queried.
pub fn infer_report(
    net: &Network,
    evidence: &Evidence,
    query: Option<&[&str]>,
) -> Result<InferReport> {
    let default_query: Vec<&str>;
    let query = match query {
        Some(q) => q,
        None => {
            default_query = net
                .variables()
                .iter()
                .map(|v| v.id())
                .filter(|id| evidence.get(id).is_none())
                .collect();
            &default_query
        }
    };
    match infer(net, evidence, query) {
        Ok(inf) => Ok(InferReport::from_inference(evidence.clone(), inf)),
        Err(Error::ZeroEvidenceProbability) => Ok(InferReport::zero(evidence.clone())),
        Err(e) => Err(e),
    }
}
