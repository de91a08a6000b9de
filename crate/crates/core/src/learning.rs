//! Parameter estimation for a fixed network skeleton.
//!
//! Each learnable CPT row is estimated by maximum likelihood with additive
//! (Dirichlet) smoothing over records where the whole family is observed.
//! Structural cells are copied through untouched.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{ButFor, CaseRecord, Dataset, Finding, Outcome};
use crate::error::{Error, Result};
use crate::network::{build_network, row_index, Cpt, Network, Variable};

/// A record column that feeds a binary model variable. State 0 is the
/// affirmative value (yes / won / succeeded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseField {
    Outcome,
    DutyEstablished,
    DutyBreached,
    SocBreached,
    Butfor,
    Ameliorated,
    RiskExists,
    Knowledge,
}

impl CaseField {
    pub fn observe(self, r: &CaseRecord) -> Option<usize> {
        let finding = |f: Finding| match f {
            Finding::Yes => Some(0),
            Finding::No => Some(1),
            Finding::Unknown => None,
        };
        match self {
            CaseField::Outcome => Some(match r.outcome {
                Outcome::Won => 0,
                Outcome::Lost => 1,
            }),
            CaseField::DutyEstablished => finding(r.duty_established),
            CaseField::DutyBreached => finding(r.duty_breached),
            CaseField::SocBreached => finding(r.soc_breached),
            CaseField::Butfor => match r.butfor {
                ButFor::Succeeded => Some(0),
                ButFor::Failed => Some(1),
                ButFor::Unknown => None,
            },
            CaseField::Ameliorated => finding(r.ameliorated),
            CaseField::RiskExists => finding(r.risk_exists),
            CaseField::Knowledge => finding(r.knowledge),
        }
    }
}

/// How a model variable's value is read off a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extractor {
    Field(CaseField),
    /// Conjunction of other mapped variables: false if any is known false,
    /// true if all are true, otherwise missing.
    AllOf(Vec<String>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaMapping {
    entries: BTreeMap<String, Extractor>,
}

impl SchemaMapping {
    pub fn new() -> Self {
        SchemaMapping::default()
    }

    pub fn with(mut self, variable: impl Into<String>, extractor: Extractor) -> Self {
        self.entries.insert(variable.into(), extractor);
        self
    }

    pub fn get(&self, variable: &str) -> Option<&Extractor> {
        self.entries.get(variable)
    }

    pub fn observe(&self, variable: &str, record: &CaseRecord) -> Result<Option<usize>> {
        self.observe_at(variable, record, 0)
    }

    fn observe_at(
        &self,
        variable: &str,
        record: &CaseRecord,
        depth: usize,
    ) -> Result<Option<usize>> {
        let unmapped = || Error::UnmappedVariable(variable.to_string());
        // a conjunction that refers back to itself never terminates
        if depth > self.entries.len() {
            return Err(unmapped());
        }
        match self.entries.get(variable).ok_or_else(unmapped)? {
            Extractor::Field(f) => Ok(f.observe(record)),
            Extractor::AllOf(parts) => {
                let mut all_true = true;
                for p in parts {
                    match self.observe_at(p, record, depth + 1)? {
                        Some(1) => return Ok(Some(1)),
                        Some(_) => {}
                        None => all_true = false,
                    }
                }
                Ok(all_true.then_some(0))
            }
        }
    }
}

/// Counts per (parent combination, child state) cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCounts {
    pub child: String,
    pub parents: Vec<String>,
    pub counts: Vec<Vec<usize>>,
    pub skipped: usize,
}

impl FamilyCounts {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

/// Tallies the family over records where the child and every parent are
/// observed; any other record counts as skipped for this family only.
pub fn family_counts(
    ds: &Dataset,
    child: &str,
    parents: &[&str],
    mapping: &SchemaMapping,
) -> Result<FamilyCounts> {
    for v in std::iter::once(&child).chain(parents) {
        if mapping.get(v).is_none() {
            return Err(Error::UnmappedVariable(v.to_string()));
        }
    }
    let cards = vec![2; parents.len()];
    let mut counts = vec![vec![0usize; 2]; 1 << parents.len()];
    let mut skipped = 0;
    'records: for r in &ds.records {
        let Some(c) = mapping.observe(child, r)? else {
            skipped += 1;
            continue;
        };
        let mut pstates = Vec::with_capacity(parents.len());
        for p in parents {
            match mapping.observe(p, r)? {
                Some(s) => pstates.push(s),
                None => {
                    skipped += 1;
                    continue 'records;
                }
            }
        }
        counts[row_index(&pstates, &cards)][c] += 1;
    }
    Ok(FamilyCounts {
        child: child.to_string(),
        parents: parents.iter().map(|p| p.to_string()).collect(),
        counts,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    FamilyCompleteCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningConfig {
    pub alpha: f64,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
}

impl LearningConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        LearningConfig {
            alpha,
            ..Default::default()
        }
    }
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            alpha: 1.0,
            missing_policy: MissingPolicy::FamilyCompleteCase,
        }
    }
}

/// One CPT entry of a skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    /// Fixed by logic; must be exactly 0 or 1.
    Fixed(f64),
    Learn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptTemplate {
    pub child: String,
    pub parents: Vec<String>,
    pub cells: Vec<Vec<Cell>>,
}

impl CptTemplate {
    /// Every row learnable.
    pub fn learnable(child: &Variable, parents: &[&Variable]) -> Self {
        let rows: usize = parents.iter().map(|p| p.cardinality()).product();
        CptTemplate {
            child: child.id().to_string(),
            parents: parents.iter().map(|p| p.id().to_string()).collect(),
            cells: vec![vec![Cell::Learn; child.cardinality()]; rows],
        }
    }

    /// Every entry fixed to the values of `cpt`.
    pub fn fixed(cpt: &Cpt) -> Self {
        CptTemplate {
            child: cpt.child.clone(),
            parents: cpt.parents.clone(),
            cells: cpt
                .rows
                .iter()
                .map(|r| r.iter().map(|&p| Cell::Fixed(p)).collect())
                .collect(),
        }
    }

    pub fn with_fixed_row(mut self, row: usize, values: &[f64]) -> Self {
        self.cells[row] = values.iter().map(|&p| Cell::Fixed(p)).collect();
        self
    }

    pub fn has_learnable(&self) -> bool {
        self.cells
            .iter()
            .flatten()
            .any(|c| matches!(c, Cell::Learn))
    }
}

/// Network structure with learnable and fixed CPT cells, plus the mapping
/// from model variables to record columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub variables: Vec<Variable>,
    pub templates: Vec<CptTemplate>,
    pub mapping: SchemaMapping,
}

impl Skeleton {
    pub fn template(&self, child: &str) -> Option<&CptTemplate> {
        self.templates.iter().find(|t| t.child == child)
    }

    pub fn arc_count(&self) -> usize {
        self.templates.iter().map(|t| t.parents.len()).sum()
    }
}

/// Estimates every learnable cell from `ds` and builds the network.
pub fn learn_parameters(
    ds: &Dataset,
    skeleton: &Skeleton,
    cfg: &LearningConfig,
) -> Result<Network> {
    let alpha = cfg.alpha;
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let mut cpts = Vec::with_capacity(skeleton.templates.len());
    for t in &skeleton.templates {
        let counts = if t.has_learnable() {
            let parents: Vec<&str> = t.parents.iter().map(String::as_str).collect();
            Some(family_counts(ds, &t.child, &parents, &skeleton.mapping)?)
        } else {
            None
        };
        let mut rows = Vec::with_capacity(t.cells.len());
        let mut structural = Vec::with_capacity(t.cells.len());
        for (r, cells) in t.cells.iter().enumerate() {
            let fixed_mass: f64 = cells
                .iter()
                .map(|c| match c {
                    Cell::Fixed(p) => *p,
                    Cell::Learn => 0.0,
                })
                .sum();
            let learnable: Vec<usize> = (0..cells.len())
                .filter(|&k| matches!(cells[k], Cell::Learn))
                .collect();
            let row_counts = counts
                .as_ref()
                .and_then(|c| c.counts.get(r))
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            let count = |k: usize| row_counts.get(k).copied().unwrap_or(0) as f64;
            let observed: f64 = learnable.iter().map(|&k| count(k)).sum();
            let denom = observed + alpha * learnable.len() as f64;
            let free_mass = 1.0 - fixed_mass;

            let row = cells
                .iter()
                .enumerate()
                .map(|(k, c)| match c {
                    Cell::Fixed(p) => *p,
                    Cell::Learn if denom == 0.0 => free_mass / learnable.len() as f64,
                    Cell::Learn => free_mass * ((count(k) + alpha) / denom),
                })
                .collect();
            rows.push(row);
            structural.push(cells.iter().map(|c| matches!(c, Cell::Fixed(_))).collect());
        }
        cpts.push(Cpt::new(t.child.clone(), t.parents.clone(), rows).with_structural(structural));
    }
    build_network(skeleton.variables.clone(), cpts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_case_csv;

    const HEADER: &str = "case_id,outcome,duty_established,duty_breached,soc_breached,butfor,ameliorated,jurisdiction,authority_level,risk_exists,knowledge,notes\n";

    fn data(rows: &[&str]) -> Dataset {
        parse_case_csv(&format!("{HEADER}{}\n", rows.join("\n"))).unwrap()
    }

    fn mapping() -> SchemaMapping {
        SchemaMapping::new()
            .with("Outcome", Extractor::Field(CaseField::Outcome))
            .with("Duty", Extractor::Field(CaseField::DutyEstablished))
            .with("Breach", Extractor::Field(CaseField::DutyBreached))
            .with(
                "Both",
                Extractor::AllOf(vec!["Duty".into(), "Breach".into()]),
            )
    }

    #[test]
    fn complete_case_counts() {
        let ds = data(&[
            "a,won,yes,yes,no,succeeded,no,NSW,L,-,-,",
            "b,lost,yes,no,no,failed,no,NSW,L,-,-,",
            "c,lost,no,-,no,failed,no,NSW,L,-,-,",
        ]);
        let fc = family_counts(&ds, "Breach", &["Duty"], &mapping()).unwrap();
        assert_eq!(fc.counts, vec![vec![1, 1], vec![0, 0]]);
        assert_eq!(fc.skipped, 1);
        assert_eq!(fc.total() + fc.skipped, ds.len());

        // "c" has a known false duty, so the conjunction is false there
        let fc = family_counts(&ds, "Outcome", &["Both"], &mapping()).unwrap();
        assert_eq!(fc.counts, vec![vec![1, 0], vec![0, 2]]);
        assert_eq!(fc.skipped, 0);
    }

    #[test]
    fn unmapped_variable() {
        let err = family_counts(&Dataset::default(), "Nope", &[], &mapping()).unwrap_err();
        assert_eq!(err, Error::UnmappedVariable("Nope".into()));
    }

    #[test]
    fn self_referencing_conjunction_is_rejected() {
        let m = SchemaMapping::new().with("Loop", Extractor::AllOf(vec!["Loop".into()]));
        let ds = data(&["a,won,yes,yes,no,succeeded,no,NSW,L,-,-,"]);
        assert!(matches!(
            m.observe("Loop", &ds.records[0]),
            Err(Error::UnmappedVariable(_))
        ));
    }

    fn outcome_skeleton() -> Skeleton {
        let v = Variable::binary("Outcome").unwrap();
        Skeleton {
            templates: vec![CptTemplate::learnable(&v, &[])],
            variables: vec![v],
            mapping: mapping(),
        }
    }

    #[test]
    fn smoothing_formula() {
        let ds = data(&[
            "a,won,yes,yes,no,succeeded,no,NSW,L,-,-,",
            "b,lost,yes,no,no,failed,no,NSW,L,-,-,",
            "c,lost,no,-,no,failed,no,NSW,L,-,-,",
        ]);
        let net =
            learn_parameters(&ds, &outcome_skeleton(), &LearningConfig::with_alpha(2.0)).unwrap();
        // (1 + 2) / (3 + 2*2)
        assert_eq!(
            net.cpt("Outcome").unwrap().rows[0],
            vec![3.0 / 7.0, 4.0 / 7.0]
        );
    }

    #[test]
    fn empty_data_without_smoothing_is_uniform() {
        let net = learn_parameters(
            &Dataset::default(),
            &outcome_skeleton(),
            &LearningConfig::with_alpha(0.0),
        )
        .unwrap();
        assert_eq!(net.cpt("Outcome").unwrap().rows[0], vec![0.5, 0.5]);
    }

    #[test]
    fn invalid_alpha() {
        for a in [-1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                learn_parameters(
                    &Dataset::default(),
                    &outcome_skeleton(),
                    &LearningConfig::with_alpha(a)
                ),
                Err(Error::InvalidAlpha(_))
            ));
        }
    }
}
