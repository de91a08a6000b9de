//! Case-audit records: CSV ingestion, serialization and the audit-style
//! totals summary.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column names, in the order they are written.
pub const COLUMNS: [&str; 12] = [
    "case_id",
    "outcome",
    "duty_established",
    "duty_breached",
    "soc_breached",
    "butfor",
    "ameliorated",
    "jurisdiction",
    "authority_level",
    "risk_exists",
    "knowledge",
    "notes",
];

const UNKNOWN_TOKENS: [&str; 5] = ["-", "", "na", "not cons", "not considered"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Won,
    Lost,
}

/// A yes/no finding that may be absent from the judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Finding {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ButFor {
    Succeeded,
    Failed,
    Unknown,
}

/// Level of government: local, state or federal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AuthorityLevel {
    L,
    S,
    F,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: String,
    pub outcome: Outcome,
    pub duty_established: Finding,
    pub duty_breached: Finding,
    pub soc_breached: Finding,
    pub butfor: ButFor,
    pub ameliorated: Finding,
    pub jurisdiction: String,
    pub authority_level: AuthorityLevel,
    pub risk_exists: Finding,
    pub knowledge: Finding,
    pub notes: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<CaseRecord>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn is_unknown(token: &str) -> bool {
    UNKNOWN_TOKENS.contains(&token.to_ascii_lowercase().as_str())
}

impl Outcome {
    fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_lowercase().as_str() {
            "won" => Some(Outcome::Won),
            "lost" => Some(Outcome::Lost),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Won => "won",
            Outcome::Lost => "lost",
        }
    }
}

impl Finding {
    fn parse(token: &str) -> Option<Self> {
        if is_unknown(token) {
            return Some(Finding::Unknown);
        }
        match token.to_ascii_lowercase().as_str() {
            "yes" => Some(Finding::Yes),
            "no" => Some(Finding::No),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Finding::Yes => "yes",
            Finding::No => "no",
            Finding::Unknown => "-",
        }
    }
}

impl ButFor {
    fn parse(token: &str) -> Option<Self> {
        if is_unknown(token) {
            return Some(ButFor::Unknown);
        }
        match token.to_ascii_lowercase().as_str() {
            "succeeded" => Some(ButFor::Succeeded),
            "failed" => Some(ButFor::Failed),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ButFor::Succeeded => "succeeded",
            ButFor::Failed => "failed",
            ButFor::Unknown => "-",
        }
    }
}

impl AuthorityLevel {
    fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_uppercase().as_str() {
            "L" => Some(AuthorityLevel::L),
            "S" => Some(AuthorityLevel::S),
            "F" => Some(AuthorityLevel::F),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AuthorityLevel::L => "L",
            AuthorityLevel::S => "S",
            AuthorityLevel::F => "F",
        }
    }
}

/// Parses the case-audit CSV. Columns are located by header name; extra
/// columns are ignored. Rows are numbered from 1 (the first data row) in
/// error reports.
pub fn parse_case_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let mut positions = [0usize; COLUMNS.len()];
    for (slot, name) in positions.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::BadHeader(name.to_string()))?;
    }

    let mut records = Vec::new();
    for (n, row) in reader.records().enumerate() {
        let row = row?;
        let row_no = n + 1;
        let cell = |k: usize| row.get(positions[k]).unwrap_or("").trim();
        let bad = |k: usize| Error::BadToken {
            row: row_no,
            column: COLUMNS[k].to_string(),
            value: cell(k).to_string(),
        };
        let finding = |k: usize| Finding::parse(cell(k)).ok_or_else(|| bad(k));

        let case_id = cell(0).to_string();
        if case_id.is_empty() {
            return Err(bad(0));
        }
        let jurisdiction = cell(7).to_ascii_uppercase();
        if jurisdiction.is_empty() || jurisdiction.chars().any(char::is_whitespace) {
            return Err(bad(7));
        }
        records.push(CaseRecord {
            case_id,
            outcome: Outcome::parse(cell(1)).ok_or_else(|| bad(1))?,
            duty_established: finding(2)?,
            duty_breached: finding(3)?,
            soc_breached: finding(4)?,
            butfor: ButFor::parse(cell(5)).ok_or_else(|| bad(5))?,
            ameliorated: finding(6)?,
            jurisdiction,
            authority_level: AuthorityLevel::parse(cell(8)).ok_or_else(|| bad(8))?,
            risk_exists: finding(9)?,
            knowledge: finding(10)?,
            notes: cell(11).to_string(),
        });
    }
    Ok(Dataset { records })
}

/// Writes records in the canonical column order, unknowns as `-`.
pub fn write_case_csv(ds: &Dataset) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(COLUMNS)?;
    for r in &ds.records {
        writer.write_record([
            r.case_id.as_str(),
            r.outcome.as_str(),
            r.duty_established.as_str(),
            r.duty_breached.as_str(),
            r.soc_breached.as_str(),
            r.butfor.as_str(),
            r.ameliorated.as_str(),
            r.jurisdiction.as_str(),
            r.authority_level.as_str(),
            r.risk_exists.as_str(),
            r.knowledge.as_str(),
            r.notes.as_str(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeTally {
    pub won: usize,
    pub lost: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YesNoTally {
    pub yes: usize,
    pub no: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ButForTally {
    pub succeeded: usize,
    pub failed: usize,
    pub not_considered: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct AuthorityTally {
    pub L: usize,
    pub S: usize,
    pub F: usize,
}

/// Column tallies in the layout of the audit's totals row.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalsSummary {
    pub records: usize,
    pub outcome: OutcomeTally,
    pub duty_established: YesNoTally,
    pub duty_breached: YesNoTally,
    pub soc_breached: YesNoTally,
    pub butfor: ButForTally,
    pub ameliorated: YesNoTally,
    pub jurisdiction: BTreeMap<String, usize>,
    pub authority_level: AuthorityTally,
}

/// Tallies with the audit's own conventions: an unknown yes/no finding is
/// counted as "no", an unknown but-for result as "not considered".
pub fn summarize(ds: &Dataset) -> TotalsSummary {
    let mut t = TotalsSummary {
        records: ds.len(),
        ..Default::default()
    };
    let yes_no = |tally: &mut YesNoTally, f: Finding| match f {
        Finding::Yes => tally.yes += 1,
        Finding::No | Finding::Unknown => tally.no += 1,
    };
    for r in &ds.records {
        match r.outcome {
            Outcome::Won => t.outcome.won += 1,
            Outcome::Lost => t.outcome.lost += 1,
        }
        yes_no(&mut t.duty_established, r.duty_established);
        yes_no(&mut t.duty_breached, r.duty_breached);
        yes_no(&mut t.soc_breached, r.soc_breached);
        yes_no(&mut t.ameliorated, r.ameliorated);
        match r.butfor {
            ButFor::Succeeded => t.butfor.succeeded += 1,
            ButFor::Failed => t.butfor.failed += 1,
            ButFor::Unknown => t.butfor.not_considered += 1,
        }
        *t.jurisdiction.entry(r.jurisdiction.clone()).or_default() += 1;
        match r.authority_level {
            AuthorityLevel::L => t.authority_level.L += 1,
            AuthorityLevel::S => t.authority_level.S += 1,
            AuthorityLevel::F => t.authority_level.F += 1,
        }
    }
    t
}

impl fmt::Display for TotalsSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records: {}", self.records)?;
        writeln!(
            f,
            "outcome: won={} lost={}",
            self.outcome.won, self.outcome.lost
        )?;
        for (name, t) in [
            ("duty_established", self.duty_established),
            ("duty_breached", self.duty_breached),
            ("soc_breached", self.soc_breached),
        ] {
            writeln!(f, "{name}: yes={} no={}", t.yes, t.no)?;
        }
        writeln!(
            f,
            "butfor: succeeded={} failed={} not_considered={}",
            self.butfor.succeeded, self.butfor.failed, self.butfor.not_considered
        )?;
        writeln!(
            f,
            "ameliorated: yes={} no={}",
            self.ameliorated.yes, self.ameliorated.no
        )?;
        let juris: Vec<String> = self
            .jurisdiction
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(f, "jurisdiction: {}", juris.join(" "))?;
        writeln!(
            f,
            "authority_level: L={} S={} F={}",
            self.authority_level.L, self.authority_level.S, self.authority_level.F
        )
    }
}
