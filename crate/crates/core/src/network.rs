//! Network representation: variables, conditional probability tables and
//! the validated, immutable [`Network`].
//!
//! Conventions that the model JSON and every golden value depend on:
//!
//! * binary variables list their states as `[true, false]`;
//! * CPT rows are indexed row-major over the declared parent order, so the
//!   last parent varies fastest;
//! * entries flagged structural are fixed by logic and are exactly 0 or 1.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

pub const TRUE: &str = "true";
pub const FALSE: &str = "false";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    id: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new(id: impl Into<String>, states: Vec<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidVariable {
                id,
                reason: "id must be nonempty and contain no whitespace".into(),
            });
        }
        if states.len() < 2 {
            return Err(Error::InvalidVariable {
                id,
                reason: "at least two states are required".into(),
            });
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if s.is_empty() {
                return Err(Error::InvalidVariable {
                    id,
                    reason: "state labels must be nonempty".into(),
                });
            }
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidVariable {
                    id,
                    reason: format!("duplicate state `{s}`"),
                });
            }
        }
        Ok(Variable { id, states })
    }

    /// Binary variable with the canonical `[true, false]` state order.
    pub fn binary(id: impl Into<String>) -> Result<Self> {
        Variable::new(id, vec![TRUE.to_string(), FALSE.to_string()])
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn is_canonical_binary(&self) -> bool {
        self.states.len() == 2 && self.states[0] == TRUE && self.states[1] == FALSE
    }
}

/// Conditional probability table of one child given its ordered parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub child: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(default)]
    pub structural: Vec<Vec<bool>>,
}

impl Cpt {
    /// A table whose entries are all learnable (no structural mask).
    pub fn new(child: impl Into<String>, parents: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        let structural = rows.iter().map(|r| vec![false; r.len()]).collect();
        Cpt {
            child: child.into(),
            parents,
            rows,
            structural,
        }
    }

    pub fn with_structural(mut self, structural: Vec<Vec<bool>>) -> Self {
        self.structural = structural;
        self
    }

    pub fn is_structural(&self, row: usize, col: usize) -> bool {
        self.structural
            .get(row)
            .and_then(|r| r.get(col))
            .copied()
            .unwrap_or(false)
    }
}

/// Row index of a parent-state combination (row-major, last parent fastest).
pub fn row_index(parent_states: &[usize], parent_cards: &[usize]) -> usize {
    parent_states
        .iter()
        .zip(parent_cards)
        .fold(0, |acc, (&s, &c)| acc * c + s)
}

/// Builds an AND gate over binary parents: the child is `true` iff every
/// parent is `true`. Every entry is structural.
pub fn make_and_gate_cpt(child: &Variable, parents: &[&Variable]) -> Result<Cpt> {
    if !child.is_canonical_binary() {
        return Err(Error::NonBinaryVariable(child.id().to_string()));
    }
    if let Some(p) = parents.iter().find(|p| !p.is_canonical_binary()) {
        return Err(Error::NonBinaryVariable(p.id().to_string()));
    }
    // state 0 is `true`, so only row 0 (all parents true) maps to true
    let n_rows = 1usize << parents.len();
    let rows = (0..n_rows)
        .map(|r| {
            if r == 0 {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            }
        })
        .collect();
    Ok(Cpt {
        child: child.id().to_string(),
        parents: parents.iter().map(|p| p.id().to_string()).collect(),
        rows,
        structural: vec![vec![true, true]; n_rows],
    })
}

/// Validated, immutable Bayesian network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

pub fn build_network(variables: Vec<Variable>, cpts: Vec<Cpt>) -> Result<Network> {
    let mut index = HashMap::with_capacity(variables.len());
    for (i, v) in variables.iter().enumerate() {
        // re-run the constructor checks; deserialized variables bypass them
        Variable::new(v.id.clone(), v.states.clone())?;
        if index.insert(v.id.clone(), i).is_some() {
            return Err(Error::DuplicateVariable(v.id.clone()));
        }
    }

    let mut slots: Vec<Option<Cpt>> = vec![None; variables.len()];
    for cpt in cpts {
        match index.get(&cpt.child) {
            Some(&i) if slots[i].is_none() => slots[i] = Some(cpt),
            _ => return Err(Error::UnexpectedCpt(cpt.child)),
        }
    }

    let mut ordered = Vec::with_capacity(variables.len());
    let mut parents = Vec::with_capacity(variables.len());
    for (v, slot) in variables.iter().zip(slots) {
        let mut cpt = slot.ok_or_else(|| Error::MissingCpt(v.id.clone()))?;
        let mut pidx = Vec::with_capacity(cpt.parents.len());
        for p in &cpt.parents {
            match index.get(p) {
                Some(&j) if !pidx.contains(&j) => pidx.push(j),
                Some(_) => {
                    return Err(Error::BadRow {
                        child: v.id.clone(),
                        row: 0,
                        reason: format!("parent `{p}` listed twice"),
                    })
                }
                None => {
                    return Err(Error::UnknownParent {
                        child: v.id.clone(),
                        parent: p.clone(),
                    })
                }
            }
        }
        let expected_rows: usize = pidx.iter().map(|&j| variables[j].cardinality()).product();
        if cpt.structural.is_empty() {
            cpt.structural = cpt.rows.iter().map(|r| vec![false; r.len()]).collect();
        }
        check_rows(v, &cpt, expected_rows)?;
        ordered.push(cpt);
        parents.push(pidx);
    }

    let topo = topological_order(&variables, &parents)?;
    Ok(Network {
        variables,
        cpts: ordered,
        index,
        parents,
        topo,
    })
}

fn check_rows(v: &Variable, cpt: &Cpt, expected_rows: usize) -> Result<()> {
    let bad = |row: usize, reason: String| Error::BadRow {
        child: v.id.clone(),
        row,
        reason,
    };
    if cpt.rows.len() != expected_rows {
        return Err(bad(
            0,
            format!("expected {expected_rows} rows, found {}", cpt.rows.len()),
        ));
    }
    if cpt.structural.len() != cpt.rows.len() {
        return Err(bad(0, "structural mask has wrong row count".into()));
    }
    for (r, (row, mask)) in cpt.rows.iter().zip(&cpt.structural).enumerate() {
        if row.len() != v.cardinality() {
            return Err(bad(
                r,
                format!("expected {} entries, found {}", v.cardinality(), row.len()),
            ));
        }
        if mask.len() != row.len() {
            return Err(bad(r, "structural mask has wrong width".into()));
        }
        for (&p, &fixed) in row.iter().zip(mask) {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(bad(r, format!("entry {p} outside [0, 1]")));
            }
            if fixed && p != 0.0 && p != 1.0 {
                return Err(bad(r, format!("structural entry {p} is not 0 or 1")));
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(bad(r, format!("row sums to {sum}")));
        }
    }
    Ok(())
}

/// Kahn's algorithm, always releasing the lowest declared index first.
fn topological_order(variables: &[Variable], parents: &[Vec<usize>]) -> Result<Vec<usize>> {
    let n = variables.len();
    let mut children = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (c, ps) in parents.iter().enumerate() {
        indegree[c] = ps.len();
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n)
            .filter(|&i| indegree[i] > 0)
            .map(|i| variables[i].id.as_str())
            .min()
            .unwrap_or_default();
        return Err(Error::CycleDetected(stuck.to_string()));
    }
    Ok(order)
}

impl Network {
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn variable(&self, id: &str) -> Option<&Variable> {
        self.index_of(id).map(|i| &self.variables[i])
    }

    pub fn cpt(&self, id: &str) -> Option<&Cpt> {
        self.index_of(id).map(|i| &self.cpts[i])
    }

    pub(crate) fn parent_indices(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn parents_of(&self, id: &str) -> Option<Vec<&str>> {
        self.index_of(id).map(|i| {
            self.parents[i]
                .iter()
                .map(|&p| self.variables[p].id())
                .collect()
        })
    }

    /// Variables in a topological order (parents before children).
    pub fn topological_order(&self) -> Vec<&str> {
        self.topo.iter().map(|&i| self.variables[i].id()).collect()
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// CPT entry for variable `i` in state `state` given a full assignment
    /// (state index per variable).
    pub(crate) fn entry(&self, i: usize, state: usize, assignment: &[usize]) -> f64 {
        let cards: Vec<usize> = self.parents[i]
            .iter()
            .map(|&p| self.variables[p].cardinality())
            .collect();
        let pstates: Vec<usize> = self.parents[i].iter().map(|&p| assignment[p]).collect();
        self.cpts[i].rows[row_index(&pstates, &cards)][state]
    }

    pub fn to_model(&self) -> ModelDoc {
        ModelDoc {
            variables: self.variables.clone(),
            cpts: self.cpts.clone(),
        }
    }

    /// Pretty-printed model JSON. Stable byte-for-byte for a given network.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_model()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let doc: ModelDoc =
            serde_json::from_str(text).map_err(|e| Error::ModelJson(e.to_string()))?;
        doc.build()
    }
}

/// The on-disk model format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub variables: Vec<Variable>,
    pub cpts: Vec<Cpt>,
}

impl ModelDoc {
    pub fn build(self) -> Result<Network> {
        build_network(self.variables, self.cpts)
    }
}

/// Partial hard assignment of variables to state labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Evidence(BTreeMap<String, String>);

impl Evidence {
    pub fn new() -> Self {
        Evidence::default()
    }

    pub fn with(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.set(variable, state);
        self
    }

    pub fn set(&mut self, variable: impl Into<String>, state: impl Into<String>) {
        self.0.insert(variable.into(), state.into());
    }

    pub fn remove(&mut self, variable: &str) -> Option<String> {
        self.0.remove(variable)
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Checks every variable and state against `net`, returning the observed
    /// state index per network variable.
    pub fn resolve(&self, net: &Network) -> Result<Vec<Option<usize>>> {
        let mut observed = vec![None; net.len()];
        for (var, state) in &self.0 {
            let i = net
                .index_of(var)
                .ok_or_else(|| Error::UnknownVariable(var.clone()))?;
            let s = net.variables[i]
                .state_index(state)
                .ok_or_else(|| Error::UnknownState {
                    variable: var.clone(),
                    state: state.clone(),
                })?;
            observed[i] = Some(s);
        }
        Ok(observed)
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Evidence {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Evidence(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }
}
