//! Exact inference under hard evidence.
//!
//! [`infer`] runs variable elimination; [`enumerate_posterior`] sums the full
//! joint and is kept as the brute-force reference that `infer` must agree
//! with. Both are deterministic: factor scopes, factor lists and the
//! elimination order are all built in a fixed order, so repeated calls give
//! bitwise-identical results.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Evidence, Network};

/// Marginal distribution of one variable, in the variable's state order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub variable: String,
    pub states: Vec<String>,
    pub distribution: Vec<f64>,
}

impl Posterior {
    pub fn probability(&self, state: &str) -> Option<f64> {
        self.states
            .iter()
            .position(|s| s == state)
            .map(|i| self.distribution[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub posteriors: Vec<Posterior>,
    pub evidence_probability: f64,
}

impl Inference {
    pub fn posterior(&self, variable: &str) -> Option<&Posterior> {
        self.posteriors.iter().find(|p| p.variable == variable)
    }
}

/// Product of the CPT entries selected by a full assignment.
pub fn joint_probability(net: &Network, full_assignment: &Evidence) -> Result<f64> {
    let observed = full_assignment.resolve(net)?;
    let mut assignment = Vec::with_capacity(net.len());
    for (i, s) in observed.iter().enumerate() {
        match s {
            Some(s) => assignment.push(*s),
            None => {
                return Err(Error::IncompleteAssignment(
                    net.variables()[i].id().to_string(),
                ))
            }
        }
    }
    Ok(joint_of(net, &assignment))
}

fn joint_of(net: &Network, assignment: &[usize]) -> f64 {
    (0..net.len())
        .map(|i| net.entry(i, assignment[i], assignment))
        .product()
}

fn query_indices(net: &Network, query_vars: &[&str]) -> Result<Vec<usize>> {
    query_vars
        .iter()
        .map(|q| {
            net.index_of(q)
                .ok_or_else(|| Error::UnknownVariable((*q).to_string()))
        })
        .collect()
}

fn posterior_from_mass(net: &Network, i: usize, mass: &[f64]) -> Posterior {
    let total: f64 = mass.iter().sum();
    let v = &net.variables()[i];
    Posterior {
        variable: v.id().to_string(),
        states: v.states().to_vec(),
        distribution: mass.iter().map(|m| m / total).collect(),
    }
}

fn point_mass(net: &Network, i: usize, state: usize) -> Posterior {
    let v = &net.variables()[i];
    let mut distribution = vec![0.0; v.cardinality()];
    distribution[state] = 1.0;
    Posterior {
        variable: v.id().to_string(),
        states: v.states().to_vec(),
        distribution,
    }
}

/// Brute-force posterior: sums the joint over every full assignment that
/// agrees with the evidence.
pub fn enumerate_posterior(
    net: &Network,
    evidence: &Evidence,
    query_vars: &[&str],
) -> Result<Inference> {
    let observed = evidence.resolve(net)?;
    let queries = query_indices(net, query_vars)?;
    let cards: Vec<usize> = net.variables().iter().map(|v| v.cardinality()).collect();

    let free: Vec<usize> = (0..net.len()).filter(|&i| observed[i].is_none()).collect();
    let combos: usize = free.iter().map(|&i| cards[i]).product();

    let mut mass: Vec<Vec<f64>> = queries.iter().map(|&q| vec![0.0; cards[q]]).collect();
    let mut total = 0.0;
    let mut assignment: Vec<usize> = observed.iter().map(|s| s.unwrap_or(0)).collect();
    for flat in 0..combos {
        let mut rest = flat;
        for &i in free.iter().rev() {
            assignment[i] = rest % cards[i];
            rest /= cards[i];
        }
        let p = joint_of(net, &assignment);
        total += p;
        for (m, &q) in mass.iter_mut().zip(&queries) {
            m[assignment[q]] += p;
        }
    }

    if total == 0.0 {
        return Err(Error::ZeroEvidenceProbability);
    }
    let posteriors = queries
        .iter()
        .zip(&mass)
        .map(|(&q, m)| posterior_from_mass(net, q, m))
        .collect();
    Ok(Inference {
        posteriors,
        evidence_probability: total,
    })
}

/// Table over a sorted set of variables, row-major with the last variable
/// varying fastest.
#[derive(Debug, Clone)]
struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    /// The CPT of variable `i` with every observed variable fixed.
    fn from_cpt(net: &Network, i: usize, observed: &[Option<usize>]) -> Self {
        let family: BTreeSet<usize> = net
            .parent_indices(i)
            .iter()
            .copied()
            .chain(std::iter::once(i))
            .collect();
        let scope: Vec<usize> = family
            .iter()
            .copied()
            .filter(|&v| observed[v].is_none())
            .collect();
        let cards: Vec<usize> = scope
            .iter()
            .map(|&v| net.variables()[v].cardinality())
            .collect();
        let size: usize = cards.iter().product();

        let mut full: Vec<usize> = observed.iter().map(|s| s.unwrap_or(0)).collect();
        let mut values = Vec::with_capacity(size);
        for flat in 0..size {
            let mut rest = flat;
            for k in (0..scope.len()).rev() {
                full[scope[k]] = rest % cards[k];
                rest /= cards[k];
            }
            values.push(net.entry(i, full[i], &full));
        }
        Factor {
            scope,
            cards,
            values,
        }
    }

    fn product(&self, other: &Factor) -> Factor {
        let scope: Vec<usize> = self
            .scope
            .iter()
            .chain(&other.scope)
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let cards: Vec<usize> = scope
            .iter()
            .map(|v| {
                self.card_of(*v)
                    .or_else(|| other.card_of(*v))
                    .expect("variable in one of the scopes")
            })
            .collect();
        let size: usize = cards.iter().product();
        let mut states = vec![0usize; scope.len()];
        let mut values = Vec::with_capacity(size);
        for _ in 0..size {
            let a = self.value_at(&scope, &states);
            let b = other.value_at(&scope, &states);
            values.push(a * b);
            increment(&mut states, &cards);
        }
        Factor {
            scope,
            cards,
            values,
        }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let k = self
            .scope
            .iter()
            .position(|&v| v == var)
            .expect("variable in scope");
        let scope: Vec<usize> = self.scope.iter().copied().filter(|&v| v != var).collect();
        let cards: Vec<usize> = self
            .cards
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &c)| c)
            .collect();
        let inner: usize = self.cards[k + 1..].iter().product();
        let card = self.cards[k];
        let outer = self.values.len() / (inner * card);
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            for n in 0..inner {
                let mut acc = 0.0;
                for s in 0..card {
                    acc += self.values[(o * card + s) * inner + n];
                }
                values.push(acc);
            }
        }
        Factor {
            scope,
            cards,
            values,
        }
    }

    fn card_of(&self, var: usize) -> Option<usize> {
        self.scope
            .iter()
            .position(|&v| v == var)
            .map(|k| self.cards[k])
    }

    /// Value at the assignment `states` over `scope` (a superset of ours).
    fn value_at(&self, scope: &[usize], states: &[usize]) -> f64 {
        let mut idx = 0;
        let mut j = 0;
        for (k, &v) in self.scope.iter().enumerate() {
            while scope[j] != v {
                j += 1;
            }
            idx = idx * self.cards[k] + states[j];
        }
        self.values[idx]
    }
}

fn increment(states: &mut [usize], cards: &[usize]) {
    for k in (0..states.len()).rev() {
        states[k] += 1;
        if states[k] < cards[k] {
            return;
        }
        states[k] = 0;
    }
}

/// Order in which the non-query, non-evidence variables are summed out:
/// greedy min-degree on the moral graph (evidence removed), ties broken by
/// the lexicographically smallest id.
pub fn elimination_order(
    net: &Network,
    evidence: &Evidence,
    query_vars: &[&str],
) -> Result<Vec<String>> {
    let observed = evidence.resolve(net)?;
    let queries = query_indices(net, query_vars)?;
    Ok(order_indices(net, &observed, &queries)
        .into_iter()
        .map(|i| net.variables()[i].id().to_string())
        .collect())
}

fn order_indices(net: &Network, observed: &[Option<usize>], queries: &[usize]) -> Vec<usize> {
    let n = net.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let link = |a: usize, b: usize, adj: &mut Vec<BTreeSet<usize>>| {
        if a != b && observed[a].is_none() && observed[b].is_none() {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    };
    for c in 0..n {
        let ps = net.parent_indices(c);
        for (k, &p) in ps.iter().enumerate() {
            link(c, p, &mut adj);
            for &q in &ps[k + 1..] {
                link(p, q, &mut adj);
            }
        }
    }

    let mut hidden: BTreeSet<usize> = (0..n)
        .filter(|&i| observed[i].is_none() && !queries.contains(&i))
        .collect();
    let mut order = Vec::with_capacity(hidden.len());
    while let Some(&next) = hidden.iter().min_by(|&&a, &&b| {
        adj[a]
            .len()
            .cmp(&adj[b].len())
            .then_with(|| net.variables()[a].id().cmp(net.variables()[b].id()))
    }) {
        let neighbours: Vec<usize> = adj[next].iter().copied().collect();
        for (k, &a) in neighbours.iter().enumerate() {
            adj[a].remove(&next);
            for &b in &neighbours[k + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        adj[next].clear();
        hidden.remove(&next);
        order.push(next);
    }
    order
}

/// Runs variable elimination keeping only `queries`, and returns the final
/// (unnormalized) factor over them.
fn eliminate(net: &Network, observed: &[Option<usize>], queries: &[usize]) -> Factor {
    let mut factors: Vec<Factor> = (0..net.len())
        .map(|i| Factor::from_cpt(net, i, observed))
        .collect();
    for var in order_indices(net, observed, queries) {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.scope.contains(&var));
        factors = rest;
        let merged = touching
            .iter()
            .skip(1)
            .fold(touching[0].clone(), |acc, f| acc.product(f));
        factors.push(merged.sum_out(var));
    }
    factors
        .iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(f))
}

/// Marginal probability of the evidence. Zero is a legal answer.
pub fn probability_of_evidence(net: &Network, evidence: &Evidence) -> Result<f64> {
    let observed = evidence.resolve(net)?;
    Ok(eliminate(net, &observed, &[]).values[0])
}

/// Posterior marginals of `query_vars` by variable elimination.
pub fn infer(net: &Network, evidence: &Evidence, query_vars: &[&str]) -> Result<Inference> {
    let observed = evidence.resolve(net)?;
    let queries = query_indices(net, query_vars)?;
    let evidence_probability = eliminate(net, &observed, &[]).values[0];
    if evidence_probability == 0.0 {
        return Err(Error::ZeroEvidenceProbability);
    }
    let mut posteriors = Vec::with_capacity(queries.len());
    for &q in &queries {
        if let Some(s) = observed[q] {
            posteriors.push(point_mass(net, q, s));
            continue;
        }
        let joint = eliminate(net, &observed, &[q]);
        if joint.values.iter().sum::<f64>() == 0.0 {
            return Err(Error::ZeroEvidenceProbability);
        }
        posteriors.push(posterior_from_mass(net, q, &joint.values));
    }
    Ok(Inference {
        posteriors,
        evidence_probability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, make_and_gate_cpt, Cpt, Variable};

    fn bin(id: &str) -> Variable {
        Variable::binary(id).unwrap()
    }

    fn root(id: &str, p: f64) -> Cpt {
        Cpt::new(id, vec![], vec![vec![p, 1.0 - p]])
    }

    fn one_node(p: f64) -> Network {
        build_network(vec![bin("A")], vec![root("A", p)]).unwrap()
    }

    fn and_net() -> Network {
        let (a, b, c) = (bin("A"), bin("B"), bin("C"));
        let gate = make_and_gate_cpt(&c, &[&a, &b]).unwrap();
        build_network(vec![a, b, c], vec![root("A", 0.5), root("B", 0.5), gate]).unwrap()
    }

    fn chain() -> Network {
        build_network(
            vec![bin("A"), bin("B"), bin("C")],
            vec![
                root("A", 0.3),
                Cpt::new("B", vec!["A".into()], vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
                Cpt::new(
                    "C",
                    vec!["B".into()],
                    vec![vec![0.6, 0.4], vec![0.05, 0.95]],
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn joint_examples() {
        let net = one_node(0.5);
        assert_eq!(
            joint_probability(&net, &Evidence::new().with("A", "true")).unwrap(),
            0.5
        );

        let gate = and_net();
        let full = Evidence::new()
            .with("A", "true")
            .with("B", "true")
            .with("C", "false");
        assert_eq!(joint_probability(&gate, &full).unwrap(), 0.0);

        let partial = Evidence::new().with("A", "true");
        assert_eq!(
            joint_probability(&gate, &partial).unwrap_err(),
            Error::IncompleteAssignment("B".into())
        );
    }

    #[test]
    fn enumeration_prior_and_point_mass() {
        let net = one_node(0.7);
        let r = enumerate_posterior(&net, &Evidence::new(), &["A"]).unwrap();
        assert_eq!(r.posteriors[0].distribution, vec![0.7, 1.0 - 0.7]);
        assert_eq!(r.evidence_probability, 1.0);

        let r = enumerate_posterior(&net, &Evidence::new().with("A", "true"), &["A"]).unwrap();
        assert_eq!(r.posteriors[0].distribution, vec![1.0, 0.0]);
        let r = infer(&net, &Evidence::new().with("A", "true"), &["A"]).unwrap();
        assert_eq!(r.posteriors[0].distribution, vec![1.0, 0.0]);
    }

    #[test]
    fn zero_evidence_is_reported() {
        let net = and_net();
        let ev = Evidence::new().with("C", "true").with("A", "false");
        assert_eq!(probability_of_evidence(&net, &ev).unwrap(), 0.0);
        assert_eq!(
            infer(&net, &ev, &["B"]).unwrap_err(),
            Error::ZeroEvidenceProbability
        );
        assert_eq!(
            enumerate_posterior(&net, &ev, &["B"]).unwrap_err(),
            Error::ZeroEvidenceProbability
        );
    }

    #[test]
    fn empty_evidence_has_probability_one() {
        assert!((probability_of_evidence(&chain(), &Evidence::new()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_order_and_markov_property() {
        let net = chain();
        assert_eq!(
            elimination_order(&net, &Evidence::new(), &["C"]).unwrap(),
            vec!["A", "B"]
        );
        assert!(
            elimination_order(&net, &Evidence::new().with("B", "true"), &["A", "C"])
                .unwrap()
                .is_empty()
        );

        for (state, row) in [("true", 0.6), ("false", 0.05)] {
            let r = infer(&net, &Evidence::new().with("B", state), &["C"]).unwrap();
            // truncated network: B as a root, C | B unchanged
            let truncated = build_network(
                vec![bin("B"), bin("C")],
                vec![
                    root("B", 0.5),
                    Cpt::new(
                        "C",
                        vec!["B".into()],
                        vec![vec![0.6, 0.4], vec![0.05, 0.95]],
                    ),
                ],
            )
            .unwrap();
            let t = infer(&truncated, &Evidence::new().with("B", state), &["C"]).unwrap();
            assert!((r.posteriors[0].distribution[0] - row).abs() < 1e-12);
            assert!((t.posteriors[0].distribution[0] - row).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_matches_hand_computation() {
        // P(C=t) = sum_b P(C=t|b) P(b); P(B=t) = 0.3*0.9 + 0.7*0.2 = 0.41
        let expected = 0.41 * 0.6 + 0.59 * 0.05;
        let r = infer(&chain(), &Evidence::new(), &["C"]).unwrap();
        assert!((r.posteriors[0].distribution[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn unknown_query_is_an_error() {
        assert_eq!(
            infer(&chain(), &Evidence::new(), &["Z"]).unwrap_err(),
            Error::UnknownVariable("Z".into())
        );
    }

    #[test]
    fn and_gates_compose() {
        // AND(A,B,C) against AND(AND(A,B),C) on three binary roots
        let (a, b, c, d) = (bin("A"), bin("B"), bin("C"), bin("D"));
        let flat = build_network(
            vec![a.clone(), b.clone(), c.clone(), d.clone()],
            vec![
                root("A", 0.3),
                root("B", 0.6),
                root("C", 0.8),
                make_and_gate_cpt(&d, &[&a, &b, &c]).unwrap(),
            ],
        )
        .unwrap();
        let ab = bin("AB");
        let nested = build_network(
            vec![a.clone(), b.clone(), c.clone(), ab.clone(), d.clone()],
            vec![
                root("A", 0.3),
                root("B", 0.6),
                root("C", 0.8),
                make_and_gate_cpt(&ab, &[&a, &b]).unwrap(),
                make_and_gate_cpt(&d, &[&ab, &c]).unwrap(),
            ],
        )
        .unwrap();
        let x = enumerate_posterior(&flat, &Evidence::new(), &["D"]).unwrap();
        let y = enumerate_posterior(&nested, &Evidence::new(), &["D"]).unwrap();
        assert!((x.posteriors[0].distribution[0] - 0.3 * 0.6 * 0.8).abs() < 1e-12);
        assert!((x.posteriors[0].distribution[0] - y.posteriors[0].distribution[0]).abs() < 1e-12);
    }
}
