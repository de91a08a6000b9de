#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use verdict_core::{build_network, Cpt, Evidence, Network, Variable};

/// Random DAG over `n` binary nodes: each node draws up to three parents
/// among earlier nodes, and every CPT row is a random distribution.
pub fn random_network(rng: &mut StdRng, n: usize) -> Network {
    let variables: Vec<Variable> = (0..n)
        .map(|i| Variable::binary(format!("V{i:02}")).unwrap())
        .collect();
    let mut cpts = Vec::with_capacity(n);
    for i in 0..n {
        let k = rng.gen_range(0..=i.min(3));
        let mut parents: Vec<usize> = Vec::new();
        while parents.len() < k {
            let p = rng.gen_range(0..i);
            if !parents.contains(&p) {
                parents.push(p);
            }
        }
        let rows = (0..1usize << k)
            .map(|_| {
                // occasional hard zeros exercise the structural paths
                let p: f64 = match rng.gen_range(0..10) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.gen_range(0.01..0.99),
                };
                vec![p, 1.0 - p]
            })
            .collect();
        cpts.push(Cpt::new(
            variables[i].id(),
            parents
                .iter()
                .map(|&p| variables[p].id().to_string())
                .collect(),
            rows,
        ));
    }
    // shuffle declaration order so topological handling is exercised
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let vars = order.iter().map(|&i| variables[i].clone()).collect();
    build_network(vars, cpts).unwrap()
}

pub fn random_evidence(rng: &mut StdRng, net: &Network) -> Evidence {
    let mut ev = Evidence::new();
    for v in net.variables() {
        if rng.gen_bool(0.3) {
            let s = rng.gen_range(0..v.cardinality());
            ev.set(v.id(), v.states()[s].clone());
        }
    }
    ev
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
