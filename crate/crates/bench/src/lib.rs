//! Fixtures shared by the benchmarks.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use verdict_core::{build_network, Cpt, Evidence, Network, Variable};

/// Random DAG over `n` binary nodes with up to `max_parents` parents each.
pub fn random_network(seed: u64, n: usize, max_parents: usize) -> Network {
    let mut rng = StdRng::seed_from_u64(seed);
    let variables: Vec<Variable> = (0..n)
        .map(|i| Variable::binary(format!("V{i:02}")).expect("valid id"))
        .collect();
    let cpts = (0..n)
        .map(|i| {
            let k = rng.gen_range(0..=i.min(max_parents));
            let mut parents: Vec<usize> = (0..i).collect();
            for j in (1..parents.len()).rev() {
                parents.swap(j, rng.gen_range(0..=j));
            }
            parents.truncate(k);
            let rows = (0..1usize << k)
                .map(|_| {
                    let p: f64 = rng.gen_range(0.01..0.99);
                    vec![p, 1.0 - p]
                })
                .collect();
            Cpt::new(
                variables[i].id(),
                parents
                    .iter()
                    .map(|&p| variables[p].id().to_string())
                    .collect(),
                rows,
            )
        })
        .collect();
    build_network(variables, cpts).expect("valid random network")
}

/// Observes the last variable as `true`.
pub fn leaf_evidence(net: &Network) -> Evidence {
    let last = net.variables().last().expect("nonempty");
    Evidence::new().with(last.id(), "true")
}
