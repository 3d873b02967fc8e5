//! Seeded model generators shared by the integration tests.

#![allow(dead_code)]

use gapp_core::energy::{EnergyModel, PairTable, SoftAssignmentSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Binary model on `n` variables, every pair coupled with probability
/// `density`, all energies uniform in `[0, 1)`.
pub fn random_binary_model(seed: u64, n: usize, density: f64, hbar: f64) -> EnergyModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unary = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let mut model = EnergyModel::new(unary, hbar);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                let table = PairTable::from_fn(2, 2, |_, _| rng.random::<f64>());
                model.set_pair(i, j, table).unwrap();
            }
        }
    }
    model
}

/// Random strictly positive beliefs over each domain.
pub fn random_beliefs(seed: u64, domains: &[usize]) -> SoftAssignmentSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables = domains
        .iter()
        .map(|&d| (0..d).map(|_| rng.random::<f64>() + 1e-3).collect())
        .collect();
    SoftAssignmentSet::from_tables(tables).unwrap()
}
