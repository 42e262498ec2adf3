//! Shared inputs for the criterion benches.

use locktree_core::construct::{build_chain_of_trees, build_locked_config};
use locktree_core::model::Configuration;
use locktree_core::petal::PetalParams;

pub fn published_params() -> PetalParams {
    PetalParams::new(5, 0.9511, 0.299).expect("published lengths are valid")
}

pub fn locked() -> Configuration {
    build_locked_config(&published_params()).expect("published lengths lock")
}

/// Label 0 of the `k`-tree chain: every tree locked.
pub fn chain(k: usize) -> Configuration {
    build_chain_of_trees(k, None)
        .and_then(|f| f.configuration(0))
        .expect("chain builds")
}
