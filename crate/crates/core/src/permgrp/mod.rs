//! Finite permutation groups and their normal structure.

mod blocks;
mod group;
mod labels;
mod normal;
mod perm;

pub(crate) use blocks::UnionFind;
pub use blocks::{block_systems, is_primitive, is_quasi_primitive, BlockSystem};
pub use group::{default_cap, Closure, FiniteGroup, SubgroupHandle, CLOSURE_CAP};
pub use labels::{label_simple, SimpleLabel};
pub use normal::{
    char_simple_decompose, composition_factors, conjugacy_classes, derived_series,
    derived_subgroup, fitting_check, is_pi_number, is_simple, is_soluble, maximal_normal_subgroups,
    melnikov, minimal_normal_subgroups, normal_closure, normal_subgroups, normalises, pi_core,
    pi_residual, prime_factors, prosoluble_core, prosoluble_residual, Primes,
};
pub use perm::Perm;
