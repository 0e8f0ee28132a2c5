//! Trees, automorphisms, universal groups and their finite quotients.

mod ball;
mod element;
mod graph;
mod universal;

pub use ball::BallIsometry;
pub use element::{local_degree, Automorphism, HyperbolicSpec, Portrait};
pub use graph::{
    cayley_abels_ball, find_transitive_generators, schreier_graph, Graph, TransitiveGenerators,
};
pub use universal::{
    local_prime_content, sphere_orbit_bound, EtaReport, Exponents, PrimeTrend, SphereOrbitReport,
    Trend, UniversalGroup, WreathLevel,
};
