//! Irrigation networks with a growth law along the branches: weights solved
//! by backward induction from the tips, the weighted transport cost, finite
//! Lagrangian plans, dyadic approximation of target measures and a priori
//! bounds on weights and costs.

pub mod analysis;
pub mod dyadic;
pub mod error;
pub mod flux;
pub mod io;
pub mod lagrangian;
pub mod measure;
pub mod network;
pub mod solver;

pub use dyadic::{DyadicGrid, DyadicPlan, HybridPlan};
pub use error::{Error, Result};
pub use flux::{FluxFunction, FluxKind};
pub use lagrangian::{ParticleGroup, ParticlePlan, Polyline};
pub use measure::{Atom, AtomicMeasure, LebesgueSpec, Measure};
pub use network::{
    topo_layers, validate_network, Branch, BranchId, BranchSpec, MultiplicityProfile, Network,
    Piece, Rule, Violation,
};
pub use solver::{compute_weights, network_cost, solve_branch, WeightMap, WeightProfile};
