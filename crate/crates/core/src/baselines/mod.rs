//! Comparison clusterers: LEACH rotation and global-best PSO.

pub mod leach;
pub mod pso;

pub use leach::{leach_select, leach_threshold, LeachParams, LeachRotation};
pub use pso::{pso_clusterer, InertiaRule, PsoParams};
