//! Vehicle routing toolkit core.
//!
//! The numeric core is generic over a floating-point [`Scalar`]; the
//! aliases at the bottom of this file pin the common `f64` and `f32`
//! instantiations.

pub mod constraints;
pub mod scalar;
pub mod solution;
pub mod solver;
pub mod synth;
pub mod vrplib;

pub use constraints::{
    check_route, check_solution, classify, classify_with, BackhaulMode, ClassifyOptions,
    ConstraintKind, ConstraintSet, EnergyParams, FeasibilityReport, HintSource, RouteError,
    RouteTrace, VariantFlags, VariantSignature, Violation,
};
pub use scalar::Scalar;
pub use solver::{
    accept, cost, destroy, initial_solution, insert, solve, solve_with_matrix, temperature,
    RemovalSet, Route, SearchStats, Solution, SolverConfig, SolverError,
};
pub use vrplib::{
    build_distance_matrix, parse_instance, write_instance, write_instance_with, DistanceMatrix,
    Instance, ParseError, RawInstance, Rounding, Terminator,
};

pub type Instance64 = Instance<f64>;
pub type Instance32 = Instance<f32>;
pub type DistanceMatrix64 = DistanceMatrix<f64>;
pub type DistanceMatrix32 = DistanceMatrix<f32>;
pub type ConstraintSet64 = ConstraintSet<f64>;
pub type ConstraintSet32 = ConstraintSet<f32>;
pub type Solution64 = Solution<f64>;
pub type Solution32 = Solution<f32>;
