//! Combinatorial workbench for higher-rank graphs: presentations with
//! factorization squares, circle-valued 2-cocycles and homotopies between
//! them, skew products, twisted convolution on finite groupoid slices, and
//! AF approximation data (Bratteli diagrams, K_0, phase intertwiners).

pub mod abelian;
pub mod af;
pub mod cocycle;
pub mod convolution;
pub mod degree;
pub mod finite_groupoid;
pub mod fixtures;
pub mod graph;
pub mod path_groupoid;
pub mod paths;
pub mod phase;
pub mod scalar;
pub mod skew;

pub use degree::{DegreeVec, IntVec, LatticeBox};
pub use graph::{
    omega_k, validate_presentation, EdgeDecl, GraphError, KGraph, Morphism, PresentationReport,
    Skeleton,
};
pub use phase::{CircleValue, Rat, RealValue};
