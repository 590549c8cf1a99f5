//! Numerical laboratory for two-good monopoly pricing.
//!
//! The crate answers one family of questions exactly on finite instances and
//! by validated numerics on parametric ones: how much of the optimal revenue
//! for a buyer with additive values over two goods is captured by simply
//! posting a separate price for each good?

pub mod acceptance;
pub mod bounds;
pub mod continuity;
pub mod distributions;
pub mod flow;
pub mod mechanisms;
pub mod optrev;
pub mod simplex;
pub mod quad;

pub use acceptance::{run_all, CriterionResult};
pub use bounds::{
    BoundCertificate, BoundError, BoundKind, DecompositionCheck, GeneralBound, GoodPair,
    NonsymmetricBounds, SingleCrossing, SupI,
};
pub use continuity::{
    ContinuityError, ContinuityExperiment, ConvergenceTrace, DiscreteMeasureKD, ProhorovResult,
    TraceMode,
};
pub use distributions::{Dist1D, DistError, MyersonSolution};
pub use mechanisms::{Assignment, IncentiveReport, MenuEntry, MenuMechanism};
pub use optrev::{FiniteJoint, RatioReport, RevOptions};

/// Guarantee for separate sales on independent goods: `sqrt(e)/(sqrt(e)+1)`.
pub fn guarantee_general() -> f64 {
    let s = 1f64.exp().sqrt();
    s / (s + 1.0)
}

/// Guarantee under weak regularity of both marginals: `e/(e+1)`.
pub fn guarantee_regular() -> f64 {
    let e = 1f64.exp();
    e / (e + 1.0)
}
