//! Shared instance builders for the benchmark suite. Sizes are chosen so a
//! single iteration of the heaviest benches stays near 100 ms.

use revlab_core::{DiscreteMeasureKD, Dist1D, FiniteJoint};

/// Product of two equal-revenue marginals discretized to `n` cells — the
/// hardest family for the revenue LP at a given grid size.
pub fn er_product(n: usize) -> FiniteJoint {
    let d = Dist1D::equal_revenue(1.0, 10.0)
        .expect("valid parameters")
        .discretize(n)
        .expect("discretizable");
    FiniteJoint::product(&d, &d).expect("product instance")
}

/// Product of two uniform marginals discretized to `n` cells.
pub fn uniform_product(n: usize) -> FiniteJoint {
    let d = Dist1D::uniform(0.0, 1.0)
        .expect("valid parameters")
        .discretize(n)
        .expect("discretizable");
    FiniteJoint::product(&d, &d).expect("product instance")
}

/// Heavy-tailed one-good distribution with `n` atoms for pricing sweeps.
pub fn big_marginal(n: usize) -> Dist1D {
    Dist1D::equal_revenue(1.0, 50.0)
        .expect("valid parameters")
        .discretize(n)
        .expect("discretizable")
}

/// 25-point planar measure on a 5x5 lattice, shifted by `offset` so two
/// calls give distinct supports with a small positive distance.
pub fn lattice_measure(offset: f64) -> DiscreteMeasureKD {
    let pts: Vec<Vec<f64>> = (0..25)
        .map(|i| vec![(i % 5) as f64 * 0.3 + offset, (i / 5) as f64 * 0.3])
        .collect();
    DiscreteMeasureKD::new(pts, vec![0.04; 25]).expect("valid measure")
}
