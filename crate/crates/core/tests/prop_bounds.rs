//! Property tests for the analytic bound layer.
//!
//! The load-bearing identities: `L_i` is an antiderivative of `-K_i`, the
//! closed-form tail caps really dominate (`int_u G1 G2 <= r1 r2 / u`,
//! `L_i(u) <= r_j / e` past `r_i`), and the maximized three-segment integral
//! dominates every admissible diagonal profile while staying under its own
//! closed-form cap. Profiles are brute-forced as random step functions, so
//! the comparison never goes through the optimizer being tested.

use proptest::prelude::*;
use revlab_core::bounds::{k_term_bound, GoodPair};
use revlab_core::{quad, Dist1D};

fn arb_piecewise() -> impl Strategy<Value = Dist1D> {
    (
        0.0..2.0f64,
        prop::collection::vec(0.1..2.0f64, 1..5),
        prop::collection::vec(0.01..1.0f64, 4),
    )
        .prop_map(|(start, gaps, weights)| {
            let mut breaks = vec![start];
            for g in &gaps {
                breaks.push(breaks.last().unwrap() + g);
            }
            let mut densities: Vec<f64> = weights[..gaps.len()].to_vec();
            let mass: f64 = breaks.windows(2).zip(&densities).map(|(w, d)| d * (w[1] - w[0])).sum();
            for d in &mut densities {
                *d /= mass;
            }
            Dist1D::piecewise_uniform(&breaks, &densities).unwrap()
        })
}

fn arb_density_dist() -> impl Strategy<Value = Dist1D> {
    prop_oneof![
        arb_piecewise(),
        (0.0..3.0f64, 0.2..5.0f64).prop_map(|(lo, w)| Dist1D::uniform(lo, lo + w).unwrap()),
        (0.2..3.0f64).prop_map(|rate| Dist1D::exponential(rate).unwrap()),
        (0.3..2.0f64, 1.5..15.0f64).prop_map(|(r, k)| Dist1D::equal_revenue(r, r * k).unwrap()),
    ]
}

fn arb_pair() -> impl Strategy<Value = GoodPair> {
    (arb_density_dist(), arb_density_dist())
        .prop_map(|(a, b)| GoodPair::new(a, b).unwrap())
}

fn arb_lambdas() -> impl Strategy<Value = (f64, f64)> {
    (0.05..1.0f64, 0.05..1.0f64).prop_map(|(x, y)| (x.min(y), x.max(y)))
}

/// `int phi1 K1 + phi2 K2` for step profiles on a uniform grid over the
/// support, via the exact tail-integral telescoping (atoms included).
fn step_profile_value(p: &GoodPair, phi1: &[f64], phi2: &[f64]) -> f64 {
    let n = phi1.len();
    let cap = p.cap();
    let xs: Vec<f64> = (0..=n).map(|k| cap * k as f64 / n as f64).collect();
    let mut total = 0.0;
    for k in 0..n {
        let seg1 = p.tail_integral_k(1, xs[k]) - p.tail_integral_k(1, xs[k + 1]);
        let seg2 = p.tail_integral_k(2, xs[k]) - p.tail_integral_k(2, xs[k + 1]);
        total += phi1[k] * seg1 + phi2[k] * seg2;
    }
    // the telescoping covers [0, cap); a support-cap atom sits exactly at cap
    total += phi1[n - 1] * p.tail_integral_k(1, cap) + phi2[n - 1] * p.tail_integral_k(2, cap);
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // central difference of L against -K, away from density kinks
    #[test]
    fn l_is_antiderivative_of_minus_k(p in arb_pair(), frac in 0.02..0.98f64, i in 1u8..3) {
        let t = frac * p.cap();
        let h = 1e-6;
        let clear = p.breakpoints().iter().all(|b| (b - t).abs() > 1e-3);
        prop_assume!(clear && t > 1e-3);
        let slope = (p.l_fun(i, t + h) - p.l_fun(i, t - h)) / (2.0 * h);
        let k = p.k_fun(i, t);
        prop_assert!(
            (slope + k).abs() <= 1e-5 * (1.0 + k.abs()),
            "L' = {slope}, -K = {}", -k
        );
    }

    #[test]
    fn tail_product_integral_is_capped(p in arb_pair(), frac in 0.02..0.95f64) {
        let u = (frac * p.cap()).max(1e-3);
        let int = quad::integrate(
            |t| p.d1().tail(t) * p.d2().tail(t),
            u,
            p.cap(),
            p.breakpoints(),
            1e-9,
        );
        let cap = p.r(1) * p.r(2) / u;
        prop_assert!(int <= cap + 1e-7, "int G1 G2 = {int} > {cap}");
    }

    #[test]
    fn l_tail_caps_hold_past_own_revenue(p in arb_pair(), frac in 0.0..3.0f64, i in 1u8..3) {
        let (r_own, r_other) = if i == 1 { (p.r(1), p.r(2)) } else { (p.r(2), p.r(1)) };
        let u = r_own + frac * (p.cap() - r_own).max(0.0);
        let l = p.l_fun(i, u);
        prop_assert!(l <= r_other / std::f64::consts::E + 1e-9, "L = {l} at u = {u}");
        prop_assert!(
            l + p.r(1) * p.r(2) / u <= r_other + 1e-9,
            "L + r1 r2 / u = {} at u = {u}", l + p.r(1) * p.r(2) / u
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sup_i_stays_under_closed_form_cap(p in arb_pair(), (l1, l2) in arb_lambdas()) {
        let sup = p.sup_i(l1, l2, 48).unwrap();
        let cap = k_term_bound(l1, l2, p.r(1), p.r(2)).unwrap();
        prop_assert!(sup.value <= cap + 1e-6, "sup {} > cap {cap}", sup.value);
        let (a, b, c) = sup.argmax;
        prop_assert!(0.0 <= a && a <= b && b <= c);
    }

    // random admissible step profiles (0 <= phi_i <= lambda_i, phi1 + phi2
    // nondecreasing) never beat the maximized three-segment integral
    #[test]
    fn sup_i_dominates_step_profiles(
        p in arb_pair(),
        (l1, l2) in arb_lambdas(),
        raw in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 20),
    ) {
        let sum_cap = l1 + l2;
        let mut totals: Vec<f64> = raw.iter().map(|r| r.0 * sum_cap).collect();
        totals.sort_by(f64::total_cmp);
        let mut phi1 = Vec::with_capacity(20);
        let mut phi2 = Vec::with_capacity(20);
        for (s, r) in totals.iter().zip(&raw) {
            let lo = (s - l2).max(0.0);
            let hi = s.min(l1);
            let q1 = lo + r.1 * (hi - lo);
            phi1.push(q1);
            phi2.push(s - q1);
        }
        let value = step_profile_value(&p, &phi1, &phi2);
        let sup = p.sup_i(l1, l2, 64).unwrap();
        let tol = 2e-3 * (1.0 + p.r(1) + p.r(2));
        prop_assert!(
            value <= sup.value + tol,
            "step profile {value} beats sup {}", sup.value
        );
    }

    // profiles that are individually nondecreasing obey the sharper cap
    // lambda1 r2 / e + lambda2 r1 / e regardless of regularity
    #[test]
    fn monotone_profiles_obey_regular_cap(
        p in arb_pair(),
        (l1, l2) in arb_lambdas(),
        raw in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 20),
    ) {
        let mut phi1: Vec<f64> = raw.iter().map(|r| r.0 * l1).collect();
        let mut phi2: Vec<f64> = raw.iter().map(|r| r.1 * l2).collect();
        phi1.sort_by(f64::total_cmp);
        phi2.sort_by(f64::total_cmp);
        let value = step_profile_value(&p, &phi1, &phi2);
        let cap = (l1 * p.r(2) + l2 * p.r(1)) / std::f64::consts::E;
        prop_assert!(value <= cap + 1e-6, "monotone profile {value} > cap {cap}");
    }
}
