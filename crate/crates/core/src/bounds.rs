//! Analytic bound machinery for two independent goods.
//!
//! Everything here quantifies how much the optimal two-good revenue can
//! exceed the sum of the separate one-good revenues. The central objects are
//! two auxiliary functions built from the marginals,
//!
//! ```text
//! K1(t) = f2(t) (H1(t) - r1) - G1(t) G2(t)
//! K2(t) = f1(t) (H2(t) - r2) - G1(t) G2(t)
//! ```
//!
//! where `f` is the density, `G` the tail, `H` the cumulative tail (expected
//! value capped at `t`), and `r` the optimal one-good revenue. Any mechanism
//! whose allocation probabilities stay within `[0, lambda_i]` has revenue at
//! most `lambda1 r1 + lambda2 r2 + int (phi1 K1 + phi2 K2)` where
//! `phi_i(t)` is its allocation on the diagonal; the integral is maximized
//! over admissible `phi` by step functions described by a monotone triple
//! `a <= b <= c`, and that supremum is in turn bounded in closed form. The
//! module exposes each link of this chain so the inequalities can be audited
//! numerically, plus the resulting end-to-end revenue bounds.
//!
//! Distributions may carry a single atom at their support cap (the capped
//! equal-revenue family does); the atom contributes an explicit point mass to
//! each integral, handled alongside the quadrature of the continuous part.

use crate::distributions::{Dist1D, DistError};
use crate::mechanisms::{MenuMechanism, MechError};
use crate::quad;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("need 0 <= a <= b <= c, got ({0}, {1}, {2})")]
    BadOrdering(f64, f64, f64),
    #[error("allocation for good {good} reaches {value}, above its lambda cap")]
    QOutOfRange { good: u8, value: f64 },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Mech(#[from] MechError),
}

/// A pair of independent one-good distributions with everything the bound
/// machinery needs precomputed: optimal revenues, the crossing points `tau_i`
/// where `H_i` reaches `r_i`, merged quadrature breakpoints, and the point
/// masses each support-cap atom induces in `K1`/`K2`.
#[derive(Debug, Clone)]
pub struct GoodPair {
    d1: Dist1D,
    d2: Dist1D,
    r1: f64,
    r2: f64,
    tau1: f64,
    tau2: f64,
    cap: f64,
    breaks: Vec<f64>,
    // (location, delta in K1, delta in K2, K1 has an atom there, K2 does)
    deltas: Vec<(f64, f64, f64, bool, bool)>,
}

/// Result of maximizing the three-segment integral over monotone triples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupI {
    pub value: f64,
    pub argmax: (f64, f64, f64),
}

/// Outcome of the sign-pattern scan of one `K_i`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingleCrossing {
    pub ok: bool,
    /// First positive-then-negative pattern found, if any.
    pub dip: Option<CrossingDip>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossingDip {
    pub up_at: f64,
    pub down_at: f64,
    /// Normalized diagnostic `K_i / (f_j G_i)` at the two points, where
    /// defined; for weakly regular goods it must be increasing, which is why
    /// a dip certifies an irregularity.
    pub kappa_up: Option<f64>,
    pub kappa_down: Option<f64>,
}

/// Two-sided audit of the diagonal decomposition inequality for a concrete
/// menu mechanism: `lhs` is its revenue on a fine product discretization,
/// `rhs` the analytic envelope, `slack = rhs - lhs` (nonnegative up to
/// discretization error when the inequality holds).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecompositionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    General,
    Regular,
    SqrtRule,
    MinRule,
}

/// A complete bound statement for one pair at one `(lambda1, lambda2)`:
/// the maximized coupling term, its closed-form cap, and the implied total
/// revenue bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCertificate {
    pub lambda1: f64,
    pub lambda2: f64,
    pub k_term: f64,
    pub k_term_bound: f64,
    pub total_bound: f64,
    pub which: BoundKind,
}

/// The two closed-form values behind the general (no-regularity) bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeneralBound {
    /// `(1 + 1/sqrt(e)) (R1 + R2)`, the distribution-free constant.
    pub uniform: f64,
    /// `R1 + R2 + R1/(lambda e) + lambda R2` at the best `lambda` in `(0,1]`;
    /// coincides with `uniform` when either revenue vanishes.
    pub tuned: f64,
}

/// Bounds available without any regularity assumption beyond independence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NonsymmetricBounds {
    /// `(sqrt(R1) + sqrt(R2))^2`.
    pub sqrt_rule: f64,
    /// `R1 + R2 + min{2 sqrt(R1 R2)/sqrt(e), 2 sqrt(R1 R2)/e + (1 - 1/e) min{R1, R2}}`.
    pub min_rule: f64,
    pub best: f64,
}

fn check_lambdas(l1: f64, l2: f64) -> Result<(), BoundError> {
    if !(l1 > 0.0 && l1 <= l2 && l2 <= 1.0) {
        return Err(BoundError::BadParams(format!(
            "need 0 < lambda1 <= lambda2 <= 1, got ({l1}, {l2})"
        )));
    }
    Ok(())
}

impl GoodPair {
    /// Both distributions must be given by densities, except possibly a
    /// single atom at the support cap.
    pub fn new(d1: Dist1D, d2: Dist1D) -> Result<Self, BoundError> {
        if !d1.density_with_cap_atom_only() || !d2.density_with_cap_atom_only() {
            return Err(BoundError::Dist(DistError::NoDensity));
        }
        let r1 = d1.myerson_optimal().revenue;
        let r2 = d2.myerson_optimal().revenue;
        if !(r1 > 0.0) || !(r2 > 0.0) {
            return Err(BoundError::BadParams(format!(
                "optimal one-good revenues must be positive, got ({r1}, {r2})"
            )));
        }
        let tau1 = d1.tau(r1)?;
        let tau2 = d2.tau(r2)?;
        let c1 = d1.support_upper_or(f64::INFINITY);
        let c2 = d2.support_upper_or(f64::INFINITY);
        let cap = c1.max(c2);

        let mut breaks: Vec<f64> = d1.breakpoints();
        breaks.extend(d2.breakpoints());
        breaks.extend([tau1, tau2]);
        breaks.retain(|t| t.is_finite() && *t >= 0.0 && *t <= cap);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        // an atom of f2 at c2 puts mass a2*(H1(c2) - r1) into K1, and
        // symmetrically for f1 into K2; co-located atoms share an entry
        let a1 = if c1.is_finite() { d1.atom_at(c1) } else { 0.0 };
        let a2 = if c2.is_finite() { d2.atom_at(c2) } else { 0.0 };
        let mut deltas: Vec<(f64, f64, f64, bool, bool)> = Vec::new();
        if a2 > 0.0 {
            deltas.push((c2, a2 * (d1.cumtail(c2) - r1), 0.0, true, false));
        }
        if a1 > 0.0 {
            let dk2 = a1 * (d2.cumtail(c1) - r2);
            if let Some(e) = deltas.iter_mut().find(|e| e.0 == c1) {
                e.2 = dk2;
                e.4 = true;
            } else {
                deltas.push((c1, 0.0, dk2, false, true));
            }
        }
        deltas.sort_by(|x, y| x.0.total_cmp(&y.0));

        Ok(Self { d1, d2, r1, r2, tau1, tau2, cap, breaks, deltas })
    }

    pub fn d1(&self) -> &Dist1D {
        &self.d1
    }

    pub fn d2(&self) -> &Dist1D {
        &self.d2
    }

    pub fn r(&self, i: u8) -> f64 {
        match i {
            1 => self.r1,
            2 => self.r2,
            _ => panic!("good index must be 1 or 2"),
        }
    }

    pub fn tau(&self, i: u8) -> f64 {
        match i {
            1 => self.tau1,
            2 => self.tau2,
            _ => panic!("good index must be 1 or 2"),
        }
    }

    /// Effective upper end of the union of supports (an unbounded tail is
    /// truncated where its remaining mass is negligible).
    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Quadrature breakpoints: kinks of the densities and tails plus the two
    /// crossing points.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    fn own_other(&self, i: u8) -> (&Dist1D, &Dist1D, f64) {
        match i {
            1 => (&self.d1, &self.d2, self.r1),
            2 => (&self.d2, &self.d1, self.r2),
            _ => panic!("good index must be 1 or 2"),
        }
    }

    /// Continuous part of `K_i(t) = f_j(t) (H_i(t) - r_i) - G1(t) G2(t)`.
    /// Support-cap atoms contribute separately as point masses.
    pub fn k_fun(&self, i: u8, t: f64) -> f64 {
        let (own, other, r) = self.own_other(i);
        let fj = other.density(t).unwrap_or(0.0);
        fj * (own.cumtail(t) - r) - own.tail(t) * other.tail(t)
    }

    /// `L_i(t) = G_j(t) (H_i(t) - r_i)`; its derivative is `-K_i`.
    pub fn l_fun(&self, i: u8, t: f64) -> f64 {
        let (own, other, r) = self.own_other(i);
        other.tail(t) * (own.cumtail(t) - r)
    }

    /// `int_[u, inf) K_i`, evaluated in closed form as `L_i(u)`; counts an
    /// atom sitting exactly at `u`.
    pub fn tail_integral_k(&self, i: u8, u: f64) -> f64 {
        self.l_fun(i, u)
    }

    /// `int_(u, inf) K_i`: as above but excluding a point mass exactly at `u`.
    fn tail_k_open(&self, i: u8, u: f64) -> f64 {
        let mut v = self.l_fun(i, u);
        for &(loc, dk1, dk2, _, _) in &self.deltas {
            if loc == u {
                v -= if i == 1 { dk1 } else { dk2 };
            }
        }
        v
    }

    /// Point-mass contribution to `int max{K1, K2}` at one atom location:
    /// co-located spikes compare against each other, a lone spike against the
    /// other function's finite values.
    fn max_delta(&self, entry: &(f64, f64, f64, bool, bool)) -> f64 {
        let &(_, dk1, dk2, in1, in2) = entry;
        match (in1, in2) {
            (true, true) => dk1.max(dk2),
            (true, false) => dk1.max(0.0),
            (false, true) => dk2.max(0.0),
            (false, false) => 0.0,
        }
    }

    /// The three-segment integral for a monotone triple `a <= b <= c`:
    /// `lambda1 int_a^c max{K1, K2} + lambda1 int_c^inf (K1 + K2)
    ///  + (lambda2 - lambda1) int_b^inf K2`.
    /// The two tail integrals are exact via `L`; only the max term is
    /// quadratured. Each piece takes atoms on half-open `(lo, hi]` intervals
    /// so nothing is counted twice.
    pub fn i_abc(&self, l1: f64, l2: f64, a: f64, b: f64, c: f64) -> Result<f64, BoundError> {
        check_lambdas(l1, l2)?;
        if !(0.0 <= a && a <= b && b <= c) {
            return Err(BoundError::BadOrdering(a, b, c));
        }
        let lo = a.min(self.cap);
        let hi = c.min(self.cap);
        let mut max_term = quad::integrate(
            |t| self.k_fun(1, t).max(self.k_fun(2, t)),
            lo,
            hi,
            &self.breaks,
            1e-9,
        );
        for e in &self.deltas {
            if e.0 > a && e.0 <= c {
                max_term += self.max_delta(e);
            }
        }
        Ok(l1 * max_term
            + l1 * (self.tail_k_open(1, c) + self.tail_k_open(2, c))
            + (l2 - l1) * self.tail_k_open(2, b))
    }

    /// Maximize the three-segment integral over `0 <= a <= b <= c <= cap`.
    ///
    /// The integral separates into `g(a) + h(b) + w(c)` once the running
    /// integral of `max{K1, K2}` is tabulated, so the grid stage is a single
    /// prefix-maximum sweep over `grid_n` points plus all breakpoints; three
    /// rounds of coordinatewise refinement then polish the triple. The result
    /// is a lower bound on the true supremum, accurate to the refinement
    /// scale (the test suite cross-checks it from above via the closed-form
    /// cap and from below via brute-force step profiles).
    pub fn sup_i(&self, l1: f64, l2: f64, grid_n: usize) -> Result<SupI, BoundError> {
        check_lambdas(l1, l2)?;
        let n = grid_n.max(4);
        let mut xs: Vec<f64> = (0..=n).map(|k| self.cap * k as f64 / n as f64).collect();
        xs.extend_from_slice(&self.breaks);
        xs.push(self.tau1);
        xs.push(self.tau2);
        xs.retain(|t| t.is_finite() && *t >= 0.0 && *t <= self.cap);
        xs.sort_by(f64::total_cmp);
        xs.dedup();

        // prefix integral of max{K1, K2} over (0, x], atoms included
        let mut prefix = vec![0.0f64; xs.len()];
        for k in 1..xs.len() {
            let mut seg = quad::integrate(
                |t| self.k_fun(1, t).max(self.k_fun(2, t)),
                xs[k - 1],
                xs[k],
                &[],
                1e-10,
            );
            for e in &self.deltas {
                if e.0 > xs[k - 1] && e.0 <= xs[k] {
                    seg += self.max_delta(e);
                }
            }
            prefix[k] = prefix[k - 1] + seg;
        }

        let g = |k: usize| -l1 * prefix[k];
        let h = |k: usize| (l2 - l1) * self.tail_k_open(2, xs[k]);
        let w = |k: usize| {
            l1 * (prefix[k] + self.tail_k_open(1, xs[k]) + self.tail_k_open(2, xs[k]))
        };

        // best monotone triple by two prefix-max sweeps
        let mut best_a = vec![0usize; xs.len()];
        let mut best_ab = vec![0usize; xs.len()];
        let mut cur_a = 0usize;
        let mut ga = f64::NEG_INFINITY;
        let mut hb = f64::NEG_INFINITY;
        let mut cur_ab = 0usize;
        let mut best = (f64::NEG_INFINITY, 0usize);
        for k in 0..xs.len() {
            if g(k) > ga {
                ga = g(k);
                cur_a = k;
            }
            best_a[k] = cur_a;
            if ga + h(k) > hb {
                hb = ga + h(k);
                cur_ab = k;
            }
            best_ab[k] = cur_ab;
            let total = hb + w(k);
            if total > best.0 {
                best = (total, k);
            }
        }
        let kc = best.1;
        let kb = best_ab[kc];
        let ka = best_a[kb];
        let mut value = best.0;
        let (mut a, mut b, mut c) = (xs[ka], xs[kb], xs[kc]);

        // coordinatewise polish on shrinking brackets
        let step0 = self.cap / n as f64;
        for round in 0..3 {
            let half = step0 / (1 << (round * 2)) as f64;
            for coord in 0..3 {
                let (lo, hi) = match coord {
                    0 => ((a - half).max(0.0), (a + half).min(b)),
                    1 => ((b - half).max(a), (b + half).min(c)),
                    _ => ((c - half).max(b), (c + half).min(self.cap)),
                };
                for s in 0..=16 {
                    // rounding may lift lo + (hi - lo) a ulp past hi
                    let x = (lo + (hi - lo) * s as f64 / 16.0).clamp(lo, hi);
                    let (ta, tb, tc) = match coord {
                        0 => (x, b, c),
                        1 => (a, x, c),
                        _ => (a, b, x),
                    };
                    let v = self.i_abc(l1, l2, ta, tb, tc)?;
                    if v > value {
                        value = v;
                        a = ta;
                        b = tb;
                        c = tc;
                    }
                }
            }
        }
        Ok(SupI { value, argmax: (a, b, c) })
    }

    /// Normalized sign diagnostic `K_i / (f_j G_i)`; where both factors are
    /// positive this is increasing for weakly regular goods.
    fn kappa(&self, i: u8, t: f64) -> Option<f64> {
        let (own, other, _) = self.own_other(i);
        let fj = other.density(t).unwrap_or(0.0);
        let gi = own.tail(t);
        if fj > 1e-12 && gi > 1e-12 {
            Some(self.k_fun(i, t) / (fj * gi))
        } else {
            None
        }
    }

    /// Scan `K_i` for a positive value followed by a strictly negative one.
    /// Weak regularity of both goods rules that pattern out, so a dip is a
    /// certificate of irregularity.
    pub fn single_crossing_report(&self, i: u8, grid_n: usize) -> SingleCrossing {
        let n = grid_n.max(8);
        let mut xs: Vec<f64> = (0..=n).map(|k| self.cap * k as f64 / n as f64).collect();
        xs.extend_from_slice(&self.breaks);
        for k in 0..self.breaks.len().saturating_sub(1) {
            xs.push(0.5 * (self.breaks[k] + self.breaks[k + 1]));
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut up_at: Option<f64> = None;
        for &t in &xs {
            let v = self.k_fun(i, t);
            if v > 1e-9 && up_at.is_none() {
                up_at = Some(t);
            }
            if v < -1e-9 {
                if let Some(u) = up_at {
                    return SingleCrossing {
                        ok: false,
                        dip: Some(CrossingDip {
                            up_at: u,
                            down_at: t,
                            kappa_up: self.kappa(i, u),
                            kappa_down: self.kappa(i, t),
                        }),
                    };
                }
            }
        }
        SingleCrossing { ok: true, dip: None }
    }

    pub fn single_crossing_check(&self, i: u8, grid_n: usize) -> bool {
        self.single_crossing_report(i, grid_n).ok
    }

    /// Audit the diagonal decomposition inequality for a concrete menu:
    /// revenue on an `n x n` product discretization against
    /// `lambda1 r1 + lambda2 r2 + int (phi1 K1 + phi2 K2)` with `phi_i` the
    /// menu's own diagonal allocation profile.
    pub fn decomposition_check(
        &self,
        mech: &MenuMechanism,
        l1: f64,
        l2: f64,
        grid_n: usize,
    ) -> Result<DecompositionCheck, BoundError> {
        check_lambdas(l1, l2)?;
        for e in mech.entries() {
            if e.q1 > l1 + 1e-9 {
                return Err(BoundError::QOutOfRange { good: 1, value: e.q1 });
            }
            if e.q2 > l2 + 1e-9 {
                return Err(BoundError::QOutOfRange { good: 2, value: e.q2 });
            }
        }

        let f1 = self.d1.discretize(grid_n)?;
        let f2 = self.d2.discretize(grid_n)?;
        let a1 = f1.as_finite().expect("discretize yields atoms");
        let a2 = f2.as_finite().expect("discretize yields atoms");
        let mut points = Vec::with_capacity(a1.len() * a2.len());
        for &(x1, p1) in a1 {
            for &(x2, p2) in a2 {
                points.push(((x1, x2), p1 * p2));
            }
        }
        let lhs = mech.revenue(&points);

        let profile = mech.diagonal_profile();
        let mut coupling = 0.0;
        for seg in &profile {
            let lo = seg.lo.max(0.0);
            let hi = seg.hi.min(self.cap);
            if hi > lo {
                coupling += quad::integrate(
                    |t| seg.q1 * self.k_fun(1, t) + seg.q2 * self.k_fun(2, t),
                    lo,
                    hi,
                    &self.breaks,
                    1e-9,
                );
            }
        }
        for &(loc, dk1, dk2, _, _) in &self.deltas {
            let seg = profile
                .iter()
                .find(|s| s.lo <= loc && loc < s.hi)
                .or_else(|| profile.last())
                .expect("diagonal profile covers the axis");
            coupling += seg.q1 * dk1 + seg.q2 * dk2;
        }

        let rhs = l1 * self.r1 + l2 * self.r2 + coupling;
        Ok(DecompositionCheck { lhs, rhs, slack: rhs - lhs })
    }

    /// Shipped example whose first coupling function rises and then dips
    /// negative before the tail, so `single_crossing_check(1, ..)` fails:
    /// good 2 is uniform-ish with a sharp bump on `(0.4, 0.7)` followed by a
    /// near-empty valley, which is not weakly regular. Serves as the
    /// regression anchor for the crossing diagnostics.
    pub fn crossing_dip_fixture() -> Result<Self, BoundError> {
        let d2 = Dist1D::piecewise_uniform(
            &[0.0, 0.4, 0.7, 3.0, 4.0],
            &[0.1, 3.0, 0.01 / 2.3, 0.05],
        )?;
        Self::new(Dist1D::uniform(0.0, 1.0)?, d2)
    }

    /// Bound statement at one `(lambda1, lambda2)`: maximized coupling term,
    /// closed-form cap, and the implied revenue bound for mechanisms whose
    /// allocations respect the lambda caps.
    pub fn certificate(
        &self,
        l1: f64,
        l2: f64,
        grid_n: usize,
    ) -> Result<BoundCertificate, BoundError> {
        let sup = self.sup_i(l1, l2, grid_n)?;
        let cap = k_term_bound(l1, l2, self.r1, self.r2)?;
        Ok(BoundCertificate {
            lambda1: l1,
            lambda2: l2,
            k_term: sup.value,
            k_term_bound: cap,
            total_bound: l1 * self.r1 + l2 * self.r2 + cap,
            which: BoundKind::General,
        })
    }
}

/// Closed-form cap on the maximized coupling term:
/// `(1/e) (lambda2 r1 + lambda1 r2 + lambda1 (e - 1) min{r1, r2})`.
pub fn k_term_bound(l1: f64, l2: f64, r1: f64, r2: f64) -> Result<f64, BoundError> {
    check_lambdas(l1, l2)?;
    if !(r1 > 0.0) || !(r2 > 0.0) {
        return Err(BoundError::BadParams(format!(
            "revenues must be positive, got ({r1}, {r2})"
        )));
    }
    Ok((l2 * r1 + l1 * r2 + l1 * (std::f64::consts::E - 1.0) * r1.min(r2)) / std::f64::consts::E)
}

/// Distribution-free two-good revenue bound from the separate revenues, both
/// as the uniform constant `(1 + 1/sqrt(e))(R1 + R2)` and with the diagonal
/// slope tuned to the revenue ratio.
pub fn theorem_general_bound(rev1: f64, rev2: f64) -> GeneralBound {
    assert!(rev1 >= 0.0 && rev2 >= 0.0, "revenues must be nonnegative");
    let e = std::f64::consts::E;
    let uniform = (1.0 + 1.0 / e.sqrt()) * (rev1 + rev2);
    let tuned = if rev1 > 0.0 && rev2 > 0.0 {
        // minimize R1/(lambda e) + lambda R2 over lambda in (0, 1]
        let lambda = (rev1 / (e * rev2)).sqrt().min(1.0);
        rev1 + rev2 + rev1 / (lambda * e) + lambda * rev2
    } else {
        uniform
    };
    GeneralBound { uniform, tuned }
}

/// Two-good revenue bound for weakly regular goods: `(1 + 1/e)(r1 + r2)`.
pub fn theorem_regular_bound(r1: f64, r2: f64) -> f64 {
    assert!(r1 >= 0.0 && r2 >= 0.0, "revenues must be nonnegative");
    (1.0 + 1.0 / std::f64::consts::E) * (r1 + r2)
}

/// Revenue bounds that favor unequal separate revenues.
pub fn nonsymmetric_bounds(rev1: f64, rev2: f64) -> NonsymmetricBounds {
    assert!(rev1 >= 0.0 && rev2 >= 0.0, "revenues must be nonnegative");
    let e = std::f64::consts::E;
    let sqrt_rule = (rev1.sqrt() + rev2.sqrt()).powi(2);
    let cross = (rev1 * rev2).sqrt();
    let min_rule = rev1
        + rev2
        + (2.0 / e.sqrt() * cross).min(2.0 / e * cross + (1.0 - 1.0 / e) * rev1.min(rev2));
    NonsymmetricBounds { sqrt_rule, min_rule, best: sqrt_rule.min(min_rule) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn iid_uniform() -> GoodPair {
        GoodPair::new(Dist1D::uniform(0.0, 1.0).unwrap(), Dist1D::uniform(0.0, 1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn k_values_on_iid_uniform() {
        let p = iid_uniform();
        // f2 = 1, H1(t) = t - t^2/2, r = 1/4, G = 1 - t
        assert_abs_diff_eq!(p.k_fun(1, 0.5), -0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(p.k_fun(1, 0.8), 0.19, epsilon = 1e-12);
        assert_abs_diff_eq!(p.k_fun(1, 0.0), -1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p.k_fun(2, 0.5), -0.125, epsilon = 1e-12);
    }

    #[test]
    fn l_values_on_iid_uniform() {
        let p = iid_uniform();
        assert_abs_diff_eq!(p.l_fun(1, 0.5), 0.0625, epsilon = 1e-12);
        assert_abs_diff_eq!(p.l_fun(1, p.tau(1)), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.l_fun(1, 1.0), 0.0, epsilon = 1e-12);
        // tau solves H(tau) = 1/4 for H(t) = t - t^2/2
        assert_abs_diff_eq!(p.tau(1), 1.0 - 0.5f64.sqrt(), epsilon = 1e-9);
        assert!(p.tau(1) >= p.r(1));
        assert!(p.tau(2) >= p.r(2));
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        let p = iid_uniform();
        for u in [0.0, 0.2, 0.5, 0.9] {
            let by_quad = quad::integrate(|t| p.k_fun(1, t), u, 1.0, p.breakpoints(), 1e-10);
            assert_abs_diff_eq!(p.tail_integral_k(1, u), by_quad, epsilon = 1e-7);
        }
    }

    #[test]
    fn tail_integral_counts_cap_atom() {
        // equal-revenue marginal: atom of mass r/cap at the cap feeds K2
        let d1 = Dist1D::equal_revenue(1.0, 10.0).unwrap();
        let d2 = Dist1D::uniform(0.0, 2.0).unwrap();
        let p = GoodPair::new(d1.clone(), d2).unwrap();
        let u = 1.5;
        let by_quad = quad::integrate(|t| p.k_fun(2, t), u, p.cap(), p.breakpoints(), 1e-10);
        let atom = d1.atom_at(10.0) * (p.d2().cumtail(10.0) - p.r(2));
        assert!(atom.abs() > 1e-3, "fixture should exercise the atom path");
        assert_abs_diff_eq!(p.tail_integral_k(2, u), by_quad + atom, epsilon = 1e-6);
    }

    #[test]
    fn i_abc_degenerate_triples() {
        let p = iid_uniform();
        // a = b = c = cap: all three pieces empty
        assert_abs_diff_eq!(p.i_abc(1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 0.0, epsilon = 1e-9);
        // a = b = c = tau: L1(tau) + L2(tau) = 0 for an iid pair
        let tau = p.tau(1);
        assert_abs_diff_eq!(p.i_abc(1.0, 1.0, tau, tau, tau).unwrap(), 0.0, epsilon = 1e-8);
        // a = b = c = 0: the whole-line integral, L1(0) + L2(0) = -(r1 + r2)
        assert_abs_diff_eq!(
            p.i_abc(1.0, 1.0, 0.0, 0.0, 0.0).unwrap(),
            -(p.r(1) + p.r(2)),
            epsilon = 1e-9
        );
    }

    #[test]
    fn i_abc_b_irrelevant_when_lambdas_equal() {
        let p = iid_uniform();
        let v1 = p.i_abc(0.7, 0.7, 0.1, 0.3, 0.9).unwrap();
        let v2 = p.i_abc(0.7, 0.7, 0.1, 0.8, 0.9).unwrap();
        assert_abs_diff_eq!(v1, v2, epsilon = 1e-10);
    }

    #[test]
    fn i_abc_rejects_bad_ordering() {
        let p = iid_uniform();
        assert!(matches!(
            p.i_abc(1.0, 1.0, 0.5, 0.2, 0.9),
            Err(BoundError::BadOrdering(..))
        ));
        assert!(matches!(p.i_abc(0.0, 1.0, 0.0, 0.1, 0.2), Err(BoundError::BadParams(_))));
    }

    #[test]
    fn sup_i_dominates_sampled_triples_and_respects_cap() {
        let p = iid_uniform();
        for &(l1, l2) in &[(1.0, 1.0), (0.5, 1.0), (0.3, 0.8)] {
            let sup = p.sup_i(l1, l2, 40).unwrap();
            assert!(sup.value >= -1e-9, "cap triple always yields 0");
            for &(a, b, c) in &[
                (0.0, 0.0, 0.0),
                (0.2, 0.3, 0.9),
                (p.tau(1), p.tau(1), p.tau(2).max(p.tau(1))),
                (0.3, 0.95, 1.0),
            ] {
                let v = p.i_abc(l1, l2, a, b, c).unwrap();
                assert!(
                    v <= sup.value + 1e-7,
                    "triple ({a},{b},{c}) beat sup_i: {v} > {}",
                    sup.value
                );
            }
            let cap = k_term_bound(l1, l2, p.r(1), p.r(2)).unwrap();
            assert!(sup.value <= cap + 1e-6, "{} > {cap}", sup.value);
        }
    }

    #[test]
    fn sup_i_on_equal_revenue_pair_stays_capped() {
        let p = GoodPair::new(
            Dist1D::equal_revenue(1.0, 10.0).unwrap(),
            Dist1D::equal_revenue(1.0, 10.0).unwrap(),
        )
        .unwrap();
        let sup = p.sup_i(1.0, 1.0, 40).unwrap();
        let cap = k_term_bound(1.0, 1.0, p.r(1), p.r(2)).unwrap();
        assert!(sup.value >= 0.0);
        assert!(sup.value <= cap + 1e-6, "{} > {cap}", sup.value);
    }

    #[test]
    fn k_term_bound_closed_forms() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(
            k_term_bound(1.0, 1.0, 1.0, 1.0).unwrap(),
            (e + 1.0) / e,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            k_term_bound(1.0, 1.0, 1.0, 1.0).unwrap(),
            1.3678794411714423,
            epsilon = 1e-12
        );
        // the min term scales with the smaller revenue
        let small = k_term_bound(1.0, 1.0, 1.0, 1e-6).unwrap();
        assert_abs_diff_eq!(small, (1.0 + 1e-6 + (e - 1.0) * 1e-6) / e, epsilon = 1e-12);
        assert!(k_term_bound(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(k_term_bound(0.5, 0.4, 1.0, 1.0).is_err());
        assert!(k_term_bound(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn general_bound_values() {
        let e = std::f64::consts::E;
        let b = theorem_general_bound(1.0, 1.0);
        assert_abs_diff_eq!(b.uniform, 2.0 + 2.0 / e.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.uniform, 3.2130613194252668, epsilon = 1e-10);
        // equal revenues: 1/sqrt(e) is exactly the best slope
        assert_abs_diff_eq!(b.tuned, b.uniform, epsilon = 1e-12);

        let b = theorem_general_bound(1.0, 4.0);
        assert_abs_diff_eq!(b.tuned, 5.0 + 4.0 / e.sqrt(), epsilon = 1e-12);
        assert!(b.tuned < b.uniform);

        // slope clips at 1 when the first revenue dominates
        let b = theorem_general_bound(4.0, 1.0);
        assert_abs_diff_eq!(b.tuned, 4.0 + 1.0 + 4.0 / e + 1.0, epsilon = 1e-12);

        let b = theorem_general_bound(0.0, 1.0);
        assert_abs_diff_eq!(b.tuned, b.uniform, epsilon = 1e-12);
    }

    #[test]
    fn regular_bound_values() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(theorem_regular_bound(1.0, 1.0), 2.0 + 2.0 / e, epsilon = 1e-12);
        assert_abs_diff_eq!(theorem_regular_bound(1.0, 1.0), 2.7357588823428847, epsilon = 1e-10);
        assert_abs_diff_eq!(theorem_regular_bound(0.25, 0.25), 0.6839397205857212, epsilon = 1e-10);
        let ratio = 2.0 / theorem_regular_bound(1.0, 1.0);
        assert_abs_diff_eq!(ratio, e / (e + 1.0), epsilon = 1e-12);
    }

    #[test]
    fn nonsymmetric_bound_values() {
        let e = std::f64::consts::E;
        let b = nonsymmetric_bounds(1.0, 4.0);
        assert_abs_diff_eq!(b.sqrt_rule, 9.0, epsilon = 1e-12);
        let expect = 5.0 + (4.0 / e.sqrt()).min(4.0 / e + (1.0 - 1.0 / e));
        assert_abs_diff_eq!(b.min_rule, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(b.min_rule, 7.103638323514327, epsilon = 1e-9);
        assert_abs_diff_eq!(b.best, b.min_rule, epsilon = 1e-12);
        // equal revenues: the sqrt rule degenerates to 2 (R1 + R2)
        let b = nonsymmetric_bounds(1.0, 1.0);
        assert_abs_diff_eq!(b.sqrt_rule, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn single_crossing_on_standard_pairs() {
        assert!(iid_uniform().single_crossing_check(1, 400));
        assert!(iid_uniform().single_crossing_check(2, 400));
        let exp = GoodPair::new(
            Dist1D::exponential(1.0).unwrap(),
            Dist1D::exponential(1.0).unwrap(),
        )
        .unwrap();
        assert!(exp.single_crossing_check(1, 400));
        let er = GoodPair::new(
            Dist1D::equal_revenue(1.0, 10.0).unwrap(),
            Dist1D::equal_revenue(1.0, 10.0).unwrap(),
        )
        .unwrap();
        assert!(er.single_crossing_check(1, 400));
    }

    #[test]
    fn single_crossing_dip_on_irregular_pair() {
        // K1 rises on good 2's bump and plunges in the valley right after,
        // while G1 G2 is still sizable
        let p = GoodPair::crossing_dip_fixture().unwrap();
        assert!(!p.d2().is_weakly_regular(4000).unwrap());
        assert!(p.k_fun(1, 0.65) > 0.4);
        assert!(p.k_fun(1, 0.75) < -1e-3);
        let rep = p.single_crossing_report(1, 800);
        assert!(!rep.ok);
        let dip = rep.dip.unwrap();
        assert!(dip.up_at < dip.down_at);
        // the normalized diagnostic decreases across the dip, certifying
        // that weak regularity fails
        let (ku, kd) = (dip.kappa_up.unwrap(), dip.kappa_down.unwrap());
        assert!(ku > 0.0 && kd < 0.0 && kd < ku);
        // the dip lives in K1 only; K2 still single-crosses
        assert!(p.single_crossing_check(2, 800));
    }

    #[test]
    fn decomposition_null_and_posted() {
        let p = iid_uniform();
        let null = MenuMechanism::new(vec![]).unwrap();
        let chk = p.decomposition_check(&null, 1.0, 1.0, 64).unwrap();
        assert_abs_diff_eq!(chk.lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(chk.rhs, 0.5, epsilon = 1e-9);
        assert!(chk.slack >= 0.0);

        // posting both goods at the optimal one-good price: revenue is
        // exactly 1/2 on an even product grid, envelope is 1/2 + L1 + L2 at
        // the price
        let posted = MenuMechanism::separate_posted(0.5, 0.5).unwrap();
        let chk = p.decomposition_check(&posted, 1.0, 1.0, 64).unwrap();
        assert_abs_diff_eq!(chk.lhs, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(chk.rhs, 0.625, epsilon = 1e-8);
        assert!(chk.slack >= -1e-9);
    }

    #[test]
    fn decomposition_rejects_lambda_violation() {
        let p = iid_uniform();
        let posted = MenuMechanism::separate_posted(0.5, 0.5).unwrap();
        assert!(matches!(
            p.decomposition_check(&posted, 0.5, 1.0, 16),
            Err(BoundError::QOutOfRange { good: 1, .. })
        ));
    }

    #[test]
    fn certificate_is_consistent() {
        let p = iid_uniform();
        let cert = p.certificate(1.0, 1.0, 40).unwrap();
        assert!(cert.k_term <= cert.k_term_bound + 1e-6);
        assert_abs_diff_eq!(
            cert.total_bound,
            p.r(1) + p.r(2) + cert.k_term_bound,
            epsilon = 1e-12
        );
        assert_eq!(cert.which, BoundKind::General);
    }

    #[test]
    fn pair_rejects_pure_atoms_and_zero_revenue() {
        let atoms = Dist1D::finite_atoms(&[(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let u = Dist1D::uniform(0.0, 1.0).unwrap();
        assert!(matches!(
            GoodPair::new(atoms, u.clone()),
            Err(BoundError::Dist(DistError::NoDensity))
        ));
    }
}
