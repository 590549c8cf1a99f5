//! Finite menu mechanisms for a two-good additive buyer.
//!
//! A menu is a finite list of entries `(q1, q2, payment)` with allocations in
//! `[0, 1]`. The buyer of type `x = (x1, x2)` picks an entry maximizing
//! `q1 x1 + q2 x2 - payment`; ties break in the seller's favor (largest
//! payment, then smallest index). The null entry `(0, 0, 0)` is always
//! present, so participation is voluntary and utilities are nonnegative.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechError {
    #[error("allocation {value} for good {good} outside [0, 1]")]
    QOutOfRange { good: u8, value: f64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("assignment length {got} does not match {expected} points")]
    DimMismatch { expected: usize, got: usize },
}

/// One line of a menu: buy the bundle `(q1, q2)` for `payment`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MenuEntry {
    pub q1: f64,
    pub q2: f64,
    pub payment: f64,
}

impl MenuEntry {
    pub const NULL: MenuEntry = MenuEntry { q1: 0.0, q2: 0.0, payment: 0.0 };

    pub fn utility(&self, x: (f64, f64)) -> f64 {
        self.q1 * x.0 + self.q2 * x.1 - self.payment
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MenuMechanism {
    entries: Vec<MenuEntry>,
}

/// Worst violations of the incentive, participation, and no-positive-transfer
/// requirements over a finite type set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncentiveReport {
    /// Largest gain any type gets from picking another type's outcome.
    pub max_ic_violation: f64,
    /// Largest shortfall of a type's utility below zero.
    pub max_ir_violation: f64,
    /// Smallest payment in the assignment.
    pub min_payment: f64,
    pub ok: bool,
}

/// Outcome assigned to each point of a finite type set, parallel arrays.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Assignment {
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub payment: Vec<f64>,
}

/// Constant piece of the diagonal allocation profile: on `[lo, hi)` the type
/// `(t, t)` selects `entry`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalSegment {
    pub lo: f64,
    /// `f64::INFINITY` on the last segment.
    pub hi: f64,
    pub entry: usize,
    pub q1: f64,
    pub q2: f64,
    pub payment: f64,
}

impl MenuMechanism {
    /// Build a menu; the null entry is prepended when missing.
    pub fn new(entries: Vec<MenuEntry>) -> Result<Self, MechError> {
        for e in &entries {
            for (good, q) in [(1u8, e.q1), (2u8, e.q2)] {
                if !(0.0..=1.0).contains(&q) || !q.is_finite() {
                    return Err(MechError::QOutOfRange { good, value: q });
                }
            }
            if !e.payment.is_finite() {
                return Err(MechError::BadParams(format!("payment {} not finite", e.payment)));
            }
        }
        let mut all = Vec::with_capacity(entries.len() + 1);
        if entries.first() != Some(&MenuEntry::NULL) {
            all.push(MenuEntry::NULL);
        }
        all.extend(entries);
        Ok(Self { entries: all })
    }

    /// Posted price for each good separately; the buyer may take any subset.
    pub fn separate_posted(p1: f64, p2: f64) -> Result<Self, MechError> {
        if !(p1.is_finite() && p2.is_finite()) {
            return Err(MechError::BadParams("posted prices must be finite".into()));
        }
        Self::new(vec![
            MenuEntry { q1: 1.0, q2: 0.0, payment: p1 },
            MenuEntry { q1: 0.0, q2: 1.0, payment: p2 },
            MenuEntry { q1: 1.0, q2: 1.0, payment: p1 + p2 },
        ])
    }

    /// Posted price for the grand bundle only.
    pub fn bundle_posted(p: f64) -> Result<Self, MechError> {
        if !p.is_finite() {
            return Err(MechError::BadParams("posted price must be finite".into()));
        }
        Self::new(vec![MenuEntry { q1: 1.0, q2: 1.0, payment: p }])
    }

    pub fn entries(&self) -> &[MenuEntry] {
        &self.entries
    }

    /// Index of the entry a type `x` selects. Ties go to the larger payment,
    /// then the smaller index; comparisons are exact.
    pub fn best_response(&self, x: (f64, f64)) -> usize {
        let mut best = 0usize;
        let mut best_u = self.entries[0].utility(x);
        let mut best_s = self.entries[0].payment;
        for (i, e) in self.entries.iter().enumerate().skip(1) {
            let u = e.utility(x);
            if u > best_u || (u == best_u && e.payment > best_s) {
                best = i;
                best_u = u;
                best_s = e.payment;
            }
        }
        best
    }

    /// Expected payment when each listed type buys its best response.
    pub fn revenue(&self, points: &[((f64, f64), f64)]) -> f64 {
        points
            .iter()
            .map(|&(x, prob)| prob * self.entries[self.best_response(x)].payment)
            .sum()
    }

    /// The outcome function induced on a finite type set.
    pub fn assignment(&self, points: &[((f64, f64), f64)]) -> Assignment {
        let mut a = Assignment::default();
        for &(x, _) in points {
            let e = self.entries[self.best_response(x)];
            a.q1.push(e.q1);
            a.q2.push(e.q2);
            a.payment.push(e.payment);
        }
        a
    }

    /// Multiply the allocation of good `i` by `lambda_i` (a change of units:
    /// selling `(q1 lambda1, q2 lambda2)` to `x` is selling `(q1, q2)` to
    /// `(lambda1 x1, lambda2 x2)`).
    pub fn rescale(&self, lambda: (f64, f64)) -> Result<Self, MechError> {
        if !(lambda.0 > 0.0 && lambda.1 > 0.0) {
            return Err(MechError::BadParams(format!("scale factors {lambda:?} must be positive")));
        }
        let scaled: Vec<MenuEntry> = self
            .entries
            .iter()
            .skip(1)
            .map(|e| MenuEntry { q1: e.q1 * lambda.0, q2: e.q2 * lambda.1, payment: e.payment })
            .collect();
        Self::new(scaled)
    }

    /// Cut every payment by the factor `1 - alpha`.
    pub fn discount(&self, alpha: f64) -> Result<Self, MechError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(MechError::BadParams(format!("discount {alpha} outside [0, 1]")));
        }
        let cut: Vec<MenuEntry> = self
            .entries
            .iter()
            .skip(1)
            .map(|e| MenuEntry { payment: (1.0 - alpha) * e.payment, ..*e })
            .collect();
        Self::new(cut)
    }

    /// Allocation profile along the diagonal `x = (t, t)`: the utility of each
    /// entry is a line `(q1 + q2) t - payment`, so the selected entry follows
    /// the upper envelope of lines and switch points are exact intersections.
    pub fn diagonal_profile(&self) -> Vec<DiagonalSegment> {
        // (slope, intercept, index); for equal slopes only the entry with the
        // highest intercept (lowest payment) can ever win utility
        let mut lines: Vec<(f64, f64, usize)> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.q1 + e.q2, -e.payment, i))
            .collect();
        lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
        lines.dedup_by_key(|l| l.0);

        // convex-hull pass: keep lines that win on a nonempty interval
        let mut hull: Vec<(f64, f64, usize)> = Vec::new();
        let mut starts: Vec<f64> = Vec::new(); // start abscissa of each hull line
        for l in lines {
            loop {
                match hull.last() {
                    None => {
                        hull.push(l);
                        starts.push(f64::NEG_INFINITY);
                        break;
                    }
                    Some(&top) => {
                        // intersection with the current top line
                        let t = (top.1 - l.1) / (l.0 - top.0);
                        if t <= *starts.last().unwrap() {
                            hull.pop();
                            starts.pop();
                        } else {
                            hull.push(l);
                            starts.push(t);
                            break;
                        }
                    }
                }
            }
        }

        let mut segs = Vec::new();
        for (k, &(_, _, idx)) in hull.iter().enumerate() {
            let lo = starts[k].max(0.0);
            let hi = if k + 1 < hull.len() { starts[k + 1] } else { f64::INFINITY };
            if hi <= 0.0 || hi <= lo {
                continue; // the line only wins at negative diagonal values
            }
            let e = self.entries[idx];
            segs.push(DiagonalSegment { lo, hi, entry: idx, q1: e.q1, q2: e.q2, payment: e.payment });
        }
        segs
    }
}

/// Check incentive compatibility, individual rationality, and no positive
/// transfers of an arbitrary outcome assignment on a finite type set.
pub fn verify_ic_ir_npt(
    points: &[((f64, f64), f64)],
    asn: &Assignment,
    tol: f64,
) -> Result<IncentiveReport, MechError> {
    let n = points.len();
    if asn.q1.len() != n || asn.q2.len() != n || asn.payment.len() != n {
        return Err(MechError::DimMismatch { expected: n, got: asn.q1.len() });
    }
    let u = |i: usize, j: usize| -> f64 {
        let (x, _) = points[i];
        asn.q1[j] * x.0 + asn.q2[j] * x.1 - asn.payment[j]
    };
    let mut max_ic: f64 = 0.0;
    let mut max_ir: f64 = 0.0;
    let mut min_payment = f64::INFINITY;
    for i in 0..n {
        let own = u(i, i);
        max_ir = max_ir.max(-own);
        min_payment = min_payment.min(asn.payment[i]);
        for j in 0..n {
            if j != i {
                max_ic = max_ic.max(u(i, j) - own);
            }
        }
    }
    if n == 0 {
        min_payment = 0.0;
    }
    Ok(IncentiveReport {
        max_ic_violation: max_ic,
        max_ir_violation: max_ir,
        min_payment,
        ok: max_ic <= tol && max_ir <= tol && min_payment >= -tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid_points(n: usize, hi: f64) -> Vec<((f64, f64), f64)> {
        let mut pts = Vec::new();
        let p = 1.0 / (n * n) as f64;
        for i in 0..n {
            for j in 0..n {
                pts.push(((hi * i as f64 / (n - 1) as f64, hi * j as f64 / (n - 1) as f64), p));
            }
        }
        pts
    }

    #[test]
    fn null_entry_always_present() {
        let m = MenuMechanism::new(vec![MenuEntry { q1: 1.0, q2: 0.0, payment: 2.0 }]).unwrap();
        assert_eq!(m.entries()[0], MenuEntry::NULL);
        assert_eq!(m.entries().len(), 2);
        // low types stay out
        assert_eq!(m.best_response((0.5, 0.5)), 0);
    }

    #[test]
    fn best_response_separate_prices() {
        let m = MenuMechanism::separate_posted(0.5, 0.25).unwrap();
        // entries: 0 null, 1 good1@0.5, 2 good2@0.25, 3 both@0.75
        assert_eq!(m.best_response((0.6, 0.1)), 1);
        assert_eq!(m.best_response((0.1, 0.6)), 2);
        assert_eq!(m.best_response((0.6, 0.3)), 3);
        assert_eq!(m.best_response((0.1, 0.1)), 0);
    }

    #[test]
    fn ties_break_toward_larger_payment() {
        let m = MenuMechanism::new(vec![MenuEntry { q1: 1.0, q2: 0.0, payment: 1.0 }]).unwrap();
        // at x1 = 1 buying and not buying both give utility 0
        assert_eq!(m.best_response((1.0, 0.0)), 1);
        // a strictly worse option is still refused
        assert_eq!(m.best_response((1.0 - 1e-12, 0.0)), 0);
    }

    #[test]
    fn tie_on_payment_takes_smaller_index() {
        let m = MenuMechanism::new(vec![
            MenuEntry { q1: 1.0, q2: 0.0, payment: 0.5 },
            MenuEntry { q1: 0.0, q2: 1.0, payment: 0.5 },
        ])
        .unwrap();
        assert_eq!(m.best_response((0.7, 0.7)), 1);
    }

    #[test]
    fn revenue_on_grid() {
        let m = MenuMechanism::bundle_posted(1.0).unwrap();
        let pts = vec![(((0.3, 0.3)), 0.5), (((0.8, 0.8)), 0.5)];
        // only the high type buys
        assert_abs_diff_eq!(m.revenue(&pts), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn menu_assignment_is_incentive_compatible() {
        let m = MenuMechanism::separate_posted(0.5, 0.25).unwrap();
        let pts = grid_points(7, 1.0);
        let rep = verify_ic_ir_npt(&pts, &m.assignment(&pts), 1e-12).unwrap();
        assert!(rep.ok, "{rep:?}");
        assert_eq!(rep.max_ic_violation, 0.0);
        assert!(rep.min_payment >= 0.0);
    }

    #[test]
    fn verify_flags_bad_assignment() {
        let pts = vec![(((0.0, 0.0)), 0.5), (((1.0, 1.0)), 0.5)];
        // charge the low type for nothing: IR violated
        let asn = Assignment {
            q1: vec![0.0, 1.0],
            q2: vec![0.0, 1.0],
            payment: vec![0.3, 1.0],
        };
        let rep = verify_ic_ir_npt(&pts, &asn, 1e-9).unwrap();
        assert!(!rep.ok);
        assert_abs_diff_eq!(rep.max_ir_violation, 0.3);
    }

    #[test]
    fn dim_mismatch_detected() {
        let pts = vec![(((0.0, 0.0)), 1.0)];
        let asn = Assignment::default();
        assert!(matches!(verify_ic_ir_npt(&pts, &asn, 1e-9), Err(MechError::DimMismatch { .. })));
    }

    #[test]
    fn rescale_bounds_checked() {
        let m = MenuMechanism::bundle_posted(1.0).unwrap();
        assert!(m.rescale((0.5, 0.25)).is_ok());
        assert!(matches!(m.rescale((1.5, 1.0)), Err(MechError::QOutOfRange { .. })));
    }

    #[test]
    fn rescale_change_of_units() {
        let m = MenuMechanism::separate_posted(0.4, 0.7).unwrap();
        let lam = (0.5, 0.25);
        let scaled = m.rescale(lam).unwrap();
        for x in [(0.3, 0.9), (1.0, 2.0), (2.5, 0.1), (1.6, 2.8)] {
            let via_scaled = scaled.entries()[scaled.best_response(x)].payment;
            let via_values = m.entries()[m.best_response((lam.0 * x.0, lam.1 * x.1))].payment;
            assert_eq!(via_scaled, via_values);
        }
    }

    #[test]
    fn discount_cuts_payments() {
        let m = MenuMechanism::separate_posted(0.5, 0.25).unwrap();
        let d = m.discount(0.2).unwrap();
        assert_abs_diff_eq!(d.entries()[3].payment, 0.6, epsilon = 1e-15);
        assert!(m.discount(1.5).is_err());
    }

    #[test]
    fn diagonal_profile_separate_prices() {
        let m = MenuMechanism::separate_posted(0.5, 0.25).unwrap();
        let segs = m.diagonal_profile();
        // null until 0.25, good 2 alone until 0.5, then the whole bundle
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0].entry, 0);
        assert_abs_diff_eq!(segs[0].hi, 0.25, epsilon = 1e-15);
        assert_eq!((segs[1].q1, segs[1].q2), (0.0, 1.0));
        assert_abs_diff_eq!(segs[1].hi, 0.5, epsilon = 1e-15);
        assert_eq!((segs[2].q1, segs[2].q2), (1.0, 1.0));
        assert_eq!(segs[2].hi, f64::INFINITY);
    }

    #[test]
    fn diagonal_profile_matches_best_response() {
        let m = MenuMechanism::new(vec![
            MenuEntry { q1: 0.3, q2: 0.1, payment: 0.05 },
            MenuEntry { q1: 0.9, q2: 0.2, payment: 0.31 },
            MenuEntry { q1: 1.0, q2: 1.0, payment: 1.4 },
            MenuEntry { q1: 0.2, q2: 0.2, payment: 0.07 },
        ])
        .unwrap();
        let segs = m.diagonal_profile();
        for seg in &segs {
            let hi = if seg.hi.is_finite() { seg.hi } else { seg.lo + 2.0 };
            // strictly interior probes: at the exact switch point the tie can
            // resolve either way in floating point
            for frac in [0.05, 0.5, 0.95] {
                let t = seg.lo + frac * (hi - seg.lo);
                let picked = m.best_response((t, t));
                let expect = m.entries()[seg.entry];
                let got = m.entries()[picked];
                assert_abs_diff_eq!(got.utility((t, t)), expect.utility((t, t)), epsilon = 1e-12);
                assert_abs_diff_eq!(got.payment, expect.payment, epsilon = 1e-12);
            }
        }
        // q1 + q2 never decreases along the diagonal
        for w in segs.windows(2) {
            assert!(w[1].q1 + w[1].q2 >= w[0].q1 + w[0].q2 - 1e-12);
        }
    }
}
