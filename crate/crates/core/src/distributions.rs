//! One-dimensional valuation distributions.
//!
//! A [`Dist1D`] is a nonnegative random valuation given by finite atoms, a
//! piecewise-uniform density, or a parametric family (uniform, exponential,
//! equal-revenue with a finite cap). Every representation exposes the
//! cumulative distribution `F`, the tail `G(t) = P[X >= t]`, the cumulative
//! tail `H(t) = int_0^t G(u) du = E[min(X, t)]`, and the optimal posted-price
//! solution `sup_p p * P[X >= p]`.
//!
//! Atoms at `t` count in `G(t)`, so the posted-price objective attains its
//! supremum at an atom value and `revenue = price * G(price)` holds exactly.

use serde::Serialize;
use thiserror::Error;

use crate::quad;

/// Mass/measure tolerance for constructor invariants.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("distribution has no density representation")]
    NoDensity,
    #[error("density is zero at t = {0}")]
    ZeroDensity(f64),
    #[error("target {target} exceeds the mean {mean}")]
    Unreachable { target: f64, mean: f64 },
    #[error("operation not supported for this representation")]
    UnsupportedRepresentation,
}

/// Optimal posted price and the revenue it earns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MyersonSolution {
    pub price: f64,
    pub revenue: f64,
}

/// Constant-density cell `[lo, hi)` of a piecewise-uniform distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    lo: f64,
    hi: f64,
    kind: CellKind,
}

/// Density shape on a cell. `Const` is the piecewise-uniform case; the other
/// two arise from truncating parametric families.
#[derive(Debug, Clone, Copy, PartialEq)]
enum CellKind {
    /// f(t) = d
    Const(f64),
    /// f(t) = c / t^2  (equal-revenue tail piece)
    InvSquare(f64),
    /// f(t) = amp * exp(-rate * t)
    Exp { amp: f64, rate: f64 },
}

impl Cell {
    fn density(&self, t: f64) -> f64 {
        if t < self.lo || t > self.hi {
            return 0.0;
        }
        match self.kind {
            CellKind::Const(d) => d,
            CellKind::InvSquare(c) => c / (t * t),
            CellKind::Exp { amp, rate } => amp * (-rate * t).exp(),
        }
    }

    /// Mass on `[lo, min(t, hi)]`.
    fn mass_below(&self, t: f64) -> f64 {
        let t = t.clamp(self.lo, self.hi);
        match self.kind {
            CellKind::Const(d) => d * (t - self.lo),
            CellKind::InvSquare(c) => c * (1.0 / self.lo - 1.0 / t),
            CellKind::Exp { amp, rate } => amp / rate * ((-rate * self.lo).exp() - (-rate * t).exp()),
        }
    }

    fn mass(&self) -> f64 {
        self.mass_below(self.hi)
    }

    /// `int_lo^min(t,hi) x f(x) dx`.
    fn first_moment_below(&self, t: f64) -> f64 {
        let t = t.clamp(self.lo, self.hi);
        match self.kind {
            CellKind::Const(d) => d * 0.5 * (t * t - self.lo * self.lo),
            CellKind::InvSquare(c) => c * (t / self.lo).ln(),
            CellKind::Exp { amp, rate } => {
                let g = |x: f64| -(x / rate + 1.0 / (rate * rate)) * (-rate * x).exp();
                amp * (g(t) - g(self.lo))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// Sorted `(value, prob)` pairs with distinct values.
    Atoms(Vec<(f64, f64)>),
    /// Strictly increasing breakpoints; `densities[k]` on `[breaks[k], breaks[k+1])`.
    Piecewise { breaks: Vec<f64>, densities: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    /// Tail `min(r/t, 1)` on `[0, cap]`: density `r/t^2` on `(r, cap)` plus an
    /// atom of mass `r/cap` at the cap.
    EqualRevenue { r: f64, cap: f64 },
    /// General finite mixture of atoms and closed-form cells; produced by
    /// `truncate`.
    Mixed { atoms: Vec<(f64, f64)>, cells: Vec<Cell> },
}

/// A one-dimensional valuation distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist1D {
    repr: Repr,
}

impl Dist1D {
    /// Finite support distribution. Duplicate values are merged; probabilities
    /// must be positive and sum to 1 within [`MASS_TOL`].
    pub fn finite_atoms(pairs: &[(f64, f64)]) -> Result<Self, DistError> {
        if pairs.is_empty() {
            return Err(DistError::BadParams("empty atom list".into()));
        }
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for &(v, p) in pairs {
            if !v.is_finite() || v < 0.0 {
                return Err(DistError::BadParams(format!("atom value {v} not a nonnegative real")));
            }
            if !(p > 0.0 && p <= 1.0 + MASS_TOL) {
                return Err(DistError::BadParams(format!("atom probability {p} outside (0,1]")));
            }
            atoms.push((v, p));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        let mass: f64 = merged.iter().map(|a| a.1).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(DistError::BadParams(format!("atom probabilities sum to {mass}")));
        }
        Ok(Self { repr: Repr::Atoms(merged) })
    }

    pub fn point_mass(v: f64) -> Result<Self, DistError> {
        Self::finite_atoms(&[(v, 1.0)])
    }

    /// Piecewise-uniform density: `densities[k]` on `[breaks[k], breaks[k+1])`.
    pub fn piecewise_uniform(breaks: &[f64], densities: &[f64]) -> Result<Self, DistError> {
        if breaks.len() < 2 || densities.len() + 1 != breaks.len() {
            return Err(DistError::BadParams(format!(
                "need n+1 breakpoints for n densities, got {} and {}",
                breaks.len(),
                densities.len()
            )));
        }
        if breaks[0] < 0.0 || !breaks[0].is_finite() {
            return Err(DistError::BadParams("breakpoints must be nonnegative".into()));
        }
        for w in breaks.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(DistError::BadParams("breakpoints must be strictly increasing".into()));
            }
        }
        if densities.iter().any(|&d| d < 0.0 || !d.is_finite()) {
            return Err(DistError::BadParams("densities must be nonnegative".into()));
        }
        let mass: f64 = breaks
            .windows(2)
            .zip(densities)
            .map(|(w, d)| d * (w[1] - w[0]))
            .sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(DistError::BadParams(format!("density integrates to {mass}")));
        }
        Ok(Self {
            repr: Repr::Piecewise { breaks: breaks.to_vec(), densities: densities.to_vec() },
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistError> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(DistError::BadParams(format!("uniform needs 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { repr: Repr::Uniform { lo, hi } })
    }

    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(DistError::BadParams(format!("exponential rate {rate} must be positive")));
        }
        Ok(Self { repr: Repr::Exponential { rate } })
    }

    /// Equal-revenue distribution with tail `G(t) = min(r/t, 1)` on `[0, cap]`:
    /// every posted price in `[r, cap]` earns exactly `r`. The mass `r/cap`
    /// beyond the cap sits as an atom at the cap, so the mean is finite.
    pub fn equal_revenue(r: f64, cap: f64) -> Result<Self, DistError> {
        if !(r > 0.0 && cap > r && cap.is_finite()) {
            return Err(DistError::BadParams(format!("equal-revenue needs cap > r > 0, got r={r} cap={cap}")));
        }
        Ok(Self { repr: Repr::EqualRevenue { r, cap } })
    }

    fn mixed(atoms: Vec<(f64, f64)>, cells: Vec<Cell>) -> Self {
        debug_assert!({
            let mass: f64 = atoms.iter().map(|a| a.1).sum::<f64>()
                + cells.iter().map(Cell::mass).sum::<f64>();
            (mass - 1.0).abs() < 1e-9
        });
        Self { repr: Repr::Mixed { atoms, cells } }
    }

    /// `P[X <= t]` (right-continuous).
    pub fn cdf(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Atoms(atoms) => atoms.iter().take_while(|a| a.0 <= t).map(|a| a.1).sum(),
            Repr::Piecewise { breaks, densities } => {
                if t <= breaks[0] {
                    return 0.0;
                }
                let mut acc = 0.0;
                for (w, d) in breaks.windows(2).zip(densities) {
                    if t >= w[1] {
                        acc += d * (w[1] - w[0]);
                    } else {
                        acc += d * (t - w[0]);
                        break;
                    }
                }
                acc.min(1.0)
            }
            Repr::Uniform { lo, hi } => ((t - lo) / (hi - lo)).clamp(0.0, 1.0),
            Repr::Exponential { rate } => {
                if t < 0.0 {
                    0.0
                } else {
                    1.0 - (-rate * t).exp()
                }
            }
            Repr::EqualRevenue { r, cap } => {
                if t < *r {
                    0.0
                } else if t < *cap {
                    1.0 - r / t
                } else {
                    1.0
                }
            }
            Repr::Mixed { atoms, cells } => {
                let a: f64 = atoms.iter().filter(|x| x.0 <= t).map(|x| x.1).sum();
                let c: f64 = cells.iter().map(|cell| cell.mass_below(t)).sum();
                (a + c).min(1.0)
            }
        }
    }

    /// Tail probability `G(t) = P[X >= t]`; an atom at `t` counts. Computed
    /// from the top down, so tiny tails keep full relative precision.
    pub fn tail(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Atoms(atoms) => atoms.iter().filter(|a| a.0 >= t).map(|a| a.1).sum(),
            Repr::Piecewise { breaks, densities } => {
                if t <= breaks[0] {
                    return 1.0;
                }
                let mut acc = 0.0;
                for (w, d) in breaks.windows(2).zip(densities).rev() {
                    if t <= w[0] {
                        acc += d * (w[1] - w[0]);
                    } else {
                        if t < w[1] {
                            acc += d * (w[1] - t);
                        }
                        break;
                    }
                }
                acc.min(1.0)
            }
            Repr::Uniform { lo, hi } => ((hi - t) / (hi - lo)).clamp(0.0, 1.0),
            Repr::Exponential { rate } => {
                if t <= 0.0 {
                    1.0
                } else {
                    (-rate * t).exp()
                }
            }
            Repr::EqualRevenue { r, cap } => {
                if t <= *r {
                    1.0
                } else if t <= *cap {
                    r / t
                } else {
                    0.0
                }
            }
            Repr::Mixed { atoms, cells } => {
                let a: f64 = atoms.iter().filter(|x| x.0 >= t).map(|x| x.1).sum();
                let c: f64 = cells.iter().map(|cell| cell.mass() - cell.mass_below(t)).sum();
                (a + c).min(1.0)
            }
        }
    }

    /// Mass of an atom exactly at `t` (0 for continuous representations).
    pub fn atom_at(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Atoms(atoms) => atoms.iter().find(|a| a.0 == t).map_or(0.0, |a| a.1),
            Repr::EqualRevenue { r, cap } => {
                if t == *cap {
                    r / cap
                } else {
                    0.0
                }
            }
            Repr::Mixed { atoms, .. } => atoms.iter().find(|a| a.0 == t).map_or(0.0, |a| a.1),
            _ => 0.0,
        }
    }

    /// Atom list when the distribution is purely atomic, `None` otherwise.
    pub fn as_finite(&self) -> Option<&[(f64, f64)]> {
        match &self.repr {
            Repr::Atoms(a) => Some(a),
            _ => None,
        }
    }

    /// All atoms of the distribution, sorted by value.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match &self.repr {
            Repr::Atoms(atoms) => atoms.clone(),
            Repr::EqualRevenue { r, cap } => vec![(*cap, r / cap)],
            Repr::Mixed { atoms, .. } => atoms.clone(),
            _ => Vec::new(),
        }
    }

    /// Cumulative tail `H(t) = int_0^t G(u) du`, computed by closed-form
    /// accumulation per segment. Equals `E[min(X, t)]`.
    pub fn cumtail(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.repr {
            Repr::Atoms(atoms) => {
                // G is a step function dropping at each atom
                let mut acc = 0.0;
                let mut prev = 0.0;
                let mut tail = 1.0;
                for &(v, p) in atoms {
                    if v >= t {
                        break;
                    }
                    acc += tail * (v - prev);
                    prev = v;
                    tail -= p;
                }
                acc + tail.max(0.0) * (t - prev)
            }
            Repr::Piecewise { breaks, densities } => {
                let mut acc = 0.0;
                let mut prev = 0.0;
                let mut tail = 1.0;
                for (w, &d) in breaks.windows(2).zip(densities) {
                    let (lo, hi) = (w[0], w[1]);
                    if t <= lo {
                        break;
                    }
                    if prev < lo {
                        // gap below the first cell: G constant
                        acc += tail * (lo.min(t) - prev);
                        if t <= lo {
                            break;
                        }
                    }
                    let upto = t.min(hi);
                    let len = upto - lo;
                    // G(u) = tail - d (u - lo) on the cell
                    acc += tail * len - 0.5 * d * len * len;
                    tail -= d * (hi - lo);
                    prev = hi;
                }
                if t > prev {
                    acc += tail.max(0.0) * (t - prev);
                }
                acc
            }
            Repr::Uniform { lo, hi } => {
                if t <= *lo {
                    t
                } else if t <= *hi {
                    t - 0.5 * (t - lo) * (t - lo) / (hi - lo)
                } else {
                    0.5 * (lo + hi)
                }
            }
            Repr::Exponential { rate } => (1.0 - (-rate * t).exp()) / rate,
            Repr::EqualRevenue { r, cap } => {
                if t <= *r {
                    t
                } else {
                    r + r * (t.min(*cap) / r).ln()
                }
            }
            Repr::Mixed { .. } => {
                // E[min(X,t)] = E[X 1{X <= t}] + t P[X > t]
                self.first_moment_below(t) + t * (1.0 - self.cdf(t))
            }
        }
    }

    /// `E[X 1{X <= t}]`.
    fn first_moment_below(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Atoms(atoms) => atoms.iter().take_while(|a| a.0 <= t).map(|a| a.0 * a.1).sum(),
            Repr::Piecewise { breaks, densities } => breaks
                .windows(2)
                .zip(densities)
                .map(|(w, &d)| {
                    let hi = t.clamp(w[0], w[1]);
                    0.5 * d * (hi * hi - w[0] * w[0])
                })
                .sum(),
            Repr::Uniform { lo, hi } => {
                let u = t.clamp(*lo, *hi);
                0.5 * (u * u - lo * lo) / (hi - lo)
            }
            Repr::Exponential { rate } => {
                if t <= 0.0 {
                    0.0
                } else {
                    (1.0 - (-rate * t).exp() * (1.0 + rate * t)) / rate
                }
            }
            Repr::EqualRevenue { r, cap } => {
                let c = Cell { lo: *r, hi: *cap, kind: CellKind::InvSquare(*r) };
                let mut acc = c.first_moment_below(t.max(*r));
                if t >= *cap {
                    acc += cap * (r / cap);
                }
                acc
            }
            Repr::Mixed { atoms, cells } => {
                let a: f64 = atoms.iter().filter(|x| x.0 <= t).map(|x| x.0 * x.1).sum();
                let c: f64 = cells.iter().map(|cell| cell.first_moment_below(t)).sum();
                a + c
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.repr {
            Repr::Exponential { rate } => 1.0 / rate,
            _ => self.first_moment_below(self.support_upper_or(f64::INFINITY)),
        }
    }

    /// Density of the absolutely continuous part at `t`. `None` for a pure
    /// atom representation.
    pub fn density(&self, t: f64) -> Option<f64> {
        match &self.repr {
            Repr::Atoms(_) => None,
            Repr::Piecewise { breaks, densities } => {
                if t < breaks[0] || t >= breaks[breaks.len() - 1] {
                    return Some(0.0);
                }
                let k = match breaks.binary_search_by(|b| b.total_cmp(&t)) {
                    Ok(i) => i.min(densities.len() - 1),
                    Err(i) => i - 1,
                };
                Some(densities[k])
            }
            Repr::Uniform { lo, hi } => {
                Some(if t >= *lo && t < *hi { 1.0 / (hi - lo) } else { 0.0 })
            }
            Repr::Exponential { rate } => Some(if t >= 0.0 { rate * (-rate * t).exp() } else { 0.0 }),
            Repr::EqualRevenue { r, cap } => {
                Some(if t > *r && t <= *cap { r / (t * t) } else { 0.0 })
            }
            Repr::Mixed { cells, .. } => Some(cells.iter().map(|c| c.density(t)).sum()),
        }
    }

    /// Upper end of the support, or `None` when unbounded (exponential).
    pub fn support_upper(&self) -> Option<f64> {
        match &self.repr {
            Repr::Atoms(atoms) => Some(atoms.last().unwrap().0),
            Repr::Piecewise { breaks, .. } => Some(breaks[breaks.len() - 1]),
            Repr::Uniform { hi, .. } => Some(*hi),
            Repr::Exponential { .. } => None,
            Repr::EqualRevenue { cap, .. } => Some(*cap),
            Repr::Mixed { atoms, cells } => {
                let a = atoms.last().map(|x| x.0).unwrap_or(0.0);
                let c = cells.last().map(|x| x.hi).unwrap_or(0.0);
                Some(a.max(c))
            }
        }
    }

    /// Upper support end, with an unbounded tail replaced by a point where the
    /// remaining mass is below 1e-16.
    pub fn support_upper_or(&self, fallback_for_unbounded: f64) -> f64 {
        match (&self.repr, self.support_upper()) {
            (_, Some(hi)) => hi,
            (Repr::Exponential { rate }, None) => {
                if fallback_for_unbounded.is_finite() {
                    fallback_for_unbounded
                } else {
                    40.0 / rate
                }
            }
            (_, None) => fallback_for_unbounded,
        }
    }

    /// Points where the density (or tail) has a kink or jump; used as
    /// mandatory quadrature panel boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Atoms(atoms) => atoms.iter().map(|a| a.0).collect(),
            Repr::Piecewise { breaks, .. } => breaks.clone(),
            Repr::Uniform { lo, hi } => vec![*lo, *hi],
            Repr::Exponential { .. } => vec![0.0],
            Repr::EqualRevenue { r, cap } => vec![*r, *cap],
            Repr::Mixed { atoms, cells } => {
                let mut v: Vec<f64> = atoms.iter().map(|a| a.0).collect();
                for c in cells {
                    v.push(c.lo);
                    v.push(c.hi);
                }
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
        }
    }

    /// Whether the absolutely continuous part carries all mass except possibly
    /// an atom at the support cap. This is what the bound machinery requires.
    pub fn density_with_cap_atom_only(&self) -> bool {
        match &self.repr {
            Repr::Atoms(_) => false,
            Repr::Mixed { atoms, .. } => {
                let hi = self.support_upper().unwrap_or(0.0);
                atoms.iter().all(|a| a.0 == hi)
            }
            _ => true,
        }
    }

    /// Optimal posted price: `sup_p p * P[X >= p]`, smallest optimizer on ties.
    pub fn myerson_optimal(&self) -> MyersonSolution {
        let mut best = MyersonSolution { price: 0.0, revenue: 0.0 };
        // strictly better revenue wins; exact ties go to the smaller price
        let mut consider = |p: f64, rev: f64| {
            if rev > best.revenue || (rev == best.revenue && p < best.price) {
                best = MyersonSolution { price: p, revenue: rev };
            }
        };
        match &self.repr {
            Repr::Atoms(atoms) => {
                for &(v, _) in atoms {
                    consider(v, v * self.tail(v));
                }
            }
            Repr::Uniform { lo, hi } => {
                for p in [*lo, (0.5 * hi).clamp(*lo, *hi)] {
                    consider(p, p * self.tail(p));
                }
            }
            Repr::Exponential { rate } => {
                let p = 1.0 / rate;
                consider(p, p * (-1.0f64).exp());
            }
            Repr::EqualRevenue { r, .. } => {
                consider(*r, *r);
            }
            Repr::Piecewise { breaks, densities } => {
                for (w, &d) in breaks.windows(2).zip(densities) {
                    for p in cell_price_candidates(w[0], w[1], self.tail(w[0]), d) {
                        consider(p, p * self.tail(p));
                    }
                }
                let top = breaks[breaks.len() - 1];
                consider(top, top * self.tail(top));
            }
            Repr::Mixed { atoms, cells } => {
                for &(v, _) in atoms {
                    consider(v, v * self.tail(v));
                }
                for c in cells {
                    match c.kind {
                        CellKind::Const(d) => {
                            for p in cell_price_candidates(c.lo, c.hi, self.tail(c.lo), d) {
                                consider(p, p * self.tail(p));
                            }
                        }
                        _ => {
                            // bracketed scan, then ternary refinement around
                            // the best scanned point of this cell
                            let n = 128;
                            let mut cell_best = (c.lo, c.lo * self.tail(c.lo));
                            for i in 0..=n {
                                let p = c.lo + (c.hi - c.lo) * i as f64 / n as f64;
                                let rev = p * self.tail(p);
                                consider(p, rev);
                                if rev > cell_best.1 {
                                    cell_best = (p, rev);
                                }
                            }
                            let span = (c.hi - c.lo) / n as f64;
                            let mut a = (cell_best.0 - span).max(c.lo);
                            let mut b = (cell_best.0 + span).min(c.hi);
                            for _ in 0..80 {
                                let m1 = a + (b - a) / 3.0;
                                let m2 = b - (b - a) / 3.0;
                                if m1 * self.tail(m1) < m2 * self.tail(m2) {
                                    a = m1;
                                } else {
                                    b = m2;
                                }
                            }
                            let p = 0.5 * (a + b);
                            consider(p, p * self.tail(p));
                        }
                    }
                }
            }
        }
        best
    }

    /// Virtual valuation `t - G(t) / f(t)`.
    pub fn virtual_value(&self, t: f64) -> Result<f64, DistError> {
        let f = self.density(t).ok_or(DistError::NoDensity)?;
        if f <= 0.0 {
            return Err(DistError::ZeroDensity(t));
        }
        Ok(t - self.tail(t) / f)
    }

    /// Semi-decision for weak regularity: the virtual valuation is scanned on
    /// a `grid_n`-point grid (plus all representation breakpoints) and checked
    /// to be nondecreasing with tolerance 1e-9. Points of zero density are
    /// skipped, so monotonicity is enforced across support gaps as well.
    pub fn is_weakly_regular(&self, grid_n: usize) -> Result<bool, DistError> {
        if matches!(self.repr, Repr::Atoms(_)) {
            return Err(DistError::NoDensity);
        }
        let hi = self.support_upper_or(f64::INFINITY);
        let mut grid: Vec<f64> = (0..grid_n.max(2))
            .map(|i| hi * i as f64 / (grid_n.max(2) - 1) as f64)
            .collect();
        for b in self.breakpoints() {
            // probe both sides of each potential density jump
            grid.push(b);
            grid.push((b - 1e-9).max(0.0));
            grid.push(b + 1e-9);
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let mut last: Option<f64> = None;
        for &t in &grid {
            if t > hi {
                continue;
            }
            let f = self.density(t).unwrap_or(0.0);
            if f <= 0.0 {
                continue;
            }
            let vv = t - self.tail(t) / f;
            if let Some(prev) = last {
                if vv < prev - 1e-9 {
                    return Ok(false);
                }
            }
            last = Some(vv);
        }
        Ok(true)
    }

    /// Solve `H(tau) = target` by bisection (`H` is continuous and
    /// nondecreasing). Requires `0 < target <= E[X]`.
    pub fn tau(&self, target: f64) -> Result<f64, DistError> {
        if !(target > 0.0) {
            return Err(DistError::BadParams(format!("tau target {target} must be positive")));
        }
        let mean = self.mean();
        if mean < target {
            return Err(DistError::Unreachable { target, mean });
        }
        let mut hi = self.support_upper_or(f64::INFINITY);
        if !hi.is_finite() {
            hi = 1.0;
            while self.cumtail(hi) < target {
                hi *= 2.0;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let h = self.cumtail(mid);
            if (h - target).abs() <= 1e-10 && (hi - lo) <= 1e-10 * (1.0 + hi) {
                return Ok(mid);
            }
            if h < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `X 1{X <= m}`: mass above `m` moves to an atom at 0.
    pub fn truncate(&self, m: f64) -> Result<Self, DistError> {
        if !(m > 0.0) {
            return Err(DistError::BadParams(format!("truncation level {m} must be positive")));
        }
        if self.support_upper().is_some_and(|hi| hi <= m) {
            return Ok(self.clone());
        }
        match &self.repr {
            Repr::Atoms(atoms) => {
                let mut kept: Vec<(f64, f64)> = Vec::new();
                let mut excess = 0.0;
                for &(v, p) in atoms {
                    if v <= m {
                        kept.push((v, p));
                    } else {
                        excess += p;
                    }
                }
                if excess > 0.0 {
                    kept.insert(0, (0.0, excess));
                }
                Self::finite_atoms(&kept)
            }
            Repr::Piecewise { breaks, densities } => {
                let mut cells = Vec::new();
                for (w, &d) in breaks.windows(2).zip(densities) {
                    if w[0] >= m {
                        break;
                    }
                    if d > 0.0 {
                        cells.push(Cell { lo: w[0], hi: w[1].min(m), kind: CellKind::Const(d) });
                    }
                }
                Ok(finish_truncation(cells, Vec::new()))
            }
            Repr::Uniform { lo, hi } => {
                if m <= *lo {
                    return Self::point_mass(0.0);
                }
                let cells = vec![Cell { lo: *lo, hi: m, kind: CellKind::Const(1.0 / (hi - lo)) }];
                Ok(finish_truncation(cells, Vec::new()))
            }
            Repr::Exponential { rate } => {
                let cells = vec![Cell { lo: 0.0, hi: m, kind: CellKind::Exp { amp: *rate, rate: *rate } }];
                Ok(finish_truncation(cells, Vec::new()))
            }
            Repr::EqualRevenue { r, .. } => {
                if m <= *r {
                    return Self::point_mass(0.0);
                }
                let cells = vec![Cell { lo: *r, hi: m, kind: CellKind::InvSquare(*r) }];
                Ok(finish_truncation(cells, Vec::new()))
            }
            Repr::Mixed { atoms, cells } => {
                let mut kept_cells = Vec::new();
                for c in cells {
                    if c.lo >= m {
                        continue;
                    }
                    let mut cc = *c;
                    cc.hi = cc.hi.min(m);
                    kept_cells.push(cc);
                }
                let kept_atoms: Vec<(f64, f64)> =
                    atoms.iter().copied().filter(|a| a.0 <= m && a.0 > 0.0).collect();
                Ok(finish_truncation(kept_cells, kept_atoms))
            }
        }
    }

    /// Distribution of `X + eps * U` with `U` uniform on `[0, 1]`: each atom
    /// spreads into a density cell of width `eps`; overlapping cells add.
    /// Only defined for the finite-atoms representation.
    pub fn smooth(&self, eps: f64) -> Result<Self, DistError> {
        if !(eps > 0.0) {
            return Err(DistError::BadParams(format!("smoothing width {eps} must be positive")));
        }
        let Repr::Atoms(atoms) = &self.repr else {
            return Err(DistError::UnsupportedRepresentation);
        };
        let mut edges: Vec<f64> = Vec::with_capacity(2 * atoms.len());
        for &(v, _) in atoms {
            edges.push(v);
            edges.push(v + eps);
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let mut densities = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let d: f64 = atoms
                .iter()
                .filter(|&&(v, _)| v <= mid && mid < v + eps)
                .map(|&(_, p)| p / eps)
                .sum();
            densities.push(d);
        }
        // drop zero-density gaps at the ends only; interior gaps are legal cells
        Self::piecewise_uniform(&edges, &densities)
    }

    /// Equal-mass discretization into `n` atoms placed at conditional means.
    /// Finite-atom inputs are returned unchanged.
    pub fn discretize(&self, n: usize) -> Result<Self, DistError> {
        if n == 0 {
            return Err(DistError::BadParams("discretization size must be positive".into()));
        }
        match &self.repr {
            Repr::Atoms(_) => Ok(self.clone()),
            Repr::Mixed { .. } => Err(DistError::UnsupportedRepresentation),
            _ => {
                let atoms = self.atoms();
                // first moment of the absolutely continuous part below t
                let cont_below = |t: f64| -> f64 {
                    self.first_moment_below(t)
                        - atoms.iter().filter(|a| a.0 <= t).map(|a| a.0 * a.1).sum::<f64>()
                };
                let cont_total =
                    self.mean() - atoms.iter().map(|a| a.0 * a.1).sum::<f64>();
                let mass = 1.0 / n as f64;
                let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
                let mut q_lo = 0.0;
                for j in 0..n {
                    let u0 = j as f64 / n as f64;
                    let u1 = (j + 1) as f64 / n as f64;
                    let q_hi =
                        if j + 1 == n { self.support_upper_or(f64::INFINITY) } else { self.quantile(u1) };
                    let value = if q_hi - q_lo <= 1e-13 {
                        // the whole quantile cell sits inside one atom
                        q_hi
                    } else {
                        let below_hi = if q_hi.is_finite() { cont_below(q_hi) } else { cont_total };
                        let mut moment = below_hi - cont_below(q_lo);
                        // apportion each atom by its overlap with (u0, u1] in
                        // quantile space
                        for &(v, p) in &atoms {
                            let f_hi = self.cdf(v);
                            let f_lo = f_hi - p;
                            let overlap = (f_hi.min(u1) - f_lo.max(u0)).max(0.0);
                            moment += v * overlap;
                        }
                        (moment / mass).clamp(q_lo, q_hi.min(f64::MAX))
                    };
                    pairs.push((value, mass));
                    q_lo = q_hi;
                }
                Self::finite_atoms(&pairs)
            }
        }
    }

    /// Generalized inverse `inf { t : F(t) >= u }`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u <= 0.0 {
            return 0.0;
        }
        let mut hi = self.support_upper_or(f64::INFINITY);
        if !hi.is_finite() {
            hi = 1.0;
            while self.cdf(hi) < u {
                hi *= 2.0;
            }
        }
        if self.cdf(hi) < u {
            return hi;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Cumulative tail by quadrature of `G`; the independent cross-check for
    /// [`Dist1D::cumtail`].
    pub fn cumtail_by_quadrature(&self, t: f64) -> f64 {
        quad::integrate(|u| self.tail(u), 0.0, t, &self.breakpoints(), 1e-10)
    }
}

/// Candidate maximizers of `p G(p)` on a constant-density cell: both endpoints
/// plus the interior stationary point of the quadratic.
fn cell_price_candidates(lo: f64, hi: f64, tail_at_lo: f64, density: f64) -> Vec<f64> {
    let mut c = vec![lo, hi];
    if density > 0.0 {
        let p = 0.5 * (tail_at_lo / density + lo);
        if p > lo && p < hi {
            c.push(p);
        }
    }
    c
}

/// Package truncation leftovers: cells plus atoms plus a balancing atom at 0.
fn finish_truncation(cells: Vec<Cell>, mut atoms: Vec<(f64, f64)>) -> Dist1D {
    let kept: f64 = cells.iter().map(Cell::mass).sum::<f64>() + atoms.iter().map(|a| a.1).sum::<f64>();
    let deficit = 1.0 - kept;
    if deficit > 1e-15 {
        atoms.insert(0, (0.0, deficit));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Dist1D::mixed(atoms, cells)
}
