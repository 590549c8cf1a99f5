//! Optimal and restricted revenue on finite two-good instances.
//!
//! `rev_lp` computes the unrestricted optimal revenue over all incentive
//! compatible, individually rational (and by default no-positive-transfer)
//! mechanisms by linear programming over one outcome per support point. The
//! quadratic family of incentive rows is handled by row generation: solve with
//! a covering subset, add the most violated rows, and repeat until no row is
//! violated beyond tolerance, so the returned assignment is feasible for the
//! full system.
//!
//! `srev` / `brev` price each good separately / the grand bundle, and
//! `monrev_lp` restricts to payment rules that are nondecreasing in the
//! coordinatewise order (covering-pair rows imply the rest by transitivity).

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::distributions::{Dist1D, DistError, MyersonSolution};
use crate::mechanisms::{Assignment, MenuEntry, MenuMechanism};
use crate::simplex::{LinearProgram, SimplexError, SimplexOptions, WarmStatus};

/// Hard cap on support points; the LP tableau is dense.
pub const MAX_POINTS: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("instance has {got} support points, more than the supported {max}")]
    TooManyPoints { got: usize, max: usize },
    #[error("incentive rows still violated by {residual:.3e} after {rounds} rounds")]
    NotConverged { residual: f64, rounds: usize },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Solver(#[from] SimplexError),
}

/// A finitely supported joint valuation for the two goods.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteJoint {
    points: Vec<((f64, f64), f64)>,
    marginals: Option<(Dist1D, Dist1D)>,
}

impl FiniteJoint {
    /// Arbitrary (possibly correlated) support; exact duplicate points are
    /// merged and probabilities must sum to 1 within 1e-12.
    pub fn from_points(points: &[((f64, f64), f64)]) -> Result<Self, OptError> {
        if points.is_empty() {
            return Err(OptError::BadParams("empty support".into()));
        }
        let mut pts = points.to_vec();
        for &((x1, x2), p) in &pts {
            if !(x1 >= 0.0 && x2 >= 0.0 && x1.is_finite() && x2.is_finite()) {
                return Err(OptError::BadParams(format!("point ({x1}, {x2}) not nonnegative finite")));
            }
            if !(p > 0.0) {
                return Err(OptError::BadParams(format!("probability {p} must be positive")));
            }
        }
        pts.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0).then(a.0 .1.total_cmp(&b.0 .1)));
        let mut merged: Vec<((f64, f64), f64)> = Vec::with_capacity(pts.len());
        for (x, p) in pts {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        if merged.len() > MAX_POINTS {
            return Err(OptError::TooManyPoints { got: merged.len(), max: MAX_POINTS });
        }
        let mass: f64 = merged.iter().map(|p| p.1).sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(OptError::BadParams(format!("probabilities sum to {mass}")));
        }
        Ok(Self { points: merged, marginals: None })
    }

    /// Product of two finitely supported marginals (independent goods).
    pub fn product(d1: &Dist1D, d2: &Dist1D) -> Result<Self, OptError> {
        let a1 = d1
            .as_finite()
            .ok_or_else(|| OptError::BadParams("product requires finite-atom marginals".into()))?;
        let a2 = d2
            .as_finite()
            .ok_or_else(|| OptError::BadParams("product requires finite-atom marginals".into()))?;
        if a1.len() * a2.len() > MAX_POINTS {
            return Err(OptError::TooManyPoints { got: a1.len() * a2.len(), max: MAX_POINTS });
        }
        let mut pts = Vec::with_capacity(a1.len() * a2.len());
        for &(v1, p1) in a1 {
            for &(v2, p2) in a2 {
                pts.push(((v1, v2), p1 * p2));
            }
        }
        let mut joint = Self::from_points(&pts)?;
        joint.marginals = Some((d1.clone(), d2.clone()));
        Ok(joint)
    }

    pub fn points(&self) -> &[((f64, f64), f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_independent(&self) -> bool {
        self.marginals.is_some()
    }

    pub fn product_marginals(&self) -> Option<(&Dist1D, &Dist1D)> {
        self.marginals.as_ref().map(|(a, b)| (a, b))
    }

    /// Projection onto one good (`good` is 1 or 2).
    pub fn marginal(&self, good: u8) -> Result<Dist1D, OptError> {
        if good != 1 && good != 2 {
            return Err(OptError::BadParams(format!("good {good} must be 1 or 2")));
        }
        let pairs: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|&((x1, x2), p)| (if good == 1 { x1 } else { x2 }, p))
            .collect();
        Ok(Dist1D::finite_atoms(&pairs)?)
    }

    /// Scale every valuation of good `i` by `c_i > 0`.
    pub fn scale(&self, c: (f64, f64)) -> Result<Self, OptError> {
        if !(c.0 > 0.0 && c.1 > 0.0) {
            return Err(OptError::BadParams(format!("scale factors {c:?} must be positive")));
        }
        let pts: Vec<((f64, f64), f64)> =
            self.points.iter().map(|&((x1, x2), p)| ((c.0 * x1, c.1 * x2), p)).collect();
        let mut j = Self::from_points(&pts)?;
        j.marginals = None;
        Ok(j)
    }
}

/// Best separate posted prices: one Myerson problem per marginal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparateSolution {
    pub p1: f64,
    pub p2: f64,
    pub value: f64,
}

pub fn srev(joint: &FiniteJoint) -> Result<SeparateSolution, OptError> {
    let m1: MyersonSolution = joint.marginal(1)?.myerson_optimal();
    let m2: MyersonSolution = joint.marginal(2)?.myerson_optimal();
    Ok(SeparateSolution { p1: m1.price, p2: m2.price, value: m1.revenue + m2.revenue })
}

/// Best single posted price for the grand bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BundleSolution {
    pub price: f64,
    pub value: f64,
}

pub fn brev(joint: &FiniteJoint) -> Result<BundleSolution, OptError> {
    let sums: Vec<(f64, f64)> = joint.points.iter().map(|&((x1, x2), p)| (x1 + x2, p)).collect();
    let d = Dist1D::finite_atoms(&sums)?;
    let m = d.myerson_optimal();
    Ok(BundleSolution { price: m.price, value: m.revenue })
}

#[derive(Debug, Clone, Copy)]
pub struct RevOptions {
    /// Enforce nonnegative payments (no positive transfers).
    pub npt: bool,
    /// Feasibility tolerance on incentive rows at termination.
    pub tol: f64,
    /// Instances up to this size get every incentive row up front.
    pub all_pairs_threshold: usize,
    pub max_rounds: usize,
    /// Most-violated rows added per generation round.
    pub batch: usize,
    /// Directed nearest neighbors per point in the seed row set.
    pub seed_neighbors: usize,
    /// Simplex iteration budget per generation round; large degenerate
    /// instances need room to walk off their ties.
    pub max_iter: usize,
}

impl Default for RevOptions {
    fn default() -> Self {
        Self {
            npt: true,
            tol: 1e-9,
            all_pairs_threshold: 24,
            max_rounds: 40,
            batch: 400,
            seed_neighbors: 6,
            max_iter: 2_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RevSolution {
    pub value: f64,
    pub assignment: Assignment,
    pub rounds: usize,
    /// Worst remaining incentive violation over all ordered pairs.
    pub residual_ic: f64,
    /// Total simplex iterations across generation rounds.
    pub iterations: usize,
}

impl RevSolution {
    /// Distinct outcomes as a menu (taxation principle on a finite set).
    pub fn menu(&self) -> Result<MenuMechanism, crate::mechanisms::MechError> {
        let mut seen: BTreeSet<(i64, i64, i64)> = BTreeSet::new();
        let mut entries = Vec::new();
        let key = |v: f64| (v / 1e-9).round() as i64;
        for i in 0..self.assignment.q1.len() {
            let (q1, q2, s) =
                (self.assignment.q1[i], self.assignment.q2[i], self.assignment.payment[i]);
            if seen.insert((key(q1), key(q2), key(s))) {
                entries.push(MenuEntry { q1: q1.clamp(0.0, 1.0), q2: q2.clamp(0.0, 1.0), payment: s });
            }
        }
        MenuMechanism::new(entries)
    }
}

/// Optimal revenue over IC + IR (+ NPT) mechanisms on the joint's support.
pub fn rev_lp(joint: &FiniteJoint, opts: &RevOptions) -> Result<RevSolution, OptError> {
    solve_lp(joint, false, opts)
}

/// Optimal revenue with payments nondecreasing in the coordinatewise order.
pub fn monrev_lp(joint: &FiniteJoint, opts: &RevOptions) -> Result<RevSolution, OptError> {
    solve_lp(joint, true, opts)
}

fn solve_lp(joint: &FiniteJoint, monotone: bool, opts: &RevOptions) -> Result<RevSolution, OptError> {
    let pts = &joint.points;
    let n = pts.len();
    // variable layout: q1_i = i, q2_i = n + i, s+_i = 2n + i, s-_i = 3n + i
    let sp = |i: usize| 2 * n + i;
    let sn = |i: usize| 3 * n + i;
    let nvars = if opts.npt { 3 * n } else { 4 * n };
    let maxsum = pts.iter().map(|&((a, b), _)| a + b).fold(0.0f64, f64::max);

    let mut objective = vec![0.0f64; nvars];
    let mut upper = vec![1.0f64; nvars];
    for (i, &(x, rho)) in pts.iter().enumerate() {
        objective[sp(i)] = rho;
        upper[sp(i)] = x.0 + x.1;
        if !opts.npt {
            objective[sn(i)] = -rho;
            upper[sn(i)] = maxsum;
        }
    }

    // s_i with sign: +1 adds s_i, -1 subtracts
    let push_s = |coeffs: &mut Vec<(usize, f64)>, i: usize, sign: f64| {
        coeffs.push((sp(i), sign));
        if !opts.npt {
            coeffs.push((sn(i), -sign));
        }
    };
    let ir_row = |i: usize| -> Vec<(usize, f64)> {
        let (x, _) = pts[i];
        let mut c = vec![(i, -x.0), (n + i, -x.1)];
        push_s(&mut c, i, 1.0);
        c
    };
    // type i prefers its own outcome to point j's outcome
    let ic_row = |i: usize, j: usize| -> Vec<(usize, f64)> {
        let (x, _) = pts[i];
        let mut c = vec![(j, x.0), (n + j, x.1), (i, -x.0), (n + i, -x.1)];
        push_s(&mut c, j, -1.0);
        push_s(&mut c, i, 1.0);
        c
    };

    let seed: BTreeSet<(usize, usize)> = if n <= opts.all_pairs_threshold {
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect()
    } else {
        neighbor_pairs(pts, opts.seed_neighbors.max(1))
    };
    let covers = if monotone { covering_pairs(pts) } else { Vec::new() };

    let mut active: BTreeSet<(usize, usize)> = seed.clone();
    let mut rounds = 0usize;
    let mut iterations = 0usize;
    let mut warm: Option<Vec<WarmStatus>> = None;
    loop {
        rounds += 1;
        let mut lp = LinearProgram::new(objective.clone(), upper.clone())?;
        for i in 0..n {
            lp.add_row(ir_row(i), 0.0)?;
        }
        for &(i, j) in &covers {
            let mut c = Vec::new();
            push_s(&mut c, i, 1.0);
            push_s(&mut c, j, -1.0);
            lp.add_row(c, 0.0)?;
        }
        let base_rows = lp.num_rows();
        let order: Vec<(usize, usize)> = active.iter().copied().collect();
        for &(i, j) in &order {
            lp.add_row(ic_row(i, j), 0.0)?;
        }
        let simplex_opts = SimplexOptions { tol: opts.tol, max_iter: opts.max_iter };
        let sol = match lp.solve_from(simplex_opts, warm.as_deref()) {
            Ok(s) => s,
            // a stale warm basis is a hint, not a contract; fall back cold
            Err(SimplexError::Degenerate(_) | SimplexError::BadParams(_)) if warm.is_some() => {
                lp.solve(simplex_opts)?
            }
            Err(e) => return Err(e.into()),
        };
        iterations += sol.iterations;

        let mut asn = Assignment::default();
        for i in 0..n {
            asn.q1.push(sol.x[i].clamp(0.0, 1.0));
            asn.q2.push(sol.x[n + i].clamp(0.0, 1.0));
            let mut s = sol.x[sp(i)];
            if !opts.npt {
                s -= sol.x[sn(i)];
            }
            asn.payment.push(s);
        }

        // full scan of the quadratic incentive family
        let u = |i: usize, j: usize| -> f64 {
            let (x, _) = pts[i];
            asn.q1[j] * x.0 + asn.q2[j] * x.1 - asn.payment[j]
        };
        let mut violated: Vec<(f64, usize, usize)> = Vec::new();
        let mut residual = 0.0f64;
        for i in 0..n {
            let own = u(i, i);
            for j in 0..n {
                if i != j {
                    let v = u(i, j) - own;
                    residual = residual.max(v);
                    if v > opts.tol.max(1e-10) && !active.contains(&(i, j)) {
                        violated.push((v, i, j));
                    }
                }
            }
        }

        if violated.is_empty() || residual <= opts.tol.max(1e-9) {
            let value = pts.iter().zip(&asn.payment).map(|(&(_, rho), &s)| rho * s).sum();
            return Ok(RevSolution { value, assignment: asn, rounds, residual_ic: residual, iterations });
        }
        if rounds >= opts.max_rounds {
            return Err(OptError::NotConverged { residual, rounds });
        }

        // keep the seed plus rows that bind now, then add the worst offenders
        let binding: BTreeSet<(usize, usize)> = order
            .iter()
            .enumerate()
            .filter(|&(k, _)| sol.binding.contains(&(base_rows + k)))
            .map(|(_, &p)| p)
            .collect();
        active = seed.union(&binding).copied().collect();
        violated.sort_by(|a, b| b.0.total_cmp(&a.0));
        for &(_, i, j) in violated.iter().take(opts.batch) {
            active.insert((i, j));
        }

        // carry the optimal basis into the next round: dropped rows take
        // their basic slacks with them, surviving rows keep their status,
        // and fresh rows enter on their slacks, so the next solve is a
        // dual-side repair of just the newly added rows
        let kept: BTreeMap<(usize, usize), WarmStatus> = order
            .iter()
            .enumerate()
            .map(|(k, &p)| (p, sol.statuses[nvars + base_rows + k]))
            .collect();
        let mut w = Vec::with_capacity(nvars + base_rows + active.len());
        w.extend_from_slice(&sol.statuses[..nvars + base_rows]);
        for p in &active {
            w.push(kept.get(p).copied().unwrap_or(WarmStatus::Basic));
        }
        warm = Some(w);
    }
}

/// Directed nearest-neighbor pairs in L1 distance, as a covering skeleton for
/// row generation.
fn neighbor_pairs(pts: &[((f64, f64), f64)], k: usize) -> BTreeSet<(usize, usize)> {
    let n = pts.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        let (xi, _) = pts[i];
        let mut by_dist: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let (xj, _) = pts[j];
                ((xi.0 - xj.0).abs() + (xi.1 - xj.1).abs(), j)
            })
            .collect();
        by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, j) in by_dist.iter().take(k) {
            out.insert((i, j));
            out.insert((j, i));
        }
    }
    out
}

/// Covering pairs of the coordinatewise order: `x_i <= x_j`, distinct, with no
/// third point strictly between. Transitivity recovers all comparable pairs.
fn covering_pairs(pts: &[((f64, f64), f64)]) -> Vec<(usize, usize)> {
    let n = pts.len();
    let leq = |a: (f64, f64), b: (f64, f64)| a.0 <= b.0 && a.1 <= b.1;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (xi, _) = pts[i];
            let (xj, _) = pts[j];
            if !leq(xi, xj) || xi == xj {
                continue;
            }
            let covered = (0..n).any(|k| {
                if k == i || k == j {
                    return false;
                }
                let (xk, _) = pts[k];
                leq(xi, xk) && leq(xk, xj) && xk != xi && xk != xj
            });
            if !covered {
                out.push((i, j));
            }
        }
    }
    out
}

/// Side-by-side revenue comparison on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub rev: f64,
    pub srev: f64,
    pub brev: f64,
    /// `srev / rev`, defined as 1 when `rev` is (numerically) zero.
    pub ratio: f64,
    /// `sqrt(e) / (sqrt(e) + 1)`: the guarantee this ratio is measured against.
    pub guarantee: f64,
    pub satisfied: bool,
    pub separate: SeparateSolution,
    pub bundle: BundleSolution,
    pub rounds: usize,
    pub residual_ic: f64,
}

pub fn ratio_report(joint: &FiniteJoint, opts: &RevOptions) -> Result<RatioReport, OptError> {
    let sep = srev(joint)?;
    let bun = brev(joint)?;
    let opt = rev_lp(joint, opts)?;
    let ratio = if opt.value <= 1e-15 { 1.0 } else { sep.value / opt.value };
    let guarantee = crate::guarantee_general();
    Ok(RatioReport {
        rev: opt.value,
        srev: sep.value,
        brev: bun.value,
        ratio,
        guarantee,
        satisfied: ratio >= guarantee - 1e-9,
        separate: sep,
        bundle: bun,
        rounds: opt.rounds,
        residual_ic: opt.residual_ic,
    })
}

/// One record of the random scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub draw: usize,
    pub ratio: f64,
    pub rev: f64,
    pub srev: f64,
    /// Marginal support values (both goods are iid draws of this marginal).
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub worst: ScanRecord,
    pub evaluated: usize,
    /// Every draw, in order, for external traces.
    pub trace: Vec<ScanRecord>,
}

/// Random search for low `srev / rev` ratios over iid two-to-three atom
/// marginals with values in `[0.5, 10]`. Deterministic in `seed`.
pub fn scan_worst_ratio(seed: u64, budget: usize, opts: &RevOptions) -> Result<ScanResult, OptError> {
    if budget == 0 {
        return Err(OptError::BadParams("scan budget must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Vec::with_capacity(budget);
    let mut worst: Option<ScanRecord> = None;
    for draw in 0..budget {
        let k = rng.gen_range(2..=3usize);
        let mut values: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..10.0)).collect();
        values.sort_by(f64::total_cmp);
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let pairs: Vec<(f64, f64)> = values.iter().copied().zip(probs.iter().copied()).collect();
        let marginal = Dist1D::finite_atoms(&pairs)?;
        let joint = FiniteJoint::product(&marginal, &marginal)?;
        let sep = srev(&joint)?;
        let opt = rev_lp(&joint, opts)?;
        let ratio = if opt.value <= 1e-15 { 1.0 } else { sep.value / opt.value };
        let rec = ScanRecord { draw, ratio, rev: opt.value, srev: sep.value, values, probs };
        if worst.as_ref().map_or(true, |w| rec.ratio < w.ratio) {
            worst = Some(rec.clone());
        }
        trace.push(rec);
    }
    Ok(ScanResult { worst: worst.unwrap(), evaluated: budget, trace })
}
