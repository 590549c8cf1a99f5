//! Bounded-variable primal simplex in revised form.
//!
//! Solves `max c.x` subject to `A x <= b`, `0 <= x_j <= u_j` with `b >= 0`,
//! so the all-slack basis is always a valid start. Upper bounds are handled by
//! nonbasic-at-upper status and bound flips rather than extra rows.
//!
//! Design notes, in rough order of importance:
//!
//! - The incentive systems this crate generates are huge, extremely sparse
//!   and extremely degenerate (most right-hand sides are zero, so every row is
//!   tight at the origin). A dense tableau accumulates roundoff over the many
//!   thousands of pivots these systems need and eventually returns infeasible
//!   answers, so the solver instead keeps a factorization of the basis that is
//!   rebuilt from the original data every few hundred pivots. Basic slacks
//!   make the basis block-triangular; only the small core of rows and columns
//!   occupied by structural variables is LU-factored, and pivots between
//!   rebuilds are applied as product-form (eta) updates.
//! - Reduced costs are recomputed from the factorization at every iteration
//!   rather than updated incrementally, so pricing errors cannot compound.
//! - Pricing is Devex: candidate columns are ranked by squared reduced cost
//!   over a reference weight that tracks how much the column has rotated
//!   since the last refactorization. On the degenerate systems here it needs
//!   a small fraction of the pivots that largest-coefficient pricing takes.
//! - Degenerate stalling is broken by perturbation: basic values get small
//!   row-distinct nudges whenever a run of zero-length steps is detected.
//!   Since the perturbation only ever relaxes the current basis, feasibility
//!   is preserved; the exact right-hand sides are restored at the end and the
//!   few resulting infeasibilities repaired with dual simplex steps, which
//!   keep the reduced costs optimal. Bland's rule remains as the fallback of
//!   last resort if a stall survives perturbation.
//! - The ratio test is a two-pass Harris variant: find the tightest step,
//!   then pick the best-conditioned pivot among rows within a tiny window of
//!   it, snapping the leaving variable to its bound.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error("bad linear program: {0}")]
    BadParams(String),
    #[error("objective unbounded above")]
    Unbounded,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Degenerate(String),
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Optimality / feasibility tolerance on reduced costs and basic values.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 200_000 }
    }
}

/// Where a variable sits in an optimal basis, reported per column of
/// `[A | I]` (structural variables first, then one slack per row). Feeding
/// the statuses of a related program back into [`LinearProgram::solve_from`]
/// warm-starts the solve from that basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarmStatus {
    Lower,
    Upper,
    Basic,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Indices of rows with zero slack at the optimum.
    pub binding: Vec<usize>,
    pub iterations: usize,
    /// Basis membership of every column, reusable as a warm start.
    pub statuses: Vec<WarmStatus>,
}

/// `max c.x` with rows `a.x <= rhs` and box bounds `0 <= x <= upper`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    upper: Vec<f64>, // f64::INFINITY when unbounded
    rows: Vec<(Vec<(usize, f64)>, f64)>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, upper: Vec<f64>) -> Result<Self, SimplexError> {
        if objective.len() != upper.len() {
            return Err(SimplexError::BadParams(format!(
                "objective has {} entries but bounds have {}",
                objective.len(),
                upper.len()
            )));
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(SimplexError::BadParams("objective must be finite".into()));
        }
        if upper.iter().any(|&u| u.is_nan() || u < 0.0) {
            return Err(SimplexError::BadParams("upper bounds must be nonnegative".into()));
        }
        Ok(Self { n: objective.len(), objective, upper, rows: Vec::new() })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Add `sum coeffs.x <= rhs`; `rhs` must be nonnegative so that `x = 0`
    /// stays feasible. Returns the row index.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> Result<usize, SimplexError> {
        if !(rhs >= 0.0) || !rhs.is_finite() {
            return Err(SimplexError::BadParams(format!(
                "row rhs {rhs} must be finite and nonnegative"
            )));
        }
        for &(j, a) in &coeffs {
            if j >= self.n {
                return Err(SimplexError::BadParams(format!("column {j} out of range")));
            }
            if !a.is_finite() {
                return Err(SimplexError::BadParams("row coefficient must be finite".into()));
            }
        }
        self.rows.push((coeffs, rhs));
        Ok(self.rows.len() - 1)
    }

    pub fn solve(&self, opts: SimplexOptions) -> Result<Solution, SimplexError> {
        self.solve_from(opts, None)
    }

    /// Solve starting from the basis described by `warm` (one status per
    /// column of `[A | I]`), typically the `statuses` of a previous solution
    /// of a related program. The basis must select exactly one column per
    /// row; primal infeasibility is fine and is repaired by dual steps, which
    /// is what makes re-solving after adding violated rows cheap.
    pub fn solve_from(
        &self,
        opts: SimplexOptions,
        warm: Option<&[WarmStatus]>,
    ) -> Result<Solution, SimplexError> {
        let mut s = Solver::new(self, warm)?;
        s.refresh()?;
        // a warm basis is dual-feasible but usually primal-infeasible; let
        // dual steps repair it before pricing (a cold start exits at once)
        match s.dual(opts) {
            Ok(()) | Err(SimplexError::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
        let mut settled = false;
        for cycle in 0..6 {
            s.primal(opts)?;
            // drop the perturbation: recompute basic values from the original
            // right-hand sides, then repair the leftovers with dual steps (the
            // reduced costs stay optimal, so termination means optimality --
            // unless a singular-basis repair intervened, which both phases
            // survive but which voids that argument; detect and go around
            s.repairs = 0;
            s.refresh()?;
            let cleaned = match s.dual(opts) {
                Ok(()) => true,
                // a repair during dual can strand it without an eligible
                // pivot; the next primal pass restores dual feasibility
                Err(SimplexError::Degenerate(_)) if cycle < 5 => false,
                Err(e) => return Err(e),
            };
            if cleaned && s.repairs == 0 && s.optimal(opts.tol * 10.0) {
                settled = true;
                break;
            }
        }
        if !settled {
            return Err(SimplexError::Degenerate(
                "primal/dual cleanup failed to settle".into(),
            ));
        }
        let sol = s.extract(opts.tol);
        if cfg!(debug_assertions) {
            for (i, (coeffs, rhs)) in self.rows.iter().enumerate() {
                let lhs: f64 = coeffs.iter().map(|&(j, a)| a * sol.x[j]).sum();
                debug_assert!(
                    lhs <= rhs + 1e-6 * (1.0 + rhs.abs()),
                    "solution violates row {i}: {lhs} > {rhs}"
                );
            }
        }
        Ok(sol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarStatus {
    Lower,
    Upper,
    Basic(usize),
}

/// Dense LU factorization with partial pivoting, `P A = L U`.
struct Lu {
    t: usize,
    a: Vec<f64>, // packed L (unit diagonal, below) and U (on and above)
    perm: Vec<usize>,
}

impl Lu {
    /// On a pivot smaller than the singularity threshold, reports the failing
    /// elimination step `k` and the first uneliminated core row `perm[k]` so
    /// the caller can swap the offending column for that row's slack.
    fn factor(mut a: Vec<f64>, t: usize) -> Result<Self, (usize, usize)> {
        let mut perm: Vec<usize> = (0..t).collect();
        for k in 0..t {
            let mut p = k;
            let mut best = a[perm[k] * t + k].abs();
            for r in k + 1..t {
                let v = a[perm[r] * t + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < 1e-11 {
                return Err((k, perm[k]));
            }
            perm.swap(k, p);
            let pk = perm[k];
            let inv = 1.0 / a[pk * t + k];
            for r in k + 1..t {
                let pr = perm[r];
                let f = a[pr * t + k] * inv;
                if f != 0.0 {
                    a[pr * t + k] = f;
                    for c in k + 1..t {
                        a[pr * t + c] -= f * a[pk * t + c];
                    }
                } else {
                    a[pr * t + k] = 0.0;
                }
            }
        }
        Ok(Self { t, a, perm })
    }

    /// Solve `A x = v` in place (`v` in original row order).
    fn solve(&self, v: &mut [f64]) {
        let t = self.t;
        let mut y = vec![0.0; t];
        for k in 0..t {
            let mut s = v[self.perm[k]];
            for c in 0..k {
                s -= self.a[self.perm[k] * t + c] * y[c];
            }
            y[k] = s;
        }
        for k in (0..t).rev() {
            let mut s = y[k];
            for c in k + 1..t {
                s -= self.a[self.perm[k] * t + c] * v[c];
            }
            v[k] = s / self.a[self.perm[k] * t + k];
        }
    }

    /// Solve `A^T x = v` in place.
    fn solve_t(&self, v: &mut [f64]) {
        let t = self.t;
        // U^T y = v (forward), then L^T z = y (backward), x = P^T z
        let mut y = vec![0.0; t];
        for k in 0..t {
            let mut s = v[k];
            for c in 0..k {
                s -= self.a[self.perm[c] * t + k] * y[c];
            }
            y[k] = s / self.a[self.perm[k] * t + k];
        }
        let mut z = vec![0.0; t];
        for k in (0..t).rev() {
            let mut s = y[k];
            for c in k + 1..t {
                s -= self.a[self.perm[c] * t + k] * z[c];
            }
            z[k] = s;
        }
        for k in 0..t {
            v[self.perm[k]] = z[k];
        }
    }
}

/// Product-form update: after a pivot on slot `r` with entering column
/// `alpha = Binv A_e`, the new inverse is `E^-1 Binv` where `E` is the
/// identity with column `r` replaced by `alpha`.
struct Eta {
    r: usize,
    alpha: Vec<f64>,
}

const REFRESH_EVERY: usize = 150;

struct Solver<'a> {
    lp: &'a LinearProgram,
    m: usize,
    width: usize,
    /// Column-major copy of the structural part of `A`.
    cols: Vec<Vec<(u32, f64)>>,
    basis: Vec<usize>, // slot -> variable
    status: Vec<VarStatus>,
    xb: Vec<f64>, // slot -> value of basis[slot]
    // factorization state, rebuilt by `refresh`; the slot layout is frozen
    // at refresh time because the etas express later pivots relative to it
    t_slots: Vec<usize>,        // slots holding structural variables, M column order
    t_vars: Vec<usize>,         // the structural variable in each of those slots
    s_slots: Vec<(usize, usize)>, // (slot, row) pairs for basic slacks
    f_rows: Vec<usize>,         // rows not owned by a basic slack, M row order
    lu: Option<Lu>,             // t x t core; None when t == 0
    etas: Vec<Eta>,
    iterations: usize,
    repairs: usize, // singular-basis repairs since the last solve-level check
}

impl<'a> Solver<'a> {
    fn new(lp: &'a LinearProgram, warm: Option<&[WarmStatus]>) -> Result<Self, SimplexError> {
        let m = lp.rows.len();
        let n = lp.n;
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (i, (coeffs, _)) in lp.rows.iter().enumerate() {
            for &(j, a) in coeffs {
                cols[j].push((i as u32, a));
            }
        }
        let mut status = vec![VarStatus::Lower; n + m];
        let mut basis = vec![0usize; m];
        match warm {
            None => {
                for i in 0..m {
                    status[n + i] = VarStatus::Basic(i);
                    basis[i] = n + i;
                }
            }
            Some(w) => {
                if w.len() != n + m {
                    return Err(SimplexError::BadParams(format!(
                        "warm start has {} statuses for {} columns",
                        w.len(),
                        n + m
                    )));
                }
                let mut slot = 0usize;
                for (j, &s) in w.iter().enumerate() {
                    match s {
                        WarmStatus::Basic => {
                            if slot == m {
                                return Err(SimplexError::BadParams(
                                    "warm start selects too many basic columns".into(),
                                ));
                            }
                            status[j] = VarStatus::Basic(slot);
                            basis[slot] = j;
                            slot += 1;
                        }
                        WarmStatus::Upper => {
                            if !lp.upper.get(j).is_some_and(|u| u.is_finite()) {
                                return Err(SimplexError::BadParams(format!(
                                    "warm start puts column {j} at a missing upper bound"
                                )));
                            }
                            status[j] = VarStatus::Upper;
                        }
                        WarmStatus::Lower => {}
                    }
                }
                if slot != m {
                    return Err(SimplexError::BadParams(format!(
                        "warm start selects {slot} basic columns for {m} rows"
                    )));
                }
            }
        }
        Ok(Self {
            lp,
            m,
            width: n + m,
            cols,
            basis,
            status,
            xb: vec![0.0; m],
            t_slots: Vec::new(),
            t_vars: Vec::new(),
            s_slots: Vec::new(),
            f_rows: Vec::new(),
            lu: None,
            etas: Vec::new(),
            iterations: 0,
            repairs: 0,
        })
    }

    fn ub(&self, j: usize) -> f64 {
        if j < self.lp.n {
            self.lp.upper[j]
        } else {
            f64::INFINITY
        }
    }

    /// Rebuild the factorization from the original data and recompute `xb`
    /// exactly. Any injected perturbation vanishes here.
    ///
    /// A numerically singular basis is repaired rather than reported: the
    /// structural column at the failing elimination step is a near-linear
    /// combination of its predecessors, so it is demoted to nonbasic at zero
    /// and the slack of the first unspanned row takes its slot. Each repair
    /// removes one structural column, so the loop terminates. Repairs can
    /// discard primal progress and perturb optimality; `solve` re-runs the
    /// primal/dual pair until a repair-free pass confirms the optimum.
    fn refresh(&mut self) -> Result<(), SimplexError> {
        let n = self.lp.n;
        let m = self.m;
        self.etas.clear();
        loop {
            self.t_slots.clear();
            self.t_vars.clear();
            self.s_slots.clear();
            let mut slack_rows = vec![false; m];
            for slot in 0..m {
                let v = self.basis[slot];
                if v >= n {
                    slack_rows[v - n] = true;
                    self.s_slots.push((slot, v - n));
                } else {
                    self.t_slots.push(slot);
                    self.t_vars.push(v);
                }
            }
            self.f_rows = (0..m).filter(|&i| !slack_rows[i]).collect();
            let t = self.t_slots.len();
            if t != self.f_rows.len() {
                return Err(SimplexError::Degenerate("basis lost a row".into()));
            }
            if t == 0 {
                self.lu = None;
                break;
            }
            let mut row_of: Vec<i32> = vec![-1; m];
            for (fi, &row) in self.f_rows.iter().enumerate() {
                row_of[row] = fi as i32;
            }
            let mut mat = vec![0.0f64; t * t];
            for (tj, &var) in self.t_vars.iter().enumerate() {
                for &(row, a) in &self.cols[var] {
                    let fi = row_of[row as usize];
                    if fi >= 0 {
                        mat[fi as usize * t + tj] = a;
                    }
                }
            }
            match Lu::factor(mat, t) {
                Ok(lu) => {
                    self.lu = Some(lu);
                    break;
                }
                Err((k, core_row)) => {
                    let var = self.t_vars[k];
                    let slot = self.t_slots[k];
                    let slack = n + self.f_rows[core_row];
                    self.status[var] = VarStatus::Lower;
                    self.basis[slot] = slack;
                    self.status[slack] = VarStatus::Basic(slot);
                    self.repairs += 1;
                }
            }
        }

        // exact basic values: xb = Binv (b - sum_(j at upper) A_j u_j)
        let mut v = vec![0.0f64; m];
        for (i, (_, rhs)) in self.lp.rows.iter().enumerate() {
            v[i] = *rhs;
        }
        for j in 0..n {
            if self.status[j] == VarStatus::Upper {
                let u = self.lp.upper[j];
                for &(row, a) in &self.cols[j] {
                    v[row as usize] -= a * u;
                }
            }
        }
        self.xb = self.ftran(&v);
        Ok(())
    }

    /// `Binv v`: `v` in row space, result in slot space. The base solve uses
    /// the frozen refresh-time layout; etas bring it up to the current basis.
    fn ftran(&self, v: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut z = vec![0.0f64; m];
        let mut zt: Vec<f64> = self.f_rows.iter().map(|&i| v[i]).collect();
        if let Some(lu) = &self.lu {
            lu.solve(&mut zt);
        }
        // structural slots take the core solution; slack slots absorb the rest
        let mut acc = vec![0.0f64; m];
        for (tj, &slot) in self.t_slots.iter().enumerate() {
            z[slot] = zt[tj];
            if zt[tj] != 0.0 {
                for &(row, a) in &self.cols[self.t_vars[tj]] {
                    acc[row as usize] += a * zt[tj];
                }
            }
        }
        for &(slot, row) in &self.s_slots {
            z[slot] = v[row] - acc[row];
        }
        for eta in &self.etas {
            let zr = z[eta.r] / eta.alpha[eta.r];
            if zr != 0.0 {
                for (zi, ai) in z.iter_mut().zip(eta.alpha.iter()) {
                    *zi -= ai * zr;
                }
            }
            z[eta.r] = zr;
        }
        z
    }

    /// `v^T Binv`: `v` in slot space, result in row space.
    fn btran(&self, v: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut w = v.to_vec();
        for eta in self.etas.iter().rev() {
            let dot: f64 = w.iter().zip(eta.alpha.iter()).map(|(a, b)| a * b).sum();
            w[eta.r] = (w[eta.r] - (dot - w[eta.r] * eta.alpha[eta.r])) / eta.alpha[eta.r];
        }
        let mut y = vec![0.0f64; m];
        for &(slot, row) in &self.s_slots {
            y[row] = w[slot];
        }
        let t = self.t_slots.len();
        if t > 0 {
            let mut rhs = vec![0.0f64; t];
            for (tj, &slot) in self.t_slots.iter().enumerate() {
                let mut s = w[slot];
                for &(row, a) in &self.cols[self.t_vars[tj]] {
                    s -= a * y[row as usize];
                }
                rhs[tj] = s;
            }
            self.lu.as_ref().unwrap().solve_t(&mut rhs);
            for (fi, &row) in self.f_rows.iter().enumerate() {
                y[row] = rhs[fi];
            }
        }
        y
    }

    /// Column `j` of `[A | I]` as a dense row-space vector.
    fn column(&self, j: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.m, 0.0);
        if j < self.lp.n {
            for &(row, a) in &self.cols[j] {
                out[row as usize] = a;
            }
        } else {
            out[j - self.lp.n] = 1.0;
        }
    }

    /// Row `r` of `Binv [A | I]` for nonbasic columns; entries under basic
    /// structural columns are left at zero since no caller reads them.
    fn pivot_row(&self, r: usize) -> Vec<f64> {
        let mut er = vec![0.0f64; self.m];
        er[r] = 1.0;
        let rho = self.btran(&er);
        let n = self.lp.n;
        let mut trow = vec![0.0f64; self.width];
        for j in 0..n {
            if matches!(self.status[j], VarStatus::Basic(_)) {
                continue;
            }
            let mut s = 0.0;
            for &(row, a) in &self.cols[j] {
                s += rho[row as usize] * a;
            }
            trow[j] = s;
        }
        for i in 0..self.m {
            trow[n + i] = rho[i];
        }
        trow
    }

    /// Reduced costs of every column from scratch: `d = c - y^T [A | I]`.
    fn reduced_costs(&self) -> Vec<f64> {
        let n = self.lp.n;
        let cb: Vec<f64> = self
            .basis
            .iter()
            .map(|&v| if v < n { self.lp.objective[v] } else { 0.0 })
            .collect();
        let y = self.btran(&cb);
        let mut d = vec![0.0f64; self.width];
        for j in 0..n {
            let mut s = self.lp.objective[j];
            for &(row, a) in &self.cols[j] {
                s -= y[row as usize] * a;
            }
            d[j] = s;
        }
        for i in 0..self.m {
            d[n + i] = -y[i];
        }
        d
    }

    /// No nonbasic column prices favorably within `tol`.
    fn optimal(&self, tol: f64) -> bool {
        let d = self.reduced_costs();
        (0..self.width).all(|j| match self.status[j] {
            VarStatus::Lower => d[j] <= tol,
            VarStatus::Upper => d[j] >= -tol,
            VarStatus::Basic(_) => true,
        })
    }

    /// Nudge basic values strictly inside their boxes with slot-distinct
    /// offsets: a pure right-hand-side relaxation used to break stalls.
    /// The offsets are scattered by the golden ratio so that the gaps between
    /// any two of them stay far above the ratio-test window; evenly spaced
    /// offsets collapse back into ties there.
    fn inject(&mut self) {
        for slot in 0..self.m {
            let d = 1e-7 * (1.0 + (slot as f64 * 0.618_033_988_749_894_9).fract());
            let cap = self.ub(self.basis[slot]);
            if self.xb[slot] + 2.0 * d <= cap {
                self.xb[slot] += d;
            } else if self.xb[slot] - d >= 0.0 {
                self.xb[slot] -= d;
            }
        }
    }

    /// Apply the basis change for entering `e` on slot `r` with column
    /// `alpha` and record the eta. `entering_value` is the new `xb[r]`.
    fn pivot(&mut self, r: usize, e: usize, alpha: Vec<f64>, entering_value: f64, to_lower: bool) {
        let leaving = self.basis[r];
        self.status[leaving] = if to_lower { VarStatus::Lower } else { VarStatus::Upper };
        self.basis[r] = e;
        self.status[e] = VarStatus::Basic(r);
        self.xb[r] = entering_value;
        self.etas.push(Eta { r, alpha });
    }

    fn primal(&mut self, opts: SimplexOptions) -> Result<(), SimplexError> {
        let m = self.m;
        let tol = opts.tol;
        let mut degenerate_run = 0usize; // resets on progress or injection
        let mut stall = 0usize; // resets on progress only
        let mut col = Vec::new();
        // Devex reference weights: pricing picks the eligible column with the
        // largest d_j^2 / w_j. Plain largest-|d_j| pricing crawls on the most
        // degenerate incentive systems (hundreds of thousands of pivots);
        // the weights steer entering choices toward short edges and cut that
        // by orders of magnitude. The reference framework restarts at every
        // refactorization and whenever a weight blows up.
        let mut weights = vec![1.0f64; self.width];
        let mut force_refresh = false;
        self.inject();
        loop {
            if self.iterations >= opts.max_iter {
                return Err(SimplexError::IterationLimit(opts.max_iter));
            }
            if self.etas.len() >= REFRESH_EVERY || (force_refresh && !self.etas.is_empty()) {
                self.refresh()?;
                self.inject();
                weights.iter_mut().for_each(|w| *w = 1.0);
            }
            force_refresh = false;

            let d = self.reduced_costs();
            let bland = stall >= 500;
            let mut enter: Option<(usize, f64)> = None;
            let mut best = 0.0f64;
            for j in 0..self.width {
                let dir = match self.status[j] {
                    VarStatus::Lower if d[j] > tol => 1.0,
                    VarStatus::Upper if d[j] < -tol => -1.0,
                    _ => continue,
                };
                if bland {
                    enter = Some((j, dir));
                    break;
                }
                let score = d[j] * d[j] / weights[j];
                if score > best {
                    best = score;
                    enter = Some((j, dir));
                }
            }
            let Some((e, dir)) = enter else {
                return Ok(());
            };

            self.column(e, &mut col);
            let alpha = self.ftran(&col);

            // Harris two-pass ratio test
            let mut theta = self.ub(e);
            for i in 0..m {
                let a = alpha[i] * dir;
                if a > 1e-9 {
                    theta = theta.min(self.xb[i].max(0.0) / a);
                } else if a < -1e-9 && self.ub(self.basis[i]).is_finite() {
                    theta = theta.min((self.ub(self.basis[i]) - self.xb[i]).max(0.0) / (-a));
                }
            }
            if theta.is_infinite() {
                return Err(SimplexError::Unbounded);
            }
            let window = theta + 1e-9 * (1.0 + theta);
            let mut leave: Option<(usize, f64, bool)> = None; // (slot, |pivot|, leaves at lower)
            for i in 0..m {
                let a = alpha[i] * dir;
                let (t, to_lower) = if a > 1e-9 {
                    (self.xb[i].max(0.0) / a, true)
                } else if a < -1e-9 && self.ub(self.basis[i]).is_finite() {
                    ((self.ub(self.basis[i]) - self.xb[i]).max(0.0) / (-a), false)
                } else {
                    continue;
                };
                if t <= window {
                    let take = match leave {
                        None => true,
                        Some((r0, p0, _)) => {
                            if bland {
                                self.basis[i] < self.basis[r0]
                            } else {
                                a.abs() > p0
                            }
                        }
                    };
                    if take {
                        leave = Some((i, a.abs(), to_lower));
                    }
                }
            }

            if theta <= 1e-10 {
                degenerate_run += 1;
                stall += 1;
            } else {
                degenerate_run = 0;
                stall = 0;
            }
            if degenerate_run >= 40 {
                // roundoff has eaten the perturbation; refresh it
                self.inject();
                degenerate_run = 0;
            }
            self.iterations += 1;

            match leave {
                None => {
                    // no row limits the step: flip to the opposite bound
                    let step = self.ub(e);
                    for i in 0..m {
                        self.xb[i] -= dir * alpha[i] * step;
                    }
                    self.status[e] = if dir > 0.0 { VarStatus::Upper } else { VarStatus::Lower };
                }
                Some((r, _, to_lower)) => {
                    // step by the tight ratio; the leaving variable (picked
                    // within the Harris window for pivot size) is snapped to
                    // its bound, discarding an O(window) discrepancy
                    let step = theta.min(self.ub(e));
                    for i in 0..m {
                        if i != r {
                            self.xb[i] -= dir * alpha[i] * step;
                        }
                    }
                    let entering_value = if dir > 0.0 { step } else { self.ub(e) - step };
                    // weight propagation: w_j <- max(w_j, (a_rj/a_re)^2 w_e)
                    // over nonbasic j, and the leaving variable rejoins the
                    // nonbasic pool at max(w_e/a_re^2, 1)
                    let we = weights[e];
                    let inv2 = 1.0 / (alpha[r] * alpha[r]);
                    let trow = self.pivot_row(r);
                    let mut peak = 1.0f64;
                    for j in 0..self.width {
                        if j == e || matches!(self.status[j], VarStatus::Basic(_)) {
                            continue;
                        }
                        let cand = trow[j] * trow[j] * inv2 * we;
                        if cand > weights[j] {
                            weights[j] = cand;
                            peak = peak.max(cand);
                        }
                    }
                    weights[self.basis[r]] = (we * inv2).max(1.0);
                    if peak.max(we * inv2) > 1e8 {
                        weights.iter_mut().for_each(|w| *w = 1.0);
                    }
                    // a near-threshold pivot degrades the factorization fast;
                    // refactor (and possibly repair) before building on it
                    if alpha[r].abs() < 1e-7 {
                        force_refresh = true;
                    }
                    self.pivot(r, e, alpha, entering_value, to_lower);
                }
            }
        }
    }

    /// Dual simplex: repair primal infeasibility while keeping reduced costs
    /// optimal. Used after the exact right-hand sides are restored.
    fn dual(&mut self, opts: SimplexOptions) -> Result<(), SimplexError> {
        let m = self.m;
        let tol = opts.tol;
        let mut col = Vec::new();
        // per-call step budget: a dual phase that cannot repair feasibility
        // in a few multiples of m is stuck on degenerate ties, and the
        // primal/dual alternation in `solve_from` is the better way out
        let budget = self.iterations + 10 * m + 2000;
        loop {
            if self.iterations >= opts.max_iter {
                return Err(SimplexError::IterationLimit(opts.max_iter));
            }
            if self.iterations >= budget {
                return Err(SimplexError::Degenerate("dual step budget exhausted".into()));
            }
            if self.etas.len() >= REFRESH_EVERY {
                self.refresh()?;
            }

            // most infeasible basic variable leaves
            let mut worst: Option<(usize, f64, f64)> = None; // (slot, violation, target)
            for i in 0..m {
                let below = -self.xb[i];
                let cap = self.ub(self.basis[i]);
                let above = if cap.is_finite() { self.xb[i] - cap } else { f64::NEG_INFINITY };
                if below > tol && worst.map_or(true, |w| below > w.1) {
                    worst = Some((i, below, 0.0));
                }
                if above > tol && worst.map_or(true, |w| above > w.1) {
                    worst = Some((i, above, cap));
                }
            }
            let Some((r, _, target)) = worst else {
                return Ok(());
            };

            let trow = self.pivot_row(r);
            let d = self.reduced_costs();
            // sign convention: srow * (row r) has the leaving variable moving
            // up toward its violated bound
            let srow = if target == 0.0 { 1.0 } else { -1.0 };
            let mut enter: Option<(usize, f64, f64)> = None; // (col, ratio, |a_rj|)
            for j in 0..self.width {
                let arj = trow[j] * srow;
                let eligible = match self.status[j] {
                    VarStatus::Lower => arj < -1e-9,
                    VarStatus::Upper => arj > 1e-9,
                    VarStatus::Basic(_) => false,
                };
                if !eligible {
                    continue;
                }
                let ratio = (d[j] / arj).abs();
                let take = match enter {
                    None => true,
                    Some((_, r0, p0)) => {
                        ratio < r0 - 1e-12 || (ratio < r0 + 1e-12 && arj.abs() > p0)
                    }
                };
                if take {
                    enter = Some((j, ratio, arj.abs()));
                }
            }
            let Some((e, _, _)) = enter else {
                return Err(SimplexError::Degenerate(
                    "dual step found no entering column".into(),
                ));
            };

            self.iterations += 1;
            self.column(e, &mut col);
            let alpha = self.ftran(&col);
            // the entering variable moves so the leaving one lands on target
            let delta_e = (target - self.xb[r]) / (-alpha[r]);
            let old_e = match self.status[e] {
                VarStatus::Lower => 0.0,
                VarStatus::Upper => self.ub(e),
                VarStatus::Basic(_) => unreachable!(),
            };
            for i in 0..m {
                if i != r {
                    self.xb[i] -= alpha[i] * delta_e;
                }
            }
            self.pivot(r, e, alpha, old_e + delta_e, target == 0.0);
        }
    }

    fn extract(&self, tol: f64) -> Solution {
        let n = self.lp.n;
        let m = self.m;
        let mut x = vec![0.0f64; n];
        for j in 0..n {
            x[j] = match self.status[j] {
                VarStatus::Lower => 0.0,
                VarStatus::Upper => self.lp.upper[j],
                VarStatus::Basic(r) => self.xb[r].clamp(0.0, self.lp.upper[j]),
            };
        }
        let objective: f64 = x.iter().zip(&self.lp.objective).map(|(xj, cj)| xj * cj).sum();
        let mut binding = Vec::new();
        for i in 0..m {
            let slack = match self.status[n + i] {
                VarStatus::Lower => 0.0,
                VarStatus::Upper => f64::INFINITY,
                VarStatus::Basic(r) => self.xb[r],
            };
            if slack.abs() <= tol.max(1e-8) {
                binding.push(i);
            }
        }
        let statuses = self
            .status
            .iter()
            .map(|s| match s {
                VarStatus::Lower => WarmStatus::Lower,
                VarStatus::Upper => WarmStatus::Upper,
                VarStatus::Basic(_) => WarmStatus::Basic,
            })
            .collect();
        Solution { x, objective, binding, iterations: self.iterations, statuses }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn solve(lp: &LinearProgram) -> Solution {
        lp.solve(SimplexOptions::default()).unwrap()
    }

    #[test]
    fn simple_two_var() {
        // max 3x + 2y; x + y <= 4, x + 3y <= 6
        let mut lp = LinearProgram::new(vec![3.0, 2.0], vec![f64::INFINITY; 2]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, 1.0)], 4.0).unwrap();
        lp.add_row(vec![(0, 1.0), (1, 3.0)], 6.0).unwrap();
        let s = solve(&lp);
        assert_abs_diff_eq!(s.objective, 12.0, epsilon = 1e-7);
        assert_abs_diff_eq!(s.x[0], 4.0, epsilon = 1e-7);
    }

    #[test]
    fn bound_flips_without_rows() {
        let lp = LinearProgram::new(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        let s = solve(&lp);
        assert_abs_diff_eq!(s.objective, 3.0, epsilon = 1e-7);
        assert_eq!(s.x, vec![1.0, 1.0]);
    }

    #[test]
    fn mixed_bounds_and_rows() {
        // max x + y; x <= 1 (bound), x + 2y <= 2
        let mut lp = LinearProgram::new(vec![1.0, 1.0], vec![1.0, f64::INFINITY]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, 2.0)], 2.0).unwrap();
        let s = solve(&lp);
        assert_abs_diff_eq!(s.objective, 1.5, epsilon = 1e-7);
        assert_abs_diff_eq!(s.x[1], 0.5, epsilon = 1e-7);
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram::new(vec![1.0], vec![f64::INFINITY]).unwrap();
        assert_eq!(lp.solve(SimplexOptions::default()).unwrap_err(), SimplexError::Unbounded);
    }

    #[test]
    fn negative_rhs_rejected() {
        let mut lp = LinearProgram::new(vec![1.0], vec![1.0]).unwrap();
        assert!(lp.add_row(vec![(0, 1.0)], -1.0).is_err());
    }

    #[test]
    fn degenerate_duplicated_rows() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0], vec![f64::INFINITY; 2]).unwrap();
        for _ in 0..6 {
            lp.add_row(vec![(0, 1.0)], 1.0).unwrap();
            lp.add_row(vec![(0, 1.0), (1, 1.0)], 1.5).unwrap();
        }
        let s = solve(&lp);
        assert_abs_diff_eq!(s.objective, 1.5, epsilon = 1e-7);
        assert!(s.binding.len() >= 6);
    }

    #[test]
    fn zero_rhs_start_is_degenerate_but_solved() {
        // max z s.t. z - x <= 0, x <= 1 (bound): the origin vertex is tight
        let mut lp = LinearProgram::new(vec![1.0, 0.0], vec![f64::INFINITY, 1.0]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, -1.0)], 0.0).unwrap();
        let s = solve(&lp);
        assert_abs_diff_eq!(s.objective, 1.0, epsilon = 1e-7);
        assert_eq!(s.binding, vec![0]);
    }

    #[test]
    fn chained_zero_rhs_rows() {
        // max x0; x0 <= x1 <= x2 <= ... <= x5 <= 0.7
        let k = 6;
        let mut lp = LinearProgram::new(
            std::iter::once(1.0).chain(std::iter::repeat(0.0)).take(k).collect(),
            vec![f64::INFINITY; k],
        )
        .unwrap();
        for i in 0..k - 1 {
            lp.add_row(vec![(i, 1.0), (i + 1, -1.0)], 0.0).unwrap();
        }
        lp.add_row(vec![(k - 1, 1.0)], 0.7).unwrap();
        let s = solve(&lp);
        assert_abs_diff_eq!(s.objective, 0.7, epsilon = 1e-7);
    }

    #[test]
    fn random_lps_satisfy_kkt_spotcheck() {
        // feasibility and no improving single-variable move at the optimum
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..25 {
            let n = 4;
            let c: Vec<f64> = (0..n).map(|_| next() * 2.0 - 0.5).collect();
            let ub: Vec<f64> = (0..n).map(|_| 0.5 + next()).collect();
            let mut lp = LinearProgram::new(c.clone(), ub.clone()).unwrap();
            for _ in 0..5 {
                let coeffs: Vec<(usize, f64)> = (0..n).map(|j| (j, next() * 2.0 - 0.6)).collect();
                lp.add_row(coeffs, next() * 2.0).unwrap();
            }
            let s = solve(&lp);
            for (coeffs, rhs) in &lp.rows {
                let lhs: f64 = coeffs.iter().map(|&(j, a)| a * s.x[j]).sum();
                assert!(lhs <= rhs + 1e-6, "row violated: {lhs} > {rhs}");
            }
            for j in 0..n {
                assert!(s.x[j] >= -1e-9 && s.x[j] <= ub[j] + 1e-9);
            }
            for j in 0..n {
                let mut best_t = ub[j];
                for (coeffs, rhs) in &lp.rows {
                    if let Some(&(_, aj)) = coeffs.iter().find(|&&(k, _)| k == j) {
                        if aj > 1e-12 {
                            best_t = best_t.min(rhs / aj);
                        }
                    }
                }
                assert!(s.objective >= c[j] * best_t.max(0.0) - 1e-6);
            }
        }
    }

    #[test]
    fn tall_degenerate_chain_matches_known_optimum() {
        // max sum x_i with pairwise ordering rows all at rhs 0 and one cap;
        // exercises refresh, injection, and the dual cleanup on a system in
        // the same family as the incentive programs
        let k = 40;
        let mut lp = LinearProgram::new(vec![1.0; k], vec![f64::INFINITY; k]).unwrap();
        for i in 0..k {
            for di in 1..4 {
                if i + di < k {
                    lp.add_row(vec![(i, 1.0), (i + di, -1.0)], 0.0).unwrap();
                }
            }
        }
        lp.add_row(vec![(k - 1, 1.0)], 2.0).unwrap();
        let s = solve(&lp);
        assert_abs_diff_eq!(s.objective, 2.0 * k as f64, epsilon = 1e-6);
    }
}
