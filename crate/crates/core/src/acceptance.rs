//! End-to-end verification of the shipped guarantees.
//!
//! Each check exercises one public promise of the crate — golden pricing
//! values, the revenue floor of separate selling, the coupling-term engine,
//! the menu decomposition audit, the distance layer — against independently
//! derived values and brute-force searches, under a wall-clock budget. The
//! `acceptance` integration test and the `verify` CLI subcommand both call
//! [`run_all`] and report one line per check, so a green run here is the
//! definition of a working build.
//!
//! Everything is deterministic: random families are drawn from fixed-seed
//! generators, so failures reproduce exactly.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{k_term_bound, nonsymmetric_bounds, GoodPair};
use crate::continuity::{continuity_experiment, prohorov, DiscreteMeasureKD};
use crate::distributions::Dist1D;
use crate::optrev::{monrev_lp, rev_lp, scan_worst_ratio, srev, FiniteJoint, RevOptions};
use crate::quad;
use crate::{guarantee_general, guarantee_regular};

/// Outcome of one acceptance check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    /// What was measured, or what went wrong.
    pub detail: String,
    /// Wall-clock time; not serialized, so reports stay byte-reproducible.
    #[serde(skip_serializing)]
    pub seconds: f64,
}

/// One solved instance of the shared random product family.
struct FamilyRecord {
    joint: FiniteJoint,
    rev: f64,
    srev: f64,
    /// Marginal one-good optimal revenues.
    r1: f64,
    r2: f64,
}

/// Run every check in order and return their results. Never panics; a check
/// that errors internally is reported as failed with the error text.
pub fn run_all() -> Vec<CriterionResult> {
    let opts = RevOptions::default();
    let mut out = Vec::new();

    out.push(run(1, "posted-price golden values", 1.0, check_golden_values));

    // checks 2, 8 and 10 share one pass over the seeded product family; the
    // expensive solves happen on check 2's clock and the others re-read them
    let t = Instant::now();
    let records = family_records(&opts);
    let seconds = t.elapsed().as_secs_f64();
    match records {
        Err(e) => {
            out.push(CriterionResult {
                id: 2,
                name: "separate-sale floor on random products",
                pass: false,
                detail: e,
                seconds,
            });
        }
        Ok(records) => {
            let (pass, detail) = check_separate_floor(&records);
            out.push(CriterionResult {
                id: 2,
                name: "separate-sale floor on random products",
                pass: pass && seconds < 120.0,
                detail,
                seconds,
            });
            out.push(run(3, "floors on smooth families at refining grids", 300.0, || {
                check_refining_grids(&opts)
            }));
            out.push(run(4, "coupling-term engine consistency", 180.0, check_coupling_engine));
            out.push(run(5, "decomposition audit of optimal menus", 120.0, || {
                check_menu_decomposition(&opts)
            }));
            out.push(run(6, "tail-calculus identities", 30.0, check_tail_calculus));
            out.push(run(7, "crossing diagnostics across families", 30.0, check_crossing));
            out.push(run(8, "monotone-restricted revenue chain", 120.0, || {
                check_monotone_chain(&records, &opts)
            }));
            out.push(run(9, "distance axioms and continuity experiments", 120.0, || {
                check_continuity(&opts)
            }));
            out.push(run(10, "square-root revenue cap", 120.0, || {
                check_sqrt_cap(&records)
            }));
        }
    }

    out.push(run(11, "random scan finds a sub-0.89 ratio", 120.0, || check_scan_gap(&opts)));
    out.sort_by_key(|r| r.id);
    out
}

fn run(
    id: usize,
    name: &'static str,
    budget_seconds: f64,
    f: impl FnOnce() -> Result<String, String>,
) -> CriterionResult {
    let t = Instant::now();
    let res = f();
    let seconds = t.elapsed().as_secs_f64();
    let (mut pass, mut detail) = match res {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if seconds >= budget_seconds {
        pass = false;
        detail = format!("{detail}; over the {budget_seconds:.0}s budget");
    }
    CriterionResult { id, name, pass, detail, seconds }
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// -- check 1 ---------------------------------------------------------------

fn check_golden_values() -> Result<String, String> {
    let u = Dist1D::uniform(0.0, 1.0).map_err(err)?.myerson_optimal();
    ensure((u.price - 0.5).abs() <= 1e-9 && (u.revenue - 0.25).abs() <= 1e-9, || {
        format!("uniform price {} revenue {}", u.price, u.revenue)
    })?;
    let far = Dist1D::finite_atoms(&[(0.0, 0.9), (10.0, 0.1)]).map_err(err)?.myerson_optimal();
    ensure((far.price - 10.0).abs() <= 1e-9 && (far.revenue - 1.0).abs() <= 1e-9, || {
        format!("two-atom price {} revenue {}", far.price, far.revenue)
    })?;
    let er = Dist1D::equal_revenue(1.0, 10.0).map_err(err)?.myerson_optimal();
    ensure((er.revenue - 1.0).abs() <= 1e-9, || format!("equal-revenue revenue {}", er.revenue))?;
    Ok("uniform (0.5, 0.25); two-atom (10, 1); equal-revenue 1".into())
}

// -- checks 2, 8, 10: shared family ----------------------------------------

fn random_marginal(rng: &mut ChaCha8Rng) -> Result<Dist1D, String> {
    let k = rng.gen_range(1..=8usize);
    let mut vals: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..4.0)).collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let raw: Vec<f64> = vals.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let pairs: Vec<(f64, f64)> =
        vals.iter().zip(&raw).map(|(&v, &w)| (v, w / total)).collect();
    Dist1D::finite_atoms(&pairs).map_err(err)
}

fn family_records(opts: &RevOptions) -> Result<Vec<FamilyRecord>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut out = Vec::with_capacity(200);
    for case in 0..200 {
        let with_case = |e: String| format!("case {case}: {e}");
        let d1 = random_marginal(&mut rng).map_err(with_case)?;
        let d2 = random_marginal(&mut rng).map_err(err).map_err(with_case)?;
        let joint = FiniteJoint::product(&d1, &d2).map_err(err).map_err(with_case)?;
        let sep = srev(&joint).map_err(err).map_err(with_case)?;
        let opt = rev_lp(&joint, opts).map_err(err).map_err(with_case)?;
        let r1 = d1.myerson_optimal().revenue;
        let r2 = d2.myerson_optimal().revenue;
        out.push(FamilyRecord { joint, rev: opt.value, srev: sep.value, r1, r2 });
    }
    Ok(out)
}

fn ratio_of(rec: &FamilyRecord) -> f64 {
    if rec.rev <= 1e-15 {
        1.0
    } else {
        rec.srev / rec.rev
    }
}

fn check_separate_floor(records: &[FamilyRecord]) -> (bool, String) {
    let floor = guarantee_general() - 1e-6;
    let (worst_idx, worst) = records
        .iter()
        .map(ratio_of)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("family is nonempty");
    let pass = worst >= floor;
    (
        pass,
        format!(
            "{} instances, worst srev/rev {:.6} at case {} (floor {:.6})",
            records.len(),
            worst,
            worst_idx,
            floor
        ),
    )
}

// -- check 3 ---------------------------------------------------------------

fn check_refining_grids(opts: &RevOptions) -> Result<String, String> {
    let families: [(&str, Dist1D); 3] = [
        ("uniform", Dist1D::uniform(0.0, 1.0).map_err(err)?),
        ("exponential", Dist1D::exponential(1.0).map_err(err)?),
        ("equal-revenue", Dist1D::equal_revenue(1.0, 10.0).map_err(err)?),
    ];
    let g = guarantee_regular();
    let mut parts = Vec::new();
    for (name, d) in &families {
        let mut ratios = Vec::new();
        for grid in [12usize, 16] {
            let f = d.discretize(grid).map_err(err)?;
            let joint = FiniteJoint::product(&f, &f).map_err(err)?;
            let sep = srev(&joint).map_err(err)?;
            let opt = rev_lp(&joint, opts).map_err(err)?;
            let ratio = sep.value / opt.value;
            ensure(ratio >= g - 0.01, || {
                format!("{name} {grid}x{grid} ratio {ratio:.6} under floor {:.6}", g - 0.01)
            })?;
            ratios.push(ratio);
        }
        // refinement must not lose ground against the floor: the part of the
        // ratio below the guarantee may only grow (above it, drifting down
        // toward the continuous limit is fine)
        ensure(ratios[1].min(g) >= ratios[0].min(g) - 1e-9, || {
            format!("{name} ratio receded from the floor: {:.6} -> {:.6}", ratios[0], ratios[1])
        })?;
        parts.push(format!("{name} {:.4}->{:.4}", ratios[0], ratios[1]));
    }
    Ok(parts.join("; "))
}

// -- check 4 ---------------------------------------------------------------

fn random_capped_density(rng: &mut ChaCha8Rng) -> Result<Dist1D, String> {
    let d = match rng.gen_range(0..4u8) {
        0 => {
            let start: f64 = rng.gen_range(0.0..2.0);
            let cells = rng.gen_range(1..5usize);
            let mut breaks = vec![start];
            for _ in 0..cells {
                let gap: f64 = rng.gen_range(0.1..2.0);
                breaks.push(breaks.last().unwrap() + gap);
            }
            let mut dens: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.01..1.0)).collect();
            let mass: f64 =
                breaks.windows(2).zip(&dens).map(|(w, d)| d * (w[1] - w[0])).sum();
            for v in &mut dens {
                *v /= mass;
            }
            Dist1D::piecewise_uniform(&breaks, &dens)
        }
        1 => {
            let lo: f64 = rng.gen_range(0.0..3.0);
            let width: f64 = rng.gen_range(0.2..5.0);
            Dist1D::uniform(lo, lo + width)
        }
        2 => Dist1D::exponential(rng.gen_range(0.2..3.0)),
        _ => {
            let r: f64 = rng.gen_range(0.3..2.0);
            let k: f64 = rng.gen_range(1.5..15.0);
            Dist1D::equal_revenue(r, r * k)
        }
    };
    d.map_err(err)
}

/// `int phi1 K1 + phi2 K2` for a step profile on a uniform grid over the
/// support, via exact tail-integral telescoping (support-cap atoms included).
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
    total += phi1[n - 1] * p.tail_integral_k(1, cap) + phi2[n - 1] * p.tail_integral_k(2, cap);
    total
}

fn check_coupling_engine() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_profile_excess = f64::NEG_INFINITY;
    for case in 0..50 {
        let p = GoodPair::new(
            random_capped_density(&mut rng)?,
            random_capped_density(&mut rng)?,
        )
        .map_err(|e| format!("case {case}: {e}"))?;
        let (a, b): (f64, f64) = (rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0));
        let (l1, l2) = (a.min(b), a.max(b));
        let sup = p.sup_i(l1, l2, 64).map_err(err)?;
        let cap = k_term_bound(l1, l2, p.r(1), p.r(2)).map_err(err)?;
        ensure(sup.value <= cap + 1e-6, || {
            format!("case {case}: sup {} above closed-form cap {cap}", sup.value)
        })?;
        // brute force: random admissible step profiles (phi_i <= lambda_i,
        // phi1 + phi2 nondecreasing) must never beat the maximized integral
        let tol = 2e-3 * (1.0 + p.r(1) + p.r(2));
        for _ in 0..40 {
            let mut totals: Vec<f64> =
                (0..20).map(|_| rng.gen_range(0.0..1.0) * (l1 + l2)).collect();
            totals.sort_by(f64::total_cmp);
            let mut phi1 = Vec::with_capacity(20);
            let mut phi2 = Vec::with_capacity(20);
            for &s in &totals {
                let lo = (s - l2).max(0.0);
                let hi = s.min(l1);
                let q1 = lo + rng.gen_range(0.0..1.0) * (hi - lo);
                phi1.push(q1);
                phi2.push(s - q1);
            }
            let value = step_profile_value(&p, &phi1, &phi2);
            max_profile_excess = max_profile_excess.max(value - sup.value);
            ensure(value <= sup.value + tol, || {
                format!("case {case}: step profile {value} beats sup {}", sup.value)
            })?;
        }
    }
    Ok(format!(
        "50 pairs: sup under cap; 2000 profiles under sup (max excess {max_profile_excess:.2e})"
    ))
}

// -- check 5 ---------------------------------------------------------------

fn check_menu_decomposition(opts: &RevOptions) -> Result<String, String> {
    let smoothed = Dist1D::finite_atoms(&[(1.0, 0.5), (2.0, 0.5)])
        .map_err(err)?
        .smooth(0.5)
        .map_err(err)?;
    let uniform = Dist1D::uniform(0.0, 1.0).map_err(err)?;
    let shrink = 1.0 / std::f64::consts::E.sqrt();
    let mut parts = Vec::new();
    for (name, d) in [("smoothed two-atom", &smoothed), ("uniform", &uniform)] {
        let f = d.discretize(12).map_err(err)?;
        let joint = FiniteJoint::product(&f, &f).map_err(err)?;
        let menu = rev_lp(&joint, opts).map_err(err)?.menu().map_err(err)?;
        let pair = GoodPair::new(d.clone(), d.clone()).map_err(err)?;
        for (l1, l2) in [(1.0, 1.0), (shrink, 1.0)] {
            let scaled = menu.rescale((l1, l2)).map_err(err)?;
            let chk = pair.decomposition_check(&scaled, l1, l2, 12).map_err(err)?;
            ensure(chk.slack >= -1e-3, || {
                format!("{name} lambda ({l1:.3}, {l2:.3}): slack {:.6}", chk.slack)
            })?;
            parts.push(format!("{name} ({l1:.2},{l2:.2}) slack {:.4}", chk.slack));
        }
    }
    Ok(parts.join("; "))
}

// -- check 6 ---------------------------------------------------------------

fn check_tail_calculus() -> Result<String, String> {
    let pairs: Vec<(&str, GoodPair)> = vec![
        (
            "uniform",
            GoodPair::new(
                Dist1D::uniform(0.0, 1.0).map_err(err)?,
                Dist1D::uniform(0.0, 1.0).map_err(err)?,
            )
            .map_err(err)?,
        ),
        (
            "exponential",
            GoodPair::new(
                Dist1D::exponential(1.0).map_err(err)?,
                Dist1D::exponential(1.0).map_err(err)?,
            )
            .map_err(err)?,
        ),
        (
            "equal-revenue",
            GoodPair::new(
                Dist1D::equal_revenue(1.0, 10.0).map_err(err)?,
                Dist1D::equal_revenue(1.0, 10.0).map_err(err)?,
            )
            .map_err(err)?,
        ),
        ("bumped", GoodPair::crossing_dip_fixture().map_err(err)?),
    ];
    let mut checked = 0usize;
    for (name, p) in &pairs {
        let cap = p.cap();
        let h = 1e-5;
        for i in [1u8, 2] {
            // slope of L against -K away from density kinks
            for k in 1..40 {
                let t = cap * k as f64 / 40.0;
                if p.breakpoints().iter().any(|b| (b - t).abs() < 1e-3) {
                    continue;
                }
                let slope = (p.l_fun(i, t + h) - p.l_fun(i, t - h)) / (2.0 * h);
                let kv = p.k_fun(i, t);
                ensure((slope + kv).abs() <= 1e-6 * (1.0 + kv.abs()), || {
                    format!("{name}: L' {slope} vs -K {} at t {t}", -kv)
                })?;
                checked += 1;
            }
            // tail integral of K against its closed form; the only atom any
            // of these pairs carries sits exactly at the support cap
            for frac in [0.1, 0.35, 0.6, 0.85] {
                let u = cap * frac;
                let cont = quad::integrate(
                    |t| p.k_fun(i, t),
                    u,
                    cap,
                    p.breakpoints(),
                    1e-10,
                );
                let lhs = cont + p.tail_integral_k(i, cap);
                let rhs = p.tail_integral_k(i, u);
                ensure((lhs - rhs).abs() <= 1e-7, || {
                    format!("{name}: quadrature tail {lhs} vs closed form {rhs} at u {u}")
                })?;
                checked += 1;
            }
        }
        // distribution-level tail caps, per marginal
        for d in [p.d1(), p.d2()] {
            let r = d.myerson_optimal().revenue;
            for k in 0..=64 {
                let t = r + (cap - r).max(0.0) * k as f64 / 64.0;
                let g = d.tail(t);
                ensure(g <= (r / t).min(1.0) + 1e-9, || {
                    format!("{name}: tail {g} above min(r/t, 1) at t {t}")
                })?;
                let hval = d.cumtail(t);
                ensure(hval <= r * (1.0 + (t / r).ln()) + 1e-9, || {
                    format!("{name}: partial mean {hval} above r(1 + log(t/r)) at t {t}")
                })?;
                checked += 2;
            }
        }
    }
    Ok(format!("{checked} identity points across {} pairs", pairs.len()))
}

// -- check 7 ---------------------------------------------------------------

fn check_crossing() -> Result<String, String> {
    let regular: Vec<(&str, Dist1D)> = vec![
        ("uniform", Dist1D::uniform(0.0, 1.0).map_err(err)?),
        ("exponential", Dist1D::exponential(1.0).map_err(err)?),
        ("equal-revenue", Dist1D::equal_revenue(1.0, 10.0).map_err(err)?),
    ];
    for (name, d) in &regular {
        let p = GoodPair::new(d.clone(), d.clone()).map_err(err)?;
        for i in [1u8, 2] {
            ensure(p.single_crossing_check(i, 800), || {
                format!("{name} pair reported a crossing dip on good {i}")
            })?;
        }
    }
    let fixture = GoodPair::crossing_dip_fixture().map_err(err)?;
    ensure(!fixture.single_crossing_check(1, 800), || {
        "shipped dip fixture failed to dip".to_string()
    })?;
    Ok("uniform/exponential/equal-revenue single-cross; shipped fixture dips".into())
}

// -- check 8 ---------------------------------------------------------------

fn check_monotone_chain(records: &[FamilyRecord], opts: &RevOptions) -> Result<String, String> {
    let mut audited = 0usize;
    for (case, rec) in records.iter().enumerate().step_by(4) {
        let mon = monrev_lp(&rec.joint, opts).map_err(|e| format!("case {case}: {e}"))?;
        ensure(mon.value <= rec.rev + 1e-7, || {
            format!("case {case}: monotone {} above unrestricted {}", mon.value, rec.rev)
        })?;
        audited += 1;
    }
    let d = Dist1D::equal_revenue(1.0, 10.0).map_err(err)?;
    let f = d.discretize(12).map_err(err)?;
    let joint = FiniteJoint::product(&f, &f).map_err(err)?;
    let sep = srev(&joint).map_err(err)?;
    let mon = monrev_lp(&joint, opts).map_err(err)?;
    let ratio = sep.value / mon.value;
    ensure(ratio >= guarantee_regular() - 0.01, || {
        format!("equal-revenue 12x12: srev/monrev {ratio:.6} under floor")
    })?;
    Ok(format!(
        "monotone <= unrestricted on {audited} instances; equal-revenue 12x12 srev/monrev {ratio:.4}"
    ))
}

// -- check 9 ---------------------------------------------------------------

fn random_measure(rng: &mut ChaCha8Rng) -> Result<DiscreteMeasureKD, String> {
    let k = rng.gen_range(1..=6usize);
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut raw: Vec<f64> = Vec::new();
    while pts.len() < k {
        let p = vec![
            0.2 * rng.gen_range(0..6u8) as f64,
            0.2 * rng.gen_range(0..6u8) as f64,
        ];
        if !pts.contains(&p) {
            pts.push(p);
            raw.push(rng.gen_range(1..8u8) as f64);
        }
    }
    let total: f64 = raw.iter().sum();
    DiscreteMeasureKD::new(pts, raw.iter().map(|w| w / total).collect()).map_err(err)
}

fn random_small_joint(rng: &mut ChaCha8Rng) -> Result<FiniteJoint, String> {
    let mut cells: Vec<((f64, f64), f64)> = Vec::new();
    let k = rng.gen_range(1..=6usize);
    while cells.len() < k {
        let x = (0.25 * rng.gen_range(0..5u8) as f64, 0.25 * rng.gen_range(0..5u8) as f64);
        if !cells.iter().any(|&(y, _)| y == x) {
            cells.push((x, rng.gen_range(1..8u8) as f64));
        }
    }
    let total: f64 = cells.iter().map(|&(_, w)| w).sum();
    let pts: Vec<((f64, f64), f64)> =
        cells.into_iter().map(|(x, w)| (x, w / total)).collect();
    FiniteJoint::from_points(&pts).map_err(err)
}

fn check_continuity(opts: &RevOptions) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // metric axioms on random triples
    for case in 0..12 {
        let (x, y, z) =
            (random_measure(&mut rng)?, random_measure(&mut rng)?, random_measure(&mut rng)?);
        let with_case = |e: String| format!("triple {case}: {e}");
        let dxy = prohorov(&x, &y).map_err(err).map_err(with_case)?.distance;
        let dyx = prohorov(&y, &x).map_err(err).map_err(with_case)?.distance;
        let dyz = prohorov(&y, &z).map_err(err).map_err(with_case)?.distance;
        let dxz = prohorov(&x, &z).map_err(err).map_err(with_case)?.distance;
        let dxx = prohorov(&x, &x).map_err(err).map_err(with_case)?.distance;
        ensure(dxy == dyx, || format!("triple {case}: asymmetry {dxy} vs {dyx}"))?;
        ensure(dxx <= 1e-6, || format!("triple {case}: self-distance {dxx}"))?;
        ensure((0.0..=1.0 + 1e-12).contains(&dxy), || {
            format!("triple {case}: distance {dxy} out of range")
        })?;
        ensure(dxz <= dxy + dyz + 2e-6, || {
            format!("triple {case}: triangle {dxz} > {dxy} + {dyz}")
        })?;
    }
    // revenue gap against the distance bound on bounded instances
    for case in 0..100 {
        let x = random_small_joint(&mut rng)?;
        let y = random_small_joint(&mut rng)?;
        let ex = continuity_experiment(&x, &y, 2.0, opts)
            .map_err(|e| format!("pair {case}: {e}"))?;
        ensure(ex.ok, || {
            format!(
                "pair {case}: gap {:.6} above bound {:.6} at distance {:.6}",
                ex.gap, ex.bound, ex.distance
            )
        })?;
    }
    // point-mass pairs against the closed form
    for case in 0..30 {
        let a = vec![0.1 * rng.gen_range(0..=16u8) as f64, 0.1 * rng.gen_range(0..=16u8) as f64];
        let b = vec![0.1 * rng.gen_range(0..=16u8) as f64, 0.1 * rng.gen_range(0..=16u8) as f64];
        let l1 = (a[0] - b[0]).abs() + (a[1] - b[1]).abs();
        let expect = l1.min(1.0);
        let d = prohorov(
            &DiscreteMeasureKD::dirac(a).map_err(err)?,
            &DiscreteMeasureKD::dirac(b).map_err(err)?,
        )
        .map_err(err)?
        .distance;
        ensure((d - expect).abs() <= 1e-6, || {
            format!("dirac pair {case}: distance {d} vs closed form {expect}")
        })?;
    }
    Ok("12 metric triples, 100 bounded experiments, 30 point-mass pairs".into())
}

// -- check 10 --------------------------------------------------------------

fn check_sqrt_cap(records: &[FamilyRecord]) -> Result<String, String> {
    let mut tightest = f64::INFINITY;
    for (case, rec) in records.iter().enumerate() {
        let cap = (rec.r1.sqrt() + rec.r2.sqrt()).powi(2);
        tightest = tightest.min(cap - rec.rev);
        ensure(rec.rev <= cap + 1e-8, || {
            format!("case {case}: rev {} above (sqrt r1 + sqrt r2)^2 = {cap}", rec.rev)
        })?;
    }
    let nb = nonsymmetric_bounds(1.0, 4.0);
    ensure((nb.sqrt_rule - 9.0).abs() <= 1e-12 && nb.sqrt_rule < 10.0, || {
        format!("revenues (1, 4): sqrt rule {} should be 9 < 10", nb.sqrt_rule)
    })?;
    Ok(format!(
        "{} instances under the cap (tightest margin {tightest:.4}); (1,4) cap 9 < 10",
        records.len()
    ))
}

// -- check 11 --------------------------------------------------------------

fn check_scan_gap(opts: &RevOptions) -> Result<String, String> {
    let scan = scan_worst_ratio(0, 120, opts).map_err(err)?;
    ensure(scan.worst.ratio <= 0.89, || {
        format!("worst ratio {:.6} after {} draws", scan.worst.ratio, scan.evaluated)
    })?;
    Ok(format!(
        "draw {} reaches srev/rev {:.6} <= 0.89",
        scan.worst.draw, scan.worst.ratio
    ))
}
