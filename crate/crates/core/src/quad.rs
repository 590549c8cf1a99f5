//! Adaptive Simpson quadrature.
//!
//! Integrands in this crate are smooth except at a known finite set of
//! breakpoints (density jumps, menu switch points), so the driver splits the
//! range at every supplied breakpoint and runs adaptive Simpson per panel.

/// Absolute tolerance used by default throughout the crate.
pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[lo, hi]` to absolute tolerance `tol`, forcing panel
/// boundaries at every breakpoint in `breaks` that falls inside the range.
///
/// `breaks` need not be sorted or deduplicated.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64], tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-300 {
            continue;
        }
        // split the tolerance evenly over panels
        let panel_tol = tol * (b - a) / (hi - lo);
        total += simpson_panel(&f, a, b, panel_tol.max(1e-15));
    }
    total
}

/// Adaptive Simpson on a single smooth panel.
fn simpson_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        // Richardson extrapolation term
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        // Simpson is exact on cubics
        let v = integrate(|t| t * t * t - 2.0 * t + 1.0, 0.0, 2.0, &[], 1e-10);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn log_integrand() {
        // \int_1^e ln t dt = 1
        let v = integrate(|t| t.ln(), 1.0, std::f64::consts::E, &[], 1e-10);
        assert!((v - 1.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn kinked_integrand_with_breakpoint() {
        // |t - 0.3| over [0,1]: exact 0.3^2/2 + 0.7^2/2
        let exact = 0.5 * (0.09 + 0.49);
        let v = integrate(|t| (t - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-12);
        assert!((v - exact).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn jump_integrand_with_breakpoint() {
        // step function: 2 on [0,0.25), 5 on (0.25,1]
        let f = |t: f64| if t < 0.25 { 2.0 } else { 5.0 };
        let v = integrate(f, 0.0, 1.0, &[0.25], 1e-12);
        assert!((v - (0.5 + 3.75)).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn empty_range() {
        assert_eq!(integrate(|t| t, 1.0, 1.0, &[], 1e-8), 0.0);
        assert_eq!(integrate(|t| t, 2.0, 1.0, &[], 1e-8), 0.0);
    }
}
