//! `revlab` — command-line laboratory for two-good monopoly pricing.
//!
//! Every command reads structured-text (TOML) inputs, computes in full, and
//! only then writes: stdout gets a versioned JSON report, `--out DIR` gets
//! the same JSON plus any CSV artifacts (menus, solution tables, traces).
//! Randomized commands are deterministic in `--seed`, and identical inputs
//! produce byte-identical reports.
//!
//! Exit codes: 0 success, 1 a verified guarantee failed (bug signal),
//! 2 input error, 3 solver failure.

mod input;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use revlab_core::bounds::{nonsymmetric_bounds, theorem_general_bound, theorem_regular_bound};
use revlab_core::continuity::{convergence_trace, prohorov, TraceMode};
use revlab_core::mechanisms::verify_ic_ir_npt;
use revlab_core::optrev::{ratio_report, rev_lp, scan_worst_ratio, ScanRecord};
use revlab_core::{ContinuityError, DiscreteMeasureKD, GoodPair, RevOptions};

use input::{menu_from_csv, menu_to_csv, parse_toml, DistSpec, InstanceSpec, PairSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or invalid input; exit 2.
    #[error("{0}")]
    Input(String),
    /// The optimizer gave up; exit 3.
    #[error("{0}")]
    Solver(String),
    /// A shipped guarantee failed on this input; exit 1.
    #[error("{0}")]
    Guarantee(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Guarantee(_) => 1,
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

fn opt_err(e: revlab_core::optrev::OptError) -> CliError {
    use revlab_core::optrev::OptError;
    match e {
        OptError::Solver(_) | OptError::NotConverged { .. } => CliError::Solver(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn cont_err(e: ContinuityError) -> CliError {
    match e {
        ContinuityError::Opt(inner) => opt_err(inner),
        other => CliError::Input(other.to_string()),
    }
}

fn bound_err(e: revlab_core::BoundError) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Parser)]
#[command(name = "revlab", version, about = "Two-good monopoly pricing laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimal posted price and revenue for one good.
    Price {
        /// Distribution spec (TOML).
        #[arg(long)]
        input: PathBuf,
        /// Directory for the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Separate, bundled, and optimal revenue of a two-good instance.
    Ratio {
        /// Instance spec (TOML): explicit points or independent marginals.
        #[arg(long)]
        input: PathBuf,
        /// Equal-mass cells when discretizing continuous marginals.
        #[arg(long, default_value_t = 12)]
        grid: usize,
        /// Incentive feasibility tolerance of the optimizer.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Directory for report, optimal menu, and per-type solution table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Revenue bounds and coupling-term certificate for a density pair.
    Bounds {
        /// Pair spec (TOML): `good1` and `good2` distribution tables.
        #[arg(long)]
        input: PathBuf,
        /// Allocation cap of good one; must not exceed `lambda2`.
        #[arg(long, default_value_t = 1.0)]
        lambda1: f64,
        /// Allocation cap of good two.
        #[arg(long, default_value_t = 1.0)]
        lambda2: f64,
        /// Search grid for the coupling-term maximization and the traces.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Also report the regular-goods bound (suppressed with a warning
        /// when either marginal fails the regularity scan).
        #[arg(long)]
        regular: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random search for instances with a low separate/optimal ratio.
    Scan {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances to draw; 0 finds nothing and exits cleanly.
        #[arg(long, default_value_t = 60)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance between two finitely supported measures.
    Prohorov {
        /// First measure: an instance spec (TOML).
        first: PathBuf,
        /// Second measure.
        second: PathBuf,
        #[arg(long, default_value_t = 12)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a menu file for incentive failures on an instance.
    Audit {
        /// Menu CSV with header `q1,q2,s`.
        #[arg(long)]
        menu: PathBuf,
        /// Instance spec the menu is audited against.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 12)]
        grid: usize,
        /// Violation tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Revenue along a truncation or smoothing sequence of an instance.
    Trace {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Ascending truncation caps (truncate mode).
        #[arg(long = "cap", value_delimiter = ',', default_values_t = vec![1.0, 2.0, 4.0, 8.0])]
        caps: Vec<f64>,
        /// Descending smoothing spreads (smooth mode).
        #[arg(long = "eps", value_delimiter = ',', default_values_t = vec![0.4, 0.2, 0.1])]
        epss: Vec<f64>,
        #[arg(long, default_value_t = 12)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full end-to-end check suite; nonzero exit on any failure.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Truncate,
    Smooth,
}

/// Every report carries the schema version so golden files survive
/// additive changes.
#[derive(Serialize)]
struct Versioned<T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(body: T) -> String {
    serde_json::to_string_pretty(&Versioned { schema_version: 1, body })
        .expect("reports are serializable")
}

/// Report a line on stdout, shrugging off a reader that hung up early.
fn say(line: impl std::fmt::Display) -> Result<(), CliError> {
    use std::io::Write;
    match writeln!(std::io::stdout(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::Input(format!("stdout: {e}")))
        }
        _ => Ok(()),
    }
}

/// Write all artifacts, then print the report. Contents are fully built
/// before the first byte leaves the process.
fn deliver(stdout: &str, out: Option<&Path>, files: &[(&str, &str)]) -> Result<(), CliError> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        for (name, content) in files {
            let path = dir.join(name);
            std::fs::write(&path, content)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        }
    }
    say(stdout)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.cmd) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Price { input, out } => cmd_price(&input, out.as_deref()),
        Cmd::Ratio { input, grid, tol, out } => cmd_ratio(&input, grid, tol, out.as_deref()),
        Cmd::Bounds { input, lambda1, lambda2, grid, regular, out } => {
            cmd_bounds(&input, lambda1, lambda2, grid, regular, out.as_deref())
        }
        Cmd::Scan { seed, budget, out } => cmd_scan(seed, budget, out.as_deref()),
        Cmd::Prohorov { first, second, grid, out } => {
            cmd_prohorov(&first, &second, grid, out.as_deref())
        }
        Cmd::Audit { menu, input, grid, tol, out } => {
            cmd_audit(&menu, &input, grid, tol, out.as_deref())
        }
        Cmd::Trace { input, mode, caps, epss, grid, out } => {
            cmd_trace(&input, mode, caps, epss, grid, out.as_deref())
        }
        Cmd::Verify { out } => cmd_verify(out.as_deref()),
    }
}

fn cmd_price(input: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let spec: DistSpec = parse_toml(input)?;
    let sol = spec.build()?.myerson_optimal();
    let report = json(sol);
    deliver(&report, out, &[("price.json", &report)])
}

fn cmd_ratio(input: &Path, grid: usize, tol: f64, out: Option<&Path>) -> Result<(), CliError> {
    let spec: InstanceSpec = parse_toml(input)?;
    let joint = spec.build(grid)?;
    let opts = RevOptions { tol, ..RevOptions::default() };
    let report = ratio_report(&joint, &opts).map_err(opt_err)?;
    let sol = rev_lp(&joint, &opts).map_err(opt_err)?;
    let menu_csv = menu_to_csv(&sol.menu().map_err(|e| CliError::Input(e.to_string()))?);
    let mut solution_csv = String::from("x1,x2,p,q1,q2,s,b\n");
    for (i, &((x1, x2), p)) in joint.points().iter().enumerate() {
        let z = input::unsigned_zero;
        let (q1, q2, s) = (sol.assignment.q1[i], sol.assignment.q2[i], sol.assignment.payment[i]);
        let b = q1 * x1 + q2 * x2 - s;
        solution_csv.push_str(&format!(
            "{x1},{x2},{p},{},{},{},{}\n",
            z(q1),
            z(q2),
            z(s),
            z(b)
        ));
    }
    let slack = report.ratio - report.guarantee;
    let body = json(&report);
    deliver(
        &body,
        out,
        &[("ratio.json", &body), ("menu.csv", &menu_csv), ("solution.csv", &solution_csv)],
    )?;
    if slack < -1e-6 {
        return Err(CliError::Guarantee(format!(
            "separate/optimal ratio {:.9} sits {slack:.3e} below the guarantee {:.9}",
            report.ratio, report.guarantee
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsReport {
    lambda1: f64,
    lambda2: f64,
    r1: f64,
    r2: f64,
    certificate: revlab_core::BoundCertificate,
    general: revlab_core::bounds::GeneralBound,
    nonsymmetric: revlab_core::NonsymmetricBounds,
    /// Regular-goods total bound; null unless requested and both marginals
    /// pass the regularity scan.
    regular: Option<f64>,
}

fn cmd_bounds(
    input: &Path,
    lambda1: f64,
    lambda2: f64,
    grid: usize,
    regular: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let spec: PairSpec = parse_toml(input)?;
    let pair = GoodPair::new(spec.good1.build()?, spec.good2.build()?).map_err(bound_err)?;
    let cert = pair.certificate(lambda1, lambda2, grid).map_err(bound_err)?;
    let sup = pair.sup_i(lambda1, lambda2, grid).map_err(bound_err)?;
    let (r1, r2) = (pair.r(1), pair.r(2));
    let regular_bound = if regular {
        let ok1 = pair.d1().is_weakly_regular(2000).map_err(|e| CliError::Input(e.to_string()))?;
        let ok2 = pair.d2().is_weakly_regular(2000).map_err(|e| CliError::Input(e.to_string()))?;
        if ok1 && ok2 {
            Some(theorem_regular_bound(r1, r2))
        } else {
            eprintln!(
                "warning: good {} fails the regularity scan; regular bound suppressed",
                if ok1 { 2 } else { 1 }
            );
            None
        }
    } else {
        None
    };
    let body = json(BoundsReport {
        lambda1,
        lambda2,
        r1,
        r2,
        certificate: cert,
        general: theorem_general_bound(r1, r2),
        nonsymmetric: nonsymmetric_bounds(r1, r2),
        regular: regular_bound,
    });

    // plot-ready samples of both coupling functions, their tail integrals,
    // and the maximizing step profile
    let (a, b, c) = sup.argmax;
    let cap = pair.cap();
    let mut ts: Vec<f64> = (0..=grid.max(4)).map(|k| cap * k as f64 / grid.max(4) as f64).collect();
    ts.extend_from_slice(pair.breakpoints());
    ts.retain(|t| t.is_finite() && (0.0..=cap).contains(t));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut trace = String::from("t,k1,k2,l1,l2,phi1,phi2\n");
    for &t in &ts {
        let (mut p1, mut p2) = (0.0, 0.0);
        if t > c {
            p1 = lambda1;
            p2 = lambda1;
        } else if t > a {
            if pair.k_fun(1, t) >= pair.k_fun(2, t) {
                p1 = lambda1;
            } else {
                p2 = lambda1;
            }
        }
        if t > b {
            p2 += lambda2 - lambda1;
        }
        trace.push_str(&format!(
            "{t},{},{},{},{},{p1},{p2}\n",
            pair.k_fun(1, t),
            pair.k_fun(2, t),
            pair.l_fun(1, t),
            pair.l_fun(2, t),
        ));
    }
    deliver(&body, out, &[("certificate.json", &body), ("traces.csv", &trace)])
}

#[derive(Serialize)]
struct ScanReport {
    seed: u64,
    budget: usize,
    evaluated: usize,
    /// Lowest separate/optimal ratio found; null when the budget is zero.
    worst: Option<ScanRecord>,
}

fn cmd_scan(seed: u64, budget: usize, out: Option<&Path>) -> Result<(), CliError> {
    let header = "draw,ratio,rev,srev\n";
    let (body, trace) = if budget == 0 {
        (json(ScanReport { seed, budget, evaluated: 0, worst: None }), header.to_string())
    } else {
        let res = scan_worst_ratio(seed, budget, &RevOptions::default()).map_err(opt_err)?;
        let mut trace = String::from(header);
        for r in &res.trace {
            trace.push_str(&format!("{},{},{},{}\n", r.draw, r.ratio, r.rev, r.srev));
        }
        (
            json(ScanReport { seed, budget, evaluated: res.evaluated, worst: Some(res.worst) }),
            trace,
        )
    };
    deliver(&body, out, &[("scan.json", &body), ("trace.csv", &trace)])
}

fn cmd_prohorov(
    first: &Path,
    second: &Path,
    grid: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let x: InstanceSpec = parse_toml(first)?;
    let y: InstanceSpec = parse_toml(second)?;
    let mx = DiscreteMeasureKD::from_joint(&x.build(grid)?);
    let my = DiscreteMeasureKD::from_joint(&y.build(grid)?);
    let res = prohorov(&mx, &my).map_err(cont_err)?;
    let body = json(&res);
    deliver(&body, out, &[("prohorov.json", &body)])
}

#[derive(Serialize)]
struct AuditReport {
    revenue: f64,
    entries: usize,
    #[serde(flatten)]
    report: revlab_core::IncentiveReport,
}

fn cmd_audit(
    menu: &Path,
    input: &Path,
    grid: usize,
    tol: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mech = menu_from_csv(menu)?;
    let joint = parse_toml::<InstanceSpec>(input)?.build(grid)?;
    let asn = mech.assignment(joint.points());
    let report = verify_ic_ir_npt(joint.points(), &asn, tol)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let body = json(AuditReport {
        revenue: mech.revenue(joint.points()),
        entries: mech.entries().len(),
        report,
    });
    deliver(&body, out, &[("audit.json", &body)])?;
    if !report.ok {
        return Err(CliError::Guarantee(format!(
            "menu fails the incentive audit: ic {:.3e}, ir {:.3e}, min payment {:.3e}",
            report.max_ic_violation, report.max_ir_violation, report.min_payment
        )));
    }
    Ok(())
}

fn cmd_trace(
    input: &Path,
    mode: ModeArg,
    caps: Vec<f64>,
    epss: Vec<f64>,
    grid: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let joint = parse_toml::<InstanceSpec>(input)?.build(grid)?;
    let mode = match mode {
        ModeArg::Truncate => TraceMode::Truncate(caps),
        ModeArg::Smooth => TraceMode::Smooth(epss),
    };
    let res = convergence_trace(&joint, &mode, &RevOptions::default()).map_err(cont_err)?;
    let mut csv = String::from("param,revenue,gap\n");
    for (p, r) in res.params.iter().zip(&res.revenues) {
        csv.push_str(&format!("{p},{r},{}\n", (r - res.limit).abs()));
    }
    let body = json(&res);
    deliver(&body, out, &[("trace.json", &body), ("trace.csv", &csv)])
}

#[derive(Serialize)]
struct VerifyReport {
    passed: usize,
    failed: usize,
    results: Vec<revlab_core::CriterionResult>,
}

fn cmd_verify(out: Option<&Path>) -> Result<(), CliError> {
    let results = revlab_core::run_all();
    for r in &results {
        let status = if r.pass { "pass" } else { "FAIL" };
        say(format_args!(
            "check {:02} [{status}] {:7.2}s {} — {}",
            r.id, r.seconds, r.name, r.detail
        ))?;
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    let passed = results.len() - failed;
    say(format_args!("{passed} passed, {failed} failed"))?;
    if let Some(dir) = out {
        let body = json(VerifyReport { passed, failed, results });
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        let path = dir.join("verify.json");
        std::fs::write(&path, &body)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    if failed > 0 {
        return Err(CliError::Guarantee(format!("{failed} checks failed")));
    }
    Ok(())
}
