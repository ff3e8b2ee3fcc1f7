//! `causal-bounds`: bounds on probabilities of causation from two trials that
//! share an outcome.
//!
//! Exit codes: 0 success, 1 usage/parse/IO error, 2 incompatible marginals,
//! 3 falsified hypothesis, 4 an oracle cross-check (`--verify`) disagreed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_bounds::bounds::{
    bounds_report, check_compatibility, degenerate_compatibility, is_feasible, lp_lambda_extremes,
    DegeneracyProfile,
};
use causal_bounds::info::noise_outcome_information_enumerated;
use causal_bounds::info::{falsify_by_conditional_info, falsify_by_marginal_info, info_report};
use causal_bounds::maxent::{maxent_lambda_single, maxent_scm, LambdaEstimate};
use causal_bounds::oracle::{
    abduction_oracle, grid_lambda_range, grid_max_entropy, reduce, GridSpec, Query,
};
use causal_bounds::scm::{
    pns_from_lambda, prob_necessary_nonmonotonicity, prob_sufficient_nonmonotonicity,
};
use causal_bounds::sweep::{entropy_means, run_sweep, SweepConfig, SweepRow};
use causal_bounds::trial::{marginal_from_counts, parse_trial_summary};
use causal_bounds::{
    build_polytope, BinaryMarginal, Error, PolytopeSpec, TrialFormat, TrivariateTable,
};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Map, Value};

const EXIT_USAGE: u8 = 1;
const EXIT_INCOMPATIBLE: u8 = 2;
const EXIT_FALSIFIED: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 4;

/// Agreement tolerance for exact cross-checks.
const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "causal-bounds", version, about)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Cross-check results against independent oracles.
    #[arg(long, global = true)]
    verify: bool,
    /// Include the consistency polytope in the output.
    #[arg(long, global = true)]
    dump_polytope: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Pair {
    /// Trial summary for P(X, Z) (.csv or JSON).
    #[arg(long)]
    trial_x: PathBuf,
    /// Trial summary for P(Y, Z) (.csv or JSON).
    #[arg(long)]
    trial_y: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-marginal and tightened PNS bounds.
    Bounds(Pair),
    /// Check whether two marginals can come from one joint model.
    Compat(Pair),
    /// Maximum-entropy response-function distribution.
    Maxent {
        #[arg(long)]
        trial_x: PathBuf,
        #[arg(long)]
        trial_y: Option<PathBuf>,
    },
    /// Information report for a given lambda, or a falsification test.
    Info(InfoArgs),
    /// Grid sweep over the second marginal, written as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct InfoArgs {
    #[arg(long, requires = "lambda")]
    trial_x: Option<PathBuf>,
    /// Weight of the "Zero" response function of X -> Z.
    #[arg(long, requires = "trial_x")]
    lambda: Option<f64>,
    /// Hypothesized I(N_Z:Z) in bits, tested against --trial-y.
    #[arg(long, requires = "trial_y", conflicts_with_all = ["trial_x", "hyp_xz_given_nz"])]
    hyp_nz_z: Option<f64>,
    #[arg(long)]
    trial_y: Option<PathBuf>,
    /// Hypothesized I(X:Z | N_Z) in bits, tested against --trivariate.
    #[arg(long, requires = "trivariate", conflicts_with = "trial_x")]
    hyp_xz_given_nz: Option<f64>,
    /// JSON file with `{"p": [[[p000,p001],[p010,p011]],[[p100,p101],[p110,p111]]]}`.
    #[arg(long)]
    trivariate: Option<PathBuf>,
}

/// Failure of a subcommand, mapped onto an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

struct Outcome {
    report: Value,
    code: u8,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self { report, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            print_report(&out.report, cli.json);
            ExitCode::from(out.code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Bounds(p) => cmd_bounds(
            cli,
            &load_marginal(&p.trial_x)?,
            &load_marginal(&p.trial_y)?,
        ),
        Command::Compat(p) => cmd_compat(
            cli,
            &load_marginal(&p.trial_x)?,
            &load_marginal(&p.trial_y)?,
        ),
        Command::Maxent { trial_x, trial_y } => {
            let mx = load_marginal(trial_x)?;
            let my = trial_y.as_deref().map(load_marginal).transpose()?;
            cmd_maxent(cli, &mx, my.as_ref())
        }
        Command::Info(args) => cmd_info(cli, args),
        Command::Sweep { config, out } => cmd_sweep(config, out),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Probability-level alternative to a count table.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarginalDoc {
    p_z0_w0: f64,
    p_z0_w1: f64,
    p_w0: f64,
}

/// Reads a trial summary: CSV counts for `.csv`, otherwise JSON holding
/// either counts (`n00..n11`) or probabilities (`p_z0_w0`, `p_z0_w1`, `p_w0`).
fn load_marginal(path: &Path) -> Result<BinaryMarginal, Failure> {
    let bytes = read(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let context = |e: Error| Failure::Usage(format!("{}: {e}", path.display()));
    if is_csv {
        let t = parse_trial_summary(&bytes, TrialFormat::Csv).map_err(context)?;
        return Ok(marginal_from_counts(&t));
    }
    let value: Value = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if value.get("p_w0").is_some() {
        let doc: MarginalDoc = serde_json::from_value(value)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return BinaryMarginal::new(doc.p_z0_w0, doc.p_z0_w1, doc.p_w0).map_err(context);
    }
    let t = parse_trial_summary(&bytes, TrialFormat::Json).map_err(context)?;
    Ok(marginal_from_counts(&t))
}

fn marginal_json(m: &BinaryMarginal) -> Value {
    json!({ "p00": m.p00(), "p01": m.p01(), "p_w0": m.p_w0() })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Grid resolution that keeps the oracle scan to a few million points.
fn grid_for(spec: &PolytopeSpec) -> Result<Option<GridSpec>, Error> {
    let free = match reduce(spec) {
        Ok(r) => r.free.len(),
        Err(Error::Infeasible) => return Ok(None),
        Err(e) => return Err(e),
    };
    let resolution = match free {
        0 | 1 => 2000,
        2 => 400,
        3 => 60,
        4 => 20,
        _ => return Ok(None),
    };
    GridSpec::new(resolution, 4).map(Some)
}

fn cmd_bounds(cli: &Cli, mx: &BinaryMarginal, my: &BinaryMarginal) -> Result<Outcome, Failure> {
    let r = bounds_report(mx, my)?;
    let spec = build_polytope(mx, my);
    let mut out = Map::new();
    out.insert("mx".into(), marginal_json(mx));
    out.insert("my".into(), marginal_json(my));
    out.insert(
        "single_marginal".into(),
        json!({
            "lambda": r.single_marginal_lambda,
            "pns": r.single_marginal_pns,
        }),
    );
    out.insert("lambda".into(), to_value(&r.lambda));
    out.insert("pns".into(), to_value(&r.pns));
    out.insert("compatible".into(), r.compatible.into());
    out.insert("binding_case".into(), r.binding_case.as_str().into());
    out.insert("degenerate".into(), r.degenerate.into());
    out.insert("violated".into(), to_value(&r.violated));
    let mut code = if r.compatible { 0 } else { EXIT_INCOMPATIBLE };

    if cli.verify {
        let mut checks = Map::new();
        let mut agree = true;
        let lp = match lp_lambda_extremes(&spec) {
            Ok(iv) => Some(iv),
            Err(Error::Infeasible) => None,
            Err(e) => return Err(e.into()),
        };
        agree &= lp.is_some() == r.compatible;
        checks.insert("lp_feasible".into(), lp.is_some().into());
        if let (Some(lp), Some(lam)) = (lp, r.lambda) {
            agree &= (lp.lo.max(r.single_marginal_lambda[0]) - lam[0]).abs() <= VERIFY_TOL;
            // the upper end is never tightened
            agree &= (lp.hi - lam[1]).abs() <= VERIFY_TOL;
            checks.insert("lp_lambda".into(), json!([lp.lo, lp.hi]));
        }
        match grid_for(&spec)? {
            Some(g) => {
                let grid = grid_lambda_range(&spec, &g)?;
                // a grid sees only feasible points, so it sits inside the exact range
                if let Some(lam) = r.lambda {
                    agree &= grid.lo >= lam[0] - 1e-7 && grid.hi <= lam[1] + 1e-7;
                }
                checks.insert("grid_lambda".into(), json!([grid.lo, grid.hi]));
                checks.insert("grid_resolution".into(), g.resolution().into());
            }
            None => {
                checks.insert("grid_lambda".into(), Value::Null);
            }
        }
        checks.insert("agrees".into(), agree.into());
        out.insert("verify".into(), Value::Object(checks));
        if !agree {
            code = EXIT_VERIFY_FAILED;
        }
    }
    if cli.dump_polytope {
        out.insert("polytope".into(), to_value(&spec));
    }
    Ok(Outcome {
        report: Value::Object(out),
        code,
    })
}

fn cmd_compat(cli: &Cli, mx: &BinaryMarginal, my: &BinaryMarginal) -> Result<Outcome, Failure> {
    let c = check_compatibility(mx, my)?;
    let degenerate = DegeneracyProfile::of(my).is_degenerate();
    let spec = build_polytope(mx, my);
    let mut out = Map::new();
    out.insert("compatible".into(), c.compatible.into());
    out.insert(
        "method".into(),
        if degenerate { "certificate" } else { "lp" }.into(),
    );
    out.insert("violated".into(), to_value(&c.violated));
    let mut code = if c.compatible { 0 } else { EXIT_INCOMPATIBLE };
    if cli.verify {
        let lp = is_feasible(&spec)?;
        let mut agree = lp == c.compatible;
        let mut checks = Map::new();
        checks.insert("lp_feasible".into(), lp.into());
        if degenerate {
            let cert = degenerate_compatibility(mx, my)?;
            agree &= cert.compatible == lp;
            checks.insert("certificate".into(), cert.compatible.into());
        }
        checks.insert("agrees".into(), agree.into());
        out.insert("verify".into(), Value::Object(checks));
        if !agree {
            code = EXIT_VERIFY_FAILED;
        }
    }
    if cli.dump_polytope {
        out.insert("polytope".into(), to_value(&spec));
    }
    Ok(Outcome {
        report: Value::Object(out),
        code,
    })
}

fn cmd_maxent(
    cli: &Cli,
    mx: &BinaryMarginal,
    my: Option<&BinaryMarginal>,
) -> Result<Outcome, Failure> {
    let mut out = Map::new();
    let mut code = 0;
    let Some(my) = my else {
        let est = maxent_lambda_single(mx);
        let lambda = est.value();
        out.insert("lambda_x".into(), lambda.into());
        out.insert("pns".into(), pns_from_lambda(mx, lambda)?.into());
        out.insert(
            "point_identified".into(),
            matches!(est, LambdaEstimate::PointIdentified(_)).into(),
        );
        if cli.verify {
            // direct scan of the univariate entropy over the lambda interval
            let r = causal_bounds::scm::lambda_range(mx);
            let steps = 200_000;
            let best = (0..=steps)
                .map(|i| r.lo + r.width() * i as f64 / steps as f64)
                .map(|l| {
                    let a = causal_bounds::scm::response_weights(mx, l).map(|a| a.0);
                    (
                        l,
                        a.map(|a| causal_bounds::info::entropy_bits(&a))
                            .unwrap_or(f64::NEG_INFINITY),
                    )
                })
                .fold(
                    (r.lo, f64::NEG_INFINITY),
                    |b, x| if x.1 > b.1 { x } else { b },
                );
            let agree = (best.0 - lambda).abs() <= 2.0 * r.width() / steps as f64 + VERIFY_TOL;
            out.insert(
                "verify".into(),
                json!({ "grid_lambda": best.0, "agrees": agree }),
            );
            if !agree {
                code = EXIT_VERIFY_FAILED;
            }
        }
        if cli.dump_polytope {
            // without P(Y) there is no bivariate polytope; show the univariate segment
            let r = causal_bounds::scm::lambda_range(mx);
            out.insert("polytope".into(), json!({ "lambda_range": [r.lo, r.hi] }));
        }
        return Ok(Outcome {
            report: Value::Object(out),
            code,
        });
    };

    let spec = build_polytope(mx, my);
    let me = match maxent_scm(&spec) {
        Ok(me) => me,
        Err(Error::Incompatible { violated }) => {
            let c = check_compatibility(mx, my)?;
            let violated = if c.violated.is_empty() {
                violated
            } else {
                c.violated
            };
            out.insert("compatible".into(), false.into());
            out.insert("violated".into(), to_value(&violated));
            return Ok(Outcome {
                report: Value::Object(out),
                code: EXIT_INCOMPATIBLE,
            });
        }
        Err(e) => return Err(e.into()),
    };
    out.insert("compatible".into(), true.into());
    out.insert("c".into(), to_value(&me.c));
    out.insert("entropy_bits".into(), me.entropy.into());
    out.insert("lambda_x".into(), me.lambda_x.into());
    out.insert("pns".into(), (mx.p00() - me.lambda_x).into());
    out.insert("iterations".into(), me.iterations.into());
    out.insert("residual".into(), me.residual.into());
    if cli.verify {
        let mut checks = Map::new();
        let mut agree = causal_bounds::is_member(&me.c, &spec);
        match grid_for(&spec)? {
            Some(g) if reduce(&spec)?.free.len() <= 2 => {
                let (h, _) = grid_max_entropy(&spec, &g)?;
                // every grid point is feasible, so none may beat the optimum
                agree &= h <= me.entropy + 1e-7;
                checks.insert("grid_entropy_bits".into(), h.into());
                checks.insert("grid_resolution".into(), g.resolution().into());
            }
            _ => {
                checks.insert("grid_entropy_bits".into(), Value::Null);
            }
        }
        checks.insert("agrees".into(), agree.into());
        out.insert("verify".into(), Value::Object(checks));
        if !agree {
            code = EXIT_VERIFY_FAILED;
        }
    }
    if cli.dump_polytope {
        out.insert("polytope".into(), to_value(&spec));
    }
    Ok(Outcome {
        report: Value::Object(out),
        code,
    })
}

fn cmd_info(cli: &Cli, args: &InfoArgs) -> Result<Outcome, Failure> {
    if let (Some(path), Some(lambda)) = (&args.trial_x, args.lambda) {
        let m = load_marginal(path)?;
        let r = info_report(&m, lambda)?;
        let mut out = match to_value(&r) {
            Value::Object(o) => o,
            _ => unreachable!("struct serializes to an object"),
        };
        let mut code = 0;
        if cli.verify {
            let enumerated = noise_outcome_information_enumerated(&m, lambda)?;
            let mut agree = (enumerated - r.i_nz_z).abs() <= 1e-12;
            let mut checks = Map::new();
            checks.insert("i_nz_z_enumerated".into(), enumerated.into());
            let pairs: [(&str, Query, Result<f64, Error>); 3] = [
                ("pns", Query::Pns, pns_from_lambda(&m, lambda)),
                (
                    "suff_nonmono",
                    Query::SuffNonmono,
                    prob_sufficient_nonmonotonicity(&m, lambda),
                ),
                (
                    "nec_nonmono",
                    Query::NecNonmono,
                    prob_necessary_nonmonotonicity(&m, lambda),
                ),
            ];
            for (name, q, closed) in pairs {
                match (closed, abduction_oracle(&m, lambda, q)) {
                    (Ok(a), Ok(b)) => {
                        agree &= (a - b).abs() <= 1e-12;
                        checks.insert(name.into(), a.into());
                    }
                    (Err(_), Err(_)) => {
                        checks.insert(name.into(), Value::Null);
                    }
                    _ => agree = false,
                }
            }
            checks.insert("agrees".into(), agree.into());
            out.insert("verify".into(), Value::Object(checks));
            if !agree {
                code = EXIT_VERIFY_FAILED;
            }
        }
        return Ok(Outcome {
            report: Value::Object(out),
            code,
        });
    }
    let verdict = if let (Some(hyp), Some(path)) = (args.hyp_nz_z, &args.trial_y) {
        falsify_by_marginal_info(hyp, &load_marginal(path)?)?
    } else if let (Some(hyp), Some(path)) = (args.hyp_xz_given_nz, &args.trivariate) {
        let table = TrivariateTable::from_json(&read(path)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        falsify_by_conditional_info(hyp, &table)?
    } else {
        return Err(Failure::Usage(
            "info needs --trial-x with --lambda, --hyp-nz-z with --trial-y, \
             or --hyp-xz-given-nz with --trivariate"
                .into(),
        ));
    };
    let code = if verdict.falsified { EXIT_FALSIFIED } else { 0 };
    Ok(Outcome {
        report: to_value(&verdict),
        code,
    })
}

fn cmd_sweep(config: &Path, out: &Path) -> Result<Outcome, Failure> {
    let cfg = SweepConfig::from_json(&read(config)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    let rows = run_sweep(&cfg)?;
    write_sweep_csv(
        out,
        &rows,
        cfg.wants(causal_bounds::sweep::SweepOutput::LambdaRangeWidth),
    )?;
    let (mean, degenerate_mean) = entropy_means(&rows);
    Ok(Outcome::ok(json!({
        "rows": rows.len(),
        "compatible": rows.iter().filter(|r| r.compatible).count(),
        "mean_entropy_bits": mean,
        "degenerate_slice_mean_entropy_bits": degenerate_mean,
        "out": out.display().to_string(),
    })))
}

fn write_sweep_csv(path: &Path, rows: &[SweepRow], with_width: bool) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Usage(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec![
        "p_y0",
        "pp00",
        "pp01",
        "compatible",
        "entropy_bits",
        "lambda_min_restricted",
        "lambda_max",
        "maxent_lambda",
        "maxent_lambda_normalized",
    ];
    if with_width {
        header.push("lambda_range_width");
    }
    w.write_record(&header).map_err(io)?;
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for r in rows {
        let mut rec = vec![
            fmt_float(r.p_y0),
            fmt_float(r.pp00),
            fmt_float(r.pp01),
            r.compatible.to_string(),
            opt(r.entropy_bits),
            opt(r.lambda_min_restricted),
            opt(r.lambda_max),
            opt(r.maxent_lambda),
            opt(r.maxent_lambda_normalized),
        ];
        if with_width {
            rec.push(opt(r.lambda_range_width));
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Rounds to 12 significant digits; `-0` becomes `0`.
fn round12(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    r + 0.0
}

/// Shortest representation of the 12-digit rounding.
fn fmt_float(v: f64) -> String {
    let r = round12(v);
    if r == r.trunc() && r.abs() < 1e15 {
        format!("{r:.1}")
    } else {
        format!("{r}")
    }
}

fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round12(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

fn print_report(report: &Value, as_json: bool) {
    let report = normalize(report.clone());
    if as_json {
        println!(
            "{}",
            serde_json::to_string(&report).expect("value serializes")
        );
        return;
    }
    match &report {
        Value::Object(o) => {
            for (k, v) in o {
                match v {
                    Value::Array(items) if items.iter().all(Value::is_string) => {
                        if items.is_empty() {
                            println!("{k}: none");
                        }
                        for s in items {
                            println!("{k}: {}", s.as_str().unwrap_or_default());
                        }
                    }
                    Value::String(s) => println!("{k}: {s}"),
                    _ => println!("{k}: {v}"),
                }
            }
        }
        other => println!("{other}"),
    }
}
