//! `superindex` command line.
//!
//! Exit status: 0 when every check passes, 2 when a check or input validation
//! fails, 1 on I/O or parse errors.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::{json, Value};

use superindex::chern::{self, chern_form, check_closed, geometric_grid, rg_class_residual, witten_index, UMode};
use superindex::examples::{self, CircleGrading, RandomOptions, Spin, Supercharge};
use superindex::family::cocycle::IndexOptions;
use superindex::family::{assemble_index, build_cover, spectral_scan, FamilySample};
use superindex::json::{self as sj, Example, ExampleRef, ProblemSpec, SCHEMA_VERSION};
use superindex::linalg;
use superindex::superconn::extract_superconnection;
use superindex::{Error, Superconnection};

#[derive(Parser)]
#[command(name = "superindex", version, about = "Superconnections, Chern forms and families index cocycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Problem spec (JSON).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance for the command's pass/fail check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Cutoff levels, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check the spec: grading, Clifford relations, oddness, self-adjointness.
    Validate,
    /// Chern form at u = 1 and its closedness.
    Chern,
    /// Witten index of a supercharge and the drift of sTr e^{-tQ²}.
    Witten,
    /// Super-semigroup law and recovery of the superconnection.
    Semigroup,
    /// Eta forms over the cutoff charts of a family.
    Eta,
    /// Differential index cocycle of a family.
    Index,
    /// Print a spec for a built-in example.
    Example(ExampleArgs),
    /// Random-corpus self test.
    Suite {
        /// Number of random superconnections.
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

#[derive(Args)]
struct ExampleArgs {
    /// One of susy_oscillator, circle_dirac, spectral_flow, constant_spectrum, random.
    name: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    spin: Option<SpinArg>,
    #[arg(long, value_enum)]
    grading: Option<GradingArg>,
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Write out the built data instead of a reference to the example.
    #[arg(long)]
    expand: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpinArg {
    Periodic,
    Antiperiodic,
}

#[derive(Clone, Copy, ValueEnum)]
enum GradingArg {
    Spinor,
    ZeroModeEven,
}

/// How a run ended, mapped to the exit status.
enum Failure {
    /// I/O, parse or usage problems.
    Input(anyhow::Error),
    /// The input was read but failed validation.
    Invalid(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let root = match &e {
            Error::Stage { source, .. } => source.as_ref(),
            other => other,
        };
        match root {
            Error::Parse(_) | Error::Json(_) => Failure::Input(e.into()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SUPERINDEX_LOG")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = run(&cli.command, &cli.common);
    let (value, passed) = match outcome {
        Ok(v) => v,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("validation failed: {msg}");
            (json!({"schema_version": SCHEMA_VERSION, "passed": false, "error": msg}), false)
        }
    };
    if let Err(e) = emit(&value, &cli.common) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(if passed { 0 } else { 2 })
}

fn emit(value: &Value, common: &Common) -> anyhow::Result<()> {
    let text = match common.format {
        Format::Json => serde_json::to_string_pretty(value)? + "\n",
        Format::Csv => report::to_csv(value),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(common: &Common) -> Result<(ProblemSpec, Example), Failure> {
    let path = common.spec.as_ref().ok_or_else(|| anyhow::anyhow!("this command needs --spec"))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = ProblemSpec::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    info!("loaded {}", path.display());
    let built = spec.build()?;
    Ok((spec, built))
}

fn run(cmd: &Command, common: &Common) -> Outcome {
    match cmd {
        Command::Validate => validate(common),
        Command::Chern => chern_cmd(common),
        Command::Witten => witten_cmd(common),
        Command::Semigroup => semigroup_cmd(common),
        Command::Eta => family_cmd(common, true),
        Command::Index => family_cmd(common, false),
        Command::Example(args) => example_cmd(args, common),
        Command::Suite { count } => suite_cmd(*count, common),
    }
}

fn as_superconnection(ex: &Example) -> Result<Superconnection, Failure> {
    match ex {
        Example::Superconnection(a) => Ok(a.clone()),
        Example::Supercharge(s) => Ok(s.superconnection()?),
        Example::Family(f) => Ok(f.global.clone()),
    }
}

fn as_supercharge(ex: &Example) -> Result<Supercharge, Failure> {
    match ex {
        Example::Supercharge(s) => Ok(s.clone()),
        Example::Superconnection(a) if a.signature().m == 0 => {
            let b = a.bundle();
            Ok(Supercharge {
                name: "superconnection".into(),
                matrix: a.component(0).body(),
                p: b.p(),
                q: b.q(),
                module: Some(b.module.clone()),
            })
        }
        _ => Err(Failure::Input(anyhow::anyhow!("this command needs a supercharge or a superconnection over a point"))),
    }
}

fn as_family(ex: &Example) -> Result<FamilySample, Failure> {
    match ex {
        Example::Family(f) => Ok(f.clone()),
        _ => Err(Failure::Input(anyhow::anyhow!("this command needs a family"))),
    }
}

fn lambdas(common: &Common, spec: &ProblemSpec, family: &FamilySample) -> Result<Vec<f64>, Failure> {
    common
        .lambda
        .clone()
        .or_else(|| spec.lambdas.clone())
        .or_else(|| examples::default_lambdas(&family.name))
        .ok_or_else(|| Failure::Input(anyhow::anyhow!("no cutoff levels: pass --lambda or set `lambdas` in the spec")))
}

fn superconnection_checks(a: &Superconnection) -> Value {
    let sa = a.self_adjoint_report();
    json!({
        "rank": [a.bundle().p(), a.bundle().q()],
        "clifford_degree": a.bundle().module.algebra.degree(),
        "clifford_relations": a.bundle().module.relations_residual(),
        "clifford_linear": a.clifford_linear_residual(),
        "odd_part_defect": a.x().even_part().max_abs(),
        "self_adjoint": sa.max_residual(),
    })
}

fn validate(common: &Common) -> Outcome {
    let (spec, ex) = load(common)?;
    let tol = common.tol.unwrap_or(1e-10);
    let (kind, checks) = match &ex {
        Example::Superconnection(a) => ("superconnection", superconnection_checks(a)),
        Example::Supercharge(s) => {
            let herm = linalg::max_abs(&(&s.matrix - s.matrix.adjoint()));
            let even = linalg::max_abs(&linalg::even_part(&s.matrix, s.p));
            ("supercharge", json!({"rank": [s.p, s.q], "self_adjoint": herm, "odd_part_defect": even}))
        }
        Example::Family(f) => {
            let mut c = superconnection_checks(&f.global);
            let scan = spectral_scan(f)?;
            let ls = lambdas(common, &spec, f).ok();
            let covered = match &ls {
                Some(ls) => json!(build_cover(f, &scan, ls).is_ok()),
                None => Value::Null,
            };
            c["grid_points"] = json!(f.grid.num_points());
            c["cover"] = covered;
            ("family", c)
        }
    };
    let achieved = checks
        .as_object()
        .unwrap()
        .iter()
        .filter(|(k, _)| !matches!(k.as_str(), "rank" | "clifford_degree" | "grid_points" | "cover"))
        .filter_map(|(_, v)| v.as_f64())
        .fold(0.0, f64::max);
    let cover_ok = checks.get("cover").and_then(Value::as_bool).unwrap_or(true);
    let passed = achieved <= tol && cover_ok;
    Ok((
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "validate",
            "kind": kind,
            "tol_requested": tol,
            "tol_achieved": achieved,
            "checks": checks,
            "passed": passed,
        }),
        passed,
    ))
}

fn chern_cmd(common: &Common) -> Outcome {
    let (_, ex) = load(common)?;
    let a = as_superconnection(&ex)?;
    let tol = common.tol.unwrap_or(1e-9);
    let ch = chern_form(&a, UMode::Numeric(1.0))?;
    let closed = check_closed(&ch);
    let achieved = closed.values().copied().fold(0.0, f64::max);
    let components: serde_json::Map<String, Value> = ch
        .components
        .iter()
        .map(|(k, t)| (k.to_string(), serde_json::to_value(sj::ring_to_json(&t.form, false)).unwrap()))
        .collect();
    let passed = achieved <= tol;
    Ok((
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "chern",
            "n": ch.n,
            "u": 1.0,
            "components": components,
            "closed_residual": closed,
            "parity_residual": ch.parity_residual(),
            "tol_requested": tol,
            "tol_achieved": achieved,
            "passed": passed,
        }),
        passed,
    ))
}

fn witten_cmd(common: &Common) -> Outcome {
    let (_, ex) = load(common)?;
    let s = as_supercharge(&ex)?;
    let tol = common.tol.unwrap_or(1e-10);
    let ts = geometric_grid(0.05, 20.0, 24);
    let r = witten_index(&s.matrix, s.p, s.q, &ts)?;
    let passed = r.max_drift <= tol;
    Ok((
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "witten",
            "rank": [s.p, s.q],
            "index": r.index,
            "even_kernel": r.even_kernel,
            "odd_kernel": r.odd_kernel,
            "partition": r.partition,
            "tol_requested": tol,
            "tol_achieved": r.max_drift,
            "passed": passed,
        }),
        passed,
    ))
}

const SEMIGROUP_TIMES: [(f64, f64); 4] = [(0.3, 0.7), (0.0, 1.1), (1.5, 0.25), (0.05, 2.0)];

fn semigroup_cmd(common: &Common) -> Outcome {
    let (_, ex) = load(common)?;
    let a = as_superconnection(&ex)?;
    let tol = common.tol.unwrap_or(1e-9);
    let mut rows = Vec::new();
    let mut achieved: f64 = 0.0;
    for (s, t) in SEMIGROUP_TIMES {
        let r = a.check_semigroup(s, t)?;
        achieved = achieved.max(r);
        rows.push(json!({"s": s, "t": t, "residual": r}));
    }
    let ex = extract_superconnection(&a.spar(0.0, "theta")?, a.bundle())?;
    let round_trip = (&ex.connection.x() - &a.x()).max_abs();
    achieved = achieved.max(round_trip);
    let passed = achieved <= tol && !ex.flagged();
    Ok((
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "semigroup",
            "semigroup": rows,
            "round_trip_residual": round_trip,
            "tol_requested": tol,
            "tol_achieved": achieved,
            "passed": passed,
        }),
        passed,
    ))
}

/// Tolerances the family commands hold the cocycle to.
const CECH_TOL: f64 = 1e-6;
const GLUING_TOL: f64 = 1e-8;

fn family_cmd(common: &Common, eta_only: bool) -> Outcome {
    let (spec, ex) = load(common)?;
    let family = as_family(&ex)?;
    let ls = lambdas(common, &spec, &family)?;
    let opts = IndexOptions { eta_tol: common.tol.unwrap_or(1e-9), ..IndexOptions::default() };
    info!("assembling {} over {} points, λ = {ls:?}", family.name, family.grid.num_points());
    let cocycle = assemble_index(&family, &ls, opts)?;
    let gluing = cocycle.gluing_report().max();
    let cech = cocycle.cech.max();
    let passed = cech <= CECH_TOL && gluing <= GLUING_TOL;
    let body = sj::cocycle_to_json(&family, &cocycle, &opts);
    let mut value = if eta_only {
        json!({
            "schema_version": SCHEMA_VERSION,
            "family": body.family,
            "lambdas": body.lambdas,
            "eta_tol_requested": body.eta_tol_requested,
            "eta_error_achieved": body.eta_error_achieved,
            "eta": body.eta,
            "cech": body.cech,
        })
    } else {
        serde_json::to_value(&body).map_err(anyhow::Error::from)?
    };
    value["command"] = json!(if eta_only { "eta" } else { "index" });
    value["cech_tol"] = json!(CECH_TOL);
    value["gluing_tol"] = json!(GLUING_TOL);
    value["gluing_achieved"] = json!(gluing);
    value["passed"] = json!(passed);
    Ok((value, passed))
}

fn example_cmd(args: &ExampleArgs, common: &Common) -> Outcome {
    let r = ExampleRef {
        name: args.name.clone(),
        n: args.n,
        spin: args.spin.map(|s| match s {
            SpinArg::Periodic => Spin::Periodic,
            SpinArg::Antiperiodic => Spin::Antiperiodic,
        }),
        grading: args.grading.map(|g| match g {
            GradingArg::Spinor => CircleGrading::Spinor,
            GradingArg::ZeroModeEven => CircleGrading::ZeroModeEven,
        }),
        extent: args.extent,
        resolution: args.resolution,
        seed: common.seed,
    };
    let built = r.build()?;
    let mut spec = ProblemSpec {
        schema_version: SCHEMA_VERSION,
        superconnection: None,
        supercharge: None,
        family: None,
        example: None,
        lambdas: common.lambda.clone(),
    };
    if args.expand {
        match &built {
            Example::Superconnection(a) => spec.superconnection = Some(sj::superconnection_to_json(a)),
            // A Clifford action only survives in superconnection form.
            Example::Supercharge(s) if s.module.is_some() => {
                spec.superconnection = Some(sj::superconnection_to_json(&s.superconnection()?))
            }
            Example::Supercharge(s) => {
                spec.supercharge = Some(sj::SuperchargeJson { matrix: sj::matrix_to_json(&s.matrix), p: s.p, q: s.q })
            }
            Example::Family(f) => {
                spec.lambdas = spec.lambdas.or_else(|| examples::default_lambdas(&f.name));
                spec.family = Some(sj::family_to_json(f))
            }
        }
    } else {
        spec.example = Some(r);
    }
    Ok((serde_json::to_value(&spec).map_err(anyhow::Error::from)?, true))
}

fn suite_cmd(count: usize, common: &Common) -> Outcome {
    use rayon::prelude::*;
    let seed = common.seed.unwrap_or(0);
    let tol = common.tol.unwrap_or(1e-9);
    let corpus = examples::random_corpus(seed, count, &RandomOptions::default())?;
    let rows: Vec<Value> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, a)| -> Result<Value, Error> {
            let semigroup =
                SEMIGROUP_TIMES.iter().map(|&(s, t)| a.check_semigroup(s, t)).collect::<Result<Vec<_>, _>>()?;
            let ex = extract_superconnection(&a.spar(0.0, "theta")?, a.bundle())?;
            let ch = chern_form(a, UMode::Numeric(1.0))?;
            let rg = [0.5, 2.0].iter().map(|&mu| rg_class_residual(a, mu, 1e-11)).collect::<Result<Vec<_>, _>>()?;
            Ok(json!({
                "case": i,
                "rank": [a.bundle().p(), a.bundle().q()],
                "n": a.bundle().module.algebra.degree(),
                "semigroup": semigroup.into_iter().fold(0.0, f64::max),
                "round_trip": (&ex.connection.x() - &a.x()).max_abs(),
                "chern_closed": check_closed(&ch).values().copied().fold(0.0, f64::max),
                "rg_class": rg.into_iter().fold(0.0, f64::max),
            }))
        })
        .collect::<Result<_, _>>()?;
    let worst = |key: &str| rows.iter().filter_map(|r| r[key].as_f64()).fold(0.0, f64::max);
    let algebraic = worst("semigroup").max(worst("round_trip")).max(worst("chern_closed"));
    let rg = worst("rg_class");
    let susy = examples::susy_oscillator(16)?;
    let w = witten_index(&susy.matrix, susy.p, susy.q, &geometric_grid(0.05, 20.0, 24))?;
    let pf = chern::pfaffian_section(&corpus[0], &geometric_grid(0.1, 10.0, 16))?.report();
    let passed = algebraic <= tol && rg <= 1e-6 && w.index == 1 && w.max_drift <= 1e-10;
    Ok((
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "suite",
            "seed": seed,
            "cases": rows,
            "witten_susy_16": {"index": w.index, "drift": w.max_drift},
            "pfaffian_case_0": pf,
            "tol_requested": tol,
            "tol_achieved": algebraic,
            "rg_tol": 1e-6,
            "rg_achieved": rg,
            "passed": passed,
        }),
        passed,
    ))
}
