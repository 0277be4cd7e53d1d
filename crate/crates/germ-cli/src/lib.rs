//! The `germ` binary: a thin, deterministic dispatcher over the library.
//!
//! Exit codes: 0 success, 1 domain error (the library error, whose message
//! starts with the error name, goes to the diagnostic stream), 2 usage
//! error. The same argv always produces byte-identical output; JSON keys
//! are emitted in sorted order and floats in shortest round-trip form.
//! JSON output shapes are documented by the schemas in `docs/schemas/`.

use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use germ::dynamics::{
    estimate_b, estimate_c, fit_gamma, iterate_map, log_spaced_checkpoints, sandwich_check,
    write_csv, MapKind, RealMapSpec, Trace,
};
use germ::fields::{Elem, Field};
use germ::normal_form::{predicted_asymptotics, takens_normal_form, AsymptoticPrediction};
use germ::pgroup::{
    class_census, class_count_formula, landau_enumerate, qn_bound, representative_list,
    verify_census_vs_theory,
};
use germ::series::TruncSeries;

/// Truncated changes of variable: exact normal forms, conjugacy censuses,
/// and orbit asymptotics.
#[derive(Parser, Debug)]
#[command(name = "germ", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format (csv only applies to `dyn iterate`)
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact series arithmetic and normal forms
    Series {
        #[command(subcommand)]
        op: SeriesOp,
    },
    /// The finite groups over F_p: censuses, class counts, q(N) bounds
    Pgroup {
        #[command(subcommand)]
        op: PgroupOp,
    },
    /// Floating-point orbits and estimators
    Dyn {
        #[command(subcommand)]
        op: DynOp,
    },
}

#[derive(Args, Debug)]
struct FieldArg {
    /// Coefficient field: `Q` or `Fp:P` (e.g. `Fp:5`)
    #[arg(long, default_value = "Q")]
    field: String,
}

#[derive(Subcommand, Debug)]
enum SeriesOp {
    /// Compose two series: lhs(rhs(x))
    Compose {
        #[command(flatten)]
        field: FieldArg,
        /// Coefficients a_2,a_3,... of the outer series
        #[arg(long, allow_hyphen_values = true)]
        lhs: String,
        /// Coefficients a_2,a_3,... of the inner series
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
    },
    /// Compositional inverse
    Invert {
        #[command(flatten)]
        field: FieldArg,
        /// Coefficients a_2,a_3,...
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
    },
    /// Conjugate: by^{-1} . f . by
    Conjugate {
        #[command(flatten)]
        field: FieldArg,
        /// Coefficients of f
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        /// Coefficients of the conjugator
        #[arg(long, allow_hyphen_values = true)]
        by: String,
    },
    /// Takens normal form with invariants and conjugator
    NormalForm {
        #[command(flatten)]
        field: FieldArg,
        /// Coefficients a_2,a_3,...
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
    },
    /// Predicted orbit asymptotics (b, C, gamma) from the normal form
    Asymptotics {
        #[command(flatten)]
        field: FieldArg,
        /// Coefficients a_2,a_3,...
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
    },
}

#[derive(Subcommand, Debug)]
enum PgroupOp {
    /// Exhaustive conjugacy-class census of the group over F_p
    Census {
        #[arg(long)]
        p: u64,
        /// Worker threads (default: GERM_THREADS or 1)
        #[arg(long)]
        threads: Option<usize>,
        /// Allow the long p = 7 run
        #[arg(long)]
        large: bool,
    },
    /// Theoretical class representatives
    Reps {
        #[arg(long)]
        p: u64,
    },
    /// Exact class count from the closed formula
    Count {
        #[arg(long)]
        p: u64,
    },
    /// Witness for q(N): smallest p with p^{p+1} >= N
    Qbound {
        #[arg(long = "N")]
        n: u128,
    },
    /// All solutions of 1/m_1 + ... + 1/m_k = 1 (k <= 6)
    Landau {
        #[arg(long)]
        k: u32,
    },
    /// Run the census and check it against the theoretical class list
    Verify {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        large: bool,
    },
}

#[derive(Args, Debug)]
struct MapArgs {
    /// Map: `sin`, `sin-z` (sin transported through z = x^2/3), or
    /// `poly:C2,C3,...` (rational coefficients a_2,a_3,...)
    #[arg(long)]
    map: String,
    /// Starting point
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    /// Claimed basin bound (default: x0)
    #[arg(long)]
    basin: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum DynOp {
    /// Iterate the map and record the checkpoint schedule
    Iterate {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long = "n-max")]
        n_max: u64,
        /// Extra checkpoint (repeatable)
        #[arg(long = "extra")]
        extras: Vec<u64>,
    },
    /// Point estimators: b_hat from x_{2^m} and/or c_hat = n x_n^r
    Estimate {
        #[command(flatten)]
        map: MapArgs,
        /// Dyadic depth for b_hat = -log2(x_{2^m}) / m
        #[arg(long)]
        m: Option<u32>,
        /// Index for the amplitude estimator
        #[arg(long)]
        n: Option<u64>,
        /// Flatness for the amplitude estimator
        #[arg(long)]
        r: Option<usize>,
    },
    /// Fit the logarithmic correction over a checkpoint window
    Fit {
        #[command(flatten)]
        map: MapArgs,
        /// Window `LO:HI` of orbit indices (log-spaced checkpoints are
        /// added automatically)
        #[arg(long)]
        window: String,
        /// Orbit length (default: the window's upper end)
        #[arg(long = "n-max")]
        n_max: Option<u64>,
    },
    /// Pin the map between comparator germs and report the orbit shift bound
    Sandwich {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 0.9)]
        delta: f64,
        /// Pointwise grid size over (0, x0]
        #[arg(long, default_value_t = 500)]
        grid: usize,
        #[arg(long = "n-max", default_value_t = 10_000)]
        n_max: u64,
    },
}

enum CliError {
    Usage(String),
    Domain(String),
}

fn dom<E: Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

/// Run the CLI against explicit argv and streams; returns the exit code.
/// This is the whole binary — `main` only wires in the process streams.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            if is_help {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            return 2;
        }
    };
    match execute(&cli) {
        Ok(rendered) => match &cli.out {
            None => {
                let _ = out.write_all(rendered.as_bytes());
                0
            }
            Some(path) => match std::fs::write(path, rendered.as_bytes()) {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(err, "Io: cannot write {}: {e}", path.display());
                    1
                }
            },
        },
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            2
        }
        Err(CliError::Domain(msg)) => {
            let _ = writeln!(err, "{msg}");
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    if cli.format == Format::Csv && !matches!(cli.cmd, Cmd::Dyn { op: DynOp::Iterate { .. } }) {
        return Err(CliError::Usage(
            "--format csv is only available for `dyn iterate`".to_string(),
        ));
    }
    match &cli.cmd {
        Cmd::Series { op } => series_cmd(op, cli.format),
        Cmd::Pgroup { op } => pgroup_cmd(op, cli.format),
        Cmd::Dyn { op } => dyn_cmd(op, cli.format),
    }
}

// ---------------------------------------------------------------- series --

fn parse_field(text: &str) -> Result<Field, CliError> {
    if text == "Q" {
        return Ok(Field::rationals());
    }
    if let Some(p) = text.strip_prefix("Fp:") {
        let p: u64 = p
            .parse()
            .map_err(|_| CliError::Usage(format!("--field: `{text}` is not Q or Fp:P")))?;
        return Field::prime_field(p).map_err(dom);
    }
    Err(CliError::Usage(format!("--field: `{text}` is not Q or Fp:P")))
}

fn parse_series(field: &FieldArg, coeffs: &str) -> Result<TruncSeries, CliError> {
    let field = parse_field(&field.field)?;
    TruncSeries::parse(coeffs, field).map_err(dom)
}

fn elem_json(e: &Elem) -> Value {
    match e.as_residue() {
        Some(t) => json!(t),
        None => json!(e.render_plain()),
    }
}

fn coeffs_json(s: &TruncSeries) -> Value {
    Value::Array(s.coeffs().iter().map(elem_json).collect())
}

fn series_payload(s: &TruncSeries) -> Value {
    json!({
        "field": s.field().to_string(),
        "precision": s.precision(),
        "coeffs": coeffs_json(s),
    })
}

fn render_series(s: &TruncSeries, format: Format) -> String {
    match format {
        Format::Json => pretty(&series_payload(s)),
        _ => format!("field: {}\nprecision: {}\ncoeffs: {}\nseries: {}\n", s.field(), s.precision(), s.format(), s),
    }
}

fn series_cmd(op: &SeriesOp, format: Format) -> Result<String, CliError> {
    match op {
        SeriesOp::Compose { field, lhs, rhs } => {
            let f = parse_series(field, lhs)?;
            let g = parse_series(field, rhs)?;
            Ok(render_series(&f.compose(&g).map_err(dom)?, format))
        }
        SeriesOp::Invert { field, coeffs } => {
            let f = parse_series(field, coeffs)?;
            Ok(render_series(&f.invert(), format))
        }
        SeriesOp::Conjugate { field, coeffs, by } => {
            let f = parse_series(field, coeffs)?;
            let g = parse_series(field, by)?;
            Ok(render_series(&f.conjugate(&g).map_err(dom)?, format))
        }
        SeriesOp::NormalForm { field, coeffs } => {
            let f = parse_series(field, coeffs)?;
            let nf = takens_normal_form(&f).map_err(dom)?;
            let payload = match &nf {
                None => json!({
                    "field": f.field().to_string(),
                    "precision": f.precision(),
                    "flat": true,
                }),
                Some(nf) => json!({
                    "field": f.field().to_string(),
                    "precision": f.precision(),
                    "flat": false,
                    "r": nf.r,
                    "alpha": elem_json(&nf.alpha),
                    "beta": elem_json(&nf.beta),
                    "beta_significant": nf.beta_significant,
                    "conjugator": coeffs_json(&nf.conjugator),
                    "normalized": coeffs_json(&nf.normalized),
                }),
            };
            Ok(match format {
                Format::Json => pretty(&payload),
                _ => match &nf {
                    None => "flat: true\n".to_string(),
                    Some(nf) => format!(
                        "flat: false\nr: {}\nalpha: {}\nbeta: {}\nbeta_significant: {}\nconjugator: {}\nnormalized: {}\n",
                        nf.r,
                        nf.alpha.render_plain(),
                        nf.beta.render_plain(),
                        nf.beta_significant,
                        nf.conjugator.format(),
                        nf.normalized.format(),
                    ),
                },
            })
        }
        SeriesOp::Asymptotics { field, coeffs } => {
            let f = parse_series(field, coeffs)?;
            let nf = takens_normal_form(&f).map_err(dom)?.ok_or_else(|| {
                CliError::Domain(
                    "InvalidParameter: a flat series has no decaying orbit to predict".to_string(),
                )
            })?;
            let pred = predicted_asymptotics(&nf).map_err(dom)?;
            let payload = json!({
                "b": pred.b.to_string(),
                "c_base": pred.c_base.to_string(),
                "c_root": pred.c_root,
                "c_approx": pred.c_approx,
                "gamma": pred.gamma.as_ref().map(|g| g.to_string()),
            });
            Ok(match format {
                Format::Json => pretty(&payload),
                _ => format!(
                    "b: {}\nC: ({})^(-1/{}) ~ {}\ngamma: {}\n",
                    pred.b,
                    pred.c_base,
                    pred.c_root,
                    pred.c_approx,
                    pred.gamma.as_ref().map_or("none".to_string(), |g| g.to_string()),
                ),
            })
        }
    }
}

// ---------------------------------------------------------------- pgroup --

fn thread_count(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("GERM_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1)
}

fn pgroup_cmd(op: &PgroupOp, format: Format) -> Result<String, CliError> {
    match op {
        PgroupOp::Census { p, threads, large } => {
            let census = class_census(*p, thread_count(*threads), *large).map_err(dom)?;
            let classes: Vec<Value> = census
                .classes
                .iter()
                .map(|c| {
                    json!({
                        "rep_index": c.rep.index(),
                        "rep_coeffs": c.rep.coeffs(),
                        "size": c.size,
                    })
                })
                .collect();
            let payload = json!({
                "p": census.p,
                "order": census.order,
                "class_count": census.classes.len(),
                "classes": classes,
            });
            Ok(match format {
                Format::Json => pretty(&payload),
                _ => {
                    let mut s = format!(
                        "p: {}\norder: {}\nclass_count: {}\n",
                        census.p,
                        census.order,
                        census.classes.len()
                    );
                    for c in &census.classes {
                        s.push_str(&format!(
                            "rep_index={} size={} rep={}\n",
                            c.rep.index(),
                            c.size,
                            c.rep.coeffs().iter().map(u64::to_string).collect::<Vec<_>>().join(","),
                        ));
                    }
                    s
                }
            })
        }
        PgroupOp::Reps { p } => {
            let reps = representative_list(*p).map_err(dom)?;
            let payload = json!({
                "p": p,
                "count": reps.len(),
                "reps": reps
                    .iter()
                    .map(|r| json!({ "index": r.index(), "coeffs": r.coeffs() }))
                    .collect::<Vec<_>>(),
            });
            Ok(match format {
                Format::Json => pretty(&payload),
                _ => {
                    let mut s = format!("p: {p}\ncount: {}\n", reps.len());
                    for r in &reps {
                        s.push_str(&format!(
                            "index={} coeffs={}\n",
                            r.index(),
                            r.coeffs().iter().map(u64::to_string).collect::<Vec<_>>().join(","),
                        ));
                    }
                    s
                }
            })
        }
        PgroupOp::Count { p } => {
            Field::prime_field(*p).map_err(dom)?;
            let count = class_count_formula(*p);
            Ok(match format {
                Format::Json => pretty(&json!({ "p": p, "class_count": count })),
                _ => format!("p: {p}\nclass_count: {count}\n"),
            })
        }
        PgroupOp::Qbound { n } => {
            if *n < 2 {
                return Err(CliError::Usage("--N must be at least 2".to_string()));
            }
            let q = qn_bound(*n);
            let order = u64::try_from(q.order)
                .map(|o| json!(o))
                .unwrap_or_else(|_| json!(q.order.to_string()));
            let payload = json!({
                "p": q.p,
                "order": order,
                "classes": q.class_count,
                "crude_bound": q.crude_bound,
            });
            Ok(match format {
                Format::Json => pretty(&payload),
                _ => format!(
                    "p: {}\norder: {}\nclasses: {}\ncrude_bound: {}\n",
                    q.p, q.order, q.class_count, q.crude_bound
                ),
            })
        }
        PgroupOp::Landau { k } => {
            let e = landau_enumerate(*k).map_err(dom)?;
            let payload = json!({
                "k": e.k,
                "count": e.solutions.len(),
                "max_order": e.max_order,
                "solutions": e.solutions.iter().map(|s| s.parts.clone()).collect::<Vec<_>>(),
            });
            Ok(match format {
                Format::Json => pretty(&payload),
                _ => {
                    let mut s = format!(
                        "k: {}\ncount: {}\nmax_order: {}\n",
                        e.k,
                        e.solutions.len(),
                        e.max_order
                    );
                    for sol in &e.solutions {
                        s.push_str(
                            &sol.parts.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
                        );
                        s.push('\n');
                    }
                    s
                }
            })
        }
        PgroupOp::Verify { p, threads, large } => {
            let census = class_census(*p, thread_count(*threads), *large).map_err(dom)?;
            let report = verify_census_vs_theory(&census).map_err(dom)?;
            let payload = json!({
                "p": report.p,
                "passed": report.all_passed(),
                "checks": report
                    .checks
                    .iter()
                    .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": &c.detail }))
                    .collect::<Vec<_>>(),
            });
            Ok(match format {
                Format::Json => pretty(&payload),
                _ => {
                    let mut s = format!("p: {}\npassed: {}\n", report.p, report.all_passed());
                    for c in &report.checks {
                        s.push_str(&format!(
                            "{}: {} ({})\n",
                            c.name,
                            if c.passed { "PASS" } else { "FAIL" },
                            c.detail
                        ));
                    }
                    s
                }
            })
        }
    }
}

// ------------------------------------------------------------------- dyn --

fn parse_map(args: &MapArgs) -> Result<RealMapSpec, CliError> {
    let kind = match args.map.as_str() {
        "sin" => MapKind::Sin,
        "sin-z" => MapKind::SinTransported,
        other => match other.strip_prefix("poly:") {
            Some(coeffs) => {
                MapKind::Poly(TruncSeries::parse(coeffs, Field::rationals()).map_err(dom)?)
            }
            None => {
                return Err(CliError::Usage(format!(
                    "--map: `{other}` is not sin, sin-z, or poly:COEFFS"
                )))
            }
        },
    };
    let basin = args.basin.unwrap_or(args.x0);
    RealMapSpec::new(kind, args.x0, basin).map_err(dom)
}

/// The exact series whose normal form predicts the map's asymptotics.
fn model_series(args: &MapArgs) -> Result<TruncSeries, CliError> {
    let q = Field::rationals();
    match args.map.as_str() {
        // sin to degree 7: enough for (r, alpha, beta) = (2, 1/6, 1/120).
        "sin" => TruncSeries::parse("0,-1/6,0,1/120,0,0", q).map_err(dom),
        // z - z^2 + (2/5) z^3: the sin expansion transported through z = x^2/3.
        "sin-z" => TruncSeries::parse("-1,2/5", q).map_err(dom),
        other => match other.strip_prefix("poly:") {
            Some(coeffs) => TruncSeries::parse(coeffs, q).map_err(dom),
            None => unreachable!("validated by parse_map"),
        },
    }
}

fn prediction_for(args: &MapArgs) -> Result<AsymptoticPrediction, CliError> {
    let series = model_series(args)?;
    let nf = takens_normal_form(&series).map_err(dom)?.ok_or_else(|| {
        CliError::Domain(
            "InvalidParameter: a flat map has no asymptotic prediction".to_string(),
        )
    })?;
    predicted_asymptotics(&nf).map_err(dom)
}

fn trace_payload(args: &MapArgs, spec: &RealMapSpec, n_max: u64, trace: &Trace) -> Value {
    json!({
        "map": &args.map,
        "x0": spec.x0(),
        "basin": spec.basin_bound(),
        "n_max": n_max,
        "checkpoints": trace.checkpoints.iter().map(|&(n, x)| json!([n, x])).collect::<Vec<_>>(),
    })
}

fn dyn_cmd(op: &DynOp, format: Format) -> Result<String, CliError> {
    match op {
        DynOp::Iterate { map, n_max, extras } => {
            let spec = parse_map(map)?;
            let trace = iterate_map(&spec, *n_max, extras).map_err(dom)?;
            Ok(match format {
                Format::Json => pretty(&trace_payload(map, &spec, *n_max, &trace)),
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&trace, &mut buf).expect("in-memory write");
                    String::from_utf8(buf).expect("csv is ascii")
                }
                Format::Text => {
                    let mut s = format!("map: {}\nx0: {}\nn_max: {n_max}\n", map.map, spec.x0());
                    for &(n, x) in &trace.checkpoints {
                        s.push_str(&format!("{n} {x}\n"));
                    }
                    s
                }
            })
        }
        DynOp::Estimate { map, m, n, r } => {
            if m.is_none() && n.is_none() {
                return Err(CliError::Usage(
                    "estimate needs --m (exponent) and/or --n with --r (amplitude)".to_string(),
                ));
            }
            if n.is_some() != r.is_some() {
                return Err(CliError::Usage(
                    "--n and --r must be given together".to_string(),
                ));
            }
            let spec = parse_map(map)?;
            let mut n_max = 0u64;
            let mut extras = Vec::new();
            if let Some(m) = m {
                if *m > 62 {
                    return Err(CliError::Usage("--m must be at most 62".to_string()));
                }
                n_max = n_max.max(1u64 << m);
            }
            if let Some(n) = n {
                n_max = n_max.max(*n);
                extras.push(*n);
            }
            let trace = iterate_map(&spec, n_max, &extras).map_err(dom)?;
            let mut payload = serde_json::Map::new();
            let mut text = String::new();
            if let Some(m) = m {
                let b_hat = estimate_b(&trace, *m).map_err(dom)?;
                payload.insert("m".to_string(), json!(m));
                payload.insert("b_hat".to_string(), json!(b_hat));
                text.push_str(&format!("b_hat(m={m}): {b_hat}\n"));
            }
            if let (Some(n), Some(r)) = (n, r) {
                let c_hat = estimate_c(&trace, *r, *n).map_err(dom)?;
                payload.insert("n".to_string(), json!(n));
                payload.insert("r".to_string(), json!(r));
                payload.insert("c_hat".to_string(), json!(c_hat));
                text.push_str(&format!("c_hat(n={n}, r={r}): {c_hat}\n"));
            }
            Ok(match format {
                Format::Json => pretty(&Value::Object(payload)),
                _ => text,
            })
        }
        DynOp::Fit { map, window, n_max } => {
            let (lo, hi) = parse_window(window)?;
            let spec = parse_map(map)?;
            let pred = prediction_for(map)?;
            let n_max = n_max.unwrap_or(hi).max(hi);
            let extras = log_spaced_checkpoints(lo.max(1), hi, 40);
            let trace = iterate_map(&spec, n_max, &extras).map_err(dom)?;
            let fit = fit_gamma(&trace, &pred, (lo, hi)).map_err(dom)?;
            let payload = json!({
                "b_hat": fit.b_hat,
                "c_hat": fit.c_hat,
                "gamma_hat": fit.gamma_hat,
                "residual_norm": fit.residual_norm,
                "window": [fit.window.0, fit.window.1],
                "predicted_b": pred.b_f64(),
                "predicted_c": pred.c_approx,
                "predicted_gamma": pred.gamma_f64(),
            });
            Ok(match format {
                Format::Json => pretty(&payload),
                _ => format!(
                    "window: [{}, {}]\nb_hat: {}\nc_hat: {}\ngamma_hat: {}\nresidual_norm: {}\npredicted_gamma: {}\n",
                    fit.window.0,
                    fit.window.1,
                    fit.b_hat,
                    fit.c_hat,
                    fit.gamma_hat,
                    fit.residual_norm,
                    pred.gamma_f64().map_or("none".to_string(), |g| g.to_string()),
                ),
            })
        }
        DynOp::Sandwich { map, delta, grid, n_max } => {
            let spec = parse_map(map)?;
            let report = sandwich_check(&spec, *delta, *grid, *n_max).map_err(dom)?;
            let violations = report.points.iter().filter(|p| !p.ok).count();
            let payload = json!({
                "delta": report.delta,
                "grid": report.points.len(),
                "n_max": n_max,
                "pointwise_ok": report.pointwise_ok,
                "violations": violations,
                "smallest_shift": report.smallest_shift,
                "checkpoints_checked": report.checkpoints_checked,
                "points": report
                    .points
                    .iter()
                    .map(|p| json!({
                        "x": p.x,
                        "lower": p.lower,
                        "fx": p.fx,
                        "upper": p.upper,
                        "ok": p.ok,
                    }))
                    .collect::<Vec<_>>(),
            });
            Ok(match format {
                Format::Json => pretty(&payload),
                _ => format!(
                    "delta: {}\ngrid: {}\npointwise_ok: {}\nviolations: {}\nsmallest_shift: {}\ncheckpoints_checked: {}\n",
                    report.delta,
                    report.points.len(),
                    report.pointwise_ok,
                    violations,
                    report.smallest_shift.map_or("none".to_string(), |k| k.to_string()),
                    report.checkpoints_checked,
                ),
            })
        }
    }
}

fn parse_window(text: &str) -> Result<(u64, u64), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 2 {
        if let (Ok(lo), Ok(hi)) = (parts[0].parse(), parts[1].parse()) {
            return Ok((lo, hi));
        }
    }
    Err(CliError::Usage(format!("--window: `{text}` is not LO:HI")))
}

/// Pretty JSON with sorted keys and a trailing newline: the canonical
/// output form (serde_json maps are ordered, floats shortest round-trip).
fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value is serializable");
    s.push('\n');
    s
}
