use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use gflab::arith::{fmt_rational, parse_rational, rat};
use gflab::ball::{Ball, ComplexBall};
use gflab::gfun::{find_functional_relations, find_ode, weil_height, weil_height_rational};
use gflab::isogeny::{self, IsogenyPair, Place, RelationBundle};
use gflab::padic::PadicNum;
use gflab::period;
use gflab::place::{self, CoeffBound};
use gflab::qexp::{self, Name};
use gflab::report::{run_suite_named, Report, SuiteError, SuiteOptions};
use gflab::series::QSeries;

#[derive(Parser, Debug)]
#[command(name = "gflab", version, about = "q-expansions, G-functions, multi-place evaluation and isogeny relations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Series order (number of coefficients past the offset).
    #[arg(long, global = true)]
    order: Option<i64>,
    /// Working precision in bits at the archimedean place.
    #[arg(long, global = true)]
    bits: Option<u64>,
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// p-adic precision K (results are mod p^K).
    #[arg(long, global = true)]
    precision: Option<i64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
    /// Exact cache format (qexp and gseries only).
    Cache,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print a named q-expansion.
    Qexp { name: String },
    /// Evaluate a series at a place.
    Eval {
        /// Series name or cache file.
        #[arg(long)]
        series: String,
        /// `inf` or `p=<prime>`.
        #[arg(long, default_value = "inf")]
        place: String,
        #[arg(long)]
        x: String,
    },
    /// Differential equation guessing.
    Ode {
        #[command(subcommand)]
        cmd: OdeCmd,
    },
    /// Polynomial relations between series.
    Relations {
        #[command(subcommand)]
        cmd: RelationsCmd,
    },
    /// Absolute logarithmic Weil height.
    Height {
        value: Option<String>,
        /// Primitive integer minimal polynomial "c0,c1,...".
        #[arg(long, allow_hyphen_values = true)]
        minpoly: Option<String>,
    },
    /// Run a verification suite.
    Verify { suite: String },
    /// Reconstruct G and write its expansion.
    Gseries,
    /// Classical modular polynomial.
    Modpoly {
        #[arg(long)]
        level: u64,
    },
    /// Isogeny pairs.
    Pair {
        #[command(subcommand)]
        cmd: PairCmd,
    },
    /// Relation bundles.
    Relation {
        #[command(subcommand)]
        cmd: RelationCmd,
    },
}

#[derive(Subcommand, Debug)]
enum OdeCmd {
    Guess {
        #[arg(long)]
        series: String,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        #[arg(long, default_value_t = 12)]
        max_degree: usize,
    },
}

#[derive(Subcommand, Debug)]
enum RelationsCmd {
    Find {
        /// Comma-separated series names or cache files.
        #[arg(long)]
        series: String,
        #[arg(long, default_value_t = 1)]
        delta: u32,
        #[arg(long, default_value_t = 0)]
        xdeg: usize,
    },
}

#[derive(Subcommand, Debug)]
enum PairCmd {
    /// Pair from the degree-2 parametrization of X0(2).
    X0 {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        p: u64,
        /// Leave a, b, d and the homology matrix unpopulated.
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Subcommand, Debug)]
enum RelationCmd {
    Build {
        #[arg(long)]
        pair_file: PathBuf,
        #[arg(long)]
        pair2_file: Option<PathBuf>,
    },
    Verify {
        #[arg(long)]
        rel: PathBuf,
        #[arg(long, value_delimiter = ',')]
        pair: Vec<PathBuf>,
        #[arg(long, default_value = "inf")]
        places: String,
    },
}

enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// The computation ran but could not produce or confirm a result: exit 1.
    Failed(String),
}

type Out = Result<(String, bool), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn failed(e: impl ToString) -> Failure {
    Failure::Failed(e.to_string())
}

fn load_series(spec: &str, order: i64) -> Result<(QSeries, Option<Name>), Failure> {
    if let Ok(name) = spec.parse::<Name>() {
        return Ok((qexp::get(name, order).map_err(failed)?, Some(name)));
    }
    if Path::new(spec).exists() {
        let text = fs::read_to_string(spec).map_err(usage)?;
        return Ok((QSeries::from_cache_str(&text).map_err(usage)?, None));
    }
    Err(usage(format!("'{spec}' is neither a known series name nor a readable file")))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn series_json(name: &str, f: &QSeries) -> Value {
    json!({
        "name": name,
        "offset": f.offset().to_string(),
        "order": f.order().to_string(),
        "coefficients": (f.offset()..=f.order()).map(|k| fmt_rational(&f.coeff(k))).collect::<Vec<_>>(),
    })
}

fn cmd_qexp(c: &Common, name: &str) -> Out {
    let n: Name = name.parse().map_err(usage)?;
    let f = qexp::get(n, c.order.unwrap_or(20)).map_err(failed)?;
    let text = match c.format {
        Format::Json => pretty(&series_json(n.as_str(), &f)),
        Format::Text => f.display_in(n.variable()) + "\n",
        Format::Cache => f.to_cache_string(),
    };
    Ok((text, true))
}

fn coefficient_bound(name: Option<Name>) -> Option<CoeffBound> {
    match name {
        Some(Name::F) => Some(place::f_coefficient_bound(&rat(1, 1800))),
        Some(Name::G) => Some(period::g_coefficient_bound()),
        _ => None,
    }
}

fn cmd_eval(c: &Common, series: &str, place_s: &str, x: &str) -> Out {
    let place = Place::parse(place_s).ok_or_else(|| usage(format!("bad place '{place_s}'")))?;
    let x = parse_rational(x).ok_or_else(|| usage(format!("bad rational '{x}'")))?;
    let (f, name) = load_series(series, c.order.unwrap_or(400))?;
    let (value, certified, precision) = match place {
        Place::Infinite => {
            let bits = c.bits.unwrap_or(128);
            let bound = coefficient_bound(name);
            let v = place::eval_complex(&f, &ComplexBall::from_real(&Ball::from_rational(&x, bits + 32)), bound.as_ref())
                .map_err(failed)?;
            (v.value.re().to_string(), v.certified, format!("{bits} bits"))
        }
        Place::Finite(p) => {
            let k = c.precision.unwrap_or(50);
            let xp = PadicNum::from_rational(&x, p, k + 8);
            let v = place::eval_padic(&f, &xp, k, None).map_err(failed)?;
            (v.to_string(), place::r_dagger(&f, p).certified, format!("{p}^{k}"))
        }
    };
    let out = json!({"value": value, "certified": certified, "precision": precision});
    let text = match c.format {
        Format::Text => format!("{value}\n"),
        _ => pretty(&out),
    };
    Ok((text, true))
}

fn cmd_ode(c: &Common, series: &str, r: usize, d: usize) -> Out {
    let (f, _) = load_series(series, c.order.unwrap_or(400))?;
    match find_ode(&f, r, d).map_err(usage)? {
        Some(fit) => {
            let v = json!({
                "operator": fit.ode.to_string(),
                "order": fit.ode.order().to_string(),
                "degree": fit.ode.degree().to_string(),
                "rows_used": fit.rows_used.to_string(),
                "held_out": fit.held_out.to_string(),
            });
            Ok((if c.format == Format::Text { format!("{}\n", fit.ode) } else { pretty(&v) }, true))
        }
        None => Ok((pretty(&json!({"operator": null})), false)),
    }
}

fn cmd_relations(c: &Common, series: &str, delta: u32, xdeg: usize) -> Out {
    if delta == 0 {
        return Err(usage("--delta must be at least 1"));
    }
    let order = c.order.unwrap_or(300);
    let fs: Vec<QSeries> = series.split(',').map(|s| load_series(s.trim(), order).map(|x| x.0)).collect::<Result<_, _>>()?;
    let r = find_functional_relations(&fs, delta, xdeg).map_err(usage)?;
    let v = json!({
        "relations": r.relations.iter().map(|x| json!({"relation": x.poly.to_string(), "confirmed": x.confirmed})).collect::<Vec<_>>(),
        "unknowns": r.unknowns.to_string(),
        "rows_used": r.rows_used.to_string(),
        "held_out": r.held_out.to_string(),
        "certified_empty": r.certified_empty(),
    });
    let text = match c.format {
        Format::Text => r.relations.iter().map(|x| format!("{}\n", x.poly)).collect(),
        _ => pretty(&v),
    };
    Ok((text, true))
}

fn cmd_height(c: &Common, value: Option<&str>, minpoly: Option<&str>) -> Out {
    let h = match (value, minpoly) {
        (Some(v), None) => weil_height_rational(&parse_rational(v).ok_or_else(|| usage(format!("bad rational '{v}'")))?),
        (None, Some(m)) => {
            let cs: Vec<BigInt> = m.split(',').map(|t| t.trim().parse::<BigInt>()).collect::<Result<_, _>>().map_err(usage)?;
            weil_height(&cs).map_err(usage)?
        }
        _ => return Err(usage("give exactly one of <p/q> or --minpoly")),
    };
    let v = json!({"height": h.value.to_string_digits(30), "degree": h.degree.to_string()});
    Ok((if c.format == Format::Text { format!("{}\n", h.value.to_string_digits(30)) } else { pretty(&v) }, true))
}

fn suite_options(c: &Common) -> SuiteOptions {
    SuiteOptions { order: c.order, bits: c.bits, prime: c.prime, precision: c.precision, samples: c.samples, seed: c.seed }
}

fn cmd_verify(c: &Common, suite: &str) -> Out {
    let r: Report = run_suite_named(suite, &suite_options(c)).map_err(|e| match e {
        SuiteError::UnknownSuite(_) | SuiteError::InvalidOption(_) => usage(e),
    })?;
    let text = match c.format {
        Format::Text => r.to_text(),
        _ => pretty(&r.to_json()),
    };
    Ok((text, r.passed()))
}

fn cmd_gseries(c: &Common) -> Out {
    let order = c.order.unwrap_or(200);
    let bits = c.bits.unwrap_or(256);
    let r = period::reconstruct_g(order, c.samples.unwrap_or(18), bits).map_err(failed)?;
    let text = match c.format {
        Format::Cache => r.series.to_cache_string(),
        Format::Text => format!("G = {}\na = {}\nb = {}\n", r.series.display_in("s"), r.a, r.b),
        Format::Json => {
            let mut v = series_json("G", &r.series);
            v["a"] = json!(r.a.to_string());
            v["b"] = json!(r.b.to_string());
            v["validated"] = json!(r.validated());
            pretty(&v)
        }
    };
    Ok((text, r.validated()))
}

fn cmd_modpoly(c: &Common, level: u64) -> Out {
    let order = c.order.unwrap_or(150);
    let phi = isogeny::modular_polynomial(level, order).map_err(usage)?;
    let text = match c.format {
        Format::Text => format!("{phi}\n"),
        _ => pretty(&phi.to_json()),
    };
    Ok((text, true))
}

fn pair_from(path: &Path) -> Result<IsogenyPair, Failure> {
    IsogenyPair::from_json(&read_json(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn with_scalars(pair: IsogenyPair, bits: u64) -> Result<IsogenyPair, Failure> {
    if pair.scalars.is_some() {
        Ok(pair)
    } else {
        isogeny::extract_isogeny_scalars(&pair, bits).map_err(failed)
    }
}

fn cmd_pair(c: &Common, t: &str, p: u64, raw: bool) -> Out {
    let t = parse_rational(t).ok_or_else(|| usage(format!("bad rational '{t}'")))?;
    let pair = isogeny::x0_pair(&t, p).map_err(usage)?;
    let pair = if raw { pair } else { with_scalars(pair, c.bits.unwrap_or(256))? };
    Ok((pretty(&pair.to_json()), true))
}

fn cmd_relation_build(c: &Common, a: &Path, b: Option<&Path>) -> Out {
    let bits = c.bits.unwrap_or(256);
    let first = with_scalars(pair_from(a)?, bits)?;
    let second = b.map(|p| pair_from(p).and_then(|x| with_scalars(x, bits))).transpose()?;
    let bundle = RelationBundle::build(&first, second.as_ref()).map_err(failed)?;
    let ok = bundle.bounds_hold();
    Ok((pretty(&bundle.to_json()), ok))
}

fn cmd_relation_verify(c: &Common, rel: &Path, pairs: &[PathBuf], places: &str) -> Out {
    let bundle = RelationBundle::from_json(&read_json(rel)?).map_err(usage)?;
    if pairs.is_empty() {
        return Err(usage("--pair is required"));
    }
    let bits = c.bits.unwrap_or(256);
    let ps: Vec<IsogenyPair> = pairs.iter().map(|p| pair_from(p).and_then(|x| with_scalars(x, bits))).collect::<Result<_, _>>()?;
    let places: Vec<Place> = places
        .split(',')
        .map(|s| Place::parse(s.trim()).ok_or_else(|| usage(format!("bad place '{s}'"))))
        .collect::<Result<_, _>>()?;
    let report = isogeny::multi_place_verify(&ps, &bundle, &places, c.precision.unwrap_or(50), bits).map_err(failed)?;
    let v = serde_json::to_value(&report).expect("json");
    let text = match c.format {
        Format::Text => report
            .places
            .iter()
            .map(|r| {
                let status = if r.passed { "pass" } else { "fail" };
                format!("{status} {} m=[{}] {}\n", r.place, r.vanishing_factors.join(","), r.reason.as_deref().unwrap_or(""))
            })
            .collect(),
        _ => pretty(&v),
    };
    Ok((text, report.passed))
}

fn run(cli: &Cli) -> Out {
    let c = &cli.common;
    if c.format == Format::Cache && !matches!(cli.cmd, Cmd::Qexp { .. } | Cmd::Gseries) {
        return Err(usage("--format cache is only available for qexp and gseries"));
    }
    match &cli.cmd {
        Cmd::Qexp { name } => cmd_qexp(c, name),
        Cmd::Eval { series, place, x } => cmd_eval(c, series, place, x),
        Cmd::Ode { cmd: OdeCmd::Guess { series, max_order, max_degree } } => cmd_ode(c, series, *max_order, *max_degree),
        Cmd::Relations { cmd: RelationsCmd::Find { series, delta, xdeg } } => cmd_relations(c, series, *delta, *xdeg),
        Cmd::Height { value, minpoly } => cmd_height(c, value.as_deref(), minpoly.as_deref()),
        Cmd::Verify { suite } => cmd_verify(c, suite),
        Cmd::Gseries => cmd_gseries(c),
        Cmd::Modpoly { level } => cmd_modpoly(c, *level),
        Cmd::Pair { cmd: PairCmd::X0 { t, p, raw } } => cmd_pair(c, t, *p, *raw),
        Cmd::Relation { cmd: RelationCmd::Build { pair_file, pair2_file } } => {
            cmd_relation_build(c, pair_file, pair2_file.as_deref())
        }
        Cmd::Relation { cmd: RelationCmd::Verify { rel, pair, places } } => cmd_relation_verify(c, rel, pair, places),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, ok)) => {
            if let Some(path) = &cli.common.out {
                if let Err(e) = fs::write(path, &text) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

