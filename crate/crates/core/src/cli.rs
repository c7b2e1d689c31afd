//! The `membership-rd` command line.
//!
//! Exit codes: 0 on success, 1 on a domain error (one `error: <code>: <message>`
//! line on stderr), 2 on a usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bruteforce::{check_lower_bound, exhaustive_fpr, optimal_tiny_tester, OracleError, TinyTesterSpec};
use crate::filter::{self, FilterError, RandomIdSampler};
use crate::galois::{FieldVector, PrimeField};
use crate::measures::{self, DiscreteDistribution, MeasureError, DEFAULT_BINS};
use crate::rate_distortion::{
    frontier, optimal_binary, optimal_logloss, rate_report, write_frontier_csv, ErrorMetric, FrontierSidecar,
    RateError, Regime, SolverConfig,
};

/// Length of the random non-key identifiers used by `filter bench`.
pub const BENCH_ID_LEN: usize = 16;

#[derive(Debug, Parser)]
#[command(name = "membership-rd", version, about = "Memory-error frontiers of membership testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form optimal score laws in the sparse limit.
    Optimal {
        #[command(subcommand)]
        regime: OptimalRegime,
    },
    /// Solve R_p over one p or a sweep and write CSV (or JSON).
    Frontier(FrontierArgs),
    /// Build, query and benchmark the prime-field filter.
    Filter {
        #[command(subcommand)]
        action: FilterAction,
    },
    /// Exhaustive small-instance oracles.
    Oracle {
        #[command(subcommand)]
        which: OracleKind,
    },
    /// Histogram KL between fact and non-fact score files.
    EstimateKl(EstimateArgs),
}

#[derive(Debug, Args)]
struct OptimalArgs {
    /// Key budget (FNR, or log-loss in nats).
    #[arg(long = "eps-k")]
    eps_k: f64,
    /// Non-key budget (FPR, or log-loss in nats).
    #[arg(long = "eps-n")]
    eps_n: f64,
    /// Also solve R_p at this key density.
    #[arg(long)]
    p: Option<f64>,
    /// With --p: key count for the finite-n bound.
    #[arg(long, requires = "p")]
    n: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum OptimalRegime {
    /// FNR / FPR budgets.
    Binary(OptimalArgs),
    /// Log-loss budgets in nats.
    Logloss(OptimalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KeyMetric {
    Fnr,
    Logloss,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NonKeyMetric {
    Fpr,
    Logloss,
}

#[derive(Debug, Args)]
struct FrontierArgs {
    /// A decimal, or `sweep:start,stop,points[,log|lin]`.
    #[arg(long, value_parser = parse_p_spec)]
    p: PSpec,
    #[arg(long = "eps-k")]
    eps_k: f64,
    #[arg(long = "eps-n")]
    eps_n: f64,
    #[arg(long = "metric-k", value_enum, default_value = "fnr")]
    metric_k: KeyMetric,
    #[arg(long = "metric-n", value_enum, default_value = "fpr")]
    metric_n: NonKeyMetric,
    /// CSV path; the optimizer laws go to `<out>.dists.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct PSpec(Vec<f64>);

fn parse_p_spec(text: &str) -> Result<PSpec, String> {
    let Some(body) = text.strip_prefix("sweep:") else {
        return text.parse::<f64>().map(|p| PSpec(vec![p])).map_err(|e| e.to_string());
    };
    let parts: Vec<&str> = body.split(',').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err("expected sweep:start,stop,points[,log|lin]".into());
    }
    let start: f64 = parts[0].parse().map_err(|_| format!("bad start {:?}", parts[0]))?;
    let stop: f64 = parts[1].parse().map_err(|_| format!("bad stop {:?}", parts[1]))?;
    let points: usize = parts[2].parse().map_err(|_| format!("bad point count {:?}", parts[2]))?;
    let log = match parts.get(3) {
        None | Some(&"lin") => false,
        Some(&"log") => true,
        Some(other) => return Err(format!("unknown spacing {other:?}")),
    };
    if points == 0 {
        return Err("sweep needs at least one point".into());
    }
    if log && (start <= 0.0 || stop <= 0.0) {
        return Err("log sweep needs positive endpoints".into());
    }
    let at = |i: usize| {
        let t = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
        if log {
            (start.ln() + t * (stop.ln() - start.ln())).exp()
        } else {
            start + t * (stop - start)
        }
    };
    Ok(PSpec((0..points).map(at).collect()))
}

#[derive(Debug, Subcommand)]
enum FilterAction {
    /// Build a filter from a key file and write its serialized state.
    Build {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long = "eps-k")]
        eps_k: f64,
        #[arg(long = "eps-n")]
        eps_n: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print 1 if the filter accepts the element, else 0.
    Query {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        elem: String,
        #[arg(long)]
        json: bool,
    },
    /// Measure FNR on the keys and FPR on random non-keys.
    Bench {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
enum OracleKind {
    /// Pareto frontier of every deterministic tester at tiny sizes.
    Tiny {
        #[arg(long)]
        u: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        bits: u32,
        #[arg(long)]
        json: bool,
    },
    /// Exact acceptance fraction over all hash rows for one vector y.
    Fpr {
        /// Serialized filter whose vector is checked.
        #[arg(long, conflicts_with = "y", required_unless_present = "y")]
        state: Option<PathBuf>,
        /// Comma-separated coordinates of y.
        #[arg(long, requires = "eps_n")]
        y: Option<String>,
        /// 1/q for --y.
        #[arg(long = "eps-n")]
        eps_n: Option<f64>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Scores the model gave to facts (keys).
    facts: PathBuf,
    /// Scores the model gave to non-facts.
    nonfacts: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long)]
    json: bool,
}

/// A domain failure: stable code plus human message.
#[derive(Debug)]
struct Failure {
    code: &'static str,
    message: String,
}

impl Failure {
    fn new(code: &'static str, message: impl ToString) -> Self {
        Self { code, message: message.to_string() }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new("io", format!("{}: {err}", path.display()))
    }
}

impl From<RateError> for Failure {
    fn from(e: RateError) -> Self {
        let code = match &e {
            RateError::TrivialRegime { .. } => "trivial_regime",
            RateError::LogLossRegime { .. } => "logloss_regime",
            RateError::Infeasible { .. } => "infeasible",
            RateError::InvalidEpsilon { .. } => "invalid_epsilon",
            RateError::InvalidP(_) => "invalid_p",
            RateError::Measure(_) => "invalid_distribution",
            _ => "invalid_input",
        };
        Self::new(code, e)
    }
}

impl From<FilterError> for Failure {
    fn from(e: FilterError) -> Self {
        let code = match &e {
            FilterError::NotReciprocalPrime(_) => "not_reciprocal_prime",
            FilterError::TrivialRegime => "trivial_regime",
            FilterError::InvalidEpsK(_) => "invalid_epsilon",
            FilterError::DuplicateKey(_) => "duplicate_key",
            FilterError::SearchExhausted(_) => "search_exhausted",
            FilterError::BadMagic
            | FilterError::BadVersion(_)
            | FilterError::Truncated { .. }
            | FilterError::TrailingBytes(_)
            | FilterError::MalformedHeader(_) => "bad_state_file",
            _ => "invalid_input",
        };
        Self::new(code, e)
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match &e {
            OracleError::TooLarge(_) => "instance_too_large",
            _ => "invalid_input",
        };
        Self::new(code, e)
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Self {
        Self::new("invalid_scores", e)
    }
}

type Outcome = Result<(), Failure>;

/// `%g` with 6 significant digits.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..6).contains(&exp) {
        trim(&format!("{x:.*}", (5 - exp) as usize))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn format_dist(d: &DiscreteDistribution) -> String {
    let atoms: Vec<String> = d
        .atoms()
        .iter()
        .map(|a| format!("{}: {}", format_g(a.location), format_g(a.mass)))
        .collect();
    format!("{{{}}}", atoms.join(", "))
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::new("serialization", e))?;
    writeln!(out, "{text}").map_err(|e| Failure::new("io", e))
}

fn emit_lines(out: &mut dyn Write, lines: &[(&str, String)]) -> Outcome {
    for (key, value) in lines {
        writeln!(out, "{key}: {value}").map_err(|e| Failure::new("io", e))?;
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::io(path, e))
}

fn run_optimal(regime: OptimalRegime, out: &mut dyn Write) -> Outcome {
    let (kind, args) = match regime {
        OptimalRegime::Binary(a) => (Regime::Binary, a),
        OptimalRegime::Logloss(a) => (Regime::LogLoss, a),
    };
    let report = args
        .p
        .map(|p| rate_report(kind, args.eps_k, args.eps_n, p, args.n, &SolverConfig::default()))
        .transpose()?;
    let mut doc = match kind {
        Regime::Binary => {
            let opt = optimal_binary(args.eps_k, args.eps_n)?;
            json!({"regime": "binary", "eps_k": args.eps_k, "eps_n": args.eps_n,
                   "mu_k": opt.mu_k, "mu_n": opt.mu_n, "rate": opt.rate})
        }
        Regime::LogLoss => {
            let opt = optimal_logloss(args.eps_k, args.eps_n)?;
            json!({"regime": "logloss", "eps_k": args.eps_k, "eps_n": args.eps_n,
                   "x_star": opt.x_star, "q_star": opt.q_star,
                   "mu_k": opt.mu_k, "mu_n": opt.mu_n, "rate": opt.rate})
        }
    };
    if let Some(r) = &report {
        doc["p"] = json!(args.p);
        doc["report"] = serde_json::to_value(r).map_err(|e| Failure::new("serialization", e))?;
    }
    if args.json {
        return emit_json(out, &doc);
    }
    let num = |key: &str| doc.get(key).and_then(|v| v.as_f64()).map(format_g);
    let dist = |key: &str| {
        serde_json::from_value::<DiscreteDistribution>(doc[key].clone()).map(|d| format_dist(&d)).unwrap_or_default()
    };
    let mut lines = vec![
        ("regime", doc["regime"].as_str().unwrap_or_default().to_string()),
        ("eps_K", format_g(args.eps_k)),
        ("eps_N", format_g(args.eps_n)),
    ];
    for key in ["x_star", "q_star"] {
        if let Some(v) = num(key) {
            lines.push((key, v));
        }
    }
    lines.push(("mu_K", dist("mu_k")));
    lines.push(("mu_N", dist("mu_n")));
    lines.push(("rate_bits_per_key", format_g(doc["rate"].as_f64().unwrap_or(f64::NAN))));
    if let Some(r) = report {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), format_g);
        lines.push(("p", format_g(args.p.unwrap_or_default())));
        lines.push(("solver_rate_bits_per_key", format_g(r.solver_rate)));
        lines.push(("first_order_rate_bits_per_key", opt(r.first_order_rate)));
        lines.push(("finite_n_bound_total_bits", opt(r.finite_n_bound_total)));
    }
    emit_lines(out, &lines)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".dists.json");
    PathBuf::from(name)
}

fn run_frontier(args: FrontierArgs, out: &mut dyn Write) -> Outcome {
    let metric_k = match args.metric_k {
        KeyMetric::Fnr => ErrorMetric::Fnr,
        KeyMetric::Logloss => ErrorMetric::LogLossKey,
    };
    let metric_n = match args.metric_n {
        NonKeyMetric::Fpr => ErrorMetric::Fpr,
        NonKeyMetric::Logloss => ErrorMetric::LogLossNonKey,
    };
    let points = frontier(&args.p.0, &metric_k, &metric_n, args.eps_k, args.eps_n, &SolverConfig::default())?;
    let write_err = |e: std::io::Error| Failure::new("io", e);
    match (&args.out, args.json) {
        (None, true) => emit_json(out, &points),
        (None, false) => write_frontier_csv(out, &points, format_g).map_err(write_err),
        (Some(path), json) => {
            let mut file = File::create(path).map_err(|e| Failure::io(path, e))?;
            if json {
                emit_json(&mut file, &points)?;
            } else {
                write_frontier_csv(&mut file, &points, format_g).map_err(write_err)?;
                let side = sidecar_path(path);
                let mut file = File::create(&side).map_err(|e| Failure::io(&side, e))?;
                emit_json(&mut file, &FrontierSidecar::new(&points))?;
            }
            Ok(())
        }
    }
}

fn load_state(path: &Path) -> Result<filter::FilterState, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
    Ok(filter::deserialize(&bytes)?)
}

fn run_filter(action: FilterAction, out: &mut dyn Write) -> Outcome {
    match action {
        FilterAction::Build { keys, eps_k, eps_n, seed, out: path, json } => {
            // reject bad budgets before touching the key file
            filter::derive_params(0, eps_k, eps_n, seed)?;
            let key_list = filter::read_keys(open(&keys)?).map_err(|e| Failure::io(&keys, e))?;
            let params = filter::derive_params(key_list.len() as u64, eps_k, eps_n, seed)?;
            let (state, report) = filter::build(&params, &key_list)?;
            std::fs::write(&path, filter::serialize(&state)).map_err(|e| Failure::io(&path, e))?;
            if json {
                return emit_json(out, &json!({"params": params, "report": report}));
            }
            emit_lines(
                out,
                &[
                    ("n", params.n.to_string()),
                    ("q", params.q.to_string()),
                    ("m", params.m.to_string()),
                    ("satisfied_keys", report.satisfied_keys.to_string()),
                    ("candidates_tried", report.candidates_tried.to_string()),
                    ("bits_payload", report.bits_payload.to_string()),
                    ("bits_per_key", format_g(report.bits_payload as f64 / params.n.max(1) as f64)),
                    ("success", report.success.to_string()),
                ],
            )
        }
        FilterAction::Query { state, elem, json } => {
            let state = load_state(&state)?;
            let answer = filter::query(&state, elem.as_bytes());
            if json {
                return emit_json(out, &json!({"accept": answer}));
            }
            writeln!(out, "{answer}").map_err(|e| Failure::new("io", e))
        }
        FilterAction::Bench { state, keys, trials, seed, json } => {
            let state = load_state(&state)?;
            let key_list = filter::read_keys(open(&keys)?).map_err(|e| Failure::io(&keys, e))?;
            let mut sampler = RandomIdSampler::new(seed, BENCH_ID_LEN, &key_list)?;
            let est = filter::measure_rates(&state, &key_list, &mut sampler, trials)?;
            if json {
                return emit_json(out, &json!({"estimate": est, "eps_k": state.params().eps_k, "eps_n": state.params().eps_n}));
            }
            let ci = |(lo, hi): (f64, f64)| format!("[{}, {}]", format_g(lo), format_g(hi));
            emit_lines(
                out,
                &[
                    ("keys", est.keys.to_string()),
                    ("trials", est.trials.to_string()),
                    ("fnr_hat", format_g(est.fnr_hat)),
                    ("fnr_ci99", ci(est.fnr_ci)),
                    ("fpr_hat", format_g(est.fpr_hat)),
                    ("fpr_ci99", ci(est.fpr_ci)),
                    ("eps_K", format_g(state.params().eps_k)),
                    ("eps_N", format_g(state.params().eps_n)),
                ],
            )
        }
    }
}

fn run_oracle(which: OracleKind, out: &mut dyn Write) -> Outcome {
    match which {
        OracleKind::Tiny { u, n, bits, json } => {
            let spec = TinyTesterSpec::new(u, n, bits)?;
            let front = optimal_tiny_tester(&spec)?;
            let checks = front.iter().map(|t| check_lower_bound(&spec, t)).collect::<Result<Vec<_>, _>>()?;
            if json {
                let rows: Vec<_> = front
                    .iter()
                    .zip(&checks)
                    .map(|(t, c)| json!({"eps_k": t.eps_k.to_string(), "eps_n": t.eps_n.to_string(),
                                         "init": t.init, "query": t.query, "bound": c}))
                    .collect();
                return emit_json(out, &json!({"spec": spec, "frontier": rows}));
            }
            writeln!(out, "eps_K,eps_N,bound_bits,memory_bits,bound_holds").map_err(|e| Failure::new("io", e))?;
            for (t, c) in front.iter().zip(&checks) {
                writeln!(out, "{},{},{},{},{}", t.eps_k, t.eps_n, format_g(c.bound_bits), c.memory_bits, c.holds)
                    .map_err(|e| Failure::new("io", e))?;
            }
            Ok(())
        }
        OracleKind::Fpr { state, y, eps_n, json } => {
            let vector = match (state, y) {
                (Some(path), _) => load_state(&path)?.y().clone(),
                (None, Some(text)) => {
                    let field = PrimeField::new(
                        (1.0 / eps_n.unwrap_or(f64::NAN)).round().clamp(0.0, u32::MAX as f64) as u64,
                    )
                    .map_err(|e| Failure::new("not_reciprocal_prime", e))?;
                    let coords = text
                        .split(',')
                        .map(|c| c.trim().parse::<u64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| Failure::new("invalid_input", format!("--y: {e}")))?;
                    if coords.iter().any(|&c| c >= field.order()) {
                        return Err(Failure::new("invalid_input", "--y coordinate not below q"));
                    }
                    FieldVector::new(field, coords)
                }
                (None, None) => unreachable!("clap requires --state or --y"),
            };
            let fpr = exhaustive_fpr(&vector)?;
            if json {
                return emit_json(out, &json!({"q": vector.field().order(), "m": vector.len(),
                                             "fpr": fpr.to_string(), "fpr_value": *fpr.numer() as f64 / *fpr.denom() as f64}));
            }
            emit_lines(out, &[("q", vector.field().order().to_string()), ("m", vector.len().to_string()), ("fpr", fpr.to_string())])
        }
    }
}

fn run_estimate(args: EstimateArgs, out: &mut dyn Write) -> Outcome {
    let facts = measures::read_scores(open(&args.facts)?)?;
    let nonfacts = measures::read_scores(open(&args.nonfacts)?)?;
    let hf = measures::estimate_from_samples(&facts, args.bins)?;
    let hn = measures::estimate_from_samples(&nonfacts, args.bins)?;
    let kl = measures::histogram_kl(&hf, &hn)?;
    let mean = |xs: &[f64], f: fn(f64) -> f64| xs.iter().map(|&x| f(x)).sum::<f64>() / xs.len() as f64;
    let eps_k = mean(&facts, |x| -x.ln());
    let eps_n = mean(&nonfacts, |x| -(-x).ln_1p());
    let rate = optimal_logloss(eps_k, eps_n).ok().map(|o| o.rate);
    let overhead = rate.filter(|&r| r > 0.0).map(|r| kl / r - 1.0);
    if args.json {
        return emit_json(
            out,
            &json!({"bins": args.bins, "kl_bits": kl, "eps_k_nats": eps_k, "eps_n_nats": eps_n,
                    "logloss_rate_bits": rate, "kl_overhead": overhead}),
        );
    }
    let opt = |v: Option<f64>| v.map_or("-".to_string(), format_g);
    emit_lines(
        out,
        &[
            ("bins", args.bins.to_string()),
            ("kl_bits", format_g(kl)),
            ("eps_K_nats", format_g(eps_k)),
            ("eps_N_nats", format_g(eps_n)),
            ("logloss_rate_bits", opt(rate)),
            ("kl_overhead", opt(overhead)),
        ],
    )
}

/// Parses `argv` (program name first), runs the command, and returns the
/// process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let outcome = match cli.command {
        Command::Optimal { regime } => run_optimal(regime, stdout),
        Command::Frontier(args) => run_frontier(args, stdout),
        Command::Filter { action } => run_filter(action, stdout),
        Command::Oracle { which } => run_oracle(which, stdout),
        Command::EstimateKl(args) => run_estimate(args, stdout),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            let message = f.message.replace('\n', " ");
            let _ = writeln!(stderr, "error: {}: {message}", f.code);
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(format_g(10.0), "10");
        assert_eq!(format_g(3.5559194838), "3.55592");
        assert_eq!(format_g(0.0009765625), "0.000976562");
        assert_eq!(format_g(1e-7), "1e-07");
        assert_eq!(format_g(123456789.0), "1.23457e+08");
        assert_eq!(format_g(999999.7), "1e+06");
        assert_eq!(format_g(-0.5), "-0.5");
        assert_eq!(format_g(f64::INFINITY), "inf");
        assert_eq!(format_g(0.0), "0");
    }

    #[test]
    fn p_specs() {
        assert_eq!(parse_p_spec("0.25").unwrap(), PSpec(vec![0.25]));
        let lin = parse_p_spec("sweep:0.1,0.5,5").unwrap().0;
        assert_eq!(lin.len(), 5);
        assert!((lin[2] - 0.3).abs() < 1e-12);
        let log = parse_p_spec("sweep:1e-4,1e-1,4,log").unwrap().0;
        assert!((log[1] - 1e-3).abs() < 1e-15 && (log[3] - 0.1).abs() < 1e-15);
        assert!(parse_p_spec("sweep:0.1,0.5").is_err());
        assert!(parse_p_spec("sweep:0,0.5,3,log").is_err());
        assert!(parse_p_spec("half").is_err());
    }
}
