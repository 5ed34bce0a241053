//! `riffle`: reproducible experiments on generalized riffle shuffles.
//!
//! Every command is a pure function of its arguments. Output is CSV (with a
//! leading `#` line carrying the resolved config) or one JSON object
//! `{config, results, meta}`. Errors go to stderr as JSON with exit code 1.

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use riffle_core::psi_class::{nonconvex_f, nonconvexity_report, verify_nonconvexity};
use riffle_core::shuffle::{riffle::shuffle_k, sample_inverse_shuffled_perm};
use riffle_core::stats::{
    cold_spot_trials, cutoff_scan, exact_process_distribution, exact_tv, longest_increasing_run, rising_sequences,
    scan_csv, tv_lower_bound_mc, ColdSpotConfig, Statistic, TvConfig,
};
use riffle_core::{
    constants::CSV_HEADER, constants_bundle, discretize_f_to_simplex, discretize_measure, table1_measures, CutProcess,
    Error, Field, Permutation, PrecisionConfig, SimplexMeasure, StreamKey,
};

#[derive(Parser)]
#[command(name = "riffle", version, about = "Generalized riffle shuffle experiments")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mixing constants of a cut measure.
    Constants(ConstantsArgs),
    /// Sample shuffled decks and their statistics.
    Simulate(SimulateArgs),
    /// Total variation distance to uniform: exact for small decks, otherwise
    /// a Monte-Carlo lower bound.
    Tvd(TvdArgs),
    /// Lower bounds over a grid of `K / log N`.
    Scan(ScanArgs),
    /// Cold-spot test rejection rates.
    Coldspot(ColdspotArgs),
    /// Sweep of the non-convexity counterexample.
    Nonconvex(NonconvexArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long)]
    measure: Option<String>,
    /// All ten built-in reference measures.
    #[arg(long)]
    table1: bool,
    #[arg(long, default_value_t = PrecisionConfig::default().quadrature_nodes)]
    nodes: usize,
    #[arg(long, default_value_t = PrecisionConfig::default().mc_samples)]
    mc_samples: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Method {
    /// Riffle the deck step by step.
    Forward,
    /// Shuffle matrix, sorted rows and graph sort.
    Inverse,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "gsr")]
    process: String,
    #[arg(short = 'N', long = "n")]
    n: usize,
    #[arg(short = 'K', long = "k")]
    k: usize,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, value_enum, default_value = "forward")]
    method: Method,
    /// Include the decks (one-based, space separated).
    #[arg(long)]
    decks: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TvdArgs {
    #[arg(long, default_value = "gsr")]
    process: String,
    #[arg(short = 'N', long = "n")]
    n: usize,
    #[arg(short = 'K', long = "k")]
    k: usize,
    /// Force exact enumeration (N <= 8).
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value = "longest_run")]
    statistic: String,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    pilot: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    process: Option<String>,
    /// Deck sizes, comma separated.
    #[arg(short = 'N', long = "n", value_delimiter = ',')]
    n: Vec<usize>,
    /// `lo:hi:step` multiples of `log N`.
    #[arg(long)]
    kgrid: String,
    #[arg(long, default_value = "longest_run")]
    statistic: String,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    pilot: usize,
    /// Reference `C-bar` when it cannot be derived from the inputs.
    #[arg(long)]
    c_bar: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ColdspotArgs {
    #[arg(long, default_value = "point:0.5,0.5")]
    measure: String,
    /// Defaults to cuts drawn from the measure with multinomial rounding.
    #[arg(long)]
    process: Option<String>,
    #[arg(short = 'N', long = "n")]
    n: usize,
    /// Defaults to `floor(k_mult * C log N)`.
    #[arg(short = 'K', long = "k")]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.6)]
    k_mult: f64,
    #[arg(long, default_value_t = ColdSpotConfig::default().delta)]
    delta: f64,
    #[arg(long, default_value_t = ColdSpotConfig::default().chi)]
    chi: f64,
    #[arg(long, default_value_t = ColdSpotConfig::default().rho)]
    rho: f64,
    #[arg(long, default_value_t = ColdSpotConfig::default().max_prefixes)]
    max_prefixes: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Test shuffled decks only.
    #[arg(long, conflicts_with = "uniform_only")]
    shuffled_only: bool,
    /// Test uniform decks only.
    #[arg(long)]
    uniform_only: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NonconvexArgs {
    /// Values of eta, comma separated decimals (exact rationals).
    #[arg(long, value_delimiter = ',', default_value = "0.005,0.01,0.02,0.04")]
    eta: Vec<String>,
    /// `log K` for the simplex realisation of `f`.
    #[arg(long, default_value_t = 40.0)]
    log_k: f64,
    /// Lift applied to pieces through `(1, 0)` before realisation.
    #[arg(long, default_value_t = 0.1)]
    lift: f64,
    #[command(flatten)]
    output: Output,
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug)]
struct CliError {
    kind: &'static str,
    message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError { kind: "library", message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError { kind: "usage", message: message.into() }
}

/// A finished report: its config, JSON results and CSV body.
struct Report {
    command: &'static str,
    config: Value,
    results: Value,
    csv: String,
}

fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn render(report: Report, format: Format) -> String {
    let mut config = report.config;
    config["command"] = json!(report.command);
    let hash = config_hash(&config);
    let version = env!("CARGO_PKG_VERSION");
    match format {
        Format::Json => {
            let doc = json!({
                "config": config,
                "results": report.results,
                "meta": { "version": version, "config_hash": hash },
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => format!("# riffle {version} config_hash={hash} config={config}\n{}", report.csv),
    }
}

fn emit(text: &str, out: &Option<String>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError { kind: "io", message: format!("{path}: {e}") }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError { kind: "io", message: e.to_string() }),
    }
}

fn precision(nodes: usize, mc_samples: usize, seed: u64) -> PrecisionConfig {
    PrecisionConfig { quadrature_nodes: nodes, mc_samples, seed }
}

fn cmd_constants(a: &ConstantsArgs) -> CliResult<Report> {
    let cfg = precision(a.nodes, a.mc_samples, a.output.seed);
    let measures: Vec<(String, SimplexMeasure)> = match (&a.measure, a.table1) {
        (_, true) => table1_measures(),
        (Some(m), false) => vec![(m.clone(), SimplexMeasure::parse(m)?)],
        (None, false) => return Err(usage("give --measure or --table1")),
    };
    let mut csv = format!("{CSV_HEADER}\n");
    let mut results = Vec::new();
    for (label, mu) in &measures {
        let b = constants_bundle(mu, &cfg)?;
        csv.push_str(&b.csv_row(label, mu.k()));
        csv.push('\n');
        results.push(json!({ "measure": label, "k": mu.k(), "constants": b }));
    }
    Ok(Report {
        command: "constants",
        config: json!({ "measure": a.measure, "table1": a.table1, "precision": cfg }),
        results: Value::Array(results),
        csv,
    })
}

fn deck_string(p: &Permutation) -> String {
    p.one_based().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn cmd_simulate(a: &SimulateArgs, seed: u64) -> CliResult<Report> {
    let process = CutProcess::parse(&a.process)?;
    let key = StreamKey::new(seed);
    let mut csv = String::from(if a.decks {
        "replicate,rising_sequences,inverse_longest_run,deck\n"
    } else {
        "replicate,rising_sequences,inverse_longest_run\n"
    });
    let mut results = Vec::new();
    for i in 0..a.samples {
        let mut rng = key.child(i as u64).rng();
        let deck = match a.method {
            Method::Forward => shuffle_k(&Permutation::identity(a.n), &process, a.k, &mut rng)?,
            Method::Inverse => sample_inverse_shuffled_perm(&process, a.n, a.k, &mut rng)?,
        };
        let r = rising_sequences(&deck);
        let run = longest_increasing_run(&deck.inverse());
        csv.push_str(&format!("{i},{r},{run}"));
        if a.decks {
            csv.push_str(&format!(",{}", deck_string(&deck)));
        }
        csv.push('\n');
        let mut row = json!({ "replicate": i, "rising_sequences": r, "inverse_longest_run": run });
        if a.decks {
            row["deck"] = json!(deck.one_based());
        }
        results.push(row);
    }
    Ok(Report {
        command: "simulate",
        config: json!({
            "process": process, "n": a.n, "k": a.k, "samples": a.samples,
            "method": match a.method { Method::Forward => "forward", Method::Inverse => "inverse" },
            "decks": a.decks, "seed": seed,
        }),
        results: Value::Array(results),
        csv,
    })
}

fn cmd_tvd(a: &TvdArgs, seed: u64) -> CliResult<Report> {
    let process = CutProcess::parse(&a.process)?;
    let exact = a.exact || a.n <= 7;
    let mut config = json!({ "process": process, "n": a.n, "k": a.k, "exact": exact });
    if exact {
        let (tv, rational) = if a.n <= 6 {
            let t = exact_tv(&exact_process_distribution::<BigRational>(&process, a.n, a.k)?);
            (t.to_f64(), Some(t.to_string()))
        } else {
            (exact_tv(&exact_process_distribution::<f64>(&process, a.n, a.k)?), None)
        };
        let csv = format!("N,K,method,tv,tv_rational\n{},{},exact,{tv:.12},{}\n", a.n, a.k, rational.clone().unwrap_or_default());
        return Ok(Report {
            command: "tvd",
            config,
            results: json!({ "method": "exact", "tv": tv, "tv_rational": rational }),
            csv,
        });
    }
    let stat = Statistic::parse(&a.statistic)?;
    let cfg = TvConfig { samples: a.samples, pilot: a.pilot, ..TvConfig::default() };
    config["statistic"] = json!(stat.name());
    config["samples"] = json!(a.samples);
    config["pilot"] = json!(a.pilot);
    config["seed"] = json!(seed);
    let b = tv_lower_bound_mc(&process, a.n, a.k, &stat, &cfg, StreamKey::new(seed))?;
    let csv = format!(
        "N,K,method,statistic,direction,threshold,p_shuffled,p_uniform,estimate,ci_lo,ci_hi,lower_bound\n{},{},mc,{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
        a.n,
        a.k,
        b.statistic,
        serde_json::to_value(b.direction).expect("serializable").as_str().unwrap_or(""),
        b.threshold,
        b.p_shuffled,
        b.p_uniform,
        b.estimate,
        b.ci_lo,
        b.ci_hi,
        b.lower_bound
    );
    Ok(Report { command: "tvd", config, results: json!({ "method": "mc", "bound": b }), csv })
}

/// The measure a process draws its normalised cuts from, when there is one.
fn measure_of_process(p: &CutProcess) -> Option<SimplexMeasure> {
    match p {
        CutProcess::Measure { mu, .. } => Some(mu.clone()),
        CutProcess::UniformCut => SimplexMeasure::beta(1.0, 1.0).ok(),
        CutProcess::Bisection => Some(SimplexMeasure::uniform_point(2)),
        CutProcess::Multinomial { p } | CutProcess::Fractions { p } => SimplexMeasure::point(p.clone()).ok(),
        _ => None,
    }
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|e| usage(format!("kgrid '{s}': {e}"))))
        .collect::<CliResult<_>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(usage(format!("kgrid '{s}' must be lo:hi:step")));
    };
    if !(step > 0.0 && hi >= lo) {
        return Err(usage(format!("kgrid '{s}' must have step > 0 and hi >= lo")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| lo + step * i as f64).collect())
}

fn cmd_scan(a: &ScanArgs, seed: u64) -> CliResult<Report> {
    let process = match (&a.process, &a.measure) {
        (Some(p), _) => CutProcess::parse(p)?,
        (None, Some(m)) if m.trim() == "uniform_cut" => CutProcess::UniformCut,
        (None, Some(m)) => CutProcess::Measure { mu: SimplexMeasure::parse(m)?, rounding: Default::default() },
        (None, None) => return Err(usage("give --measure or --process")),
    };
    let mu = match &a.measure {
        Some(m) => Some(SimplexMeasure::parse(m)?),
        None => measure_of_process(&process),
    };
    let c_bar = match (a.c_bar, mu) {
        (Some(c), _) => c,
        (None, Some(mu)) => constants_bundle(&mu, &PrecisionConfig::default())?.c_bar,
        (None, None) => return Err(usage("cannot derive C-bar for this process; pass --c-bar")),
    };
    if a.n.is_empty() {
        return Err(usage("give at least one -N"));
    }
    let grid = parse_grid(&a.kgrid)?;
    let stat = Statistic::parse(&a.statistic)?;
    let cfg = TvConfig { samples: a.samples, pilot: a.pilot, ..TvConfig::default() };
    let rows = cutoff_scan(&process, c_bar, &a.n, &grid, &stat, &cfg, StreamKey::new(seed))?;
    Ok(Report {
        command: "scan",
        config: json!({
            "process": process, "measure": a.measure, "n": a.n, "kgrid": grid, "statistic": stat.name(),
            "samples": a.samples, "pilot": a.pilot, "c_bar": c_bar, "seed": seed,
        }),
        results: json!(rows),
        csv: scan_csv(&rows),
    })
}

/// `floor(x)` with a guard against values a rounding error below an integer.
fn guarded_floor(x: f64) -> usize {
    (x + 1e-9).floor().max(0.0) as usize
}

fn cmd_coldspot(a: &ColdspotArgs, seed: u64) -> CliResult<Report> {
    let mu = SimplexMeasure::parse(&a.measure)?;
    let process = match &a.process {
        Some(p) => CutProcess::parse(p)?,
        None => CutProcess::Measure { mu: mu.clone(), rounding: Default::default() },
    };
    let pcfg = PrecisionConfig::default();
    let bundle = constants_bundle(&mu, &pcfg)?;
    let k = a.k.unwrap_or_else(|| guarded_floor(a.k_mult * bundle.c * (a.n as f64).ln()));
    let disc = discretize_measure(&mu, a.chi, &pcfg)?;
    let cfg = ColdSpotConfig { delta: a.delta, chi: a.chi, rho: a.rho, max_prefixes: a.max_prefixes, seed };
    let r = cold_spot_trials(
        &process,
        &disc,
        bundle.theta,
        a.n,
        k,
        &cfg,
        a.trials,
        StreamKey::new(seed),
        !a.uniform_only,
        !a.shuffled_only,
    )?;
    let fmt_rate = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.4}"));
    let csv = format!(
        "N,K,trials,H_size,H_boundary,H_components,alpha_tot_logN,prefix_count,capped,threshold,bounds_ok,shuffled_reject_rate,uniform_reject_rate\n{},{},{},{},{},{},{},{},{},{:.3},{},{},{}\n",
        a.n,
        k,
        r.trials,
        r.first.size,
        r.first.boundary,
        r.first.components,
        r.first.alpha_tot_log_n,
        r.first.prefix_count,
        r.first.capped,
        r.first.threshold,
        r.all_sets_satisfy_bounds,
        fmt_rate(r.shuffled_rate()),
        fmt_rate(r.uniform_rate()),
    );
    Ok(Report {
        command: "coldspot",
        config: json!({
            "measure": mu, "process": process, "n": a.n, "k": k, "cold_spot": cfg, "trials": a.trials,
            "theta": bundle.theta, "shuffled": !a.uniform_only, "uniform": !a.shuffled_only,
        }),
        results: json!({
            "summary": r.first, "distinct_sets": r.distinct_sets, "all_sets_satisfy_bounds": r.all_sets_satisfy_bounds,
            "shuffled_rejections": r.shuffled_rejections, "uniform_rejections": r.uniform_rejections,
            "shuffled_rate": r.shuffled_rate(), "uniform_rate": r.uniform_rate(),
        }),
        csv,
    })
}

fn cmd_nonconvex(a: &NonconvexArgs) -> CliResult<Report> {
    let mut csv = String::from(
        "eta,C_bar_f,C_bar_f_breve,C_bar_f_hat,theta_f_hat,f_hat_3_5,f_hat_3_5_dev_over_eta2,realisation_max_err,verdict\n",
    );
    let mut results = Vec::new();
    for e in &a.eta {
        let eta = BigRational::from_decimal(e).ok_or_else(|| usage(format!("bad eta '{e}'")))?;
        let (verdict, report) = match verify_nonconvexity(&eta, &BigRational::from_ratio(0, 1)) {
            Ok(r) => ("success".to_string(), r),
            Err(err) => (format!("failure: {err}"), nonconvexity_report(&eta)?),
        };
        let dev = (report.f_hat_at_3_5 - (13.0 - report.eta / 6.0)).abs() / (report.eta * report.eta);
        let f = nonconvex_f(&eta)?;
        let p = discretize_f_to_simplex(&f, a.log_k.exp(), a.lift)?;
        let err = (0..=40)
            .map(|i| 2.0 + 0.05 * i as f64)
            .map(|x| (f.to_f64().eval(&x) - p.psi_over_log_k(x)).abs())
            .fold(0.0, f64::max);
        csv.push_str(&format!(
            "{e},{},{},{:.9},{:.9},{:.9},{:.4},{:.6},{}\n",
            report.c_bar_f, report.c_bar_f_breve, report.c_bar_f_hat, report.theta_f_hat, report.f_hat_at_3_5, dev, err,
            if verdict == "success" { "success" } else { "failure" }
        ));
        results.push(json!({ "eta": e, "report": report, "f_hat_3_5_dev_over_eta2": dev, "realisation_max_err": err, "verdict": verdict }));
    }
    Ok(Report {
        command: "nonconvex",
        config: json!({ "eta": a.eta, "log_k": a.log_k, "lift": a.lift }),
        results: Value::Array(results),
        csv,
    })
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| CliError { kind: "threads", message: e.to_string() })?;
    }
    let (report, output) = match &cli.command {
        Command::Constants(a) => (cmd_constants(a)?, &a.output),
        Command::Simulate(a) => (cmd_simulate(a, a.output.seed)?, &a.output),
        Command::Tvd(a) => (cmd_tvd(a, a.output.seed)?, &a.output),
        Command::Scan(a) => (cmd_scan(a, a.output.seed)?, &a.output),
        Command::Coldspot(a) => (cmd_coldspot(a, a.output.seed)?, &a.output),
        Command::Nonconvex(a) => (cmd_nonconvex(a)?, &a.output),
    };
    emit(&render(report, output.format), &output.out)
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": e.kind, "message": e.message } }));
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(usage(e.to_string())),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
