use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use regret_transfer::eval::metric_regret;
use regret_transfer::instance::{LabeledList, RelevanceVector};
use regret_transfer::io::{json_line, read_instances};
use regret_transfer::metric::{LogBase, MetricSpec, DEFAULT_THRESHOLD};
use regret_transfer::psi::{psi_brute, EpsGrid, PsiInstance};
use regret_transfer::rates::{default_grid, scan_all, Scenario};
use regret_transfer::sim::{run_simulation, scatter_svg, snapshots_csv, AlphaSchedule, LossKind, SimConfig};
use regret_transfer::transfer::{
    bound_for, coeff_truncation, worst_case_construct, BoundConfig, Direction, TruncationTransfer, TruncationWay,
};
use regret_transfer::verify::{run_checks, CheckGroup, VerifyConfig};
use regret_transfer::Error;

/// `println!` that exits quietly when the reader of stdout has gone away.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            return Err(Error::Io(format!("stdout: {e}")).into());
        }
    }};
}

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(name = "regret-transfer", version, about = "Metric regrets, optimal-set checks and regret-transfer bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a metric on `label,score` CSV lists.
    Metrics(MetricsArgs),
    /// Closed-form transfer coefficient for one direction.
    Bounds(BoundsArgs),
    /// Brute-force transfer function on one small instance.
    Psi(PsiArgs),
    /// Exhaustive bound and optimal-set checks.
    Verify(VerifyArgs),
    /// Regret-manifold simulation.
    Simulate(SimulateArgs),
    /// Growth of the transfer coefficients with n.
    Rates(RatesArgs),
}

/// Failure of a verification property, as opposed to bad input.
#[derive(Debug)]
struct ChecksFailed;

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("one or more verification properties failed")
    }
}

impl std::error::Error for ChecksFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ChecksFailed>().is_some() {
        return EXIT_FAILED;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Capacity { .. }) => EXIT_CAPACITY,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Metrics(a) => cmd_metrics(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Psi(a) => cmd_psi(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Rates(a) => cmd_rates(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Loads a JSON config document, or the defaults when none is given.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidArgument(format!("config {}: {e}", p.display())).into())
        }
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    Ok(())
}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

// ---- metrics ----

#[derive(Args)]
struct MetricsArgs {
    /// A CSV file or a directory of CSV files.
    input: PathBuf,
    /// JSON config document; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Metric kind: acc, precision, recall, auc, ndcg, dcg, map, mrr.
    #[arg(long)]
    kind: Option<String>,
    /// Cutoff k.
    #[arg(long)]
    k: Option<usize>,
    /// Discount log base: 2, e, or any number > 1.
    #[arg(long)]
    log_base: Option<LogBase>,
    /// Accuracy threshold on scores.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct MetricsConfig {
    kind: String,
    k: Option<usize>,
    log_base: LogBase,
    threshold: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            kind: "ndcg".into(),
            k: None,
            log_base: LogBase::Two,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Serialize)]
struct MetricsRecord<'a> {
    source: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<regret_transfer::eval::RegretReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn cmd_metrics(a: MetricsArgs) -> Result<()> {
    let mut cfg: MetricsConfig = load_config(a.config.as_deref())?;
    set(&mut cfg.kind, a.kind);
    if a.k.is_some() {
        cfg.k = a.k;
    }
    set(&mut cfg.log_base, a.log_base);
    set(&mut cfg.threshold, a.threshold);

    let mut spec = MetricSpec::new(cfg.kind.parse()?)
        .with_log_base(cfg.log_base)
        .with_threshold(cfg.threshold);
    if let Some(k) = cfg.k {
        if !spec.kind.supports_truncation() {
            return Err(input_error(format!("{} does not take a cutoff", spec.kind)));
        }
        spec = spec.at(k);
    }
    let lists = read_instances(&a.input)?;
    if lists.is_empty() {
        eprintln!("warning: no CSV lists found in {}", a.input.display());
    }
    out!("{}", json_line(&serde_json::json!({ "config": cfg }))?);
    for list in &lists {
        let record = match metric_regret(&spec, &list.labels, &list.scores) {
            Ok(report) => MetricsRecord {
                source: &list.name,
                report: Some(report),
                error: None,
            },
            Err(e @ (Error::UndefinedMetric(_) | Error::InvalidArgument(_))) => MetricsRecord {
                source: &list.name,
                report: None,
                error: Some(e.to_string()),
            },
            Err(e) => return Err(e.into()),
        };
        out!("{}", json_line(&record)?);
    }
    Ok(())
}

// ---- bounds ----

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// auc-ndcg, ndcg-auc, auc-acc, ndcg-acc or trunc.
    #[arg(long)]
    direction: Option<Direction>,
    #[arg(long)]
    n_pos: Option<usize>,
    #[arg(long)]
    n_neg: Option<usize>,
    /// Margin for the accuracy directions.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    log_base: Option<LogBase>,
    /// Truncated metric for `trunc`: precision, recall or ndcg.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    /// Labels for `trunc`, e.g. 1,1,0,0.
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<u8>>,
    /// Ask for the upward `k1 -> k2` transfer.
    #[arg(long)]
    reverse: bool,
    /// Also build the attainability instance.
    #[arg(long)]
    witness: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct BoundsConfig {
    direction: Direction,
    n_pos: usize,
    n_neg: usize,
    delta: f64,
    log_base: LogBase,
    metric: String,
    k1: usize,
    k2: usize,
    labels: Option<Vec<u8>>,
    reverse: bool,
    witness: bool,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        let b = BoundConfig::default();
        Self {
            direction: Direction::AucToNdcg,
            n_pos: 2,
            n_neg: 2,
            delta: b.delta,
            log_base: b.log_base,
            metric: "ndcg".into(),
            k1: 1,
            k2: 2,
            labels: None,
            reverse: false,
            witness: false,
        }
    }
}

fn cmd_bounds(a: BoundsArgs) -> Result<()> {
    let mut cfg: BoundsConfig = load_config(a.config.as_deref())?;
    set(&mut cfg.direction, a.direction);
    set(&mut cfg.n_pos, a.n_pos);
    set(&mut cfg.n_neg, a.n_neg);
    set(&mut cfg.delta, a.delta);
    set(&mut cfg.log_base, a.log_base);
    set(&mut cfg.metric, a.metric);
    set(&mut cfg.k1, a.k1);
    set(&mut cfg.k2, a.k2);
    if a.labels.is_some() {
        cfg.labels = a.labels;
    }
    cfg.reverse |= a.reverse;
    cfg.witness |= a.witness;

    let bc = BoundConfig {
        log_base: cfg.log_base,
        delta: cfg.delta,
    };
    let out = if cfg.direction == Direction::Truncation {
        let labels = match &cfg.labels {
            Some(l) => LabeledList::from_binary(l)?,
            None => LabeledList::with_counts(cfg.n_pos, cfg.n_neg)?,
        };
        let spec = MetricSpec::new(cfg.metric.parse()?).with_log_base(cfg.log_base);
        let way = if cfg.reverse { TruncationWay::Up } else { TruncationWay::Down };
        let t = coeff_truncation(cfg.k1, cfg.k2, way, &spec, &labels)?;
        if let TruncationTransfer::Divergent(d) = &t {
            eprintln!(
                "{}@{} -> {}@{}: no linear transfer (Psi(0) > 0)",
                d.metric, d.from_k, d.metric, d.to_k
            );
        }
        serde_json::json!({ "config": cfg, "transfer": t })
    } else {
        let bound = bound_for(cfg.direction, cfg.n_pos, cfg.n_neg, &bc)?;
        let witness = if cfg.witness {
            Some(worst_case_construct(cfg.direction, cfg.n_pos + cfg.n_neg, cfg.n_pos, &bc)?)
        } else {
            None
        };
        serde_json::json!({ "config": cfg, "bound": bound, "witness": witness })
    };
    out!("{}", to_json(&out)?);
    Ok(())
}

// ---- psi ----

#[derive(Args)]
struct PsiArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Source metric, e.g. auc or ndcg@3.
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    target: Option<String>,
    /// Binary labels, e.g. 1,0,1,0.
    #[arg(long, value_delimiter = ',', conflicts_with = "eta")]
    labels: Option<Vec<u8>>,
    /// Relevance probabilities, e.g. 0.9,0.6,0.2.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// `attainable` or `uniform:N`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    log_base: Option<LogBase>,
    /// Directory for psi.csv and psi.json; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct PsiConfig {
    source: String,
    target: String,
    labels: Option<Vec<u8>>,
    eta: Option<Vec<f64>>,
    grid: EpsGrid,
    log_base: LogBase,
}

impl Default for PsiConfig {
    fn default() -> Self {
        Self {
            source: "auc".into(),
            target: "ndcg".into(),
            labels: None,
            eta: None,
            grid: EpsGrid::Attainable,
            log_base: LogBase::Two,
        }
    }
}

fn parse_grid(s: &str) -> Result<EpsGrid> {
    if s == "attainable" {
        return Ok(EpsGrid::Attainable);
    }
    if let Some(m) = s.strip_prefix("uniform:") {
        let m = m.parse().map_err(|_| input_error(format!("bad grid size in `{s}`")))?;
        return Ok(EpsGrid::Uniform(m));
    }
    Err(input_error(format!("grid must be `attainable` or `uniform:N`, got `{s}`")))
}

fn cmd_psi(a: PsiArgs) -> Result<()> {
    let mut cfg: PsiConfig = load_config(a.config.as_deref())?;
    set(&mut cfg.source, a.source);
    set(&mut cfg.target, a.target);
    if a.labels.is_some() {
        cfg.labels = a.labels;
        cfg.eta = None;
    }
    if a.eta.is_some() {
        cfg.eta = a.eta;
        cfg.labels = None;
    }
    if let Some(g) = a.grid {
        cfg.grid = parse_grid(&g)?;
    }
    set(&mut cfg.log_base, a.log_base);

    let source = cfg.source.parse::<MetricSpec>()?.with_log_base(cfg.log_base);
    let target = cfg.target.parse::<MetricSpec>()?.with_log_base(cfg.log_base);
    let instance = match (&cfg.labels, &cfg.eta) {
        (Some(l), None) => PsiInstance::Labels(LabeledList::from_binary(l)?),
        (None, Some(e)) => PsiInstance::Eta(RelevanceVector::new(e.clone())?),
        _ => return Err(input_error("give exactly one of --labels or --eta")),
    };
    let curve = psi_brute(&source, &target, &instance, cfg.grid)?;
    let json = to_json(&serde_json::json!({ "config": cfg, "curve": curve }))?;
    match a.out {
        Some(dir) => {
            prepare_dir(&dir)?;
            let header = format!("# config: {}\n", serde_json::to_string(&cfg)?);
            write_file(&dir, "psi.csv", &(header + &curve.to_csv()))?;
            write_file(&dir, "psi.json", &json)?;
            write_file(&dir, "config.json", &to_json(&cfg)?)?;
        }
        None => out!("{json}"),
    }
    Ok(())
}

// ---- verify ----

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Largest list length enumerated (at most 9).
    #[arg(long)]
    n_max: Option<usize>,
    /// Check groups: auc-ndcg, ndcg-auc, auc-acc, ndcg-acc, trunc,
    /// trunc-reverse, sets, pointwise.
    #[arg(long, value_delimiter = ',')]
    directions: Option<Vec<CheckGroup>>,
    #[arg(long)]
    log_base: Option<LogBase>,
    /// Directory for verify.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let mut cfg: VerifyConfig = load_config(a.config.as_deref())?;
    set(&mut cfg.n_max, a.n_max);
    set(&mut cfg.groups, a.directions);
    set(&mut cfg.bounds.log_base, a.log_base);

    let report = run_checks(&cfg)?;
    for c in &report.checks {
        let status = match (c.passed, c.informational) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "note",
        };
        out!("{status:4}  {}  [{} cases, {} failing] {}", c.name, c.cases, c.failures, c.detail);
        if let (false, Some(w)) = (c.passed, &c.witness) {
            out!("      witness: {w}");
        }
    }
    if let Some(dir) = a.out {
        prepare_dir(&dir)?;
        write_file(&dir, "verify.json", &to_json(&report)?)?;
        write_file(&dir, "config.json", &to_json(&cfg)?)?;
    }
    if report.all_passed {
        out!("all asserted properties hold");
        Ok(())
    } else {
        Err(ChecksFailed.into())
    }
}

// ---- simulate ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON simulation config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    /// Snapshots per loss kind.
    #[arg(long)]
    snapshots: Option<usize>,
    #[arg(long)]
    noise_scale: Option<f64>,
    #[arg(long)]
    swap_fraction: Option<f64>,
    #[arg(long, value_parser = ["grid", "random"])]
    alpha_schedule: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    /// Loss kinds, e.g. pointwise,listwise.
    #[arg(long, value_delimiter = ',')]
    losses: Option<Vec<LossKind>>,
    /// Output directory.
    #[arg(long, default_value = "sim-out")]
    out: PathBuf,
    /// Artifacts to write; svg adds the NDCG-vs-Acc scatter.
    #[arg(long, value_delimiter = ',', default_value = "csv,json")]
    format: Vec<Format>,
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg: SimConfig = load_config(a.config.as_deref())?;
    set(&mut cfg.seed, a.seed);
    set(&mut cfg.n, a.n);
    set(&mut cfg.snapshots, a.snapshots);
    set(&mut cfg.noise.noise_scale, a.noise_scale);
    set(&mut cfg.noise.swap_fraction, a.swap_fraction);
    set(&mut cfg.tau, a.tau);
    set(&mut cfg.losses, a.losses);
    if let Some(s) = a.alpha_schedule {
        cfg.alpha_schedule = if s == "random" { AlphaSchedule::Random } else { AlphaSchedule::Grid };
    }

    let result = run_simulation(&cfg)?;
    prepare_dir(&a.out)?;
    write_file(&a.out, "config.json", &to_json(&cfg)?)?;
    if a.format.contains(&Format::Csv) {
        write_file(&a.out, "snapshots.csv", &snapshots_csv(&cfg, &result.snapshots)?)?;
    }
    if a.format.contains(&Format::Json) {
        write_file(&a.out, "summary.json", &to_json(&result.summary)?)?;
    }
    if a.format.contains(&Format::Svg) {
        write_file(&a.out, "snapshots.svg", &scatter_svg(&cfg, &result.snapshots)?)?;
    }
    out!("{:<10} {:>10} {:>10} {:>10}", "loss", "r_acc", "r_auc", "r_ndcg");
    for s in &result.summary.losses {
        out!(
            "{:<10} {:>10.5} {:>10.5} {:>10.5}",
            s.loss.name(),
            s.mean_r_acc,
            s.mean_r_auc,
            s.mean_r_ndcg
        );
    }
    out!("seed {}, {} rows written to {}", cfg.seed, result.snapshots.len(), a.out.display());
    Ok(())
}

// ---- rates ----

#[derive(Args)]
struct RatesArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// balanced, imbalanced, or both when absent.
    #[arg(long, value_delimiter = ',')]
    scenario: Option<Vec<Scenario>>,
    /// Strictly increasing list lengths, at least 5, each >= 10.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    log_base: Option<LogBase>,
    #[arg(long, default_value = "rates-out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct RatesConfig {
    scenarios: Vec<Scenario>,
    grid: Vec<usize>,
    bounds: BoundConfig,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            scenarios: vec![Scenario::Balanced, Scenario::Imbalanced],
            grid: default_grid(),
            bounds: BoundConfig::default(),
        }
    }
}

fn cmd_rates(a: RatesArgs) -> Result<()> {
    let mut cfg: RatesConfig = load_config(a.config.as_deref())?;
    set(&mut cfg.scenarios, a.scenario);
    set(&mut cfg.grid, a.grid);
    set(&mut cfg.bounds.delta, a.delta);
    set(&mut cfg.bounds.log_base, a.log_base);

    let mut fits = Vec::new();
    for &scenario in &cfg.scenarios {
        fits.extend(scan_all(scenario, &cfg.grid, &cfg.bounds)?);
    }
    prepare_dir(&a.out)?;
    let config_line = serde_json::to_string(&cfg)?;
    for fit in &fits {
        let mut body = format!("# config: {config_line}\nn,C\n");
        for (n, c) in fit.grid.iter().zip(&fit.coefficients) {
            body.push_str(&format!("{n},{c}\n"));
        }
        let name = format!("rates_{}_{}.csv", fit.scenario.name(), fit.direction.name());
        write_file(&a.out, &name, &body)?;
        out!(
            "{:<10} {:<9} slope {:>7.4}  C/({}) spread {:.4}",
            fit.scenario.name(),
            fit.direction.name(),
            fit.slope,
            fit.growth.label(),
            fit.spread
        );
    }
    write_file(&a.out, "fits.json", &to_json(&serde_json::json!({ "config": cfg, "fits": fits }))?)?;
    write_file(&a.out, "config.json", &to_json(&cfg)?)?;
    Ok(())
}
