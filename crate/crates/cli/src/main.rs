use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use evhail_core::bundle::Bundle;
use evhail_core::config::ConfigError;
use evhail_core::forecast::ForecastModel;
use evhail_core::geo::Rect;
use evhail_core::ingest::{self, IngestError, ParseReport};
use evhail_core::sim::{report, run, Policy, RunOptions, SimInput};
use evhail_core::synth::{self, SynthOptions};
use evhail_core::Config;
use log::{info, warn};

#[derive(Parser, Debug)]
#[command(name = "evhail", version, about = "Electric ride-hailing guidance, matching and charging simulator")]
struct Cli {
    /// Key-value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (or file for `fit`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Config override, repeatable.
    #[arg(long = "set", value_name = "K=V", global = true)]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert trip and station CSVs into a dataset bundle.
    Ingest(IngestArgs),
    /// Generate a synthetic dataset bundle.
    Synth(SynthArgs),
    /// Fit the demand forecast on a bundle's history.
    Fit(FitArgs),
    /// Run policies over a bundle and write a report.
    Simulate(SimulateArgs),
    /// Per-metric deltas between two reports, or between policies of one.
    Compare(CompareArgs),
    /// Print the summary tables of a report.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long)]
    trips: PathBuf,
    #[arg(long)]
    stations: PathBuf,
    /// Separate history trips; otherwise trips before --split are history.
    #[arg(long)]
    history: Option<PathBuf>,
    /// First evaluation date (YYYY-MM-DD).
    #[arg(long)]
    split: Option<NaiveDate>,
    /// Keep only trips inside lat_min,lon_min,lat_max,lon_max.
    #[arg(long, value_name = "LAT0,LON0,LAT1,LON1")]
    bbox: Option<String>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 12)]
    days: usize,
    #[arg(long, default_value_t = 56)]
    history_days: usize,
    /// Windows per day; sets the window length.
    #[arg(long)]
    windows: Option<usize>,
    #[arg(long)]
    stations: Option<usize>,
    #[arg(long)]
    demand_scale: Option<f64>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    data: PathBuf,
    /// `all` or a comma-separated list of policy names.
    #[arg(long, default_value = "all")]
    policy: String,
    /// Simulate only the first N days.
    #[arg(long)]
    days: Option<usize>,
    /// Simulate only the first N windows of each day.
    #[arg(long)]
    windows: Option<usize>,
    /// Forecast written by `fit`; fitted on the fly otherwise.
    #[arg(long)]
    forecast: Option<PathBuf>,
    /// Re-check every plan with the independent validators.
    #[arg(long)]
    validate: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Report directory.
    a: PathBuf,
    /// Second report directory; deltas are b minus a.
    b: Option<PathBuf>,
    /// With a single report: policy the others are compared against.
    #[arg(long, default_value = "BMCSS-SG")]
    reference: String,
}

#[derive(Args, Debug)]
struct ReportArgs {
    dir: PathBuf,
}

/// Bad invocation or configuration (exit 2) versus a failure while running (exit 1).
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        let usage = e.chain().any(|c| {
            c.is::<ConfigError>()
                || c.is::<evhail_core::sim::policy::UnknownPolicy>()
                || matches!(c.downcast_ref::<IngestError>(), Some(IngestError::Open { .. } | IngestError::MissingColumn(_)))
        });
        if usage {
            Failure::Usage(e)
        } else {
            Failure::Runtime(e)
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow::anyhow!(msg.into()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    for kv in &cli.set {
        cfg.apply_override(kv)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(cli, &cfg, a),
        Command::Synth(a) => cmd_synth(cli, cfg, a),
        Command::Fit(a) => cmd_fit(cli, &cfg, a),
        Command::Simulate(a) => cmd_simulate(cli, cfg, a),
        Command::Compare(a) => cmd_compare(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn parse_bbox(s: &str) -> Result<Rect, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--bbox expects four numbers, got `{s}`")))?;
    match v[..] {
        [a, b, c, d] if a < c && b < d => Ok(Rect::new(a, b, c, d)),
        _ => Err(usage(format!("--bbox expects lat_min,lon_min,lat_max,lon_max, got `{s}`"))),
    }
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("file not found: {}", path.display())))
    }
}

fn print_reports(names: &[&str], reports: &[ParseReport]) -> anyhow::Result<()> {
    let obj: serde_json::Map<String, serde_json::Value> = names
        .iter()
        .zip(reports)
        .map(|(n, r)| Ok(((*n).to_string(), serde_json::to_value(r)?)))
        .collect::<anyhow::Result<_>>()?;
    println!("{}", serde_json::to_string_pretty(&obj)?);
    Ok(())
}

fn cmd_ingest(cli: &Cli, cfg: &Config, a: &IngestArgs) -> Result<(), Failure> {
    require_file(&a.trips)?;
    require_file(&a.stations)?;
    if let Some(h) = &a.history {
        require_file(h)?;
    }
    let bbox = a.bbox.as_deref().map(parse_bbox).transpose()?;
    let read = |p: &Path| match &bbox {
        Some(b) => ingest::parse_trips_within(p, b),
        None => ingest::parse_trips(p),
    };
    let (trips, trips_report) = read(&a.trips)?;
    let (stations, stations_report) = ingest::parse_stations(&a.stations)?;
    if stations.is_empty() {
        return Err(usage(format!("{}: no valid charging stations", a.stations.display())));
    }
    let (trips, history, history_report) = match (&a.history, a.split) {
        (Some(h), _) => {
            let (history, r) = read(h)?;
            (trips, history, r)
        }
        (None, Some(split)) => {
            let (eval, hist): (Vec<_>, Vec<_>) = trips.into_iter().partition(|t| t.pickup_time.date() >= split);
            (eval, hist, ParseReport::default())
        }
        (None, None) => {
            warn!("no history given; the forecast will be fitted on the evaluation trips");
            (trips.clone(), trips, ParseReport::default())
        }
    };
    let dir = out_dir(cli, "bundle");
    Bundle { trips, history, stations }.write(&dir)?;
    info!("bundle written to {} (seed {})", dir.display(), cfg.seed);
    print_reports(&["trips", "history", "stations"], &[trips_report, history_report, stations_report])?;
    Ok(())
}

fn cmd_synth(cli: &Cli, mut cfg: Config, a: &SynthArgs) -> Result<(), Failure> {
    if let Some(w) = a.windows {
        if w == 0 || 1440 % w != 0 {
            return Err(usage(format!("--windows must divide 1440, got {w}")));
        }
        cfg.window_min = (1440 / w) as f64;
        cfg.validate()?;
    }
    let mut opts = SynthOptions { eval_days: a.days, history_days: a.history_days, ..SynthOptions::default() };
    if let Some(s) = a.stations {
        opts.stations = s;
    }
    if let Some(x) = a.demand_scale {
        opts.demand_scale = x;
    }
    let bundle = synth::generate(&cfg, &opts, cfg.seed)?;
    let dir = out_dir(cli, "synthetic");
    bundle.write(&dir)?;
    println!(
        "{} evaluation trips over {} days, {} history trips, {} stations -> {}",
        bundle.trips.len(),
        a.days,
        bundle.history.len(),
        bundle.stations.len(),
        dir.display()
    );
    Ok(())
}

fn read_bundle(dir: &Path) -> Result<Bundle, Failure> {
    if !dir.is_dir() {
        return Err(usage(format!("data directory not found: {}", dir.display())));
    }
    let (bundle, reports) = Bundle::read(dir)?;
    for (name, r) in ["trips", "history", "stations"].iter().zip(reports) {
        if r.dropped > 0 {
            warn!("{name}: dropped {} of {} rows", r.dropped, r.total);
        }
    }
    Ok(bundle)
}

fn cmd_fit(cli: &Cli, cfg: &Config, a: &FitArgs) -> Result<(), Failure> {
    let bundle = read_bundle(&a.data)?;
    let model = evhail_core::sim::engine::fit_forecast(cfg, &bundle.history);
    let path = out_dir(cli, "forecast.txt");
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(&path, model.to_text()).with_context(|| format!("writing {}", path.display()))?;
    println!("forecast for {} regions written to {}", model.num_regions, path.display());
    Ok(())
}

fn cmd_simulate(cli: &Cli, cfg: Config, a: &SimulateArgs) -> Result<(), Failure> {
    let policies = Policy::parse_list(&a.policy)?;
    let bundle = read_bundle(&a.data)?;
    let forecast = match &a.forecast {
        Some(p) => {
            require_file(p)?;
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(ForecastModel::from_text(&text).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => None,
    };
    let seed = cfg.seed;
    let config_text = cfg.to_kv_string();
    let mut input = SimInput::from_bundle(cfg, &bundle, forecast)?;
    if let Some(n) = a.days {
        input.days.truncate(n);
    }
    if input.days.is_empty() {
        return Err(usage(format!("{}: no evaluation days", a.data.display())));
    }
    let opts = RunOptions { windows: a.windows, validate: a.validate, ..RunOptions::new(policies) };
    let started = std::time::Instant::now();
    let runs = run(&input, &opts, seed)?;
    info!("simulated {} days in {:.2?}", input.days.len(), started.elapsed());
    let summary = report::summarize(&runs, &config_text, seed);
    let dir = out_dir(cli, "report");
    report::write(&dir, &runs, &summary)?;
    print!("{}", report::render_tables(&summary));
    Ok(())
}

fn read_report(dir: &Path) -> Result<report::Summary, Failure> {
    if !dir.join("summary.json").is_file() {
        return Err(usage(format!("no report found at {}", dir.display())));
    }
    Ok(report::read_summary(dir)?)
}

fn cmd_compare(a: &CompareArgs) -> Result<(), Failure> {
    let first = read_report(&a.a)?;
    let deltas = match &a.b {
        Some(b) => report::compare(&first, &read_report(b)?)?,
        None => {
            if first.policy(&a.reference).is_none() {
                return Err(usage(format!("policy {} is not in {}", a.reference, a.a.display())));
            }
            report::compare_policies(&first, &a.reference)?
        }
    };
    print!("{}", report::render_deltas(&deltas));
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<(), Failure> {
    print!("{}", report::render_tables(&read_report(&a.dir)?));
    Ok(())
}
