use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use waternet::forecast::{
    mape, rolling_predictions, EvalReport, NvarModel, NvarSpec, SeasonalNaive,
};
use waternet::netsim::{Event, Mode, EVENT_LOG_HEADER};
use waternet::scenario::{RunReport, Scenario};
use waternet::series::{fill_gaps, read_csv_path, write_csv, FillMethod};
use waternet::{Error, Result};

#[derive(Parser)]
#[command(name = "waternet", version, about = "Hierarchical water-network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one consumption CSV per meter, plus a copy of the scenario
    /// pointing at them.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the network simulation and write a metrics report and event log.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Defaults to the scenario's `sim.mode`.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        out_metrics: Option<PathBuf>,
        /// With `--mode both`, the mode name is inserted before the
        /// extension: `events.event_driven.csv`, `events.periodic.csv`.
        #[arg(long)]
        out_log: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Print the effective scenario and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Fit NVAR and the seasonal baseline on a train split and score both
    /// on the rest.
    Forecast {
        #[arg(long)]
        input: PathBuf,
        /// Meter to use when the file holds several; defaults to the first.
        #[arg(long)]
        meter: Option<String>,
        /// TOML file with `delays`, `degree`, `ridge_lambda`, `include_bias`.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0.8)]
        train_frac: f64,
        #[arg(long, default_value_t = 24)]
        horizon: usize,
        #[arg(long, default_value_t = 24)]
        period: usize,
        /// Predictions CSV: `timestamp,actual,nvar,seasonal_naive`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combine metrics files and render comparison tables.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        metrics: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Allow inputs from different scenarios or seeds.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Event,
    Periodic,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Invariant(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate { config, out, seed } => generate(&config, &out, seed),
        Command::Simulate {
            scenario,
            mode,
            out_metrics,
            out_log,
            seed,
            dump_config,
        } => simulate(&scenario, mode, out_metrics, out_log, seed, dump_config),
        Command::Forecast {
            input,
            meter,
            spec,
            train_frac,
            horizon,
            period,
            out,
        } => forecast(&input, meter, spec, train_frac, horizon, period, out),
        Command::Report {
            metrics,
            format,
            force,
            out,
        } => report(&metrics, format, force, out),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario> {
    let mut s = Scenario::from_path(path)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    Ok(s)
}

fn generate(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut s = load_scenario(config, seed)?;
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let meters = s.generate_meters()?;
    for (id, series) in &meters {
        let path = out.join(format!("{id}.csv"));
        let file = fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let one: BTreeMap<String, _> = [(id.clone(), series.clone())].into();
        write_csv(file, &one)?;
    }
    s.data = Some(".".into());
    write(&out.join("scenario.toml"), &s.to_toml_string()?)?;
    println!("wrote {} meter files to {}", meters.len(), out.display());
    Ok(())
}

fn simulate(
    path: &Path,
    mode: Option<ModeArg>,
    out_metrics: Option<PathBuf>,
    out_log: Option<PathBuf>,
    seed: Option<u64>,
    dump_config: bool,
) -> Result<()> {
    let s = load_scenario(path, seed)?;
    if dump_config {
        print!("{}", s.to_toml_string()?);
        return Ok(());
    }
    let modes = match mode {
        None => vec![s.sim.mode],
        Some(ModeArg::Event) => vec![Mode::EventDriven],
        Some(ModeArg::Periodic) => vec![Mode::Periodic],
        Some(ModeArg::Both) => vec![Mode::EventDriven, Mode::Periodic],
    };
    let base = path.parent().unwrap_or(Path::new("."));
    let (report, logs) = s.execute(&modes, base)?;
    if let Some(p) = &out_metrics {
        write(p, &report.to_json()?)?;
    }
    if let Some(p) = &out_log {
        let several = logs.len() > 1;
        for (mode, events) in &logs {
            let target = if several { with_mode(p, *mode) } else { p.clone() };
            write(&target, &render_log(events))?;
        }
    }
    print!("{}", report.render_text());
    Ok(())
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::EventDriven => "event_driven",
        Mode::Periodic => "periodic",
    }
}

fn with_mode(p: &Path, mode: Mode) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match p.extension() {
        Some(ext) => format!("{stem}.{}.{}", mode_name(mode), ext.to_string_lossy()),
        None => format!("{stem}.{}", mode_name(mode)),
    };
    p.with_file_name(name)
}

fn render_log(events: &[Event]) -> String {
    let mut s = String::with_capacity(32 * (events.len() + 1));
    s.push_str(EVENT_LOG_HEADER);
    s.push('\n');
    for e in events {
        s.push_str(&e.to_line());
        s.push('\n');
    }
    s
}

fn forecast(
    input: &Path,
    meter: Option<String>,
    spec: Option<PathBuf>,
    train_frac: f64,
    horizon: usize,
    period: usize,
    out: Option<PathBuf>,
) -> Result<()> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::Config(format!(
            "--train-frac must lie strictly between 0 and 1, got {train_frac}"
        )));
    }
    let spec = match spec {
        None => NvarSpec::default(),
        Some(p) => {
            let text = fs::read_to_string(&p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
    };
    let mut meters = read_csv_path(input)?;
    let id = match meter {
        Some(m) => m,
        None => meters
            .keys()
            .next()
            .cloned()
            .ok_or_else(|| Error::Config("input has no rows".into()))?,
    };
    let series = meters
        .remove(&id)
        .ok_or_else(|| Error::Config(format!("meter {id} not found in input")))?;
    let series = if series.has_missing() {
        fill_gaps(&series, FillMethod::Linear)?
    } else {
        series
    };
    let values = series.dense()?;
    let train = (values.len() as f64 * train_frac).floor() as usize;
    if train == 0 || train >= values.len() {
        return Err(Error::Config(format!(
            "train split of {train} leaves no training or test data in {} samples",
            values.len()
        )));
    }
    let model = NvarModel::train_values(&values[..train], &spec)?;
    let (actual, nvar) = rolling_predictions(&model, &values, train, horizon)?;
    let (_, naive) = rolling_predictions(&SeasonalNaive { period }, &values, train, horizon)?;
    let reports: BTreeMap<&str, EvalReport> =
        [("nvar", mape(&actual, &nvar)?), ("seasonal_naive", mape(&actual, &naive)?)].into();
    if let Some(p) = out {
        let mut s = String::from("timestamp,actual,nvar,seasonal_naive\n");
        for (k, ((a, n), b)) in actual.iter().zip(&nvar).zip(&naive).enumerate() {
            s.push_str(&format!("{},{a},{n},{b}\n", series.timestamp(train + k)));
        }
        write(&p, &s)?;
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&reports).map_err(|e| Error::Parse(e.to_string()))?
    );
    Ok(())
}

fn report(paths: &[PathBuf], format: Format, force: bool, out: Option<PathBuf>) -> Result<()> {
    let mut reports = Vec::with_capacity(paths.len());
    for p in paths {
        let text = fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        reports.push(
            RunReport::from_json(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
        );
    }
    let merged = RunReport::merge(reports, force)?;
    let text = match format {
        Format::Text => merged.render_text(),
        Format::Json => merged.to_json()? + "\n",
    };
    match out {
        Some(p) => write(&p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
