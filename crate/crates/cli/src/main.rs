use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uplink_core::harness::output::{emit_csv, manifest_path, write_manifest, write_results};
use uplink_core::harness::presets::{self, output_name};
use uplink_core::harness::run_series;
use uplink_core::validation;
use uplink_core::{Error, ExperimentConfig};

/// Monte Carlo analysis of power-controlled DS-CDMA cellular uplinks.
#[derive(Parser)]
#[command(name = "uplink", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOpts {
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Config override `key=value`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file.
    ///
    /// Any config key may also be given as a trailing `--key value` or
    /// `--key=value` flag.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Result CSV; the table goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
        extra: Vec<String>,
    },
    /// Reproduce one of the shipped figure datasets.
    Figure {
        #[arg(value_parser = presets::figure_names().collect::<Vec<_>>())]
        name: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the preset trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Check the closed-form outage against simulation and special cases.
    Validate {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 1_000_000)]
        draws: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Flags after the first config-key flag, split back into the named
/// options and `key=value` overrides.
#[derive(Default)]
struct Trailing {
    overrides: Vec<String>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    workers: Option<usize>,
}

fn parse_trailing(extra: &[String]) -> Result<Trailing, Error> {
    let mut t = Trailing::default();
    let mut it = extra.iter();
    while let Some(arg) = it.next() {
        let flag = arg
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("unexpected argument {arg:?}")))?;
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let value = it
                    .next()
                    .ok_or_else(|| Error::Config(format!("flag --{flag} needs a value")))?;
                (flag.to_string(), value.clone())
            }
        };
        match key.as_str() {
            "override" => t.overrides.push(value),
            "config" => t.config = Some(value.into()),
            "out" => t.out = Some(value.into()),
            "workers" => {
                t.workers = Some(
                    value
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid --workers {value:?}")))?,
                )
            }
            _ => t.overrides.push(format!("{key}={value}")),
        }
    }
    Ok(t)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn workers(opts: &RunOpts) -> usize {
    opts.workers.unwrap_or_else(default_workers)
}

fn report(files: &[PathBuf]) {
    for f in files {
        eprintln!("wrote {}", f.display());
    }
}

fn run(config: Option<&Path>, out: Option<&Path>, opts: &RunOpts, extra: &[String]) -> Result<(), Error> {
    let trailing = parse_trailing(extra)?;
    let config = trailing.config.as_deref().or(config);
    let out = trailing.out.as_deref().or(out);
    let workers = trailing.workers.or(opts.workers).unwrap_or_else(default_workers);
    let base = match config {
        Some(path) => ExperimentConfig::load_file(path)?,
        None => ExperimentConfig::default(),
    };
    let mut overrides = opts.overrides.clone();
    overrides.extend(trailing.overrides);
    if let Some(seed) = opts.seed {
        overrides.push(format!("seed={seed}"));
    }
    let cfg = base.with_overrides(&overrides)?;
    if let Some(label) = cfg.load_label() {
        eprintln!("network is {label}");
    }
    let key = cfg.series_key.clone();
    for (value, cfg, result) in run_series(&cfg, workers)? {
        match out {
            Some(path) => {
                let path = match key.as_deref().zip(value) {
                    Some(series) => {
                        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                        path.with_file_name(output_name(&stem, Some(series)))
                    }
                    None => path.to_path_buf(),
                };
                let mut files = emit_csv(&result, &path)?;
                let manifest = manifest_path(&path);
                write_manifest(&cfg, &manifest)?;
                files.push(manifest);
                report(&files);
            }
            None => {
                if let Some((k, v)) = key.as_deref().zip(value) {
                    println!("# {k} = {v}");
                }
                write_results(&result, std::io::stdout().lock()).map_err(|source| Error::Csv {
                    path: "<stdout>".into(),
                    source,
                })?;
            }
        }
    }
    Ok(())
}

fn figure(name: &str, out: &Path, trials: Option<usize>, opts: &RunOpts) -> Result<(), Error> {
    let mut overrides = opts.overrides.clone();
    if let Some(t) = trials {
        overrides.push(format!("trials={t}"));
    }
    if let Some(s) = opts.seed {
        overrides.push(format!("seed={s}"));
    }
    report(&presets::run_figure(name, out, &overrides, workers(opts))?);
    Ok(())
}

fn validate(cases: usize, draws: u64, seed: u64) -> Result<bool, Error> {
    let checks = validation::run_all(cases, draws, seed)?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::PlacementInfeasible { .. } => 2,
        Error::NumericalInstability { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run {
            config,
            out,
            opts,
            extra,
        } => run(config.as_deref(), out.as_deref(), opts, extra).map(|_| true),
        Command::Figure {
            name,
            out,
            trials,
            opts,
        } => figure(name, out, *trials, opts).map(|_| true),
        Command::Validate { cases, draws, seed } => validate(*cases, *draws, *seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
