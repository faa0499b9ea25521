//! CSV datasets and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{AggregateResult, ExperimentConfig, PolicyRow};
use crate::error::{Error, Result};

pub const RESULT_HEADER: [&str; 11] = [
    "sweep_axis",
    "sweep_value",
    "policy",
    "mean_outage",
    "se_outage",
    "mean_throughput",
    "se_throughput",
    "tau",
    "se_tau",
    "trials",
    "seed",
];
pub const PANEL_HEADER: [&str; 4] = ["uplink_id", "R", "epsilon", "throughput"];
pub const NOT_APPLICABLE: &str = "NA";
pub const SIGNIFICANT_DIGITS: usize = 9;

/// `printf("%.9g")`: nine significant digits, trailing zeros dropped.
pub fn format_sig(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = SIGNIFICANT_DIGITS;
    let sci = format!("{:.*e}", p - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NOT_APPLICABLE.to_string(), format_sig)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `<dir>/<stem>_panel.csv` beside `path`.
pub fn panel_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_panel.csv"))
}

/// `<dir>/<stem>_manifest.json` beside `path`.
pub fn manifest_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_manifest.json"))
}

fn row_record(result: &AggregateResult, value: Option<f64>, row: &PolicyRow) -> Vec<String> {
    vec![
        result.sweep_axis.map_or("none", |a| a.label()).to_string(),
        opt(value),
        row.label.clone(),
        format_sig(row.outage.mean),
        opt(row.outage.std_error),
        format_sig(row.throughput.mean),
        opt(row.throughput.std_error),
        format_sig(row.tau.mean),
        opt(row.tau.std_error),
        result.trials.to_string(),
        result.seed.to_string(),
    ]
}

/// The summary table as CSV.
pub fn write_results<W: Write>(result: &AggregateResult, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESULT_HEADER)?;
    for point in &result.points {
        for row in &point.rows {
            w.write_record(row_record(result, point.value, row))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the summary CSV at `path`, plus the panel file when the result
/// carries one. Returns every file written.
pub fn emit_csv(result: &AggregateResult, path: &Path) -> Result<Vec<PathBuf>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = fs::File::create(path).map_err(io_err(path))?;
    write_results(result, file).map_err(csv_err(path))?;
    let mut written = vec![path.to_path_buf()];

    if !result.panel.is_empty() {
        let ppath = panel_path(path);
        let mut w = csv::Writer::from_path(&ppath).map_err(csv_err(&ppath))?;
        w.write_record(PANEL_HEADER).map_err(csv_err(&ppath))?;
        for s in &result.panel {
            w.write_record([
                s.mobile.to_string(),
                format_sig(s.rate),
                format_sig(s.outage),
                format_sig(s.throughput),
            ])
            .map_err(csv_err(&ppath))?;
        }
        w.flush().map_err(io_err(&ppath))?;
        written.push(ppath);
    }
    Ok(written)
}

/// Resolved config, seed and load label for a run.
pub fn write_manifest(config: &ExperimentConfig, path: &Path) -> Result<()> {
    let manifest = serde_json::json!({
        "seed": config.seed,
        "trials": config.trials,
        "mobiles": config.mobiles(),
        "load_label": config.load_label(),
        "config": config,
    });
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    writeln!(f, "{text}").map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment, SweepAxis};

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig(0.1), "0.1");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig(31.830988618379067), "31.8309886");
        assert_eq!(format_sig(123456789.4), "123456789");
        assert_eq!(format_sig(1234567890.0), "1.23456789e+09");
        assert_eq!(format_sig(1.5e-7), "1.5e-07");
        assert_eq!(format_sig(0.00012345678912), "0.000123456789");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(4.0), "4");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(9.9999999996), "10");
    }

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            base_stations: 4,
            load: 3.0,
            trials: 2,
            rate_max: 5.0,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn single_point_rows_and_byte_identical_reemit() {
        let dir = tempfile::tempdir().unwrap();
        let result = run_experiment(&small(), 1).unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        assert_eq!(emit_csv(&result, &a).unwrap().len(), 1);
        emit_csv(&result, &b).unwrap();
        let text = fs::read_to_string(&a).unwrap();
        assert_eq!(text, fs::read_to_string(&b).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], RESULT_HEADER.join(","));
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("none,NA,MTFR,"));
        assert!(lines[1].ends_with(",2,1"));
    }

    #[test]
    fn load_sweep_has_row_per_policy_and_panel_for_rates() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            sweep_axis: Some(SweepAxis::Load),
            sweep_values: vec![1.0, 2.0, 3.0],
            ..small()
        };
        let path = dir.path().join("sub/load.csv");
        emit_csv(&run_experiment(&cfg, 1).unwrap(), &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1 + 3 * 4);

        let cfg = ExperimentConfig {
            sweep_axis: Some(SweepAxis::Rate),
            sweep_values: vec![0.5, 1.0],
            panel_size: 2,
            ..small()
        };
        let path = dir.path().join("rate.csv");
        let files = emit_csv(&run_experiment(&cfg, 1).unwrap(), &path).unwrap();
        assert_eq!(files[1], dir.path().join("rate_panel.csv"));
        let panel = fs::read_to_string(&files[1]).unwrap();
        assert_eq!(panel.lines().next().unwrap(), PANEL_HEADER.join(","));
        assert_eq!(panel.lines().count(), 1 + 4);
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let result = run_experiment(&small(), 1).unwrap();
        let err = emit_csv(&result, &blocker.join("out.csv")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }

    #[test]
    fn manifest_records_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        write_manifest(&ExperimentConfig::default(), &path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v["load_label"], "half loaded");
        assert_eq!(v["config"]["base_stations"], 50);
        assert_eq!(v["seed"], 1);
    }
}
