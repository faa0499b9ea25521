//! Shipped figure configurations.

use std::path::{Path, PathBuf};

use super::output::{emit_csv, manifest_path, write_manifest};
use super::{output::format_sig, run_series, ExperimentConfig};
use crate::error::{Error, Result};

pub const FIGURES: [(&str, &str); 5] = [
    ("fig2", include_str!("../../presets/fig2.cfg")),
    ("fig3", include_str!("../../presets/fig3.cfg")),
    ("fig4", include_str!("../../presets/fig4.cfg")),
    ("fig5", include_str!("../../presets/fig5.cfg")),
    ("fig6", include_str!("../../presets/fig6.cfg")),
];

pub fn figure_names() -> impl Iterator<Item = &'static str> {
    FIGURES.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = FIGURES.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        Error::Config(format!(
            "unknown figure {name:?}; expected one of {:?}",
            figure_names().collect::<Vec<_>>()
        ))
    })?;
    ExperimentConfig::from_json(text)
}

/// `fig4.csv`, or `fig4_sigma_s_db_8.csv` for one member of a series.
pub fn output_name(name: &str, series: Option<(&str, f64)>) -> String {
    match series {
        None => format!("{name}.csv"),
        Some((key, v)) => format!("{name}_{key}_{}.csv", format_sig(v)),
    }
}

/// Runs a preset (with overrides) and writes its CSVs and manifests into
/// `out_dir`. Returns the written files.
pub fn run_figure<S: AsRef<str>>(name: &str, out_dir: &Path, overrides: &[S], workers: usize) -> Result<Vec<PathBuf>> {
    let config = preset(name)?.with_overrides(overrides)?;
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let key = config.series_key.clone();
    let mut written = Vec::new();
    for (value, cfg, result) in run_series(&config, workers)? {
        let series = key.as_deref().zip(value);
        let path = out_dir.join(output_name(name, series));
        written.extend(emit_csv(&result, &path)?);
        let manifest = manifest_path(&path);
        write_manifest(&cfg, &manifest)?;
        written.push(manifest);
    }
    Ok(written)
}
