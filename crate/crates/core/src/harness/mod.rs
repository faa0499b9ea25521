//! Monte Carlo engine.
//!
//! One trial draws a network realization (placement, shadowing,
//! association, admission), builds the power-controlled environment of every
//! admitted uplink and applies the rate policies. Trials run on a worker
//! pool; results are reduced in trial order so output does not depend on
//! scheduling.

pub mod config;
pub mod output;
pub mod presets;
pub mod rng;

use rand::seq::index::sample;
use rayon::prelude::*;

pub use config::{ExperimentConfig, FadingMode, SweepAxis};

use crate::channel::ShadowField;
use crate::error::{Error, Result};
use crate::gains::{LinkEnvironment, PowerControlledNetwork};
use crate::policy::{apply_policies, evaluate_fixed_rate, evaluate_uplink, NetworkStats, Population};
use crate::topology::{generate_topology, Association, Topology};
use rng::Stage;

/// Row label used for rate sweeps, where every uplink runs the swept rate.
pub const FIXED_RATE_LABEL: &str = "FIXED";

/// One drawn network, before rate control.
#[derive(Debug, Clone)]
pub struct Realization {
    pub topology: Topology,
    pub shadow: ShadowField,
    pub association: Association,
    pub admitted: Vec<bool>,
    pub denied: Vec<usize>,
}

impl Realization {
    pub fn draw(config: &ExperimentConfig, trial: usize) -> Result<Self> {
        let params = config.topology_params();
        let topology = generate_topology(&params, &mut rng::stream(config.seed, trial, Stage::Topology))?;
        let shadow = ShadowField::draw(
            params.mobiles,
            params.base_stations,
            config.sigma_s_db,
            &mut rng::stream(config.seed, trial, Stage::Shadowing),
        );
        let association = topology.associate(&shadow, config.alpha)?;
        let (admitted, denied) = admission(&association, params.sector_count(), config.spreading_factor as usize);
        Ok(Realization {
            topology,
            shadow,
            association,
            admitted,
            denied,
        })
    }

    pub fn network<'a>(&'a self, config: &ExperimentConfig) -> PowerControlledNetwork<'a> {
        PowerControlledNetwork {
            topology: &self.topology,
            shadow: &self.shadow,
            association: &self.association,
            fading: config.fading_model(),
            spreading: config.spreading(),
            alpha: config.alpha,
            snr_db: config.snr_db,
            activity: config.activity,
            admitted: &self.admitted,
            pc_sigma_multiplier: config.pc_sigma_multiplier,
        }
    }

    pub fn environments(&self, config: &ExperimentConfig) -> Result<Vec<LinkEnvironment>> {
        self.network(config).all_environments()
    }

    pub fn population(&self, config: &ExperimentConfig) -> Population {
        Population {
            mobile_count: self.topology.mobile_count(),
            denied: self.denied.clone(),
            r_net: config.r_net,
        }
    }

    /// Mobiles served per sector.
    pub fn sector_loads(&self) -> Vec<usize> {
        let mut loads = vec![0; self.topology.params.sector_count()];
        for (i, j) in self.association.iter().enumerate() {
            if self.admitted[i] {
                loads[j.0] += 1;
            }
        }
        loads
    }
}

/// At most `cap` mobiles per sector; the highest-index mobiles of an
/// overloaded sector are denied.
pub fn admission(association: &Association, sectors: usize, cap: usize) -> (Vec<bool>, Vec<usize>) {
    let mut served = vec![0usize; sectors];
    let mut admitted = vec![false; association.len()];
    let mut denied = Vec::new();
    for (i, j) in association.iter().enumerate() {
        if served[j.0] < cap {
            served[j.0] += 1;
            admitted[i] = true;
        } else {
            denied.push(i);
        }
    }
    (admitted, denied)
}

/// Runs one trial at the config's own parameters (no sweep), returning
/// one `NetworkStats` per configured policy.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<Vec<NetworkStats>> {
    let inner = || -> Result<Vec<NetworkStats>> {
        let real = Realization::draw(config, trial)?;
        let envs = real.environments(config)?;
        apply_policies(
            &envs,
            &real.population(config),
            &config.policies,
            config.zeta,
            &config.rate_grid()?,
            config.denied_outage_convention,
        )
    };
    inner().map_err(|e| Error::Trial {
        trial,
        source: Box::new(e),
    })
}

/// Per-trial scalars kept for aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    pub mean_outage: f64,
    pub mean_throughput: f64,
    pub transmission_capacity: f64,
    /// Largest outage among non-denied uplinks with a positive rate.
    pub worst_active_outage: f64,
    pub denied: usize,
}

impl From<&NetworkStats> for TrialSummary {
    fn from(s: &NetworkStats) -> Self {
        TrialSummary {
            mean_outage: s.mean_outage,
            mean_throughput: s.mean_throughput,
            transmission_capacity: s.transmission_capacity,
            worst_active_outage: s
                .per_uplink
                .iter()
                .filter(|o| !o.denied && o.rate > 0.0)
                .map(|o| o.outage)
                .fold(0.0, f64::max),
            denied: s.per_uplink.iter().filter(|o| o.denied).count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// `None` for a single trial.
    pub std_error: Option<f64>,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std_error = (samples.len() > 1).then(|| {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        });
        Estimate { mean, std_error }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRow {
    pub label: String,
    pub outage: Estimate,
    pub throughput: Estimate,
    pub tau: Estimate,
    /// Per-trial values in trial order.
    pub trials: Vec<TrialSummary>,
}

impl PolicyRow {
    fn from_trials(label: String, trials: Vec<TrialSummary>) -> Self {
        let col = |f: fn(&TrialSummary) -> f64| Estimate::from_samples(&trials.iter().map(f).collect::<Vec<_>>());
        PolicyRow {
            label,
            outage: col(|t| t.mean_outage),
            throughput: col(|t| t.mean_throughput),
            tau: col(|t| t.transmission_capacity),
            trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// `None` when the experiment has no sweep.
    pub value: Option<f64>,
    pub rows: Vec<PolicyRow>,
}

impl SweepPoint {
    pub fn row(&self, label: &str) -> Option<&PolicyRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// One tracked uplink at one swept rate (trial 0 only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelSample {
    pub mobile: usize,
    pub rate: f64,
    pub outage: f64,
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub sweep_axis: Option<SweepAxis>,
    pub points: Vec<SweepPoint>,
    pub panel: Vec<PanelSample>,
    pub trials: usize,
    pub seed: u64,
}

impl AggregateResult {
    pub fn point(&self, value: f64) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.value.is_some_and(|v| (v - value).abs() < 1e-9))
    }
}

struct TrialOutput {
    /// `[point][row]`
    summaries: Vec<Vec<TrialSummary>>,
    panel: Vec<PanelSample>,
}

fn row_labels(config: &ExperimentConfig) -> Vec<String> {
    if config.sweep_axis == Some(SweepAxis::Rate) {
        vec![FIXED_RATE_LABEL.to_string()]
    } else {
        config.policies.iter().map(|p| p.label().to_string()).collect()
    }
}

fn rate_sweep_trial(config: &ExperimentConfig, rates: &[f64], trial: usize) -> Result<TrialOutput> {
    let real = Realization::draw(config, trial)?;
    let envs = real.environments(config)?;
    let population = real.population(config);
    let summaries = rates
        .iter()
        .map(|&r| {
            let stats = evaluate_fixed_rate(&envs, &population, r, config.denied_outage_convention)?;
            Ok(vec![TrialSummary::from(&stats)])
        })
        .collect::<Result<_>>()?;

    let mut panel = Vec::new();
    if trial == 0 && !envs.is_empty() && config.panel_size > 0 {
        let mut prng = rng::stream(config.seed, trial, Stage::Panel);
        let mut picks = sample(&mut prng, envs.len(), config.panel_size.min(envs.len())).into_vec();
        picks.sort_unstable();
        for u in picks {
            for &r in rates {
                let o = evaluate_uplink(&envs[u], r)?;
                panel.push(PanelSample {
                    mobile: o.mobile,
                    rate: r,
                    outage: o.outage,
                    throughput: o.throughput,
                });
            }
        }
    }
    Ok(TrialOutput { summaries, panel })
}

fn policy_sweep_trial(config: &ExperimentConfig, points: &[Option<f64>], trial: usize) -> Result<TrialOutput> {
    let summaries = points
        .iter()
        .map(|&v| {
            let cfg = v.map_or_else(|| config.clone(), |v| config.at_point(v));
            let real = Realization::draw(&cfg, trial)?;
            let envs = real.environments(&cfg)?;
            let stats = apply_policies(
                &envs,
                &real.population(&cfg),
                &cfg.policies,
                cfg.zeta,
                &cfg.rate_grid()?,
                cfg.denied_outage_convention,
            )?;
            Ok(stats.iter().map(TrialSummary::from).collect())
        })
        .collect::<Result<_>>()?;
    Ok(TrialOutput {
        summaries,
        panel: Vec::new(),
    })
}

/// Runs every trial at every sweep point on `workers` threads.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<AggregateResult> {
    config.validate()?;
    let sweep = config.sweep_points()?;
    let points: Vec<Option<f64>> = if sweep.is_empty() {
        vec![None]
    } else {
        sweep.iter().copied().map(Some).collect()
    };

    let one_trial = |trial: usize| -> Result<TrialOutput> {
        let out = if config.sweep_axis == Some(SweepAxis::Rate) {
            rate_sweep_trial(config, &sweep, trial)
        } else {
            policy_sweep_trial(config, &points, trial)
        };
        out.map_err(|e| Error::Trial {
            trial,
            source: Box::new(e),
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let outputs: Vec<TrialOutput> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(one_trial)
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()
    })?;

    let labels = row_labels(config);
    let points = points
        .iter()
        .enumerate()
        .map(|(p, &value)| SweepPoint {
            value,
            rows: labels
                .iter()
                .enumerate()
                .map(|(q, label)| {
                    PolicyRow::from_trials(label.clone(), outputs.iter().map(|o| o.summaries[p][q]).collect())
                })
                .collect(),
        })
        .collect();
    let panel = outputs.into_iter().next().map(|o| o.panel).unwrap_or_default();

    Ok(AggregateResult {
        sweep_axis: config.sweep_axis,
        points,
        panel,
        trials: config.trials,
        seed: config.seed,
    })
}

/// One run per series value (or a single run without a series).
pub fn run_series(
    config: &ExperimentConfig,
    workers: usize,
) -> Result<Vec<(Option<f64>, ExperimentConfig, AggregateResult)>> {
    config.validate()?;
    let mut base = config.clone();
    base.series_key = None;
    base.series_values.clear();
    match &config.series_key {
        None => Ok(vec![(None, base.clone(), run_experiment(&base, workers)?)]),
        Some(key) => config
            .series_values
            .iter()
            .map(|&v| {
                let cfg = base.with_number(key, v)?;
                let result = run_experiment(&cfg, workers)?;
                Ok((Some(v), cfg, result))
            })
            .collect(),
    }
}
