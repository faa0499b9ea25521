//! Rate control: the four network policies, throughput and transmission
//! capacity.
//!
//! A zero-rate mobile does not transmit, so its outage is taken as the
//! `R → 0⁺` limit of the outage curve, which is zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gains::LinkEnvironment;
use crate::outage::{outage_probability, rate_to_threshold, threshold_to_rate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    /// Common rate maximizing the mean throughput.
    #[serde(rename = "MTFR")]
    Mtfr,
    /// Largest common rate meeting a mean outage constraint.
    #[serde(rename = "OCFR")]
    Ocfr,
    /// Per-uplink rate maximizing its own throughput.
    #[serde(rename = "MTVR")]
    Mtvr,
    /// Per-uplink largest rate meeting the outage constraint.
    #[serde(rename = "OCVR")]
    Ocvr,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::Mtfr, PolicyKind::Ocfr, PolicyKind::Mtvr, PolicyKind::Ocvr];

    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Mtfr => "MTFR",
            PolicyKind::Ocfr => "OCFR",
            PolicyKind::Mtvr => "MTVR",
            PolicyKind::Ocvr => "OCVR",
        }
    }

    fn needs_curves(self) -> bool {
        !matches!(self, PolicyKind::Ocvr)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown policy {s:?}")))
    }
}

/// How denied mobiles enter the network mean outage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeniedOutage {
    #[default]
    Zero,
    One,
}

impl DeniedOutage {
    fn value(self) -> f64 {
        match self {
            DeniedOutage::Zero => 0.0,
            DeniedOutage::One => 1.0,
        }
    }
}

/// Candidate rates, strictly increasing and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGrid {
    rates: Vec<f64>,
}

impl RateGrid {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if !(rates[0] > 0.0) || rates.windows(2).any(|w| !(w[1] > w[0])) || rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::Config(
                "rate grid must be finite, positive and strictly increasing".into(),
            ));
        }
        Ok(RateGrid { rates })
    }

    /// `min, min+step, …` up to `max` inclusive. Values are rounded to
    /// 1e-9 so that decimal steps land on their nominal values.
    pub fn uniform(min: f64, max: f64, step: f64) -> Result<Self> {
        RateGrid::new(linspace_steps(min, max, step)?)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.rates[0]
    }

    pub fn max(&self) -> f64 {
        self.rates[self.rates.len() - 1]
    }
}

impl Default for RateGrid {
    fn default() -> Self {
        RateGrid::uniform(0.01, 10.0, 0.01).expect("default grid is valid")
    }
}

pub(crate) fn linspace_steps(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!("invalid range {start}..{stop} step {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub zeta: f64,
    pub grid: RateGrid,
    pub denied_outage: DeniedOutage,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, zeta: f64, grid: RateGrid) -> Self {
        PolicySpec {
            kind,
            zeta,
            grid,
            denied_outage: DeniedOutage::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UplinkOutcome {
    pub mobile: usize,
    pub rate: f64,
    pub outage: f64,
    pub throughput: f64,
    pub denied: bool,
}

impl UplinkOutcome {
    pub fn new(mobile: usize, rate: f64, outage: f64) -> Self {
        UplinkOutcome {
            mobile,
            rate,
            outage,
            throughput: rate * (1.0 - outage),
            denied: false,
        }
    }

    pub fn silent(mobile: usize) -> Self {
        UplinkOutcome::new(mobile, 0.0, 0.0)
    }

    pub fn denied(mobile: usize) -> Self {
        UplinkOutcome {
            denied: true,
            ..UplinkOutcome::silent(mobile)
        }
    }
}

/// The network-level context averages are taken over.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// All mobiles `M`, denied ones included.
    pub mobile_count: usize,
    pub denied: Vec<usize>,
    pub r_net: f64,
}

impl Population {
    pub fn density(&self) -> f64 {
        self.mobile_count as f64 / (std::f64::consts::PI * self.r_net * self.r_net)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStats {
    pub mean_outage: f64,
    pub mean_throughput: f64,
    pub transmission_capacity: f64,
    /// Ordered by mobile index; denied mobiles included.
    pub per_uplink: Vec<UplinkOutcome>,
}

impl NetworkStats {
    pub fn from_outcomes(
        mut per_uplink: Vec<UplinkOutcome>,
        population: &Population,
        denied_outage: DeniedOutage,
    ) -> Self {
        per_uplink.sort_by_key(|o| o.mobile);
        let m = population.mobile_count;
        let (mean_outage, mean_throughput) = if m == 0 {
            (0.0, 0.0)
        } else {
            let outage: f64 = per_uplink
                .iter()
                .map(|o| if o.denied { denied_outage.value() } else { o.outage })
                .sum();
            let thr: f64 = per_uplink.iter().map(|o| o.throughput).sum();
            (outage / m as f64, thr / m as f64)
        };
        NetworkStats {
            mean_outage,
            mean_throughput,
            transmission_capacity: transmission_capacity(mean_throughput, m, population.r_net),
            per_uplink,
        }
    }
}

/// `τ = M/(π r_net²) · E[T]`.
pub fn transmission_capacity(mean_throughput: f64, mobiles: usize, r_net: f64) -> f64 {
    mobiles as f64 / (std::f64::consts::PI * r_net * r_net) * mean_throughput
}

pub fn evaluate_uplink(env: &LinkEnvironment, rate: f64) -> Result<UplinkOutcome> {
    if !(rate > 0.0) {
        return Err(Error::Domain(format!("rate must be positive, got {rate}")));
    }
    let eps = outage_probability(env, rate_to_threshold(rate))?;
    Ok(UplinkOutcome::new(env.reference_mobile, rate, eps))
}

/// Every admitted uplink at one common rate.
pub fn evaluate_fixed_rate(
    envs: &[LinkEnvironment],
    population: &Population,
    rate: f64,
    denied_outage: DeniedOutage,
) -> Result<NetworkStats> {
    let mut outcomes = envs
        .iter()
        .map(|e| evaluate_uplink(e, rate))
        .collect::<Result<Vec<_>>>()?;
    outcomes.extend(population.denied.iter().map(|&i| UplinkOutcome::denied(i)));
    Ok(NetworkStats::from_outcomes(outcomes, population, denied_outage))
}

/// Outage of every admitted uplink at every grid rate.
#[derive(Debug, Clone)]
pub struct OutageCurves {
    /// `curves[u][k]` is uplink `u`'s outage at `grid[k]`.
    curves: Vec<Vec<f64>>,
}

impl OutageCurves {
    pub fn compute(envs: &[LinkEnvironment], grid: &RateGrid) -> Result<Self> {
        let thresholds: Vec<f64> = grid.rates().iter().map(|&r| rate_to_threshold(r)).collect();
        let curves = envs
            .iter()
            .map(|env| {
                let mut curve = Vec::with_capacity(thresholds.len());
                for &beta in &thresholds {
                    let eps = outage_probability(env, beta)?;
                    curve.push(eps);
                    // outage is nondecreasing in the threshold
                    if eps >= 1.0 {
                        curve.resize(thresholds.len(), 1.0);
                        break;
                    }
                }
                Ok(curve)
            })
            .collect::<Result<_>>()?;
        Ok(OutageCurves { curves })
    }

    pub fn curve(&self, uplink: usize) -> &[f64] {
        &self.curves[uplink]
    }
}

/// Applies one policy to the admitted uplinks of a realization.
pub fn apply_policy(envs: &[LinkEnvironment], population: &Population, spec: &PolicySpec) -> Result<NetworkStats> {
    let curves = if spec.kind.needs_curves() {
        Some(OutageCurves::compute(envs, &spec.grid)?)
    } else {
        None
    };
    apply_with_curves(envs, population, spec, curves.as_ref())
}

/// Applies several policies, sharing one set of outage curves.
pub fn apply_policies(
    envs: &[LinkEnvironment],
    population: &Population,
    kinds: &[PolicyKind],
    zeta: f64,
    grid: &RateGrid,
    denied_outage: DeniedOutage,
) -> Result<Vec<NetworkStats>> {
    let curves = if kinds.iter().any(|k| k.needs_curves()) {
        Some(OutageCurves::compute(envs, grid)?)
    } else {
        None
    };
    kinds
        .iter()
        .map(|&kind| {
            let spec = PolicySpec {
                kind,
                zeta,
                grid: grid.clone(),
                denied_outage,
            };
            apply_with_curves(envs, population, &spec, curves.as_ref())
        })
        .collect()
}

fn apply_with_curves(
    envs: &[LinkEnvironment],
    population: &Population,
    spec: &PolicySpec,
    curves: Option<&OutageCurves>,
) -> Result<NetworkStats> {
    let rates = spec.grid.rates();
    let m = population.mobile_count.max(1) as f64;
    let denied_mass = population.denied.len() as f64 * spec.denied_outage.value();

    let mut outcomes: Vec<UplinkOutcome> = match spec.kind {
        PolicyKind::Mtfr => {
            let curves = curves.expect("curves computed");
            let best = (0..rates.len())
                .map(|k| {
                    let t: f64 = (0..envs.len()).map(|u| rates[k] * (1.0 - curves.curve(u)[k])).sum();
                    (k, t / m)
                })
                .fold(None, |best: Option<(usize, f64)>, (k, t)| match best {
                    Some((_, bt)) if bt >= t => best,
                    _ => Some((k, t)),
                });
            common_rate_outcomes(envs, curves, rates, best.map(|(k, _)| k))
        }
        PolicyKind::Ocfr => {
            let curves = curves.expect("curves computed");
            let feasible = (0..rates.len()).rev().find(|&k| {
                let e: f64 = (0..envs.len()).map(|u| curves.curve(u)[k]).sum::<f64>() + denied_mass;
                e / m <= spec.zeta
            });
            common_rate_outcomes(envs, curves, rates, feasible)
        }
        PolicyKind::Mtvr => {
            let curves = curves.expect("curves computed");
            envs.iter()
                .enumerate()
                .map(|(u, env)| {
                    let curve = curves.curve(u);
                    let (k, _) = rates.iter().zip(curve).map(|(r, e)| r * (1.0 - e)).enumerate().fold(
                        (0, f64::NEG_INFINITY),
                        |best, (k, t)| if t > best.1 { (k, t) } else { best },
                    );
                    UplinkOutcome::new(env.reference_mobile, rates[k], curve[k])
                })
                .collect()
        }
        PolicyKind::Ocvr => envs
            .iter()
            .map(|env| outage_constrained_rate(env, spec.zeta, spec.grid.min(), spec.grid.max()))
            .collect::<Result<_>>()?,
    };
    outcomes.extend(population.denied.iter().map(|&i| UplinkOutcome::denied(i)));
    Ok(NetworkStats::from_outcomes(outcomes, population, spec.denied_outage))
}

fn common_rate_outcomes(
    envs: &[LinkEnvironment],
    curves: &OutageCurves,
    rates: &[f64],
    chosen: Option<usize>,
) -> Vec<UplinkOutcome> {
    envs.iter()
        .enumerate()
        .map(|(u, env)| match chosen {
            Some(k) => UplinkOutcome::new(env.reference_mobile, rates[k], curves.curve(u)[k]),
            None => UplinkOutcome::silent(env.reference_mobile),
        })
        .collect()
}

pub const OCVR_OUTAGE_TOLERANCE: f64 = 1e-6;
pub const OCVR_BRACKET_WIDTH: f64 = 1e-9;
const OCVR_MAX_THRESHOLD: f64 = 1.152921504606847e18; // 2^60

/// Largest rate whose outage does not exceed `zeta`, by bisection on the
/// SINR threshold. Returns a silent outcome when even `min_rate` fails.
pub fn outage_constrained_rate(
    env: &LinkEnvironment,
    zeta: f64,
    min_rate: f64,
    start_rate: f64,
) -> Result<UplinkOutcome> {
    let eps = |beta: f64| outage_probability(env, beta);
    let mut lo = rate_to_threshold(min_rate);
    let mut eps_lo = eps(lo)?;
    if eps_lo > zeta {
        return Ok(UplinkOutcome::silent(env.reference_mobile));
    }
    let mut hi = rate_to_threshold(start_rate.max(min_rate));
    loop {
        let e = eps(hi)?;
        if e > zeta {
            break;
        }
        lo = hi;
        eps_lo = e;
        if hi >= OCVR_MAX_THRESHOLD {
            return Ok(UplinkOutcome::new(env.reference_mobile, threshold_to_rate(lo), eps_lo));
        }
        hi *= 2.0;
    }
    // invariant: eps(lo) <= zeta < eps(hi)
    while hi - lo > OCVR_BRACKET_WIDTH && zeta - eps_lo > OCVR_OUTAGE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = eps(mid)?;
        if e <= zeta {
            lo = mid;
            eps_lo = e;
        } else {
            hi = mid;
        }
    }
    Ok(UplinkOutcome::new(env.reference_mobile, threshold_to_rate(lo), eps_lo))
}
