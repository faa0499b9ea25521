//! Self-checks of the outage evaluator: closed form against a fading
//! simulation, analytic special cases, and the polynomial `H_t` against
//! direct enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::gains::{Interferer, LinkEnvironment};
use crate::outage::{beta0, g_factor, h_terms, outage_probability, outage_probability_oracle, psi};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Oracle case distribution: 1–5 interferers, `m ∈ {1,2,3}`, `p ∈ {½, 1}`,
/// `Ω` log-uniform on `[1e-3, 10]`, `Γ ∈ {3, 10}` dB, `β ∈ [0.1, 10]`.
pub fn random_case<R: Rng + ?Sized>(rng: &mut R) -> (LinkEnvironment, f64) {
    let snr_db = if rng.random_bool(0.5) { 3.0 } else { 10.0 };
    let n = rng.random_range(1..=5);
    let interferers = (0..n)
        .map(|k| Interferer {
            mobile: k + 1,
            omega: 10f64.powf(rng.random_range(-3.0..=1.0)),
            m: rng.random_range(1..=3),
            p: if rng.random_bool(0.5) { 0.5 } else { 1.0 },
        })
        .collect();
    let env = LinkEnvironment::synthetic(1.0, rng.random_range(1..=3), 10f64.powf(snr_db / 10.0), interferers);
    (env, rng.random_range(0.1..=10.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub env: LinkEnvironment,
    pub beta: f64,
    pub closed_form: f64,
    pub simulated: f64,
    pub agrees: bool,
}

/// Runs `cases` random environments, each against `draws` simulated
/// fading draws; a case agrees when within `k` binomial standard errors.
pub fn oracle_cases(cases: usize, draws: u64, k: f64, seed: u64) -> Result<Vec<OracleCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let setups: Vec<_> = (0..cases).map(|_| random_case(&mut rng)).collect();
    setups
        .into_par_iter()
        .enumerate()
        .map(|(i, (env, beta))| {
            let mut sim_rng = ChaCha8Rng::seed_from_u64(seed);
            sim_rng.set_stream(i as u64 + 1);
            let closed_form = outage_probability(&env, beta)?;
            let est = outage_probability_oracle(&env, beta, draws, &mut sim_rng)?;
            Ok(OracleCase {
                agrees: est.agrees_with(closed_form, k),
                simulated: est.probability,
                env,
                beta,
                closed_form,
            })
        })
        .collect()
}

/// `H_t` summed over every composition of `t` into per-interferer orders.
pub fn h_by_enumeration(env: &LinkEnvironment, beta: f64, t: u32) -> f64 {
    let b0 = beta0(env, beta);
    let factors: Vec<Vec<f64>> = env
        .interferers
        .iter()
        .map(|itf| {
            let ps = psi(b0, itf.omega, itf.m);
            (0..=t).map(|l| g_factor(l, ps, itf.omega, itf.m, itf.p)).collect()
        })
        .collect();
    fn walk(factors: &[Vec<f64>], left: u32) -> f64 {
        match factors.split_first() {
            None => {
                if left == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Some((g, rest)) => (0..=left).map(|l| g[l as usize] * walk(rest, left - l)).sum(),
        }
    }
    walk(&factors, t)
}

fn analytic_checks() -> Result<Vec<CheckResult>> {
    let lone = LinkEnvironment::synthetic(1.0, 1, 10.0, vec![]);
    let eps = outage_probability(&lone, 1.0)?;
    let want = 1.0 - (-0.1f64).exp();
    let mut out = vec![CheckResult::new(
        "rayleigh, no interference",
        (eps - want).abs() <= 1e-12,
        format!("{eps:.15} vs {want:.15}"),
    )];

    let mut worst: f64 = 0.0;
    for m0 in 1..=3 {
        for beta in [0.3, 1.0, 4.0] {
            let silent = LinkEnvironment::synthetic(
                0.7,
                m0,
                4.0,
                (0..3)
                    .map(|k| Interferer {
                        mobile: k + 1,
                        omega: 0.5 + k as f64,
                        m: 2,
                        p: 0.0,
                    })
                    .collect(),
            );
            let alone = LinkEnvironment::synthetic(0.7, m0, 4.0, vec![]);
            worst = worst.max((outage_probability(&silent, beta)? - outage_probability(&alone, beta)?).abs());
        }
    }
    out.push(CheckResult::new(
        "silent interferers",
        worst == 0.0,
        format!("max deviation {worst:e}"),
    ));
    Ok(out)
}

fn enumeration_check(tuples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..tuples {
        let n = rng.random_range(1..=4);
        let m0 = rng.random_range(1..=3);
        let interferers = (0..n)
            .map(|k| Interferer {
                mobile: k + 1,
                omega: 10f64.powf(rng.random_range(-2.0..=1.0)),
                m: rng.random_range(1..=3),
                p: rng.random_range(0.0..=1.0),
            })
            .collect();
        let env = LinkEnvironment::synthetic(1.0, m0, 10.0, interferers);
        let beta = rng.random_range(0.1..=10.0);
        let h = h_terms(&env, beta)?;
        for (t, &ht) in h.iter().enumerate().take(3) {
            worst = worst.max((ht - h_by_enumeration(&env, beta, t as u32)).abs());
        }
    }
    Ok(CheckResult::new(
        "H_t convolution vs enumeration",
        worst <= 1e-12,
        format!("{tuples} tuples, max deviation {worst:e}"),
    ))
}

/// Every self-check, in display order.
pub fn run_all(cases: usize, draws: u64, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = analytic_checks()?;
    out.push(enumeration_check(1000, seed)?);
    let oracle = oracle_cases(cases, draws, 4.0, seed)?;
    let agreed = oracle.iter().filter(|c| c.agrees).count();
    out.push(CheckResult::new(
        "closed form vs fading simulation",
        agreed * 100 >= 95 * cases,
        format!("{agreed}/{cases} within 4 standard errors at {draws} draws"),
    ));
    Ok(out)
}
