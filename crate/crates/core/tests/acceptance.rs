//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints its PASS/FAIL line; exits non-zero on any FAIL.

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uplink_core::harness::presets::{preset, run_figure};
use uplink_core::harness::{run_experiment, AggregateResult, PolicyRow, SweepAxis};
use uplink_core::outage::h_terms;
use uplink_core::{
    outage_probability, outage_probability_oracle, ExperimentConfig, Interferer, LinkEnvironment, PolicyKind,
};

const ZETA: f64 = 0.1;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn random_env(rng: &mut ChaCha8Rng, max_interferers: usize, reference_m: u32) -> (LinkEnvironment, f64) {
    let snr_db: f64 = if rng.random_bool(0.5) { 3.0 } else { 10.0 };
    let n = rng.random_range(1..=max_interferers);
    let interferers = (0..n)
        .map(|k| Interferer {
            mobile: k + 1,
            omega: 10f64.powf(rng.random_range(-3.0..=1.0)),
            m: rng.random_range(1..=3),
            p: if rng.random_bool(0.5) { 0.5 } else { 1.0 },
        })
        .collect();
    let env = LinkEnvironment::synthetic(1.0, reference_m, 10f64.powf(snr_db / 10.0), interferers);
    (env, rng.random_range(0.1..=10.0))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut agreed = 0;
    for case in 0..100u64 {
        let m0 = rng.random_range(1..=3);
        let (env, beta) = random_env(&mut rng, 5, m0);
        let closed = outage_probability(&env, beta).unwrap();
        let mut sim = ChaCha8Rng::seed_from_u64(7);
        sim.set_stream(case);
        let est = outage_probability_oracle(&env, beta, 1_000_000, &mut sim).unwrap();
        if est.agrees_with(closed, 4.0) {
            agreed += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        agreed >= 95 && secs <= 300.0,
        format!("{agreed}/100 within 4 SE at 1e6 draws, {secs:.1} s"),
    )
}

fn analytic_cases() -> Outcome {
    let lone = LinkEnvironment::synthetic(1.0, 1, 10.0, vec![]);
    let eps = outage_probability(&lone, 1.0).unwrap();
    let err = (eps - (1.0 - (-0.1f64).exp())).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut exact = true;
    for _ in 0..200 {
        let m0 = rng.random_range(1..=3);
        let (mut env, beta) = random_env(&mut rng, 5, m0);
        let alone = LinkEnvironment::synthetic(env.omega_ref, m0, env.snr, vec![]);
        for itf in &mut env.interferers {
            itf.p = 0.0;
        }
        exact &= outage_probability(&env, beta).unwrap() == outage_probability(&alone, beta).unwrap();
    }
    outcome(
        err <= 1e-12 && exact,
        format!("Rayleigh lone-link error {err:e}; silent interferers reproduce the lone link exactly: {exact}"),
    )
}

/// Sum over every composition of `t`, built from first principles.
fn h_enumerated(env: &LinkEnvironment, beta: f64, t: usize) -> f64 {
    let b0 = beta * env.reference_m as f64 / env.omega_ref;
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let g = |itf: &Interferer, l: u32| -> f64 {
        let m = itf.m as f64;
        let psi = 1.0 / (b0 * itf.omega / m + 1.0);
        if l == 0 {
            1.0 - itf.p * (1.0 - psi.powf(m))
        } else {
            itf.p * fact(l + itf.m - 1) / (fact(l) * fact(itf.m - 1))
                * (itf.omega / m).powi(l as i32)
                * psi.powf(m + l as f64)
        }
    };
    let n = env.interferers.len();
    let mut total = 0.0;
    let mut orders = vec![0u32; n];
    loop {
        if orders.iter().sum::<u32>() as usize == t {
            total += env
                .interferers
                .iter()
                .zip(&orders)
                .map(|(itf, &l)| g(itf, l))
                .product::<f64>();
        }
        let mut k = 0;
        loop {
            if k == n {
                return total;
            }
            orders[k] += 1;
            if orders[k] as usize <= t {
                break;
            }
            orders[k] = 0;
            k += 1;
        }
    }
}

fn h_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (mut env, beta) = random_env(&mut rng, 4, 3);
        for itf in &mut env.interferers {
            itf.p = rng.random_range(0.0..=1.0);
        }
        let h = h_terms(&env, beta).unwrap();
        assert_eq!(h.len(), 3);
        for (t, &ht) in h.iter().enumerate() {
            worst = worst.max((ht - h_enumerated(&env, beta, t)).abs());
        }
    }
    outcome(worst <= 1e-12, format!("1000 tuples, max |H_t difference| {worst:e}"))
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for pair in 0..10_000 {
        let m0 = rng.random_range(1..=3);
        let (env, beta) = random_env(&mut rng, 5, m0);
        let base = outage_probability(&env, beta).unwrap();
        let bump = rng.random_range(1.01..3.0);
        let mut alt = env.clone();
        let mut alt_beta = beta;
        // sign: +1 when ε should not decrease, −1 when it should not increase
        let sign = match pair % 5 {
            0 => {
                alt_beta *= bump;
                1.0
            }
            1 => {
                let k = rng.random_range(0..alt.interferers.len());
                alt.interferers[k].omega *= bump;
                1.0
            }
            2 => {
                let k = rng.random_range(0..alt.interferers.len());
                alt.interferers[k].p = rng.random_range(alt.interferers[k].p..=1.0);
                1.0
            }
            3 => {
                alt.snr *= bump;
                -1.0
            }
            _ => {
                alt.omega_ref *= bump;
                -1.0
            }
        };
        let moved = sign * (outage_probability(&alt, alt_beta).unwrap() - base);
        if moved < -1e-12 {
            violations += 1;
            worst = worst.max(-moved);
        }
    }
    outcome(
        violations == 0,
        format!("10000 pairs, {violations} violations (worst {worst:e})"),
    )
}

fn fixed_rate_curve() -> AggregateResult {
    run_experiment(&preset("fig2").unwrap(), 1).unwrap()
}

fn curve_value(result: &AggregateResult, rate: f64) -> &PolicyRow {
    &result.point(rate).unwrap().rows[0]
}

fn average_outage_at_reference_rate(curve: &AggregateResult) -> Outcome {
    let row = curve_value(curve, 0.84);
    let eps = row.outage.mean;
    outcome(
        (eps - 0.10).abs() <= 0.02,
        format!(
            "E[eps] at R=0.84 is {eps:.4} (SE {:.4}), target 0.10 +/- 0.02, {} trials",
            row.outage.std_error.unwrap(),
            row.trials.len()
        ),
    )
}

fn throughput_maximizer(curve: &AggregateResult) -> Outcome {
    let best = curve
        .points
        .iter()
        .max_by(|a, b| a.rows[0].throughput.mean.total_cmp(&b.rows[0].throughput.mean))
        .unwrap();
    let rate = best.value.unwrap();
    let eps = best.rows[0].outage.mean;
    outcome(
        (rate - 1.81).abs() <= 0.15 && (eps - 0.37).abs() <= 0.05,
        format!(
            "argmax E[T] at R={rate:.2} (target 1.81 +/- 0.15), E[eps] there {eps:.4} (target 0.37 +/- 0.05), E[T]={:.4}",
            best.rows[0].throughput.mean
        ),
    )
}

fn policy_config(trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        zeta: ZETA,
        sigma_s_db: 8.0,
        trials,
        seed: 3,
        ..ExperimentConfig::default()
    }
}

const POLICY_TRIALS: usize = 100;

fn load_runs() -> BTreeMap<u32, AggregateResult> {
    [4u32, 8, 16]
        .into_iter()
        .map(|load| {
            let cfg = ExperimentConfig {
                load: load as f64,
                ..policy_config(POLICY_TRIALS)
            };
            (load, run_experiment(&cfg, 1).unwrap())
        })
        .collect()
}

fn combined_se(a: &PolicyRow, b: &PolicyRow) -> f64 {
    let (x, y) = (a.tau.std_error.unwrap(), b.tau.std_error.unwrap());
    (x * x + y * y).sqrt()
}

fn policy_ordering(runs: &BTreeMap<u32, AggregateResult>) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (load, r) in runs {
        let p = &r.points[0];
        let (ocvr, ocfr) = (p.row("OCVR").unwrap(), p.row("OCFR").unwrap());
        let (mtvr, mtfr) = (p.row("MTVR").unwrap(), p.row("MTFR").unwrap());
        let gap = ocvr.tau.mean - ocfr.tau.mean;
        let se = combined_se(ocvr, ocfr);
        let dominated = mtvr
            .trials
            .iter()
            .zip(&mtfr.trials)
            .filter(|(v, f)| v.transmission_capacity < f.transmission_capacity * (1.0 - 1e-12))
            .count();
        ok &= gap > 2.0 * se && dominated == 0;
        notes.push(format!(
            "M/C={load}: tau OCVR {:.3} vs OCFR {:.3} (gap {:.1} SE), MTVR<MTFR in {dominated} trials",
            ocvr.tau.mean,
            ocfr.tau.mean,
            gap / se
        ));
    }
    outcome(ok, notes.join("; "))
}

fn per_uplink_guarantee(runs: &BTreeMap<u32, AggregateResult>) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for r in runs.values() {
        let row = r.points[0].row("OCVR").unwrap();
        for t in &row.trials {
            worst = worst.max(t.worst_active_outage);
            trials += 1;
        }
    }
    outcome(
        worst <= ZETA + 1e-6,
        format!("{trials} trials, largest OCVR outage among transmitting uplinks {worst:.9}"),
    )
}

fn spreading_trend() -> Outcome {
    let cfg = ExperimentConfig {
        load: 8.0,
        sweep_axis: Some(SweepAxis::SpreadingFactor),
        sweep_values: vec![8.0, 16.0, 32.0, 64.0],
        ..policy_config(POLICY_TRIALS)
    };
    let r = run_experiment(&cfg, 1).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for kind in PolicyKind::ALL {
        let rows: Vec<&PolicyRow> = r.points.iter().map(|p| p.row(kind.label()).unwrap()).collect();
        let steps_ok = rows
            .windows(2)
            .all(|w| w[1].tau.mean - w[0].tau.mean >= -2.0 * combined_se(w[0], w[1]));
        let strict = rows[3].tau.mean > rows[0].tau.mean;
        ok &= steps_ok && strict;
        let taus: Vec<String> = rows.iter().map(|r| format!("{:.2}", r.tau.mean)).collect();
        notes.push(format!("{kind} [{}]", taus.join(", ")));
    }
    outcome(ok, format!("tau for G = 8/16/32/64: {}", notes.join("; ")))
}

fn deterministic_figure() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let overrides = ["trials=4"];
    let fa = run_figure("fig4", a.path(), &overrides, 1).unwrap();
    let fb = run_figure("fig4", b.path(), &overrides, 4).unwrap();
    let mut same = fa.len() == fb.len();
    for (x, y) in fa.iter().zip(&fb) {
        same &= x.file_name() == y.file_name() && fs::read(x).unwrap() == fs::read(y).unwrap();
    }
    outcome(same, format!("{} files compared, 1 vs 4 workers, 4 trials", fa.len()))
}

fn relative_range(rows: &[&PolicyRow]) -> f64 {
    let taus: Vec<f64> = rows.iter().map(|r| r.tau.mean).collect();
    let max = taus.iter().copied().fold(f64::MIN, f64::max);
    let min = taus.iter().copied().fold(f64::MAX, f64::min);
    let mean = taus.iter().sum::<f64>() / taus.len() as f64;
    (max - min) / mean
}

fn exclusion_sensitivity() -> Outcome {
    let base = preset("fig6").unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in base.series_values.clone() {
        let mut cfg = base.with_number("alpha", alpha).unwrap();
        cfg.series_key = None;
        cfg.series_values.clear();
        cfg.trials = 40;
        let r = run_experiment(&cfg, 1).unwrap();
        let range = |label: &str| relative_range(&r.points.iter().map(|p| p.row(label).unwrap()).collect::<Vec<_>>());
        let constrained = range("OCFR").min(range("OCVR"));
        let maximal = range("MTFR").max(range("MTVR"));
        ok &= constrained > maximal;
        notes.push(format!(
            "alpha={alpha}: relative range OCFR {:.3} OCVR {:.3} MTFR {:.3} MTVR {:.3}",
            range("OCFR"),
            range("OCVR"),
            range("MTFR"),
            range("MTVR")
        ));
    }
    outcome(ok, notes.join("; "))
}

fn main() {
    let mut failures = 0;
    let mut report = |name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        if !o.passed {
            failures += 1;
        }
        println!(
            "{name} {}: {} [{:.1} s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    };

    report("A1", &oracle_equivalence);
    report("A2", &analytic_cases);
    report("A3", &h_correctness);
    let t = Instant::now();
    let curve = fixed_rate_curve();
    println!(
        "(rate sweep: {} trials in {:.1} s)",
        curve.trials,
        t.elapsed().as_secs_f64()
    );
    report("A4", &|| average_outage_at_reference_rate(&curve));
    report("A5", &|| throughput_maximizer(&curve));
    let t = Instant::now();
    let runs = load_runs();
    println!(
        "(load runs: {POLICY_TRIALS} trials per load in {:.1} s)",
        t.elapsed().as_secs_f64()
    );
    report("A6", &|| policy_ordering(&runs));
    report("A7", &spreading_trend);
    report("A8", &|| per_uplink_guarantee(&runs));
    report("A9", &monotonicity);
    report("A10", &deterministic_figure);
    report("F6", &exclusion_sensitivity);

    if failures > 0 {
        println!("acceptance: {failures} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
