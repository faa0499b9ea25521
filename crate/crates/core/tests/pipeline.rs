use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uplink_core::harness::output::{emit_csv, RESULT_HEADER};
use uplink_core::harness::presets::preset;
use uplink_core::{
    generate_topology, outage_probability, rate_to_threshold, run_experiment, run_trial, ExperimentConfig, PolicyKind,
    Realization, SweepAxis, Topology, TopologyParams,
};

#[test]
fn single_uplink_network_matches_closed_form() {
    let cfg = ExperimentConfig {
        base_stations: 1,
        load: 1.0,
        sigma_s_db: 0.0,
        activity: 1.0,
        trials: 1,
        policies: vec![PolicyKind::Mtfr],
        ..ExperimentConfig::default()
    };
    let stats = &run_trial(&cfg, 0).unwrap()[0];
    let real = Realization::draw(&cfg, 0).unwrap();
    let d = real.topology.distance(0, 0);
    let o = stats.per_uplink[0];
    let eps = 1.0 - (-rate_to_threshold(o.rate) * d.powi(3) / 10.0).exp();
    assert!((o.outage - eps).abs() < 1e-12);
    assert!((stats.mean_throughput - o.rate * (1.0 - eps)).abs() < 1e-12);
    let tau = stats.mean_throughput / (std::f64::consts::PI * 4.0);
    assert!((stats.transmission_capacity - tau).abs() < 1e-12);
}

#[test]
fn repeated_runs_are_identical() {
    let cfg = ExperimentConfig {
        base_stations: 10,
        trials: 3,
        sweep_axis: Some(SweepAxis::Load),
        sweep_values: vec![2.0, 6.0],
        ..ExperimentConfig::default()
    };
    assert_eq!(run_experiment(&cfg, 1).unwrap(), run_experiment(&cfg, 1).unwrap());
}

#[test]
fn outage_rises_with_rate_on_the_reference_network() {
    let cfg = preset("fig2")
        .unwrap()
        .with_overrides(&["trials=5", "sweep_range=[0.25, 4.0, 0.25]"])
        .unwrap();
    let r = run_experiment(&cfg, 1).unwrap();
    let eps: Vec<f64> = r.points.iter().map(|p| p.rows[0].outage.mean).collect();
    assert_eq!(eps.len(), 16);
    assert!(eps.windows(2).all(|w| w[0] < w[1]), "{eps:?}");
    assert_eq!(r.panel.len(), 8 * 16);
}

#[test]
fn environments_agree_with_direct_outage_evaluation() {
    let cfg = ExperimentConfig {
        base_stations: 12,
        ..ExperimentConfig::default()
    };
    let real = Realization::draw(&cfg, 4).unwrap();
    let envs = real.environments(&cfg).unwrap();
    let stats = run_trial(
        &ExperimentConfig {
            policies: vec![PolicyKind::Mtvr],
            ..cfg.clone()
        },
        4,
    )
    .unwrap();
    for (env, o) in envs.iter().zip(stats[0].per_uplink.iter().filter(|o| !o.denied)) {
        assert_eq!(env.reference_mobile, o.mobile);
        let eps = outage_probability(env, rate_to_threshold(o.rate)).unwrap();
        assert!((eps - o.outage).abs() < 1e-12);
    }
}

#[test]
fn topology_csv_interface() {
    let params = TopologyParams {
        base_stations: 6,
        mobiles: 30,
        ..TopologyParams::default()
    };
    let topo = generate_topology(&params, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut buf = Vec::new();
    topo.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("kind,index,x,y"));
    assert_eq!(text.lines().filter(|l| l.starts_with("bs,")).count(), 6);
    assert_eq!(Topology::read_csv(buf.as_slice(), params).unwrap(), topo);
}

#[test]
fn emitted_header_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        base_stations: 3,
        trials: 1,
        ..ExperimentConfig::default()
    };
    let path = dir.path().join("r.csv");
    emit_csv(&run_experiment(&cfg, 1).unwrap(), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "sweep_axis,sweep_value,policy,mean_outage,se_outage,mean_throughput,se_throughput,tau,se_tau,trials,seed"
    );
    assert_eq!(RESULT_HEADER.len(), 11);
}
