use std::io::BufReader;

use biasnet_core::coevolution::run_coevolution_from;
use biasnet_core::engine::{AgentState, DynamicsConfig, Simulation};
use biasnet_core::exec::Execution;
use biasnet_core::experiment::{parse_config, render_ppm, run_sweep, SweepSpec, TopologySpec};
use biasnet_core::game::{pd_matrix, Strategy};
use biasnet_core::observables::{selection_snapshot, SampleSchedule, SelectionSnapshot};
use biasnet_core::rng::rng_from_seed;
use biasnet_core::topology::{
    build_barabasi_albert, build_complete, build_erdos_renyi, build_lattice, build_regular_random, read_edge_list,
    validate, write_edge_list, Neighbourhood, Network,
};
use proptest::prelude::*;

fn round_trip(net: &Network) -> Network {
    let mut buf = Vec::new();
    write_edge_list(net, &mut buf).unwrap();
    read_edge_list(BufReader::new(buf.as_slice())).unwrap()
}

#[test]
fn every_generator_survives_an_edge_list_round_trip() {
    let nets = [
        build_lattice(7, Neighbourhood::Moore8).unwrap(),
        build_regular_random(50, 3, 1).unwrap(),
        build_erdos_renyi(80, 3.0, 2).unwrap(),
        build_barabasi_albert(90, 2, 3).unwrap(),
        build_complete(9).unwrap(),
    ];
    for net in &nets {
        let back = round_trip(net);
        assert!(validate(&back).passed());
        assert_eq!(back.node_count(), net.node_count());
        let sorted = |n: &Network| {
            let mut e: Vec<_> = n.edges().collect();
            e.sort_unstable();
            e
        };
        assert_eq!(sorted(&back), sorted(net));
    }
}

#[test]
fn phase_trend_is_non_increasing_in_r() {
    let mut spec = SweepSpec::new(
        TopologySpec::Lattice {
            side: 30,
            neighbourhood: Neighbourhood::VonNeumann4,
        },
        vec![0.01, 0.05, 0.1, 0.2, 0.3],
        vec![0.0, -1000.0],
    );
    spec.burn_in = 500;
    spec.measure = 200;
    spec.replicates = 4;
    spec.master_seed = 5;
    let result = run_sweep(&spec, Execution::Parallel).unwrap();
    for wi in 0..2 {
        for ri in 0..4 {
            let (a, b) = (result.point(ri, wi), result.point(ri + 1, wi));
            let tol = 2.0 * (a.stderr_fc.powi(2) + b.stderr_fc.powi(2)).sqrt();
            assert!(b.mean_fc <= a.mean_fc + tol, "w={} r={}->{}", a.w, a.r, b.r);
        }
    }
    for p in &result.points {
        let runs = result.runs_at(p.ri, p.wi);
        let mean = runs.iter().map(|r| r.result.mean_fc).sum::<f64>() / runs.len() as f64;
        assert!((mean - p.mean_fc).abs() < 1e-12);
    }
}

#[test]
fn strong_bias_snapshot_favours_cooperator_links() {
    let net = build_lattice(20, Neighbourhood::VonNeumann4).unwrap();
    let cfg = DynamicsConfig {
        w: -1000.0,
        ..Default::default()
    };
    let game = pd_matrix(0.1).unwrap();
    // Seed a cooperator block so that boundaries persist on a small lattice.
    let mut state = AgentState::uniform(400, Strategy::Defect);
    for i in 5..15 {
        for j in 5..15 {
            state.strategies[i * 20 + j] = Strategy::Cooperate;
        }
    }
    let mut sim = Simulation::new(&net, game, cfg, state, rng_from_seed(4)).unwrap();
    let mut snapshot = None;
    for _ in 0..60 {
        sim.step().unwrap();
        let s = selection_snapshot(sim.state(), &net, &cfg, sim.generation()).unwrap();
        if s.boundary_contrast().is_some() {
            snapshot = Some(s);
        }
    }
    let snapshot = snapshot.expect("no mixed state observed");
    let (cc, cd) = snapshot.boundary_contrast().unwrap();
    assert!(cc > cd, "C->C {cc} vs C->D {cd}");
    for sum in snapshot.row_sums() {
        assert!((sum - 1.0).abs() < 1e-12);
    }
    let img = render_ppm(&snapshot).unwrap();
    assert!(img.len() > 20 * 20 * 3);

    let mut text = Vec::new();
    snapshot.write_text(&mut text).unwrap();
    let back = SelectionSnapshot::read_text(BufReader::new(text.as_slice()), Some(20)).unwrap();
    assert_eq!(back.strategies, snapshot.strategies);
    assert_eq!(back.edges.len(), snapshot.edges.len());
}

#[test]
fn homogeneous_coevolution_start_is_constant_without_mutation() {
    let net = build_lattice(10, Neighbourhood::VonNeumann4).unwrap();
    let cfg = DynamicsConfig {
        coevolution: true,
        ..Default::default()
    };
    let mut state = AgentState::uniform(100, Strategy::Cooperate);
    state.preferences = Some(vec![-1.0; 100]);
    let series = run_coevolution_from(
        &net,
        pd_matrix(0.02).unwrap(),
        cfg,
        state,
        200,
        &SampleSchedule::every(10),
        20,
        rng_from_seed(1),
    )
    .unwrap();
    for s in &series {
        assert_eq!(s.fc, 1.0);
        let p = s.preferences.as_ref().unwrap();
        assert_eq!((p.mean_w, p.var_w), (-1.0, 0.0));
        assert_eq!(p.histogram.iter().sum::<u64>(), 100);
    }
}

#[test]
fn config_text_drives_a_sweep() {
    let text = r#"
[topology]
kind = "er"
n = 200
mean_degree = 4

[sweep]
r_values = [0.05]
w_values = ["-inf", 0]
burn_in = 20
measure = 10
replicates = 2
master_seed = 3
"#;
    let spec = parse_config(text).unwrap();
    let a = run_sweep(&spec, Execution::Sequential).unwrap();
    let b = run_sweep(&spec, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.runs.len(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snapshots_are_row_stochastic(seed in 0u64..1000, w in prop_oneof![-50.0..50.0, Just(f64::INFINITY), Just(f64::NEG_INFINITY)]) {
        let net = build_barabasi_albert(60, 2, seed).unwrap();
        let cfg = DynamicsConfig { w, ..Default::default() };
        let mut sim = Simulation::with_random_population(&net, pd_matrix(0.2).unwrap(), cfg, rng_from_seed(seed)).unwrap();
        for _ in 0..3 {
            sim.step().unwrap();
        }
        let snap = selection_snapshot(sim.state(), &net, &cfg, 3).unwrap();
        for sum in snap.row_sums() {
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
