use crate::coevolution::DEFAULT_BINS;
use crate::engine::Simulation;
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::observables::{
    measure_simulation, record_timeseries, selection_snapshot, RunResult, SampleSchedule, SelectionSnapshot, TimeSample,
};
use crate::rng::{derive_seed, rng_from_seed, tag};
use crate::topology::Network;

use super::SweepSpec;

/// Cooperator fraction at or below which a population counts as extinct.
pub const EXTINCTION_THRESHOLD: f64 = 0.005;

/// Seed of the run at grid point `(ri, wi)`, replicate `rep`.
pub fn run_seed(master: u64, ri: usize, wi: usize, rep: usize) -> u64 {
    derive_seed(master, &[tag::RUN, ri as u64, wi as u64, rep as u64])
}

/// Seed of the network realization used by replicate `rep`.
pub fn network_seed(master: u64, rep: usize) -> u64 {
    derive_seed(master, &[tag::NETWORK, rep as u64])
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub ri: usize,
    pub wi: usize,
    pub replicate: usize,
    pub r: f64,
    pub w: f64,
    pub result: RunResult,
}

/// Replicate aggregate at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSummary {
    pub ri: usize,
    pub wi: usize,
    pub r: f64,
    pub w: f64,
    pub mean_fc: f64,
    /// Sample variance of the replicate means (0 for a single replicate).
    pub var_fc: f64,
    pub stderr_fc: f64,
    pub replicates: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RcEstimate {
    Within(f64),
    /// Cooperators survive at every swept r.
    AboveRange,
    /// Cooperators are extinct at every swept r.
    BelowRange,
}

impl RcEstimate {
    pub fn value(self) -> Option<f64> {
        match self {
            RcEstimate::Within(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub wi: usize,
    pub w: f64,
    /// From the replicate-averaged curve.
    pub estimate: RcEstimate,
    pub replicate_estimates: Vec<RcEstimate>,
    /// Standard error over the in-range replicate estimates.
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRecord {
    pub ri: usize,
    pub wi: usize,
    pub r: f64,
    pub w: f64,
    pub snapshot: SelectionSnapshot,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Ordered by r index, then w index, then replicate.
    pub runs: Vec<RunRecord>,
    /// Ordered by r index, then w index.
    pub points: Vec<PointSummary>,
    /// One per w value, in input order.
    pub critical: Vec<CriticalPoint>,
}

impl SweepResult {
    pub fn point(&self, ri: usize, wi: usize) -> &PointSummary {
        &self.points[ri * self.spec.w_values.len() + wi]
    }

    pub fn runs_at(&self, ri: usize, wi: usize) -> &[RunRecord] {
        let reps = self.spec.replicates;
        let start = (ri * self.spec.w_values.len() + wi) * reps;
        &self.runs[start..start + reps]
    }
}

/// Critical r from a curve of cooperator fractions: the largest r whose
/// fraction exceeds [`EXTINCTION_THRESHOLD`], linearly interpolated towards
/// the next grid point.
pub fn estimate_rc(r_values: &[f64], fc: &[f64]) -> RcEstimate {
    let mut pts: Vec<(f64, f64)> = r_values.iter().copied().zip(fc.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let Some(i) = pts.iter().rposition(|&(_, f)| f > EXTINCTION_THRESHOLD) else {
        return RcEstimate::BelowRange;
    };
    if i + 1 == pts.len() {
        return RcEstimate::AboveRange;
    }
    let (r0, f0) = pts[i];
    let (r1, f1) = pts[i + 1];
    RcEstimate::Within(r0 + (f0 - EXTINCTION_THRESHOLD) / (f0 - f1) * (r1 - r0))
}

fn location(spec: &SweepSpec, ri: usize, wi: usize, rep: usize) -> String {
    format!(
        "sweep point r={} w={} replicate {rep}",
        spec.r_values[ri], spec.w_values[wi]
    )
}

/// One realization per replicate for random families, one shared otherwise.
fn build_networks(spec: &SweepSpec, exec: Execution) -> Result<Vec<Network>> {
    if !spec.topology.is_random() {
        return Ok(vec![spec.topology.build(0)?]);
    }
    let reps: Vec<usize> = (0..spec.replicates).collect();
    map_ordered(&reps, exec, |&rep| {
        spec.topology
            .build(network_seed(spec.master_seed, rep))
            .map_err(|e| Error::at(format!("network realization for replicate {rep}"), e))
    })
    .into_iter()
    .collect()
}

fn network_for(networks: &[Network], rep: usize) -> &Network {
    &networks[rep.min(networks.len() - 1)]
}

/// Runs every (r, w, replicate) combination and aggregates.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    run_sweep_observed(spec, exec, None).map(|(result, _)| result)
}

/// Like [`run_sweep`], also taking a selection snapshot at generation
/// `snapshot_at` in replicate 0 of every grid point.
///
/// If the run finishes or absorbs earlier, it is continued (outside the
/// measurement) until that generation.
pub fn run_sweep_observed(
    spec: &SweepSpec,
    exec: Execution,
    snapshot_at: Option<u64>,
) -> Result<(SweepResult, Vec<SnapshotRecord>)> {
    spec.check().map_err(|(key, message)| Error::Config {
        key: key.into(),
        line: 0,
        message,
    })?;
    let networks = build_networks(spec, exec)?;
    let (nr, nw, reps) = (spec.r_values.len(), spec.w_values.len(), spec.replicates);
    let units: Vec<(usize, usize, usize)> = (0..nr)
        .flat_map(|ri| (0..nw).flat_map(move |wi| (0..reps).map(move |rep| (ri, wi, rep))))
        .collect();

    let outputs = map_ordered(&units, exec, |&(ri, wi, rep)| {
        let wrap = |e| Error::at(location(spec, ri, wi, rep), e);
        let (r, w) = (spec.r_values[ri], spec.w_values[wi]);
        let net = network_for(&networks, rep);
        let seed = run_seed(spec.master_seed, ri, wi, rep);
        let game = spec.matrix(r).map_err(wrap)?;
        let cfg = spec.dynamics(w);
        let mut sim = Simulation::with_random_population(net, game, cfg, rng_from_seed(seed)).map_err(wrap)?;
        let target = snapshot_at.filter(|_| rep == 0);
        let mut snapshot = None;
        if target == Some(0) {
            snapshot = Some(selection_snapshot(sim.state(), net, &cfg, 0).map_err(wrap)?);
        }
        let result = measure_simulation(&mut sim, spec.burn_in, spec.measure, seed, |s| {
            if Some(s.generation()) == target {
                snapshot = Some(selection_snapshot(s.state(), net, &cfg, s.generation())?);
            }
            Ok(())
        })
        .map_err(wrap)?;
        if let (Some(g), None) = (target, &snapshot) {
            while sim.generation() < g {
                sim.step().map_err(wrap)?;
            }
            snapshot = Some(selection_snapshot(sim.state(), net, &cfg, g).map_err(wrap)?);
        }
        let record = RunRecord {
            ri,
            wi,
            replicate: rep,
            r,
            w,
            result,
        };
        let snap = snapshot.map(|snapshot| SnapshotRecord { ri, wi, r, w, snapshot });
        Ok::<_, Error>((record, snap))
    });

    let mut runs = Vec::with_capacity(units.len());
    let mut snapshots = Vec::new();
    for out in outputs {
        let (record, snap) = out?;
        runs.push(record);
        snapshots.extend(snap);
    }
    let result = aggregate(spec.clone(), runs);
    Ok((result, snapshots))
}

fn aggregate(spec: SweepSpec, runs: Vec<RunRecord>) -> SweepResult {
    let (nr, nw, reps) = (spec.r_values.len(), spec.w_values.len(), spec.replicates);
    let mut points = Vec::with_capacity(nr * nw);
    for (chunk_idx, chunk) in runs.chunks(reps).enumerate() {
        let (ri, wi) = (chunk_idx / nw, chunk_idx % nw);
        let n = chunk.len() as f64;
        let mean_fc = chunk.iter().map(|c| c.result.mean_fc).sum::<f64>() / n;
        let var_fc = if chunk.len() > 1 {
            chunk.iter().map(|c| (c.result.mean_fc - mean_fc).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        points.push(PointSummary {
            ri,
            wi,
            r: spec.r_values[ri],
            w: spec.w_values[wi],
            mean_fc,
            var_fc,
            stderr_fc: (var_fc / n).sqrt(),
            replicates: chunk.len(),
        });
    }

    let critical = (0..nw)
        .map(|wi| {
            let curve: Vec<f64> = (0..nr).map(|ri| points[ri * nw + wi].mean_fc).collect();
            let estimate = estimate_rc(&spec.r_values, &curve);
            let replicate_estimates: Vec<RcEstimate> = (0..reps)
                .map(|rep| {
                    let fc: Vec<f64> = (0..nr)
                        .map(|ri| runs[(ri * nw + wi) * reps + rep].result.mean_fc)
                        .collect();
                    estimate_rc(&spec.r_values, &fc)
                })
                .collect();
            let inside: Vec<f64> = replicate_estimates.iter().filter_map(|e| e.value()).collect();
            let stderr = (inside.len() > 1).then(|| {
                let n = inside.len() as f64;
                let m = inside.iter().sum::<f64>() / n;
                (inside.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
            });
            CriticalPoint {
                wi,
                w: spec.w_values[wi],
                estimate,
                replicate_estimates,
                stderr,
            }
        })
        .collect();

    SweepResult {
        spec,
        runs,
        points,
        critical,
    }
}

/// Time series of one coevolution run.
#[derive(Clone, Debug, PartialEq)]
pub struct CoevolutionRun {
    pub ri: usize,
    pub replicate: usize,
    pub r: f64,
    pub seed: u64,
    pub samples: Vec<TimeSample>,
}

/// Coevolution runs for every r and replicate over `burn_in + measure`
/// generations. Biases start uniform on [-1, 1], so `w_values` is unused.
pub fn run_coevolution_experiment(spec: &SweepSpec, exec: Execution) -> Result<Vec<CoevolutionRun>> {
    if !spec.coevolution {
        return Err(Error::Mode("coevolution experiment needs coevolution = true".into()));
    }
    spec.check().map_err(|(key, message)| Error::Config {
        key: key.into(),
        line: 0,
        message,
    })?;
    let networks = build_networks(spec, exec)?;
    let units: Vec<(usize, usize)> = (0..spec.r_values.len())
        .flat_map(|ri| (0..spec.replicates).map(move |rep| (ri, rep)))
        .collect();
    let generations = spec.burn_in + spec.measure;
    let schedule = SampleSchedule::coevolution_default();
    map_ordered(&units, exec, |&(ri, rep)| {
        let r = spec.r_values[ri];
        let wrap = |e| Error::at(format!("coevolution run r={r} replicate {rep}"), e);
        let net = network_for(&networks, rep);
        let seed = run_seed(spec.master_seed, ri, 0, rep);
        let game = spec.matrix(r).map_err(wrap)?;
        let mut sim =
            Simulation::with_random_population(net, game, spec.dynamics(0.0), rng_from_seed(seed)).map_err(wrap)?;
        let samples = record_timeseries(&mut sim, generations, &schedule, Some(DEFAULT_BINS)).map_err(wrap)?;
        Ok(CoevolutionRun {
            ri,
            replicate: rep,
            r,
            seed,
            samples,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::TopologySpec;
    use crate::observables::run_measurement;
    use crate::topology::Neighbourhood;

    fn small(r: Vec<f64>, w: Vec<f64>, reps: usize) -> SweepSpec {
        let mut spec = SweepSpec::new(
            TopologySpec::Lattice {
                side: 10,
                neighbourhood: Neighbourhood::VonNeumann4,
            },
            r,
            w,
        );
        spec.burn_in = 20;
        spec.measure = 10;
        spec.replicates = reps;
        spec.master_seed = 9;
        spec
    }

    #[test]
    fn rc_interpolation() {
        let r = [0.1, 0.2, 0.3];
        assert_eq!(
            estimate_rc(&r, &[1.0, 0.0, 0.0]),
            RcEstimate::Within(0.1 + 0.995 / 1.0 * 0.1)
        );
        assert_eq!(estimate_rc(&r, &[0.5, 0.2, 0.1]), RcEstimate::AboveRange);
        assert_eq!(estimate_rc(&r, &[0.005, 0.0, 0.0]), RcEstimate::BelowRange);
        // non-monotone curve: the largest surviving r wins
        match estimate_rc(&r, &[0.0, 0.5, 0.0]) {
            RcEstimate::Within(v) => assert!(v > 0.2 && v < 0.3),
            other => panic!("{other:?}"),
        }
        // unsorted grid is handled
        assert_eq!(
            estimate_rc(&[0.3, 0.1, 0.2], &[0.0, 1.0, 0.0]),
            estimate_rc(&r, &[1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn single_point_matches_direct_measurement() {
        let spec = small(vec![0.1], vec![-2.0], 1);
        let result = run_sweep(&spec, Execution::Sequential).unwrap();
        let net = spec.topology.build(0).unwrap();
        let seed = run_seed(spec.master_seed, 0, 0, 0);
        let direct = run_measurement(&net, spec.matrix(0.1).unwrap(), spec.dynamics(-2.0), 20, 10, seed).unwrap();
        assert_eq!(result.runs[0].result, direct);
        assert_eq!(result.points[0].mean_fc, direct.mean_fc);
    }

    #[test]
    fn aggregates_are_consistent_and_layout_is_ordered() {
        let spec = small(vec![0.05, 0.2], vec![0.0, -5.0], 3);
        let result = run_sweep(&spec, Execution::Sequential).unwrap();
        assert_eq!(result.runs.len(), 12);
        assert_eq!(result.points.len(), 4);
        for ri in 0..2 {
            for wi in 0..2 {
                let runs = result.runs_at(ri, wi);
                assert!(runs.iter().all(|run| run.ri == ri && run.wi == wi));
                let mean = runs.iter().map(|run| run.result.mean_fc).sum::<f64>() / 3.0;
                assert!((result.point(ri, wi).mean_fc - mean).abs() < 1e-12);
            }
        }
        assert_eq!(result.critical.len(), 2);
    }

    #[test]
    fn execution_strategy_does_not_change_results() {
        let mut spec = small(vec![0.05, 0.2], vec![0.0, -5.0], 2);
        spec.topology = TopologySpec::RegularRandom { n: 60, k: 4 };
        let a = run_sweep(&spec, Execution::Sequential).unwrap();
        let b = run_sweep(&spec, Execution::ParallelWith { workers: 3 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_topology_is_rejected_before_running() {
        let mut spec = small(vec![0.1], vec![0.0], 1);
        spec.topology = TopologySpec::RegularRandom { n: 5, k: 3 };
        let err = run_sweep(&spec, Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "k"), "{err}");
    }

    #[test]
    fn snapshots_only_from_first_replicate() {
        let spec = small(vec![0.1], vec![-1000.0, 0.0], 2);
        let (_, snaps) = run_sweep_observed(&spec, Execution::Sequential, Some(5)).unwrap();
        assert_eq!(snaps.len(), 2);
        assert!(snaps.iter().all(|s| s.snapshot.generation == 5));
        // past the end of the run
        let (_, late) = run_sweep_observed(&spec, Execution::Sequential, Some(45)).unwrap();
        assert!(late.iter().all(|s| s.snapshot.generation == 45));
        let (_, first) = run_sweep_observed(&spec, Execution::Sequential, Some(0)).unwrap();
        for e in &first[0].snapshot.edges {
            assert_eq!(e.weight, 0.25);
        }
    }

    #[test]
    fn coevolution_requires_mode() {
        let spec = small(vec![0.1], vec![0.0], 1);
        assert!(matches!(
            run_coevolution_experiment(&spec, Execution::Sequential),
            Err(Error::Mode(_))
        ));
        let mut spec = spec;
        spec.coevolution = true;
        spec.mutation_rate = 0.01;
        let runs = run_coevolution_experiment(&spec, Execution::Sequential).unwrap();
        assert_eq!(runs.len(), 1);
        for s in &runs[0].samples {
            let h = &s.preferences.as_ref().unwrap().histogram;
            assert_eq!(h.iter().sum::<u64>(), 100);
        }
    }
}
