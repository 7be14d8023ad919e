//! Cooperator fractions, quasistationary averages, time series and
//! selection-flow snapshots.

use std::io::{BufRead, Write};

use crate::coevolution::{preference_stats, PreferenceStats};
use crate::engine::{selection_weights, AgentState, DynamicsConfig, Simulation};
use crate::error::{Error, Result};
use crate::game::{PayoffMatrix, Strategy};
use crate::rng::rng_from_seed;
use crate::topology::Network;

/// Generations that every time series records when they fall in range.
pub const MANDATORY_SAMPLES: [u64; 3] = [10, 100, 1500];

pub fn fraction_cooperators(state: &AgentState) -> f64 {
    if state.is_empty() {
        return 0.0;
    }
    state.cooperator_count() as f64 / state.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    /// Cooperator fraction averaged over the measurement window.
    pub mean_fc: f64,
    /// Population variance of the per-generation fraction over the window.
    pub var_fc: f64,
    pub absorbed: bool,
    pub absorbed_at: Option<u64>,
    pub burn_in: u64,
    pub measure_window: u64,
    pub seed: u64,
}

/// Runs `burn_in` generations from a random half-cooperator population, then
/// averages the cooperator fraction over the next `measure` generations.
///
/// All randomness, including the initial population, comes from `seed`.
pub fn run_measurement(
    net: &Network,
    game: PayoffMatrix,
    cfg: DynamicsConfig,
    burn_in: u64,
    measure: u64,
    seed: u64,
) -> Result<RunResult> {
    let mut sim = Simulation::with_random_population(net, game, cfg, rng_from_seed(seed))?;
    measure_simulation(&mut sim, burn_in, measure, seed, |_| Ok(()))
}

/// Measurement loop over an existing simulation.
///
/// `observe` runs after every completed generation. Once strategies are
/// absorbed (homogeneous, no mutation) the loop stops and the rest of the
/// window is filled with the absorbed value, which is exactly what further
/// generations would produce.
pub fn measure_simulation<F>(
    sim: &mut Simulation<'_>,
    burn_in: u64,
    measure: u64,
    seed: u64,
    mut observe: F,
) -> Result<RunResult>
where
    F: FnMut(&Simulation<'_>) -> Result<()>,
{
    if measure == 0 {
        return Err(Error::invalid("measurement window must be at least one generation"));
    }
    let start = sim.generation();
    let end = start + burn_in + measure;
    let mut window: Vec<f64> = Vec::with_capacity(measure as usize);
    let mut absorbed_at = None;
    loop {
        if sim.is_absorbed() {
            absorbed_at = Some(sim.generation() - start);
            let value = fraction_cooperators(sim.state());
            window.resize(measure as usize, value);
            break;
        }
        if sim.generation() == end {
            break;
        }
        sim.step()?;
        observe(sim)?;
        if sim.generation() > start + burn_in {
            window.push(fraction_cooperators(sim.state()));
        }
    }
    let n = window.len() as f64;
    let mean_fc = window.iter().sum::<f64>() / n;
    let var_fc = window.iter().map(|v| (v - mean_fc).powi(2)).sum::<f64>() / n;
    Ok(RunResult {
        mean_fc,
        var_fc,
        absorbed: absorbed_at.is_some(),
        absorbed_at,
        burn_in,
        measure_window: measure,
        seed,
    })
}

/// When a time series takes samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSchedule {
    pub cadence: u64,
    /// Sample every generation up to and including this one.
    pub dense_until: u64,
    pub include_initial: bool,
}

impl SampleSchedule {
    pub fn every(cadence: u64) -> Self {
        SampleSchedule {
            cadence: cadence.max(1),
            dense_until: 0,
            include_initial: false,
        }
    }

    /// Every generation up to 100, then every 10th, starting from generation 0.
    pub fn coevolution_default() -> Self {
        SampleSchedule {
            cadence: 10,
            dense_until: 100,
            include_initial: true,
        }
    }

    pub fn includes(&self, generation: u64) -> bool {
        if generation == 0 {
            return self.include_initial;
        }
        generation <= self.dense_until
            || generation.is_multiple_of(self.cadence)
            || MANDATORY_SAMPLES.contains(&generation)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSample {
    pub generation: u64,
    pub fc: f64,
    pub preferences: Option<PreferenceStats>,
}

/// Steps `sim` for `generations` generations, sampling per `schedule`.
///
/// With `bins` set, each sample also carries preference statistics.
pub fn record_timeseries(
    sim: &mut Simulation<'_>,
    generations: u64,
    schedule: &SampleSchedule,
    bins: Option<usize>,
) -> Result<Vec<TimeSample>> {
    let start = sim.generation();
    let take = |sim: &Simulation<'_>, g: u64| -> Result<TimeSample> {
        Ok(TimeSample {
            generation: g,
            fc: fraction_cooperators(sim.state()),
            preferences: bins.map(|b| preference_stats(sim.state(), b, g)).transpose()?,
        })
    };
    let mut series = Vec::new();
    if schedule.includes(0) {
        series.push(take(sim, 0)?);
    }
    for g in 1..=generations {
        // Without preferences an absorbed state is frozen; skip the work.
        if bins.is_none() && sim.is_absorbed() {
            let fc = fraction_cooperators(sim.state());
            series.extend((g..=generations).filter(|&t| schedule.includes(t)).map(|t| TimeSample {
                generation: t,
                fc,
                preferences: None,
            }));
            break;
        }
        sim.step()?;
        debug_assert_eq!(sim.generation(), start + g);
        if schedule.includes(g) {
            series.push(take(sim, g)?);
        }
    }
    Ok(series)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectedWeight {
    pub from: u32,
    pub to: u32,
    pub weight: f64,
}

/// Every node's current selection distribution, as directed edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionSnapshot {
    pub generation: u64,
    pub strategies: Vec<Strategy>,
    /// Grouped by source node, in neighbour order.
    pub edges: Vec<DirectedWeight>,
    /// Side length when taken on a square lattice.
    pub lattice_side: Option<usize>,
}

pub fn selection_snapshot(
    state: &AgentState,
    net: &Network,
    cfg: &DynamicsConfig,
    generation: u64,
) -> Result<SelectionSnapshot> {
    let mut edges = Vec::with_capacity(net.degree_sum());
    for x in 0..net.node_count() {
        let dist = selection_weights(x, &state.payoffs, net, state.bias_of(x, cfg))?;
        edges.extend(
            dist.neighbours
                .iter()
                .zip(&dist.probabilities)
                .map(|(&z, &p)| DirectedWeight {
                    from: x as u32,
                    to: z,
                    weight: p,
                }),
        );
    }
    Ok(SelectionSnapshot {
        generation,
        strategies: state.strategies.clone(),
        edges,
        lattice_side: net.lattice_side(),
    })
}

impl SelectionSnapshot {
    /// Sum of outgoing weights per node.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.strategies.len()];
        for e in &self.edges {
            sums[e.from as usize] += e.weight;
        }
        sums
    }

    /// Mean weight of C->C edges leaving boundary cooperators (those with a
    /// defector neighbour) and mean weight of C->D edges. `None` when either
    /// set is empty.
    pub fn boundary_contrast(&self) -> Option<(f64, f64)> {
        let is_c = |x: u32| self.strategies[x as usize] == Strategy::Cooperate;
        let mut boundary = vec![false; self.strategies.len()];
        for e in &self.edges {
            if is_c(e.from) && !is_c(e.to) {
                boundary[e.from as usize] = true;
            }
        }
        let (mut cc, mut ncc, mut cd, mut ncd) = (0.0, 0usize, 0.0, 0usize);
        for e in self.edges.iter().filter(|e| is_c(e.from)) {
            if is_c(e.to) {
                if boundary[e.from as usize] {
                    cc += e.weight;
                    ncc += 1;
                }
            } else {
                cd += e.weight;
                ncd += 1;
            }
        }
        (ncc > 0 && ncd > 0).then(|| (cc / ncc as f64, cd / ncd as f64))
    }

    /// Text form: one `node strategy` line per node (strategy code C=0, D=1),
    /// then one `from to weight` line per directed edge, weight to 6 decimals.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (x, s) in self.strategies.iter().enumerate() {
            writeln!(out, "{x} {}", s.code())?;
        }
        for e in &self.edges {
            writeln!(out, "{} {} {:.6}", e.from, e.to, e.weight)?;
        }
        out.flush()
    }

    /// Parses [`write_text`](Self::write_text) output. Generation is set to 0
    /// and the lattice side must be supplied by the caller.
    pub fn read_text<R: BufRead>(input: R, lattice_side: Option<usize>) -> Result<Self> {
        let mut strategies = Vec::new();
        let mut edges = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let bad = |message: String| Error::Parse { line: line_no, message };
            let line = line.map_err(|e| bad(e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                [node, code] => {
                    if !edges.is_empty() {
                        return Err(bad("node line after edge lines".into()));
                    }
                    let node: usize = node.parse().map_err(|_| bad(format!("bad node index `{node}`")))?;
                    if node != strategies.len() {
                        return Err(bad(format!("expected node {}, found {node}", strategies.len())));
                    }
                    let s = code
                        .parse::<u8>()
                        .ok()
                        .and_then(Strategy::from_code)
                        .ok_or_else(|| bad(format!("bad strategy code `{code}`")))?;
                    strategies.push(s);
                }
                [from, to, weight] => {
                    let idx = |s: &str| -> Result<u32> {
                        let v: u32 = s.parse().map_err(|_| bad(format!("bad node index `{s}`")))?;
                        if v as usize >= strategies.len() {
                            return Err(bad(format!("node {v} out of range")));
                        }
                        Ok(v)
                    };
                    let weight: f64 = weight.parse().map_err(|_| bad(format!("bad weight `{weight}`")))?;
                    edges.push(DirectedWeight {
                        from: idx(from)?,
                        to: idx(to)?,
                        weight,
                    });
                }
                _ => return Err(bad(format!("expected 2 or 3 fields, found {}", fields.len()))),
            }
        }
        Ok(SelectionSnapshot {
            generation: 0,
            strategies,
            edges,
            lattice_side,
        })
    }
}
