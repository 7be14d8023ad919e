//! Heritable per-agent selection biases.
//!
//! In coevolution mode every agent carries its own bias `w_i` in [-1, 1],
//! passes it on together with its strategy when copied, and is reset to a
//! random strategy and bias with the mutation probability.

use crate::engine::{init_population, AgentState, DynamicsConfig, Simulation};
use crate::error::{Error, Result};
use crate::game::PayoffMatrix;
use crate::observables::{record_timeseries, SampleSchedule, TimeSample};
use crate::rng::SimRng;
use crate::topology::Network;

/// Histogram bin count used by the experiment runner.
pub const DEFAULT_BINS: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceStats {
    pub generation: u64,
    pub mean_w: f64,
    /// Population variance.
    pub var_w: f64,
    /// Equal-width bins over [-1, 1]; 1.0 lands in the last bin.
    pub histogram: Vec<u64>,
}

impl PreferenceStats {
    pub fn bins(&self) -> usize {
        self.histogram.len()
    }

    /// Lower and upper edge of bin `i`.
    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        bin_edges(self.bins(), i)
    }
}

pub fn bin_edges(bins: usize, i: usize) -> (f64, f64) {
    let width = 2.0 / bins as f64;
    let low = -1.0 + i as f64 * width;
    let high = if i + 1 == bins {
        1.0
    } else {
        -1.0 + (i + 1) as f64 * width
    };
    (low, high)
}

pub fn preference_stats(state: &AgentState, bins: usize, generation: u64) -> Result<PreferenceStats> {
    let w = state
        .preferences
        .as_deref()
        .ok_or_else(|| Error::Mode("population carries no preferences".into()))?;
    if bins == 0 {
        return Err(Error::invalid("histogram needs at least one bin"));
    }
    let n = w.len() as f64;
    let mean_w = w.iter().sum::<f64>() / n;
    let var_w = w.iter().map(|v| (v - mean_w).powi(2)).sum::<f64>() / n;
    let mut histogram = vec![0u64; bins];
    for &v in w {
        let i = (((v + 1.0) / 2.0) * bins as f64).floor() as usize;
        histogram[i.min(bins - 1)] += 1;
    }
    Ok(PreferenceStats {
        generation,
        mean_w,
        var_w,
        histogram,
    })
}

/// Runs coevolution from a fresh random population (half cooperators,
/// biases uniform on [-1, 1]) and records the sampled series.
pub fn run_coevolution(
    net: &Network,
    game: PayoffMatrix,
    cfg: DynamicsConfig,
    generations: u64,
    schedule: &SampleSchedule,
    bins: usize,
    mut rng: SimRng,
) -> Result<Vec<TimeSample>> {
    let state = init_population(net, 0.5, true, &mut rng);
    run_coevolution_from(net, game, cfg, state, generations, schedule, bins, rng)
}

#[allow(clippy::too_many_arguments)]
pub fn run_coevolution_from(
    net: &Network,
    game: PayoffMatrix,
    cfg: DynamicsConfig,
    state: AgentState,
    generations: u64,
    schedule: &SampleSchedule,
    bins: usize,
    rng: SimRng,
) -> Result<Vec<TimeSample>> {
    if !cfg.coevolution {
        return Err(Error::Mode("run_coevolution needs coevolution = true".into()));
    }
    let mut sim = Simulation::new(net, game, cfg, state, rng)?;
    record_timeseries(&mut sim, generations, schedule, Some(bins))
}
