//! Generation loop: biased partner selection, game play, payoff
//! accumulation, strategy adoption and (in coevolution mode) mutation.

mod adoption;
mod play;
mod selection;

use rand::Rng;

pub use adoption::{
    adoption_probability, adoption_probability_with, apply_mutation, update_strategies_async, update_strategies_sync,
};
pub use play::play_generation;
pub use selection::{sample_partner, selection_weights, SelectionDistribution};

use crate::error::{Error, Result};
use crate::game::{PayoffMatrix, Strategy};
use crate::rng::SimRng;
use crate::topology::{validate, Network};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum UpdateScheme {
    /// All agents update at once from the pre-update state.
    #[default]
    Synchronous,
    /// Agents update in place, in a fresh random order each generation.
    AsynchronousRandomOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PayoffNormalization {
    #[default]
    None,
    /// Divide by the agent's degree (the number of partners it selects).
    Degree,
    /// Divide by the number of games the agent took part in, either side.
    RealizedGames,
}

/// Sign convention of the adoption rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum AdoptionRule {
    /// Better-performing neighbours are copied with probability above 1/2.
    #[default]
    FavourBetter,
    /// Exponent sign flipped: better neighbours are copied less often.
    /// Kept only for sensitivity checks.
    AsPrinted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsConfig {
    /// Global selection bias; negative prefers stronger partners. Unused in
    /// coevolution mode, where each agent carries its own bias.
    pub w: f64,
    /// Adoption noise K.
    pub noise: f64,
    pub update: UpdateScheme,
    pub normalization: PayoffNormalization,
    pub coevolution: bool,
    /// Per-agent, per-generation mutation probability q.
    pub mutation_rate: f64,
    pub adoption: AdoptionRule,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            w: 0.0,
            noise: 0.1,
            update: UpdateScheme::Synchronous,
            normalization: PayoffNormalization::None,
            coevolution: false,
            mutation_rate: 0.0,
            adoption: AdoptionRule::FavourBetter,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return Err(Error::invalid(format!(
                "noise K must be positive and finite, got {}",
                self.noise
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::invalid(format!(
                "mutation rate must lie in [0, 1], got {}",
                self.mutation_rate
            )));
        }
        if self.mutation_rate > 0.0 && !self.coevolution {
            return Err(Error::invalid("mutation requires coevolution mode"));
        }
        if self.w.is_nan() {
            return Err(Error::invalid("selection bias w is NaN"));
        }
        Ok(())
    }
}

/// Per-agent state, stored as parallel flat arrays indexed by node.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    pub strategies: Vec<Strategy>,
    /// Accumulated payoff of the last completed generation; the selection signal.
    pub payoffs: Vec<f64>,
    /// Heritable biases `w_i` in [-1, 1], present only in coevolution mode.
    pub preferences: Option<Vec<f64>>,
}

impl AgentState {
    pub fn uniform(n: usize, strategy: Strategy) -> Self {
        AgentState {
            strategies: vec![strategy; n],
            payoffs: vec![0.0; n],
            preferences: None,
        }
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn cooperator_count(&self) -> usize {
        self.strategies.iter().filter(|&&s| s == Strategy::Cooperate).count()
    }

    /// The shared strategy when the population is homogeneous.
    pub fn homogeneous(&self) -> Option<Strategy> {
        let first = *self.strategies.first()?;
        self.strategies.iter().all(|&s| s == first).then_some(first)
    }

    /// Selection bias used by agent `x`.
    #[inline]
    pub fn bias_of(&self, x: usize, cfg: &DynamicsConfig) -> f64 {
        match (&self.preferences, cfg.coevolution) {
            (Some(w), true) => w[x],
            _ => cfg.w,
        }
    }

    fn check(&self, n: usize, cfg: &DynamicsConfig) -> Result<()> {
        if self.strategies.len() != n || self.payoffs.len() != n {
            return Err(Error::invalid(format!(
                "state arrays have length {}/{} for a network of {n} nodes",
                self.strategies.len(),
                self.payoffs.len()
            )));
        }
        if let Some(i) = self.payoffs.iter().position(|p| !p.is_finite()) {
            return Err(Error::Corruption(format!("payoff of node {i} is {}", self.payoffs[i])));
        }
        match (&self.preferences, cfg.coevolution) {
            (None, true) => return Err(Error::Mode("coevolution needs per-agent preferences".into())),
            (Some(w), _) => {
                if w.len() != n {
                    return Err(Error::invalid("preference array length differs from node count"));
                }
                if let Some(i) = w.iter().position(|v| !(-1.0..=1.0).contains(v)) {
                    return Err(Error::invalid(format!(
                        "preference of node {i} is {} (outside [-1, 1])",
                        w[i]
                    )));
                }
            }
            (None, false) => {}
        }
        Ok(())
    }
}

/// Tally of games by strategy pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GameCounts {
    pub cc: u64,
    /// Mixed games, whichever side selected.
    pub cd: u64,
    pub dd: u64,
}

impl GameCounts {
    #[inline]
    fn record(&mut self, a: usize, b: usize) {
        match a + b {
            0 => self.cc += 1,
            1 => self.cd += 1,
            _ => self.dd += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.cc + self.cd + self.dd
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationOutcome {
    /// Payoffs after this round (normalized if enabled); next round's selection signal.
    pub new_payoffs: Vec<f64>,
    pub games_played: u64,
    /// Sum of raw accumulated payoffs, before any normalization.
    pub payoff_total: f64,
    pub game_counts: GameCounts,
}

/// Random initial population: each agent cooperates with probability
/// `cooperator_fraction`; preferences uniform on [-1, 1] when requested.
pub fn init_population(net: &Network, cooperator_fraction: f64, coevolution: bool, rng: &mut SimRng) -> AgentState {
    let n = net.node_count();
    let strategies = (0..n)
        .map(|_| {
            if rng.random::<f64>() < cooperator_fraction {
                Strategy::Cooperate
            } else {
                Strategy::Defect
            }
        })
        .collect();
    let preferences = coevolution.then(|| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect());
    AgentState {
        strategies,
        payoffs: vec![0.0; n],
        preferences,
    }
}

/// One full generation: play, update, then mutate (coevolution only).
pub fn step_generation(
    state: &AgentState,
    net: &Network,
    game: &PayoffMatrix,
    cfg: &DynamicsConfig,
    rng: &mut SimRng,
) -> Result<(AgentState, GenerationOutcome)> {
    let outcome = play_generation(state, net, game, cfg, rng)?;
    let mut next = match cfg.update {
        UpdateScheme::Synchronous => update_strategies_sync(state, &outcome.new_payoffs, net, cfg, rng),
        UpdateScheme::AsynchronousRandomOrder => update_strategies_async(state, &outcome.new_payoffs, net, cfg, rng),
    };
    if cfg.coevolution {
        apply_mutation(&mut next, cfg.mutation_rate, rng);
    }
    Ok((next, outcome))
}

/// A running simulation instance that owns its state and random stream.
#[derive(Clone, Debug)]
pub struct Simulation<'a> {
    net: &'a Network,
    game: PayoffMatrix,
    cfg: DynamicsConfig,
    state: AgentState,
    rng: SimRng,
    generation: u64,
}

impl<'a> Simulation<'a> {
    /// Validates network, configuration and state before anything runs.
    pub fn new(
        net: &'a Network,
        game: PayoffMatrix,
        cfg: DynamicsConfig,
        state: AgentState,
        rng: SimRng,
    ) -> Result<Self> {
        let report = validate(net);
        if !report.passed() {
            return Err(Error::InvalidNetwork(report.summary()));
        }
        cfg.validate()?;
        state.check(net.node_count(), &cfg)?;
        Ok(Simulation {
            net,
            game,
            cfg,
            state,
            rng,
            generation: 0,
        })
    }

    /// Fresh random population (cooperator share 1/2) drawn from `rng`.
    pub fn with_random_population(
        net: &'a Network,
        game: PayoffMatrix,
        cfg: DynamicsConfig,
        mut rng: SimRng,
    ) -> Result<Self> {
        let state = init_population(net, 0.5, cfg.coevolution, &mut rng);
        Self::new(net, game, cfg, state, rng)
    }

    pub fn step(&mut self) -> Result<GenerationOutcome> {
        let (next, outcome) = step_generation(&self.state, self.net, &self.game, &self.cfg, &mut self.rng)?;
        self.state = next;
        self.generation += 1;
        Ok(outcome)
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn network(&self) -> &Network {
        self.net
    }

    pub fn config(&self) -> &DynamicsConfig {
        &self.cfg
    }

    pub fn game(&self) -> &PayoffMatrix {
        &self.game
    }

    /// Completed generations; the initial state is generation 0.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Homogeneous with mutation off: no later generation can change strategies.
    pub fn is_absorbed(&self) -> bool {
        self.cfg.mutation_rate == 0.0 && self.state.homogeneous().is_some()
    }
}
