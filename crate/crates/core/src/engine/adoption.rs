//! Strategy adoption (Fermi rule) and mutation.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{AdoptionRule, AgentState, DynamicsConfig};
use crate::game::Strategy;
use crate::rng::SimRng;
use crate::topology::Network;

/// `1 / (1 + e^-u)` without overflow.
#[inline]
pub(crate) fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Probability that an agent with payoff `p_focal` copies a neighbour with
/// payoff `p_model`: `1 / (1 + exp((p_focal - p_model) / k))`.
#[inline]
pub fn adoption_probability(p_focal: f64, p_model: f64, k: f64) -> f64 {
    logistic((p_model - p_focal) / k)
}

/// Adoption probability under an explicit sign convention.
#[inline]
pub fn adoption_probability_with(rule: AdoptionRule, p_focal: f64, p_model: f64, k: f64) -> f64 {
    match rule {
        AdoptionRule::FavourBetter => adoption_probability(p_focal, p_model, k),
        AdoptionRule::AsPrinted => adoption_probability(p_model, p_focal, k),
    }
}

/// Decides whether `x` copies `z`, consuming randomness only when copying would change something.
#[inline]
fn copies(
    x: usize,
    z: usize,
    strategies: &[Strategy],
    preferences: Option<&[f64]>,
    payoffs: &[f64],
    cfg: &DynamicsConfig,
    rng: &mut SimRng,
) -> bool {
    let differs = strategies[x] != strategies[z] || preferences.is_some_and(|w| w[x] != w[z]);
    differs && {
        let p = adoption_probability_with(cfg.adoption, payoffs[x], payoffs[z], cfg.noise);
        rng.random::<f64>() < p
    }
}

/// Synchronous update: every agent compares itself with one uniformly drawn
/// neighbour, reading only the pre-update state.
pub fn update_strategies_sync(
    state: &AgentState,
    payoffs: &[f64],
    net: &Network,
    cfg: &DynamicsConfig,
    rng: &mut SimRng,
) -> AgentState {
    let mut strategies = state.strategies.clone();
    let mut preferences = state.preferences.clone();
    let current_w = state.preferences.as_deref();
    for (x, next) in strategies.iter_mut().enumerate() {
        let nbrs = net.neighbours(x);
        let z = nbrs[rng.random_range(0..nbrs.len())] as usize;
        if copies(x, z, &state.strategies, current_w, payoffs, cfg, rng) {
            *next = state.strategies[z];
            if let (Some(next_w), Some(cur_w)) = (preferences.as_mut(), current_w) {
                next_w[x] = cur_w[z];
            }
        }
    }
    AgentState {
        strategies,
        payoffs: payoffs.to_vec(),
        preferences,
    }
}

/// Asynchronous update: agents visited in a fresh random order, each reading
/// strategies already updated this sweep. Payoffs stay frozen.
pub fn update_strategies_async(
    state: &AgentState,
    payoffs: &[f64],
    net: &Network,
    cfg: &DynamicsConfig,
    rng: &mut SimRng,
) -> AgentState {
    let mut next = AgentState {
        strategies: state.strategies.clone(),
        payoffs: payoffs.to_vec(),
        preferences: state.preferences.clone(),
    };
    let mut order: Vec<u32> = (0..state.len() as u32).collect();
    order.shuffle(rng);
    for x in order {
        let x = x as usize;
        let nbrs = net.neighbours(x);
        let z = nbrs[rng.random_range(0..nbrs.len())] as usize;
        if copies(x, z, &next.strategies, next.preferences.as_deref(), payoffs, cfg, rng) {
            next.strategies[x] = next.strategies[z];
            if let Some(w) = next.preferences.as_mut() {
                w[x] = w[z];
            }
        }
    }
    next
}

/// Each agent independently, with probability `q`, takes a uniformly random
/// strategy and (when preferences are tracked) a preference uniform on [-1, 1].
///
/// Returns the number of agents hit.
pub fn apply_mutation(state: &mut AgentState, q: f64, rng: &mut SimRng) -> usize {
    if q <= 0.0 {
        return 0;
    }
    let mut hits = 0;
    for x in 0..state.len() {
        if rng.random::<f64>() < q {
            hits += 1;
            state.strategies[x] = if rng.random::<bool>() {
                Strategy::Cooperate
            } else {
                Strategy::Defect
            };
            if let Some(w) = state.preferences.as_mut() {
                w[x] = rng.random_range(-1.0..=1.0);
            }
        }
    }
    hits
}
