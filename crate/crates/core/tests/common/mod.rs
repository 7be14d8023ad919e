//! Exhaustive one-generation oracle on a 4-cycle.
//!
//! Written from the model definition alone: it shares no code with the
//! engine beyond the public state types used to drive the simulation side.

#![allow(dead_code)]

use biasnet_core::engine::{step_generation, AgentState, DynamicsConfig};
use biasnet_core::game::{pd_matrix, Strategy};
use biasnet_core::rng::rng_from_seed;
use biasnet_core::topology::{Network, Topology};

pub const CYCLE: [[usize; 2]; 4] = [[1, 3], [0, 2], [1, 3], [0, 2]];
pub const R: f64 = 0.1;
pub const K: f64 = 0.1;
/// Start configuration: 0 and 1 cooperate, 2 and 3 defect.
pub const START: [bool; 4] = [true, true, false, false];
/// Prior-generation payoffs used as the selection signal.
pub const PRIOR: [f64; 4] = [0.5, 1.25, 2.0, 0.25];

fn pd(a: bool, b: bool) -> f64 {
    match (a, b) {
        (true, true) => 1.0,
        (true, false) => -R,
        (false, true) => 1.0 + R,
        (false, false) => 0.0,
    }
}

fn select_weight(w: f64, pz: f64, px: f64) -> f64 {
    1.0 / (1.0 + (w * (pz - px)).exp())
}

fn fermi(px: f64, pz: f64) -> f64 {
    1.0 / (1.0 + (-(pz - px) / K).exp())
}

/// Encodes cooperators as set bits.
pub fn encode(coop: &[bool]) -> usize {
    coop.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| 1 << i).sum()
}

/// Exact distribution of the next configuration (index = [`encode`]).
pub fn exact_distribution(w: f64) -> [f64; 16] {
    let mut select = [[0.0; 2]; 4];
    for x in 0..4 {
        let a = select_weight(w, PRIOR[CYCLE[x][0]], PRIOR[x]);
        let b = select_weight(w, PRIOR[CYCLE[x][1]], PRIOR[x]);
        select[x] = [a / (a + b), b / (a + b)];
    }
    let mut dist = [0.0; 16];
    // Each of the 8 draws (2 per agent) picks neighbour 0 or 1.
    for tuple in 0..256usize {
        let mut p_tuple = 1.0;
        let mut payoff = [0.0; 4];
        for x in 0..4 {
            for d in 0..2 {
                let choice = (tuple >> (2 * x + d)) & 1;
                p_tuple *= select[x][choice];
                let z = CYCLE[x][choice];
                payoff[x] += pd(START[x], START[z]);
                payoff[z] += pd(START[z], START[x]);
            }
        }
        // Each agent picks a model uniformly, then flips one adoption coin.
        for models in 0..16usize {
            let p_models = 1.0 / 16.0;
            let mut outcomes = vec![(1.0, [false; 4])];
            for x in 0..4 {
                let z = CYCLE[x][(models >> x) & 1];
                let mut next = Vec::with_capacity(outcomes.len() * 2);
                for (p, cfg) in outcomes {
                    if START[z] == START[x] {
                        let mut c = cfg;
                        c[x] = START[x];
                        next.push((p, c));
                    } else {
                        let q = fermi(payoff[x], payoff[z]);
                        let mut adopt = cfg;
                        adopt[x] = START[z];
                        let mut keep = cfg;
                        keep[x] = START[x];
                        next.push((p * q, adopt));
                        next.push((p * (1.0 - q), keep));
                    }
                }
                outcomes = next;
            }
            for (p, cfg) in outcomes {
                dist[encode(&cfg)] += p_tuple * p_models * p;
            }
        }
    }
    dist
}

pub fn cycle_network() -> Network {
    Network::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)], Topology::Custom, 0)
}

/// Empirical next-configuration counts from `trials` engine generations.
pub fn simulated_counts(w: f64, trials: usize, seed: u64) -> [u64; 16] {
    let net = cycle_network();
    let game = pd_matrix(R).unwrap();
    let cfg = DynamicsConfig {
        w,
        noise: K,
        ..Default::default()
    };
    let state = AgentState {
        strategies: START
            .iter()
            .map(|&c| if c { Strategy::Cooperate } else { Strategy::Defect })
            .collect(),
        payoffs: PRIOR.to_vec(),
        preferences: None,
    };
    let mut rng = rng_from_seed(seed);
    let mut counts = [0u64; 16];
    for _ in 0..trials {
        let (next, _) = step_generation(&state, &net, &game, &cfg, &mut rng).unwrap();
        let coop: Vec<bool> = next.strategies.iter().map(|&s| s == Strategy::Cooperate).collect();
        counts[encode(&coop)] += 1;
    }
    counts
}

/// Largest deviation in standard deviations over all configurations, and
/// whether any impossible configuration occurred.
pub fn compare(dist: &[f64; 16], counts: &[u64; 16]) -> (f64, bool) {
    let n = counts.iter().sum::<u64>() as f64;
    let mut worst: f64 = 0.0;
    let mut impossible = false;
    for (p, &c) in dist.iter().zip(counts) {
        if *p == 0.0 {
            impossible |= c > 0;
            continue;
        }
        let sd = (n * p * (1.0 - p)).sqrt();
        worst = worst.max((c as f64 - n * p).abs() / sd);
    }
    (worst, impossible)
}
