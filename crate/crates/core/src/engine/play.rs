use rand::Rng;

use super::{AgentState, DynamicsConfig, GameCounts, GenerationOutcome, PayoffNormalization};
use crate::error::Result;
use crate::game::PayoffMatrix;
use crate::rng::SimRng;
use crate::topology::Network;

use super::selection::NeighbourSampler;

/// One round of biased partner selection and game play.
///
/// Every agent, in index order, draws as many partners as it has neighbours,
/// independently and with replacement, from its selection distribution. The
/// distribution is computed from `state.payoffs`, which stay frozen for the
/// round. Each game credits both players.
pub fn play_generation(
    state: &AgentState,
    net: &Network,
    game: &PayoffMatrix,
    cfg: &DynamicsConfig,
    rng: &mut SimRng,
) -> Result<GenerationOutcome> {
    let n = net.node_count();
    let table = game.table();
    let strategies = &state.strategies;
    let mut acc = vec![0.0f64; n];
    let mut counts = GameCounts::default();
    let mut involvement = match cfg.normalization {
        PayoffNormalization::RealizedGames => vec![0u32; n],
        _ => Vec::new(),
    };
    let mut sampler = NeighbourSampler::new();

    for x in 0..n {
        let nbrs = net.neighbours(x);
        let deg = nbrs.len();
        let w = state.bias_of(x, cfg);
        let sx = strategies[x].code() as usize;
        let row = table[sx];
        let uniform = w == 0.0;
        if !uniform {
            sampler.load(x, &state.payoffs, nbrs, w)?;
        }
        for _ in 0..deg {
            let i = if uniform {
                rng.random_range(0..deg)
            } else {
                sampler.draw(rng)
            };
            let z = nbrs[i] as usize;
            let sz = strategies[z].code() as usize;
            acc[x] += row[sz];
            acc[z] += table[sz][sx];
            counts.record(sx, sz);
            if !involvement.is_empty() {
                involvement[x] += 1;
                involvement[z] += 1;
            }
        }
    }

    let payoff_total: f64 = acc.iter().sum();
    match cfg.normalization {
        PayoffNormalization::None => {}
        PayoffNormalization::Degree => {
            for (x, p) in acc.iter_mut().enumerate() {
                *p /= net.degree(x) as f64;
            }
        }
        PayoffNormalization::RealizedGames => {
            for (p, &g) in acc.iter_mut().zip(&involvement) {
                *p /= g as f64;
            }
        }
    }

    Ok(GenerationOutcome {
        new_payoffs: acc,
        games_played: counts.total(),
        payoff_total,
        game_counts: counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::AgentState;
    use crate::game::{pd_matrix, Strategy};
    use crate::rng::rng_from_seed;
    use crate::topology::{build_barabasi_albert, build_lattice, Neighbourhood};

    #[test]
    fn all_defectors_earn_nothing() {
        let net = build_lattice(10, Neighbourhood::VonNeumann4).unwrap();
        let state = AgentState::uniform(100, Strategy::Defect);
        for w in [0.0, -1000.0, 5.0, f64::INFINITY] {
            let cfg = DynamicsConfig {
                w,
                ..Default::default()
            };
            let out = play_generation(&state, &net, &pd_matrix(0.3).unwrap(), &cfg, &mut rng_from_seed(1)).unwrap();
            assert!(out.new_payoffs.iter().all(|&p| p == 0.0));
            assert_eq!(out.games_played, 400);
        }
    }

    #[test]
    fn all_cooperators_average_twice_the_degree() {
        let net = build_lattice(10, Neighbourhood::VonNeumann4).unwrap();
        let mut state = AgentState::uniform(100, Strategy::Cooperate);
        state.payoffs = (0..100).map(|i| (i % 7) as f64).collect();
        let cfg = DynamicsConfig {
            w: -2.0,
            ..Default::default()
        };
        let out = play_generation(&state, &net, &pd_matrix(0.1).unwrap(), &cfg, &mut rng_from_seed(2)).unwrap();
        assert_eq!(out.payoff_total, 800.0);
        assert_eq!(out.new_payoffs.iter().sum::<f64>() / 100.0, 8.0);
        assert_eq!(out.game_counts.cc, 400);
    }

    #[test]
    fn lone_cooperator_expected_payoff() {
        let net = build_lattice(10, Neighbourhood::VonNeumann4).unwrap();
        let mut state = AgentState::uniform(100, Strategy::Defect);
        state.strategies[55] = Strategy::Cooperate;
        let cfg = DynamicsConfig::default();
        let game = pd_matrix(0.1).unwrap();
        let mut rng = rng_from_seed(3);
        let rounds = 10_000;
        let samples: Vec<f64> = (0..rounds)
            .map(|_| {
                play_generation(&state, &net, &game, &cfg, &mut rng)
                    .unwrap()
                    .new_payoffs[55]
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / rounds as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (rounds - 1) as f64;
        // 4 games as selector plus Binomial(16, 1/4) as target, each worth -0.1.
        assert!((var - 0.01 * 3.0).abs() < 0.005, "{var}");
        assert!((mean + 0.8).abs() < 3.0 * (var / rounds as f64).sqrt(), "{mean}");
    }

    #[test]
    fn conservation_on_heterogeneous_graph() {
        let net = build_barabasi_albert(500, 3, 7).unwrap();
        let mut rng = rng_from_seed(4);
        let mut state = crate::engine::init_population(&net, 0.5, false, &mut rng);
        state.payoffs = (0..500).map(|i| ((i * 13) % 17) as f64 / 8.0).collect();
        // r = 0.25 keeps every partial sum exact.
        let game = pd_matrix(0.25).unwrap();
        let cfg = DynamicsConfig {
            w: -3.0,
            ..Default::default()
        };
        let out = play_generation(&state, &net, &game, &cfg, &mut rng).unwrap();
        assert_eq!(out.games_played as usize, net.degree_sum());
        let c = out.game_counts;
        assert_eq!(out.payoff_total, 2.0 * c.cc as f64 + c.cd as f64);
    }

    #[test]
    fn degree_normalization_divides_by_degree() {
        let net = build_barabasi_albert(200, 2, 1).unwrap();
        let state = AgentState::uniform(200, Strategy::Cooperate);
        let game = pd_matrix(0.1).unwrap();
        let raw = play_generation(&state, &net, &game, &DynamicsConfig::default(), &mut rng_from_seed(5)).unwrap();
        let cfg = DynamicsConfig {
            normalization: PayoffNormalization::Degree,
            ..Default::default()
        };
        let norm = play_generation(&state, &net, &game, &cfg, &mut rng_from_seed(5)).unwrap();
        for x in 0..200 {
            assert_eq!(norm.new_payoffs[x], raw.new_payoffs[x] / net.degree(x) as f64);
        }
        let cfg = DynamicsConfig {
            normalization: PayoffNormalization::RealizedGames,
            ..Default::default()
        };
        // All-C: every realized game pays exactly R = 1.
        let realized = play_generation(&state, &net, &game, &cfg, &mut rng_from_seed(5)).unwrap();
        assert!(realized.new_payoffs.iter().all(|&p| p == 1.0));
    }
}
