//! Payoff-biased choice of game partners.
//!
//! Neighbour z of focal agent x gets unnormalized weight
//! `1 / (1 + exp(w * (P_z - P_x)))`, so negative w favours stronger
//! neighbours and positive w weaker ones. `w = -inf` / `+inf` select
//! uniformly among the strongest / weakest neighbours.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::topology::Network;

/// Neighbour count above which sampling switches from a linear scan to
/// binary search over prefix sums.
const LINEAR_SCAN_MAX: usize = 16;

/// Probability of choosing each neighbour of a focal node, in neighbour order.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionDistribution {
    pub neighbours: Vec<u32>,
    pub probabilities: Vec<f64>,
}

/// `1 / (1 + e^u)` without overflow.
#[inline]
pub(crate) fn logistic_of_neg(u: f64) -> f64 {
    if u > 0.0 {
        let e = (-u).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + u.exp())
    }
}

/// `ln(1 + e^u)` without overflow.
#[inline]
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

fn non_finite(node: usize, value: f64) -> Error {
    Error::Corruption(format!("payoff of node {node} is {value}"))
}

/// Writes unnormalized selection weights for x's neighbours into `out`.
///
/// At least one weight is strictly positive on return.
pub(crate) fn raw_weights(x: usize, payoffs: &[f64], neighbours: &[u32], w: f64, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    let px = payoffs[x];
    if !px.is_finite() {
        return Err(non_finite(x, px));
    }
    if w.is_nan() {
        return Err(Error::Corruption(format!("selection bias of node {x} is NaN")));
    }
    for &z in neighbours {
        let pz = payoffs[z as usize];
        if !pz.is_finite() {
            return Err(non_finite(z as usize, pz));
        }
    }

    if w == 0.0 {
        out.resize(neighbours.len(), 1.0);
        return Ok(());
    }
    if w.is_infinite() {
        extreme_weights(payoffs, neighbours, w < 0.0, out);
        return Ok(());
    }

    let mut u_min = f64::INFINITY;
    out.extend(neighbours.iter().map(|&z| {
        let u = w * (payoffs[z as usize] - px);
        u_min = u_min.min(u);
        u
    }));
    if u_min <= 30.0 {
        // The largest weight is at least 1e-13; direct evaluation keeps
        // every ratio representable.
        for u in out.iter_mut() {
            *u = logistic_of_neg(*u);
        }
    } else if u_min.is_finite() {
        // Every weight is tiny; rescale by the largest in log space.
        let top = softplus(u_min);
        for u in out.iter_mut() {
            *u = (top - softplus(*u)).exp();
        }
    } else {
        // w * dP overflowed for every neighbour: treat as the deterministic limit.
        extreme_weights(payoffs, neighbours, w < 0.0, out);
    }
    Ok(())
}

fn extreme_weights(payoffs: &[f64], neighbours: &[u32], strongest: bool, out: &mut Vec<f64>) {
    out.clear();
    let values = neighbours.iter().map(|&z| payoffs[z as usize]);
    let target = if strongest {
        values.fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.fold(f64::INFINITY, f64::min)
    };
    out.extend(
        neighbours
            .iter()
            .map(|&z| if payoffs[z as usize] == target { 1.0 } else { 0.0 }),
    );
}

/// Normalized selection distribution of focal node `x` under bias `w`.
///
/// `payoffs` is the selection signal (previous generation's payoffs).
pub fn selection_weights(x: usize, payoffs: &[f64], net: &Network, w: f64) -> Result<SelectionDistribution> {
    let neighbours = net.neighbours(x);
    if neighbours.is_empty() {
        return Err(Error::InvalidNetwork(format!("node {x} has no neighbours")));
    }
    let mut weights = Vec::with_capacity(neighbours.len());
    raw_weights(x, payoffs, neighbours, w, &mut weights)?;
    let total: f64 = weights.iter().sum();
    for p in &mut weights {
        *p /= total;
    }
    Ok(SelectionDistribution {
        neighbours: neighbours.to_vec(),
        probabilities: weights,
    })
}

/// Draws a neighbour by inverse-CDF sampling.
///
/// # Panics
/// If the distribution is empty.
pub fn sample_partner(dist: &SelectionDistribution, rng: &mut SimRng) -> u32 {
    assert!(!dist.probabilities.is_empty(), "empty selection distribution");
    let total: f64 = dist.probabilities.iter().sum();
    dist.neighbours[sample_linear(&dist.probabilities, total, rng)]
}

/// Index drawn in proportion to `weights`, which must have a positive sum.
#[inline]
pub(crate) fn sample_linear(weights: &[f64], total: f64, rng: &mut SimRng) -> usize {
    let mut t = rng.random::<f64>() * total;
    for (i, &wt) in weights.iter().enumerate() {
        t -= wt;
        if t < 0.0 {
            return i;
        }
    }
    last_positive(weights)
}

/// Same as [`sample_linear`] for weights already turned into prefix sums.
#[inline]
pub(crate) fn sample_prefix(prefix: &[f64], rng: &mut SimRng) -> usize {
    let total = *prefix.last().unwrap();
    let t = rng.random::<f64>() * total;
    let i = prefix.partition_point(|&c| c <= t);
    if i < prefix.len() {
        i
    } else {
        // t rounded up to the total; take the last entry with positive mass.
        let mut j = prefix.len() - 1;
        while j > 0 && prefix[j] == prefix[j - 1] {
            j -= 1;
        }
        j
    }
}

fn last_positive(weights: &[f64]) -> usize {
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Reusable sampler over one node's neighbour weights.
pub(crate) struct NeighbourSampler {
    weights: Vec<f64>,
    total: f64,
    prefix: bool,
}

impl NeighbourSampler {
    pub(crate) fn new() -> Self {
        NeighbourSampler {
            weights: Vec::new(),
            total: 0.0,
            prefix: false,
        }
    }

    pub(crate) fn load(&mut self, x: usize, payoffs: &[f64], neighbours: &[u32], w: f64) -> Result<()> {
        raw_weights(x, payoffs, neighbours, w, &mut self.weights)?;
        self.prefix = self.weights.len() > LINEAR_SCAN_MAX;
        if self.prefix {
            let mut acc = 0.0;
            for wt in &mut self.weights {
                acc += *wt;
                *wt = acc;
            }
            self.total = acc;
        } else {
            self.total = self.weights.iter().sum();
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn draw(&self, rng: &mut SimRng) -> usize {
        if self.prefix {
            sample_prefix(&self.weights, rng)
        } else {
            sample_linear(&self.weights, self.total, rng)
        }
    }
}
