use rand::seq::SliceRandom;
use rand::Rng;

use super::{Neighbourhood, Network, Topology};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

const RRG_MAX_RESTARTS: usize = 200;
const ER_MAX_REPAIR_ROUNDS: usize = 200;

/// Periodic square lattice; node `(i, j)` has index `i * side + j`.
///
/// Neighbour order is up, down, left, right, then (Moore only) up-left,
/// up-right, down-left, down-right.
pub fn build_lattice(side: usize, neighbourhood: Neighbourhood) -> Result<Network> {
    if side < 3 {
        return Err(Error::invalid(format!(
            "lattice side must be at least 3 (got {side}); smaller tori wrap onto duplicate edges"
        )));
    }
    let n = side
        .checked_mul(side)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::invalid(format!("lattice side {side} too large")))?;
    let idx = |i: usize, j: usize| (i * side + j) as u32;
    let mut lists = Vec::with_capacity(n);
    for i in 0..side {
        let up = (i + side - 1) % side;
        let down = (i + 1) % side;
        for j in 0..side {
            let left = (j + side - 1) % side;
            let right = (j + 1) % side;
            let mut list = vec![idx(up, j), idx(down, j), idx(i, left), idx(i, right)];
            if neighbourhood == Neighbourhood::Moore8 {
                list.extend([idx(up, left), idx(up, right), idx(down, left), idx(down, right)]);
            }
            lists.push(list);
        }
    }
    Ok(Network::from_adjacency(
        &lists,
        Topology::Lattice2D { side, neighbourhood },
        0,
    ))
}

/// Uniform-ish simple k-regular graph by stub pairing.
///
/// Stubs are paired at random while refusing self-loops and multi-edges; when
/// no admissible pair remains the whole pairing restarts.
pub fn build_regular_random(n: usize, k: usize, seed: u64) -> Result<Network> {
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "regular graph needs 0 < k < n (got n={n}, k={k})"
        )));
    }
    if !(n * k).is_multiple_of(2) {
        return Err(Error::invalid(format!("n*k must be even (got n={n}, k={k})")));
    }
    check_node_count(n)?;
    let topology = Topology::RegularRandom { n, k };
    if k == n - 1 {
        return Ok(complete_with(n, topology, seed));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..RRG_MAX_RESTARTS {
        if let Some(lists) = try_pairing(n, k, &mut rng) {
            let edges: Vec<(u32, u32)> = lists
                .iter()
                .enumerate()
                .flat_map(|(x, l)| l.iter().filter(move |&&z| (x as u32) < z).map(move |&z| (x as u32, z)))
                .collect();
            return Ok(Network::from_edges(n, &edges, topology, seed));
        }
    }
    Err(Error::GenerationFailure(format!(
        "no simple {k}-regular pairing on {n} nodes after {RRG_MAX_RESTARTS} restarts"
    )))
}

fn try_pairing(n: usize, k: usize, rng: &mut SimRng) -> Option<Vec<Vec<u32>>> {
    let mut pool: Vec<u32> = (0..n as u32).flat_map(|x| std::iter::repeat_n(x, k)).collect();
    pool.shuffle(rng);
    let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(k); n];
    let admissible = |lists: &[Vec<u32>], u: u32, v: u32| u != v && !lists[u as usize].contains(&v);

    while !pool.is_empty() {
        let mut picked = None;
        for _ in 0..64 {
            let i = rng.random_range(0..pool.len());
            let j = rng.random_range(0..pool.len());
            if i != j && admissible(&lists, pool[i], pool[j]) {
                picked = Some((i, j));
                break;
            }
        }
        let (i, j) = match picked {
            Some(p) => p,
            None => {
                // Rejection is stalling; fall back to an exact scan.
                let mut candidates = Vec::new();
                for i in 0..pool.len() {
                    for j in i + 1..pool.len() {
                        if admissible(&lists, pool[i], pool[j]) {
                            candidates.push((i, j));
                        }
                    }
                }
                if candidates.is_empty() {
                    return None;
                }
                candidates[rng.random_range(0..candidates.len())]
            }
        };
        let (u, v) = (pool[i], pool[j]);
        lists[u as usize].push(v);
        lists[v as usize].push(u);
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        pool.swap_remove(hi);
        pool.swap_remove(lo);
    }
    Some(lists)
}

/// G(n, p) with `p = mean_degree / (n - 1)`, with isolated nodes repaired.
///
/// Pairs are sampled by geometric skipping. Each node left isolated has its
/// (all absent) incident pairs redrawn with the same p until it gains an edge;
/// this keeps n exact.
pub fn build_erdos_renyi(n: usize, mean_degree: f64, seed: u64) -> Result<Network> {
    if n < 2 {
        return Err(Error::invalid(format!("Erdos-Renyi graph needs n >= 2 (got {n})")));
    }
    check_node_count(n)?;
    if !(mean_degree >= 1.0 && mean_degree <= (n - 1) as f64) {
        return Err(Error::invalid(format!(
            "mean degree must lie in [1, n-1] (got {mean_degree} for n={n})"
        )));
    }
    let p = mean_degree / (n - 1) as f64;
    let topology = Topology::ErdosRenyi { n, mean_degree };
    if p >= 1.0 {
        return Ok(complete_with(n, topology, seed));
    }
    let mut rng = rng_from_seed(seed);
    let log_q = (1.0 - p).ln();
    let skip = |rng: &mut SimRng| -> usize {
        let u: f64 = rng.random();
        ((1.0 - u).ln() / log_q).floor() as usize
    };

    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
    // Batagelj-Brandes over the lower triangle (v > w).
    let (mut v, mut w) = (1usize, 0usize);
    w = w.wrapping_sub(1);
    while v < n {
        w = w.wrapping_add(1).wrapping_add(skip(&mut rng));
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            lists[v].push(w as u32);
            lists[w].push(v as u32);
        }
    }

    for _ in 0..ER_MAX_REPAIR_ROUNDS {
        let isolated: Vec<usize> = (0..n).filter(|&x| lists[x].is_empty()).collect();
        if isolated.is_empty() {
            for l in &mut lists {
                l.sort_unstable();
            }
            return Ok(Network::from_adjacency(&lists, topology, seed));
        }
        for x in isolated {
            if !lists[x].is_empty() {
                // Picked up an edge from an earlier repair this round.
                continue;
            }
            // Candidates are the n-1 other nodes, in order, skipping x.
            let mut c = skip(&mut rng);
            while c < n - 1 {
                let z = if c < x { c } else { c + 1 };
                lists[x].push(z as u32);
                lists[z].push(x as u32);
                c += 1 + skip(&mut rng);
            }
        }
    }
    Err(Error::GenerationFailure(format!(
        "isolated nodes remain after {ER_MAX_REPAIR_ROUNDS} repair rounds (n={n}, mean degree {mean_degree}); mean degree too small"
    )))
}

/// Preferential attachment grown from an (m+1)-clique.
///
/// Each arriving node attaches to m distinct existing nodes drawn in
/// proportion to their current degree.
pub fn build_barabasi_albert(n: usize, m: usize, seed: u64) -> Result<Network> {
    if m == 0 || n <= m {
        return Err(Error::invalid(format!(
            "Barabasi-Albert needs n > m >= 1 (got n={n}, m={m})"
        )));
    }
    check_node_count(n)?;
    let mut rng = rng_from_seed(seed);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // Every edge endpoint once; uniform draws from it are degree-proportional.
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * edges.capacity());
    for u in 0..=m as u32 {
        for v in u + 1..=m as u32 {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut chosen: Vec<u32> = Vec::with_capacity(m);
    for v in (m + 1)..n {
        chosen.clear();
        while chosen.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, v as u32));
            endpoints.extend([t, v as u32]);
        }
    }
    Ok(Network::from_edges(n, &edges, Topology::BarabasiAlbert { n, m }, seed))
}

/// Complete graph on n nodes.
pub fn build_complete(n: usize) -> Result<Network> {
    if n < 2 {
        return Err(Error::invalid(format!("complete graph needs n >= 2 (got {n})")));
    }
    check_node_count(n)?;
    Ok(complete_with(n, Topology::Complete { n }, 0))
}

fn complete_with(n: usize, topology: Topology, seed: u64) -> Network {
    let lists: Vec<Vec<u32>> = (0..n as u32)
        .map(|x| (0..n as u32).filter(|&z| z != x).collect())
        .collect();
    Network::from_adjacency(&lists, topology, seed)
}

fn check_node_count(n: usize) -> Result<()> {
    if n > u32::MAX as usize {
        return Err(Error::invalid(format!("node count {n} exceeds u32 index range")));
    }
    Ok(())
}
