//! Contact networks in compressed adjacency form.
//!
//! Node identity is a dense index `0..n`. Neighbour lists are stored as one
//! flat array sliced by an offset array, so that `neighbours(x)` is a borrow
//! of a contiguous run of `u32` indices.

mod generators;
mod io;
mod validate;

pub use generators::{build_barabasi_albert, build_complete, build_erdos_renyi, build_lattice, build_regular_random};
pub use io::{read_edge_list, write_edge_list};
pub use validate::{validate, ValidationReport};

/// Lattice neighbourhood shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Neighbourhood {
    /// Up, down, left, right.
    VonNeumann4,
    /// Von Neumann plus the four diagonals.
    Moore8,
}

impl Neighbourhood {
    pub fn degree(self) -> usize {
        match self {
            Neighbourhood::VonNeumann4 => 4,
            Neighbourhood::Moore8 => 8,
        }
    }
}

/// Generator family together with the parameters it was built from.
#[derive(Clone, Debug, PartialEq)]
pub enum Topology {
    Lattice2D {
        side: usize,
        neighbourhood: Neighbourhood,
    },
    RegularRandom {
        n: usize,
        k: usize,
    },
    ErdosRenyi {
        n: usize,
        mean_degree: f64,
    },
    BarabasiAlbert {
        n: usize,
        m: usize,
    },
    /// Complete graph, the well-mixed control.
    Complete {
        n: usize,
    },
    /// Hand-built or loaded from an edge list.
    Custom,
}

impl Topology {
    /// Whether two realizations with different seeds can differ.
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            Topology::RegularRandom { .. } | Topology::ErdosRenyi { .. } | Topology::BarabasiAlbert { .. }
        )
    }
}

/// Immutable undirected contact graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    offsets: Vec<usize>,
    neighbours: Vec<u32>,
    topology: Topology,
    seed: u64,
}

impl Network {
    /// Builds a network from per-node neighbour lists without checking them.
    ///
    /// Run [`validate`] before simulating on a network built this way.
    pub fn from_adjacency(lists: &[Vec<u32>], topology: Topology, seed: u64) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut neighbours = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        offsets.push(0);
        for list in lists {
            neighbours.extend_from_slice(list);
            offsets.push(neighbours.len());
        }
        Network {
            offsets,
            neighbours,
            topology,
            seed,
        }
    }

    /// Builds a network from an undirected edge list. Neighbour lists come out sorted.
    pub fn from_edges(n: usize, edges: &[(u32, u32)], topology: Topology, seed: u64) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbours = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            neighbours[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbours[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for x in 0..n {
            neighbours[offsets[x]..offsets[x + 1]].sort_unstable();
        }
        Network {
            offsets,
            neighbours,
            topology,
            seed,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbours(&self, x: usize) -> &[u32] {
        &self.neighbours[self.offsets[x]..self.offsets[x + 1]]
    }

    #[inline]
    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.offsets.windows(2).map(|w| w[1] - w[0])
    }

    /// Sum of all degrees, i.e. twice the edge count for a valid network.
    pub fn degree_sum(&self) -> usize {
        self.neighbours.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbours.len() / 2
    }

    /// Undirected edges as `(u, v)` with `u < v`, in node order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |x| {
            self.neighbours(x)
                .iter()
                .filter(move |&&z| (x as u32) < z)
                .map(move |&z| (x as u32, z))
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Side length when this is a square lattice.
    pub fn lattice_side(&self) -> Option<usize> {
        match self.topology {
            Topology::Lattice2D { side, .. } => Some(side),
            _ => None,
        }
    }
}
