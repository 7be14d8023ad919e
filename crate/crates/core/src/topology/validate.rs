use std::collections::HashSet;

use super::Network;

/// Structural check of a network. Failures are reported, not raised.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    /// Directed entries `x -> z` whose reverse `z -> x` is missing.
    pub asymmetric: Vec<(u32, u32)>,
    pub self_loops: Vec<u32>,
    /// Repeated entries `x -> z` within x's list.
    pub duplicates: Vec<(u32, u32)>,
    pub isolated: Vec<u32>,
    /// Neighbour indices that are not valid nodes.
    pub out_of_range: Vec<(u32, u32)>,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.asymmetric.is_empty()
            && self.self_loops.is_empty()
            && self.duplicates.is_empty()
            && self.isolated.is_empty()
            && self.out_of_range.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.passed() {
            return format!(
                "ok (degree min {} / mean {:.3} / max {})",
                self.min_degree, self.mean_degree, self.max_degree
            );
        }
        let mut parts = Vec::new();
        if let Some(&(x, z)) = self.asymmetric.first() {
            parts.push(format!("{} asymmetric entries (first {x}->{z})", self.asymmetric.len()));
        }
        if let Some(x) = self.self_loops.first() {
            parts.push(format!("{} self-loops (first at {x})", self.self_loops.len()));
        }
        if let Some(&(x, z)) = self.duplicates.first() {
            parts.push(format!("{} duplicate entries (first {x}->{z})", self.duplicates.len()));
        }
        if let Some(x) = self.isolated.first() {
            parts.push(format!("{} isolated nodes (first {x})", self.isolated.len()));
        }
        if let Some(&(x, z)) = self.out_of_range.first() {
            parts.push(format!(
                "{} out-of-range entries (first {x}->{z})",
                self.out_of_range.len()
            ));
        }
        parts.join("; ")
    }
}

pub fn validate(net: &Network) -> ValidationReport {
    let n = net.node_count();
    let mut report = ValidationReport {
        min_degree: usize::MAX,
        ..Default::default()
    };
    let mut edges: HashSet<(u32, u32)> = HashSet::with_capacity(net.degree_sum());
    for x in 0..n {
        let deg = net.degree(x);
        report.min_degree = report.min_degree.min(deg);
        report.max_degree = report.max_degree.max(deg);
        if deg == 0 {
            report.isolated.push(x as u32);
        }
        for &z in net.neighbours(x) {
            if z as usize >= n {
                report.out_of_range.push((x as u32, z));
                continue;
            }
            if z as usize == x {
                report.self_loops.push(x as u32);
            }
            if !edges.insert((x as u32, z)) {
                report.duplicates.push((x as u32, z));
            }
        }
    }
    for x in 0..n {
        for &z in net.neighbours(x) {
            if (z as usize) < n && !edges.contains(&(z, x as u32)) {
                report.asymmetric.push((x as u32, z));
            }
        }
    }
    if n == 0 {
        report.min_degree = 0;
    } else {
        report.mean_degree = net.degree_sum() as f64 / n as f64;
    }
    report
}
