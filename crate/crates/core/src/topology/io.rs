//! Edge-list text format: a header line `n <node_count>`, then one `u v`
//! line per undirected edge with `u < v`.

use std::io::{BufRead, Write};

use super::{Network, Topology};
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(net: &Network, mut out: W) -> std::io::Result<()> {
    writeln!(out, "n {}", net.node_count())?;
    for (u, v) in net.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}

/// Parses an edge list. The result is tagged [`Topology::Custom`] and is not
/// validated; edges are normalized so either endpoint order is accepted.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<Network> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let mut fields = line.split_whitespace();
        let Some(first) = fields.next() else { continue };
        let bad = |message: String| Error::Parse { line: line_no, message };
        match n {
            None => {
                if first != "n" {
                    return Err(bad(format!("expected header `n <count>`, found `{line}`")));
                }
                let count = fields
                    .next()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| bad("header node count missing or not an integer".into()))?;
                n = Some(count);
            }
            Some(count) => {
                let parse = |s: Option<&str>| -> Result<u32> {
                    let s = s.ok_or_else(|| bad("edge line needs two node indices".into()))?;
                    let v: u32 = s.parse().map_err(|_| bad(format!("`{s}` is not a node index")))?;
                    if v as usize >= count {
                        return Err(bad(format!("node {v} out of range for n = {count}")));
                    }
                    Ok(v)
                };
                let u = parse(Some(first))?;
                let v = parse(fields.next())?;
                if fields.next().is_some() {
                    return Err(bad("trailing fields on edge line".into()));
                }
                edges.push((u.min(v), u.max(v)));
            }
        }
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        message: "empty edge list".into(),
    })?;
    Ok(Network::from_edges(n, &edges, Topology::Custom, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_barabasi_albert, validate};

    #[test]
    fn written_list_reloads_to_same_adjacency() {
        let net = build_barabasi_albert(300, 2, 4).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&net, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n 300\n"));
        assert!(text.lines().skip(1).all(|l| {
            let v: Vec<u32> = l.split(' ').map(|s| s.parse().unwrap()).collect();
            v.len() == 2 && v[0] < v[1]
        }));
        let back = read_edge_list(buf.as_slice()).unwrap();
        assert!(validate(&back).passed());
        assert_eq!(back.edges().collect::<Vec<_>>(), net.edges().collect::<Vec<_>>());
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let err = read_edge_list("n 3\n0 1\n1 x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_edge_list("n 3\n0 5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(read_edge_list("0 1\n".as_bytes()).is_err());
    }
}
