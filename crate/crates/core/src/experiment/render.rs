use std::path::Path;

use crate::error::{Error, Result};
use crate::game::Strategy;
use crate::observables::SelectionSnapshot;

/// Pixels between cell centres.
const PITCH: usize = 16;
/// Side of the strategy square drawn in each cell.
const CELL: usize = 8;
const BACKGROUND: [u8; 3] = [176, 190, 214];
const DOT: [u8; 3] = [220, 40, 40];

fn weight_gray(weight: f64) -> u8 {
    (255.0 * (1.0 - weight.clamp(0.0, 1.0))).round() as u8
}

/// Renders a lattice snapshot as a binary PPM (P6) image.
///
/// Each cell is a square (black = cooperator, white = defector) with a red
/// dot at its centre marking it as the reference node of the half-segments
/// that leave it. The half-segment from x towards neighbour z is drawn in
/// gray, from white (weight 0) to black (weight 1). Links that wrap around
/// the torus are not drawn.
pub fn render_ppm(snapshot: &SelectionSnapshot) -> Result<Vec<u8>> {
    let side = snapshot
        .lattice_side
        .ok_or_else(|| Error::UnsupportedTopology("snapshot rendering needs a square lattice".into()))?;
    if side * side != snapshot.strategies.len() {
        return Err(Error::invalid(format!(
            "snapshot has {} nodes, expected {}",
            snapshot.strategies.len(),
            side * side
        )));
    }
    let dim = side * PITCH;
    let mut pixels = vec![0u8; dim * dim * 3];
    for px in pixels.chunks_exact_mut(3) {
        px.copy_from_slice(&BACKGROUND);
    }
    let mut put = |x: usize, y: usize, rgb: [u8; 3]| {
        let i = (y * dim + x) * 3;
        pixels[i..i + 3].copy_from_slice(&rgb);
    };
    let centre = |node: usize| ((node % side) * PITCH + PITCH / 2, (node / side) * PITCH + PITCH / 2);

    for e in &snapshot.edges {
        let (from, to) = (e.from as usize, e.to as usize);
        let (fr, fc) = ((from / side) as isize, (from % side) as isize);
        let (tr, tc) = ((to / side) as isize, (to % side) as isize);
        let (dy, dx) = (tr - fr, tc - fc);
        if dx.abs() > 1 || dy.abs() > 1 {
            continue;
        }
        let g = weight_gray(e.weight);
        let (cx, cy) = centre(from);
        for t in (CELL / 2 + 1)..=(PITCH / 2) {
            let x = cx as isize + dx * t as isize;
            let y = cy as isize + dy * t as isize;
            // two pixels wide
            let (ox, oy) = if dx == 0 { (1, 0) } else { (0, 1) };
            put(x as usize, y as usize, [g; 3]);
            put((x + ox) as usize, (y + oy) as usize, [g; 3]);
        }
    }
    for (node, s) in snapshot.strategies.iter().enumerate() {
        let (cx, cy) = centre(node);
        let fill = match s {
            Strategy::Cooperate => [0, 0, 0],
            Strategy::Defect => [255, 255, 255],
        };
        for y in cy - CELL / 2..cy + CELL / 2 {
            for x in cx - CELL / 2..cx + CELL / 2 {
                put(x, y, fill);
            }
        }
        for (x, y) in [(cx - 1, cy - 1), (cx, cy - 1), (cx - 1, cy), (cx, cy)] {
            put(x, y, DOT);
        }
    }

    let mut out = format!("P6\n{dim} {dim}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}

pub fn render_snapshot(snapshot: &SelectionSnapshot, path: &Path) -> Result<()> {
    let bytes = render_ppm(snapshot)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
