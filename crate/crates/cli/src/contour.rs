//! Marching squares with linear interpolation along cell edges.

use std::collections::HashMap;

use safeguard_core::sim::GridValues;

/// A grid edge: horizontal edges join `(i, j)–(i+1, j)`, vertical edges
/// join `(i, j)–(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    Horizontal(usize, usize),
    Vertical(usize, usize),
}

struct Segment {
    ends: [EdgeKey; 2],
    points: [(f64, f64); 2],
}

fn crossing(grid: &GridValues, key: EdgeKey, iso: f64) -> (f64, f64) {
    let s = &grid.spec;
    let (p, q) = match key {
        EdgeKey::Horizontal(i, j) => ((i, j), (i + 1, j)),
        EdgeKey::Vertical(i, j) => ((i, j), (i, j + 1)),
    };
    let (vp, vq) = (grid.at(p.0, p.1), grid.at(q.0, q.1));
    let t = if vq != vp { ((iso - vp) / (vq - vp)).clamp(0.0, 1.0) } else { 0.5 };
    let (xp, yp) = (s.x(p.0), s.y(p.1));
    let (xq, yq) = (s.x(q.0), s.y(q.1));
    (xp + t * (xq - xp), yp + t * (yq - yp))
}

fn segments(grid: &GridValues, iso: f64) -> Vec<Segment> {
    let (nx, ny) = (grid.spec.nx, grid.spec.ny);
    let mut out = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let corners = [grid.at(i, j), grid.at(i + 1, j), grid.at(i + 1, j + 1), grid.at(i, j + 1)];
            if corners.iter().any(|v| v.is_nan()) {
                continue;
            }
            let above = corners.map(|v| v >= iso);
            let bottom = EdgeKey::Horizontal(i, j);
            let right = EdgeKey::Vertical(i + 1, j);
            let top = EdgeKey::Horizontal(i, j + 1);
            let left = EdgeKey::Vertical(i, j);
            // edges in corner order: c0–c1, c1–c2, c2–c3, c3–c0
            let ring = [bottom, right, top, left];
            let cut: Vec<EdgeKey> = (0..4).filter(|&k| above[k] != above[(k + 1) % 4]).map(|k| ring[k]).collect();
            let mut push = |a: EdgeKey, b: EdgeKey| {
                out.push(Segment {
                    ends: [a, b],
                    points: [crossing(grid, a, iso), crossing(grid, b, iso)],
                })
            };
            match cut.len() {
                2 => push(cut[0], cut[1]),
                4 => {
                    // saddle: isolate the corners that disagree with the cell center
                    let center = corners.iter().sum::<f64>() / 4.0 >= iso;
                    let corner_edges = [(bottom, left), (bottom, right), (right, top), (left, top)];
                    for k in 0..4 {
                        if above[k] != center {
                            push(corner_edges[k].0, corner_edges[k].1);
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Contour polylines of `grid` at `iso`. Closed loops repeat their first
/// point at the end.
pub fn contour_lines(grid: &GridValues, iso: f64) -> Vec<Vec<(f64, f64)>> {
    let segs = segments(grid, iso);
    let mut by_edge: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (k, s) in segs.iter().enumerate() {
        for e in s.ends {
            by_edge.entry(e).or_default().push(k);
        }
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();

    // open polylines start at an edge touched by a single segment
    let mut starts: Vec<usize> = (0..segs.len())
        .filter(|&k| segs[k].ends.iter().any(|e| by_edge[e].len() == 1))
        .collect();
    starts.extend(0..segs.len());

    for start in starts {
        if used[start] {
            continue;
        }
        let s = &segs[start];
        // orient the first segment so that its free end leads
        let (mut at, mut line) = if by_edge[&s.ends[0]].len() == 1 {
            (s.ends[1], vec![s.points[0], s.points[1]])
        } else {
            (s.ends[0], vec![s.points[1], s.points[0]])
        };
        used[start] = true;
        loop {
            let next = by_edge[&at].iter().copied().find(|&k| !used[k]);
            let Some(k) = next else { break };
            used[k] = true;
            let seg = &segs[k];
            let (far, point) = if seg.ends[0] == at {
                (seg.ends[1], seg.points[1])
            } else {
                (seg.ends[0], seg.points[0])
            };
            line.push(point);
            at = far;
        }
        lines.push(line);
    }
    lines
}
