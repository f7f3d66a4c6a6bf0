//! Distances between coefficient vectors and between diagrams.
//!
//! For coefficient vectors `a, a'` of equal length `k`:
//!
//! ```text
//! d1 = Σ |a_j − a'_j|      d2 = Σ |a_j − a'_j| / j      d3 = Σ |a_j − a'_j|^(1/j)
//! ```
//!
//! The bottleneck distance uses the point cost
//! `d(p, q) = min(max(|u − u'|, |v − v'|), max((v − u)/2, (v' − u')/2))`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::viete::CoefficientVector;

/// Largest `r + r'` accepted by [`bottleneck_bruteforce`].
pub const BRUTEFORCE_CAP: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoeffMetric {
    D1,
    D2,
    D3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Coeff(CoeffMetric),
    Bottleneck,
}

impl CoeffMetric {
    pub const ALL: [CoeffMetric; 3] = [CoeffMetric::D1, CoeffMetric::D2, CoeffMetric::D3];

    fn term(self, j: usize, diff: f64) -> f64 {
        match self {
            CoeffMetric::D1 => diff,
            CoeffMetric::D2 => diff / j as f64,
            CoeffMetric::D3 => match j {
                1 => diff,
                2 => diff.sqrt(),
                _ => diff.powf(1.0 / j as f64),
            },
        }
    }
}

impl fmt::Display for CoeffMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffMetric::D1 => "d1",
            CoeffMetric::D2 => "d2",
            CoeffMetric::D3 => "d3",
        })
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Coeff(m) => m.fmt(f),
            MetricKind::Bottleneck => f.write_str("bottleneck"),
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d1" => Ok(MetricKind::Coeff(CoeffMetric::D1)),
            "d2" => Ok(MetricKind::Coeff(CoeffMetric::D2)),
            "d3" => Ok(MetricKind::Coeff(CoeffMetric::D3)),
            "bottleneck" => Ok(MetricKind::Bottleneck),
            other => Err(Error::InvalidArgument(format!(
                "unknown metric {other:?}, expected d1, d2, d3 or bottleneck"
            ))),
        }
    }
}

impl FromStr for CoeffMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<MetricKind>()? {
            MetricKind::Coeff(m) => Ok(m),
            MetricKind::Bottleneck => Err(Error::InvalidArgument(
                "bottleneck is not a coefficient metric".into(),
            )),
        }
    }
}

pub fn coeff_distance(
    a: &CoefficientVector,
    b: &CoefficientVector,
    kind: CoeffMetric,
) -> Result<f64> {
    if a.k() != b.k() {
        return Err(Error::LengthMismatch {
            left: a.k(),
            right: b.k(),
        });
    }
    Ok(a.coefficients()
        .iter()
        .zip(b.coefficients())
        .enumerate()
        .map(|(i, (x, y))| kind.term(i + 1, (x - y).norm()))
        .sum())
}

/// Cost of pairing two points of the closed half-plane `u <= v`.
pub fn point_distance(p: (f64, f64), q: (f64, f64)) -> Result<f64> {
    for &(u, v) in &[p, q] {
        if !u.is_finite() || !v.is_finite() || u > v {
            return Err(Error::InvalidPoint {
                birth: u,
                death: v,
                reason: "expected finite u <= v",
            });
        }
    }
    Ok(point_cost(p, q))
}

fn point_cost(p: (f64, f64), q: (f64, f64)) -> f64 {
    let direct = (p.0 - q.0).abs().max((p.1 - q.1).abs());
    direct.min(diagonal_cost(p).max(diagonal_cost(q)))
}

/// Cost of matching a point to the diagonal.
fn diagonal_cost(p: (f64, f64)) -> f64 {
    (p.1 - p.0) / 2.0
}

/// Exact bottleneck distance.
///
/// Each side is expanded to unit points and augmented with one diagonal slot
/// per point of the other side. A point may pair with any point of the other
/// side, or with its own diagonal slot at cost `(v − u)/2`; slot-to-slot
/// pairs cost 0. The answer is the smallest candidate cost admitting a
/// perfect matching among pairs of cost `<=` it, found by binary search
/// over the sorted candidate costs.
pub fn bottleneck(d: &PersistenceDiagram, e: &PersistenceDiagram) -> f64 {
    let a: Vec<(f64, f64)> = d.expanded().collect();
    let b: Vec<(f64, f64)> = e.expanded().collect();
    let (n, m) = (a.len(), b.len());
    if n + m == 0 {
        return 0.0;
    }

    let cross: Vec<f64> = a
        .iter()
        .flat_map(|&p| b.iter().map(move |&q| point_cost(p, q)))
        .collect();
    let diag_a: Vec<f64> = a.iter().map(|&p| diagonal_cost(p)).collect();
    let diag_b: Vec<f64> = b.iter().map(|&q| diagonal_cost(q)).collect();

    let mut candidates: Vec<f64> = cross
        .iter()
        .chain(&diag_a)
        .chain(&diag_b)
        .copied()
        .collect();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Left: a_0..a_{n-1}, then diagonal slots for b. Right: b_0..b_{m-1},
    // then diagonal slots for a.
    let graph_at = |t: f64| -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n + m];
        for i in 0..n {
            for j in 0..m {
                if cross[i * m + j] <= t {
                    adj[i].push(j);
                }
            }
            if diag_a[i] <= t {
                adj[i].push(m + i);
            }
        }
        for j in 0..m {
            if diag_b[j] <= t {
                adj[n + j].push(j);
            }
            // Slot-to-slot pairs are free.
            adj[n + j].extend(m..m + n);
        }
        adj
    };

    let feasible = |t: f64| max_matching(&graph_at(t), n + m) == n + m;
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    debug_assert!(feasible(candidates[hi]));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Hopcroft–Karp maximum matching size for a bipartite graph given as
/// left-vertex adjacency lists into `0..right`.
fn max_matching(adj: &[Vec<usize>], right: usize) -> usize {
    const FREE: usize = usize::MAX;
    let left = adj.len();
    let mut match_l = vec![FREE; left];
    let mut match_r = vec![FREE; right];
    let mut dist = vec![0u32; left];
    let mut size = 0;

    loop {
        // BFS layering from free left vertices.
        let mut queue = VecDeque::new();
        for u in 0..left {
            if match_l[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == FREE {
                    found = true;
                } else if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return size;
        }

        fn augment(
            u: usize,
            adj: &[Vec<usize>],
            match_l: &mut [usize],
            match_r: &mut [usize],
            dist: &mut [u32],
        ) -> bool {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == usize::MAX
                    || (dist[w] == dist[u] + 1 && augment(w, adj, match_l, match_r, dist))
                {
                    match_l[u] = v;
                    match_r[v] = u;
                    return true;
                }
            }
            dist[u] = u32::MAX;
            false
        }

        for u in 0..left {
            if match_l[u] == FREE && augment(u, adj, &mut match_l, &mut match_r, &mut dist) {
                size += 1;
            }
        }
    }
}

/// Bottleneck distance by exhaustive search over bijections, for small
/// diagrams (`r + r' <= 8`).
///
/// Each side gets as many anonymous diagonal slots as the other side has
/// points; any point may take any slot at its diagonal cost.
pub fn bottleneck_bruteforce(d: &PersistenceDiagram, e: &PersistenceDiagram) -> Result<f64> {
    let a: Vec<(f64, f64)> = d.expanded().collect();
    let b: Vec<(f64, f64)> = e.expanded().collect();
    let total = (a.len() + b.len()) as u64;
    if total > BRUTEFORCE_CAP {
        return Err(Error::OracleCap {
            total,
            cap: BRUTEFORCE_CAP,
        });
    }
    // None marks a diagonal slot.
    // `None` is an anonymous diagonal slot.
    type Slot = Option<(f64, f64)>;
    let left: Vec<Slot> = a
        .iter()
        .copied()
        .map(Some)
        .chain(b.iter().map(|_| None))
        .collect();
    let right: Vec<Slot> = b
        .iter()
        .copied()
        .map(Some)
        .chain(a.iter().map(|_| None))
        .collect();
    let cost = |p: Slot, q: Slot| match (p, q) {
        (Some(p), Some(q)) => point_cost(p, q),
        (Some(p), None) | (None, Some(p)) => diagonal_cost(p),
        (None, None) => 0.0,
    };

    fn search(
        i: usize,
        worst: f64,
        used: &mut [bool],
        left: &[Slot],
        right: &[Slot],
        cost: &dyn Fn(Slot, Slot) -> f64,
        best: &mut f64,
    ) {
        if i == left.len() {
            *best = best.min(worst);
            return;
        }
        for j in 0..right.len() {
            if used[j] {
                continue;
            }
            let w = worst.max(cost(left[i], right[j]));
            // Branches already at or above the best bijection cannot improve it.
            if w >= *best {
                continue;
            }
            used[j] = true;
            search(i + 1, w, used, left, right, cost, best);
            used[j] = false;
        }
    }

    let mut best = f64::INFINITY;
    let mut used = vec![false; right.len()];
    search(0, 0.0, &mut used, &left, &right, &cost, &mut best);
    Ok(if best.is_finite() { best } else { 0.0 })
}
