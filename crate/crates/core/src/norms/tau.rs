//! Graph length of a finite site set: the minimal number of nearest-neighbor
//! edges of a connected subgraph of Z^d whose vertex set contains the set.
//!
//! This is the rectilinear Steiner minimal tree length in unit edges. Exact
//! values come from enumerating Steiner point candidates on the Hanan grid
//! (coordinate products of the terminals); a set of k terminals needs at
//! most k - 2 Steiner points. Beyond the enumeration budget the minimum
//! spanning tree in the l1 metric is returned, flagged as an upper bound.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauResult {
    pub value: u64,
    /// False when the value is the MST upper bound rather than exact.
    pub exact: bool,
}

fn l1(a: &[i64], b: &[i64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum()
}

/// Prim MST total edge weight over the complete l1 graph.
fn mst_length(points: &[Vec<i64>]) -> u64 {
    let n = points.len();
    if n <= 1 {
        return 0;
    }
    let mut in_tree = vec![false; n];
    let mut dist = vec![u64::MAX; n];
    dist[0] = 0;
    let mut total = 0u64;
    for _ in 0..n {
        let mut best = usize::MAX;
        for i in 0..n {
            if !in_tree[i] && (best == usize::MAX || dist[i] < dist[best]) {
                best = i;
            }
        }
        in_tree[best] = true;
        total += dist[best];
        for i in 0..n {
            if !in_tree[i] {
                let w = l1(&points[best], &points[i]);
                if w < dist[i] {
                    dist[i] = w;
                }
            }
        }
    }
    total
}

/// Sum over axes of the coordinate span; every connected subgraph covering
/// the set needs at least this many edges.
fn span_lower_bound(points: &[Vec<i64>]) -> u64 {
    let d = points[0].len();
    (0..d)
        .map(|a| {
            let lo = points.iter().map(|p| p[a]).min().unwrap();
            let hi = points.iter().map(|p| p[a]).max().unwrap();
            (hi - lo) as u64
        })
        .sum()
}

fn hanan_candidates(points: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let d = points[0].len();
    let mut per_axis: Vec<Vec<i64>> = Vec::with_capacity(d);
    for a in 0..d {
        let mut vals: Vec<i64> = points.iter().map(|p| p[a]).collect();
        vals.sort_unstable();
        vals.dedup();
        per_axis.push(vals);
    }
    let mut grid = vec![Vec::new()];
    for axis_vals in &per_axis {
        let mut next = Vec::with_capacity(grid.len() * axis_vals.len());
        for partial in &grid {
            for &v in axis_vals {
                let mut p = partial.clone();
                p.push(v);
                next.push(p);
            }
        }
        grid = next;
    }
    grid.retain(|p| !points.contains(p));
    grid
}

fn combinations_count(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

const ENUMERATION_BUDGET: u128 = 3_000_000;

/// Graph length tau(C). Exact for |C| <= 6 whenever the Hanan enumeration
/// fits the work budget (always in d <= 2); otherwise the MST bound with
/// `exact: false`, unless the span lower bound certifies it.
pub fn tau(sites: &[Vec<i64>]) -> Result<TauResult> {
    if sites.is_empty() {
        return Err(Error::InvalidParameter("tau of the empty set".into()));
    }
    let d = sites[0].len();
    if d == 0 || sites.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidParameter(
            "tau: sites must share a positive dimension".into(),
        ));
    }
    let mut points: Vec<Vec<i64>> = sites.to_vec();
    points.sort();
    points.dedup();
    let k = points.len();
    if k == 1 {
        return Ok(TauResult { value: 0, exact: true });
    }
    if k == 2 {
        return Ok(TauResult {
            value: l1(&points[0], &points[1]),
            exact: true,
        });
    }
    if d == 1 {
        return Ok(TauResult {
            value: span_lower_bound(&points),
            exact: true,
        });
    }

    let mst = mst_length(&points);
    let lower = span_lower_bound(&points);
    if mst == lower {
        return Ok(TauResult { value: mst, exact: true });
    }
    if k > 6 {
        return Ok(TauResult { value: mst, exact: false });
    }

    let candidates = hanan_candidates(&points);
    let max_steiner = k - 2;
    let mut work: u128 = 0;
    let mut feasible_k = 0usize;
    for s in 0..=max_steiner {
        work += combinations_count(candidates.len(), s);
        if work <= ENUMERATION_BUDGET {
            feasible_k = s;
        } else {
            break;
        }
    }

    let mut best = mst;
    let mut chosen = vec![0usize; 0];
    let mut stack_points = points.clone();
    // Depth-first enumeration of candidate subsets up to feasible_k.
    fn recurse(
        candidates: &[Vec<i64>],
        start: usize,
        remaining: usize,
        chosen: &mut Vec<usize>,
        pts: &mut Vec<Vec<i64>>,
        best: &mut u64,
    ) {
        let len = mst_length(pts);
        if len < *best {
            *best = len;
        }
        if remaining == 0 {
            return;
        }
        for i in start..candidates.len() {
            chosen.push(i);
            pts.push(candidates[i].clone());
            recurse(candidates, i + 1, remaining - 1, chosen, pts, best);
            pts.pop();
            chosen.pop();
        }
    }
    recurse(
        &candidates,
        0,
        feasible_k,
        &mut chosen,
        &mut stack_points,
        &mut best,
    );

    let exact = feasible_k == max_steiner || best == lower;
    Ok(TauResult { value: best, exact })
}
