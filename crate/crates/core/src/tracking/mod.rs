//! Pairing the ranked modes of neighbouring windows into paths, either by
//! singular values (iterated shortest paths) or by one-step-evolved left
//! singular vectors (greedy matching).

mod io;

pub use io::{parse_paths_csv, write_paths_csv};

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::cocycle::WindowSvd;
use crate::ulam::UlamMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackingError {
    #[error("window {k} has {got} singular values, expected {want}")]
    RankMismatch { k: usize, got: usize, want: usize },
    #[error("no one-step matrix for window {k}")]
    MissingMatrix { k: usize },
    #[error("matrix for window {k} does not act on that window's row space")]
    IndexMismatch { k: usize },
    #[error("no windows to track")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackMethod {
    ByValues,
    ByVectors,
}

impl TrackMethod {
    pub fn name(self) -> &'static str {
        match self {
            TrackMethod::ByValues => "values",
            TrackMethod::ByVectors => "vectors",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "values" => Some(TrackMethod::ByValues),
            "vectors" => Some(TrackMethod::ByVectors),
            _ => None,
        }
    }
}

/// One window's entry on a path. `rank` is 0-based. `sign` is the sign that
/// aligned this window's vector with the previous one (always +1 for value
/// tracking and at the first window).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStep {
    pub rank: usize,
    pub value: f64,
    pub sign: i8,
}

/// `N` mode paths over the same windows, ordered by descending mean value.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedPaths {
    pub method: TrackMethod,
    /// Window start times.
    pub t0: Vec<f64>,
    /// `paths[mode][k]`.
    pub paths: Vec<Vec<PathStep>>,
    /// Window indices `k` whose pairing to `k + 1` fell back to raw vector
    /// distance because a mode lost all mass in one step.
    pub flagged: Vec<usize>,
}

impl TrackedPaths {
    pub fn mode_count(&self) -> usize {
        self.paths.len()
    }

    pub fn window_count(&self) -> usize {
        self.t0.len()
    }

    pub fn mean(&self, mode: usize) -> f64 {
        let p = &self.paths[mode];
        p.iter().map(|s| s.value).sum::<f64>() / p.len() as f64
    }

    /// `ranks()[k][mode]`.
    pub fn ranks(&self) -> Vec<Vec<usize>> {
        (0..self.window_count())
            .map(|k| self.paths.iter().map(|p| p[k].rank).collect())
            .collect()
    }

    /// The path occupying `rank` at window `k`.
    pub fn mode_at(&self, k: usize, rank: usize) -> Option<usize> {
        self.paths.iter().position(|p| p[k].rank == rank)
    }

    fn sorted(method: TrackMethod, t0: Vec<f64>, mut paths: Vec<Vec<PathStep>>, flagged: Vec<usize>) -> Self {
        let mean = |p: &Vec<PathStep>| p.iter().map(|s| s.value).sum::<f64>() / p.len() as f64;
        // Stable: equal means keep extraction order.
        paths.sort_by(|a, b| mean(b).total_cmp(&mean(a)));
        TrackedPaths {
            method,
            t0,
            paths,
            flagged,
        }
    }
}

/// `√((a − b)² + 1)`: plot distance between neighbouring windows one unit
/// apart.
pub fn edge_weight(a: f64, b: f64) -> f64 {
    ((a - b).powi(2) + 1.0).sqrt()
}

fn uniform_rank(svds: &[WindowSvd]) -> Result<usize, TrackingError> {
    let want = svds.first().ok_or(TrackingError::Empty)?.s.len();
    for (k, w) in svds.iter().enumerate() {
        if w.s.len() != want {
            return Err(TrackingError::RankMismatch {
                k,
                got: w.s.len(),
                want,
            });
        }
    }
    Ok(want)
}

/// Pairs modes by repeatedly extracting a minimum-cost path through the
/// layered graph of singular values and deleting its nodes.
pub fn track_by_values(svds: &[WindowSvd]) -> Result<TrackedPaths, TrackingError> {
    uniform_rank(svds)?;
    let values: Vec<Vec<f64>> = svds.iter().map(|w| w.s.clone()).collect();
    let (paths, _) = extract_paths(&values);
    let paths = paths
        .into_iter()
        .map(|ranks| {
            ranks
                .into_iter()
                .enumerate()
                .map(|(k, r)| PathStep {
                    rank: r,
                    value: values[k][r],
                    sign: 1,
                })
                .collect()
        })
        .collect();
    Ok(TrackedPaths::sorted(
        TrackMethod::ByValues,
        svds.iter().map(|w| w.t0).collect(),
        paths,
        Vec::new(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    layer: usize,
    rank: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Reversed for a min-heap on (cost, layer, rank).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.layer.cmp(&self.layer))
            .then(other.rank.cmp(&self.rank))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Iterated Dijkstra on `values[k][rank]` with a zero-cost virtual source
/// before layer 0 and sink after the last layer. Returns the rank sequences
/// in extraction order and their costs. Equal-cost ties go to the lowest
/// rank in the last layer, then to the predecessor that reached its cost
/// first.
pub fn extract_paths(values: &[Vec<f64>]) -> (Vec<Vec<usize>>, Vec<f64>) {
    let layers = values.len();
    let width = values.first().map_or(0, Vec::len);
    let mut alive = vec![vec![true; width]; layers];
    let mut paths = Vec::with_capacity(width);
    let mut costs = Vec::with_capacity(width);
    for _ in 0..width {
        let mut dist = vec![vec![f64::INFINITY; width]; layers];
        let mut prev: Vec<Vec<Option<usize>>> = vec![vec![None; width]; layers];
        let mut done = vec![vec![false; width]; layers];
        let mut heap = BinaryHeap::new();
        for r in (0..width).filter(|&r| alive[0][r]) {
            dist[0][r] = 0.0;
            heap.push(Entry {
                cost: 0.0,
                layer: 0,
                rank: r,
            });
        }
        let mut best_end: Option<(f64, usize)> = None;
        while let Some(Entry { cost, layer, rank }) = heap.pop() {
            if done[layer][rank] {
                continue;
            }
            done[layer][rank] = true;
            if layer + 1 == layers {
                // The first final-layer node popped is the cheapest way to
                // reach the sink.
                best_end = Some((cost, rank));
                break;
            }
            for r in (0..width).filter(|&r| alive[layer + 1][r]) {
                let c = cost + edge_weight(values[layer][rank], values[layer + 1][r]);
                if c < dist[layer + 1][r] {
                    dist[layer + 1][r] = c;
                    prev[layer + 1][r] = Some(rank);
                    heap.push(Entry {
                        cost: c,
                        layer: layer + 1,
                        rank: r,
                    });
                }
            }
        }
        let Some((cost, mut rank)) = best_end else { break };
        let mut ranks = vec![0; layers];
        for layer in (0..layers).rev() {
            ranks[layer] = rank;
            alive[layer][rank] = false;
            if layer > 0 {
                rank = prev[layer][rank].expect("reached nodes have a predecessor");
            }
        }
        paths.push(ranks);
        costs.push(cost);
    }
    (paths, costs)
}

/// Row vector `uᵀP` as `(bin id, value)` pairs over the columns of `P`.
fn evolve_onto(u: &[f64], p: &UlamMatrix) -> Vec<(usize, f64)> {
    let mut out = vec![0.0; p.ncols()];
    p.weights().tr_mul_vec(u, &mut out);
    p.col_index().iter().copied().zip(out).collect()
}

/// Euclidean distances `‖a − b‖` and `‖a + b‖` between two vectors given on
/// sorted bin-id supports, treating missing entries as zero.
fn signed_distances(a: &[(usize, f64)], b: &[(usize, f64)]) -> (f64, f64) {
    let (mut minus, mut plus) = (0.0, 0.0);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (x, y) = match (a.get(i), b.get(j)) {
            (Some(&(ia, xa)), Some(&(ib, yb))) => match ia.cmp(&ib) {
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (xa, yb)
                }
                Ordering::Less => {
                    i += 1;
                    (xa, 0.0)
                }
                Ordering::Greater => {
                    j += 1;
                    (0.0, yb)
                }
            },
            (Some(&(_, xa)), None) => {
                i += 1;
                (xa, 0.0)
            }
            (None, Some(&(_, yb))) => {
                j += 1;
                (0.0, yb)
            }
            (None, None) => unreachable!(),
        };
        minus += (x - y) * (x - y);
        plus += (x + y) * (x + y);
    }
    (minus.sqrt(), plus.sqrt())
}

/// Greedy matching on a distance table: repeatedly takes the globally
/// smallest remaining `dist[j'][j'']` (ties to the lowest `(j', j'')`).
/// Returns `pairing[j'] = j''`.
pub fn greedy_pairing(dist: &[Vec<f64>]) -> Vec<usize> {
    let n = dist.len();
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (a, row) in dist.iter().enumerate() {
        for (b, &d) in row.iter().enumerate() {
            cand.push((d, a, b));
        }
    }
    cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut pairing = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (_, a, b) in cand {
        if pairing[a] == usize::MAX && !taken[b] {
            pairing[a] = b;
            taken[b] = true;
        }
    }
    pairing
}

/// Distance table and best signs between the evolved vectors of window `k`
/// and the left vectors of window `k + 1`. The flag is set when some evolved
/// vector vanished and the raw vector was used instead.
pub fn vector_distances(cur: &WindowSvd, next: &WindowSvd, p: &UlamMatrix) -> (Vec<Vec<f64>>, Vec<Vec<i8>>, bool) {
    let n = cur.s.len();
    let mut flagged = false;
    let targets: Vec<Vec<(usize, f64)>> = next
        .u
        .iter()
        .map(|u| next.row_index.iter().copied().zip(u.iter().copied()).collect())
        .collect();
    let mut dist = vec![vec![0.0; n]; n];
    let mut sign = vec![vec![1i8; n]; n];
    for a in 0..n {
        let mut w = evolve_onto(&cur.u[a], p);
        let norm = w.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        if norm > 0.0 {
            w.iter_mut().for_each(|e| e.1 /= norm);
        } else {
            flagged = true;
            w = cur.row_index.iter().copied().zip(cur.u[a].iter().copied()).collect();
        }
        for b in 0..n {
            let (minus, plus) = signed_distances(&w, &targets[b]);
            if plus < minus {
                dist[a][b] = plus;
                sign[a][b] = -1;
            } else {
                dist[a][b] = minus;
            }
        }
    }
    (dist, sign, flagged)
}

/// Pairs modes across neighbouring windows by greedy matching of the
/// normalised one-step evolution `u_{k,j'}ᵀP_k / ‖·‖` against `±u_{k+1,j''}`.
///
/// `steps[k]` is the one-step matrix at the start of window `k`; its rows
/// must be that window's row index. Each path starts at its rank in the first
/// window and follows the pairing from there.
pub fn track_by_vectors(svds: &[WindowSvd], steps: &[UlamMatrix]) -> Result<TrackedPaths, TrackingError> {
    let n = uniform_rank(svds)?;
    let windows = svds.len();
    let mut paths: Vec<Vec<PathStep>> = (0..n)
        .map(|j| {
            vec![PathStep {
                rank: j,
                value: svds[0].s[j],
                sign: 1,
            }]
        })
        .collect();
    let mut flagged = Vec::new();
    for k in 0..windows.saturating_sub(1) {
        let p = steps.get(k).ok_or(TrackingError::MissingMatrix { k })?;
        if p.row_index() != svds[k].row_index.as_slice() {
            return Err(TrackingError::IndexMismatch { k });
        }
        let (dist, sign, flag) = vector_distances(&svds[k], &svds[k + 1], p);
        if flag {
            flagged.push(k);
        }
        let pairing = greedy_pairing(&dist);
        for path in paths.iter_mut() {
            let from = path[k].rank;
            let to = pairing[from];
            path.push(PathStep {
                rank: to,
                value: svds[k + 1].s[to],
                sign: sign[from][to],
            });
        }
    }
    Ok(TrackedPaths::sorted(
        TrackMethod::ByVectors,
        svds.iter().map(|w| w.t0).collect(),
        paths,
        flagged,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(t0: f64, s: &[f64], u: Vec<Vec<f64>>) -> WindowSvd {
        let m = u.first().map_or(0, Vec::len);
        WindowSvd {
            t0,
            n: 1,
            s: s.to_vec(),
            v: u.clone(),
            u,
            row_index: (0..m).collect(),
            col_index: (0..m).collect(),
        }
    }

    fn values_only(rows: &[&[f64]]) -> Vec<WindowSvd> {
        rows.iter()
            .enumerate()
            .map(|(k, s)| window(k as f64, s, vec![vec![0.0]; s.len()]))
            .collect()
    }

    fn identity(m: usize, t: f64) -> UlamMatrix {
        let ids: Vec<usize> = (0..m).collect();
        let c: Vec<_> = (0..m).map(|i| (i, i, 1)).collect();
        UlamMatrix::from_counts(t, 1.0, 1, ids.clone(), ids, &c)
    }

    #[test]
    fn edge_weights() {
        assert_eq!(edge_weight(0.4, 0.4), 1.0);
        assert_eq!(edge_weight(1.0, 0.0), 2f64.sqrt());
        assert!((edge_weight(0.2, 0.5) - 1.09f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn flat_values_give_flat_paths() {
        let t = track_by_values(&values_only(&[&[1.0, 0.5], &[1.0, 0.5]])).unwrap();
        assert_eq!(t.ranks(), vec![vec![0, 1], vec![0, 1]]);
        assert_eq!(t.paths[0][1].value, 1.0);
    }

    #[test]
    fn crossing_values_are_followed() {
        let (paths, costs) = extract_paths(&[vec![0.9, 0.5], vec![0.9, 0.5], vec![0.5, 0.9]]);
        // 1,1,0 and 0,0,1 both cost 2 and beat 0,0,0 (1 + √1.16); the tie
        // goes to the lower final rank.
        assert_eq!(paths, vec![vec![1, 1, 0], vec![0, 0, 1]]);
        assert!((costs[0] - 2.0).abs() < 1e-15);
        assert!(costs[1] >= costs[0]);
    }

    #[test]
    fn single_window_is_rank_identity() {
        let t = track_by_values(&values_only(&[&[0.9, 0.3, 0.1]])).unwrap();
        assert_eq!(t.ranks(), vec![vec![0, 1, 2]]);
        let v = track_by_vectors(&values_only(&[&[0.9, 0.3, 0.1]]), &[]).unwrap();
        assert_eq!(v.ranks(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn mismatched_ranks_are_rejected() {
        assert!(matches!(
            track_by_values(&values_only(&[&[1.0, 0.5], &[1.0]])),
            Err(TrackingError::RankMismatch { k: 1, .. })
        ));
        assert_eq!(track_by_values(&[]).unwrap_err(), TrackingError::Empty);
    }

    #[test]
    fn identity_step_keeps_pairing() {
        let u = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.6, 0.8], vec![0.0, 0.8, -0.6]];
        let w = vec![
            window(0.0, &[1.0, 0.8, 0.5], u.clone()),
            window(1.0, &[1.0, 0.8, 0.5], u.clone()),
        ];
        let (dist, _, _) = vector_distances(&w[0], &w[1], &identity(3, 0.0));
        assert!((0..3).all(|j| dist[j][j] < 1e-15));
        let t = track_by_vectors(&w, &[identity(3, 0.0)]).unwrap();
        assert_eq!(t.ranks(), vec![vec![0, 1, 2], vec![0, 1, 2]]);
    }

    #[test]
    fn swapped_columns_are_recovered_with_signs() {
        let u = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let swapped = vec![u[1].iter().map(|x| -x).collect(), u[0].clone(), u[2].clone()];
        let w = vec![window(0.0, &[0.9, 0.8, 0.1], u), window(1.0, &[0.9, 0.8, 0.1], swapped)];
        let t = track_by_vectors(&w, &[identity(3, 0.0)]).unwrap();
        assert_eq!(t.ranks(), vec![vec![0, 1, 2], vec![1, 0, 2]]);
        let mode_of_rank1 = t.mode_at(0, 1).unwrap();
        assert_eq!(t.paths[mode_of_rank1][1].sign, -1);
    }

    #[test]
    fn escaping_mass_falls_back_and_flags() {
        let u = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let w = vec![window(0.0, &[0.5, 0.4], u.clone()), window(1.0, &[0.5, 0.4], u)];
        let leak = UlamMatrix::from_counts(0.0, 1.0, 1, vec![0, 1], vec![0, 1], &[(1, 1, 1)]);
        let t = track_by_vectors(&w, &[leak]).unwrap();
        assert_eq!(t.flagged, vec![0]);
        assert_eq!(t.ranks()[1], vec![0, 1]);
    }

    #[test]
    fn greedy_takes_the_global_minimum_first() {
        // Greedy picks (0,0)=0.1 then must take (1,1)=0.9, although
        // (0,1)+(1,0) = 0.4 would be cheaper overall.
        let d = vec![vec![0.1, 0.2], vec![0.2, 0.9]];
        assert_eq!(greedy_pairing(&d), vec![0, 1]);
        assert_eq!(greedy_pairing(&[vec![0.5, 0.5], vec![0.5, 0.5]]), vec![0, 1]);
    }

    #[test]
    fn growing_supports_compare_on_the_union() {
        let a = [(1, 0.6), (4, 0.8)];
        let b = [(4, 0.8), (7, 0.6)];
        let (minus, plus) = signed_distances(&a, &b);
        assert!((minus - 0.72f64.sqrt()).abs() < 1e-15);
        assert!((plus - (0.72f64 + 2.56).sqrt()).abs() < 1e-15);
    }
}
