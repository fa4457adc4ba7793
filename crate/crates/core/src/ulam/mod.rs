//! Ulam discretisation: bin partitions, test-point seeding and sparse
//! transition matrices, including the growing-domain (rectangular) variant.

mod io;
mod partition;

pub use io::{parse_ulam, write_ulam};
pub use partition::{seed_points, BinPartition, Seeding};

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::integrate::{IntegrateError, Landing, StepMap};
use crate::sparse::CsrMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UlamError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("seeding: {0}")]
    Seeding(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

/// One-step transition matrix `P(t)`: entry `(i, j)` is the fraction of the
/// `Q` test points of bin `row_index[i]` that land in bin `col_index[j]`.
///
/// The index lists and weights sit behind `Arc`s so that relabelled copies
/// (periodic forcing) share storage; see [`UlamMatrix::shares_data`].
#[derive(Debug, Clone, PartialEq)]
pub struct UlamMatrix {
    t: f64,
    tau: f64,
    q: u32,
    row_index: Arc<Vec<usize>>,
    col_index: Arc<Vec<usize>>,
    weights: Arc<CsrMatrix>,
}

impl UlamMatrix {
    /// Assembles from `(row, col, count)` triplets over position indices.
    /// Repeated positions add their counts.
    pub fn from_counts(
        t: f64,
        tau: f64,
        q: u32,
        row_index: Vec<usize>,
        col_index: Vec<usize>,
        counts: &[(usize, usize, u32)],
    ) -> Self {
        let mut merged: Vec<(usize, usize, u64)> = counts.iter().map(|&(i, j, c)| (i, j, c as u64)).collect();
        merged.sort_unstable_by_key(|&(i, j, _)| (i, j));
        merged.dedup_by(|b, a| {
            let same = (a.0, a.1) == (b.0, b.1);
            if same {
                a.2 += b.2;
            }
            same
        });
        let trip: Vec<(usize, usize, f64)> = merged.iter().map(|&(i, j, c)| (i, j, c as f64 / q as f64)).collect();
        let weights = CsrMatrix::from_triplets(row_index.len(), col_index.len(), &trip);
        UlamMatrix {
            t,
            tau,
            q,
            row_index: Arc::new(row_index),
            col_index: Arc::new(col_index),
            weights: Arc::new(weights),
        }
    }

    fn from_parts(t: f64, tau: f64, q: u32, row_index: Vec<usize>, col_index: Vec<usize>, weights: CsrMatrix) -> Self {
        UlamMatrix {
            t,
            tau,
            q,
            row_index: Arc::new(row_index),
            col_index: Arc::new(col_index),
            weights: Arc::new(weights),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn nrows(&self) -> usize {
        self.row_index.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_index.len()
    }

    pub fn row_index(&self) -> &[usize] {
        &self.row_index
    }

    pub fn col_index(&self) -> &[usize] {
        &self.col_index
    }

    pub fn weights(&self) -> &CsrMatrix {
        &self.weights
    }

    pub fn nnz(&self) -> usize {
        self.weights.nnz()
    }

    /// `(row, col, weight)` in position indices, sorted lexicographically.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights.triplets()
    }

    /// Integer test-point count behind an entry weight.
    pub fn count_of(&self, weight: f64) -> u32 {
        (weight * self.q as f64).round() as u32
    }

    /// The same matrix under a different time label, sharing storage.
    pub fn relabel(&self, t: f64) -> Self {
        UlamMatrix { t, ..self.clone() }
    }

    /// True when both handles point at the same stored weights.
    pub fn shares_data(&self, other: &UlamMatrix) -> bool {
        Arc::ptr_eq(&self.weights, &other.weights)
    }

    pub(crate) fn shared_weights(&self) -> Arc<CsrMatrix> {
        Arc::clone(&self.weights)
    }

    pub(crate) fn data_id(&self) -> usize {
        Arc::as_ptr(&self.weights) as usize
    }

    /// Restricts to the given rows (bin ids present in `row_index`), keeping as
    /// columns the rows themselves plus every bin they reach. This is the
    /// growing-domain matrix for the seeded set `rows`.
    pub fn restrict_growing(&self, rows: &[usize]) -> Result<UlamMatrix, UlamError> {
        let pos_of_row = position_map(&self.row_index);
        let mut row_pos = Vec::with_capacity(rows.len());
        for &r in rows {
            match pos_of_row.get(r).copied().flatten() {
                Some(p) => row_pos.push(p),
                None => {
                    return Err(UlamError::InvalidPartition(format!(
                        "bin {r} is not a row of the matrix at t = {}",
                        self.t
                    )))
                }
            }
        }
        let mut cols: Vec<usize> = rows.to_vec();
        for &p in &row_pos {
            cols.extend(self.weights.row(p).map(|(c, _)| self.col_index[c]));
        }
        cols.sort_unstable();
        cols.dedup();
        let pos_of_col = position_map(&self.col_index);
        let col_pos: Vec<usize> = cols
            .iter()
            .filter_map(|&c| pos_of_col.get(c).copied().flatten())
            .collect();
        // Bins in `rows` that are not columns of self carry no weight; keep
        // them by padding through an explicit assembly.
        let weights = if col_pos.len() == cols.len() {
            self.weights.select(&row_pos, &col_pos)
        } else {
            let out_pos = position_map(&cols);
            let rows_out = row_pos
                .iter()
                .map(|&p| {
                    self.weights
                        .row(p)
                        .map(|(c, v)| (out_pos[self.col_index[c]].unwrap(), v))
                        .collect()
                })
                .collect();
            CsrMatrix::from_rows(cols.len(), rows_out)
        };
        Ok(UlamMatrix::from_parts(
            self.t,
            self.tau,
            self.q,
            rows.to_vec(),
            cols,
            weights,
        ))
    }
}

fn position_map(ids: &[usize]) -> Vec<Option<usize>> {
    let n = ids.iter().max().map_or(0, |&m| m + 1);
    let mut map = vec![None; n];
    for (p, &id) in ids.iter().enumerate() {
        map[id] = Some(p);
    }
    map
}

/// Builds `P(t)` by pushing `Q` test points per active row bin through one
/// step of `map`. Escaped points contribute to no column.
///
/// Full partitions give a square matrix over all bins. In growing-domain mode
/// the rows are the active rows and the columns are the active columns
/// extended by every bin actually hit, in ascending bin order.
pub fn build_ulam<M: StepMap>(
    map: &M,
    partition: &BinPartition,
    t: f64,
    q: usize,
    seeding: Seeding,
) -> Result<UlamMatrix, UlamError> {
    if q == 0 || q > u32::MAX as usize {
        return Err(UlamError::Seeding(format!("Q = {q} out of range")));
    }
    let rows = partition.active_rows();
    let hits: Vec<Vec<(usize, u32)>> = rows
        .par_iter()
        .map(|&bin| -> Result<Vec<(usize, u32)>, UlamError> {
            let mut landed: Vec<usize> = Vec::with_capacity(q);
            for x in seed_points(partition, bin, q, seeding)? {
                if let Landing::Inside(y) = map.step(t, x)? {
                    if let Some(b) = partition.bin_of(y) {
                        landed.push(b);
                    }
                }
            }
            landed.sort_unstable();
            let mut counts: Vec<(usize, u32)> = Vec::new();
            for b in landed {
                match counts.last_mut() {
                    Some((last, c)) if *last == b => *c += 1,
                    _ => counts.push((b, 1)),
                }
            }
            Ok(counts)
        })
        .collect::<Result<_, _>>()?;

    let cols = if partition.is_growing() {
        let mut cols = partition.active_cols();
        cols.extend(hits.iter().flatten().map(|&(b, _)| b));
        cols.sort_unstable();
        cols.dedup();
        cols
    } else {
        partition.active_cols()
    };
    let col_pos = position_map(&cols);
    let qf = q as f64;
    let weight_rows = hits
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(b, c)| (col_pos[b].expect("hit bin is a column"), c as f64 / qf))
                .collect()
        })
        .collect();
    let weights = CsrMatrix::from_rows(cols.len(), weight_rows);
    Ok(UlamMatrix::from_parts(t, map.tau(), q as u32, rows, cols, weights))
}

/// Matrices for steps `t_i, t_i + tau, …` (`steps` of them).
///
/// With `period_steps = Some(p)` the map is assumed to repeat exactly after
/// `p` steps; later matrices are relabelled copies of the first period.
pub fn build_sequence<M: StepMap>(
    map: &M,
    partition: &BinPartition,
    t_i: f64,
    steps: usize,
    q: usize,
    seeding: Seeding,
    period_steps: Option<usize>,
) -> Result<Vec<UlamMatrix>, UlamError> {
    let tau = map.tau();
    let mut out: Vec<UlamMatrix> = Vec::with_capacity(steps);
    for s in 0..steps {
        let t = t_i + s as f64 * tau;
        let m = match period_steps {
            Some(p) if p > 0 && s >= p => out[s - p].relabel(t),
            _ => build_ulam(map, partition, t, q, seeding)?,
        };
        out.push(m);
    }
    Ok(out)
}

/// Chains growing-domain matrices for one window: the first is restricted to
/// `seed`, each following one to the columns reached by its predecessor, so
/// `col_index` of step `s` equals `row_index` of step `s + 1`.
pub fn growing_chain(full: &[UlamMatrix], seed: &[usize]) -> Result<Vec<UlamMatrix>, UlamError> {
    let mut rows = seed.to_vec();
    let mut chain = Vec::with_capacity(full.len());
    for m in full {
        let r = m.restrict_growing(&rows)?;
        rows = r.col_index().to_vec();
        chain.push(r);
    }
    Ok(chain)
}

/// Builds a growing-domain window directly by re-seeding the partition at
/// every step with the columns reached so far.
pub fn build_growing_window<M: StepMap>(
    map: &M,
    partition: &BinPartition,
    t0: f64,
    n: usize,
    q: usize,
    seeding: Seeding,
) -> Result<Vec<UlamMatrix>, UlamError> {
    let mut part = partition.clone();
    let mut chain = Vec::with_capacity(n);
    for s in 0..n {
        let m = build_ulam(map, &part, t0 + s as f64 * map.tau(), q, seeding)?;
        let cols = m.col_index().to_vec();
        part = part.full().with_active(cols.clone(), cols)?;
        chain.push(m);
    }
    Ok(chain)
}
