//! Rolling-window cocycle products `P_k ⋯ P_{k+n-1}` and their truncated
//! SVDs.

mod io;
mod lanczos;

pub use io::{parse_window_svd, write_window_svd};
pub use lanczos::SvdOptions;

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::sparse::CsrMatrix;
use crate::ulam::{growing_chain, UlamError, UlamMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error("matrix {step} of the window does not chain: its rows differ from the previous columns")]
    ChainMismatch { step: usize },
    #[error("window out of range: {0}")]
    OutOfRange(String),
    #[error("invalid rank request: {0}")]
    InvalidRank(String),
    #[error("SVD did not converge: relative residual {residual:e} > {tol:e} after {iterations} steps")]
    NonConvergence { residual: f64, tol: f64, iterations: usize },
    #[error(transparent)]
    Ulam(#[from] UlamError),
}

/// A real matrix known only through its action on vectors.
pub trait LinearMap: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `y = Aᵀ x`, i.e. the row vector `xᵀA`.
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);
}

impl LinearMap for CsrMatrix {
    fn nrows(&self) -> usize {
        CsrMatrix::nrows(self)
    }
    fn ncols(&self) -> usize {
        CsrMatrix::ncols(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.tr_mul_vec(x, y)
    }
}

#[derive(Debug, Clone)]
enum Operator {
    Identity(usize),
    Explicit(CsrMatrix),
    Factored(Vec<Arc<CsrMatrix>>),
}

/// The window product `P^{(n)}_k`, either multiplied out or kept as a chain.
#[derive(Debug, Clone)]
pub struct WindowProduct {
    pub t0: f64,
    pub n: usize,
    pub row_index: Vec<usize>,
    pub col_index: Vec<usize>,
    op: Operator,
}

impl WindowProduct {
    pub fn is_explicit(&self) -> bool {
        matches!(self.op, Operator::Explicit(_))
    }

    /// The product as a sparse matrix, multiplying out a factored chain.
    pub fn to_csr(&self) -> CsrMatrix {
        match &self.op {
            Operator::Identity(d) => CsrMatrix::identity(*d),
            Operator::Explicit(a) => a.clone(),
            Operator::Factored(f) => multiply(f),
        }
    }
}

fn multiply(chain: &[Arc<CsrMatrix>]) -> CsrMatrix {
    let mut acc = (*chain[0]).clone();
    for m in &chain[1..] {
        acc = acc.matmul(m);
    }
    acc
}

impl LinearMap for WindowProduct {
    fn nrows(&self) -> usize {
        self.row_index.len()
    }

    fn ncols(&self) -> usize {
        self.col_index.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match &self.op {
            Operator::Identity(_) => y.copy_from_slice(x),
            Operator::Explicit(a) => a.mul_vec(x, y),
            Operator::Factored(f) => {
                let mut cur = x.to_vec();
                for m in f.iter().rev() {
                    let mut next = vec![0.0; m.nrows()];
                    m.mul_vec(&cur, &mut next);
                    cur = next;
                }
                y.copy_from_slice(&cur);
            }
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        match &self.op {
            Operator::Identity(_) => y.copy_from_slice(x),
            Operator::Explicit(a) => a.tr_mul_vec(x, y),
            Operator::Factored(f) => {
                let mut cur = x.to_vec();
                for m in f.iter() {
                    let mut next = vec![0.0; m.ncols()];
                    m.tr_mul_vec(&cur, &mut next);
                    cur = next;
                }
                y.copy_from_slice(&cur);
            }
        }
    }
}

/// Checks that `col_index` of each matrix equals `row_index` of the next.
pub fn check_chain(matrices: &[UlamMatrix]) -> Result<(), CocycleError> {
    for (s, w) in matrices.windows(2).enumerate() {
        if w[0].col_index() != w[1].row_index() {
            return Err(CocycleError::ChainMismatch { step: s + 1 });
        }
    }
    Ok(())
}

/// `P_k · P_{k+1} ⋯ P_{k+n-1}`; `n = 0` gives the identity on the row space
/// of `P_k` (or the column space of `P_{k-1}` when `k` is one past the end).
/// Chains whose largest dimension is at most `explicit_max` are multiplied
/// out, longer ones stay factored.
pub fn window_product(
    matrices: &[UlamMatrix],
    k: usize,
    n: usize,
    explicit_max: usize,
) -> Result<WindowProduct, CocycleError> {
    if n == 0 {
        let (t0, ids) = match (matrices.get(k), k.checked_sub(1).and_then(|p| matrices.get(p))) {
            (Some(m), _) => (m.t(), m.row_index().to_vec()),
            (None, Some(p)) => (p.t() + p.tau(), p.col_index().to_vec()),
            (None, None) => return Err(CocycleError::OutOfRange(format!("no matrix near step {k}"))),
        };
        return Ok(WindowProduct {
            t0,
            n: 0,
            row_index: ids.clone(),
            op: Operator::Identity(ids.len()),
            col_index: ids,
        });
    }
    let chain = matrices
        .get(k..k + n)
        .ok_or_else(|| CocycleError::OutOfRange(format!("steps {k}..{} of {}", k + n, matrices.len())))?;
    check_chain(chain)?;
    let factors: Vec<Arc<CsrMatrix>> = chain.iter().map(UlamMatrix::shared_weights).collect();
    let widest = chain.iter().map(|m| m.nrows().max(m.ncols())).max().unwrap_or(0);
    let op = if n == 1 {
        Operator::Explicit((*factors[0]).clone())
    } else if widest <= explicit_max {
        Operator::Explicit(multiply(&factors))
    } else {
        Operator::Factored(factors)
    };
    Ok(WindowProduct {
        t0: chain[0].t(),
        n,
        row_index: chain[0].row_index().to_vec(),
        col_index: chain[n - 1].col_index().to_vec(),
        op,
    })
}

/// Top singular triples of one window: `uⱼᵀ P = sⱼ vⱼᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSvd {
    pub t0: f64,
    pub n: usize,
    /// Descending.
    pub s: Vec<f64>,
    /// Left vectors, indexed by `row_index`.
    pub u: Vec<Vec<f64>>,
    /// Right vectors, indexed by `col_index`.
    pub v: Vec<Vec<f64>>,
    pub row_index: Vec<usize>,
    pub col_index: Vec<usize>,
}

impl WindowSvd {
    pub fn rank_count(&self) -> usize {
        self.s.len()
    }
}

/// Top-`big_n` SVD of a window product. Vectors are sign-canonical: the
/// largest-magnitude entry of each `u` is nonnegative.
pub fn truncated_svd(map: &WindowProduct, big_n: usize, opts: &SvdOptions) -> Result<WindowSvd, CocycleError> {
    let t = lanczos::lanczos_svd(map, big_n, opts)?;
    Ok(WindowSvd {
        t0: map.t0,
        n: map.n,
        s: t.s,
        u: t.u,
        v: t.v,
        row_index: map.row_index.clone(),
        col_index: map.col_index.clone(),
    })
}

/// Singular values with left and right vectors.
pub type Triplets = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Truncated SVD of any linear map, without window metadata.
pub fn svd_of<A: LinearMap + ?Sized>(a: &A, big_n: usize, opts: &SvdOptions) -> Result<Triplets, CocycleError> {
    let t = lanczos::lanczos_svd(a, big_n, opts)?;
    Ok((t.s, t.u, t.v))
}

/// Number of windows of length `n` in a sequence of `steps` matrices.
pub fn window_count(steps: usize, n: usize) -> usize {
    (steps + 1).saturating_sub(n.max(1))
}

/// One SVD per window start `k = 0 ..= len − n` over a chained sequence.
///
/// Windows whose matrices are the same stored data (relabelled periodic
/// copies) are solved once and relabelled.
pub fn rolling_windows(
    matrices: &[UlamMatrix],
    n: usize,
    big_n: usize,
    opts: &SvdOptions,
) -> Result<Vec<WindowSvd>, CocycleError> {
    rolling_with(matrices, n, |k| {
        let p = window_product(matrices, k, n, opts.explicit_max)?;
        truncated_svd(&p, big_n, opts)
    })
}

/// Growing-domain variant: every window restarts from the `seed` rows and
/// grows its own column sets through the full square matrices.
pub fn rolling_windows_growing(
    matrices: &[UlamMatrix],
    seed: &[usize],
    n: usize,
    big_n: usize,
    opts: &SvdOptions,
) -> Result<Vec<WindowSvd>, CocycleError> {
    rolling_with(matrices, n, |k| {
        let chain = growing_chain(&matrices[k..k + n], seed)?;
        let p = window_product(&chain, 0, n, opts.explicit_max)?;
        truncated_svd(&p, big_n, opts)
    })
}

fn rolling_with<F>(matrices: &[UlamMatrix], n: usize, solve: F) -> Result<Vec<WindowSvd>, CocycleError>
where
    F: Fn(usize) -> Result<WindowSvd, CocycleError> + Sync,
{
    if n == 0 || n > matrices.len() {
        return Err(CocycleError::OutOfRange(format!(
            "window length {n} with {} matrices",
            matrices.len()
        )));
    }
    let count = window_count(matrices.len(), n);
    let keys: Vec<Vec<usize>> = (0..count)
        .map(|k| matrices[k..k + n].iter().map(UlamMatrix::data_id).collect())
        .collect();
    let mut first: HashMap<&[usize], usize> = HashMap::new();
    let mut unique = Vec::new();
    for (k, key) in keys.iter().enumerate() {
        first.entry(key.as_slice()).or_insert_with(|| {
            unique.push(k);
            k
        });
    }
    let solved: Vec<WindowSvd> = unique.par_iter().map(|&k| solve(k)).collect::<Result<_, _>>()?;
    let by_start: HashMap<usize, &WindowSvd> = unique.iter().copied().zip(&solved).collect();
    Ok((0..count)
        .map(|k| {
            let src = by_start[&first[keys[k].as_slice()]];
            WindowSvd {
                t0: matrices[k].t(),
                ..src.clone()
            }
        })
        .collect())
}

/// Finite-time growth rate `(1/n) log sⱼ`; `-∞` when `sⱼ = 0`.
pub fn lyapunov_rate(svd: &WindowSvd, j: usize) -> f64 {
    let s = svd.s[j];
    if s > 0.0 {
        s.ln() / svd.n as f64
    } else {
        f64::NEG_INFINITY
    }
}
