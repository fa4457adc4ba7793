//! Diagnostics for tracked modes: forward evolution of left singular vectors
//! (animation frames), coherence decay, equivariance mismatch between
//! neighbouring windows and normalisation by the leading mode.

mod render;

pub use render::{parse_raster_csv, render_frame, Raster};

use std::fmt::Write as _;

use thiserror::Error;

use crate::cocycle::{check_chain, CocycleError, WindowSvd};
use crate::format::{fmt_exact, CONFIG_PREFIX};
use crate::tracking::{TrackMethod, TrackedPaths};
use crate::ulam::UlamMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("vector has {got} entries, the matrix at step {k} has {want} rows")]
    Length { k: usize, got: usize, want: usize },
    #[error("steps {k}..{end} are not available ({len} matrices)")]
    OutOfRange { k: usize, end: usize, len: usize },
    #[error("windows {a} and {b} of the tracked paths do not match the SVD list")]
    Mismatch { a: usize, b: usize },
    #[error(transparent)]
    Chain(#[from] CocycleError),
}

/// A row vector after `steps` applications of the cocycle, over bin ids
/// `index`. `values` is unit-normalised unless the vector vanished, in which
/// case it is all zeros and `norm == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolved {
    pub steps: usize,
    pub index: Vec<usize>,
    pub values: Vec<f64>,
    /// Euclidean norm before normalisation.
    pub norm: f64,
}

impl Evolved {
    pub fn is_empty_frame(&self) -> bool {
        self.norm == 0.0
    }
}

fn chain_range(
    matrices: &[UlamMatrix],
    k: usize,
    steps: usize,
    u_len: usize,
) -> Result<&[UlamMatrix], DiagnosticsError> {
    let chain = matrices.get(k..k + steps).ok_or(DiagnosticsError::OutOfRange {
        k,
        end: k + steps,
        len: matrices.len(),
    })?;
    check_chain(chain)?;
    if let Some(first) = chain.first() {
        if first.nrows() != u_len {
            return Err(DiagnosticsError::Length {
                k,
                got: u_len,
                want: first.nrows(),
            });
        }
    }
    Ok(chain)
}

fn normalised(steps: usize, index: Vec<usize>, raw: Vec<f64>) -> Evolved {
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let values = if norm > 0.0 {
        raw.iter().map(|x| x / norm).collect()
    } else {
        raw
    };
    Evolved {
        steps,
        index,
        values,
        norm,
    }
}

/// Every frame `uᵀP^{(ñ)}_k / ‖·‖` for `ñ = 0..=n`. `u` is indexed by the
/// rows of `matrices[k]`; for `ñ = 0` it is returned as given (normalised).
pub fn evolve_frames(
    u: &[f64],
    row_index: &[usize],
    matrices: &[UlamMatrix],
    k: usize,
    n: usize,
) -> Result<Vec<Evolved>, DiagnosticsError> {
    let chain = chain_range(matrices, k, n, u.len())?;
    let mut frames = Vec::with_capacity(n + 1);
    let mut cur = u.to_vec();
    frames.push(normalised(0, row_index.to_vec(), cur.clone()));
    for (s, p) in chain.iter().enumerate() {
        let mut next = vec![0.0; p.ncols()];
        p.weights().tr_mul_vec(&cur, &mut next);
        cur = next;
        frames.push(normalised(s + 1, p.col_index().to_vec(), cur.clone()));
    }
    Ok(frames)
}

/// `uᵀP^{(ñ)}_k / ‖uᵀP^{(ñ)}_k‖₂`.
pub fn evolve_mode(
    u: &[f64],
    row_index: &[usize],
    matrices: &[UlamMatrix],
    k: usize,
    n_tilde: usize,
) -> Result<Evolved, DiagnosticsError> {
    Ok(evolve_frames(u, row_index, matrices, k, n_tilde)?
        .pop()
        .expect("frame 0 always exists"))
}

/// Animation data for one mode of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFrames {
    pub t0: f64,
    pub n: usize,
    /// 0-based rank of the animated left singular vector.
    pub mode: usize,
    /// Frames `ñ = 0..=n`.
    pub frames: Vec<Evolved>,
    /// Symmetric colour limit `max |u|` of the starting vector.
    pub colour_limit: f64,
}

/// Evolves `u_j` of `svd` through its own window. `chain` holds the window's
/// matrices in order (for growing windows, the restricted chain).
pub fn mode_frames(svd: &WindowSvd, chain: &[UlamMatrix], mode: usize) -> Result<ModeFrames, DiagnosticsError> {
    let u = svd.u.get(mode).ok_or(DiagnosticsError::OutOfRange {
        k: mode,
        end: mode + 1,
        len: svd.u.len(),
    })?;
    let frames = evolve_frames(u, &svd.row_index, chain, 0, svd.n)?;
    Ok(ModeFrames {
        t0: svd.t0,
        n: svd.n,
        mode,
        frames,
        colour_limit: u.iter().fold(0.0f64, |a, x| a.max(x.abs())),
    })
}

/// Coherence decay rate `(1/n_t) log ‖uᵀP^{(n_t)}_k‖₂`; `-∞` when all mass
/// has left.
pub fn coherence_log(u: &[f64], matrices: &[UlamMatrix], k: usize, n_t: usize) -> Result<f64, DiagnosticsError> {
    let rates = coherence_log_series(u, matrices, k, n_t)?;
    Ok(*rates.last().expect("n_t >= 1"))
}

/// `coherence_log` for every `n_t = 1..=n`, in one pass.
pub fn coherence_log_series(
    u: &[f64],
    matrices: &[UlamMatrix],
    k: usize,
    n: usize,
) -> Result<Vec<f64>, DiagnosticsError> {
    let chain = chain_range(matrices, k, n.max(1), u.len())?;
    let mut cur = u.to_vec();
    let mut out = Vec::with_capacity(n);
    for (s, p) in chain.iter().enumerate() {
        let mut next = vec![0.0; p.ncols()];
        p.weights().tr_mul_vec(&cur, &mut next);
        cur = next;
        let norm = cur.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push(if norm > 0.0 {
            norm.ln() / (s + 1) as f64
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok(out)
}

/// `min(‖v + u‖, ‖v − u‖) / √2` for unit vectors on the same index set.
pub fn equivariance_mismatch(v: &[f64], u: &[f64]) -> f64 {
    assert_eq!(v.len(), u.len(), "vectors must share an index set");
    let (mut plus, mut minus) = (0.0, 0.0);
    for (a, b) in v.iter().zip(u) {
        plus += (a + b) * (a + b);
        minus += (a - b) * (a - b);
    }
    (plus.min(minus).sqrt() / std::f64::consts::SQRT_2).min(1.0)
}

/// Mismatch for vectors on different bin-id sets: both are restricted to the
/// common bins and renormalised. No overlap (or nothing left after
/// restriction) counts as orthogonal, `ς = 1`.
pub fn equivariance_mismatch_on(v: &[f64], v_index: &[usize], u: &[f64], u_index: &[usize]) -> f64 {
    if v_index == u_index {
        return equivariance_mismatch(v, u);
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < v_index.len() && j < u_index.len() {
        match v_index[i].cmp(&u_index[j]) {
            std::cmp::Ordering::Equal => {
                a.push(v[i]);
                b.push(u[j]);
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    a.iter_mut().for_each(|x| *x /= na);
    b.iter_mut().for_each(|x| *x /= nb);
    equivariance_mismatch(&a, &b)
}

/// `sigma[mode][k]` compares the right vector of window `k` with the left
/// vector of window `k + n`, each taken at the rank the path holds there.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceSeries {
    pub method: TrackMethod,
    pub t0: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

/// Equivariance mismatch along tracked paths for every `k` with a window
/// `k + n`.
pub fn equivariance_series(
    svds: &[WindowSvd],
    paths: &TrackedPaths,
    n: usize,
) -> Result<EquivarianceSeries, DiagnosticsError> {
    if paths.window_count() != svds.len() {
        return Err(DiagnosticsError::Mismatch {
            a: paths.window_count(),
            b: svds.len(),
        });
    }
    let count = svds.len().saturating_sub(n);
    let sigma = paths
        .paths
        .iter()
        .map(|path| {
            (0..count)
                .map(|k| {
                    let (a, b) = (&svds[k], &svds[k + n]);
                    let v = &a.v[path[k].rank];
                    let u = &b.u[path[k + n].rank];
                    equivariance_mismatch_on(v, &a.col_index, u, &b.row_index)
                })
                .collect()
        })
        .collect();
    Ok(EquivarianceSeries {
        method: paths.method,
        t0: svds[..count].iter().map(|w| w.t0).collect(),
        sigma,
    })
}

/// CSV `method,mode,k,sigma` with 1-based modes and `k` the window start.
pub fn write_equivariance_csv(series: &EquivarianceSeries, config_hash: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(h) = config_hash {
        writeln!(s, "{CONFIG_PREFIX}{h}").unwrap();
    }
    s.push_str("method,mode,k,sigma\n");
    for (mode, row) in series.sigma.iter().enumerate() {
        for (t0, sig) in series.t0.iter().zip(row) {
            writeln!(
                s,
                "{},{},{},{}",
                series.method.name(),
                mode + 1,
                fmt_exact(*t0),
                fmt_exact(*sig)
            )
            .unwrap();
        }
    }
    s
}

/// Entrywise quotient of an evolved mode by the evolved leading mode,
/// rescaled to unit sup-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalised {
    pub values: Vec<f64>,
    /// Positions where the mode is nonzero but the leading vector vanishes;
    /// these are set to zero.
    pub masked: Vec<usize>,
}

/// Divides `mode` by `leading` entrywise and rescales to unit sup-norm.
/// Applied to the leading vector itself this gives a constant on its
/// support.
pub fn fsm_normalize(mode: &[f64], leading: &[f64]) -> Normalised {
    assert_eq!(mode.len(), leading.len(), "vectors must share an index set");
    let mut masked = Vec::new();
    let mut values: Vec<f64> = mode
        .iter()
        .zip(leading)
        .enumerate()
        .map(|(i, (&m, &l))| {
            if l != 0.0 {
                m / l
            } else {
                if m != 0.0 {
                    masked.push(i);
                }
                0.0
            }
        })
        .collect();
    let sup = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if sup > 0.0 && sup.is_finite() {
        values.iter_mut().for_each(|x| *x /= sup);
    }
    Normalised { values, masked }
}

/// Flips each vector after the first so it has a nonnegative inner product
/// with its predecessor. Returns the applied signs.
pub fn align_signs(vectors: &mut [Vec<f64>]) -> Vec<i8> {
    let mut signs = vec![1i8; vectors.len()];
    for i in 1..vectors.len() {
        let (prev, rest) = vectors.split_at_mut(i);
        let cur = &mut rest[0];
        let d: f64 = prev[i - 1].iter().zip(cur.iter()).map(|(a, b)| a * b).sum();
        if d < 0.0 {
            cur.iter_mut().for_each(|x| *x = -*x);
            signs[i] = -1;
        }
    }
    signs
}
