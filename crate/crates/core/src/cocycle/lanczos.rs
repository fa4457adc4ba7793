//! Golub–Kahan–Lanczos bidiagonalisation with full reorthogonalisation, and a
//! one-sided Jacobi SVD for the small bidiagonal factor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CocycleError, LinearMap};

/// Solver settings for [`super::truncated_svd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    /// Converged when every wanted Ritz residual is below `tol · s₁`.
    pub tol: f64,
    /// Products whose largest dimension is at most this are formed explicitly.
    pub explicit_max: usize,
    /// Overrides the default iteration cap `10·N·√m`.
    pub max_iter: Option<usize>,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            tol: 1e-10,
            explicit_max: 1024,
            max_iter: None,
        }
    }
}

/// Top singular triples, values descending, `u` of length `nrows`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Triples {
    pub s: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

struct Transposed<'a, A: ?Sized>(&'a A);

impl<A: LinearMap + ?Sized> LinearMap for Transposed<'_, A> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }
    fn ncols(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply_transpose(x, y)
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y)
    }
}

pub(crate) fn lanczos_svd<A: LinearMap + ?Sized>(
    a: &A,
    want: usize,
    opts: &SvdOptions,
) -> Result<Triples, CocycleError> {
    let (m, mc) = (a.nrows(), a.ncols());
    if want == 0 || want > m.min(mc) {
        return Err(CocycleError::InvalidRank(format!(
            "N = {want} must lie in 1..={} for a {m}x{mc} operator",
            m.min(mc)
        )));
    }
    // The recurrence is exact once the right-hand basis spans its space, so
    // run it on the side with the smaller dimension.
    let mut t = if mc <= m {
        bidiagonal_svd(a, want, opts)?
    } else {
        let t = bidiagonal_svd(&Transposed(a), want, opts)?;
        Triples { s: t.s, u: t.v, v: t.u }
    };
    for j in 0..want {
        canonical_sign(&mut t.u[j], &mut t.v[j]);
    }
    Ok(t)
}

/// Flips `(u, v)` so the largest-magnitude entry of `u` (first on ties) is
/// nonnegative.
pub(crate) fn canonical_sign(u: &mut [f64], v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in u.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram–Schmidt against `basis`.
fn reorthogonalise(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
        }
    }
}

/// A unit vector orthogonal to `basis`, or `None` if the basis is complete.
fn fresh_direction(dim: usize, basis: &[Vec<f64>], seed: u64) -> Option<Vec<f64>> {
    if basis.len() >= dim {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        reorthogonalise(&mut x, basis);
        let nx = norm(&x);
        if nx > 1e-8 {
            x.iter_mut().for_each(|e| *e /= nx);
            return Some(x);
        }
    }
    None
}

fn start_vector(dim: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..dim).map(|i| 1.0 + 0.1 * (0.7 * i as f64 + 0.3).sin()).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|e| *e /= nx);
    x
}

/// Assumes `ncols <= nrows`.
fn bidiagonal_svd<A: LinearMap + ?Sized>(a: &A, want: usize, opts: &SvdOptions) -> Result<Triples, CocycleError> {
    let (m, mc) = (a.nrows(), a.ncols());
    let kmax_dim = mc;
    let default_cap = (10.0 * want as f64 * (m as f64).sqrt()).ceil() as usize;
    let kmin = (2 * want + 8).min(kmax_dim);
    let kmax = opts.max_iter.unwrap_or(default_cap).max(kmin).min(kmax_dim);

    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut vs: Vec<Vec<f64>> = vec![start_vector(mc)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut scale = 0.0f64;
    let mut next_check = kmin;
    let mut last_residual = f64::INFINITY;

    loop {
        let k = us.len();
        // u_{k+1} = A v_{k+1} - β_k u_k
        let mut p = vec![0.0; m];
        a.apply(&vs[k], &mut p);
        if k > 0 {
            let b = betas[k - 1];
            p.iter_mut().zip(&us[k - 1]).for_each(|(pi, ui)| *pi -= b * ui);
        }
        reorthogonalise(&mut p, &us);
        let alpha = norm(&p);
        scale = scale.max(alpha);
        let alpha = if alpha > 1e-12 * scale && alpha > 0.0 {
            p.iter_mut().for_each(|e| *e /= alpha);
            alpha
        } else {
            match fresh_direction(m, &us, 2 * k as u64 + 1) {
                Some(u) => p = u,
                None => break,
            }
            0.0
        };
        us.push(p);
        alphas.push(alpha);

        // v_{k+2} = Aᵀ u_{k+1} - α_{k+1} v_{k+1}
        let mut r = vec![0.0; mc];
        a.apply_transpose(&us[k], &mut r);
        r.iter_mut().zip(&vs[k]).for_each(|(ri, vi)| *ri -= alpha * vi);
        reorthogonalise(&mut r, &vs);
        let beta = norm(&r);
        scale = scale.max(beta);
        let done_dim = vs.len() >= kmax_dim;
        let beta = if !done_dim && beta > 1e-12 * scale && beta > 0.0 {
            r.iter_mut().for_each(|e| *e /= beta);
            vs.push(r);
            beta
        } else {
            if !done_dim {
                if let Some(v) = fresh_direction(mc, &vs, 2 * k as u64 + 2) {
                    vs.push(v);
                }
            }
            0.0
        };
        betas.push(beta);

        let k = us.len();
        let exhausted = vs.len() <= k;
        let capped = k >= kmax;
        if k >= next_check || exhausted || capped {
            let (sig, x, y) = jacobi_svd(&bidiagonal(&alphas, &betas));
            let s1 = sig[0];
            let resid = (0..want.min(k))
                .map(|i| beta * x[i][k - 1].abs())
                .fold(0.0f64, f64::max);
            last_residual = if s1 > 0.0 { resid / s1 } else { 0.0 };
            // A breakdown gives zero residuals for the current block only, so keep
            // going unless the space is exhausted.
            if k >= want && (beta > 0.0 && last_residual <= opts.tol || exhausted) {
                return Ok(assemble(want, &sig, &x, &y, &us, &vs[..k]));
            }
            if exhausted || capped {
                break;
            }
            next_check = k + (k / 8).max(4);
        }
    }
    Err(CocycleError::NonConvergence {
        residual: last_residual,
        tol: opts.tol,
        iterations: us.len(),
    })
}

fn assemble(want: usize, sig: &[f64], x: &[Vec<f64>], y: &[Vec<f64>], us: &[Vec<f64>], vs: &[Vec<f64>]) -> Triples {
    let combine = |coef: &[f64], basis: &[Vec<f64>]| {
        let mut out = vec![0.0; basis[0].len()];
        for (c, b) in coef.iter().zip(basis) {
            out.iter_mut().zip(b).for_each(|(o, bi)| *o += c * bi);
        }
        out
    };
    Triples {
        s: sig[..want].to_vec(),
        u: (0..want).map(|i| combine(&x[i], us)).collect(),
        v: (0..want).map(|i| combine(&y[i], vs)).collect(),
    }
}

/// Dense `k × k` upper bidiagonal matrix, row-major.
fn bidiagonal(alphas: &[f64], betas: &[f64]) -> Vec<Vec<f64>> {
    let k = alphas.len();
    let mut b = vec![vec![0.0; k]; k];
    for i in 0..k {
        b[i][i] = alphas[i];
        if i + 1 < k {
            b[i][i + 1] = betas[i];
        }
    }
    b
}

/// One-sided Jacobi SVD of a square row-major matrix `b = X Σ Yᵀ`.
/// Returns `(σ descending, columns of X, columns of Y)`.
pub(crate) fn jacobi_svd(b: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let k = b.len();
    // w[j] is column j of B · Y
    let mut w: Vec<Vec<f64>> = (0..k).map(|j| (0..k).map(|i| b[i][j]).collect()).collect();
    let mut y: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            e
        })
        .collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut y] {
                    let (lo, hi) = mat.split_at_mut(q);
                    let (cp, cq) = (&mut lo[p], &mut hi[0]);
                    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
                        let (ap, aq) = (*a, *b);
                        *a = c * ap - s * aq;
                        *b = s * ap + c * aq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = w.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let sig: Vec<f64> = order.iter().map(|o| o.0).collect();
    let smax = sig.first().copied().unwrap_or(0.0);
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &(s, j) in &order {
        let xcol = if s > 1e-300 && s > 1e-14 * smax {
            w[j].iter().map(|e| e / s).collect()
        } else {
            // Null direction: any unit vector orthogonal to those found.
            fresh_direction(k, &xs, j as u64).unwrap_or_else(|| vec![0.0; k])
        };
        xs.push(xcol);
        ys.push(y[j].clone());
    }
    (sig, xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_a_known_factorisation() {
        let b = vec![vec![3.0, 1.0, 0.0], vec![0.0, 2.0, 0.5], vec![0.0, 0.0, 1.0]];
        let (s, x, y) = jacobi_svd(&b);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|l| x[l][i] * s[l] * y[l][j]).sum();
                assert!((r - b[i][j]).abs() < 1e-13, "({i},{j}) {r}");
                let ox: f64 = dot(&x[i], &x[j]);
                let oy: f64 = dot(&y[i], &y[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((ox - e).abs() < 1e-13 && (oy - e).abs() < 1e-13);
            }
        }
        let fro: f64 = b.iter().flatten().map(|v| v * v).sum();
        assert!((s.iter().map(|v| v * v).sum::<f64>() - fro).abs() < 1e-12);
    }

    #[test]
    fn jacobi_handles_rank_deficiency() {
        let b = vec![vec![0.0, 1.0], vec![0.0, 0.0]];
        let (s, x, _) = jacobi_svd(&b);
        assert_eq!(s, vec![1.0, 0.0]);
        assert!((dot(&x[1], &x[1]) - 1.0).abs() < 1e-12);
        assert!(dot(&x[0], &x[1]).abs() < 1e-12);
    }

    #[test]
    fn sign_convention() {
        let mut u = vec![0.1, -0.9, 0.9];
        let mut v = vec![1.0];
        canonical_sign(&mut u, &mut v);
        assert_eq!((u, v), (vec![-0.1, 0.9, -0.9], vec![-1.0]));
    }
}
