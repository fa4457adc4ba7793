use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::UlamError;
use crate::fields::Point;
use crate::integrate::Domain;

/// How test points are placed inside a bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    /// Centred `√Q × √Q` sublattice; `Q` must be a perfect square.
    Lattice,
    /// `Q` i.i.d. uniform draws from ChaCha8 seeded with `seed`, one stream per bin.
    Random { seed: u64 },
}

/// Seeded rows and reachable columns of a growing-domain partition.
#[derive(Debug, Clone, PartialEq)]
struct ActiveSet {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

/// Regular grid of `bins[0] × bins[1]` half-open bins over a [`Domain`].
///
/// Bin ids are row-major with the second axis as the row: `id = iy * nx + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPartition {
    domain: Domain,
    bins: [usize; 2],
    active: Option<ActiveSet>,
}

impl BinPartition {
    pub fn new(domain: Domain, bins: [usize; 2]) -> Result<Self, UlamError> {
        for (a, &n) in domain.axes.iter().zip(&bins) {
            if n == 0 {
                return Err(UlamError::InvalidPartition("zero bins along an axis".into()));
            }
            if !(a.hi > a.lo && a.lo.is_finite() && a.hi.is_finite()) {
                return Err(UlamError::InvalidPartition(format!(
                    "empty or non-finite axis [{}, {}]",
                    a.lo, a.hi
                )));
            }
        }
        bins[0]
            .checked_mul(bins[1])
            .filter(|&n| n <= 1 << 26)
            .ok_or_else(|| UlamError::InvalidPartition("too many bins".into()))?;
        Ok(BinPartition {
            domain,
            bins,
            active: None,
        })
    }

    /// Growing-domain mode with explicit seeded rows and initial columns.
    /// Both lists must be strictly increasing and `rows ⊆ cols`.
    pub fn with_active(mut self, rows: Vec<usize>, cols: Vec<usize>) -> Result<Self, UlamError> {
        let n = self.n_bins();
        for list in [&rows, &cols] {
            if list.windows(2).any(|w| w[0] >= w[1]) || list.last().is_some_and(|&b| b >= n) {
                return Err(UlamError::InvalidPartition(
                    "active bins must be strictly increasing and in range".into(),
                ));
            }
        }
        if rows.iter().any(|r| cols.binary_search(r).is_err()) {
            return Err(UlamError::InvalidPartition(
                "active rows must be a subset of active columns".into(),
            ));
        }
        self.active = Some(ActiveSet { rows, cols });
        Ok(self)
    }

    /// Growing-domain mode seeding every bin whose centre satisfies `keep`.
    pub fn seeded_where(self, keep: impl Fn(Point) -> bool) -> Result<Self, UlamError> {
        let rows: Vec<usize> = (0..self.n_bins()).filter(|&b| keep(self.bin_center(b))).collect();
        let cols = rows.clone();
        self.with_active(rows, cols)
    }

    /// Drops growing-domain mode.
    pub fn full(&self) -> Self {
        BinPartition {
            active: None,
            ..self.clone()
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn bins(&self) -> [usize; 2] {
        self.bins
    }

    pub fn n_bins(&self) -> usize {
        self.bins[0] * self.bins[1]
    }

    pub fn is_growing(&self) -> bool {
        self.active.is_some()
    }

    pub fn active_rows(&self) -> Vec<usize> {
        match &self.active {
            Some(a) => a.rows.clone(),
            None => (0..self.n_bins()).collect(),
        }
    }

    pub fn active_cols(&self) -> Vec<usize> {
        match &self.active {
            Some(a) => a.cols.clone(),
            None => (0..self.n_bins()).collect(),
        }
    }

    pub fn bin_width(&self, axis: usize) -> f64 {
        self.domain.axes[axis].width() / self.bins[axis] as f64
    }

    pub fn bin_coords(&self, bin: usize) -> [usize; 2] {
        [bin % self.bins[0], bin / self.bins[0]]
    }

    /// Lower corner of a bin.
    pub fn bin_origin(&self, bin: usize) -> Point {
        let [ix, iy] = self.bin_coords(bin);
        let a = &self.domain.axes;
        [
            a[0].lo + ix as f64 * self.bin_width(0),
            a[1].lo + iy as f64 * self.bin_width(1),
        ]
    }

    pub fn bin_center(&self, bin: usize) -> Point {
        let o = self.bin_origin(bin);
        [o[0] + 0.5 * self.bin_width(0), o[1] + 0.5 * self.bin_width(1)]
    }

    /// Bin containing `p`. Bins are half-open `[lo, hi)` along each axis; the
    /// closed upper edge of a non-periodic axis belongs to the last bin.
    #[inline]
    pub fn bin_of(&self, p: Point) -> Option<usize> {
        let p = self.domain.wrap(p);
        let mut idx = [0usize; 2];
        for k in 0..2 {
            let a = &self.domain.axes[k];
            let n = self.bins[k];
            if !(p[k] >= a.lo && p[k] <= a.hi) {
                return None;
            }
            let s = ((p[k] - a.lo) / a.width() * n as f64).floor();
            idx[k] = (s as usize).min(n - 1);
        }
        Some(idx[1] * self.bins[0] + idx[0])
    }
}

/// Test points for one bin.
pub fn seed_points(partition: &BinPartition, bin: usize, q: usize, scheme: Seeding) -> Result<Vec<Point>, UlamError> {
    if q == 0 {
        return Err(UlamError::Seeding("Q must be at least 1".into()));
    }
    if bin >= partition.n_bins() {
        return Err(UlamError::Seeding(format!("bin {bin} out of range")));
    }
    let o = partition.bin_origin(bin);
    let w = [partition.bin_width(0), partition.bin_width(1)];
    match scheme {
        Seeding::Lattice => {
            let s = (q as f64).sqrt().round() as usize;
            if s * s != q {
                return Err(UlamError::Seeding(format!("lattice seeding needs a square Q, got {q}")));
            }
            let mut pts = Vec::with_capacity(q);
            for iy in 0..s {
                for ix in 0..s {
                    pts.push([
                        o[0] + (ix as f64 + 0.5) / s as f64 * w[0],
                        o[1] + (iy as f64 + 0.5) / s as f64 * w[1],
                    ]);
                }
            }
            Ok(pts)
        }
        Seeding::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(bin as u64);
            Ok((0..q)
                .map(|_| {
                    let a: f64 = rng.random();
                    let b: f64 = rng.random();
                    [o[0] + a * w[0], o[1] + b * w[1]]
                })
                .collect())
        }
    }
}
