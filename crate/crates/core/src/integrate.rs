//! Fixed-step RK4 flow maps over one step of flow time `tau`.

use thiserror::Error;

use crate::fields::{FieldError, Point, VectorField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("non-finite state {x:?} at t = {t}; check the field data")]
    NonFinite { t: f64, x: Point },
    #[error("invalid flow: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One coordinate range. Periodic axes wrap into `[lo, hi)`; the others are
/// closed and leaving them counts as escape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn periodic(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, periodic: true }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    fn wrap(&self, x: f64) -> f64 {
        if !self.periodic || (x >= self.lo && x < self.hi) {
            return x;
        }
        let w = self.lo + (x - self.lo).rem_euclid(self.width());
        if w >= self.hi {
            self.lo
        } else {
            w
        }
    }

    #[inline]
    fn contains(&self, x: f64) -> bool {
        if self.periodic {
            x.is_finite()
        } else {
            x >= self.lo && x <= self.hi
        }
    }
}

/// Rectangular state space `axes[0] × axes[1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub axes: [Interval; 2],
}

impl Domain {
    pub fn new(x: Interval, y: Interval) -> Self {
        Domain { axes: [x, y] }
    }

    #[inline]
    pub fn wrap(&self, p: Point) -> Point {
        [self.axes[0].wrap(p[0]), self.axes[1].wrap(p[1])]
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        self.axes[0].contains(p[0]) && self.axes[1].contains(p[1])
    }
}

/// Where a point ends up after one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Landing {
    Inside(Point),
    Escaped,
}

impl Landing {
    pub fn point(self) -> Option<Point> {
        match self {
            Landing::Inside(p) => Some(p),
            Landing::Escaped => None,
        }
    }
}

/// A one-step map `T_t` acting on points of a domain.
pub trait StepMap: Sync {
    fn tau(&self) -> f64;
    fn step(&self, t: f64, x: Point) -> Result<Landing, IntegrateError>;
}

/// RK4 discretisation of the flow of `field` over `[t, t + tau]` with
/// `substeps` equal substeps of size `h = tau / substeps`.
#[derive(Debug, Clone)]
pub struct FlowSpec<F> {
    field: F,
    domain: Domain,
    tau: f64,
    substeps: usize,
}

impl<F: VectorField> FlowSpec<F> {
    /// `tau / h` must be a positive integer (to 1e-9 relative).
    pub fn new(field: F, domain: Domain, tau: f64, h: f64) -> Result<Self, IntegrateError> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(IntegrateError::InvalidSpec(format!("tau must be positive, got {tau}")));
        }
        if !(h > 0.0 && h <= tau * (1.0 + 1e-12)) {
            return Err(IntegrateError::InvalidSpec(format!("need 0 < h <= tau, got h = {h}")));
        }
        let ratio = tau / h;
        let substeps = ratio.round();
        if (ratio - substeps).abs() > 1e-9 * ratio {
            return Err(IntegrateError::InvalidSpec(format!(
                "tau / h = {ratio} is not an integer"
            )));
        }
        Ok(FlowSpec {
            field,
            domain,
            tau,
            substeps: substeps as usize,
        })
    }

    /// Default step `h = tau / 10`.
    pub fn with_default_step(field: F, domain: Domain, tau: f64) -> Result<Self, IntegrateError> {
        FlowSpec::new(field, domain, tau, tau / 10.0)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.tau / self.substeps as f64
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    /// Integrates from `t` to `t + tau`. Periodic axes are wrapped after every
    /// substep; leaving the domain or the field's data range is an escape.
    pub fn flow_map(&self, t: f64, x: Point) -> Result<Landing, IntegrateError> {
        if !self.domain.contains(x) {
            return Ok(Landing::Escaped);
        }
        let h = self.h();
        let mut p = self.domain.wrap(x);
        for i in 0..self.substeps {
            let ts = t + i as f64 * h;
            p = match self.rk4(ts, p, h) {
                Ok(q) => q,
                Err(IntegrateError::Field(FieldError::OutOfRange { .. })) => return Ok(Landing::Escaped),
                Err(e) => return Err(e),
            };
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(IntegrateError::NonFinite { t: ts + h, x: p });
            }
            p = self.domain.wrap(p);
            if !self.domain.contains(p) {
                return Ok(Landing::Escaped);
            }
        }
        Ok(Landing::Inside(p))
    }

    /// `n` successive steps starting at `t`, `t + tau`, …; `n = 0` is the
    /// identity.
    pub fn flow_compose(&self, t: f64, x: Point, n: usize) -> Result<Landing, IntegrateError> {
        let mut p = x;
        for s in 0..n {
            match self.flow_map(t + s as f64 * self.tau, p)? {
                Landing::Inside(q) => p = q,
                Landing::Escaped => return Ok(Landing::Escaped),
            }
        }
        Ok(Landing::Inside(p))
    }

    #[inline]
    fn rk4(&self, t: f64, p: Point, h: f64) -> Result<Point, IntegrateError> {
        let f = |t: f64, q: Point| self.field.velocity(t, q);
        let half = 0.5 * h;
        let k1 = f(t, p)?;
        let k2 = f(t + half, [p[0] + half * k1[0], p[1] + half * k1[1]])?;
        let k3 = f(t + half, [p[0] + half * k2[0], p[1] + half * k2[1]])?;
        let k4 = f(t + h, [p[0] + h * k3[0], p[1] + h * k3[1]])?;
        let w = h / 6.0;
        Ok([
            p[0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            p[1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ])
    }
}

impl<F: VectorField> StepMap for FlowSpec<F> {
    fn tau(&self) -> f64 {
        self.tau
    }

    fn step(&self, t: f64, x: Point) -> Result<Landing, IntegrateError> {
        self.flow_map(t, x)
    }
}

/// The zero-time map: every point stays put.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl StepMap for IdentityMap {
    fn tau(&self) -> f64 {
        0.0
    }

    fn step(&self, _t: f64, x: Point) -> Result<Landing, IntegrateError> {
        Ok(Landing::Inside(x))
    }
}

/// Adapts a closure into a [`StepMap`].
pub struct FnMap<G> {
    pub tau: f64,
    pub map: G,
}

impl<G> StepMap for FnMap<G>
where
    G: Fn(f64, Point) -> Landing + Sync,
{
    fn tau(&self) -> f64 {
        self.tau
    }

    fn step(&self, t: f64, x: Point) -> Result<Landing, IntegrateError> {
        Ok((self.map)(t, x))
    }
}
