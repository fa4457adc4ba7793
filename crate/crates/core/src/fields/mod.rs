//! Time-dependent planar vector fields.
//!
//! Every field maps `(t, x)` to a velocity in the coordinates the integrator
//! uses. Gridded wind data is converted from metres per second to degrees per
//! hour internally so trajectories live on a plain `(lon, lat)` rectangle.

mod analytic;
mod gridded;

pub use analytic::{alpha, alpha_tilde, AnalyticField, DoubleWellForcing, FORCING_PERIOD};
pub use gridded::{GriddedField, UniformAxis};

use thiserror::Error;

/// A point of the two-dimensional state space.
pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("{axis} {value} outside data range [{lo}, {hi}]; shorten the window")]
    OutOfRange {
        axis: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid field: {0}")]
    Invalid(String),
}

pub trait VectorField: Send + Sync {
    fn velocity(&self, t: f64, x: Point) -> Result<Point, FieldError>;
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn velocity(&self, t: f64, x: Point) -> Result<Point, FieldError> {
        (**self).velocity(t, x)
    }
}

impl<F: VectorField + ?Sized> VectorField for Box<F> {
    fn velocity(&self, t: f64, x: Point) -> Result<Point, FieldError> {
        (**self).velocity(t, x)
    }
}

/// Any of the supported model fields.
#[derive(Debug, Clone)]
pub enum Field {
    Analytic(AnalyticField),
    Gridded(GriddedField),
}

impl VectorField for Field {
    #[inline]
    fn velocity(&self, t: f64, x: Point) -> Result<Point, FieldError> {
        match self {
            Field::Analytic(f) => f.velocity(t, x),
            Field::Gridded(f) => f.velocity(t, x),
        }
    }
}

/// Evaluates any field; a thin convenience over [`VectorField::velocity`].
pub fn eval_field<F: VectorField + ?Sized>(field: &F, t: f64, x: Point) -> Result<Point, FieldError> {
    field.velocity(t, x)
}

/// Spatially uniform, steady velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantField(pub Point);

impl VectorField for ConstantField {
    fn velocity(&self, _t: f64, _x: Point) -> Result<Point, FieldError> {
        Ok(self.0)
    }
}

/// Steady linear field `ẋ = A x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField(pub [[f64; 2]; 2]);

impl LinearField {
    /// `ẋ = x`, `ẏ = 0`: exponential growth along the first axis only.
    pub fn growth_x() -> Self {
        LinearField([[1.0, 0.0], [0.0, 0.0]])
    }
}

impl VectorField for LinearField {
    fn velocity(&self, _t: f64, x: Point) -> Result<Point, FieldError> {
        let a = &self.0;
        Ok([a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]])
    }
}
