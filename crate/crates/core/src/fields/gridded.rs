use std::fmt::Write as _;

use super::{FieldError, Point, VectorField};
use crate::format::{fmt_exact, parse_finite, parse_num, FormatError};

/// Metres-per-second over metres (rad/s) to degrees per hour.
const RAD_PER_S_TO_DEG_PER_H: f64 = 3600.0 * 180.0 / std::f64::consts::PI;

/// `len` nodes at `start + i * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAxis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformAxis {
    pub fn new(start: f64, step: f64, len: usize) -> Self {
        UniformAxis { start, step, len }
    }

    pub fn last(&self) -> f64 {
        self.start + (self.len - 1) as f64 * self.step
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    /// Bracketing node and fraction for a value inside `[start, last]`.
    fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x - self.start) / self.step;
        let i = (s.floor() as usize).min(self.len - 2);
        (i, s - i as f64)
    }

    fn validate(&self, name: &str) -> Result<(), FieldError> {
        if !(self.step > 0.0 && self.step.is_finite() && self.start.is_finite()) {
            return Err(FieldError::Invalid(format!(
                "{name} spacing must be positive and finite"
            )));
        }
        if self.len < 2 {
            return Err(FieldError::Invalid(format!("{name} needs at least two nodes")));
        }
        Ok(())
    }
}

/// Wind data on a regular longitude × latitude × time grid.
///
/// Longitude is periodic with period 360°. Velocities are stored in m/s
/// (eastward `u`, northward `v`) and returned as `(dλ/dt, dφ/dt)` in degrees
/// per hour, interpolated bilinearly in space and linearly in time.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedField {
    lon: UniformAxis,
    lat: UniformAxis,
    time: UniformAxis,
    radius: f64,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl GriddedField {
    /// `u` and `v` are indexed `(time, lat, lon)` in row-major order.
    pub fn new(
        lon: UniformAxis,
        lat: UniformAxis,
        time: UniformAxis,
        radius: f64,
        u: Vec<f64>,
        v: Vec<f64>,
    ) -> Result<Self, FieldError> {
        lon.validate("longitude")?;
        lat.validate("latitude")?;
        time.validate("time")?;
        if ((lon.len as f64) * lon.step - 360.0).abs() > 1e-9 * 360.0 {
            return Err(FieldError::Invalid(format!(
                "longitude grid {} x {} does not close the circle",
                lon.len, lon.step
            )));
        }
        if lat.start < -90.0 - 1e-9 || lat.last() > 90.0 + 1e-9 {
            return Err(FieldError::Invalid("latitude grid leaves [-90, 90]".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FieldError::Invalid("sphere radius must be positive".into()));
        }
        let n = lon.len * lat.len * time.len;
        if u.len() != n || v.len() != n {
            return Err(FieldError::Invalid(format!(
                "expected {n} samples per component, got u={} v={}",
                u.len(),
                v.len()
            )));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(FieldError::Invalid("non-finite wind sample".into()));
        }
        Ok(GriddedField {
            lon,
            lat,
            time,
            radius,
            u,
            v,
        })
    }

    /// Samples `wind(t, lon, lat) -> (u, v)` at every grid node.
    pub fn from_fn(
        lon: UniformAxis,
        lat: UniformAxis,
        time: UniformAxis,
        radius: f64,
        mut wind: impl FnMut(f64, f64, f64) -> (f64, f64),
    ) -> Result<Self, FieldError> {
        let n = lon.len * lat.len * time.len;
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for it in 0..time.len {
            for ia in 0..lat.len {
                for io in 0..lon.len {
                    let (a, b) = wind(time.node(it), lon.node(io), lat.node(ia));
                    u.push(a);
                    v.push(b);
                }
            }
        }
        GriddedField::new(lon, lat, time, radius, u, v)
    }

    pub fn lon_axis(&self) -> UniformAxis {
        self.lon
    }

    pub fn lat_axis(&self) -> UniformAxis {
        self.lat
    }

    pub fn time_axis(&self) -> UniformAxis {
        self.time
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    fn idx(&self, it: usize, ia: usize, io: usize) -> usize {
        (it * self.lat.len + ia) * self.lon.len + io
    }

    /// Raw wind `(u, v)` in m/s, interpolated.
    pub fn wind(&self, t: f64, lon: f64, lat: f64) -> Result<(f64, f64), FieldError> {
        let tol_t = 1e-9 * self.time.step;
        if !(t >= self.time.start - tol_t && t <= self.time.last() + tol_t) {
            return Err(FieldError::OutOfRange {
                axis: "time",
                value: t,
                lo: self.time.start,
                hi: self.time.last(),
            });
        }
        if !(lat >= self.lat.start && lat <= self.lat.last()) {
            return Err(FieldError::OutOfRange {
                axis: "latitude",
                value: lat,
                lo: self.lat.start,
                hi: self.lat.last(),
            });
        }
        let t = t.clamp(self.time.start, self.time.last());
        let (it, ft) = self.time.locate(t);
        let (ia, fa) = self.lat.locate(lat);
        let s = (lon - self.lon.start).rem_euclid(360.0) / self.lon.step;
        let io = (s.floor() as usize).min(self.lon.len - 1);
        let fo = s - io as f64;
        let io1 = (io + 1) % self.lon.len;

        let sample = |data: &[f64], it: usize| -> f64 {
            let a0 = data[self.idx(it, ia, io)] * (1.0 - fo) + data[self.idx(it, ia, io1)] * fo;
            let a1 = data[self.idx(it, ia + 1, io)] * (1.0 - fo) + data[self.idx(it, ia + 1, io1)] * fo;
            a0 * (1.0 - fa) + a1 * fa
        };
        let blend = |data: &[f64]| -> f64 {
            let s0 = sample(data, it);
            if ft == 0.0 {
                s0
            } else {
                s0 * (1.0 - ft) + sample(data, it + 1) * ft
            }
        };
        Ok((blend(&self.u), blend(&self.v)))
    }

    /// Parses the whitespace-separated text container: four header lines
    /// (`lon0 dlon nlon`, `lat0 dlat nlat`, `t0 dt nt`, `radius_m`) followed
    /// by `nt·nlat·nlon` rows of `u v`.
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());

        let mut axis = |what: &str| -> Result<UniformAxis, FormatError> {
            let (n, l) = lines
                .next()
                .ok_or_else(|| FormatError::Truncated(format!("{what} header")))?;
            let mut tok = l.split_whitespace();
            let start = parse_finite(tok.next(), n, "axis start")?;
            let step = parse_finite(tok.next(), n, "axis step")?;
            let len: usize = parse_num(tok.next(), n, "axis length")?;
            if tok.next().is_some() {
                return Err(FormatError::syntax(n, "trailing tokens in axis header"));
            }
            Ok(UniformAxis { start, step, len })
        };
        let lon = axis("longitude")?;
        let lat = axis("latitude")?;
        let time = axis("time")?;
        let (n, l) = lines
            .next()
            .ok_or_else(|| FormatError::Truncated("radius header".into()))?;
        let mut tok = l.split_whitespace();
        let radius = parse_finite(tok.next(), n, "radius")?;
        if tok.next().is_some() {
            return Err(FormatError::syntax(n, "trailing tokens after radius"));
        }

        let expected = lon
            .len
            .checked_mul(lat.len)
            .and_then(|x| x.checked_mul(time.len))
            .filter(|&x| x <= 1 << 28)
            .ok_or_else(|| FormatError::Shape("grid too large".into()))?;
        let mut u = Vec::with_capacity(expected.min(1 << 20));
        let mut v = Vec::with_capacity(expected.min(1 << 20));
        for (n, l) in lines {
            if u.len() == expected {
                return Err(FormatError::Shape(format!("more than {expected} wind rows (line {n})")));
            }
            let mut tok = l.split_whitespace();
            u.push(parse_finite(tok.next(), n, "u")?);
            v.push(parse_finite(tok.next(), n, "v")?);
            if tok.next().is_some() {
                return Err(FormatError::syntax(n, "expected exactly two values"));
            }
        }
        if u.len() != expected {
            return Err(FormatError::Shape(format!(
                "expected {expected} wind rows, found {}",
                u.len()
            )));
        }
        GriddedField::new(lon, lat, time, radius, u, v).map_err(|e| FormatError::Shape(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.u.len() * 40 + 200);
        for a in [self.lon, self.lat, self.time] {
            writeln!(s, "{} {} {}", fmt_exact(a.start), fmt_exact(a.step), a.len).unwrap();
        }
        writeln!(s, "{}", fmt_exact(self.radius)).unwrap();
        for (a, b) in self.u.iter().zip(&self.v) {
            writeln!(s, "{} {}", fmt_exact(*a), fmt_exact(*b)).unwrap();
        }
        s
    }
}

impl VectorField for GriddedField {
    /// Angular velocity `(u / (R cos φ), v / R)` in degrees per hour.
    fn velocity(&self, t: f64, x: Point) -> Result<Point, FieldError> {
        let [lon, lat] = x;
        let (u, v) = self.wind(t, lon, lat)?;
        let c = lat.to_radians().cos();
        if c <= 1e-9 {
            return Err(FieldError::OutOfRange {
                axis: "latitude",
                value: lat,
                lo: -90.0,
                hi: 90.0,
            });
        }
        Ok([
            u / (self.radius * c) * RAD_PER_S_TO_DEG_PER_H,
            v / self.radius * RAD_PER_S_TO_DEG_PER_H,
        ])
    }
}
