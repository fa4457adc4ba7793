//! Experiment configuration read from a TOML file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use coherent_core::cocycle::SvdOptions;
use coherent_core::fields::{AnalyticField, Field, GriddedField, VectorField, FORCING_PERIOD};
use coherent_core::integrate::{Domain, Interval};
use coherent_core::tracking::TrackMethod;
use coherent_core::ulam::{BinPartition, Seeding};

use crate::CliError;

/// Upper bound on `bins[0] * bins[1]`.
pub const MAX_BINS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Output directory, relative to the config file.
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    pub domain: DomainConfig,
    pub time: TimeConfig,
    pub ulam: UlamConfig,
    pub svd: SvdConfig,
    #[serde(default)]
    pub tracking: TrackingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    PeriodicDwp,
    QuasiPeriodicDwp { gamma: f64 },
    Gridded { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default)]
    pub periodic_x: bool,
    pub bins: [usize; 2],
    /// Growing-domain mode: only bins whose centres fall inside this
    /// rectangle are seeded.
    #[serde(default)]
    pub seed_region: Option<Region>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_i: f64,
    pub t_f: f64,
    pub tau: f64,
    /// Integrator step; defaults to `tau / 10`.
    #[serde(default)]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedingKind {
    Lattice,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UlamConfig {
    pub q: usize,
    #[serde(default = "default_seeding")]
    pub seeding: SeedingKind,
}

fn default_seeding() -> SeedingKind {
    SeedingKind::Lattice
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvdConfig {
    /// Window length in steps.
    pub n: usize,
    /// Number of singular triples kept per window.
    pub modes: usize,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub explicit_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingConfig {
    #[serde(default = "default_method")]
    pub method: String,
}

fn default_method() -> String {
    "values".into()
}

impl Default for TrackingConfig {
    fn default() -> Self {
        TrackingConfig {
            method: default_method(),
        }
    }
}

/// A validated configuration together with everything derived from it.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    /// First 16 hex digits of the SHA-256 of the canonical serialisation.
    pub hash: String,
    pub output: PathBuf,
    pub field: Field,
    pub partition: BinPartition,
    pub steps: usize,
    pub h: f64,
    pub method: TrackMethod,
    pub seeding: Seeding,
    /// Steps after which the sequence repeats exactly, if known.
    pub period_steps: Option<usize>,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Parses and validates without touching the output directory. Relative
    /// paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, CliError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::new(config, base)
    }

    pub fn new(config: ExperimentConfig, base: &Path) -> Result<Self, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let t = &config.time;
        if !(t.t_i.is_finite() && t.t_f.is_finite() && t.t_i < t.t_f) {
            return bad(format!("need t_i < t_f, got {} and {}", t.t_i, t.t_f));
        }
        if !(t.tau.is_finite() && t.tau > 0.0) {
            return bad("tau must be positive".into());
        }
        let span = (t.t_f - t.t_i) / t.tau;
        let steps = span.round();
        if (span - steps).abs() > 1e-9 * span.max(1.0) {
            return bad(format!(
                "t_f - t_i = {} is not a multiple of tau = {}",
                t.t_f - t.t_i,
                t.tau
            ));
        }
        let steps = steps as usize;
        let h = t.h.unwrap_or(t.tau / 10.0);
        if !(h.is_finite() && h > 0.0) {
            return bad("h must be positive".into());
        }
        let s = &config.svd;
        if s.n == 0 || s.n > steps {
            return bad(format!("window length n = {} must lie in 1..={steps}", s.n));
        }
        if s.modes == 0 {
            return bad("svd.modes must be at least 1".into());
        }
        if s.tol.is_some_and(|x| !(x > 0.0 && x < 1.0)) {
            return bad("svd.tol must lie in (0, 1)".into());
        }
        if config.ulam.q == 0 || config.ulam.q > u32::MAX as usize {
            return bad("ulam.q must be positive".into());
        }
        let seeding = match config.ulam.seeding {
            SeedingKind::Lattice => {
                let r = (config.ulam.q as f64).sqrt().round() as usize;
                if r * r != config.ulam.q {
                    return bad(format!("lattice seeding needs a square q, got {}", config.ulam.q));
                }
                Seeding::Lattice
            }
            SeedingKind::Random => Seeding::Random { seed: config.seed },
        };
        let method = TrackMethod::from_name(&config.tracking.method)
            .ok_or_else(|| CliError::Config(format!("unknown tracking method {:?}", config.tracking.method)))?;

        let d = &config.domain;
        if d.bins
            .iter()
            .try_fold(1usize, |a, &b| a.checked_mul(b))
            .is_none_or(|n| n > MAX_BINS)
        {
            return bad(format!(
                "{} x {} bins exceeds the limit of {MAX_BINS}",
                d.bins[0], d.bins[1]
            ));
        }
        let x = if d.periodic_x {
            Interval::periodic(d.x[0], d.x[1])
        } else {
            Interval::new(d.x[0], d.x[1])
        };
        let domain = Domain::new(x, Interval::new(d.y[0], d.y[1]));
        let mut partition = BinPartition::new(domain, d.bins).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(r) = &d.seed_region {
            let r = r.clone();
            partition = partition
                .seeded_where(move |[px, py]| px >= r.x[0] && px <= r.x[1] && py >= r.y[0] && py <= r.y[1])
                .map_err(|e| CliError::Config(format!("seed_region: {e}")))?;
        }

        let (field, period) = match &config.model {
            ModelConfig::PeriodicDwp => (Field::Analytic(AnalyticField::periodic()), Some(FORCING_PERIOD)),
            ModelConfig::QuasiPeriodicDwp { gamma } => {
                if !(gamma.is_finite() && *gamma >= 0.0) {
                    return bad("gamma must be nonnegative".into());
                }
                let f = AnalyticField::quasi_periodic(*gamma);
                (Field::Analytic(f), f.period())
            }
            ModelConfig::Gridded { path } => {
                let p = base.join(path);
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                let g = GriddedField::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                let ta = g.time_axis();
                if t.t_i < ta.start || t.t_f > ta.last() {
                    return bad(format!(
                        "time range [{}, {}] exceeds the wind data [{}, {}]",
                        t.t_i,
                        t.t_f,
                        ta.start,
                        ta.last()
                    ));
                }
                // a corner probe catches grids that do not cover the domain
                for px in [d.x[0], d.x[1]] {
                    for py in [d.y[0], d.y[1]] {
                        g.velocity(t.t_i, [px, py])
                            .map_err(|e| CliError::Config(e.to_string()))?;
                    }
                }
                (Field::Gridded(g), None)
            }
        };
        let period_steps = period.and_then(|p| {
            let r = p / t.tau;
            (r >= 1.0 && (r - r.round()).abs() < 1e-9).then_some(r.round() as usize)
        });

        let canonical = toml::to_string(&config).expect("config serialises");
        let hash = hex::encode(Sha256::digest(canonical.as_bytes()))[..16].to_string();
        Ok(Experiment {
            output: base.join(&config.output),
            config,
            hash,
            field,
            partition,
            steps,
            h,
            method,
            seeding,
            period_steps,
        })
    }

    pub fn tau(&self) -> f64 {
        self.config.time.tau
    }

    pub fn n(&self) -> usize {
        self.config.svd.n
    }

    pub fn window_count(&self) -> usize {
        self.steps - self.n() + 1
    }

    pub fn step_time(&self, s: usize) -> f64 {
        self.config.time.t_i + s as f64 * self.tau()
    }

    pub fn svd_options(&self) -> SvdOptions {
        let mut o = SvdOptions::default();
        if let Some(t) = self.config.svd.tol {
            o.tol = t;
        }
        if let Some(m) = self.config.svd.explicit_max {
            o.explicit_max = m;
        }
        o
    }

    pub fn matrix_path(&self, step: usize) -> PathBuf {
        self.output.join("matrices").join(format!("P_{step:05}.ulam"))
    }

    pub fn svd_path(&self, k: usize) -> PathBuf {
        self.output.join("svd").join(format!("W_{k:05}.svd"))
    }

    pub fn paths_path(&self, method: TrackMethod) -> PathBuf {
        self.output.join(format!("paths_{}.csv", method.name()))
    }

    pub fn equivariance_path(&self, method: TrackMethod) -> PathBuf {
        self.output.join(format!("equivariance_{}.csv", method.name()))
    }

    pub fn frames_dir(&self) -> PathBuf {
        self.output.join("frames")
    }
}
