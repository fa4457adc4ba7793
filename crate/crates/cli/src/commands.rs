//! The pipeline stages behind each subcommand.

use std::path::{Path, PathBuf};

use log::{info, warn};

use coherent_core::cocycle::{parse_window_svd, rolling_windows, rolling_windows_growing, write_window_svd, WindowSvd};
use coherent_core::diagnostics::{
    coherence_log_series, equivariance_series, mode_frames, render_frame, write_equivariance_csv,
};
use coherent_core::format::{fmt_exact, peek_config_hash, CONFIG_PREFIX};
use coherent_core::integrate::FlowSpec;
use coherent_core::tracking::{parse_paths_csv, track_by_values, track_by_vectors, write_paths_csv, TrackMethod};
use coherent_core::ulam::{build_ulam, growing_chain, parse_ulam, write_ulam, UlamMatrix};

use crate::config::Experiment;
use crate::{CliError, OutputLock};

/// Writes through a temporary sibling so an interrupted run never leaves a
/// half-written artifact behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

fn read_artifact(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Artifact(format!("{}: {e}", path.display())))
}

fn check_hash(exp: &Experiment, path: &Path, found: Option<&str>) -> Result<(), CliError> {
    match found {
        Some(h) if h == exp.hash => Ok(()),
        other => Err(CliError::Artifact(format!(
            "{} was written for config {} but the current config is {}; rerun the upstream command with --force",
            path.display(),
            other.unwrap_or("(none)"),
            exp.hash
        ))),
    }
}

/// Outcome of `build`: which step files were written and which were kept.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub written: Vec<usize>,
    pub skipped: Vec<usize>,
}

pub fn build(exp: &Experiment, force: bool) -> Result<BuildReport, CliError> {
    let _lock = OutputLock::acquire(&exp.output)?;
    let flow = FlowSpec::new(exp.field.clone(), *exp.partition.domain(), exp.tau(), exp.h)?;
    let full = exp.partition.full();
    let mut report = BuildReport::default();
    let mut built: Vec<Option<UlamMatrix>> = Vec::with_capacity(exp.steps);
    for s in 0..exp.steps {
        let path = exp.matrix_path(s);
        if !force && path.exists() {
            check_hash(exp, &path, peek_config_hash(&read_artifact(&path)?).as_deref())?;
            report.skipped.push(s);
            built.push(None);
            continue;
        }
        let t = exp.step_time(s);
        let m = match exp.period_steps {
            Some(p) if s >= p => match &built[s - p] {
                Some(m) => m.relabel(t),
                None => load_matrix(exp, s - p)?.relabel(t),
            },
            _ => build_ulam(&flow, &full, t, exp.config.ulam.q, exp.seeding)?,
        };
        write_atomic(&path, write_ulam(&m, Some(&exp.hash)).as_bytes())?;
        info!("wrote {}", path.display());
        report.written.push(s);
        built.push(Some(m));
    }
    Ok(report)
}

fn load_matrix(exp: &Experiment, s: usize) -> Result<UlamMatrix, CliError> {
    let path = exp.matrix_path(s);
    let (m, hash) =
        parse_ulam(&read_artifact(&path)?).map_err(|e| CliError::Artifact(format!("{}: {e}", path.display())))?;
    check_hash(exp, &path, hash.as_deref())?;
    Ok(m)
}

/// Loads every step matrix. Steps that repeat a stored period are swapped
/// for relabelled copies so identical windows are solved once.
pub fn load_matrices(exp: &Experiment) -> Result<Vec<UlamMatrix>, CliError> {
    let mut out: Vec<UlamMatrix> = Vec::with_capacity(exp.steps);
    for s in 0..exp.steps {
        let m = load_matrix(exp, s)?;
        let m = match exp.period_steps {
            Some(p) if s >= p && out[s - p].weights() == m.weights() && out[s - p].row_index() == m.row_index() => {
                out[s - p].relabel(m.t())
            }
            _ => m,
        };
        out.push(m);
    }
    Ok(out)
}

fn growing_seed(exp: &Experiment) -> Option<Vec<usize>> {
    exp.partition.is_growing().then(|| exp.partition.active_rows())
}

/// The matrices of window `k`, restricted to the seed in growing mode.
fn window_chain(exp: &Experiment, matrices: &[UlamMatrix], k: usize) -> Result<Vec<UlamMatrix>, CliError> {
    let window = &matrices[k..k + exp.n()];
    Ok(match growing_seed(exp) {
        Some(seed) => growing_chain(window, &seed)?,
        None => window.to_vec(),
    })
}

pub fn svd(exp: &Experiment) -> Result<usize, CliError> {
    let _lock = OutputLock::acquire(&exp.output)?;
    let matrices = load_matrices(exp)?;
    let opts = exp.svd_options();
    let (n, big_n) = (exp.n(), exp.config.svd.modes);
    let windows = match growing_seed(exp) {
        Some(seed) => rolling_windows_growing(&matrices, &seed, n, big_n, &opts)?,
        None => rolling_windows(&matrices, n, big_n, &opts)?,
    };
    for (k, w) in windows.iter().enumerate() {
        write_atomic(&exp.svd_path(k), write_window_svd(w, Some(&exp.hash)).as_bytes())?;
    }
    info!("wrote {} window SVDs", windows.len());
    Ok(windows.len())
}

pub fn load_svds(exp: &Experiment) -> Result<Vec<WindowSvd>, CliError> {
    (0..exp.window_count())
        .map(|k| {
            let path = exp.svd_path(k);
            let (w, hash) = parse_window_svd(&read_artifact(&path)?)
                .map_err(|e| CliError::Artifact(format!("{}: {e}", path.display())))?;
            check_hash(exp, &path, hash.as_deref())?;
            Ok(w)
        })
        .collect()
}

pub fn track(exp: &Experiment, method: TrackMethod) -> Result<PathBuf, CliError> {
    let _lock = OutputLock::acquire(&exp.output)?;
    let svds = load_svds(exp)?;
    let paths = match method {
        TrackMethod::ByValues => track_by_values(&svds)?,
        TrackMethod::ByVectors => {
            let matrices = load_matrices(exp)?;
            let steps = match growing_seed(exp) {
                Some(seed) => (0..svds.len())
                    .map(|k| matrices[k].restrict_growing(&seed))
                    .collect::<Result<Vec<_>, _>>()?,
                None => matrices[..svds.len()].to_vec(),
            };
            track_by_vectors(&svds, &steps)?
        }
    };
    if !paths.flagged.is_empty() {
        warn!(
            "evolved vectors vanished at {} window(s); raw vectors were compared there",
            paths.flagged.len()
        );
    }
    let out = exp.paths_path(method);
    write_atomic(&out, write_paths_csv(&paths, Some(&exp.hash)).as_bytes())?;
    Ok(out)
}

pub fn equivariance(exp: &Experiment, method: TrackMethod) -> Result<PathBuf, CliError> {
    let _lock = OutputLock::acquire(&exp.output)?;
    let svds = load_svds(exp)?;
    let src = exp.paths_path(method);
    let text = read_artifact(&src)?;
    check_hash(exp, &src, peek_config_hash(&text).as_deref())?;
    let paths = parse_paths_csv(&text).map_err(|e| CliError::Artifact(format!("{}: {e}", src.display())))?;
    let series = equivariance_series(&svds, &paths, exp.n())?;
    let out = exp.equivariance_path(method);
    write_atomic(&out, write_equivariance_csv(&series, Some(&exp.hash)).as_bytes())?;
    Ok(out)
}

/// Index of the window starting at `t0`.
fn window_at(exp: &Experiment, t0: f64) -> Result<usize, CliError> {
    let pos = (t0 - exp.config.time.t_i) / exp.tau();
    let k = pos.round();
    if (pos - k).abs() > 1e-9 || k < 0.0 || k as usize >= exp.window_count() {
        return Err(CliError::Config(format!(
            "no window starts at {t0}; windows start at {} + k * {} for k < {}",
            exp.config.time.t_i,
            exp.tau(),
            exp.window_count()
        )));
    }
    Ok(k as usize)
}

fn mode_index(exp: &Experiment, j: usize) -> Result<usize, CliError> {
    if j == 0 || j > exp.config.svd.modes {
        return Err(CliError::Config(format!(
            "mode {j} outside 1..={}",
            exp.config.svd.modes
        )));
    }
    Ok(j - 1)
}

/// Writes `frame_{k}_{j}_{ñ}.csv` and `.pgm` for `ñ = 0..=n`; returns the
/// number of frames.
pub fn animate(exp: &Experiment, t0: f64, j: usize) -> Result<usize, CliError> {
    let (k, mode) = (window_at(exp, t0)?, mode_index(exp, j)?);
    let _lock = OutputLock::acquire(&exp.output)?;
    let path = exp.svd_path(k);
    let (w, hash) =
        parse_window_svd(&read_artifact(&path)?).map_err(|e| CliError::Artifact(format!("{}: {e}", path.display())))?;
    check_hash(exp, &path, hash.as_deref())?;
    let matrices = load_matrices(exp)?;
    let chain = window_chain(exp, &matrices, k)?;
    let frames = mode_frames(&w, &chain, mode)?;
    let dir = exp.frames_dir();
    let label = fmt_exact(w.t0);
    let bins = exp.partition.bins();
    for f in &frames.frames {
        if f.is_empty_frame() {
            warn!(
                "frame {} of window {label} mode {j} is empty: all mass escaped",
                f.steps
            );
        }
        let raster = render_frame(&f.values, &f.index, bins);
        let stem = format!("frame_{label}_{j}_{}", f.steps);
        let csv = format!("{CONFIG_PREFIX}{}\n{}", exp.hash, raster.to_csv());
        write_atomic(&dir.join(format!("{stem}.csv")), csv.as_bytes())?;
        let pgm = raster.to_pgm(frames.colour_limit, Some(&format!("config {}", exp.hash)));
        write_atomic(&dir.join(format!("{stem}.pgm")), &pgm)?;
    }
    Ok(frames.frames.len())
}

/// Writes `coherence_{k}_{j}.csv` with `(1/n_t) log ‖uᵀP^{(n_t)}‖` for
/// `n_t = 1..=n`.
pub fn coherence_log(exp: &Experiment, t0: f64, j: usize) -> Result<PathBuf, CliError> {
    let (k, mode) = (window_at(exp, t0)?, mode_index(exp, j)?);
    let _lock = OutputLock::acquire(&exp.output)?;
    let path = exp.svd_path(k);
    let (w, hash) =
        parse_window_svd(&read_artifact(&path)?).map_err(|e| CliError::Artifact(format!("{}: {e}", path.display())))?;
    check_hash(exp, &path, hash.as_deref())?;
    let u =
        w.u.get(mode)
            .ok_or_else(|| CliError::Artifact(format!("{} holds only {} modes", path.display(), w.u.len())))?;
    let matrices = load_matrices(exp)?;
    let chain = window_chain(exp, &matrices, k)?;
    let rates = coherence_log_series(u, &chain, 0, exp.n())?;
    let mut s = format!("{CONFIG_PREFIX}{}\nn_t,rate\n", exp.hash);
    for (i, r) in rates.iter().enumerate() {
        s.push_str(&format!("{},{}\n", i + 1, fmt_exact(*r)));
    }
    let out = exp.output.join(format!("coherence_{}_{j}.csv", fmt_exact(w.t0)));
    write_atomic(&out, s.as_bytes())?;
    Ok(out)
}
