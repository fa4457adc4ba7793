use std::fmt::Write as _;

use super::{PathStep, TrackMethod, TrackedPaths};
use crate::format::{fmt_exact, parse_finite, parse_num, FormatError, CONFIG_PREFIX};

const HEADER: &str = "method,mode,k,rank,value,sign";

/// CSV with columns `method,mode,k,rank,value,sign`, one row per mode and
/// window, grouped by mode. `mode` and `rank` are 1-based and `k` is the
/// window start time.
pub fn write_paths_csv(paths: &TrackedPaths, config_hash: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(h) = config_hash {
        writeln!(s, "{CONFIG_PREFIX}{h}").unwrap();
    }
    writeln!(s, "{HEADER}").unwrap();
    let method = paths.method.name();
    for (mode, path) in paths.paths.iter().enumerate() {
        for (step, t0) in path.iter().zip(&paths.t0) {
            writeln!(
                s,
                "{method},{},{},{},{},{}",
                mode + 1,
                fmt_exact(*t0),
                step.rank + 1,
                fmt_exact(step.value),
                step.sign
            )
            .unwrap();
        }
    }
    s
}

/// Parses the CSV written by [`write_paths_csv`], checking that every mode
/// covers the same windows and that ranks form a permutation at each window.
pub fn parse_paths_csv(text: &str) -> Result<TrackedPaths, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        Some((n, _)) => return Err(FormatError::syntax(n, format!("expected header `{HEADER}`"))),
        None => return Err(FormatError::Truncated("CSV header".into())),
    }
    let mut method = None;
    let mut t0: Vec<f64> = Vec::new();
    let mut paths: Vec<Vec<PathStep>> = Vec::new();
    for (n, line) in lines {
        let mut f = line.split(',');
        let m = f.next().unwrap_or("");
        let m = TrackMethod::from_name(m).ok_or_else(|| FormatError::syntax(n, format!("unknown method {m:?}")))?;
        if *method.get_or_insert(m) != m {
            return Err(FormatError::syntax(n, "mixed methods"));
        }
        let mode: usize = parse_num(f.next(), n, "mode")?;
        let k = parse_finite(f.next(), n, "k")?;
        let rank: usize = parse_num(f.next(), n, "rank")?;
        let value = parse_finite(f.next(), n, "value")?;
        let sign: i8 = parse_num(f.next(), n, "sign")?;
        if f.next().is_some() {
            return Err(FormatError::syntax(n, "expected six fields"));
        }
        if sign != 1 && sign != -1 {
            return Err(FormatError::syntax(n, "sign must be 1 or -1"));
        }
        if rank == 0 || mode == 0 {
            return Err(FormatError::syntax(n, "mode and rank are 1-based"));
        }
        if mode == paths.len() + 1 {
            paths.push(Vec::new());
        } else if mode != paths.len() {
            return Err(FormatError::syntax(n, format!("mode {mode} out of order")));
        }
        let path = paths.last_mut().expect("a mode is open");
        let idx = path.len();
        if mode == 1 {
            t0.push(k);
        } else if t0.get(idx) != Some(&k) {
            return Err(FormatError::syntax(n, format!("window {k} does not match mode 1")));
        }
        path.push(PathStep {
            rank: rank - 1,
            value,
            sign,
        });
    }
    let method = method.ok_or_else(|| FormatError::Truncated("no rows".into()))?;
    let big_n = paths.len();
    if paths.iter().any(|p| p.len() != t0.len()) {
        return Err(FormatError::Shape("modes cover different windows".into()));
    }
    for k in 0..t0.len() {
        let mut seen = vec![false; big_n];
        for p in &paths {
            let r = p[k].rank;
            if r >= big_n || std::mem::replace(&mut seen[r], true) {
                return Err(FormatError::Shape(format!(
                    "ranks at window {} are not a permutation",
                    t0[k]
                )));
            }
        }
    }
    Ok(TrackedPaths {
        method,
        t0,
        paths,
        flagged: Vec::new(),
    })
}
