//! Text helpers shared by every on-disk format: significant-digit rendering,
//! the provenance header line and the optional SHA-256 trailer.

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Prefix of the provenance line carrying the experiment config hash.
pub const CONFIG_PREFIX: &str = "# config ";
/// Prefix of the integrity trailer line.
pub const CHECKSUM_PREFIX: &str = "# sha256 ";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("checksum mismatch: file says {expected}, content hashes to {actual}")]
    Checksum { expected: String, actual: String },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
}

impl FormatError {
    pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> Self {
        FormatError::Syntax { line, msg: msg.into() }
    }
}

/// Renders `x` with `digits` significant digits, `%g` style: fixed notation
/// for moderate exponents, scientific otherwise, trailing zeros removed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

/// Shortest decimal text that parses back to exactly `x` (at most 17
/// significant digits).
pub fn fmt_exact(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Wraps a body with the optional provenance line and appends the checksum
/// trailer computed over everything before it.
pub fn seal(body: &str, config_hash: Option<&str>) -> String {
    let mut out = String::with_capacity(body.len() + 100);
    if let Some(h) = config_hash {
        out.push_str(CONFIG_PREFIX);
        out.push_str(h);
        out.push('\n');
    }
    out.push_str(body);
    if !out.ends_with('\n') {
        out.push('\n');
    }
    let sum = sha256_hex(out.as_bytes());
    out.push_str(CHECKSUM_PREFIX);
    out.push_str(&sum);
    out.push('\n');
    out
}

/// A sealed file split back into its parts. `lines` holds the content lines
/// with their 1-based line numbers; comment lines are dropped.
#[derive(Debug)]
pub struct Unsealed<'a> {
    pub config_hash: Option<String>,
    pub lines: Vec<(usize, &'a str)>,
}

/// Verifies the checksum trailer when present and strips comment lines.
pub fn unseal(text: &str) -> Result<Unsealed<'_>, FormatError> {
    let mut body_end = text.len();
    let trimmed = text.trim_end_matches('\n');
    let pos = trimmed.rfind('\n').map_or(0, |p| p + 1);
    if let Some(expected) = trimmed[pos..].strip_prefix(CHECKSUM_PREFIX) {
        let actual = sha256_hex(&text.as_bytes()[..pos]);
        if expected.trim() != actual {
            return Err(FormatError::Checksum {
                expected: expected.trim().to_string(),
                actual,
            });
        }
        body_end = pos;
    }
    let mut config_hash = None;
    let mut lines = Vec::new();
    for (i, line) in text[..body_end].lines().enumerate() {
        if let Some(h) = line.strip_prefix(CONFIG_PREFIX) {
            if i == 0 {
                config_hash = Some(h.trim().to_string());
            }
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        lines.push((i + 1, line));
    }
    Ok(Unsealed { config_hash, lines })
}

/// Reads only the provenance hash from the first line of a file, if any.
pub fn peek_config_hash(text: &str) -> Option<String> {
    text.lines()
        .next()
        .and_then(|l| l.strip_prefix(CONFIG_PREFIX))
        .map(|h| h.trim().to_string())
}

pub(crate) fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| FormatError::syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| FormatError::syntax(line, format!("bad {what}: {tok:?}")))
}

pub(crate) fn parse_finite(tok: Option<&str>, line: usize, what: &str) -> Result<f64, FormatError> {
    let v: f64 = parse_num(tok, line, what)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FormatError::syntax(line, format!("non-finite {what}")))
    }
}
