use std::fmt::Write as _;

use super::WindowSvd;
use crate::format::{fmt_exact, parse_finite, parse_num, seal, unseal, FormatError};

const MAX_DIM: usize = 1 << 22;
const MAX_VALUES: usize = 1 << 24;

/// Serialises a window SVD: `SVD t0 n N m m'`, optional `ROWS`/`COLS` bin-id
/// lists, `N` lines `j s_j` (1-based), then `m` rows of `N` left-vector
/// entries and `m'` rows of `N` right-vector entries, at 17 significant
/// digits. Sealed with a SHA-256 trailer.
pub fn write_window_svd(w: &WindowSvd, config_hash: Option<&str>) -> String {
    let big_n = w.s.len();
    let (m, mc) = (w.row_index.len(), w.col_index.len());
    let mut s = String::with_capacity((m + mc) * big_n * 25 + 128);
    writeln!(s, "SVD {} {} {big_n} {m} {mc}", fmt_exact(w.t0), w.n).unwrap();
    write_index(&mut s, "ROWS", &w.row_index);
    write_index(&mut s, "COLS", &w.col_index);
    for (j, sj) in w.s.iter().enumerate() {
        writeln!(s, "{} {}", j + 1, fmt_exact(*sj)).unwrap();
    }
    for (vecs, len) in [(&w.u, m), (&w.v, mc)] {
        for i in 0..len {
            let row: Vec<String> = vecs.iter().map(|c| fmt_exact(c[i])).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
    }
    seal(&s, config_hash)
}

fn write_index(s: &mut String, tag: &str, ids: &[usize]) {
    if ids.iter().enumerate().all(|(p, &b)| p == b) {
        return;
    }
    s.push_str(tag);
    for b in ids {
        write!(s, " {b}").unwrap();
    }
    s.push('\n');
}

/// Parses a window SVD file, returning it with the config hash it carries.
pub fn parse_window_svd(text: &str) -> Result<(WindowSvd, Option<String>), FormatError> {
    let un = unseal(text)?;
    let mut lines = un.lines.iter().copied().peekable();
    let (ln, header) = lines
        .next()
        .ok_or_else(|| FormatError::Truncated("SVD header".into()))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("SVD") {
        return Err(FormatError::syntax(ln, "expected SVD header"));
    }
    let t0 = parse_finite(tok.next(), ln, "t0")?;
    let n: usize = parse_num(tok.next(), ln, "n")?;
    let big_n: usize = parse_num(tok.next(), ln, "N")?;
    let m: usize = parse_num(tok.next(), ln, "m")?;
    let mc: usize = parse_num(tok.next(), ln, "m'")?;
    if tok.next().is_some() {
        return Err(FormatError::syntax(ln, "trailing tokens in header"));
    }
    if m > MAX_DIM || mc > MAX_DIM || big_n > m.min(mc) {
        return Err(FormatError::Shape(format!("N = {big_n} with dimensions {m}x{mc}")));
    }
    if (m + mc).saturating_mul(big_n) > MAX_VALUES {
        return Err(FormatError::Shape("too many vector entries".into()));
    }

    let mut row_index = None;
    let mut col_index = None;
    while let Some(&(ln, l)) = lines.peek() {
        let (slot, rest, len) = if let Some(r) = l.strip_prefix("ROWS") {
            (&mut row_index, r, m)
        } else if let Some(r) = l.strip_prefix("COLS") {
            (&mut col_index, r, mc)
        } else {
            break;
        };
        if slot.is_some() {
            return Err(FormatError::syntax(ln, "duplicate index list"));
        }
        let ids = rest
            .split_whitespace()
            .map(|t| parse_num::<usize>(Some(t), ln, "bin id"))
            .collect::<Result<Vec<_>, _>>()?;
        if ids.len() != len || ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FormatError::Shape(format!(
                "line {ln}: expected {len} increasing bin ids"
            )));
        }
        *slot = Some(ids);
        lines.next();
    }

    let mut s = Vec::with_capacity(big_n);
    for j in 0..big_n {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| FormatError::Truncated("singular values".into()))?;
        let mut tok = l.split_whitespace();
        let idx: usize = parse_num(tok.next(), ln, "rank")?;
        let sj = parse_finite(tok.next(), ln, "singular value")?;
        if idx != j + 1 || tok.next().is_some() {
            return Err(FormatError::syntax(ln, format!("expected `{} s`", j + 1)));
        }
        if sj < 0.0 || s.last().is_some_and(|&p| sj > p) {
            return Err(FormatError::syntax(
                ln,
                "singular values must be nonnegative and descending",
            ));
        }
        s.push(sj);
    }
    let mut read_block = |len: usize, what: &str| -> Result<Vec<Vec<f64>>, FormatError> {
        let mut cols = vec![Vec::with_capacity(len.min(4096)); big_n];
        for _ in 0..len {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| FormatError::Truncated(format!("{what} rows")))?;
            let mut tok = l.split_whitespace();
            for c in cols.iter_mut() {
                c.push(parse_finite(tok.next(), ln, what)?);
            }
            if tok.next().is_some() {
                return Err(FormatError::syntax(ln, format!("expected {big_n} values")));
            }
        }
        Ok(cols)
    };
    let u = read_block(m, "U")?;
    let v = read_block(mc, "V")?;
    if let Some((ln, _)) = lines.next() {
        return Err(FormatError::syntax(ln, "unexpected trailing content"));
    }
    Ok((
        WindowSvd {
            t0,
            n,
            s,
            u,
            v,
            row_index: row_index.unwrap_or_else(|| (0..m).collect()),
            col_index: col_index.unwrap_or_else(|| (0..mc).collect()),
        },
        un.config_hash,
    ))
}
