use std::fmt::Write as _;

use super::UlamMatrix;
use crate::format::{fmt_exact, fmt_sig, parse_finite, parse_num, seal, unseal, FormatError};

/// Largest index-set size accepted from a file.
const MAX_DIM: usize = 1 << 22;

/// Serialises a matrix: `ULAM m m' Q t tau`, then `ROWS`/`COLS` bin-id lists
/// when they are not simply `0..m` / `0..m'`, then sorted `row col weight`
/// triplets. The text is sealed with a SHA-256 trailer.
pub fn write_ulam(m: &UlamMatrix, config_hash: Option<&str>) -> String {
    let mut s = String::with_capacity(m.nnz() * 24 + 64);
    writeln!(
        s,
        "ULAM {} {} {} {} {}",
        m.nrows(),
        m.ncols(),
        m.q(),
        fmt_exact(m.t()),
        fmt_exact(m.tau())
    )
    .unwrap();
    write_index(&mut s, "ROWS", m.row_index());
    write_index(&mut s, "COLS", m.col_index());
    for (i, j, w) in m.entries() {
        writeln!(s, "{i} {j} {}", fmt_sig(w, 12)).unwrap();
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

fn parse_index(rest: &str, line: usize, len: usize) -> Result<Vec<usize>, FormatError> {
    let ids = rest
        .split_whitespace()
        .map(|t| parse_num::<usize>(Some(t), line, "bin id"))
        .collect::<Result<Vec<_>, _>>()?;
    if ids.len() != len {
        return Err(FormatError::Shape(format!(
            "line {line}: expected {len} bin ids, found {}",
            ids.len()
        )));
    }
    if ids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FormatError::syntax(line, "bin ids must be strictly increasing"));
    }
    Ok(ids)
}

/// Parses and validates a matrix file. Returns the config hash it carries.
pub fn parse_ulam(text: &str) -> Result<(UlamMatrix, Option<String>), FormatError> {
    let un = unseal(text)?;
    let mut lines = un.lines.iter().copied().peekable();
    let (ln, header) = lines
        .next()
        .ok_or_else(|| FormatError::Truncated("ULAM header".into()))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("ULAM") {
        return Err(FormatError::syntax(ln, "expected ULAM header"));
    }
    let m: usize = parse_num(tok.next(), ln, "m")?;
    let mc: usize = parse_num(tok.next(), ln, "m'")?;
    let q: u32 = parse_num(tok.next(), ln, "Q")?;
    let t = parse_finite(tok.next(), ln, "t")?;
    let tau = parse_finite(tok.next(), ln, "tau")?;
    if tok.next().is_some() {
        return Err(FormatError::syntax(ln, "trailing tokens in header"));
    }
    if m > MAX_DIM || mc > MAX_DIM {
        return Err(FormatError::Shape(format!("dimensions {m}x{mc} too large")));
    }
    if q == 0 {
        return Err(FormatError::syntax(ln, "Q must be positive"));
    }

    let mut rows: Option<Vec<usize>> = None;
    let mut cols: Option<Vec<usize>> = None;
    while let Some(&(ln, l)) = lines.peek() {
        if let Some(rest) = l.strip_prefix("ROWS") {
            if rows.is_some() {
                return Err(FormatError::syntax(ln, "duplicate ROWS"));
            }
            rows = Some(parse_index(rest, ln, m)?);
        } else if let Some(rest) = l.strip_prefix("COLS") {
            if cols.is_some() {
                return Err(FormatError::syntax(ln, "duplicate COLS"));
            }
            cols = Some(parse_index(rest, ln, mc)?);
        } else {
            break;
        }
        lines.next();
    }

    let qf = q as f64;
    let mut counts: Vec<(usize, usize, u32)> = Vec::new();
    let mut row_mass = 0u64;
    let mut last: Option<(usize, usize)> = None;
    for (ln, l) in lines {
        let mut tok = l.split_whitespace();
        let i: usize = parse_num(tok.next(), ln, "row")?;
        let j: usize = parse_num(tok.next(), ln, "col")?;
        let w = parse_finite(tok.next(), ln, "weight")?;
        if tok.next().is_some() {
            return Err(FormatError::syntax(ln, "expected `row col weight`"));
        }
        if i >= m || j >= mc {
            return Err(FormatError::Shape(format!(
                "line {ln}: entry ({i}, {j}) outside {m}x{mc}"
            )));
        }
        if last.is_some_and(|p| p >= (i, j)) {
            return Err(FormatError::syntax(ln, "entries must be sorted and unique"));
        }
        if last.is_none_or(|p| p.0 != i) {
            row_mass = 0;
        }
        last = Some((i, j));
        let k = (w * qf).round();
        if !(k >= 1.0 && (w * qf - k).abs() <= 1e-6 * k.max(1.0)) {
            return Err(FormatError::syntax(
                ln,
                format!("weight {w} is not a positive multiple of 1/{q}"),
            ));
        }
        row_mass += k as u64;
        if row_mass > q as u64 {
            return Err(FormatError::Shape(format!("row {i} sums above 1")));
        }
        counts.push((i, j, k as u32));
    }
    let row_index = rows.unwrap_or_else(|| (0..m).collect());
    let col_index = cols.unwrap_or_else(|| (0..mc).collect());
    Ok((
        UlamMatrix::from_counts(t, tau, q, row_index, col_index, &counts),
        un.config_hash,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> UlamMatrix {
        UlamMatrix::from_counts(
            3.0,
            1.0,
            3,
            vec![2, 5],
            vec![2, 4, 5],
            &[(0, 0, 1), (0, 2, 2), (1, 1, 3)],
        )
    }

    #[test]
    fn round_trip() {
        let m = sample();
        let text = write_ulam(&m, Some("abc"));
        assert!(text.starts_with("# config abc\nULAM 2 3 3 3 1\nROWS 2 5\nCOLS 2 4 5\n0 0 0.333333333333\n"));
        let (back, hash) = parse_ulam(&text).unwrap();
        assert_eq!(hash.as_deref(), Some("abc"));
        assert_eq!(back.row_index(), m.row_index());
        assert_eq!(back.col_index(), m.col_index());
        assert_eq!(back.weights(), m.weights());
    }

    #[test]
    fn identity_index_lists_are_implicit() {
        let m = UlamMatrix::from_counts(0.0, 1.0, 1, vec![0, 1], vec![0, 1], &[(0, 1, 1), (1, 0, 1)]);
        let text = write_ulam(&m, None);
        assert!(!text.contains("ROWS") && !text.contains("COLS"));
        assert_eq!(parse_ulam(&text).unwrap().0, m);
    }

    #[test]
    fn corruption_is_detected() {
        let text = write_ulam(&sample(), None);
        let bad = text.replacen("0 2 0.666666666667", "0 2 0.666666666668", 1);
        assert!(matches!(parse_ulam(&bad), Err(FormatError::Checksum { .. })));
    }

    #[test]
    fn invalid_content_is_rejected() {
        let cases = [
            "ULAM 2 2 4 0 1\n0 0 0.3\n",
            "ULAM 2 2 4 0 1\n0 0 0.75\n0 1 0.5\n",
            "ULAM 2 2 4 0 1\n0 1 0.25\n0 0 0.25\n",
            "ULAM 2 2 4 0 1\n2 0 0.25\n",
            "ULAM 2 2 0 0 1\n",
            "ULAM 2 2 4 0 1\nROWS 3\n",
            "ULAM 2 2 4 0 1\nROWS 3 1\n",
            "ULAM 2 2 4 0\n",
            "ULUM 2 2 4 0 1\n",
            "",
        ];
        for c in cases {
            assert!(parse_ulam(c).is_err(), "{c:?}");
        }
        assert!(parse_ulam("ULAM 2 2 4 0 1\n0 0 0.25\n1 1 1\n").is_ok());
    }
}
