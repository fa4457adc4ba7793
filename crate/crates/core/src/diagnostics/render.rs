use crate::format::{fmt_exact, parse_finite, FormatError};

/// Largest raster accepted by the CSV reader.
const MAX_CELLS: usize = 1 << 24;

/// Bin values on the full `nx × ny` grid. Row `j` holds y-bin `j`, so
/// `cells[j * nx + i]` is bin id `i + j * nx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<f64>,
}

/// Scatters `values` (over bin ids `index`) onto the full grid; bins not in
/// `index` are zero.
pub fn render_frame(values: &[f64], index: &[usize], bins: [usize; 2]) -> Raster {
    assert_eq!(values.len(), index.len());
    let [nx, ny] = bins;
    let mut cells = vec![0.0; nx * ny];
    for (&b, &v) in index.iter().zip(values) {
        cells[b] = v;
    }
    Raster { nx, ny, cells }
}

impl Raster {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[j * self.nx + i]
    }

    /// One line per y-bin, lowest y first.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() * 12);
        for row in self.cells.chunks(self.nx.max(1)) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&fmt_exact(*v));
            }
            s.push('\n');
        }
        s
    }

    /// Binary greymap, highest y on top. Values map linearly from `[-c, c]`
    /// to `[0, 255]`; `c = 0` renders mid-grey. `comment` goes into the
    /// header as a `#` line.
    pub fn to_pgm(&self, c: f64, comment: Option<&str>) -> Vec<u8> {
        let comment = comment.map(|t| format!("# {t}\n")).unwrap_or_default();
        let mut out = format!("P5\n{comment}{} {}\n255\n", self.nx, self.ny).into_bytes();
        for row in self.cells.chunks(self.nx.max(1)).rev() {
            out.extend(row.iter().map(|&v| grey(v, c)));
        }
        out
    }
}

fn grey(v: f64, c: f64) -> u8 {
    if c <= 0.0 || !v.is_finite() {
        return 128;
    }
    ((v + c) / (2.0 * c) * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Reads the CSV written by [`Raster::to_csv`]; `#` lines are skipped.
pub fn parse_raster_csv(text: &str) -> Result<Raster, FormatError> {
    let mut nx = 0;
    let mut cells = Vec::new();
    let mut ny = 0;
    for (n, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = cells.len();
        for f in line.split(',') {
            cells.push(parse_finite(Some(f.trim()), n, "cell")?);
            if cells.len() > MAX_CELLS {
                return Err(FormatError::Shape("raster too large".into()));
            }
        }
        let width = cells.len() - before;
        if ny == 0 {
            nx = width;
        } else if width != nx {
            return Err(FormatError::Shape(format!("line {n}: {width} cells, expected {nx}")));
        }
        ny += 1;
    }
    if ny == 0 {
        return Err(FormatError::Truncated("empty raster".into()));
    }
    Ok(Raster { nx, ny, cells })
}
