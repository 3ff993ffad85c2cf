//! Plain-text matrix dumps: a header line with the dimension (`n` for square
//! matrices, `rows cols` otherwise), then one line per row of
//! space-separated values printed with 17 significant digits (exact round trip).

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub fn to_text(m: &DMatrix<f64>) -> String {
    let mut s = if m.nrows() == m.ncols() {
        format!("{}\n", m.nrows())
    } else {
        format!("{} {}\n", m.nrows(), m.ncols())
    };
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.16e}", m[(i, j)]);
        }
        s.push('\n');
    }
    s
}

pub fn from_text(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing dimension"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(1, "bad dimension")))
        .collect::<Result<_>>()?;
    let (rows, cols) = match dims[..] {
        [n] => (n, n),
        [r, c] => (r, c),
        _ => return Err(Error::parse(1, "expected `n` or `rows cols`")),
    };
    let mut m = DMatrix::<f64>::zeros(rows, cols);
    let mut seen = 0;
    for (lineno, line) in lines {
        if seen == rows {
            return Err(Error::parse(lineno + 1, "too many rows"));
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse(lineno + 1, format!("bad value {t:?}"))))
            .collect::<Result<_>>()?;
        if vals.len() != cols {
            return Err(Error::parse(lineno + 1, format!("expected {cols} values")));
        }
        for (j, v) in vals.into_iter().enumerate() {
            m[(seen, j)] = v;
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::parse(rows + 1, "missing rows"));
    }
    Ok(m)
}
