use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{QicasError, Result};
use crate::rotation::OrbitalRotation;

/// Plain-text orbital matrix: a line with `D`, then `D` rows of `D`
/// coefficients. Row `i` expands orbital `i` in the input basis.
pub fn write_orbitals<W: std::io::Write>(u: &OrbitalRotation, sink: &mut W) -> std::io::Result<()> {
    let m = u.matrix();
    let d = m.nrows();
    let mut out = format!("{d}\n");
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    sink.write_all(out.as_bytes())
}

pub fn parse_orbitals(text: &str) -> Result<OrbitalRotation> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (ln, first) = lines.next().ok_or_else(|| QicasError::Format {
        line: 1,
        token: String::new(),
        message: "empty orbital file".into(),
    })?;
    let d: usize = first.trim().parse().map_err(|_| QicasError::Format {
        line: ln + 1,
        token: first.trim().to_string(),
        message: "expected the orbital count".into(),
    })?;
    let mut m = DMatrix::zeros(d, d);
    let mut rows = 0;
    for (ln, line) in lines {
        if rows == d {
            return Err(QicasError::Format {
                line: ln + 1,
                token: line.trim().to_string(),
                message: format!("more than {d} rows"),
            });
        }
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != d {
            return Err(QicasError::Format {
                line: ln + 1,
                token: line.trim().to_string(),
                message: format!("expected {d} coefficients"),
            });
        }
        for (j, tok) in vals.iter().enumerate() {
            m[(rows, j)] = tok.replace(['D', 'd'], "E").parse().map_err(|_| QicasError::Format {
                line: ln + 1,
                token: tok.to_string(),
                message: "not a number".into(),
            })?;
        }
        rows += 1;
    }
    if rows != d {
        return Err(QicasError::Shape(format!("orbital file has {rows} rows, expected {d}")));
    }
    OrbitalRotation::new(m)
}

pub fn read_orbitals(path: impl AsRef<Path>) -> Result<OrbitalRotation> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| QicasError::io(path, e))?;
    parse_orbitals(&text)
}
