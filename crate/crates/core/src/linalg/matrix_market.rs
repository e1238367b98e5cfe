//! MatrixMarket coordinate format (ASCII, 1-based indices).

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Scalar};

pub fn write_matrix_market<S: Scalar, W: Write>(a: &CsrMatrix<S>, mut out: W) -> Result<()> {
    let field = if S::IS_COMPLEX { "complex" } else { "real" };
    let mut buf = String::new();
    writeln!(buf, "%%MatrixMarket matrix coordinate {field} general").unwrap();
    writeln!(buf, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz()).unwrap();
    for (i, j, v) in a.triplets() {
        let z = v.to_complex();
        if S::IS_COMPLEX {
            writeln!(buf, "{} {} {:e} {:e}", i + 1, j + 1, z.re, z.im).unwrap();
        } else {
            writeln!(buf, "{} {} {:e}", i + 1, j + 1, z.re).unwrap();
        }
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Reads a coordinate-format file. `symmetric` headers are expanded.
pub fn read_matrix_market<S: Scalar, R: Read>(input: R) -> Result<CsrMatrix<S>> {
    let bad = |m: String| Error::Parse {
        path: "<matrix market>".into(),
        message: m,
    };
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| bad("empty input".into()))??;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(bad(format!("unsupported header '{header}'")));
    }
    let complex = match tokens[3].as_str() {
        "real" | "integer" => false,
        "complex" => true,
        other => return Err(bad(format!("unsupported field '{other}'"))),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(bad(format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if size.is_none() {
            if f.len() != 3 {
                return Err(bad(format!("bad size line '{line}'")));
            }
            let p = |s: &str| s.parse::<usize>().map_err(|e| bad(e.to_string()));
            size = Some((p(f[0])?, p(f[1])?, p(f[2])?));
            continue;
        }
        let need = if complex { 4 } else { 3 };
        if f.len() < need {
            return Err(bad(format!("bad entry line '{line}'")));
        }
        let idx = |s: &str| -> Result<usize> {
            let v = s.parse::<usize>().map_err(|e| bad(e.to_string()))?;
            v.checked_sub(1).ok_or_else(|| bad("indices are 1-based".into()))
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(e.to_string()));
        let (i, j) = (idx(f[0])?, idx(f[1])?);
        let z = if complex {
            Complex64::new(num(f[2])?, num(f[3])?)
        } else {
            Complex64::new(num(f[2])?, 0.0)
        };
        let v = S::from_complex(z).ok_or_else(|| Error::Field("complex entry in a real matrix".into()))?;
        triplets.push((i, j, v));
        if symmetric && i != j {
            triplets.push((j, i, v));
        }
    }
    let (m, n, _) = size.ok_or_else(|| bad("missing size line".into()))?;
    CsrMatrix::from_triplets(m, n, &triplets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_complex() {
        let a = CsrMatrix::from_triplets(
            2,
            3,
            &[(0, 2, Complex64::new(1.5, -2.0)), (1, 0, Complex64::new(0.25, 0.0))],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let b: CsrMatrix<Complex64> = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn symmetric_header_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 -1\n";
        let a: CsrMatrix<f64> = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(a.to_dense(), vec![vec![4.0, -1.0], vec![-1.0, 0.0]]);
    }

    #[test]
    fn complex_file_into_real_field_fails() {
        let text = "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 0 1\n";
        assert!(read_matrix_market::<f64, _>(text.as_bytes()).is_err());
    }
}
