//! Matrix Market `array real general` reader and writer.
//!
//! Entries are stored column-major in the file, as the format prescribes; the
//! reader transposes into the row-major [`DenseMatrix`]. Values are written
//! with 17 significant digits so every `f64` round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{AbsError, Result};
use crate::linalg::{DenseMatrix, DenseVector};

pub const HEADER: &str = "%%MatrixMarket matrix array real general";

fn parse_err(line: usize, msg: impl Into<String>) -> AbsError {
    AbsError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses the text of a Matrix Market array file.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    let expected = ["%%matrixmarket", "matrix", "array", "real", "general"];
    if tokens.len() != expected.len() || tokens.iter().zip(expected).any(|(t, e)| t != e) {
        return Err(parse_err(1, format!("expected header `{HEADER}`")));
    }

    let mut body = lines.filter(|(_, l)| {
        let l = l.trim();
        !l.is_empty() && !l.starts_with('%')
    });

    let (dim_line, dims) = body
        .next()
        .ok_or_else(|| parse_err(2, "missing dimension line"))?;
    let dims: Vec<&str> = dims.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(dim_line, "dimension line must be `rows cols`"));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(dim_line, format!("invalid dimension `{s}`")))
    };
    let (m, n) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    if m == 0 || n == 0 {
        return Err(parse_err(dim_line, "dimensions must be positive"));
    }

    let total = m * n;
    let mut col_major = Vec::with_capacity(total);
    let mut last_line = dim_line;
    for (line_no, line) in body {
        last_line = line_no;
        for tok in line.split_whitespace() {
            if col_major.len() == total {
                return Err(parse_err(
                    line_no,
                    format!("more than {total} entries for a {m}x{n} matrix"),
                ));
            }
            let v = tok
                .parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("invalid entry `{tok}`")))?;
            col_major.push(v);
        }
    }
    if col_major.len() != total {
        return Err(parse_err(
            last_line + 1,
            format!(
                "unexpected end of file: {} of {total} entries read",
                col_major.len()
            ),
        ));
    }
    Ok(DenseMatrix::from_fn(m, n, |i, j| col_major[j * m + i]))
}

/// Formats a matrix as Matrix Market array text.
pub fn format_matrix(a: &DenseMatrix) -> String {
    let mut out = String::with_capacity(32 * a.rows() * a.cols() + 64);
    out.push_str(HEADER);
    out.push('\n');
    let _ = writeln!(out, "{} {}", a.rows(), a.cols());
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            let _ = writeln!(out, "{:.16e}", a.get(i, j));
        }
    }
    out
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

/// Reads an `n x 1` array file.
pub fn read_vector_file(path: impl AsRef<Path>) -> Result<DenseVector> {
    let m = read_matrix_file(path)?;
    if m.cols() != 1 {
        return Err(parse_err(2, format!("expected an n x 1 vector, got {}x{}", m.rows(), m.cols())));
    }
    Ok(DenseVector::from(m.as_slice()))
}

pub fn write_matrix_file(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    fs::write(path, format_matrix(a))?;
    Ok(())
}

pub fn write_vector_file(path: impl AsRef<Path>, v: &DenseVector) -> Result<()> {
    let col = DenseMatrix::from_row_major(v.len(), 1, v.as_slice().to_vec())?;
    write_matrix_file(path, &col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_identity() {
        let text = "%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n0\n0\n1\n";
        assert_eq!(parse_matrix(text).unwrap(), DenseMatrix::identity(2));
    }

    #[test]
    fn column_major_order() {
        let text = "%%MatrixMarket matrix array real general\n2 3\n1\n4\n2\n5\n3\n6\n";
        let a = parse_matrix(text).unwrap();
        assert_eq!(a.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(a.row(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn truncated_file_names_line() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n";
        match parse_matrix(text) {
            Err(AbsError::Parse { line, msg }) => {
                assert_eq!(line, 6);
                assert!(msg.contains("3 of 4"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            ("", 1),
            ("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2\n", 1),
            ("%%MatrixMarket matrix array real general\n2\n", 2),
            ("%%MatrixMarket matrix array real general\n1 x\n", 2),
            ("%%MatrixMarket matrix array real general\n1 1\nabc\n", 3),
            ("%%MatrixMarket matrix array real general\n1 1\n1\n2\n", 4),
        ];
        for (text, want_line) in cases {
            match parse_matrix(text) {
                Err(AbsError::Parse { line, .. }) => assert_eq!(line, want_line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn vector_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.mtx");
        let v = DenseVector::from([1.0, -2.5, 3.25e-12]);
        write_vector_file(&path, &v).unwrap();
        assert_eq!(read_vector_file(&path).unwrap(), v);

        let mpath = dir.path().join("m.mtx");
        write_matrix_file(&mpath, &DenseMatrix::identity(2)).unwrap();
        assert!(read_vector_file(&mpath).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            (m, n, data) in (1usize..6, 1usize..6).prop_flat_map(|(m, n)| {
                (Just(m), Just(n), prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL, m * n))
            })
        ) {
            let a = DenseMatrix::from_row_major(m, n, data).unwrap();
            let back = parse_matrix(&format_matrix(&a)).unwrap();
            prop_assert_eq!(a.shape(), back.shape());
            for (x, y) in a.as_slice().iter().zip(back.as_slice()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
