//! MatrixMarket reader and writer for transition matrices.
//!
//! Accepted format: `%%MatrixMarket matrix coordinate real general`,
//! `%` comment lines, a `n n nnz` size line, then 1-based `i j value`
//! triples giving P row-wise. Values are written back with 17
//! significant digits so a write/load round trip reproduces every triple
//! exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseTransitionMatrix;

pub fn load_matrix_market<P: AsRef<Path>>(path: P) -> Result<SparseTransitionMatrix> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();

    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break line;
            }
            None => {
                return Err(Error::Parse { line: 1, msg: "empty file".into() });
            }
        }
    };
    let lowered = header.to_lowercase();
    let fields: Vec<&str> = lowered.split_whitespace().collect();
    if fields.len() < 5
        || fields[0] != "%%matrixmarket"
        || fields[1] != "matrix"
        || fields[2] != "coordinate"
        || fields[3] != "real"
        || fields[4] != "general"
    {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "expected header '%%MatrixMarket matrix coordinate real general', got '{header}'"
            ),
        });
    }

    let mut lineno = 1usize;
    let mut size: Option<(usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();

    for line in lines {
        let line = line?;
        lineno += 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let tok: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if tok.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected 'rows cols nnz', got '{t}'"),
                    });
                }
                let rows: usize = parse_tok(tok[0], lineno)?;
                let cols: usize = parse_tok(tok[1], lineno)?;
                let nnz: usize = parse_tok(tok[2], lineno)?;
                if rows != cols {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("matrix must be square, got {rows} x {cols}"),
                    });
                }
                if rows == 0 {
                    return Err(Error::Parse { line: lineno, msg: "empty matrix".into() });
                }
                size = Some((rows, nnz));
                triplets.reserve(nnz);
            }
            Some((n, nnz)) => {
                if triplets.len() == nnz {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("more than the declared {nnz} entries"),
                    });
                }
                if tok.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected 'i j value', got '{t}'"),
                    });
                }
                let i: usize = parse_tok(tok[0], lineno)?;
                let j: usize = parse_tok(tok[1], lineno)?;
                let v: f64 = parse_tok(tok[2], lineno)?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("index ({i}, {j}) outside 1..={n}"),
                    });
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }

    let (n, nnz) = size.ok_or(Error::Parse { line: lineno, msg: "missing size line".into() })?;
    if triplets.len() != nnz {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("declared {nnz} entries, found {}", triplets.len()),
        });
    }

    // Surface row indices 1-based in load errors, matching the file.
    SparseTransitionMatrix::from_triplets(n, &triplets).map_err(|e| match e {
        Error::Stochasticity { row, detail } => Error::Stochasticity { row: row + 1, detail },
        Error::DuplicateEntry { row, col } => Error::DuplicateEntry { row: row + 1, col: col + 1 },
        other => other,
    })
}

fn parse_tok<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse '{tok}'"),
    })
}

/// Writes the matrix as MatrixMarket triples of P, row-major, with 17
/// significant digits.
pub fn write_matrix_market<P: AsRef<Path>>(
    path: P,
    matrix: &SparseTransitionMatrix,
) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let triplets = matrix.triplets();
    out.push_str(&format!("{} {} {}\n", matrix.n(), matrix.n(), triplets.len()));
    for (i, j, v) in triplets {
        out.push_str(&format!("{} {} {:.16e}\n", i + 1, j + 1, v));
    }
    let mut f = File::create(path.as_ref())?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_identity() {
        let f = write_tmp(
            "%%MatrixMarket matrix coordinate real general\n% a comment\n2 2 2\n1 1 1.0\n2 2 1.0\n",
        );
        let m = load_matrix_market(f.path()).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn rejects_wrong_header() {
        let f = write_tmp("%%MatrixMarket matrix array real general\n2 2 2\n");
        assert!(matches!(load_matrix_market(f.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn rejects_non_square_and_bad_counts() {
        let f = write_tmp("%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1.0\n");
        assert!(load_matrix_market(f.path()).is_err());

        let f = write_tmp("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n2 2 1.0\n");
        let err = load_matrix_market(f.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn stochasticity_error_names_file_row() {
        let f = write_tmp(
            "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1.0\n2 2 1.0\n3 3 0.999\n",
        );
        match load_matrix_market(f.path()).unwrap_err() {
            Error::Stochasticity { row, .. } => assert_eq!(row, 3),
            other => panic!("expected stochasticity, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_entry_detected() {
        let f = write_tmp(
            "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 0.5\n1 1 0.5\n2 2 1.0\n",
        );
        assert!(matches!(
            load_matrix_market(f.path()),
            Err(Error::DuplicateEntry { row: 1, col: 1 })
        ));
    }

    #[test]
    fn rejects_out_of_range_index() {
        let f = write_tmp("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 2 1.0\n");
        assert!(matches!(load_matrix_market(f.path()), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip_exact() {
        let t = vec![
            (0usize, 1usize, 0.123456789012345678),
            (0, 2, 1.0 - 0.123456789012345678),
            (1, 0, 1.0 / 3.0),
            (1, 1, 2.0 / 3.0),
            (2, 2, 1.0),
        ];
        let m = SparseTransitionMatrix::from_triplets(3, &t).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_matrix_market(f.path(), &m).unwrap();
        let m2 = load_matrix_market(f.path()).unwrap();
        // Exact reproduction of all triples, values bit for bit.
        let (a, b) = (m.triplets(), m2.triplets());
        assert_eq!(a.len(), b.len());
        for ((i1, j1, v1), (i2, j2, v2)) in a.iter().zip(b.iter()) {
            assert_eq!((i1, j1), (i2, j2));
            assert_eq!(v1.to_bits(), v2.to_bits());
        }
    }
}
