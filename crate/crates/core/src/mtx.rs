//! Matrix Market text IO.
//!
//! Reading supports `coordinate` (real, integer, pattern) and `array`
//! (real, integer) matrices with `general`, `symmetric` or `skew-symmetric`
//! storage; symmetric storage is expanded to both triangles. Writing emits
//! `coordinate real general` for sparse matrices and `array real general` for
//! dense ones, with 17 significant digits so `f64` values round-trip exactly.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Header data of a parsed file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MtxInfo {
    pub rows: usize,
    pub cols: usize,
    /// Entries listed in the file, before symmetric expansion.
    pub stored_entries: usize,
    pub format: Format,
    pub field: Field,
    pub symmetry: Symmetry,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_header(line: &str, lineno: usize) -> Result<(Format, Field, Symmetry)> {
    let toks: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" {
        return Err(perr(lineno, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if toks[1] != "matrix" {
        return Err(perr(lineno, format!("unsupported object '{}'", toks[1])));
    }
    let format = match toks[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(perr(lineno, format!("unsupported format '{other}'"))),
    };
    let field = match toks[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" if format == Format::Coordinate => Field::Pattern,
        other => return Err(perr(lineno, format!("unsupported field '{other}'"))),
    };
    let symmetry = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(perr(lineno, format!("unsupported symmetry '{other}'"))),
    };
    Ok((format, field, symmetry))
}

fn parse_usize(tok: Option<&str>, lineno: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| perr(lineno, format!("missing {what}")))?
        .parse()
        .map_err(|_| perr(lineno, format!("invalid {what}")))
}

fn parse_value<T: Real>(tok: Option<&str>, lineno: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(lineno, "missing value"))?;
    let v: T = tok.parse().map_err(|_| perr(lineno, format!("invalid value '{tok}'")))?;
    if !v.finite() {
        return Err(perr(lineno, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

/// Parses a Matrix Market stream.
pub fn parse_matrix_market<T: Real, R: BufRead>(reader: R) -> Result<(SparseMatrix<T>, MtxInfo)> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (lineno, first) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let (format, field, symmetry) = parse_header(&first?, lineno)?;

    // Remaining non-comment, non-blank lines.
    let mut body = lines.filter_map(|(n, l)| match l {
        Ok(s) => {
            let t = s.trim();
            (!t.is_empty() && !t.starts_with('%')).then(|| Ok((n, t.to_string())))
        }
        Err(e) => Some(Err(Error::from(e))),
    });

    let (size_line, size) = body.next().ok_or_else(|| perr(lineno + 1, "missing size line"))??;
    let mut toks = size.split_whitespace();
    let rows = parse_usize(toks.next(), size_line, "row count")?;
    let cols = parse_usize(toks.next(), size_line, "column count")?;
    if symmetry != Symmetry::General && rows != cols {
        return Err(perr(size_line, "symmetric storage requires a square matrix"));
    }

    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    let mut push = |i: usize, j: usize, v: T, line: usize, triplets: &mut Vec<(usize, usize, T)>| -> Result<()> {
        if let Some(prev) = seen.insert((i, j), line) {
            return Err(perr(
                line,
                format!("duplicate entry ({}, {}), first given on line {prev}", i + 1, j + 1),
            ));
        }
        triplets.push((i, j, v));
        Ok(())
    };
    let mirror = |i: usize, j: usize, v: T| -> Option<(usize, usize, T)> {
        match symmetry {
            Symmetry::General => None,
            _ if i == j => None,
            Symmetry::Symmetric => Some((j, i, v)),
            Symmetry::SkewSymmetric => Some((j, i, -v)),
        }
    };

    let stored_entries = match format {
        Format::Coordinate => {
            let nnz = parse_usize(toks.next(), size_line, "entry count")?;
            if toks.next().is_some() {
                return Err(perr(size_line, "unexpected token on size line"));
            }
            let mut count = 0;
            for item in body.by_ref() {
                let (n, l) = item?;
                if count == nnz {
                    return Err(perr(n, format!("more than the declared {nnz} entries")));
                }
                let mut t = l.split_whitespace();
                let i = parse_usize(t.next(), n, "row index")?;
                let j = parse_usize(t.next(), n, "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(perr(n, format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                let v = match field {
                    Field::Pattern => T::one(),
                    _ => parse_value(t.next(), n)?,
                };
                if t.next().is_some() {
                    return Err(perr(n, "unexpected trailing token"));
                }
                let (i, j) = (i - 1, j - 1);
                if symmetry == Symmetry::SkewSymmetric && i == j {
                    return Err(perr(n, "skew-symmetric storage cannot hold diagonal entries"));
                }
                push(i, j, v, n, &mut triplets)?;
                if let Some((a, b, w)) = mirror(i, j, v) {
                    push(a, b, w, n, &mut triplets)?;
                }
                count += 1;
            }
            if count != nnz {
                return Err(perr(size_line, format!("declared {nnz} entries, found {count}")));
            }
            nnz
        }
        Format::Array => {
            if toks.next().is_some() {
                return Err(perr(size_line, "unexpected token on size line"));
            }
            // Column-major; symmetric storage lists the lower triangle only.
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::Symmetric => j,
                        Symmetry::SkewSymmetric => j + 1,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut idx = 0;
            for item in body.by_ref() {
                let (n, l) = item?;
                for tok in l.split_whitespace() {
                    let &(i, j) = positions
                        .get(idx)
                        .ok_or_else(|| perr(n, format!("more than the expected {} values", positions.len())))?;
                    let v: T = parse_value(Some(tok), n)?;
                    if v != T::zero() {
                        push(i, j, v, n, &mut triplets)?;
                        if let Some((a, b, w)) = mirror(i, j, v) {
                            push(a, b, w, n, &mut triplets)?;
                        }
                    }
                    idx += 1;
                }
            }
            if idx != positions.len() {
                return Err(perr(size_line, format!("expected {} values, found {idx}", positions.len())));
            }
            idx
        }
    };

    let info = MtxInfo { rows, cols, stored_entries, format, field, symmetry };
    let m = SparseMatrix::new(rows, cols, triplets)?;
    Ok((m, info))
}

pub fn read_matrix_market<T: Real>(path: impl AsRef<Path>) -> Result<SparseMatrix<T>> {
    Ok(read_matrix_market_with_info(path)?.0)
}

pub fn read_matrix_market_with_info<T: Real>(path: impl AsRef<Path>) -> Result<(SparseMatrix<T>, MtxInfo)> {
    let file = File::open(path.as_ref())?;
    parse_matrix_market(BufReader::new(file))
}

/// Reads either storage format into a dense matrix.
pub fn read_dense<T: Real>(path: impl AsRef<Path>) -> Result<DMatrix<T>> {
    Ok(read_matrix_market::<T>(path)?.to_dense())
}

pub fn write_sparse<T: Real, W: Write>(m: &SparseMatrix<T>, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for &(i, j, v) in m.triplets() {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dense<T: Real, W: Write>(m: &DMatrix<T>, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for v in m.iter() {
        writeln!(w, "{v:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market<T: Real>(m: &SparseMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    write_sparse(m, BufWriter::new(File::create(path.as_ref())?))
}

pub fn write_dense_matrix_market<T: Real>(m: &DMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    write_dense(m, BufWriter::new(File::create(path.as_ref())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<(SparseMatrix<f64>, MtxInfo)> {
        parse_matrix_market(s.as_bytes())
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn identity_coordinate() {
        let (m, info) = parse("%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.0\n2 2 1.0\n").unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.to_dense(), DMatrix::identity(2, 2));
        assert_eq!(info.stored_entries, 2);
    }

    #[test]
    fn symmetric_is_expanded() {
        let (m, info) = parse("%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 5\n3 3 1\n").unwrap();
        assert_eq!(info.symmetry, Symmetry::Symmetric);
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], 5.0);
        assert_eq!(d[(1, 0)], 5.0);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn array_and_pattern() {
        let (m, _) = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!(m.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]));
        let (p, _) = parse("%%MatrixMarket matrix coordinate pattern general\n2 3 1\n2 3\n").unwrap();
        assert_eq!(p.triplets(), &[(1, 2, 1.0)]);
        let (s, _) = parse("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(s.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse("%%MatrixMarket matrix coordinate real wrong\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap_err()), 3);
        assert_eq!(
            line_of(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n%x\n1 1 2.0\n").unwrap_err()),
            5
        );
        assert_eq!(line_of(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n").unwrap_err()), 3);
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1.0\n1 2 1.0\n").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn dense_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[0.1, -2.5e-300, 3.0, 0.0, 1.0 / 3.0, 7.0]);
        let mut buf = Vec::new();
        write_dense(&m, &mut buf).unwrap();
        let (back, info) = parse_matrix_market::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(info.format, Format::Array);
        assert_eq!(back.to_dense(), m);
    }

    proptest! {
        #[test]
        fn sparse_round_trip_is_bit_exact(
            rows in 1usize..8,
            cols in 1usize..8,
            entries in proptest::collection::vec((0usize..8, 0usize..8, -1e6f64..1e6), 0..30),
        ) {
            let mut map = std::collections::BTreeMap::new();
            for (i, j, v) in entries {
                map.insert((i % rows, j % cols), v);
            }
            let trip = map.into_iter().map(|((i, j), v)| (i, j, v)).collect();
            let m = SparseMatrix::new(rows, cols, trip).unwrap();
            let mut buf = Vec::new();
            write_sparse(&m, &mut buf).unwrap();
            let (back, _) = parse_matrix_market::<f64, _>(buf.as_slice()).unwrap();
            prop_assert_eq!(back.triplets().len(), m.triplets().len());
            for (a, b) in back.triplets().iter().zip(m.triplets()) {
                prop_assert_eq!((a.0, a.1, a.2.to_bits()), (b.0, b.1, b.2.to_bits()));
            }
        }
    }
}
