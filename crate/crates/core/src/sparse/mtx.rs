//! Matrix Market text format.
//!
//! Supports `matrix coordinate` and `matrix array` with `real` or `integer`
//! fields and `general` or `symmetric` storage. Indices are 1-based on disk.
//! Symmetric files are expanded to both triangles on read and duplicate
//! coordinate entries are summed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sparse::csr::SparseMatrixCsr;
use crate::sparse::dense::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

/// Contents of a Matrix Market file.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixMarket {
    Sparse(SparseMatrixCsr),
    Dense(DenseMatrix),
}

impl MatrixMarket {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            MatrixMarket::Sparse(m) => (m.n_rows(), m.n_cols()),
            MatrixMarket::Dense(m) => (m.n_rows(), m.n_cols()),
        }
    }

    /// Converts array files to CSR (dropping explicit zeros).
    pub fn into_csr(self) -> SparseMatrixCsr {
        match self {
            MatrixMarket::Sparse(m) => m,
            MatrixMarket::Dense(m) => SparseMatrixCsr::from_dense(&m),
        }
    }

    pub fn into_dense(self) -> DenseMatrix {
        match self {
            MatrixMarket::Sparse(m) => m.to_dense(),
            MatrixMarket::Dense(m) => m,
        }
    }
}

struct Parser {
    path: PathBuf,
}

impl Parser {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn header(&self, line: &str) -> Result<(Layout, Symmetry)> {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
        if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
            return Err(self.err(1, "expected header '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
        }
        let layout = match tokens[2].as_str() {
            "coordinate" => Layout::Coordinate,
            "array" => Layout::Array,
            other => return Err(self.err(1, format!("unsupported layout '{other}'"))),
        };
        match tokens[3].as_str() {
            "real" | "integer" | "double" => {}
            other => return Err(self.err(1, format!("unsupported field '{other}'"))),
        }
        let symmetry = match tokens[4].as_str() {
            "general" => Symmetry::General,
            "symmetric" => Symmetry::Symmetric,
            other => return Err(self.err(1, format!("unsupported symmetry '{other}'"))),
        };
        Ok((layout, symmetry))
    }

    fn usize_token(&self, line: usize, tok: Option<&str>, what: &str) -> Result<usize> {
        let tok = tok.ok_or_else(|| self.err(line, format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| self.err(line, format!("invalid {what} '{tok}'")))
    }

    fn float_token(&self, line: usize, tok: Option<&str>) -> Result<f64> {
        let tok = tok.ok_or_else(|| self.err(line, "missing value"))?;
        let v: f64 = tok
            .parse()
            .map_err(|_| self.err(line, format!("invalid value '{tok}'")))?;
        if !v.is_finite() {
            return Err(self.err(line, format!("non-finite value '{tok}'")));
        }
        Ok(v)
    }
}

/// Reads a Matrix Market file: coordinate files become CSR, array files dense.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<MatrixMarket> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let parser = Parser {
        path: path.to_path_buf(),
    };
    let mut lines = BufReader::new(file).lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, first) = lines
        .next()
        .ok_or_else(|| parser.err(1, "empty file"))?;
    let first = first.map_err(|e| Error::io(path, e))?;
    let (layout, symmetry) = parser.header(&first)?;

    // Remaining non-comment, non-blank lines.
    let mut data = lines.filter_map(|(no, l)| match l {
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('%')).then(|| Ok((no, t.to_owned())))
        }
        Err(e) => Some(Err(Error::io(path, e))),
    });

    let (size_no, size_line) = data
        .next()
        .transpose()?
        .ok_or_else(|| parser.err(1, "missing size line"))?;
    let mut size = size_line.split_whitespace();
    let n_rows = parser.usize_token(size_no, size.next(), "row count")?;
    let n_cols = parser.usize_token(size_no, size.next(), "column count")?;
    if symmetry == Symmetry::Symmetric && n_rows != n_cols {
        return Err(parser.err(size_no, "symmetric matrix must be square"));
    }

    match layout {
        Layout::Coordinate => {
            let nnz = parser.usize_token(size_no, size.next(), "entry count")?;
            let mut triplets = Vec::with_capacity(nnz * 2);
            let mut seen = 0usize;
            for item in data {
                let (no, line) = item?;
                if seen == nnz {
                    return Err(parser.err(no, format!("more than {nnz} entries")));
                }
                let mut tok = line.split_whitespace();
                let i = parser.usize_token(no, tok.next(), "row index")?;
                let j = parser.usize_token(no, tok.next(), "column index")?;
                let v = parser.float_token(no, tok.next())?;
                if i == 0 || j == 0 || i > n_rows || j > n_cols {
                    return Err(parser.err(no, format!("index ({i}, {j}) outside {n_rows}x{n_cols}")));
                }
                let (i, j) = (i - 1, j - 1);
                triplets.push((i, j, v));
                if symmetry == Symmetry::Symmetric && i != j {
                    triplets.push((j, i, v));
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parser.err(size_no, format!("expected {nnz} entries, found {seen}")));
            }
            Ok(MatrixMarket::Sparse(SparseMatrixCsr::from_triplets(
                n_rows, n_cols, triplets,
            )?))
        }
        Layout::Array => {
            let mut dense = DenseMatrix::zeros(n_rows, n_cols);
            // Column-major; symmetric files list only the lower triangle.
            let positions: Vec<(usize, usize)> = (0..n_cols)
                .flat_map(|j| {
                    let start = if symmetry == Symmetry::Symmetric { j } else { 0 };
                    (start..n_rows).map(move |i| (i, j))
                })
                .collect();
            let mut next = positions.iter();
            let mut last_no = size_no;
            for item in data {
                let (no, line) = item?;
                last_no = no;
                let &(i, j) = next
                    .next()
                    .ok_or_else(|| parser.err(no, "too many array values"))?;
                let v = parser.float_token(no, line.split_whitespace().next())?;
                dense.set(i, j, v);
                if symmetry == Symmetry::Symmetric {
                    dense.set(j, i, v);
                }
            }
            if next.next().is_some() {
                return Err(parser.err(last_no, format!("expected {} array values", positions.len())));
            }
            Ok(MatrixMarket::Dense(dense))
        }
    }
}

/// Writes `m` in coordinate format. With [`Symmetry::Symmetric`] only the lower
/// triangle is written; the caller is responsible for `m` being symmetric.
pub fn write_matrix_market(path: impl AsRef<Path>, m: &SparseMatrixCsr, symmetry: Symmetry) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let entries: Vec<_> = m
        .triplets()
        .filter(|&(i, j, _)| symmetry == Symmetry::General || j <= i)
        .collect();
    let kind = match symmetry {
        Symmetry::General => "general",
        Symmetry::Symmetric => "symmetric",
    };
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real {kind}")?;
        writeln!(out, "{} {} {}", m.n_rows(), m.n_cols(), entries.len())?;
        for &(i, j, v) in &entries {
            // `{:e}` prints the shortest representation that round-trips.
            writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

/// Writes `m` in general array format (column-major).
pub fn write_matrix_market_dense(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix array real general")?;
        writeln!(out, "{} {}", m.n_rows(), m.n_cols())?;
        for j in 0..m.n_cols() {
            for i in 0..m.n_rows() {
                writeln!(out, "{:e}", m.get(i, j))?;
            }
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}
