//! Matrix Market coordinate I/O (real, general or symmetric) and plain
//! one-value-per-line vector files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::la::sparse::SparseOperator;

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        reason: reason.into(),
    }
}

/// Read a square matrix in Matrix Market coordinate format.
/// Symmetric storage is expanded to full storage.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseOperator> {
    let path = path.as_ref();
    let file = BufReader::new(File::open(path)?);
    let mut lines = file.lines().enumerate();

    let (lno, header) = match lines.next() {
        Some((lno, l)) => (lno + 1, l?),
        None => return Err(parse_err(path, 1, "empty file")),
    };
    let h: Vec<String> = header.split_whitespace().map(|t| t.to_lowercase()).collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" {
        return Err(parse_err(path, lno, "expected '%%MatrixMarket matrix ...' header"));
    }
    if h[2] != "coordinate" {
        return Err(parse_err(path, lno, format!("unsupported format '{}'", h[2])));
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(parse_err(path, lno, format!("unsupported field '{}'", h[3])));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(path, lno, format!("unsupported symmetry '{other}'"))),
    };

    // size line: first non-comment line
    let (mut rows, mut cols, mut nnz) = (0usize, 0usize, 0usize);
    let mut have_size = false;
    let mut size_line = 0usize;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (lno0, line) in lines {
        let lno = lno0 + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if !have_size {
            if toks.len() != 3 {
                return Err(parse_err(path, lno, "size line must be 'rows cols nnz'"));
            }
            rows = toks[0].parse().map_err(|_| parse_err(path, lno, "bad row count"))?;
            cols = toks[1].parse().map_err(|_| parse_err(path, lno, "bad col count"))?;
            nnz = toks[2].parse().map_err(|_| parse_err(path, lno, "bad nnz count"))?;
            if rows != cols {
                return Err(parse_err(path, lno, format!("matrix must be square, got {rows}x{cols}")));
            }
            have_size = true;
            size_line = lno;
            continue;
        }
        if toks.len() != 3 {
            return Err(parse_err(path, lno, "entry line must be 'i j value'"));
        }
        let i: usize = toks[0].parse().map_err(|_| parse_err(path, lno, "bad row index"))?;
        let j: usize = toks[1].parse().map_err(|_| parse_err(path, lno, "bad col index"))?;
        let v: f64 = toks[2].parse().map_err(|_| parse_err(path, lno, "bad value"))?;
        if i < 1 || i > rows || j < 1 || j > cols {
            return Err(parse_err(path, lno, format!("index ({i},{j}) out of range for {rows}x{cols}")));
        }
        entries.push((i - 1, j - 1, v));
        if symmetric && i != j {
            entries.push((j - 1, i - 1, v));
        }
    }
    if !have_size {
        return Err(parse_err(path, 2, "missing size line"));
    }
    let stored = if symmetric {
        entries.len() - entries.iter().filter(|e| e.0 != e.1).count() / 2
    } else {
        entries.len()
    };
    if stored != nnz {
        return Err(parse_err(
            path,
            size_line,
            format!("declared {nnz} entries, found {stored}"),
        ));
    }
    SparseOperator::from_triplets(rows, &entries)
}

/// Write a CSR operator in coordinate general format with full precision.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &SparseOperator) -> Result<()> {
    let (row_ptr, col_idx, vals) = a.csr_parts().ok_or(Error::InvalidConfig(
        "cannot write a matrix-free operator to Matrix Market".into(),
    ))?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.dim(), a.dim(), a.nnz())?;
    for i in 0..a.dim() {
        for k in row_ptr[i]..row_ptr[i + 1] {
            writeln!(w, "{} {} {:.16e}", i + 1, col_idx[k] + 1, vals[k])?;
        }
    }
    Ok(())
}

/// Read a plain-text vector, one value per line. Blank lines and lines
/// starting with '%' or '#' are skipped.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let file = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lno0, line) in file.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| parse_err(path, lno0 + 1, format!("bad value '{t}'")))?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for x in v {
        writeln!(w, "{:.16e}", x)?;
    }
    Ok(())
}
