use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linops::{DenseVector, SparseMatrix};

use super::{Provenance, SystemSequence};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
}

struct Header {
    layout: Layout,
    symmetry: Symmetry,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

fn parse_header(path: &Path, line: &str) -> Result<Header> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(path, 1, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(path, 1, format!("unsupported layout '{other}'"))),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(parse_err(path, 1, format!("unsupported field '{other}' (need real)"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(path, 1, format!("unsupported symmetry '{other}'"))),
    };
    Ok(Header { layout, symmetry })
}

/// Non-comment lines after the header, with 1-based line numbers.
fn body_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what}")))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a real coordinate (or array) Matrix Market file. Symmetric storage
/// is expanded and the symmetric flag set; duplicates are summed.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let text = read(path)?;
    let first = text.lines().next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let header = parse_header(path, first)?;
    let mut lines = body_lines(&text);
    let (size_line, size) = lines.next().ok_or_else(|| parse_err(path, 1, "missing size line"))?;
    let mut tok = size.split_whitespace();
    let rows: usize = parse_num(path, size_line, tok.next(), "row count")?;
    let cols: usize = parse_num(path, size_line, tok.next(), "column count")?;

    let mut triplets = Vec::new();
    match header.layout {
        Layout::Coordinate => {
            let nnz: usize = parse_num(path, size_line, tok.next(), "entry count")?;
            triplets.reserve(nnz * 2);
            let mut seen = 0;
            for (ln, line) in lines.by_ref().take(nnz) {
                seen += 1;
                let mut tok = line.split_whitespace();
                let i: usize = parse_num(path, ln, tok.next(), "row index")?;
                let j: usize = parse_num(path, ln, tok.next(), "column index")?;
                let v: f64 = parse_num(path, ln, tok.next(), "value")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(path, ln, format!("index ({i}, {j}) out of bounds")));
                }
                if !v.is_finite() {
                    return Err(parse_err(path, ln, "non-finite value"));
                }
                triplets.push((i - 1, j - 1, v));
                if header.symmetry == Symmetry::Symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
            if seen < nnz {
                return Err(parse_err(path, size_line, "fewer entries than declared"));
            }
        }
        Layout::Array => {
            for j in 0..cols {
                let start = if header.symmetry == Symmetry::Symmetric { j } else { 0 };
                for i in start..rows {
                    let (ln, line) =
                        lines.next().ok_or_else(|| parse_err(path, size_line, "fewer entries than declared"))?;
                    let v: f64 = parse_num(path, ln, line.split_whitespace().next(), "value")?;
                    if v != 0.0 {
                        triplets.push((i, j, v));
                        if header.symmetry == Symmetry::Symmetric && i != j {
                            triplets.push((j, i, v));
                        }
                    }
                }
            }
        }
    }
    let mut a = SparseMatrix::from_triplets(rows, cols, &triplets)?;
    if header.symmetry == Symmetry::Symmetric {
        a = a.assume_symmetric();
    }
    Ok(a)
}

/// Reads a dense vector from a Matrix Market file (`n x 1`, array or coordinate).
pub fn load_vector(path: impl AsRef<Path>) -> Result<DenseVector> {
    let path = path.as_ref();
    let a = load_matrix_market(path)?;
    if a.n_cols() != 1 {
        return Err(parse_err(path, 1, format!("expected a single column, found {}", a.n_cols())));
    }
    Ok(a.to_dense().col(0).to_vec())
}

/// Writes `a` in coordinate format, using symmetric storage when `a` is
/// flagged symmetric. Values are written with 17 significant digits.
pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let sym = a.is_symmetric();
    let entries: Vec<_> = a.iter().filter(|&(i, j, _)| !sym || i >= j).collect();
    let mut out = String::new();
    let kind = if sym { "symmetric" } else { "general" };
    writeln!(out, "%%MatrixMarket matrix coordinate real {kind}").unwrap();
    writeln!(out, "{} {} {}", a.n_rows(), a.n_cols(), entries.len()).unwrap();
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v).unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads every `*.mtx` file in `dir`, in lexicographic order, as a sequence
/// with ones right-hand sides.
pub fn load_directory(dir: impl AsRef<Path>) -> Result<SystemSequence> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "mtx"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidParameter(format!("no .mtx files in {}", dir.display())));
    }
    let mut systems = Vec::with_capacity(paths.len());
    for p in &paths {
        let mut a = load_matrix_market(p)?;
        if !a.is_symmetric() {
            a.mark_symmetric()?;
        }
        let n = a.n_rows();
        systems.push((a, vec![1.0; n]));
    }
    SystemSequence::new(systems, Provenance::Files(paths))
}

/// Loads a sequence from a manifest: one matrix path per line (relative paths
/// resolve against the manifest's directory), optionally followed by a
/// right-hand-side vector path. Missing right-hand sides default to ones.
/// Every matrix must be symmetric.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<SystemSequence> {
    let path = path.as_ref();
    let text = read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut systems = Vec::new();
    let mut files = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        let mpath = resolve(tok.next().unwrap());
        let mut a = load_matrix_market(&mpath)?;
        if !a.is_symmetric() {
            a.mark_symmetric().map_err(|e| parse_err(path, ln + 1, format!("{}: {e}", mpath.display())))?;
        }
        let b = match tok.next() {
            Some(r) => load_vector(resolve(r))?,
            None => vec![1.0; a.n_rows()],
        };
        files.push(mpath);
        systems.push((a, b));
    }
    if systems.is_empty() {
        return Err(parse_err(path, 1, "manifest lists no systems"));
    }
    SystemSequence::new(systems, Provenance::Files(files))
}
