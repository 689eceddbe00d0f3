//! Matrix and observed-entry files.
//!
//! Two formats are read, chosen by content rather than extension:
//!
//! * MatrixMarket (`%%MatrixMarket matrix {array|coordinate} {real|integer} {general|symmetric}`),
//!   1-based indices.
//! * CSV whose first line is the literal header `rows,cols` and whose
//!   second line gives the shape. A body of exactly `rows` lines of `cols`
//!   values is a dense matrix; otherwise each line is a 1-based
//!   `row,col,value` triplet.
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! write-then-read cycle is bit-exact.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use smoothprox_core::problems::ObservedEntries;
use smoothprox_core::Mat;

use crate::CliError;

const MM_BANNER: &str = "%%MatrixMarket";
const CSV_HEADER: &str = "rows,cols";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

/// Entries as read from a file, 0-based, with the line each came from.
struct RawEntries {
    rows: usize,
    cols: usize,
    dense: Option<Mat>,
    triplets: Vec<(usize, usize, f64, usize)>,
}

pub fn load_matrix(path: &Path) -> Result<Mat, CliError> {
    let raw = read_raw(path)?;
    if let Some(m) = raw.dense {
        return Ok(m);
    }
    check_duplicates(path, &raw.triplets)?;
    let mut m = Mat::zeros(raw.rows, raw.cols);
    for &(i, j, v, _) in &raw.triplets {
        m[(i, j)] = v;
    }
    Ok(m)
}

/// Observed entries from coordinate triplets. A dense file counts as fully
/// observed.
pub fn load_observed(path: &Path) -> Result<ObservedEntries, CliError> {
    let raw = read_raw(path)?;
    let entries: Vec<(usize, usize, f64)> = match raw.dense {
        Some(m) => (0..m.ncols())
            .flat_map(|j| (0..m.nrows()).map(move |i| (i, j)))
            .map(|(i, j)| (i, j, m[(i, j)]))
            .collect(),
        None => {
            check_duplicates(path, &raw.triplets)?;
            raw.triplets.iter().map(|&(i, j, v, _)| (i, j, v)).collect()
        }
    };
    ObservedEntries::new(raw.rows, raw.cols, entries)
        .map_err(|e| CliError::parse(path, None, e.to_string()))
}

fn read_raw(path: &Path) -> Result<RawEntries, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let first = text.lines().next().unwrap_or("").trim();
    if first.starts_with(MM_BANNER) {
        parse_matrix_market(path, &text)
    } else if first.replace(' ', "") == CSV_HEADER {
        parse_csv(path, &text)
    } else {
        Err(CliError::parse(
            path,
            Some(1),
            format!("unrecognized format: expected '{MM_BANNER} ...' or a '{CSV_HEADER}' header"),
        ))
    }
}

fn check_duplicates(path: &Path, triplets: &[(usize, usize, f64, usize)]) -> Result<(), CliError> {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::with_capacity(triplets.len());
    for &(i, j, _, line) in triplets {
        if let Some(first) = seen.insert((i, j), line) {
            return Err(CliError::parse(
                path,
                Some(line),
                format!(
                    "duplicate entry ({}, {}), first given on line {first}",
                    i + 1,
                    j + 1
                ),
            ));
        }
    }
    Ok(())
}

fn parse_value(path: &Path, line: usize, s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::parse(path, Some(line), format!("invalid number '{}'", s.trim())))?;
    if !v.is_finite() {
        return Err(CliError::parse(
            path,
            Some(line),
            format!("non-finite value '{}'", s.trim()),
        ));
    }
    Ok(v)
}

fn parse_count(path: &Path, line: usize, s: &str, what: &str) -> Result<usize, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::parse(path, Some(line), format!("invalid {what} '{}'", s.trim())))
}

/// 1-based index to 0-based, checked against `bound`.
fn parse_index(
    path: &Path,
    line: usize,
    s: &str,
    bound: usize,
    what: &str,
) -> Result<usize, CliError> {
    let i = parse_count(path, line, s, what)?;
    if i == 0 || i > bound {
        return Err(CliError::parse(
            path,
            Some(line),
            format!("{what} index {i} out of range 1..={bound}"),
        ));
    }
    Ok(i - 1)
}

fn parse_matrix_market(path: &Path, text: &str) -> Result<RawEntries, CliError> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim()));
    let (_, banner) = lines.next().unwrap_or((1, ""));
    let words: Vec<String> = banner
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if words.len() != 5 || words[1] != "matrix" {
        return Err(CliError::parse(
            path,
            Some(1),
            "banner must read '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let layout = match words[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => {
            return Err(CliError::parse(
                path,
                Some(1),
                format!("unsupported format '{other}'"),
            ))
        }
    };
    if !matches!(words[3].as_str(), "real" | "integer" | "double") {
        return Err(CliError::parse(
            path,
            Some(1),
            format!("unsupported field '{}'", words[3]),
        ));
    }
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(CliError::parse(
                path,
                Some(1),
                format!("unsupported symmetry '{other}'"),
            ))
        }
    };

    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = body
        .next()
        .ok_or_else(|| CliError::parse(path, None, "missing size line"))?;
    let fields: Vec<&str> = size.split_whitespace().collect();
    let expected = if layout == Layout::Array { 2 } else { 3 };
    if fields.len() != expected {
        return Err(CliError::parse(
            path,
            Some(size_line),
            format!("size line needs {expected} integers, found '{size}'"),
        ));
    }
    let rows = parse_count(path, size_line, fields[0], "row count")?;
    let cols = parse_count(path, size_line, fields[1], "column count")?;
    if symmetric && rows != cols {
        return Err(CliError::parse(
            path,
            Some(size_line),
            "symmetric matrix must be square",
        ));
    }

    match layout {
        Layout::Array => {
            // column-major; symmetric files store only the lower triangle
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| (0..rows).map(move |i| (i, j)))
                .filter(|&(i, j)| !symmetric || i >= j)
                .collect();
            let mut m = Mat::zeros(rows, cols);
            let mut count = 0;
            for (line, l) in body {
                for tok in l.split_whitespace() {
                    let Some(&(i, j)) = positions.get(count) else {
                        return Err(CliError::parse(
                            path,
                            Some(line),
                            format!(
                                "more than the {} values the size line declares",
                                positions.len()
                            ),
                        ));
                    };
                    let v = parse_value(path, line, tok)?;
                    m[(i, j)] = v;
                    if symmetric {
                        m[(j, i)] = v;
                    }
                    count += 1;
                }
            }
            if count != positions.len() {
                return Err(CliError::parse(
                    path,
                    None,
                    format!("expected {} values, found {count}", positions.len()),
                ));
            }
            Ok(RawEntries {
                rows,
                cols,
                dense: Some(m),
                triplets: Vec::new(),
            })
        }
        Layout::Coordinate => {
            let nnz = parse_count(path, size_line, fields[2], "entry count")?;
            let mut triplets = Vec::with_capacity(nnz);
            let mut count = 0;
            for (line, l) in body {
                let f: Vec<&str> = l.split_whitespace().collect();
                if f.len() != 3 {
                    return Err(CliError::parse(
                        path,
                        Some(line),
                        format!("expected 'row col value', found '{l}'"),
                    ));
                }
                if count == nnz {
                    return Err(CliError::parse(
                        path,
                        Some(line),
                        format!("more than the {nnz} entries the size line declares"),
                    ));
                }
                let i = parse_index(path, line, f[0], rows, "row")?;
                let j = parse_index(path, line, f[1], cols, "column")?;
                let v = parse_value(path, line, f[2])?;
                if symmetric && j > i {
                    return Err(CliError::parse(
                        path,
                        Some(line),
                        "symmetric coordinate files list only the lower triangle",
                    ));
                }
                triplets.push((i, j, v, line));
                if symmetric && i != j {
                    triplets.push((j, i, v, line));
                }
                count += 1;
            }
            if count != nnz {
                return Err(CliError::parse(
                    path,
                    None,
                    format!("expected {nnz} entries, found {count}"),
                ));
            }
            Ok(RawEntries {
                rows,
                cols,
                dense: None,
                triplets,
            })
        }
    }
}

fn parse_csv(path: &Path, text: &str) -> Result<RawEntries, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records().skip(1);
    let mut next = || -> Option<Result<(usize, csv::StringRecord), CliError>> {
        records.next().map(|r| {
            r.map(|rec| (rec.position().map_or(0, |p| p.line() as usize), rec))
                .map_err(|e| {
                    CliError::parse(path, e.position().map(|p| p.line() as usize), e.to_string())
                })
        })
    };
    let (size_line, size) =
        next().ok_or_else(|| CliError::parse(path, None, "missing shape line"))??;
    if size.len() != 2 {
        return Err(CliError::parse(
            path,
            Some(size_line),
            "shape line must be 'rows,cols'",
        ));
    }
    let rows = parse_count(path, size_line, &size[0], "row count")?;
    let cols = parse_count(path, size_line, &size[1], "column count")?;

    let mut body = Vec::new();
    while let Some(rec) = next() {
        let (line, rec) = rec?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        body.push((line, rec));
    }
    // a body of exactly `rows` lines of `cols` fields is dense, anything
    // else is triplets
    if body.len() == rows && body.iter().all(|(_, r)| r.len() == cols) {
        let mut m = Mat::zeros(rows, cols);
        for (i, (line, rec)) in body.iter().enumerate() {
            for j in 0..cols {
                m[(i, j)] = parse_value(path, *line, &rec[j])?;
            }
        }
        return Ok(RawEntries {
            rows,
            cols,
            dense: Some(m),
            triplets: Vec::new(),
        });
    }
    let mut triplets = Vec::with_capacity(body.len());
    for (line, rec) in &body {
        if rec.len() != 3 {
            return Err(CliError::parse(
                path,
                Some(*line),
                format!(
                    "expected {cols} values or a 'row,col,value' triplet, found {} fields",
                    rec.len()
                ),
            ));
        }
        let i = parse_index(path, *line, &rec[0], rows, "row")?;
        let j = parse_index(path, *line, &rec[1], cols, "column")?;
        triplets.push((i, j, parse_value(path, *line, &rec[2])?, *line));
    }
    Ok(RawEntries {
        rows,
        cols,
        dense: None,
        triplets,
    })
}

/// Dense MatrixMarket array file.
pub fn write_matrix(path: &Path, m: &Mat) -> Result<(), CliError> {
    let mut out = format!(
        "{MM_BANNER} matrix array real general\n{} {}\n",
        m.nrows(),
        m.ncols()
    );
    for v in m.iter() {
        out.push_str(&format!("{v:e}\n"));
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// MatrixMarket coordinate file with 1-based indices.
pub fn write_observed(path: &Path, obs: &ObservedEntries) -> Result<(), CliError> {
    let (rows, cols) = obs.shape();
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let result = (|| {
        writeln!(w, "{MM_BANNER} matrix coordinate real general")?;
        writeln!(w, "{rows} {cols} {}", obs.len())?;
        for &(i, j, v) in obs.entries() {
            writeln!(w, "{} {} {v:e}", i + 1, j + 1)?;
        }
        w.flush()
    })();
    result.map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn array_of_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "z.mtx",
            "%%MatrixMarket matrix array real general\n% note\n2 2\n0\n0\n0\n0\n",
        );
        assert_eq!(load_matrix(&p).unwrap(), Mat::zeros(2, 2));
    }

    #[test]
    fn single_triplet() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "o.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 3.5\n",
        );
        let obs = load_observed(&p).unwrap();
        assert_eq!(obs.shape(), (2, 2));
        assert_eq!(obs.entries(), &[(0, 0, 3.5)]);
    }

    #[test]
    fn symmetric_array_and_coordinate() {
        let dir = tempfile::tempdir().unwrap();
        let want = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        let a = write(
            &dir,
            "a.mtx",
            "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n",
        );
        assert_eq!(load_matrix(&a).unwrap(), want);
        let c = write(
            &dir,
            "c.mtx",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1\n2 1 2\n2 2 3\n",
        );
        assert_eq!(load_matrix(&c).unwrap(), want);
    }

    #[test]
    fn csv_dense_and_triplets() {
        let dir = tempfile::tempdir().unwrap();
        let d = write(&dir, "d.csv", "rows,cols\n2,3\n1,2,3\n4,5,6\n");
        assert_eq!(
            load_matrix(&d).unwrap(),
            Mat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        );
        let t = write(&dir, "t.csv", "rows,cols\n3,3\n1,2,0.5\n3,3,-1\n");
        let obs = load_observed(&t).unwrap();
        assert_eq!(obs.entries(), &[(0, 1, 0.5), (2, 2, -1.0)]);
    }

    #[test]
    fn duplicate_names_first_occurrence() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "dup.mtx",
            "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 2 1\n2 2 1\n1 2 5\n",
        );
        let msg = load_observed(&p).unwrap_err().to_string();
        assert!(
            msg.contains(":5:") && msg.contains("duplicate entry (1, 2)") && msg.contains("line 3"),
            "{msg}"
        );
    }

    #[test]
    fn out_of_range_and_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "r.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
        );
        let msg = load_matrix(&p).unwrap_err().to_string();
        assert!(
            msg.contains(":3:") && msg.contains("row index 3 out of range"),
            "{msg}"
        );
        let q = write(
            &dir,
            "q.mtx",
            "%%MatrixMarket matrix array real general\n2 1\n1.0\nabc\n",
        );
        let msg = load_matrix(&q).unwrap_err().to_string();
        assert!(
            msg.contains(":4:") && msg.contains("invalid number 'abc'"),
            "{msg}"
        );
        let u = write(&dir, "u.txt", "hello\n");
        assert!(load_matrix(&u).unwrap_err().to_string().contains(":1:"));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let m = Mat::from_fn(4, 3, |i, j| {
            ((i * 7 + j * 13) as f64).sin() * 1e-3 + 1.0 / 3.0
        });
        let p = dir.path().join("m.mtx");
        write_matrix(&p, &m).unwrap();
        assert_eq!(load_matrix(&p).unwrap(), m);
        let obs = ObservedEntries::new(3, 2, vec![(0, 1, 0.1), (2, 0, -7.25e-9)]).unwrap();
        let q = dir.path().join("o.mtx");
        write_observed(&q, &obs).unwrap();
        assert_eq!(load_observed(&q).unwrap(), obs);
    }
}
