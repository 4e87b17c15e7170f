//! Point matrices and their on-disk text format.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

/// A row-major `n × d` matrix of finite coordinates.
///
/// Point indices `0..n` stay fixed for the lifetime of the value; every
/// other structure in the crate refers to points by these indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    /// Builds a dataset from a flat row-major buffer.
    pub fn new(points: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::domain(format!(
                "dataset must have n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if points.len() != n * d {
            return Err(Error::domain(format!(
                "buffer holds {} values, expected {n}x{d}",
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite coordinate at point {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Dataset { points, n, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut points = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::domain(format!(
                    "row {i} has {} columns, expected {d}",
                    r.len()
                )));
            }
            points.extend_from_slice(r);
        }
        Dataset::new(points, rows.len(), d)
    }

    /// One-dimensional dataset, mostly handy in tests.
    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        Dataset::new(xs.to_vec(), xs.len(), 1)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Euclidean distance between points `a` and `b`.
    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        squared_distance(self.point(a), self.point(b)).sqrt()
    }
}

#[inline]
pub(crate) fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let t = a - b;
            t * t
        })
        .sum()
}

/// Euclidean distance between two points of `ds`.
///
/// Panics if either index is out of bounds.
pub fn euclidean_distance(a: usize, b: usize, ds: &Dataset) -> f64 {
    assert!(
        a < ds.n() && b < ds.n(),
        "point index out of bounds: ({a}, {b}) with n={}",
        ds.n()
    );
    ds.distance(a, b)
}

/// Opens a text file, transparently decompressing it when the name ends in `.gz`.
pub(crate) fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let gz = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("gz"))
        .unwrap_or(false);
    let reader: Box<dyn Read> = if gz {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::new(reader)))
}

/// Reads a whitespace-separated matrix, one point per line.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    parse_dataset(open_text(path)?, path)
}

pub(crate) fn parse_dataset(reader: impl BufRead, path: &Path) -> Result<Dataset> {
    let mut points = Vec::new();
    let mut d = 0;
    let mut n = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut found = 0;
        for token in line.split_ascii_whitespace() {
            let x: f64 = token.parse().map_err(|_| Error::Parse {
                path: path.to_owned(),
                line: lineno + 1,
                token: token.to_owned(),
            })?;
            if !x.is_finite() {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: lineno + 1,
                    token: token.to_owned(),
                });
            }
            points.push(x);
            found += 1;
        }
        if n == 0 {
            d = found;
        } else if found != d {
            return Err(Error::RaggedRow {
                path: path.to_owned(),
                line: lineno + 1,
                expected: d,
                found,
            });
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput {
            path: path.to_owned(),
        });
    }
    Dataset::new(points, n, d)
}

/// Writes `ds` in the same format `load_dataset` reads.
///
/// Coordinates use the shortest representation that parses back to the
/// identical `f64`.
pub fn write_dataset(ds: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    for i in 0..ds.n() {
        let mut first = true;
        for x in ds.point(i) {
            if !first {
                out.write_all(b" ")?;
            }
            write!(out, "{x}")?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<Dataset> {
        parse_dataset(Cursor::new(text), Path::new("mem"))
    }

    #[test]
    fn parses_simple_matrix() {
        let ds = parse("0 0\n1 0\n0 1\n").unwrap();
        assert_eq!((ds.n(), ds.d()), (3, 2));
        assert_eq!(ds.point(1), &[1.0, 0.0]);
    }

    #[test]
    fn crlf_and_tabs() {
        let ds = parse("0\t0\r\n1  0\r\n").unwrap();
        assert_eq!((ds.n(), ds.d()), (2, 2));
    }

    #[test]
    fn ragged_row_names_line() {
        match parse("1 2 3\n4 5\n") {
            Err(Error::RaggedRow { line, expected, found, .. }) => {
                assert_eq!((line, expected, found), (2, 3, 2))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_token() {
        assert!(matches!(
            parse("1 2\n3 x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse("nan 1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_file() {
        assert!(matches!(parse(""), Err(Error::EmptyInput { .. })));
        assert!(matches!(parse("\n  \n"), Err(Error::EmptyInput { .. })));
    }

    #[test]
    fn gzip_is_transparent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.data.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), Compression::default());
        enc.write_all(b"0 0\n1 0\n0 1\n").unwrap();
        enc.finish().unwrap();
        let ds = load_dataset(&path).unwrap();
        assert_eq!(ds, parse("0 0\n1 0\n0 1\n").unwrap());
    }

    #[test]
    fn distances() {
        let ds = Dataset::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert_eq!(euclidean_distance(0, 1, &ds), 5.0);
        assert_eq!(euclidean_distance(1, 1, &ds), 0.0);
        let ds = Dataset::from_rows(&[[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]).unwrap();
        assert!((euclidean_distance(0, 1, &ds) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Dataset::new(vec![1.0, f64::NAN], 2, 1).is_err());
        assert!(Dataset::new(vec![], 0, 1).is_err());
    }

    fn small_dataset() -> impl Strategy<Value = Dataset> {
        (1usize..12, 1usize..4).prop_flat_map(|(n, d)| {
            prop::collection::vec(-1e3f64..1e3, n * d)
                .prop_map(move |v| Dataset::new(v, n, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn write_then_load_is_identity(ds in small_dataset()) {
            let mut buf = Vec::new();
            write_dataset(&ds, &mut buf).unwrap();
            let back = parse_dataset(Cursor::new(buf), Path::new("mem")).unwrap();
            prop_assert_eq!(back, ds);
        }

        #[test]
        fn distance_symmetry_and_triangle(ds in small_dataset(), a in 0usize..12, b in 0usize..12, c in 0usize..12) {
            let n = ds.n();
            let (a, b, c) = (a % n, b % n, c % n);
            prop_assert_eq!(ds.distance(a, b), ds.distance(b, a));
            let lhs = ds.distance(a, c);
            let rhs = ds.distance(a, b) + ds.distance(b, c);
            prop_assert!(lhs <= rhs + 1e-9);
        }
    }
}
