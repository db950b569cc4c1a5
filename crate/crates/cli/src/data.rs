//! Count-data readers.

use std::path::Path;

use rsvi::models::CountMatrix;

use crate::cli::DataFormat;
use crate::failure::Failure;

pub fn read_counts(path: &Path, format: Option<DataFormat>) -> Result<CountMatrix, Failure> {
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => DataFormat::Csv,
        _ => DataFormat::Bow,
    });
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read data {}: {e}", path.display())))?;
    let bad = |line: usize, msg: String| Failure::Config(format!("{}:{line}: {msg}", path.display()));
    match format {
        DataFormat::Bow => parse_bow(&text).map_err(|(l, m)| bad(l, m)),
        DataFormat::Csv => parse_dense(&text).map_err(|(l, m)| bad(l, m)),
    }
}

type ParseResult = Result<CountMatrix, (usize, String)>;

/// `doc_id word_id count` per line, 0-indexed; repeated pairs add up. The
/// matrix spans the largest ids seen.
pub fn parse_bow(text: &str) -> ParseResult {
    let mut entries = Vec::new();
    let (mut rows, mut cols) = (0, 0);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err((i + 1, format!("expected `doc_id word_id count`, got {line:?}")));
        }
        let parse = |s: &str| s.parse::<u64>().map_err(|e| (i + 1, format!("{s:?}: {e}")));
        let (d, w, c) = (parse(fields[0])? as usize, parse(fields[1])? as usize, parse(fields[2])?);
        rows = rows.max(d + 1);
        cols = cols.max(w + 1);
        entries.push((d, w, c));
    }
    if entries.is_empty() {
        return Err((0, "no entries".into()));
    }
    let mut data = vec![0u64; rows * cols];
    for (d, w, c) in entries {
        data[d * cols + w] += c;
    }
    CountMatrix::new(rows, cols, data).map_err(|e| (0, e.to_string()))
}

/// Dense CSV of non-negative integers; `#` lines are comments and a first
/// row that is not numeric is taken as a header.
pub fn parse_dense(text: &str) -> ParseResult {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| (i + 1, e.to_string()))?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        let parsed: Result<Vec<u64>, _> = rec.iter().map(str::parse::<u64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if rows == 0 && cols.is_none() => {
                cols = Some(rec.len());
                continue;
            }
            Err(e) => return Err((line, format!("non-integer cell: {e}"))),
        };
        match cols {
            Some(c) if c != values.len() => {
                return Err((line, format!("expected {c} cells, got {}", values.len())));
            }
            _ => cols = Some(values.len()),
        }
        data.extend(values);
        rows += 1;
    }
    if rows == 0 {
        return Err((0, "no data rows".into()));
    }
    CountMatrix::new(rows, cols.unwrap_or(0), data).map_err(|e| (0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bag_of_words_sums_repeats() {
        let m = parse_bow("# doc word count\n0 2 3\n1 0 1\n\n0 2 1\n").unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert_eq!(m.row(0), &[0, 0, 4]);
        assert_eq!(m.row(1), &[1, 0, 0]);
        assert_eq!(parse_bow("0 1\n").unwrap_err().0, 1);
        assert_eq!(parse_bow("0 0 1\n0 x 2\n").unwrap_err().0, 2);
        assert!(parse_bow("").is_err());
    }

    #[test]
    fn dense_with_and_without_header() {
        let m = parse_dense("a,b,c\n1,2,3\n4, 5 ,6\n").unwrap();
        assert_eq!(m.as_slice(), &[1, 2, 3, 4, 5, 6]);
        let m = parse_dense("# comment\n0,1\n2,3\n").unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert!(parse_dense("1,2\n3\n").is_err());
        assert!(parse_dense("1,2\n3,-1\n").is_err());
        assert!(parse_dense("x,y\n").is_err());
    }
}
