use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::{DirectedGraph, DuplicatePolicy};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFormat {
    Tsv,
    Csv,
}

impl EdgeFormat {
    /// Guesses the format from the file extension, defaulting to TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => EdgeFormat::Csv,
            _ => EdgeFormat::Tsv,
        }
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            // TSV files in the wild often use runs of spaces as well
            EdgeFormat::Tsv => line.split(['\t', ' ']).filter(|f| !f.is_empty()).collect(),
            EdgeFormat::Csv => line.split(',').map(str::trim).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows: usize,
    pub header_skipped: bool,
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

const HEADER_WORDS: &[&str] = &[
    "src", "source", "from", "dst", "target", "to", "u", "v", "node1", "node2", "gene1", "gene2",
    "weight",
];

/// Reads an edge list `src<sep>dst[<sep>weight]`.
///
/// Vertex ids are used as-is when every id is a non-negative integer;
/// otherwise all ids are interned as names in first-appearance order.
/// Lines that are blank or start with `#` are ignored.
pub fn load_edge_list(
    path: &Path,
    format: EdgeFormat,
    unit_weights: bool,
    header: HeaderMode,
) -> Result<(DirectedGraph, LoadReport)> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, path, format, unit_weights, header)
}

pub fn parse_edge_list(
    text: &str,
    path: &Path,
    format: EdgeFormat,
    unit_weights: bool,
    header: HeaderMode,
) -> Result<(DirectedGraph, LoadReport)> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        msg,
    };

    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = format.split(line);
        if fields.len() < 2 || fields.len() > 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(parse_err(
                i + 1,
                format!("expected `src, dst[, weight]`, got {} field(s)", fields.len()),
            ));
        }
        rows.push((i + 1, fields));
    }

    let mut report = LoadReport::default();
    let skip_header = match header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => rows.first().is_some_and(|(_, first)| looks_like_header(first, rows.get(1).map(|r| &r.1))),
    };
    if skip_header && !rows.is_empty() {
        rows.remove(0);
        report.header_skipped = true;
    }
    if rows.is_empty() {
        return Err(Error::Empty(format!("{}: no edges", path.display())));
    }

    let numeric_ids = rows
        .iter()
        .all(|(_, f)| f[0].parse::<usize>().is_ok() && f[1].parse::<usize>().is_ok());

    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut max_id = 0usize;
    let mut triples = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        let weight = match fields.get(2) {
            Some(w) => {
                let w: f64 = w
                    .parse()
                    .map_err(|_| parse_err(*line, format!("invalid weight `{w}`")))?;
                if !(w.is_finite() && w >= 0.0) {
                    return Err(parse_err(*line, format!("weight must be finite and >= 0, got {w}")));
                }
                w
            }
            None => 1.0,
        };
        let (src, dst) = if numeric_ids {
            let s: usize = fields[0].parse().expect("checked numeric");
            let d: usize = fields[1].parse().expect("checked numeric");
            max_id = max_id.max(s).max(d);
            (s, d)
        } else {
            let mut intern = |name: &str| {
                *index.entry(name.to_string()).or_insert_with(|| {
                    names.push(name.to_string());
                    names.len() - 1
                })
            };
            (intern(fields[0]), intern(fields[1]))
        };
        triples.push((src, dst, weight));
    }
    report.rows = triples.len();

    let n = if numeric_ids { max_id + 1 } else { names.len() };
    let policy = if unit_weights {
        DuplicatePolicy::UnitWeight
    } else {
        DuplicatePolicy::Sum
    };
    let (mut graph, build) = DirectedGraph::from_edges(n, triples, policy)?;
    if !numeric_ids {
        graph = graph.with_names(names)?;
    }
    report.self_loops_dropped = build.self_loops_dropped;
    report.duplicates_merged = build.duplicates_merged;
    if build.self_loops_dropped > 0 {
        log::warn!(
            "{}: dropped {} self-loop(s)",
            path.display(),
            build.self_loops_dropped
        );
    }
    Ok((graph, report))
}

fn looks_like_header(first: &[&str], second: Option<&Vec<&str>>) -> bool {
    if let Some(w) = first.get(2) {
        if w.parse::<f64>().is_err() {
            return true;
        }
    }
    let is_num = |s: &str| s.parse::<f64>().is_ok();
    if !is_num(first[0]) && !is_num(first[1]) {
        if HEADER_WORDS.contains(&first[0].to_ascii_lowercase().as_str())
            && HEADER_WORDS.contains(&first[1].to_ascii_lowercase().as_str())
        {
            return true;
        }
        // non-numeric first row above numeric data
        if let Some(second) = second {
            return is_num(second[0]) && is_num(second[1]);
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, format: EdgeFormat) -> Result<(DirectedGraph, LoadReport)> {
        parse_edge_list(text, Path::new("test"), format, true, HeaderMode::Auto)
    }

    #[test]
    fn string_ids_are_interned_in_order() {
        let (g, _) = parse("a\tb\nb\tc\n", EdgeFormat::Tsv).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.n_edges(), 2);
        assert_eq!(g.names().unwrap(), &["a", "b", "c"]);
    }

    #[test]
    fn duplicate_rows_merge() {
        let (g, report) = parse("0,1\n0,1\n", EdgeFormat::Csv).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(report.duplicates_merged, 1);
    }

    #[test]
    fn self_loop_dropped_and_reported() {
        let (g, report) = parse("0 0\n0 1\n", EdgeFormat::Tsv).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(report.self_loops_dropped, 1);
    }

    #[test]
    fn header_detection() {
        let (g, r) = parse("src,dst,weight\n0,1,2\n1,2,1\n", EdgeFormat::Csv).unwrap();
        assert!(r.header_skipped);
        assert_eq!(g.n_edges(), 2);
        let (g, r) = parse("from\tto\nx\ty\n", EdgeFormat::Tsv).unwrap();
        assert!(r.header_skipped);
        assert_eq!(g.n_vertices(), 2);
        let (_, r) = parse("x\ty\ny\tz\n", EdgeFormat::Tsv).unwrap();
        assert!(!r.header_skipped);
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let err = parse("0,1\n\n0,1,2,3\n", EdgeFormat::Csv).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse("0,1,abc\n1,2,x\n", EdgeFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(parse("", EdgeFormat::Tsv), Err(Error::Empty(_))));
        assert!(matches!(parse("# comment\n", EdgeFormat::Tsv), Err(Error::Empty(_))));
    }

    #[test]
    fn weights_kept_unless_unit() {
        let (g, _) =
            parse_edge_list("0,1,2.5\n", Path::new("t"), EdgeFormat::Csv, false, HeaderMode::Absent).unwrap();
        assert_eq!(g.edges()[0].weight, 2.5);
    }
}
