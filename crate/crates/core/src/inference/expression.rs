use std::collections::{HashMap, HashSet};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Cells × genes expression values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMatrix {
    pub cells: Vec<String>,
    pub genes: Vec<String>,
    pub values: Array2<f64>,
}

/// Per-cell metadata aligned to the rows of an [`ExpressionMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellAnnotations {
    pub cell_type: Vec<String>,
    /// Field-of-view id, present for spatial data.
    pub fov: Option<Vec<String>>,
    pub coords: Option<Vec<(f64, f64)>>,
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        line,
        msg: msg.into(),
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

impl ExpressionMatrix {
    pub fn new(cells: Vec<String>, genes: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (cells.len(), genes.len()) {
            return Err(Error::Dimension(format!(
                "expression matrix {:?} for {} cells and {} genes",
                values.dim(),
                cells.len(),
                genes.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("expression matrix has non-finite values".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = genes.iter().find(|g| !seen.insert(g.as_str())) {
            return Err(Error::InvalidArgument(format!("duplicate gene name `{dup}`")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = cells.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(Error::InvalidArgument(format!("duplicate cell id `{dup}`")));
        }
        Ok(Self { cells, genes, values })
    }

    /// CSV with header `cell,<gene>,<gene>,..` and one row per cell.
    pub fn parse_csv(text: &str, path: &str) -> Result<Self> {
        let mut rdr = csv_reader(text);
        let header = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
        if header.len() < 2 {
            return Err(parse_err(path, 1, "expected a cell id column and at least one gene"));
        }
        let genes: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut cells = Vec::new();
        let mut data = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                parse_err(path, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != genes.len() + 1 {
                return Err(parse_err(path, line, format!("expected {} fields, got {}", genes.len() + 1, rec.len())));
            }
            cells.push(rec[0].to_string());
            for field in rec.iter().skip(1) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_err(path, line, format!("invalid expression value `{field}`")))?;
                data.push(v);
            }
        }
        if cells.is_empty() {
            return Err(Error::Empty(format!("{path}: no cells")));
        }
        let values = Array2::from_shape_vec((cells.len(), genes.len()), data).expect("row lengths checked");
        Self::new(cells, genes, values)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn gene_index(&self, gene: &str) -> Option<usize> {
        self.genes.iter().position(|g| g == gene)
    }
}

impl CellAnnotations {
    /// CSV `cell,cell_type[,fov[,x,y]]` with a header row, reordered to
    /// follow `cells`. Every listed cell must be annotated.
    pub fn parse_csv(text: &str, path: &str, cells: &[String]) -> Result<Self> {
        let mut rdr = csv_reader(text);
        let width = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.len();
        if !matches!(width, 2 | 3 | 5) {
            return Err(parse_err(path, 1, "expected columns cell,cell_type[,fov[,x,y]]"));
        }
        let mut rows: HashMap<String, (String, Option<String>, Option<(f64, f64)>)> = HashMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                parse_err(path, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let fov = (width >= 3).then(|| rec[2].to_string());
            let xy = if width == 5 {
                let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(path, line, format!("invalid coordinate `{s}`")));
                Some((num(&rec[3])?, num(&rec[4])?))
            } else {
                None
            };
            if rows.insert(rec[0].to_string(), (rec[1].to_string(), fov, xy)).is_some() {
                return Err(parse_err(path, line, format!("cell `{}` annotated twice", &rec[0])));
            }
        }
        let mut cell_type = Vec::with_capacity(cells.len());
        let mut fov = Vec::new();
        let mut coords = Vec::new();
        for c in cells {
            let (t, f, xy) = rows
                .remove(c)
                .ok_or_else(|| Error::InvalidArgument(format!("{path}: cell `{c}` has no annotation")))?;
            cell_type.push(t);
            fov.extend(f);
            coords.extend(xy);
        }
        Ok(Self {
            cell_type,
            fov: (width >= 3).then_some(fov),
            coords: (width == 5).then_some(coords),
        })
    }

    pub fn load_csv(path: &Path, cells: &[String]) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?, &path.display().to_string(), cells)
    }

    pub fn cells_of_type(&self, t: &str) -> Vec<usize> {
        (0..self.cell_type.len()).filter(|&i| self.cell_type[i] == t).collect()
    }
}

/// CSV `gene,intercellular` where the flag is `true/false`, `1/0` or
/// `yes/no`.
pub fn parse_annotation_csv(text: &str, path: &str) -> Result<HashMap<String, bool>> {
    let mut rdr = csv_reader(text);
    let mut out = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(path, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(parse_err(path, line, "expected gene,intercellular"));
        }
        let flag = match rec[1].to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            other => return Err(parse_err(path, line, format!("invalid boolean `{other}`"))),
        };
        out.insert(rec[0].to_string(), flag);
    }
    Ok(out)
}

pub fn load_annotation_csv(path: &Path) -> Result<HashMap<String, bool>> {
    parse_annotation_csv(&std::fs::read_to_string(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_expression_and_labels() {
        let expr = ExpressionMatrix::parse_csv("cell,A,B\nc1,1.5,0\nc2,0,2\n", "e.csv").unwrap();
        assert_eq!(expr.genes, vec!["A", "B"]);
        assert_eq!(expr.values[[1, 1]], 2.0);
        let ann = CellAnnotations::parse_csv("cell,type,fov\nc2,t2,f1\nc1,t1,f0\n", "l.csv", &expr.cells).unwrap();
        assert_eq!(ann.cell_type, vec!["t1", "t2"]);
        assert_eq!(ann.fov.unwrap(), vec!["f0", "f1"]);
        assert!(ann.coords.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        let err = ExpressionMatrix::parse_csv("cell,A\nc1,x\n", "e.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        assert!(ExpressionMatrix::parse_csv("cell,A,A\nc1,1,2\n", "e.csv").is_err());
        let cells = vec!["c1".to_string()];
        assert!(CellAnnotations::parse_csv("cell,type\nc9,t\n", "l.csv", &cells).is_err());
    }

    #[test]
    fn annotation_flags() {
        let a = parse_annotation_csv("gene,intercellular\nL,true\nR,1\nX,no\n", "a.csv").unwrap();
        assert_eq!((a["L"], a["R"], a["X"]), (true, true, false));
        assert!(parse_annotation_csv("gene,intercellular\nL,maybe\n", "a.csv").is_err());
    }
}
