//! Datasets: generation, ingestion, normalization, splitting.

mod pool;
mod synth;

pub use pool::{init_pool, PoolState};
pub use synth::{generate_synthetic, sample_spec, sample_spec_capped, SyntheticSpec};

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Dense row-major matrix of feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
}

/// A labeled classification dataset; the universe from which the labeled
/// set, the unlabeled pool and the test split are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    /// Per-column (min, max) recorded by min-max normalization, if applied.
    pub feature_scale: Option<Vec<(f64, f64)>>,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// Maximum possible Euclidean distance after min-max normalization.
    pub fn max_distance(&self) -> f64 {
        (self.n_features() as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_samples();
        let c = self.n_classes;
        if self.labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} samples",
                self.labels.len(),
                n
            )));
        }
        if n < c {
            return Err(Error::InvalidDataset(format!(
                "{n} samples cannot seed {c} classes"
            )));
        }
        let mut seen = vec![false; c];
        for (i, &y) in self.labels.iter().enumerate() {
            if y >= c {
                return Err(Error::InvalidDataset(format!(
                    "label {y} at row {i} out of range [0, {c})"
                )));
            }
            seen[y] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidDataset(format!(
                "class {missing} has no samples"
            )));
        }
        Ok(())
    }
}

/// Min-max normalize every feature column to [0, 1].
///
/// Constant columns map to 0. The per-column (min, max) pair is recorded so
/// downstream consumers can invert the mapping. The maximum possible
/// Euclidean distance in the normalized space is `sqrt(n_features)`.
pub fn normalize_minmax(dataset: &Dataset) -> Dataset {
    let n = dataset.n_samples();
    let d = dataset.n_features();
    let mut scale = Vec::with_capacity(d);
    let mut out = Matrix::zeros(n, d);
    for j in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let v = dataset.features.get(i, j);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = hi - lo;
        for i in 0..n {
            let v = dataset.features.get(i, j);
            let mapped = if span > 0.0 { (v - lo) / span } else { 0.0 };
            out.set(i, j, mapped);
        }
        scale.push((lo, hi));
    }
    Dataset {
        name: dataset.name.clone(),
        features: out,
        labels: dataset.labels.clone(),
        n_classes: dataset.n_classes,
        feature_scale: Some(scale),
    }
}

/// Load a rectangular numeric CSV with a header row. The named label column
/// is re-encoded to contiguous class ids in order of first appearance; row
/// order is preserved.
pub fn load_csv(path: &Path, label_column: &str) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::CsvParse {
        row: 0,
        col: 0,
        msg: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
    let label_idx = cols
        .iter()
        .position(|c| *c == label_column)
        .ok_or_else(|| Error::CsvParse {
            row: 0,
            col: 0,
            msg: format!("label column '{label_column}' not found in header"),
        })?;
    let width = cols.len();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (li, line) in lines.enumerate() {
        let row_no = li + 1; // header is row 0
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(Error::CsvParse {
                row: row_no,
                col: cells.len().min(width),
                msg: format!("expected {width} cells, found {}", cells.len()),
            });
        }
        let mut feats = Vec::with_capacity(width - 1);
        for (ci, cell) in cells.iter().enumerate() {
            let cell = cell.trim();
            if ci == label_idx {
                if cell.is_empty() {
                    return Err(Error::CsvParse {
                        row: row_no,
                        col: ci,
                        msg: "missing label cell".into(),
                    });
                }
                raw_labels.push(cell.to_string());
            } else {
                if cell.is_empty() {
                    return Err(Error::CsvParse {
                        row: row_no,
                        col: ci,
                        msg: "missing cell".into(),
                    });
                }
                let v: f64 = cell.parse().map_err(|_| Error::CsvParse {
                    row: row_no,
                    col: ci,
                    msg: format!("non-numeric feature value '{cell}'"),
                })?;
                feats.push(v);
            }
        }
        rows.push(feats);
    }

    // Class ids in order of first appearance.
    let mut class_names: Vec<String> = Vec::new();
    let mut labels = Vec::with_capacity(raw_labels.len());
    for raw in &raw_labels {
        let id = match class_names.iter().position(|c| c == raw) {
            Some(id) => id,
            None => {
                class_names.push(raw.clone());
                class_names.len() - 1
            }
        };
        labels.push(id);
    }
    if class_names.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "need at least 2 classes, file has {}",
            class_names.len()
        )));
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    let ds = Dataset {
        name,
        features: Matrix::from_rows(&rows),
        labels,
        n_classes: class_names.len(),
        feature_scale: None,
    };
    ds.validate()?;
    Ok(ds)
}

/// Write a dataset as CSV (feature columns f0..f{d-1} plus a label column).
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for j in 0..dataset.n_features() {
        let _ = write!(out, "f{j},");
    }
    out.push_str("label\n");
    for i in 0..dataset.n_samples() {
        for &v in dataset.features.row(i) {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", dataset.labels[i]);
    }
    std::fs::write(path, out)?;
    Ok(())
}

// Dataset cache format (version 1), stable across releases:
//   line 1: "ALDS 1 <n_samples> <n_features> <n_classes> <name>"
//   line 2: "scale <min> <max> ... (2*d values)" or "scale none"
//   then n_samples lines: d feature values then the integer label,
//   space-separated, floats printed in shortest round-trip form.
const CACHE_MAGIC: &str = "ALDS";
const CACHE_VERSION: u32 = 1;

pub fn save_cache(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{CACHE_MAGIC} {CACHE_VERSION} {} {} {} {}",
        dataset.n_samples(),
        dataset.n_features(),
        dataset.n_classes,
        dataset.name
    );
    match &dataset.feature_scale {
        Some(scale) => {
            out.push_str("scale");
            for (lo, hi) in scale {
                let _ = write!(out, " {lo} {hi}");
            }
            out.push('\n');
        }
        None => out.push_str("scale none\n"),
    }
    for i in 0..dataset.n_samples() {
        for &v in dataset.features.row(i) {
            let _ = write!(out, "{v} ");
        }
        let _ = writeln!(out, "{}", dataset.labels[i]);
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_cache(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let bad = |msg: &str| Error::InvalidDataset(format!("{}: {msg}", path.display()));
    let header = lines.next().ok_or_else(|| bad("empty cache file"))?;
    let mut parts = header.splitn(6, ' ');
    if parts.next() != Some(CACHE_MAGIC) {
        return Err(bad("not a dataset cache file"));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("missing version"))?;
    if version != CACHE_VERSION {
        return Err(bad(&format!("unsupported cache version {version}")));
    }
    let n: usize = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("bad sample count"))?;
    let d: usize = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("bad feature count"))?;
    let c: usize = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("bad class count"))?;
    let name = parts.next().unwrap_or("cached").to_string();

    let scale_line = lines.next().ok_or_else(|| bad("missing scale line"))?;
    let feature_scale = if scale_line == "scale none" {
        None
    } else {
        let vals: Vec<f64> = scale_line
            .strip_prefix("scale ")
            .ok_or_else(|| bad("bad scale line"))?
            .split(' ')
            .map(|v| v.parse::<f64>().map_err(|_| bad("bad scale value")))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * d {
            return Err(bad("scale length mismatch"));
        }
        Some(vals.chunks(2).map(|c| (c[0], c[1])).collect())
    };

    let mut features = Matrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let line = lines.next().ok_or_else(|| bad("truncated cache file"))?;
        let mut cells = line.split(' ');
        for j in 0..d {
            let v: f64 = cells
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(&format!("bad feature at row {i} col {j}")))?;
            features.set(i, j, v);
        }
        let y: usize = cells
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(&format!("bad label at row {i}")))?;
        labels.push(y);
    }

    let ds = Dataset {
        name,
        features,
        labels,
        n_classes: c,
        feature_scale,
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(cols: Vec<Vec<f64>>, labels: Vec<usize>, c: usize) -> Dataset {
        Dataset {
            name: "toy".into(),
            features: Matrix::from_rows(&cols),
            labels,
            n_classes: c,
            feature_scale: None,
        }
    }

    #[test]
    fn normalize_affine_map() {
        let ds = toy(vec![vec![2.0], vec![4.0], vec![6.0]], vec![0, 1, 0], 2);
        let norm = normalize_minmax(&ds);
        assert_eq!(norm.features.row(0), &[0.0]);
        assert_eq!(norm.features.row(1), &[0.5]);
        assert_eq!(norm.features.row(2), &[1.0]);
    }

    #[test]
    fn normalize_constant_column_to_zero() {
        let ds = toy(vec![vec![5.0], vec![5.0], vec![5.0]], vec![0, 1, 0], 2);
        let norm = normalize_minmax(&ds);
        for i in 0..3 {
            assert_eq!(norm.features.get(i, 0), 0.0);
        }
    }

    #[test]
    fn normalized_max_distance_is_sqrt_d() {
        let ds = toy(
            vec![vec![0.0, 0.0], vec![10.0, 3.0]],
            vec![0, 1],
            2,
        );
        let norm = normalize_minmax(&ds);
        let a = norm.features.row(0);
        let b = norm.features.row(1);
        let dist: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!((dist - 2f64.sqrt()).abs() < 1e-12);
        assert!((norm.max_distance() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent() {
        let ds = toy(
            vec![vec![2.0, 1.0], vec![4.0, 1.0], vec![6.0, 9.0]],
            vec![0, 1, 0],
            2,
        );
        let once = normalize_minmax(&ds);
        let twice = normalize_minmax(&once);
        assert_eq!(once.features, twice.features);
    }

    #[test]
    fn csv_label_encoding_first_appearance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,label\n1.0,a\n2.0,b\n3.0,a\n").unwrap();
        let ds = load_csv(&path, "label").unwrap();
        assert_eq!(ds.labels, vec![0, 1, 0]);
        assert_eq!(ds.n_classes, 2);
    }

    #[test]
    fn csv_missing_cell_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,y,label\n1.0,2.0,a\n1.0,,b\n").unwrap();
        let err = load_csv(&path, "label").unwrap_err();
        match err {
            Error::CsvParse { row, col, .. } => {
                assert_eq!(row, 2);
                assert_eq!(col, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_non_numeric_cell_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,label\noops,a\n1.0,b\n").unwrap();
        let err = load_csv(&path, "label").unwrap_err();
        match err {
            Error::CsvParse { row, col, .. } => {
                assert_eq!(row, 1);
                assert_eq!(col, 0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_single_class_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,label\n1.0,a\n2.0,a\n").unwrap();
        assert!(load_csv(&path, "label").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = toy(
            vec![vec![0.25, -1.5], vec![3.0, 0.125], vec![2.0, 7.0]],
            vec![0, 1, 1],
            2,
        );
        let path = dir.path().join("rt.csv");
        save_csv(&ds, &path).unwrap();
        let back = load_csv(&path, "label").unwrap();
        assert_eq!(back.features, ds.features);
        assert_eq!(back.labels, ds.labels);
    }

    #[test]
    fn cache_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let ds = normalize_minmax(&toy(
            vec![vec![0.1, 2.0], vec![0.7, -3.0], vec![0.33, 0.0]],
            vec![0, 1, 1],
            2,
        ));
        let path = dir.path().join("c.alds");
        save_cache(&ds, &path).unwrap();
        let back = load_cache(&path).unwrap();
        assert_eq!(back, ds);
    }
}
