//! Dataset generation, ingestion, splitting and caching.
//!
//! Synthetic data follows the two-cluster geometry with centers
//! `(-0.75, 2.25)` and `(1, 2)`; coordinates beyond the first two are pure
//! noise dimensions centered at 0. Splits are seeded and exact: the train
//! side takes `floor(fraction * m)` indices, the remainder goes to test.

use crate::error::{LightError, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

/// Parameters of the synthetic two-cluster generator.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobParams {
    pub m: usize,
    pub n: usize,
    pub cluster_std: f64,
    /// Centers of the two clusters; cluster A carries label -1, cluster B +1.
    pub centers: [Vec<f64>; 2],
    pub seed: u64,
}

impl BlobParams {
    /// The experiment geometry: centers `(-0.75, 2.25)` and `(1, 2)`,
    /// zero-padded beyond the first two coordinates.
    pub fn standard(m: usize, n: usize, cluster_std: f64, seed: u64) -> Self {
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        if n >= 1 {
            a[0] = -0.75;
            b[0] = 1.0;
        }
        if n >= 2 {
            a[1] = 2.25;
            b[1] = 2.0;
        }
        BlobParams {
            m,
            n,
            cluster_std,
            centers: [a, b],
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(LightError::InvalidParams(format!(
                "m must be >= 2, got {}",
                self.m
            )));
        }
        if self.n < 2 {
            return Err(LightError::InvalidParams(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        if !(self.cluster_std > 0.0 && self.cluster_std.is_finite()) {
            return Err(LightError::InvalidParams(format!(
                "cluster_std must be > 0, got {}",
                self.cluster_std
            )));
        }
        for c in &self.centers {
            if c.len() != self.n {
                return Err(LightError::Shape {
                    expected: format!("center of dimension {}", self.n),
                    got: format!("{}", c.len()),
                });
            }
        }
        Ok(())
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    SyntheticBlobs(BlobParams),
    TabularFile(PathBuf),
    ImageFile(PathBuf),
}

/// Feature matrix with +-1 labels and a train/test index partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    x: Vec<f64>, // m * n, row-major
    y: Vec<f64>, // labels in {-1, +1}
    train_idx: Vec<usize>,
    test_idx: Vec<usize>,
    provenance: Provenance,
}

impl Dataset {
    pub fn from_parts(
        n: usize,
        x: Vec<f64>,
        y: Vec<f64>,
        train_idx: Vec<usize>,
        test_idx: Vec<usize>,
        provenance: Provenance,
    ) -> Result<Self> {
        let m = y.len();
        if n == 0 || x.len() != m * n {
            return Err(LightError::Shape {
                expected: format!("{m} x {n} features"),
                got: format!("{} values", x.len()),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LightError::InvalidParams("non-finite feature value".into()));
        }
        if y.iter().any(|v| *v != 1.0 && *v != -1.0) {
            return Err(LightError::InvalidParams("labels must be -1 or +1".into()));
        }
        let mut seen = vec![false; m];
        for &i in train_idx.iter().chain(test_idx.iter()) {
            if i >= m || seen[i] {
                return Err(LightError::InvalidParams(format!(
                    "split is not a partition (index {i})"
                )));
            }
            seen[i] = true;
        }
        if !seen.iter().all(|s| *s) {
            return Err(LightError::InvalidParams(
                "split does not cover all rows".into(),
            ));
        }
        Ok(Dataset {
            n,
            x,
            y,
            train_idx,
            test_idx,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n..(i + 1) * self.n]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.train_idx
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test_idx
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// Seeded 80/20-style split: shuffles `0..m` and takes `floor(fraction * m)`
/// indices for the train side. Both sides are returned sorted.
pub fn split_indices(m: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut rng);
    let train_len = (train_fraction * m as f64).floor() as usize;
    let mut train: Vec<usize> = idx[..train_len].to_vec();
    let mut test: Vec<usize> = idx[train_len..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Generate the synthetic two-cluster dataset. Cluster A (label -1) holds
/// `ceil(m/2)` samples, cluster B the rest; every coordinate is drawn
/// independently from `Normal(center_j, cluster_std)`. Deterministic under
/// the seed, with the 80/20 split derived from the same seed.
pub fn make_blobs(p: &BlobParams) -> Result<Dataset> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let count_a = p.m - p.m / 2;
    let mut x = Vec::with_capacity(p.m * p.n);
    let mut y = Vec::with_capacity(p.m);
    for i in 0..p.m {
        let (center, label) = if i < count_a {
            (&p.centers[0], -1.0)
        } else {
            (&p.centers[1], 1.0)
        };
        for j in 0..p.n {
            let dist = Normal::new(center[j], p.cluster_std)
                .map_err(|e| LightError::InvalidParams(e.to_string()))?;
            x.push(dist.sample(&mut rng));
        }
        y.push(label);
    }
    let (train, test) = split_indices(p.m, 0.8, p.seed);
    Dataset::from_parts(
        p.n,
        x,
        y,
        train,
        test,
        Provenance::SyntheticBlobs(p.clone()),
    )
}

/// How to binarize class labels: `+1` iff the class index is at least the
/// threshold (5 balances ten-class image sets).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinarizeRule {
    pub positive_from_class: u32,
}

impl Default for BinarizeRule {
    fn default() -> Self {
        BinarizeRule {
            positive_from_class: 5,
        }
    }
}

/// Parsing and splitting options for delimited text files.
#[derive(Debug, Clone)]
pub struct TabularSchema {
    /// `None` auto-detects: comma if the first data line contains one,
    /// whitespace otherwise.
    pub delimiter: Option<char>,
    /// Label column; `None` means the last column.
    pub label_column: Option<usize>,
    /// Validated against the parsed (rows, feature columns) when provided.
    pub expected_shape: Option<(usize, usize)>,
    pub train_fraction: f64,
    pub split_seed: u64,
}

impl Default for TabularSchema {
    fn default() -> Self {
        TabularSchema {
            delimiter: None,
            label_column: None,
            expected_shape: None,
            train_fraction: 0.8,
            split_seed: 0,
        }
    }
}

fn parse_delimited(
    path: &Path,
    delimiter: Option<char>,
) -> Result<(usize, Vec<f64>, Vec<f64>, usize)> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    let mut first_data_line = true;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let delim = delimiter.unwrap_or(if line.contains(',') { ',' } else { ' ' });
        let fields: Vec<&str> = if delim == ' ' {
            line.split_whitespace().collect()
        } else {
            line.split(delim).map(str::trim).collect()
        };
        let mut row = Vec::with_capacity(fields.len());
        let mut bad_col = None;
        for (col, f) in fields.iter().enumerate() {
            match f.parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) => {
                    bad_col = Some(col);
                    break;
                }
            }
        }
        if let Some(col) = bad_col {
            // A non-numeric first line is treated as a header.
            if first_data_line {
                first_data_line = false;
                continue;
            }
            return Err(LightError::Parse {
                row: line_no + 1,
                col: col + 1,
                message: format!("cannot parse {:?} as a number", fields[col]),
            });
        }
        first_data_line = false;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(LightError::Parse {
                    row: line_no + 1,
                    col: row.len(),
                    message: format!("expected {w} columns, found {}", row.len()),
                });
            }
            _ => {}
        }
        rows.push(row);
    }
    let width = width.ok_or_else(|| LightError::Parse {
        row: 0,
        col: 0,
        message: "file contains no data rows".into(),
    })?;
    if width < 2 {
        return Err(LightError::Parse {
            row: 1,
            col: 1,
            message: "need at least one feature column and one label column".into(),
        });
    }
    let m = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok((m, flat, Vec::new(), width))
}

/// Load a delimited text file as a binary-labeled dataset. The two distinct
/// label values map to -1 (smaller) and +1 (larger); more than two classes
/// is an error (use [`load_class_table`] + [`binarize_and_subsample`] for
/// multi-class sources).
pub fn load_tabular(path: impl AsRef<Path>, schema: &TabularSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let (m, flat, _, width) = parse_delimited(path, schema.delimiter)?;
    let label_col = schema.label_column.unwrap_or(width - 1);
    if label_col >= width {
        return Err(LightError::InvalidParams(format!(
            "label column {label_col} out of range for width {width}"
        )));
    }
    let n = width - 1;
    if let Some((em, en)) = schema.expected_shape {
        if (m, n) != (em, en) {
            return Err(LightError::Shape {
                expected: format!("{em} rows x {en} features"),
                got: format!("{m} x {n}"),
            });
        }
    }
    let mut x = Vec::with_capacity(m * n);
    let mut raw_labels = Vec::with_capacity(m);
    for i in 0..m {
        for c in 0..width {
            let v = flat[i * width + c];
            if c == label_col {
                raw_labels.push(v);
            } else {
                x.push(v);
            }
        }
    }
    let mut distinct: Vec<f64> = raw_labels.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(LightError::LabelCardinality(distinct.len()));
    }
    let y: Vec<f64> = raw_labels
        .iter()
        .map(|v| if *v == distinct[0] { -1.0 } else { 1.0 })
        .collect();
    let (train, test) = split_indices(m, schema.train_fraction, schema.split_seed);
    Dataset::from_parts(
        n,
        x,
        y,
        train,
        test,
        Provenance::TabularFile(path.to_path_buf()),
    )
}

/// Multi-class rows staged for binarization: features plus integer class
/// labels and a train/test partition of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTable {
    pub n: usize,
    pub x: Vec<f64>,
    pub classes: Vec<u32>,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub source: PathBuf,
}

/// Options for flattened pixel-row files.
#[derive(Debug, Clone)]
pub struct PixelSchema {
    pub delimiter: Option<char>,
    /// Collapse channel-planar RGB rows (3k values) to k grayscale values
    /// with luminance weights 0.299/0.587/0.114.
    pub grayscale_rgb: bool,
    /// Validated against the per-row feature count after any grayscale
    /// conversion.
    pub expected_features: Option<usize>,
    /// When given, the first `k` rows form the official train subset;
    /// otherwise a seeded 80/20 split is used.
    pub official_train_rows: Option<usize>,
    pub split_seed: u64,
}

impl Default for PixelSchema {
    fn default() -> Self {
        PixelSchema {
            delimiter: None,
            grayscale_rgb: false,
            expected_features: None,
            official_train_rows: None,
            split_seed: 0,
        }
    }
}

/// Load a delimited file of flattened pixel rows with a trailing class
/// label.
pub fn load_class_table(path: impl AsRef<Path>, schema: &PixelSchema) -> Result<ClassTable> {
    let path = path.as_ref();
    let (m, flat, _, width) = parse_delimited(path, schema.delimiter)?;
    let raw_n = width - 1;
    let mut x;
    let n;
    if schema.grayscale_rgb {
        if raw_n % 3 != 0 {
            return Err(LightError::Shape {
                expected: "RGB row with 3k values".into(),
                got: format!("{raw_n}"),
            });
        }
        n = raw_n / 3;
        x = Vec::with_capacity(m * n);
        for i in 0..m {
            let row = &flat[i * width..i * width + raw_n];
            for j in 0..n {
                x.push(0.299 * row[j] + 0.587 * row[n + j] + 0.114 * row[2 * n + j]);
            }
        }
    } else {
        n = raw_n;
        x = Vec::with_capacity(m * n);
        for i in 0..m {
            x.extend_from_slice(&flat[i * width..i * width + raw_n]);
        }
    }
    if let Some(en) = schema.expected_features {
        if n != en {
            return Err(LightError::Shape {
                expected: format!("{en} features"),
                got: format!("{n}"),
            });
        }
    }
    let mut classes = Vec::with_capacity(m);
    for i in 0..m {
        let v = flat[i * width + raw_n];
        if v < 0.0 || v.fract() != 0.0 {
            return Err(LightError::Parse {
                row: i + 1,
                col: width,
                message: format!("class label must be a non-negative integer, got {v}"),
            });
        }
        classes.push(v as u32);
    }
    let (train_idx, test_idx) = match schema.official_train_rows {
        Some(k) if k <= m => ((0..k).collect(), (k..m).collect()),
        Some(k) => {
            return Err(LightError::InvalidParams(format!(
                "official train size {k} exceeds row count {m}"
            )))
        }
        None => split_indices(m, 0.8, schema.split_seed),
    };
    Ok(ClassTable {
        n,
        x,
        classes,
        train_idx,
        test_idx,
        source: path.to_path_buf(),
    })
}

/// Binarize class labels and subsample without replacement: `m_train` rows
/// from the table's train side and `m_test` from its test side. Pixel values
/// above 1.5 anywhere trigger a division of all features by 255.
pub fn binarize_and_subsample(
    table: &ClassTable,
    rule: BinarizeRule,
    m_train: usize,
    m_test: usize,
    seed: u64,
) -> Result<Dataset> {
    if table.train_idx.len() < m_train || table.test_idx.len() < m_test {
        return Err(LightError::InvalidParams(format!(
            "insufficient samples: need {m_train}+{m_test}, have {}+{}",
            table.train_idx.len(),
            table.test_idx.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |pool: &[usize], k: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
        let mut p = pool.to_vec();
        p.shuffle(rng);
        p.truncate(k);
        p.sort_unstable();
        p
    };
    let chosen_train = pick(&table.train_idx, m_train, &mut rng);
    let chosen_test = pick(&table.test_idx, m_test, &mut rng);
    let scale = if table.x.iter().any(|v| *v > 1.5) {
        255.0
    } else {
        1.0
    };
    let mut x = Vec::with_capacity((m_train + m_test) * table.n);
    let mut y = Vec::with_capacity(m_train + m_test);
    for &i in chosen_train.iter().chain(chosen_test.iter()) {
        x.extend(
            table.x[i * table.n..(i + 1) * table.n]
                .iter()
                .map(|v| v / scale),
        );
        y.push(if table.classes[i] >= rule.positive_from_class {
            1.0
        } else {
            -1.0
        });
    }
    let classes_present = y.iter().any(|v| *v > 0.0) as usize + y.iter().any(|v| *v < 0.0) as usize;
    if classes_present != 2 {
        return Err(LightError::LabelCardinality(classes_present));
    }
    let train: Vec<usize> = (0..m_train).collect();
    let test: Vec<usize> = (m_train..m_train + m_test).collect();
    Dataset::from_parts(
        table.n,
        x,
        y,
        train,
        test,
        Provenance::ImageFile(table.source.clone()),
    )
}

const CACHE_MAGIC: &[u8; 16] = b"LIGHTDSETCACHE01";
const CACHE_VERSION: u8 = 1;

/// Write the dataset to the single-file columnar cache format.
pub fn write_cache(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(CACHE_MAGIC);
    out.push(CACHE_VERSION);
    let m = d.len() as u64;
    out.extend_from_slice(&m.to_le_bytes());
    out.extend_from_slice(&(d.n as u64).to_le_bytes());
    for v in &d.x {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &d.y {
        out.push(if *v > 0.0 { 1u8 } else { 255u8 }); // +1 / -1 as i8
    }
    for idx in [&d.train_idx, &d.test_idx] {
        out.extend_from_slice(&(idx.len() as u64).to_le_bytes());
        for &i in idx.iter() {
            out.extend_from_slice(&(i as u64).to_le_bytes());
        }
    }
    match &d.provenance {
        Provenance::SyntheticBlobs(p) => {
            out.push(0);
            out.extend_from_slice(&(p.m as u64).to_le_bytes());
            out.extend_from_slice(&(p.n as u64).to_le_bytes());
            out.extend_from_slice(&p.cluster_std.to_le_bytes());
            out.extend_from_slice(&p.seed.to_le_bytes());
            for c in &p.centers {
                for v in c {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        Provenance::TabularFile(p) | Provenance::ImageFile(p) => {
            out.push(if matches!(d.provenance, Provenance::TabularFile(_)) {
                1
            } else {
                2
            });
            let s = p.to_string_lossy();
            out.extend_from_slice(&(s.len() as u64).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

/// Read a dataset back from the cache format; lossless inverse of
/// [`write_cache`].
pub fn read_cache(path: impl AsRef<Path>) -> Result<Dataset> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let mut at = 0usize;
    let take = |buf: &[u8], at: &mut usize, k: usize| -> Result<Vec<u8>> {
        if *at + k > buf.len() {
            return Err(LightError::Cache("truncated file".into()));
        }
        let s = buf[*at..*at + k].to_vec();
        *at += k;
        Ok(s)
    };
    let take_u64 = |buf: &[u8], at: &mut usize| -> Result<u64> {
        Ok(u64::from_le_bytes(take(buf, at, 8)?.try_into().unwrap()))
    };
    let take_f64 = |buf: &[u8], at: &mut usize| -> Result<f64> {
        Ok(f64::from_le_bytes(take(buf, at, 8)?.try_into().unwrap()))
    };

    if take(&buf, &mut at, 16)? != CACHE_MAGIC {
        return Err(LightError::Cache("bad magic header".into()));
    }
    let version = take(&buf, &mut at, 1)?[0];
    if version != CACHE_VERSION {
        return Err(LightError::Cache(format!("unsupported version {version}")));
    }
    let m = take_u64(&buf, &mut at)? as usize;
    let n = take_u64(&buf, &mut at)? as usize;
    let mut x = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        x.push(take_f64(&buf, &mut at)?);
    }
    let mut y = Vec::with_capacity(m);
    for b in take(&buf, &mut at, m)? {
        y.push(if b == 1 { 1.0 } else { -1.0 });
    }
    let mut idx = [Vec::new(), Vec::new()];
    for part in &mut idx {
        let k = take_u64(&buf, &mut at)? as usize;
        for _ in 0..k {
            part.push(take_u64(&buf, &mut at)? as usize);
        }
    }
    let tag = take(&buf, &mut at, 1)?[0];
    let provenance = match tag {
        0 => {
            let pm = take_u64(&buf, &mut at)? as usize;
            let pn = take_u64(&buf, &mut at)? as usize;
            let std = take_f64(&buf, &mut at)?;
            let seed = take_u64(&buf, &mut at)?;
            let mut centers = [Vec::with_capacity(pn), Vec::with_capacity(pn)];
            for c in &mut centers {
                for _ in 0..pn {
                    c.push(take_f64(&buf, &mut at)?);
                }
            }
            Provenance::SyntheticBlobs(BlobParams {
                m: pm,
                n: pn,
                cluster_std: std,
                centers,
                seed,
            })
        }
        1 | 2 => {
            let k = take_u64(&buf, &mut at)? as usize;
            let s = String::from_utf8(take(&buf, &mut at, k)?)
                .map_err(|e| LightError::Cache(e.to_string()))?;
            if tag == 1 {
                Provenance::TabularFile(PathBuf::from(s))
            } else {
                Provenance::ImageFile(PathBuf::from(s))
            }
        }
        other => return Err(LightError::Cache(format!("unknown provenance tag {other}"))),
    };
    let [train, test] = idx;
    Dataset::from_parts(n, x, y, train, test, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_split_sizes() {
        let d = make_blobs(&BlobParams::standard(1000, 2, 0.25, 7)).unwrap();
        assert_eq!(d.train_indices().len(), 800);
        assert_eq!(d.test_indices().len(), 200);
        assert_eq!(d.len(), 1000);
        // odd m: floor on the train side, remainder to test
        let d = make_blobs(&BlobParams::standard(999, 2, 0.25, 7)).unwrap();
        assert_eq!(d.train_indices().len(), 799);
        assert_eq!(d.test_indices().len(), 200);
    }

    #[test]
    fn blobs_are_deterministic() {
        let p = BlobParams::standard(200, 3, 0.5, 42);
        let a = make_blobs(&p).unwrap();
        let b = make_blobs(&p).unwrap();
        assert_eq!(a, b);
        let c = make_blobs(&BlobParams::standard(200, 3, 0.5, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_blobs_are_midpoint_separable() {
        let d = make_blobs(&BlobParams::standard(100, 2, 1e-6, 3)).unwrap();
        let (a, b) = (&[-0.75, 2.25], &[1.0, 2.0]);
        let w = [b[0] - a[0], b[1] - a[1]];
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let mut correct = 0;
        for i in 0..d.len() {
            let row = d.row(i);
            let score = (row[0] - mid[0]) * w[0] + (row[1] - mid[1]) * w[1];
            if (score > 0.0) == (d.label(i) > 0.0) {
                correct += 1;
            }
        }
        assert_eq!(correct, d.len());
    }

    #[test]
    fn blob_cluster_means_match_centers() {
        let d = make_blobs(&BlobParams::standard(1000, 2, 0.25, 11)).unwrap();
        let bound = 3.0 * 0.25 / (500f64).sqrt();
        let mut sums = [[0.0; 2]; 2];
        let mut counts = [0usize; 2];
        for i in 0..d.len() {
            let c = if d.label(i) < 0.0 { 0 } else { 1 };
            counts[c] += 1;
            sums[c][0] += d.row(i)[0];
            sums[c][1] += d.row(i)[1];
        }
        let centers = [[-0.75, 2.25], [1.0, 2.0]];
        for c in 0..2 {
            for j in 0..2 {
                let mean = sums[c][j] / counts[c] as f64;
                assert!(
                    (mean - centers[c][j]).abs() < bound,
                    "cluster {c} coord {j}: {mean}"
                );
            }
        }
    }

    #[test]
    fn higher_dims_are_zero_centered_noise() {
        let d = make_blobs(&BlobParams::standard(2000, 5, 0.3, 19)).unwrap();
        for j in 2..5 {
            let mean: f64 = (0..d.len()).map(|i| d.row(i)[j]).sum::<f64>() / d.len() as f64;
            assert!(mean.abs() < 3.0 * 0.3 / (2000f64).sqrt());
        }
    }

    fn write_tmp(name: &str, contents: &str) -> PathBuf {
        let path =
            std::env::temp_dir().join(format!("light-core-test-{name}-{}", std::process::id()));
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn load_tabular_basic() {
        let mut text = String::from("f1,f2,label\n");
        for i in 0..10 {
            text.push_str(&format!(
                "{}.5,{},{}\n",
                i,
                i * 2,
                if i % 2 == 0 { 0 } else { 1 }
            ));
        }
        let path = write_tmp("tab", &text);
        let d = load_tabular(&path, &TabularSchema::default()).unwrap();
        assert_eq!(d.len(), 10);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.label(0), -1.0);
        assert_eq!(d.label(1), 1.0);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn load_tabular_shape_validation() {
        // shapes of the two smallest experimental sets, emulated with noise
        for (name, m, n) in [("pima", 768usize, 8usize), ("heart", 270, 13)] {
            let mut text = String::new();
            for i in 0..m {
                let feats: Vec<String> = (0..n).map(|j| format!("{}", (i * 7 + j) % 13)).collect();
                text.push_str(&format!("{},{}\n", feats.join(","), i % 2));
            }
            let path = write_tmp(name, &text);
            let schema = TabularSchema {
                expected_shape: Some((m, n)),
                ..Default::default()
            };
            let d = load_tabular(&path, &schema).unwrap();
            assert_eq!((d.len(), d.dim()), (m, n));
            let bad = TabularSchema {
                expected_shape: Some((m, n + 1)),
                ..Default::default()
            };
            assert!(load_tabular(&path, &bad).is_err());
            std::fs::remove_file(path).ok();
        }
    }

    #[test]
    fn three_classes_without_rule_is_an_error() {
        let text = "1,2,0\n3,4,1\n5,6,2\n";
        let path = write_tmp("threeclass", text);
        match load_tabular(&path, &TabularSchema::default()) {
            Err(LightError::LabelCardinality(3)) => {}
            other => panic!("expected LabelCardinality(3), got {other:?}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn parse_error_carries_coordinates() {
        let text = "1,2,0\n3,oops,1\n";
        let path = write_tmp("badnum", text);
        match load_tabular(&path, &TabularSchema::default()) {
            Err(LightError::Parse { row: 2, col: 2, .. }) => {}
            other => panic!("expected parse error at (2,2), got {other:?}"),
        }
        std::fs::remove_file(path).ok();
    }

    fn fake_mnist(m: usize) -> String {
        let mut text = String::new();
        for i in 0..m {
            let pixels: Vec<String> = (0..784).map(|j| format!("{}", (i + j) % 256)).collect();
            text.push_str(&format!("{},{}\n", pixels.join(","), i % 10));
        }
        text
    }

    #[test]
    fn image_pipeline_shapes_and_determinism() {
        let path = write_tmp("mnistlike", &fake_mnist(60));
        let schema = PixelSchema {
            expected_features: Some(784),
            official_train_rows: Some(50),
            ..Default::default()
        };
        let table = load_class_table(&path, &schema).unwrap();
        assert_eq!(table.n, 784);
        let d1 = binarize_and_subsample(&table, BinarizeRule::default(), 20, 5, 9).unwrap();
        let d2 = binarize_and_subsample(&table, BinarizeRule::default(), 20, 5, 9).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(d1.len(), 25);
        assert_eq!(d1.dim(), 784);
        // pixels rescaled into [0,1]
        assert!((0..d1.len()).all(|i| d1.row(i).iter().all(|v| (0.0..=1.0).contains(v))));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn rgb_rows_collapse_to_grayscale() {
        let mut text = String::new();
        for i in 0..12 {
            let vals: Vec<String> = (0..12).map(|j| format!("{}", (i * j) % 256)).collect();
            text.push_str(&format!("{},{}\n", vals.join(","), i % 10));
        }
        let path = write_tmp("cifarlike", &text);
        let schema = PixelSchema {
            grayscale_rgb: true,
            expected_features: Some(4),
            ..Default::default()
        };
        let table = load_class_table(&path, &schema).unwrap();
        assert_eq!(table.n, 4);
        // luminance of the first row: channels are [0..4), [4..8), [8..12)
        assert_eq!(table.x[0], 0.0);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn cache_round_trip_is_lossless() {
        let d = make_blobs(&BlobParams::standard(64, 3, 0.4, 5)).unwrap();
        let path = std::env::temp_dir().join(format!("light-core-cache-{}", std::process::id()));
        write_cache(&d, &path).unwrap();
        let back = read_cache(&path).unwrap();
        assert_eq!(d, back);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn cache_round_trips_ingested_datasets_too() {
        let mut text = String::new();
        for i in 0..20 {
            text.push_str(&format!("{},{},{}\n", i as f64 * 0.5, 20 - i, i % 2));
        }
        let src = write_tmp("cache-tab", &text);
        let d = load_tabular(&src, &TabularSchema::default()).unwrap();
        let path =
            std::env::temp_dir().join(format!("light-core-cache-tab-{}", std::process::id()));
        write_cache(&d, &path).unwrap();
        assert_eq!(read_cache(&path).unwrap(), d);
        std::fs::remove_file(path).ok();
        std::fs::remove_file(src).ok();
    }

    #[test]
    fn cache_rejects_garbage() {
        let path = std::env::temp_dir().join(format!("light-core-badcache-{}", std::process::id()));
        std::fs::write(&path, b"not a cache file").unwrap();
        assert!(matches!(read_cache(&path), Err(LightError::Cache(_))));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn split_determinism_and_sizes() {
        let (tr1, te1) = split_indices(1000, 0.8, 77);
        let (tr2, te2) = split_indices(1000, 0.8, 77);
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        assert_eq!(tr1.len(), 800);
        assert_eq!(te1.len(), 200);
        let (tr3, _) = split_indices(1000, 0.8, 78);
        assert_ne!(tr1, tr3);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn split_is_an_exact_partition(m in 1usize..400, frac in 0.0f64..1.0, seed in any::<u64>()) {
                let (train, test) = split_indices(m, frac, seed);
                prop_assert_eq!(train.len(), (frac * m as f64).floor() as usize);
                prop_assert_eq!(train.len() + test.len(), m);
                let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..m).collect::<Vec<_>>());
            }

            #[test]
            fn cache_round_trips_random_blobs(
                m in 2usize..40,
                n in 2usize..6,
                std in 0.01f64..2.0,
                seed in any::<u64>(),
            ) {
                let d = make_blobs(&BlobParams::standard(m, n, std, seed)).unwrap();
                let path = std::env::temp_dir().join(format!(
                    "light-prop-cache-{}-{seed}-{m}-{n}",
                    std::process::id()
                ));
                write_cache(&d, &path).unwrap();
                let back = read_cache(&path).unwrap();
                std::fs::remove_file(&path).ok();
                prop_assert_eq!(back, d);
            }
        }
    }
}
