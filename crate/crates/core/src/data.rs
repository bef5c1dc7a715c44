//! Datasets, synthetic generators, patch extraction and column normalization.
//!
//! Samples are stored one per column (`d × N`). Code matrices produced from
//! them in [`crate::coding`] are one sample per row.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature matrix with one sample per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::arg(format!(
                "data matrix must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("data matrix contains non-finite values"));
        }
        Ok(DataMatrix(values))
    }

    /// Feature dimension `d`.
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.0.ncols() == 0
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.0.as_slice()[i * d..(i + 1) * d]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// New matrix holding the given samples, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<DataMatrix> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::arg(format!(
                "sample index {bad} out of range for {} samples",
                self.len()
            )));
        }
        DataMatrix::new(self.0.select_columns(indices))
    }
}

/// Contiguous class ids plus the ids they were remapped from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub ids: Vec<usize>,
    pub num_classes: usize,
    /// `original[l]` is the id class `l` had in the source file.
    pub original: Vec<i64>,
}

impl Labels {
    /// Remaps arbitrary integer ids onto `0..L` preserving numeric order.
    pub fn from_raw(raw: &[i64]) -> Labels {
        let original: Vec<i64> = raw.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let ids = raw
            .iter()
            .map(|v| original.binary_search(v).expect("id present"))
            .collect();
        Labels {
            ids,
            num_classes: original.len(),
            original,
        }
    }

    /// Labels that are already contiguous ids in `0..num_classes`.
    pub fn contiguous(ids: Vec<usize>, num_classes: usize) -> Result<Labels> {
        if let Some(&bad) = ids.iter().find(|&&l| l >= num_classes) {
            return Err(Error::arg(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        Ok(Labels {
            ids,
            num_classes,
            original: (0..num_classes as i64).collect(),
        })
    }

    pub fn select(&self, indices: &[usize]) -> Labels {
        Labels {
            ids: indices.iter().map(|&i| self.ids[i]).collect(),
            num_classes: self.num_classes,
            original: self.original.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    pub labels: Option<Labels>,
}

impl LabeledDataset {
    pub fn new(data: DataMatrix, labels: Option<Labels>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.ids.len() != data.len() {
                return Err(Error::arg(format!(
                    "{} labels for {} samples",
                    l.ids.len(),
                    data.len()
                )));
            }
        }
        Ok(LabeledDataset { data, labels })
    }

    pub fn select(&self, indices: &[usize]) -> Result<LabeledDataset> {
        Ok(LabeledDataset {
            data: self.data.select(indices)?,
            labels: self.labels.as_ref().map(|l| l.select(indices)),
        })
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn check_manifold_dims(d: usize, k: usize, n: usize, noise: f64) -> Result<()> {
    if k == 0 || k > d.min(n) {
        return Err(Error::arg(format!(
            "manifold rank k={k} must satisfy 1 <= k <= min(d={d}, N={n})"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::arg(format!("noise sigma must be >= 0, got {noise}")));
    }
    Ok(())
}

/// Latent factors of a synthetic manifold sample: `X = B·G + σ·Z`.
struct Manifold {
    x: DMatrix<f64>,
    latent: DMatrix<f64>,
}

fn manifold(d: usize, k: usize, n: usize, noise: f64, rng: &mut ChaCha8Rng) -> Manifold {
    let basis = gaussian(d, k, rng).qr().q();
    let latent = gaussian(k, n, rng);
    let mut x = &basis * &latent;
    if noise > 0.0 {
        x += gaussian(d, n, rng) * noise;
    }
    Manifold { x, latent }
}

/// Samples lying near a random `k`-dimensional subspace of `R^d`.
///
/// The basis has orthonormal columns; latent coordinates and noise are
/// standard normal. Deterministic in `seed`.
pub fn synth_manifold(d: usize, k: usize, n: usize, noise: f64, seed: u64) -> Result<DataMatrix> {
    check_manifold_dims(d, k, n, noise)?;
    DataMatrix::new(manifold(d, k, n, noise, &mut rng(seed)).x)
}

/// Parameters for [`synth_labeled`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub noise: f64,
    pub classes: usize,
    /// Number of latent prototypes owned by each class.
    pub prototypes_per_class: usize,
}

/// Labeled variant of [`synth_manifold`].
///
/// Each class owns several random unit prototypes in the latent space; a
/// sample takes the class of the prototype with the largest cosine to its
/// latent coordinates. The resulting decision regions are unions of cones,
/// which a linear model on the raw features cannot separate but local codes
/// resolve progressively as the dictionary grows.
pub fn synth_labeled(spec: &SynthSpec, seed: u64) -> Result<LabeledDataset> {
    check_manifold_dims(spec.d, spec.k, spec.n, spec.noise)?;
    if spec.classes < 2 || spec.prototypes_per_class == 0 {
        return Err(Error::arg(
            "labeled synthetic data needs >= 2 classes and >= 1 prototype per class",
        ));
    }
    let mut rng = rng(seed);
    let m = manifold(spec.d, spec.k, spec.n, spec.noise, &mut rng);
    let count = spec.classes * spec.prototypes_per_class;
    let mut protos = gaussian(spec.k, count, &mut rng);
    for mut col in protos.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let ids = (0..spec.n)
        .map(|i| {
            let g = m.latent.column(i);
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for p in 0..count {
                let score = protos.column(p).dot(&g);
                if score > best_score {
                    best_score = score;
                    best = p;
                }
            }
            best % spec.classes
        })
        .collect();
    LabeledDataset::new(
        DataMatrix::new(m.x)?,
        Some(Labels::contiguous(ids, spec.classes)?),
    )
}

/// Seeded shuffle split into (train, test) sample indices.
pub fn train_test_split(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::arg(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = ((n as f64) * train_fraction).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::arg(format!(
            "split of {n} samples at {train_fraction} leaves an empty side"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(seed));
    let test = order.split_off(n_train);
    Ok((order, test))
}

/// Image stored row-major with channels fastest: `(row, col, channel)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::arg("image dimensions must be positive"));
        }
        if pixels.len() != height * width * channels {
            return Err(Error::arg(format!(
                "{} pixel values for a {height}x{width}x{channels} image",
                pixels.len()
            )));
        }
        Ok(Image {
            height,
            width,
            channels,
            pixels,
        })
    }

    /// Single-channel image from a row-major matrix.
    pub fn from_gray(m: &DMatrix<f64>) -> Result<Self> {
        let pixels = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)])
            .collect();
        Image::new(m.nrows(), m.ncols(), 1, pixels)
    }

    pub fn at(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.pixels[(row * self.width + col) * self.channels + channel]
    }
}

/// Patches of one or more equally sized images.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    /// One flattened patch per column.
    pub patches: DataMatrix,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub images: usize,
}

impl PatchGrid {
    pub fn patches_per_image(&self) -> usize {
        self.grid_rows * self.grid_cols
    }
}

fn grid_extent(len: usize, patch: usize, stride: usize) -> usize {
    (len - patch) / stride + 1
}

/// Dense patch extraction at offsets `0, stride, 2·stride, …`.
///
/// Patches are ordered row-major over the grid; each patch is flattened
/// row-major with channels fastest.
pub fn extract_patches(image: &Image, patch: usize, stride: usize) -> Result<PatchGrid> {
    extract_patches_batch(std::slice::from_ref(image), patch, stride)
}

/// [`extract_patches`] over several images of identical shape; images are
/// consecutive in the output.
pub fn extract_patches_batch(images: &[Image], patch: usize, stride: usize) -> Result<PatchGrid> {
    let first = images
        .first()
        .ok_or_else(|| Error::arg("no images to extract patches from"))?;
    if stride == 0 || patch == 0 {
        return Err(Error::arg("patch size and stride must be >= 1"));
    }
    if patch > first.height.min(first.width) {
        return Err(Error::arg(format!(
            "patch {patch} larger than {}x{} image",
            first.height, first.width
        )));
    }
    let (h, w, ch) = (first.height, first.width, first.channels);
    if images
        .iter()
        .any(|im| im.height != h || im.width != w || im.channels != ch)
    {
        return Err(Error::arg("images in a batch must share one shape"));
    }
    let grid_rows = grid_extent(h, patch, stride);
    let grid_cols = grid_extent(w, patch, stride);
    let dim = patch * patch * ch;
    let mut values = Vec::with_capacity(dim * grid_rows * grid_cols * images.len());
    for im in images {
        for gr in 0..grid_rows {
            for gc in 0..grid_cols {
                let (r0, c0) = (gr * stride, gc * stride);
                for r in r0..r0 + patch {
                    let start = (r * w + c0) * ch;
                    values.extend_from_slice(&im.pixels[start..start + patch * ch]);
                }
            }
        }
    }
    let n = values.len() / dim;
    Ok(PatchGrid {
        patches: DataMatrix::new(DMatrix::from_vec(dim, n, values))?,
        grid_rows,
        grid_cols,
        images: images.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    MeanCenter,
    UnitL2,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub data: DataMatrix,
    /// Columns that were exactly zero when unit scaling was attempted.
    pub zero_columns: usize,
}

pub fn normalize_columns(x: &DataMatrix, mode: Normalization) -> Normalized {
    let mut m = x.as_matrix().clone();
    let mut zero_columns = 0;
    for mut col in m.column_iter_mut() {
        if matches!(mode, Normalization::MeanCenter | Normalization::Both) {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        if matches!(mode, Normalization::UnitL2 | Normalization::Both) {
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
            } else {
                zero_columns += 1;
            }
        }
    }
    Normalized {
        data: DataMatrix(m),
        zero_columns,
    }
}

/// Parses comma-separated samples, one per row, optional trailing integer label.
pub fn parse_csv(reader: impl Read, has_labels: bool, header: bool) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            Error::format(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let features = if has_labels { record.len().saturating_sub(1) } else { record.len() };
        if features == 0 {
            return Err(Error::format(line, "row has no feature fields"));
        }
        match width {
            None => width = Some(features),
            Some(w) if w != features => {
                return Err(Error::format(
                    line,
                    format!("ragged row: {features} features, expected {w}"),
                ))
            }
            _ => {}
        }
        for field in record.iter().take(features) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(line, format!("non-numeric field {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::format(line, format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        if has_labels {
            let field = &record[features];
            let l: i64 = field
                .parse()
                .map_err(|_| Error::format(line, format!("non-integer label {field:?}")))?;
            raw_labels.push(l);
        }
        rows += 1;
    }
    let d = width.ok_or_else(|| Error::format(None, "empty file"))?;
    let data = DataMatrix::new(DMatrix::from_vec(d, rows, values))?;
    let labels = has_labels.then(|| Labels::from_raw(&raw_labels));
    LabeledDataset::new(data, labels)
}

pub fn load_csv(path: impl AsRef<Path>, has_labels: bool, header: bool) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(std::io::BufReader::new(file), has_labels, header)
}

/// Writes samples as rows with 17 significant digits, labels last using
/// their original ids.
pub fn write_csv(ds: &LabeledDataset, mut out: impl Write) -> std::io::Result<()> {
    for i in 0..ds.data.len() {
        let mut line = ds
            .data
            .sample(i)
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",");
        if let Some(l) = &ds.labels {
            line.push(',');
            line.push_str(&l.original[l.ids[i]].to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_csv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(ds, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(feature = "cifar")]
pub mod cifar {
    //! CIFAR-10 binary batches: 3073-byte records, one label byte followed
    //! by the R, G and B planes of a 32×32 image.

    use super::*;

    pub const RECORD_LEN: usize = 3073;
    pub const SIDE: usize = 32;
    pub const PIXELS: usize = 3 * SIDE * SIDE;

    /// Parses records into columns in file byte order (channel-major),
    /// pixels scaled to `[0, 1]`.
    pub fn parse_cifar10(bytes: &[u8]) -> Result<LabeledDataset> {
        if bytes.is_empty() {
            return Err(Error::format(None, "empty CIFAR-10 file"));
        }
        if !bytes.len().is_multiple_of(RECORD_LEN) {
            return Err(Error::format(
                None,
                format!(
                    "truncated record: {} bytes is not a multiple of {RECORD_LEN}",
                    bytes.len()
                ),
            ));
        }
        let n = bytes.len() / RECORD_LEN;
        let mut values = Vec::with_capacity(n * PIXELS);
        let mut ids = Vec::with_capacity(n);
        for rec in bytes.chunks_exact(RECORD_LEN) {
            if rec[0] > 9 {
                return Err(Error::format(None, format!("label byte {} > 9", rec[0])));
            }
            ids.push(rec[0] as usize);
            values.extend(rec[1..].iter().map(|&b| b as f64 / 255.0));
        }
        LabeledDataset::new(
            DataMatrix::new(DMatrix::from_vec(PIXELS, n, values))?,
            Some(Labels::contiguous(ids, 10)?),
        )
    }

    pub fn load_cifar10_binary(path: impl AsRef<Path>) -> Result<LabeledDataset> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        parse_cifar10(&bytes)
    }

    /// Reorders one channel-major CIFAR column into an [`Image`] for patch extraction.
    pub fn to_image(column: &[f64]) -> Result<Image> {
        if column.len() != PIXELS {
            return Err(Error::arg(format!("expected {PIXELS} values, got {}", column.len())));
        }
        let plane = SIDE * SIDE;
        let pixels = (0..plane)
            .flat_map(|p| (0..3).map(move |ch| column[ch * plane + p]))
            .collect();
        Image::new(SIDE, SIDE, 3, pixels)
    }
}

/// Stripe textures for pooling experiments: class 0 is roughly horizontal,
/// class 1 roughly vertical, each with random frequency, phase and additive
/// Gaussian noise. Classes alternate in the output.
pub fn synth_textures(
    images: usize,
    size: usize,
    noise: f64,
    seed: u64,
) -> Result<(Vec<Image>, Labels)> {
    if images < 2 || size == 0 {
        return Err(Error::arg("need >= 2 images of positive size"));
    }
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(images);
    let mut ids = Vec::with_capacity(images);
    for i in 0..images {
        let class = i % 2;
        let jitter = rng.random_range(-0.45..0.45);
        let theta = jitter + if class == 0 { 0.0 } else { std::f64::consts::FRAC_PI_2 };
        let freq = rng.random_range(0.5..1.6);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let (s, c) = theta.sin_cos();
        let mut pixels = Vec::with_capacity(size * size);
        for r in 0..size {
            for col in 0..size {
                let t = freq * (r as f64 * c + col as f64 * s) + phase;
                let z: f64 = rng.sample(StandardNormal);
                pixels.push(t.sin() + noise * z);
            }
        }
        out.push(Image::new(size, size, 1, pixels)?);
        ids.push(class);
    }
    Ok((out, Labels::contiguous(ids, 2)?))
}
