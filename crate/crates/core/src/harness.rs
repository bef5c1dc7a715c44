//! Experiment orchestration: accuracy-versus-codebook-size sweeps with
//! saturation-model extrapolation, pooling-aware dictionary comparisons and
//! Nyström error/bound evaluation, plus report serialization.
//!
//! Grid cells run in parallel across seeds; results are always assembled in
//! `(c, seed)` order so reports are independent of scheduling.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{eval_eq1_bound, fit_two_point, ModelForm, SaturationModel};
use crate::classifier::{accuracy, predict, train_ridge};
use crate::coding::{encode, full_code, gram, Dictionary, DEFAULT_ALPHA};
use crate::data::{
    extract_patches_batch, load_csv, normalize_columns, synth_labeled, synth_textures,
    train_test_split, DataMatrix, LabeledDataset, Normalization, SynthSpec,
};
use crate::dictionary::{kmeans, sample_indices};
use crate::error::{Error, Result};
use crate::nystrom::{approximation_errors_with_kernel, NystromFactors, DEFAULT_PINV_TOL};
use crate::pooling::{encode_pool, pdl, PdlConfig, PoolConfig, PoolOp};
use crate::spectra::{SpectralReport, DEFAULT_ENERGY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryKind {
    /// Training samples drawn uniformly without replacement.
    Uniform,
    KMeans,
}

/// Every tunable parameter, as one flat JSON object. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// CSV dataset; synthetic data is generated when absent.
    pub data_path: Option<PathBuf>,
    pub has_labels: bool,
    pub header: bool,

    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub noise: f64,
    pub classes: usize,
    pub prototypes_per_class: usize,

    pub normalization: Normalization,
    pub alpha: f64,
    /// Ridge coefficient; `1e-3 · N_train` when absent.
    pub lambda: Option<f64>,
    pub energy: f64,
    /// Relative singular-value cutoff for the Nyström pseudo-inverse.
    pub pinv_tol: f64,
    pub c_grid: Vec<usize>,
    /// Codebook sizes used for the two-point fits; the two smallest grid sizes when absent.
    pub fit_c: Option<[usize; 2]>,
    pub seed: u64,
    pub num_seeds: usize,
    pub dictionary: DictionaryKind,
    pub kmeans_iters: usize,
    /// Largest training set for which the full code and kernel are formed.
    pub nystrom_limit: usize,
    pub train_fraction: f64,

    pub images: usize,
    pub image_size: usize,
    pub texture_noise: f64,
    pub patch_normalization: Normalization,
    pub patch: usize,
    pub stride: usize,
    pub pool_rows: usize,
    pub pool_cols: usize,
    pub pool_op: PoolOp,
    pub final_c_grid: Vec<usize>,
    pub overshoots: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data_path: None,
            has_labels: true,
            header: false,
            d: 32,
            k: 4,
            n: 800,
            noise: 0.05,
            classes: 4,
            prototypes_per_class: 6,
            normalization: Normalization::UnitL2,
            alpha: DEFAULT_ALPHA,
            lambda: None,
            energy: DEFAULT_ENERGY,
            pinv_tol: DEFAULT_PINV_TOL,
            c_grid: vec![8, 16, 32, 64, 128],
            fit_c: None,
            seed: 0,
            num_seeds: 5,
            dictionary: DictionaryKind::Uniform,
            kmeans_iters: 50,
            nystrom_limit: 2000,
            train_fraction: 0.8,
            images: 2000,
            image_size: 8,
            texture_noise: 1.5,
            patch_normalization: Normalization::Both,
            patch: 4,
            stride: 4,
            pool_rows: 2,
            pool_cols: 2,
            pool_op: PoolOp::Average,
            final_c_grid: vec![16],
            overshoots: vec![1, 2],
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.num_seeds as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }

    pub fn synth_spec(&self) -> SynthSpec {
        SynthSpec {
            d: self.d,
            k: self.k,
            n: self.n,
            noise: self.noise,
            classes: self.classes,
            prototypes_per_class: self.prototypes_per_class,
        }
    }

    pub fn pool_config(&self) -> PoolConfig {
        PoolConfig {
            region_rows: self.pool_rows,
            region_cols: self.pool_cols,
            op: self.pool_op,
        }
    }

    fn validate_common(&self) -> Result<()> {
        if self.num_seeds == 0 {
            return Err(Error::arg("num_seeds must be >= 1"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::arg("alpha must be finite"));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return Err(Error::arg(format!("lambda must be > 0, got {l}")));
            }
        }
        Ok(())
    }
}

/// Sorted, deduplicated codebook grid with at least three sizes.
pub fn validate_grid(grid: &[usize]) -> Result<Vec<usize>> {
    let mut g = grid.to_vec();
    g.sort_unstable();
    g.dedup();
    if g.first() == Some(&0) {
        return Err(Error::arg("codebook sizes must be >= 1"));
    }
    if g.len() < 3 {
        return Err(Error::arg(format!(
            "codebook grid needs at least 3 distinct sizes to fit two and predict, got {g:?}"
        )));
    }
    Ok(g)
}

fn cell_seed(seed: u64, c: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(c as u64)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn mean_opt(v: &[Option<f64>]) -> Option<f64> {
    let vals: Option<Vec<f64>> = v.iter().copied().collect();
    vals.filter(|v| !v.is_empty()).map(|v| mean_std(&v).0)
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub c: usize,
    pub train_acc: f64,
    pub train_acc_std: f64,
    pub test_acc: f64,
    pub test_acc_std: f64,
    pub code_err: Option<f64>,
    pub kernel_err: Option<f64>,
    pub bound_eq1: Option<f64>,
    pub seeds_used: usize,
    pub pred_train: f64,
    pub pred_test: f64,
    pub pred_kernel_err: Option<f64>,
    /// True for the two sizes the models were fitted on.
    pub fit_point: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModels {
    pub train_accuracy: SaturationModel,
    pub test_accuracy: SaturationModel,
    pub kernel_error: Option<SaturationModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSpectrum {
    pub seed: u64,
    pub k: usize,
    pub rank_k_residual: f64,
    pub scaled_diag_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub lambda: f64,
    pub train_samples: usize,
    pub test_samples: usize,
    pub curve: Vec<CurvePoint>,
    pub models: FittedModels,
    pub spectra: Vec<SeedSpectrum>,
    pub warnings: Vec<String>,
    pub started_unix: f64,
    pub elapsed_secs: f64,
}

struct Split {
    train: DataMatrix,
    train_labels: Vec<usize>,
    test: DataMatrix,
    test_labels: Vec<usize>,
    classes: usize,
}

fn load_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<LabeledDataset> {
    match &cfg.data_path {
        Some(path) => load_csv(path, cfg.has_labels, cfg.header),
        None => synth_labeled(&cfg.synth_spec(), seed),
    }
}

fn prepare(ds: &LabeledDataset, cfg: &ExperimentConfig, seed: u64) -> Result<Split> {
    let labels = ds
        .labels
        .as_ref()
        .ok_or_else(|| Error::arg("accuracy curves need a labeled dataset"))?;
    let data = normalize_columns(&ds.data, cfg.normalization).data;
    let (train_idx, test_idx) = train_test_split(data.len(), cfg.train_fraction, seed)?;
    Ok(Split {
        train: data.select(&train_idx)?,
        train_labels: train_idx.iter().map(|&i| labels.ids[i]).collect(),
        test: data.select(&test_idx)?,
        test_labels: test_idx.iter().map(|&i| labels.ids[i]).collect(),
        classes: labels.num_classes,
    })
}

struct Cell {
    train_acc: f64,
    test_acc: f64,
    code_err: Option<f64>,
    kernel_err: Option<f64>,
    bound: Option<f64>,
}

struct SeedRun {
    cells: Vec<Option<Cell>>,
    spectrum: Option<SeedSpectrum>,
    train_samples: usize,
    test_samples: usize,
    lambda: f64,
}

fn run_seed(cfg: &ExperimentConfig, grid: &[usize], seed: u64) -> Result<SeedRun> {
    let ds = load_dataset(cfg, seed)?;
    let split = prepare(&ds, cfg, seed)?;
    let n_train = split.train.len();
    let lambda = cfg.lambda.unwrap_or(1e-3 * n_train as f64);

    let diagnostics = if n_train <= cfg.nystrom_limit {
        let c_full = full_code(&split.train, cfg.alpha).values;
        let k_full = gram(&c_full);
        let report = SpectralReport::compute(&c_full, cfg.energy)?;
        Some((c_full, k_full, report))
    } else {
        None
    };

    let mut cells = Vec::with_capacity(grid.len());
    for &c in grid {
        if c > n_train {
            cells.push(None);
            continue;
        }
        let cs = cell_seed(seed, c);
        let (dict, indices) = match cfg.dictionary {
            DictionaryKind::Uniform => {
                let idx = sample_indices(n_train, c, cs)?;
                (Dictionary::sampled(&split.train, &idx)?, Some(idx))
            }
            DictionaryKind::KMeans => (kmeans(&split.train, c, cfg.kmeans_iters, cs)?.dictionary(), None),
        };
        let train_codes = encode(&split.train, &dict, cfg.alpha)?;
        let test_codes = encode(&split.test, &dict, cfg.alpha)?;
        let model = train_ridge(&train_codes.values, &split.train_labels, split.classes, lambda)?;
        let train_acc = accuracy(&predict(&model, &train_codes.values)?, &split.train_labels)?;
        let test_acc = accuracy(&predict(&model, &test_codes.values)?, &split.test_labels)?;

        let (mut code_err, mut kernel_err, mut bound) = (None, None, None);
        if let Some((c_full, k_full, report)) = &diagnostics {
            bound = Some(eval_eq1_bound(report, c));
            if let Some(idx) = &indices {
                let f = NystromFactors::decompose_with_tol(c_full, idx, cfg.pinv_tol)?;
                let errs = approximation_errors_with_kernel(c_full, k_full, &f);
                code_err = Some(errs.code_err);
                kernel_err = Some(errs.kernel_err);
            }
        }
        cells.push(Some(Cell {
            train_acc,
            test_acc,
            code_err,
            kernel_err,
            bound,
        }));
    }
    Ok(SeedRun {
        cells,
        spectrum: diagnostics.map(|(_, _, r)| SeedSpectrum {
            seed,
            k: r.k,
            rank_k_residual: r.rank_k_residual,
            scaled_diag_max: r.scaled_diag_max,
        }),
        train_samples: n_train,
        test_samples: split.test.len(),
        lambda,
    })
}

/// Accuracy (and, at small scale, Nyström error) versus codebook size, with
/// saturation models fitted on two sizes and extrapolated to the rest.
pub fn run_curve(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started_unix = unix_now();
    let clock = Instant::now();
    cfg.validate_common()?;
    let grid = validate_grid(&cfg.c_grid)?;
    let seeds = cfg.seeds();

    let runs: Vec<SeedRun> = seeds
        .par_iter()
        .map(|&s| run_seed(cfg, &grid, s))
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    let mut curve = Vec::new();
    for (gi, &c) in grid.iter().enumerate() {
        let cells: Vec<&Cell> = runs.iter().filter_map(|r| r.cells[gi].as_ref()).collect();
        if cells.len() < runs.len() {
            warnings.push(format!(
                "c={c} exceeds the training set for {} of {} seeds; skipped there",
                runs.len() - cells.len(),
                runs.len()
            ));
        }
        if cells.is_empty() {
            continue;
        }
        let (train_acc, train_acc_std) = mean_std(&cells.iter().map(|x| x.train_acc).collect::<Vec<_>>());
        let (test_acc, test_acc_std) = mean_std(&cells.iter().map(|x| x.test_acc).collect::<Vec<_>>());
        curve.push(CurvePoint {
            c,
            train_acc,
            train_acc_std,
            test_acc,
            test_acc_std,
            code_err: mean_opt(&cells.iter().map(|x| x.code_err).collect::<Vec<_>>()),
            kernel_err: mean_opt(&cells.iter().map(|x| x.kernel_err).collect::<Vec<_>>()),
            bound_eq1: mean_opt(&cells.iter().map(|x| x.bound).collect::<Vec<_>>()),
            seeds_used: cells.len(),
            pred_train: f64::NAN,
            pred_test: f64::NAN,
            pred_kernel_err: None,
            fit_point: false,
        });
    }

    let fit_sizes = match cfg.fit_c {
        Some(pair) => pair,
        None if curve.len() >= 2 => [curve[0].c, curve[1].c],
        None => return Err(Error::arg("fewer than two codebook sizes fit the training set")),
    };
    let point = |c: usize| {
        curve
            .iter()
            .find(|p| p.c == c)
            .ok_or_else(|| Error::arg(format!("fit size c={c} has no curve point")))
    };
    let (p1, p2) = (point(fit_sizes[0])?, point(fit_sizes[1])?);
    let fit = |f: fn(&CurvePoint) -> Option<f64>, form| -> Result<Option<SaturationModel>> {
        match (f(p1), f(p2)) {
            (Some(a), Some(b)) => fit_two_point((p1.c as f64, a), (p2.c as f64, b), form).map(Some),
            _ => Ok(None),
        }
    };
    let train_model = fit(|p| Some(p.train_acc), ModelForm::Accuracy)?.expect("accuracies present");
    let test_model = fit(|p| Some(p.test_acc), ModelForm::Accuracy)?.expect("accuracies present");
    let kernel_model = fit(|p| p.kernel_err, ModelForm::Error)?;
    for m in [&train_model, &test_model] {
        if !m.saturates_from_below() {
            warnings.push(format!(
                "accuracy model fitted on c={:?} decreases with c (B={})",
                fit_sizes, m.slope
            ));
        }
    }
    for p in &mut curve {
        p.pred_train = train_model.predict(p.c as f64);
        p.pred_test = test_model.predict(p.c as f64);
        p.pred_kernel_err = kernel_model.as_ref().map(|m| m.predict(p.c as f64));
        p.fit_point = fit_sizes.contains(&p.c);
    }

    let first = &runs[0];
    Ok(ExperimentReport {
        config: cfg.clone(),
        seeds,
        lambda: first.lambda,
        train_samples: first.train_samples,
        test_samples: first.test_samples,
        curve,
        models: FittedModels {
            train_accuracy: train_model,
            test_accuracy: test_model,
            kernel_error: kernel_model,
        },
        spectra: runs.iter().filter_map(|r| r.spectrum.clone()).collect(),
        warnings,
        started_unix,
        elapsed_secs: clock.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdlRow {
    pub final_c: usize,
    pub overshoot: usize,
    pub train_acc: f64,
    pub test_acc: f64,
    pub test_acc_std: f64,
    /// Mean test accuracy minus that of the overshoot-1 baseline.
    pub delta_test: f64,
    pub seeds_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdlReport {
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub rows: Vec<PdlRow>,
    pub warnings: Vec<String>,
    pub started_unix: f64,
    pub elapsed_secs: f64,
}

fn pdl_seed(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<(f64, f64)>> {
    let (images, labels) = synth_textures(cfg.images, cfg.image_size, cfg.texture_noise, seed)?;
    let (train_idx, test_idx) = train_test_split(images.len(), cfg.train_fraction, seed)?;
    let patches_of = |idx: &[usize]| -> Result<_> {
        let subset: Vec<_> = idx.iter().map(|&i| images[i].clone()).collect();
        let mut g = extract_patches_batch(&subset, cfg.patch, cfg.stride)?;
        g.patches = normalize_columns(&g.patches, cfg.patch_normalization).data;
        Ok(g)
    };
    let train = patches_of(&train_idx)?;
    let test = patches_of(&test_idx)?;
    let train_labels: Vec<usize> = train_idx.iter().map(|&i| labels.ids[i]).collect();
    let test_labels: Vec<usize> = test_idx.iter().map(|&i| labels.ids[i]).collect();
    let lambda = cfg.lambda.unwrap_or(1e-3 * train_idx.len() as f64);
    let pool = cfg.pool_config();

    let mut out = Vec::new();
    for &final_c in &cfg.final_c_grid {
        for &overshoot in &cfg.overshoots {
            let result = pdl(
                &train,
                &PdlConfig {
                    final_c,
                    overshoot,
                    alpha: cfg.alpha,
                    pool,
                    kmeans_iters: cfg.kmeans_iters,
                    seed,
                },
            )?;
            let f_train = encode_pool(&train, &result.dictionary, cfg.alpha, &pool)?;
            let f_test = encode_pool(&test, &result.dictionary, cfg.alpha, &pool)?;
            let model = train_ridge(&f_train.values, &train_labels, labels.num_classes, lambda)?;
            out.push((
                accuracy(&predict(&model, &f_train.values)?, &train_labels)?,
                accuracy(&predict(&model, &f_test.values)?, &test_labels)?,
            ));
        }
    }
    Ok(out)
}

/// Pooled-feature accuracy of pooling-aware dictionaries at each
/// (final size, overshoot) pair, compared against overshoot 1.
pub fn run_pdl_compare(cfg: &ExperimentConfig) -> Result<PdlReport> {
    let started_unix = unix_now();
    let clock = Instant::now();
    cfg.validate_common()?;
    if cfg.final_c_grid.is_empty() || cfg.final_c_grid.contains(&0) {
        return Err(Error::arg("final_c_grid needs sizes >= 1"));
    }
    if !cfg.overshoots.contains(&1) {
        return Err(Error::arg("overshoots must include 1, the baseline"));
    }
    if cfg.overshoots.contains(&0) {
        return Err(Error::arg("overshoot factors must be >= 1"));
    }
    let seeds = cfg.seeds();
    let per_seed: Vec<Vec<(f64, f64)>> = seeds
        .par_iter()
        .map(|&s| pdl_seed(cfg, s))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut idx = 0;
    for &final_c in &cfg.final_c_grid {
        let start = rows.len();
        for &overshoot in &cfg.overshoots {
            let train: Vec<f64> = per_seed.iter().map(|r| r[idx].0).collect();
            let test: Vec<f64> = per_seed.iter().map(|r| r[idx].1).collect();
            let (test_acc, test_acc_std) = mean_std(&test);
            rows.push(PdlRow {
                final_c,
                overshoot,
                train_acc: mean_std(&train).0,
                test_acc,
                test_acc_std,
                delta_test: 0.0,
                seeds_used: seeds.len(),
            });
            idx += 1;
        }
        let baseline = rows[start..]
            .iter()
            .find(|r| r.overshoot == 1)
            .map(|r| r.test_acc)
            .expect("baseline present");
        for r in &mut rows[start..] {
            r.delta_test = r.test_acc - baseline;
        }
    }
    Ok(PdlReport {
        config: cfg.clone(),
        seeds,
        rows,
        warnings: Vec::new(),
        started_unix,
        elapsed_secs: clock.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NystromCell {
    pub seed: u64,
    pub c: usize,
    pub k: usize,
    pub code_err: f64,
    pub kernel_err: f64,
    pub bound_eq1: f64,
    /// Whether the measured code error respects the bound.
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NystromEvalReport {
    pub samples: usize,
    pub alpha: f64,
    pub energy: f64,
    pub pinv_tol: f64,
    pub k: usize,
    pub rank_k_residual: f64,
    pub scaled_diag_max: f64,
    pub cells: Vec<NystromCell>,
    pub coverage: f64,
}

/// Nyström code and kernel errors of the full code of `x` against the
/// column-sampling bound, for every `(seed, c)` pair.
pub fn nystrom_eval(
    x: &DataMatrix,
    c_grid: &[usize],
    seeds: &[u64],
    alpha: f64,
    energy: f64,
    pinv_tol: f64,
) -> Result<NystromEvalReport> {
    if c_grid.is_empty() || seeds.is_empty() {
        return Err(Error::arg("need at least one codebook size and one seed"));
    }
    let c_full = full_code(x, alpha).values;
    let k_full = gram(&c_full);
    let report = SpectralReport::compute(&c_full, energy)?;
    let pairs: Vec<(u64, usize)> = c_grid
        .iter()
        .flat_map(|&c| seeds.iter().map(move |&s| (s, c)))
        .collect();
    let cells: Vec<NystromCell> = pairs
        .par_iter()
        .map(|&(seed, c)| {
            let idx = sample_indices(x.len(), c, cell_seed(seed, c))?;
            let f = NystromFactors::decompose_with_tol(&c_full, &idx, pinv_tol)?;
            let errs = approximation_errors_with_kernel(&c_full, &k_full, &f);
            let bound = eval_eq1_bound(&report, c);
            Ok(NystromCell {
                seed,
                c,
                k: report.k,
                code_err: errs.code_err,
                kernel_err: errs.kernel_err,
                bound_eq1: bound,
                covered: errs.code_err <= bound,
            })
        })
        .collect::<Result<_>>()?;
    let coverage = cells.iter().filter(|c| c.covered).count() as f64 / cells.len() as f64;
    Ok(NystromEvalReport {
        samples: x.len(),
        alpha,
        energy,
        pinv_tol,
        k: report.k,
        rank_k_residual: report.rank_k_residual,
        scaled_diag_max: report.scaled_diag_max,
        cells,
        coverage,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// A report with a full JSON form and a flat CSV table for plotting.
pub trait Report: Serialize {
    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()>;

    fn write(&self, out: &mut dyn Write, format: OutputFormat) -> std::io::Result<()> {
        match format {
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)
            }
            OutputFormat::Csv => self.write_csv(out),
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub const CURVE_CSV_HEADER: &str = "c,train_acc,test_acc,pred_train,pred_test,code_err,kernel_err,bound_eq1";

impl Report for ExperimentReport {
    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{CURVE_CSV_HEADER}")?;
        for p in &self.curve {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.c,
                num(p.train_acc),
                num(p.test_acc),
                num(p.pred_train),
                num(p.pred_test),
                opt(p.code_err),
                opt(p.kernel_err),
                opt(p.bound_eq1)
            )?;
        }
        Ok(())
    }
}

impl Report for PdlReport {
    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "final_c,overshoot,train_acc,test_acc,delta_test")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.final_c,
                r.overshoot,
                num(r.train_acc),
                num(r.test_acc),
                num(r.delta_test)
            )?;
        }
        Ok(())
    }
}

impl Report for NystromEvalReport {
    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "seed,c,k,code_err,kernel_err,bound_eq1,covered")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.seed,
                c.c,
                c.k,
                num(c.code_err),
                num(c.kernel_err),
                num(c.bound_eq1),
                c.covered
            )?;
        }
        Ok(())
    }
}

/// Writes `report` to `path`.
pub fn emit<R: Report + ?Sized>(report: &R, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    report
        .write(&mut w, format)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes a matrix as CSV, one row per line, 17 significant digits.
pub fn write_matrix_csv(m: &DMatrix<f64>, out: &mut dyn Write) -> std::io::Result<()> {
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| num(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
