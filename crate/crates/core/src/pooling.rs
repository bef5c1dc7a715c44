//! Spatial pooling of patch codes and pooling-aware dictionary learning.
//!
//! Pooling-aware learning trains an oversized K-means dictionary, encodes and
//! pools the training images with it, then keeps the atoms whose pooled
//! responses are most spread out under greedy K-centers. The pruned atoms are
//! used unchanged, so extraction cost matches a dictionary learned directly
//! at the final size.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coding::{encode, CodeMatrix, Dictionary};
use crate::data::PatchGrid;
use crate::dictionary::{kcenters, kmeans};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolOp {
    Average,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub region_rows: usize,
    pub region_cols: usize,
    pub op: PoolOp,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            region_rows: 2,
            region_cols: 2,
            op: PoolOp::Average,
        }
    }
}

impl PoolConfig {
    pub fn regions(&self) -> usize {
        self.region_rows * self.region_cols
    }
}

/// Patch-grid geometry of a batch of images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
    pub images: usize,
}

impl From<&PatchGrid> for GridShape {
    fn from(g: &PatchGrid) -> Self {
        GridShape {
            rows: g.grid_rows,
            cols: g.grid_cols,
            images: g.images,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PooledFeatures {
    /// One row per image; columns are `region · atoms + atom`.
    pub values: DMatrix<f64>,
    pub regions: usize,
    pub op: PoolOp,
}

impl PooledFeatures {
    pub fn atoms(&self) -> usize {
        self.values.ncols() / self.regions
    }
}

/// Region index of grid line `i` when `len` lines are split into `parts`;
/// the last region absorbs the remainder.
fn region_of(i: usize, len: usize, parts: usize) -> usize {
    (i / (len / parts)).min(parts - 1)
}

/// Pools patch codes per image over a `region_rows × region_cols` partition
/// of the patch grid.
pub fn pool(codes: &CodeMatrix, grid: GridShape, cfg: &PoolConfig) -> Result<PooledFeatures> {
    let (pr, pc) = (cfg.region_rows, cfg.region_cols);
    if pr == 0 || pc == 0 || pr > grid.rows || pc > grid.cols {
        return Err(Error::arg(format!(
            "{pr}x{pc} pooling regions do not fit a {}x{} patch grid",
            grid.rows, grid.cols
        )));
    }
    let per_image = grid.rows * grid.cols;
    if codes.samples() != per_image * grid.images {
        return Err(Error::arg(format!(
            "{} code rows for {} images of {per_image} patches",
            codes.samples(),
            grid.images
        )));
    }
    let atoms = codes.atoms();
    let regions = pr * pc;
    let init = match cfg.op {
        PoolOp::Average => 0.0,
        PoolOp::Max => f64::NEG_INFINITY,
    };
    let mut out = DMatrix::from_element(grid.images, regions * atoms, init);
    let mut counts = vec![0usize; regions];
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            counts[region_of(r, grid.rows, pr) * pc + region_of(c, grid.cols, pc)] += 1;
        }
    }
    for img in 0..grid.images {
        for r in 0..grid.rows {
            for c in 0..grid.cols {
                let region = region_of(r, grid.rows, pr) * pc + region_of(c, grid.cols, pc);
                let patch = img * per_image + r * grid.cols + c;
                for a in 0..atoms {
                    let v = codes.values[(patch, a)];
                    let slot = &mut out[(img, region * atoms + a)];
                    match cfg.op {
                        PoolOp::Average => *slot += v,
                        PoolOp::Max => *slot = slot.max(v),
                    }
                }
            }
        }
    }
    if cfg.op == PoolOp::Average {
        for region in 0..regions {
            let inv = 1.0 / counts[region] as f64;
            out.columns_mut(region * atoms, atoms).scale_mut(inv);
        }
    }
    Ok(PooledFeatures {
        values: out,
        regions,
        op: cfg.op,
    })
}

/// Encodes every patch against `dict` and pools per image.
pub fn encode_pool(
    patches: &PatchGrid,
    dict: &Dictionary,
    alpha: f64,
    cfg: &PoolConfig,
) -> Result<PooledFeatures> {
    let codes = encode(&patches.patches, dict, alpha)?;
    pool(&codes, patches.into(), cfg)
}

/// One row per atom: its pooled responses over every (image, region).
pub fn atom_responses(pooled: &PooledFeatures) -> DMatrix<f64> {
    let atoms = pooled.atoms();
    let images = pooled.values.nrows();
    let regions = pooled.regions;
    DMatrix::from_fn(atoms, images * regions, |a, col| {
        let (img, region) = (col / regions, col % regions);
        pooled.values[(img, region * atoms + a)]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdlConfig {
    pub final_c: usize,
    /// Size multiplier of the initial dictionary; 1 reproduces plain K-means.
    pub overshoot: usize,
    pub alpha: f64,
    pub pool: PoolConfig,
    pub kmeans_iters: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PdlResult {
    /// Pruned dictionary; provenance holds the kept positions in `big`.
    pub dictionary: Dictionary,
    /// The oversized K-means dictionary before pruning.
    pub big: Dictionary,
}

/// Pooling-aware dictionary learning on training patches.
pub fn pdl(patches: &PatchGrid, cfg: &PdlConfig) -> Result<PdlResult> {
    if cfg.final_c == 0 || cfg.overshoot == 0 {
        return Err(Error::arg("final dictionary size and overshoot must be >= 1"));
    }
    let big_c = cfg.final_c * cfg.overshoot;
    if big_c > patches.patches.len() {
        return Err(Error::arg(format!(
            "{big_c} atoms requested from {} patches",
            patches.patches.len()
        )));
    }
    let big = kmeans(&patches.patches, big_c, cfg.kmeans_iters, cfg.seed)?.dictionary();
    let pooled = encode_pool(patches, &big, cfg.alpha, &cfg.pool)?;
    let picks = kcenters(&atom_responses(&pooled), cfg.final_c, cfg.seed)?;
    Ok(PdlResult {
        dictionary: big.prune(&picks)?,
        big,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::DictionarySource;
    use crate::data::{extract_patches_batch, synth_textures, normalize_columns, Normalization};
    use crate::dictionary::kcenters_from;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn codes(rows: usize, atoms: usize, seed: u64) -> CodeMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CodeMatrix {
            values: DMatrix::from_fn(rows, atoms, |_, _| rng.random_range(0.0..1.0)),
            alpha: 0.0,
        }
    }

    fn avg(pr: usize, pc: usize) -> PoolConfig {
        PoolConfig { region_rows: pr, region_cols: pc, op: PoolOp::Average }
    }

    #[test]
    fn constant_field_averages_to_constant() {
        let c = CodeMatrix { values: DMatrix::from_fn(4, 3, |_, a| a as f64 + 0.5), alpha: 0.0 };
        let p = pool(&c, GridShape { rows: 2, cols: 2, images: 1 }, &avg(1, 1)).unwrap();
        assert_eq!(p.values.row(0).iter().copied().collect::<Vec<_>>(), vec![0.5, 1.5, 2.5]);
    }

    #[test]
    fn one_patch_per_region_is_identity() {
        let c = codes(8, 3, 1);
        let p = pool(&c, GridShape { rows: 2, cols: 2, images: 2 }, &avg(2, 2)).unwrap();
        for img in 0..2 {
            for region in 0..4 {
                for a in 0..3 {
                    assert_eq!(p.values[(img, region * 3 + a)], c.values[(img * 4 + region, a)]);
                }
            }
        }
    }

    #[test]
    fn max_pool_matches_nested_loops() {
        let c = codes(2 * 16, 5, 2);
        let cfg = PoolConfig { region_rows: 2, region_cols: 2, op: PoolOp::Max };
        let p = pool(&c, GridShape { rows: 4, cols: 4, images: 2 }, &cfg).unwrap();
        for img in 0..2 {
            for rr in 0..2 {
                for rc in 0..2 {
                    for a in 0..5 {
                        let mut m = f64::NEG_INFINITY;
                        for r in rr * 2..rr * 2 + 2 {
                            for col in rc * 2..rc * 2 + 2 {
                                m = m.max(c.values[(img * 16 + r * 4 + col, a)]);
                            }
                        }
                        assert_eq!(p.values[(img, (rr * 2 + rc) * 5 + a)], m);
                    }
                }
            }
        }
    }

    #[test]
    fn uneven_split_gives_remainder_to_last_region() {
        // 3 rows into 2 regions: rows {0} and {1, 2}.
        let c = CodeMatrix { values: DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 4.0]), alpha: 0.0 };
        let p = pool(&c, GridShape { rows: 3, cols: 1, images: 1 }, &avg(2, 1)).unwrap();
        assert_eq!(p.values.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 3.0]);
    }

    #[test]
    fn max_dominates_average() {
        let c = codes(3 * 25, 4, 3);
        let g = GridShape { rows: 5, cols: 5, images: 3 };
        let a = pool(&c, g, &avg(2, 3)).unwrap();
        let m = pool(&c, g, &PoolConfig { region_rows: 2, region_cols: 3, op: PoolOp::Max }).unwrap();
        assert!(m.values.iter().zip(a.values.iter()).all(|(m, a)| m >= a));
        assert!(m.values.iter().all(|&v| v >= 0.0));
        assert_eq!(m.values.ncols(), 6 * 4);
    }

    #[test]
    fn oversized_regions_rejected() {
        let c = codes(4, 2, 0);
        assert!(matches!(
            pool(&c, GridShape { rows: 2, cols: 2, images: 1 }, &avg(3, 1)),
            Err(Error::Argument(_))
        ));
    }

    fn texture_patches(images: usize, seed: u64) -> PatchGrid {
        let (ims, _) = synth_textures(images, 8, 0.3, seed).unwrap();
        let mut g = extract_patches_batch(&ims, 4, 4).unwrap();
        g.patches = normalize_columns(&g.patches, Normalization::Both).data;
        g
    }

    fn cfg(final_c: usize, overshoot: usize) -> PdlConfig {
        PdlConfig { final_c, overshoot, alpha: 0.25, pool: avg(2, 2), kmeans_iters: 30, seed: 4 }
    }

    #[test]
    fn overshoot_one_keeps_every_atom() {
        let g = texture_patches(20, 1);
        let r = pdl(&g, &cfg(6, 1)).unwrap();
        let DictionarySource::KCenters(picks) = r.dictionary.source() else { panic!() };
        let mut sorted = picks.clone();
        sorted.sort();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
        assert_eq!(r.dictionary.atoms(), &r.big.atoms().select_columns(picks));
        let direct = kmeans(&g.patches, 6, 30, 4).unwrap().dictionary();
        assert_eq!(direct.atoms(), r.big.atoms());
    }

    #[test]
    fn overshoot_output_shape() {
        let g = texture_patches(20, 2);
        let r = pdl(&g, &cfg(5, 3)).unwrap();
        assert_eq!(r.dictionary.size(), 5);
        assert_eq!(r.big.size(), 15);
        let DictionarySource::KCenters(picks) = r.dictionary.source() else { panic!() };
        assert!(picks.iter().all(|&p| p < 15));
        assert!(pdl(&g, &cfg(40, 3)).is_err());
    }

    #[test]
    fn identical_atoms_are_not_both_kept() {
        // Atoms 0 and 1 are identical; 2 differs. Every first pick leads to a
        // distinct pair.
        let atoms = DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let dict = Dictionary::new(atoms, DictionarySource::KMeans).unwrap();
        let g = texture_patches(4, 3);
        let mut patches = g.clone();
        patches.patches = crate::data::DataMatrix::new(g.patches.as_matrix().rows(0, 2).into_owned()).unwrap();
        let pooled = encode_pool(&patches, &dict, 0.0, &avg(2, 2)).unwrap();
        let f = atom_responses(&pooled);
        assert_eq!(f.row(0), f.row(1));
        for first in 0..3 {
            let picks = kcenters_from(&f, 2, first).unwrap();
            assert!(picks.contains(&2), "first {first}: {picks:?}");
        }
    }
}
