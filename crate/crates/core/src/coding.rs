//! Threshold encoding `c(x) = max(0, xᵀD − α)` and the full-training-set code.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Threshold used when none is configured; assumes unit-norm samples.
pub const DEFAULT_ALPHA: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionarySource {
    /// Training columns at these indices.
    Sampled(Vec<usize>),
    KMeans,
    /// Atoms of a larger dictionary kept by K-centers pruning, in selection order.
    KCenters(Vec<usize>),
    /// Supplied directly by the caller.
    External,
}

/// A `d × c` codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: DMatrix<f64>,
    source: DictionarySource,
}

impl Dictionary {
    pub fn new(atoms: DMatrix<f64>, source: DictionarySource) -> Result<Self> {
        if atoms.ncols() == 0 || atoms.nrows() == 0 {
            return Err(Error::arg("dictionary needs at least one atom of positive dimension"));
        }
        if atoms.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("dictionary atoms contain non-finite values"));
        }
        if let DictionarySource::Sampled(idx) | DictionarySource::KCenters(idx) = &source {
            if idx.len() != atoms.ncols() {
                return Err(Error::arg("index provenance length differs from atom count"));
            }
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::arg("dictionary provenance indices must be distinct"));
            }
        }
        Ok(Dictionary { atoms, source })
    }

    /// Dictionary whose atoms are the training columns `indices` of `x`.
    pub fn sampled(x: &DataMatrix, indices: &[usize]) -> Result<Self> {
        let atoms = x.select(indices)?.into_matrix();
        Dictionary::new(atoms, DictionarySource::Sampled(indices.to_vec()))
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn source(&self) -> &DictionarySource {
        &self.source
    }

    /// Atom dimension `d`.
    pub fn dim(&self) -> usize {
        self.atoms.nrows()
    }

    /// Codebook size `c`.
    pub fn size(&self) -> usize {
        self.atoms.ncols()
    }

    /// Scales every non-zero atom to unit Euclidean norm.
    pub fn normalized(mut self) -> Self {
        for mut col in self.atoms.column_iter_mut() {
            let n = col.norm();
            if n > 0.0 {
                col /= n;
            }
        }
        self
    }

    /// Keeps the atoms at `positions`, recording them as K-centers picks.
    pub fn prune(&self, positions: &[usize]) -> Result<Self> {
        if let Some(&bad) = positions.iter().find(|&&p| p >= self.size()) {
            return Err(Error::arg(format!("atom {bad} out of range for {} atoms", self.size())));
        }
        Dictionary::new(
            self.atoms.select_columns(positions),
            DictionarySource::KCenters(positions.to_vec()),
        )
    }
}

/// Non-negative codes, one row per sample and one column per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeMatrix {
    pub values: DMatrix<f64>,
    pub alpha: f64,
}

impl CodeMatrix {
    pub fn samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn atoms(&self) -> usize {
        self.values.ncols()
    }
}

/// Sequential dot product. Operand order does not change the result, which
/// keeps `full_code` exactly symmetric and makes sampled-dictionary codes
/// bit-identical to the matching columns of the full code.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

fn threshold_code(samples: &[f64], atoms: &[f64], dim: usize, alpha: f64) -> DMatrix<f64> {
    let n = samples.len() / dim;
    let c = atoms.len() / dim;
    let mut values = vec![0.0; n * c];
    values
        .par_chunks_mut(n)
        .zip(atoms.par_chunks(dim))
        .for_each(|(col, atom)| {
            for (i, out) in col.iter_mut().enumerate() {
                let s = dot(&samples[i * dim..(i + 1) * dim], atom) - alpha;
                *out = s.max(0.0);
            }
        });
    DMatrix::from_vec(n, c, values)
}

/// Encodes every sample of `x` against `dict`: entry `(i, j)` is
/// `max(0, ⟨x_i, d_j⟩ − α)`.
pub fn encode(x: &DataMatrix, dict: &Dictionary, alpha: f64) -> Result<CodeMatrix> {
    if x.dim() != dict.dim() {
        return Err(Error::arg(format!(
            "sample dimension {} does not match atom dimension {}",
            x.dim(),
            dict.dim()
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::arg("alpha must be finite"));
    }
    Ok(CodeMatrix {
        values: threshold_code(x.as_matrix().as_slice(), dict.atoms().as_slice(), x.dim(), alpha),
        alpha,
    })
}

/// The `N × N` code of the training set against itself, `max(0, XᵀX − α)`.
pub fn full_code(x: &DataMatrix, alpha: f64) -> CodeMatrix {
    let s = x.as_matrix().as_slice();
    CodeMatrix {
        values: threshold_code(s, s, x.dim(), alpha),
        alpha,
    }
}

/// Linear kernel between coded samples, `K = C·Cᵀ`, symmetrized.
pub fn gram_kernel(c: &CodeMatrix) -> DMatrix<f64> {
    gram(&c.values)
}

pub(crate) fn gram(m: &DMatrix<f64>) -> DMatrix<f64> {
    let k = m * m.transpose();
    symmetrize(k)
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}
