//! Dictionary-based feature coding seen through Nyström sampling.
//!
//! Encoding samples with a dictionary drawn from the training set yields the
//! sampled columns of the ideal code `C = max(0, XᵀX − α)`. This crate builds
//! that code, reconstructs `C` and the kernel `K = CCᵀ` from the sampled
//! columns, evaluates the column-sampling error bound, fits the
//! `O + M·c^(-1/4)` saturation model to predict accuracy at larger codebook
//! sizes, and prunes oversized dictionaries with K-centers on pooled features.
//!
//! Samples are columns of a [`data::DataMatrix`]; codes are rows of a
//! [`coding::CodeMatrix`].
//!
//! ```
//! use nystrom_coding::coding::{encode, full_code, Dictionary};
//! use nystrom_coding::data::{normalize_columns, synth_manifold, Normalization};
//! use nystrom_coding::dictionary::sample_indices;
//! use nystrom_coding::nystrom::{approximation_errors, NystromFactors};
//!
//! let x = synth_manifold(32, 4, 300, 0.05, 0)?;
//! let x = normalize_columns(&x, Normalization::UnitL2).data;
//! let idx = sample_indices(x.len(), 32, 0)?;
//!
//! let codes = encode(&x, &Dictionary::sampled(&x, &idx)?, 0.25)?;
//! let c_full = full_code(&x, 0.25).values;
//! let f = NystromFactors::decompose(&c_full, &idx)?;
//! assert_eq!(codes.values, f.e);
//! let errs = approximation_errors(&c_full, &f);
//! assert!(errs.code_err.is_finite());
//! # Ok::<(), nystrom_coding::Error>(())
//! ```

pub mod bounds;
pub mod classifier;
pub mod coding;
pub mod data;
pub mod dictionary;
pub mod error;
pub mod harness;
pub mod nystrom;
pub mod pooling;
pub mod spectra;

pub use error::{Error, Result};
