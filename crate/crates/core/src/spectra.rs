//! Spectral quantities entering the column-sampling error bound.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default fraction of Frobenius energy retained when choosing `k`.
pub const DEFAULT_ENERGY: f64 = 0.95;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn tail_norm(s: &[f64], k: usize) -> f64 {
    s[k..].iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖C − C_k‖_F` for the best rank-`k` approximation `C_k`.
pub fn rank_k_residual(c: &DMatrix<f64>, k: usize) -> Result<f64> {
    let max_k = c.nrows().min(c.ncols());
    if k > max_k {
        return Err(Error::arg(format!("rank {k} exceeds min dimension {max_k}")));
    }
    Ok(tail_norm(&singular_values(c), k))
}

/// `N · max_i C_ii`.
pub fn scaled_diag_max(c: &DMatrix<f64>) -> Result<f64> {
    if !c.is_square() {
        return Err(Error::arg(format!(
            "diagonal bound needs a square matrix, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    let max = c.diagonal().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(c.nrows() as f64 * max)
}

/// Smallest `k` whose leading squared singular values hold `energy` of the total.
pub fn effective_rank_from(s: &[f64], energy: f64) -> usize {
    let total: f64 = s.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return 0;
    }
    let mut acc = 0.0;
    for (i, v) in s.iter().enumerate() {
        acc += v * v;
        if acc / total >= energy {
            return i + 1;
        }
    }
    // Rounding can leave the ratio a hair under 1.0.
    s.len()
}

pub fn effective_rank(c: &DMatrix<f64>, energy: f64) -> usize {
    effective_rank_from(&singular_values(c), energy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub k: usize,
    pub rank_k_residual: f64,
    pub scaled_diag_max: f64,
    pub singular_values: Vec<f64>,
}

impl SpectralReport {
    /// One SVD of `c`, with `k` chosen by [`effective_rank`] at `energy`.
    pub fn compute(c: &DMatrix<f64>, energy: f64) -> Result<Self> {
        if !(energy > 0.0 && energy <= 1.0) {
            return Err(Error::arg(format!("energy must lie in (0, 1], got {energy}")));
        }
        let scaled_diag_max = scaled_diag_max(c)?;
        let singular_values = singular_values(c);
        let k = effective_rank_from(&singular_values, energy).max(1);
        Ok(SpectralReport {
            k,
            rank_k_residual: tail_norm(&singular_values, k),
            scaled_diag_max,
            singular_values,
        })
    }

    /// Same spectrum with an explicit `k`.
    pub fn with_k(c: &DMatrix<f64>, k: usize) -> Result<Self> {
        let scaled_diag_max = scaled_diag_max(c)?;
        let singular_values = singular_values(c);
        if k > singular_values.len() {
            return Err(Error::arg(format!("rank {k} exceeds matrix size")));
        }
        Ok(SpectralReport {
            k,
            rank_k_residual: tail_norm(&singular_values, k),
            scaled_diag_max,
            singular_values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::full_code;
    use crate::data::{normalize_columns, synth_manifold, Normalization};

    #[test]
    fn residual_examples() {
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
        assert!((rank_k_residual(&c, 1).unwrap() - 5f64.sqrt()).abs() < 1e-12);
        assert!((rank_k_residual(&c, 0).unwrap() - c.norm()).abs() < 1e-12);
        assert!(rank_k_residual(&c, 3).unwrap() <= 1e-10 * c.norm());
        assert!(rank_k_residual(&c, 4).is_err());

        let low = synth_manifold(6, 2, 6, 0.0, 1).unwrap().into_matrix();
        assert!(rank_k_residual(&low, 2).unwrap() <= 1e-10 * low.norm());
    }

    #[test]
    fn residual_non_increasing() {
        let c = synth_manifold(7, 7, 9, 0.0, 4).unwrap().into_matrix();
        let r: Vec<f64> = (0..=7).map(|k| rank_k_residual(&c, k).unwrap()).collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0]));
        assert!(r[7] <= 1e-10 * c.norm());
    }

    #[test]
    fn diag_examples() {
        assert_eq!(scaled_diag_max(&DMatrix::identity(4, 4)).unwrap(), 4.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 2.0]));
        assert_eq!(scaled_diag_max(&d).unwrap(), 4.0);
        assert!(matches!(scaled_diag_max(&DMatrix::zeros(2, 3)), Err(Error::Argument(_))));
    }

    #[test]
    fn unit_samples_give_n() {
        let x = normalize_columns(&synth_manifold(5, 3, 12, 0.1, 2).unwrap(), Normalization::UnitL2).data;
        let c = full_code(&x, 0.0).values;
        for i in 0..12 {
            assert!((c[(i, i)] - 1.0).abs() < 1e-12);
        }
        assert!((scaled_diag_max(&c).unwrap() - 12.0).abs() < 1e-10);
    }

    #[test]
    fn diag_is_permutation_invariant() {
        let c = synth_manifold(5, 5, 5, 0.0, 8).unwrap().into_matrix();
        let perm = [3, 0, 4, 1, 2];
        let p = c.select_rows(&perm).select_columns(&perm);
        assert_eq!(scaled_diag_max(&c).unwrap(), scaled_diag_max(&p).unwrap());
    }

    #[test]
    fn effective_rank_examples() {
        assert_eq!(effective_rank(&DMatrix::identity(5, 5), 1.0), 5);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_eq!(effective_rank(&d, 0.9), 1);
        assert_eq!(effective_rank_from(&[10.0, 1.0, 1.0], 0.95), 1);
        assert_eq!(effective_rank_from(&[10.0, 1.0, 1.0], 0.99), 2);
    }

    #[test]
    fn report_is_consistent() {
        let c = synth_manifold(6, 6, 6, 0.0, 3).unwrap().into_matrix();
        let r = SpectralReport::compute(&c, 0.95).unwrap();
        assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let tail: f64 = r.singular_values[r.k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((r.rank_k_residual - tail).abs() <= 1e-10 * tail.max(1.0));
        assert!(SpectralReport::compute(&c, 0.0).is_err());
    }
}
