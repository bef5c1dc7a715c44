//! Nyström decomposition of a square code matrix and the approximate code
//! and kernel matrices it induces.
//!
//! With `E = C[:, S]` and `W = C[S, S]` the approximations are
//! `C' = E·W⁺·Eᵀ` and `K' = C'·C'ᵀ = E·Λ·Eᵀ` with `Λ = W⁺·EᵀE·W⁺`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coding::{gram, symmetrize};
use crate::error::{Error, Result};

/// Relative singular-value cutoff for the pseudo-inverse of `W`.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

const SVD_MAX_ITERS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct NystromFactors {
    pub indices: Vec<usize>,
    /// Sampled columns, `N × c`.
    pub e: DMatrix<f64>,
    /// Sampled rows and columns, `c × c`.
    pub w: DMatrix<f64>,
    pub w_pinv: DMatrix<f64>,
    pub pinv_tol: f64,
}

/// Moore-Penrose pseudo-inverse dropping singular values below
/// `rel_tol · σ_max`.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let s = &svd.singular_values;
    let cutoff = rel_tol * s.max();
    let mut scaled_ut = u.transpose();
    for (i, &sv) in s.iter().enumerate() {
        let inv = if sv > cutoff && sv > 0.0 { 1.0 / sv } else { 0.0 };
        scaled_ut.row_mut(i).scale_mut(inv);
    }
    Ok(v_t.transpose() * scaled_ut)
}

/// Numerical rank under the same relative cutoff as [`pinv`].
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = m.singular_values();
    let cutoff = rel_tol * s.max();
    s.iter().filter(|&&v| v > cutoff && v > 0.0).count()
}

impl NystromFactors {
    /// Slices `E` and `W` out of `c` and pseudo-inverts `W`.
    pub fn decompose(c: &DMatrix<f64>, indices: &[usize]) -> Result<Self> {
        Self::decompose_with_tol(c, indices, DEFAULT_PINV_TOL)
    }

    pub fn decompose_with_tol(c: &DMatrix<f64>, indices: &[usize], pinv_tol: f64) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::arg(format!(
                "Nystrom decomposition needs a square matrix, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if indices.is_empty() {
            return Err(Error::arg("at least one column must be sampled"));
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("sampled indices must be distinct"));
        }
        if let Some(&bad) = sorted.last().filter(|&&i| i >= c.ncols()) {
            return Err(Error::arg(format!("index {bad} out of range for {} columns", c.ncols())));
        }
        if !(pinv_tol >= 0.0) {
            return Err(Error::arg("pinv tolerance must be >= 0"));
        }
        let e = c.select_columns(indices);
        let w = e.select_rows(indices);
        let mut w_pinv = pinv(&w, pinv_tol)?;
        if w == w.transpose() {
            w_pinv = symmetrize(w_pinv);
        }
        Ok(NystromFactors {
            indices: indices.to_vec(),
            e,
            w,
            w_pinv,
            pinv_tol,
        })
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    /// `Λ = W⁺·(EᵀE)·W⁺`, a `c × c` matrix.
    pub fn lambda(&self) -> DMatrix<f64> {
        let ete = self.e.tr_mul(&self.e);
        &self.w_pinv * ete * &self.w_pinv
    }

    /// `C' = E·W⁺·Eᵀ`.
    pub fn reconstruct_code(&self) -> DMatrix<f64> {
        &self.e * &self.w_pinv * self.e.transpose()
    }

    /// `K' = E·Λ·Eᵀ`, computed from the `c × c` core without forming `C'`.
    pub fn reconstruct_kernel(&self) -> DMatrix<f64> {
        symmetrize(&self.e * self.lambda() * self.e.transpose())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationErrors {
    /// `‖C − C'‖_F`
    pub code_err: f64,
    /// `‖CCᵀ − K'‖_F`
    pub kernel_err: f64,
}

pub fn approximation_errors(c: &DMatrix<f64>, f: &NystromFactors) -> ApproximationErrors {
    approximation_errors_with_kernel(c, &gram(c), f)
}

/// As [`approximation_errors`] with a precomputed `K = CCᵀ`.
pub fn approximation_errors_with_kernel(
    c: &DMatrix<f64>,
    k: &DMatrix<f64>,
    f: &NystromFactors,
) -> ApproximationErrors {
    ApproximationErrors {
        code_err: (c - f.reconstruct_code()).norm(),
        kernel_err: (k - f.reconstruct_kernel()).norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::sample_indices;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    fn psd(n: usize, rank: usize, seed: u64) -> DMatrix<f64> {
        let a = random(n, rank, seed);
        symmetrize(&a * a.transpose())
    }

    fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn all_ones_single_column() {
        let c = DMatrix::from_element(3, 3, 1.0);
        let f = NystromFactors::decompose(&c, &[0]).unwrap();
        assert_eq!(f.e, DMatrix::from_element(3, 1, 1.0));
        assert_eq!(f.w, DMatrix::from_element(1, 1, 1.0));
        assert!((f.w_pinv[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((f.reconstruct_code() - &c).norm() <= 1e-12);
    }

    #[test]
    fn full_sampling_slices_everything() {
        let c = psd(5, 5, 1);
        let f = NystromFactors::decompose(&c, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(f.e, c);
        assert_eq!(f.w, c);
        assert!(rel(&f.reconstruct_code(), &c) < 1e-10);
        let k = &c * &c;
        assert!(rel(&f.reconstruct_kernel(), &k) < 1e-8);
    }

    #[test]
    fn w_is_the_index_subblock() {
        let c = psd(6, 6, 2);
        let f = NystromFactors::decompose(&c, &[1, 4]).unwrap();
        for (a, &i) in [1usize, 4].iter().enumerate() {
            for (b, &j) in [1usize, 4].iter().enumerate() {
                assert_eq!(f.w[(a, b)], c[(i, j)]);
            }
        }
        assert_eq!(f.w, f.e.select_rows(&f.indices));
        assert!((&f.w_pinv - f.w_pinv.transpose()).norm() <= 1e-10 * f.w_pinv.norm());
    }

    #[test]
    fn rank_two_recovery() {
        let c = psd(5, 2, 3);
        let f = NystromFactors::decompose(&c, &[0, 3]).unwrap();
        assert_eq!(numerical_rank(&f.w, 1e-10), 2);
        assert!((&c - f.reconstruct_code()).norm() <= 1e-9 * c.norm());
    }

    #[test]
    fn rank_one_kernel_is_exact() {
        let v = DMatrix::from_column_slice(4, 1, &[2.0, -1.0, 0.5, 3.0]);
        let c = &v * v.transpose();
        let f = NystromFactors::decompose(&c, &[0]).unwrap();
        let vtv = v.norm_squared();
        let k = &c * &c;
        assert!(rel(&(c.clone() * vtv), &k) < 1e-14);
        assert!(rel(&f.reconstruct_kernel(), &k) < 1e-12);
    }

    #[test]
    fn reconstructed_kernel_is_psd() {
        for seed in 0..10 {
            // Indefinite symmetric input on purpose.
            let a = random(8, 8, seed);
            let c = symmetrize(a.clone() + a.transpose());
            let idx = sample_indices(8, 3, seed).unwrap();
            let kp = NystromFactors::decompose(&c, &idx).unwrap().reconstruct_kernel();
            let eig = kp.symmetric_eigenvalues();
            assert!(eig.min() >= -1e-8 * eig.max(), "{eig}");
        }
    }

    #[test]
    fn kernel_route_matches_code_route() {
        for seed in 0..10 {
            let c = psd(12, 12, seed).map(|v| (v - 1.0).max(0.0));
            let idx = sample_indices(12, 5, seed + 100).unwrap();
            let f = NystromFactors::decompose(&c, &idx).unwrap();
            let via_code = gram(&f.reconstruct_code());
            assert!(rel(&f.reconstruct_kernel(), &via_code) < 1e-8);
        }
    }

    #[test]
    fn identity_with_one_sample() {
        let c = DMatrix::identity(2, 2);
        let errs = approximation_errors(&c, &NystromFactors::decompose(&c, &[0]).unwrap());
        assert!((errs.code_err - 1.0).abs() < 1e-15);
        assert!((errs.kernel_err - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_instances_have_tiny_errors() {
        let c = DMatrix::from_element(3, 3, 1.0);
        let errs = approximation_errors(&c, &NystromFactors::decompose(&c, &[2]).unwrap());
        assert!(errs.code_err <= 1e-9 && errs.kernel_err <= 1e-9);
        assert!(errs.code_err >= 0.0 && errs.kernel_err >= 0.0);
    }

    #[test]
    fn argument_errors() {
        let rect = DMatrix::zeros(3, 4);
        assert!(matches!(NystromFactors::decompose(&rect, &[0]), Err(Error::Argument(_))));
        let c = DMatrix::identity(3, 3);
        assert!(matches!(NystromFactors::decompose(&c, &[1, 1]), Err(Error::Argument(_))));
        assert!(matches!(NystromFactors::decompose(&c, &[]), Err(Error::Argument(_))));
        assert!(matches!(NystromFactors::decompose(&c, &[3]), Err(Error::Argument(_))));
    }

    #[test]
    fn slice_consistency() {
        let c = psd(10, 10, 7);
        let f = NystromFactors::decompose(&c, &[0, 2, 5]).unwrap();
        let cp = f.reconstruct_code();
        let rows = cp.select_rows(&f.indices);
        let expect = c.select_rows(&f.indices);
        assert!(rel(&rows, &expect) < 1e-9);
    }

    #[test]
    fn error_decays_with_more_samples() {
        let a = random(64, 64, 11);
        let c = symmetrize(&a * a.transpose()) / 64.0;
        let mut prev = f64::INFINITY;
        let mut inversions = 0;
        for size in [2, 4, 8, 16] {
            let mean: f64 = (0..20)
                .map(|s| {
                    let idx = sample_indices(64, size, s).unwrap();
                    let f = NystromFactors::decompose(&c, &idx).unwrap();
                    (&c - f.reconstruct_code()).norm()
                })
                .sum::<f64>()
                / 20.0;
            if mean > prev {
                inversions += 1;
                assert!(mean <= prev * 1.02, "{size}: {mean} > {prev}");
            }
            prev = mean;
        }
        assert!(inversions <= 1);
    }
}
