//! Saturation model `e(c) = O + M·c^(-1/4)` and the column-sampling error bound.
//!
//! The bound on `‖C − C'‖_F` holds once `c ≥ 64k/ε⁴`; taking `ε` at equality
//! gives `ε(c) = (64k/c)^(1/4)`, which is where the `c^(-1/4)` rate comes from.
//! The same functional form, with the sign flipped, models classification
//! accuracy as it rises toward an asymptote.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::SpectralReport;

/// `c^(-1/4)` via two square roots, exact for perfect fourth powers of two.
pub fn quarter_rate(c: f64) -> f64 {
    1.0 / c.sqrt().sqrt()
}

/// Smallest `ε` with `c ≥ 64k/ε⁴`, i.e. `(64k/c)^(1/4)`.
pub fn epsilon_min(c: usize, k: usize) -> f64 {
    (64.0 * k as f64 / c as f64).sqrt().sqrt()
}

/// `‖C − C_k‖_F + ε(c)·N·max_i C_ii`.
pub fn eval_eq1_bound(report: &SpectralReport, c: usize) -> f64 {
    report.rank_k_residual + epsilon_min(c, report.k) * report.scaled_diag_max
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelForm {
    /// `O + M·c^(-1/4)`, a decaying error.
    Error,
    /// `A − B·c^(-1/4)`, accuracy saturating at `A`.
    Accuracy,
}

impl ModelForm {
    fn sign(self) -> f64 {
        match self {
            ModelForm::Error => 1.0,
            ModelForm::Accuracy => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub c: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationModel {
    pub form: ModelForm,
    /// `O` (error form) or the asymptote `A` (accuracy form).
    pub offset: f64,
    /// `M` (error form) or the deficit `B` (accuracy form).
    pub slope: f64,
    pub fit_points: [FitPoint; 2],
}

/// Solves `value_i = O ± M·c_i^(-1/4)` through the two points.
pub fn fit_two_point(p1: (f64, f64), p2: (f64, f64), form: ModelForm) -> Result<SaturationModel> {
    let (c1, v1) = p1;
    let (c2, v2) = p2;
    if !(c1 >= 1.0 && c2 >= 1.0) || !c1.is_finite() || !c2.is_finite() {
        return Err(Error::arg(format!("codebook sizes must be >= 1, got {c1} and {c2}")));
    }
    if c1 == c2 {
        return Err(Error::arg(format!("two-point fit needs distinct sizes, got {c1} twice")));
    }
    if !(v1.is_finite() && v2.is_finite()) {
        return Err(Error::arg("fit values must be finite"));
    }
    let (t1, t2) = (quarter_rate(c1), quarter_rate(c2));
    let signed_slope = (v1 - v2) / (t1 - t2);
    Ok(SaturationModel {
        form,
        offset: v1 - signed_slope * t1,
        slope: form.sign() * signed_slope,
        fit_points: [FitPoint { c: c1, value: v1 }, FitPoint { c: c2, value: v2 }],
    })
}

impl SaturationModel {
    /// Model value at codebook size `c`.
    ///
    /// Evaluated as interpolation between the fit points in `c^(-1/4)`, which
    /// is algebraically `O ± M·c^(-1/4)` but reproduces the fit points to the
    /// last bit even when they are close together.
    pub fn predict(&self, c: f64) -> f64 {
        let [a, b] = self.fit_points;
        let (ta, tb) = (quarter_rate(a.c), quarter_rate(b.c));
        let t = quarter_rate(c);
        if t == ta {
            return a.value;
        }
        a.value + (b.value - a.value) * ((t - ta) / (tb - ta))
    }

    /// `O ± M·c^(-1/4)` evaluated directly from the stored constants.
    pub fn predict_closed_form(&self, c: f64) -> f64 {
        self.offset + self.form.sign() * self.slope * quarter_rate(c)
    }

    /// Whether an accuracy-form model rises toward its asymptote (`B ≥ 0`).
    /// Error-form models always report `true`.
    pub fn saturates_from_below(&self) -> bool {
        match self.form {
            ModelForm::Accuracy => self.slope >= 0.0,
            ModelForm::Error => true,
        }
    }

    /// Largest relative deviation at the fit points, relative to the larger
    /// of the two fitted magnitudes.
    pub fn fit_residual(&self) -> f64 {
        let scale = self.fit_points.iter().map(|p| p.value.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return self.fit_points.iter().map(|p| self.predict(p.c).abs()).fold(0.0, f64::max);
        }
        self.fit_points
            .iter()
            .map(|p| (self.predict(p.c) - p.value).abs() / scale)
            .fold(0.0, f64::max)
    }
}
