//! One-vs-rest ridge regression on code features.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// `features × classes`
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub lambda: f64,
}

impl LinearModel {
    pub fn classes(&self) -> usize {
        self.bias.len()
    }

    pub fn features(&self) -> usize {
        self.weights.nrows()
    }
}

/// Fits one ridge regressor per class on `±1` targets.
///
/// The intercept is an appended constant feature left out of the penalty, so
/// each class solves `(ĈᵀĈ + λ·P)·w = Ĉᵀy` with `P = diag(1, …, 1, 0)`.
pub fn train_ridge(
    features: &DMatrix<f64>,
    labels: &[usize],
    classes: usize,
    lambda: f64,
) -> Result<LinearModel> {
    if classes < 2 {
        return Err(Error::arg(format!("need at least 2 classes, got {classes}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::arg(format!("ridge lambda must be > 0, got {lambda}")));
    }
    let (n, c) = features.shape();
    if n != labels.len() {
        return Err(Error::arg(format!("{n} feature rows but {} labels", labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::arg(format!("label {bad} out of range for {classes} classes")));
    }

    let augmented = features.clone().insert_column(c, 1.0);
    let mut gram = augmented.tr_mul(&augmented);
    for i in 0..c {
        gram[(i, i)] += lambda;
    }
    let targets = DMatrix::from_fn(n, classes, |i, l| if labels[i] == l { 1.0 } else { -1.0 });
    let rhs = augmented.tr_mul(&targets);

    let solution = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("ridge normal equations are singular".into()))?,
    };
    Ok(LinearModel {
        weights: solution.rows(0, c).into_owned(),
        bias: solution.row(c).transpose(),
        lambda,
    })
}

/// Class scores, one row per sample.
pub fn scores(model: &LinearModel, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if features.ncols() != model.features() {
        return Err(Error::arg(format!(
            "model expects {} features, got {}",
            model.features(),
            features.ncols()
        )));
    }
    let mut s = features * &model.weights;
    for mut row in s.row_iter_mut() {
        row += model.bias.transpose();
    }
    Ok(s)
}

/// Argmax of each score row; ties go to the lowest class index.
pub fn argmax_rows(scores: &DMatrix<f64>) -> Vec<usize> {
    scores
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

pub fn predict(model: &LinearModel, features: &DMatrix<f64>) -> Result<Vec<usize>> {
    Ok(argmax_rows(&scores(model, features)?))
}

/// Fraction of positions where `pred` and `truth` agree.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::arg(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::arg("accuracy of an empty set is undefined"));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}
