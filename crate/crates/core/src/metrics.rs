//! Counting metrics.
//!
//! "MSE" follows the crowd-counting convention: it is the root of the mean
//! squared count error, so it has the same units as MAE.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ProposalSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageCount {
    pub image_id: String,
    pub gt_count: usize,
    pub pred_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub per_image: Vec<ImageCount>,
    pub mae: f64,
    pub mse: f64,
}

/// Proposals with confidence `>= threshold`.
pub fn count_from_proposals(pred: &ProposalSet, threshold: f64) -> usize {
    crate::loss::hard_count(pred, threshold)
}

/// MAE and root-mean-square error of `(gt, predicted)` count pairs.
pub fn count_errors(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = pairs.len() as f64;
    let (abs, sq) = pairs.iter().fold((0.0, 0.0), |(a, s), &(gt, pred)| {
        let e = pred - gt;
        (a + e.abs(), s + e * e)
    });
    Ok((abs / n, (sq / n).sqrt()))
}

/// Evaluates `(gt count, predicted count)` pairs; images are labelled by
/// their position.
pub fn evaluate_dataset(pairs: &[(usize, usize)]) -> Result<EvalResult> {
    let labelled: Vec<ImageCount> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(gt_count, pred_count))| ImageCount {
            image_id: i.to_string(),
            gt_count,
            pred_count,
        })
        .collect();
    evaluate_images(labelled)
}

pub fn evaluate_images(per_image: Vec<ImageCount>) -> Result<EvalResult> {
    let pairs: Vec<(f64, f64)> = per_image
        .iter()
        .map(|c| (c.gt_count as f64, c.pred_count as f64))
        .collect();
    let (mae, mse) = count_errors(&pairs)?;
    Ok(EvalResult {
        per_image,
        mae,
        mse,
    })
}
