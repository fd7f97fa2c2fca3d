//! Accuracy, mean absolute error, root mean squared error, and confusion
//! matrices over per-instance class-probability predictions.
//!
//! MAE and RMSE compare the full predicted distribution with the 0/1
//! indicator of the actual class and average over all `N * K` terms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reptree::argmax;

/// A predicted class distribution paired with the actual class.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub distribution: Vec<f64>,
    pub predicted: usize,
    pub actual: usize,
}

impl Prediction {
    /// The predicted class is the argmax of `distribution` (lowest index on
    /// ties).
    pub fn new(distribution: Vec<f64>, actual: usize) -> Self {
        let predicted = argmax(&distribution);
        Prediction {
            distribution,
            predicted,
            actual,
        }
    }
}

/// Counts indexed `[actual][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn record(&mut self, actual: usize, predicted: usize) {
        self.counts[actual][predicted] += 1;
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.num_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn incorrect(&self) -> u64 {
        self.total() - self.correct()
    }

    /// Per-class actual totals (row sums).
    pub fn actual_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    /// Per-class predicted totals (column sums).
    pub fn predicted_totals(&self) -> Vec<u64> {
        (0..self.num_classes())
            .map(|j| self.counts.iter().map(|row| row[j]).sum())
            .collect()
    }

    /// Adds another matrix over the same classes.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
    }
}

/// Percentage of correctly classified instances.
pub fn accuracy(confusion: &ConfusionMatrix) -> Result<f64> {
    let total = confusion.total();
    if total == 0 {
        return Err(Error::InsufficientData("accuracy of an empty confusion matrix".into()));
    }
    Ok(100.0 * confusion.correct() as f64 / total as f64)
}

fn check_nonempty(predictions: &[Prediction]) -> Result<usize> {
    let k = predictions
        .first()
        .map(|p| p.distribution.len())
        .ok_or_else(|| Error::InsufficientData("no predictions".into()))?;
    if k == 0 {
        return Err(Error::InvalidParameter("empty class distribution".into()));
    }
    Ok(k)
}

pub fn mae(predictions: &[Prediction]) -> Result<f64> {
    let k = check_nonempty(predictions)?;
    let sum: f64 = predictions
        .iter()
        .map(|p| {
            p.distribution
                .iter()
                .enumerate()
                .map(|(c, q)| (q - indicator(c, p.actual)).abs())
                .sum::<f64>()
        })
        .sum();
    Ok(sum / (predictions.len() * k) as f64)
}

pub fn rmse(predictions: &[Prediction]) -> Result<f64> {
    let k = check_nonempty(predictions)?;
    let sum: f64 = predictions
        .iter()
        .map(|p| {
            p.distribution
                .iter()
                .enumerate()
                .map(|(c, q)| (q - indicator(c, p.actual)).powi(2))
                .sum::<f64>()
        })
        .sum();
    Ok((sum / (predictions.len() * k) as f64).sqrt())
}

fn indicator(class: usize, actual: usize) -> f64 {
    if class == actual {
        1.0
    } else {
        0.0
    }
}

pub fn confusion_from_predictions(predictions: &[Prediction], classes: &[String]) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::new(classes.to_vec());
    for p in predictions {
        m.record(p.actual, p.predicted);
    }
    m
}

/// One row of an evaluation summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub correct: u64,
    pub incorrect: u64,
    /// Percent.
    pub accuracy: f64,
    pub mae: f64,
    pub rmse: f64,
    #[serde(rename = "build_time_sec")]
    pub build_time: f64,
    pub confusion: ConfusionMatrix,
}

impl EvalSummary {
    pub fn from_predictions(predictions: &[Prediction], classes: &[String], build_time: f64) -> Result<Self> {
        let confusion = confusion_from_predictions(predictions, classes);
        Ok(EvalSummary {
            correct: confusion.correct(),
            incorrect: confusion.incorrect(),
            accuracy: accuracy(&confusion)?,
            mae: mae(predictions)?,
            rmse: rmse(predictions)?,
            build_time,
            confusion,
        })
    }

    pub fn total(&self) -> u64 {
        self.correct + self.incorrect
    }
}
