//! Accuracy metrics and the Monte-Carlo replicate harness.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{hard_em_fit, FitConfig};
use crate::likelihood::mle_given_labels;
use crate::model::{LabelAssignment, Variant};
use crate::rng::{stream_rng, Stream};
use crate::simulate::{generate_params_with, sample_data_with, SimDesign};

/// Fraction of groups whose estimated hub differs from the true hub. Labels
/// are compared directly; the unit diagonal pins hub identities.
pub fn mislabel_fraction(est: &LabelAssignment, truth: &LabelAssignment) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} estimated labels vs {} true labels",
            est.len(),
            truth.len()
        )));
    }
    if est.is_empty() {
        return Err(Error::invalid("no labels to compare"));
    }
    let wrong = est
        .components()
        .iter()
        .zip(truth.components())
        .filter(|(a, b)| a != b)
        .count();
    Ok(wrong as f64 / est.len() as f64)
}

/// Root-mean-square difference over all entries, diagonal and null row
/// included.
pub fn rmse_a(a_hat: &Array2<f64>, a_true: &Array2<f64>) -> Result<f64> {
    if a_hat.dim() != a_true.dim() {
        return Err(Error::invalid(format!(
            "matrix shapes differ: {:?} vs {:?}",
            a_hat.dim(),
            a_true.dim()
        )));
    }
    if a_hat.is_empty() {
        return Err(Error::invalid("empty matrices"));
    }
    let sq: f64 = a_hat
        .iter()
        .zip(a_true.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sq / a_hat.len() as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub index: usize,
    pub mislabel: f64,
    pub rmse: f64,
    /// RMSE of the estimate computed from the true labels.
    pub rmse_star: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation (0 for a single replicate).
    pub sd: f64,
}

impl MetricSummary {
    /// Sums in the given order, so the result does not depend on how the
    /// values were computed.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, sd }
    }

    /// Standard error of the mean.
    pub fn se(&self, replicates: usize) -> f64 {
        self.sd / (replicates as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicateSummary {
    pub variant: Variant,
    pub n_leaders: usize,
    pub n: usize,
    pub t: usize,
    pub replicates: usize,
    pub seed: u64,
    pub mislabel: MetricSummary,
    pub rmse: MetricSummary,
    pub rmse_star: MetricSummary,
    /// The null-component row is part of both RMSEs.
    pub rmse_includes_null_row: bool,
    pub records: Vec<ReplicateRecord>,
}

/// Runs one replicate: fresh parameters, fresh data, hard-EM fit and the
/// known-label fit.
pub fn run_replicate(design: &SimDesign, fit: &FitConfig, index: usize) -> Result<ReplicateRecord> {
    let r = index as u64;
    let params = generate_params_with(design, &mut stream_rng(design.seed, r, Stream::Params))?;
    let (data, truth) = sample_data_with(
        &params,
        design.t,
        &mut stream_rng(design.seed, r, Stream::Data),
    )?;
    let config = FitConfig {
        variant: design.variant,
        replicate: r,
        ..fit.clone()
    };
    let est = hard_em_fit(&data, design.n_leaders, &config)?;
    let known = mle_given_labels(&data, &truth)?;
    Ok(ReplicateRecord {
        index,
        mislabel: mislabel_fraction(&est.labels, &truth)?,
        rmse: rmse_a(&est.a_hat, params.a())?,
        rmse_star: rmse_a(&known.a, params.a())?,
    })
}

/// Runs `replicates` independent replicates in parallel and summarizes
/// them. The result is identical for any thread count.
pub fn run_replicates(
    design: &SimDesign,
    fit: &FitConfig,
    replicates: usize,
) -> Result<ReplicateSummary> {
    if replicates == 0 {
        return Err(Error::invalid("at least one replicate is required"));
    }
    design.validate()?;
    fit.validate()?;
    let records = (0..replicates)
        .into_par_iter()
        .map(|i| {
            run_replicate(design, fit, i).map_err(|e| Error::Replicate {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let column = |f: fn(&ReplicateRecord) -> f64| {
        MetricSummary::from_values(&records.iter().map(f).collect::<Vec<_>>())
    };
    Ok(ReplicateSummary {
        variant: design.variant,
        n_leaders: design.n_leaders,
        n: design.n,
        t: design.t,
        replicates,
        seed: design.seed,
        mislabel: column(|r| r.mislabel),
        rmse: column(|r| r.rmse),
        rmse_star: column(|r| r.rmse_star),
        rmse_includes_null_row: design.variant == Variant::NullComponent,
        records,
    })
}
