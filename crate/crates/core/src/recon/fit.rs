use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::grid::SamplingGrid;
use crate::drops::{spherical_harmonic, DropletCoefficients};
use crate::error::{DropsError, Result};
use crate::spinop::C64;
use crate::tensors::{DropletLabel, TensorIndex};
use crate::tomo::SampleSet;

/// Design matrices with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub coefficients: DropletCoefficients,
    pub residual_rms: f64,
    pub condition_number: f64,
}

fn unknowns(ranks: &[u32]) -> Vec<(u32, i32)> {
    ranks
        .iter()
        .flat_map(|&j| (-(j as i32)..=(j as i32)).map(move |m| (j, m)))
        .collect()
}

/// Recovers `c_jm^(ℓ)` for the given ranks from values sampled at the grid
/// nodes: quadrature projection on weighted grids, minimum-norm least squares
/// otherwise.
pub fn fit_coefficients(
    values: &[C64],
    grid: &SamplingGrid,
    label: DropletLabel,
    ranks: &[u32],
    n_spins: usize,
) -> Result<FitReport> {
    if values.len() != grid.len() {
        return Err(DropsError::Invalid(format!(
            "{} samples for a grid of {} nodes",
            values.len(),
            grid.len()
        )));
    }
    if let Some(&j) = ranks.iter().find(|&&j| !label.has_rank(j)) {
        return Err(DropsError::InvalidTensor(format!("rank {j} does not occur in droplet {label}")));
    }
    let lm = unknowns(ranks);
    if grid.len() < lm.len() {
        return Err(DropsError::Underdetermined {
            nodes: grid.len(),
            unknowns: lm.len(),
        });
    }
    let mut design = DMatrix::<C64>::zeros(grid.len(), lm.len());
    for (i, &(beta, alpha)) in grid.nodes.iter().enumerate() {
        for (k, &(j, m)) in lm.iter().enumerate() {
            design[(i, k)] = spherical_harmonic(j, m, beta, alpha)?;
        }
    }
    let svd = design.clone().svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition_number = if lm.is_empty() { 1.0 } else { smax / smin };
    if condition_number.is_nan() || condition_number > MAX_CONDITION {
        return Err(DropsError::IllConditioned(condition_number));
    }
    let b = DVector::from_column_slice(values);
    let c = match &grid.weights {
        Some(w) => {
            let mut c = DVector::<C64>::zeros(lm.len());
            for (i, wi) in w.iter().enumerate() {
                for k in 0..lm.len() {
                    c[k] += design[(i, k)].conj() * b[i] * *wi;
                }
            }
            c
        }
        None => svd
            .solve(&b, 0.0)
            .map_err(|e| DropsError::Invalid(format!("least squares failed: {e}")))?,
    };
    let residual = &design * &c - &b;
    let residual_rms = if grid.is_empty() {
        0.0
    } else {
        (residual.iter().map(|r| r.norm_sqr()).sum::<f64>() / grid.len() as f64).sqrt()
    };
    let mut coefficients = DropletCoefficients::new(n_spins)?;
    for (k, &(j, m)) in lm.iter().enumerate() {
        coefficients.insert(TensorIndex::new(label, j, m)?, c[k])?;
    }
    Ok(FitReport {
        coefficients,
        residual_rms,
        condition_number,
    })
}

/// Fits every `(ℓ, j)` series of a sample set separately (rank `j` only) and
/// merges the results. The residual is the RMS over all samples and the
/// condition number the worst one.
pub fn fit_sample_set(samples: &SampleSet, grid: &SamplingGrid) -> Result<FitReport> {
    let mut coefficients = DropletCoefficients::new(samples.n_spins)?;
    let mut sq = 0.0;
    let mut count = 0usize;
    let mut worst = 1.0f64;
    for (&(label, j), series) in &samples.series {
        if series.len() != grid.len() {
            return Err(DropsError::Invalid(format!(
                "series ({label}, {j}) has {} samples for a grid of {} nodes",
                series.len(),
                grid.len()
            )));
        }
        for (s, &(beta, alpha)) in series.iter().zip(&grid.nodes) {
            if (s.beta - beta).abs() > 1e-9 || (s.alpha - alpha).abs() > 1e-9 {
                return Err(DropsError::Invalid(format!(
                    "sample at ({}, {}) does not match grid node ({beta}, {alpha})",
                    s.beta, s.alpha
                )));
            }
        }
        let values: Vec<C64> = series.iter().map(|s| s.value).collect();
        let report = fit_coefficients(&values, grid, label, &[j], samples.n_spins)?;
        for (idx, c) in report.coefficients.iter() {
            coefficients.insert(*idx, *c)?;
        }
        sq += report.residual_rms.powi(2) * series.len() as f64;
        count += series.len();
        worst = worst.max(report.condition_number);
    }
    Ok(FitReport {
        coefficients,
        residual_rms: if count == 0 { 0.0 } else { (sq / count as f64).sqrt() },
        condition_number: worst,
    })
}
