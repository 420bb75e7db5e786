//! Empirical order-of-convergence studies.
//!
//! For each trial instance and each step `t`, the selected predictor is run
//! on `A + tF` and compared with the oracle. A least-squares line through
//! `(ln t, ln error)` gives the observed order; the study reports the worst
//! trial.

use std::fmt::Write as _;

use crate::alignment::{blockwise_diagonalize, conjugate_to_eigenbasis, m_matrix};
use crate::error::{PerturbError, Result};
use crate::first_order::{approx_decomposition_residual, first_order_eigenvalues};
use crate::harness::compare::align_columns;
use crate::harness::ensemble::{generate_instance, EnsembleConfig, Instance, Predictor};
use crate::jacobi::{self, SpectralDecomposition};
use crate::matrix::{operator_norm, DenseMatrix, HermitianMatrix};
use crate::rayleigh::LineExpansion;
use crate::schur::{refined_eigenvalues, SchurVariant};

/// Errors at or below `NOISE_FLOOR_FACTOR * ε * max(1, ‖A‖)` are excluded
/// from slope fits.
pub const NOISE_FLOOR_FACTOR: f64 = 1e3;
/// A trial whose noise-floor filter drops more than this many grid points
/// aborts the study.
pub const MAX_FILTERED_POINTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub trial: usize,
    pub t: f64,
    /// Worst-case error (max over indices for eigenvalue metrics).
    pub error: f64,
    /// Mean over indices for eigenvalue metrics; equals `error` otherwise.
    pub mean_error: f64,
    /// Errors at or below this value are treated as rounding noise.
    pub noise_floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `ln error = intercept + slope * ln t`.
pub fn fit_power_law(ts: &[f64], errors: &[f64]) -> Result<PowerLawFit> {
    if ts.len() != errors.len() || ts.len() < 2 {
        return Err(PerturbError::Study(format!(
            "need at least two points to fit a slope, got {}",
            ts.len().min(errors.len())
        )));
    }
    if ts.iter().chain(errors).any(|&v| v.is_nan() || v <= 0.0) {
        return Err(PerturbError::Study("log-log fit needs positive values".into()));
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(PerturbError::Study("step sizes must be distinct".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Fits one trial's samples after dropping points at the noise floor.
pub fn fit_samples(samples: &[Sample]) -> Result<PowerLawFit> {
    let kept: Vec<&Sample> = samples.iter().filter(|s| s.error > s.noise_floor).collect();
    let dropped = samples.len() - kept.len();
    if dropped > MAX_FILTERED_POINTS || kept.len() < 2 {
        return Err(PerturbError::Study(format!(
            "noise floor removed {dropped} of {} points",
            samples.len()
        )));
    }
    let ts: Vec<f64> = kept.iter().map(|s| s.t).collect();
    let es: Vec<f64> = kept.iter().map(|s| s.error).collect();
    fit_power_law(&ts, &es)
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Max and mean absolute difference after sorting both non-increasingly.
pub fn eigenvalue_error(predicted: &[f64], oracle: &[f64]) -> (f64, f64) {
    let p = sorted_desc(predicted);
    let o = sorted_desc(oracle);
    let diffs: Vec<f64> = p.iter().zip(&o).map(|(a, b)| (a - b).abs()).collect();
    let max = diffs.iter().copied().fold(0.0, f64::max);
    let mean = diffs.iter().sum::<f64>() / diffs.len().max(1) as f64;
    (max, mean)
}

fn perturbed(a: &HermitianMatrix, f: &HermitianMatrix, t: f64) -> HermitianMatrix {
    a.add(&f.scale(t))
}

/// Aligned oracle eigenvectors of `A + tF` minus `prediction`, in the
/// operator norm.
pub fn eigenvector_error(
    oracle: &SpectralDecomposition,
    prediction: &DenseMatrix,
    clusters: &[std::ops::Range<usize>],
) -> f64 {
    let aligned = align_columns(&oracle.u, prediction, clusters);
    operator_norm(&(&aligned - prediction))
}

/// Runs one predictor on a fixed instance over `t_grid`.
pub fn instance_errors(
    predictor: Predictor,
    inst: &Instance,
    t_grid: &[f64],
    trial: usize,
) -> Result<Vec<Sample>> {
    let base = jacobi::eigh_default(&inst.a)?;
    let scale = base.lambda.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let floor = NOISE_FLOOR_FACTOR * f64::EPSILON * scale;

    // Line quantities depend only on F, so build them once.
    let line = match predictor {
        Predictor::RsSecondOrder | Predictor::EigvecFirstOrder | Predictor::EigvecDifferenceQuotient => {
            let ap = blockwise_diagonalize(&conjugate_to_eigenbasis(&base, &inst.f)?)?;
            let m = m_matrix(&ap.base, &ap.blocks);
            let exp = LineExpansion::new(&ap, &m);
            // The eigenvalue expansion does not need strictly separated
            // in-block directions; only the eigenvector predictors do.
            match (predictor, exp) {
                (_, Ok(e)) => Some((ap, Some(e))),
                (Predictor::RsSecondOrder, Err(_)) => Some((ap, None)),
                (_, Err(e)) => return Err(e),
            }
        }
        _ => None,
    };

    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let h = perturbed(&inst.a, &inst.f, t);
        let oracle = jacobi::eigh_default(&h)?;
        let (error, mean_error, noise_floor) = match predictor {
            Predictor::FirstOrder => {
                let ap = blockwise_diagonalize(&conjugate_to_eigenbasis(&base, &inst.f.scale(t))?)?;
                let (mx, mn) = eigenvalue_error(&first_order_eigenvalues(&ap)?, &oracle.lambda);
                (mx, mn, floor)
            }
            Predictor::SchurFull | Predictor::SchurSimplified => {
                let variant = if predictor == Predictor::SchurFull {
                    SchurVariant::Full
                } else {
                    SchurVariant::Simplified
                };
                let ap = conjugate_to_eigenbasis(&base, &inst.f.scale(t))?;
                let (mx, mn) = eigenvalue_error(&refined_eigenvalues(&ap, variant)?, &oracle.lambda);
                (mx, mn, floor)
            }
            Predictor::RsSecondOrder => {
                let (ap, _) = line.as_ref().expect("line expansion built");
                let coeffs = crate::rayleigh::rs_coefficients(ap)?;
                let (mx, mn) = eigenvalue_error(&coeffs.evaluate(t), &oracle.lambda);
                (mx, mn, floor)
            }
            Predictor::EigvecFirstOrder | Predictor::EigvecDifferenceQuotient => {
                let (ap, exp) = line.as_ref().expect("line expansion built");
                let exp = exp.as_ref().expect("eigenvector expansion built");
                let pred = exp.predict(ap, t)?;
                let err = eigenvector_error(&oracle, &pred.u_hat, &ap.blocks.groups);
                if predictor == Predictor::EigvecFirstOrder {
                    (err, err, floor)
                } else {
                    (err / t, err / t, floor / t)
                }
            }
            Predictor::UApResidual => {
                let ap = blockwise_diagonalize(&conjugate_to_eigenbasis(&base, &inst.f.scale(t))?)?;
                let m = m_matrix(&ap.base, &ap.blocks);
                let r = approx_decomposition_residual(&ap, &m)?;
                (r, r, floor)
            }
        };
        out.push(Sample {
            trial,
            t,
            error,
            mean_error,
            noise_floor,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrialFit {
    pub trial: usize,
    pub fit: PowerLawFit,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub predictor: Predictor,
    /// All samples, sorted by `(trial, t)` descending in `t`.
    pub samples: Vec<Sample>,
    pub trial_fits: Vec<TrialFit>,
    /// Fit of the trial with the smallest slope.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub worst_trial: usize,
    pub failures: Vec<(usize, PerturbError)>,
}

impl ConvergenceReport {
    pub fn mean_slope(&self) -> f64 {
        self.trial_fits.iter().map(|f| f.fit.slope).sum::<f64>() / self.trial_fits.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,t,error\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{:e},{:e}", s.trial, s.t, s.error);
        }
        let _ = writeln!(out, "# slope={} r2={}", self.slope, self.r_squared);
        out
    }
}

pub fn convergence_study(cfg: &EnsembleConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let mut samples = Vec::new();
    let mut trial_fits = Vec::new();
    let mut failures = Vec::new();
    for trial in 0..cfg.trials {
        let inst = generate_instance(cfg, trial);
        match instance_errors(cfg.predictor, &inst, &cfg.t_grid, trial) {
            Ok(s) => {
                let fit = fit_samples(&s)?;
                trial_fits.push(TrialFit { trial, fit });
                samples.extend(s);
            }
            Err(e) if e.is_numerical_precondition() => failures.push((trial, e)),
            Err(e) => return Err(e),
        }
    }
    if 2 * failures.len() > cfg.trials {
        return Err(PerturbError::Study(format!(
            "{} of {} trials failed their preconditions",
            failures.len(),
            cfg.trials
        )));
    }
    let worst = trial_fits
        .iter()
        .min_by(|a, b| a.fit.slope.total_cmp(&b.fit.slope))
        .ok_or_else(|| PerturbError::Study("no successful trials".into()))?
        .clone();
    samples.sort_by(|a, b| a.trial.cmp(&b.trial).then(b.t.total_cmp(&a.t)));
    Ok(ConvergenceReport {
        predictor: cfg.predictor,
        samples,
        slope: worst.fit.slope,
        intercept: worst.fit.intercept,
        r_squared: worst.fit.r_squared,
        worst_trial: worst.trial,
        trial_fits,
        failures,
    })
}
