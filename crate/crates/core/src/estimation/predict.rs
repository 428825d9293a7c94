use serde::{Deserialize, Serialize};

use crate::dist::logistic;
use crate::error::{Error, Result};
use crate::estimation::design::DesignMatrix;
use crate::estimation::fit::{ModelFit, ModelKind};
use crate::estimation::ordered::category_probs;

/// `x'beta` for a covariate profile aligned with the fit's slopes, plus the
/// intercept where the model has one.
pub fn linear_predictor(fit: &ModelFit, profile: &[f64]) -> f64 {
    let slopes = fit.slopes();
    assert_eq!(
        slopes.len(),
        profile.len(),
        "profile must supply every covariate"
    );
    fit.intercept().unwrap_or(0.0) + slopes.iter().zip(profile).map(|(b, x)| b * x).sum::<f64>()
}

/// Category probabilities for one profile: `J` values for the ordered logit,
/// `[P(0), P(1)]` for binary models. Linear-probability predictions are
/// clamped to `[0, 1]`; see [`linear_predictor`] for the raw value.
pub fn predict_probs(fit: &ModelFit, profile: &[f64]) -> Vec<f64> {
    let eta = linear_predictor(fit, profile);
    match fit.kind {
        ModelKind::OrderedLogit => category_probs(&fit.thresholds(), eta),
        ModelKind::BinaryLogit => {
            let p = logistic(eta);
            vec![1.0 - p, p]
        }
        ModelKind::LinearProbability => {
            let p = eta.clamp(0.0, 1.0);
            vec![1.0 - p, p]
        }
    }
}

fn align(fit: &ModelFit, design: &DesignMatrix) -> Result<Vec<usize>> {
    fit.slope_names()
        .iter()
        .map(|n| {
            design
                .column_index(n)
                .ok_or_else(|| Error::Invalid(format!("design lacks fitted covariate `{n}`")))
        })
        .collect()
}

/// Category probabilities for every row of `design`.
pub fn observation_probs(fit: &ModelFit, design: &DesignMatrix) -> Result<Vec<Vec<f64>>> {
    let idx = align(fit, design)?;
    Ok((0..design.n_obs())
        .map(|i| {
            let profile: Vec<f64> = idx.iter().map(|&c| design.columns[c].values[i]).collect();
            predict_probs(fit, &profile)
        })
        .collect())
}

/// Column means of the fitted covariates; for indicators that is the
/// sample share.
pub fn mean_profile(fit: &ModelFit, design: &DesignMatrix) -> Result<Vec<f64>> {
    let idx = align(fit, design)?;
    Ok(idx
        .iter()
        .map(|&c| crate::stats::mean(&design.columns[c].values))
        .collect())
}

/// Evenly spaced points over the observed range of a column.
pub fn observed_grid(design: &DesignMatrix, column: &str, points: usize) -> Result<Vec<f64>> {
    let col = design
        .column(column)
        .ok_or_else(|| Error::Invalid(format!("design has no column `{column}`")))?;
    let lo = col.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if points < 2 || lo == hi {
        return Ok(vec![lo]);
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityCurve {
    pub kind: ModelKind,
    pub column: String,
    pub grid: Vec<f64>,
    /// `probs[g][j]`: probability of category `j` at grid point `g`.
    pub probs: Vec<Vec<f64>>,
}

impl ProbabilityCurve {
    /// Probability of the highest category along the grid.
    pub fn top(&self) -> Vec<f64> {
        self.probs.iter().map(|p| *p.last().unwrap()).collect()
    }
}

/// Probabilities along `grid` for `column`, every other covariate held at
/// its mean.
pub fn predict_curve(
    fit: &ModelFit,
    design: &DesignMatrix,
    column: &str,
    grid: &[f64],
) -> Result<ProbabilityCurve> {
    let mut profile = mean_profile(fit, design)?;
    let pos = fit
        .slope_names()
        .iter()
        .position(|n| n == column)
        .ok_or_else(|| Error::Invalid(format!("fit has no covariate `{column}`")))?;
    let probs = grid
        .iter()
        .map(|&v| {
            profile[pos] = v;
            predict_probs(fit, &profile)
        })
        .collect();
    Ok(ProbabilityCurve {
        kind: fit.kind,
        column: column.to_string(),
        grid: grid.to_vec(),
        probs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::fit::{Param, ParamRole};
    use nalgebra::DMatrix;

    fn ordered(beta: f64) -> ModelFit {
        let mut params: Vec<Param> = [-1.0, 0.0, 1.5]
            .iter()
            .enumerate()
            .map(|(j, &a)| Param {
                name: format!("t{j}"),
                role: ParamRole::Threshold,
                estimate: a,
                std_error: 0.1,
            })
            .collect();
        params.push(Param {
            name: "Load".into(),
            role: ParamRole::Slope,
            estimate: beta,
            std_error: 0.01,
        });
        ModelFit {
            kind: ModelKind::OrderedLogit,
            params,
            covariance: DMatrix::identity(4, 4),
            log_likelihood: None,
            aic: None,
            r_squared: None,
            adj_r_squared: None,
            residual_std_error: None,
            df_residual: None,
            n_obs: 0,
            levels: 4,
            iterations: 0,
            warnings: vec![],
        }
    }

    #[test]
    fn flat_curve_at_zero_slope() {
        let d = DesignMatrix::ordinal(
            vec![1, 2, 3, 4],
            4,
            vec![crate::estimation::Column::continuous(
                "Load",
                vec![1.0, 5.0, 9.0, 30.0],
            )],
        );
        let grid = observed_grid(&d, "Load", 11).unwrap();
        let c = predict_curve(&ordered(0.0), &d, "Load", &grid).unwrap();
        for p in &c.probs {
            assert_eq!(p, &c.probs[0]);
        }
        let c = predict_curve(&ordered(-0.05), &d, "Load", &grid).unwrap();
        let top = c.top();
        assert!(top.windows(2).all(|w| w[1] < w[0]));
        for p in &c.probs {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}
