use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dist::two_sided_p;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    OrderedLogit,
    BinaryLogit,
    LinearProbability,
}

impl ModelKind {
    pub fn is_likelihood(self) -> bool {
        !matches!(self, ModelKind::LinearProbability)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamRole {
    Threshold,
    Intercept,
    Slope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub role: ParamRole,
    pub estimate: f64,
    pub std_error: f64,
}

impl Param {
    pub fn z(&self) -> f64 {
        self.estimate / self.std_error
    }

    pub fn p_value(&self) -> f64 {
        two_sided_p(self.z())
    }
}

/// A fitted model. `params` holds thresholds (ordered logit) or the
/// intercept first, then slopes in design-column order; `covariance` is
/// indexed the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit {
    pub kind: ModelKind,
    pub params: Vec<Param>,
    pub covariance: DMatrix<f64>,
    pub log_likelihood: Option<f64>,
    pub aic: Option<f64>,
    pub r_squared: Option<f64>,
    pub adj_r_squared: Option<f64>,
    pub residual_std_error: Option<f64>,
    pub df_residual: Option<usize>,
    pub n_obs: usize,
    /// Number of response categories.
    pub levels: u8,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub role: ParamRole,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
    pub odds_ratio: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub kind: ModelKind,
    pub n_obs: usize,
    pub coefficients: Vec<CoefficientRow>,
    pub log_likelihood: Option<f64>,
    pub aic: Option<f64>,
    pub r_squared: Option<f64>,
    pub adj_r_squared: Option<f64>,
    pub residual_std_error: Option<f64>,
    pub df_residual: Option<usize>,
    pub covariance: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddsRatio {
    pub name: String,
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub const Z_95: f64 = 1.959963984540054;

impl ModelFit {
    pub const CONSTANT: &'static str = "Constant";

    pub fn thresholds(&self) -> Vec<f64> {
        self.by_role(ParamRole::Threshold)
            .map(|p| p.estimate)
            .collect()
    }

    pub fn intercept(&self) -> Option<f64> {
        self.by_role(ParamRole::Intercept)
            .map(|p| p.estimate)
            .next()
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.by_role(ParamRole::Slope).map(|p| p.estimate).collect()
    }

    pub fn slope_names(&self) -> Vec<String> {
        self.by_role(ParamRole::Slope)
            .map(|p| p.name.clone())
            .collect()
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn by_role(&self, role: ParamRole) -> impl Iterator<Item = &Param> {
        self.params.iter().filter(move |p| p.role == role)
    }

    /// exp(beta) with a Wald 95% interval, for each slope.
    pub fn odds_ratios(&self) -> Vec<OddsRatio> {
        self.by_role(ParamRole::Slope)
            .map(|p| OddsRatio {
                name: p.name.clone(),
                odds_ratio: p.estimate.exp(),
                ci_low: (p.estimate - Z_95 * p.std_error).exp(),
                ci_high: (p.estimate + Z_95 * p.std_error).exp(),
            })
            .collect()
    }

    pub fn coefficient_table(&self) -> Vec<CoefficientRow> {
        let likelihood = self.kind.is_likelihood();
        self.params
            .iter()
            .map(|p| {
                let or = likelihood && p.role == ParamRole::Slope;
                CoefficientRow {
                    name: p.name.clone(),
                    role: p.role,
                    estimate: p.estimate,
                    std_error: p.std_error,
                    z: p.z(),
                    p_value: p.p_value(),
                    odds_ratio: or.then(|| p.estimate.exp()),
                    ci_low: or.then(|| (p.estimate - Z_95 * p.std_error).exp()),
                    ci_high: or.then(|| (p.estimate + Z_95 * p.std_error).exp()),
                }
            })
            .collect()
    }

    pub fn document(&self) -> FitDocument {
        FitDocument {
            kind: self.kind,
            n_obs: self.n_obs,
            coefficients: self.coefficient_table(),
            log_likelihood: self.log_likelihood,
            aic: self.aic,
            r_squared: self.r_squared,
            adj_r_squared: self.adj_r_squared,
            residual_std_error: self.residual_std_error,
            df_residual: self.df_residual,
            covariance: (0..self.covariance.nrows())
                .map(|i| self.covariance.row(i).iter().copied().collect())
                .collect(),
            warnings: self.warnings.clone(),
        }
    }
}

/// Alias kept for symmetry with the other free functions of the module.
pub fn odds_ratios(fit: &ModelFit) -> Vec<OddsRatio> {
    fit.odds_ratios()
}

/// Significance stars at the 0.1, 0.05 and 0.01 levels.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}
