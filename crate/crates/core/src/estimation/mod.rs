//! Edge-level design matrices and the three model families: cumulative
//! logit, binary logit and the linear probability model.

pub mod binary;
pub mod design;
pub mod fit;
pub mod linear;
pub mod optim;
pub mod ordered;
pub mod predict;
pub mod separation;

pub use binary::{fit_binary_logit, BinaryLikelihood};
pub use design::{
    binarize_efficiency, build_design, Column, ColumnKind, Covariate, DesignMatrix, DesignSpec,
    Endpoint, ResponseCoding,
};
pub use fit::{
    odds_ratios, stars, CoefficientRow, FitDocument, ModelFit, ModelKind, OddsRatio, Param,
    ParamRole,
};
pub use linear::{fit_linear_probability, ols, Ols};
pub use ordered::{category_probs, cumulative_probs, fit_ordered_logit, OrderedLikelihood};
pub use predict::{
    linear_predictor, mean_profile, observation_probs, observed_grid, predict_curve, predict_probs,
    ProbabilityCurve,
};

use crate::error::Result;

/// Fits the model family named by `kind`. Ordinal designs are recoded to
/// top-box for the binary families.
pub fn fit_model(kind: ModelKind, design: &DesignMatrix) -> Result<ModelFit> {
    match kind {
        ModelKind::OrderedLogit => fit_ordered_logit(design),
        ModelKind::BinaryLogit if design.binary => fit_binary_logit(design),
        ModelKind::BinaryLogit => fit_binary_logit(&design.binarize()),
        ModelKind::LinearProbability if design.binary => fit_linear_probability(design),
        ModelKind::LinearProbability => fit_linear_probability(&design.binarize()),
    }
}
