use nalgebra::{DMatrix, DVector};

use crate::dist::logistic;
use crate::error::{Error, Result};
use crate::estimation::design::DesignMatrix;
use crate::estimation::fit::{ModelFit, ModelKind, Param, ParamRole};
use crate::estimation::linear::collinear_columns;
use crate::estimation::optim::{newton_maximize, Evaluation, NewtonOptions};
use crate::estimation::ordered::invert_information;
use crate::estimation::separation::{binary_separation, check_divergence};

/// Logistic log-likelihood with `theta = (intercept, beta)`.
#[derive(Debug, Clone)]
pub struct BinaryLikelihood {
    y: Vec<f64>,
    x: DMatrix<f64>,
}

/// `ln F(z)` without cancellation for large |z|.
fn log_logistic(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

impl BinaryLikelihood {
    /// `x` must already carry the intercept column.
    pub fn new(y: Vec<f64>, x: DMatrix<f64>) -> Self {
        assert_eq!(y.len(), x.nrows());
        BinaryLikelihood { y, x }
    }

    pub fn from_design(design: &DesignMatrix) -> Self {
        BinaryLikelihood::new(design.response_f64(), design.matrix(true))
    }

    pub fn n_params(&self) -> usize {
        self.x.ncols()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let eta = &self.x * DVector::from_column_slice(theta);
        self.y
            .iter()
            .zip(eta.iter())
            .map(|(&y, &e)| y * log_logistic(e) + (1.0 - y) * log_logistic(-e))
            .sum()
    }

    pub fn gradient(&self, theta: &[f64]) -> DVector<f64> {
        let eta = &self.x * DVector::from_column_slice(theta);
        let r = DVector::from_iterator(
            self.y.len(),
            self.y
                .iter()
                .zip(eta.iter())
                .map(|(&y, &e)| y - logistic(e)),
        );
        self.x.transpose() * r
    }

    pub fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let eta = &self.x * DVector::from_column_slice(theta);
        let mut xw = self.x.clone();
        for (i, e) in eta.iter().enumerate() {
            let p = logistic(*e);
            let w = p * (1.0 - p);
            xw.row_mut(i).scale_mut(w);
        }
        -(self.x.transpose() * xw)
    }
}

pub fn fit_binary_logit(design: &DesignMatrix) -> Result<ModelFit> {
    fit_binary_logit_with(design, NewtonOptions::default())
}

pub fn fit_binary_logit_with(design: &DesignMatrix, options: NewtonOptions) -> Result<ModelFit> {
    if !design.binary {
        return Err(Error::Invalid("binary logit needs a 0/1 response".into()));
    }
    design.check_response()?;
    let mut names = vec![ModelFit::CONSTANT.to_string()];
    names.extend(design.column_names());
    let bad = collinear_columns(&design.matrix(true), &names);
    if !bad.is_empty() {
        return Err(Error::RankDeficient(bad));
    }
    binary_separation(design)?;

    let lik = BinaryLikelihood::from_design(design);
    let ybar = design.response_f64().iter().sum::<f64>() / design.n_obs() as f64;
    let mut start = DVector::zeros(lik.n_params());
    start[0] = (ybar / (1.0 - ybar)).ln();
    let result = newton_maximize(
        |t| {
            let g = lik.gradient(t.as_slice());
            let norm = g.amax();
            Some(Evaluation {
                value: lik.value(t.as_slice()),
                gradient: g,
                hessian: lik.hessian(t.as_slice()),
                convergence_norm: norm,
            })
        },
        |t| {
            let v = lik.value(t.as_slice());
            v.is_finite().then_some(v)
        },
        start,
        options,
    )?;
    let theta = result.params.as_slice().to_vec();
    check_divergence(design, Some(&theta[1..]))?;
    let ll = lik.value(&theta);
    let (covariance, warnings) = invert_information(&(-lik.hessian(&theta)));
    let params: Vec<Param> = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| Param {
            name,
            role: if j == 0 {
                ParamRole::Intercept
            } else {
                ParamRole::Slope
            },
            estimate: theta[j],
            std_error: covariance[(j, j)].max(0.0).sqrt(),
        })
        .collect();
    let k = params.len();
    Ok(ModelFit {
        kind: ModelKind::BinaryLogit,
        params,
        covariance,
        log_likelihood: Some(ll),
        aic: Some(2.0 * k as f64 - 2.0 * ll),
        r_squared: None,
        adj_r_squared: None,
        residual_std_error: None,
        df_residual: None,
        n_obs: design.n_obs(),
        levels: 2,
        iterations: result.iterations,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::design::Column;
    use crate::estimation::ordered::fit_ordered_logit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(n: usize, b0: f64, b1: f64, seed: u64) -> DesignMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let y = x
            .iter()
            .map(|v| u8::from(rng.random::<f64>() < logistic(b0 + b1 * v)))
            .collect();
        DesignMatrix::binary(y, vec![Column::continuous("x", x)])
    }

    #[test]
    fn null_model_is_flat() {
        let d = sample(4000, 0.0, 0.0, 2);
        let fit = fit_binary_logit(&d).unwrap();
        for p in &fit.params {
            assert!(p.estimate.abs() < 3.0 * p.std_error, "{}", p.name);
        }
    }

    #[test]
    fn covariate_equal_to_response_separates() {
        let y = vec![0, 1, 1, 0, 1, 0, 0, 1];
        let x = y.iter().map(|&v| v as f64).collect();
        let d = DesignMatrix::binary(y, vec![Column::continuous("copy", x)]);
        assert!(
            matches!(fit_binary_logit(&d), Err(Error::Separation { covariate, .. }) if covariate == "copy")
        );
    }

    #[test]
    fn recovers_known_slope() {
        let d = sample(5000, -0.4, 0.9, 9);
        let fit = fit_binary_logit(&d).unwrap();
        let b = fit.param("x").unwrap();
        assert!((b.estimate - 0.9).abs() < 3.0 * b.std_error);
    }

    #[test]
    fn two_level_ordered_equals_binary() {
        let d = sample(1500, 0.3, -0.7, 4);
        let fit_b = fit_binary_logit(&d).unwrap();
        let mut ord = d.clone();
        ord.binary = false;
        ord.levels = 2;
        ord.response = d.response.iter().map(|y| y + 1).collect();
        let fit_o = fit_ordered_logit(&ord).unwrap();
        assert!((fit_o.slopes()[0] - fit_b.slopes()[0]).abs() < 1e-8);
        assert!((fit_o.thresholds()[0] + fit_b.intercept().unwrap()).abs() < 1e-8);
        assert!((fit_o.log_likelihood.unwrap() - fit_b.log_likelihood.unwrap()).abs() < 1e-8);
    }
}
