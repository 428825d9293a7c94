use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimation::design::DesignMatrix;
use crate::estimation::fit::{ModelFit, ModelKind, Param, ParamRole};

/// Relative residual norm below which a column counts as a linear
/// combination of the columns before it.
const COLLINEAR_TOL: f64 = 1e-9;

/// Names of columns that are linear combinations of earlier ones, found by
/// modified Gram-Schmidt. Empty iff `x` has full column rank.
pub fn collinear_columns(x: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut bad = Vec::new();
    for j in 0..x.ncols() {
        let orig = x.column(j).into_owned();
        let norm = orig.norm();
        let mut v = orig;
        for q in &basis {
            let c = q.dot(&v);
            v.axpy(-c, q, 1.0);
        }
        let rest = v.norm();
        if norm == 0.0 || rest <= COLLINEAR_TOL * norm.max(1.0) {
            bad.push(names[j].clone());
        } else {
            basis.push(v / rest);
        }
    }
    bad
}

/// Ordinary least squares with classical covariance.
#[derive(Debug, Clone)]
pub struct Ols {
    pub coefficients: DVector<f64>,
    pub fitted: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    pub tss: f64,
    /// `(X'X)^-1`.
    pub xtx_inv: DMatrix<f64>,
    pub df_residual: usize,
}

impl Ols {
    pub fn sigma2(&self) -> f64 {
        if self.df_residual == 0 {
            0.0
        } else {
            self.rss / self.df_residual as f64
        }
    }

    pub fn r_squared(&self) -> f64 {
        if self.tss <= 0.0 {
            0.0
        } else {
            (1.0 - self.rss / self.tss).clamp(0.0, 1.0)
        }
    }
}

pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<Ols> {
    let bad = collinear_columns(x, names);
    if !bad.is_empty() {
        return Err(Error::RankDeficient(bad));
    }
    let n = x.nrows();
    let p = x.ncols();
    let xtx = x.transpose() * x;
    let chol = xtx
        .clone()
        .cholesky()
        .ok_or_else(|| Error::RankDeficient(names.to_vec()))?;
    let xtx_inv = chol.inverse();
    let coefficients = chol.solve(&(x.transpose() * y));
    let fitted = x * &coefficients;
    let residuals = y - &fitted;
    let rss = residuals.norm_squared();
    let ybar = y.mean();
    let tss = y.iter().map(|v| (v - ybar).powi(2)).sum();
    Ok(Ols {
        coefficients,
        fitted,
        residuals,
        rss,
        tss,
        xtx_inv,
        df_residual: n.saturating_sub(p),
    })
}

/// Linear probability model: OLS of the 0/1 response on an intercept and the
/// design columns.
pub fn fit_linear_probability(design: &DesignMatrix) -> Result<ModelFit> {
    if design.n_obs() == 0 {
        return Err(Error::EmptyDesign(design.dropped));
    }
    let x = design.matrix(true);
    let mut names = vec![ModelFit::CONSTANT.to_string()];
    names.extend(design.column_names());
    let y = DVector::from_vec(design.response_f64());
    let fit = ols(&x, &y, &names)?;
    let s2 = fit.sigma2();
    let cov = &fit.xtx_inv * s2;
    let n = design.n_obs();
    let p = x.ncols();
    let r2 = fit.r_squared();
    let adj = if n > p {
        1.0 - (1.0 - r2) * (n - 1) as f64 / (n - p) as f64
    } else {
        r2
    };
    let params = names
        .iter()
        .enumerate()
        .map(|(j, name)| Param {
            name: name.clone(),
            role: if j == 0 {
                ParamRole::Intercept
            } else {
                ParamRole::Slope
            },
            estimate: fit.coefficients[j],
            std_error: cov[(j, j)].max(0.0).sqrt(),
        })
        .collect();
    Ok(ModelFit {
        kind: ModelKind::LinearProbability,
        params,
        covariance: cov,
        log_likelihood: None,
        aic: None,
        r_squared: Some(r2),
        adj_r_squared: Some(adj),
        residual_std_error: Some(s2.sqrt()),
        df_residual: Some(fit.df_residual),
        n_obs: n,
        levels: 2,
        iterations: 0,
        warnings: Vec::new(),
    })
}
