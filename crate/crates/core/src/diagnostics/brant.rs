use nalgebra::{DMatrix, DVector};

use crate::dist::logistic;
use crate::error::{Error, Result};
use crate::estimation::{fit_binary_logit, DesignMatrix, ModelFit, ModelKind};

use super::{TestResult, VariableTest};

/// Wald test that each slope is equal across the `J - 1` binary logits of
/// `P(Y > j)`. The joint covariance of the stacked estimates uses
/// `Cov(b_j, b_m) = M_j X' diag(p_m - p_j p_m) X M_m` for `j < m`, where
/// `M_j` is the inverse information of equation `j`.
pub fn brant_test(design: &DesignMatrix, fit: &ModelFit) -> Result<TestResult> {
    if fit.kind != ModelKind::OrderedLogit || design.levels < 3 || design.binary {
        return Err(Error::Invalid(
            "the Brant test needs an ordered fit with at least three categories".into(),
        ));
    }
    let eqs = design.levels as usize - 1;
    let k = design.columns.len();
    if k == 0 {
        return Err(Error::Invalid(
            "the Brant test needs at least one covariate".into(),
        ));
    }
    let x = design.matrix(true);
    let n = design.n_obs();

    let mut coefs = Vec::with_capacity(eqs);
    let mut probs: Vec<DVector<f64>> = Vec::with_capacity(eqs);
    let mut inv_info = Vec::with_capacity(eqs);
    for j in 1..=eqs {
        let response = design
            .response
            .iter()
            .map(|&y| u8::from(y as usize > j))
            .collect();
        let sub = DesignMatrix::binary(response, design.columns.clone());
        let f = fit_binary_logit(&sub).map_err(|e| match e {
            Error::Separation { covariate, detail } => Error::Separation {
                covariate,
                detail: format!("{detail} in the binary split P(Y > {j})"),
            },
            other => other,
        })?;
        let theta = DVector::from_iterator(k + 1, f.params.iter().map(|p| p.estimate));
        let p = (&x * &theta).map(logistic);
        let mut xw = x.clone();
        for i in 0..n {
            xw.row_mut(i).scale_mut(p[i] * (1.0 - p[i]));
        }
        let info = x.transpose() * xw;
        let m = info
            .cholesky()
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "singular information in the binary split P(Y > {j})"
                ))
            })?
            .inverse();
        coefs.push(theta);
        probs.push(p);
        inv_info.push(m);
    }

    // Joint covariance of the slope blocks.
    let dim = eqs * k;
    let mut v = DMatrix::zeros(dim, dim);
    for j in 0..eqs {
        for m in j..eqs {
            let block = if j == m {
                inv_info[j].clone()
            } else {
                let mut xw = x.clone();
                for i in 0..n {
                    let w = probs[m][i] - probs[j][i] * probs[m][i];
                    xw.row_mut(i).scale_mut(w);
                }
                &inv_info[j] * (x.transpose() * xw) * &inv_info[m]
            };
            for r in 0..k {
                for c in 0..k {
                    v[(j * k + r, m * k + c)] = block[(r + 1, c + 1)];
                    v[(m * k + c, j * k + r)] = block[(r + 1, c + 1)];
                }
            }
        }
    }
    let beta = DVector::from_iterator(
        dim,
        coefs
            .iter()
            .flat_map(|t| t.iter().skip(1).copied().collect::<Vec<_>>()),
    );

    let wald = |vars: &[usize]| -> Result<(f64, usize)> {
        let rows = (eqs - 1) * vars.len();
        let mut d = DMatrix::zeros(rows, dim);
        let mut r = 0;
        for j in 1..eqs {
            for &l in vars {
                d[(r, l)] = 1.0;
                d[(r, j * k + l)] = -1.0;
                r += 1;
            }
        }
        let db = &d * &beta;
        let dvd = &d * &v * d.transpose();
        let sol = dvd
            .clone()
            .cholesky()
            .map(|c| c.solve(&db))
            .or_else(|| dvd.pseudo_inverse(1e-12).ok().map(|p| p * &db))
            .ok_or_else(|| Error::Invalid("singular Brant contrast covariance".into()))?;
        Ok((db.dot(&sol).max(0.0), rows))
    };

    let all: Vec<usize> = (0..k).collect();
    let (stat, df) = wald(&all)?;
    let mut result = TestResult::chi2("Brant", stat, df);
    for (l, col) in design.columns.iter().enumerate() {
        let (s, d) = wald(&[l])?;
        let t = TestResult::chi2(&col.name, s, d);
        result.per_variable.push(VariableTest {
            name: col.name.clone(),
            statistic: s,
            df: d,
            p_value: t.p_value,
        });
    }
    Ok(result)
}
