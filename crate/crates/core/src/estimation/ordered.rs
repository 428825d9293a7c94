//! Cumulative (proportional-odds) logit.
//!
//! `P(Y <= j | x) = F(alpha_j - x'beta)` with `F` the logistic CDF, so a
//! positive coefficient shifts mass toward higher categories. The optimizer
//! works on `(alpha_1, ln(alpha_2 - alpha_1), ..., beta)` which keeps the
//! thresholds ordered; everything reported is on the natural scale.

use nalgebra::{DMatrix, DVector};

use crate::dist::{logistic, logistic_density, logit};
use crate::error::{Error, Result};
use crate::estimation::design::DesignMatrix;
use crate::estimation::fit::{ModelFit, ModelKind, Param, ParamRole};
use crate::estimation::linear::collinear_columns;
use crate::estimation::optim::{newton_maximize, Evaluation, NewtonOptions};
use crate::estimation::separation::{check_divergence, ordinal_separation};

/// Log-likelihood of the cumulative logit for responses `1..=levels`.
/// Parameters are `theta = (alpha_1..alpha_{J-1}, beta)` on the natural scale.
#[derive(Debug, Clone)]
pub struct OrderedLikelihood {
    y: Vec<u8>,
    x: DMatrix<f64>,
    levels: usize,
}

/// Probability of category `y` given thresholds, linear predictor and the
/// derivative pieces `(f(u), f(l), f'(u), f'(l))`; absent bounds give 0.
fn cell(alpha: &[f64], y: usize, eta: f64) -> (f64, [f64; 4]) {
    let levels = alpha.len() + 1;
    let upper = (y < levels).then(|| alpha[y - 1] - eta);
    let lower = (y > 1).then(|| alpha[y - 2] - eta);
    let p = match (lower, upper) {
        (None, Some(u)) => logistic(u),
        (Some(l), None) => logistic(-l),
        (Some(l), Some(u)) => {
            if l > 0.0 {
                logistic(-l) - logistic(-u)
            } else {
                logistic(u) - logistic(l)
            }
        }
        (None, None) => 1.0,
    };
    let d = |z: Option<f64>| {
        z.map_or((0.0, 0.0), |z| {
            let f = logistic_density(z);
            (f, f * (1.0 - 2.0 * logistic(z)))
        })
    };
    let (a, da) = d(upper);
    let (b, db) = d(lower);
    (p, [a, b, da, db])
}

impl OrderedLikelihood {
    pub fn new(y: Vec<u8>, x: DMatrix<f64>, levels: usize) -> Self {
        assert_eq!(y.len(), x.nrows());
        OrderedLikelihood { y, x, levels }
    }

    pub fn from_design(design: &DesignMatrix) -> Self {
        OrderedLikelihood::new(
            design.response.clone(),
            design.matrix(false),
            design.levels as usize,
        )
    }

    pub fn n_params(&self) -> usize {
        self.levels - 1 + self.x.ncols()
    }

    fn split<'a>(&self, theta: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        theta.split_at(self.levels - 1)
    }

    fn eta(&self, beta: &[f64], i: usize) -> f64 {
        beta.iter()
            .enumerate()
            .map(|(k, b)| self.x[(i, k)] * b)
            .sum()
    }

    /// `None` when a category probability underflows to zero.
    pub fn value(&self, theta: &[f64]) -> Option<f64> {
        let (alpha, beta) = self.split(theta);
        let mut ll = 0.0;
        for i in 0..self.y.len() {
            let (p, _) = cell(alpha, self.y[i] as usize, self.eta(beta, i));
            if !(p > 0.0) {
                return None;
            }
            ll += p.ln();
        }
        Some(ll)
    }

    pub fn gradient(&self, theta: &[f64]) -> Option<DVector<f64>> {
        self.derivatives(theta, false).map(|(_, g, _)| g)
    }

    pub fn hessian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        self.derivatives(theta, true).map(|(_, _, h)| h)
    }

    /// Value, gradient and (optionally) Hessian on the natural scale.
    pub fn derivatives(
        &self,
        theta: &[f64],
        with_hessian: bool,
    ) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
        let (alpha, beta) = self.split(theta);
        let m = self.levels - 1;
        let k = self.x.ncols();
        let dim = m + k;
        let mut ll = 0.0;
        let mut g = DVector::zeros(dim);
        let mut h = DMatrix::zeros(
            if with_hessian { dim } else { 0 },
            if with_hessian { dim } else { 0 },
        );
        for i in 0..self.y.len() {
            let y = self.y[i] as usize;
            let eta = self.eta(beta, i);
            let (p, [a, b, da, db]) = cell(alpha, y, eta);
            if !(p > 0.0) {
                return None;
            }
            ll += p.ln();
            // Local variables: (alpha_y, alpha_{y-1}, eta).
            let gl = [a / p, -b / p, -(a - b) / p];
            let idx = [(y < self.levels).then(|| y - 1), (y > 1).then(|| y - 2)];
            for (s, slot) in idx.iter().enumerate() {
                if let Some(j) = slot {
                    g[*j] += gl[s];
                }
            }
            for c in 0..k {
                g[m + c] += gl[2] * self.x[(i, c)];
            }
            if !with_hessian {
                continue;
            }
            let p2 = [[da, 0.0, -da], [0.0, -db, db], [-da, db, da - db]];
            let mut hl = [[0.0; 3]; 3];
            for r in 0..3 {
                for c in 0..3 {
                    hl[r][c] = p2[r][c] / p - gl[r] * gl[c];
                }
            }
            for r in 0..2 {
                let Some(jr) = idx[r] else { continue };
                for c in 0..2 {
                    if let Some(jc) = idx[c] {
                        h[(jr, jc)] += hl[r][c];
                    }
                }
                for c in 0..k {
                    let v = hl[r][2] * self.x[(i, c)];
                    h[(jr, m + c)] += v;
                    h[(m + c, jr)] += v;
                }
            }
            for r in 0..k {
                let xr = hl[2][2] * self.x[(i, r)];
                for c in 0..=r {
                    h[(m + r, m + c)] += xr * self.x[(i, c)];
                }
            }
        }
        if with_hessian {
            for r in 0..k {
                for c in 0..r {
                    h[(m + c, m + r)] = h[(m + r, m + c)];
                }
            }
        }
        Some((ll, g, h))
    }
}

/// Working-scale thresholds `(alpha_1, ln d_2, ...)` to natural thresholds.
fn natural_thresholds(c: &[f64]) -> Vec<f64> {
    let mut alpha = Vec::with_capacity(c.len());
    for (j, &v) in c.iter().enumerate() {
        alpha.push(if j == 0 { v } else { alpha[j - 1] + v.exp() });
    }
    alpha
}

fn to_natural(w: &DVector<f64>, m: usize) -> Vec<f64> {
    let mut theta = natural_thresholds(&w.as_slice()[..m]);
    theta.extend_from_slice(&w.as_slice()[m..]);
    theta
}

/// Chain rule from natural-scale derivatives to the working scale.
fn working_evaluation(
    ll: f64,
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    w: &DVector<f64>,
    m: usize,
) -> Evaluation {
    let dim = g.len();
    let mut t = DMatrix::identity(dim, dim);
    for j in 0..m {
        t[(j, 0)] = 1.0;
        for q in 1..=j {
            t[(j, q)] = w[q].exp();
        }
    }
    let gw = t.transpose() * g;
    let mut hw = t.transpose() * h * &t;
    for q in 1..m {
        let tail: f64 = (q..m).map(|j| g[j]).sum();
        hw[(q, q)] += w[q].exp() * tail;
    }
    Evaluation {
        value: ll,
        gradient: gw,
        hessian: hw,
        convergence_norm: g.amax(),
    }
}

pub fn threshold_names(levels: u8) -> Vec<String> {
    (1..levels).map(|j| format!("{}|{}", j, j + 1)).collect()
}

/// Maximum-likelihood cumulative logit. Accepts any `levels >= 2`; with two
/// levels it coincides with the binary logit up to the intercept's sign.
pub fn fit_ordered_logit(design: &DesignMatrix) -> Result<ModelFit> {
    fit_ordered_logit_with(design, NewtonOptions::default())
}

pub fn fit_ordered_logit_with(design: &DesignMatrix, options: NewtonOptions) -> Result<ModelFit> {
    if design.binary {
        return Err(Error::Invalid(
            "ordered logit needs an ordinal response coded 1..J".into(),
        ));
    }
    if design.levels < 2 {
        return Err(Error::Invalid(
            "ordered logit needs at least two categories".into(),
        ));
    }
    design.check_response()?;
    let names = design.column_names();
    let mut check_names = vec!["(thresholds)".to_string()];
    check_names.extend(names.iter().cloned());
    let bad = collinear_columns(&design.matrix(true), &check_names);
    if !bad.is_empty() {
        return Err(Error::RankDeficient(bad));
    }
    ordinal_separation(design)?;

    let lik = OrderedLikelihood::from_design(design);
    let m = design.levels as usize - 1;
    let n = design.n_obs() as f64;
    let mut counts = vec![0usize; design.levels as usize];
    for &y in &design.response {
        counts[y as usize - 1] += 1;
    }
    let mut cum = 0usize;
    let mut alpha0 = Vec::with_capacity(m);
    for &c in counts.iter().take(m) {
        cum += c;
        alpha0.push(logit(cum as f64 / n));
    }
    let mut start = DVector::zeros(lik.n_params());
    for j in 0..m {
        start[j] = if j == 0 {
            alpha0[0]
        } else {
            (alpha0[j] - alpha0[j - 1]).ln()
        };
    }

    let result = newton_maximize(
        |w| {
            let theta = to_natural(w, m);
            let (ll, g, h) = lik.derivatives(&theta, true)?;
            Some(working_evaluation(ll, &g, &h, w, m))
        },
        |w| lik.value(&to_natural(w, m)),
        start,
        options,
    );
    let result = match result {
        Ok(r) => r,
        Err(e @ Error::NonConvergence { .. }) => {
            return Err(check_divergence(design, None).err().unwrap_or(e));
        }
        Err(e) => return Err(e),
    };
    let theta = to_natural(&result.params, m);
    check_divergence(design, Some(&theta[m..]))?;

    let (ll, _, h) = lik
        .derivatives(&theta, true)
        .ok_or_else(|| Error::Invalid("likelihood undefined at the optimum".into()))?;
    let (covariance, warnings) = invert_information(&(-h));
    let mut pnames = threshold_names(design.levels);
    pnames.extend(names);
    let params = pnames
        .into_iter()
        .enumerate()
        .map(|(j, name)| Param {
            name,
            role: if j < m {
                ParamRole::Threshold
            } else {
                ParamRole::Slope
            },
            estimate: theta[j],
            std_error: covariance[(j, j)].max(0.0).sqrt(),
        })
        .collect::<Vec<_>>();
    let k = params.len();
    Ok(ModelFit {
        kind: ModelKind::OrderedLogit,
        params,
        covariance,
        log_likelihood: Some(ll),
        aic: Some(2.0 * k as f64 - 2.0 * ll),
        r_squared: None,
        adj_r_squared: None,
        residual_std_error: None,
        df_residual: None,
        n_obs: design.n_obs(),
        levels: design.levels,
        iterations: result.iterations,
        warnings,
    })
}

/// Inverse of the observed information, symmetrized. Falls back to a
/// pseudo-inverse with a warning when the information is singular.
pub(crate) fn invert_information(info: &DMatrix<f64>) -> (DMatrix<f64>, Vec<String>) {
    let mut warnings = Vec::new();
    let inv = match info.clone().cholesky() {
        Some(c) => c.inverse(),
        None => {
            warnings.push(
                "observed information is not positive definite; using a pseudo-inverse".into(),
            );
            info.clone()
                .pseudo_inverse(1e-12)
                .unwrap_or_else(|_| DMatrix::from_element(info.nrows(), info.ncols(), f64::NAN))
        }
    };
    let sym = (&inv + inv.transpose()) * 0.5;
    (sym, warnings)
}

/// Category probabilities `p_1..p_J` for one linear predictor.
pub fn category_probs(thresholds: &[f64], eta: f64) -> Vec<f64> {
    (1..=thresholds.len() + 1)
        .map(|y| cell(thresholds, y, eta).0)
        .collect()
}

/// Cumulative probabilities `P(Y <= j)` for `j = 1..J`.
pub fn cumulative_probs(thresholds: &[f64], eta: f64) -> Vec<f64> {
    let mut c: Vec<f64> = thresholds.iter().map(|a| logistic(a - eta)).collect();
    c.push(1.0);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::design::Column;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(n: usize, alpha: &[f64], beta: &[f64], seed: u64) -> DesignMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = beta.len();
        let cols: Vec<Vec<f64>> = (0..k)
            .map(|c| {
                (0..n)
                    .map(|_| {
                        if c == 0 {
                            rng.random::<f64>() * 2.0 - 1.0
                        } else {
                            f64::from(u8::from(rng.random::<f64>() < 0.4))
                        }
                    })
                    .collect()
            })
            .collect();
        let y = (0..n)
            .map(|i| {
                let eta: f64 = (0..k).map(|c| cols[c][i] * beta[c]).sum();
                let u: f64 = rng.random();
                let cum = cumulative_probs(alpha, eta);
                (cum.iter().position(|&c| u <= c).unwrap() + 1) as u8
            })
            .collect();
        let columns = cols
            .into_iter()
            .enumerate()
            .map(|(c, v)| Column::continuous(format!("x{c}"), v))
            .collect();
        DesignMatrix::ordinal(y, alpha.len() as u8 + 1, columns)
    }

    #[test]
    fn intercept_only_matches_cumulative_logits() {
        let y: Vec<u8> = [1, 1, 2, 2, 2, 3, 3, 3, 3, 3].to_vec();
        let d = DesignMatrix::ordinal(y, 3, vec![]);
        let fit = fit_ordered_logit(&d).unwrap();
        let a = fit.thresholds();
        assert!((a[0] - logit(0.2)).abs() < 1e-8);
        assert!((a[1] - logit(0.5)).abs() < 1e-8);
    }

    #[test]
    fn recovers_known_parameters() {
        let alpha = [-1.5, -0.3, 0.6, 1.8];
        let beta = [0.8, -0.5];
        let d = sample(4000, &alpha, &beta, 7);
        let fit = fit_ordered_logit(&d).unwrap();
        let truth: Vec<f64> = alpha.iter().chain(beta.iter()).copied().collect();
        for (p, t) in fit.params.iter().zip(truth) {
            assert!(
                (p.estimate - t).abs() < 3.5 * p.std_error,
                "{} {} {}",
                p.name,
                p.estimate,
                t
            );
        }
        let a = fit.thresholds();
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!((fit.aic.unwrap() - (2.0 * 6.0 - 2.0 * fit.log_likelihood.unwrap())).abs() < 1e-9);
    }

    #[test]
    fn optimum_is_local_max() {
        let d = sample(800, &[-1.0, 0.0, 1.0], &[0.5, 0.3], 3);
        let fit = fit_ordered_logit(&d).unwrap();
        let lik = OrderedLikelihood::from_design(&d);
        let theta: Vec<f64> = fit.params.iter().map(|p| p.estimate).collect();
        let best = lik.value(&theta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let t: Vec<f64> = theta
                .iter()
                .map(|v| v + (rng.random::<f64>() - 0.5) * 0.02)
                .collect();
            assert!(lik.value(&t).unwrap() <= best + 1e-12);
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let d = sample(300, &[-0.5, 0.7], &[0.4, -0.2], 5);
        let lik = OrderedLikelihood::from_design(&d);
        let theta = [-0.4, 0.9, 0.1, 0.3];
        let h = lik.hessian(&theta).unwrap();
        for j in 0..4 {
            let mut up = theta;
            let mut dn = theta;
            up[j] += 1e-5;
            dn[j] -= 1e-5;
            let fd = (lik.gradient(&up).unwrap() - lik.gradient(&dn).unwrap()) / 2e-5;
            for r in 0..4 {
                assert!((fd[r] - h[(r, j)]).abs() < 1e-4 * (1.0 + h[(r, j)].abs()));
            }
        }
    }

    #[test]
    fn dummy_separation_is_reported() {
        let x = vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let y = vec![1, 2, 3, 1, 3, 3, 2, 2, 3];
        let d = DesignMatrix::ordinal(y, 3, vec![Column::dummy("flag", "g", x)]);
        match fit_ordered_logit(&d) {
            Err(Error::Separation { covariate, .. }) => assert_eq!(covariate, "flag"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn probabilities_are_normalized() {
        let a = [-2.0, -0.5, 0.1, 3.0];
        for eta in [-40.0, -3.0, 0.0, 0.2, 5.0, 40.0] {
            let p = category_probs(&a, eta);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
