//! Damped Newton ascent for small dense likelihood problems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, IterationTrace, Result};

/// Objective value, gradient and Hessian at one point of the working
/// parameterization. `convergence_norm` is the max-norm of the gradient on the
/// natural scale, which is what the stopping rule looks at.
pub struct Evaluation {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub convergence_norm: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 100,
            gradient_tolerance: 1e-8,
            max_halvings: 60,
        }
    }
}

pub struct NewtonResult {
    pub params: DVector<f64>,
    pub evaluation: Evaluation,
    pub iterations: usize,
}

/// Ascent direction: Newton when `-H` is positive definite, otherwise a
/// Levenberg-shifted Newton system, falling back to the gradient itself.
fn ascent_direction(gradient: &DVector<f64>, hessian: &DMatrix<f64>) -> DVector<f64> {
    let neg = -hessian;
    if let Some(chol) = neg.clone().cholesky() {
        return chol.solve(gradient);
    }
    let scale = neg
        .diagonal()
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-8);
    let mut shift = 1e-6 * scale;
    for _ in 0..30 {
        let mut shifted = neg.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += shift;
        }
        if let Some(chol) = shifted.cholesky() {
            return chol.solve(gradient);
        }
        shift *= 10.0;
    }
    gradient.clone()
}

/// Maximizes an objective supplied as `evaluate(params)`; `value` returns
/// the objective alone (cheaper, used by the line search) and may return
/// `None` for points outside the domain.
pub fn newton_maximize<E, V>(
    mut evaluate: E,
    mut value: V,
    start: DVector<f64>,
    options: NewtonOptions,
) -> Result<NewtonResult>
where
    E: FnMut(&DVector<f64>) -> Option<Evaluation>,
    V: FnMut(&DVector<f64>) -> Option<f64>,
{
    let mut params = start;
    let mut current = evaluate(&params)
        .ok_or_else(|| Error::Invalid("starting values outside the likelihood domain".into()))?;
    let mut trace = Vec::new();

    for iteration in 0..=options.max_iterations {
        trace.push(IterationTrace {
            iteration,
            log_likelihood: current.value,
            gradient_norm: current.convergence_norm,
        });
        if current.convergence_norm < options.gradient_tolerance {
            return Ok(NewtonResult {
                params,
                evaluation: current,
                iterations: iteration,
            });
        }
        if iteration == options.max_iterations {
            break;
        }

        let direction = ascent_direction(&current.gradient, &current.hessian);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..options.max_halvings {
            let candidate = &params + &direction * step;
            if let Some(v) = value(&candidate) {
                // Ties are accepted so a flat objective near the optimum
                // cannot stall the final Newton step.
                if v.is_finite() && v >= current.value - 1e-12 * current.value.abs().max(1.0) {
                    accepted = Some(candidate);
                    break;
                }
            }
            step *= 0.5;
        }
        let Some(next) = accepted else {
            break;
        };
        params = next;
        current = match evaluate(&params) {
            Some(e) => e,
            None => break,
        };
    }

    Err(Error::NonConvergence {
        iterations: trace.len().saturating_sub(1),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximizes_concave_quadratic_in_one_step() {
        // f(x) = -(x - 3)^2 - 2 (y + 1)^2
        let eval = |p: &DVector<f64>| {
            let g = DVector::from_vec(vec![-2.0 * (p[0] - 3.0), -4.0 * (p[1] + 1.0)]);
            Some(Evaluation {
                value: -(p[0] - 3.0).powi(2) - 2.0 * (p[1] + 1.0).powi(2),
                convergence_norm: g.amax(),
                gradient: g,
                hessian: DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, -4.0])),
            })
        };
        let value = |p: &DVector<f64>| Some(-(p[0] - 3.0).powi(2) - 2.0 * (p[1] + 1.0).powi(2));
        let res =
            newton_maximize(eval, value, DVector::zeros(2), NewtonOptions::default()).unwrap();
        assert!((res.params[0] - 3.0).abs() < 1e-12);
        assert!((res.params[1] + 1.0).abs() < 1e-12);
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn non_concave_start_uses_shifted_direction() {
        // f(x) = -x^4/4 + x^2/2 has a local minimum at 0 (positive curvature)
        // and maxima at ±1.
        let f = |x: f64| -x.powi(4) / 4.0 + x * x / 2.0;
        let eval = |p: &DVector<f64>| {
            let x = p[0];
            let g = -x.powi(3) + x;
            Some(Evaluation {
                value: f(x),
                gradient: DVector::from_element(1, g),
                hessian: DMatrix::from_element(1, 1, -3.0 * x * x + 1.0),
                convergence_norm: g.abs(),
            })
        };
        let value = |p: &DVector<f64>| Some(f(p[0]));
        let res = newton_maximize(
            eval,
            value,
            DVector::from_element(1, 0.2),
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((res.params[0] - 1.0).abs() < 1e-8, "{}", res.params[0]);
    }

    #[test]
    fn reports_trace_on_non_convergence() {
        // Unbounded linear objective: never converges.
        let eval = |p: &DVector<f64>| {
            Some(Evaluation {
                value: p[0],
                gradient: DVector::from_element(1, 1.0),
                hessian: DMatrix::from_element(1, 1, 0.0),
                convergence_norm: 1.0,
            })
        };
        let value = |p: &DVector<f64>| Some(p[0]);
        let opts = NewtonOptions {
            max_iterations: 5,
            ..NewtonOptions::default()
        };
        match newton_maximize(eval, value, DVector::zeros(1), opts) {
            Err(Error::NonConvergence { iterations, trace }) => {
                assert_eq!(iterations, 5);
                assert_eq!(trace.len(), 6);
            }
            other => panic!(
                "expected non-convergence, got {:?}",
                other.map(|r| r.iterations)
            ),
        }
    }
}
