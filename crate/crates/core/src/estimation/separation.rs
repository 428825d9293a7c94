//! Detection of (quasi-)complete separation, where the likelihood has no
//! finite maximizer.

use crate::error::{Error, Result};
use crate::estimation::design::DesignMatrix;
use crate::stats::sample_sd;

/// A fitted slope times its column's standard deviation above this is
/// treated as divergence toward infinity.
const DIVERGENCE_LIMIT: f64 = 30.0;

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

fn is_indicator(values: &[f64]) -> bool {
    values.iter().all(|&v| v == 0.0 || v == 1.0)
}

/// Binary response: a column separates when the two classes' ranges touch
/// at most at one point.
pub fn binary_separation(design: &DesignMatrix) -> Result<()> {
    let positive = if design.binary { 1 } else { design.levels };
    for col in &design.columns {
        let pick = |cls: bool| {
            extent(
                col.values
                    .iter()
                    .zip(&design.response)
                    .filter(move |(_, &y)| (y == positive) == cls)
                    .map(|(&v, _)| v),
            )
        };
        let (Some((lo0, hi0)), Some((lo1, hi1))) = (pick(false), pick(true)) else {
            continue;
        };
        if lo0 == hi0 && lo1 == hi1 && lo0 == lo1 {
            continue;
        }
        if hi0 <= lo1 || hi1 <= lo0 {
            return Err(Error::Separation {
                covariate: col.name.clone(),
                detail: "the binary outcome".into(),
            });
        }
    }
    Ok(())
}

/// Ordinal response coded `1..=J`.
///
/// An indicator separates when one of its groups sits entirely in an
/// extreme category. A continuous column separates when the bottom and top
/// categories lie on opposite sides of a point `c` and every middle
/// category sits exactly at `c`.
pub fn ordinal_separation(design: &DesignMatrix) -> Result<()> {
    if design.levels == 2 {
        return binary_separation(design);
    }
    let top = design.levels;
    for col in &design.columns {
        let sep = |detail: String| Error::Separation {
            covariate: col.name.clone(),
            detail,
        };
        if is_indicator(&col.values) {
            for v in [0.0, 1.0] {
                let group: Vec<u8> = col
                    .values
                    .iter()
                    .zip(&design.response)
                    .filter(|(&x, _)| x == v)
                    .map(|(_, &y)| y)
                    .collect();
                if group.is_empty() || group.len() == design.n_obs() {
                    continue;
                }
                for extreme in [1, top] {
                    if group.iter().all(|&y| y == extreme) {
                        return Err(sep(format!("category {extreme} when it equals {v}")));
                    }
                }
            }
            continue;
        }
        let range = |pred: &dyn Fn(u8) -> bool| {
            extent(
                col.values
                    .iter()
                    .zip(&design.response)
                    .filter(|(_, &y)| pred(y))
                    .map(|(&v, _)| v),
            )
        };
        let (Some(bottom), Some(upper)) = (range(&|y| y == 1), range(&|y| y == top)) else {
            continue;
        };
        let mid = range(&|y| y > 1 && y < top);
        let split = |lo: (f64, f64), hi: (f64, f64)| {
            lo.1 <= hi.0 && mid.is_none_or(|(a, b)| a == b && a >= lo.1 && b <= hi.0)
        };
        if split(bottom, upper) || split(upper, bottom) {
            return Err(sep("the extreme categories".into()));
        }
    }
    Ok(())
}

/// Flags slopes that ran off toward infinity during an otherwise
/// converged fit.
pub fn check_divergence(design: &DesignMatrix, slopes: Option<&[f64]>) -> Result<()> {
    let Some(slopes) = slopes else { return Ok(()) };
    for (col, b) in design.columns.iter().zip(slopes) {
        let scale = sample_sd(&col.values);
        if !b.is_finite() || (b * scale).abs() > DIVERGENCE_LIMIT {
            return Err(Error::Separation {
                covariate: col.name.clone(),
                detail: "the outcome (coefficient diverges)".into(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::design::Column;

    #[test]
    fn binary_quasi_separation() {
        let d = DesignMatrix::binary(
            vec![0, 0, 1, 1],
            vec![Column::continuous("x", vec![1.0, 2.0, 2.0, 3.0])],
        );
        assert!(binary_separation(&d).is_err());
        let d = DesignMatrix::binary(
            vec![0, 1, 0, 1],
            vec![Column::continuous("x", vec![1.0, 2.0, 3.0, 4.0])],
        );
        assert!(binary_separation(&d).is_ok());
    }

    #[test]
    fn ordinal_continuous_split() {
        let x = vec![1.0, 2.0, 5.0, 5.0, 8.0, 9.0];
        let d = DesignMatrix::ordinal(
            vec![1, 1, 2, 2, 3, 3],
            3,
            vec![Column::continuous("x", x.clone())],
        );
        assert!(ordinal_separation(&d).is_err());
        let d = DesignMatrix::ordinal(vec![1, 2, 1, 2, 3, 3], 3, vec![Column::continuous("x", x)]);
        assert!(ordinal_separation(&d).is_ok());
    }
}
