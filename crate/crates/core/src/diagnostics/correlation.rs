//! Pearson, polyserial and polychoric correlations. The latent-normal
//! estimators are two-step: thresholds from the ordinal margins, then a
//! one-dimensional golden-section search over rho.

use serde::{Deserialize, Serialize};

use crate::dist::{bvn_cdf, chi2_sf, norm_cdf, norm_quantile};
use crate::error::{Error, Result};
use crate::stats::pearson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Numeric,
    Ordinal,
}

/// A column for the correlation matrix; `None` marks a missing value.
/// Ordinal values are category codes compared by order only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub values: Vec<Option<f64>>,
}

impl Variable {
    pub fn numeric(name: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Self {
        Variable {
            name: name.into(),
            kind: VarKind::Numeric,
            values: values.into_iter().map(Some).collect(),
        }
    }

    pub fn ordinal(name: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Self {
        Variable {
            name: name.into(),
            kind: VarKind::Ordinal,
            values: values.into_iter().map(Some).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pearson,
    Polyserial,
    Polychoric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub method: Method,
    pub estimate: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
    pub note: Option<String>,
}

/// Symmetric matrix of pairwise entries; `significant` uses the 1% level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub entries: Vec<Vec<Entry>>,
}

pub const SIGNIFICANCE: f64 = 0.01;

pub const MIN_PAIRS: usize = 30;

const RHO_BOUND: f64 = 0.9999;

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Ordinal codes to `0..levels` ranks.
fn ranks(y: &[f64]) -> (Vec<usize>, usize) {
    let mut levels: Vec<f64> = y.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let r = y
        .iter()
        .map(|v| levels.iter().position(|l| l == v).unwrap())
        .collect();
    (r, levels.len())
}

/// Thresholds `tau_0 = -inf < tau_1 < ... < tau_L = +inf` from margins.
fn thresholds(r: &[usize], levels: usize) -> Vec<f64> {
    let n = r.len() as f64;
    let mut counts = vec![0usize; levels];
    for &v in r {
        counts[v] += 1;
    }
    let mut tau = vec![f64::NEG_INFINITY];
    let mut cum = 0;
    for &c in counts.iter().take(levels - 1) {
        cum += c;
        tau.push(norm_quantile(cum as f64 / n));
    }
    tau.push(f64::INFINITY);
    tau
}

/// Two-step polyserial correlation of numeric `x` with ordinal `y`, with
/// the likelihood-ratio p-value for rho = 0.
pub fn polyserial(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let (r, levels) = ranks(y);
    if levels < 2 {
        return Err(Error::Invalid(
            "ordinal variable has a single observed level".into(),
        ));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        return Err(Error::Invalid("numeric variable is constant".into()));
    }
    let z: Vec<f64> = x.iter().map(|v| (v - mean) / sd).collect();
    let tau = thresholds(&r, levels);
    // The normal density of z does not depend on rho and is dropped.
    let ll = |rho: f64| {
        let s = (1.0 - rho * rho).sqrt();
        z.iter()
            .zip(&r)
            .map(|(&zi, &k)| {
                let hi = norm_cdf((tau[k + 1] - rho * zi) / s);
                let lo = norm_cdf((tau[k] - rho * zi) / s);
                (hi - lo).max(1e-300).ln()
            })
            .sum::<f64>()
    };
    let rho = golden_max(ll, -RHO_BOUND, RHO_BOUND);
    let lr = 2.0 * (ll(rho) - ll(0.0));
    Ok((rho, chi2_sf(lr.max(0.0), 1.0)))
}

/// Two-step polychoric correlation of two ordinal variables.
pub fn polychoric(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let (rx, lx) = ranks(x);
    let (ry, ly) = ranks(y);
    if lx < 2 || ly < 2 {
        return Err(Error::Invalid(
            "ordinal variable has a single observed level".into(),
        ));
    }
    let tx = thresholds(&rx, lx);
    let ty = thresholds(&ry, ly);
    let mut table = vec![vec![0.0; ly]; lx];
    for (&a, &b) in rx.iter().zip(&ry) {
        table[a][b] += 1.0;
    }
    let ll = |rho: f64| {
        let mut total = 0.0;
        for a in 0..lx {
            for b in 0..ly {
                let n = table[a][b];
                if n == 0.0 {
                    continue;
                }
                let p = bvn_cdf(tx[a + 1], ty[b + 1], rho)
                    - bvn_cdf(tx[a], ty[b + 1], rho)
                    - bvn_cdf(tx[a + 1], ty[b], rho)
                    + bvn_cdf(tx[a], ty[b], rho);
                total += n * p.max(1e-300).ln();
            }
        }
        total
    };
    let rho = golden_max(ll, -RHO_BOUND, RHO_BOUND);
    let lr = 2.0 * (ll(rho) - ll(0.0));
    Ok((rho, chi2_sf(lr.max(0.0), 1.0)))
}

/// Two-sided p-value of a Pearson correlation via the t distribution,
/// written with the regularized incomplete beta function.
fn pearson_p(r: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t2 = r * r * df / (1.0 - r * r);
    statrs::function::beta::beta_reg(df / 2.0, 0.5, df / (df + t2))
}

fn entry(a: &Variable, b: &Variable) -> Entry {
    let pairs: Vec<(f64, f64)> = a
        .values
        .iter()
        .zip(&b.values)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .collect();
    let n = pairs.len();
    let method = match (a.kind, b.kind) {
        (VarKind::Numeric, VarKind::Numeric) => Method::Pearson,
        (VarKind::Ordinal, VarKind::Ordinal) => Method::Polychoric,
        _ => Method::Polyserial,
    };
    if n < MIN_PAIRS {
        return Entry {
            method,
            estimate: None,
            p_value: None,
            n,
            note: Some(format!("only {n} complete pairs")),
        };
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let result = match method {
        Method::Pearson => {
            let r = pearson(&x, &y);
            if r.is_finite() {
                Ok((r, pearson_p(r, n)))
            } else {
                Err(Error::Invalid("numeric variable is constant".into()))
            }
        }
        Method::Polychoric => polychoric(&x, &y),
        Method::Polyserial if a.kind == VarKind::Numeric => polyserial(&x, &y),
        Method::Polyserial => polyserial(&y, &x),
    };
    match result {
        Ok((r, p)) => Entry {
            method,
            estimate: Some(r),
            p_value: Some(p),
            n,
            note: None,
        },
        Err(e) => Entry {
            method,
            estimate: None,
            p_value: None,
            n,
            note: Some(e.to_string()),
        },
    }
}

pub fn correlation_matrix(vars: &[Variable]) -> CorrelationMatrix {
    let k = vars.len();
    let mut entries: Vec<Vec<Entry>> = vec![vec![]; k];
    for i in 0..k {
        for j in 0..k {
            let e = if i == j {
                let method = match vars[i].kind {
                    VarKind::Numeric => Method::Pearson,
                    VarKind::Ordinal => Method::Polychoric,
                };
                Entry {
                    method,
                    estimate: Some(1.0),
                    p_value: Some(0.0),
                    n: vars[i].values.iter().flatten().count(),
                    note: None,
                }
            } else if j < i {
                entries[j][i].clone()
            } else {
                entry(&vars[i], &vars[j])
            };
            entries[i].push(e);
        }
    }
    CorrelationMatrix {
        names: vars.iter().map(|v| v.name.clone()).collect(),
        entries,
    }
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<&Entry> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(&self.entries[i][j])
    }

    /// Lower triangle as delimited text; significant entries carry `*`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variable");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (i, row) in self.entries.iter().enumerate() {
            out.push_str(&self.names[i]);
            for (j, e) in row.iter().enumerate() {
                out.push(',');
                if j < i {
                    match (e.estimate, e.p_value) {
                        (Some(r), Some(p)) => {
                            out.push_str(&format!("{r:.3}"));
                            if p < SIGNIFICANCE {
                                out.push('*');
                            }
                        }
                        _ => out.push_str("NA"),
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn bvn(n: usize, rho: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nd = Normal::new(0.0, 1.0).unwrap();
        (0..n)
            .map(|_| {
                let a: f64 = nd.sample(&mut rng);
                let b: f64 = nd.sample(&mut rng);
                (a, rho * a + (1.0 - rho * rho).sqrt() * b)
            })
            .unzip()
    }

    fn cut(v: &[f64], cuts: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|x| 1.0 + cuts.iter().filter(|&&c| *x > c).count() as f64)
            .collect()
    }

    #[test]
    fn identity_diagonal() {
        let (x, y) = bvn(100, 0.3, 1);
        let m = correlation_matrix(&[
            Variable::numeric("x", x),
            Variable::ordinal("y", cut(&y, &[0.0])),
        ]);
        assert_eq!(m.entries[0][0].estimate, Some(1.0));
        assert_eq!(m.entries[1][1].estimate, Some(1.0));
        assert_eq!(m.entries[0][1], m.entries[1][0]);
    }

    #[test]
    fn polyserial_recovers_rho() {
        let (x, y) = bvn(2000, 0.5, 2);
        let (r, p) = polyserial(&x, &cut(&y, &[-1.5, -0.7, 0.0, 0.6, 1.3])).unwrap();
        assert!((r - 0.5).abs() < 0.05, "{r}");
        assert!(p < 0.01);
    }

    #[test]
    fn reversal_antisymmetry() {
        let (x, y) = bvn(500, 0.4, 3);
        let xo = cut(&x, &[-0.5, 0.5]);
        let yo = cut(&y, &[-1.0, 0.0, 1.0]);
        let rev: Vec<f64> = yo.iter().map(|v| 5.0 - v).collect();
        let (a, _) = polychoric(&xo, &yo).unwrap();
        let (b, _) = polychoric(&xo, &rev).unwrap();
        assert!((a + b).abs() < 1e-6, "{a} {b}");
        let (c, _) = polyserial(&x, &yo).unwrap();
        let (d, _) = polyserial(&x, &rev).unwrap();
        assert!((c + d).abs() < 1e-6);
        assert!(a.abs() < 1.0 && c.abs() < 1.0);
    }

    #[test]
    fn pearson_matches_one_pass_oracle() {
        let (x, y) = bvn(300, -0.2, 4);
        let n = x.len() as f64;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (a, b) in x.iter().zip(&y) {
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
        let oracle =
            (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
        let m = correlation_matrix(&[Variable::numeric("x", x), Variable::numeric("y", y)]);
        assert!((m.entries[0][1].estimate.unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn single_level_is_flagged() {
        let (x, _) = bvn(100, 0.0, 5);
        let m = correlation_matrix(&[
            Variable::numeric("x", x),
            Variable::ordinal("c", vec![2.0; 100]),
        ]);
        assert!(m.entries[0][1].estimate.is_none());
        assert!(m.entries[0][1].note.is_some());
        assert!(m.to_csv().contains("NA"));
    }
}
