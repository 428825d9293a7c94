//! Two-stage instrumented estimators: predictor substitution (2SPS) and
//! residual inclusion (2SRI), with a linear first stage run at edge level.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::design::{Column, DesignMatrix, LOAD, LOAD_IV, RESIDUAL};
use crate::estimation::{fit_model, ols, stars, ModelFit, ModelKind, ParamRole};
use crate::homophily::{FirstStageDiagnostics, WEAK_INSTRUMENT_F};
use crate::sim::substream_seed;

pub const INSTRUMENT: &str = "Instrument";

/// Linear auxiliary regression of Load on the exogenous covariates and the
/// instrument. `names` lists the regressors, intercept first, instrument last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStage {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub f_excluded: f64,
    pub partial_r2: f64,
    pub n_obs: usize,
}

impl FirstStage {
    pub fn diagnostics(&self) -> FirstStageDiagnostics {
        FirstStageDiagnostics {
            f_excluded: self.f_excluded,
            partial_r2: self.partial_r2,
            weak: !(self.f_excluded >= WEAK_INSTRUMENT_F),
        }
    }
}

/// Exogenous covariates entering the first stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FirstStageCovariates {
    /// Every second-stage covariate except Load.
    #[default]
    All,
    /// Only the named columns.
    Only(Vec<String>),
}

pub fn first_stage(design: &DesignMatrix, instrument: &[f64]) -> Result<FirstStage> {
    first_stage_with(design, instrument, &FirstStageCovariates::All)
}

pub fn first_stage_with(
    design: &DesignMatrix,
    instrument: &[f64],
    covariates: &FirstStageCovariates,
) -> Result<FirstStage> {
    let n = design.n_obs();
    if instrument.len() != n {
        return Err(Error::Invalid(format!(
            "instrument has {} values for {n} rows",
            instrument.len()
        )));
    }
    let load = design
        .column(LOAD)
        .ok_or_else(|| Error::Invalid(format!("design has no `{LOAD}` column")))?;
    let exog: Vec<&Column> = design
        .columns
        .iter()
        .filter(|c| c.name != LOAD && c.name != RESIDUAL)
        .filter(|c| match covariates {
            FirstStageCovariates::All => true,
            FirstStageCovariates::Only(keep) => keep.contains(&c.name),
        })
        .collect();
    let mut names = vec![ModelFit::CONSTANT.to_string()];
    names.extend(exog.iter().map(|c| c.name.clone()));
    let restricted_x = DMatrix::from_fn(n, names.len(), |i, j| {
        if j == 0 {
            1.0
        } else {
            exog[j - 1].values[i]
        }
    });
    let mut full_names = names.clone();
    full_names.push(INSTRUMENT.to_string());
    let full_x = DMatrix::from_fn(n, full_names.len(), |i, j| {
        if j == names.len() {
            instrument[i]
        } else {
            restricted_x[(i, j)]
        }
    });
    let y = DVector::from_column_slice(&load.values);
    let full = match ols(&full_x, &y, &full_names) {
        Ok(f) => f,
        Err(Error::RankDeficient(cols)) if cols.iter().any(|c| c == INSTRUMENT) => {
            return Err(Error::Invalid(
                "instrument is collinear with the exogenous covariates".into(),
            ));
        }
        Err(e) => return Err(e),
    };
    let restricted = ols(&restricted_x, &y, &names)?;
    let df = full.df_residual as f64;
    let gain = (restricted.rss - full.rss).max(0.0);
    let f_excluded = if full.rss <= 1e-20 * restricted.rss.max(1.0) {
        f64::INFINITY
    } else {
        gain / (full.rss / df)
    };
    let partial_r2 = if restricted.rss > 0.0 {
        gain / restricted.rss
    } else {
        0.0
    };
    let s2 = full.sigma2();
    Ok(FirstStage {
        std_errors: (0..full_names.len())
            .map(|j| (full.xtx_inv[(j, j)] * s2).sqrt())
            .collect(),
        names: full_names,
        coefficients: full.coefficients.iter().copied().collect(),
        fitted: full.fitted.iter().copied().collect(),
        residuals: full.residuals.iter().copied().collect(),
        f_excluded,
        partial_r2,
        n_obs: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Naive,
    Tsps,
    Tsri,
}

/// A second-stage fit together with the first stage that fed it and the
/// design it was estimated on.
#[derive(Debug, Clone)]
pub struct TwoStageFit {
    pub first_stage: FirstStage,
    pub design: DesignMatrix,
    pub fit: ModelFit,
}

fn instrument_of<'a>(design: &'a DesignMatrix, instrument: Option<&'a [f64]>) -> Result<&'a [f64]> {
    instrument
        .or(design.instrument.as_deref())
        .ok_or_else(|| Error::Invalid("no instrument supplied".into()))
}

/// Load replaced by its first-stage fitted values, relabelled `Load / IV`.
pub fn fit_2sps(design: &DesignMatrix, instrument: &[f64], kind: ModelKind) -> Result<TwoStageFit> {
    let fs = first_stage(design, instrument)?;
    let second =
        design.with_column_replaced(LOAD, Column::continuous(LOAD_IV, fs.fitted.clone()))?;
    let fit = fit_model(kind, &second)?;
    Ok(TwoStageFit {
        first_stage: fs,
        design: second,
        fit,
    })
}

/// Load kept and the centered first-stage residual added as a regressor.
/// A residual that is identically zero is dropped with a warning.
pub fn fit_2sri(design: &DesignMatrix, instrument: &[f64], kind: ModelKind) -> Result<TwoStageFit> {
    let fs = first_stage(design, instrument)?;
    let mean = crate::stats::mean(&fs.residuals);
    let centered: Vec<f64> = fs.residuals.iter().map(|r| r - mean).collect();
    let scale = design.column(LOAD).map_or(1.0, |c| {
        c.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    });
    let degenerate = centered.iter().all(|r| r.abs() <= 1e-9 * scale.max(1.0));
    let (second, warning) = if degenerate {
        (
            design.clone(),
            Some("first-stage residuals are identically zero; residual column dropped".to_string()),
        )
    } else {
        (
            design.with_column_added(Column::continuous(RESIDUAL, centered)),
            None,
        )
    };
    let mut fit = fit_model(kind, &second)?;
    fit.warnings.extend(warning);
    Ok(TwoStageFit {
        first_stage: fs,
        design: second,
        fit,
    })
}

pub fn fit_estimator(
    design: &DesignMatrix,
    instrument: Option<&[f64]>,
    estimator: Estimator,
    kind: ModelKind,
) -> Result<TwoStageFit> {
    match estimator {
        Estimator::Naive => {
            let fs = match instrument.or(design.instrument.as_deref()) {
                Some(z) => first_stage(design, z)?,
                None => FirstStage {
                    names: vec![],
                    coefficients: vec![],
                    std_errors: vec![],
                    fitted: vec![],
                    residuals: vec![],
                    f_excluded: f64::NAN,
                    partial_r2: f64::NAN,
                    n_obs: design.n_obs(),
                },
            };
            Ok(TwoStageFit {
                first_stage: fs,
                design: design.clone(),
                fit: fit_model(kind, design)?,
            })
        }
        Estimator::Tsps => fit_2sps(design, instrument_of(design, instrument)?, kind),
        Estimator::Tsri => fit_2sri(design, instrument_of(design, instrument)?, kind),
    }
}

/// Nonparametric bootstrap standard errors, resampling edges with
/// replacement. Each draw re-runs both stages; draw `b` uses the substream
/// `(seed, b)` so the result is independent of scheduling. Draws whose fit
/// fails are skipped; the count used is returned alongside.
pub fn bootstrap_se(
    design: &DesignMatrix,
    instrument: &[f64],
    estimator: Estimator,
    kind: ModelKind,
    draws: usize,
    seed: u64,
) -> Result<(Vec<f64>, usize)> {
    let n = design.n_obs();
    let mut with_z = design.clone();
    with_z.instrument = Some(instrument.to_vec());
    let results: Vec<Option<Vec<f64>>> = (0..draws)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, b as u64));
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let d = with_z.with_rows(&rows);
            fit_estimator(&d, None, estimator, kind)
                .ok()
                .map(|f| f.fit.params.iter().map(|p| p.estimate).collect())
        })
        .collect();
    let ok: Vec<Vec<f64>> = results.into_iter().flatten().collect();
    if ok.len() < 2 {
        return Err(Error::Invalid(
            "fewer than two bootstrap draws succeeded".into(),
        ));
    }
    let k = ok[0].len();
    let se = (0..k)
        .map(|j| {
            let v: Vec<f64> = ok.iter().map(|d| d[j]).collect();
            crate::stats::sample_sd(&v)
        })
        .collect();
    Ok((se, ok.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryColumn {
    pub label: String,
    pub estimator: Estimator,
    pub kind: ModelKind,
    #[serde(skip)]
    pub fit: Option<ModelFit>,
    /// Second-stage design of the fit, for predictions and diagnostics.
    #[serde(skip)]
    pub design: Option<DesignMatrix>,
    pub error: Option<String>,
}

/// A footer cell, printed under one column as `p-value = ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FooterRow {
    pub name: String,
    pub column: usize,
    pub p_value: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub columns: Vec<BatteryColumn>,
    pub first_stage: Option<FirstStageDiagnostics>,
    pub first_stage_error: Option<String>,
    pub footer: Vec<FooterRow>,
    /// Free-text lines printed above the significance note.
    pub notes: Vec<String>,
}

/// The five-model comparison, in display order.
pub const BATTERY: [(&str, Estimator, ModelKind); 5] = [
    (
        "Ordered Logistic",
        Estimator::Naive,
        ModelKind::OrderedLogit,
    ),
    (
        "IV Ordered Logistic 2SPS",
        Estimator::Tsps,
        ModelKind::OrderedLogit,
    ),
    (
        "IV Ordered Logistic 2SRI",
        Estimator::Tsri,
        ModelKind::OrderedLogit,
    ),
    (
        "IV Binary Logistic 2SRI",
        Estimator::Tsri,
        ModelKind::BinaryLogit,
    ),
    (
        "IV Linear Probability Model",
        Estimator::Tsps,
        ModelKind::LinearProbability,
    ),
];

/// Index of the column that carries the goodness-of-fit footer in the
/// full battery.
pub const DIAGNOSTIC_COLUMN: usize = 2;

/// Runs every battery member; failures are recorded per column.
pub fn estimator_battery(design: &DesignMatrix, instrument: &[f64]) -> BatteryReport {
    estimator_battery_with(design, instrument, &[0, 1, 2, 3, 4])
}

/// Runs the members of [`BATTERY`] at the given indices, in that order.
pub fn estimator_battery_with(
    design: &DesignMatrix,
    instrument: &[f64],
    members: &[usize],
) -> BatteryReport {
    let fits: Vec<Result<TwoStageFit>> = members
        .par_iter()
        .map(|&m| {
            let (_, est, kind) = BATTERY[m];
            fit_estimator(design, Some(instrument), est, kind)
        })
        .collect();
    let (first_stage, first_stage_error) = match first_stage(design, instrument) {
        Ok(fs) => (Some(fs.diagnostics()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let columns = members
        .iter()
        .zip(fits)
        .map(|(&m, r)| {
            let (label, estimator, kind) = BATTERY[m];
            let (fit, design, error) = match r {
                Ok(f) => (Some(f.fit), Some(f.design), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            BatteryColumn {
                label: label.to_string(),
                estimator,
                kind,
                fit,
                design,
                error,
            }
        })
        .collect();
    BatteryReport {
        columns,
        first_stage,
        first_stage_error,
        footer: Vec::new(),
        notes: Vec::new(),
    }
}

/// Estimates with 3 decimals, or 4 when the value would otherwise round
/// to zero.
pub fn fmt_num(v: f64) -> String {
    if v != 0.0 && v.abs() < 0.0095 {
        format!("{v:.4}")
    } else {
        format!("{v:.3}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryDocument {
    pub models: Vec<BatteryModelEntry>,
    pub first_stage: Option<FirstStageDiagnostics>,
    pub first_stage_error: Option<String>,
    pub footer: Vec<FooterRow>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryModelEntry {
    pub name: String,
    pub estimator: Estimator,
    pub kind: ModelKind,
    pub fit: Option<crate::estimation::FitDocument>,
    pub error: Option<String>,
}

impl BatteryReport {
    pub fn fit(&self, column: usize) -> Option<&ModelFit> {
        self.columns.get(column).and_then(|c| c.fit.as_ref())
    }

    /// Position of the 2SRI ordered column, which carries the footer.
    pub fn diagnostic_column(&self) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.estimator == Estimator::Tsri && c.kind == ModelKind::OrderedLogit)
    }

    pub fn errors(&self) -> usize {
        self.columns.iter().filter(|c| c.error.is_some()).count()
    }

    pub fn document(&self) -> BatteryDocument {
        BatteryDocument {
            models: self
                .columns
                .iter()
                .map(|c| BatteryModelEntry {
                    name: c.label.clone(),
                    estimator: c.estimator,
                    kind: c.kind,
                    fit: c.fit.as_ref().map(ModelFit::document),
                    error: c.error.clone(),
                })
                .collect(),
            first_stage: self.first_stage,
            first_stage_error: self.first_stage_error.clone(),
            footer: self.footer.clone(),
            notes: self.notes.clone(),
        }
    }

    /// Side-by-side text table: estimates with stars, standard errors in
    /// parentheses underneath, fit statistics and footer rows at the bottom.
    pub fn to_text(&self) -> String {
        const LW: usize = 26;
        const CW: usize = 18;
        let ncol = self.columns.len();
        let mut out = String::new();
        let rule = "=".repeat(LW + CW * ncol);
        let line = |label: &str, cells: &[String]| {
            let mut s = format!("{label:<LW$}");
            for c in cells {
                s.push_str(&format!("{c:>CW$}"));
            }
            s.push('\n');
            s
        };
        out.push_str(&rule);
        out.push('\n');
        let heads: Vec<String> = self.columns.iter().map(|c| c.label.clone()).collect();
        for row in wrap_headers(&heads, CW - 1) {
            out.push_str(&line("", &row));
        }
        out.push_str(&"-".repeat(LW + CW * ncol));
        out.push('\n');

        // Slope rows in first-seen order; Load and Load / IV share a row.
        let mut rows: Vec<String> = vec![LOAD_IV.to_string(), RESIDUAL.to_string()];
        for c in &self.columns {
            if let Some(f) = &c.fit {
                for p in &f.params {
                    if p.role == ParamRole::Slope && p.name != LOAD && !rows.contains(&p.name) {
                        rows.push(p.name.clone());
                    }
                }
            }
        }
        rows.push(ModelFit::CONSTANT.to_string());
        for row in &rows {
            let lookup = |f: &ModelFit| {
                f.params
                    .iter()
                    .find(|p| {
                        p.role != ParamRole::Threshold
                            && (p.name == *row || (row == LOAD_IV && p.name == LOAD))
                    })
                    .cloned()
            };
            let found: Vec<Option<crate::estimation::Param>> = self
                .columns
                .iter()
                .map(|c| c.fit.as_ref().and_then(lookup))
                .collect();
            if found.iter().all(Option::is_none) {
                continue;
            }
            let est: Vec<String> = found
                .iter()
                .map(|p| {
                    p.as_ref().map_or(String::new(), |p| {
                        format!("{}{}", fmt_num(p.estimate), stars(p.p_value()))
                    })
                })
                .collect();
            let se: Vec<String> = found
                .iter()
                .map(|p| {
                    p.as_ref()
                        .map_or(String::new(), |p| format!("({})", fmt_num(p.std_error)))
                })
                .collect();
            out.push_str(&line(row, &est));
            out.push_str(&line("", &se));
        }
        out.push_str(&"-".repeat(LW + CW * ncol));
        out.push('\n');
        let stat = |label: &str, f: &dyn Fn(&ModelFit) -> Option<String>| {
            let cells: Vec<String> = self
                .columns
                .iter()
                .map(|c| c.fit.as_ref().and_then(f).unwrap_or_default())
                .collect();
            if cells.iter().all(String::is_empty) {
                String::new()
            } else {
                line(label, &cells)
            }
        };
        out.push_str(&stat("Observations", &|f| Some(f.n_obs.to_string())));
        out.push_str(&stat("R2", &|f| f.r_squared.map(|v| format!("{v:.3}"))));
        out.push_str(&stat("Adjusted R2", &|f| {
            f.adj_r_squared.map(|v| format!("{v:.3}"))
        }));
        out.push_str(&stat("Log Likelihood", &|f| {
            f.log_likelihood.map(|v| format!("{v:.3}"))
        }));
        out.push_str(&stat("Akaike Inf. Crit.", &|f| {
            f.aic.map(|v| format!("{v:.3}"))
        }));
        out.push_str(&stat("Residual Std. Error", &|f| {
            f.residual_std_error
                .map(|v| format!("{v:.3} (df={})", f.df_residual.unwrap_or(0)))
        }));
        for row in &self.footer {
            let mut cells = vec![String::new(); ncol];
            if row.column < ncol {
                cells[row.column] = match (row.p_value, &row.note) {
                    (Some(p), _) => format!("p-value = {p:.3}"),
                    (None, Some(n)) => n.clone(),
                    (None, None) => "n/a".into(),
                };
            }
            out.push_str(&line(&format!("{} test", row.name), &cells));
        }
        if let Some(fs) = &self.first_stage {
            out.push_str(&format!(
                "First stage: F = {:.2}, partial R2 = {:.4}{}\n",
                fs.f_excluded,
                fs.partial_r2,
                if fs.weak { " (weak instrument)" } else { "" }
            ));
        }
        if let Some(e) = &self.first_stage_error {
            out.push_str(&format!("First stage failed: {e}\n"));
        }
        for c in &self.columns {
            if let Some(e) = &c.error {
                out.push_str(&format!("{}: failed: {e}\n", c.label));
            }
        }
        for n in &self.notes {
            out.push_str(n);
            out.push('\n');
        }
        out.push_str(&rule);
        out.push('\n');
        out.push_str("Note: * p<0.1; ** p<0.05; *** p<0.01\n");
        out
    }
}

fn wrap_headers(heads: &[String], width: usize) -> Vec<Vec<String>> {
    let wrapped: Vec<Vec<String>> = heads
        .iter()
        .map(|h| {
            let mut lines = vec![String::new()];
            for w in h.split_whitespace() {
                let cur = lines.last_mut().unwrap();
                if !cur.is_empty() && cur.len() + 1 + w.len() > width {
                    lines.push(w.to_string());
                } else {
                    if !cur.is_empty() {
                        cur.push(' ');
                    }
                    cur.push_str(w);
                }
            }
            lines
        })
        .collect();
    let depth = wrapped.iter().map(Vec::len).max().unwrap_or(0);
    (0..depth)
        .map(|r| {
            wrapped
                .iter()
                .map(|w| w.get(r).cloned().unwrap_or_default())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    /// Linear toy system: load = z + u + e, y* = -0.5 load + u + x + logistic noise.
    fn toy(n: usize, seed: u64) -> (DesignMatrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nd = Normal::new(0.0, 1.0).unwrap();
        let mut load = Vec::new();
        let mut x = Vec::new();
        let mut z = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let zi: f64 = nd.sample(&mut rng);
            let u: f64 = nd.sample(&mut rng);
            let xi: f64 = nd.sample(&mut rng);
            let l = 2.0 + zi + 0.8 * u + 0.3 * xi + 0.5 * nd.sample(&mut rng);
            let e: f64 = rng.random();
            let ystar = -0.5 * l + u + 0.4 * xi + (e / (1.0 - e)).ln();
            y.push(if ystar < -2.0 {
                1
            } else if ystar < -1.0 {
                2
            } else if ystar < 0.0 {
                3
            } else {
                4
            });
            load.push(l);
            x.push(xi);
            z.push(zi);
        }
        let d = DesignMatrix::ordinal(
            y,
            4,
            vec![Column::continuous(LOAD, load), Column::continuous("x", x)],
        );
        (d, z)
    }

    #[test]
    fn first_stage_identities() {
        let (d, z) = toy(500, 1);
        let fs = first_stage(&d, &z).unwrap();
        let load = &d.column(LOAD).unwrap().values;
        for i in 0..load.len() {
            assert!((fs.fitted[i] + fs.residuals[i] - load[i]).abs() < 1e-10);
        }
        let x = &d.column("x").unwrap().values;
        let dot = |a: &[f64]| a.iter().zip(&fs.residuals).map(|(p, q)| p * q).sum::<f64>();
        assert!(fs.residuals.iter().sum::<f64>().abs() < 1e-8);
        assert!(dot(x).abs() < 1e-8);
        assert!(dot(&z).abs() < 1e-8);
        assert!(fs.f_excluded > 100.0 && !fs.diagnostics().weak);

        // Affine rescaling of the instrument leaves fitted values unchanged.
        let z2: Vec<f64> = z.iter().map(|v| 3.0 * v - 7.0).collect();
        let fs2 = first_stage(&d, &z2).unwrap();
        for (a, b) in fs.fitted.iter().zip(&fs2.fitted) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn instrument_equal_to_load() {
        let (d, _) = toy(300, 2);
        let load = d.column(LOAD).unwrap().values.clone();
        let fs = first_stage(&d, &load).unwrap();
        assert!(fs.residuals.iter().all(|r| r.abs() < 1e-9));
        assert!((fs.partial_r2 - 1.0).abs() < 1e-9);
        let naive = fit_model(ModelKind::OrderedLogit, &d).unwrap();
        let sps = fit_2sps(&d, &load, ModelKind::OrderedLogit).unwrap();
        for (a, b) in naive.params.iter().zip(&sps.fit.params) {
            assert!((a.estimate - b.estimate).abs() < 1e-8);
        }
        let sri = fit_2sri(&d, &load, ModelKind::OrderedLogit).unwrap();
        assert_eq!(sri.fit.params.len(), naive.params.len());
        assert!(!sri.fit.warnings.is_empty());
    }

    #[test]
    fn collinear_instrument_errors() {
        let (d, _) = toy(100, 3);
        let x = d.column("x").unwrap().values.clone();
        let z: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!(matches!(first_stage(&d, &z), Err(Error::Invalid(_))));
    }

    #[test]
    fn linear_second_stage_decomposition() {
        let (d, z) = toy(800, 4);
        let b = d.binarize();
        let sps = fit_2sps(&b, &z, ModelKind::LinearProbability).unwrap();
        let sri = fit_2sri(&b, &z, ModelKind::LinearProbability).unwrap();
        let a = sps.fit.param(LOAD_IV).unwrap().estimate;
        let c = sri.fit.param(LOAD).unwrap().estimate;
        assert!((a - c).abs() < 1e-8, "{a} {c}");
    }

    #[test]
    fn control_function_removes_bias() {
        let (d, z) = toy(6000, 5);
        let naive = fit_model(ModelKind::OrderedLogit, &d).unwrap();
        let sri = fit_2sri(&d, &z, ModelKind::OrderedLogit).unwrap();
        let bn = naive.param(LOAD).unwrap().estimate;
        let bs = sri.fit.param(LOAD).unwrap().estimate;
        assert!(bn > -0.5 + 0.2, "naive {bn}");
        assert!((bs + 0.5).abs() < (bn + 0.5).abs());
        let r = sri.fit.param(RESIDUAL).unwrap();
        assert!(r.p_value() < 0.01);
    }

    #[test]
    fn battery_reports_every_column() {
        let (d, z) = toy(600, 6);
        let rep = estimator_battery(&d, &z);
        assert_eq!(rep.columns.len(), 5);
        assert_eq!(rep.errors(), 0);
        let text = rep.to_text();
        assert!(text.contains("Load / IV"));
        assert!(text.contains("Residual 1st-stage"));

        let mut constant = d.clone();
        constant.response = vec![3; d.n_obs()];
        let rep = estimator_battery(&constant, &z);
        // A constant outcome still has a well-defined least-squares fit.
        assert_eq!(rep.errors(), 4);
        assert!(rep.columns[4].error.is_none());
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let (d, z) = toy(300, 7);
        let a = bootstrap_se(&d, &z, Estimator::Tsri, ModelKind::OrderedLogit, 20, 99).unwrap();
        let b = bootstrap_se(&d, &z, Estimator::Tsri, ModelKind::OrderedLogit, 20, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.0.iter().all(|s| *s > 0.0));
    }
}
