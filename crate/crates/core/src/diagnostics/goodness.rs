//! Goodness-of-fit tests for the cumulative logit, all built on the fitted
//! category probabilities `p_ij` and the ordinal score `s_i = sum_j j p_ij`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::estimation::{
    fit_ordered_logit, linear_predictor, observation_probs, Column, DesignMatrix, ModelFit,
    ModelKind,
};

use super::TestResult;

fn require_ordered(fit: &ModelFit, design: &DesignMatrix) -> Result<()> {
    if fit.kind != ModelKind::OrderedLogit || design.binary {
        return Err(Error::Invalid(
            "goodness-of-fit tests need an ordered logit fit".into(),
        ));
    }
    Ok(())
}

fn scores(probs: &[Vec<f64>]) -> Vec<f64> {
    probs
        .iter()
        .map(|p| p.iter().enumerate().map(|(j, v)| (j + 1) as f64 * v).sum())
        .collect()
}

/// Row indices sorted by `key`, ties by index, cut into `g` contiguous
/// groups of near-equal size. Returns the group of each row.
fn equal_groups(key: &[f64], g: usize) -> Vec<usize> {
    let n = key.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    let mut group = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        group[i] = rank * g / n;
    }
    group
}

/// Observed and expected counts per group and category.
fn tables(
    design: &DesignMatrix,
    probs: &[Vec<f64>],
    group: &[usize],
    groups: usize,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let j = design.levels as usize;
    let mut obs = vec![vec![0.0; j]; groups];
    let mut exp = vec![vec![0.0; j]; groups];
    for (i, &g) in group.iter().enumerate() {
        obs[g][design.response[i] as usize - 1] += 1.0;
        for c in 0..j {
            exp[g][c] += probs[i][c];
        }
    }
    (obs, exp)
}

fn pearson(obs: &[Vec<f64>], exp: &[Vec<f64>]) -> f64 {
    obs.iter()
        .flatten()
        .zip(exp.iter().flatten())
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o - e).powi(2) / e)
        .sum()
}

fn deviance(obs: &[Vec<f64>], exp: &[Vec<f64>]) -> f64 {
    2.0 * obs
        .iter()
        .flatten()
        .zip(exp.iter().flatten())
        .filter(|(&o, &e)| o > 0.0 && e > 0.0)
        .map(|(&o, &e)| o * (o / e).ln())
        .sum::<f64>()
}

fn sparse_warning(exp: &[Vec<f64>]) -> Option<String> {
    let cells = exp.iter().flatten().count();
    let small = exp.iter().flatten().filter(|&&e| e < 1.0).count();
    (small * 5 > cells).then(|| format!("{small} of {cells} expected cell counts are below 1"))
}

/// Likelihood-ratio test of `g - 1` indicators for groups of the fitted
/// linear predictor, added to the model.
pub fn lipsitz_test(design: &DesignMatrix, fit: &ModelFit, g: usize) -> Result<TestResult> {
    require_ordered(fit, design)?;
    let ll0 = fit
        .log_likelihood
        .ok_or_else(|| Error::Invalid("fit has no log-likelihood".into()))?;
    let n = design.n_obs();
    let mut warnings = Vec::new();
    let mut g = g;
    if n < 5 * g {
        let reduced = n / 5;
        warnings.push(format!(
            "{n} observations support at most {reduced} groups; using {reduced} instead of {g}"
        ));
        g = reduced;
    }
    let names = fit.slope_names();
    let eta: Vec<f64> = (0..n)
        .map(|i| {
            let profile: Vec<f64> = names
                .iter()
                .map(|c| design.column(c).map_or(0.0, |col| col.values[i]))
                .collect();
            linear_predictor(fit, &profile)
        })
        .collect();
    let group = loop {
        if g < 2 {
            return Err(Error::Invalid(
                "too few observations for the Lipsitz test".into(),
            ));
        }
        let group = equal_groups(&eta, g);
        let mut seen: Vec<Option<u8>> = vec![None; g];
        let mut mixed = vec![false; g];
        for (i, &b) in group.iter().enumerate() {
            match seen[b] {
                None => seen[b] = Some(design.response[i]),
                Some(y) if y != design.response[i] => mixed[b] = true,
                _ => {}
            }
        }
        if mixed.iter().all(|&m| m) {
            break group;
        }
        warnings.push(format!(
            "a group holds a single response category; reducing to {} groups",
            g - 1
        ));
        g -= 1;
    };
    let mut aug = design.clone();
    for b in 1..g {
        let values = group.iter().map(|&x| f64::from(u8::from(x == b))).collect();
        aug.columns.push(Column::dummy(
            format!("Lipsitz group {}", b + 1),
            "Lipsitz",
            values,
        ));
    }
    let refit = fit_ordered_logit(&aug)?;
    let ll1 = refit.log_likelihood.unwrap();
    let mut t = TestResult::chi2("Lipsitz", (2.0 * (ll1 - ll0)).max(0.0), g - 1);
    t.warnings = warnings;
    Ok(t)
}

/// Pearson and deviance statistics over covariate patterns of the
/// indicator columns, each pattern split at its median ordinal score.
pub fn pulkstenis_robinson_test(
    design: &DesignMatrix,
    fit: &ModelFit,
) -> Result<(TestResult, TestResult)> {
    require_ordered(fit, design)?;
    let dummies: Vec<&Column> = design.columns.iter().filter(|c| c.is_dummy()).collect();
    if dummies.is_empty() {
        return Err(Error::Invalid(
            "the Pulkstenis-Robinson test needs a categorical covariate".into(),
        ));
    }
    let probs = observation_probs(fit, design)?;
    let s = scores(&probs);
    let n = design.n_obs();
    let mut patterns: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let key = dummies
            .iter()
            .map(|c| u8::from(c.values[i] != 0.0))
            .collect();
        patterns.entry(key).or_default().push(i);
    }
    if patterns.len() < 2 {
        return Err(Error::Invalid(
            "the categorical covariates form a single pattern".into(),
        ));
    }
    let mut group = vec![0usize; n];
    let mut next = 0;
    for rows in patterns.values() {
        let mut sc: Vec<f64> = rows.iter().map(|&i| s[i]).collect();
        sc.sort_by(f64::total_cmp);
        let median = crate::stats::quantile_type7(&sc, 0.5);
        let low = rows.iter().filter(|&&i| s[i] <= median).count();
        let (lo_id, hi_id) = (next, next + usize::from(low > 0));
        for &i in rows {
            group[i] = if s[i] <= median { lo_id } else { hi_id };
        }
        next = hi_id + usize::from(low < rows.len());
    }
    let groups = next;
    let (obs, exp) = tables(design, &probs, &group, groups);
    let j = design.levels as i64;
    let df = (groups as i64 - 1) * (j - 1) - dummies.len() as i64 - 1;
    if df <= 0 {
        return Err(Error::Invalid(format!(
            "Pulkstenis-Robinson degrees of freedom {df} are not positive"
        )));
    }
    let mut chi = TestResult::chi2("Pulkstenis-Robinson", pearson(&obs, &exp), df as usize);
    let mut dev = TestResult::chi2(
        "Pulkstenis-Robinson deviance",
        deviance(&obs, &exp),
        df as usize,
    );
    if let Some(w) = sparse_warning(&exp) {
        chi.warnings.push(w.clone());
        dev.warnings.push(w);
    }
    Ok((chi, dev))
}

/// Ordinal Hosmer-Lemeshow: `g` groups of the ordinal score, Pearson
/// statistic over the `g x J` table, `df = (g - 2)(J - 1) + (J - 2)`.
pub fn hosmer_lemeshow_ordinal(
    design: &DesignMatrix,
    fit: &ModelFit,
    g: usize,
) -> Result<TestResult> {
    require_ordered(fit, design)?;
    if g < 3 {
        return Err(Error::Invalid(format!(
            "{g} groups leave no degrees of freedom"
        )));
    }
    let n = design.n_obs();
    if n < 5 * g {
        return Err(Error::Invalid(format!(
            "{n} observations are too few for {g} groups"
        )));
    }
    let probs = observation_probs(fit, design)?;
    let group = equal_groups(&scores(&probs), g);
    let (obs, exp) = tables(design, &probs, &group, g);
    let j = design.levels as usize;
    let df = (g - 2) * (j - 1) + (j - 2);
    let mut t = TestResult::chi2("Hosmer-Lemeshow", pearson(&obs, &exp), df);
    t.warnings.extend(sparse_warning(&exp));
    Ok(t)
}
