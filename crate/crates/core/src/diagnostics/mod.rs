//! Proportional-odds and goodness-of-fit tests for the cumulative logit,
//! and the mixed-type correlation matrix.

pub mod brant;
pub mod correlation;
pub mod goodness;

use serde::{Deserialize, Serialize};

pub use brant::brant_test;
pub use correlation::{
    correlation_matrix, polychoric, polyserial, CorrelationMatrix, VarKind, Variable,
};
pub use goodness::{hosmer_lemeshow_ordinal, lipsitz_test, pulkstenis_robinson_test};

use crate::dist::chi2_sf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableTest {
    pub name: String,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// A chi-square test. `p_value` is always `chi2_sf(statistic, df)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub per_variable: Vec<VariableTest>,
    pub warnings: Vec<String>,
}

impl TestResult {
    pub fn chi2(name: impl Into<String>, statistic: f64, df: usize) -> Self {
        TestResult {
            name: name.into(),
            statistic,
            df,
            p_value: chi2_sf(statistic, df as f64),
            per_variable: Vec::new(),
            warnings: Vec::new(),
        }
    }
}
