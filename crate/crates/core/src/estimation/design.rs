use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Channel, Citation, Employee, EmployeeId, Gender};
use crate::network::LoadMap;

pub const LOAD: &str = "Load";
pub const LOAD_IV: &str = "Load / IV";
pub const RESIDUAL: &str = "Residual 1st-stage";
pub const KNOWLEDGE_COMPLEX: &str = "Knowledge: Complex";
pub const CHANNEL_PERSON: &str = "Channel: Person";
pub const CHANNEL_PHONE: &str = "Channel: Phone";
pub const CHANNEL_OTHER: &str = "Channel: Other";
pub const SENIORITY: &str = "Seniority";
pub const AGE: &str = "Age";
pub const GENDER_MALE: &str = "Gender: Male";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Continuous,
    /// One indicator of a categorical variable; the reference level has no column.
    Dummy {
        group: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

impl Column {
    pub fn continuous(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Continuous,
            values,
        }
    }

    pub fn dummy(name: impl Into<String>, group: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Dummy {
                group: group.into(),
            },
            values,
        }
    }

    pub fn is_dummy(&self) -> bool {
        matches!(self.kind, ColumnKind::Dummy { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseCoding {
    /// Efficiency 1..6 as ordered categories.
    Ordinal,
    /// 1 when efficiency is 6, 0 otherwise.
    TopBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    Load,
    Knowledge,
    Channel,
    Seniority,
    Age,
    Gender,
}

/// Whose demographics describe an edge: the cited colleague or the seeker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Target,
    Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignSpec {
    pub response: ResponseCoding,
    pub covariates: Vec<Covariate>,
    pub demographics_from: Endpoint,
    /// Number of ordinal categories of the response.
    pub levels: u8,
}

impl Default for DesignSpec {
    fn default() -> Self {
        DesignSpec {
            response: ResponseCoding::Ordinal,
            covariates: vec![
                Covariate::Load,
                Covariate::Knowledge,
                Covariate::Channel,
                Covariate::Seniority,
                Covariate::Age,
                Covariate::Gender,
            ],
            demographics_from: Endpoint::Target,
            levels: 6,
        }
    }
}

/// Edge-level regression data. Ordinal responses are coded `1..=levels`,
/// binary ones `0/1`. Columns never include the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub response: Vec<u8>,
    pub binary: bool,
    pub levels: u8,
    pub columns: Vec<Column>,
    /// Instrument joined by cited employee, if one was supplied.
    pub instrument: Option<Vec<f64>>,
    /// Cited employee of each row.
    pub clusters: Vec<EmployeeId>,
    pub dropped: usize,
}

impl DesignMatrix {
    pub fn ordinal(response: Vec<u8>, levels: u8, columns: Vec<Column>) -> Self {
        let n = response.len();
        DesignMatrix {
            response,
            binary: false,
            levels,
            columns,
            instrument: None,
            clusters: (0..n).map(|i| EmployeeId::new(format!("row{i}"))).collect(),
            dropped: 0,
        }
    }

    pub fn binary(response: Vec<u8>, columns: Vec<Column>) -> Self {
        let mut d = DesignMatrix::ordinal(response, 2, columns);
        d.binary = true;
        d
    }

    pub fn n_obs(&self) -> usize {
        self.response.len()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Row-major `n x k` covariate matrix, optionally prefixed by a column of ones.
    pub fn matrix(&self, intercept: bool) -> DMatrix<f64> {
        let n = self.n_obs();
        let off = usize::from(intercept);
        let k = self.columns.len() + off;
        DMatrix::from_fn(n, k, |i, j| {
            if intercept && j == 0 {
                1.0
            } else {
                self.columns[j - off].values[i]
            }
        })
    }

    pub fn response_f64(&self) -> Vec<f64> {
        self.response.iter().map(|&y| y as f64).collect()
    }

    pub fn with_column_replaced(&self, name: &str, column: Column) -> Result<DesignMatrix> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| Error::Invalid(format!("design has no column `{name}`")))?;
        let mut d = self.clone();
        d.columns[idx] = column;
        Ok(d)
    }

    pub fn with_column_added(&self, column: Column) -> DesignMatrix {
        let mut d = self.clone();
        d.columns.push(column);
        d
    }

    pub fn with_rows(&self, rows: &[usize]) -> DesignMatrix {
        DesignMatrix {
            response: rows.iter().map(|&i| self.response[i]).collect(),
            binary: self.binary,
            levels: self.levels,
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    kind: c.kind.clone(),
                    values: rows.iter().map(|&i| c.values[i]).collect(),
                })
                .collect(),
            instrument: self
                .instrument
                .as_ref()
                .map(|z| rows.iter().map(|&i| z[i]).collect()),
            clusters: rows.iter().map(|&i| self.clusters[i].clone()).collect(),
            dropped: self.dropped,
        }
    }

    /// Binary recoding of an ordinal design: 1 for the top category.
    pub fn binarize(&self) -> DesignMatrix {
        let mut d = self.clone();
        d.response = self
            .response
            .iter()
            .map(|&y| u8::from(y == self.levels))
            .collect();
        d.binary = true;
        d.levels = 2;
        d
    }

    /// Checks that every response category is present.
    pub fn check_response(&self) -> Result<()> {
        if self.n_obs() == 0 {
            return Err(Error::EmptyDesign(self.dropped));
        }
        let (lo, hi) = if self.binary {
            (0u8, 1u8)
        } else {
            (1u8, self.levels)
        };
        let mut seen = vec![false; hi as usize + 1];
        for &y in &self.response {
            if y < lo || y > hi {
                return Err(Error::Invalid(format!(
                    "response code {y} outside {lo}..={hi}"
                )));
            }
            seen[y as usize] = true;
        }
        for code in lo..=hi {
            if !seen[code as usize] {
                return Err(Error::MissingCategory(code));
            }
        }
        Ok(())
    }
}

/// Efficiency recoded to "top box": 6 becomes 1, anything else 0.
pub fn binarize_efficiency(design: &DesignMatrix) -> DesignMatrix {
    design.binarize()
}

/// One row per citation. Load and instrument come from the cited employee;
/// demographics from the endpoint named in `spec`. Rows whose employees are
/// unknown are dropped and counted.
pub fn build_design(
    citations: &[Citation],
    employees: &[Employee],
    metrics: &LoadMap,
    instrument: Option<&BTreeMap<EmployeeId, f64>>,
    spec: &DesignSpec,
) -> Result<DesignMatrix> {
    let by_id: HashMap<&EmployeeId, &Employee> = employees.iter().map(|e| (&e.id, e)).collect();
    let mut response = Vec::new();
    let mut clusters = Vec::new();
    let mut inst = Vec::new();
    let mut cols: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    let mut dropped = 0;

    for c in citations {
        let demo_id = match spec.demographics_from {
            Endpoint::Target => &c.target,
            Endpoint::Source => &c.source,
        };
        let (Some(_), Some(demo), Some(m)) = (
            by_id.get(&c.target),
            by_id.get(demo_id),
            metrics.get(&c.target),
        ) else {
            dropped += 1;
            continue;
        };
        let z = match instrument {
            Some(map) => match map.get(&c.target) {
                Some(&z) => Some(z),
                None => {
                    dropped += 1;
                    continue;
                }
            },
            None => None,
        };
        response.push(match spec.response {
            ResponseCoding::Ordinal => c.efficiency,
            ResponseCoding::TopBox => u8::from(c.efficiency == 6),
        });
        clusters.push(c.target.clone());
        if let Some(z) = z {
            inst.push(z);
        }
        for cov in &spec.covariates {
            match cov {
                Covariate::Load => cols.entry(LOAD).or_default().push(m.load as f64),
                Covariate::Knowledge => cols
                    .entry(KNOWLEDGE_COMPLEX)
                    .or_default()
                    .push(f64::from(u8::from(c.knowledge_complex()))),
                Covariate::Channel => {
                    for (name, ch) in [
                        (CHANNEL_PERSON, Channel::Person),
                        (CHANNEL_PHONE, Channel::Phone),
                        (CHANNEL_OTHER, Channel::Other),
                    ] {
                        cols.entry(name)
                            .or_default()
                            .push(f64::from(u8::from(c.channel == ch)));
                    }
                }
                Covariate::Seniority => cols
                    .entry(SENIORITY)
                    .or_default()
                    .push(demo.seniority as f64),
                Covariate::Age => cols.entry(AGE).or_default().push(demo.age as f64),
                Covariate::Gender => cols
                    .entry(GENDER_MALE)
                    .or_default()
                    .push(f64::from(u8::from(demo.gender == Gender::M))),
            }
        }
    }

    if response.is_empty() {
        return Err(Error::EmptyDesign(dropped));
    }

    // Fixed column order; report rows follow it.
    let mut columns = Vec::new();
    let mut take = |name: &'static str, group: Option<&str>| {
        if let Some(values) = cols.remove(name) {
            columns.push(match group {
                Some(g) => Column::dummy(name, g, values),
                None => Column::continuous(name, values),
            });
        }
    };
    take(LOAD, None);
    take(KNOWLEDGE_COMPLEX, Some("Knowledge"));
    take(CHANNEL_PERSON, Some("Channel"));
    take(CHANNEL_PHONE, Some("Channel"));
    take(CHANNEL_OTHER, Some("Channel"));
    take(SENIORITY, None);
    take(AGE, None);
    take(GENDER_MALE, Some("Gender"));

    let binary = spec.response == ResponseCoding::TopBox;
    let design = DesignMatrix {
        response,
        binary,
        levels: if binary { 2 } else { spec.levels },
        columns,
        instrument: instrument.map(|_| inst),
        clusters,
        dropped,
    };
    design.check_response()?;
    Ok(design)
}
