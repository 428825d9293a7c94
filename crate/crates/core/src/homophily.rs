//! Attribute-similarity network and the homophily instrument.
//!
//! Pairwise similarity is a weighted Gower score: categorical attributes
//! contribute 1 on a match and 0 otherwise, numeric ones contribute
//! `1 - |x_a - x_b| / range`. The instrument is the weighted degree of each
//! node in this network, the same construction as Load but on ties that no
//! employee chose.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::DesignMatrix;
use crate::ingest::{Employee, EmployeeId, Management};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Gender,
    Age,
    Seniority,
    Location,
    Management,
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeKind {
    Categorical,
    Numeric,
}

impl Attribute {
    pub fn kind(self) -> AttributeKind {
        match self {
            Attribute::Gender | Attribute::Location | Attribute::Management => {
                AttributeKind::Categorical
            }
            Attribute::Age | Attribute::Seniority | Attribute::Level => AttributeKind::Numeric,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Gender => "gender",
            Attribute::Age => "age",
            Attribute::Seniority => "seniority",
            Attribute::Location => "location",
            Attribute::Management => "management",
            Attribute::Level => "level",
        }
    }

    fn numeric(self, e: &Employee) -> f64 {
        match self {
            Attribute::Age => e.age as f64,
            Attribute::Seniority => e.seniority as f64,
            Attribute::Level => e.level as f64,
            _ => unreachable!("categorical attribute"),
        }
    }

    /// Categorical values compared for equality; `None` when missing.
    fn matches(self, a: &Employee, b: &Employee) -> Option<bool> {
        match self {
            Attribute::Gender => Some(a.gender == b.gender),
            Attribute::Location => Some(a.location == b.location),
            Attribute::Management => match (a.management, b.management) {
                (Management::Unknown, _) | (_, Management::Unknown) => None,
                (x, y) => Some(x == y),
            },
            _ => unreachable!("numeric attribute"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedAttribute {
    pub attribute: Attribute,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityConfig {
    pub attributes: Vec<WeightedAttribute>,
    #[serde(default)]
    pub sparsify_threshold: f64,
}

impl Default for SimilarityConfig {
    /// Gender, age and seniority with equal weights; dense network.
    fn default() -> Self {
        SimilarityConfig::equal(&[Attribute::Gender, Attribute::Age, Attribute::Seniority])
    }
}

impl SimilarityConfig {
    pub fn equal(attributes: &[Attribute]) -> Self {
        let w = 1.0 / attributes.len() as f64;
        SimilarityConfig {
            attributes: attributes
                .iter()
                .map(|&attribute| WeightedAttribute {
                    attribute,
                    weight: w,
                })
                .collect(),
            sparsify_threshold: 0.0,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::Config(
                "similarity needs at least one attribute".into(),
            ));
        }
        if self
            .attributes
            .iter()
            .any(|a| !(a.weight >= 0.0) || !a.weight.is_finite())
        {
            return Err(Error::Config(
                "similarity weights must be nonnegative".into(),
            ));
        }
        let total: f64 = self.attributes.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "similarity weights sum to {total}, expected 1"
            )));
        }
        if !(0.0..1.0).contains(&self.sparsify_threshold) {
            return Err(Error::Config(
                "sparsify_threshold must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Per-attribute ranges over a whole table; the Gower denominators.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeRanges {
    ranges: BTreeMap<Attribute, f64>,
    pub warnings: Vec<String>,
}

impl AttributeRanges {
    pub fn from_table(employees: &[Employee], config: &SimilarityConfig) -> Self {
        let mut ranges = BTreeMap::new();
        let mut warnings = Vec::new();
        for wa in &config.attributes {
            if wa.attribute.kind() != AttributeKind::Numeric {
                continue;
            }
            let (lo, hi) = employees
                .iter()
                .map(|e| wa.attribute.numeric(e))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            let range = if hi > lo { hi - lo } else { 0.0 };
            if range == 0.0 {
                warnings.push(format!(
                    "attribute {} has zero range; it contributes 1 to every pair",
                    wa.attribute.name()
                ));
            }
            ranges.insert(wa.attribute, range);
        }
        AttributeRanges { ranges, warnings }
    }

    pub fn range(&self, attribute: Attribute) -> Option<f64> {
        self.ranges.get(&attribute).copied()
    }
}

pub fn pairwise_similarity(
    a: &Employee,
    b: &Employee,
    config: &SimilarityConfig,
    ranges: &AttributeRanges,
) -> std::result::Result<f64, String> {
    let mut score = 0.0;
    for wa in &config.attributes {
        let contribution = match wa.attribute.kind() {
            AttributeKind::Categorical => match wa.attribute.matches(a, b) {
                Some(true) => 1.0,
                Some(false) => 0.0,
                None => {
                    return Err(format!(
                        "{} / {}: missing {}",
                        a.id,
                        b.id,
                        wa.attribute.name()
                    ))
                }
            },
            AttributeKind::Numeric => {
                let range = ranges.range(wa.attribute).unwrap_or(0.0);
                if range == 0.0 {
                    1.0
                } else {
                    1.0 - (wa.attribute.numeric(a) - wa.attribute.numeric(b)).abs() / range
                }
            }
        };
        score += wa.weight * contribution;
    }
    Ok(score.clamp(0.0, 1.0))
}

/// Dense symmetric similarity matrix stored as its strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityNetwork {
    nodes: Vec<EmployeeId>,
    upper: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SimilarityNetwork {
    /// Builds from a full row-major matrix; only the upper triangle is read.
    pub fn from_matrix(nodes: Vec<EmployeeId>, matrix: &[Vec<f64>]) -> Self {
        let n = nodes.len();
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for k in i + 1..n {
                upper.push(matrix[i][k]);
            }
        }
        SimilarityNetwork {
            nodes,
            upper,
            warnings: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[EmployeeId] {
        &self.nodes
    }

    pub fn pair_count(&self) -> usize {
        self.upper.len()
    }

    fn index(&self, i: usize, k: usize) -> usize {
        let (i, k) = if i < k { (i, k) } else { (k, i) };
        let n = self.nodes.len();
        i * n - i * (i + 1) / 2 + (k - i - 1)
    }

    pub fn weight(&self, i: usize, k: usize) -> f64 {
        if i == k {
            0.0
        } else {
            self.upper[self.index(i, k)]
        }
    }
}

pub fn build_similarity_network(
    employees: &[Employee],
    config: &SimilarityConfig,
) -> Result<SimilarityNetwork> {
    config.check()?;
    if employees.is_empty() {
        return Err(Error::Invalid(
            "similarity network needs a non-empty employee table".into(),
        ));
    }
    let ranges = AttributeRanges::from_table(employees, config);
    let n = employees.len();
    let rows: Vec<std::result::Result<Vec<f64>, String>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|k| {
                    pairwise_similarity(&employees[i], &employees[k], config, &ranges).map(|s| {
                        if s < config.sparsify_threshold {
                            0.0
                        } else {
                            s
                        }
                    })
                })
                .collect()
        })
        .collect();
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    let mut errors = Vec::new();
    for row in rows {
        match row {
            Ok(r) => upper.extend(r),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Invalid(format!(
            "similarity undefined for {} employee rows, first: {}",
            errors.len(),
            errors[0]
        )));
    }
    Ok(SimilarityNetwork {
        nodes: employees.iter().map(|e| e.id.clone()).collect(),
        upper,
        warnings: ranges.warnings,
    })
}

/// Weighted degree of every node, summed over partners in node order.
pub fn instrument_centrality(simnet: &SimilarityNetwork) -> BTreeMap<EmployeeId, f64> {
    let n = simnet.nodes.len();
    (0..n)
        .map(|i| {
            let mut total = 0.0;
            for k in 0..n {
                if k != i {
                    total += simnet.weight(i, k);
                }
            }
            (simnet.nodes[i].clone(), total)
        })
        .collect()
}

pub fn write_instrument_csv<W: Write>(
    out: W,
    instrument: &BTreeMap<EmployeeId, f64>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "instrument"])
        .map_err(|e| Error::Serialize(e.to_string()))?;
    for (id, v) in instrument {
        w.write_record([id.as_str(), &format!("{v:.12}")])
            .map_err(|e| Error::Serialize(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))
}

pub fn export_instrument(instrument: &BTreeMap<EmployeeId, f64>, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_instrument_csv(&mut buf, instrument)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// First-stage F below this flags a weak instrument.
pub const WEAK_INSTRUMENT_F: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstStageDiagnostics {
    pub f_excluded: f64,
    pub partial_r2: f64,
    pub weak: bool,
}

/// Strength of the edge-level instrument in the linear first stage.
pub fn instrument_strength(
    design: &DesignMatrix,
    instrument: &[f64],
) -> Result<FirstStageDiagnostics> {
    let fs = crate::iv::first_stage(design, instrument)?;
    Ok(fs.diagnostics())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Gender;
    use proptest::prelude::*;

    fn emp(id: &str, gender: Gender, age: u32, seniority: u32) -> Employee {
        Employee {
            id: EmployeeId::new(id),
            gender,
            age,
            seniority,
            location: "Trieste".into(),
            management: Management::No,
            level: 2,
        }
    }

    #[test]
    fn identical_profiles_score_one() {
        let table = [
            emp("a", Gender::F, 40, 10),
            emp("b", Gender::F, 40, 10),
            emp("c", Gender::M, 60, 30),
        ];
        let cfg = SimilarityConfig::default();
        let r = AttributeRanges::from_table(&table, &cfg);
        assert_eq!(
            pairwise_similarity(&table[0], &table[1], &cfg, &r).unwrap(),
            1.0
        );
    }

    #[test]
    fn maximal_dissimilarity_scores_zero() {
        let table = [emp("a", Gender::F, 27, 0), emp("b", Gender::M, 68, 40)];
        let cfg = SimilarityConfig::default();
        let r = AttributeRanges::from_table(&table, &cfg);
        assert_eq!(
            pairwise_similarity(&table[0], &table[1], &cfg, &r).unwrap(),
            0.0
        );
    }

    #[test]
    fn hand_computed_gower_score() {
        // Age range 27..68 (41), seniority range 0..40; pair: same gender,
        // ages 10 apart, same seniority.
        let table = [
            emp("lo", Gender::M, 27, 0),
            emp("hi", Gender::F, 68, 40),
            emp("a", Gender::M, 40, 12),
            emp("b", Gender::M, 50, 12),
        ];
        let cfg = SimilarityConfig::default();
        let r = AttributeRanges::from_table(&table, &cfg);
        let s = pairwise_similarity(&table[2], &table[3], &cfg, &r).unwrap();
        let expected = (1.0 + (1.0 - 10.0 / 41.0) + 1.0) / 3.0;
        assert!((s - expected).abs() < 1e-15);
        assert!((s - 0.9187).abs() < 5e-5);
    }

    #[test]
    fn zero_range_contributes_one_with_warning() {
        let table = [emp("a", Gender::F, 40, 10), emp("b", Gender::M, 40, 10)];
        let net = build_similarity_network(&table, &SimilarityConfig::default()).unwrap();
        assert_eq!(net.warnings.len(), 2);
        assert!((net.weight(0, 1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn missing_management_is_an_error() {
        let mut table = vec![emp("a", Gender::F, 40, 10), emp("b", Gender::M, 41, 10)];
        table[1].management = Management::Unknown;
        let cfg = SimilarityConfig::equal(&[Attribute::Gender, Attribute::Management]);
        assert!(build_similarity_network(&table, &cfg).is_err());
        // Not configured, not consulted.
        assert!(build_similarity_network(&table, &SimilarityConfig::default()).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(SimilarityConfig {
            attributes: vec![],
            sparsify_threshold: 0.0
        }
        .check()
        .is_err());
        let mut cfg = SimilarityConfig::default();
        cfg.attributes[0].weight = 0.5;
        assert!(cfg.check().is_err());
        let cfg = SimilarityConfig {
            sparsify_threshold: 1.0,
            ..SimilarityConfig::default()
        };
        assert!(cfg.check().is_err());
    }

    #[test]
    fn minimal_and_identical_networks() {
        let two = [emp("a", Gender::F, 30, 1), emp("b", Gender::M, 50, 20)];
        let net = build_similarity_network(&two, &SimilarityConfig::default()).unwrap();
        assert_eq!(net.pair_count(), 1);
        assert_eq!(net.weight(0, 1), net.weight(1, 0));
        assert_eq!(net.weight(0, 0), 0.0);

        let same: Vec<Employee> = (0..7)
            .map(|i| emp(&format!("e{i}"), Gender::M, 44, 9))
            .collect();
        let net = build_similarity_network(&same, &SimilarityConfig::default()).unwrap();
        let inst = instrument_centrality(&net);
        assert!(inst.values().all(|&v| v == 6.0));
    }

    #[test]
    fn dense_pair_count_at_survey_scale() {
        let table: Vec<Employee> = (0..303)
            .map(|i| {
                emp(
                    &format!("e{i:03}"),
                    if i % 5 < 3 { Gender::M } else { Gender::F },
                    27 + i % 42,
                    i % 27,
                )
            })
            .collect();
        let net = build_similarity_network(&table, &SimilarityConfig::default()).unwrap();
        assert_eq!(net.pair_count(), 45_753);
    }

    #[test]
    fn three_node_instrument() {
        let nodes: Vec<EmployeeId> = ["1", "2", "3"].iter().map(|&s| s.into()).collect();
        let m = vec![
            vec![0.0, 0.5, 0.2],
            vec![0.5, 0.0, 0.0],
            vec![0.2, 0.0, 0.0],
        ];
        let inst = instrument_centrality(&SimilarityNetwork::from_matrix(nodes, &m));
        assert_eq!(inst[&"1".into()], 0.7);
        assert_eq!(inst[&"2".into()], 0.5);
        assert_eq!(inst[&"3".into()], 0.2);
    }

    #[test]
    fn sparsify_zeroes_weak_ties() {
        let table = [
            emp("a", Gender::F, 27, 0),
            emp("b", Gender::F, 68, 40),
            emp("c", Gender::F, 30, 3),
        ];
        let cfg = SimilarityConfig {
            sparsify_threshold: 0.5,
            ..SimilarityConfig::default()
        };
        let net = build_similarity_network(&table, &cfg).unwrap();
        assert_eq!(net.weight(0, 1), 0.0);
        assert!(net.weight(0, 2) > 0.5);
    }

    fn arb_table() -> impl Strategy<Value = Vec<Employee>> {
        prop::collection::vec((prop::bool::ANY, 20u32..70, 0u32..20), 2..25).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (m, age, sen))| {
                    emp(
                        &format!("e{i:02}"),
                        if m { Gender::M } else { Gender::F },
                        age,
                        sen.min(age),
                    )
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn similarity_is_bounded_and_symmetric(table in arb_table()) {
            let net = build_similarity_network(&table, &SimilarityConfig::default()).unwrap();
            for i in 0..table.len() {
                for k in 0..table.len() {
                    let w = net.weight(i, k);
                    prop_assert!((0.0..=1.0).contains(&w));
                    prop_assert_eq!(w, net.weight(k, i));
                }
            }
        }

        #[test]
        fn rescaled_age_leaves_similarity_unchanged(table in arb_table()) {
            let months: Vec<Employee> = table.iter().map(|e| Employee { age: e.age * 12, seniority: e.seniority * 12, ..e.clone() }).collect();
            let cfg = SimilarityConfig::default();
            let r1 = AttributeRanges::from_table(&table, &cfg);
            let r2 = AttributeRanges::from_table(&months, &cfg);
            for i in 0..table.len() {
                for k in 0..table.len() {
                    let a = pairwise_similarity(&table[i], &table[k], &cfg, &r1).unwrap();
                    let b = pairwise_similarity(&months[i], &months[k], &cfg, &r2).unwrap();
                    prop_assert!((a - b).abs() < 1e-14);
                }
            }
        }

        #[test]
        fn permuting_table_permutes_instrument(table in arb_table(), rot in 0usize..25) {
            let mut rotated = table.clone();
            let len = rotated.len();
            rotated.rotate_left(rot % len);
            let cfg = SimilarityConfig::default();
            let a = instrument_centrality(&build_similarity_network(&table, &cfg).unwrap());
            let b = instrument_centrality(&build_similarity_network(&rotated, &cfg).unwrap());
            for (id, v) in &a {
                prop_assert!((b[id] - v).abs() < 1e-12);
            }
        }

        #[test]
        fn instrument_monotone_in_weights(bump in 0.0f64..0.5) {
            let nodes: Vec<EmployeeId> = ["1", "2", "3"].iter().map(|&s| s.into()).collect();
            let base = vec![vec![0.0, 0.3, 0.2], vec![0.3, 0.0, 0.4], vec![0.2, 0.4, 0.0]];
            let mut up = base.clone();
            up[0][1] += bump;
            up[1][0] += bump;
            let a = instrument_centrality(&SimilarityNetwork::from_matrix(nodes.clone(), &base));
            let b = instrument_centrality(&SimilarityNetwork::from_matrix(nodes, &up));
            for id in a.keys() {
                prop_assert!(b[id] >= a[id]);
            }
        }
    }
}
