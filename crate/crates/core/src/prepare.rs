//! Raw tables to an instrumented edge-level design.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::estimation::{build_design, DesignMatrix, DesignSpec};
use crate::homophily::{build_similarity_network, instrument_centrality, SimilarityConfig};
use crate::ingest::{Citation, Employee, EmployeeId};
use crate::network::{build_network, load_centrality, LoadMap, OrgNetwork};

#[derive(Debug, Clone)]
pub struct Prepared {
    pub network: OrgNetwork,
    pub metrics: LoadMap,
    pub instrument: BTreeMap<EmployeeId, f64>,
    /// Carries the instrument joined by cited employee.
    pub design: DesignMatrix,
    pub warnings: Vec<String>,
}

impl Prepared {
    pub fn instrument_column(&self) -> &[f64] {
        self.design
            .instrument
            .as_deref()
            .expect("prepared designs carry the instrument")
    }
}

pub fn prepare(
    employees: &[Employee],
    citations: &[Citation],
    similarity: &SimilarityConfig,
    spec: &DesignSpec,
) -> Result<Prepared> {
    let built = build_network(employees, citations);
    let metrics = load_centrality(&built.network);
    let simnet = build_similarity_network(employees, similarity)?;
    let instrument = instrument_centrality(&simnet);
    let design = build_design(citations, employees, &metrics, Some(&instrument), spec)?;
    let mut warnings = built.warnings;
    warnings.extend(simnet.warnings);
    Ok(Prepared {
        network: built.network,
        metrics,
        instrument,
        design,
        warnings,
    })
}
