//! The directed knowledge-exchange network and its Load centrality.
//!
//! An edge `s -> t` means employee `s` went to `t` for help. Load is the
//! frequency-weighted in-degree: the total demand on an employee's expertise.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use quick_xml::escape::escape;
use quick_xml::events::Event;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Citation, Employee, EmployeeId};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: EmployeeId,
    pub target: EmployeeId,
    pub frequency: u8,
    pub efficiency: f64,
}

/// Citation graph. Immutable once built; node order is lexicographic by id
/// and edge order follows the first appearance of each source/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OrgNetwork {
    nodes: Vec<EmployeeId>,
    edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkBuild {
    pub network: OrgNetwork,
    pub warnings: Vec<String>,
}

impl OrgNetwork {
    /// Builds a network directly from edges; endpoints are added as nodes.
    pub fn from_edges(extra_nodes: impl IntoIterator<Item = EmployeeId>, edges: Vec<Edge>) -> Self {
        let mut nodes: Vec<EmployeeId> = extra_nodes.into_iter().collect();
        for e in &edges {
            nodes.push(e.source.clone());
            nodes.push(e.target.clone());
        }
        nodes.sort();
        nodes.dedup();
        OrgNetwork { nodes, edges }
    }

    pub fn nodes(&self) -> &[EmployeeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Node set is every employee plus every citation endpoint. A repeated
/// source/target pair is merged into one edge keeping the highest
/// frequency and the mean efficiency.
pub fn build_network(employees: &[Employee], citations: &[Citation]) -> NetworkBuild {
    let mut slot: HashMap<(&EmployeeId, &EmployeeId), (usize, u32)> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::with_capacity(citations.len());
    let mut warnings = Vec::new();
    for (row, c) in citations.iter().enumerate() {
        match slot.get_mut(&(&c.source, &c.target)) {
            Some((idx, merged)) => {
                let e = &mut edges[*idx];
                *merged += 1;
                e.frequency = e.frequency.max(c.frequency);
                e.efficiency += (c.efficiency as f64 - e.efficiency) / *merged as f64;
                warnings.push(format!(
                    "row {}: duplicate citation {} -> {} merged",
                    row + 1,
                    c.source,
                    c.target
                ));
            }
            None => {
                slot.insert((&c.source, &c.target), (edges.len(), 1));
                edges.push(Edge {
                    source: c.source.clone(),
                    target: c.target.clone(),
                    frequency: c.frequency,
                    efficiency: c.efficiency as f64,
                });
            }
        }
    }
    NetworkBuild {
        network: OrgNetwork::from_edges(employees.iter().map(|e| e.id.clone()), edges),
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub load: u32,
    pub in_degree: u32,
    /// Mean efficiency of incoming edges; `None` when nobody cites the node.
    pub avg_efficiency: Option<f64>,
}

pub type LoadMap = BTreeMap<EmployeeId, NodeMetrics>;

pub fn load_centrality(network: &OrgNetwork) -> LoadMap {
    let mut acc: BTreeMap<&EmployeeId, (u32, u32, f64)> =
        network.nodes.iter().map(|n| (n, (0, 0, 0.0))).collect();
    for e in &network.edges {
        let slot = acc.get_mut(&e.target).expect("edge endpoint is a node");
        slot.0 += e.frequency as u32;
        slot.1 += 1;
        slot.2 += e.efficiency;
    }
    acc.into_iter()
        .map(|(id, (load, in_degree, eff))| {
            let avg_efficiency = (in_degree > 0).then(|| eff / in_degree as f64);
            (
                id.clone(),
                NodeMetrics {
                    load,
                    in_degree,
                    avg_efficiency,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n_nodes: usize,
    pub n_edges: usize,
    /// (in-degree, node count), ascending.
    pub in_degree_histogram: Vec<(u32, usize)>,
    /// (load, node count), ascending.
    pub load_histogram: Vec<(u32, usize)>,
    pub in_degree_skewness: f64,
    pub load_skewness: f64,
    /// Share of total load held by the top ceil(10% of nodes).
    pub top_decile_load_share: f64,
}

pub fn network_summary(network: &OrgNetwork) -> Result<DistributionSummary> {
    if network.node_count() < 2 {
        return Err(Error::Invalid(format!(
            "network summary needs at least 2 nodes, found {}",
            network.node_count()
        )));
    }
    let metrics = load_centrality(network);
    let loads: Vec<u32> = metrics.values().map(|m| m.load).collect();
    let degrees: Vec<u32> = metrics.values().map(|m| m.in_degree).collect();
    let histogram = |v: &[u32]| {
        let mut h: BTreeMap<u32, usize> = BTreeMap::new();
        for &x in v {
            *h.entry(x).or_default() += 1;
        }
        h.into_iter().collect::<Vec<_>>()
    };
    let as_f64 = |v: &[u32]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();

    let mut sorted = loads.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let top = ((sorted.len() as f64) * 0.1).ceil() as usize;
    let total: u64 = sorted.iter().map(|&x| x as u64).sum();
    let top_sum: u64 = sorted[..top].iter().map(|&x| x as u64).sum();
    let share = if total == 0 {
        0.0
    } else {
        top_sum as f64 / total as f64
    };

    Ok(DistributionSummary {
        n_nodes: network.node_count(),
        n_edges: network.edge_count(),
        in_degree_histogram: histogram(&degrees),
        load_histogram: histogram(&loads),
        in_degree_skewness: stats::skewness(&as_f64(&degrees)),
        load_skewness: stats::skewness(&as_f64(&loads)),
        top_decile_load_share: share,
    })
}

const GRAPHML_NS: &str = "http://graphml.graphdrawing.org/xmlns";

/// Writes GraphML: node `load` (size) and `avg_efficiency` (colour, three
/// decimals, omitted for uncited nodes); edge `frequency` and `efficiency`.
pub fn write_graphml<W: Write>(
    mut out: W,
    network: &OrgNetwork,
    metrics: &LoadMap,
) -> std::io::Result<()> {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<graphml xmlns="{GRAPHML_NS}">"#)?;
    writeln!(
        out,
        r#"  <key id="load" for="node" attr.name="load" attr.type="int"/>"#
    )?;
    writeln!(
        out,
        r#"  <key id="in_degree" for="node" attr.name="in_degree" attr.type="int"/>"#
    )?;
    writeln!(
        out,
        r#"  <key id="avg_efficiency" for="node" attr.name="avg_efficiency" attr.type="double"/>"#
    )?;
    writeln!(
        out,
        r#"  <key id="frequency" for="edge" attr.name="frequency" attr.type="int"/>"#
    )?;
    writeln!(
        out,
        r#"  <key id="efficiency" for="edge" attr.name="efficiency" attr.type="double"/>"#
    )?;
    writeln!(out, r#"  <graph id="advice" edgedefault="directed">"#)?;
    for id in &network.nodes {
        let m = metrics.get(id).copied().unwrap_or(NodeMetrics {
            load: 0,
            in_degree: 0,
            avg_efficiency: None,
        });
        write!(
            out,
            r#"    <node id="{}"><data key="load">{}</data><data key="in_degree">{}</data>"#,
            escape(id.as_str()),
            m.load,
            m.in_degree
        )?;
        if let Some(avg) = m.avg_efficiency {
            write!(out, r#"<data key="avg_efficiency">{avg:.3}</data>"#)?;
        }
        writeln!(out, "</node>")?;
    }
    for e in &network.edges {
        writeln!(
            out,
            r#"    <edge source="{}" target="{}"><data key="frequency">{}</data><data key="efficiency">{}</data></edge>"#,
            escape(e.source.as_str()),
            escape(e.target.as_str()),
            e.frequency,
            e.efficiency
        )?;
    }
    writeln!(out, "  </graph>")?;
    writeln!(out, "</graphml>")?;
    Ok(())
}

pub fn export_graph(network: &OrgNetwork, metrics: &LoadMap, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_graphml(&mut buf, network, metrics).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphmlNode {
    pub id: EmployeeId,
    pub load: Option<u32>,
    pub avg_efficiency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphmlDocument {
    pub nodes: Vec<GraphmlNode>,
    pub edges: Vec<Edge>,
}

impl GraphmlDocument {
    pub fn into_network(self) -> OrgNetwork {
        OrgNetwork::from_edges(self.nodes.into_iter().map(|n| n.id), self.edges)
    }
}

fn xml_err(e: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("graphml: {e}"))
}

/// Reads back the subset of GraphML that [`write_graphml`] produces.
pub fn read_graphml<R: Read>(mut input: R) -> Result<GraphmlDocument> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::Invalid(format!("graphml: {e}")))?;
    let mut reader = quick_xml::Reader::from_str(&text);
    reader.config_mut().trim_text(true);

    let mut doc = GraphmlDocument {
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    let mut node: Option<GraphmlNode> = None;
    let mut edge: Option<(EmployeeId, EmployeeId, Option<u8>, Option<f64>)> = None;
    let mut data_key: Option<String> = None;

    let attr = |e: &quick_xml::events::BytesStart, name: &str| -> Result<Option<String>> {
        for a in e.attributes() {
            let a = a.map_err(xml_err)?;
            if a.key.as_ref() == name {
                return Ok(Some(
                    a.normalized_value(quick_xml::XmlVersion::Implicit1_0)
                        .map_err(xml_err)?
                        .into_owned(),
                ));
            }
        }
        Ok(None)
    };

    loop {
        match reader.read_event().map_err(xml_err)? {
            Event::Start(e) => match e.name().as_ref() {
                "node" => {
                    let id = attr(&e, "id")?.ok_or_else(|| xml_err("node without id"))?;
                    node = Some(GraphmlNode {
                        id: EmployeeId::new(id),
                        load: None,
                        avg_efficiency: None,
                    });
                }
                "edge" => {
                    let s = attr(&e, "source")?.ok_or_else(|| xml_err("edge without source"))?;
                    let t = attr(&e, "target")?.ok_or_else(|| xml_err("edge without target"))?;
                    edge = Some((EmployeeId::new(s), EmployeeId::new(t), None, None));
                }
                "data" => data_key = attr(&e, "key")?,
                _ => {}
            },
            Event::Empty(e) if e.name().as_ref() == "node" => {
                let id = attr(&e, "id")?.ok_or_else(|| xml_err("node without id"))?;
                doc.nodes.push(GraphmlNode {
                    id: EmployeeId::new(id),
                    load: None,
                    avg_efficiency: None,
                });
            }
            Event::Text(t) => {
                let value = t.xml10_content().into_owned();
                let key = data_key.as_deref().unwrap_or("");
                if let Some(n) = node.as_mut() {
                    match key {
                        "load" => n.load = Some(value.parse().map_err(xml_err)?),
                        "avg_efficiency" => {
                            n.avg_efficiency = Some(value.parse().map_err(xml_err)?)
                        }
                        _ => {}
                    }
                } else if let Some(ed) = edge.as_mut() {
                    match key {
                        "frequency" => ed.2 = Some(value.parse().map_err(xml_err)?),
                        "efficiency" => ed.3 = Some(value.parse().map_err(xml_err)?),
                        _ => {}
                    }
                }
            }
            Event::End(e) => match e.name().as_ref() {
                "node" => doc.nodes.extend(node.take()),
                "edge" => {
                    if let Some((source, target, f, eff)) = edge.take() {
                        doc.edges.push(Edge {
                            source,
                            target,
                            frequency: f.ok_or_else(|| xml_err("edge without frequency"))?,
                            efficiency: eff.ok_or_else(|| xml_err("edge without efficiency"))?,
                        });
                    }
                }
                "data" => data_key = None,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(doc)
}
