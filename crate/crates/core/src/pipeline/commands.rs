//! Subcommands. Each returns an [`Outcome`]; nothing here exits the process
//! or touches the input files beyond reading them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::{
    brant_test, correlation_matrix, hosmer_lemeshow_ordinal, lipsitz_test,
    pulkstenis_robinson_test, TestResult, VarKind, Variable,
};
use crate::error::{Error, Result};
use crate::estimation::design::{LOAD, LOAD_IV};
use crate::estimation::{
    observed_grid, predict_curve, Endpoint, ModelFit, ModelKind, ParamRole, ProbabilityCurve,
};
use crate::homophily::{build_similarity_network, instrument_centrality, write_instrument_csv};
use crate::ingest::{
    descriptive_stats, parse_citations_lenient, parse_employees_lenient, validate, write_citations,
    write_employees, Citation, DescriptiveReport, Employee, EmployeeId, Finding, Gender,
    ValidationReport,
};
use crate::iv::{bootstrap_se, estimator_battery_with, BatteryReport, Estimator, FooterRow};
use crate::network::{
    build_network, load_centrality, network_summary, write_graphml, DistributionSummary, LoadMap,
    OrgNetwork,
};
use crate::prepare::{prepare, Prepared};
use crate::sim::{endogeneity_study, simulate_org, survey_fixture, SimTruth};

use super::bundle::Bundle;
use super::config::{Format, RunConfig};
use super::plot::{forest_plot, probability_plot};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_ESTIMATION: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: u8, stderr: impl Into<String>) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr: stderr.into(),
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Serialize(e.to_string()))
}

/// The configuration as recorded in manifests; the output directory is
/// left out so bundles written to different places compare equal.
fn manifest_config(config: &RunConfig) -> serde_json::Value {
    let mut c = config.clone();
    c.out_dir = PathBuf::from(".");
    serde_json::to_value(c).unwrap_or(serde_json::Value::Null)
}

fn io_outcome(e: Error) -> Outcome {
    Outcome::fail(EXIT_IO, e.to_string())
}

struct Inputs {
    employees: Vec<Employee>,
    citations: Vec<Citation>,
    report: ValidationReport,
}

/// Reads both tables leniently. I/O problems are fatal; malformed content
/// becomes validation findings.
fn read_inputs(config: &RunConfig) -> std::result::Result<Inputs, Outcome> {
    for p in [&config.employees, &config.citations] {
        if !p.is_file() {
            return Err(Outcome::fail(
                EXIT_IO,
                format!("input file {} does not exist", p.display()),
            ));
        }
    }
    let mut report = ValidationReport::default();
    let table_error = |report: &mut ValidationReport, e: Error| match e {
        Error::Io { .. } => Err(io_outcome(e)),
        other => {
            report.errors.push(Finding {
                row: 0,
                field: "table".into(),
                message: other.to_string(),
            });
            Ok(())
        }
    };
    let employees = match parse_employees_lenient(&config.employees) {
        Ok((e, r)) => {
            report.absorb(r);
            e
        }
        Err(e) => {
            table_error(&mut report, e)?;
            Vec::new()
        }
    };
    let citations = match parse_citations_lenient(&config.citations) {
        Ok((c, r)) => {
            report.absorb(r);
            c
        }
        Err(e) => {
            table_error(&mut report, e)?;
            Vec::new()
        }
    };
    let checks = validate(&employees, &citations);
    report.errors.extend(checks.errors);
    report.warnings.extend(checks.warnings);
    Ok(Inputs {
        employees,
        citations,
        report,
    })
}

fn render_validation(report: &ValidationReport, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(report.to_text()),
        Format::Machine => json(report),
    }
}

pub fn cmd_validate(config: &RunConfig) -> Outcome {
    let inputs = match read_inputs(config) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let name = format!("validation.{}", config.format.extension());
    let run = || -> Result<Outcome> {
        let mut bundle = Bundle::create(&config.out_dir, "validate", vec![name.clone()])?;
        bundle.record_input(&config.employees)?;
        bundle.record_input(&config.citations)?;
        let text = render_validation(&inputs.report, config.format)?;
        bundle.write(&name, &text)?;
        let code = if inputs.report.is_clean() {
            EXIT_OK
        } else {
            EXIT_VALIDATION
        };
        bundle.finish(code, manifest_config(config))?;
        Ok(Outcome {
            code,
            stdout: text,
            stderr: String::new(),
        })
    };
    run().unwrap_or_else(io_outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Descriptives {
    pub tables: DescriptiveReport,
    pub network: Option<DistributionSummary>,
    pub warnings: Vec<String>,
}

impl Descriptives {
    pub fn to_text(&self) -> String {
        let mut out = self.tables.to_text();
        if let Some(n) = &self.network {
            let _ = write!(
                out,
                "\nNetwork: {} nodes, {} edges; skewness of in-degree {:.3}, of Load {:.3}; top decile holds {:.1}% of Load\n",
                n.n_nodes,
                n.n_edges,
                n.in_degree_skewness,
                n.load_skewness,
                100.0 * n.top_decile_load_share
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

fn describe(
    employees: &[Employee],
    citations: &[Citation],
    network: &OrgNetwork,
    metrics: &LoadMap,
    warnings: Vec<String>,
) -> Descriptives {
    let load: Vec<f64> = employees
        .iter()
        .map(|e| metrics.get(&e.id).map_or(0.0, |m| m.load as f64))
        .collect();
    Descriptives {
        tables: descriptive_stats(employees, citations, &load),
        network: network_summary(network).ok(),
        warnings,
    }
}

fn render_descriptives(d: &Descriptives, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(d.to_text()),
        Format::Machine => json(d),
    }
}

pub fn cmd_describe(config: &RunConfig) -> Outcome {
    let inputs = match read_inputs(config) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let name = format!("descriptives.{}", config.format.extension());
    let run = || -> Result<Outcome> {
        let mut bundle = Bundle::create(&config.out_dir, "describe", vec![name.clone()])?;
        bundle.record_input(&config.employees)?;
        bundle.record_input(&config.citations)?;
        let built = build_network(&inputs.employees, &inputs.citations);
        let metrics = load_centrality(&built.network);
        let d = describe(
            &inputs.employees,
            &inputs.citations,
            &built.network,
            &metrics,
            built.warnings,
        );
        let text = render_descriptives(&d, config.format)?;
        bundle.write(&name, &text)?;
        bundle.finish(EXIT_OK, manifest_config(config))?;
        Ok(Outcome::ok(text))
    };
    run().unwrap_or_else(io_outcome)
}

pub fn cmd_export_graph(config: &RunConfig) -> Outcome {
    let inputs = match read_inputs(config) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let run = || -> Result<Outcome> {
        let mut bundle = Bundle::create(
            &config.out_dir,
            "export-graph",
            vec![GRAPH.into(), "instrument.csv".into()],
        )?;
        bundle.record_input(&config.employees)?;
        bundle.record_input(&config.citations)?;
        let built = build_network(&inputs.employees, &inputs.citations);
        let metrics = load_centrality(&built.network);
        bundle.write(GRAPH, graphml(&built.network, &metrics))?;
        let mut code = EXIT_OK;
        match build_similarity_network(&inputs.employees, &config.similarity) {
            Ok(simnet) => {
                let mut buf = Vec::new();
                write_instrument_csv(&mut buf, &instrument_centrality(&simnet))?;
                bundle.write("instrument.csv", buf)?;
            }
            Err(e) => {
                bundle.error("instrument", &e);
                code = EXIT_VALIDATION;
            }
        }
        let m = bundle.finish(code, manifest_config(config))?;
        Ok(Outcome {
            code,
            stdout: format!(
                "wrote {} files to {}\n",
                m.files.len(),
                config.out_dir.display()
            ),
            stderr: m.errors.join("\n"),
        })
    };
    run().unwrap_or_else(io_outcome)
}

const GRAPH: &str = "network.graphml";
const CORRELATIONS: &str = "correlations.csv";
const ODDS: &str = "odds_ratios.csv";
const PREDICTIONS: &str = "predicted_probabilities.csv";
const ODDS_SVG: &str = "odds_ratios.svg";
const PREDICTIONS_SVG: &str = "predicted_probabilities.svg";

/// The eight files of a complete analysis bundle.
pub fn analysis_files(format: Format) -> Vec<String> {
    let ext = format.extension();
    vec![
        format!("descriptives.{ext}"),
        CORRELATIONS.into(),
        format!("models.{ext}"),
        ODDS.into(),
        PREDICTIONS.into(),
        GRAPH.into(),
        ODDS_SVG.into(),
        PREDICTIONS_SVG.into(),
    ]
}

fn graphml(network: &OrgNetwork, metrics: &LoadMap) -> Vec<u8> {
    let mut buf = Vec::new();
    write_graphml(&mut buf, network, metrics).expect("writing to memory cannot fail");
    buf
}

/// Edge-level variables of the correlation table; demographics and Load
/// describe the employee chosen by `from`.
pub fn correlation_variables(
    employees: &[Employee],
    citations: &[Citation],
    metrics: &LoadMap,
    from: Endpoint,
) -> Vec<Variable> {
    let by_id: BTreeMap<&EmployeeId, &Employee> = employees.iter().map(|e| (&e.id, e)).collect();
    let rows: Vec<&Citation> = citations
        .iter()
        .filter(|c| metrics.contains_key(&c.target))
        .collect();
    let who = |c: &Citation| {
        by_id
            .get(match from {
                Endpoint::Target => &c.target,
                Endpoint::Source => &c.source,
            })
            .copied()
    };
    let var = |name: &str, kind: VarKind, f: &dyn Fn(&Citation) -> Option<f64>| Variable {
        name: name.into(),
        kind,
        values: rows.iter().map(|c| f(c)).collect(),
    };
    vec![
        var("Efficiency", VarKind::Ordinal, &|c| {
            Some(f64::from(c.efficiency))
        }),
        var("Knowledge", VarKind::Ordinal, &|c| {
            Some(f64::from(c.knowledge))
        }),
        var("Channel", VarKind::Ordinal, &|c| {
            Some(f64::from(c.channel.rank()))
        }),
        var("Gender", VarKind::Ordinal, &|c| {
            who(c).map(|e| f64::from(u8::from(e.gender == Gender::M)))
        }),
        var("Age", VarKind::Numeric, &|c| who(c).map(|e| e.age as f64)),
        var("Seniority", VarKind::Numeric, &|c| {
            who(c).map(|e| e.seniority as f64)
        }),
        var("Load", VarKind::Numeric, &|c| {
            metrics.get(&c.target).map(|m| m.load as f64)
        }),
    ]
}

fn footer_row(
    name: &str,
    column: usize,
    r: &Result<TestResult>,
    notes: &mut Vec<String>,
) -> FooterRow {
    match r {
        Ok(t) => {
            for w in &t.warnings {
                notes.push(format!("{name} test: {w}"));
            }
            FooterRow {
                name: name.into(),
                column,
                p_value: Some(t.p_value),
                note: None,
            }
        }
        Err(e) => {
            notes.push(format!("{name} test failed: {e}"));
            FooterRow {
                name: name.into(),
                column,
                p_value: None,
                note: Some("n/a".into()),
            }
        }
    }
}

/// Appends the selected diagnostics: Brant under the naive column, the
/// goodness-of-fit tests under the 2SRI ordered column.
fn attach_diagnostics(report: &mut BatteryReport, config: &RunConfig) {
    let sel = &config.diagnostics;
    let column = |report: &BatteryReport, pred: &dyn Fn(Estimator, ModelKind) -> bool| {
        report
            .columns
            .iter()
            .position(|c| pred(c.estimator, c.kind))
    };
    let mut notes = Vec::new();
    let mut rows = Vec::new();
    let missing = || {
        Err(Error::Invalid(
            "the model column did not produce a fit".into(),
        ))
    };

    if sel.brant {
        if let Some(c) = column(report, &|e, k| {
            e == Estimator::Naive && k == ModelKind::OrderedLogit
        }) {
            let col = &report.columns[c];
            let r = match (&col.fit, &col.design) {
                (Some(f), Some(d)) => brant_test(d, f),
                _ => missing(),
            };
            rows.push(footer_row("Brant", c, &r, &mut notes));
        }
    }
    if let Some(c) = report.diagnostic_column() {
        let col = &report.columns[c];
        let pair = col.fit.as_ref().zip(col.design.as_ref());
        if sel.lipsitz {
            let r = pair.map_or_else(missing, |(f, d)| lipsitz_test(d, f, sel.lipsitz_groups));
            rows.push(footer_row("Lipsitz", c, &r, &mut notes));
        }
        if sel.pulkstenis_robinson {
            let r = pair.map_or_else(missing, |(f, d)| {
                pulkstenis_robinson_test(d, f).map(|(chi, _)| chi)
            });
            rows.push(footer_row("Pulkstenis-Robinson", c, &r, &mut notes));
        }
        if sel.hosmer_lemeshow {
            let r = pair.map_or_else(missing, |(f, d)| {
                hosmer_lemeshow_ordinal(d, f, sel.hosmer_lemeshow_groups)
            });
            rows.push(footer_row("Hosmer-Lemeshow", c, &r, &mut notes));
        }
    }
    report.footer.extend(rows);
    report.notes.extend(notes);
}

fn load_column(fit: &ModelFit) -> &'static str {
    if fit.param(LOAD).is_some() {
        LOAD
    } else {
        LOAD_IV
    }
}

fn odds_csv(fit: &ModelFit) -> String {
    let mut out = String::from("term,estimate,std_error,p_value,odds_ratio,ci_low,ci_high,stars\n");
    for row in fit
        .coefficient_table()
        .iter()
        .filter(|r| r.role == ParamRole::Slope)
    {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            csv_field(&row.name),
            row.estimate,
            row.std_error,
            row.p_value,
            row.odds_ratio.unwrap_or(f64::NAN),
            row.ci_low.unwrap_or(f64::NAN),
            row.ci_high.unwrap_or(f64::NAN),
            crate::estimation::stars(row.p_value)
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn predictions_csv(curves: &[(String, ProbabilityCurve)]) -> String {
    let mut out = String::from("model,load,category,probability\n");
    for (label, c) in curves {
        let first = if c.kind == ModelKind::OrderedLogit {
            1
        } else {
            0
        };
        for (g, probs) in c.grid.iter().zip(&c.probs) {
            for (j, p) in probs.iter().enumerate() {
                let _ = writeln!(out, "{},{:.6},{},{:.6}", csv_field(label), g, j + first, p);
            }
        }
    }
    out
}

/// Curves over the observed Load support for every fitted column.
pub fn probability_curves(
    report: &BatteryReport,
    prep: &Prepared,
    points: usize,
) -> Result<Vec<(String, ProbabilityCurve)>> {
    let grid = observed_grid(&prep.design, LOAD, points)?;
    let mut curves = Vec::new();
    for c in &report.columns {
        if let (Some(f), Some(d)) = (&c.fit, &c.design) {
            curves.push((c.label.clone(), predict_curve(f, d, load_column(f), &grid)?));
        }
    }
    Ok(curves)
}

pub fn cmd_analyze(config: &RunConfig) -> Outcome {
    if let Err(e) = config.check() {
        return Outcome::fail(EXIT_IO, e.to_string());
    }
    let inputs = match read_inputs(config) {
        Ok(i) => i,
        Err(o) => return o,
    };
    if !inputs.report.is_clean() {
        let mut o = cmd_validate(config);
        o.stderr = format!(
            "validation failed with {} error(s); see the validation report",
            inputs.report.errors.len()
        );
        return o;
    }
    analyze(config, &inputs).unwrap_or_else(io_outcome)
}

fn analyze(config: &RunConfig, inputs: &Inputs) -> Result<Outcome> {
    let files = analysis_files(config.format);
    let mut bundle = Bundle::create(&config.out_dir, "analyze", files.clone())?;
    bundle.record_input(&config.employees)?;
    bundle.record_input(&config.citations)?;
    let (employees, citations) = (&inputs.employees, &inputs.citations);

    let built = build_network(employees, citations);
    let metrics = load_centrality(&built.network);
    let descriptives = describe(
        employees,
        citations,
        &built.network,
        &metrics,
        built.warnings.clone(),
    );
    bundle.write(
        &files[0],
        render_descriptives(&descriptives, config.format)?,
    )?;
    bundle.write(GRAPH, graphml(&built.network, &metrics))?;
    let corr = correlation_matrix(&correlation_variables(
        employees,
        citations,
        &metrics,
        config.model.demographics_from,
    ));
    bundle.write(CORRELATIONS, corr.to_csv())?;

    let mut stdout = String::new();
    match prepare(employees, citations, &config.similarity, &config.model) {
        Err(e) => bundle.error("design", e),
        Ok(prep) => {
            let z = prep.instrument_column().to_vec();
            let mut report = estimator_battery_with(&prep.design, &z, &config.members());
            attach_diagnostics(&mut report, config);
            for c in &report.columns {
                if let Some(e) = &c.error {
                    bundle.error(&c.label, e);
                }
            }
            let diag = report
                .diagnostic_column()
                .and_then(|c| report.columns[c].fit.as_ref());
            if let (Some(_), true) = (diag, config.report.bootstrap_draws > 0) {
                match bootstrap_se(
                    &prep.design,
                    &z,
                    Estimator::Tsri,
                    ModelKind::OrderedLogit,
                    config.report.bootstrap_draws,
                    config.seed,
                ) {
                    Ok((se, used)) => {
                        let fit = diag.unwrap();
                        if let Some(pos) = fit.params.iter().position(|p| p.name == LOAD) {
                            report.notes.push(format!("Bootstrap s.e. of Load in the 2SRI ordered model: {:.5} ({used} draws)", se[pos]));
                        }
                    }
                    Err(e) => report.notes.push(format!("bootstrap failed: {e}")),
                }
            }
            let models = match config.format {
                Format::Text => report.to_text(),
                Format::Machine => json(&report.document())?,
            };
            bundle.write(&files[2], &models)?;
            stdout.push_str(&models);

            if let Some(fit) = report
                .diagnostic_column()
                .and_then(|c| report.columns[c].fit.as_ref())
            {
                bundle.write(ODDS, odds_csv(fit))?;
                let sig: Vec<_> = fit
                    .odds_ratios()
                    .into_iter()
                    .filter(|o| {
                        fit.param(&o.name)
                            .is_some_and(|p| p.p_value() < config.report.forest_alpha)
                    })
                    .collect();
                bundle.write(
                    ODDS_SVG,
                    forest_plot(
                        &sig,
                        "Odds ratios of significant effects (IV ordered logit, 2SRI)",
                    ),
                )?;
            }
            match probability_curves(&report, &prep, config.report.grid_points) {
                Ok(curves) => {
                    bundle.write(PREDICTIONS, predictions_csv(&curves))?;
                    let pick = |e: Estimator, k: ModelKind| {
                        report
                            .columns
                            .iter()
                            .position(|c| c.estimator == e && c.kind == k)
                            .and_then(|i| {
                                curves.iter().find(|(l, _)| *l == report.columns[i].label)
                            })
                    };
                    let ordered = pick(Estimator::Tsri, ModelKind::OrderedLogit).map(|(_, c)| c);
                    let binary: Vec<(&str, &ProbabilityCurve)> = [
                        pick(Estimator::Tsri, ModelKind::BinaryLogit),
                        pick(Estimator::Tsps, ModelKind::LinearProbability),
                    ]
                    .into_iter()
                    .flatten()
                    .map(|(l, c)| (l.as_str(), c))
                    .collect();
                    if ordered.is_some() || !binary.is_empty() {
                        bundle.write(PREDICTIONS_SVG, probability_plot(ordered, &binary, LOAD))?;
                    }
                }
                Err(e) => bundle.error("predictions", e),
            }
        }
    }

    let code = if bundle.has_errors() {
        EXIT_ESTIMATION
    } else {
        EXIT_OK
    };
    let manifest = bundle.finish(code, manifest_config(config))?;
    let code = if manifest.complete {
        EXIT_OK
    } else {
        EXIT_ESTIMATION
    };
    let stderr = manifest.errors.join("\n");
    let stdout = match config.format {
        Format::Text => stdout,
        Format::Machine => json(&manifest)?,
    };
    Ok(Outcome {
        code,
        stdout,
        stderr,
    })
}

fn write_truth(bundle: &mut Bundle, truth: &SimTruth) -> Result<()> {
    let mut buf = Vec::new();
    write_employees(&mut buf, &truth.employees)?;
    bundle.write("employees.csv", buf)?;
    let mut buf = Vec::new();
    write_citations(&mut buf, &truth.citations)?;
    bundle.write("citations.csv", buf)?;
    let mut talent = String::from("id,talent\n");
    for (e, t) in truth.employees.iter().zip(&truth.talent) {
        let _ = writeln!(talent, "{},{:.9}", csv_field(e.id.as_str()), t);
    }
    bundle.write("talent.csv", talent)?;
    let scenario = toml::to_string(&truth.scenario).map_err(|e| Error::Serialize(e.to_string()))?;
    bundle.write("scenario.toml", scenario)
}

pub fn cmd_simulate(config: &RunConfig) -> Outcome {
    let sim = &config.simulation;
    let truth = if sim.survey {
        survey_fixture(config.seed)
    } else {
        let s = sim.scenario.with_seed(config.seed);
        s.check().and_then(|_| simulate_org(&s))
    };
    let truth = match truth {
        Ok(t) => t,
        Err(e) => return Outcome::fail(EXIT_IO, e.to_string()),
    };
    let run = || -> Result<Outcome> {
        let mut declared: Vec<String> = [
            "employees.csv",
            "citations.csv",
            "talent.csv",
            "scenario.toml",
        ]
        .map(String::from)
        .to_vec();
        let study_name = format!("study.{}", config.format.extension());
        if sim.replications > 0 {
            declared.push(study_name.clone());
        }
        let mut bundle = Bundle::create(&config.out_dir, "simulate", declared)?;
        write_truth(&mut bundle, &truth)?;
        let mut stdout = format!(
            "{} employees, {} citations\n",
            truth.employees.len(),
            truth.citations.len()
        );
        let mut code = EXIT_OK;
        if sim.replications > 0 {
            match endogeneity_study(&truth.scenario, sim.replications) {
                Ok(r) => {
                    let text = match config.format {
                        Format::Text => r.to_text(),
                        Format::Machine => json(&r)?,
                    };
                    bundle.write(&study_name, &text)?;
                    stdout.push_str(&text);
                }
                Err(e @ Error::Config(_)) => {
                    bundle.error("study", &e);
                    code = EXIT_IO;
                }
                Err(e) => {
                    bundle.error("study", &e);
                    code = EXIT_ESTIMATION;
                }
            }
        }
        let m = bundle.finish(code, manifest_config(config))?;
        Ok(Outcome {
            code,
            stdout,
            stderr: m.errors.join("\n"),
        })
    };
    run().unwrap_or_else(io_outcome)
}

/// Writes a generated organization as the two input tables of the
/// pipeline, returning their paths.
pub fn write_inputs(dir: &Path, truth: &SimTruth) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let e = dir.join("employees.csv");
    let c = dir.join("citations.csv");
    write_employees(
        std::fs::File::create(&e).map_err(|x| Error::io(&e, x))?,
        &truth.employees,
    )?;
    write_citations(
        std::fs::File::create(&c).map_err(|x| Error::io(&c, x))?,
        &truth.citations,
    )?;
    Ok((e, c))
}
