//! Survey tables: employee attributes and citation responses.
//!
//! Both tables are UTF-8, comma-delimited, with a fixed header:
//!
//! ```text
//! id,gender,age,seniority,location,management,level
//! source,target,frequency,efficiency,knowledge,channel
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

pub const EMPLOYEE_HEADER: [&str; 7] = [
    "id",
    "gender",
    "age",
    "seniority",
    "location",
    "management",
    "level",
];
pub const CITATION_HEADER: [&str; 6] = [
    "source",
    "target",
    "frequency",
    "efficiency",
    "knowledge",
    "channel",
];

/// Five colleagues for each of the four professional areas.
pub const MAX_CITATIONS_PER_SOURCE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmployeeId(pub String);

impl EmployeeId {
    pub fn new(id: impl Into<String>) -> Self {
        EmployeeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EmployeeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EmployeeId {
    fn from(s: &str) -> Self {
        EmployeeId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
}

impl Gender {
    pub fn code(self) -> &'static str {
        match self {
            Gender::F => "F",
            Gender::M => "M",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "F" | "f" => Some(Gender::F),
            "M" | "m" => Some(Gender::M),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Management {
    Yes,
    No,
    Unknown,
}

impl Management {
    pub fn code(self) -> &'static str {
        match self {
            Management::Yes => "yes",
            Management::No => "no",
            Management::Unknown => "NA",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "yes" => Some(Management::Yes),
            "no" => Some(Management::No),
            "na" | "unknown" => Some(Management::Unknown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    Email,
    Phone,
    Person,
    Other,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::Email,
        Channel::Phone,
        Channel::Person,
        Channel::Other,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Channel::Email => "Email",
            Channel::Phone => "Phone",
            Channel::Person => "Person",
            Channel::Other => "Other",
        }
    }

    /// Ordinal code used when Channel enters the correlation table.
    pub fn rank(self) -> u8 {
        match self {
            Channel::Email => 1,
            Channel::Phone => 2,
            Channel::Person => 3,
            Channel::Other => 4,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "Email" | "Mail" | "email" | "mail" => Some(Channel::Email),
            "Phone" | "phone" => Some(Channel::Phone),
            "Person" | "person" => Some(Channel::Person),
            "Other" | "other" => Some(Channel::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Employee {
    pub id: EmployeeId,
    pub gender: Gender,
    pub age: u32,
    pub seniority: u32,
    pub location: String,
    pub management: Management,
    pub level: u32,
}

impl Employee {
    fn check(&self) -> std::result::Result<(), String> {
        if !(16..=100).contains(&self.age) {
            return Err(format!("age {} outside [16, 100]", self.age));
        }
        if self.seniority > self.age {
            return Err(format!(
                "seniority {} exceeds age {}",
                self.seniority, self.age
            ));
        }
        if self.location.is_empty() {
            return Err("empty location".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Citation {
    pub source: EmployeeId,
    pub target: EmployeeId,
    pub frequency: u8,
    pub efficiency: u8,
    pub knowledge: u8,
    pub channel: Channel,
}

impl Citation {
    fn check(&self) -> std::result::Result<(), String> {
        if self.source == self.target {
            return Err(format!("self-citation by {}", self.source));
        }
        if !(1..=4).contains(&self.frequency) {
            return Err(format!("frequency {} outside [1, 4]", self.frequency));
        }
        if !(1..=6).contains(&self.efficiency) {
            return Err(format!("efficiency {} outside [1, 6]", self.efficiency));
        }
        if !(1..=6).contains(&self.knowledge) {
            return Err(format!("knowledge {} outside [1, 6]", self.knowledge));
        }
        Ok(())
    }

    /// Knowledge codes 1-3 are simple transfers, 4-6 complex ones.
    pub fn knowledge_complex(&self) -> bool {
        self.knowledge >= 4
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    /// 1-based data row (header excluded); 0 when the finding is table-wide.
    pub row: usize,
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rows_rejected: usize,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    /// Folds the row-level findings of a lenient parse into this report.
    pub fn absorb(&mut self, other: ValidationReport) {
        self.rows_read += other.rows_read;
        self.rows_accepted += other.rows_accepted;
        self.rows_rejected += other.rows_rejected;
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "rows read: {}  accepted: {}  rejected: {}\n",
            self.rows_read, self.rows_accepted, self.rows_rejected
        ));
        for e in &self.errors {
            out.push_str(&format!(
                "error   row {:>5}  {:<10} {}\n",
                e.row, e.field, e.message
            ));
        }
        for w in &self.warnings {
            out.push_str(&format!(
                "warning row {:>5}  {:<10} {}\n",
                w.row, w.field, w.message
            ));
        }
        out
    }
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str], path: &Path) -> Result<()> {
    let found = rdr.headers().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        row: 0,
        message: e.to_string(),
    })?;
    let ok = found.len() == expected.len() && found.iter().zip(expected).all(|(a, b)| a == *b);
    if !ok {
        return Err(Error::Header {
            path: path.to_path_buf(),
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

type RowOutcome<T> = std::result::Result<T, (String, String)>;

fn int_field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> RowOutcome<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse::<T>()
        .map_err(|_| (name.to_string(), format!("`{raw}` is not a valid integer")))
}

fn employee_row(rec: &csv::StringRecord) -> RowOutcome<Employee> {
    if rec.len() != EMPLOYEE_HEADER.len() {
        return Err((
            "row".into(),
            format!(
                "expected {} fields, found {}",
                EMPLOYEE_HEADER.len(),
                rec.len()
            ),
        ));
    }
    let id = rec.get(0).unwrap_or("");
    if id.is_empty() {
        return Err(("id".into(), "empty id".into()));
    }
    let gender = Gender::parse(&rec[1])
        .ok_or_else(|| ("gender".to_string(), format!("unknown code `{}`", &rec[1])))?;
    let management = Management::parse(&rec[5]).ok_or_else(|| {
        (
            "management".to_string(),
            format!("unknown code `{}`", &rec[5]),
        )
    })?;
    let e = Employee {
        id: EmployeeId::new(id),
        gender,
        age: int_field(rec, 2, "age")?,
        seniority: int_field(rec, 3, "seniority")?,
        location: rec[4].to_string(),
        management,
        level: int_field(rec, 6, "level")?,
    };
    e.check().map_err(|m| ("range".to_string(), m))?;
    Ok(e)
}

fn citation_row(rec: &csv::StringRecord) -> RowOutcome<Citation> {
    if rec.len() != CITATION_HEADER.len() {
        return Err((
            "row".into(),
            format!(
                "expected {} fields, found {}",
                CITATION_HEADER.len(),
                rec.len()
            ),
        ));
    }
    let channel = Channel::parse(&rec[5])
        .ok_or_else(|| ("channel".to_string(), format!("unknown code `{}`", &rec[5])))?;
    if rec[0].is_empty() || rec[1].is_empty() {
        return Err(("id".into(), "empty source or target".into()));
    }
    let c = Citation {
        source: EmployeeId::new(&rec[0]),
        target: EmployeeId::new(&rec[1]),
        frequency: int_field(rec, 2, "frequency")?,
        efficiency: int_field(rec, 3, "efficiency")?,
        knowledge: int_field(rec, 4, "knowledge")?,
        channel,
    };
    c.check().map_err(|m| ("range".to_string(), m))?;
    Ok(c)
}

fn read_rows<R: Read, T>(
    input: R,
    path: &Path,
    header: &[&str],
    parse: impl Fn(&csv::StringRecord) -> RowOutcome<T>,
) -> Result<Vec<(usize, RowOutcome<T>)>> {
    let mut rdr = reader(input);
    check_header(&mut rdr, header, path)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let outcome = match rec {
            Ok(rec) => parse(&rec),
            Err(e) => Err(("row".into(), e.to_string())),
        };
        rows.push((row, outcome));
    }
    Ok(rows)
}

fn strict<T>(rows: Vec<(usize, RowOutcome<T>)>, path: &Path) -> Result<Vec<T>> {
    rows.into_iter()
        .map(|(row, r)| {
            r.map_err(|(field, message)| Error::Parse {
                path: path.to_path_buf(),
                row,
                message: format!("{field}: {message}"),
            })
        })
        .collect()
}

fn lenient<T>(rows: Vec<(usize, RowOutcome<T>)>) -> (Vec<T>, ValidationReport) {
    let mut report = ValidationReport::default();
    let mut out = Vec::new();
    for (row, r) in rows {
        report.rows_read += 1;
        match r {
            Ok(v) => {
                report.rows_accepted += 1;
                out.push(v);
            }
            Err((field, message)) => {
                report.rows_rejected += 1;
                report.errors.push(Finding {
                    row,
                    field,
                    message,
                });
            }
        }
    }
    (out, report)
}

fn check_unique_ids(employees: &[Employee], path: &Path) -> Result<()> {
    let mut seen = HashSet::new();
    for (i, e) in employees.iter().enumerate() {
        if !seen.insert(&e.id) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: i + 1,
                message: format!("duplicate id {}", e.id),
            });
        }
    }
    Ok(())
}

pub fn read_employees<R: Read>(input: R, path: &Path) -> Result<Vec<Employee>> {
    let rows = read_rows(input, path, &EMPLOYEE_HEADER, employee_row)?;
    let employees = strict(rows, path)?;
    check_unique_ids(&employees, path)?;
    Ok(employees)
}

/// Parses the employee table; any malformed or out-of-range row is a hard
/// error naming the row.
pub fn parse_employees(path: &Path) -> Result<Vec<Employee>> {
    read_employees(open(path)?, path)
}

/// Like [`parse_employees`] but rejected rows land in a report.
pub fn parse_employees_lenient(path: &Path) -> Result<(Vec<Employee>, ValidationReport)> {
    let rows = read_rows(open(path)?, path, &EMPLOYEE_HEADER, employee_row)?;
    let (mut employees, mut report) = lenient(rows);
    let mut seen = HashSet::new();
    let mut keep = Vec::with_capacity(employees.len());
    for (i, e) in employees.drain(..).enumerate() {
        if seen.insert(e.id.clone()) {
            keep.push(e);
        } else {
            report.rows_accepted -= 1;
            report.rows_rejected += 1;
            report.errors.push(Finding {
                row: i + 1,
                field: "id".into(),
                message: format!("duplicate id {}", e.id),
            });
        }
    }
    Ok((keep, report))
}

pub fn read_citations<R: Read>(input: R, path: &Path) -> Result<Vec<Citation>> {
    let rows = read_rows(input, path, &CITATION_HEADER, citation_row)?;
    strict(rows, path)
}

/// Parses the citation table in input order. Targets are not checked
/// against the employee table here; see [`validate`].
pub fn parse_citations(path: &Path) -> Result<Vec<Citation>> {
    read_citations(open(path)?, path)
}

pub fn parse_citations_lenient(path: &Path) -> Result<(Vec<Citation>, ValidationReport)> {
    let rows = read_rows(open(path)?, path, &CITATION_HEADER, citation_row)?;
    Ok(lenient(rows))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serialize(e.to_string())
}

pub fn write_employees<W: Write>(out: W, employees: &[Employee]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EMPLOYEE_HEADER).map_err(csv_err)?;
    for e in employees {
        w.write_record([
            e.id.as_str(),
            e.gender.code(),
            &e.age.to_string(),
            &e.seniority.to_string(),
            &e.location,
            e.management.code(),
            &e.level.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))
}

pub fn write_citations<W: Write>(out: W, citations: &[Citation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CITATION_HEADER).map_err(csv_err)?;
    for c in citations {
        w.write_record([
            c.source.as_str(),
            c.target.as_str(),
            &c.frequency.to_string(),
            &c.efficiency.to_string(),
            &c.knowledge.to_string(),
            c.channel.code(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))
}

/// Cross-references citations against the employee table.
pub fn validate(employees: &[Employee], citations: &[Citation]) -> ValidationReport {
    let ids: HashSet<&EmployeeId> = employees.iter().map(|e| &e.id).collect();
    let mut report = ValidationReport {
        rows_read: citations.len(),
        ..ValidationReport::default()
    };
    let mut per_source: BTreeMap<&EmployeeId, (usize, usize)> = BTreeMap::new();
    for (i, c) in citations.iter().enumerate() {
        let row = i + 1;
        let mut bad = false;
        for (field, id) in [("source", &c.source), ("target", &c.target)] {
            if !ids.contains(id) {
                bad = true;
                report.errors.push(Finding {
                    row,
                    field: field.into(),
                    message: format!("unknown employee {id}"),
                });
            }
        }
        if bad {
            report.rows_rejected += 1;
        } else {
            report.rows_accepted += 1;
        }
        let entry = per_source.entry(&c.source).or_insert((0, row));
        entry.0 += 1;
        entry.1 = row;
    }
    for (source, (count, last_row)) in per_source {
        if count > MAX_CITATIONS_PER_SOURCE {
            report.warnings.push(Finding {
                row: last_row,
                field: "source".into(),
                message: format!(
                    "{source} cites {count} colleagues (survey allows {MAX_CITATIONS_PER_SOURCE})"
                ),
            });
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub level: String,
    pub n: usize,
    pub percent: f64,
    pub cumulative_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalSummary {
    pub variable: String,
    pub levels: Vec<LevelCount>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSummary {
    pub variable: String,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveReport {
    pub categorical: Vec<CategoricalSummary>,
    pub continuous: Vec<ContinuousSummary>,
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

pub fn categorical_summary<K: Ord + ToString>(
    variable: &str,
    values: impl IntoIterator<Item = K>,
) -> CategoricalSummary {
    let mut counts: BTreeMap<K, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    let mut running = 0usize;
    let levels = counts
        .into_iter()
        .map(|(k, n)| {
            running += n;
            LevelCount {
                level: k.to_string(),
                n,
                percent: round1(100.0 * n as f64 / total as f64),
                cumulative_percent: round1(100.0 * running as f64 / total as f64),
            }
        })
        .collect();
    CategoricalSummary {
        variable: variable.to_string(),
        levels,
        total,
    }
}

/// Type-7 quartiles, mean and sample standard deviation. `None` for an
/// empty column.
pub fn continuous_summary(variable: &str, values: &[f64]) -> Option<ContinuousSummary> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Some(ContinuousSummary {
        variable: variable.to_string(),
        n: values.len(),
        min: sorted[0],
        q1: stats::quantile_type7(&sorted, 0.25),
        median: stats::quantile_type7(&sorted, 0.5),
        mean: stats::mean(values),
        q3: stats::quantile_type7(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        sd: stats::sample_sd(values),
    })
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl fmt::Display for Management {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Frequency tables and five-number summaries. `load` holds one value per employee, in any
/// order (only its distribution is summarized).
pub fn descriptive_stats(
    employees: &[Employee],
    citations: &[Citation],
    load: &[f64],
) -> DescriptiveReport {
    let categorical = vec![
        categorical_summary("Gender", employees.iter().map(|e| e.gender)),
        categorical_summary("Location", employees.iter().map(|e| e.location.clone())),
        categorical_summary("Management", employees.iter().map(|e| e.management)),
        categorical_summary("Level", employees.iter().map(|e| e.level)),
        categorical_summary("Efficiency", citations.iter().map(|c| c.efficiency)),
        categorical_summary("Knowledge", citations.iter().map(|c| c.knowledge)),
        categorical_summary("Channel", citations.iter().map(|c| c.channel)),
    ];
    let ages: Vec<f64> = employees.iter().map(|e| e.age as f64).collect();
    let seniority: Vec<f64> = employees.iter().map(|e| e.seniority as f64).collect();
    let continuous = [
        ("Load", load),
        ("Age", &ages[..]),
        ("Seniority", &seniority[..]),
    ]
    .into_iter()
    .filter_map(|(name, v)| continuous_summary(name, v))
    .collect();
    DescriptiveReport {
        categorical,
        continuous,
    }
}

impl DescriptiveReport {
    pub fn categorical(&self, variable: &str) -> Option<&CategoricalSummary> {
        self.categorical.iter().find(|c| c.variable == variable)
    }

    pub fn continuous(&self, variable: &str) -> Option<&ContinuousSummary> {
        self.continuous.iter().find(|c| c.variable == variable)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("Descriptive statistics: categorical variables\n");
        out.push_str(&format!(
            "{:<12} {:<14} {:>6} {:>7} {:>7}\n",
            "Variable", "Level", "n", "%", "cum %"
        ));
        for c in &self.categorical {
            for (i, l) in c.levels.iter().enumerate() {
                let name = if i == 0 { c.variable.as_str() } else { "" };
                out.push_str(&format!(
                    "{:<12} {:<14} {:>6} {:>7.1} {:>7.1}\n",
                    name, l.level, l.n, l.percent, l.cumulative_percent
                ));
            }
            out.push_str(&format!(
                "{:<12} {:<14} {:>6} {:>7.1}\n",
                "", "all", c.total, 100.0
            ));
        }
        out.push_str("\nDescriptive statistics: continuous variables\n");
        out.push_str(&format!(
            "{:<12} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            "Variable", "n", "Min", "q1", "median", "mean", "q3", "Max", "sd"
        ));
        for c in &self.continuous {
            out.push_str(&format!(
                "{:<12} {:>6} {:>8.1} {:>8.1} {:>8.1} {:>8.1} {:>8.1} {:>8.1} {:>8.1}\n",
                c.variable, c.n, c.min, c.q1, c.median, c.mean, c.q3, c.max, c.sd
            ));
        }
        out
    }
}

/// Ids appearing as citation endpoints but absent from the employee table.
pub fn unknown_endpoints<'a>(
    employees: &[Employee],
    citations: &'a [Citation],
) -> BTreeSet<&'a EmployeeId> {
    let ids: HashSet<&EmployeeId> = employees.iter().map(|e| &e.id).collect();
    citations
        .iter()
        .flat_map(|c| [&c.source, &c.target])
        .filter(|id| !ids.contains(id))
        .collect()
}
