use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::DesignSpec;
use crate::homophily::SimilarityConfig;
use crate::iv::BATTERY;
use crate::sim::SimScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Text,
    Machine,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Machine => "json",
        }
    }
}

/// Members of the five-model comparison, in display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Member {
    Naive,
    Tsps,
    Tsri,
    TsriBinary,
    Lpm,
}

impl Member {
    pub const ALL: [Member; 5] = [
        Member::Naive,
        Member::Tsps,
        Member::Tsri,
        Member::TsriBinary,
        Member::Lpm,
    ];

    /// Index into [`BATTERY`].
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticSelection {
    pub brant: bool,
    pub lipsitz: bool,
    pub pulkstenis_robinson: bool,
    pub hosmer_lemeshow: bool,
    pub lipsitz_groups: usize,
    pub hosmer_lemeshow_groups: usize,
}

impl Default for DiagnosticSelection {
    fn default() -> Self {
        DiagnosticSelection {
            brant: true,
            lipsitz: true,
            pulkstenis_robinson: true,
            hosmer_lemeshow: true,
            lipsitz_groups: 10,
            hosmer_lemeshow_groups: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportOptions {
    /// Points of the predicted-probability grid over the observed Load range.
    pub grid_points: usize,
    /// Bootstrap draws for the 2SRI ordered Load coefficient; 0 disables.
    pub bootstrap_draws: usize,
    /// Effects with a p-value below this enter the forest plot.
    pub forest_alpha: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            grid_points: 41,
            bootstrap_draws: 0,
            forest_alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenario: SimScenario,
    /// Monte Carlo replications of the endogeneity study; 0 writes the
    /// synthetic tables only.
    pub replications: usize,
    /// Emit the pinned survey-scale fixture instead of `scenario`.
    pub survey: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            scenario: SimScenario::default(),
            replications: 200,
            survey: false,
        }
    }
}

/// Everything a run depends on besides the input files. The master seed
/// overrides the scenario seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub employees: PathBuf,
    pub citations: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub format: Format,
    pub similarity: SimilarityConfig,
    pub model: DesignSpec,
    pub estimators: Vec<Member>,
    pub diagnostics: DiagnosticSelection,
    pub report: ReportOptions,
    pub simulation: SimulationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            employees: PathBuf::from("employees.csv"),
            citations: PathBuf::from("citations.csv"),
            out_dir: PathBuf::from("out"),
            seed: crate::sim::SURVEY_SEED,
            format: Format::Text,
            similarity: SimilarityConfig::default(),
            model: DesignSpec::default(),
            estimators: Member::ALL.to_vec(),
            diagnostics: DiagnosticSelection::default(),
            report: ReportOptions::default(),
            simulation: SimulationConfig::default(),
        }
    }
}

/// Command-line values that win over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub employees: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub replications: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.check()?;
        Ok(c)
    }

    /// Relative input paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = RunConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut c.employees, &mut c.citations, &mut c.out_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = d.clone();
        }
        if let Some(f) = o.format {
            self.format = f;
        }
        if let Some(p) = &o.employees {
            self.employees = p.clone();
        }
        if let Some(p) = &o.citations {
            self.citations = p.clone();
        }
        if let Some(r) = o.replications {
            self.simulation.replications = r;
        }
    }

    pub fn check(&self) -> Result<()> {
        self.similarity.check()?;
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimator selected".into()));
        }
        let mut sorted = self.estimators.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.estimators.len() {
            return Err(Error::Config("an estimator is listed twice".into()));
        }
        if self.report.grid_points < 2 {
            return Err(Error::Config(
                "the probability grid needs at least two points".into(),
            ));
        }
        if !(self.report.forest_alpha > 0.0 && self.report.forest_alpha <= 1.0) {
            return Err(Error::Config("forest_alpha must lie in (0, 1]".into()));
        }
        debug_assert_eq!(BATTERY.len(), Member::ALL.len());
        Ok(())
    }

    pub fn members(&self) -> Vec<usize> {
        self.estimators.iter().map(|m| m.index()).collect()
    }
}
