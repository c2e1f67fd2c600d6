//! Report types and file output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::certificates::{AttractionCertificate, TecCertificate};
use crate::error::Result;
use crate::semigroup::{Component, Norms, TrajectoryRecord};
use crate::spectral::PhaseState;

use super::config::RunConfig;

pub const REPORT_FILE: &str = "report.json";
pub const TRAJECTORY_FILE: &str = "trajectories.jsonl";
pub const DECAY_FILE: &str = "decay.csv";

/// How a measured value must compare with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
}

impl Relation {
    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::Le => measured <= threshold,
            Relation::Lt => measured < threshold,
            Relation::Ge => measured >= threshold,
            Relation::Gt => measured > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, measured: f64, relation: Relation, threshold: f64) -> Self {
        Self { name: name.to_string(), measured, relation, threshold, passed: relation.holds(measured, threshold) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub dist: f64,
    pub bound: f64,
}

/// Recipe for recomputing the `dist` column from the trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecaySource {
    /// Ensemble maximum of `‖state‖_{𝓗^r}`.
    Norm { run: String, component: Component, r: f64 },
    /// Ensemble maximum of `dist_{𝓗^{r_base}}(state, B_{𝓗^{r_ball}}(rho))`.
    DistToBall { run: String, component: Component, rho: f64, r_base: f64, r_ball: f64 },
    /// Ensemble maximum of the distance to the strong ball of a stored synthetic family.
    Synthetic { run: String, rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Certificates {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tec: Option<TecCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attraction: Option<AttractionCertificate>,
    /// Further certificates by name.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, AttractionCertificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub config: RunConfig,
    pub provenance: Provenance,
    pub certificates: Certificates,
    pub fitted: BTreeMap<String, serde_json::Value>,
    pub decay_source: DecaySource,
    pub decay_table: Vec<DecayRow>,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

impl ExperimentReport {
    pub fn new(config: &RunConfig, decay_source: DecaySource) -> Self {
        Self {
            experiment: config.experiment.as_str().to_string(),
            seed: config.seed,
            config: config.clone(),
            provenance: Provenance {
                config_hash: config.hash(),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            certificates: Certificates::default(),
            fitted: BTreeMap::new(),
            decay_source,
            decay_table: Vec::new(),
            checks: Vec::new(),
            all_passed: true,
        }
    }

    pub fn fit<T: Serialize>(&mut self, name: &str, value: &T) {
        let v = serde_json::to_value(value).expect("fitted values serialize");
        self.fitted.insert(name.to_string(), v);
    }

    pub fn check(&mut self, name: &str, measured: f64, relation: Relation, threshold: f64) {
        let c = Check::new(name, measured, relation, threshold);
        log::info!(
            "{} {}: measured {:.6e} {:?} {:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.relation,
            c.threshold
        );
        self.all_passed &= c.passed;
        self.checks.push(c);
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn decay_csv(&self) -> String {
        let mut out = String::from("t,dist,bound\n");
        for r in &self.decay_table {
            out.push_str(&format!("{},{},{}\n", r.t, r.dist, r.bound));
        }
        out
    }
}

#[derive(Serialize)]
struct StateLine<'a> {
    run: &'a str,
    member: usize,
    t: f64,
    component: Component,
    norms: Norms,
    #[serde(rename = "Lambda0")]
    lambda0: f64,
    #[serde(rename = "Lambda1")]
    lambda1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'a PhaseState>,
}

/// Lines of the trajectory file, kept in memory until the run finishes.
#[derive(Debug, Default, Clone)]
pub struct TrajectoryLog {
    lines: Vec<String>,
}

impl TrajectoryLog {
    /// One line per recorded frame and component; full states only for `with_state`.
    pub fn record(&mut self, run: &str, member: usize, rec: &TrajectoryRecord, with_state: &[Component]) {
        for s in rec.samples() {
            let line = StateLine {
                run,
                member,
                t: s.t,
                component: s.component,
                norms: s.norms,
                lambda0: s.lambda0,
                lambda1: s.lambda1,
                state: with_state.contains(&s.component).then_some(s.state),
            };
            self.lines.push(serde_json::to_string(&line).expect("trajectory line serializes"));
        }
    }

    pub fn push<T: Serialize>(&mut self, value: &T) {
        self.lines.push(serde_json::to_string(value).expect("trajectory line serializes"));
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }
}

/// A finished experiment.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub trajectories: TrajectoryLog,
}

/// Write-to-temp-then-rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

impl RunOutput {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let mut report = serde_json::to_string_pretty(&self.report)?;
        report.push('\n');
        write_atomic(&dir.join(TRAJECTORY_FILE), self.trajectories.to_jsonl().as_bytes())?;
        write_atomic(&dir.join(DECAY_FILE), self.report.decay_csv().as_bytes())?;
        let path = dir.join(REPORT_FILE);
        write_atomic(&path, report.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Relation::Le.holds(1.0, 1.0));
        assert!(!Relation::Lt.holds(1.0, 1.0));
        assert!(Relation::Ge.holds(2.0, 1.0));
        assert!(!Relation::Gt.holds(f64::NAN, 0.0));
        assert!(!Relation::Le.holds(f64::NAN, 0.0));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("attractor-lab-report-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert!(!dir.join(".x.txt.tmp").exists());
        fs::remove_dir_all(&dir).unwrap();
    }
}
