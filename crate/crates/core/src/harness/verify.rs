//! Re-checks a written report against its own contents and the trajectory file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::certificates::SyntheticFamily;
use crate::error::{Error, Result};
use crate::metrics::{dist_to_ball, NormSpec};
use crate::semigroup::Component;
use crate::spectral::{ModeGrid, PhaseState, SpectralField};

use super::config::RunConfig;
use super::e1::synthetic_decay;
use super::report::{Check, DecayRow, DecaySource, Provenance, TRAJECTORY_FILE};

/// Relative agreement required between recomputed and stored distances.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-9;

#[derive(Deserialize)]
struct ReportView {
    config: RunConfig,
    provenance: Provenance,
    decay_source: DecaySource,
    decay_table: Vec<DecayRow>,
    checks: Vec<Check>,
    all_passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOutcome {
    pub checks: usize,
    /// Checks whose stored verdict is a failure.
    pub failed: Vec<String>,
    /// Disagreements between the report and what it claims.
    pub inconsistencies: Vec<String>,
    /// Decay-table rows recomputed from the trajectory file.
    pub rows_recomputed: usize,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.failed.is_empty() && self.inconsistencies.is_empty()
    }
}

#[derive(Deserialize)]
struct RawState {
    pos: Vec<(Vec<usize>, f64)>,
    vel: Vec<(Vec<usize>, f64)>,
}

fn parse_state(grid: ModeGrid, v: &serde_json::Value) -> Result<PhaseState> {
    let raw: RawState = serde_json::from_value(v.clone())?;
    PhaseState::new(SpectralField::from_pairs(grid, &raw.pos)?, SpectralField::from_pairs(grid, &raw.vel)?)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RECOMPUTE_TOLERANCE * a.abs().max(b.abs()) + 1e-300
}

/// `member → [(t, state value)]` for one run and component, in file order.
fn states_of<'a>(lines: &'a [serde_json::Value], run: &str, c: Component) -> BTreeMap<u64, Vec<(f64, &'a serde_json::Value)>> {
    let mut out: BTreeMap<u64, Vec<(f64, &serde_json::Value)>> = BTreeMap::new();
    for l in lines {
        if l["run"] != run || l["component"] != c.as_str() {
            continue;
        }
        if let (Some(m), Some(t), Some(s)) = (l["member"].as_u64(), l["t"].as_f64(), l.get("state")) {
            out.entry(m).or_default().push((t, s));
        }
    }
    out
}

fn ensemble_recompute<F>(lines: &[serde_json::Value], run: &str, c: Component, grid: ModeGrid, f: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&PhaseState) -> Result<f64>,
{
    let members = states_of(lines, run, c);
    let first = members.values().next().ok_or_else(|| Error::Config(format!("no stored states for run {run}")))?;
    let mut out: Vec<(f64, f64)> = first.iter().map(|(t, _)| (*t, 0.0)).collect();
    for series in members.values() {
        if series.len() != out.len() {
            return Err(Error::Config(format!("members of run {run} have different lengths")));
        }
        for (o, (_, s)) in out.iter_mut().zip(series) {
            o.1 = o.1.max(f(&parse_state(grid, s)?)?);
        }
    }
    Ok(out)
}

fn recompute(view: &ReportView, lines: &[serde_json::Value]) -> Result<Vec<(f64, f64)>> {
    let grid = view.config.grid;
    match &view.decay_source {
        DecaySource::Norm { run, component, r } => ensemble_recompute(lines, run, *component, grid, |s| Ok(s.norm(*r))),
        DecaySource::DistToBall { run, component, rho, r_base, r_ball } => {
            let spec = NormSpec::new(*r_base, *r_ball)?;
            ensemble_recompute(lines, run, *component, grid, |s| dist_to_ball(s, *rho, spec))
        }
        DecaySource::Synthetic { run, rho } => {
            let family_line = lines
                .iter()
                .find(|l| l["run"] == run.as_str() && l.get("family").is_some())
                .ok_or_else(|| Error::Config(format!("no family stored for run {run}")))?;
            let family: SyntheticFamily = serde_json::from_value(family_line["family"].clone())?;
            let xs: Vec<Vec<f64>> = lines
                .iter()
                .filter(|l| l["run"] == run.as_str() && l.get("state").is_some())
                .map(|l| serde_json::from_value(l["state"].clone()))
                .collect::<std::result::Result<_, _>>()?;
            let times: Vec<f64> = view.decay_table.iter().map(|r| r.t).collect();
            let d = synthetic_decay(&family, &xs, *rho, &times)?;
            Ok(times.into_iter().zip(d).collect())
        }
    }
}

/// Verifies `report.json`; a sibling trajectory file, when present, is used to
/// recompute the decay table.
pub fn verify_report(path: &Path) -> Result<VerifyOutcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read report {}: {e}", path.display())))?;
    let view: ReportView =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("malformed report {}: {e}", path.display())))?;
    view.config.validate()?;

    let mut out = VerifyOutcome { checks: view.checks.len(), ..Default::default() };
    if view.config.hash() != view.provenance.config_hash {
        out.inconsistencies.push("config hash does not match the embedded config".into());
    }
    for c in &view.checks {
        if c.relation.holds(c.measured, c.threshold) != c.passed {
            out.inconsistencies.push(format!("check {} has a verdict that contradicts its values", c.name));
        }
        if !c.passed {
            out.failed.push(c.name.clone());
        }
    }
    if view.all_passed != view.checks.iter().all(|c| c.passed) {
        out.inconsistencies.push("all_passed disagrees with the individual checks".into());
    }

    let traj = path.with_file_name(TRAJECTORY_FILE);
    if traj.exists() {
        let body = std::fs::read_to_string(&traj)?;
        let lines: Vec<serde_json::Value> = body
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("malformed trajectory file: {e}")))?;
        let rows = recompute(&view, &lines)?;
        if rows.len() != view.decay_table.len() {
            out.inconsistencies.push(format!(
                "decay table has {} rows, trajectories give {}",
                view.decay_table.len(),
                rows.len()
            ));
        }
        for (stored, (t, d)) in view.decay_table.iter().zip(&rows) {
            if !close(stored.t, *t) || !close(stored.dist, *d) {
                out.inconsistencies.push(format!(
                    "decay row at t = {} stores dist {} but trajectories give {d}",
                    stored.t, stored.dist
                ));
            }
        }
        out.rows_recomputed = rows.len().min(view.decay_table.len());
    }
    Ok(out)
}
