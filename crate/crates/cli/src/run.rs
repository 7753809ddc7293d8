//! The time loop and its outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use mhd_invariants::calculus::{Field, ScalarField};
use mhd_invariants::lagrange::Coupled;
use mhd_invariants::noether::{ConservationReport, Norms, ReportSummary};
use mhd_invariants::solver::{global_diagnostics, stable_dt, Diagnostics};
use mhd_invariants::MhdState;

use crate::config::Config;
use crate::io;
use crate::reports::{compute_reports, Levels};
use crate::scenario::{Preset, Scenario};

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: &'static str,
    /// seconds; kept out of the JSON outputs so that they stay reproducible
    #[serde(skip)]
    pub wall_time: f64,
}

/// A report with the step it was taken at.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub step: usize,
    pub report: ConservationReport,
}

#[derive(Debug, Clone, Serialize)]
struct ReportDoc<'a> {
    step: usize,
    #[serde(flatten)]
    summary: &'a ReportSummary,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub scenario: Scenario,
    pub steps: usize,
    pub dt: f64,
    pub reports: Vec<StepReport>,
    /// `(t, name)` of identities that could not be evaluated at a report time
    pub skipped: Vec<(f64, String)>,
    pub diagnostics: Vec<Diagnostics>,
    /// comparisons with closed-form solutions, where the preset has one
    pub exact_errors: BTreeMap<String, Norms>,
    /// largest `|div B|_inf / scale` over all steps
    pub max_div_b: f64,
    pub provenance: Provenance,
    pub initial: Coupled,
    pub last: Coupled,
}

impl RunRecord {
    /// Largest `|E(t) - E(0)| / |E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.diagnostics.first().map_or(0.0, |d| d.total_energy);
        self.diagnostics
            .iter()
            .map(|d| (d.total_energy - e0).abs() / e0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Reports taken at the last step.
    pub fn final_reports(&self) -> impl Iterator<Item = &ConservationReport> {
        self.reports.iter().filter(|r| r.step == self.steps).map(|r| &r.report)
    }

    pub fn find(&self, name: &str, variant: Option<&str>) -> Option<&ConservationReport> {
        self.final_reports()
            .find(|r| r.name == name && (variant.is_none() || r.variant.as_deref() == variant))
    }
}

fn report_steps(s: &Scenario, steps: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    if s.report_initial {
        out.push(0);
    }
    if s.report_every > 0 {
        out.extend((1..=steps).filter(|m| m % s.report_every == 0));
    }
    if out.last() != Some(&steps) {
        out.push(steps);
    }
    out.dedup();
    out
}

/// Runs the time loop with the solver and map in lockstep, taking reports at
/// the configured cadence. The step is fixed: `t_end` divided into the fewest
/// equal steps allowed by the CFL number at `t = 0`.
/// Step count and fixed step size: `t_end` split evenly with `dt` at most the
/// CFL limit of the initial state.
pub fn step_plan(scenario: &Scenario, state: &MhdState) -> Result<(usize, f64)> {
    let limit = stable_dt(state, &scenario.eos, scenario.cfl)?;
    Ok(if scenario.t_end == 0.0 {
        (0, if limit.is_finite() { limit } else { 1.0 })
    } else if limit.is_finite() {
        let steps = (scenario.t_end / limit).ceil().max(1.0) as usize;
        (steps, scenario.t_end / steps as f64)
    } else {
        (1, scenario.t_end)
    })
}

pub fn simulate(scenario: &Scenario, config_hash: &str) -> Result<RunRecord> {
    let start = Instant::now();
    let eos = &scenario.eos;
    let state = scenario.initial_state().context("building the initial state")?;
    let (steps, dt) = step_plan(scenario, &state)?;
    let report_at = report_steps(scenario, steps);
    let mut record = RunRecord {
        scenario: scenario.clone(),
        steps,
        dt,
        reports: Vec::new(),
        skipped: Vec::new(),
        diagnostics: Vec::new(),
        exact_errors: BTreeMap::new(),
        max_div_b: 0.0,
        provenance: Provenance {
            config_hash: config_hash.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            wall_time: 0.0,
        },
        initial: Coupled::new(state.clone()),
        last: Coupled::new(state),
    };

    let mut prev: Option<Coupled> = None;
    let mut cur = record.initial.clone();
    let mut m = 0;
    loop {
        let diag = global_diagnostics(&cur.state, eos)?;
        record.max_div_b = record.max_div_b.max(diag.div_b_norm / cur.state.scale(eos)?);
        record.diagnostics.push(diag);
        let wants_report = report_at.contains(&m);
        if m == steps && !wants_report {
            break;
        }
        let next = if m < steps || wants_report {
            let ceiling = stable_dt(&cur.state, eos, 1.0)?;
            if dt > ceiling {
                anyhow::bail!("step {m} at t = {}: dt = {dt} exceeds the stable limit {ceiling}", cur.state.t);
            }
            let (n, _) = cur
                .step(eos, dt, scenario.kernel)
                .with_context(|| format!("step {} at t = {}", m + 1, cur.state.t))?;
            Some(n)
        } else {
            None
        };
        if wants_report {
            let levels = Levels {
                prev: prev.as_ref(),
                cur: &cur,
                next: next.as_ref().expect("look-ahead level"),
            };
            let (reports, skipped) = compute_reports(scenario, &scenario.reports, levels)
                .with_context(|| format!("reports at t = {}", cur.state.t))?;
            record.reports.extend(reports.into_iter().map(|report| StepReport { step: m, report }));
            record.skipped.extend(skipped.into_iter().map(|s| (cur.state.t, s)));
        }
        if m == steps {
            break;
        }
        prev = Some(cur);
        cur = next.expect("next level");
        m += 1;
    }
    record.exact_errors = exact_errors(scenario, &cur)?;
    record.last = cur;
    record.provenance.wall_time = start.elapsed().as_secs_f64();
    Ok(record)
}

/// Deviation from the closed-form solution of the presets that have one.
fn exact_errors(s: &Scenario, c: &Coupled) -> Result<BTreeMap<String, Norms>> {
    let mut out = BTreeMap::new();
    let st = &c.state;
    let grid = *st.grid();
    match s.preset {
        Preset::Advection => {
            let t = st.t;
            let exact = ScalarField::from_fn(grid, |x| (x[0] - t).sin());
            if let Some(psi) = st.labels.get("psi") {
                out.insert("psi".into(), Norms::scalar(&(&psi.periodic - &exact)));
            }
        }
        Preset::Uniform => {
            let s0 = s.initial_state()?;
            out.insert("rho".into(), Norms::scalar(&(&st.rho - &s0.rho)));
            out.insert("u".into(), Norms::vector(&(&st.u - &s0.u)));
            out.insert("B".into(), Norms::vector(&(&st.b - &s0.b)));
        }
        _ => {}
    }
    Ok(out)
}

#[derive(Serialize)]
struct RunDoc<'a> {
    scenario: &'a Scenario,
    provenance: &'a Provenance,
    steps: usize,
    dt: f64,
    t_final: f64,
    reports: Vec<String>,
    skipped: Vec<SkippedDoc<'a>>,
    exact_errors: &'a BTreeMap<String, Norms>,
    max_div_b_relative: f64,
    energy_drift: f64,
}

#[derive(Serialize)]
struct SkippedDoc<'a> {
    t: f64,
    name: &'a str,
}

fn report_stem(idx: usize, r: &ConservationReport) -> String {
    let mut stem = format!("{idx:03}-{}", r.name);
    for part in [&r.variant, &r.side].into_iter().flatten() {
        stem.push('-');
        stem.push_str(part);
    }
    stem
}

/// Writes `run.json`, `timeseries.csv`, `reports/*.json`, optional dumps and
/// `provenance.txt` (the only file carrying the wall time).
pub fn write_outputs(record: &RunRecord, dir: &Path) -> Result<()> {
    let reports_dir = dir.join("reports");
    std::fs::create_dir_all(&reports_dir).with_context(|| format!("creating {}", reports_dir.display()))?;
    let out = &record.scenario.output;
    let mut names = Vec::new();
    for (i, sr) in record.reports.iter().enumerate() {
        let stem = report_stem(i, &sr.report);
        let summary = sr.report.summary();
        io::write_json(&reports_dir.join(format!("{stem}.json")), &ReportDoc { step: sr.step, summary: &summary })?;
        if out.dump_residuals {
            let rd = dir.join("residuals");
            std::fs::create_dir_all(&rd)?;
            io::write_field(&rd, &stem, &sr.report.residual, sr.report.t)?;
        }
        names.push(format!("reports/{stem}.json"));
    }
    std::fs::write(dir.join("timeseries.csv"), io::timeseries_csv(&record.diagnostics))?;
    let doc = RunDoc {
        scenario: &record.scenario,
        provenance: &record.provenance,
        steps: record.steps,
        dt: record.dt,
        t_final: record.last.state.t,
        reports: names,
        skipped: record.skipped.iter().map(|(t, name)| SkippedDoc { t: *t, name }).collect(),
        exact_errors: &record.exact_errors,
        max_div_b_relative: record.max_div_b,
        energy_drift: record.energy_drift(),
    };
    io::write_json(&dir.join("run.json"), &doc)?;

    let st = &record.last.state;
    if out.dump_fields {
        let fd = dir.join("fields");
        std::fs::create_dir_all(&fd)?;
        io::write_scalar(&fd, "rho", &st.rho, st.t)?;
        io::write_scalar(&fd, "S", &st.s, st.t)?;
        io::write_field(&fd, "u", &Field::Vector(st.u.clone()), st.t)?;
        io::write_field(&fd, "B", &Field::Vector(st.b.clone()), st.t)?;
        for (name, l) in &st.labels {
            let values: Vec<f64> = (0..st.grid().len()).map(|i| l.value_at(i)).collect();
            io::write_dump(&fd.join(format!("{name}.bin")), &io::DumpHeader::new(name, st.grid(), st.t), &values)?;
        }
    }
    if out.dump_tracers {
        io::write_tracers(&dir.join("tracers.bin"), &record.last.map)?;
    }
    std::fs::write(
        dir.join("provenance.txt"),
        format!(
            "config_hash {}\nversion {}\nwall_time_s {:.3}\n",
            record.provenance.config_hash, record.provenance.version, record.provenance.wall_time
        ),
    )?;
    Ok(())
}

/// `run --config <path> [--out <dir>]`.
pub fn run(config_path: &Path, out: Option<PathBuf>) -> Result<RunRecord> {
    let config = Config::load(config_path)?;
    let scenario = Scenario::from_config(&config)?;
    let dir = out.unwrap_or_else(|| scenario.output.dir.clone());
    let record = simulate(&scenario, &config.hash())?;
    write_outputs(&record, &dir)?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(text: &str) -> Scenario {
        Scenario::from_config(&Config::parse(text, "t").unwrap()).unwrap()
    }

    #[test]
    fn cadence_includes_final_step() {
        let s = scenario("scenario.name = uniform\nrun.report_every = 3\nrun.report_initial = true\n");
        assert_eq!(report_steps(&s, 7), vec![0, 3, 6, 7]);
        assert_eq!(report_steps(&s, 6), vec![0, 3, 6]);
        let s = scenario("scenario.name = uniform\n");
        assert_eq!(report_steps(&s, 5), vec![5]);
    }

    #[test]
    fn uniform_run_reports_round_off() {
        let s = scenario("scenario.name = uniform\ngrid.nx = 8\nrun.t_end = 0.05\nrun.mode = snapshot\nrun.report_initial = true\n");
        let r = simulate(&s, "h").unwrap();
        assert!(r.steps > 0);
        assert!((r.last.state.t - 0.05).abs() < 1e-15);
        assert!(!r.reports.is_empty());
        // snapshot identities have no level before t = 0
        assert!(r.skipped.iter().any(|(t, n)| *t == 0.0 && n == "nfa15"));
        for sr in &r.reports {
            assert!(sr.report.norms.linf <= 1e-11, "{} {:?}", sr.report.name, sr.report.norms);
        }
        assert_eq!(r.diagnostics.len(), r.steps + 1);
        assert!(r.exact_errors["u"].linf <= 1e-14);
    }

    #[test]
    fn missing_label_is_a_runtime_error_with_context() {
        let s = scenario("scenario.name = orszag-tang-25d\ngrid.nx = 16\nrun.t_end = 0\nscenario.labels = chi\nreports.list = eq1.3\n");
        let e = format!("{:#}", simulate(&s, "h").unwrap_err());
        assert!(e.contains("reports at t = 0") && e.contains("label `psi`"), "{e}");
    }
}
