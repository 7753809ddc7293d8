//! Scenario description and initial conditions.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use mhd_invariants::calculus::{Grid, Kernel};
use mhd_invariants::noether::Mode;
use mhd_invariants::presets::{self, OrszagTang};
use mhd_invariants::relabel::{foliation_build, EntropyClosure, FoliationSpec, REFERENCE_AMPLITUDES};
use mhd_invariants::{EquationOfState, Eos, MhdState};

use crate::config::{Config, ConfigError};
use crate::reports::ReportKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Uniform,
    Advection,
    ShearAlfven,
    OrszagTang25d,
    CustomClosures,
}

impl Serialize for Preset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Uniform,
        Preset::Advection,
        Preset::ShearAlfven,
        Preset::OrszagTang25d,
        Preset::CustomClosures,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Uniform => "uniform",
            Preset::Advection => "advection",
            Preset::ShearAlfven => "shear-alfven",
            Preset::OrszagTang25d => "orszag-tang-25d",
            Preset::CustomClosures => "custom-closures",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub n: [usize; 3],
    pub len: [f64; 3],
    pub order: usize,
}

impl GridSpec {
    pub fn build(&self) -> mhd_invariants::Result<Grid> {
        Grid::new(self.n, self.len, self.order)
    }

    /// The same box with every active axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let n = self.n.map(|m| if m > 1 { m * factor } else { m });
        Self { n, ..*self }
    }
}

/// Amplitudes of the custom-closures foliation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoliationParams {
    pub amplitudes: [f64; 3],
    pub entropy_amplitude: f64,
}

impl Default for FoliationParams {
    fn default() -> Self {
        Self {
            amplitudes: REFERENCE_AMPLITUDES,
            entropy_amplitude: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub dump_fields: bool,
    pub dump_tracers: bool,
    pub dump_residuals: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub preset: Preset,
    pub grid: GridSpec,
    pub eos: Eos,
    /// Orszag-Tang without `B`, with `psi` a copy of `S`
    pub hydro: bool,
    pub vector_potential: bool,
    /// labels to keep; `None` keeps all those of the preset
    pub labels: Option<Vec<String>>,
    pub foliation: FoliationParams,
    pub t_end: f64,
    pub cfl: f64,
    #[serde(serialize_with = "kernel_name")]
    pub kernel: Kernel,
    pub mode: Mode,
    /// report cadence in steps; `0` reports at `t_end` only
    pub report_every: usize,
    pub report_initial: bool,
    pub reports: Vec<ReportKind>,
    pub psi: String,
    pub chi: String,
    pub lorentz_sign: f64,
    /// not part of the snapshot written with the outputs
    #[serde(skip)]
    pub output: OutputSpec,
    pub floor: f64,
    pub floors: BTreeMap<String, f64>,
    /// residual norms below this multiple of the field scale count as round-off
    pub noise_floor: f64,
}

fn kernel_name<S: serde::Serializer>(k: &Kernel, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match k {
        Kernel::Linear => "linear",
        Kernel::Cubic => "cubic",
    })
}

pub fn parse_mode(s: &str) -> Option<Mode> {
    match s {
        "semi-discrete" => Some(Mode::SemiDiscrete),
        "snapshot" => Some(Mode::Snapshot),
        _ => None,
    }
}

fn parse_kernel(s: &str) -> Option<Kernel> {
    match s {
        "cubic" => Some(Kernel::Cubic),
        "linear" => Some(Kernel::Linear),
        _ => None,
    }
}

impl Scenario {
    pub fn from_config(c: &Config) -> Result<Self, ConfigError> {
        let name = c.require("scenario.name")?;
        let preset = Preset::parse(name).ok_or_else(|| {
            let known: Vec<_> = Preset::ALL.iter().map(|p| p.as_str()).collect();
            c.error("scenario.name", format!("unknown scenario `{name}` (expected one of {})", known.join(", ")))
        })?;
        let tau = std::f64::consts::TAU;
        let nx = c.get_or("grid.nx", 64usize)?;
        let grid = GridSpec {
            n: [nx, c.get_or("grid.ny", nx)?, c.get_or("grid.nz", 1usize)?],
            len: [c.get_or("grid.lx", tau)?, c.get_or("grid.ly", tau)?, c.get_or("grid.lz", tau)?],
            order: c.get_or("grid.order", 4usize)?,
        };
        grid.build().map_err(|e| c.error("grid.nx", e.to_string()))?;

        let d = Eos::default();
        let eos = Eos::new(
            c.get_or("eos.gamma", d.gamma)?,
            c.get_or("eos.cv", d.cv)?,
            c.get_or("eos.s_ref", d.s_ref)?,
            c.get_or("eos.mu0", d.mu0)?,
        )
        .map_err(|e| c.error("eos.gamma", e.to_string()))?;

        let fd = FoliationParams::default();
        let foliation = FoliationParams {
            amplitudes: [
                c.get_or("foliation.a1", fd.amplitudes[0])?,
                c.get_or("foliation.a2", fd.amplitudes[1])?,
                c.get_or("foliation.a3", fd.amplitudes[2])?,
            ],
            entropy_amplitude: c.get_or("foliation.entropy_amplitude", fd.entropy_amplitude)?,
        };

        let t_end: f64 = c.get_or("run.t_end", 0.2)?;
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(c.error("run.t_end", "must be finite and non-negative"));
        }
        let cfl: f64 = c.get_or("run.cfl", 0.3)?;
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(c.error("run.cfl", "must lie in (0, 1]"));
        }
        let kernel = match c.raw("run.kernel") {
            None => Kernel::Cubic,
            Some(s) => parse_kernel(s).ok_or_else(|| c.error("run.kernel", format!("expected cubic or linear, got `{s}`")))?,
        };
        let mode = match c.raw("run.mode") {
            None => Mode::SemiDiscrete,
            Some(s) => parse_mode(s)
                .ok_or_else(|| c.error("run.mode", format!("expected semi-discrete or snapshot, got `{s}`")))?,
        };
        let reports = match c.list("reports.list") {
            None => ReportKind::defaults(preset),
            Some(items) => ReportKind::parse_list(&items, preset).map_err(|m| c.error("reports.list", m))?,
        };
        let lorentz_sign: f64 = c.get_or("reports.lorentz_sign", 1.0)?;
        if lorentz_sign.abs() != 1.0 {
            return Err(c.error("reports.lorentz_sign", "must be 1 or -1"));
        }
        let mut floors = BTreeMap::new();
        for k in c.keys() {
            if let Some(name) = k.strip_prefix("convergence.floor.") {
                floors.insert(name.to_string(), c.get_or(k, 0.0)?);
            }
        }
        let s = Self {
            preset,
            grid,
            eos,
            hydro: c.get_or("scenario.hydro", false)?,
            vector_potential: c.get_or("scenario.vector_potential", false)?,
            labels: c.list("scenario.labels"),
            foliation,
            t_end,
            cfl,
            kernel,
            mode,
            report_every: c.get_or("run.report_every", 0usize)?,
            report_initial: c.get_or("run.report_initial", false)?,
            reports,
            psi: c.get_or("reports.psi", "psi".to_string())?,
            chi: c.get_or("reports.chi", "chi".to_string())?,
            lorentz_sign,
            output: OutputSpec {
                dir: PathBuf::from(c.get_or("output.dir", "out".to_string())?),
                dump_fields: c.get_or("output.dump_fields", false)?,
                dump_tracers: c.get_or("output.dump_tracers", false)?,
                dump_residuals: c.get_or("output.dump_residuals", false)?,
            },
            floor: c.get_or("convergence.floor", 0.0)?,
            floors,
            noise_floor: c.get_or("convergence.noise_floor", 1e-11)?,
        };
        if (s.hydro || s.vector_potential) && s.preset != Preset::OrszagTang25d {
            let key = if s.hydro { "scenario.hydro" } else { "scenario.vector_potential" };
            return Err(c.error(key, "only applies to orszag-tang-25d"));
        }
        let probe = s.initial_state().map_err(|e| c.error("scenario.name", e.to_string()))?;
        if let Some(keep) = &s.labels {
            if let Some(missing) = keep.iter().find(|l| !probe.labels.contains_key(*l)) {
                return Err(c.error("scenario.labels", format!("preset carries no label `{missing}`")));
            }
        }
        Ok(s)
    }

    /// Observed-order floor for report `name`.
    pub fn floor_for(&self, name: &str) -> f64 {
        self.floors.get(name).copied().unwrap_or(self.floor)
    }

    pub fn with_grid(&self, grid: GridSpec) -> Self {
        Self { grid, ..self.clone() }
    }

    pub fn initial_state(&self) -> mhd_invariants::Result<MhdState> {
        let grid = self.grid.build()?;
        let eos = &self.eos;
        let mut state = match self.preset {
            Preset::Uniform => presets::uniform(grid, eos)?,
            Preset::Advection => presets::advection(grid, eos)?,
            Preset::ShearAlfven => presets::shear_alfven(grid, eos)?,
            Preset::OrszagTang25d => presets::orszag_tang_25d(
                grid,
                eos,
                OrszagTang {
                    hydro: self.hydro,
                    vector_potential: self.vector_potential,
                },
            )?,
            Preset::CustomClosures => {
                let s0 = eos.entropy_for(1.0, 1.0)?;
                let spec = FoliationSpec::curved(
                    self.foliation.amplitudes,
                    EntropyClosure::chi_only(s0, self.foliation.entropy_amplitude),
                );
                foliation_build(&spec, grid)?.initial_state(presets::ot_velocity)?
            }
        };
        if let Some(keep) = &self.labels {
            state.labels.retain(|k, _| keep.contains(k));
        }
        Ok(state)
    }
}
