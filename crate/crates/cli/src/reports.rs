//! Named identities a run can report on.

use serde::{Serialize, Serializer};

use mhd_invariants::calculus::Field;
use mhd_invariants::lagrange::{
    euler_lagrange_residual, lagrangian_densities, map_geometry, map_reconstruct, sample_at_tracers,
    sample_vector_at_tracers, Coupled,
};
use mhd_invariants::noether::{
    cheviakov_residual, current_conservation, pv_residual, vorticity_residuals, CheviakovSystem, ConservationReport,
    Controls, CurrentFlux, Mode, PvVariant, TimeSample,
};
use mhd_invariants::relabel::{bianchi_residual, determining_residuals, MapLevel, Shell, Side, SymmetryGenerator};
use mhd_invariants::solver::mhd_rhs;
use mhd_invariants::{Error, Result};

use crate::scenario::{Preset, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Pv(PvVariant),
    Cheviakov,
    MomentumForm,
    VorticityEq,
    GradAdvect,
    Current,
    MapMass,
    MapField,
    LagrangeDensity,
    EulerLagrange,
    LabelDetermining,
    EulerDetermining(&'static str),
    DivergenceSymmetry,
    BianchiLabel,
    BianchiEuler,
}

impl Serialize for ReportKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl ReportKind {
    pub const ALL: [ReportKind; 19] = [
        ReportKind::Pv(PvVariant::Hydro),
        ReportKind::Pv(PvVariant::Mhd),
        ReportKind::Pv(PvVariant::FullF),
        ReportKind::Cheviakov,
        ReportKind::MomentumForm,
        ReportKind::VorticityEq,
        ReportKind::GradAdvect,
        ReportKind::Current,
        ReportKind::MapMass,
        ReportKind::MapField,
        ReportKind::LagrangeDensity,
        ReportKind::EulerLagrange,
        ReportKind::LabelDetermining,
        ReportKind::EulerDetermining("eq4.35a"),
        ReportKind::EulerDetermining("eq4.35b"),
        ReportKind::EulerDetermining("eq4.35c"),
        ReportKind::DivergenceSymmetry,
        ReportKind::BianchiLabel,
        ReportKind::BianchiEuler,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ReportKind::Pv(v) => v.report_name(),
            ReportKind::Cheviakov => "eq1.5",
            ReportKind::MomentumForm => "nfa34",
            ReportKind::VorticityEq => "nfa35",
            ReportKind::GradAdvect => "nfa36",
            ReportKind::Current => "eq4.35da",
            ReportKind::MapMass => "eq2.7",
            ReportKind::MapField => "eq2.9",
            ReportKind::LagrangeDensity => "eq2.16",
            ReportKind::EulerLagrange => "eq2.19",
            ReportKind::LabelDetermining => "eq4.34",
            ReportKind::EulerDetermining(n) => n,
            ReportKind::DivergenceSymmetry => "eq4.35aa",
            ReportKind::BianchiLabel => "nfa15",
            ReportKind::BianchiEuler => "nfa17",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the identity also needs the second label `chi`.
    fn needs_chi(&self) -> bool {
        matches!(
            self,
            ReportKind::Current
                | ReportKind::LabelDetermining
                | ReportKind::EulerDetermining(_)
                | ReportKind::DivergenceSymmetry
        )
    }

    fn needs_psi(&self) -> bool {
        !matches!(
            self,
            ReportKind::MomentumForm
                | ReportKind::VorticityEq
                | ReportKind::MapMass
                | ReportKind::MapField
                | ReportKind::LagrangeDensity
                | ReportKind::EulerLagrange
        )
    }

    /// Every identity the preset's labels support.
    pub fn defaults(preset: Preset) -> Vec<Self> {
        let has_chi = !matches!(preset, Preset::Advection | Preset::ShearAlfven);
        Self::ALL.into_iter().filter(|k| has_chi || !k.needs_chi()).collect()
    }

    /// `all` expands to the defaults of `preset`.
    pub fn parse_list(items: &[String], preset: Preset) -> std::result::Result<Vec<Self>, String> {
        let mut out = Vec::new();
        for it in items {
            let kinds = if it == "all" {
                Self::defaults(preset)
            } else {
                match Self::parse(it) {
                    Some(k) => vec![k],
                    None => {
                        let known: Vec<_> = Self::ALL.into_iter().map(|k| k.name()).collect();
                        return Err(format!("unknown report `{it}` (known: all, {})", known.join(", ")));
                    }
                }
            };
            for k in kinds {
                if !out.contains(&k) {
                    out.push(k);
                }
            }
        }
        Ok(out)
    }
}

/// Coupled states around the report time; `next` is a look-ahead step.
#[derive(Debug, Clone, Copy)]
pub struct Levels<'a> {
    pub prev: Option<&'a Coupled>,
    pub cur: &'a Coupled,
    pub next: &'a Coupled,
}

/// Reports of `kinds` at one time level, in a fixed order. Identities that need
/// a level before `cur` are skipped when there is none; their names are
/// returned alongside.
pub fn compute_reports(
    scenario: &Scenario,
    kinds: &[ReportKind],
    levels: Levels<'_>,
) -> Result<(Vec<ConservationReport>, Vec<String>)> {
    let eos = &scenario.eos;
    let ctl = Controls {
        lorentz_sign: scenario.lorentz_sign,
        ..Controls::default()
    };
    let cur = &levels.cur.state;
    let psi = scenario.psi.as_str();
    let chi = scenario.chi.as_str();
    let kernel = scenario.kernel;
    let k = mhd_rhs(cur, eos)?;
    let sample = match (scenario.mode, levels.prev) {
        (Mode::SemiDiscrete, _) => Some(TimeSample::SemiDiscrete { state: cur, k: &k }),
        (Mode::Snapshot, Some(p)) => Some(TimeSample::Snapshot {
            prev: &p.state,
            state: cur,
            next: &levels.next.state,
        }),
        (Mode::Snapshot, None) => None,
    };
    let snapshot_levels = levels.prev.map(|p| {
        [p, levels.cur, levels.next].map(|c| MapLevel {
            state: &c.state,
            map: &c.map,
        })
    });

    for kind in kinds {
        let missing = if kind.needs_psi() && !cur.labels.contains_key(psi) {
            Some(psi)
        } else if kind.needs_chi() && !cur.labels.contains_key(chi) {
            Some(chi)
        } else {
            None
        };
        if let Some(l) = missing {
            return Err(Error::Config(format!("report {} needs label `{l}`, which the state does not carry", kind.name())));
        }
    }

    let mut out = Vec::new();
    let mut skipped = Vec::new();
    let want = |k: ReportKind| kinds.contains(&k);
    let time_dependent = [
        ReportKind::Pv(PvVariant::Hydro),
        ReportKind::Pv(PvVariant::Mhd),
        ReportKind::Pv(PvVariant::FullF),
        ReportKind::Cheviakov,
        ReportKind::MomentumForm,
        ReportKind::VorticityEq,
        ReportKind::GradAdvect,
        ReportKind::Current,
        ReportKind::LabelDetermining,
        ReportKind::EulerDetermining("eq4.35a"),
        ReportKind::EulerDetermining("eq4.35b"),
        ReportKind::EulerDetermining("eq4.35c"),
        ReportKind::DivergenceSymmetry,
        ReportKind::BianchiEuler,
    ];

    match sample {
        None => {
            for k in time_dependent.into_iter().filter(|k| want(*k)) {
                skipped.push(k.name().to_string());
            }
        }
        Some(sample) => {
            for v in [PvVariant::Hydro, PvVariant::Mhd, PvVariant::FullF] {
                if want(ReportKind::Pv(v)) {
                    out.push(pv_residual(sample, eos, psi, v, &ctl)?);
                }
            }
            if want(ReportKind::Cheviakov) {
                let sys = CheviakovSystem::canonical(eos, psi, ctl);
                out.push(cheviakov_residual(sample, &sys, &ctl)?);
            }
            if want(ReportKind::MomentumForm) || want(ReportKind::VorticityEq) || want(ReportKind::GradAdvect) {
                let label = if want(ReportKind::GradAdvect) { psi } else { first_label(cur)? };
                let v = vorticity_residuals(sample, eos, label, &ctl)?;
                for (kind, r) in [
                    (ReportKind::MomentumForm, v.momentum_form),
                    (ReportKind::VorticityEq, v.vorticity_eq),
                    (ReportKind::GradAdvect, v.grad_advect),
                ] {
                    if want(kind) {
                        out.push(r);
                    }
                }
            }
            if want(ReportKind::Current) {
                for form in [CurrentFlux::Full, CurrentFlux::WithoutAdvection] {
                    out.push(current_conservation(sample, eos, psi, chi, form)?);
                }
            }
            let determining = [
                ReportKind::LabelDetermining,
                ReportKind::EulerDetermining("eq4.35a"),
                ReportKind::EulerDetermining("eq4.35b"),
                ReportKind::EulerDetermining("eq4.35c"),
                ReportKind::DivergenceSymmetry,
            ];
            if determining.iter().any(|k| want(*k)) {
                let gen = SymmetryGenerator::new(psi, chi);
                let d = determining_residuals(sample, &levels.cur.map, eos, &gen, kernel)?;
                for r in d.all() {
                    if ReportKind::parse(&r.name).is_some_and(want) {
                        out.push(r.clone());
                    }
                }
            }
            if want(ReportKind::BianchiEuler) {
                for shell in [Shell::On, Shell::Off] {
                    let r = match (scenario.mode, &snapshot_levels) {
                        (Mode::Snapshot, Some(l)) => bianchi_residual(l, eos, psi, Side::Euler, shell, kernel)?,
                        _ => {
                            let one = [MapLevel {
                                state: cur,
                                map: &levels.cur.map,
                            }];
                            bianchi_residual(&one, eos, psi, Side::Euler, shell, kernel)?
                        }
                    };
                    out.push(r);
                }
            }
        }
    }

    if want(ReportKind::MapMass) || want(ReportKind::MapField) || want(ReportKind::LagrangeDensity) {
        let map = &levels.cur.map;
        let geom = map_geometry(map)?;
        let recon = map_reconstruct(map, &geom);
        let mode = scenario.mode;
        if want(ReportKind::MapMass) {
            let rho = &sample_at_tracers(&cur.rho, map, kernel)? - &recon.rho;
            let s = &sample_at_tracers(&cur.s, map, kernel)? - &recon.s;
            out.push(ConservationReport::new("eq2.7", mode, cur.t, Field::Scalar(rho)).with_variant("rho"));
            out.push(ConservationReport::new("eq2.7", mode, cur.t, Field::Scalar(s)).with_variant("S"));
        }
        if want(ReportKind::MapField) {
            let b = &sample_vector_at_tracers(&cur.b, map, kernel)? - &recon.b;
            out.push(ConservationReport::new("eq2.9", mode, cur.t, Field::Vector(b)));
        }
        if want(ReportKind::LagrangeDensity) {
            let velocity = sample_vector_at_tracers(&cur.u, map, kernel)?;
            let phi = match &cur.phi {
                Some(p) => Some(sample_at_tracers(p, map, kernel)?),
                None => None,
            };
            let d = lagrangian_densities(map, &geom, eos, &velocity, phi.as_ref())?;
            let r = &d.ell0 - &(&d.ell * &geom.j);
            out.push(ConservationReport::new("eq2.16", mode, cur.t, Field::Scalar(r)));
        }
    }
    if want(ReportKind::EulerLagrange) {
        let geom = map_geometry(&levels.cur.map)?;
        let e = euler_lagrange_residual(&levels.cur.map, &geom, eos, cur, &k, kernel)?;
        out.push(ConservationReport::new("eq2.19", Mode::SemiDiscrete, cur.t, Field::Vector(e)).with_variant("on-shell"));
    }
    if want(ReportKind::BianchiLabel) {
        match &snapshot_levels {
            Some(l) => {
                for shell in [Shell::On, Shell::Off] {
                    out.push(bianchi_residual(l, eos, psi, Side::Label, shell, kernel)?);
                }
            }
            None => skipped.push("nfa15".to_string()),
        }
    }
    Ok((out, skipped))
}

fn first_label(state: &mhd_invariants::MhdState) -> Result<&str> {
    state
        .labels
        .keys()
        .next()
        .map(String::as_str)
        .ok_or_else(|| Error::Config("vorticity identities need at least one label".into()))
}
