//! TOML scenario files and CSV output.
//!
//! A config either starts from a built-in preset (`preset = "wave"`) and
//! overrides single keys, or describes a scenario from scratch. Sections that
//! carry a `kind` key replace the preset's value as a whole.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::{Boundaries, BoundaryKind, Signal, TimeSeries};
use crate::driver::{InitialCondition, Physics, Reference, RestProfile, RunResult, Scenario, Snapshot, Study};
use crate::error::{Error, Result};
use crate::flux::FluxKind;
use crate::integrate::{Scheme, SchemeOrder};
use crate::model::{Grid, VesselModel};
use crate::oracles::{damped_dispersion, Oracle};
use crate::presets::{self, RHO};
use crate::reconstruction::{SlopeKind, DEFAULT_THETA_ENO, DEFAULT_THETA_ENOM};
use crate::well_balanced::{FrictionTreatment, SourceTreatment};

pub const SNAPSHOT_HEADER: &str = "x,A,Q,u,R,p";

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub grid: Option<GridSection>,
    pub model: Option<ModelSection>,
    pub initial: Option<InitialSection>,
    pub boundary: Option<BoundarySection>,
    pub scheme: Option<SchemeSection>,
    pub time: Option<TimeSection>,
    pub reference: Option<ReferenceSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub cells: Option<usize>,
    pub length: Option<f64>,
    pub x_left: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub k: Option<f64>,
    pub rho: Option<f64>,
    pub p0: Option<f64>,
    pub cf: Option<f64>,
    pub profile: Option<ProfileSection>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub kind: String,
    pub radius: Option<f64>,
    pub delta_r: Option<f64>,
    pub x: Option<Vec<f64>>,
    pub r_upstream: Option<f64>,
    pub r_downstream: Option<f64>,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: String,
    pub r_left: Option<f64>,
    pub r_right: Option<f64>,
    pub x0: Option<f64>,
    pub eps: Option<f64>,
    pub start: Option<f64>,
    pub end: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub left: Option<EndSection>,
    pub right: Option<EndSection>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndSection {
    pub kind: String,
    pub signal: Option<String>,
    pub value: Option<f64>,
    pub offset: Option<f64>,
    pub amplitude: Option<f64>,
    pub omega: Option<f64>,
    pub file: Option<PathBuf>,
    pub x: Option<f64>,
    pub k_r: Option<f64>,
    pub k_i: Option<f64>,
    pub area: Option<f64>,
    pub discharge: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub flux: Option<FluxKind>,
    pub order: Option<u8>,
    pub slope: Option<String>,
    pub theta_eno: Option<f64>,
    pub theta_enom: Option<f64>,
    pub source: Option<SourceTreatment>,
    pub friction: Option<FrictionTreatment>,
    pub cfl: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub kind: String,
    pub omega: Option<f64>,
    pub q_amp: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// A parsed config: the scenario and where to write results.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub output_dir: Option<PathBuf>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse_config_file(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::ConfigParse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })
}

/// Parses and validates a scenario. Table files are resolved against the
/// working directory.
pub fn parse_config(text: &str) -> Result<Scenario> {
    Ok(parse_config_in(text, None)?.scenario)
}

/// Like [`parse_config`], resolving relative paths against `base`.
pub fn parse_config_in(text: &str, base: Option<&Path>) -> Result<Config> {
    let file = parse_config_file(text)?;
    let scenario = build_scenario(&file, base)?;
    let output_dir = file.output.and_then(|o| o.dir).map(|d| resolve(base, &d));
    Ok(Config { scenario, output_dir })
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_in(&text, path.parent())
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

fn require<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(key, "missing value"))
}

fn build_profile(p: &ProfileSection) -> Result<RestProfile> {
    let key = |k: &str| format!("model.profile.{k}");
    Ok(match p.kind.as_str() {
        "uniform" => RestProfile::Uniform {
            radius: require(p.radius, &key("radius"))?,
        },
        "aneurism" => {
            let x = require(p.x.clone(), &key("x"))?;
            let x: [f64; 4] = x
                .try_into()
                .map_err(|v: Vec<f64>| Error::config(key("x"), format!("expected 4 positions, got {}", v.len())))?;
            if x.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::config(key("x"), "positions must increase"));
            }
            RestProfile::Aneurism {
                radius: require(p.radius, &key("radius"))?,
                delta_r: require(p.delta_r, &key("delta_r"))?,
                x,
            }
        }
        "taper" => {
            let (x1, x2) = (require(p.x1, &key("x1"))?, require(p.x2, &key("x2"))?);
            if !(x2 > x1) {
                return Err(Error::config(key("x2"), "must exceed x1"));
            }
            RestProfile::Taper {
                r_upstream: require(p.r_upstream, &key("r_upstream"))?,
                r_downstream: require(p.r_downstream, &key("r_downstream"))?,
                x1,
                x2,
            }
        }
        "cells" => RestProfile::Cells(require(p.radii.clone(), &key("radii"))?),
        other => return Err(Error::config(key("kind"), format!("unknown profile `{other}`"))),
    })
}

fn build_initial(s: &InitialSection) -> Result<InitialCondition> {
    let key = |k: &str| format!("initial.{k}");
    Ok(match s.kind.as_str() {
        "rest" => InitialCondition::Rest,
        "riemann" => InitialCondition::Riemann {
            r_left: require(s.r_left, &key("r_left"))?,
            r_right: require(s.r_right, &key("r_right"))?,
            x0: require(s.x0, &key("x0"))?,
        },
        "sine_pulse" => {
            let (start, end) = (require(s.start, &key("start"))?, require(s.end, &key("end"))?);
            if !(end > start) {
                return Err(Error::config(key("end"), "must exceed start"));
            }
            InitialCondition::SinePulse {
                eps: require(s.eps, &key("eps"))?,
                start,
                end,
            }
        }
        other => return Err(Error::config(key("kind"), format!("unknown initial condition `{other}`"))),
    })
}

/// Rest radius seen by the boundary, for the damped-wave wavenumbers.
struct EndContext<'a> {
    physics: Physics,
    r0: f64,
    base: Option<&'a Path>,
}

fn build_signal(e: &EndSection, prefix: &str, ctx: &EndContext) -> Result<Signal> {
    let key = |k: &str| format!("{prefix}.{k}");
    let kind = match (&e.signal, e.value) {
        (Some(s), _) => s.as_str(),
        (None, Some(_)) => "constant",
        (None, None) => return Err(Error::config(key("signal"), "missing value")),
    };
    Ok(match kind {
        "constant" => Signal::Constant(require(e.value, &key("value"))?),
        "sine" => Signal::Sine {
            offset: e.offset.unwrap_or(0.0),
            amplitude: require(e.amplitude, &key("amplitude"))?,
            omega: require(e.omega, &key("omega"))?,
        },
        "table" => {
            let file = require(e.file.as_ref(), &key("file"))?;
            Signal::Table(Arc::new(TimeSeries::load(&resolve(ctx.base, file))?))
        }
        "damped_wave" => {
            let omega = require(e.omega, &key("omega"))?;
            let (k_r, k_i) = match (e.k_r, e.k_i) {
                (Some(k_r), Some(k_i)) => (k_r, k_i),
                (None, None) => {
                    let p = ctx.physics;
                    let m = VesselModel::uniform(p.k, p.rho, p.p0, p.cf, ctx.r0, 1)
                        .map_err(|err| Error::config(key("omega"), err.to_string()))?;
                    let root = damped_dispersion(omega, &m, ctx.r0);
                    (root.k_r, root.k_i)
                }
                _ => return Err(Error::config(key("k_i"), "give both k_r and k_i or neither")),
            };
            Signal::DampedWave {
                x: require(e.x, &key("x"))?,
                omega,
                amplitude: require(e.amplitude, &key("amplitude"))?,
                k_r,
                k_i,
            }
        }
        other => return Err(Error::config(key("signal"), format!("unknown signal `{other}`"))),
    })
}

fn build_end(e: &EndSection, prefix: &str, ctx: &EndContext) -> Result<BoundaryKind> {
    let key = |k: &str| format!("{prefix}.{k}");
    Ok(match e.kind.as_str() {
        "area" => BoundaryKind::GivenArea(build_signal(e, prefix, ctx)?),
        "discharge" => BoundaryKind::GivenDischarge(build_signal(e, prefix, ctx)?),
        "discharge_flux" => BoundaryKind::GivenDischargeFlux(build_signal(e, prefix, ctx)?),
        "supercritical_inflow" => BoundaryKind::SupercriticalInflow {
            area: Signal::Constant(require(e.area, &key("area"))?),
            discharge: Signal::Constant(require(e.discharge, &key("discharge"))?),
        },
        "supercritical_outflow" => BoundaryKind::SupercriticalOutflow,
        "non_reflecting" => BoundaryKind::NonReflecting,
        "periodic" => BoundaryKind::Periodic,
        other => return Err(Error::config(key("kind"), format!("unknown boundary `{other}`"))),
    })
}

fn build_scheme(s: &SchemeSection, base: Scheme) -> Result<Scheme> {
    let mut scheme = base;
    if let Some(f) = s.flux {
        scheme.flux = f;
    }
    if let Some(src) = s.source {
        scheme.source = src;
    }
    if let Some(fr) = s.friction {
        scheme.friction = fr;
    }
    if s.cfl.is_some() {
        scheme.cfl = s.cfl;
    }
    let base_slope = match base.order {
        SchemeOrder::Second(k) => Some(k),
        SchemeOrder::First => None,
    };
    let slope_requested = s.slope.is_some() || s.theta_eno.is_some() || s.theta_enom.is_some();
    let order = match s.order {
        Some(1) if slope_requested => {
            return Err(Error::config("scheme.slope", "slopes only apply to order = 2"));
        }
        Some(1) => 1,
        Some(2) => 2,
        Some(o) => return Err(Error::config("scheme.order", format!("must be 1 or 2, got {o}"))),
        None if slope_requested => 2,
        None => base.order.as_number(),
    };
    scheme.order = if order == 1 {
        SchemeOrder::First
    } else {
        let (eno0, enom0) = match base_slope {
            Some(SlopeKind::Eno { theta }) => (theta, DEFAULT_THETA_ENOM),
            Some(SlopeKind::EnoMod { theta_eno, theta_enom }) => (theta_eno, theta_enom),
            _ => (DEFAULT_THETA_ENO, DEFAULT_THETA_ENOM),
        };
        let theta_eno = s.theta_eno.unwrap_or(eno0);
        let theta_enom = s.theta_enom.unwrap_or(enom0);
        let name = s.slope.as_deref().unwrap_or(base_slope.map_or("muscl", |k| k.name()));
        SchemeOrder::Second(match name {
            "muscl" => SlopeKind::Muscl,
            "eno" => SlopeKind::Eno { theta: theta_eno },
            "enom" => SlopeKind::EnoMod { theta_eno, theta_enom },
            other => return Err(Error::config("scheme.slope", format!("unknown slope `{other}`"))),
        })
    };
    Ok(scheme)
}

fn build_reference(r: &ReferenceSection) -> Result<Reference> {
    Ok(match r.kind.as_str() {
        "none" => Reference::None,
        "tourniquet" => Reference::Tourniquet,
        "dalembert" => Reference::Dalembert,
        "rest" => Reference::Rest,
        "damped_wave" => Reference::DampedWave {
            omega: require(r.omega, "reference.omega")?,
            q_amp: require(r.q_amp, "reference.q_amp")?,
        },
        other => return Err(Error::config("reference.kind", format!("unknown reference `{other}`"))),
    })
}

/// Turns a parsed config into a validated scenario.
pub fn build_scenario(cfg: &ConfigFile, base: Option<&Path>) -> Result<Scenario> {
    let preset = cfg.preset.as_deref().map(presets::preset).transpose()?;
    let grid = cfg.grid.clone().unwrap_or_default();
    let model = cfg.model.clone().unwrap_or_default();
    let time = cfg.time.clone().unwrap_or_default();
    let p = preset.as_ref();

    let n_cells = require(grid.cells.or(p.map(|s| s.n_cells)), "grid.cells")?;
    let length = require(grid.length.or(p.map(|s| s.length)), "grid.length")?;
    let x_left = grid.x_left.or(p.map(|s| s.x_left)).unwrap_or(0.0);
    let physics = Physics {
        k: require(model.k.or(p.map(|s| s.physics.k)), "model.k")?,
        rho: model.rho.or(p.map(|s| s.physics.rho)).unwrap_or(RHO),
        p0: model.p0.or(p.map(|s| s.physics.p0)).unwrap_or(0.0),
        cf: model.cf.or(p.map(|s| s.physics.cf)).unwrap_or(0.0),
    };
    let profile = match &model.profile {
        Some(section) => build_profile(section)?,
        None => require(p.map(|s| s.profile.clone()), "model.profile")?,
    };
    let initial = match &cfg.initial {
        Some(section) => build_initial(section)?,
        None => p.map_or(InitialCondition::Rest, |s| s.initial.clone()),
    };
    let boundary = cfg.boundary.clone().unwrap_or_default();
    let default_bc = p.map_or_else(Boundaries::non_reflecting, |s| s.boundaries.clone());
    let x_right = x_left + length;
    let end_radius = |x: f64, cell: usize| match &profile {
        RestProfile::Cells(r) => r.get(cell).copied().unwrap_or(f64::NAN),
        other => other.radius(x),
    };
    let left = match &boundary.left {
        Some(e) => build_end(
            e,
            "boundary.left",
            &EndContext {
                physics,
                r0: end_radius(x_left, 0),
                base,
            },
        )?,
        None => default_bc.left,
    };
    let right = match &boundary.right {
        Some(e) => build_end(
            e,
            "boundary.right",
            &EndContext {
                physics,
                r0: end_radius(x_right, n_cells.saturating_sub(1)),
                base,
            },
        )?,
        None => default_bc.right,
    };
    let scheme = build_scheme(
        &cfg.scheme.clone().unwrap_or_default(),
        p.map_or_else(Scheme::default, |s| s.scheme),
    )?;
    let reference = match &cfg.reference {
        Some(r) => build_reference(r)?,
        None => p.map_or(Reference::None, |s| s.reference.clone()),
    };
    let sc = Scenario {
        name: cfg
            .name
            .clone()
            .or(p.map(|s| s.name.clone()))
            .unwrap_or_else(|| "custom".into()),
        n_cells,
        length,
        x_left,
        physics,
        profile,
        initial,
        boundaries: Boundaries { left, right },
        scheme,
        t_end: require(time.t_end.or(p.map(|s| s.t_end)), "time.t_end")?,
        snapshots: time.snapshots.or(p.map(|s| s.snapshots.clone())).unwrap_or_default(),
        reference,
    };
    sc.validate()?;
    Ok(sc)
}

fn signal_fields(sig: &Signal, e: &mut EndSection, prefix: &str) -> Result<()> {
    match sig {
        Signal::Constant(v) => {
            e.signal = Some("constant".into());
            e.value = Some(*v);
        }
        Signal::Sine { offset, amplitude, omega } => {
            e.signal = Some("sine".into());
            e.offset = Some(*offset);
            e.amplitude = Some(*amplitude);
            e.omega = Some(*omega);
        }
        Signal::Table(ts) => {
            e.signal = Some("table".into());
            e.file = Some(
                ts.source
                    .clone()
                    .ok_or_else(|| Error::config(format!("{prefix}.file"), "in-memory table has no file"))?,
            );
        }
        Signal::DampedWave { x, omega, amplitude, k_r, k_i } => {
            e.signal = Some("damped_wave".into());
            e.x = Some(*x);
            e.omega = Some(*omega);
            e.amplitude = Some(*amplitude);
            e.k_r = Some(*k_r);
            e.k_i = Some(*k_i);
        }
    }
    Ok(())
}

fn end_section(kind: &BoundaryKind, prefix: &str) -> Result<EndSection> {
    let mut e = EndSection {
        kind: kind.name().into(),
        ..EndSection::default()
    };
    match kind {
        BoundaryKind::GivenArea(s) | BoundaryKind::GivenDischarge(s) | BoundaryKind::GivenDischargeFlux(s) => {
            signal_fields(s, &mut e, prefix)?
        }
        BoundaryKind::SupercriticalInflow { area, discharge } => match (area, discharge) {
            (Signal::Constant(a), Signal::Constant(q)) => {
                e.area = Some(*a);
                e.discharge = Some(*q);
            }
            _ => {
                return Err(Error::config(
                    format!("{prefix}.area"),
                    "only constant supercritical inflow data can be written",
                ))
            }
        },
        BoundaryKind::SupercriticalOutflow | BoundaryKind::NonReflecting | BoundaryKind::Periodic => {}
    }
    Ok(e)
}

/// Self-contained config describing `sc`; parsing it gives `sc` back.
pub fn scenario_to_config(sc: &Scenario, output_dir: Option<&Path>) -> Result<ConfigFile> {
    let profile = match &sc.profile {
        RestProfile::Uniform { radius } => ProfileSection {
            kind: "uniform".into(),
            radius: Some(*radius),
            ..Default::default()
        },
        RestProfile::Aneurism { radius, delta_r, x } => ProfileSection {
            kind: "aneurism".into(),
            radius: Some(*radius),
            delta_r: Some(*delta_r),
            x: Some(x.to_vec()),
            ..Default::default()
        },
        RestProfile::Taper { r_upstream, r_downstream, x1, x2 } => ProfileSection {
            kind: "taper".into(),
            r_upstream: Some(*r_upstream),
            r_downstream: Some(*r_downstream),
            x1: Some(*x1),
            x2: Some(*x2),
            ..Default::default()
        },
        RestProfile::Cells(r) => ProfileSection {
            kind: "cells".into(),
            radii: Some(r.clone()),
            ..Default::default()
        },
    };
    let initial = match sc.initial {
        InitialCondition::Rest => InitialSection {
            kind: "rest".into(),
            ..Default::default()
        },
        InitialCondition::Riemann { r_left, r_right, x0 } => InitialSection {
            kind: "riemann".into(),
            r_left: Some(r_left),
            r_right: Some(r_right),
            x0: Some(x0),
            ..Default::default()
        },
        InitialCondition::SinePulse { eps, start, end } => InitialSection {
            kind: "sine_pulse".into(),
            eps: Some(eps),
            start: Some(start),
            end: Some(end),
            ..Default::default()
        },
    };
    let (order, slope, theta_eno, theta_enom) = match sc.scheme.order {
        SchemeOrder::First => (1, None, None, None),
        SchemeOrder::Second(SlopeKind::Muscl) => (2, Some("muscl"), None, None),
        SchemeOrder::Second(SlopeKind::Eno { theta }) => (2, Some("eno"), Some(theta), None),
        SchemeOrder::Second(SlopeKind::EnoMod { theta_eno, theta_enom }) => {
            (2, Some("enom"), Some(theta_eno), Some(theta_enom))
        }
    };
    let reference = match sc.reference {
        Reference::DampedWave { omega, q_amp } => ReferenceSection {
            kind: "damped_wave".into(),
            omega: Some(omega),
            q_amp: Some(q_amp),
        },
        ref r => ReferenceSection {
            kind: r.name().into(),
            ..Default::default()
        },
    };
    Ok(ConfigFile {
        preset: None,
        name: Some(sc.name.clone()),
        grid: Some(GridSection {
            cells: Some(sc.n_cells),
            length: Some(sc.length),
            x_left: Some(sc.x_left),
        }),
        model: Some(ModelSection {
            k: Some(sc.physics.k),
            rho: Some(sc.physics.rho),
            p0: Some(sc.physics.p0),
            cf: Some(sc.physics.cf),
            profile: Some(profile),
        }),
        initial: Some(initial),
        boundary: Some(BoundarySection {
            left: Some(end_section(&sc.boundaries.left, "boundary.left")?),
            right: Some(end_section(&sc.boundaries.right, "boundary.right")?),
        }),
        scheme: Some(SchemeSection {
            flux: Some(sc.scheme.flux),
            order: Some(order),
            slope: slope.map(String::from),
            theta_eno,
            theta_enom,
            source: Some(sc.scheme.source),
            friction: Some(sc.scheme.friction),
            cfl: sc.scheme.cfl,
        }),
        time: Some(TimeSection {
            t_end: Some(sc.t_end),
            snapshots: Some(sc.snapshots.clone()),
        }),
        reference: Some(reference),
        output: output_dir.map(|d| OutputSection {
            dir: Some(d.to_path_buf()),
        }),
    })
}

pub fn config_to_toml(cfg: &ConfigFile) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::config("config", e.to_string()))
}

/// One row of a snapshot file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow {
    pub x: f64,
    pub a: f64,
    pub q: f64,
    pub u: f64,
    pub r: f64,
    pub p: f64,
}

fn push_row(out: &mut String, values: &[f64]) {
    for (j, v) in values.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        // 17 significant digits
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

pub fn snapshot_csv(grid: &Grid, m: &VesselModel, snap: &Snapshot) -> Result<String> {
    let mut out = String::with_capacity(snap.states.len() * 150);
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for (i, s) in snap.states.iter().enumerate() {
        push_row(&mut out, &[grid.center(i), s.a, s.q, s.velocity()?, s.radius(), m.pressure(*s, i)]);
    }
    Ok(out)
}

pub fn snapshot_file_name(index: usize, t: f64) -> String {
    format!("snapshot_{index:03}_t{t:.6e}.csv")
}

/// Writes one CSV per snapshot into `dir`, creating it if needed.
pub fn write_snapshot_csv(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.snapshots.is_empty() {
        return Err(Error::io(dir, "run produced no snapshots"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    result
        .snapshots
        .iter()
        .enumerate()
        .map(|(k, snap)| {
            let path = dir.join(snapshot_file_name(k, snap.t));
            let text = snapshot_csv(&result.grid, &result.model, snap)?;
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

pub fn parse_snapshot_csv(text: &str) -> std::result::Result<Vec<SnapshotRow>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_HEADER) {
        return Err(format!("expected header `{SNAPSHOT_HEADER}`"));
    }
    lines
        .enumerate()
        .map(|(n, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| format!("line {}: {e}", n + 2))?;
            match v[..] {
                [x, a, q, u, r, p] => Ok(SnapshotRow { x, a, q, u, r, p }),
                _ => Err(format!("line {}: expected 6 columns, got {}", n + 2, v.len())),
            }
        })
        .collect()
}

pub fn read_snapshot_csv(path: &Path) -> Result<Vec<SnapshotRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot_csv(&text).map_err(|e| Error::io(path, e))
}

/// `J,L1_error` rows followed by the fitted line `ln E = slope ln J + c`.
pub fn error_report(study: &Study) -> Result<String> {
    if study.rows.is_empty() {
        return Err(Error::InvalidScenario("error report of an empty study".into()));
    }
    let mut out = String::from("J,L1_error\n");
    for (j, e) in &study.rows {
        let _ = writeln!(out, "{j},{e:.16e}");
    }
    let _ = writeln!(out, "Regression,y={:.3}x{:+.2}", study.slope, study.intercept);
    let _ = writeln!(out, "Comparison,{}", study.comparison.label());
    Ok(out)
}

pub fn write_error_report(study: &Study, path: &Path) -> Result<()> {
    let text = error_report(study)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Oracle values over the lattice `ts x xs`, one row per point.
pub fn oracle_csv(oracle: &Oracle, m: &VesselModel, xs: &[f64], ts: &[f64]) -> Result<String> {
    let mut out = String::from("t,x,A,Q,u,R\n");
    for &t in ts {
        for &x in xs {
            let s = oracle.eval(x, t, m);
            push_row(&mut out, &[t, x, s.a, s.q, s.velocity()?, s.radius()]);
        }
    }
    Ok(out)
}

pub fn write_oracle_csv(oracle: &Oracle, m: &VesselModel, xs: &[f64], ts: &[f64], path: &Path) -> Result<()> {
    let text = oracle_csv(oracle, m, xs, ts)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::run;
    use crate::model::State;
    use crate::oracles::ComparisonKind;
    use crate::Field;

    #[test]
    fn preset_by_name() {
        let sc = parse_config("preset = \"tourniquet\"").unwrap();
        assert_eq!(sc, presets::tourniquet());
        assert_eq!(sc.n_cells, 100);
        assert_eq!(sc.scheme.cfl_number(), 1.0);
    }

    #[test]
    fn override_cells_on_preset() {
        let sc = parse_config("preset = \"wave\"\n[grid]\ncells = 400\n").unwrap();
        assert_eq!(sc, presets::wave().with_cells(400));
    }

    #[test]
    fn missing_k_names_the_key() {
        let text = r#"
[grid]
cells = 10
length = 1.0
[model.profile]
kind = "uniform"
radius = 4e-3
[time]
t_end = 1.0
"#;
        match parse_config(text) {
            Err(Error::ConfigValue { key, .. }) => assert_eq!(key, "model.k"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = "preset = \"wave\"\n[grid]\ncells = 10\nbogus = 3\n";
        match parse_config(text) {
            Err(Error::ConfigParse { line, message }) => {
                assert_eq!(line, 4, "{message}");
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("[grid\n"), Err(Error::ConfigParse { line: 1, .. })));
    }

    #[test]
    fn defaults_for_inline_scenario() {
        let text = r#"
[grid]
cells = 20
length = 0.1
[model]
k = 1e8
[model.profile]
kind = "uniform"
radius = 4e-3
[time]
t_end = 1e-3
"#;
        let sc = parse_config(text).unwrap();
        assert_eq!(sc.scheme, Scheme::default());
        assert_eq!(sc.physics.rho, RHO);
        assert_eq!(sc.initial, InitialCondition::Rest);
        assert_eq!(sc.boundaries, Boundaries::non_reflecting());
    }

    #[test]
    fn scheme_flags() {
        let sc = parse_config("preset = \"tourniquet\"\n[scheme]\nslope = \"eno\"\ntheta_eno = 0.3\n").unwrap();
        assert_eq!(sc.scheme.order, SchemeOrder::Second(SlopeKind::Eno { theta: 0.3 }));
        assert!(parse_config("preset = \"wave\"\n[scheme]\norder = 1\nslope = \"eno\"\n").is_err());
        assert!(parse_config("preset = \"wave\"\n[scheme]\norder = 3\n").is_err());
        let sc = parse_config("preset = \"expansion-to\"\n[scheme]\nfriction = \"at\"\nflux = \"kinetic\"\n").unwrap();
        assert_eq!(sc.scheme.friction, FrictionTreatment::ApparentTopography);
        assert_eq!(sc.scheme.flux, FluxKind::Kinetic);
        assert_eq!(sc.scheme.order, SchemeOrder::Second(SlopeKind::Muscl));
    }

    #[test]
    fn damped_wave_wavenumbers_are_computed() {
        let text = r#"
preset = "damping-alpha5"
[boundary.right]
kind = "discharge"
signal = "damped_wave"
x = 3.0
omega = 12.566370614359172
amplitude = 3.45e-7
"#;
        let sc = parse_config(text).unwrap();
        let want = presets::damping("damping-alpha5", 0.000202);
        assert_eq!(sc.boundaries, want.boundaries);
    }

    #[test]
    fn table_signal_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("inflow.csv"), "t,Q\n0,0\n1,1e-6\n").unwrap();
        let text = "preset = \"wave\"\n[boundary.left]\nkind = \"discharge\"\nsignal = \"table\"\nfile = \"inflow.csv\"\n[output]\ndir = \"out\"\n";
        let cfg = parse_config_in(text, Some(dir.path())).unwrap();
        let BoundaryKind::GivenDischarge(Signal::Table(ts)) = &cfg.scenario.boundaries.left else {
            panic!("{:?}", cfg.scenario.boundaries.left)
        };
        assert_eq!(ts.eval(0.5), 5e-7);
        assert_eq!(cfg.output_dir, Some(dir.path().join("out")));
        let back = config_to_toml(&scenario_to_config(&cfg.scenario, None).unwrap()).unwrap();
        assert_eq!(parse_config_in(&back, None).unwrap().scenario, cfg.scenario);
    }

    #[test]
    fn every_preset_round_trips() {
        for name in presets::NAMES {
            let sc = presets::preset(name).unwrap();
            let text = config_to_toml(&scenario_to_config(&sc, Some(Path::new("out"))).unwrap()).unwrap();
            let cfg = parse_config_in(&text, None).unwrap();
            assert_eq!(cfg.scenario, sc, "{name}\n{text}");
            assert_eq!(cfg.output_dir, Some(PathBuf::from("out")));
        }
    }

    #[test]
    fn cells_profile_and_enom_round_trip() {
        let mut sc = presets::tourniquet().with_cells(4);
        sc.profile = RestProfile::Cells(vec![4e-3, 4.1e-3, 0.1 + 0.2, 4e-3]);
        sc.scheme.order = SchemeOrder::Second(SlopeKind::EnoMod {
            theta_eno: 0.1,
            theta_enom: 0.7,
        });
        sc.scheme.cfl = None;
        sc.boundaries = Boundaries {
            left: BoundaryKind::SupercriticalInflow {
                area: Signal::Constant(5e-5),
                discharge: Signal::Constant(1e-4),
            },
            right: BoundaryKind::SupercriticalOutflow,
        };
        let text = config_to_toml(&scenario_to_config(&sc, None).unwrap()).unwrap();
        assert_eq!(parse_config(&text).unwrap(), sc);
    }

    fn rest_result() -> RunResult {
        let mut sc = presets::dead_man();
        sc.t_end = 0.0;
        run(&sc).unwrap()
    }

    #[test]
    fn single_cell_rest_row() {
        let grid = Grid::new(1, 1.0, 0.0).unwrap();
        let m = VesselModel::uniform(1e8, RHO, 1333.0, 0.0, 4e-3, 1).unwrap();
        let snap = Snapshot {
            t: 0.0,
            states: vec![State::at_rest(m.rest_area(0))],
        };
        let rows = parse_snapshot_csv(&snapshot_csv(&grid, &m, &snap).unwrap()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].q, rows[0].u, rows[0].p), (0.0, 0.0, 1333.0));
        assert_eq!(rows[0].x, 0.5);
    }

    #[test]
    fn snapshot_files_round_trip_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let mut sc = presets::wave().with_cells(40);
        sc.t_end = 1e-3;
        sc.snapshots = vec![0.0, 5e-4];
        let result = run(&sc).unwrap();
        let paths = write_snapshot_csv(&result, dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        for (path, snap) in paths.iter().zip(&result.snapshots) {
            let text = fs::read_to_string(path).unwrap();
            assert!(!text.contains('\r'));
            let rows = read_snapshot_csv(path).unwrap();
            assert_eq!(rows.len(), 40);
            for (i, (row, s)) in rows.iter().zip(&snap.states).enumerate() {
                assert_eq!(row.a.to_bits(), s.a.to_bits());
                assert_eq!(row.q.to_bits(), s.q.to_bits());
                assert_eq!(row.x.to_bits(), result.grid.center(i).to_bits());
            }
        }
    }

    #[test]
    fn dead_man_rows_are_at_rest() {
        let result = rest_result();
        let text = snapshot_csv(&result.grid, &result.model, result.last()).unwrap();
        for row in parse_snapshot_csv(&text).unwrap() {
            assert!(row.u.abs() <= 1e-12);
        }
    }

    #[test]
    fn error_report_layout() {
        let rows: Vec<(usize, f64)> = [50, 100, 200, 400, 800].iter().map(|&j| (j, 1.0 / j as f64)).collect();
        let study = Study::from_rows(Field::Discharge, ComparisonKind::Convergence, rows).unwrap();
        let text = error_report(&study).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "J,L1_error");
        assert_eq!(lines.len(), 8);
        assert!(lines[1].starts_with("50,2.0000000000000000e-2"), "{}", lines[1]);
        assert!(lines[6].starts_with("Regression,y=-1.000x"), "{}", lines[6]);
        let mut empty = study.clone();
        empty.rows.clear();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        assert!(write_error_report(&empty, &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn oracle_lattice() {
        let sc = presets::tourniquet();
        let oracle = sc.oracle().unwrap().unwrap();
        let m = sc.model().unwrap();
        let text = oracle_csv(&oracle, &m, &[0.0, 0.04, 0.08], &[0.0, 0.005]).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("t,x,A,Q,u,R\n"));
    }
}
