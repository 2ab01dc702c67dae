//! Time stepping: CFL control, the first-order well-balanced update and the
//! second-order scheme (linear reconstruction, centred source, Heun).

use std::borrow::Cow;
use std::fmt;

use crate::boundary::Boundaries;
use crate::error::{Error, Result};
use crate::flux::{numerical_flux, FluxKind};
use crate::model::{Flux, Grid, State, VesselModel};
use crate::reconstruction::{reconstruct_cells, SlopeKind, Trace};
use crate::well_balanced::{
    apparent_topography, hydrostatic_reconstruct, naive_source, semi_implicit_friction, FrictionTreatment,
    SourceTreatment,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeOrder {
    First,
    Second(SlopeKind),
}

impl SchemeOrder {
    pub fn default_cfl(&self) -> f64 {
        match self {
            SchemeOrder::First => 1.0,
            SchemeOrder::Second(_) => 0.5,
        }
    }

    pub fn as_number(&self) -> u8 {
        match self {
            SchemeOrder::First => 1,
            SchemeOrder::Second(_) => 2,
        }
    }
}

impl fmt::Display for SchemeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeOrder::First => f.write_str("first order"),
            SchemeOrder::Second(s) => write!(f, "second order ({s})"),
        }
    }
}

/// Numerical choices of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    pub flux: FluxKind,
    pub order: SchemeOrder,
    pub source: SourceTreatment,
    pub friction: FrictionTreatment,
    /// Overrides the CFL number of the order when set.
    pub cfl: Option<f64>,
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme {
            flux: FluxKind::Hll,
            order: SchemeOrder::Second(SlopeKind::Muscl),
            source: SourceTreatment::Hydrostatic,
            friction: FrictionTreatment::SemiImplicit,
            cfl: None,
        }
    }
}

impl Scheme {
    pub fn first_order(flux: FluxKind) -> Self {
        Scheme {
            flux,
            order: SchemeOrder::First,
            ..Scheme::default()
        }
    }

    pub fn cfl_number(&self) -> f64 {
        self.cfl.unwrap_or_else(|| self.order.default_cfl())
    }

    pub fn validate(&self, bc: &Boundaries) -> Result<()> {
        if self.source == SourceTreatment::Naive && self.friction == FrictionTreatment::ApparentTopography {
            return Err(Error::InvalidScenario(
                "apparent topography friction needs the hydrostatic source treatment".into(),
            ));
        }
        if bc.uses_flux_discharge() && self.flux != FluxKind::Hll {
            return Err(Error::InvalidScenario(
                "flux-based discharge boundaries are only available with the HLL flux".into(),
            ));
        }
        if let Some(c) = self.cfl {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::config("scheme.cfl", format!("{c} is outside (0, 1]")));
            }
        }
        if let SchemeOrder::Second(s) = self.order {
            s.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub max_wavespeed: f64,
    pub cfl: f64,
}

/// `max_i (|u_i| + c_i)`, with `sqrt(3 T_i)` in place of `c_i` for the kinetic
/// flux.
pub fn max_wavespeed(states: &[State], m: &VesselModel, flux: FluxKind) -> Result<f64> {
    let mut w: f64 = 0.0;
    for s in states {
        let u = s.velocity()?;
        let c = match flux {
            FluxKind::Kinetic => (3.0 * m.kinetic_temperature(s.a)).sqrt(),
            _ => m.celerity(s.a),
        };
        w = w.max(u.abs() + c);
    }
    Ok(w)
}

/// Largest stable step `cfl dx / max (|u| + c)`.
pub fn cfl_timestep(states: &[State], m: &VesselModel, dx: f64, cfl: f64, flux: FluxKind) -> Result<StepReport> {
    let w = max_wavespeed(states, m, flux)?;
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::DegenerateTimestep(w));
    }
    Ok(StepReport {
        dt: cfl * dx / w,
        max_wavespeed: w,
        cfl,
    })
}

/// Result of one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Advance {
    pub states: Vec<State>,
    /// A characteristic boundary produced a state that is not subcritical.
    pub supercritical_boundary: bool,
}

/// Rest sections in use for this stage: the vessel's, or the apparent one
/// when friction is folded into the reconstruction.
fn effective_sqrt_a0<'a>(states: &[State], m: &'a VesselModel, grid: &Grid, scheme: &Scheme) -> Result<Cow<'a, [f64]>> {
    if scheme.friction == FrictionTreatment::ApparentTopography {
        Ok(Cow::Owned(apparent_topography(states, m, grid.dx)?))
    } else {
        Ok(Cow::Borrowed(m.sqrt_a0()))
    }
}

fn ghost_sqrt_a0(s: &[f64], bc: &Boundaries) -> (f64, f64) {
    let n = s.len();
    if bc.is_periodic() {
        (s[n - 1], s[0])
    } else {
        (s[0], s[n - 1])
    }
}

/// Spatial operator `Phi(U)` returned as per-cell `(dA/dt, dQ/dt)`.
pub fn spatial_operator(
    states: &[State],
    m: &VesselModel,
    grid: &Grid,
    scheme: &Scheme,
    bc: &Boundaries,
    t: f64,
) -> Result<(Vec<Flux>, bool)> {
    let n = states.len();
    if n != grid.n_cells || n != m.n_cells() {
        return Err(Error::InvalidScenario(format!(
            "{n} states for a grid of {} cells and a model of {} cells",
            grid.n_cells,
            m.n_cells()
        )));
    }
    if scheme.source == SourceTreatment::Naive && scheme.friction == FrictionTreatment::ApparentTopography {
        return Err(Error::InvalidScenario(
            "apparent topography friction needs the hydrostatic source treatment".into(),
        ));
    }
    let ghosts = bc.ghosts(states, t, m)?;
    let s_eff = effective_sqrt_a0(states, m, grid, scheme)?;
    let (sgl, sgr) = ghost_sqrt_a0(&s_eff, bc);

    let mut ext_s = Vec::with_capacity(n + 2);
    ext_s.push(sgl);
    ext_s.extend_from_slice(&s_eff);
    ext_s.push(sgr);

    let phi = match scheme.order {
        SchemeOrder::First => {
            let mut ext = Vec::with_capacity(n + 2);
            ext.push(ghosts.left);
            ext.extend_from_slice(states);
            ext.push(ghosts.right);
            first_order_operator(&ext, &ext_s, m, grid, scheme)?
        }
        SchemeOrder::Second(kind) => {
            let traces = reconstruct_cells(states, &s_eff, kind, grid.dx)?;
            let mut left = Vec::with_capacity(n + 2);
            let mut right = Vec::with_capacity(n + 2);
            let gl = Trace::constant(ghosts.left, sgl)?;
            let gr = Trace::constant(ghosts.right, sgr)?;
            left.push(gl);
            right.push(gl);
            left.extend_from_slice(&traces.left);
            right.extend_from_slice(&traces.right);
            left.push(gr);
            right.push(gr);
            let mut ext = Vec::with_capacity(n + 2);
            ext.push(ghosts.left);
            ext.extend_from_slice(states);
            ext.push(ghosts.right);
            second_order_operator(&ext, &left, &right, &ext_s, m, grid, scheme)?
        }
    };
    Ok((phi, ghosts.supercritical))
}

// `ext` holds one ghost on each side; interface j lies between ext[j] and
// ext[j+1].
fn first_order_operator(ext: &[State], ext_s: &[f64], m: &VesselModel, grid: &Grid, scheme: &Scheme) -> Result<Vec<Flux>> {
    let n = ext.len() - 2;
    let mut flux = Vec::with_capacity(n + 1);
    let mut src_l = Vec::with_capacity(n + 1);
    let mut src_r = Vec::with_capacity(n + 1);
    for j in 0..=n {
        match scheme.source {
            SourceTreatment::Hydrostatic => {
                let rec = hydrostatic_reconstruct(ext[j], ext[j + 1], ext_s[j], ext_s[j + 1], m);
                flux.push(numerical_flux(scheme.flux, rec.left, rec.right, m)?);
                src_l.push(rec.source_left);
                src_r.push(rec.source_right);
            }
            SourceTreatment::Naive => {
                flux.push(numerical_flux(scheme.flux, ext[j], ext[j + 1], m)?);
                src_l.push(0.0);
                src_r.push(0.0);
            }
        }
    }
    let inv_dx = 1.0 / grid.dx;
    let mut phi = Vec::with_capacity(n);
    for i in 0..n {
        let (fr, fl) = (flux[i + 1], flux[i]);
        let mass = -(fr.mass - fl.mass) * inv_dx;
        let mut momentum = -((fr.momentum + src_l[i + 1]) - (fl.momentum + src_r[i])) * inv_dx;
        if scheme.source == SourceTreatment::Naive {
            let a0 = |k: usize| ext_s[k] * ext_s[k];
            momentum += naive_source(ext[i + 1], [a0(i), a0(i + 1), a0(i + 2)], m, grid.dx);
        }
        phi.push(Flux::new(mass, momentum));
    }
    Ok(phi)
}

struct InterfaceStates {
    left: State,
    right: State,
    source_left: f64,
    source_right: f64,
}

// Hydrostatic step between the trace on the left of an interface (`minus`)
// and the one on its right (`plus`). The side holding the smaller rest
// section keeps its trace; when both `Psi` agree both sides share it.
fn second_order_interface(minus: Trace, plus: Trace, m: &VesselModel) -> InterfaceStates {
    let (sm, sp) = (minus.sqrt_a0(), plus.sqrt_a0());
    let square = |r: f64| {
        let r = r.max(0.0);
        r * r
    };
    let (a_l, a_r) = if sm == sp {
        (minus.a, plus.a)
    } else if sm < sp {
        let a_r = if plus.psi == minus.psi { minus.a } else { square(plus.psi + sm) };
        (minus.a, a_r)
    } else {
        let a_l = if plus.psi == minus.psi { plus.a } else { square(minus.psi + sp) };
        (a_l, plus.a)
    };
    InterfaceStates {
        left: State::new(a_l, a_l * minus.u),
        right: State::new(a_r, a_r * plus.u),
        source_left: m.pressure_potential(minus.a) - m.pressure_potential(a_l),
        source_right: m.pressure_potential(plus.a) - m.pressure_potential(a_r),
    }
}

fn second_order_operator(
    ext: &[State],
    left: &[Trace],
    right: &[Trace],
    ext_s: &[f64],
    m: &VesselModel,
    grid: &Grid,
    scheme: &Scheme,
) -> Result<Vec<Flux>> {
    let n = ext.len() - 2;
    let mut flux = Vec::with_capacity(n + 1);
    let mut src_l = Vec::with_capacity(n + 1);
    let mut src_r = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let (minus, plus) = (right[j], left[j + 1]);
        match scheme.source {
            SourceTreatment::Hydrostatic => {
                let st = second_order_interface(minus, plus, m);
                flux.push(numerical_flux(scheme.flux, st.left, st.right, m)?);
                src_l.push(st.source_left);
                src_r.push(st.source_right);
            }
            SourceTreatment::Naive => {
                let ul = State::new(minus.a, minus.discharge());
                let ur = State::new(plus.a, plus.discharge());
                flux.push(numerical_flux(scheme.flux, ul, ur, m)?);
                src_l.push(0.0);
                src_r.push(0.0);
            }
        }
    }
    let inv_dx = 1.0 / grid.dx;
    let b = m.b();
    let mut phi = Vec::with_capacity(n);
    for i in 0..n {
        let c = i + 1;
        let (fr, fl) = (flux[i + 1], flux[i]);
        let mass = -(fr.mass - fl.mass) * inv_dx;
        let momentum = match scheme.source {
            SourceTreatment::Hydrostatic => {
                // source integrated over the reconstructed profile of the cell
                let (tm, tp) = (right[c], left[c]);
                let centred = (m.pressure_potential(tm.a) - m.pressure_potential(tp.a)) - b * ext[c].a * (tm.psi - tp.psi);
                -((fr.momentum + src_l[i + 1]) - (fl.momentum + src_r[i]) - centred) * inv_dx
            }
            SourceTreatment::Naive => {
                let a0 = |k: usize| ext_s[k] * ext_s[k];
                -(fr.momentum - fl.momentum) * inv_dx + naive_source(ext[c], [a0(i), a0(c), a0(c + 1)], m, grid.dx)
            }
        };
        phi.push(Flux::new(mass, momentum));
    }
    Ok(phi)
}

fn euler_stage(
    states: &[State],
    m: &VesselModel,
    grid: &Grid,
    scheme: &Scheme,
    bc: &Boundaries,
    t: f64,
    dt: f64,
) -> Result<(Vec<State>, bool)> {
    let (phi, supercritical) = spatial_operator(states, m, grid, scheme, bc, t)?;
    let mut out = Vec::with_capacity(states.len());
    for (i, (s, d)) in states.iter().zip(&phi).enumerate() {
        let next = State::new(s.a + dt * d.mass, s.q + dt * d.momentum);
        check_positive(next, i, t + dt)?;
        let next = match scheme.friction {
            FrictionTreatment::SemiImplicit => semi_implicit_friction(next, m, dt)?,
            _ => next,
        };
        out.push(next);
    }
    Ok((out, supercritical))
}

fn check_positive(s: State, cell: usize, time: f64) -> Result<()> {
    if s.a > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Positivity {
            cell,
            time,
            area: s.a,
            discharge: s.q,
        })
    }
}

/// One explicit Euler step of the first-order scheme.
pub fn step_first_order(
    states: &[State],
    m: &VesselModel,
    grid: &Grid,
    scheme: &Scheme,
    bc: &Boundaries,
    t: f64,
    dt: f64,
) -> Result<Advance> {
    let (states, supercritical_boundary) = euler_stage(states, m, grid, scheme, bc, t, dt)?;
    Ok(Advance {
        states,
        supercritical_boundary,
    })
}

/// One Heun step `U1 = U + dt Phi(U)`, `U2 = U1 + dt Phi(U1)`,
/// `U^{n+1} = (U + U2) / 2`; semi-implicit friction follows each stage.
pub fn step_second_order(
    states: &[State],
    m: &VesselModel,
    grid: &Grid,
    scheme: &Scheme,
    bc: &Boundaries,
    t: f64,
    dt: f64,
) -> Result<Advance> {
    let (u1, s1) = euler_stage(states, m, grid, scheme, bc, t, dt)?;
    let (u2, s2) = euler_stage(&u1, m, grid, scheme, bc, t + dt, dt)?;
    let mut out = Vec::with_capacity(states.len());
    for (i, (a, b)) in states.iter().zip(&u2).enumerate() {
        let next = State::new(0.5 * (a.a + b.a), 0.5 * (a.q + b.q));
        check_positive(next, i, t + dt)?;
        out.push(next);
    }
    Ok(Advance {
        states: out,
        supercritical_boundary: s1 || s2,
    })
}

pub fn step(
    states: &[State],
    m: &VesselModel,
    grid: &Grid,
    scheme: &Scheme,
    bc: &Boundaries,
    t: f64,
    dt: f64,
) -> Result<Advance> {
    match scheme.order {
        SchemeOrder::First => step_first_order(states, m, grid, scheme, bc, t, dt),
        SchemeOrder::Second(_) => step_second_order(states, m, grid, scheme, bc, t, dt),
    }
}
