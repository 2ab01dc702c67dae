//! Two-point numerical fluxes `F(U_L, U_R)` for the homogeneous system.
//!
//! The rest section never enters here; source terms are handled by
//! [`crate::well_balanced`] through the states the fluxes are evaluated on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Flux, State, VesselModel};

pub type InterfaceFlux = Flux;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxKind {
    Rusanov,
    Hll,
    #[serde(rename = "vfroe")]
    VfRoeNcv,
    Kinetic,
}

impl FluxKind {
    pub const ALL: [FluxKind; 4] = [FluxKind::Rusanov, FluxKind::Hll, FluxKind::VfRoeNcv, FluxKind::Kinetic];

    pub fn name(self) -> &'static str {
        match self {
            FluxKind::Rusanov => "rusanov",
            FluxKind::Hll => "hll",
            FluxKind::VfRoeNcv => "vfroe",
            FluxKind::Kinetic => "kinetic",
        }
    }
}

impl fmt::Display for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FluxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rusanov" => Ok(FluxKind::Rusanov),
            "hll" => Ok(FluxKind::Hll),
            "vfroe" | "vfroe-ncv" | "vfroencv" => Ok(FluxKind::VfRoeNcv),
            "kinetic" => Ok(FluxKind::Kinetic),
            other => Err(Error::config("flux", format!("unknown flux `{other}`"))),
        }
    }
}

/// Evaluates the selected flux. Identical states return the physical flux
/// bit for bit, which the well-balanced update relies on at rest.
pub fn numerical_flux(kind: FluxKind, ul: State, ur: State, m: &VesselModel) -> Result<Flux> {
    if ul == ur {
        return m.physical_flux(ul);
    }
    match kind {
        FluxKind::Rusanov => rusanov_flux(ul, ur, m),
        FluxKind::Hll => hll_flux(ul, ur, m),
        FluxKind::VfRoeNcv => vfroe_ncv_flux(ul, ur, m),
        FluxKind::Kinetic => kinetic_flux(ul, ur, m),
    }
}

fn check_areas(ul: State, ur: State) -> Result<()> {
    for s in [ul, ur] {
        if !(s.a > 0.0) {
            return Err(Error::ZeroArea { area: s.a });
        }
    }
    Ok(())
}

pub fn rusanov_flux(ul: State, ur: State, m: &VesselModel) -> Result<Flux> {
    check_areas(ul, ur)?;
    let fl = m.physical_flux(ul)?;
    let fr = m.physical_flux(ur)?;
    let speed = |s: State| (s.q / s.a).abs() + m.celerity(s.a);
    let c = speed(ul).max(speed(ur));
    Ok(Flux::new(
        0.5 * (fl.mass + fr.mass) - 0.5 * c * (ur.a - ul.a),
        0.5 * (fl.momentum + fr.momentum) - 0.5 * c * (ur.q - ul.q),
    ))
}

pub fn hll_flux(ul: State, ur: State, m: &VesselModel) -> Result<Flux> {
    check_areas(ul, ur)?;
    let (l1, l2) = m.eigenvalues(ul)?;
    let (r1, r2) = m.eigenvalues(ur)?;
    let c1 = l1.min(r1);
    let c2 = l2.max(r2);
    let fl = m.physical_flux(ul)?;
    if 0.0 <= c1 {
        return Ok(fl);
    }
    let fr = m.physical_flux(ur)?;
    if c2 <= 0.0 {
        return Ok(fr);
    }
    let inv = 1.0 / (c2 - c1);
    Ok(Flux::new(
        (c2 * fl.mass - c1 * fr.mass + c1 * c2 * (ur.a - ul.a)) * inv,
        (c2 * fl.momentum - c1 * fr.momentum + c1 * c2 * (ur.q - ul.q)) * inv,
    ))
}

/// Intermediate state of the VFRoe-ncv solver, obtained from the Riemann
/// invariants `u + 4c` (from the left) and `u - 4c` (from the right).
/// Returns `None` when the linearised intermediate celerity is not positive.
pub fn vfroe_star_state(ul: State, ur: State, m: &VesselModel) -> Result<Option<State>> {
    let (ul_u, ur_u) = (ul.velocity()?, ur.velocity()?);
    let (cl, cr) = (m.celerity(ul.a), m.celerity(ur.a));
    let c_mean = 0.5 * (cl + cr);
    let u_mean = 0.5 * (ul_u + ur_u);
    let u_star = u_mean - 2.0 * (cr - cl);
    let c_star = c_mean - 0.125 * (ur_u - ul_u);
    if c_star <= 0.0 {
        return Ok(None);
    }
    let a_star = m.area_from_celerity(c_star);
    Ok(Some(State::new(a_star, a_star * u_star)))
}

pub fn vfroe_ncv_flux(ul: State, ur: State, m: &VesselModel) -> Result<Flux> {
    check_areas(ul, ur)?;
    let (l1, l2) = m.eigenvalues(ul)?;
    let (r1, r2) = m.eigenvalues(ur)?;
    // sonic points: fall back to Rusanov to avoid non-entropic shocks
    if (l1 < 0.0 && 0.0 < r1) || (l2 < 0.0 && 0.0 < r2) {
        return rusanov_flux(ul, ur, m);
    }
    let c_mean = 0.5 * (m.celerity(ul.a) + m.celerity(ur.a));
    let u_mean = 0.5 * (ul.q / ul.a + ur.q / ur.a);
    let (w1, w2) = (u_mean - c_mean, u_mean + c_mean);
    if w1 >= 0.0 {
        m.physical_flux(ul)
    } else if w2 <= 0.0 {
        m.physical_flux(ur)
    } else {
        match vfroe_star_state(ul, ur, m)? {
            Some(star) => m.physical_flux(star),
            None => rusanov_flux(ul, ur, m),
        }
    }
}

/// Half-moments of the kinetic Maxwellian `A / (2 sqrt(3T))` on
/// `[u - sqrt(3T), u + sqrt(3T)]` restricted to the velocity interval
/// `[lo, hi]`: returns `(int xi chi, int xi^2 chi)`.
fn kinetic_half_flux(s: State, lo: f64, hi: f64, m: &VesselModel) -> Flux {
    let spread = (3.0 * m.kinetic_temperature(s.a)).sqrt();
    let height = s.a / (2.0 * spread);
    Flux::new(
        height * (hi * hi - lo * lo) / 2.0,
        height * (hi * hi * hi - lo * lo * lo) / 3.0,
    )
}

pub fn kinetic_flux(ul: State, ur: State, m: &VesselModel) -> Result<Flux> {
    check_areas(ul, ur)?;
    let spread_l = (3.0 * m.kinetic_temperature(ul.a)).sqrt();
    let spread_r = (3.0 * m.kinetic_temperature(ur.a)).sqrt();
    let (u_l, u_r) = (ul.q / ul.a, ur.q / ur.a);
    let big_plus = (u_l + spread_l).max(0.0);
    let big_minus = (u_l - spread_l).max(0.0);
    let small_plus = (u_r + spread_r).min(0.0);
    let small_minus = (u_r - spread_r).min(0.0);
    let fp = kinetic_half_flux(ul, big_minus, big_plus, m);
    let fm = kinetic_half_flux(ur, small_minus, small_plus, m);
    Ok(Flux::new(fp.mass + fm.mass, fp.momentum + fm.momentum))
}
