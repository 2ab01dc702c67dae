//! Ghost states from the method of characteristics. A subcritical end gets one
//! datum from outside and the Riemann invariant `u -/+ 4c` carried out of the
//! domain; source terms are ignored in the characteristic relations.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flux::hll_flux;
use crate::model::{State, VesselModel};

const MAX_ITERATIONS: usize = 100;
const REL_TOL: f64 = 1e-12;
const BRACKET: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    // +1 on the left, -1 on the right: the outgoing invariant is u - 4c on
    // the left end and u + 4c on the right end.
    fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Two-column `time, value` series, linearly interpolated and held constant
/// outside its range.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub source: Option<PathBuf>,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidScenario("time series needs matching, non-empty columns".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidScenario("time series times must increase strictly".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidScenario("time series contains non-finite values".into()));
        }
        Ok(TimeSeries { source: None, times, values })
    }

    /// Reads `time value` rows separated by commas or whitespace. Blank lines,
    /// `#` comments and a non-numeric header line are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()).collect();
            let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse().ok()).collect();
            match parsed {
                Some(v) if v.len() == 2 => {
                    times.push(v[0]);
                    values.push(v[1]);
                }
                None if times.is_empty() => continue,
                _ => return Err(Error::io(path, format!("line {}: expected two numeric columns", n + 1))),
            }
        }
        let mut ts = TimeSeries::new(times, values).map_err(|e| Error::io(path, e))?;
        ts.source = Some(path.to_path_buf());
        Ok(ts)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let j = self.times.partition_point(|&x| x <= t);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        self.values[j - 1] + w * (self.values[j] - self.values[j - 1])
    }
}

/// Time-dependent boundary datum.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Constant(f64),
    /// `offset + amplitude sin(omega t)`
    Sine { offset: f64, amplitude: f64, omega: f64 },
    Table(Arc<TimeSeries>),
    /// Damped travelling discharge wave sampled at a fixed position.
    DampedWave { x: f64, omega: f64, amplitude: f64, k_r: f64, k_i: f64 },
}

impl Signal {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Constant(v) => *v,
            Signal::Sine { offset, amplitude, omega } => offset + amplitude * (omega * t).sin(),
            Signal::Table(ts) => ts.eval(t),
            Signal::DampedWave { x, omega, amplitude, k_r, k_i } => {
                crate::oracles::damped_discharge(*x, t, *omega, *amplitude, *k_r, *k_i)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryKind {
    GivenArea(Signal),
    GivenDischarge(Signal),
    /// Discharge imposed through the mass component of the HLL flux.
    GivenDischargeFlux(Signal),
    SupercriticalInflow { area: Signal, discharge: Signal },
    SupercriticalOutflow,
    /// Zero-gradient copy of the adjacent cell.
    NonReflecting,
    Periodic,
}

impl BoundaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryKind::GivenArea(_) => "area",
            BoundaryKind::GivenDischarge(_) => "discharge",
            BoundaryKind::GivenDischargeFlux(_) => "discharge_flux",
            BoundaryKind::SupercriticalInflow { .. } => "supercritical_inflow",
            BoundaryKind::SupercriticalOutflow => "supercritical_outflow",
            BoundaryKind::NonReflecting => "non_reflecting",
            BoundaryKind::Periodic => "periodic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundaries {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

/// Ghost states on both ends. `supercritical` is set when a characteristic
/// ghost turned out not to be subcritical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostCells {
    pub left: State,
    pub right: State,
    pub supercritical: bool,
}

impl Boundaries {
    pub fn new(left: BoundaryKind, right: BoundaryKind) -> Result<Self> {
        let b = Boundaries { left, right };
        b.validate()?;
        Ok(b)
    }

    pub fn non_reflecting() -> Self {
        Boundaries {
            left: BoundaryKind::NonReflecting,
            right: BoundaryKind::NonReflecting,
        }
    }

    pub fn periodic() -> Self {
        Boundaries {
            left: BoundaryKind::Periodic,
            right: BoundaryKind::Periodic,
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.left == BoundaryKind::Periodic
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.left == BoundaryKind::Periodic;
        let r = self.right == BoundaryKind::Periodic;
        if l != r {
            return Err(Error::InvalidScenario("periodic boundaries must be set on both ends".into()));
        }
        Ok(())
    }

    pub fn uses_flux_discharge(&self) -> bool {
        matches!(self.left, BoundaryKind::GivenDischargeFlux(_)) || matches!(self.right, BoundaryKind::GivenDischargeFlux(_))
    }

    pub fn ghosts(&self, states: &[State], t: f64, m: &VesselModel) -> Result<GhostCells> {
        let n = states.len();
        if self.is_periodic() {
            return Ok(GhostCells {
                left: states[n - 1],
                right: states[0],
                supercritical: false,
            });
        }
        let (left, l_super) = ghost(Side::Left, &self.left, states[0], t, m)?;
        let (right, r_super) = ghost(Side::Right, &self.right, states[n - 1], t, m)?;
        Ok(GhostCells {
            left,
            right,
            supercritical: l_super || r_super,
        })
    }
}

fn ghost(side: Side, kind: &BoundaryKind, near: State, t: f64, m: &VesselModel) -> Result<(State, bool)> {
    let checked = |g: State| -> Result<(State, bool)> { Ok((g, !is_subcritical(g, m)?)) };
    match kind {
        BoundaryKind::GivenArea(a) => checked(ghost_given_area(side, a.eval(t), near, m)?),
        BoundaryKind::GivenDischarge(q) => checked(ghost_given_discharge(side, q.eval(t), near, m)?),
        BoundaryKind::GivenDischargeFlux(q) => checked(ghost_discharge_flux(side, q.eval(t), near, m)?),
        BoundaryKind::SupercriticalInflow { area, discharge } => {
            Ok((ghost_supercritical_inflow(area.eval(t), discharge.eval(t)), false))
        }
        BoundaryKind::SupercriticalOutflow | BoundaryKind::NonReflecting => Ok((ghost_supercritical_outflow(near), false)),
        BoundaryKind::Periodic => Err(Error::InvalidScenario("periodic boundaries must be set on both ends".into())),
    }
}

/// `(u - c)(u + c) < 0`.
pub fn is_subcritical(s: State, m: &VesselModel) -> Result<bool> {
    let (l1, l2) = m.eigenvalues(s)?;
    Ok(l1 * l2 < 0.0)
}

/// Ghost with prescribed area; the velocity follows from the outgoing
/// invariant.
pub fn ghost_given_area(side: Side, a_bound: f64, near: State, m: &VesselModel) -> Result<State> {
    if !(a_bound > 0.0) {
        return Err(Error::ZeroArea { area: a_bound });
    }
    let u_near = near.velocity()?;
    let u = u_near - side.sign() * 4.0 * (m.celerity(near.a) - m.celerity(a_bound));
    Ok(State::new(a_bound, a_bound * u))
}

/// Residual of the given-discharge relation and its derivative in `A`.
fn discharge_residual(side: Side, q_bound: f64, w_out: f64, a: f64, m: &VesselModel) -> (f64, f64) {
    let c = m.celerity(a);
    let sg = side.sign();
    let f = -q_bound + w_out * a + sg * 4.0 * c * a;
    // d(cA)/dA = 5c/4
    let df = w_out + sg * 5.0 * c;
    (f, df)
}

/// Ghost with prescribed discharge: solves
/// `0 = -Q_b + (u_near -/+ 4 c_near) A_b +/- 4 c(A_b) A_b` for `A_b`.
pub fn ghost_given_discharge(side: Side, q_bound: f64, near: State, m: &VesselModel) -> Result<State> {
    let u_near = near.velocity()?;
    let w_out = u_near - side.sign() * 4.0 * m.celerity(near.a);
    let a = solve_area(near.a, "given-discharge boundary", |a| discharge_residual(side, q_bound, w_out, a, m))?;
    Ok(State::new(a, q_bound))
}

/// Safeguarded Newton iteration on `[a_near / 100, 100 a_near]` with a
/// bisection fallback.
fn solve_area(a_near: f64, what: &'static str, f: impl Fn(f64) -> (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = (a_near / BRACKET, a_near * BRACKET);
    let (f_lo, f_hi) = (f(lo).0, f(hi).0);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoConvergence { what, iterations: 0 });
    }
    let lo_negative = f_lo < 0.0;
    let mut a = a_near;
    for it in 0..MAX_ITERATIONS {
        let (fa, dfa) = f(a);
        if fa == 0.0 {
            return Ok(a);
        }
        if (fa < 0.0) == lo_negative {
            lo = a;
        } else {
            hi = a;
        }
        let mut next = a - fa / dfa;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - a).abs() <= REL_TOL * a || (hi - lo) <= REL_TOL * a {
            return if next > 0.0 {
                Ok(next)
            } else {
                Err(Error::NoConvergence { what, iterations: it + 1 })
            };
        }
        a = next;
    }
    Err(Error::NoConvergence {
        what,
        iterations: MAX_ITERATIONS,
    })
}

/// Ghost on the outgoing-invariant curve whose HLL mass flux across the
/// boundary interface equals `q_bound`.
pub fn ghost_discharge_flux(side: Side, q_bound: f64, near: State, m: &VesselModel) -> Result<State> {
    let u_near = near.velocity()?;
    let c_near = m.celerity(near.a);
    let state = |a: f64| State::new(a, a * (u_near - side.sign() * 4.0 * (c_near - m.celerity(a))));
    let mass = |a: f64| -> Result<f64> {
        let g = state(a);
        let f = match side {
            Side::Left => hll_flux(g, near, m)?,
            Side::Right => hll_flux(near, g, m)?,
        };
        Ok(f.mass - q_bound)
    };
    let (mut lo, mut hi) = (near.a / BRACKET, near.a * BRACKET);
    let mut f_lo = mass(lo)?;
    let f_hi = mass(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoConvergence {
            what: "flux discharge boundary",
            iterations: 0,
        });
    }
    for _ in 0..4 * MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let f_mid = mass(mid)?;
        if f_mid == 0.0 || (hi - lo) <= REL_TOL * mid {
            return Ok(state(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        what: "flux discharge boundary",
        iterations: 4 * MAX_ITERATIONS,
    })
}

pub fn ghost_supercritical_inflow(a_bound: f64, q_bound: f64) -> State {
    State::new(a_bound, q_bound)
}

pub fn ghost_supercritical_outflow(near: State) -> State {
    near
}

/// Ghost for a supercritical end: both values imposed on inflow, a copy of
/// the adjacent cell on outflow.
pub fn ghost_supercritical(kind: &BoundaryKind, near: State, t: f64) -> Result<State> {
    match kind {
        BoundaryKind::SupercriticalInflow { area, discharge } => Ok(ghost_supercritical_inflow(area.eval(t), discharge.eval(t))),
        BoundaryKind::SupercriticalOutflow | BoundaryKind::NonReflecting => Ok(ghost_supercritical_outflow(near)),
        other => Err(Error::InvalidScenario(format!("`{}` is not a supercritical boundary", other.name()))),
    }
}

/// Area of a circular section of radius `r`.
pub fn area_of_radius(r: f64) -> f64 {
    PI * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write;

    fn model() -> VesselModel {
        VesselModel::uniform(1e8, 1060.0, 0.0, 0.0, 4e-3, 10).unwrap()
    }

    fn a0() -> f64 {
        area_of_radius(4e-3)
    }

    #[test]
    fn subcritical_classification() {
        let m = model();
        let c = m.celerity(a0());
        assert!(is_subcritical(State::at_rest(a0()), &m).unwrap());
        assert!(!is_subcritical(State::new(a0(), a0() * 2.0 * c), &m).unwrap());
        assert!(is_subcritical(State::new(a0(), a0() * 0.1 * c), &m).unwrap());
        assert!(is_subcritical(State::at_rest(0.0), &m).is_err());
    }

    #[test]
    fn given_area_identities() {
        let m = model();
        let near = State::new(a0(), a0() * 0.3);
        for side in [Side::Left, Side::Right] {
            assert_eq!(ghost_given_area(side, a0(), near, &m).unwrap(), near);
            assert_eq!(ghost_given_area(side, a0(), State::at_rest(a0()), &m).unwrap().q, 0.0);
        }
        // dilation imposed on the left drives flow into the domain
        let g = ghost_given_area(Side::Left, 1.01 * a0(), State::at_rest(a0()), &m).unwrap();
        assert!(g.q > 0.0);
        let g = ghost_given_area(Side::Right, 1.01 * a0(), State::at_rest(a0()), &m).unwrap();
        assert!(g.q < 0.0);
    }

    #[test]
    fn given_area_preserves_outgoing_invariant() {
        let m = model();
        let near = State::new(a0(), a0() * 0.2);
        let g = ghost_given_area(Side::Left, 0.97 * a0(), near, &m).unwrap();
        let w = |s: State| s.velocity().unwrap() - 4.0 * m.celerity(s.a);
        assert_relative_eq!(w(g), w(near), max_relative = 1e-13);
    }

    #[test]
    fn given_discharge_at_rest_returns_near_area() {
        let m = model();
        let near = State::at_rest(a0());
        for side in [Side::Left, Side::Right] {
            let g = ghost_given_discharge(side, 0.0, near, &m).unwrap();
            assert_relative_eq!(g.a, near.a, max_relative = 1e-12);
            assert_eq!(g.q, 0.0);
        }
        // sin(omega t) = 0 reduces to the same case
        let q = Signal::Sine { offset: 0.0, amplitude: 3.45e-7, omega: 4.0 * PI }.eval(0.0);
        assert_relative_eq!(ghost_given_discharge(Side::Left, q, near, &m).unwrap().a, near.a, max_relative = 1e-12);
    }

    #[test]
    fn given_discharge_residual_and_linear_response() {
        let m = model();
        let near = State::new(a0() * 1.002, 2e-7);
        for (side, q) in [(Side::Left, 3.45e-7), (Side::Right, -1e-6), (Side::Right, 3e-7)] {
            let g = ghost_given_discharge(side, q, near, &m).unwrap();
            let w_out = near.velocity().unwrap() - side.sign() * 4.0 * m.celerity(near.a);
            let (res, _) = discharge_residual(side, q, w_out, g.a, &m);
            assert!(res.abs() <= 1e-12 * q.abs().max(1.0));
            assert_eq!(g.q, q);
        }

        // linearised invariant at rest: dQ = (+/-) 5c dA on the left / right
        let rest = State::at_rest(a0());
        let c = m.celerity(a0());
        let dq = 1e-9;
        let g = ghost_given_discharge(Side::Left, dq, rest, &m).unwrap();
        assert_relative_eq!((g.a - a0()) / dq, 1.0 / c, max_relative = 1e-5);
        let g = ghost_given_discharge(Side::Right, dq, rest, &m).unwrap();
        assert_relative_eq!((g.a - a0()) / dq, -1.0 / c, max_relative = 1e-5);
    }

    #[test]
    fn flux_discharge_ghost_matches_target() {
        let m = model();
        let near = State::at_rest(a0());
        for (side, q) in [(Side::Left, 3.45e-7), (Side::Right, -2e-7)] {
            let g = ghost_discharge_flux(side, q, near, &m).unwrap();
            let f = match side {
                Side::Left => hll_flux(g, near, &m).unwrap(),
                Side::Right => hll_flux(near, g, &m).unwrap(),
            };
            assert_relative_eq!(f.mass, q, max_relative = 1e-9);
        }
    }

    #[test]
    fn supercritical_ghosts() {
        let near = State::new(3e-5, 1e-4);
        assert_eq!(ghost_supercritical(&BoundaryKind::SupercriticalOutflow, near, 0.0).unwrap(), near);
        assert_eq!(ghost_supercritical(&BoundaryKind::NonReflecting, near, 0.0).unwrap(), near);
        let inflow = BoundaryKind::SupercriticalInflow {
            area: Signal::Constant(4e-5),
            discharge: Signal::Constant(2e-4),
        };
        assert_eq!(ghost_supercritical(&inflow, near, 1.0).unwrap(), State::new(4e-5, 2e-4));
        assert!(ghost_supercritical(&BoundaryKind::Periodic, near, 0.0).is_err());
    }

    #[test]
    fn boundaries_produce_ghosts() {
        let m = model();
        let states: Vec<State> = (0..4).map(|i| State::new(a0() * (1.0 + 1e-3 * i as f64), 0.0)).collect();
        let g = Boundaries::periodic().ghosts(&states, 0.0, &m).unwrap();
        assert_eq!((g.left, g.right), (states[3], states[0]));
        let g = Boundaries::non_reflecting().ghosts(&states, 0.0, &m).unwrap();
        assert_eq!((g.left, g.right), (states[0], states[3]));
        assert!(!g.supercritical);
        assert!(Boundaries::new(BoundaryKind::Periodic, BoundaryKind::NonReflecting).is_err());
    }

    #[test]
    fn time_series_interpolates_and_loads() {
        let ts = TimeSeries::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 6.0]).unwrap();
        assert_eq!(ts.eval(-1.0), 0.0);
        assert_eq!(ts.eval(0.5), 1.0);
        assert_eq!(ts.eval(2.0), 4.0);
        assert_eq!(ts.eval(9.0), 6.0);
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "time,value\n# inflow\n0, 1e-7\n0.5 2e-7\n\n1.0,\t0").unwrap();
        let ts = TimeSeries::load(f.path()).unwrap();
        assert_relative_eq!(ts.eval(0.25), 1.5e-7, max_relative = 1e-12);
        assert_eq!(ts.eval(1.0), 0.0);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "0,1\n1,2,3").unwrap();
        assert!(matches!(TimeSeries::load(bad.path()), Err(Error::Io { .. })));
        assert!(TimeSeries::load(Path::new("/nonexistent/series.csv")).is_err());
    }
}
