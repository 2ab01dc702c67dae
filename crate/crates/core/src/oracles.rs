//! Reference solutions: the ideal tourniquet Riemann problem, linear d'Alembert
//! waves, transmission and reflection at a section change, and the damped
//! wave driven by a sinusoidal inflow.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{State, VesselModel};

const TOURNIQUET_ITERATIONS: usize = 200;

/// Exact solution of the tourniquet problem: left state at rest with area
/// `a_l`, a rarefaction, an intermediate state, a shock and the right state at
/// rest with area `a_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TourniquetSolution {
    pub a_l: f64,
    pub a_r: f64,
    pub a_m: f64,
    pub u_m: f64,
    pub q_m: f64,
    pub s: f64,
    pub c_l: f64,
    pub c_m: f64,
    pub c_r: f64,
}

impl TourniquetSolution {
    /// Relative residuals of the invariant, mass and momentum relations.
    pub fn residuals(&self, m: &VesselModel) -> [f64; 3] {
        let inv = (self.u_m + 4.0 * self.c_m - 4.0 * self.c_l).abs() / (4.0 * self.c_l);
        let mass_scale = self.q_m.abs().max(f64::MIN_POSITIVE);
        let mass = (self.q_m - self.s * (self.a_m - self.a_r)).abs() / mass_scale;
        let p_m = m.pressure_potential(self.a_m);
        let lhs = self.q_m * self.q_m / self.a_m + p_m - m.pressure_potential(self.a_r);
        let mom = (lhs - self.s * self.q_m).abs() / p_m;
        [inv, mass, mom]
    }

    pub fn rarefaction_head(&self, t: f64) -> f64 {
        -self.c_l * t
    }

    pub fn rarefaction_tail(&self, t: f64) -> f64 {
        (4.0 * self.c_l - 5.0 * self.c_m) * t
    }

    pub fn shock_position(&self, t: f64) -> f64 {
        self.s * t
    }
}

fn tourniquet_state(a_m: f64, a_l: f64, a_r: f64, m: &VesselModel) -> TourniquetSolution {
    let c_l = m.celerity(a_l);
    let c_m = m.celerity(a_m);
    let u_m = 4.0 * (c_l - c_m);
    let q_m = a_m * u_m;
    let s = if a_m > a_r { q_m / (a_m - a_r) } else { m.celerity(a_r) };
    TourniquetSolution {
        a_l,
        a_r,
        a_m,
        u_m,
        q_m,
        s,
        c_l,
        c_m,
        c_r: m.celerity(a_r),
    }
}

/// Solves the invariant and Rankine-Hugoniot relations for the intermediate
/// state by bisection on `A_M` in `(A_R, A_L)`.
pub fn solve_tourniquet(a_l: f64, a_r: f64, m: &VesselModel) -> Result<TourniquetSolution> {
    if !(a_r > 0.0) {
        return Err(Error::ZeroArea { area: a_r });
    }
    if a_l < a_r {
        return Err(Error::InvalidScenario(format!("tourniquet needs A_L >= A_R, got {a_l:e} < {a_r:e}")));
    }
    if a_l == a_r {
        return Ok(tourniquet_state(a_l, a_l, a_r, m));
    }
    let residual = |a_m: f64| {
        let st = tourniquet_state(a_m, a_l, a_r, m);
        st.q_m * st.q_m / a_m + m.pressure_potential(a_m) - m.pressure_potential(a_r) - st.s * st.q_m
    };
    // residual -> -inf as A_M -> A_R and equals P(A_L) - P(A_R) > 0 at A_L
    let (mut lo, mut hi) = (a_r, a_l);
    for _ in 0..TOURNIQUET_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * mid || mid == lo || mid == hi {
            return Ok(tourniquet_state(mid, a_l, a_r, m));
        }
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        what: "tourniquet intermediate state",
        iterations: TOURNIQUET_ITERATIONS,
    })
}

/// Self-similar tourniquet profile; `x` is measured from the initial
/// discontinuity.
pub fn tourniquet_profile(x: f64, t: f64, sol: &TourniquetSolution, m: &VesselModel) -> State {
    if t <= 0.0 {
        return State::at_rest(if x <= 0.0 { sol.a_l } else { sol.a_r });
    }
    let xi = x / t;
    if xi <= -sol.c_l {
        State::at_rest(sol.a_l)
    } else if x <= sol.rarefaction_tail(t) {
        let u = 0.8 * (xi + sol.c_l);
        let c = 0.2 * (-xi + 4.0 * sol.c_l);
        let a = m.area_from_celerity(c);
        State::new(a, a * u)
    } else if x <= sol.shock_position(t) {
        State::new(sol.a_m, sol.q_m)
    } else {
        State::at_rest(sol.a_r)
    }
}

/// Dimensionless half-sine bump on `(start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinePulse {
    pub start: f64,
    pub end: f64,
}

impl SinePulse {
    pub fn eval(&self, x: f64) -> f64 {
        if x > self.start && x < self.end {
            (PI * (x - self.start) / (self.end - self.start)).sin()
        } else {
            0.0
        }
    }
}

/// Linear solution for an initial radius `R0 (1 + eps phi(x))` at rest in a
/// uniform vessel: two counter-propagating half-amplitude copies of the
/// bump. The velocity follows from the linearised mass balance,
/// `u = (2 c0 / R0) R1` for a right-going wave.
pub fn dalembert_solution(x: f64, t: f64, phi: impl Fn(f64) -> f64, eps: f64, m: &VesselModel, r0: f64) -> State {
    let c0 = m.celerity(PI * r0 * r0);
    let right = phi(x - c0 * t);
    let left = phi(x + c0 * t);
    let r = r0 * (1.0 + 0.5 * eps * (right + left));
    let u = 0.5 * eps * 2.0 * c0 * (right - left);
    let a = PI * r * r;
    State::new(a, a * u)
}

/// Characteristic admittance `A / (rho c)`.
pub fn admittance(a: f64, m: &VesselModel) -> f64 {
    a / (m.rho * m.celerity(a))
}

/// Transmission and reflection coefficients of a linear pressure (or radius)
/// wave incident from the `a_incident` side onto a section `a_other`.
pub fn transmission_reflection(a_incident: f64, a_other: f64, m: &VesselModel) -> (f64, f64) {
    let yl = admittance(a_incident, m);
    let yr = admittance(a_other, m);
    let tr = 2.0 * yl / (yl + yr);
    (tr, tr - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRoot {
    pub k_r: f64,
    pub k_i: f64,
}

impl DispersionRoot {
    /// `|K^2 - target| / |target|` for the linear damped wave relation.
    pub fn residual(&self, omega: f64, m: &VesselModel, r0: f64) -> f64 {
        let c0 = m.celerity(PI * r0 * r0);
        let target_re = omega * omega / (c0 * c0);
        let target_im = -omega * m.cf / (PI * r0 * r0 * c0 * c0);
        let re = self.k_r * self.k_r - self.k_i * self.k_i;
        let im = 2.0 * self.k_r * self.k_i;
        (re - target_re).hypot(im - target_im) / target_re.hypot(target_im)
    }

    pub fn phase_speed(&self, omega: f64) -> f64 {
        omega / self.k_r
    }
}

/// Root of `K^2 = omega^2/c0^2 - i omega Cf / (pi R0^2 c0^2)` in modulus /
/// argument form.
pub fn damped_dispersion(omega: f64, m: &VesselModel, r0: f64) -> DispersionRoot {
    let c0 = m.celerity(PI * r0 * r0);
    let a0 = PI * r0 * r0;
    let re = omega.powi(4) / c0.powi(4);
    let im = omega * m.cf / (a0 * c0 * c0);
    let modulus = (re + im * im).powf(0.25);
    let arg = 0.5 * (-m.cf / (a0 * omega)).atan();
    DispersionRoot {
        k_r: modulus * arg.cos(),
        k_i: modulus * arg.sin(),
    }
}

/// Discharge of the damped wave; zero ahead of the front `k_r x = omega t`.
pub fn damped_discharge(x: f64, t: f64, omega: f64, q_amp: f64, k_r: f64, k_i: f64) -> f64 {
    if k_r * x > omega * t {
        0.0
    } else {
        q_amp * (omega * t - k_r * x).sin() * (k_i * x).exp()
    }
}

/// Area perturbation accompanying [`damped_discharge`] through the linear
/// mass balance.
pub fn damped_area_perturbation(x: f64, t: f64, omega: f64, q_amp: f64, root: DispersionRoot) -> f64 {
    if root.k_r * x > omega * t {
        return 0.0;
    }
    let theta = omega * t - root.k_r * x;
    q_amp * (root.k_i * x).exp() / omega * (root.k_r * theta.sin() + root.k_i * theta.cos())
}

/// Diffusivity of the friction-dominated limit, `k pi R0^3 / (2 rho Cf)`.
pub fn diffusion_coefficient(m: &VesselModel, r0: f64) -> f64 {
    m.k * PI * r0.powi(3) / (2.0 * m.rho * m.cf)
}

/// How a numerical result should be read against an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonKind {
    /// Exact solution of the nonlinear system.
    Convergence,
    /// Solution of the linearised system: the error also measures how linear
    /// the configuration is.
    ModelAgreement,
}

impl ComparisonKind {
    pub fn label(self) -> &'static str {
        match self {
            ComparisonKind::Convergence => "convergence",
            ComparisonKind::ModelAgreement => "model-agreement",
        }
    }
}

/// `(x, t) -> State` evaluator attached to a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Tourniquet { sol: TourniquetSolution, x0: f64 },
    Dalembert { pulse: SinePulse, eps: f64, r0: f64 },
    DampedWave { root: DispersionRoot, omega: f64, q_amp: f64, r0: f64, x_left: f64 },
    Rest { sqrt_a0: Vec<f64>, x_left: f64, dx: f64 },
}

impl Oracle {
    pub fn eval(&self, x: f64, t: f64, m: &VesselModel) -> State {
        match self {
            Oracle::Tourniquet { sol, x0 } => tourniquet_profile(x - x0, t, sol, m),
            Oracle::Dalembert { pulse, eps, r0 } => dalembert_solution(x, t, |y| pulse.eval(y), *eps, m, *r0),
            Oracle::DampedWave { root, omega, q_amp, r0, x_left } => {
                let xr = x - x_left;
                let a = PI * r0 * r0 + damped_area_perturbation(xr, t, *omega, *q_amp, *root);
                State::new(a, damped_discharge(xr, t, *omega, *q_amp, root.k_r, root.k_i))
            }
            Oracle::Rest { sqrt_a0, x_left, dx } => {
                let n = sqrt_a0.len();
                let i = (((x - x_left) / dx).floor().max(0.0) as usize).min(n - 1);
                State::at_rest(sqrt_a0[i] * sqrt_a0[i])
            }
        }
    }

    pub fn comparison(&self) -> ComparisonKind {
        match self {
            Oracle::Tourniquet { .. } | Oracle::Rest { .. } => ComparisonKind::Convergence,
            Oracle::Dalembert { .. } | Oracle::DampedWave { .. } => ComparisonKind::ModelAgreement,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Oracle::Tourniquet { .. } => "tourniquet",
            Oracle::Dalembert { .. } => "dalembert",
            Oracle::DampedWave { .. } => "damped-wave",
            Oracle::Rest { .. } => "rest",
        }
    }
}
