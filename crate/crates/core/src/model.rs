//! Physical model of an elastic vessel: state, pressure law, wave speed and
//! the conservative flux of the (A, Q) system.
//!
//! The wall follows the linear elastic law `p = p0 + k (R - R0)`, which in
//! terms of areas reads `p = p0 + k (sqrt(A) - sqrt(A0)) / sqrt(pi)`. All
//! quantities are SI.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Conservative unknowns of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    /// Cross-section area (m^2).
    pub a: f64,
    /// Discharge (m^3/s).
    pub q: f64,
}

impl State {
    pub const fn new(a: f64, q: f64) -> Self {
        Self { a, q }
    }

    pub fn at_rest(a: f64) -> Self {
        Self { a, q: 0.0 }
    }

    /// Mean velocity `Q/A`.
    pub fn velocity(&self) -> Result<f64> {
        if self.a > 0.0 {
            Ok(self.q / self.a)
        } else {
            Err(Error::ZeroArea { area: self.a })
        }
    }

    pub fn radius(&self) -> f64 {
        (self.a.max(0.0) / PI).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.q.is_finite()
    }
}

/// Two-component flux `(mass, momentum)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Flux {
    /// Mass flux (m^3/s).
    pub mass: f64,
    /// Momentum flux (m^4/s^2).
    pub momentum: f64,
}

impl Flux {
    pub const fn new(mass: f64, momentum: f64) -> Self {
        Self { mass, momentum }
    }

    pub fn is_finite(&self) -> bool {
        self.mass.is_finite() && self.momentum.is_finite()
    }
}

/// Uniform 1D cell layout. Cell `i` covers `[x_left + i dx, x_left + (i+1) dx]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_cells: usize,
    pub dx: f64,
    pub x_left: f64,
}

impl Grid {
    pub fn new(n_cells: usize, length: f64, x_left: f64) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidScenario("grid needs at least one cell".into()));
        }
        if !(length > 0.0 && length.is_finite()) || !x_left.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        Ok(Self {
            n_cells,
            dx: length / n_cells as f64,
            x_left,
        })
    }

    pub fn length(&self) -> f64 {
        self.dx * self.n_cells as f64
    }

    pub fn x_right(&self) -> f64 {
        self.x_left + self.length()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.center(i))
    }
}

/// Wall and fluid parameters plus the rest cross-section of every cell.
///
/// The rest section is stored as `sqrt(A0)` per cell, the quantity that the
/// well-balanced reconstruction differences.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselModel {
    /// Wall stiffness (Pa/m).
    pub k: f64,
    /// Blood density (kg/m^3).
    pub rho: f64,
    /// External pressure (Pa).
    pub p0: f64,
    /// Friction coefficient `8 pi nu` (m^2/s).
    pub cf: f64,
    sqrt_a0: Vec<f64>,
    // k / (rho sqrt(pi)), used by nearly every formula
    b: f64,
}

impl VesselModel {
    pub fn new(k: f64, rho: f64, p0: f64, cf: f64, sqrt_a0: Vec<f64>) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidScenario(format!("stiffness k must be positive, got {k}")));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidScenario(format!("density must be positive, got {rho}")));
        }
        if !(cf >= 0.0 && cf.is_finite()) || !p0.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "friction must be non-negative and p0 finite, got cf = {cf}, p0 = {p0}"
            )));
        }
        if let Some(i) = sqrt_a0.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidScenario(format!(
                "rest section must be positive, cell {i} has sqrt(A0) = {}",
                sqrt_a0[i]
            )));
        }
        Ok(Self {
            k,
            rho,
            p0,
            cf,
            sqrt_a0,
            b: k / (rho * SQRT_PI),
        })
    }

    /// Builds the rest profile from per-cell rest radii.
    pub fn from_radii(k: f64, rho: f64, p0: f64, cf: f64, radii: &[f64]) -> Result<Self> {
        Self::new(k, rho, p0, cf, radii.iter().map(|r| r * SQRT_PI).collect())
    }

    pub fn uniform(k: f64, rho: f64, p0: f64, cf: f64, r0: f64, n_cells: usize) -> Result<Self> {
        Self::from_radii(k, rho, p0, cf, &vec![r0; n_cells])
    }

    /// Same wall and fluid, different friction coefficient.
    pub fn with_friction(mut self, cf: f64) -> Self {
        self.cf = cf;
        self
    }

    pub fn n_cells(&self) -> usize {
        self.sqrt_a0.len()
    }

    pub fn sqrt_a0(&self) -> &[f64] {
        &self.sqrt_a0
    }

    /// `A0` of a cell, computed as the square of the stored `sqrt(A0)`.
    pub fn rest_area(&self, cell: usize) -> f64 {
        let s = self.sqrt_a0[cell];
        s * s
    }

    pub fn rest_radius(&self, cell: usize) -> f64 {
        self.sqrt_a0[cell] / SQRT_PI
    }

    /// `k / (rho sqrt(pi))`.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn pressure(&self, s: State, cell: usize) -> f64 {
        self.p0 + self.k * (s.a.max(0.0).sqrt() - self.sqrt_a0[cell]) / SQRT_PI
    }

    /// Moens-Korteweg speed `sqrt(k sqrt(A) / (2 rho sqrt(pi)))`.
    pub fn celerity(&self, a: f64) -> f64 {
        (0.5 * self.b * a.max(0.0).sqrt()).sqrt()
    }

    /// Inverse of [`celerity`](Self::celerity): `A = pi (2 rho c^2 / k)^2`.
    pub fn area_from_celerity(&self, c: f64) -> f64 {
        let sqrt_a = 2.0 * c * c / self.b;
        sqrt_a * sqrt_a
    }

    pub fn eigenvalues(&self, s: State) -> Result<(f64, f64)> {
        let u = s.velocity()?;
        let c = self.celerity(s.a);
        Ok((u - c, u + c))
    }

    /// `P(A) = k A^{3/2} / (3 rho sqrt(pi))`, the pressure part of the momentum flux.
    pub fn pressure_potential(&self, a: f64) -> f64 {
        let a = a.max(0.0);
        self.b * a * a.sqrt() / 3.0
    }

    /// Kinetic "temperature" `T = k sqrt(A) / (3 rho sqrt(pi))`; note `3T = 2c^2`.
    pub fn kinetic_temperature(&self, a: f64) -> f64 {
        self.b * a.max(0.0).sqrt() / 3.0
    }

    /// `F(U) = (Q, Q^2/A + P(A))`.
    pub fn physical_flux(&self, s: State) -> Result<Flux> {
        if s.a <= 0.0 {
            return Err(Error::ZeroArea { area: s.a });
        }
        Ok(Flux::new(s.q, s.q * s.q / s.a + self.pressure_potential(s.a)))
    }

    /// Bernoulli constant `Q^2/(2A^2) + b (sqrt(A) - sqrt(A0))` of frictionless steady flow.
    pub fn bernoulli_invariant(&self, s: State, cell: usize) -> Result<f64> {
        let u = s.velocity()?;
        Ok(0.5 * u * u + self.b * (s.a.sqrt() - self.sqrt_a0[cell]))
    }

    /// Kinematic viscosity implied by `cf = 8 pi nu`.
    pub fn viscosity(&self) -> f64 {
        self.cf / (8.0 * PI)
    }

    /// Womersley number `R0 sqrt(omega / nu)` at a cell; infinite without friction.
    pub fn womersley(&self, omega: f64, cell: usize) -> f64 {
        let nu = self.viscosity();
        if nu == 0.0 {
            f64::INFINITY
        } else {
            self.rest_radius(cell) * (omega / nu).sqrt()
        }
    }
}

/// `sum_i A_i dx`.
pub fn total_volume(states: &[State], dx: f64) -> f64 {
    states.iter().map(|s| s.a).sum::<f64>() * dx
}
