//! Scenario assembly, the time loop, error norms and convergence studies.

use std::f64::consts::PI;
use std::fmt;

use crate::boundary::Boundaries;
use crate::error::{Error, Result};
use crate::integrate::{cfl_timestep, step, Scheme, StepReport};
use crate::model::{total_volume, Grid, State, VesselModel};
use crate::oracles::{damped_dispersion, solve_tourniquet, ComparisonKind, Oracle, SinePulse};

/// Wall and fluid constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub k: f64,
    pub rho: f64,
    pub p0: f64,
    pub cf: f64,
}

/// Rest radius `R0(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RestProfile {
    Uniform { radius: f64 },
    /// Smooth bulge of height `delta_r` rising on `[x1, x2]`, flat on
    /// `[x2, x3]` and falling on `[x3, x4]`.
    Aneurism { radius: f64, delta_r: f64, x: [f64; 4] },
    /// Smooth transition from `r_upstream` (before `x1`) to `r_downstream`
    /// (after `x2`).
    Taper { r_upstream: f64, r_downstream: f64, x1: f64, x2: f64 },
    /// One radius per cell; fixes the cell count.
    Cells(Vec<f64>),
}

impl RestProfile {
    pub fn radius(&self, x: f64) -> f64 {
        match self {
            RestProfile::Uniform { radius } => *radius,
            RestProfile::Aneurism { radius, delta_r, x: [x1, x2, x3, x4] } => {
                if x <= *x1 || x >= *x4 {
                    *radius
                } else if x < *x2 {
                    radius + 0.5 * delta_r * (((x - x1) / (x2 - x1) * PI - 0.5 * PI).sin() + 1.0)
                } else if x <= *x3 {
                    radius + delta_r
                } else {
                    radius + 0.5 * delta_r * (((x - x3) / (x4 - x3) * PI).cos() + 1.0)
                }
            }
            RestProfile::Taper { r_upstream, r_downstream, x1, x2 } => {
                if x <= *x1 {
                    *r_upstream
                } else if x <= *x2 {
                    r_downstream + 0.5 * (r_upstream - r_downstream) * (1.0 + ((x - x1) / (x2 - x1) * PI).cos())
                } else {
                    *r_downstream
                }
            }
            RestProfile::Cells(r) => r[0],
        }
    }

    pub fn radii(&self, grid: &Grid) -> Vec<f64> {
        match self {
            RestProfile::Cells(r) => r.clone(),
            _ => grid.centers().map(|x| self.radius(x)).collect(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RestProfile::Uniform { .. } => "uniform",
            RestProfile::Aneurism { .. } => "aneurism",
            RestProfile::Taper { .. } => "taper",
            RestProfile::Cells(_) => "cells",
        }
    }
}

/// Initial state, sampled at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `A = A0`, `Q = 0`.
    Rest,
    /// Radius `r_left` for `x <= x0` and `r_right` beyond, at rest.
    Riemann { r_left: f64, r_right: f64, x0: f64 },
    /// `R = R0(x) (1 + eps sin(pi (x - start) / (end - start)))` on the pulse,
    /// at rest.
    SinePulse { eps: f64, start: f64, end: f64 },
}

impl InitialCondition {
    pub fn radius(&self, x: f64, r0: f64) -> f64 {
        match self {
            InitialCondition::Rest => r0,
            InitialCondition::Riemann { r_left, r_right, x0 } => {
                if x <= *x0 {
                    *r_left
                } else {
                    *r_right
                }
            }
            InitialCondition::SinePulse { eps, start, end } => r0 * (1.0 + eps * SinePulse { start: *start, end: *end }.eval(x)),
        }
    }
}

/// Reference solution attached to a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    None,
    /// Exact tourniquet solution built from a Riemann initial condition.
    Tourniquet,
    /// Linear waves built from a sine-pulse initial condition.
    Dalembert,
    /// Damped wave driven by `q_amp sin(omega t)` at the left end.
    DampedWave { omega: f64, q_amp: f64 },
    /// The initial rest state.
    Rest,
}

impl Reference {
    pub fn name(&self) -> &'static str {
        match self {
            Reference::None => "none",
            Reference::Tourniquet => "tourniquet",
            Reference::Dalembert => "dalembert",
            Reference::DampedWave { .. } => "damped_wave",
            Reference::Rest => "rest",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub n_cells: usize,
    pub length: f64,
    pub x_left: f64,
    pub physics: Physics,
    pub profile: RestProfile,
    pub initial: InitialCondition,
    pub boundaries: Boundaries,
    pub scheme: Scheme,
    pub t_end: f64,
    /// Times at which the state is recorded; `t_end` is always recorded.
    pub snapshots: Vec<f64>,
    pub reference: Reference,
}

impl Scenario {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_cells, self.length, self.x_left)
    }

    pub fn model(&self) -> Result<VesselModel> {
        let grid = self.grid()?;
        let p = self.physics;
        VesselModel::from_radii(p.k, p.rho, p.p0, p.cf, &self.profile.radii(&grid))
    }

    pub fn initial_states(&self, grid: &Grid, m: &VesselModel) -> Vec<State> {
        (0..grid.n_cells)
            .map(|i| {
                let r0 = m.rest_radius(i);
                let r = self.initial.radius(grid.center(i), r0);
                // undisturbed cells take the stored rest area exactly
                State::at_rest(if r == r0 { m.rest_area(i) } else { PI * r * r })
            })
            .collect()
    }

    pub fn with_cells(&self, n_cells: usize) -> Scenario {
        Scenario {
            n_cells,
            ..self.clone()
        }
    }

    /// Sorted, de-duplicated snapshot times including `t_end`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut times: Vec<f64> = self.snapshots.iter().copied().filter(|&t| t <= self.t_end).collect();
        times.push(self.t_end);
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("time.t_end", format!("must be non-negative, got {}", self.t_end)));
        }
        if let Some(t) = self.snapshots.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return Err(Error::config("time.snapshots", format!("{t} lies outside [0, t_end]")));
        }
        if let RestProfile::Cells(r) = &self.profile {
            if r.len() != self.n_cells {
                return Err(Error::config(
                    "model.profile.radii",
                    format!("{} radii for {} cells", r.len(), self.n_cells),
                ));
            }
        }
        self.boundaries.validate()?;
        self.scheme.validate(&self.boundaries)?;
        self.grid()?;
        self.model()?;
        Ok(())
    }

    /// Builds the reference solution, if any.
    pub fn oracle(&self) -> Result<Option<Oracle>> {
        let uniform_radius = || match self.profile {
            RestProfile::Uniform { radius } => Ok(radius),
            _ => Err(Error::InvalidScenario(format!("`{}` reference needs a uniform vessel", self.reference.name()))),
        };
        Ok(match &self.reference {
            Reference::None => None,
            Reference::Rest => {
                let m = self.model()?;
                let grid = self.grid()?;
                Some(Oracle::Rest {
                    sqrt_a0: m.sqrt_a0().to_vec(),
                    x_left: grid.x_left,
                    dx: grid.dx,
                })
            }
            Reference::Tourniquet => {
                let InitialCondition::Riemann { r_left, r_right, x0 } = self.initial else {
                    return Err(Error::InvalidScenario("tourniquet reference needs a Riemann initial condition".into()));
                };
                let m = self.model()?;
                let sol = solve_tourniquet(PI * r_left * r_left, PI * r_right * r_right, &m)?;
                Some(Oracle::Tourniquet { sol, x0 })
            }
            Reference::Dalembert => {
                let InitialCondition::SinePulse { eps, start, end } = self.initial else {
                    return Err(Error::InvalidScenario("d'Alembert reference needs a sine-pulse initial condition".into()));
                };
                Some(Oracle::Dalembert {
                    pulse: SinePulse { start, end },
                    eps,
                    r0: uniform_radius()?,
                })
            }
            Reference::DampedWave { omega, q_amp } => {
                let r0 = uniform_radius()?;
                let m = self.model()?;
                Some(Oracle::DampedWave {
                    root: damped_dispersion(*omega, &m, r0),
                    omega: *omega,
                    q_amp: *q_amp,
                    r0,
                    x_left: self.x_left,
                })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub states: Vec<State>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub grid: Grid,
    pub model: VesselModel,
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepReport>,
    /// Total volume `sum A dx` at each snapshot.
    pub volumes: Vec<f64>,
    /// Largest `|u|` over all cells and all steps, initial state included.
    pub max_velocity: f64,
    /// Steps in which a characteristic boundary state was not subcritical.
    pub supercritical_boundary_steps: usize,
}

impl RunResult {
    pub fn snapshot_at(&self, t: f64) -> Result<&Snapshot> {
        let tol = 1e-12 * t.abs().max(1.0);
        self.snapshots.iter().find(|s| (s.t - t).abs() <= tol).ok_or(Error::MissingSnapshot(t))
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a run records at least one snapshot")
    }

    /// Largest relative change of the total volume between consecutive
    /// snapshots.
    pub fn volume_drift(&self) -> f64 {
        self.volumes
            .windows(2)
            .map(|w| ((w[1] - w[0]) / w[0]).abs())
            .fold(0.0, f64::max)
    }
}

fn max_abs_velocity(states: &[State]) -> Result<f64> {
    let mut v: f64 = 0.0;
    for s in states {
        v = v.max(s.velocity()?.abs());
    }
    Ok(v)
}

/// Advances the scenario to `t_end`, landing exactly on every snapshot time.
pub fn run(sc: &Scenario) -> Result<RunResult> {
    sc.validate()?;
    let grid = sc.grid()?;
    let model = sc.model()?;
    let mut states = sc.initial_states(&grid, &model);
    let targets = sc.snapshot_times();
    let cfl = sc.scheme.cfl_number();

    let mut result = RunResult {
        grid,
        model,
        snapshots: Vec::with_capacity(targets.len()),
        steps: Vec::new(),
        volumes: Vec::with_capacity(targets.len()),
        max_velocity: max_abs_velocity(&states)?,
        supercritical_boundary_steps: 0,
    };
    let mut t = 0.0;
    for &target in &targets {
        while t < target {
            let report = cfl_timestep(&states, &result.model, grid.dx, cfl, sc.scheme.flux)?;
            let t_next = if t + report.dt >= target { target } else { t + report.dt };
            let dt = t_next - t;
            if !(dt > 0.0) {
                return Err(Error::DegenerateTimestep(report.max_wavespeed));
            }
            let adv = step(&states, &result.model, &grid, &sc.scheme, &sc.boundaries, t, dt)?;
            states = adv.states;
            if adv.supercritical_boundary {
                result.supercritical_boundary_steps += 1;
            }
            result.max_velocity = result.max_velocity.max(max_abs_velocity(&states)?);
            result.steps.push(StepReport { dt, ..report });
            t = t_next;
        }
        result.volumes.push(total_volume(&states, grid.dx));
        result.snapshots.push(Snapshot {
            t: target,
            states: states.clone(),
        });
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Area,
    Discharge,
    Radius,
    Velocity,
}

impl Field {
    pub fn of(self, s: State) -> f64 {
        match self {
            Field::Area => s.a,
            Field::Discharge => s.q,
            Field::Radius => s.radius(),
            Field::Velocity => {
                if s.a > 0.0 {
                    s.q / s.a
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Area => "A",
            Field::Discharge => "Q",
            Field::Radius => "R",
            Field::Velocity => "u",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" | "area" => Ok(Field::Area),
            "Q" | "q" | "discharge" => Ok(Field::Discharge),
            "R" | "r" | "radius" => Ok(Field::Radius),
            "u" | "U" | "velocity" => Ok(Field::Velocity),
            other => Err(Error::config("field", format!("unknown field `{other}`"))),
        }
    }
}

/// `sum_i |num_i - ref(x_i, t)| dx` on the snapshot at `t`.
pub fn l1_error(result: &RunResult, oracle: &Oracle, field: Field, t: f64) -> Result<f64> {
    let snap = result.snapshot_at(t)?;
    let grid = &result.grid;
    Ok(snap
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (field.of(*s) - field.of(oracle.eval(grid.center(i), t, &result.model))).abs())
        .sum::<f64>()
        * grid.dx)
}

/// Least-squares fit `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub field: Field,
    pub comparison: ComparisonKind,
    /// `(J, L1 error)` ordered by `J`.
    pub rows: Vec<(usize, f64)>,
    /// Slope and intercept of `ln(error)` against `ln(J)`.
    pub slope: f64,
    pub intercept: f64,
}

impl Study {
    pub fn from_rows(field: Field, comparison: ComparisonKind, mut rows: Vec<(usize, f64)>) -> Result<Self> {
        rows.sort_by_key(|r| r.0);
        if rows.len() < 2 {
            return Err(Error::InvalidScenario("a convergence study needs at least two grids".into()));
        }
        let x: Vec<f64> = rows.iter().map(|r| (r.0 as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
        let (slope, intercept) = linear_fit(&x, &y);
        Ok(Study {
            field,
            comparison,
            rows,
            slope,
            intercept,
        })
    }
}

/// Runs the template on every grid in `cells` concurrently and regresses the
/// `t_end` error against the cell count.
pub fn convergence_study(template: &Scenario, cells: &[usize], field: Field) -> Result<Study> {
    if cells.len() < 3 {
        return Err(Error::InvalidScenario("a convergence study needs at least three grids".into()));
    }
    let oracle = template
        .oracle()?
        .ok_or_else(|| Error::InvalidScenario(format!("scenario `{}` has no reference solution", template.name)))?;
    let results: Vec<Result<(usize, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|&j| {
                let sc = template.with_cells(j);
                let oracle = &oracle;
                scope.spawn(move || -> Result<(usize, f64)> {
                    let r = run(&sc)?;
                    Ok((j, l1_error(&r, oracle, field, sc.t_end)?))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("study worker panicked")).collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Study::from_rows(field, oracle.comparison(), rows)
}

/// Signed extreme of `R - R0(x)` over cells whose centre lies in
/// `[x_min, x_max]`.
pub fn peak_radius_deviation(result: &RunResult, snapshot: &Snapshot, x_min: f64, x_max: f64) -> f64 {
    let grid = &result.grid;
    let mut best: f64 = 0.0;
    for (i, s) in snapshot.states.iter().enumerate() {
        let x = grid.center(i);
        if x < x_min || x > x_max {
            continue;
        }
        let d = s.radius() - result.model.rest_radius(i);
        if d.abs() > best.abs() {
            best = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxKind;
    use crate::integrate::SchemeOrder;
    use crate::reconstruction::SlopeKind;
    use crate::well_balanced::FrictionTreatment;
    use approx::assert_relative_eq;

    fn rest_scenario() -> Scenario {
        Scenario {
            name: "test".into(),
            n_cells: 20,
            length: 0.02,
            x_left: 0.0,
            physics: Physics {
                k: 1e8,
                rho: 1060.0,
                p0: 0.0,
                cf: 0.0,
            },
            profile: RestProfile::Aneurism {
                radius: 4e-3,
                delta_r: 5e-4,
                x: [0.004, 0.008, 0.012, 0.016],
            },
            initial: InitialCondition::Rest,
            boundaries: Boundaries::non_reflecting(),
            scheme: Scheme::first_order(FluxKind::Hll),
            t_end: 1e-3,
            snapshots: vec![0.0, 5e-4],
            reference: Reference::Rest,
        }
    }

    #[test]
    fn profiles_are_continuous() {
        let p = RestProfile::Aneurism {
            radius: 4e-3,
            delta_r: 1e-3,
            x: [1e-2, 3.05e-2, 4.95e-2, 7e-2],
        };
        for x in [1e-2, 3.05e-2, 4.95e-2, 7e-2] {
            assert_relative_eq!(p.radius(x - 1e-12), p.radius(x + 1e-12), max_relative = 1e-9);
        }
        assert_eq!(p.radius(0.0), 4e-3);
        assert_eq!(p.radius(0.04), 5e-3);
        let t = RestProfile::Taper {
            r_upstream: 5e-3,
            r_downstream: 4e-3,
            x1: 0.076,
            x2: 0.08,
        };
        assert_eq!(t.radius(0.0), 5e-3);
        assert_eq!(t.radius(0.1), 4e-3);
        assert_relative_eq!(t.radius(0.078), 4.5e-3, max_relative = 1e-12);
    }

    #[test]
    fn run_lands_on_snapshots_and_keeps_rest() {
        let sc = rest_scenario();
        let r = run(&sc).unwrap();
        let times: Vec<f64> = r.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 5e-4, 1e-3]);
        assert_eq!(r.max_velocity, 0.0);
        let oracle = sc.oracle().unwrap().unwrap();
        assert_eq!(l1_error(&r, &oracle, Field::Area, 1e-3).unwrap(), 0.0);
        assert!(matches!(l1_error(&r, &oracle, Field::Area, 7e-4), Err(Error::MissingSnapshot(_))));
        assert_eq!(r.volume_drift(), 0.0);
    }

    #[test]
    fn zero_duration_returns_initial_state() {
        let sc = Scenario {
            t_end: 0.0,
            snapshots: vec![0.0],
            initial: InitialCondition::SinePulse {
                eps: 0.01,
                start: 0.005,
                end: 0.015,
            },
            ..rest_scenario()
        };
        let r = run(&sc).unwrap();
        assert_eq!(r.snapshots.len(), 1);
        let grid = sc.grid().unwrap();
        assert_eq!(r.snapshots[0].states, sc.initial_states(&grid, &sc.model().unwrap()));
        assert!(r.steps.is_empty());
    }

    #[test]
    fn l1_error_of_constant_offset() {
        let sc = rest_scenario();
        let mut r = run(&sc).unwrap();
        let oracle = sc.oracle().unwrap().unwrap();
        for s in &mut r.snapshots.last_mut().unwrap().states {
            s.q += 1e-7;
        }
        assert_relative_eq!(l1_error(&r, &oracle, Field::Discharge, 1e-3).unwrap(), 1e-7 * 0.02, max_relative = 1e-12);
    }

    #[test]
    fn regression_of_exact_power_law() {
        let rows = vec![(50, 1.0 / 50.0), (100, 1.0 / 100.0), (200, 1.0 / 200.0), (400, 1.0 / 400.0)];
        let st = Study::from_rows(Field::Discharge, ComparisonKind::Convergence, rows).unwrap();
        assert_relative_eq!(st.slope, -1.0, max_relative = 1e-12);
        assert!(st.intercept.abs() < 1e-12);
    }

    #[test]
    fn runs_are_deterministic() {
        let sc = Scenario {
            initial: InitialCondition::SinePulse {
                eps: 0.01,
                start: 0.005,
                end: 0.015,
            },
            scheme: Scheme {
                friction: FrictionTreatment::SemiImplicit,
                order: SchemeOrder::Second(SlopeKind::Muscl),
                ..Scheme::default()
            },
            physics: Physics {
                cf: 0.0002,
                ..rest_scenario().physics
            },
            ..rest_scenario()
        };
        assert_eq!(run(&sc).unwrap(), run(&sc).unwrap());
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let sc = Scenario {
            snapshots: vec![2.0],
            ..rest_scenario()
        };
        assert!(run(&sc).is_err());
        let sc = Scenario {
            reference: Reference::Tourniquet,
            ..rest_scenario()
        };
        assert!(sc.oracle().is_err());
        assert!(convergence_study(&rest_scenario(), &[10, 20], Field::Area).is_err());
    }

    #[test]
    fn peak_deviation_sign() {
        let sc = Scenario {
            t_end: 0.0,
            snapshots: vec![],
            profile: RestProfile::Uniform { radius: 4e-3 },
            initial: InitialCondition::SinePulse {
                eps: 0.01,
                start: 0.005,
                end: 0.015,
            },
            ..rest_scenario()
        };
        let r = run(&sc).unwrap();
        let d = peak_radius_deviation(&r, r.last(), 0.0, 0.02);
        assert!(d > 0.0 && d <= 4e-5);
        assert_relative_eq!(d, 4e-5, max_relative = 2e-2);
    }
}
