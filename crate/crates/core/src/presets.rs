//! Built-in scenarios for the verification cases.

use std::f64::consts::PI;

use crate::boundary::{Boundaries, BoundaryKind, Signal};
use crate::driver::{InitialCondition, Physics, Reference, RestProfile, Scenario};
use crate::error::{Error, Result};
use crate::flux::FluxKind;
use crate::integrate::{Scheme, SchemeOrder};
use crate::model::VesselModel;
use crate::oracles::damped_dispersion;
use crate::reconstruction::SlopeKind;
use crate::well_balanced::{FrictionTreatment, SourceTreatment};

pub const NAMES: [&str; 10] = [
    "tourniquet",
    "wave",
    "dead-man",
    "expansion-to",
    "expansion-from",
    "aneurism",
    "damping",
    "damping-alpha15",
    "damping-alpha5",
    "damping-alpha1",
];

pub const RHO: f64 = 1060.0;
pub const DAMPING_OMEGA: f64 = 2.0 * PI / 0.5;
pub const DAMPING_Q_AMP: f64 = 3.45e-7;
pub const DAMPING_LENGTH: f64 = 3.0;

fn physics(k: f64, cf: f64) -> Physics {
    Physics { k, rho: RHO, p0: 0.0, cf }
}

fn first_order() -> Scheme {
    Scheme {
        friction: FrictionTreatment::SemiImplicit,
        ..Scheme::first_order(FluxKind::Hll)
    }
}

/// Quarter-period snapshots plus the end time.
fn quarters(t_end: f64) -> Vec<f64> {
    (0..=4).map(|q| t_end * q as f64 / 4.0).collect()
}

pub fn tourniquet() -> Scenario {
    let length = 0.08;
    Scenario {
        name: "tourniquet".into(),
        n_cells: 100,
        length,
        x_left: 0.0,
        physics: physics(1e7, 0.0),
        profile: RestProfile::Uniform { radius: 4e-3 },
        initial: InitialCondition::Riemann {
            r_left: 5e-3,
            r_right: 4e-3,
            x0: 0.5 * length,
        },
        boundaries: Boundaries::non_reflecting(),
        scheme: Scheme {
            cfl: Some(1.0),
            ..first_order()
        },
        t_end: 0.005,
        snapshots: vec![0.0],
        reference: Reference::Tourniquet,
    }
}

pub fn wave() -> Scenario {
    let length = 0.16;
    let t_end = 0.008;
    Scenario {
        name: "wave".into(),
        n_cells: 200,
        length,
        x_left: 0.0,
        physics: physics(1e8, 0.0),
        profile: RestProfile::Uniform { radius: 4e-3 },
        initial: InitialCondition::SinePulse {
            eps: 5e-3,
            start: 0.4 * length,
            end: 0.6 * length,
        },
        boundaries: Boundaries::non_reflecting(),
        scheme: first_order(),
        t_end,
        snapshots: quarters(t_end),
        reference: Reference::Dalembert,
    }
}

pub fn dead_man() -> Scenario {
    Scenario {
        name: "dead-man".into(),
        n_cells: 50,
        length: 0.14,
        x_left: 0.0,
        physics: physics(1e8, 0.0),
        profile: RestProfile::Aneurism {
            radius: 4e-3,
            delta_r: 1e-3,
            x: [1.0e-2, 3.05e-2, 4.95e-2, 7.0e-2],
        },
        initial: InitialCondition::Rest,
        boundaries: Boundaries::non_reflecting(),
        scheme: first_order(),
        t_end: 5.0,
        snapshots: vec![0.0],
        reference: Reference::Rest,
    }
}

fn expansion(name: &str, start: f64, end: f64) -> Scenario {
    let length = 0.16;
    let t_end = 8.0e-3;
    Scenario {
        name: name.into(),
        n_cells: 1500,
        length,
        x_left: 0.0,
        physics: physics(1e8, 0.0),
        profile: RestProfile::Taper {
            r_upstream: 5e-3,
            r_downstream: 4e-3,
            x1: 19.0 * length / 40.0,
            x2: 0.5 * length,
        },
        initial: InitialCondition::SinePulse {
            eps: 5e-3,
            start: start * length,
            end: end * length,
        },
        boundaries: Boundaries::non_reflecting(),
        scheme: Scheme {
            order: SchemeOrder::Second(SlopeKind::Muscl),
            ..first_order()
        },
        t_end,
        snapshots: quarters(t_end),
        reference: Reference::None,
    }
}

/// Pulse in the narrow part travelling back into the wide part.
pub fn expansion_to() -> Scenario {
    expansion("expansion-to", 0.65, 0.85)
}

/// Pulse in the wide part travelling into the narrow part.
pub fn expansion_from() -> Scenario {
    expansion("expansion-from", 0.15, 0.35)
}

pub fn aneurism() -> Scenario {
    let length = 0.16;
    let t_end = 8.0e-3;
    Scenario {
        name: "aneurism".into(),
        n_cells: 1500,
        length,
        x_left: 0.0,
        physics: physics(1e8, 0.0),
        profile: RestProfile::Aneurism {
            radius: 4e-3,
            delta_r: 1e-3,
            x: [9.0 * length / 40.0, 0.25 * length, 0.75 * length, 31.0 * length / 40.0],
        },
        initial: InitialCondition::SinePulse {
            eps: 5e-3,
            start: 0.45 * length,
            end: 0.55 * length,
        },
        boundaries: Boundaries::non_reflecting(),
        scheme: Scheme {
            order: SchemeOrder::Second(SlopeKind::Muscl),
            ..first_order()
        },
        t_end,
        snapshots: quarters(t_end),
        reference: Reference::None,
    }
}

/// Sinusoidal inflow at `x = 0`; the damped analytic discharge is imposed at
/// `x = L`.
pub fn damping(name: &str, cf: f64) -> Scenario {
    let r0 = 4e-3;
    let p = physics(1e8, cf);
    let m = VesselModel::uniform(p.k, p.rho, p.p0, p.cf, r0, 1).expect("valid damping parameters");
    let root = damped_dispersion(DAMPING_OMEGA, &m, r0);
    Scenario {
        name: name.into(),
        n_cells: 50,
        length: DAMPING_LENGTH,
        x_left: 0.0,
        physics: p,
        profile: RestProfile::Uniform { radius: r0 },
        initial: InitialCondition::Rest,
        boundaries: Boundaries {
            left: BoundaryKind::GivenDischarge(Signal::Sine {
                offset: 0.0,
                amplitude: DAMPING_Q_AMP,
                omega: DAMPING_OMEGA,
            }),
            right: BoundaryKind::GivenDischarge(Signal::DampedWave {
                x: DAMPING_LENGTH,
                omega: DAMPING_OMEGA,
                amplitude: DAMPING_Q_AMP,
                k_r: root.k_r,
                k_i: root.k_i,
            }),
        },
        scheme: Scheme {
            source: SourceTreatment::Hydrostatic,
            ..first_order()
        },
        t_end: 25.0,
        snapshots: vec![],
        reference: Reference::DampedWave {
            omega: DAMPING_OMEGA,
            q_amp: DAMPING_Q_AMP,
        },
    }
}

pub fn preset(name: &str) -> Result<Scenario> {
    Ok(match name {
        "tourniquet" => tourniquet(),
        "wave" => wave(),
        "dead-man" | "deadman" => dead_man(),
        "expansion-to" => expansion_to(),
        "expansion-from" => expansion_from(),
        "aneurism" => aneurism(),
        "damping" => damping("damping", 0.0),
        "damping-alpha15" => damping("damping-alpha15", 0.000022),
        "damping-alpha5" => damping("damping-alpha5", 0.000202),
        "damping-alpha1" => damping("damping-alpha1", 0.005053),
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset `{other}`; available: {}", NAMES.join(", ")),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in NAMES {
            let sc = preset(name).unwrap();
            assert_eq!(sc.name, name);
            sc.validate().unwrap();
        }
        assert!(preset("windkessel").is_err());
    }

    #[test]
    fn reference_values() {
        let t = tourniquet();
        assert_eq!((t.n_cells, t.scheme.cfl_number(), t.t_end), (100, 1.0, 0.005));
        let d = dead_man();
        assert_eq!((d.n_cells, d.length, d.t_end), (50, 0.14, 5.0));
        let m = d.model().unwrap();
        let r: Vec<f64> = (0..50).map(|i| m.rest_radius(i)).collect();
        assert!(r.iter().cloned().fold(f64::MIN, f64::max) <= 5e-3 + 1e-15);
        assert!(r.iter().cloned().fold(f64::MAX, f64::min) >= 4e-3 - 1e-15);
        assert_eq!(expansion_from().n_cells, 1500);
        assert_eq!(damping("d", 0.000202).physics.cf, 0.000202);
    }

    #[test]
    fn womersley_numbers_of_damping_presets() {
        for (name, alpha) in [("damping-alpha15", 15.15), ("damping-alpha5", 5.0), ("damping-alpha1", 1.0)] {
            let m = preset(name).unwrap().model().unwrap();
            let a = m.womersley(DAMPING_OMEGA, 0);
            assert!((a - alpha).abs() / alpha < 0.01, "{name}: {a}");
        }
    }
}
