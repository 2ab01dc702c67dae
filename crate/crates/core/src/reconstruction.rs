//! Second-order linear reconstruction: minmod limiter, MUSCL / ENO / modified
//! ENO slopes, and the velocity reconstruction that keeps the cell discharge.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::State;

pub const DEFAULT_THETA_ENO: f64 = 0.25;
pub const DEFAULT_THETA_ENOM: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlopeKind {
    Muscl,
    Eno { theta: f64 },
    EnoMod { theta_eno: f64, theta_enom: f64 },
}

impl SlopeKind {
    pub fn eno() -> Self {
        SlopeKind::Eno { theta: DEFAULT_THETA_ENO }
    }

    pub fn eno_mod() -> Self {
        SlopeKind::EnoMod {
            theta_eno: DEFAULT_THETA_ENO,
            theta_enom: DEFAULT_THETA_ENOM,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SlopeKind::Muscl => "muscl",
            SlopeKind::Eno { .. } => "eno",
            SlopeKind::EnoMod { .. } => "enom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |key: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(key, format!("{v} is outside [0, 1]")))
            }
        };
        match *self {
            SlopeKind::Muscl => Ok(()),
            SlopeKind::Eno { theta } => check("scheme.theta_eno", theta),
            SlopeKind::EnoMod { theta_eno, theta_enom } => {
                check("scheme.theta_eno", theta_eno)?;
                check("scheme.theta_enom", theta_enom)
            }
        }
    }
}

impl fmt::Display for SlopeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn minmod(x: f64, y: f64) -> f64 {
    if x >= 0.0 && y >= 0.0 {
        x.min(y)
    } else if x <= 0.0 && y <= 0.0 {
        x.max(y)
    } else {
        0.0
    }
}

/// Limited slope of the middle value of a five-point stencil
/// `[s_{i-2}, s_{i-1}, s_i, s_{i+1}, s_{i+2}]`.
pub fn slope(kind: SlopeKind, s: [f64; 5], dx: f64) -> f64 {
    let muscl = || minmod((s[2] - s[1]) / dx, (s[3] - s[2]) / dx);
    let eno = |theta: f64| {
        let dx2 = dx * dx;
        let d2m = (s[2] - 2.0 * s[1] + s[0]) / dx2;
        let d2c = (s[3] - 2.0 * s[2] + s[1]) / dx2;
        let d2p = (s[4] - 2.0 * s[3] + s[2]) / dx2;
        let left = minmod(d2m, d2c);
        let right = minmod(d2c, d2p);
        // one-sided differences shifted from the interfaces to the centre
        minmod(
            (s[2] - s[1]) / dx + theta * 0.5 * dx * left,
            (s[3] - s[2]) / dx - theta * 0.5 * dx * right,
        )
    };
    match kind {
        SlopeKind::Muscl => muscl(),
        SlopeKind::Eno { theta } => eno(theta),
        SlopeKind::EnoMod { theta_eno, theta_enom } => minmod(eno(theta_eno), 2.0 * theta_enom * muscl()),
    }
}

/// Values of a reconstructed cell at one of its faces.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Trace {
    pub a: f64,
    pub u: f64,
    /// `sqrt(A) - sqrt(A0)`
    pub psi: f64,
}

impl Trace {
    pub fn constant(s: State, sqrt_a0: f64) -> Result<Self> {
        Ok(Trace {
            a: s.a,
            u: s.velocity()?,
            psi: s.a.sqrt() - sqrt_a0,
        })
    }

    pub fn sqrt_a0(&self) -> f64 {
        self.a.max(0.0).sqrt() - self.psi
    }

    pub fn discharge(&self) -> f64 {
        self.a * self.u
    }
}

/// Face traces per cell: `left[i]` sits at `i-1/2+`, `right[i]` at `i+1/2-`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellTraces {
    pub left: Vec<Trace>,
    pub right: Vec<Trace>,
}

fn stencil(v: &[f64], i: usize) -> [f64; 5] {
    let n = v.len() as isize;
    let at = |k: isize| v[(i as isize + k).clamp(0, n - 1) as usize];
    [at(-2), at(-1), at(0), at(1), at(2)]
}

/// Linear reconstruction of `A`, `u` and `Psi` on every cell. The two
/// outermost cells keep zero slopes.
pub fn reconstruct_cells(states: &[State], sqrt_a0: &[f64], kind: SlopeKind, dx: f64) -> Result<CellTraces> {
    let n = states.len();
    debug_assert_eq!(n, sqrt_a0.len());
    let mut a = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    for (s, &r0) in states.iter().zip(sqrt_a0) {
        a.push(s.a);
        u.push(s.velocity()?);
        psi.push(s.a.sqrt() - r0);
    }

    let mut out = CellTraces {
        left: Vec::with_capacity(n),
        right: Vec::with_capacity(n),
    };
    for i in 0..n {
        if i == 0 || i + 1 == n {
            let t = Trace { a: a[i], u: u[i], psi: psi[i] };
            out.left.push(t);
            out.right.push(t);
            continue;
        }
        let half = 0.5 * dx;
        let da = half * slope(kind, stencil(&a, i), dx);
        let du = half * slope(kind, stencil(&u, i), dx);
        let dpsi = half * slope(kind, stencil(&psi, i), dx);
        let (a_l, a_r) = (a[i] - da, a[i] + da);
        out.left.push(Trace {
            a: a_l,
            u: u[i] - a_r / a[i] * du,
            psi: psi[i] - dpsi,
        });
        out.right.push(Trace {
            a: a_r,
            u: u[i] + a_l / a[i] * du,
            psi: psi[i] + dpsi,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const KINDS: [SlopeKind; 3] = [
        SlopeKind::Muscl,
        SlopeKind::Eno { theta: 0.25 },
        SlopeKind::EnoMod { theta_eno: 0.25, theta_enom: 0.5 },
    ];

    #[test]
    fn minmod_definition() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-1.0, 2.0), 0.0);
        assert_eq!(minmod(-1.0, -3.0), -1.0);
        assert_eq!(minmod(0.0, -3.0), 0.0);
    }

    #[test]
    fn slopes_of_simple_stencils() {
        for kind in KINDS {
            assert_eq!(slope(kind, [2.0; 5], 0.1), 0.0);
        }
        let dx = 0.01;
        let linear: [f64; 5] = std::array::from_fn(|k| 3.0 * (k as f64 * dx) + 1.0);
        assert_relative_eq!(slope(SlopeKind::Muscl, linear, dx), 3.0, max_relative = 1e-12);
        assert_relative_eq!(slope(SlopeKind::Eno { theta: 1.0 }, linear, dx), 3.0, max_relative = 1e-12);
        assert_relative_eq!(slope(SlopeKind::eno(), linear, dx), 3.0, max_relative = 1e-12);
        assert_eq!(slope(SlopeKind::Muscl, [0.0, 1.0, 2.0, 1.0, 0.0], 1.0), 0.0);
    }

    #[test]
    fn modified_eno_reduces_to_muscl() {
        // zero second differences and theta_enom = 1
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        let k = SlopeKind::EnoMod { theta_eno: 0.25, theta_enom: 1.0 };
        assert_eq!(slope(k, s, 1.0), slope(SlopeKind::Muscl, s, 1.0));
    }

    #[test]
    fn eno_slope_is_second_order() {
        let err = |n: usize| {
            let dx = 1.0 / n as f64;
            (0..n)
                .map(|i| {
                    let x = (i as f64 + 0.5) * dx;
                    let st: [f64; 5] = std::array::from_fn(|k| (2.0 * (x + (k as f64 - 2.0) * dx)).sin());
                    (slope(SlopeKind::Eno { theta: 1.0 }, st, dx) - 2.0 * (2.0 * x).cos()).abs()
                })
                .fold(0.0, f64::max)
        };
        let order = (err(100) / err(400)).ln() / 4f64.ln();
        assert!(order >= 1.8, "observed order {order}");
    }

    #[test]
    fn uniform_states_have_flat_traces() {
        let states = vec![State::new(5e-5, 1e-6); 6];
        let r0 = vec![(4.9e-5f64).sqrt(); 6];
        for kind in KINDS {
            let t = reconstruct_cells(&states, &r0, kind, 1e-3).unwrap();
            for i in 0..6 {
                assert_eq!(t.left[i].a, 5e-5);
                assert_eq!(t.right[i].a, 5e-5);
                assert_eq!(t.left[i].u, 1e-6 / 5e-5);
                assert_eq!(t.right[i].sqrt_a0(), t.left[i].sqrt_a0());
            }
        }
    }

    #[test]
    fn linear_area_is_interpolated() {
        let dx = 1e-3;
        let states: Vec<State> = (0..8).map(|i| State::new(5e-5 + 1e-6 * i as f64, 0.0)).collect();
        let r0 = vec![7e-3; 8];
        let t = reconstruct_cells(&states, &r0, SlopeKind::Muscl, dx).unwrap();
        for i in 1..7 {
            assert_relative_eq!(t.right[i].a, 5e-5 + 1e-6 * (i as f64 + 0.5), max_relative = 1e-12);
            assert_relative_eq!(t.left[i].a, 5e-5 + 1e-6 * (i as f64 - 0.5), max_relative = 1e-12);
        }
        assert_eq!(t.left[0].a, states[0].a);
        assert_eq!(t.right[7].a, states[7].a);
    }

    #[test]
    fn zero_area_is_rejected() {
        let states = vec![State::new(5e-5, 0.0), State::new(0.0, 0.0), State::new(5e-5, 0.0)];
        assert!(reconstruct_cells(&states, &[7e-3; 3], SlopeKind::Muscl, 1e-3).is_err());
    }

    fn cells() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((3e-5f64..8e-5, -3e-5f64..3e-5), 5..40)
    }

    proptest! {
        #[test]
        fn traces_conserve_area_and_discharge(cells in cells(), which in 0usize..3) {
            let states: Vec<State> = cells.iter().map(|&(a, q)| State::new(a, q)).collect();
            let r0: Vec<f64> = states.iter().map(|s| s.a.sqrt() * 0.98).collect();
            let t = reconstruct_cells(&states, &r0, KINDS[which], 1e-3).unwrap();
            for (i, s) in states.iter().enumerate() {
                let (l, r) = (t.left[i], t.right[i]);
                let a_mean = 0.5 * (l.a + r.a);
                prop_assert!((a_mean - s.a).abs() <= 1e-14 * s.a);
                let q_mean = 0.5 * (l.discharge() + r.discharge());
                let scale = s.q.abs().max(s.a * r.u.abs().max(l.u.abs()));
                prop_assert!((q_mean - s.q).abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE));
            }
        }
    }
}
