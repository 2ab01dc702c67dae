//! Browser bindings: three small experiments on top of `artery1d`.
//!
//! The plain functions (`dead_man`, `tourniquet`, `expansion`) return Rust
//! results and are what the native tests call; the `#[wasm_bindgen]` wrappers
//! only convert errors into JS exceptions.

use std::f64::consts::PI;

use artery1d::driver::RestProfile;
use artery1d::oracles::{solve_tourniquet, tourniquet_profile, transmission_reflection};
use artery1d::{presets, run, FluxKind, Result, RunResult, Scenario, SchemeOrder, SlopeKind, Snapshot, SourceTreatment};
use wasm_bindgen::prelude::*;

fn order(second: bool) -> SchemeOrder {
    if second {
        SchemeOrder::Second(SlopeKind::Muscl)
    } else {
        SchemeOrder::First
    }
}

fn centers(res: &RunResult) -> Vec<f64> {
    res.grid.centers().collect()
}

fn radius_deviation(res: &RunResult, snap: &Snapshot) -> Vec<f64> {
    snap.states.iter().enumerate().map(|(i, s)| s.radius() - res.model.rest_radius(i)).collect()
}

/// Cell-centred curves for plotting. `a` is the computed curve, `b` the
/// comparison curve (exact solution or rest state).
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Curves {
    x: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    scalar: f64,
}

#[wasm_bindgen]
impl Curves {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn a(&self) -> Vec<f64> {
        self.a.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn b(&self) -> Vec<f64> {
        self.b.clone()
    }

    /// max |u| for the dead man, L1 error of R for the tourniquet.
    #[wasm_bindgen(getter)]
    pub fn scalar(&self) -> f64 {
        self.scalar
    }
}

/// Velocity along the aneurism at rest after `t_end` seconds: `a` is the
/// velocity, `b` the rest radius.
pub fn dead_man(cells: usize, t_end: f64, hydrostatic: bool, second_order: bool) -> Result<Curves> {
    let mut sc = presets::dead_man().with_cells(cells);
    sc.t_end = t_end;
    sc.scheme.source = if hydrostatic { SourceTreatment::Hydrostatic } else { SourceTreatment::Naive };
    sc.scheme.order = order(second_order);
    sc.validate()?;
    let res = run(&sc)?;
    let u = res.last().states.iter().map(|s| s.velocity()).collect::<Result<Vec<_>>>()?;
    Ok(Curves {
        x: centers(&res),
        a: u,
        b: (0..cells).map(|i| res.model.rest_radius(i)).collect(),
        scalar: res.max_velocity,
    })
}

/// Radius of the dam-break problem at `t_end`, computed and exact.
pub fn tourniquet(cells: usize, flux: &str, second_order: bool) -> Result<Curves> {
    let mut sc = presets::tourniquet().with_cells(cells);
    sc.scheme.flux = flux.parse::<FluxKind>()?;
    sc.scheme.order = order(second_order);
    sc.validate()?;
    let res = run(&sc)?;
    let oracle = sc.oracle()?.expect("tourniquet has a reference");
    let m = &res.model;
    let x = centers(&res);
    let exact: Vec<f64> = x.iter().map(|&xi| oracle.eval(xi, sc.t_end, m).radius()).collect();
    let numeric: Vec<f64> = res.last().states.iter().map(|s| s.radius()).collect();
    let l1 = numeric.iter().zip(&exact).map(|(n, e)| (n - e).abs()).sum::<f64>() * res.grid.dx;
    Ok(Curves { x, a: numeric, b: exact, scalar: l1 })
}

/// Pulse crossing a change of section.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Expansion {
    x: Vec<f64>,
    before: Vec<f64>,
    after: Vec<f64>,
    rest: Vec<f64>,
    tr: f64,
    re: f64,
    tr_exact: f64,
    re_exact: f64,
}

#[wasm_bindgen]
impl Expansion {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    /// Radius deviation before the pulse reaches the taper.
    #[wasm_bindgen(getter)]
    pub fn before(&self) -> Vec<f64> {
        self.before.clone()
    }

    /// Radius deviation once transmitted and reflected pulses have separated.
    #[wasm_bindgen(getter)]
    pub fn after(&self) -> Vec<f64> {
        self.after.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn rest(&self) -> Vec<f64> {
        self.rest.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn tr(&self) -> f64 {
        self.tr
    }

    #[wasm_bindgen(getter)]
    pub fn re(&self) -> f64 {
        self.re
    }

    #[wasm_bindgen(getter)]
    pub fn tr_exact(&self) -> f64 {
        self.tr_exact
    }

    #[wasm_bindgen(getter)]
    pub fn re_exact(&self) -> f64 {
        self.re_exact
    }
}

fn extreme(x: &[f64], d: &[f64], lo: f64, hi: f64, positive: bool) -> f64 {
    let inside = x.iter().zip(d).filter(|(xi, _)| **xi >= lo && **xi <= hi).map(|(_, v)| *v);
    if positive {
        inside.fold(f64::MIN, f64::max)
    } else {
        inside.fold(f64::MAX, f64::min)
    }
}

/// `wide_to_narrow` starts the pulse in the wide part.
pub fn expansion(cells: usize, wide_to_narrow: bool) -> Result<Expansion> {
    let (t_in, t_out) = (1.2e-3, 5.5e-3);
    let base: Scenario = if wide_to_narrow { presets::expansion_from() } else { presets::expansion_to() };
    let mut sc = base.with_cells(cells);
    sc.t_end = t_out;
    sc.snapshots = vec![t_in];
    sc.validate()?;
    let RestProfile::Taper { r_upstream, r_downstream, x1, x2 } = sc.profile else {
        unreachable!("expansion presets use a taper")
    };
    let res = run(&sc)?;
    let x = centers(&res);
    let before = radius_deviation(&res, res.snapshot_at(t_in)?);
    let after = radius_deviation(&res, res.last());
    let (a_up, a_down) = (PI * r_upstream * r_upstream, PI * r_downstream * r_downstream);
    let (a_inc, a_other, inc_range, tr_range, re_range) = if wide_to_narrow {
        (a_up, a_down, (0.0, x1), (x2, sc.length), (0.0, x1))
    } else {
        (a_down, a_up, (x2, sc.length), (0.0, x1), (x2, sc.length))
    };
    let (tr_exact, re_exact) = transmission_reflection(a_inc, a_other, &res.model);
    let inc = extreme(&x, &before, inc_range.0, inc_range.1, true);
    let tr = extreme(&x, &after, tr_range.0, tr_range.1, true) / inc;
    let re = extreme(&x, &after, re_range.0, re_range.1, re_exact > 0.0) / inc;
    Ok(Expansion {
        rest: (0..cells).map(|i| res.model.rest_radius(i)).collect(),
        x,
        before,
        after,
        tr,
        re,
        tr_exact,
        re_exact,
    })
}

fn js(e: artery1d::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = deadMan)]
pub fn dead_man_js(cells: usize, t_end: f64, hydrostatic: bool, second_order: bool) -> std::result::Result<Curves, JsError> {
    dead_man(cells, t_end, hydrostatic, second_order).map_err(js)
}

#[wasm_bindgen(js_name = tourniquet)]
pub fn tourniquet_js(cells: usize, flux: &str, second_order: bool) -> std::result::Result<Curves, JsError> {
    tourniquet(cells, flux, second_order).map_err(js)
}

#[wasm_bindgen(js_name = expansion)]
pub fn expansion_js(cells: usize, wide_to_narrow: bool) -> std::result::Result<Expansion, JsError> {
    expansion(cells, wide_to_narrow).map_err(js)
}

/// Exact dam-break radius on its own, for drawing a fine reference curve.
#[wasm_bindgen(js_name = tourniquetExact)]
pub fn tourniquet_exact(points: usize) -> std::result::Result<Vec<f64>, JsError> {
    let sc = presets::tourniquet();
    let m = sc.model().map_err(js)?;
    let artery1d::driver::InitialCondition::Riemann { r_left, r_right, x0 } = sc.initial else {
        unreachable!("tourniquet starts from a Riemann problem")
    };
    let sol = solve_tourniquet(PI * r_left * r_left, PI * r_right * r_right, &m).map_err(js)?;
    let n = points.max(2);
    Ok((0..n)
        .map(|i| {
            let x = sc.length * i as f64 / (n - 1) as f64;
            tourniquet_profile(x - x0, sc.t_end, &sol, &m).radius()
        })
        .collect())
}
