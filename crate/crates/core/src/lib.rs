//! Finite-volume solver for the one-dimensional blood-flow equations in
//! conservative `(A, Q)` form, with a well-balanced treatment of variable rest
//! sections, four numerical fluxes, first- and second-order schemes, and
//! analytic reference solutions for verification.

pub mod boundary;
pub mod driver;
pub mod error;
pub mod flux;
pub mod integrate;
pub mod io;
pub mod model;
pub mod oracles;
pub mod presets;
pub mod reconstruction;
pub mod well_balanced;

pub use boundary::{Boundaries, BoundaryKind, Side, Signal, TimeSeries};
pub use driver::{convergence_study, l1_error, run, Field, RunResult, Scenario, Snapshot, Study};
pub use error::{Error, Result};
pub use flux::{numerical_flux, FluxKind};
pub use integrate::{Scheme, SchemeOrder, StepReport};
pub use model::{Flux, Grid, State, VesselModel};
pub use oracles::Oracle;
pub use reconstruction::SlopeKind;
pub use well_balanced::{FrictionTreatment, SourceTreatment};
