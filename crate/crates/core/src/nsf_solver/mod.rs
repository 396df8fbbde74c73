//! Explicit finite-volume solver for the scaled Navier-Stokes-Fourier system
//! with radiation on the periodic channel.
//!
//! Convective fluxes use MUSCL reconstruction of `(ρ, u, v, p)` with a
//! selectable limiter and an HLLC (default) or Rusanov Riemann solver.
//! Viscous and heat fluxes are central. Time integration is two-stage SSP
//! Runge-Kutta.

mod field;
mod flux;
mod grid;
mod run;
mod scheme;

pub use field::{BoundaryKind, FluidField, Primitive};
pub use flux::{numerical_flux, FaceState, FluxKind, Limiter};
pub use grid::{Grid, GHOST};
pub use run::{run, BasicSample, BasicSeries, Monitor, RunConfig, RunOutcome, StepView};
pub use scheme::{
    discrete_entropy_production, entropy_production_integral, scheme_tolerance, Dissipation, EntropyBudget, SchemeOptions, Solver,
};

use crate::error::{Error, Result};
use crate::thermodynamics::GasModel;

/// Cell state from conservative variables `(ρ, ρu, ρv, E)` where
/// `E = ½ρ|u|² + ρe + aθ⁴` and `a` is the gas model's radiation coefficient.
pub fn primitive_from_conservative(gas: &GasModel, cons: [f64; 4], theta_guess: f64) -> Result<Primitive> {
    let [rho, mx, my, energy] = cons;
    if !(rho > 0.0) {
        return Err(Error::NonPhysicalState(format!("density {rho}")));
    }
    let u = [mx / rho, my / rho];
    let rho_e = energy - 0.5 * rho * (u[0] * u[0] + u[1] * u[1]);
    let theta = gas.temperature_from_energy(rho, rho_e, theta_guess)?;
    Ok(Primitive { rho, u, theta })
}
