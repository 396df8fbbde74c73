use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::thermodynamics::{gibbs_residual, log_spaced, stability_check, GasModel, ThermoState};

/// Checks of one branch of one equation of state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EosBranchReport {
    pub gamma: f64,
    pub ideal: bool,
    pub samples: usize,
    /// Largest Gibbs residual at the base step.
    pub max_gibbs: f64,
    /// `log₂` of the summed residuals at the base step over those at half the step.
    pub gibbs_order: f64,
    /// Largest relative mismatch of `p = (γ−1)ρe`.
    pub max_identity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EosSuiteReport {
    pub fd_step: f64,
    pub branches: Vec<EosBranchReport>,
    pub min_stability_margin: f64,
    pub max_entropy_slope_deviation: f64,
    /// `S` strictly decreasing and positive on the sampled grid.
    pub entropy_monotone: bool,
    /// `S(10⁶ Z̲)`, largest over the models.
    pub entropy_tail: f64,
    /// Largest relative deviation of `P(Z)/Z^γ` from `1/(γ Z̲^γ)` for `Z ≥ 100 Z̲`.
    pub pressure_tail_deviation: f64,
}

impl EosSuiteReport {
    pub fn passed(&self) -> bool {
        self.branches.iter().all(|b| b.max_gibbs < 1e-6 && (1.8..=2.2).contains(&b.gibbs_order) && b.max_identity < 1e-13)
            && self.min_stability_margin > 0.0
            && self.max_entropy_slope_deviation < 1e-10
            && self.entropy_monotone
            && self.entropy_tail < 1e-5
            && self.pressure_tail_deviation < 0.01
    }
}

/// Random-state verification of the equation of state for
/// `γ ∈ {1.4, 5/3, 2}` with `Z̲ = 1`.
pub fn eos_suite(seed: u64, samples_per_branch: usize, fd_step: f64) -> Result<EosSuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zt = 1.0;
    let mut rep = EosSuiteReport {
        fd_step,
        branches: Vec::new(),
        min_stability_margin: f64::INFINITY,
        max_entropy_slope_deviation: 0.0,
        entropy_monotone: true,
        entropy_tail: 0.0,
        pressure_tail_deviation: 0.0,
    };
    for gamma in [1.4, 5.0 / 3.0, 2.0] {
        let gas = GasModel::new(gamma, zt)?;
        for ideal in [true, false] {
            let mut b =
                EosBranchReport { gamma, ideal, samples: samples_per_branch, max_gibbs: 0.0, gibbs_order: f64::NAN, max_identity: 0.0 };
            let (mut coarse, mut fine) = (0.0, 0.0);
            for _ in 0..samples_per_branch {
                let state = loop {
                    let rho = rng.gen_range(0.3f64.ln()..8.0f64.ln()).exp();
                    let theta = rng.gen_range(0.25f64.ln()..4.0f64.ln()).exp();
                    let z = gas.compressibility(ThermoState { rho, theta });
                    // keep clear of the seam by more than the difference stencil
                    if (ideal && z < 0.8 * zt) || (!ideal && z > 1.25 * zt) {
                        break ThermoState { rho, theta };
                    }
                };
                let (r1, r2) = gibbs_residual(&gas, state, fd_step)?;
                let (h1, h2) = gibbs_residual(&gas, state, 0.5 * fd_step)?;
                let r = r1.abs().max(r2.abs());
                b.max_gibbs = b.max_gibbs.max(r);
                coarse += r1.abs() + r2.abs();
                fine += h1.abs() + h2.abs();
                let p = gas.pressure(state);
                let e = gas.internal_energy(state);
                b.max_identity = b.max_identity.max((p - (gamma - 1.0) * state.rho * e).abs() / p);
            }
            b.gibbs_order = (coarse / fine).log2();
            rep.branches.push(b);
        }
        let zs = log_spaced(1e-3 * zt, 1e3 * zt, 2001);
        let st = stability_check(&gas, &zs)?;
        rep.min_stability_margin = rep.min_stability_margin.min(st.min_margin);
        rep.max_entropy_slope_deviation = rep.max_entropy_slope_deviation.max(st.max_entropy_slope_deviation);
        let s: Vec<f64> = zs.iter().map(|&z| gas.structure_s(z)).collect();
        rep.entropy_monotone &= s.windows(2).all(|w| w[1] < w[0]) && s.iter().all(|&v| v > 0.0);
        rep.entropy_tail = rep.entropy_tail.max(gas.structure_s(1e6 * zt));
        let limit = 1.0 / (gamma * zt.powf(gamma));
        for z in log_spaced(100.0 * zt, 1e6 * zt, 50) {
            let dev = (gas.structure_p(z) / z.powf(gamma) - limit).abs() / limit;
            rep.pressure_tail_deviation = rep.pressure_tail_deviation.max(dev);
        }
    }
    Ok(rep)
}
