use serde::{Deserialize, Serialize};

use super::grid::{Grid, GHOST};
use crate::error::{Error, Result};
use crate::thermodynamics::{GasModel, ThermoState};

/// Mechanical wall condition; walls are always thermally insulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Slip,
    #[serde(alias = "no-slip")]
    NoSlip,
}

impl std::str::FromStr for BoundaryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slip" => Ok(Self::Slip),
            "noslip" | "no-slip" => Ok(Self::NoSlip),
            other => Err(Error::InvalidParameter(format!("unknown boundary kind '{other}'"))),
        }
    }
}

/// Pointwise primitive state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: [f64; 2],
    pub theta: f64,
}

/// Cell-averaged state of the fluid on a [`Grid`], conservative variables
/// plus cached primitives (ghost layers filled after every refresh).
#[derive(Debug, Clone)]
pub struct FluidField {
    grid: Grid,
    bc: BoundaryKind,
    pub rho: Vec<f64>,
    pub mx: Vec<f64>,
    pub my: Vec<f64>,
    /// `½ρ|u|² + ρe + aθ⁴`.
    pub energy: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    /// Gas plus radiation pressure.
    pub p: Vec<f64>,
}

impl FluidField {
    /// Samples `data` at cell centers.
    pub fn initialize<F>(gas: &GasModel, grid: Grid, bc: BoundaryKind, data: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Primitive,
    {
        let n = grid.storage_len();
        let mut f = Self {
            grid,
            bc,
            rho: vec![0.0; n],
            mx: vec![0.0; n],
            my: vec![0.0; n],
            energy: vec![0.0; n],
            u: vec![0.0; n],
            v: vec![0.0; n],
            theta: vec![0.0; n],
            p: vec![0.0; n],
        };
        for (i, j) in grid.cells() {
            let (x, y) = grid.center(i, j);
            let q = data(x, y);
            let ok = q.rho > 0.0 && q.theta > 0.0 && q.rho.is_finite() && q.theta.is_finite();
            if !ok || !q.u.iter().all(|c| c.is_finite()) {
                return Err(Error::BoundsViolation(format!("initial state rho={}, theta={}, u={:?} at ({x}, {y})", q.rho, q.theta, q.u)));
            }
            let k = grid.idx(i, j);
            let state = ThermoState { rho: q.rho, theta: q.theta };
            f.rho[k] = q.rho;
            f.mx[k] = q.rho * q.u[0];
            f.my[k] = q.rho * q.u[1];
            f.energy[k] = 0.5 * q.rho * (q.u[0] * q.u[0] + q.u[1] * q.u[1]) + q.rho * gas.total_internal_energy(state);
            f.theta[k] = q.theta;
        }
        f.refresh(gas)?;
        Ok(f)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.bc
    }

    /// Recomputes primitives from the conservative variables (cached `theta`
    /// is the Newton guess) and fills ghost layers.
    pub fn refresh(&mut self, gas: &GasModel) -> Result<()> {
        let grid = self.grid;
        for (i, j) in grid.cells() {
            let k = grid.idx(i, j);
            let rho = self.rho[k];
            let (u, v) = (self.mx[k] / rho, self.my[k] / rho);
            let rho_e = self.energy[k] - 0.5 * rho * (u * u + v * v);
            if !(rho > 0.0) || !(rho_e > 0.0) || !rho_e.is_finite() {
                return Err(Error::PositivityFailure {
                    i: i as usize,
                    j: j as usize,
                    rho,
                    theta: if rho > 0.0 { rho_e / rho } else { f64::NAN },
                });
            }
            let theta = gas.temperature_from_energy(rho, rho_e, self.theta[k]).map_err(|_| Error::PositivityFailure {
                i: i as usize,
                j: j as usize,
                rho,
                theta: f64::NAN,
            })?;
            self.u[k] = u;
            self.v[k] = v;
            self.theta[k] = theta;
            self.p[k] = gas.total_pressure(ThermoState { rho, theta });
        }
        self.fill_ghosts();
        Ok(())
    }

    /// Wall reflection in `y` (slip mirrors `v`, no-slip negates both
    /// components, temperature copied), then periodic copies in `x`.
    pub fn fill_ghosts(&mut self) {
        let g = self.grid;
        let (nx, ny) = (g.nx() as isize, g.ny() as isize);
        let tangential = match self.bc {
            BoundaryKind::Slip => 1.0,
            BoundaryKind::NoSlip => -1.0,
        };
        for layer in 0..GHOST as isize {
            for i in 0..nx {
                for (ghost, mirror) in [(-1 - layer, layer), (ny + layer, ny - 1 - layer)] {
                    let (kg, km) = (g.idx(i, ghost), g.idx(i, mirror));
                    self.rho[kg] = self.rho[km];
                    self.theta[kg] = self.theta[km];
                    self.p[kg] = self.p[km];
                    self.u[kg] = tangential * self.u[km];
                    self.v[kg] = -self.v[km];
                    self.mx[kg] = self.rho[kg] * self.u[kg];
                    self.my[kg] = self.rho[kg] * self.v[kg];
                    self.energy[kg] = self.energy[km];
                }
            }
        }
        for j in -(GHOST as isize)..ny + GHOST as isize {
            for layer in 0..GHOST as isize {
                for (ghost, src) in [(-1 - layer, nx - 1 - layer), (nx + layer, layer)] {
                    let (kg, ks) = (g.idx(ghost, j), g.idx(src, j));
                    self.rho[kg] = self.rho[ks];
                    self.mx[kg] = self.mx[ks];
                    self.my[kg] = self.my[ks];
                    self.energy[kg] = self.energy[ks];
                    self.u[kg] = self.u[ks];
                    self.v[kg] = self.v[ks];
                    self.theta[kg] = self.theta[ks];
                    self.p[kg] = self.p[ks];
                }
            }
        }
    }

    /// Conservative average `(1-w)·a + w·b` with primitives recomputed.
    pub fn blend(gas: &GasModel, a: &Self, b: &Self, w: f64) -> Result<Self> {
        let mut out = a.clone();
        out.blend_from(gas, a, b, w)?;
        Ok(out)
    }

    /// In-place variant of [`FluidField::blend`].
    pub fn blend_from(&mut self, gas: &GasModel, a: &Self, b: &Self, w: f64) -> Result<()> {
        let mix = |dst: &mut [f64], x: &[f64], y: &[f64]| {
            for ((d, &p), &q) in dst.iter_mut().zip(x).zip(y) {
                *d = (1.0 - w) * p + w * q;
            }
        };
        mix(&mut self.rho, &a.rho, &b.rho);
        mix(&mut self.mx, &a.mx, &b.mx);
        mix(&mut self.my, &a.my, &b.my);
        mix(&mut self.energy, &a.energy, &b.energy);
        mix(&mut self.theta, &a.theta, &b.theta);
        self.refresh(gas)
    }

    pub fn primitive(&self, i: isize, j: isize) -> Primitive {
        let k = self.grid.idx(i, j);
        Primitive { rho: self.rho[k], u: [self.u[k], self.v[k]], theta: self.theta[k] }
    }

    /// Central-difference velocity gradient `g[a][b] = ∂u_a/∂x_b` at a cell.
    #[inline]
    pub fn velocity_gradient(&self, i: isize, j: isize) -> [[f64; 2]; 2] {
        let g = &self.grid;
        let inv = 0.5 / g.h();
        let (e, w, n, s) = (g.idx(i + 1, j), g.idx(i - 1, j), g.idx(i, j + 1), g.idx(i, j - 1));
        [[(self.u[e] - self.u[w]) * inv, (self.u[n] - self.u[s]) * inv], [(self.v[e] - self.v[w]) * inv, (self.v[n] - self.v[s]) * inv]]
    }

    /// Central-difference temperature gradient at a cell.
    #[inline]
    pub fn temperature_gradient(&self, i: isize, j: isize) -> [f64; 2] {
        let g = &self.grid;
        let inv = 0.5 / g.h();
        [
            (self.theta[g.idx(i + 1, j)] - self.theta[g.idx(i - 1, j)]) * inv,
            (self.theta[g.idx(i, j + 1)] - self.theta[g.idx(i, j - 1)]) * inv,
        ]
    }

    pub fn total_mass(&self) -> f64 {
        self.sum(|f, k| f.rho[k])
    }

    pub fn total_energy(&self) -> f64 {
        self.sum(|f, k| f.energy[k])
    }

    pub fn total_momentum(&self) -> [f64; 2] {
        [self.sum(|f, k| f.mx[k]), self.sum(|f, k| f.my[k])]
    }

    /// `Σ ρ (s + s_R) h²`.
    pub fn total_entropy(&self, gas: &GasModel) -> f64 {
        self.sum(|f, k| f.rho[k] * gas.total_entropy(ThermoState { rho: f.rho[k], theta: f.theta[k] }))
    }

    pub fn min_density(&self) -> f64 {
        self.fold_min(|f, k| f.rho[k])
    }

    pub fn min_temperature(&self) -> f64 {
        self.fold_min(|f, k| f.theta[k])
    }

    /// Cell-quadrature integral over the interior, summed row by row.
    pub fn sum<F: Fn(&Self, usize) -> f64>(&self, f: F) -> f64 {
        let g = &self.grid;
        let mut total = 0.0;
        for j in 0..g.ny() as isize {
            let mut row = 0.0;
            for i in 0..g.nx() as isize {
                row += f(self, g.idx(i, j));
            }
            total += row;
        }
        total * g.cell_area()
    }

    fn fold_min<F: Fn(&Self, usize) -> f64>(&self, f: F) -> f64 {
        self.grid.cells().map(|(i, j)| f(self, self.grid.idx(i, j))).fold(f64::INFINITY, f64::min)
    }
}
