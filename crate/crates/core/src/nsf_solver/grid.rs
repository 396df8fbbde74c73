use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ghost layers on every side.
pub const GHOST: usize = 2;

/// Uniform square-cell grid on the channel `[0, lx] × [0, 1]`, periodic in
/// `x`, with walls at `y = 0` and `y = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nx: usize,
    ny: usize,
}

impl Grid {
    /// `ny` cells across the unit channel height; `lx = nx / ny`.
    pub fn channel(nx: usize, ny: usize) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidParameter(format!("grid {nx}x{ny} is too small (need at least 4x4)")));
        }
        Ok(Self { nx, ny })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.ny as f64
    }

    pub fn lx(&self) -> f64 {
        self.nx as f64 / self.ny as f64
    }

    pub fn domain_area(&self) -> f64 {
        self.lx()
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.h() * self.h()
    }

    /// Row length including ghosts.
    #[inline]
    pub fn stride(&self) -> usize {
        self.nx + 2 * GHOST
    }

    /// Storage length including ghosts.
    pub fn storage_len(&self) -> usize {
        self.stride() * (self.ny + 2 * GHOST)
    }

    /// Storage index of cell `(i, j)`; ghosts have `i` or `j` in `-2..0` or
    /// past the interior.
    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        let g = GHOST as isize;
        ((j + g) as usize) * self.stride() + (i + g) as usize
    }

    /// Cell-center coordinates.
    #[inline]
    pub fn center(&self, i: isize, j: isize) -> (f64, f64) {
        let h = self.h();
        ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
    }

    /// Same geometry with each cell split in four.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx, ny: 2 * self.ny }
    }

    /// Same geometry with cells merged in blocks of four.
    pub fn coarsened(&self) -> Result<Self> {
        if !self.nx.is_multiple_of(2) || !self.ny.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("grid {}x{} cannot be coarsened", self.nx, self.ny)));
        }
        Self::channel(self.nx / 2, self.ny / 2)
    }

    /// Interior cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let nx = self.nx as isize;
        (0..self.ny as isize).flat_map(move |j| (0..nx).map(move |i| (i, j)))
    }
}
