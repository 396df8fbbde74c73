//! Slope limiters and approximate Riemann solvers in a face-normal frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Limiter {
    Minmod,
    VanLeer,
    /// Monotonized central.
    Mc,
    Unlimited,
}

impl Limiter {
    /// Limited cell slope from backward and forward differences.
    #[inline]
    pub fn slope(self, back: f64, fwd: f64) -> f64 {
        match self {
            Limiter::Minmod => minmod(back, fwd),
            Limiter::VanLeer => {
                let prod = back * fwd;
                if prod > 0.0 {
                    2.0 * prod / (back + fwd)
                } else {
                    0.0
                }
            }
            Limiter::Mc => {
                if back * fwd <= 0.0 {
                    0.0
                } else {
                    let c = 0.5 * (back + fwd);
                    let m = (2.0 * back.abs()).min(2.0 * fwd.abs()).min(c.abs());
                    m.copysign(c)
                }
            }
            Limiter::Unlimited => 0.5 * (back + fwd),
        }
    }
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl std::str::FromStr for Limiter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minmod" => Ok(Self::Minmod),
            "vanleer" => Ok(Self::VanLeer),
            "mc" => Ok(Self::Mc),
            "unlimited" => Ok(Self::Unlimited),
            other => Err(Error::InvalidParameter(format!("unknown limiter '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxKind {
    Hllc,
    Rusanov,
}

impl std::str::FromStr for FluxKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hllc" => Ok(Self::Hllc),
            "rusanov" => Ok(Self::Rusanov),
            other => Err(Error::InvalidParameter(format!("unknown flux '{other}'"))),
        }
    }
}

/// Face state in the frame `(normal, tangential)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceState {
    pub rho: f64,
    pub un: f64,
    pub ut: f64,
    /// Total pressure.
    pub p: f64,
    /// Total energy density.
    pub energy: f64,
    pub c: f64,
}

impl FaceState {
    #[inline]
    fn physical_flux(&self) -> [f64; 4] {
        let m = self.rho * self.un;
        [m, m * self.un + self.p, m * self.ut, (self.energy + self.p) * self.un]
    }

    #[inline]
    fn conserved(&self) -> [f64; 4] {
        [self.rho, self.rho * self.un, self.rho * self.ut, self.energy]
    }
}

/// Flux `[mass, normal momentum, tangential momentum, energy]`.
#[inline]
pub fn numerical_flux(kind: FluxKind, l: &FaceState, r: &FaceState) -> [f64; 4] {
    match kind {
        FluxKind::Hllc => hllc(l, r),
        FluxKind::Rusanov => rusanov(l, r),
    }
}

fn rusanov(l: &FaceState, r: &FaceState) -> [f64; 4] {
    let s = (l.un.abs() + l.c).max(r.un.abs() + r.c);
    let (fl, fr) = (l.physical_flux(), r.physical_flux());
    let (ul, ur) = (l.conserved(), r.conserved());
    let mut f = [0.0; 4];
    for k in 0..4 {
        f[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * s * (ur[k] - ul[k]);
    }
    f
}

fn hllc(l: &FaceState, r: &FaceState) -> [f64; 4] {
    let sl = (l.un - l.c).min(r.un - r.c);
    let sr = (l.un + l.c).max(r.un + r.c);
    if sl >= 0.0 {
        return l.physical_flux();
    }
    if sr <= 0.0 {
        return r.physical_flux();
    }
    let ml = l.rho * (sl - l.un);
    let mr = r.rho * (sr - r.un);
    let s_star = (r.p - l.p + l.un * ml - r.un * mr) / (ml - mr);
    let (k, s) = if s_star >= 0.0 { (l, sl) } else { (r, sr) };
    let fk = k.physical_flux();
    let uk = k.conserved();
    let scale = k.rho * (s - k.un) / (s - s_star);
    let star = [scale, scale * s_star, scale * k.ut, scale * (k.energy / k.rho + (s_star - k.un) * (s_star + k.p / (k.rho * (s - k.un))))];
    let mut f = [0.0; 4];
    for c in 0..4 {
        f[c] = fk[c] + s * (star[c] - uk[c]);
    }
    f
}
