//! Periodic triangular lattice, minimum-image geometry and lattice sums.

use serde::{Deserialize, Serialize};

use crate::constants::{
    ATOMIC_MASS_UNIT, BERYLLIUM9_MASS_U, BOLTZMANN, ELEMENTARY_CHARGE, HBAR, VACUUM_PERMITTIVITY,
};
use crate::sum::Neumaier;
use crate::{Error, Result};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Direct and reciprocal bases of the triangular lattice, in units of the spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub l: usize,
    pub a1: [f64; 3],
    pub a2: [f64; 3],
    pub b1: [f64; 3],
    pub b2: [f64; 3],
}

impl LatticeSpec {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::LatticeTooSmall { got: 0, min: 1 });
        }
        Ok(Self {
            l,
            a1: [1.0, 0.0, 0.0],
            a2: [0.5, SQRT3 / 2.0, 0.0],
            b1: [1.0, -1.0 / SQRT3, 0.0],
            b2: [0.0, 2.0 / SQRT3, 0.0],
        })
    }

    pub fn n_sites(&self) -> usize {
        self.l * self.l
    }

    /// Cartesian position of fractional coordinates (r1, r2).
    pub fn cartesian(&self, r1: f64, r2: f64) -> [f64; 3] {
        cartesian(r1, r2)
    }
}

/// Cartesian vector r1*a1 + r2*a2.
#[inline]
pub fn cartesian(r1: f64, r2: f64) -> [f64; 3] {
    [r1 + 0.5 * r2, SQRT3 / 2.0 * r2, 0.0]
}

/// Squared length of r1*a1 + r2*a2, exact in integer arithmetic.
#[inline]
pub fn norm_sq_int(r1: i64, r2: i64) -> i64 {
    r1 * r1 + r1 * r2 + r2 * r2
}

/// All sites (r1, r2) with r_i in 1..=L, r1 varying slowest.
pub fn generate_sites(l: usize) -> Result<Vec<(usize, usize)>> {
    if l == 0 {
        return Err(Error::LatticeTooSmall { got: 0, min: 1 });
    }
    Ok((1..=l).flat_map(|r1| (1..=l).map(move |r2| (r1, r2))).collect())
}

/// A displacement between two sites after periodic wrapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    /// Fractional components of the chosen image.
    pub frac: (i64, i64),
    /// Cartesian vector in units of the spacing.
    pub vec: [f64; 3],
    /// Squared length, exact.
    pub norm_sq: i64,
}

impl Displacement {
    pub fn length(&self) -> f64 {
        (self.norm_sq as f64).sqrt()
    }
}

/// Shortest periodic image of the fractional displacement (d1, d2).
///
/// The nine images with offsets in {-L, 0, L}^2 are compared by exact
/// squared length; ties keep the lexicographically smallest offset.
pub fn wrap_displacement(d1: i64, d2: i64, l: usize) -> Displacement {
    let l = l as i64;
    let mut best = (i64::MAX, 0, 0);
    for o1 in [-l, 0, l] {
        for o2 in [-l, 0, l] {
            let n = norm_sq_int(d1 + o1, d2 + o2);
            if n < best.0 {
                best = (n, d1 + o1, d2 + o2);
            }
        }
    }
    let (norm_sq, f1, f2) = best;
    Displacement {
        frac: (f1, f2),
        vec: cartesian(f1 as f64, f2 as f64),
        norm_sq,
    }
}

/// Minimum-image displacement r - s between two sites.
pub fn min_image(r: (usize, usize), s: (usize, usize), l: usize) -> Displacement {
    let d1 = r.0 as i64 - s.0 as i64;
    let d2 = r.1 as i64 - s.1 as i64;
    wrap_displacement(d1, d2, l)
}

/// Minimum images of every site relative to the origin, excluding the origin,
/// ordered by ascending length and then by site index.
pub fn neighbour_shell(l: usize) -> Vec<Displacement> {
    let li = l as i64;
    let mut out: Vec<Displacement> = (0..li)
        .flat_map(|d1| (0..li).map(move |d2| (d1, d2)))
        .filter(|&(d1, d2)| d1 != 0 || d2 != 0)
        .map(|(d1, d2)| wrap_displacement(d1, d2, l))
        .collect();
    out.sort_by_key(|d| d.norm_sq);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSums {
    pub c1: f64,
    pub c2: f64,
    pub beta_xy: f64,
}

/// C1 = sum |R|^2 and C2 = sum 1/|R| over minimum images, and
/// beta_xy = 4 C1 / (L^2 C2).
pub fn lattice_sums(l: usize) -> Result<LatticeSums> {
    if l < 2 {
        return Err(Error::LatticeTooSmall { got: l, min: 2 });
    }
    let shell = neighbour_shell(l);
    let mut c1 = Neumaier::new();
    let mut c2 = Neumaier::new();
    for d in &shell {
        c1.add(d.norm_sq as f64);
        c2.add(1.0 / d.length());
    }
    let (c1, c2) = (c1.value(), c2.value());
    Ok(LatticeSums {
        c1,
        c2,
        beta_xy: 4.0 * c1 / ((l * l) as f64 * c2),
    })
}

/// Ion species, trap frequencies (Hz) and temperature (K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub ion_mass: f64,
    pub ion_charge: f64,
    pub f_xy: f64,
    pub f_z: f64,
    pub temperature: f64,
}

impl PhysicalParams {
    pub fn new(ion_mass: f64, ion_charge: f64, f_xy: f64, f_z: f64, temperature: f64) -> Result<Self> {
        let p = Self {
            ion_mass,
            ion_charge,
            f_xy,
            f_z,
            temperature,
        };
        p.validate()?;
        Ok(p)
    }

    /// Singly charged beryllium-9.
    pub fn beryllium(f_xy: f64, f_z: f64, temperature: f64) -> Result<Self> {
        Self::new(
            BERYLLIUM9_MASS_U * ATOMIC_MASS_UNIT,
            ELEMENTARY_CHARGE,
            f_xy,
            f_z,
            temperature,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("ion_mass", self.ion_mass),
            ("ion_charge", self.ion_charge),
            ("f_xy", self.f_xy),
            ("f_z", self.f_z),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    pub fn omega_xy(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f_xy
    }

    pub fn omega_z(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f_z
    }

    /// Axial over in-plane trap frequency.
    pub fn z_ratio(&self) -> f64 {
        self.f_z / self.f_xy
    }

    /// Gaussian-units squared charge q^2 / (4 pi eps0).
    pub fn e_sq(&self) -> f64 {
        self.ion_charge * self.ion_charge / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY)
    }

    /// hbar * omega_xy / (k_B T); infinite at zero temperature.
    pub fn inverse_thermal_ratio(&self) -> f64 {
        if self.temperature == 0.0 {
            f64::INFINITY
        } else {
            HBAR * self.omega_xy() / (BOLTZMANN * self.temperature)
        }
    }
}

/// Equilibrium spacing d0 = (2 e^2 / (m omega_xy^2 beta_xy))^(1/3) in meters.
pub fn physical_spacing(params: &PhysicalParams, sums: &LatticeSums) -> f64 {
    let w = params.omega_xy();
    (2.0 * params.e_sq() / (params.ion_mass * w * w * sums.beta_xy)).cbrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    /// Spacing in meters.
    pub d0: f64,
    pub beta_xy: f64,
    pub beta_z: f64,
    /// In-plane ground-state size in meters.
    pub x0: f64,
    /// Axial ground-state size in meters.
    pub z0: f64,
    pub x_ratio: f64,
    pub z_ratio: f64,
    /// Thermal occupation of the uniform in-plane mode.
    pub n_xy: f64,
    /// Thermal occupation of the uniform axial mode.
    pub n_z: f64,
}

pub fn derived_betas(params: &PhysicalParams, sums: &LatticeSums) -> DerivedScales {
    let d0 = physical_spacing(params, sums);
    let m = params.ion_mass;
    let wz = params.omega_z();
    let wxy = params.omega_xy();
    let x0 = (HBAR / (2.0 * m * wxy)).sqrt();
    let z0 = (HBAR / (2.0 * m * wz)).sqrt();
    let beta_z = params.e_sq() / (m * wz * wz * d0 * d0 * d0);
    let ratio = params.inverse_thermal_ratio();
    DerivedScales {
        d0,
        beta_xy: sums.beta_xy,
        beta_z,
        x0,
        z0,
        x_ratio: x0 / d0,
        z_ratio: z0 / d0,
        n_xy: bose_einstein(ratio),
        n_z: bose_einstein(ratio * params.z_ratio()),
    }
}

/// 1 / (exp(x) - 1) for x = hbar omega / (k_B T), zero for infinite x.
#[inline]
pub fn bose_einstein(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x.exp_m1()
    }
}
