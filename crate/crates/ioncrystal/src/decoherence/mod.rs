//! Gate fidelity limited by anharmonic coupling to in-plane phonons.
//!
//! The qubits couple to a bath of harmonic modes through
//!
//! H(t) = p(t) [ (F/L) sum_a F_a R_a + (G/L^2) sum_ab G_ab R_a R_b ],
//!
//! with R_a = xbar_a (b_a + b_a^dag), p(t) = exp(-Gamma |t|) and mode a
//! paired with a partner p(a) such that R_a^dag = R_p(a). The averaged
//! evolution operator is expanded in linked clusters up to fourth order in
//! the small ratio X0/d0.

mod diagrams;
pub mod kernels;
pub mod oracle;
mod scan;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::phonons::{Branch, Spectrum};
use crate::{Error, Result};

pub use diagrams::{evaluate, term_e1, term_e2, term_e3, term_e4, DiagramMode, Diagrams};
pub use scan::{log_spaced, loglog_slope, temperature_scan, ScanSummary};

/// Coupling strengths in units of omega_xy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingScales {
    pub f_bar: f64,
    pub g_bar: f64,
    pub x_ratio: f64,
    pub gamma: f64,
}

impl CouplingScales {
    /// F = -(3/4) pi x Gamma, G = -(3/8) pi x^2 Gamma, valid for a sign-gate pulse.
    pub fn from_sign_gate(x_ratio: f64, gamma: f64) -> Result<Self> {
        check_positive("x_ratio", x_ratio)?;
        check_positive("gamma", gamma)?;
        let pi = std::f64::consts::PI;
        Ok(Self {
            f_bar: -0.75 * pi * x_ratio * gamma,
            g_bar: -0.375 * pi * x_ratio * x_ratio * gamma,
            x_ratio,
            gamma,
        })
    }

    /// F = -6 beta_z eta^2 omega_z x, G = -3 beta_z eta^2 omega_z x^2,
    /// with omega_z in units of omega_xy.
    pub fn from_pulse(x_ratio: f64, beta_z: f64, eta0: f64, omega_z: f64, gamma: f64) -> Result<Self> {
        check_positive("x_ratio", x_ratio)?;
        check_positive("beta_z", beta_z)?;
        check_positive("eta0", eta0)?;
        check_positive("omega_z", omega_z)?;
        check_positive("gamma", gamma)?;
        let s = beta_z * eta0 * eta0 * omega_z;
        Ok(Self {
            f_bar: -6.0 * s * x_ratio,
            g_bar: -3.0 * s * x_ratio * x_ratio,
            x_ratio,
            gamma,
        })
    }

    /// Explicit scales, used for toy systems.
    pub fn explicit(f_bar: f64, g_bar: f64, gamma: f64) -> Result<Self> {
        check_positive("gamma", gamma)?;
        Ok(Self {
            f_bar,
            g_bar,
            x_ratio: f64::NAN,
            gamma,
        })
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Relative displacement factor of the two gate ions, 1 - exp(i q1).
#[inline]
pub fn ion_pair_phase(q1: f64) -> Complex64 {
    Complex64::new(1.0 - q1.cos(), -q1.sin())
}

/// F_q = e_x (1 - exp(i q1)).
pub fn structure_factor_f(q1: f64, evec: &[f64; 3]) -> Complex64 {
    evec[0] * ion_pair_phase(q1)
}

/// G_qk = sum_ij (2 d_ij - 5 d_ix d_jx) e_qi e_kj (1 - exp(i q1)) (1 - exp(i k1)).
pub fn structure_factor_g(q1: f64, evec_q: &[f64; 3], k1: f64, evec_k: &[f64; 3]) -> Complex64 {
    let s = -3.0 * evec_q[0] * evec_k[0] + 2.0 * evec_q[1] * evec_k[1];
    s * ion_pair_phase(q1) * ion_pair_phase(k1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    /// Frequency in units of omega_xy.
    pub omega: f64,
    pub occupation: f64,
    /// Zero-point variance factor omega_xy / omega.
    pub xsq: f64,
    pub partner: usize,
    pub f: Complex64,
    phi: Complex64,
    ex: f64,
    ey: f64,
}

#[derive(Debug, Clone)]
enum Quadratic {
    Lattice,
    Dense { n: usize, g: Vec<Complex64> },
}

/// Modes and couplings entering the diagram sums.
#[derive(Debug, Clone)]
pub struct Bath {
    /// L in the 1/L normalization of the couplings.
    pub size: f64,
    pub modes: Vec<BathMode>,
    quadratic: Quadratic,
}

impl Bath {
    /// In-plane modes of a crystal; `inverse_thermal_ratio` is hbar omega_xy / k_B T.
    pub fn lattice(spectrum: &Spectrum, inverse_thermal_ratio: f64) -> Self {
        let l = spectrum.l;
        let mut slot_index = vec![[usize::MAX; 3]; l * l];
        let mut modes = Vec::with_capacity(2 * l * l);
        for (qi, qm) in spectrum.modes.iter().enumerate() {
            let phi = ion_pair_phase(qm.q.q1());
            for k in 0..3 {
                if qm.branches[k] == Branch::Axial {
                    continue;
                }
                let e = qm.evecs[k];
                let omega = qm.omegas[k];
                slot_index[qi][k] = modes.len();
                modes.push(BathMode {
                    omega,
                    occupation: crate::lattice::bose_einstein(inverse_thermal_ratio * omega),
                    xsq: 1.0 / omega,
                    partner: usize::MAX,
                    f: e[0] * phi,
                    phi,
                    ex: e[0],
                    ey: e[1],
                });
            }
        }
        for (qi, qm) in spectrum.modes.iter().enumerate() {
            let ni = qm.q.neg().index();
            for k in 0..3 {
                let a = slot_index[qi][k];
                if a != usize::MAX {
                    modes[a].partner = slot_index[ni][k];
                }
            }
        }
        Self {
            size: l as f64,
            modes,
            quadratic: Quadratic::Lattice,
        }
    }

    /// Self-conjugate modes (each its own partner) with real couplings.
    /// `g` is a symmetric matrix given row-major.
    pub fn toy(size: f64, omegas: &[f64], occupations: &[f64], xsq: &[f64], f: &[f64], g: &[f64]) -> Result<Self> {
        let n = omegas.len();
        if occupations.len() != n || xsq.len() != n || f.len() != n || g.len() != n * n {
            return Err(Error::InvalidParameter("toy bath arrays have inconsistent lengths".into()));
        }
        check_positive("size", size)?;
        for a in 0..n {
            check_positive("omega", omegas[a])?;
            check_positive("xsq", xsq[a])?;
            if !(occupations[a] >= 0.0) {
                return Err(Error::InvalidParameter("occupations must be non-negative".into()));
            }
            for b in 0..n {
                if g[a * n + b] != g[b * n + a] {
                    return Err(Error::InvalidParameter("quadratic coupling must be symmetric".into()));
                }
            }
        }
        let modes = (0..n)
            .map(|a| BathMode {
                omega: omegas[a],
                occupation: occupations[a],
                xsq: xsq[a],
                partner: a,
                f: Complex64::new(f[a], 0.0),
                phi: Complex64::new(0.0, 0.0),
                ex: 0.0,
                ey: 0.0,
            })
            .collect();
        Ok(Self {
            size,
            modes,
            quadratic: Quadratic::Dense {
                n,
                g: g.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            },
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    #[inline]
    pub fn g(&self, a: usize, b: usize) -> Complex64 {
        match &self.quadratic {
            Quadratic::Lattice => {
                let (ma, mb) = (&self.modes[a], &self.modes[b]);
                (-3.0 * ma.ex * mb.ex + 2.0 * ma.ey * mb.ey) * ma.phi * mb.phi
            }
            Quadratic::Dense { n, g } => g[a * n + b],
        }
    }

    /// The same bath with modes listed in a new order: mode `i` of the result
    /// is mode `order[i]` of `self`. Partners follow their modes.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let n = self.modes.len();
        let mut inverse = vec![usize::MAX; n];
        for (i, &o) in order.iter().enumerate() {
            if o >= n || inverse[o] != usize::MAX {
                return Err(Error::InvalidParameter("order must be a permutation of the modes".into()));
            }
            inverse[o] = i;
        }
        if order.len() != n {
            return Err(Error::InvalidParameter("order must be a permutation of the modes".into()));
        }
        let modes = order
            .iter()
            .map(|&o| BathMode {
                partner: inverse[self.modes[o].partner],
                ..self.modes[o]
            })
            .collect();
        let quadratic = match &self.quadratic {
            Quadratic::Lattice => Quadratic::Lattice,
            Quadratic::Dense { n, g } => Quadratic::Dense {
                n: *n,
                g: (0..n * n).map(|k| g[order[k / n] * n + order[k % n]]).collect(),
            },
        };
        Ok(Self {
            size: self.size,
            modes,
            quadratic,
        })
    }

    /// Replaces every occupation, keeping geometry and couplings.
    pub fn with_occupations<F: Fn(f64) -> f64>(mut self, occupation: F) -> Self {
        for m in &mut self.modes {
            m.occupation = occupation(m.omega);
        }
        self
    }
}

/// Diagram values with the resulting fidelity and gate errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub temperature: f64,
    pub e1: Complex64,
    pub e2: Complex64,
    pub e3: Complex64,
    pub e4: Complex64,
    pub f_bar_xy: Complex64,
    pub error_e: f64,
    pub error_eprime: f64,
}

/// F = exp(E1 + E2 + E3 + E4), E = (1 - Re F)/2, E' = (1 - |F|)/2.
pub fn total_fidelity(e: [Complex64; 4]) -> (Complex64, f64, f64) {
    let f = (e[0] + e[1] + e[2] + e[3]).exp();
    (f, 0.5 * (1.0 - f.re), 0.5 * (1.0 - f.norm()))
}

impl ErrorBreakdown {
    pub fn from_diagrams(temperature: f64, d: &Diagrams) -> Self {
        let (f, e, ep) = total_fidelity([d.e1, d.e2, d.e3, d.e4]);
        Self {
            temperature,
            e1: d.e1,
            e2: d.e2,
            e3: d.e3,
            e4: d.e4,
            f_bar_xy: f,
            error_e: e,
            error_eprime: ep,
        }
    }
}
