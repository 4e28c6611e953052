//! Pushing-gate parameters for an exponential pulse F(t)^2 = F^2 exp(-Gamma |t|).
//!
//! Rates and times here are in units of the axial trap frequency unless a
//! name says otherwise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Peak displacement parameter F Z0 / (hbar omega_z).
    pub eta0: f64,
    /// Pulse rate over omega_z.
    pub gamma: f64,
}

impl PulseSpec {
    pub fn new(eta0: f64, gamma: f64) -> Result<Self> {
        if !(eta0.is_finite() && eta0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("eta0 must be non-negative, got {eta0}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self { eta0, gamma })
    }
}

/// J(t) / omega_z = 2 beta_z eta0^2 exp(-Gamma |t|).
pub fn coupling_j(t: f64, pulse: &PulseSpec, beta_z: f64) -> f64 {
    2.0 * beta_z * pulse.eta0 * pulse.eta0 * (-pulse.gamma * t.abs()).exp()
}

/// Rate that turns the pulse into a sign gate: Gamma = J(0) pi / 8.
pub fn sign_gate_rate(j0: f64) -> Result<f64> {
    if !(j0.is_finite() && j0 > 0.0) {
        return Err(Error::InvalidParameter(format!("J(0) must be positive, got {j0}")));
    }
    Ok(j0 * std::f64::consts::PI / 8.0)
}

/// Integral of J over the pulse, 2 J(0) / Gamma.
pub fn total_phase(j0: f64, gamma: f64) -> f64 {
    2.0 * j0 / gamma
}

/// Nonadiabatic displacement amplitude eta_ND = -2i eta0 Gamma / omega_z.
pub fn eta_nd(pulse: &PulseSpec) -> Complex64 {
    Complex64::new(0.0, -2.0 * pulse.eta0 * pulse.gamma)
}

/// E_z = 8 (Gamma/omega_z)^2 eta0^2 (2 n_z + 1).
pub fn adiabatic_error(pulse: &PulseSpec, n_z: f64) -> f64 {
    8.0 * pulse.gamma * pulse.gamma * pulse.eta0 * pulse.eta0 * (2.0 * n_z + 1.0)
}

/// The same error written through eta_ND: 4 |eta_ND|^2 (n_z + 1/2).
pub fn adiabatic_error_from_eta_nd(eta_nd: Complex64, n_z: f64) -> f64 {
    4.0 * eta_nd.norm_sqr() * (n_z + 0.5)
}

/// Two-qubit computational basis state; each qubit carries sigma_z = +1 for 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisState(pub bool, pub bool);

impl BasisState {
    pub fn sigma_z(&self) -> [f64; 2] {
        let s = |b: bool| if b { -1.0 } else { 1.0 };
        [s(self.0), s(self.1)]
    }
}

impl std::str::FromStr for BasisState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(BasisState(false, false)),
            "01" => Ok(BasisState(false, true)),
            "10" => Ok(BasisState(true, false)),
            "11" => Ok(BasisState(true, true)),
            _ => Err(Error::InvalidBasisLabel(s.to_string())),
        }
    }
}

/// Overlap of the residual axial displacements of two basis states.
/// The result is real; it is the modulus of the complex overlap.
pub fn fidelity_z(alpha: BasisState, beta: BasisState, eta_nd: Complex64, n_z: f64) -> f64 {
    let (a, b) = (alpha.sigma_z(), beta.sigma_z());
    let d2: f64 = (0..2).map(|i| (a[i] - b[i]).powi(2)).sum();
    (-eta_nd.norm_sqr() * (n_z + 0.5) * d2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDiagnostics {
    pub beta_z: f64,
    pub eta0: f64,
    /// J(0) / omega_z.
    pub j0: f64,
    /// J(0) pi / 8 over omega_z; zero when eta0 = 0.
    pub gamma_from_sign_gate: f64,
    /// The same rate over omega_xy.
    pub gamma_from_sign_gate_xy: f64,
    /// The pulse rate actually used, over omega_xy.
    pub gamma_xy: f64,
    /// gamma_xy / gamma_from_sign_gate_xy; 1 when the inputs are consistent.
    pub gamma_mismatch: f64,
    pub e_z: f64,
    pub eta_nd_re: f64,
    pub eta_nd_im: f64,
    /// Integral of J for the pulse actually used.
    pub total_phase: f64,
    /// Integral of J for the sign-gate rate, 16/pi.
    pub sign_gate_phase: f64,
    pub n_z: f64,
}

/// Gate report for a pulse with rate `gamma_xy` (units omega_xy) in a trap
/// with omega_z / omega_xy = `z_ratio`.
pub fn diagnose(eta0: f64, beta_z: f64, z_ratio: f64, gamma_xy: f64, n_z: f64) -> Result<GateDiagnostics> {
    if !(beta_z.is_finite() && beta_z > 0.0) {
        return Err(Error::InvalidParameter(format!("beta_z must be positive, got {beta_z}")));
    }
    if !(z_ratio.is_finite() && z_ratio > 0.0) {
        return Err(Error::InvalidParameter(format!("z ratio must be positive, got {z_ratio}")));
    }
    let pulse = PulseSpec::new(eta0, gamma_xy / z_ratio)?;
    let j0 = coupling_j(0.0, &pulse, beta_z);
    let (g_sign, sign_phase) = if j0 > 0.0 {
        let g = sign_gate_rate(j0)?;
        (g, total_phase(j0, g))
    } else {
        (0.0, 0.0)
    };
    let nd = eta_nd(&pulse);
    Ok(GateDiagnostics {
        beta_z,
        eta0,
        j0,
        gamma_from_sign_gate: g_sign,
        gamma_from_sign_gate_xy: g_sign * z_ratio,
        gamma_xy,
        gamma_mismatch: if g_sign > 0.0 { gamma_xy / (g_sign * z_ratio) } else { f64::INFINITY },
        e_z: adiabatic_error(&pulse, n_z),
        eta_nd_re: nd.re,
        eta_nd_im: nd.im,
        total_phase: total_phase(j0, pulse.gamma),
        sign_gate_phase: sign_phase,
        n_z,
    })
}
