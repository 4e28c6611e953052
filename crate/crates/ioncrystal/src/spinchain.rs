//! Effective Ising couplings of a uniform ion chain driven by a walking wave
//! tuned to the red sideband of every radial mode.
//!
//! Frequencies are in the same unit as `omega_x`. The drive strength is
//! given as `force = |F x0| / hbar`, so that J and the mode displacements
//! follow from frequency ratios alone.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_ions: usize,
    pub beta_x: f64,
    pub omega_x: f64,
    /// omega_x - omega_L.
    pub detuning: f64,
    /// |F x0| / hbar.
    pub force: f64,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_ions == 0 {
            return Err(Error::InvalidParameter("a chain needs at least one ion".into()));
        }
        for (name, v) in [("beta_x", self.beta_x), ("omega_x", self.omega_x), ("detuning", self.detuning)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.force.is_finite() && self.force >= 0.0) {
            return Err(Error::InvalidParameter(format!("force must be non-negative, got {}", self.force)));
        }
        Ok(())
    }

    pub fn omega_l(&self) -> f64 {
        self.omega_x - self.detuning
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainModes {
    /// Coulomb eigenvalues V_n, ascending.
    pub v: Vec<f64>,
    pub omegas: Vec<f64>,
    /// Column n is mode n; element (j, n) is M_{j,n}.
    pub m: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainCouplings {
    pub j: DMatrix<f64>,
}

/// K_jk = 1/|j-k|^3 off the diagonal, rows summing to zero.
pub fn coulomb_matrix(n: usize) -> DMatrix<f64> {
    let mut k = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            1.0 / (i.abs_diff(j) as f64).powi(3)
        }
    });
    for i in 0..n {
        let s: f64 = (0..n).filter(|&j| j != i).map(|j| k[(i, j)]).sum();
        k[(i, i)] = -s;
    }
    k
}

/// Radial modes omega_n = omega_x sqrt(1 + beta_x V_n).
pub fn chain_normal_modes(spec: &ChainSpec) -> Result<ChainModes> {
    spec.validate()?;
    let n = spec.n_ions;
    let eig = SymmetricEigen::new(coulomb_matrix(n));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut v = Vec::with_capacity(n);
    let mut m = DMatrix::zeros(n, n);
    for (col, &o) in order.iter().enumerate() {
        // Row sums of K vanish, so the uniform mode is an exact null vector;
        // the solver returns it up to rounding.
        let lam = eig.eigenvalues[o];
        v.push(if lam.abs() < 1e-12 { 0.0 } else { lam });
        let mut c = eig.eigenvectors.column(o).into_owned();
        let imax = c.iamax();
        if c[imax] < 0.0 {
            c = -c;
        }
        m.set_column(col, &c);
    }
    let vmin = v.iter().copied().fold(f64::INFINITY, f64::min);
    if 1.0 + spec.beta_x * vmin <= 0.0 {
        return Err(Error::UnstableChain(1.0 + spec.beta_x * vmin));
    }
    let omegas = v.iter().map(|&vn| spec.omega_x * (1.0 + spec.beta_x * vn).sqrt()).collect();
    Ok(ChainModes { v, omegas, m })
}

/// J_jk = sum_n |F|^2 / (m omega_n delta_n) M_jn M_kn with delta_n = omega_n - omega_L,
/// written as 2 omega_x force^2 / (omega_n delta_n).
pub fn effective_couplings(spec: &ChainSpec, modes: &ChainModes) -> Result<ChainCouplings> {
    spec.validate()?;
    let wl = spec.omega_l();
    let n = spec.n_ions;
    let mut weights = Vec::with_capacity(n);
    for (i, &w) in modes.omegas.iter().enumerate() {
        let delta = w - wl;
        if delta <= 0.0 {
            return Err(Error::BlueDetunedMode { index: i, delta });
        }
        weights.push(2.0 * spec.omega_x * spec.force * spec.force / (w * delta));
    }
    let mut j = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let s: f64 = (0..n).map(|k| weights[k] * modes.m[(a, k)] * modes.m[(b, k)]).sum();
            j[(a, b)] = s;
            j[(b, a)] = s;
        }
    }
    Ok(ChainCouplings { j })
}

/// Stiff-limit couplings -beta_x (force/detuning)^2 omega_x / |j-k|^3.
///
/// The magnitude is the leading term of the expansion of J in beta_x for
/// detuning << omega_x; the sign follows from the mode softening, which
/// lowers the frequencies of the short-wavelength modes. The diagonal is zero.
pub fn dipolar_reference(spec: &ChainSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let eta = spec.force / spec.detuning;
    let c = -spec.beta_x * eta * eta * spec.omega_x;
    Ok(DMatrix::from_fn(spec.n_ions, spec.n_ions, |i, j| {
        if i == j {
            0.0
        } else {
            c / (i.abs_diff(j) as f64).powi(3)
        }
    }))
}

/// Pairs (j, k), j < k, with both ions at least n/4 sites from the ends and
/// separation at most `max_sep`.
pub fn interior_pairs(n: usize, max_sep: usize) -> Vec<(usize, usize)> {
    let margin = n / 4;
    let mut out = Vec::new();
    for a in margin..n.saturating_sub(margin) {
        for b in a + 1..n.saturating_sub(margin) {
            if b - a <= max_sep {
                out.push((a, b));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// max |J/J_ref - 1| over the pairs.
    pub vs_reference: f64,
    /// Smallest achievable max |J |j-k|^3 / C - 1| over a common constant C.
    pub vs_power_law: f64,
    /// The constant C of the best power law, relative to the reference prefactor.
    pub prefactor_ratio: f64,
    pub pairs: usize,
}

/// Compares J with the 1/|j-k|^3 law on interior pairs up to `max_sep`.
pub fn stiff_limit_deviation(spec: &ChainSpec, couplings: &ChainCouplings, max_sep: usize) -> Result<DeviationReport> {
    let reference = dipolar_reference(spec)?;
    let pairs = interior_pairs(spec.n_ions, max_sep);
    if pairs.is_empty() {
        return Ok(DeviationReport {
            vs_reference: 0.0,
            vs_power_law: 0.0,
            prefactor_ratio: f64::NAN,
            pairs: 0,
        });
    }
    let ratios: Vec<f64> = pairs.iter().map(|&(a, b)| couplings.j[(a, b)] / reference[(a, b)]).collect();
    let vs_reference = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Minimax fit of a constant to values of one sign: C = (lo + hi) / 2.
    let c = 0.5 * (lo + hi);
    Ok(DeviationReport {
        vs_reference,
        vs_power_law: (hi - lo) / (hi + lo).abs(),
        prefactor_ratio: c,
        pairs: pairs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationError {
    /// |F x0|^2 / (hbar (omega_x - omega_L)) as a frequency, i.e. force^2 / detuning.
    pub printed_estimate: f64,
    /// Dimensionless (force / detuning)^2.
    pub eta_sq: f64,
    /// max_n |eta_n|^2 with eta_n = g_n / (hbar delta_n) for the spin
    /// configuration that maximizes |g_n|.
    pub max_mode_eta_sq: f64,
}

pub fn simulation_error(spec: &ChainSpec, modes: &ChainModes) -> Result<SimulationError> {
    spec.validate()?;
    let wl = spec.omega_l();
    let n = spec.n_ions;
    let mut max_eta = 0.0f64;
    for k in 0..n {
        let delta = modes.omegas[k] - wl;
        if delta <= 0.0 {
            return Err(Error::BlueDetunedMode { index: k, delta });
        }
        let col_l1: f64 = (0..n).map(|a| modes.m[(a, k)].abs()).sum();
        let g = spec.force * (spec.omega_x / modes.omegas[k]).sqrt() * col_l1;
        max_eta = max_eta.max((g / delta).powi(2));
    }
    Ok(SimulationError {
        printed_estimate: spec.force * spec.force / spec.detuning,
        eta_sq: (spec.force / spec.detuning).powi(2),
        max_mode_eta_sq: max_eta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarrierBound {
    pub ratio: f64,
    pub violated: bool,
}

/// Relative size Omega / omega_L of the carrier correction; flagged at 0.1 or more.
pub fn carrier_correction_bound(rabi: f64, omega_l: f64) -> Result<CarrierBound> {
    if !(omega_l.is_finite() && omega_l > 0.0) {
        return Err(Error::InvalidParameter(format!("omega_L must be positive, got {omega_l}")));
    }
    if !(rabi.is_finite() && rabi >= 0.0) {
        return Err(Error::InvalidParameter(format!("Rabi frequency must be non-negative, got {rabi}")));
    }
    let ratio = rabi / omega_l;
    Ok(CarrierBound {
        ratio,
        violated: ratio >= 0.1,
    })
}
