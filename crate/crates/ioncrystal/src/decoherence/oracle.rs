//! Exact averaged evolution operator of a few-mode bath on a truncated Fock space.
//!
//! Each thermally populated number state |n> is propagated under the
//! interaction-picture Hamiltonian with fixed-step RK4, separately on
//! [-T, 0] and [0, T] because the pulse envelope has a kink at t = 0. The
//! result is sum_n p_n <n|U|n>. Only states within `window` quanta of the
//! initial state are kept per mode, which is exact up to terms of order
//! (coupling)^window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Bath, CouplingScales};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    /// Highest phonon number kept per mode.
    pub truncation: Vec<usize>,
    /// Coarse time step; the result is accepted at dt/2.
    pub dt: f64,
    /// Integration runs over [-t_max, t_max].
    pub t_max: f64,
    /// Maximum excursion from the initial number state per mode.
    pub window: usize,
    /// Maximum change allowed when the step is halved.
    pub step_tol: f64,
    /// Maximum thermal weight allowed above the truncation.
    pub weight_tol: f64,
    /// Initial states with smaller thermal weight are taken as unperturbed.
    pub min_weight: f64,
    /// Initial states lighter than this use twice the step, and those
    /// lighter than its square four times the step. Their share of the
    /// integration error is suppressed by the weight.
    pub relaxed_weight: f64,
}

impl OracleSettings {
    /// Settings with t_max = 20 / gamma and the given truncation.
    pub fn new(truncation: Vec<usize>, gamma: f64) -> Self {
        Self {
            truncation,
            dt: 0.05,
            t_max: 20.0 / gamma,
            window: 12,
            step_tol: 1e-8,
            weight_tol: 1e-8,
            min_weight: 1e-14,
            relaxed_weight: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub fidelity: Complex64,
    /// |F(dt) - F(dt/2)|.
    pub step_change: f64,
}

/// Thermal weight of the states above `cutoff` for occupation `n`.
pub fn tail_weight(n: f64, cutoff: usize) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        (n / (n + 1.0)).powi(cutoff as i32 + 1)
    }
}

struct Problem {
    omega: Vec<f64>,
    x: Vec<f64>,
    lin: Vec<f64>,
    quad: Vec<f64>,
    gamma: f64,
}

/// Box of number states [lo_j, hi_j] for each mode.
struct Block {
    lo: Vec<usize>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Block {
    fn new(lo: Vec<usize>, hi: &[usize]) -> Self {
        let dims: Vec<usize> = lo.iter().zip(hi).map(|(l, h)| h - l + 1).collect();
        let mut strides = vec![1; dims.len()];
        for j in (0..dims.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * dims[j + 1];
        }
        let len = dims.iter().product();
        Self { lo, dims, strides, len }
    }

    /// out += coef * R_j(t) psi, with R_j = x_j (a e^{-iwt} + a^dag e^{iwt}).
    fn apply_r(&self, j: usize, x: f64, rot: Complex64, coef: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        let (dim, stride, lo) = (self.dims[j], self.strides[j], self.lo[j]);
        let down = coef * x * rot;
        let up = coef * x * rot.conj();
        let span = dim * stride;
        for base in (0..self.len).step_by(span) {
            for k in 0..dim {
                let row = base + k * stride;
                if k + 1 < dim {
                    let c = down * ((lo + k + 1) as f64).sqrt();
                    for i in row..row + stride {
                        out[i] += c * psi[i + stride];
                    }
                }
                if k > 0 {
                    let c = up * ((lo + k) as f64).sqrt();
                    for i in row..row + stride {
                        out[i] += c * psi[i - stride];
                    }
                }
            }
        }
    }
}

impl Problem {
    /// d psi / dt = -i H(t) psi.
    fn derivative(&self, block: &Block, t: f64, psi: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Vec<Complex64>>) {
        let env = (-self.gamma * t.abs()).exp();
        let n = self.omega.len();
        let rot: Vec<Complex64> = self.omega.iter().map(|w| Complex64::new(0.0, -w * t).exp()).collect();
        let one = Complex64::new(1.0, 0.0);
        for v in scratch.iter_mut() {
            v.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        }
        for k in 0..n {
            block.apply_r(k, self.x[k], rot[k], one, psi, &mut scratch[k]);
        }
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        let mi = Complex64::new(0.0, -env);
        for j in 0..n {
            if self.lin[j] != 0.0 {
                for (o, r) in out.iter_mut().zip(&scratch[j]) {
                    *o += mi * self.lin[j] * r;
                }
            }
            for k in 0..n {
                let d = self.quad[j * n + k];
                if d != 0.0 {
                    block.apply_r(j, self.x[j], rot[j], mi * d, &scratch[k], out);
                }
            }
        }
    }

    fn propagate(&self, block: &Block, psi: &mut Vec<Complex64>, t0: f64, t1: f64, steps: usize) {
        let h = (t1 - t0) / steps as f64;
        let len = block.len;
        let zero = Complex64::new(0.0, 0.0);
        let mut k1 = vec![zero; len];
        let mut k2 = vec![zero; len];
        let mut k3 = vec![zero; len];
        let mut k4 = vec![zero; len];
        let mut tmp = vec![zero; len];
        let mut scratch = vec![vec![zero; len]; self.omega.len()];
        for s in 0..steps {
            let t = t0 + s as f64 * h;
            self.derivative(block, t, psi, &mut k1, &mut scratch);
            for i in 0..len {
                tmp[i] = psi[i] + 0.5 * h * k1[i];
            }
            self.derivative(block, t + 0.5 * h, &tmp, &mut k2, &mut scratch);
            for i in 0..len {
                tmp[i] = psi[i] + 0.5 * h * k2[i];
            }
            self.derivative(block, t + 0.5 * h, &tmp, &mut k3, &mut scratch);
            for i in 0..len {
                tmp[i] = psi[i] + h * k3[i];
            }
            self.derivative(block, t + h, &tmp, &mut k4, &mut scratch);
            for i in 0..len {
                psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }

    /// <n|U|n> for the number state `n`.
    fn diagonal_element(&self, n: &[usize], settings: &OracleSettings, dt: f64) -> Complex64 {
        let lo: Vec<usize> = n.iter().map(|&k| k.saturating_sub(settings.window)).collect();
        let hi: Vec<usize> = n
            .iter()
            .zip(&settings.truncation)
            .map(|(&k, &cap)| (k + settings.window).min(cap))
            .collect();
        let block = Block::new(lo, &hi);
        let mut psi = vec![Complex64::new(0.0, 0.0); block.len];
        let start: usize = (0..n.len()).map(|j| (n[j] - block.lo[j]) * block.strides[j]).sum();
        psi[start] = Complex64::new(1.0, 0.0);
        let steps = (settings.t_max / dt).ceil() as usize;
        self.propagate(&block, &mut psi, -settings.t_max, 0.0, steps);
        self.propagate(&block, &mut psi, 0.0, settings.t_max, steps);
        psi[start]
    }
}

/// Thermal average of the exact evolution operator for a toy bath.
///
/// The bath must consist of self-conjugate modes with real couplings.
pub fn exact_fidelity_oracle(bath: &Bath, scales: &CouplingScales, settings: &OracleSettings) -> Result<OracleResult> {
    let n = bath.len();
    if n == 0 || n > 3 {
        return Err(Error::InvalidParameter(format!("oracle supports 1 to 3 modes, got {n}")));
    }
    if settings.truncation.len() != n {
        return Err(Error::InvalidParameter("one truncation per mode is required".into()));
    }
    if !(settings.dt > 0.0 && settings.t_max > 0.0) {
        return Err(Error::InvalidParameter("time step and range must be positive".into()));
    }
    let mut lin = vec![0.0; n];
    let mut quad = vec![0.0; n * n];
    for a in 0..n {
        let m = &bath.modes[a];
        if m.partner != a || m.f.im != 0.0 {
            return Err(Error::InvalidParameter("oracle needs self-conjugate modes with real couplings".into()));
        }
        lin[a] = scales.f_bar * m.f.re / bath.size;
        for b in 0..n {
            let g = bath.g(a, b);
            if g.im != 0.0 {
                return Err(Error::InvalidParameter("oracle needs real quadratic couplings".into()));
            }
            quad[a * n + b] = scales.g_bar * g.re / (bath.size * bath.size);
        }
    }
    for (j, m) in bath.modes.iter().enumerate() {
        let w = tail_weight(m.occupation, settings.truncation[j]);
        if w >= settings.weight_tol {
            return Err(Error::TruncationInsufficient { mode: j, weight: w });
        }
    }
    let problem = Problem {
        omega: bath.modes.iter().map(|m| m.omega).collect(),
        x: bath.modes.iter().map(|m| m.xsq.sqrt()).collect(),
        lin,
        quad,
        gamma: scales.gamma,
    };

    // Normalized geometric distributions on the truncated spaces.
    let probs: Vec<Vec<f64>> = bath
        .modes
        .iter()
        .zip(&settings.truncation)
        .map(|(m, &cap)| {
            let r = m.occupation / (m.occupation + 1.0);
            let raw: Vec<f64> = (0..=cap).map(|k| if k == 0 { 1.0 } else { r.powi(k as i32) }).collect();
            let z: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / z).collect()
        })
        .collect();

    let run = |dt: f64| -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        let mut skipped = 0.0;
        let mut state = vec![0usize; n];
        loop {
            let w: f64 = (0..n).map(|j| probs[j][state[j]]).product();
            if w >= settings.min_weight {
                let stretch = if w >= settings.relaxed_weight {
                    1.0
                } else if w >= settings.relaxed_weight * settings.relaxed_weight {
                    2.0
                } else {
                    4.0
                };
                total += w * problem.diagonal_element(&state, settings, dt * stretch);
            } else {
                skipped += w;
            }
            let mut j = n;
            loop {
                if j == 0 {
                    return total + skipped;
                }
                j -= 1;
                state[j] += 1;
                if state[j] <= settings.truncation[j] {
                    break;
                }
                state[j] = 0;
            }
        }
    };
    let coarse = run(settings.dt);
    let fine = run(0.5 * settings.dt);
    let change = (coarse - fine).norm();
    if change >= settings.step_tol {
        return Err(Error::StepNotConverged(change));
    }
    Ok(OracleResult {
        fidelity: fine,
        step_change: change,
    })
}
