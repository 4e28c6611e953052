//! Linked-cluster terms E1..E4 of the averaged evolution operator.
//!
//! Every contraction of R_a with its partner contributes the thermal
//! propagator xbar_a^2 [(n_a + 1) exp(-i w_a |t|) + n_a exp(i w_a |t|)];
//! the pulse time integrals are done in closed form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernels::{pair_kernel, pulse_spectrum, triple_kernel};
use super::{Bath, CouplingScales};
use crate::sum::{deterministic_sum, ComplexNeumaier, Neumaier};

/// How the two-mode terms treat occupations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DiagramMode {
    /// Leading order in the occupations, n_a n_b, with real kernels.
    #[default]
    HighTemperature,
    /// Every emission and absorption channel with the full complex kernels.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagrams {
    pub e1: Complex64,
    pub e2: Complex64,
    pub e3: Complex64,
    pub e4: Complex64,
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// E1 = -i (2G/Gamma) (1/L^2) sum_a G_{a,p(a)} xbar_a^2 (2 n_a + 1).
/// G_{a,p(a)} is real (the ion-pair phases of a and p(a) are conjugate), so
/// only its real part is summed and E1 is imaginary exactly.
pub fn term_e1(bath: &Bath, scales: &CouplingScales) -> Complex64 {
    let mut acc = Neumaier::new();
    for (a, m) in bath.modes.iter().enumerate() {
        acc.add(bath.g(a, m.partner).re * m.xsq * (2.0 * m.occupation + 1.0));
    }
    let l2 = bath.size * bath.size;
    Complex64::new(0.0, -2.0 * scales.g_bar / scales.gamma / l2 * acc.value())
}

/// E2 = -(F^2 / 2L^2) sum_a F_a F_{p(a)} xbar_a^2 [n_a K(-w_a) + (n_a + 1) K(w_a)].
/// Its real part is -(F^2/2L^2) sum |F_a|^2 xbar_a^2 (2 n_a + 1) P(w_a)^2.
pub fn term_e2(bath: &Bath, scales: &CouplingScales) -> Complex64 {
    let g = scales.gamma;
    let mut acc = ComplexNeumaier::new();
    for m in &bath.modes {
        let ff = m.f * bath.modes[m.partner].f;
        let n = m.occupation;
        let kern = n * pair_kernel(-m.omega, g) + (n + 1.0) * pair_kernel(m.omega, g);
        acc.add(ff * m.xsq * kern);
    }
    let l2 = bath.size * bath.size;
    -(scales.f_bar * scales.f_bar / (2.0 * l2)) * acc.value()
}

/// E3 = -(G^2/L^4) sum_ab G_ab G_{p(a)p(b)} xbar_a^2 xbar_b^2 S_ab, with
/// S_ab = sum over channel signs of c_a c_b K(+-w_a +- w_b) in exact mode and
/// n_a n_b [2 P(w_a + w_b)^2 + 2 P(w_a - w_b)^2] at high temperature.
pub fn term_e3(bath: &Bath, scales: &CouplingScales, mode: DiagramMode) -> Complex64 {
    let g = scales.gamma;
    let modes = &bath.modes;
    let sum = deterministic_sum(modes.len(), |a| {
        let ma = &modes[a];
        let mut acc = ComplexNeumaier::new();
        for (b, mb) in modes.iter().enumerate() {
            let gg = bath.g(a, b) * bath.g(ma.partner, mb.partner);
            if gg == Complex64::new(0.0, 0.0) {
                continue;
            }
            let w = ma.xsq * mb.xsq;
            let s = match mode {
                DiagramMode::HighTemperature => {
                    let p_sum = pulse_spectrum(ma.omega + mb.omega, g);
                    let p_diff = pulse_spectrum(ma.omega - mb.omega, g);
                    Complex64::new(ma.occupation * mb.occupation * 2.0 * (p_sum * p_sum + p_diff * p_diff), 0.0)
                }
                DiagramMode::Exact => {
                    let (na, nb) = (ma.occupation, mb.occupation);
                    (na + 1.0) * (nb + 1.0) * pair_kernel(ma.omega + mb.omega, g)
                        + (na + 1.0) * nb * pair_kernel(ma.omega - mb.omega, g)
                        + na * (nb + 1.0) * pair_kernel(mb.omega - ma.omega, g)
                        + na * nb * pair_kernel(-ma.omega - mb.omega, g)
                }
            };
            acc.add(gg * w * s);
        }
        acc.value()
    });
    let l4 = bath.size.powi(4);
    -(scales.g_bar * scales.g_bar / l4) * sum
}

/// E4 = i (F^2 G / L^4) sum_ab F_{p(a)} F_{p(b)} G_ab xbar_a^2 xbar_b^2 T_ab, with
/// T_ab = sum over channel signs of c_a c_b M(+-w_a, +-w_b) in exact mode and
/// n_a n_b 2 P(w_a) P(w_b) [P(w_a + w_b) + P(w_a - w_b)] at high temperature.
pub fn term_e4(bath: &Bath, scales: &CouplingScales, mode: DiagramMode) -> Complex64 {
    let g = scales.gamma;
    let modes = &bath.modes;
    let sum = deterministic_sum(modes.len(), |a| {
        let ma = &modes[a];
        let fa = modes[ma.partner].f;
        if fa == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = ComplexNeumaier::new();
        for (b, mb) in modes.iter().enumerate() {
            let c = fa * modes[mb.partner].f * bath.g(a, b);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let w = ma.xsq * mb.xsq;
            let t = match mode {
                DiagramMode::HighTemperature => {
                    let pp = pulse_spectrum(ma.omega, g) * pulse_spectrum(mb.omega, g);
                    let tail = pulse_spectrum(ma.omega + mb.omega, g) + pulse_spectrum(ma.omega - mb.omega, g);
                    Complex64::new(ma.occupation * mb.occupation * 2.0 * pp * tail, 0.0)
                }
                DiagramMode::Exact => {
                    let (na, nb) = (ma.occupation, mb.occupation);
                    (na + 1.0) * (nb + 1.0) * triple_kernel(ma.omega, mb.omega, g)
                        + (na + 1.0) * nb * triple_kernel(ma.omega, -mb.omega, g)
                        + na * (nb + 1.0) * triple_kernel(-ma.omega, mb.omega, g)
                        + na * nb * triple_kernel(-ma.omega, -mb.omega, g)
                }
            };
            acc.add(c * w * t);
        }
        acc.value()
    });
    let l4 = bath.size.powi(4);
    I * (scales.f_bar * scales.f_bar * scales.g_bar / l4) * sum
}

pub fn evaluate(bath: &Bath, scales: &CouplingScales, mode: DiagramMode) -> Diagrams {
    Diagrams {
        e1: term_e1(bath, scales),
        e2: term_e2(bath, scales),
        e3: term_e3(bath, scales, mode),
        e4: term_e4(bath, scales, mode),
    }
}
