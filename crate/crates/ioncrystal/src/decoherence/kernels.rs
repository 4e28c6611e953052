//! Time integrals of the exponential pulse envelope exp(-Gamma |t|).
//!
//! `pair_kernel` and `triple_kernel` are the closed forms of
//!
//! K(W)      = int dt1 dt2 p(t1) p(t2) exp(-i W |t1 - t2|)
//! M(W1, W2) = int dt dt1 dt2 p(t) p(t1) p(t2) exp(-i W1 |t - t1|) exp(-i W2 |t - t2|)
//!
//! with p(t) = exp(-Gamma |t|). Quadrature versions are provided as an
//! independent check.

use num_complex::Complex64;

use crate::{Error, Result};

/// Lorentzian transform of the pulse, 2 Gamma / (w^2 + Gamma^2).
#[inline]
pub fn pulse_spectrum(omega: f64, gamma: f64) -> f64 {
    2.0 * gamma / (omega * omega + gamma * gamma)
}

/// K(W) = 2 [1/z^2 + 1/(Gamma z)] with z = Gamma + iW. Re K(W) = P(W)^2.
#[inline]
pub fn pair_kernel(w: f64, gamma: f64) -> Complex64 {
    let z = Complex64::new(gamma, w);
    let inv = z.inv();
    2.0 * (inv * inv + inv / gamma)
}

/// Coefficients of h_W(t) = alpha exp(-Gamma |t|) + beta exp(-iW |t|),
/// the single time integral of p(t1) exp(-iW |t - t1|).
#[inline]
fn response(w: f64, gamma: f64) -> (Complex64, Complex64) {
    let a = Complex64::new(gamma, w).inv();
    let b = Complex64::new(-gamma, w).inv();
    (a + b, a - b)
}

/// M(W1, W2) in closed form.
pub fn triple_kernel(w1: f64, w2: f64, gamma: f64) -> Complex64 {
    let (a1, b1) = response(w1, gamma);
    let (a2, b2) = response(w2, gamma);
    let i1 = Complex64::new(0.0, w1);
    let i2 = Complex64::new(0.0, w2);
    let g = Complex64::new(gamma, 0.0);
    2.0 * (a1 * a2 / (3.0 * gamma) + a1 * b2 / (2.0 * g + i2) + b1 * a2 / (2.0 * g + i1) + b1 * b2 / (g + i1 + i2))
}

/// Gauss-Legendre nodes and weights on [-1, 1], 16 points.
const GL_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_1,
];

fn gauss_panels<F: Fn(f64) -> Complex64>(a: f64, b: f64, panels: usize, f: &F) -> Complex64 {
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for k in 0..8 {
            let dx = half * GL_X[k];
            acc += GL_W[k] * half * (f(mid - dx) + f(mid + dx));
        }
    }
    acc
}

/// Integral of f over [-T, T] split at the kinks in `breaks`.
fn integrate_split<F: Fn(f64) -> Complex64>(t_max: f64, breaks: &[f64], panels: usize, f: &F) -> Complex64 {
    let mut pts: Vec<f64> = vec![-t_max, t_max];
    pts.extend(breaks.iter().copied().filter(|b| b.abs() < t_max));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| gauss_panels(w[0], w[1], panels, f)).sum()
}

fn h_quad(t: f64, w: f64, gamma: f64, t_max: f64, panels: usize) -> Complex64 {
    let f = |t1: f64| (-gamma * t1.abs()).exp() * Complex64::new(0.0, -w * (t - t1).abs()).exp();
    integrate_split(t_max, &[0.0, t], panels, &f)
}

/// Nested Gauss-Legendre quadrature of K(W), refined until two successive
/// panel counts agree to `tol` (relative).
pub fn pair_kernel_quadrature(w: f64, gamma: f64, tol: f64) -> Result<Complex64> {
    let t_max = 40.0 / gamma;
    refine(tol, |panels| {
        let f = |t: f64| (-gamma * t.abs()).exp() * h_quad(t, w, gamma, t_max, panels);
        integrate_split(t_max, &[0.0], panels, &f)
    })
}

/// Nested quadrature of M(W1, W2).
pub fn triple_kernel_quadrature(w1: f64, w2: f64, gamma: f64, tol: f64) -> Result<Complex64> {
    let t_max = 40.0 / gamma;
    refine(tol, |panels| {
        let f = |t: f64| {
            (-gamma * t.abs()).exp() * h_quad(t, w1, gamma, t_max, panels) * h_quad(t, w2, gamma, t_max, panels)
        };
        integrate_split(t_max, &[0.0], panels, &f)
    })
}

fn refine<F: Fn(usize) -> Complex64>(tol: f64, eval: F) -> Result<Complex64> {
    let mut panels = 16;
    let mut prev = eval(panels);
    let mut change = f64::INFINITY;
    while panels <= 256 {
        panels *= 2;
        let next = eval(panels);
        change = (next - prev).norm() / next.norm().max(f64::MIN_POSITIVE);
        if change < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged(change))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_values() {
        assert_eq!(pulse_spectrum(0.0, 0.5), 4.0);
        assert!((pulse_spectrum(0.5, 0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn spectrum_is_normalized() {
        // Integral of 2G/(w^2+G^2) over the real line is 2 pi.
        let g = 0.7;
        let total = 2.0 * (std::f64::consts::FRAC_PI_2) * 2.0;
        let antiderivative = |w: f64| 2.0 * (w / g).atan();
        let num = antiderivative(1e12) - antiderivative(-1e12);
        assert!((num - total).abs() < 1e-9);
    }

    #[test]
    fn pair_kernel_real_part_is_spectrum_squared() {
        for &(w, g) in &[(0.0, 1.0), (0.3, 0.05), (-2.0, 0.4), (17.0, 0.05)] {
            let k = pair_kernel(w, g);
            let p = pulse_spectrum(w, g);
            assert!((k.re - p * p).abs() <= 1e-12 * p * p);
        }
    }

    #[test]
    fn pair_kernel_zero_frequency() {
        // Both time integrals of exp(-G|t|) give 2/G.
        let g = 0.3;
        let k = pair_kernel(0.0, g);
        assert!((k.re - 4.0 / (g * g)).abs() < 1e-12);
        assert!(k.im.abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for &(w, g) in &[(0.7, 1.0), (-1.3, 0.5), (0.0, 1.0)] {
            let q = pair_kernel_quadrature(w, g, 1e-11).unwrap();
            let c = pair_kernel(w, g);
            assert!((q - c).norm() < 1e-8 * c.norm(), "{q} vs {c}");
        }
        for &(w1, w2, g) in &[(0.7, -0.4, 1.0), (1.5, 1.5, 0.8), (0.0, 0.9, 1.0)] {
            let q = triple_kernel_quadrature(w1, w2, g, 1e-10).unwrap();
            let c = triple_kernel(w1, w2, g);
            assert!((q - c).norm() < 1e-7 * c.norm(), "{q} vs {c}");
        }
    }

    #[test]
    fn triple_kernel_static_limit() {
        // With W1 = W2 = 0 the integrand factorizes into three copies of 2/G.
        let g = 0.6;
        let m = triple_kernel(0.0, 0.0, g);
        assert!((m.re - 8.0 / g.powi(3)).abs() < 1e-10);
        assert!(m.im.abs() < 1e-10);
    }
}
