use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::numeric::principal_angle;

const STIRLING_SHIFT: f64 = 15.0;

/// Bernoulli numbers B_2k / (2k(2k−1)) for the Stirling tail.
const STIRLING_COEFFS: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// log Γ(z) on the plane slit along the non-positive reals, continuous there and real
/// on the positive axis.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < STIRLING_SHIFT {
        shift += w.ln();
        w += 1.0;
    }
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING_COEFFS {
        tail += pow * c;
        pow *= inv2;
    }
    let half_ln_two_pi = 0.5 * (std::f64::consts::TAU).ln();
    (w - 0.5) * w.ln() - w + half_ln_two_pi + tail - shift
}

/// log Γ(z₁) continued along the horizontal segment from z₀, starting from the
/// principal value at z₀.
pub fn log_gamma_track(z0: Complex64, z1: Complex64) -> Result<Complex64> {
    if (z0.im - z1.im).abs() > 1e-12 * (1.0 + z0.im.abs()) {
        return Err(invalid("log_gamma_track needs a horizontal segment"));
    }
    if z0.im == 0.0 {
        let (lo, hi) = if z0.re < z1.re { (z0.re, z1.re) } else { (z1.re, z0.re) };
        if lo <= 0.0 && hi.min(0.0).floor() >= lo {
            return Err(invalid("segment meets a pole of Gamma"));
        }
    }
    let mut current = ln_gamma(z0);
    let mut x = z0.re;
    let target = z1.re;
    let mut step = 0.25f64.copysign(target - x);
    while (target - x).abs() > 0.0 {
        if step.abs() > (target - x).abs() {
            step = target - x;
        }
        let next = Complex64::new(x + step, z0.im);
        let raw = ln_gamma(next);
        let delta = principal_angle(raw.im - current.im);
        if delta.abs() >= std::f64::consts::FRAC_PI_2 {
            step *= 0.5;
            if step.abs() < 1e-12 {
                return Err(invalid("log_gamma_track failed to converge"));
            }
            continue;
        }
        current = Complex64::new(raw.re, current.im + delta);
        x += step;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_real_values() {
        assert!(ln_gamma(Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(ln_gamma(Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let half = ln_gamma(Complex64::new(0.5, 0.0));
        assert!((half.re - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-14);
        // Γ(10) = 362880
        assert!((ln_gamma(Complex64::new(10.0, 0.0)).re - 362880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn reflection_modulus() {
        // |Γ(1/2 + it)|² = π / cosh(πt)
        for t in [0.3, 1.0, 7.0, 40.0] {
            let lg = ln_gamma(Complex64::new(0.5, t));
            let expected = 0.5 * (std::f64::consts::PI / (std::f64::consts::PI * t).cosh()).ln();
            assert!((lg.re - expected).abs() < 1e-12, "t={t}");
        }
    }
}
