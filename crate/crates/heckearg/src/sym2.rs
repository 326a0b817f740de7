//! L(1, sym²f) by a smoothed approximate functional equation.
//!
//! The completed function is q^s·Γ_ℝ(s+1)·Γ_ℂ(s+1)·L(s, sym²f), conductor q², root number +1.

use num_complex::Complex64;

use crate::arith::{ln_gamma, smallest_prime_factors};
use crate::error::{Error, Result};
use crate::numeric::Neumaier;

const CONTOUR_RE: f64 = 1.0;
const STEP: f64 = 0.05;
const HEIGHT: f64 = 60.0;
/// Kernel values below this fraction of γ(1) are treated as zero.
const KERNEL_FLOOR: f64 = 1e-15;

fn gamma_factor(s: Complex64) -> Complex64 {
    let pi = std::f64::consts::PI;
    let ln = -(s + 1.0) * 0.5 * pi.ln() + ln_gamma((s + 1.0) * 0.5) + 2f64.ln()
        - (s + 1.0) * (2.0 * pi).ln()
        + ln_gamma(s + 1.0);
    ln.exp()
}

/// Contour nodes for W_s(y) = (1/2πi)∫_{(c)} γ(s+w) y^{−w} dw/w.
#[derive(Debug, Clone)]
pub struct Sym2Kernel {
    s: f64,
    heights: Vec<f64>,
    weights: Vec<Complex64>,
}

impl Sym2Kernel {
    pub fn new(s: f64) -> Self {
        let count = (HEIGHT / STEP) as usize;
        let mut heights = Vec::with_capacity(count + 1);
        let mut weights = Vec::with_capacity(count + 1);
        for k in 0..=count {
            let u = k as f64 * STEP;
            let w = Complex64::new(CONTOUR_RE, u);
            let factor = if k == 0 { 1.0 } else { 2.0 };
            heights.push(u);
            weights.push(gamma_factor(Complex64::new(s, 0.0) + w) / w * (factor * STEP / std::f64::consts::TAU));
        }
        Self { s, heights, weights }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// W_s(y) for y > 0 (real because the integrand is conjugate-symmetric).
    pub fn eval(&self, y: f64) -> f64 {
        let ln_y = y.ln();
        let scale = (-CONTOUR_RE * ln_y).exp();
        let mut acc = Neumaier::new();
        for (u, w) in self.heights.iter().zip(&self.weights) {
            let (sin, cos) = (u * ln_y).sin_cos();
            // Re(w · e^{−iu ln y})
            acc.add(w.re * cos + w.im * sin);
        }
        acc.value() * scale
    }
}

/// Dirichlet coefficients of L(s, sym²f) from the normalized Hecke eigenvalues.
pub fn sym2_coefficients(q: u64, lambda_prime: impl Fn(u64) -> Option<f64>, n_max: usize) -> Result<Vec<f64>> {
    let spf = smallest_prime_factors(n_max.max(1));
    let mut b = vec![0.0; n_max + 1];
    if n_max >= 1 {
        b[1] = 1.0;
    }
    for n in 2..=n_max {
        let p = spf[n] as usize;
        let mut m = n;
        let mut k = 0;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        let local = local_coefficient(q, p as u64, k, &lambda_prime)?;
        b[n] = local * b[m];
    }
    Ok(b)
}

fn local_coefficient(q: u64, p: u64, k: u32, lambda_prime: &impl Fn(u64) -> Option<f64>) -> Result<f64> {
    if p == q {
        return Ok((q as f64).powi(-(k as i32)));
    }
    let lam = lambda_prime(p).ok_or(Error::TableTooShort { needed: p, have: 0 })?;
    let e = lam * lam - 1.0;
    let mut prev = [0.0, 0.0, 1.0]; // b(p^{j-3}), b(p^{j-2}), b(p^{j-1})
    for _ in 0..k {
        let next = e * prev[2] - e * prev[1] + prev[0];
        prev = [prev[1], prev[2], next];
    }
    Ok(prev[2])
}

/// Precomputed kernels for one level; shared by all forms of that level.
#[derive(Debug, Clone)]
pub struct Sym2Evaluator {
    q: u64,
    split: f64,
    first: Vec<f64>,
    second: Vec<f64>,
    gamma_at_one: f64,
}

impl Sym2Evaluator {
    /// Kernels at split point `split` (the approximate functional equation is exact for every split).
    pub fn new(q: u64, split: f64) -> Self {
        let k1 = Sym2Kernel::new(1.0);
        let k0 = Sym2Kernel::new(0.0);
        let gamma_at_one = gamma_factor(Complex64::new(1.0, 0.0)).re;
        let qf = q as f64;
        let mut first = vec![0.0];
        let mut second = vec![0.0];
        let mut n = 1usize;
        loop {
            let nf = n as f64;
            let w1 = k1.eval(nf / (qf * split));
            let w0 = k0.eval(nf * split / qf);
            first.push(w1 * qf / nf);
            second.push(w0);
            if w1.abs() < KERNEL_FLOOR * gamma_at_one && w0.abs() < KERNEL_FLOOR * gamma_at_one {
                break;
            }
            n += 1;
        }
        Self { q, split, first, second, gamma_at_one }
    }

    /// Ratio n/(q·split) beyond which both kernels are negligible.
    pub fn cutoff_ratio() -> f64 {
        static CUT: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
        *CUT.get_or_init(|| {
            let k1 = Sym2Kernel::new(1.0);
            let k0 = Sym2Kernel::new(0.0);
            let floor = KERNEL_FLOOR * gamma_factor(Complex64::new(1.0, 0.0)).re;
            let mut y = 1.0;
            while k1.eval(y).abs() >= floor || k0.eval(y).abs() >= floor {
                y += 0.05;
            }
            y
        })
    }

    /// Number of coefficients the sum needs.
    pub fn length(&self) -> usize {
        self.first.len() - 1
    }

    pub fn split(&self) -> f64 {
        self.split
    }

    /// L(1, sym²f) from its Dirichlet coefficients b[0..=length].
    pub fn value(&self, b: &[f64]) -> Result<f64> {
        let len = self.length();
        if b.len() <= len {
            return Err(Error::TableTooShort { needed: len as u64, have: b.len().saturating_sub(1) as u64 });
        }
        let mut acc = Neumaier::new();
        for n in 1..=len {
            acc.add(b[n] * (self.first[n] + self.second[n]));
        }
        Ok(acc.value() / (self.q as f64 * self.gamma_at_one))
    }
}

/// Truncated Euler product for L(1, sym²f) over p ≤ p_max (a low-precision cross-check).
pub fn sym2_euler(q: u64, primes: &[u64], lambda_prime: impl Fn(u64) -> Option<f64>) -> Result<f64> {
    let mut log = Neumaier::new();
    for &p in primes {
        let pf = p as f64;
        if p == q {
            log.add(-(1.0 - 1.0 / (pf * pf)).ln());
            continue;
        }
        let lam = lambda_prime(p).ok_or(Error::TableTooShort { needed: p, have: 0 })?;
        let e = lam * lam - 1.0;
        let x = 1.0 / pf;
        let factor = 1.0 - e * x + e * x * x - x * x * x;
        log.add(-factor.ln());
    }
    Ok(log.value().exp())
}

/// ω_f = 2π² / (q·L(1, sym²f)).
pub fn harmonic_weight(q: u64, sym2_l1: f64) -> f64 {
    2.0 * std::f64::consts::PI.powi(2) / (q as f64 * sym2_l1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_at_zero_height_limit() {
        // W_s(y) → γ(s) as y → 0⁺, with an O(y² log y) correction
        let k = Sym2Kernel::new(1.0);
        let g = gamma_factor(Complex64::new(1.0, 0.0)).re;
        let rel = (k.eval(1e-7) / g - 1.0).abs();
        assert!(rel < 1e-9, "{rel:e}");
        assert!((g - 1.0 / (2.0 * std::f64::consts::PI.powi(3))).abs() < 1e-15);
    }

    #[test]
    fn local_coefficients_match_generating_function() {
        // λ = 0 gives e = −1: 1/((1+x)(1−x)(1+x)) ... check first terms directly
        let lam = |_p: u64| Some(0.0);
        let b: Vec<f64> = (0..4).map(|k| local_coefficient(11, 2, k, &lam).unwrap()).collect();
        // 1/((1 + x²... ) expand (1 + x − x² ... ) numerically
        // factor 1 − e x + e x² − x³ with e = −1 → 1 + x − x² − x³
        // inverse series: 1, −1, 2, −2
        assert_eq!(b, vec![1.0, -1.0, 2.0, -2.0]);
    }
}
