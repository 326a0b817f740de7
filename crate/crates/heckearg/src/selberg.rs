//! Selberg's smoothed weights Λ_x(n), the coefficients C_f(n) of −L′/L, the weighted
//! prime-power Dirichlet polynomials and the approximation of S(t,f) built from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, PrimeTable};
use crate::error::{invalid, Error, Result};
use crate::hecke::HeckeEigenform;
use crate::numeric::{Neumaier, NeumaierComplex};

/// The three smoothing formulas (n ≤ x, x ≤ n ≤ x², x² ≤ n ≤ x³) at a real point u.
pub fn smoothing_branches(u: f64, x: f64) -> [f64; 3] {
    let lx2 = x.ln().powi(2);
    let upper = (x.powi(3) / u).ln().powi(2);
    let middle = (x * x / u).ln().powi(2);
    [1.0, (upper - 2.0 * middle) / (2.0 * lx2), upper / (2.0 * lx2)]
}

/// Λ_x(u)/Λ(u) as a function of the real variable u.
pub fn smoothing_weight(u: f64, x: f64) -> f64 {
    let b = smoothing_branches(u, x);
    if u <= x {
        b[0]
    } else if u <= x * x {
        b[1]
    } else if u < x.powi(3) {
        b[2]
    } else {
        0.0
    }
}

/// Λ_x(n).
pub fn lambda_x(n: u64, x: f64) -> f64 {
    let factors = factorize(n);
    if factors.len() != 1 {
        return 0.0;
    }
    (factors[0].0 as f64).ln() * smoothing_weight(n as f64, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimePower {
    pub n: u64,
    pub p: u64,
    pub m: u32,
    pub weight: f64,
}

/// Λ_x(n) for every prime power n < x³.
#[derive(Debug, Clone, PartialEq)]
pub struct SelbergTable {
    x: f64,
    entries: Vec<PrimePower>,
}

impl SelbergTable {
    pub fn new(x: f64) -> Result<Self> {
        if !(x >= 4.0 && x.is_finite()) {
            return Err(invalid(format!("x must be >= 4, got {x}")));
        }
        Self::build(x)
    }

    /// No lower limit on x; used for desk-scale x = q^{δ/3} < 4.
    pub fn unrestricted(x: f64) -> Result<Self> {
        if !(x > 1.0 && x.is_finite()) {
            return Err(invalid(format!("x must exceed 1, got {x}")));
        }
        Self::build(x)
    }

    fn build(x: f64) -> Result<Self> {
        let limit = x.powi(3);
        let table = PrimeTable::sieve(limit.floor() as u64 + 1)?;
        let mut entries = Vec::new();
        for &p in table.primes_up_to(limit) {
            let mut n = p;
            let mut m = 1;
            while (n as f64) < limit {
                entries.push(PrimePower { n, p, m, weight: lambda_x(n, x) });
                match n.checked_mul(p) {
                    Some(next) => n = next,
                    None => break,
                }
                m += 1;
            }
        }
        entries.sort_by_key(|e| e.n);
        Ok(Self { x, entries })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn entries(&self) -> &[PrimePower] {
        &self.entries
    }

    pub fn largest_prime(&self) -> u64 {
        self.entries.iter().map(|e| e.p).max().unwrap_or(1)
    }
}

/// C_f(p^m) = α^m + β^m.
pub fn c_f_prime_power(form: &HeckeEigenform, p: u64, m: u32) -> Result<f64> {
    let lam = form.lambda_prime(p).ok_or(Error::TableTooShort { needed: p, have: form.p_max() })?;
    if p == form.q {
        return Ok(lam.powi(m as i32));
    }
    if lam.abs() > 2.0 + 1e-8 {
        return Err(Error::Numerical(format!("Deligne bound violated: λ({p}) = {lam}")));
    }
    let (mut prev, mut cur) = (2.0, lam);
    if m == 0 {
        return Ok(prev);
    }
    for _ in 1..m {
        let next = lam * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// C_f(n), zero unless n is a prime power.
pub fn c_f(form: &HeckeEigenform, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("c_f needs n >= 1"));
    }
    match factorize(n).as_slice() {
        [(p, m)] => c_f_prime_power(form, *p, *m),
        _ => Ok(0.0),
    }
}

/// Σ_{n<x³} C_f(n)Λ_x(n) n^{−s}, optionally with each term divided by log n.
pub fn weighted_poly(form: &HeckeEigenform, table: &SelbergTable, s: Complex64, divide_by_log: bool) -> Result<Complex64> {
    let mut sum = NeumaierComplex::default();
    for e in table.entries() {
        if e.weight == 0.0 {
            continue;
        }
        let log_n = (e.n as f64).ln();
        let mut term = (-s * log_n).exp() * c_f_prime_power(form, e.p, e.m)? * e.weight;
        if divide_by_log {
            term /= log_n;
        }
        sum.add(term);
    }
    Ok(sum.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxS {
    pub main: f64,
    pub sigma_x: f64,
    /// (σ_x − ½)·|Σ C_f(n)Λ_x(n) n^{−σ_x−it}|
    pub poly_term: f64,
    /// (σ_x − ½)·log(|t| + q)
    pub log_term: f64,
}

/// The prime-power approximation of S(t,f) at abscissa σ_x, with both error-term
/// magnitudes evaluated.
pub fn approx_s(form: &HeckeEigenform, table: &SelbergTable, t: f64, sigma_x: f64) -> Result<ApproxS> {
    let s = Complex64::new(sigma_x, t);
    let main = weighted_poly(form, table, s, true)?.im / PI;
    let shift = sigma_x - 0.5;
    let poly_term = shift * weighted_poly(form, table, s, false)?.norm();
    let log_term = shift * (t.abs() + form.q as f64).ln();
    Ok(ApproxS { main, sigma_x, poly_term, log_term })
}

/// M(t,f) = −(1/π) Σ_{p≤x³} λ_f(p) sin(t log p)/√p.
pub fn m_value(form: &HeckeEigenform, t: f64, x: f64) -> Result<f64> {
    let table = PrimeTable::sieve(x.powi(3).floor() as u64 + 1)?;
    m_value_with(form, t, table.primes().iter().copied().filter(|&p| (p as f64) <= x.powi(3)))
}

pub(crate) fn m_value_with(form: &HeckeEigenform, t: f64, primes: impl Iterator<Item = u64>) -> Result<f64> {
    let mut sum = Neumaier::new();
    for p in primes {
        let lam = form.lambda_prime(p).ok_or(Error::TableTooShort { needed: p, have: form.p_max() })?;
        let lp = (p as f64).ln();
        sum.add(lam * (t * lp).sin() / (p as f64).sqrt());
    }
    Ok(-sum.value() / PI)
}

/// R(t,f) = S(t,f) − M(t,f).
pub fn r_value(s_value: f64, m_value: f64) -> f64 {
    s_value - m_value
}
