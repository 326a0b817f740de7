//! Family statistics over H₂(q): both sides of the Petersson formula, harmonic moments,
//! the exact moment expansion of M(t,f), and the weighted distribution of S(t,f).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::arith::{
    bessel_j1, divisor_tau, gcd, kloosterman_sum_general, mod_inverse, KloostermanTable, PrimeTable,
};
use crate::error::{invalid, Result};
use crate::hecke::EigenBasis;
use crate::numeric::{compensated_sum, Neumaier};

pub const TUPLE_LIMIT: u64 = 10_000_000;

/// Σ_f ω_f λ_f(m) λ_f(n).
pub fn petersson_lhs(basis: &EigenBasis, m: u64, n: u64) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(invalid("Petersson indices must be positive"));
    }
    let mut sum = Neumaier::new();
    for form in &basis.forms {
        sum.add(form.omega * (form.lambda_n(m)? * form.lambda_n(n)?));
    }
    Ok(sum.value())
}

/// q^{−3/2} (m,n,q) √(mn) τ((m,n)) / ((m,q)+(n,q))^{1/2}.
pub fn lemma_error(q: u64, m: u64, n: u64) -> f64 {
    let g = gcd(m, n);
    let mnq = gcd(g, q) as f64;
    let denom = (gcd(m, q) + gcd(n, q)) as f64;
    (q as f64).powf(-1.5) * mnq * ((m * n) as f64).sqrt() * divisor_tau(g) as f64 / denom.sqrt()
}

/// Whether 6π√(mn) ≤ q.
pub fn lemma_applies(q: u64, m: u64, n: u64) -> bool {
    6.0 * PI * ((m * n) as f64).sqrt() <= q as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSide {
    pub q: u64,
    pub m: u64,
    pub n: u64,
    pub c_max: u64,
    pub rhs_truncated: f64,
    pub tail_bound: f64,
    pub kronecker: u8,
    pub lemma_applies: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeterssonReport {
    pub q: u64,
    pub m: u64,
    pub n: u64,
    pub lhs: f64,
    pub rhs_truncated: f64,
    pub c_max: u64,
    pub tail_bound: f64,
    pub kronecker: u8,
    pub lemma_applies: bool,
}

impl PeterssonReport {
    pub fn new(lhs: f64, side: GeometricSide) -> Self {
        Self {
            q: side.q,
            m: side.m,
            n: side.n,
            lhs,
            rhs_truncated: side.rhs_truncated,
            c_max: side.c_max,
            tail_bound: side.tail_bound,
            kronecker: side.kronecker,
            lemma_applies: side.lemma_applies,
        }
    }

    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs_truncated).abs()
    }
}

/// Σ_{k>K} τ(k) k^{−3/2}, bounded by partial summation with D(u) ≤ u log u + u + 3√u.
pub fn divisor_tail_three_halves(k_max: u64) -> f64 {
    let k = k_max as f64;
    1.5 * ((2.0 * k.ln() + 4.0) / k.sqrt() + 2.0 / k.sqrt() + 3.0 / k)
}

/// Bound on the omitted terms c > c_max of the Kloosterman side, from the Weil bound
/// and J₁(y) ≤ y/2.
pub fn petersson_tail_bound(q: u64, m: u64, n: u64, c_max: u64) -> f64 {
    let k_max = c_max / q;
    let g = gcd(m, n) as f64;
    4.0 * PI * PI * ((m * n) as f64).sqrt() * g.sqrt() * (q as f64).powf(-1.5) * 2.0 * divisor_tail_three_halves(k_max)
}

pub fn petersson_rhs(q: u64, m: u64, n: u64, c_max: u64) -> Result<GeometricSide> {
    Ok(petersson_rhs_many(q, &[(m, n)], c_max)?[0])
}

/// δ_{m,n} − 2π Σ_{q | c ≤ c_max} S(m,n;c)/c · J₁(4π√(mn)/c) for several (m, n) at once.
pub fn petersson_rhs_many(q: u64, pairs: &[(u64, u64)], c_max: u64) -> Result<Vec<GeometricSide>> {
    if c_max < q {
        return Err(invalid(format!("c_max = {c_max} must be at least q = {q}")));
    }
    if pairs.iter().any(|&(m, n)| m == 0 || n == 0) {
        return Err(invalid("Petersson indices must be positive"));
    }
    let k_max = (c_max / q) as usize;
    let sieve = PrimeTable::sieve((k_max as u64).max(q))?;
    let primes: Vec<u64> = sieve.primes().iter().copied().filter(|&p| p as usize <= k_max || p == q).collect();

    let factors: Vec<Vec<(usize, Vec<f64>)>> = primes
        .par_iter()
        .map(|&p| local_factors(q, p, pairs, k_max))
        .collect();

    let mut products = vec![vec![1.0f64; k_max + 1]; pairs.len()];
    for per_prime in &factors {
        for (k, values) in per_prime {
            for (slot, v) in values.iter().enumerate() {
                products[slot][*k] *= v;
            }
        }
    }

    Ok(pairs
        .iter()
        .enumerate()
        .map(|(slot, &(m, n))| {
            let arg = 4.0 * PI * ((m * n) as f64).sqrt();
            let mut sum = Neumaier::new();
            for k in 1..=k_max {
                let c = (q as usize * k) as f64;
                sum.add(products[slot][k] / c * bessel_j1(arg / c));
            }
            let kronecker = u8::from(m == n);
            GeometricSide {
                q,
                m,
                n,
                c_max,
                rhs_truncated: kronecker as f64 - 2.0 * PI * sum.value(),
                tail_bound: petersson_tail_bound(q, m, n, c_max),
                kronecker,
                lemma_applies: lemma_applies(q, m, n),
            }
        })
        .collect())
}

/// The factors S(m c̄′, n c̄′; P) for every prime power P = p^j exactly dividing c = qk,
/// c′ = c/P, k ≤ k_max.
fn local_factors(q: u64, p: u64, pairs: &[(u64, u64)], k_max: usize) -> Vec<(usize, Vec<f64>)> {
    let mut out = Vec::new();
    let mut planner = FftPlanner::new();
    let mut modulus = p;
    let mut stride = if p == q { 1 } else { p };
    while stride as usize <= k_max {
        let ks: Vec<usize> = (stride as usize..=k_max)
            .step_by(stride as usize)
            .filter(|&k| (k / stride as usize) as u64 % p != 0)
            .collect();
        if !ks.is_empty() {
            let fast = pairs.iter().any(|&(m, n)| gcd(m, n) % p != 0);
            let table = fast.then(|| KloostermanTable::new(modulus, &mut planner));
            let mi = modulus as i64;
            for k in ks {
                let cofactor = (q * k as u64 / modulus) as i64;
                let inv = mod_inverse(cofactor.rem_euclid(mi), mi).expect("coprime cofactor");
                let inv2 = (inv as i128 * inv as i128 % mi as i128) as i64;
                let values = pairs
                    .iter()
                    .map(|&(m, n)| match &table {
                        Some(table) if gcd(m, n) % p != 0 => {
                            let mn = ((m * n) as i128 % mi as i128) as i64;
                            table.get((mn as i128 * inv2 as i128 % mi as i128) as i64)
                        }
                        _ => {
                            let a = (m as i128 * inv as i128 % mi as i128) as i64;
                            let b = (n as i128 * inv as i128 % mi as i128) as i64;
                            kloosterman_sum_general(a, b, modulus)
                        }
                    })
                    .collect();
                out.push((k, values));
            }
        }
        modulus = match modulus.checked_mul(p) {
            Some(next) => next,
            None => break,
        };
        stride = match stride.checked_mul(p) {
            Some(next) => next,
            None => break,
        };
    }
    out
}

/// Σ_f ω_f v_f^n.
pub fn harmonic_moment(basis: &EigenBasis, values: &[f64], n: u32) -> Result<f64> {
    if values.len() != basis.forms.len() {
        return Err(invalid(format!("{} values for {} forms", values.len(), basis.forms.len())));
    }
    Ok(compensated_sum(basis.forms.iter().zip(values).map(|(f, v)| f.omega * v.powi(n as i32))))
}

/// C_n = n!/((n/2)! (2π)^n) for even n, 0 for odd n.
pub fn moment_constant(n: u32) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let factorial = |k: u32| (1..=k).map(f64::from).product::<f64>();
    factorial(n) / (factorial(n / 2) * (2.0 * PI).powi(n as i32))
}

/// C_n (log log q)^{n/2}.
pub fn predicted_moment(n: u32, q: u64) -> Result<f64> {
    if q < 16 {
        return Err(invalid("predicted moments need q >= 16"));
    }
    Ok(moment_constant(n) * (q as f64).ln().ln().powf(n as f64 / 2.0))
}

/// The primes p ≤ q^δ entering M(t,f) at x = q^{δ/3}.
pub fn moment_primes(q: u64, delta: f64) -> Result<Vec<u64>> {
    let limit = (q as f64).powf(delta);
    let table = PrimeTable::sieve(limit.floor() as u64 + 1)?;
    Ok(table.primes().iter().copied().filter(|&p| p as f64 <= limit).collect())
}

/// M(t,f) for every form at x = q^{δ/3}.
pub fn m_values(basis: &EigenBasis, t: f64, delta: f64) -> Result<Vec<f64>> {
    let primes = moment_primes(basis.q, delta)?;
    basis
        .forms
        .iter()
        .map(|f| crate::selberg::m_value_with(f, t, primes.iter().copied()))
        .collect()
}

/// λ(p)^k = Σ_j coeff_j λ(p^j) for p ∤ q.
fn power_expansion(k: u32) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    for _ in 0..k {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            next[j + 1] += c;
            if j >= 1 {
                next[j - 1] += c;
            }
        }
        coeffs = next;
    }
    coeffs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentOracle {
    pub value: f64,
    pub off_diag_budget: f64,
    pub tuples: u64,
}

/// Σ_f ω_f M(t,f)^n by expanding the n-th power over prime multisets, reducing each
/// product of λ_f(p) to λ_f(N) by the Hecke relations and averaging with petersson_lhs.
pub fn model_moment_oracle(basis: &EigenBasis, n: u32, t: f64, delta: f64) -> Result<MomentOracle> {
    let q = basis.q;
    let primes = moment_primes(q, delta)?;
    let tuples = (primes.len() as u64).checked_pow(n).unwrap_or(u64::MAX);
    if tuples > TUPLE_LIMIT {
        return Err(invalid(format!(
            "{tuples} prime tuples exceed {TUPLE_LIMIT}; choose a smaller delta"
        )));
    }
    let weights: Vec<f64> = primes
        .iter()
        .map(|&p| -(t * (p as f64).ln()).sin() / (PI * (p as f64).sqrt()))
        .collect();
    let factorial = |k: u32| (1..=k).map(f64::from).product::<f64>();

    let mut averages: BTreeMap<u64, f64> = BTreeMap::new();
    let mut value = Neumaier::new();
    let mut budget = Neumaier::new();
    let mut combos: Vec<Vec<u32>> = Vec::new();
    combos_step(&primes, &vec![0; primes.len()], 0, n, &mut combos);

    for combo in &combos {
        let mut coef = factorial(n);
        for (k, w) in combo.iter().zip(&weights) {
            coef *= w.powi(*k as i32) / factorial(*k);
        }
        // Σ over exponent vectors of Π coefficients · λ(Π p^j).
        let mut terms: Vec<(u64, f64)> = vec![(1, 1.0)];
        for (&p, &k) in primes.iter().zip(combo) {
            if k == 0 {
                continue;
            }
            let local: Vec<(u64, f64)> = if p == q {
                vec![(p.pow(k), 1.0)]
            } else {
                power_expansion(k)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| *c != 0.0)
                    .map(|(j, c)| (p.pow(j as u32), c))
                    .collect()
            };
            terms = terms
                .iter()
                .flat_map(|&(a, ca)| local.iter().map(move |&(b, cb)| (a * b, ca * cb)))
                .collect();
        }
        for (big_n, c) in terms {
            let average = match averages.get(&big_n) {
                Some(v) => *v,
                None => {
                    let v = petersson_lhs(basis, big_n, 1)?;
                    averages.insert(big_n, v);
                    v
                }
            };
            value.add(coef * c * average);
            if big_n != 1 {
                budget.add((coef * c).abs() * 10.0 * lemma_error(q, big_n, 1));
            }
        }
    }
    Ok(MomentOracle { value: value.value(), off_diag_budget: budget.value(), tuples })
}

fn combos_step(primes: &[u64], current: &[u32], index: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if index == primes.len() {
        if left == 0 {
            out.push(current.to_vec());
        }
        return;
    }
    for k in 0..=left {
        let mut next = current.to_vec();
        next[index] = k;
        combos_step(primes, &next, index + 1, left - k, out);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalCheck {
    /// (1/π²) Σ_p sin²(t log p)/p · Σ_f ω_f λ_f(p)²
    pub oracle: f64,
    /// (1/π²) Σ_p sin²(t log p)/p
    pub closed_form: f64,
    /// Σ_p (1/π²) sin²(t log p)/p · 10·lemma_error(q, p, p)
    pub budget: f64,
}

pub fn diagonal_second_moment(basis: &EigenBasis, t: f64, delta: f64) -> Result<DiagonalCheck> {
    let mut oracle = Neumaier::new();
    let mut closed = Neumaier::new();
    let mut budget = Neumaier::new();
    for p in moment_primes(basis.q, delta)? {
        let w = (t * (p as f64).ln()).sin().powi(2) / (PI * PI * p as f64);
        oracle.add(w * petersson_lhs(basis, p, p)?);
        closed.add(w);
        budget.add(w * 10.0 * lemma_error(basis.q, p, p));
    }
    Ok(DiagonalCheck { oracle: oracle.value(), closed_form: closed.value(), budget: budget.value() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub q: u64,
    pub t: f64,
    pub n: u32,
    pub delta: f64,
    pub empirical: f64,
    pub oracle: f64,
    pub predicted_main: f64,
    pub off_diag_budget: f64,
}

impl MomentReport {
    pub fn deviation(&self) -> f64 {
        self.empirical - self.predicted_main
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub form_id: usize,
    pub value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub q: u64,
    pub t: f64,
    pub samples: Vec<Sample>,
    pub ks_distance: f64,
    /// Σ_f ω_f v_f^k for k = 1..=6.
    pub moment_table: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

/// Variance of the limiting Gaussian.
pub fn limit_variance() -> f64 {
    1.0 / (2.0 * PI * PI)
}

/// CDF of the centered Gaussian with variance (2π²)⁻¹.
pub fn limit_cdf(v: f64) -> f64 {
    0.5 * (1.0 + libm::erf(PI * v))
}

/// Weighted distribution of S(t,f)/√(log log q). `s_values[i]` belongs to `basis.forms[i]`.
pub fn distribution_mu_q(basis: &EigenBasis, t: f64, s_values: &[Option<f64>]) -> Result<DistributionReport> {
    if s_values.len() != basis.forms.len() {
        return Err(invalid(format!("{} values for {} forms", s_values.len(), basis.forms.len())));
    }
    let missing: Vec<usize> = basis
        .forms
        .iter()
        .zip(s_values)
        .filter(|(_, v)| v.is_none())
        .map(|(f, _)| f.id)
        .collect();
    if !missing.is_empty() {
        return Err(invalid(format!("S(t,f) missing for forms {missing:?}")));
    }
    let lll = (basis.q as f64).ln().ln();
    if lll <= 0.0 {
        return Err(invalid("distribution needs log log q > 0"));
    }
    let scale = lll.sqrt();
    let mut samples: Vec<Sample> = basis
        .forms
        .iter()
        .zip(s_values)
        .map(|(f, v)| Sample { form_id: f.id, value: v.unwrap_or_default() / scale, weight: f.omega })
        .collect();
    samples.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.form_id.cmp(&b.form_id)));
    let total = compensated_sum(samples.iter().map(|s| s.weight));
    let moment_table = (1..=6)
        .map(|k| compensated_sum(samples.iter().map(|s| s.weight * s.value.powi(k))))
        .collect::<Vec<_>>();
    let mean = moment_table[0] / total;
    let variance = compensated_sum(samples.iter().map(|s| s.weight * (s.value - mean).powi(2))) / total;
    Ok(DistributionReport { q: basis.q, t, ks_distance: ks_distance(&samples, total), samples, moment_table, mean, variance })
}

/// Kolmogorov–Smirnov distance between the right-continuous weighted empirical CDF of
/// sorted samples and the limiting Gaussian.
fn ks_distance(samples: &[Sample], total: f64) -> f64 {
    let mut below = 0.0;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < samples.len() {
        let v = samples[i].value;
        let g = limit_cdf(v);
        worst = worst.max((below / total - g).abs());
        while i < samples.len() && samples[i].value == v {
            below += samples[i].weight;
            i += 1;
        }
        worst = worst.max((below / total - g).abs());
    }
    worst.min(1.0)
}
