//! The Hecke eigenbasis H₂(q): joint diagonalization on the plus quotient, eigenvalue
//! tables, signs and harmonic weights.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, smallest_prime_factors, PrimeTable};
use crate::error::{invalid, Error, Result};
use crate::modsym::{heilbronn, ManinSymbolSpace, Rational};
use crate::sym2::{harmonic_weight, sym2_coefficients, Sym2Evaluator};

/// Primes of the random combination used to separate eigensystems.
const SEPARATING_PRIMES: usize = 6;
const MATCH_TOLERANCE: f64 = 1e-6;
const PIVOT_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Computed,
    Ingested,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeckeEigenform {
    pub q: u64,
    pub id: usize,
    primes: Vec<u64>,
    values: Vec<f64>,
    pub epsilon: i32,
    pub omega: f64,
    pub sym2_l1: f64,
}

impl HeckeEigenform {
    pub fn new(q: u64, id: usize, lambda_p: Vec<(u64, f64)>, epsilon: i32, omega: f64, sym2_l1: f64) -> Self {
        let (primes, values) = lambda_p.into_iter().unzip();
        Self { q, id, primes, values, epsilon, omega, sym2_l1 }
    }

    /// Largest tabulated prime.
    pub fn p_max(&self) -> u64 {
        self.primes.last().copied().unwrap_or(0)
    }

    pub fn lambda_p(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.primes.iter().copied().zip(self.values.iter().copied())
    }

    pub fn lambda_prime(&self, p: u64) -> Option<f64> {
        self.primes.binary_search(&p).ok().map(|i| self.values[i])
    }

    /// λ_f(p^k) from the Hecke recursion.
    pub fn lambda_prime_power(&self, p: u64, k: u32) -> Result<f64> {
        let lam = self
            .lambda_prime(p)
            .ok_or(Error::TableTooShort { needed: p, have: self.p_max() })?;
        Ok(prime_power_value(lam, p == self.q, k))
    }

    /// λ_f(n) via multiplicativity.
    pub fn lambda_n(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(invalid("lambda_n needs n >= 1"));
        }
        let mut value = 1.0;
        for (p, k) in factorize(n) {
            value *= self.lambda_prime_power(p, k)?;
        }
        Ok(value)
    }

    /// λ_f(n) for every n ≤ n_max (index 0 holds 0).
    pub fn lambda_table(&self, n_max: usize) -> Result<Vec<f64>> {
        let spf = smallest_prime_factors(n_max.max(1));
        let mut out = vec![0.0; n_max + 1];
        if n_max >= 1 {
            out[1] = 1.0;
        }
        for n in 2..=n_max {
            let p = spf[n] as usize;
            let mut m = n;
            let mut k = 0;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            out[n] = self.lambda_prime_power(p as u64, k)? * out[m];
        }
        Ok(out)
    }

    /// Satake parameters (α, β): roots of 1 − λY + Y², or (λ_f(q), 0) at p = q.
    pub fn satake(&self, p: u64) -> Result<(num_complex::Complex64, num_complex::Complex64)> {
        use num_complex::Complex64;
        let lam = self.lambda_prime(p).ok_or(Error::TableTooShort { needed: p, have: self.p_max() })?;
        if p == self.q {
            return Ok((Complex64::new(lam, 0.0), Complex64::new(0.0, 0.0)));
        }
        if lam.abs() > 2.0 + 1e-8 {
            return Err(Error::Numerical(format!("Deligne bound violated: λ({p}) = {lam}")));
        }
        let lam = lam.clamp(-2.0, 2.0);
        let im = (1.0 - 0.25 * lam * lam).max(0.0).sqrt();
        Ok((Complex64::new(0.5 * lam, im), Complex64::new(0.5 * lam, -im)))
    }
}

pub(crate) fn prime_power_value(lam: f64, ramified: bool, k: u32) -> f64 {
    if ramified {
        return lam.powi(k as i32);
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..k {
        let next = lam * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub q: u64,
    pub dim: usize,
    pub p_max: u64,
    pub forms: Vec<HeckeEigenform>,
    pub provenance: Provenance,
}

impl EigenBasis {
    /// Sum of harmonic weights.
    pub fn weight_sum(&self) -> f64 {
        crate::numeric::compensated_sum(self.forms.iter().map(|f| f.omega))
    }
}

/// Default eigenvalue table length for level q.
pub fn default_p_max(q: u64) -> u64 {
    (11 * q + 10).max(2000)
}

fn to_f64(x: &Rational) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn dense(m: &[Vec<Rational>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| to_f64(&m[i][j]))
}

/// One cusp-form eigenvector of the transposed operators.
struct LeftVector {
    coeffs: Vec<f64>,
}

/// Joint diagonalization of the Hecke operators on the plus quotient.
pub fn diagonalize(space: &ManinSymbolSpace, p_max: u64) -> Result<EigenBasis> {
    diagonalize_with_order(space, p_max, None)
}

/// As [`diagonalize`], with an explicit ordering of the separating primes.
pub fn diagonalize_with_order(space: &ManinSymbolSpace, p_max: u64, order: Option<&[u64]>) -> Result<EigenBasis> {
    let q = space.level();
    if p_max < 97 {
        return Err(invalid(format!("P_max must be at least 97, got {p_max}")));
    }
    let dim = space.cuspidal_dim();
    if dim == 0 {
        return Ok(EigenBasis { q, dim, p_max, forms: Vec::new(), provenance: Provenance::Computed });
    }
    let table = PrimeTable::sieve(p_max)?;
    let small: Vec<u64> = match order {
        Some(o) => o.to_vec(),
        None => table.primes().iter().copied().filter(|&p| p != q).take(SEPARATING_PRIMES).collect(),
    };
    let vectors = separate(space, &small)?;
    let eigen = extend_eigenvalues(space, &vectors, &table)?;
    let w = dense(&space.atkin_lehner_plus());

    let mut forms = Vec::with_capacity(dim);
    for (vector, values) in vectors.iter().zip(eigen.iter()) {
        let phi = nalgebra::DVector::from_column_slice(&vector.coeffs);
        let image = w.transpose() * &phi;
        let w_eig = image.dot(&phi) / phi.dot(&phi);
        if (w_eig.abs() - 1.0).abs() > 1e-6 {
            return Err(Error::Numerical(format!("Atkin-Lehner eigenvalue {w_eig} is not ±1")));
        }
        let epsilon = if w_eig < 0.0 { 1 } else { -1 };
        let mut lambda_p: Vec<(u64, f64)> = Vec::with_capacity(values.len() + 1);
        for (&p, &a) in table.primes().iter().filter(|&&p| p != q).zip(values.iter()) {
            lambda_p.push((p, a / (p as f64).sqrt()));
        }
        if q <= p_max {
            lambda_p.push((q, epsilon as f64 / (q as f64).sqrt()));
            lambda_p.sort_by_key(|e| e.0);
        }
        forms.push(HeckeEigenform::new(q, 0, lambda_p, epsilon, 0.0, 0.0));
    }
    sort_forms(&mut forms);
    check_separation(&forms)?;
    attach_weights(&mut forms, q)?;
    for (i, f) in forms.iter_mut().enumerate() {
        f.id = i;
    }
    Ok(EigenBasis { q, dim, p_max, forms, provenance: Provenance::Computed })
}

/// Computes sym² values and harmonic weights in place.
pub fn attach_weights(forms: &mut [HeckeEigenform], q: u64) -> Result<()> {
    if forms.is_empty() {
        return Ok(());
    }
    let evaluator = Sym2Evaluator::new(q, 1.0);
    let needed = evaluator.length();
    forms.par_iter_mut().try_for_each(|f| -> Result<()> {
        if (f.p_max() as usize) < needed {
            return Err(Error::TableTooShort { needed: needed as u64, have: f.p_max() });
        }
        let b = sym2_coefficients(q, |p| f.lambda_prime(p), needed)?;
        let l1 = evaluator.value(&b)?;
        if !(l1 > 0.0) {
            return Err(Error::Numerical(format!("L(1, sym²f) = {l1} is not positive")));
        }
        f.sym2_l1 = l1;
        f.omega = harmonic_weight(q, l1);
        Ok(())
    })
}

fn sort_forms(forms: &mut [HeckeEigenform]) {
    let key = |f: &HeckeEigenform| -> Vec<i64> {
        f.lambda_p().take(8).map(|(_, v)| (v * 1e7).round() as i64).collect()
    };
    forms.sort_by(|a, b| key(a).cmp(&key(b)));
}

fn check_separation(forms: &[HeckeEigenform]) -> Result<()> {
    for i in 0..forms.len() {
        for j in i + 1..forms.len() {
            let dist = forms[i]
                .lambda_p()
                .zip(forms[j].lambda_p())
                .map(|((_, a), (_, b))| (a - b).abs())
                .fold(0.0, f64::max);
            if dist < MATCH_TOLERANCE {
                return Err(Error::Collision(i, j));
            }
        }
    }
    Ok(())
}

/// Left eigenvectors of a random combination of T_p on the plus quotient, Eisenstein line removed.
fn separate(space: &ManinSymbolSpace, primes: &[u64]) -> Result<Vec<LeftVector>> {
    let dim = space.plus_dim();
    let mats: Vec<DMatrix<f64>> = primes
        .par_iter()
        .map(|&p| space.hecke_matrix_plus(p).map(|m| dense(&m)))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(space.level());
    for _attempt in 0..8 {
        let coeffs: Vec<f64> = primes.iter().map(|_| rng.random_range(1..=32) as f64).collect();
        let mut combo = DMatrix::<f64>::zeros(dim, dim);
        for (m, c) in mats.iter().zip(&coeffs) {
            combo += m * *c;
        }
        let eisenstein: f64 = primes.iter().zip(&coeffs).map(|(&p, c)| c * (p as f64 + 1.0)).sum();
        let Some(eigs) = combo.clone().schur().eigenvalues() else {
            continue;
        };
        let mut values: Vec<f64> = eigs.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        let eis_pos = values
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - eisenstein).abs().total_cmp(&(b.1 - eisenstein).abs()))
            .map(|(i, _)| i)
            .expect("nonempty");
        if (values[eis_pos] - eisenstein).abs() > 1e-6 * eisenstein {
            return Err(Error::Numerical("Eisenstein eigenvalue not found".into()));
        }
        values.remove(eis_pos);
        let scale = combo.amax().max(1.0);
        let min_gap = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if min_gap < 1e-5 * scale {
            continue;
        }
        let transposed = combo.transpose();
        let mut out = Vec::with_capacity(values.len());
        for &mu in &values {
            out.push(inverse_iteration(&transposed, mu, scale)?);
        }
        // every vector must be a joint eigenvector
        for v in &out {
            let phi = nalgebra::DVector::from_column_slice(&v.coeffs);
            for m in &mats {
                let img = m.transpose() * &phi;
                let a = img.dot(&phi) / phi.dot(&phi);
                let resid = (img - &phi * a).amax();
                if resid > 1e-8 * (1.0 + m.amax()) {
                    return Err(Error::Numerical(format!("joint eigenvector residual {resid:e}")));
                }
            }
        }
        return Ok(out);
    }
    Err(Error::Numerical(format!(
        "could not separate eigensystems at level {} with primes {primes:?}",
        space.level()
    )))
}

fn inverse_iteration(mat: &DMatrix<f64>, mu: f64, scale: f64) -> Result<LeftVector> {
    let n = mat.nrows();
    let shift = mu + 1e-10 * scale;
    let shifted = mat - DMatrix::<f64>::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut v = nalgebra::DVector::<f64>::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618).fract());
    for _ in 0..4 {
        let next = lu.solve(&v).ok_or_else(|| Error::Numerical("singular shift".into()))?;
        let norm = next.amax();
        v = next / norm;
    }
    let big = v.iamax();
    let sign = v[big].signum();
    Ok(LeftVector { coeffs: v.iter().map(|x| x * sign).collect() })
}

/// a_p for all tabulated primes p ≠ q, per eigenvector, from φ(T_p e_j)/φ(e_j).
fn extend_eigenvalues(
    space: &ManinSymbolSpace,
    vectors: &[LeftVector],
    table: &PrimeTable,
) -> Result<Vec<Vec<f64>>> {
    let q = space.level();
    let coords = space.coords_table();
    let nsym = space.symbol_count();
    let nforms = vectors.len();
    // ψ_f(s) = φ_f · coords(s), stored symbol-major
    let mut psi = vec![0.0; nsym * nforms];
    for s in 0..nsym {
        for (f, v) in vectors.iter().enumerate() {
            psi[s * nforms + f] = coords[s].iter().zip(&v.coeffs).map(|(a, b)| a * b).sum();
        }
    }
    let (pivots, pivot_of_form) = choose_pivots(vectors);
    let primes: Vec<u64> = table.primes().iter().copied().filter(|&p| p != q).collect();
    let per_prime: Vec<Vec<f64>> = primes
        .par_iter()
        .map(|&p| {
            let mats = heilbronn(p);
            let mut counts = vec![0i64; nsym];
            let mut result = vec![0.0; nforms];
            for (slot, &g) in pivots.iter().enumerate() {
                counts.iter_mut().for_each(|c| *c = 0);
                for image in space.heilbronn_images(space.generator_symbol(g), &mats) {
                    counts[image] += 1;
                }
                let mut acc = vec![0.0; nforms];
                for (s, &c) in counts.iter().enumerate() {
                    if c != 0 {
                        let row = &psi[s * nforms..(s + 1) * nforms];
                        let cf = c as f64;
                        for (a, x) in acc.iter_mut().zip(row) {
                            *a += cf * x;
                        }
                    }
                }
                for (f, v) in vectors.iter().enumerate() {
                    if pivot_of_form[f] == slot {
                        result[f] = acc[f] / v.coeffs[g];
                    }
                }
            }
            result
        })
        .collect();
    let mut out = vec![Vec::with_capacity(primes.len()); nforms];
    for row in per_prime {
        for (f, a) in row.into_iter().enumerate() {
            out[f].push(a);
        }
    }
    Ok(out)
}

/// Greedy set cover: few generators g with |φ_f(g)| ≥ PIVOT_RATIO·max|φ_f| for every form.
fn choose_pivots(vectors: &[LeftVector]) -> (Vec<usize>, Vec<usize>) {
    let ngen = vectors.first().map_or(0, |v| v.coeffs.len());
    let ratio = |v: &LeftVector, g: usize| {
        let max = v.coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        v.coeffs[g].abs() / max
    };
    let mut uncovered: Vec<usize> = (0..vectors.len()).collect();
    let mut pivots = Vec::new();
    while !uncovered.is_empty() {
        let best = (0..ngen)
            .max_by_key(|&g| uncovered.iter().filter(|&&f| ratio(&vectors[f], g) >= PIVOT_RATIO).count())
            .expect("generators exist");
        let before = uncovered.len();
        uncovered.retain(|&f| ratio(&vectors[f], best) < PIVOT_RATIO);
        if uncovered.len() == before {
            // cannot happen: the argmax coordinate of any form has ratio 1
            let f = uncovered[0];
            let g = (0..ngen).max_by(|&a, &b| ratio(&vectors[f], a).total_cmp(&ratio(&vectors[f], b))).unwrap();
            uncovered.retain(|&h| ratio(&vectors[h], g) < PIVOT_RATIO);
            pivots.push(g);
            continue;
        }
        pivots.push(best);
    }
    let assignment = vectors
        .iter()
        .map(|v| {
            (0..pivots.len())
                .max_by(|&a, &b| ratio(v, pivots[a]).total_cmp(&ratio(v, pivots[b])))
                .expect("at least one pivot")
        })
        .collect();
    (pivots, assignment)
}

/// Diagonalize and return the eigenvalue multiset {λ_f(p)} keyed by prime, for invariance checks.
pub fn eigenvalue_multisets(basis: &EigenBasis, primes: &[u64]) -> BTreeMap<u64, Vec<f64>> {
    primes
        .iter()
        .map(|&p| {
            let mut v: Vec<f64> = basis.forms.iter().filter_map(|f| f.lambda_prime(p)).collect();
            v.sort_by(f64::total_cmp);
            (p, v)
        })
        .collect()
}

/// Worst-case residuals of the Deligne, Hecke-relation and sign-quantization checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub q: u64,
    pub dim: usize,
    /// max over forms and n of |λ_f(n)| − τ(n)
    pub deligne_excess: f64,
    pub hecke_residual: f64,
    pub sign_residual: f64,
    /// min over pairs of the max eigenvalue difference, None below two forms
    pub separation: Option<f64>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.deligne_excess <= 1e-8
            && self.hecke_residual <= 1e-8
            && self.sign_residual <= 1e-6
            && self.separation.is_none_or(|gap| gap > MATCH_TOLERANCE)
    }
}

/// Deligne bound over n ≤ n_max (skipping n with an untabulated prime factor), Hecke
/// relations over `pairs` seeded random (m, n) ≤ pair_max, and |q·λ_f(q)² − 1|.
pub fn check_invariants(basis: &EigenBasis, n_max: usize, pairs: usize, pair_max: u64, seed: u64) -> Result<InvariantReport> {
    let q = basis.q;
    let spf = smallest_prime_factors(n_max.max(2));
    let tau: Vec<u64> = (0..=n_max).map(|n| if n == 0 { 0 } else { crate::arith::divisor_tau(n as u64) }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(u64, u64)> =
        (0..pairs).map(|_| (rng.random_range(1..=pair_max), rng.random_range(1..=pair_max))).collect();
    let mut report = InvariantReport {
        q,
        dim: basis.dim,
        deligne_excess: f64::NEG_INFINITY,
        hecke_residual: 0.0,
        sign_residual: 0.0,
        separation: None,
    };
    for form in &basis.forms {
        let table_max = form.p_max();
        for n in 1..=n_max {
            let mut m = n;
            let mut covered = true;
            while m > 1 {
                let p = spf[m] as u64;
                if p > table_max {
                    covered = false;
                    break;
                }
                m /= p as usize;
            }
            if covered {
                let excess = form.lambda_n(n as u64)?.abs() - tau[n] as f64;
                report.deligne_excess = report.deligne_excess.max(excess);
            }
        }
        for &(m, n) in &samples {
            let g = crate::arith::gcd(m, n);
            let mut rhs = 0.0;
            for d in (1..=g).filter(|d| g % d == 0 && d % q != 0) {
                rhs += form.lambda_n(m * n / (d * d))?;
            }
            let residual = (form.lambda_n(m)? * form.lambda_n(n)? - rhs).abs();
            report.hecke_residual = report.hecke_residual.max(residual);
        }
        if let Some(lq) = form.lambda_prime(q) {
            report.sign_residual = report.sign_residual.max((q as f64 * lq * lq - 1.0).abs());
        }
    }
    for (i, a) in basis.forms.iter().enumerate() {
        for b in &basis.forms[i + 1..] {
            let gap = a.lambda_p().zip(b.lambda_p()).map(|((_, x), (_, y))| (x - y).abs()).fold(0.0, f64::max);
            report.separation = Some(report.separation.map_or(gap, |s| s.min(gap)));
        }
    }
    if basis.forms.is_empty() {
        report.deligne_excess = 0.0;
    }
    Ok(report)
}
