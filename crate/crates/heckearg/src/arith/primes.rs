use crate::error::{invalid, Error, Result};
use crate::numeric::Neumaier;

/// Largest sieve limit accepted by default.
pub const SIEVE_BUDGET: u64 = 100_000_000;

/// Primes up to a limit, with a membership table.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    composite: Vec<bool>,
}

impl PrimeTable {
    pub fn sieve(limit: u64) -> Result<Self> {
        Self::sieve_with_budget(limit, SIEVE_BUDGET)
    }

    pub fn sieve_with_budget(limit: u64, budget: u64) -> Result<Self> {
        if limit < 2 {
            return Err(invalid(format!("sieve limit {limit} below 2")));
        }
        if limit > budget {
            return Err(invalid(format!("sieve limit {limit} exceeds budget {budget}")));
        }
        let n = limit as usize;
        let mut composite = vec![false; n + 1];
        composite[0] = true;
        composite[1] = true;
        let mut i = 2usize;
        while i * i <= n {
            if !composite[i] {
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
            i += 1;
        }
        let primes = (2..=n).filter(|&k| !composite[k]).map(|k| k as u64).collect();
        Ok(Self { limit, primes, composite })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n <= self.limit && !self.composite[n as usize]
    }

    pub fn primes_up_to(&self, x: f64) -> &[u64] {
        let end = self.primes.partition_point(|&p| (p as f64) <= x);
        &self.primes[..end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertensSums {
    pub x: f64,
    pub sum_recip: f64,
    pub sum_logp_over_p: f64,
    pub sum_log2p_over_p: f64,
    pub c1_estimate: f64,
}

pub fn mertens_sums(x: f64, table: &PrimeTable) -> Result<MertensSums> {
    if !(x >= 2.0) {
        return Err(invalid(format!("mertens_sums needs x >= 2, got {x}")));
    }
    if (table.limit() as f64) < x.floor() {
        return Err(Error::TableTooShort { needed: x.floor() as u64, have: table.limit() });
    }
    let mut recip = Neumaier::new();
    let mut logp = Neumaier::new();
    let mut log2p = Neumaier::new();
    for &p in table.primes_up_to(x) {
        let pf = p as f64;
        let l = pf.ln();
        recip.add(1.0 / pf);
        logp.add(l / pf);
        log2p.add(l * l / pf);
    }
    let sum_recip = recip.value();
    Ok(MertensSums {
        x,
        sum_recip,
        sum_logp_over_p: logp.value(),
        sum_log2p_over_p: log2p.value(),
        c1_estimate: sum_recip - x.ln().ln(),
    })
}

/// Smallest prime factor of every n ≤ limit (index 0 and 1 hold 0 and 1).
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = (0..=limit as u32).collect();
    let mut i = 2usize;
    while i * i <= limit {
        if spf[i] == i as u32 {
            let mut j = i * i;
            while j <= limit {
                if spf[j] == j as u32 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        i += 1;
    }
    spf
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m))
}

/// Prime factorization by trial division, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

pub fn divisor_tau(n: u64) -> u64 {
    assert!(n >= 1, "divisor_tau needs n >= 1");
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

pub fn von_mangoldt(n: u64) -> f64 {
    assert!(n >= 1, "von_mangoldt needs n >= 1");
    match factorize(n).as_slice() {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sieves() {
        assert_eq!(PrimeTable::sieve(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(PrimeTable::sieve(2).unwrap().primes(), &[2]);
        assert!(PrimeTable::sieve(1).is_err());
        assert!(PrimeTable::sieve_with_budget(1000, 100).is_err());
    }

    #[test]
    fn mod_inverse_works() {
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(-3, 7), Some(2));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(mod_inverse(5, 1), Some(0));
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(97), vec![(97, 1)]);
    }
}
