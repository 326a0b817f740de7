use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::primes::{gcd, is_prime, mod_inverse};
use crate::numeric::Neumaier;

/// S(m,n;c) by direct summation over reduced residues.
pub fn kloosterman_sum(m: i64, n: i64, c: u64) -> f64 {
    kloosterman_sum_general(m, n, c)
}

/// Direct summation; panics if the imaginary part fails to vanish.
pub fn kloosterman_sum_general(m: i64, n: i64, c: u64) -> f64 {
    assert!(c >= 1, "kloosterman modulus must be positive");
    if c == 1 {
        return 1.0;
    }
    let ci = c as i128;
    let mi = (m as i128).rem_euclid(ci);
    let ni = (n as i128).rem_euclid(ci);
    let step = std::f64::consts::TAU / c as f64;
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    for a in 1..c {
        if gcd(a, c) != 1 {
            continue;
        }
        let abar = mod_inverse(a as i64, c as i64).expect("unit has inverse") as i128;
        let k = (mi * a as i128 + ni * abar) % ci;
        let angle = step * k as f64;
        re.add(angle.cos());
        im.add(angle.sin());
    }
    let imag = im.value();
    assert!(
        imag.abs() <= 1e-10 * (c as f64).sqrt().max(1.0),
        "Kloosterman imaginary part {imag} for c = {c}"
    );
    re.value()
}

/// All values S(b,1;P) for b mod P, from one inverse DFT of x -> e(x̄/P).
#[derive(Debug, Clone)]
pub struct KloostermanTable {
    modulus: u64,
    values: Vec<f64>,
}

impl KloostermanTable {
    pub fn new(modulus: u64, planner: &mut FftPlanner<f64>) -> Self {
        assert!(modulus >= 1);
        if modulus == 1 {
            return Self { modulus, values: vec![1.0] };
        }
        let len = modulus as usize;
        let step = std::f64::consts::TAU / modulus as f64;
        let mut buf = vec![Complex::new(0.0, 0.0); len];
        if is_prime(modulus) {
            let mut inverse = vec![0u64; len];
            inverse[1] = 1;
            for x in 2..len {
                let m = modulus;
                inverse[x] = (m - (m / x as u64) * inverse[(m % x as u64) as usize] % m) % m;
            }
            for (slot, inv) in buf.iter_mut().zip(&inverse).skip(1) {
                let angle = step * *inv as f64;
                *slot = Complex::new(angle.cos(), angle.sin());
            }
        } else {
            for (x, slot) in buf.iter_mut().enumerate().skip(1) {
                if let Some(inv) = mod_inverse(x as i64, modulus as i64) {
                    let angle = step * inv as f64;
                    *slot = Complex::new(angle.cos(), angle.sin());
                }
            }
        }
        planner.plan_fft_inverse(len).process(&mut buf);
        Self { modulus, values: buf.into_iter().map(|z| z.re).collect() }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn get(&self, b: i64) -> f64 {
        self.values[b.rem_euclid(self.modulus as i64) as usize]
    }
}
