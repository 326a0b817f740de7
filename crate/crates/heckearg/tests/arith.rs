use std::f64::consts::PI;

use heckearg::arith::{
    bessel_j1, divisor_tau, gcd, kloosterman_sum, log_gamma_track, mertens_sums, von_mangoldt,
    KloostermanTable, PrimeTable,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rustfft::FftPlanner;

fn naive_primes(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
}

/// J₁ from its power series, summed until terms vanish.
fn series_j1(x: f64) -> f64 {
    let mut term = x / 2.0;
    let mut sum = term;
    for k in 1..200 {
        term *= -(x * x / 4.0) / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// J₁(x) = (1/π)∫₀^π cos(θ − x sin θ) dθ by composite Simpson.
fn integral_j1(x: f64) -> f64 {
    let steps = 4000;
    let h = PI / steps as f64;
    let mut sum = 0.0;
    for k in 0..=steps {
        let th = k as f64 * h;
        let w = if k == 0 || k == steps { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * (th - x * th.sin()).cos();
    }
    sum * h / 3.0 / PI
}

#[test]
fn sieve_examples() {
    assert_eq!(PrimeTable::sieve(10).unwrap().primes(), &[2, 3, 5, 7]);
    assert_eq!(PrimeTable::sieve(2).unwrap().primes(), &[2]);
    assert!(PrimeTable::sieve(1).is_err());
    assert!(PrimeTable::sieve(200_000_000).is_err());
    let table = PrimeTable::sieve(1_000_000).unwrap();
    assert_eq!(table.primes().len(), 78498);
    assert_eq!(&table.primes()[..168], naive_primes(1000).as_slice());
    assert!(table.is_prime(999_983) && !table.is_prime(999_981));
}

#[test]
fn mertens_examples_and_bounds() {
    let table = PrimeTable::sieve(1_000_000).unwrap();
    let direct = 0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0;
    assert!((mertens_sums(10.0, &table).unwrap().sum_recip - direct).abs() < 1e-15);
    let hundred: f64 = naive_primes(100).iter().map(|&p| 1.0 / p as f64).sum();
    let m100 = mertens_sums(100.0, &table).unwrap();
    assert!((m100.sum_recip - hundred).abs() < 1e-13);
    assert!((m100.sum_recip - 1.802817).abs() < 1e-6);
    assert_eq!(mertens_sums(2.0, &table).unwrap().sum_recip, 0.5);
    assert!(mertens_sums(2e6, &table).is_err());
    let mut x = 100.0;
    while x <= 1e6 {
        let m = mertens_sums(x, &table).unwrap();
        assert!(m.c1_estimate.abs() <= 0.3, "x={x}");
        assert!(m.sum_log2p_over_p <= 1.5 * x.ln().powi(2));
        assert!(m.sum_logp_over_p >= 0.0);
        x *= 1.37;
    }
    let m = mertens_sums(1e6, &table).unwrap();
    assert!((m.c1_estimate - 0.2615).abs() < 1e-3);
}

#[test]
fn small_functions() {
    assert_eq!(divisor_tau(1), 1);
    assert_eq!(divisor_tau(12), 6);
    assert_eq!(divisor_tau(97), 2);
    assert_eq!(von_mangoldt(1), 0.0);
    assert!((von_mangoldt(8) - 2f64.ln()).abs() < 1e-15);
    assert_eq!(von_mangoldt(6), 0.0);
    for n in 1..500u64 {
        assert_eq!(divisor_tau(n), (1..=n).filter(|d| n % d == 0).count() as u64);
    }
}

#[test]
fn kloosterman_examples() {
    assert_eq!(kloosterman_sum(1, 1, 1), 1.0);
    assert!((kloosterman_sum(1, 1, 2) - 1.0).abs() < 1e-12);
    assert!((kloosterman_sum(1, 1, 3) + 1.0).abs() < 1e-12);
    assert!((kloosterman_sum(0, 0, 12) - 4.0).abs() < 1e-12);
    // Ramanujan sum c_q(1) = μ(q)
    assert!((kloosterman_sum(1, 0, 30) + 1.0).abs() < 1e-12);
}

#[test]
fn kloosterman_table_matches_direct() {
    let mut planner = FftPlanner::new();
    for modulus in [5u64, 9, 25, 49, 97, 121, 128] {
        let table = KloostermanTable::new(modulus, &mut planner);
        for b in -3..(modulus as i64 + 3) {
            let direct = kloosterman_sum(b, 1, modulus);
            assert!((table.get(b) - direct).abs() < 1e-9, "P={modulus} b={b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn kloosterman_weil_bound(m in 1i64..=100, n in 1i64..=100, c in 1u64..=2000) {
        let value = kloosterman_sum(m, n, c);
        let (mu, nu) = (m as u64, n as u64);
        let g = gcd(gcd(mu, nu), c) as f64;
        let reduced = (c / gcd(nu, c)).min(c / gcd(mu, c)) as f64;
        let bound = g * reduced.sqrt() * divisor_tau(c) as f64;
        prop_assert!(value.abs() <= bound + 1e-9, "S({m},{n};{c}) = {value} > {bound}");
    }

    #[test]
    fn kloosterman_symmetry(m in -100i64..=100, n in -100i64..=100, c in 1u64..=2000) {
        prop_assert!((kloosterman_sum(m, n, c) - kloosterman_sum(n, m, c)).abs() <= 1e-10 * (c as f64));
        prop_assert!((kloosterman_sum(m, n, c) - kloosterman_sum(m + c as i64, n, c)).abs() <= 1e-10 * (c as f64));
    }

    #[test]
    fn j1_bounds(x in 1e-6f64..200.0) {
        let j = bessel_j1(x);
        prop_assert!(j.abs() <= (x / 2.0).min(0.9));
        if x > 1.0 {
            prop_assert!(j.abs() <= x.powf(-0.5));
        }
    }
}

#[test]
fn j1_examples() {
    assert_eq!(bessel_j1(0.0), 0.0);
    assert!((bessel_j1(0.1) - 0.049937526).abs() < 1e-9);
    assert!((bessel_j1(1.0) - 0.440050586).abs() < 1e-9);
    for k in 0..60 {
        let x = 0.25 + 0.5 * k as f64;
        let reference = if x < 12.0 { series_j1(x) } else { integral_j1(x) };
        assert!((bessel_j1(x) - reference).abs() < 1e-12, "x={x}");
    }
    for x in [1e3, 1e4, 1e6] {
        assert!(bessel_j1(x).abs() <= x.powf(-0.5));
    }
}

#[test]
fn j1_dense_grid_bounds() {
    let mut x = 1e-3;
    while x < 2000.0 {
        let j = bessel_j1(x);
        assert!(j.abs() <= (x / 2.0).min(0.9), "x={x}");
        if x > 1.0 {
            assert!(j.abs() <= x.powf(-0.5), "x={x}");
        }
        x += 0.01 * (1.0 + x / 100.0);
    }
}

#[test]
fn log_gamma_examples() {
    let one = Complex64::new(1.0, 0.0);
    assert!(log_gamma_track(one, one).unwrap().norm() < 1e-14);
    let two = Complex64::new(2.0, 0.0);
    assert!(log_gamma_track(two, two).unwrap().norm() < 1e-14);
    let half = log_gamma_track(Complex64::new(3.0, 0.0), Complex64::new(0.5, 0.0)).unwrap();
    assert!((half.re - 0.5 * PI.ln()).abs() < 1e-12);
    assert!(half.im.abs() < 1e-12);
    assert!(log_gamma_track(Complex64::new(2.0, 0.0), Complex64::new(-2.5, 0.0)).is_err());
}

#[test]
fn log_gamma_branch_continuity() {
    // Stirling: Im log Γ(σ+it) grows like t log t, well past π.
    let t = 40.0;
    let far = log_gamma_track(Complex64::new(20.0, t), Complex64::new(0.5, t)).unwrap();
    let stirling = {
        let z = Complex64::new(0.5, t);
        (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z * z)
    };
    assert!((far - stirling).norm() < 1e-8, "{far} vs {stirling}");
}
