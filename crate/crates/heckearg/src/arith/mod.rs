//! Arithmetic and special-function kernels.

mod bessel;
mod gamma;
mod kloosterman;
mod primes;

pub use bessel::bessel_j1;
pub use gamma::{ln_gamma, log_gamma_track};
pub use kloosterman::{kloosterman_sum, kloosterman_sum_general, KloostermanTable};
pub use primes::{
    divisor_tau, factorize, gcd, is_prime, mertens_sums, mod_inverse, von_mangoldt, MertensSums,
    PrimeTable, SIEVE_BUDGET, smallest_prime_factors,
};
