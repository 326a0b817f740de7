/// J₁(x) for x ≥ 0: power series for small x, the periodic Bessel integral by the
/// trapezoid rule in the middle range, Hankel's asymptotic expansion for large x.
pub fn bessel_j1(x: f64) -> f64 {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j1 needs finite x >= 0");
    if x <= SERIES_MAX {
        j1_series(x)
    } else if x < ASYMPTOTIC_MIN {
        j1_integral(x)
    } else {
        j1_asymptotic(x)
    }
}

const SERIES_MAX: f64 = 8.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

pub(crate) fn j1_series(x: f64) -> f64 {
    let h = 0.5 * x;
    let h2 = h * h;
    let mut term = h;
    let mut sum = term;
    for k in 1..=40 {
        term *= -h2 / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// (1/π)∫₀^π cos(τ − x sin τ) dτ; the integrand is smooth and periodic, so the
/// trapezoid rule converges geometrically.
pub(crate) fn j1_integral(x: f64) -> f64 {
    let nodes = 96;
    let h = std::f64::consts::PI / nodes as f64;
    let mut sum = 0.5 * ((0.0f64).cos() + (std::f64::consts::PI).cos());
    for k in 1..nodes {
        let tau = k as f64 * h;
        sum += (tau - x * tau.sin()).cos();
    }
    sum * h / std::f64::consts::PI
}

pub(crate) fn j1_asymptotic(x: f64) -> f64 {
    let mu = 4.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    let omega = x - 0.75 * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}
