use std::f64::consts::PI;
use std::sync::OnceLock;

use heckearg::hecke::{default_p_max, diagonalize, EigenBasis};
use heckearg::lfunction::{
    fitted_sign, functional_equation_residual, sigma_x_from_zeros, AfeParams, LFunction,
};
use heckearg::modsym::ManinSymbolSpace;
use num_complex::Complex64;

fn basis(q: u64) -> &'static EigenBasis {
    static CACHE: OnceLock<Vec<EigenBasis>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        [11u64, 37]
            .iter()
            .map(|&q| diagonalize(&ManinSymbolSpace::build(q).unwrap(), default_p_max(q)).unwrap())
            .collect()
    });
    all.iter().find(|b| b.q == q).unwrap()
}

fn level_11() -> LFunction {
    LFunction::new(&basis(11).forms[0], &AfeParams::default()).unwrap()
}

/// Λ(½+it) by Simpson quadrature of the theta integral on the positive real axis.
fn real_axis_completed(coeffs: &[f64], q: u64, epsilon: f64, s: Complex64) -> Complex64 {
    let scale = (q as f64).sqrt() / (2.0 * PI);
    let theta = |y: f64| -> f64 {
        let mut total = 0.0;
        for (n, c) in coeffs.iter().enumerate().skip(1) {
            let e = n as f64 * y / scale;
            if e > 60.0 {
                break;
            }
            total += c * (n as f64 / scale).sqrt() * (-e).exp();
        }
        total
    };
    let upper = (60.0 * scale).ln();
    let steps = 20000;
    let h = upper / steps as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=steps {
        let x = k as f64 * h;
        let w = if k == 0 || k == steps { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        let phi = theta(x.exp());
        let a = ((s + 0.5) * x).exp();
        let b = ((Complex64::new(1.5, 0.0) - s) * x).exp() * epsilon;
        sum += (a + b) * phi * w;
    }
    sum * h / 3.0
}

#[test]
fn central_value_level_11() {
    let l = level_11();
    let central = l.value(Complex64::new(0.5, 0.0)).unwrap();
    let coeffs = l.coefficients();
    let exact: f64 = 2.0
        * coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c / (n as f64).sqrt() * (-2.0 * PI * n as f64 / 11f64.sqrt()).exp())
            .sum::<f64>();
    assert!((central.re - exact).abs() < 1e-10, "{central} vs {exact}");
    assert!((central.re - 0.2538418).abs() < 1e-6);
    assert!(central.im.abs() < 1e-12);
}

#[test]
fn odd_sign_central_zero() {
    let form = basis(37).forms.iter().find(|f| f.epsilon == -1).unwrap();
    let l = LFunction::new(form, &AfeParams::default()).unwrap();
    assert!(l.value(Complex64::new(0.5, 0.0)).unwrap().norm() < 1e-8);
}

#[test]
fn absolute_convergence_region() {
    let l = level_11();
    for t in [0.0, 3.0, 17.5, 42.0] {
        let s = Complex64::new(3.0, t);
        let (series, tail) = l.dirichlet_series(s).unwrap();
        let value = l.value(s).unwrap();
        assert!((value - series).norm() <= tail + 1e-12, "t={t}");
    }
}

#[test]
fn functional_equation_and_sign() {
    for q in [11u64, 37] {
        for form in &basis(q).forms {
            let residual = functional_equation_residual(form, form.epsilon).unwrap();
            assert!(residual <= 1e-6, "q={q} residual {residual}");
            let fit = fitted_sign(form, 5.0).unwrap();
            assert_eq!(fit.fitted, form.epsilon);
        }
    }
}

#[test]
fn reflection_symmetries() {
    for q in [11u64, 37] {
        for form in &basis(q).forms {
            let l = LFunction::new(form, &AfeParams::default()).unwrap();
            let centre = l.completed(Complex64::new(0.5, 0.0)).unwrap();
            assert!(centre.im.abs() < 1e-12);
            for t in [0.7, 4.0, 13.0, 31.0] {
                let up = l.value(Complex64::new(0.5, t)).unwrap();
                let down = l.value(Complex64::new(0.5, -t)).unwrap();
                assert!((up - down.conj()).norm() < 1e-12);
                let (z, rest) = l.hardy_z_parts(t).unwrap();
                assert!(rest.abs() <= 1e-6, "q={q} t={t} rest {rest}");
                let z_neg = l.hardy_z(-t).unwrap();
                assert!((z - form.epsilon as f64 * z_neg).abs() < 1e-12);
                assert!((z.abs() - up.norm()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn split_points_agree() {
    let form = &basis(11).forms[0];
    let a = LFunction::new(form, &AfeParams::default()).unwrap();
    let b = LFunction::new(form, &AfeParams { split: 1.25, ..AfeParams::default() }).unwrap();
    for k in 0..25 {
        let t = 0.37 + 1.97 * k as f64;
        let s = Complex64::new(0.5, t);
        let diff = (a.value(s).unwrap() - b.value(s).unwrap()).norm();
        assert!(diff <= 2e-8, "t={t} diff {diff}");
    }
}

#[test]
fn first_zero_matches_real_axis_oracle() {
    let l = level_11();
    let coeffs = l.coefficients().to_vec();
    let oracle_z = |t: f64| real_axis_completed(&coeffs, 11, 1.0, Complex64::new(0.5, t)).re;
    let (mut lo, mut hi) = (0.1, 0.1);
    let mut prev = oracle_z(lo);
    loop {
        hi += 0.05;
        let z = oracle_z(hi);
        if z * prev < 0.0 {
            break;
        }
        lo = hi;
        prev = z;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let z = oracle_z(mid);
        if (z < 0.0) == (prev < 0.0) {
            lo = mid;
            prev = z;
        } else {
            hi = mid;
        }
    }
    let census = l.critical_zeros(10.0).unwrap();
    let first = census.ordinates[0];
    assert!((first - lo).abs() < 1e-4, "{first} vs {lo}");
    for gamma in &census.ordinates {
        assert!(l.hardy_z(*gamma).unwrap().abs() <= 1e-6);
    }
}

#[test]
fn zero_census_matches_box_count() {
    for q in [11u64, 37] {
        for form in &basis(q).forms {
            let l = LFunction::new(form, &AfeParams::default()).unwrap();
            let census = l.critical_zeros(20.0).unwrap();
            assert_eq!(census.line_count(), census.box_count);
            assert_eq!(census.central_order % 2, if form.epsilon == 1 { 0 } else { 1 });
            let right = l.zero_count_box(0.9, 10.0).unwrap();
            assert_eq!(right.count, 0);
            assert!(right.residual() < 0.1);
        }
    }
}

#[test]
fn argument_trace_properties() {
    let l = level_11();
    let small = l.s_of_t(1e-3).unwrap();
    assert!(small.s_value.abs() < 0.1);
    for t in [1.0, 2.5, 9.3] {
        let trace = l.s_of_t(t).unwrap();
        assert!(trace.max_increment() < PI / 2.0);
        assert!(trace.sigma_grid.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(*trace.sigma_grid.last().unwrap(), 0.5);
        let from_three = l.s_of_t_with(t, 3.0, 0.05).unwrap();
        assert!((trace.s_value - from_three.s_value).abs() <= 1e-8);
        let fine = l.s_of_t_with(t, 5.0, 0.025).unwrap();
        assert!((trace.s_value - fine.s_value).abs() <= 1e-8);
        let mirrored = l.s_of_t(-t).unwrap();
        assert!((trace.s_value + mirrored.s_value).abs() <= 1e-8);
    }
}

#[test]
fn trace_matches_completed_decomposition() {
    let l = level_11();
    let t = 1.0;
    let trace = l.s_of_t(t).unwrap();
    let s = Complex64::new(0.5, t);
    let lambda = l.completed(s).unwrap();
    let gamma_phase = l.log_gamma_factor(s).im;
    let turns = (PI * trace.s_value - (lambda.arg() - gamma_phase)) / (2.0 * PI);
    assert!((turns - turns.round()).abs() < 1e-6);
}

#[test]
fn trace_rejects_zero_ordinates() {
    let l = level_11();
    let gamma = l.critical_zeros(8.0).unwrap().ordinates[0];
    assert!(l.s_of_t(gamma + 5e-5).is_err());
    assert!(l.s_of_t(gamma + 1e-2).is_ok());
}

#[test]
fn sigma_x_values() {
    let l = level_11();
    for x in [4.0f64, 8.0] {
        let sx = l.sigma_x(1.0, x).unwrap();
        assert!(sx.certified);
        assert_eq!(sx.sigma, 0.5 + 10.0 / x.ln());
    }
    let on_line = [(0.5, 6.36), (0.5, 8.6)];
    assert_eq!(sigma_x_from_zeros(1.0, 100.0, &on_line), 0.5 + 10.0 / 100f64.ln());
    assert!(sigma_x_from_zeros(1.0, 200.0, &on_line) < sigma_x_from_zeros(1.0, 100.0, &on_line));
    let off_line = [(0.9, 1.2)];
    assert_eq!(sigma_x_from_zeros(1.0, 1e6, &off_line), 0.5 + 0.8);
}
