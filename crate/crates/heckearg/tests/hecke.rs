use heckearg::hecke::{default_p_max, diagonalize, diagonalize_with_order, eigenvalue_multisets};
use heckearg::modsym::ManinSymbolSpace;
use std::time::Instant;

#[test]
fn level_11_eigenvalues() {
    let space = ManinSymbolSpace::build(11).unwrap();
    let basis = diagonalize(&space, default_p_max(11)).unwrap();
    assert_eq!(basis.forms.len(), 1);
    let f = &basis.forms[0];
    assert!((f.lambda_prime(2).unwrap() + 2f64.sqrt()).abs() < 1e-9);
    assert!((f.lambda_prime(3).unwrap() + 1.0 / 3f64.sqrt()).abs() < 1e-9);
    assert!((f.lambda_prime(11).unwrap() - 1.0 / 11f64.sqrt()).abs() < 1e-9);
    assert_eq!(f.epsilon, 1);
    println!("omega {} sym2 {}", f.omega, f.sym2_l1);
}

#[test]
fn level_37_signs() {
    let space = ManinSymbolSpace::build(37).unwrap();
    let basis = diagonalize(&space, default_p_max(37)).unwrap();
    let mut pairs: Vec<(i64, i32)> = basis
        .forms
        .iter()
        .map(|f| ((f.lambda_prime(2).unwrap() * 2f64.sqrt()).round() as i64, f.epsilon))
        .collect();
    pairs.sort();
    assert_eq!(pairs, vec![(-2, -1), (0, 1)]);
}

#[test]
fn timing_large_level() {
    for q in [503u64, 2003] {
        let t0 = Instant::now();
        let space = ManinSymbolSpace::build(q).unwrap();
        let t1 = Instant::now();
        let basis = diagonalize(&space, default_p_max(q)).unwrap();
        println!("q={q} dim={} space {:?} diag {:?} wsum {}", basis.dim, t1 - t0, t1.elapsed(), basis.weight_sum());
    }
}

#[test]
fn order_independence() {
    let space = ManinSymbolSpace::build(101).unwrap();
    let a = diagonalize_with_order(&space, default_p_max(101), Some(&[2, 3, 5, 7, 11, 13])).unwrap();
    let b = diagonalize_with_order(&space, default_p_max(101), Some(&[13, 7, 3, 11, 2, 5])).unwrap();
    let primes = [2u64, 3, 5, 97, 101, 199];
    let (ma, mb) = (eigenvalue_multisets(&a, &primes), eigenvalue_multisets(&b, &primes));
    for p in primes {
        for (x, y) in ma[&p].iter().zip(&mb[&p]) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

#[test]
fn sym2_cutoff() {
    let y = heckearg::sym2::Sym2Evaluator::cutoff_ratio();
    let ev = heckearg::sym2::Sym2Evaluator::new(101, 1.0);
    println!("cutoff {y} length/q {}", ev.length() as f64 / 101.0);
}
