use heckearg::cache::{basis_path, load_basis, save_basis, BasisRecord};
use heckearg::hecke::{check_invariants, default_p_max, diagonalize, EigenBasis, Provenance};
use heckearg::modsym::ManinSymbolSpace;

fn build(q: u64) -> EigenBasis {
    diagonalize(&ManinSymbolSpace::build(q).unwrap(), default_p_max(q)).unwrap()
}

#[test]
fn round_trip_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let basis = build(37);
    let path = save_basis(dir.path(), &basis).unwrap();
    assert_eq!(path, basis_path(dir.path(), 37));
    assert!(path.ends_with("basis/q=37.json"));
    let first = std::fs::read(&path).unwrap();
    let loaded = load_basis(dir.path(), 37).unwrap().unwrap();
    assert_eq!(loaded.dim, 2);
    assert_eq!(loaded.provenance, Provenance::Computed);
    for (a, b) in basis.forms.iter().zip(&loaded.forms) {
        assert_eq!(a.epsilon, b.epsilon);
        assert!((a.omega - b.omega).abs() <= 1e-14 * a.omega);
        for ((p, x), (r, y)) in a.lambda_p().zip(b.lambda_p()) {
            assert_eq!(p, r);
            assert!((x - y).abs() <= 1e-14);
        }
    }
    save_basis(dir.path(), &loaded).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn schema_fields() {
    let record = BasisRecord::from_basis(&build(11));
    let value: serde_json::Value = serde_json::from_str(&record.to_json().unwrap()).unwrap();
    assert_eq!(value["q"], 11);
    assert_eq!(value["dim"], 1);
    assert_eq!(value["P_max"], 2000);
    assert_eq!(value["provenance"], "computed");
    let form = &value["forms"][0];
    assert_eq!(form["epsilon"], 1);
    assert_eq!(form["lambda"][0][0], 2);
    assert_eq!(form["lambda"][0][1], "-1.4142135623731");
}

#[test]
fn empty_level_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_basis(dir.path(), 13).unwrap().is_none());
    let empty = build(13);
    save_basis(dir.path(), &empty).unwrap();
    let loaded = load_basis(dir.path(), 13).unwrap().unwrap();
    assert_eq!(loaded.dim, 0);
    assert!(loaded.forms.is_empty());
}

#[test]
fn corrupt_cache_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = save_basis(dir.path(), &build(11)).unwrap();
    let text = std::fs::read_to_string(&path).unwrap().replacen("\"dim\": 1", "\"dim\": 2", 1);
    std::fs::write(&path, text).unwrap();
    assert!(load_basis(dir.path(), 11).is_err());
    std::fs::write(&path, "{").unwrap();
    assert!(load_basis(dir.path(), 11).is_err());
}

#[test]
fn invariant_suite_small_levels() {
    for q in [11u64, 23, 37, 67, 101] {
        let report = check_invariants(&build(q), 10_000, 1000, 1000, q).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
