use heckearg::hecke::{check_invariants, EigenBasis, InvariantReport};
use serde::Serialize;

use crate::record::{to_basis, IngestedForm};
use crate::{LmfdbError, Result};

const MATCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub form_id: usize,
    pub label: String,
    pub discrepancy: f64,
    /// Prime with the largest discrepancy.
    pub worst_prime: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub q: u64,
    pub p_check: u64,
    pub pairs: Vec<MatchedPair>,
    pub passed: bool,
}

fn distance(basis_form: &heckearg::hecke::HeckeEigenform, ingested: &IngestedForm, p_check: u64) -> (f64, u64) {
    let mut worst = (0.0, 0);
    for &(p, v) in ingested.lambda_p.iter().filter(|e| e.0 <= p_check) {
        let d = match basis_form.lambda_prime(p) {
            Some(mine) => (mine - v).abs(),
            None => continue,
        };
        if d > worst.0 {
            worst = (d, p);
        }
    }
    worst
}

/// Greedy minimal-distance matching on primes ≤ p_check.
pub fn crosscheck(basis: &EigenBasis, ingested: &[IngestedForm], p_check: u64) -> Result<CrosscheckReport> {
    if basis.forms.len() != ingested.len() {
        return Err(LmfdbError::CountMismatch { q: basis.q, computed: basis.forms.len(), ingested: ingested.len() });
    }
    let mut candidates = Vec::new();
    for (i, form) in basis.forms.iter().enumerate() {
        for (j, other) in ingested.iter().enumerate() {
            let (d, p) = distance(form, other, p_check);
            candidates.push((d, form.id, other.label.as_str(), i, j, p));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)));
    let mut used_basis = vec![false; basis.forms.len()];
    let mut used_ingested = vec![false; ingested.len()];
    let mut pairs = Vec::new();
    for (d, id, label, i, j, p) in candidates {
        if used_basis[i] || used_ingested[j] {
            continue;
        }
        used_basis[i] = true;
        used_ingested[j] = true;
        pairs.push(MatchedPair { form_id: id, label: label.to_string(), discrepancy: d, worst_prime: p });
    }
    pairs.sort_by_key(|m| m.form_id);
    let passed = pairs.iter().all(|m| m.discrepancy <= MATCH_TOLERANCE);
    Ok(CrosscheckReport { q: basis.q, p_check, pairs, passed })
}

/// Deligne bound and Hecke relations on the ingested coefficients.
pub fn data_sanity(q: u64, ingested: &[IngestedForm]) -> Result<InvariantReport> {
    let basis = to_basis(q, ingested);
    let n_max = basis.p_max.min(1000) as usize;
    let pair_max = (n_max as f64).sqrt().floor() as u64;
    Ok(check_invariants(&basis, n_max, 200, pair_max.max(1), q)?)
}
