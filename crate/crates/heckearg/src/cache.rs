//! JSON basis cache: one document per level under `<root>/basis/q=<q>.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke::{EigenBasis, HeckeEigenform, Provenance};
use crate::numeric::sig15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormRecord {
    pub id: usize,
    pub epsilon: i32,
    pub omega: String,
    pub sym2_l1: String,
    pub lambda: Vec<(u64, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    pub q: u64,
    pub dim: usize,
    #[serde(rename = "P_max")]
    pub p_max: u64,
    pub provenance: Provenance,
    pub forms: Vec<FormRecord>,
}

fn parse(field: &str, text: &str) -> Result<f64> {
    text.parse::<f64>().map_err(|_| Error::Cache(format!("{field}: not a decimal: {text:?}")))
}

impl FormRecord {
    pub fn from_form(form: &HeckeEigenform) -> Self {
        Self {
            id: form.id,
            epsilon: form.epsilon,
            omega: sig15(form.omega),
            sym2_l1: sig15(form.sym2_l1),
            lambda: form.lambda_p().map(|(p, v)| (p, sig15(v))).collect(),
        }
    }

    pub fn to_form(&self, q: u64) -> Result<HeckeEigenform> {
        let mut lambda = Vec::with_capacity(self.lambda.len());
        for (p, v) in &self.lambda {
            lambda.push((*p, parse("lambda", v)?));
        }
        if lambda.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Cache(format!("form {}: primes not increasing", self.id)));
        }
        if self.epsilon.abs() != 1 {
            return Err(Error::Cache(format!("form {}: epsilon {}", self.id, self.epsilon)));
        }
        Ok(HeckeEigenform::new(
            q,
            self.id,
            lambda,
            self.epsilon,
            parse("omega", &self.omega)?,
            parse("sym2_l1", &self.sym2_l1)?,
        ))
    }
}

impl BasisRecord {
    pub fn from_basis(basis: &EigenBasis) -> Self {
        Self {
            q: basis.q,
            dim: basis.dim,
            p_max: basis.p_max,
            provenance: basis.provenance,
            forms: basis.forms.iter().map(FormRecord::from_form).collect(),
        }
    }

    pub fn to_basis(&self) -> Result<EigenBasis> {
        if self.forms.len() != self.dim {
            return Err(Error::Cache(format!("q={}: dim {} but {} forms", self.q, self.dim, self.forms.len())));
        }
        let forms = self.forms.iter().map(|f| f.to_form(self.q)).collect::<Result<Vec<_>>>()?;
        Ok(EigenBasis { q: self.q, dim: self.dim, p_max: self.p_max, forms, provenance: self.provenance })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

pub fn basis_path(root: &Path, q: u64) -> PathBuf {
    root.join("basis").join(format!("q={q}.json"))
}

pub fn save_basis(root: &Path, basis: &EigenBasis) -> Result<PathBuf> {
    let path = basis_path(root, basis.q);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, BasisRecord::from_basis(basis).to_json()?)?;
    Ok(path)
}

/// `Ok(None)` when no cache file exists.
pub fn load_basis(root: &Path, q: u64) -> Result<Option<EigenBasis>> {
    let path = basis_path(root, q);
    if !path.exists() {
        return Ok(None);
    }
    let record: BasisRecord = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
    if record.q != q {
        return Err(Error::Cache(format!("{} holds level {}", path.display(), record.q)));
    }
    record.to_basis().map(Some)
}
