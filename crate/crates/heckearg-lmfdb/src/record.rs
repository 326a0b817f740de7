use std::path::{Path, PathBuf};

use heckearg::hecke::{EigenBasis, HeckeEigenform, Provenance};
use heckearg::numeric::sig15;
use serde::{Deserialize, Serialize};

use crate::{LmfdbError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedForm {
    pub q: u64,
    pub label: String,
    /// (p, a_p/√p), p ascending
    pub lambda_p: Vec<(u64, f64)>,
    pub source_url: String,
    /// Unix seconds.
    pub fetched_at: u64,
}

impl IngestedForm {
    pub fn lambda_prime(&self, p: u64) -> Option<f64> {
        self.lambda_p.binary_search_by_key(&p, |e| e.0).ok().map(|i| self.lambda_p[i].1)
    }

    /// √q·λ(q) rounded to ±1 when λ(q) is present.
    pub fn epsilon(&self) -> Option<i32> {
        self.lambda_prime(self.q).map(|v| if v >= 0.0 { 1 } else { -1 })
    }

    pub fn to_form(&self, id: usize) -> HeckeEigenform {
        HeckeEigenform::new(self.q, id, self.lambda_p.clone(), self.epsilon().unwrap_or(0), 0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormEntry {
    pub id: usize,
    pub label: String,
    pub source_url: String,
    pub fetched_at: u64,
    pub epsilon: Option<i32>,
    pub lambda: Vec<(u64, String)>,
}

/// Cache document; the basis cache layout plus label and source_url per form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmfdbRecord {
    pub q: u64,
    pub dim: usize,
    #[serde(rename = "P_max")]
    pub p_max: u64,
    pub provenance: Provenance,
    pub forms: Vec<FormEntry>,
}

impl LmfdbRecord {
    pub fn from_forms(q: u64, forms: &[IngestedForm]) -> Self {
        let p_max = forms.iter().filter_map(|f| f.lambda_p.last().map(|e| e.0)).min().unwrap_or(0);
        Self {
            q,
            dim: forms.len(),
            p_max,
            provenance: Provenance::Ingested,
            forms: forms
                .iter()
                .enumerate()
                .map(|(id, f)| FormEntry {
                    id,
                    label: f.label.clone(),
                    source_url: f.source_url.clone(),
                    fetched_at: f.fetched_at,
                    epsilon: f.epsilon(),
                    lambda: f.lambda_p.iter().map(|&(p, v)| (p, sig15(v))).collect(),
                })
                .collect(),
        }
    }

    pub fn to_forms(&self) -> Result<Vec<IngestedForm>> {
        self.forms
            .iter()
            .map(|e| {
                let lambda_p = e
                    .lambda
                    .iter()
                    .map(|(p, v)| {
                        v.parse::<f64>()
                            .map(|x| (*p, x))
                            .map_err(|_| heckearg::Error::Cache(format!("{}: bad decimal {v:?}", e.label)).into())
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(IngestedForm {
                    q: self.q,
                    label: e.label.clone(),
                    lambda_p,
                    source_url: e.source_url.clone(),
                    fetched_at: e.fetched_at,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// Ingested forms as an eigenbasis (no harmonic weights attached).
pub fn to_basis(q: u64, forms: &[IngestedForm]) -> EigenBasis {
    let record = LmfdbRecord::from_forms(q, forms);
    EigenBasis {
        q,
        dim: forms.len(),
        p_max: record.p_max,
        forms: forms.iter().enumerate().map(|(i, f)| f.to_form(i)).collect(),
        provenance: Provenance::Ingested,
    }
}

pub fn cache_path(root: &Path, q: u64) -> PathBuf {
    root.join("lmfdb").join(format!("q={q}.json"))
}

/// LMFDB's integer key for a newform orbit label N.k.c.x (letters are base-26, a = 0).
pub fn hecke_orbit_code(label: &str) -> Result<u64> {
    let bad = || LmfdbError::Label(label.to_string());
    let parts: Vec<&str> = label.split('.').collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let level: u64 = parts[0].parse().map_err(|_| bad())?;
    let weight: u64 = parts[1].parse().map_err(|_| bad())?;
    let letters = |s: &str| -> Result<u64> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_lowercase()) {
            return Err(bad());
        }
        Ok(s.bytes().fold(0u64, |acc, b| acc * 26 + (b - b'a') as u64))
    };
    let char_orbit = letters(parts[2])?;
    let newform = letters(parts[3])?;
    Ok(level + (weight << 24) + (char_orbit << 36) + (newform << 52))
}
