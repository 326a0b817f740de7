use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use heckearg::lfunction::AfeParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Unspecified constants of the zero-density shape (1+T)^A q^{−2c(σ−½)} (log q) T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticParams {
    pub c: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

impl Default for DiagnosticParams {
    fn default() -> Self {
        Self { c: 0.25, a: 4.0 }
    }
}

impl DiagnosticParams {
    pub fn density_shape(&self, q: u64, sigma: f64, height: f64) -> f64 {
        let qf = q as f64;
        (1.0 + height).powf(self.a) * qf.powf(-2.0 * self.c * (sigma - 0.5)) * qf.ln() * height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroParams {
    pub height: f64,
    pub x_list: Vec<f64>,
    pub sigma_list: Vec<f64>,
}

impl Default for ZeroParams {
    fn default() -> Self {
        Self { height: 20.0, x_list: vec![4.0, 8.0], sigma_list: vec![0.6, 0.75, 0.9] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmfdbParams {
    pub base_url: String,
    pub newforms_template: String,
    pub embeddings_template: String,
    pub p_check: u64,
}

impl Default for LmfdbParams {
    fn default() -> Self {
        let client = heckearg_lmfdb::ClientConfig::default();
        Self {
            base_url: client.base_url,
            newforms_template: client.newforms_template,
            embeddings_template: client.embeddings_template,
            p_check: 97,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub q_list: Vec<u64>,
    pub t_grid: Vec<f64>,
    /// x = q^{δ/3}
    pub delta: f64,
    pub n_max: u32,
    /// Eigenvalue table length; null means max(11q+10, 2000).
    pub p_max: Option<u64>,
    /// Euler-product cross-check length for L(1, sym²f).
    pub p_sym: u64,
    /// c_max = c_max_per_q · q
    pub c_max_per_q: u64,
    pub petersson_mn_max: u64,
    pub t_max: f64,
    pub afe_error: f64,
    /// 0 means all cores.
    pub threads: usize,
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
    pub offline: bool,
    pub diagnostic: DiagnosticParams,
    pub zeros: ZeroParams,
    pub histogram_bins: usize,
    pub lmfdb: LmfdbParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q_list: vec![11],
            t_grid: vec![1.0],
            delta: 0.2,
            n_max: 4,
            p_max: None,
            p_sym: 100_000,
            c_max_per_q: 100_000,
            petersson_mn_max: 30,
            t_max: 50.0,
            afe_error: 1e-8,
            threads: 0,
            cache_dir: PathBuf::from("cache"),
            out_dir: PathBuf::from("out"),
            offline: false,
            diagnostic: DiagnosticParams::default(),
            zeros: ZeroParams::default(),
            histogram_bins: 40,
            lmfdb: LmfdbParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_list.is_empty() {
            bail!("q_list is empty");
        }
        if self.n_max == 0 {
            bail!("n_max must be at least 1");
        }
        if !(self.delta > 0.0 && self.delta < 1.0 / self.n_max as f64) {
            bail!("delta = {} must satisfy 0 < delta < 1/n_max = {}", self.delta, 1.0 / self.n_max as f64);
        }
        if self.n_max > 8 {
            bail!("n_max = {} exceeds 8", self.n_max);
        }
        for &t in &self.t_grid {
            if !(t > 0.0 && t <= self.t_max) {
                bail!("t = {t} must lie in (0, t_max = {}]", self.t_max);
            }
        }
        if self.t_max > heckearg::lfunction::T_MAX {
            bail!("t_max = {} exceeds {}", self.t_max, heckearg::lfunction::T_MAX);
        }
        if self.c_max_per_q == 0 {
            bail!("c_max_per_q must be positive");
        }
        if self.zeros.height <= 0.0 || self.zeros.height > self.t_max {
            bail!("zeros.height must lie in (0, t_max]");
        }
        if self.histogram_bins == 0 {
            bail!("histogram_bins must be positive");
        }
        Ok(())
    }

    pub fn afe(&self) -> AfeParams {
        AfeParams { target_abs_error: self.afe_error, t_max: self.t_max, ..AfeParams::default() }
    }

    pub fn p_max_for(&self, q: u64) -> u64 {
        self.p_max.unwrap_or_else(|| heckearg::hecke::default_p_max(q))
    }

    /// Hash of the fields that determine results (paths, threads and offline excluded).
    pub fn stamp(&self) -> String {
        let neutral = RunConfig {
            threads: 0,
            cache_dir: PathBuf::new(),
            out_dir: PathBuf::new(),
            offline: false,
            ..self.clone()
        };
        let digest = Sha256::digest(serde_json::to_vec(&neutral).expect("config serializes"));
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out_dir.join(format!("run-{}", self.stamp()))
    }
}
