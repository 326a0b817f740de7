use anyhow::Result;
use heckearg_lmfdb::{crosscheck, data_sanity, ClientConfig, LmfdbClient};
use serde::Serialize;

use super::load_or_build;
use crate::config::RunConfig;
use crate::output::{Outcome, RunDir};

#[derive(Debug, Serialize)]
struct LevelCheck {
    q: u64,
    report: Option<heckearg_lmfdb::CrosscheckReport>,
    sanity: Option<heckearg::hecke::InvariantReport>,
    error: Option<String>,
}

pub fn client_config(config: &RunConfig) -> ClientConfig {
    ClientConfig {
        base_url: config.lmfdb.base_url.clone(),
        newforms_template: config.lmfdb.newforms_template.clone(),
        embeddings_template: config.lmfdb.embeddings_template.clone(),
        cache_dir: config.cache_dir.clone(),
        offline: config.offline,
        ..ClientConfig::default()
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(config)?;
    let mut outcome = Outcome::default();
    let mut client = LmfdbClient::with_default_transport(client_config(config));
    let mut levels = Vec::new();
    for &q in &config.q_list {
        let checked = (|| -> Result<LevelCheck> {
            let basis = load_or_build(config, q)?;
            let ingested = client.fetch_newforms(q)?;
            let sanity = data_sanity(q, &ingested)?;
            let report = crosscheck(&basis, &ingested, config.lmfdb.p_check)?;
            Ok(LevelCheck { q, report: Some(report), sanity: Some(sanity), error: None })
        })();
        match checked {
            Ok(level) => {
                if let Some(r) = &level.report {
                    for pair in r.pairs.iter().filter(|p| p.discrepancy > 1e-6) {
                        outcome.fail(format!(
                            "q={q} form {} vs {}: discrepancy {} at p={}",
                            pair.form_id, pair.label, pair.discrepancy, pair.worst_prime
                        ));
                    }
                }
                if let Some(s) = &level.sanity {
                    if s.deligne_excess > 1e-6 || s.hecke_residual > 1e-6 {
                        outcome.fail(format!("q={q}: ingested data fail Deligne/Hecke sanity: {s:?}"));
                    }
                }
                levels.push(level);
            }
            Err(e) => {
                outcome.fail(format!("q={q}: {e:#}"));
                levels.push(LevelCheck { q, report: None, sanity: None, error: Some(format!("{e:#}")) });
            }
        }
    }
    dir.write_json("crosscheck.json", &levels, &mut outcome)?;
    Ok(outcome)
}
