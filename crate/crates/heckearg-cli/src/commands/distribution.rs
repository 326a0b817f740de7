use anyhow::Result;
use heckearg::stats::{distribution_mu_q, limit_variance, petersson_lhs};
use serde::Serialize;

use super::{load_or_build, tag, traces};
use crate::config::RunConfig;
use crate::output::{num, Outcome, RunDir};

#[derive(Debug, Serialize)]
struct DistributionSummary {
    q: u64,
    t: f64,
    forms: usize,
    ks_distance: f64,
    mean: f64,
    variance: f64,
    limit_variance: f64,
    moment_table: Vec<f64>,
    weight_sum: f64,
    mass_vs_petersson: f64,
    samples_file: String,
}

pub fn samples_file(q: u64, t: f64) -> String {
    format!("distribution_q={q}_t={}.csv", tag(t))
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(config)?;
    let mut outcome = Outcome::default();
    let mut summaries = Vec::new();
    for &q in &config.q_list {
        let basis = match load_or_build(config, q) {
            Ok(b) => b,
            Err(e) => {
                outcome.fail(format!("q={q}: {e:#}"));
                continue;
            }
        };
        if basis.forms.is_empty() {
            outcome.fail(format!("q={q}: empty basis, no distribution"));
            continue;
        }
        let per_form = traces(&basis, config);
        for (k, &t) in config.t_grid.iter().enumerate() {
            let values: Vec<Option<f64>> = per_form.iter().map(|r| r[k].as_ref().ok().map(|tr| tr.s_value)).collect();
            let report = match distribution_mu_q(&basis, t, &values) {
                Ok(r) => r,
                Err(e) => {
                    outcome.fail(format!("q={q} t={t}: {e}"));
                    continue;
                }
            };
            let rows: Vec<Vec<String>> = report
                .samples
                .iter()
                .map(|s| vec![s.form_id.to_string(), num(s.value), num(s.weight)])
                .collect();
            let name = samples_file(q, t);
            dir.write_csv(&name, &["form_id", "value", "weight"], &rows, &mut outcome)?;
            let weight_sum = heckearg::numeric::compensated_sum(report.samples.iter().map(|s| s.weight));
            summaries.push(DistributionSummary {
                q,
                t,
                forms: report.samples.len(),
                ks_distance: report.ks_distance,
                mean: report.mean,
                variance: report.variance,
                limit_variance: limit_variance(),
                moment_table: report.moment_table.clone(),
                weight_sum,
                mass_vs_petersson: weight_sum - petersson_lhs(&basis, 1, 1)?,
                samples_file: name,
            });
        }
    }
    dir.write_json("distribution_summary.json", &summaries, &mut outcome)?;
    Ok(outcome)
}
