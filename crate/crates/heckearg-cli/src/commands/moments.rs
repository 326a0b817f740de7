use anyhow::Result;
use heckearg::stats::{diagonal_second_moment, harmonic_moment, m_values, model_moment_oracle, predicted_moment};
use serde::Serialize;

use super::{load_or_build, traces};
use crate::config::RunConfig;
use crate::output::{num, Outcome, RunDir};

const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub q: u64,
    pub t: f64,
    pub n: u32,
    pub delta: f64,
    pub empirical_s: Option<f64>,
    pub empirical_m: f64,
    pub empirical_r: Option<f64>,
    pub oracle: f64,
    pub oracle_residual: f64,
    pub off_diag_budget: f64,
    pub predicted: Option<f64>,
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalRow {
    pub q: u64,
    pub t: f64,
    pub oracle: f64,
    pub closed_form: f64,
    pub budget: f64,
    pub within_budget: bool,
}

#[derive(Debug, Serialize)]
struct Summary {
    moments: Vec<MomentRow>,
    diagonal: Vec<DiagonalRow>,
    failures: Vec<String>,
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(config)?;
    let mut outcome = Outcome::default();
    let mut moments = Vec::new();
    let mut diagonal = Vec::new();
    for &q in &config.q_list {
        let basis = match load_or_build(config, q) {
            Ok(b) => b,
            Err(e) => {
                outcome.fail(format!("q={q}: {e:#}"));
                continue;
            }
        };
        let per_form = traces(&basis, config);
        for (k, &t) in config.t_grid.iter().enumerate() {
            let m = m_values(&basis, t, config.delta)?;
            let mut s = Vec::with_capacity(basis.forms.len());
            for (form, results) in basis.forms.iter().zip(&per_form) {
                match &results[k] {
                    Ok(trace) => s.push(trace.s_value),
                    Err(e) => outcome.fail(format!("q={q} form {} t={t}: {e}", form.id)),
                }
            }
            let complete = s.len() == basis.forms.len();
            let r: Vec<f64> = if complete { s.iter().zip(&m).map(|(a, b)| a - b).collect() } else { Vec::new() };
            for n in 1..=config.n_max {
                let oracle = match model_moment_oracle(&basis, n, t, config.delta) {
                    Ok(o) => o,
                    Err(e) => {
                        outcome.fail(format!("q={q} t={t} n={n}: {e}"));
                        continue;
                    }
                };
                let empirical_m = harmonic_moment(&basis, &m, n)?;
                let empirical_s = if complete { Some(harmonic_moment(&basis, &s, n)?) } else { None };
                let empirical_r = if complete { Some(harmonic_moment(&basis, &r, n)?) } else { None };
                let predicted = predicted_moment(n, q).ok();
                let residual = (empirical_m - oracle.value).abs();
                if residual > ORACLE_TOLERANCE {
                    outcome.fail(format!("q={q} t={t} n={n}: oracle residual {residual}"));
                }
                moments.push(MomentRow {
                    q,
                    t,
                    n,
                    delta: config.delta,
                    empirical_s,
                    empirical_m,
                    empirical_r,
                    oracle: oracle.value,
                    oracle_residual: residual,
                    off_diag_budget: oracle.off_diag_budget,
                    predicted,
                    deviation: empirical_s.zip(predicted).map(|(e, p)| e - p),
                });
            }
            let check = diagonal_second_moment(&basis, t, config.delta)?;
            diagonal.push(DiagonalRow {
                q,
                t,
                oracle: check.oracle,
                closed_form: check.closed_form,
                budget: check.budget,
                within_budget: (check.oracle - check.closed_form).abs() <= check.budget,
            });
        }
    }
    let rows: Vec<Vec<String>> = moments
        .iter()
        .map(|r| {
            vec![
                r.q.to_string(),
                num(r.t),
                r.n.to_string(),
                num(r.delta),
                opt(r.empirical_s),
                num(r.empirical_m),
                opt(r.empirical_r),
                num(r.oracle),
                num(r.oracle_residual),
                num(r.off_diag_budget),
                opt(r.predicted),
                opt(r.deviation),
            ]
        })
        .collect();
    dir.write_csv(
        "moments.csv",
        &[
            "q", "t", "n", "delta", "empirical", "empirical_m", "empirical_r", "oracle", "oracle_residual",
            "off_diag_budget", "predicted", "deviation",
        ],
        &rows,
        &mut outcome,
    )?;
    let diag_rows: Vec<Vec<String>> = diagonal
        .iter()
        .map(|d| {
            vec![d.q.to_string(), num(d.t), num(d.oracle), num(d.closed_form), num(d.budget), d.within_budget.to_string()]
        })
        .collect();
    dir.write_csv(
        "diagonal.csv",
        &["q", "t", "oracle", "closed_form", "budget", "within_budget"],
        &diag_rows,
        &mut outcome,
    )?;
    let summary = Summary { moments, diagonal, failures: outcome.failures.clone() };
    dir.write_json("moments_summary.json", &summary, &mut outcome)?;
    Ok(outcome)
}
