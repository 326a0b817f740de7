use anyhow::Result;
use heckearg::lfunction::grh_diagnostic;
use heckearg::stats::m_values;
use serde::Serialize;

use super::{load_or_build, traces};
use crate::config::RunConfig;
use crate::output::{num, Outcome, RunDir};

#[derive(Debug, Serialize)]
struct GrhMax {
    q: u64,
    max_normalized: Option<f64>,
    entries: usize,
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(config)?;
    let mut outcome = Outcome::default();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut grh_rows = Vec::new();
    let mut maxima = Vec::new();
    for &q in &config.q_list {
        let basis = match load_or_build(config, q) {
            Ok(b) => b,
            Err(e) => {
                outcome.fail(format!("q={q}: {e:#}"));
                continue;
            }
        };
        let per_form = traces(&basis, config);
        let m_by_t: Vec<Vec<f64>> =
            config.t_grid.iter().map(|&t| m_values(&basis, t, config.delta)).collect::<Result<_, _>>()?;
        let mut ok_traces = Vec::new();
        for (i, (form, results)) in basis.forms.iter().zip(per_form).enumerate() {
            for (k, (result, &t)) in results.into_iter().zip(&config.t_grid).enumerate() {
                match result {
                    Ok(trace) => {
                        let m = m_by_t[k][i];
                        rows.push(vec![
                            q.to_string(),
                            form.id.to_string(),
                            num(t),
                            num(trace.s_value),
                            num(m),
                            num(trace.s_value - m),
                            num(trace.min_modulus),
                            num(trace.max_increment()),
                        ]);
                        ok_traces.push((form.id, trace));
                    }
                    Err(e) => {
                        outcome.fail(format!("q={q} form {} t={t}: {e}", form.id));
                        errors.push(vec![q.to_string(), form.id.to_string(), num(t), e]);
                    }
                }
            }
        }
        let entries = grh_diagnostic(q, &ok_traces);
        for e in &entries {
            grh_rows.push(vec![q.to_string(), e.form_id.to_string(), num(e.t), num(e.s_value), num(e.normalized)]);
        }
        maxima.push(GrhMax {
            q,
            max_normalized: entries.iter().map(|e| e.normalized).fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v)))),
            entries: entries.len(),
        });
    }
    dir.write_csv(
        "svalue.csv",
        &["q", "form_id", "t", "s_value", "m_value", "r_value", "min_modulus", "max_increment"],
        &rows,
        &mut outcome,
    )?;
    dir.write_csv("svalue_errors.csv", &["q", "form_id", "t", "error"], &errors, &mut outcome)?;
    dir.write_csv("grh.csv", &["q", "form_id", "t", "s_value", "normalized"], &grh_rows, &mut outcome)?;
    dir.write_json("grh_summary.json", &maxima, &mut outcome)?;
    Ok(outcome)
}
