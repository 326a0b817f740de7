use anyhow::Result;
use heckearg::lfunction::LFunction;
use heckearg::numeric::compensated_sum;
use rayon::prelude::*;

use super::load_or_build;
use crate::config::RunConfig;
use crate::output::{num, Outcome, RunDir};

struct FormZeros {
    census: Vec<String>,
    ordinates: Vec<Vec<String>>,
    sigma_x: Vec<Vec<String>>,
    box_counts: Vec<i64>,
    failures: Vec<String>,
}

fn form_zeros(l: &LFunction, form_id: usize, config: &RunConfig) -> Result<FormZeros, String> {
    let q = l.q();
    let height = config.zeros.height;
    let err = |e: heckearg::Error| format!("q={q} form {form_id}: {e}");
    let census = l.critical_zeros(height).map_err(err)?;
    let mut failures = Vec::new();
    let mut ordinates = Vec::new();
    for &gamma in &census.ordinates {
        let z = l.hardy_z(gamma).map_err(err)?;
        ordinates.push(vec![q.to_string(), form_id.to_string(), num(gamma), num(z)]);
    }
    let mut sigma_x = Vec::new();
    for &t in &config.t_grid {
        for &x in &config.zeros.x_list {
            let sx = l.sigma_x(t, x).map_err(err)?;
            if !sx.certified {
                failures.push(format!("q={q} form {form_id}: sigma_x window at t={t}, x={x} not certified"));
            }
            sigma_x.push(vec![
                q.to_string(),
                form_id.to_string(),
                num(t),
                num(x),
                num(sx.sigma),
                sx.certified.to_string(),
            ]);
        }
    }
    let mut box_counts = Vec::new();
    for &sigma in &config.zeros.sigma_list {
        box_counts.push(l.zero_count_box(sigma, height).map_err(err)?.count);
    }
    Ok(FormZeros {
        census: vec![
            q.to_string(),
            form_id.to_string(),
            l.epsilon().to_string(),
            num(census.height),
            census.line_count().to_string(),
            census.box_count.to_string(),
            census.central_order.to_string(),
            census.certified().to_string(),
            num(census.grid),
        ],
        ordinates,
        sigma_x,
        box_counts,
        failures,
    })
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(config)?;
    let mut outcome = Outcome::default();
    let (mut census, mut ordinates, mut sigma_rows, mut density) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let params = config.afe();
    for &q in &config.q_list {
        let basis = match load_or_build(config, q) {
            Ok(b) => b,
            Err(e) => {
                outcome.fail(format!("q={q}: {e:#}"));
                continue;
            }
        };
        let results: Vec<Result<FormZeros, String>> = basis
            .forms
            .par_iter()
            .map(|f| {
                let l = LFunction::new(f, &params).map_err(|e| format!("q={q} form {}: {e}", f.id))?;
                form_zeros(&l, f.id, config)
            })
            .collect();
        let mut counts_by_sigma = vec![Vec::new(); config.zeros.sigma_list.len()];
        let mut complete = true;
        for (form, result) in basis.forms.iter().zip(results) {
            match result {
                Ok(z) => {
                    census.push(z.census);
                    ordinates.extend(z.ordinates);
                    sigma_rows.extend(z.sigma_x);
                    for (slot, count) in z.box_counts.into_iter().enumerate() {
                        counts_by_sigma[slot].push(form.omega * count as f64);
                    }
                    for f in z.failures {
                        outcome.fail(f);
                    }
                }
                Err(e) => {
                    complete = false;
                    outcome.fail(e);
                }
            }
        }
        if complete {
            for (sigma, weighted) in config.zeros.sigma_list.iter().zip(counts_by_sigma) {
                density.push(vec![
                    q.to_string(),
                    num(*sigma),
                    num(config.zeros.height),
                    num(compensated_sum(weighted)),
                    num(config.diagnostic.density_shape(q, *sigma, config.zeros.height)),
                ]);
            }
        }
    }
    dir.write_csv(
        "zero_census.csv",
        &["q", "form_id", "epsilon", "height", "line_count", "box_count", "central_order", "certified", "grid"],
        &census,
        &mut outcome,
    )?;
    dir.write_csv("zeros.csv", &["q", "form_id", "t_or_gamma", "value"], &ordinates, &mut outcome)?;
    dir.write_csv("sigma_x.csv", &["q", "form_id", "t", "x", "sigma_x", "certified"], &sigma_rows, &mut outcome)?;
    dir.write_csv(
        "zero_density.csv",
        &["q", "sigma", "height", "weighted_count", "density_shape"],
        &density,
        &mut outcome,
    )?;
    for row in &census {
        if row[4] != row[5] {
            outcome.fail(format!("q={} form {}: line count {} vs box count {}", row[0], row[1], row[4], row[5]));
        }
    }
    Ok(outcome)
}
