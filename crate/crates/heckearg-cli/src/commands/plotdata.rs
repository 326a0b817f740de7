use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write;

use anyhow::{bail, Context, Result};

use super::tag;
use super::distribution::samples_file;
use crate::config::RunConfig;
use crate::output::{num, read_csv, Outcome, RunDir};

fn column(header: &[String], name: &str, file: &str) -> Result<usize> {
    header.iter().position(|h| h == name).with_context(|| format!("{file}: no column {name}"))
}

fn parse(text: &str) -> Result<f64> {
    text.parse::<f64>().with_context(|| format!("not a number: {text:?}"))
}

/// Density of the limiting Gaussian, √π·exp(−π²ξ²).
pub fn limit_density(xi: f64) -> f64 {
    PI.sqrt() * (-PI * PI * xi * xi).exp()
}

/// Step histogram with duplicated bin edges: rows (ξ, density, Gaussian density).
pub fn histogram(values: &[(f64, f64)], bins: usize) -> Vec<(f64, f64, f64)> {
    let spread = values.iter().map(|v| v.0.abs()).fold(0.0, f64::max);
    let half = (1.05 * spread).max(3.0 * heckearg::stats::limit_variance().sqrt());
    let width = 2.0 * half / bins as f64;
    let mut mass = vec![0.0; bins];
    for &(v, w) in values {
        let slot = (((v + half) / width).floor() as usize).min(bins - 1);
        mass[slot] += w;
    }
    let mut out = Vec::with_capacity(2 * bins);
    for (k, m) in mass.iter().enumerate() {
        let left = -half + k as f64 * width;
        let right = left + width;
        out.push((left, m / width, limit_density(left)));
        out.push((right, m / width, limit_density(right)));
    }
    out
}

pub fn trapezoid(rows: &[(f64, f64, f64)]) -> f64 {
    rows.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(config)?;
    let mut outcome = Outcome::default();

    let moments_path = dir.path().join("moments.csv");
    let (header, rows) = read_csv(&moments_path)?;
    let file = "moments.csv";
    let (qc, tc, nc) = (column(&header, "q", file)?, column(&header, "t", file)?, column(&header, "n", file)?);
    let (ec, pc) = (column(&header, "empirical", file)?, column(&header, "predicted", file)?);
    let mut by_series: BTreeMap<(u32, String), Vec<(u64, String, String)>> = BTreeMap::new();
    for row in &rows {
        let n: u32 = row[nc].parse()?;
        by_series.entry((n, row[tc].clone())).or_default().push((row[qc].parse()?, row[ec].clone(), row[pc].clone()));
    }
    for ((n, t), mut points) in by_series {
        points.sort_by_key(|p| p.0);
        let mut text = String::from("# q empirical predicted\n");
        for (q, e, p) in points {
            let blank = |s: &str| if s.is_empty() { "nan".to_string() } else { s.to_string() };
            writeln!(text, "{q} {} {}", blank(&e), blank(&p))?;
        }
        dir.write_text(&format!("moments_n={n}_t={t}.dat"), &text, &mut outcome)?;
    }

    for &q in &config.q_list {
        for &t in &config.t_grid {
            let name = samples_file(q, t);
            let path = dir.path().join(&name);
            if !path.exists() {
                bail!("missing input {}", path.display());
            }
            let (header, rows) = read_csv(&path)?;
            let (vc, wc) = (column(&header, "value", &name)?, column(&header, "weight", &name)?);
            let values: Vec<(f64, f64)> =
                rows.iter().map(|r| Ok((parse(&r[vc])?, parse(&r[wc])?))).collect::<Result<_>>()?;
            let mut text = String::from("# xi density gaussian\n");
            for (x, d, g) in histogram(&values, config.histogram_bins) {
                writeln!(text, "{} {} {}", num(x), num(d), num(g))?;
            }
            dir.write_text(&format!("histogram_q={q}_t={}.dat", tag(t)), &text, &mut outcome)?;
        }
    }

    let svalue_path = dir.path().join("svalue.csv");
    let (header, rows) = read_csv(&svalue_path)?;
    let file = "svalue.csv";
    let cols = ["q", "form_id", "t", "s_value", "m_value", "r_value"]
        .iter()
        .map(|c| column(&header, c, file))
        .collect::<Result<Vec<_>>>()?;
    let mut traces: BTreeMap<(u64, usize), Vec<(f64, String)>> = BTreeMap::new();
    for row in &rows {
        let key = (row[cols[0]].parse()?, row[cols[1]].parse()?);
        let line = format!("{} {} {} {}", row[cols[2]], row[cols[3]], row[cols[4]], row[cols[5]]);
        traces.entry(key).or_default().push((parse(&row[cols[2]])?, line));
    }
    for ((q, form), mut points) in traces {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut text = String::from("# t S M R\n");
        for (_, line) in points {
            text.push_str(&line);
            text.push('\n');
        }
        dir.write_text(&format!("trace_q={q}_form={form}.dat"), &text, &mut outcome)?;
    }
    Ok(outcome)
}
