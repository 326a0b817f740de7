use anyhow::Result;
use heckearg::stats::{lemma_error, petersson_lhs, petersson_rhs_many, PeterssonReport};

use super::load_or_build;
use crate::config::RunConfig;
use crate::output::{num, Outcome, RunDir};

const CLOSURE_FACTOR: f64 = 10.0;
const SLACK: f64 = 1e-6;

/// Pairs m ≤ n with mn ≤ limit.
pub fn index_pairs(limit: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for m in 1..=limit {
        for n in m..=limit / m {
            out.push((m, n));
        }
    }
    out
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(config)?;
    let mut outcome = Outcome::default();
    let mut rows = Vec::new();
    let pairs = index_pairs(config.petersson_mn_max);
    for &q in &config.q_list {
        let basis = match load_or_build(config, q) {
            Ok(b) => b,
            Err(e) => {
                outcome.fail(format!("q={q}: {e:#}"));
                continue;
            }
        };
        let c_max = config.c_max_per_q * q;
        let sides = petersson_rhs_many(q, &pairs, c_max)?;
        for side in sides {
            let lhs = petersson_lhs(&basis, side.m, side.n)?;
            let report = PeterssonReport::new(lhs, side);
            let closure_bound = CLOSURE_FACTOR * lemma_error(q, report.m, report.n) + SLACK;
            let closure = (report.lhs - report.kronecker as f64).abs();
            let agreement = report.discrepancy() <= report.tail_bound + SLACK;
            if !agreement {
                outcome.fail(format!(
                    "q={q} (m,n)=({},{}): |lhs - rhs| = {} exceeds tail {} + 1e-6",
                    report.m,
                    report.n,
                    report.discrepancy(),
                    report.tail_bound
                ));
            }
            rows.push(vec![
                q.to_string(),
                report.m.to_string(),
                report.n.to_string(),
                num(report.lhs),
                num(report.rhs_truncated),
                num(report.tail_bound),
                report.kronecker.to_string(),
                num(report.discrepancy()),
                num(closure),
                num(closure_bound),
                report.lemma_applies.to_string(),
                agreement.to_string(),
                (closure <= closure_bound).to_string(),
                c_max.to_string(),
            ]);
        }
    }
    dir.write_csv(
        "petersson.csv",
        &[
            "q", "m", "n", "lhs", "rhs", "tail", "kronecker", "discrepancy", "closure", "closure_bound",
            "lemma_applies", "agreement_ok", "closure_ok", "c_max",
        ],
        &rows,
        &mut outcome,
    )?;
    Ok(outcome)
}
