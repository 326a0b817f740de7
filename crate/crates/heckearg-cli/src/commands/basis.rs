use anyhow::Result;
use heckearg::arith::PrimeTable;
use heckearg::hecke::{check_invariants, InvariantReport};
use heckearg::lfunction::{fitted_sign, functional_equation_residual};
use heckearg::sym2::sym2_euler;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::load_or_build;
use crate::config::RunConfig;
use crate::output::{Outcome, RunDir};

const DELIGNE_N_MAX: usize = 10_000;
const HECKE_PAIRS: usize = 1000;
const HECKE_PAIR_MAX: u64 = 1000;
const FE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormSummary {
    pub id: usize,
    pub epsilon: i32,
    pub fitted_sign: i32,
    pub fe_residual: f64,
    pub omega: f64,
    pub sym2_l1: f64,
    /// Truncated Euler product over p ≤ min(p_sym, P_max).
    pub sym2_euler: f64,
    pub lambda_2: f64,
    pub lambda_3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub q: u64,
    pub dim: usize,
    pub p_max: u64,
    pub weight_sum: f64,
    pub invariants: Option<InvariantReport>,
    pub forms: Vec<FormSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSummary {
    pub levels: Vec<LevelSummary>,
}

fn summarize(config: &RunConfig, q: u64) -> Result<LevelSummary> {
    let basis = load_or_build(config, q)?;
    let invariants = check_invariants(&basis, DELIGNE_N_MAX, HECKE_PAIRS, HECKE_PAIR_MAX, q)?;
    let euler_limit = config.p_sym.min(basis.p_max);
    let primes = PrimeTable::sieve(euler_limit.max(2))?.primes().to_vec();
    let forms = basis
        .forms
        .par_iter()
        .map(|f| -> Result<FormSummary> {
            Ok(FormSummary {
                id: f.id,
                epsilon: f.epsilon,
                fitted_sign: fitted_sign(f, config.t_max)?.fitted,
                fe_residual: functional_equation_residual(f, f.epsilon)?,
                omega: f.omega,
                sym2_l1: f.sym2_l1,
                sym2_euler: sym2_euler(q, &primes, |p| f.lambda_prime(p))?,
                lambda_2: f.lambda_n(2)?,
                lambda_3: f.lambda_n(3)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelSummary {
        q,
        dim: basis.dim,
        p_max: basis.p_max,
        weight_sum: basis.weight_sum(),
        invariants: Some(invariants),
        forms,
        error: None,
    })
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let dir = RunDir::create(config)?;
    let mut outcome = Outcome::default();
    let mut levels = Vec::new();
    for &q in &config.q_list {
        match summarize(config, q) {
            Ok(level) => {
                if let Some(inv) = &level.invariants {
                    if !inv.passed() {
                        outcome.fail(format!("q={q}: invariant suite failed: {inv:?}"));
                    }
                }
                for f in &level.forms {
                    if f.fitted_sign != f.epsilon {
                        outcome.fail(format!(
                            "q={q} form {}: modular symbols give sign {}, functional equation fit gives {}",
                            f.id, f.epsilon, f.fitted_sign
                        ));
                    }
                    if f.fe_residual > FE_TOLERANCE {
                        outcome.fail(format!("q={q} form {}: functional equation residual {}", f.id, f.fe_residual));
                    }
                }
                levels.push(level);
            }
            Err(e) => {
                outcome.fail(format!("q={q}: {e:#}"));
                levels.push(LevelSummary {
                    q,
                    dim: 0,
                    p_max: 0,
                    weight_sum: 0.0,
                    invariants: None,
                    forms: Vec::new(),
                    error: Some(format!("{e:#}")),
                });
            }
        }
    }
    dir.write_json("basis_summary.json", &BasisSummary { levels }, &mut outcome)?;
    Ok(outcome)
}
