mod basis;
mod crosscheck;
mod distribution;
mod moments;
pub mod petersson;
pub mod plotdata;
mod svalue;
mod zeros;

use anyhow::{bail, Context, Result};
use heckearg::arith::is_prime;
use heckearg::cache::{load_basis, save_basis};
use heckearg::hecke::{diagonalize, EigenBasis};
use heckearg::lfunction::{ArgTrace, LFunction};
use heckearg::modsym::ManinSymbolSpace;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::Outcome;

pub use basis::BasisSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Basis,
    Petersson,
    Svalue,
    Moments,
    Distribution,
    Zeros,
    Crosscheck,
    Plotdata,
}

/// Runs one subcommand, on a dedicated pool when `threads` is set.
pub fn run(command: Command, config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    let body = || match command {
        Command::Basis => basis::run(config),
        Command::Petersson => petersson::run(config),
        Command::Svalue => svalue::run(config),
        Command::Moments => moments::run(config),
        Command::Distribution => distribution::run(config),
        Command::Zeros => zeros::run(config),
        Command::Crosscheck => crosscheck::run(config),
        Command::Plotdata => plotdata::run(config),
    };
    if config.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(config.threads).build()?;
        pool.install(body)
    } else {
        body()
    }
}

/// Loads the cached basis, or builds and caches it; either way the returned basis is
/// the content of the cache file.
pub fn load_or_build(config: &RunConfig, q: u64) -> Result<EigenBasis> {
    if !is_prime(q) {
        bail!("q = {q} is not prime");
    }
    let p_max = config.p_max_for(q);
    if let Some(basis) = load_basis(&config.cache_dir, q)? {
        if basis.p_max >= p_max {
            return Ok(basis);
        }
    }
    let space = ManinSymbolSpace::build(q)?;
    let basis = diagonalize(&space, p_max)?;
    save_basis(&config.cache_dir, &basis)?;
    load_basis(&config.cache_dir, q)?.context("basis cache vanished after writing")
}

/// S(t,f) traces for every (form, t), in form-then-t order.
pub(crate) fn traces(basis: &EigenBasis, config: &RunConfig) -> Vec<Vec<Result<ArgTrace, String>>> {
    let params = config.afe();
    basis
        .forms
        .par_iter()
        .map(|form| match LFunction::new(form, &params) {
            Ok(l) => config.t_grid.iter().map(|&t| l.s_of_t(t).map_err(|e| e.to_string())).collect(),
            Err(e) => config.t_grid.iter().map(|_| Err(e.to_string())).collect(),
        })
        .collect()
}

/// `value` formatted as a file-name fragment.
pub(crate) fn tag(value: f64) -> String {
    crate::output::num(value)
}
