use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use heckearg_cli::{run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "heckearg", version, about = "Hecke eigenforms of prime level: bases, L-functions, S(t,f) statistics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Build or load eigenbases, run the invariant suite, write caches and a summary
    Basis(Overrides),
    /// Spectral vs Kloosterman sides of the orthogonality relation
    Petersson(Overrides),
    /// S(t,f), M(t,f) and R(t,f) over the form and t grids
    Svalue(Overrides),
    /// Harmonic moments against the exact oracle and the predicted main term
    Moments(Overrides),
    /// Weighted distribution of S(t,f)/sqrt(log log q)
    Distribution(Overrides),
    /// Critical-line zeros, box counts and sigma_x windows
    Zeros(Overrides),
    /// Compare computed eigenvalues with LMFDB data
    Crosscheck(Overrides),
    /// Plot data files from earlier results in the same run directory
    Plotdata(Overrides),
    /// Print the effective configuration as JSON
    PrintConfig(Overrides),
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// JSON configuration file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long)]
    p_max: Option<u64>,
    #[arg(long)]
    p_sym: Option<u64>,
    #[arg(long)]
    c_max_per_q: Option<u64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    afe_error: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    offline: bool,
    #[arg(long)]
    diag_c: Option<f64>,
    #[arg(long)]
    diag_a: Option<f64>,
}

impl Overrides {
    fn resolve(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.q {
            c.q_list = v;
        }
        if let Some(v) = self.t {
            c.t_grid = v;
        }
        if let Some(v) = self.delta {
            c.delta = v;
        }
        if let Some(v) = self.n_max {
            c.n_max = v;
        }
        if let Some(v) = self.p_max {
            c.p_max = Some(v);
        }
        if let Some(v) = self.p_sym {
            c.p_sym = v;
        }
        if let Some(v) = self.c_max_per_q {
            c.c_max_per_q = v;
        }
        if let Some(v) = self.t_max {
            c.t_max = v;
        }
        if let Some(v) = self.afe_error {
            c.afe_error = v;
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        if let Some(v) = self.cache_dir {
            c.cache_dir = v;
        }
        if let Some(v) = self.out_dir {
            c.out_dir = v;
        }
        if self.offline {
            c.offline = true;
        }
        if let Some(v) = self.diag_c {
            c.diagnostic.c = v;
        }
        if let Some(v) = self.diag_a {
            c.diagnostic.a = v;
        }
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, overrides) = match cli.command {
        Sub::Basis(o) => (Some(Command::Basis), o),
        Sub::Petersson(o) => (Some(Command::Petersson), o),
        Sub::Svalue(o) => (Some(Command::Svalue), o),
        Sub::Moments(o) => (Some(Command::Moments), o),
        Sub::Distribution(o) => (Some(Command::Distribution), o),
        Sub::Zeros(o) => (Some(Command::Zeros), o),
        Sub::Crosscheck(o) => (Some(Command::Crosscheck), o),
        Sub::Plotdata(o) => (Some(Command::Plotdata), o),
        Sub::PrintConfig(o) => (None, o),
    };
    let config = match overrides.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let Some(command) = command else {
        print!("{}", config.to_json());
        return ExitCode::SUCCESS;
    };
    match run(command, &config) {
        Ok(outcome) => {
            for file in &outcome.files {
                println!("{}", file.display());
            }
            for failure in &outcome.failures {
                eprintln!("FAILED: {failure}");
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
