use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qkd_epsilon::budget::{baseline_budgets, reconstruct_sec, Baseline, Family, Reconstruction};
use qkd_epsilon::cv::{cv_key_rate, XiBound};
use qkd_epsilon::dv::dv_key_rate;
use qkd_epsilon::harness::{self, OutputFormat, ProtocolParams, SweepSpec};
use qkd_epsilon::oracle::{grid_search, GridSpec};
use qkd_epsilon::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qkd-eps",
    version,
    about = "Composable QKD key rates and epsilon-budget optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Protocol family when no config is given (cv or dv)
    #[arg(long, global = true)]
    family: Option<Family>,
    /// Total epsilon levels, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also run the grid oracle at every sweep level
    #[arg(long, global = true)]
    oracle: bool,
    /// Use the lower confidence bound for the excess noise (CV)
    #[arg(long, global = true)]
    paper_sign_xi: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one budget and print the rate breakdown
    Rate {
        #[arg(long)]
        eps_pe: Option<f64>,
        #[arg(long)]
        eps_cor: Option<f64>,
    },
    /// Optimize the split of a single total epsilon
    Optimize,
    /// Optimize every level and compare with the baselines
    Sweep,
    /// Dump the exhaustive grid for a single total epsilon as CSV
    Oracle {
        #[arg(long, default_value_t = qkd_epsilon::oracle::DEFAULT_POINTS)]
        points: usize,
    },
}

fn build_spec(c: &Common) -> Result<SweepSpec> {
    let mut spec = match &c.config {
        Some(path) => {
            let spec = harness::load_config(path)?;
            if let Some(f) = c.family {
                if f != spec.family {
                    return Err(Error::Validation(vec![format!(
                        "--family {f} contradicts family = {} in {}",
                        spec.family,
                        path.display()
                    )]));
                }
            }
            spec
        }
        None => SweepSpec::defaults(c.family.unwrap_or(Family::Cv)),
    };
    if !c.eps.is_empty() {
        spec.eps_levels = c.eps.clone();
    }
    if let Some(seed) = c.seed {
        spec.cga_config.seed = seed;
    }
    if let Some(format) = c.format {
        spec.format = format;
    }
    if c.out.is_some() {
        spec.output_path = c.out.clone();
    }
    if c.oracle {
        spec.include_oracle = true;
    }
    if c.paper_sign_xi {
        if let ProtocolParams::Cv(p) = &mut spec.protocol {
            p.xi_bound = XiBound::Lower;
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// The single ε for `rate`, `optimize` and `oracle`.
fn single_eps(c: &Common, spec: &SweepSpec) -> Result<f64> {
    match (c.eps.as_slice(), spec.budget.eps) {
        ([e], _) => Ok(*e),
        ([], Some(e)) => Ok(e),
        ([], None) => Err(Error::Validation(vec![
            "a single total epsilon is required (--eps or budget.eps)".to_owned(),
        ])),
        _ => Err(Error::Validation(vec![
            "--eps: expected exactly one value".to_owned()
        ])),
    }
}

fn write_out(spec: &SweepSpec, text: &str) -> Result<()> {
    match &spec.output_path {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn cmd_rate(c: &Common, spec: &SweepSpec, eps_pe: Option<f64>, eps_cor: Option<f64>) -> Result<()> {
    let eps = single_eps(c, spec)?;
    let (pe, cor) = match (
        eps_pe.or(spec.budget.eps_pe),
        eps_cor.or(spec.budget.eps_cor),
    ) {
        (Some(pe), Some(cor)) => (pe, cor),
        (None, None) => {
            let (_, b) = baseline_budgets(eps, spec.family)?
                .into_iter()
                .find(|(k, _)| *k == Baseline::Symmetric)
                .expect("symmetric baseline");
            (b.eps_pe(), b.eps_cor())
        }
        _ => {
            return Err(Error::Validation(vec![
                "--eps-pe and --eps-cor must be given together".to_owned(),
            ]));
        }
    };
    let budget = match reconstruct_sec(eps, pe, cor, spec.family)? {
        Reconstruction::Feasible(b) => b,
        Reconstruction::Infeasible { eps_sec } => {
            return Err(Error::Validation(vec![format!(
                "budget: eps_pe = {pe:e} and eps_cor = {cor:e} leave eps_sec = {eps_sec:e}"
            )]))
        }
    };
    let text = match &spec.protocol {
        ProtocolParams::Cv(p) => {
            let r = cv_key_rate(p, &budget)?;
            match spec.format {
                OutputFormat::Json => json(&serde_json::json!({ "budget": budget, "breakdown": r }))?,
                OutputFormat::Csv => format!(
                    "eps_total = {:e}\neps_pe = {:e}\neps_cor = {:e}\neps_sec = {:e}\n\
                     T = {}\nt_wc = {}\nxi_wc = {}\nn = {}\nm = {}\nI_AB = {} bits\nchi_BE = {} bits\n\
                     R_PE = {} bits\nfinite-size term = {} bits\nrate = {:e} bits/use\nrate = {:e} bits/s\n",
                    eps,
                    budget.eps_pe(),
                    budget.eps_cor(),
                    budget.eps_sec(),
                    r.transmissivity,
                    r.t_wc,
                    r.xi_wc,
                    r.n,
                    r.m,
                    r.mutual_info_bits,
                    r.holevo_bits,
                    r.r_pe_bits,
                    r.finite_term_bits,
                    r.rate_per_use,
                    r.rate_bits_per_sec
                ),
            }
        }
        ProtocolParams::Dv(p) => {
            let r = dv_key_rate(p, &budget)?;
            match spec.format {
                OutputFormat::Json => json(&serde_json::json!({ "budget": budget, "breakdown": r }))?,
                OutputFormat::Csv => format!(
                    "eps_total = {:e}\neps_pe = {:e}\neps_cor = {:e}\neps_sec = {:e}\n\
                     eta_tot = {}\np_sift = {}\nQ1 = {}\nn = {}\nm = {}\nqber = {}\nqber_wc = {}\n\
                     kappa = {}\nsecret fraction = {}\nc_dt = {}\nrate = {:e} bits/use\nrate = {:e} bits/s\n",
                    eps,
                    budget.eps_pe(),
                    budget.eps_cor(),
                    budget.eps_sec(),
                    r.eta_tot,
                    r.p_sift,
                    r.q1,
                    r.n,
                    r.m,
                    r.qber_est,
                    r.qber_wc,
                    r.kappa,
                    r.secret_fraction,
                    r.c_dt,
                    r.rate_per_use,
                    r.rate_bits_per_sec
                ),
            }
        }
    };
    write_out(spec, &text)
}

fn cmd_optimize(c: &Common, spec: &SweepSpec) -> Result<()> {
    let eps = single_eps(c, spec)?;
    let p = harness::optimize(&spec.protocol, &spec.cga_config, spec.restarts, eps)?;
    let text = match spec.format {
        OutputFormat::Json => json(&serde_json::json!({ "eps_total": eps, "optimized": p }))?,
        OutputFormat::Csv => {
            let mut s = format!("eps_total = {eps:e}\n");
            match p.budget {
                Some(b) => {
                    s += &format!(
                        "eps_pe = {:e}\neps_cor = {:e}\neps_sec = {:e}\n",
                        b.eps_pe(),
                        b.eps_cor(),
                        b.eps_sec()
                    )
                }
                None => s += "no feasible budget found\n",
            }
            if let Some(r) = p.rate_bits_per_sec {
                s += &format!("rate = {r:e} bits/s\n");
            }
            s += &format!("seed = {}\nevaluations = {}\n", p.seed, p.evaluations);
            s
        }
    };
    write_out(spec, &text)
}

fn cmd_sweep(spec: &SweepSpec) -> Result<()> {
    let result = harness::run_sweep(spec)?;
    if spec.output_path.is_none() {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        match spec.format {
            OutputFormat::Csv => harness::write_csv(&result, &mut lock)?,
            OutputFormat::Json => harness::write_json(&result, &mut lock)?,
        }
        lock.flush().map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        })?;
    }
    Ok(())
}

fn cmd_oracle(c: &Common, spec: &SweepSpec, points: usize) -> Result<()> {
    let eps = single_eps(c, spec)?;
    let grid = GridSpec::log(eps, points)?;
    let res = grid_search(&grid, eps, spec.family, |b| {
        spec.protocol.rate_bits_per_sec(b)
    })?;
    match (&res.best_budget, res.best_fitness) {
        (Some(b), Some(r)) => eprintln!(
            "best: eps_pe = {:e}, eps_cor = {:e}, eps_sec = {:e}, rate = {r:e} bits/s",
            b.eps_pe(),
            b.eps_cor(),
            b.eps_sec()
        ),
        _ => eprintln!("no feasible grid cell"),
    }
    match &spec.output_path {
        Some(path) => res.save_csv(path),
        None => res.write_csv(std::io::stdout().lock()),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let spec = build_spec(&cli.common)?;
    match &cli.command {
        Command::Rate { eps_pe, eps_cor } => cmd_rate(&cli.common, &spec, *eps_pe, *eps_cor),
        Command::Optimize => cmd_optimize(&cli.common, &spec),
        Command::Sweep => cmd_sweep(&spec),
        Command::Oracle { points } => cmd_oracle(&cli.common, &spec, *points),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
