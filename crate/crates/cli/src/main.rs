//! `oqwork`: scenario sweeps, joint-measurability bounds and the invariant suite.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oqwork::jointmeas::{mu_jm, optimize_bound_over_sharpness};
use oqwork::scenarios::{
    run_nv_sweep, run_qubit_sweep, uniform_grid, NvRow, NvScenarioConfig, QubitRow,
    QubitScenarioConfig,
};
use oqwork::suite;
use serde::de::DeserializeOwned;
use serde_json::json;

use output::{fmt_f64, line_chart, sidecar_path, write_file, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0} of {1} checks failed")]
    SuiteFailed(usize, usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::SuiteFailed(..) => 2,
            _ => 1,
        }
    }
}

impl From<oqwork::Error> for CliError {
    fn from(e: oqwork::Error) -> Self {
        CliError::ConfigInvalid(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "oqwork", version, about = "Quasiprobability work statistics for small quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Driven qubit: OQ table, quantum and classical extractable work over time.
    QubitSweep {
        /// JSON config; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Resample the time grid uniformly with this many points.
        #[arg(long)]
        grid: Option<usize>,
        /// Override the measurement sharpness.
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Three-level NV centre: OQ against MHQ over time.
    NvSweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Classical work bound maximized over jointly measurable sharpness.
    JmBound {
        /// Angle between the two measurement directions.
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        /// Energy gap.
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        /// Also evaluate the bound at this sharpness.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        /// Write the bound curve as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the seeded invariant suite.
    Check {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Comma-separated check ids to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::QubitSweep {
            config,
            out,
            svg,
            grid,
            mu,
        } => {
            let mut cfg: QubitScenarioConfig = load_config(config.as_deref())?;
            if let Some(n) = grid {
                cfg.t_grid = resample(&cfg.t_grid, n)?;
            }
            if let Some(mu) = mu {
                cfg.mu = mu;
            }
            cfg.validate()?;
            qubit_sweep(&cfg, &out, svg.as_deref())
        }
        Command::NvSweep {
            config,
            out,
            svg,
            grid,
        } => {
            let mut cfg: NvScenarioConfig = load_config(config.as_deref())?;
            if let Some(n) = grid {
                cfg.t_grid = resample(&cfg.t_grid, n)?;
            }
            cfg.validate()?;
            nv_sweep(&cfg, &out, svg.as_deref())
        }
        Command::JmBound {
            theta,
            delta,
            mu,
            grid,
            out,
            svg,
        } => jm_bound(theta, delta, mu, grid.unwrap_or(201), out.as_deref(), svg.as_deref()),
        Command::Check { seed, only, out } => check(seed, &only, out.as_deref()),
    }
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::ConfigParse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn resample(grid: &[f64], n: usize) -> Result<Vec<f64>, CliError> {
    if n == 0 {
        return Err(CliError::ConfigInvalid("--grid must be positive".into()));
    }
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::ConfigInvalid("cannot resample an empty time grid".into()));
    }
    Ok(uniform_grid(lo, hi, n))
}

fn ensure_normalized(name: &str, t: f64, values: &[f64]) -> Result<(), CliError> {
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(CliError::ConfigInvalid(format!(
            "{name} at t = {t} sums to {total}"
        )));
    }
    Ok(())
}

fn qubit_table(rows: &[QubitRow]) -> Result<Table, CliError> {
    let header = ["t", "q00", "q01", "q10", "q11", "neg_oq", "w_q", "w_cl"];
    let mut table = Table::new(header.iter().map(|h| h.to_string()).collect());
    for r in rows {
        ensure_normalized("OQ", r.t, &r.q)?;
        table.push(vec![r.t, r.q[0], r.q[1], r.q[2], r.q[3], r.neg_oq, r.w_q, r.w_cl]);
    }
    Ok(table)
}

fn qubit_sweep(cfg: &QubitScenarioConfig, out: &Path, svg: Option<&Path>) -> Result<(), CliError> {
    let rows = run_qubit_sweep(cfg)?;
    let table = qubit_table(&rows)?;
    write_file(out, &table.to_csv())?;

    let min_q01 = rows.iter().map(|r| r.q[1]).fold(f64::INFINITY, f64::min);
    let max_gap = rows.iter().map(|r| r.w_q - r.w_cl).fold(f64::NEG_INFINITY, f64::max);
    let nonclassical = rows.iter().filter(|r| r.nonclassical).count();
    let meta = json!({
        "config": cfg,
        "gap": cfg.gap(),
        "rows": rows.len(),
        "outcome_order": "outcome 0 is the ground level",
        "min_q01": min_q01,
        "max_w_q_minus_w_cl": max_gap,
        "nonclassical_points": nonclassical,
        "jarzynski": cfg.beta.map(|beta| json!({
            "beta": beta,
            "t": rows.iter().map(|r| r.t).collect::<Vec<_>>(),
            "mean_exp_minus_beta_w": rows.iter().map(|r| r.jarzynski_lhs).collect::<Vec<_>>(),
            "gamma_oq": rows.iter().map(|r| r.gamma_oq).collect::<Vec<_>>(),
        })),
    });
    write_file(&sidecar_path(out), &pretty(&meta))?;

    if let Some(path) = svg {
        let t = table.column("t").unwrap_or_default();
        let series = ["q01", "neg_oq", "w_q", "w_cl"]
            .iter()
            .map(|name| (name.to_string(), table.column(name).unwrap_or_default()))
            .collect::<Vec<_>>();
        write_file(path, &line_chart("Driven qubit", "t", &t, &series))?;
    }
    println!(
        "{} rows; min q01 {}; max W_q - W_cl {}; {} nonclassical points",
        rows.len(),
        fmt_f64(min_q01),
        fmt_f64(max_gap),
        nonclassical
    );
    Ok(())
}

fn nv_table(rows: &[NvRow]) -> Result<Table, CliError> {
    let mut header = vec!["t".to_string()];
    for prefix in ["oq", "mhq", "tpm", "wtpm"] {
        for i in 0..3 {
            for f in 0..3 {
                header.push(format!("{prefix}{i}{f}"));
            }
        }
    }
    header.extend(["neg_oq", "neg_mhq", "w_oq", "w_mhq"].map(String::from));
    for prefix in ["p_a", "epm"] {
        for k in 0..3 {
            header.push(format!("{prefix}{k}"));
        }
    }
    header.push("dark_epm".into());

    let mut table = Table::new(header);
    for r in rows {
        ensure_normalized("OQ", r.t, &r.oq)?;
        ensure_normalized("MHQ", r.t, &r.mhq)?;
        ensure_normalized("TPM", r.t, &r.tpm)?;
        let mut row = vec![r.t];
        row.extend(r.oq);
        row.extend(r.mhq);
        row.extend(r.tpm);
        row.extend(r.wtpm);
        row.extend([r.neg_oq, r.neg_mhq, r.w_oq, r.w_mhq]);
        row.extend(r.p_a);
        row.extend(r.epm);
        row.push(r.dark_epm);
        table.push(row);
    }
    Ok(table)
}

fn nv_sweep(cfg: &NvScenarioConfig, out: &Path, svg: Option<&Path>) -> Result<(), CliError> {
    let rows = run_nv_sweep(cfg)?;
    let table = nv_table(&rows)?;
    write_file(out, &table.to_csv())?;

    let (populations, raw_total) = cfg.normalized_populations();
    let neg_gap = rows
        .iter()
        .map(|r| (r.neg_oq - r.neg_mhq).abs())
        .fold(0.0, f64::max);
    let work_gap = rows.iter().map(|r| (r.w_oq - r.w_mhq).abs()).fold(0.0, f64::max);
    let meta = json!({
        "config": cfg,
        "rows": rows.len(),
        "populations": {
            "raw_sum": raw_total,
            "renormalized": (raw_total - 1.0).abs() > 0.0,
            "used": populations,
        },
        "labels": "index 0, 1, 2 = spin levels 1, 0, -1 = energy eigenstates of H(0) in descending order",
        "dark_outcome": 1,
        "energies": "eigenvalues of H(t) at each measurement time",
        "max_abs_neg_oq_minus_neg_mhq": neg_gap,
        "max_abs_w_oq_minus_w_mhq": work_gap,
    });
    write_file(&sidecar_path(out), &pretty(&meta))?;

    if let Some(path) = svg {
        let t = table.column("t").unwrap_or_default();
        let series = ["neg_oq", "neg_mhq", "w_oq", "w_mhq", "dark_epm"]
            .iter()
            .map(|name| (name.to_string(), table.column(name).unwrap_or_default()))
            .collect::<Vec<_>>();
        write_file(path, &line_chart("NV centre", "t (us)", &t, &series))?;
    }
    println!(
        "{} rows; max |N_OQ - N_MHQ| {}; max |<w>_OQ - <w>_MHQ| {}",
        rows.len(),
        fmt_f64(neg_gap),
        fmt_f64(work_gap)
    );
    Ok(())
}

fn jm_bound(
    theta: f64,
    delta: f64,
    mu: Option<f64>,
    grid: usize,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<(), CliError> {
    if !theta.is_finite() || !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(CliError::ConfigInvalid(format!("theta = {theta} outside [0, pi]")));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(CliError::ConfigInvalid(format!("delta = {delta} must be >= 0")));
    }
    if grid < 2 {
        return Err(CliError::ConfigInvalid("--grid must be at least 2".into()));
    }
    let dir_i = [0.0, 0.0, 1.0];
    let dir_f = [theta.sin(), 0.0, theta.cos()];
    let (mu_star, w_max) = optimize_bound_over_sharpness(&dir_i, &dir_f, delta);
    let top = mu_jm(theta);
    let bound = |m: f64| 0.25 * delta * (1.0 - m * m * theta.cos() + 2.0 * m * (theta / 2.0).sin());
    println!("mu_jm {}", fmt_f64(top));
    println!("mu_star {}", fmt_f64(mu_star));
    println!("w_cl_max {}", fmt_f64(w_max));
    if let Some(m) = mu {
        if !(0.0..=1.0).contains(&m) {
            return Err(CliError::ConfigInvalid(format!("mu = {m} outside [0, 1]")));
        }
        println!("w_cl({}) {}", fmt_f64(m), fmt_f64(bound(m)));
        println!("jointly_measurable {}", m <= top + 1e-12);
    }
    if out.is_some() || svg.is_some() {
        let mus = uniform_grid(0.0, top, grid);
        let mut table = Table::new(vec!["mu".into(), "w_cl".into()]);
        for &m in &mus {
            table.push(vec![m, bound(m)]);
        }
        if let Some(path) = out {
            write_file(path, &table.to_csv())?;
        }
        if let Some(path) = svg {
            let series = [("w_cl".to_string(), table.column("w_cl").unwrap_or_default())];
            write_file(path, &line_chart("Classical bound", "mu", &mus, &series))?;
        }
    }
    Ok(())
}

fn check(seed: u64, only: &[u32], out: Option<&Path>) -> Result<(), CliError> {
    if let Some(bad) = only.iter().find(|id| !(1..=12).contains(*id)) {
        return Err(CliError::ConfigInvalid(format!("no check with id {bad}")));
    }
    let outcomes: Vec<_> = if only.is_empty() {
        suite::run_all(seed)
    } else {
        suite::run_selected(seed, only)
    };
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} passed, {} failed (seed {seed})", outcomes.len() - failed, failed);
    if let Some(path) = out {
        write_file(path, &pretty(&json!({ "seed": seed, "outcomes": outcomes })))?;
    }
    if failed > 0 {
        return Err(CliError::SuiteFailed(failed, outcomes.len()));
    }
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
