//! `fxcredit` subcommands: `curve`, `price`, `calibrate`, `simulate`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 solver
//! failure. Diagnostics go to stderr.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fxcredit_core::affine::{atom_mass_zero, cir_pp_bond, CirPpParams, ProcessState};
use fxcredit_core::calibration::{
    bootstrap_curves, fit_parameters, BootstrapOptions, FitOptions, FitParams, FitReport, RecoveryParams, PARAM_NAMES,
};
use fxcredit_core::curve::{Curve, CurveKind};
use fxcredit_core::products::{
    cds_spread, corp_bond_value, credit_term_sheet, gov_bond_value, CreditTermSheet, PaymentSchedule,
};
use fxcredit_core::recovery::{cascaded_value, curve_rates, forward_recovery_delayed, forward_recovery_simple};
use fxcredit_core::riccati::{AjdParams, JumpMeasure};
use serde::{Deserialize, Serialize};

use crate::io::{self, fmt_f64, InputError, ParamFile};
use crate::simulation::{self, Estimate, Payoff, SimConfig, SimError};

#[derive(Debug, Parser)]
#[command(
    name = "fxcredit",
    version,
    about = "Recovery-rate credit and liquidity term structures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export P, F, P~ and the instantaneous credit-spread curve as CSV.
    Curve(CurveArgs),
    /// Price a government bond, corporate bond or CDS on the param-file schedule.
    Price(PriceArgs),
    /// Bootstrap (and optionally fit) curves from market quotes.
    Calibrate(CalibrateArgs),
    /// Monte Carlo estimate of a payoff next to its analytic value.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecoveryKind {
    /// `1{X_T = 0} + exp(-X_{T+h}) 1{X_T > 0}`
    Delayed,
    /// `exp(-X_T)`
    Simple,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Comma-separated tenors, or `start:end:step`.
    #[arg(long, default_value = "0:10:0.25")]
    pub grid: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = RecoveryKind::Delayed)]
    pub recovery: RecoveryKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Product {
    Gov,
    Corp,
    Cds,
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, value_enum)]
    pub product: Product,
    /// Illiquidity curve CSV for corporate bonds; zero when omitted.
    #[arg(long)]
    pub illiquidity: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CalibrationMode {
    Bootstrap,
    Fit,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub quotes: PathBuf,
    #[arg(long, value_enum, default_value_t = CalibrationMode::Bootstrap)]
    pub mode: CalibrationMode,
    #[arg(long)]
    pub out: PathBuf,
    /// Starting point for `--mode fit` (`[cirpp]` and `[ajd]` sections).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Fail instead of regularizing a rank-deficient bootstrap.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PayoffKind {
    DelayedRecovery,
    SimpleRecovery,
    Atom,
    Cascaded,
    Survival,
    DefaultAt,
    RecoveryGivenDefault,
    Cds,
    CirBond,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, value_enum)]
    pub payoff: PayoffKind,
    /// Maturity `T` (first date `T1` for `cascaded`).
    #[arg(long)]
    pub maturity: Option<f64>,
    /// Second date `T2` for `cascaded`.
    #[arg(long)]
    pub t2: Option<f64>,
    /// One-based payment index for schedule payoffs.
    #[arg(long, default_value_t = 1)]
    pub index: usize,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = simulation::MAX_DT)]
    pub dt: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; the result does not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub antithetic: bool,
    /// Write the simulated states as CSV (`path_id,time,X,Y`).
    #[arg(long)]
    pub dump_paths: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numeric(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<fxcredit_core::Error> for CliError {
    fn from(e: fxcredit_core::Error) -> Self {
        use fxcredit_core::Error as E;
        let msg = e.to_string();
        match e {
            E::BlowUp { .. }
            | E::Convergence { .. }
            | E::LimitNotConverged { .. }
            | E::TransformPole { .. }
            | E::DegenerateAnnuity => CliError::Numeric(msg),
            E::RankDeficient | E::NegativeDiscount { .. } | E::FitNotConverged { .. } | E::MissingQuotes(_) => {
                CliError::Solver(msg)
            }
            _ => CliError::Input(msg),
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Params(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Runs a parsed command; returns what goes to stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Curve(a) => cmd_curve(&a),
        Command::Price(a) => cmd_price(&a),
        Command::Calibrate(a) => cmd_calibrate(&a),
        Command::Simulate(a) => cmd_simulate(&a),
    }
}

/// Parses `a,b,c` or `start:end:step` (inclusive of `end` up to rounding).
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: &str| CliError::Input(format!("--grid `{s}`: {m}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, h] = parts[..] else {
            return Err(bad("expected start:end:step"));
        };
        let (a, b, h) = (num(a)?, num(b)?, num(h)?);
        if !(h > 0.0 && b >= a) {
            return Err(bad("need step > 0 and end >= start"));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        (0..=n).map(|i| a + h * i as f64).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if grid.is_empty() || grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("tenors must be >= 0 and strictly increasing"));
    }
    Ok(grid)
}

fn load_params(path: &Path) -> Result<(ParamFile, String), CliError> {
    let pf = ParamFile::load(path)?;
    Ok((pf, path.display().to_string()))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn cmd_curve(a: &CurveArgs) -> Result<String, CliError> {
    let (pf, file) = load_params(&a.params)?;
    let ajd = pf.require_ajd(&file)?;
    let cir = pf.cir_params(&file).transpose()?;
    let grid = parse_grid(&a.grid)?;
    let s0 = ProcessState::initial(&ajd);
    let f: Vec<f64> = grid
        .iter()
        .map(|t| match a.recovery {
            RecoveryKind::Delayed => forward_recovery_delayed(&ajd, &s0, *t),
            RecoveryKind::Simple => forward_recovery_simple(&ajd, ajd.x0, *t),
        })
        .collect::<Result<_, _>>()?;
    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    let mut written = vec!["F.csv"];
    write_file(
        &a.out.join("F.csv"),
        &io::curve_csv(grid.iter().copied().zip(f.iter().copied())),
    )?;
    if grid.len() >= 2 {
        let fc = Curve::new(grid.clone(), f.clone(), CurveKind::Rate)?;
        write_file(&a.out.join("spread.csv"), &io::curve_csv(curve_rates(&fc)?.points()))?;
        written.push("spread.csv");
    }
    if let Some(c) = cir {
        let p: Vec<f64> = grid.iter().map(|t| cir_pp_bond(&c, *t)).collect::<Result<_, _>>()?;
        let pd: Vec<f64> = p.iter().zip(&f).map(|(a, b)| a * b).collect();
        write_file(&a.out.join("P.csv"), &io::curve_csv(grid.iter().copied().zip(p)))?;
        write_file(&a.out.join("Pd.csv"), &io::curve_csv(grid.iter().copied().zip(pd)))?;
        written.extend(["P.csv", "Pd.csv"]);
    }
    let mut out = String::new();
    for w in written {
        writeln!(out, "wrote {}", a.out.join(w).display()).unwrap();
    }
    Ok(out)
}

/// Machine-readable output of `price --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceReport {
    pub product: String,
    /// Bond price, or par spread for a CDS.
    pub value: f64,
    pub term_sheet: Option<TermSheetReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSheetReport {
    pub dates: Vec<f64>,
    pub survival: Vec<f64>,
    pub pd: Vec<f64>,
    pub default_at: Vec<f64>,
    pub rgd: Vec<f64>,
}

impl TermSheetReport {
    fn new(sheet: &CreditTermSheet, sched: &PaymentSchedule) -> Self {
        Self {
            dates: sched.payment_dates().to_vec(),
            survival: sheet.survival.clone(),
            pd: sheet.pd.clone(),
            default_at: (0..sheet.survival.len()).map(|i| sheet.default_at(i)).collect(),
            rgd: sheet.rgd.clone(),
        }
    }
}

fn discount_on(c: &CirPpParams, sched: &PaymentSchedule) -> Result<Curve, CliError> {
    let dates = sched.dates().to_vec();
    let v: Vec<f64> = dates.iter().map(|t| cir_pp_bond(c, *t)).collect::<Result<_, _>>()?;
    Ok(Curve::new(dates, v, CurveKind::Discount)?)
}

fn cmd_price(a: &PriceArgs) -> Result<String, CliError> {
    let (pf, file) = load_params(&a.params)?;
    let sched = pf.require_schedule(&file)?;
    let cir = pf.require_cir(&file)?;
    let ajd = pf.ajd_params(&file).transpose()?;
    let discount = discount_on(&cir, &sched)?;
    let need_ajd = || ajd.ok_or_else(|| CliError::Input(format!("{file}: field `ajd`: section is required")));
    let value = match a.product {
        Product::Gov => gov_bond_value(&discount, &sched)?,
        Product::Corp => {
            let p = need_ajd()?;
            let dates = sched.payment_dates().to_vec();
            let pd: Vec<f64> = dates
                .iter()
                .map(|t| Ok(discount.value(*t)? * forward_recovery_simple(&p, p.x0, *t)?))
                .collect::<Result<_, fxcredit_core::Error>>()?;
            let pd = Curve::new(dates.clone(), pd, CurveKind::Discount)?;
            let l = match &a.illiquidity {
                Some(path) => io::read_curve(path, CurveKind::Illiquidity)?,
                None => Curve::new(dates.clone(), vec![0.0; dates.len()], CurveKind::Illiquidity)?,
            };
            corp_bond_value(&pd, &l, &sched)?
        }
        Product::Cds => {
            let p = need_ajd()?;
            cds_spread(&discount, &p, p.x0, &sched)?
        }
    };
    let term_sheet = match ajd {
        Some(p) => Some(TermSheetReport::new(&credit_term_sheet(&p, p.x0, &sched)?, &sched)),
        None => None,
    };
    let report = PriceReport {
        product: format!("{:?}", a.product).to_lowercase(),
        value,
        term_sheet,
    };
    if a.json {
        return Ok(serde_json::to_string_pretty(&report).expect("serializable") + "\n");
    }
    let label = if a.product == Product::Cds { "spread" } else { "price" };
    let mut out = format!("product  {}\n{label:<8} {}\n", report.product, fmt_f64(value));
    if let Some(ts) = &report.term_sheet {
        writeln!(
            out,
            "\n{:>4} {:>24} {:>24} {:>24} {:>24} {:>24}",
            "i", "T_i", "survival", "pd", "default_at", "rgd"
        )
        .unwrap();
        for i in 0..ts.dates.len() {
            writeln!(
                out,
                "{:>4} {:>24} {:>24} {:>24} {:>24} {:>24}",
                i + 1,
                fmt_f64(ts.dates[i]),
                fmt_f64(ts.survival[i]),
                fmt_f64(ts.pd[i]),
                fmt_f64(ts.default_at[i]),
                fmt_f64(ts.rgd[i])
            )
            .unwrap();
        }
    }
    Ok(out)
}

/// Contents of `params.json` written by `calibrate --mode fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl FitSummary {
    fn new(r: &FitReport) -> Self {
        Self {
            names: PARAM_NAMES.iter().map(|s| s.to_string()).collect(),
            values: r.params.to_array().to_vec(),
            residual_norm: r.residual_norm,
            iterations: r.iterations,
        }
    }
}

fn default_fit_start(discount: &Curve) -> Result<FitParams, CliError> {
    // flat short rate from the longest discount factor
    let t = discount.last_tenor();
    let r = if t > 0.0 { -discount.value(t)?.ln() / t } else { 0.02 };
    let level = r.max(1e-4);
    Ok(FitParams {
        cir: CirPpParams {
            r0: level,
            b_x: level,
            beta_x: 0.5,
            sigma_x: 0.05,
            shift: fxcredit_core::affine::ShiftFunction::constant(0.0),
        },
        recovery: RecoveryParams {
            lambda_x: 5.0,
            m: 0.05,
            sigma_x: 0.1,
        },
    })
}

fn fit_start_from_file(path: &Path) -> Result<FitParams, CliError> {
    let (pf, file) = load_params(path)?;
    let cir = pf.require_cir(&file)?;
    let ajd = pf.require_ajd(&file)?;
    let JumpMeasure::ExpX { rate } = ajd.jump else {
        return Err(CliError::Input(format!(
            "{file}: field `ajd.jump.type`: fit needs exp_x jumps"
        )));
    };
    Ok(FitParams {
        cir,
        recovery: RecoveryParams {
            lambda_x: rate,
            m: ajd.m,
            sigma_x: ajd.sigma_x,
        },
    })
}

fn cmd_calibrate(a: &CalibrateArgs) -> Result<String, CliError> {
    let quotes = io::read_quotes(&a.quotes)?;
    let opts = BootstrapOptions {
        regularization: if a.strict {
            None
        } else {
            BootstrapOptions::default().regularization
        },
        ..BootstrapOptions::default()
    };
    let mut result = bootstrap_curves(&quotes, &opts)?;
    let mut out = String::new();
    for c in &result.clipped {
        eprintln!(
            "warning: illiquidity at tenor {} fitted to {}, clipped to 0",
            fmt_f64(c.tenor),
            fmt_f64(c.fitted)
        );
    }
    if a.mode == CalibrationMode::Fit {
        let init = match &a.params {
            Some(p) => fit_start_from_file(p)?,
            None => default_fit_start(&result.discount)?,
        };
        result.fit = Some(fit_parameters(
            &result.discount,
            &result.defaultable,
            &init,
            &FitOptions::default(),
        )?);
    }
    fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    for (name, c) in [
        ("P.csv", &result.discount),
        ("Pd.csv", &result.defaultable),
        ("L.csv", &result.illiquidity),
    ] {
        let path = a.out.join(name);
        io::write_curve(&path, c).map_err(|e| io_err(&path, e))?;
        writeln!(out, "wrote {}", path.display()).unwrap();
    }
    let mut res = String::from("quote_index,residual\n");
    for (i, r) in result.residuals.iter().enumerate() {
        writeln!(res, "{i},{}", fmt_f64(*r)).unwrap();
    }
    let path = a.out.join("residuals.csv");
    write_file(&path, &res)?;
    writeln!(out, "wrote {}", path.display()).unwrap();
    if let Some(fit) = &result.fit {
        let path = a.out.join("params.json");
        write_file(
            &path,
            &(serde_json::to_string_pretty(&FitSummary::new(fit)).expect("serializable") + "\n"),
        )?;
        writeln!(out, "wrote {}", path.display()).unwrap();
    }
    let max_res = result.residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    writeln!(out, "max |residual| {}", fmt_f64(max_res)).unwrap();
    Ok(out)
}

/// Machine-readable output of `simulate --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub payoff: String,
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub antithetic: bool,
    pub estimate: f64,
    pub std_error: f64,
    pub analytic: f64,
    /// Absent when the standard error is zero and the estimate differs.
    pub z_score: Option<f64>,
}

fn need(v: Option<f64>, flag: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Input(format!("--{flag} is required for this payoff")))
}

fn cmd_simulate(a: &SimulateArgs) -> Result<String, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Input(format!("--threads: {e}")))?;
    pool.install(|| simulate_inner(a))
}

fn simulate_inner(a: &SimulateArgs) -> Result<String, CliError> {
    let (pf, file) = load_params(&a.params)?;
    let mut cfg = SimConfig::new(a.paths, a.dt, 0.0, a.seed);
    cfg.antithetic = a.antithetic;

    let (estimate, analytic) = if a.payoff == PayoffKind::CirBond {
        let cir = pf.require_cir(&file)?;
        let t = need(a.maturity, "maturity")?;
        cfg.horizon = t;
        let est = simulation::simulate_cir(&cir, &cfg, &[t])?;
        (est[0], cir_pp_bond(&cir, t)?)
    } else {
        let p = pf.require_ajd(&file)?;
        let (payoff, analytic) = payoff_and_analytic(a, &pf, &file, &p)?;
        cfg.horizon = payoff.horizon();
        let paths = simulation::simulate_xy(&p, &cfg, &payoff.observation_times())?;
        if let Some(path) = &a.dump_paths {
            dump_paths(path, &paths)?;
        }
        (simulation::mc_estimate(&paths, &payoff)?, analytic)
    };
    report(a, estimate, analytic)
}

fn payoff_and_analytic(a: &SimulateArgs, pf: &ParamFile, file: &str, p: &AjdParams) -> Result<(Payoff, f64), CliError> {
    let s0 = ProcessState::initial(p);
    let schedule_payoff = |make: fn(Vec<f64>, usize) -> Payoff| -> Result<(Payoff, PaymentSchedule, usize), CliError> {
        let sched = pf.require_schedule(file)?;
        if a.index == 0 || a.index > sched.len() {
            return Err(CliError::Input(format!("--index must lie in 1..={}", sched.len())));
        }
        Ok((make(sched.payment_dates().to_vec(), a.index - 1), sched, a.index - 1))
    };
    Ok(match a.payoff {
        PayoffKind::DelayedRecovery => {
            let t = need(a.maturity, "maturity")?;
            let payoff = Payoff::DelayedRecovery {
                maturity: t,
                delay: p.h,
            };
            (payoff, forward_recovery_delayed(p, &s0, t)?)
        }
        PayoffKind::SimpleRecovery => {
            let t = need(a.maturity, "maturity")?;
            (
                Payoff::SimpleRecovery { maturity: t },
                forward_recovery_simple(p, p.x0, t)?,
            )
        }
        PayoffKind::Atom => {
            let t = need(a.maturity, "maturity")?;
            (Payoff::AtomIndicator { maturity: t }, atom_mass_zero(p, &s0, t)?)
        }
        PayoffKind::Cascaded => {
            let (t1, t2) = (need(a.maturity, "maturity")?, need(a.t2, "t2")?);
            let analytic = cascaded_value(p, &s0, t1, t2)?;
            (Payoff::Cascaded { t1, t2, delay: p.h }, analytic)
        }
        PayoffKind::Survival | PayoffKind::DefaultAt | PayoffKind::RecoveryGivenDefault => {
            let make: fn(Vec<f64>, usize) -> Payoff = match a.payoff {
                PayoffKind::Survival => |dates, index| Payoff::Survival { dates, index },
                PayoffKind::DefaultAt => |dates, index| Payoff::DefaultAt { dates, index },
                _ => |dates, index| Payoff::RecoveryGivenDefault { dates, index },
            };
            let (payoff, sched, i) = schedule_payoff(make)?;
            let sheet = credit_term_sheet(p, p.x0, &sched)?;
            let analytic = match a.payoff {
                PayoffKind::Survival => sheet.survival[i],
                PayoffKind::DefaultAt => sheet.default_at(i),
                _ => sheet.rgd[i],
            };
            (payoff, analytic)
        }
        PayoffKind::Cds => {
            let sched = pf.require_schedule(file)?;
            let cir = pf.require_cir(file)?;
            let discount = discount_on(&cir, &sched)?;
            let dates = sched.payment_dates().to_vec();
            let dfs: Vec<f64> = dates.iter().map(|t| discount.value(*t)).collect::<Result<_, _>>()?;
            let analytic = cds_spread(&discount, p, p.x0, &sched)?;
            (Payoff::CdsLegs { dates, discount: dfs }, analytic)
        }
        PayoffKind::CirBond => unreachable!("handled by the caller"),
    })
}

fn dump_paths(path: &Path, paths: &simulation::PathBundle) -> Result<(), CliError> {
    let mut s = String::from("path_id,time,X,Y\n");
    for i in 0..paths.n_paths {
        for (j, t) in paths.times.iter().enumerate() {
            writeln!(
                s,
                "{i},{},{},{}",
                fmt_f64(*t),
                fmt_f64(paths.x_at(i, j)),
                fmt_f64(paths.y_at(i, j))
            )
            .unwrap();
        }
    }
    write_file(path, &s)
}

fn report(a: &SimulateArgs, e: Estimate, analytic: f64) -> Result<String, CliError> {
    let r = SimulationReport {
        payoff: a
            .payoff
            .to_possible_value()
            .expect("named variant")
            .get_name()
            .to_string(),
        paths: a.paths,
        dt: a.dt,
        seed: a.seed,
        antithetic: a.antithetic,
        estimate: e.mean,
        std_error: e.std_error,
        analytic,
        z_score: Some(e.z_score(analytic)).filter(|z| z.is_finite()),
    };
    if a.json {
        return Ok(serde_json::to_string_pretty(&r).expect("serializable") + "\n");
    }
    Ok(format!(
        "payoff     {}\npaths      {}\nestimate   {}\nstd_error  {}\nanalytic   {}\nz_score    {}\n",
        r.payoff,
        r.paths,
        fmt_f64(r.estimate),
        fmt_f64(r.std_error),
        fmt_f64(r.analytic),
        r.z_score.map_or_else(|| "n/a".to_string(), fmt_f64)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(parse_grid("1,0.5").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        use fxcredit_core::Error as E;
        assert_eq!(CliError::from(E::RankDeficient).exit_code(), 4);
        assert_eq!(CliError::from(E::MissingQuotes("government")).exit_code(), 4);
        assert_eq!(CliError::from(E::BlowUp { time: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::from(E::Ordering("t1 < t2")).exit_code(), 2);
        assert_eq!(CliError::from(SimError::Config("x".into())).exit_code(), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
