//! Monte Carlo oracle for the recovery driver `(X, Y)` and the CIR++ short rate.
//!
//! Square-root diffusions use full-truncation Euler (`sqrt(max(x, 0))`, state
//! floored at 0). Jumps come from thinning a unit-rate exponential clock
//! against a per-step intensity bound. Each path owns two ChaCha streams
//! (diffusion and jumps) derived from `(seed, path index)`, so output does
//! not depend on the number of worker threads.

use fxcredit_core::affine::CirPpParams;
use fxcredit_core::riccati::{AjdParams, JumpMeasure};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

/// Largest admissible time step, one trading day.
pub const MAX_DT: f64 = 1.0 / 252.0;
/// `X` below this level counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;
const BOUND_INFLATION: f64 = 1.5;
const MAX_HALVINGS: u32 = 10;
const TIME_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("invalid model parameters: {0}")]
    Params(#[from] fxcredit_core::Error),
    #[error("payoff needs time {needed}, which was not simulated")]
    HorizonExceeded { needed: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    /// Pair paths `2k, 2k+1` with negated normals and mirrored uniforms.
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(n_paths: usize, dt: f64, horizon: f64, seed: u64) -> Self {
        Self {
            n_paths,
            dt,
            horizon,
            seed,
            antithetic: false,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_paths < 100 {
            return Err(SimError::Config(format!(
                "n_paths must be >= 100, got {}",
                self.n_paths
            )));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT + 1e-15) {
            return Err(SimError::Config(format!("dt must lie in (0, 1/252], got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(SimError::Config(format!(
                "horizon must be finite and >= 0, got {}",
                self.horizon
            )));
        }
        if self.antithetic && self.n_paths % 2 == 1 {
            return Err(SimError::Config(format!(
                "antithetic sampling needs an even path count, got {}",
                self.n_paths
            )));
        }
        Ok(())
    }
}

/// Simulated states at the observation times, stored path-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub jump_times: Vec<Vec<f64>>,
    /// Paths `2k, 2k+1` are antithetic partners.
    pub antithetic: bool,
}

impl PathBundle {
    pub fn x_at(&self, path: usize, time_index: usize) -> f64 {
        self.x[path * self.times.len() + time_index]
    }

    pub fn y_at(&self, path: usize, time_index: usize) -> f64 {
        self.y[path * self.times.len() + time_index]
    }

    pub fn time_index(&self, t: f64) -> Result<usize, SimError> {
        self.times
            .iter()
            .position(|s| (s - t).abs() <= TIME_EPS)
            .ok_or(SimError::HorizonExceeded { needed: t })
    }
}

/// Normal and uniform draws for one path; the mirror flag implements the
/// antithetic partner.
struct PathRng {
    diffusion: ChaCha8Rng,
    jumps: ChaCha8Rng,
    mirror: bool,
}

impl PathRng {
    fn new(seed: u64, pair: u64, mirror: bool) -> Self {
        let mut diffusion = ChaCha8Rng::seed_from_u64(seed);
        diffusion.set_stream(2 * pair);
        let mut jumps = ChaCha8Rng::seed_from_u64(seed);
        jumps.set_stream(2 * pair + 1);
        Self {
            diffusion,
            jumps,
            mirror,
        }
    }

    fn for_path(cfg: &SimConfig, path: usize) -> Self {
        if cfg.antithetic {
            Self::new(cfg.seed, (path / 2) as u64, path % 2 == 1)
        } else {
            Self::new(cfg.seed, path as u64, false)
        }
    }

    fn normal(&mut self) -> f64 {
        let z: f64 = self.diffusion.sample(StandardNormal);
        if self.mirror {
            -z
        } else {
            z
        }
    }

    /// Uniform on (0, 1).
    fn uniform(&mut self) -> f64 {
        let u: f64 = self.jumps.sample(Open01);
        if self.mirror {
            1.0 - u
        } else {
            u
        }
    }

    fn exp1(&mut self) -> f64 {
        -self.uniform().ln()
    }
}

struct PathState {
    x: f64,
    y: f64,
    t: f64,
    /// Remaining unit-rate exponential clock until the next jump candidate.
    clock: f64,
    jumps: Vec<f64>,
}

fn intensity(p: &AjdParams, x: f64, y: f64) -> f64 {
    p.m + p.mu_x * x + p.mu_y * y
}

fn jump_sizes(p: &AjdParams, rng: &mut PathRng) -> (f64, f64) {
    match p.jump {
        JumpMeasure::ExpX { rate } => (rng.exp1() / rate, 0.0),
        JumpMeasure::DiracXY { jump_x, jump_y } => (jump_x, jump_y),
    }
}

fn cir_step(v: f64, sigma: f64, dt: f64, z: f64) -> f64 {
    (v + sigma * v.max(0.0).sqrt() * dt.sqrt() * z).max(0.0)
}

/// Advances one step of length `dt`, splitting it when a jump lifts the
/// intensity above the step's bound.
fn step(p: &AjdParams, s: &mut PathState, rng: &mut PathRng, dt: f64, depth: u32) {
    let (x0, y0) = (s.x, s.y);
    let bound = BOUND_INFLATION * intensity(p, x0, y0);
    let zx = rng.normal();
    let zy = rng.normal();
    let mut jx = 0.0;
    let mut jy = 0.0;
    let mut elapsed = 0.0;
    let mut new_jumps = Vec::new();
    let saved_clock = s.clock;
    while bound * (dt - elapsed) >= s.clock {
        elapsed += s.clock / bound;
        s.clock = rng.exp1();
        let accept_u = rng.uniform();
        let lam = intensity(p, x0 + jx, y0 + jy);
        if lam > bound && depth < MAX_HALVINGS {
            s.clock = saved_clock;
            let half = 0.5 * dt;
            step(p, s, rng, half, depth + 1);
            step(p, s, rng, half, depth + 1);
            return;
        }
        if accept_u * bound <= lam {
            let (a, b) = jump_sizes(p, rng);
            jx += a;
            jy += b;
            new_jumps.push(s.t + elapsed);
        }
    }
    s.clock -= bound * (dt - elapsed);
    s.x = cir_step(x0, p.sigma_x, dt, zx) + jx;
    s.y = cir_step(y0, p.sigma_y, dt, zy) + jy;
    s.t += dt;
    s.jumps.extend(new_jumps);
}

/// Sorted, de-duplicated observation times within `[0, horizon]`, always
/// including the horizon.
pub fn observation_grid(times: &[f64], horizon: f64) -> Vec<f64> {
    let mut out: Vec<f64> = times
        .iter()
        .copied()
        .filter(|t| *t >= 0.0 && *t <= horizon + TIME_EPS)
        .collect();
    out.push(horizon);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= TIME_EPS);
    out
}

fn simulate_path(p: &AjdParams, cfg: &SimConfig, obs: &[f64], path: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = PathRng::for_path(cfg, path);
    let mut s = PathState {
        x: p.x0,
        y: p.y0,
        t: 0.0,
        clock: rng.exp1(),
        jumps: Vec::new(),
    };
    let mut xs = Vec::with_capacity(obs.len());
    let mut ys = Vec::with_capacity(obs.len());
    let mut last = 0.0;
    for &t_obs in obs {
        let span = t_obs - last;
        if span > TIME_EPS {
            let n = (span / cfg.dt - 1e-9).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                step(p, &mut s, &mut rng, h, 0);
            }
        }
        s.t = t_obs;
        last = t_obs;
        xs.push(s.x);
        ys.push(s.y);
    }
    (xs, ys, s.jumps)
}

/// Simulates `(X, Y)` paths and records them at `observe` (plus the horizon).
pub fn simulate_xy(p: &AjdParams, cfg: &SimConfig, observe: &[f64]) -> Result<PathBundle, SimError> {
    p.validate()?;
    cfg.validate()?;
    let obs = observation_grid(observe, cfg.horizon);
    let per_path: Vec<_> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| simulate_path(p, cfg, &obs, i))
        .collect();
    let mut x = Vec::with_capacity(cfg.n_paths * obs.len());
    let mut y = Vec::with_capacity(cfg.n_paths * obs.len());
    let mut jump_times = Vec::with_capacity(cfg.n_paths);
    for (xs, ys, js) in per_path {
        x.extend(xs);
        y.extend(ys);
        jump_times.push(js);
    }
    Ok(PathBundle {
        times: obs,
        n_paths: cfg.n_paths,
        x,
        y,
        jump_times,
        antithetic: cfg.antithetic,
    })
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_samples(v: &[f64]) -> Self {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
        }
    }

    /// `(estimate - reference) / SE`; zero when both agree exactly.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Payoffs of the pricing layer, evaluated path by path.
#[derive(Debug, Clone, PartialEq)]
pub enum Payoff {
    /// `1{X_T = 0} + exp(-X_{T+h}) 1{X_T > 0}`
    DelayedRecovery { maturity: f64, delay: f64 },
    /// `exp(-X_T)`
    SimpleRecovery { maturity: f64 },
    /// `1{X_T = 0}`
    AtomIndicator { maturity: f64 },
    /// The two-date delayed functional.
    Cascaded { t1: f64, t2: f64, delay: f64 },
    /// `1{tau > T_i}` for payment dates `dates` (without 0) and zero-based `index`.
    Survival { dates: Vec<f64>, index: usize },
    /// `1{tau = T_i}`
    DefaultAt { dates: Vec<f64>, index: usize },
    /// `S_{T_i} 1{tau = T_i}`
    RecoveryGivenDefault { dates: Vec<f64>, index: usize },
    /// Ratio of protection to premium-annuity PVs with `discount[i] = P(0,T_i)`.
    CdsLegs { dates: Vec<f64>, discount: Vec<f64> },
}

impl Payoff {
    /// Times at which the payoff reads the state.
    pub fn observation_times(&self) -> Vec<f64> {
        match self {
            Payoff::DelayedRecovery { maturity, delay } => vec![*maturity, maturity + delay],
            Payoff::SimpleRecovery { maturity } | Payoff::AtomIndicator { maturity } => vec![*maturity],
            Payoff::Cascaded { t1, t2, delay } => vec![*t1, t1 + delay, *t2, t2 + delay],
            Payoff::Survival { dates, .. }
            | Payoff::DefaultAt { dates, .. }
            | Payoff::RecoveryGivenDefault { dates, .. }
            | Payoff::CdsLegs { dates, .. } => dates.clone(),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.observation_times().into_iter().fold(0.0, f64::max)
    }
}

fn is_zero(x: f64) -> bool {
    x < ZERO_THRESHOLD
}

/// First default index on the schedule, if any.
fn default_index(paths: &PathBundle, path: usize, idx: &[usize]) -> Option<usize> {
    idx.iter().position(|&j| !is_zero(paths.x_at(path, j)))
}

/// Monte Carlo estimate of `payoff`; the CDS-leg ratio uses the delta method
/// for its standard error.
pub fn mc_estimate(paths: &PathBundle, payoff: &Payoff) -> Result<Estimate, SimError> {
    let idx: Vec<usize> = payoff
        .observation_times()
        .iter()
        .map(|t| paths.time_index(*t))
        .collect::<Result<_, _>>()?;
    let n = paths.n_paths;
    let x = |path: usize, k: usize| paths.x_at(path, idx[k]);
    let samples: Vec<f64> = match payoff {
        Payoff::DelayedRecovery { .. } => (0..n)
            .map(|i| if is_zero(x(i, 0)) { 1.0 } else { (-x(i, 1)).exp() })
            .collect(),
        Payoff::SimpleRecovery { .. } => (0..n).map(|i| (-x(i, 0)).exp()).collect(),
        Payoff::AtomIndicator { .. } => (0..n).map(|i| f64::from(u8::from(is_zero(x(i, 0))))).collect(),
        Payoff::Cascaded { .. } => (0..n)
            .map(|i| {
                let (a, b, c, d) = (x(i, 0), x(i, 1), x(i, 2), x(i, 3));
                if is_zero(b) {
                    if is_zero(c) {
                        1.0
                    } else {
                        (-d).exp()
                    }
                } else if !is_zero(a) {
                    (-b).exp()
                } else {
                    0.0
                }
            })
            .collect(),
        Payoff::Survival { index, .. } => (0..n)
            .map(|i| f64::from(u8::from(default_index(paths, i, &idx).is_none_or(|d| d > *index))))
            .collect(),
        Payoff::DefaultAt { index, .. } => (0..n)
            .map(|i| f64::from(u8::from(default_index(paths, i, &idx) == Some(*index))))
            .collect(),
        Payoff::RecoveryGivenDefault { index, .. } => (0..n)
            .map(|i| {
                if default_index(paths, i, &idx) == Some(*index) {
                    (-x(i, *index)).exp()
                } else {
                    0.0
                }
            })
            .collect(),
        Payoff::CdsLegs { dates, discount } => {
            if discount.len() != dates.len() {
                return Err(SimError::Config("one discount factor per payment date required".into()));
            }
            let mut prem = Vec::with_capacity(n);
            let mut prot = Vec::with_capacity(n);
            for i in 0..n {
                let d = default_index(paths, i, &idx).unwrap_or(dates.len());
                let mut a = 0.0;
                let mut prev = 0.0;
                for (k, t) in dates.iter().enumerate().take((d + 1).min(dates.len())) {
                    a += (t - prev) * discount[k];
                    prev = *t;
                }
                prem.push(a);
                prot.push(if d < dates.len() {
                    discount[d] * (1.0 - (-x(i, d)).exp())
                } else {
                    0.0
                });
            }
            if paths.antithetic {
                return Ok(ratio_estimate(&pair_means(&prot), &pair_means(&prem)));
            }
            return Ok(ratio_estimate(&prot, &prem));
        }
    };
    Ok(estimate(&samples, paths.antithetic))
}

fn pair_means(v: &[f64]) -> Vec<f64> {
    v.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Antithetic partners are averaged first so the standard error reflects
/// their correlation.
fn estimate(samples: &[f64], antithetic: bool) -> Estimate {
    if antithetic {
        Estimate::from_samples(&pair_means(samples))
    } else {
        Estimate::from_samples(samples)
    }
}

fn ratio_estimate(num: &[f64], den: &[f64]) -> Estimate {
    let n = num.len() as f64;
    let mn = num.iter().sum::<f64>() / n;
    let md = den.iter().sum::<f64>() / n;
    let r = mn / md;
    let resid: Vec<f64> = num.iter().zip(den).map(|(a, b)| a - r * b).collect();
    let e = Estimate::from_samples(&resid);
    Estimate {
        mean: r,
        std_error: e.std_error / md,
    }
}

/// Discount-factor estimates `E[exp(-int_0^T r)]` at each tenor, with the
/// integral taken by the trapezoidal rule on the step grid.
pub fn simulate_cir(c: &CirPpParams, cfg: &SimConfig, tenors: &[f64]) -> Result<Vec<Estimate>, SimError> {
    c.validate()?;
    cfg.validate()?;
    let obs = observation_grid(tenors, cfg.horizon);
    let per_path: Vec<Vec<f64>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = PathRng::for_path(cfg, i);
            let mut x = c.x0();
            let mut t = 0.0;
            let mut integral = 0.0;
            let mut out = Vec::with_capacity(obs.len());
            for &t_obs in &obs {
                let span = t_obs - t;
                if span > TIME_EPS {
                    let n = (span / cfg.dt - 1e-9).ceil().max(1.0) as usize;
                    let h = span / n as f64;
                    for _ in 0..n {
                        let r_left = x.max(0.0) + c.shift.value(t);
                        let xp = x.max(0.0);
                        x += (c.b_x - c.beta_x * xp) * h + c.sigma_x * (xp * h).sqrt() * rng.normal();
                        t += h;
                        let r_right = x.max(0.0) + c.shift.value(t);
                        integral += 0.5 * h * (r_left + r_right);
                    }
                }
                t = t_obs;
                out.push((-integral).exp());
            }
            out
        })
        .collect();
    let mut result = Vec::with_capacity(tenors.len());
    for tenor in tenors {
        let j = obs
            .iter()
            .position(|s| (s - tenor).abs() <= TIME_EPS)
            .ok_or(SimError::HorizonExceeded { needed: *tenor })?;
        let samples: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
        result.push(estimate(&samples, cfg.antithetic));
    }
    Ok(result)
}
