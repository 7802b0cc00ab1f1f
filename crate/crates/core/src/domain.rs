//! Parameter containers, compartment vectors, time grids and lockdown schedules
//! shared by every model and solver in the crate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while constructing or querying the shared domain types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("time before schedule start: t = {t} < {start}")]
    TimeBeforeStart { t: f64, start: f64 },
    #[error("population used for normalization must be positive, got {0}")]
    NonPositivePopulation(f64),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("delay {delay} is not a positive integer multiple of dt = {dt}")]
    DelayNotMultiple { delay: f64, dt: f64 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

/// Epidemiological rate constants and the incubation delay.
///
/// Contact rates are stored exactly as tabulated (unnormalized); ODE
/// scenarios divide them by the initial population through
/// [`normalize_ode_params`]. `phi_e` and `sigma_rate` only enter the
/// non-delay SEIRD baseline; `allee_a` and the `nu_*` coefficients only
/// enter the 1D PDE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Birth rate, 1/day.
    #[serde(default)]
    pub alpha: f64,
    /// Background mortality, 1/day.
    #[serde(default)]
    pub mu: f64,
    /// Contact rate with currently infected, 1/(person day).
    pub beta_e: f64,
    /// Contact rate with infected one delay ago, 1/(person day).
    pub beta_i: f64,
    pub phi_r: f64,
    pub phi_d: f64,
    #[serde(default)]
    pub phi_e: f64,
    /// Incubation *rate* of the SEIRD baseline, 1/day.
    #[serde(default)]
    pub sigma_rate: f64,
    /// Incubation *delay* of the delay models, days.
    pub sigma_delay: f64,
    #[serde(default)]
    pub allee_a: f64,
    #[serde(default)]
    pub nu_s: f64,
    #[serde(default)]
    pub nu_e: f64,
    #[serde(default)]
    pub nu_i: f64,
    #[serde(default)]
    pub nu_r: f64,
}

impl ModelParams {
    /// Baseline parameter table for the ODE and 1D experiments, with the
    /// given incubation delay.
    pub fn table1(sigma_delay: f64) -> Self {
        Self {
            alpha: 0.0,
            mu: 0.0,
            beta_e: 9.0 / 40.0,
            beta_i: 3.0 / 32.0,
            phi_r: 1.0 / 32.0,
            phi_d: 3.0 / 640.0,
            phi_e: 1.0 / 8.0,
            sigma_rate: 0.0,
            sigma_delay,
            allee_a: 0.0,
            nu_s: 3.75e-5,
            nu_e: 0.75e-3,
            nu_i: 0.75e-10,
            nu_r: 3.75e-5,
        }
    }

    pub fn with_removal(mut self, phi_r: f64, phi_d: f64) -> Self {
        self.phi_r = phi_r;
        self.phi_d = phi_d;
        self
    }

    /// Combined removal rate `phi_d + phi_r` acting on the delayed infected.
    pub fn removal_rate(&self) -> f64 {
        self.phi_d + self.phi_r
    }

    /// Multiplies both contact rates and all diffusion coefficients.
    pub fn scaled(&self, beta_factor: f64, nu_factor: f64) -> Self {
        Self {
            beta_e: self.beta_e * beta_factor,
            beta_i: self.beta_i * beta_factor,
            nu_s: self.nu_s * nu_factor,
            nu_e: self.nu_e * nu_factor,
            nu_i: self.nu_i * nu_factor,
            nu_r: self.nu_r * nu_factor,
            ..*self
        }
    }

    /// Named fields that must be finite and non-negative.
    pub fn rate_fields(&self) -> [(&'static str, f64); 14] {
        [
            ("alpha", self.alpha),
            ("mu", self.mu),
            ("beta_e", self.beta_e),
            ("beta_i", self.beta_i),
            ("phi_r", self.phi_r),
            ("phi_d", self.phi_d),
            ("phi_e", self.phi_e),
            ("sigma_rate", self.sigma_rate),
            ("sigma_delay", self.sigma_delay),
            ("allee_a", self.allee_a),
            ("nu_s", self.nu_s),
            ("nu_e", self.nu_e),
            ("nu_i", self.nu_i),
            ("nu_r", self.nu_r),
        ]
    }
}

/// Divides the contact rates by the initial population `n0`.
pub fn normalize_ode_params(p: &ModelParams, n0: f64) -> Result<ModelParams, DomainError> {
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(DomainError::NonPositivePopulation(n0));
    }
    Ok(ModelParams {
        beta_e: p.beta_e / n0,
        beta_i: p.beta_i / n0,
        ..*p
    })
}

/// Piecewise-constant parameter sets; entry `k` is in force on `[t_k, t_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSchedule {
    breakpoints: Vec<(f64, ModelParams)>,
}

impl ParamSchedule {
    pub fn constant(params: ModelParams) -> Self {
        Self {
            breakpoints: vec![(0.0, params)],
        }
    }

    /// Breakpoint times must be finite and strictly increasing, starting at 0.
    pub fn new(breakpoints: Vec<(f64, ModelParams)>) -> Result<Self, DomainError> {
        let Some(&(first, _)) = breakpoints.first() else {
            return Err(DomainError::InvalidSchedule("no breakpoints".into()));
        };
        if first != 0.0 {
            return Err(DomainError::InvalidSchedule(format!(
                "first breakpoint must be at t = 0, got {first}"
            )));
        }
        for pair in breakpoints.windows(2) {
            let (a, b) = (pair[0].0, pair[1].0);
            if !(b > a) || !b.is_finite() {
                return Err(DomainError::InvalidSchedule(format!(
                    "breakpoint times must be strictly increasing ({a} then {b})"
                )));
            }
        }
        Ok(Self { breakpoints })
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0].0
    }

    pub fn base(&self) -> &ModelParams {
        &self.breakpoints[0].1
    }

    pub fn breakpoints(&self) -> &[(f64, ModelParams)] {
        &self.breakpoints
    }

    /// Parameters of the last breakpoint with time `<= t`.
    pub fn params_at(&self, t: f64) -> Result<&ModelParams, DomainError> {
        if t < self.start() {
            return Err(DomainError::TimeBeforeStart {
                t,
                start: self.start(),
            });
        }
        Ok(self.at(t))
    }

    /// As [`Self::params_at`], but times before the start map to the first entry.
    pub fn at(&self, t: f64) -> &ModelParams {
        let idx = self.breakpoints.partition_point(|(tk, _)| *tk <= t);
        &self.breakpoints[idx.saturating_sub(1)].1
    }

    /// Applies `f` to every parameter set, keeping the breakpoint times.
    pub fn try_map<E>(
        &self,
        mut f: impl FnMut(&ModelParams) -> Result<ModelParams, E>,
    ) -> Result<Self, E> {
        let breakpoints = self
            .breakpoints
            .iter()
            .map(|(t, p)| Ok((*t, f(p)?)))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Self { breakpoints })
    }
}

/// Uniform time grid `t_n = t0 + n dt`, `n = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// Builds the grid; `t_end` is rounded to the nearest grid point.
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Result<Self, DomainError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(DomainError::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !t0.is_finite() || !t_end.is_finite() || !(t_end > t0) {
            return Err(DomainError::InvalidGrid(format!(
                "need finite t_end > t0, got t0 = {t0}, t_end = {t_end}"
            )));
        }
        let n_steps = ((t_end - t0) / dt).round() as usize;
        if n_steps == 0 {
            return Err(DomainError::InvalidGrid(format!(
                "interval [{t0}, {t_end}] shorter than one step of {dt}"
            )));
        }
        Ok(Self { t0, dt, n_steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps as i64)
    }

    pub fn time(&self, step: i64) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    /// Number of steps `m` spanned by `delay`; it must be a positive integer.
    pub fn lag_steps(&self, delay: f64) -> Result<usize, DomainError> {
        lag_steps(delay, self.dt)
    }
}

pub(crate) fn lag_steps(delay: f64, dt: f64) -> Result<usize, DomainError> {
    let ratio = delay / dt;
    let m = ratio.round();
    if !ratio.is_finite() || m < 1.0 || (ratio - m).abs() > 1e-9 * m.max(1.0) {
        return Err(DomainError::DelayNotMultiple { delay, dt });
    }
    Ok(m as usize)
}

/// Compartment vector of the delay SIRD model, in persons.
///
/// Nonnegativity is not enforced: the delay model can produce negative
/// excursions and those are reported as diagnostics, never clamped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sird {
    pub s: f64,
    pub i: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub d: f64,
}

impl Sird {
    pub fn new(s: f64, i: f64, r: f64, d: f64) -> Self {
        Self { s, i, r, d }
    }

    /// Living population `s + i + r`.
    pub fn living(&self) -> f64 {
        self.s + self.i + self.r
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.i, self.r, self.d]
    }

    pub fn from_slice(u: &[f64]) -> Self {
        Self::new(u[0], u[1], u[2], u[3])
    }
}

/// Compartment vector of the non-delay SEIRD baseline.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seird {
    pub s: f64,
    #[serde(default)]
    pub e: f64,
    pub i: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub d: f64,
}

impl Seird {
    pub fn new(s: f64, e: f64, i: f64, r: f64, d: f64) -> Self {
        Self { s, e, i, r, d }
    }

    /// Living population `s + e + i + r`.
    pub fn living(&self) -> f64 {
        self.s + self.e + self.i + self.r
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.s, self.e, self.i, self.r, self.d]
    }

    pub fn from_slice(u: &[f64]) -> Self {
        Self::new(u[0], u[1], u[2], u[3], u[4])
    }
}
