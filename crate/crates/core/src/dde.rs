//! Method-of-steps integrator for systems `u'(t) = F(t, u(t), u(t - sigma))`
//! with a single constant delay.
//!
//! The delay must be an integer multiple `m` of the step, so the delayed state
//! is always a stored grid value. Each step is BDF2 (BDF1 for the first step)
//! and the implicit stage is solved by Picard iteration.

use std::sync::Arc;

use thiserror::Error;

use crate::domain::{lag_steps, DomainError, TimeGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DdeError {
    #[error(transparent)]
    Config(#[from] DomainError),
    #[error("Picard iteration did not converge at t = {t} (step {step}): relative increment {residual:e} after {iterations} iterations")]
    NoConvergence {
        t: f64,
        step: usize,
        residual: f64,
        iterations: usize,
    },
    #[error("solution became non-finite at t = {t} (step {step})")]
    NonFinite { t: f64, step: usize },
    #[error("history buffer lookup at index {index} outside stored range [{oldest}, {newest}]")]
    BufferIndex { index: i64, oldest: i64, newest: i64 },
    #[error("history has dimension {got}, system expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Picard tolerance must be positive and max_iterations at least 1")]
    BadOptions,
}

impl DdeError {
    /// True for failures of the solve itself rather than of the setup.
    pub fn is_divergence(&self) -> bool {
        matches!(self, Self::NoConvergence { .. } | Self::NonFinite { .. })
    }
}

/// A semi-discrete system with at most one constant delay.
pub trait DelaySystem {
    fn dim(&self) -> usize;

    /// The constant delay in time units, `None` for systems without one.
    fn delay(&self) -> Option<f64>;

    /// Writes `F(t, u, lag)` into `out`.
    fn rhs(&self, t: f64, u: &[f64], lag: &[f64], out: &mut [f64]);

    /// One fixed-point sweep for `x = base + gamma * F(t, x, lag)`: given the
    /// current iterate, writes the next one.
    ///
    /// The default is the plain explicit substitution. Systems with stiff
    /// linear parts can override it to treat those implicitly.
    fn picard_sweep(
        &self,
        t: f64,
        gamma: f64,
        base: &[f64],
        lag: &[f64],
        iterate: &[f64],
        next: &mut [f64],
    ) {
        self.rhs(t, iterate, lag, next);
        for (x, b) in next.iter_mut().zip(base) {
            *x = b + gamma * *x;
        }
    }
}

/// Prescribed solution on `[t0 - sigma, t0]`; its value at `t0` is the
/// initial condition.
#[derive(Clone)]
pub enum History {
    Constant(Vec<f64>),
    Function(Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>),
}

impl History {
    pub fn function(f: impl Fn(f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn sample(&self, t: f64, out: &mut [f64]) {
        match self {
            Self::Constant(v) => out.copy_from_slice(v),
            Self::Function(f) => f(t, out),
        }
    }
}

impl std::fmt::Debug for History {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Self::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Ring buffer over the most recent `capacity` grid states, indexed by step
/// number (history samples have indices `-m..=0`).
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    dim: usize,
    capacity: usize,
    data: Vec<f64>,
    newest: i64,
}

impl HistoryBuffer {
    /// Samples `history` at steps `-m..=0` of `grid`.
    pub fn from_history(
        history: &History,
        grid: &TimeGrid,
        dim: usize,
        m: usize,
        capacity: usize,
    ) -> Result<Self, DdeError> {
        if let History::Constant(v) = history {
            if v.len() != dim {
                return Err(DdeError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let capacity = capacity.max(m + 1);
        let mut buf = Self {
            dim,
            capacity,
            data: vec![0.0; dim * capacity],
            newest: -(m as i64) - 1,
        };
        let mut sample = vec![0.0; dim];
        for k in -(m as i64)..=0 {
            history.sample(grid.time(k), &mut sample);
            buf.push(&sample);
        }
        Ok(buf)
    }

    pub fn newest(&self) -> i64 {
        self.newest
    }

    pub fn oldest(&self) -> i64 {
        self.newest - self.capacity as i64 + 1
    }

    /// Appends the state for step `newest + 1`, overwriting the oldest.
    pub fn push(&mut self, state: &[f64]) {
        self.newest += 1;
        let slot = self.newest.rem_euclid(self.capacity as i64) as usize;
        self.data[slot * self.dim..(slot + 1) * self.dim].copy_from_slice(state);
    }

    /// Stored state at step `index`.
    pub fn get(&self, index: i64) -> Result<&[f64], DdeError> {
        if index > self.newest || index < self.oldest() {
            return Err(DdeError::BufferIndex {
                index,
                oldest: self.oldest(),
                newest: self.newest,
            });
        }
        let slot = index.rem_euclid(self.capacity as i64) as usize;
        Ok(&self.data[slot * self.dim..(slot + 1) * self.dim])
    }

    /// State at step `n - lag`.
    pub fn delayed(&self, n: i64, lag: usize) -> Result<&[f64], DdeError> {
        self.get(n - lag as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Stop when `|x_{k+1} - x_k|_inf <= tol * |x_{k+1}|_inf`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 100,
        }
    }
}

/// Per-step information handed to an integration observer.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo<'a> {
    pub step: usize,
    pub t: f64,
    pub state: &'a [f64],
    /// Picard iterations used; 0 for the initial state.
    pub iterations: usize,
}

/// Stored grid solution, row-major by step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, step: usize) -> &[f64] {
        &self.values[step * self.dim..(step + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Time series of one component.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.dim).copied().collect()
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Integrates over `grid`, calling `observe` once per grid point including the
/// initial one. The observer sees every accepted step even when a later step
/// fails.
pub fn integrate_with<S: DelaySystem + ?Sized>(
    system: &S,
    history: &History,
    grid: &TimeGrid,
    opts: PicardOptions,
    mut observe: impl FnMut(StepInfo<'_>),
) -> Result<(), DdeError> {
    if !(opts.tol > 0.0) || opts.max_iterations == 0 {
        return Err(DdeError::BadOptions);
    }
    let dim = system.dim();
    let m = match system.delay() {
        Some(delay) => lag_steps(delay, grid.dt())?,
        None => 0,
    };
    let mut buf = HistoryBuffer::from_history(history, grid, dim, m, 3)?;
    observe(StepInfo {
        step: 0,
        t: grid.t0(),
        state: buf.get(0)?,
        iterations: 0,
    });

    let dt = grid.dt();
    let mut base = vec![0.0; dim];
    let mut iterate = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    let mut lag = vec![0.0; dim];
    for n in 1..=grid.n_steps() {
        let t = grid.time(n as i64);
        let prev = buf.get(n as i64 - 1)?;
        let gamma = if n == 1 {
            base.copy_from_slice(prev);
            dt
        } else {
            let prev2 = buf.get(n as i64 - 2)?;
            for ((b, p1), p2) in base.iter_mut().zip(prev).zip(prev2) {
                *b = (4.0 * p1 - p2) / 3.0;
            }
            2.0 * dt / 3.0
        };
        iterate.copy_from_slice(prev);
        // A system without a delay ignores this argument.
        lag.copy_from_slice(if m == 0 { prev } else { buf.delayed(n as i64, m)? });

        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < opts.max_iterations {
            system.picard_sweep(t, gamma, &base, &lag, &iterate, &mut next);
            iterations += 1;
            let diff = next
                .iter()
                .zip(&iterate)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            let scale = inf_norm(&next);
            std::mem::swap(&mut iterate, &mut next);
            if !diff.is_finite() || !scale.is_finite() {
                return Err(DdeError::NonFinite { t, step: n });
            }
            residual = if scale > 0.0 { diff / scale } else { diff };
            if diff <= opts.tol * scale {
                residual = if scale > 0.0 { diff / scale } else { 0.0 };
                break;
            }
        }
        if !(residual <= opts.tol) {
            return Err(DdeError::NoConvergence {
                t,
                step: n,
                residual,
                iterations,
            });
        }
        buf.push(&iterate);
        observe(StepInfo {
            step: n,
            t,
            state: &iterate,
            iterations,
        });
    }
    Ok(())
}

/// Integrates and stores every grid state.
pub fn integrate<S: DelaySystem + ?Sized>(
    system: &S,
    history: &History,
    grid: &TimeGrid,
    opts: PicardOptions,
) -> Result<Trajectory, DdeError> {
    let dim = system.dim();
    let mut traj = Trajectory {
        dim,
        times: Vec::with_capacity(grid.n_steps() + 1),
        values: Vec::with_capacity(dim * (grid.n_steps() + 1)),
    };
    integrate_with(system, history, grid, opts, |info| {
        traj.times.push(info.t);
        traj.values.extend_from_slice(info.state);
    })?;
    Ok(traj)
}

/// Scalar linear DDE `u' = a u + b u(t - tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLinearDde {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
}

impl DelaySystem for ScalarLinearDde {
    fn dim(&self) -> usize {
        1
    }

    fn delay(&self) -> Option<f64> {
        Some(self.tau)
    }

    fn rhs(&self, _t: f64, u: &[f64], lag: &[f64], out: &mut [f64]) {
        out[0] = self.a * u[0] + self.b * lag[0];
    }
}
