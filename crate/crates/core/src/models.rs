//! Right-hand sides of the delay SIRD model, the non-delay SEIRD baseline and
//! the linearization about the zero equilibrium.

use crate::dde::DelaySystem;
use crate::domain::{ModelParams, ParamSchedule, Seird, Sird};

/// Delay SIRD vector field. `lag` is the state one delay ago; only its
/// infected component enters.
pub fn delay_sird_rhs(_t: f64, u: &Sird, lag: &Sird, p: &ModelParams) -> Sird {
    let n = u.living();
    let contact = p.beta_e * u.s * u.i + p.beta_i * u.s * lag.i;
    Sird {
        s: p.alpha * n - contact - p.mu * u.s,
        i: contact - p.removal_rate() * lag.i - p.mu * u.i,
        r: p.phi_r * lag.i - p.mu * u.r,
        d: p.phi_d * lag.i,
    }
}

/// Non-delay SEIRD vector field; `sigma_rate` is the incubation rate.
pub fn seird_rhs(_t: f64, u: &Seird, p: &ModelParams) -> Seird {
    let n = u.living();
    let contact = p.beta_i * u.s * u.i + p.beta_e * u.s * u.e;
    Seird {
        s: p.alpha * n - contact - p.mu * u.s,
        e: contact - p.sigma_rate * u.e - p.phi_e * u.e - p.mu * u.e,
        i: p.sigma_rate * u.e - (p.phi_d + p.phi_r + p.mu) * u.i,
        r: p.phi_r * u.i + p.phi_e * u.e - p.mu * u.r,
        d: p.phi_d * u.i,
    }
}

/// Linearization in the variables `(n, i, r, d)`, with the population
/// equation `n' = (alpha - mu) n + mu d` taken as stated.
pub fn linearized_rhs(_t: f64, u: &[f64; 4], lag: &[f64; 4], p: &ModelParams) -> [f64; 4] {
    let [n, i, r, d] = *u;
    let i_lag = lag[1];
    [
        (p.alpha - p.mu) * n + p.mu * d,
        -p.removal_rate() * i_lag - p.mu * i,
        p.phi_r * i_lag - p.mu * r,
        p.phi_d * i_lag,
    ]
}

/// Linearization in the compartment variables: the nonlinear field with the
/// contact terms dropped.
pub fn linearized_sird_rhs(_t: f64, u: &Sird, lag: &Sird, p: &ModelParams) -> Sird {
    Sird {
        s: p.alpha * u.living() - p.mu * u.s,
        i: -p.removal_rate() * lag.i - p.mu * u.i,
        r: p.phi_r * lag.i - p.mu * u.r,
        d: p.phi_d * lag.i,
    }
}

/// Delay SIRD ODE with time-dependent parameters. The schedule should already
/// hold population-normalized contact rates.
#[derive(Debug, Clone)]
pub struct DelaySirdOde {
    pub schedule: ParamSchedule,
}

impl DelaySystem for DelaySirdOde {
    fn dim(&self) -> usize {
        4
    }

    fn delay(&self) -> Option<f64> {
        Some(self.schedule.base().sigma_delay)
    }

    fn rhs(&self, t: f64, u: &[f64], lag: &[f64], out: &mut [f64]) {
        let du = delay_sird_rhs(t, &Sird::from_slice(u), &Sird::from_slice(lag), self.schedule.at(t));
        out.copy_from_slice(&du.to_array());
    }
}

#[derive(Debug, Clone)]
pub struct SeirdOde {
    pub schedule: ParamSchedule,
}

impl DelaySystem for SeirdOde {
    fn dim(&self) -> usize {
        5
    }

    fn delay(&self) -> Option<f64> {
        None
    }

    fn rhs(&self, t: f64, u: &[f64], _lag: &[f64], out: &mut [f64]) {
        let du = seird_rhs(t, &Seird::from_slice(u), self.schedule.at(t));
        out.copy_from_slice(&du.to_array());
    }
}

/// The linearized system in `(n, i, r, d)` as an integrable delay system.
#[derive(Debug, Clone)]
pub struct LinearizedDde {
    pub params: ModelParams,
}

impl DelaySystem for LinearizedDde {
    fn dim(&self) -> usize {
        4
    }

    fn delay(&self) -> Option<f64> {
        Some(self.params.sigma_delay)
    }

    fn rhs(&self, t: f64, u: &[f64], lag: &[f64], out: &mut [f64]) {
        let du = linearized_rhs(
            t,
            &[u[0], u[1], u[2], u[3]],
            &[lag[0], lag[1], lag[2], lag[3]],
            &self.params,
        );
        out.copy_from_slice(&du);
    }
}
