//! Constant-delay compartmental epidemic models: a delay SIRD ODE, a 1D
//! reaction-diffusion version of it, a SEIRD baseline, a method-of-steps BDF2
//! integrator and characteristic-root stability analysis.

pub mod dde;
pub mod domain;
pub mod models;
pub mod pde1d;
pub mod scenario;
pub mod stability;

pub use dde::{integrate, integrate_with, DdeError, DelaySystem, History, HistoryBuffer, PicardOptions, Trajectory};
pub use domain::{normalize_ode_params, DomainError, ModelParams, ParamSchedule, Seird, Sird, TimeGrid};
