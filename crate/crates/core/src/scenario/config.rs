//! Scenario files: JSON documents (conventionally `*.cfg`) with sections
//! `model`, `grid`, `schedule`, `output` and an optional `history`.
//!
//! ```json
//! {
//!   "label": "ode_table1_sigma5_lockdown",
//!   "model": {
//!     "kind": "delay_sird_ode",
//!     "params": { "beta_e": 0.225, "beta_i": 0.09375, "phi_r": 0.03125,
//!                 "phi_d": 0.0046875, "sigma_delay": 5.0 },
//!     "initial": { "type": "compartments", "s": 999.0, "i": 1.0 },
//!     "normalize_by_n0": true
//!   },
//!   "grid": { "t_end": 267.0, "dt": 0.25 },
//!   "schedule": [ { "t": 30.0, "beta_factor": 0.25 } ],
//!   "output": {}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{lag_steps, ModelParams, ParamSchedule, TimeGrid};
use crate::pde1d::InfectedDiffusion;

use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DelaySirdOde,
    SeirdOde,
    #[serde(rename = "delay_sird_pde1d")]
    DelaySirdPde1d,
    LinearizedDde,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::DelaySirdOde => "delay_sird_ode",
            Self::SeirdOde => "seird_ode",
            Self::DelaySirdPde1d => "delay_sird_pde1d",
            Self::LinearizedDde => "linearized_dde",
        }
    }

    pub fn has_delay(self) -> bool {
        !matches!(self, Self::SeirdOde)
    }
}

/// Initial state. For the linearized model, `n` is taken as `s + i + r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Compartments {
        s: f64,
        i: f64,
        #[serde(default)]
        r: f64,
        #[serde(default)]
        d: f64,
    },
    Seird {
        s: f64,
        #[serde(default)]
        e: f64,
        i: f64,
        #[serde(default)]
        r: f64,
        #[serde(default)]
        d: f64,
    },
    /// Two population centres with an outbreak in the smaller one.
    TwoCentres,
    /// Spatially constant densities.
    Homogeneous {
        s: f64,
        i: f64,
        #[serde(default)]
        r: f64,
        #[serde(default)]
        d: f64,
    },
}

/// Solution on `[-sigma, 0)`; the initial state is used at `t = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum HistorySpec {
    /// Constant, equal to the initial state.
    #[default]
    Initial,
    /// Constant compartment values (ODE models only).
    Constant {
        s: f64,
        i: f64,
        #[serde(default)]
        r: f64,
        #[serde(default)]
        d: f64,
    },
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Contact rates as tabulated, before any normalization.
    pub params: ModelParams,
    pub initial: InitialSpec,
    /// Divide contact rates by the initial living population.
    #[serde(default, skip_serializing_if = "is_false")]
    pub normalize_by_n0: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infected_diffusion: Option<InfectedDiffusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_end: f64,
    pub dt: f64,
    /// Number of cells on `[0, 1]` (PDE only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
}

/// Multiplies the base contact rates and diffusion coefficients from `t` on.
/// Factors always refer to the base parameters, not to earlier events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEvent {
    pub t: f64,
    #[serde(default = "one")]
    pub beta_factor: f64,
    #[serde(default = "one")]
    pub nu_factor: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Times of full spatial snapshots (PDE only); must be grid times.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub plot_script: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub model: ModelSpec,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<ScheduleEvent>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub history: HistorySpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// One validation problem, located by a dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
        origin: origin.to_string(),
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let issues = scenario.validate();
    if !issues.is_empty() {
        return Err(ScenarioError::Invalid {
            label: scenario.label,
            issues,
        });
    }
    Ok(scenario)
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text, &path.display().to_string())
}

impl Scenario {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn is_pde(&self) -> bool {
        self.model.kind == ModelKind::DelaySirdPde1d
    }

    pub fn time_grid(&self) -> Result<TimeGrid, ScenarioError> {
        TimeGrid::new(0.0, self.grid.t_end, self.grid.dt).map_err(|e| self.single_issue("grid", e.to_string()))
    }

    /// Schedule with the tabulated (unnormalized) parameters.
    pub fn raw_schedule(&self) -> Result<ParamSchedule, ScenarioError> {
        let base = self.model.params;
        let mut points = vec![(0.0, base)];
        for ev in &self.schedule {
            points.push((ev.t, base.scaled(ev.beta_factor, ev.nu_factor)));
        }
        ParamSchedule::new(points).map_err(|e| self.single_issue("schedule", e.to_string()))
    }

    fn single_issue(&self, path: &str, message: String) -> ScenarioError {
        ScenarioError::Invalid {
            label: self.label.clone(),
            issues: vec![Issue {
                path: path.into(),
                message,
            }],
        }
    }

    /// All problems found, empty when the scenario is runnable.
    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let mut push = |path: &str, message: String| {
            issues.push(Issue {
                path: path.to_string(),
                message,
            })
        };
        let kind = self.model.kind;

        if self.label.is_empty()
            || !self
                .label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
            || self.label.starts_with('.')
        {
            push("label", format!("{:?} must be a non-empty file name of [A-Za-z0-9_.-]", self.label));
        }

        for (name, v) in self.model.params.rate_fields() {
            if !v.is_finite() || v < 0.0 {
                push(&format!("model.params.{name}"), format!("must be finite and non-negative, got {v}"));
            }
        }
        let sigma = self.model.params.sigma_delay;
        if kind.has_delay() && !(sigma > 0.0) {
            push("model.params.sigma_delay", format!("must be positive for {}, got {sigma}", kind.name()));
        }

        let initial_ok = matches!(
            (kind, &self.model.initial),
            (ModelKind::DelaySirdOde | ModelKind::LinearizedDde, InitialSpec::Compartments { .. })
                | (ModelKind::SeirdOde, InitialSpec::Seird { .. })
                | (ModelKind::DelaySirdPde1d, InitialSpec::TwoCentres | InitialSpec::Homogeneous { .. })
        );
        if !initial_ok {
            push("model.initial", format!("initial state type not supported by {}", kind.name()));
        }
        let values: Vec<f64> = match &self.model.initial {
            InitialSpec::Compartments { s, i, r, d } | InitialSpec::Homogeneous { s, i, r, d } => vec![*s, *i, *r, *d],
            InitialSpec::Seird { s, e, i, r, d } => vec![*s, *e, *i, *r, *d],
            InitialSpec::TwoCentres => vec![],
        };
        if values.iter().any(|v| !v.is_finite()) {
            push("model.initial", "values must be finite".into());
        }
        if self.model.normalize_by_n0 {
            let n0: f64 = values.iter().take(values.len().saturating_sub(1)).sum();
            if kind == ModelKind::LinearizedDde {
                push("model.normalize_by_n0", "the linearized model has no contact terms".into());
            } else if !values.is_empty() && !(n0 > 0.0) {
                push("model.normalize_by_n0", format!("initial living population must be positive, got {n0}"));
            }
        }
        if self.model.infected_diffusion.is_some() && kind != ModelKind::DelaySirdPde1d {
            push("model.infected_diffusion", "only used by delay_sird_pde1d".into());
        }

        match &self.history {
            HistorySpec::Initial => {}
            HistorySpec::Constant { s, i, r, d } => {
                if !matches!(kind, ModelKind::DelaySirdOde | ModelKind::LinearizedDde) {
                    push("history", format!("constant compartment history not supported by {}", kind.name()));
                }
                if [s, i, r, d].iter().any(|v| !v.is_finite()) {
                    push("history", "values must be finite".into());
                }
            }
        }

        let g = &self.grid;
        let grid_ok = g.dt > 0.0 && g.dt.is_finite() && g.t_end > 0.0 && g.t_end.is_finite();
        if !(g.dt > 0.0 && g.dt.is_finite()) {
            push("grid.dt", format!("must be positive, got {}", g.dt));
        }
        if !(g.t_end > 0.0 && g.t_end.is_finite()) {
            push("grid.t_end", format!("must be positive, got {}", g.t_end));
        }
        if grid_ok {
            let steps = g.t_end / g.dt;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) || steps.round() < 1.0 {
                push("grid.t_end", format!("{} is not a positive multiple of dt = {}", g.t_end, g.dt));
            }
            if kind.has_delay() && sigma > 0.0 && lag_steps(sigma, g.dt).is_err() {
                push(
                    "grid.dt",
                    format!("sigma_delay = {sigma} is not an integer multiple of dt = {}", g.dt),
                );
            }
        }
        match (kind, g.nx) {
            (ModelKind::DelaySirdPde1d, None) => push("grid.nx", "required for delay_sird_pde1d".into()),
            (ModelKind::DelaySirdPde1d, Some(nx)) if nx < 2 => push("grid.nx", format!("need at least 2 cells, got {nx}")),
            (ModelKind::DelaySirdPde1d, _) => {}
            (_, Some(_)) => push("grid.nx", "only used by delay_sird_pde1d".into()),
            (_, None) => {}
        }

        let mut prev = 0.0;
        for (k, ev) in self.schedule.iter().enumerate() {
            if !(ev.t > prev) || !ev.t.is_finite() {
                push(
                    &format!("schedule[{k}].t"),
                    format!("event times must be positive and strictly increasing, got {}", ev.t),
                );
            }
            prev = ev.t.max(prev);
            for (name, v) in [("beta_factor", ev.beta_factor), ("nu_factor", ev.nu_factor)] {
                if !v.is_finite() || v < 0.0 {
                    push(&format!("schedule[{k}].{name}"), format!("must be finite and non-negative, got {v}"));
                }
            }
        }

        for (k, &ts) in self.output.snapshots.iter().enumerate() {
            let path = format!("output.snapshots[{k}]");
            if kind != ModelKind::DelaySirdPde1d {
                push(&path, "snapshots are only written for delay_sird_pde1d".into());
                continue;
            }
            if grid_ok {
                let q = ts / g.dt;
                if !(ts >= 0.0 && ts <= g.t_end + 1e-9 * g.dt) || (q - q.round()).abs() > 1e-9 * q.abs().max(1.0) {
                    push(&path, format!("{ts} is not a grid time in [0, {}]", g.t_end));
                }
            }
        }
        issues
    }
}
