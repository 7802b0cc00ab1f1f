//! Experiment definitions: load a scenario file, run it, summarize and write
//! the results, and compare an ODE run against a spatially integrated PDE run.

pub mod analysis;
pub mod catalog;
pub mod config;
pub mod output;

use thiserror::Error;

use crate::dde::{integrate_with, DdeError, History, PicardOptions};
use crate::domain::{normalize_ode_params, ModelParams, ParamSchedule};
use crate::models::{DelaySirdOde, LinearizedDde, SeirdOde};
use crate::pde1d::{self, DelayPde1d, PdeState};
use crate::stability::{contractivity_check, decoupled_point, is_stable, theorem31_check, StabilityVerdict};

pub use analysis::{Envelope, Peak, Trend};
pub use catalog::catalog;
pub use config::{
    load_scenario, parse_scenario, GridSpec, HistorySpec, InitialSpec, Issue, ModelKind, ModelSpec, OutputSpec,
    Scenario, ScheduleEvent,
};
pub use output::{run_scenario, write_comparison, RunArtifacts};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("{origin}: parse error at `{path}`: {message}")]
    Parse {
        origin: String,
        path: String,
        message: String,
    },
    #[error("scenario {label:?} is invalid:\n{}", format_issues(.issues))]
    Invalid { label: String, issues: Vec<Issue> },
    #[error("scenario {label:?}: {source}")]
    Solver { label: String, source: DdeError },
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
    #[error("scenarios cannot be compared:\n{}", .reasons.iter().map(|r| format!("  - {r}")).collect::<Vec<_>>().join("\n"))]
    Incompatible { reasons: Vec<String> },
}

fn format_issues(issues: &[Issue]) -> String {
    issues.iter().map(|i| format!("  - {i}")).collect::<Vec<_>>().join("\n")
}

impl ScenarioError {
    /// Process exit code: 2 for configuration problems, 3 for solver
    /// divergence, 4 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Read { .. } | Self::Parse { .. } | Self::Invalid { .. } | Self::Incompatible { .. } => 2,
            Self::Solver { source, .. } if source.is_divergence() => 3,
            Self::Solver { .. } => 2,
            Self::Io { .. } => 4,
        }
    }
}

/// Simulated series; PDE runs report spatially integrated totals.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub label: String,
    pub kind: ModelKind,
    /// Column names after `t`, e.g. `S, I, R, D, N`.
    pub columns: Vec<&'static str>,
    pub times: Vec<f64>,
    /// Column-major values, `data[c][step]`.
    pub data: Vec<Vec<f64>>,
    pub snapshots: Vec<(f64, PdeState)>,
    /// Initial living population used for normalization and comparison.
    pub n0: f64,
    /// Effective base parameters after any normalization.
    pub params: ModelParams,
    pub expected_steps: usize,
    pub max_picard_iterations: usize,
    pub failure: Option<DdeError>,
}

impl SimResult {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| *c == name).map(|k| self.data[k].as_slice())
    }

    /// Sum of all compartments (living plus deceased), when meaningful.
    pub fn total_population(&self) -> Option<Vec<f64>> {
        let compartments: &[&str] = match self.kind {
            ModelKind::DelaySirdOde | ModelKind::DelaySirdPde1d => &["S", "I", "R", "D"],
            ModelKind::SeirdOde => &["S", "E", "I", "R", "D"],
            ModelKind::LinearizedDde => return None,
        };
        let cols: Vec<&[f64]> = compartments.iter().map(|c| self.series(c).unwrap()).collect();
        Some((0..self.times.len()).map(|k| cols.iter().map(|c| c[k]).sum()).collect())
    }

    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

fn columns_for(kind: ModelKind) -> Vec<&'static str> {
    match kind {
        ModelKind::DelaySirdOde | ModelKind::DelaySirdPde1d => vec!["S", "I", "R", "D", "N"],
        ModelKind::SeirdOde => vec!["S", "E", "I", "R", "D", "N"],
        ModelKind::LinearizedDde => vec!["N", "I", "R", "D"],
    }
}

/// Maps a raw state to the output columns.
fn state_row(kind: ModelKind, u: &[f64]) -> Vec<f64> {
    match kind {
        ModelKind::DelaySirdOde | ModelKind::DelaySirdPde1d => vec![u[0], u[1], u[2], u[3], u[0] + u[1] + u[2]],
        ModelKind::SeirdOde => vec![u[0], u[1], u[2], u[3], u[4], u[0] + u[1] + u[2] + u[3]],
        ModelKind::LinearizedDde => u.to_vec(),
    }
}

fn ode_initial(s: &Scenario) -> Vec<f64> {
    match (s.model.kind, &s.model.initial) {
        (ModelKind::LinearizedDde, InitialSpec::Compartments { s, i, r, d }) => vec![s + i + r, *i, *r, *d],
        (_, InitialSpec::Compartments { s, i, r, d }) => vec![*s, *i, *r, *d],
        (_, InitialSpec::Seird { s, e, i, r, d }) => vec![*s, *e, *i, *r, *d],
        _ => unreachable!("validated scenario"),
    }
}

fn ode_history(s: &Scenario, initial: &[f64]) -> History {
    match s.history {
        HistorySpec::Initial => History::Constant(initial.to_vec()),
        HistorySpec::Constant { s: hs, i, r, d } => {
            let past = if s.model.kind == ModelKind::LinearizedDde {
                vec![hs + i + r, i, r, d]
            } else {
                vec![hs, i, r, d]
            };
            let init = initial.to_vec();
            History::function(move |t, out| out.copy_from_slice(if t < 0.0 { &past } else { &init }))
        }
    }
}

fn pde_initial(s: &Scenario) -> PdeState {
    let nx = s.grid.nx.expect("validated scenario");
    match s.model.initial {
        InitialSpec::TwoCentres => pde1d::initial_conditions(nx),
        InitialSpec::Homogeneous { s, i, r, d } => pde1d::homogeneous_state(nx, s, i, r, d),
        _ => unreachable!("validated scenario"),
    }
}

fn effective_schedule(s: &Scenario, n0: f64) -> Result<ParamSchedule, ScenarioError> {
    let raw = s.raw_schedule()?;
    if !s.model.normalize_by_n0 {
        return Ok(raw);
    }
    raw.try_map(|p| normalize_ode_params(p, n0)).map_err(|e| ScenarioError::Invalid {
        label: s.label.clone(),
        issues: vec![Issue {
            path: "model.normalize_by_n0".into(),
            message: e.to_string(),
        }],
    })
}

/// Runs the scenario in memory. Solver failures do not make this fail: the
/// result then holds the steps accepted so far and `failure` is set.
pub fn simulate(s: &Scenario) -> Result<SimResult, ScenarioError> {
    let issues = s.validate();
    if !issues.is_empty() {
        return Err(ScenarioError::Invalid {
            label: s.label.clone(),
            issues,
        });
    }
    let grid = s.time_grid()?;
    let kind = s.model.kind;
    let columns = columns_for(kind);
    let mut result = SimResult {
        label: s.label.clone(),
        kind,
        columns: columns.clone(),
        times: Vec::with_capacity(grid.n_steps() + 1),
        data: vec![Vec::with_capacity(grid.n_steps() + 1); columns.len()],
        snapshots: Vec::new(),
        n0: 0.0,
        params: s.model.params,
        expected_steps: grid.n_steps() + 1,
        max_picard_iterations: 0,
        failure: None,
    };
    let opts = PicardOptions::default();

    if kind == ModelKind::DelaySirdPde1d {
        let initial = pde_initial(s);
        result.n0 = initial.totals(0.0).living();
        let schedule = effective_schedule(s, result.n0)?;
        result.params = *schedule.base();
        let mut system = DelayPde1d::new(schedule, s.grid.nx.expect("validated scenario"));
        system.infected_diffusion = s.model.infected_diffusion.unwrap_or_default();
        let run = pde1d::run_pde(&system, &initial, &grid, opts, &s.output.snapshots);
        for t in &run.totals {
            result.times.push(t.t);
            for (col, v) in result.data.iter_mut().zip([t.s, t.i, t.r, t.d, t.living()]) {
                col.push(v);
            }
        }
        result.snapshots = run.snapshots;
        result.max_picard_iterations = run.max_picard_iterations;
        result.failure = run.failure;
        return Ok(result);
    }

    let initial = ode_initial(s);
    result.n0 = match kind {
        ModelKind::LinearizedDde => initial[0],
        _ => initial[..initial.len() - 1].iter().sum(),
    };
    let schedule = effective_schedule(s, result.n0)?;
    result.params = *schedule.base();
    let history = ode_history(s, &initial);
    let mut observe = |info: crate::dde::StepInfo<'_>| {
        result.times.push(info.t);
        for (col, v) in result.data.iter_mut().zip(state_row(kind, info.state)) {
            col.push(v);
        }
        result.max_picard_iterations = result.max_picard_iterations.max(info.iterations);
    };
    let outcome = match kind {
        ModelKind::DelaySirdOde => integrate_with(&DelaySirdOde { schedule }, &history, &grid, opts, &mut observe),
        ModelKind::SeirdOde => integrate_with(&SeirdOde { schedule }, &history, &grid, opts, &mut observe),
        ModelKind::LinearizedDde => integrate_with(
            &LinearizedDde { params: *schedule.base() },
            &history,
            &grid,
            opts,
            &mut observe,
        ),
        ModelKind::DelaySirdPde1d => unreachable!(),
    };
    result.failure = outcome.err();
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub label: String,
    pub kind: ModelKind,
    pub failure: Option<String>,
    pub steps: usize,
    pub expected_steps: usize,
    pub t_last: f64,
    pub theorem: StabilityVerdict,
    pub rightmost: Option<StabilityVerdict>,
    pub contractivity: StabilityVerdict,
    pub peaks: Vec<(&'static str, Peak)>,
    pub finals: Vec<(&'static str, f64)>,
    /// First compartment to go negative, and when.
    pub first_negative: Option<(&'static str, f64)>,
    pub mass_drift: Option<f64>,
    pub max_picard_iterations: usize,
    /// Envelope of the per-step death increments.
    pub envelope: Envelope,
}

pub fn summarize(sim: &SimResult) -> Summary {
    let p = sim.params;
    let compartment_cols: Vec<&'static str> = sim.columns.iter().copied().filter(|c| *c != "N").collect();
    let peaks = sim
        .columns
        .iter()
        .filter_map(|c| analysis::peak(&sim.times, sim.series(c).unwrap()).map(|pk| (*c, pk)))
        .collect();
    let finals = sim
        .columns
        .iter()
        .filter_map(|c| sim.series(c).unwrap().last().map(|v| (*c, *v)))
        .collect();
    let first_negative = compartment_cols
        .iter()
        .filter_map(|c| analysis::first_negative(&sim.times, sim.series(c).unwrap()).map(|t| (*c, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let envelope = analysis::increment_envelope(&sim.times, sim.series("D").unwrap());
    Summary {
        label: sim.label.clone(),
        kind: sim.kind,
        failure: sim.failure.as_ref().map(|e| e.to_string()),
        steps: sim.times.len(),
        expected_steps: sim.expected_steps,
        t_last: sim.times.last().copied().unwrap_or(0.0),
        theorem: theorem31_check(&p),
        rightmost: if sim.kind.has_delay() {
            is_stable(decoupled_point(&p)).ok()
        } else {
            None
        },
        contractivity: contractivity_check(&p, (0.0, 1.0)),
        peaks,
        finals,
        first_negative,
        mass_drift: sim.total_population().map(|v| analysis::max_relative_drift(&v)),
        max_picard_iterations: sim.max_picard_iterations,
        envelope,
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(", ")
}

impl Summary {
    /// Line-oriented `key = value` report.
    pub fn render(&self) -> String {
        let mut out = Vec::new();
        out.push(format!("label = {}", self.label));
        out.push(format!("model = {}", self.kind.name()));
        out.push(match &self.failure {
            None => "status = completed".to_string(),
            Some(e) => format!("status = diverged: {e}"),
        });
        out.push(format!("steps = {} of {}", self.steps, self.expected_steps));
        out.push(format!("t_last = {}", self.t_last));
        if self.kind.has_delay() {
            out.push(format!("stability.delay_bound = {}", self.theorem));
        }
        if let Some(v) = &self.rightmost {
            out.push(format!("stability.rightmost_root = {v}"));
        }
        out.push(format!("stability.contractivity = {}", self.contractivity));
        for (c, pk) in &self.peaks {
            out.push(format!("peak.{c} = {} at t = {}", pk.value, pk.t));
        }
        for (c, v) in &self.finals {
            out.push(format!("final.{c} = {v}"));
        }
        out.push(match self.first_negative {
            Some((c, t)) => format!("first_negative = {c} at t = {t}"),
            None => "first_negative = none".to_string(),
        });
        if let Some(d) = self.mass_drift {
            out.push(format!("mass_drift = {d:e}"));
        }
        out.push(format!("picard_max_iterations = {}", self.max_picard_iterations));
        let env = &self.envelope;
        out.push(format!("envelope.oscillations = {}", env.oscillations));
        out.push(format!(
            "envelope.trend = {}",
            match env.trend {
                Trend::Decaying => "decaying",
                Trend::Growing => "growing",
                Trend::Mixed => "mixed",
                Trend::None => "none",
            }
        ));
        out.push(format!("envelope.swings = {}", join(&env.swings)));
        out.push(format!("envelope.ratios = {}", join(&env.ratios)));
        let mut s = out.join("\n");
        s.push('\n');
        s
    }
}

/// Paired ODE and integrated-PDE series, both divided by their run's `N(0)`.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub ode_label: String,
    pub pde_label: String,
    pub times: Vec<f64>,
    /// `S, I, R, D` for each run, normalized.
    pub ode: [Vec<f64>; 4],
    pub pde: [Vec<f64>; 4],
    /// `max_t |d_ode - d_pde| / max_t |d_pde|`.
    pub max_rel_d: f64,
    /// Relative difference of the infected peaks.
    pub peak_i_rel: f64,
    /// Largest pointwise relative difference over all compartments and steps.
    pub max_pointwise_rel: f64,
    pub ode_failure: Option<String>,
    pub pde_failure: Option<String>,
}

impl Comparison {
    pub fn summary_line(&self) -> String {
        format!(
            "compare {} vs {}: max relative d difference {:.3e}, relative peak-i difference {:.3e}, max pointwise relative difference {:.3e} over {} steps",
            self.ode_label,
            self.pde_label,
            self.max_rel_d,
            self.peak_i_rel,
            self.max_pointwise_rel,
            self.times.len()
        )
    }
}

/// Reasons why two scenarios do not describe the same experiment.
pub fn compatibility_issues(ode: &Scenario, pde: &Scenario) -> Vec<String> {
    let mut reasons = Vec::new();
    if ode.model.kind != ModelKind::DelaySirdOde {
        reasons.push(format!("{}: expected a delay_sird_ode scenario, got {}", ode.label, ode.model.kind.name()));
    }
    if pde.model.kind != ModelKind::DelaySirdPde1d {
        reasons.push(format!("{}: expected a delay_sird_pde1d scenario, got {}", pde.label, pde.model.kind.name()));
    }
    let (a, b) = (&ode.model.params, &pde.model.params);
    for (name, x, y) in [
        ("alpha", a.alpha, b.alpha),
        ("mu", a.mu, b.mu),
        ("beta_e", a.beta_e, b.beta_e),
        ("beta_i", a.beta_i, b.beta_i),
        ("phi_r", a.phi_r, b.phi_r),
        ("phi_d", a.phi_d, b.phi_d),
        ("sigma_delay", a.sigma_delay, b.sigma_delay),
    ] {
        if x != y {
            reasons.push(format!("model.params.{name} differs ({x} vs {y})"));
        }
    }
    if ode.grid.dt != pde.grid.dt {
        reasons.push(format!("grid.dt differs ({} vs {})", ode.grid.dt, pde.grid.dt));
    }
    if ode.grid.t_end != pde.grid.t_end {
        reasons.push(format!("grid.t_end differs ({} vs {})", ode.grid.t_end, pde.grid.t_end));
    }
    let times = |s: &Scenario| s.schedule.iter().map(|e| (e.t, e.beta_factor)).collect::<Vec<_>>();
    if times(ode) != times(pde) {
        reasons.push("schedule event times or contact factors differ".into());
    }
    reasons
}

/// Runs both scenarios and measures their agreement.
pub fn compare(ode: &Scenario, pde: &Scenario) -> Result<Comparison, ScenarioError> {
    let reasons = compatibility_issues(ode, pde);
    if !reasons.is_empty() {
        return Err(ScenarioError::Incompatible { reasons });
    }
    let (o, p) = std::thread::scope(|scope| {
        let h = scope.spawn(|| simulate(pde));
        let o = simulate(ode);
        (o, h.join().expect("PDE run panicked"))
    });
    Ok(compare_results(&o?, &p?))
}

pub fn compare_results(o: &SimResult, p: &SimResult) -> Comparison {
    let n = o.times.len().min(p.times.len());
    let norm = |sim: &SimResult, c: &str| -> Vec<f64> {
        sim.series(c).unwrap()[..n].iter().map(|v| v / sim.n0).collect()
    };
    let ode = ["S", "I", "R", "D"].map(|c| norm(o, c));
    let pde = ["S", "I", "R", "D"].map(|c| norm(p, c));
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff_sup = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let max_rel_d = {
        let s = sup(&pde[3]);
        if s > 0.0 {
            diff_sup(&ode[3], &pde[3]) / s
        } else {
            diff_sup(&ode[3], &pde[3])
        }
    };
    let peak_o = ode[1].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let peak_p = pde[1].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let peak_i_rel = (peak_o - peak_p).abs() / peak_p.abs().max(f64::MIN_POSITIVE);
    let mut max_pointwise_rel = 0.0f64;
    for (a, b) in ode.iter().zip(&pde) {
        for (x, y) in a.iter().zip(b) {
            let scale = x.abs().max(y.abs());
            if scale > 0.0 {
                max_pointwise_rel = max_pointwise_rel.max((x - y).abs() / scale);
            }
        }
    }
    Comparison {
        ode_label: o.label.clone(),
        pde_label: p.label.clone(),
        times: o.times[..n].to_vec(),
        ode,
        pde,
        max_rel_d,
        peak_i_rel,
        max_pointwise_rel,
        ode_failure: o.failure.as_ref().map(|e| e.to_string()),
        pde_failure: p.failure.as_ref().map(|e| e.to_string()),
    }
}
