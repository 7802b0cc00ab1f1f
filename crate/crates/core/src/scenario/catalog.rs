//! The shipped experiment set.
//!
//! ODE runs: population 1000 with one initial infected, infected history 1,
//! 267 days, contact rates normalized by the initial population, lockdown at
//! day 30 dividing contact rates by 4. PDE runs: two population centres on
//! 2000 cells, contact rates as tabulated, lockdown at day 140 halving
//! diffusion and dividing contact rates by 4.

use std::path::{Path, PathBuf};

use crate::domain::ModelParams;
use crate::pde1d::InfectedDiffusion;

use super::config::{GridSpec, HistorySpec, InitialSpec, ModelKind, ModelSpec, OutputSpec, Scenario, ScheduleEvent};
use super::ScenarioError;

pub const SIGMAS: [f64; 4] = [5.0, 10.0, 15.0, 20.0];

/// Removal-rate pairs `(phi_r, phi_d)` explored alongside the baseline.
pub const PHI_FAMILIES: [(&str, f64, f64); 4] = [
    ("table1", 1.0 / 32.0, 3.0 / 640.0),
    ("phi_moderate", 3.0 / 56.0, 3.0 / 320.0),
    ("phi_unstable", 3.0 / 32.0, 1.0 / 80.0),
    ("phi_periodic", 28.0 / 320.0, 1.0 / 80.0),
];

pub const ODE_T_END: f64 = 267.0;
pub const DT: f64 = 0.25;
pub const PDE_CELLS: usize = 2000;
pub const ODE_LOCKDOWN_T: f64 = 30.0;
pub const PDE_LOCKDOWN_T: f64 = 140.0;

fn ode(label: String, description: String, params: ModelParams) -> Scenario {
    Scenario {
        label,
        description,
        model: ModelSpec {
            kind: ModelKind::DelaySirdOde,
            params,
            initial: InitialSpec::Compartments {
                s: 999.0,
                i: 1.0,
                r: 0.0,
                d: 0.0,
            },
            normalize_by_n0: true,
            infected_diffusion: None,
        },
        grid: GridSpec {
            t_end: ODE_T_END,
            dt: DT,
            nx: None,
        },
        schedule: Vec::new(),
        history: HistorySpec::Initial,
        output: OutputSpec::default(),
    }
}

fn pde(label: String, description: String, params: ModelParams) -> Scenario {
    Scenario {
        label,
        description,
        model: ModelSpec {
            kind: ModelKind::DelaySirdPde1d,
            params,
            initial: InitialSpec::TwoCentres,
            normalize_by_n0: false,
            infected_diffusion: Some(InfectedDiffusion::NuE),
        },
        grid: GridSpec {
            t_end: ODE_T_END,
            dt: DT,
            nx: Some(PDE_CELLS),
        },
        schedule: Vec::new(),
        history: HistorySpec::Initial,
        output: OutputSpec {
            snapshots: vec![0.0, 70.0, 140.0, 210.0, 267.0],
            plot_script: true,
        },
    }
}

fn sigma_tag(sigma: f64) -> String {
    format!("sigma{}", sigma as u32)
}

fn ode_lockdown() -> Vec<ScheduleEvent> {
    vec![ScheduleEvent {
        t: ODE_LOCKDOWN_T,
        beta_factor: 0.25,
        nu_factor: 1.0,
    }]
}

fn pde_lockdown() -> Vec<ScheduleEvent> {
    vec![ScheduleEvent {
        t: PDE_LOCKDOWN_T,
        beta_factor: 0.25,
        nu_factor: 0.5,
    }]
}

/// Every shipped scenario, in a stable order.
pub fn catalog() -> Vec<Scenario> {
    let mut out = Vec::new();
    for (family, phi_r, phi_d) in PHI_FAMILIES {
        for sigma in SIGMAS {
            let params = ModelParams::table1(sigma).with_removal(phi_r, phi_d);
            let desc = format!("delay SIRD ODE, phi_r = {phi_r}, phi_d = {phi_d}, sigma = {sigma} days");
            out.push(ode(format!("ode_{family}_{}", sigma_tag(sigma)), desc.clone(), params));
            if family == "table1" {
                let mut s = ode(
                    format!("ode_{family}_{}_lockdown", sigma_tag(sigma)),
                    format!("{desc}, contact rates divided by 4 from day {ODE_LOCKDOWN_T}"),
                    params,
                );
                s.schedule = ode_lockdown();
                out.push(s);
            }
        }
    }

    for (family, phi_r, phi_d) in PHI_FAMILIES {
        if family == "phi_periodic" {
            continue;
        }
        for sigma in SIGMAS {
            let params = ModelParams::table1(sigma).with_removal(phi_r, phi_d);
            let desc = format!("1D delay SIRD PDE, phi_r = {phi_r}, phi_d = {phi_d}, sigma = {sigma} days");
            out.push(pde(format!("pde_{family}_{}", sigma_tag(sigma)), desc.clone(), params));
            if family == "table1" {
                let mut s = pde(
                    format!("pde_{family}_{}_lockdown", sigma_tag(sigma)),
                    format!("{desc}, diffusion halved and contact rates divided by 4 from day {PDE_LOCKDOWN_T}"),
                    params,
                );
                s.schedule = pde_lockdown();
                out.push(s);
            }
        }
    }

    let mut s = pde(
        "pde_lockdown".into(),
        format!("1D delay SIRD PDE with baseline parameters, sigma = 20 days, lockdown at day {PDE_LOCKDOWN_T}"),
        ModelParams::table1(20.0),
    );
    s.schedule = pde_lockdown();
    s.output.snapshots = vec![0.0, 35.0, 70.0, 105.0, 140.0, 175.0, 210.0, 267.0];
    out.push(s);

    // Spatially constant data with contact rates normalized by the integrated
    // population reduces exactly to ode_table1_sigma20.
    let mut s = pde(
        "pde_homogeneous".into(),
        "1D delay SIRD PDE with spatially constant data, comparable with ode_table1_sigma20".into(),
        ModelParams::table1(20.0),
    );
    s.model.initial = InitialSpec::Homogeneous {
        s: 999.0,
        i: 1.0,
        r: 0.0,
        d: 0.0,
    };
    s.model.normalize_by_n0 = true;
    s.grid.nx = Some(200);
    s.output = OutputSpec::default();
    out.push(s);

    let mut s = pde(
        "pde_allee".into(),
        "1D delay SIRD PDE with an Allee threshold A = 0.05, sigma = 10 days".into(),
        ModelParams {
            allee_a: 0.05,
            ..ModelParams::table1(10.0)
        },
    );
    s.output.snapshots = vec![0.0, 70.0, 140.0, 267.0];
    out.push(s);

    let mut s = ode(
        "seird_table1".into(),
        "non-delay SEIRD ODE with baseline contact and removal rates, incubation rate 0.2 per day".into(),
        ModelParams {
            sigma_rate: 0.2,
            ..ModelParams::table1(5.0)
        },
    );
    s.model.kind = ModelKind::SeirdOde;
    s.model.initial = InitialSpec::Seird {
        s: 999.0,
        e: 0.0,
        i: 1.0,
        r: 0.0,
        d: 0.0,
    };
    out.push(s);

    let mut s = ode(
        "linearized_sigma15".into(),
        "linearized delay system, phi_r = 3/32, phi_d = 1/80, sigma = 15 days".into(),
        ModelParams::table1(15.0).with_removal(3.0 / 32.0, 1.0 / 80.0),
    );
    s.model.kind = ModelKind::LinearizedDde;
    s.model.normalize_by_n0 = false;
    out.push(s);

    out
}

pub fn find(label: &str) -> Option<Scenario> {
    catalog().into_iter().find(|s| s.label == label)
}

/// Writes `<label>.cfg` for every shipped scenario into `dir`.
pub fn write_catalog(dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    catalog()
        .iter()
        .map(|s| {
            let path = dir.join(format!("{}.cfg", s.label));
            std::fs::write(&path, s.to_json()).map_err(|e| ScenarioError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            Ok(path)
        })
        .collect()
}
