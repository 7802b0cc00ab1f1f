//! 1D delay reaction-diffusion SIRD model on the unit interval with
//! population-weighted diffusion, an optional Allee threshold and no-flux
//! boundaries.
//!
//! Nodes `x_j = j dx`, `j = 0..=N`. The diffusion operator is in flux form on
//! a vertex-centred grid: end nodes own half cells, which makes the
//! trapezoidal integral of the operator vanish exactly.

use serde::{Deserialize, Serialize};

use crate::dde::{integrate_with, DdeError, DelaySystem, History, PicardOptions};
use crate::domain::{ModelParams, ParamSchedule, TimeGrid};

/// Population floor used in the Allee factor `1 - A / max(n, floor)`.
pub const ALLEE_N_FLOOR: f64 = 1e-12;

/// Compartment density sampled at the `N + 1` nodes of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub values: Vec<f64>,
    pub dx: f64,
}

impl Field1D {
    pub fn zeros(n_cells: usize) -> Self {
        Self::from_fn(n_cells, |_| 0.0)
    }

    pub fn from_fn(n_cells: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(n_cells > 0, "need at least one cell");
        let dx = 1.0 / n_cells as f64;
        Self {
            values: (0..=n_cells).map(|j| f(j as f64 * dx)).collect(),
            dx,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }
}

/// Trapezoidal rule over `[0, 1]`.
pub fn integrate_field(u: &Field1D) -> f64 {
    trapezoid(&u.values, u.dx)
}

fn trapezoid(v: &[f64], dx: f64) -> f64 {
    let n = v.len() - 1;
    let inner: f64 = v[1..n].iter().sum();
    dx * (inner + 0.5 * (v[0] + v[n]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeState {
    pub s: Field1D,
    pub i: Field1D,
    pub r: Field1D,
    pub d: Field1D,
}

impl PdeState {
    pub fn n_cells(&self) -> usize {
        self.s.n_cells()
    }

    /// Living population density `s + i + r`.
    pub fn living(&self) -> Field1D {
        let values = (0..self.s.values.len())
            .map(|j| self.s.values[j] + self.i.values[j] + self.r.values[j])
            .collect();
        Field1D { values, dx: self.s.dx }
    }

    /// Concatenation `[s | i | r | d]`.
    pub fn to_flat(&self) -> Vec<f64> {
        [&self.s, &self.i, &self.r, &self.d]
            .iter()
            .flat_map(|f| f.values.iter().copied())
            .collect()
    }

    pub fn from_flat(flat: &[f64], n_cells: usize) -> Self {
        let m = n_cells + 1;
        assert_eq!(flat.len(), 4 * m);
        let dx = 1.0 / n_cells as f64;
        let field = |k: usize| Field1D {
            values: flat[k * m..(k + 1) * m].to_vec(),
            dx,
        };
        Self {
            s: field(0),
            i: field(1),
            r: field(2),
            d: field(3),
        }
    }

    pub fn totals(&self, t: f64) -> Totals {
        Totals {
            t,
            s: integrate_field(&self.s),
            i: integrate_field(&self.i),
            r: integrate_field(&self.r),
            d: integrate_field(&self.d),
        }
    }
}

/// Spatially integrated compartments at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Totals {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub r: f64,
    pub d: f64,
}

impl Totals {
    pub fn living(&self) -> f64 {
        self.s + self.i + self.r
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.r + self.d
    }
}

fn bump(x: f64, c: f64, power: i32, width: f64) -> f64 {
    (-(x - c).powi(power) / width).exp()
}

/// Susceptible density of the two-centre initial condition.
pub fn initial_susceptible(x: f64) -> f64 {
    (-(x + 1.0).powi(4)).exp()
        + bump(x, 0.35, 2, 1e-2)
        + 0.125 * (bump(x, 0.62, 4, 1e-5) + bump(x, 0.52, 4, 1e-5) + bump(x, 0.42, 4, 1e-5))
        + 0.25 * bump(x, 0.735, 4, 1e-5)
}

/// Infected density of the two-centre initial condition.
pub fn initial_infected(x: f64) -> f64 {
    bump(x, 0.75, 4, 1e-5) / 20.0 + bump(x, 0.55, 4, 1e-5) / 200.0
}

/// Two population centres with a seeded outbreak; no recovered or deceased.
pub fn initial_conditions(n_cells: usize) -> PdeState {
    PdeState {
        s: Field1D::from_fn(n_cells, initial_susceptible),
        i: Field1D::from_fn(n_cells, initial_infected),
        r: Field1D::zeros(n_cells),
        d: Field1D::zeros(n_cells),
    }
}

/// Spatially constant state.
pub fn homogeneous_state(n_cells: usize, s: f64, i: f64, r: f64, d: f64) -> PdeState {
    PdeState {
        s: Field1D::from_fn(n_cells, |_| s),
        i: Field1D::from_fn(n_cells, |_| i),
        r: Field1D::from_fn(n_cells, |_| r),
        d: Field1D::from_fn(n_cells, |_| d),
    }
}

/// Face conductances `nu * max(n_face, 0) / dx^2`, with `n_face` the mean of
/// the two adjacent nodes.
fn face_weights(n: &[f64], nu: f64, dx: f64, out: &mut Vec<f64>) {
    out.clear();
    let scale = nu / (dx * dx);
    out.extend(n.windows(2).map(|w| scale * (0.5 * (w[0] + w[1])).max(0.0)));
}

fn apply_diffusion(u: &[f64], w: &[f64], out: &mut [f64]) {
    let last = u.len() - 1;
    out[0] = 2.0 * w[0] * (u[1] - u[0]);
    for j in 1..last {
        out[j] = w[j] * (u[j + 1] - u[j]) - w[j - 1] * (u[j] - u[j - 1]);
    }
    out[last] = -2.0 * w[last - 1] * (u[last] - u[last - 1]);
}

/// `div(nu n grad u)` with zero flux through both ends.
///
/// A negative face population is treated as zero; it would otherwise make
/// the operator anti-diffusive.
pub fn diffusion_operator(u: &Field1D, n: &Field1D, nu: f64) -> Field1D {
    assert_eq!(u.values.len(), n.values.len(), "grid size mismatch");
    let mut w = Vec::new();
    face_weights(&n.values, nu, u.dx, &mut w);
    let mut out = vec![0.0; u.values.len()];
    apply_diffusion(&u.values, &w, &mut out);
    Field1D { values: out, dx: u.dx }
}

/// Solves `(I - gamma D) x = rhs` where `D` is the diffusion operator with
/// face weights `w`. The matrix is an M-matrix, so the Thomas sweep needs no
/// pivoting.
fn solve_implicit_diffusion(w: &[f64], gamma: f64, rhs: &[f64], x: &mut [f64], scratch: &mut Vec<f64>) {
    let m = rhs.len();
    let last = m - 1;
    // Row j: lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1].
    let lower = |j: usize| if j == last { -2.0 * gamma * w[j - 1] } else { -gamma * w[j - 1] };
    let upper = |j: usize| if j == 0 { -2.0 * gamma * w[0] } else { -gamma * w[j] };
    let diag = |j: usize| {
        if j == 0 {
            1.0 + 2.0 * gamma * w[0]
        } else if j == last {
            1.0 + 2.0 * gamma * w[last - 1]
        } else {
            1.0 + gamma * (w[j - 1] + w[j])
        }
    };
    scratch.clear();
    scratch.resize(m, 0.0);
    let c = scratch;
    let mut denom = diag(0);
    c[0] = upper(0) / denom;
    x[0] = rhs[0] / denom;
    for j in 1..m {
        let a = lower(j);
        denom = diag(j) - a * c[j - 1];
        if j < last {
            c[j] = upper(j) / denom;
        }
        x[j] = (rhs[j] - a * x[j - 1]) / denom;
    }
    for j in (0..last).rev() {
        x[j] -= c[j] * x[j + 1];
    }
}

/// Which coefficient drives diffusion of the infected compartment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfectedDiffusion {
    #[default]
    NuI,
    NuE,
}

impl InfectedDiffusion {
    pub fn coefficient(self, p: &ModelParams) -> f64 {
        match self {
            Self::NuI => p.nu_i,
            Self::NuE => p.nu_e,
        }
    }
}

fn allee_factor(a: f64, n: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        1.0 - a / n.max(ALLEE_N_FLOOR)
    }
}

/// Pointwise reaction terms, written into the four output blocks.
fn reaction(p: &ModelParams, u: &[f64], lag: &[f64], m: usize, out: &mut [f64]) {
    let (s, rest) = u.split_at(m);
    let (i, rest) = rest.split_at(m);
    let r = &rest[..m];
    let i_lag = &lag[m..2 * m];
    let (ds, rest) = out.split_at_mut(m);
    let (di, rest) = rest.split_at_mut(m);
    let (dr, dd) = rest.split_at_mut(m);
    let removal = p.removal_rate();
    for j in 0..m {
        let n = s[j] + i[j] + r[j];
        let contact = allee_factor(p.allee_a, n) * (p.beta_e * s[j] * i[j] + p.beta_i * s[j] * i_lag[j]);
        ds[j] = p.alpha * n - contact - p.mu * s[j];
        di[j] = contact - removal * i_lag[j] - p.mu * i[j];
        dr[j] = p.phi_r * i_lag[j] - p.mu * r[j];
        dd[j] = p.phi_d * i_lag[j];
    }
}

/// Semi-discrete 1D delay SIRD system on `N + 1` nodes, state `[s | i | r | d]`.
#[derive(Debug, Clone)]
pub struct DelayPde1d {
    pub schedule: ParamSchedule,
    pub n_cells: usize,
    pub infected_diffusion: InfectedDiffusion,
}

impl DelayPde1d {
    pub fn new(schedule: ParamSchedule, n_cells: usize) -> Self {
        Self {
            schedule,
            n_cells,
            infected_diffusion: InfectedDiffusion::default(),
        }
    }

    fn dx(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    fn coefficients(&self, p: &ModelParams) -> [f64; 3] {
        [p.nu_s, self.infected_diffusion.coefficient(p), p.nu_r]
    }
}

/// Full right-hand side: reaction plus diffusion of `s`, `i` and `r`.
pub fn pde_rhs(t: f64, u: &PdeState, lag: &PdeState, p: &ModelParams) -> PdeState {
    pde_rhs_with(t, u, lag, p, InfectedDiffusion::NuI)
}

pub fn pde_rhs_with(
    _t: f64,
    u: &PdeState,
    lag: &PdeState,
    p: &ModelParams,
    infected: InfectedDiffusion,
) -> PdeState {
    let n_cells = u.n_cells();
    let sys = DelayPde1d {
        schedule: ParamSchedule::constant(*p),
        n_cells,
        infected_diffusion: infected,
    };
    let mut out = vec![0.0; 4 * (n_cells + 1)];
    sys.rhs(0.0, &u.to_flat(), &lag.to_flat(), &mut out);
    PdeState::from_flat(&out, n_cells)
}

impl DelaySystem for DelayPde1d {
    fn dim(&self) -> usize {
        4 * (self.n_cells + 1)
    }

    fn delay(&self) -> Option<f64> {
        Some(self.schedule.base().sigma_delay)
    }

    fn rhs(&self, t: f64, u: &[f64], lag: &[f64], out: &mut [f64]) {
        let p = self.schedule.at(t);
        let m = self.n_cells + 1;
        reaction(p, u, lag, m, out);
        let n: Vec<f64> = (0..m).map(|j| u[j] + u[m + j] + u[2 * m + j]).collect();
        let mut w = Vec::with_capacity(m);
        let mut diff = vec![0.0; m];
        for (k, nu) in self.coefficients(p).into_iter().enumerate() {
            face_weights(&n, nu, self.dx(), &mut w);
            apply_diffusion(&u[k * m..(k + 1) * m], &w, &mut diff);
            for (o, dv) in out[k * m..(k + 1) * m].iter_mut().zip(&diff) {
                *o += dv;
            }
        }
    }

    /// Diffusion is taken implicitly with the population weight frozen at the
    /// current iterate; the reaction terms are substituted explicitly.
    fn picard_sweep(
        &self,
        t: f64,
        gamma: f64,
        base: &[f64],
        lag: &[f64],
        iterate: &[f64],
        next: &mut [f64],
    ) {
        let p = self.schedule.at(t);
        let m = self.n_cells + 1;
        let mut react = vec![0.0; 4 * m];
        reaction(p, iterate, lag, m, &mut react);
        let n: Vec<f64> = (0..m)
            .map(|j| iterate[j] + iterate[m + j] + iterate[2 * m + j])
            .collect();
        let mut w = Vec::with_capacity(m);
        let mut rhs = vec![0.0; m];
        let mut scratch = Vec::with_capacity(m);
        for (k, nu) in self.coefficients(p).into_iter().enumerate() {
            let block = k * m..(k + 1) * m;
            for ((r, b), f) in rhs.iter_mut().zip(&base[block.clone()]).zip(&react[block.clone()]) {
                *r = b + gamma * f;
            }
            face_weights(&n, nu, self.dx(), &mut w);
            solve_implicit_diffusion(&w, gamma, &rhs, &mut next[block], &mut scratch);
        }
        for j in 3 * m..4 * m {
            next[j] = base[j] + gamma * react[j];
        }
    }
}

/// Output of a PDE run. When the solver fails, `failure` is set and the
/// series stop at the last accepted step.
#[derive(Debug, Clone)]
pub struct PdeRun {
    pub totals: Vec<Totals>,
    pub snapshots: Vec<(f64, PdeState)>,
    pub max_picard_iterations: usize,
    pub failure: Option<DdeError>,
}

/// Integrates from `initial` (also used as the constant history) and records
/// integrated totals every step plus full snapshots at grid times in
/// `snapshot_times`.
pub fn run_pde(
    system: &DelayPde1d,
    initial: &PdeState,
    grid: &TimeGrid,
    opts: PicardOptions,
    snapshot_times: &[f64],
) -> PdeRun {
    let history = History::Constant(initial.to_flat());
    let mut run = PdeRun {
        totals: Vec::with_capacity(grid.n_steps() + 1),
        snapshots: Vec::new(),
        max_picard_iterations: 0,
        failure: None,
    };
    let n_cells = system.n_cells;
    let dx = 1.0 / n_cells as f64;
    let m = n_cells + 1;
    let res = integrate_with(system, &history, grid, opts, |info| {
        let block = |k: usize| &info.state[k * m..(k + 1) * m];
        run.totals.push(Totals {
            t: info.t,
            s: trapezoid(block(0), dx),
            i: trapezoid(block(1), dx),
            r: trapezoid(block(2), dx),
            d: trapezoid(block(3), dx),
        });
        run.max_picard_iterations = run.max_picard_iterations.max(info.iterations);
        let tol = 1e-9 * grid.dt();
        if snapshot_times.iter().any(|&ts| (ts - info.t).abs() <= tol) {
            run.snapshots.push((info.t, PdeState::from_flat(info.state, n_cells)));
        }
    });
    run.failure = res.err();
    run
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Sird;
    use crate::models::delay_sird_rhs;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn infected_initial_values() {
        let expected = 1.0 / 20.0 + (1.0 / 200.0) * (-(0.2f64).powi(4) / 1e-5).exp();
        assert!((initial_infected(0.75) - expected).abs() < 1e-17);
        assert!((initial_infected(0.75) - 0.05).abs() < 1e-15);
        assert!(initial_infected(0.0) < 1e-15);
    }

    #[test]
    fn susceptible_at_main_centre() {
        // Termwise at x = 0.35: background e^{-1.35^4} = 0.036098, main bump 1,
        // quartic bump at 0.42 gives e^{-2.401}/8 = 0.011328, the rest < 1e-37.
        let oracle = 0.036_098_417_542 + 1.0 + 0.011_328_410_085;
        let v = initial_susceptible(0.35);
        assert!(v >= 1.0);
        assert!((v - oracle).abs() < 1e-11, "{v} vs {oracle}");
    }

    #[test]
    fn initial_state_layout() {
        let st = initial_conditions(100);
        assert_eq!(st.s.values.len(), 101);
        assert!(st.r.values.iter().all(|&v| v == 0.0));
        assert_eq!(PdeState::from_flat(&st.to_flat(), 100), st);
    }

    #[test]
    fn integrate_simple_fields() {
        assert!((integrate_field(&Field1D::from_fn(10, |_| 3.5)) - 3.5).abs() < 1e-15);
        assert!((integrate_field(&Field1D::from_fn(7, |x| x)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn integrated_susceptible_converges() {
        let a = integrate_field(&initial_conditions(2000).s);
        let b = integrate_field(&initial_conditions(4000).s);
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn diffusion_of_constant_is_zero() {
        let u = Field1D::from_fn(50, |_| 2.0);
        let n = Field1D::from_fn(50, |x| 1.0 + x);
        assert!(diffusion_operator(&u, &n, 0.3).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn diffusion_matches_laplacian() {
        let nu = 0.01;
        let err = |cells: usize| {
            let u = Field1D::from_fn(cells, |x| (2.0 * PI * x).sin());
            let n = Field1D::from_fn(cells, |_| 1.0);
            let d = diffusion_operator(&u, &n, nu);
            (1..cells)
                .map(|j| {
                    let x = u.x(j);
                    (d.values[j] + 4.0 * PI * PI * nu * (2.0 * PI * x).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(100), err(200));
        assert!(e1 < 1e-3);
        assert!((e1 / e2 - 4.0).abs() < 0.05, "ratio {}", e1 / e2);
    }

    #[test]
    fn diffusion_is_conservative() {
        let u = initial_conditions(400).s;
        let n = initial_conditions(400).living();
        let d = diffusion_operator(&u, &n, 3.75e-5);
        let scale = d.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(integrate_field(&d).abs() < 1e-13 * scale);
    }

    #[test]
    fn negative_population_face_does_not_diffuse() {
        let u = Field1D::from_fn(4, |x| x);
        let n = Field1D::from_fn(4, |_| -1.0);
        assert!(diffusion_operator(&u, &n, 1.0).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn implicit_solve_inverts_operator() {
        let cells = 64;
        let n = initial_conditions(cells).living();
        let mut w = Vec::new();
        face_weights(&n.values, 0.5, 1.0 / cells as f64, &mut w);
        let x_true: Vec<f64> = (0..=cells).map(|j| (j as f64 * 0.37).cos()).collect();
        let mut dx_true = vec![0.0; cells + 1];
        apply_diffusion(&x_true, &w, &mut dx_true);
        let gamma = 0.3;
        let rhs: Vec<f64> = x_true.iter().zip(&dx_true).map(|(x, d)| x - gamma * d).collect();
        let mut x = vec![0.0; cells + 1];
        solve_implicit_diffusion(&w, gamma, &rhs, &mut x, &mut Vec::new());
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_rhs_matches_ode() {
        let p = ModelParams::table1(10.0);
        let u = homogeneous_state(20, 3.0, 0.2, 0.1, 0.05);
        let lag = homogeneous_state(20, 2.0, 0.4, 0.0, 0.0);
        let du = pde_rhs(0.0, &u, &lag, &p);
        let ode = delay_sird_rhs(0.0, &Sird::new(3.0, 0.2, 0.1, 0.05), &Sird::new(2.0, 0.4, 0.0, 0.0), &p);
        for j in 0..=20 {
            assert_eq!(du.s.values[j], ode.s);
            assert_eq!(du.i.values[j], ode.i);
            assert_eq!(du.r.values[j], ode.r);
            assert_eq!(du.d.values[j], ode.d);
        }
    }

    #[test]
    fn pure_decay_pointwise() {
        let mut p = ModelParams::table1(10.0);
        p.beta_e = 0.0;
        p.beta_i = 0.0;
        p.nu_s = 0.0;
        p.nu_i = 0.0;
        p.nu_r = 0.0;
        let u = initial_conditions(50);
        let lag = PdeState { i: Field1D::from_fn(50, |x| x * x), ..u.clone() };
        let du = pde_rhs(0.0, &u, &lag, &p);
        for j in 0..=50 {
            let expected = -p.removal_rate() * lag.i.values[j];
            assert!((du.i.values[j] - expected).abs() < 1e-18);
        }
    }

    #[test]
    fn allee_halves_contact() {
        let base = ModelParams { phi_r: 0.0, phi_d: 0.0, ..ModelParams::table1(10.0) };
        let with_a = ModelParams { allee_a: 1000.0, ..base };
        let u = homogeneous_state(4, 1500.0, 400.0, 100.0, 0.0);
        let d0 = pde_rhs(0.0, &u, &u, &base);
        let d1 = pde_rhs(0.0, &u, &u, &with_a);
        assert!((d1.i.values[2] - 0.5 * d0.i.values[2]).abs() < 1e-9 * d0.i.values[2].abs());
    }

    #[test]
    fn allee_with_empty_node_is_finite() {
        let p = ModelParams { allee_a: 5.0, ..ModelParams::table1(10.0) };
        let u = homogeneous_state(4, 0.0, 0.0, 0.0, 0.0);
        let du = pde_rhs(0.0, &u, &u, &p);
        assert!(du.to_flat().iter().all(|v| *v == 0.0));
    }

    fn conservation_drift(allee_a: f64) -> f64 {
        let p = ModelParams { allee_a, ..ModelParams::table1(5.0) };
        let sys = DelayPde1d::new(ParamSchedule::constant(p), 200);
        let grid = TimeGrid::new(0.0, 60.0, 0.25).unwrap();
        let run = run_pde(&sys, &initial_conditions(200), &grid, PicardOptions::default(), &[]);
        assert!(run.failure.is_none(), "{:?}", run.failure);
        let n0 = run.totals[0].total();
        run.totals.iter().map(|t| (t.total() - n0).abs() / n0).fold(0.0, f64::max)
    }

    #[test]
    fn short_run_conserves_mass() {
        assert!(conservation_drift(0.0) < 1e-10);
        assert!(conservation_drift(0.05) < 1e-10);
    }

    #[test]
    fn snapshots_recorded_at_requested_times() {
        let sys = DelayPde1d::new(ParamSchedule::constant(ModelParams::table1(5.0)), 40);
        let grid = TimeGrid::new(0.0, 10.0, 0.25).unwrap();
        let run = run_pde(&sys, &initial_conditions(40), &grid, PicardOptions::default(), &[0.0, 5.0, 10.0]);
        let times: Vec<f64> = run.snapshots.iter().map(|s| s.0).collect();
        assert_eq!(times, vec![0.0, 5.0, 10.0]);
        assert_eq!(run.totals.len(), 41);
    }

    proptest! {
        #[test]
        fn diffusion_sums_to_zero(
            vals in proptest::collection::vec(0.0f64..10.0, 5..60),
            pops in proptest::collection::vec(-1.0f64..10.0, 60),
            nu in 1e-6f64..1.0,
        ) {
            let cells = vals.len() - 1;
            let u = Field1D { values: vals.clone(), dx: 1.0 / cells as f64 };
            let n = Field1D { values: pops[..vals.len()].to_vec(), dx: u.dx };
            let d = diffusion_operator(&u, &n, nu);
            let scale = d.values.iter().map(|v| v.abs()).fold(1.0, f64::max);
            prop_assert!(integrate_field(&d).abs() < 1e-12 * scale * u.dx);
        }

        #[test]
        fn reaction_terms_cancel(
            s in 0.0f64..3.0, i in 0.0f64..1.0, r in 0.0f64..1.0, il in 0.0f64..1.0, a in 0.0f64..5.0,
        ) {
            let p = ModelParams { allee_a: a, ..ModelParams::table1(10.0) };
            let u = homogeneous_state(3, s, i, r, 0.0);
            let lag = homogeneous_state(3, 0.0, il, 0.0, 0.0);
            let du = pde_rhs(0.0, &u, &lag, &p);
            let sum = du.s.values[1] + du.i.values[1] + du.r.values[1] + du.d.values[1];
            let scale = 1.0 + (1.0 + a / (s + i + r).max(ALLEE_N_FLOOR)) * s * (i + il);
            prop_assert!(sum.abs() < 1e-14 * scale);
        }
    }
}
