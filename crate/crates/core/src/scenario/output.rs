//! Writing run artifacts: `<label>/totals.csv`, `<label>/summary.txt`,
//! `<label>/snapshots/t_<time>.csv` and an optional `<label>/plot.py`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{simulate, summarize, Comparison, Scenario, ScenarioError, SimResult, Summary};

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub totals: PathBuf,
    pub summary_path: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub plot_script: Option<PathBuf>,
    pub summary: Summary,
}

fn io_err(path: &Path, e: std::io::Error) -> ScenarioError {
    ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), ScenarioError> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn create_dir(path: &Path) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

/// Totals table with `t` followed by the result's columns. Numbers use the
/// shortest representation that round-trips.
pub fn totals_csv(sim: &SimResult) -> String {
    let mut out = String::with_capacity(64 * (sim.times.len() + 1));
    out.push('t');
    for c in &sim.columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (k, t) in sim.times.iter().enumerate() {
        write!(out, "{t}").unwrap();
        for col in &sim.data {
            write!(out, ",{}", col[k]).unwrap();
        }
        out.push('\n');
    }
    out
}

fn snapshot_name(t: f64) -> String {
    format!("t_{t}.csv")
}

fn plot_script(sim: &SimResult) -> String {
    let cols = sim.columns.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(", ");
    format!(
        r#"# Plots the compartment totals of run {label:?}. Needs matplotlib.
import csv
import pathlib

import matplotlib.pyplot as plt

here = pathlib.Path(__file__).parent
with open(here / "totals.csv") as f:
    rows = list(csv.DictReader(f))
t = [float(r["t"]) for r in rows]
fig, axes = plt.subplots(1, {n}, figsize=(4 * {n}, 3.2))
for ax, name in zip(axes, [{cols}]):
    ax.plot(t, [float(r[name]) for r in rows])
    ax.set_title(name)
    ax.set_xlabel("t [days]")
fig.suptitle({label:?})
fig.tight_layout()
fig.savefig(here / "totals.png", dpi=120)

snaps = sorted((here / "snapshots").glob("t_*.csv"))
if snaps:
    fig, axes = plt.subplots(1, 4, figsize=(16, 3.2))
    for path in snaps:
        with open(path) as f:
            rows = list(csv.DictReader(f))
        x = [float(r["x"]) for r in rows]
        for ax, name in zip(axes, "sird"):
            ax.plot(x, [float(r[name]) for r in rows], label=path.stem[2:])
            ax.set_title(name)
    axes[0].legend(title="t")
    fig.tight_layout()
    fig.savefig(here / "snapshots.png", dpi=120)
"#,
        label = sim.label,
        n = sim.columns.len(),
        cols = cols,
    )
}

/// Writes every artifact for an already computed result.
pub fn write_run(s: &Scenario, sim: &SimResult, out_dir: &Path) -> Result<RunArtifacts, ScenarioError> {
    let dir = out_dir.join(&s.label);
    create_dir(&dir)?;
    let totals = dir.join("totals.csv");
    write_file(&totals, &totals_csv(sim))?;

    let summary = summarize(sim);
    let summary_path = dir.join("summary.txt");
    write_file(&summary_path, &summary.render())?;

    let mut snapshots = Vec::new();
    if !sim.snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        create_dir(&snap_dir)?;
        for (t, st) in &sim.snapshots {
            let mut csv = String::from("x,s,i,r,d\n");
            for j in 0..st.s.values.len() {
                writeln!(
                    csv,
                    "{},{},{},{},{}",
                    st.s.x(j),
                    st.s.values[j],
                    st.i.values[j],
                    st.r.values[j],
                    st.d.values[j]
                )
                .unwrap();
            }
            let path = snap_dir.join(snapshot_name(*t));
            write_file(&path, &csv)?;
            snapshots.push(path);
        }
    }

    let plot = if s.output.plot_script {
        let path = dir.join("plot.py");
        write_file(&path, &plot_script(sim))?;
        Some(path)
    } else {
        None
    };

    Ok(RunArtifacts {
        dir,
        totals,
        summary_path,
        snapshots,
        plot_script: plot,
        summary,
    })
}

/// Simulates and writes the artifacts under `out_dir/<label>/`. When the
/// solver fails, the partial results are still written before the error is
/// returned.
pub fn run_scenario(s: &Scenario, out_dir: &Path) -> Result<RunArtifacts, ScenarioError> {
    let sim = simulate(s)?;
    let artifacts = write_run(s, &sim, out_dir)?;
    match sim.failure {
        None => Ok(artifacts),
        Some(source) => Err(ScenarioError::Solver {
            label: s.label.clone(),
            source,
        }),
    }
}

/// Writes `compare.csv` and `metrics.txt` under
/// `out_dir/<ode_label>__vs__<pde_label>/`.
pub fn write_comparison(cmp: &Comparison, out_dir: &Path) -> Result<PathBuf, ScenarioError> {
    let dir = out_dir.join(format!("{}__vs__{}", cmp.ode_label, cmp.pde_label));
    create_dir(&dir)?;
    let mut csv = String::from("t,ode_S,ode_I,ode_R,ode_D,pde_S,pde_I,pde_R,pde_D\n");
    for (k, t) in cmp.times.iter().enumerate() {
        write!(csv, "{t}").unwrap();
        for col in cmp.ode.iter().chain(&cmp.pde) {
            write!(csv, ",{}", col[k]).unwrap();
        }
        csv.push('\n');
    }
    write_file(&dir.join("compare.csv"), &csv)?;
    let mut metrics = String::new();
    writeln!(metrics, "ode = {}", cmp.ode_label).unwrap();
    writeln!(metrics, "pde = {}", cmp.pde_label).unwrap();
    writeln!(metrics, "normalization = each series divided by its run's initial living population").unwrap();
    writeln!(metrics, "steps = {}", cmp.times.len()).unwrap();
    writeln!(metrics, "max_rel_d = {:e}", cmp.max_rel_d).unwrap();
    writeln!(metrics, "peak_i_rel = {:e}", cmp.peak_i_rel).unwrap();
    writeln!(metrics, "max_pointwise_rel = {:e}", cmp.max_pointwise_rel).unwrap();
    for (name, f) in [("ode_status", &cmp.ode_failure), ("pde_status", &cmp.pde_failure)] {
        match f {
            None => writeln!(metrics, "{name} = completed").unwrap(),
            Some(e) => writeln!(metrics, "{name} = diverged: {e}").unwrap(),
        }
    }
    write_file(&dir.join("metrics.txt"), &metrics)?;
    Ok(dir)
}
