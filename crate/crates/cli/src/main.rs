use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use epidelay::scenario::{self, catalog, ScenarioError};
use epidelay::stability::{self, CharPoint, DEFAULT_K_MAX};
use epidelay::ModelParams;

#[derive(Parser)]
#[command(name = "epidelay", version, about = "Delay SIRD epidemic simulations and stability analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Classify stability of the linearized delay equation.
    Stability(StabilityArgs),
    /// Compare an ODE run with the spatially integrated PDE run.
    Compare {
        #[arg(long)]
        ode_config: PathBuf,
        #[arg(long)]
        pde_config: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run several scenarios concurrently.
    Sweep {
        /// Scenario files, or directories whose *.cfg files are all run.
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// List the shipped scenarios, optionally writing them as files.
    ListScenarios {
        #[arg(long, value_name = "DIR")]
        write: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long = "out", env = "EPIDELAY_OUT_DIR", default_value = "out")]
    dir: PathBuf,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["sigma", "point"])))]
struct StabilityArgs {
    #[arg(long, requires = "sigma")]
    phi_r: Option<f64>,
    #[arg(long, requires = "sigma")]
    phi_d: Option<f64>,
    /// Incubation delay in days.
    #[arg(long, requires_all = ["phi_r", "phi_d"])]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0.0, requires = "sigma")]
    mu: f64,
    #[arg(long, default_value_t = 0.0, requires = "sigma")]
    alpha: f64,
    /// A point `a,b` of the scaled equation u' = a u + b u(t - 1).
    #[arg(long, value_name = "A,B", allow_hyphen_values = true, value_parser = parse_point, conflicts_with_all = ["sigma", "phi_r", "phi_d"])]
    point: Option<CharPoint>,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    k_max: usize,
    #[arg(long, default_value_t = 400)]
    boundary_samples: usize,
    #[command(flatten)]
    out: OutDir,
}

fn parse_point(s: &str) -> Result<CharPoint, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(format!("expected `a,b`, got {s:?}"));
    };
    let a: f64 = a.parse().map_err(|e| format!("bad a {a:?}: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("bad b {b:?}: {e}"))?;
    if !a.is_finite() || !b.is_finite() {
        return Err("a and b must be finite".into());
    }
    Ok(CharPoint::new(a, b))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Self {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn config_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 4,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

fn cmd_run(config: &Path, out: &Path) -> Result<(), Failure> {
    let s = scenario::load_scenario(config)?;
    match scenario::run_scenario(&s, out) {
        Ok(art) => {
            println!("{}: completed, {} steps, outputs in {}", s.label, art.summary.steps, art.dir.display());
            Ok(())
        }
        Err(e @ ScenarioError::Solver { .. }) => {
            println!("{}: partial outputs in {}", s.label, out.join(&s.label).display());
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_stability(args: &StabilityArgs) -> Result<(), Failure> {
    let point = match (args.point, args.sigma) {
        (Some(p), _) => {
            let v = stability::is_stable(p).map_err(|e| config_error(e.to_string()))?;
            println!("{v}");
            p
        }
        (None, Some(sigma)) => {
            let (phi_r, phi_d) = (args.phi_r.unwrap(), args.phi_d.unwrap());
            for (name, v) in [("phi-r", phi_r), ("phi-d", phi_d), ("mu", args.mu), ("alpha", args.alpha)] {
                if !v.is_finite() || v < 0.0 {
                    return Err(config_error(format!("--{name} must be finite and non-negative, got {v}")));
                }
            }
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(config_error(format!("--sigma must be positive, got {sigma}")));
            }
            let p = ModelParams {
                alpha: args.alpha,
                mu: args.mu,
                ..ModelParams::table1(sigma).with_removal(phi_r, phi_d)
            };
            println!("{}", stability::theorem31_check(&p));
            let point = stability::decoupled_point(&p);
            let v = stability::is_stable(point).map_err(|e| config_error(e.to_string()))?;
            println!("rightmost root at (a, b) = ({}, {}): {v}", point.a, point.b);
            println!("{}", stability::contractivity_check(&p, (0.0, 1.0)));
            point
        }
        (None, None) => unreachable!("clap enforces one input form"),
    };

    let roots = stability::characteristic_roots(point, args.k_max.max(1)).map_err(|e| config_error(e.to_string()))?;
    let dir = args.out.dir.join("stability");
    std::fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
    let mut csv = String::from("branch,re,im\n");
    for r in &roots.roots {
        writeln!(csv, "{},{},{}", r.branch, r.root.re, r.root.im).unwrap();
    }
    let roots_path = dir.join("roots.csv");
    std::fs::write(&roots_path, csv).map_err(|e| io_failure(&roots_path, e))?;
    let mut csv = String::from("phi,a,b\n");
    for (phi, p) in stability::boundary_samples(args.boundary_samples.max(1)) {
        writeln!(csv, "{phi},{},{}", p.a, p.b).unwrap();
    }
    let boundary_path = dir.join("boundary.csv");
    std::fs::write(&boundary_path, csv).map_err(|e| io_failure(&boundary_path, e))?;
    let r = roots.rightmost_root();
    println!("rightmost root {} {:+}i; roots in {}", r.re, r.im, roots_path.display());
    Ok(())
}

fn cmd_compare(ode: &Path, pde: &Path, out: &Path) -> Result<(), Failure> {
    let o = scenario::load_scenario(ode)?;
    let p = scenario::load_scenario(pde)?;
    let cmp = scenario::compare(&o, &p)?;
    let dir = scenario::write_comparison(&cmp, out)?;
    println!("{}", cmp.summary_line());
    println!("outputs in {}", dir.display());
    for f in [&cmp.ode_failure, &cmp.pde_failure].into_iter().flatten() {
        eprintln!("warning: run stopped early: {f}");
    }
    Ok(())
}

fn collect_configs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = std::fs::read_dir(p).map_err(|e| config_error(format!("cannot read {}: {e}", p.display())))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "cfg"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn cmd_sweep(configs: &[PathBuf], jobs: usize, out: &Path) -> Result<(), Failure> {
    let files = collect_configs(configs)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| config_error(e.to_string()))?;
    let results: Vec<(PathBuf, Result<String, ScenarioError>)> = pool.install(|| {
        files
            .par_iter()
            .map(|f| {
                let r = scenario::load_scenario(f).and_then(|s| scenario::run_scenario(&s, out).map(|_| s.label));
                (f.clone(), r)
            })
            .collect()
    });
    let mut worst = 0;
    for (f, r) in &results {
        match r {
            Ok(label) => println!("ok {label}"),
            Err(e) => {
                worst = worst.max(e.exit_code());
                println!("failed {}: {}", f.display(), e.to_string().replace('\n', " "));
            }
        }
    }
    let failed = results.iter().filter(|(_, r)| r.is_err()).count();
    println!("{} of {} scenarios completed", results.len() - failed, results.len());
    if worst == 0 {
        Ok(())
    } else {
        Err(Failure {
            code: worst as u8,
            message: format!("{failed} scenario(s) failed"),
        })
    }
}

fn cmd_list(write: Option<&Path>) -> Result<(), Failure> {
    for s in catalog::catalog() {
        println!("{}\t{}", s.label, s.description);
    }
    if let Some(dir) = write {
        let paths = catalog::write_catalog(dir)?;
        println!("wrote {} files to {}", paths.len(), dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => cmd_run(config, &out.dir),
        Command::Stability(args) => cmd_stability(args),
        Command::Compare {
            ode_config,
            pde_config,
            out,
        } => cmd_compare(ode_config, pde_config, &out.dir),
        Command::Sweep { configs, jobs, out } => cmd_sweep(configs, *jobs, &out.dir),
        Command::ListScenarios { write } => cmd_list(write.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
