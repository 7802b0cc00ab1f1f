//! Stability analysis of the scalar delay equation `u' = a u + b u(t - 1)`
//! and of the linearized epidemic models built on it.
//!
//! The characteristic equation `lambda = a + b exp(-lambda)` is solved branch
//! by branch through the Lambert W function:
//! `lambda_k = a + W_k(b exp(-a))`.

use std::f64::consts::{E, FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::domain::ModelParams;

pub const DEFAULT_K_MAX: usize = 25;

/// Roots whose real part is within this distance of zero are reported as
/// marginal.
pub const MARGINAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("Lambert W iteration did not converge on branch {branch} for z = {z}")]
    LambertW { branch: i64, z: Complex64 },
    #[error("Newton refinement did not converge on branch {branch}: residual {residual:e}")]
    Newton { branch: i64, residual: f64 },
    #[error("boundary parameter must lie in (0, pi), got {0}")]
    BoundaryDomain(f64),
    #[error("non-finite characteristic point ({a}, {b})")]
    NonFinite { a: f64, b: f64 },
}

/// A point of the `(a, b)` plane of the scaled scalar equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharPoint {
    pub a: f64,
    pub b: f64,
}

impl CharPoint {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRoot {
    pub branch: i64,
    pub root: Complex64,
}

/// Characteristic roots sorted by descending real part.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub point: CharPoint,
    pub roots: Vec<BranchRoot>,
    /// Index of the rightmost root, always 0 after sorting.
    pub rightmost: usize,
}

impl RootSet {
    pub fn rightmost_root(&self) -> Complex64 {
        self.roots[self.rightmost].root
    }

    /// `|lambda - a - b exp(-lambda)|` for a root.
    pub fn residual(&self, lambda: Complex64) -> f64 {
        char_residual(self.point, lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Stable,
    Marginal,
    Unstable,
    /// A sufficient condition failed, so nothing follows from it.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    RightmostRoot,
    TheoremBound,
    Contractivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub outcome: Outcome,
    pub stable: bool,
    /// Slack of the deciding inequality; positive means stable.
    pub margin: f64,
    pub oscillatory: bool,
    pub criterion: Criterion,
}

impl StabilityVerdict {
    fn new(outcome: Outcome, margin: f64, oscillatory: bool, criterion: Criterion) -> Self {
        Self {
            outcome,
            stable: outcome == Outcome::Stable,
            margin,
            oscillatory,
            criterion,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.outcome {
            Outcome::Stable => "STABLE",
            Outcome::Marginal => "MARGINAL",
            Outcome::Unstable => "UNSTABLE",
            Outcome::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl std::fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (margin {}, {}, {})",
            self.label(),
            self.margin,
            if self.oscillatory { "oscillatory" } else { "non-oscillatory" },
            match self.criterion {
                Criterion::RightmostRoot => "rightmost root",
                Criterion::TheoremBound => "delay bound",
                Criterion::Contractivity => "contractivity",
            }
        )
    }
}

fn char_residual(p: CharPoint, lambda: Complex64) -> f64 {
    (lambda - p.a - p.b * (-lambda).exp()).norm()
}

/// Imaginary-part window that contains branch `k` of the Lambert W function.
fn branch_window(k: i64) -> (f64, f64) {
    let k = k as f64;
    match k {
        0.0 => (-PI, PI),
        _ if k > 0.0 => ((2.0 * k - 2.0) * PI, (2.0 * k + 1.0) * PI),
        _ => ((2.0 * k - 1.0) * PI, (2.0 * k + 2.0) * PI),
    }
}

/// Branch `k` of the Lambert W function, the solutions of `w exp(w) = z`.
pub fn lambert_w(z: Complex64, k: i64) -> Result<Complex64, StabilityError> {
    if z == Complex64::new(0.0, 0.0) {
        return if k == 0 {
            Ok(z)
        } else {
            Err(StabilityError::LambertW { branch: k, z })
        };
    }
    let near_branch_point = (z + 1.0 / E).norm() < 0.3;
    let mut w = if k == 0 && near_branch_point {
        let p = (2.0 * (E * z + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0
    } else if k == -1 && near_branch_point && z.im == 0.0 && z.re < 0.0 {
        let p = (2.0 * (E * z + 1.0)).sqrt();
        -1.0 - p - p * p / 3.0
    } else if k == 0 && z.re > -1.0 && z.re < 1.5 && z.im.abs() < 1.0 && z.re > -2.5 * z.im.abs() - 0.2 {
        (1.0 + z).ln()
    } else {
        let l1 = z.ln() + Complex64::new(0.0, 2.0 * PI * k as f64);
        l1 - l1.ln()
    };

    for _ in 0..100 {
        let ew = w.exp();
        let wew = w * ew;
        let f = wew - z;
        let next = w - f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
        if !next.is_finite() {
            break;
        }
        let step = (next - w).norm();
        w = next;
        if step <= 1e-14 * w.norm().max(1.0) {
            break;
        }
    }
    let (lo, hi) = branch_window(k);
    let converged = w.is_finite() && (w * w.exp() - z).norm() <= 1e-12 * z.norm().max(1.0);
    // A root outside the window belongs to a neighbouring branch.
    if converged && w.im >= lo - 1e-9 && w.im <= hi + 1e-9 {
        return Ok(w);
    }
    Err(StabilityError::LambertW { branch: k, z })
}

/// The `2 k_max + 1` characteristic roots from branches `-k_max..=k_max`,
/// sorted by descending real part.
pub fn characteristic_roots(p: CharPoint, k_max: usize) -> Result<RootSet, StabilityError> {
    if !p.a.is_finite() || !p.b.is_finite() {
        return Err(StabilityError::NonFinite { a: p.a, b: p.b });
    }
    if p.b == 0.0 {
        return Ok(RootSet {
            point: p,
            roots: vec![BranchRoot {
                branch: 0,
                root: Complex64::new(p.a, 0.0),
            }],
            rightmost: 0,
        });
    }
    let z = Complex64::new(p.b * (-p.a).exp(), 0.0);
    let k_max = k_max.max(1) as i64;
    let mut roots = Vec::with_capacity(2 * k_max as usize + 1);
    for k in -k_max..=k_max {
        let w = lambert_w(z, k)?;
        let root = newton_polish(p, p.a + w, k)?;
        roots.push(BranchRoot { branch: k, root });
    }
    roots.sort_by(|x, y| {
        y.root
            .re
            .total_cmp(&x.root.re)
            .then(y.root.im.total_cmp(&x.root.im))
    });
    Ok(RootSet {
        point: p,
        roots,
        rightmost: 0,
    })
}

fn newton_polish(p: CharPoint, mut lambda: Complex64, branch: i64) -> Result<Complex64, StabilityError> {
    let tol = 1e-12 * p.a.abs().max(lambda.norm()).max(1.0);
    let mut residual = char_residual(p, lambda);
    for _ in 0..20 {
        if residual < 0.1 * tol {
            break;
        }
        // g = lambda - a - b exp(-lambda), g' = 1 + b exp(-lambda) = 1 + lambda - a on the root.
        let g = lambda - p.a - p.b * (-lambda).exp();
        let dg = 1.0 + p.b * (-lambda).exp();
        let next = lambda - g / dg;
        let r = char_residual(p, next);
        if !(r < residual) {
            break;
        }
        lambda = next;
        residual = r;
    }
    if residual < tol {
        Ok(lambda)
    } else {
        Err(StabilityError::Newton { branch, residual })
    }
}

/// Point of the stability boundary for parameter `phi` in `(0, pi)`.
pub fn boundary_curve(phi: f64) -> Result<CharPoint, StabilityError> {
    if !(phi > 0.0 && phi < PI) {
        return Err(StabilityError::BoundaryDomain(phi));
    }
    Ok(CharPoint::new(phi / phi.tan(), -phi / phi.sin()))
}

/// `n` boundary points for `phi` evenly spaced strictly inside `(0, pi)`.
pub fn boundary_samples(n: usize) -> Vec<(f64, CharPoint)> {
    (1..=n)
        .map(|j| {
            let phi = PI * j as f64 / (n + 1) as f64;
            (phi, boundary_curve(phi).expect("phi inside (0, pi)"))
        })
        .collect()
}

/// Verdict from the rightmost characteristic root.
pub fn is_stable(p: CharPoint) -> Result<StabilityVerdict, StabilityError> {
    let roots = characteristic_roots(p, DEFAULT_K_MAX)?;
    Ok(verdict_from_roots(&roots))
}

pub fn verdict_from_roots(roots: &RootSet) -> StabilityVerdict {
    let r = roots.rightmost_root();
    let outcome = if r.re.abs() < MARGINAL_TOL {
        Outcome::Marginal
    } else if r.re < 0.0 {
        Outcome::Stable
    } else {
        Outcome::Unstable
    };
    let oscillatory = r.im.abs() > 1e-12 * r.norm().max(1.0);
    StabilityVerdict::new(outcome, -r.re, oscillatory, Criterion::RightmostRoot)
}

/// Scaled point of the decoupled infected equation
/// `i' = -mu i - (phi_d + phi_r) i(t - sigma)`.
pub fn decoupled_point(p: &ModelParams) -> CharPoint {
    CharPoint::new(0.0 - p.mu * p.sigma_delay, -p.removal_rate() * p.sigma_delay)
}

/// Sufficient delay bound for the linearized delay SIRD system: stable when
/// the population part decays (or is frozen) and
/// `(phi_d + phi_r) sigma < pi / 2`.
pub fn theorem31_check(p: &ModelParams) -> StabilityVerdict {
    let population_ok = p.alpha - p.mu < 0.0 || (p.alpha == 0.0 && p.mu == 0.0);
    let scaled = p.removal_rate() * p.sigma_delay;
    let margin = FRAC_PI_2 - scaled;
    let outcome = if population_ok && margin > 0.0 {
        Outcome::Stable
    } else {
        Outcome::Unstable
    };
    StabilityVerdict::new(outcome, margin, scaled >= 1.0 / E, Criterion::TheoremBound)
}

/// Contractivity test `a + |b| < 0` for the infected equation linearized
/// with an Allee threshold, where `a = -mu - A beta_e delta` and
/// `b = -A beta_i delta - (phi_d + phi_r)`, at the worst `delta` in the range.
pub fn contractivity_check(p: &ModelParams, delta_range: (f64, f64)) -> StabilityVerdict {
    let at = |delta: f64| {
        let a = -p.mu - p.allee_a * p.beta_e * delta;
        let b = -p.allee_a * p.beta_i * delta - p.removal_rate();
        a + b.abs()
    };
    // a + |b| is convex in delta, so the maximum sits at an endpoint.
    let worst = at(delta_range.0).max(at(delta_range.1));
    let outcome = if worst < 0.0 {
        Outcome::Stable
    } else {
        Outcome::Inconclusive
    };
    StabilityVerdict::new(outcome, -worst, false, Criterion::Contractivity)
}
