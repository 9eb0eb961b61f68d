//! Energy-minimizing solutions of `eps² v'' + mu v - v³ + eps a f = 0` on a
//! truncated interval, and the negative half-line solution `eta`.
//!
//! The discrete functional is
//!
//! ```text
//! E[v] = Σ_cells eps²/2 (v_{i+1} - v_i)²/h_i + Σ_nodes w_i (-mu_i v_i²/2 + v_i⁴/4 - eps a f_i v_i)
//! ```
//!
//! with trapezoid weights `w_i`. Its gradient with respect to an interior value
//! is `-w_i F_i`, where `F` is the three-point residual of the equation, so the
//! Newton system and the Armijo test on `E` describe the same problem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::cubic_outer_root;
use crate::error::{Error, Result};
use crate::grid::{sign_changes, unique_zero_cubic, Band, Grid1D};
use crate::interp;
use crate::model::PotentialSpec;
use crate::tridiag::{solve_tridiagonal, SymTridiagonal};

/// Values below this magnitude are ignored when counting sign changes.
pub const SIGN_FLOOR: f64 = 1e-12;

/// Initial guesses for the multi-seed search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    /// `sgn(x) sqrt(mu⁺)`
    OddPlus,
    /// `sqrt(mu⁺)`
    Plus,
    /// `-sqrt(mu⁺)`
    Minus,
    /// `-sgn(x) sqrt(mu⁺)`
    OddMinus,
}

impl Seed {
    pub const ALL: [Seed; 4] = [Seed::OddPlus, Seed::Plus, Seed::Minus, Seed::OddMinus];

    pub fn value(self, spec: &PotentialSpec, x: f64) -> f64 {
        let r = spec.mu(x).max(0.0).sqrt();
        let sgn = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        };
        match self {
            Seed::OddPlus => sgn * r,
            Seed::Plus => r,
            Seed::Minus => -r,
            Seed::OddMinus => -sgn * r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Truncation half-length `L`; `None` means `xi + 1`.
    #[serde(alias = "L")]
    pub half_length: Option<f64>,
    /// Number of cells of the base (unrefined) spacing across `[-L, L]`.
    pub n: usize,
    /// Cells per layer scale inside the refinement bands.
    pub resolution: f64,
    /// Integer refinement factor applied to every cell of the graded grid.
    pub refine: usize,
    pub tol: f64,
    pub max_iters: usize,
    /// Smallest accepted line-search step.
    pub damping_min: f64,
    /// Decreasing continuation ladder; every rung above the target `eps` is visited.
    pub continuation_eps: Vec<f64>,
    pub seeds: Vec<Seed>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            half_length: None,
            n: 800,
            resolution: 32.0,
            refine: 1,
            tol: 1e-10,
            max_iters: 200,
            damping_min: 1e-8,
            continuation_eps: vec![0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125],
            seeds: Seed::ALL.to_vec(),
        }
    }
}

impl SolverConfig {
    pub fn half_length_for(&self, spec: &PotentialSpec) -> f64 {
        self.half_length.unwrap_or(spec.xi() + 1.0)
    }

    pub fn validate(&self, spec: &PotentialSpec) -> Result<()> {
        let l = self.half_length_for(spec);
        if !(l.is_finite() && l >= spec.xi() + 0.5) {
            return Err(Error::InvalidInput(format!("L = {l} must be >= xi + 0.5 = {}", spec.xi() + 0.5)));
        }
        if l > spec.support_limit() {
            return Err(Error::InvalidInput(format!("L = {l} exceeds the tabulated range")));
        }
        if self.n < 20 {
            return Err(Error::InvalidInput(format!("n must be >= 20, got {}", self.n)));
        }
        if !(self.resolution >= 12.0) {
            return Err(Error::InvalidInput(format!("resolution must be >= 12, got {}", self.resolution)));
        }
        if self.refine == 0 {
            return Err(Error::InvalidInput("refine must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be >= 1".into()));
        }
        if !(self.damping_min > 0.0 && self.damping_min < 1.0) {
            return Err(Error::InvalidInput(format!("damping_min must lie in (0, 1), got {}", self.damping_min)));
        }
        if self.continuation_eps.iter().any(|e| !(e.is_finite() && *e > 0.0))
            || self.continuation_eps.windows(2).any(|w| !(w[1] < w[0]))
        {
            return Err(Error::InvalidInput("continuation_eps must be positive and strictly decreasing".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidInput("at least one seed is required".into()));
        }
        Ok(())
    }

    /// The rungs visited on the way to `epsilon`, ending with `epsilon` itself.
    fn ladder(&self, epsilon: f64) -> Result<Vec<f64>> {
        if let Some(&top) = self.continuation_eps.first() {
            if epsilon > top {
                return Err(Error::InvalidInput(format!(
                    "epsilon = {epsilon} exceeds the top of the continuation ladder {top}"
                )));
            }
        }
        let mut rungs: Vec<f64> = self.continuation_eps.iter().copied().filter(|&e| e > epsilon).collect();
        rungs.push(epsilon);
        Ok(rungs)
    }
}

/// Graded grid for a given `eps`: refinement bands of scale `eps` at 0 and
/// `eps^{2/3}` at `±xi`.
pub fn kink_grid(spec: &PotentialSpec, epsilon: f64, config: &SolverConfig) -> Result<Grid1D> {
    let l = config.half_length_for(spec);
    let h_base = 2.0 * l / config.n as f64;
    let corner = epsilon.powf(2.0 / 3.0);
    let bands = [
        Band {
            center: 0.0,
            h: (epsilon / config.resolution).min(h_base),
            width: 6.0 * epsilon,
        },
        Band {
            center: spec.xi(),
            h: (corner / config.resolution).min(h_base),
            width: 6.0 * corner,
        },
    ];
    Grid1D::symmetric_graded(l, h_base, &bands, config.refine)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinkSolution {
    pub epsilon: f64,
    pub a: f64,
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub energy: f64,
    pub rho: f64,
    pub residual_inf: f64,
    pub newton_iters: usize,
    pub seed: Seed,
    /// True when the raw minimizer had its zero at `x > 0` and was replaced by `-v(-x)`.
    pub reflected: bool,
}

impl KinkSolution {
    /// The reflection `-v(-x)` (requires a symmetric grid).
    pub fn reflected(&self) -> Result<Self> {
        if !self.grid.is_symmetric() {
            return Err(Error::InvalidInput("reflection requires a symmetric grid".into()));
        }
        let values: Vec<f64> = self.values.iter().rev().map(|v| -v).collect();
        Ok(Self {
            values,
            rho: -self.rho,
            reflected: !self.reflected,
            grid: self.grid.clone(),
            ..*self
        })
    }

    /// Cubic interpolant of `v` at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        interp::local_cubic(&self.grid.nodes, &self.values, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSolution {
    pub epsilon: f64,
    pub a: f64,
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub residual_inf: f64,
    pub newton_iters: usize,
    /// One-sided second-order estimate of `eta'(0)`.
    pub boundary_slope: f64,
}

impl EtaSolution {
    pub fn eval(&self, x: f64) -> f64 {
        interp::local_cubic(&self.grid.nodes, &self.values, x)
    }
}

/// Coefficients sampled on a grid.
struct Discretization {
    h: Vec<f64>,
    w: Vec<f64>,
    mu: Vec<f64>,
    /// `eps a f`
    forcing: Vec<f64>,
    eps2: f64,
}

impl Discretization {
    fn new(grid: &Grid1D, spec: &PotentialSpec, epsilon: f64, a: f64) -> Self {
        Self {
            h: grid.spacing.clone(),
            w: grid.trapezoid_weights(),
            mu: grid.nodes.iter().map(|&x| spec.mu(x)).collect(),
            forcing: grid.nodes.iter().map(|&x| epsilon * a * spec.f(x)).collect(),
            eps2: epsilon * epsilon,
        }
    }

    fn n(&self) -> usize {
        self.w.len()
    }

    fn energy(&self, v: &[f64]) -> f64 {
        let mut grad = 0.0;
        for (i, &h) in self.h.iter().enumerate() {
            let d = v[i + 1] - v[i];
            grad += d * d / h;
        }
        let mut pot = 0.0;
        for i in 0..self.n() {
            let vi = v[i];
            let v2 = vi * vi;
            pot += self.w[i] * (-0.5 * self.mu[i] * v2 + 0.25 * v2 * v2 - self.forcing[i] * vi);
        }
        0.5 * self.eps2 * grad + pot
    }

    fn residual_at(&self, v: &[f64], i: usize) -> f64 {
        let flux = (v[i + 1] - v[i]) / self.h[i] - (v[i] - v[i - 1]) / self.h[i - 1];
        self.eps2 * flux / self.w[i] + self.mu[i] * v[i] - v[i] * v[i] * v[i] + self.forcing[i]
    }

    /// Interior residuals `F_1 .. F_{n-2}`.
    fn residual(&self, v: &[f64]) -> Vec<f64> {
        (1..self.n() - 1).map(|i| self.residual_at(v, i)).collect()
    }

    /// Second variation of `E` restricted to the interior values, plus `shift · W`.
    fn hessian(&self, v: &[f64], shift: f64) -> SymTridiagonal {
        let m = self.n() - 2;
        let mut diag = Vec::with_capacity(m);
        let mut off = Vec::with_capacity(m.saturating_sub(1));
        for i in 1..self.n() - 1 {
            let k = self.eps2 * (1.0 / self.h[i - 1] + 1.0 / self.h[i]);
            diag.push(k + self.w[i] * (3.0 * v[i] * v[i] - self.mu[i] + shift));
            if i + 1 < self.n() - 1 {
                off.push(-self.eps2 / self.h[i]);
            }
        }
        SymTridiagonal::new(diag, off)
    }

    fn potential_scale(&self) -> f64 {
        self.mu.iter().fold(1.0f64, |m, &x| m.max(x.abs()))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(format!("value at node {i} is {}", values[i]))),
        None => Ok(()),
    }
}

/// Discrete energy of `values` on `grid`.
pub fn energy(values: &[f64], grid: &Grid1D, spec: &PotentialSpec, epsilon: f64, a: f64) -> Result<f64> {
    if values.len() != grid.n() {
        return Err(Error::InvalidInput(format!(
            "{} values on a grid of {} nodes",
            values.len(),
            grid.n()
        )));
    }
    check_finite(values)?;
    let e = Discretization::new(grid, spec, epsilon, a).energy(values);
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::NonFinite("energy overflow".into()))
    }
}

/// Max-norm of the three-point residual at the interior nodes.
pub fn residual_inf(values: &[f64], grid: &Grid1D, spec: &PotentialSpec, epsilon: f64, a: f64) -> Result<f64> {
    if values.len() != grid.n() {
        return Err(Error::InvalidInput("values and grid differ in length".into()));
    }
    Ok(max_abs(&Discretization::new(grid, spec, epsilon, a).residual(values)))
}

/// True when the second variation at `values` has smallest generalized
/// eigenvalue `>= -1e-8 · scale`.
pub fn second_variation_nonnegative(
    values: &[f64],
    grid: &Grid1D,
    spec: &PotentialSpec,
    epsilon: f64,
    a: f64,
) -> bool {
    let d = Discretization::new(grid, spec, epsilon, a);
    d.hessian(values, 1e-8 * d.potential_scale()).is_positive_definite(0.0)
}

struct NewtonOutcome {
    values: Vec<f64>,
    iters: usize,
    residual: f64,
}

/// Newton on the Euler-Lagrange system with Armijo backtracking on `E`.
/// Where the second variation is indefinite the step is regularized by
/// `lambda W` until the shifted matrix is positive definite.
fn minimize(d: &Discretization, mut v: Vec<f64>, config: &SolverConfig) -> Result<NewtonOutcome> {
    let n = d.n();
    let scale = d.potential_scale();
    let mut trace = Vec::new();
    let mut f = d.residual(&v);
    let mut res = max_abs(&f);
    let mut e0 = d.energy(&v);
    for iter in 0..config.max_iters {
        trace.push(res);
        if !res.is_finite() || !e0.is_finite() {
            return Err(Error::Divergence { trace });
        }
        if res <= config.tol {
            return Ok(NewtonOutcome {
                values: v,
                iters: iter,
                residual: res,
            });
        }
        let rhs: Vec<f64> = (1..n - 1).map(|i| d.w[i] * f[i - 1]).collect();
        let mut lambda = 0.0;
        let mut h = d.hessian(&v, 0.0);
        let mut tries = 0;
        while !h.is_positive_definite(0.0) {
            lambda = if lambda == 0.0 { 1e-3 * scale } else { 4.0 * lambda };
            h = d.hessian(&v, lambda);
            tries += 1;
            if tries > 60 {
                return Err(Error::Divergence { trace });
            }
        }
        let delta = h.solve(&rhs).ok_or_else(|| Error::Divergence { trace: trace.clone() })?;
        // directional derivative of E along delta
        let slope: f64 = -rhs.iter().zip(&delta).map(|(r, d)| r * d).sum::<f64>();
        let mut t = 1.0;
        let mut trial = v.clone();
        loop {
            for i in 1..n - 1 {
                trial[i] = v[i] + t * delta[i - 1];
            }
            let e1 = d.energy(&trial);
            let armijo = e1 <= e0 + 1e-4 * t * slope;
            let f1 = d.residual(&trial);
            let r1 = max_abs(&f1);
            // Near convergence energy differences drop below roundoff; a full step
            // that reduces the residual without raising E beyond roundoff is kept.
            let roundoff = t == 1.0 && r1 < res && e1 <= e0 + 1e-12 * e0.abs().max(1.0);
            if (armijo || roundoff) && e1.is_finite() && r1.is_finite() {
                v.clone_from(&trial);
                f = f1;
                res = r1;
                e0 = e1;
                break;
            }
            t *= 0.5;
            if t < config.damping_min {
                trace.push(res);
                return Err(Error::Nonconvergence {
                    context: format!("line search stalled at iteration {iter} with residual {res:e}"),
                    diagnostics: trace.iter().map(|r| format!("{r:e}")).collect(),
                });
            }
        }
    }
    trace.push(res);
    if res <= config.tol {
        return Ok(NewtonOutcome {
            values: v,
            iters: config.max_iters,
            residual: res,
        });
    }
    Err(Error::Nonconvergence {
        context: format!("no convergence in {} iterations (residual {res:e})", config.max_iters),
        diagnostics: trace.iter().map(|r| format!("{r:e}")).collect(),
    })
}

/// Dirichlet data `(nu(-L), nu(L))` from the outer algebraic root.
fn boundary_values(spec: &PotentialSpec, epsilon: f64, a: f64, l: f64) -> Result<(f64, f64)> {
    let left = cubic_outer_root(spec.mu(-l), epsilon * a * spec.f(-l))?;
    let right = cubic_outer_root(spec.mu(l), epsilon * a * spec.f(l))?;
    Ok((left, right))
}

struct Candidate {
    seed: Seed,
    grid: Grid1D,
    values: Vec<f64>,
    energy: f64,
    residual: f64,
    iters: usize,
    stable: bool,
}

fn run_seed(spec: &PotentialSpec, epsilon: f64, a: f64, config: &SolverConfig, seed: Seed) -> Result<Candidate> {
    let rungs = config.ladder(epsilon)?;
    let mut prev: Option<(Grid1D, Vec<f64>)> = None;
    let mut notes = Vec::new();
    let mut total_iters = 0;
    for (k, &eps) in rungs.iter().enumerate() {
        let grid = kink_grid(spec, eps, config)?;
        let d = Discretization::new(&grid, spec, eps, a);
        let (bl, br) = boundary_values(spec, eps, a, grid.right)?;
        let from_seed = || -> Vec<f64> {
            let mut v: Vec<f64> = grid.nodes.iter().map(|&x| seed.value(spec, x)).collect();
            v[0] = bl;
            *v.last_mut().unwrap() = br;
            v
        };
        let start = match &prev {
            Some((g, vals)) => {
                let mut v: Vec<f64> = grid.nodes.iter().map(|&x| interp::linear(&g.nodes, vals, x)).collect();
                v[0] = bl;
                *v.last_mut().unwrap() = br;
                v
            }
            None => from_seed(),
        };
        let outcome = match minimize(&d, start, config) {
            Ok(o) => Ok(o),
            Err(e) if prev.is_some() => {
                notes.push(format!("eps = {eps}: continuation step failed ({e}); restarting from seed"));
                minimize(&d, from_seed(), config)
            }
            Err(e) => Err(e),
        };
        match outcome {
            Ok(o) => {
                total_iters += o.iters;
                if k + 1 == rungs.len() {
                    let stable = second_variation_nonnegative(&o.values, &grid, spec, eps, a);
                    return Ok(Candidate {
                        seed,
                        energy: d.energy(&o.values),
                        residual: o.residual,
                        iters: total_iters,
                        stable,
                        values: o.values,
                        grid,
                    });
                }
                prev = Some((grid, o.values));
            }
            Err(e) if k + 1 < rungs.len() => {
                notes.push(format!("eps = {eps}: {e}"));
                prev = None;
            }
            Err(e) => {
                notes.push(format!("eps = {eps}: {e}"));
                return Err(Error::Nonconvergence {
                    context: format!("seed {seed:?}"),
                    diagnostics: notes,
                });
            }
        }
    }
    unreachable!("the ladder always ends with the target epsilon")
}

/// Multi-seed, continued damped Newton search for the discrete minimizer.
///
/// Saddle points (indefinite second variation) are discarded; the lowest-energy
/// remaining candidate is returned, reflected so that its zero is `<= 0`.
pub fn solve_minimizer(spec: &PotentialSpec, epsilon: f64, a: f64, config: &SolverConfig) -> Result<KinkSolution> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
    }
    config.validate(spec)?;
    config.ladder(epsilon)?;

    let outcomes: Vec<(Seed, Result<Candidate>)> = config
        .seeds
        .par_iter()
        .map(|&seed| (seed, run_seed(spec, epsilon, a, config, seed)))
        .collect();

    let mut diagnostics = Vec::new();
    let mut best: Option<Candidate> = None;
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(c) if !c.stable => diagnostics.push(format!("seed {seed:?}: converged to a saddle (E = {:e})", c.energy)),
            Ok(c) => {
                if best.as_ref().map_or(true, |b| c.energy < b.energy) {
                    best = Some(c);
                }
            }
            Err(e) => diagnostics.push(format!("seed {seed:?}: {e}")),
        }
    }
    let best = best.ok_or_else(|| Error::Nonconvergence {
        context: format!("no seed converged to a local minimizer at eps = {epsilon}, a = {a}"),
        diagnostics,
    })?;

    let changes = sign_changes(&best.values, SIGN_FLOOR);
    let mut sol = KinkSolution {
        epsilon,
        a,
        rho: f64::NAN,
        energy: best.energy,
        residual_inf: best.residual,
        newton_iters: best.iters,
        seed: best.seed,
        reflected: false,
        values: best.values,
        grid: best.grid,
    };
    if changes != 1 {
        return Err(Error::UnexpectedTopology {
            sign_changes: changes,
            solution: Box::new(sol),
        });
    }
    sol.rho = locate_zero(&sol)?;
    if sol.rho > 0.0 {
        sol = sol.reflected()?;
    }
    Ok(sol)
}

/// The zero of the local cubic interpolant of the solution.
pub fn locate_zero(sol: &KinkSolution) -> Result<f64> {
    unique_zero_cubic(&sol.grid.nodes, &sol.values, SIGN_FLOOR)
}

/// Solves every `(eps, a)` pair concurrently; results come back sorted by `(eps, a)`.
pub fn solve_sweep(
    spec: &PotentialSpec,
    runs: &[(f64, f64)],
    config: &SolverConfig,
) -> Vec<((f64, f64), Result<KinkSolution>)> {
    let mut sorted = runs.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite run parameters"));
    sorted
        .par_iter()
        .map(|&(eps, a)| ((eps, a), solve_minimizer(spec, eps, a, config)))
        .collect()
}

// ---------------------------------------------------------------------------
// Half-line problem
// ---------------------------------------------------------------------------

/// Residuals of the half-line problem at nodes `1..n-1`; the last row uses the
/// mirror ghost node `v_{n} = v_{n-2}` (discrete Neumann condition at 0).
fn eta_residual(d: &Discretization, v: &[f64]) -> Vec<f64> {
    let n = d.n();
    let mut out: Vec<f64> = (1..n - 1).map(|i| d.residual_at(v, i)).collect();
    let h = d.h[n - 2];
    let last = n - 1;
    out.push(
        2.0 * d.eps2 * (v[last - 1] - v[last]) / (h * h) + d.mu[last] * v[last] - v[last].powi(3) + d.forcing[last],
    );
    out
}

fn eta_newton(d: &Discretization, mut v: Vec<f64>, config: &SolverConfig) -> Result<NewtonOutcome> {
    let n = d.n();
    let m = n - 1;
    let mut f = eta_residual(d, &v);
    let mut norm = max_abs(&f);
    let mut trace = Vec::new();
    for iter in 0..config.max_iters {
        trace.push(norm);
        if !norm.is_finite() {
            return Err(Error::Divergence { trace });
        }
        if norm <= config.tol {
            return Ok(NewtonOutcome {
                values: v,
                iters: iter,
                residual: norm,
            });
        }
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            let react = d.mu[i] - 3.0 * v[i] * v[i];
            if i < n - 1 {
                let cl = d.eps2 / (d.h[i - 1] * d.w[i]);
                let cr = d.eps2 / (d.h[i] * d.w[i]);
                sub[k] = cl;
                sup[k] = cr;
                diag[k] = -cl - cr + react;
            } else {
                let h = d.h[n - 2];
                let c = 2.0 * d.eps2 / (h * h);
                sub[k] = c;
                diag[k] = -c + react;
            }
        }
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let delta = solve_tridiagonal(&sub, &diag, &sup, &rhs).ok_or_else(|| Error::Divergence { trace: trace.clone() })?;
        let mut t = 1.0;
        let mut trial = v.clone();
        loop {
            for i in 1..n {
                trial[i] = v[i] + t * delta[i - 1];
            }
            let f1 = eta_residual(d, &trial);
            let n1 = max_abs(&f1);
            if n1.is_finite() && n1 <= (1.0 - 1e-4 * t) * norm {
                v.clone_from(&trial);
                f = f1;
                norm = n1;
                break;
            }
            t *= 0.5;
            if t < config.damping_min {
                trace.push(norm);
                return Err(Error::Nonconvergence {
                    context: format!("eta line search stalled at iteration {iter} with residual {norm:e}"),
                    diagnostics: trace.iter().map(|r| format!("{r:e}")).collect(),
                });
            }
        }
    }
    Err(Error::Nonconvergence {
        context: format!("eta: no convergence in {} iterations (residual {norm:e})", config.max_iters),
        diagnostics: trace.iter().map(|r| format!("{r:e}")).collect(),
    })
}

/// Negative solution of the equation on `[-L, 0]` with `eta(-L) = nu(-L)` and
/// `eta'(0) = 0`, on the left half of the kink grid for the same `eps`.
///
/// `a = 0` is admitted.
pub fn solve_eta(spec: &PotentialSpec, epsilon: f64, a: f64, config: &SolverConfig) -> Result<EtaSolution> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidInput(format!("a must be nonnegative, got {a}")));
    }
    config.validate(spec)?;
    let rungs = config.ladder(epsilon)?;
    let mut prev: Option<(Grid1D, Vec<f64>)> = None;
    let mut notes = Vec::new();
    let mut total_iters = 0;
    for (k, &eps) in rungs.iter().enumerate() {
        let grid = kink_grid(spec, eps, config)?.left_half()?;
        let d = Discretization::new(&grid, spec, eps, a);
        let left = cubic_outer_root(spec.mu(grid.left), eps * a * spec.f(grid.left))?;
        let seed = || -> Vec<f64> {
            let mut v: Vec<f64> = grid.nodes.iter().map(|&x| Seed::Minus.value(spec, x)).collect();
            v[0] = left;
            v
        };
        let start = match &prev {
            Some((g, vals)) => {
                let mut v: Vec<f64> = grid.nodes.iter().map(|&x| interp::linear(&g.nodes, vals, x)).collect();
                v[0] = left;
                v
            }
            None => seed(),
        };
        let outcome = match eta_newton(&d, start, config) {
            Err(e) if prev.is_some() => {
                notes.push(format!("eps = {eps}: {e}; restarting from seed"));
                eta_newton(&d, seed(), config)
            }
            other => other,
        };
        match outcome {
            Ok(o) => {
                total_iters += o.iters;
                if k + 1 == rungs.len() {
                    return finish_eta(eps, a, grid, o, total_iters);
                }
                prev = Some((grid, o.values));
            }
            Err(e) if k + 1 < rungs.len() => {
                notes.push(format!("eps = {eps}: {e}"));
                prev = None;
            }
            Err(e) => {
                notes.push(format!("eps = {eps}: {e}"));
                return Err(Error::Nonconvergence {
                    context: "half-line solve".into(),
                    diagnostics: notes,
                });
            }
        }
    }
    unreachable!("the ladder always ends with the target epsilon")
}

fn finish_eta(
    epsilon: f64,
    a: f64,
    grid: Grid1D,
    o: NewtonOutcome,
    iters: usize,
) -> Result<EtaSolution> {
    let v = o.values;
    let n = v.len();
    if let Some(i) = (1..n).find(|&i| !(v[i] < 0.0)) {
        return Err(Error::SignViolation {
            x: grid.nodes[i],
            value: v[i],
        });
    }
    // three-point one-sided derivative on a nonuniform stencil
    let (x0, x1, x2) = (grid.nodes[n - 3], grid.nodes[n - 2], grid.nodes[n - 1]);
    let (h1, h2) = (x1 - x0, x2 - x1);
    let boundary_slope =
        v[n - 3] * h2 / (h1 * (h1 + h2)) - v[n - 2] * (h1 + h2) / (h1 * h2) + v[n - 1] * (h1 + 2.0 * h2) / (h2 * (h1 + h2));
    Ok(EtaSolution {
        epsilon,
        a,
        grid,
        values: v,
        residual_inf: o.residual,
        newton_iters: iters,
        boundary_slope,
    })
}
