//! Painlevé-II boundary-value problem `y'' = s y + 2y³ + alpha` on a truncated
//! interval, with the positive branch `Y+` and the sign-changing branch `Y-`,
//! Bäcklund steps `alpha -> alpha ± 1` and the Dirichlet spectrum of the
//! linearization `-d²/ds² + (s + 6y²)`.

use serde::{Deserialize, Serialize};

use crate::airy::airy_log_derivative;
use crate::error::{Error, Result};
use crate::grid::{sign_changes, unique_zero, Grid1D};
use crate::interp;
use crate::tridiag::{solve_tridiagonal, SymTridiagonal};

/// Entries below this magnitude are ignored when counting sign changes.
pub const SIGN_FLOOR: f64 = 1e-12;
/// Width next to `s_minus` excluded from the monotonicity check of the plus branch.
pub const MONOTONE_SKIP: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn left_sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Discretization of `y''`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Three-point second difference, second order.
    Fd2,
    /// Numerov's compact scheme, fourth order.
    Numerov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PainleveConfig {
    pub s_minus: f64,
    pub s_plus: f64,
    pub h: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub damping_min: f64,
    /// Offset in the right-tail guess `|alpha|/(s + c0)`.
    pub c0: f64,
    pub scheme: Scheme,
    /// Re-solve on a 1.5× wider domain and record the difference.
    pub truncation_check: bool,
}

impl Default for PainleveConfig {
    fn default() -> Self {
        Self {
            s_minus: -20.0,
            s_plus: 15.0,
            h: 0.01,
            tol: 1e-10,
            max_iters: 100,
            damping_min: 1e-6,
            c0: 1.0,
            scheme: Scheme::Fd2,
            truncation_check: true,
        }
    }
}

impl PainleveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_minus <= -20.0) {
            return Err(Error::InvalidInput(format!("s_minus must be <= -20, got {}", self.s_minus)));
        }
        if !(self.s_plus >= 15.0 && self.s_plus.is_finite()) {
            return Err(Error::InvalidInput(format!("s_plus must be >= 15, got {}", self.s_plus)));
        }
        if !(self.h > 0.0 && self.h <= 0.05) {
            return Err(Error::InvalidInput(format!("h must lie in (0, 0.05], got {}", self.h)));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 || !(self.damping_min > 0.0 && self.damping_min < 1.0) {
            return Err(Error::InvalidInput("tol, max_iters and damping_min must be positive".into()));
        }
        if !(self.c0 > 0.0) {
            return Err(Error::InvalidInput(format!("c0 must be positive, got {}", self.c0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PainleveSolution {
    pub alpha: f64,
    pub branch: Branch,
    pub s_minus: f64,
    pub s_plus: f64,
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub residual_inf: f64,
    pub sign_changes: usize,
    pub zero_s: Option<f64>,
    pub newton_iters: usize,
    pub scheme: Scheme,
    /// Max difference against the wider-domain solve on `[s_minus + 5, s_plus - 5]`.
    pub truncation_diff: Option<f64>,
    /// `truncation_diff <= 1e-5`.
    pub truncation_ok: Option<bool>,
    pub warnings: Vec<String>,
    /// Exact `y'` at the nodes when known (Bäcklund images); otherwise `y'` is differenced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<Vec<f64>>,
}

impl PainleveSolution {
    pub fn eval(&self, s: f64) -> f64 {
        interp::local_cubic(&self.grid.nodes, &self.values, s)
    }

    /// Uniform spacing of the underlying grid.
    pub fn h(&self) -> f64 {
        self.grid.spacing[0]
    }
}

/// Uniform grid with spacing as close to `h` as the interval length allows.
pub fn pii_grid(s_minus: f64, s_plus: f64, h: f64) -> Result<Grid1D> {
    let cells = ((s_plus - s_minus) / h).round().max(2.0) as usize;
    Grid1D::uniform(s_minus, s_plus, cells + 1)
}

fn rhs(s: f64, y: f64, alpha: f64) -> f64 {
    s * y + 2.0 * y * y * y + alpha
}

/// Interior residuals of the discrete equation under `scheme`.
fn residuals(s: &[f64], y: &[f64], alpha: f64, h: f64, scheme: Scheme) -> Vec<f64> {
    let n = y.len();
    let inv = 1.0 / (h * h);
    (1..n - 1)
        .map(|i| {
            let d2 = (y[i + 1] - 2.0 * y[i] + y[i - 1]) * inv;
            match scheme {
                Scheme::Fd2 => d2 - rhs(s[i], y[i], alpha),
                Scheme::Numerov => {
                    d2 - (rhs(s[i - 1], y[i - 1], alpha) + 10.0 * rhs(s[i], y[i], alpha) + rhs(s[i + 1], y[i + 1], alpha)) / 12.0
                }
            }
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

/// Max-norm residual of `y'' - s y - 2y³ - alpha` (three-point stencil) at interior nodes.
pub fn pii_residual(grid: &Grid1D, y: &[f64], alpha: f64) -> f64 {
    max_abs(&residuals(&grid.nodes, y, alpha, grid.spacing[0], Scheme::Fd2))
}

/// Max-norm residual with the fourth-order five-point second difference, at nodes `2..n-2`.
pub fn pii_residual_fourth(grid: &Grid1D, y: &[f64], alpha: f64) -> f64 {
    let h = grid.spacing[0];
    let inv = 1.0 / (12.0 * h * h);
    let s = &grid.nodes;
    (2..y.len().saturating_sub(2))
        .map(|i| {
            let d2 = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) * inv;
            (d2 - rhs(s[i], y[i], alpha)).abs()
        })
        .fold(0.0, f64::max)
}

/// Right closure: Dirichlet value, or the Airy Robin coefficient `y'/y` when `alpha = 0`.
enum RightClosure {
    Dirichlet(f64),
    Robin(f64),
}

struct Outcome {
    values: Vec<f64>,
    iters: usize,
    residual: f64,
}

fn newton(
    s: &[f64],
    mut y: Vec<f64>,
    alpha: f64,
    h: f64,
    right: &RightClosure,
    config: &PainleveConfig,
) -> Result<Outcome> {
    let n = y.len();
    let inv = 1.0 / (h * h);
    let unknowns = match right {
        RightClosure::Dirichlet(_) => n - 2,
        RightClosure::Robin(_) => n - 1,
    };
    let full_residual = |y: &[f64]| -> Vec<f64> {
        let mut r = residuals(s, y, alpha, h, config.scheme);
        if let RightClosure::Robin(q) = right {
            // ghost node y_{n} = y_{n-2} + 2 h q y_{n-1}
            let last = n - 1;
            let d2 = (2.0 * y[last - 1] - 2.0 * y[last] + 2.0 * h * q * y[last]) * inv;
            r.push(d2 - rhs(s[last], y[last], alpha));
        }
        r
    };
    let ymax = max_abs(&y).max(1.0);
    // roundoff floor of the second difference
    let floor = 16.0 * f64::EPSILON * ymax * inv;
    let mut f = full_residual(&y);
    let mut norm = max_abs(&f);
    let mut trace = Vec::new();
    for iter in 0..config.max_iters {
        trace.push(norm);
        if !norm.is_finite() {
            return Err(Error::Divergence { trace });
        }
        if norm <= config.tol {
            return Ok(Outcome {
                values: y,
                iters: iter,
                residual: norm,
            });
        }
        let mut sub = vec![0.0; unknowns];
        let mut diag = vec![0.0; unknowns];
        let mut sup = vec![0.0; unknowns];
        for k in 0..unknowns {
            let i = k + 1;
            let q = |j: usize| s[j] + 6.0 * y[j] * y[j];
            if i == n - 1 {
                let RightClosure::Robin(c) = right else { unreachable!() };
                sub[k] = 2.0 * inv;
                diag[k] = (-2.0 + 2.0 * h * c) * inv - q(i);
                continue;
            }
            match config.scheme {
                Scheme::Fd2 => {
                    sub[k] = inv;
                    sup[k] = inv;
                    diag[k] = -2.0 * inv - q(i);
                }
                Scheme::Numerov => {
                    sub[k] = inv - q(i - 1) / 12.0;
                    sup[k] = inv - q(i + 1) / 12.0;
                    diag[k] = -2.0 * inv - 10.0 * q(i) / 12.0;
                }
            }
        }
        let neg: Vec<f64> = f.iter().map(|x| -x).collect();
        let delta = solve_tridiagonal(&sub, &diag, &sup, &neg).ok_or_else(|| Error::Divergence { trace: trace.clone() })?;
        let step = max_abs(&delta);
        let mut t = 1.0;
        let mut trial = y.clone();
        loop {
            for k in 0..unknowns {
                trial[k + 1] = y[k + 1] + t * delta[k];
            }
            let f1 = full_residual(&trial);
            let n1 = max_abs(&f1);
            if n1.is_finite() && n1 <= (1.0 - 1e-4 * t) * norm {
                y.clone_from(&trial);
                f = f1;
                norm = n1;
                break;
            }
            // Stagnation at roundoff-level residual with a small full step is convergence.
            if t == 1.0 && step <= 1e-6 * ymax && norm <= floor.max(config.tol) * 1e3 {
                trace.push(norm);
                return Ok(Outcome {
                    values: y,
                    iters: iter + 1,
                    residual: norm,
                });
            }
            t *= 0.5;
            if t < config.damping_min {
                trace.push(norm);
                return Err(Error::Divergence { trace });
            }
        }
    }
    trace.push(norm);
    Err(Error::Divergence { trace })
}

fn sigma(t: f64) -> f64 {
    0.5 * (1.0 + t.tanh())
}

fn initial_guess(s: &[f64], alpha: f64, branch: Branch, c0: f64) -> Vec<f64> {
    s.iter()
        .map(|&si| {
            let root = (-si / 2.0).max(0.0).sqrt();
            let tail = alpha.abs() / (si.max(0.0) + c0);
            match branch {
                Branch::Plus => root + tail,
                Branch::Minus => -root * sigma(-si) + tail * sigma(si),
            }
        })
        .collect()
}

fn solve_on(alpha: f64, branch: Branch, config: &PainleveConfig, s_minus: f64, s_plus: f64) -> Result<(Grid1D, Outcome)> {
    let grid = pii_grid(s_minus, s_plus, config.h)?;
    let h = grid.spacing[0];
    let s = &grid.nodes;
    let mut y = initial_guess(s, alpha, branch, config.c0);
    let n = y.len();
    y[0] = branch.left_sign() * (-s_minus / 2.0).sqrt();
    let right = if alpha == 0.0 {
        RightClosure::Robin(airy_log_derivative(s_plus))
    } else {
        RightClosure::Dirichlet(alpha.abs() / s_plus)
    };
    match right {
        RightClosure::Dirichlet(v) => y[n - 1] = v,
        RightClosure::Robin(_) => y[n - 1] = 0.0,
    }
    let o = newton(s, y, alpha, h, &right, config)?;
    Ok((grid, o))
}

/// Solves the truncated boundary-value problem for the requested branch.
///
/// Both branches are Newton attractors; the branch is selected by the initial
/// guess and verified afterwards (sign changes, positivity, monotonicity).
pub fn solve_pii(alpha: f64, branch: Branch, config: &PainleveConfig) -> Result<PainleveSolution> {
    if !(alpha.is_finite() && alpha <= 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be <= 0, got {alpha}")));
    }
    config.validate()?;
    let mut warnings = Vec::new();
    if branch == Branch::Minus && !(alpha > -0.5 && alpha < 0.0) {
        warnings.push(format!("alpha = {alpha} lies outside (-1/2, 0); the sign-changing branch is exploratory here"));
    }
    let (grid, o) = solve_on(alpha, branch, config, config.s_minus, config.s_plus)?;
    let mut sol = PainleveSolution {
        alpha,
        branch,
        s_minus: grid.left,
        s_plus: grid.right,
        sign_changes: sign_changes(&o.values, SIGN_FLOOR),
        zero_s: None,
        residual_inf: o.residual,
        newton_iters: o.iters,
        scheme: config.scheme,
        truncation_diff: None,
        truncation_ok: None,
        warnings,
        slope: None,
        values: o.values,
        grid,
    };
    check_branch(&mut sol)?;
    if config.truncation_check {
        let (wide_grid, wide) = solve_on(alpha, branch, config, 1.5 * config.s_minus, 1.5 * config.s_plus)?;
        let (lo, hi) = (config.s_minus + 5.0, config.s_plus - 5.0);
        let diff = sol
            .grid
            .nodes
            .iter()
            .zip(&sol.values)
            .filter(|(s, _)| **s >= lo && **s <= hi)
            .map(|(&s, &y)| (interp::local_cubic(&wide_grid.nodes, &wide.values, s) - y).abs())
            .fold(0.0, f64::max);
        sol.truncation_diff = Some(diff);
        sol.truncation_ok = Some(diff <= 1e-5);
    }
    Ok(sol)
}

/// Records the zero for one sign change and enforces the branch invariants.
fn check_branch(sol: &mut PainleveSolution) -> Result<()> {
    sol.sign_changes = count_sign_changes(sol);
    match sol.branch {
        Branch::Minus => {
            if sol.sign_changes != 1 {
                return Err(Error::BranchCapture {
                    wanted: "minus".into(),
                    sign_changes: sol.sign_changes,
                    detail: "expected exactly one sign change".into(),
                });
            }
        }
        Branch::Plus => {
            if sol.sign_changes != 0 || sol.values.iter().any(|&y| y < -SIGN_FLOOR) {
                return Err(Error::BranchCapture {
                    wanted: "plus".into(),
                    sign_changes: sol.sign_changes,
                    detail: "expected a positive profile".into(),
                });
            }
            // The leading-order left closure leaves a boundary layer of size
            // |alpha|/(2|s_minus|), non-monotone when |alpha| > 1/2.
            let skip = sol.grid.nodes.partition_point(|&s| s < sol.s_minus + MONOTONE_SKIP);
            let bad = sol.values[skip..]
                .windows(2)
                .position(|w| !(w[1] < w[0]) && (w[0].abs() >= SIGN_FLOOR || w[1].abs() >= SIGN_FLOOR))
                .map(|i| i + skip);
            if let Some(i) = bad {
                return Err(Error::BranchCapture {
                    wanted: "plus".into(),
                    sign_changes: 0,
                    detail: format!("not strictly decreasing at s = {}", sol.grid.nodes[i]),
                });
            }
        }
    }
    Ok(())
}

/// Strict sign alternations ignoring `|y| < 1e-12`; stores `zero_s` when there is exactly one.
pub fn count_sign_changes(sol: &mut PainleveSolution) -> usize {
    let c = sign_changes(&sol.values, SIGN_FLOOR);
    sol.zero_s = if c == 1 {
        unique_zero(&sol.grid.nodes, &sol.values, SIGN_FLOOR).ok()
    } else {
        None
    };
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// `max |y(s) - (±)sqrt(-s/2)| · |s|` over `[s_minus, s_minus/2]`.
    pub left_constant: f64,
    /// `max |y(s) s/|alpha| - 1|` over `[s_plus/2, s_plus]`; `None` for `alpha = 0`.
    pub right_relative_error: Option<f64>,
    /// `5/s_plus`
    pub right_tolerance: f64,
}

pub fn tail_report(sol: &PainleveSolution) -> TailReport {
    let sign = sol.branch.left_sign();
    let mut left = 0.0f64;
    let mut right = 0.0f64;
    for (&s, &y) in sol.grid.nodes.iter().zip(&sol.values) {
        if s <= 0.5 * sol.s_minus {
            left = left.max((y - sign * (-s / 2.0).sqrt()).abs() * s.abs());
        }
        if s >= 0.5 * sol.s_plus && sol.alpha != 0.0 {
            right = right.max((y * s / sol.alpha.abs() - 1.0).abs());
        }
    }
    TailReport {
        left_constant: left,
        right_relative_error: (sol.alpha != 0.0).then_some(right),
        right_tolerance: 5.0 / sol.s_plus,
    }
}

// ---------------------------------------------------------------------------
// Bäcklund transformation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BacklundConfig {
    /// Width trimmed from each end of the input window; the input is least
    /// accurate next to its truncated boundaries.
    pub margin: f64,
    pub residual_tol: f64,
    pub pole_tol: f64,
}

impl Default for BacklundConfig {
    fn default() -> Self {
        Self {
            margin: 5.0,
            residual_tol: 1e-6,
            pole_tol: 1e-6,
        }
    }
}

/// Fourth-order centered first derivative (second order at the two outermost nodes).
fn derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h)
            } else if i == 0 {
                (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h)
            } else {
                (y[i + 1] - y[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Sign convention for the `y'` term of the Bäcklund denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Convention {
    /// `y~ = -y - (2 alpha + d)/(2y² + 2 d y' + s)`
    Aligned,
    /// `y~ = -y - (2 alpha + d)/(2y² - 2 d y' + s)`
    Opposed,
}

/// `alpha -> alpha ± 1` with the default trimming and tolerances.
pub fn backlund_step(sol: &PainleveSolution, direction: Direction) -> Result<PainleveSolution> {
    backlund_step_with(sol, direction, &BacklundConfig::default())
}

/// Applies the Bäcklund map on `[s_minus + margin, s_plus - margin]`.
///
/// Both sign conventions of the `y'` term are tried; the first whose output
/// satisfies the equation at the shifted parameter to `residual_tol` is kept.
/// The residual uses a fourth-order stencil, so the input should come from the
/// Numerov scheme. When neither convention passes, a pole of the standard
/// (aligned) denominator is reported as such.
///
/// The output carries its exact derivative in `slope`, so chained steps do
/// not difference already transformed data.
pub fn backlund_step_with(sol: &PainleveSolution, direction: Direction, config: &BacklundConfig) -> Result<PainleveSolution> {
    let h = sol.h();
    let d = direction.sign();
    let lo = sol.grid.left + config.margin;
    let hi = sol.grid.right - config.margin;
    let yp = match &sol.slope {
        Some(p) => p.clone(),
        None => derivative(&sol.values, h),
    };
    let idx: Vec<usize> = (0..sol.grid.n())
        .filter(|&i| sol.grid.nodes[i] >= lo && sol.grid.nodes[i] <= hi)
        .collect();
    if idx.len() < 5 {
        return Err(Error::InvalidInput(format!("margin {} leaves no interior window", config.margin)));
    }
    let new_alpha = sol.alpha + d;
    let mut residuals_seen = Vec::new();
    let mut pole: Option<Error> = None;
    for conv in [Convention::Aligned, Convention::Opposed] {
        let c = match conv {
            Convention::Aligned => d,
            Convention::Opposed => -d,
        };
        let denom: Vec<f64> = idx
            .iter()
            .map(|&i| 2.0 * sol.values[i] * sol.values[i] + 2.0 * c * yp[i] + sol.grid.nodes[i])
            .collect();
        if let Some(err) = find_pole(&denom, &idx, &sol.grid.nodes, config.pole_tol) {
            if conv == Convention::Aligned {
                pole = Some(err);
            }
            residuals_seen.push(f64::INFINITY);
            continue;
        }
        let num = 2.0 * sol.alpha + d;
        let values: Vec<f64> = idx.iter().zip(&denom).map(|(&i, &q)| -sol.values[i] - num / q).collect();
        // y~' = -y' + num D'/D², with y'' taken from the equation
        let slope: Vec<f64> = idx
            .iter()
            .zip(&denom)
            .map(|(&i, &q)| {
                let (si, y, p) = (sol.grid.nodes[i], sol.values[i], yp[i]);
                let dq = 4.0 * y * p + 2.0 * c * rhs(si, y, sol.alpha) + 1.0;
                -p + num * dq / (q * q)
            })
            .collect();
        let grid = Grid1D::from_nodes(idx.iter().map(|&i| sol.grid.nodes[i]).collect())?;
        let residual = pii_residual_fourth(&grid, &values, new_alpha);
        residuals_seen.push(residual);
        if residual <= config.residual_tol {
            let changes = sign_changes(&values, SIGN_FLOOR);
            let branch = if changes == 0 && values.iter().all(|&v| v > 0.0) {
                Branch::Plus
            } else {
                Branch::Minus
            };
            let mut out = PainleveSolution {
                alpha: new_alpha,
                branch,
                s_minus: grid.left,
                s_plus: grid.right,
                residual_inf: residual,
                sign_changes: changes,
                zero_s: None,
                newton_iters: 0,
                scheme: sol.scheme,
                truncation_diff: None,
                truncation_ok: None,
                warnings: vec![format!(
                    "Bäcklund {direction:?} step from alpha = {} ({conv:?} convention)",
                    sol.alpha
                )],
                slope: Some(slope),
                values,
                grid,
            };
            count_sign_changes(&mut out);
            return Ok(out);
        }
    }
    match pole {
        Some(err) => Err(err),
        None => Err(Error::ConventionFailure {
            residuals: residuals_seen,
        }),
    }
}

/// A sign change or a near-zero entry of the denominator marks a pole on the window.
fn find_pole(denom: &[f64], idx: &[usize], s: &[f64], tol: f64) -> Option<Error> {
    for (k, w) in denom.windows(2).enumerate() {
        if (w[0] > 0.0) != (w[1] > 0.0) {
            let (s0, s1) = (s[idx[k]], s[idx[k + 1]]);
            let at = s0 + (s1 - s0) * w[0] / (w[0] - w[1]);
            return Some(Error::PoleDetected {
                s: at,
                denominator: if w[0].abs() < w[1].abs() { w[0] } else { w[1] },
            });
        }
    }
    let (k, &q) = denom
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty window");
    (q.abs() < tol).then(|| Error::PoleDetected {
        s: s[idx[k]],
        denominator: q,
    })
}

// ---------------------------------------------------------------------------
// Linearization spectrum
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub alpha: f64,
    pub branch: Branch,
    #[serde(rename = "T")]
    pub t: f64,
    pub eigenvalues: Vec<f64>,
}

/// Lowest `k` eigenvalues of `-d²/ds² + q` with Dirichlet ends, for `q`
/// sampled at the interior nodes of a uniform grid of spacing `h`.
pub fn dirichlet_spectrum(q: &[f64], h: f64, k: usize) -> Vec<f64> {
    let inv = 1.0 / (h * h);
    let diag: Vec<f64> = q.iter().map(|&qi| 2.0 * inv + qi).collect();
    let off = vec![-inv; q.len().saturating_sub(1)];
    SymTridiagonal::new(diag, off).lowest_eigenvalues(k, 1e-12)
}

/// Dirichlet spectrum of the linearization on `[-T, T]`.
pub fn linearization_spectrum(sol: &PainleveSolution, t: f64, k: usize) -> Result<SpectrumReport> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if !(t > 0.0) || -t < sol.grid.left || t > sol.grid.right {
        return Err(Error::OutsideWindow {
            what: "T".into(),
            value: t,
            lo: 0.0,
            hi: (-sol.grid.left).min(sol.grid.right),
        });
    }
    let h = sol.h();
    let slack = 1e-9 * h;
    let q: Vec<f64> = sol
        .grid
        .nodes
        .iter()
        .zip(&sol.values)
        .filter(|(s, _)| **s > -t + slack && **s < t - slack)
        .map(|(&s, &y)| s + 6.0 * y * y)
        .collect();
    if q.len() < k {
        return Err(Error::InvalidInput(format!("window holds {} nodes, fewer than k = {k}", q.len())));
    }
    Ok(SpectrumReport {
        alpha: sol.alpha,
        branch: sol.branch,
        t,
        eigenvalues: dirichlet_spectrum(&q, h, k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn quick() -> PainleveConfig {
        PainleveConfig {
            truncation_check: false,
            ..PainleveConfig::default()
        }
    }

    fn manual(values: Vec<f64>, nodes: Vec<f64>) -> PainleveSolution {
        let grid = Grid1D::from_nodes(nodes).unwrap();
        PainleveSolution {
            alpha: -0.25,
            branch: Branch::Minus,
            s_minus: grid.left,
            s_plus: grid.right,
            grid,
            values,
            residual_inf: 0.0,
            sign_changes: 0,
            zero_s: None,
            newton_iters: 0,
            scheme: Scheme::Fd2,
            truncation_diff: None,
            truncation_ok: None,
            warnings: Vec::new(),
            slope: None,
        }
    }

    #[test]
    fn sign_change_examples() {
        let nodes: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
        let mut pos = manual(vec![0.5; 21], nodes.clone());
        assert_eq!(count_sign_changes(&mut pos), 0);
        assert_eq!(pos.zero_s, None);
        let mut th = manual(nodes.iter().map(|s| -s.tanh()).collect(), nodes);
        assert_eq!(count_sign_changes(&mut th), 1);
        assert!(th.zero_s.unwrap().abs() < 1e-15);
    }

    #[test]
    fn minus_branch_has_one_zero() {
        let sol = solve_pii(-0.25, Branch::Minus, &quick()).unwrap();
        assert_eq!(sol.sign_changes, 1);
        assert!(sol.residual_inf <= 1e-8);
        assert!((sol.zero_s.unwrap() - 0.351).abs() < 0.01, "{:?}", sol.zero_s);
    }

    #[test]
    fn left_tail_is_sqrt() {
        let cfg = PainleveConfig {
            s_minus: -40.0,
            ..quick()
        };
        for branch in [Branch::Plus, Branch::Minus] {
            let sol = solve_pii(-0.25, branch, &cfg).unwrap();
            let y = sol.eval(-40.0);
            assert!((y - branch.left_sign() * 20f64.sqrt()).abs() <= 0.05);
        }
    }

    #[test]
    fn plus_branch_positive_and_decreasing() {
        let sol = solve_pii(-0.25, Branch::Plus, &quick()).unwrap();
        assert_eq!(sol.sign_changes, 0);
        assert!(sol.values.windows(2).all(|w| w[1] < w[0]));
        let hm = solve_pii(0.0, Branch::Plus, &quick()).unwrap();
        let y0 = hm.eval(0.0);
        assert!((y0 - 0.367_061_551_548_078_4).abs() < 1e-4, "y(0) = {y0}");
    }

    #[test]
    fn rejects_positive_alpha_and_short_domain() {
        assert!(solve_pii(0.1, Branch::Plus, &quick()).is_err());
        let cfg = PainleveConfig {
            s_minus: -10.0,
            ..quick()
        };
        assert!(matches!(solve_pii(-0.1, Branch::Plus, &cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn constant_potential_spectrum() {
        let t: f64 = 10.0;
        let h = 0.001;
        let m = (2.0 * t / h).round() as usize - 1;
        let ev = dirichlet_spectrum(&vec![1.0; m], h, 3);
        for (j, &lam) in ev.iter().enumerate() {
            let jj = (j + 1) as f64;
            let exact = 1.0 + (jj * PI / (2.0 * t)).powi(2);
            assert!((lam - exact).abs() <= 1e-8, "{j}: {lam} vs {exact}");
        }
    }

    #[test]
    fn spectrum_window_must_fit() {
        let sol = solve_pii(-0.25, Branch::Plus, &quick()).unwrap();
        assert!(matches!(linearization_spectrum(&sol, 16.0, 1), Err(Error::OutsideWindow { .. })));
        let rep = linearization_spectrum(&sol, 10.0, 3).unwrap();
        assert!(rep.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(rep.eigenvalues.len(), 3);
    }

    #[test]
    fn pole_is_reported() {
        // y = 0, y' = 0 on a window through s = 0 gives denominator s.
        let nodes: Vec<f64> = (0..401).map(|i| -20.0 + 0.1 * i as f64).collect();
        let sol = manual(vec![0.0; 401], nodes);
        match backlund_step(&sol, Direction::Up) {
            Err(Error::PoleDetected { s, .. }) => assert!(s.abs() < 0.1),
            other => panic!("expected a pole, got {other:?}"),
        }
    }

    #[test]
    fn derivative_is_fourth_order() {
        let h = 0.01;
        let y: Vec<f64> = (0..200).map(|i| (i as f64 * h).sin()).collect();
        let d = derivative(&y, h);
        for i in 2..198 {
            assert!((d[i] - (i as f64 * h).cos()).abs() < 1e-9);
        }
    }

    fn numerov() -> PainleveConfig {
        PainleveConfig {
            scheme: Scheme::Numerov,
            ..quick()
        }
    }

    #[test]
    fn down_step_of_plus_branch_is_the_plus_branch_below() {
        let y = solve_pii(-0.25, Branch::Plus, &numerov()).unwrap();
        let down = backlund_step(&y, Direction::Down).unwrap();
        assert_eq!(down.alpha, -1.25);
        assert!(down.residual_inf <= 1e-6);
        assert_eq!(down.branch, Branch::Plus);
        let direct = solve_pii(-1.25, Branch::Plus, &numerov()).unwrap();
        let gap = down
            .grid
            .nodes
            .iter()
            .zip(&down.values)
            .map(|(&s, &v)| (v - direct.eval(s)).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-6, "gap {gap}");
        let back = backlund_step(&down, Direction::Up).unwrap();
        let err = back
            .grid
            .nodes
            .iter()
            .zip(&back.values)
            .map(|(&s, &v)| (v - y.eval(s)).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6);
    }

    #[test]
    fn down_step_of_minus_branch_meets_a_pole() {
        let y = solve_pii(-0.25, Branch::Minus, &numerov()).unwrap();
        match backlund_step(&y, Direction::Down) {
            Err(Error::PoleDetected { s, .. }) => assert!((s - 0.4).abs() < 0.05, "pole at {s}"),
            other => panic!("expected a pole, got {other:?}"),
        }
    }

    #[test]
    fn second_order_input_fails_the_residual_check() {
        let y = solve_pii(-0.25, Branch::Plus, &quick()).unwrap();
        assert!(matches!(
            backlund_step(&y, Direction::Down),
            Err(Error::ConventionFailure { .. })
        ));
    }
}
