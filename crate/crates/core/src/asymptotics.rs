//! Diagnostics tying the kink to its limits: the outer algebraic root, the
//! corner expansion of `eta`, the Painlevé-II blow-up near `-xi`, the scaling
//! of the zero, the interior tanh layer and the quotient `w = v/eta`.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::kink::{solve_sweep, EtaSolution, KinkSolution, SolverConfig};
use crate::model::{alpha_of, compute_thresholds, PotentialSpec};
use crate::painleve::{solve_pii, Branch, PainleveConfig, PainleveSolution};

/// Default margin `R` in `x <= -xi - R eps^{2/3}` for the outer root.
pub const OUTER_MARGIN: f64 = 10.0;
/// Upper end `delta` (relative to `xi`) of the corner-expansion window.
pub const CORNER_DELTA: f64 = 0.5;

// ---------------------------------------------------------------------------
// Outer root
// ---------------------------------------------------------------------------

/// Root of `mu nu - nu³ + g = 0` that tends to 0 with `g`.
///
/// For `mu < 0` the cubic is strictly decreasing and the root is unique. For
/// `mu > 0` the returned root is the middle one, which lies where the cubic is
/// increasing, `|nu| < sqrt(mu/3)`; it exists only for `|g| < 2 (mu/3)^{3/2}`.
pub fn cubic_outer_root(mu: f64, g: f64) -> Result<f64> {
    if !(mu.is_finite() && g.is_finite()) {
        return Err(Error::NonFinite(format!("cubic coefficients mu = {mu}, g = {g}")));
    }
    if g == 0.0 {
        return Ok(0.0);
    }
    if mu == 0.0 {
        return Ok(g.cbrt());
    }
    let p = |nu: f64| mu * nu - nu * nu * nu + g;
    let dp = |nu: f64| mu - 3.0 * nu * nu;
    let (mut lo, mut hi) = if mu < 0.0 {
        let guess = -g / mu;
        if g > 0.0 {
            (0.0, guess)
        } else {
            (guess, 0.0)
        }
    } else {
        let edge = (mu / 3.0).sqrt();
        if g.abs() >= 2.0 * edge * edge * edge {
            return Err(Error::MarginTooSmall { x: f64::NAN, limit: f64::NAN });
        }
        (-edge, edge)
    };
    let increasing = mu > 0.0;
    let mut nu = (-g / mu).clamp(lo, hi);
    for _ in 0..200 {
        let val = p(nu);
        if val == 0.0 {
            return Ok(nu);
        }
        if (val > 0.0) == increasing {
            hi = nu;
        } else {
            lo = nu;
        }
        let mut next = nu - val / dp(nu);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - nu).abs() <= 4.0 * f64::EPSILON * nu.abs() || hi - lo <= 4.0 * f64::EPSILON * nu.abs() {
            return Ok(next);
        }
        nu = next;
    }
    Ok(nu)
}

/// Outer root `nu_eps(x)` of `mu nu - nu³ + eps a f = 0`, for `|x| >= xi + margin eps^{2/3}`.
pub fn outer_root_with_margin(spec: &PotentialSpec, epsilon: f64, a: f64, x: f64, margin: f64) -> Result<f64> {
    let reach = spec.xi() + margin * epsilon.powf(2.0 / 3.0);
    let limit = if x < 0.0 { -reach } else { reach };
    if x.abs() < reach {
        return Err(Error::MarginTooSmall { x, limit });
    }
    cubic_outer_root(spec.mu(x), epsilon * a * spec.f(x)).map_err(|e| match e {
        Error::MarginTooSmall { .. } => Error::MarginTooSmall { x, limit },
        other => other,
    })
}

pub fn outer_root(spec: &PotentialSpec, epsilon: f64, a: f64, x: f64) -> Result<f64> {
    outer_root_with_margin(spec, epsilon, a, x, OUTER_MARGIN)
}

/// Two-term expansion `-sqrt(mu'(-xi) t) + a f(-xi)/(2 mu'(-xi)) · eps/t`, `t = x + xi`.
pub fn corner_expansion_eta(spec: &PotentialSpec, epsilon: f64, a: f64, x: f64) -> Result<f64> {
    let xi = spec.xi();
    let t = x + xi;
    let lo = epsilon.powf(2.0 / 3.0);
    let hi = CORNER_DELTA * xi;
    if !(t >= lo && t <= hi) {
        return Err(Error::OutsideWindow {
            what: "x + xi".into(),
            value: t,
            lo,
            hi,
        });
    }
    let slope = spec.mu_prime_at_corner();
    Ok(-(slope * t).sqrt() + a * spec.f_at_corner() / (2.0 * slope) * epsilon / t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterReport {
    pub window: (f64, f64),
    /// `max |v + eps a f/mu|` for the coarser `eps`.
    pub max_error: f64,
    pub max_error_fine: f64,
    /// `error(eps)/error(eps/2)`
    pub order_ratio: f64,
}

/// `max |v + eps a f/mu|` over the kink nodes inside `window`.
pub fn outer_error(kink: &KinkSolution, spec: &PotentialSpec, window: (f64, f64)) -> Result<f64> {
    let mut worst: Option<f64> = None;
    for (&x, &v) in kink.grid.nodes.iter().zip(&kink.values) {
        if x >= window.0 && x <= window.1 {
            let e = (v + kink.epsilon * kink.a * spec.f(x) / spec.mu(x)).abs();
            worst = Some(worst.map_or(e, |w: f64| w.max(e)));
        }
    }
    worst.ok_or_else(|| Error::InvalidInput(format!("window {window:?} holds no grid nodes")))
}

pub fn outer_report(coarse: &KinkSolution, fine: &KinkSolution, spec: &PotentialSpec, window: (f64, f64)) -> Result<OuterReport> {
    let max_error = outer_error(coarse, spec, window)?;
    let max_error_fine = outer_error(fine, spec, window)?;
    Ok(OuterReport {
        window,
        max_error,
        max_error_fine,
        order_ratio: max_error / max_error_fine,
    })
}

// ---------------------------------------------------------------------------
// Blow-up
// ---------------------------------------------------------------------------

/// A profile sampled on an `s` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampled {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
}

/// Samples per unit of `s` used by [`rescale_blowup`].
pub const BLOWUP_SAMPLES_PER_UNIT: usize = 100;

/// `x(s) = -xi - eps^{2/3} s / mu'(-xi)^{1/3}`.
pub fn blowup_x(spec: &PotentialSpec, epsilon: f64, s: f64) -> f64 {
    -spec.xi() - epsilon.powf(2.0 / 3.0) * s / spec.mu_prime_at_corner().cbrt()
}

fn rescale(
    eval: impl Fn(f64) -> f64,
    domain: (f64, f64),
    spec: &PotentialSpec,
    epsilon: f64,
    s_window: (f64, f64),
) -> Result<Sampled> {
    let (s0, s1) = s_window;
    if !(s1 > s0) {
        return Err(Error::InvalidInput(format!("empty s window [{s0}, {s1}]")));
    }
    let x_hi = blowup_x(spec, epsilon, s0);
    let x_lo = blowup_x(spec, epsilon, s1);
    if x_lo < domain.0 || x_hi > domain.1 {
        return Err(Error::OutsideWindow {
            what: "blow-up window in x".into(),
            value: if x_lo < domain.0 { x_lo } else { x_hi },
            lo: domain.0,
            hi: domain.1,
        });
    }
    let scale = 1.0 / (SQRT_2 * (spec.mu_prime_at_corner() * epsilon).cbrt());
    let m = (((s1 - s0) * BLOWUP_SAMPLES_PER_UNIT as f64).round() as usize).max(2);
    let s: Vec<f64> = (0..=m).map(|k| s0 + (s1 - s0) * k as f64 / m as f64).collect();
    let values = s.iter().map(|&si| scale * eval(blowup_x(spec, epsilon, si))).collect();
    Ok(Sampled { s, values })
}

/// `s -> 2^{-1/2} (mu'(-xi) eps)^{-1/3} v(x(s))` on `s_window`, with `v` cubic-interpolated.
pub fn rescale_blowup(kink: &KinkSolution, spec: &PotentialSpec, s_window: (f64, f64)) -> Result<Sampled> {
    rescale(|x| kink.eval(x), (kink.grid.left, kink.grid.right), spec, kink.epsilon, s_window)
}

/// The same rescaling applied to the half-line solution.
pub fn rescale_blowup_eta(eta: &EtaSolution, spec: &PotentialSpec, s_window: (f64, f64)) -> Result<Sampled> {
    rescale(|x| eta.eval(x), (eta.grid.left, eta.grid.right), spec, eta.epsilon, s_window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub epsilon: f64,
    pub a: f64,
    pub alpha: f64,
    pub s_window: (f64, f64),
    pub sup_error: f64,
    pub sup_error_plus: f64,
    pub sup_error_minus: f64,
    pub matched_branch: Branch,
    /// `(s, rescaled v, -Y of the matched branch, difference)`
    #[serde(skip)]
    pub samples: Vec<[f64; 4]>,
}

fn sup_against(profile: &Sampled, pii: &PainleveSolution) -> Result<f64> {
    let (lo, hi) = (pii.grid.left, pii.grid.right);
    let mut sup = 0.0f64;
    for (&s, &v) in profile.s.iter().zip(&profile.values) {
        if s < lo || s > hi {
            return Err(Error::OutsideWindow {
                what: "s".into(),
                value: s,
                lo,
                hi,
            });
        }
        sup = sup.max((v + pii.eval(s)).abs());
    }
    Ok(sup)
}

/// Sup-norm distance of the rescaled kink from `-Y+` and `-Y-`; the closer branch is reported as matched.
pub fn compare_blowup(
    kink: &KinkSolution,
    spec: &PotentialSpec,
    pii_plus: &PainleveSolution,
    pii_minus: &PainleveSolution,
    s_window: (f64, f64),
) -> Result<BlowupReport> {
    let alpha = alpha_of(spec, kink.a)?.alpha;
    for p in [pii_plus, pii_minus] {
        if (p.alpha - alpha).abs() > 1e-9 * alpha.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "Painlevé solution at alpha = {} does not match alpha(a) = {alpha}",
                p.alpha
            )));
        }
    }
    let profile = rescale_blowup(kink, spec, s_window)?;
    let sup_error_plus = sup_against(&profile, pii_plus)?;
    let sup_error_minus = sup_against(&profile, pii_minus)?;
    let (matched_branch, sup_error, matched) = if sup_error_minus <= sup_error_plus {
        (Branch::Minus, sup_error_minus, pii_minus)
    } else {
        (Branch::Plus, sup_error_plus, pii_plus)
    };
    let samples = profile
        .s
        .iter()
        .zip(&profile.values)
        .map(|(&s, &v)| {
            let target = -matched.eval(s);
            [s, v, target, v - target]
        })
        .collect();
    Ok(BlowupReport {
        epsilon: kink.epsilon,
        a: kink.a,
        alpha,
        s_window,
        sup_error,
        sup_error_plus,
        sup_error_minus,
        matched_branch,
        samples,
    })
}

/// `rho_pred = -xi - eps^{2/3} zero_s / mu'(-xi)^{1/3}`.
pub fn predict_zero(spec: &PotentialSpec, a: f64, epsilon: f64, pii_minus: &PainleveSolution) -> Result<f64> {
    let alpha = alpha_of(spec, a)?.alpha;
    if (pii_minus.alpha - alpha).abs() > 1e-9 * alpha.abs().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "Painlevé solution at alpha = {} does not match alpha(a) = {alpha}",
            pii_minus.alpha
        )));
    }
    if pii_minus.sign_changes != 1 {
        return Err(Error::MissingZero(format!("profile has {} sign changes", pii_minus.sign_changes)));
    }
    let zero = pii_minus
        .zero_s
        .ok_or_else(|| Error::MissingZero("no recorded zero_s".into()))?;
    Ok(blowup_x(spec, epsilon, zero))
}

// ---------------------------------------------------------------------------
// Zero scaling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub eps_list: Vec<f64>,
    pub rho_list: Vec<f64>,
    /// `rho + xi` (signed)
    pub offsets: Vec<f64>,
    pub fitted_exponent: f64,
    pub fit_r2: f64,
    pub predicted_offsets: Vec<f64>,
    /// `max |rho + xi| / eps^{2/3}`
    pub empirical_constant: f64,
    /// `min |rho + xi| / eps^{2/3}`
    pub min_scaled_offset: f64,
    /// Indices of runs whose offset is not positive.
    pub flagged: Vec<usize>,
    pub dropped_largest_eps: bool,
    pub points_used: usize,
    pub warnings: Vec<String>,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-30 {
        1.0
    } else {
        0.0
    };
    (slope, intercept, r2)
}

/// Least-squares slope of `log |rho + xi|` against `log eps`.
///
/// Runs are sorted by decreasing `eps`. Nonpositive offsets are flagged but
/// kept; offsets with magnitude below `1e-14` are excluded. The largest `eps`
/// is dropped when that raises `R²` by more than 0.05 and leaves >= 4 points.
pub fn fit_zero_scaling(xi: f64, runs: &[(f64, f64)]) -> Result<ScalingReport> {
    let mut runs = runs.to_vec();
    runs.sort_by(|p, q| q.0.total_cmp(&p.0));
    runs.dedup_by(|p, q| p.0 == q.0);
    if runs.len() < 4 {
        return Err(Error::InsufficientRuns {
            needed: 4,
            got: runs.len(),
        });
    }
    if runs.iter().any(|&(e, r)| !(e > 0.0 && e.is_finite() && r.is_finite())) {
        return Err(Error::InvalidInput("runs must have positive eps and finite rho".into()));
    }
    let eps_list: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let rho_list: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let offsets: Vec<f64> = rho_list.iter().map(|r| r + xi).collect();
    let mut warnings = Vec::new();
    let flagged: Vec<usize> = (0..offsets.len()).filter(|&i| !(offsets[i] > 0.0)).collect();
    for &i in &flagged {
        warnings.push(format!(
            "offset rho + xi = {:e} at eps = {} is not positive; fitted on |rho + xi|",
            offsets[i], eps_list[i]
        ));
    }
    let usable: Vec<usize> = (0..offsets.len()).filter(|&i| offsets[i].abs() >= 1e-14).collect();
    if usable.len() < 4 {
        return Err(Error::InsufficientRuns {
            needed: 4,
            got: usable.len(),
        });
    }
    let fit = |idx: &[usize]| {
        let xs: Vec<f64> = idx.iter().map(|&i| eps_list[i].ln()).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| offsets[i].abs().ln()).collect();
        least_squares(&xs, &ys)
    };
    let (mut slope, _, mut r2) = fit(&usable);
    let mut dropped = false;
    let mut points_used = usable.len();
    if usable.len() >= 5 {
        let (s2, _, r2b) = fit(&usable[1..]);
        if r2b > r2 + 0.05 {
            warnings.push(format!(
                "dropped largest eps = {}: R² {r2:.4} -> {r2b:.4}",
                eps_list[usable[0]]
            ));
            slope = s2;
            r2 = r2b;
            dropped = true;
            points_used -= 1;
        }
    }
    let scaled: Vec<f64> = usable
        .iter()
        .map(|&i| offsets[i].abs() / eps_list[i].powf(2.0 / 3.0))
        .collect();
    Ok(ScalingReport {
        empirical_constant: scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_scaled_offset: scaled.iter().copied().fold(f64::INFINITY, f64::min),
        eps_list,
        rho_list,
        offsets,
        fitted_exponent: slope,
        fit_r2: r2,
        predicted_offsets: Vec::new(),
        flagged,
        dropped_largest_eps: dropped,
        points_used,
        warnings,
    })
}

/// Everything computed along one `eps` ladder at fixed `(spec, a)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub alpha: f64,
    pub zero_s: f64,
    pub report: ScalingReport,
    pub predicted_rho: Vec<f64>,
    pub blowups: Vec<BlowupReport>,
    #[serde(skip)]
    pub kinks: Vec<KinkSolution>,
    #[serde(skip)]
    pub pii_plus: Option<PainleveSolution>,
    #[serde(skip)]
    pub pii_minus: Option<PainleveSolution>,
}

/// Solves the kink along `eps_list` (concurrently), the two Painlevé branches
/// at `alpha(a)`, and assembles the scaling fit, the predictions and the
/// blow-up comparisons (sorted by decreasing `eps`).
pub fn zero_scaling_study(
    spec: &PotentialSpec,
    a: f64,
    eps_list: &[f64],
    solver: &SolverConfig,
    pii: &PainleveConfig,
    s_window: (f64, f64),
) -> Result<ScalingStudy> {
    let alpha = alpha_of(spec, a)?.alpha;
    let runs: Vec<(f64, f64)> = eps_list.iter().map(|&e| (e, a)).collect();
    let (kink_results, (plus, minus)) = rayon::join(
        || solve_sweep(spec, &runs, solver),
        || {
            rayon::join(
                || solve_pii(alpha, Branch::Plus, pii),
                || solve_pii(alpha, Branch::Minus, pii),
            )
        },
    );
    let pii_plus = plus?;
    let pii_minus = minus?;
    let mut kinks = Vec::with_capacity(kink_results.len());
    for (_, r) in kink_results.into_iter().rev() {
        kinks.push(r?);
    }
    let report_runs: Vec<(f64, f64)> = kinks.iter().map(|k| (k.epsilon, k.rho)).collect();
    let mut report = fit_zero_scaling(spec.xi(), &report_runs)?;
    let mut predicted_rho = Vec::new();
    let mut blowups = Vec::new();
    for k in &kinks {
        let p = predict_zero(spec, a, k.epsilon, &pii_minus)?;
        predicted_rho.push(p);
        report.predicted_offsets.push(p + spec.xi());
        blowups.push(compare_blowup(k, spec, &pii_plus, &pii_minus, s_window)?);
    }
    Ok(ScalingStudy {
        alpha,
        zero_s: pii_minus.zero_s.expect("minus branch records its zero"),
        report,
        predicted_rho,
        blowups,
        kinks,
        pii_plus: Some(pii_plus),
        pii_minus: Some(pii_minus),
    })
}

// ---------------------------------------------------------------------------
// Interior layer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanhReport {
    pub epsilon: f64,
    pub a: f64,
    pub rho: f64,
    pub amplitude: f64,
    pub sup_error: f64,
    pub nodes_compared: usize,
}

/// Distance of `v` from `sqrt(mu(rho)) tanh(sqrt(mu(rho)/2)(x - rho)/eps)` on `|x - rho| <= 6 eps`.
///
/// Requires `a > a^*`; the threshold is computed from the spec.
pub fn tanh_layer_check(kink: &KinkSolution, spec: &PotentialSpec) -> Result<TanhReport> {
    let upper = compute_thresholds(spec, 2000, 1e-10)?.a_star_upper;
    tanh_layer_check_with(kink, spec, upper)
}

pub fn tanh_layer_check_with(kink: &KinkSolution, spec: &PotentialSpec, a_star_upper: f64) -> Result<TanhReport> {
    if !(kink.a > a_star_upper) {
        return Err(Error::InvalidInput(format!(
            "tanh layer check requires a > a^* = {a_star_upper}, got a = {}",
            kink.a
        )));
    }
    let rho = kink.rho;
    let eps = kink.epsilon;
    let amp = spec.mu(rho).max(0.0).sqrt();
    let k = (spec.mu(rho).max(0.0) / 2.0).sqrt();
    let mut sup = 0.0f64;
    let mut count = 0;
    for (&x, &v) in kink.grid.nodes.iter().zip(&kink.values) {
        if (x - rho).abs() <= 6.0 * eps {
            sup = sup.max((v - amp * (k * (x - rho) / eps).tanh()).abs());
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidInput("no grid nodes within 6 eps of rho".into()));
    }
    Ok(TanhReport {
        epsilon: eps,
        a: kink.a,
        rho,
        amplitude: amp,
        sup_error: sup,
        nodes_compared: count,
    })
}

// ---------------------------------------------------------------------------
// Division trick
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DivisionConfig {
    /// Plateaus start this many predicted widths away from `rho`.
    pub plateau_margin: f64,
    /// The right plateau ends at `-delta`.
    pub delta: f64,
}

impl Default for DivisionConfig {
    fn default() -> Self {
        Self {
            plateau_margin: 5.0,
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub window: (f64, f64),
    pub min_w: f64,
    pub max_w: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisionReport {
    pub epsilon: f64,
    pub a: f64,
    pub rho: f64,
    pub x_values: Vec<f64>,
    pub w_values: Vec<f64>,
    /// `max w` over nodes `x < rho` (the Dirichlet node is excluded).
    pub max_w_left: f64,
    /// `max_w_left < 1 + 1e-8`
    pub quotient_bound_ok: bool,
    /// `max_w_left` within `1e-8` of 1.
    pub boundary_case: bool,
    /// Distance between the `w = 0.9` and `w = -0.9` crossings nearest to `rho`.
    pub layer_width_measured: Option<f64>,
    /// `eps / sqrt(|rho + xi|)`
    pub layer_width_predicted: f64,
    pub width_ratio: Option<f64>,
    pub left_plateau: Option<Plateau>,
    pub right_plateau: Option<Plateau>,
}

fn crossing(xs: &[f64], ws: &[f64], level: f64, from: usize, leftward: bool) -> Option<f64> {
    let n = xs.len();
    let pairs: Box<dyn Iterator<Item = usize>> = if leftward {
        Box::new((1..=from.min(n - 1)).rev())
    } else {
        Box::new(from.max(1)..n)
    };
    for i in pairs {
        let (w0, w1) = (ws[i - 1] - level, ws[i] - level);
        if w0 == 0.0 {
            return Some(xs[i - 1]);
        }
        if (w0 > 0.0) != (w1 > 0.0) {
            return Some(xs[i - 1] + (xs[i] - xs[i - 1]) * w0 / (w0 - w1));
        }
    }
    None
}

fn plateau(xs: &[f64], ws: &[f64], lo: f64, hi: f64) -> Option<Plateau> {
    let sel: Vec<f64> = xs
        .iter()
        .zip(ws)
        .filter(|(x, _)| **x >= lo && **x <= hi)
        .map(|(_, &w)| w)
        .collect();
    if sel.is_empty() {
        return None;
    }
    Some(Plateau {
        window: (lo, hi),
        min_w: sel.iter().copied().fold(f64::INFINITY, f64::min),
        max_w: sel.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        nodes: sel.len(),
    })
}

pub fn division_diagnostic(kink: &KinkSolution, eta: &EtaSolution, spec: &PotentialSpec) -> Result<DivisionReport> {
    division_diagnostic_with(kink, eta, spec, &DivisionConfig::default())
}

/// `w = v/eta` on the nodes of the `eta` grid (the Dirichlet node `-L`, where
/// both functions take the same boundary value, is excluded).
pub fn division_diagnostic_with(
    kink: &KinkSolution,
    eta: &EtaSolution,
    spec: &PotentialSpec,
    config: &DivisionConfig,
) -> Result<DivisionReport> {
    if kink.epsilon != eta.epsilon || kink.a != eta.a {
        return Err(Error::InvalidInput(format!(
            "kink at (eps, a) = ({}, {}) but eta at ({}, {})",
            kink.epsilon, kink.a, eta.epsilon, eta.a
        )));
    }
    let left_nodes: Vec<f64> = kink.grid.nodes.iter().copied().filter(|&x| x <= 0.0).collect();
    let same_grid = left_nodes == eta.grid.nodes;
    let mut xs = Vec::with_capacity(eta.grid.n());
    let mut ws = Vec::with_capacity(eta.grid.n());
    for (i, (&x, &e)) in eta.grid.nodes.iter().zip(&eta.values).enumerate().skip(1) {
        if e.abs() < 1e-8 {
            return Err(Error::NonFinite(format!("eta vanishes at x = {x} (eta = {e:e})")));
        }
        let v = if same_grid { kink.values[i] } else { kink.eval(x) };
        xs.push(x);
        ws.push(v / e);
    }
    let rho = kink.rho;
    let max_w_left = xs
        .iter()
        .zip(&ws)
        .filter(|(x, _)| **x < rho)
        .map(|(_, &w)| w)
        .fold(f64::NEG_INFINITY, f64::max);
    let offset = (rho + spec.xi()).abs();
    let predicted = kink.epsilon / offset.sqrt();
    let k_rho = xs.partition_point(|&x| x < rho);
    let left = crossing(&xs, &ws, 0.9, k_rho, true);
    let right = crossing(&xs, &ws, -0.9, k_rho, false);
    let measured = match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    };
    let m = config.plateau_margin * predicted;
    Ok(DivisionReport {
        epsilon: kink.epsilon,
        a: kink.a,
        rho,
        max_w_left,
        quotient_bound_ok: max_w_left < 1.0 + 1e-8,
        boundary_case: (max_w_left - 1.0).abs() <= 1e-8,
        layer_width_measured: measured,
        layer_width_predicted: predicted,
        width_ratio: measured.map(|w| w / predicted),
        left_plateau: plateau(&xs, &ws, eta.grid.left, rho - m),
        right_plateau: plateau(&xs, &ws, rho + m, -config.delta),
        x_values: xs,
        w_values: ws,
    })
}
