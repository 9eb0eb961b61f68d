//! Coefficient functions `mu` (even, decreasing on the positive axis, one
//! positive root `xi`) and `f` (odd, positive on the positive axis), their
//! structural checks, the variational thresholds `a_*`, `a^*`, and the map
//! from the forcing amplitude `a` to the Painlevé-II parameter `alpha`.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::CubicSpline;

/// Root tolerance for `mu(xi) = 0`.
pub const ROOT_TOL: f64 = 1e-12;
/// Parity tolerance on the validation grid.
pub const PARITY_TOL: f64 = 1e-12;
/// Denominators below this are treated as a 0/0 quotient.
pub const QUOTIENT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuFamily {
    /// `(w² - x²)/(w² + x²)`
    Rational,
    /// `cos(x/w)`, valid only on `|x| < pi w`
    Cosine,
    /// `(1 - x²/w²) exp(-x²/w²)`
    GaussQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingFamily {
    /// `-c mu'/2`
    HalfSlope,
    /// `c x exp(-x²)`
    XGauss,
    /// `c x` (not integrable; used to exercise validation)
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Builtin { mu: MuFamily, forcing: ForcingFamily },
    Tabulated,
}

impl MuFamily {
    fn name(self) -> &'static str {
        match self {
            MuFamily::Rational => "rational",
            MuFamily::Cosine => "cosine",
            MuFamily::GaussQuadratic => "gauss-quadratic",
        }
    }
}

impl ForcingFamily {
    fn name(self) -> &'static str {
        match self {
            ForcingFamily::HalfSlope => "half-slope",
            ForcingFamily::XGauss => "x-gauss",
            ForcingFamily::Linear => "linear",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Builtin { mu, forcing } => write!(f, "{}+{}", mu.name(), forcing.name()),
            Family::Tabulated => f.write_str("tabulated"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "tabulated" {
            return Ok(Family::Tabulated);
        }
        let (mu, forcing) = s
            .split_once('+')
            .ok_or_else(|| Error::InvalidSpec(format!("family '{s}' is not of the form <mu>+<f> or 'tabulated'")))?;
        let mu = match mu {
            "rational" => MuFamily::Rational,
            "cosine" => MuFamily::Cosine,
            "gauss-quadratic" => MuFamily::GaussQuadratic,
            other => return Err(Error::InvalidSpec(format!("unknown mu family '{other}'"))),
        };
        let forcing = match forcing {
            "half-slope" => ForcingFamily::HalfSlope,
            "x-gauss" => ForcingFamily::XGauss,
            "linear" => ForcingFamily::Linear,
            other => return Err(Error::InvalidSpec(format!("unknown forcing family '{other}'"))),
        };
        Ok(Family::Builtin { mu, forcing })
    }
}

/// Tabulated coefficients. A table starting at `x = 0` is extended to the
/// negative axis by parity (`mu` even, `f` odd).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    family: String,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Table>,
}

#[derive(Debug, Clone)]
struct TableModel {
    mu: CubicSpline,
    f: CubicSpline,
    half_line: bool,
}

/// The pair `(mu, f)` together with the root `xi` of `mu` on the positive axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct PotentialSpec {
    family: Family,
    params: Vec<f64>,
    table: Option<Table>,
    model: Option<TableModel>,
    xi: f64,
}

impl TryFrom<SpecRepr> for PotentialSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        let family: Family = r.family.parse()?;
        PotentialSpec::new(family, r.params, r.table)
    }
}

impl From<PotentialSpec> for SpecRepr {
    fn from(s: PotentialSpec) -> Self {
        SpecRepr {
            family: s.family.to_string(),
            params: s.params,
            table: s.table,
        }
    }
}

impl PotentialSpec {
    /// Builds a spec and locates `xi`. Builtin params are `[w, c]` (both default to 1).
    pub fn new(family: Family, params: Vec<f64>, table: Option<Table>) -> Result<Self> {
        let model = match family {
            Family::Builtin { .. } => {
                if table.is_some() {
                    return Err(Error::InvalidSpec("builtin families take no table".into()));
                }
                if params.len() > 2 {
                    return Err(Error::InvalidSpec(format!(
                        "builtin families take at most 2 params [w, c], got {}",
                        params.len()
                    )));
                }
                if params.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                    return Err(Error::InvalidSpec("params must be finite and positive".into()));
                }
                None
            }
            Family::Tabulated => {
                let t = table
                    .as_ref()
                    .ok_or_else(|| Error::InvalidSpec("tabulated family requires a table".into()))?;
                if t.x.len() != t.mu.len() || t.x.len() != t.f.len() {
                    return Err(Error::InvalidSpec("table columns differ in length".into()));
                }
                if t.x.iter().chain(&t.mu).chain(&t.f).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSpec("table holds non-finite values".into()));
                }
                let mu = CubicSpline::natural(&t.x, &t.mu)
                    .ok_or_else(|| Error::InvalidSpec("table x must be strictly increasing with >= 3 rows".into()))?;
                let f = CubicSpline::natural(&t.x, &t.f).expect("same abscissae as mu");
                Some(TableModel {
                    half_line: t.x[0] >= 0.0,
                    mu,
                    f,
                })
            }
        };
        let mut spec = Self {
            family,
            params,
            table,
            model,
            xi: f64::NAN,
        };
        let scan_hi = spec.root_scan_limit();
        spec.xi = first_positive_root(|x| spec.mu(x), scan_hi)?;
        Ok(spec)
    }

    pub fn builtin(mu: MuFamily, forcing: ForcingFamily) -> Self {
        Self::new(Family::Builtin { mu, forcing }, Vec::new(), None).expect("builtin families have a root")
    }

    /// `mu = (1-x²)/(1+x²)`, `f = -mu'/2`.
    pub fn rational_half_slope() -> Self {
        Self::builtin(MuFamily::Rational, ForcingFamily::HalfSlope)
    }

    /// `mu = (1-x²)/(1+x²)`, `f = x exp(-x²)`.
    pub fn rational_x_gauss() -> Self {
        Self::builtin(MuFamily::Rational, ForcingFamily::XGauss)
    }

    pub fn tabulated(table: Table) -> Result<Self> {
        Self::new(Family::Tabulated, Vec::new(), Some(table))
    }

    /// Same spec with the forcing multiplied by `c` (builtin families only).
    pub fn with_forcing_scale(&self, c: f64) -> Result<Self> {
        match self.family {
            Family::Builtin { .. } => Self::new(self.family, vec![self.width(), self.forcing_scale() * c], None),
            Family::Tabulated => {
                let mut t = self.table.clone().expect("tabulated spec has a table");
                t.f.iter_mut().for_each(|v| *v *= c);
                Self::tabulated(t)
            }
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    fn width(&self) -> f64 {
        self.params.first().copied().unwrap_or(1.0)
    }

    fn forcing_scale(&self) -> f64 {
        self.params.get(1).copied().unwrap_or(1.0)
    }

    fn root_scan_limit(&self) -> f64 {
        match (&self.family, &self.model) {
            (Family::Builtin { .. }, _) => 4.0 * self.width(),
            (Family::Tabulated, Some(m)) => m.mu.x_max(),
            (Family::Tabulated, None) => unreachable!(),
        }
    }

    /// Largest |x| at which the coefficients are defined by data (infinite for builtins).
    pub fn support_limit(&self) -> f64 {
        match &self.model {
            None => f64::INFINITY,
            Some(m) if m.half_line => m.mu.x_max(),
            Some(m) => m.mu.x_max().min(-m.mu.x_min()),
        }
    }

    pub fn mu(&self, x: f64) -> f64 {
        match (&self.family, &self.model) {
            (Family::Builtin { mu, .. }, _) => builtin_mu(*mu, self.width(), x).0,
            (_, Some(m)) => {
                if m.half_line {
                    m.mu.eval(x.abs())
                } else {
                    m.mu.eval(x)
                }
            }
            _ => unreachable!(),
        }
    }

    pub fn mu_prime(&self, x: f64) -> f64 {
        match self.family {
            Family::Builtin { mu, .. } => builtin_mu(mu, self.width(), x).1,
            Family::Tabulated => central_difference(|t| self.mu(t), x),
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        match (&self.family, &self.model) {
            (Family::Builtin { mu, forcing }, _) => builtin_f(*mu, *forcing, self.width(), self.forcing_scale(), x).0,
            (_, Some(m)) => {
                if m.half_line {
                    x.signum() * m.f.eval(x.abs())
                } else {
                    m.f.eval(x)
                }
            }
            _ => unreachable!(),
        }
    }

    pub fn f_prime(&self, x: f64) -> f64 {
        match self.family {
            Family::Builtin { mu, forcing } => builtin_f(mu, forcing, self.width(), self.forcing_scale(), x).1,
            Family::Tabulated => central_difference(|t| self.f(t), x),
        }
    }

    /// `mu'(-xi)`, positive for a valid spec.
    pub fn mu_prime_at_corner(&self) -> f64 {
        self.mu_prime(-self.xi)
    }

    /// `f(-xi)`, negative for a valid spec.
    pub fn f_at_corner(&self) -> f64 {
        self.f(-self.xi)
    }
}

fn central_difference(g: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5 * x.abs().max(1.0);
    (g(x + h) - g(x - h)) / (2.0 * h)
}

/// `(mu, mu', mu'')` of a builtin family.
fn builtin_mu(family: MuFamily, w: f64, x: f64) -> (f64, f64, f64) {
    match family {
        MuFamily::Rational => {
            let w2 = w * w;
            let x2 = x * x;
            let d = w2 + x2;
            let mu = (w2 - x2) / d;
            let mu1 = -4.0 * w2 * x / (d * d);
            let mu2 = -4.0 * w2 * (w2 - 3.0 * x2) / (d * d * d);
            (mu, mu1, mu2)
        }
        MuFamily::Cosine => {
            let z = x / w;
            (z.cos(), -z.sin() / w, -z.cos() / (w * w))
        }
        MuFamily::GaussQuadratic => {
            let z = x / w;
            let z2 = z * z;
            let e = (-z2).exp();
            let mu = (1.0 - z2) * e;
            let mu1 = -2.0 * z * (2.0 - z2) * e / w;
            let mu2 = (-4.0 + 14.0 * z2 - 4.0 * z2 * z2) * e / (w * w);
            (mu, mu1, mu2)
        }
    }
}

/// `(f, f')` of a builtin family.
fn builtin_f(mu: MuFamily, forcing: ForcingFamily, w: f64, c: f64, x: f64) -> (f64, f64) {
    match forcing {
        ForcingFamily::HalfSlope => {
            let (_, mu1, mu2) = builtin_mu(mu, w, x);
            (-0.5 * c * mu1, -0.5 * c * mu2)
        }
        ForcingFamily::XGauss => {
            let e = (-x * x).exp();
            (c * x * e, c * (1.0 - 2.0 * x * x) * e)
        }
        ForcingFamily::Linear => (c * x, c),
    }
}

/// Bisects a sign change of `g` on `[lo, hi]` down to adjacent floating-point numbers.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo);
    if glo == 0.0 {
        return lo;
    }
    if g(hi) == 0.0 {
        return hi;
    }
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

fn first_positive_root(g: impl Fn(f64) -> f64, hi: f64) -> Result<f64> {
    const SCAN: usize = 4000;
    let step = hi / SCAN as f64;
    let mut prev_x = step * 1e-6;
    let mut prev = g(prev_x);
    for k in 1..=SCAN {
        let x = k as f64 * step;
        let gx = g(x);
        if gx == 0.0 || (gx > 0.0) != (prev > 0.0) {
            return Ok(bisect(&g, prev_x, x));
        }
        prev_x = x;
        prev = gx;
    }
    Err(Error::NoRoot { lo: 0.0, hi })
}

/// Locates the root `xi` of `mu` on `bracket` by bisection.
///
/// The bracket is scanned on 1000 subintervals first; more than one sign change
/// contradicts monotonicity of `mu` on the positive axis.
pub fn find_xi(spec: &PotentialSpec, bracket: (f64, f64)) -> Result<f64> {
    const SCAN: usize = 1000;
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidInput(format!("bracket [{lo}, {hi}] is empty")));
    }
    let mut changes = Vec::new();
    let mut prev_x = lo;
    let mut prev = spec.mu(lo);
    for k in 1..=SCAN {
        let x = lo + (hi - lo) * k as f64 / SCAN as f64;
        let g = spec.mu(x);
        if (prev == 0.0) || (g != 0.0 && (g > 0.0) != (prev > 0.0)) {
            changes.push((prev_x, x));
        }
        prev_x = x;
        prev = g;
    }
    match changes.len() {
        0 => Err(Error::NoRoot { lo, hi }),
        1 => {
            let (a, b) = changes[0];
            let xi = bisect(|x| spec.mu(x), a, b);
            if spec.mu(xi).abs() > ROOT_TOL {
                return Err(Error::NonFinite(format!("bisection stalled with |mu(xi)| = {:e}", spec.mu(xi).abs())));
            }
            Ok(xi)
        }
        count => Err(Error::AmbiguousRoot { lo, hi, count }),
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub clause: String,
    pub passed: bool,
    /// Worst sampled value of the clause's test quantity.
    pub worst_value: f64,
    pub witness_x: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub family: String,
    pub n_samples: usize,
    pub l_val: f64,
    pub xi: f64,
    pub passed: bool,
    pub clauses: Vec<ClauseReport>,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<String> {
        self.clauses
            .iter()
            .filter(|c| !c.passed)
            .map(|c| match c.witness_x {
                Some(x) => format!("{} fails at x = {x} ({})", c.clause, c.detail),
                None => format!("{} fails ({})", c.clause, c.detail),
            })
            .collect()
    }
}

fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = g(a) + g(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Samples every structural clause on `(0, l_val]` and returns the per-clause report.
///
/// Fails with [`Error::AssumptionViolated`] (carrying the full report) when any
/// clause does not hold.
pub fn validate_assumptions(spec: &PotentialSpec, n_samples: usize, l_val: f64) -> Result<ValidationReport> {
    if n_samples < 100 {
        return Err(Error::InvalidInput(format!("n_samples must be >= 100, got {n_samples}")));
    }
    if !(l_val.is_finite() && l_val > 0.0) {
        return Err(Error::InvalidInput(format!("L_val must be positive, got {l_val}")));
    }
    if l_val > spec.support_limit() {
        return Err(Error::InvalidInput(format!(
            "L_val = {l_val} exceeds the tabulated range {}",
            spec.support_limit()
        )));
    }
    let xs: Vec<f64> = (1..=n_samples).map(|k| l_val * k as f64 / n_samples as f64).collect();

    let worst = |values: &mut dyn Iterator<Item = (f64, f64)>, pick_max: bool| -> (f64, f64) {
        let mut best = (f64::NAN, if pick_max { f64::NEG_INFINITY } else { f64::INFINITY });
        for (x, v) in values {
            let better = if v.is_nan() {
                true
            } else if pick_max {
                v > best.1
            } else {
                v < best.1
            };
            if better && !best.1.is_nan() {
                best = (x, v);
            }
        }
        best
    };

    let mut clauses = Vec::new();

    let (x, v) = worst(&mut xs.iter().map(|&x| (x, (spec.mu(x) - spec.mu(-x)).abs())), true);
    clauses.push(ClauseReport {
        clause: "mu_even".into(),
        passed: v <= PARITY_TOL,
        worst_value: v,
        witness_x: Some(x),
        detail: format!("max |mu(x) - mu(-x)| = {v:e}"),
    });

    let (x, v) = worst(&mut xs.iter().map(|&x| (x, (spec.f(x) + spec.f(-x)).abs())), true);
    clauses.push(ClauseReport {
        clause: "f_odd".into(),
        passed: v <= PARITY_TOL,
        worst_value: v,
        witness_x: Some(x),
        detail: format!("max |f(x) + f(-x)| = {v:e}"),
    });

    let (x, v) = worst(&mut xs.iter().map(|&x| (x, spec.mu_prime(x))), true);
    clauses.push(ClauseReport {
        clause: "mu_decreasing".into(),
        passed: v < 0.0,
        worst_value: v,
        witness_x: Some(x),
        detail: format!("max mu'(x) on (0, L_val] = {v:e}"),
    });

    let (x, v) = worst(&mut xs.iter().map(|&x| (x, spec.f(x))), false);
    clauses.push(ClauseReport {
        clause: "f_positive".into(),
        passed: v > 0.0,
        worst_value: v,
        witness_x: Some(x),
        detail: format!("min f(x) on (0, L_val] = {v:e}"),
    });

    // Boundedness proxies sample well beyond the validation window (within the data range).
    let far = (8.0 * l_val).min(spec.support_limit());
    let far_xs: Vec<f64> = (0..=4 * n_samples).map(|k| far * k as f64 / (4 * n_samples) as f64).collect();
    for (name, g) in [
        ("mu_bounded", &(|x: f64| spec.mu(x).abs()) as &dyn Fn(f64) -> f64),
        ("f_bounded", &|x: f64| spec.f(x).abs()),
    ] {
        let (x, v) = worst(&mut far_xs.iter().map(|&x| (x, g(x))), true);
        clauses.push(ClauseReport {
            clause: name.into(),
            passed: v.is_finite() && v <= 1e12,
            worst_value: v,
            witness_x: Some(x),
            detail: format!("max |.| on [0, {far}] = {v:e}"),
        });
    }

    // Integrability proxy: mass of |f| on dyadic shells [2^k L, 2^{k+1} L] must decay geometrically.
    let shells: Vec<(f64, f64)> = if spec.support_limit().is_finite() {
        Vec::new()
    } else {
        (0..7)
            .map(|k| {
                let a = l_val * 2f64.powi(k);
                (a, simpson(|x| spec.f(x).abs(), a, 2.0 * a, 256))
            })
            .collect()
    };
    if shells.is_empty() {
        clauses.push(ClauseReport {
            clause: "f_integrable".into(),
            passed: true,
            worst_value: 0.0,
            witness_x: None,
            detail: "tabulated data has compact support; tail proxy not applicable".into(),
        });
    } else {
        let m = shells.len();
        let (a_last, t_last) = shells[m - 1];
        let t_prev = shells[m - 2].1;
        let t_prev2 = shells[m - 3].1;
        let decays = t_last <= 0.75 * t_prev && t_prev <= 0.75 * t_prev2;
        let negligible = t_last < 1e-14;
        let ratio = if t_prev > 0.0 { t_last / t_prev } else { 0.0 };
        clauses.push(ClauseReport {
            clause: "f_integrable".into(),
            passed: decays || negligible,
            worst_value: ratio,
            witness_x: Some(a_last),
            detail: format!("tail shell masses {:?}; last ratio {ratio:.4}", shells.iter().map(|s| s.1).collect::<Vec<_>>()),
        });
    }

    let xi = spec.xi();
    let mu_xi = spec.mu(xi).abs();
    let slope = spec.mu_prime(-xi);
    clauses.push(ClauseReport {
        clause: "mu_root".into(),
        passed: mu_xi <= ROOT_TOL && slope > 0.0 && xi > 0.0,
        worst_value: mu_xi,
        witness_x: Some(xi),
        detail: format!("|mu(xi)| = {mu_xi:e}, mu'(-xi) = {slope}"),
    });

    let passed = clauses.iter().all(|c| c.passed);
    let report = ValidationReport {
        family: spec.family().to_string(),
        n_samples,
        l_val,
        xi,
        passed,
        clauses,
    };
    if passed {
        Ok(report)
    } else {
        Err(Error::AssumptionViolated {
            failures: report.failures(),
            report: Box::new(report),
        })
    }
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// `a_*`
    pub a_star_lower: f64,
    /// `a^*`
    pub a_star_upper: f64,
    pub argmin_x: f64,
    pub argmax_x: f64,
    pub quadrature_n: usize,
    pub refinement_tol: f64,
}

/// Cumulative integrals of `|f| sqrt(mu)` over `[-xi, 0]` in the variable
/// `u = sqrt(x + xi)`, which removes the square-root singularity at `-xi`.
struct CornerIntegral<'a> {
    spec: &'a PotentialSpec,
    hu: f64,
    us: Vec<f64>,
    /// `∫_{-xi}^{x(u_k)}`
    prefix: Vec<f64>,
    /// `∫_{x(u_k)}^{0}`
    suffix: Vec<f64>,
}

impl<'a> CornerIntegral<'a> {
    fn new(spec: &'a PotentialSpec, n: usize) -> Self {
        let n = n + n % 2;
        let umax = spec.xi().sqrt();
        let hu = umax / n as f64;
        let us: Vec<f64> = (0..=n).map(|k| k as f64 * hu).collect();
        let g: Vec<f64> = us.iter().map(|&u| Self::integrand(spec, u)).collect();
        let mut prefix = vec![0.0; n + 1];
        for j in (0..n).step_by(2) {
            prefix[j + 1] = prefix[j] + hu / 12.0 * (5.0 * g[j] + 8.0 * g[j + 1] - g[j + 2]);
            prefix[j + 2] = prefix[j] + hu / 3.0 * (g[j] + 4.0 * g[j + 1] + g[j + 2]);
        }
        let mut suffix = vec![0.0; n + 1];
        for j in (2..=n).rev().step_by(2) {
            suffix[j - 1] = suffix[j] + hu / 12.0 * (5.0 * g[j] + 8.0 * g[j - 1] - g[j - 2]);
            suffix[j - 2] = suffix[j] + hu / 3.0 * (g[j] + 4.0 * g[j - 1] + g[j - 2]);
        }
        Self {
            spec,
            hu,
            us,
            prefix,
            suffix,
        }
    }

    fn integrand(spec: &PotentialSpec, u: f64) -> f64 {
        let x = -spec.xi() + u * u;
        spec.f(x).abs() * spec.mu(x).max(0.0).sqrt() * 2.0 * u
    }

    fn x_of(&self, u: f64) -> f64 {
        -self.spec.xi() + u * u
    }

    fn partial(&self, a: f64, b: f64) -> f64 {
        if b == a {
            0.0
        } else {
            simpson(|u| Self::integrand(self.spec, u), a, b, 8)
        }
    }

    fn from_left(&self, u: f64) -> f64 {
        let k = ((u / self.hu).floor() as usize).min(self.us.len() - 1);
        self.prefix[k] + self.partial(self.us[k], u)
    }

    fn to_right(&self, u: f64) -> f64 {
        let k = ((u / self.hu).ceil() as usize).min(self.us.len() - 1);
        self.suffix[k] + self.partial(u, self.us[k])
    }

    /// Quotient defining `a_*` at `x(u)`.
    fn lower(&self, u: f64) -> (f64, f64) {
        let mu = self.spec.mu(self.x_of(u)).max(0.0);
        let den = 3.0 * self.from_left(u);
        (SQRT_2 * mu.powf(1.5) / den, den)
    }

    /// Quotient defining `a^*` at `x(u)`.
    fn upper(&self, u: f64) -> (f64, f64) {
        let mu0 = self.spec.mu(0.0).max(0.0);
        let mu = self.spec.mu(self.x_of(u)).max(0.0);
        let den = 3.0 * self.to_right(u);
        (SQRT_2 * (mu0.powf(1.5) - mu.powf(1.5)) / den, den)
    }
}

/// Golden-section search for the minimum of `q` on `[a, b]`; non-finite
/// values are treated as `+inf` so the search never settles on a 0/0 point.
fn golden_min(q: impl Fn(f64) -> f64, mut a: f64, mut b: f64, done: impl Fn(f64, f64) -> bool) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |u: f64| {
        let v = q(u);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..200 {
        if done(a, b) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Computes `a_*` and `a^*` (with `sqrt(mu)` inside both integrals).
///
/// The quotients are scanned at every quadrature node away from their 0/0
/// endpoint (the excluded band is `xi/quad_n` wide) and the best node is
/// polished by golden-section search to `refine_tol` in `x`.
pub fn compute_thresholds(spec: &PotentialSpec, quad_n: usize, refine_tol: f64) -> Result<ThresholdReport> {
    if quad_n < 200 {
        return Err(Error::InvalidInput(format!("quad_n must be >= 200, got {quad_n}")));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::InvalidInput(format!("refine_tol must be positive, got {refine_tol}")));
    }
    if !(spec.mu_prime_at_corner() > 0.0) {
        return Err(Error::InvalidSpec("mu'(-xi) must be positive".into()));
    }
    let xi = spec.xi();
    let ci = CornerIntegral::new(spec, quad_n);
    let n = ci.us.len() - 1;
    let delta = xi / quad_n as f64;
    let done = |a: f64, b: f64| (ci.x_of(b) - ci.x_of(a)).abs() <= refine_tol;

    let check = |u: f64, (q, den): (f64, f64)| -> Result<f64> {
        let x = ci.x_of(u);
        if den.abs() < QUOTIENT_FLOOR {
            return Err(Error::DegenerateQuotient { x, denominator: den });
        }
        if !q.is_finite() {
            return Err(Error::NonFiniteQuotient { x });
        }
        Ok(q)
    };

    // a_* : inf over (-xi, 0]
    let mut best_lo = (usize::MAX, f64::INFINITY);
    for k in 0..=n {
        let u = ci.us[k];
        if ci.x_of(u) < -xi + delta {
            continue;
        }
        let q = check(u, ci.lower(u))?;
        if q < best_lo.1 {
            best_lo = (k, q);
        }
    }
    let (k, q_node) = best_lo;
    let a = if k > 0 { ci.us[k - 1] } else { 0.0 };
    let b = ci.us[(k + 1).min(n)];
    let (u_ref, q_ref) = golden_min(
        |u| {
            let (q, den) = ci.lower(u);
            if den.abs() < QUOTIENT_FLOOR {
                f64::INFINITY
            } else {
                q
            }
        },
        a,
        b,
        done,
    );
    let (argmin_u, a_lower) = if q_ref < q_node { (u_ref, q_ref) } else { (ci.us[k], q_node) };

    // a^* : sup over [-xi, 0)
    let mut best_up = (usize::MAX, f64::NEG_INFINITY);
    for k in 0..=n {
        let u = ci.us[k];
        if ci.x_of(u) > -delta {
            continue;
        }
        let q = check(u, ci.upper(u))?;
        if q > best_up.1 {
            best_up = (k, q);
        }
    }
    let (k, q_node) = best_up;
    let a = if k > 0 { ci.us[k - 1] } else { 0.0 };
    let b = if k < n { ci.us[k + 1] } else { ci.us[n] };
    let (u_ref, neg_q) = golden_min(
        |u| {
            let (q, den) = ci.upper(u);
            if den.abs() < QUOTIENT_FLOOR {
                f64::INFINITY
            } else {
                -q
            }
        },
        a,
        b,
        done,
    );
    let (argmax_u, a_upper) = if -neg_q > q_node { (u_ref, -neg_q) } else { (ci.us[k], q_node) };

    Ok(ThresholdReport {
        a_star_lower: a_lower,
        a_star_upper: a_upper,
        argmin_x: ci.x_of(argmin_u),
        argmax_x: ci.x_of(argmax_u),
        quadrature_n: quad_n,
        refinement_tol: refine_tol,
    })
}

// ---------------------------------------------------------------------------
// alpha map
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaValue {
    pub alpha: f64,
    pub a: f64,
}

/// `alpha = a f(-xi) / (sqrt(2) mu'(-xi))`.
pub fn alpha_of(spec: &PotentialSpec, a: f64) -> Result<AlphaValue> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
    }
    let slope = spec.mu_prime_at_corner();
    if !(slope > 0.0) {
        return Err(Error::InvalidSpec(format!("mu'(-xi) = {slope} must be positive")));
    }
    Ok(AlphaValue {
        alpha: a * spec.f_at_corner() / (SQRT_2 * slope),
        a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn xi_of_builtin_families() {
        let r = PotentialSpec::rational_half_slope();
        assert!((find_xi(&r, (0.5, 2.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((r.xi() - 1.0).abs() < 1e-15);

        let c = PotentialSpec::builtin(MuFamily::Cosine, ForcingFamily::HalfSlope);
        let xi = find_xi(&c, (1.0, 2.0)).unwrap();
        assert!((xi - FRAC_PI_2).abs() < 1e-15);
        assert!(c.mu(xi).abs() <= ROOT_TOL);

        let g = PotentialSpec::builtin(MuFamily::GaussQuadratic, ForcingFamily::XGauss);
        assert!((g.xi() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn find_xi_errors() {
        let r = PotentialSpec::rational_half_slope();
        assert!(matches!(find_xi(&r, (1.5, 3.0)), Err(Error::NoRoot { .. })));
        let c = PotentialSpec::builtin(MuFamily::Cosine, ForcingFamily::HalfSlope);
        assert!(matches!(
            find_xi(&c, (1.0, 10.0)),
            Err(Error::AmbiguousRoot { count: 3, .. })
        ));
    }

    #[test]
    fn hand_coded_derivatives_match_finite_differences() {
        for spec in [
            PotentialSpec::rational_half_slope(),
            PotentialSpec::rational_x_gauss(),
            PotentialSpec::builtin(MuFamily::GaussQuadratic, ForcingFamily::HalfSlope),
            PotentialSpec::builtin(MuFamily::Cosine, ForcingFamily::Linear),
        ] {
            for &x in &[-1.7, -0.4, 0.3, 1.1] {
                let h = 1e-6;
                let dmu = (spec.mu(x + h) - spec.mu(x - h)) / (2.0 * h);
                let df = (spec.f(x + h) - spec.f(x - h)) / (2.0 * h);
                assert!((dmu - spec.mu_prime(x)).abs() < 1e-8);
                assert!((df - spec.f_prime(x)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rational_mu_prime_closed_form() {
        let spec = PotentialSpec::rational_half_slope();
        for &x in &[-2.0, -1.0, 0.0, 0.5] {
            let exact = -4.0 * x / ((1.0 + x * x) * (1.0 + x * x));
            assert_eq!(spec.mu_prime(x), exact);
            assert_eq!(spec.f(x), -exact / 2.0);
        }
        assert_eq!(spec.mu_prime_at_corner(), 1.0);
        assert_eq!(spec.f_at_corner(), -0.5);
    }

    #[test]
    fn validation_passes_for_builtin_specs() {
        for spec in [PotentialSpec::rational_half_slope(), PotentialSpec::rational_x_gauss()] {
            let r = validate_assumptions(&spec, 400, 3.0).unwrap();
            assert!(r.passed);
            assert_eq!(r.clauses.len(), 8);
        }
    }

    #[test]
    fn linear_forcing_fails_integrability() {
        let spec = PotentialSpec::builtin(MuFamily::Rational, ForcingFamily::Linear);
        match validate_assumptions(&spec, 200, 2.0) {
            Err(Error::AssumptionViolated { failures, report }) => {
                assert_eq!(failures.len(), 1);
                assert!(failures[0].starts_with("f_integrable"));
                let c = report.clauses.iter().find(|c| c.clause == "f_integrable").unwrap();
                assert!(!c.passed);
                assert!(c.witness_x.is_some());
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn gauss_quadratic_mu_increases_past_sqrt2() {
        let spec = PotentialSpec::builtin(MuFamily::GaussQuadratic, ForcingFamily::XGauss);
        let err = validate_assumptions(&spec, 300, 3.0).unwrap_err();
        let Error::AssumptionViolated { report, .. } = err else {
            panic!()
        };
        let c = report.clauses.iter().find(|c| c.clause == "mu_decreasing").unwrap();
        assert!(!c.passed);
        assert!(c.witness_x.unwrap() > 2f64.sqrt());
    }

    #[test]
    fn small_sample_count_rejected() {
        let spec = PotentialSpec::rational_half_slope();
        assert!(matches!(validate_assumptions(&spec, 99, 2.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn half_slope_thresholds_are_sqrt2() {
        for spec in [
            PotentialSpec::rational_half_slope(),
            PotentialSpec::builtin(MuFamily::GaussQuadratic, ForcingFamily::HalfSlope),
            PotentialSpec::new(
                Family::Builtin {
                    mu: MuFamily::Rational,
                    forcing: ForcingFamily::HalfSlope,
                },
                vec![1.7, 1.0],
                None,
            )
            .unwrap(),
        ] {
            let t = compute_thresholds(&spec, 200, 1e-10).unwrap();
            assert!((t.a_star_lower - SQRT_2).abs() < 1e-6, "{t:?}");
            assert!((t.a_star_upper - SQRT_2).abs() < 1e-6, "{t:?}");
            assert!(t.argmin_x > -spec.xi() && t.argmin_x <= 0.0);
        }
    }

    #[test]
    fn quad_n_precondition() {
        let spec = PotentialSpec::rational_half_slope();
        assert!(matches!(compute_thresholds(&spec, 199, 1e-8), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn alpha_values() {
        let spec = PotentialSpec::rational_half_slope();
        assert!((alpha_of(&spec, SQRT_2).unwrap().alpha + 0.5).abs() < 1e-15);
        assert!((alpha_of(&spec, SQRT_2 / 2.0).unwrap().alpha + 0.25).abs() < 1e-15);
        let tiny = alpha_of(&spec, 1e-12).unwrap().alpha;
        assert!(tiny < 0.0 && tiny > -1e-12);
        assert!(alpha_of(&spec, 0.0).is_err());
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = PotentialSpec::rational_x_gauss();
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(s, r#"{"family":"rational+x-gauss","params":[]}"#);
        let back: PotentialSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back.xi(), spec.xi());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"family":"rational+x-gauss","extra":1}"#).is_err());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"family":"nope+x-gauss"}"#).is_err());
    }

    #[test]
    fn tabulated_spec_tracks_builtin() {
        let builtin = PotentialSpec::rational_half_slope();
        let x: Vec<f64> = (0..=600).map(|k| k as f64 * 0.005).collect();
        let table = Table {
            mu: x.iter().map(|&t| builtin.mu(t)).collect(),
            f: x.iter().map(|&t| builtin.f(t)).collect(),
            x,
        };
        let spec = PotentialSpec::tabulated(table).unwrap();
        assert!((spec.xi() - 1.0).abs() < 1e-8);
        for &t in &[-2.3, -0.7, 0.2, 1.4] {
            assert!((spec.mu(t) - builtin.mu(t)).abs() < 1e-8);
            assert!((spec.f(t) - builtin.f(t)).abs() < 1e-8);
            assert!((spec.mu_prime(t) - builtin.mu_prime(t)).abs() < 1e-5);
        }
        let r = validate_assumptions(&spec, 300, 2.5).unwrap();
        assert!(r.passed);
    }
}
