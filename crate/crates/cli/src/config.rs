use std::path::{Path, PathBuf};

use serde::Deserialize;

use shadow_kink::asymptotics::DivisionConfig;
use shadow_kink::painleve::BacklundConfig;
use shadow_kink::{
    alpha_of, compute_thresholds, Branch, Direction, Error, PainleveConfig, PotentialSpec, Result, SolverConfig,
};

/// Which threshold a relative forcing amplitude refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRef {
    AStarLower,
    AStarUpper,
}

/// A forcing amplitude, either absolute or as a multiple of a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Absolute(f64),
    Relative { relative_to: ThresholdRef, factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdParams {
    pub quad_n: usize,
    pub refine_tol: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            quad_n: 2000,
            refine_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationParams {
    pub n_samples: usize,
    /// Upper end of the sampled interval; `None` means `xi + 1`.
    pub l_val: Option<f64>,
}

impl Default for ValidationParams {
    fn default() -> Self {
        Self {
            n_samples: 2000,
            l_val: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumParams {
    #[serde(alias = "T")]
    pub t: f64,
    pub k: usize,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self { t: 10.0, k: 5 }
    }
}

/// One JSON file describing a run. Every block is optional; commands check
/// for the inputs they need.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "PotentialSpec::rational_half_slope")]
    pub spec: PotentialSpec,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub epsilon_ladder: Option<Vec<f64>>,
    #[serde(default)]
    pub a: Option<Amplitude>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub branch: Option<Branch>,
    #[serde(default)]
    pub direction: Option<Direction>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub pii: PainleveConfig,
    #[serde(default)]
    pub backlund: BacklundConfig,
    #[serde(default)]
    pub division: DivisionConfig,
    #[serde(default)]
    pub thresholds: ThresholdParams,
    #[serde(default)]
    pub validation: ValidationParams,
    #[serde(default)]
    pub spectrum: SpectrumParams,
    #[serde(default)]
    pub s_window: Option<(f64, f64)>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

pub const DEFAULT_LADDER: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
pub const DEFAULT_S_WINDOW: (f64, f64) = (-5.0, 5.0);

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn epsilon(&self) -> Result<f64> {
        let e = self
            .epsilon
            .ok_or_else(|| Error::InvalidInput("epsilon is required".into()))?;
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {e}")));
        }
        Ok(e)
    }

    pub fn ladder(&self) -> Result<Vec<f64>> {
        let ladder = self.epsilon_ladder.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
        if ladder.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InvalidInput("epsilon_ladder entries must be positive".into()));
        }
        Ok(ladder)
    }

    /// The absolute forcing amplitude, resolving thresholds when needed.
    pub fn amplitude(&self) -> Result<f64> {
        let a = match self.a.ok_or_else(|| Error::InvalidInput("a is required".into()))? {
            Amplitude::Absolute(a) => a,
            Amplitude::Relative { relative_to, factor } => {
                let t = compute_thresholds(&self.spec, self.thresholds.quad_n, self.thresholds.refine_tol)?;
                factor
                    * match relative_to {
                        ThresholdRef::AStarLower => t.a_star_lower,
                        ThresholdRef::AStarUpper => t.a_star_upper,
                    }
            }
        };
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
        }
        Ok(a)
    }

    /// `alpha` as given, or derived from `a` when only the amplitude is set.
    pub fn alpha(&self) -> Result<f64> {
        match (self.alpha, self.a) {
            (Some(alpha), _) if alpha.is_finite() => Ok(alpha),
            (Some(alpha), _) => Err(Error::InvalidInput(format!("alpha must be finite, got {alpha}"))),
            (None, Some(_)) => Ok(alpha_of(&self.spec, self.amplitude()?)?.alpha),
            (None, None) => Err(Error::InvalidInput("alpha or a is required".into())),
        }
    }

    pub fn branch(&self) -> Result<Branch> {
        self.branch.ok_or_else(|| Error::InvalidInput("branch is required".into()))
    }

    pub fn direction(&self) -> Result<Direction> {
        self.direction
            .ok_or_else(|| Error::InvalidInput("direction is required".into()))
    }

    pub fn s_window(&self) -> Result<(f64, f64)> {
        let w = self.s_window.unwrap_or(DEFAULT_S_WINDOW);
        if !(w.0.is_finite() && w.1.is_finite() && w.0 < w.1) {
            return Err(Error::InvalidInput(format!("s_window must be an increasing pair, got {w:?}")));
        }
        Ok(w)
    }
}
