//! Numerical laboratory for shadow kinks of `eps² v'' + mu v - v³ + eps a f = 0`
//! on the line, the Painlevé-II profiles that describe them near the corner
//! `x = -xi` of the support of `mu`, and the asymptotic diagnostics relating
//! the two.

pub mod airy;
pub mod asymptotics;
pub mod error;
pub mod grid;
pub mod interp;
pub mod io;
pub mod kink;
pub mod model;
pub mod painleve;
pub mod tridiag;

pub use error::{Error, ErrorKind, Result};
pub use grid::Grid1D;
pub use kink::{solve_eta, solve_minimizer, EtaSolution, KinkSolution, SolverConfig};
pub use model::{alpha_of, compute_thresholds, validate_assumptions, PotentialSpec};
pub use painleve::{backlund_step, solve_pii, Branch, Direction, PainleveConfig, PainleveSolution};
