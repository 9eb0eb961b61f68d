//! Interpolation on strictly increasing abscissae.

use crate::tridiag::solve_tridiagonal;

/// Index `i` of the cell `[xs[i], xs[i+1]]` containing `x` (clamped to the ends).
pub fn locate_cell(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    if x <= xs[0] {
        return 0;
    }
    let last = xs.len() - 2;
    if x >= xs[last + 1] {
        return last;
    }
    // partition_point gives the first index with xs[i] > x
    let p = xs.partition_point(|&v| v <= x);
    (p - 1).min(last)
}

pub fn linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = locate_cell(xs, x);
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Cubic Lagrange interpolation through the four nodes around `x`.
///
/// Falls back to the nearest valid stencil at the ends of the grid.
pub fn local_cubic(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n < 4 {
        return linear(xs, ys, x);
    }
    let i = locate_cell(xs, x);
    let start = i.saturating_sub(1).min(n - 4);
    let mut acc = 0.0;
    for j in start..start + 4 {
        let mut w = 1.0;
        for m in start..start + 4 {
            if m != j {
                w *= (x - xs[m]) / (xs[j] - xs[m]);
            }
        }
        acc += w * ys[j];
    }
    acc
}

/// Natural cubic spline.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    /// Returns `None` when the abscissae are not strictly increasing or fewer than 3 points are given.
    pub fn natural(xs: &[f64], ys: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return None;
        }
        let m = n - 2;
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            sub[k] = h0;
            diag[k] = 2.0 * (h0 + h1);
            sup[k] = h1;
            rhs[k] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        let mut second = vec![0.0; n];
        second[1..n - 1].copy_from_slice(&inner);
        Some(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            second,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    /// Evaluates the spline; outside the table the end values are held constant.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.x_min() {
            return self.ys[0];
        }
        if x >= self.x_max() {
            return self.ys[self.ys.len() - 1];
        }
        let i = locate_cell(&self.xs, x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }
}
