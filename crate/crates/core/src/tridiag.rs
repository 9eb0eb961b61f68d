//! Tridiagonal linear algebra: the Thomas solve used by every Newton iteration
//! here, the LDLᵀ definiteness test, and Sturm-sequence bisection for the
//! lowest eigenvalues of a symmetric tridiagonal matrix.

/// Solves `A x = rhs` for tridiagonal `A` without pivoting.
///
/// `sub[i]` multiplies `x[i-1]` in row `i` (`sub[0]` is ignored), `sup[i]`
/// multiplies `x[i+1]` (`sup[n-1]` is ignored). Returns `None` on a vanishing
/// or non-finite pivot.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 || !piv.is_finite() {
        return None;
    }
    c[0] = if n > 1 { sup[0] / piv } else { 0.0 };
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return None;
        }
        if i + 1 < n {
            c[i] = sup[i] / piv;
        }
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// True when every LDLᵀ pivot of `A + shift·I` is strictly positive.
    pub fn is_positive_definite(&self, shift: f64) -> bool {
        let mut q = self.diag.first().copied().unwrap_or(1.0) + shift;
        if !(q > 0.0) {
            return false;
        }
        for i in 1..self.diag.len() {
            q = self.diag[i] + shift - self.off[i - 1] * self.off[i - 1] / q;
            if !(q > 0.0) {
                return false;
            }
        }
        true
    }

    /// Solves `A x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.diag.len();
        let mut sub = vec![0.0; n];
        let mut sup = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            sup[i] = self.off[i];
            sub[i + 1] = self.off[i];
        }
        solve_tridiagonal(&sub, &self.diag, &sup, rhs)
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn sturm_count(&self, lambda: f64) -> usize {
        // Pivots that underflow to zero are nudged to keep the recurrence finite;
        // the count is unaffected because a zero pivot marks an eigenvalue at lambda.
        const GUARD: f64 = 1e-300;
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1] / q
            };
            q = self.diag[i] - lambda - coupling;
            if q == 0.0 {
                q = -GUARD;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues in ascending order, each bisected to
    /// absolute width `tol` (relative to the spectral radius for huge spectra).
    pub fn lowest_eigenvalues(&self, k: usize, tol: f64) -> Vec<f64> {
        let n = self.diag.len();
        let k = k.min(n);
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(1.0);
        let width = tol.max(4.0 * f64::EPSILON * scale);
        (0..k)
            .map(|j| {
                // smallest lambda with sturm_count(lambda) > j
                let mut lo = glo - 1.0;
                let mut hi = ghi + 1.0;
                while hi - lo > width {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.sturm_count(mid) > j {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn thomas_matches_dense_product() {
        let sub = [0.0, 1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let sup = [1.0, 0.3, 1.2, 0.0];
        let rhs = [1.0, 2.0, 3.0, 4.0];
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for i in 0..4 {
            let mut r = diag[i] * x[i];
            if i > 0 {
                r += sub[i] * x[i - 1];
            }
            if i < 3 {
                r += sup[i] * x[i + 1];
            }
            assert!((r - rhs[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        assert!(solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let m = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        let ev = m.lowest_eigenvalues(4, 1e-14);
        for (j, &lam) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * (((j + 1) as f64) * PI / (n as f64 + 1.0)).cos();
            assert!((lam - exact).abs() < 1e-12, "{j}: {lam} vs {exact}");
        }
        assert!(m.is_positive_definite(0.0));
        assert!(!m.is_positive_definite(-ev[0] - 1e-9));
    }

    #[test]
    fn sturm_count_brackets_each_eigenvalue() {
        let m = SymTridiagonal::new(vec![1.0, -3.0, 2.0], vec![0.5, 0.25]);
        let ev = m.lowest_eigenvalues(3, 1e-13);
        for (j, &lam) in ev.iter().enumerate() {
            assert_eq!(m.sturm_count(lam - 1e-9), j);
            assert_eq!(m.sturm_count(lam + 1e-9), j + 1);
        }
    }
}
