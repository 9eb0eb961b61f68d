//! One-dimensional grids: uniform, and symmetric graded grids that cluster
//! nodes in bands around prescribed layer centers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub left: f64,
    pub right: f64,
    pub nodes: Vec<f64>,
    pub spacing: Vec<f64>,
}

/// A refinement band of the symmetric graded grid. The local spacing near
/// `±center` is about `h` and relaxes to the base spacing over `width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub center: f64,
    pub h: f64,
    pub width: f64,
}

impl Grid1D {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidInput(format!("a grid needs at least 3 nodes, got {}", nodes.len())));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("grid nodes must be finite".into()));
        }
        let spacing: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(i) = spacing.iter().position(|&h| !(h > 0.0)) {
            return Err(Error::InvalidInput(format!("grid nodes not strictly increasing at index {i}")));
        }
        Ok(Self {
            left: nodes[0],
            right: nodes[nodes.len() - 1],
            nodes,
            spacing,
        })
    }

    /// `n` equally spaced nodes including both endpoints.
    pub fn uniform(left: f64, right: f64, n: usize) -> Result<Self> {
        if !(right > left) || n < 3 {
            return Err(Error::InvalidInput(format!("uniform grid on [{left}, {right}] with {n} nodes")));
        }
        let h = (right - left) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| left + i as f64 * h).collect();
        nodes[n - 1] = right;
        Self::from_nodes(nodes)
    }

    /// Grid on `[-half_width, half_width]`, symmetric about 0 (which is a node),
    /// with node density `1/h_base + Σ (1/h_b - 1/h_base) sech²((|x| - c_b)/w_b)`.
    ///
    /// The number of cells on each half is `refine · ceil(∫ density)`, so doubling
    /// `refine` inserts exactly one node in every cell of the coarser grid.
    pub fn symmetric_graded(half_width: f64, h_base: f64, bands: &[Band], refine: usize) -> Result<Self> {
        if !(half_width > 0.0 && h_base > 0.0) || refine == 0 {
            return Err(Error::InvalidInput("graded grid needs positive width, base spacing and refinement".into()));
        }
        for b in bands {
            if !(b.h > 0.0 && b.h <= h_base && b.width > 0.0 && b.center >= 0.0) {
                return Err(Error::InvalidInput(format!("invalid band {b:?}")));
            }
        }
        // Cumulative density from 0. Bands at center 0 contribute their mirror image too.
        let phi = |x: f64| -> f64 {
            let mut acc = x / h_base;
            for b in bands {
                let amp = (1.0 / b.h - 1.0 / h_base) * b.width;
                acc += amp * (((x - b.center) / b.width).tanh() - ((-b.center) / b.width).tanh());
                if b.center > 0.0 {
                    acc += amp * (((x + b.center) / b.width).tanh() - (b.center / b.width).tanh());
                }
            }
            acc
        };
        let density = |x: f64| -> f64 {
            let mut acc = 1.0 / h_base;
            for b in bands {
                let amp = 1.0 / b.h - 1.0 / h_base;
                let s = 1.0 / ((x - b.center) / b.width).cosh();
                acc += amp * s * s;
                if b.center > 0.0 {
                    let s = 1.0 / ((x + b.center) / b.width).cosh();
                    acc += amp * s * s;
                }
            }
            acc
        };
        let total = phi(half_width);
        let cells = refine * (total.ceil() as usize).max(2);
        let mut half = Vec::with_capacity(cells + 1);
        half.push(0.0);
        let mut prev = 0.0;
        for k in 1..cells {
            let target = total * k as f64 / cells as f64;
            // phi is increasing, so safeguarded Newton inside [prev, half_width] converges.
            let mut lo = prev;
            let mut hi = half_width;
            let mut x = prev + (target - phi(prev)) / density(prev);
            for _ in 0..100 {
                if !(x > lo && x < hi) {
                    x = 0.5 * (lo + hi);
                }
                let g = phi(x) - target;
                if g > 0.0 {
                    hi = x;
                } else {
                    lo = x;
                }
                let step = g / density(x);
                x -= step;
                if step.abs() <= 1e-15 * half_width.max(1.0) {
                    break;
                }
            }
            half.push(x);
            prev = x;
        }
        half.push(half_width);
        let mut nodes: Vec<f64> = half[1..].iter().rev().map(|x| -x).collect();
        nodes.extend_from_slice(&half);
        Self::from_nodes(nodes)
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Trapezoid weights: half the sum of the adjacent spacings.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.n();
        let mut w = vec![0.0; n];
        for (i, &h) in self.spacing.iter().enumerate() {
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        w
    }

    /// Largest cell spacing among cells meeting `[c - r, c + r]`.
    pub fn max_spacing_near(&self, c: f64, r: f64) -> f64 {
        self.spacing
            .iter()
            .enumerate()
            .filter(|(i, _)| self.nodes[i + 1] >= c - r && self.nodes[*i] <= c + r)
            .map(|(_, &h)| h)
            .fold(0.0, f64::max)
    }

    /// Layer-resolution rule: spacing `<= eps/8` within `4 eps` of each layer
    /// center and `<= eps^{2/3}/8` within `4 eps^{2/3}` of `±xi`.
    pub fn resolves_layers(&self, epsilon: f64, centers: &[f64], xi: f64) -> bool {
        let corner = epsilon.powf(2.0 / 3.0);
        centers
            .iter()
            .all(|&c| self.max_spacing_near(c, 4.0 * epsilon) <= epsilon / 8.0)
            && [-xi, xi]
                .iter()
                .all(|&c| self.max_spacing_near(c, 4.0 * corner) <= corner / 8.0)
    }

    /// True when the nodes are mirror images about 0 (bitwise).
    pub fn is_symmetric(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| self.nodes[i] == -self.nodes[n - 1 - i])
    }

    /// The sub-grid of nodes with `x <= 0` (requires 0 to be a node).
    pub fn left_half(&self) -> Result<Self> {
        let k = self
            .nodes
            .iter()
            .position(|&x| x == 0.0)
            .ok_or_else(|| Error::InvalidInput("0 is not a grid node".into()))?;
        Self::from_nodes(self.nodes[..=k].to_vec())
    }
}

/// Number of strict sign alternations in `values`, ignoring entries with `|v| < floor`.
pub fn sign_changes(values: &[f64], floor: f64) -> usize {
    let mut count = 0;
    let mut last: Option<bool> = None;
    for &v in values {
        if v.abs() < floor {
            continue;
        }
        let positive = v > 0.0;
        if let Some(prev) = last {
            if prev != positive {
                count += 1;
            }
        }
        last = Some(positive);
    }
    count
}

/// Linear-interpolation root between the unique bracketing pair of significant values.
pub fn unique_zero(xs: &[f64], values: &[f64], floor: f64) -> Result<f64> {
    let changes = sign_changes(values, floor);
    if changes != 1 {
        return Err(Error::Topology { sign_changes: changes });
    }
    let mut last: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.abs() < floor {
            continue;
        }
        if let Some(j) = last {
            if (values[j] > 0.0) != (v > 0.0) {
                let (x0, x1, y0, y1) = (xs[j], xs[i], values[j], values[i]);
                return Ok(x0 + (x1 - x0) * y0 / (y0 - y1));
            }
        }
        last = Some(i);
    }
    unreachable!("one sign change was counted")
}

/// Zero of the local cubic interpolant on the cell where the unique sign change occurs.
///
/// Falls back to the linear zero when the bracketing values are not adjacent
/// (entries below `floor` in between) or there are fewer than 4 nodes.
pub fn unique_zero_cubic(xs: &[f64], values: &[f64], floor: f64) -> Result<f64> {
    let linear = unique_zero(xs, values, floor)?;
    let n = xs.len();
    let j = crate::interp::locate_cell(xs, linear);
    if n < 4 || j + 1 >= n || (values[j] > 0.0) == (values[j + 1] > 0.0) || values[j].abs() < floor || values[j + 1].abs() < floor {
        return Ok(linear);
    }
    let (mut lo, mut hi) = (xs[j], xs[j + 1]);
    let p = |x: f64| crate::interp::local_cubic(xs, values, x);
    let lo_positive = values[j] > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (p(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints_and_spacing() {
        let g = Grid1D::uniform(-2.0, 3.0, 11).unwrap();
        assert_eq!(g.nodes[0], -2.0);
        assert_eq!(g.nodes[10], 3.0);
        assert!(g.spacing.iter().all(|&h| (h - 0.5).abs() < 1e-15));
        let w = g.trapezoid_weights();
        assert!((w.iter().sum::<f64>() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_increasing_nodes() {
        assert!(Grid1D::from_nodes(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Grid1D::uniform(1.0, 0.0, 10).is_err());
    }

    #[test]
    fn graded_grid_is_symmetric_and_resolves_bands() {
        let eps: f64 = 0.01;
        let corner = eps.powf(2.0 / 3.0);
        let bands = [
            Band { center: 0.0, h: eps / 20.0, width: 6.0 * eps },
            Band { center: 1.0, h: corner / 20.0, width: 6.0 * corner },
        ];
        let g = Grid1D::symmetric_graded(2.0, 0.01, &bands, 1).unwrap();
        assert!(g.is_symmetric());
        assert_eq!(g.n() % 2, 1);
        assert_eq!(g.nodes[g.n() / 2], 0.0);
        assert!(g.resolves_layers(eps, &[0.0], 1.0));
        assert!(g.max_spacing_near(1.8, 0.05) > 3.0 * g.max_spacing_near(1.0, 0.01));
    }

    #[test]
    fn refinement_nests_the_coarse_grid() {
        let bands = [Band { center: 0.7, h: 0.002, width: 0.05 }];
        let coarse = Grid1D::symmetric_graded(1.5, 0.02, &bands, 1).unwrap();
        let fine = Grid1D::symmetric_graded(1.5, 0.02, &bands, 2).unwrap();
        assert_eq!(fine.n(), 2 * coarse.n() - 1);
        for (i, &x) in coarse.nodes.iter().enumerate() {
            assert!((fine.nodes[2 * i] - x).abs() < 1e-13);
        }
    }

    #[test]
    fn left_half_ends_at_zero() {
        let g = Grid1D::symmetric_graded(1.0, 0.1, &[], 1).unwrap();
        let h = g.left_half().unwrap();
        assert_eq!(h.right, 0.0);
        assert_eq!(h.left, -1.0);
        assert!(Grid1D::uniform(-1.0, 1.0, 4).unwrap().left_half().is_err());
    }

    #[test]
    fn sign_change_counting() {
        assert_eq!(sign_changes(&[1.0, 2.0, 0.5], 1e-12), 0);
        assert_eq!(sign_changes(&[1.0, 1e-13, -1e-13, 2.0], 1e-12), 0);
        assert_eq!(sign_changes(&[-1.0, 0.0, 3.0, -2.0], 1e-12), 2);
        let xs = [0.0, 0.5, 1.0];
        let z = unique_zero(&xs, &[-1.0, -1.0, 3.0], 1e-12).unwrap();
        assert!((z - 0.625).abs() < 1e-15);
        assert!(matches!(unique_zero(&xs, &[1.0, 1.0, 1.0], 1e-12), Err(Error::Topology { sign_changes: 0 })));
    }
}
