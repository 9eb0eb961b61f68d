//! Airy function `Ai` and its derivative for real arguments `x >= -5`.
//!
//! Maclaurin series below [`SWITCH`], the exponentially scaled asymptotic
//! expansion above it. Both lose about `1e-8` relative accuracy right at the
//! switch (cancellation in the series, truncation of the expansion).

use std::f64::consts::PI;

/// `Ai(0)`
const AI0: f64 = 0.355_028_053_887_817_2;
/// `-Ai'(0)`
const AIP0: f64 = 0.258_819_403_792_806_8;
pub const SWITCH: f64 = 5.5;

fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ t_k with t_k ∝ x^{3k}, g = Σ s_k with s_k ∝ x^{3k+1}
    let (mut t, mut s) = (1.0, x);
    let (mut f, mut g) = (1.0, x);
    let (mut df, mut dg) = (0.0, 1.0);
    for k in 1..200 {
        let kf = k as f64;
        t *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        s *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += t;
        g += s;
        if x != 0.0 {
            df += 3.0 * kf * t / x;
            dg += (3.0 * kf + 1.0) * s / x;
        }
        if t.abs() <= 1e-18 * f.abs() && s.abs() <= 1e-18 * g.abs() {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * df - AIP0 * dg)
}

/// Asymptotic sums `(Σ (-1)^k u_k/zeta^k, Σ (-1)^k v_k/zeta^k)`, truncated at the smallest term.
fn asymptotic_sums(zeta: f64) -> (f64, f64) {
    let mut u = 1.0;
    let mut su = 1.0;
    let mut sv = 1.0;
    let mut prev = f64::INFINITY;
    let mut zk = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zk *= -zeta;
        let tu = u / zk;
        let tv = v / zk;
        if tu.abs() > prev {
            break;
        }
        prev = tu.abs();
        su += tu;
        sv += tv;
        if tu.abs() < 1e-17 && tv.abs() < 1e-17 {
            break;
        }
    }
    (su, sv)
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_ai(x: f64) -> (f64, f64) {
    if x < SWITCH {
        return maclaurin(x);
    }
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (su, sv) = asymptotic_sums(zeta);
    let pre = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.sqrt().sqrt();
    (pre / q * su, -pre * q * sv)
}

/// `Ai'(x)/Ai(x)`, evaluated without forming the exponentially small factors for large `x`.
pub fn airy_log_derivative(x: f64) -> f64 {
    if x < SWITCH {
        let (ai, aip) = maclaurin(x);
        return aip / ai;
    }
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (su, sv) = asymptotic_sums(zeta);
    -x.sqrt() * sv / su
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn reference_values() {
        // (x, Ai, Ai')
        let table = [
            (0.0, 0.355_028_053_887_817_2, -0.258_819_403_792_806_8),
            (1.0, 0.135_292_416_312_881_4, -0.159_147_441_296_793_2),
            (-2.0, 0.227_407_428_201_685_6, 0.618_259_020_741_691_2),
            (2.5, 0.015_725_923_380_470_49, -0.026_250_881_035_903_23),
            (5.0, 1.083_444_281_360_744e-4, -2.474_138_908_684_625e-4),
            (5.5, 3.368_531_190_859_981e-5, -8.046_339_130_556_514e-5),
            (10.0, 1.104_753_255_289_869e-10, -3.520_633_676_738_924e-10),
        ];
        for &(x, ai, aip) in &table {
            let (a, d) = airy_ai(x);
            let rel = if (x - SWITCH).abs() < 1.0 { 5e-8 } else { 1e-9 };
            assert!(close(a, ai, rel), "Ai({x}) = {a} vs {ai}");
            assert!(close(d, aip, rel), "Ai'({x}) = {d} vs {aip}");
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let x = SWITCH;
        let (a1, d1) = maclaurin(x);
        let (a2, d2) = airy_ai(x);
        assert!(close(a1, a2, 1e-7));
        assert!(close(d1, d2, 1e-7));
    }

    #[test]
    fn log_derivative_tends_to_minus_sqrt() {
        for &x in &[15.0, 22.5, 40.0] {
            let r = airy_log_derivative(x);
            let leading = -x.sqrt() - 0.25 / x;
            assert!((r - leading).abs() < 1.0 / x.powf(2.5), "x = {x}");
        }
        let (a, d) = airy_ai(8.0);
        assert!(close(airy_log_derivative(8.0), d / a, 1e-14));
    }
}
