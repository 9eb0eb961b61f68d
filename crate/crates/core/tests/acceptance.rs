//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits with status 1 when any criterion fails.

use std::f64::consts::SQRT_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use shadow_kink::asymptotics::{
    compare_blowup, division_diagnostic, outer_report, tanh_layer_check, zero_scaling_study, ScalingStudy,
};
use shadow_kink::kink::{energy, solve_eta, solve_minimizer, KinkSolution, SolverConfig};
use shadow_kink::model::{alpha_of, compute_thresholds, ForcingFamily, MuFamily, PotentialSpec};
use shadow_kink::painleve::{
    backlund_step, linearization_spectrum, solve_pii, tail_report, Branch, Direction, PainleveConfig, Scheme,
};
use shadow_kink::{io, Error};

const LADDER: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
const S_WINDOW: (f64, f64) = (-5.0, 5.0);

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

struct Suite {
    failures: Vec<u32>,
}

impl Suite {
    fn run(&mut self, id: u32, name: &str, budget: Duration, body: impl FnOnce() -> Result<Verdict, Error>) {
        let start = Instant::now();
        let outcome = body();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(v) => (v.passed && elapsed <= budget, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let over = if elapsed > budget {
            format!(" over budget {:.0} s", budget.as_secs_f64())
        } else {
            String::new()
        };
        println!(
            "acceptance {id:>2} {:<28} {} ({:.2} s{over}) {detail}",
            name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !passed {
            self.failures.push(id);
        }
    }
}

fn spec_i() -> PotentialSpec {
    PotentialSpec::rational_half_slope()
}

fn spec_ii() -> PotentialSpec {
    PotentialSpec::rational_x_gauss()
}

fn pii_config() -> PainleveConfig {
    PainleveConfig {
        truncation_check: false,
        ..PainleveConfig::default()
    }
}

fn threshold_exactness() -> Result<Verdict, Error> {
    let mut ok = true;
    let mut parts = Vec::new();
    for mu in [MuFamily::Rational, MuFamily::GaussQuadratic] {
        let spec = PotentialSpec::builtin(mu, ForcingFamily::HalfSlope);
        let t = compute_thresholds(&spec, 2000, 1e-10)?;
        let alpha = alpha_of(&spec, t.a_star_lower)?.alpha;
        let e_a = (t.a_star_lower - SQRT_2).abs();
        let e_alpha = (alpha + 0.5).abs();
        ok &= e_a <= 1e-6 && e_alpha <= 1e-6;
        parts.push(format!("{}: |a_* - √2| = {e_a:.1e}, |alpha + 1/2| = {e_alpha:.1e}", spec.family()));
    }
    Ok(verdict(ok, parts.join("; ")))
}

fn sign_change_structure() -> Result<Verdict, Error> {
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [-0.1, -0.25, -0.4] {
        let sol = solve_pii(alpha, Branch::Minus, &pii_config())?;
        let wide = solve_pii(
            alpha,
            Branch::Minus,
            &PainleveConfig {
                s_minus: 2.0 * sol.s_minus,
                ..pii_config()
            },
        )?;
        let tail = tail_report(&sol);
        let tail_wide = tail_report(&wide);
        let right_ok = tail.right_relative_error.is_some_and(|e| e <= tail.right_tolerance);
        let c_stable = (tail.left_constant - tail_wide.left_constant).abs() <= 0.1 * tail.left_constant.max(tail_wide.left_constant);
        let good = sol.sign_changes == 1 && sol.residual_inf <= 1e-8 && right_ok && c_stable;
        ok &= good;
        parts.push(format!(
            "alpha {alpha}: changes {}, residual {:.1e}, C {:.3}/{:.3}, right {:.1e}",
            sol.sign_changes,
            sol.residual_inf,
            tail.left_constant,
            tail_wide.left_constant,
            tail.right_relative_error.unwrap_or(f64::NAN)
        ));
    }
    Ok(verdict(ok, parts.join("; ")))
}

fn minimality_proxy() -> Result<Verdict, Error> {
    let cases = [
        (-0.1, Branch::Minus),
        (-0.25, Branch::Minus),
        (-0.4, Branch::Minus),
        (0.0, Branch::Plus),
        (-0.25, Branch::Plus),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (alpha, branch) in cases {
        let sol = solve_pii(alpha, branch, &pii_config())?;
        let spec = linearization_spectrum(&sol, 10.0, 1)?;
        let lam = spec.eigenvalues[0];
        ok &= lam >= -1e-6;
        parts.push(format!("{branch:?} {alpha}: {lam:.4}"));
    }
    Ok(verdict(ok, parts.join("; ")))
}

fn zero_scaling(study: &ScalingStudy) -> Verdict {
    let r = &study.report;
    let positive = r.offsets.iter().all(|&o| o > 0.0);
    let exponent_ok = (0.55..=0.80).contains(&r.fitted_exponent) && r.fit_r2 >= 0.98;
    let spread = r.empirical_constant / r.min_scaled_offset;
    let scaled: Vec<String> = r
        .offsets
        .iter()
        .zip(&r.eps_list)
        .map(|(o, e)| format!("{:.4}", o / e.powf(2.0 / 3.0)))
        .collect();
    verdict(
        positive && exponent_ok && spread < 2.0,
        format!(
            "(rho + xi)/eps^(2/3) = [{}], all positive: {positive}, exponent {:.4}, R² {:.4}, spread {spread:.3}",
            scaled.join(", "),
            r.fitted_exponent,
            r.fit_r2
        ),
    )
}

fn blowdown(study: &ScalingStudy) -> Verdict {
    let errors: Vec<f64> = study.blowups.iter().map(|b| b.sup_error).collect();
    let all_minus = study.blowups.iter().all(|b| b.matched_branch == Branch::Minus);
    let last = *errors.last().unwrap();
    let monotone = errors.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    verdict(
        all_minus && last <= 0.08 && monotone,
        format!(
            "sup errors {:?}, all minus: {all_minus}, monotone: {monotone}",
            errors.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn zero_prediction(study: &ScalingStudy, xi: f64) -> Verdict {
    let k = study.kinks.len() - 1;
    let measured = study.kinks[k].rho;
    let predicted = study.predicted_rho[k];
    let gap = (predicted - measured).abs();
    let bound = 0.25 * (measured + xi).abs();
    verdict(
        gap <= bound,
        format!(
            "eps {}: rho_pred {predicted:.6}, rho {measured:.6}, gap {gap:.2e} vs 0.25|rho + xi| = {bound:.2e}",
            study.kinks[k].epsilon
        ),
    )
}

fn supercritical() -> Result<Verdict, Error> {
    let spec = spec_ii();
    let upper = compute_thresholds(&spec, 2000, 1e-10)?.a_star_upper;
    let a = 2.0 * upper;
    let alpha = alpha_of(&spec, a)?.alpha;
    let config = SolverConfig::default();
    let kinks: Vec<KinkSolution> = [0.01, 0.005]
        .iter()
        .map(|&e| solve_minimizer(&spec, e, a, &config))
        .collect::<Result<_, _>>()?;
    let rho_ok = kinks.iter().all(|k| k.rho.abs() <= 5.0 * k.epsilon);
    let tanh: Vec<f64> = kinks
        .iter()
        .map(|k| tanh_layer_check(k, &spec).map(|r| r.sup_error))
        .collect::<Result<_, _>>()?;
    let tanh_ok = tanh[1] <= 0.05 && tanh[1] < tanh[0];
    let plus = solve_pii(alpha, Branch::Plus, &pii_config())?;
    let (corner_ok, corner) = match solve_pii(alpha, Branch::Minus, &pii_config()) {
        Ok(minus) => {
            let b = compare_blowup(&kinks[1], &spec, &plus, &minus, S_WINDOW)?;
            (
                b.matched_branch == Branch::Plus && b.sup_error <= 0.08,
                format!("matched {:?}, sup {:.4} (plus {:.4}, minus {:.4})", b.matched_branch, b.sup_error, b.sup_error_plus, b.sup_error_minus),
            )
        }
        Err(e) => {
            let b = compare_blowup(&kinks[1], &spec, &plus, &plus, S_WINDOW)?;
            (b.sup_error <= 0.08, format!("minus branch unavailable ({e}); sup against plus {:.4}", b.sup_error))
        }
    };
    Ok(verdict(
        rho_ok && tanh_ok && corner_ok,
        format!(
            "a = {a:.4}, alpha = {alpha:.4}; rho = [{:.2e}, {:.2e}]; tanh sup [{:.4}, {:.4}]; corner {corner}",
            kinks[0].rho, kinks[1].rho, tanh[0], tanh[1]
        ),
    ))
}

fn outer_expansion(study: &ScalingStudy, spec: &PotentialSpec) -> Result<Verdict, Error> {
    let coarse = study.kinks.iter().find(|k| k.epsilon == 0.01).unwrap();
    let fine = study.kinks.iter().find(|k| k.epsilon == 0.005).unwrap();
    let window = (coarse.grid.left, -spec.xi() - 0.3);
    let r = outer_report(coarse, fine, spec, window)?;
    Ok(verdict(
        (5.0..=12.0).contains(&r.order_ratio),
        format!("errors {:.3e} -> {:.3e}, ratio {:.3}", r.max_error, r.max_error_fine, r.order_ratio),
    ))
}

fn division(study: &ScalingStudy, spec: &PotentialSpec, a: f64) -> Result<Verdict, Error> {
    let config = SolverConfig::default();
    let mut ok = true;
    let mut ratios = Vec::new();
    let mut parts = Vec::new();
    for eps in [0.01, 0.005, 0.0025] {
        let kink = study.kinks.iter().find(|k| k.epsilon == eps).unwrap();
        let eta = solve_eta(spec, eps, a, &config)?;
        let r = division_diagnostic(kink, &eta, spec)?;
        let left = r.left_plateau.as_ref().map(|p| p.min_w >= 0.95 && p.max_w <= 1.0 + 1e-8);
        let right = r.right_plateau.as_ref().map(|p| p.min_w >= -1.05 && p.max_w <= -0.95);
        let plateaus = left == Some(true) && right == Some(true);
        ok &= r.quotient_bound_ok && plateaus && r.width_ratio.is_some();
        if let Some(q) = r.width_ratio {
            ratios.push(q);
        }
        parts.push(format!(
            "eps {eps}: 1 - max w {:.2e}, plateaus {:?}/{:?}, width ratio {:.3}",
            1.0 - r.max_w_left,
            r.left_plateau.as_ref().map(|p| (round4(p.min_w), round4(p.max_w))),
            r.right_plateau.as_ref().map(|p| (round4(p.min_w), round4(p.max_w))),
            r.width_ratio.unwrap_or(f64::NAN)
        ));
    }
    if !ratios.is_empty() {
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        ok &= hi / lo <= 2.0;
    }
    Ok(verdict(ok, parts.join("; ")))
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn backlund_ladder() -> Result<Verdict, Error> {
    let config = PainleveConfig {
        scheme: Scheme::Numerov,
        ..pii_config()
    };
    let minus = solve_pii(-0.25, Branch::Minus, &config)?;
    let down = backlund_step(&minus, Direction::Down);
    let plus = solve_pii(-0.25, Branch::Plus, &config)?;
    let plus_round_trip = backlund_step(&plus, Direction::Down).and_then(|d| {
        let back = backlund_step(&d, Direction::Up)?;
        Ok(back
            .grid
            .nodes
            .iter()
            .zip(&back.values)
            .map(|(&s, &y)| (y - plus.eval(s)).abs())
            .fold(0.0, f64::max))
    });
    let plus_note = match &plus_round_trip {
        Ok(e) => format!("plus-branch up∘down error {e:.2e}"),
        Err(e) => format!("plus-branch round trip failed: {e}"),
    };
    match down {
        Ok(d) => {
            let back = backlund_step(&d, Direction::Up)?;
            let err = back
                .grid
                .nodes
                .iter()
                .zip(&back.values)
                .map(|(&s, &y)| (y - minus.eval(s)).abs())
                .fold(0.0, f64::max);
            Ok(verdict(
                d.residual_inf <= 1e-6 && err <= 1e-6,
                format!("down residual {:.2e}, up∘down error {err:.2e}; {plus_note}", d.residual_inf),
            ))
        }
        Err(e) => Ok(verdict(false, format!("down-step from the minus branch: {e}; {plus_note}"))),
    }
}

fn hygiene(spec: &PotentialSpec, a: f64) -> Result<Verdict, Error> {
    let eps = 0.01;
    let rhos: Vec<f64> = [1, 2, 4]
        .iter()
        .map(|&refine| {
            let config = SolverConfig {
                refine,
                ..SolverConfig::default()
            };
            solve_minimizer(spec, eps, a, &config).map(|k| k.rho)
        })
        .collect::<Result<_, _>>()?;
    let ratio = (rhos[0] - rhos[1]) / (rhos[1] - rhos[2]);
    let halving_ok = (2.5..=6.0).contains(&ratio);

    let base = solve_pii(-0.25, Branch::Minus, &pii_config())?;
    let doubled = solve_pii(
        -0.25,
        Branch::Minus,
        &PainleveConfig {
            s_minus: 2.0 * base.s_minus,
            s_plus: 2.0 * base.s_plus,
            ..pii_config()
        },
    )?;
    let domain_diff = base
        .grid
        .nodes
        .iter()
        .zip(&base.values)
        .filter(|(s, _)| **s >= base.s_minus + 5.0 && **s <= base.s_plus - 5.0)
        .map(|(&s, &y)| (y - doubled.eval(s)).abs())
        .fold(0.0, f64::max);
    let domain_ok = domain_diff <= 1e-5;

    let config = SolverConfig::default();
    let first = solve_minimizer(spec, eps, a, &config)?;
    let mirrored = first.reflected()?;
    let mirrored_energy = energy(&mirrored.values, &mirrored.grid, spec, eps, a)?;
    let energy_gap = (energy(&first.values, &first.grid, spec, eps, a)? - mirrored_energy).abs();
    let symmetry_ok = energy_gap <= 1e-10;

    let second = solve_minimizer(spec, eps, a, &config)?;
    let dir = std::env::temp_dir().join(format!("shadow-kink-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    io::write_kink_csv(&dir.join("a.csv"), &first)?;
    io::write_kink_csv(&dir.join("b.csv"), &second)?;
    let same_bytes = std::fs::read(dir.join("a.csv"))? == std::fs::read(dir.join("b.csv"))?;
    std::fs::remove_dir_all(&dir)?;
    let deterministic = same_bytes && first.values == second.values && first.energy.to_bits() == second.energy.to_bits();

    Ok(verdict(
        halving_ok && domain_ok && symmetry_ok && deterministic,
        format!(
            "rho ratio {ratio:.3}, domain doubling {domain_diff:.2e}, energy gap {energy_gap:.1e}, deterministic {deterministic}"
        ),
    ))
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: Vec::new() };
    let secs = Duration::from_secs;
    suite.run(1, "threshold exactness", secs(1), threshold_exactness);
    suite.run(2, "sign-change structure", secs(10), sign_change_structure);
    suite.run(3, "minimality proxy", secs(5), minimality_proxy);

    let spec = spec_i();
    let a = SQRT_2 / 2.0;
    let start = Instant::now();
    let study = zero_scaling_study(&spec, a, &LADDER, &SolverConfig::default(), &pii_config(), S_WINDOW);
    let study_time = start.elapsed();
    match &study {
        Ok(study) => {
            suite.run(4, "zero-location scaling", secs(300).saturating_sub(study_time), || {
                let mut v = zero_scaling(study);
                v.detail.push_str(&format!(", ladder solved in {:.2} s", study_time.as_secs_f64()));
                Ok(v)
            });
            suite.run(5, "blow-down convergence", secs(300), || Ok(blowdown(study)));
            suite.run(6, "zero prediction", secs(1), || Ok(zero_prediction(study, spec.xi())));
        }
        Err(e) => {
            for (id, name) in [(4, "zero-location scaling"), (5, "blow-down convergence"), (6, "zero prediction")] {
                suite.run(id, name, secs(300), || Err(Error::InvalidInput(format!("scaling study failed: {e}"))));
            }
        }
    }
    suite.run(7, "supercritical regime", secs(300), supercritical);
    match &study {
        Ok(study) => {
            suite.run(8, "outer expansion", secs(60), || outer_expansion(study, &spec));
            suite.run(9, "division diagnostic", secs(300), || division(study, &spec, a));
        }
        Err(e) => {
            for (id, name) in [(8, "outer expansion"), (9, "division diagnostic")] {
                suite.run(id, name, secs(300), || Err(Error::InvalidInput(format!("scaling study failed: {e}"))));
            }
        }
    }
    suite.run(10, "Bäcklund ladder", secs(60), backlund_ladder);
    suite.run(11, "numerical hygiene", secs(300), || hygiene(&spec, a));

    if suite.failures.is_empty() {
        println!("acceptance: all 11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 11 criteria failed: {:?}", suite.failures.len(), suite.failures);
        ExitCode::FAILURE
    }
}
