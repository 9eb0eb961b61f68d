//! `shadow-kink <command> [--config run.json] [--epsilon E] [--a A] [--out DIR]`
//!
//! Every command writes its files into the output directory and prints its
//! main report as JSON on stdout. Failures print `{code, message, context}`
//! on stderr and exit with 2 (configuration), 3 (nonconvergence),
//! 4 (topology or branch) or 1 (anything else).

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use shadow_kink::asymptotics::{compare_blowup, division_diagnostic_with, tanh_layer_check, zero_scaling_study};
use shadow_kink::io::{number_tag, write_csv, write_eta_csv, write_json, write_kink_csv, write_pii_csv};
use shadow_kink::kink::Seed;
use shadow_kink::painleve::{backlund_step_with, linearization_spectrum, Scheme};
use shadow_kink::{
    compute_thresholds, solve_eta, solve_minimizer, solve_pii, validate_assumptions, Branch, Direction, Error,
    ErrorKind, EtaSolution, KinkSolution, PainleveSolution, Result,
};

use config::{Amplitude, RunConfig};

const THREADS_VAR: &str = "SHADOW_KINK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "shadow-kink", version, about = "Shadow kinks, Painlevé-II corner profiles and their diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; omitted blocks take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Check the structural assumptions on the potential.
    Validate,
    /// Lower and upper forcing thresholds.
    Thresholds,
    /// Energy-minimizing kink at (epsilon, a).
    Solve,
    /// Outer solution on the left half-line.
    Eta,
    /// Painlevé-II profile at alpha on one branch.
    Pii,
    /// One Bäcklund step of a Painlevé-II profile.
    Backlund,
    /// Lowest eigenvalues of the Painlevé-II linearization.
    Spectrum,
    /// Rescaled kink against the Painlevé-II branches.
    Blowup,
    /// Zero location along the epsilon ladder.
    Scaling,
    /// Interior layer against the tanh profile.
    TanhCheck,
    /// Quotient of the kink by the outer solution.
    Division,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let report = json!({
                "code": "usage",
                "message": e.kind().to_string(),
                "context": { "usage": e.render().to_string() },
            });
            eprintln!("{report}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("reports serialize");
            // a closed stdout (e.g. `| head`) is not a failure of the run
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = json!({ "code": e.code(), "message": e.to_string(), "context": e.context() });
            eprintln!("{report}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Nonconvergence => 3,
        ErrorKind::Topology => 4,
        ErrorKind::Other => 1,
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("cannot configure {n} threads: {e}")))
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(e) = cli.epsilon {
        config.epsilon = Some(e);
    }
    if let Some(a) = cli.a {
        config.a = Some(Amplitude::Absolute(a));
        // an explicit amplitude takes precedence over a configured alpha
        config.alpha = None;
    }
    if let Some(out) = &cli.out {
        config.output_dir = Some(out.clone());
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<Value> {
    init_threads()?;
    let config = load_config(cli)?;
    let out = config.output_dir();
    std::fs::create_dir_all(&out)?;
    match cli.command {
        Command::Validate => validate(&config, &out),
        Command::Thresholds => thresholds(&config, &out),
        Command::Solve => solve(&config, &out),
        Command::Eta => eta(&config, &out),
        Command::Pii => pii(&config, &out),
        Command::Backlund => backlund(&config, &out),
        Command::Spectrum => spectrum(&config, &out),
        Command::Blowup => blowup(&config, &out),
        Command::Scaling => scaling(&config, &out),
        Command::TanhCheck => tanh_check(&config, &out),
        Command::Division => division(&config, &out),
    }
}

fn emit<T: Serialize>(path: &Path, report: &T) -> Result<Value> {
    write_json(path, report)?;
    Ok(serde_json::to_value(report)?)
}

fn kink_stem(prefix: &str, epsilon: f64, a: f64) -> String {
    format!("{prefix}_eps{}_a{}", number_tag(epsilon), number_tag(a))
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Plus => "plus",
        Branch::Minus => "minus",
    }
}

fn pii_stem(alpha: f64, branch: Branch) -> String {
    format!("pii_alpha{}_{}", number_tag(alpha), branch_name(branch))
}

#[derive(Serialize)]
struct KinkMeta<'a> {
    epsilon: f64,
    a: f64,
    energy: f64,
    rho: f64,
    residual_inf: f64,
    newton_iters: usize,
    seed: Seed,
    reflected: bool,
    nodes: usize,
    half_length: f64,
    csv: &'a str,
}

impl<'a> KinkMeta<'a> {
    fn new(k: &KinkSolution, csv: &'a str) -> Self {
        Self {
            epsilon: k.epsilon,
            a: k.a,
            energy: k.energy,
            rho: k.rho,
            residual_inf: k.residual_inf,
            newton_iters: k.newton_iters,
            seed: k.seed,
            reflected: k.reflected,
            nodes: k.grid.n(),
            half_length: k.grid.right,
            csv,
        }
    }
}

#[derive(Serialize)]
struct EtaMeta<'a> {
    epsilon: f64,
    a: f64,
    residual_inf: f64,
    newton_iters: usize,
    boundary_slope: f64,
    nodes: usize,
    csv: &'a str,
}

#[derive(Serialize)]
struct PiiMeta<'a> {
    alpha: f64,
    branch: Branch,
    scheme: Scheme,
    s_minus: f64,
    s_plus: f64,
    h: f64,
    residual_inf: f64,
    sign_changes: usize,
    zero_s: Option<f64>,
    newton_iters: usize,
    truncation_diff: Option<f64>,
    truncation_ok: Option<bool>,
    warnings: &'a [String],
    csv: &'a str,
}

impl<'a> PiiMeta<'a> {
    fn new(p: &'a PainleveSolution, csv: &'a str) -> Self {
        Self {
            alpha: p.alpha,
            branch: p.branch,
            scheme: p.scheme,
            s_minus: p.grid.left,
            s_plus: p.grid.right,
            h: p.h(),
            residual_inf: p.residual_inf,
            sign_changes: p.sign_changes,
            zero_s: p.zero_s,
            newton_iters: p.newton_iters,
            truncation_diff: p.truncation_diff,
            truncation_ok: p.truncation_ok,
            warnings: &p.warnings,
            csv,
        }
    }
}

fn validate(config: &RunConfig, out: &Path) -> Result<Value> {
    let v = &config.validation;
    let l_val = v.l_val.unwrap_or(config.spec.xi() + 1.0);
    let report = validate_assumptions(&config.spec, v.n_samples, l_val)?;
    emit(&out.join("validation.json"), &report)
}

fn thresholds(config: &RunConfig, out: &Path) -> Result<Value> {
    let t = &config.thresholds;
    let report = compute_thresholds(&config.spec, t.quad_n, t.refine_tol)?;
    emit(&out.join("thresholds.json"), &report)
}

fn solve_kink(config: &RunConfig) -> Result<KinkSolution> {
    let epsilon = config.epsilon()?;
    let a = config.amplitude()?;
    solve_minimizer(&config.spec, epsilon, a, &config.solver)
}

fn write_kink(out: &Path, kink: &KinkSolution) -> Result<Value> {
    let stem = kink_stem("kink", kink.epsilon, kink.a);
    let csv = format!("{stem}.csv");
    write_kink_csv(&out.join(&csv), kink)?;
    emit(&out.join(format!("{stem}.json")), &KinkMeta::new(kink, &csv))
}

fn solve(config: &RunConfig, out: &Path) -> Result<Value> {
    let kink = solve_kink(config)?;
    write_kink(out, &kink)
}

fn solve_outer(config: &RunConfig) -> Result<EtaSolution> {
    let epsilon = config.epsilon()?;
    let a = config.amplitude()?;
    solve_eta(&config.spec, epsilon, a, &config.solver)
}

fn eta(config: &RunConfig, out: &Path) -> Result<Value> {
    let e = solve_outer(config)?;
    let stem = kink_stem("eta", e.epsilon, e.a);
    let csv = format!("{stem}.csv");
    write_eta_csv(&out.join(&csv), &e)?;
    let meta = EtaMeta {
        epsilon: e.epsilon,
        a: e.a,
        residual_inf: e.residual_inf,
        newton_iters: e.newton_iters,
        boundary_slope: e.boundary_slope,
        nodes: e.grid.n(),
        csv: &csv,
    };
    emit(&out.join(format!("{stem}.json")), &meta)
}

fn write_pii(out: &Path, stem: &str, p: &PainleveSolution) -> Result<Value> {
    let csv = format!("{stem}.csv");
    write_pii_csv(&out.join(&csv), p)?;
    emit(&out.join(format!("{stem}.json")), &PiiMeta::new(p, &csv))
}

fn pii(config: &RunConfig, out: &Path) -> Result<Value> {
    let alpha = config.alpha()?;
    let branch = config.branch()?;
    let p = solve_pii(alpha, branch, &config.pii)?;
    write_pii(out, &pii_stem(alpha, branch), &p)
}

fn backlund(config: &RunConfig, out: &Path) -> Result<Value> {
    let alpha = config.alpha()?;
    let branch = config.branch()?;
    let direction = config.direction()?;
    let source = solve_pii(alpha, branch, &config.pii)?;
    let image = backlund_step_with(&source, direction, &config.backlund)?;
    let dir = match direction {
        Direction::Up => "up",
        Direction::Down => "down",
    };
    let stem = format!("backlund_{}_{dir}", pii_stem(alpha, branch));
    write_pii(out, &stem, &image)
}

fn spectrum(config: &RunConfig, out: &Path) -> Result<Value> {
    let alpha = config.alpha()?;
    let branch = config.branch()?;
    let p = solve_pii(alpha, branch, &config.pii)?;
    let report = linearization_spectrum(&p, config.spectrum.t, config.spectrum.k)?;
    emit(&out.join(format!("spectrum_alpha{}_{}.json", number_tag(alpha), branch_name(branch))), &report)
}

fn blowup(config: &RunConfig, out: &Path) -> Result<Value> {
    let kink = solve_kink(config)?;
    let alpha = shadow_kink::alpha_of(&config.spec, kink.a)?.alpha;
    let window = config.s_window()?;
    let (plus, minus) = rayon::join(
        || solve_pii(alpha, Branch::Plus, &config.pii),
        || solve_pii(alpha, Branch::Minus, &config.pii),
    );
    let report = compare_blowup(&kink, &config.spec, &plus?, &minus?, window)?;
    let stem = kink_stem("blowup", kink.epsilon, kink.a);
    write_csv(
        &out.join(format!("{stem}.csv")),
        &["s", "rescaled_v", "minus_Y", "error"],
        report.samples.iter().map(|r| r.to_vec()),
    )?;
    emit(&out.join(format!("{stem}.json")), &report)
}

fn scaling(config: &RunConfig, out: &Path) -> Result<Value> {
    let a = config.amplitude()?;
    let ladder = config.ladder()?;
    let study = zero_scaling_study(&config.spec, a, &ladder, &config.solver, &config.pii, config.s_window()?)?;
    for kink in &study.kinks {
        write_kink(out, kink)?;
    }
    write_json(&out.join(format!("scaling_study_a{}.json", number_tag(a))), &study)?;
    emit(&out.join(format!("scaling_a{}.json", number_tag(a))), &study.report)
}

fn tanh_check(config: &RunConfig, out: &Path) -> Result<Value> {
    let kink = solve_kink(config)?;
    let report = tanh_layer_check(&kink, &config.spec)?;
    emit(&out.join(format!("{}.json", kink_stem("tanh", kink.epsilon, kink.a))), &report)
}

fn division(config: &RunConfig, out: &Path) -> Result<Value> {
    let (kink, outer) = rayon::join(|| solve_kink(config), || solve_outer(config));
    let report = division_diagnostic_with(&kink?, &outer?, &config.spec, &config.division)?;
    emit(&out.join(format!("{}.json", kink_stem("division", report.epsilon, report.a))), &report)
}
