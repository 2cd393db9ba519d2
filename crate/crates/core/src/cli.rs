//! Command-line front end: argument and config-file parsing, dispatch, and
//! file outputs.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 unstable coupling,
//! 3 non-convergence (or a failed verification check).

use std::ffi::OsString;
use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::energy::{self, Coupling, EnergyReport, Potential};
use crate::error::{Error, Result};
use crate::minimize::{self, Init, IterationRecord, LineSearch, MinimizeConfig};
use crate::selfmag;
use crate::solitons::{self, PolyPair};
use crate::spectral::{self, io, DensityField, Field, Grid, Kernel, Spectral};
use crate::stability;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSTABLE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Largest core Liouville residual `soliton --verify` accepts.
pub const LIOUVILLE_TOLERANCE: f64 = 1e-5;

/// Density fraction of the maximum below which `phase.pgm` is blanked.
pub const PHASE_DENSITY_CUTOFF: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "afp", version, about = "Average-field-Pauli energy: minimizers, solitons and critical couplings")]
pub struct Cli {
    /// key=value file with defaults for the subcommand's flags; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the energy at fixed couplings.
    Minimize(MinimizeArgs),
    /// Sample an exact soliton from a polynomial pair and optionally verify it.
    Soliton(SolitonArgs),
    /// Estimate the critical coupling for a list of β.
    ScanGamma(ScanArgs),
    /// Run the built-in invariant suite.
    Verify(VerifyArgs),
    /// Solve for the radial Townes profile.
    Townes(TownesArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Points per side (power of two, at least 16).
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Box half-width L; the box is [−L, L]².
    #[arg(long = "box", default_value_t = 12.0)]
    pub half_width: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MinimizeArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Raw value, not in units of π (20π ≈ 62.832).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    /// harmonic, zero or file:<path> (AFP1 or x,y,value CSV on the same grid).
    #[arg(long, default_value = "harmonic")]
    pub potential: String,
    /// tf, gaussian:<width>, random:<seed>, soliton:<p>;<q> or file:<path>.
    #[arg(long, default_value = "tf")]
    pub init: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub grad_tol: f64,
    /// Relative amplitude of the random perturbation added to the initial state.
    #[arg(long, default_value_t = 0.3)]
    pub perturbation: f64,
    /// Seed of the perturbation.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub no_precondition: bool,
    #[arg(long)]
    pub no_conjugate: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolitonArgs {
    /// Coefficients of P in ascending order, e.g. "0,1" for z; complex entries as "1+2i".
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
    /// Check membership, Liouville residual, vorticity bounds and the factorization identity.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    /// Comma-separated, sorted, nonnegative.
    #[arg(long, value_delimiter = ',', default_value = "0,2,4")]
    pub betas: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub seeds: Vec<u64>,
    /// Width of the random starting states.
    #[arg(long, default_value_t = 0.5)]
    pub width: f64,
    #[arg(long, default_value_t = 1500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub grad_tol: f64,
    /// Worker threads; capped by AFP_THREADS.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Also write verify.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TownesArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut out = std::io::stdout().lock();
    match run(&cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnstableCoupling(_) => EXIT_UNSTABLE,
        _ => EXIT_USAGE,
    }
}

/// Parses a `key=value` config file. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim().replace('_', "-");
        if k.is_empty() {
            return Err(Error::Parse(format!("config line {}: empty key", i + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Adds config-file values for every flag not given on the command line.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().to_string();
        if s == "--config" {
            path = Some(it.next().ok_or_else(|| Error::Parse("--config needs a path".into()))?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let entries = parse_config(&text)?;
    // program name, subcommand, then config flags, then the remaining command-line flags
    let sub = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 1);
    let Some(sub) = sub else { return Ok(rest) };
    let given: Vec<String> = rest[sub + 1..]
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut merged: Vec<OsString> = rest[..=sub].to_vec();
    for (k, v) in entries {
        if given.contains(&k) {
            continue;
        }
        match v.as_str() {
            "true" => merged.push(format!("--{k}").into()),
            "false" => {}
            _ => merged.push(format!("--{k}={v}").into()),
        }
    }
    merged.extend_from_slice(&rest[sub + 1..]);
    Ok(merged)
}

/// Potential from its textual form: `harmonic`, `zero` or `file:<path>`.
pub fn parse_potential(spec: &str, grid: &Grid) -> Result<Potential> {
    match spec.trim() {
        "harmonic" => Ok(Potential::Harmonic),
        "zero" => Ok(Potential::Zero),
        s => {
            let Some(path) = s.strip_prefix("file:") else {
                return Err(Error::Parse(format!("unknown potential '{s}' (harmonic, zero or file:<path>)")));
            };
            let v = load_density(Path::new(path), grid)?;
            Ok(Potential::Sampled(v))
        }
    }
}

fn load_density(path: &Path, grid: &Grid) -> Result<DensityField> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(io::MAGIC) {
        let f = io::read_field(bytes.as_slice())?;
        grid.check_same(f.grid())?;
        if f.values().iter().any(|v| v.im != 0.0) {
            return Err(Error::Format("potential file has nonzero imaginary parts".into()));
        }
        DensityField::new(*grid, f.values().iter().map(|v| v.re).collect())
    } else {
        io::read_density_csv(bytes.as_slice(), grid)
    }
}

/// Starting state from its textual form.
pub fn parse_init(spec: &str, beta: f64, gamma: f64, potential: &Potential) -> Result<Init> {
    let spec = spec.trim();
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("init '{spec}': {e}")));
    match kind {
        "tf" => Ok(Init::Gaussian { width: tf_matched_width(beta, gamma, potential) }),
        "gaussian" => Ok(Init::Gaussian { width: num(arg)? }),
        "random" => {
            let seed = arg.trim().parse::<u64>().map_err(|e| Error::Parse(format!("init '{spec}': {e}")))?;
            Ok(Init::Random { seed, width: tf_matched_width(beta, gamma, potential) })
        }
        "soliton" => {
            let (p, q) = arg
                .split_once(';')
                .ok_or_else(|| Error::Parse("soliton init needs soliton:<p>;<q>".into()))?;
            Ok(Init::Soliton(PolyPair::parse(p, q)?))
        }
        "file" => Ok(Init::File(PathBuf::from(arg))),
        _ => Err(Error::Parse(format!("unknown init '{spec}'"))),
    }
}

/// Gaussian width whose second moment matches the Thomas–Fermi density with
/// coupling `2π|β| + γ` (at least 1); width 1 without a trap.
pub fn tf_matched_width(beta: f64, gamma: f64, potential: &Potential) -> f64 {
    match potential {
        Potential::Harmonic => {
            let g = (2.0 * PI * beta.abs() + gamma).max(1.0);
            let tf = stability::tf_minimum(g, &Potential::Harmonic).expect("positive coupling");
            // ⟨r²⟩ = R²/3 for the parabola, 2w² for the Gaussian
            tf.radius / 6f64.sqrt()
        }
        _ => 1.0,
    }
}

fn make_spectral(g: &GridArgs) -> Result<Spectral> {
    Ok(Spectral::new(Grid::new(g.half_width, g.n)?))
}

/// Dispatches one command, printing a short summary to `out`.
pub fn run(cmd: &Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Minimize(a) => run_minimize(a, out),
        Command::Soliton(a) => run_soliton(a, out),
        Command::ScanGamma(a) => run_scan(a, out),
        Command::Verify(a) => run_verify(a, out),
        Command::Townes(a) => run_townes(a, out),
    }
}

fn versions() -> Value {
    json!({ "afp": env!("CARGO_PKG_VERSION") })
}

fn grid_json(g: &Grid) -> Value {
    json!({ "n": g.n(), "half_width": g.half_width(), "spacing": g.spacing() })
}

fn run_minimize(a: &MinimizeArgs, out: &mut dyn Write) -> Result<i32> {
    let sp = make_spectral(&a.grid)?;
    let potential = parse_potential(&a.potential, sp.grid())?;
    let init = parse_init(&a.init, a.beta, a.gamma, &potential)?;
    let cfg = MinimizeConfig {
        init,
        max_iter: a.max_iter,
        grad_tol: a.grad_tol,
        line_search: LineSearch::default(),
        precondition: !a.no_precondition,
        conjugate: !a.no_conjugate,
        perturbation: a.perturbation,
        perturbation_seed: a.seed,
        ..Default::default()
    };
    cfg.validate()?;
    let c = Coupling::new(a.beta, a.gamma, potential);
    let r = minimize::minimize_energy(&sp, &c, &cfg)?;
    fs::create_dir_all(&a.out)?;
    let maps = write_state_files(&a.out, &r.u)?;
    write_iterations_csv(&a.out.join("iterations.csv"), &r.log)?;
    let klt = stability::exact_gamma_star(a.beta)
        .filter(|gs| gs + a.gamma > 0.0)
        .and_then(|gs| stability::tf_minimum(gs + a.gamma, &c.potential).ok());
    let result = json!({
        "command": "minimize",
        "config": a,
        "grid": grid_json(sp.grid()),
        "coupling": { "beta": a.beta, "gamma": a.gamma, "potential": c.potential.label() },
        "report": r.report,
        "iterations": r.iterations,
        "converged": r.converged,
        "vortex_count": r.vortex_count,
        "klt_bound": klt,
        "heatmaps": maps,
        "versions": versions(),
    });
    write_json(&a.out.join("result.json"), &result)?;
    writeln!(
        out,
        "energy {:.6} (kinetic {:.6}, quartic {:.6}, potential {:.6}), residual {:.2e}, {} iterations, {} vortices{}",
        r.report.total,
        r.report.kinetic_magnetic,
        r.report.quartic,
        r.report.potential,
        r.report.el_residual,
        r.iterations,
        r.vortex_count,
        if r.converged { "" } else { ", NOT converged" }
    )?;
    Ok(if r.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn run_soliton(a: &SolitonArgs, out: &mut dyn Write) -> Result<i32> {
    let sp = make_spectral(&a.grid)?;
    let g = *sp.grid();
    let pair = PolyPair::parse(&a.p, &a.q)?;
    let u = solitons::nll_state(&pair, &g);
    let beta = pair.beta();
    let report = energy::evaluate(&sp, &u, &Coupling::self_dual(beta))?;
    fs::create_dir_all(&a.out)?;
    let maps = write_state_files(&a.out, &u)?;
    let mut verification = Value::Null;
    let mut ok = true;
    if a.verify {
        let member = stability::nll_membership(&sp, &u, beta, 1e-3)?;
        let f = solitons::wronskian(&pair)?;
        let psi = solitons::nll_superpotential(&pair, &g);
        let liouville = solitons::liouville_residual(&sp, &psi, &f)?;
        let (m, lower, upper) = solitons::vorticity_bounds_check(&pair)?;
        let susy = energy::susy_factorization_check(&sp, &u, beta)?;
        ok = member && liouville <= LIOUVILLE_TOLERANCE;
        verification = json!({
            "nll_membership": member,
            "liouville_residual": liouville,
            "vorticity": { "m": m, "lower": lower, "upper": upper },
            "susy_difference": susy,
            "passed": ok,
        });
        writeln!(out, "NLL membership {member}, Liouville residual {liouville:.2e}, vorticity {m} in [{lower}, {upper}]")?;
    }
    let result = json!({
        "command": "soliton",
        "config": a,
        "grid": grid_json(&g),
        "pair": { "p": pair.p().to_string(), "q": pair.q().to_string(), "n_flux_half": pair.n_flux_half(), "beta": beta },
        "coupling": { "beta": beta, "gamma": -2.0 * PI * beta, "potential": "zero" },
        "report": report,
        "verification": verification,
        "heatmaps": maps,
        "versions": versions(),
    });
    write_json(&a.out.join("result.json"), &result)?;
    writeln!(out, "β = {beta}, self-dual energy {:.3e}, mass {:.6}", report.total, report.norm)?;
    Ok(if ok { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

/// Worker count: the flag, capped by `AFP_THREADS` when set.
pub fn worker_count(flag: Option<usize>, env: Option<&str>) -> Option<usize> {
    let cap = env.and_then(|s| s.trim().parse::<usize>().ok()).filter(|&c| c > 0);
    match (flag, cap) {
        (Some(f), Some(c)) => Some(f.min(c).max(1)),
        (Some(f), None) => Some(f.max(1)),
        (None, c) => c,
    }
}

fn run_scan(a: &ScanArgs, out: &mut dyn Write) -> Result<i32> {
    let sp = make_spectral(&a.grid)?;
    let cfg = MinimizeConfig {
        max_iter: a.max_iter,
        grad_tol: a.grad_tol,
        seeds: a.seeds.clone(),
        random_width: a.width,
        ..Default::default()
    };
    let env = std::env::var("AFP_THREADS").ok();
    let scan = match worker_count(a.workers, env.as_deref()) {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| stability::scan_gamma_star(&sp, &a.betas, &cfg))?
        }
        None => stability::scan_gamma_star(&sp, &a.betas, &cfg)?,
    };
    fs::create_dir_all(&a.out)?;
    scan.write_csv(BufWriter::new(fs::File::create(a.out.join("scan.csv"))?))?;
    scan.write_json(BufWriter::new(fs::File::create(a.out.join("scan.json"))?))?;
    let result = json!({
        "command": "scan-gamma",
        "config": a,
        "grid": grid_json(sp.grid()),
        "lipschitz_estimate": scan.lipschitz_estimate,
        "points": scan.points.iter().map(|p| json!({
            "beta": p.beta,
            "gamma_star_estimate": p.gamma_star_estimate,
            "converged": p.converged,
            "respects_floors": p.respects_floors(stability::FLOOR_TOLERANCE),
            "error": p.error,
        })).collect::<Vec<_>>(),
        "versions": versions(),
    });
    write_json(&a.out.join("result.json"), &result)?;
    for p in &scan.points {
        match &p.error {
            None => writeln!(
                out,
                "β = {:<6} γ̂* = {:.5}  (2πβ = {:.5}, C_LGN = {:.5}) vortices {}{}",
                p.beta,
                p.gamma_star_estimate,
                p.bogomolnyi_floor,
                p.lgn_floor,
                p.vortex_count,
                if p.converged { "" } else { ", not converged" }
            )?,
            Some(e) => writeln!(out, "β = {:<6} failed: {e}", p.beta)?,
        }
    }
    writeln!(out, "empirical Lipschitz constant {:.4}", scan.lipschitz_estimate)?;
    if scan.points.iter().any(|p| matches!(&p.error, Some(e) if e.starts_with("unstable"))) {
        return Ok(EXIT_UNSTABLE);
    }
    Ok(if scan.points.iter().all(|p| p.converged) { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn run_townes(a: &TownesArgs, out: &mut dyn Write) -> Result<i32> {
    let t = solitons::townes_profile(a.tolerance)?;
    fs::create_dir_all(&a.out)?;
    let mut w = BufWriter::new(fs::File::create(a.out.join("townes.csv"))?);
    writeln!(w, "r,tau")?;
    for (r, tau) in t.r.iter().zip(&t.tau) {
        writeln!(w, "{r},{tau}")?;
    }
    w.flush()?;
    let result = json!({
        "command": "townes",
        "config": a,
        "u0": t.u0,
        "l2sq": t.l2sq,
        "c_lgn": t.c_lgn,
        "c_lgn_over_2pi": t.c_lgn / (2.0 * PI),
        "tail_constant": t.tail_constant,
        "matching_radius": t.matching_radius,
        "ode_residual": t.ode_residual(),
        "versions": versions(),
    });
    write_json(&a.out.join("result.json"), &result)?;
    writeln!(out, "τ(0) = {:.8}, C_LGN = {:.8} = {:.6}·2π", t.u0, t.c_lgn, t.c_lgn / (2.0 * PI))?;
    Ok(EXIT_OK)
}

/// One line of the verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, value, tolerance, passed: value <= tolerance }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Fast invariant suite behind `afp verify`.
pub fn verify_suite() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let g = Grid::new(12.0, 256)?;
    let sp = Spectral::new(g);
    let rho = DensityField::from_fn(g, |x, y| (-(x * x + y * y)).exp() / PI);
    let a = selfmag::self_potential(&sp, &rho)?.a;
    let (inner, outer) = (g.half_width() / 2.0, 0.95 * g.half_width());
    let curl = sp.windowed_curl(&a, inner, outer);
    let two_pi_rho: Vec<f64> = rho.values().iter().map(|r| 2.0 * PI * r).collect();
    let core = |i: usize| {
        let (x, y) = g.point(i);
        x * x + y * y < inner * inner
    };
    checks.push(Check::at_most("curl A = 2πρ", spectral::relative_l2_error(curl.values(), &two_pi_rho, core), 1e-6));
    let shell = spectral::VectorField::from_fn(g, |x, y| {
        let r2 = x * x + y * y;
        if r2 == 0.0 {
            (0.0, 0.0)
        } else {
            let f = (1.0 - (-r2).exp()) / r2;
            (-y * f, x * f)
        }
    });
    checks.push(Check::at_most("shell theorem", spectral::relative_l2_error_vec(&a, &shell, |_| true), 1e-4));
    let div = sp.free_space_convolve(Kernel::GradPerpLog, &rho)?;
    checks.push(Check::at_most("core mass outside r = L/2", div.outside_core_fraction, spectral::CORE_MASS_TOLERANCE));

    let g = Grid::new(32.0, 512)?;
    let sp = Spectral::new(g);
    let v = solitons::nll_state(&PolyPair::versiera(), &g);
    let r = energy::evaluate_terms(&sp, &v, &Coupling::magnetic(2.0))?;
    checks.push(Check::at_most("versiera energy 4/3", rel(r.kinetic_magnetic, 4.0 / 3.0), 1e-3));
    checks.push(Check::at_most("versiera L4 norm 1/(3π)", rel(r.l4norm, 1.0 / (3.0 * PI)), 1e-3));
    checks.push(Check::at_most("versiera mass", (r.norm - 1.0).abs(), 5e-3));
    checks.push(Check::at_most(
        "versiera Bogomolnyi defect",
        (r.kinetic_magnetic - 4.0 * PI * r.l4norm).abs() / r.kinetic_magnetic,
        1e-3,
    ));

    let g = Grid::new(16.0, 512)?;
    let sp = Spectral::new(g);
    for (name, p, q) in [("Liouville residual (z, 1)", "0,1", "1"), ("Liouville residual (z³+1, z−2)", "1,0,0,1", "-2,1")] {
        let pair = PolyPair::parse(p, q)?;
        let psi = solitons::nll_superpotential(&pair, &g);
        let res = solitons::liouville_residual(&sp, &psi, &solitons::wronskian(&pair)?)?;
        checks.push(Check::at_most(name, res, if p == "0,1" { 1e-6 } else { 1e-5 }));
    }

    let t = solitons::townes_profile(1e-10)?;
    checks.push(Check::at_most("Townes C_LGN = 0.931·2π", rel(t.c_lgn, 0.931 * 2.0 * PI), 5e-3));

    let g = Grid::new(8.0, 64)?;
    let sp = Spectral::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst_dia, mut worst_bog, mut worst_conj, mut worst_fd) = (f64::INFINITY, f64::INFINITY, 0.0f64, 0.0f64);
    for k in 0..10 {
        let width = rng.gen_range(0.8..1.6);
        let u = minimize::random_smooth_field(g, &mut rng, width);
        let beta = rng.gen_range(-4.0..4.0);
        let (lhs, rhs) = energy::diamagnetic_check(&sp, &u, beta)?;
        worst_dia = worst_dia.min(lhs - rhs);
        let e = energy::evaluate_terms(&sp, &u, &Coupling::magnetic(beta))?;
        worst_bog = worst_bog.min((e.kinetic_magnetic - 2.0 * PI * beta.abs() * e.l4norm) / e.kinetic_magnetic);
        let c = Coupling::new(beta, rng.gen_range(-3.0..3.0), Potential::Harmonic);
        let ec = energy::evaluate_terms(&sp, &u.conj(), &Coupling::new(-beta, c.gamma, Potential::Harmonic))?;
        let eu = energy::evaluate_terms(&sp, &u, &c)?;
        worst_conj = worst_conj.max((ec.total() - eu.total()).abs());
        if k < 3 {
            let dir = minimize::random_smooth_field(g, &mut rng, 1.2);
            let (fd, an) = energy::directional_derivative_check(&sp, &u, &dir, &c, 1e-5)?;
            worst_fd = worst_fd.max(rel(fd, an));
        }
    }
    checks.push(Check { name: "diamagnetic inequality (min lhs − rhs)", value: worst_dia, tolerance: 0.0, passed: worst_dia >= 0.0 });
    checks.push(Check {
        name: "Bogomolnyi bound (min relative defect)",
        value: worst_bog,
        tolerance: -1e-6,
        passed: worst_bog >= -1e-6,
    });
    checks.push(Check::at_most("conjugation symmetry", worst_conj, 0.0));
    checks.push(Check::at_most("gradient vs finite differences", worst_fd, 1e-5));

    let g = Grid::new(12.0, 128)?;
    let sp = Spectral::new(g);
    let gauss = Field::from_fn(g, |x, y| Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0)).normalized();
    let e = energy::evaluate_terms(&sp, &gauss, &Coupling::magnetic(1.0))?.kinetic_magnetic;
    let mut worst_scale = 0.0f64;
    for s in [0.5, 2.0] {
        let d = energy::dilate(&sp, &gauss, s)?;
        let ed = energy::evaluate_terms(&sp, &d, &Coupling::magnetic(1.0))?.kinetic_magnetic;
        worst_scale = worst_scale.max(rel(ed, s * s * e));
    }
    checks.push(Check::at_most("dilation scaling λ²", worst_scale, 1e-4));

    let tf = stability::tf_minimum(40.0 * PI, &Potential::Harmonic)?;
    checks.push(Check::at_most("TF energy (4/3)√40", rel(tf.energy, 4.0 / 3.0 * 40f64.sqrt()), 1e-12));

    let mut buf = Vec::new();
    io::write_field(&mut buf, &gauss)?;
    let back = io::read_field(buf.as_slice())?;
    checks.push(Check::at_most("AFP1 round trip", back.max_distance(&gauss), 0.0));
    Ok(checks)
}

fn run_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let checks = verify_suite()?;
    for c in &checks {
        writeln!(out, "{} {:<44} {:>12.3e}  (tolerance {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance)?;
    }
    let ok = checks.iter().all(|c| c.passed);
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("verify.json"), &json!({ "checks": checks, "passed": ok, "versions": versions() }))?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_iterations_csv(path: &Path, log: &[IterationRecord]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "iter,energy,residual,step")?;
    for r in log {
        writeln!(w, "{},{},{},{}", r.iter, r.energy, r.residual, r.step)?;
    }
    w.flush()?;
    Ok(())
}

/// Binary 16-bit PGM (`P5`, maxval 65535, big-endian samples).
pub fn write_pgm16<W: Write>(mut w: W, width: usize, height: usize, pixels: &[u16]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::InvalidArgument("pixel count does not match the image size".into()));
    }
    write!(w, "P5\n{width} {height}\n65535\n")?;
    let mut buf = Vec::with_capacity(2 * pixels.len());
    for p in pixels {
        buf.extend_from_slice(&p.to_be_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Heatmap pixels with the top row at `y = +L`. Values map linearly from
/// `[lo, hi]` to `[1, 65535]`; `None` becomes 0.
pub fn heatmap(grid: &Grid, values: &[Option<f64>], lo: f64, hi: f64) -> Vec<u16> {
    let n = grid.n();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut px = Vec::with_capacity(n * n);
    for row in (0..n).rev() {
        for col in 0..n {
            px.push(match values[row * n + col] {
                Some(v) => (1.0 + ((v - lo) / span).clamp(0.0, 1.0) * 65534.0).round() as u16,
                None => 0,
            });
        }
    }
    px
}

/// `density.csv`, `density.pgm`, `phase.pgm` and `field.bin`; returns the heatmap ranges.
fn write_state_files(dir: &Path, u: &Field) -> Result<Value> {
    let g = u.grid();
    let rho = u.density();
    io::write_density_csv(BufWriter::new(fs::File::create(dir.join("density.csv"))?), &rho)?;
    let (lo, hi) = (rho.min(), rho.max());
    let dens: Vec<Option<f64>> = rho.values().iter().map(|&v| Some(v)).collect();
    write_pgm16(BufWriter::new(fs::File::create(dir.join("density.pgm"))?), g.n(), g.n(), &heatmap(g, &dens, lo, hi))?;
    let cut = PHASE_DENSITY_CUTOFF * hi;
    let phase: Vec<Option<f64>> =
        u.values().iter().zip(rho.values()).map(|(z, &r)| (r > cut).then(|| z.arg())).collect();
    write_pgm16(BufWriter::new(fs::File::create(dir.join("phase.pgm"))?), g.n(), g.n(), &heatmap(g, &phase, -PI, PI))?;
    io::save_field(dir.join("field.bin"), u)?;
    Ok(json!({
        "density": { "file": "density.pgm", "min": lo, "max": hi, "zero_pixel": "unused", "map": "linear [min, max] -> [1, 65535]" },
        "phase": {
            "file": "phase.pgm",
            "min": -PI,
            "max": PI,
            "zero_pixel": format!("density below {PHASE_DENSITY_CUTOFF:e} of max"),
            "map": "linear [min, max] -> [1, 65535]",
        },
        "orientation": "first row is y = +L, first column is x = −L",
    }))
}

/// Loads `result.json` as a generic value, for tests and downstream tools.
pub fn read_result(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Shorthand used by the examples.
pub fn report_line(r: &EnergyReport) -> String {
    format!(
        "total {:.6}  kinetic {:.6}  quartic {:.6}  potential {:.6}  ∫|u|⁴ {:.6}  defect {:.3e}  residual {:.3e}  λ {:.6}",
        r.total, r.kinetic_magnetic, r.quartic, r.potential, r.l4norm, r.bogomolnyi_defect, r.el_residual, r.multiplier
    )
}
