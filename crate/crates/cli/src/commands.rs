use std::fs;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use quasisynth::design::DesignProblem;
use quasisynth::library::{notch_angle, GateLibrary, OptimizeOptions};
use quasisynth::pauli::{Axis, PauliObservable};
use quasisynth::pipeline::{
    pai_midpoint, run_clifford_t, run_control, run_pai, solve_and_certify, validate_circuit, CliffordTConfig,
    ControlConfig, PaiConfig, SolveOptions, SolveReport,
};
use quasisynth::ptm::{rotation_gate, DensityMatrix};
use quasisynth::sampler::{nmr_estimate_signal, scheme_from_gamma, Circuit, EstimatorMode};

use crate::bundle::Bundle;
use crate::{Cli, Command, OutArgs};

#[derive(Args, Debug, Clone, Serialize)]
pub struct PathArgs {
    /// Stop the path at this lambda.
    #[arg(long, default_value_t = 0.0)]
    pub lambda_floor: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_breakpoints: usize,
    /// Interior tradeoff samples per path segment.
    #[arg(long, default_value_t = 8)]
    pub tradeoff_samples: usize,
}

impl PathArgs {
    fn validate(&self) -> Result<()> {
        ensure!(self.lambda_floor.is_finite() && self.lambda_floor >= 0.0, "--lambda-floor must be finite and >= 0");
        ensure!(self.max_breakpoints >= 1, "--max-breakpoints must be at least 1");
        Ok(())
    }

    fn options(&self) -> SolveOptions {
        SolveOptions {
            lambda_floor: self.lambda_floor,
            max_breakpoints: self.max_breakpoints,
            tradeoff_samples: self.tradeoff_samples,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PaiArgs {
    /// Notch resolution: 2^bits angles.
    #[arg(long, default_value_t = 7)]
    pub bits: u32,
    #[arg(long, default_value = "x")]
    pub axis: String,
    /// Target angle in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "midpoint", required_unless_present = "midpoint")]
    pub theta: Option<f64>,
    /// Target the midpoint between notches k and k+1 instead of --theta.
    #[arg(long)]
    pub midpoint: Option<u64>,
    /// Also solve the Clifford-only system on the same target.
    #[arg(long)]
    pub clifford_baseline: bool,
    #[arg(long, default_value_t = 11)]
    pub interpolation_steps: usize,
    /// Validation shots; 0 skips sampling.
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CliffordTArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 8)]
    pub t_budget: usize,
    /// Largest distance from the target admitted into the library.
    #[arg(long, default_value_t = 0.4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 20)]
    pub max_entries: usize,
    /// Do not append the Clifford recoveries C * U_best.
    #[arg(long)]
    pub no_recovery: bool,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ControlArgs {
    #[arg(long, default_value_t = 20)]
    pub pulses: usize,
    /// Offsets on the grid.
    #[arg(long, default_value_t = 7)]
    pub q: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
    pub range_lo: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
    pub range_hi: f64,
    /// Amplitude cap |h| <= cap.
    #[arg(long, default_value_t = 6.0)]
    pub cap: f64,
    #[arg(long, default_value_t = 32)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iterations: usize,
    /// Target Rx(pi/2) only for |d| <= band and the identity outside.
    #[arg(long)]
    pub band: Option<f64>,
    /// Append only phase-shifted variants, not frame-shifted ones.
    #[arg(long)]
    pub no_frame_variants: bool,
    /// NMR validation shots; 0 skips sampling.
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 32)]
    pub times: usize,
    #[arg(long, default_value_t = 4.0)]
    pub t_max: f64,
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolveArgs {
    /// Design problem file.
    #[arg(long)]
    pub problem: PathBuf,
    /// Read the binary format for this many qubits instead of JSON.
    #[arg(long)]
    pub qubits: Option<usize>,
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    Exact,
    UnitNorm,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Analytic,
    Full,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub library: PathBuf,
    /// `solutions.json` of an earlier run.
    #[arg(long)]
    pub solutions: PathBuf,
    #[arg(long, value_enum, default_value_t = Which::Exact)]
    pub solution: Which,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    /// Sampled slots in sequence (offset-independent libraries).
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Pauli string measured at the end.
    #[arg(long)]
    pub observable: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Full)]
    pub mode: Mode,
    /// Fixed rotation applied after the sampled slots.
    #[arg(long)]
    pub post_axis: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub post_angle: f64,
    /// Time points for signals of offset-dependent libraries.
    #[arg(long, default_value_t = 32)]
    pub times: usize,
    #[arg(long, default_value_t = 4.0)]
    pub t_max: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Pai(a) => pai(a, cli),
        Command::CliffordT(a) => clifford_t(a, cli),
        Command::Control(a) => control(a, cli),
        Command::Solve(a) => solve(a, cli),
        Command::Sample(a) => sample(a, cli),
    }
}

fn parse_axis(s: &str) -> Result<Axis> {
    s.parse().with_context(|| format!("--axis {s}"))
}

fn tradeoff_csv(curve: &[(f64, f64)]) -> String {
    let mut s = String::from("residual,l1_norm\n");
    for (r, l) in curve {
        s.push_str(&format!("{r:e},{l:e}\n"));
    }
    s
}

/// Files and certificates shared by every solving subcommand.
fn write_solve(b: &mut Bundle, problem: &DesignProblem, solve: &SolveReport) -> Result<()> {
    b.write("problem.json", &problem.to_json()?)?;
    b.write("path.csv", &solve.path.to_csv())?;
    b.write("path.json", &solve.path.to_json()?)?;
    b.write("tradeoff.csv", &tradeoff_csv(&solve.tradeoff))?;
    b.certify("kkt", solve.kkt_passed);
    Ok(())
}

fn solve_summary(solve: &SolveReport) -> Value {
    json!({
        "exact": solve.exact,
        "unit_norm": solve.unit_norm,
        "termination": solve.path.termination,
        "breakpoints": solve.path.breakpoints.len(),
        "kkt_worst_violation": solve.kkt_worst_violation,
        "kkt_passed": solve.kkt_passed,
    })
}

fn config_value<T: Serialize>(args: &T, resolved: Value) -> Result<Value> {
    Ok(json!({ "args": serde_json::to_value(args)?, "resolved": resolved }))
}

fn pai(a: &PaiArgs, cli: &Cli) -> Result<bool> {
    let axis = parse_axis(&a.axis)?;
    ensure!((1..=16).contains(&a.bits), "--bits must be in 1..=16");
    a.path.validate()?;
    let theta = match (a.theta, a.midpoint) {
        (Some(t), None) => t,
        (None, Some(k)) => {
            ensure!(k < (1u64 << a.bits), "--midpoint must be below 2^bits");
            pai_midpoint(a.bits, k)
        }
        _ => bail!("give exactly one of --theta and --midpoint"),
    };
    ensure!(theta.is_finite(), "theta must be finite");
    let cfg = PaiConfig {
        solve: a.path.options(),
        interpolation_steps: a.interpolation_steps,
        clifford_baseline: a.clifford_baseline,
        shots: a.shots,
        seed: cli.seed,
        ..PaiConfig::new(a.bits, axis, theta)
    };
    let r = run_pai(&cfg)?;
    let mut b = Bundle::create(&a.out.out)?;
    b.write_library(&r.library.to_json()?)?;
    write_solve(&mut b, &r.problem, &r.solve)?;
    let baseline = r.baseline.as_ref().map(|bl| solve_summary(&bl.solve));
    if let Some(bl) = &r.baseline {
        b.write("baseline_tradeoff.csv", &tradeoff_csv(&bl.solve.tradeoff))?;
        b.certify("baseline_kkt", bl.solve.kkt_passed);
    }
    if let Some(v) = &r.validation {
        b.certify("sampler_mean", v.within_4se);
        b.certify("sampler_variance", v.variance_within_bound);
    }
    b.write_json(
        "solutions.json",
        &json!({
            "target": { "axis": axis, "theta": theta, "nearest_notch": (theta / notch_angle(a.bits, 1)).round() },
            "solve": solve_summary(&r.solve),
            "interpolation": r.interpolation,
            "diagnostics": r.diagnostics,
            "baseline": baseline,
            "validation": r.validation,
        }),
    )?;
    b.finish("pai", config_value(a, json!({ "theta": theta, "axis": axis }))?, cli.seed, cli.threads)
}

fn clifford_t(a: &CliffordTArgs, cli: &Cli) -> Result<bool> {
    ensure!(a.theta.is_finite(), "--theta must be finite");
    ensure!(a.epsilon > 0.0 && a.epsilon.is_finite(), "--epsilon must be positive");
    ensure!(a.max_entries >= 1, "--max-entries must be at least 1");
    a.path.validate()?;
    let cfg = CliffordTConfig {
        max_entries: a.max_entries,
        clifford_recovery: !a.no_recovery,
        solve: a.path.options(),
        shots: a.shots,
        seed: cli.seed,
        ..CliffordTConfig::new(a.theta, a.t_budget, a.epsilon)
    };
    let r = run_clifford_t(&cfg)?;
    let mut b = Bundle::create(&a.out.out)?;
    b.write_library(&r.library.to_json()?)?;
    write_solve(&mut b, &r.problem, &r.solve)?;
    b.certify("baseline_kkt", r.baseline.solve.kkt_passed);
    if let Some(v) = &r.validation {
        b.certify("sampler_mean", v.within_4se);
        b.certify("sampler_variance", v.variance_within_bound);
    }
    let gamma = r.solve.exact.as_ref().map(|s| s.gamma.clone());
    let mut csv = String::from("index,label,angle,theta,phi,gamma,nonzero\n");
    for (l, (e, o)) in r.library.entries().iter().zip(&r.overrotations).enumerate() {
        let g = gamma.as_ref().map_or(0.0, |g| g[l]);
        let nz = r.support.contains(&l);
        csv.push_str(&format!("{l},{},{:e},{:e},{:e},{g:e},{nz}\n", e.label, o.angle, o.theta, o.phi));
    }
    b.write("overrotations.csv", &csv)?;
    b.write_json(
        "solutions.json",
        &json!({
            "solve": solve_summary(&r.solve),
            "support": r.support,
            "zero": r.zero,
            "diagnostics": r.diagnostics,
            "baseline": solve_summary(&r.baseline.solve),
            "validation": r.validation,
        }),
    )?;
    b.finish("clifford-t", config_value(a, json!({}))?, cli.seed, cli.threads)
}

fn control(a: &ControlArgs, cli: &Cli) -> Result<bool> {
    ensure!(a.pulses >= 1, "--pulses must be at least 1");
    ensure!(a.q >= 1, "--q must be at least 1");
    ensure!(a.range_lo.is_finite() && a.range_hi.is_finite() && a.range_lo <= a.range_hi, "need range-lo <= range-hi");
    ensure!(a.cap > 0.0 && a.dt > 0.0 && a.steps >= 1, "cap, dt and steps must be positive");
    ensure!(a.t_max.is_finite() && a.t_max >= 0.0, "--t-max must be finite and >= 0");
    if let Some(band) = a.band {
        ensure!(band.is_finite() && band >= 0.0, "--band must be finite and >= 0");
    }
    a.path.validate()?;
    let cfg = ControlConfig {
        n_pulses: a.pulses,
        q: a.q,
        range: (a.range_lo, a.range_hi),
        band: a.band,
        frame_variants: !a.no_frame_variants,
        optimize: OptimizeOptions {
            n_steps: a.steps,
            dt: a.dt,
            cap: a.cap,
            max_iterations: a.max_iterations,
            seed: cli.seed,
        },
        solve: a.path.options(),
        shots: a.shots,
        n_times: a.times,
        t_max: a.t_max,
    };
    let r = run_control(&cfg)?;
    let mut b = Bundle::create(&a.out.out)?;
    b.write_library(&r.library.to_json()?)?;
    write_solve(&mut b, &r.problem, &r.solve)?;
    let offsets = r.library.offsets();
    let labels = r.library.labels();
    let mut csv = String::from("offset");
    for l in &labels {
        csv.push(',');
        csv.push_str(l);
    }
    csv.push_str(",exact,unit_norm\n");
    for (i, d) in offsets.iter().enumerate() {
        csv.push_str(&format!("{d:e}"));
        for col in &r.column_errors {
            csv.push_str(&format!(",{:e}", col[i]));
        }
        for e in [&r.exact_errors, &r.unit_norm_errors] {
            match e {
                Some(v) => csv.push_str(&format!(",{:e}", v[i])),
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    b.write("errors.csv", &csv)?;
    if let Some(nmr) = &r.nmr {
        b.write("signals.csv", &nmr.signals.to_csv())?;
        b.certify("nmr_signal", nmr.within_4se);
    }
    let converged: Vec<bool> = r.runs.iter().map(|p| p.converged).collect();
    b.write_json(
        "solutions.json",
        &json!({
            "solve": solve_summary(&r.solve),
            "diagnostics": r.diagnostics,
            "best_pulse_mean_error": r.best_column_error(),
            "unit_norm_mean_error": r.unit_norm_mean_error(),
            "unit_norm_beats_every_pulse": r.unit_norm_dominates(),
            "pulses_converged": converged,
            "nmr": r.nmr,
        }),
    )?;
    b.finish("control", config_value(a, json!({ "offsets": offsets }))?, cli.seed, cli.threads)
}

fn solve(a: &SolveArgs, cli: &Cli) -> Result<bool> {
    a.path.validate()?;
    let problem = match a.qubits {
        Some(n) => {
            let f = fs::File::open(&a.problem).with_context(|| format!("opening {}", a.problem.display()))?;
            DesignProblem::read_binary(std::io::BufReader::new(f), n)?
        }
        None => {
            let s = fs::read_to_string(&a.problem).with_context(|| format!("reading {}", a.problem.display()))?;
            DesignProblem::from_json(&s)?
        }
    };
    let report = solve_and_certify(&problem, &a.path.options())?;
    let mut b = Bundle::create(&a.out.out)?;
    write_solve(&mut b, &problem, &report)?;
    b.write_json(
        "solutions.json",
        &json!({ "solve": solve_summary(&report), "diagnostics": problem.diagnostics() }),
    )?;
    b.finish("solve", config_value(a, json!({}))?, cli.seed, cli.threads)
}

fn read_gamma(path: &PathBuf, which: Which) -> Result<Vec<f64>> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&s)?;
    let key = match which {
        Which::Exact => "exact",
        Which::UnitNorm => "unit_norm",
    };
    let sol = &v["solve"][key];
    ensure!(!sol.is_null(), "{} has no {key} solution", path.display());
    Ok(serde_json::from_value(sol["gamma"].clone())?)
}

fn sample(a: &SampleArgs, cli: &Cli) -> Result<bool> {
    ensure!(a.shots >= 1, "--shots must be at least 1");
    ensure!(a.copies >= 1, "--copies must be at least 1");
    ensure!(a.post_angle.is_finite(), "--post-angle must be finite");
    let post_axis = a.post_axis.as_deref().map(parse_axis).transpose()?;
    let lib_json = fs::read_to_string(&a.library).with_context(|| format!("reading {}", a.library.display()))?;
    let lib = GateLibrary::from_json(&lib_json)?;
    let gamma = read_gamma(&a.solutions, a.solution)?;
    let scheme = scheme_from_gamma(&gamma, &lib)?;
    let mut b = Bundle::create(&a.out.out)?;
    b.write_library(&lib_json)?;
    if lib.entries().iter().any(|e| e.is_offset_dependent()) {
        ensure!(lib.n_qubits() == 1, "signals need a single-qubit library");
        let times: Vec<f64> = (0..a.times).map(|k| k as f64 * a.t_max / a.times as f64).collect();
        let signals = nmr_estimate_signal(&scheme, &lib, &lib.offsets(), &times, a.shots, cli.seed)?;
        b.write("signals.csv", &signals.to_csv())?;
    } else {
        let n = lib.n_qubits();
        let obs_str = a.observable.clone().unwrap_or_else(|| "Z".repeat(n));
        let obs = PauliObservable::pauli(&obs_str)?;
        ensure!(obs.n_qubits() == n, "observable acts on {} qubits, library on {n}", obs.n_qubits());
        let ptms = lib.ptms()?;
        let mut c = Circuit::new(n)?;
        for _ in 0..a.copies {
            c = c.push_scheme(scheme.clone(), ptms.clone())?;
        }
        if let Some(axis) = post_axis {
            ensure!(n == 1, "--post-axis needs a single-qubit library");
            c = c.push_fixed(rotation_gate(axis, a.post_angle))?;
        }
        let mode = match a.mode {
            Mode::Analytic => EstimatorMode::AnalyticWeight,
            Mode::Full => EstimatorMode::FullShot,
        };
        let v = validate_circuit(&c, &DensityMatrix::basis_state(n, 0)?, &obs, a.shots, mode, cli.seed)?;
        b.certify("sampler_mean", v.within_4se);
        b.certify("sampler_variance", v.variance_within_bound);
        b.write_json("estimate.json", &json!({ "observable": obs_str, "validation": v }))?;
    }
    b.finish("sample", config_value(a, json!({}))?, cli.seed, cli.threads)
}
