use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use drops_core::diagnostics::{
    estimate_rotation_params, perturbed_rotation, spinor_sweep, sweep_csv, SweepKind,
};
use drops_core::drops::{decompose, evaluate, synthesize, DropletCoefficients};
use drops_core::gates::{lookup, resolve_with, TABLE};
use drops_core::pulse::{PulseSequence, J_HC};
use drops_core::recon::{equiangular_grid, fit_sample_set, gauss_legendre_grid, mesh, MeshSource, SamplingGrid};
use drops_core::spinop::Operator;
use drops_core::tensors::{droplet_basis, DropletLabel};
use drops_core::tomo::{run_tomography, Mode, Preparation, Target, TomoConfig, VTransforms};
use drops_core::DropsError;

mod angle;

use angle::{parse_angle, parse_angle_list};

#[derive(Parser)]
#[command(name = "drops", version, about = "Wigner process tomography of one- and two-qubit gates with DROPS")]
struct Cli {
    /// Print the gate registry and exit.
    #[arg(long)]
    list_gates: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Droplet coefficients of an operator, as JSON.
    Decompose(DecomposeArgs),
    /// Operator from droplet-coefficient JSON.
    Synthesize(SynthesizeArgs),
    /// Simulated tomography: samples CSV, fit report JSON, optional PLY meshes.
    Tomo(TomoArgs),
    /// Pulse sequence of a registry gate's controlled version, as JSON.
    Sequence(SequenceArgs),
    /// Rotation or phase-shift sweep, as CSV.
    Spinor(SpinorArgs),
    /// Perturbed rotation droplets and estimated rotation parameters.
    Errors(ErrorsArgs),
    /// Print the gate registry.
    ListGates,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Registry gate name or parametric form such as `rx:pi/2`.
    #[arg(long, conflicts_with = "input")]
    gate: Option<String>,
    /// Operator JSON file `{n_spins, re, im}`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    /// Droplet-coefficient JSON file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Ideal,
    Nmr,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PrepArg {
    Exact,
    Sequence,
}

/// Every field may also come from the `--config` JSON file (same names,
/// underscores instead of dashes); flags win.
#[derive(Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TomoArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Registry gate name or parametric form.
    #[arg(long)]
    gate: Option<String>,
    /// Operator JSON file for the system propagator.
    #[arg(long)]
    unitary: Option<PathBuf>,
    /// Pulse-sequence JSON realizing the controlled propagator.
    #[arg(long)]
    sequence: Option<PathBuf>,
    /// `13x25` (equiangular) or `gl2` (Gauss–Legendre, band limit 2).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Standard deviation of the noise added to each expectation value.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated droplet labels such as `empty,1`; default all.
    #[arg(long)]
    labels: Option<String>,
    /// Initial-state preparation for `--sequence` targets.
    #[arg(long, value_enum)]
    prep: Option<PrepArg>,
    /// Relative system polarization for `--prep sequence`.
    #[arg(long)]
    gamma1: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one PLY mesh per droplet.
    #[arg(long)]
    mesh: bool,
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Args)]
struct SequenceArgs {
    #[arg(long)]
    gate: String,
    /// Coupling constant in Hz.
    #[arg(long, default_value_t = J_HC)]
    coupling: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Rotation,
    Phase,
}

#[derive(Args)]
struct SpinorArgs {
    #[arg(long, value_enum)]
    kind: SweepArg,
    /// `0,pi/2,pi` or inclusive range `0:4pi:pi/2`.
    #[arg(long, allow_hyphen_values = true)]
    angles: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ErrorsArgs {
    #[arg(long, default_value = "pi", allow_hyphen_values = true)]
    psi: String,
    /// Unit rotation axis `x,y,z`.
    #[arg(long, default_value = "1,0,0", allow_hyphen_values = true)]
    axis: String,
    /// Relative flip-angle factor.
    #[arg(long, default_value_t = 1.0)]
    flip: f64,
    /// Axis tilt about z.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    tilt: String,
    /// Directory for meshes and the estimate JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    resolution: usize,
}

enum CliError {
    Input(String),
    Numerical(String),
}

impl From<DropsError> for CliError {
    fn from(e: DropsError) -> Self {
        match e {
            DropsError::IllConditioned(_)
            | DropsError::Underdetermined { .. }
            | DropsError::NotUnitary(_)
            | DropsError::NotHermitian(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            let tail = if text.ends_with('\n') { "" } else { "\n" };
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = write!(stdout, "{text}{tail}");
            Ok(())
        }
    }
}

fn resolve_gate(spec: &str) -> CliResult<Operator> {
    Ok(resolve_with(spec, |a| parse_angle(a).map_err(DropsError::Invalid))?)
}

fn list_gates() -> CliResult<()> {
    let text: String = TABLE.iter().map(|g| format!("{}\t{}\n", g.name, g.description)).collect();
    emit(None, &text)
}

fn cmd_decompose(args: DecomposeArgs) -> CliResult<()> {
    let op = match (&args.gate, &args.input) {
        (Some(g), _) => resolve_gate(g)?,
        (None, Some(p)) => serde_json::from_str::<Operator>(&read(p)?).map_err(input)?,
        (None, None) => return Err(CliError::Input("give --gate or --input".into())),
    };
    emit(args.out.as_deref(), &decompose(&op)?.to_json()?)
}

fn cmd_synthesize(args: SynthesizeArgs) -> CliResult<()> {
    let coeffs = DropletCoefficients::from_json(&read(&args.input)?)?;
    let op = synthesize(&coeffs)?;
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&op).map_err(input)?)
}

fn parse_grid(spec: &str) -> CliResult<SamplingGrid> {
    let s = spec.trim().to_ascii_lowercase();
    if let Some(j) = s.strip_prefix("gl").map(|r| r.trim_start_matches(':')) {
        let j: usize = j.parse().map_err(|_| CliError::Input(format!("bad grid '{spec}'")))?;
        if j > 2 {
            return Err(CliError::Input("Gauss–Legendre band limit must be at most 2".into()));
        }
        return Ok(gauss_legendre_grid(j));
    }
    let (b, a) = s
        .split_once('x')
        .ok_or_else(|| CliError::Input(format!("bad grid '{spec}', expected e.g. 13x25 or gl2")))?;
    let parse = |v: &str| v.parse::<usize>().map_err(|_| CliError::Input(format!("bad grid '{spec}'")));
    Ok(equiangular_grid(parse(b)?, parse(a)?)?)
}

fn parse_labels(spec: &str) -> CliResult<Vec<DropletLabel>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<DropletLabel>().map_err(CliError::from))
        .collect()
}

fn merge_config(mut a: TomoArgs) -> CliResult<TomoArgs> {
    let Some(path) = a.config.take() else { return Ok(a) };
    let c: TomoArgs = serde_json::from_str(&read(&path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(TomoArgs {
        config: None,
        gate: a.gate.or(c.gate),
        unitary: a.unitary.or(c.unitary),
        sequence: a.sequence.or(c.sequence),
        grid: a.grid.or(c.grid),
        mode: a.mode.or(c.mode),
        noise: a.noise.or(c.noise),
        seed: a.seed.or(c.seed),
        labels: a.labels.or(c.labels),
        prep: a.prep.or(c.prep),
        gamma1: a.gamma1.or(c.gamma1),
        out: a.out.or(c.out),
        mesh: a.mesh || c.mesh,
        resolution: a.resolution.or(c.resolution),
    })
}

fn label_file_stem(label: DropletLabel) -> String {
    format!("mesh_{label}")
}

fn cmd_tomo(args: TomoArgs) -> CliResult<()> {
    let args = merge_config(args)?;
    let sources = [args.gate.is_some(), args.unitary.is_some(), args.sequence.is_some()];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err(CliError::Input("give exactly one of --gate, --unitary, --sequence".into()));
    }
    let target = if let Some(g) = &args.gate {
        Target::Unitary(resolve_gate(g)?)
    } else if let Some(p) = &args.unitary {
        Target::Unitary(serde_json::from_str(&read(p)?).map_err(input)?)
    } else {
        let path = args.sequence.as_ref().expect("checked above");
        let sequence = PulseSequence::from_json(&read(path)?, J_HC)?;
        let n_system = sequence.max_spin().unwrap_or(1).max(1);
        let preparation = match args.prep.unwrap_or(PrepArg::Exact) {
            PrepArg::Exact => Preparation::Exact,
            PrepArg::Sequence => Preparation::Sequence {
                gamma0: 1.0,
                gamma1: args.gamma1.unwrap_or(0.2514),
            },
        };
        Target::Sequence {
            sequence,
            n_system,
            preparation,
        }
    };
    let n_system = match &target {
        Target::Unitary(u) => u.n_spins(),
        Target::Sequence { n_system, .. } => *n_system,
    };
    droplet_basis(n_system)?;

    let grid = parse_grid(args.grid.as_deref().unwrap_or("13x25"))?;
    let mode = match args.mode.unwrap_or(ModeArg::Ideal) {
        ModeArg::Ideal => Mode::Ideal,
        ModeArg::Nmr => Mode::Nmr,
    };
    let mut config = TomoConfig::new(target, grid.clone(), mode);
    config.noise_sigma = args.noise.unwrap_or(0.0);
    config.seed = args.seed.unwrap_or(0);
    config.labels = parse_labels(args.labels.as_deref().unwrap_or(""))?;
    if mode == Mode::Nmr && n_system > 1 {
        config.v_transforms = VTransforms::local(n_system)?;
    }

    let samples = run_tomography(&config)?;
    let out = args.out.unwrap_or_else(|| PathBuf::from("tomo-out"));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    write(&out.join("samples.csv"), &samples.to_csv()?)?;
    let fit = fit_sample_set(&samples, &grid)?;
    write(&out.join("fit.json"), &serde_json::to_string_pretty(&fit).map_err(input)?)?;

    if args.mesh {
        let resolution = args.resolution.unwrap_or(32);
        let labels: Vec<DropletLabel> = samples.series.keys().map(|(l, _)| *l).collect();
        let mut done = Vec::new();
        for label in labels {
            if done.contains(&label) {
                continue;
            }
            done.push(label);
            let m = mesh(MeshSource::Droplet(&fit.coefficients, label), resolution)?;
            write(&out.join(format!("{}.ply", label_file_stem(label))), &m.to_ply())?;
        }
        if n_system == 1 {
            let m = mesh(MeshSource::Combined(&fit.coefficients), resolution)?;
            write(&out.join("mesh_combined.ply"), &m.to_ply())?;
        }
    }
    eprintln!(
        "{} samples, residual rms {:.3e}, condition number {:.3e}, written to {}",
        samples.len(),
        fit.residual_rms,
        fit.condition_number,
        out.display()
    );
    Ok(())
}

fn cmd_sequence(args: SequenceArgs) -> CliResult<()> {
    let gate = lookup(&args.gate).ok_or_else(|| CliError::Input(format!("unknown gate '{}'", args.gate)))?;
    if !args.coupling.is_finite() || args.coupling <= 0.0 {
        return Err(CliError::Input("coupling must be positive".into()));
    }
    emit(None, &serde_json::to_string_pretty(&gate.sequence(args.coupling)).map_err(input)?)
}

fn cmd_spinor(args: SpinorArgs) -> CliResult<()> {
    let angles = parse_angle_list(&args.angles).map_err(CliError::Input)?;
    let kind = match args.kind {
        SweepArg::Rotation => SweepKind::Rotation,
        SweepArg::Phase => SweepKind::PhaseShift,
    };
    emit(args.out.as_deref(), &sweep_csv(&spinor_sweep(kind, &angles)?)?)
}

#[derive(Serialize)]
struct ErrorsReport {
    psi: f64,
    axis: Option<[f64; 3]>,
    axis_indeterminate: bool,
    global_phase: f64,
    f0: f64,
    flip_error: f64,
    tilt: f64,
}

fn cmd_errors(args: ErrorsArgs) -> CliResult<()> {
    let psi = parse_angle(&args.psi).map_err(CliError::Input)?;
    let tilt = parse_angle(&args.tilt).map_err(CliError::Input)?;
    let axis: Vec<f64> = args
        .axis
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Input(format!("bad axis '{}'", args.axis))))
        .collect::<CliResult<_>>()?;
    let axis: [f64; 3] = axis
        .try_into()
        .map_err(|_| CliError::Input(format!("axis '{}' needs three components", args.axis)))?;
    let coeffs = perturbed_rotation(psi, axis, args.flip, tilt)?;
    let est = estimate_rotation_params(&coeffs)?;
    let report = ErrorsReport {
        psi: est.psi,
        axis: est.axis,
        axis_indeterminate: est.axis.is_none(),
        global_phase: est.global_phase,
        f0: evaluate(&coeffs, DropletLabel::Empty, 0.0, 0.0, None)?.re,
        flip_error: args.flip,
        tilt,
    };
    let json = serde_json::to_string_pretty(&report).map_err(input)?;
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
        for (label, _) in droplet_basis(1)? {
            let m = mesh(MeshSource::Droplet(&coeffs, label), args.resolution)?;
            write(&out.join(format!("{}.ply", label_file_stem(label))), &m.to_ply())?;
        }
        let m = mesh(MeshSource::Combined(&coeffs), args.resolution)?;
        write(&out.join("mesh_combined.ply"), &m.to_ply())?;
        write(&out.join("estimate.json"), &json)?;
    }
    emit(None, &json)
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.list_gates {
        return list_gates();
    }
    match cli.command {
        Some(Command::Decompose(a)) => cmd_decompose(a),
        Some(Command::Synthesize(a)) => cmd_synthesize(a),
        Some(Command::Tomo(a)) => cmd_tomo(a),
        Some(Command::Sequence(a)) => cmd_sequence(a),
        Some(Command::Spinor(a)) => cmd_spinor(a),
        Some(Command::Errors(a)) => cmd_errors(a),
        Some(Command::ListGates) => list_gates(),
        None => Err(CliError::Input("no command given; see --help".into())),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
