//! `bitslab`: scriptable front end for the contextuality laboratory.
//!
//! Every command is deterministic given its flags and seed, prints JSON to
//! stdout, and reserves file output for CSV trajectories (`--out`).
//!
//! Exit codes: 0 success / claim verified, 1 claim falsified, 2 usage or
//! parameter error.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bitslab_core::fulo::{
    self, Arm, Axis, FuloDevice, PacketPairModel, SpinState2, TrajectoryRecord,
};
use bitslab_core::hidden::ContextChoice;
use bitslab_core::peres_mermin::{
    build_square, exhaustive_assignment_search, verify_structure, NoGoReport, PmLabel,
    StructureReport,
};
use bitslab_core::protocol::{context_implied_bit, run_protocol, sweep};
use bitslab_core::quantum::{Complex64, TwoQubitState};
use bitslab_core::{RandomStream, Sign};

const EXIT_OK: u8 = 0;
const EXIT_FALSIFIED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "bitslab",
    version,
    about = "Two-qubit contextuality laboratory: verify the observable square, run the \
             context-signaling protocol, and trace Bohmian Stern-Gerlach loops"
)]
struct Cli {
    /// Output layout for the JSON printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Compact single-line JSON.
    Json,
    /// Pretty-printed JSON.
    Pretty,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the square's structure exactly and run the 512-assignment
    /// no-go search; exits 0 only if both hold.
    PmVerify(PmVerifyArgs),
    /// The three-step bit-signaling protocol.
    #[command(subcommand)]
    Bits(BitsCommand),
    /// Full-loop Stern-Gerlach trajectories and stability reports.
    #[command(subcommand)]
    Fulo(FuloCommand),
}

#[derive(Args)]
struct PmVerifyArgs {
    /// Negative control: flip one entry's sign before verifying.
    #[arg(long, hide = true)]
    tamper: bool,
}

#[derive(Subcommand)]
enum BitsCommand {
    /// Run the protocol once and print the transcript.
    Run(BitsRunArgs),
    /// Run the protocol for both contexts across many states and trials.
    Sweep(BitsSweepArgs),
}

#[derive(Args)]
struct BitsRunArgs {
    /// Two-qubit state: `singlet`, `aa`, `plus-y`, or 8 comma-separated
    /// amplitude components (re,im per basis vector aa,ab,ba,bb).
    #[arg(long)]
    state: String,

    /// Joint-measurement context to choose in step 3.
    #[arg(long, value_enum)]
    context: ContextArg,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BitsSweepArgs {
    /// Number of random states to sweep.
    #[arg(long, default_value_t = 10)]
    states: u32,

    /// Trials per state and context.
    #[arg(long, default_value_t = 100)]
    trials: u32,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContextArg {
    Xxyy,
    Xyyx,
}

impl From<ContextArg> for ContextChoice {
    fn from(value: ContextArg) -> ContextChoice {
        match value {
            ContextArg::Xxyy => ContextChoice::Xxyy,
            ContextArg::Xyyx => ContextChoice::Xyyx,
        }
    }
}

#[derive(Subcommand)]
enum FuloCommand {
    /// Integrate guided trajectories through one device and write CSV.
    Trajectory(TrajectoryArgs),
    /// Carry a particle through a device list and report hidden-value
    /// stability per axis.
    Sequence(SequenceArgs),
    /// Preset: the flipped pair (+x, -x) on |+>; exits 0 only if axis x is
    /// flagged unstable.
    Fig2(Fig2Args),
}

#[derive(Args)]
struct Kinematics {
    /// Packet-center speed.
    #[arg(long, default_value_t = fulo::DEFAULT_SPLIT_SPEED)]
    split_speed: f64,

    /// Time to maximum separation.
    #[arg(long, default_value_t = fulo::DEFAULT_HALF_DURATION)]
    t_half: f64,

    /// Gaussian packet width.
    #[arg(long, default_value_t = fulo::DEFAULT_PACKET_WIDTH)]
    sigma: f64,
}

#[derive(Args)]
struct TrajectoryArgs {
    /// Probability weight on the up arm. Mutually exclusive with --state.
    #[arg(long, conflicts_with = "state")]
    p_up: Option<f64>,

    /// Spin state: `a`, `b`, `plus-y`, `minus-y`, or 4 comma-separated
    /// amplitude components; the device axis then sets the weight.
    #[arg(long)]
    state: Option<String>,

    /// Device axis (used with --state).
    #[arg(long, value_enum, default_value_t = AxisArg::X)]
    axis: AxisArg,

    /// Device orientation: +1 routes the +1 eigenstate up.
    #[arg(long, value_parser = parse_orientation, default_value = "+1")]
    orientation: Sign,

    /// Initial-position quantiles to integrate (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "0.7")]
    q: Vec<f64>,

    /// Integration step; defaults to t_half / 2000.
    #[arg(long)]
    dt: Option<f64>,

    #[command(flatten)]
    kinematics: Kinematics,

    /// CSV output path; with multiple quantiles, `.q<i>` is inserted
    /// before the extension.
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct SequenceArgs {
    /// Device list, e.g. `+x,-x` or `+x,+y,+x`.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    devices: Vec<String>,

    /// Spin state (see `trajectory --state`).
    #[arg(long, default_value = "plus-y")]
    state: String,

    /// The particle's hidden coordinate.
    #[arg(long, default_value_t = 0.9)]
    q: f64,

    #[command(flatten)]
    kinematics: Kinematics,
}

#[derive(Args)]
struct Fig2Args {
    #[arg(long, default_value_t = 0.9)]
    q: f64,

    #[command(flatten)]
    kinematics: Kinematics,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(value: AxisArg) -> Axis {
        match value {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

fn parse_orientation(raw: &str) -> Result<Sign, String> {
    match raw {
        "+1" | "1" | "+" => Ok(Sign::Plus),
        "-1" | "-" => Ok(Sign::Minus),
        _ => Err(format!("orientation must be +1 or -1, got `{raw}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    let code = match cli.command {
        Command::PmVerify(args) => cmd_pm_verify(&args, format),
        Command::Bits(BitsCommand::Run(args)) => cmd_bits_run(&args, format),
        Command::Bits(BitsCommand::Sweep(args)) => cmd_bits_sweep(&args, format),
        Command::Fulo(FuloCommand::Trajectory(args)) => cmd_fulo_trajectory(&args, format),
        Command::Fulo(FuloCommand::Sequence(args)) => cmd_fulo_sequence(&args, format),
        Command::Fulo(FuloCommand::Fig2(args)) => cmd_fulo_fig2(&args, format),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Usage-level failure: maps to exit 2 with a message on stderr.
type CmdResult = Result<u8, String>;

fn emit<T: Serialize>(value: &T, format: Format) {
    let rendered = match format {
        Format::Json => serde_json::to_string(value),
        Format::Pretty => serde_json::to_string_pretty(value),
    }
    .expect("reports serialize");
    println!("{rendered}");
}

#[derive(Serialize)]
struct PmVerifyDoc {
    structure: StructureReport,
    no_go: NoGoReport,
    passed: bool,
}

fn cmd_pm_verify(args: &PmVerifyArgs, format: Format) -> CmdResult {
    let mut square = build_square();
    if args.tamper {
        square.flip_entry_sign(PmLabel::X1);
    }
    let structure = verify_structure(&square);
    let no_go = exhaustive_assignment_search(&square);
    let passed = structure.passed && no_go.all_six_satisfiable == 0;
    emit(
        &PmVerifyDoc {
            structure,
            no_go,
            passed,
        },
        format,
    );
    Ok(if passed { EXIT_OK } else { EXIT_FALSIFIED })
}

fn cmd_bits_run(args: &BitsRunArgs, format: Format) -> CmdResult {
    let state = parse_two_qubit_state(&args.state)?;
    let context = ContextChoice::from(args.context);
    let mut stream = RandomStream::from_seed(args.seed);
    let transcript = run_protocol(&state, context, &mut stream).map_err(|e| e.to_string())?;
    let verified =
        transcript.bit == context_implied_bit(context) && transcript.consistent;
    emit(&transcript, format);
    Ok(if verified { EXIT_OK } else { EXIT_FALSIFIED })
}

fn cmd_bits_sweep(args: &BitsSweepArgs, format: Format) -> CmdResult {
    let base = RandomStream::from_seed(args.seed);
    let mut state_stream = base.fork(u64::MAX);
    let states: Vec<TwoQubitState> = (0..args.states)
        .map(|_| TwoQubitState::random(&mut state_stream))
        .collect();
    let report = sweep(&states, args.trials, &base).map_err(|e| e.to_string())?;
    let verified = report.bit_match_fraction == 1.0 && report.consistency_fraction == 1.0;
    emit(&report, format);
    Ok(if verified { EXIT_OK } else { EXIT_FALSIFIED })
}

#[derive(Serialize)]
struct TrajectorySummary {
    q: f64,
    z0: f64,
    arm: Arm,
    final_position: f64,
    samples: usize,
    out: String,
    model: PacketPairModel,
    dt: f64,
}

fn cmd_fulo_trajectory(args: &TrajectoryArgs, format: Format) -> CmdResult {
    let device = build_device(args.axis.into(), args.orientation, &args.kinematics)?;
    let p_up = match (&args.p_up, &args.state) {
        (Some(p), _) => {
            if !(0.0..=1.0).contains(p) {
                return Err(format!("--p-up must lie in [0, 1], got {p}"));
            }
            *p
        }
        (None, Some(spec)) => {
            let spin = parse_spin_state(spec)?;
            fulo::device_weights(&spin, &device).0
        }
        (None, None) => 0.5,
    };
    let model = PacketPairModel::new(
        p_up,
        device.split_speed,
        device.half_duration,
        device.packet_width,
    )
    .map_err(|e| e.to_string())?;
    let dt = args.dt.unwrap_or(model.half_duration / 2000.0);

    for &q in &args.q {
        if !(q > 0.0 && q < 1.0) {
            return Err(format!("--q must lie strictly in (0, 1), got {q}"));
        }
    }

    let mut summaries = Vec::new();
    for (index, &q) in args.q.iter().enumerate() {
        let z0 = fulo::position_of_quantile(q, model.packet_width);
        let record = fulo::integrate_trajectory(&model, z0, dt).map_err(|e| e.to_string())?;
        let path = if args.q.len() == 1 {
            args.out.clone()
        } else {
            indexed_path(&args.out, index)
        };
        write_csv(&record, &path)?;
        summaries.push(TrajectorySummary {
            q,
            z0,
            arm: record.arm,
            final_position: record.final_position(),
            samples: record.samples.len(),
            out: path.display().to_string(),
            model,
            dt: record.dt,
        });
    }
    emit(&summaries, format);
    Ok(EXIT_OK)
}

fn cmd_fulo_sequence(args: &SequenceArgs, format: Format) -> CmdResult {
    let spin = parse_spin_state(&args.state)?;
    if !(args.q > 0.0 && args.q < 1.0) {
        return Err(format!("--q must lie strictly in (0, 1), got {}", args.q));
    }
    let devices = args
        .devices
        .iter()
        .map(|token| parse_device(token, &args.kinematics))
        .collect::<Result<Vec<_>, _>>()?;
    let report = fulo::hv_stability_report(&spin, args.q, &devices);
    emit(&report, format);
    Ok(EXIT_OK)
}

fn cmd_fulo_fig2(args: &Fig2Args, format: Format) -> CmdResult {
    if !(args.q > 0.0 && args.q < 1.0) {
        return Err(format!("--q must lie strictly in (0, 1), got {}", args.q));
    }
    let devices = [
        build_device(Axis::X, Sign::Plus, &args.kinematics)?,
        build_device(Axis::X, Sign::Minus, &args.kinematics)?,
    ];
    let report = fulo::hv_stability_report(&SpinState2::plus_y(), args.q, &devices);
    let flagged = report.unstable_axes.contains(&Axis::X);
    emit(&report, format);
    Ok(if flagged { EXIT_OK } else { EXIT_FALSIFIED })
}

fn build_device(axis: Axis, orientation: Sign, kin: &Kinematics) -> Result<FuloDevice, String> {
    FuloDevice::new(axis, orientation, kin.split_speed, kin.t_half, kin.sigma)
        .map_err(|e| e.to_string())
}

fn parse_device(token: &str, kin: &Kinematics) -> Result<FuloDevice, String> {
    let (orientation, axis_name) = match token.as_bytes().first() {
        Some(b'+') => (Sign::Plus, &token[1..]),
        Some(b'-') => (Sign::Minus, &token[1..]),
        _ => (Sign::Plus, token),
    };
    let axis = match axis_name.to_ascii_lowercase().as_str() {
        "x" => Axis::X,
        "y" => Axis::Y,
        "z" => Axis::Z,
        other => return Err(format!("unknown device axis `{other}` in `{token}`")),
    };
    build_device(axis, orientation, kin)
}

fn parse_components(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{part}` is not a number in state spec `{spec}`"))
        })
        .collect()
}

fn parse_two_qubit_state(spec: &str) -> Result<TwoQubitState, String> {
    match spec {
        "singlet" => return Ok(TwoQubitState::singlet()),
        "aa" => return Ok(TwoQubitState::aa()),
        "plus-y" => return Ok(TwoQubitState::plus_plus()),
        _ => {}
    }
    if !spec.contains(',') {
        return Err(format!(
            "unknown state preset `{spec}` (expected singlet, aa, plus-y, or 8 components)"
        ));
    }
    let parts = parse_components(spec)?;
    if parts.len() != 8 {
        return Err(format!(
            "a raw two-qubit state needs 8 components (re,im x 4), got {}",
            parts.len()
        ));
    }
    let amps = std::array::from_fn(|k| Complex64::new(parts[2 * k], parts[2 * k + 1]));
    TwoQubitState::from_components(amps).map_err(|e| e.to_string())
}

fn parse_spin_state(spec: &str) -> Result<SpinState2, String> {
    match spec {
        "a" => return Ok(SpinState2::a()),
        "b" => return Ok(SpinState2::b()),
        "plus-y" => return Ok(SpinState2::plus_y()),
        "minus-y" => return Ok(SpinState2::minus_y()),
        _ => {}
    }
    if !spec.contains(',') {
        return Err(format!(
            "unknown spin preset `{spec}` (expected a, b, plus-y, minus-y, or 4 components)"
        ));
    }
    let parts = parse_components(spec)?;
    if parts.len() != 4 {
        return Err(format!(
            "a raw spin state needs 4 components (re,im x 2), got {}",
            parts.len()
        ));
    }
    let amps = [
        Complex64::new(parts[0], parts[1]),
        Complex64::new(parts[2], parts[3]),
    ];
    SpinState2::from_components(amps).map_err(|e| e.to_string())
}

fn indexed_path(base: &std::path::Path, index: usize) -> std::path::PathBuf {
    match base.extension() {
        Some(ext) => {
            let stem = base.with_extension("");
            let mut name = stem.as_os_str().to_os_string();
            name.push(format!(".q{index}."));
            name.push(ext);
            std::path::PathBuf::from(name)
        }
        None => {
            let mut name = base.as_os_str().to_os_string();
            name.push(format!(".q{index}"));
            std::path::PathBuf::from(name)
        }
    }
}

fn write_csv(record: &TrajectoryRecord, path: &std::path::Path) -> Result<(), String> {
    std::fs::write(path, record.to_csv())
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}
