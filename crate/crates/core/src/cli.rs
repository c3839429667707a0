//! Command-line front end: `run`, `shor`, `characterize`, `bench`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::compiler::{compile_with, parse_circuit, run_schedule, Circuit, CompileOptions, Gate};
use crate::config::{AmplitudeModel, RunConfig};
use crate::detection::{histogram, sample_events, shaped_state, write_events_csv, write_histogram_csv};
use crate::error::Error;
use crate::primitives::{LossTable, PrimitiveKind};
use crate::shor::{
    argument_marginal, classify_sample, extract_order, run_shor, Amplitudes, Factoring, QftMode, SampleOutcome,
    ShorConfig, ShorOptions,
};
use crate::state::{
    basis_state_in, bin_index, probabilities, uniform_state_in, Frame, Polarization, QubitLayout, TimeBinState,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

/// Largest frame `bench` will allocate.
pub const MAX_BENCH_BINS: usize = 1 << 16;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Error },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) | CliError::InFile { source: e, .. } => exit_code(e),
            CliError::Io { .. } => EXIT_USER,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::FrameOverflow { .. } | Error::RailOccupied { .. } | Error::ScheduleInfeasible { .. } => EXIT_INFEASIBLE,
        Error::ResourceLimit(_) => EXIT_RESOURCE,
        Error::InvalidArgument(_) | Error::UnsupportedInstance { .. } | Error::OrderNotFound(_) | Error::Parse { .. } => {
            EXIT_USER
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "timebin",
    version,
    about = "Single-photon time-bin fiber-loop simulator",
    after_help = "Settings come from built-in defaults, then the --config file, then command-line flags; \
                  a flag always wins over the same setting in the config file."
)]
pub struct Cli {
    /// Flat `key = value` run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile and run a circuit file.
    Run(RunArgs),
    /// Compiled order finding for a fixed (N, a) instance.
    Shor(ShorArgs),
    /// Gate characterization: CNOT truth table or Bloch-circle sweeps.
    Characterize(CharacterizeArgs),
    /// Time a depth-20 random circuit on a frame of the given size.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AmplitudeArg {
    Uniform,
    Wavepacket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QftArg {
    Compiled,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Cnot,
    RySweep,
    RzSweep,
}

#[derive(Debug, Default, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Apply the insertion-loss table.
    #[arg(long, value_enum)]
    pub loss: Option<Switch>,
    /// Detector shots; 0 skips sampling.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bin width in ns.
    #[arg(long, value_name = "NS")]
    pub bin_width: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub circuit: PathBuf,
    /// Input state: zero, flat, wavepacket, or a bit string (most
    /// significant bit position first). Defaults to wavepacket when the
    /// config selects it, otherwise zero.
    #[arg(long, value_name = "STATE")]
    pub init: Option<String>,
    /// Frame size in bins; defaults to the register size.
    #[arg(long)]
    pub n_bins: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ShorArgs {
    #[arg(long, default_value_t = 15)]
    pub modulus: u64,
    #[arg(long, default_value_t = 2)]
    pub base: u64,
    /// Residue-to-register table for instances without a built-in circuit.
    #[arg(long, value_name = "FILE")]
    pub encoding: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "compiled")]
    pub qft: QftArg,
    #[arg(long, value_enum)]
    pub amplitudes: Option<AmplitudeArg>,
    /// Comma-separated outcomes to post-process instead of the simulated ones.
    #[arg(long, value_delimiter = ',', value_name = "Y,...")]
    pub samples: Option<Vec<u64>>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CharacterizeArgs {
    #[arg(value_enum)]
    pub target: Target,
    /// Sweep points over one full turn (at least 2).
    #[arg(long, default_value_t = 17)]
    pub steps: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 4096)]
    pub n_bins: usize,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses arguments, runs, and reports errors on stderr. Returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let base = match &cli.config {
        Some(path) => {
            let text = read(path)?;
            RunConfig::parse(&text).map_err(|source| CliError::InFile {
                path: path.clone(),
                source,
            })?
        }
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Run(a) => {
            let mut cfg = apply_common(base, &a.common);
            if a.n_bins.is_some() {
                cfg.n_bins = a.n_bins;
            }
            cfg.check()?;
            cmd_run(&a.circuit, a.init.as_deref(), &cfg)
        }
        Command::Shor(a) => {
            let mut cfg = apply_common(base, &a.common);
            match a.amplitudes {
                Some(AmplitudeArg::Uniform) => cfg.amplitudes = AmplitudeModel::Uniform,
                Some(AmplitudeArg::Wavepacket) if matches!(cfg.amplitudes, AmplitudeModel::Uniform) => {
                    cfg.amplitudes = AmplitudeModel::WavePacket {
                        coherence_time: crate::detection::COHERENCE_TIME_NS,
                        center: None,
                    }
                }
                _ => {}
            }
            cfg.check()?;
            let shor = match &a.encoding {
                Some(path) => {
                    let text = read(path)?;
                    parse_encoding(&text, a.modulus, a.base).map_err(|source| CliError::InFile {
                        path: path.clone(),
                        source,
                    })?
                }
                None => ShorConfig::builtin(a.modulus, a.base)?,
            };
            let qft = match a.qft {
                QftArg::Compiled => QftMode::Compiled,
                QftArg::Classical => QftMode::Classical,
            };
            cmd_shor(&shor, qft, a.samples.as_deref(), &cfg)
        }
        Command::Characterize(a) => {
            let cfg = apply_common(base, &a.common);
            cfg.check()?;
            cmd_characterize(a.target, a.steps, &cfg)
        }
        Command::Bench(a) => {
            let report = bench(a.n_bins, a.depth, a.seed)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            Ok(())
        }
    }
}

fn apply_common(mut cfg: RunConfig, c: &Common) -> RunConfig {
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    if let Some(l) = c.loss {
        cfg.loss_on = l == Switch::On;
    }
    if let Some(s) = c.shots {
        cfg.shots = s;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(w) = c.bin_width {
        cfg.bin_width = w;
    }
    cfg
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(dir: &Path, name: &str) -> CliResult<(PathBuf, BufWriter<fs::File>)> {
    let io_err = |path: &Path, source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

fn write_with(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> CliResult<()> {
    let (path, mut w) = create(dir, name)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|source| CliError::Io { path, source })
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> CliResult<()> {
    write_with(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        writeln!(w)
    })
}

fn initial_state(init: Option<&str>, cfg: &RunConfig, frame: Frame, n_qubits: usize) -> crate::Result<TimeBinState> {
    let init = init.unwrap_or(match cfg.amplitudes {
        AmplitudeModel::Uniform => "zero",
        AmplitudeModel::WavePacket { .. } => "wavepacket",
    });
    match init {
        "zero" => basis_state_in(frame, 0),
        "flat" => uniform_state_in(frame, Polarization::H),
        "wavepacket" => {
            let wp = match cfg.wave_packet(frame)? {
                Some(wp) => wp,
                None => crate::detection::WavePacket::centered(crate::detection::COHERENCE_TIME_NS, frame)?,
            };
            shaped_state(&wp, frame)
        }
        bits => basis_state_in(frame, bin_index(bits, n_qubits)?),
    }
}

/// Compiles and runs a circuit file; writes `probabilities.json` and, with
/// shots, `events.csv` and `histogram.csv`.
pub fn cmd_run(circuit_file: &Path, init: Option<&str>, cfg: &RunConfig) -> CliResult<()> {
    let text = read(circuit_file)?;
    let circuit = parse_circuit(&text).map_err(|source| CliError::InFile {
        path: circuit_file.to_path_buf(),
        source,
    })?;
    let frame = cfg.frame(circuit.layout().n_bins())?;
    let opts = CompileOptions {
        loss: cfg.loss,
        merge_phases: true,
    };
    let schedule = compile_with(&circuit, frame, &opts)?;
    let input = initial_state(init, cfg, frame, circuit.n_qubits())?;
    let output = run_schedule(&schedule, &input, cfg.loss_on)?;

    let survival = output.norm_sqr() / input.norm_sqr();
    let analytic = if cfg.loss_on { schedule.transmission() } else { 1.0 };
    let probs: Vec<_> = probabilities(&output)
        .into_iter()
        .enumerate()
        .map(|(bin, prob)| json!({ "bin": bin, "prob": prob }))
        .collect();
    let report = json!({
        "metadata": {
            "circuit": circuit_file.display().to_string(),
            "qubits": circuit.layout().names(),
            "n_bins": frame.n_bins,
            "bin_width_ns": frame.bin_width,
            "gates": circuit.len(),
            "primitives": schedule.len(),
            "passes": schedule.n_passes(),
            "primitive_counts": {
                "phase_pattern": schedule.count(PrimitiveKind::PhasePattern),
                "pol_rotate": schedule.count(PrimitiveKind::PolRotate),
                "delay": schedule.count(PrimitiveKind::Delay),
                "attenuate": schedule.count(PrimitiveKind::Attenuate),
                "couple": schedule.count(PrimitiveKind::Couple),
            },
            "loss_on": cfg.loss_on,
            "survival_probability": survival,
            "analytic_transmission": analytic,
        },
        "probabilities": probs,
    });
    write_json(&cfg.output_dir, "probabilities.json", &report)?;

    if cfg.shots > 0 {
        let events = sample_events(&output, &cfg.detector, cfg.shots, cfg.seed)?;
        let edges = frame.bin_edges();
        let counts = histogram(&events, &edges)?;
        write_with(&cfg.output_dir, "events.csv", |w| write_events_csv(w, &events))?;
        write_with(&cfg.output_dir, "histogram.csv", |w| write_histogram_csv(w, &edges, &counts))?;
    }
    Ok(())
}

/// Encoding table: `residue value` pairs, plus optional `arg_qubits n` and
/// `fun_qubits m` lines; `#` starts a comment.
pub fn parse_encoding(text: &str, modulus: u64, base: u64) -> crate::Result<ShorConfig> {
    let mut n_arg = 3usize;
    let mut n_fun = None;
    let mut table = std::collections::BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| Error::Parse { line, message };
        let tokens: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["arg_qubits", v] => n_arg = v.parse().map_err(|_| err(format!("bad qubit count {v:?}")))?,
            ["fun_qubits", v] => n_fun = Some(v.parse().map_err(|_| err(format!("bad qubit count {v:?}")))?),
            [r, v] => {
                let r: u64 = r.parse().map_err(|_| err(format!("bad residue {r:?}")))?;
                let v: u64 = v.parse().map_err(|_| err(format!("bad register value {v:?}")))?;
                if table.insert(r, v).is_some() {
                    return Err(err(format!("residue {r} listed twice")));
                }
            }
            _ => return Err(err(format!("expected `residue value`, got {:?}", raw.trim()))),
        }
    }
    let widest = table.values().copied().max().unwrap_or(0);
    let n_fun = n_fun.unwrap_or(((64 - widest.leading_zeros()) as usize).max(1));
    ShorConfig::new(modulus, base, n_arg, n_fun, table)
}

fn outcome_label(o: &SampleOutcome) -> String {
    match o {
        SampleOutcome::InherentFailure => "inherent failure (y = 0)".into(),
        SampleOutcome::Order(r) => format!("order {r}"),
        SampleOutcome::NoValidCandidate { denominators } => {
            format!("no valid candidate (denominators {denominators:?})")
        }
    }
}

fn factoring_json(f: Factoring) -> serde_json::Value {
    match f {
        Factoring::Found { p, q } => json!({ "factors": [p, q] }),
        Factoring::OddOrder => json!({ "failure": "odd order" }),
        Factoring::TrivialRoot => json!({ "failure": "a^(r/2) = -1 mod N" }),
        Factoring::NoNontrivialFactor => json!({ "failure": "no nontrivial factor" }),
    }
}

/// Runs order finding; writes `shor_report.json`, the bar-chart series
/// `shor_peaks.csv`, and with shots `histogram.csv`.
pub fn cmd_shor(shor: &ShorConfig, qft: QftMode, samples: Option<&[u64]>, cfg: &RunConfig) -> CliResult<()> {
    if let Some(n) = cfg.n_bins {
        if n != shor.layout().n_bins() {
            return Err(Error::invalid(format!(
                "order finding uses a {}-bin frame, config asks for {n}",
                shor.layout().n_bins()
            ))
            .into());
        }
    }
    let amplitudes = match cfg.amplitudes {
        AmplitudeModel::Uniform => Amplitudes::Uniform,
        AmplitudeModel::WavePacket { coherence_time, .. } => Amplitudes::WavePacket { coherence_time },
    };
    let opts = ShorOptions {
        qft,
        amplitudes,
        loss: cfg.loss_on.then_some(cfg.loss),
        bin_width: cfg.bin_width,
    };
    let run = run_shor(shor, &opts)?;
    let n = shor.n_arg();

    let counts = if cfg.shots > 0 {
        let events = sample_events(&run.final_state, &cfg.detector, cfg.shots, cfg.seed)?;
        let frame = run.final_state.frame();
        let edges = frame.bin_edges();
        let bins = histogram(&events, &edges)?;
        write_with(&cfg.output_dir, "histogram.csv", |w| write_histogram_csv(w, &edges, &bins))?;
        Some(run.y_counts(&events))
    } else {
        None
    };

    let observed: Vec<u64> = match (samples, &counts) {
        (Some(s), _) => s.to_vec(),
        (None, Some(c)) => (0..c.len() as u64).filter(|&y| c[y as usize] > 0).collect(),
        (None, None) => (0..run.marginal.len() as u64)
            .filter(|&y| run.marginal[y as usize] > 1e-9)
            .collect(),
    };
    let per_sample = observed
        .iter()
        .map(|&y| {
            classify_sample(y, n, shor.base(), shor.modulus()).map(|o| {
                let mut v = json!({ "y": y, "outcome": outcome_label(&o) });
                if let SampleOutcome::Order(r) = o {
                    v["factoring"] = crate::shor::factors_from_order(shor.base(), r, shor.modulus())
                        .map(factoring_json)
                        .unwrap_or(json!(null));
                }
                v
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let extraction = match extract_order(&observed, n, shor.base(), shor.modulus()) {
        Ok(r) => json!({ "order": r.order, "result": factoring_json(r.factoring) }),
        Err(e @ Error::OrderNotFound(_)) => json!({ "order": null, "result": { "failure": e.to_string() } }),
        Err(e) => return Err(e.into()),
    };
    let raw = argument_marginal(&run.final_state, shor.layout(), &shor.argument_qubits())?;
    let report = json!({
        "modulus": shor.modulus(),
        "base": shor.base(),
        "argument_qubits": n,
        "function_qubits": shor.n_fun(),
        "qft": match qft { QftMode::Compiled => "compiled", QftMode::Classical => "classical" },
        "amplitudes": match amplitudes { Amplitudes::Uniform => "uniform", Amplitudes::WavePacket { .. } => "wavepacket" },
        "loss_on": cfg.loss_on,
        "primitives": run.schedule.len(),
        "survival_probability": run.survival,
        "unnormalized_register_probability": raw.iter().sum::<f64>(),
        "marginal": run.marginal,
        "shots": cfg.shots,
        "seed": cfg.seed,
        "counts": counts,
        "samples": per_sample,
        "extraction": extraction,
    });
    write_json(&cfg.output_dir, "shor_report.json", &report)?;

    let total: u64 = counts.as_ref().map_or(0, |c| c.iter().sum());
    write_with(&cfg.output_dir, "shor_peaks.csv", |w| {
        writeln!(w, "y,probability,counts,measured_fraction")?;
        for (y, p) in run.marginal.iter().enumerate() {
            match &counts {
                Some(c) => {
                    let frac = if total > 0 { c[y] as f64 / total as f64 } else { 0.0 };
                    writeln!(w, "{y},{p},{},{frac}", c[y])?
                }
                None => writeln!(w, "{y},{p},,")?,
            }
        }
        Ok(())
    })
}

/// Bloch vector of a one-qubit state held on the H rail of bins 0 and 1.
pub fn bloch_vector(state: &TimeBinState) -> [f64; 3] {
    let (a0, a1): (Complex64, Complex64) = (state.amp(0, Polarization::H), state.amp(1, Polarization::H));
    let norm = a0.norm_sqr() + a1.norm_sqr();
    if norm == 0.0 {
        return [0.0; 3];
    }
    let c = a0.conj() * a1;
    [2.0 * c.re / norm, 2.0 * c.im / norm, (a0.norm_sqr() - a1.norm_sqr()) / norm]
}

/// Truth-table rows `P(out | in)` for the compiled CNOT with control `q1`,
/// indexed by two-bit strings `q1 q0`.
pub fn cnot_truth_table(loss: Option<LossTable>) -> crate::Result<[[f64; 4]; 4]> {
    let layout = QubitLayout::numbered(2)?;
    let circuit = Circuit::with_gates(layout, vec![Gate::Cnot { control: 1, target: 0 }])?;
    let frame = Frame::with_bins(4)?;
    let opts = CompileOptions {
        loss: loss.unwrap_or_else(LossTable::lossless),
        merge_phases: true,
    };
    let schedule = compile_with(&circuit, frame, &opts)?;
    let mut table = [[0.0; 4]; 4];
    for (input, row) in table.iter_mut().enumerate() {
        let out = run_schedule(&schedule, &basis_state_in(frame, input)?, loss.is_some())?;
        let p = probabilities(&out);
        let total: f64 = p.iter().sum();
        for (o, v) in row.iter_mut().enumerate() {
            *v = p[o] / total;
        }
    }
    Ok(table)
}

/// `(angle, ⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` over `steps` angles spanning one turn:
/// RY from |0⟩ or RZ from |+⟩, each compiled and run on the loop.
pub fn rotation_sweep(rz: bool, steps: usize, loss: Option<LossTable>) -> crate::Result<Vec<[f64; 4]>> {
    if steps < 2 {
        return Err(Error::invalid(format!("need at least 2 sweep steps, got {steps}")));
    }
    let frame = Frame::with_bins(2)?;
    let opts = CompileOptions {
        loss: loss.unwrap_or_else(LossTable::lossless),
        merge_phases: true,
    };
    (0..steps)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / (steps - 1) as f64;
            let gates = if rz { vec![Gate::H(0), Gate::Rz(0, angle)] } else { vec![Gate::Ry(0, angle)] };
            let circuit = Circuit::with_gates(QubitLayout::numbered(1)?, gates)?;
            let schedule = compile_with(&circuit, frame, &opts)?;
            let out = run_schedule(&schedule, &basis_state_in(frame, 0)?, loss.is_some())?;
            let [x, y, z] = bloch_vector(&out);
            Ok([angle, x, y, z])
        })
        .collect()
}

pub fn cmd_characterize(target: Target, steps: usize, cfg: &RunConfig) -> CliResult<()> {
    let loss = cfg.loss_on.then_some(cfg.loss);
    match target {
        Target::Cnot => {
            let table = cnot_truth_table(loss)?;
            write_with(&cfg.output_dir, "cnot_truth_table.csv", |w| {
                writeln!(w, "input,p00,p01,p10,p11")?;
                for (i, row) in table.iter().enumerate() {
                    writeln!(w, "{i:02b},{},{},{},{}", row[0], row[1], row[2], row[3])?;
                }
                Ok(())
            })
        }
        Target::RySweep | Target::RzSweep => {
            let rows = rotation_sweep(target == Target::RzSweep, steps, loss)?;
            let name = if target == Target::RzSweep { "rz_sweep.csv" } else { "ry_sweep.csv" };
            write_with(&cfg.output_dir, name, |w| {
                writeln!(w, "angle,sx,sy,sz")?;
                for [a, x, y, z] in &rows {
                    writeln!(w, "{a},{x},{y},{z}")?;
                }
                Ok(())
            })
        }
    }
}

/// Seeded random circuit mixing every gate kind.
pub fn random_circuit(n_qubits: usize, depth: usize, seed: u64) -> crate::Result<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut circuit = Circuit::new(QubitLayout::numbered(n_qubits)?);
    let kinds = if n_qubits > 1 { 6 } else { 4 };
    for _ in 0..depth {
        let q = rng.random_range(0..n_qubits);
        let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let other = |rng: &mut ChaCha8Rng| (q + rng.random_range(1..n_qubits)) % n_qubits;
        let gate = match rng.random_range(0..kinds) {
            0 => Gate::H(q),
            1 => Gate::X(q),
            2 => Gate::Ry(q, angle),
            3 => Gate::Rz(q, angle),
            4 => Gate::Cnot {
                control: other(&mut rng),
                target: q,
            },
            _ => Gate::CPhase {
                control: other(&mut rng),
                target: q,
                phi: angle,
            },
        };
        circuit.push(gate)?;
    }
    Ok(circuit)
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub n_bins: usize,
    pub depth: usize,
    pub primitives: usize,
    pub compile_ms: f64,
    pub run_ms: f64,
    pub total_ms: f64,
    /// Bytes of one state vector (two rails per bin).
    pub state_bytes: usize,
    pub survival_probability: f64,
}

pub fn bench(n_bins: usize, depth: usize, seed: u64) -> crate::Result<BenchReport> {
    if n_bins > MAX_BENCH_BINS {
        return Err(Error::ResourceLimit(format!("{n_bins} bins exceed the {MAX_BENCH_BINS}-bin cap")));
    }
    if n_bins < 2 || !n_bins.is_power_of_two() {
        return Err(Error::invalid(format!("bin count {n_bins} must be a power of two ≥ 2")));
    }
    let n_qubits = n_bins.trailing_zeros() as usize;
    let circuit = random_circuit(n_qubits, depth, seed)?;
    let frame = Frame::with_bins(n_bins)?;
    let start = Instant::now();
    let schedule = compile_with(&circuit, frame, &CompileOptions::default())?;
    let compiled = Instant::now();
    let out = run_schedule(&schedule, &basis_state_in(frame, 0)?, false)?;
    let done = Instant::now();
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    Ok(BenchReport {
        n_bins,
        depth,
        primitives: schedule.len(),
        compile_ms: ms(compiled - start),
        run_ms: ms(done - compiled),
        total_ms: ms(done - start),
        state_bytes: std::mem::size_of_val(out.raw()),
        survival_probability: out.norm_sqr(),
    })
}
