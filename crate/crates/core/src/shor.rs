//! Compiled order finding: circuit construction, the three-stage run on the
//! loop simulator, and the classical post-processing (continued fractions
//! and the gcd step).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compiler::{compile_with, run_schedule, Circuit, CompileOptions, Gate, Schedule};
use crate::detection::{shaped_state, EventRecord, WavePacket, COHERENCE_TIME_NS};
use crate::error::{Error, Result};
use crate::primitives::{LossTable, Operation, Primitive};
use crate::state::{basis_state_in, probabilities, Frame, Polarization, QubitLayout, TimeBinState, DEFAULT_BIN_WIDTH_NS};

/// Largest register the pipeline will build.
const MAX_QUBITS: usize = 20;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// `a^x mod N` by square-and-multiply.
pub fn mod_exp(a: u64, x: u64, modulus: u64) -> Result<u64> {
    if modulus < 2 {
        return Err(Error::invalid(format!("modulus {modulus} must be at least 2")));
    }
    let m = modulus as u128;
    let (mut base, mut exp, mut acc) = (a as u128 % m, x, 1u128);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    Ok(acc as u64)
}

/// Register layout in physical time order: the bin index read from its
/// most significant bit is `f0 f1 … x0 x1 …`.
pub fn time_ordered_layout(n_arg: usize, n_fun: usize) -> Result<QubitLayout> {
    let names = (0..n_arg)
        .map(|i| format!("x{i}"))
        .chain((0..n_fun).map(|j| format!("f{j}")))
        .collect();
    let bits = (0..n_arg)
        .map(|i| (n_arg - 1 - i) as u32)
        .chain((0..n_fun).map(|j| (n_arg + n_fun - 1 - j) as u32))
        .collect();
    QubitLayout::new(names, bits)
}

/// One factoring instance with a hard-wired function register encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShorConfig {
    modulus: u64,
    base: u64,
    n_arg: usize,
    n_fun: usize,
    /// residue `a^x mod N` → function-register value (bit `j` is `f_j`)
    encoding: BTreeMap<u64, u64>,
    layout: QubitLayout,
}

impl ShorConfig {
    /// N = 15, a = 2 on three argument and two function qubits, with
    /// residues (1, 2, 4, 8) stored as (f1 f0) = (10, 00, 11, 01).
    pub fn fifteen_base_two() -> Self {
        let encoding = BTreeMap::from([(1, 0b10), (2, 0b00), (4, 0b11), (8, 0b01)]);
        Self::new(15, 2, 3, 2, encoding).expect("built-in instance is valid")
    }

    /// Built-in instances; anything else needs an explicit encoding.
    pub fn builtin(modulus: u64, base: u64) -> Result<Self> {
        match (modulus, base) {
            (15, 2) => Ok(Self::fifteen_base_two()),
            _ => Err(Error::UnsupportedInstance {
                modulus,
                base,
                reason: "no built-in compiled circuit; supply an encoding table".into(),
            }),
        }
    }

    pub fn new(modulus: u64, base: u64, n_arg: usize, n_fun: usize, encoding: BTreeMap<u64, u64>) -> Result<Self> {
        let unsupported = |reason: String| Error::UnsupportedInstance {
            modulus,
            base,
            reason,
        };
        if modulus < 2 {
            return Err(Error::invalid(format!("modulus {modulus} must be at least 2")));
        }
        if base < 2 || base >= modulus || gcd(base, modulus) != 1 {
            return Err(Error::invalid(format!("base {base} must be coprime to and below {modulus}")));
        }
        if n_arg == 0 || n_fun == 0 {
            return Err(Error::invalid("both registers need at least one qubit"));
        }
        if n_arg + n_fun > MAX_QUBITS {
            return Err(Error::ResourceLimit(format!("{} qubits exceed {MAX_QUBITS}", n_arg + n_fun)));
        }
        let mut used = BTreeMap::new();
        for (&residue, &value) in &encoding {
            if value >= 1 << n_fun {
                return Err(unsupported(format!("encoding of {residue} needs more than {n_fun} bits")));
            }
            if let Some(prev) = used.insert(value, residue) {
                return Err(unsupported(format!("residues {prev} and {residue} share an encoding")));
            }
        }
        for x in 0..1u64 << n_arg {
            let r = mod_exp(base, x, modulus)?;
            if !encoding.contains_key(&r) {
                return Err(unsupported(format!("encoding lacks residue {r} = {base}^{x} mod {modulus}")));
            }
        }
        Ok(ShorConfig {
            modulus,
            base,
            n_arg,
            n_fun,
            encoding,
            layout: time_ordered_layout(n_arg, n_fun)?,
        })
    }

    /// Replaces the bit positions. Qubit `i < n_arg` is `x_i`, the rest are
    /// `f_0, f_1, …` in order.
    pub fn with_layout(mut self, layout: QubitLayout) -> Result<Self> {
        if layout.n_qubits() != self.n_arg + self.n_fun {
            return Err(Error::invalid("layout size does not match the registers"));
        }
        self.layout = layout;
        Ok(self)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn n_arg(&self) -> usize {
        self.n_arg
    }

    pub fn n_fun(&self) -> usize {
        self.n_fun
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn encoding(&self) -> &BTreeMap<u64, u64> {
        &self.encoding
    }

    /// Argument qubits, least significant first.
    pub fn argument_qubits(&self) -> Vec<usize> {
        (0..self.n_arg).collect()
    }

    pub fn function_qubits(&self) -> Vec<usize> {
        (self.n_arg..self.n_arg + self.n_fun).collect()
    }

    fn encode(&self, x: u64) -> u64 {
        let r = mod_exp(self.base, x, self.modulus).expect("validated modulus");
        self.encoding[&r]
    }

    pub fn frame(&self, bin_width: f64) -> Result<Frame> {
        Frame::new(self.layout.n_bins(), bin_width)
    }

    /// Bin holding argument value `x` and function value `f`.
    pub fn bin_of(&self, x: u64, f: u64) -> usize {
        let mut values = Vec::with_capacity(self.n_arg + self.n_fun);
        values.extend((0..self.n_arg).map(|i| (x >> i) & 1 == 1));
        values.extend((0..self.n_fun).map(|j| (f >> j) & 1 == 1));
        self.layout.bin_of(&values)
    }
}

/// Compiled circuit with its stage boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ShorCircuit {
    pub circuit: Circuit,
    pub init_end: usize,
    pub modexp_end: usize,
}

impl ShorCircuit {
    pub fn init(&self) -> Circuit {
        self.circuit.slice(0..self.init_end)
    }

    pub fn modexp(&self) -> Circuit {
        self.circuit.slice(self.init_end..self.modexp_end)
    }

    pub fn qft(&self) -> Circuit {
        self.circuit.slice(self.modexp_end..self.circuit.len())
    }
}

/// `|x⟩ → 2^{-n/2} Σ_y e^{2πi xy/2^n} |y⟩` on the given qubits (least
/// significant first), leaving the output bit-reversed.
pub fn qft_gates(qubits: &[usize]) -> Vec<Gate> {
    let mut gates = Vec::new();
    for j in (0..qubits.len()).rev() {
        gates.push(Gate::H(qubits[j]));
        for k in (0..j).rev() {
            gates.push(Gate::CPhase {
                control: qubits[k],
                target: qubits[j],
                phi: 2.0 * PI / f64::from(1u32 << (j - k + 1)),
            });
        }
    }
    gates
}

/// Register initialization, modular exponentiation as CNOTs, and optionally
/// the transform on the argument register.
///
/// The function map must be affine over GF(2) in the argument bits, which
/// is what lets it be hard-wired as X and CNOT gates.
pub fn build_circuit(config: &ShorConfig, include_qft: bool) -> Result<ShorCircuit> {
    let n = config.n_arg;
    let args = config.argument_qubits();
    let funs = config.function_qubits();
    let mut gates = Vec::new();

    gates.extend(args.iter().map(|&q| Gate::H(q)));
    let f0 = config.encode(0);
    gates.extend(funs.iter().enumerate().filter(|(j, _)| (f0 >> j) & 1 == 1).map(|(_, &q)| Gate::X(q)));
    let init_end = gates.len();

    let columns: Vec<u64> = (0..n).map(|i| config.encode(1 << i) ^ f0).collect();
    for x in 0..1u64 << n {
        let predicted = (0..n).filter(|i| (x >> i) & 1 == 1).fold(f0, |acc, i| acc ^ columns[i]);
        if predicted != config.encode(x) {
            return Err(Error::UnsupportedInstance {
                modulus: config.modulus,
                base: config.base,
                reason: "encoding is not reachable with CNOT gates".into(),
            });
        }
    }
    for (i, col) in columns.iter().enumerate() {
        for (j, &f) in funs.iter().enumerate() {
            if (col >> j) & 1 == 1 {
                gates.push(Gate::Cnot {
                    control: args[i],
                    target: f,
                });
            }
        }
    }
    let modexp_end = gates.len();

    if include_qft {
        gates.extend(qft_gates(&args));
    }
    Ok(ShorCircuit {
        circuit: Circuit::with_gates(config.layout.clone(), gates)?,
        init_end,
        modexp_end,
    })
}

fn register_value(bin: usize, layout: &QubitLayout, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .filter(|(_, &q)| layout.qubit_value(bin, q))
        .map(|(i, _)| 1 << i)
        .sum()
}

/// Probability of each argument-register value, summed over the other
/// qubits and both rails. Not renormalized.
pub fn argument_marginal(state: &TimeBinState, layout: &QubitLayout, arg_qubits: &[usize]) -> Result<Vec<f64>> {
    if state.n_bins() != layout.n_bins() {
        return Err(Error::invalid(format!(
            "state has {} bins, layout needs {}",
            state.n_bins(),
            layout.n_bins()
        )));
    }
    if arg_qubits.iter().any(|&q| q >= layout.n_qubits()) {
        return Err(Error::invalid("argument qubit outside the layout"));
    }
    let mut out = vec![0.0; 1 << arg_qubits.len()];
    for (b, p) in probabilities(state).into_iter().enumerate() {
        out[register_value(b, layout, arg_qubits)] += p;
    }
    Ok(out)
}

pub fn reverse_bits(value: usize, width: usize) -> usize {
    (0..width).filter(|i| (value >> i) & 1 == 1).map(|i| 1 << (width - 1 - i)).sum()
}

/// Applies the transform to the argument register analytically, with the
/// output in natural bit order.
pub fn classical_qft(state: &TimeBinState, layout: &QubitLayout, arg_qubits: &[usize]) -> Result<TimeBinState> {
    if state.n_bins() != layout.n_bins() {
        return Err(Error::invalid("state and layout disagree on the frame size"));
    }
    let n = arg_qubits.len();
    let dim = 1usize << n;
    let arg_mask: usize = arg_qubits.iter().map(|&q| 1usize << layout.bit(q)).sum();
    let bin_with = |rest: usize, x: usize| -> usize {
        rest | arg_qubits
            .iter()
            .enumerate()
            .filter(|(i, _)| (x >> i) & 1 == 1)
            .map(|(_, &q)| 1usize << layout.bit(q))
            .sum::<usize>()
    };
    let twiddle: Vec<Complex64> = (0..dim)
        .map(|k| Complex64::from_polar(1.0 / (dim as f64).sqrt(), 2.0 * PI * k as f64 / dim as f64))
        .collect();
    let mut out = TimeBinState::vacuum(state.frame());
    for rest in (0..state.n_bins()).filter(|b| b & arg_mask == 0) {
        for pol in [Polarization::H, Polarization::V] {
            let column: Vec<Complex64> = (0..dim).map(|x| state.amp(bin_with(rest, x), pol)).collect();
            for y in 0..dim {
                let acc: Complex64 = column.iter().enumerate().map(|(x, a)| a * twiddle[(x * y) % dim]).sum();
                out.set(bin_with(rest, y), pol, acc);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QftMode {
    /// Transform compiled into loop primitives.
    Compiled,
    /// Transform applied analytically after the modular exponentiation.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Amplitudes {
    /// Equal bin amplitudes, prepared by gates from the all-zero bin.
    Uniform,
    /// Photon envelope cut down to the initial register by one-shot
    /// amplitude modulation.
    WavePacket { coherence_time: f64 },
}

impl Amplitudes {
    pub fn wave_packet() -> Self {
        Amplitudes::WavePacket {
            coherence_time: COHERENCE_TIME_NS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShorOptions {
    pub qft: QftMode,
    pub amplitudes: Amplitudes,
    /// `None` runs lossless.
    pub loss: Option<LossTable>,
    pub bin_width: f64,
}

impl Default for ShorOptions {
    fn default() -> Self {
        ShorOptions {
            qft: QftMode::Compiled,
            amplitudes: Amplitudes::Uniform,
            loss: None,
            bin_width: DEFAULT_BIN_WIDTH_NS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShorRun {
    pub initial: TimeBinState,
    pub after_init: TimeBinState,
    pub after_modexp: TimeBinState,
    pub final_state: TimeBinState,
    /// Every instruction executed on the photon, in order.
    pub schedule: Schedule,
    /// Normalized probability of each outcome `y`.
    pub marginal: Vec<f64>,
    /// Probability the heralded photon survives to the detector.
    pub survival: f64,
    layout: QubitLayout,
    arg_qubits: Vec<usize>,
    reversed: bool,
}

impl ShorRun {
    /// Outcome `y` read from a detection bin.
    pub fn y_of_bin(&self, bin: usize) -> usize {
        let v = register_value(bin, &self.layout, &self.arg_qubits);
        if self.reversed {
            reverse_bits(v, self.arg_qubits.len())
        } else {
            v
        }
    }

    pub fn y_counts(&self, events: &[EventRecord]) -> Vec<u64> {
        let mut counts = vec![0u64; 1 << self.arg_qubits.len()];
        for b in events.iter().filter(|e| e.detected).filter_map(|e| e.bin) {
            counts[self.y_of_bin(b)] += 1;
        }
        counts
    }
}

fn modulation_mask(config: &ShorConfig, frame: Frame) -> Primitive {
    let f0 = config.encode(0);
    let mut factors = vec![0.0; frame.n_bins];
    for x in 0..1u64 << config.n_arg {
        factors[config.bin_of(x, f0)] = 1.0;
    }
    Primitive::lossless(Operation::Attenuate { factors })
}

/// Runs initialization, modular exponentiation, and the transform on the
/// loop simulator.
pub fn run_shor(config: &ShorConfig, opts: &ShorOptions) -> Result<ShorRun> {
    let frame = config.frame(opts.bin_width)?;
    let loss_on = opts.loss.is_some();
    let copts = CompileOptions {
        loss: opts.loss.unwrap_or_else(LossTable::lossless),
        merge_phases: true,
    };
    let stages = build_circuit(config, opts.qft == QftMode::Compiled)?;

    let (initial, init_schedule) = match opts.amplitudes {
        Amplitudes::Uniform => (basis_state_in(frame, 0)?, compile_with(&stages.init(), frame, &copts)?),
        Amplitudes::WavePacket { coherence_time } => {
            let photon = shaped_state(&WavePacket::centered(coherence_time, frame)?, frame)?;
            let mut mask = modulation_mask(config, frame);
            mask.loss_db = copts.loss.attenuate_db;
            (photon, Schedule::new(frame, vec![mask]))
        }
    };
    let after_init = run_schedule(&init_schedule, &initial, loss_on)?;
    let modexp_schedule = compile_with(&stages.modexp(), frame, &copts)?;
    let after_modexp = run_schedule(&modexp_schedule, &after_init, loss_on)?;
    let mut schedule = init_schedule.then(&modexp_schedule)?;

    let args = config.argument_qubits();
    let (final_state, reversed) = match opts.qft {
        QftMode::Compiled => {
            let qft_schedule = compile_with(&stages.qft(), frame, &copts)?;
            schedule = schedule.then(&qft_schedule)?;
            (run_schedule(&qft_schedule, &after_modexp, loss_on)?, true)
        }
        QftMode::Classical => (classical_qft(&after_modexp, &config.layout, &args)?, false),
    };

    let raw = argument_marginal(&final_state, &config.layout, &args)?;
    let total: f64 = raw.iter().sum();
    let mut marginal = vec![0.0; raw.len()];
    for (v, p) in raw.iter().enumerate() {
        let y = if reversed { reverse_bits(v, args.len()) } else { v };
        marginal[y] = if total > 0.0 { p / total } else { 0.0 };
    }
    Ok(ShorRun {
        initial,
        after_init,
        after_modexp,
        survival: final_state.norm_sqr(),
        final_state,
        schedule,
        marginal,
        layout: config.layout.clone(),
        arg_qubits: args,
        reversed,
    })
}

/// Convergents `p/q` of the continued-fraction expansion of `num/den`.
pub fn convergents(num: u64, den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if den == 0 {
        return out;
    }
    let (mut a, mut b) = (num as u128, den as u128);
    let (mut p_prev, mut p) = (0u128, 1u128);
    let (mut q_prev, mut q) = (1u128, 0u128);
    while b != 0 {
        let t = a / b;
        (a, b) = (b, a % b);
        (p_prev, p) = (p, t * p + p_prev);
        (q_prev, q) = (q, t * q + q_prev);
        out.push((p as u64, q as u64));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleOutcome {
    /// `y = 0` carries no information about the period.
    InherentFailure,
    Order(u64),
    /// No convergent denominator below `N` satisfies `a^q ≡ 1`.
    NoValidCandidate { denominators: Vec<u64> },
}

/// Period candidate from one measured `y`.
pub fn classify_sample(y: u64, n_arg: usize, base: u64, modulus: u64) -> Result<SampleOutcome> {
    if y >= 1 << n_arg {
        return Err(Error::invalid(format!("sample {y} outside the {n_arg}-qubit register")));
    }
    if y == 0 {
        return Ok(SampleOutcome::InherentFailure);
    }
    let mut denominators: Vec<u64> = convergents(y, 1 << n_arg)
        .into_iter()
        .map(|(_, q)| q)
        .filter(|&q| q >= 1 && q < modulus)
        .collect();
    denominators.dedup();
    for &q in &denominators {
        if mod_exp(base, q, modulus)? == 1 {
            return Ok(SampleOutcome::Order(q));
        }
    }
    Ok(SampleOutcome::NoValidCandidate { denominators })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factoring {
    Found { p: u64, q: u64 },
    OddOrder,
    /// `a^{r/2} ≡ −1 mod N`
    TrivialRoot,
    NoNontrivialFactor,
}

/// `gcd(a^{r/2} ± 1, N)`, reported as `p ≤ q` with `p·q = N`.
pub fn factors_from_order(base: u64, order: u64, modulus: u64) -> Result<Factoring> {
    if order == 0 || mod_exp(base, order, modulus)? != 1 {
        return Err(Error::invalid(format!("{base}^{order} is not 1 mod {modulus}")));
    }
    if order % 2 == 1 {
        return Ok(Factoring::OddOrder);
    }
    let half = mod_exp(base, order / 2, modulus)?;
    if half == modulus - 1 {
        return Ok(Factoring::TrivialRoot);
    }
    let nontrivial = |g: u64| g > 1 && g < modulus;
    let minus = gcd((half + modulus - 1) % modulus, modulus);
    let plus = gcd((half + 1) % modulus, modulus);
    let found = [minus, plus].into_iter().find(|&g| nontrivial(g));
    Ok(match found {
        Some(g) => {
            let (p, q) = (g.min(modulus / g), g.max(modulus / g));
            Factoring::Found { p, q }
        }
        None => Factoring::NoNontrivialFactor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderResult {
    pub samples: Vec<u64>,
    pub outcomes: Vec<SampleOutcome>,
    pub order: u64,
    pub factoring: Factoring,
}

/// Extracts the order from measured samples: the least per-sample
/// candidate, falling back to the lcm of the candidate denominators.
pub fn extract_order(samples: &[u64], n_arg: usize, base: u64, modulus: u64) -> Result<OrderResult> {
    let outcomes = samples
        .iter()
        .map(|&y| classify_sample(y, n_arg, base, modulus))
        .collect::<Result<Vec<_>>>()?;
    let direct = outcomes
        .iter()
        .filter_map(|o| match o {
            SampleOutcome::Order(r) => Some(*r),
            _ => None,
        })
        .min();
    let order = match direct {
        Some(r) => r,
        None => {
            let combined = outcomes
                .iter()
                .filter_map(|o| match o {
                    SampleOutcome::NoValidCandidate { denominators } => denominators.last().copied(),
                    _ => None,
                })
                .fold(1u64, |acc, q| lcm(acc, q).min(modulus));
            if combined > 1 && combined < modulus && mod_exp(base, combined, modulus)? == 1 {
                combined
            } else if outcomes.iter().all(|o| *o == SampleOutcome::InherentFailure) && !outcomes.is_empty() {
                return Err(Error::OrderNotFound("y = 0 is the inherent failure of order finding".into()));
            } else {
                return Err(Error::OrderNotFound(format!(
                    "no candidate among samples {samples:?} satisfies {base}^r = 1 mod {modulus}"
                )));
            }
        }
    };
    Ok(OrderResult {
        samples: samples.to_vec(),
        outcomes,
        order,
        factoring: factors_from_order(base, order, modulus)?,
    })
}

/// Draws ideal measurement outcomes from a marginal.
pub fn sample_outcomes(marginal: &[f64], shots: usize, seed: u64) -> Result<Vec<u64>> {
    let dist = WeightedIndex::new(marginal).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).map(|_| dist.sample(&mut rng) as u64).collect())
}
