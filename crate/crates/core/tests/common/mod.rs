#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use timebin::compiler::{compile_with, run_schedule, unitary_of, Circuit, CompileOptions, Gate};
use timebin::primitives::LossTable;
use timebin::state::{basis_state_in, Frame, Polarization, QubitLayout, TimeBinState};

pub fn lossless() -> CompileOptions {
    CompileOptions {
        loss: LossTable::lossless(),
        merge_phases: true,
    }
}

/// Columns are schedule outputs for each basis input; also returns the
/// largest V-rail amplitude left behind.
pub fn schedule_matrix(circuit: &Circuit, opts: &CompileOptions) -> (DMatrix<Complex64>, f64) {
    let dim = circuit.layout().n_bins();
    let frame = Frame::with_bins(dim).unwrap();
    let schedule = compile_with(circuit, frame, opts).unwrap();
    let mut m = DMatrix::zeros(dim, dim);
    let mut stray: f64 = 0.0;
    for j in 0..dim {
        let out = run_schedule(&schedule, &basis_state_in(frame, j).unwrap(), false).unwrap();
        for i in 0..dim {
            m[(i, j)] = out.amp(i, Polarization::H);
            stray = stray.max(out.amp(i, Polarization::V).norm());
        }
    }
    (m, stray)
}

/// Smallest per-column fidelity between `s` and `u` after removing one
/// global phase shared by every column.
pub fn global_phase_fidelity(s: &DMatrix<Complex64>, u: &DMatrix<Complex64>) -> f64 {
    let tr: Complex64 = (u.adjoint() * s).trace();
    if tr.norm() == 0.0 {
        return 0.0;
    }
    let phase = tr / tr.norm();
    (0..u.ncols())
        .map(|j| {
            let ov: Complex64 = u.column(j).iter().zip(s.column(j).iter()).map(|(a, b)| a.conj() * b).sum();
            let re = (ov * phase.conj()).re.max(0.0);
            re * re
        })
        .fold(1.0, f64::min)
}

pub fn oracle_fidelity(circuit: &Circuit) -> f64 {
    let (s, stray) = schedule_matrix(circuit, &lossless());
    assert!(stray < 1e-12, "V rail left occupied: {stray}");
    global_phase_fidelity(&s, &unitary_of(circuit).unwrap())
}

/// Haar-ish random 2×2 unitary `e^{iα} Rz(β) Ry(γ) Rz(δ)`.
pub fn random_unitary(rng: &mut impl Rng) -> [[Complex64; 2]; 2] {
    let mut a = || rng.random_range(-PI..PI);
    let (alpha, beta, gamma, delta) = (a(), a(), a(), a());
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let (c, s) = ((gamma / 2.0).cos(), (gamma / 2.0).sin());
    let g = e(alpha);
    [
        [g * e(-(beta + delta) / 2.0) * c, -g * e(-(beta - delta) / 2.0) * s],
        [g * e((beta - delta) / 2.0) * s, g * e((beta + delta) / 2.0) * c],
    ]
}

pub fn random_layout(rng: &mut impl Rng, n: usize) -> QubitLayout {
    let mut bits: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        bits.swap(i, rng.random_range(0..=i));
    }
    QubitLayout::new((0..n).map(|q| format!("q{q}")).collect(), bits).unwrap()
}

pub fn random_gate(rng: &mut impl Rng, n: usize) -> Gate {
    let q = rng.random_range(0..n);
    let angle = rng.random_range(-2.0 * PI..2.0 * PI);
    let (kinds, control) = if n > 1 {
        (8, (q + rng.random_range(1..n)) % n)
    } else {
        (5, 0)
    };
    match rng.random_range(0..kinds) {
        0 => Gate::H(q),
        1 => Gate::X(q),
        2 => Gate::Ry(q, angle),
        3 => Gate::Rz(q, angle),
        4 => Gate::Diag((0..1 << n).map(|_| rng.random_range(-PI..PI)).collect()),
        5 => Gate::Cnot { control, target: q },
        6 => Gate::CPhase {
            control,
            target: q,
            phi: angle,
        },
        _ => Gate::CU {
            control,
            target: q,
            u: random_unitary(rng),
        },
    }
}

pub fn random_circuit(rng: &mut impl Rng, max_qubits: usize, max_depth: usize) -> Circuit {
    let n = rng.random_range(1..=max_qubits);
    let depth = rng.random_range(1..=max_depth);
    let layout = random_layout(rng, n);
    let gates = (0..depth).map(|_| random_gate(rng, n)).collect();
    Circuit::with_gates(layout, gates).unwrap()
}

/// Equal superposition of the listed kets. Each ket is read character by
/// character against `order`, a list of qubit names.
pub fn ket_state(kets: &[&str], order: &[&str], layout: &QubitLayout, frame: Frame) -> TimeBinState {
    let mut amps = vec![Complex64::default(); frame.n_bins];
    let a = Complex64::new(1.0 / (kets.len() as f64).sqrt(), 0.0);
    for ket in kets {
        let mut values = vec![false; layout.n_qubits()];
        assert_eq!(ket.len(), order.len());
        for (ch, name) in ket.chars().zip(order) {
            values[layout.index_of(name).unwrap()] = ch == '1';
        }
        amps[layout.bin_of(&values)] += a;
    }
    TimeBinState::from_amplitudes(frame, Polarization::H, &amps).unwrap()
}

/// Register after initialization: x uniform, function value 1 encoded as
/// (f1, f0) = (1, 0). Kets read as `f1 f0 x2 x1 x0`.
pub const INIT_KETS: [&str; 8] = ["10000", "10001", "10010", "10011", "10100", "10101", "10110", "10111"];
pub const INIT_ORDER: [&str; 5] = ["f1", "f0", "x2", "x1", "x0"];

/// Register after the two CNOTs. Kets read as `f1 f0 x0 x1 x2`.
pub const MODEXP_KETS: [&str; 8] = ["00100", "00101", "01110", "01111", "10000", "10001", "11010", "11011"];
pub const MODEXP_ORDER: [&str; 5] = ["f1", "f0", "x0", "x1", "x2"];

/// `|⟨a|b⟩|²` for normalized states, independent of the library helper.
pub fn overlap_sqr(a: &TimeBinState, b: &TimeBinState) -> f64 {
    let ov: Complex64 = a.raw().iter().zip(b.raw()).map(|(x, y)| x.conj() * y).sum();
    ov.norm_sqr() / (a.norm_sqr() * b.norm_sqr())
}

/// Argument marginal of the analytic transform of a state given as
/// `(x, f) → amplitude`, in natural `y` order.
pub fn analytic_qft_marginal(terms: &[(usize, usize, Complex64)], n_arg: usize) -> Vec<f64> {
    let dim = 1 << n_arg;
    let mut by_f: std::collections::BTreeMap<usize, Vec<Complex64>> = Default::default();
    for &(x, f, a) in terms {
        by_f.entry(f).or_insert_with(|| vec![Complex64::default(); dim])[x] += a;
    }
    let mut out = vec![0.0; dim];
    for col in by_f.values() {
        for (y, slot) in out.iter_mut().enumerate() {
            let s: Complex64 = col
                .iter()
                .enumerate()
                .map(|(x, a)| a * Complex64::from_polar(1.0, 2.0 * PI * (x * y) as f64 / dim as f64))
                .sum();
            *slot += s.norm_sqr() / dim as f64;
        }
    }
    let total: f64 = out.iter().sum();
    out.iter().map(|p| p / total).collect()
}

/// Residues 2^x mod 15 for x < 8, by repeated doubling.
pub fn residues_2_mod_15() -> Vec<u64> {
    let mut r = 1;
    (0..8)
        .map(|_| {
            let v = r;
            r = r * 2 % 15;
            v
        })
        .collect()
}
