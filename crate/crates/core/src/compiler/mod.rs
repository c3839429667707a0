//! Lowering of qubit circuits onto loop primitives.
//!
//! Every gate becomes a short run of phase patterns and mode couplers; the
//! executor then replays the schedule on a [`TimeBinState`]. A dense
//! unitary built independently from textbook matrices serves as the
//! reference for the lowered schedules.
//!
//! [`TimeBinState`]: crate::state::TimeBinState

mod lower;
mod oracle;
mod parse;
mod schedule;
mod validate;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::QubitLayout;

pub use lower::{lower_gate, split_unitary, UnitarySplit};
pub use oracle::{unitary_of, MAX_ORACLE_QUBITS};
pub use parse::{format_circuit, parse_circuit};
pub use schedule::{compile, compile_with, run_schedule, CompileOptions, Schedule};
pub use validate::{validate, Diagnostic, DiagnosticKind};

/// Row-major 2×2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    X(usize),
    /// `exp(−iθY/2)`
    Ry(usize, f64),
    /// `exp(−iφZ/2)`
    Rz(usize, f64),
    /// Phase `e^{iφ_b}` on basis state `b`.
    Diag(Vec<f64>),
    CPhase {
        control: usize,
        target: usize,
        phi: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    CU {
        control: usize,
        target: usize,
        u: Mat2,
    },
}

impl Gate {
    /// Qubits the gate touches, control first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![*q],
            Gate::Diag(_) => Vec::new(),
            Gate::CPhase { control, target, .. }
            | Gate::Cnot { control, target }
            | Gate::CU { control, target, .. } => vec![*control, *target],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::X(_) => "X",
            Gate::Ry(..) => "RY",
            Gate::Rz(..) => "RZ",
            Gate::Diag(_) => "DIAG",
            Gate::CPhase { .. } => "CPHASE",
            Gate::Cnot { .. } => "CNOT",
            Gate::CU { .. } => "CU",
        }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        if let Some(q) = qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::invalid(format!(
                "{} acts on qubit {q} of a {n_qubits}-qubit circuit",
                self.name()
            )));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::invalid(format!("{} control equals target", self.name())));
        }
        match self {
            Gate::Diag(phases) if phases.len() != 1 << n_qubits => Err(Error::invalid(format!(
                "DIAG has {} phases, expected {}",
                phases.len(),
                1usize << n_qubits
            ))),
            Gate::CU { u, .. } if !is_unitary(u, 1e-12) => {
                Err(Error::invalid("CU block is not unitary"))
            }
            _ => Ok(()),
        }
    }
}

pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn is_unitary(u: &Mat2, tol: f64) -> bool {
    (0..2).all(|i| {
        (0..2).all(|j| {
            let dot: Complex64 = (0..2).map(|k| u[i][k] * u[j][k].conj()).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            (dot - c64(want, 0.0)).norm() <= tol
        })
    })
}

/// Matrix of a single-qubit gate in the `{|0⟩, |1⟩}` basis.
pub(crate) fn single_qubit_matrix(gate: &Gate) -> Option<Mat2> {
    let z = c64(0.0, 0.0);
    Some(match gate {
        Gate::H(_) => {
            let h = c64(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        Gate::X(_) => [[z, c64(1.0, 0.0)], [c64(1.0, 0.0), z]],
        Gate::Ry(_, theta) => {
            let (s, c) = (theta / 2.0).sin_cos();
            [[c64(c, 0.0), c64(-s, 0.0)], [c64(s, 0.0), c64(c, 0.0)]]
        }
        Gate::Rz(_, phi) => [
            [Complex64::from_polar(1.0, -phi / 2.0), z],
            [z, Complex64::from_polar(1.0, phi / 2.0)],
        ],
        _ => return None,
    })
}

/// Gate list over a named qubit register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    layout: QubitLayout,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(layout: QubitLayout) -> Self {
        Circuit {
            layout,
            gates: Vec::new(),
        }
    }

    pub fn with_gates(layout: QubitLayout, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(layout);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.n_qubits())?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.n_qubits()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Sub-circuit over the same register.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Circuit {
        Circuit {
            layout: self.layout.clone(),
            gates: self.gates[range].to_vec(),
        }
    }
}
