//! Dense reference unitary, built from textbook gate matrices without going
//! through the lowering path.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::QubitLayout;

use super::{Circuit, Gate, Mat2};

pub const MAX_ORACLE_QUBITS: usize = 10;

fn textbook(gate: &Gate) -> Option<Mat2> {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let r = |x: f64| Complex64::new(x, 0.0);
    match gate {
        Gate::H(_) => Some([[r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)], [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)]]),
        Gate::X(_) | Gate::Cnot { .. } => Some([[o, l], [l, o]]),
        Gate::Ry(_, t) => {
            let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
            Some([[r(c), r(-s)], [r(s), r(c)]])
        }
        Gate::Rz(_, p) => Some([
            [Complex64::from_polar(1.0, -p / 2.0), o],
            [o, Complex64::from_polar(1.0, p / 2.0)],
        ]),
        Gate::CU { u, .. } => Some(*u),
        Gate::Diag(_) | Gate::CPhase { .. } => None,
    }
}

/// Full `2^n × 2^n` matrix of one gate, indexed by bin.
fn embed(gate: &Gate, layout: &QubitLayout) -> DMatrix<Complex64> {
    let dim = layout.n_bins();
    let bit = |q: usize| layout.bit(q);
    match gate {
        Gate::Diag(phases) => DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, phases[i])
            } else {
                Complex64::default()
            }
        }),
        Gate::CPhase { control, target, phi } => {
            let mask = (1 << bit(*control)) | (1 << bit(*target));
            DMatrix::from_fn(dim, dim, |i, j| match (i == j, i & mask == mask) {
                (true, true) => Complex64::from_polar(1.0, *phi),
                (true, false) => Complex64::new(1.0, 0.0),
                _ => Complex64::default(),
            })
        }
        _ => {
            let u = textbook(gate).expect("non-diagonal gate");
            let (target, control) = match gate {
                Gate::Cnot { control, target } | Gate::CU { control, target, .. } => (*target, Some(*control)),
                Gate::H(q) | Gate::X(q) | Gate::Ry(q, _) | Gate::Rz(q, _) => (*q, None),
                _ => unreachable!(),
            };
            let t = bit(target);
            let active = |j: usize| control.is_none_or(|c| (j >> bit(c)) & 1 == 1);
            DMatrix::from_fn(dim, dim, |i, j| {
                if !active(j) {
                    return if i == j { Complex64::new(1.0, 0.0) } else { Complex64::default() };
                }
                if (i ^ j) & !(1 << t) != 0 {
                    return Complex64::default();
                }
                u[(i >> t) & 1][(j >> t) & 1]
            })
        }
    }
}

/// Product of the gate embeddings in circuit order; rows and columns are
/// bin indices.
pub fn unitary_of(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    let n = circuit.n_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "dense unitary of {n} qubits exceeds the {MAX_ORACLE_QUBITS}-qubit limit"
        )));
    }
    let dim = 1usize << n;
    let mut total = DMatrix::<Complex64>::identity(dim, dim);
    for gate in circuit.gates() {
        total = embed(gate, circuit.layout()) * total;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: Complex64, re: f64) -> bool {
        (a - Complex64::new(re, 0.0)).norm() < 1e-15
    }

    #[test]
    fn single_hadamard() {
        let c = Circuit::with_gates(QubitLayout::numbered(1).unwrap(), vec![Gate::H(0)]).unwrap();
        let u = unitary_of(&c).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!(approx(u[(0, 0)], h) && approx(u[(0, 1)], h));
        assert!(approx(u[(1, 0)], h) && approx(u[(1, 1)], -h));
    }

    #[test]
    fn cnot_swaps_two_and_three() {
        let c = Circuit::with_gates(QubitLayout::numbered(2).unwrap(), vec![Gate::Cnot { control: 1, target: 0 }])
            .unwrap();
        let u = unitary_of(&c).unwrap();
        let perm = [0, 1, 3, 2];
        for j in 0..4 {
            for i in 0..4 {
                assert!(approx(u[(i, j)], if perm[j] == i { 1.0 } else { 0.0 }));
            }
        }
    }

    #[test]
    fn product_is_unitary() {
        let c = Circuit::with_gates(
            QubitLayout::numbered(3).unwrap(),
            vec![Gate::Ry(1, 0.7), Gate::CPhase { control: 0, target: 2, phi: 1.1 }, Gate::Cnot { control: 2, target: 1 }],
        )
        .unwrap();
        let u = unitary_of(&c).unwrap();
        let id = DMatrix::<Complex64>::identity(8, 8);
        assert!((&u * u.adjoint() - id).norm() < 1e-12);
    }

    #[test]
    fn oversized_register_is_refused() {
        let c = Circuit::new(QubitLayout::numbered(11).unwrap());
        assert!(matches!(unitary_of(&c), Err(Error::ResourceLimit(_))));
    }
}
