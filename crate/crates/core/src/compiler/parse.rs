//! Line-oriented circuit text format.
//!
//! ```text
//! # Shor-15 modular exponentiation
//! qubits x0 x1 x2 f0 f1
//! H x0
//! CNOT x1 f0
//! RZ x2 1.5707963
//! CPHASE x1 x0 0.7853982
//! ```
//!
//! A qubit may carry an explicit bit position (`qubits x0:2 x1:1 x2:0`);
//! otherwise qubits fill positions in declaration order.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::QubitLayout;

use super::{Circuit, Gate};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_layout(line: usize, tokens: &[&str]) -> Result<QubitLayout> {
    if tokens.is_empty() {
        return Err(parse_err(line, "qubits header names no qubits"));
    }
    let mut names = Vec::with_capacity(tokens.len());
    let mut bits = Vec::with_capacity(tokens.len());
    for (i, tok) in tokens.iter().enumerate() {
        match tok.split_once(':') {
            Some((name, bit)) => {
                let bit = bit
                    .parse::<u32>()
                    .map_err(|_| parse_err(line, format!("bad bit position in {tok:?}")))?;
                names.push(name.to_string());
                bits.push(bit);
            }
            None => {
                names.push(tok.to_string());
                bits.push(i as u32);
            }
        }
    }
    QubitLayout::new(names, bits).map_err(|e| parse_err(line, e.to_string()))
}

fn parse_gate(line: usize, tokens: &[&str], layout: &QubitLayout) -> Result<Gate> {
    let op = tokens[0].to_ascii_uppercase();
    let args = &tokens[1..];
    let qubit = |i: usize| -> Result<usize> {
        let name = args
            .get(i)
            .ok_or_else(|| parse_err(line, format!("{op} is missing a qubit operand")))?;
        layout
            .index_of(name)
            .ok_or_else(|| parse_err(line, format!("unknown qubit {name:?}")))
    };
    let number = |i: usize| -> Result<f64> {
        let tok = args
            .get(i)
            .ok_or_else(|| parse_err(line, format!("{op} is missing a numeric operand")))?;
        tok.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| parse_err(line, format!("bad number {tok:?}")))
    };
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(parse_err(line, format!("{op} takes {n} operands, got {}", args.len())))
        }
    };

    let gate = match op.as_str() {
        "H" => {
            arity(1)?;
            Gate::H(qubit(0)?)
        }
        "X" => {
            arity(1)?;
            Gate::X(qubit(0)?)
        }
        "RY" => {
            arity(2)?;
            Gate::Ry(qubit(0)?, number(1)?)
        }
        "RZ" => {
            arity(2)?;
            Gate::Rz(qubit(0)?, number(1)?)
        }
        "CNOT" => {
            arity(2)?;
            Gate::Cnot {
                control: qubit(0)?,
                target: qubit(1)?,
            }
        }
        "CPHASE" => {
            arity(3)?;
            Gate::CPhase {
                control: qubit(0)?,
                target: qubit(1)?,
                phi: number(2)?,
            }
        }
        "CU" => {
            arity(10)?;
            let e = |k: usize| -> Result<Complex64> { Ok(Complex64::new(number(2 + 2 * k)?, number(3 + 2 * k)?)) };
            Gate::CU {
                control: qubit(0)?,
                target: qubit(1)?,
                u: [[e(0)?, e(1)?], [e(2)?, e(3)?]],
            }
        }
        "DIAG" => {
            arity(layout.n_bins())?;
            Gate::Diag((0..args.len()).map(number).collect::<Result<_>>()?)
        }
        _ => return Err(parse_err(line, format!("unknown gate {:?}", tokens[0]))),
    };
    Ok(gate)
}

/// Parses the circuit text format. Line numbers in errors are 1-based.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens[0].eq_ignore_ascii_case("qubits") {
            if circuit.is_some() {
                return Err(parse_err(line, "duplicate qubits header"));
            }
            circuit = Some(Circuit::new(parse_layout(line, &tokens[1..])?));
            continue;
        }
        let c = circuit
            .as_mut()
            .ok_or_else(|| parse_err(line, "gate before the qubits header"))?;
        let gate = parse_gate(line, &tokens, c.layout())?;
        c.push(gate).map_err(|e| parse_err(line, e.to_string()))?;
    }
    circuit.ok_or_else(|| parse_err(0, "missing qubits header"))
}

/// Writes a circuit back in the text format.
pub fn format_circuit(circuit: &Circuit) -> String {
    let layout = circuit.layout();
    let name = |q: usize| layout.names()[q].as_str();
    let mut out = String::from("qubits");
    let sequential = (0..layout.n_qubits()).all(|q| layout.bit(q) as usize == q);
    for (q, n) in layout.names().iter().enumerate() {
        if sequential {
            let _ = write!(out, " {n}");
        } else {
            let _ = write!(out, " {n}:{}", layout.bit(q));
        }
    }
    out.push('\n');
    for gate in circuit.gates() {
        let _ = match gate {
            Gate::H(q) => writeln!(out, "H {}", name(*q)),
            Gate::X(q) => writeln!(out, "X {}", name(*q)),
            Gate::Ry(q, t) => writeln!(out, "RY {} {t}", name(*q)),
            Gate::Rz(q, p) => writeln!(out, "RZ {} {p}", name(*q)),
            Gate::Cnot { control, target } => writeln!(out, "CNOT {} {}", name(*control), name(*target)),
            Gate::CPhase { control, target, phi } => {
                writeln!(out, "CPHASE {} {} {phi}", name(*control), name(*target))
            }
            Gate::CU { control, target, u } => {
                let _ = write!(out, "CU {} {}", name(*control), name(*target));
                for z in u.iter().flatten() {
                    let _ = write!(out, " {} {}", z.re, z.im);
                }
                writeln!(out)
            }
            Gate::Diag(phases) => {
                out.push_str("DIAG");
                for p in phases {
                    let _ = write!(out, " {p}");
                }
                writeln!(out)
            }
        };
    }
    out
}
