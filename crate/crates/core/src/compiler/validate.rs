use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::primitives::{Operation, Primitive};
use crate::state::{Frame, Polarization};

use super::schedule::Schedule;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticKind {
    FrameMismatch,
    Overflow { bin: usize },
    WindowCollision,
    RailOccupied { bin: usize },
    BadParameter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Offending instruction.
    pub index: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "instruction {}: {}", self.index, self.message)
    }
}

/// Possibly-nonzero modes, unioned over every basis input.
struct Occupancy {
    rails: Vec<[bool; 2]>,
}

impl Occupancy {
    fn get(&self, b: usize, pol: Polarization) -> bool {
        self.rails[b][pol.rail()]
    }
}

fn quarter_turn(angle: f64) -> Option<i64> {
    let q = angle / FRAC_PI_2;
    ((q - q.round()).abs() < 1e-13).then(|| (q.round() as i64).rem_euclid(4))
}

/// Tracks bin occupancy through the schedule for all basis inputs at once
/// and reports every frame overflow, coupler window collision, or occupied
/// V rail at a coupler input.
pub fn validate(schedule: &Schedule, frame: Frame) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    if schedule.frame().n_bins != frame.n_bins {
        diags.push(Diagnostic {
            index: 0,
            kind: DiagnosticKind::FrameMismatch,
            message: format!(
                "schedule built for {} bins, frame has {}",
                schedule.frame().n_bins,
                frame.n_bins
            ),
        });
        return Err(diags);
    }
    let n = frame.n_bins;
    let mut occ = Occupancy {
        rails: vec![[true, false]; n],
    };

    for (index, prim) in schedule.primitives().iter().enumerate() {
        let mut report = |kind: DiagnosticKind, message: String| {
            diags.push(Diagnostic { index, kind, message })
        };
        if let Err(e) = prim.check(frame) {
            match (&prim.op, e) {
                (Operation::Couple(_), Error::FrameOverflow { bin, delay, .. }) => report(
                    DiagnosticKind::Overflow { bin },
                    format!("coupler pair ({bin}, {}) leaves the frame", bin + delay),
                ),
                (Operation::Couple(_), Error::InvalidArgument(msg)) if msg.contains("collision") => {
                    report(DiagnosticKind::WindowCollision, msg)
                }
                (_, e) => report(DiagnosticKind::BadParameter, e.to_string()),
            }
            continue;
        }
        step(&mut occ, prim, n, &mut report);
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

fn step(occ: &mut Occupancy, prim: &Primitive, n: usize, report: &mut impl FnMut(DiagnosticKind, String)) {
    match &prim.op {
        Operation::PhasePattern { .. } => {}
        Operation::PolRotate { angle, bins } => {
            for &b in bins {
                let [h, v] = occ.rails[b];
                occ.rails[b] = match quarter_turn(*angle) {
                    Some(0 | 2) => [h, v],
                    Some(_) => [v, h],
                    None => [h || v, h || v],
                };
            }
        }
        Operation::Delay { bins: k, pol } => {
            let r = pol.rail();
            if let Some(bin) = (0..n).rev().find(|&b| occ.rails[b][r] && b + k >= n) {
                report(
                    DiagnosticKind::Overflow { bin },
                    format!("{pol} amplitude at bin {bin} delayed by {k} leaves the {n}-bin frame"),
                );
            }
            let mut shifted = vec![false; n];
            for b in 0..n {
                if occ.rails[b][r] && b + k < n {
                    shifted[b + k] = true;
                }
            }
            for (b, s) in shifted.into_iter().enumerate() {
                occ.rails[b][r] = s;
            }
        }
        Operation::Attenuate { factors } => {
            for (b, &f) in factors.iter().enumerate() {
                if f == 0.0 {
                    occ.rails[b] = [false, false];
                }
            }
        }
        Operation::Couple(spec) => {
            if let Some(bin) = (0..n).find(|&b| occ.get(b, Polarization::V)) {
                report(
                    DiagnosticKind::RailOccupied { bin },
                    format!("coupler needs an empty V rail, bin {bin} may be occupied"),
                );
            }
            for &b in &spec.gate_bins {
                let late = b + spec.delay;
                let (e, l) = (occ.rails[b][0], occ.rails[late][0]);
                let (e, l) = if spec.coupling == 0.0 {
                    (e, l)
                } else if spec.coupling == 1.0 {
                    (l, e)
                } else {
                    (e || l, e || l)
                };
                occ.rails[b] = [e, false];
                occ.rails[late] = [l, false];
            }
        }
    }
}
