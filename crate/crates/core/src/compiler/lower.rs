use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::primitives::{CouplerSpec, LossTable, Operation, PolSelector, Primitive};
use crate::state::{Frame, QubitLayout};

use super::{single_qubit_matrix, Gate, Mat2};

/// Amplitude below which a matrix entry is treated as zero.
const ZERO_TOL: f64 = 1e-14;

/// `U = diag(e^{iα0}, e^{iα1}) · [[√(1−C), √C], [−√C, √(1−C)]] · diag(1, e^{iβ1})`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarySplit {
    pub coupling: f64,
    pub pre_late: f64,
    pub post_early: f64,
    pub post_late: f64,
}

/// Factors a 2×2 unitary into a coupler sandwiched by phases.
pub fn split_unitary(u: &Mat2) -> UnitarySplit {
    let cos = u[0][0].norm();
    let sin = u[0][1].norm();
    let mut coupling = (sin * sin).clamp(0.0, 1.0);
    if coupling < ZERO_TOL * ZERO_TOL {
        coupling = 0.0;
    } else if 1.0 - coupling < 1e-15 {
        coupling = 1.0;
    }
    let post_early = if cos > ZERO_TOL { u[0][0].arg() } else { u[0][1].arg() };
    let (pre_late, post_late) = if sin > ZERO_TOL {
        (u[0][1].arg() - post_early, (-u[1][0]).arg())
    } else {
        (0.0, u[1][1].arg())
    };
    UnitarySplit {
        coupling,
        pre_late: wrap(pre_late),
        post_early: wrap(post_early),
        post_late: wrap(post_late),
    }
}

/// Maps an angle into `(−π, π]`, snapping values that are zero to within
/// rounding so they drop out of the schedule.
fn wrap(phi: f64) -> f64 {
    let mut w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w.abs() < 1e-15 {
        0.0
    } else {
        w
    }
}

fn phase_pattern(phases: Vec<f64>, table: &LossTable) -> Option<Primitive> {
    if phases.iter().all(|&p| p == 0.0) {
        return None;
    }
    Some(Primitive::new(
        Operation::PhasePattern {
            phases,
            pol: PolSelector::Both,
        },
        table,
    ))
}

/// Register bins that also lie inside the frame.
fn register_bins(layout: &QubitLayout, frame: Frame) -> impl Iterator<Item = usize> {
    0..layout.n_bins().min(frame.n_bins)
}

fn lower_diagonal(
    layout: &QubitLayout,
    frame: Frame,
    table: &LossTable,
    phase_of: impl Fn(usize) -> f64,
) -> Vec<Primitive> {
    let mut phases = vec![0.0; frame.n_bins];
    for b in register_bins(layout, frame) {
        phases[b] = wrap(phase_of(b));
    }
    phase_pattern(phases, table).into_iter().collect()
}

fn lower_unitary(
    u: &Mat2,
    target: usize,
    control: Option<usize>,
    layout: &QubitLayout,
    frame: Frame,
    table: &LossTable,
    gate_index: usize,
) -> Result<Vec<Primitive>> {
    let split = split_unitary(u);
    let t_bit = layout.bit(target);
    let delay = 1usize << t_bit;
    let early: Vec<usize> = register_bins(layout, frame)
        .filter(|&b| !layout.qubit_value(b, target))
        .filter(|&b| control.is_none_or(|c| layout.qubit_value(b, c)))
        .collect();
    if let Some(&b) = early.iter().find(|&&b| b + delay >= frame.n_bins) {
        return Err(Error::ScheduleInfeasible {
            gate_index,
            reason: format!(
                "pair ({b}, {}) of the delay-{delay} coupler leaves the {}-bin frame",
                b + delay,
                frame.n_bins
            ),
        });
    }

    let mut out = Vec::with_capacity(3);
    let mut pre = vec![0.0; frame.n_bins];
    let mut post = vec![0.0; frame.n_bins];
    for &b in &early {
        pre[b + delay] = split.pre_late;
        post[b] = split.post_early;
        post[b + delay] = split.post_late;
    }
    out.extend(phase_pattern(pre, table));
    if split.coupling > 0.0 {
        out.push(Primitive::new(
            Operation::Couple(CouplerSpec::new(delay, split.coupling, early)),
            table,
        ));
    }
    out.extend(phase_pattern(post, table));
    Ok(out)
}

/// Lowers one gate to loop primitives.
///
/// Diagonal gates become a single phase pattern. Everything else becomes a
/// coupler of delay `2^k` (with `k` the target's bit) gated on the bins
/// whose target bit is 0, plus the phase patterns that make the net 2×2
/// action match the gate matrix exactly. Controlled gates restrict the
/// gating and the phases to control-bit-1 bins.
pub fn lower_gate(
    gate: &Gate,
    layout: &QubitLayout,
    frame: Frame,
    table: &LossTable,
    gate_index: usize,
) -> Result<Vec<Primitive>> {
    Ok(match gate {
        Gate::Rz(q, phi) => {
            let (q, phi) = (*q, *phi);
            lower_diagonal(layout, frame, table, |b| {
                if layout.qubit_value(b, q) {
                    phi / 2.0
                } else {
                    -phi / 2.0
                }
            })
        }
        Gate::Diag(phases) => lower_diagonal(layout, frame, table, |b| phases[b]),
        Gate::CPhase {
            control,
            target,
            phi,
        } => lower_diagonal(layout, frame, table, |b| {
            if layout.qubit_value(b, *control) && layout.qubit_value(b, *target) {
                *phi
            } else {
                0.0
            }
        }),
        Gate::H(q) | Gate::X(q) | Gate::Ry(q, _) => {
            let u = single_qubit_matrix(gate).expect("single-qubit gate");
            lower_unitary(&u, *q, None, layout, frame, table, gate_index)?
        }
        Gate::Cnot { control, target } => {
            let u = single_qubit_matrix(&Gate::X(*target)).expect("X matrix");
            lower_unitary(&u, *target, Some(*control), layout, frame, table, gate_index)?
        }
        Gate::CU { control, target, u } => {
            lower_unitary(u, *target, Some(*control), layout, frame, table, gate_index)?
        }
    })
}
