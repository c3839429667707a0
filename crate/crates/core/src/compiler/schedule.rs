use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::{apply_primitive, LossTable, Operation, Primitive, PrimitiveKind};
use crate::state::{Frame, TimeBinState};

use super::lower::lower_gate;
use super::validate::{validate, DiagnosticKind};
use super::Circuit;

/// Time-ordered primitive list for one frame, split into loop passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    frame: Frame,
    primitives: Vec<Primitive>,
    /// Index of the first primitive of every pass.
    pass_starts: Vec<usize>,
    /// Gate each primitive was lowered from.
    origins: Vec<usize>,
}

impl Schedule {
    /// Wraps a hand-built primitive list. Every coupler closes a pass.
    pub fn new(frame: Frame, primitives: Vec<Primitive>) -> Self {
        let origins = (0..primitives.len()).collect();
        Self::from_parts(frame, primitives, origins)
    }

    fn from_parts(frame: Frame, primitives: Vec<Primitive>, origins: Vec<usize>) -> Self {
        let mut pass_starts = Vec::new();
        let mut open = false;
        for (i, p) in primitives.iter().enumerate() {
            if !open {
                pass_starts.push(i);
                open = true;
            }
            if p.kind() == PrimitiveKind::Couple {
                open = false;
            }
        }
        Schedule {
            frame,
            primitives,
            pass_starts,
            origins,
        }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn pass_starts(&self) -> &[usize] {
        &self.pass_starts
    }

    pub fn n_passes(&self) -> usize {
        self.pass_starts.len()
    }

    /// Primitives grouped by loop pass.
    pub fn passes(&self) -> impl Iterator<Item = &[Primitive]> {
        let ends = self.pass_starts.iter().skip(1).copied().chain([self.primitives.len()]);
        self.pass_starts
            .iter()
            .zip(ends)
            .map(|(&s, e)| &self.primitives[s..e])
    }

    /// Gate index each primitive came from.
    pub fn origin(&self, primitive: usize) -> usize {
        self.origins[primitive]
    }

    /// Product of the per-instruction power transmissions.
    pub fn transmission(&self) -> f64 {
        self.primitives.iter().map(Primitive::transmission).product()
    }

    pub fn count(&self, kind: PrimitiveKind) -> usize {
        self.primitives.iter().filter(|p| p.kind() == kind).count()
    }

    /// Concatenates `other` after `self`; frames must agree.
    pub fn then(mut self, other: &Schedule) -> Result<Schedule> {
        if self.frame != other.frame {
            return Err(Error::invalid("cannot join schedules over different frames"));
        }
        let offset = self.origins.last().map_or(0, |o| o + 1);
        self.primitives.extend(other.primitives.iter().cloned());
        self.origins.extend(other.origins.iter().map(|o| o + offset));
        Ok(Schedule::from_parts(self.frame, self.primitives, self.origins))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    pub loss: LossTable,
    /// Fold adjacent phase patterns into one instruction.
    pub merge_phases: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            loss: LossTable::default(),
            merge_phases: true,
        }
    }
}

/// Lowers a circuit with the default loss table and phase merging.
pub fn compile(circuit: &Circuit, frame: Frame) -> Result<Schedule> {
    compile_with(circuit, frame, &CompileOptions::default())
}

pub fn compile_with(circuit: &Circuit, frame: Frame, opts: &CompileOptions) -> Result<Schedule> {
    let layout = circuit.layout();
    let mut prims: Vec<Primitive> = Vec::new();
    let mut origins = Vec::new();
    for (i, gate) in circuit.gates().iter().enumerate() {
        for p in lower_gate(gate, layout, frame, &opts.loss, i)? {
            if opts.merge_phases {
                if let Some(last) = prims.last_mut() {
                    if merge_into(last, &p) {
                        continue;
                    }
                }
            }
            prims.push(p);
            origins.push(i);
        }
    }
    let schedule = Schedule::from_parts(frame, prims, origins);
    if let Err(diags) = validate(&schedule, frame) {
        let d = &diags[0];
        let gate_index = match d.kind {
            DiagnosticKind::FrameMismatch => 0,
            _ => schedule.origin(d.index),
        };
        return Err(Error::ScheduleInfeasible {
            gate_index,
            reason: d.message.clone(),
        });
    }
    Ok(schedule)
}

fn merge_into(last: &mut Primitive, next: &Primitive) -> bool {
    match (&mut last.op, &next.op) {
        (
            Operation::PhasePattern { phases, pol },
            Operation::PhasePattern {
                phases: more,
                pol: more_pol,
            },
        ) if pol == more_pol => {
            for (a, b) in phases.iter_mut().zip(more) {
                *a += b;
            }
            // one modulator pass instead of two
            last.loss_db = last.loss_db.max(next.loss_db);
            true
        }
        _ => false,
    }
}

/// Replays a schedule on a copy of `state`.
pub fn run_schedule(schedule: &Schedule, state: &TimeBinState, loss_on: bool) -> Result<TimeBinState> {
    let (sf, f) = (schedule.frame(), state.frame());
    if sf.n_bins != f.n_bins || (sf.bin_width - f.bin_width).abs() > 1e-12 * sf.bin_width {
        return Err(Error::invalid(format!(
            "state frame ({} bins × {} ns) does not match schedule frame ({} bins × {} ns)",
            f.n_bins, f.bin_width, sf.n_bins, sf.bin_width
        )));
    }
    let mut out = state.clone();
    for p in schedule.primitives() {
        apply_primitive(&mut out, p, loss_on)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{Circuit, Gate};
    use crate::state::{basis_state, fidelity, probabilities, uniform_state, Polarization, QubitLayout};

    fn frame(n: usize) -> Frame {
        Frame::with_bins(n).unwrap()
    }

    #[test]
    fn empty_circuit_compiles_to_empty_schedule() {
        let c = Circuit::new(QubitLayout::numbered(2).unwrap());
        let s = compile(&c, frame(4)).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.n_passes(), 0);
        let input = uniform_state(4, Polarization::H).unwrap();
        assert_eq!(run_schedule(&s, &input, true).unwrap(), input);
    }

    #[test]
    fn adjacent_rz_merge_into_one_pattern() {
        let layout = QubitLayout::numbered(1).unwrap();
        let c = Circuit::with_gates(layout, vec![Gate::Rz(0, 0.3), Gate::Rz(0, 0.5)]).unwrap();
        let s = compile(&c, frame(2)).unwrap();
        assert_eq!(s.len(), 1);
        let Operation::PhasePattern { phases, .. } = &s.primitives()[0].op else {
            panic!("expected phase pattern");
        };
        assert!((phases[1] - phases[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn cnot_runs_as_truth_table() {
        let layout = QubitLayout::numbered(2).unwrap();
        let c = Circuit::with_gates(layout.clone(), vec![Gate::Cnot { control: 1, target: 0 }]).unwrap();
        let s = compile(&c, frame(4)).unwrap();
        let out = run_schedule(&s, &basis_state(&layout, "10").unwrap(), false).unwrap();
        let want = basis_state(&layout, "11").unwrap();
        assert!(fidelity(&out, &want).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn hadamard_splits_evenly() {
        let layout = QubitLayout::numbered(1).unwrap();
        let c = Circuit::with_gates(layout.clone(), vec![Gate::H(0)]).unwrap();
        let s = compile(&c, frame(2)).unwrap();
        let out = run_schedule(&s, &basis_state(&layout, "0").unwrap(), false).unwrap();
        for p in probabilities(&out) {
            assert!((p - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_mismatch_is_rejected() {
        let c = Circuit::with_gates(QubitLayout::numbered(1).unwrap(), vec![Gate::H(0)]).unwrap();
        let s = compile(&c, frame(2)).unwrap();
        let wrong = uniform_state(4, Polarization::H).unwrap();
        assert!(matches!(run_schedule(&s, &wrong, false), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn passes_end_at_couplers() {
        let layout = QubitLayout::numbered(2).unwrap();
        let c = Circuit::with_gates(
            layout,
            vec![Gate::Rz(0, 0.2), Gate::H(0), Gate::Rz(1, 0.4), Gate::H(1), Gate::Rz(0, 1.0)],
        )
        .unwrap();
        let s = compile(&c, frame(4)).unwrap();
        let total: usize = s.passes().map(<[Primitive]>::len).sum();
        assert_eq!(total, s.len());
        assert_eq!(s.n_passes(), 3);
        for pass in s.passes().take(2) {
            assert_eq!(pass.last().unwrap().kind(), PrimitiveKind::Couple);
        }
    }

    #[test]
    fn lossy_run_charges_every_instruction() {
        let layout = QubitLayout::numbered(2).unwrap();
        let c = Circuit::with_gates(layout.clone(), vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap();
        let s = compile(&c, frame(4)).unwrap();
        let input = basis_state(&layout, "00").unwrap();
        let lossy = run_schedule(&s, &input, true).unwrap();
        let clean = run_schedule(&s, &input, false).unwrap();
        assert!((lossy.norm_sqr() / clean.norm_sqr() - s.transmission()).abs() < 1e-12);
        assert!(s.transmission() < 1.0);
    }
}
