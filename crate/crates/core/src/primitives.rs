//! Hardware instruction set of the fiber loop: phase patterns, gated
//! polarization rotations, polarization-selective delays, amplitude
//! modulation, and the composite time-bin mode coupler.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Frame, Polarization, TimeBinState};

/// Squared amplitude below which a rail counts as empty.
const RAIL_EPS: f64 = 1e-24;

/// Which rail(s) a phase pattern acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolSelector {
    H,
    V,
    Both,
}

impl PolSelector {
    fn covers(self, pol: Polarization) -> bool {
        matches!(
            (self, pol),
            (PolSelector::Both, _) | (PolSelector::H, Polarization::H) | (PolSelector::V, Polarization::V)
        )
    }
}

/// Mixes each gated bin `b` with `b + delay` by the coupler matrix
/// `[[√(1−C), √C], [−√C, √(1−C)]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplerSpec {
    pub delay: usize,
    pub coupling: f64,
    /// Early member of every coupled pair.
    pub gate_bins: Vec<usize>,
}

impl CouplerSpec {
    pub fn new(delay: usize, coupling: f64, gate_bins: Vec<usize>) -> Self {
        CouplerSpec {
            delay,
            coupling,
            gate_bins,
        }
    }

    /// Partial-rotation angle with `C = sin²θ`, `θ ∈ [0, π/2]`.
    pub fn mix_angle(&self) -> f64 {
        self.coupling.sqrt().asin()
    }

    pub fn check(&self, n_bins: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.coupling) {
            return Err(Error::invalid(format!("coupling {} outside [0, 1]", self.coupling)));
        }
        if self.delay == 0 {
            return Err(Error::invalid("coupler delay must be at least one bin"));
        }
        let mut role = vec![0u8; n_bins];
        for &b in &self.gate_bins {
            let late = b + self.delay;
            if late >= n_bins {
                return Err(Error::FrameOverflow {
                    bin: b,
                    delay: self.delay,
                    n_bins,
                });
            }
            if role[b] != 0 || role[late] != 0 {
                return Err(Error::invalid(format!(
                    "coupler window collision at pair ({b}, {late})"
                )));
            }
            role[b] = 1;
            role[late] = 2;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Operation {
    PhasePattern { phases: Vec<f64>, pol: PolSelector },
    PolRotate { angle: f64, bins: Vec<usize> },
    Delay { bins: usize, pol: Polarization },
    Attenuate { factors: Vec<f64> },
    Couple(CouplerSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrimitiveKind {
    PhasePattern,
    PolRotate,
    Delay,
    Attenuate,
    Couple,
}

/// Insertion loss in dB charged per instruction kind. A coupler costs one
/// pass through the polarization switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    pub phase_db: f64,
    pub pol_rotate_db: f64,
    pub delay_db: f64,
    pub attenuate_db: f64,
}

impl Default for LossTable {
    fn default() -> Self {
        LossTable {
            phase_db: 2.0,
            pol_rotate_db: 3.5,
            delay_db: 0.0,
            attenuate_db: 0.0,
        }
    }
}

impl LossTable {
    pub fn lossless() -> Self {
        LossTable {
            phase_db: 0.0,
            pol_rotate_db: 0.0,
            delay_db: 0.0,
            attenuate_db: 0.0,
        }
    }

    pub fn for_kind(&self, kind: PrimitiveKind) -> f64 {
        match kind {
            PrimitiveKind::PhasePattern => self.phase_db,
            PrimitiveKind::PolRotate | PrimitiveKind::Couple => self.pol_rotate_db,
            PrimitiveKind::Delay => self.delay_db,
            PrimitiveKind::Attenuate => self.attenuate_db,
        }
    }
}

/// One hardware instruction plus the insertion loss it carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub op: Operation,
    pub loss_db: f64,
}

impl Primitive {
    pub fn new(op: Operation, table: &LossTable) -> Self {
        let loss_db = table.for_kind(kind_of(&op));
        Primitive { op, loss_db }
    }

    pub fn lossless(op: Operation) -> Self {
        Primitive { op, loss_db: 0.0 }
    }

    pub fn kind(&self) -> PrimitiveKind {
        kind_of(&self.op)
    }

    /// Power transmission of the instruction's insertion loss.
    pub fn transmission(&self) -> f64 {
        db_to_power(self.loss_db)
    }

    /// Static parameter checks against a frame.
    pub fn check(&self, frame: Frame) -> Result<()> {
        if !(self.loss_db.is_finite() && self.loss_db >= 0.0) {
            return Err(Error::invalid(format!("loss {} dB is negative", self.loss_db)));
        }
        let n = frame.n_bins;
        match &self.op {
            Operation::PhasePattern { phases, .. } => check_len(phases.len(), n, "phase pattern"),
            Operation::PolRotate { bins, .. } => check_bins(bins, n),
            Operation::Delay { .. } => Ok(()),
            Operation::Attenuate { factors } => {
                check_len(factors.len(), n, "attenuation pattern")?;
                check_factors(factors)
            }
            Operation::Couple(spec) => spec.check(n),
        }
    }
}

fn kind_of(op: &Operation) -> PrimitiveKind {
    match op {
        Operation::PhasePattern { .. } => PrimitiveKind::PhasePattern,
        Operation::PolRotate { .. } => PrimitiveKind::PolRotate,
        Operation::Delay { .. } => PrimitiveKind::Delay,
        Operation::Attenuate { .. } => PrimitiveKind::Attenuate,
        Operation::Couple(_) => PrimitiveKind::Couple,
    }
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(-db / 20.0)
}

fn check_len(got: usize, n_bins: usize, what: &str) -> Result<()> {
    if got == n_bins {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} has {got} entries for a {n_bins}-bin frame")))
    }
}

fn check_bins(bins: &[usize], n_bins: usize) -> Result<()> {
    match bins.iter().find(|&&b| b >= n_bins) {
        Some(b) => Err(Error::invalid(format!("bin {b} outside {n_bins}-bin frame"))),
        None => Ok(()),
    }
}

fn check_factors(factors: &[f64]) -> Result<()> {
    match factors.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        Some(f) => Err(Error::invalid(format!("attenuation factor {f} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// `(cos θ, sin θ)` with quarter turns snapped to exact values so rotated
/// rails end up exactly empty.
fn cos_sin(angle: f64) -> (f64, f64) {
    let quarters = angle / FRAC_PI_2;
    let nearest = quarters.round();
    if (quarters - nearest).abs() < 1e-13 {
        match (nearest as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        (angle.cos(), angle.sin())
    }
}

/// Multiplies every selected mode of bin `b` by `e^{iφ_b}`.
pub fn apply_phase(state: &mut TimeBinState, phases: &[f64], pol: PolSelector) -> Result<()> {
    check_len(phases.len(), state.n_bins(), "phase pattern")?;
    for (b, &phi) in phases.iter().enumerate() {
        if phi == 0.0 {
            continue;
        }
        let (c, s) = cos_sin(phi);
        let factor = Complex64::new(c, s);
        for p in [Polarization::H, Polarization::V] {
            if pol.covers(p) {
                let a = state.amp(b, p);
                state.set(b, p, a * factor);
            }
        }
    }
    Ok(())
}

/// `(H, V) ← (cos θ H + sin θ V, −sin θ H + cos θ V)` on the gated bins.
pub fn apply_pol_rotate(state: &mut TimeBinState, angle: f64, bins: &[usize]) -> Result<()> {
    check_bins(bins, state.n_bins())?;
    let (c, s) = cos_sin(angle);
    for &b in bins {
        let (h, v) = state.pair_mut(b);
        let (h0, v0) = (*h, *v);
        *h = h0 * c + v0 * s;
        *v = -h0 * s + v0 * c;
    }
    Ok(())
}

fn shift_rail(state: &mut TimeBinState, k: usize, pol: Polarization, forward: bool) -> Result<()> {
    if k == 0 {
        return Ok(());
    }
    let n = state.n_bins();
    let occupied = |b: usize| state.amp(b, pol).norm_sqr() > 0.0;
    let overflow = if forward {
        (n.saturating_sub(k)..n).find(|&b| occupied(b))
    } else {
        (0..k.min(n)).find(|&b| occupied(b))
    };
    if let Some(bin) = overflow {
        return Err(Error::FrameOverflow { bin, delay: k, n_bins: n });
    }
    if forward {
        for b in (k..n).rev() {
            let a = state.amp(b - k, pol);
            state.set(b, pol, a);
        }
        for b in 0..k.min(n) {
            state.set(b, pol, Complex64::default());
        }
    } else {
        for b in 0..n - k {
            let a = state.amp(b + k, pol);
            state.set(b, pol, a);
        }
        for b in n - k..n {
            state.set(b, pol, Complex64::default());
        }
    }
    Ok(())
}

/// Delays every amplitude on rail `pol` by `k` bins. Fails without touching
/// the state if a nonzero amplitude would leave the frame.
pub fn apply_delay(state: &mut TimeBinState, k: usize, pol: Polarization) -> Result<()> {
    shift_rail(state, k, pol, true)
}

pub fn apply_attenuate(state: &mut TimeBinState, factors: &[f64]) -> Result<()> {
    check_len(factors.len(), state.n_bins(), "attenuation pattern")?;
    check_factors(factors)?;
    for (b, &f) in factors.iter().enumerate() {
        let (h, v) = state.pair_mut(b);
        *h *= f;
        *v *= f;
    }
    Ok(())
}

/// Scales the amplitudes of `bins` by `10^(−dB/20)`.
pub fn apply_loss(state: &mut TimeBinState, loss_db: f64, bins: &[usize]) -> Result<()> {
    if !(loss_db.is_finite() && loss_db >= 0.0) {
        return Err(Error::invalid(format!("loss {loss_db} dB is negative")));
    }
    check_bins(bins, state.n_bins())?;
    if loss_db == 0.0 {
        return Ok(());
    }
    let t = db_to_amplitude(loss_db);
    for &b in bins {
        let (h, v) = state.pair_mut(b);
        *h *= t;
        *v *= t;
    }
    Ok(())
}

/// Uniform insertion loss over the whole frame.
pub fn apply_frame_loss(state: &mut TimeBinState, loss_db: f64) -> Result<()> {
    if !(loss_db.is_finite() && loss_db >= 0.0) {
        return Err(Error::invalid(format!("loss {loss_db} dB is negative")));
    }
    if loss_db > 0.0 {
        state.scale(db_to_amplitude(loss_db));
    }
    Ok(())
}

/// Mode coupler built from loop operations:
///
/// 1. full switch moves each early member onto the V rail,
/// 2. the V rail is delayed by `k`, meeting the late member,
/// 3. a partial rotation with `C = sin²θ` mixes the two,
/// 4. the mixed V component makes its second pass and is read against the
///    re-referenced clock, landing back in the early slot,
/// 5. a closing switch returns it to the H rail.
///
/// The input V rail must be empty across the frame.
pub fn apply_coupler(state: &mut TimeBinState, spec: &CouplerSpec) -> Result<()> {
    let n = state.n_bins();
    spec.check(n)?;
    if let Some(bin) = (0..n).find(|&b| state.amp(b, Polarization::V).norm_sqr() > RAIL_EPS) {
        return Err(Error::RailOccupied { bin });
    }
    for b in 0..n {
        state.set(b, Polarization::V, Complex64::default());
    }
    let k = spec.delay;
    let late: Vec<usize> = spec.gate_bins.iter().map(|b| b + k).collect();

    apply_pol_rotate(state, FRAC_PI_2, &spec.gate_bins)?;
    apply_delay(state, k, Polarization::V)?;
    apply_pol_rotate(state, spec.mix_angle(), &late)?;
    shift_rail(state, k, Polarization::V, false)?;
    apply_pol_rotate(state, -FRAC_PI_2, &spec.gate_bins)?;
    Ok(())
}

/// Executes one instruction, charging its insertion loss when `loss_on`.
pub fn apply_primitive(state: &mut TimeBinState, prim: &Primitive, loss_on: bool) -> Result<()> {
    match &prim.op {
        Operation::PhasePattern { phases, pol } => apply_phase(state, phases, *pol)?,
        Operation::PolRotate { angle, bins } => apply_pol_rotate(state, *angle, bins)?,
        Operation::Delay { bins, pol } => {
            apply_delay(state, *bins, *pol)?;
            // only the delayed rail passes through the fiber
            if loss_on && prim.loss_db > 0.0 {
                let t = db_to_amplitude(prim.loss_db);
                for b in 0..state.n_bins() {
                    let a = state.amp(b, *pol);
                    state.set(b, *pol, a * t);
                }
            }
            return Ok(());
        }
        Operation::Attenuate { factors } => apply_attenuate(state, factors)?,
        Operation::Couple(spec) => apply_coupler(state, spec)?,
    }
    if loss_on {
        apply_frame_loss(state, prim.loss_db)?;
    }
    Ok(())
}
