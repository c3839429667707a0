//! Single-photon state over a frame of time bins and two polarization rails.
//!
//! Qubits are packed into the bin index: qubit `q` sitting at bit position
//! `k` contributes `q << k`, so an `n`-qubit register occupies `2^n` bins.
//! Photon loss is carried by the norm deficit of the amplitudes rather than
//! by an explicit vacuum mode.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bin width in nanoseconds; 16 bins then span the 200 ns delay line.
pub const DEFAULT_BIN_WIDTH_NS: f64 = 12.5;

/// Slack allowed on the unit-norm ceiling.
pub const NORM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub(crate) fn rail(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
        }
    }
}

/// Frame geometry shared by states and schedules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub n_bins: usize,
    pub bin_width: f64,
}

impl Frame {
    pub fn new(n_bins: usize, bin_width: f64) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::invalid("frame needs at least one bin"));
        }
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(Error::invalid(format!("bin width must be positive, got {bin_width}")));
        }
        Ok(Frame { n_bins, bin_width })
    }

    /// Frame of `n_bins` at the default 12.5 ns spacing.
    pub fn with_bins(n_bins: usize) -> Result<Self> {
        Self::new(n_bins, DEFAULT_BIN_WIDTH_NS)
    }

    pub fn duration(&self) -> f64 {
        self.n_bins as f64 * self.bin_width
    }

    pub fn bin_center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * self.bin_width
    }

    /// `n_bins + 1` edges starting at t = 0.
    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.n_bins).map(|b| b as f64 * self.bin_width).collect()
    }
}

/// Complex amplitudes of one photon over `(bin, polarization)` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBinState {
    frame: Frame,
    // interleaved: index 2 * bin + rail
    amps: Vec<Complex64>,
}

impl TimeBinState {
    /// All-zero state (a photon that has certainly been lost).
    pub fn vacuum(frame: Frame) -> Self {
        TimeBinState {
            frame,
            amps: vec![Complex64::new(0.0, 0.0); 2 * frame.n_bins],
        }
    }

    /// Builds a state from per-bin amplitudes on one rail.
    pub fn from_amplitudes(frame: Frame, pol: Polarization, amps: &[Complex64]) -> Result<Self> {
        if amps.len() != frame.n_bins {
            return Err(Error::invalid(format!(
                "expected {} amplitudes, got {}",
                frame.n_bins,
                amps.len()
            )));
        }
        let mut state = Self::vacuum(frame);
        for (b, a) in amps.iter().enumerate() {
            state.set(b, pol, *a);
        }
        state.check_norm()?;
        Ok(state)
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn n_bins(&self) -> usize {
        self.frame.n_bins
    }

    pub fn bin_width(&self) -> f64 {
        self.frame.bin_width
    }

    pub fn amp(&self, bin: usize, pol: Polarization) -> Complex64 {
        self.amps[2 * bin + pol.rail()]
    }

    pub fn set(&mut self, bin: usize, pol: Polarization, value: Complex64) {
        self.amps[2 * bin + pol.rail()] = value;
    }

    pub(crate) fn pair_mut(&mut self, bin: usize) -> (&mut Complex64, &mut Complex64) {
        let (h, v) = self.amps[2 * bin..2 * bin + 2].split_at_mut(1);
        (&mut h[0], &mut v[0])
    }

    /// Raw interleaved amplitudes, `[H0, V0, H1, V1, ...]`.
    pub fn raw(&self) -> &[Complex64] {
        &self.amps
    }

    #[cfg(test)]
    pub(crate) fn raw_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability that the photon has been lost.
    pub fn loss_probability(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    pub fn check_norm(&self) -> Result<()> {
        let n = self.norm_sqr();
        if n.is_finite() && n <= 1.0 + NORM_EPS {
            Ok(())
        } else {
            Err(Error::invalid(format!("squared norm {n} exceeds 1")))
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// Copy rescaled to unit norm; `None` for the vacuum.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n <= 0.0 {
            return None;
        }
        let mut out = self.clone();
        out.scale(1.0 / n.sqrt());
        Some(out)
    }
}

/// Equal superposition over every bin of a frame, on one rail.
pub fn uniform_state(n_bins: usize, pol: Polarization) -> Result<TimeBinState> {
    uniform_state_in(Frame::with_bins(n_bins)?, pol)
}

pub fn uniform_state_in(frame: Frame, pol: Polarization) -> Result<TimeBinState> {
    let a = Complex64::new(1.0 / (frame.n_bins as f64).sqrt(), 0.0);
    let mut state = TimeBinState::vacuum(frame);
    for b in 0..frame.n_bins {
        state.set(b, pol, a);
    }
    Ok(state)
}

/// Per-bin detection probability, summed over both rails.
pub fn probabilities(state: &TimeBinState) -> Vec<f64> {
    state
        .amps
        .chunks_exact(2)
        .map(|hv| hv[0].norm_sqr() + hv[1].norm_sqr())
        .collect()
}

/// `⟨a|b⟩` over all modes.
pub fn overlap(a: &TimeBinState, b: &TimeBinState) -> Result<Complex64> {
    if a.n_bins() != b.n_bins() {
        return Err(Error::invalid(format!(
            "overlap of {}-bin and {}-bin states",
            a.n_bins(),
            b.n_bins()
        )));
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// `|⟨a|b⟩|² / (‖a‖² ‖b‖²)`: equality up to global phase and norm.
pub fn fidelity(a: &TimeBinState, b: &TimeBinState) -> Result<f64> {
    let ov = overlap(a, b)?;
    let denom = a.norm_sqr() * b.norm_sqr();
    if denom <= 0.0 {
        return Err(Error::invalid("fidelity with a vacuum state"));
    }
    Ok(ov.norm_sqr() / denom)
}

/// Names qubits and fixes which bit of the bin index each one occupies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    names: Vec<String>,
    bits: Vec<u32>,
}

impl QubitLayout {
    /// `bits[i]` is the bit position of qubit `names[i]`.
    pub fn new(names: Vec<String>, bits: Vec<u32>) -> Result<Self> {
        if names.len() != bits.len() {
            return Err(Error::invalid("layout needs one bit position per qubit"));
        }
        let n = names.len();
        if n > 30 {
            return Err(Error::ResourceLimit(format!("{n} qubits do not fit a bin index")));
        }
        let mut seen = vec![false; n];
        for &k in &bits {
            let k = k as usize;
            if k >= n || seen[k] {
                return Err(Error::invalid(format!(
                    "bit positions {bits:?} are not a permutation of 0..{n}"
                )));
            }
            seen[k] = true;
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() || names[..i].contains(name) {
                return Err(Error::invalid(format!("duplicate or empty qubit name {name:?}")));
            }
        }
        Ok(QubitLayout { names, bits })
    }

    /// Qubit `i` at bit position `i`.
    pub fn sequential<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let bits = (0..names.len() as u32).collect();
        Self::new(names, bits)
    }

    /// `q0 .. q{n-1}` at positions `0 .. n-1`.
    pub fn numbered(n_qubits: usize) -> Result<Self> {
        Self::sequential((0..n_qubits).map(|i| format!("q{i}")))
    }

    pub fn n_qubits(&self) -> usize {
        self.names.len()
    }

    pub fn n_bins(&self) -> usize {
        1 << self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bit(&self, qubit: usize) -> u32 {
        self.bits[qubit]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn qubit_value(&self, bin: usize, qubit: usize) -> bool {
        (bin >> self.bits[qubit]) & 1 == 1
    }

    /// Bin index holding the given per-qubit values.
    pub fn bin_of(&self, values: &[bool]) -> usize {
        values
            .iter()
            .zip(&self.bits)
            .filter(|(v, _)| **v)
            .map(|(_, &k)| 1usize << k)
            .sum()
    }
}

/// Bin index of a bit string written most-significant position first.
pub fn bin_index(bit_string: &str, n_qubits: usize) -> Result<usize> {
    if bit_string.len() != n_qubits {
        return Err(Error::invalid(format!(
            "bit string {bit_string:?} has length {}, expected {n_qubits}",
            bit_string.len()
        )));
    }
    bit_string.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::invalid(format!("bit string {bit_string:?} contains {c:?}"))),
    })
}

/// Inverse of [`bin_index`].
pub fn bit_string(bin: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|k| if (bin >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Computational basis state on the H rail. The string lists bit positions
/// from most to least significant, so `"10"` is bin 2.
pub fn basis_state(layout: &QubitLayout, bit_string: &str) -> Result<TimeBinState> {
    let bin = bin_index(bit_string, layout.n_qubits())?;
    let mut state = TimeBinState::vacuum(Frame::with_bins(layout.n_bins())?);
    state.set(bin, Polarization::H, Complex64::new(1.0, 0.0));
    Ok(state)
}

/// Basis state `bin` inside an arbitrary frame.
pub fn basis_state_in(frame: Frame, bin: usize) -> Result<TimeBinState> {
    if bin >= frame.n_bins {
        return Err(Error::invalid(format!("bin {bin} outside {}-bin frame", frame.n_bins)));
    }
    let mut state = TimeBinState::vacuum(frame);
    state.set(bin, Polarization::H, Complex64::new(1.0, 0.0));
    Ok(state)
}
