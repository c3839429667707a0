//! Photon wave-packet shaping and a time-tagging detector Monte-Carlo.

use std::io::{self, Write};

use num_complex::Complex64;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{probabilities, Frame, Polarization, TimeBinState};

/// 1/e² coherence time of the heralded photon, ns.
pub const COHERENCE_TIME_NS: f64 = 148.0;

/// Minimum share of the envelope a frame must capture.
pub const MIN_COVERAGE: f64 = 0.99;

/// Shots handled by one independently seeded random stream.
const CHUNK_SHOTS: u64 = 1 << 16;

/// Double-exponential intensity envelope `I(t) ∝ exp(−4|t − t₀| / T)`,
/// whose 1/e² full width is `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacket {
    pub coherence_time: f64,
    pub center: f64,
}

impl WavePacket {
    pub fn new(coherence_time: f64, center: f64) -> Result<Self> {
        if !(coherence_time.is_finite() && coherence_time > 0.0) {
            return Err(Error::invalid(format!("coherence time must be positive, got {coherence_time}")));
        }
        if !center.is_finite() {
            return Err(Error::invalid("wave packet center must be finite"));
        }
        Ok(WavePacket { coherence_time, center })
    }

    /// Envelope peaked at the middle of the frame.
    pub fn centered(coherence_time: f64, frame: Frame) -> Result<Self> {
        Self::new(coherence_time, frame.duration() / 2.0)
    }

    fn rate(&self) -> f64 {
        4.0 / self.coherence_time
    }

    /// Normalized intensity at `t` (ns⁻¹).
    pub fn intensity(&self, t: f64) -> f64 {
        0.5 * self.rate() * (-self.rate() * (t - self.center).abs()).exp()
    }

    /// Probability that the photon arrives before `t`.
    pub fn cumulative(&self, t: f64) -> f64 {
        let x = self.rate() * (t - self.center);
        if x < 0.0 {
            0.5 * x.exp()
        } else {
            1.0 - 0.5 * (-x).exp()
        }
    }

    /// Share of the photon inside `[start, end)`.
    pub fn weight(&self, start: f64, end: f64) -> f64 {
        (self.cumulative(end) - self.cumulative(start)).max(0.0)
    }
}

fn bin_weights(wp: &WavePacket, frame: Frame) -> Vec<f64> {
    let edges = frame.bin_edges();
    edges.windows(2).map(|e| wp.weight(e[0], e[1])).collect()
}

/// Photon state whose bin amplitudes follow the envelope, renormalized over
/// the frame. Fails if the frame captures less than 99% of the envelope.
pub fn shaped_state(wp: &WavePacket, frame: Frame) -> Result<TimeBinState> {
    let coverage: f64 = bin_weights(wp, frame).iter().sum();
    if coverage < MIN_COVERAGE {
        return Err(Error::invalid(format!(
            "frame of {} ns captures {:.2}% of the wave packet (< {}%)",
            frame.duration(),
            100.0 * coverage,
            100.0 * MIN_COVERAGE
        )));
    }
    shaped_state_partial(wp, frame)
}

/// As [`shaped_state`] without the coverage requirement.
pub fn shaped_state_partial(wp: &WavePacket, frame: Frame) -> Result<TimeBinState> {
    let weights = bin_weights(wp, frame);
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("wave packet misses the frame entirely"));
    }
    let amps: Vec<Complex64> = weights
        .iter()
        .map(|w| Complex64::new((w / total).sqrt(), 0.0))
        .collect();
    TimeBinState::from_amplitudes(frame, Polarization::H, &amps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    /// Gaussian timing jitter, ns.
    pub jitter_sigma: f64,
    /// Time-tagger quantization step, ns.
    pub time_resolution: f64,
    /// Dark counts per second.
    pub dark_rate: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64, jitter_sigma: f64, time_resolution: f64, dark_rate: f64) -> Result<Self> {
        let d = DetectorModel {
            efficiency,
            jitter_sigma,
            time_resolution,
            dark_rate,
        };
        d.check()?;
        Ok(d)
    }

    /// 15% efficient detector with 150 ps jitter read by a 100 ps digitizer.
    pub fn telecom_spd() -> Self {
        DetectorModel {
            efficiency: 0.15,
            jitter_sigma: 0.150,
            time_resolution: 0.100,
            dark_rate: 0.0,
        }
    }

    pub fn ideal() -> Self {
        DetectorModel {
            efficiency: 1.0,
            jitter_sigma: 0.0,
            time_resolution: 0.001,
            dark_rate: 0.0,
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::invalid(format!("efficiency {} outside [0, 1]", self.efficiency)));
        }
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return Err(Error::invalid("jitter must be non-negative"));
        }
        if !(self.time_resolution.is_finite() && self.time_resolution > 0.0) {
            return Err(Error::invalid("time resolution must be positive"));
        }
        if !(self.dark_rate.is_finite() && self.dark_rate >= 0.0) {
            return Err(Error::invalid("dark rate must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub shot: u64,
    pub detected: bool,
    /// Quantized arrival time within the frame, ns.
    pub arrival_ns: Option<f64>,
    pub bin: Option<usize>,
}

struct Sampler {
    frame: Frame,
    detector: DetectorModel,
    p_photon: f64,
    p_dark: f64,
    bins: Option<WeightedIndex<f64>>,
}

impl Sampler {
    fn new(state: &TimeBinState, detector: DetectorModel) -> Result<Self> {
        detector.check()?;
        let frame = state.frame();
        let norm = state.norm_sqr().min(1.0);
        let bins = if norm > 0.0 {
            Some(WeightedIndex::new(probabilities(state)).map_err(|e| Error::invalid(e.to_string()))?)
        } else {
            None
        };
        let p_dark = -(-detector.dark_rate * frame.duration() * 1e-9).exp_m1();
        Ok(Sampler {
            frame,
            detector,
            p_photon: norm * detector.efficiency,
            p_dark,
            bins,
        })
    }

    fn shot(&self, shot: u64, rng: &mut ChaCha8Rng) -> EventRecord {
        let mut arrival: Option<f64> = None;
        if rng.random::<f64>() < self.p_photon {
            if let Some(bins) = &self.bins {
                let b = bins.sample(rng);
                let jitter: f64 = rng.sample(StandardNormal);
                arrival = Some(self.frame.bin_center(b) + self.detector.jitter_sigma * jitter);
            }
        }
        if self.p_dark > 0.0 && rng.random::<f64>() < self.p_dark {
            let t = rng.random::<f64>() * self.frame.duration();
            arrival = Some(arrival.map_or(t, |a| a.min(t)));
        }
        match arrival {
            None => EventRecord {
                shot,
                detected: false,
                arrival_ns: None,
                bin: None,
            },
            Some(t) => {
                let res = self.detector.time_resolution;
                let end = self.frame.duration();
                let mut q = (t / res).round() * res;
                if q < 0.0 {
                    q = 0.0;
                }
                if q >= end {
                    q = end - res.min(self.frame.bin_width) / 2.0;
                }
                let bin = ((q / self.frame.bin_width) as usize).min(self.frame.n_bins - 1);
                EventRecord {
                    shot,
                    detected: true,
                    arrival_ns: Some(q),
                    bin: Some(bin),
                }
            }
        }
    }
}

/// Simulates `shots` heralded photons hitting the detector.
///
/// Shots are processed in fixed-size chunks, each on its own ChaCha stream
/// derived from `seed`, so the result is identical whatever the thread
/// count. Records come back in shot order.
pub fn sample_events(
    state: &TimeBinState,
    detector: &DetectorModel,
    shots: u64,
    seed: u64,
) -> Result<Vec<EventRecord>> {
    if shots == 0 {
        return Err(Error::invalid("need at least one shot"));
    }
    let sampler = Sampler::new(state, *detector)?;
    let n_chunks = shots.div_ceil(CHUNK_SHOTS);
    let chunks: Vec<Vec<EventRecord>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let start = chunk * CHUNK_SHOTS;
            let end = (start + CHUNK_SHOTS).min(shots);
            (start..end).map(|s| sampler.shot(s, &mut rng)).collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Counts detected arrivals per interval `[edges[i], edges[i+1])`; the last
/// interval also includes its right edge.
pub fn histogram(events: &[EventRecord], edges: &[f64]) -> Result<Vec<u64>> {
    if edges.len() < 2 {
        return Err(Error::invalid("histogram needs at least two edges"));
    }
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("histogram edges must be strictly increasing"));
    }
    let mut counts = vec![0u64; edges.len() - 1];
    let last = *edges.last().unwrap();
    for t in events.iter().filter_map(|e| e.arrival_ns.filter(|_| e.detected)) {
        if t < edges[0] || t > last {
            continue;
        }
        let i = edges.partition_point(|&e| e <= t).min(counts.len());
        counts[i.saturating_sub(1)] += 1;
    }
    Ok(counts)
}

/// `½ Σ |p − q|`
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Counts rescaled to sum to one (all zeros stay zero).
pub fn normalize_counts(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

pub fn write_events_csv<W: Write>(mut w: W, events: &[EventRecord]) -> io::Result<()> {
    writeln!(w, "shot,detected,arrival_ns,bin")?;
    for e in events {
        match (e.arrival_ns, e.bin) {
            (Some(t), Some(b)) if e.detected => writeln!(w, "{},1,{t},{b}", e.shot)?,
            _ => writeln!(w, "{},0,,", e.shot)?,
        }
    }
    Ok(())
}

pub fn write_histogram_csv<W: Write>(mut w: W, edges: &[f64], counts: &[u64]) -> io::Result<()> {
    writeln!(w, "bin_start_ns,bin_end_ns,count")?;
    for (e, c) in edges.windows(2).zip(counts) {
        writeln!(w, "{},{},{c}", e[0], e[1])?;
    }
    Ok(())
}
