//! Flat `key = value` run configuration.
//!
//! Every key is optional on input; serialization always writes all keys in
//! a fixed order with shortest round-trip float formatting, so
//! serialize → parse → serialize is byte-identical.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::detection::{DetectorModel, WavePacket, COHERENCE_TIME_NS};
use crate::error::{Error, Result};
use crate::primitives::LossTable;
use crate::state::{Frame, DEFAULT_BIN_WIDTH_NS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeModel {
    Uniform,
    WavePacket {
        coherence_time: f64,
        /// `None` centers the envelope on the frame.
        center: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` sizes the frame to the circuit register.
    pub n_bins: Option<usize>,
    pub bin_width: f64,
    pub loss: LossTable,
    pub loss_on: bool,
    pub amplitudes: AmplitudeModel,
    pub detector: DetectorModel,
    pub shots: u64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_bins: None,
            bin_width: DEFAULT_BIN_WIDTH_NS,
            loss: LossTable::default(),
            loss_on: false,
            amplitudes: AmplitudeModel::Uniform,
            detector: DetectorModel::telecom_spd(),
            shots: 0,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<()> {
        if let Some(n) = self.n_bins {
            Frame::new(n, self.bin_width)?;
        } else if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(Error::invalid(format!("bin width {} must be positive", self.bin_width)));
        }
        let l = &self.loss;
        for (name, db) in [
            ("loss.phase_db", l.phase_db),
            ("loss.pol_rotate_db", l.pol_rotate_db),
            ("loss.delay_db", l.delay_db),
            ("loss.attenuate_db", l.attenuate_db),
        ] {
            if !(db.is_finite() && db >= 0.0) {
                return Err(Error::invalid(format!("{name} = {db} must be a finite non-negative dB value")));
            }
        }
        if let AmplitudeModel::WavePacket { coherence_time, center } = self.amplitudes {
            WavePacket::new(coherence_time, center.unwrap_or(0.0))?;
        }
        self.detector.check()
    }

    /// Frame for a register of `register_bins` bins. An explicit size below
    /// the register is allowed; the compiler rejects gates that leave it.
    pub fn frame(&self, register_bins: usize) -> Result<Frame> {
        Frame::new(self.n_bins.unwrap_or(register_bins), self.bin_width)
    }

    pub fn wave_packet(&self, frame: Frame) -> Result<Option<WavePacket>> {
        match self.amplitudes {
            AmplitudeModel::Uniform => Ok(None),
            AmplitudeModel::WavePacket { coherence_time, center: None } => {
                WavePacket::centered(coherence_time, frame).map(Some)
            }
            AmplitudeModel::WavePacket {
                coherence_time,
                center: Some(c),
            } => WavePacket::new(coherence_time, c).map(Some),
        }
    }

    /// Loss table actually applied: the configured one, or all zeros.
    pub fn effective_loss(&self) -> LossTable {
        if self.loss_on {
            self.loss
        } else {
            LossTable::lossless()
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n_bins", self.n_bins.map_or("auto".into(), |n| n.to_string()));
        kv("bin_width_ns", self.bin_width.to_string());
        kv("loss.phase_db", self.loss.phase_db.to_string());
        kv("loss.pol_rotate_db", self.loss.pol_rotate_db.to_string());
        kv("loss.delay_db", self.loss.delay_db.to_string());
        kv("loss.attenuate_db", self.loss.attenuate_db.to_string());
        kv("loss_on", self.loss_on.to_string());
        let (kind, coherence, center) = match self.amplitudes {
            AmplitudeModel::Uniform => ("uniform", COHERENCE_TIME_NS, None),
            AmplitudeModel::WavePacket { coherence_time, center } => ("wavepacket", coherence_time, center),
        };
        kv("amplitudes", kind.into());
        kv("wavepacket.coherence_ns", coherence.to_string());
        kv("wavepacket.center_ns", center.map_or("auto".into(), |c| c.to_string()));
        kv("detector.efficiency", self.detector.efficiency.to_string());
        kv("detector.jitter_ns", self.detector.jitter_sigma.to_string());
        kv("detector.resolution_ns", self.detector.time_resolution.to_string());
        kv("detector.dark_rate_hz", self.detector.dark_rate.to_string());
        kv("shots", self.shots.to_string());
        kv("seed", self.seed.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        s
    }

    /// Parses the config text; keys not present keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut kind = "uniform".to_string();
        let mut coherence = COHERENCE_TIME_NS;
        let mut center = None;
        let mut seen = std::collections::BTreeSet::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| Error::Parse { line, message };
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, got {content:?}")))?;
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key {key}")));
            }
            let float = || value.parse::<f64>().map_err(|_| err(format!("{key}: bad number {value:?}")));
            let int = || value.parse::<u64>().map_err(|_| err(format!("{key}: bad integer {value:?}")));
            match key {
                "n_bins" => {
                    cfg.n_bins = match value {
                        "auto" => None,
                        _ => Some(int()? as usize),
                    }
                }
                "bin_width_ns" => cfg.bin_width = float()?,
                "loss.phase_db" => cfg.loss.phase_db = float()?,
                "loss.pol_rotate_db" => cfg.loss.pol_rotate_db = float()?,
                "loss.delay_db" => cfg.loss.delay_db = float()?,
                "loss.attenuate_db" => cfg.loss.attenuate_db = float()?,
                "loss_on" => {
                    cfg.loss_on = value
                        .parse()
                        .map_err(|_| err(format!("loss_on: expected true or false, got {value:?}")))?
                }
                "amplitudes" => match value {
                    "uniform" | "wavepacket" => kind = value.to_string(),
                    _ => return Err(err(format!("amplitudes: expected uniform or wavepacket, got {value:?}"))),
                },
                "wavepacket.coherence_ns" => coherence = float()?,
                "wavepacket.center_ns" => {
                    center = match value {
                        "auto" => None,
                        _ => Some(float()?),
                    }
                }
                "detector.efficiency" => cfg.detector.efficiency = float()?,
                "detector.jitter_ns" => cfg.detector.jitter_sigma = float()?,
                "detector.resolution_ns" => cfg.detector.time_resolution = float()?,
                "detector.dark_rate_hz" => cfg.detector.dark_rate = float()?,
                "shots" => cfg.shots = int()?,
                "seed" => cfg.seed = int()?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                _ => return Err(err(format!("unknown key {key}"))),
            }
        }
        cfg.amplitudes = if kind == "wavepacket" {
            AmplitudeModel::WavePacket {
                coherence_time: coherence,
                center,
            }
        } else {
            AmplitudeModel::Uniform
        };
        cfg.check()?;
        Ok(cfg)
    }
}
