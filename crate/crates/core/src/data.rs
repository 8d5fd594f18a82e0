//! Synthetic classification tasks for exercising temporal downsamplers.
//!
//! Two task families, both four-way classification over multichannel
//! sequences:
//!
//! * `band-mix`: each class is a (low-band amplitude, high-band amplitude)
//!   pair; the signal is a sum of one low-frequency and one high-frequency
//!   sinusoid with random frequencies and phases plus Gaussian noise.
//! * `spike-pattern`: a smooth low-frequency carrier with a class-specific
//!   number (and sign) of sharp single-frame spikes at jittered positions.
//!
//! Generation is fully determined by `(task, seed, size, noise_sigma)`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::TemporalSignal;

/// Number of classes in every synthetic task.
pub const NUM_CLASSES: usize = 4;
/// Default sequence length.
pub const DEFAULT_LEN: usize = 128;
/// Default channel count.
pub const DEFAULT_CHANNELS: usize = 2;
/// Default noise standard deviation.
pub const DEFAULT_NOISE: f64 = 0.3;

/// Low/high sinusoid amplitudes per band-mix class.
const BAND_AMPS: [(f64, f64); NUM_CLASSES] = [(1.2, 0.2), (1.2, 0.9), (0.4, 0.2), (0.4, 0.9)];
/// Low-band frequency range in cycles per window (inclusive low, exclusive high).
const LOW_FREQ: (f64, f64) = (3.0, 10.0);
/// High-band frequency range; stays below Nyquist for `DEFAULT_LEN`.
const HIGH_FREQ: (f64, f64) = (40.0, 56.0);

/// Nominal spike positions per spike-pattern class, before jitter.
const SPIKE_SITES: [&[usize]; NUM_CLASSES] = [
    &[32, 96],
    &[24, 64, 104],
    &[16, 48, 80, 112],
    &[24, 64, 104],
];
/// Spike amplitude per class; class 3 shares class 1 layout with flipped sign.
const SPIKE_AMPS: [f64; NUM_CLASSES] = [4.0, 4.0, 4.0, -4.0];
/// Maximum absolute per-spike position jitter in frames.
const SPIKE_JITTER: i64 = 3;
/// Carrier frequency range for the spike task, cycles per window.
const CARRIER_FREQ: (f64, f64) = (2.0, 5.0);

/// Which synthetic task family to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    BandMix,
    SpikePattern,
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "band-mix" => Ok(Self::BandMix),
            "spike-pattern" => Ok(Self::SpikePattern),
            other => Err(Error::usage(format!(
                "unknown task '{other}' (expected band-mix or spike-pattern)"
            ))),
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BandMix => "band-mix",
            Self::SpikePattern => "spike-pattern",
        })
    }
}

/// One labelled sequence. `signal` has shape `(1, channels, len)`.
#[derive(Clone, Debug)]
pub struct Sample {
    pub signal: TemporalSignal,
    pub label: usize,
    /// Ground-truth spike positions after jitter; empty for band-mix.
    pub spikes: Vec<usize>,
}

/// A generated dataset plus the settings that produced it.
#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub task: TaskKind,
    pub seed: u64,
    pub noise_sigma: f64,
    pub samples: Vec<Sample>,
}

impl SyntheticDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Channel count shared by every sample.
    pub fn channels(&self) -> usize {
        self.samples.first().map(|s| s.signal.channels()).unwrap_or(0)
    }

    /// Per-class sample counts.
    pub fn label_histogram(&self) -> [usize; NUM_CLASSES] {
        let mut hist = [0usize; NUM_CLASSES];
        for s in &self.samples {
            hist[s.label] += 1;
        }
        hist
    }

    /// Stacks samples `idx` into one `(batch, channels, len)` tensor plus labels.
    pub fn batch(&self, idx: &[usize]) -> Result<(TemporalSignal, Vec<usize>)> {
        if idx.is_empty() {
            return Err(Error::usage("empty batch"));
        }
        let first = self
            .samples
            .get(idx[0])
            .ok_or_else(|| Error::usage(format!("sample index {} out of range", idx[0])))?;
        let (c, t) = (first.signal.channels(), first.signal.len());
        let mut out = TemporalSignal::zeros(idx.len(), c, t);
        let mut labels = Vec::with_capacity(idx.len());
        for (n, &i) in idx.iter().enumerate() {
            let s = self
                .samples
                .get(i)
                .ok_or_else(|| Error::usage(format!("sample index {i} out of range")))?;
            if s.signal.channels() != c || s.signal.len() != t {
                return Err(Error::shape("inconsistent sample shapes in batch"));
            }
            for ch in 0..c {
                out.row_mut(n, ch).copy_from_slice(s.signal.row(0, ch));
            }
            labels.push(s.label);
        }
        Ok((out, labels))
    }
}

/// Standard-normal draw via Box-Muller; `u1` is shifted into `(0, 1]`.
fn gaussian(rng: &mut dyn RngCore) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn uniform(rng: &mut dyn RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Exactly balanced label sequence (first `size % NUM_CLASSES` classes get one
/// extra), shuffled in place.
fn balanced_labels(rng: &mut ChaCha8Rng, size: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..size).map(|i| i % NUM_CLASSES).collect();
    labels.shuffle(rng);
    labels
}

fn band_mix_sample(rng: &mut ChaCha8Rng, label: usize, channels: usize, len: usize, sigma: f64) -> Sample {
    let (a_lo, a_hi) = BAND_AMPS[label];
    let f_lo = uniform(rng, LOW_FREQ.0, LOW_FREQ.1);
    let f_hi = uniform(rng, HIGH_FREQ.0, HIGH_FREQ.1);
    let t_f = len as f64;
    let mut signal = TemporalSignal::zeros(1, channels, len);
    for c in 0..channels {
        let p_lo = uniform(rng, 0.0, std::f64::consts::TAU);
        let p_hi = uniform(rng, 0.0, std::f64::consts::TAU);
        let row = signal.row_mut(0, c);
        for (t, v) in row.iter_mut().enumerate() {
            let x = t as f64 / t_f;
            *v = a_lo * (std::f64::consts::TAU * f_lo * x + p_lo).sin()
                + a_hi * (std::f64::consts::TAU * f_hi * x + p_hi).sin()
                + sigma * gaussian(rng);
        }
    }
    Sample { signal, label, spikes: Vec::new() }
}

fn spike_sample(rng: &mut ChaCha8Rng, label: usize, channels: usize, len: usize, sigma: f64) -> Sample {
    let amp = SPIKE_AMPS[label];
    let f = uniform(rng, CARRIER_FREQ.0, CARRIER_FREQ.1);
    let t_f = len as f64;
    // Jittered positions are shared across channels so detail energy adds up
    // coherently when channels are summed.
    let spikes: Vec<usize> = SPIKE_SITES[label]
        .iter()
        .map(|&p| {
            let j = rng.random_range(-SPIKE_JITTER..=SPIKE_JITTER);
            (p as i64 + j).clamp(0, len as i64 - 1) as usize
        })
        .collect();
    let mut signal = TemporalSignal::zeros(1, channels, len);
    for c in 0..channels {
        let phase = uniform(rng, 0.0, std::f64::consts::TAU);
        let row = signal.row_mut(0, c);
        for (t, v) in row.iter_mut().enumerate() {
            let x = t as f64 / t_f;
            *v = (std::f64::consts::TAU * f * x + phase).sin() + sigma * gaussian(rng);
        }
        for &p in &spikes {
            row[p] += amp;
        }
    }
    Sample { signal, label, spikes }
}

/// Generates `size` samples with the default shape and noise level.
pub fn gen_dataset(task: TaskKind, seed: u64, size: usize) -> Result<SyntheticDataset> {
    gen_dataset_with_noise(task, seed, size, DEFAULT_NOISE)
}

/// Generates `size` samples of `task` with noise level `sigma`. Labels are
/// exactly balanced (up to remainder) and the byte-identical dataset is
/// reproduced by the same `(task, seed, size, sigma)`.
pub fn gen_dataset_with_noise(
    task: TaskKind,
    seed: u64,
    size: usize,
    sigma: f64,
) -> Result<SyntheticDataset> {
    if size == 0 {
        return Err(Error::usage("dataset size must be positive"));
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::config(format!("noise sigma must be finite and >= 0, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = balanced_labels(&mut rng, size);
    let samples = labels
        .into_iter()
        .map(|label| match task {
            TaskKind::BandMix => band_mix_sample(&mut rng, label, DEFAULT_CHANNELS, DEFAULT_LEN, sigma),
            TaskKind::SpikePattern => spike_sample(&mut rng, label, DEFAULT_CHANNELS, DEFAULT_LEN, sigma),
        })
        .collect();
    Ok(SyntheticDataset { task, seed, noise_sigma: sigma, samples })
}

/// Train/dev/test datasets drawn from disjoint streams of one base seed.
#[derive(Clone, Debug)]
pub struct DataSplits {
    pub train: SyntheticDataset,
    pub dev: SyntheticDataset,
    pub test: SyntheticDataset,
}

/// Default split sizes.
pub const DEFAULT_SPLIT: (usize, usize, usize) = (800, 200, 200);

/// Derives one sub-seed per split so the three sets never share draws.
fn split_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(tag)
}

pub fn gen_splits(
    task: TaskKind,
    seed: u64,
    sizes: (usize, usize, usize),
    sigma: f64,
) -> Result<DataSplits> {
    Ok(DataSplits {
        train: gen_dataset_with_noise(task, split_seed(seed, 0), sizes.0, sigma)?,
        dev: gen_dataset_with_noise(task, split_seed(seed, 1), sizes.1, sigma)?,
        test: gen_dataset_with_noise(task, split_seed(seed, 2), sizes.2, sigma)?,
    })
}

/// Classifies a band-mix sample from its exact band energies. On noise-free
/// data this recovers the label every time; it is the ceiling a learned
/// model is compared against.
pub fn band_mix_oracle(signal: &TemporalSignal) -> Result<usize> {
    let low = crate::spectrum::band_energy(signal, crate::spectrum::Band::Low)?;
    let high = crate::spectrum::band_energy(signal, crate::spectrum::Band::High)?;
    let t = signal.len() as f64;
    let c = signal.channels() as f64;
    // A pure sinusoid of amplitude A carries time-domain energy A^2 T / 2 per
    // channel, so invert that to estimate the per-band amplitude.
    let amp = |e: f64| (2.0 * e / (t * c)).sqrt();
    let low_big = amp(low) > 0.8;
    let high_big = amp(high) > 0.55;
    Ok(match (low_big, high_big) {
        (true, false) => 0,
        (true, true) => 1,
        (false, false) => 2,
        (false, true) => 3,
    })
}
