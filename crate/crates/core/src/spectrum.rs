//! Frequency-band energy via a direct discrete Fourier transform.
//!
//! Signals here are short (hundreds of frames), so the O(T^2) transform is
//! plenty and keeps the energy partition exact: low band plus high band
//! equals total energy to rounding, by Parseval's identity.

use crate::error::{Error, Result};
use crate::signal::TemporalSignal;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    /// Bins with alias-reduced frequency at or below a quarter of the rate.
    Low,
    /// Everything above a quarter of the rate, up to Nyquist.
    High,
}

/// Per-channel split of one signal's energy.
#[derive(Clone, Copy, Debug, Default)]
pub struct BandEnergy {
    pub low: f64,
    pub high: f64,
}

impl BandEnergy {
    pub fn total(&self) -> f64 {
        self.low + self.high
    }

    pub fn low_share(&self) -> f64 {
        if self.total() == 0.0 {
            0.0
        } else {
            self.low / self.total()
        }
    }
}

/// DFT power per bin for one row, normalized so the bin sum equals the
/// time-domain energy `sum x^2`.
fn bin_power(row: &[f64]) -> Vec<f64> {
    let t = row.len();
    let mut power = Vec::with_capacity(t);
    for k in 0..t {
        let mut re = 0.0;
        let mut im = 0.0;
        for (n, &v) in row.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * (k as f64) * (n as f64) / t as f64;
            re += v * phase.cos();
            im += v * phase.sin();
        }
        power.push((re * re + im * im) / t as f64);
    }
    power
}

/// True when bin `k` of a length-`t` transform belongs to the low band:
/// its distance to the nearest multiple of the rate is at most `t/4`.
fn is_low_bin(k: usize, t: usize) -> bool {
    4 * k.min(t - k) <= t
}

/// Energy split per channel, averaged over the batch dimension.
pub fn band_energies(x: &TemporalSignal) -> Result<Vec<BandEnergy>> {
    x.ensure_finite("spectrum input")?;
    let (nb, channels, t) = x.shape();
    if t < 2 {
        return Err(Error::usage("band energy needs at least two frames"));
    }
    let mut out = vec![BandEnergy::default(); channels];
    for n in 0..nb {
        for (c, acc) in out.iter_mut().enumerate() {
            for (k, p) in bin_power(x.row(n, c)).into_iter().enumerate() {
                if is_low_bin(k, t) {
                    acc.low += p;
                } else {
                    acc.high += p;
                }
            }
        }
    }
    for acc in &mut out {
        acc.low /= nb as f64;
        acc.high /= nb as f64;
    }
    Ok(out)
}

/// Summed band energy across channels.
pub fn band_energy(x: &TemporalSignal, band: Band) -> Result<f64> {
    let per_channel = band_energies(x)?;
    Ok(per_channel
        .iter()
        .map(|e| match band {
            Band::Low => e.low,
            Band::High => e.high,
        })
        .sum())
}

/// Time-domain energy `sum x^2` per channel, averaged over the batch;
/// the Parseval counterpart of `band_energies`.
pub fn time_energy(x: &TemporalSignal) -> Vec<f64> {
    let (nb, channels, _) = x.shape();
    let mut out = vec![0.0; channels];
    for n in 0..nb {
        for (c, acc) in out.iter_mut().enumerate() {
            *acc += x.row(n, c).iter().map(|v| v * v).sum::<f64>();
        }
    }
    for acc in &mut out {
        *acc /= nb as f64;
    }
    out
}
