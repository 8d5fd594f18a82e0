//! Dense `(batch, channels, time)` tensor used for signals and parameters.
//!
//! A single storage type keeps the kernel layer small. Convolution weights
//! reuse it with the layout `(out_channels, in_channels / groups, kernel)`
//! and biases with `(out_channels, 1, 1)`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TemporalSignal {
    batch: usize,
    channels: usize,
    len: usize,
    data: Vec<f64>,
}

impl TemporalSignal {
    pub fn new(batch: usize, channels: usize, len: usize, data: Vec<f64>) -> Result<Self> {
        if batch == 0 || channels == 0 || len == 0 {
            return Err(Error::shape(format!(
                "signal dimensions must be positive, got ({batch}, {channels}, {len})"
            )));
        }
        let expected = batch * channels * len;
        if data.len() != expected {
            return Err(Error::shape(format!(
                "data length {} does not match shape ({batch}, {channels}, {len}) = {expected}",
                data.len()
            )));
        }
        Ok(Self { batch, channels, len, data })
    }

    /// Single-batch signal from one row of samples per channel.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::shape("at least one channel row is required"));
        }
        let len = rows[0].len();
        if rows.iter().any(|r| r.len() != len) {
            return Err(Error::shape("channel rows must share one length"));
        }
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(1, rows.len(), len, data)
    }

    pub fn zeros(batch: usize, channels: usize, len: usize) -> Self {
        Self {
            batch,
            channels,
            len,
            data: vec![0.0; batch * channels * len],
        }
    }

    pub fn filled(batch: usize, channels: usize, len: usize, value: f64) -> Self {
        Self {
            batch,
            channels,
            len,
            data: vec![value; batch * channels * len],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self::filled(1, 1, 1, value)
    }

    pub fn from_fn(
        batch: usize,
        channels: usize,
        len: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(batch * channels * len);
        for n in 0..batch {
            for c in 0..channels {
                for t in 0..len {
                    data.push(f(n, c, t));
                }
            }
        }
        Self { batch, channels, len, data }
    }

    #[inline]
    pub fn batch(&self) -> usize {
        self.batch
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.batch, self.channels, self.len)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    #[inline]
    pub fn numel(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn index(&self, n: usize, c: usize, t: usize) -> usize {
        (n * self.channels + c) * self.len + t
    }

    #[inline]
    pub fn get(&self, n: usize, c: usize, t: usize) -> f64 {
        self.data[self.index(n, c, t)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, c: usize, t: usize, value: f64) {
        let i = self.index(n, c, t);
        self.data[i] = value;
    }

    /// Time slice for one `(batch, channel)` pair.
    #[inline]
    pub fn row(&self, n: usize, c: usize) -> &[f64] {
        let start = (n * self.channels + c) * self.len;
        &self.data[start..start + self.len]
    }

    #[inline]
    pub fn row_mut(&mut self, n: usize, c: usize) -> &mut [f64] {
        let start = (n * self.channels + c) * self.len;
        &mut self.data[start..start + self.len]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Value of a `(1, 1, 1)` signal.
    pub fn scalar_value(&self) -> f64 {
        debug_assert_eq!(self.numel(), 1, "scalar_value on non-scalar signal");
        self.data[0]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        if self.all_finite() {
            Ok(())
        } else {
            Err(Error::numeric(format!("{what} contains non-finite values")))
        }
    }
}
