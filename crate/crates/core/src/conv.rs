//! Grouped 1-d convolution (cross-correlation) with zero padding that
//! preserves the input length.
//!
//! Weights have layout `(out_channels, in_channels / groups, kernel)` and the
//! output position `t` reads inputs `t + j - kernel / 2` for tap `j`, so taps
//! slide left-to-right over the signal without flipping.

use rand::Rng;

use crate::error::{Error, Result};
use crate::signal::TemporalSignal;
use crate::tape::{BackwardCtx, Tape, TapeOp, ValueId};

/// Weight and bias tensors for one convolution layer.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvParams {
    pub weight: TemporalSignal,
    pub bias: TemporalSignal,
    pub groups: usize,
}

impl ConvParams {
    /// Uniform init in `±1/sqrt(fan_in)` with `fan_in = (in/groups) * kernel`.
    pub fn init<R: Rng>(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        groups: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut p = Self::zeros(in_channels, out_channels, kernel, groups)?;
        let fan_in = (in_channels / groups) * kernel;
        let bound = 1.0 / (fan_in as f64).sqrt();
        for v in p.weight.data_mut() {
            *v = rng.random_range(-bound..bound);
        }
        for v in p.bias.data_mut() {
            *v = rng.random_range(-bound..bound);
        }
        Ok(p)
    }

    pub fn zeros(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        groups: usize,
    ) -> Result<Self> {
        if groups == 0 {
            return Err(Error::config("groups must be positive"));
        }
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::config("channel counts must be positive"));
        }
        if in_channels % groups != 0 || out_channels % groups != 0 {
            return Err(Error::config(format!(
                "groups {groups} must divide in_channels {in_channels} and out_channels {out_channels}"
            )));
        }
        if kernel == 0 {
            return Err(Error::config("kernel must be positive"));
        }
        Ok(Self {
            weight: TemporalSignal::zeros(out_channels, in_channels / groups, kernel),
            bias: TemporalSignal::zeros(out_channels, 1, 1),
            groups,
        })
    }

    pub fn out_channels(&self) -> usize {
        self.weight.batch()
    }

    pub fn in_channels(&self) -> usize {
        self.weight.channels() * self.groups
    }

    pub fn kernel(&self) -> usize {
        self.weight.len()
    }
}

struct Conv1dOp {
    x: ValueId,
    w: ValueId,
    b: ValueId,
    out: ValueId,
    groups: usize,
}

fn conv_dims(
    x: &TemporalSignal,
    w: &TemporalSignal,
    b: &TemporalSignal,
    groups: usize,
) -> Result<(usize, usize, usize)> {
    if groups == 0 {
        return Err(Error::config("groups must be positive"));
    }
    let (c_out, c_in_per_g, k) = w.shape();
    let c_in = x.channels();
    if c_in % groups != 0 || c_out % groups != 0 {
        return Err(Error::shape(format!(
            "groups {groups} must divide in_channels {c_in} and out_channels {c_out}"
        )));
    }
    if c_in_per_g != c_in / groups {
        return Err(Error::shape(format!(
            "weight expects {c_in_per_g} channels per group, input supplies {}",
            c_in / groups
        )));
    }
    if b.shape() != (c_out, 1, 1) {
        return Err(Error::shape(format!(
            "bias shape {:?} does not match out_channels {c_out}",
            b.shape()
        )));
    }
    let t = x.len();
    if k > 2 * t + 1 {
        return Err(Error::config(format!(
            "kernel {k} exceeds 2*len+1 = {} and would only see padding",
            2 * t + 1
        )));
    }
    Ok((c_out, c_in / groups, k))
}

fn conv_forward(
    x: &TemporalSignal,
    w: &TemporalSignal,
    b: &TemporalSignal,
    groups: usize,
) -> Result<TemporalSignal> {
    let (c_out, c_in_per_g, k) = conv_dims(x, w, b, groups)?;
    let (n_batch, _, t_len) = x.shape();
    let off = (k / 2) as isize;
    let out_per_g = c_out / groups;
    let mut out = TemporalSignal::zeros(n_batch, c_out, t_len);
    for n in 0..n_batch {
        for co in 0..c_out {
            let g = co / out_per_g;
            let bias = b.get(co, 0, 0);
            let y = out.row_mut(n, co);
            y.fill(bias);
            for ci_rel in 0..c_in_per_g {
                let xr = x.row(n, g * c_in_per_g + ci_rel);
                let wr = w.row(co, ci_rel);
                for (j, &wj) in wr.iter().enumerate() {
                    if wj == 0.0 {
                        continue;
                    }
                    let shift = j as isize - off;
                    let t0 = (-shift).max(0) as usize;
                    let t1 = ((t_len as isize - shift).min(t_len as isize)).max(0) as usize;
                    for t in t0..t1 {
                        y[t] += wj * xr[(t as isize + shift) as usize];
                    }
                }
            }
        }
    }
    Ok(out)
}

impl TapeOp for Conv1dOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let mut gw = ctx.take_grad(self.w);
        let mut gb = ctx.take_grad(self.b);
        let (n_batch, c_out, t_len) = ctx.value(self.out).shape();
        let w = ctx.value(self.w);
        let (_, c_in_per_g, k) = w.shape();
        let out_per_g = c_out / self.groups;
        let off = (k / 2) as isize;
        let x = ctx.value(self.x);
        for n in 0..n_batch {
            for co in 0..c_out {
                let g = co / out_per_g;
                let gy = &g_out[(n * c_out + co) * t_len..(n * c_out + co + 1) * t_len];
                gb[co] += gy.iter().sum::<f64>();
                for ci_rel in 0..c_in_per_g {
                    let ci = g * c_in_per_g + ci_rel;
                    let xr = x.row(n, ci);
                    let gx_row = &mut gx[(n * x.channels() + ci) * t_len..];
                    let wr = w.row(co, ci_rel);
                    let gw_row = &mut gw[(co * c_in_per_g + ci_rel) * k..(co * c_in_per_g + ci_rel + 1) * k];
                    for j in 0..k {
                        let shift = j as isize - off;
                        let t0 = (-shift).max(0) as usize;
                        let t1 = ((t_len as isize - shift).min(t_len as isize)).max(0) as usize;
                        let wj = wr[j];
                        let mut acc = 0.0;
                        for t in t0..t1 {
                            let xi = (t as isize + shift) as usize;
                            acc += gy[t] * xr[xi];
                            gx_row[xi] += wj * gy[t];
                        }
                        gw_row[j] += acc;
                    }
                }
            }
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.w, gw);
        ctx.restore_grad(self.b, gb);
        ctx.restore_grad(self.out, g_out);
    }
}

impl Tape {
    /// Length-preserving grouped convolution: output `t` accumulates
    /// `bias + sum_j w[j] * x[t + j - k/2]` with zeros outside the signal.
    pub fn conv1d(&mut self, x: ValueId, w: ValueId, b: ValueId, groups: usize) -> Result<ValueId> {
        let out = conv_forward(self.value(x), self.value(w), self.value(b), groups)?;
        Ok(self.push_op(out, |out| Box::new(Conv1dOp { x, w, b, out, groups })))
    }

    /// Binds `params` as leaves and applies them in one call.
    pub fn conv1d_with(&mut self, x: ValueId, params: &ConvParams) -> Result<ValueId> {
        let w = self.leaf(params.weight.clone())?;
        let b = self.leaf(params.bias.clone())?;
        self.conv1d(x, w, b, params.groups)
    }
}
