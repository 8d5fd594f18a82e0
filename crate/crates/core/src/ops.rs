//! Differentiable building blocks besides convolution: activations,
//! normalization, elementwise arithmetic, structural reshaping along time,
//! reductions, and the classification loss.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::signal::TemporalSignal;
use crate::tape::{BackwardCtx, Tape, TapeOp, ValueId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::config(format!("unknown activation '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// Statistics per `(batch, channel)` over time.
    Instance,
    /// Statistics per channel over `(batch, time)`.
    Batch,
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "instance" => Ok(NormKind::Instance),
            "batch" => Ok(NormKind::Batch),
            other => Err(Error::config(format!("unknown normalization '{other}'"))),
        }
    }
}

struct ActivationOp {
    kind: Activation,
    x: ValueId,
    out: ValueId,
}

impl TapeOp for ActivationOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let x = ctx.value(self.x);
        let y = ctx.value(self.out);
        match self.kind {
            Activation::Relu => {
                for ((g, &xv), go) in gx.iter_mut().zip(x.data()).zip(&g_out) {
                    if xv > 0.0 {
                        *g += go;
                    }
                }
            }
            Activation::Tanh => {
                for ((g, &yv), go) in gx.iter_mut().zip(y.data()).zip(&g_out) {
                    *g += go * (1.0 - yv * yv);
                }
            }
            Activation::Sigmoid => {
                for ((g, &yv), go) in gx.iter_mut().zip(y.data()).zip(&g_out) {
                    *g += go * yv * (1.0 - yv);
                }
            }
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

struct NormOp {
    kind: NormKind,
    x: ValueId,
    gamma: ValueId,
    beta: ValueId,
    out: ValueId,
    /// Saved statistics per normalization group, in group order.
    mean: Vec<f64>,
    inv_std: Vec<f64>,
}

struct AddOp {
    a: ValueId,
    b: ValueId,
    out: ValueId,
}

impl TapeOp for AddOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        for id in [self.a, self.b] {
            let mut g = ctx.take_grad(id);
            for (gi, go) in g.iter_mut().zip(&g_out) {
                *gi += go;
            }
            ctx.restore_grad(id, g);
        }
        ctx.restore_grad(self.out, g_out);
    }
}

struct SubOp {
    a: ValueId,
    b: ValueId,
    out: ValueId,
}

impl TapeOp for SubOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut ga = ctx.take_grad(self.a);
        for (gi, go) in ga.iter_mut().zip(&g_out) {
            *gi += go;
        }
        ctx.restore_grad(self.a, ga);
        let mut gb = ctx.take_grad(self.b);
        for (gi, go) in gb.iter_mut().zip(&g_out) {
            *gi -= go;
        }
        ctx.restore_grad(self.b, gb);
        ctx.restore_grad(self.out, g_out);
    }
}

struct MulOp {
    a: ValueId,
    b: ValueId,
    out: ValueId,
}

impl TapeOp for MulOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut ga = ctx.take_grad(self.a);
        {
            let b = ctx.value(self.b);
            for ((gi, &bv), go) in ga.iter_mut().zip(b.data()).zip(&g_out) {
                *gi += go * bv;
            }
        }
        ctx.restore_grad(self.a, ga);
        let mut gb = ctx.take_grad(self.b);
        {
            let a = ctx.value(self.a);
            for ((gi, &av), go) in gb.iter_mut().zip(a.data()).zip(&g_out) {
                *gi += go * av;
            }
        }
        ctx.restore_grad(self.b, gb);
        ctx.restore_grad(self.out, g_out);
    }
}

struct ScaleOp {
    x: ValueId,
    factor: f64,
    out: ValueId,
}

impl TapeOp for ScaleOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        for (gi, go) in gx.iter_mut().zip(&g_out) {
            *gi += go * self.factor;
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

/// `x + constant`; gradient passes through unchanged.
struct OffsetOp {
    x: ValueId,
    out: ValueId,
}

impl TapeOp for OffsetOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        for (gi, go) in gx.iter_mut().zip(&g_out) {
            *gi += go;
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

/// Keeps every second sample starting at `offset`; input length must be even.
struct StrideSampleOp {
    x: ValueId,
    offset: usize,
    out: ValueId,
}

impl TapeOp for StrideSampleOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let (n_batch, channels, t_out) = ctx.value(self.out).shape();
        let t_in = ctx.value(self.x).len();
        for nc in 0..n_batch * channels {
            let gy = &g_out[nc * t_out..(nc + 1) * t_out];
            let gxr = &mut gx[nc * t_in..(nc + 1) * t_in];
            for (u, go) in gy.iter().enumerate() {
                gxr[2 * u + self.offset] += go;
            }
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

/// Merges two half-rate streams: `first` fills positions `2u`, `second`
/// positions `2u + 1`.
struct Interleave2Op {
    first: ValueId,
    second: ValueId,
    out: ValueId,
}

impl TapeOp for Interleave2Op {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let (n_batch, channels, t_half) = ctx.value(self.first).shape();
        for (which, id) in [self.first, self.second].into_iter().enumerate() {
            let mut g = ctx.take_grad(id);
            for nc in 0..n_batch * channels {
                let gr = &mut g[nc * t_half..(nc + 1) * t_half];
                let gy = &g_out[nc * 2 * t_half..(nc + 1) * 2 * t_half];
                for u in 0..t_half {
                    gr[u] += gy[2 * u + which];
                }
            }
            ctx.restore_grad(id, g);
        }
        ctx.restore_grad(self.out, g_out);
    }
}

/// Appends a copy of the final frame; used to make odd lengths even.
struct ReplicatePadOp {
    x: ValueId,
    out: ValueId,
}

impl TapeOp for ReplicatePadOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let (n_batch, channels, t_in) = ctx.value(self.x).shape();
        let t_out = t_in + 1;
        for nc in 0..n_batch * channels {
            let gy = &g_out[nc * t_out..(nc + 1) * t_out];
            let gxr = &mut gx[nc * t_in..(nc + 1) * t_in];
            for t in 0..t_in {
                gxr[t] += gy[t];
            }
            gxr[t_in - 1] += gy[t_in];
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

struct ConcatChannelsOp {
    a: ValueId,
    b: ValueId,
    out: ValueId,
}

impl TapeOp for ConcatChannelsOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let (n_batch, c_a, t_len) = ctx.value(self.a).shape();
        let c_b = ctx.value(self.b).channels();
        let c_out = c_a + c_b;
        let mut ga = ctx.take_grad(self.a);
        let mut gb = ctx.take_grad(self.b);
        for n in 0..n_batch {
            let gy = &g_out[n * c_out * t_len..(n + 1) * c_out * t_len];
            for (gi, go) in ga[n * c_a * t_len..(n + 1) * c_a * t_len]
                .iter_mut()
                .zip(&gy[..c_a * t_len])
            {
                *gi += go;
            }
            for (gi, go) in gb[n * c_b * t_len..(n + 1) * c_b * t_len]
                .iter_mut()
                .zip(&gy[c_a * t_len..])
            {
                *gi += go;
            }
        }
        ctx.restore_grad(self.a, ga);
        ctx.restore_grad(self.b, gb);
        ctx.restore_grad(self.out, g_out);
    }
}

struct GlobalAvgTimeOp {
    x: ValueId,
    out: ValueId,
}

impl TapeOp for GlobalAvgTimeOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let (n_batch, channels, t_len) = ctx.value(self.x).shape();
        let inv = 1.0 / t_len as f64;
        for nc in 0..n_batch * channels {
            let go = g_out[nc] * inv;
            for gi in &mut gx[nc * t_len..(nc + 1) * t_len] {
                *gi += go;
            }
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

struct MeanSqOp {
    x: ValueId,
    out: ValueId,
}

impl TapeOp for MeanSqOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let x = ctx.value(self.x);
        let scale = g_out[0] * 2.0 / x.numel() as f64;
        for (gi, &xv) in gx.iter_mut().zip(x.data()) {
            *gi += scale * xv;
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

struct CrossEntropyOp {
    logits: ValueId,
    labels: Vec<usize>,
    /// Softmax probabilities saved from the forward pass, `(batch, classes)`.
    probs: Vec<f64>,
    out: ValueId,
}

impl TapeOp for CrossEntropyOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gl = ctx.take_grad(self.logits);
        let classes = ctx.value(self.logits).channels();
        let scale = g_out[0] / self.labels.len() as f64;
        for (n, &label) in self.labels.iter().enumerate() {
            for k in 0..classes {
                let indicator = if k == label { 1.0 } else { 0.0 };
                gl[n * classes + k] += scale * (self.probs[n * classes + k] - indicator);
            }
        }
        ctx.restore_grad(self.logits, gl);
        ctx.restore_grad(self.out, g_out);
    }
}

impl TapeOp for NormOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let mut gg = ctx.take_grad(self.gamma);
        let mut gb = ctx.take_grad(self.beta);
        let x = ctx.value(self.x);
        let gamma = ctx.value(self.gamma);
        let (n_batch, channels, t_len) = x.shape();
        match self.kind {
            NormKind::Instance => {
                for n in 0..n_batch {
                    for c in 0..channels {
                        let g_idx = n * channels + c;
                        let start = g_idx * t_len;
                        norm_group_backward(
                            &x.data()[start..start + t_len],
                            &g_out[start..start + t_len],
                            &mut gx[start..start + t_len],
                            self.mean[g_idx],
                            self.inv_std[g_idx],
                            gamma.data()[c],
                            &mut gg[c],
                            &mut gb[c],
                        );
                    }
                }
            }
            NormKind::Batch => {
                // Gather each channel's strided group into scratch rows.
                let group = n_batch * t_len;
                let mut xs = vec![0.0; group];
                let mut gs = vec![0.0; group];
                let mut gxs = vec![0.0; group];
                for c in 0..channels {
                    for n in 0..n_batch {
                        let start = (n * channels + c) * t_len;
                        xs[n * t_len..(n + 1) * t_len]
                            .copy_from_slice(&x.data()[start..start + t_len]);
                        gs[n * t_len..(n + 1) * t_len]
                            .copy_from_slice(&g_out[start..start + t_len]);
                    }
                    gxs.fill(0.0);
                    norm_group_backward(
                        &xs,
                        &gs,
                        &mut gxs,
                        self.mean[c],
                        self.inv_std[c],
                        gamma.data()[c],
                        &mut gg[c],
                        &mut gb[c],
                    );
                    for n in 0..n_batch {
                        let start = (n * channels + c) * t_len;
                        for (gi, s) in gx[start..start + t_len]
                            .iter_mut()
                            .zip(&gxs[n * t_len..(n + 1) * t_len])
                        {
                            *gi += s;
                        }
                    }
                }
            }
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.gamma, gg);
        ctx.restore_grad(self.beta, gb);
        ctx.restore_grad(self.out, g_out);
    }
}

/// Backward for one normalization group with saved statistics:
/// `dx = gamma * inv_std * (g - mean(g) - xhat * mean(g * xhat))`.
#[allow(clippy::too_many_arguments)]
fn norm_group_backward(
    xs: &[f64],
    g_out: &[f64],
    gx: &mut [f64],
    mean: f64,
    inv_std: f64,
    gamma: f64,
    g_gamma: &mut f64,
    g_beta: &mut f64,
) {
    let m = xs.len() as f64;
    let mut sum_g = 0.0;
    let mut sum_gx = 0.0;
    for (&g, &xv) in g_out.iter().zip(xs) {
        let xhat = (xv - mean) * inv_std;
        sum_g += g;
        sum_gx += g * xhat;
    }
    *g_beta += sum_g;
    *g_gamma += sum_gx;
    let mean_g = sum_g / m;
    let mean_gx = sum_gx / m;
    let k = gamma * inv_std;
    for ((gi, &g), &xv) in gx.iter_mut().zip(g_out).zip(xs) {
        let xhat = (xv - mean) * inv_std;
        *gi += k * (g - mean_g - xhat * mean_gx);
    }
}

fn norm_group_forward(xs: &[f64], eps: f64) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / m;
    (mean, 1.0 / (var + eps).sqrt())
}

impl Tape {
    pub fn activation(&mut self, kind: Activation, x: ValueId) -> ValueId {
        let xv = self.value(x);
        let (b, c, t) = xv.shape();
        let data = xv
            .data()
            .iter()
            .map(|&v| match kind {
                Activation::Relu => v.max(0.0),
                Activation::Tanh => v.tanh(),
                Activation::Sigmoid => 1.0 / (1.0 + (-v).exp()),
            })
            .collect();
        let out = TemporalSignal::new(b, c, t, data).expect("activation preserves shape");
        self.push_op(out, |out| Box::new(ActivationOp { kind, x, out }))
    }

    pub fn relu(&mut self, x: ValueId) -> ValueId {
        self.activation(Activation::Relu, x)
    }

    pub fn tanh(&mut self, x: ValueId) -> ValueId {
        self.activation(Activation::Tanh, x)
    }

    pub fn sigmoid(&mut self, x: ValueId) -> ValueId {
        self.activation(Activation::Sigmoid, x)
    }

    /// Normalizes with population variance and affine parameters `gamma`,
    /// `beta` of shape `(1, channels, 1)`. `eps` keeps constant groups finite.
    pub fn normalize(
        &mut self,
        kind: NormKind,
        x: ValueId,
        gamma: ValueId,
        beta: ValueId,
        eps: f64,
    ) -> Result<ValueId> {
        if eps <= 0.0 || !eps.is_finite() {
            return Err(Error::config(format!("normalization eps must be positive, got {eps}")));
        }
        let (n_batch, channels, t_len) = self.value(x).shape();
        for (name, id) in [("gamma", gamma), ("beta", beta)] {
            if self.value(id).shape() != (1, channels, 1) {
                return Err(Error::shape(format!(
                    "{name} shape {:?} does not match (1, {channels}, 1)",
                    self.value(id).shape()
                )));
            }
        }
        let xv = self.value(x);
        let gamma_v = self.value(gamma);
        let beta_v = self.value(beta);
        let mut out = TemporalSignal::zeros(n_batch, channels, t_len);
        let (mean, inv_std) = match kind {
            NormKind::Instance => {
                let mut mean = Vec::with_capacity(n_batch * channels);
                let mut inv_std = Vec::with_capacity(n_batch * channels);
                for n in 0..n_batch {
                    for c in 0..channels {
                        let (mu, istd) = norm_group_forward(xv.row(n, c), eps);
                        mean.push(mu);
                        inv_std.push(istd);
                        let g = gamma_v.data()[c];
                        let b = beta_v.data()[c];
                        for (o, &v) in out.row_mut(n, c).iter_mut().zip(xv.row(n, c)) {
                            *o = g * (v - mu) * istd + b;
                        }
                    }
                }
                (mean, inv_std)
            }
            NormKind::Batch => {
                let mut mean = Vec::with_capacity(channels);
                let mut inv_std = Vec::with_capacity(channels);
                let mut xs = vec![0.0; n_batch * t_len];
                for c in 0..channels {
                    for n in 0..n_batch {
                        xs[n * t_len..(n + 1) * t_len].copy_from_slice(xv.row(n, c));
                    }
                    let (mu, istd) = norm_group_forward(&xs, eps);
                    mean.push(mu);
                    inv_std.push(istd);
                    let g = gamma_v.data()[c];
                    let b = beta_v.data()[c];
                    for n in 0..n_batch {
                        for (o, &v) in out.row_mut(n, c).iter_mut().zip(xv.row(n, c)) {
                            *o = g * (v - mu) * istd + b;
                        }
                    }
                }
                (mean, inv_std)
            }
        };
        Ok(self.push_op(out, |out| {
            Box::new(NormOp { kind, x, gamma, beta, out, mean, inv_std })
        }))
    }

    fn binary_elementwise(
        &mut self,
        a: ValueId,
        b: ValueId,
        f: impl Fn(f64, f64) -> f64,
        make: impl FnOnce(ValueId) -> Box<dyn TapeOp>,
    ) -> Result<ValueId> {
        let av = self.value(a);
        let bv = self.value(b);
        if !av.same_shape(bv) {
            return Err(Error::shape(format!(
                "elementwise operands differ: {:?} vs {:?}",
                av.shape(),
                bv.shape()
            )));
        }
        let (nb, c, t) = av.shape();
        let data = av
            .data()
            .iter()
            .zip(bv.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let out = TemporalSignal::new(nb, c, t, data).expect("shape preserved");
        Ok(self.push_op(out, make))
    }

    pub fn add(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        self.binary_elementwise(a, b, |x, y| x + y, |out| Box::new(AddOp { a, b, out }))
    }

    pub fn sub(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        self.binary_elementwise(a, b, |x, y| x - y, |out| Box::new(SubOp { a, b, out }))
    }

    pub fn mul(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        self.binary_elementwise(a, b, |x, y| x * y, |out| Box::new(MulOp { a, b, out }))
    }

    pub fn scale(&mut self, x: ValueId, factor: f64) -> ValueId {
        let xv = self.value(x);
        let (b, c, t) = xv.shape();
        let data = xv.data().iter().map(|&v| v * factor).collect();
        let out = TemporalSignal::new(b, c, t, data).expect("shape preserved");
        self.push_op(out, |out| Box::new(ScaleOp { x, factor, out }))
    }

    pub fn offset(&mut self, x: ValueId, constant: f64) -> ValueId {
        let xv = self.value(x);
        let (b, c, t) = xv.shape();
        let data = xv.data().iter().map(|&v| v + constant).collect();
        let out = TemporalSignal::new(b, c, t, data).expect("shape preserved");
        self.push_op(out, |out| Box::new(OffsetOp { x, out }))
    }

    /// Every second frame starting at `offset` (0 or 1); length must be even
    /// so both streams come out the same size.
    pub fn stride2_sample(&mut self, x: ValueId, offset: usize) -> Result<ValueId> {
        if offset > 1 {
            return Err(Error::config(format!("stride-2 offset must be 0 or 1, got {offset}")));
        }
        let xv = self.value(x);
        let (nb, c, t) = xv.shape();
        if t % 2 != 0 {
            return Err(Error::shape(format!(
                "stride-2 sampling requires even length, got {t}; pad first"
            )));
        }
        let mut out = TemporalSignal::zeros(nb, c, t / 2);
        for n in 0..nb {
            for ch in 0..c {
                let xr = xv.row(n, ch);
                for (u, o) in out.row_mut(n, ch).iter_mut().enumerate() {
                    *o = xr[2 * u + offset];
                }
            }
        }
        Ok(self.push_op(out, |out| Box::new(StrideSampleOp { x, offset, out })))
    }

    /// Inverse of the stride-2 split: `first` lands on positions `2u`,
    /// `second` on `2u + 1`.
    pub fn interleave2(&mut self, first: ValueId, second: ValueId) -> Result<ValueId> {
        let fv = self.value(first);
        let sv = self.value(second);
        if !fv.same_shape(sv) {
            return Err(Error::shape(format!(
                "interleave operands differ: {:?} vs {:?}",
                fv.shape(),
                sv.shape()
            )));
        }
        let (nb, c, t) = fv.shape();
        let mut out = TemporalSignal::zeros(nb, c, 2 * t);
        for n in 0..nb {
            for ch in 0..c {
                let fr = fv.row(n, ch);
                let sr = sv.row(n, ch);
                let o = out.row_mut(n, ch);
                for u in 0..t {
                    o[2 * u] = fr[u];
                    o[2 * u + 1] = sr[u];
                }
            }
        }
        Ok(self.push_op(out, |out| Box::new(Interleave2Op { first, second, out })))
    }

    /// Repeats the last frame when the length is odd; even inputs pass
    /// through as the same tape value.
    pub fn replicate_pad_to_even(&mut self, x: ValueId) -> ValueId {
        let xv = self.value(x);
        let (nb, c, t) = xv.shape();
        if t % 2 == 0 {
            return x;
        }
        let mut out = TemporalSignal::zeros(nb, c, t + 1);
        for n in 0..nb {
            for ch in 0..c {
                let xr = xv.row(n, ch);
                let o = out.row_mut(n, ch);
                o[..t].copy_from_slice(xr);
                o[t] = xr[t - 1];
            }
        }
        self.push_op(out, |out| Box::new(ReplicatePadOp { x, out }))
    }

    pub fn concat_channels(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        let av = self.value(a);
        let bv = self.value(b);
        if av.batch() != bv.batch() || av.len() != bv.len() {
            return Err(Error::shape(format!(
                "channel concat needs matching batch and length: {:?} vs {:?}",
                av.shape(),
                bv.shape()
            )));
        }
        let (nb, c_a, t) = av.shape();
        let c_b = bv.channels();
        let mut data = Vec::with_capacity(nb * (c_a + c_b) * t);
        for n in 0..nb {
            for c in 0..c_a {
                data.extend_from_slice(av.row(n, c));
            }
            for c in 0..c_b {
                data.extend_from_slice(bv.row(n, c));
            }
        }
        let out = TemporalSignal::new(nb, c_a + c_b, t, data)?;
        Ok(self.push_op(out, |out| Box::new(ConcatChannelsOp { a, b, out })))
    }

    /// Mean over time per `(batch, channel)`, shape `(batch, channels, 1)`.
    pub fn global_avg_time(&mut self, x: ValueId) -> ValueId {
        let xv = self.value(x);
        let (nb, c, t) = xv.shape();
        let mut out = TemporalSignal::zeros(nb, c, 1);
        for n in 0..nb {
            for ch in 0..c {
                let s: f64 = xv.row(n, ch).iter().sum();
                out.set(n, ch, 0, s / t as f64);
            }
        }
        self.push_op(out, |out| Box::new(GlobalAvgTimeOp { x, out }))
    }

    /// Mean of squared entries over all elements, as a scalar.
    pub fn mean_sq(&mut self, x: ValueId) -> ValueId {
        let xv = self.value(x);
        let s: f64 = xv.data().iter().map(|&v| v * v).sum();
        let out = TemporalSignal::scalar(s / xv.numel() as f64);
        self.push_op(out, |out| Box::new(MeanSqOp { x, out }))
    }

    /// Mean negative log-likelihood of `labels` under a softmax over the
    /// channel axis of `(batch, classes, 1)` logits.
    pub fn cross_entropy(&mut self, logits: ValueId, labels: &[usize]) -> Result<ValueId> {
        let lv = self.value(logits);
        let (nb, classes, t) = lv.shape();
        if t != 1 {
            return Err(Error::shape(format!(
                "logits must have a single time step, got length {t}"
            )));
        }
        if labels.len() != nb {
            return Err(Error::shape(format!(
                "label count {} does not match batch {nb}",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::usage(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }
        let mut probs = vec![0.0; nb * classes];
        let mut loss = 0.0;
        for n in 0..nb {
            let row = &lv.data()[n * classes..(n + 1) * classes];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut denom = 0.0;
            for (k, &z) in row.iter().enumerate() {
                let e = (z - max).exp();
                probs[n * classes + k] = e;
                denom += e;
            }
            for p in &mut probs[n * classes..(n + 1) * classes] {
                *p /= denom;
            }
            loss -= probs[n * classes + labels[n]].ln();
        }
        let out = TemporalSignal::scalar(loss / nb as f64);
        let labels = labels.to_vec();
        Ok(self.push_op(out, |out| {
            Box::new(CrossEntropyOp { logits, labels, probs, out })
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(tape: &mut Tape, data: Vec<f64>) -> ValueId {
        let n = data.len();
        tape.leaf(TemporalSignal::new(1, 1, n, data).unwrap()).unwrap()
    }

    #[test]
    fn relu_clamps_negatives() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![-1.0, 2.0]);
        let y = tape.relu(x);
        assert_eq!(tape.value(y).data(), &[0.0, 2.0]);
    }

    #[test]
    fn tanh_and_sigmoid_at_zero() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![0.0]);
        let t = tape.tanh(x);
        let s = tape.sigmoid(x);
        assert_eq!(tape.value(t).data(), &[0.0]);
        assert_eq!(tape.value(s).data(), &[0.5]);
    }

    #[test]
    fn unknown_activation_name_is_config_error() {
        assert!(matches!("gelu".parse::<Activation>(), Err(Error::Config(_))));
        assert_eq!("relu".parse::<Activation>().unwrap(), Activation::Relu);
    }

    #[test]
    fn instance_norm_standardizes_each_row() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![1.0, 2.0, 3.0]);
        let gamma = tape.leaf(TemporalSignal::filled(1, 1, 1, 1.0)).unwrap();
        let beta = tape.leaf(TemporalSignal::zeros(1, 1, 1)).unwrap();
        let y = tape.normalize(NormKind::Instance, x, gamma, beta, 1e-5).unwrap();
        let got = tape.value(y).data().to_vec();
        let want = 1.224_744_871; // (3 - 2) / sqrt(2/3)
        assert!((got[0] + want).abs() < 1e-4, "got {got:?}");
        assert!(got[1].abs() < 1e-12);
        assert!((got[2] - want).abs() < 1e-4);
    }

    #[test]
    fn constant_channel_normalizes_to_beta() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![5.0, 5.0, 5.0]);
        let gamma = tape.leaf(TemporalSignal::filled(1, 1, 1, 2.0)).unwrap();
        let beta = tape.leaf(TemporalSignal::filled(1, 1, 1, 0.25)).unwrap();
        let y = tape.normalize(NormKind::Instance, x, gamma, beta, 1e-5).unwrap();
        for &v in tape.value(y).data() {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn instance_norm_is_invariant_to_input_scaling() {
        let data = vec![0.3, -1.2, 0.7, 2.1, -0.4, 0.0, 1.5, -2.2];
        let mut tape = Tape::new();
        let x = leaf(&mut tape, data.clone());
        let xs = leaf(&mut tape, data.iter().map(|v| v * 10.0).collect());
        let gamma = tape.leaf(TemporalSignal::filled(1, 1, 1, 1.0)).unwrap();
        let beta = tape.leaf(TemporalSignal::zeros(1, 1, 1)).unwrap();
        let y0 = tape.normalize(NormKind::Instance, x, gamma, beta, 1e-8).unwrap();
        let y1 = tape.normalize(NormKind::Instance, xs, gamma, beta, 1e-8).unwrap();
        for (a, b) in tape.value(y0).data().iter().zip(tape.value(y1).data()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn batch_norm_pools_statistics_across_batch() {
        let mut tape = Tape::new();
        let x = tape
            .leaf(TemporalSignal::new(2, 1, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap())
            .unwrap();
        let gamma = tape.leaf(TemporalSignal::filled(1, 1, 1, 1.0)).unwrap();
        let beta = tape.leaf(TemporalSignal::zeros(1, 1, 1)).unwrap();
        let y = tape.normalize(NormKind::Batch, x, gamma, beta, 1e-9).unwrap();
        // mean 1.5, population var 1.25 over the whole (batch, time) group
        let istd = 1.0 / (1.25f64 + 1e-9).sqrt();
        let want: Vec<f64> = [0.0, 1.0, 2.0, 3.0].iter().map(|v| (v - 1.5) * istd).collect();
        for (a, b) in tape.value(y).data().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_frame_instance_norm_stays_finite() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![42.0]);
        let gamma = tape.leaf(TemporalSignal::filled(1, 1, 1, 1.0)).unwrap();
        let beta = tape.leaf(TemporalSignal::zeros(1, 1, 1)).unwrap();
        let y = tape.normalize(NormKind::Instance, x, gamma, beta, 1e-5).unwrap();
        assert!(tape.value(y).all_finite());
        assert!(tape.value(y).data()[0].abs() < 1e-9);
    }

    #[test]
    fn stride_sampling_splits_even_and_odd_positions() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![10.0, 20.0, 30.0, 40.0]);
        let a = tape.stride2_sample(x, 0).unwrap();
        let b = tape.stride2_sample(x, 1).unwrap();
        assert_eq!(tape.value(a).data(), &[10.0, 30.0]);
        assert_eq!(tape.value(b).data(), &[20.0, 40.0]);
        let merged = tape.interleave2(a, b).unwrap();
        assert_eq!(tape.value(merged).data(), &[10.0, 20.0, 30.0, 40.0]);
    }

    #[test]
    fn stride_sampling_rejects_odd_length() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![1.0, 2.0, 3.0]);
        assert!(tape.stride2_sample(x, 0).is_err());
        let padded = tape.replicate_pad_to_even(x);
        assert_eq!(tape.value(padded).data(), &[1.0, 2.0, 3.0, 3.0]);
        assert!(tape.stride2_sample(padded, 0).is_ok());
    }

    #[test]
    fn even_length_padding_is_a_no_op() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![1.0, 2.0]);
        assert_eq!(tape.replicate_pad_to_even(x), x);
    }

    #[test]
    fn concat_stacks_channels_in_order() {
        let mut tape = Tape::new();
        let a = tape
            .leaf(TemporalSignal::new(1, 1, 2, vec![1.0, 2.0]).unwrap())
            .unwrap();
        let b = tape
            .leaf(TemporalSignal::new(1, 2, 2, vec![3.0, 4.0, 5.0, 6.0]).unwrap())
            .unwrap();
        let y = tape.concat_channels(a, b).unwrap();
        assert_eq!(tape.value(y).shape(), (1, 3, 2));
        assert_eq!(tape.value(y).data(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn sum_of_squares_gradient() {
        // f(x) = sum(x^2) = mean_sq(x) * n, so df/dx = 2x.
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![1.0, 2.0]);
        let ms = tape.mean_sq(x);
        let f = tape.scale(ms, 2.0);
        let grads = tape.backward(f).unwrap();
        assert_eq!(grads.grad(x).data(), &[2.0, 4.0]);
    }

    #[test]
    fn cross_entropy_of_uniform_logits_is_log_classes() {
        let mut tape = Tape::new();
        let logits = tape.leaf(TemporalSignal::zeros(2, 4, 1)).unwrap();
        let loss = tape.cross_entropy(logits, &[0, 3]).unwrap();
        assert!((tape.value(loss).scalar_value() - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_validates_labels() {
        let mut tape = Tape::new();
        let logits = tape.leaf(TemporalSignal::zeros(1, 3, 1)).unwrap();
        assert!(tape.cross_entropy(logits, &[3]).is_err());
        assert!(tape.cross_entropy(logits, &[0, 1]).is_err());
    }

    #[test]
    fn global_average_over_time() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![1.0, 2.0, 3.0, 6.0]);
        let y = tape.global_avg_time(x);
        assert_eq!(tape.value(y).shape(), (1, 1, 1));
        assert_eq!(tape.value(y).scalar_value(), 3.0);
    }
}
