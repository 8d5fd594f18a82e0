//! Stride-2 temporal pooling baselines.
//!
//! Every method shares one window rule: kernel 2, stride 2, and odd lengths
//! are first made even by repeating the final frame, so the output length is
//! always `ceil(T / 2)`.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::signal::TemporalSignal;
use crate::tape::{BackwardCtx, Tape, TapeOp, ValueId};

/// Whether stochastic layers sample (train) or average (eval).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPool {
    Max,
    Average,
}

/// A pooling method selected by its textual spec.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PoolMethod {
    Max,
    Average,
    Lp { p: f64 },
    Mixed,
    Stochastic,
    Soft,
}

impl PoolMethod {
    /// True when the layer owns a learnable blend parameter.
    pub fn has_blend(&self) -> bool {
        matches!(self, PoolMethod::Mixed)
    }
}

impl FromStr for PoolMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(PoolMethod::Max),
            "avg" => Ok(PoolMethod::Average),
            "mixed" => Ok(PoolMethod::Mixed),
            "stochastic" => Ok(PoolMethod::Stochastic),
            "soft" => Ok(PoolMethod::Soft),
            other => {
                if let Some(p_str) = other.strip_prefix("lp:") {
                    let p: f64 = p_str
                        .parse()
                        .map_err(|_| Error::config(format!("bad Lp exponent '{p_str}'")))?;
                    if !p.is_finite() || p < 1.0 {
                        return Err(Error::config(format!(
                            "Lp exponent must be finite and >= 1, got {p}"
                        )));
                    }
                    Ok(PoolMethod::Lp { p })
                } else {
                    Err(Error::config(format!("unknown pooling method '{other}'")))
                }
            }
        }
    }
}

impl fmt::Display for PoolMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoolMethod::Max => write!(f, "max"),
            PoolMethod::Average => write!(f, "avg"),
            PoolMethod::Lp { p } => write!(f, "lp:{p}"),
            PoolMethod::Mixed => write!(f, "mixed"),
            PoolMethod::Stochastic => write!(f, "stochastic"),
            PoolMethod::Soft => write!(f, "soft"),
        }
    }
}

struct FixedPoolOp {
    kind: FixedPool,
    x: ValueId,
    out: ValueId,
    /// For max: winning offset (0 or 1) per output element.
    argmax: Vec<u8>,
}

impl TapeOp for FixedPoolOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        match self.kind {
            FixedPool::Max => {
                for (u, &go) in g_out.iter().enumerate() {
                    gx[2 * u + self.argmax[u] as usize] += go;
                }
            }
            FixedPool::Average => {
                for (u, &go) in g_out.iter().enumerate() {
                    gx[2 * u] += 0.5 * go;
                    gx[2 * u + 1] += 0.5 * go;
                }
            }
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

struct LpPoolOp {
    p: f64,
    x: ValueId,
    out: ValueId,
}

impl TapeOp for LpPoolOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let x = ctx.value(self.x);
        let y = ctx.value(self.out);
        for (u, &go) in g_out.iter().enumerate() {
            let yv = y.data()[u];
            if yv == 0.0 {
                continue;
            }
            for k in 0..2 {
                let xv = x.data()[2 * u + k];
                if xv == 0.0 {
                    continue;
                }
                // d/dx (mean |x|^p)^(1/p) = sign(x) (|x|/y)^(p-1) / 2
                let ratio = (xv.abs() / yv).powf(self.p - 1.0);
                gx[2 * u + k] += go * xv.signum() * ratio * 0.5;
            }
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

struct MixedPoolOp {
    x: ValueId,
    blend_logit: ValueId,
    out: ValueId,
    argmax: Vec<u8>,
}

impl TapeOp for MixedPoolOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let mut gl = ctx.take_grad(self.blend_logit);
        let x = ctx.value(self.x);
        let lambda = sigmoid(ctx.value(self.blend_logit).scalar_value());
        let dlam = lambda * (1.0 - lambda);
        for (u, &go) in g_out.iter().enumerate() {
            let a = x.data()[2 * u];
            let b = x.data()[2 * u + 1];
            let max = if self.argmax[u] == 0 { a } else { b };
            let avg = (a + b) * 0.5;
            gx[2 * u + self.argmax[u] as usize] += go * lambda;
            gx[2 * u] += go * (1.0 - lambda) * 0.5;
            gx[2 * u + 1] += go * (1.0 - lambda) * 0.5;
            gl[0] += go * (max - avg) * dlam;
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.blend_logit, gl);
        ctx.restore_grad(self.out, g_out);
    }
}

struct StochasticTrainOp {
    x: ValueId,
    out: ValueId,
    /// Sampled offset (0 or 1) per output element.
    chosen: Vec<u8>,
}

impl TapeOp for StochasticTrainOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        for (u, &go) in g_out.iter().enumerate() {
            gx[2 * u + self.chosen[u] as usize] += go;
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

struct StochasticEvalOp {
    x: ValueId,
    out: ValueId,
}

impl TapeOp for StochasticEvalOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let x = ctx.value(self.x);
        let y = ctx.value(self.out);
        for (u, &go) in g_out.iter().enumerate() {
            let a = x.data()[2 * u];
            let b = x.data()[2 * u + 1];
            let s = a.max(0.0) + b.max(0.0);
            if s == 0.0 {
                gx[2 * u] += 0.5 * go;
                gx[2 * u + 1] += 0.5 * go;
            } else {
                let yv = y.data()[u];
                if a > 0.0 {
                    gx[2 * u] += go * (2.0 * a - yv) / s;
                }
                if b > 0.0 {
                    gx[2 * u + 1] += go * (2.0 * b - yv) / s;
                }
            }
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

struct SoftPoolOp {
    x: ValueId,
    out: ValueId,
}

impl TapeOp for SoftPoolOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>) {
        let g_out = ctx.take_grad(self.out);
        let mut gx = ctx.take_grad(self.x);
        let x = ctx.value(self.x);
        let y = ctx.value(self.out);
        for (u, &go) in g_out.iter().enumerate() {
            let a = x.data()[2 * u];
            let b = x.data()[2 * u + 1];
            let m = a.max(b);
            let wa = (a - m).exp();
            let wb = (b - m).exp();
            let denom = wa + wb;
            let yv = y.data()[u];
            gx[2 * u] += go * (wa / denom) * (1.0 + a - yv);
            gx[2 * u + 1] += go * (wb / denom) * (1.0 + b - yv);
        }
        ctx.restore_grad(self.x, gx);
        ctx.restore_grad(self.out, g_out);
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Iterates pooled windows of the padded input, filling `out` and `extra`.
fn pool_windows(
    x: &TemporalSignal,
    mut f: impl FnMut(usize, f64, f64) -> f64,
) -> TemporalSignal {
    let (nb, c, t) = x.shape();
    debug_assert_eq!(t % 2, 0);
    let mut out = TemporalSignal::zeros(nb, c, t / 2);
    for nc in 0..nb * c {
        for u in 0..t / 2 {
            let a = x.data()[nc * t + 2 * u];
            let b = x.data()[nc * t + 2 * u + 1];
            out.data_mut()[nc * (t / 2) + u] = f(nc * (t / 2) + u, a, b);
        }
    }
    out
}

impl Tape {
    /// Max or average over non-overlapping windows of two frames.
    pub fn pool_fixed(&mut self, kind: FixedPool, x: ValueId) -> Result<ValueId> {
        let x = self.replicate_pad_to_even(x);
        let xv = self.value(x);
        let n_out = xv.numel() / 2;
        let mut argmax = vec![0u8; if kind == FixedPool::Max { n_out } else { 0 }];
        let out = match kind {
            FixedPool::Max => pool_windows(xv, |i, a, b| {
                // Ties keep the earlier frame.
                if b > a {
                    argmax[i] = 1;
                    b
                } else {
                    a
                }
            }),
            FixedPool::Average => pool_windows(xv, |_, a, b| (a + b) * 0.5),
        };
        Ok(self.push_op(out, |out| Box::new(FixedPoolOp { kind, x, out, argmax })))
    }

    /// Power-mean pooling `(mean |x|^p)^(1/p)`; approaches max as p grows.
    pub fn pool_lp(&mut self, x: ValueId, p: f64) -> Result<ValueId> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::config(format!("Lp exponent must be finite and >= 1, got {p}")));
        }
        let x = self.replicate_pad_to_even(x);
        let xv = self.value(x);
        // Factoring out the window max keeps |x|^p in range for large p.
        let out = pool_windows(xv, |_, a, b| {
            let (a, b) = (a.abs(), b.abs());
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                m * (0.5 * ((a / m).powf(p) + (b / m).powf(p))).powf(1.0 / p)
            }
        });
        Ok(self.push_op(out, |out| Box::new(LpPoolOp { p, x, out })))
    }

    /// Convex blend of max and average, gated by `sigmoid(blend_logit)`.
    /// The logit is a scalar `(1, 1, 1)` parameter.
    pub fn pool_mixed(&mut self, x: ValueId, blend_logit: ValueId) -> Result<ValueId> {
        if self.value(blend_logit).numel() != 1 {
            return Err(Error::shape(format!(
                "blend logit must be scalar, got {:?}",
                self.value(blend_logit).shape()
            )));
        }
        let x = self.replicate_pad_to_even(x);
        let lambda = sigmoid(self.value(blend_logit).scalar_value());
        let xv = self.value(x);
        let mut argmax = vec![0u8; xv.numel() / 2];
        let out = pool_windows(xv, |i, a, b| {
            let max = if b > a {
                argmax[i] = 1;
                b
            } else {
                a
            };
            lambda * max + (1.0 - lambda) * (a + b) * 0.5
        });
        Ok(self.push_op(out, |out| Box::new(MixedPoolOp { x, blend_logit, out, argmax })))
    }

    /// Training mode samples one frame per window with probability
    /// proportional to its non-negative part (uniform when both clamp to
    /// zero); eval mode returns the same distribution's expectation.
    pub fn pool_stochastic(
        &mut self,
        x: ValueId,
        mode: Mode,
        rng: Option<&mut dyn RngCore>,
    ) -> Result<ValueId> {
        let x = self.replicate_pad_to_even(x);
        let xv = self.value(x);
        match mode {
            Mode::Train => {
                let rng = rng.ok_or_else(|| {
                    Error::config("stochastic pooling in train mode needs an rng")
                })?;
                let mut chosen = vec![0u8; xv.numel() / 2];
                let out = pool_windows(xv, |i, a, b| {
                    let (ap, bp) = (a.max(0.0), b.max(0.0));
                    let s = ap + bp;
                    let p_first = if s == 0.0 { 0.5 } else { ap / s };
                    let u: f64 = rand::Rng::random(&mut *rng);
                    if u < p_first {
                        a
                    } else {
                        chosen[i] = 1;
                        b
                    }
                });
                Ok(self.push_op(out, |out| Box::new(StochasticTrainOp { x, out, chosen })))
            }
            Mode::Eval => {
                let out = pool_windows(xv, |_, a, b| {
                    let (ap, bp) = (a.max(0.0), b.max(0.0));
                    let s = ap + bp;
                    if s == 0.0 {
                        (a + b) * 0.5
                    } else {
                        (ap * a + bp * b) / s
                    }
                });
                Ok(self.push_op(out, |out| Box::new(StochasticEvalOp { x, out })))
            }
        }
    }

    /// Exponentially weighted average `sum x e^x / sum e^x`, computed with
    /// the window max subtracted for stability.
    pub fn pool_soft(&mut self, x: ValueId) -> Result<ValueId> {
        let x = self.replicate_pad_to_even(x);
        let xv = self.value(x);
        let out = pool_windows(xv, |_, a, b| {
            let m = a.max(b);
            let wa = (a - m).exp();
            let wb = (b - m).exp();
            (a * wa + b * wb) / (wa + wb)
        });
        Ok(self.push_op(out, |out| Box::new(SoftPoolOp { x, out })))
    }

    /// Dispatches on a parsed method spec. `blend` supplies the learnable
    /// logit for mixed pooling; `rng` drives stochastic training.
    pub fn pool_apply(
        &mut self,
        method: &PoolMethod,
        x: ValueId,
        mode: Mode,
        rng: Option<&mut dyn RngCore>,
        blend: Option<ValueId>,
    ) -> Result<ValueId> {
        match method {
            PoolMethod::Max => self.pool_fixed(FixedPool::Max, x),
            PoolMethod::Average => self.pool_fixed(FixedPool::Average, x),
            PoolMethod::Lp { p } => self.pool_lp(x, *p),
            PoolMethod::Mixed => {
                let blend = blend.ok_or_else(|| {
                    Error::config("mixed pooling needs its blend logit parameter")
                })?;
                self.pool_mixed(x, blend)
            }
            PoolMethod::Stochastic => self.pool_stochastic(x, mode, rng),
            PoolMethod::Soft => self.pool_soft(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn signal(data: Vec<f64>) -> TemporalSignal {
        let n = data.len();
        TemporalSignal::new(1, 1, n, data).unwrap()
    }

    fn pool_once(
        method: &PoolMethod,
        data: Vec<f64>,
        mode: Mode,
        seed: Option<u64>,
    ) -> Vec<f64> {
        let mut tape = Tape::new();
        let x = tape.leaf(signal(data)).unwrap();
        let blend = if method.has_blend() {
            Some(tape.leaf(TemporalSignal::scalar(0.0)).unwrap())
        } else {
            None
        };
        let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
        let y = tape
            .pool_apply(
                method,
                x,
                mode,
                rng.as_mut().map(|r| r as &mut dyn RngCore),
                blend,
            )
            .unwrap();
        tape.value(y).data().to_vec()
    }

    #[test]
    fn spec_strings_parse() {
        assert_eq!("max".parse::<PoolMethod>().unwrap(), PoolMethod::Max);
        assert_eq!("avg".parse::<PoolMethod>().unwrap(), PoolMethod::Average);
        assert_eq!("lp:2.5".parse::<PoolMethod>().unwrap(), PoolMethod::Lp { p: 2.5 });
        assert_eq!("mixed".parse::<PoolMethod>().unwrap(), PoolMethod::Mixed);
        assert_eq!("stochastic".parse::<PoolMethod>().unwrap(), PoolMethod::Stochastic);
        assert_eq!("soft".parse::<PoolMethod>().unwrap(), PoolMethod::Soft);
        assert!("lp:0.5".parse::<PoolMethod>().is_err());
        assert!("lp:abc".parse::<PoolMethod>().is_err());
        assert!("median".parse::<PoolMethod>().is_err());
        assert_eq!("lp:2.5".parse::<PoolMethod>().unwrap().to_string(), "lp:2.5");
    }

    #[test]
    fn max_and_average_windows() {
        assert_eq!(pool_once(&PoolMethod::Max, vec![1.0, 3.0, 2.0, 5.0], Mode::Eval, None), vec![3.0, 5.0]);
        assert_eq!(pool_once(&PoolMethod::Average, vec![1.0, 3.0, 2.0, 5.0], Mode::Eval, None), vec![2.0, 3.5]);
    }

    #[test]
    fn odd_length_repeats_final_frame() {
        assert_eq!(pool_once(&PoolMethod::Max, vec![1.0, 3.0, 2.0], Mode::Eval, None), vec![3.0, 2.0]);
        assert_eq!(pool_once(&PoolMethod::Average, vec![1.0, 3.0, 2.0], Mode::Eval, None), vec![2.0, 2.0]);
    }

    #[test]
    fn max_tie_routes_gradient_to_earlier_frame() {
        let mut tape = Tape::new();
        let x = tape.leaf(signal(vec![2.0, 2.0])).unwrap();
        let y = tape.pool_fixed(FixedPool::Max, x).unwrap();
        assert_eq!(tape.value(y).data(), &[2.0]);
        let grads = tape.backward(y).unwrap();
        assert_eq!(grads.grad(x).data(), &[1.0, 0.0]);
    }

    #[test]
    fn max_gradient_routes_to_argmax_only() {
        let mut tape = Tape::new();
        let x = tape.leaf(signal(vec![1.0, 4.0, -2.0, -3.0])).unwrap();
        let y = tape.pool_fixed(FixedPool::Max, x).unwrap();
        let s = tape.global_avg_time(y);
        let grads = tape.backward(s).unwrap();
        assert_eq!(grads.grad(x).data(), &[0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn lp_pool_values() {
        let y = pool_once(&PoolMethod::Lp { p: 2.0 }, vec![1.0, 3.0], Mode::Eval, None);
        assert!((y[0] - 5.0f64.sqrt()).abs() < 1e-12);

        // Direct power expansion as an independent oracle at p = 64.
        let y = pool_once(&PoolMethod::Lp { p: 64.0 }, vec![1.0, 3.0], Mode::Eval, None);
        let oracle = (0.5 * (1.0 + 3.0f64.powi(64))).powf(1.0 / 64.0);
        assert!((y[0] - oracle).abs() < 1e-10, "got {} want {oracle}", y[0]);
        assert!((y[0] - 3.0).abs() < 0.05);

        // Convergence toward the window max as p grows.
        let y = pool_once(&PoolMethod::Lp { p: 1024.0 }, vec![1.0, 3.0], Mode::Eval, None);
        assert!((y[0] - 3.0).abs() < 1e-2);

        let y = pool_once(&PoolMethod::Lp { p: 2.0 }, vec![0.0, 0.0], Mode::Eval, None);
        assert_eq!(y[0], 0.0);
    }

    #[test]
    fn lp_with_p_one_matches_average_on_nonnegative_input() {
        let data = vec![0.5, 2.0, 1.25, 0.0, 3.0, 3.0];
        let lp = pool_once(&PoolMethod::Lp { p: 1.0 }, data.clone(), Mode::Eval, None);
        let avg = pool_once(&PoolMethod::Average, data, Mode::Eval, None);
        for (a, b) in lp.iter().zip(&avg) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_pool_interpolates_max_and_average() {
        let at_logit = |logit: f64| {
            let mut tape = Tape::new();
            let x = tape.leaf(signal(vec![1.0, 3.0])).unwrap();
            let b = tape.leaf(TemporalSignal::scalar(logit)).unwrap();
            let y = tape.pool_mixed(x, b).unwrap();
            tape.value(y).data()[0]
        };
        assert!((at_logit(0.0) - 2.5).abs() < 1e-12);
        assert!((at_logit(50.0) - 3.0).abs() < 1e-12);
        assert!((at_logit(-50.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn stochastic_train_follows_the_clamped_distribution() {
        // Zero-mass frame is never selected.
        for seed in 0..20 {
            let y = pool_once(&PoolMethod::Stochastic, vec![0.0, 5.0], Mode::Train, Some(seed));
            assert_eq!(y[0], 5.0);
        }
        // Equal frames give the same value either way.
        let y = pool_once(&PoolMethod::Stochastic, vec![2.0, 2.0], Mode::Train, Some(3));
        assert_eq!(y[0], 2.0);
        // All-negative windows sample uniformly but return raw values.
        let y = pool_once(&PoolMethod::Stochastic, vec![-1.0, -3.0], Mode::Train, Some(5));
        assert!(y[0] == -1.0 || y[0] == -3.0);
    }

    #[test]
    fn stochastic_train_requires_rng() {
        let mut tape = Tape::new();
        let x = tape.leaf(signal(vec![1.0, 2.0])).unwrap();
        assert!(tape.pool_stochastic(x, Mode::Train, None).is_err());
        assert!(tape.pool_stochastic(x, Mode::Eval, None).is_ok());
    }

    #[test]
    fn stochastic_eval_is_the_expectation() {
        let y = pool_once(&PoolMethod::Stochastic, vec![1.0, 3.0], Mode::Eval, None);
        assert!((y[0] - 2.5).abs() < 1e-12); // (1*1 + 3*3) / 4
        let y = pool_once(&PoolMethod::Stochastic, vec![-1.0, -3.0], Mode::Eval, None);
        assert!((y[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn stochastic_train_mean_approaches_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sum = 0.0;
        let n = 10_000;
        for _ in 0..n {
            let mut tape = Tape::new();
            let x = tape.leaf(signal(vec![1.0, 3.0])).unwrap();
            let y = tape
                .pool_stochastic(x, Mode::Train, Some(&mut rng))
                .unwrap();
            sum += tape.value(y).data()[0];
        }
        let mean = sum / n as f64;
        // Single-draw variance is 0.75, so three sigma of the mean is ~0.026.
        assert!((mean - 2.5).abs() < 0.026, "sample mean {mean}");
    }

    #[test]
    fn stochastic_train_is_reproducible_per_seed() {
        let a = pool_once(&PoolMethod::Stochastic, vec![1.0, 3.0, 2.0, 2.5], Mode::Train, Some(42));
        let b = pool_once(&PoolMethod::Stochastic, vec![1.0, 3.0, 2.0, 2.5], Mode::Train, Some(42));
        assert_eq!(a, b);
    }

    #[test]
    fn soft_pool_weights_by_exponentials() {
        let y = pool_once(&PoolMethod::Soft, vec![1.0, 3.0], Mode::Eval, None);
        let oracle = (1.0f64.exp() + 3.0 * 3.0f64.exp()) / (1.0f64.exp() + 3.0f64.exp());
        assert!((y[0] - oracle).abs() < 1e-12);
        assert!((y[0] - 2.761_594_155_955_765).abs() < 1e-12);
    }

    #[test]
    fn soft_pool_of_constant_window_is_exact() {
        for &c in &[0.0, 1.0, -7.25, 1e3] {
            let y = pool_once(&PoolMethod::Soft, vec![c, c], Mode::Eval, None);
            assert_eq!(y[0], c);
        }
    }

    #[test]
    fn soft_pool_survives_large_magnitudes() {
        let y = pool_once(&PoolMethod::Soft, vec![1000.0, 999.0], Mode::Eval, None);
        assert!(y[0].is_finite());
        assert!(y[0] > 999.0 && y[0] < 1000.0);
    }

    #[test]
    fn mixed_without_blend_is_config_error() {
        let mut tape = Tape::new();
        let x = tape.leaf(signal(vec![1.0, 2.0])).unwrap();
        let err = tape
            .pool_apply(&PoolMethod::Mixed, x, Mode::Eval, None, None)
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
