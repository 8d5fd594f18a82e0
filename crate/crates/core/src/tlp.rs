//! Learnable lifting downsampler.
//!
//! A stride-2 split pairs each signal into even- and odd-position streams.
//! A predictor estimates the odd stream from the even one, leaving a detail
//! signal `d = x_o - P(x_e)`; an updater smooths the even stream into an
//! approximation `s = x_e + U(d)`. Because each stage only adds or subtracts
//! a function of the *other* stream, the transform inverts exactly no matter
//! what the networks compute: `x_e = s - U(d)`, then `x_o = d + P(x_e)`.
//!
//! Both sub-networks share one shape: a depthwise convolution, ReLU, a
//! pointwise convolution, and Tanh, so predictions stay in `(-1, 1)`.
//! Downstream, each stream passes through a residual gate
//! `X + (sigmoid(IN(conv(X))) - 1/2) * X` before the streams fuse into the
//! pooled output.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::conv::ConvParams;
use crate::error::{Error, Result};
use crate::flops::{LayerDesc, ModelDesc};
use crate::ops::NormKind;
use crate::params::ParamSet;
use crate::signal::TemporalSignal;
use crate::tape::{Tape, ValueId};

/// Epsilon inside the gates' instance normalization.
pub const WEIGHT_NORM_EPS: f64 = 1e-5;
/// Epsilon inside the bottleneck fusion's batch normalization.
pub const FUSION_NORM_EPS: f64 = 1e-5;

/// How the smoothed and detail streams combine into one output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fusion {
    /// Elementwise sum; keeps the channel count.
    Sum,
    /// Channel concatenation; doubles the channel count.
    Concat,
    /// Concatenation followed by a pointwise conv, batch norm, and ReLU
    /// back to the input channel count.
    Bottleneck,
}

impl FromStr for Fusion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Fusion::Sum),
            "concat" => Ok(Fusion::Concat),
            "bottleneck" => Ok(Fusion::Bottleneck),
            other => Err(Error::config(format!("unknown fusion strategy '{other}'"))),
        }
    }
}

impl fmt::Display for Fusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fusion::Sum => write!(f, "sum"),
            Fusion::Concat => write!(f, "concat"),
            Fusion::Bottleneck => write!(f, "bottleneck"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TlpConfig {
    /// Depthwise kernel width in the predict and update networks.
    pub kernel: usize,
    /// Kernel width of the residual gates' convolution.
    pub weighting_kernel: usize,
    pub fusion: Fusion,
}

impl Default for TlpConfig {
    fn default() -> Self {
        Self { kernel: 5, weighting_kernel: 5, fusion: Fusion::Sum }
    }
}

/// All learnable tensors of one lifting layer, in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct TlpParams {
    pub channels: usize,
    pub config: TlpConfig,
    pub params: ParamSet,
}

fn push_conv(set: &mut ParamSet, prefix: &str, conv: ConvParams) -> Result<()> {
    set.push(format!("{prefix}.weight"), conv.weight)?;
    set.push(format!("{prefix}.bias"), conv.bias)?;
    Ok(())
}

impl TlpParams {
    /// Seeded initialization. The final pointwise convolutions of the
    /// predict/update networks and the gate convolutions start at zero so a
    /// fresh layer reduces to the plain stride-2 split.
    pub fn init<R: Rng>(channels: usize, config: TlpConfig, rng: &mut R) -> Result<Self> {
        if channels == 0 {
            return Err(Error::config("lifting layer needs at least one channel"));
        }
        if config.kernel == 0 || config.kernel % 2 == 0 {
            return Err(Error::config(format!(
                "depthwise kernel must be odd and positive, got {}",
                config.kernel
            )));
        }
        if config.weighting_kernel == 0 || config.weighting_kernel % 2 == 0 {
            return Err(Error::config(format!(
                "weighting kernel must be odd and positive, got {}",
                config.weighting_kernel
            )));
        }
        let mut params = ParamSet::new();
        for net in ["predict", "update"] {
            push_conv(
                &mut params,
                &format!("{net}.dw"),
                ConvParams::init(channels, channels, config.kernel, channels, rng)?,
            )?;
            push_conv(
                &mut params,
                &format!("{net}.pw"),
                ConvParams::zeros(channels, channels, 1, 1)?,
            )?;
        }
        for gate in ["weight_s", "weight_d"] {
            push_conv(
                &mut params,
                &format!("{gate}.conv"),
                ConvParams::zeros(channels, channels, config.weighting_kernel, 1)?,
            )?;
            params.push(
                format!("{gate}.norm.gamma"),
                TemporalSignal::filled(1, channels, 1, 1.0),
            )?;
            params.push(format!("{gate}.norm.beta"), TemporalSignal::zeros(1, channels, 1))?;
        }
        if config.fusion == Fusion::Bottleneck {
            push_conv(
                &mut params,
                "fusion.conv",
                ConvParams::init(2 * channels, channels, 1, 1, rng)?,
            )?;
            params.push(
                "fusion.norm.gamma",
                TemporalSignal::filled(1, channels, 1, 1.0),
            )?;
            params.push("fusion.norm.beta", TemporalSignal::zeros(1, channels, 1))?;
        }
        Ok(Self { channels, config, params })
    }

    /// Registers every tensor as a tape leaf and returns the handles.
    pub fn bind(&self, tape: &mut Tape) -> Result<TlpBound> {
        let ids = self.params.bind(tape)?;
        TlpBound::from_ids(self.channels, self.config, &self.params, ids, "")
    }

    /// Output channels after fusion.
    pub fn out_channels(&self) -> usize {
        match self.config.fusion {
            Fusion::Concat => 2 * self.channels,
            _ => self.channels,
        }
    }

    /// Runs one sub-network (predict or update) on a raw signal.
    fn run_subnet(&self, which: &str, input: &TemporalSignal) -> Result<TemporalSignal> {
        let mut tape = Tape::new();
        let x = tape.leaf(input.clone())?;
        let bound = self.bind(&mut tape)?;
        let net = match which {
            "predict" => bound.predict,
            _ => bound.update,
        };
        let y = subnet_forward(&mut tape, x, &net, self.channels)?;
        Ok(tape.value(y).clone())
    }
}

#[derive(Clone, Copy)]
pub(crate) struct NetBound {
    dw_w: ValueId,
    dw_b: ValueId,
    pw_w: ValueId,
    pw_b: ValueId,
}

#[derive(Clone, Copy)]
pub(crate) struct GateBound {
    conv_w: ValueId,
    conv_b: ValueId,
    gamma: ValueId,
    beta: ValueId,
}

/// Tape handles for one bound lifting layer, aligned with the parameter
/// order of its `TlpParams`.
pub struct TlpBound {
    pub channels: usize,
    pub config: TlpConfig,
    pub ids: Vec<ValueId>,
    pub(crate) predict: NetBound,
    pub(crate) update: NetBound,
    pub(crate) weight_s: GateBound,
    pub(crate) weight_d: GateBound,
    pub(crate) fusion: Option<GateBound>,
}

impl TlpBound {
    /// Resolves handles by name inside `params`, which may hold the layer's
    /// tensors under an outer `prefix` (for example `"pool1."`). `ids` must be
    /// aligned index-for-index with `params`.
    pub(crate) fn from_ids(
        channels: usize,
        config: TlpConfig,
        params: &ParamSet,
        ids: Vec<ValueId>,
        prefix: &str,
    ) -> Result<Self> {
        let find = |name: &str| -> Result<ValueId> {
            let full = format!("{prefix}{name}");
            params
                .index_of(&full)
                .map(|i| ids[i])
                .ok_or_else(|| Error::usage(format!("missing lifting parameter '{full}'")))
        };
        let net = |slot: &str| -> Result<NetBound> {
            Ok(NetBound {
                dw_w: find(&format!("{slot}.dw.weight"))?,
                dw_b: find(&format!("{slot}.dw.bias"))?,
                pw_w: find(&format!("{slot}.pw.weight"))?,
                pw_b: find(&format!("{slot}.pw.bias"))?,
            })
        };
        let gate = |slot: &str| -> Result<GateBound> {
            Ok(GateBound {
                conv_w: find(&format!("{slot}.conv.weight"))?,
                conv_b: find(&format!("{slot}.conv.bias"))?,
                gamma: find(&format!("{slot}.norm.gamma"))?,
                beta: find(&format!("{slot}.norm.beta"))?,
            })
        };
        let fusion = if config.fusion == Fusion::Bottleneck {
            Some(gate("fusion")?)
        } else {
            None
        };
        Ok(Self {
            channels,
            config,
            predict: net("predict")?,
            update: net("update")?,
            weight_s: gate("weight_s")?,
            weight_d: gate("weight_d")?,
            fusion,
            ids,
        })
    }
}

/// Which stream a gate operates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Smooth,
    Detail,
}

/// Even/odd split: `x_o` holds positions 0, 2, 4, ... and `x_e` positions
/// 1, 3, 5, ... (the first frame starts the odd stream). Odd lengths are
/// padded by repeating the final frame.
pub fn split(tape: &mut Tape, x: ValueId) -> Result<(ValueId, ValueId)> {
    let xp = tape.replicate_pad_to_even(x);
    let x_o = tape.stride2_sample(xp, 0)?;
    let x_e = tape.stride2_sample(xp, 1)?;
    Ok((x_e, x_o))
}

fn subnet_forward(
    tape: &mut Tape,
    x: ValueId,
    net: &NetBound,
    channels: usize,
) -> Result<ValueId> {
    let h = tape.conv1d(x, net.dw_w, net.dw_b, channels)?;
    let h = tape.relu(h);
    let h = tape.conv1d(h, net.pw_w, net.pw_b, 1)?;
    Ok(tape.tanh(h))
}

/// Predictor output `P(x_e)`, bounded to `(-1, 1)` by the closing Tanh.
pub fn predict(tape: &mut Tape, bound: &TlpBound, x_e: ValueId) -> Result<ValueId> {
    subnet_forward(tape, x_e, &bound.predict, bound.channels)
}

/// Updater output `U(d)`, bounded to `(-1, 1)` by the closing Tanh.
pub fn update(tape: &mut Tape, bound: &TlpBound, d: ValueId) -> Result<ValueId> {
    subnet_forward(tape, d, &bound.update, bound.channels)
}

/// Tape handles produced by one lifting pass.
pub struct LiftIds {
    pub x_e: ValueId,
    pub x_o: ValueId,
    pub d: ValueId,
    pub s: ValueId,
}

/// Forward lifting: split, predict, update.
pub fn lift(tape: &mut Tape, bound: &TlpBound, x: ValueId) -> Result<LiftIds> {
    let (x_e, x_o) = split(tape, x)?;
    let p = predict(tape, bound, x_e)?;
    let d = tape.sub(x_o, p)?;
    let u = update(tape, bound, d)?;
    let s = tape.add(x_e, u)?;
    Ok(LiftIds { x_e, x_o, d, s })
}

/// A smoothed/detail pair as plain signals.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftPair {
    pub s: TemporalSignal,
    pub d: TemporalSignal,
}

/// The filters driving a lifting pass outside any tape.
pub enum LiftFilters<'a> {
    /// Fixed pair: predict copies the even stream, update adds half the
    /// detail, so `s` is the pairwise mean and `d` the pairwise difference.
    Haar,
    Net(&'a TlpParams),
}

/// Lifting on a plain signal; odd lengths pad by repeating the last frame.
pub fn lift_signal(x: &TemporalSignal, filters: &LiftFilters<'_>) -> Result<LiftPair> {
    x.ensure_finite("lift input")?;
    match filters {
        LiftFilters::Haar => haar_lift(x),
        LiftFilters::Net(params) => {
            if x.channels() != params.channels {
                return Err(Error::shape(format!(
                    "lifting layer has {} channels, input has {}",
                    params.channels,
                    x.channels()
                )));
            }
            let mut tape = Tape::new();
            let xid = tape.leaf(x.clone())?;
            let bound = params.bind(&mut tape)?;
            let ids = lift(&mut tape, &bound, xid)?;
            Ok(LiftPair {
                s: tape.value(ids.s).clone(),
                d: tape.value(ids.d).clone(),
            })
        }
    }
}

/// Fixed Haar step: `s` is the pairwise mean, `d` the pairwise difference
/// (first frame minus second).
pub fn haar_lift(x: &TemporalSignal) -> Result<LiftPair> {
    x.ensure_finite("lift input")?;
    let (nb, c, t) = x.shape();
    let t_out = t.div_ceil(2);
    let mut s = TemporalSignal::zeros(nb, c, t_out);
    let mut d = TemporalSignal::zeros(nb, c, t_out);
    for n in 0..nb {
        for ch in 0..c {
            let xr = x.row(n, ch);
            let sr = s.row_mut(n, ch);
            for (u, sv) in sr.iter_mut().enumerate() {
                let a = xr[2 * u];
                let b = if 2 * u + 1 < t { xr[2 * u + 1] } else { xr[t - 1] };
                *sv = (a + b) * 0.5;
            }
            let dr = d.row_mut(n, ch);
            for (u, dv) in dr.iter_mut().enumerate() {
                let a = xr[2 * u];
                let b = if 2 * u + 1 < t { xr[2 * u + 1] } else { xr[t - 1] };
                *dv = a - b;
            }
        }
    }
    Ok(LiftPair { s, d })
}

/// Exact inversion of `lift_signal`. The result always has even length
/// `2 * len(s)`; callers that padded an odd input drop the extra frame.
pub fn inverse_lift(
    s: &TemporalSignal,
    d: &TemporalSignal,
    filters: &LiftFilters<'_>,
) -> Result<TemporalSignal> {
    if !s.same_shape(d) {
        return Err(Error::shape(format!(
            "smooth {:?} and detail {:?} shapes differ",
            s.shape(),
            d.shape()
        )));
    }
    s.ensure_finite("smooth stream")?;
    d.ensure_finite("detail stream")?;
    let (nb, c, t_half) = s.shape();
    let (x_e, x_o) = match filters {
        LiftFilters::Haar => {
            let mut x_e = TemporalSignal::zeros(nb, c, t_half);
            for (xe, (&sv, &dv)) in x_e.data_mut().iter_mut().zip(s.data().iter().zip(d.data())) {
                *xe = sv - dv * 0.5;
            }
            let mut x_o = TemporalSignal::zeros(nb, c, t_half);
            for (xo, (&dv, &xe)) in x_o.data_mut().iter_mut().zip(d.data().iter().zip(x_e.data()))
            {
                *xo = dv + xe;
            }
            (x_e, x_o)
        }
        LiftFilters::Net(params) => {
            let u = params.run_subnet("update", d)?;
            let mut x_e = TemporalSignal::zeros(nb, c, t_half);
            for (xe, (&sv, &uv)) in x_e.data_mut().iter_mut().zip(s.data().iter().zip(u.data())) {
                *xe = sv - uv;
            }
            let p = params.run_subnet("predict", &x_e)?;
            let mut x_o = TemporalSignal::zeros(nb, c, t_half);
            for (xo, (&dv, &pv)) in x_o.data_mut().iter_mut().zip(d.data().iter().zip(p.data())) {
                *xo = dv + pv;
            }
            (x_e, x_o)
        }
    };
    let mut x = TemporalSignal::zeros(nb, c, 2 * t_half);
    for n in 0..nb {
        for ch in 0..c {
            let xr = x.row_mut(n, ch);
            let er = x_e.row(n, ch);
            let or = x_o.row(n, ch);
            for u in 0..t_half {
                xr[2 * u] = or[u];
                xr[2 * u + 1] = er[u];
            }
        }
    }
    Ok(x)
}

/// Regularizers on the lifting outputs: the update loss pulls `s` toward the
/// odd stream, the predict loss shrinks the detail energy.
pub fn lift_losses(
    tape: &mut Tape,
    s: ValueId,
    d: ValueId,
    x_o: ValueId,
) -> Result<(ValueId, ValueId)> {
    let diff = tape.sub(s, x_o)?;
    let c_u = tape.mean_sq(diff);
    let c_p = tape.mean_sq(d);
    Ok((c_u, c_p))
}

/// Residual gate: `X + (sigmoid(IN(conv(X))) - 1/2) * X`. With zero conv
/// parameters the gate is exactly the identity.
pub fn component_weight(
    tape: &mut Tape,
    bound: &TlpBound,
    stream: Stream,
    x: ValueId,
) -> Result<ValueId> {
    let gate = match stream {
        Stream::Smooth => &bound.weight_s,
        Stream::Detail => &bound.weight_d,
    };
    let c = tape.conv1d(x, gate.conv_w, gate.conv_b, 1)?;
    let n = tape.normalize(NormKind::Instance, c, gate.gamma, gate.beta, WEIGHT_NORM_EPS)?;
    let w = tape.sigmoid(n);
    let centered = tape.offset(w, -0.5);
    let scaled = tape.mul(centered, x)?;
    tape.add(scaled, x)
}

/// Combines the gated streams according to the fusion strategy.
pub fn fuse(
    tape: &mut Tape,
    bound: &TlpBound,
    s_star: ValueId,
    d_star: ValueId,
) -> Result<ValueId> {
    match bound.config.fusion {
        Fusion::Sum => tape.add(s_star, d_star),
        Fusion::Concat => tape.concat_channels(s_star, d_star),
        Fusion::Bottleneck => {
            let gate = bound.fusion.as_ref().ok_or_else(|| {
                Error::config("bottleneck fusion selected but its parameters are absent")
            })?;
            let cat = tape.concat_channels(s_star, d_star)?;
            let h = tape.conv1d(cat, gate.conv_w, gate.conv_b, 1)?;
            let h = tape.normalize(NormKind::Batch, h, gate.gamma, gate.beta, FUSION_NORM_EPS)?;
            Ok(tape.relu(h))
        }
    }
}

/// Everything a full lifting layer pass exposes.
pub struct TlpOut {
    pub y: ValueId,
    pub c_u: ValueId,
    pub c_p: ValueId,
    pub lift: LiftIds,
    pub s_weighted: ValueId,
    pub d_weighted: ValueId,
}

/// Full layer: lift, regularizer losses, per-stream gates, fusion.
pub fn tlp_forward(tape: &mut Tape, bound: &TlpBound, x: ValueId) -> Result<TlpOut> {
    if tape.value(x).channels() != bound.channels {
        return Err(Error::shape(format!(
            "lifting layer has {} channels, input has {}",
            bound.channels,
            tape.value(x).channels()
        )));
    }
    let lift_ids = lift(tape, bound, x)?;
    let (c_u, c_p) = lift_losses(tape, lift_ids.s, lift_ids.d, lift_ids.x_o)?;
    let s_star = component_weight(tape, bound, Stream::Smooth, lift_ids.s)?;
    let d_star = component_weight(tape, bound, Stream::Detail, lift_ids.d)?;
    let y = fuse(tape, bound, s_star, d_star)?;
    Ok(TlpOut { y, c_u, c_p, lift: lift_ids, s_weighted: s_star, d_weighted: d_star })
}

/// Tape handles for an assembled total loss.
pub struct TotalLoss {
    pub total: ValueId,
    pub c_u_sum: Option<ValueId>,
    pub c_p_sum: Option<ValueId>,
}

/// `task + alpha_u * sum(c_u) + alpha_p * sum(c_p)` over all lifting layers.
/// With no layers (or zero coefficients) the task loss passes through
/// untouched.
pub fn total_loss(
    tape: &mut Tape,
    task: ValueId,
    layer_losses: &[(ValueId, ValueId)],
    alpha_u: f64,
    alpha_p: f64,
) -> Result<TotalLoss> {
    for (name, a) in [("alpha_u", alpha_u), ("alpha_p", alpha_p)] {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::config(format!("{name} must be finite and >= 0, got {a}")));
        }
    }
    let sum_of = |tape: &mut Tape, pick: fn(&(ValueId, ValueId)) -> ValueId| -> Result<Option<ValueId>> {
        let mut acc: Option<ValueId> = None;
        for pair in layer_losses {
            let id = pick(pair);
            acc = Some(match acc {
                None => id,
                Some(prev) => tape.add(prev, id)?,
            });
        }
        Ok(acc)
    };
    let c_u_sum = sum_of(tape, |p| p.0)?;
    let c_p_sum = sum_of(tape, |p| p.1)?;
    let mut total = task;
    if alpha_u > 0.0 {
        if let Some(cu) = c_u_sum {
            let term = tape.scale(cu, alpha_u);
            total = tape.add(total, term)?;
        }
    }
    if alpha_p > 0.0 {
        if let Some(cp) = c_p_sum {
            let term = tape.scale(cp, alpha_p);
            total = tape.add(total, term)?;
        }
    }
    Ok(TotalLoss { total, c_u_sum, c_p_sum })
}

/// FLOP model of the two lifting sub-networks (predict and update) for an
/// output length `t_out`: each stack is one depthwise and one pointwise
/// convolution, so the MAC total is `2 * (k*C + C^2) * t_out`.
pub fn subnet_flop_desc(channels: usize, kernel: usize, t_out: usize) -> ModelDesc {
    let mut desc = ModelDesc::new("lifting-subnets");
    for net in ["predict", "update"] {
        desc.push(
            net,
            format!("{net}.dw"),
            LayerDesc::Conv1d {
                in_channels: channels,
                out_channels: channels,
                kernel,
                groups: channels,
                out_len: t_out,
            },
        );
        desc.push(
            net,
            format!("{net}.relu"),
            LayerDesc::Elementwise { elements: channels * t_out },
        );
        desc.push(
            net,
            format!("{net}.pw"),
            LayerDesc::Conv1d {
                in_channels: channels,
                out_channels: channels,
                kernel: 1,
                groups: 1,
                out_len: t_out,
            },
        );
        desc.push(
            net,
            format!("{net}.tanh"),
            LayerDesc::Elementwise { elements: channels * t_out },
        );
    }
    desc
}

/// Appends the FLOP entries of one full lifting layer to `desc`.
pub fn tlp_flop_desc(
    desc: &mut ModelDesc,
    component: &str,
    prefix: &str,
    channels: usize,
    config: &TlpConfig,
    t_out: usize,
) {
    let elems = channels * t_out;
    for net in ["predict", "update"] {
        desc.push(component, format!("{prefix}{net}.dw"), LayerDesc::Conv1d {
            in_channels: channels,
            out_channels: channels,
            kernel: config.kernel,
            groups: channels,
            out_len: t_out,
        });
        desc.push(component, format!("{prefix}{net}.relu"), LayerDesc::Elementwise { elements: elems });
        desc.push(component, format!("{prefix}{net}.pw"), LayerDesc::Conv1d {
            in_channels: channels,
            out_channels: channels,
            kernel: 1,
            groups: 1,
            out_len: t_out,
        });
        desc.push(component, format!("{prefix}{net}.tanh"), LayerDesc::Elementwise { elements: elems });
        // The lifting add/sub that consumes this net's output.
        desc.push(component, format!("{prefix}{net}.combine"), LayerDesc::Elementwise { elements: elems });
    }
    for gate in ["weight_s", "weight_d"] {
        desc.push(component, format!("{prefix}{gate}.conv"), LayerDesc::Conv1d {
            in_channels: channels,
            out_channels: channels,
            kernel: config.weighting_kernel,
            groups: 1,
            out_len: t_out,
        });
        desc.push(component, format!("{prefix}{gate}.norm"), LayerDesc::Elementwise { elements: elems });
        desc.push(component, format!("{prefix}{gate}.sigmoid"), LayerDesc::Elementwise { elements: elems });
        // offset, multiply, residual add
        desc.push(component, format!("{prefix}{gate}.residual"), LayerDesc::Elementwise { elements: 3 * elems });
    }
    match config.fusion {
        Fusion::Sum => {
            desc.push(component, format!("{prefix}fusion.sum"), LayerDesc::Elementwise { elements: elems });
        }
        Fusion::Concat => {}
        Fusion::Bottleneck => {
            desc.push(component, format!("{prefix}fusion.conv"), LayerDesc::Conv1d {
                in_channels: 2 * channels,
                out_channels: channels,
                kernel: 1,
                groups: 1,
                out_len: t_out,
            });
            desc.push(component, format!("{prefix}fusion.norm"), LayerDesc::Elementwise { elements: elems });
            desc.push(component, format!("{prefix}fusion.relu"), LayerDesc::Elementwise { elements: elems });
        }
    }
}
