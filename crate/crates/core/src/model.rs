//! A small sequence classifier used to compare temporal downsamplers.
//!
//! Layout: conv -> ReLU -> pool -> conv -> ReLU -> pool -> global average ->
//! linear head. Each of the two pool slots halves the time axis and is filled
//! either by a fixed/learned baseline or by a lifting layer, so swapping the
//! downsampler is the only difference between runs.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde_json::{json, Value};

use crate::checkpoint::Checkpoint;
use crate::conv::ConvParams;
use crate::error::{Error, Result};
use crate::flops::{LayerDesc, ModelDesc};
use crate::params::ParamSet;
use crate::pooling::{Mode, PoolMethod};
use crate::signal::TemporalSignal;
use crate::tape::{Tape, ValueId};
use crate::tlp::{tlp_flop_desc, tlp_forward, TlpBound, TlpConfig, TlpParams};

/// What fills a pool slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PoolSpec {
    Baseline(PoolMethod),
    Tlp,
}

impl FromStr for PoolSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "tlp" {
            Ok(Self::Tlp)
        } else {
            Ok(Self::Baseline(s.parse()?))
        }
    }
}

impl fmt::Display for PoolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Baseline(m) => m.fmt(f),
            Self::Tlp => f.write_str("tlp"),
        }
    }
}

/// Which of the two pool slots use the selected method; the rest fall back
/// to max pooling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Both,
    First,
    Second,
    None,
}

impl Placement {
    pub fn covers(self, slot: usize) -> bool {
        match self {
            Self::Both => true,
            Self::First => slot == 0,
            Self::Second => slot == 1,
            Self::None => false,
        }
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(Self::Both),
            "first" => Ok(Self::First),
            "second" => Ok(Self::Second),
            "none" => Ok(Self::None),
            other => Err(Error::usage(format!(
                "unknown placement '{other}' (expected both, first, second, or none)"
            ))),
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Both => "both",
            Self::First => "first",
            Self::Second => "second",
            Self::None => "none",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ModelConfig {
    pub in_channels: usize,
    pub hidden: usize,
    pub classes: usize,
    /// Backbone conv kernel; must be odd.
    pub kernel: usize,
    pub pool: PoolSpec,
    pub placement: Placement,
    pub tlp: TlpConfig,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            in_channels: crate::data::DEFAULT_CHANNELS,
            hidden: 8,
            classes: crate::data::NUM_CLASSES,
            kernel: 5,
            pool: PoolSpec::Baseline(PoolMethod::Max),
            placement: Placement::Both,
            tlp: TlpConfig::default(),
            seed: 0,
        }
    }
}

impl ModelConfig {
    /// Effective spec for a slot after applying the placement mask.
    pub fn slot_spec(&self, slot: usize) -> PoolSpec {
        if self.placement.covers(slot) {
            self.pool
        } else {
            PoolSpec::Baseline(PoolMethod::Max)
        }
    }

    /// Channel count leaving a slot (concat fusion doubles it).
    fn slot_out_channels(&self, slot: usize) -> usize {
        match self.slot_spec(slot) {
            PoolSpec::Tlp if self.tlp.fusion == crate::tlp::Fusion::Concat => 2 * self.hidden,
            _ => self.hidden,
        }
    }
}

/// The classifier: a flat parameter set plus the config that shaped it.
/// Slot parameters live under `pool1.` / `pool2.` prefixes.
pub struct SequenceModel {
    pub cfg: ModelConfig,
    pub params: ParamSet,
}

/// Handles produced by one forward pass.
pub struct ModelOut {
    pub logits: ValueId,
    /// One `(c_u, c_p)` pair per lifting slot, in slot order.
    pub tlp_losses: Vec<(ValueId, ValueId)>,
    /// Leaf ids aligned with `params` order, for gradient collection.
    pub param_ids: Vec<ValueId>,
}

pub fn build_model(cfg: ModelConfig) -> Result<SequenceModel> {
    if cfg.in_channels == 0 || cfg.hidden == 0 {
        return Err(Error::config("channel widths must be positive"));
    }
    if cfg.classes < 2 {
        return Err(Error::config("need at least two classes"));
    }
    if cfg.kernel == 0 || cfg.kernel % 2 == 0 {
        return Err(Error::config(format!("backbone kernel must be odd, got {}", cfg.kernel)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ParamSet::new();

    let push_conv = |params: &mut ParamSet,
                         name: &str,
                         c_in: usize,
                         c_out: usize,
                         k: usize,
                         rng: &mut ChaCha8Rng|
     -> Result<()> {
        let conv = ConvParams::init(c_in, c_out, k, 1, rng)?;
        params.push(format!("{name}.weight"), conv.weight)?;
        params.push(format!("{name}.bias"), conv.bias)?;
        Ok(())
    };

    push_conv(&mut params, "conv1", cfg.in_channels, cfg.hidden, cfg.kernel, &mut rng)?;
    for slot in 0..2 {
        match cfg.slot_spec(slot) {
            PoolSpec::Tlp => {
                let tlp = TlpParams::init(cfg.hidden, cfg.tlp, &mut rng)?;
                params.append_prefixed(&format!("pool{}.", slot + 1), tlp.params)?;
            }
            PoolSpec::Baseline(m) if m.has_blend() => {
                params.push(format!("pool{}.blend", slot + 1), TemporalSignal::scalar(0.0))?;
            }
            PoolSpec::Baseline(_) => {}
        }
        if slot == 0 {
            push_conv(&mut params, "conv2", cfg.slot_out_channels(0), cfg.hidden, cfg.kernel, &mut rng)?;
        }
    }
    push_conv(&mut params, "head", cfg.slot_out_channels(1), cfg.classes, 1, &mut rng)?;

    Ok(SequenceModel { cfg, params })
}

impl SequenceModel {
    fn id_of(&self, ids: &[ValueId], name: &str) -> Result<ValueId> {
        self.params
            .index_of(name)
            .map(|i| ids[i])
            .ok_or_else(|| Error::usage(format!("model has no parameter '{name}'")))
    }

    fn pool_slot(
        &self,
        tape: &mut Tape,
        ids: &[ValueId],
        slot: usize,
        h: ValueId,
        mode: Mode,
        rng: Option<&mut dyn RngCore>,
        losses: &mut Vec<(ValueId, ValueId)>,
    ) -> Result<ValueId> {
        let prefix = format!("pool{}.", slot + 1);
        match self.cfg.slot_spec(slot) {
            PoolSpec::Tlp => {
                let bound = TlpBound::from_ids(
                    self.cfg.hidden,
                    self.cfg.tlp,
                    &self.params,
                    ids.to_vec(),
                    &prefix,
                )?;
                let out = tlp_forward(tape, &bound, h)?;
                losses.push((out.c_u, out.c_p));
                Ok(out.y)
            }
            PoolSpec::Baseline(m) => {
                let blend = if m.has_blend() {
                    Some(self.id_of(ids, &format!("{prefix}blend"))?)
                } else {
                    None
                };
                tape.pool_apply(&m, h, mode, rng, blend)
            }
        }
    }

    /// Runs the classifier. `rng` is only consulted by stochastic pooling in
    /// training mode; both slots draw from the same stream in slot order.
    pub fn forward(
        &self,
        tape: &mut Tape,
        x: ValueId,
        mode: Mode,
        mut rng: Option<&mut dyn RngCore>,
    ) -> Result<ModelOut> {
        if tape.value(x).channels() != self.cfg.in_channels {
            return Err(Error::shape(format!(
                "model expects {} input channels, got {}",
                self.cfg.in_channels,
                tape.value(x).channels()
            )));
        }
        let ids = self.params.bind(tape)?;
        let mut losses = Vec::new();
        // Reborrow so both slots can draw from the same caller-owned stream.
        fn reborrow<'a>(rng: &'a mut Option<&mut dyn RngCore>) -> Option<&'a mut dyn RngCore> {
            rng.as_mut().map(|r| &mut **r as &mut dyn RngCore)
        }

        let mut h = tape.conv1d(x, self.id_of(&ids, "conv1.weight")?, self.id_of(&ids, "conv1.bias")?, 1)?;
        h = tape.relu(h);
        h = self.pool_slot(tape, &ids, 0, h, mode, reborrow(&mut rng), &mut losses)?;
        h = tape.conv1d(h, self.id_of(&ids, "conv2.weight")?, self.id_of(&ids, "conv2.bias")?, 1)?;
        h = tape.relu(h);
        h = self.pool_slot(tape, &ids, 1, h, mode, reborrow(&mut rng), &mut losses)?;
        let g = tape.global_avg_time(h);
        let logits = tape.conv1d(g, self.id_of(&ids, "head.weight")?, self.id_of(&ids, "head.bias")?, 1)?;

        Ok(ModelOut { logits, tlp_losses: losses, param_ids: ids })
    }

    /// FLOP model of one forward pass at input length `t_in`, batch size one.
    /// Backbone layers land in the `backbone` component, each pool slot in
    /// its own `pool1` / `pool2` component.
    pub fn flop_desc(&self, t_in: usize) -> ModelDesc {
        let mut desc = ModelDesc::new("sequence-classifier");
        let h = self.cfg.hidden;
        let t1 = t_in;
        desc.push("backbone", "conv1", LayerDesc::Conv1d {
            in_channels: self.cfg.in_channels,
            out_channels: h,
            kernel: self.cfg.kernel,
            groups: 1,
            out_len: t1,
        });
        desc.push("backbone", "relu1", LayerDesc::Elementwise { elements: h * t1 });
        let t2 = t1.div_ceil(2);
        self.slot_flops(&mut desc, 0, t2);
        let c2_in = self.cfg.slot_out_channels(0);
        desc.push("backbone", "conv2", LayerDesc::Conv1d {
            in_channels: c2_in,
            out_channels: h,
            kernel: self.cfg.kernel,
            groups: 1,
            out_len: t2,
        });
        desc.push("backbone", "relu2", LayerDesc::Elementwise { elements: h * t2 });
        let t3 = t2.div_ceil(2);
        self.slot_flops(&mut desc, 1, t3);
        let c_head = self.cfg.slot_out_channels(1);
        desc.push("backbone", "gap", LayerDesc::Elementwise { elements: c_head * t3 });
        desc.push("backbone", "head", LayerDesc::Conv1d {
            in_channels: c_head,
            out_channels: self.cfg.classes,
            kernel: 1,
            groups: 1,
            out_len: 1,
        });
        desc
    }

    fn slot_flops(&self, desc: &mut ModelDesc, slot: usize, t_out: usize) {
        let component = format!("pool{}", slot + 1);
        match self.cfg.slot_spec(slot) {
            PoolSpec::Tlp => {
                let prefix = format!("pool{}.", slot + 1);
                tlp_flop_desc(desc, &component, &prefix, self.cfg.hidden, &self.cfg.tlp, t_out);
            }
            PoolSpec::Baseline(_) => {
                desc.push(&component, format!("pool{}", slot + 1), LayerDesc::Elementwise {
                    elements: self.cfg.hidden * t_out,
                });
            }
        }
    }

    /// Serializes the full parameter set plus enough metadata to rebuild.
    pub fn to_checkpoint(&self, alpha_u: f64, alpha_p: f64) -> Result<Checkpoint> {
        let mut ck = Checkpoint::from_params(&self.cfg.tlp, &self.params, alpha_u, alpha_p)?;
        ck.meta.insert("kind".into(), json!("sequence-classifier"));
        ck.meta.insert("pool".into(), json!(self.cfg.pool.to_string()));
        ck.meta.insert("placement".into(), json!(self.cfg.placement.to_string()));
        ck.meta.insert("in_channels".into(), json!(self.cfg.in_channels));
        ck.meta.insert("hidden".into(), json!(self.cfg.hidden));
        ck.meta.insert("classes".into(), json!(self.cfg.classes));
        ck.meta.insert("kernel".into(), json!(self.cfg.kernel));
        ck.meta.insert("seed".into(), json!(self.cfg.seed));
        Ok(ck)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<SequenceModel> {
        let get = |key: &str| -> Result<&Value> {
            ck.meta
                .get(key)
                .ok_or_else(|| Error::format(format!("checkpoint metadata is missing '{key}'")))
        };
        let get_usize = |key: &str| -> Result<usize> {
            get(key)?
                .as_u64()
                .map(|v| v as usize)
                .ok_or_else(|| Error::format(format!("checkpoint metadata '{key}' is not an integer")))
        };
        let get_str = |key: &str| -> Result<&str> {
            get(key)?
                .as_str()
                .ok_or_else(|| Error::format(format!("checkpoint metadata '{key}' is not a string")))
        };
        if get_str("kind")? != "sequence-classifier" {
            return Err(Error::format(format!(
                "checkpoint holds a '{}' model, not a sequence-classifier",
                get_str("kind")?
            )));
        }
        let cfg = ModelConfig {
            in_channels: get_usize("in_channels")?,
            hidden: get_usize("hidden")?,
            classes: get_usize("classes")?,
            kernel: get_usize("kernel")?,
            pool: get_str("pool")?.parse()?,
            placement: get_str("placement")?.parse()?,
            tlp: ck.config()?,
            seed: get("seed")?
                .as_u64()
                .ok_or_else(|| Error::format("checkpoint metadata 'seed' is not an integer"))?,
        };
        let skeleton = build_model(cfg)?;
        let names: Vec<String> = skeleton.params.iter().map(|(n, _)| n.to_string()).collect();
        let params = ck.params_in_order(&names)?;
        for (i, (name, loaded)) in params.iter().enumerate() {
            let expect = skeleton.params.tensor(i);
            if loaded.shape() != expect.shape() {
                return Err(Error::format(format!(
                    "parameter '{name}' has shape {:?}, expected {:?}",
                    loaded.shape(),
                    expect.shape()
                )));
            }
        }
        Ok(SequenceModel { cfg, params })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tlp::Fusion;

    fn tiny(pool: PoolSpec, placement: Placement) -> ModelConfig {
        ModelConfig { pool, placement, ..ModelConfig::default() }
    }

    fn run(model: &SequenceModel, batch: usize, t: usize) -> (Vec<f64>, usize) {
        let mut tape = Tape::new();
        let x = tape
            .leaf(TemporalSignal::from_fn(batch, model.cfg.in_channels, t, |n, c, i| {
                ((n + c + i) as f64 * 0.37).sin()
            }))
            .unwrap();
        let out = model.forward(&mut tape, x, Mode::Eval, None).unwrap();
        let logits = tape.value(out.logits);
        assert_eq!(logits.shape(), (batch, model.cfg.classes, 1));
        (logits.data().to_vec(), out.tlp_losses.len())
    }

    #[test]
    fn max_model_params_and_forward() {
        let model = build_model(tiny(PoolSpec::Baseline(PoolMethod::Max), Placement::Both)).unwrap();
        // conv1 2->8 k5, conv2 8->8 k5, head 8->4 k1, plus biases.
        assert_eq!(model.params.numel(), 80 + 8 + 320 + 8 + 32 + 4);
        let (logits, n_losses) = run(&model, 3, 16);
        assert_eq!(n_losses, 0);
        assert!(logits.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn seeded_build_is_deterministic() {
        let a = build_model(ModelConfig::default()).unwrap();
        let b = build_model(ModelConfig::default()).unwrap();
        for ((_, x), (_, y)) in a.params.iter().zip(b.params.iter()) {
            assert_eq!(x.data(), y.data());
        }
        let c = build_model(ModelConfig { seed: 1, ..ModelConfig::default() }).unwrap();
        assert_ne!(a.params.tensor(0).data(), c.params.tensor(0).data());
    }

    #[test]
    fn tlp_slots_report_losses() {
        let model = build_model(tiny(PoolSpec::Tlp, Placement::Both)).unwrap();
        let (_, n) = run(&model, 2, 20);
        assert_eq!(n, 2);
        let first_only = build_model(tiny(PoolSpec::Tlp, Placement::First)).unwrap();
        assert_eq!(run(&first_only, 1, 20).1, 1);
        let none = build_model(tiny(PoolSpec::Tlp, Placement::None)).unwrap();
        assert_eq!(run(&none, 1, 20).1, 0);
        // Unplaced slots fall back to max pooling, so the param set shrinks.
        assert!(none.params.numel() < first_only.params.numel());
    }

    #[test]
    fn concat_fusion_widens_inner_channels() {
        let cfg = ModelConfig {
            pool: PoolSpec::Tlp,
            tlp: TlpConfig { fusion: Fusion::Concat, ..TlpConfig::default() },
            ..ModelConfig::default()
        };
        let model = build_model(cfg).unwrap();
        let w2 = model.params.by_name("conv2.weight").unwrap();
        assert_eq!(w2.channels(), 16);
        run(&model, 2, 24);
    }

    #[test]
    fn blend_param_only_when_mixed_placed(){
        let mixed = build_model(tiny(PoolSpec::Baseline(PoolMethod::Mixed), Placement::Second)).unwrap();
        assert!(mixed.params.by_name("pool2.blend").is_some());
        assert!(mixed.params.by_name("pool1.blend").is_none());
        run(&mixed, 2, 16);
        let max = build_model(tiny(PoolSpec::Baseline(PoolMethod::Max), Placement::Both)).unwrap();
        assert!(max.params.by_name("pool1.blend").is_none());
    }

    #[test]
    fn odd_lengths_pool_to_ceil_halves() {
        let model = build_model(ModelConfig::default()).unwrap();
        let mut tape = Tape::new();
        let x = tape.leaf(TemporalSignal::filled(1, 2, 13, 0.5)).unwrap();
        let out = model.forward(&mut tape, x, Mode::Eval, None).unwrap();
        assert_eq!(tape.value(out.logits).shape(), (1, 4, 1));
    }

    #[test]
    fn checkpoint_roundtrip_preserves_everything() {
        let model = build_model(tiny(PoolSpec::Tlp, Placement::Both)).unwrap();
        let ck = model.to_checkpoint(1e-3, 1e-3).unwrap();
        let back = SequenceModel::from_checkpoint(&ck).unwrap();
        assert_eq!(back.params.len(), model.params.len());
        for ((n1, t1), (n2, t2)) in model.params.iter().zip(back.params.iter()) {
            assert_eq!(n1, n2);
            assert_eq!(t1.data(), t2.data());
        }
        let (a, _) = run(&model, 2, 16);
        let (b, _) = run(&back, 2, 16);
        assert_eq!(a, b);
    }

    #[test]
    fn checkpoint_rejects_missing_metadata() {
        let model = build_model(ModelConfig::default()).unwrap();
        let mut ck = model.to_checkpoint(0.0, 0.0).unwrap();
        ck.meta.remove("hidden");
        assert!(SequenceModel::from_checkpoint(&ck).is_err());
    }

    #[test]
    fn flop_desc_components() {
        let max = build_model(tiny(PoolSpec::Baseline(PoolMethod::Max), Placement::Both)).unwrap();
        let tlp = build_model(tiny(PoolSpec::Tlp, Placement::Both)).unwrap();
        let rf = crate::flops::count_flops(&max.flop_desc(128)).unwrap();
        let rt = crate::flops::count_flops(&tlp.flop_desc(128)).unwrap();
        assert!(rt.total_flops > rf.total_flops);
        assert_eq!(rf.component_flops("backbone"), rt.component_flops("backbone"));
        assert!(rt.component_flops("pool1") > rt.component_flops("pool2"));
    }

    #[test]
    fn rejects_bad_configs_and_inputs() {
        assert!(build_model(ModelConfig { hidden: 0, ..ModelConfig::default() }).is_err());
        assert!(build_model(ModelConfig { classes: 1, ..ModelConfig::default() }).is_err());
        assert!(build_model(ModelConfig { kernel: 4, ..ModelConfig::default() }).is_err());
        let model = build_model(ModelConfig::default()).unwrap();
        let mut tape = Tape::new();
        let x = tape.leaf(TemporalSignal::filled(1, 3, 16, 0.0)).unwrap();
        assert!(model.forward(&mut tape, x, Mode::Eval, None).is_err());
    }

    #[test]
    fn pool_spec_parses() {
        assert_eq!("tlp".parse::<PoolSpec>().unwrap(), PoolSpec::Tlp);
        assert_eq!(
            "lp:3".parse::<PoolSpec>().unwrap(),
            PoolSpec::Baseline(PoolMethod::Lp { p: 3.0 })
        );
        assert!("bogus".parse::<PoolSpec>().is_err());
        assert_eq!(PoolSpec::Tlp.to_string(), "tlp");
        assert_eq!("second".parse::<Placement>().unwrap(), Placement::Second);
        assert!("middle".parse::<Placement>().is_err());
    }
}
