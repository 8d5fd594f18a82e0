//! JSON checkpoints with bit-exact float round-trips.
//!
//! Parameter tensors serialize as triple-nested arrays in `(batch, channel,
//! time)` order. Floats are written in shortest round-trip decimal form, so
//! save followed by load reproduces every bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::params::ParamSet;
use crate::signal::TemporalSignal;
use crate::tlp::{Fusion, TlpConfig, TlpParams};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    /// Depthwise kernel of the lifting sub-networks.
    pub k: usize,
    pub fusion: String,
    pub weighting_kernel: usize,
    pub alpha_u: f64,
    pub alpha_p: f64,
    /// Model-level metadata (pool spec, channel widths, task, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, Value>,
    /// Named tensors as nested `[batch][channel][time]` arrays.
    pub params: BTreeMap<String, Value>,
}

fn tensor_to_value(t: &TemporalSignal) -> Result<Value> {
    t.ensure_finite("checkpoint tensor")?;
    let (nb, c, _) = t.shape();
    let mut batches = Vec::with_capacity(nb);
    for n in 0..nb {
        let mut channels = Vec::with_capacity(c);
        for ch in 0..c {
            let row: Vec<Value> = t
                .row(n, ch)
                .iter()
                .map(|&v| serde_json::Number::from_f64(v).map(Value::Number))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::numeric("non-finite value in checkpoint tensor"))?;
            channels.push(Value::Array(row));
        }
        batches.push(Value::Array(channels));
    }
    Ok(Value::Array(batches))
}

fn tensor_from_value(name: &str, v: &Value) -> Result<TemporalSignal> {
    let bad = || Error::format(format!("parameter '{name}' is not a [batch][channel][time] array"));
    let batches = v.as_array().ok_or_else(bad)?;
    let mut data = Vec::new();
    let mut channels = None;
    let mut len = None;
    for b in batches {
        let chans = b.as_array().ok_or_else(bad)?;
        match channels {
            None => channels = Some(chans.len()),
            Some(c) if c == chans.len() => {}
            _ => return Err(bad()),
        }
        for ch in chans {
            let row = ch.as_array().ok_or_else(bad)?;
            match len {
                None => len = Some(row.len()),
                Some(l) if l == row.len() => {}
                _ => return Err(bad()),
            }
            for value in row {
                let f = value.as_f64().ok_or_else(bad)?;
                if !f.is_finite() {
                    return Err(Error::format(format!("parameter '{name}' has a non-finite entry")));
                }
                data.push(f);
            }
        }
    }
    let nb = batches.len();
    let c = channels.unwrap_or(0);
    let l = len.unwrap_or(0);
    TemporalSignal::new(nb, c, l, data)
        .map_err(|_| Error::format(format!("parameter '{name}' has inconsistent dimensions")))
}

impl Checkpoint {
    pub fn from_params(
        config: &TlpConfig,
        params: &ParamSet,
        alpha_u: f64,
        alpha_p: f64,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (name, tensor) in params.iter() {
            map.insert(name.to_string(), tensor_to_value(tensor)?);
        }
        Ok(Self {
            format_version: FORMAT_VERSION,
            k: config.kernel,
            fusion: config.fusion.to_string(),
            weighting_kernel: config.weighting_kernel,
            alpha_u,
            alpha_p,
            meta: BTreeMap::new(),
            params: map,
        })
    }

    pub fn config(&self) -> Result<TlpConfig> {
        Ok(TlpConfig {
            kernel: self.k,
            weighting_kernel: self.weighting_kernel,
            fusion: self.fusion.parse::<Fusion>()?,
        })
    }

    /// Rebuilds a named tensor set; `want` lists the expected names in
    /// their canonical order (checkpoint JSON sorts keys alphabetically).
    pub fn params_in_order(&self, want: &[String]) -> Result<ParamSet> {
        let mut set = ParamSet::new();
        for name in want {
            let value = self
                .params
                .get(name)
                .ok_or_else(|| Error::format(format!("checkpoint is missing parameter '{name}'")))?;
            set.push(name.clone(), tensor_from_value(name, value)?)?;
        }
        if self.params.len() != want.len() {
            let extra: Vec<&String> = self
                .params
                .keys()
                .filter(|k| !want.iter().any(|w| w == *k))
                .collect();
            return Err(Error::format(format!("checkpoint has unexpected parameters {extra:?}")));
        }
        Ok(set)
    }

    /// Interprets the checkpoint as one standalone lifting layer, stripping
    /// `prefix` from parameter names (empty for standalone checkpoints).
    pub fn tlp_params(&self, prefix: &str) -> Result<TlpParams> {
        let config = self.config()?;
        let subset: Vec<(String, &Value)> = self
            .params
            .iter()
            .filter(|(name, _)| name.starts_with(prefix))
            .map(|(name, value)| (name[prefix.len()..].to_string(), value))
            .collect();
        if subset.is_empty() {
            return Err(Error::format(format!(
                "checkpoint holds no parameters under prefix '{prefix}'"
            )));
        }
        let mut set = ParamSet::new();
        let channels = subset
            .iter()
            .find(|(name, _)| name == "predict.dw.weight")
            .map(|(name, value)| Ok(tensor_from_value(name, value)?.batch()))
            .unwrap_or_else(|| {
                Err(Error::format(format!(
                    "checkpoint lacks 'predict.dw.weight' under prefix '{prefix}'"
                )))
            })?;
        // Canonical order, mirroring initialization.
        let mut want: Vec<String> = Vec::new();
        for net in ["predict", "update"] {
            for leaf in ["dw.weight", "dw.bias", "pw.weight", "pw.bias"] {
                want.push(format!("{net}.{leaf}"));
            }
        }
        for gate in ["weight_s", "weight_d"] {
            for leaf in ["conv.weight", "conv.bias", "norm.gamma", "norm.beta"] {
                want.push(format!("{gate}.{leaf}"));
            }
        }
        if config.fusion == Fusion::Bottleneck {
            for leaf in ["conv.weight", "conv.bias", "norm.gamma", "norm.beta"] {
                want.push(format!("fusion.{leaf}"));
            }
        }
        for name in &want {
            let value = subset
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| {
                    Error::format(format!("checkpoint is missing parameter '{prefix}{name}'"))
                })?;
            set.push(name.clone(), tensor_from_value(name, value)?)?;
        }
        Ok(TlpParams { channels, config, params: set })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::format(format!("checkpoint serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)
            .map_err(|e| Error::format(format!("bad checkpoint JSON: {e}")))?;
        if ck.format_version != FORMAT_VERSION {
            return Err(Error::format(format!(
                "unsupported checkpoint format_version {} (expected {FORMAT_VERSION})",
                ck.format_version
            )));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_json(&text)
    }
}
