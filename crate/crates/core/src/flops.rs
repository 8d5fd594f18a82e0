//! Exact integer FLOP accounting for model descriptions.
//!
//! Convolutions count `kernel * (in/groups) * out * t_out` multiply-
//! accumulates at 2 FLOPs each (bias excluded); activations, normalizations,
//! pooling, and elementwise ops count one FLOP per produced element.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerDesc {
    Conv1d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        groups: usize,
        out_len: usize,
    },
    /// Anything costing one FLOP per output element.
    Elementwise { elements: usize },
}

impl LayerDesc {
    pub fn macs(&self) -> u64 {
        match *self {
            LayerDesc::Conv1d { in_channels, out_channels, kernel, groups, out_len } => {
                (kernel as u64)
                    * (in_channels / groups) as u64
                    * out_channels as u64
                    * out_len as u64
            }
            LayerDesc::Elementwise { .. } => 0,
        }
    }

    pub fn flops(&self) -> u64 {
        match *self {
            LayerDesc::Conv1d { .. } => 2 * self.macs(),
            LayerDesc::Elementwise { elements } => elements as u64,
        }
    }

    fn validate(&self) -> Result<()> {
        if let LayerDesc::Conv1d { in_channels, out_channels, groups, kernel, .. } = *self {
            if groups == 0 {
                return Err(Error::config("conv layer groups must be positive"));
            }
            if in_channels % groups != 0 || out_channels % groups != 0 {
                return Err(Error::config(format!(
                    "groups {groups} must divide channels {in_channels} -> {out_channels}"
                )));
            }
            if kernel == 0 {
                return Err(Error::config("conv layer kernel must be positive"));
            }
        }
        Ok(())
    }
}

/// One named layer attributed to a named component of the pipeline.
#[derive(Clone, Debug)]
pub struct LayerEntry {
    pub name: String,
    pub component: String,
    pub desc: LayerDesc,
}

#[derive(Clone, Debug, Default)]
pub struct ModelDesc {
    pub name: String,
    pub layers: Vec<LayerEntry>,
}

impl ModelDesc {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), layers: Vec::new() }
    }

    pub fn push(
        &mut self,
        component: impl Into<String>,
        name: impl Into<String>,
        desc: LayerDesc,
    ) {
        self.layers.push(LayerEntry {
            name: name.into(),
            component: component.into(),
            desc,
        });
    }
}

#[derive(Clone, Debug)]
pub struct LayerFlops {
    pub name: String,
    pub component: String,
    pub macs: u64,
    pub flops: u64,
}

#[derive(Clone, Debug, Default)]
pub struct FlopReport {
    pub model: String,
    pub layers: Vec<LayerFlops>,
    /// Component subtotals in first-appearance order.
    pub components: Vec<(String, u64)>,
    pub total_macs: u64,
    pub total_flops: u64,
}

impl FlopReport {
    pub fn component_flops(&self, component: &str) -> u64 {
        self.components
            .iter()
            .find(|(name, _)| name == component)
            .map(|(_, f)| *f)
            .unwrap_or(0)
    }

    pub fn component_macs(&self, component: &str) -> u64 {
        self.layers
            .iter()
            .filter(|l| l.component == component)
            .map(|l| l.macs)
            .sum()
    }
}

/// Static FLOP count for one forward pass of the described model.
pub fn count_flops(desc: &ModelDesc) -> Result<FlopReport> {
    let mut report = FlopReport {
        model: desc.name.clone(),
        ..FlopReport::default()
    };
    for layer in &desc.layers {
        layer.desc.validate()?;
        let macs = layer.desc.macs();
        let flops = layer.desc.flops();
        report.layers.push(LayerFlops {
            name: layer.name.clone(),
            component: layer.component.clone(),
            macs,
            flops,
        });
        match report.components.iter_mut().find(|(n, _)| *n == layer.component) {
            Some((_, f)) => *f += flops,
            None => report.components.push((layer.component.clone(), flops)),
        }
        report.total_macs += macs;
        report.total_flops += flops;
    }
    Ok(report)
}
