//! Ordered, named collection of parameter tensors.
//!
//! The insertion order is the contract: optimizer state, checkpoints, and
//! tape bindings all address parameters by position.

use crate::error::{Error, Result};
use crate::signal::TemporalSignal;
use crate::tape::{Tape, ValueId};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    entries: Vec<(String, TemporalSignal)>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a tensor and returns its index. Names must be unique.
    pub fn push(&mut self, name: impl Into<String>, tensor: TemporalSignal) -> Result<usize> {
        let name = name.into();
        if self.entries.iter().any(|(n, _)| *n == name) {
            return Err(Error::usage(format!("duplicate parameter name '{name}'")));
        }
        self.entries.push((name, tensor));
        Ok(self.entries.len() - 1)
    }

    /// Moves every entry of `other` in, prefixing its names; returns the
    /// index range the entries received.
    pub fn append_prefixed(&mut self, prefix: &str, other: ParamSet) -> Result<std::ops::Range<usize>> {
        let start = self.entries.len();
        for (name, tensor) in other.entries {
            self.push(format!("{prefix}{name}"), tensor)?;
        }
        Ok(start..self.entries.len())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.entries[index].0
    }

    pub fn tensor(&self, index: usize) -> &TemporalSignal {
        &self.entries[index].1
    }

    pub fn tensor_mut(&mut self, index: usize) -> &mut TemporalSignal {
        &mut self.entries[index].1
    }

    pub fn by_name(&self, name: &str) -> Option<&TemporalSignal> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TemporalSignal)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn numel(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.numel()).sum()
    }

    /// Registers every tensor as a tape leaf, in order.
    pub fn bind(&self, tape: &mut Tape) -> Result<Vec<ValueId>> {
        self.entries
            .iter()
            .map(|(_, t)| tape.leaf(t.clone()))
            .collect()
    }

    /// Flattened copy of all tensors, in order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.numel());
        for (_, t) in &self.entries {
            out.extend_from_slice(t.data());
        }
        out
    }

    /// Writes a flat vector produced by `flatten` back into the tensors.
    pub fn unflatten(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.numel() {
            return Err(Error::shape(format!(
                "flat length {} does not match parameter count {}",
                flat.len(),
                self.numel()
            )));
        }
        let mut offset = 0;
        for (_, t) in &mut self.entries {
            let n = t.numel();
            t.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }
}
