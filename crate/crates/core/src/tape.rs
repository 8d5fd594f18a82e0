//! Reverse-mode differentiation tape.
//!
//! Forward operations append one record each; `Tape::backward` replays the
//! records in reverse order and accumulates gradients additively at fan-out
//! points. `backward` consumes the tape, so a second reverse pass over the
//! same records cannot be expressed.

use crate::error::{Error, Result};
use crate::signal::TemporalSignal;

/// Handle to a value stored on a tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ValueId(pub(crate) usize);

/// One recorded operation. `backward` reads the upstream gradient of its
/// output and adds contributions to the gradients of its inputs.
pub trait TapeOp {
    fn backward(&self, ctx: &mut BackwardCtx<'_>);
}

pub struct BackwardCtx<'a> {
    values: &'a [TemporalSignal],
    grads: &'a mut [Vec<f64>],
}

impl BackwardCtx<'_> {
    #[inline]
    pub fn value(&self, id: ValueId) -> &TemporalSignal {
        &self.values[id.0]
    }

    /// Moves a gradient buffer out; callers must `restore_grad` it afterwards
    /// so later records (and the final report) still see it.
    #[inline]
    pub fn take_grad(&mut self, id: ValueId) -> Vec<f64> {
        std::mem::take(&mut self.grads[id.0])
    }

    #[inline]
    pub fn restore_grad(&mut self, id: ValueId, grad: Vec<f64>) {
        self.grads[id.0] = grad;
    }

    #[inline]
    pub fn grad_mut(&mut self, id: ValueId) -> &mut [f64] {
        &mut self.grads[id.0]
    }
}

#[derive(Default)]
pub struct Tape {
    values: Vec<TemporalSignal>,
    records: Vec<Box<dyn TapeOp>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an input or parameter. Leaves participate in gradient
    /// accumulation but have no producing record.
    pub fn leaf(&mut self, value: TemporalSignal) -> Result<ValueId> {
        value.ensure_finite("tape leaf")?;
        Ok(self.push_value(value))
    }

    pub(crate) fn push_value(&mut self, value: TemporalSignal) -> ValueId {
        let id = ValueId(self.values.len());
        self.values.push(value);
        id
    }

    /// Stores `value` and records the operation that produced it; the op is
    /// built after the output id is known.
    pub(crate) fn push_op(
        &mut self,
        value: TemporalSignal,
        make: impl FnOnce(ValueId) -> Box<dyn TapeOp>,
    ) -> ValueId {
        let id = self.push_value(value);
        let op = make(id);
        self.records.push(op);
        id
    }

    #[inline]
    pub fn value(&self, id: ValueId) -> &TemporalSignal {
        &self.values[id.0]
    }

    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    pub fn num_records(&self) -> usize {
        self.records.len()
    }

    /// Bytes held by stored values; a backward pass roughly doubles this.
    pub fn memory_bytes(&self) -> usize {
        self.values
            .iter()
            .map(|v| v.numel() * std::mem::size_of::<f64>())
            .sum()
    }

    /// Reverse pass seeded with `d loss / d loss = 1`. Consumes the tape.
    pub fn backward(self, loss: ValueId) -> Result<Gradients> {
        if self.records.is_empty() {
            return Err(Error::usage("backward on a tape with no recorded operations"));
        }
        if loss.0 >= self.values.len() {
            return Err(Error::usage("backward target is not a value on this tape"));
        }
        if self.values[loss.0].numel() != 1 {
            return Err(Error::usage(format!(
                "backward target must be scalar, got shape {:?}",
                self.values[loss.0].shape()
            )));
        }
        let mut grads: Vec<Vec<f64>> =
            self.values.iter().map(|v| vec![0.0; v.numel()]).collect();
        grads[loss.0][0] = 1.0;
        {
            let mut ctx = BackwardCtx {
                values: &self.values,
                grads: &mut grads,
            };
            for op in self.records.iter().rev() {
                op.backward(&mut ctx);
            }
        }
        let grads = self
            .values
            .iter()
            .zip(grads)
            .map(|(v, g)| {
                let (b, c, t) = v.shape();
                TemporalSignal::new(b, c, t, g).expect("gradient buffer matches value shape")
            })
            .collect();
        Ok(Gradients {
            values: self.values,
            grads,
        })
    }
}

/// Result of a reverse pass: every tape value with its gradient.
#[derive(Debug)]
pub struct Gradients {
    values: Vec<TemporalSignal>,
    grads: Vec<TemporalSignal>,
}

impl Gradients {
    pub fn grad(&self, id: ValueId) -> &TemporalSignal {
        &self.grads[id.0]
    }

    pub fn value(&self, id: ValueId) -> &TemporalSignal {
        &self.values[id.0]
    }
}
