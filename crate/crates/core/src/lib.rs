//! Temporal downsampling built on the lifting scheme.
//!
//! The crate provides a small reverse-mode autodiff core over
//! `(batch, channels, time)` signals, a family of stride-2 pooling layers
//! (max, average, Lp, mixed, stochastic, soft, and the learnable lifting
//! layer), exact FLOP accounting, and a synthetic-task harness for training
//! and comparing the methods under one roof.

pub mod bench;
pub mod checkpoint;
pub mod conv;
pub mod data;
pub mod error;
pub mod flops;
pub mod grad_check;
pub mod io;
pub mod model;
pub mod ops;
pub mod optim;
pub mod params;
pub mod pooling;
pub mod signal;
pub mod spectrum;
pub mod tape;
pub mod tlp;
pub mod train;
pub mod wer;

pub use conv::ConvParams;
pub use error::{Error, Result};
pub use ops::{Activation, NormKind};
pub use params::ParamSet;
pub use pooling::{Mode, PoolMethod};
pub use signal::TemporalSignal;
pub use tape::{Gradients, Tape, ValueId};
pub use tlp::{Fusion, TlpConfig, TlpParams};
