//! Operator benchmarking: analytic FLOP reports, a working-set estimate,
//! and (separately) wall-clock throughput.
//!
//! The report splits in two on purpose. Everything in [`BenchReport`] is a
//! pure function of the configuration, so repeated runs are byte-identical
//! and diffable. Wall-clock numbers live in [`TimingReport`], which is
//! machine- and load-dependent by nature and is written as a log, not as a
//! data artifact.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flops::{count_flops, LayerDesc, ModelDesc};
use crate::model::{build_model, ModelConfig, PoolSpec};
use crate::pooling::Mode;
use crate::signal::TemporalSignal;
use crate::tape::Tape;

/// Settings for both report halves.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    /// Pool specs to profile, e.g. `["max", "avg", "tlp"]`.
    pub specs: Vec<String>,
    pub t: usize,
    pub batch: usize,
    pub in_channels: usize,
    pub hidden: usize,
    pub classes: usize,
    /// Timed repetitions; the median is reported.
    pub reps: usize,
    /// Untimed runs before the clock starts.
    pub warmups: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            specs: ["max", "avg", "lp:2", "mixed", "stochastic", "soft", "tlp"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            t: crate::data::DEFAULT_LEN,
            batch: 32,
            in_channels: crate::data::DEFAULT_CHANNELS,
            hidden: 8,
            classes: crate::data::NUM_CLASSES,
            reps: 5,
            warmups: 2,
            seed: 0,
        }
    }
}

/// Deterministic per-method numbers at batch size one.
#[derive(Clone, Debug, Serialize)]
pub struct MethodProfile {
    pub spec: String,
    pub param_count: usize,
    pub total_macs: u64,
    pub total_flops: u64,
    /// FLOPs attributed to the two pool slots alone.
    pub pool_flops: u64,
    /// Estimated peak working set of one training step at the configured
    /// batch: forward values + a same-sized gradient arena + parameters with
    /// their two Adam moment buffers.
    pub peak_bytes: usize,
}

/// How much the lifting layers add on top of a max-pooling shell, both
/// relative to the small classifier head itself and relative to a reference
/// pipeline whose per-frame encoder dwarfs the head (the usual deployment
/// shape for temporal pooling).
#[derive(Clone, Debug, Serialize)]
pub struct OverheadReport {
    pub max_head_flops: u64,
    pub tlp_head_flops: u64,
    pub added_flops: u64,
    pub added_pct_of_head: f64,
    /// FLOPs of the stand-in per-frame encoder (three pointwise conv layers,
    /// width 256, run at full temporal resolution).
    pub frontend_flops: u64,
    pub added_pct_of_pipeline: f64,
}

/// Accuracy over seeds, mean and population standard deviation.
#[derive(Clone, Debug, Serialize)]
pub struct AccuracySummary {
    pub spec: String,
    pub seeds: Vec<u64>,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl AccuracySummary {
    pub fn new(spec: impl Into<String>, runs: &[(u64, f64)]) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::usage("accuracy summary needs at least one run"));
        }
        let seeds: Vec<u64> = runs.iter().map(|r| r.0).collect();
        let accuracies: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let n = accuracies.len() as f64;
        let mean = accuracies.iter().sum::<f64>() / n;
        let var = accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        Ok(Self { spec: spec.into(), seeds, accuracies, mean, std: var.sqrt() })
    }
}

/// The deterministic half: identical bytes on every run with the same config.
#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub t: usize,
    pub batch: usize,
    pub in_channels: usize,
    pub hidden: usize,
    pub classes: usize,
    pub seed: u64,
    pub methods: Vec<MethodProfile>,
    /// Present when both `max` and `tlp` are profiled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overhead: Option<OverheadReport>,
    /// Filled by callers that ran trained comparisons (one entry per spec).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub accuracy: Vec<AccuracySummary>,
}

/// Wall-clock half; varies run to run.
#[derive(Clone, Debug, Serialize)]
pub struct TimingEntry {
    pub spec: String,
    pub median_batch_secs: f64,
    pub sequences_per_sec: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TimingReport {
    pub batch: usize,
    pub reps: usize,
    pub warmups: usize,
    pub entries: Vec<TimingEntry>,
}

fn model_for(cfg: &BenchConfig, spec: &str) -> Result<crate::model::SequenceModel> {
    let pool: PoolSpec = spec.parse()?;
    build_model(ModelConfig {
        in_channels: cfg.in_channels,
        hidden: cfg.hidden,
        classes: cfg.classes,
        pool,
        seed: cfg.seed,
        ..ModelConfig::default()
    })
}

/// Stand-in per-frame encoder: pointwise conv stack `in -> w -> w -> w`
/// at full length, the part of a real pipeline that pooling never touches.
pub fn frontend_desc(in_channels: usize, t: usize) -> ModelDesc {
    const WIDTH: usize = 256;
    let mut desc = ModelDesc::new("frontend");
    let mut c_in = in_channels;
    for i in 0..3 {
        desc.push("frontend", format!("enc{i}"), LayerDesc::Conv1d {
            in_channels: c_in,
            out_channels: WIDTH,
            kernel: 1,
            groups: 1,
            out_len: t,
        });
        desc.push("frontend", format!("enc{i}.relu"), LayerDesc::Elementwise {
            elements: WIDTH * t,
        });
        c_in = WIDTH;
    }
    desc
}

/// One eval forward at the configured batch, for the memory estimate.
fn peak_bytes(cfg: &BenchConfig, model: &crate::model::SequenceModel) -> Result<usize> {
    let mut tape = Tape::new();
    let x = tape.leaf(TemporalSignal::from_fn(cfg.batch, cfg.in_channels, cfg.t, |n, c, i| {
        ((n * 31 + c * 7 + i) as f64 * 0.11).sin()
    }))?;
    model.forward(&mut tape, x, Mode::Eval, None)?;
    let value_bytes = tape.memory_bytes();
    let param_bytes = model.params.numel() * std::mem::size_of::<f64>();
    Ok(2 * value_bytes + 3 * param_bytes)
}

/// Builds the deterministic report: FLOP/param/memory profile per spec plus
/// the lifting overhead section when both `max` and `tlp` are present.
pub fn flop_report(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.specs.is_empty() {
        return Err(Error::usage("no pool specs to benchmark"));
    }
    let mut methods = Vec::with_capacity(cfg.specs.len());
    for spec in &cfg.specs {
        let model = model_for(cfg, spec)?;
        let report = count_flops(&model.flop_desc(cfg.t))?;
        methods.push(MethodProfile {
            spec: spec.clone(),
            param_count: model.params.numel(),
            total_macs: report.total_macs,
            total_flops: report.total_flops,
            pool_flops: report.component_flops("pool1") + report.component_flops("pool2"),
            peak_bytes: peak_bytes(cfg, &model)?,
        });
    }
    let find = |name: &str| methods.iter().find(|m| m.spec == name);
    let overhead = match (find("max"), find("tlp")) {
        (Some(max), Some(tlp)) => {
            let added = tlp.total_flops - max.total_flops;
            let frontend = count_flops(&frontend_desc(cfg.in_channels, cfg.t))?.total_flops;
            let pipeline = frontend + tlp.total_flops;
            Some(OverheadReport {
                max_head_flops: max.total_flops,
                tlp_head_flops: tlp.total_flops,
                added_flops: added,
                added_pct_of_head: 100.0 * added as f64 / max.total_flops as f64,
                frontend_flops: frontend,
                added_pct_of_pipeline: 100.0 * added as f64 / pipeline as f64,
            })
        }
        _ => None,
    };
    Ok(BenchReport {
        t: cfg.t,
        batch: cfg.batch,
        in_channels: cfg.in_channels,
        hidden: cfg.hidden,
        classes: cfg.classes,
        seed: cfg.seed,
        methods,
        overhead,
        accuracy: Vec::new(),
    })
}

/// Times eval forwards: `warmups` untimed runs, then the median of `reps`
/// timed ones (at least five).
pub fn timing_report(cfg: &BenchConfig) -> Result<TimingReport> {
    if cfg.reps < 5 {
        return Err(Error::config(format!("need at least 5 repetitions, got {}", cfg.reps)));
    }
    let mut entries = Vec::with_capacity(cfg.specs.len());
    for spec in &cfg.specs {
        let model = model_for(cfg, spec)?;
        let x = TemporalSignal::from_fn(cfg.batch, cfg.in_channels, cfg.t, |n, c, i| {
            ((n * 13 + c * 5 + i) as f64 * 0.23).cos()
        });
        let run = || -> Result<f64> {
            let mut tape = Tape::new();
            let xid = tape.leaf(x.clone())?;
            let start = Instant::now();
            model.forward(&mut tape, xid, Mode::Eval, None)?;
            Ok(start.elapsed().as_secs_f64())
        };
        for _ in 0..cfg.warmups {
            run()?;
        }
        let mut times = Vec::with_capacity(cfg.reps);
        for _ in 0..cfg.reps {
            times.push(run()?);
        }
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
        let median = times[times.len() / 2];
        entries.push(TimingEntry {
            spec: spec.clone(),
            median_batch_secs: median,
            sequences_per_sec: if median > 0.0 { cfg.batch as f64 / median } else { f64::INFINITY },
        });
    }
    Ok(TimingReport { batch: cfg.batch, reps: cfg.reps, warmups: cfg.warmups, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg(specs: &[&str]) -> BenchConfig {
        BenchConfig {
            specs: specs.iter().map(|s| s.to_string()).collect(),
            t: 32,
            batch: 4,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn parameter_free_pools_match_exactly() {
        let report = flop_report(&quick_cfg(&["max", "avg"])).unwrap();
        assert_eq!(report.methods[0].total_flops, report.methods[1].total_flops);
        assert_eq!(report.methods[0].param_count, report.methods[1].param_count);
    }

    #[test]
    fn lifting_overhead_is_additive() {
        let report = flop_report(&quick_cfg(&["max", "tlp"])).unwrap();
        let overhead = report.overhead.unwrap();
        let max = &report.methods[0];
        let tlp = &report.methods[1];
        assert_eq!(overhead.added_flops, tlp.total_flops - max.total_flops);
        // The added cost is exactly the pool components minus the baseline
        // slots' elementwise passes.
        assert_eq!(
            overhead.added_flops,
            tlp.pool_flops - max.pool_flops
        );
        assert!(overhead.added_pct_of_pipeline < overhead.added_pct_of_head);
    }

    #[test]
    fn flop_fields_are_deterministic() {
        let a = serde_json::to_string(&flop_report(&quick_cfg(&["max", "soft", "tlp"])).unwrap()).unwrap();
        let b = serde_json::to_string(&flop_report(&quick_cfg(&["max", "soft", "tlp"])).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn peak_bytes_scale_with_batch() {
        let small = flop_report(&quick_cfg(&["max"])).unwrap();
        let big = flop_report(&BenchConfig { batch: 8, ..quick_cfg(&["max"]) }).unwrap();
        assert!(big.methods[0].peak_bytes > small.methods[0].peak_bytes);
    }

    #[test]
    fn timing_runs_and_validates() {
        let report = timing_report(&quick_cfg(&["avg"])).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert!(report.entries[0].median_batch_secs >= 0.0);
        assert!(report.entries[0].sequences_per_sec > 0.0);
        let bad = BenchConfig { reps: 3, ..quick_cfg(&["avg"]) };
        assert!(timing_report(&bad).is_err());
    }

    #[test]
    fn accuracy_summary_stats() {
        let s = AccuracySummary::new("max", &[(0, 0.9), (1, 0.8), (2, 1.0)]).unwrap();
        assert!((s.mean - 0.9).abs() < 1e-12);
        let expect = ((0.01 + 0.0 + 0.01) / 3.0f64).sqrt();
        assert!((s.std - expect).abs() < 1e-12);
        assert!(AccuracySummary::new("max", &[]).is_err());
    }

    #[test]
    fn empty_spec_list_rejected() {
        assert!(flop_report(&quick_cfg(&[])).is_err());
    }
}
