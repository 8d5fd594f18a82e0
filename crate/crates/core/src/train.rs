//! Training and evaluation of the sequence classifier on synthetic tasks.
//!
//! Every source of randomness (shuffling, stochastic pooling) is driven by
//! one seeded generator, so a run is reproducible byte-for-byte from its
//! config.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{DataSplits, SyntheticDataset, TaskKind};
use crate::error::{Error, Result};
use crate::model::SequenceModel;
use crate::optim::{Adam, AdamConfig};
use crate::pooling::Mode;
use crate::signal::TemporalSignal;
use crate::tape::Tape;
use crate::tlp::total_loss;

#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub task: TaskKind,
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    /// Update-loss coefficient; zero disables the term entirely.
    pub alpha_u: f64,
    /// Predict-loss coefficient; zero disables the term entirely.
    pub alpha_p: f64,
    pub noise_sigma: f64,
    pub sizes: (usize, usize, usize),
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            task: TaskKind::BandMix,
            seed: 0,
            epochs: 25,
            batch_size: 16,
            lr: 1e-2,
            weight_decay: 1e-3,
            alpha_u: 1e-3,
            alpha_p: 1e-3,
            noise_sigma: crate::data::DEFAULT_NOISE,
            sizes: crate::data::DEFAULT_SPLIT,
        }
    }
}

/// Per-epoch averages over the training set, plus dev accuracy after the
/// epoch. `c_u` / `c_p` are the summed per-layer regularizer means; zero
/// when no lifting layer is placed.
#[derive(Clone, Copy, Debug)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub task_loss: f64,
    pub c_u: f64,
    pub c_p: f64,
    pub total: f64,
    pub dev_acc: f64,
}

/// CSV with a fixed header; floats keep their shortest round-trip form.
pub fn metrics_to_csv(metrics: &[EpochMetrics]) -> String {
    let mut out = String::from("epoch,task_loss,c_u,c_p,total,dev_acc\n");
    for m in metrics {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            m.epoch, m.task_loss, m.c_u, m.c_p, m.total, m.dev_acc
        )
        .expect("string write");
    }
    out
}

/// Argmax over the class axis; ties keep the first class.
fn predictions(logits: &TemporalSignal) -> Vec<usize> {
    let (nb, classes, _) = logits.shape();
    (0..nb)
        .map(|n| {
            let mut best = 0;
            for k in 1..classes {
                if logits.get(n, k, 0) > logits.get(n, best, 0) {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Fraction of samples whose argmax logit matches the label. Eval mode:
/// stochastic pooling uses its deterministic expectation path.
pub fn evaluate(model: &SequenceModel, ds: &SyntheticDataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::usage("cannot evaluate on an empty dataset"));
    }
    let mut correct = 0usize;
    let chunk = 100usize;
    let idx: Vec<usize> = (0..ds.len()).collect();
    for block in idx.chunks(chunk) {
        let (x, labels) = ds.batch(block)?;
        let mut tape = Tape::new();
        let xid = tape.leaf(x)?;
        let out = model.forward(&mut tape, xid, Mode::Eval, None)?;
        let logits = tape.value(out.logits);
        for (pred, label) in predictions(logits).into_iter().zip(labels) {
            if pred == label {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / ds.len() as f64)
}

/// Runs the full loop, mutating `model` in place. Aborts with a numeric
/// error if any loss stops being finite.
pub fn train_model(
    model: &mut SequenceModel,
    splits: &DataSplits,
    cfg: &TrainConfig,
) -> Result<Vec<EpochMetrics>> {
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::config("epochs and batch size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(
        AdamConfig { lr: cfg.lr, weight_decay: cfg.weight_decay, ..AdamConfig::default() },
        &model.params,
    )?;
    let n_train = splits.train.len();
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut metrics = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut sum_task = 0.0;
        let mut sum_cu = 0.0;
        let mut sum_cp = 0.0;
        let mut sum_total = 0.0;
        for batch_idx in order.chunks(cfg.batch_size) {
            let (x, labels) = splits.train.batch(batch_idx)?;
            let b = batch_idx.len() as f64;

            let mut tape = Tape::new();
            let xid = tape.leaf(x)?;
            let out = model.forward(&mut tape, xid, Mode::Train, Some(&mut rng))?;
            let task = tape.cross_entropy(out.logits, &labels)?;
            let loss = total_loss(&mut tape, task, &out.tlp_losses, cfg.alpha_u, cfg.alpha_p)?;

            let task_v = tape.value(task).scalar_value();
            let cu_v = loss.c_u_sum.map_or(0.0, |id| tape.value(id).scalar_value());
            let cp_v = loss.c_p_sum.map_or(0.0, |id| tape.value(id).scalar_value());
            let total_v = tape.value(loss.total).scalar_value();
            if !total_v.is_finite() {
                return Err(Error::numeric(format!(
                    "loss became non-finite at epoch {epoch} ({total_v})"
                )));
            }
            sum_task += task_v * b;
            sum_cu += cu_v * b;
            sum_cp += cp_v * b;
            sum_total += total_v * b;

            let grads = tape.backward(loss.total)?;
            let grad_refs: Vec<&TemporalSignal> =
                out.param_ids.iter().map(|&id| grads.grad(id)).collect();
            adam.step(&mut model.params, &grad_refs)?;
        }
        let n = n_train as f64;
        metrics.push(EpochMetrics {
            epoch,
            task_loss: sum_task / n,
            c_u: sum_cu / n,
            c_p: sum_cp / n,
            total: sum_total / n,
            dev_acc: evaluate(model, &splits.dev)?,
        });
    }
    Ok(metrics)
}

/// Settings for the method-comparison matrix.
#[derive(Clone, Debug)]
pub struct CompareConfig {
    pub specs: Vec<String>,
    pub seeds: Vec<u64>,
    /// Template for every run; `seed` is overwritten per job.
    pub train: TrainConfig,
    /// Template for every run; `pool` and `seed` are overwritten per job.
    pub model: crate::model::ModelConfig,
    /// Worker threads; each (spec, seed) job is self-contained, so the
    /// result bytes do not depend on this.
    pub threads: usize,
}

/// One spec's accuracy summary over all seeds.
#[derive(Clone, Debug)]
pub struct CompareRow {
    pub spec: String,
    pub summary: crate::bench::AccuracySummary,
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    /// Ranked best-first by mean accuracy; ties break alphabetically.
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    /// Ranked table; per-seed accuracies are pipe-joined in seed order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,spec,mean_acc,std_acc,seed_accs\n");
        for (i, row) in self.rows.iter().enumerate() {
            let accs: Vec<String> =
                row.summary.accuracies.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                i + 1,
                row.spec,
                row.summary.mean,
                row.summary.std,
                accs.join("|")
            );
        }
        out
    }

    pub fn row(&self, spec: &str) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.spec == spec)
    }
}

/// Reads the `LIFTPOOL_THREADS` cap; defaults to one worker.
pub fn thread_cap() -> usize {
    std::env::var("LIFTPOOL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn run_one(cfg: &CompareConfig, spec: &str, seed: u64) -> Result<f64> {
    let pool: crate::model::PoolSpec = spec.parse()?;
    let splits = crate::data::gen_splits(
        cfg.train.task,
        seed,
        cfg.train.sizes,
        cfg.train.noise_sigma,
    )?;
    let mut model = crate::model::build_model(crate::model::ModelConfig {
        pool,
        seed,
        ..cfg.model
    })?;
    let train_cfg = TrainConfig { seed, ..cfg.train };
    train_model(&mut model, &splits, &train_cfg)?;
    evaluate(&model, &splits.test)
}

/// Trains every (spec, seed) pair and ranks specs by mean test accuracy.
/// Jobs run on up to `threads` workers; each owns its model, data, and rng,
/// and results are aggregated by job index, so the report is identical at
/// any thread count.
pub fn compare_methods(cfg: &CompareConfig) -> Result<CompareReport> {
    if cfg.specs.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::usage("comparison needs at least one spec and one seed"));
    }
    let jobs: Vec<(usize, u64)> = cfg
        .specs
        .iter()
        .enumerate()
        .flat_map(|(i, _)| cfg.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let mut results: Vec<Option<Result<f64>>> = (0..jobs.len()).map(|_| None).collect();

    let workers = cfg.threads.max(1).min(jobs.len());
    if workers <= 1 {
        for (slot, &(spec_idx, seed)) in jobs.iter().enumerate() {
            results[slot] = Some(run_one(cfg, &cfg.specs[spec_idx], seed));
        }
    } else {
        use std::sync::atomic::{AtomicUsize, Ordering};
        use std::sync::Mutex;
        let next = AtomicUsize::new(0);
        let shared = Mutex::new(&mut results);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= jobs.len() {
                        break;
                    }
                    let (spec_idx, seed) = jobs[i];
                    let r = run_one(cfg, &cfg.specs[spec_idx], seed);
                    shared.lock().expect("no poisoned workers")[i] = Some(r);
                });
            }
        });
    }

    let mut rows = Vec::with_capacity(cfg.specs.len());
    for (spec_idx, spec) in cfg.specs.iter().enumerate() {
        let mut runs = Vec::with_capacity(cfg.seeds.len());
        for (slot, &(job_spec, seed)) in jobs.iter().enumerate() {
            if job_spec == spec_idx {
                let acc = results[slot]
                    .take()
                    .expect("every job ran")?;
                runs.push((seed, acc));
            }
        }
        rows.push(CompareRow {
            spec: spec.clone(),
            summary: crate::bench::AccuracySummary::new(spec.clone(), &runs)?,
        });
    }
    rows.sort_by(|a, b| {
        b.summary
            .mean
            .partial_cmp(&a.summary.mean)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.spec.cmp(&b.spec))
    });
    Ok(CompareReport { rows })
}
