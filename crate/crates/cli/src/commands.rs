//! Subcommand implementations. Every command logs its fully resolved
//! configuration to stderr; data artifacts land in `--out` and depend only on
//! flags and seeds, never on wall-clock time.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use liftpool::bench::{flop_report, timing_report, BenchConfig};
use liftpool::checkpoint::Checkpoint;
use liftpool::data::{gen_splits, TaskKind, DEFAULT_CHANNELS, NUM_CLASSES};
use liftpool::grad_check::run_suite;
use liftpool::io::{read_signal_csv, write_dataset_csv, write_signal_csv};
use liftpool::model::{build_model, ModelConfig, Placement, PoolSpec};
use liftpool::spectrum::{band_energy, Band};
use liftpool::tlp::{inverse_lift, lift_signal, LiftFilters};
use liftpool::train::{
    compare_methods, evaluate, metrics_to_csv, thread_cap, train_model, CompareConfig, TrainConfig,
};
use liftpool::{Error, Fusion, Result, TemporalSignal, TlpConfig, TlpParams};

fn log_config(cmd: &str, fields: &[(&str, String)]) {
    let mut line = format!("liftpool {cmd}:");
    for (key, value) in fields {
        let _ = write!(line, " {key}={value}");
    }
    eprintln!("{line}");
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn split_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

// ---------------------------------------------------------------------------
// decompose

#[derive(Args)]
pub struct DecomposeArgs {
    /// Input signal CSV (header `channel,t0,t1,...`, one row per channel).
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory; receives s.csv, d.csv, bands.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Checkpoint holding learned lifting parameters; fixed Haar step when absent.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Name prefix of the lifting parameters inside the checkpoint
    /// (classifier checkpoints store them under "pool1." / "pool2.").
    #[arg(long, default_value = "")]
    pub prefix: String,
    /// Rebuild the input from (s, d), write reconstructed.csv, and fail
    /// unless the round trip is exact to 1e-9 per value.
    #[arg(long)]
    pub inverse: bool,
}

/// Lifts one multichannel signal and reports where its energy went.
pub fn decompose(args: &DecomposeArgs) -> Result<()> {
    let filter_desc = match &args.checkpoint {
        Some(path) => format!("checkpoint:{}", path_str(path)),
        None => "haar".to_string(),
    };
    log_config(
        "decompose",
        &[
            ("input", path_str(&args.input)),
            ("out", path_str(&args.out)),
            ("filters", filter_desc),
            ("prefix", format!("{:?}", args.prefix)),
            ("inverse", args.inverse.to_string()),
        ],
    );

    let x = read_signal_csv(&args.input)?;
    let params: Option<TlpParams> = match &args.checkpoint {
        Some(path) => Some(Checkpoint::load(path)?.tlp_params(&args.prefix)?),
        None => None,
    };
    let filters = match &params {
        Some(p) => LiftFilters::Net(p),
        None => LiftFilters::Haar,
    };
    let pair = lift_signal(&x, &filters)?;

    fs::create_dir_all(&args.out)?;
    write_signal_csv(&args.out.join("s.csv"), &pair.s)?;
    write_signal_csv(&args.out.join("d.csv"), &pair.d)?;

    let mut bands = String::from("stream,low,high,total,low_share\n");
    for (name, sig) in [("input", &x), ("smooth", &pair.s), ("detail", &pair.d)] {
        let low = band_energy(sig, Band::Low)?;
        let high = band_energy(sig, Band::High)?;
        let total = low + high;
        let share = if total > 0.0 { low / total } else { 1.0 };
        let _ = writeln!(bands, "{name},{low},{high},{total},{share}");
    }
    fs::write(args.out.join("bands.csv"), &bands)?;
    print!("{bands}");

    if args.inverse {
        let full = inverse_lift(&pair.s, &pair.d, &filters)?;
        // Odd inputs were padded to even length; drop the padding frame.
        let (nb, c, t) = x.shape();
        let rec = if full.len() == t {
            full
        } else {
            TemporalSignal::from_fn(nb, c, t, |n, ch, ti| full.get(n, ch, ti))
        };
        write_signal_csv(&args.out.join("reconstructed.csv"), &rec)?;
        let err = x
            .data()
            .iter()
            .zip(rec.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        println!("reconstruction_max_abs_err={err}");
        if !(err <= 1e-9) {
            return Err(Error::numeric(format!(
                "inverse reconstruction drifted: max abs error {err} > 1e-9"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// shared training knobs

/// Hyperparameters common to `train` and `compare`.
#[derive(Args)]
pub struct HyperArgs {
    /// Synthetic task: band-mix or spike-pattern.
    #[arg(long, default_value = "band-mix")]
    pub task: String,
    /// Which pool slots use the selected method (both, first, second, none);
    /// uncovered slots max-pool.
    #[arg(long, default_value = "both")]
    pub placement: String,
    /// Sub-band fusion for tlp: sum, concat, bottleneck.
    #[arg(long, default_value = "sum")]
    pub fusion: String,
    /// Depthwise kernel width of the predict/update networks.
    #[arg(long, default_value_t = 5)]
    pub kernel: usize,
    /// Kernel width of the component-weighting gates.
    #[arg(long, default_value_t = 5)]
    pub weighting_kernel: usize,
    /// Backbone convolution kernel width (odd).
    #[arg(long, default_value_t = 5)]
    pub conv_kernel: usize,
    /// Backbone channel width.
    #[arg(long, default_value_t = 8)]
    pub hidden: usize,
    #[arg(long, default_value_t = 25)]
    pub epochs: usize,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub weight_decay: f64,
    /// Update-loss coefficient; 0 disables the term.
    #[arg(long, default_value_t = 1e-3)]
    pub alpha_u: f64,
    /// Predict-loss coefficient; 0 disables the term.
    #[arg(long, default_value_t = 1e-3)]
    pub alpha_p: f64,
    /// Additive Gaussian noise level of the generated data.
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    #[arg(long, default_value_t = 800)]
    pub train_size: usize,
    #[arg(long, default_value_t = 200)]
    pub dev_size: usize,
    #[arg(long, default_value_t = 200)]
    pub test_size: usize,
}

struct TrainSetup {
    task: TaskKind,
    train: TrainConfig,
    model: ModelConfig,
}

/// Resolves shared flags; `pool` fills both slots and `seed` drives data,
/// init, and shuffling (compare overwrites both per job).
fn resolve(hyper: &HyperArgs, pool: &str, seed: u64) -> Result<TrainSetup> {
    let task: TaskKind = hyper.task.parse()?;
    let pool: PoolSpec = pool.parse()?;
    let placement: Placement = hyper.placement.parse()?;
    let fusion: Fusion = hyper.fusion.parse()?;
    let train = TrainConfig {
        task,
        seed,
        epochs: hyper.epochs,
        batch_size: hyper.batch,
        lr: hyper.lr,
        weight_decay: hyper.weight_decay,
        alpha_u: hyper.alpha_u,
        alpha_p: hyper.alpha_p,
        noise_sigma: hyper.noise,
        sizes: (hyper.train_size, hyper.dev_size, hyper.test_size),
    };
    let model = ModelConfig {
        in_channels: DEFAULT_CHANNELS,
        hidden: hyper.hidden,
        classes: NUM_CLASSES,
        kernel: hyper.conv_kernel,
        pool,
        placement,
        tlp: TlpConfig {
            kernel: hyper.kernel,
            weighting_kernel: hyper.weighting_kernel,
            fusion,
        },
        seed,
    };
    Ok(TrainSetup { task, train, model })
}

fn hyper_fields(setup: &TrainSetup) -> Vec<(&'static str, String)> {
    vec![
        ("task", setup.task.to_string()),
        ("placement", setup.model.placement.to_string()),
        ("fusion", setup.model.tlp.fusion.to_string()),
        ("kernel", setup.model.tlp.kernel.to_string()),
        ("weighting_kernel", setup.model.tlp.weighting_kernel.to_string()),
        ("conv_kernel", setup.model.kernel.to_string()),
        ("hidden", setup.model.hidden.to_string()),
        ("epochs", setup.train.epochs.to_string()),
        ("batch", setup.train.batch_size.to_string()),
        ("lr", setup.train.lr.to_string()),
        ("weight_decay", setup.train.weight_decay.to_string()),
        ("alpha_u", setup.train.alpha_u.to_string()),
        ("alpha_p", setup.train.alpha_p.to_string()),
        ("noise", setup.train.noise_sigma.to_string()),
        (
            "sizes",
            format!(
                "{}/{}/{}",
                setup.train.sizes.0, setup.train.sizes.1, setup.train.sizes.2
            ),
        ),
    ]
}

// ---------------------------------------------------------------------------
// train

#[derive(Args)]
pub struct TrainArgs {
    /// Pooling in the covered slots: max, avg, lp:<p>, mixed, stochastic,
    /// soft, tlp.
    #[arg(long, default_value = "tlp")]
    pub pool: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Output directory; receives metrics.csv and checkpoint.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Also export the generated splits as train.csv / dev.csv / test.csv.
    #[arg(long)]
    pub export_data: bool,
}

/// Trains one model and writes its metrics log and checkpoint.
pub fn train(args: &TrainArgs) -> Result<()> {
    let setup = resolve(&args.hyper, &args.pool, args.seed)?;
    let mut fields = vec![
        ("pool", setup.model.pool.to_string()),
        ("seed", setup.train.seed.to_string()),
    ];
    fields.extend(hyper_fields(&setup));
    fields.push(("out", path_str(&args.out)));
    fields.push(("export_data", args.export_data.to_string()));
    log_config("train", &fields);

    let splits = gen_splits(setup.task, setup.train.seed, setup.train.sizes, setup.train.noise_sigma)?;
    let mut model = build_model(setup.model)?;
    let metrics = train_model(&mut model, &splits, &setup.train)?;
    for m in &metrics {
        eprintln!(
            "epoch {}/{} task_loss={} c_u={} c_p={} total={} dev_acc={}",
            m.epoch, setup.train.epochs, m.task_loss, m.c_u, m.c_p, m.total, m.dev_acc
        );
    }
    let test_acc = evaluate(&model, &splits.test)?;

    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("metrics.csv"), metrics_to_csv(&metrics))?;
    model
        .to_checkpoint(setup.train.alpha_u, setup.train.alpha_p)?
        .save(&args.out.join("checkpoint.json"))?;
    if args.export_data {
        write_dataset_csv(&args.out.join("train.csv"), &splits.train)?;
        write_dataset_csv(&args.out.join("dev.csv"), &splits.dev)?;
        write_dataset_csv(&args.out.join("test.csv"), &splits.test)?;
    }

    let dev_acc = metrics.last().map_or(0.0, |m| m.dev_acc);
    println!("dev_acc={dev_acc}");
    println!("test_acc={test_acc}");
    Ok(())
}

// ---------------------------------------------------------------------------
// compare

#[derive(Args)]
pub struct CompareArgs {
    /// Comma-separated pool specs to race.
    #[arg(long, default_value = "max,avg,lp:2,mixed,stochastic,soft,tlp")]
    pub specs: String,
    /// Comma-separated seeds; each spec trains once per seed.
    #[arg(long, default_value = "0,1,2,3,4")]
    pub seeds: String,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Output directory; receives compare.csv.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    split_list(text)
        .iter()
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| Error::usage(format!("bad seed '{s}' (expected an unsigned integer)")))
        })
        .collect()
}

/// Trains every (spec, seed) pair and writes the ranked accuracy table.
pub fn compare(args: &CompareArgs) -> Result<()> {
    // Template pool/seed; the matrix overwrites both per job.
    let setup = resolve(&args.hyper, "max", 0)?;
    let specs = split_list(&args.specs);
    for spec in &specs {
        spec.parse::<PoolSpec>()?;
    }
    let seeds = parse_seeds(&args.seeds)?;
    let threads = thread_cap();

    let mut fields = vec![
        ("specs", specs.join(",")),
        (
            "seeds",
            seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        ),
    ];
    fields.extend(hyper_fields(&setup));
    fields.push(("threads", threads.to_string()));
    fields.push(("out", path_str(&args.out)));
    log_config("compare", &fields);

    let report = compare_methods(&CompareConfig {
        specs,
        seeds,
        train: setup.train,
        model: setup.model,
        threads,
    })?;
    let table = report.to_csv();
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("compare.csv"), &table)?;
    print!("{table}");
    Ok(())
}

// ---------------------------------------------------------------------------
// bench

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated pool specs to profile.
    #[arg(long, default_value = "max,avg,lp:2,mixed,stochastic,soft,tlp")]
    pub specs: String,
    /// Sequence length fed to the model shell.
    #[arg(long, default_value_t = 128)]
    pub t: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 2)]
    pub in_channels: usize,
    #[arg(long, default_value_t = 8)]
    pub hidden: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    /// Timed repetitions for --timing; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Untimed runs before the clock starts.
    #[arg(long, default_value_t = 2)]
    pub warmups: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also measure wall-clock throughput (written to timing.log, not to
    /// the deterministic report).
    #[arg(long)]
    pub timing: bool,
    /// Output directory; receives bench.json and optionally timing.log.
    #[arg(long)]
    pub out: PathBuf,
}

/// Writes the deterministic cost report, plus a wall-clock log on request.
pub fn bench(args: &BenchArgs) -> Result<()> {
    let specs = split_list(&args.specs);
    log_config(
        "bench",
        &[
            ("specs", specs.join(",")),
            ("t", args.t.to_string()),
            ("batch", args.batch.to_string()),
            ("in_channels", args.in_channels.to_string()),
            ("hidden", args.hidden.to_string()),
            ("classes", args.classes.to_string()),
            ("reps", args.reps.to_string()),
            ("warmups", args.warmups.to_string()),
            ("seed", args.seed.to_string()),
            ("timing", args.timing.to_string()),
            ("out", path_str(&args.out)),
        ],
    );

    let cfg = BenchConfig {
        specs,
        t: args.t,
        batch: args.batch,
        in_channels: args.in_channels,
        hidden: args.hidden,
        classes: args.classes,
        reps: args.reps,
        warmups: args.warmups,
        seed: args.seed,
    };
    let report = flop_report(&cfg)?;
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::format(format!("report serialization failed: {e}")))?;
    json.push('\n');
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("bench.json"), &json)?;

    for m in &report.methods {
        println!(
            "{} params={} flops={} pool_flops={} peak_bytes={}",
            m.spec, m.param_count, m.total_flops, m.pool_flops, m.peak_bytes
        );
    }
    if let Some(o) = &report.overhead {
        println!(
            "overhead added_flops={} pct_of_head={:.3} pct_of_pipeline={:.3}",
            o.added_flops, o.added_pct_of_head, o.added_pct_of_pipeline
        );
    }

    if args.timing {
        let timing = timing_report(&cfg)?;
        let mut log = format!(
            "batch={} reps={} warmups={}\n",
            timing.batch, timing.reps, timing.warmups
        );
        for e in &timing.entries {
            let _ = writeln!(
                log,
                "{} median_batch_secs={} sequences_per_sec={:.1}",
                e.spec, e.median_batch_secs, e.sequences_per_sec
            );
        }
        fs::write(args.out.join("timing.log"), &log)?;
        eprint!("{log}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// gradcheck

#[derive(Args)]
pub struct GradcheckArgs {
    /// Base seed of the sweep.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of seeds; every op is checked under each.
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
}

/// Runs the finite-difference suite; exits zero only if every check passes.
pub fn gradcheck(args: &GradcheckArgs) -> Result<()> {
    log_config(
        "gradcheck",
        &[("seed", args.seed.to_string()), ("seeds", args.seeds.to_string())],
    );
    let report = run_suite(args.seed, args.seeds)?;
    let mut failed = 0usize;
    for check in &report.checks {
        let verdict = if check.passed() { "PASS" } else { "FAIL" };
        if !check.passed() {
            failed += 1;
        }
        println!(
            "{verdict} {} max_rel_err={:.3e} tol={:.0e}",
            check.name, check.max_rel_err, check.tolerance
        );
    }
    if failed > 0 {
        return Err(Error::numeric(format!(
            "{failed} of {} gradient checks failed",
            report.checks.len()
        )));
    }
    println!("all {} gradient checks passed", report.checks.len());
    Ok(())
}
