//! Randomized structural properties: lifting round trips, pooling window
//! laws, convolution linearity, loss wiring, and metric cross-checks.

use liftpool::conv::ConvParams;
use liftpool::pooling::FixedPool;
use liftpool::tlp::{
    component_weight, haar_lift, inverse_lift, lift_signal, total_loss, LiftFilters, Stream,
};
use liftpool::wer::wer;
use liftpool::{Mode, Tape, TemporalSignal, TlpConfig, TlpParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_signal(
    max_batch: usize,
    max_channels: usize,
    len: std::ops::RangeInclusive<usize>,
    lo: f64,
    hi: f64,
) -> impl Strategy<Value = TemporalSignal> {
    (1..=max_batch, 1..=max_channels, len).prop_flat_map(move |(n, c, t)| {
        proptest::collection::vec(lo..hi, n * c * t)
            .prop_map(move |data| TemporalSignal::new(n, c, t, data).unwrap())
    })
}

/// Random non-trivial lifting parameters (plain init keeps the layer at
/// identity, which would make most properties vacuous).
fn random_tlp(channels: usize, seed: u64) -> TlpParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = TlpParams::init(channels, TlpConfig::default(), &mut rng).unwrap();
    for i in 0..params.params.len() {
        let positive = params.params.name(i).ends_with("gamma");
        for v in params.params.tensor_mut(i).data_mut() {
            *v = if positive {
                rng.random_range(0.5..1.5)
            } else {
                rng.random_range(-0.75..0.75)
            };
        }
    }
    params
}

/// Replicate-padded stride-2 windows, the shared downsampling geometry.
fn windows(row: &[f64]) -> Vec<(f64, f64)> {
    (0..row.len().div_ceil(2))
        .map(|u| {
            let a = row[2 * u];
            let b = if 2 * u + 1 < row.len() { row[2 * u + 1] } else { row[row.len() - 1] };
            (a, b)
        })
        .collect()
}

fn pool_once(kind: FixedPool, x: &TemporalSignal) -> TemporalSignal {
    let mut tape = Tape::new();
    let xid = tape.leaf(x.clone()).unwrap();
    let y = tape.pool_fixed(kind, xid).unwrap();
    tape.value(y).clone()
}

proptest! {
    /// The Haar smooth stream and average pooling share their exact
    /// arithmetic, operand order included.
    #[test]
    fn haar_smooth_matches_average_pool_bitwise(x in arb_signal(2, 3, 1..=33, -100.0, 100.0)) {
        let pair = haar_lift(&x).unwrap();
        let avg = pool_once(FixedPool::Average, &x);
        prop_assert_eq!(pair.s.data(), avg.data());
        for n in 0..x.batch() {
            for c in 0..x.channels() {
                for (u, (a, b)) in windows(x.row(n, c)).into_iter().enumerate() {
                    prop_assert_eq!(pair.d.get(n, c, u), a - b);
                }
            }
        }
    }

    /// Lifting with any parameters is invertible to fp noise.
    #[test]
    fn lift_round_trip_reconstructs_input(
        x in arb_signal(2, 3, 4..=24, -10.0, 10.0),
        seed in 0u64..1000,
    ) {
        let params = random_tlp(x.channels(), seed);
        let filters = LiftFilters::Net(&params);
        let pair = lift_signal(&x, &filters).unwrap();
        let rec = inverse_lift(&pair.s, &pair.d, &filters).unwrap();
        for n in 0..x.batch() {
            for c in 0..x.channels() {
                for t in 0..x.len() {
                    prop_assert!((rec.get(n, c, t) - x.get(n, c, t)).abs() <= 1e-9);
                }
            }
        }
    }

    /// With zero bias the convolution is linear in its input.
    #[test]
    fn conv_is_linear_with_zero_bias(
        (x, y) in arb_signal(2, 3, 3..=20, -5.0, 5.0).prop_flat_map(|x| {
            let (n, c, t) = x.shape();
            (Just(x), proptest::collection::vec(-5.0..5.0, n * c * t)
                .prop_map(move |d| TemporalSignal::new(n, c, t, d).unwrap()))
        }),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        seed in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut conv = ConvParams::init(x.channels(), 4, 3, 1, &mut rng).unwrap();
        conv.bias = TemporalSignal::zeros(4, 1, 1);

        let apply = |input: &TemporalSignal| {
            let mut tape = Tape::new();
            let id = tape.leaf(input.clone()).unwrap();
            let out = tape.conv1d_with(id, &conv).unwrap();
            tape.value(out).clone()
        };
        let combo = TemporalSignal::from_fn(x.batch(), x.channels(), x.len(), |n, c, t| {
            a * x.get(n, c, t) + b * y.get(n, c, t)
        });
        let lhs = apply(&combo);
        let (fx, fy) = (apply(&x), apply(&y));
        for ((l, xv), yv) in lhs.data().iter().zip(fx.data()).zip(fy.data()) {
            let rhs = a * xv + b * yv;
            prop_assert!((l - rhs).abs() <= 1e-9 + 1e-12 * rhs.abs());
        }
    }

    /// Max pooling returns the window maximum, verbatim.
    #[test]
    fn max_pool_picks_window_maximum(x in arb_signal(2, 3, 1..=33, -50.0, 50.0)) {
        let y = pool_once(FixedPool::Max, &x);
        prop_assert_eq!(y.len(), x.len().div_ceil(2));
        for n in 0..x.batch() {
            for c in 0..x.channels() {
                for (u, (a, b)) in windows(x.row(n, c)).into_iter().enumerate() {
                    prop_assert_eq!(y.get(n, c, u), a.max(b));
                }
            }
        }
    }

    /// The power mean grows with its exponent.
    #[test]
    fn lp_pool_is_monotone_in_p(
        x in arb_signal(2, 2, 1..=16, -4.0, 4.0),
        p_lo in 1.0..6.0f64,
        dp in 0.0..4.0f64,
    ) {
        let run = |p: f64| {
            let mut tape = Tape::new();
            let xid = tape.leaf(x.clone()).unwrap();
            let y = tape.pool_lp(xid, p).unwrap();
            tape.value(y).clone()
        };
        let (lo, hi) = (run(p_lo), run(p_lo + dp));
        for (l, h) in lo.data().iter().zip(hi.data()) {
            prop_assert!(*l <= *h + 1e-9, "p={} gave {} > p={} gave {}", p_lo, l, p_lo + dp, h);
        }
    }

    /// Even/odd decimation followed by interleaving is the identity.
    #[test]
    fn split_then_interleave_is_identity(x in arb_signal(2, 3, 1..=16, -100.0, 100.0)) {
        prop_assume!(x.len() % 2 == 0);
        let mut tape = Tape::new();
        let xid = tape.leaf(x.clone()).unwrap();
        let even = tape.stride2_sample(xid, 0).unwrap();
        let odd = tape.stride2_sample(xid, 1).unwrap();
        let back = tape.interleave2(even, odd).unwrap();
        prop_assert_eq!(tape.value(back).data(), x.data());
    }

    /// The residual gate scales each element by sigmoid(...) + 1/2, so the
    /// output stays within [0.5x, 1.5x] elementwise.
    #[test]
    fn component_weight_stays_in_gate_range(
        x in arb_signal(1, 2, 4..=16, -8.0, 8.0),
        seed in 0u64..1000,
    ) {
        let params = random_tlp(x.channels(), seed);
        let mut tape = Tape::new();
        let xid = tape.leaf(x.clone()).unwrap();
        let bound = params.bind(&mut tape).unwrap();
        let y = component_weight(&mut tape, &bound, Stream::Smooth, xid).unwrap();
        for (yv, xv) in tape.value(y).data().iter().zip(x.data()) {
            let (lo, hi) = (0.5 * xv, 1.5 * xv);
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            prop_assert!(*yv >= lo - 1e-12 && *yv <= hi + 1e-12);
        }
    }

    /// Doubling the update coefficient doubles its share of the total: the
    /// weighted term itself doubles bitwise, and the share recovered from
    /// the logged scalars doubles to subtraction-rounding accuracy.
    #[test]
    fn doubling_alpha_u_doubles_its_loss_share(
        task in 0.01..10.0f64,
        cu in 0.0..5.0f64,
        cp in 0.0..5.0f64,
        alpha_u in 1e-5..0.1f64,
        alpha_p in 1e-5..0.1f64,
    ) {
        let run = |au: f64| {
            let mut tape = Tape::new();
            let t = tape.leaf(TemporalSignal::scalar(task)).unwrap();
            let cu_id = tape.leaf(TemporalSignal::scalar(cu)).unwrap();
            let cp_id = tape.leaf(TemporalSignal::scalar(cp)).unwrap();
            let out = total_loss(&mut tape, t, &[(cu_id, cp_id)], au, alpha_p).unwrap();
            tape.value(out.total).scalar_value()
        };
        let (t1, t2) = (run(alpha_u), run(2.0 * alpha_u));
        let share1 = t1 - task - alpha_p * cp;
        let share2 = t2 - task - alpha_p * cp;
        // The products themselves double exactly; extracting them from the
        // rounded totals may cost a few ulps of `task`.
        prop_assert_eq!(2.0 * (alpha_u * cu), (2.0 * alpha_u) * cu);
        prop_assert!((share2 - 2.0 * share1).abs() <= 1e-12 * (1.0 + task.abs()));
    }

    /// The breakdown agrees with an independent quadratic DP.
    #[test]
    fn wer_matches_reference_dp(
        hyp in proptest::collection::vec(0u8..5, 0..24),
        reference in proptest::collection::vec(0u8..5, 1..24),
    ) {
        let breakdown = wer(&hyp, &reference).unwrap();
        let expected = levenshtein(&hyp, &reference);
        prop_assert_eq!(breakdown.errors(), expected);
        prop_assert_eq!(
            breakdown.substitutions + breakdown.insertions + breakdown.deletions,
            expected
        );
        prop_assert!((breakdown.rate() - expected as f64 / reference.len() as f64).abs() < 1e-15);
    }

    /// Identical generator inputs give bitwise-identical datasets.
    #[test]
    fn dataset_generation_is_deterministic(seed in 0u64..500) {
        use liftpool::data::{gen_dataset, TaskKind};
        for task in [TaskKind::BandMix, TaskKind::SpikePattern] {
            let a = gen_dataset(task, seed, 8).unwrap();
            let b = gen_dataset(task, seed, 8).unwrap();
            for (sa, sb) in a.samples.iter().zip(&b.samples) {
                prop_assert_eq!(sa.label, sb.label);
                prop_assert_eq!(sa.signal.data(), sb.signal.data());
            }
        }
    }

    /// Stochastic pooling in eval mode needs no rng and is repeatable.
    #[test]
    fn stochastic_eval_is_deterministic(x in arb_signal(2, 2, 1..=16, -3.0, 3.0)) {
        let run = || {
            let mut tape = Tape::new();
            let xid = tape.leaf(x.clone()).unwrap();
            let y = tape.pool_stochastic(xid, Mode::Eval, None).unwrap();
            tape.value(y).clone()
        };
        let (first, second) = (run(), run());
        prop_assert_eq!(first.data(), second.data());
    }
}

/// Plain cost-matrix Levenshtein, structured differently from the library's
/// backtraced version.
fn levenshtein(a: &[u8], b: &[u8]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &av) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &bv) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(av != bv);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
