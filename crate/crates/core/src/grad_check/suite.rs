//! The standard check suite: every differentiable operator, then the full
//! lifting layer with its composite loss, against central differences.
//!
//! Nondifferentiable points are avoided by construction (margin sampling
//! around kinks, frozen sampling paths for stochastic pooling), so failures
//! mean wrong adjoints, not unlucky draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finite_diff_grad, max_rel_err, CheckResult, SuiteReport};
use crate::error::Result;
use crate::ops::NormKind;
use crate::pooling::Mode;
use crate::signal::TemporalSignal;
use crate::tape::{Tape, ValueId};
use crate::tlp::{tlp_forward, total_loss, Fusion, TlpBound, TlpConfig, TlpParams};

const OP_TOL: f64 = 1e-5;
const COMPOSITION_TOL: f64 = 1e-4;
const EPS: f64 = 1e-6;

/// Uniform values in `[-amp, amp]`.
fn smooth(rng: &mut ChaCha8Rng, b: usize, c: usize, t: usize, amp: f64) -> TemporalSignal {
    TemporalSignal::from_fn(b, c, t, |_, _, _| rng.random_range(-amp..amp))
}

/// Random sign, magnitude in `[lo, hi]`: keeps a margin around zero.
fn margined(rng: &mut ChaCha8Rng, b: usize, c: usize, t: usize, lo: f64, hi: f64) -> TemporalSignal {
    TemporalSignal::from_fn(b, c, t, |_, _, _| {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        sign * rng.random_range(lo..hi)
    })
}

/// Stride-2 windows `(a, a + delta)` with `|delta| >= 0.2`, so an eps nudge
/// never flips a max.
fn separated_windows(rng: &mut ChaCha8Rng, b: usize, c: usize, t: usize) -> TemporalSignal {
    let mut s = TemporalSignal::zeros(b, c, t);
    for n in 0..b {
        for ch in 0..c {
            let row = s.row_mut(n, ch);
            for w in 0..t / 2 {
                let a: f64 = rng.random_range(-1.0..1.0);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                row[2 * w] = a;
                row[2 * w + 1] = a + sign * rng.random_range(0.2..1.0);
            }
        }
    }
    s
}

/// Windows where the stochastic-pooling pick cannot move under an eps nudge:
/// exactly one clearly positive element, or none at all.
fn frozen_choice_windows(rng: &mut ChaCha8Rng, b: usize, c: usize, t: usize) -> TemporalSignal {
    let mut s = TemporalSignal::zeros(b, c, t);
    for n in 0..b {
        for ch in 0..c {
            let row = s.row_mut(n, ch);
            for w in 0..t / 2 {
                let pos = rng.random_range(0.2..1.2);
                let neg = -rng.random_range(0.2..1.2);
                match rng.random_range(0..3) {
                    0 => {
                        row[2 * w] = pos;
                        row[2 * w + 1] = neg;
                    }
                    1 => {
                        row[2 * w] = neg;
                        row[2 * w + 1] = pos;
                    }
                    _ => {
                        row[2 * w] = neg;
                        row[2 * w + 1] = -rng.random_range(0.2..1.2);
                    }
                }
            }
        }
    }
    s
}

/// Smooth scalarizer with nonzero gradient almost everywhere.
fn scalarize(tape: &mut Tape, y: ValueId) -> ValueId {
    let shifted = tape.offset(y, 0.7);
    tape.mean_sq(shifted)
}

/// Worst relative disagreement between the tape gradient and central
/// differences, over every coordinate of every input.
fn max_err_of<F>(inputs: &[TemporalSignal], f: F) -> Result<f64>
where
    F: Fn(&mut Tape, &[ValueId]) -> Result<ValueId>,
{
    let mut tape = Tape::new();
    let ids: Vec<ValueId> = inputs
        .iter()
        .map(|s| tape.leaf(s.clone()))
        .collect::<Result<_>>()?;
    let scalar = f(&mut tape, &ids)?;
    let grads = tape.backward(scalar)?;
    let analytic: Vec<Vec<f64>> = ids.iter().map(|&id| grads.grad(id).data().to_vec()).collect();

    let mut worst: f64 = 0.0;
    for which in 0..inputs.len() {
        let fd = finite_diff_grad(
            |probe| {
                let mut tape = Tape::new();
                let mut ids = Vec::with_capacity(inputs.len());
                for (j, s) in inputs.iter().enumerate() {
                    let v = if j == which { probe.clone() } else { s.clone() };
                    ids.push(tape.leaf(v)?);
                }
                let sid = f(&mut tape, &ids)?;
                Ok(tape.value(sid).scalar_value())
            },
            &inputs[which],
            EPS,
        )?;
        worst = worst.max(max_rel_err(&analytic[which], fd.data()));
    }
    Ok(worst)
}

/// Randomized lifting-layer parameters: seeded shapes from `TlpParams::init`,
/// then every tensor resampled so all paths carry signal (affine scales stay
/// clearly positive).
fn random_tlp(rng: &mut ChaCha8Rng, channels: usize, config: TlpConfig) -> Result<TlpParams> {
    let mut tlp = TlpParams::init(channels, config, rng)?;
    for i in 0..tlp.params.len() {
        let positive = tlp.params.name(i).ends_with("gamma");
        let t = tlp.params.tensor_mut(i);
        for v in t.data_mut() {
            *v = if positive { rng.random_range(0.5..1.5) } else { rng.random_range(-0.6..0.6) };
        }
    }
    Ok(tlp)
}

fn composition_check(rng: &mut ChaCha8Rng, fusion: Fusion) -> Result<f64> {
    let config = TlpConfig { kernel: 3, weighting_kernel: 3, fusion };
    let channels = 2;
    let tlp = random_tlp(rng, channels, config)?;
    let mut inputs = vec![smooth(rng, 1, channels, 8, 1.0)];
    for (_, tensor) in tlp.params.iter() {
        inputs.push(tensor.clone());
    }
    let template = tlp.params.clone();
    max_err_of(&inputs, move |tape, ids| {
        let bound =
            TlpBound::from_ids(channels, config, &template, ids[1..].to_vec(), "")?;
        let out = tlp_forward(tape, &bound, ids[0])?;
        let task = scalarize(tape, out.y);
        let loss = total_loss(tape, task, &[(out.c_u, out.c_p)], 1e-3, 1e-3)?;
        Ok(loss.total)
    })
}

/// Runs every check `n_seeds` times and keeps the worst error per check.
pub fn run_suite(base_seed: u64, n_seeds: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    let record = |report: &mut SuiteReport, name: &str, err: f64, tol: f64| {
        match report.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => c.max_rel_err = c.max_rel_err.max(err),
            None => report.checks.push(CheckResult {
                name: name.to_string(),
                max_rel_err: err,
                tolerance: tol,
            }),
        }
    };

    for step in 0..n_seeds.max(1) {
        let rng = &mut ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(step as u64));

        let checks: Vec<(&str, f64, f64)> = vec![
            ("conv1d", OP_TOL, {
                let inputs = [
                    smooth(rng, 2, 3, 7, 1.0),
                    smooth(rng, 4, 3, 3, 0.7),
                    smooth(rng, 4, 1, 1, 0.3),
                ];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.conv1d(ids[0], ids[1], ids[2], 1)?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("conv1d-depthwise", OP_TOL, {
                let inputs = [
                    smooth(rng, 1, 4, 8, 1.0),
                    smooth(rng, 4, 1, 5, 0.7),
                    smooth(rng, 4, 1, 1, 0.3),
                ];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.conv1d(ids[0], ids[1], ids[2], 4)?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("relu", OP_TOL, {
                let inputs = [margined(rng, 2, 2, 6, 0.2, 1.2)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.relu(ids[0]);
                    Ok(scalarize(tape, y))
                })?
            }),
            ("tanh", OP_TOL, {
                let inputs = [smooth(rng, 2, 2, 6, 1.5)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.tanh(ids[0]);
                    Ok(scalarize(tape, y))
                })?
            }),
            ("sigmoid", OP_TOL, {
                let inputs = [smooth(rng, 2, 2, 6, 2.0)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.sigmoid(ids[0]);
                    Ok(scalarize(tape, y))
                })?
            }),
            ("instance-norm", OP_TOL, {
                let inputs = [
                    margined(rng, 2, 3, 6, 0.2, 1.2),
                    TemporalSignal::from_fn(1, 3, 1, |_, _, _| rng.random_range(0.5..1.5)),
                    smooth(rng, 1, 3, 1, 0.5),
                ];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.normalize(NormKind::Instance, ids[0], ids[1], ids[2], 1e-5)?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("batch-norm", OP_TOL, {
                let inputs = [
                    margined(rng, 2, 2, 5, 0.2, 1.2),
                    TemporalSignal::from_fn(1, 2, 1, |_, _, _| rng.random_range(0.5..1.5)),
                    smooth(rng, 1, 2, 1, 0.5),
                ];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.normalize(NormKind::Batch, ids[0], ids[1], ids[2], 1e-5)?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("mul", OP_TOL, {
                let inputs = [smooth(rng, 2, 2, 4, 1.0), smooth(rng, 2, 2, 4, 1.0)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.mul(ids[0], ids[1])?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("add-scale-offset", OP_TOL, {
                let inputs = [smooth(rng, 1, 2, 5, 1.0), smooth(rng, 1, 2, 5, 1.0)];
                max_err_of(&inputs, |tape, ids| {
                    let s = tape.add(ids[0], ids[1])?;
                    let sc = tape.scale(s, 1.3);
                    let y = tape.offset(sc, -0.2);
                    Ok(scalarize(tape, y))
                })?
            }),
            ("split-interleave", OP_TOL, {
                let inputs = [smooth(rng, 1, 2, 6, 1.0)];
                max_err_of(&inputs, |tape, ids| {
                    let even = tape.stride2_sample(ids[0], 0)?;
                    let odd = tape.stride2_sample(ids[0], 1)?;
                    let y = tape.interleave2(even, odd)?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("replicate-pad", OP_TOL, {
                let inputs = [smooth(rng, 1, 2, 5, 1.0)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.replicate_pad_to_even(ids[0]);
                    Ok(scalarize(tape, y))
                })?
            }),
            ("concat-channels", OP_TOL, {
                let inputs = [smooth(rng, 1, 2, 4, 1.0), smooth(rng, 1, 3, 4, 1.0)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.concat_channels(ids[0], ids[1])?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("global-avg-time", OP_TOL, {
                let inputs = [smooth(rng, 2, 3, 5, 1.0)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.global_avg_time(ids[0]);
                    Ok(scalarize(tape, y))
                })?
            }),
            ("mean-sq", OP_TOL, {
                let inputs = [smooth(rng, 2, 2, 4, 1.0)];
                max_err_of(&inputs, |tape, ids| Ok(tape.mean_sq(ids[0])))?
            }),
            ("cross-entropy", OP_TOL, {
                let inputs = [smooth(rng, 3, 4, 1, 1.5)];
                max_err_of(&inputs, |tape, ids| tape.cross_entropy(ids[0], &[0, 2, 3]))?
            }),
            ("pool-max", OP_TOL, {
                let inputs = [separated_windows(rng, 2, 2, 8)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.pool_fixed(crate::pooling::FixedPool::Max, ids[0])?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("pool-avg", OP_TOL, {
                let inputs = [smooth(rng, 2, 2, 8, 1.0)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.pool_fixed(crate::pooling::FixedPool::Average, ids[0])?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("pool-lp", OP_TOL, {
                let inputs = [margined(rng, 2, 2, 8, 0.2, 1.2)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.pool_lp(ids[0], 2.5)?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("pool-mixed", OP_TOL, {
                let inputs = [separated_windows(rng, 1, 2, 8), smooth(rng, 1, 1, 1, 1.5)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.pool_mixed(ids[0], ids[1])?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("pool-soft", OP_TOL, {
                let inputs = [smooth(rng, 2, 2, 8, 1.5)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.pool_soft(ids[0])?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("pool-stochastic-eval", OP_TOL, {
                let inputs = [margined(rng, 2, 2, 8, 0.2, 1.2)];
                max_err_of(&inputs, |tape, ids| {
                    let y = tape.pool_stochastic(ids[0], Mode::Eval, None)?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("pool-stochastic-train", OP_TOL, {
                let inputs = [frozen_choice_windows(rng, 1, 2, 8)];
                let draw_seed = base_seed.wrapping_add(1_000 + step as u64);
                max_err_of(&inputs, move |tape, ids| {
                    let mut draw = ChaCha8Rng::seed_from_u64(draw_seed);
                    let y = tape.pool_stochastic(ids[0], Mode::Train, Some(&mut draw))?;
                    Ok(scalarize(tape, y))
                })?
            }),
            ("lifting-layer", COMPOSITION_TOL, composition_check(rng, Fusion::Sum)?),
            (
                "lifting-layer-bottleneck",
                COMPOSITION_TOL,
                composition_check(rng, Fusion::Bottleneck)?,
            ),
        ];
        for (name, tol, err) in checks {
            record(&mut report, name, err, tol);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_a_few_seeds() {
        let report = run_suite(11, 3).unwrap();
        assert!(report.checks.len() >= 20, "only {} checks", report.checks.len());
        for c in &report.checks {
            assert!(c.passed(), "{} err {} > tol {}", c.name, c.max_rel_err, c.tolerance);
        }
        assert!(report.all_passed());
    }

    #[test]
    fn suite_is_deterministic() {
        let a = run_suite(5, 2).unwrap();
        let b = run_suite(5, 2).unwrap();
        let errs = |r: &SuiteReport| r.checks.iter().map(|c| c.max_rel_err).collect::<Vec<_>>();
        assert_eq!(errs(&a), errs(&b));
    }
}
