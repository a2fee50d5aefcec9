//! Seedable slotted Monte Carlo simulation of the full system: source,
//! threshold transmitter, delayed channel and estimating receiver.
//!
//! Slot ordering, fixed to match the kernel's timing convention:
//!
//! 1. if the channel is idle and `Δ_k >= τ`, start transmitting `X_k` and
//!    draw the full duration `T` (under A2 a draw beyond `t_max` becomes a
//!    discard at the end of slot `t_max`);
//! 2. the source steps (flip with probability `p`);
//! 3. a transmission whose duration elapses at this boundary delivers
//!    (`X̂_{k+1}` becomes the transmitted value) or discards (estimate
//!    unchanged), freeing the channel either way;
//! 4. `Δ_{k+1} = 0` if `X_{k+1} = X̂_{k+1}`, else `Δ_k + 1`.
//!
//! Reproducibility: run `r` draws from a ChaCha12 generator keyed by the
//! SplitMix64 expansion of `seed` (rand's `seed_from_u64`) with the ChaCha
//! stream counter set to `r`. Per-run results merge by a commutative mean /
//! across-run standard error, so scheduling never changes the output; fixed
//! seeds give bit-identical results.

use std::io::Write;
use std::num::NonZeroUsize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::Error;
use crate::model::{Assumption, DelaySpec, ModelParams, PolicyThreshold};

/// Simulation plan: model, policy, horizon and seeding.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    pub tau: PolicyThreshold,
    /// Slots per run; at least 1000.
    pub epochs: u64,
    /// Independent runs; at least 2 so a standard error exists.
    pub runs: u32,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.epochs < 1000 {
            return Err(Error::TooFewEpochs(self.epochs));
        }
        if self.runs < 2 {
            return Err(Error::TooFewRuns(self.runs));
        }
        Ok(())
    }
}

/// Aggregated outcome of a batch of runs.
#[derive(Debug, Clone)]
pub struct SimResult {
    /// Mean of the per-run time-average AoII.
    pub mean_aoii: f64,
    /// Across-run standard error of the mean.
    pub stderr: f64,
    pub per_run_means: Vec<f64>,
    /// Totals across all runs.
    pub transmissions_started: u64,
    pub deliveries: u64,
    pub discards: u64,
}

/// Draw one transmission duration. Returns `(duration, discarded)`:
/// under A1 the duration follows the pmf; under A2 the overflow mass maps
/// to `(t_max, true)`.
pub fn sample_delay<R: Rng>(
    delay: &DelaySpec,
    assumption: Assumption,
    rng: &mut R,
) -> (usize, bool) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 1;
    for t in 1..=delay.t_max() {
        let q = delay.prob(t);
        if q > 0.0 {
            acc += q;
            last_positive = t;
            if u < acc {
                return (t, false);
            }
        }
    }
    match assumption {
        // Rounding can leave u just past the accumulated body mass.
        Assumption::A1 => (last_positive, false),
        Assumption::A2 => (delay.t_max(), true),
    }
}

/// Deterministic per-run generator: `seed` keys the cipher, the run index
/// selects the stream.
fn run_rng(seed: u64, run: u32) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

struct RunOutcome {
    mean: f64,
    started: u64,
    delivered: u64,
    discarded: u64,
}

struct Flight {
    value: bool,
    duration: usize,
    elapsed: usize,
    discard: bool,
}

fn run_single(
    params: &ModelParams,
    tau: PolicyThreshold,
    epochs: u64,
    rng: &mut ChaCha12Rng,
    mut trace: Option<&mut dyn Write>,
) -> std::io::Result<RunOutcome> {
    let p = params.p();
    let assumption = params.assumption();
    let delay = params.delay();

    let mut x = false;
    let mut xhat = false;
    let mut delta: u64 = 0;
    let mut flight: Option<Flight> = None;
    let mut acc: f64 = 0.0;
    let mut started = 0u64;
    let mut delivered = 0u64;
    let mut discarded = 0u64;

    for slot in 0..epochs {
        if let Some(sink) = trace.as_deref_mut() {
            let (t, i) = match &flight {
                None => (0usize, -1i8),
                Some(f) => (f.elapsed, if f.value == xhat { 0 } else { 1 }),
            };
            writeln!(sink, "{slot},{},{},{delta},{t},{i}", x as u8, xhat as u8)?;
        }
        acc += delta as f64;

        // 1. Decision: only an idle channel may start a transmission.
        if flight.is_none() && tau.transmits_at(delta) {
            let (duration, discard) = sample_delay(delay, assumption, rng);
            flight = Some(Flight {
                value: x,
                duration,
                elapsed: 0,
                discard,
            });
            started += 1;
        }

        // 2. Source step.
        if rng.random::<f64>() < p {
            x = !x;
        }

        // 3. Delivery boundary.
        if let Some(f) = flight.as_mut() {
            f.elapsed += 1;
            if f.elapsed == f.duration {
                if f.discard {
                    discarded += 1;
                } else {
                    xhat = f.value;
                    delivered += 1;
                }
                flight = None;
            }
        }

        // 4. AoII update; the trajectory may only reset or grow by one.
        let next = if x == xhat { 0 } else { delta + 1 };
        assert!(next == 0 || next == delta + 1);
        delta = next;
    }

    Ok(RunOutcome {
        mean: acc / epochs as f64,
        started,
        delivered,
        discarded,
    })
}

/// Run the batch, parallelizing across runs. Deterministic for a fixed
/// seed regardless of thread count.
pub fn run(config: &SimConfig) -> Result<SimResult, Error> {
    config.validate()?;
    let runs = config.runs as usize;
    let workers = std::thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
        .min(runs);

    let mut outcomes: Vec<Option<RunOutcome>> = Vec::with_capacity(runs);
    outcomes.resize_with(runs, || None);

    if workers <= 1 {
        for (r, slot) in outcomes.iter_mut().enumerate() {
            let mut rng = run_rng(config.seed, r as u32);
            *slot = Some(
                run_single(&config.params, config.tau, config.epochs, &mut rng, None)
                    .expect("no trace sink, io cannot fail"),
            );
        }
    } else {
        let chunk = runs.div_ceil(workers);
        std::thread::scope(|scope| {
            for (w, block) in outcomes.chunks_mut(chunk).enumerate() {
                let params = &config.params;
                let tau = config.tau;
                let epochs = config.epochs;
                let seed = config.seed;
                scope.spawn(move || {
                    for (off, slot) in block.iter_mut().enumerate() {
                        let r = (w * chunk + off) as u32;
                        let mut rng = run_rng(seed, r);
                        *slot = Some(
                            run_single(params, tau, epochs, &mut rng, None)
                                .expect("no trace sink, io cannot fail"),
                        );
                    }
                });
            }
        });
    }

    let outcomes: Vec<RunOutcome> = outcomes
        .into_iter()
        .map(|o| o.expect("all runs filled"))
        .collect();
    Ok(merge(config, &outcomes))
}

/// Like [`run`], additionally streaming run 0's per-slot trace as CSV rows
/// `slot,x,xhat,delta,channel_t,i` (header included).
pub fn run_traced(config: &SimConfig, sink: &mut dyn Write) -> Result<SimResult, Error> {
    config.validate()?;
    writeln!(sink, "slot,x,xhat,delta,channel_t,i")?;
    let mut outcomes = Vec::with_capacity(config.runs as usize);
    for r in 0..config.runs {
        let mut rng = run_rng(config.seed, r);
        let trace: Option<&mut dyn Write> = if r == 0 { Some(sink) } else { None };
        outcomes.push(run_single(
            &config.params,
            config.tau,
            config.epochs,
            &mut rng,
            trace,
        )?);
    }
    Ok(merge(config, &outcomes))
}

fn merge(config: &SimConfig, outcomes: &[RunOutcome]) -> SimResult {
    let n = outcomes.len() as f64;
    let per_run_means: Vec<f64> = outcomes.iter().map(|o| o.mean).collect();
    let mean = per_run_means.iter().sum::<f64>() / n;
    let var = per_run_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (n - 1.0);
    let stderr = (var / n).sqrt();
    let started: u64 = outcomes.iter().map(|o| o.started).sum();
    let delivered: u64 = outcomes.iter().map(|o| o.delivered).sum();
    let discarded: u64 = outcomes.iter().map(|o| o.discarded).sum();
    if config.params.assumption() == Assumption::A1 {
        debug_assert_eq!(discarded, 0);
    }
    SimResult {
        mean_aoii: mean,
        stderr,
        per_run_means,
        transmissions_started: started,
        deliveries: delivered,
        discards: discarded,
    }
}
