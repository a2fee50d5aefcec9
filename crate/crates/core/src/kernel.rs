//! Multi-step state transition probabilities between idle states.
//!
//! With the channel busy the transmitter cannot act, so every busy excursion
//! can be folded into a single idle-to-idle jump. `P^t_{Δ,Δ'}(1)` is the
//! probability that transmitting at AoII `Δ` lands the chain at idle AoII
//! `Δ'` given the transmission takes `t` slots; `P^{t+}_{Δ,Δ'}(1)` is the
//! analogous discard branch under assumption 2. [`aggregate_kernel`] weights
//! them by the delay law.
//!
//! Timing convention (fixed globally): the update transmitted at slot `k`
//! carries the source value `X_k`, and a duration-`t` delivery sets the
//! receiver's estimate at slot `k + t`. This is what makes the `t = 1`
//! kernel reduce to the flip probability `p`.

use crate::error::Error;
use crate::model::{same_state_prob, Action, Assumption, ModelParams};

/// `P^t_{Δ,Δ'}(1)` for a delivered transmission of duration `t`.
/// The same expressions hold under both assumptions.
pub fn conditional_kernel(
    params: &ModelParams,
    delta: usize,
    delta_prime: usize,
    t: usize,
) -> Result<f64, Error> {
    let t_max = params.t_max();
    if t < 1 || t > t_max {
        return Err(Error::DurationOutOfRange { t, t_max });
    }
    Ok(delivered_kernel(params.p(), delta, delta_prime, t))
}

/// `P^{t+}_{Δ,Δ'}(1)`: the transmission occupies all `t_max` slots and the
/// update is discarded at the end. Assumption 2 only.
pub fn terminated_kernel(
    params: &ModelParams,
    delta: usize,
    delta_prime: usize,
) -> Result<f64, Error> {
    if params.assumption() != Assumption::A2 {
        return Err(Error::DiscardKernelUnderA1);
    }
    Ok(discard_kernel(
        params.p(),
        params.t_max(),
        delta,
        delta_prime,
    ))
}

/// Aggregated idle-to-idle transition probability `P_{Δ,Δ'}(a)`.
///
/// Action 0 is delay-independent: from `Δ = 0` the mass splits `1-p` to 0
/// and `p` to 1; from `Δ > 0` it splits `p` to 0 and `1-p` to `Δ+1`.
/// Action 1 sums `p_t P^t_{Δ,Δ'}(1)` over durations, plus the
/// `p_{t+} P^{t+}_{Δ,Δ'}(1)` discard term under assumption 2.
pub fn aggregate_kernel(
    params: &ModelParams,
    delta: usize,
    delta_prime: usize,
    action: Action,
) -> f64 {
    let p = params.p();
    match action {
        Action::Idle => {
            if delta == 0 {
                match delta_prime {
                    0 => 1.0 - p,
                    1 => p,
                    _ => 0.0,
                }
            } else if delta_prime == 0 {
                p
            } else if delta_prime == delta + 1 {
                1.0 - p
            } else {
                0.0
            }
        }
        Action::Transmit => {
            let delay = params.delay();
            let mut total = 0.0;
            for t in 1..=delay.t_max() {
                let w = delay.prob(t);
                if w > 0.0 {
                    total += w * delivered_kernel(p, delta, delta_prime, t);
                }
            }
            if params.assumption() == Assumption::A2 && delay.overflow() > 0.0 {
                total += delay.overflow() * discard_kernel(p, delay.t_max(), delta, delta_prime);
            }
            total
        }
    }
}

pub(crate) fn delivered_kernel(p: f64, delta: usize, delta_prime: usize, t: usize) -> f64 {
    let q = 1.0 - p;
    if delta == 0 {
        if delta_prime == 0 {
            same_state_prob(p, t)
        } else if delta_prime <= t {
            same_state_prob(p, t - delta_prime) * p * q.powi(delta_prime as i32 - 1)
        } else {
            0.0
        }
    } else if delta_prime == 0 {
        same_state_prob(p, t)
    } else if delta_prime == delta + t {
        p * q.powi(t as i32 - 1)
    } else if delta_prime == 1 {
        (1.0 - same_state_prob(p, t - 1)) * q
    } else if delta_prime >= 2 && delta_prime < t {
        (1.0 - same_state_prob(p, t - delta_prime)) * p * p * q.powi(delta_prime as i32 - 2)
    } else {
        0.0
    }
}

pub(crate) fn discard_kernel(p: f64, t_max: usize, delta: usize, delta_prime: usize) -> f64 {
    // The in-flight value equals the estimate when delta = 0, so discarding
    // and delivering are indistinguishable there.
    if delta == 0 {
        return delivered_kernel(p, 0, delta_prime, t_max);
    }
    let q = 1.0 - p;
    if delta_prime == 0 {
        1.0 - same_state_prob(p, t_max)
    } else if delta_prime == delta + t_max {
        q.powi(t_max as i32)
    } else if delta_prime < t_max {
        (1.0 - same_state_prob(p, t_max - delta_prime)) * p * q.powi(delta_prime as i32 - 1)
    } else {
        0.0
    }
}

/// One named structural check on the aggregate kernel.
#[derive(Debug, Clone)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub pass: bool,
    pub counterexample: Option<String>,
}

/// Outcome of [`verify_kernel_properties`].
#[derive(Debug, Clone)]
pub struct KernelPropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl KernelPropertyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// First failing check, if any.
    pub fn first_failure(&self) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Check the structural properties of `P_{Δ,Δ'}(1)` over `Δ, Δ' <= 3 t_max`
/// and shifts `δ <= t_max`:
///
/// 1. Δ-independence for `0 <= Δ' <= t_max - 1` on the stated region
///    (A1: `Δ >= Δ'`; A2: `Δ >= max{1, Δ'}`);
/// 2. shift invariance `P_{Δ,Δ'} = P_{Δ+δ,Δ'+δ}` for `Δ' >= t_max`
///    (A1: `Δ >= 0`; A2: `Δ > 0`);
/// 3. zero region `Δ' > Δ + t_max` and `t_max - 1 < Δ' < Δ + 1`;
///
/// plus row sums `Σ_{Δ'} P_{Δ,Δ'}(1) = 1` for each `Δ <= 3 t_max`.
pub fn verify_kernel_properties(params: &ModelParams) -> KernelPropertyReport {
    let t_max = params.t_max();
    let hi = 3 * t_max;
    let a2 = params.assumption() == Assumption::A2;
    let tol = 1e-12;

    let mut checks = Vec::new();

    // Property 1: Δ-independence on the stated region.
    let mut p1 = PropertyCheck {
        name: "delta-independence",
        pass: true,
        counterexample: None,
    };
    'p1: for dp in 0..t_max {
        let base_delta = if a2 { dp.max(1) } else { dp };
        let reference = aggregate_kernel(params, base_delta, dp, Action::Transmit);
        for delta in base_delta..=hi {
            let got = aggregate_kernel(params, delta, dp, Action::Transmit);
            if (got - reference).abs() > tol {
                p1.pass = false;
                p1.counterexample = Some(format!(
                    "P_{{{delta},{dp}}}(1) = {got} differs from P_{{{base_delta},{dp}}}(1) = {reference}"
                ));
                break 'p1;
            }
        }
    }
    checks.push(p1);

    // Property 2: shift invariance for Δ' >= t_max.
    let mut p2 = PropertyCheck {
        name: "shift-invariance",
        pass: true,
        counterexample: None,
    };
    let p2_delta_lo = if a2 { 1 } else { 0 };
    'p2: for delta in p2_delta_lo..=hi {
        for dp in t_max..=hi {
            let reference = aggregate_kernel(params, delta, dp, Action::Transmit);
            for shift in 1..=t_max {
                let got = aggregate_kernel(params, delta + shift, dp + shift, Action::Transmit);
                if (got - reference).abs() > tol {
                    p2.pass = false;
                    p2.counterexample = Some(format!(
                        "P_{{{},{}}}(1) = {got} differs from P_{{{delta},{dp}}}(1) = {reference}",
                        delta + shift,
                        dp + shift
                    ));
                    break 'p2;
                }
            }
        }
    }
    checks.push(p2);

    // Property 3: zero region.
    let mut p3 = PropertyCheck {
        name: "zero-region",
        pass: true,
        counterexample: None,
    };
    'p3: for delta in 0..=hi {
        for dp in 0..=hi + 2 * t_max {
            let in_gap = dp > t_max - 1 && dp < delta + 1;
            let beyond = dp > delta + t_max;
            if !(in_gap || beyond) {
                continue;
            }
            let got = aggregate_kernel(params, delta, dp, Action::Transmit);
            if got.abs() > tol {
                p3.pass = false;
                p3.counterexample = Some(format!(
                    "P_{{{delta},{dp}}}(1) = {got} inside the zero region"
                ));
                break 'p3;
            }
        }
    }
    checks.push(p3);

    // Row sums and entry ranges for both actions.
    let mut rows = PropertyCheck {
        name: "row-sums",
        pass: true,
        counterexample: None,
    };
    'rows: for delta in 0..=hi {
        for action in [Action::Idle, Action::Transmit] {
            let mut sum = 0.0;
            for dp in 0..=delta + t_max + 1 {
                let entry = aggregate_kernel(params, delta, dp, action);
                if !(-tol..=1.0 + tol).contains(&entry) {
                    rows.pass = false;
                    rows.counterexample = Some(format!(
                        "P_{{{delta},{dp}}}({action:?}) = {entry} outside [0,1]"
                    ));
                    break 'rows;
                }
                sum += entry;
            }
            if (sum - 1.0).abs() > tol {
                rows.pass = false;
                rows.counterexample =
                    Some(format!("row Δ={delta}, action {action:?} sums to {sum}"));
                break 'rows;
            }
        }
    }
    checks.push(rows);

    KernelPropertyReport { checks }
}
