//! Expected AoII achieved by a threshold policy.
//!
//! The stationary expectation splits as
//! `Δ̄_τ = Σ_{Δ<τ} C(Δ,0) π_Δ + Σ_{Δ=τ}^{ω-1} C(Δ,1) π_Δ + Σ`, where the
//! tail series `Σ = Σ_{Δ>=ω} C(Δ,1) π_Δ` closes analytically: beyond `ω`
//! each `π_Δ` feeds from exactly the `t_max` predecessors `Δ - t`, with
//! Δ-independent weights and the Δ-independent cost increment `Δ'_t`, so the
//! whole series reduces to a ratio. The never-transmit policy has the closed
//! value `1/(2p)`.

use crate::cost::{action_cost, tail_cost_increment};
use crate::error::Error;
use crate::kernel::{delivered_kernel, discard_kernel};
use crate::model::{Action, Assumption, ModelParams, PolicyThreshold};
use crate::stationary::{solve_stationary, solve_stationary_smalltau, StationarySolution};

/// Expected AoII with its three-way decomposition.
#[derive(Debug, Clone)]
pub struct AoiiReport {
    /// `Δ̄_τ` in slots.
    pub expected_aoii: f64,
    /// `Σ_{Δ<τ} C(Δ,0) π_Δ`.
    pub idle_sum: f64,
    /// `Σ_{Δ=τ}^{ω-1} C(Δ,1) π_Δ`.
    pub head_busy_sum: f64,
    /// Tail series `Σ`.
    pub tail_sigma: f64,
    /// Policy the report was computed for.
    pub tau: PolicyThreshold,
    /// Parameter echo.
    pub params: ModelParams,
}

/// `Δ̄_∞ = 1/(2p)`: under the never-transmit policy the estimate freezes
/// and the AoII is a plain reset process.
pub fn expected_aoii_infinite_tau(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p <= 0.5);
    1.0 / (2.0 * p)
}

/// Tail series `Σ = Σ_{Δ>=ω} C(Δ,1) π_Δ` for a finite threshold, from the
/// assumption-appropriate closed ratio.
pub fn tail_sigma(
    params: &ModelParams,
    tau: usize,
    stat: &StationarySolution,
) -> Result<f64, Error> {
    params.require_analytic()?;
    let t_max = params.t_max();
    let omega = t_max + tau + 1;
    if stat.omega() != omega {
        return Err(Error::OmegaMismatch {
            got: stat.omega(),
            expected: omega,
        });
    }
    let p = params.p();
    let delay = params.delay();
    let pi = stat.pi();
    let cost = |i: usize| action_cost(params, i, Action::Transmit);

    let mut numer = 0.0;
    let mut recirc = 0.0;
    match params.assumption() {
        Assumption::A1 => {
            for t in 1..=t_max {
                let growth = delivered_kernel(p, 1, 1 + t, t);
                // The kernel is the one source of truth for this weight;
                // the closed form p(1-p)^(t-1) survives only as a check.
                debug_assert!((growth - p * (1.0 - p).powi(t as i32 - 1)).abs() <= 1e-12);
                let w = delay.prob(t) * growth;
                recirc += w;
                let head_cost: f64 = (omega - t..omega).map(|i| cost(i) * pi[i]).sum();
                let head_mass: f64 = (omega - t..omega).map(|i| pi[i]).sum();
                let pi_t = w * (head_mass + stat.tail());
                numer += w * head_cost + tail_cost_increment(params, t)? * pi_t;
            }
        }
        Assumption::A2 => {
            let upsilon = |arrive: usize, t: usize| {
                delay.prob(t) * delivered_kernel(p, arrive - t, arrive, t)
                    + delay.overflow() * discard_kernel(p, t_max, arrive - t, arrive)
            };
            for t in 1..=t_max {
                let head: f64 = (omega - t..omega)
                    .map(|i| upsilon(i + t, t) * cost(i) * pi[i])
                    .sum();
                let pi_t: f64 = (omega - t..omega)
                    .map(|i| upsilon(i + t, t) * pi[i])
                    .sum::<f64>()
                    + upsilon(omega + t, t) * stat.tail();
                recirc += upsilon(omega + t, t);
                numer += head + tail_cost_increment(params, t)? * pi_t;
            }
        }
    }

    let denom = 1.0 - recirc;
    if denom <= 0.0 {
        return Err(Error::TailDenominator(denom));
    }
    Ok(numer / denom)
}

/// Assemble the report from an already-computed stationary solution for the
/// same `(params, tau)`.
pub fn expected_aoii_from_solution(
    params: &ModelParams,
    tau: usize,
    stat: &StationarySolution,
) -> Result<AoiiReport, Error> {
    let omega = params.t_max() + tau + 1;
    if stat.omega() != omega {
        return Err(Error::OmegaMismatch {
            got: stat.omega(),
            expected: omega,
        });
    }
    let pi = stat.pi();
    let idle_sum = (0..tau).fold(0.0, |acc, i| acc + i as f64 * pi[i]);
    let head_busy_sum = (tau..omega).fold(0.0, |acc, i| {
        acc + action_cost(params, i, Action::Transmit) * pi[i]
    });
    let sigma = tail_sigma(params, tau, stat)?;
    Ok(AoiiReport {
        expected_aoii: idle_sum + head_busy_sum + sigma,
        idle_sum,
        head_busy_sum,
        tail_sigma: sigma,
        tau: PolicyThreshold::Finite(tau),
        params: params.clone(),
    })
}

/// Expected AoII of threshold policy `tau`: `τ = ∞` uses the closed form,
/// `τ ∈ {0,1}` the explicit small-τ stationary law, `τ >= 2` the full
/// linear system.
pub fn expected_aoii(params: &ModelParams, tau: PolicyThreshold) -> Result<AoiiReport, Error> {
    match tau {
        PolicyThreshold::Infinite => {
            let value = expected_aoii_infinite_tau(params.p());
            Ok(AoiiReport {
                expected_aoii: value,
                idle_sum: value,
                head_busy_sum: 0.0,
                tail_sigma: 0.0,
                tau,
                params: params.clone(),
            })
        }
        PolicyThreshold::Finite(tau) => {
            let stat = if tau <= 1 {
                solve_stationary_smalltau(params, tau)?
            } else {
                solve_stationary(params, tau)?
            };
            expected_aoii_from_solution(params, tau, &stat)
        }
    }
}
