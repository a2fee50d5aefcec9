//! Brute-force validators, kept independent of the closed forms they check.
//!
//! Two oracles live here:
//!
//! * exhaustive source-path enumeration over the `2^t` flip sequences of a
//!   single transmission, validating the multi-step kernels and the
//!   per-transmission cost sums;
//! * a truncated full-state chain over the triplets `(Δ, t, i)` — including
//!   the busy states the kernel module folds away — solved by power
//!   iteration, validating stationary laws and the expected AoII end to end.
//!
//! The busy-state single-step law is the per-slot completion hazard
//! `p_t / Σ_{t' >= t} p_{t'}` (with the terminal discard mass joining the
//! denominator under assumption 2), the unique slot-level encoding
//! equivalent in law to drawing the full duration once at transmission
//! start.

use std::collections::{BTreeMap, HashMap};

use crate::error::Error;
use crate::model::{Assumption, ChannelFlag, DelaySpec, ModelParams, PolicyThreshold, SystemState};

const MAX_ENUM_STEPS: usize = 12;

/// Exact distribution of the landing AoII `Δ'` for a delivered transmission
/// of duration `t` starting at idle AoII `delta`, by enumerating all `2^t`
/// source trajectories.
pub fn enumerate_kernel(
    params: &ModelParams,
    delta: usize,
    t: usize,
) -> Result<BTreeMap<usize, f64>, Error> {
    if t == 0 || t > MAX_ENUM_STEPS {
        return Err(Error::EnumerationTooLong(t));
    }
    Ok(enumerate_landing(params.p(), delta, t, true))
}

/// Landing distribution for the discard branch: the transmission occupies
/// `t_max` slots and the estimate never changes. Assumption 2 only.
pub fn enumerate_discard_kernel(
    params: &ModelParams,
    delta: usize,
) -> Result<BTreeMap<usize, f64>, Error> {
    if params.assumption() != Assumption::A2 {
        return Err(Error::DiscardKernelUnderA1);
    }
    let t_max = params.t_max();
    if t_max > MAX_ENUM_STEPS {
        return Err(Error::EnumerationTooLong(t_max));
    }
    Ok(enumerate_landing(params.p(), delta, t_max, false))
}

/// `Σ_η P_η C_η` over all source paths of a duration-`t` transmission,
/// where `C_η` sums the AoII over the occupied slots `0 .. t-1` (start slot
/// included). The delivery boundary never enters, so the value is the same
/// for delivered and discarded transmissions.
pub fn enumerate_cost(params: &ModelParams, delta: usize, t: usize) -> Result<f64, Error> {
    if t == 0 || t > MAX_ENUM_STEPS {
        return Err(Error::EnumerationTooLong(t));
    }
    let p = params.p();
    let start_zero = delta == 0;
    let steps = t - 1;
    let mut total = 0.0;
    for mask in 0u32..(1u32 << steps) {
        let mut prob = 1.0;
        let mut odd = false;
        let mut d = delta;
        let mut cost = delta as f64;
        for j in 0..steps {
            let flip = mask >> j & 1 == 1;
            prob *= if flip { p } else { 1.0 - p };
            odd ^= flip;
            let matched = if start_zero { !odd } else { odd };
            d = if matched { 0 } else { d + 1 };
            cost += d as f64;
        }
        total += prob * cost;
    }
    Ok(total)
}

/// `E[Δ_k]` for an in-progress transmission `k` slots after it started at
/// idle AoII `delta`: the direct check of `C^k(Δ)`.
pub fn enumerate_step_cost(params: &ModelParams, delta: usize, k: usize) -> Result<f64, Error> {
    if k > MAX_ENUM_STEPS {
        return Err(Error::EnumerationTooLong(k));
    }
    let p = params.p();
    let start_zero = delta == 0;
    let mut total = 0.0;
    for mask in 0u32..(1u32 << k) {
        let mut prob = 1.0;
        let mut odd = false;
        let mut d = delta;
        for j in 0..k {
            let flip = mask >> j & 1 == 1;
            prob *= if flip { p } else { 1.0 - p };
            odd ^= flip;
            let matched = if start_zero { !odd } else { odd };
            d = if matched { 0 } else { d + 1 };
        }
        total += prob * d as f64;
    }
    Ok(total)
}

fn enumerate_landing(p: f64, delta: usize, t: usize, delivered: bool) -> BTreeMap<usize, f64> {
    let start_zero = delta == 0;
    let mut dist = BTreeMap::new();
    for mask in 0u32..(1u32 << t) {
        let mut prob = 1.0;
        let mut odd = false;
        let mut d = delta;
        for j in 0..t {
            let flip = mask >> j & 1 == 1;
            prob *= if flip { p } else { 1.0 - p };
            odd ^= flip;
            let last = j + 1 == t;
            // In flight the source is compared to the unchanged estimate; at
            // a delivery boundary the estimate becomes the transmitted value
            // X_0, so the comparison is to the source's start position.
            let matched = if (last && delivered) || start_zero {
                !odd
            } else {
                odd
            };
            d = if matched { 0 } else { d + 1 };
        }
        *dist.entry(d).or_insert(0.0) += prob;
    }
    dist
}

/// Per-boundary completion hazard after `elapsed` in-flight slots: returns
/// `(deliver, discard, continue)` probabilities for the next boundary.
///
/// The continuation mass is accumulated from the same survivor sums rather
/// than derived as `1 - deliver - discard`, so it is exactly zero at the
/// last boundary and no phantom busy state past `t_max` can appear.
fn boundary_hazard(delay: &DelaySpec, assumption: Assumption, elapsed: usize) -> (f64, f64, f64) {
    let t_max = delay.t_max();
    let e = elapsed + 1;
    let overflow = if assumption == Assumption::A2 {
        delay.overflow()
    } else {
        0.0
    };
    let survivor: f64 = (e..=t_max).map(|t| delay.prob(t)).sum::<f64>() + overflow;
    if survivor <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let deliver = delay.prob(e) / survivor;
    let discard = if e == t_max { overflow / survivor } else { 0.0 };
    let carried: f64 = (e + 1..=t_max).map(|t| delay.prob(t)).sum::<f64>()
        + if e < t_max { overflow } else { 0.0 };
    (deliver, discard, carried / survivor)
}

/// Duration law implied by the hazard encoding: `(pmf, discard_mass)`.
/// Must reproduce the `DelaySpec` exactly.
pub fn implied_duration_pmf(delay: &DelaySpec, assumption: Assumption) -> (Vec<f64>, f64) {
    let t_max = delay.t_max();
    let mut pmf = vec![0.0; t_max];
    let mut discard_mass = 0.0;
    let mut in_flight = 1.0;
    for e in 1..=t_max {
        let (d, x, carry) = boundary_hazard(delay, assumption, e - 1);
        pmf[e - 1] = in_flight * d;
        discard_mass += in_flight * x;
        in_flight *= carry;
    }
    (pmf, discard_mass)
}

/// Explicit single-step chain over all `(Δ, t, i)` reachable from
/// `(0, 0, -1)` with `Δ <= delta_cap`; mass destined beyond the cap is
/// absorbed at the cap so every row stays stochastic.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    states: Vec<SystemState>,
    rows: Vec<Vec<(usize, f64)>>,
    delta_cap: usize,
}

impl TruncatedChain {
    pub fn delta_cap(&self) -> usize {
        self.delta_cap
    }

    pub fn states(&self) -> &[SystemState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Outgoing transitions of state `i` as `(target_index, probability)`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Idle-state marginal `π_Δ` for `Δ = 0 ..= delta_cap`, given a
    /// stationary vector aligned with [`TruncatedChain::states`].
    pub fn idle_marginal(&self, stationary: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.delta_cap + 1];
        for (s, &w) in self.states.iter().zip(stationary) {
            if s.is_idle() {
                out[s.delta] += w;
            }
        }
        out
    }

    /// Direct stationary expectation `Σ_s Δ(s) π_s` over the full chain.
    pub fn expected_aoii(&self, stationary: &[f64]) -> f64 {
        self.states
            .iter()
            .zip(stationary)
            .map(|(s, &w)| s.delta as f64 * w)
            .sum()
    }

    /// Stationary mass sitting at the absorption cap (idle and busy), an
    /// upper estimate of the truncated tail.
    pub fn cap_mass(&self, stationary: &[f64]) -> f64 {
        self.states
            .iter()
            .zip(stationary)
            .filter(|(s, _)| s.delta == self.delta_cap)
            .map(|(_, &w)| w)
            .sum()
    }
}

/// Breadth-first expansion of the slot-level dynamics under a threshold
/// policy.
pub fn build_truncated_chain(
    params: &ModelParams,
    tau: PolicyThreshold,
    delta_cap: usize,
) -> Result<TruncatedChain, Error> {
    let t_max = params.t_max();
    let tau_floor = match tau {
        PolicyThreshold::Finite(t) => t,
        PolicyThreshold::Infinite => 0,
    };
    let omega = t_max + tau_floor + 1;
    let need = omega + 10 * t_max;
    if delta_cap < need {
        return Err(Error::CapTooSmall {
            got: delta_cap,
            need,
        });
    }
    let bound = (delta_cap + 1) * (2 * t_max.saturating_sub(1) + 1);
    if bound > 10_000_000 {
        return Err(Error::ChainTooLarge(bound));
    }

    let mut states = Vec::new();
    let mut index: HashMap<SystemState, usize> = HashMap::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let root = SystemState::idle(0);
    states.push(root);
    index.insert(root, 0);
    let mut frontier = vec![0usize];

    while let Some(i) = frontier.pop() {
        if rows.len() <= i {
            rows.resize(i + 1, Vec::new());
        }
        let moves = transitions(params, tau, delta_cap, states[i]);
        let mut row = Vec::with_capacity(moves.len());
        for (target, prob) in moves {
            let j = *index.entry(target).or_insert_with(|| {
                states.push(target);
                frontier.push(states.len() - 1);
                states.len() - 1
            });
            row.push((j, prob));
        }
        rows[i] = row;
    }
    rows.resize(states.len(), Vec::new());

    Ok(TruncatedChain {
        states,
        rows,
        delta_cap,
    })
}

fn transitions(
    params: &ModelParams,
    tau: PolicyThreshold,
    cap: usize,
    state: SystemState,
) -> Vec<(SystemState, f64)> {
    let p = params.p();
    let mut acc: BTreeMap<SystemState, f64> = BTreeMap::new();
    let mut push = |s: SystemState, w: f64| {
        if w > 0.0 {
            *acc.entry(s).or_insert(0.0) += w;
        }
    };

    if state.is_idle() {
        if !tau.transmits_at(state.delta as u64) {
            if state.delta == 0 {
                push(SystemState::idle(0), 1.0 - p);
                push(SystemState::idle(1), p);
            } else {
                push(SystemState::idle(0), p);
                push(SystemState::idle((state.delta + 1).min(cap)), 1.0 - p);
            }
        } else {
            // Transmission starts: the in-flight value equals the estimate
            // exactly when the AoII is zero.
            let same = state.delta == 0;
            resolve_slot(params, state.delta, 0, same, cap, &mut push);
        }
    } else {
        let same = state.flag == ChannelFlag::BusySame;
        resolve_slot(params, state.delta, state.t, same, cap, &mut push);
    }

    acc.into_iter().collect()
}

/// One in-flight slot: the source steps, then the boundary resolves into
/// delivery, discard (A2 at the last boundary) or continuation.
fn resolve_slot(
    params: &ModelParams,
    delta: usize,
    elapsed: usize,
    same_as_estimate: bool,
    cap: usize,
    push: &mut impl FnMut(SystemState, f64),
) {
    let p = params.p();
    let delay = params.delay();
    let (h_deliver, h_discard, h_continue) = boundary_hazard(delay, params.assumption(), elapsed);
    let grown = (delta + 1).min(cap);

    for (flip, w) in [(false, 1.0 - p), (true, p)] {
        // Source position vs the unchanged estimate after this slot.
        let match_old = (delta == 0) != flip;
        if h_deliver > 0.0 {
            // Delivery rewrites the estimate to the in-flight value.
            let matched = if same_as_estimate {
                match_old
            } else {
                !match_old
            };
            let d = if matched { 0 } else { grown };
            push(SystemState::idle(d), w * h_deliver);
        }
        if h_discard > 0.0 {
            let d = if match_old { 0 } else { grown };
            push(SystemState::idle(d), w * h_discard);
        }
        if h_continue > 0.0 {
            let d = if match_old { 0 } else { grown };
            push(
                SystemState::busy(d, elapsed + 1, same_as_estimate),
                w * h_continue,
            );
        }
    }
}

/// Left power iteration `x <- xP` (lazily mixed to dodge periodicity) until
/// `‖xP - x‖₁ <= tol`; errors out after 10^6 iterations.
pub fn power_iterate(chain: &TruncatedChain, tol: f64) -> Result<Vec<f64>, Error> {
    let n = chain.len();
    let max_iter = 1_000_000;
    let mut x = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut y = vec![0.0; n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for &(j, w) in chain.row(i) {
                y[j] += xi * w;
            }
        }
        residual = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        if residual <= tol {
            let total: f64 = y.iter().sum();
            for v in &mut y {
                *v /= total;
            }
            return Ok(y);
        }
        let mut total = 0.0;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = 0.5 * *xi + 0.5 * yi;
            total += *xi;
        }
        for v in &mut x {
            *v /= total;
        }
    }
    Err(Error::PowerIterationDiverged {
        tol,
        max_iter,
        residual,
    })
}

/// Absorption cap giving a truncated tail below `target_tail`, driven by
/// the geometric decay ratio `1-p` of the idle tail.
pub fn suggested_delta_cap(params: &ModelParams, tau: PolicyThreshold, target_tail: f64) -> usize {
    let t_max = params.t_max();
    let tau_floor = match tau {
        PolicyThreshold::Finite(t) => t,
        PolicyThreshold::Infinite => 0,
    };
    let omega = t_max + tau_floor + 1;
    let p = params.p();
    let decay = (1.0 - p).ln();
    let needed = ((target_tail * p / 4.0).ln() / decay).ceil() as usize;
    omega + needed.max(10 * t_max) + 10
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{conditional_kernel, terminated_kernel};
    use crate::model::{geometric_delay, DelaySpec};
    use crate::stationary::stationary_never_transmit;

    fn params(p: f64, pmf: Vec<f64>, overflow: f64, assumption: Assumption) -> ModelParams {
        ModelParams::new(
            p,
            assumption,
            DelaySpec::new(pmf, overflow, assumption).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn enumerate_kernel_frozen_example() {
        let m = params(0.2, vec![0.5, 0.5], 0.0, Assumption::A1);
        let dist = enumerate_kernel(&m, 0, 2).unwrap();
        assert!((dist[&0] - 0.68).abs() < 1e-15);
        assert!((dist[&1] - 0.16).abs() < 1e-15);
        assert!((dist[&2] - 0.16).abs() < 1e-15);
    }

    #[test]
    fn enumerate_kernel_single_step_is_flip() {
        for &p in &[0.05, 0.2, 0.35, 0.5] {
            let m = params(p, vec![0.5, 0.5], 0.0, Assumption::A1);
            for delta in [0usize, 3, 7] {
                let dist = enumerate_kernel(&m, delta, 1).unwrap();
                assert!((dist[&0] - (1.0 - p)).abs() < 1e-15);
                assert!((dist[&(delta + 1)] - p).abs() < 1e-15);
                assert_eq!(dist.len(), 2);
            }
        }
    }

    #[test]
    fn enumerate_kernel_mass_sums_to_one() {
        let m = params(0.35, vec![0.25; 4], 0.0, Assumption::A1);
        for delta in 0..=8 {
            for t in 1..=4 {
                let dist = enumerate_kernel(&m, delta, t).unwrap();
                let sum: f64 = dist.values().sum();
                assert!((sum - 1.0).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn enumeration_matches_closed_form_kernels() {
        for &p in &[0.05, 0.2, 0.35, 0.5] {
            for assumption in [Assumption::A1, Assumption::A2] {
                let (pmf, overflow) = match assumption {
                    Assumption::A1 => (vec![0.2, 0.2, 0.2, 0.2, 0.1, 0.1], 0.0),
                    Assumption::A2 => (vec![0.2, 0.2, 0.2, 0.2, 0.1, 0.05], 0.05),
                };
                let m = params(p, pmf, overflow, assumption);
                for delta in 0..=8 {
                    for t in 1..=6 {
                        let dist = enumerate_kernel(&m, delta, t).unwrap();
                        for dp in 0..=delta + t {
                            let closed = conditional_kernel(&m, delta, dp, t).unwrap();
                            let brute = dist.get(&dp).copied().unwrap_or(0.0);
                            assert!(
                                (closed - brute).abs() <= 1e-12,
                                "{assumption:?} p={p} Δ={delta} Δ'={dp} t={t}: {closed} vs {brute}"
                            );
                        }
                    }
                    if assumption == Assumption::A2 {
                        let dist = enumerate_discard_kernel(&m, delta).unwrap();
                        for dp in 0..=delta + 6 {
                            let closed = terminated_kernel(&m, delta, dp).unwrap();
                            let brute = dist.get(&dp).copied().unwrap_or(0.0);
                            assert!(
                                (closed - brute).abs() <= 1e-12,
                                "discard p={p} Δ={delta} Δ'={dp}: {closed} vs {brute}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn enumerate_cost_frozen_examples() {
        let m = params(0.2, vec![0.25; 4], 0.0, Assumption::A1);
        assert_eq!(enumerate_cost(&m, 5, 1).unwrap(), 5.0);
        assert!((enumerate_cost(&m, 3, 3).unwrap() - 9.44).abs() < 1e-12);
        assert!((enumerate_cost(&m, 0, 2).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn enumeration_matches_closed_form_costs() {
        use crate::cost::{conditional_step_cost, conditional_transmission_cost};
        for &p in &[0.05, 0.2, 0.35, 0.5] {
            for assumption in [Assumption::A1, Assumption::A2] {
                let (pmf, overflow) = match assumption {
                    Assumption::A1 => (vec![0.2, 0.2, 0.2, 0.2, 0.1, 0.1], 0.0),
                    Assumption::A2 => (vec![0.2, 0.2, 0.2, 0.2, 0.1, 0.05], 0.05),
                };
                let m = params(p, pmf, overflow, assumption);
                for delta in 0..=8 {
                    for k in 0..=5 {
                        let closed = conditional_step_cost(&m, delta, k).unwrap();
                        let brute = enumerate_step_cost(&m, delta, k).unwrap();
                        assert!(
                            (closed - brute).abs() <= 1e-12,
                            "C^{k}({delta}) p={p}: {closed} vs {brute}"
                        );
                    }
                    for t in 1..=6 {
                        let closed = conditional_transmission_cost(&m, delta, t).unwrap();
                        let brute = enumerate_cost(&m, delta, t).unwrap();
                        assert!(
                            (closed - brute).abs() <= 1e-12,
                            "C^{t}({delta},1) p={p}: {closed} vs {brute}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn folded_balance_holds_on_chain_marginals() {
        use crate::kernel::aggregate_kernel;
        use crate::model::Action;
        let m = params(0.3, vec![0.4, 0.3, 0.3], 0.0, Assumption::A1);
        let tau = 2usize;
        let policy = PolicyThreshold::Finite(tau);
        let cap = suggested_delta_cap(&m, policy, 1e-12);
        let chain = build_truncated_chain(&m, policy, cap).unwrap();
        let stat = power_iterate(&chain, 1e-13).unwrap();
        let marginal = chain.idle_marginal(&stat);
        let omega = m.t_max() + tau + 1;
        // pi_Delta = sum_{Delta'} P_{Delta',Delta}(a(Delta')) pi_{Delta'},
        // expanding the tail through the chain's own marginals.
        for delta in 0..omega {
            let mut inflow = 0.0;
            for (source, &mass) in marginal.iter().enumerate().take(cap - 2 * m.t_max()) {
                let action = if source >= tau {
                    Action::Transmit
                } else {
                    Action::Idle
                };
                inflow += aggregate_kernel(&m, source, delta, action) * mass;
            }
            assert!(
                (marginal[delta] - inflow).abs() <= 1e-9,
                "Δ={delta}: chain {} vs folded inflow {inflow}",
                marginal[delta]
            );
        }
    }

    #[test]
    fn chain_rows_are_stochastic() {
        let m = params(0.3, vec![0.4, 0.3, 0.3], 0.0, Assumption::A1);
        let chain = build_truncated_chain(&m, PolicyThreshold::Finite(2), 120).unwrap();
        for i in 0..chain.len() {
            let sum: f64 = chain.row(i).iter().map(|&(_, w)| w).sum();
            assert!((sum - 1.0).abs() <= 1e-12, "row {i} sums to {sum}");
        }
    }

    #[test]
    fn chain_never_transmit_matches_geometric_law() {
        let m = params(0.3, vec![0.4, 0.3, 0.3], 0.0, Assumption::A1);
        let cap = suggested_delta_cap(&m, PolicyThreshold::Infinite, 1e-12);
        let chain = build_truncated_chain(&m, PolicyThreshold::Infinite, cap).unwrap();
        let stat = power_iterate(&chain, 1e-13).unwrap();
        let marginal = chain.idle_marginal(&stat);
        let law = stationary_never_transmit(0.3).unwrap();
        for (delta, &mass) in marginal.iter().enumerate().take(21) {
            assert!(
                (mass - law.prob(delta)).abs() <= 1e-10,
                "Δ={delta}: {mass} vs {}",
                law.prob(delta)
            );
        }
    }

    #[test]
    fn chain_tail_decays_geometrically() {
        // Under the never-transmit policy the idle tail decays at exactly
        // 1-p; transmitting policies can only thin the tail further.
        let m = params(0.3, vec![0.4, 0.3, 0.3], 0.0, Assumption::A1);
        let cap = suggested_delta_cap(&m, PolicyThreshold::Infinite, 1e-12);
        let chain = build_truncated_chain(&m, PolicyThreshold::Infinite, cap).unwrap();
        let stat = power_iterate(&chain, 1e-13).unwrap();
        let marginal = chain.idle_marginal(&stat);
        let omega = 3 + 1;
        for delta in omega..omega + 25 {
            let ratio = marginal[delta + 1] / marginal[delta];
            assert!((ratio - 0.7).abs() < 1e-9, "Δ={delta}: ratio {ratio}");
        }

        let tau = PolicyThreshold::Finite(2);
        let cap = suggested_delta_cap(&m, tau, 1e-12);
        let chain = build_truncated_chain(&m, tau, cap).unwrap();
        let stat = power_iterate(&chain, 1e-13).unwrap();
        let marginal = chain.idle_marginal(&stat);
        for delta in 6 + 3..6 + 25 {
            let ratio = marginal[delta + 1] / marginal[delta];
            assert!(ratio < 0.7 + 1e-9, "Δ={delta}: ratio {ratio} above 1-p");
        }
    }

    #[test]
    fn hazard_encoding_reproduces_duration_law() {
        let a1 = geometric_delay(0.7, 5, Assumption::A1).unwrap();
        let (pmf, discard) = implied_duration_pmf(&a1, Assumption::A1);
        for (t, &q) in a1.pmf().iter().enumerate() {
            assert!((pmf[t] - q).abs() <= 1e-12);
        }
        assert_eq!(discard, 0.0);

        let a2 = geometric_delay(0.7, 5, Assumption::A2).unwrap();
        let (pmf, discard) = implied_duration_pmf(&a2, Assumption::A2);
        for (t, &q) in a2.pmf().iter().enumerate() {
            assert!((pmf[t] - q).abs() <= 1e-12);
        }
        assert!((discard - a2.overflow()).abs() <= 1e-12);

        // Interior zeros and dominant discard mass.
        let spiky = DelaySpec::new(vec![0.5, 0.0, 0.5], 0.0, Assumption::A1).unwrap();
        let (pmf, discard) = implied_duration_pmf(&spiky, Assumption::A1);
        assert_eq!(pmf, vec![0.5, 0.0, 0.5]);
        assert_eq!(discard, 0.0);
        let heavy = DelaySpec::new(vec![0.05, 0.05], 0.9, Assumption::A2).unwrap();
        let (pmf, discard) = implied_duration_pmf(&heavy, Assumption::A2);
        assert!((pmf[0] - 0.05).abs() <= 1e-15 && (pmf[1] - 0.05).abs() <= 1e-15);
        assert!((discard - 0.9).abs() <= 1e-15);
    }

    #[test]
    fn power_iterate_two_state_toy() {
        // Two-state no-transmit toy: handcrafted chain matching p=0.5,
        // capped at Δ=1; analytic stationary is (1/2, 1/2).
        let m = params(0.5, vec![0.5, 0.5], 0.0, Assumption::A1);
        let cap = suggested_delta_cap(&m, PolicyThreshold::Infinite, 1e-12);
        let chain = build_truncated_chain(&m, PolicyThreshold::Infinite, cap).unwrap();
        let stat = power_iterate(&chain, 1e-13).unwrap();
        let marginal = chain.idle_marginal(&stat);
        assert!((marginal[0] - 0.5).abs() < 1e-11);
        assert!((marginal[1] - 0.25).abs() < 1e-11);
    }

    #[test]
    fn cap_guards() {
        let m = params(0.3, vec![0.4, 0.3, 0.3], 0.0, Assumption::A1);
        assert!(matches!(
            build_truncated_chain(&m, PolicyThreshold::Finite(2), 10),
            Err(Error::CapTooSmall { .. })
        ));
    }
}
