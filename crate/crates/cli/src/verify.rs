//! `--mode verify`: run the oracle equivalence suites for the given
//! parameters and print a pass/fail table.

use std::fmt::Write as _;

use aoii_core::oracle::{
    build_truncated_chain, enumerate_cost, enumerate_discard_kernel, enumerate_kernel,
    enumerate_step_cost, implied_duration_pmf, power_iterate, suggested_delta_cap,
};
use aoii_core::stationary::{
    solve_stationary, solve_stationary_smalltau, stationary_never_transmit,
};
use aoii_core::{
    action_cost, conditional_kernel, conditional_step_cost, conditional_transmission_cost,
    expected_aoii, tail_cost_increment, terminated_kernel, verify_kernel_properties, Action,
    Assumption, ModelParams, PolicyThreshold,
};

use crate::spec::ExperimentSpec;

pub struct SuiteResult {
    pub name: String,
    pub failure: Option<String>,
}

pub fn run_verify(spec: &ExperimentSpec) -> Result<Vec<SuiteResult>, String> {
    let delay = spec.delay_spec()?;
    let mut suites = Vec::new();
    for &p in &spec.ps {
        let params =
            ModelParams::new(p, spec.assumption, delay.clone()).map_err(|e| e.to_string())?;
        suites.push(SuiteResult {
            name: format!("kernel vs path enumeration (p={p})"),
            failure: kernel_suite(&params),
        });
        suites.push(SuiteResult {
            name: format!("kernel structural properties (p={p})"),
            failure: property_suite(&params),
        });
        suites.push(SuiteResult {
            name: format!("cost vs path enumeration (p={p})"),
            failure: cost_suite(&params),
        });
        suites.push(SuiteResult {
            name: format!("hazard duration law (p={p})"),
            failure: duration_suite(&params),
        });
        suites.push(SuiteResult {
            name: format!("stationary & AoII vs truncated chain (p={p})"),
            failure: stationary_suite(&params, &spec.taus),
        });
    }
    Ok(suites)
}

fn kernel_suite(params: &ModelParams) -> Option<String> {
    let t_hi = params.t_max().min(6);
    for delta in 0..=8usize {
        for t in 1..=t_hi {
            let dist = match enumerate_kernel(params, delta, t) {
                Ok(d) => d,
                Err(e) => return Some(e.to_string()),
            };
            for dp in 0..=delta + t {
                let closed = conditional_kernel(params, delta, dp, t).unwrap();
                let brute = dist.get(&dp).copied().unwrap_or(0.0);
                if (closed - brute).abs() > 1e-12 {
                    return Some(format!(
                        "P^{t}_{{{delta},{dp}}} = {closed} vs enumeration {brute}"
                    ));
                }
            }
        }
        if params.assumption() == Assumption::A2 && params.t_max() <= 12 {
            let dist = enumerate_discard_kernel(params, delta).unwrap();
            for dp in 0..=delta + params.t_max() {
                let closed = terminated_kernel(params, delta, dp).unwrap();
                let brute = dist.get(&dp).copied().unwrap_or(0.0);
                if (closed - brute).abs() > 1e-12 {
                    return Some(format!(
                        "P^t+_{{{delta},{dp}}} = {closed} vs enumeration {brute}"
                    ));
                }
            }
        }
    }
    None
}

fn property_suite(params: &ModelParams) -> Option<String> {
    let report = verify_kernel_properties(params);
    report.first_failure().map(|check| {
        let mut msg = String::new();
        let _ = write!(msg, "{}", check.name);
        if let Some(cx) = &check.counterexample {
            let _ = write!(msg, ": {cx}");
        }
        msg
    })
}

fn cost_suite(params: &ModelParams) -> Option<String> {
    let t_hi = params.t_max().min(6);
    for delta in 0..=8usize {
        for k in 0..params.t_max().min(6) {
            let closed = conditional_step_cost(params, delta, k).unwrap();
            let brute = enumerate_step_cost(params, delta, k).unwrap();
            if (closed - brute).abs() > 1e-12 {
                return Some(format!("C^{k}({delta}) = {closed} vs enumeration {brute}"));
            }
        }
        for t in 1..=t_hi {
            let closed = conditional_transmission_cost(params, delta, t).unwrap();
            let brute = enumerate_cost(params, delta, t).unwrap();
            if (closed - brute).abs() > 1e-12 {
                return Some(format!(
                    "C^{t}({delta},1) = {closed} vs enumeration {brute}"
                ));
            }
        }
    }
    for t in 1..=params.t_max() {
        let inc = tail_cost_increment(params, t).unwrap();
        for delta in t + 1..=t + 20 {
            let diff = action_cost(params, delta, Action::Transmit)
                - action_cost(params, delta - t, Action::Transmit);
            if (diff - inc).abs() > 1e-12 {
                return Some(format!(
                    "Δ'_{t} = {inc} vs C({delta},1)-C({},1) = {diff}",
                    delta - t
                ));
            }
        }
    }
    None
}

fn duration_suite(params: &ModelParams) -> Option<String> {
    let delay = params.delay();
    let (pmf, discard) = implied_duration_pmf(delay, params.assumption());
    for t in 1..=delay.t_max() {
        if (pmf[t - 1] - delay.prob(t)).abs() > 1e-12 {
            return Some(format!(
                "hazard pmf at t={t}: {} vs {}",
                pmf[t - 1],
                delay.prob(t)
            ));
        }
    }
    if (discard - delay.overflow()).abs() > 1e-12 {
        return Some(format!(
            "hazard discard mass {discard} vs {}",
            delay.overflow()
        ));
    }
    None
}

fn stationary_suite(params: &ModelParams, taus: &[PolicyThreshold]) -> Option<String> {
    if params.t_max() < 2 {
        return Some("t_max = 1 is outside the analytic engine's scope".into());
    }
    for &tau in taus {
        match tau {
            PolicyThreshold::Infinite => {
                let cap = suggested_delta_cap(params, tau, 1e-11);
                let chain = match build_truncated_chain(params, tau, cap) {
                    Ok(c) => c,
                    Err(e) => return Some(e.to_string()),
                };
                let stat = match power_iterate(&chain, 1e-13) {
                    Ok(s) => s,
                    Err(e) => return Some(e.to_string()),
                };
                let marginal = chain.idle_marginal(&stat);
                let law = stationary_never_transmit(params.p()).unwrap();
                for (delta, &mass) in marginal.iter().enumerate().take(21) {
                    if (mass - law.prob(delta)).abs() > 1e-10 {
                        return Some(format!(
                            "tau=inf π_{delta}: chain {mass} vs closed {}",
                            law.prob(delta)
                        ));
                    }
                }
                let direct = chain.expected_aoii(&stat);
                let closed = 1.0 / (2.0 * params.p());
                if (direct - closed).abs() > 1e-6 {
                    return Some(format!("tau=inf Δ̄: chain {direct} vs 1/(2p) = {closed}"));
                }
            }
            PolicyThreshold::Finite(tau_v) => {
                let sol = if tau_v <= 1 {
                    solve_stationary_smalltau(params, tau_v)
                } else {
                    solve_stationary(params, tau_v)
                };
                let sol = match sol {
                    Ok(s) => s,
                    Err(e) => return Some(e.to_string()),
                };
                let cap = suggested_delta_cap(params, tau, 1e-11);
                let chain = match build_truncated_chain(params, tau, cap) {
                    Ok(c) => c,
                    Err(e) => return Some(e.to_string()),
                };
                let stat = match power_iterate(&chain, 1e-13) {
                    Ok(s) => s,
                    Err(e) => return Some(e.to_string()),
                };
                let marginal = chain.idle_marginal(&stat);
                for (delta, &v) in sol.pi().iter().enumerate() {
                    if (v - marginal[delta]).abs() > 1e-8 {
                        return Some(format!(
                            "tau={tau_v} π_{delta}: analytic {v} vs chain {}",
                            marginal[delta]
                        ));
                    }
                }
                let report = expected_aoii(params, tau).unwrap();
                let direct = chain.expected_aoii(&stat);
                if (report.expected_aoii - direct).abs() > 1e-6 {
                    return Some(format!(
                        "tau={tau_v} Δ̄: analytic {} vs chain {direct}",
                        report.expected_aoii
                    ));
                }
            }
        }
    }
    None
}

/// Render the pass/fail table; returns true when every suite passed.
pub fn print_table(suites: &[SuiteResult], out: &mut impl std::io::Write) -> std::io::Result<bool> {
    let mut all_pass = true;
    for suite in suites {
        match &suite.failure {
            None => writeln!(out, "PASS  {}", suite.name)?,
            Some(cx) => {
                all_pass = false;
                writeln!(out, "FAIL  {} — {cx}", suite.name)?;
            }
        }
    }
    Ok(all_pass)
}
