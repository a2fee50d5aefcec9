//! Stationary law of the idle-state AoII under a threshold policy.
//!
//! The balance equations of the folded chain close after `ω = t_max + τ + 1`
//! components once the tail is lumped into `Π = Σ_{Δ >= ω} π_Δ`, giving a
//! finite linear system: rows for `π_0`, `π_1`, the two Δ-range recurrences,
//! `Π`, and the normalization
//! `Σ_{Δ<τ} π_Δ + ET (Σ_{Δ>=τ} π_Δ + Π) = 1`.
//!
//! The assembled rows number ω+2 for ω+1 unknowns; as always for stationary
//! balance equations they are rank-deficient by exactly one, so the square
//! solve drops the `π_0` row and the residual of the full row set (dropped
//! row included) is reported on the solution.
//!
//! `τ ∈ {0, 1}` also admit explicit forward substitutions, and the
//! never-transmit policy has a closed geometric law.

// Matrix assembly addresses columns by the state index they stand for.
#![allow(clippy::needless_range_loop)]

use crate::error::Error;
use crate::kernel::aggregate_kernel;
use crate::model::{expected_transmission_time, Action, ModelParams};

/// Noise floor: solution components below this are clamped to zero, more
/// negative ones are treated as assembly bugs.
const NEGATIVE_TOL: f64 = -1e-12;

/// Maximum acceptable residual of the assembled system at the solution.
const RESIDUAL_TOL: f64 = 1e-10;

/// Pivot-ratio threshold for declaring the system ill-conditioned.
const CONDITION_LIMIT: f64 = 1e12;

/// Head of the stationary law: `π_0 .. π_{ω-1}` plus the lumped tail mass
/// `Π`, with the max-abs residual of the assembled equations at the
/// solution.
#[derive(Debug, Clone)]
pub struct StationarySolution {
    pi: Vec<f64>,
    tail: f64,
    omega: usize,
    residual: f64,
}

impl StationarySolution {
    /// `π_0 .. π_{ω-1}`.
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Lumped tail mass `Π = Σ_{Δ >= ω} π_Δ`.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `ω = t_max + τ + 1`.
    pub fn omega(&self) -> usize {
        self.omega
    }

    /// Max-abs residual of the assembled equations at this solution.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// CSV rendering: `delta,pi` rows, final row `tail,Π`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,pi\n");
        for (delta, v) in self.pi.iter().enumerate() {
            out.push_str(&format!("{delta},{v}\n"));
        }
        out.push_str(&format!("tail,{}\n", self.tail));
        out
    }
}

/// Closed geometric stationary law of the never-transmit policy:
/// `π_0 = 1/2`, `π_Δ = p(1-p)^{Δ-1}/2`.
#[derive(Debug, Clone, Copy)]
pub struct NeverTransmitLaw {
    p: f64,
}

impl NeverTransmitLaw {
    pub fn prob(&self, delta: usize) -> f64 {
        if delta == 0 {
            0.5
        } else {
            0.5 * self.p * (1.0 - self.p).powi(delta as i32 - 1)
        }
    }
}

/// Stationary law generator for `τ = ∞`.
pub fn stationary_never_transmit(p: f64) -> Result<NeverTransmitLaw, Error> {
    if !p.is_finite() || p <= 0.0 || p > 0.5 {
        return Err(Error::FlipProbability(p));
    }
    Ok(NeverTransmitLaw { p })
}

fn context_of(params: &ModelParams, tau: usize) -> String {
    format!(
        "p={}, t_max={}, assumption {}, tau={}",
        params.p(),
        params.t_max(),
        params.assumption(),
        tau
    )
}

/// Solve the folded balance system for `1 <= τ < ∞`.
pub fn solve_stationary(params: &ModelParams, tau: usize) -> Result<StationarySolution, Error> {
    params.require_analytic()?;
    if tau < 1 {
        return Err(Error::UnsupportedThreshold(format!(
            "{tau} (the linear system covers 0 < tau < inf; tau=0 goes through the explicit small-tau path)"
        )));
    }
    let t_max = params.t_max();
    let omega = t_max + tau + 1;
    let n = omega + 1; // unknowns: pi_0..pi_{omega-1}, Pi
    let p = params.p();
    let q = 1.0 - p;
    let et = expected_transmission_time(params);
    let k1 = |i: usize, j: usize| aggregate_kernel(params, i, j, Action::Transmit);

    // Assemble all omega+2 rows: balance plus normalization.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(omega + 2);
    let mut rhs: Vec<f64> = Vec::with_capacity(omega + 2);

    // pi_0 row (dropped from the square solve, kept for the residual).
    {
        let mut c = vec![0.0; n];
        c[0] += 1.0 - q;
        for ci in c.iter_mut().take(tau).skip(1) {
            *ci -= p;
        }
        let k10 = k1(1, 0);
        for ci in c.iter_mut().take(omega + 1).skip(tau) {
            *ci -= k10;
        }
        rows.push(c);
        rhs.push(0.0);
    }

    // pi_1 row.
    {
        let mut c = vec![0.0; n];
        c[1] += 1.0;
        c[0] -= p;
        let k11 = k1(1, 1);
        for ci in c.iter_mut().take(omega + 1).skip(tau) {
            *ci -= k11;
        }
        rows.push(c);
        rhs.push(0.0);
    }

    // 2 <= delta <= t_max - 1.
    for delta in 2..t_max {
        let mut c = vec![0.0; n];
        c[delta] += 1.0;
        if delta <= tau {
            c[delta - 1] -= q;
            let k = k1(tau, delta);
            for ci in c.iter_mut().take(omega + 1).skip(tau) {
                *ci -= k;
            }
        } else {
            for i in tau..delta {
                c[i] -= k1(i, delta);
            }
            let k = k1(delta, delta);
            for ci in c.iter_mut().take(omega + 1).skip(delta) {
                *ci -= k;
            }
        }
        rows.push(c);
        rhs.push(0.0);
    }

    // t_max <= delta <= omega - 1.
    for delta in t_max..omega {
        let mut c = vec![0.0; n];
        c[delta] += 1.0;
        if delta <= tau {
            c[delta - 1] -= q;
        } else {
            for i in tau..delta {
                c[i] -= k1(i, delta);
            }
        }
        rows.push(c);
        rhs.push(0.0);
    }

    // Pi row.
    {
        let mut c = vec![0.0; n];
        c[omega] += 1.0;
        for i in tau + 1..omega {
            let mut w = 0.0;
            for k in tau + 1..=i {
                w += k1(i, t_max + k);
            }
            c[i] -= w;
        }
        let mut recirc = 0.0;
        for i in 1..=t_max {
            recirc += k1(omega, omega + i);
        }
        c[omega] -= recirc;
        rows.push(c);
        rhs.push(0.0);
    }

    // Normalization.
    {
        let mut c = vec![0.0; n];
        for ci in c.iter_mut().take(tau) {
            *ci += 1.0;
        }
        for ci in c.iter_mut().take(omega + 1).skip(tau) {
            *ci += et;
        }
        rows.push(c);
        rhs.push(1.0);
    }

    let context = context_of(params, tau);

    // Square system: every row except the pi_0 balance row.
    let a: Vec<Vec<f64>> = rows[1..].to_vec();
    let b: Vec<f64> = rhs[1..].to_vec();
    let x = solve_dense(a, b, &context)?;

    let residual = max_residual(&rows, &rhs, &x);
    if residual > RESIDUAL_TOL {
        return Err(Error::ResidualTooLarge { residual, context });
    }

    finish_solution(x, omega, residual, &context)
}

/// Explicit forward substitutions for `τ ∈ {0, 1}`; no matrix solve.
pub fn solve_stationary_smalltau(
    params: &ModelParams,
    tau: usize,
) -> Result<StationarySolution, Error> {
    params.require_analytic()?;
    if tau > 1 {
        return Err(Error::UnsupportedThreshold(format!(
            "{tau} (small-tau path covers 0 and 1)"
        )));
    }
    let t_max = params.t_max();
    let omega = t_max + tau + 1;
    let et = expected_transmission_time(params);
    let p = params.p();
    let k1 = |i: usize, j: usize| aggregate_kernel(params, i, j, Action::Transmit);
    let context = context_of(params, tau);

    let mut pi = vec![0.0; omega];
    let tail;

    if tau == 0 {
        let p00 = k1(0, 0);
        let p10 = k1(1, 0);
        pi[0] = p10 / (et * (1.0 - p00 + p10));
        let mut below = pi[0];
        for delta in 1..=t_max {
            let mut v = 0.0;
            for (i, &pv) in pi.iter().enumerate().take(delta) {
                v += k1(i, delta) * pv;
            }
            v += k1(delta, delta) * (1.0 / et - below);
            pi[delta] = v;
            below += v;
        }
        let mut numer = 0.0;
        for i in 1..=t_max {
            let mut w = 0.0;
            for k in 1..=i {
                w += k1(i, t_max + k);
            }
            numer += w * pi[i];
        }
        let mut recirc = 0.0;
        for i in 1..=t_max {
            recirc += k1(t_max + 1, t_max + 1 + i);
        }
        tail = numer / (1.0 - recirc);
    } else {
        let p10 = k1(1, 0);
        let p11 = k1(1, 1);
        let denom = p * et + p10;
        pi[0] = p10 / denom;
        pi[1] = (p * p10 + p * p11) / denom;
        let transmit_mass = (1.0 - pi[0]) / et;
        let mut above = pi[1];
        for delta in 2..=t_max + 1 {
            let mut v = 0.0;
            for (i, &pv) in pi.iter().enumerate().take(delta).skip(1) {
                v += k1(i, delta) * pv;
            }
            v += k1(delta, delta) * (transmit_mass - above);
            pi[delta] = v;
            above += v;
        }
        let mut numer = 0.0;
        for i in 2..=t_max + 1 {
            let mut w = 0.0;
            for k in 2..=i {
                w += k1(i, t_max + k);
            }
            numer += w * pi[i];
        }
        let mut recirc = 0.0;
        for i in 1..=t_max {
            recirc += k1(t_max + 2, t_max + 2 + i);
        }
        tail = numer / (1.0 - recirc);
    }

    // Residual of the total-probability equation, the one row the forward
    // substitution does not enforce by construction.
    let head_idle: f64 = pi.iter().take(tau).sum();
    let head_tx: f64 = pi.iter().skip(tau).sum::<f64>() + tail;
    let residual = (head_idle + et * head_tx - 1.0).abs();
    if residual > RESIDUAL_TOL {
        return Err(Error::ResidualTooLarge { residual, context });
    }

    let mut x = pi;
    x.push(tail);
    finish_solution(x, omega, residual, &context)
}

fn finish_solution(
    mut x: Vec<f64>,
    omega: usize,
    residual: f64,
    context: &str,
) -> Result<StationarySolution, Error> {
    for (i, v) in x.iter_mut().enumerate() {
        if *v < NEGATIVE_TOL {
            return Err(Error::NegativeComponent {
                index: i,
                value: *v,
                context: context.into(),
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let tail = x.pop().expect("solution vector is never empty");
    Ok(StationarySolution {
        pi: x,
        tail,
        omega,
        residual,
    })
}

fn max_residual(rows: &[Vec<f64>], rhs: &[f64], x: &[f64]) -> f64 {
    rows.iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let lhs: f64 = row.iter().zip(x).map(|(c, v)| c * v).sum();
            (lhs - b).abs()
        })
        .fold(0.0, f64::max)
}

/// Dense Gaussian elimination with partial pivoting; the pivot ratio serves
/// as the conditioning estimate.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, context: &str) -> Result<Vec<f64>, Error> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("non-empty pivot range");
        let pivot = a[pivot_row][col].abs();
        if pivot == 0.0 {
            return Err(Error::SingularSystem {
                context: context.into(),
                pivot_ratio: f64::INFINITY,
            });
        }
        max_pivot = max_pivot.max(pivot);
        min_pivot = min_pivot.min(pivot);
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }

    let pivot_ratio = max_pivot / min_pivot;
    if pivot_ratio > CONDITION_LIMIT {
        return Err(Error::SingularSystem {
            context: context.into(),
            pivot_ratio,
        });
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for col in row + 1..n {
            acc -= a[row][col] * x[col];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{geometric_delay, Assumption, DelaySpec, PolicyThreshold};
    use crate::oracle::{build_truncated_chain, power_iterate, suggested_delta_cap};

    fn params(p: f64, pmf: Vec<f64>, overflow: f64, assumption: Assumption) -> ModelParams {
        ModelParams::new(
            p,
            assumption,
            DelaySpec::new(pmf, overflow, assumption).unwrap(),
        )
        .unwrap()
    }

    fn chain_reference(params: &ModelParams, tau: usize) -> (Vec<f64>, f64, usize) {
        let policy = PolicyThreshold::Finite(tau);
        let cap = suggested_delta_cap(params, policy, 1e-11);
        let chain = build_truncated_chain(params, policy, cap).unwrap();
        let stat = power_iterate(&chain, 1e-13).unwrap();
        let marginal = chain.idle_marginal(&stat);
        let omega = params.t_max() + tau + 1;
        let tail: f64 = marginal.iter().skip(omega).sum();
        (marginal, tail, omega)
    }

    #[test]
    fn unit_delay_tau_one_closed_form() {
        // P_{1,0}(1) = 1-p = 0.8, ET = 1, so pi_0 = 0.8/(0.2*1 + 0.8) = 0.8;
        // the truncated-chain oracle agrees.
        let m = params(0.2, vec![1.0, 0.0], 0.0, Assumption::A1);
        let sol = solve_stationary_smalltau(&m, 1).unwrap();
        assert!((sol.pi()[0] - 0.8).abs() < 1e-12);
        let (marginal, _, _) = chain_reference(&m, 1);
        assert!((sol.pi()[0] - marginal[0]).abs() < 1e-8);
    }

    #[test]
    fn unit_delay_tau_zero_closed_form() {
        // P_{0,0}(1) = P_{1,0}(1) = 0.8, ET = 1: pi_0 = 0.8.
        let m = params(0.2, vec![1.0, 0.0], 0.0, Assumption::A1);
        let sol = solve_stationary_smalltau(&m, 0).unwrap();
        assert!((sol.pi()[0] - 0.8).abs() < 1e-12);
        let (marginal, _, _) = chain_reference(&m, 0);
        for (delta, &pv) in sol.pi().iter().enumerate() {
            assert!((pv - marginal[delta]).abs() < 1e-8, "Δ={delta}");
        }
    }

    #[test]
    fn threshold_above_t_max_matches_chain() {
        // tau > t_max exercises the idle-propagation rows
        // pi_Delta = (1-p) pi_{Delta-1} above t_max.
        let m = params(0.3, vec![0.4, 0.3, 0.3], 0.0, Assumption::A1);
        let tau = 8;
        let sol = solve_stationary(&m, tau).unwrap();
        let (marginal, tail, omega) = chain_reference(&m, tau);
        assert_eq!(sol.omega(), omega);
        for (delta, &pv) in sol.pi().iter().enumerate() {
            assert!(
                (pv - marginal[delta]).abs() <= 1e-8,
                "Δ={delta}: {pv} vs {}",
                marginal[delta]
            );
        }
        assert!((sol.tail() - tail).abs() <= 1e-8);

        let report = crate::aoii::expected_aoii_from_solution(&m, tau, &sol).unwrap();
        let policy = PolicyThreshold::Finite(tau);
        let cap = suggested_delta_cap(&m, policy, 1e-11);
        let chain = build_truncated_chain(&m, policy, cap).unwrap();
        let stat = power_iterate(&chain, 1e-13).unwrap();
        let direct = chain.expected_aoii(&stat);
        assert!(
            (report.expected_aoii - direct).abs() <= 1e-6,
            "Δ̄ {} vs chain {direct}",
            report.expected_aoii
        );
    }

    #[test]
    fn heavy_discard_mass_matches_chain() {
        // 90% of transmissions are discarded at the boundary.
        let m = params(0.3, vec![0.05, 0.05], 0.9, Assumption::A2);
        for tau in [0usize, 1, 2] {
            let sol = if tau <= 1 {
                solve_stationary_smalltau(&m, tau).unwrap()
            } else {
                solve_stationary(&m, tau).unwrap()
            };
            let (marginal, tail, _) = chain_reference(&m, tau);
            for (delta, &pv) in sol.pi().iter().enumerate() {
                assert!(
                    (pv - marginal[delta]).abs() <= 1e-8,
                    "tau={tau} Δ={delta}: {pv} vs {}",
                    marginal[delta]
                );
            }
            assert!((sol.tail() - tail).abs() <= 1e-8, "tau={tau} Π");

            let report = crate::aoii::expected_aoii_from_solution(&m, tau, &sol).unwrap();
            let policy = PolicyThreshold::Finite(tau);
            let cap = suggested_delta_cap(&m, policy, 1e-11);
            let chain = build_truncated_chain(&m, policy, cap).unwrap();
            let stat = power_iterate(&chain, 1e-13).unwrap();
            let direct = chain.expected_aoii(&stat);
            assert!(
                (report.expected_aoii - direct).abs() <= 1e-6,
                "tau={tau} Δ̄ {} vs chain {direct}",
                report.expected_aoii
            );
        }
    }

    #[test]
    fn normalization_residual_is_tiny() {
        let m = params(
            0.3,
            geometric_delay(0.7, 5, Assumption::A1)
                .unwrap()
                .pmf()
                .to_vec(),
            0.0,
            Assumption::A1,
        );
        for tau in 1..=4 {
            let sol = solve_stationary(&m, tau).unwrap();
            assert!(sol.residual() <= 1e-10, "tau={tau}: {}", sol.residual());
            let et = expected_transmission_time(&m);
            let head_idle: f64 = sol.pi().iter().take(tau).sum();
            let head_tx: f64 = sol.pi().iter().skip(tau).sum::<f64>() + sol.tail();
            assert!((head_idle + et * head_tx - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn matches_truncated_chain_oracle() {
        let m = params(
            0.3,
            geometric_delay(0.7, 5, Assumption::A1)
                .unwrap()
                .pmf()
                .to_vec(),
            0.0,
            Assumption::A1,
        );
        let sol = solve_stationary(&m, 2).unwrap();
        let (marginal, tail, omega) = chain_reference(&m, 2);
        assert_eq!(sol.omega(), omega);
        for delta in 0..omega {
            assert!(
                (sol.pi()[delta] - marginal[delta]).abs() <= 1e-8,
                "Δ={delta}: {} vs {}",
                sol.pi()[delta],
                marginal[delta]
            );
        }
        assert!((sol.tail() - tail).abs() <= 1e-8);
    }

    #[test]
    fn small_tau_agrees_with_full_system_at_tau_one() {
        for (pmf, overflow, assumption) in [
            (
                geometric_delay(0.7, 5, Assumption::A1)
                    .unwrap()
                    .pmf()
                    .to_vec(),
                0.0,
                Assumption::A1,
            ),
            (
                geometric_delay(0.7, 5, Assumption::A2)
                    .unwrap()
                    .pmf()
                    .to_vec(),
                0.3f64.powi(5),
                Assumption::A2,
            ),
        ] {
            let m = params(0.25, pmf, overflow, assumption);
            let fast = solve_stationary_smalltau(&m, 1).unwrap();
            let full = solve_stationary(&m, 1).unwrap();
            for (a, b) in fast.pi().iter().zip(full.pi()) {
                assert!((a - b).abs() <= 1e-10, "{assumption:?}: {a} vs {b}");
            }
            assert!((fast.tail() - full.tail()).abs() <= 1e-10);
        }
    }

    #[test]
    fn never_transmit_law_values() {
        let law = stationary_never_transmit(0.5).unwrap();
        assert_eq!(law.prob(0), 0.5);
        assert_eq!(law.prob(1), 0.25);
        assert_eq!(law.prob(2), 0.125);
        // Geometric series sums to one.
        let total: f64 = (0..400).map(|d| law.prob(d)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(stationary_never_transmit(0.0).is_err());
    }

    #[test]
    fn solver_guards() {
        let m = params(0.2, vec![0.5, 0.5], 0.0, Assumption::A1);
        assert!(solve_stationary(&m, 0).is_err());
        assert!(solve_stationary_smalltau(&m, 2).is_err());
        let degenerate = params(0.2, vec![1.0], 0.0, Assumption::A1);
        assert!(matches!(
            solve_stationary(&degenerate, 1),
            Err(Error::DegenerateTmax)
        ));
    }

    #[test]
    fn csv_rendering_shape() {
        let m = params(0.2, vec![1.0, 0.0], 0.0, Assumption::A1);
        let sol = solve_stationary_smalltau(&m, 0).unwrap();
        let csv = sol.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "delta,pi");
        assert_eq!(lines.len(), 1 + sol.omega() + 1);
        assert!(lines.last().unwrap().starts_with("tail,"));
    }
}
