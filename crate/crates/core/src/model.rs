//! System parameters: the symmetric two-state source, discrete delay
//! distributions, the two delay-truncation assumptions and the threshold
//! policy.
//!
//! Everything here is immutable after construction and safe to share across
//! threads.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::Error;

/// Tolerance on pmf normalization checks.
pub const PMF_SUM_TOL: f64 = 1e-12;

/// Delay-truncation mode.
///
/// * `A1`: the delay is capped at `t_max` and every update is delivered; the
///   pmf sums to 1 on `[1, t_max]`.
/// * `A2`: a transmission survives at most `t_max` slots; with probability
///   `p_{t+}` it is discarded at the end of slot `t_max` instead of being
///   delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    A1,
    A2,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assumption::A1 => write!(f, "a1"),
            Assumption::A2 => write!(f, "a2"),
        }
    }
}

impl FromStr for Assumption {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a1" | "1" => Ok(Assumption::A1),
            "a2" | "2" => Ok(Assumption::A2),
            other => Err(format!("unknown assumption '{other}' (expected a1 or a2)")),
        }
    }
}

/// Transmitter action at an idle slot: stay idle or transmit the fresh
/// sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Idle,
    Transmit,
}

/// Distribution of the transmission delay `T` on `{1, .., t_max}`, plus the
/// overflow mass `p_{t+}` carried by transmissions that would exceed `t_max`
/// (assumption 2 only; exactly 0 under assumption 1).
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySpec {
    pmf: Vec<f64>,
    overflow: f64,
}

impl DelaySpec {
    /// Validate a pmf (indexed from t = 1) and overflow mass against an
    /// assumption mode.
    pub fn new(pmf: Vec<f64>, overflow: f64, assumption: Assumption) -> Result<Self, Error> {
        if pmf.is_empty() {
            return Err(Error::TmaxZero(0));
        }
        for (i, &q) in pmf.iter().enumerate() {
            if !q.is_finite() || q < 0.0 {
                return Err(Error::PmfEntry {
                    index: i + 1,
                    value: q,
                });
            }
        }
        if !overflow.is_finite() || overflow < 0.0 {
            return Err(Error::OverflowMass(overflow));
        }
        let body: f64 = pmf.iter().sum();
        match assumption {
            Assumption::A1 => {
                if overflow != 0.0 {
                    return Err(Error::OverflowUnderA1(overflow));
                }
                if (body - 1.0).abs() > PMF_SUM_TOL {
                    return Err(Error::PmfSum {
                        sum: body,
                        with_overflow: "",
                    });
                }
            }
            Assumption::A2 => {
                let total = body + overflow;
                if (total - 1.0).abs() > PMF_SUM_TOL {
                    return Err(Error::PmfSum {
                        sum: total,
                        with_overflow: " plus overflow",
                    });
                }
            }
        }
        Ok(DelaySpec { pmf, overflow })
    }

    /// Load a delay spec from a plain-text file: one probability per line
    /// (line n is `p_n`), optional final line `overflow: <x>` for A2.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn from_file(path: &Path, assumption: Assumption) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let mut pmf = Vec::new();
        let mut overflow = 0.0;
        let mut seen_overflow = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if seen_overflow {
                return Err(Error::DelayFile {
                    line: lineno + 1,
                    reason: "content after the overflow line".into(),
                });
            }
            if let Some(rest) = line.strip_prefix("overflow:") {
                overflow = rest.trim().parse::<f64>().map_err(|e| Error::DelayFile {
                    line: lineno + 1,
                    reason: e.to_string(),
                })?;
                seen_overflow = true;
            } else {
                let q = line.parse::<f64>().map_err(|e| Error::DelayFile {
                    line: lineno + 1,
                    reason: e.to_string(),
                })?;
                pmf.push(q);
            }
        }
        DelaySpec::new(pmf, overflow, assumption)
    }

    /// `t_max`, the support cap.
    pub fn t_max(&self) -> usize {
        self.pmf.len()
    }

    /// `p_t` for `1 <= t <= t_max`.
    pub fn prob(&self, t: usize) -> f64 {
        self.pmf[t - 1]
    }

    /// The pmf as a slice indexed from t = 1 at position 0.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Overflow mass `p_{t+}` (0 under A1).
    pub fn overflow(&self) -> f64 {
        self.overflow
    }
}

/// Full model: flip probability, truncation assumption and delay law.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    p: f64,
    assumption: Assumption,
    delay: DelaySpec,
}

impl ModelParams {
    /// Validate and freeze a parameter set. `p` must lie in (0, 1/2]; the
    /// delay spec must already be consistent with `assumption`.
    ///
    /// `t_max = 1` is accepted here so the simulator can run the degenerate
    /// unit-delay system; the analytic entry points reject it.
    pub fn new(p: f64, assumption: Assumption, delay: DelaySpec) -> Result<Self, Error> {
        if !p.is_finite() || p <= 0.0 || p > 0.5 {
            return Err(Error::FlipProbability(p));
        }
        // Re-check the spec against the mode in case it was built for the
        // other assumption.
        let delay = DelaySpec::new(delay.pmf, delay.overflow, assumption)?;
        Ok(ModelParams {
            p,
            assumption,
            delay,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn assumption(&self) -> Assumption {
        self.assumption
    }

    pub fn delay(&self) -> &DelaySpec {
        &self.delay
    }

    pub fn t_max(&self) -> usize {
        self.delay.t_max()
    }

    /// Gate for the analytic engine: the stationary system and cost
    /// assembly require `t_max >= 2`.
    pub(crate) fn require_analytic(&self) -> Result<(), Error> {
        if self.t_max() < 2 {
            return Err(Error::DegenerateTmax);
        }
        Ok(())
    }
}

/// Threshold policy: transmit whenever the channel is idle and the AoII is
/// at least `tau`; `Infinite` never transmits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyThreshold {
    Finite(usize),
    Infinite,
}

impl PolicyThreshold {
    /// Whether the policy transmits at AoII `delta`.
    pub fn transmits_at(&self, delta: u64) -> bool {
        match self {
            PolicyThreshold::Finite(tau) => delta >= *tau as u64,
            PolicyThreshold::Infinite => false,
        }
    }
}

impl fmt::Display for PolicyThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyThreshold::Finite(tau) => write!(f, "{tau}"),
            PolicyThreshold::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for PolicyThreshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(PolicyThreshold::Infinite),
            other => other
                .parse::<usize>()
                .map(PolicyThreshold::Finite)
                .map_err(|e| format!("bad threshold '{other}': {e}")),
        }
    }
}

/// Channel flag `i`: idle, or busy with the in-flight value equal
/// (`BusySame`, i = 0) / opposite (`BusyDiff`, i = 1) to the receiver's
/// current estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelFlag {
    Idle,
    BusySame,
    BusyDiff,
}

impl ChannelFlag {
    /// Conventional encoding: -1 idle, 0 same, 1 different.
    pub fn as_i8(&self) -> i8 {
        match self {
            ChannelFlag::Idle => -1,
            ChannelFlag::BusySame => 0,
            ChannelFlag::BusyDiff => 1,
        }
    }
}

/// System state triplet `(Δ, t, i)`: AoII, elapsed transmission slots and
/// channel flag. `i` is idle if and only if `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemState {
    pub delta: usize,
    pub t: usize,
    pub flag: ChannelFlag,
}

impl SystemState {
    pub fn idle(delta: usize) -> Self {
        SystemState {
            delta,
            t: 0,
            flag: ChannelFlag::Idle,
        }
    }

    pub fn busy(delta: usize, t: usize, same_as_estimate: bool) -> Self {
        let flag = if same_as_estimate {
            ChannelFlag::BusySame
        } else {
            ChannelFlag::BusyDiff
        };
        SystemState { delta, t, flag }
    }

    pub fn is_idle(&self) -> bool {
        self.flag == ChannelFlag::Idle
    }
}

/// `p^{(t)}`: probability that the two-state symmetric source occupies its
/// starting state `t` slots later, `(1 + (1-2p)^t)/2`; `p^{(0)} = 1`.
///
/// Equals entry (1,1) of the t-th power of the transition matrix; the matrix
/// power survives in tests as an oracle.
pub fn same_state_prob(p: f64, t: usize) -> f64 {
    if t == 0 {
        return 1.0;
    }
    0.5 * (1.0 + (1.0 - 2.0 * p).powi(t as i32))
}

/// Geometric delay with success probability `p_s`: `p_t = (1-p_s)^{t-1} p_s`.
///
/// Under A1 the pmf is truncated to `[1, t_max]` and renormalized to sum
/// exactly 1; under A2 it is left untruncated with `p_{t+} = (1-p_s)^{t_max}`.
pub fn geometric_delay(p_s: f64, t_max: usize, assumption: Assumption) -> Result<DelaySpec, Error> {
    if !p_s.is_finite() || p_s <= 0.0 || p_s > 1.0 {
        return Err(Error::SuccessProbability(p_s));
    }
    if t_max == 0 {
        return Err(Error::TmaxZero(0));
    }
    let raw: Vec<f64> = (1..=t_max)
        .map(|t| (1.0 - p_s).powi(t as i32 - 1) * p_s)
        .collect();
    match assumption {
        Assumption::A1 => {
            let total: f64 = raw.iter().sum();
            let pmf = raw.iter().map(|q| q / total).collect();
            DelaySpec::new(pmf, 0.0, assumption)
        }
        Assumption::A2 => {
            let overflow = (1.0 - p_s).powi(t_max as i32);
            DelaySpec::new(raw, overflow, assumption)
        }
    }
}

/// Zipf delay with exponent `a`: `p_t = t^{-a} / Σ_{i=1}^{t_max} i^{-a}`.
/// Fully supported on `[1, t_max]`, so it is valid under both assumptions
/// with zero overflow.
pub fn zipf_delay(a: f64, t_max: usize) -> Result<DelaySpec, Error> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::ZipfExponent(a));
    }
    if t_max < 2 {
        return Err(Error::ZipfTmax(t_max));
    }
    let raw: Vec<f64> = (1..=t_max).map(|t| (t as f64).powf(-a)).collect();
    let total: f64 = raw.iter().sum();
    let pmf = raw.iter().map(|q| q / total).collect();
    DelaySpec::new(pmf, 0.0, Assumption::A1)
}

/// Expected transmission time `ET` in slots: `Σ t p_t` under A1, plus
/// `t_max p_{t+}` under A2. Always lies in `[1, t_max]`.
pub fn expected_transmission_time(params: &ModelParams) -> f64 {
    let delay = params.delay();
    let mut et: f64 = (1..=delay.t_max()).map(|t| t as f64 * delay.prob(t)).sum();
    if params.assumption() == Assumption::A2 {
        et += delay.t_max() as f64 * delay.overflow();
    }
    et
}
