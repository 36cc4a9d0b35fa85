//! Analytic LTE/WiFi coexistence model under CSAT duty cycling.
//!
//! LTE transmits for `T_on` seconds, then stays silent for an off period of
//! mean `T̄_off`. The decision variable is the log-domain off time
//! `z̃ = log(T̄_off - c₁)`, in which the negated sum of log throughputs
//! (the proportional-fairness objective) is convex.
//!
//! Units: seconds for durations, bits per second for rates.

use serde::{Deserialize, Serialize};

use crate::adversary::LossFunction;
use crate::bco::DecisionInterval;
use crate::{Error, Result};

/// Slotted random-access parameters of a saturated WiFi network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WifiMac {
    /// Per-slot transmission probability `τ`.
    pub tau: f64,
    /// Idle slot duration `σ`.
    pub slot_time: f64,
    /// Duration of a slot holding a successful transmission.
    pub success_time: f64,
    /// Duration of a slot holding a collision.
    pub collision_time: f64,
    /// Bits delivered by one successful (aggregated) frame.
    pub payload_bits: f64,
}

/// Per-station saturation throughput of `n` stations sharing the medium,
/// with no LTE present:
/// `P_s,j L / (P_idle σ + P_succ T_s + P_coll T_c)`.
pub fn wifi_baseline_rate(mac: &WifiMac, n: u32) -> Result<f64> {
    if !(mac.tau > 0.0 && mac.tau <= 1.0) {
        return Err(Error::param("tau", format!("must lie in (0, 1], got {}", mac.tau)));
    }
    if n == 0 {
        return Err(Error::param("stations", "need at least one station"));
    }
    let tau = mac.tau;
    let p_station = tau * (1.0 - tau).powi(n as i32 - 1);
    let p_success = n as f64 * p_station;
    let p_idle = (1.0 - tau).powi(n as i32);
    let p_collision = (1.0 - p_idle - p_success).max(0.0);
    let mean_slot =
        p_idle * mac.slot_time + p_success * mac.success_time + p_collision * mac.collision_time;
    Ok(p_station * mac.payload_bits / mean_slot)
}

/// Probability that at least one of `n` stations holds the slot in which
/// LTE switches on, `1 - (1-τ)^n`.
pub fn default_collision_prob(tau: f64, n: u32) -> f64 {
    1.0 - (1.0 - tau).powi(n as i32)
}

/// Expected airtime lost to partial collisions at the start of an on period:
/// `c₁ = (T_fra/2) p_txA` for WiFi and `c₂ = ⌈T_fra/(2γ)⌉ γ p_txA` for LTE.
pub fn airtime_corrections(frame_time: f64, collision_prob: f64, subframe: f64) -> Result<(f64, f64)> {
    if !(frame_time > 0.0 && frame_time.is_finite()) {
        return Err(Error::param("frame_time", format!("must be positive, got {frame_time}")));
    }
    if !(subframe > 0.0 && subframe.is_finite()) {
        return Err(Error::param("subframe", format!("must be positive, got {subframe}")));
    }
    if !(0.0..=1.0).contains(&collision_prob) {
        return Err(Error::param(
            "collision_prob",
            format!("must lie in [0, 1], got {collision_prob}"),
        ));
    }
    let c1 = 0.5 * frame_time * collision_prob;
    let c2 = (frame_time / (2.0 * subframe)).ceil() * subframe * collision_prob;
    Ok((c1, c2))
}

/// All inputs of the throughput model for one WiFi population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceParams {
    on_time: f64,
    lte_rate: f64,
    station_rates: Vec<f64>,
    c1: f64,
    c2: f64,
}

impl CoexistenceParams {
    pub fn new(on_time: f64, lte_rate: f64, station_rates: Vec<f64>, c1: f64, c2: f64) -> Result<Self> {
        let p = CoexistenceParams {
            on_time,
            lte_rate,
            station_rates,
            c1,
            c2,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds the parameters with `c₁`, `c₂` derived from the frame
    /// duration, LTE/WiFi collision probability and LTE subframe duration.
    pub fn from_airtime(
        on_time: f64,
        lte_rate: f64,
        station_rates: Vec<f64>,
        frame_time: f64,
        collision_prob: f64,
        subframe: f64,
    ) -> Result<Self> {
        let (c1, c2) = airtime_corrections(frame_time, collision_prob, subframe)?;
        CoexistenceParams::new(on_time, lte_rate, station_rates, c1, c2)
    }

    fn validate(&self) -> Result<()> {
        if self.station_rates.is_empty() {
            return Err(Error::param("stations", "need at least one WiFi station"));
        }
        if let Some(s) = self.station_rates.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::param("station_rates", format!("must be positive, got {s}")));
        }
        if !(self.lte_rate.is_finite() && self.lte_rate > 0.0) {
            return Err(Error::param("lte_rate", format!("must be positive, got {}", self.lte_rate)));
        }
        if !(self.c1.is_finite() && self.c1 >= 0.0) {
            return Err(Error::param("c1", format!("must be nonnegative, got {}", self.c1)));
        }
        if !(self.c2.is_finite() && self.c2 >= 0.0) {
            return Err(Error::param("c2", format!("must be nonnegative, got {}", self.c2)));
        }
        if !(self.on_time.is_finite() && self.on_time > self.c2) {
            return Err(Error::param(
                "on_time",
                format!("must exceed c2 = {}, got {}", self.c2, self.on_time),
            ));
        }
        Ok(())
    }

    pub fn stations(&self) -> u32 {
        self.station_rates.len() as u32
    }

    pub fn on_time(&self) -> f64 {
        self.on_time
    }

    pub fn lte_rate(&self) -> f64 {
        self.lte_rate
    }

    pub fn station_rates(&self) -> &[f64] {
        &self.station_rates
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Multiplies every rate by `factor`.
    pub fn scale_rates(&self, factor: f64) -> Result<Self> {
        CoexistenceParams::new(
            self.on_time,
            self.lte_rate * factor,
            self.station_rates.iter().map(|s| s * factor).collect(),
            self.c1,
            self.c2,
        )
    }

    fn log_rate_sum(&self) -> f64 {
        self.station_rates.iter().map(|s| s.ln()).sum()
    }
}

/// Throughput of WiFi station `j`: `s_j (T̄_off - c₁) / (T_on + T̄_off)`.
pub fn wifi_throughput(params: &CoexistenceParams, toff_bar: f64, j: usize) -> Result<f64> {
    let s = *params
        .station_rates
        .get(j)
        .ok_or_else(|| Error::param("station", format!("index {j} out of range")))?;
    if !(toff_bar >= params.c1) {
        return Err(Error::NoAirtime {
            toff: toff_bar,
            c1: params.c1,
        });
    }
    if toff_bar.is_infinite() {
        return Ok(s);
    }
    Ok(s * (toff_bar - params.c1) / (params.on_time + toff_bar))
}

/// LTE throughput: `r (T_on - c₂) / (T_on + T̄_off)`.
pub fn lte_throughput(params: &CoexistenceParams, toff_bar: f64) -> Result<f64> {
    if !(toff_bar >= 0.0) {
        return Err(Error::param("toff_bar", format!("must be nonnegative, got {toff_bar}")));
    }
    Ok(params.lte_rate * (params.on_time - params.c2) / (params.on_time + toff_bar))
}

/// LTE throughput and mean per-station WiFi throughput at `z̃`.
pub fn throughputs_at(params: &CoexistenceParams, ztilde: f64) -> (f64, f64) {
    let toff = ztilde_to_toff(ztilde, params.c1);
    let share = (toff - params.c1) / (params.on_time + toff);
    let mean_rate = params.station_rates.iter().sum::<f64>() / params.station_rates.len() as f64;
    let lte = params.lte_rate * (params.on_time - params.c2) / (params.on_time + toff);
    (lte, mean_rate * share)
}

/// `log(a + e^z)` without overflow, given `log_a = log(a)`.
fn log_add_exp(log_a: f64, z: f64) -> f64 {
    let m = log_a.max(z);
    m + ((log_a - m).exp() + (z - m).exp()).ln()
}

/// Proportional-fairness cost
/// `-log(r(T_on-c₂)) - Σ_j log s_j + (n+1) log(T_on + c₁ + e^z̃) - n z̃`.
pub fn cost(params: &CoexistenceParams, ztilde: f64) -> f64 {
    let n = params.stations() as f64;
    let log_cycle = log_add_exp((params.on_time + params.c1).ln(), ztilde);
    -(params.lte_rate * (params.on_time - params.c2)).ln() - params.log_rate_sum()
        + (n + 1.0) * log_cycle
        - n * ztilde
}

/// The same cost computed directly from the throughput formulas:
/// `-log s_LTE - Σ_j log s_wifi,j` at `T̄_off = e^z̃ + c₁`.
pub fn cost_from_throughputs(params: &CoexistenceParams, ztilde: f64) -> Result<f64> {
    let toff = ztilde_to_toff(ztilde, params.c1);
    let mut total = -lte_throughput(params, toff)?.ln();
    for j in 0..params.station_rates.len() {
        total -= wifi_throughput(params, toff, j)?.ln();
    }
    Ok(total)
}

/// `d cost / d z̃ = (n+1) e^z̃ / (T_on + c₁ + e^z̃) - n`.
pub fn analytic_gradient(params: &CoexistenceParams, ztilde: f64) -> f64 {
    let n = params.stations() as f64;
    let logistic = 1.0 / (1.0 + ((params.on_time + params.c1).ln() - ztilde).exp());
    (n + 1.0) * logistic - n
}

/// Cost minimiser over an interval, with the matching mean off time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub ztilde: f64,
    pub toff: f64,
    /// False when the unconstrained minimiser was clamped to a bound.
    pub interior: bool,
}

/// The unique root `z̃* = log(n (T_on + c₁))` of the gradient, clamped to `K`.
pub fn optimal_ztilde(params: &CoexistenceParams, interval: &DecisionInterval) -> Optimum {
    let root = (params.stations() as f64 * (params.on_time + params.c1)).ln();
    let ztilde = root.clamp(interval.lower(), interval.upper());
    Optimum {
        ztilde,
        toff: ztilde_to_toff(ztilde, params.c1),
        interior: ztilde == root,
    }
}

pub fn toff_to_ztilde(toff_bar: f64, c1: f64) -> Result<f64> {
    if !(toff_bar > c1) {
        return Err(Error::NoAirtime { toff: toff_bar, c1 });
    }
    Ok((toff_bar - c1).ln())
}

pub fn ztilde_to_toff(ztilde: f64, c1: f64) -> f64 {
    ztilde.exp() + c1
}

/// Largest gradient magnitude over `K`. The gradient is monotone, so the
/// maximum sits at an endpoint.
pub fn lipschitz_on(params: &CoexistenceParams, interval: &DecisionInterval) -> f64 {
    analytic_gradient(params, interval.lower())
        .abs()
        .max(analytic_gradient(params, interval.upper()).abs())
}

/// `(min, max)` of the cost over `K`.
pub fn cost_range(params: &CoexistenceParams, interval: &DecisionInterval) -> (f64, f64) {
    let opt = optimal_ztilde(params, interval);
    let lo = cost(params, opt.ztilde);
    let hi = cost(params, interval.lower()).max(cost(params, interval.upper()));
    (lo, hi)
}

/// `z̃ ∈ [-6.9, 0]`, i.e. the controllable part of `T̄_off` spans roughly
/// 1 ms to 1 s.
pub fn default_interval() -> DecisionInterval {
    DecisionInterval::new(-6.9, 0.0).expect("static bounds")
}

/// Default scenario constants. None of these come from a published
/// parameter table; they are plausible 802.11ac/LTE values chosen so the
/// defaults live in one place.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParameterPack {
    /// LTE on period `T_on`.
    pub on_time: f64,
    /// LTE data rate `r`.
    pub lte_rate: f64,
    /// LTE subframe duration `γ`.
    pub subframe: f64,
    /// WiFi per-slot transmission probability `τ`.
    pub tau: f64,
    /// WiFi idle slot duration `σ`.
    pub slot_time: f64,
    /// WiFi PHY payload rate.
    pub phy_rate: f64,
    /// Fixed per-frame overhead (preamble, headers, SIFS, ACK).
    pub mac_overhead: f64,
    pub packets_per_frame: u32,
    pub packet_bytes: u32,
    /// Overrides `p_txA = 1 - (1-τ)^n`.
    pub collision_prob: Option<f64>,
}

impl Default for ParameterPack {
    fn default() -> Self {
        ParameterPack {
            on_time: 0.05,
            lte_rate: 75e6,
            subframe: 1e-3,
            tau: 1.0 / 16.0,
            slot_time: 9e-6,
            phy_rate: 65e6,
            mac_overhead: 100e-6,
            packets_per_frame: 5,
            packet_bytes: 1500,
            collision_prob: None,
        }
    }
}

impl ParameterPack {
    pub fn payload_bits(&self) -> f64 {
        self.packets_per_frame as f64 * self.packet_bytes as f64 * 8.0
    }

    /// `T_fra`: payload airtime plus fixed overhead. Also used for success
    /// and collision slot durations.
    pub fn frame_time(&self) -> f64 {
        self.payload_bits() / self.phy_rate + self.mac_overhead
    }

    pub fn mac(&self) -> WifiMac {
        let frame = self.frame_time();
        WifiMac {
            tau: self.tau,
            slot_time: self.slot_time,
            success_time: frame,
            collision_time: frame,
            payload_bits: self.payload_bits(),
        }
    }

    pub fn collision_prob(&self, n: u32) -> f64 {
        self.collision_prob
            .unwrap_or_else(|| default_collision_prob(self.tau, n))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("on_time", self.on_time),
            ("lte_rate", self.lte_rate),
            ("subframe", self.subframe),
            ("slot_time", self.slot_time),
            ("phy_rate", self.phy_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.mac_overhead.is_finite() && self.mac_overhead >= 0.0) {
            return Err(Error::param("mac_overhead", "must be nonnegative"));
        }
        if self.packets_per_frame == 0 || self.packet_bytes == 0 {
            return Err(Error::param("packets_per_frame", "frames must carry a payload"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::param("tau", format!("must lie in (0, 1], got {}", self.tau)));
        }
        if let Some(p) = self.collision_prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param("collision_prob", format!("must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    /// Model parameters for `n` identical saturated stations.
    pub fn params(&self, n: u32) -> Result<CoexistenceParams> {
        self.validate()?;
        let rate = wifi_baseline_rate(&self.mac(), n)?;
        CoexistenceParams::from_airtime(
            self.on_time,
            self.lte_rate,
            vec![rate; n as usize],
            self.frame_time(),
            self.collision_prob(n),
            self.subframe,
        )
    }
}

/// The coexistence cost as a loss over `z̃`.
#[derive(Clone, Debug)]
pub struct CoexistenceLoss {
    params: CoexistenceParams,
    lipschitz: f64,
}

impl CoexistenceLoss {
    pub fn new(params: CoexistenceParams, interval: &DecisionInterval) -> Self {
        let lipschitz = lipschitz_on(&params, interval);
        CoexistenceLoss { params, lipschitz }
    }

    pub fn params(&self) -> &CoexistenceParams {
        &self.params
    }
}

impl LossFunction for CoexistenceLoss {
    fn value(&self, x: f64) -> f64 {
        cost(&self.params, x)
    }

    fn gradient(&self, x: f64) -> Option<f64> {
        Some(analytic_gradient(&self.params, x))
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}
