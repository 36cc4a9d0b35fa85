//! Slotted simulator of CSAT LTE duty cycling next to saturated WiFi.
//!
//! LTE alternates a fixed on period with random off periods. While LTE is
//! off, each of the `n` WiFi stations transmits in every slot with
//! probability `τ` (no backoff state). Idle slots last `σ`, busy slots
//! one frame time. A frame still in the air when LTE switches on is lost
//! for WiFi and corrupts the first `⌈overlap/γ⌉` LTE subframes.
//!
//! Idle runs are drawn as geometric variables, so the cost of a batch is
//! proportional to the number of busy slots rather than the number of
//! idle ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coexistence::{self, ParameterPack};
use crate::stats::Summary;
use crate::{Error, Result};

/// Distribution of the off period around its mean `T̄_off`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OffTimeLaw {
    /// Uniform on `[(1-spread)·T̄_off, (1+spread)·T̄_off]`; zero spread
    /// gives a constant off period.
    Uniform { spread: f64 },
}

impl Default for OffTimeLaw {
    fn default() -> Self {
        OffTimeLaw::Uniform { spread: 0.5 }
    }
}

impl OffTimeLaw {
    fn validate(&self) -> Result<()> {
        let OffTimeLaw::Uniform { spread } = *self;
        if !(0.0..1.0).contains(&spread) {
            return Err(Error::param("spread", format!("must lie in [0, 1), got {spread}")));
        }
        Ok(())
    }
}

/// Draws one off-period duration with mean `toff_bar`.
pub fn sample_toff(rng: &mut impl Rng, law: &OffTimeLaw, toff_bar: f64) -> f64 {
    let OffTimeLaw::Uniform { spread } = *law;
    if spread == 0.0 {
        return toff_bar;
    }
    toff_bar * rng.random_range(1.0 - spread..=1.0 + spread)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub stations: u32,
    pub tau: f64,
    pub slot_time: f64,
    pub frame_time: f64,
    pub payload_bits: f64,
    /// LTE on period; zero disables LTE entirely.
    pub on_time: f64,
    pub subframe: f64,
    pub lte_rate: f64,
    /// Simulated seconds per batch `t_b`.
    pub batch_duration: f64,
    pub off_time: OffTimeLaw,
    pub seed: u64,
}

impl SimConfig {
    pub fn from_pack(pack: &ParameterPack, stations: u32, batch_duration: f64, seed: u64) -> Self {
        SimConfig {
            stations,
            tau: pack.tau,
            slot_time: pack.slot_time,
            frame_time: pack.frame_time(),
            payload_bits: pack.payload_bits(),
            on_time: pack.on_time,
            subframe: pack.subframe,
            lte_rate: pack.lte_rate,
            batch_duration,
            off_time: OffTimeLaw::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stations == 0 {
            return Err(Error::param("stations", "need at least one station"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::param("tau", format!("must lie in [0, 1], got {}", self.tau)));
        }
        for (name, v) in [
            ("slot_time", self.slot_time),
            ("frame_time", self.frame_time),
            ("payload_bits", self.payload_bits),
            ("subframe", self.subframe),
            ("lte_rate", self.lte_rate),
            ("batch_duration", self.batch_duration),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.on_time.is_finite() && self.on_time >= 0.0) {
            return Err(Error::param("on_time", "must be nonnegative"));
        }
        self.off_time.validate()
    }

    /// Whether a batch spans fewer than 100 duty cycles at this off time,
    /// in which case batch averages are dominated by off-time sampling noise.
    pub fn is_short_batch(&self, toff_bar: f64) -> bool {
        self.on_time > 0.0 && self.batch_duration < 100.0 * (self.on_time + toff_bar)
    }
}

/// Totals accumulated over one batch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub station_bits: Vec<f64>,
    pub lte_bits: f64,
    pub elapsed: f64,
    pub on_time_total: f64,
    pub cycles: u64,
    pub successes: u64,
    pub collisions: u64,
    /// WiFi frames cut by the start of an LTE on period.
    pub truncated_frames: u64,
    pub lost_subframes: u64,
}

impl BatchResult {
    pub fn lte_throughput(&self) -> f64 {
        self.lte_bits / self.elapsed
    }

    pub fn wifi_throughput(&self, j: usize) -> f64 {
        self.station_bits[j] / self.elapsed
    }

    pub fn mean_wifi_throughput(&self) -> f64 {
        self.station_bits.iter().sum::<f64>() / self.station_bits.len() as f64 / self.elapsed
    }

    /// `-log ŝ_LTE - Σ_j log ŝ_wifi,j` from the batch averages.
    pub fn noisy_cost(&self) -> Result<f64> {
        if !(self.lte_bits > 0.0) {
            return Err(Error::BatchTooShort { what: "LTE".into() });
        }
        let mut total = -self.lte_throughput().ln();
        for (j, &bits) in self.station_bits.iter().enumerate() {
            if !(bits > 0.0) {
                return Err(Error::BatchTooShort {
                    what: format!("WiFi station {j}"),
                });
            }
            total -= (bits / self.elapsed).ln();
        }
        Ok(total)
    }
}

pub fn noisy_cost(batch: &BatchResult) -> Result<f64> {
    batch.noisy_cost()
}

/// A simulator instance owning its random stream; consecutive batches
/// continue the same stream.
#[derive(Clone, Debug)]
pub struct PacketSim {
    config: SimConfig,
    rng: ChaCha8Rng,
}

impl PacketSim {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(PacketSim { config, rng })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn set_stations(&mut self, stations: u32) -> Result<()> {
        if stations == 0 {
            return Err(Error::param("stations", "need at least one station"));
        }
        self.config.stations = stations;
        Ok(())
    }

    pub fn run_batch(&mut self, toff_bar: f64) -> Result<BatchResult> {
        if !(toff_bar.is_finite() && toff_bar > 0.0) {
            return Err(Error::param("toff_bar", format!("must be positive, got {toff_bar}")));
        }
        let cfg = &self.config;
        let mut res = BatchResult {
            station_bits: vec![0.0; cfg.stations as usize],
            ..BatchResult::default()
        };
        let contention = Contention::new(cfg);
        if cfg.on_time == 0.0 {
            let (end, _) = contention.run(&mut self.rng, &mut res, 0.0, f64::INFINITY, cfg.batch_duration);
            res.elapsed = end;
            return Ok(res);
        }
        let max_lost = (cfg.on_time / cfg.subframe).ceil() as u64;
        let mut t = 0.0;
        let mut carried = 0u64;
        while t < cfg.batch_duration {
            let lost = carried.min(max_lost);
            res.lost_subframes += lost;
            let usable = (cfg.on_time - lost as f64 * cfg.subframe).max(0.0);
            res.lte_bits += cfg.lte_rate * usable;
            res.on_time_total += cfg.on_time;
            t += cfg.on_time;

            let off = sample_toff(&mut self.rng, &cfg.off_time, toff_bar);
            let end = t + off;
            let (_, lost_next) = contention.run(&mut self.rng, &mut res, t, end, f64::INFINITY);
            carried = lost_next;
            t = end;
            res.cycles += 1;
        }
        res.elapsed = t;
        Ok(res)
    }
}

/// Run one batch from a fresh simulator seeded by `config.seed`.
pub fn run_batch(config: &SimConfig, toff_bar: f64) -> Result<BatchResult> {
    PacketSim::new(config.clone())?.run_batch(toff_bar)
}

struct Contention {
    stations: u32,
    slot_time: f64,
    frame_time: f64,
    payload_bits: f64,
    subframe: f64,
    busy: f64,
    single_given_busy: f64,
    ln_idle: f64,
}

impl Contention {
    fn new(cfg: &SimConfig) -> Self {
        let n = cfg.stations as i32;
        let idle = (1.0 - cfg.tau).powi(n);
        let busy = 1.0 - idle;
        let single = n as f64 * cfg.tau * (1.0 - cfg.tau).powi(n - 1);
        Contention {
            stations: cfg.stations,
            slot_time: cfg.slot_time,
            frame_time: cfg.frame_time,
            payload_bits: cfg.payload_bits,
            subframe: cfg.subframe,
            busy,
            single_given_busy: if busy > 0.0 { (single / busy).min(1.0) } else { 0.0 },
            ln_idle: idle.ln(),
        }
    }

    /// Idle slots before the next busy one.
    fn idle_run(&self, rng: &mut impl Rng) -> f64 {
        if self.busy >= 1.0 {
            return 0.0;
        }
        let u: f64 = 1.0 - rng.random::<f64>();
        (u.ln() / self.ln_idle).floor()
    }

    /// Contends on `[start, end)`, stopping early at the first slot boundary
    /// at or after `stop`. Returns the time reached and the number of LTE
    /// subframes corrupted by a frame crossing `end`.
    fn run(&self, rng: &mut impl Rng, res: &mut BatchResult, start: f64, end: f64, stop: f64) -> (f64, u64) {
        let mut cursor = start;
        if self.busy <= 0.0 {
            if end.is_finite() {
                return (end, 0);
            }
            let slots = ((stop - start) / self.slot_time).ceil();
            return (start + slots * self.slot_time, 0);
        }
        loop {
            let idle = self.idle_run(rng) * self.slot_time;
            if cursor + idle >= end {
                return (end, 0);
            }
            if cursor + idle >= stop {
                let slots = ((stop - cursor) / self.slot_time).ceil();
                return (cursor + slots * self.slot_time, 0);
            }
            cursor += idle;
            let success = rng.random_bool(self.single_given_busy);
            let frame_end = cursor + self.frame_time;
            if frame_end > end {
                res.truncated_frames += 1;
                let lost = ((frame_end - end) / self.subframe).ceil() as u64;
                return (end, lost);
            }
            if success {
                let j = rng.random_range(0..self.stations) as usize;
                res.station_bits[j] += self.payload_bits;
                res.successes += 1;
            } else {
                res.collisions += 1;
            }
            cursor = frame_end;
            if cursor >= stop {
                return (cursor, 0);
            }
        }
    }
}

/// Simulated versus analytic throughputs at one operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub stations: u32,
    pub toff: f64,
    pub model_lte: f64,
    pub sim_lte: f64,
    pub model_wifi: f64,
    /// Replication-averaged per-station throughputs.
    pub sim_wifi: Vec<f64>,
    pub sim_lte_spread: Summary,
    /// Largest relative error over LTE and every station.
    pub max_rel_error: f64,
}

/// Compares replication-averaged simulator throughputs with the analytic
/// model for every `(n, T̄_off)` pair.
pub fn calibrate(
    pack: &ParameterPack,
    stations: &[u32],
    toffs: &[f64],
    batch_duration: f64,
    replications: u32,
    seed: u64,
) -> Result<Vec<CalibrationRow>> {
    use rayon::prelude::*;

    let cases: Vec<(u32, f64)> = stations
        .iter()
        .flat_map(|&n| toffs.iter().map(move |&t| (n, t)))
        .collect();
    cases
        .par_iter()
        .enumerate()
        .map(|(case, &(n, toff))| {
            let params = pack.params(n)?;
            let model_lte = coexistence::lte_throughput(&params, toff)?;
            let model_wifi = coexistence::wifi_throughput(&params, toff, 0)?;
            let mut lte = Vec::new();
            let mut wifi = vec![0.0; n as usize];
            for rep in 0..replications {
                let cfg = SimConfig::from_pack(
                    pack,
                    n,
                    batch_duration,
                    crate::mix_seed(seed, (case as u64) << 32 | rep as u64),
                );
                let batch = run_batch(&cfg, toff)?;
                lte.push(batch.lte_throughput());
                for (j, w) in wifi.iter_mut().enumerate() {
                    *w += batch.wifi_throughput(j) / replications as f64;
                }
            }
            let spread = Summary::of(&lte);
            let mut max_rel_error = (spread.mean - model_lte).abs() / model_lte;
            for w in &wifi {
                max_rel_error = max_rel_error.max((w - model_wifi).abs() / model_wifi);
            }
            Ok(CalibrationRow {
                stations: n,
                toff,
                model_lte,
                sim_lte: spread.mean,
                model_wifi,
                sim_wifi: wifi,
                sim_lte_spread: spread,
                max_rel_error,
            })
        })
        .collect()
}
