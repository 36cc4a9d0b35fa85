//! C ABI over `semp-core`.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`SempStatus`]; on failure the message is
//! kept per thread and read back with [`semp_last_error_message`].
//! Handles are not thread safe: use one handle from one thread at a time.
//!
//! # Safety
//!
//! Pointer arguments must be null or point to valid, properly aligned
//! values of the declared type. Handles must come from the matching
//! `*_new` and must not be used after `*_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use semp_core::adversary::{corollary_bound, Corollary, Theorem1};
use semp_core::bco::{DecisionInterval, ExplorationSchedule, Learner, LearnerConfig, Sign, StepSizeSchedule, Truncation};
use semp_core::coexistence::{self, CoexistenceParams, ParameterPack};
use semp_core::packet_sim::{OffTimeLaw, PacketSim, SimConfig};
use semp_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SempStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Calls made out of order, e.g. observing without a pending query.
    ProtocolViolation = 3,
    /// Failure while computing, e.g. a batch with zero measured throughput.
    Runtime = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let mut bytes = msg.into().into_bytes();
    bytes.retain(|&b| b != 0);
    let msg = CString::new(bytes).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: SempStatus, msg: impl Into<String>) -> SempStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> SempStatus {
    let status = match err {
        Error::Protocol(_) => SempStatus::ProtocolViolation,
        Error::BatchTooShort { .. } | Error::Io { .. } | Error::Format { .. } => SempStatus::Runtime,
        _ => SempStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), SempStatus>) -> SempStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SempStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SempStatus::Panic, format!("panic: {msg}"))
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, SempStatus>;
}

impl<T> OrStatus<T> for semp_core::Result<T> {
    fn or_status(self) -> Result<T, SempStatus> {
        self.map_err(from_error)
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, SempStatus> {
    p.as_ref().ok_or_else(|| fail(SempStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, SempStatus> {
    p.as_mut().ok_or_else(|| fail(SempStatus::NullPointer, format!("`{name}` is null")))
}

/// Message of the last failed call on this thread, or null if it succeeded.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn semp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, nul-terminated name of a status code.
#[no_mangle]
pub extern "C" fn semp_status_name(status: SempStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        SempStatus::Ok => b"ok\0",
        SempStatus::NullPointer => b"null-pointer\0",
        SempStatus::InvalidArgument => b"invalid-argument\0",
        SempStatus::ProtocolViolation => b"protocol-violation\0",
        SempStatus::Runtime => b"runtime\0",
        SempStatus::Panic => b"panic\0",
    };
    name.as_ptr().cast()
}

// ---------------------------------------------------------------- learner

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SempTruncationMode {
    Off = 0,
    Lipschitz = 1,
    Relative = 2,
}

/// Learner settings. With `constant` set, `constant_eta` and
/// `constant_delta` replace the power schedules.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SempLearnerConfig {
    pub lower: f64,
    pub upper: f64,
    pub omega: f64,
    pub exponent: f64,
    pub step_scale: f64,
    pub step_exponent: f64,
    pub constant: bool,
    pub constant_eta: f64,
    pub constant_delta: f64,
    pub truncation: SempTruncationMode,
    pub truncation_factor: f64,
    /// Only read in `Lipschitz` mode.
    pub truncation_bound: f64,
    pub has_initial: bool,
    pub initial: f64,
    pub seed: u64,
}

impl From<&LearnerConfig> for SempLearnerConfig {
    fn from(c: &LearnerConfig) -> Self {
        let (mode, factor, bound) = match c.truncation {
            Truncation::Off => (SempTruncationMode::Off, 0.0, 0.0),
            Truncation::Lipschitz { bound, factor } => (SempTruncationMode::Lipschitz, factor, bound),
            Truncation::Relative { factor } => (SempTruncationMode::Relative, factor, 0.0),
        };
        SempLearnerConfig {
            lower: c.interval.lower(),
            upper: c.interval.upper(),
            omega: c.exploration.omega,
            exponent: c.exploration.exponent,
            step_scale: c.step_size.scale,
            step_exponent: c.step_size.exponent,
            constant: false,
            constant_eta: 0.0,
            constant_delta: 0.0,
            truncation: mode,
            truncation_factor: factor,
            truncation_bound: bound,
            has_initial: c.initial.is_some(),
            initial: c.initial.unwrap_or(0.0),
            seed: c.seed,
        }
    }
}

impl SempLearnerConfig {
    fn to_core(self) -> semp_core::Result<LearnerConfig> {
        let interval = DecisionInterval::new(self.lower, self.upper)?;
        let truncation = match self.truncation {
            SempTruncationMode::Off => Truncation::Off,
            SempTruncationMode::Lipschitz => Truncation::Lipschitz {
                bound: self.truncation_bound,
                factor: self.truncation_factor,
            },
            SempTruncationMode::Relative => Truncation::Relative {
                factor: self.truncation_factor,
            },
        };
        let (exploration, step_size) = if self.constant {
            (
                ExplorationSchedule::constant(self.constant_delta),
                StepSizeSchedule::constant(self.constant_eta),
            )
        } else {
            (
                ExplorationSchedule::power(self.omega, self.exponent),
                StepSizeSchedule::power(self.step_scale, self.step_exponent),
            )
        };
        let config = LearnerConfig {
            interval,
            exploration,
            step_size,
            truncation,
            initial: self.has_initial.then_some(self.initial),
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Outcome of a completed iteration. `sign` is +1 or -1.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SempStepReport {
    pub k: u64,
    pub sign: i32,
    pub delta: f64,
    pub eta: f64,
    pub center: f64,
    pub gplus: f64,
    pub gminus: f64,
    pub raw_gradient: f64,
    pub gradient: f64,
    pub truncated: bool,
    pub next_center: f64,
}

pub struct SempLearner(Learner);

/// Fills `out` with the default settings on the default decision interval.
#[no_mangle]
pub unsafe extern "C" fn semp_learner_config_default(out: *mut SempLearnerConfig) -> SempStatus {
    guard(|| {
        *deref_mut(out, "out")? = (&LearnerConfig::new(coexistence::default_interval())).into();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semp_learner_new(config: *const SempLearnerConfig, out: *mut *mut SempLearner) -> SempStatus {
    guard(|| {
        let config = deref(config, "config")?.to_core().or_status()?;
        let out = deref_mut(out, "out")?;
        let learner = Learner::new(config).or_status()?;
        *out = Box::into_raw(Box::new(SempLearner(learner)));
        Ok(())
    })
}

/// Releases a learner. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn semp_learner_free(learner: *mut SempLearner) {
    if !learner.is_null() {
        drop(Box::from_raw(learner));
    }
}

/// Next point to play and its one-based round.
#[no_mangle]
pub unsafe extern "C" fn semp_learner_next_query(
    learner: *mut SempLearner,
    round: *mut u64,
    point: *mut f64,
) -> SempStatus {
    guard(|| {
        let learner = deref_mut(learner, "learner")?;
        let (round, point) = (deref_mut(round, "round")?, deref_mut(point, "point")?);
        let q = learner.0.next_query().or_status()?;
        *round = q.round;
        *point = q.point;
        Ok(())
    })
}

/// Feeds the cost of the last query. `completed` is set when this closes an
/// iteration, in which case `report` (if not null) is filled.
#[no_mangle]
pub unsafe extern "C" fn semp_learner_observe(
    learner: *mut SempLearner,
    cost: f64,
    completed: *mut bool,
    report: *mut SempStepReport,
) -> SempStatus {
    guard(|| {
        let learner = deref_mut(learner, "learner")?;
        let completed = deref_mut(completed, "completed")?;
        let step = learner.0.observe(cost).or_status()?;
        *completed = step.is_some();
        if let (Some(r), Some(out)) = (step, report.as_mut()) {
            *out = SempStepReport {
                k: r.k,
                sign: if r.sign == Sign::Plus { 1 } else { -1 },
                delta: r.delta,
                eta: r.eta,
                center: r.center,
                gplus: r.gplus,
                gminus: r.gminus,
                raw_gradient: r.raw_gradient,
                gradient: r.gradient,
                truncated: r.truncated,
                next_center: r.next_center,
            };
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semp_learner_center(learner: *const SempLearner, out: *mut f64) -> SempStatus {
    guard(|| {
        *deref_mut(out, "out")? = deref(learner, "learner")?.0.center();
        Ok(())
    })
}

// ------------------------------------------------------------ coexistence

/// Scenario constants. `collision_prob` is used only when
/// `has_collision_prob` is set.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SempParameterPack {
    pub on_time: f64,
    pub lte_rate: f64,
    pub subframe: f64,
    pub tau: f64,
    pub slot_time: f64,
    pub phy_rate: f64,
    pub mac_overhead: f64,
    pub packets_per_frame: u32,
    pub packet_bytes: u32,
    pub has_collision_prob: bool,
    pub collision_prob: f64,
}

impl From<&ParameterPack> for SempParameterPack {
    fn from(p: &ParameterPack) -> Self {
        SempParameterPack {
            on_time: p.on_time,
            lte_rate: p.lte_rate,
            subframe: p.subframe,
            tau: p.tau,
            slot_time: p.slot_time,
            phy_rate: p.phy_rate,
            mac_overhead: p.mac_overhead,
            packets_per_frame: p.packets_per_frame,
            packet_bytes: p.packet_bytes,
            has_collision_prob: p.collision_prob.is_some(),
            collision_prob: p.collision_prob.unwrap_or(0.0),
        }
    }
}

impl From<&SempParameterPack> for ParameterPack {
    fn from(p: &SempParameterPack) -> Self {
        ParameterPack {
            on_time: p.on_time,
            lte_rate: p.lte_rate,
            subframe: p.subframe,
            tau: p.tau,
            slot_time: p.slot_time,
            phy_rate: p.phy_rate,
            mac_overhead: p.mac_overhead,
            packets_per_frame: p.packets_per_frame,
            packet_bytes: p.packet_bytes,
            collision_prob: p.has_collision_prob.then_some(p.collision_prob),
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SempOptimum {
    pub ztilde: f64,
    /// Mean off time in seconds.
    pub toff: f64,
    pub interior: bool,
}

pub struct SempCoexistence(CoexistenceParams);

#[no_mangle]
pub unsafe extern "C" fn semp_parameter_pack_default(out: *mut SempParameterPack) -> SempStatus {
    guard(|| {
        *deref_mut(out, "out")? = (&ParameterPack::default()).into();
        Ok(())
    })
}

/// Model for `stations` identical saturated stations.
#[no_mangle]
pub unsafe extern "C" fn semp_coexistence_new(
    pack: *const SempParameterPack,
    stations: u32,
    out: *mut *mut SempCoexistence,
) -> SempStatus {
    guard(|| {
        let pack = ParameterPack::from(deref(pack, "pack")?);
        let out = deref_mut(out, "out")?;
        let params = pack.params(stations).or_status()?;
        *out = Box::into_raw(Box::new(SempCoexistence(params)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semp_coexistence_free(model: *mut SempCoexistence) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Cost and its derivative at `ztilde`. Either output may be null.
#[no_mangle]
pub unsafe extern "C" fn semp_coexistence_cost(
    model: *const SempCoexistence,
    ztilde: f64,
    cost: *mut f64,
    gradient: *mut f64,
) -> SempStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        if !ztilde.is_finite() {
            return Err(fail(SempStatus::InvalidArgument, format!("ztilde must be finite, got {ztilde}")));
        }
        if let Some(c) = cost.as_mut() {
            *c = coexistence::cost(m, ztilde);
        }
        if let Some(g) = gradient.as_mut() {
            *g = coexistence::analytic_gradient(m, ztilde);
        }
        Ok(())
    })
}

/// LTE and per-station WiFi throughput (b/s) at mean off time `toff`.
#[no_mangle]
pub unsafe extern "C" fn semp_coexistence_throughputs(
    model: *const SempCoexistence,
    toff: f64,
    lte: *mut f64,
    wifi: *mut f64,
) -> SempStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let (lte, wifi) = (deref_mut(lte, "lte")?, deref_mut(wifi, "wifi")?);
        *lte = coexistence::lte_throughput(m, toff).or_status()?;
        *wifi = coexistence::wifi_throughput(m, toff, 0).or_status()?;
        Ok(())
    })
}

/// Cost minimiser over `[lower, upper]`.
#[no_mangle]
pub unsafe extern "C" fn semp_coexistence_optimum(
    model: *const SempCoexistence,
    lower: f64,
    upper: f64,
    out: *mut SempOptimum,
) -> SempStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let out = deref_mut(out, "out")?;
        let k = DecisionInterval::new(lower, upper).or_status()?;
        let o = coexistence::optimal_ztilde(m, &k);
        *out = SempOptimum {
            ztilde: o.ztilde,
            toff: o.toff,
            interior: o.interior,
        };
        Ok(())
    })
}

// ---------------------------------------------------------- packet sim

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SempBatchReport {
    pub lte_throughput: f64,
    pub mean_wifi_throughput: f64,
    pub elapsed: f64,
    pub cycles: u64,
    pub successes: u64,
    pub collisions: u64,
    pub truncated_frames: u64,
    pub lost_subframes: u64,
    /// Cost of the measured throughputs; NaN if some throughput was zero.
    pub noisy_cost: f64,
}

pub struct SempPacketSim(PacketSim);

/// Simulator for `stations` stations with batches of `batch_duration`
/// seconds and off times uniform within `spread` of their mean.
#[no_mangle]
pub unsafe extern "C" fn semp_packet_sim_new(
    pack: *const SempParameterPack,
    stations: u32,
    batch_duration: f64,
    spread: f64,
    seed: u64,
    out: *mut *mut SempPacketSim,
) -> SempStatus {
    guard(|| {
        let pack = ParameterPack::from(deref(pack, "pack")?);
        let out = deref_mut(out, "out")?;
        pack.validate().or_status()?;
        let config = SimConfig {
            off_time: OffTimeLaw::Uniform { spread },
            ..SimConfig::from_pack(&pack, stations, batch_duration, seed)
        };
        let sim = PacketSim::new(config).or_status()?;
        *out = Box::into_raw(Box::new(SempPacketSim(sim)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semp_packet_sim_free(sim: *mut SempPacketSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

#[no_mangle]
pub unsafe extern "C" fn semp_packet_sim_set_stations(sim: *mut SempPacketSim, stations: u32) -> SempStatus {
    guard(|| deref_mut(sim, "sim")?.0.set_stations(stations).or_status())
}

/// Runs one batch at mean off time `toff` seconds.
#[no_mangle]
pub unsafe extern "C" fn semp_packet_sim_run_batch(
    sim: *mut SempPacketSim,
    toff: f64,
    out: *mut SempBatchReport,
) -> SempStatus {
    guard(|| {
        let sim = deref_mut(sim, "sim")?;
        let out = deref_mut(out, "out")?;
        if !(toff.is_finite() && toff > 0.0) {
            return Err(fail(SempStatus::InvalidArgument, format!("toff must be positive, got {toff}")));
        }
        let b = sim.0.run_batch(toff).or_status()?;
        *out = SempBatchReport {
            lte_throughput: b.lte_throughput(),
            mean_wifi_throughput: b.mean_wifi_throughput(),
            elapsed: b.elapsed,
            cycles: b.cycles,
            successes: b.successes,
            collisions: b.collisions,
            truncated_frames: b.truncated_frames,
            lost_subframes: b.lost_subframes,
            noisy_cost: b.noisy_cost().unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

// ---------------------------------------------------------------- bounds

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SempRegime {
    General = 0,
    SwitchingTotal = 1,
    SwitchingInterval = 2,
    Slow = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SempTuning {
    pub eta: f64,
    pub delta: f64,
    pub bound: f64,
}

/// Interval regret bound for constant `eta` and `delta` over `span = r - s`
/// rounds with total deviation `total_deviation`.
#[no_mangle]
pub unsafe extern "C" fn semp_theorem1_bound(
    diameter: f64,
    lipschitz: f64,
    eta: f64,
    delta: f64,
    span: f64,
    total_deviation: f64,
    out: *mut f64,
) -> SempStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = Theorem1 {
            diameter,
            lipschitz,
            eta,
            delta,
            span,
            total_deviation,
        }
        .bound()
        .or_status()?;
        Ok(())
    })
}

/// Tuned parameters and bound for horizon `horizon`. `switches` is read for
/// `SwitchingTotal`, `alpha` for `Slow`.
#[no_mangle]
pub unsafe extern "C" fn semp_corollary_bound(
    regime: SempRegime,
    switches: u32,
    alpha: f64,
    horizon: f64,
    diameter: f64,
    lipschitz: f64,
    range: f64,
    out: *mut SempTuning,
) -> SempStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let which = match regime {
            SempRegime::General => Corollary::General,
            SempRegime::SwitchingTotal => Corollary::SwitchingTotal { switches },
            SempRegime::SwitchingInterval => Corollary::SwitchingInterval,
            SempRegime::Slow => Corollary::Slow { alpha },
        };
        let b = corollary_bound(which, horizon, diameter, lipschitz, range).or_status()?;
        *out = SempTuning {
            eta: b.eta,
            delta: b.delta,
            bound: b.bound,
        };
        Ok(())
    })
}
