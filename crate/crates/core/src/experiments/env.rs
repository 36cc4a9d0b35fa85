use crate::coexistence::{self, CoexistenceParams, ParameterPack};
use crate::packet_sim::{PacketSim, SimConfig};
use crate::Result;

use super::plan::EnvironmentSpec;

/// One cost evaluation. Measured throughputs are present only for
/// simulated environments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub cost: f64,
    pub measured_lte: Option<f64>,
    pub measured_wifi: Option<f64>,
}

/// What the learner is played against: maps `z̃` to a cost for the
/// current station count.
pub trait Environment: Send {
    fn stations(&self) -> u32;
    fn set_stations(&mut self, n: u32) -> Result<()>;
    /// Analytic model for the current station count.
    fn params(&self) -> &CoexistenceParams;
    fn evaluate(&mut self, ztilde: f64) -> Result<Evaluation>;
}

#[derive(Clone, Debug)]
pub struct AnalyticEnv {
    pack: ParameterPack,
    params: CoexistenceParams,
}

impl AnalyticEnv {
    pub fn new(pack: ParameterPack, stations: u32) -> Result<Self> {
        let params = pack.params(stations)?;
        Ok(AnalyticEnv { pack, params })
    }
}

impl Environment for AnalyticEnv {
    fn stations(&self) -> u32 {
        self.params.stations()
    }

    fn set_stations(&mut self, n: u32) -> Result<()> {
        if n != self.stations() {
            self.params = self.pack.params(n)?;
        }
        Ok(())
    }

    fn params(&self) -> &CoexistenceParams {
        &self.params
    }

    fn evaluate(&mut self, ztilde: f64) -> Result<Evaluation> {
        Ok(Evaluation {
            cost: coexistence::cost(&self.params, ztilde),
            measured_lte: None,
            measured_wifi: None,
        })
    }
}

/// Costs measured from one simulated batch per query.
#[derive(Clone, Debug)]
pub struct SimEnv {
    model: AnalyticEnv,
    sim: PacketSim,
}

impl SimEnv {
    pub fn new(pack: ParameterPack, stations: u32, sim: SimConfig) -> Result<Self> {
        Ok(SimEnv {
            model: AnalyticEnv::new(pack, stations)?,
            sim: PacketSim::new(SimConfig { stations, ..sim })?,
        })
    }
}

impl Environment for SimEnv {
    fn stations(&self) -> u32 {
        self.model.stations()
    }

    fn set_stations(&mut self, n: u32) -> Result<()> {
        self.model.set_stations(n)?;
        self.sim.set_stations(n)
    }

    fn params(&self) -> &CoexistenceParams {
        self.model.params()
    }

    fn evaluate(&mut self, ztilde: f64) -> Result<Evaluation> {
        let toff = coexistence::ztilde_to_toff(ztilde, self.params().c1());
        let batch = self.sim.run_batch(toff)?;
        Ok(Evaluation {
            cost: batch.noisy_cost()?,
            measured_lte: Some(batch.lte_throughput()),
            measured_wifi: Some(batch.mean_wifi_throughput()),
        })
    }
}

pub fn build(spec: &EnvironmentSpec, seed: u64) -> Result<Box<dyn Environment>> {
    Ok(match spec {
        EnvironmentSpec::Analytic { pack, stations } => Box::new(AnalyticEnv::new(pack.clone(), *stations)?),
        EnvironmentSpec::PacketSim {
            pack,
            stations,
            batch_duration,
            off_time,
        } => {
            let sim = SimConfig {
                off_time: *off_time,
                ..SimConfig::from_pack(pack, *stations, *batch_duration, seed)
            };
            Box::new(SimEnv::new(pack.clone(), *stations, sim)?)
        }
    })
}
