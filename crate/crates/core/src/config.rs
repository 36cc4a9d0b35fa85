//! TOML run configuration. Every key is optional; missing keys fall back
//! to the preset of the chosen scenario.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bco::{DecisionInterval, ExplorationSchedule, LearnerConfig, StepSizeSchedule, Truncation};
use crate::coexistence::ParameterPack;
use crate::experiments::{
    seed_range, staircase, EnvironmentSpec, ExperimentPlan, Scenario, StationChange, SwitchTiming,
};
use crate::packet_sim::OffTimeLaw;
use crate::{Error, Result};

/// Comma- or whitespace-separated seed list overriding the config.
pub const SEEDS_ENV: &str = "SEMP_SEEDS";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    /// Explicit seeds; wins over `replications` and `base_seed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub learner: LearnerSection,
    #[serde(default)]
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
    /// Presence switches to constant `η`, `δ`; missing values are tuned
    /// for the configured adversary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<ConstantSection>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvironmentKind {
    Analytic,
    PacketSim,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<EnvironmentKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stations: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toff_spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pack: Option<ParameterPack>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Staircase {
    pub path: Vec<u32>,
    pub every: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_timing: Option<SwitchTiming>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<StationChange>>,
    /// Shorthand for evenly spaced events; the first entry is the
    /// starting station count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub staircase: Option<Staircase>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omega: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exponent: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stations: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<PathBuf>,
    /// Directory for `sweep` outputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub throughput_tolerance: Option<f64>,
}

/// One point of a sweep cross-product.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub label: String,
    pub plan: ExperimentPlan,
}

fn config_error(path: String, message: impl Into<String>) -> Error {
    Error::Config {
        path,
        message: message.into(),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error(String::new(), e.message()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(path, e.into_inner().message())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| config_error(String::new(), e.to_string()))
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario.unwrap_or(Scenario::OmegaSweep)
    }

    /// Resolves the config against the scenario preset and validates it.
    pub fn plan(&self) -> Result<ExperimentPlan> {
        let scenario = self.scenario();
        let mut plan = ExperimentPlan::preset(scenario)?;
        if let Some(k) = self.iterations {
            plan.iterations = k;
        }
        if let Some(seeds) = &self.seeds {
            plan.seeds = seeds.clone();
        } else if self.replications.is_some() || self.base_seed.is_some() {
            plan.seeds = seed_range(self.base_seed.unwrap_or(1), self.replications.unwrap_or(25));
        }

        let env = &self.environment;
        let stations = env.stations.unwrap_or(plan.environment.stations());
        let pack = env.pack.clone().unwrap_or_else(|| plan.environment.pack().clone());
        let kind = env.kind.unwrap_or(match plan.environment {
            EnvironmentSpec::Analytic { .. } => EnvironmentKind::Analytic,
            EnvironmentSpec::PacketSim { .. } => EnvironmentKind::PacketSim,
        });
        plan.environment = match kind {
            EnvironmentKind::Analytic => {
                if env.batch_duration.is_some() || env.toff_spread.is_some() {
                    return Err(config_error(
                        "environment".into(),
                        "batch_duration and toff_spread only apply to kind = \"packet-sim\"",
                    ));
                }
                EnvironmentSpec::Analytic { pack, stations }
            }
            EnvironmentKind::PacketSim => {
                let (batch, spread) = match &plan.environment {
                    EnvironmentSpec::PacketSim {
                        batch_duration,
                        off_time: OffTimeLaw::Uniform { spread },
                        ..
                    } => (*batch_duration, *spread),
                    EnvironmentSpec::Analytic { .. } => (50.0, 0.5),
                };
                EnvironmentSpec::PacketSim {
                    pack,
                    stations,
                    batch_duration: env.batch_duration.unwrap_or(batch),
                    off_time: OffTimeLaw::Uniform {
                        spread: env.toff_spread.unwrap_or(spread),
                    },
                }
            }
        };

        let dyn_ = &self.dynamics;
        if let Some(t) = dyn_.switch_timing {
            plan.switch_timing = t;
        }
        match (&dyn_.events, &dyn_.staircase) {
            (Some(_), Some(_)) => {
                return Err(config_error("dynamics".into(), "give either events or staircase, not both"));
            }
            (Some(events), None) => plan.dynamics = events.clone(),
            (None, Some(stairs)) => {
                let Some(&first) = stairs.path.first() else {
                    return Err(config_error("dynamics.staircase.path".into(), "must not be empty"));
                };
                if env.stations.is_some_and(|n| n != first) {
                    return Err(config_error(
                        "dynamics.staircase.path".into(),
                        "first entry must match environment.stations",
                    ));
                }
                plan.environment.set_stations(first);
                plan.dynamics = staircase(&stairs.path, stairs.every);
            }
            (None, None) => {}
        }

        let l = &self.learner;
        let interval = DecisionInterval::new(
            l.lower.unwrap_or(plan.learner.interval.lower()),
            l.upper.unwrap_or(plan.learner.interval.upper()),
        )?;
        let constant = l.constant.clone().or_else(|| {
            (scenario == Scenario::BoundCheck).then(ConstantSection::default)
        });
        plan.learner.interval = interval;
        if let Some(c) = constant {
            if l.omega.is_some() || l.exponent.is_some() || l.step_scale.is_some() || l.step_exponent.is_some() {
                return Err(config_error(
                    "learner.constant".into(),
                    "constant mode excludes omega, exponent, step_scale and step_exponent",
                ));
            }
            let (eta, delta) = match (c.eta, c.delta) {
                (Some(eta), Some(delta)) => (eta, delta),
                (eta, delta) => {
                    let tuned = plan.corollary_tuning()?;
                    (eta.unwrap_or(tuned.eta), delta.unwrap_or(tuned.delta))
                }
            };
            plan.learner = LearnerConfig::constant(interval, eta, delta);
        } else {
            let ex = plan.learner.exploration;
            let st = plan.learner.step_size;
            plan.learner.exploration =
                ExplorationSchedule::power(l.omega.unwrap_or(ex.omega), l.exponent.unwrap_or(ex.exponent));
            plan.learner.step_size =
                StepSizeSchedule::power(l.step_scale.unwrap_or(st.scale), l.step_exponent.unwrap_or(st.exponent));
        }
        if let Some(t) = l.truncation {
            plan.learner.truncation = t;
        }
        plan.learner.initial = l.initial;

        if let Some(t) = self.output.convergence_tolerance {
            plan.convergence_tolerance = t;
        }
        if let Some(t) = self.output.throughput_tolerance {
            plan.throughput_tolerance = t;
        }
        plan.validate()?;
        Ok(plan)
    }

    /// Cross product of the `[sweep]` lists; an empty list keeps the
    /// configured value.
    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>> {
        let base = self.plan()?;
        let ex = base.learner.exploration;
        let omegas = if self.sweep.omega.is_empty() { vec![ex.omega] } else { self.sweep.omega.clone() };
        let exps = if self.sweep.exponent.is_empty() { vec![ex.exponent] } else { self.sweep.exponent.clone() };
        let stations = if self.sweep.stations.is_empty() {
            vec![base.environment.stations()]
        } else {
            self.sweep.stations.clone()
        };
        let mut out = Vec::new();
        for &n in &stations {
            for &omega in &omegas {
                for &p in &exps {
                    let mut cfg = self.clone();
                    cfg.sweep = SweepSection::default();
                    cfg.learner.omega = Some(omega);
                    cfg.learner.exponent = Some(p);
                    cfg.environment.stations = Some(n);
                    out.push(SweepPoint {
                        label: format!("n{n}_omega{omega}_p{p}"),
                        plan: cfg.plan()?,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Parses a `SEMP_SEEDS` style list.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u64>()
                .map_err(|e| config_error(SEEDS_ENV.into(), format!("`{s}`: {e}")))
        })
        .collect()
}

/// Applies the seed override from the environment, if set.
pub fn apply_seed_override(plan: &mut ExperimentPlan) -> Result<()> {
    if let Ok(text) = std::env::var(SEEDS_ENV) {
        plan.seeds = parse_seed_list(&text)?;
        plan.validate()?;
    }
    Ok(())
}

/// SHA-256 over the canonical JSON of the resolved plan.
pub fn plan_hash(plan: &ExperimentPlan) -> String {
    let json = serde_json::to_vec(plan).expect("plans serialise");
    let digest = Sha256::digest(&json);
    let mut hex = String::with_capacity(64);
    for b in digest.iter() {
        write!(hex, "{b:02x}").unwrap();
    }
    hex
}

const KEY_DOCS: &[(&str, &str)] = &[
    ("scenario", "omega-sweep | schedule-sweep | slow-dynamics | fast-dynamics | noisy-sim | bound-check; picks the preset defaults"),
    ("iterations", "outer iterations k_max (two rounds each)"),
    ("replications", "number of seeds base_seed, base_seed+1, ..."),
    ("base_seed", "first seed"),
    ("seeds", "explicit seed list, overrides replications/base_seed; SEMP_SEEDS overrides this"),
    ("learner.omega", "exploration scale: delta_k = omega / (k+1)^exponent"),
    ("learner.exponent", "exploration decay exponent; 0 keeps delta constant"),
    ("learner.step_scale", "step size scale: eta_k = step_scale / (k+1)^step_exponent"),
    ("learner.step_exponent", "step size decay exponent"),
    ("learner.lower", "lower end of K in ztilde = ln(Toff - c1)"),
    ("learner.upper", "upper end of K"),
    ("learner.initial", "starting center y0; the midpoint of K when unset"),
    ("learner.truncation", "{ mode = \"off\" } | { mode = \"lipschitz\", bound, factor } | { mode = \"relative\", factor }"),
    ("learner.constant", "{ eta, delta } for constant-parameter mode; unset values are tuned to the adversary"),
    ("environment.kind", "analytic | packet-sim"),
    ("environment.stations", "WiFi station count n at iteration 0"),
    ("environment.batch_duration", "simulated seconds per cost evaluation (packet-sim)"),
    ("environment.toff_spread", "off periods are uniform on [1-s, 1+s] times their mean (packet-sim)"),
    ("environment.pack", "channel constants; see [environment.pack] below"),
    ("environment.pack.on_time", "LTE on period T_on, s"),
    ("environment.pack.lte_rate", "LTE rate r, bit/s"),
    ("environment.pack.subframe", "LTE subframe gamma, s"),
    ("environment.pack.tau", "WiFi per-slot transmission probability"),
    ("environment.pack.slot_time", "WiFi idle slot sigma, s"),
    ("environment.pack.phy_rate", "WiFi PHY rate, bit/s"),
    ("environment.pack.mac_overhead", "per-frame overhead, s"),
    ("environment.pack.packets_per_frame", "aggregated packets per frame"),
    ("environment.pack.packet_bytes", "bytes per packet"),
    ("environment.pack.collision_prob", "override for p_txA = 1-(1-tau)^n"),
    ("dynamics.switch_timing", "mid-pair (between the two queries) | pair-boundary"),
    ("dynamics.events", "[{ iteration, stations }, ...], iterations strictly increasing"),
    ("dynamics.staircase", "{ path = [n0, n1, ...], every = k } shorthand for events"),
    ("sweep.omega", "omega values for `sweep`"),
    ("sweep.exponent", "exploration exponents for `sweep`"),
    ("sweep.stations", "station counts for `sweep`"),
    ("output.csv", "trajectory CSV path for `run`"),
    ("output.events", "per-round JSON lines path for `run`"),
    ("output.dir", "output directory for `sweep`"),
    ("output.convergence_tolerance", "Toff error counted as converged, s"),
    ("output.throughput_tolerance", "relative throughput error counted as tracking"),
];

/// Annotated reference document, rendered from the default config.
pub fn schema_reference() -> String {
    let example = RunConfig {
        scenario: Some(Scenario::OmegaSweep),
        iterations: Some(100),
        replications: Some(25),
        base_seed: Some(1),
        seeds: None,
        learner: LearnerSection {
            omega: Some(0.01),
            exponent: Some(0.75),
            step_scale: Some(1.0),
            step_exponent: Some(0.5),
            lower: Some(-6.9),
            upper: Some(0.0),
            initial: None,
            truncation: Some(Truncation::default()),
            constant: None,
        },
        environment: EnvironmentSection {
            kind: Some(EnvironmentKind::Analytic),
            stations: Some(10),
            batch_duration: None,
            toff_spread: None,
            pack: Some(ParameterPack::default()),
        },
        dynamics: DynamicsSection {
            switch_timing: Some(SwitchTiming::MidPair),
            events: None,
            staircase: None,
        },
        sweep: SweepSection::default(),
        output: OutputSection {
            csv: Some("trajectories.csv".into()),
            events: Some("events.jsonl".into()),
            dir: None,
            convergence_tolerance: Some(0.02),
            throughput_tolerance: Some(0.1),
        },
    };
    let value = toml::Table::try_from(&example).expect("reference config serialises");
    let mut out = String::from("# semp run configuration. Every key is optional.\n# Values shown are the defaults of the omega-sweep preset.\n\n");
    render(&mut out, "", &value);
    out.push_str("\n# Keys without a default value:\n");
    for (key, doc) in KEY_DOCS {
        if lookup(&value, key).is_none() {
            writeln!(out, "# {key}: {doc}").unwrap();
        }
    }
    out
}

fn lookup<'a>(table: &'a toml::Table, dotted: &str) -> Option<&'a toml::Value> {
    let mut parts = dotted.split('.');
    let mut cur = table.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

fn doc_for(key: &str) -> Option<&'static str> {
    KEY_DOCS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d)
}

fn render(out: &mut String, prefix: &str, table: &toml::Table) {
    let mut nested = Vec::new();
    for (key, value) in table {
        let full = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match value {
            toml::Value::Table(t) if !full.ends_with("truncation") => nested.push((full, t)),
            _ => {
                if let Some(doc) = doc_for(&full) {
                    writeln!(out, "# {doc}").unwrap();
                }
                writeln!(out, "{key} = {}", inline(value)).unwrap();
            }
        }
    }
    for (full, t) in nested {
        writeln!(out, "\n[{full}]").unwrap();
        render(out, &full, t);
    }
}

fn inline(value: &toml::Value) -> String {
    match value {
        toml::Value::Table(t) => {
            let fields: Vec<String> = t.iter().map(|(k, v)| format!("{k} = {}", inline(v))).collect();
            format!("{{ {} }}", fields.join(", "))
        }
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_omega_preset() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.plan().unwrap(), ExperimentPlan::preset(Scenario::OmegaSweep).unwrap());
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let err = RunConfig::parse("[learner]\nomgea = 0.1\n").unwrap_err();
        match err {
            Error::Config { path, message } => {
                assert_eq!(path, "learner.omgea");
                assert!(message.contains("omgea"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let err = RunConfig::parse("[environment.pack]\ntau = \"x\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "environment.pack.tau"), "{err:?}");
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::parse(
            r#"
            scenario = "noisy-sim"
            iterations = 7
            replications = 3
            base_seed = 40
            [learner]
            omega = 0.5
            truncation = { mode = "off" }
            [environment]
            stations = 4
            batch_duration = 2.0
            [dynamics]
            staircase = { path = [4, 2], every = 3 }
            "#,
        )
        .unwrap();
        let plan = cfg.plan().unwrap();
        assert_eq!(plan.iterations, 7);
        assert_eq!(plan.seeds, vec![40, 41, 42]);
        assert_eq!(plan.learner.exploration.omega, 0.5);
        assert_eq!(plan.learner.exploration.exponent, 0.75);
        assert_eq!(plan.learner.truncation, Truncation::Off);
        assert_eq!(plan.dynamics, vec![StationChange { iteration: 3, stations: 2 }]);
        assert!(matches!(
            plan.environment,
            EnvironmentSpec::PacketSim { stations: 4, batch_duration, .. } if batch_duration == 2.0
        ));
    }

    #[test]
    fn round_trip_keeps_the_plan_hash() {
        let text = r#"
            scenario = "slow-dynamics"
            seeds = [5, 9]
            [learner]
            constant = { eta = 0.05 }
            [environment.pack]
            tau = 0.05
            [output]
            csv = "x.csv"
        "#;
        let cfg = RunConfig::parse(text).unwrap();
        let again = RunConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(plan_hash(&cfg.plan().unwrap()), plan_hash(&again.plan().unwrap()));
        assert_eq!(plan_hash(&cfg.plan().unwrap()).len(), 64);
    }

    #[test]
    fn conflicting_sections_are_rejected() {
        assert!(RunConfig::parse("[environment]\nbatch_duration = 3.0\n").unwrap().plan().is_err());
        let both = "[dynamics]\nevents = [{ iteration = 2, stations = 3 }]\nstaircase = { path = [10, 3], every = 2 }\n";
        assert!(RunConfig::parse(both).unwrap().plan().is_err());
        let mixed = "[learner]\nomega = 0.1\nconstant = { eta = 0.1, delta = 0.1 }\n";
        assert!(RunConfig::parse(mixed).unwrap().plan().is_err());
        assert!(RunConfig::parse("seeds = [1, 1]\n").unwrap().plan().is_err());
    }

    #[test]
    fn sweep_is_a_cross_product() {
        let cfg = RunConfig::parse("[sweep]\nomega = [0.01, 0.1, 1.0]\nexponent = [0.75, 0.5]\n").unwrap();
        let points = cfg.sweep_points().unwrap();
        assert_eq!(points.len(), 6);
        let labels: std::collections::BTreeSet<_> = points.iter().map(|p| p.label.clone()).collect();
        assert_eq!(labels.len(), 6);
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seed_list("1, 2 3,,4").unwrap(), vec![1, 2, 3, 4]);
        assert!(parse_seed_list("1,x").is_err());
    }

    #[test]
    fn reference_parses_back() {
        let doc = schema_reference();
        let cfg = RunConfig::parse(&doc).unwrap();
        assert_eq!(cfg.plan().unwrap(), ExperimentPlan::preset(Scenario::OmegaSweep).unwrap());
        for (key, _) in KEY_DOCS {
            assert!(doc.contains(key.rsplit('.').next().unwrap()), "{key}");
        }
    }
}
