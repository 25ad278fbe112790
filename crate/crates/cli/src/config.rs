//! Experiment configuration: one JSON document per run. Sections are
//! optional at parse time; `validate` checks that every section the chosen
//! experiment needs is present and internally coherent before any
//! computation starts.

use std::path::PathBuf;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use stable_bayes::inference::{Proposal, Regulariser};
use stable_bayes::quasi_banach::{BasisFamily, BasisSpec};
use stable_bayes::series_prior::{ExpansionSpec, SequenceSpec};
use stable_bayes::wellposedness::StudyEngine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SampleStable,
    SamplePrior,
    Posterior,
    Hellinger,
    LipschitzScan,
    Invariance,
    Map,
    Mcmc,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SampleStable => "sample-stable",
            ExperimentKind::SamplePrior => "sample-prior",
            ExperimentKind::Posterior => "posterior",
            ExperimentKind::Hellinger => "hellinger",
            ExperimentKind::LipschitzScan => "lipschitz-scan",
            ExperimentKind::Invariance => "invariance",
            ExperimentKind::Map => "map",
            ExperimentKind::Mcmc => "mcmc",
        }
    }
}

/// `q` exponent that admits the JSON string `"inf"` alongside plain
/// numbers, since JSON has no infinity literal.
fn serialize_q<S: Serializer>(q: &f64, s: S) -> Result<S::Ok, S::Error> {
    if q.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*q)
    }
}

fn deserialize_q<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Number(x) => Ok(x),
        Raw::Text(s) if s == "inf" => Ok(f64::INFINITY),
        Raw::Text(s) => Err(D::Error::custom(format!(
            "q must be a number or \"inf\", got \"{s}\""
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub gammas: SequenceSpec,
    pub deltas: SequenceSpec,
    pub basis: BasisFamily,
    pub grid_size: usize,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(serialize_with = "serialize_q", deserialize_with = "deserialize_q")]
    pub q: f64,
}

impl PriorConfig {
    pub fn build(&self) -> stable_bayes::Result<ExpansionSpec> {
        let basis = BasisSpec::new(self.basis, self.grid_size)?;
        let truncation = self.truncation.unwrap_or_else(|| basis.count());
        ExpansionSpec::new(
            self.alpha,
            vec![self.beta; truncation],
            self.gammas.clone(),
            self.deltas.clone(),
            basis,
            truncation,
            self.q,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub observation_count: usize,
    pub kernel_width: f64,
    pub noise_scale: f64,
    /// Explicit observations; when absent the run observes the built-in
    /// continuum scene through the kernel with seeded noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorConfig {
    #[serde(default)]
    pub zero_potential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub perturbation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub direction: Vec<f64>,
    pub steps: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Cauchy,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EngineConfig {
    Importance {
        draws: usize,
    },
    Chain {
        steps: usize,
        burn_in: usize,
        rw_scale: f64,
        #[serde(default = "default_replicates")]
        replicates: usize,
    },
}

fn default_replicates() -> usize {
    1
}

impl EngineConfig {
    pub fn build(self) -> StudyEngine {
        match self {
            EngineConfig::Importance { draws } => StudyEngine::Importance { draws },
            EngineConfig::Chain {
                steps,
                burn_in,
                rw_scale,
                replicates,
            } => StudyEngine::Chain {
                steps,
                burn_in,
                rw_scale,
                replicates,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceConfig {
    pub sizes: Vec<usize>,
    pub eval_points: Vec<f64>,
    pub family: FamilyKind,
    pub engine: EngineConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegulariserConfig {
    None,
    Quadratic { weight: f64 },
    OneNorm { weight: f64 },
}

impl RegulariserConfig {
    pub fn build(self) -> Regulariser {
        match self {
            RegulariserConfig::None => Regulariser::None,
            RegulariserConfig::Quadratic { weight } => Regulariser::Quadratic { weight },
            RegulariserConfig::OneNorm { weight } => Regulariser::OneNorm { weight },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub regulariser: RegulariserConfig,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalConfig {
    IndependencePrior,
    CoefficientRw,
}

impl ProposalConfig {
    pub fn build(self) -> Proposal {
        match self {
            ProposalConfig::IndependencePrior => Proposal::IndependencePrior,
            ProposalConfig::CoefficientRw => Proposal::CoefficientRw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub steps: usize,
    pub burn_in: usize,
    pub proposal: ProposalConfig,
    pub rw_scale: f64,
    pub quantiles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable: Option<StableConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior: Option<PosteriorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance: Option<InvarianceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSection>,
}

impl ExperimentConfig {
    fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, String> {
        section
            .as_ref()
            .ok_or_else(|| format!("the {name} section is required for this experiment"))
    }

    fn require_model_pair(&self) -> Result<(&PriorConfig, &ModelConfig), String> {
        let prior = Self::require(&self.prior, "prior")?;
        let model = Self::require(&self.model, "model")?;
        if model.observation_count > prior.grid_size {
            return Err(format!(
                "observation count {} exceeds grid size {}",
                model.observation_count, prior.grid_size
            ));
        }
        if let Some(data) = &model.data {
            if data.len() != model.observation_count {
                return Err(format!(
                    "explicit data has {} entries but observation_count is {}",
                    data.len(),
                    model.observation_count
                ));
            }
        }
        Ok((prior, model))
    }

    /// Structural validation: required sections exist and cross-section
    /// dimensions agree. Numerical domain checks live in the module
    /// constructors invoked by the run itself.
    pub fn validate(&self) -> Result<(), String> {
        match self.experiment {
            ExperimentKind::SampleStable => {
                Self::require(&self.stable, "stable")?;
                Self::require(&self.sampling, "sampling")?;
            }
            ExperimentKind::SamplePrior => {
                Self::require(&self.prior, "prior")?;
                Self::require(&self.sampling, "sampling")?;
            }
            ExperimentKind::Posterior => {
                self.require_model_pair()?;
                Self::require(&self.sampling, "sampling")?;
            }
            ExperimentKind::Hellinger => {
                let (_, model) = self.require_model_pair()?;
                Self::require(&self.sampling, "sampling")?;
                let metric = Self::require(&self.metric, "metric")?;
                if metric.perturbation.len() != model.observation_count {
                    return Err(format!(
                        "perturbation has {} entries but observation_count is {}",
                        metric.perturbation.len(),
                        model.observation_count
                    ));
                }
            }
            ExperimentKind::LipschitzScan => {
                let (_, model) = self.require_model_pair()?;
                Self::require(&self.sampling, "sampling")?;
                let scan = Self::require(&self.scan, "scan")?;
                if scan.direction.len() != model.observation_count {
                    return Err(format!(
                        "scan direction has {} entries but observation_count is {}",
                        scan.direction.len(),
                        model.observation_count
                    ));
                }
            }
            ExperimentKind::Invariance => {
                let model = Self::require(&self.model, "model")?;
                let invariance = Self::require(&self.invariance, "invariance")?;
                if invariance.sizes.is_empty() {
                    return Err("invariance needs at least one grid size".into());
                }
                if let Some(&n) = invariance
                    .sizes
                    .iter()
                    .find(|&&n| n < model.observation_count)
                {
                    return Err(format!(
                        "grid size {n} is below the observation count {}",
                        model.observation_count
                    ));
                }
            }
            ExperimentKind::Map => {
                self.require_model_pair()?;
                Self::require(&self.map, "map")?;
            }
            ExperimentKind::Mcmc => {
                self.require_model_pair()?;
                Self::require(&self.chain, "chain")?;
            }
        }
        Ok(())
    }
}
