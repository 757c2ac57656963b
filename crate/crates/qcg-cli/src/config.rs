//! Experiment configuration: generator specs, grids, output selection.

use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use qcg_core::bayes::Generator;
use qcg_core::linalg::{C64, ComplexMatrix};
use qcg_core::scenarios::{random_density, werner_state};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown generator '{0}', expected ME, MM, RAND or WERNER:<lambda>")]
    UnknownGenerator(String),
    #[error("invalid grid '{0}', expected start:end:count with count >= 2 and end > start")]
    BadGrid(String),
    #[error("samples must be at least 1")]
    NoSamples,
    #[error("Werner parameter {0} out of range: lambda in [-1/3, 1) (lambda = 1 maps to a non-invertible marginal)")]
    WernerParameter(f64),
    #[error(transparent)]
    Scenario(#[from] qcg_core::scenarios::ScenarioError),
    #[error(transparent)]
    Bayes(#[from] qcg_core::bayes::BayesError),
}

/// Which prior state generates the Petz emergent channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorSpec {
    /// Normalized maximally entangled state.
    MaxEntangled,
    /// Maximally mixed state.
    MaxMixed,
    /// Seed-deterministic Hilbert-Schmidt random state.
    Random,
    /// Two-qubit Werner state at the given parameter.
    Werner(f64),
}

impl GeneratorSpec {
    pub fn label(&self) -> String {
        match self {
            GeneratorSpec::MaxEntangled => "ME".into(),
            GeneratorSpec::MaxMixed => "MM".into(),
            GeneratorSpec::Random => "RAND".into(),
            GeneratorSpec::Werner(l) => format!("WERNER:{l}"),
        }
    }

    /// Materialize the generator state. RAND derives its own stream from the
    /// seed so benchmark state sampling stays independent of the generator
    /// choice.
    pub fn build(&self, seed: u64) -> Result<Generator, ConfigError> {
        const RAND_GENERATOR_SALT: u64 = 0x9e3779b97f4a7c15;
        let rho = match self {
            GeneratorSpec::MaxEntangled => {
                let mut m = ComplexMatrix::zeros(4, 4);
                for &(i, j) in &[(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
                    m[(i, j)] = C64::new(0.5, 0.0);
                }
                m
            }
            GeneratorSpec::MaxMixed => ComplexMatrix::identity(4).scale_re(0.25),
            GeneratorSpec::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ RAND_GENERATOR_SALT);
                random_density(4, &mut rng)
            }
            GeneratorSpec::Werner(lambda) => {
                if *lambda >= 1.0 || *lambda < -1.0 / 3.0 {
                    return Err(ConfigError::WernerParameter(*lambda));
                }
                werner_state(*lambda)?
            }
        };
        Ok(Generator::new(rho, self.label())?)
    }

    pub fn werner_lambda(&self) -> Option<f64> {
        match self {
            GeneratorSpec::Werner(l) => Some(*l),
            _ => None,
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "me" => Ok(GeneratorSpec::MaxEntangled),
            "mm" => Ok(GeneratorSpec::MaxMixed),
            "rand" => Ok(GeneratorSpec::Random),
            _ => {
                if let Some(rest) = lower.strip_prefix("werner:") {
                    let lambda: f64 = rest
                        .parse()
                        .map_err(|_| ConfigError::UnknownGenerator(s.to_string()))?;
                    Ok(GeneratorSpec::Werner(lambda))
                } else {
                    Err(ConfigError::UnknownGenerator(s.to_string()))
                }
            }
        }
    }
}

/// Strictly increasing sampling grid parsed from `start:end:count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
}

impl Grid {
    pub fn linspace(start: f64, end: f64, count: usize) -> Result<Self, ConfigError> {
        if count < 2 || end <= start || !(start.is_finite() && end.is_finite()) {
            return Err(ConfigError::BadGrid(format!("{start}:{end}:{count}")));
        }
        let step = (end - start) / (count - 1) as f64;
        Ok(Self { points: (0..count).map(|i| start + step * i as f64).collect() })
    }
}

impl FromStr for Grid {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(ConfigError::BadGrid(s.to_string()));
        }
        let start: f64 = parts[0].parse().map_err(|_| ConfigError::BadGrid(s.to_string()))?;
        let end: f64 = parts[1].parse().map_err(|_| ConfigError::BadGrid(s.to_string()))?;
        let count: usize = parts[2].parse().map_err(|_| ConfigError::BadGrid(s.to_string()))?;
        Grid::linspace(start, end, count)
    }
}

/// Output format of the emitted artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Shared configuration of the benchmark-style experiments.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario_id: u8,
    pub generator: GeneratorSpec,
    pub samples: usize,
    pub t: f64,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.samples == 0 {
            return Err(ConfigError::NoSamples);
        }
        qcg_core::scenarios::Scenario::new(self.scenario_id)?;
        Ok(())
    }
}
