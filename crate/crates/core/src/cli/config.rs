use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BlockPartition, ModeTable};
use crate::measure::DiophantineFamily;
use crate::spectrum::FrequencyModel;
use crate::weights::WeightSpec;

/// Output encoding of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn default_model() -> FrequencyModel {
    FrequencyModel::conv_nls_free(1)
}

/// Shared configuration file with one block per command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "default_model")]
    pub model: FrequencyModel,
    /// Replaces the potential of the model by a random one drawn from the seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_potential: Option<RandomPotential>,
    #[serde(default)]
    pub lattice: LatticeBlock,
    #[serde(default)]
    pub weight: WeightBlock,
    #[serde(default)]
    pub verify: VerifyBlock,
    #[serde(default)]
    pub normalform: NormalFormBlock,
    #[serde(default)]
    pub stability: StabilityBlock,
    #[serde(default)]
    pub measure: MeasureBlock,
    #[serde(default)]
    pub simulate: SimulateBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            format: None,
            out: None,
            model: default_model(),
            random_potential: None,
            lattice: LatticeBlock::default(),
            weight: WeightBlock::default(),
            verify: VerifyBlock::default(),
            normalform: NormalFormBlock::default(),
            stability: StabilityBlock::default(),
            measure: MeasureBlock::default(),
            simulate: SimulateBlock::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPotential {
    /// Potential coefficients are drawn for `|j| <= k_max`.
    pub k_max: u32,
    pub n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeBlock {
    pub k_max: u32,
    pub n_cut: u32,
    pub c: f64,
    pub c0_block: f64,
    pub thickness: f64,
}

impl Default for LatticeBlock {
    fn default() -> Self {
        LatticeBlock {
            k_max: 3,
            n_cut: 3,
            c: 2.0,
            c0_block: 0.0,
            thickness: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightBlock {
    Gevrey { theta: f64, s: f64 },
    LogUltra { q: f64, s: f64 },
}

impl Default for WeightBlock {
    fn default() -> Self {
        WeightBlock::Gevrey { theta: 0.5, s: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyBlock {
    pub a0_samples: usize,
    pub a0_d_max: usize,
    pub a1_k_max: u32,
    pub a3_k_max: u32,
    pub bracket_samples: usize,
    pub homological_samples: usize,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        VerifyBlock {
            a0_samples: 10_000,
            a0_d_max: 6,
            a1_k_max: 64,
            a3_k_max: 16,
            bracket_samples: 20,
            homological_samples: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalFormBlock {
    pub d: usize,
    pub r: f64,
    pub c_p: f64,
    pub c1: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub density: f64,
    pub override_gate: bool,
    pub check_floor: bool,
    pub budget: usize,
}

impl Default for NormalFormBlock {
    fn default() -> Self {
        NormalFormBlock {
            d: 5,
            r: 1e-3,
            c_p: 1e-3,
            c1: 1.0,
            min_degree: 3,
            max_degree: 3,
            density: 1.0,
            override_gate: true,
            check_floor: true,
            budget: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityBlock {
    pub eps: Vec<f64>,
    /// Further amplitudes given as `|ln eps|`.
    pub abs_ln_eps: Vec<f64>,
    pub c1: f64,
    pub c_p: f64,
    pub d_min: usize,
    pub d_max: usize,
}

impl Default for StabilityBlock {
    fn default() -> Self {
        StabilityBlock {
            eps: vec![1e-50, 1e-100, 1e-150, 1e-200, 1e-300],
            abs_ln_eps: Vec::new(),
            c1: 1.0,
            c_p: 1.0,
            d_min: 4,
            d_max: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureBlock {
    pub family: DiophantineFamily,
    pub gammas: Vec<f64>,
    pub n_cut: u32,
    pub d: usize,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

impl Default for MeasureBlock {
    fn default() -> Self {
        MeasureBlock {
            family: DiophantineFamily::FractionalMass {
                m1: 1.0,
                m2: 2.0,
                eta: 0.75,
                dim: 1,
            },
            gammas: vec![1e-3, 1e-2, 1e-1],
            n_cut: 4,
            d: 3,
            samples: 10_000,
            exponent: Some(1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateBlock {
    pub nonlinearity: Vec<f64>,
    pub k: u32,
    pub dt: f64,
    pub t_end: f64,
    pub eps: f64,
    pub real: bool,
    pub record_stride: usize,
    pub n_split: u32,
    /// Amplitudes of an escape table; a single trajectory is written when empty.
    pub escape_eps: Vec<f64>,
    pub escape_factor: f64,
}

impl Default for SimulateBlock {
    fn default() -> Self {
        SimulateBlock {
            nonlinearity: vec![1.0],
            k: 32,
            dt: 0.1,
            t_end: 100.0,
            eps: 1e-2,
            real: true,
            record_stride: 10,
            n_split: 4,
            escape_eps: Vec::new(),
            escape_factor: 2.0,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// The model with its random potential, if any, drawn from `rng`.
    pub fn resolve_model(&self, rng: &mut ChaCha8Rng) -> Result<FrequencyModel> {
        match &self.random_potential {
            None => Ok(self.model.clone()),
            Some(rp) => FrequencyModel::conv_nls_random(self.model.dim(), rp.k_max, rp.n, rng)
                .with_params(self.model.params().clone()),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn table(&self) -> Result<Arc<ModeTable>> {
        Ok(Arc::new(ModeTable::new(self.model.dim(), self.lattice.k_max, self.lattice.c)?))
    }

    pub fn partition(&self) -> Result<BlockPartition> {
        BlockPartition::new(self.lattice.c0_block, self.lattice.thickness)
    }

    /// Weight spec with `s0` computed on `table`.
    pub fn weight_spec(&self, table: &ModeTable) -> Result<WeightSpec> {
        let w = match &self.weight {
            WeightBlock::Gevrey { theta, s } => WeightSpec::gevrey(*theta, *s)?,
            WeightBlock::LogUltra { q, s } => WeightSpec::log_ultra(*q, *s, self.lattice.c)?,
        };
        w.with_s0(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let s = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&s).unwrap(), c);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = RunConfig::from_toml_str("[lattice]\nk_mux = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("k_mux")), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
