//! The JSON job description and its translation into library objects.

use serde::{Deserialize, Serialize};
use thermoweight_core::sponge::SpongeSpec;
use thermoweight_core::{Caps, FactorChain, Potential, SpecMode, Sft};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Check,
    Pressure,
    Equilibrium,
    Conditional,
    Dimension,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Pressure => "pressure",
            Command::Equilibrium => "equilibrium",
            Command::Conditional => "conditional",
            Command::Dimension => "dimension",
            Command::Oracle => "oracle",
        }
    }
}

/// Potential on the top level; all values are natural logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Constant,
    LocallyConstant { window: usize, table: Vec<f64> },
    MatrixProduct { matrices: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpongeInput {
    pub bases: Vec<u32>,
    pub digits: Vec<Vec<u32>>,
    /// Transition matrix over the digits, in the order given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sft: Option<Vec<Vec<u8>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Depths {
    pub n: usize,
    pub d: usize,
}

impl Default for Depths {
    fn default() -> Self {
        Depths { n: 16, d: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapsInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingInput {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub p: usize,
    /// Inclusive gap range `[first, last]`.
    pub gaps: [usize; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleInput {
    pub candidates: usize,
    pub order: usize,
}

impl Default for OracleInput {
    fn default() -> Self {
        OracleInput { candidates: 100, order: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeInput {
    Weak,
    Exact,
}

/// A whole job. Either a chain (`transitions`, `factor_maps`, `weights`) or
/// a `sponge` describes the tower.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Alphabet sizes per level; a level without a matrix is a full shift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabets: Option<Vec<usize>>,
    /// 0/1 transition matrices per level (`null` for a full shift).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Vec<Option<Vec<Vec<u8>>>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factor_maps: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sponge: Option<SpongeInput>,
    #[serde(default)]
    pub depths: Depths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<CapsInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeInput>,
    /// Seed of the candidate generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleInput>,
    /// Masses of `nu` on `L_n` of the second level, for `conditional`;
    /// uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingInput>,
}

impl JobSpec {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::Invalid(format!("cannot parse job: {e}")))
    }

    pub fn caps(&self) -> Caps {
        let mut caps = Caps::default();
        if let Some(c) = &self.caps {
            if let Some(w) = c.words {
                caps.words = w as u128;
            }
            if let Some(t) = c.table {
                caps.table = t as u128;
            }
            if let Some(a) = c.alphabet {
                caps.alphabet = a;
            }
        }
        caps
    }

    pub fn mode(&self) -> SpecMode {
        match self.mode {
            Some(ModeInput::Exact) => SpecMode::Exact,
            _ => SpecMode::Weak,
        }
    }

    /// The levels of the chain, full shifts where no matrix is given.
    pub fn levels(&self) -> Result<Vec<Sft>, Failure> {
        let mats = self.transitions.clone().unwrap_or_default();
        let sizes = match &self.alphabets {
            Some(a) => a.clone(),
            None => mats
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    m.as_ref()
                        .map(|m| m.len())
                        .ok_or_else(|| Failure::Invalid(format!("level {} has neither an alphabet size nor a matrix", i + 1)))
                })
                .collect::<Result<_, _>>()?,
        };
        if sizes.is_empty() {
            return Err(Failure::Invalid("the job describes no levels".into()));
        }
        if !mats.is_empty() && mats.len() != sizes.len() {
            return Err(Failure::Invalid(format!(
                "{} alphabets but {} transition entries",
                sizes.len(),
                mats.len()
            )));
        }
        let mut levels = Vec::with_capacity(sizes.len());
        for (i, &size) in sizes.iter().enumerate() {
            let level = match mats.get(i).cloned().flatten() {
                Some(rows) => {
                    if rows.len() != size {
                        return Err(Failure::Invalid(format!(
                            "level {}: matrix has {} rows, alphabet has {size} symbols",
                            i + 1,
                            rows.len()
                        )));
                    }
                    Sft::from_rows(&rows).map_err(|e| Failure::Invalid(format!("level {}: {e}", i + 1)))?
                }
                None if size == 0 => return Err(Failure::Invalid(format!("level {} has an empty alphabet", i + 1))),
                None => Sft::full_shift(size),
            };
            if !level.removed_symbols().is_empty() {
                return Err(Failure::Invalid(format!(
                    "level {}: symbols {:?} have no predecessor or no successor",
                    i + 1,
                    level.removed_symbols()
                )));
            }
            levels.push(level);
        }
        Ok(levels)
    }

    pub fn chain(&self) -> Result<FactorChain, Failure> {
        let levels = self.levels()?;
        let k = levels.len();
        let weights = self.weights.clone().unwrap_or_else(|| {
            let mut w = vec![0.0; k];
            w[0] = 1.0;
            w
        });
        if weights.len() != k {
            return Err(Failure::Invalid(format!("{} weights for {k} levels", weights.len())));
        }
        FactorChain::new(levels, self.factor_maps.clone(), weights).map_err(Failure::from)
    }

    pub fn sponge(&self) -> Result<(SpongeSpec, Vec<usize>), Failure> {
        let s = self
            .sponge
            .as_ref()
            .ok_or_else(|| Failure::Invalid("the job has no sponge section".into()))?;
        SpongeSpec::from_unsorted(s.bases.clone(), s.digits.clone(), s.sft.clone()).map_err(Failure::from)
    }

    pub fn potential(&self, host: &Sft) -> Result<Potential, Failure> {
        let p = match self.potential.as_ref().unwrap_or(&PotentialSpec::Constant) {
            PotentialSpec::Constant => Ok(Potential::constant(host.clone())),
            PotentialSpec::LocallyConstant { window, table } => Potential::locally_constant(host.clone(), *window, table.clone()),
            PotentialSpec::MatrixProduct { matrices } => Potential::matrix_product(host.clone(), matrices.clone()),
        };
        p.map_err(Failure::from)
    }
}
