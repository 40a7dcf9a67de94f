use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config_err;
use crate::error::Result;
use crate::ga::GaConfig;
use crate::grid::DEFAULT_SPACING;
use crate::scoring::BackendKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum LigandSource {
    Synthetic {
        #[serde(default = "one")]
        count: usize,
        atoms: usize,
        #[serde(default)]
        torsions: usize,
        #[serde(default)]
        seed: u64,
    },
    File {
        path: PathBuf,
    },
    /// `count` copies of one ligand, read from `path` or synthesized.
    Replicated {
        count: usize,
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default = "default_atoms")]
        atoms: usize,
        #[serde(default)]
        torsions: usize,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReceptorSource {
    Synthetic {
        #[serde(default = "default_receptor_atoms")]
        atoms: usize,
        #[serde(default = "default_radius")]
        radius: f32,
        #[serde(default = "default_pocket")]
        pocket_radius: f32,
        #[serde(default)]
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    pub center: [f32; 3],
    pub points: [usize; 3],
    pub spacing: f32,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self { center: [0.0; 3], points: [56, 56, 56], spacing: DEFAULT_SPACING }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchScenario {
    pub name: String,
    pub ligands: LigandSource,
    #[serde(default = "default_receptor")]
    pub receptor: ReceptorSource,
    #[serde(default)]
    pub grid: GridSettings,
    #[serde(default = "default_backends")]
    pub backends: Vec<BackendKind>,
    #[serde(default = "default_threads")]
    pub threads: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_discard")]
    pub warmup_discard: usize,
    #[serde(default)]
    pub pin: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ga: GaConfig,
}

fn one() -> usize {
    1
}
fn default_atoms() -> usize {
    40
}
fn default_receptor_atoms() -> usize {
    800
}
fn default_radius() -> f32 {
    16.0
}
fn default_pocket() -> f32 {
    8.0
}
fn default_receptor() -> ReceptorSource {
    ReceptorSource::Synthetic {
        atoms: default_receptor_atoms(),
        radius: default_radius(),
        pocket_radius: default_pocket(),
        seed: 0,
    }
}
fn default_backends() -> Vec<BackendKind> {
    BackendKind::ALL.to_vec()
}
fn default_threads() -> Vec<usize> {
    vec![1]
}
fn default_repetitions() -> usize {
    10
}
fn default_discard() -> usize {
    3
}

impl BenchScenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| config_err(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions <= self.warmup_discard {
            return Err(config_err(format!(
                "repetitions ({}) must exceed warmup_discard ({})",
                self.repetitions, self.warmup_discard
            )));
        }
        if self.backends.is_empty() || self.threads.is_empty() {
            return Err(config_err("scenario needs at least one backend and one thread count"));
        }
        if self.threads.contains(&0) {
            return Err(config_err("thread counts must be at least 1"));
        }
        self.ga.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let s = BenchScenario::from_toml(
            "name = \"x\"\n[ligands]\nsource = \"synthetic\"\natoms = 12\n[ga]\ngenerations = 5\n",
        )
        .unwrap();
        assert_eq!(s.repetitions, 10);
        assert_eq!(s.warmup_discard, 3);
        assert_eq!(s.backends, BackendKind::ALL.to_vec());
        assert_eq!(s.ga.generations, 5);
        assert_eq!(s.ga.population_size, 100);
        assert_eq!(s.ligands, LigandSource::Synthetic { count: 1, atoms: 12, torsions: 0, seed: 0 });
    }

    #[test]
    fn rejects_bad_protocol() {
        let text = "name = \"x\"\nrepetitions = 3\nwarmup_discard = 3\n[ligands]\nsource = \"file\"\npath = \"a.pdbqt\"\n";
        assert!(BenchScenario::from_toml(text).is_err());
        assert!(BenchScenario::from_toml("name = \"x\"\n[ligands]\nsource = \"nope\"\n").is_err());
        assert!(BenchScenario::from_toml("name = \"x\"\nbogus = 1\n[ligands]\nsource = \"file\"\npath = \"a\"\n").is_err());
    }
}
