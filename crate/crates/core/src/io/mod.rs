//! Input formats and ligand sources.

mod params;
pub mod pdbqt;
pub mod synthetic;

use std::path::Path;
use std::sync::Arc;

pub use pdbqt::{
    parse_ligand_pdbqt, parse_protein_pdbqt, write_ligand_pdbqt, write_protein_pdbqt, PdbqtLigand, PdbqtOptions,
};
pub use synthetic::{generate_synthetic_ligand, generate_synthetic_protein};

use crate::error::{Error, Result};
use crate::model::{LigandTopology, ParameterTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    File,
    Synthetic,
    Replicated,
}

/// Named ligands to screen. Entries share topology storage where possible.
#[derive(Debug, Clone)]
pub struct LigandBatch {
    entries: Vec<(String, Arc<LigandTopology>)>,
    provenance: Provenance,
}

impl LigandBatch {
    pub fn new(entries: Vec<(String, Arc<LigandTopology>)>, provenance: Provenance) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("ligand batch is empty".into()));
        }
        let mut names: Vec<&str> = entries.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate ligand name {:?}", w[0])));
        }
        Ok(Self { entries, provenance })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn entries(&self) -> &[(String, Arc<LigandTopology>)] {
        &self.entries
    }

    pub fn name(&self, i: usize) -> &str {
        &self.entries[i].0
    }

    pub fn ligand(&self, i: usize) -> &LigandTopology {
        &self.entries[i].1
    }
}

/// `n` copies of one ligand sharing a single topology allocation.
pub fn make_replicated_batch(name: &str, ligand: Arc<LigandTopology>, n: usize) -> Result<LigandBatch> {
    if n == 0 {
        return Err(Error::Config("replication count must be at least 1".into()));
    }
    let entries = (0..n).map(|i| (format!("{name}_{i}"), Arc::clone(&ligand))).collect();
    LigandBatch::new(entries, Provenance::Replicated)
}

/// Synthetic batch: ligand `i` is generated from `seed + i`.
pub fn make_synthetic_batch(
    seed: u64,
    count: usize,
    n_atoms: usize,
    n_torsions: usize,
    table: &ParameterTable,
) -> Result<LigandBatch> {
    let entries = (0..count)
        .map(|i| {
            let lig = generate_synthetic_ligand(seed.wrapping_add(i as u64), n_atoms, n_torsions, table)?;
            Ok((format!("synthetic_{i}"), Arc::new(lig)))
        })
        .collect::<Result<Vec<_>>>()?;
    LigandBatch::new(entries, Provenance::Synthetic)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

pub fn load_parameter_table(path: Option<&Path>) -> Result<ParameterTable> {
    match path {
        Some(p) => Ok(ParameterTable::parse(&read_text(p)?)?),
        None => Ok(ParameterTable::default_table()),
    }
}

/// Load one `.pdbqt` file, or every `.pdbqt` file of a directory in name order.
pub fn load_ligand_batch(path: &Path, table: &ParameterTable, opts: PdbqtOptions) -> Result<LigandBatch> {
    let mut files = Vec::new();
    if path.is_dir() {
        let rd = std::fs::read_dir(path).map_err(|e| Error::io(format!("listing {}", path.display()), e))?;
        for entry in rd {
            let p = entry.map_err(|e| Error::io(format!("listing {}", path.display()), e))?.path();
            if p.extension().is_some_and(|e| e == "pdbqt") {
                files.push(p);
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }
    let mut entries = Vec::with_capacity(files.len());
    for f in &files {
        let lig = parse_ligand_pdbqt(&read_text(f)?, table, opts)
            .map_err(|e| Error::Config(format!("{}: {e}", f.display())))?;
        let name = f.file_stem().map_or_else(|| f.display().to_string(), |s| s.to_string_lossy().into_owned());
        entries.push((name, Arc::new(lig.topology)));
    }
    LigandBatch::new(entries, Provenance::File)
}
