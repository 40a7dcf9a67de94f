use std::collections::VecDeque;

use super::Coords;
use crate::error::TopologyError;

/// A torsion: rotation about the bond `a -> b`. `moving` holds the atoms
/// strictly beyond `b` (on the side away from `a`); both axis atoms stay fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotatableBond {
    pub a: u32,
    pub b: u32,
    pub moving: Vec<u32>,
}

/// Unchecked ligand description. Run [`validate_topology`] on it for a full
/// report, or [`LigandTopology::new`] to build a checked topology.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LigandDraft {
    pub coords: Coords,
    pub type_index: Vec<usize>,
    pub charge: Vec<f32>,
    pub bonds: Vec<(usize, usize)>,
    /// Rotatable bonds as (parent-side atom, child-side atom), root outward.
    pub rotatable: Vec<(usize, usize)>,
}

/// Immutable, validated ligand.
#[derive(Debug, Clone, PartialEq)]
pub struct LigandTopology {
    coords0: Coords,
    centroid0: [f32; 3],
    type_index: Vec<usize>,
    charge: Vec<f32>,
    bonds: Vec<(u32, u32)>,
    rotatable: Vec<RotatableBond>,
}

impl LigandTopology {
    pub fn new(draft: LigandDraft) -> Result<Self, TopologyError> {
        let n = draft.coords.len();
        if n == 0 {
            return Err(TopologyError::Empty);
        }
        if draft.type_index.len() != n || draft.charge.len() != n {
            return Err(TopologyError::LengthMismatch(format!(
                "{} coordinates, {} types, {} charges",
                n,
                draft.type_index.len(),
                draft.charge.len()
            )));
        }
        for i in 0..n {
            let p = draft.coords.get(i);
            if !p.iter().all(|v| v.is_finite()) || !draft.charge[i].is_finite() {
                return Err(TopologyError::NonFinite { atom: i });
            }
        }
        for &(a, b) in &draft.bonds {
            if a >= n || b >= n || a == b {
                return Err(TopologyError::BondOutOfRange { a, b, n_atoms: n });
            }
        }
        let adj = adjacency(n, &draft.bonds);
        let components = count_components(&adj);
        if components != 1 {
            return Err(TopologyError::Disconnected { components });
        }
        let masks = build_fragment_masks(n, &draft.bonds, &draft.rotatable)?;
        let rotatable = draft
            .rotatable
            .iter()
            .zip(masks)
            .map(|(&(a, b), moving)| RotatableBond { a: a as u32, b: b as u32, moving })
            .collect();
        let centroid0 = draft.coords.centroid();
        Ok(Self {
            coords0: draft.coords,
            centroid0,
            type_index: draft.type_index,
            charge: draft.charge,
            bonds: draft.bonds.iter().map(|&(a, b)| (a as u32, b as u32)).collect(),
            rotatable,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.coords0.len()
    }

    pub fn n_torsions(&self) -> usize {
        self.rotatable.len()
    }

    /// Genes per genotype: 3 translation + 4 rotation + one per torsion.
    pub fn n_genes(&self) -> usize {
        7 + self.rotatable.len()
    }

    pub fn coords0(&self) -> &Coords {
        &self.coords0
    }

    pub fn centroid0(&self) -> [f32; 3] {
        self.centroid0
    }

    pub fn type_index(&self) -> &[usize] {
        &self.type_index
    }

    pub fn charge(&self) -> &[f32] {
        &self.charge
    }

    pub fn bonds(&self) -> &[(u32, u32)] {
        &self.bonds
    }

    pub fn rotatable(&self) -> &[RotatableBond] {
        &self.rotatable
    }

    pub fn to_draft(&self) -> LigandDraft {
        LigandDraft {
            coords: self.coords0.clone(),
            type_index: self.type_index.clone(),
            charge: self.charge.clone(),
            bonds: self.bonds.iter().map(|&(a, b)| (a as usize, b as usize)).collect(),
            rotatable: self.rotatable.iter().map(|r| (r.a as usize, r.b as usize)).collect(),
        }
    }
}

/// Adjacency lists; out-of-range bonds are skipped.
pub fn adjacency(n_atoms: usize, bonds: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n_atoms];
    for &(a, b) in bonds {
        if a < n_atoms && b < n_atoms && a != b {
            if !adj[a].contains(&b) {
                adj[a].push(b);
            }
            if !adj[b].contains(&a) {
                adj[b].push(a);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

fn count_components(adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..adj.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    components
}

/// For each rotatable bond `(a, b)`, the sorted atoms reachable from `b` once
/// the bond is cut, excluding `b` itself.
pub fn build_fragment_masks(
    n_atoms: usize,
    bonds: &[(usize, usize)],
    rotatable: &[(usize, usize)],
) -> Result<Vec<Vec<u32>>, TopologyError> {
    let adj = adjacency(n_atoms, bonds);
    let mut masks = Vec::with_capacity(rotatable.len());
    let mut seen = vec![false; n_atoms];
    let mut queue = VecDeque::new();
    for &(a, b) in rotatable {
        if a >= n_atoms || b >= n_atoms || !adj[a].contains(&b) {
            return Err(TopologyError::RotatableNotABond { a, b });
        }
        seen.iter_mut().for_each(|s| *s = false);
        seen[b] = true;
        queue.push_back(b);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if u == b && v == a {
                    continue;
                }
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if seen[a] {
            return Err(TopologyError::RingBond { a, b });
        }
        masks.push((0..n_atoms).filter(|&i| seen[i] && i != b).map(|i| i as u32).collect());
    }
    Ok(masks)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TopologyIssue {
    Empty,
    LengthMismatch(String),
    BondIndex { bond: usize, a: usize, b: usize },
    NonFiniteCoordinate { atom: usize },
    Disconnected { components: usize },
    RotatableNotABond { a: usize, b: usize },
    NonSplittingRotatable { a: usize, b: usize },
    UnknownType { atom: usize, type_index: usize },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<TopologyIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Report every structural problem in a draft. `n_types`, when given, also
/// checks type indices against a parameter table of that size.
pub fn validate_topology(draft: &LigandDraft, n_types: Option<usize>) -> ValidationReport {
    let mut issues = Vec::new();
    let n = draft.coords.len();
    if n == 0 {
        issues.push(TopologyIssue::Empty);
        return ValidationReport { issues };
    }
    if draft.type_index.len() != n || draft.charge.len() != n {
        issues.push(TopologyIssue::LengthMismatch(format!(
            "{} coordinates, {} types, {} charges",
            n,
            draft.type_index.len(),
            draft.charge.len()
        )));
    }
    for i in 0..n {
        if !draft.coords.get(i).iter().all(|v| v.is_finite()) {
            issues.push(TopologyIssue::NonFiniteCoordinate { atom: i });
        }
    }
    if let Some(nt) = n_types {
        for (atom, &t) in draft.type_index.iter().enumerate() {
            if t >= nt {
                issues.push(TopologyIssue::UnknownType { atom, type_index: t });
            }
        }
    }
    for (bond, &(a, b)) in draft.bonds.iter().enumerate() {
        if a >= n || b >= n || a == b {
            issues.push(TopologyIssue::BondIndex { bond, a, b });
        }
    }
    let adj = adjacency(n, &draft.bonds);
    let components = count_components(&adj);
    if components > 1 {
        issues.push(TopologyIssue::Disconnected { components });
    }
    for &(a, b) in &draft.rotatable {
        match build_fragment_masks(n, &draft.bonds, &[(a, b)]) {
            Ok(_) => {}
            Err(TopologyError::RingBond { .. }) => issues.push(TopologyIssue::NonSplittingRotatable { a, b }),
            Err(_) => issues.push(TopologyIssue::RotatableNotABond { a, b }),
        }
    }
    ValidationReport { issues }
}
