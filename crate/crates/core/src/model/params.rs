use std::collections::HashMap;

use crate::error::ParseError;

/// Hydrogen-bonding role of an atom type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HbondRole {
    #[default]
    None,
    /// Polar hydrogen that donates.
    Donor,
    Acceptor,
}

impl HbondRole {
    pub fn flag(self) -> &'static str {
        match self {
            HbondRole::None => "-",
            HbondRole::Donor => "D",
            HbondRole::Acceptor => "A",
        }
    }

    pub fn from_flag(s: &str) -> Option<Self> {
        match s {
            "-" | "0" | "N" => Some(HbondRole::None),
            "D" | "d" => Some(HbondRole::Donor),
            "A" | "a" => Some(HbondRole::Acceptor),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomParams {
    pub label: String,
    /// Equilibrium radius Rii, Å.
    pub r_eq: f32,
    /// Well depth, kcal/mol.
    pub eps: f32,
    /// Atomic volume, Å³.
    pub volume: f32,
    /// Atomic solvation parameter, kcal/(mol·Å³).
    pub solpar: f32,
    pub hbond: HbondRole,
}

impl AtomParams {
    pub fn is_hbond_donor(&self) -> bool {
        self.hbond == HbondRole::Donor
    }

    pub fn is_hbond_acceptor(&self) -> bool {
        self.hbond == HbondRole::Acceptor
    }
}

/// Repulsive and attractive coefficients of a pair potential, plus whether
/// the pair uses the 12-10 hydrogen-bond form instead of 12-6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoeffs {
    pub r_eq: f64,
    pub eps: f64,
    pub hbond: bool,
}

impl PairCoeffs {
    /// A in A/r¹² (12-6) or C in C/r¹² (12-10).
    pub fn repulsive(&self) -> f64 {
        let k = if self.hbond { 5.0 } else { 1.0 };
        k * self.eps * self.r_eq.powi(12)
    }

    /// B in B/r⁶ (12-6) or D in D/r¹⁰ (12-10).
    pub fn attractive(&self) -> f64 {
        if self.hbond {
            6.0 * self.eps * self.r_eq.powi(10)
        } else {
            2.0 * self.eps * self.r_eq.powi(6)
        }
    }
}

/// Mixing rules: arithmetic mean radius, geometric mean well depth; a pair is
/// hydrogen-bonding when one side is a donor hydrogen and the other an acceptor.
pub fn combine(a: &AtomParams, b: &AtomParams) -> PairCoeffs {
    let hbond = (a.is_hbond_donor() && b.is_hbond_acceptor()) || (a.is_hbond_acceptor() && b.is_hbond_donor());
    PairCoeffs {
        r_eq: (a.r_eq as f64 + b.r_eq as f64) / 2.0,
        eps: (a.eps as f64 * b.eps as f64).sqrt(),
        hbond,
    }
}

/// Ordered atom-type parameter table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterTable {
    entries: Vec<AtomParams>,
    by_label: HashMap<String, usize>,
}

/// Shipped default table (AutoDock4-style types).
pub const DEFAULT_PARAMS: &str = include_str!("../../data/default_params.dat");

impl ParameterTable {
    pub fn new(entries: Vec<AtomParams>) -> Result<Self, ParseError> {
        let mut by_label = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if !(e.r_eq > 0.0) {
                return Err(ParseError::Other(format!("type {:?}: r_eq must be positive, got {}", e.label, e.r_eq)));
            }
            if !(e.eps >= 0.0) || !(e.volume >= 0.0) || !e.solpar.is_finite() {
                return Err(ParseError::Other(format!("type {:?}: eps and volume must be non-negative", e.label)));
            }
            if by_label.insert(e.label.clone(), i).is_some() {
                return Err(ParseError::Other(format!("duplicate type label {:?}", e.label)));
            }
        }
        Ok(Self { entries, by_label })
    }

    pub fn default_table() -> Self {
        Self::parse(DEFAULT_PARAMS).expect("shipped parameter table is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&AtomParams> {
        self.entries.get(index)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.by_label.get(label).copied()
    }

    pub fn by_label(&self, label: &str) -> Option<&AtomParams> {
        self.index_of(label).map(|i| &self.entries[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &AtomParams> {
        self.entries.iter()
    }
}

impl std::ops::Index<usize> for ParameterTable {
    type Output = AtomParams;

    fn index(&self, index: usize) -> &AtomParams {
        &self.entries[index]
    }
}
