use super::Coords;
use crate::error::TopologyError;

/// Rigid receptor.
#[derive(Debug, Clone, PartialEq)]
pub struct Protein {
    coords: Coords,
    type_index: Vec<usize>,
    charge: Vec<f32>,
}

impl Protein {
    pub fn new(coords: Coords, type_index: Vec<usize>, charge: Vec<f32>) -> Result<Self, TopologyError> {
        if coords.is_empty() {
            return Err(TopologyError::Empty);
        }
        if type_index.len() != coords.len() || charge.len() != coords.len() {
            return Err(TopologyError::LengthMismatch(format!(
                "{} coordinates, {} types, {} charges",
                coords.len(),
                type_index.len(),
                charge.len()
            )));
        }
        if let Some(atom) = (0..coords.len()).find(|&i| !coords.get(i).iter().all(|v| v.is_finite())) {
            return Err(TopologyError::NonFinite { atom });
        }
        Ok(Self { coords, type_index, charge })
    }

    pub fn n_atoms(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn type_index(&self) -> &[usize] {
        &self.type_index
    }

    pub fn charge(&self) -> &[f32] {
        &self.charge
    }
}
