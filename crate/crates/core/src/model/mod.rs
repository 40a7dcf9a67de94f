//! Domain types: atom parameters, ligand topology, receptor, and the
//! topology-derived structures used by the kernels (fragment masks and the
//! non-bonded pair list). Per-atom data is kept in structure-of-arrays form.

mod pairlist;
mod params;
mod protein;
mod topology;

pub use pairlist::{build_nonbond_pairlist, bond_separations, NonbondPairList, PairParams, MIN_PAIR_SEPARATION};
pub use params::{combine, AtomParams, HbondRole, PairCoeffs, ParameterTable};
pub use protein::Protein;
pub use topology::{
    adjacency, build_fragment_masks, validate_topology, LigandDraft, LigandTopology, RotatableBond,
    TopologyIssue, ValidationReport,
};

/// Cartesian coordinates in structure-of-arrays layout, in Å.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Coords {
    pub x: Vec<f32>,
    pub y: Vec<f32>,
    pub z: Vec<f32>,
}

impl Coords {
    pub fn zeros(n: usize) -> Self {
        Self { x: vec![0.0; n], y: vec![0.0; n], z: vec![0.0; n] }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { x: Vec::with_capacity(n), y: Vec::with_capacity(n), z: Vec::with_capacity(n) }
    }

    pub fn from_points(points: &[[f32; 3]]) -> Self {
        let mut c = Self::with_capacity(points.len());
        for p in points {
            c.push(*p);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn push(&mut self, p: [f32; 3]) {
        self.x.push(p[0]);
        self.y.push(p[1]);
        self.z.push(p[2]);
    }

    #[inline]
    pub fn get(&self, i: usize) -> [f32; 3] {
        [self.x[i], self.y[i], self.z[i]]
    }

    #[inline]
    pub fn set(&mut self, i: usize, p: [f32; 3]) {
        self.x[i] = p[0];
        self.y[i] = p[1];
        self.z[i] = p[2];
    }

    /// Resize to `n` atoms, reusing the existing allocations.
    pub fn resize(&mut self, n: usize) {
        self.x.resize(n, 0.0);
        self.y.resize(n, 0.0);
        self.z.resize(n, 0.0);
    }

    pub fn copy_from(&mut self, other: &Coords) {
        self.x.clone_from(&other.x);
        self.y.clone_from(&other.y);
        self.z.clone_from(&other.z);
    }

    /// Centroid accumulated in double precision.
    pub fn centroid(&self) -> [f32; 3] {
        let n = self.len().max(1) as f64;
        let sum = |v: &[f32]| v.iter().map(|&a| a as f64).sum::<f64>() / n;
        [sum(&self.x) as f32, sum(&self.y) as f32, sum(&self.z) as f32]
    }

    pub fn all_finite(&self) -> bool {
        self.x.iter().chain(&self.y).chain(&self.z).all(|v| v.is_finite())
    }

    pub fn distance(&self, i: usize, j: usize) -> f32 {
        let (a, b) = (self.get(i), self.get(j));
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }
}
