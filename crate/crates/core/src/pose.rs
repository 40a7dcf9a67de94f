//! Genotype decoding and ligand pose construction.
//!
//! A genotype is `[tx, ty, tz, qw, qx, qy, qz, torsion_0, ..]`: translation of
//! the ligand centroid in Å, four rotation genes normalized to a unit
//! quaternion, and one torsion angle in radians per rotatable bond.

use std::cell::RefCell;

use crate::error::PoseError;
use crate::model::{Coords, LigandTopology};

pub const TRANSLATION_GENES: usize = 3;
pub const ROTATION_GENES: usize = 4;
pub const RIGID_GENES: usize = TRANSLATION_GENES + ROTATION_GENES;

#[derive(Debug, Clone, PartialEq)]
pub struct Genotype {
    pub genes: Vec<f32>,
}

impl Genotype {
    pub fn new(genes: Vec<f32>) -> Self {
        Self { genes }
    }

    /// Identity pose of `topology`: centroid stays put, no rotation, zero torsions.
    pub fn identity(topology: &LigandTopology) -> Self {
        let c = topology.centroid0();
        let mut genes = vec![c[0], c[1], c[2], 1.0, 0.0, 0.0, 0.0];
        genes.resize(topology.n_genes(), 0.0);
        Self { genes }
    }

    pub fn translation(&self) -> [f32; 3] {
        [self.genes[0], self.genes[1], self.genes[2]]
    }

    pub fn torsions(&self) -> &[f32] {
        &self.genes[RIGID_GENES..]
    }
}

/// Unit quaternion, scalar first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f32,
    pub x: f32,
    pub y: f32,
    pub z: f32,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn norm(&self) -> f32 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Row-major rotation matrix.
    pub fn to_matrix(&self) -> [[f32; 3]; 3] {
        let Quaternion { w, x, y, z } = *self;
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedGenotype<'a> {
    pub translation: [f32; 3],
    pub rotation: Quaternion,
    pub torsions: &'a [f32],
}

/// Normalize rotation genes in place (the GA keeps individuals normalized).
pub fn normalize_rotation(genes: &mut [f32]) -> Result<(), PoseError> {
    let q = &mut genes[TRANSLATION_GENES..RIGID_GENES];
    let n = (q.iter().map(|v| (*v as f64) * (*v as f64)).sum::<f64>()).sqrt();
    if n == 0.0 {
        return Err(PoseError::ZeroRotation);
    }
    q.iter_mut().for_each(|v| *v = (*v as f64 / n) as f32);
    Ok(())
}

pub fn decode_genotype<'a>(genes: &'a [f32], topology: &LigandTopology) -> Result<DecodedGenotype<'a>, PoseError> {
    if genes.len() != topology.n_genes() {
        return Err(PoseError::GeneCount { expected: topology.n_genes(), found: genes.len() });
    }
    if let Some(i) = genes.iter().position(|g| !g.is_finite()) {
        return Err(PoseError::NonFinite(i));
    }
    let r = &genes[TRANSLATION_GENES..RIGID_GENES];
    let n = (r.iter().map(|v| (*v as f64) * (*v as f64)).sum::<f64>()).sqrt();
    if n == 0.0 {
        return Err(PoseError::ZeroRotation);
    }
    let q = |k: usize| (r[k] as f64 / n) as f32;
    Ok(DecodedGenotype {
        translation: [genes[0], genes[1], genes[2]],
        rotation: Quaternion { w: q(0), x: q(1), y: q(2), z: q(3) },
        torsions: &genes[RIGID_GENES..],
    })
}

/// Rotate the atoms listed in `mask` by `angle` radians about the axis
/// through `origin` along `dir` (Rodrigues). Other atoms are untouched.
pub fn rotate_selection(
    coords: &mut Coords,
    origin: [f32; 3],
    dir: [f32; 3],
    angle: f32,
    mask: &[u32],
) -> Result<(), PoseError> {
    let axis = Axis::new(dir.map(f64::from), angle as f64)?;
    let origin = origin.map(f64::from);
    for &m in mask {
        let m = m as usize;
        let p = axis.apply(origin, [coords.x[m] as f64, coords.y[m] as f64, coords.z[m] as f64]);
        coords.x[m] = p[0] as f32;
        coords.y[m] = p[1] as f32;
        coords.z[m] = p[2] as f32;
    }
    Ok(())
}

/// Unit axis with the sine and cosine of a rotation about it.
struct Axis {
    k: [f64; 3],
    s: f64,
    c: f64,
}

impl Axis {
    fn new(dir: [f64; 3], angle: f64) -> Result<Self, PoseError> {
        let len = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        if !(len > 1e-9) {
            return Err(PoseError::DegenerateAxis);
        }
        let (s, c) = angle.sin_cos();
        Ok(Self { k: dir.map(|d| d / len), s, c })
    }

    fn apply(&self, origin: [f64; 3], p: [f64; 3]) -> [f64; 3] {
        let k = self.k;
        let v = [p[0] - origin[0], p[1] - origin[1], p[2] - origin[2]];
        let cross = [k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]];
        let dot = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
        let t = 1.0 - self.c;
        std::array::from_fn(|d| origin[d] + v[d] * self.c + cross[d] * self.s + k[d] * dot * t)
    }
}

/// Rodrigues rotation of the `mask` atoms of `points`, in double precision.
fn rotate_points(points: &mut [[f64; 3]], origin: [f64; 3], dir: [f64; 3], angle: f64, mask: &[u32]) -> Result<(), PoseError> {
    let axis = Axis::new(dir, angle)?;
    for &m in mask {
        let p = &mut points[m as usize];
        *p = axis.apply(origin, *p);
    }
    Ok(())
}

thread_local! {
    static POSE_SCRATCH: RefCell<Vec<[f64; 3]>> = const { RefCell::new(Vec::new()) };
}

/// Rigid rotation about the reference centroid, translation of the centroid
/// to the translation genes, then each torsion in declaration order about its
/// current bond axis. Writes into `out`, reusing its allocation.
///
/// The whole chain runs in double precision and is rounded to `f32` once, so
/// torsion axes are not perturbed by rounding of the rigid step.
pub fn apply_pose_into(topology: &LigandTopology, genes: &[f32], out: &mut Coords) -> Result<(), PoseError> {
    let decoded = decode_genotype(genes, topology)?;
    let src = topology.coords0();
    let n = topology.n_atoms();
    let r = &genes[TRANSLATION_GENES..RIGID_GENES];
    let norm = r.iter().map(|v| (*v as f64) * (*v as f64)).sum::<f64>().sqrt();
    let [w, x, y, z] = [0, 1, 2, 3].map(|k| r[k] as f64 / norm);
    let m = [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ];
    let c = topology.centroid0().map(f64::from);
    let t = decoded.translation.map(f64::from);
    POSE_SCRATCH.with(|scratch| {
        let mut pts = scratch.borrow_mut();
        pts.clear();
        pts.extend((0..n).map(|i| {
            let v = [src.x[i] as f64 - c[0], src.y[i] as f64 - c[1], src.z[i] as f64 - c[2]];
            std::array::from_fn(|d| m[d][0] * v[0] + m[d][1] * v[1] + m[d][2] * v[2] + t[d])
        }));
        for (bond, &angle) in topology.rotatable().iter().zip(decoded.torsions) {
            if angle == 0.0 || bond.moving.is_empty() {
                continue;
            }
            let a = pts[bond.a as usize];
            let b = pts[bond.b as usize];
            rotate_points(&mut pts, b, [b[0] - a[0], b[1] - a[1], b[2] - a[2]], angle as f64, &bond.moving)?;
        }
        out.resize(n);
        for (i, p) in pts.iter().enumerate() {
            out.x[i] = p[0] as f32;
            out.y[i] = p[1] as f32;
            out.z[i] = p[2] as f32;
        }
        Ok(())
    })
}

pub fn apply_pose(topology: &LigandTopology, genes: &[f32]) -> Result<Coords, PoseError> {
    let mut out = Coords::zeros(topology.n_atoms());
    apply_pose_into(topology, genes, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::generate_synthetic_ligand;
    use crate::model::ParameterTable;
    use std::f32::consts::FRAC_PI_2;

    fn ligand() -> LigandTopology {
        generate_synthetic_ligand(7, 12, 3, &ParameterTable::default_table()).unwrap()
    }

    #[test]
    fn quaternion_normalization() {
        let lig = ligand();
        let mut g = Genotype::identity(&lig).genes;
        g[3..7].copy_from_slice(&[2.0, 0.0, 0.0, 0.0]);
        assert_eq!(decode_genotype(&g, &lig).unwrap().rotation, Quaternion::IDENTITY);
        g[3..7].copy_from_slice(&[0.0, 0.0, 0.0, 1.0]);
        let q = decode_genotype(&g, &lig).unwrap().rotation;
        assert_eq!(q, Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 1.0 });
        let m = q.to_matrix();
        assert_eq!(m[0][0], -1.0);
        assert_eq!(m[1][1], -1.0);
        assert_eq!(m[2][2], 1.0);
    }

    #[test]
    fn decode_errors() {
        let lig = ligand();
        let mut g = Genotype::identity(&lig).genes;
        g[3..7].copy_from_slice(&[0.0; 4]);
        assert_eq!(decode_genotype(&g, &lig).unwrap_err(), PoseError::ZeroRotation);
        assert!(matches!(decode_genotype(&g[..5], &lig), Err(PoseError::GeneCount { .. })));
    }

    #[test]
    fn identity_pipeline() {
        let lig = ligand();
        let out = apply_pose(&lig, &Genotype::identity(&lig).genes).unwrap();
        for i in 0..lig.n_atoms() {
            let (a, b) = (out.get(i), lig.coords0().get(i));
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn pure_translation_shifts_every_atom() {
        let lig = ligand();
        let mut g = Genotype::identity(&lig).genes;
        g[0] += 1.0;
        g[1] += 2.0;
        g[2] += 3.0;
        let out = apply_pose(&lig, &g).unwrap();
        for i in 0..lig.n_atoms() {
            let (a, b) = (out.get(i), lig.coords0().get(i));
            for (k, d) in [1.0, 2.0, 3.0].iter().enumerate() {
                assert!((a[k] - b[k] - d).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn quarter_turn_about_z() {
        let mut c = Coords::from_points(&[[1.0, 0.0, 0.0], [5.0, 5.0, 5.0]]);
        rotate_selection(&mut c, [0.0; 3], [0.0, 0.0, 1.0], FRAC_PI_2, &[0]).unwrap();
        let p = c.get(0);
        assert!(p[0].abs() < 1e-6 && (p[1] - 1.0).abs() < 1e-6 && p[2].abs() < 1e-6);
        assert_eq!(c.get(1), [5.0, 5.0, 5.0]);
        let before = c.clone();
        rotate_selection(&mut c, [0.0; 3], [0.0, 0.0, 1.0], 0.0, &[0, 1]).unwrap();
        assert_eq!(c, before);
        assert_eq!(rotate_selection(&mut c, [0.0; 3], [0.0; 3], 1.0, &[0]), Err(PoseError::DegenerateAxis));
    }
}
