//! Baseline backend: one pair at a time, AoS reads, branches on pair kind.

use super::{consts, out_of_box_penalty, BackendKind, ComputeBackend, InterTerms};
use crate::energy::TermWeights;
use crate::grid::{trilinear, GridMapSet};
use crate::model::{Coords, NonbondPairList};

pub struct ReferenceBackend;

impl ComputeBackend for ReferenceBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Reference
    }

    fn lane_width(&self) -> usize {
        1
    }

    fn inter_energy(&self, pose: &Coords, terms: &InterTerms, grid: &GridMapSet) -> f32 {
        let spec = grid.spec();
        let mut total = 0.0f32;
        for atom in 0..pose.len() {
            let p = pose.get(atom);
            if !spec.contains(p) {
                total += out_of_box_penalty(spec.distance_outside(p));
                continue;
            }
            let affinity = trilinear(spec, grid.values(terms.map_slot[atom] as usize), p);
            let elec = trilinear(spec, grid.values(terms.elec_slot), p);
            let desolv = trilinear(spec, grid.values(terms.desolv_slot), p);
            total += affinity + terms.elec_factor[atom] * elec + terms.desolv_factor[atom] * desolv;
        }
        total
    }

    fn intra_energy(&self, pose: &Coords, pairs: &NonbondPairList, weights: &TermWeights) -> f32 {
        let mut total = 0.0f32;
        for k in 0..pairs.len() {
            let p = pairs.get(k);
            let a = pose.get(p.i as usize);
            let b = pose.get(p.j as usize);
            let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
            let r2 = (dx * dx + dy * dy + dz * dz).max(consts::R2_CLAMP);
            let inv2 = 1.0 / r2;
            let inv6 = inv2 * inv2 * inv2;
            let mut e = if p.hbond {
                let inv10 = inv6 * inv2 * inv2;
                weights.w_hbond * (p.a12 * (inv6 * inv6) - p.b10 * inv10)
            } else {
                weights.w_vdw * (p.a12 * (inv6 * inv6) - p.b6 * inv6)
            };
            let r = r2.sqrt();
            if p.qq != 0.0 {
                let eps = consts::DIEL_A + consts::DIEL_B / (1.0 + consts::DIEL_K * (consts::NEG_LAMBDA_B * r).exp());
                e += weights.w_elec * (consts::COULOMB * p.qq / (r * eps));
            }
            if p.desolv != 0.0 {
                e += weights.w_desolv * (p.desolv * (r2 * consts::NEG_INV_2SIGMA2).exp());
            }
            total += e;
        }
        total
    }
}
