//! Auto-vectorization-friendly backend: SoA blocks, selects instead of
//! branches, fixed-order block reduction.

use super::{out_of_box_penalty, pair_energy, BackendKind, ComputeBackend, InterTerms, PairLanes};
use crate::energy::TermWeights;
use crate::grid::{trilinear, GridMapSet};
use crate::model::{Coords, NonbondPairList};

const BLOCK: usize = 64;

pub struct ScalarBackend;

impl ComputeBackend for ScalarBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Scalar
    }

    fn lane_width(&self) -> usize {
        1
    }

    fn inter_energy(&self, pose: &Coords, terms: &InterTerms, grid: &GridMapSet) -> f32 {
        let spec = grid.spec();
        let elec = grid.values(terms.elec_slot);
        let desolv = grid.values(terms.desolv_slot);
        let mut total = 0.0f32;
        for atom in 0..pose.len() {
            let p = [pose.x[atom], pose.y[atom], pose.z[atom]];
            let e = if !spec.contains(p) {
                out_of_box_penalty(spec.distance_outside(p))
            } else {
                trilinear(spec, grid.values(terms.map_slot[atom] as usize), p)
                    + terms.elec_factor[atom] * trilinear(spec, elec, p)
                    + terms.desolv_factor[atom] * trilinear(spec, desolv, p)
            };
            total += e;
        }
        total
    }

    fn intra_energy(&self, pose: &Coords, pairs: &NonbondPairList, weights: &TermWeights) -> f32 {
        let n = pairs.len();
        let mut r2 = [0.0f32; BLOCK];
        let mut e = [0.0f32; BLOCK];
        let mut total = 0.0f32;
        let mut start = 0;
        while start < n {
            let len = BLOCK.min(n - start);
            let (ii, jj) = (&pairs.i[start..start + len], &pairs.j[start..start + len]);
            for k in 0..len {
                let (i, j) = (ii[k] as usize, jj[k] as usize);
                let dx = pose.x[i] - pose.x[j];
                let dy = pose.y[i] - pose.y[j];
                let dz = pose.z[i] - pose.z[j];
                r2[k] = dx * dx + dy * dy + dz * dz;
            }
            let a12 = &pairs.a12[start..start + len];
            let b6 = &pairs.b6[start..start + len];
            let b10 = &pairs.b10[start..start + len];
            let hb = &pairs.hbond[start..start + len];
            let qq = &pairs.qq[start..start + len];
            let ds = &pairs.desolv[start..start + len];
            for k in 0..len {
                let w_lj = if hb[k] != 0.0 { weights.w_hbond } else { weights.w_vdw };
                let lanes = PairLanes { a12: a12[k], b6: b6[k], b10: b10[k], qq: qq[k], desolv: ds[k] };
                e[k] = pair_energy(r2[k], lanes, w_lj, weights);
            }
            let mut block = 0.0f32;
            for &v in &e[..len] {
                block += v;
            }
            total += block;
            start += len;
        }
        total
    }
}
