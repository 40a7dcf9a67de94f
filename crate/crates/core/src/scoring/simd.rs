//! Explicit lane-parallel kernels on portable SIMD vectors.
//!
//! The kernels are generic over [`Lane`], implemented for 4- and 8-wide
//! `f32` vectors, so the same code can be checked at two widths. Grid corner
//! reads are emulated gathers: per-lane scalar loads assembled into a vector.
//! Leftover atoms or pairs that do not fill a whole vector go through the
//! scalar formulas.

use std::ops::{Add, BitAnd, Div, Mul, Sub};

use wide::{bytemuck::cast, f32x4, f32x8, i32x4, i32x8};

use super::{consts, out_of_box_penalty, pair_energy, BackendKind, ComputeBackend, InterTerms, PairLanes};
use crate::energy::TermWeights;
use crate::grid::{trilinear, GridMapSet, GridSpec};
use crate::model::{Coords, NonbondPairList};

/// Lane count used by [`SimdBackend`].
pub const LANES: usize = 8;

/// The vector operations the kernels need.
pub trait Lane:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + BitAnd<Output = Self>
{
    const WIDTH: usize;

    fn splat(v: f32) -> Self;
    /// Loads `WIDTH` values from the front of `s`.
    fn load(s: &[f32]) -> Self;
    fn from_fn(f: impl FnMut(usize) -> f32) -> Self;
    fn store(self, out: &mut [f32]);
    fn vmax(self, o: Self) -> Self;
    fn vmin(self, o: Self) -> Self;
    fn vsqrt(self) -> Self;
    fn vexp(self) -> Self;
    /// `floor` for values of magnitude below 2^31.
    fn vfloor(self) -> Self;
    /// `2^n` for integral `n` in `[-126, 127]`.
    fn pow2i(self) -> Self;
    fn ge(self, o: Self) -> Self;
    fn le(self, o: Self) -> Self;
    fn ne(self, o: Self) -> Self;
    /// Lane-wise `mask ? t : f`.
    fn select(mask: Self, t: Self, f: Self) -> Self;
    /// Sum of lanes, left to right.
    fn sum(self) -> f32;
}

macro_rules! impl_lane {
    ($t:ty, $i:ty, $n:literal) => {
        impl Lane for $t {
            const WIDTH: usize = $n;

            #[inline(always)]
            fn splat(v: f32) -> Self {
                <$t>::splat(v)
            }

            #[inline(always)]
            fn load(s: &[f32]) -> Self {
                let a: [f32; $n] = s[..$n].try_into().unwrap();
                <$t>::new(a)
            }

            #[inline(always)]
            fn from_fn(f: impl FnMut(usize) -> f32) -> Self {
                <$t>::new(std::array::from_fn(f))
            }

            #[inline(always)]
            fn store(self, out: &mut [f32]) {
                out[..$n].copy_from_slice(&self.to_array());
            }

            #[inline(always)]
            fn vmax(self, o: Self) -> Self {
                self.max(o)
            }

            #[inline(always)]
            fn vmin(self, o: Self) -> Self {
                self.min(o)
            }

            #[inline(always)]
            fn vsqrt(self) -> Self {
                self.sqrt()
            }

            #[inline(always)]
            fn vexp(self) -> Self {
                exp_poly(self)
            }

            #[inline(always)]
            fn vfloor(self) -> Self {
                let t = <$t>::from_i32x4_or_8(self.fast_trunc_int());
                t - (t.simd_gt(self) & <$t>::splat(1.0))
            }

            #[inline(always)]
            fn pow2i(self) -> Self {
                let bits = (self.fast_round_int() + <$i>::splat(127)) << 23;
                cast(bits)
            }

            #[inline(always)]
            fn ge(self, o: Self) -> Self {
                self.simd_ge(o)
            }

            #[inline(always)]
            fn le(self, o: Self) -> Self {
                self.simd_le(o)
            }

            #[inline(always)]
            fn ne(self, o: Self) -> Self {
                self.simd_ne(o)
            }

            #[inline(always)]
            fn select(mask: Self, t: Self, f: Self) -> Self {
                mask.bitselect(t, f)
            }

            #[inline(always)]
            fn sum(self) -> f32 {
                let a = self.to_array();
                let mut s = a[0];
                for v in &a[1..] {
                    s += *v;
                }
                s
            }
        }
    };
}

trait FromInt<I> {
    fn from_i32x4_or_8(v: I) -> Self;
}

impl FromInt<i32x4> for f32x4 {
    #[inline(always)]
    fn from_i32x4_or_8(v: i32x4) -> Self {
        f32x4::from_i32x4(v)
    }
}

impl FromInt<i32x8> for f32x8 {
    #[inline(always)]
    fn from_i32x4_or_8(v: i32x8) -> Self {
        f32x8::from_i32x8(v)
    }
}

impl_lane!(f32x4, i32x4, 4);
impl_lane!(f32x8, i32x8, 8);

/// Range-reduced `exp`: `x = n ln2 + r` with `|r| <= ln2 / 2`, a degree-6
/// polynomial for `exp(r)` and the exponent bits for `2^n`. Inputs are clamped
/// to the finite normal range, so the kernels never see infinities.
#[inline(always)]
fn exp_poly<L: Lane>(x: L) -> L {
    const ROUND: f32 = 12_582_912.0;
    let x = x.vmax(L::splat(-87.3)).vmin(L::splat(88.3));
    let n = (x * L::splat(std::f32::consts::LOG2_E) + L::splat(ROUND)) - L::splat(ROUND);
    let r = x - n * L::splat(0.693_359_4) - n * L::splat(-2.121_944_4e-4);
    let mut p = L::splat(1.987_569_1e-4);
    p = p * r + L::splat(1.398_199_9e-3);
    p = p * r + L::splat(8.333_452e-3);
    p = p * r + L::splat(4.166_579_6e-2);
    p = p * r + L::splat(1.666_666_5e-1);
    p = p * r + L::splat(0.5);
    let y = p * r * r + r + L::splat(1.0);
    y * n.pow2i()
}

pub struct SimdBackend;

impl ComputeBackend for SimdBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Simd
    }

    fn lane_width(&self) -> usize {
        LANES
    }

    fn inter_energy(&self, pose: &Coords, terms: &InterTerms, grid: &GridMapSet) -> f32 {
        inter_energy_lanes::<f32x8>(pose, terms, grid)
    }

    fn intra_energy(&self, pose: &Coords, pairs: &NonbondPairList, weights: &TermWeights) -> f32 {
        intra_energy_lanes::<f32x8>(pose, pairs, weights)
    }
}

/// Fraction of issued lanes doing useful work when `n` items are processed
/// in full vectors of `width` plus a scalar tail counted as one partially
/// filled vector.
pub fn lane_utilization(n: usize, width: usize) -> f64 {
    if n == 0 || width == 0 {
        return 0.0;
    }
    let vectors = n.div_ceil(width);
    n as f64 / (vectors * width) as f64
}

/// Per-atom energies are computed a vector at a time and then summed in atom
/// order, which keeps the total bitwise equal to the scalar backends.
pub fn inter_energy_lanes<L: Lane>(pose: &Coords, terms: &InterTerms, grid: &GridMapSet) -> f32 {
    let spec = grid.spec();
    let n = pose.len();
    let elec = grid.values(terms.elec_slot);
    let desolv = grid.values(terms.desolv_slot);
    let full = n - n % L::WIDTH;
    let mut buf = [0.0f32; 16];
    let mut total = 0.0f32;
    let mut start = 0;
    while start < full {
        let e = inter_block::<L>(pose, terms, grid, spec, elec, desolv, start);
        e.store(&mut buf);
        for v in &buf[..L::WIDTH] {
            total += *v;
        }
        start += L::WIDTH;
    }
    for atom in full..n {
        let p = pose.get(atom);
        total += if !spec.contains(p) {
            out_of_box_penalty(spec.distance_outside(p))
        } else {
            trilinear(spec, grid.values(terms.map_slot[atom] as usize), p)
                + terms.elec_factor[atom] * trilinear(spec, elec, p)
                + terms.desolv_factor[atom] * trilinear(spec, desolv, p)
        };
    }
    total
}

#[inline(always)]
fn inter_block<L: Lane>(
    pose: &Coords,
    terms: &InterTerms,
    grid: &GridMapSet,
    spec: &GridSpec,
    elec: &[f32],
    desolv: &[f32],
    start: usize,
) -> L {
    let w = L::WIDTH;
    let p = [L::load(&pose.x[start..]), L::load(&pose.y[start..]), L::load(&pose.z[start..])];
    let hi = spec.max_corner();
    let inv = L::splat(1.0 / spec.spacing);
    let zero = L::splat(0.0);

    let mut inside = L::splat(f32::from_bits(u32::MAX));
    let mut d2 = zero;
    let mut cell = [[0usize; 16]; 3];
    let mut frac = [zero; 3];
    for k in 0..3 {
        let lo = L::splat(spec.origin[k]);
        let up = L::splat(hi[k]);
        inside = inside & p[k].ge(lo) & p[k].le(up);
        let d = (lo - p[k]).vmax(p[k] - up).vmax(zero);
        d2 = d2 + d * d;
        let g = (p[k] - lo) * inv;
        let c = g.vfloor().vmax(zero).vmin(L::splat((spec.dims[k] - 2) as f32));
        frac[k] = g - c;
        let mut tmp = [0.0f32; 16];
        c.store(&mut tmp);
        for (dst, v) in cell[k][..w].iter_mut().zip(&tmp[..w]) {
            *dst = *v as usize;
        }
    }

    let nx = spec.dims[0];
    let nxy = nx * spec.dims[1];
    let base: [usize; 16] = std::array::from_fn(|l| if l < w { cell[0][l] + nx * cell[1][l] + nxy * cell[2][l] } else { 0 });
    let one = L::splat(1.0);
    let (tx, ty, tz) = (frac[0], frac[1], frac[2]);
    let (sx, sy, sz) = (one - tx, one - ty, one - tz);
    let lerp = [sx, tx, sy, ty, sz, tz];
    let affinity = interpolate::<L>(&base, &lerp, nx, nxy, |l, idx| grid.values(terms.map_slot[start + l] as usize)[idx]);
    let e = interpolate::<L>(&base, &lerp, nx, nxy, |_, idx| elec[idx]);
    let d = interpolate::<L>(&base, &lerp, nx, nxy, |_, idx| desolv[idx]);
    let qe = L::load(&terms.elec_factor[start..]);
    let qd = L::load(&terms.desolv_factor[start..]);
    let energy = affinity + qe * e + qd * d;
    let penalty = L::splat(super::OUT_OF_BOX_PENALTY) * (d2.vsqrt() + one);
    L::select(inside, energy, penalty)
}

/// Same corner order and lerp sequence as [`trilinear`]. `w` holds
/// `(1 - tx, tx, 1 - ty, ty, 1 - tz, tz)`.
#[inline(always)]
fn interpolate<L: Lane>(base: &[usize; 16], w: &[L; 6], nx: usize, nxy: usize, value: impl Fn(usize, usize) -> f32) -> L {
    let [sx, tx, sy, ty, sz, tz] = *w;
    let corner = |off: usize| L::from_fn(|l| value(l, base[l] + off));
    let c00 = corner(0) * sx + corner(1) * tx;
    let c10 = corner(nx) * sx + corner(nx + 1) * tx;
    let c01 = corner(nxy) * sx + corner(nxy + 1) * tx;
    let c11 = corner(nxy + nx) * sx + corner(nxy + nx + 1) * tx;
    let c0 = c00 * sy + c10 * ty;
    let c1 = c01 * sy + c11 * ty;
    c0 * sz + c1 * tz
}

/// Pair energies accumulate in a vector across blocks and are reduced once
/// at the end; the tail uses the scalar formula.
pub fn intra_energy_lanes<L: Lane>(pose: &Coords, pairs: &NonbondPairList, weights: &TermWeights) -> f32 {
    let n = pairs.len();
    let w = L::WIDTH;
    let full = n - n % w;
    let zero = L::splat(0.0);
    let r2_clamp = L::splat(consts::R2_CLAMP);
    let one = L::splat(1.0);
    let w_vdw = L::splat(weights.w_vdw);
    let w_hbond = L::splat(weights.w_hbond);
    let w_elec = L::splat(weights.w_elec);
    let w_desolv = L::splat(weights.w_desolv);
    let mut acc = zero;
    let mut start = 0;
    while start < full {
        let r2 = L::from_fn(|l| {
            let (i, j) = (pairs.i[start + l] as usize, pairs.j[start + l] as usize);
            let dx = pose.x[i] - pose.x[j];
            let dy = pose.y[i] - pose.y[j];
            let dz = pose.z[i] - pose.z[j];
            dx * dx + dy * dy + dz * dz
        })
        .vmax(r2_clamp);
        let a12 = L::load(&pairs.a12[start..]);
        let b6 = L::load(&pairs.b6[start..]);
        let b10 = L::load(&pairs.b10[start..]);
        let hb = L::load(&pairs.hbond[start..]);
        let qq = L::load(&pairs.qq[start..]);
        let ds = L::load(&pairs.desolv[start..]);

        let inv2 = one / r2;
        let inv6 = inv2 * inv2 * inv2;
        let inv12 = inv6 * inv6;
        let inv10 = inv6 * inv2 * inv2;
        let lj = a12 * inv12 - b6 * inv6 - b10 * inv10;
        let r = r2.vsqrt();
        let eps = L::splat(consts::DIEL_A)
            + L::splat(consts::DIEL_B) / (one + L::splat(consts::DIEL_K) * (L::splat(consts::NEG_LAMBDA_B) * r).vexp());
        let elec = L::splat(consts::COULOMB) * qq / (r * eps);
        let desolv = ds * (r2 * L::splat(consts::NEG_INV_2SIGMA2)).vexp();
        let w_lj = L::select(hb.ne(zero), w_hbond, w_vdw);
        acc = acc + (w_lj * lj + w_elec * elec + w_desolv * desolv);
        start += w;
    }
    let mut total = acc.sum();
    for k in full..n {
        let (i, j) = (pairs.i[k] as usize, pairs.j[k] as usize);
        let dx = pose.x[i] - pose.x[j];
        let dy = pose.y[i] - pose.y[j];
        let dz = pose.z[i] - pose.z[j];
        let w_lj = if pairs.hbond[k] != 0.0 { weights.w_hbond } else { weights.w_vdw };
        let lanes = PairLanes {
            a12: pairs.a12[k],
            b6: pairs.b6[k],
            b10: pairs.b10[k],
            qq: pairs.qq[k],
            desolv: pairs.desolv[k],
        };
        total += pair_energy(dx * dx + dy * dy + dz * dz, lanes, w_lj, weights);
    }
    total
}
