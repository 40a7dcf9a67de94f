//! Closed-form pairwise energy terms. Grid building, every scoring backend,
//! and the test oracles all agree with these definitions.
//!
//! Functions are generic over the float type so that grid precomputation can
//! run in `f64` while the scoring kernels stay in `f32`.

use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Coulomb constant, kcal·Å/(mol·e²).
pub const COULOMB: f64 = 332.06363;
/// Lower clamp on squared distance, Å².
pub const R2_CLAMP: f64 = 0.01;
/// Width of the desolvation Gaussian, Å.
pub const DESOLV_SIGMA: f64 = 3.6;
/// Charge-dependent atomic solvation parameter.
pub const QASP: f64 = 0.01097;

// Sigmoidal distance-dependent dielectric (Mehler-Solmajer).
pub const DIEL_A: f64 = -8.5525;
pub const DIEL_B: f64 = 78.4 - DIEL_A;
pub const DIEL_K: f64 = 7.7839;
pub const DIEL_LAMBDA: f64 = 0.003627;

#[inline(always)]
fn c<T: Float>(v: f64) -> T {
    T::from(v).unwrap()
}

#[inline(always)]
pub fn clamp_r2<T: Float>(r2: T) -> T {
    r2.max(c(R2_CLAMP))
}

/// 12-6 Lennard-Jones: A/r¹² − B/r⁶.
#[inline]
pub fn vdw_energy<T: Float>(r2: T, a12: T, b6: T) -> T {
    let inv2 = clamp_r2(r2).recip();
    let inv6 = inv2 * inv2 * inv2;
    a12 * inv6 * inv6 - b6 * inv6
}

/// 12-10 hydrogen bond: C/r¹² − D/r¹⁰. Distance only, no angular ramp.
#[inline]
pub fn hbond_energy<T: Float>(r2: T, c12: T, d10: T) -> T {
    let inv2 = clamp_r2(r2).recip();
    let inv6 = inv2 * inv2 * inv2;
    let inv10 = inv6 * inv2 * inv2;
    c12 * inv6 * inv6 - d10 * inv10
}

/// ε(r) = A + B / (1 + k·exp(−λ·B·r)).
#[inline]
pub fn distance_dielectric<T: Float>(r: T) -> T {
    let b: T = c(DIEL_B);
    c::<T>(DIEL_A) + b / (T::one() + c::<T>(DIEL_K) * (-(c::<T>(DIEL_LAMBDA) * b) * r).exp())
}

/// 332.06363·q_i·q_j / (r·ε(r)), with r clamped to √R2_CLAMP.
#[inline]
pub fn electrostatic_energy<T: Float>(r: T, q_i: T, q_j: T) -> T {
    electrostatic_qq(r, q_i * q_j)
}

/// Electrostatic term from a precomputed charge product.
#[inline]
pub fn electrostatic_qq<T: Float>(r: T, qq: T) -> T {
    let r = r.max(c::<T>(R2_CLAMP).sqrt());
    c::<T>(COULOMB) * qq / (r * distance_dielectric(r))
}

/// exp(−r²/(2σ²)).
#[inline]
pub fn desolvation_gaussian<T: Float>(r2: T) -> T {
    (-r2 * c(1.0 / (2.0 * DESOLV_SIGMA * DESOLV_SIGMA))).exp()
}

/// Solvation parameters of one atom for [`desolvation_energy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvationAtom<T> {
    pub solpar: T,
    pub volume: T,
    pub charge: T,
}

#[inline]
pub fn desolvation_energy<T: Float>(r2: T, a: SolvationAtom<T>, b: SolvationAtom<T>) -> T {
    let qasp: T = c(QASP);
    let coeff =
        a.solpar * b.volume + b.solpar * a.volume + qasp * (a.charge.abs() * b.volume + b.charge.abs() * a.volume);
    coeff * desolvation_gaussian(r2)
}

/// Free-energy weights applied to each term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TermWeights {
    pub w_vdw: f32,
    pub w_hbond: f32,
    pub w_elec: f32,
    pub w_desolv: f32,
    pub w_tors: f32,
}

impl Default for TermWeights {
    fn default() -> Self {
        Self { w_vdw: 0.1662, w_hbond: 0.1209, w_elec: 0.1406, w_desolv: 0.1322, w_tors: 0.2983 }
    }
}

impl TermWeights {
    pub fn is_valid(&self) -> bool {
        [self.w_vdw, self.w_hbond, self.w_elec, self.w_desolv, self.w_tors]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0)
    }
}
