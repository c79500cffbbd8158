//! Seeded random sample spaces and tangent fields.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charts::anticommute_project;
use crate::error::Result;
use crate::fiber::{g_adjoint, FiberMatrix};
use crate::structures::{AcsField, SampleSpace, TangentField};

/// Which part of the tangent space to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentKind {
    Mixed,
    /// g₀-self-adjoint, tangent to positive associated structures.
    Symmetric,
    /// g₀-skew, tangent to orthogonal structures.
    Antisymmetric,
}

/// Deterministic RNG stream for a named consumer under a master seed.
pub fn stream(master_seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a keeps the derivation stable across platforms and releases
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(master_seed ^ h)
}

/// Sample space with weights uniform in `[0.5, 1.5)` and identity base metric.
pub fn random_space(rng: &mut impl Rng, dim: usize, points: usize) -> Result<SampleSpace> {
    let weights = (0..points).map(|_| rng.random_range(0.5..1.5)).collect();
    SampleSpace::with_weights(dim, weights)
}

pub fn random_matrix(rng: &mut impl Rng, dim: usize) -> FiberMatrix {
    let entries: Vec<f64> = (0..dim * dim)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    FiberMatrix::from_row_slice(dim, &entries).expect("finite entries")
}

/// Random tangent at `base`: uniform entries, projected to anticommute with
/// the base, optionally (anti)symmetrized against g₀, then rescaled pointwise
/// to spectral norm `bound`.
///
/// Symmetrizing preserves anticommutation only when the base is g₀-orthogonal.
pub fn random_tangent(
    rng: &mut impl Rng,
    base: &Arc<AcsField>,
    kind: TangentKind,
    bound: f64,
) -> Result<TangentField> {
    let space = base.space().clone();
    let mut ops = Vec::with_capacity(space.len());
    for i in 0..space.len() {
        let raw = random_matrix(rng, space.dim());
        let projected = anticommute_project(&raw, base.op(i));
        let shaped = match kind {
            TangentKind::Mixed => projected,
            TangentKind::Symmetric => {
                (&projected + g_adjoint(&projected, space.metric(i))).scaled(0.5)
            }
            TangentKind::Antisymmetric => {
                (&projected - g_adjoint(&projected, space.metric(i))).scaled(0.5)
            }
        };
        let norm = shaped.spectral_norm();
        ops.push(if norm > 1e-12 {
            shaped.scaled(bound / norm)
        } else {
            FiberMatrix::zeros(space.dim())
        });
    }
    TangentField::new(base.clone(), ops)
}
