//! Smoke emission at the surface of burning material.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MpmParticle;
use crate::fluid::SmokeParticle;
use crate::grid::SpatialHash;
use crate::ignition::{BurnState, IgnitionParams};
use crate::linalg::Vector;
use crate::scalar::Real;

/// Keys the emission noise. Each (step, particle) pair owns an independent
/// slice of a ChaCha8 stream, so results do not depend on iteration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmokeRng {
    pub seed: u64,
    pub step: u64,
}

/// Words of keystream reserved per particle.
const WORDS_PER_PARTICLE: u128 = 1 << 16;

impl SmokeRng {
    fn for_particle(&self, id: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.step);
        rng.set_word_pos(id as u128 * WORDS_PER_PARTICLE);
        rng
    }
}

/// Emits `n_s` smoke particles per burning particle around its closest
/// boundary particle. `boundary` hashes boundary particle positions.
#[allow(clippy::too_many_arguments)]
pub fn sample_smoke<T: Real, const D: usize>(
    particles: &[MpmParticle<T, D>],
    boundary: &SpatialHash<T, D>,
    n_s: usize,
    dx: T,
    params: &[IgnitionParams<T>],
    mass: T,
    time: T,
    rng: SmokeRng,
) -> Vec<SmokeParticle<T, D>> {
    let mut out = Vec::new();
    if n_s == 0 {
        return out;
    }
    for (id, p) in particles.iter().enumerate() {
        if p.state != BurnState::Burning {
            continue;
        }
        let Some((_, anchor)) = boundary.closest_entry(&p.x) else {
            log::warn!("burning particle {id} has no boundary particle within one cell");
            continue;
        };
        let prm = &params[p.material as usize];
        let mut r = rng.for_particle(id);
        for _ in 0..n_s {
            let offset = Vector::<T, D>::from_fn(|_, _| T::lit(r.random_range(-0.5..=0.5)));
            out.push(SmokeParticle {
                x: anchor + offset * dx,
                v: Vector::zeros(),
                mass,
                temperature: prm.t_ignition,
                temp_grad: Vector::zeros(),
                fuel: p.fuel0,
                fuel0: p.fuel0,
                burn_start_time: time,
                material: p.material,
            });
        }
    }
    out
}
