use serde::{Deserialize, Serialize};

use super::{BurnState, IgnitionParams};
use crate::error::{Result, SimError};
use crate::fluid::SmokeParticle;
use crate::grid::SpatialHash;
use crate::linalg::Vector;
use crate::mpm::MpmParticle;
use crate::scalar::Real;

/// `F₀·exp(−γ·elapsed)`.
#[inline]
pub fn fuel_at<T: Real>(fuel0: T, gamma: T, elapsed: T) -> T {
    fuel0 * (-gamma * elapsed).exp()
}

/// Closed-form fuel of a burning particle. Marks it burnt once the fuel
/// drops strictly below `F_min`. Returns whether it burnt out.
pub fn update_fuel<T: Real, const D: usize>(
    p: &mut MpmParticle<T, D>,
    t_now: T,
    params: &IgnitionParams<T>,
) -> bool {
    let Some(start) = p.burn_start_time else {
        return false;
    };
    if p.state != BurnState::Burning {
        return false;
    }
    p.fuel = fuel_at(p.fuel0, params.gamma, t_now - start);
    if p.fuel < params.f_min {
        p.state = BurnState::Burnt;
        return true;
    }
    false
}

/// Smoke burns from its emission time and never changes state.
pub fn update_smoke_fuel<T: Real, const D: usize>(
    s: &mut SmokeParticle<T, D>,
    t_now: T,
    params: &IgnitionParams<T>,
) {
    s.fuel = fuel_at(s.fuel0, params.gamma, t_now - s.burn_start_time);
}

/// `min(T + β·fuel·dt, T_max)`.
#[inline]
pub fn update_burn_temperature<T: Real>(temperature: T, fuel: T, dt: T, params: &IgnitionParams<T>) -> T {
    (temperature + params.beta * fuel * dt).min(params.t_max)
}

/// For each boundary particle, its closest original-state particle.
/// `hash_o` bins the state-O particles. Sorted and deduplicated.
pub fn compute_surface_set<T: Real, const D: usize>(
    boundary: &[Vector<T, D>],
    hash_o: &SpatialHash<T, D>,
) -> Vec<usize> {
    let mut out: Vec<usize> = boundary
        .iter()
        .filter_map(|b| hash_o.closest(b).map(|(id, _)| id))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Schedules surface particles near burning ones. The delay is the distance
/// over the flame speed of the target's material; the earliest time wins.
/// Returns the ids that were scheduled or moved earlier, sorted.
pub fn ignite_neighbors<T: Real, const D: usize>(
    particles: &mut [MpmParticle<T, D>],
    surface: &[usize],
    t_now: T,
    params: &[IgnitionParams<T>],
    hash_dx: T,
    origin: Vector<T, D>,
) -> Result<Vec<usize>> {
    if surface.is_empty() {
        return Ok(Vec::new());
    }
    let hash = SpatialHash::build(origin, hash_dx, surface.iter().map(|&i| (i, particles[i].x)))?;
    let mut touched = Vec::new();
    for p in 0..particles.len() {
        if particles[p].state != BurnState::Burning {
            continue;
        }
        let Some((q, dist)) = hash.closest(&particles[p].x) else {
            continue;
        };
        let prm = &params[particles[q].material as usize];
        let target = &mut particles[q];
        if !(target.temperature > prm.t_ignition) {
            continue;
        }
        let when = t_now + dist / prm.c_flame;
        match target.state {
            BurnState::Original => {
                target.state = BurnState::AboutToBurn;
                target.time_to_burn = Some(when);
                touched.push(q);
            }
            BurnState::AboutToBurn if target.time_to_burn.is_none_or(|t| when < t) => {
                target.time_to_burn = Some(when);
                touched.push(q);
            }
            _ => {}
        }
    }
    touched.sort_unstable();
    touched.dedup();
    Ok(touched)
}

/// Scheduled particles whose time has come start burning at their scheduled
/// instant. Returns how many switched.
pub fn advance_states<T: Real, const D: usize>(particles: &mut [MpmParticle<T, D>], t_now: T) -> usize {
    let mut n = 0;
    for p in particles.iter_mut() {
        if p.state != BurnState::AboutToBurn {
            continue;
        }
        if let Some(t) = p.time_to_burn {
            if t_now >= t {
                p.state = BurnState::Burning;
                p.burn_start_time = Some(t);
                n += 1;
            }
        }
    }
    n
}

/// Initial ignition targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedSpec {
    /// Explicit particle ids.
    Ids(Vec<usize>),
    /// Every particle within `radius` of `point`; radius 0 picks the nearest.
    Near { point: Vec<f64>, radius: f64 },
}

/// Sets the matching particles burning at `time`. Fails when nothing matches.
pub fn seed_ignition<T: Real, const D: usize>(
    particles: &mut [MpmParticle<T, D>],
    spec: &SeedSpec,
    params: &[IgnitionParams<T>],
    time: T,
) -> Result<Vec<usize>> {
    let ids: Vec<usize> = match spec {
        SeedSpec::Ids(ids) => {
            if let Some(bad) = ids.iter().find(|&&i| i >= particles.len()) {
                return Err(SimError::config(
                    "ignition.seeds",
                    format!("particle id {bad} out of range"),
                ));
            }
            let mut v = ids.clone();
            v.sort_unstable();
            v.dedup();
            v
        }
        SeedSpec::Near { point, radius } => {
            if point.len() != D {
                return Err(SimError::config(
                    "ignition.seeds.point",
                    format!("expected {D} coordinates"),
                ));
            }
            let c = Vector::<T, D>::from_fn(|a, _| T::lit(point[a]));
            let candidates = particles.iter().enumerate().filter(|(_, p)| p.combustible);
            if *radius <= 0.0 {
                let mut best: Option<(usize, T)> = None;
                for (i, p) in candidates {
                    let d = (p.x - c).norm_squared();
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((i, d));
                    }
                }
                best.map(|(i, _)| vec![i]).unwrap_or_default()
            } else {
                let r2 = T::lit(radius * radius);
                candidates
                    .filter(|(_, p)| (p.x - c).norm_squared() <= r2)
                    .map(|(i, _)| i)
                    .collect()
            }
        }
    };
    if ids.is_empty() {
        return Err(SimError::config("ignition.seeds", "no particle matches the seed"));
    }
    for &i in &ids {
        let p = &mut particles[i];
        let prm = &params[p.material as usize];
        p.state = BurnState::Burning;
        p.burn_start_time = Some(time);
        p.time_to_burn = Some(time);
        p.temperature = p.temperature.max(prm.t_ignition);
    }
    Ok(ids)
}
