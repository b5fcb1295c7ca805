use std::collections::HashMap;

use super::descriptor::NodeIndex;
use super::neighborhood_offsets;
use crate::error::{Result, SimError};
use crate::linalg::Vector;
use crate::scalar::Real;

/// Uniform bin grid over particle positions.
///
/// Bin `k` along an axis covers `[origin + k·dx, origin + (k+1)·dx)`, so a
/// point on a bin boundary belongs to the upper bin. Bin contents keep
/// insertion order.
#[derive(Clone, Debug)]
pub struct SpatialHash<T: Real, const D: usize> {
    origin: Vector<T, D>,
    dx: T,
    bins: HashMap<NodeIndex<D>, Vec<(usize, Vector<T, D>)>>,
    len: usize,
}

impl<T: Real, const D: usize> SpatialHash<T, D> {
    pub fn empty(origin: Vector<T, D>, dx: T) -> Self {
        Self {
            origin,
            dx,
            bins: HashMap::new(),
            len: 0,
        }
    }

    /// Bins `(id, position)` pairs. Non-finite positions are rejected.
    pub fn build(
        origin: Vector<T, D>,
        dx: T,
        particles: impl IntoIterator<Item = (usize, Vector<T, D>)>,
    ) -> Result<Self> {
        let mut h = Self::empty(origin, dx);
        for (id, x) in particles {
            h.insert(id, x)?;
        }
        Ok(h)
    }

    pub fn insert(&mut self, id: usize, x: Vector<T, D>) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite {
                what: "particle position",
                id,
            });
        }
        let key = self.bin_of(&x);
        self.bins.entry(key).or_default().push((id, x));
        self.len += 1;
        Ok(())
    }

    #[inline]
    pub fn bin_of(&self, x: &Vector<T, D>) -> NodeIndex<D> {
        let mut key = [0i32; D];
        for a in 0..D {
            key[a] = ((x[a] - self.origin[a]) / self.dx).floor().as_f64() as i32;
        }
        key
    }

    pub fn bin(&self, key: NodeIndex<D>) -> &[(usize, Vector<T, D>)] {
        self.bins.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_bin_occupied(&self, key: NodeIndex<D>) -> bool {
        self.bins.get(&key).is_some_and(|b| !b.is_empty())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Visits every entry in the 3^D bins around `x`.
    pub fn for_each_near(&self, x: &Vector<T, D>, mut f: impl FnMut(usize, &Vector<T, D>)) {
        let center = self.bin_of(x);
        for off in neighborhood_offsets::<D>() {
            let mut key = center;
            for a in 0..D {
                key[a] += off[a];
            }
            for (id, p) in self.bin(key) {
                f(*id, p);
            }
        }
    }

    /// Closest entry within the 3^D neighborhood of `x`; ties go to the lowest id.
    pub fn closest(&self, x: &Vector<T, D>) -> Option<(usize, T)> {
        self.closest_entry(x).map(|(id, p)| (id, (p - x).norm()))
    }

    /// Like [`SpatialHash::closest`] but returns the stored position.
    pub fn closest_entry(&self, x: &Vector<T, D>) -> Option<(usize, Vector<T, D>)> {
        let mut best: Option<(usize, T, Vector<T, D>)> = None;
        self.for_each_near(x, |id, p| {
            let d2 = (p - x).norm_squared();
            best = match best {
                None => Some((id, d2, *p)),
                Some((bid, bd2, _)) if d2 < bd2 || (d2 == bd2 && id < bid) => Some((id, d2, *p)),
                keep => keep,
            };
        });
        best.map(|(id, _, p)| (id, p))
    }

    /// Occupied bin keys in lexicographic order.
    pub fn bin_keys(&self) -> Vec<NodeIndex<D>> {
        let mut keys: Vec<_> = self.bins.keys().copied().collect();
        keys.sort_unstable();
        keys
    }

    /// Every binned id, in unspecified order.
    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.bins.values().flat_map(|b| b.iter().map(|(id, _)| *id))
    }
}
