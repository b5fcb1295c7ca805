use crate::error::{Result, SimError};
use crate::grid::DenseField;
use crate::scalar::Real;

/// Fills masked cells layer by layer from the unmasked ones. Each newly
/// reached cell takes the mean of its already-known face neighbors.
pub fn extrapolate_fluid_temperature<T: Real, const D: usize>(
    field: &DenseField<T, T, D>,
    solid_mask: &DenseField<T, bool, D>,
) -> Result<DenseField<T, T, D>> {
    let g = *field.descriptor();
    let mut out = field.clone();
    let mut known: Vec<bool> = solid_mask.values().iter().map(|s| !s).collect();
    if !known.iter().any(|k| *k) {
        return Err(SimError::AllSolid);
    }
    let mut pending: Vec<usize> = (0..known.len()).filter(|&l| !known[l]).collect();
    while !pending.is_empty() {
        let mut layer = Vec::new();
        for &lin in &pending {
            let c = g.node_index(lin);
            let mut sum = T::zero();
            let mut n = 0usize;
            for a in 0..D {
                for d in [-1, 1] {
                    let mut nb = c;
                    nb[a] += d;
                    if g.contains(nb) && known[g.linear_index(nb)] {
                        sum += out.get(nb);
                        n += 1;
                    }
                }
            }
            if n > 0 {
                layer.push((lin, sum / T::from_usize_lossy(n)));
            }
        }
        if layer.is_empty() {
            // unreachable cells keep their value
            break;
        }
        for &(lin, v) in &layer {
            out.values_mut()[lin] = v;
            known[lin] = true;
        }
        pending.retain(|&l| !known[l]);
    }
    Ok(out)
}
