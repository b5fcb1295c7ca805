use std::collections::HashMap;
use std::ops::AddAssign;

use super::descriptor::{GridDescriptor, NodeIndex};
use crate::scalar::Real;

const BLOCK_BITS: u32 = 2;
const BLOCK_WIDTH: i32 = 1 << BLOCK_BITS;

#[derive(Clone, Debug)]
struct Block<V> {
    values: Box<[V]>,
    active: u64,
}

/// Field that stores only nodes that have been written.
///
/// Nodes are grouped into 4^D blocks keyed by block coordinate. Reads of
/// inactive nodes return the background value. Ordered iteration is
/// lexicographic in the node index.
#[derive(Clone, Debug)]
pub struct SparseField<T: Real, V, const D: usize> {
    descriptor: GridDescriptor<T, D>,
    background: V,
    blocks: HashMap<NodeIndex<D>, Block<V>>,
    active_count: usize,
}

#[inline]
fn split<const D: usize>(idx: NodeIndex<D>) -> (NodeIndex<D>, usize) {
    let mut key = [0i32; D];
    let mut local = 0usize;
    for a in 0..D {
        key[a] = idx[a] >> BLOCK_BITS;
        local |= ((idx[a] & (BLOCK_WIDTH - 1)) as usize) << (BLOCK_BITS as usize * a);
    }
    (key, local)
}

#[inline]
fn join<const D: usize>(key: NodeIndex<D>, local: usize) -> NodeIndex<D> {
    let mut idx = [0i32; D];
    for a in 0..D {
        let l = ((local >> (BLOCK_BITS as usize * a)) & (BLOCK_WIDTH as usize - 1)) as i32;
        idx[a] = (key[a] << BLOCK_BITS) + l;
    }
    idx
}

impl<T: Real, V: Copy, const D: usize> SparseField<T, V, D> {
    pub fn new(descriptor: GridDescriptor<T, D>, background: V) -> Self {
        assert!(
            (BLOCK_WIDTH as usize).pow(D as u32) <= 64,
            "block occupancy must fit a u64 mask"
        );
        Self {
            descriptor,
            background,
            blocks: HashMap::new(),
            active_count: 0,
        }
    }

    pub fn descriptor(&self) -> &GridDescriptor<T, D> {
        &self.descriptor
    }

    pub fn background(&self) -> V {
        self.background
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn is_empty(&self) -> bool {
        self.active_count == 0
    }

    pub fn clear(&mut self) {
        self.blocks.clear();
        self.active_count = 0;
    }

    #[inline]
    pub fn is_active(&self, idx: NodeIndex<D>) -> bool {
        let (key, local) = split(idx);
        self.blocks
            .get(&key)
            .is_some_and(|b| b.active & (1u64 << local) != 0)
    }

    #[inline]
    pub fn get_opt(&self, idx: NodeIndex<D>) -> Option<V> {
        let (key, local) = split(idx);
        let b = self.blocks.get(&key)?;
        (b.active & (1u64 << local) != 0).then(|| b.values[local])
    }

    #[inline]
    pub fn get(&self, idx: NodeIndex<D>) -> V {
        self.get_opt(idx).unwrap_or(self.background)
    }

    /// Mutable access, activating the node with the background value if needed.
    #[inline]
    pub fn entry(&mut self, idx: NodeIndex<D>) -> &mut V {
        debug_assert!(
            self.descriptor.contains(idx),
            "sparse write at {idx:?} outside {:?}",
            self.descriptor.dims
        );
        let (key, local) = split(idx);
        let background = self.background;
        let block = self.blocks.entry(key).or_insert_with(|| Block {
            values: vec![background; 1usize << (BLOCK_BITS as usize * D)].into_boxed_slice(),
            active: 0,
        });
        let bit = 1u64 << local;
        if block.active & bit == 0 {
            block.active |= bit;
            self.active_count += 1;
        }
        &mut block.values[local]
    }

    #[inline]
    pub fn set(&mut self, idx: NodeIndex<D>, value: V) {
        *self.entry(idx) = value;
    }

    /// Active node indices in lexicographic order.
    pub fn active_indices(&self) -> Vec<NodeIndex<D>> {
        let mut out = Vec::with_capacity(self.active_count);
        for (key, block) in &self.blocks {
            let mut mask = block.active;
            while mask != 0 {
                let local = mask.trailing_zeros() as usize;
                out.push(join(*key, local));
                mask &= mask - 1;
            }
        }
        out.sort_unstable();
        out
    }

    /// Active `(index, value)` pairs in lexicographic index order.
    pub fn iter_sorted(&self) -> Vec<(NodeIndex<D>, V)> {
        self.active_indices()
            .into_iter()
            .map(|i| (i, self.get(i)))
            .collect()
    }

    /// Empty field on the same lattice with a different value type.
    pub fn like<W: Copy>(&self, background: W) -> SparseField<T, W, D> {
        SparseField::new(self.descriptor, background)
    }
}

impl<T: Real, V: Copy + AddAssign, const D: usize> SparseField<T, V, D> {
    #[inline]
    pub fn add(&mut self, idx: NodeIndex<D>, value: V) {
        *self.entry(idx) += value;
    }

    /// Adds every active node of `other` into `self`, in lexicographic order.
    pub fn merge_add(&mut self, other: &Self) {
        for (idx, v) in other.iter_sorted() {
            self.add(idx, v);
        }
    }
}
