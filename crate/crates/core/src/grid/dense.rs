use super::descriptor::{GridDescriptor, NodeIndex};
use crate::scalar::Real;

/// Field storing every node of its lattice, x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseField<T: Real, V, const D: usize> {
    descriptor: GridDescriptor<T, D>,
    values: Vec<V>,
}

impl<T: Real, V: Copy, const D: usize> DenseField<T, V, D> {
    pub fn filled(descriptor: GridDescriptor<T, D>, value: V) -> Self {
        Self {
            values: vec![value; descriptor.node_count()],
            descriptor,
        }
    }

    pub fn from_fn(descriptor: GridDescriptor<T, D>, mut f: impl FnMut(NodeIndex<D>) -> V) -> Self {
        let values = (0..descriptor.node_count())
            .map(|lin| f(descriptor.node_index(lin)))
            .collect();
        Self { descriptor, values }
    }

    pub fn from_vec(descriptor: GridDescriptor<T, D>, values: Vec<V>) -> Self {
        assert_eq!(values.len(), descriptor.node_count());
        Self { descriptor, values }
    }

    pub fn descriptor(&self) -> &GridDescriptor<T, D> {
        &self.descriptor
    }

    #[inline]
    pub fn get(&self, idx: NodeIndex<D>) -> V {
        self.values[self.descriptor.linear_index(idx)]
    }

    /// Read with the index clamped into range (zero-gradient extension).
    #[inline]
    pub fn get_clamped(&self, idx: NodeIndex<D>) -> V {
        self.get(self.descriptor.clamp_index(idx))
    }

    #[inline]
    pub fn set(&mut self, idx: NodeIndex<D>, v: V) {
        let lin = self.descriptor.linear_index(idx);
        self.values[lin] = v;
    }

    #[inline]
    pub fn get_mut(&mut self, idx: NodeIndex<D>) -> &mut V {
        let lin = self.descriptor.linear_index(idx);
        &mut self.values[lin]
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [V] {
        &mut self.values
    }

    pub fn indices(&self) -> impl Iterator<Item = NodeIndex<D>> + '_ {
        (0..self.values.len()).map(|lin| self.descriptor.node_index(lin))
    }

    pub fn map<W: Copy>(&self, f: impl Fn(V) -> W) -> DenseField<T, W, D> {
        DenseField {
            descriptor: self.descriptor,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }
}
