/// Sparse spike vector over a population: sorted indices of the units that
/// fired in one timestep.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpikeSet {
    len: usize,
    indices: Vec<usize>,
}

impl SpikeSet {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            indices: Vec::new(),
        }
    }

    pub fn from_indices(len: usize, mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        assert!(indices.last().map_or(true, |&i| i < len), "spike index out of range");
        Self { len, indices }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let indices = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        Self {
            len: bits.len(),
            indices,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn count(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = vec![false; self.len];
        for &i in &self.indices {
            bits[i] = true;
        }
        bits
    }

    pub fn clear(&mut self) {
        self.indices.clear();
    }

    pub fn reset(&mut self, len: usize) {
        self.len = len;
        self.indices.clear();
    }

    /// Appends an index; callers push in increasing order.
    #[inline]
    pub fn push(&mut self, i: usize) {
        debug_assert!(i < self.len);
        debug_assert!(self.indices.last().map_or(true, |&l| l < i));
        self.indices.push(i);
    }
}
