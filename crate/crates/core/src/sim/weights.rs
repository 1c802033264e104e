//! Excitatory weight matrix with lazily applied row-uniform decay.
//!
//! Each row (one excitatory neuron) carries a pending affine transform so that
//! the effective weight is `max(0, stored * scale - shift)`. Exponential decay
//! multiplies `scale` and `shift`; linear decay adds to `shift`. Both commute
//! with the clamp at zero, so a row can absorb any sequence of decay steps in
//! O(1) and is only materialised when a per-synapse update touches it.
//!
//! Storage is input-major so that delivering one input spike to every neuron
//! reads a contiguous column.

/// Rows whose pending scale falls below this are materialised to keep the
/// stored values in range.
const RENORM_FLOOR: f64 = 1e-150;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    /// `data[col * rows + row]`.
    data: Vec<f64>,
    scale: Vec<f64>,
    shift: Vec<f64>,
}

impl WeightMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_vec(rows, cols, vec![0.0; rows * cols])
    }

    /// From row-major values (`data[row * cols + col]`).
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "weight buffer size");
        let mut t = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                t[c * rows + r] = data[r * cols + c];
            }
        }
        Self {
            rows,
            cols,
            data: t,
            scale: vec![1.0; rows],
            shift: vec![0.0; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn is_identity(&self, row: usize) -> bool {
        self.scale[row] == 1.0 && self.shift[row] == 0.0
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let w = self.data[col * self.rows + row];
        if self.is_identity(row) {
            w
        } else {
            (w * self.scale[row] - self.shift[row]).max(0.0)
        }
    }

    /// Adds column `col` (effective values) into `out`, one entry per row.
    #[inline]
    pub fn accumulate_column(&self, col: usize, out: &mut [f64]) {
        let column = &self.data[col * self.rows..(col + 1) * self.rows];
        for (((acc, &w), &s), &c) in out.iter_mut().zip(column).zip(&self.scale).zip(&self.shift) {
            *acc += (w * s - c).max(0.0);
        }
    }

    pub fn materialize_row(&mut self, row: usize) {
        if self.is_identity(row) {
            return;
        }
        let (s, c) = (self.scale[row], self.shift[row]);
        for w in self.data[row..].iter_mut().step_by(self.rows) {
            *w = (*w * s - c).max(0.0);
        }
        self.scale[row] = 1.0;
        self.shift[row] = 0.0;
    }

    pub fn materialize(&mut self) {
        for r in 0..self.rows {
            self.materialize_row(r);
        }
    }

    /// Replaces every weight of `row` with `f(col, w)`, clamped to `[0, w_max]`.
    pub fn update_row(&mut self, row: usize, w_max: f64, mut f: impl FnMut(usize, f64) -> f64) {
        self.materialize_row(row);
        for (col, w) in self.data[row..].iter_mut().step_by(self.rows).enumerate() {
            *w = f(col, *w).clamp(0.0, w_max);
        }
    }

    /// Sets `w := clamp(f(w))` for the synapses of `row` from the listed inputs.
    #[inline]
    pub fn update_entries(&mut self, row: usize, cols: &[usize], w_max: f64, mut f: impl FnMut(usize, f64) -> f64) {
        self.materialize_row(row);
        for &col in cols {
            let w = &mut self.data[col * self.rows + row];
            *w = f(col, *w).clamp(0.0, w_max);
        }
    }

    pub fn row_values(&self, row: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    /// `w := w * factor` for the whole row; `factor` in (0, 1].
    #[inline]
    pub fn scale_row(&mut self, row: usize, factor: f64) {
        debug_assert!(factor > 0.0);
        self.scale[row] *= factor;
        self.shift[row] *= factor;
        if self.scale[row] < RENORM_FLOOR {
            self.materialize_row(row);
        }
    }

    /// `w := max(0, w - amount)` for the whole row; `amount >= 0`.
    #[inline]
    pub fn subtract_row(&mut self, row: usize, amount: f64) {
        debug_assert!(amount >= 0.0);
        self.shift[row] += amount;
    }

    /// Multiplies every row by the same factor.
    pub fn scale_all(&mut self, factor: f64) {
        for r in 0..self.rows {
            self.scale_row(r, factor);
        }
    }

    pub fn clamp(&mut self, w_max: f64) {
        self.materialize();
        clamp_weights(&mut self.data, w_max);
    }

    /// Row-major effective weights.
    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.rows).flat_map(|r| self.row_values(r)).collect()
    }

    /// Mean effective weight.
    pub fn mean(&self) -> f64 {
        let n = self.rows * self.cols;
        if n == 0 {
            return 0.0;
        }
        let mut sums = vec![0.0; self.rows];
        for col in 0..self.cols {
            self.accumulate_column(col, &mut sums);
        }
        sums.iter().sum::<f64>() / n as f64
    }
}

pub fn clamp_weights(weights: &mut [f64], w_max: f64) {
    for w in weights {
        *w = w.clamp(0.0, w_max);
    }
}
