/// Lower-triangular Cholesky factor stored row-packed.
///
/// Row `r` holds `r + 1` entries starting at offset `r (r + 1) / 2`, which
/// makes appending a bordered row a plain `extend`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct PackedCholesky {
    data: Vec<f64>,
    size: usize,
}

impl PackedCholesky {
    pub(crate) fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub(crate) fn row(&self, r: usize) -> &[f64] {
        let start = r * (r + 1) / 2;
        &self.data[start..start + r + 1]
    }

    pub(crate) fn diag(&self, r: usize) -> f64 {
        self.row(r)[r]
    }

    /// Factorizes a symmetric matrix given by its packed lower triangle.
    /// Returns `None` when a pivot is not strictly positive.
    pub(crate) fn factor(lower: &[f64], size: usize) -> Option<Self> {
        let mut l = Self {
            data: Vec::with_capacity(lower.len()),
            size: 0,
        };
        for r in 0..size {
            let start = r * (r + 1) / 2;
            l.push_row(&lower[start..start + r + 1])?;
        }
        Some(l)
    }

    /// Appends row/column `col` (its first `size()` entries are the
    /// off-diagonal covariances, the last is the diagonal entry).
    pub(crate) fn push_row(&mut self, col: &[f64]) -> Option<()> {
        let t = self.size;
        debug_assert_eq!(col.len(), t + 1);
        let mut row = vec![0.0; t + 1];
        self.forward_into(&col[..t], &mut row[..t]);
        let sq: f64 = row[..t].iter().map(|v| v * v).sum();
        let d2 = col[t] - sq;
        if !(d2 > 0.0) || !d2.is_finite() {
            return None;
        }
        row[t] = d2.sqrt();
        self.data.extend_from_slice(&row);
        self.size += 1;
        Some(())
    }

    /// Solves `L v = b`.
    pub(crate) fn forward_into(&self, b: &[f64], v: &mut [f64]) {
        for r in 0..self.size {
            let row = self.row(r);
            let mut acc = b[r];
            for (lv, vv) in row[..r].iter().zip(&v[..r]) {
                acc -= lv * vv;
            }
            v[r] = acc / row[r];
        }
    }

    /// Solves `L^T x = v` in place.
    pub(crate) fn backward_in_place(&self, x: &mut [f64]) {
        for r in (0..self.size).rev() {
            x[r] /= self.diag(r);
            let xr = x[r];
            let row = self.row(r);
            for (c, lv) in row[..r].iter().enumerate() {
                x[c] -= lv * xr;
            }
        }
    }

    /// Solves `(L L^T) x = b`.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.size];
        self.forward_into(b, &mut x);
        self.backward_in_place(&mut x);
        x
    }

    /// `sum_r ln L_rr`, i.e. half the log-determinant.
    pub(crate) fn half_log_det(&self) -> f64 {
        (0..self.size).map(|r| self.diag(r).ln()).sum()
    }

    pub(crate) fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.size != other.size {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
