//! Band storage and LU factorization with partial pivoting.
//!
//! The assembled systems are pentadiagonal with wider first/last rows, so the
//! solver stores bandwidths (3, 3) and factors in O(k). A dense elimination
//! oracle lives in the test tree, never here.

use crate::scalar::Real;

#[derive(Debug, Clone, thiserror::Error)]
pub enum BandedError {
    #[error("matrix is singular: pivot column {pivot} is exactly zero")]
    Singular { pivot: usize },
    #[error("right-hand side has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Square banded matrix. Storage is by row: position `j - i + lower` holds
/// entry (i, j), with `lower` extra trailing slots per row reserved so a
/// factorization can grow the upper bandwidth under row pivoting.
#[derive(Debug, Clone)]
pub struct BandedMatrix<R> {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    bands: Vec<R>,
}

impl<R: Real> BandedMatrix<R> {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        let width = 2 * lower + upper + 1;
        BandedMatrix { n, lower, upper, width, bands: vec![R::zero(); n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i < self.n && j < self.n && j + self.lower >= i && j <= i + self.upper {
            Some(i * self.width + (j + self.lower - i))
        } else {
            None
        }
    }

    /// Entry (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> R {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of range for n = {}", self.n);
        self.slot(i, j).map_or(R::zero(), |s| self.bands[s])
    }

    /// Set entry (i, j). Panics outside the declared band: rows never get
    /// wider than the template says they are.
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        match self.slot(i, j) {
            Some(s) => self.bands[s] = v,
            None => panic!(
                "entry ({i}, {j}) is outside the ({}, {}) band of an n = {} matrix",
                self.lower, self.upper, self.n
            ),
        }
    }

    /// y = A x over the band only.
    #[allow(clippy::needless_range_loop)]
    pub fn mul_vec(&self, x: &[R]) -> Vec<R> {
        assert_eq!(x.len(), self.n, "vector length mismatch");
        (0..self.n)
            .map(|i| {
                let jlo = i.saturating_sub(self.lower);
                let jhi = usize::min(i + self.upper, self.n - 1);
                let mut acc = R::zero();
                for j in jlo..=jhi {
                    acc = acc + self.get(i, j) * x[j];
                }
                acc
            })
            .collect()
    }

    /// Max row sum of absolute values.
    pub fn inf_norm(&self) -> R {
        (0..self.n)
            .map(|i| {
                let jlo = i.saturating_sub(self.lower);
                let jhi = usize::min(i + self.upper, self.n - 1);
                let mut acc = R::zero();
                for j in jlo..=jhi {
                    acc = acc + self.get(i, j).abs();
                }
                acc
            })
            .fold(R::zero(), R::max)
    }

    /// Number of stored scalars: n * (2 lower + upper + 1), linear in n.
    pub fn storage_len(&self) -> usize {
        self.bands.len()
    }

    /// Dense copy, mostly for dumps and test oracles.
    pub fn to_dense(&self) -> Vec<Vec<R>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn lu(&self) -> Result<BandedLu<R>, BandedError> {
        BandedLu::factor(self)
    }
}

/// Row-pivoted LU of a banded matrix.
///
/// Working rows are kept left-aligned: during elimination every reduced row
/// shifts one slot left, so position 0 of working row r is always the current
/// pivot column. U ends up with upper bandwidth `lower + upper` inside rows of
/// width `lower + upper + 1`; multipliers are stored per elimination step.
#[derive(Debug, Clone)]
pub struct BandedLu<R> {
    n: usize,
    lower: usize,
    width: usize, // lower + upper + 1
    u: Vec<R>,
    mult: Vec<R>,       // mult[k * lower + (r - k - 1)]: step k, eliminated row r
    pivots: Vec<usize>, // row swapped with k at step k (k..=k+lower)
}

impl<R: Real> BandedLu<R> {
    fn factor(m: &BandedMatrix<R>) -> Result<Self, BandedError> {
        let n = m.n;
        let (m1, m2) = (m.lower, m.upper);
        let width = m1 + m2 + 1;
        // left-aligned working copy: row i starts at column max(0, i - m1)
        let mut u = vec![R::zero(); n * width];
        for i in 0..n {
            let jlo = i.saturating_sub(m1);
            let jhi = usize::min(i + m2, n - 1);
            for j in jlo..=jhi {
                u[i * width + (j - jlo)] = m.get(i, j);
            }
        }
        let mut mult = vec![R::zero(); n * m1];
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last = usize::min(k + m1, n - 1);
            let mut ipiv = k;
            let mut best = u[k * width].abs();
            for r in k + 1..=last {
                let v = u[r * width].abs();
                if v > best {
                    best = v;
                    ipiv = r;
                }
            }
            if best == R::zero() {
                return Err(BandedError::Singular { pivot: k });
            }
            pivots[k] = ipiv;
            if ipiv != k {
                for t in 0..width {
                    u.swap(k * width + t, ipiv * width + t);
                }
            }
            let pivval = u[k * width];
            for r in k + 1..=last {
                let f = u[r * width] / pivval;
                mult[k * m1 + (r - k - 1)] = f;
                for t in 1..width {
                    u[r * width + t - 1] = u[r * width + t] - f * u[k * width + t];
                }
                u[r * width + width - 1] = R::zero();
            }
        }
        Ok(BandedLu { n, lower: m1, width, u, mult, pivots })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Pivot row chosen at each elimination step.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// U entry (i, j). Unit-free: this is the upper factor itself.
    pub fn u_entry(&self, i: usize, j: usize) -> R {
        if j >= i && j < i + self.width && j < self.n {
            self.u[i * self.width + (j - i)]
        } else {
            R::zero()
        }
    }

    /// Solve A x = rhs using the stored factors.
    pub fn solve(&self, rhs: &[R]) -> Result<Vec<R>, BandedError> {
        if rhs.len() != self.n {
            return Err(BandedError::LengthMismatch { expected: self.n, got: rhs.len() });
        }
        let mut b = rhs.to_vec();
        let (n, m1, width) = (self.n, self.lower, self.width);
        for k in 0..n {
            let ip = self.pivots[k];
            if ip != k {
                b.swap(k, ip);
            }
            let last = usize::min(k + m1, n - 1);
            for r in k + 1..=last {
                b[r] = b[r] - self.mult[k * m1 + (r - k - 1)] * b[k];
            }
        }
        for i in (0..n).rev() {
            let tmax = usize::min(width - 1, n - 1 - i);
            let mut v = b[i];
            for t in 1..=tmax {
                v = v - self.u[i * width + t] * b[i + t];
            }
            b[i] = v / self.u[i * width];
        }
        Ok(b)
    }

    /// max |A - reconstruction| over all entries, where the reconstruction
    /// undoes every elimination step (add back multiples, unswap) on each
    /// column of U. Exact up to roundoff when the factorization is sound.
    /// O(n^2), meant for verification rather than production use.
    pub fn reconstruction_defect(&self, a: &BandedMatrix<R>) -> R {
        assert_eq!(a.n(), self.n);
        let (n, m1) = (self.n, self.lower);
        let mut worst = R::zero();
        let mut v = vec![R::zero(); n];
        for j in 0..n {
            for (i, slot) in v.iter_mut().enumerate() {
                *slot = self.u_entry(i, j);
            }
            for k in (0..n).rev() {
                let last = usize::min(k + m1, n - 1);
                for r in k + 1..=last {
                    v[r] = v[r] + self.mult[k * m1 + (r - k - 1)] * v[k];
                }
                v.swap(k, self.pivots[k]);
            }
            for (i, vi) in v.iter().enumerate() {
                worst = worst.max((*vi - a.get(i, j)).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, lo: f64, di: f64, up: f64) -> BandedMatrix<f64> {
        let mut m = BandedMatrix::zeros(n, 3, 3);
        for i in 0..n {
            if i > 0 {
                m.set(i, i - 1, lo);
            }
            m.set(i, i, di);
            if i + 1 < n {
                m.set(i, i + 1, up);
            }
        }
        m
    }

    #[test]
    fn identity_factors_trivially() {
        let mut m = BandedMatrix::<f64>::zeros(5, 3, 3);
        for i in 0..5 {
            m.set(i, i, 1.0);
        }
        let lu = m.lu().unwrap();
        assert_eq!(lu.pivots(), &[0, 1, 2, 3, 4]);
        let x = lu.solve(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(lu.reconstruction_defect(&m), 0.0);
    }

    #[test]
    fn three_by_three_matches_dense_oracle() {
        // [[2,1,0],[1,2,1],[0,1,2]] with rhs [1,0,0]; solution frozen from a
        // dense elimination oracle
        let m = tridiag(3, 1.0, 2.0, 1.0);
        let x = m.lu().unwrap().solve(&[1.0, 0.0, 0.0]).unwrap();
        let expect = [0.75, -0.5, 0.25];
        for (a, b) in x.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{x:?}");
        }
    }

    #[test]
    fn zero_matrix_is_singular() {
        let m = BandedMatrix::<f64>::zeros(4, 3, 3);
        match m.lu() {
            Err(BandedError::Singular { pivot }) => assert_eq!(pivot, 0),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn singular_error_names_the_failing_pivot() {
        // first two columns independent, third column makes column 2 of U zero
        let mut m = BandedMatrix::<f64>::zeros(3, 3, 3);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        m.set(2, 1, 1.0);
        // column 2 entirely zero
        match m.lu() {
            Err(BandedError::Singular { pivot }) => assert_eq!(pivot, 2),
            other => panic!("expected singular at pivot 2, got {other:?}"),
        }
    }

    #[test]
    fn pivoting_path_reconstructs() {
        // small diagonal forces row swaps immediately
        let mut m = tridiag(6, 3.0, 0.001, 2.0);
        m.set(0, 3, 0.5);
        m.set(5, 2, -1.25);
        let lu = m.lu().unwrap();
        assert!(lu.pivots()[0] != 0, "expected an immediate row swap");
        let defect = lu.reconstruction_defect(&m);
        assert!(defect <= 1e-12 * m.inf_norm(), "defect {defect:e}");
        let rhs: Vec<f64> = (0..6).map(|i| (i as f64) - 2.5).collect();
        let x = lu.solve(&rhs).unwrap();
        let back = m.mul_vec(&x);
        for (a, b) in back.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-10, "{back:?} vs {rhs:?}");
        }
    }

    #[test]
    fn length_mismatch_is_reported() {
        let m = tridiag(4, 1.0, 4.0, 1.0);
        let lu = m.lu().unwrap();
        match lu.solve(&[1.0, 2.0]) {
            Err(BandedError::LengthMismatch { expected: 4, got: 2 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn out_of_band_set_panics() {
        let result = std::panic::catch_unwind(|| {
            let mut m = BandedMatrix::<f64>::zeros(8, 3, 3);
            m.set(0, 4, 1.0);
        });
        assert!(result.is_err());
    }

    #[test]
    fn get_outside_band_is_zero() {
        let m = tridiag(8, 1.0, 4.0, 1.0);
        assert_eq!(m.get(0, 7), 0.0);
        assert_eq!(m.get(7, 0), 0.0);
    }
}
