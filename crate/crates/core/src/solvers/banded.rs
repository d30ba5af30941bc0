//! Banded LU with partial pivoting, row-oriented storage.

use crate::error::{Error, Result};

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
///
/// Each row keeps room for `lower` extra super-diagonals of fill from pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        BandMatrix {
            n,
            lower,
            upper,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.lower >= i && j <= i + self.lower + self.upper);
        i * self.width + j + self.lower - i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.lower < i || j > i + self.upper {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Add `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.lower >= i && j <= i + self.upper,
            "entry ({i}, {j}) outside the band"
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Factor in place and solve `A x = b`.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let reach = self.lower + self.upper;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + self.lower).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.slot(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(k));
            }
            pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, c) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(a, c);
                }
            }
            let diag = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let l = self.data[s] / diag;
                self.data[s] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=last_col {
                    let (src, dst) = (self.slot(k, j), self.slot(i, j));
                    self.data[dst] -= l * self.data[src];
                }
            }
        }
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, pivots[k]);
            let xk = x[k];
            for i in k + 1..=(k + self.lower).min(n - 1) {
                x[i] -= self.data[self.slot(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                acc -= self.data[self.slot(i, j)] * x[j];
            }
            x[i] = acc / self.data[self.slot(i, i)];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn agrees_with_dense_lu() {
        // pseudo-random band entries with small diagonals to force pivoting
        let (n, lo, up) = (40, 3, 2);
        let mut band = BandMatrix::zeros(n, lo, up);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        let mut state = 12345u64;
        for i in 0..n {
            for j in i.saturating_sub(lo)..=(i + up).min(n - 1) {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let mut v = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                if i == j {
                    v *= 1e-3;
                }
                band.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = band.solve(&b).unwrap();
        let expected = dense.lu().solve(&DVector::from_vec(b)).unwrap();
        for i in 0..n {
            assert!((x[i] - expected[i]).abs() < 1e-8 * (1.0 + expected[i].abs()));
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut a = BandMatrix::zeros(3, 1, 1);
        a.add(0, 0, 1.0);
        a.add(2, 2, 1.0);
        assert!(matches!(a.solve(&[1.0, 1.0, 1.0]), Err(Error::Singular(1))));
    }
}
