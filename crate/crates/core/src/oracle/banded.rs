//! Banded LU factorization without pivoting.
//!
//! The column networks assembled here are symmetric, diagonally dominant
//! conductance matrices, so elimination in natural order is stable.

/// Square band matrix with equal lower and upper half-bandwidth.
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    half: usize,
    // Row-major; row i holds columns i-half ..= i+half.
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SingularPivot {
    pub index: usize,
    pub pivot: f64,
}

impl BandMatrix {
    pub fn zeros(n: usize, half: usize) -> Self {
        Self {
            n,
            half,
            data: vec![0.0; n * (2 * half + 1)],
        }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.half);
        i * (2 * self.half + 1) + (j + self.half - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.half {
            0.0
        } else {
            self.data[self.offset(i, j)]
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    /// In-place LU; `L` has a unit diagonal and is stored below it.
    pub fn factor(mut self) -> Result<BandLu, SingularPivot> {
        let n = self.n;
        let p = self.half;
        for k in 0..n {
            let pivot = self.get(k, k);
            if !pivot.is_finite() || pivot.abs() <= f64::MIN_POSITIVE {
                return Err(SingularPivot { index: k, pivot });
            }
            let last = (k + p).min(n - 1);
            for i in k + 1..=last {
                let lik = self.get(i, k) / pivot;
                if lik == 0.0 {
                    continue;
                }
                let o = self.offset(i, k);
                self.data[o] = lik;
                for j in k + 1..=last {
                    let ukj = self.get(k, j);
                    if ukj != 0.0 {
                        self.add(i, j, -lik * ukj);
                    }
                }
            }
        }
        Ok(BandLu { m: self })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.m.n;
        let p = self.m.half;
        assert_eq!(rhs.len(), n);
        let mut x = rhs.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(p)..i {
                s -= self.m.get(i, k) * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + p).min(n - 1) {
                s -= self.m.get(i, j) * x[j];
            }
            x[i] = s / self.m.get(i, i);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1] -> x = [1 1 1]
        let mut a = BandMatrix::zeros(3, 1);
        for i in 0..3 {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
                a.add(i - 1, i, -1.0);
            }
        }
        let x = a.factor().unwrap().solve(&[1.0, 0.0, 1.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn solves_pentadiagonal_against_dense() {
        let n = 9;
        let mut a = BandMatrix::zeros(n, 2);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                let v = if i == j { 6.0 } else { -1.0 / (1.0 + (i + j) as f64) };
                a.add(i, j, v);
                dense[i][j] = v;
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| dense[i][j] * x_true[j]).sum())
            .collect();
        let x = a.factor().unwrap().solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let a = BandMatrix::zeros(2, 1);
        assert_eq!(a.factor().unwrap_err().index, 0);
    }
}
