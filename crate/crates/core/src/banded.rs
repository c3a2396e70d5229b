//! Banded matrices and LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored by rows with room for
/// the `kl` extra super-diagonals created by pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku, "({i}, {j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorization.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut piv = vec![0usize; n];
        let mut lower = vec![0.0; n * kl.max(1)];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix(k));
            }
            piv[k] = p;
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let d = self.get(k, k);
            for i in k + 1..=last {
                let l = self.get(i, k) / d;
                lower[k * kl.max(1) + (i - k - 1)] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let u = self.data[self.idx(k, j)];
                        if u != 0.0 {
                            let t = self.idx(i, j);
                            self.data[t] -= l * u;
                        }
                    }
                }
            }
        }
        Ok(BandLu { a: self, piv, lower })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    a: BandMatrix,
    piv: Vec<usize>,
    lower: Vec<f64>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.a.n;
        let kl = self.a.kl;
        let reach = kl + self.a.ku;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= self.lower[k * kl.max(1) + (i - k - 1)] * x[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + reach).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= self.a.get(k, j) * x[j];
            }
            x[k] = s / self.a.get(k, k);
        }
        x
    }
}
