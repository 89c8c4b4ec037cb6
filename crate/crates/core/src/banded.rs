//! Complex banded LU factorization with partial pivoting.

use num_complex::Complex64;

/// Square band matrix with `kl` sub- and `ku` super-diagonals.  Storage keeps
/// `kl` extra super-diagonals for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![Complex64::new(0.0, 0.0); n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j + self.kl < i || j > i + self.ku {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Sets an entry inside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// `A x` for the unfactored matrix.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Factors in place.  Returns `None` on an exactly zero or non-finite pivot.
    pub fn factor(mut self) -> Option<BandLu> {
        let n = self.n;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.ku + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l.norm() == 0.0 {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Some(BandLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let a = &self.m;
        let n = a.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for i in k + 1..=(k + a.kl).min(n - 1) {
                x[i] -= a.data[a.idx(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + a.ku + a.kl).min(n - 1) {
                s -= a.data[a.idx(i, j)] * x[j];
            }
            x[i] = s / a.data[a.idx(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    proptest! {
        #[test]
        fn solve_inverts_mul(seed in proptest::collection::vec(-1.0f64..1.0, 200), n in 3usize..25, kl in 0usize..4, ku in 0usize..4) {
            let mut a = BandMatrix::zeros(n, kl, ku);
            let mut it = seed.iter().cycle();
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    let v = c(*it.next().unwrap(), *it.next().unwrap());
                    // weak diagonal forces pivoting on many draws
                    a.set(i, j, if i == j { v * 0.1 } else { v });
                }
            }
            let x: Vec<_> = (0..n).map(|i| c(i as f64 - 3.0, 0.5 * i as f64)).collect();
            let b = a.mul_vec(&x);
            if let Some(lu) = a.clone().factor() {
                let y = lu.solve(&b);
                let r = a.mul_vec(&y);
                let rn: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
                // backward stability: the residual is small relative to |A| |y|
                let an: f64 = (0..n).map(|i| (0..n).map(|j| a.get(i, j).norm()).sum::<f64>()).fold(0.0, f64::max);
                let yn: f64 = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let bn: f64 = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
                prop_assert!(rn <= 1e-12 * (an * yn + bn), "{rn} {an} {yn}");
            }
        }
    }

    #[test]
    fn tridiagonal_known_solution() {
        let n = 6;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, c(2.0, 0.0));
            if i > 0 {
                a.set(i, i - 1, c(-1.0, 0.0));
            }
            if i + 1 < n {
                a.set(i, i + 1, c(-1.0, 0.0));
            }
        }
        let b = vec![c(1.0, 0.0); n];
        let x = a.clone().factor().unwrap().solve(&b);
        // solution of the discrete Poisson problem: x_i = (i+1)(n-i)/2
        for (i, v) in x.iter().enumerate() {
            let e = ((i + 1) * (n - i)) as f64 / 2.0;
            assert!((v.re - e).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }
}
