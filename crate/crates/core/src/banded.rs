//! Banded matrices in packed storage.

use crate::error::{invalid, Error, Result};

/// Symmetric positive-definite banded matrix; only the lower band is stored.
///
/// Row `i` keeps `A[i][i-bw..=i]` at `data[i*(bw+1) .. (i+1)*(bw+1)]`, diagonal last.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        BandedSpd {
            n,
            bw: bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0);
        m.data.fill(1.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + self.bw + j - i
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Accumulate into the symmetric pair `(i, j)`, `(j, i)`; callers add each pair once.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside bandwidth {}", self.bw);
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Build from a dense square matrix, checking symmetry and that the band contains every nonzero.
    pub fn from_dense(a: &[Vec<f64>], bandwidth: usize) -> Result<Self> {
        let n = a.len();
        if a.iter().any(|r| r.len() != n) {
            return invalid("dense matrix is not square");
        }
        let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut m = Self::zeros(n, bandwidth);
        for i in 0..n {
            for j in 0..n {
                if (a[i][j] - a[j][i]).abs() > 1e-13 * scale {
                    return invalid(format!("matrix not symmetric at ({i}, {j})"));
                }
                if i.abs_diff(j) > bandwidth {
                    if a[i][j] != 0.0 {
                        return invalid(format!("nonzero ({i}, {j}) outside bandwidth {bandwidth}"));
                    }
                } else if j <= i {
                    let s = m.slot(i, j);
                    m.data[s] = a[i][j];
                }
            }
        }
        Ok(m)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.slot(i, j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += self.data[self.slot(i, i)] * x[i];
        }
        y
    }

    /// `x^T A y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Entrywise `self + s * other`, with matching shape.
    pub fn add_scaled(&self, s: f64, other: &BandedSpd) -> BandedSpd {
        assert_eq!((self.n, self.bw), (other.n, other.bw));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect();
        BandedSpd { n: self.n, bw: self.bw, data }
    }

    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let (n, bw) = (self.n, self.bw);
        let mut l = self.data.clone();
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = l[i * w + bw + j - i];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l[i * w + bw + k - i] * l[j * w + bw + k - j];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + bw + j - i] = s / l[j * w + bw];
                }
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }
}

/// Lower-triangular banded factor `L` with `A = L L^T`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_entry(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.bw {
            0.0
        } else {
            self.l[i * (self.bw + 1) + self.bw + j - i]
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let (n, bw) = (self.n, self.bw);
        if x.len() != n {
            return invalid(format!("rhs length {} does not match dimension {n}", x.len()));
        }
        let w = bw + 1;
        for i in 0..n {
            let mut s = x[i];
            for j in i.saturating_sub(bw)..i {
                s -= self.l[i * w + bw + j - i] * x[j];
            }
            x[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..(i + w).min(n) {
                s -= self.l[j * w + bw + i - j] * x[j];
            }
            x[i] = s / self.l[i * w + bw];
        }
        Ok(())
    }
}

/// General banded matrix factored by Gaussian elimination without pivoting.
///
/// Used for spline collocation systems, which are totally positive.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandedMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + self.kl + j - i
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    pub fn solve(mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return invalid(format!("rhs length {} does not match dimension {n}", rhs.len()));
        }
        let mut x = rhs.to_vec();
        for k in 0..n {
            let p = self.get(k, k);
            if p == 0.0 || !p.is_finite() {
                return Err(Error::SingularForm(format!("zero pivot at row {k} in banded elimination")));
            }
            for i in k + 1..(k + self.kl + 1).min(n) {
                let f = self.get(i, k) / p;
                if f == 0.0 {
                    continue;
                }
                for j in k..(k + self.ku + 1).min(n) {
                    let v = self.get(i, j) - f * self.get(k, j);
                    self.set(i, j, v);
                }
                x[i] -= f * x[k];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..(i + self.ku + 1).min(n) {
                s -= self.get(i, j) * x[j];
            }
            x[i] = s / self.get(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn tridiag(d: &[f64], o: &[f64]) -> BandedSpd {
        let mut m = BandedSpd::zeros(d.len(), 1);
        for (i, v) in d.iter().enumerate() {
            m.add(i, i, *v);
        }
        for (i, v) in o.iter().enumerate() {
            m.add(i + 1, i, *v);
        }
        m
    }

    #[test]
    fn identity_factor() {
        let f = BandedSpd::identity(5).cholesky().unwrap();
        for i in 0..5 {
            assert_eq!(f.factor_entry(i, i), 1.0);
        }
        assert_eq!(f.solve(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn zero_diagonal_rejected() {
        let m = tridiag(&[1.0, 0.0, 1.0], &[0.0, 0.0]);
        assert!(matches!(m.cholesky(), Err(Error::NotPositiveDefinite { row: 1, .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let f = BandedSpd::identity(3).cholesky().unwrap();
        assert!(f.solve(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn asymmetric_dense_rejected() {
        let a = vec![vec![2.0, 1.0], vec![0.5, 2.0]];
        assert!(BandedSpd::from_dense(&a, 1).is_err());
    }

    #[test]
    fn reconstructs_p1_mass() {
        let h = 0.25;
        let mut d = vec![4.0 * h / 6.0; 5];
        d[0] = 2.0 * h / 6.0;
        d[4] = 2.0 * h / 6.0;
        let g = tridiag(&d, &[h / 6.0; 4]);
        let f = g.cholesky().unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let llt: f64 = (0..5).map(|k| f.factor_entry(i, k) * f.factor_entry(j, k)).sum();
                assert!((llt - g.get(i, j)).abs() <= 1e-14);
            }
        }
        let x = f.solve(&g.mul_vec(&[1.0; 5])).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn general_banded_matches_dense() {
        let mut b = BandedMatrix::zeros(4, 1, 1);
        let dense = [[2.0, 1.0, 0.0, 0.0], [0.5, 3.0, 1.0, 0.0], [0.0, 0.25, 4.0, 1.0], [0.0, 0.0, 1.0, 2.0]];
        for i in 0usize..4 {
            for j in 0usize..4 {
                if i.abs_diff(j) <= 1 {
                    b.set(i, j, dense[i][j]);
                }
            }
        }
        let rhs = [1.0, -2.0, 3.0, 0.5];
        let x = b.solve(&rhs).unwrap();
        let a = DMatrix::from_fn(4, 4, |i, j| dense[i][j]);
        let y = a.lu().solve(&DVector::from_row_slice(&rhs)).unwrap();
        for i in 0..4 {
            assert!((x[i] - y[i]).abs() < 1e-13);
        }
    }

    fn spd_banded(n: usize, bw: usize, vals: &[f64]) -> BandedSpd {
        // diagonally dominant with random off-diagonals in [-1, 1]
        let mut m = BandedSpd::zeros(n, bw);
        let mut it = vals.iter().cycle();
        for i in 0..n {
            for j in i.saturating_sub(bw)..i {
                m.add(i, j, *it.next().unwrap());
            }
        }
        for i in 0..n {
            m.add(i, i, 2.0 * bw as f64 + 1.0 + it.next().unwrap().abs());
        }
        m
    }

    proptest! {
        #[test]
        fn random_spd_vs_dense(
            n in 2usize..12,
            bw in 0usize..4,
            vals in prop::collection::vec(-1.0f64..1.0, 64),
            rhs in prop::collection::vec(-10.0f64..10.0, 12),
        ) {
            let m = spd_banded(n, bw, &vals);
            let f = m.cholesky().unwrap();
            for i in 0..n {
                for j in 0..n {
                    let llt: f64 = (0..n).map(|k| f.factor_entry(i, k) * f.factor_entry(j, k)).sum();
                    prop_assert!((llt - m.get(i, j)).abs() <= 1e-12 * m.max_abs());
                }
            }
            let b = &rhs[..n];
            let x = f.solve(b).unwrap();
            let a = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
            let y = a.clone().lu().solve(&DVector::from_row_slice(b)).unwrap();
            for i in 0..n {
                prop_assert!((x[i] - y[i]).abs() <= 1e-10);
            }
            let r = m.mul_vec(&x);
            let xinf = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let binf = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for i in 0..n {
                prop_assert!((r[i] - b[i]).abs() <= 1e-10 * (m.max_abs() * xinf + binf));
            }
        }
    }
}
