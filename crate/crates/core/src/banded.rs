//! Symmetric positive definite band matrices and their Cholesky factorization.

/// Lower band storage: `data[i][d]` holds entry `(i, i - d)` for `d <= bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    bandwidth: usize,
    data: Vec<Vec<f64>>,
}

impl SymBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            data: vec![vec![0.0; bandwidth + 1]; n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        if d > self.bandwidth {
            0.0
        } else {
            self.data[r][d]
        }
    }

    /// Adds `v` to `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        assert!(
            d <= self.bandwidth,
            "entry ({i}, {j}) outside band {}",
            self.bandwidth
        );
        self.data[r][d] += v;
    }

    /// `self + factor * other`, both with the same size and bandwidth.
    pub fn plus_scaled(&self, other: &SymBand, factor: f64) -> SymBand {
        assert_eq!(self.n, other.n);
        assert_eq!(self.bandwidth, other.bandwidth);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + factor * y).collect())
            .collect();
        SymBand {
            n: self.n,
            bandwidth: self.bandwidth,
            data,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for d in 0..=self.bandwidth.min(i) {
                let j = i - d;
                let a = self.data[i][d];
                y[i] += a * x[j];
                if d > 0 {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Cholesky factor `L` with `A = L L^T`, or `None` when a pivot is not
    /// positive relative to the diagonal scale.
    pub fn cholesky(&self) -> Option<BandCholesky> {
        let n = self.n;
        let bw = self.bandwidth;
        let scale = self
            .data
            .iter()
            .map(|row| row[0].abs())
            .fold(0.0_f64, f64::max);
        let tol = scale * (n as f64) * f64::EPSILON * 16.0;
        let mut l = vec![vec![0.0; bw + 1]; n];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut sum = self.data[i][i - j];
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    sum -= l[i][i - k] * l[j][j - k];
                }
                if i == j {
                    if sum <= tol || !sum.is_finite() {
                        return None;
                    }
                    l[i][0] = sum.sqrt();
                } else {
                    l[i][i - j] = sum / l[j][0];
                }
            }
        }
        Some(BandCholesky {
            n,
            bandwidth: bw,
            l,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bandwidth: usize,
    l: Vec<Vec<f64>>,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let bw = self.bandwidth;
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = (i.saturating_sub(bw)..i)
                .map(|k| self.l[i][i - k] * y[k])
                .sum();
            y[i] = (y[i] - s) / self.l[i][0];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..(i + bw + 1).min(n))
                .map(|k| self.l[k][k - i] * y[k])
                .sum();
            y[i] = (y[i] - s) / self.l[i][0];
        }
        y
    }
}
