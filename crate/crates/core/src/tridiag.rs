//! Constant-coefficient tridiagonal solves (Thomas algorithm).

/// LU factors of the symmetric Toeplitz tridiagonal matrix with `diag` on the
/// main diagonal and `off` on both neighbours, of order `n`.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    // Forward multipliers `off / pivot[i-1]` (index 0 unused).
    lower: Vec<f64>,
    // Inverted pivots and `off / pivot[i]` for the back substitution.
    inv_pivot: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(n: usize, diag: f64, off: f64) -> Self {
        let mut inv_pivot = Vec::with_capacity(n);
        let mut prev = 0.0;
        for i in 0..n {
            let piv = if i == 0 { diag } else { diag - off * off * prev };
            prev = 1.0 / piv;
            inv_pivot.push(prev);
        }
        let lower = (0..n).map(|i| if i == 0 { 0.0 } else { off * inv_pivot[i - 1] }).collect();
        let upper = inv_pivot.iter().map(|q| off * q).collect();
        Self { lower, inv_pivot, upper }
    }

    /// Solves in place: `rhs` becomes the solution.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.inv_pivot.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        let (lower, inv, upper) = (&self.lower[..n], &self.inv_pivot[..n], &self.upper[..n]);
        for i in 1..n {
            rhs[i] -= lower[i] * rhs[i - 1];
        }
        for i in 0..n {
            rhs[i] *= inv[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= upper[i] * rhs[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [[4,1,0],[1,4,1],[0,1,4]] x = [5,6,5] -> x = [1,1,1]
        let t = Tridiagonal::new(3, 4.0, 1.0);
        let mut b = vec![5.0, 6.0, 5.0];
        t.solve(&mut b);
        for v in b {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_dense_product() {
        let n = 50;
        let (d, o) = (1.5, -0.25);
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64).sin()).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = d * x[i];
                if i > 0 {
                    s += o * x[i - 1];
                }
                if i + 1 < n {
                    s += o * x[i + 1];
                }
                s
            })
            .collect();
        Tridiagonal::new(n, d, o).solve(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-13);
        }
    }
}
