//! Thomas algorithm for tridiagonal systems.

/// LU factors of a tridiagonal matrix, ready for repeated solves.
///
/// Row `i` reads `lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1]`;
/// `lower[0]` and `upper[n-1]` are ignored. No pivoting, so the matrix should
/// be diagonally dominant or otherwise safe for elimination in order.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    // pivots after elimination
    pivot: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn factor(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Option<Self> {
        let n = diag.len();
        assert!(lower.len() == n && upper.len() == n);
        let mut pivot = diag;
        for i in 1..n {
            if pivot[i - 1] == 0.0 || !pivot[i - 1].is_finite() {
                return None;
            }
            pivot[i] -= lower[i] / pivot[i - 1] * upper[i - 1];
        }
        if n > 0 && (pivot[n - 1] == 0.0 || !pivot[n - 1].is_finite()) {
            return None;
        }
        Some(Tridiagonal {
            lower,
            pivot,
            upper,
        })
    }

    pub fn len(&self) -> usize {
        self.pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivot.is_empty()
    }

    /// Diagonal entries after elimination. For a symmetric matrix these are the
    /// `D` of `LDL^T`, so their signs give the inertia.
    pub fn pivots(&self) -> &[f64] {
        &self.pivot
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.pivot.len();
        assert_eq!(rhs.len(), n);
        for i in 1..n {
            rhs[i] -= self.lower[i] / self.pivot[i - 1] * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivot[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.upper[i] * rhs[i + 1]) / self.pivot[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3, 5, 3] -> x = [1, 1, 1]
        let t = Tridiagonal::factor(
            vec![0.0, 1.0, 1.0],
            vec![2.0, 3.0, 2.0],
            vec![1.0, 1.0, 0.0],
        )
        .unwrap();
        let mut b = vec![3.0, 5.0, 3.0];
        t.solve_in_place(&mut b);
        for v in b {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_is_rejected() {
        assert!(Tridiagonal::factor(vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 0.0]).is_none());
    }
}
