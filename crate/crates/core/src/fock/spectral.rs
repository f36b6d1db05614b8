use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::matrix::{max_abs, max_abs_diff};
use crate::{Error, Result, C64};

/// Relative Hermiticity tolerance accepted by [`hermitian_eig`].
const HERMITIAN_TOL: f64 = 1e-10;

/// `H = V diag(E) V†` with ascending `E` and unitary `V`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Columns are eigenvectors.
    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(E)) V†`.
    pub fn apply_fn<F>(&self, f: F) -> DMatrix<C64>
    where
        F: Fn(f64) -> C64,
    {
        let mut scaled = self.eigenvectors.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let fe = f(e);
            for x in scaled.column_mut(j).iter_mut() {
                *x *= fe;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `exp(−i s H)` for real `s`.
    pub fn unitary(&self, s: f64) -> DMatrix<C64> {
        self.apply_fn(|e| C64::from_polar(1.0, -s * e))
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        self.apply_fn(|e| C64::new(e, 0.0))
    }

    /// Largest gap `E_max − E_min`.
    pub fn spread(&self) -> f64 {
        let n = self.dim();
        self.eigenvalues[n - 1] - self.eigenvalues[0]
    }

    /// `V† M V`: `m` expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// `V M V†`: inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }
}

/// Diagonalize a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eig(h: &DMatrix<C64>) -> Result<SpectralDecomposition> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    let h_dag = h.adjoint();
    let defect = max_abs_diff(h, &h_dag);
    if defect > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let symmetric = (h + h_dag).scale(0.5);
    let eig = SymmetricEigen::new(symmetric);

    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_hamiltonian, OscillatorParams, TruncationPolicy};
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn diagonal_input() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(8.0), c(0.0), c(4.0)]));
        let s = hermitian_eig(&h).unwrap();
        assert_eq!(s.eigenvalues().as_slice(), &[0.0, 4.0, 8.0]);
        // columns are (up to phase) unit vectors e1, e2, e0
        for (col, idx) in [(0, 1), (1, 2), (2, 0)] {
            assert!((s.eigenvectors()[(idx, col)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = DMatrix::from_element(2, 2, c(0.0));
        h[(0, 1)] = c(1.0);
        assert!(matches!(hermitian_eig(&h), Err(Error::NotHermitian { .. })));
        let rect = DMatrix::from_element(2, 3, c(0.0));
        assert!(matches!(
            hermitian_eig(&rect),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn displaced_oscillator_gaps() {
        let params = OscillatorParams::new(4.0, 0.7, 10.0).unwrap();
        let policy = TruncationPolicy::new(64).unwrap();
        let s = hermitian_eig(&make_hamiltonian(&params, &policy)).unwrap();
        let e = s.eigenvalues();
        // exact displaced spectrum ωn − λ²/ω away from the cutoff
        assert!((e[0] + 0.1225).abs() < 1e-8);
        assert!((e[1] - 3.8775).abs() < 1e-8);
        assert!((e[2] - 7.8775).abs() < 1e-8);
        for n in 0..50 {
            assert!((e[n + 1] - e[n] - 4.0).abs() < 1e-8, "gap {n}");
        }
    }

    fn random_hermitian(entries: &[(f64, f64)], n: usize) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(n, n, c(0.0));
        let mut it = entries.iter();
        for i in 0..n {
            for j in i..n {
                let &(re, im) = it.next().unwrap();
                if i == j {
                    m[(i, i)] = c(re);
                } else {
                    m[(i, j)] = C64::new(re, im);
                    m[(j, i)] = C64::new(re, -im);
                }
            }
        }
        m
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn reconstruction_and_unitarity(
            entries in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 32 * 33 / 2)
        ) {
            let h = random_hermitian(&entries, 32);
            let s = hermitian_eig(&h).unwrap();
            let scale = max_abs(&h);
            prop_assert!(max_abs_diff(&s.reconstruct(), &h) <= 1e-10 * scale);
            let vv = s.eigenvectors().adjoint() * s.eigenvectors();
            prop_assert!(max_abs_diff(&vv, &DMatrix::identity(32, 32)) <= 1e-10);
            let e = s.eigenvalues();
            prop_assert!(e.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
