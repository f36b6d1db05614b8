use nalgebra::DMatrix;

use super::spectral::hermitian_eig;
use super::{OscillatorParams, SqueezeParameter, TruncationPolicy};
use crate::C64;

fn zeros(n: usize) -> DMatrix<C64> {
    DMatrix::from_element(n, n, C64::new(0.0, 0.0))
}

/// `a` with `a[n−1, n] = √n`.
pub fn make_annihilation(policy: &TruncationPolicy) -> DMatrix<C64> {
    let dim = policy.fock_cutoff();
    let mut a = zeros(dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn make_creation(policy: &TruncationPolicy) -> DMatrix<C64> {
    make_annihilation(policy).adjoint()
}

/// `a†a = diag(0, 1, …, N−1)`.
pub fn number_operator(policy: &TruncationPolicy) -> DMatrix<C64> {
    let dim = policy.fock_cutoff();
    DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Twice the position quadrature, `a + a†`.
pub fn quadrature_operator(policy: &TruncationPolicy) -> DMatrix<C64> {
    let a = make_annihilation(policy);
    let a_dag = a.adjoint();
    a + a_dag
}

/// `H = ω a†a + λ(a + a†)`: real symmetric tridiagonal.
pub fn make_hamiltonian(params: &OscillatorParams, policy: &TruncationPolicy) -> DMatrix<C64> {
    let dim = policy.fock_cutoff();
    let mut h = zeros(dim);
    for n in 0..dim {
        h[(n, n)] = C64::new(params.omega() * n as f64, 0.0);
        if n + 1 < dim {
            let off = C64::new(params.lambda() * ((n + 1) as f64).sqrt(), 0.0);
            h[(n, n + 1)] = off;
            h[(n + 1, n)] = off;
        }
    }
    h
}

/// `D(β) = exp(β a† − β* a)`, from the spectrum of the Hermitian generator
/// `G = i(β a† − β* a)` so that `D = exp(−iG)`.
pub fn displacement_operator(beta: C64, policy: &TruncationPolicy) -> DMatrix<C64> {
    let a = make_annihilation(policy);
    let a_dag = a.adjoint();
    let generator = (a_dag * beta - a * beta.conj()) * C64::i();
    let spectral = hermitian_eig(&generator).expect("displacement generator is Hermitian");
    spectral.unitary(1.0)
}

/// `S(z) = exp(½(z* a² − z a†²))`, from the spectrum of
/// `K = (i/2)(z* a² − z a†²)` so that `S = exp(−iK)`.
pub fn squeeze_operator(z: &SqueezeParameter, policy: &TruncationPolicy) -> DMatrix<C64> {
    let a = make_annihilation(policy);
    let a2 = &a * &a;
    let a_dag2 = a2.adjoint();
    let zc = z.z();
    let generator = (a2 * zc.conj() - a_dag2 * zc) * C64::new(0.0, 0.5);
    let spectral = hermitian_eig(&generator).expect("squeeze generator is Hermitian");
    spectral.unitary(1.0)
}
