use nalgebra::DMatrix;

use crate::C64;

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise modulus of `a − b`. Panics on shape mismatch.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Same as [`max_abs_diff`] restricted to the leading `size × size` block.
pub fn leading_block_max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>, size: usize) -> f64 {
    let lhs = a.view((0, 0), (size, size)).into_owned();
    let rhs = b.view((0, 0), (size, size)).into_owned();
    max_abs_diff(&lhs, &rhs)
}

/// `[a, b] = ab − ba`
pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}
