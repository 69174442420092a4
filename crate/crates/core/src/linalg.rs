//! Thin helpers over `nalgebra` for the dense matrices used throughout.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Maximum entry-wise deviation from symmetry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Maximum entry-wise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a real symmetric matrix with eigenvalues ascending.
pub fn eigh_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let order = ascending_order(eig.eigenvalues.as_slice());
    let n = m.nrows();
    let mut vecs = DMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vecs.set_column(new, &eig.eigenvectors.column(old));
    }
    (order.iter().map(|&k| eig.eigenvalues[k]).collect(), vecs)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    // Real-valued input goes through the faster real path.
    if m.iter().all(|z| z.im == 0.0) {
        let re = m.map(|z| z.re);
        let (vals, vecs) = eigh_real(&re);
        return (vals, vecs.map(|x| Complex64::new(x, 0.0)));
    }
    let eig = SymmetricEigen::new(m.clone());
    let order = ascending_order(eig.eigenvalues.as_slice());
    let mut vecs = CMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vecs.set_column(new, &eig.eigenvectors.column(old));
    }
    (order.iter().map(|&k| eig.eigenvalues[k]).collect(), vecs)
}

fn ascending_order(vals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    order
}

/// Kronecker product of a list of square matrices, leftmost factor slowest.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for f in factors {
        acc = acc.kronecker(f);
    }
    acc
}

/// `exp(-i H t)` for Hermitian `H` via its spectral decomposition.
pub fn unitary_exp(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let phases = DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
    );
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    &scaled * vecs.adjoint()
}

/// Commutator `[A, B]`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}
