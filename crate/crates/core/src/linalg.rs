//! Small dense helpers on top of nalgebra: Hermitian eigensolves and dense
//! operator builders for cross-checks on a few qubits.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hamiltonian::PartitionedHamiltonian;
use crate::statevector::PauliString;
use crate::C64;

pub type CMat = nalgebra::DMatrix<C64>;
pub type RMat = nalgebra::DMatrix<f64>;

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let sym = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ascending eigenvalues and eigenvectors of a real symmetric matrix.
pub fn symmetric_eigen(a: &RMat) -> (Vec<f64>, RMat) {
    let n = a.nrows();
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = RMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `e^{i t A}` for Hermitian `A` by eigendecomposition.
pub fn expm_hermitian(a: &CMat, t: f64) -> CMat {
    let (w, v) = hermitian_eigen(a);
    let mut scaled = v.clone();
    for (j, lam) in w.iter().enumerate() {
        let ph = C64::from_polar(1.0, t * lam);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= ph;
        }
    }
    scaled * v.adjoint()
}

/// `f(A)` for Hermitian `A` and a real function of the eigenvalues.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (w, v) = hermitian_eigen(a);
    let mut scaled = v.clone();
    for (j, lam) in w.iter().enumerate() {
        let s = f(*lam);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= s;
        }
    }
    scaled * v.adjoint()
}

/// Dense matrix of a Pauli string on `n_qubits` (qubit 1 least significant).
pub fn dense_pauli(n_qubits: usize, p: &PauliString) -> CMat {
    let dim = 1usize << n_qubits;
    let m = p.mask();
    let c = p.coeff * m.phase;
    let mut out = CMat::zeros(dim, dim);
    for b in 0..dim {
        let sign = if (b & m.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        out[(b ^ m.x, b)] += c * sign;
    }
    out
}

/// Dense matrix of one part, or of the whole Hamiltonian when `part` is None.
pub fn dense_hamiltonian(h: &PartitionedHamiltonian, part: Option<usize>) -> CMat {
    let dim = 1usize << h.n_qubits();
    let mut out = CMat::zeros(dim, dim);
    for (g, terms) in h.parts().iter().enumerate() {
        if part.is_some_and(|p| p != g) {
            continue;
        }
        for t in terms {
            out += dense_pauli(h.n_qubits(), t);
        }
    }
    out
}
