//! Classical Lanczos iterations with full reorthogonalization.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hamiltonian::{GroundState, PartitionedHamiltonian};
use crate::linalg::{symmetric_eigen, RMat};
use crate::statevector::State;
use crate::{Error, Result, C64};

const MAX_RESTARTS: usize = 400;

/// Krylov vectors kept per restart cycle, capped so they fit in ~256 MiB.
fn cycle_length(dim: usize) -> usize {
    let budget = (1usize << 28) / (16 * dim);
    budget.clamp(20, 80).min(dim)
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> RMat {
    let k = alpha.len();
    let mut t = RMat::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

fn orthogonalize(w: &mut State, basis: &[State]) {
    for _ in 0..2 {
        for v in basis {
            let c = v.inner(w).unwrap();
            w.axpy(-c, v).unwrap();
        }
    }
}

/// Rotates the global phase so the largest-modulus amplitude (first one on
/// ties) is real and positive.
pub(crate) fn fix_phase(state: &mut State) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, a) in state.amplitudes().iter().enumerate() {
        let m = a.norm();
        if m > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = m;
        }
    }
    if best_abs > 0.0 {
        let a = state.amplitudes()[best];
        state.scale(a.conj() / a.norm());
    }
}

pub(crate) fn lowest_eigenpair(
    h: &PartitionedHamiltonian,
    start: &State,
    tol_abs: f64,
    deflate: &[State],
) -> Result<GroundState> {
    let kmax = cycle_length(start.dim());
    let mut current = start.clone();
    orthogonalize(&mut current, deflate);
    current.normalize()?;
    let mut matvecs = 0;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<State> = vec![current.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz_y: Vec<f64> = vec![1.0];
        loop {
            let j = basis.len() - 1;
            let mut w = h.apply(&basis[j])?;
            matvecs += 1;
            let a = basis[j].inner(&w)?.re;
            alpha.push(a);
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, deflate);
            let b = w.norm();
            let (vals, vecs) = symmetric_eigen(&tridiagonal(&alpha, &beta));
            let _ = vals;
            ritz_y = (0..alpha.len()).map(|i| vecs[(i, 0)]).collect();
            let estimate = b * ritz_y[alpha.len() - 1].abs();
            if estimate < 0.1 * tol_abs || b < 1e-14 || basis.len() == kmax {
                break;
            }
            beta.push(b);
            w.scale(C64::new(1.0 / b, 0.0));
            basis.push(w);
        }
        let mut ritz = basis[0].zeros_like();
        for (v, y) in basis.iter().zip(&ritz_y) {
            ritz.axpy(C64::new(*y, 0.0), v)?;
        }
        orthogonalize(&mut ritz, deflate);
        ritz.normalize()?;
        let hv = h.apply(&ritz)?;
        matvecs += 1;
        let energy = ritz.inner(&hv)?.re;
        let mut r = hv.clone();
        r.axpy(C64::new(-energy, 0.0), &ritz)?;
        residual = r.norm();
        current = ritz;
        if residual <= tol_abs {
            fix_phase(&mut current);
            return Ok(GroundState { energy, state: current, residual, matvecs });
        }
    }
    Err(Error::NoConvergence { iterations: matvecs, residual })
}

/// `steps` Lanczos coefficients `(alpha_1.., beta_1..)` started from the
/// normalized `psi`; `beta_i` couples vectors `i` and `i+1`. Stops early on
/// an invariant subspace.
pub fn lanczos_coefficients(h: &PartitionedHamiltonian, psi: &State, steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = psi.clone();
    v.normalize()?;
    let mut basis = vec![v];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for _ in 0..steps {
        let j = basis.len() - 1;
        let mut w = h.apply(&basis[j])?;
        alpha.push(basis[j].inner(&w)?.re);
        orthogonalize(&mut w, &basis);
        let b = w.norm();
        beta.push(b);
        if b < 1e-13 * h.norm_bound() {
            break;
        }
        w.scale(C64::new(1.0 / b, 0.0));
        basis.push(w);
    }
    Ok((alpha, beta))
}

/// Gauss quadrature of the spectral measure of `psi`: Ritz values and
/// weights `|y_0|^2` from up to `max_steps` Lanczos steps.
pub fn spectral_quadrature(h: &PartitionedHamiltonian, psi: &State, max_steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (alpha, mut beta) = lanczos_coefficients(h, psi, max_steps)?;
    beta.truncate(alpha.len() - 1);
    let (vals, vecs) = symmetric_eigen(&tridiagonal(&alpha, &beta));
    let weights = (0..vals.len()).map(|j| vecs[(0, j)] * vecs[(0, j)]).collect();
    Ok((vals, weights))
}
