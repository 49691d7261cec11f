//! Symmetric Suzuki-Trotter product formulas built by recursion from the
//! second-order palindrome.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hamiltonian::PartitionedHamiltonian;
use crate::statevector::State;
use crate::{Error, Result, C64};

/// Contracted exponential sequence of `S_{2m}^{(p)}` for `n_gamma` parts.
#[derive(Clone, Debug, PartialEq)]
pub struct TrotterScheme {
    m: usize,
    p: usize,
    n_gamma: usize,
    coefficients: Vec<f64>,
    part_index: Vec<usize>,
}

fn validate(m: usize, p: usize, n_gamma: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("Trotter order m must be >= 1"));
    }
    if p < 3 || p.is_multiple_of(2) {
        return Err(Error::invalid(format!("Trotter fan-out p must be odd and >= 3, got {}", p)));
    }
    if n_gamma < 2 {
        return Err(Error::invalid(format!("need at least two Hamiltonian parts, got {}", n_gamma)));
    }
    Ok(())
}

/// `2 (n_gamma - 1) p^{m-1} + 1`
pub fn depth(m: usize, p: usize, n_gamma: usize) -> Result<usize> {
    validate(m, p, n_gamma)?;
    let pow = p.checked_pow(m as u32 - 1).ok_or_else(|| Error::invalid("depth overflows"))?;
    Ok(2 * (n_gamma - 1) * pow + 1)
}

pub fn suzuki_coefficients(m: usize, p: usize, n_gamma: usize) -> Result<TrotterScheme> {
    let d = depth(m, p, n_gamma)?;
    if d > 1 << 24 {
        return Err(Error::invalid(format!("scheme depth {} is too large", d)));
    }
    let mut s = vec![0.5; 2 * n_gamma - 1];
    s[n_gamma - 1] = 1.0;
    let repeats = (p - 1) / 2;
    for level in 0..m - 1 {
        let pm1 = (p - 1) as f64;
        let k0 = 1.0 / (pm1 - pm1.powf(1.0 / (2 * level + 3) as f64));
        let k1 = 1.0 - pm1 * k0;
        // outer sub-blocks: p-1 copies of the previous scheme at k0,
        // neighbouring end exponentials merged
        let mut block: Vec<f64> = s[..s.len() - 1].iter().map(|x| x * k0).collect();
        block[0] *= 2.0;
        let mut outer: Vec<f64> = Vec::with_capacity(block.len() * repeats);
        for _ in 0..repeats {
            outer.extend_from_slice(&block);
        }
        outer[0] /= 2.0;
        let mut centre: Vec<f64> = s.iter().map(|x| x * k1).collect();
        centre[0] += outer[0];
        let last = centre.len() - 1;
        centre[last] = centre[0];
        let mut next = outer.clone();
        next.extend_from_slice(&centre);
        next.extend(outer.iter().rev());
        s = next;
    }
    debug_assert_eq!(s.len(), d);
    let period = 2 * n_gamma - 2;
    let part_index = (0..d)
        .map(|i| {
            let j = i % period;
            if j < n_gamma {
                j
            } else {
                period - j
            }
        })
        .collect();
    Ok(TrotterScheme { m, p, n_gamma, coefficients: s, part_index })
}

impl TrotterScheme {
    pub fn new(m: usize, p: usize, n_gamma: usize) -> Result<Self> {
        suzuki_coefficients(m, p, n_gamma)
    }

    /// `S_2`, the second-order palindrome.
    pub fn second_order(n_gamma: usize) -> Result<Self> {
        suzuki_coefficients(1, 3, n_gamma)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_gamma(&self) -> usize {
        self.n_gamma
    }

    pub fn depth(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn part_index(&self) -> &[usize] {
        &self.part_index
    }

    /// Running sums `T_i = s_1 + ... + s_i`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.coefficients
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect()
    }

    fn check(&self, h: &PartitionedHamiltonian) -> Result<()> {
        if h.num_parts() != self.n_gamma {
            return Err(Error::invalid(format!("scheme built for {} parts, Hamiltonian has {}", self.n_gamma, h.num_parts())));
        }
        Ok(())
    }
}

/// `S(dtau) = prod_i exp(-i dtau s_i H_{part(i)})`, in place.
pub fn apply_trotter_mut(scheme: &TrotterScheme, h: &PartitionedHamiltonian, dtau: f64, state: &mut State) -> Result<()> {
    apply_trotter_power_mut(scheme, h, dtau, 1, state)
}

pub fn apply_trotter(scheme: &TrotterScheme, h: &PartitionedHamiltonian, dtau: f64, state: &State) -> Result<State> {
    let mut out = state.clone();
    apply_trotter_mut(scheme, h, dtau, &mut out)?;
    Ok(out)
}

/// `S(dtau)^steps` with the touching end exponentials of consecutive steps
/// merged, `steps (D - 1) + 1` exponentials in total.
pub fn apply_trotter_power_mut(
    scheme: &TrotterScheme,
    h: &PartitionedHamiltonian,
    dtau: f64,
    steps: usize,
    state: &mut State,
) -> Result<()> {
    scheme.check(h)?;
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: state.dim() });
    }
    if steps == 0 {
        return Ok(());
    }
    let s = &scheme.coefficients;
    let parts = &scheme.part_index;
    let d = s.len();
    // rightmost factor acts first
    h.evolve_part_unchecked(parts[d - 1], dtau * s[d - 1], state);
    for step in 0..steps {
        for i in (1..d - 1).rev() {
            h.evolve_part_unchecked(parts[i], dtau * s[i], state);
        }
        let edge = if step + 1 < steps { s[0] + s[d - 1] } else { s[0] };
        h.evolve_part_unchecked(parts[0], dtau * edge, state);
    }
    Ok(())
}

pub fn apply_trotter_power(
    scheme: &TrotterScheme,
    h: &PartitionedHamiltonian,
    dtau: f64,
    steps: usize,
    state: &State,
) -> Result<State> {
    let mut out = state.clone();
    apply_trotter_power_mut(scheme, h, dtau, steps, &mut out)?;
    Ok(out)
}

/// `prod_i exp(-dtau s_i H_{part(i)})`, renormalizing after every factor when
/// `renormalize` is set.
pub fn apply_imaginary_trotter_mut(
    scheme: &TrotterScheme,
    h: &PartitionedHamiltonian,
    dtau: f64,
    state: &mut State,
    renormalize: bool,
) -> Result<()> {
    scheme.check(h)?;
    for i in (0..scheme.depth()).rev() {
        h.imaginary_evolve_part(scheme.part_index[i], dtau * scheme.coefficients[i], state)?;
        if renormalize {
            state.normalize()?;
        }
    }
    Ok(())
}

/// `<psi0|S(dtau)^l|psi0> - e^{-i E0 l dtau}` for `l = 1..=steps`.
pub fn propagator_deviation(
    h: &PartitionedHamiltonian,
    scheme: &TrotterScheme,
    dtau: f64,
    steps: usize,
    psi0: &State,
    e0: f64,
) -> Result<Vec<C64>> {
    let mut phi = psi0.clone();
    let mut out = Vec::with_capacity(steps);
    for l in 1..=steps {
        apply_trotter_mut(scheme, h, dtau, &mut phi)?;
        let exact = C64::from_polar(1.0, -e0 * l as f64 * dtau);
        out.push(psi0.inner(&phi)? - exact);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_hamiltonian, expm_hermitian};
    use crate::statevector::random_state;
    use approx::assert_abs_diff_eq;

    const M2P5: [f64; 11] = [
        0.20724538589718786,
        0.4144907717943757,
        0.4144907717943757,
        0.4144907717943757,
        -0.12173615769156357,
        -0.6579630871775028,
        -0.12173615769156357,
        0.4144907717943757,
        0.4144907717943757,
        0.4144907717943757,
        0.20724538589718786,
    ];

    #[test]
    fn second_order_base() {
        let s = suzuki_coefficients(1, 3, 2).unwrap();
        assert_eq!(s.coefficients(), &[0.5, 1.0, 0.5]);
        assert_eq!(s.part_index(), &[0, 1, 0]);
        let s3 = suzuki_coefficients(1, 5, 3).unwrap();
        assert_eq!(s3.coefficients(), &[0.5, 0.5, 1.0, 0.5, 0.5]);
        assert_eq!(s3.part_index(), &[0, 1, 2, 1, 0]);
    }

    #[test]
    fn fourth_order_p5_listing_values() {
        let s = suzuki_coefficients(2, 5, 2).unwrap();
        assert_eq!(s.depth(), 11);
        for (a, b) in s.coefficients().iter().zip(M2P5) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn depths() {
        for (m, p, g, d) in [(1, 3, 2, 3), (2, 3, 2, 7), (2, 5, 2, 11), (2, 7, 2, 15), (3, 3, 2, 19), (3, 5, 2, 51)] {
            assert_eq!(depth(m, p, g).unwrap(), d);
            assert_eq!(suzuki_coefficients(m, p, g).unwrap().depth(), d);
        }
        for p in [3, 5, 7, 9] {
            assert_eq!(depth(1, p, 4).unwrap(), 7);
        }
        assert!(depth(0, 3, 2).is_err());
        assert!(depth(1, 4, 2).is_err());
        assert!(depth(1, 3, 1).is_err());
    }

    #[test]
    fn identity_and_reversal() {
        let h = PartitionedHamiltonian::heisenberg_ring(6, 1.0).unwrap();
        let s = suzuki_coefficients(2, 3, 2).unwrap();
        let psi = random_state(6, 9).unwrap();
        assert_eq!(apply_trotter(&s, &h, 0.0, &psi).unwrap(), psi);
        let fwd = apply_trotter(&s, &h, 0.37, &psi).unwrap();
        let back = apply_trotter(&s, &h, -0.37, &fwd).unwrap();
        assert!(back.max_abs_diff(&psi) < 1e-12);
        assert!(apply_trotter(&suzuki_coefficients(1, 3, 3).unwrap(), &h, 0.1, &psi).is_err());
    }

    #[test]
    fn contracted_power_equals_repeats() {
        let h = PartitionedHamiltonian::heisenberg_ring(6, 1.0).unwrap();
        let s = suzuki_coefficients(2, 5, 2).unwrap();
        let psi = random_state(6, 2).unwrap();
        let mut rep = psi.clone();
        for _ in 0..4 {
            apply_trotter_mut(&s, &h, 0.2, &mut rep).unwrap();
        }
        let pow = apply_trotter_power(&s, &h, 0.2, 4, &psi).unwrap();
        assert!(pow.max_abs_diff(&rep) < 1e-13);
    }

    fn order_slope(m: usize, p: usize) -> f64 {
        let h = PartitionedHamiltonian::heisenberg_ring(4, 1.0).unwrap();
        let dense = dense_hamiltonian(&h, None);
        let s = suzuki_coefficients(m, p, 2).unwrap();
        let psi = random_state(4, 4).unwrap();
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let dts = [0.2, 0.1, 0.05, 0.025];
        let errs: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let exact = expm_hermitian(&dense, -dt) * &v;
                let got = apply_trotter(&s, &h, dt, &psi).unwrap();
                got.amplitudes().iter().zip(exact.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
            })
            .collect();
        let xs: Vec<f64> = dts.iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|x| x.ln()).collect();
        crate::metrics::linear_fit(&xs, &ys).unwrap().slope
    }

    #[test]
    fn local_error_orders() {
        for (m, p) in [(1, 3), (2, 3), (2, 5)] {
            let slope = order_slope(m, p);
            let expect = (2 * m + 1) as f64;
            assert!((slope - expect).abs() < 0.15, "m={} p={} slope {}", m, p, slope);
        }
    }

    #[test]
    fn deviation_vanishes_for_commuting_parts() {
        // a single-bond ring with both parts equal commutes exactly
        let h = PartitionedHamiltonian::heisenberg_ring(2, 1.0).unwrap();
        let g = h.exact_ground_state(1e-12).unwrap();
        let s = suzuki_coefficients(1, 3, 2).unwrap();
        let dk = propagator_deviation(&h, &s, 0.1, 20, &g.state, g.energy).unwrap();
        assert!(dk.iter().all(|d| d.norm() < 1e-10));
    }
}
