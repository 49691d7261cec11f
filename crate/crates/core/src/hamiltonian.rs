//! Partitioned Pauli-sum Hamiltonians: the periodic Heisenberg ring, the
//! 4x2 Hubbard ladder under Jordan-Wigner, and user-supplied term lists.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::lanczos;
pub use crate::lanczos::{lanczos_coefficients, spectral_quadrature};
use crate::statevector::{
    accumulate_pauli, check_commuting, random_phase_state, rotate_imag, rotate_real, same_dim, Pauli, PauliMask, PauliString,
    State, MAX_QUBITS,
};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelTag {
    HeisenbergRing,
    HubbardLadder4x2,
    Custom,
}

/// Sites of the 4x2 ladder are numbered so that rungs are `(2k-1, 2k)` and
/// each leg is a path alternating between odd and even sites.
pub const LADDER_RUNGS: [(usize, usize); 4] = [(1, 2), (3, 4), (5, 6), (7, 8)];
/// First, third... bond along each leg (legs 1-4-5-8 and 2-3-6-7).
pub const LADDER_ODD_LEGS: [(usize, usize); 4] = [(1, 4), (5, 8), (2, 3), (6, 7)];
pub const LADDER_EVEN_LEGS: [(usize, usize); 2] = [(4, 5), (3, 6)];
pub const LADDER_SITES: usize = 8;

#[derive(Clone, Debug)]
pub struct PartitionedHamiltonian {
    n_qubits: usize,
    parts: Vec<Vec<PauliString>>,
    masks: Vec<Vec<(PauliMask, f64)>>,
    locality: usize,
    model: ModelTag,
    coupling: f64,
}

impl PartitionedHamiltonian {
    /// Validates qubit range, real coefficients and commutation inside every
    /// part (symbolically always, densely as well for up to 12 qubits).
    pub fn custom(n_qubits: usize, parts: Vec<Vec<PauliString>>) -> Result<Self> {
        Self::build(n_qubits, parts, ModelTag::Custom, 1.0)
    }

    fn build(n_qubits: usize, parts: Vec<Vec<PauliString>>, model: ModelTag, coupling: f64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!("n_qubits = {} outside 1..={}", n_qubits, MAX_QUBITS)));
        }
        if parts.is_empty() {
            return Err(Error::invalid("Hamiltonian needs at least one part"));
        }
        let mut masks = Vec::with_capacity(parts.len());
        let mut locality = 0;
        for (g, terms) in parts.iter().enumerate() {
            if terms.is_empty() {
                return Err(Error::invalid(format!("part {} is empty", g)));
            }
            let mut ms = Vec::with_capacity(terms.len());
            for t in terms {
                if t.max_qubit() > n_qubits {
                    return Err(Error::QubitOutOfRange { index: t.max_qubit(), n_qubits });
                }
                if t.coeff.im != 0.0 || !t.coeff.re.is_finite() {
                    return Err(Error::invalid(format!("term {} has a non-real coefficient", t)));
                }
                locality = locality.max(t.weight());
                ms.push((t.mask(), t.coeff.re));
            }
            let only: Vec<PauliMask> = ms.iter().map(|m| m.0).collect();
            check_commuting(&only, g)?;
            if n_qubits <= 12 {
                dense_commutation_check(n_qubits, &only, g)?;
            }
            masks.push(ms);
        }
        Ok(PartitionedHamiltonian { n_qubits, parts, masks, locality, model, coupling })
    }

    /// `(J/2) sum_i P_{i,i+1}` on a periodic ring, split into the bonds
    /// `(2i, 2i+1)` (part A) and `(2i-1, 2i)` (part B). Each swap is kept as
    /// `(I + XX + YY + ZZ)/2`, identity included.
    ///
    /// For two qubits both parts hold the single bond (1,2).
    pub fn heisenberg_ring(n_qubits: usize, coupling: f64) -> Result<Self> {
        if n_qubits < 2 || n_qubits % 2 == 1 {
            return Err(Error::invalid(format!("Heisenberg ring needs an even qubit count >= 2, got {}", n_qubits)));
        }
        let n = n_qubits;
        let bond = |i: usize, j: usize| -> Vec<PauliString> {
            let c = coupling / 4.0;
            let (a, b) = (i.min(j), i.max(j));
            vec![
                PauliString::identity(c),
                PauliString::real(c, &[(a, Pauli::X), (b, Pauli::X)]).unwrap(),
                PauliString::real(c, &[(a, Pauli::Y), (b, Pauli::Y)]).unwrap(),
                PauliString::real(c, &[(a, Pauli::Z), (b, Pauli::Z)]).unwrap(),
            ]
        };
        let mut part_a = Vec::new();
        let mut part_b = Vec::new();
        for i in 1..=n / 2 {
            let right = if 2 * i + 1 > n { 1 } else { 2 * i + 1 };
            part_a.extend(bond(2 * i, right));
            part_b.extend(bond(2 * i - 1, 2 * i));
        }
        Self::build(n, vec![part_a, part_b], ModelTag::HeisenbergRing, coupling)
    }

    /// Jordan-Wigner Hubbard ladder on 16 qubits: `(site, up) -> site`,
    /// `(site, down) -> site + 8`. Parts: rung hops, odd leg hops, even leg
    /// hops, on-site interactions `(U/4) Z_i Z_{i+8}`.
    pub fn hubbard_ladder_4x2(hopping: f64, interaction: f64) -> Result<Self> {
        let hops = |bonds: &[(usize, usize)]| -> Vec<PauliString> {
            let mut out = Vec::new();
            for spin in 0..2 {
                for &(a, b) in bonds {
                    out.extend(hopping_terms(a + 8 * spin, b + 8 * spin, hopping));
                }
            }
            out
        };
        let interactions: Vec<PauliString> = (1..=LADDER_SITES)
            .map(|i| PauliString::real(interaction / 4.0, &[(i, Pauli::Z), (i + 8, Pauli::Z)]).unwrap())
            .collect();
        let parts = vec![hops(&LADDER_RUNGS), hops(&LADDER_ODD_LEGS), hops(&LADDER_EVEN_LEGS), interactions];
        Self::build(2 * LADDER_SITES, parts, ModelTag::HubbardLadder4x2, hopping)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<PauliString>] {
        &self.parts
    }

    pub fn locality(&self) -> usize {
        self.locality
    }

    pub fn model(&self) -> ModelTag {
        self.model
    }

    /// Coupling J of the built-in models (1 for custom ones).
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Energy unit used when quoting energies: N J for the ring, N J / 2 for
    /// the ladder (N qubits), 1 otherwise.
    pub fn energy_unit(&self) -> f64 {
        match self.model {
            ModelTag::HeisenbergRing => self.n_qubits as f64 * self.coupling,
            ModelTag::HubbardLadder4x2 => self.n_qubits as f64 * self.coupling / 2.0,
            ModelTag::Custom => 1.0,
        }
    }

    /// Sum of absolute coefficients, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        self.masks.iter().flatten().map(|(_, c)| c.abs()).sum()
    }

    fn check(&self, state: &State) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        Ok(())
    }

    fn check_part(&self, part: usize) -> Result<()> {
        if part >= self.parts.len() {
            return Err(Error::invalid(format!("part {} out of range (have {})", part, self.parts.len())));
        }
        Ok(())
    }

    pub fn apply(&self, state: &State) -> Result<State> {
        self.check(state)?;
        let mut out = state.zeros_like();
        for terms in &self.masks {
            for (m, c) in terms {
                accumulate_pauli(out.amplitudes_mut(), state.amplitudes(), m, C64::new(*c, 0.0));
            }
        }
        Ok(out)
    }

    pub fn apply_part(&self, part: usize, state: &State) -> Result<State> {
        self.check(state)?;
        self.check_part(part)?;
        let mut out = state.zeros_like();
        for (m, c) in &self.masks[part] {
            accumulate_pauli(out.amplitudes_mut(), state.amplitudes(), m, C64::new(*c, 0.0));
        }
        Ok(out)
    }

    /// `<psi|H|psi>` for a normalized state.
    pub fn expectation(&self, state: &State) -> Result<f64> {
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!("expectation needs a normalized state (norm^2 = {})", norm)));
        }
        let e = state.inner(&self.apply(state)?)?;
        if e.im.abs() > 1e-10 * e.re.abs().max(1.0) {
            return Err(Error::breakdown(format!("Hermiticity: <psi|H|psi> has imaginary part {:e}", e.im)));
        }
        Ok(e.re)
    }

    /// In place `e^{-i angle H_part}`; exact because the part's terms commute.
    pub fn evolve_part(&self, part: usize, angle: f64, state: &mut State) -> Result<()> {
        self.check(state)?;
        self.check_part(part)?;
        self.evolve_part_unchecked(part, angle, state);
        Ok(())
    }

    pub(crate) fn evolve_part_unchecked(&self, part: usize, angle: f64, state: &mut State) {
        for (m, c) in &self.masks[part] {
            rotate_real(state.amplitudes_mut(), m, angle * c);
        }
    }

    /// In place `e^{-tau H_part}` (not normalized).
    pub fn imaginary_evolve_part(&self, part: usize, tau: f64, state: &mut State) -> Result<()> {
        self.check(state)?;
        self.check_part(part)?;
        for (m, c) in &self.masks[part] {
            rotate_imag(state.amplitudes_mut(), m, tau * c);
        }
        Ok(())
    }

    /// Seeded start vector for ground-state searches. For the ladder it is
    /// projected onto half filling with zero magnetization.
    pub fn start_state(&self, seed: u64) -> Result<State> {
        let mut s = random_phase_state(self.n_qubits, seed)?;
        if self.model == ModelTag::HubbardLadder4x2 {
            for (b, a) in s.amplitudes_mut().iter_mut().enumerate() {
                if !half_filled_sz0(b) {
                    *a = C64::new(0.0, 0.0);
                }
            }
        }
        s.normalized()
    }

    /// Lanczos with full reorthogonalization from [`Self::start_state`]
    /// (seed 0). Converged when `||H psi - E psi|| <= tol * norm_bound()`.
    pub fn exact_ground_state(&self, tol: f64) -> Result<GroundState> {
        self.exact_ground_state_from(&self.start_state(0)?, tol)
    }

    pub fn exact_ground_state_from(&self, start: &State, tol: f64) -> Result<GroundState> {
        self.check(start)?;
        lanczos::lowest_eigenpair(self, start, tol * self.norm_bound(), &[])
    }

    /// Lowest eigenpair orthogonal to `deflate` (which must be orthonormal).
    pub fn lowest_excluding(&self, start: &State, tol: f64, deflate: &[State]) -> Result<GroundState> {
        self.check(start)?;
        lanczos::lowest_eigenpair(self, start, tol * self.norm_bound(), deflate)
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: State,
    /// `||H psi - E psi||`
    pub residual: f64,
    pub matvecs: usize,
}

/// `-(J/2)(X_a Z..Z X_b + Y_a Z..Z Y_b)`, parity string on the qubits
/// strictly between `a` and `b`.
pub fn hopping_terms(a: usize, b: usize, hopping: f64) -> Vec<PauliString> {
    let (lo, hi) = (a.min(b), a.max(b));
    let mut out = Vec::with_capacity(2);
    for p in [Pauli::X, Pauli::Y] {
        let mut ops = vec![(lo, p)];
        ops.extend((lo + 1..hi).map(|q| (q, Pauli::Z)));
        ops.push((hi, p));
        out.push(PauliString::real(-hopping / 2.0, &ops).unwrap());
    }
    out
}

/// Basis index with four particles in each spin register of the ladder.
pub fn half_filled_sz0(b: usize) -> bool {
    (b & 0xff).count_ones() == 4 && ((b >> 8) & 0xff).count_ones() == 4
}

fn dense_commutation_check(n_qubits: usize, masks: &[PauliMask], group: usize) -> Result<()> {
    let probe = random_phase_state(n_qubits, 0x5eed)?;
    let dim = probe.dim();
    let mut ab = vec![C64::new(0.0, 0.0); dim];
    let mut ba = vec![C64::new(0.0, 0.0); dim];
    let mut tmp = vec![C64::new(0.0, 0.0); dim];
    let one = C64::new(1.0, 0.0);
    for (i, a) in masks.iter().enumerate() {
        for (j, b) in masks.iter().enumerate().skip(i + 1) {
            for buf in [&mut ab, &mut ba, &mut tmp] {
                buf.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            }
            accumulate_pauli(&mut tmp, probe.amplitudes(), b, one);
            accumulate_pauli(&mut ab, &tmp, a, one);
            tmp.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            accumulate_pauli(&mut tmp, probe.amplitudes(), a, one);
            accumulate_pauli(&mut ba, &tmp, b, one);
            let diff: f64 = ab.iter().zip(&ba).map(|(x, y)| (x - y).norm_sqr()).sum();
            if diff > 1e-20 * dim as f64 {
                return Err(Error::NonCommutingGroup { group, first: i, second: j });
            }
        }
    }
    Ok(())
}

/// `<sum_{q in qubits} Z_q>`
pub fn z_sum_expectation(state: &State, qubits: &[usize]) -> f64 {
    let mask: usize = qubits.iter().map(|q| 1usize << (q - 1)).sum();
    let k = qubits.len() as f64;
    state.amplitudes().iter().enumerate().map(|(b, a)| a.norm_sqr() * (k - 2.0 * (b & mask).count_ones() as f64)).sum()
}

/// Expected occupation `sum (1 - Z)/2` over all qubits.
pub fn particle_number(state: &State) -> f64 {
    state.amplitudes().iter().enumerate().map(|(b, a)| a.norm_sqr() * b.count_ones() as f64).sum()
}

/// Weight of `state` inside the half-filled, zero-magnetization sector of
/// the ladder.
pub fn half_filled_weight(state: &State) -> f64 {
    state.amplitudes().iter().enumerate().filter(|(b, _)| half_filled_sz0(*b)).map(|(_, a)| a.norm_sqr()).sum()
}

/// `[H, sum_i Z_i] psi` norm, zero for magnetization-conserving models.
pub fn sz_commutator_norm(h: &PartitionedHamiltonian, psi: &State) -> Result<f64> {
    let zs = |s: &State| {
        let mut out = s.clone();
        for (b, a) in out.amplitudes_mut().iter_mut().enumerate() {
            *a *= h.n_qubits() as f64 - 2.0 * b.count_ones() as f64;
        }
        out
    };
    let mut lhs = h.apply(&zs(psi))?;
    let rhs = zs(&h.apply(psi)?);
    same_dim(&lhs, &rhs)?;
    lhs.axpy(C64::new(-1.0, 0.0), &rhs)?;
    Ok(lhs.norm())
}
