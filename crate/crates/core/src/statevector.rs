//! Dense complex statevectors and Pauli-string kernels.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Result, C64};

pub const MAX_QUBITS: usize = 30;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(c)
    }
}

/// Bit masks of a Pauli string: `P|b> = phase * (-1)^{|b & z|} |b ^ x>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PauliMask {
    pub x: usize,
    pub z: usize,
    /// i^{number of Y factors}
    pub phase: C64,
}

impl PauliMask {
    #[inline]
    fn sign(&self, b: usize) -> f64 {
        if (b & self.z).count_ones() & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn commutes(&self, other: &PauliMask) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }
}

/// Coefficient times a tensor product of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    ops: Vec<(usize, Pauli)>,
    pub coeff: C64,
}

impl PauliString {
    /// Sorts `ops` by qubit; rejects qubit 0 and repeated qubits.
    pub fn new(coeff: C64, ops: &[(usize, Pauli)]) -> Result<PauliString> {
        let mut ops = ops.to_vec();
        ops.sort_by_key(|&(q, _)| q);
        for w in ops.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(alloc::format!("qubit {} repeated in Pauli string", w[0].0)));
            }
        }
        if let Some(&(q, _)) = ops.first() {
            if q == 0 {
                return Err(Error::QubitOutOfRange { index: 0, n_qubits: MAX_QUBITS });
            }
        }
        Ok(PauliString { ops, coeff })
    }

    pub fn real(coeff: f64, ops: &[(usize, Pauli)]) -> Result<PauliString> {
        Self::new(C64::new(coeff, 0.0), ops)
    }

    pub fn identity(coeff: f64) -> PauliString {
        PauliString { ops: Vec::new(), coeff: C64::new(coeff, 0.0) }
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn max_qubit(&self) -> usize {
        self.ops.last().map_or(0, |&(q, _)| q)
    }

    pub(crate) fn mask(&self) -> PauliMask {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for &(q, p) in &self.ops {
            let bit = 1usize << (q - 1);
            match p {
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
            }
        }
        let phase = match ny % 4 {
            0 => C64::new(1.0, 0.0),
            1 => I,
            2 => C64::new(-1.0, 0.0),
            _ => -I,
        };
        PauliMask { x, z, phase }
    }

    /// Symbolic commutation test (ignores coefficients).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.mask().commutes(&other.mask())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{:+}i)", self.coeff.re, self.coeff.im)?;
        if self.ops.is_empty() {
            return f.write_str(" I");
        }
        for (q, p) in &self.ops {
            write!(f, " {}{}", p, q)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    n_qubits: usize,
    amps: Vec<C64>,
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::invalid(alloc::format!("n_qubits = {} outside 1..={}", n_qubits, MAX_QUBITS)));
    }
    Ok(())
}

impl State {
    pub fn zero(n_qubits: usize) -> Result<State> {
        State::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<State> {
        let mut s = State::zeros(n_qubits)?;
        if index >= s.dim() {
            return Err(Error::invalid(alloc::format!("basis index {} out of range", index)));
        }
        s.amps[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// The zero vector.
    pub fn zeros(n_qubits: usize) -> Result<State> {
        check_qubits(n_qubits)?;
        Ok(State { n_qubits, amps: vec![C64::new(0.0, 0.0); 1usize << n_qubits] })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<State> {
        check_qubits(n_qubits)?;
        if amps.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1usize << n_qubits, found: amps.len() });
        }
        Ok(State { n_qubits, amps })
    }

    pub(crate) fn zeros_like(&self) -> State {
        State { n_qubits: self.n_qubits, amps: vec![C64::new(0.0, 0.0); self.amps.len()] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm and returns the previous norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::breakdown("cannot normalize a zero or non-finite state"));
        }
        self.scale(C64::new(1.0 / n, 0.0));
        Ok(n)
    }

    pub fn normalized(mut self) -> Result<State> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scale(&mut self, a: C64) {
        for x in &mut self.amps {
            *x *= a;
        }
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: C64, x: &State) -> Result<()> {
        same_dim(self, x)?;
        for (y, v) in self.amps.iter_mut().zip(&x.amps) {
            *y += a * v;
        }
        Ok(())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &State) -> Result<C64> {
        same_dim(self, other)?;
        Ok(dot(&self.amps, &other.amps))
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `||self - other||`
    pub fn distance(&self, other: &State) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

pub(crate) fn same_dim(a: &State, b: &State) -> Result<()> {
    if a.amps.len() != b.amps.len() {
        return Err(Error::DimensionMismatch { expected: a.amps.len(), found: b.amps.len() });
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

pub fn zero_state(n_qubits: usize) -> Result<State> {
    State::zero(n_qubits)
}

pub fn inner(a: &State, b: &State) -> Result<C64> {
    a.inner(b)
}

/// `sum_i c_i |psi_i>` in a single pass over the amplitudes.
pub fn linear_combine(terms: &[(C64, &State)]) -> Result<State> {
    let (_, first) = terms.first().ok_or_else(|| Error::invalid("empty linear combination"))?;
    for (_, s) in terms {
        same_dim(first, s)?;
    }
    let mut out = first.zeros_like();
    for (i, y) in out.amps.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, s) in terms {
            acc += c * s.amps[i];
        }
        *y = acc;
    }
    Ok(out)
}

fn check_string(n_qubits: usize, p: &PauliString) -> Result<()> {
    if p.max_qubit() > n_qubits {
        return Err(Error::QubitOutOfRange { index: p.max_qubit(), n_qubits });
    }
    Ok(())
}

pub fn apply_pauli_string(state: &State, p: &PauliString) -> Result<State> {
    check_string(state.n_qubits, p)?;
    let mut out = state.zeros_like();
    accumulate_pauli(&mut out.amps, &state.amps, &p.mask(), p.coeff);
    Ok(out)
}

/// `e^{-i angle sum_j c_j P_j}` for mutually commuting strings with real
/// coefficients.
pub fn apply_group_exponential(state: &State, group: &[PauliString], angle: f64) -> Result<State> {
    for p in group {
        check_string(state.n_qubits, p)?;
        if p.coeff.im != 0.0 {
            return Err(Error::invalid("group exponential needs real coefficients"));
        }
    }
    let masks: Vec<PauliMask> = group.iter().map(|p| p.mask()).collect();
    if cfg!(debug_assertions) {
        check_commuting(&masks, 0)?;
    }
    let mut out = state.clone();
    for (p, m) in group.iter().zip(&masks) {
        rotate_real(&mut out.amps, m, angle * p.coeff.re);
    }
    Ok(out)
}

pub(crate) fn check_commuting(masks: &[PauliMask], group: usize) -> Result<()> {
    for (i, a) in masks.iter().enumerate() {
        for (j, b) in masks.iter().enumerate().skip(i + 1) {
            if !a.commutes(b) {
                return Err(Error::NonCommutingGroup { group, first: i, second: j });
            }
        }
    }
    Ok(())
}

/// `out += coeff * P amps`
pub(crate) fn accumulate_pauli(out: &mut [C64], amps: &[C64], m: &PauliMask, coeff: C64) {
    let c = coeff * m.phase;
    if m.z == 0 {
        for (b, a) in amps.iter().enumerate() {
            out[b ^ m.x] += c * a;
        }
    } else {
        for (b, a) in amps.iter().enumerate() {
            out[b ^ m.x] += c * m.sign(b) * a;
        }
    }
}

/// In place `psi <- a psi + b P psi`, valid whenever the result is computed
/// pairwise; P^2 = 1 for every Pauli string.
fn rotate(amps: &mut [C64], m: &PauliMask, a: f64, b: C64) {
    if m.x == 0 {
        // diagonal; no Y factors so phase is 1
        let plus = a + b;
        let minus = a - b;
        for (i, v) in amps.iter_mut().enumerate() {
            *v *= if m.sign(i) > 0.0 { plus } else { minus };
        }
        return;
    }
    let low = m.x & m.x.wrapping_neg();
    let bp = b * m.phase;
    for i in 0..amps.len() {
        if i & low != 0 {
            continue;
        }
        let j = i ^ m.x;
        let (vi, vj) = (amps[i], amps[j]);
        amps[i] = a * vi + bp * m.sign(j) * vj;
        amps[j] = a * vj + bp * m.sign(i) * vi;
    }
}

/// `e^{-i theta P}`
#[inline]
pub(crate) fn rotate_real(amps: &mut [C64], m: &PauliMask, theta: f64) {
    if theta == 0.0 {
        return;
    }
    rotate(amps, m, theta.cos(), C64::new(0.0, -theta.sin()));
}

/// `e^{-tau P}`
#[inline]
pub(crate) fn rotate_imag(amps: &mut [C64], m: &PauliMask, tau: f64) {
    if tau == 0.0 {
        return;
    }
    rotate(amps, m, tau.cosh(), C64::new(-tau.sinh(), 0.0));
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unnormalized state with amplitudes `e^{i phi(x)}`, `phi` uniform on
/// `[0, 2 pi)`; `<phi|phi> = 2^n`. ChaCha8 seeded with `seed`.
pub fn random_phase_state(n_qubits: usize, seed: u64) -> Result<State> {
    random_phase_state_stream(n_qubits, seed, 0)
}

/// As [`random_phase_state`] on ChaCha8 stream `stream`, so sample `k` of a
/// batch does not depend on how many samples precede it.
pub fn random_phase_state_stream(n_qubits: usize, seed: u64, stream: u64) -> Result<State> {
    let mut s = State::zeros(n_qubits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    for a in &mut s.amps {
        let phi = 2.0 * core::f64::consts::PI * uniform(&mut rng);
        *a = C64::new(phi.cos(), phi.sin());
    }
    Ok(s)
}

/// Normalized state with real and imaginary parts uniform on `[-1, 1)`
/// before normalization.
pub fn random_state(n_qubits: usize, seed: u64) -> Result<State> {
    let mut s = State::zeros(n_qubits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for a in &mut s.amps {
        let re = 2.0 * uniform(&mut rng) - 1.0;
        let im = 2.0 * uniform(&mut rng) - 1.0;
        *a = C64::new(re, im);
    }
    s.normalized()
}

/// Cyclic relabelling of qubits: the content of qubit `i` moves to qubit
/// `i + shift` (mod n). Negative shifts move the other way.
pub fn translate(state: &State, shift: i64) -> State {
    let n = state.n_qubits;
    let k = shift.rem_euclid(n as i64) as u32;
    if k == 0 {
        return state.clone();
    }
    let full = state.dim() - 1;
    let mut out = state.zeros_like();
    for (b, a) in state.amps.iter().enumerate() {
        let t = ((b << k) | (b >> (n as u32 - k))) & full;
        out.amps[t] = *a;
    }
    out
}
