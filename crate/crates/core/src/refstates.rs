//! Product reference states for the ring and the ladder.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hamiltonian::PartitionedHamiltonian;
use crate::statevector::State;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, Default)]
pub struct ReferenceSet {
    pub states: Vec<State>,
    pub labels: Vec<String>,
}

impl ReferenceSet {
    pub fn push(&mut self, label: impl Into<String>, state: State) {
        self.labels.push(label.into());
        self.states.push(state);
    }

    pub fn block_size(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&State> {
        self.labels.iter().position(|l| l.eq_ignore_ascii_case(label)).map(|i| &self.states[i])
    }

    /// Subset in the given order. Labels `q1`, `q2`, ... address states by
    /// position.
    pub fn select(&self, labels: &[&str]) -> Result<ReferenceSet> {
        let mut out = ReferenceSet::default();
        for &l in labels {
            let idx = self.labels.iter().position(|x| x.eq_ignore_ascii_case(l)).or_else(|| {
                l.strip_prefix(['q', 'Q'])
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&k| k >= 1 && k <= self.states.len())
                    .map(|k| k - 1)
            });
            match idx {
                Some(i) => out.push(self.labels[i].clone(), self.states[i].clone()),
                None => return Err(Error::invalid(format!("unknown reference state '{}'", l))),
            }
        }
        Ok(out)
    }

    /// First `k` states.
    pub fn first(&self, k: usize) -> Result<ReferenceSet> {
        if k == 0 || k > self.states.len() {
            return Err(Error::invalid(format!("block size {} outside 1..={}", k, self.states.len())));
        }
        Ok(ReferenceSet { states: self.states[..k].to_vec(), labels: self.labels[..k].to_vec() })
    }
}

/// Tensor product of local factors. Each factor lists its qubits and the
/// `2^len` local amplitudes, first listed qubit least significant. Every
/// qubit must appear in exactly one factor.
pub fn product_state(n_qubits: usize, factors: &[(Vec<usize>, Vec<C64>)]) -> Result<State> {
    let mut seen = 0usize;
    for (qs, amps) in factors {
        if amps.len() != 1 << qs.len() {
            return Err(Error::invalid("factor amplitude count must be 2^(number of qubits)"));
        }
        for &q in qs {
            if q == 0 || q > n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if seen & (1 << (q - 1)) != 0 {
                return Err(Error::invalid(format!("qubit {} used by two factors", q)));
            }
            seen |= 1 << (q - 1);
        }
    }
    if seen.count_ones() as usize != n_qubits {
        return Err(Error::invalid("product state leaves qubits unassigned"));
    }
    let mut s = State::zeros(n_qubits)?;
    for (b, a) in s.amplitudes_mut().iter_mut().enumerate() {
        let mut v = C64::new(1.0, 0.0);
        for (qs, amps) in factors {
            let mut local = 0;
            for (k, &q) in qs.iter().enumerate() {
                local |= ((b >> (q - 1)) & 1) << k;
            }
            v *= amps[local];
            if v == C64::new(0.0, 0.0) {
                break;
            }
        }
        *a = v;
    }
    Ok(s)
}

const H: f64 = core::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(|0>_i |1>_j - |1>_i |0>_j) / sqrt 2`
fn singlet(i: usize, j: usize) -> (Vec<usize>, Vec<C64>) {
    (alloc::vec![i, j], alloc::vec![c(0.0, 0.0), c(-H, 0.0), c(H, 0.0), c(0.0, 0.0)])
}

/// `(|01> + |10>) / sqrt 2`
fn bonding(i: usize, j: usize) -> (Vec<usize>, Vec<C64>) {
    (alloc::vec![i, j], alloc::vec![c(0.0, 0.0), c(H, 0.0), c(H, 0.0), c(0.0, 0.0)])
}

fn single(q: usize, amp0: C64, amp1: C64) -> (Vec<usize>, Vec<C64>) {
    (alloc::vec![q], alloc::vec![amp0, amp1])
}

/// Staggered single-qubit product: `a` on odd qubits and `b` on even ones
/// (`swap` exchanges the roles).
fn neel(n: usize, a: [C64; 2], b: [C64; 2], swap: bool) -> Result<State> {
    let factors: Vec<_> = (1..=n)
        .map(|q| {
            let odd = q % 2 == 1;
            let [x, y] = if odd != swap { a } else { b };
            single(q, x, y)
        })
        .collect();
    product_state(n, &factors)
}

/// The eight ring references, labels `phiA phiB xafm1 xafm2 yafm1 yafm2
/// zafm1 zafm2` (also reachable as `q1..q8`):
///
/// * `phiA`: singlets on bonds `(2i, 2i+1)`, `phiB`: on `(2i-1, 2i)`
/// * `xafm1`: `|+>` on odd qubits, `|->` on even; `xafm2` swapped
/// * `yafm1`, `yafm2`: same with `(|0> +- i|1>)/sqrt 2`
/// * `zafm1`: `|0>` on odd qubits, `|1>` on even; `zafm2` swapped
pub fn heisenberg_references(n_qubits: usize) -> Result<ReferenceSet> {
    if n_qubits < 2 || n_qubits % 2 == 1 {
        return Err(Error::invalid(format!("ring references need an even qubit count, got {}", n_qubits)));
    }
    let n = n_qubits;
    let mut set = ReferenceSet::default();
    let phi_a: Vec<_> = (1..=n / 2).map(|i| singlet(2 * i, if 2 * i + 1 > n { 1 } else { 2 * i + 1 })).collect();
    let phi_b: Vec<_> = (1..=n / 2).map(|i| singlet(2 * i - 1, 2 * i)).collect();
    set.push("phiA", product_state(n, &phi_a)?);
    set.push("phiB", product_state(n, &phi_b)?);
    let plus = [c(H, 0.0), c(H, 0.0)];
    let minus = [c(H, 0.0), c(-H, 0.0)];
    let right = [c(H, 0.0), c(0.0, H)];
    let left = [c(H, 0.0), c(0.0, -H)];
    let up = [c(1.0, 0.0), c(0.0, 0.0)];
    let down = [c(0.0, 0.0), c(1.0, 0.0)];
    set.push("xafm1", neel(n, plus, minus, false)?);
    set.push("xafm2", neel(n, plus, minus, true)?);
    set.push("yafm1", neel(n, right, left, false)?);
    set.push("yafm2", neel(n, right, left, true)?);
    set.push("zafm1", neel(n, up, down, false)?);
    set.push("zafm2", neel(n, up, down, true)?);
    Ok(set)
}

/// Ladder references `phiA` (bonding pairs on every rung, both spins),
/// `zafm1` (spin-up particles on even sites, spin-down on odd sites) and
/// `zafm2` (the reverse). An occupied spin orbital is `|1>`.
pub fn hubbard_references() -> Result<ReferenceSet> {
    let mut set = ReferenceSet::default();
    let pairs: Vec<_> = (1..=8).map(|i| bonding(2 * i - 1, 2 * i)).collect();
    set.push("phiA", product_state(16, &pairs)?);
    let occupied = |q: usize, first: bool| {
        let site = if q > 8 { q - 8 } else { q };
        let up_register = q <= 8;
        // zafm1: up on even sites, down on odd sites
        let filled = (site % 2 == 0) == up_register;
        filled == first
    };
    for (label, first) in [("zafm1", true), ("zafm2", false)] {
        let factors: Vec<_> = (1..=16)
            .map(|q| if occupied(q, first) { single(q, c(0.0, 0.0), c(1.0, 0.0)) } else { single(q, c(1.0, 0.0), c(0.0, 0.0)) })
            .collect();
        set.push(label, product_state(16, &factors)?);
    }
    Ok(set)
}

#[derive(Clone, Debug)]
pub struct SectorGroundState {
    pub state: State,
    pub energy: f64,
    /// Gap to the next level inside the sector.
    pub gap: f64,
    /// Set when the gap is below `1e-8` of the energy scale; the returned
    /// vector is then one of several valid choices.
    pub degenerate: bool,
}

/// Ground state of the non-interacting ladder at half filling with zero
/// magnetization, phase fixed so the largest amplitude is real positive.
pub fn hubbard_u0_ground_state(hopping: f64) -> Result<SectorGroundState> {
    let h = PartitionedHamiltonian::hubbard_ladder_4x2(hopping, 0.0)?;
    let tol = 1e-11;
    let g = h.exact_ground_state(tol)?;
    let excited = h.lowest_excluding(&h.start_state(1)?, 1e-8, core::slice::from_ref(&g.state))?;
    let gap = excited.energy - g.energy;
    let degenerate = gap < 1e-8 * h.norm_bound();
    Ok(SectorGroundState { state: g.state, energy: g.energy, gap, degenerate })
}

/// Labelled copy of `states`, labels `ref1`, `ref2`, ...
pub fn from_states(states: Vec<State>) -> ReferenceSet {
    let labels = (1..=states.len()).map(|i| format!("ref{}", i)).collect();
    ReferenceSet { states, labels }
}

impl core::fmt::Display for ReferenceSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.labels.join(","))
    }
}
