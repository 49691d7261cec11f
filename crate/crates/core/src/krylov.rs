//! Block Krylov subspace diagonalization with approximated Hamiltonian
//! powers.
//!
//! Basis state `k + (l-1) M_B` (zero-based `k`) is `H^{l-1}_ST(r) q_k`.
//! Results for every subspace size come from leading blocks of one pair of
//! matrices, so the subspaces are nested.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hamiltonian::PartitionedHamiltonian;
use crate::linalg::{hermitian_eigen, CMat};
use crate::metrics::{polyfit_even_powers, PolyFit};
use crate::qpower::{power_states, richardson_weights, PowerConfig};
use crate::refstates::ReferenceSet;
use crate::statevector::State;
use crate::trotter::{apply_imaginary_trotter_mut, apply_trotter_mut, TrotterScheme};
use crate::{Error, Result, C64};

pub const DEFAULT_S_CUT: f64 = 1e-12;
/// Overlap condition numbers beyond this end a trace.
pub const COND_LIMIT: f64 = 1e13;
/// Largest subspace handed to the dense eigensolver.
pub const MAX_SUBSPACE: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixScheme {
    /// `<u_i|H|u_j>` and `<u_i|u_j>` over the stored basis states.
    Variational,
    /// `<q_k|H^{l+l'-1}_ST(r)|q_k'>` and `<q_k|H^{l+l'-2}_ST(r)|q_k'>`.
    Direct,
}

#[derive(Clone, Debug)]
pub struct KrylovBasis {
    pub states: Vec<State>,
    pub block_size: usize,
    pub n_max: usize,
    pub cancellation_warning: bool,
}

impl KrylovBasis {
    /// Basis states of the first `n` blocks.
    pub fn leading(&self, n: usize) -> &[State] {
        &self.states[..n * self.block_size]
    }
}

fn check_sizes(refs: &ReferenceSet, n_max: usize) -> Result<()> {
    if refs.is_empty() || n_max == 0 {
        return Err(Error::invalid("need at least one reference state and n_max >= 1"));
    }
    if n_max * refs.block_size() > MAX_SUBSPACE {
        return Err(Error::invalid(format!("subspace dimension {} exceeds {}", n_max * refs.block_size(), MAX_SUBSPACE)));
    }
    Ok(())
}

fn interleave(per_ref: Vec<Vec<State>>, n_max: usize) -> Vec<State> {
    let mb = per_ref.len();
    let mut iters: Vec<_> = per_ref.into_iter().map(|v| v.into_iter()).collect();
    let mut out = Vec::with_capacity(mb * n_max);
    for _ in 0..n_max {
        for it in iters.iter_mut() {
            out.push(it.next().expect("chain length"));
        }
    }
    out
}

/// `H^{l-1}_ST(r) q_k` for `l = 1..=n_max`, one power chain per reference.
pub fn build_basis(refs: &ReferenceSet, n_max: usize, template: &PowerConfig, h: &PartitionedHamiltonian) -> Result<KrylovBasis> {
    check_sizes(refs, n_max)?;
    let mut warn = false;
    let mut per_ref = Vec::with_capacity(refs.block_size());
    for q in &refs.states {
        let chain = power_states(template, h, q, n_max - 1)?;
        warn |= chain.iter().any(|o| o.cancellation_warning);
        per_ref.push(chain.into_iter().map(|o| o.state).collect());
    }
    Ok(KrylovBasis { states: interleave(per_ref, n_max), block_size: refs.block_size(), n_max, cancellation_warning: warn })
}

/// Same layout with exact powers `H^{l-1} q_k`.
pub fn exact_basis(refs: &ReferenceSet, n_max: usize, h: &PartitionedHamiltonian) -> Result<KrylovBasis> {
    check_sizes(refs, n_max)?;
    let mut per_ref = Vec::with_capacity(refs.block_size());
    for q in &refs.states {
        let mut chain = Vec::with_capacity(n_max);
        chain.push(q.clone());
        for l in 1..n_max {
            let next = h.apply(&chain[l - 1])?;
            chain.push(next);
        }
        per_ref.push(chain);
    }
    Ok(KrylovBasis { states: interleave(per_ref, n_max), block_size: refs.block_size(), n_max, cancellation_warning: false })
}

#[derive(Clone, Debug)]
pub struct SubspaceMatrices {
    pub h: CMat,
    pub s: CMat,
    /// `max |X - X^dag| / max |X|` over both matrices before symmetrization.
    pub hermiticity_residual: f64,
}

impl SubspaceMatrices {
    fn from_raw(h: CMat, s: CMat) -> Self {
        let res = |m: &CMat| {
            let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let diff = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if scale > 0.0 {
                diff / scale
            } else {
                0.0
            }
        };
        let r = res(&h).max(res(&s));
        let half = C64::new(0.5, 0.0);
        SubspaceMatrices { h: (&h + h.adjoint()) * half, s: (&s + s.adjoint()) * half, hermiticity_residual: r }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn leading(&self, dim: usize) -> SubspaceMatrices {
        SubspaceMatrices {
            h: self.h.view((0, 0), (dim, dim)).into_owned(),
            s: self.s.view((0, 0), (dim, dim)).into_owned(),
            hermiticity_residual: self.hermiticity_residual,
        }
    }
}

/// `H_ij = <u_i|H|u_j>`, `S_ij = <u_i|u_j>`.
pub fn subspace_matrices_variational(basis: &[State], h: &PartitionedHamiltonian) -> Result<SubspaceMatrices> {
    let d = basis.len();
    let hu: Vec<State> = basis.iter().map(|u| h.apply(u)).collect::<Result<_>>()?;
    let mut hm = CMat::zeros(d, d);
    let mut sm = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            hm[(i, j)] = basis[i].inner(&hu[j])?;
            sm[(i, j)] = basis[i].inner(&basis[j])?;
        }
    }
    Ok(SubspaceMatrices::from_raw(hm, sm))
}

/// Matrices of the direct scheme. Each Richardson level is an exact power
/// of one Hermitian operator, so `<q_k|B^p|q_k'>` splits as
/// `<B^a q_k|B^{p-a} q_k'>` over the power chains of that level; levels are
/// then combined with the Richardson weights.
pub fn subspace_matrices_direct(
    refs: &ReferenceSet,
    n_max: usize,
    template: &PowerConfig,
    h: &PartitionedHamiltonian,
) -> Result<SubspaceMatrices> {
    check_sizes(refs, n_max)?;
    let mb = refs.block_size();
    let d = mb * n_max;
    let weights = richardson_weights(template.r, template.h);
    let mut hm = CMat::zeros(d, d);
    let mut sm = CMat::zeros(d, d);
    for (w, dt) in weights.iter().zip(template.level_steps()) {
        let level = template.with_dtau(dt).with_richardson(0);
        let chains: Vec<Vec<State>> = refs
            .states
            .iter()
            .map(|q| power_states(&level, h, q, n_max).map(|v| v.into_iter().map(|o| o.state).collect()))
            .collect::<Result<_>>()?;
        // overlaps[p][k][k'] = <q_k|B^p|q_k'>, p = 0..=2 n_max - 1
        let mut overlaps = Vec::with_capacity(2 * n_max);
        for p in 0..2 * n_max {
            let a = (p / 2).min(n_max);
            let b = p - a;
            let mut block = CMat::zeros(mb, mb);
            for k in 0..mb {
                for k2 in 0..mb {
                    block[(k, k2)] = chains[k][a].inner(&chains[k2][b])?;
                }
            }
            overlaps.push(block);
        }
        let wc = C64::new(*w, 0.0);
        for l in 0..n_max {
            for l2 in 0..n_max {
                for k in 0..mb {
                    for k2 in 0..mb {
                        let (i, j) = (k + l * mb, k2 + l2 * mb);
                        hm[(i, j)] += wc * overlaps[l + l2 + 1][(k, k2)];
                        sm[(i, j)] += wc * overlaps[l + l2][(k, k2)];
                    }
                }
            }
        }
    }
    Ok(SubspaceMatrices::from_raw(hm, sm))
}

#[derive(Clone, Debug)]
pub struct SubspaceSolution {
    pub energy: f64,
    /// Coefficients on the original (unequilibrated) basis, normalized so
    /// that `v^dag S v = 1`.
    pub coefficients: Vec<C64>,
    /// Condition number of the equilibrated overlap matrix.
    pub cond: f64,
    pub kept: usize,
}

/// Lowest Ritz pair by equilibration and canonical orthogonalization.
pub fn solve_subspace(m: &SubspaceMatrices, s_cut: f64) -> Result<SubspaceSolution> {
    solve_subspace_with(m, s_cut, true)
}

/// As [`solve_subspace`], optionally skipping equilibration.
pub fn solve_subspace_with(m: &SubspaceMatrices, s_cut: f64, equilibrate: bool) -> Result<SubspaceSolution> {
    if !(s_cut > 0.0 && s_cut < 1.0) {
        return Err(Error::invalid(format!("s_cut must lie in (0, 1), got {}", s_cut)));
    }
    let d = m.dim();
    if d == 0 || m.s.nrows() != d {
        return Err(Error::invalid("empty or mismatched subspace matrices"));
    }
    let mut delta = alloc::vec![1.0; d];
    if equilibrate {
        for (i, x) in delta.iter_mut().enumerate() {
            let sii = m.s[(i, i)].re;
            if !(sii > 0.0) {
                return Err(Error::breakdown(format!("overlap diagonal {} is not positive ({:e})", i, sii)));
            }
            *x = 1.0 / sii.sqrt();
        }
    }
    let scaled = |a: &CMat| CMat::from_fn(d, d, |i, j| a[(i, j)] * (delta[i] * delta[j]));
    let he = scaled(&m.h);
    let se = scaled(&m.s);
    let (sv, su) = hermitian_eigen(&se);
    let smax = sv[d - 1];
    let smin = sv[0];
    if !(smax > 0.0) || smin < -1e-10 * smax {
        return Err(Error::breakdown(format!("overlap matrix not positive semidefinite (eigenvalues {:e} .. {:e})", smin, smax)));
    }
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let kept: Vec<usize> = (0..d).filter(|&j| sv[j] > s_cut * smax).collect();
    let w = CMat::from_fn(d, kept.len(), |i, c| su[(i, kept[c])] / sv[kept[c]].sqrt());
    let t = w.adjoint() * &he * &w;
    let (tv, tu) = hermitian_eigen(&t);
    let y = tu.column(0);
    let ve = &w * y;
    let mut v: Vec<C64> = (0..d).map(|i| ve[i] * delta[i]).collect();
    // largest-modulus entry real positive
    let mut best = 0;
    for i in 1..d {
        if v[i].norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let ph = v[best].conj() / v[best].norm();
    for x in v.iter_mut() {
        *x *= ph;
    }
    Ok(SubspaceSolution { energy: tv[0], coefficients: v, cond, kept: kept.len() })
}

/// `|<psi0|Psi_KS>|^2` with `Psi_KS = sum_i v_i u_i` normalized.
pub fn fidelity(v: &[C64], basis: &[State], psi0: &State) -> Result<f64> {
    if v.len() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: v.len() });
    }
    let terms: Vec<(C64, &State)> = v.iter().copied().zip(basis.iter()).collect();
    let ks = crate::statevector::linear_combine(&terms)?;
    let n2 = ks.norm_sqr();
    if n2 == 0.0 {
        return Err(Error::breakdown("Krylov state has zero norm"));
    }
    Ok(psi0.inner(&ks)?.norm_sqr() / (n2 * psi0.norm_sqr()))
}

#[derive(Clone, Debug)]
pub struct KrylovStep {
    /// Blocks in the subspace.
    pub n: usize,
    pub energy: f64,
    pub coefficients: Vec<C64>,
    pub fidelity: Option<f64>,
    pub cond: f64,
    pub kept: usize,
}

#[derive(Clone, Debug)]
pub struct KrylovResult {
    pub steps: Vec<KrylovStep>,
    pub cancellation_warning: bool,
    pub hermiticity_residual: f64,
    /// Why the trace ended before `n_max`, if it did.
    pub stopped: Option<String>,
}

#[derive(Clone, Debug)]
pub struct KrylovRun {
    pub refs: ReferenceSet,
    pub n_max: usize,
    pub power: PowerConfig,
    pub scheme: MatrixScheme,
    pub s_cut: f64,
}

impl KrylovRun {
    pub fn new(refs: ReferenceSet, n_max: usize, power: PowerConfig) -> Self {
        KrylovRun { refs, n_max, power, scheme: MatrixScheme::Variational, s_cut: DEFAULT_S_CUT }
    }

    pub fn with_scheme(mut self, scheme: MatrixScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_s_cut(mut self, s_cut: f64) -> Self {
        self.s_cut = s_cut;
        self
    }

    pub fn with_dtau(&self, dtau: f64) -> Self {
        let mut r = self.clone();
        r.power = r.power.with_dtau(dtau);
        r
    }

    /// Energies, conditioning and (given `psi0`) fidelities for every
    /// `n = 1..=n_max`. A failed solve past `n = 1` ends the trace.
    pub fn run(&self, h: &PartitionedHamiltonian, psi0: Option<&State>) -> Result<KrylovResult> {
        if !(self.s_cut > 0.0 && self.s_cut < 1.0) {
            return Err(Error::invalid(format!("s_cut must lie in (0, 1), got {}", self.s_cut)));
        }
        let basis = build_basis(&self.refs, self.n_max, &self.power, h)?;
        let mats = match self.scheme {
            MatrixScheme::Variational => subspace_matrices_variational(&basis.states, h)?,
            MatrixScheme::Direct => subspace_matrices_direct(&self.refs, self.n_max, &self.power, h)?,
        };
        let overlaps: Option<Vec<C64>> = match psi0 {
            Some(p) => Some(basis.states.iter().map(|u| p.inner(u)).collect::<Result<_>>()?),
            None => None,
        };
        let mb = self.refs.block_size();
        let mut steps = Vec::with_capacity(self.n_max);
        let mut stopped = None;
        for n in 1..=self.n_max {
            let sub = mats.leading(n * mb);
            let sol = match solve_subspace(&sub, self.s_cut) {
                Ok(s) => s,
                Err(e) if n > 1 && e.is_numerical() => {
                    stopped = Some(format!("n = {}: {}", n, e));
                    break;
                }
                Err(e) => return Err(e),
            };
            let fid = match (&overlaps, psi0) {
                (Some(g), Some(p)) => {
                    // Gram of the stored basis, which differs from the direct
                    // scheme's S when r > 0
                    let dim = n * mb;
                    let v = &sol.coefficients;
                    let amp: C64 = (0..dim).map(|i| v[i] * g[i]).sum();
                    let mut n2 = C64::new(0.0, 0.0);
                    for i in 0..dim {
                        for j in 0..dim {
                            let sij = match self.scheme {
                                MatrixScheme::Variational => mats.s[(i, j)],
                                MatrixScheme::Direct => basis.states[i].inner(&basis.states[j])?,
                            };
                            n2 += v[i].conj() * sij * v[j];
                        }
                    }
                    Some(amp.norm_sqr() / (n2.re * p.norm_sqr()))
                }
                _ => None,
            };
            steps.push(KrylovStep {
                n,
                energy: sol.energy,
                coefficients: sol.coefficients,
                fidelity: fid,
                cond: sol.cond,
                kept: sol.kept,
            });
        }
        Ok(KrylovResult {
            steps,
            cancellation_warning: basis.cancellation_warning,
            hermiticity_residual: mats.hermiticity_residual,
            stopped,
        })
    }
}

/// Extrapolation of the final-`n` energy over a set of time steps.
#[derive(Clone, Debug)]
pub struct SweepFit {
    pub dtau: Vec<f64>,
    pub energies: Vec<f64>,
    pub fit: PolyFit,
    /// Fitted energy at `dtau = 0`.
    pub extrapolated: f64,
    pub stderr: f64,
}

/// Runs `run` at every `dtau` and fits `E(n_max)` in even powers of `dtau`
/// up to `2 fit_order`.
pub fn dtau_sweep_and_fit(run: &KrylovRun, h: &PartitionedHamiltonian, dtau_list: &[f64], fit_order: usize) -> Result<SweepFit> {
    if fit_order == 0 {
        return Err(Error::invalid("fit order must be at least 1"));
    }
    let orders: Vec<u32> = (1..=fit_order).map(|k| 2 * k as u32).collect();
    if dtau_list.len() < orders.len() + 1 {
        return Err(Error::invalid(format!("{} time steps cannot determine {} coefficients", dtau_list.len(), orders.len() + 1)));
    }
    let mut energies = Vec::with_capacity(dtau_list.len());
    for &dt in dtau_list {
        let res = run.with_dtau(dt).run(h, None)?;
        let last = res.steps.last().expect("at least one step");
        if last.n != run.n_max {
            return Err(Error::breakdown(format!(
                "trace at dtau = {} stopped at n = {}: {}",
                dt,
                last.n,
                res.stopped.unwrap_or_default()
            )));
        }
        energies.push(last.energy);
    }
    let fit = polyfit_even_powers(dtau_list, &energies, &orders)?;
    Ok(SweepFit { dtau: dtau_list.to_vec(), energies, extrapolated: fit.intercept(), stderr: fit.intercept_stderr(), fit })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubspaceKind {
    /// `e^{-l dtau H} q` by the imaginary-time second-order product.
    Ite,
    /// `e^{-i l dtau H} q` by the second-order product.
    Rte,
    /// `H^l_ST(r) q`.
    Qpm,
}

#[derive(Clone, Debug)]
pub struct ComparisonResult {
    pub kind: SubspaceKind,
    pub steps: Vec<KrylovStep>,
    /// Set when the trace ended at the condition-number limit.
    pub truncated: bool,
}

/// Single-reference Krylov trace for one of the three subspace kinds, built
/// from normalized basis states with the second-order product formula.
/// Stops once `cond(S)` exceeds [`COND_LIMIT`].
pub fn comparison_subspaces(
    h: &PartitionedHamiltonian,
    q: &State,
    n_max: usize,
    dtau: f64,
    kind: SubspaceKind,
    r: usize,
    psi0: Option<&State>,
) -> Result<ComparisonResult> {
    if n_max == 0 || n_max > MAX_SUBSPACE {
        return Err(Error::invalid(format!("n_max must lie in 1..={}", MAX_SUBSPACE)));
    }
    let scheme = TrotterScheme::second_order(h.num_parts())?;
    let mut basis = Vec::with_capacity(n_max);
    let mut cur = q.clone();
    cur.normalize()?;
    match kind {
        SubspaceKind::Ite | SubspaceKind::Rte => {
            basis.push(cur.clone());
            for _ in 1..n_max {
                if kind == SubspaceKind::Ite {
                    apply_imaginary_trotter_mut(&scheme, h, dtau, &mut cur, true)?;
                } else {
                    apply_trotter_mut(&scheme, h, dtau, &mut cur)?;
                }
                basis.push(cur.clone());
            }
        }
        SubspaceKind::Qpm => {
            let cfg = PowerConfig::new(1, dtau, scheme).with_richardson(r);
            for o in power_states(&cfg, h, &cur, n_max - 1)? {
                let mut s = o.state;
                s.normalize()?;
                basis.push(s);
            }
        }
    }
    let mats = subspace_matrices_variational(&basis, h)?;
    let mut steps = Vec::with_capacity(n_max);
    let mut truncated = false;
    for n in 1..=n_max {
        let sol = match solve_subspace(&mats.leading(n), DEFAULT_S_CUT) {
            Ok(s) => s,
            Err(e) if n > 1 && e.is_numerical() => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if sol.cond > COND_LIMIT {
            truncated = true;
            break;
        }
        let fid = match psi0 {
            Some(p) => Some(fidelity(&sol.coefficients, &basis[..n], p)?),
            None => None,
        };
        steps.push(KrylovStep {
            n,
            energy: sol.energy,
            coefficients: sol.coefficients,
            fidelity: fid,
            cond: sol.cond,
            kept: sol.kept,
        });
    }
    Ok(ComparisonResult { kind, steps, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::lanczos_coefficients;
    use crate::refstates::{from_states, heisenberg_references};
    use crate::statevector::random_state;
    use approx::assert_abs_diff_eq;

    fn ring(n: usize) -> PartitionedHamiltonian {
        PartitionedHamiltonian::heisenberg_ring(n, 1.0).unwrap()
    }

    fn s2() -> TrotterScheme {
        TrotterScheme::second_order(2).unwrap()
    }

    #[test]
    fn first_block_is_the_references() {
        let h = ring(6);
        let refs = heisenberg_references(6).unwrap().select(&["phiA", "zafm1"]).unwrap();
        let b = build_basis(&refs, 3, &PowerConfig::new(1, 0.1, s2()).with_richardson(1), &h).unwrap();
        assert_eq!(b.states.len(), 6);
        assert_eq!(b.states[0], refs.states[0]);
        assert_eq!(b.states[1], refs.states[1]);
        let hq = h.apply(&refs.states[0]).unwrap();
        assert!(b.states[2].distance(&hq) < 1e-3 * hq.norm());
    }

    #[test]
    fn one_by_one_is_rayleigh_quotient() {
        let h = ring(6);
        let q = random_state(6, 4).unwrap();
        let mut q2 = q.clone();
        q2.scale(C64::new(3.0, 0.0));
        let m = subspace_matrices_variational(&[q2], &h).unwrap();
        let sol = solve_subspace(&m, DEFAULT_S_CUT).unwrap();
        assert_abs_diff_eq!(sol.energy, (m.h[(0, 0)] / m.s[(0, 0)]).re, epsilon = 1e-13);
        assert_abs_diff_eq!(sol.energy, h.expectation(&q).unwrap(), epsilon = 1e-12);
        assert_eq!(sol.cond, 1.0);
    }

    #[test]
    fn equilibration_leaves_energy_unchanged() {
        let h = ring(8);
        let refs = heisenberg_references(8).unwrap().select(&["phiA", "phiB"]).unwrap();
        let b = build_basis(&refs, 2, &PowerConfig::new(1, 0.05, s2()).with_richardson(1), &h).unwrap();
        let m = subspace_matrices_variational(&b.states, &h).unwrap();
        let a = solve_subspace_with(&m, 1e-14, true).unwrap();
        let c = solve_subspace_with(&m, 1e-14, false).unwrap();
        assert!((a.energy - c.energy).abs() < 1e-10 * a.energy.abs());
        // cond invariant under overall scaling of the references
        let mut scaled = refs.clone();
        for s in scaled.states.iter_mut() {
            s.scale(C64::new(0.0, 5.0));
        }
        let b2 = build_basis(&scaled, 2, &PowerConfig::new(1, 0.05, s2()).with_richardson(1), &h).unwrap();
        let m2 = subspace_matrices_variational(&b2.states, &h).unwrap();
        let a2 = solve_subspace(&m2, 1e-14).unwrap();
        assert!((a2.cond - a.cond).abs() < 1e-6 * a.cond);
    }

    #[test]
    fn solution_satisfies_generalized_problem() {
        let h = ring(8);
        let refs = heisenberg_references(8).unwrap().select(&["phiA"]).unwrap();
        let b = build_basis(&refs, 4, &PowerConfig::new(1, 0.1, s2()), &h).unwrap();
        let m = subspace_matrices_variational(&b.states, &h).unwrap();
        let sol = solve_subspace(&m, DEFAULT_S_CUT).unwrap();
        assert_eq!(sol.kept, 4);
        let v = nalgebra::DVector::from_vec(sol.coefficients.clone());
        let r = &m.h * &v - (&m.s * &v) * C64::new(sol.energy, 0.0);
        assert!(r.norm() <= 1e-8 * m.h.norm());
        assert_abs_diff_eq!((v.adjoint() * &m.s * &v)[(0, 0)].re, 1.0, epsilon = 1e-10);
        let big = sol.coefficients.iter().fold(C64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { *z } else { a });
        assert!(big.im.abs() < 1e-12 && big.re > 0.0);
    }

    #[test]
    fn indefinite_overlap_is_a_breakdown() {
        let m = SubspaceMatrices::from_raw(
            CMat::identity(2, 2),
            CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(2.0, 0.0), C64::new(1.0, 0.0)]),
        );
        let e = solve_subspace(&m, DEFAULT_S_CUT).unwrap_err();
        assert!(e.is_numerical());
    }

    #[test]
    fn variational_energies_decrease_and_fidelity_grows() {
        let h = ring(10);
        let g = h.exact_ground_state(1e-12).unwrap();
        let refs = heisenberg_references(10).unwrap().select(&["phiA"]).unwrap();
        let run = KrylovRun::new(refs, 6, PowerConfig::new(1, 0.05, s2()).with_richardson(1));
        let res = run.run(&h, Some(&g.state)).unwrap();
        assert_eq!(res.steps.len(), 6);
        assert!(res.hermiticity_residual < 1e-11);
        for w in res.steps.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-10);
            assert!(w[1].fidelity.unwrap() >= w[0].fidelity.unwrap() - 1e-6);
        }
        for s in &res.steps {
            assert!(s.energy >= g.energy - 1e-9);
            assert!(s.fidelity.unwrap() <= 1.0 + 1e-10);
        }
        // direct cross-check of the fidelity path
        let b = build_basis(&run.refs, 6, &run.power, &h).unwrap();
        let last = res.steps.last().unwrap();
        let f = fidelity(&last.coefficients, &b.states, &g.state).unwrap();
        assert_abs_diff_eq!(f, last.fidelity.unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn schemes_agree_at_first_block() {
        let h = ring(8);
        let refs = heisenberg_references(8).unwrap().select(&["phiA", "xafm1"]).unwrap();
        for r in [0usize, 1] {
            let cfg = PowerConfig::new(1, 0.1, s2()).with_richardson(r);
            let b = build_basis(&refs, 1, &cfg, &h).unwrap();
            let v = subspace_matrices_variational(&b.states, &h).unwrap();
            let d = subspace_matrices_direct(&refs, 1, &cfg, &h).unwrap();
            assert!((&v.s - &d.s).norm() < 1e-13);
            // H differs only by the power error of one step
            assert!((&v.h - &d.h).norm() < 1e-2 * v.h.norm());
        }
    }

    #[test]
    fn direct_matches_variational_at_r0_except_hamiltonian() {
        // at r = 0 the overlaps coincide exactly through the exponent law
        let h = ring(8);
        let refs = heisenberg_references(8).unwrap().select(&["phiA", "phiB"]).unwrap();
        let cfg = PowerConfig::new(1, 0.1, s2());
        let b = build_basis(&refs, 3, &cfg, &h).unwrap();
        let v = subspace_matrices_variational(&b.states, &h).unwrap();
        let d = subspace_matrices_direct(&refs, 3, &cfg, &h).unwrap();
        assert!((&v.s - &d.s).norm() < 1e-10 * v.s.norm());
    }

    #[test]
    fn scheme_difference_shrinks_quadratically() {
        let h = ring(8);
        let refs = heisenberg_references(8).unwrap().select(&["phiA"]).unwrap();
        let ex = exact_basis(&refs, 3, &h).unwrap();
        let exact = subspace_matrices_variational(&ex.states, &h).unwrap();
        let mut diffs = Vec::new();
        let dts = [0.08, 0.04, 0.02];
        for dt in dts {
            let cfg = PowerConfig::new(1, dt, s2());
            let d = subspace_matrices_direct(&refs, 3, &cfg, &h).unwrap();
            diffs.push((&d.h - &exact.h).norm() / exact.h.norm());
        }
        let fit = crate::metrics::linear_fit(&dts.map(f64::ln), &diffs.iter().map(|x| x.ln()).collect::<Vec<_>>()).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.2, "slope {}", fit.slope);
    }

    #[test]
    fn cholesky_reduction_gives_lanczos_tridiagonal() {
        let h = ring(8);
        let q = heisenberg_references(8).unwrap().get("xafm1").unwrap().clone();
        let refs = from_states(alloc::vec![q.clone()]);
        let b = exact_basis(&refs, 4, &h).unwrap();
        let m = subspace_matrices_variational(&b.states, &h).unwrap();
        let l = m.s.clone().cholesky().unwrap().l();
        let li = l.clone().try_inverse().unwrap();
        let t = &li * &m.h * li.adjoint();
        let (alpha, beta) = lanczos_coefficients(&h, &q, 4).unwrap();
        for i in 0..4 {
            assert!((t[(i, i)].re - alpha[i]).abs() < 1e-8 * alpha[i].abs().max(1.0));
            if i + 1 < 4 {
                assert!((t[(i + 1, i)].norm() - beta[i]).abs() < 1e-8 * beta[i].max(1.0));
            }
            for j in 0..4 {
                if i.abs_diff(j) > 1 {
                    assert!(t[(i, j)].norm() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn sweep_fit_recovers_exact_limit() {
        let h = ring(8);
        let refs = heisenberg_references(8).unwrap().select(&["phiA"]).unwrap();
        let run = KrylovRun::new(refs.clone(), 3, PowerConfig::new(1, 0.1, s2())).with_scheme(MatrixScheme::Direct);
        let fit = dtau_sweep_and_fit(&run, &h, &[0.02, 0.04, 0.06, 0.08], 2).unwrap();
        let ex = exact_basis(&refs, 3, &h).unwrap();
        let exact = solve_subspace(&subspace_matrices_variational(&ex.states, &h).unwrap(), DEFAULT_S_CUT).unwrap().energy;
        assert!((fit.extrapolated - exact).abs() < 1e-5, "{} vs {}", fit.extrapolated, exact);
        assert!(dtau_sweep_and_fit(&run, &h, &[0.1, 0.2], 2).is_err());
    }

    #[test]
    fn comparison_traces_reduce_error() {
        let h = ring(8);
        let g = h.exact_ground_state(1e-12).unwrap();
        let q = heisenberg_references(8).unwrap().get("phiA").unwrap().clone();
        let e1 = h.expectation(&q).unwrap();
        for kind in [SubspaceKind::Ite, SubspaceKind::Rte, SubspaceKind::Qpm] {
            let res = comparison_subspaces(&h, &q, 8, 0.3, kind, 0, Some(&g.state)).unwrap();
            let last = res.steps.last().unwrap();
            assert!(last.energy < e1);
            assert!(last.energy >= g.energy - 1e-9);
            assert!(res.steps.iter().all(|s| s.cond <= COND_LIMIT));
        }
    }
}
