//! Hamiltonian moments and cumulants from central differences of the
//! Trotterized propagator `K(t) = <psi|S(t)|psi>`, connected-moment
//! energies, and Lanczos coefficients recovered from moments.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hamiltonian::spectral_quadrature;
use crate::hamiltonian::PartitionedHamiltonian;
use crate::qpower::{binomial, cnk, richardson_weights, CANCELLATION_DIGITS};
use crate::statevector::State;
use crate::trotter::{apply_trotter_mut, TrotterScheme};
use crate::{Error, Result, C64};

/// `K_l = <psi|[S(dtau/2)]^l|psi>` for `l = 0..=L`, i.e. `K(l dtau / 2)`.
#[derive(Clone, Debug)]
pub struct PropagatorSeries {
    pub dtau: f64,
    pub values: Vec<C64>,
    /// Continuous `arg K_l` anchored at `arg K_0 = 0`.
    pub phase_unwrapped: Vec<f64>,
    /// Set when some neighbouring phase step exceeds `pi/2`.
    pub phase_ambiguous: bool,
}

impl PropagatorSeries {
    fn new(dtau: f64, values: Vec<C64>) -> Self {
        let mut phase = Vec::with_capacity(values.len());
        let mut ambiguous = false;
        let mut prev = 0.0;
        for (l, k) in values.iter().enumerate() {
            if l == 0 {
                phase.push(0.0);
                prev = k.arg();
                continue;
            }
            let raw = k.arg();
            let mut step = raw - prev;
            step -= 2.0 * PI * ((step + PI) / (2.0 * PI)).floor();
            ambiguous |= step.abs() > PI / 2.0;
            phase.push(phase[l - 1] + step);
            prev = raw;
        }
        PropagatorSeries { dtau, values, phase_unwrapped: phase, phase_ambiguous: ambiguous }
    }

    /// Largest available `l`.
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() <= 1
    }

    /// `K_l` for negative `l` too, via `K(-t) = conj K(t)`.
    pub fn at(&self, l: i64) -> C64 {
        let k = self.values[l.unsigned_abs() as usize];
        if l < 0 {
            k.conj()
        } else {
            k
        }
    }

    /// `Phi_l = ln|K_l| + i arg K_l` on the unwrapped branch.
    pub fn log_at(&self, l: i64) -> C64 {
        let i = l.unsigned_abs() as usize;
        let v = C64::new(self.values[i].norm().ln(), self.phase_unwrapped[i]);
        if l < 0 {
            v.conj()
        } else {
            v
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > self.len() {
            return Err(Error::invalid(format!("propagator series of length {} too short for order {}", self.len(), n)));
        }
        Ok(())
    }

    /// Central-difference estimate `sum_i c_{n,i} f(n - 2i)` and its
    /// round-off amplification.
    fn difference(&self, n: usize, f: impl Fn(i64) -> C64) -> Result<(f64, f64)> {
        self.check_len(n)?;
        let mut sum = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for i in 0..=n {
            let c = cnk(n, i, self.dtau)?;
            let v = f(n as i64 - 2 * i as i64);
            sum += c * v;
            scale += c.norm() * v.norm();
        }
        if sum.im.abs() > 1e-9 * scale.max(1.0) {
            return Err(Error::breakdown(format!("order-{} difference has imaginary part {:e}", n, sum.im)));
        }
        let amp = if sum.re == 0.0 {
            if scale == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            scale / sum.re.abs()
        };
        Ok((sum.re, amp))
    }
}

/// One forward ladder of `L` half steps from the normalized `psi`.
pub fn propagator_series(
    h: &PartitionedHamiltonian,
    scheme: &TrotterScheme,
    dtau: f64,
    len: usize,
    psi: &State,
) -> Result<PropagatorSeries> {
    if (psi.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::invalid("propagator series needs a normalized state"));
    }
    if !(dtau.is_finite() && dtau != 0.0) {
        return Err(Error::invalid(format!("dtau must be finite and nonzero, got {}", dtau)));
    }
    let mut values = Vec::with_capacity(len + 1);
    values.push(C64::new(1.0, 0.0));
    let mut cur = psi.clone();
    for _ in 0..len {
        apply_trotter_mut(scheme, h, dtau / 2.0, &mut cur)?;
        values.push(psi.inner(&cur)?);
    }
    Ok(PropagatorSeries::new(dtau, values))
}

/// Series at `dtau / ratio^l` for `l = 0..=r`, for Richardson-extrapolated
/// differences.
#[derive(Clone, Debug)]
pub struct PropagatorLevels {
    pub ratio: f64,
    pub levels: Vec<PropagatorSeries>,
}

impl PropagatorLevels {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        h: &PartitionedHamiltonian,
        scheme: &TrotterScheme,
        dtau: f64,
        r: usize,
        ratio: f64,
        len: usize,
        psi: &State,
    ) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0 && ratio != 1.0) {
            return Err(Error::invalid(format!("Richardson ratio must be positive and != 1, got {}", ratio)));
        }
        let levels =
            (0..=r).map(|l| propagator_series(h, scheme, dtau / ratio.powi(l as i32), len, psi)).collect::<Result<_>>()?;
        Ok(PropagatorLevels { ratio, levels })
    }

    pub fn r(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn dtau(&self) -> f64 {
        self.levels[0].dtau
    }

    pub fn phase_ambiguous(&self) -> bool {
        self.levels.iter().any(|s| s.phase_ambiguous)
    }

    fn combine(&self, each: impl Fn(&PropagatorSeries) -> Result<(f64, f64)>) -> Result<(f64, f64)> {
        let w = richardson_weights(self.r(), self.ratio);
        let mut sum = 0.0;
        let mut scale = 0.0;
        for (wl, s) in w.iter().zip(&self.levels) {
            let (v, amp) = each(s)?;
            sum += wl * v;
            scale += wl.abs() * v.abs() * amp;
        }
        let amp = if sum == 0.0 {
            if scale == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            scale / sum.abs()
        };
        Ok((sum, amp))
    }
}

/// Finite-difference `mu_n`, Richardson-combined over the levels.
pub fn moments_from_propagator(levels: &PropagatorLevels, n: usize) -> Result<f64> {
    Ok(levels.combine(|s| s.difference(n, |l| s.at(l)))?.0)
}

/// Finite-difference `kappa_n` from the unwrapped `Phi = ln K`.
pub fn cumulants_from_propagator(levels: &PropagatorLevels, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    Ok(levels.combine(|s| s.difference(n, |l| s.log_at(l)))?.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentSource {
    FiniteDifference { dtau: f64, r: usize },
    ExactSparse,
}

#[derive(Clone, Debug)]
pub struct MomentSet {
    /// `mu_0..=mu_nmax`, `mu_0 = 1`.
    pub mu: Vec<f64>,
    /// `kappa_0..=kappa_nmax`, `kappa_0 = 0`.
    pub kappa: Vec<f64>,
    pub source: MomentSource,
    /// log10 round-off amplification per moment (zero for exact moments).
    pub digits_lost: Vec<f64>,
    pub cancellation_warning: bool,
    pub phase_ambiguous: bool,
}

impl MomentSet {
    pub fn n_max(&self) -> usize {
        self.mu.len() - 1
    }
}

/// Moments and cumulants up to `n_max` from propagator levels; cumulants are
/// taken from the phase of `K` directly.
pub fn finite_difference_moments(levels: &PropagatorLevels, n_max: usize) -> Result<MomentSet> {
    let mut mu = vec![1.0];
    let mut kappa = vec![0.0];
    let mut digits = vec![0.0];
    for n in 1..=n_max {
        let (m, amp) = levels.combine(|s| s.difference(n, |l| s.at(l)))?;
        mu.push(m);
        digits.push(amp.max(1.0).log10());
        kappa.push(cumulants_from_propagator(levels, n)?);
    }
    let warn = digits.iter().any(|d| !(*d <= CANCELLATION_DIGITS));
    Ok(MomentSet {
        mu,
        kappa,
        source: MomentSource::FiniteDifference { dtau: levels.dtau(), r: levels.r() },
        digits_lost: digits,
        cancellation_warning: warn,
        phase_ambiguous: levels.phase_ambiguous(),
    })
}

/// `<psi|H^n|psi>` for `n = 0..=n_max` by repeated sparse application,
/// using `mu_{2k} = |H^k psi|^2` and `mu_{2k+1} = <H^k psi|H^{k+1} psi>`.
pub fn exact_moments(h: &PartitionedHamiltonian, psi: &State, n_max: usize) -> Result<MomentSet> {
    let half = n_max / 2 + 1;
    let mut v = vec![psi.clone()];
    for k in 1..=half {
        let next = h.apply(&v[k - 1])?;
        v.push(next);
    }
    let mut mu = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let k = n / 2;
        mu.push(if n % 2 == 0 { v[k].norm_sqr() } else { v[k].inner(&v[k + 1])?.re });
    }
    let norm = mu[0];
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::invalid("moments need a normalized state"));
    }
    let kappa = cumulants_from_moments(&mu)?;
    Ok(MomentSet {
        digits_lost: vec![0.0; mu.len()],
        mu,
        kappa,
        source: MomentSource::ExactSparse,
        cancellation_warning: false,
        phase_ambiguous: false,
    })
}

/// Double-double accumulator: `hi + lo` carries about 32 significant digits.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, b: Dd) -> Dd {
        let s = self.hi + b.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (b.hi - bb);
        let lo = err + self.lo + b.lo;
        let hi = s + lo;
        Dd { hi, lo: lo - (hi - s) }
    }

    fn mul(self, b: Dd) -> Dd {
        let p = self.hi * b.hi;
        let err = self.hi.mul_add(b.hi, -p);
        let lo = err + self.hi * b.lo + self.lo * b.hi;
        let hi = p + lo;
        Dd { hi, lo: lo - (hi - p) }
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

/// Shared recursion: `out_n = x_n + sign * sum_{k=1}^{n-1} C(n-1, k-1) k_k m_{n-k}`
/// where `k` is the cumulant and `m` the moment sequence being built or read.
fn convert(input: &[f64], to_cumulants: bool) -> Vec<f64> {
    let len = input.len();
    let mut mu = vec![Dd::new(0.0); len];
    let mut kappa = vec![Dd::new(0.0); len];
    if len == 0 {
        return Vec::new();
    }
    mu[0] = Dd::new(1.0);
    for n in 1..len {
        let mut s = Dd::new(0.0);
        for k in 1..n {
            s = s.add(Dd::new(binomial(n - 1, k - 1)).mul(kappa[k]).mul(mu[n - k]));
        }
        if to_cumulants {
            mu[n] = Dd::new(input[n]);
            kappa[n] = mu[n].add(s.neg());
        } else {
            kappa[n] = Dd::new(input[n]);
            mu[n] = kappa[n].add(s);
        }
    }
    let out = if to_cumulants { kappa } else { mu };
    out.iter().map(|d| d.hi + d.lo).collect()
}

/// `kappa_n = mu_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k mu_{n-k}`, accumulated
/// in double-double so the only rounding is that of the outputs.
pub fn cumulants_from_moments(mu: &[f64]) -> Result<Vec<f64>> {
    if mu.first().is_none_or(|m| (m - 1.0).abs() > 1e-12) {
        return Err(Error::invalid("moment sequence must start with mu_0 = 1"));
    }
    Ok(convert(mu, true))
}

/// Inverse of [`cumulants_from_moments`].
pub fn moments_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    convert(kappa, false)
}

/// Connected-moment energy truncated after `n_max` cumulants:
/// `sum_{n<n_max} (-tau)^n kappa_{n+1} / n!` on every grid point.
pub fn cmx_energy(kappa: &[f64], n_max: usize, taus: &[f64]) -> Result<Vec<f64>> {
    if n_max == 0 || kappa.len() <= n_max {
        return Err(Error::invalid(format!("need cumulants up to order {}, have {}", n_max, kappa.len().saturating_sub(1))));
    }
    Ok(taus
        .iter()
        .map(|&tau| {
            let mut term = 1.0;
            let mut e = 0.0;
            for n in 0..n_max {
                if n > 0 {
                    term *= -tau / n as f64;
                }
                e += term * kappa[n + 1];
            }
            e
        })
        .collect())
}

/// Exact imaginary-time energy and its slope `dE/dtau = -(<H^2>_tau - E^2)`.
#[derive(Clone, Debug)]
pub struct ImaginaryTimeCurve {
    pub tau: Vec<f64>,
    pub energy: Vec<f64>,
    pub slope: Vec<f64>,
}

/// `E(tau)` for `e^{-tau H / 2} psi`, normalized, from a Gauss quadrature of
/// the spectral measure of `psi`.
pub fn exact_ite_energy(h: &PartitionedHamiltonian, psi: &State, taus: &[f64]) -> Result<ImaginaryTimeCurve> {
    if h.n_qubits() > 20 {
        return Err(Error::invalid("exact imaginary-time curves are limited to 20 qubits"));
    }
    let budget = (1usize << 31) / (16 * h.dim());
    let steps = h.dim().min(100).min(budget.max(24));
    let (vals, weights) = spectral_quadrature(h, psi, steps)?;
    let e_min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mut energy = Vec::with_capacity(taus.len());
    let mut slope = Vec::with_capacity(taus.len());
    for &tau in taus {
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (e, w) in vals.iter().zip(&weights) {
            let b = w * (-(tau * (e - e_min))).exp();
            z += b;
            m1 += b * e;
            m2 += b * e * e;
        }
        let en = m1 / z;
        energy.push(en);
        slope.push(-(m2 / z - en * en).max(0.0));
    }
    Ok(ImaginaryTimeCurve { tau: taus.to_vec(), energy, slope })
}

/// Ratios `det A_n / det A_{n-1}` for the Hankel matrices
/// `[A_n]_{ij} = mu_{i+j+offset}`, `i, j = 0..=n`, for `n = 0..count`, by
/// bordering with rank-one inverse updates. `r_0 = mu_offset`.
pub fn hankel_ratios(mu: &[f64], offset: usize, count: usize, require_positive: bool) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let need = 2 * (count - 1) + offset;
    if mu.len() <= need {
        return Err(Error::invalid(format!("need moments up to order {}, have {}", need, mu.len() - 1)));
    }
    // a ratio this small relative to its diagonal entry is cancellation noise
    let check = |r: f64, n: usize, diag: f64| -> Result<()> {
        let tiny = r.abs() <= 1e-12 * diag.abs();
        let bad = tiny || if require_positive { !(r > 0.0) } else { !(r != 0.0 && r.is_finite()) };
        if bad {
            Err(Error::breakdown(format!("Hankel determinant ratio {} is {:e} (order {})", n, r, offset)))
        } else {
            Ok(())
        }
    };
    let r0 = mu[offset];
    let r0_scale = if offset > 0 && mu.len() > offset + 1 { (mu[offset - 1] * mu[offset + 1]).abs().sqrt() } else { 0.0 };
    check(r0, 0, r0_scale)?;
    let mut ratios = vec![r0];
    // inverse of A_{n-1}, row-major n x n
    let mut inv = vec![1.0 / r0];
    for n in 1..count {
        let b: Vec<f64> = (0..n).map(|i| mu[n + i + offset]).collect();
        let d = mu[2 * n + offset];
        let ab: Vec<f64> = (0..n).map(|i| (0..n).map(|j| inv[i * n + j] * b[j]).sum()).collect();
        let r = d - b.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>();
        check(r, n, d)?;
        ratios.push(r);
        let m = n + 1;
        let mut next = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                next[i * m + j] = inv[i * n + j] + ab[i] * ab[j] / r;
            }
            next[i * m + n] = -ab[i] / r;
            next[n * m + i] = -ab[i] / r;
        }
        next[n * m + n] = 1.0 / r;
        inv = next;
    }
    Ok(ratios)
}

/// Lanczos coefficients from moments `mu_0..=mu_K`: `alpha_1..` (as many as
/// `mu_{2i-1}` allows) and `beta_1..` (as many as `mu_{2i}` allows).
pub fn lanczos_from_moments(mu: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if mu.len() < 2 {
        return Err(Error::invalid("need at least mu_0 and mu_1"));
    }
    let k = mu.len() - 1;
    let n_alpha = k.div_ceil(2);
    let n_beta = k / 2;
    // lr[n] = L_n / L_{n-1}, mr[n] = M_n / M_{n-1}
    let lr = hankel_ratios(mu, 0, n_beta.max(n_alpha - 1) + 1, true)?;
    let mr = hankel_ratios(mu, 1, n_alpha, false)?;
    let alpha = (1..=n_alpha)
        .map(|i| {
            let first = if i >= 2 { lr[i - 1] / mr[i - 2] } else { 0.0 };
            first + mr[i - 1] / lr[i - 1]
        })
        .collect();
    let beta = (1..=n_beta).map(|i| (lr[i] / lr[i - 1]).sqrt()).collect();
    Ok((alpha, beta))
}

/// Moments of `H - shift` from those of `H`.
pub fn shift_moments(mu: &[f64], shift: f64) -> Vec<f64> {
    (0..mu.len()).map(|n| (0..=n).map(|k| binomial(n, k) * mu[k] * (-shift).powi((n - k) as i32)).sum()).collect()
}

/// [`lanczos_from_moments`] on the moments of `H - shift`, with `shift` added
/// back to the diagonal. Useful when a first moment near zero makes the odd
/// Hankel sequence singular.
pub fn lanczos_from_moments_shifted(mu: &[f64], shift: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (alpha, beta) = lanczos_from_moments(&shift_moments(mu, shift))?;
    Ok((alpha.into_iter().map(|a| a + shift).collect(), beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refstates::heisenberg_references;
    use crate::trotter::TrotterScheme;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ring(n: usize) -> PartitionedHamiltonian {
        PartitionedHamiltonian::heisenberg_ring(n, 1.0).unwrap()
    }

    #[test]
    fn series_basics() {
        let h = ring(6);
        let phi = heisenberg_references(6).unwrap().get("phiA").unwrap().clone();
        let s = propagator_series(&h, &TrotterScheme::second_order(2).unwrap(), 0.02, 4, &phi).unwrap();
        assert_eq!(s.values[0], C64::new(1.0, 0.0));
        assert!(s.values.iter().all(|k| k.norm() <= 1.0 + 1e-10));
        let e = h.expectation(&phi).unwrap();
        let im = s.values[1].im;
        assert!((im + 0.01 * e).abs() < 1e-3 * (0.01 * e).abs());
        assert_eq!(s.at(-2), s.values[2].conj());
    }

    #[test]
    fn eigenstate_series_is_pure_phase() {
        let h = ring(6);
        let g = h.exact_ground_state(1e-12).unwrap();
        let s = propagator_series(&h, &TrotterScheme::new(2, 5, 2).unwrap(), 0.01, 6, &g.state).unwrap();
        for (l, k) in s.values.iter().enumerate() {
            assert_abs_diff_eq!(k.norm(), 1.0, epsilon = 1e-8);
            let want = C64::from_polar(1.0, -g.energy * l as f64 * 0.005);
            assert!((k - want).norm() < 1e-6);
        }
    }

    #[test]
    fn low_order_closed_forms() {
        let h = ring(6);
        let phi = heisenberg_references(6).unwrap().get("xafm1").unwrap().clone();
        let dt = 0.1;
        let lv = PropagatorLevels::build(&h, &TrotterScheme::second_order(2).unwrap(), dt, 0, 2.0, 4, &phi).unwrap();
        let s = &lv.levels[0];
        assert_abs_diff_eq!(moments_from_propagator(&lv, 1).unwrap(), -2.0 / dt * s.values[1].im, epsilon = 1e-10);
        assert_abs_diff_eq!(moments_from_propagator(&lv, 2).unwrap(), 2.0 / (dt * dt) * (1.0 - s.values[2].re), epsilon = 1e-8);
        assert_abs_diff_eq!(cumulants_from_propagator(&lv, 1).unwrap(), moments_from_propagator(&lv, 1).unwrap(), epsilon = 1e-6);
        assert!(lv.levels[0].check_len(5).is_err());
    }

    #[test]
    fn finite_difference_moments_approach_exact() {
        let h = ring(8);
        let phi = heisenberg_references(8).unwrap().get("phiA").unwrap().clone();
        let exact = exact_moments(&h, &phi, 4).unwrap();
        let scheme = TrotterScheme::second_order(2).unwrap();
        for r in [0usize, 1] {
            let lv = PropagatorLevels::build(&h, &scheme, 0.01, r, 2.0, 4, &phi).unwrap();
            let fd = finite_difference_moments(&lv, 4).unwrap();
            for n in 1..=4 {
                let rel = (fd.mu[n] - exact.mu[n]).abs() / exact.mu[n].abs();
                assert!(rel < if r == 0 { 1e-3 } else { 1e-5 }, "n={} r={} rel={:e}", n, r, rel);
            }
            assert_abs_diff_eq!(fd.kappa[2], fd.mu[2] - fd.mu[1] * fd.mu[1], epsilon = 1e-4);
        }
    }

    #[test]
    fn point_distribution_cumulants() {
        let a: f64 = 1.7;
        let mu: Vec<f64> = (0..8).map(|n| a.powi(n)).collect();
        let k = cumulants_from_moments(&mu).unwrap();
        assert_abs_diff_eq!(k[1], a, epsilon = 1e-12);
        for v in &k[2..] {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn third_cumulant_expansion() {
        let mu = [1.0, 0.3, 1.2, -0.4];
        let k = cumulants_from_moments(&mu).unwrap();
        assert_abs_diff_eq!(k[3], mu[3] - 3.0 * mu[2] * mu[1] + 2.0 * mu[1].powi(3), epsilon = 1e-14);
        assert!(cumulants_from_moments(&[2.0, 1.0]).is_err());
    }

    #[test]
    fn cmx_low_orders() {
        let kappa = [0.0, -1.0, 0.5, 0.2];
        let taus = [0.0, 0.5, 1.0];
        assert_eq!(cmx_energy(&kappa, 1, &taus).unwrap(), vec![-1.0; 3]);
        let e2 = cmx_energy(&kappa, 2, &taus).unwrap();
        for (e, t) in e2.iter().zip(taus) {
            assert_abs_diff_eq!(*e, -1.0 - 0.5 * t, epsilon = 1e-15);
        }
        assert!(cmx_energy(&kappa, 3, &taus).is_ok());
        assert!(cmx_energy(&kappa, 4, &taus).is_err());
    }

    #[test]
    fn cmx_two_level_reproduces_exact_curve() {
        // spectrum {0, 1} with weights {p, 1 - p}
        let p: f64 = 0.3;
        let mu: Vec<f64> = (0..=40).map(|n| if n == 0 { 1.0 } else { 1.0 - p }).collect();
        let kappa = cumulants_from_moments(&mu).unwrap();
        let taus: Vec<f64> = (0..=10).map(|k| k as f64 * 0.05).collect();
        let cmx = cmx_energy(&kappa, 40, &taus).unwrap();
        for (t, e) in taus.iter().zip(cmx) {
            let b = (1.0 - p) * (-t).exp();
            assert_abs_diff_eq!(e, b / (p + b), epsilon = 1e-9);
        }
    }

    #[test]
    fn exact_curve_behaviour() {
        let h = ring(8);
        let phi = heisenberg_references(8).unwrap().get("phiA").unwrap().clone();
        let taus: Vec<f64> = (0..=60).map(|k| k as f64 * 0.5).collect();
        let c = exact_ite_energy(&h, &phi, &taus).unwrap();
        let m = exact_moments(&h, &phi, 2).unwrap();
        assert_abs_diff_eq!(c.energy[0], m.mu[1], epsilon = 1e-10);
        assert_abs_diff_eq!(c.slope[0], -m.kappa[2], epsilon = 1e-9);
        assert!(c.energy.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        let e0 = h.exact_ground_state(1e-12).unwrap().energy;
        assert!((c.energy.last().unwrap() - e0).abs() < 1e-6);
    }

    #[test]
    fn lanczos_from_moments_low_orders() {
        let mu = [1.0, 0.4, 1.3, 0.9, 2.9];
        let (a, b) = lanczos_from_moments(&mu).unwrap();
        assert_abs_diff_eq!(a[0], 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(b[0], (1.3f64 - 0.16).sqrt(), epsilon = 1e-14);
        let a2 = (0.9 - 2.0 * 1.3 * 0.4 + 0.4f64.powi(3)) / (1.3 - 0.16);
        assert_abs_diff_eq!(a[1], a2, epsilon = 1e-13);
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn lanczos_from_exact_moments_matches_classical() {
        let h = ring(8);
        let refs = heisenberg_references(8).unwrap();
        for label in ["phiA", "xafm1"] {
            let phi = refs.get(label).unwrap().clone();
            let m = exact_moments(&h, &phi, 9).unwrap();
            let (a, b) = if label == "phiA" {
                lanczos_from_moments(&m.mu).unwrap()
            } else {
                // zero mean energy: the unshifted odd Hankel sequence is singular
                assert!(lanczos_from_moments(&m.mu).is_err());
                lanczos_from_moments_shifted(&m.mu, -m.mu[2].sqrt()).unwrap()
            };
            let (ca, cb) = crate::hamiltonian::lanczos_coefficients(&h, &phi, 5).unwrap();
            for i in 0..5 {
                assert!((a[i] - ca[i]).abs() < 1e-8 * ca[i].abs().max(1.0), "{} alpha {} {} {}", label, i + 1, a[i], ca[i]);
            }
            for i in 0..4 {
                assert!((b[i] - cb[i]).abs() < 1e-8 * cb[i].max(1.0), "{} beta {}", label, i + 1);
            }
        }
    }

    #[test]
    fn hankel_ratios_match_determinants() {
        let h = ring(6);
        let phi = heisenberg_references(6).unwrap().get("zafm1").unwrap().clone();
        let mu = exact_moments(&h, &phi, 8).unwrap().mu;
        let r = hankel_ratios(&mu, 0, 4, true).unwrap();
        let det = |n: usize| crate::linalg::RMat::from_fn(n + 1, n + 1, |i, j| mu[i + j]).determinant();
        let mut prev = 1.0;
        for (n, rn) in r.iter().enumerate() {
            let d = det(n);
            assert!(d > 0.0);
            assert!((rn - d / prev).abs() < 1e-9 * rn.abs());
            prev = d;
        }
        // a degenerate measure loses positivity
        assert!(hankel_ratios(&[1.0, 1.0, 1.0, 1.0, 1.0], 0, 3, true).is_err());
    }

    proptest! {
        #[test]
        fn conversion_round_trip(center in -3.0f64..3.0, draws in proptest::collection::vec(-1.0f64..1.0, 16..128)) {
            // empirical moments of a sample
            let r = draws.len() as f64;
            let mu: Vec<f64> = (0..=12).map(|n| draws.iter().map(|x| (center + x).powi(n)).sum::<f64>() / r).collect();
            let kappa = cumulants_from_moments(&mu).unwrap();
            let back = moments_from_cumulants(&kappa);
            for (a, b) in mu.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
            }
        }
    }
}
