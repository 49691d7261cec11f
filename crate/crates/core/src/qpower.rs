//! Hamiltonian powers from central finite differences of Trotterized
//! propagators, with Richardson extrapolation in the time step.
//!
//! `H^n_ST(dtau) = (i/dtau)^n [S(dtau/2) - S(-dtau/2)]^n`. Two evaluation
//! routes are provided for the product form:
//!
//! * [`Route::Iterated`] applies the first-order difference `n` times. Each
//!   step cancels only `O(1/(dtau |H|))` in magnitude, so large powers stay
//!   accurate.
//! * [`Route::Ladder`] expands the binomial into `sum_k c_{n,k} S(dtau/2)^{n-2k}`
//!   over a cached ladder of evolved states. The terms grow like
//!   `(2/dtau)^n` while the sum is `O(|H|^n)`, so digits are lost quickly.
//!
//! Both are the same operator in exact arithmetic.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hamiltonian::PartitionedHamiltonian;
use crate::statevector::{linear_combine, State};
use crate::trotter::{apply_trotter_mut, apply_trotter_power_mut, TrotterScheme};
use crate::{Error, Result, C64};

/// Estimated significant digits lost beyond which a result is flagged.
pub const CANCELLATION_DIGITS: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formalism {
    /// Powers of the symmetric finite difference.
    ProductForm,
    /// One Trotter step per term at time `(n/2 - k) dtau`; needs `2m >= n`.
    AlternativeForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Iterated,
    Ladder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerConfig {
    pub n: usize,
    pub dtau: f64,
    /// Richardson order.
    pub r: usize,
    /// Richardson step ratio.
    pub h: f64,
    pub scheme: TrotterScheme,
    pub formalism: Formalism,
    pub route: Route,
}

impl PowerConfig {
    pub fn new(n: usize, dtau: f64, scheme: TrotterScheme) -> Self {
        PowerConfig { n, dtau, r: 0, h: 2.0, scheme, formalism: Formalism::ProductForm, route: Route::Iterated }
    }

    pub fn with_richardson(mut self, r: usize) -> Self {
        self.r = r;
        self
    }

    pub fn with_ratio(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_formalism(mut self, formalism: Formalism) -> Self {
        self.formalism = formalism;
        self
    }

    pub fn with_route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }

    pub fn with_power(&self, n: usize) -> Self {
        let mut c = self.clone();
        c.n = n;
        c
    }

    pub fn with_dtau(&self, dtau: f64) -> Self {
        let mut c = self.clone();
        c.dtau = dtau;
        c
    }

    /// Negative `dtau` is accepted; it is used for evenness checks.
    pub fn validate(&self) -> Result<()> {
        if !(self.dtau.is_finite() && self.dtau != 0.0) {
            return Err(Error::invalid(format!("dtau must be finite and nonzero, got {}", self.dtau)));
        }
        if !(self.h.is_finite() && self.h > 0.0 && self.h != 1.0) {
            return Err(Error::invalid(format!("Richardson ratio must be positive and != 1, got {}", self.h)));
        }
        if self.formalism == Formalism::AlternativeForm && 2 * self.scheme.m() < self.n {
            return Err(Error::AlternativeOrder { m: self.scheme.m(), n: self.n });
        }
        Ok(())
    }

    /// Time steps `dtau / h^l` for `l = 0..=r`.
    pub fn level_steps(&self) -> Vec<f64> {
        (0..=self.r).map(|l| self.dtau / self.h.powi(l as i32)).collect()
    }
}

/// A state produced by a power evaluation together with its conditioning.
#[derive(Clone, Debug)]
pub struct PowerOutput {
    pub state: State,
    /// log10 of the estimated round-off amplification.
    pub digits_lost: f64,
    pub cancellation_warning: bool,
}

impl PowerOutput {
    fn new(state: State, amplification: f64) -> Self {
        let digits_lost = amplification.max(1.0).log10();
        PowerOutput { state, digits_lost, cancellation_warning: !(digits_lost <= CANCELLATION_DIGITS) }
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|j| ((n - j) as f64).ln() - ((j + 1) as f64).ln()).sum()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 60 {
        let k = k.min(n - k);
        let mut c = 1u128;
        for j in 0..k {
            c = c * (n - j) as u128 / (j + 1) as u128;
        }
        c as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

/// `c_{n,k} = (i^n / dtau^n) (-1)^k C(n,k)`
pub fn cnk(n: usize, k: usize, dtau: f64) -> Result<C64> {
    if k > n {
        return Err(Error::invalid(format!("c_(n,k) needs k <= n (n = {}, k = {})", n, k)));
    }
    let log_mag = ln_binomial(n, k) - n as f64 * dtau.abs().ln();
    if log_mag > 700.0 {
        return Err(Error::breakdown(format!("c_({},{}) overflows at dtau = {}", n, k, dtau)));
    }
    let mut mag = binomial(n, k) / dtau.abs().powi(n as i32);
    if dtau < 0.0 && n % 2 == 1 {
        mag = -mag;
    }
    if k % 2 == 1 {
        mag = -mag;
    }
    let c = match n % 4 {
        0 => C64::new(mag, 0.0),
        1 => C64::new(0.0, mag),
        2 => C64::new(-mag, 0.0),
        _ => C64::new(0.0, -mag),
    };
    Ok(c)
}

/// Weights `w_l` with `H_(r)(dtau) = sum_l w_l H_(0)(dtau / h^l)`.
pub fn richardson_weights(r: usize, h: f64) -> Vec<f64> {
    let mut w = vec![1.0];
    for j in 1..=r {
        let f = h.powi(2 * j as i32);
        let mut next = vec![0.0; j + 1];
        for (l, x) in w.iter().enumerate() {
            next[l + 1] += f * x / (f - 1.0);
            next[l] -= x / (f - 1.0);
        }
        w = next;
    }
    w
}

/// States `[S(dtau/2)]^j psi` and `[S(-dtau/2)]^j psi` for `j = 0..=depth`.
#[derive(Clone, Debug)]
pub struct EvolutionLadder {
    pub dtau: f64,
    forward: Vec<State>,
    backward: Vec<State>,
}

impl EvolutionLadder {
    pub fn build(scheme: &TrotterScheme, h: &PartitionedHamiltonian, dtau: f64, depth: usize, psi: &State) -> Result<Self> {
        let mut forward = vec![psi.clone()];
        let mut backward = vec![psi.clone()];
        for j in 1..=depth {
            let mut f = forward[j - 1].clone();
            apply_trotter_mut(scheme, h, dtau / 2.0, &mut f)?;
            forward.push(f);
            let mut b = backward[j - 1].clone();
            apply_trotter_mut(scheme, h, -dtau / 2.0, &mut b)?;
            backward.push(b);
        }
        Ok(EvolutionLadder { dtau, forward, backward })
    }

    pub fn depth(&self) -> usize {
        self.forward.len() - 1
    }

    /// `[S(dtau/2)]^j psi` for `-depth <= j <= depth`.
    pub fn get(&self, j: i64) -> &State {
        if j >= 0 {
            &self.forward[j as usize]
        } else {
            &self.backward[(-j) as usize]
        }
    }

    /// `H^n_ST psi` as the binomial combination of ladder states, with the
    /// round-off amplification of the sum.
    pub fn power(&self, n: usize) -> Result<(State, f64)> {
        if n > self.depth() {
            return Err(Error::invalid(format!("ladder depth {} too short for power {}", self.depth(), n)));
        }
        let mut terms = Vec::with_capacity(n + 1);
        for k in 0..=n {
            terms.push((cnk(n, k, self.dtau)?, self.get(n as i64 - 2 * k as i64)));
        }
        let out = linear_combine(&terms)?;
        let scale: f64 = terms.iter().map(|(c, s)| c.norm() * s.norm()).sum();
        let amp = amplification(scale, &out);
        Ok((out, amp))
    }
}

fn amplification(scale: f64, result: &State) -> f64 {
    let norm = result.norm();
    if scale == 0.0 {
        1.0
    } else if norm == 0.0 {
        f64::INFINITY
    } else {
        scale / norm
    }
}

/// `H^1_ST psi = (i/dtau)(S(dtau/2) - S(-dtau/2)) psi` and its amplification.
fn first_difference(scheme: &TrotterScheme, h: &PartitionedHamiltonian, dtau: f64, psi: &State) -> Result<(State, f64)> {
    let mut a = psi.clone();
    apply_trotter_mut(scheme, h, dtau / 2.0, &mut a)?;
    let mut b = psi.clone();
    apply_trotter_mut(scheme, h, -dtau / 2.0, &mut b)?;
    let scale = a.norm() + b.norm();
    a.axpy(C64::new(-1.0, 0.0), &b)?;
    a.scale(C64::new(0.0, 1.0 / dtau));
    let amp = amplification(scale / dtau.abs(), &a);
    Ok((a, amp))
}

/// `H^l_ST(r) psi` for every `l = 0..=max_power` under `config` (its `n` is
/// ignored). The product form reuses one chain (or ladder) per Richardson
/// level across all powers.
pub fn power_states(config: &PowerConfig, h: &PartitionedHamiltonian, psi: &State, max_power: usize) -> Result<Vec<PowerOutput>> {
    config.with_power(max_power).validate()?;
    if config.formalism == Formalism::AlternativeForm {
        return (0..=max_power).map(|l| apply_power_alternative(&config.with_power(l), h, psi)).collect();
    }
    let steps = config.level_steps();
    let weights = richardson_weights(config.r, config.h);
    // per level: powers 0..=max_power with amplification
    let mut levels: Vec<Vec<(State, f64)>> = Vec::with_capacity(steps.len());
    for &dt in &steps {
        let mut chain = Vec::with_capacity(max_power + 1);
        match config.route {
            Route::Iterated => {
                chain.push((psi.clone(), 1.0));
                let mut total = 0.0;
                for l in 1..=max_power {
                    let (next, amp) = first_difference(&config.scheme, h, dt, &chain[l - 1].0)?;
                    total += amp;
                    chain.push((next, total));
                }
            }
            Route::Ladder => {
                let ladder = EvolutionLadder::build(&config.scheme, h, dt, max_power, psi)?;
                chain.push((psi.clone(), 1.0));
                for l in 1..=max_power {
                    chain.push(ladder.power(l)?);
                }
            }
        }
        levels.push(chain);
    }
    (0..=max_power).map(|l| combine_levels(&weights, levels.iter().map(|c| &c[l]))).collect()
}

fn combine_levels<'a>(weights: &[f64], parts: impl Iterator<Item = &'a (State, f64)>) -> Result<PowerOutput> {
    let parts: Vec<&(State, f64)> = parts.collect();
    if parts.len() == 1 {
        return Ok(PowerOutput::new(parts[0].0.clone(), parts[0].1));
    }
    let terms: Vec<(C64, &State)> = weights.iter().zip(&parts).map(|(w, p)| (C64::new(*w, 0.0), &p.0)).collect();
    let out = linear_combine(&terms)?;
    let scale: f64 = weights.iter().zip(&parts).map(|(w, p)| w.abs() * p.0.norm() * p.1).sum();
    let amp = amplification(scale, &out);
    Ok(PowerOutput::new(out, amp))
}

/// `H^n_ST(r)(dtau) psi` per `config`.
pub fn apply_power(config: &PowerConfig, h: &PartitionedHamiltonian, psi: &State) -> Result<PowerOutput> {
    config.validate()?;
    if config.formalism == Formalism::AlternativeForm {
        return apply_power_alternative(config, h, psi);
    }
    if config.n == 0 {
        return Ok(PowerOutput::new(psi.clone(), 1.0));
    }
    let steps = config.level_steps();
    let weights = richardson_weights(config.r, config.h);
    let mut levels = Vec::with_capacity(steps.len());
    for &dt in &steps {
        let level = match config.route {
            Route::Iterated => {
                let mut cur = psi.clone();
                let mut total = 0.0;
                for _ in 0..config.n {
                    let (next, amp) = first_difference(&config.scheme, h, dt, &cur)?;
                    total += amp;
                    cur = next;
                }
                (cur, total)
            }
            Route::Ladder => EvolutionLadder::build(&config.scheme, h, dt, config.n, psi)?.power(config.n)?,
        };
        levels.push(level);
    }
    combine_levels(&weights, levels.iter())
}

/// `sum_k c_{n,k} S((n/2 - k) dtau) psi`, Richardson-combined over levels.
pub fn apply_power_alternative(config: &PowerConfig, h: &PartitionedHamiltonian, psi: &State) -> Result<PowerOutput> {
    let mut config = config.clone();
    config.formalism = Formalism::AlternativeForm;
    config.validate()?;
    apply_power_alternative_unchecked(&config, h, psi)
}

/// [`apply_power_alternative`] without the `2m >= n` requirement. Below that
/// order the result converges to `H^n` plus a commutator residual instead of
/// `H^n`; this entry point exists to measure that residual.
pub fn apply_power_alternative_unchecked(config: &PowerConfig, h: &PartitionedHamiltonian, psi: &State) -> Result<PowerOutput> {
    let mut config = config.clone();
    config.formalism = Formalism::ProductForm;
    config.validate()?;
    let n = config.n;
    if n == 0 {
        return Ok(PowerOutput::new(psi.clone(), 1.0));
    }
    let weights = richardson_weights(config.r, config.h);
    let mut levels = Vec::new();
    for dt in config.level_steps() {
        let mut evolved = Vec::with_capacity(n + 1);
        let mut coeffs = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let t = (n as f64 / 2.0 - k as f64) * dt;
            let mut s = psi.clone();
            if t != 0.0 {
                apply_trotter_mut(&config.scheme, h, t, &mut s)?;
            }
            evolved.push(s);
            coeffs.push(cnk(n, k, dt)?);
        }
        let terms: Vec<(C64, &State)> = coeffs.iter().copied().zip(evolved.iter()).collect();
        let out = linear_combine(&terms)?;
        let scale: f64 = terms.iter().map(|(c, s)| c.norm() * s.norm()).sum();
        let amp = amplification(scale, &out);
        levels.push((out, amp));
    }
    combine_levels(&weights, levels.iter())
}

/// Relative residuals of the two symmetry properties of `H^n_ST`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryResidual {
    /// `|<phi|B psi> - conj(<psi|B phi>)|`
    pub hermiticity: f64,
    /// `|<phi|B(dtau) psi> - <phi|B(-dtau) psi>|`
    pub evenness: f64,
}

/// Both residuals are divided by the Cauchy-Schwarz bound
/// `max(1, |phi| |B psi|, |psi| |B phi|)`.
pub fn hermiticity_check(config: &PowerConfig, h: &PartitionedHamiltonian, psi: &State, phi: &State) -> Result<SymmetryResidual> {
    let b_psi = apply_power(config, h, psi)?.state;
    let b_phi = apply_power(config, h, phi)?.state;
    let b_neg = apply_power(&config.with_dtau(-config.dtau), h, psi)?.state;
    let forward = phi.inner(&b_psi)?;
    let scale = (phi.norm() * b_psi.norm()).max(psi.norm() * b_phi.norm()).max(1.0);
    let hermiticity = (forward - psi.inner(&b_phi)?.conj()).norm() / scale;
    let evenness = (forward - phi.inner(&b_neg)?).norm() / scale;
    Ok(SymmetryResidual { hermiticity, evenness })
}

/// Probability of the all-ones ancilla outcome of the LCU circuit for
/// total power `2n`: `(-1)^n / 4^n <psi|[S(dtau/2) - S(-dtau/2)]^{2n}|psi>`,
/// evaluated as `|| [S(dtau/2) - S(-dtau/2)]^n psi ||^2 / 4^n` from the ladder.
pub fn lcu_success_probability(
    h: &PartitionedHamiltonian,
    scheme: &TrotterScheme,
    dtau: f64,
    n: usize,
    psi: &State,
) -> Result<f64> {
    if n == 0 {
        return Ok(psi.norm_sqr());
    }
    if dtau == 0.0 {
        return Ok(0.0);
    }
    let ladder = EvolutionLadder::build(scheme, h, dtau, n, psi)?;
    let terms: Vec<(C64, &State)> = (0..=n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            (C64::new(sign * binomial(n, k), 0.0), ladder.get(n as i64 - 2 * k as i64))
        })
        .collect();
    let d = linear_combine(&terms)?;
    Ok(d.norm_sqr() / 4f64.powi(n as i32))
}

/// Same exponent law as the product form: `S(dtau/2)^{steps}` applied with
/// contracted boundaries.
pub fn evolve_half_steps(
    scheme: &TrotterScheme,
    h: &PartitionedHamiltonian,
    dtau: f64,
    steps: usize,
    psi: &State,
) -> Result<State> {
    let mut out = psi.clone();
    apply_trotter_power_mut(scheme, h, dtau / 2.0, steps, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_hamiltonian;
    use crate::statevector::random_state;
    use crate::trotter::suzuki_coefficients;
    use approx::assert_abs_diff_eq;

    fn ring(n: usize) -> PartitionedHamiltonian {
        PartitionedHamiltonian::heisenberg_ring(n, 1.0).unwrap()
    }

    fn exact_power(h: &PartitionedHamiltonian, n: usize, psi: &State) -> State {
        let mut s = psi.clone();
        for _ in 0..n {
            s = h.apply(&s).unwrap();
        }
        s
    }

    #[test]
    fn coefficient_values() {
        let dt = 0.1;
        assert_abs_diff_eq!((cnk(1, 0, dt).unwrap() - C64::new(0.0, 10.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((cnk(1, 1, dt).unwrap() - C64::new(0.0, -10.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((cnk(2, 1, dt).unwrap() - C64::new(200.0, 0.0)).norm(), 0.0, epsilon = 1e-10);
        for n in 1..12 {
            let s: C64 = (0..=n).map(|k| cnk(n, k, 0.3).unwrap()).sum();
            let scale = cnk(n, n / 2, 0.3).unwrap().norm();
            assert!(s.norm() < 1e-12 * scale);
            for k in 0..=n {
                let plus = cnk(n, k, 0.3).unwrap();
                let minus = cnk(n, k, -0.3).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((plus - minus * sign).norm() < 1e-12 * scale);
                assert!((plus - minus.conj()).norm() < 1e-12 * scale);
            }
        }
        assert!(cnk(2, 3, 0.1).is_err());
    }

    #[test]
    fn richardson_weights_sum_to_one() {
        assert_eq!(richardson_weights(0, 2.0), vec![1.0]);
        let w = richardson_weights(1, 2.0);
        assert_abs_diff_eq!(w[0], -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 4.0 / 3.0, epsilon = 1e-15);
        for r in 0..5 {
            let s: f64 = richardson_weights(r, 2.0).iter().sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn power_zero_is_identity() {
        let h = ring(4);
        let psi = random_state(4, 1).unwrap();
        let cfg = PowerConfig::new(0, 0.1, suzuki_coefficients(1, 3, 2).unwrap());
        assert_eq!(apply_power(&cfg, &h, &psi).unwrap().state, psi);
        let alt = cfg.clone().with_formalism(Formalism::AlternativeForm);
        assert_eq!(apply_power(&alt, &h, &psi).unwrap().state, psi);
    }

    #[test]
    fn first_power_converges_quadratically() {
        let h = ring(4);
        let psi = random_state(4, 2).unwrap();
        let exact = h.apply(&psi).unwrap();
        let scheme = suzuki_coefficients(1, 3, 2).unwrap();
        let dts = [0.1, 0.05, 0.02, 0.01];
        let errs: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                apply_power(&PowerConfig::new(1, dt, scheme.clone()), &h, &psi).unwrap().state.distance(&exact) / exact.norm()
            })
            .collect();
        let xs: Vec<f64> = dts.iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|x| x.ln()).collect();
        let slope = crate::metrics::linear_fit(&xs, &ys).unwrap().slope;
        assert!((slope - 2.0).abs() < 0.1, "slope {}", slope);
    }

    #[test]
    fn richardson_expectation_converges_at_fourth_order() {
        let h = ring(6);
        let psi = random_state(6, 21).unwrap();
        let n = 2;
        let exact = psi.inner(&exact_power(&h, n, &psi)).unwrap().re;
        let scheme = suzuki_coefficients(1, 3, 2).unwrap();
        let dts = [0.2, 0.1, 0.05];
        let errs: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let cfg = PowerConfig::new(n, dt, scheme.clone()).with_richardson(1);
                let v = psi.inner(&apply_power(&cfg, &h, &psi).unwrap().state).unwrap().re;
                ((v - exact) / exact).abs().ln()
            })
            .collect();
        let slope = crate::metrics::linear_fit(&dts.map(f64::ln), &errs).unwrap().slope;
        assert!((slope - 4.0).abs() < 0.2, "slope {}", slope);
    }

    #[test]
    fn richardson_power_does_not_factorize() {
        let h = ring(6);
        let psi = random_state(6, 22).unwrap();
        let scheme = suzuki_coefficients(1, 3, 2).unwrap();
        let gap = |dt: f64| {
            let cfg = PowerConfig::new(2, dt, scheme.clone()).with_richardson(1);
            let direct = apply_power(&cfg, &h, &psi).unwrap().state;
            let once = apply_power(&cfg.with_power(1), &h, &psi).unwrap().state;
            let twice = apply_power(&cfg.with_power(1), &h, &once).unwrap().state;
            direct.distance(&twice) / direct.norm()
        };
        let (a, b) = (gap(0.2), gap(0.1));
        assert!(a > 1e-8);
        assert!(((a / b).log2() - 4.0).abs() < 0.3, "ratio {}", a / b);
    }

    #[test]
    fn routes_agree_and_obey_exponent_law() {
        let h = ring(6);
        let psi = random_state(6, 3).unwrap();
        let scheme = suzuki_coefficients(2, 3, 2).unwrap();
        let cfg = PowerConfig::new(3, 0.2, scheme.clone());
        let it = apply_power(&cfg, &h, &psi).unwrap().state;
        let lad = apply_power(&cfg.clone().with_route(Route::Ladder), &h, &psi).unwrap().state;
        assert!(lad.distance(&it) < 1e-10 * it.norm());
        let mut thrice = psi.clone();
        for _ in 0..3 {
            thrice = apply_power(&cfg.clone().with_route(Route::Ladder).with_power(1), &h, &thrice).unwrap().state;
        }
        assert!(thrice.distance(&lad) < 1e-10 * lad.norm());
    }

    #[test]
    fn power_states_match_single_calls() {
        let h = ring(6);
        let psi = random_state(6, 8).unwrap();
        let cfg = PowerConfig::new(0, 0.1, suzuki_coefficients(1, 3, 2).unwrap()).with_richardson(1);
        let all = power_states(&cfg, &h, &psi, 4).unwrap();
        for (l, out) in all.iter().enumerate() {
            let single = apply_power(&cfg.with_power(l), &h, &psi).unwrap().state;
            assert!(out.state.distance(&single) < 1e-12 * single.norm().max(1.0));
        }
        let lad = power_states(&cfg.clone().with_route(Route::Ladder), &h, &psi, 4).unwrap();
        for (a, b) in all.iter().zip(&lad) {
            assert!(a.state.distance(&b.state) < 1e-9 * a.state.norm());
        }
    }

    #[test]
    fn ladder_route_flags_large_powers() {
        let h = ring(6);
        let psi = random_state(6, 4).unwrap();
        let cfg = PowerConfig::new(40, 0.05, suzuki_coefficients(1, 3, 2).unwrap());
        let lad = apply_power(&cfg.clone().with_route(Route::Ladder), &h, &psi).unwrap();
        assert!(lad.cancellation_warning);
        let it = apply_power(&cfg, &h, &psi).unwrap();
        assert!(!it.cancellation_warning, "digits lost {}", it.digits_lost);
    }

    #[test]
    fn alternative_matches_product_for_first_power() {
        let h = ring(6);
        let psi = random_state(6, 5).unwrap();
        let cfg = PowerConfig::new(1, 0.13, suzuki_coefficients(1, 3, 2).unwrap()).with_route(Route::Ladder);
        let prod = apply_power(&cfg, &h, &psi).unwrap().state;
        let alt = apply_power_alternative(&cfg, &h, &psi).unwrap().state;
        assert!(alt.distance(&prod) < 1e-13 * prod.norm());
        let bad = PowerConfig::new(3, 0.1, suzuki_coefficients(1, 3, 2).unwrap()).with_formalism(Formalism::AlternativeForm);
        assert!(matches!(apply_power(&bad, &h, &psi), Err(Error::AlternativeOrder { .. })));
    }

    #[test]
    fn symmetric_construction_is_hermitian_and_even() {
        let h = ring(8);
        let psi = random_state(8, 6).unwrap();
        let phi = random_state(8, 7).unwrap();
        for (m, form) in [(1, Formalism::ProductForm), (3, Formalism::AlternativeForm)] {
            for r in [0, 1] {
                for n in 1..=6 {
                    let cfg =
                        PowerConfig::new(n, 0.1, suzuki_coefficients(m, 3, 2).unwrap()).with_richardson(r).with_formalism(form);
                    let res = hermiticity_check(&cfg, &h, &psi, &phi).unwrap();
                    assert!(res.hermiticity < 1e-10 && res.evenness < 1e-10, "{:?} n={} r={} {:?}", form, n, r, res);
                }
            }
        }
    }

    #[test]
    fn even_powers_are_nonnegative() {
        let h = ring(6);
        let psi = random_state(6, 12).unwrap();
        for n in [2, 4, 6] {
            let cfg = PowerConfig::new(n, 0.3, suzuki_coefficients(1, 3, 2).unwrap());
            let v = psi.inner(&apply_power(&cfg, &h, &psi).unwrap().state).unwrap();
            assert!(v.re > 0.0 && v.im.abs() < 1e-10 * v.re);
        }
    }

    #[test]
    fn lcu_probability_matches_brute_force() {
        let h = ring(6);
        let scheme = suzuki_coefficients(1, 3, 2).unwrap();
        let psi = random_state(6, 9).unwrap();
        let (dt, n) = (0.4, 2);
        let p = lcu_success_probability(&h, &scheme, dt, n, &psi).unwrap();
        // apply the difference operator 2n times and project back
        let mut d = psi.clone();
        for _ in 0..2 * n {
            let mut a = d.clone();
            apply_trotter_mut(&scheme, &h, dt / 2.0, &mut a).unwrap();
            let mut b = d.clone();
            apply_trotter_mut(&scheme, &h, -dt / 2.0, &mut b).unwrap();
            a.axpy(C64::new(-1.0, 0.0), &b).unwrap();
            d = a;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let brute = psi.inner(&d).unwrap() * sign / 4f64.powi(n as i32);
        assert!(brute.im.abs() < 1e-12);
        assert_abs_diff_eq!(p, brute.re, epsilon = 1e-12);
        assert!((0.0..=1.0).contains(&p));
        assert_eq!(lcu_success_probability(&h, &scheme, 0.0, 2, &psi).unwrap(), 0.0);
    }

    #[test]
    fn lcu_probability_on_eigenstate() {
        // single-bond ring: H = P_12, S(t) = e^{-i t H} exactly
        let h = ring(2);
        let scheme = suzuki_coefficients(1, 3, 2).unwrap();
        let trip = State::basis(2, 0).unwrap(); // P = +1
        let dt = 0.7;
        let n = 3;
        let lambda: f64 = -dt / 2.0; // S(dt/2) eigenphase
        let p = lcu_success_probability(&h, &scheme, dt, n, &trip).unwrap();
        assert_abs_diff_eq!(p, lambda.sin().powi(2 * n as i32), epsilon = 1e-13);
    }

    #[test]
    fn alternative_third_power_has_commutator_bias() {
        // m = 1: limit is <H^3> + 6 <R3>; checked densely on 4 qubits
        let h = ring(4);
        let psi = random_state(4, 13).unwrap();
        let a = dense_hamiltonian(&h, Some(0));
        let b = dense_hamiltonian(&h, Some(1));
        let full = &a + &b;
        let comm = |x: &crate::linalg::CMat, y: &crate::linalg::CMat| x * y - y * x;
        let r3 = comm(&a, &comm(&a, &b)) * C64::new(-1.0 / 24.0, 0.0) + comm(&b, &comm(&b, &a)) * C64::new(1.0 / 12.0, 0.0);
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let h3 = (v.adjoint() * &full * &full * &full * &v)[(0, 0)].re;
        let bias = (v.adjoint() * &r3 * &v)[(0, 0)];
        let target = h3 + 6.0 * bias.re;
        let cfg = PowerConfig::new(3, 0.0025, suzuki_coefficients(1, 3, 2).unwrap())
            .with_formalism(Formalism::AlternativeForm)
            .with_richardson(1);
        let got = psi.inner(&apply_power_alternative_unchecked(&cfg, &h, &psi).unwrap().state).unwrap().re;
        assert!((got - target).abs() < 1e-5 * target.abs().max(1.0), "got {} target {} h3 {}", got, target, h3);
    }
}
