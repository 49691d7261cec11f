//! Least-squares fits, jackknife errors and the stochastic operator
//! distance between exact and approximated Hamiltonian powers.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hamiltonian::PartitionedHamiltonian;
use crate::linalg::RMat;
use crate::qpower::{power_states, PowerConfig};
use crate::statevector::{random_phase_state_stream, State};
use crate::{Error, Result, C64};

/// Ordinary least-squares fit of `y = c_0 + sum_k c_k x^{orders[k]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFit {
    /// `[constant, one per order]`.
    pub coefficients: Vec<f64>,
    /// Standard errors from the residual variance; NaN when there are no
    /// degrees of freedom left.
    pub stderrs: Vec<f64>,
    pub residuals: Vec<f64>,
    pub orders: Vec<u32>,
}

impl PolyFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn intercept_stderr(&self) -> f64 {
        self.stderrs[0]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients[0] + self.orders.iter().zip(&self.coefficients[1..]).map(|(&o, c)| c * x.powi(o as i32)).sum::<f64>()
    }
}

fn least_squares(design: RMat, y: &[f64], weights: Option<&[f64]>) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (m, p) = design.shape();
    if m < p {
        return Err(Error::invalid(format!("{} points cannot determine {} coefficients", m, p)));
    }
    let w: Vec<f64> = match weights {
        Some(w) => w.to_vec(),
        None => alloc::vec![1.0; m],
    };
    let a = RMat::from_fn(m, p, |i, j| design[(i, j)] * w[i]);
    let b = nalgebra::DVector::from_iterator(m, y.iter().zip(&w).map(|(v, w)| v * w));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::invalid("rank-deficient design matrix"));
    }
    let coef = svd.solve(&b, 0.0).map_err(Error::invalid)?;
    let fitted = &design * &coef;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect();
    let dof = m - p;
    let sigma2 =
        if dof > 0 { residuals.iter().zip(&w).map(|(r, w)| (r * w).powi(2)).sum::<f64>() / dof as f64 } else { f64::NAN };
    // (A^T A)^{-1} = V diag(1/s^2) V^T
    let v_t = svd.v_t.as_ref().expect("svd computed with V");
    let stderrs = (0..p)
        .map(|j| {
            let var: f64 = (0..p).map(|k| (v_t[(k, j)] / svd.singular_values[k]).powi(2)).sum();
            (sigma2 * var).sqrt()
        })
        .collect();
    Ok((coef.iter().copied().collect(), stderrs, residuals))
}

fn even_design(x: &[f64], orders: &[u32]) -> Result<RMat> {
    if let Some(o) = orders.iter().find(|&&o| o == 0 || o % 2 == 1) {
        return Err(Error::invalid(format!("fit orders must be positive and even, got {}", o)));
    }
    Ok(RMat::from_fn(x.len(), orders.len() + 1, |i, j| if j == 0 { 1.0 } else { x[i].powi(orders[j - 1] as i32) }))
}

/// Fit in the given even powers of `x` plus a constant.
pub fn polyfit_even_powers(x: &[f64], y: &[f64], orders: &[u32]) -> Result<PolyFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let (coefficients, stderrs, residuals) = least_squares(even_design(x, orders)?, y, None)?;
    Ok(PolyFit { coefficients, stderrs, residuals, orders: orders.to_vec() })
}

/// Straight-line fit with standard errors and coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let design = RMat::from_fn(x.len(), 2, |i, j| if j == 0 { 1.0 } else { x[i] });
    let (c, s, res) = least_squares(design, y, None)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = res.iter().map(|r| r * r).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LinearFit { slope: c[1], intercept: c[0], slope_stderr: s[1], intercept_stderr: s[0], r2 })
}

/// Delete-one jackknife standard error from the leave-one-out estimates.
pub fn jackknife_stderr(leave_one_out: &[f64]) -> f64 {
    let r = leave_one_out.len();
    if r < 2 || leave_one_out.iter().all(|v| *v == leave_one_out[0]) {
        return 0.0;
    }
    let mean = leave_one_out.iter().sum::<f64>() / r as f64;
    let ss: f64 = leave_one_out.iter().map(|v| (v - mean).powi(2)).sum();
    ((r - 1) as f64 / r as f64 * ss).sqrt()
}

/// Overlaps of one random-phase sample, with `e = b - a` kept separately so
/// that small distances are not lost to cancellation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOverlaps {
    /// `<A phi|A phi>`
    pub aa: f64,
    /// `<B phi|B phi>`
    pub bb: f64,
    /// `<A phi|B phi>`
    pub ab: C64,
    /// `<(B-A) phi|(B-A) phi>`
    pub ee: f64,
    /// `<A phi|(B-A) phi>`
    pub ae: C64,
}

impl SampleOverlaps {
    pub fn from_states(a: &State, b: &State) -> Result<Self> {
        let mut e = b.clone();
        e.axpy(C64::new(-1.0, 0.0), a)?;
        Ok(SampleOverlaps { aa: a.norm_sqr(), bb: b.norm_sqr(), ab: a.inner(b)?, ee: e.norm_sqr(), ae: a.inner(&e)? })
    }

    fn zero() -> Self {
        SampleOverlaps { aa: 0.0, bb: 0.0, ab: C64::new(0.0, 0.0), ee: 0.0, ae: C64::new(0.0, 0.0) }
    }

    fn add(&mut self, o: &SampleOverlaps) {
        self.aa += o.aa;
        self.bb += o.bb;
        self.ab += o.ab;
        self.ee += o.ee;
        self.ae += o.ae;
    }

    /// Distance from (summed or averaged) overlaps.
    /// `d^2 = (A E - |F|^2) / (sqrt(AB) (sqrt(AB) + |C|))`, which equals
    /// `1 - |C| / sqrt(AB)`.
    pub fn distance(&self) -> f64 {
        let ab = (self.aa * self.bb).sqrt();
        if ab == 0.0 {
            return f64::NAN;
        }
        let num = (self.aa * self.ee - self.ae.norm_sqr()).max(0.0);
        (num / (ab * (ab + self.ab.norm()))).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct DistanceEstimate {
    pub d: f64,
    pub stderr: f64,
    pub samples: usize,
    pub per_sample: Vec<SampleOverlaps>,
}

impl DistanceEstimate {
    pub fn from_samples(per_sample: Vec<SampleOverlaps>) -> Result<Self> {
        let r = per_sample.len();
        if r == 0 {
            return Err(Error::invalid("distance needs at least one sample"));
        }
        let mut total = SampleOverlaps::zero();
        for s in &per_sample {
            total.add(s);
        }
        let d = total.distance();
        if !d.is_finite() {
            return Err(Error::breakdown("operator with zero Frobenius norm in distance"));
        }
        // explicit sums rather than `total - s`, so identical samples give
        // bit-identical leave-one-out values
        let loo: Vec<f64> = (0..r)
            .map(|i| {
                let mut t = SampleOverlaps::zero();
                for (j, s) in per_sample.iter().enumerate() {
                    if j != i {
                        t.add(s);
                    }
                }
                t.distance()
            })
            .collect();
        Ok(DistanceEstimate { d, stderr: jackknife_stderr(&loo), samples: r, per_sample })
    }
}

/// `d(A, B)` by the random-phase trace with `samples` states; sample `k`
/// uses stream `k` of `seed`.
pub fn operator_distance(
    n_qubits: usize,
    samples: usize,
    seed: u64,
    mut a: impl FnMut(&State) -> Result<State>,
    mut b: impl FnMut(&State) -> Result<State>,
) -> Result<DistanceEstimate> {
    let mut per = Vec::with_capacity(samples);
    for z in 0..samples {
        let phi = random_phase_state_stream(n_qubits, seed, z as u64)?;
        per.push(SampleOverlaps::from_states(&a(&phi)?, &b(&phi)?)?);
    }
    DistanceEstimate::from_samples(per)
}

/// Default sample count: 256 up to ten qubits, 16 beyond.
pub fn default_samples(n_qubits: usize) -> usize {
    if n_qubits <= 10 {
        256
    } else {
        16
    }
}

fn exact_powers(h: &PartitionedHamiltonian, psi: &State, max_power: usize) -> Result<Vec<State>> {
    let mut out = Vec::with_capacity(max_power + 1);
    out.push(psi.clone());
    for l in 1..=max_power {
        let next = h.apply(&out[l - 1])?;
        out.push(next);
    }
    Ok(out)
}

/// `d(H^n, H^n_ST(r)(dtau))` with `n = config.n`.
pub fn power_distance(h: &PartitionedHamiltonian, config: &PowerConfig, samples: usize, seed: u64) -> Result<DistanceEstimate> {
    let rows = distance_order_scan(h, config, &[config.n], &[config.dtau], samples, seed)?;
    Ok(rows.into_iter().next().expect("one row").estimate)
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub n: usize,
    pub dtau: f64,
    pub estimate: DistanceEstimate,
    /// Set if any sample raised the cancellation flag.
    pub cancellation_warning: bool,
}

/// Distances for every `(n, dtau)` pair, using the Trotter scheme, Richardson
/// order and route of `template`. Samples are shared across the table, so
/// entries are correlated.
pub fn distance_order_scan(
    h: &PartitionedHamiltonian,
    template: &PowerConfig,
    n_list: &[usize],
    dtau_list: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<ScanRow>> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    if n_max > 100 {
        return Err(Error::invalid(format!("power {} exceeds the supported maximum of 100", n_max)));
    }
    if h.n_qubits() > 24 {
        return Err(Error::invalid("distance scans are limited to 24 qubits"));
    }
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let cells = n_list.len() * dtau_list.len();
    let mut per: Vec<Vec<SampleOverlaps>> = (0..cells).map(|_| Vec::with_capacity(samples)).collect();
    let mut warn = alloc::vec![false; cells];
    for z in 0..samples {
        let phi = random_phase_state_stream(h.n_qubits(), seed, z as u64)?;
        let exact = exact_powers(h, &phi, n_max)?;
        for (j, &dt) in dtau_list.iter().enumerate() {
            let approx = power_states(&template.with_dtau(dt), h, &phi, n_max)?;
            for (i, &n) in n_list.iter().enumerate() {
                let cell = i * dtau_list.len() + j;
                per[cell].push(SampleOverlaps::from_states(&exact[n], &approx[n].state)?);
                warn[cell] |= approx[n].cancellation_warning;
            }
        }
    }
    let mut rows = Vec::with_capacity(cells);
    for (cell, p) in per.into_iter().enumerate() {
        rows.push(ScanRow {
            n: n_list[cell / dtau_list.len()],
            dtau: dtau_list[cell % dtau_list.len()],
            estimate: DistanceEstimate::from_samples(p)?,
            cancellation_warning: warn[cell],
        });
    }
    Ok(rows)
}

/// Mean and standard error of `<phi|X|phi>` over random-phase states, an
/// unbiased estimate of `Tr X`.
pub fn stochastic_trace(
    n_qubits: usize,
    samples: usize,
    seed: u64,
    mut op: impl FnMut(&State) -> Result<State>,
) -> Result<(C64, f64)> {
    let mut vals = Vec::with_capacity(samples);
    for z in 0..samples {
        let phi = random_phase_state_stream(n_qubits, seed, z as u64)?;
        vals.push(phi.inner(&op(&phi)?)?);
    }
    let r = vals.len() as f64;
    let mean = vals.iter().sum::<C64>() / r;
    let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (r - 1.0).max(1.0);
    Ok((mean, (var / r).sqrt()))
}
