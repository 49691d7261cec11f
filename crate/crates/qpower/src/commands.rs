use qpower_core::hamiltonian::GroundState;
use qpower_core::krylov::{comparison_subspaces, dtau_sweep_and_fit, KrylovRun};
use qpower_core::metrics::{default_samples, distance_order_scan};
use qpower_core::moments::{
    cmx_energy, cumulants_from_moments, exact_ite_energy, exact_moments, finite_difference_moments, lanczos_from_moments,
    lanczos_from_moments_shifted, MomentSet, MomentSource, PropagatorLevels,
};
use qpower_core::qpower::{apply_power_alternative, apply_power_alternative_unchecked};
use qpower_core::refstates::ReferenceSet;
use qpower_core::statevector::translate;
use qpower_core::trotter::{propagator_deviation, suzuki_coefficients};
use qpower_core::{Formalism, PartitionedHamiltonian, State};

use crate::cli::{Cli, Command, FormalismArg, PowerArgs};
use crate::error::{usage, CliResult};
use crate::model::ModelArgs;
use crate::output::{Cell, Table};
use crate::qpsv::{read_state, save_state};

const GROUND_TOL: f64 = 1e-10;

pub fn run(cli: &Cli) -> CliResult<Table> {
    match &cli.command {
        Command::Coeffs { trotter, ngamma } => coeffs(trotter.m, trotter.p, *ngamma),
        Command::Distance { model, power, powers, dtau_list, samples } => {
            distance(model, power, powers, dtau_list, *samples, cli.config.seed)
        }
        Command::Krylov { model, power, refs, mb, nmax, dtau, scheme, scut, dtau_list, fit_order, no_exact } => {
            let h = model.build()?;
            let (refs, warnings) = krylov_refs(model, &h, refs, *mb)?;
            let run = KrylovRun::new(refs, *nmax, power.config(&h, 1, *dtau)?).with_scheme((*scheme).into()).with_s_cut(*scut);
            let mut t = if dtau_list.is_empty() {
                krylov(&h, &run, !*no_exact)?
            } else {
                krylov_sweep(&h, &run, dtau_list, *fit_order, !*no_exact)?
            };
            t.warnings.extend(warnings);
            Ok(t)
        }
        Command::Compare { model, reference, kind, dtau_list, nmax, r } => {
            compare(model, reference, (*kind).into(), dtau_list, *nmax, *r)
        }
        Command::Moments { model, power, reference, nmax, dtau_list, exact, lanczos_shift } => {
            moments(model, power, reference, *nmax, dtau_list, *exact, *lanczos_shift)
        }
        Command::Cmx { model, power, reference, orders, tau_max, tau_step, dtau } => {
            cmx(model, power, reference, orders, *tau_max, *tau_step, *dtau)
        }
        Command::Propagator { model, trotter, dtau, steps } => {
            let h = model.build()?;
            propagator(&h, &trotter.scheme(&h)?, trotter.m, *dtau, *steps)
        }
        Command::Translate { input, shift, output } => {
            let s = read_state(std::io::BufReader::new(std::fs::File::open(input)?))?;
            let moved = translate(&s, *shift);
            save_state(output, &moved)?;
            let mut t = Table::new(&["n_qubits", "shift", "norm"]);
            t.meta("input", input.display());
            t.meta("output", output.display());
            t.push(vec![s.n_qubits().into(), Cell::Int(*shift), moved.norm().into()]);
            Ok(t)
        }
        Command::Groundstate { model, tol, save } => {
            let h = model.build()?;
            let g = h.exact_ground_state(*tol)?;
            if let Some(path) = save {
                save_state(path, &g.state)?;
            }
            Ok(groundstate_table(&h, &g))
        }
    }
}

fn energy_unit_label(h: &PartitionedHamiltonian) -> &'static str {
    match h.model() {
        qpower_core::ModelTag::HeisenbergRing => "NJ",
        qpower_core::ModelTag::HubbardLadder4x2 => "NJ/2",
        qpower_core::ModelTag::Custom => "1",
    }
}

pub fn coeffs(m: usize, p: usize, ngamma: usize) -> CliResult<Table> {
    let s = suzuki_coefficients(m, p, ngamma)?;
    let mut t = Table::new(&["i", "s", "T", "part"]);
    let sum: f64 = s.coefficients().iter().sum();
    t.meta("depth", s.depth());
    t.meta_num("sum", sum);
    for (i, ((c, cum), part)) in s.coefficients().iter().zip(s.cumulative()).zip(s.part_index()).enumerate() {
        t.push(vec![(i + 1).into(), (*c).into(), cum.into(), (*part + 1).into()]);
    }
    Ok(t)
}

fn distance(
    model: &ModelArgs,
    power: &PowerArgs,
    powers: &[usize],
    dtau_list: &[f64],
    samples: Option<usize>,
    seed: u64,
) -> CliResult<Table> {
    if powers.is_empty() || dtau_list.is_empty() {
        return Err(usage("need at least one power and one time step"));
    }
    let h = model.build()?;
    let template = power.config(&h, 1, dtau_list[0])?;
    let samples = samples.unwrap_or_else(|| default_samples(h.n_qubits()));
    let mut t = Table::new(&["n", "dtau", "d", "stderr", "cancellation_warning"]);
    t.meta("samples", samples);
    let rows = if template.formalism == Formalism::AlternativeForm {
        alternative_scan(&h, power, powers, dtau_list, samples, seed)?
    } else {
        distance_order_scan(&h, &template, powers, dtau_list, samples, seed)?
    };
    for row in rows {
        if row.cancellation_warning {
            t.warn(format!("n = {}, dtau = {}: more than 10 digits lost to cancellation", row.n, row.dtau));
        }
        t.push(vec![
            row.n.into(),
            row.dtau.into(),
            row.estimate.d.into(),
            row.estimate.stderr.into(),
            row.cancellation_warning.into(),
        ]);
    }
    Ok(t)
}

fn alternative_scan(
    h: &PartitionedHamiltonian,
    power: &PowerArgs,
    powers: &[usize],
    dtau_list: &[f64],
    samples: usize,
    seed: u64,
) -> CliResult<Vec<qpower_core::metrics::ScanRow>> {
    let mut rows = Vec::new();
    for &n in powers {
        for &dt in dtau_list {
            let cfg = power.config(h, n, dt)?;
            let est = qpower_core::metrics::operator_distance(
                h.n_qubits(),
                samples,
                seed,
                |phi| {
                    let mut s = phi.clone();
                    for _ in 0..n {
                        s = h.apply(&s)?;
                    }
                    Ok(s)
                },
                |phi| alternative_power(&cfg, h, phi, power.allow_low_order).map(|o| o.state),
            )?;
            rows.push(qpower_core::metrics::ScanRow { n, dtau: dt, estimate: est, cancellation_warning: false });
        }
    }
    Ok(rows)
}

fn alternative_power(
    cfg: &qpower_core::PowerConfig,
    h: &PartitionedHamiltonian,
    psi: &State,
    allow_low_order: bool,
) -> qpower_core::Result<qpower_core::qpower::PowerOutput> {
    if allow_low_order {
        apply_power_alternative_unchecked(cfg, h, psi)
    } else {
        apply_power_alternative(cfg, h, psi)
    }
}

fn krylov_refs(
    model: &ModelArgs,
    h: &PartitionedHamiltonian,
    refs: &[String],
    mb: Option<usize>,
) -> CliResult<(ReferenceSet, Vec<String>)> {
    if refs.is_empty() {
        let builtin = model.builtin_refs(h)?;
        if builtin.is_empty() {
            return Err(usage("custom models need --refs with QPSV files"));
        }
        return Ok((builtin.first(mb.unwrap_or(1))?, Vec::new()));
    }
    let (set, warnings) = model.resolve_refs(h, refs)?;
    if let Some(mb) = mb {
        if mb != set.block_size() {
            return Err(usage(format!("--mb {} but {} references given", mb, set.block_size())));
        }
    }
    Ok((set, warnings))
}

fn ground(h: &PartitionedHamiltonian) -> CliResult<GroundState> {
    Ok(h.exact_ground_state(GROUND_TOL)?)
}

fn krylov(h: &PartitionedHamiltonian, run: &KrylovRun, with_exact: bool) -> CliResult<Table> {
    let g = if with_exact { Some(ground(h)?) } else { None };
    let res = run.run(h, g.as_ref().map(|g| &g.state))?;
    let unit = h.energy_unit();
    let mut t = Table::new(&["n", "E_KS", "E_KS_minus_E0", "error_per_unit", "fidelity", "cond_S", "kept_dim"]);
    t.meta("refs", &run.refs);
    t.meta("energy_unit", format!("{} = {}", energy_unit_label(h), unit));
    if let Some(g) = &g {
        t.meta_num("E0", g.energy);
    }
    t.meta_num("hermiticity_residual", res.hermiticity_residual);
    if res.cancellation_warning {
        t.warn("basis powers lost more than 10 digits to cancellation");
    }
    if let Some(why) = &res.stopped {
        t.warn(format!("trace stopped early at {}", why));
    }
    for s in &res.steps {
        let err = g.as_ref().map(|g| s.energy - g.energy);
        t.push(vec![
            s.n.into(),
            s.energy.into(),
            err.into(),
            err.map(|e| e / unit).into(),
            s.fidelity.into(),
            s.cond.into(),
            s.kept.into(),
        ]);
    }
    Ok(t)
}

fn krylov_sweep(
    h: &PartitionedHamiltonian,
    run: &KrylovRun,
    dtau_list: &[f64],
    order: usize,
    with_exact: bool,
) -> CliResult<Table> {
    let fit = dtau_sweep_and_fit(run, h, dtau_list, order)?;
    let unit = h.energy_unit();
    let mut t = Table::new(&["dtau", "E_KS", "E_KS_per_unit", "fit_per_unit"]);
    t.meta("refs", &run.refs);
    t.meta("n", run.n_max);
    t.meta("energy_unit", format!("{} = {}", energy_unit_label(h), unit));
    t.meta("fit_orders", format!("{:?}", fit.fit.orders));
    t.meta("fit_coefficients", format!("{:?}", fit.fit.coefficients));
    t.meta("fit_stderrs", format!("{:?}", fit.fit.stderrs));
    t.meta_num("extrapolated", fit.extrapolated);
    t.meta_num("extrapolated_stderr", fit.stderr);
    t.meta_num("extrapolated_per_unit", fit.extrapolated / unit);
    if with_exact {
        let g = ground(h)?;
        t.meta_num("E0", g.energy);
        t.meta_num("E0_per_unit", g.energy / unit);
        t.meta_num("deviation_in_stderrs", (fit.extrapolated - g.energy).abs() / fit.stderr);
    }
    for (dt, e) in fit.dtau.iter().zip(&fit.energies) {
        t.push(vec![(*dt).into(), (*e).into(), (e / unit).into(), (fit.fit.eval(*dt) / unit).into()]);
    }
    Ok(t)
}

fn single_ref(model: &ModelArgs, h: &PartitionedHamiltonian, label: &str) -> CliResult<(State, String, Vec<String>)> {
    let (set, warnings) = model.resolve_refs(h, &[label.to_string()])?;
    let s = set.states[0].clone().normalized()?;
    Ok((s, set.labels[0].clone(), warnings))
}

fn compare(
    model: &ModelArgs,
    reference: &str,
    kind: qpower_core::krylov::SubspaceKind,
    dtau_list: &[f64],
    nmax: usize,
    r: usize,
) -> CliResult<Table> {
    let h = model.build()?;
    let (q, label, warnings) = single_ref(model, &h, reference)?;
    let g = ground(&h)?;
    let unit = h.energy_unit();
    let mut t = Table::new(&["dtau", "n", "E_KS", "error_per_unit", "relative_error", "fidelity", "cond_S"]);
    t.warnings = warnings;
    t.meta("ref", label);
    t.meta("kind", format!("{:?}", kind));
    t.meta_num("E0", g.energy);
    for &dt in dtau_list {
        let res = comparison_subspaces(&h, &q, nmax, dt, kind, r, Some(&g.state))?;
        if res.truncated {
            t.warn(format!("dtau = {}: trace ended at the conditioning limit after n = {}", dt, res.steps.len()));
        }
        for s in &res.steps {
            let err = s.energy - g.energy;
            t.push(vec![
                dt.into(),
                s.n.into(),
                s.energy.into(),
                (err / unit).into(),
                (err / g.energy.abs()).into(),
                s.fidelity.into(),
                s.cond.into(),
            ]);
        }
    }
    Ok(t)
}

/// Moments `<psi|H^n_ST(r) psi>` of the alternative formalism, one power at
/// a time.
fn alternative_moments(
    h: &PartitionedHamiltonian,
    power: &PowerArgs,
    psi: &State,
    dtau: f64,
    nmax: usize,
) -> CliResult<MomentSet> {
    let mut mu = vec![1.0];
    let mut digits = vec![0.0];
    let mut warn = false;
    for n in 1..=nmax {
        let out = alternative_power(&power.config(h, n, dtau)?, h, psi, power.allow_low_order)?;
        mu.push(psi.inner(&out.state)?.re);
        digits.push(out.digits_lost);
        warn |= out.cancellation_warning;
    }
    let kappa = cumulants_from_moments(&mu)?;
    Ok(MomentSet {
        mu,
        kappa,
        source: MomentSource::FiniteDifference { dtau, r: power.r },
        digits_lost: digits,
        cancellation_warning: warn,
        phase_ambiguous: false,
    })
}

fn moment_set(h: &PartitionedHamiltonian, power: &PowerArgs, psi: &State, dtau: f64, nmax: usize) -> CliResult<MomentSet> {
    if power.formalism == FormalismArg::Alternative {
        return alternative_moments(h, power, psi, dtau, nmax);
    }
    let levels = PropagatorLevels::build(h, &power.trotter.scheme(h)?, dtau, power.r, power.ratio, nmax, psi)?;
    Ok(finite_difference_moments(&levels, nmax)?)
}

#[allow(clippy::too_many_arguments)]
fn moments(
    model: &ModelArgs,
    power: &PowerArgs,
    reference: &str,
    nmax: usize,
    dtau_list: &[f64],
    exact: bool,
    shift: Option<f64>,
) -> CliResult<Table> {
    let h = model.build()?;
    let (psi, label, warnings) = single_ref(model, &h, reference)?;
    let oracle = exact_moments(&h, &psi, nmax)?;
    let mut t = Table::new(&["dtau", "n", "mu", "kappa", "mu_exact", "kappa_exact", "alpha", "beta", "digits_lost"]);
    t.warnings = warnings;
    t.meta("ref", label);
    let sets: Vec<(Option<f64>, MomentSet)> = if exact {
        vec![(None, oracle.clone())]
    } else {
        dtau_list.iter().map(|&dt| Ok((Some(dt), moment_set(&h, power, &psi, dt, nmax)?))).collect::<CliResult<_>>()?
    };
    for (dt, set) in &sets {
        let tag = dt.map_or("exact".to_string(), |d| format!("dtau = {}", d));
        if set.cancellation_warning {
            t.warn(format!("{}: more than 10 digits lost to cancellation", tag));
        }
        if set.phase_ambiguous {
            t.warn(format!("{}: propagator phase steps exceed pi/2, cumulants unreliable", tag));
        }
        let lanczos = match shift {
            Some(c) => lanczos_from_moments_shifted(&set.mu, c),
            None => lanczos_from_moments(&set.mu),
        };
        let (alpha, beta) = match lanczos {
            Ok(ab) => ab,
            Err(e) if e.is_numerical() => {
                t.warn(format!("{}: Lanczos recursion broke down ({}); try --lanczos-shift", tag, e));
                (Vec::new(), Vec::new())
            }
            Err(e) => return Err(e.into()),
        };
        for n in 0..=nmax {
            let at = |v: &Vec<f64>| if n >= 1 { v.get(n - 1).copied() } else { None };
            t.push(vec![
                (*dt).into(),
                n.into(),
                set.mu[n].into(),
                set.kappa[n].into(),
                oracle.mu[n].into(),
                oracle.kappa[n].into(),
                at(&alpha).into(),
                at(&beta).into(),
                set.digits_lost[n].into(),
            ]);
        }
    }
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
fn cmx(
    model: &ModelArgs,
    power: &PowerArgs,
    reference: &str,
    orders: &[usize],
    tau_max: f64,
    tau_step: f64,
    dtau: Option<f64>,
) -> CliResult<Table> {
    if !(tau_step > 0.0 && tau_max >= 0.0) {
        return Err(usage("need tau_step > 0 and tau_max >= 0"));
    }
    let top = orders.iter().copied().max().ok_or_else(|| usage("need at least one order"))?;
    let h = model.build()?;
    let (psi, label, warnings) = single_ref(model, &h, reference)?;
    let set = match dtau {
        Some(dt) => moment_set(&h, power, &psi, dt, top)?,
        None => exact_moments(&h, &psi, top)?,
    };
    let count = (tau_max / tau_step + 1e-9).floor() as usize;
    let taus: Vec<f64> = (0..=count).map(|k| k as f64 * tau_step).collect();
    let curve = exact_ite_energy(&h, &psi, &taus)?;
    let series: Vec<Vec<f64>> = orders.iter().map(|&k| cmx_energy(&set.kappa, k, &taus)).collect::<Result<_, _>>()?;
    let mut cols: Vec<String> = vec!["tau".into(), "E_exact".into(), "dE_exact".into()];
    cols.extend(orders.iter().map(|k| format!("E_{}", k)));
    let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let mut t = Table::new(&col_refs);
    t.warnings = warnings;
    t.meta("ref", label);
    t.meta("cumulants", dtau.map_or("exact".to_string(), |d| format!("finite difference, dtau = {}, r = {}", d, power.r)));
    for (i, tau) in taus.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*tau).into(), curve.energy[i].into(), curve.slope[i].into()];
        row.extend(series.iter().map(|s| Cell::from(s[i])));
        t.push(row);
    }
    Ok(t)
}

fn propagator(
    h: &PartitionedHamiltonian,
    scheme: &qpower_core::TrotterScheme,
    m: usize,
    dtau: f64,
    steps: usize,
) -> CliResult<Table> {
    let g = ground(h)?;
    let dev = propagator_deviation(h, scheme, dtau, steps, &g.state, g.energy)?;
    let scale = dtau.abs().powi(2 * m as i32);
    let mut t = Table::new(&["l", "t", "re_dK", "im_dK", "re_dK_scaled", "im_dK_scaled"]);
    t.meta_num("E0", g.energy);
    t.meta("scaled_by", format!("dtau^{}", 2 * m));
    for (i, d) in dev.iter().enumerate() {
        let l = i + 1;
        t.push(vec![l.into(), (l as f64 * dtau).into(), d.re.into(), d.im.into(), (d.re / scale).into(), (d.im / scale).into()]);
    }
    Ok(t)
}

fn groundstate_table(h: &PartitionedHamiltonian, g: &GroundState) -> Table {
    let mut t = Table::new(&["n_qubits", "E0", "E0_per_unit", "unit", "residual", "matvecs"]);
    t.push(vec![
        h.n_qubits().into(),
        g.energy.into(),
        (g.energy / h.energy_unit()).into(),
        energy_unit_label(h).into(),
        g.residual.into(),
        g.matvecs.into(),
    ]);
    t
}
