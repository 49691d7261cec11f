//! Command-line surface. Times and energies are in units of J throughout.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpower_core::krylov::{MatrixScheme, SubspaceKind, DEFAULT_S_CUT};
use qpower_core::{Formalism, PartitionedHamiltonian, PowerConfig, Route, TrotterScheme};

use crate::error::CliResult;
use crate::model::ModelArgs;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "qpower", version, about = "Trotterized quantum power method experiments on dense statevectors")]
pub struct Cli {
    #[command(flatten)]
    pub config: ExperimentConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct ExperimentConfig {
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Accepted for compatibility; runs are single threaded.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct TrotterArgs {
    /// Order parameter: the product formula is of order 2m.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Recursion fan-out (odd, >= 3).
    #[arg(long, default_value_t = 3)]
    pub p: usize,
}

impl TrotterArgs {
    pub fn scheme(&self, h: &PartitionedHamiltonian) -> CliResult<TrotterScheme> {
        Ok(TrotterScheme::new(self.m, self.p, h.num_parts())?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Iterated,
    Ladder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormalismArg {
    Product,
    Alternative,
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub trotter: TrotterArgs,
    /// Richardson order.
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    /// Richardson step ratio.
    #[arg(long, default_value_t = 2.0)]
    pub ratio: f64,
    #[arg(long, value_enum, default_value_t = RouteArg::Iterated)]
    pub route: RouteArg,
    #[arg(long, value_enum, default_value_t = FormalismArg::Product)]
    pub formalism: FormalismArg,
    /// Let the alternative formalism run below its order requirement
    /// (2m >= n), exposing the commutator residual.
    #[arg(long)]
    pub allow_low_order: bool,
}

impl PowerArgs {
    pub fn config(&self, h: &PartitionedHamiltonian, n: usize, dtau: f64) -> CliResult<PowerConfig> {
        let route = match self.route {
            RouteArg::Iterated => Route::Iterated,
            RouteArg::Ladder => Route::Ladder,
        };
        let formalism = match self.formalism {
            FormalismArg::Product => Formalism::ProductForm,
            FormalismArg::Alternative => Formalism::AlternativeForm,
        };
        Ok(PowerConfig::new(n, dtau, self.trotter.scheme(h)?)
            .with_richardson(self.r)
            .with_ratio(self.ratio)
            .with_route(route)
            .with_formalism(formalism))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Variational,
    Direct,
}

impl From<SchemeArg> for MatrixScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Variational => MatrixScheme::Variational,
            SchemeArg::Direct => MatrixScheme::Direct,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Ite,
    Rte,
    Qpm,
}

impl From<KindArg> for SubspaceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ite => SubspaceKind::Ite,
            KindArg::Rte => SubspaceKind::Rte,
            KindArg::Qpm => SubspaceKind::Qpm,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Product-formula coefficients: i, s_i and running sum T_i.
    Coeffs {
        #[command(flatten)]
        trotter: TrotterArgs,
        #[arg(long, default_value_t = 2)]
        ngamma: usize,
    },
    /// Operator distance between exact and approximated powers.
    Distance {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        power: PowerArgs,
        /// Powers n.
        #[arg(long = "power", value_delimiter = ',', default_value = "1")]
        powers: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.02")]
        dtau_list: Vec<f64>,
        /// Random-phase samples (default 256 up to ten qubits, 16 beyond).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Block Krylov energies, fidelities and overlap conditioning.
    Krylov {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        power: PowerArgs,
        /// Reference labels (phiA, zafm1, q3, slater, ...) or QPSV files.
        #[arg(long, value_delimiter = ',')]
        refs: Vec<String>,
        /// Block size; without --refs the first mb built-in references.
        #[arg(long)]
        mb: Option<usize>,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        #[arg(long, default_value_t = 0.05)]
        dtau: f64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Variational)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = DEFAULT_S_CUT)]
        scut: f64,
        /// Sweep these steps at n = nmax and extrapolate to zero step.
        #[arg(long, value_delimiter = ',')]
        dtau_list: Vec<f64>,
        /// Sweep fit uses even powers up to 2 * fit_order.
        #[arg(long, default_value_t = 1)]
        fit_order: usize,
        /// Skip the exact ground state (no error or fidelity columns).
        #[arg(long)]
        no_exact: bool,
    },
    /// Single-reference ITE / RTE / power-method Krylov comparison.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "ref", default_value = "phiA")]
        reference: String,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        dtau_list: Vec<f64>,
        #[arg(long, default_value_t = 30)]
        nmax: usize,
        /// Richardson order of the power-method basis.
        #[arg(long, default_value_t = 0)]
        r: usize,
    },
    /// Moments, cumulants and Lanczos coefficients of a reference state.
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        power: PowerArgs,
        #[arg(long = "ref", default_value = "phiA")]
        reference: String,
        #[arg(long, default_value_t = 6)]
        nmax: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        dtau_list: Vec<f64>,
        /// Exact moments by sparse application instead of finite differences.
        #[arg(long)]
        exact: bool,
        /// Run the Lanczos recursion on the moments of H - shift.
        #[arg(long, allow_negative_numbers = true)]
        lanczos_shift: Option<f64>,
    },
    /// Connected-moment energies against the exact imaginary-time curve.
    Cmx {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        power: PowerArgs,
        #[arg(long = "ref", default_value = "phiA")]
        reference: String,
        /// Truncation orders.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        orders: Vec<usize>,
        #[arg(long, default_value_t = 2.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 0.05)]
        tau_step: f64,
        /// Cumulants from finite differences at this step (exact if absent).
        #[arg(long)]
        dtau: Option<f64>,
    },
    /// Trotterized ground-state propagator minus the exact phase.
    Propagator {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        trotter: TrotterArgs,
        #[arg(long, default_value_t = 0.1)]
        dtau: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Cyclically relabel the qubits of a QPSV state.
    Translate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        shift: i64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Exact ground-state energy by Lanczos.
    Groundstate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also write the ground state as QPSV.
        #[arg(long)]
        save: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Coeffs { .. } => "coeffs",
            Command::Distance { .. } => "distance",
            Command::Krylov { .. } => "krylov",
            Command::Compare { .. } => "compare",
            Command::Moments { .. } => "moments",
            Command::Cmx { .. } => "cmx",
            Command::Propagator { .. } => "propagator",
            Command::Translate { .. } => "translate",
            Command::Groundstate { .. } => "groundstate",
        }
    }
}
