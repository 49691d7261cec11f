//! Model construction from flags or a JSON term list, and reference-state
//! resolution.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qpower_core::refstates::{heisenberg_references, hubbard_references, hubbard_u0_ground_state, ReferenceSet};
use qpower_core::{PartitionedHamiltonian, Pauli, PauliString};
use serde::Deserialize;

use crate::error::{usage, CliError, CliResult};
use crate::qpsv::load_state;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Heisenberg,
    Hubbard,
    Custom,
}

#[derive(Clone, Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Heisenberg)]
    pub model: ModelKind,
    /// Qubit count (ring only; the ladder is always 16).
    #[arg(long = "n", visible_alias = "n-qubits")]
    pub n: Option<usize>,
    /// Exchange or hopping energy J.
    #[arg(long = "j", default_value_t = 1.0, allow_negative_numbers = true)]
    pub coupling: f64,
    /// On-site interaction of the ladder, in units of J.
    #[arg(long = "u", default_value_t = 4.0, allow_negative_numbers = true)]
    pub interaction: f64,
    /// JSON term list for `--model custom`.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct CustomModel {
    n_qubits: usize,
    parts: Vec<Vec<CustomTerm>>,
}

#[derive(Debug, Deserialize)]
struct CustomTerm {
    coeff: f64,
    ops: Vec<(usize, String)>,
}

pub fn parse_custom(json: &str) -> CliResult<PartitionedHamiltonian> {
    let m: CustomModel = serde_json::from_str(json)?;
    let mut parts = Vec::with_capacity(m.parts.len());
    for part in &m.parts {
        let mut terms = Vec::with_capacity(part.len());
        for t in part {
            let mut ops = Vec::with_capacity(t.ops.len());
            for (q, p) in &t.ops {
                let mut chars = p.chars();
                let pauli = match (chars.next().and_then(Pauli::from_char), chars.next()) {
                    (Some(x), None) => x,
                    _ => return Err(usage(format!("unknown Pauli operator '{}'", p))),
                };
                ops.push((*q, pauli));
            }
            terms.push(PauliString::real(t.coeff, &ops)?);
        }
        parts.push(terms);
    }
    Ok(PartitionedHamiltonian::custom(m.n_qubits, parts)?)
}

impl ModelArgs {
    pub fn build(&self) -> CliResult<PartitionedHamiltonian> {
        if !self.coupling.is_finite() || !self.interaction.is_finite() {
            return Err(usage("model parameters must be finite"));
        }
        match self.model {
            ModelKind::Heisenberg => Ok(PartitionedHamiltonian::heisenberg_ring(self.n.unwrap_or(16), self.coupling)?),
            ModelKind::Hubbard => {
                if self.n.is_some_and(|n| n != 16) {
                    return Err(usage("the Hubbard ladder always has 16 qubits"));
                }
                Ok(PartitionedHamiltonian::hubbard_ladder_4x2(self.coupling, self.interaction * self.coupling)?)
            }
            ModelKind::Custom => {
                let path = self.model_file.as_ref().ok_or_else(|| usage("--model custom needs --model-file"))?;
                let h = parse_custom(&std::fs::read_to_string(path)?)?;
                if self.n.is_some_and(|n| n != h.n_qubits()) {
                    return Err(usage(format!(
                        "--n {} disagrees with the model file ({} qubits)",
                        self.n.unwrap(),
                        h.n_qubits()
                    )));
                }
                Ok(h)
            }
        }
    }

    /// Built-in references of the model (empty for custom models).
    pub fn builtin_refs(&self, h: &PartitionedHamiltonian) -> CliResult<ReferenceSet> {
        Ok(match self.model {
            ModelKind::Heisenberg => heisenberg_references(h.n_qubits())?,
            ModelKind::Hubbard => hubbard_references()?,
            ModelKind::Custom => ReferenceSet::default(),
        })
    }

    /// Resolves each entry as an existing file (QPSV), the ladder's `slater`
    /// state, or a built-in label. Returns the set and any load warnings.
    pub fn resolve_refs(&self, h: &PartitionedHamiltonian, entries: &[String]) -> CliResult<(ReferenceSet, Vec<String>)> {
        let builtin = self.builtin_refs(h)?;
        let mut set = ReferenceSet::default();
        let mut warnings = Vec::new();
        for e in entries {
            let path = Path::new(e);
            if path.is_file() {
                let l = load_state(path)?;
                if l.state.n_qubits() != h.n_qubits() {
                    return Err(usage(format!("{} has {} qubits, model has {}", e, l.state.n_qubits(), h.n_qubits())));
                }
                warnings.extend(l.warning);
                set.push(e.clone(), l.state);
            } else if self.model == ModelKind::Hubbard && e.eq_ignore_ascii_case("slater") {
                let g = hubbard_u0_ground_state(self.coupling)?;
                if g.degenerate {
                    warnings.push("non-interacting ground state is degenerate; tie broken by phase convention".into());
                }
                set.push("slater", g.state);
            } else {
                let one = builtin
                    .select(&[e.as_str()])
                    .map_err(|_| CliError::Usage(format!("'{}' is neither a file nor a reference label ({})", e, builtin)))?;
                set.push(one.labels[0].clone(), one.states[0].clone());
            }
        }
        Ok((set, warnings))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_json() {
        let json =
            r#"{"n_qubits": 2, "parts": [[{"coeff": 0.5, "ops": [[1, "Z"]]}], [{"coeff": -1.0, "ops": [[1, "X"], [2, "X"]]}]]}"#;
        let h = parse_custom(json).unwrap();
        assert_eq!(h.n_qubits(), 2);
        assert_eq!(h.num_parts(), 2);
        assert!(parse_custom(r#"{"n_qubits": 1, "parts": [[{"coeff": 1.0, "ops": [[1, "W"]]}]]}"#).is_err());
        assert!(parse_custom(r#"{"n_qubits": 1}"#).is_err());
        // non-commuting terms in one part
        let bad = r#"{"n_qubits": 1, "parts": [[{"coeff": 1.0, "ops": [[1, "X"]]}, {"coeff": 1.0, "ops": [[1, "Z"]]}]]}"#;
        assert!(parse_custom(bad).is_err());
    }
}
