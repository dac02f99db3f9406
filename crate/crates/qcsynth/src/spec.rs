//! JSON decomposition specs: the external description of one problem
//! instance (inputs, target, discretization, variant, phases, symmetry).

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{
    build_input_set, parse_gate, target_lookup, AngleConvention, AngleGrid, Atom, AtomGate,
    ComplexMatrix, Discretization, GateCatalog, GateDef, GateError, GateKind,
};
use crate::model::{AssembleOptions, Phase, Variant};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read spec: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse spec JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("invalid spec: {0}")]
    Validation(String),
}

/// One input gate: either a gate string (`"H_1"`, `"CNOT_1_2"`,
/// `"H_1xH_2"`) or a descriptor object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateSpec {
    Name(String),
    Descriptor {
        /// Gate family: `H`, `S`, `T`, `U3`, `RY`, `CNOT`, `CV`, ...
        kind: String,
        /// Qubit indices: one per column slot, or `[control, target]` for
        /// two-qubit gates.
        placement: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angles: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

impl GateSpec {
    fn to_string_form(&self) -> Result<String, SpecError> {
        match self {
            GateSpec::Name(s) => Ok(s.clone()),
            GateSpec::Descriptor {
                kind,
                placement,
                angles,
                ..
            } => {
                if kind.eq_ignore_ascii_case("identity") {
                    return Ok("Identity".to_string());
                }
                if placement.is_empty() {
                    return Err(SpecError::Validation(format!(
                        "gate descriptor `{kind}` needs a placement"
                    )));
                }
                let angle_suffix = match angles {
                    None => String::new(),
                    Some(a) => format!(
                        "({})",
                        a.iter()
                            .map(|v| format!("{v}"))
                            .collect::<Vec<_>>()
                            .join(",")
                    ),
                };
                let upper = kind.to_ascii_uppercase();
                let is_controlled = matches!(
                    upper.as_str(),
                    "CNOT" | "CX" | "CZ" | "CH" | "CV" | "CVDAGGER" | "CS" | "CSDAGGER"
                );
                if is_controlled {
                    if placement.len() != 2 {
                        return Err(SpecError::Validation(format!(
                            "two-qubit gate `{kind}` needs [control, target]"
                        )));
                    }
                    Ok(format!("{kind}_{}_{}", placement[0], placement[1]))
                } else {
                    Ok(placement
                        .iter()
                        .map(|q| format!("{kind}_{q}{angle_suffix}"))
                        .collect::<Vec<_>>()
                        .join("x"))
                }
            }
        }
    }
}

/// The target: a library name or an explicit matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Name(String),
    Matrix {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

/// A phase: `"1"`, `"-1"`, `"i"`, `"-i"`, or `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseSpec {
    Symbol(String),
    Pair([f64; 2]),
}

impl PhaseSpec {
    fn to_phase(&self) -> Result<Phase, SpecError> {
        match self {
            PhaseSpec::Pair([re, im]) => Ok(Phase { re: *re, im: *im }),
            PhaseSpec::Symbol(s) => match s.trim() {
                "1" | "+1" => Ok(Phase { re: 1.0, im: 0.0 }),
                "-1" => Ok(Phase { re: -1.0, im: 0.0 }),
                "i" | "+i" => Ok(Phase { re: 0.0, im: 1.0 }),
                "-i" => Ok(Phase { re: 0.0, im: -1.0 }),
                other => Err(SpecError::Validation(format!("unknown phase `{other}`"))),
            },
        }
    }
}

fn default_symmetry() -> bool {
    true
}

fn default_variant() -> Variant {
    Variant::Minlp
}

/// A complete decomposition problem description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSpec {
    pub n_qubits: usize,
    pub max_depth: usize,
    pub input_gates: Vec<GateSpec>,
    pub target: TargetSpec,
    #[serde(default, skip_serializing_if = "HashMap::is_empty")]
    pub discretization: HashMap<String, AngleGrid>,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_set: Option<Vec<PhaseSpec>>,
    #[serde(default = "default_symmetry")]
    pub symmetry: bool,
    #[serde(default)]
    pub angle_convention: AngleConvention,
}

impl DecompositionSpec {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }

    /// Simple constructor used by the built-in suite.
    pub fn new(
        n_qubits: usize,
        max_depth: usize,
        gates: &[&str],
        target: &str,
    ) -> DecompositionSpec {
        DecompositionSpec {
            n_qubits,
            max_depth,
            input_gates: gates.iter().map(|s| GateSpec::Name(s.to_string())).collect(),
            target: TargetSpec::Name(target.to_string()),
            discretization: HashMap::new(),
            variant: Variant::Minlp,
            phase_set: None,
            symmetry: true,
            angle_convention: AngleConvention::Full,
        }
    }

    pub fn with_grid(mut self, key: &str, grid: AngleGrid) -> Self {
        self.discretization.insert(key.to_string(), grid);
        self
    }

    fn target_matrix(&self) -> Result<(String, ComplexMatrix), SpecError> {
        match &self.target {
            TargetSpec::Name(name) => Ok((name.clone(), target_lookup(name, self.n_qubits)?)),
            TargetSpec::Matrix { re, im, name } => {
                let dim = re.len();
                if dim != 1 << self.n_qubits {
                    return Err(SpecError::Validation(format!(
                        "target matrix is {}x{} but n_qubits = {}",
                        dim,
                        dim,
                        self.n_qubits
                    )));
                }
                let rows: Vec<Vec<(f64, f64)>> = re
                    .iter()
                    .zip(im)
                    .map(|(rr, ir)| rr.iter().zip(ir).map(|(&a, &b)| (a, b)).collect())
                    .collect();
                let m = ComplexMatrix::from_rows(&rows);
                if !m.is_unitary(1e-8) {
                    return Err(SpecError::Validation(
                        "explicit target matrix is not unitary".to_string(),
                    ));
                }
                Ok((
                    name.clone().unwrap_or_else(|| "custom".to_string()),
                    m,
                ))
            }
        }
    }

    /// Parses and expands the spec into a concrete catalog.
    pub fn catalog(&self) -> Result<GateCatalog, SpecError> {
        let mut defs: Vec<GateDef> = Vec::new();
        for g in &self.input_gates {
            let s = g.to_string_form()?;
            let mut def = parse_gate(&s)?;
            if self.angle_convention == AngleConvention::Half {
                apply_convention(&mut def, AngleConvention::Half);
            }
            defs.push(def);
        }
        let disc: Discretization = self.discretization.clone();
        let inputs = build_input_set(&defs, self.n_qubits, &disc)?;
        let (tname, tmat) = self.target_matrix()?;
        let cat = GateCatalog::new(inputs, tname, tmat)?;
        if !cat.has_cnot() {
            eprintln!("warning: input gate set has no CNOT placement");
        }
        Ok(cat)
    }

    pub fn assemble_options(&self) -> Result<AssembleOptions, SpecError> {
        let phase_set = match &self.phase_set {
            None => Phase::default_set(),
            Some(list) => list
                .iter()
                .map(|p| p.to_phase())
                .collect::<Result<Vec<_>, _>>()?,
        };
        Ok(AssembleOptions {
            phase_set,
            symmetry: self.symmetry,
        })
    }
}

fn apply_convention(def: &mut GateDef, conv: AngleConvention) {
    if let GateKind::Column(atoms) = &mut def.kind {
        for Atom { gate, .. } in atoms.iter_mut() {
            if let AtomGate::Param { convention, .. } = gate {
                *convention = conv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_spec() {
        let text = r#"{
            "n_qubits": 2,
            "max_depth": 5,
            "input_gates": ["H_1", "H_2", "CNOT_1_2", "Identity"],
            "target": "reverse_cnot"
        }"#;
        let spec = DecompositionSpec::from_json(text).unwrap();
        let cat = spec.catalog().unwrap();
        assert_eq!(cat.k(), 4);
        assert_eq!(spec.variant, Variant::Minlp);
        assert!(spec.symmetry);
    }

    #[test]
    fn descriptor_and_matrix_target() {
        let text = r#"{
            "n_qubits": 1,
            "max_depth": 2,
            "input_gates": [
                {"kind": "H", "placement": [1]},
                {"kind": "RZ", "placement": [1], "angles": [1.5707963267948966]}
            ],
            "target": {"re": [[0.0, 1.0], [1.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]], "name": "X"},
            "phase_set": ["1", "-1", [0.0, 1.0]]
        }"#;
        let spec = DecompositionSpec::from_json(text).unwrap();
        let cat = spec.catalog().unwrap();
        assert_eq!(cat.k(), 3, "H, RZ(pi/2), identity");
        let opts = spec.assemble_options().unwrap();
        assert_eq!(opts.phase_set.len(), 3);
        assert_eq!(cat.target_name, "X");
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = DecompositionSpec::new(
            2,
            4,
            &["H_1", "U3_2", "CNOT_1_2", "Identity"],
            "controlled_z",
        )
        .with_grid("U3_2", AngleGrid::u3(vec![0.0, 0.5], vec![0.0], vec![0.0, 1.0]));
        let text = spec.to_json();
        let back = DecompositionSpec::from_json(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(DecompositionSpec::from_json("{").is_err());
        let text = r#"{
            "n_qubits": 2, "max_depth": 1,
            "input_gates": ["H_9"], "target": "magic"
        }"#;
        let spec = DecompositionSpec::from_json(text).unwrap();
        assert!(spec.catalog().is_err());
    }
}
