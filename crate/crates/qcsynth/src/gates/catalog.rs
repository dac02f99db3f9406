//! Input-gate catalogs: angle-grid expansion, deduplication, and the frozen
//! read-only gate set a model is assembled from.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::defs::{lift_gate, Atom, AtomGate, GateDef, GateKind};
use super::matrix::{ComplexMatrix, RealEmbedding, UNITARY_TOL};
use super::GateError;

/// Matrices closer than this are treated as the same input gate.
pub const DEDUP_TOL: f64 = 1e-10;

/// Angle grids for one parametrized gate, keyed per angle.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub phi: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
}

impl AngleGrid {
    pub fn theta_only(theta: Vec<f64>) -> Self {
        AngleGrid {
            theta,
            ..Default::default()
        }
    }

    pub fn u3(theta: Vec<f64>, phi: Vec<f64>, lambda: Vec<f64>) -> Self {
        AngleGrid { theta, phi, lambda }
    }
}

/// Discretization table: looked up by exact gate label (`"U3_1"`) first,
/// then by gate family (`"U3"`).
pub type Discretization = HashMap<String, AngleGrid>;

fn grids_for_atom(atom: &Atom, disc: &Discretization) -> Result<Vec<Vec<f64>>, GateError> {
    let AtomGate::Param { gate, angles: None, .. } = &atom.gate else {
        return Ok(vec![]);
    };
    let label = format!("{}_{}", gate.name(), atom.qubit);
    let grid = disc
        .get(&label)
        .or_else(|| disc.get(gate.name()))
        .ok_or_else(|| GateError::EmptyDiscretization(label.clone()))?;
    let per_angle: Vec<Vec<f64>> = match gate.n_angles() {
        3 => vec![grid.theta.clone(), grid.phi.clone(), grid.lambda.clone()],
        _ => vec![grid.theta.clone()],
    };
    if per_angle.iter().any(Vec::is_empty) {
        return Err(GateError::EmptyDiscretization(label));
    }
    Ok(per_angle)
}

/// Expands parametrized definitions over the Cartesian product of their
/// angle grids, lifts everything to `2^n x 2^n`, deduplicates matrices equal
/// within [`DEDUP_TOL`], and appends the identity if it is absent.
///
/// Returns the concrete input list; `K` is its length.
pub fn build_input_set(
    defs: &[GateDef],
    n: usize,
    disc: &Discretization,
) -> Result<Vec<(GateDef, ComplexMatrix)>, GateError> {
    let mut out: Vec<(GateDef, ComplexMatrix)> = Vec::new();
    let mut names: HashMap<String, usize> = HashMap::new();

    let mut push = |def: GateDef, m: ComplexMatrix, out: &mut Vec<(GateDef, ComplexMatrix)>| {
        let err = m.unitarity_error();
        if err > UNITARY_TOL {
            return Err(GateError::NonUnitary(def.name.clone(), err));
        }
        if let Some(&at) = names.get(&def.name) {
            // Same name is fine only when it is the same matrix.
            if out[at].1.max_abs_diff(&m) <= DEDUP_TOL {
                return Ok(());
            }
            return Err(GateError::DuplicateName(def.name.clone()));
        }
        if out.iter().any(|(_, existing)| existing.max_abs_diff(&m) <= DEDUP_TOL) {
            return Ok(());
        }
        names.insert(def.name.clone(), out.len());
        out.push((def, m));
        Ok(())
    };

    for def in defs {
        if !def.is_parametrized() {
            let m = lift_gate(def, n)?;
            push(def.clone(), m, &mut out)?;
            continue;
        }
        let GateKind::Column(atoms) = &def.kind else {
            unreachable!("only columns carry parameters");
        };
        // Cartesian product over every unresolved angle of every atom.
        let mut grids: Vec<Vec<f64>> = Vec::new();
        for atom in atoms {
            grids.extend(grids_for_atom(atom, disc)?);
        }
        let mut choice = vec![0usize; grids.len()];
        loop {
            let mut resolved = atoms.clone();
            let mut cursor = 0;
            for atom in resolved.iter_mut() {
                if let AtomGate::Param { gate, angles: angles @ None, .. } = &mut atom.gate {
                    let take = gate.n_angles();
                    let vals: Vec<f64> = (0..take)
                        .map(|off| grids[cursor + off][choice[cursor + off]])
                        .collect();
                    cursor += take;
                    *angles = Some(vals);
                }
            }
            let concrete = GateDef::column(resolved);
            let m = lift_gate(&concrete, n)?;
            push(concrete, m, &mut out)?;

            // Advance the mixed-radix counter.
            let mut pos = grids.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < grids[pos].len() {
                    break;
                }
                choice[pos] = 0;
                if pos == 0 {
                    break;
                }
            }
            if choice.iter().all(|&c| c == 0) {
                break;
            }
        }
    }

    let dim = 1usize << n;
    let identity = ComplexMatrix::identity(dim);
    if !out.iter().any(|(_, m)| m.max_abs_diff(&identity) <= DEDUP_TOL) {
        out.push((GateDef::identity(), identity));
    }
    Ok(out)
}

/// The frozen gate set for one decomposition problem: concrete input gates
/// (with their real embeddings), the target, and the identity index.
#[derive(Clone, Debug)]
pub struct GateCatalog {
    pub inputs: Vec<CatalogEntry>,
    pub target_name: String,
    pub target: ComplexMatrix,
    pub identity_index: usize,
    pub n_qubits: usize,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub def: GateDef,
    pub matrix: ComplexMatrix,
    pub embedding: RealEmbedding,
}

impl GateCatalog {
    /// Wraps an already-expanded input list. The identity is appended when
    /// missing; inputs must already be deduplicated.
    pub fn new(
        inputs: Vec<(GateDef, ComplexMatrix)>,
        target_name: impl Into<String>,
        target: ComplexMatrix,
    ) -> Result<Self, GateError> {
        let target_name = target_name.into();
        let dim = target.dim();
        let n_qubits = target.n_qubits();
        for (def, m) in &inputs {
            if m.dim() != dim {
                return Err(GateError::Parse(
                    def.name.clone(),
                    format!("gate dimension {} does not match target {}", m.dim(), dim),
                ));
            }
        }
        let identity = ComplexMatrix::identity(dim);
        let mut inputs = inputs;
        if !inputs
            .iter()
            .any(|(_, m)| m.max_abs_diff(&identity) <= DEDUP_TOL)
        {
            inputs.push((GateDef::identity(), identity.clone()));
        }
        let mut identity_index = None;
        for (k, (def, m)) in inputs.iter().enumerate() {
            let err = m.unitarity_error();
            if err > UNITARY_TOL {
                return Err(GateError::NonUnitary(def.name.clone(), err));
            }
            if m.max_abs_diff(&identity) <= DEDUP_TOL && identity_index.is_none() {
                identity_index = Some(k);
            }
        }
        let entries = inputs
            .into_iter()
            .map(|(def, matrix)| {
                let embedding = matrix.embed_real();
                CatalogEntry {
                    def,
                    matrix,
                    embedding,
                }
            })
            .collect();
        Ok(GateCatalog {
            inputs: entries,
            target_name,
            target,
            identity_index: identity_index.expect("identity was appended"),
            n_qubits,
        })
    }

    /// Expands definitions against a discretization and builds the catalog.
    pub fn build(
        defs: &[GateDef],
        n: usize,
        disc: &Discretization,
        target_name: impl Into<String>,
        target: ComplexMatrix,
    ) -> Result<Self, GateError> {
        let inputs = build_input_set(defs, n, disc)?;
        Self::new(inputs, target_name, target)
    }

    pub fn k(&self) -> usize {
        self.inputs.len()
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn gate_name(&self, k: usize) -> &str {
        &self.inputs[k].def.name
    }

    /// Whether any input is a CNOT placement. The benchmark suites always
    /// include one; toy catalogs may not.
    pub fn has_cnot(&self) -> bool {
        self.inputs.iter().any(|e| {
            matches!(
                e.def.kind,
                GateKind::Controlled {
                    base: super::defs::ControlledBase::X,
                    ..
                }
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::defs::{parse_gate, ParamGate};
    use crate::gates::targets::target_lookup;

    fn defs(names: &[&str]) -> Vec<GateDef> {
        names.iter().map(|s| parse_gate(s).unwrap()).collect()
    }

    #[test]
    fn reverse_cnot_input_count() {
        // One H on each qubit plus CNOT_12 plus identity gives K = 4.
        let inputs = build_input_set(
            &defs(&["H_1", "H_2", "CNOT_1_2", "Identity"]),
            2,
            &Discretization::new(),
        )
        .unwrap();
        assert_eq!(inputs.len(), 4);
    }

    #[test]
    fn identity_appended_when_absent() {
        let inputs =
            build_input_set(&defs(&["H_1", "CNOT_1_2"]), 2, &Discretization::new()).unwrap();
        assert_eq!(inputs.len(), 3);
        assert_eq!(inputs.last().unwrap().0.name, "Identity");
    }

    #[test]
    fn expansion_dedups_equal_matrices() {
        // U3(0,0,0) collides with the identity; U3(0,0,pi) on both grids
        // collides across the two qubits only when lifted matrices match,
        // which they do not, so Z_1 and Z_2 stay separate.
        let mut disc = Discretization::new();
        disc.insert(
            "U3".to_string(),
            AngleGrid::u3(vec![0.0], vec![0.0], vec![0.0, std::f64::consts::PI]),
        );
        let inputs = build_input_set(
            &[
                GateDef::parametrized(ParamGate::U3, 1),
                GateDef::parametrized(ParamGate::U3, 2),
            ],
            2,
            &disc,
        )
        .unwrap();
        // Expansion: {I, Z_1} and {I, Z_2}; identity kept once.
        assert_eq!(inputs.len(), 3);
    }

    #[test]
    fn empty_discretization_is_an_error() {
        let r = build_input_set(
            &[GateDef::parametrized(ParamGate::U3, 1)],
            2,
            &Discretization::new(),
        );
        assert!(matches!(r, Err(GateError::EmptyDiscretization(_))));
    }

    #[test]
    fn catalog_records_identity_index_and_cnot() {
        let inputs = build_input_set(
            &defs(&["H_1", "CNOT_1_2", "Identity"]),
            2,
            &Discretization::new(),
        )
        .unwrap();
        let cat = GateCatalog::new(inputs, "CNot_21", target_lookup("reverse_cnot", 2).unwrap())
            .unwrap();
        assert_eq!(cat.gate_name(cat.identity_index), "Identity");
        assert!(cat.has_cnot());
        assert_eq!(cat.n_qubits, 2);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let inputs = build_input_set(
            &defs(&["H_1", "CNOT_1_2", "Identity"]),
            2,
            &Discretization::new(),
        )
        .unwrap();
        let toffoli = target_lookup("toffoli", 3).unwrap();
        assert!(GateCatalog::new(inputs, "toffoli", toffoli).is_err());
    }

    #[test]
    fn unitary_products_stay_unitary() {
        // Products of up to 10 catalog matrices keep unitarity within 1e-9.
        let inputs = build_input_set(
            &defs(&["H_1", "H_2", "T_1", "S_2", "CNOT_1_2", "CNOT_2_1"]),
            2,
            &Discretization::new(),
        )
        .unwrap();
        let mut acc = ComplexMatrix::identity(4);
        for (step, (_, m)) in inputs.iter().cycle().take(10).enumerate() {
            acc = acc.matmul(m);
            let _ = step;
        }
        assert!(acc.unitarity_error() <= 1e-9);
    }
}
