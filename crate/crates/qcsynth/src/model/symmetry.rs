//! Symmetry-breaking cuts for reverse-commutative gate windows.
//!
//! For a CNOT together with one-qubit gates `a` on its control qubit and
//! `b` on its target qubit, six four-deep selection patterns are redundant:
//! each has an equal-product reordering outside the forbidden set, so the
//! cuts remove duplicates without removing all optima. Which patterns are
//! actually redundant depends on the gate algebra, so every pattern is
//! emitted only after verifying the commutation identity that justifies it
//! on the concrete matrices.

use crate::gates::{ComplexMatrix, GateCatalog, GateKind};

use super::SymmetryConstraint;

const COMMUTE_TOL: f64 = 1e-10;

fn commutes(a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
    a.matmul(b).max_abs_diff(&b.matmul(a)) <= COMMUTE_TOL
}

/// `c·b·c·b == b·c·b·c`, the identity behind the alternating pattern on the
/// target qubit.
fn alternation_closes(c: &ComplexMatrix, b: &ComplexMatrix) -> bool {
    let cb = c.matmul(b);
    cb.matmul(&cb).max_abs_diff(&b.matmul(c).matmul(&b.matmul(c))) <= COMMUTE_TOL
}

/// Emits the six-pattern family for every qualifying
/// `(one-qubit gate on control, one-qubit gate on target, CNOT)` triple.
/// Patterns are windows of four consecutive depths; the caller instantiates
/// them at each depth position. Returns an empty list when no gate
/// qualifies.
pub fn generate_symmetry_constraints(catalog: &GateCatalog) -> Vec<SymmetryConstraint> {
    let mut patterns: Vec<Vec<(usize, usize)>> = Vec::new();
    let push = |pat: Vec<(usize, usize)>, patterns: &mut Vec<Vec<(usize, usize)>>| {
        if !patterns.contains(&pat) {
            patterns.push(pat);
        }
    };

    // One-qubit gates, keyed by their single acted-on qubit.
    let singles: Vec<(usize, usize)> = catalog
        .inputs
        .iter()
        .enumerate()
        .filter_map(|(k, e)| match &e.def.kind {
            GateKind::Column(atoms) if atoms.len() == 1 => Some((k, atoms[0].qubit)),
            _ => None,
        })
        .collect();

    for (c_idx, entry) in catalog.inputs.iter().enumerate() {
        let GateKind::Controlled {
            base: crate::gates::ControlledBase::X,
            control,
            target,
        } = entry.def.kind
        else {
            continue;
        };
        let c_mat = &entry.matrix;

        let control_gates: Vec<usize> = singles
            .iter()
            .filter(|&&(k, q)| q == control && commutes(&catalog.inputs[k].matrix, c_mat))
            .map(|&(k, _)| k)
            .collect();
        let target_gates: Vec<usize> = singles
            .iter()
            .filter(|&&(_, q)| q == target)
            .map(|&(k, _)| k)
            .collect();

        for &a in &control_gates {
            // (a, c, a, c) and (c, a, c, a) reorder through [a, c] = 0.
            push(vec![(a, 0), (c_idx, 1), (a, 2), (c_idx, 3)], &mut patterns);
            push(vec![(c_idx, 0), (a, 1), (c_idx, 2), (a, 3)], &mut patterns);
        }
        for &b in &target_gates {
            if alternation_closes(c_mat, &catalog.inputs[b].matrix) {
                push(vec![(c_idx, 0), (b, 1), (c_idx, 2), (b, 3)], &mut patterns);
            }
            for &a in &control_gates {
                if a == b {
                    continue;
                }
                push(vec![(b, 0), (c_idx, 1), (a, 2), (c_idx, 3)], &mut patterns);
                push(vec![(c_idx, 0), (a, 1), (c_idx, 2), (b, 3)], &mut patterns);
                push(vec![(c_idx, 0), (b, 1), (c_idx, 2), (a, 3)], &mut patterns);
            }
        }
    }

    patterns
        .into_iter()
        .map(|terms| SymmetryConstraint {
            bound: terms.len() - 1,
            terms,
        })
        .collect()
}
