//! Assembly of the circuit-decomposition optimization problem.
//!
//! One gate is selected per depth: binary selectors `z_{k,d}` pick input
//! gate `k` at depth `d`, the cumulative products `Ĝ_d` are real embedding
//! matrices with entries in `[-1, 1]`, and the recursive bi-matrix product
//! constraints tie `Ĝ_d = Ĝ_{d-1} · Σ_k z_{k,d} M_k` with
//! `Ĝ_{D-1} · Σ_k z_{k,D} M_k = T`. The per-depth gate matrix is eliminated
//! by substitution, so every bilinear term is a product of one `Ĝ` entry and
//! one `z`. Four variants are assembled: the bilinear binary problem, its
//! McCormick linearization, and both continuous relaxations.

mod export;
mod symmetry;

pub use export::{count_variables, export_model, export_to_string};
pub use symmetry::generate_symmetry_constraints;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{GateCatalog, RealEmbedding};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("need at least 2 input gates, got {0}")]
    TooFewGates(usize),
    #[error("maximum depth must be at least 1")]
    ZeroDepth,
    #[error("phase ({0}, {1}) does not have modulus 1")]
    BadPhase(f64, f64),
    #[error("empty phase set")]
    EmptyPhaseSet,
    #[error("model export failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Problem variant: binary or relaxed selectors, bilinear or McCormick form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Minlp,
    Milp,
    Nlp,
    Lp,
}

impl Variant {
    pub fn is_binary(self) -> bool {
        matches!(self, Variant::Minlp | Variant::Milp)
    }

    pub fn is_linearized(self) -> bool {
        matches!(self, Variant::Milp | Variant::Lp)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Minlp => "MINLP",
            Variant::Milp => "MILP",
            Variant::Nlp => "NLP",
            Variant::Lp => "LP",
        }
    }
}

/// A global-phase unit multiplying the target in the equality test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub re: f64,
    pub im: f64,
}

impl Phase {
    pub const ONE: Phase = Phase { re: 1.0, im: 0.0 };

    pub fn modulus(self) -> f64 {
        (self.re * self.re + self.im * self.im).sqrt()
    }

    /// The default disjunction set {1, -1, i, -i}.
    pub fn default_set() -> Vec<Phase> {
        vec![
            Phase { re: 1.0, im: 0.0 },
            Phase { re: -1.0, im: 0.0 },
            Phase { re: 0.0, im: 1.0 },
            Phase { re: 0.0, im: -1.0 },
        ]
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
        if close(self.re, 1.0) && close(self.im, 0.0) {
            write!(f, "1")
        } else if close(self.re, -1.0) && close(self.im, 0.0) {
            write!(f, "-1")
        } else if close(self.re, 0.0) && close(self.im, 1.0) {
            write!(f, "i")
        } else if close(self.re, 0.0) && close(self.im, -1.0) {
            write!(f, "-i")
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// One symmetry-breaking pattern: gate indices at consecutive depth offsets
/// whose simultaneous selection is forbidden. Instantiated at every depth
/// `d` in `1..=D-3` as `Σ z_{k, d+offset} <= bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryConstraint {
    /// `(gate index, depth offset)` with offsets within `0..=3`.
    pub terms: Vec<(usize, usize)>,
    /// Right-hand side; always `terms.len() - 1`.
    pub bound: usize,
}

/// Flat variable indexing for one assembled model.
///
/// Layout: the `z` block (`K·D` entries) first, then the `Ĝ` block
/// (`(D-1)·m²` entries for `Ĝ_1 .. Ĝ_{D-1}`, `m = 2^(N+1)`), then — in
/// linearized variants — one McCormick auxiliary per `(depth, gate, Ĝ entry)`
/// product.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableLayout {
    pub n_gates: usize,
    pub max_depth: usize,
    /// Embedding dimension `2^(N+1)`.
    pub emb_dim: usize,
}

impl VariableLayout {
    pub fn n_z(&self) -> usize {
        self.n_gates * self.max_depth
    }

    pub fn n_ghat(&self) -> usize {
        (self.max_depth - 1) * self.emb_dim * self.emb_dim
    }

    pub fn n_aux(&self) -> usize {
        (self.max_depth - 1) * self.n_gates * self.emb_dim * self.emb_dim
    }

    /// Index of `z_{k,d}`; `k` is 0-based, `d` is 1-based.
    pub fn z_index(&self, k: usize, d: usize) -> usize {
        debug_assert!(k < self.n_gates && (1..=self.max_depth).contains(&d));
        (d - 1) * self.n_gates + k
    }

    /// Index of `Ĝ_d[i,j]`; `d` is 1-based in `1..=D-1`.
    pub fn ghat_index(&self, d: usize, i: usize, j: usize) -> usize {
        debug_assert!((1..self.max_depth).contains(&d));
        let m = self.emb_dim;
        self.n_z() + ((d - 1) * m + i) * m + j
    }

    /// Index of the auxiliary for `Ĝ_{d-1}[i,l] · z_{k,d}`; `d` in `2..=D`.
    pub fn aux_index(&self, d: usize, k: usize, i: usize, l: usize) -> usize {
        debug_assert!((2..=self.max_depth).contains(&d));
        let m = self.emb_dim;
        self.n_z() + self.n_ghat() + (((d - 2) * self.n_gates + k) * m + i) * m + l
    }

    /// Total variable count for the given variant.
    pub fn total(&self, variant: Variant) -> usize {
        let base = self.n_z() + self.n_ghat();
        if variant.is_linearized() {
            base + self.n_aux()
        } else {
            base
        }
    }
}

/// Options accepted by [`assemble`].
#[derive(Clone, Debug)]
pub struct AssembleOptions {
    pub phase_set: Vec<Phase>,
    pub symmetry: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            phase_set: Phase::default_set(),
            symmetry: true,
        }
    }
}

/// An assembled decomposition problem. Immutable once built; shareable
/// across concurrent solver runs.
#[derive(Clone, Debug)]
pub struct CircuitModel {
    pub catalog: GateCatalog,
    pub max_depth: usize,
    pub variant: Variant,
    pub phase_set: Vec<Phase>,
    /// `embed(phase * target)`, one per phase in `phase_set`.
    pub targets: Vec<RealEmbedding>,
    /// `G_0`, the initial circuit state: the identity embedding.
    pub initial: RealEmbedding,
    pub symmetry: Vec<SymmetryConstraint>,
    pub layout: VariableLayout,
}

impl CircuitModel {
    pub fn n_qubits(&self) -> usize {
        self.catalog.n_qubits
    }

    pub fn n_gates(&self) -> usize {
        self.catalog.k()
    }

    /// Objective coefficient of gate `k`: 1 unless it is the identity.
    pub fn obj_coeff(&self, k: usize) -> f64 {
        if k == self.catalog.identity_index {
            0.0
        } else {
            1.0
        }
    }

    /// Counts the non-identity selections of a gate-per-depth sequence.
    pub fn sequence_cost(&self, seq: &[usize]) -> usize {
        seq.iter()
            .filter(|&&k| k != self.catalog.identity_index)
            .count()
    }
}

/// Builds the model: variable layout, embedded targets per phase, and the
/// symmetry patterns. The per-depth gate matrix is eliminated by
/// substitution, so it never materializes as variables.
pub fn assemble(
    catalog: &GateCatalog,
    max_depth: usize,
    variant: Variant,
    options: AssembleOptions,
) -> Result<CircuitModel, ModelError> {
    if catalog.k() < 2 {
        return Err(ModelError::TooFewGates(catalog.k()));
    }
    if max_depth == 0 {
        return Err(ModelError::ZeroDepth);
    }
    if options.phase_set.is_empty() {
        return Err(ModelError::EmptyPhaseSet);
    }
    for p in &options.phase_set {
        if (p.modulus() - 1.0).abs() > 1e-12 {
            return Err(ModelError::BadPhase(p.re, p.im));
        }
    }
    if catalog.n_qubits > 4 {
        eprintln!(
            "warning: {} qubits is beyond the tested range (1..=4)",
            catalog.n_qubits
        );
    }

    let emb_dim = 2 * catalog.dim();
    let layout = VariableLayout {
        n_gates: catalog.k(),
        max_depth,
        emb_dim,
    };
    let targets = options
        .phase_set
        .iter()
        .map(|p| catalog.target.scale(p.re, p.im).embed_real())
        .collect();
    let symmetry = if options.symmetry {
        generate_symmetry_constraints(catalog)
    } else {
        Vec::new()
    };

    Ok(CircuitModel {
        catalog: catalog.clone(),
        max_depth,
        variant,
        phase_set: options.phase_set,
        targets,
        initial: RealEmbedding::identity(emb_dim),
        symmetry,
        layout,
    })
}

/// Linear row sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// One constraint row: linear terms, optional bilinear terms, sense, rhs.
#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub lin: Vec<(usize, f64)>,
    pub quad: Vec<(usize, usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// The four McCormick rows for `aux = g · z` with `g ∈ [-1,1]`, `z ∈ [0,1]`:
/// `aux >= -z`, `aux >= g + z - 1`, `aux <= z`, `aux <= g - z + 1`.
pub fn mccormick_envelope(g_var: usize, z_var: usize, aux_var: usize) -> [Row; 4] {
    let name = |tag: &str| format!("mc_{tag}_w{aux_var}");
    [
        Row {
            name: name("lo0"),
            lin: vec![(aux_var, 1.0), (z_var, 1.0)],
            quad: vec![],
            sense: Sense::Ge,
            rhs: 0.0,
        },
        Row {
            name: name("lo1"),
            lin: vec![(aux_var, 1.0), (g_var, -1.0), (z_var, -1.0)],
            quad: vec![],
            sense: Sense::Ge,
            rhs: -1.0,
        },
        Row {
            name: name("up0"),
            lin: vec![(aux_var, 1.0), (z_var, -1.0)],
            quad: vec![],
            sense: Sense::Le,
            rhs: 0.0,
        },
        Row {
            name: name("up1"),
            lin: vec![(aux_var, 1.0), (g_var, -1.0), (z_var, 1.0)],
            quad: vec![],
            sense: Sense::Le,
            rhs: 1.0,
        },
    ]
}

/// Feasible interval of the auxiliary given numeric `(g, z)`, read off the
/// same four half-planes.
pub fn mccormick_interval(g: f64, z: f64) -> (f64, f64) {
    let lo = (-z).max(g + z - 1.0);
    let hi = z.min(g - z + 1.0);
    (lo, hi)
}

impl CircuitModel {
    /// Generates every constraint row of the model: per-depth selection,
    /// product recursion (bilinear or linearized), McCormick envelopes in
    /// linearized variants, and instantiated symmetry cuts.
    ///
    /// The target rows use the first phase of the phase set; the phase
    /// disjunction is handled at the solver level.
    pub fn constraint_rows(&self) -> Vec<Row> {
        let lay = &self.layout;
        let (k_n, d_max, m) = (lay.n_gates, lay.max_depth, lay.emb_dim);
        let target = &self.targets[0];
        let linearized = self.variant.is_linearized();
        let mut rows = Vec::new();

        // Selection: one gate per depth.
        for d in 1..=d_max {
            rows.push(Row {
                name: format!("sel_{d}"),
                lin: (0..k_n).map(|k| (lay.z_index(k, d), 1.0)).collect(),
                quad: vec![],
                sense: Sense::Eq,
                rhs: 1.0,
            });
        }

        let emb = |k: usize| &self.catalog.inputs[k].embedding;

        // Depth-1 block: Ĝ_1 = G_0 · G(z_1), with G_0 the identity. Linear.
        // When D = 1 the recursion degenerates to G(z_1) = T directly.
        for i in 0..m {
            for j in 0..m {
                let mut lin = Vec::new();
                let mut rhs = 0.0;
                if d_max == 1 {
                    rhs = target.get(i, j);
                } else {
                    lin.push((lay.ghat_index(1, i, j), 1.0));
                }
                for k in 0..k_n {
                    let c = emb(k).get(i, j);
                    if c != 0.0 {
                        lin.push((lay.z_index(k, 1), if d_max == 1 { c } else { -c }));
                    }
                }
                rows.push(Row {
                    name: format!("prod_1_{i}_{j}"),
                    lin,
                    quad: vec![],
                    sense: Sense::Eq,
                    rhs,
                });
            }
        }

        // Depth d >= 2 blocks: Ĝ_d = Ĝ_{d-1} G(z_d) for d < D and
        // Ĝ_{D-1} G(z_D) = T at the last depth. Products Ĝ_{d-1}[i,l]·z_{k,d}
        // stay bilinear or become the auxiliaries.
        for d in 2..=d_max {
            let last = d == d_max;
            for i in 0..m {
                for j in 0..m {
                    let mut lin = Vec::new();
                    let mut quad = Vec::new();
                    let sign = if last { 1.0 } else { -1.0 };
                    let rhs = if last { target.get(i, j) } else { 0.0 };
                    if !last {
                        lin.push((lay.ghat_index(d, i, j), 1.0));
                    }
                    for k in 0..k_n {
                        let e = emb(k);
                        for l in 0..m {
                            let c = e.get(l, j);
                            if c == 0.0 {
                                continue;
                            }
                            if linearized {
                                lin.push((lay.aux_index(d, k, i, l), sign * c));
                            } else {
                                quad.push((
                                    lay.ghat_index(d - 1, i, l),
                                    lay.z_index(k, d),
                                    sign * c,
                                ));
                            }
                        }
                    }
                    rows.push(Row {
                        name: format!("prod_{d}_{i}_{j}"),
                        lin,
                        quad,
                        sense: Sense::Eq,
                        rhs,
                    });
                }
            }
        }

        // McCormick envelopes for every auxiliary in linearized variants.
        if linearized {
            for d in 2..=d_max {
                for k in 0..k_n {
                    for i in 0..m {
                        for l in 0..m {
                            rows.extend(mccormick_envelope(
                                lay.ghat_index(d - 1, i, l),
                                lay.z_index(k, d),
                                lay.aux_index(d, k, i, l),
                            ));
                        }
                    }
                }
            }
        }

        // Symmetry-breaking cuts at every window position.
        if d_max >= 4 {
            for (s_idx, sym) in self.symmetry.iter().enumerate() {
                for d in 1..=d_max - 3 {
                    rows.push(Row {
                        name: format!("sym_{s_idx}_{d}"),
                        lin: sym
                            .terms
                            .iter()
                            .map(|&(k, off)| (lay.z_index(k, d + off), 1.0))
                            .collect(),
                        quad: vec![],
                        sense: Sense::Le,
                        rhs: sym.bound as f64,
                    });
                }
            }
        }

        rows
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::gates::{build_input_set, parse_gate, target_lookup, Discretization, GateCatalog};

    pub(crate) fn catalog_from(names: &[&str], n: usize, target: &str) -> GateCatalog {
        let defs: Vec<_> = names.iter().map(|s| parse_gate(s).unwrap()).collect();
        let inputs = build_input_set(&defs, n, &Discretization::new()).unwrap();
        GateCatalog::new(inputs, target, target_lookup(target, n).unwrap()).unwrap()
    }

    fn reverse_cnot_model(variant: Variant) -> CircuitModel {
        let cat = catalog_from(&["H_1", "H_2", "CNOT_1_2", "Identity"], 2, "reverse_cnot");
        assemble(&cat, 5, variant, AssembleOptions::default()).unwrap()
    }

    #[test]
    fn reverse_cnot_variable_counts() {
        let model = reverse_cnot_model(Variant::Minlp);
        assert_eq!(model.layout.n_z(), 20);
        assert_eq!(model.layout.n_ghat(), 4 * 64);
        assert_eq!(model.layout.total(Variant::Minlp), 20 + 256);
        assert_eq!(
            model.layout.total(Variant::Milp),
            20 + 256 + 4 * 4 * 64
        );
    }

    #[test]
    fn layout_indices_are_a_bijection() {
        let model = reverse_cnot_model(Variant::Milp);
        let lay = &model.layout;
        let total = lay.total(Variant::Milp);
        let mut seen = vec![false; total];
        let m = lay.emb_dim;
        for d in 1..=5 {
            for k in 0..4 {
                seen[lay.z_index(k, d)] = true;
            }
        }
        for d in 1..5 {
            for i in 0..m {
                for j in 0..m {
                    seen[lay.ghat_index(d, i, j)] = true;
                }
            }
        }
        for d in 2..=5 {
            for k in 0..4 {
                for i in 0..m {
                    for l in 0..m {
                        seen[lay.aux_index(d, k, i, l)] = true;
                    }
                }
            }
        }
        assert!(seen.into_iter().all(|b| b));
    }

    #[test]
    fn depth_one_model_has_no_ghat() {
        let cat = catalog_from(&["H_1", "CNOT_1_2", "Identity"], 2, "hadamard");
        let model = assemble(&cat, 1, Variant::Minlp, AssembleOptions::default()).unwrap();
        assert_eq!(model.layout.n_ghat(), 0);
        // All product rows are linear: G(z_1) = T.
        for row in model.constraint_rows() {
            assert!(row.quad.is_empty());
        }
    }

    #[test]
    fn nlp_variant_has_no_binary_restriction() {
        let model = reverse_cnot_model(Variant::Nlp);
        assert!(!model.variant.is_binary());
        assert!(reverse_cnot_model(Variant::Minlp).variant.is_binary());
    }

    #[test]
    fn mccormick_collapse_at_binary_z() {
        // z = 1 pins aux to g; z = 0 pins aux to 0.
        let (lo, hi) = mccormick_interval(0.5, 1.0);
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 0.5).abs() < 1e-15);
        let (lo, hi) = mccormick_interval(-0.73, 0.0);
        assert_eq!((lo, hi), (0.0, 0.0));
    }

    #[test]
    fn mccormick_fractional_interval() {
        // z = 0.5, g = 0: intersecting the four half-planes by hand gives
        // [-0.5, 0.5].
        let (lo, hi) = mccormick_interval(0.0, 0.5);
        assert_eq!((lo, hi), (-0.5, 0.5));
    }

    #[test]
    fn mccormick_rows_match_interval() {
        // The numeric interval must agree with a generic evaluation of the
        // four emitted rows.
        let rows = mccormick_envelope(0, 1, 2);
        let eval = |g: f64, z: f64, w: f64| -> bool {
            rows.iter().all(|row| {
                let mut lhs = 0.0;
                for &(var, c) in &row.lin {
                    lhs += c * [g, z, w][var];
                }
                match row.sense {
                    Sense::Ge => lhs >= row.rhs - 1e-12,
                    Sense::Le => lhs <= row.rhs + 1e-12,
                    Sense::Eq => (lhs - row.rhs).abs() <= 1e-12,
                }
            })
        };
        let mut state = 0x2545f491u64;
        let mut uniform = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / ((1u64 << 31) as f64) - 1.0
        };
        for _ in 0..500 {
            let g = uniform();
            let z = (uniform() + 1.0) / 2.0;
            let (lo, hi) = mccormick_interval(g, z);
            assert!(eval(g, z, lo) && eval(g, z, hi));
            assert!(!eval(g, z, hi + 1e-6));
            assert!(!eval(g, z, lo - 1e-6));
        }
    }

    #[test]
    fn aux_count_two_ways() {
        // Layout formula versus an actual scan of generated rows.
        let model = reverse_cnot_model(Variant::Milp);
        let lay = &model.layout;
        let aux_lo = lay.n_z() + lay.n_ghat();
        let mut seen = std::collections::HashSet::new();
        for row in model.constraint_rows() {
            for &(v, _) in &row.lin {
                if v >= aux_lo {
                    seen.insert(v);
                }
            }
        }
        assert_eq!(seen.len(), lay.n_aux());
        assert_eq!(lay.n_aux(), 4 * 4 * 64);
    }

    #[test]
    fn bad_phase_rejected() {
        let cat = catalog_from(&["H_1", "CNOT_1_2", "Identity"], 2, "reverse_cnot");
        let opts = AssembleOptions {
            phase_set: vec![Phase { re: 0.5, im: 0.0 }],
            symmetry: true,
        };
        assert!(matches!(
            assemble(&cat, 3, Variant::Minlp, opts),
            Err(ModelError::BadPhase(_, _))
        ));
    }
}
