//! Global solver over the binary feasible set.
//!
//! The integral feasible set of the model is exactly the space of gate
//! sequences, so a layered uniform-cost search over cumulative products
//! certifies optimality without an LP engine: cost layers (number of
//! non-identity gates) are explored in nondecreasing order, states are
//! deduplicated by a quantized product key with the listed global phases
//! folded in, and extensions violating a symmetry window are discarded.
//! Identities never change a product, so layer `c` holds products of
//! exactly `c` non-identity gates and any solution is padded with trailing
//! identities up to the depth bound.
//!
//! When the frontier outgrows its cap the search degrades to iterative
//! deepening depth-first search with a bounded transposition table, which
//! preserves optimality certificates at bounded memory.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gates::ComplexMatrix;
use crate::model::{CircuitModel, Phase};

/// Verification tolerance for a solution product against the target.
pub const VERIFY_TOL: f64 = 1e-6;

/// Quantization step for deduplication keys.
pub const DEDUP_QUANTUM: f64 = 1e-6;

/// Search budget.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub time_limit_s: f64,
    pub node_limit: u64,
    /// States kept per frontier before degrading to depth-first search.
    pub max_frontier: usize,
    /// Quantization step for deduplication keys.
    pub dedup_quantum: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            time_limit_s: 300.0,
            node_limit: u64::MAX,
            max_frontier: 20_000_000,
            dedup_quantum: DEDUP_QUANTUM,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    BudgetExhausted,
}

/// A decomposition returned by a solver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    /// Gate index per depth `1..=D`; identities pushed to the tail.
    pub sequence: Vec<usize>,
    /// Non-identity gate count of `sequence`.
    pub objective: usize,
    pub matched_phase: Phase,
    pub max_error: f64,
    pub nodes_expanded: u64,
    pub wall_time_s: f64,
}

/// Solution serialization with gate names resolved, for the JSON interface.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionReport {
    pub status: SolveStatus,
    pub objective: Option<usize>,
    pub sequence: Vec<String>,
    pub matched_phase: String,
    pub max_error: f64,
    pub nodes_expanded: u64,
    pub wall_time_s: f64,
}

impl Solution {
    pub fn report(&self, model: &CircuitModel) -> SolutionReport {
        SolutionReport {
            status: self.status,
            objective: (self.status == SolveStatus::Optimal).then_some(self.objective),
            sequence: self
                .sequence
                .iter()
                .map(|&k| model.catalog.gate_name(k).to_string())
                .collect(),
            matched_phase: self.matched_phase.to_string(),
            max_error: self.max_error,
            nodes_expanded: self.nodes_expanded,
            wall_time_s: self.wall_time_s,
        }
    }
}

/// Verification outcome of [`verify_solution`].
#[derive(Clone, Debug)]
pub enum Verification {
    Ok { matched_phase: Phase, max_error: f64 },
    Mismatch { best_error: f64 },
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verification::Ok { .. })
    }
}

/// Multiplies the lifted matrices of `seq` in order and compares the
/// product against `phase * target` over the model's phase set.
pub fn verify_solution(seq: &[usize], model: &CircuitModel) -> Verification {
    let dim = model.catalog.dim();
    let mut product = ComplexMatrix::identity(dim);
    for &k in seq {
        product = product.matmul(&model.catalog.inputs[k].matrix);
    }
    verify_product(&product, model)
}

/// Same check for an already-computed product matrix.
pub fn verify_product(product: &ComplexMatrix, model: &CircuitModel) -> Verification {
    let mut best = f64::INFINITY;
    let mut best_phase = Phase::ONE;
    for phase in &model.phase_set {
        let err = product.max_abs_diff(&model.catalog.target.scale(phase.re, phase.im));
        if err < best {
            best = err;
            best_phase = *phase;
        }
    }
    if best <= VERIFY_TOL {
        Verification::Ok {
            matched_phase: best_phase,
            max_error: best,
        }
    } else {
        Verification::Mismatch { best_error: best }
    }
}

/// 128-bit FNV-1a over a byte stream; deterministic across runs.
#[derive(Clone, Copy)]
struct Fnv128(u128);

impl Fnv128 {
    const OFFSET: u128 = 0x6c62272e07bb014262b821756295c58d;
    const PRIME: u128 = 0x0000000001000000000000000000013b;

    fn new() -> Self {
        Fnv128(Self::OFFSET)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u128;
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }
}

/// Quantized, phase-canonical fingerprint of a product matrix. States equal
/// up to a listed phase (within the quantization step) share a key.
fn product_key(product: &ComplexMatrix, phases: &[Phase], quantum: f64) -> u128 {
    let len = product.re.len();
    let mut best: Option<Vec<i32>> = None;
    let mut scratch = Vec::with_capacity(2 * len);
    for phase in phases {
        scratch.clear();
        for idx in 0..len {
            let re = product.re[idx] * phase.re - product.im[idx] * phase.im;
            let im = product.re[idx] * phase.im + product.im[idx] * phase.re;
            scratch.push((re / quantum).round() as i32);
            scratch.push((im / quantum).round() as i32);
        }
        if best.as_ref().is_none_or(|b| scratch < *b) {
            best = Some(scratch.clone());
        }
    }
    let canon = best.unwrap();
    let mut h = Fnv128::new();
    for v in canon {
        h.write(&v.to_le_bytes());
    }
    h.0
}

/// Forbidden four-gate windows from the model's symmetry patterns,
/// flattened to `[g0, g1, g2, g3]`.
fn forbidden_windows(model: &CircuitModel) -> Vec<[usize; 4]> {
    model
        .symmetry
        .iter()
        .filter_map(|s| {
            if s.terms.len() != 4 {
                return None;
            }
            let mut w = [0usize; 4];
            for &(k, off) in &s.terms {
                if off > 3 {
                    return None;
                }
                w[off] = k;
            }
            Some(w)
        })
        .collect()
}

fn window_blocked(seq: &[usize], next: usize, windows: &[[usize; 4]]) -> bool {
    if windows.is_empty() || seq.len() < 3 {
        return false;
    }
    let n = seq.len();
    windows
        .iter()
        .any(|w| w[0] == seq[n - 3] && w[1] == seq[n - 2] && w[2] == seq[n - 1] && w[3] == next)
}

struct Node {
    product: ComplexMatrix,
    sequence: Vec<usize>,
}

/// Finds a minimum-cost sequence of length `<= D` whose product equals
/// `phase * target` for some listed phase, within [`VERIFY_TOL`].
///
/// Layers are explored in nondecreasing cost, so the first hit is optimal.
/// Ties break to the lexicographically smallest gate-index sequence.
pub fn solve_global(model: &CircuitModel, budget: Budget) -> Solution {
    let start = Instant::now();
    let identity_k = model.catalog.identity_index;
    let dim = model.catalog.dim();
    let windows = forbidden_windows(model);
    let non_identity: Vec<usize> =
        (0..model.n_gates()).filter(|&k| k != identity_k).collect();

    let finish = |status: SolveStatus,
                  seq: Vec<usize>,
                  phase: Phase,
                  err: f64,
                  nodes: u64,
                  elapsed: f64| {
        let mut sequence = seq;
        let objective = sequence.len();
        sequence.resize(model.max_depth, identity_k);
        Solution {
            status,
            sequence,
            objective,
            matched_phase: phase,
            max_error: err,
            nodes_expanded: nodes,
            wall_time_s: elapsed,
        }
    };

    // Cost 0: the empty circuit.
    let root = ComplexMatrix::identity(dim);
    if let Verification::Ok {
        matched_phase,
        max_error,
    } = verify_product(&root, model)
    {
        return finish(
            SolveStatus::Optimal,
            vec![],
            matched_phase,
            max_error,
            0,
            start.elapsed().as_secs_f64(),
        );
    }

    let mut visited: HashMap<u128, ()> = HashMap::new();
    visited.insert(product_key(&root, &model.phase_set, budget.dedup_quantum), ());
    let mut frontier = vec![Node {
        product: root,
        sequence: vec![],
    }];
    let mut nodes_expanded: u64 = 0;

    for cost in 1..=model.max_depth {
        // Expand in deterministic order: frontier order is insertion order,
        // children in ascending gate index; products computed in parallel,
        // dedup applied sequentially in that same order.
        let children: Vec<(usize, usize)> = frontier
            .iter()
            .enumerate()
            .flat_map(|(pi, _)| non_identity.iter().map(move |&k| (pi, k)))
            .filter(|&(pi, k)| !window_blocked(&frontier[pi].sequence, k, &windows))
            .collect();

        nodes_expanded += children.len() as u64;
        if nodes_expanded > budget.node_limit
            || start.elapsed().as_secs_f64() > budget.time_limit_s
        {
            return finish(
                SolveStatus::BudgetExhausted,
                vec![],
                Phase::ONE,
                f64::INFINITY,
                nodes_expanded,
                start.elapsed().as_secs_f64(),
            );
        }

        let produced: Vec<(ComplexMatrix, u128)> = children
            .par_iter()
            .map(|&(pi, k)| {
                let p = frontier[pi]
                    .product
                    .matmul(&model.catalog.inputs[k].matrix);
                let key = product_key(&p, &model.phase_set, budget.dedup_quantum);
                (p, key)
            })
            .collect();

        let mut next = Vec::new();
        for ((pi, k), (product, key)) in children.into_iter().zip(produced) {
            if visited.contains_key(&key) {
                continue;
            }
            visited.insert(key, ());
            let mut sequence = frontier[pi].sequence.clone();
            sequence.push(k);
            if let Verification::Ok {
                matched_phase,
                max_error,
            } = verify_product(&product, model)
            {
                return finish(
                    SolveStatus::Optimal,
                    sequence,
                    matched_phase,
                    max_error,
                    nodes_expanded,
                    start.elapsed().as_secs_f64(),
                );
            }
            // The last layer cannot be extended; keep memory flat.
            if cost < model.max_depth {
                next.push(Node { product, sequence });
            }
        }

        if next.len() > budget.max_frontier {
            return iddfs_fallback(model, budget, start, nodes_expanded);
        }
        if next.is_empty() && cost < model.max_depth {
            return finish(
                SolveStatus::Infeasible,
                vec![],
                Phase::ONE,
                f64::INFINITY,
                nodes_expanded,
                start.elapsed().as_secs_f64(),
            );
        }
        frontier = next;
    }

    finish(
        SolveStatus::Infeasible,
        vec![],
        Phase::ONE,
        f64::INFINITY,
        nodes_expanded,
        start.elapsed().as_secs_f64(),
    )
}

/// Iterative-deepening fallback once the frontier cap is hit: optimality is
/// certified by increasing the cost bound, memory is bounded by a capped
/// transposition table keyed on (product, depth remaining is implied by
/// cost so far).
fn iddfs_fallback(
    model: &CircuitModel,
    budget: Budget,
    start: Instant,
    mut nodes_expanded: u64,
) -> Solution {
    let identity_k = model.catalog.identity_index;
    let dim = model.catalog.dim();
    let windows = forbidden_windows(model);
    let non_identity: Vec<usize> =
        (0..model.n_gates()).filter(|&k| k != identity_k).collect();
    let table_cap = budget.max_frontier.max(1);

    struct Ctx<'a> {
        model: &'a CircuitModel,
        non_identity: &'a [usize],
        windows: &'a [[usize; 4]],
        table: HashMap<u128, u32>,
        table_cap: usize,
        nodes: u64,
        deadline: f64,
        start: Instant,
        node_limit: u64,
        dedup_quantum: f64,
    }

    enum Found {
        Hit(Vec<usize>, Phase, f64),
        Exhausted,
        None,
    }

    fn dfs(ctx: &mut Ctx, product: &ComplexMatrix, seq: &mut Vec<usize>, bound: usize) -> Found {
        if seq.len() == bound {
            return Found::None;
        }
        for &k in ctx.non_identity {
            if window_blocked(seq, k, ctx.windows) {
                continue;
            }
            ctx.nodes += 1;
            if ctx.nodes > ctx.node_limit
                || (ctx.nodes.is_multiple_of(4096)
                    && ctx.start.elapsed().as_secs_f64() > ctx.deadline)
            {
                return Found::Exhausted;
            }
            let next = product.matmul(&ctx.model.catalog.inputs[k].matrix);
            seq.push(k);
            if seq.len() == bound {
                if let Verification::Ok {
                    matched_phase,
                    max_error,
                } = verify_product(&next, ctx.model)
                {
                    return Found::Hit(seq.clone(), matched_phase, max_error);
                }
            } else {
                let key = product_key(&next, &ctx.model.phase_set, ctx.dedup_quantum);
                let depth = seq.len() as u32;
                let skip = match ctx.table.get(&key) {
                    Some(&seen_depth) => seen_depth <= depth,
                    None => false,
                };
                if !skip {
                    if ctx.table.len() < ctx.table_cap {
                        ctx.table.insert(key, depth);
                    }
                    match dfs(ctx, &next, seq, bound) {
                        Found::None => {}
                        other => return other,
                    }
                }
            }
            seq.pop();
        }
        Found::None
    }

    for bound in 1..=model.max_depth {
        let mut ctx = Ctx {
            model,
            non_identity: &non_identity,
            windows: &windows,
            table: HashMap::new(),
            table_cap,
            nodes: nodes_expanded,
            deadline: budget.time_limit_s,
            start,
            node_limit: budget.node_limit,
            dedup_quantum: budget.dedup_quantum,
        };
        let mut seq = Vec::new();
        let root = ComplexMatrix::identity(dim);
        let outcome = dfs(&mut ctx, &root, &mut seq, bound);
        nodes_expanded = ctx.nodes;
        let elapsed = start.elapsed().as_secs_f64();
        match outcome {
            Found::Hit(found, phase, err) => {
                let objective = found.len();
                let mut sequence = found;
                sequence.resize(model.max_depth, identity_k);
                return Solution {
                    status: SolveStatus::Optimal,
                    sequence,
                    objective,
                    matched_phase: phase,
                    max_error: err,
                    nodes_expanded,
                    wall_time_s: elapsed,
                };
            }
            Found::Exhausted => {
                return Solution {
                    status: SolveStatus::BudgetExhausted,
                    sequence: vec![identity_k; model.max_depth],
                    objective: 0,
                    matched_phase: Phase::ONE,
                    max_error: f64::INFINITY,
                    nodes_expanded,
                    wall_time_s: elapsed,
                };
            }
            Found::None => {}
        }
    }

    Solution {
        status: SolveStatus::Infeasible,
        sequence: vec![],
        objective: 0,
        matched_phase: Phase::ONE,
        max_error: f64::INFINITY,
        nodes_expanded,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Exhaustive enumeration over all `K^D` sequences, identities included,
/// with no deduplication or pruning. Independent optimality oracle.
///
/// Returns the minimum non-identity count of any verifying sequence, or
/// `None` when no sequence verifies. Refuses when `K^D > 10^6`.
pub fn enumerate_bruteforce(model: &CircuitModel, max_cost: usize) -> Result<Option<usize>, String> {
    let k_n = model.n_gates() as u128;
    let d = model.max_depth as u32;
    if k_n.pow(d) > 1_000_000 {
        return Err(format!(
            "brute force refused: K^D = {}^{} exceeds 10^6",
            model.n_gates(),
            d
        ));
    }
    let dim = model.catalog.dim();
    let identity_k = model.catalog.identity_index;
    let mut best: Option<usize> = None;

    // Depth-first over all sequences, maintaining prefix products.
    fn rec(
        model: &CircuitModel,
        prefix: &ComplexMatrix,
        depth_left: usize,
        cost: usize,
        max_cost: usize,
        best: &mut Option<usize>,
        identity_k: usize,
    ) {
        if let Verification::Ok { .. } = verify_product(prefix, model) {
            if best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
        }
        if depth_left == 0 {
            return;
        }
        for k in 0..model.n_gates() {
            let add = usize::from(k != identity_k);
            if cost + add > max_cost {
                continue;
            }
            let next = prefix.matmul(&model.catalog.inputs[k].matrix);
            rec(model, &next, depth_left - 1, cost + add, max_cost, best, identity_k);
        }
    }

    rec(
        model,
        &ComplexMatrix::identity(dim),
        model.max_depth,
        0,
        max_cost,
        &mut best,
        identity_k,
    );
    Ok(best)
}
