//! Multi-start local solver for the continuous relaxation.
//!
//! The binary selectors are relaxed to per-depth unit simplices and the
//! bilinear recursion is kept as-is; an augmented Lagrangian
//! `L(x) = f(z) + λᵀc(x) + (ρ/2)‖c(x)‖²` is minimized by projected
//! gradient with Armijo backtracking, with multiplier and penalty updates
//! between inner solves. Converged feasible points are checked for
//! integrality and rounded to an exact, verified gate sequence.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::{verify_solution, Solution, SolveStatus, Verification};
use crate::model::CircuitModel;

/// Hyperparameters of the augmented-Lagrangian loop.
#[derive(Clone, Copy, Debug)]
pub struct NlpOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Feasibility tolerance on `‖c‖∞`.
    pub feas_tol: f64,
    /// Projected-gradient norm tolerance at termination.
    pub pg_tol: f64,
    pub initial_rho: f64,
    /// Penalty growth factor applied when `‖c‖∞` fails to shrink by 4x.
    pub rho_growth: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    /// Penalty ceiling; exceeding it reports divergence.
    pub rho_max: f64,
    /// Which phase of the model's phase set the equality targets.
    pub phase_index: usize,
    /// Seed-derived fresh-start retries inside one local solve when an
    /// attempt ends infeasible.
    pub internal_restarts: usize,
    /// Wall-clock limit for one `multistart` call (shared across starts)
    /// or one direct `solve_local` call. Runs cut off by the limit report
    /// their current status.
    pub time_limit_s: f64,
    /// Distribute starts round-robin over the model's phase set, realizing
    /// the solve-per-phase disjunction for targets that only match at a
    /// non-identity global phase.
    pub phase_sweep: bool,
}

impl Default for NlpOptions {
    fn default() -> Self {
        NlpOptions {
            max_outer: 50,
            max_inner: 500,
            feas_tol: 1e-6,
            pg_tol: 1e-6,
            initial_rho: 10.0,
            rho_growth: 10.0,
            armijo_c: 1e-4,
            rho_max: 1e12,
            phase_index: 0,
            internal_restarts: 24,
            time_limit_s: f64::INFINITY,
            phase_sweep: false,
        }
    }
}

/// A continuous iterate: relaxed selectors on per-depth simplices,
/// cumulative-product entries in `[-1, 1]`, multipliers and penalty.
#[derive(Clone, Debug)]
pub struct NlpState {
    pub z: Vec<f64>,
    pub ghat: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub rho: f64,
    pub phase_index: usize,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

/// A random initial point: a vertex of each depth simplex for `z`, uniform
/// `[-1, 1]` entries for the cumulative products.
#[derive(Clone, Debug)]
pub struct StartSample {
    pub z0: Vec<f64>,
    pub ghat0: Vec<f64>,
    pub seed: u64,
}

impl StartSample {
    /// Draws the start for `seed`: one gate per depth uniformly at random
    /// (no feasibility bias beyond the selection constraint itself) and
    /// uniform cumulative-product entries.
    pub fn generate(model: &CircuitModel, seed: u64) -> StartSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k_n, d_max) = (model.n_gates(), model.max_depth);
        let mut z0 = vec![0.0; k_n * d_max];
        for d in 0..d_max {
            let pick = rng.random_range(0..k_n);
            z0[d * k_n + pick] = 1.0;
        }
        let n_ghat = model.layout.n_ghat();
        let ghat0 = (0..n_ghat).map(|_| rng.random_range(-1.0..1.0)).collect();
        StartSample { z0, ghat0, seed }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalStatus {
    Feasible,
    Stalled,
    Diverged,
}

/// Outcome of one local solve.
#[derive(Clone, Debug)]
pub struct LocalResult {
    pub status: LocalStatus,
    /// Continuous objective `f(z)` at the final point.
    pub objective: f64,
    pub residual_inf: f64,
    pub integrality_gap: f64,
    pub state: NlpState,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub seed: u64,
}

struct Dims {
    k: usize,
    d: usize,
    m: usize,
}

fn dims(model: &CircuitModel) -> Dims {
    Dims {
        k: model.n_gates(),
        d: model.max_depth,
        m: model.layout.emb_dim,
    }
}

/// `G(z_d) = Σ_k z_{k,d} E_k` into `out`.
fn gate_mix(model: &CircuitModel, z: &[f64], depth: usize, out: &mut [f64]) {
    let Dims { k, m, .. } = dims(model);
    out.fill(0.0);
    let base = (depth - 1) * k;
    for (ki, entry) in model.catalog.inputs.iter().enumerate() {
        let w = z[base + ki];
        if w == 0.0 {
            continue;
        }
        for (o, &e) in out.iter_mut().zip(entry.embedding.mat.iter()) {
            *o += w * e;
        }
    }
    let _ = m;
}

fn matmul_into(a: &[f64], b: &[f64], m: usize, out: &mut [f64]) {
    out.fill(0.0);
    for i in 0..m {
        for l in 0..m {
            let v = a[i * m + l];
            if v == 0.0 {
                continue;
            }
            let row = l * m;
            let orow = i * m;
            for j in 0..m {
                out[orow + j] += v * b[row + j];
            }
        }
    }
}

/// All scalar violations of the product recursion, blocks `d = 1..=D`:
/// `Ĝ_1 − G(z_1)`, `Ĝ_d − Ĝ_{d−1}·G(z_d)`, and `Ĝ_{D−1}·G(z_D) − T`.
/// For `D = 1` the single block is `G(z_1) − T`.
pub fn residuals(state: &NlpState, model: &CircuitModel) -> Vec<f64> {
    let Dims { d, m, .. } = dims(model);
    let mut out = vec![0.0; d * m * m];
    residuals_into(model, &state.z, &state.ghat, state.phase_index, &mut out);
    out
}

fn residuals_into(model: &CircuitModel, z: &[f64], ghat: &[f64], phase: usize, out: &mut [f64]) {
    let Dims { d, m, .. } = dims(model);
    let mm = m * m;
    let target = &model.targets[phase].mat;
    let mut gz = vec![0.0; mm];
    let mut prod = vec![0.0; mm];

    if d == 1 {
        gate_mix(model, z, 1, &mut gz);
        for idx in 0..mm {
            out[idx] = gz[idx] - target[idx];
        }
        return;
    }

    // Block 1: Ĝ_1 = G_0 · G(z_1) with G_0 = I.
    gate_mix(model, z, 1, &mut gz);
    for idx in 0..mm {
        out[idx] = ghat[idx] - gz[idx];
    }
    // Blocks 2..=D-1: Ĝ_d = Ĝ_{d-1} G(z_d).
    for depth in 2..d {
        gate_mix(model, z, depth, &mut gz);
        let prev = &ghat[(depth - 2) * mm..(depth - 1) * mm];
        matmul_into(prev, &gz, m, &mut prod);
        let blk = &mut out[(depth - 1) * mm..depth * mm];
        let cur = &ghat[(depth - 1) * mm..depth * mm];
        for idx in 0..mm {
            blk[idx] = cur[idx] - prod[idx];
        }
    }
    // Block D: Ĝ_{D-1} G(z_D) = T.
    gate_mix(model, z, d, &mut gz);
    let prev = &ghat[(d - 2) * mm..(d - 1) * mm];
    matmul_into(prev, &gz, m, &mut prod);
    let blk = &mut out[(d - 1) * mm..d * mm];
    for idx in 0..mm {
        blk[idx] = prod[idx] - target[idx];
    }
}

/// The objective `f(z)`: total non-identity selection weight.
pub fn objective_value(model: &CircuitModel, z: &[f64]) -> f64 {
    let Dims { k, d, .. } = dims(model);
    let mut f = 0.0;
    for depth in 0..d {
        for ki in 0..k {
            f += model.obj_coeff(ki) * z[depth * k + ki];
        }
    }
    f
}

/// Augmented Lagrangian value at `(z, ghat)` under the state's multipliers
/// and penalty.
pub fn lagrangian_value(state: &NlpState, model: &CircuitModel) -> f64 {
    let c = residuals(state, model);
    let mut val = objective_value(model, &state.z);
    for (ci, li) in c.iter().zip(&state.multipliers) {
        val += li * ci + 0.5 * state.rho * ci * ci;
    }
    val
}

/// Analytic gradient of the augmented Lagrangian with respect to all `z`
/// and `Ĝ` variables, concatenated `(z, ghat)`.
pub fn lagrangian_gradient(state: &NlpState, model: &CircuitModel) -> Vec<f64> {
    let Dims { k, d, m } = dims(model);
    let mm = m * m;
    let mut grad = vec![0.0; k * d + (d - 1) * mm];
    let mut c = vec![0.0; d * mm];
    residuals_into(model, &state.z, &state.ghat, state.phase_index, &mut c);

    // Adjoint weights W_d = λ_d + ρ c_d per block.
    let mut w = c;
    for (wi, li) in w.iter_mut().zip(&state.multipliers) {
        *wi = li + state.rho * *wi;
    }

    // Objective part.
    for depth in 0..d {
        for ki in 0..k {
            grad[depth * k + ki] = model.obj_coeff(ki);
        }
    }

    let frob = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    if d == 1 {
        // Single block G(z_1) - T: ∂/∂z_{k,1} = +E_k.
        let w1 = &w[0..mm];
        for (ki, entry) in model.catalog.inputs.iter().enumerate() {
            grad[ki] += frob(w1, &entry.embedding.mat);
        }
        return grad;
    }

    let mut gz = vec![0.0; mm];
    let mut scratch = vec![0.0; mm];

    // z gradients.
    // Block 1 is linear: ∂r_1/∂z_{k,1} = -E_k.
    let w1 = &w[0..mm];
    for (ki, entry) in model.catalog.inputs.iter().enumerate() {
        grad[ki] -= frob(w1, &entry.embedding.mat);
    }
    // Blocks d >= 2: ∂r_d/∂z_{k,d} = ∓ Ĝ_{d-1} E_k, so the z gradient is
    // ∓ <Ĝ_{d-1}ᵀ W_d, E_k>.
    for depth in 2..=d {
        let sign = if depth == d { 1.0 } else { -1.0 };
        let wd = &w[(depth - 1) * mm..depth * mm];
        let prev = &state.ghat[(depth - 2) * mm..(depth - 1) * mm];
        // scratch = Ĝ_{d-1}ᵀ W_d.
        scratch.fill(0.0);
        for i in 0..m {
            for l in 0..m {
                let v = prev[i * m + l];
                if v == 0.0 {
                    continue;
                }
                let wrow = i * m;
                let orow = l * m;
                for j in 0..m {
                    scratch[orow + j] += v * wd[wrow + j];
                }
            }
        }
        for ki in 0..k {
            grad[(depth - 1) * k + ki] +=
                sign * frob(&scratch, &model.catalog.inputs[ki].embedding.mat);
        }
    }

    // ghat gradients.
    for depth in 1..d {
        let gslice = k * d + (depth - 1) * mm;
        // Own block: +W_d (blocks 1..=D-1 contain Ĝ_d with coefficient +1).
        let wd = &w[(depth - 1) * mm..depth * mm];
        for idx in 0..mm {
            grad[gslice + idx] += wd[idx];
        }
        // Next block uses Ĝ_d as the left factor with sign -1 for interior
        // blocks and +1 for the final target block.
        let nxt = depth + 1;
        let sign = if nxt == d { 1.0 } else { -1.0 };
        let wn = &w[(nxt - 1) * mm..nxt * mm];
        gate_mix(model, &state.z, nxt, &mut gz);
        // contribution = sign * W_{d+1} · G(z_{d+1})ᵀ.
        for i in 0..m {
            for l in 0..m {
                let mut acc = 0.0;
                let wrow = i * m;
                let grow = l * m;
                for j in 0..m {
                    acc += wn[wrow + j] * gz[grow + j];
                }
                grad[gslice + i * m + l] += sign * acc;
            }
        }
    }

    grad
}

/// Euclidean projection of a vector onto the unit simplex
/// (sort-and-threshold).
pub fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j as f64 + 1.0);
        if u - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
    let _ = n;
}

/// Projects the state onto its feasible box: each depth's `z` block onto
/// the unit simplex, `Ĝ` entries clipped to `[-1, 1]`.
pub fn project(state: &NlpState, model: &CircuitModel) -> NlpState {
    let mut out = state.clone();
    project_vars(model, &mut out.z, &mut out.ghat);
    out
}

fn project_vars(model: &CircuitModel, z: &mut [f64], ghat: &mut [f64]) {
    let Dims { k, d, .. } = dims(model);
    for depth in 0..d {
        project_simplex(&mut z[depth * k..(depth + 1) * k]);
    }
    for g in ghat.iter_mut() {
        *g = g.clamp(-1.0, 1.0);
    }
}

/// Max over entries of `min(z, 1 - z)`: zero exactly for binary points.
pub fn integrality_gap(z: &[f64]) -> f64 {
    z.iter().map(|&v| v.min(1.0 - v)).fold(0.0, f64::max)
}

/// Runs one augmented-Lagrangian local solve from the given start.
///
/// When an attempt ends infeasible (stalled or diverged), the solve redraws
/// a fresh start from the same distribution — deterministically derived
/// from the start's seed — up to `opts.internal_restarts` times, playing
/// the role of the internal multi-warmstart strategies of commercial local
/// solvers.
pub fn solve_local(start: &StartSample, model: &CircuitModel, opts: &NlpOptions) -> LocalResult {
    let deadline = Instant::now()
        + std::time::Duration::from_secs_f64(opts.time_limit_s.clamp(0.0, 1e9));
    solve_local_until(start, model, opts, deadline)
}

fn solve_local_until(
    start: &StartSample,
    model: &CircuitModel,
    opts: &NlpOptions,
    deadline: Instant,
) -> LocalResult {
    let t0 = Instant::now();
    let mut result = attempt(&start.z0, &start.ghat0, model, opts, deadline);
    let mut attempts = 1;
    while result.status != LocalStatus::Feasible
        && attempts <= opts.internal_restarts
        && Instant::now() < deadline
    {
        let redraw = StartSample::generate(
            model,
            start.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(attempts as u64)),
        );
        let next = attempt(&redraw.z0, &redraw.ghat0, model, opts, deadline);
        let keep_next = next.status == LocalStatus::Feasible
            || next.residual_inf < result.residual_inf;
        let prev_iters = result.iterations;
        let prev_inner = result.state.inner_iterations;
        if keep_next {
            result = next;
            result.iterations += prev_iters;
            result.state.inner_iterations += prev_inner;
        } else {
            result.iterations += next.iterations;
            result.state.inner_iterations += next.state.inner_iterations;
        }
        attempts += 1;
    }
    result.seed = start.seed;
    result.wall_time_s = t0.elapsed().as_secs_f64();
    result
}

/// One augmented-Lagrangian run from a fixed initial point.
fn attempt(
    z0: &[f64],
    ghat0: &[f64],
    model: &CircuitModel,
    opts: &NlpOptions,
    deadline: Instant,
) -> LocalResult {
    let t0 = Instant::now();
    let Dims { k, d, m } = dims(model);
    let mm = m * m;
    let n_z = k * d;
    let n_g = (d - 1) * mm;
    let n_c = d * mm;

    let mut z = z0.to_vec();
    let mut ghat = ghat0.to_vec();
    project_vars(model, &mut z, &mut ghat);
    let mut lambda = vec![0.0; n_c];
    let mut rho = opts.initial_rho;
    let mut inner_total = 0usize;

    let mut c = vec![0.0; n_c];
    let mut prev_cnorm = f64::INFINITY;
    let mut status = LocalStatus::Stalled;
    let mut outer_done = 0;
    let mut last_pg_norm = f64::INFINITY;

    let eval = |z: &[f64], ghat: &[f64], lambda: &[f64], rho: f64, c: &mut [f64]| -> f64 {
        residuals_into(model, z, ghat, opts.phase_index, c);
        let mut val = objective_value(model, z);
        for (ci, li) in c.iter().zip(lambda) {
            val += li * ci + 0.5 * rho * ci * ci;
        }
        val
    };

    // Warm-up block pass: settle the cumulative-product variables against
    // the frozen start selection before the joint minimization, so the
    // randomly drawn Ĝ entries do not drag the selection off its vertex
    // in the first outer iteration.
    {
        let mut val = eval(&z, &ghat, &lambda, rho, &mut c);
        let mut step = 1.0 / rho.max(1.0);
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        for _ in 0..opts.max_inner {
            inner_total += 1;
            let state_view = NlpState {
                z: z.clone(),
                ghat: ghat.clone(),
                multipliers: lambda.clone(),
                rho,
                phase_index: opts.phase_index,
                outer_iterations: 0,
                inner_iterations: inner_total,
            };
            let grad = lagrangian_gradient(&state_view, model);
            let ggrad = &grad[n_z..];
            let mut gt = ghat.clone();
            for i in 0..n_g {
                gt[i] = (gt[i] - ggrad[i]).clamp(-1.0, 1.0);
            }
            let pg = ghat
                .iter()
                .zip(&gt)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if pg <= opts.pg_tol {
                break;
            }
            if let Some((pghat, pgrad)) = &prev {
                let mut sty = 0.0;
                let mut sts = 0.0;
                for i in 0..n_g {
                    let s = ghat[i] - pghat[i];
                    let y = ggrad[i] - pgrad[i];
                    sty += s * y;
                    sts += s * s;
                }
                step = if sty > 1e-14 * sts {
                    (sts / sty).clamp(1e-10, 1e6)
                } else {
                    1e6
                };
            }
            prev = Some((ghat.clone(), ggrad.to_vec()));

            let mut dir = vec![0.0; n_g];
            let mut dir_dot = 0.0;
            for i in 0..n_g {
                dir[i] = (ghat[i] - step * ggrad[i]).clamp(-1.0, 1.0) - ghat[i];
                dir_dot += ggrad[i] * dir[i];
            }
            if dir_dot >= 0.0 {
                break;
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let mut g_new = ghat.clone();
                for i in 0..n_g {
                    g_new[i] += t * dir[i];
                }
                let val_new = eval(&z, &g_new, &lambda, rho, &mut c);
                if val_new <= val + opts.armijo_c * t * dir_dot {
                    ghat = g_new;
                    val = val_new;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }

    // Nonmonotone reference window for the spectral projected-gradient
    // inner solves.
    const NONMONOTONE_WINDOW: usize = 10;

    for outer in 0..opts.max_outer {
        outer_done = outer + 1;
        if Instant::now() >= deadline {
            break;
        }
        // Inner subproblems are solved to the terminal tolerance; the
        // multiplier update then cancels the objective-induced drift off
        // the feasible manifold within an outer step or two.
        let inner_tol = opts.pg_tol;

        let mut step = 1.0 / rho.max(1.0);
        let mut val = eval(&z, &ghat, &lambda, rho, &mut c);
        let mut recent = vec![val];
        let mut prev_x: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;

        for _ in 0..opts.max_inner {
            inner_total += 1;
            let state_view = NlpState {
                z: z.clone(),
                ghat: ghat.clone(),
                multipliers: lambda.clone(),
                rho,
                phase_index: opts.phase_index,
                outer_iterations: outer,
                inner_iterations: inner_total,
            };
            let grad = lagrangian_gradient(&state_view, model);

            // Projected-gradient residual at unit step.
            let mut zt = z.clone();
            let mut gt = ghat.clone();
            for i in 0..n_z {
                zt[i] -= grad[i];
            }
            for i in 0..n_g {
                gt[i] -= grad[n_z + i];
            }
            project_vars(model, &mut zt, &mut gt);
            let mut pg_norm = 0.0f64;
            for i in 0..n_z {
                pg_norm = pg_norm.max((z[i] - zt[i]).abs());
            }
            for i in 0..n_g {
                pg_norm = pg_norm.max((ghat[i] - gt[i]).abs());
            }
            last_pg_norm = pg_norm;
            if pg_norm <= inner_tol {
                break;
            }

            // Spectral (Barzilai-Borwein) step as the trial length.
            if let Some((pz, pg, pgrad)) = &prev_x {
                let mut sty = 0.0;
                let mut sts = 0.0;
                for i in 0..n_z {
                    let s = z[i] - pz[i];
                    let y = grad[i] - pgrad[i];
                    sty += s * y;
                    sts += s * s;
                }
                for i in 0..n_g {
                    let s = ghat[i] - pg[i];
                    let y = grad[n_z + i] - pgrad[n_z + i];
                    sty += s * y;
                    sts += s * s;
                }
                step = if sty > 1e-14 * sts {
                    (sts / sty).clamp(1e-10, 1e6)
                } else {
                    1e6
                };
            }
            prev_x = Some((z.clone(), ghat.clone(), grad.clone()));

            // Projected direction at the spectral step, then nonmonotone
            // backtracking along it.
            let mut z_dir = z.clone();
            let mut g_dir = ghat.clone();
            for i in 0..n_z {
                z_dir[i] -= step * grad[i];
            }
            for i in 0..n_g {
                g_dir[i] -= step * grad[n_z + i];
            }
            project_vars(model, &mut z_dir, &mut g_dir);
            for i in 0..n_z {
                z_dir[i] -= z[i];
            }
            for i in 0..n_g {
                g_dir[i] -= ghat[i];
            }
            let mut dir_dot = 0.0;
            for i in 0..n_z {
                dir_dot += grad[i] * z_dir[i];
            }
            for i in 0..n_g {
                dir_dot += grad[n_z + i] * g_dir[i];
            }
            if dir_dot >= 0.0 {
                break;
            }
            let f_ref = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);

            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let mut z_new = z.clone();
                let mut g_new = ghat.clone();
                for i in 0..n_z {
                    z_new[i] += t * z_dir[i];
                }
                for i in 0..n_g {
                    g_new[i] += t * g_dir[i];
                }
                let val_new = eval(&z_new, &g_new, &lambda, rho, &mut c);
                if val_new <= f_ref + opts.armijo_c * t * dir_dot {
                    z = z_new;
                    ghat = g_new;
                    val = val_new;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
            recent.push(val);
            if recent.len() > NONMONOTONE_WINDOW {
                recent.remove(0);
            }
        }

        residuals_into(model, &z, &ghat, opts.phase_index, &mut c);
        let cnorm = c.iter().fold(0.0f64, |a, &v| a.max(v.abs()));

        if cnorm <= opts.feas_tol && last_pg_norm <= opts.pg_tol {
            status = LocalStatus::Feasible;
            break;
        }

        // Multiplier update, then penalty growth if infeasibility stalls.
        for (li, &ci) in lambda.iter_mut().zip(c.iter()) {
            *li += rho * ci;
        }
        if cnorm > prev_cnorm / 4.0 {
            rho *= opts.rho_growth;
        }
        prev_cnorm = cnorm;
        if rho > opts.rho_max {
            status = LocalStatus::Diverged;
            break;
        }
    }

    residuals_into(model, &z, &ghat, opts.phase_index, &mut c);
    let residual_inf = c.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let gap = integrality_gap(&z);
    let objective = objective_value(model, &z);
    LocalResult {
        status,
        objective,
        residual_inf,
        integrality_gap: gap,
        state: NlpState {
            z,
            ghat,
            multipliers: lambda,
            rho,
            phase_index: opts.phase_index,
            outer_iterations: outer_done,
            inner_iterations: inner_total,
        },
        iterations: outer_done,
        wall_time_s: t0.elapsed().as_secs_f64(),
        seed: 0,
    }
}

/// Per-start statistics for the CSV interface.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StartStat {
    pub seed: u64,
    pub status: LocalStatus,
    pub objective: f64,
    pub residual_inf: f64,
    pub integrality_gap: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug)]
pub struct MultistartOutcome {
    /// Feasible result of minimum objective (ties by wall time, then seed).
    pub best: Option<LocalResult>,
    pub stats: Vec<StartStat>,
}

impl MultistartOutcome {
    pub fn stats_csv(&self) -> String {
        let mut out =
            String::from("seed,status,objective,residual_inf,integrality_gap,iterations,wall_time_s\n");
        for s in &self.stats {
            out.push_str(&format!(
                "{},{:?},{},{},{},{},{:.6}\n",
                s.seed,
                s.status,
                s.objective,
                s.residual_inf,
                s.integrality_gap,
                s.iterations,
                s.wall_time_s
            ));
        }
        out
    }
}

/// Runs `n_starts` independent local solves with seeds
/// `base_seed..base_seed + n_starts`, concurrently. Aggregation is a
/// deterministic reduce over (objective, wall time, seed).
pub fn multistart(
    model: &CircuitModel,
    n_starts: usize,
    base_seed: u64,
    opts: &NlpOptions,
) -> MultistartOutcome {
    assert!(n_starts >= 1);
    // One shared wall-clock budget across all starts.
    let deadline = Instant::now()
        + std::time::Duration::from_secs_f64(opts.time_limit_s.clamp(0.0, 1e9));
    let n_phases = model.phase_set.len();
    let results: Vec<LocalResult> = (0..n_starts)
        .into_par_iter()
        .map(|i| {
            let start = StartSample::generate(model, base_seed + i as u64);
            let mut start_opts = *opts;
            if opts.phase_sweep && n_phases > 1 {
                // Half the starts keep the default phase; the rest share
                // the remaining phases evenly.
                start_opts.phase_index = if i % 2 == 0 {
                    opts.phase_index
                } else {
                    let alt = (i / 2) % (n_phases - 1) + 1;
                    (opts.phase_index + alt) % n_phases
                };
            }
            solve_local_until(&start, model, &start_opts, deadline)
        })
        .collect();

    let stats = results
        .iter()
        .map(|r| StartStat {
            seed: r.seed,
            status: r.status,
            objective: r.objective,
            residual_inf: r.residual_inf,
            integrality_gap: r.integrality_gap,
            iterations: r.iterations,
            wall_time_s: r.wall_time_s,
        })
        .collect();

    let best = results
        .into_iter()
        .filter(|r| r.status == LocalStatus::Feasible)
        .min_by(|a, b| {
            (a.objective, a.wall_time_s, a.seed)
                .partial_cmp(&(b.objective, b.wall_time_s, b.seed))
                .unwrap()
        });

    MultistartOutcome { best, stats }
}

/// Why a feasible local result could not be turned into an exact solution.
#[derive(Clone, Debug, thiserror::Error)]
pub enum Rejection {
    #[error("integrality gap {0:.4} exceeds 1e-2")]
    Fractional(f64),
    #[error("rounded sequence fails verification (max error {0:.3e})")]
    VerifyFailed(f64),
    #[error("result is not feasible")]
    NotFeasible,
}

/// Rounds each depth block to its argmax vertex and verifies the resulting
/// sequence exactly. Rejects fractional points (gap > 1e-2) before
/// rounding.
pub fn round_and_verify(result: &LocalResult, model: &CircuitModel) -> Result<Solution, Rejection> {
    if result.status != LocalStatus::Feasible {
        return Err(Rejection::NotFeasible);
    }
    if result.integrality_gap > 1e-2 {
        return Err(Rejection::Fractional(result.integrality_gap));
    }
    let k = model.n_gates();
    let seq: Vec<usize> = (0..model.max_depth)
        .map(|depth| {
            let block = &result.state.z[depth * k..(depth + 1) * k];
            block
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap()
        })
        .collect();
    match verify_solution(&seq, model) {
        Verification::Ok {
            matched_phase,
            max_error,
        } => Ok(Solution {
            status: SolveStatus::Optimal,
            objective: model.sequence_cost(&seq),
            sequence: seq,
            matched_phase,
            max_error,
            nodes_expanded: 0,
            wall_time_s: result.wall_time_s,
        }),
        Verification::Mismatch { best_error } => Err(Rejection::VerifyFailed(best_error)),
    }
}
