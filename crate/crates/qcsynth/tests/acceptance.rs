//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Expected optima are the benchmark-table values; every tolerance is
//! pinned here. The extended-tier reproduction lives in
//! `acceptance_extended.rs` (ignored by default, run nightly).
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcsynth::bench::{builtin_suite, find_case, Tier};
use qcsynth::exact::{enumerate_bruteforce, solve_global, Budget, SolveStatus};
use qcsynth::gates::{
    build_input_set, parse_gate, random::random_unitary, ComplexMatrix, Discretization,
    GateCatalog,
};
use qcsynth::model::{assemble, AssembleOptions, CircuitModel, Sense, Variant};
use qcsynth::nlp::{
    integrality_gap, lagrangian_gradient, lagrangian_value, multistart, round_and_verify,
    LocalStatus, NlpOptions, NlpState,
};

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "[{}] {}: {}",
        if ok { "PASS" } else { "FAIL" },
        criterion,
        detail
    );
}

fn required_cases() -> Vec<(String, CircuitModel, usize)> {
    builtin_suite()
        .into_iter()
        .filter(|c| c.tier == Tier::Required)
        .map(|c| {
            let model = c.model(Variant::Minlp);
            (c.name.to_string(), model, c.expected_optimal_depth)
        })
        .collect()
}

/// Criterion 1: the exact solver reproduces the required-tier optimal
/// depths, with product verification at 1e-6, within 300 s per case.
#[test]
fn criterion_1_required_tier_optimal_depths() {
    let expected: &[(&str, usize)] = &[
        ("reverse_cnot", 3),
        ("magic", 3),
        ("toffoli", 5),
        ("cnot_13", 8),
        ("controlled_v", 6),
        ("grover_diffusion", 6),
        ("fredkin", 7),
        ("hadamard", 1),
        ("s_gate", 1),
        ("controlled_h", 5),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for &(name, want) in expected {
        let case = find_case(name).expect("builtin case");
        let model = case.model(Variant::Minlp);
        let sol = solve_global(
            &model,
            Budget {
                time_limit_s: 300.0,
                ..Budget::default()
            },
        );
        let good = sol.status == SolveStatus::Optimal
            && sol.objective == want
            && sol.max_error <= 1e-6;
        ok &= good;
        details.push(format!(
            "{name}={} ({:.1}s{})",
            sol.objective,
            sol.wall_time_s,
            if good { "" } else { " MISMATCH" }
        ));
    }
    report(
        "criterion 1 (required-tier optimal depths)",
        ok,
        &details.join(", "),
    );
    assert!(ok, "{details:?}");
}

/// Criterion 3: exact solver equals the brute-force oracle on every
/// required-tier instance with K^D <= 10^6 plus 20 randomized toys.
#[test]
fn criterion_3_oracle_equivalence() {
    let mut ok = true;
    let mut checked = 0;
    let mut details = Vec::new();

    for (name, model, _) in required_cases() {
        let kd = (model.n_gates() as f64).powi(model.max_depth as i32);
        if kd > 1e6 {
            continue;
        }
        let oracle = enumerate_bruteforce(&model, model.max_depth).expect("within guard");
        let sol = solve_global(&model, Budget::default());
        let solver = (sol.status == SolveStatus::Optimal).then_some(sol.objective);
        if oracle != solver {
            ok = false;
            details.push(format!("{name}: oracle {oracle:?} vs solver {solver:?}"));
        }
        checked += 1;
    }

    // Randomized toys: N = 2, K <= 4, D <= 5 from a small gate pool.
    let pool = [
        "H_1", "H_2", "T_1", "T_2", "S_1", "S_2", "X_1", "Z_2", "CNOT_1_2", "CNOT_2_1",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    for toy in 0..20 {
        let mut names: Vec<&str> = Vec::new();
        while names.len() < 3 {
            let cand = pool[rng.random_range(0..pool.len())];
            if !names.contains(&cand) {
                names.push(cand);
            }
        }
        let defs: Vec<_> = names.iter().map(|s| parse_gate(s).unwrap()).collect();
        let inputs = build_input_set(&defs, 2, &Discretization::new()).unwrap();
        let depth = rng.random_range(2..=5usize);
        // Half the toys get a reachable product target, half get a random
        // unitary (almost surely unreachable).
        let target = if toy % 2 == 0 {
            let mut t = ComplexMatrix::identity(4);
            for _ in 0..rng.random_range(1..=depth) {
                let pick = rng.random_range(0..inputs.len());
                t = t.matmul(&inputs[pick].1);
            }
            t
        } else {
            random_unitary(4, 50_000 + toy as u64)
        };
        let cat = GateCatalog::new(inputs, format!("toy_{toy}"), target).unwrap();
        let model = assemble(&cat, depth, Variant::Minlp, AssembleOptions::default()).unwrap();
        assert!(model.n_gates() <= 4);
        let oracle = enumerate_bruteforce(&model, depth).expect("within guard");
        let sol = solve_global(&model, Budget::default());
        let solver = (sol.status == SolveStatus::Optimal).then_some(sol.objective);
        if oracle != solver {
            ok = false;
            details.push(format!("toy_{toy}: oracle {oracle:?} vs solver {solver:?}"));
        }
        checked += 1;
    }

    report(
        "criterion 3 (oracle equivalence)",
        ok,
        &format!("{checked} instances compared{}", if ok { "" } else { ": " }),
    );
    assert!(ok, "{details:?}");
}

/// Criterion 4: the continuous relaxation's feasible local solutions are
/// integral and (modulo logged findings at strictly larger depth) optimal,
/// on four required cases with 100 multi-starts at seed 0.
#[test]
fn criterion_4_nlp_integrality_and_optimality() {
    let mut ok = true;
    let mut details = Vec::new();
    for name in ["reverse_cnot", "magic", "toffoli", "controlled_v"] {
        let case = find_case(name).expect("builtin case");
        let exact = solve_global(&case.model(Variant::Minlp), Budget::default());
        assert_eq!(exact.status, SolveStatus::Optimal);
        let model = case.model(Variant::Nlp);
        let outcome = multistart(&model, 100, 0, &NlpOptions::default());

        let feasible: Vec<_> = outcome
            .stats
            .iter()
            .filter(|s| s.status == LocalStatus::Feasible)
            .collect();
        // (a) at least one feasible start.
        let a = !feasible.is_empty();
        // (b) every feasible result is near-integral and rounds to a
        // verifying sequence; (c) rounded objectives match the exact
        // optimum, or verify at strictly larger depth (logged as findings).
        let mut b = true;
        let mut c = true;
        let mut findings = 0;
        let mut optimal_hits = 0;
        // Re-run the feasible seeds individually to get full results for
        // rounding (stats only carry summaries).
        for stat in &feasible {
            let start = qcsynth::nlp::StartSample::generate(&model, stat.seed);
            let r = qcsynth::nlp::solve_local(&start, &model, &NlpOptions::default());
            assert_eq!(r.status, LocalStatus::Feasible);
            if r.integrality_gap > 1e-2 {
                b = false;
                details.push(format!("{name} seed {}: gap {}", stat.seed, r.integrality_gap));
                continue;
            }
            match round_and_verify(&r, &model) {
                Ok(sol) => {
                    if sol.objective == exact.objective {
                        optimal_hits += 1;
                    } else if sol.objective > exact.objective {
                        findings += 1;
                        println!(
                            "FINDING: {name} seed {} feasible at objective {} (> optimum {})",
                            stat.seed, sol.objective, exact.objective
                        );
                    } else {
                        c = false;
                        details.push(format!(
                            "{name} seed {}: rounded {} beats exact {}",
                            stat.seed, sol.objective, exact.objective
                        ));
                    }
                }
                Err(rej) => {
                    b = false;
                    details.push(format!("{name} seed {}: {rej}", stat.seed));
                }
            }
        }
        // Suboptimal feasible points are the permitted exception, not the
        // rule: the optimum must actually be reached by some start.
        let best_matches = outcome
            .best
            .as_ref()
            .map(|bst| round_and_verify(bst, &model).map(|s| s.objective == exact.objective))
            .transpose()
            .ok()
            .flatten()
            .unwrap_or(false);
        ok &= a && b && c && best_matches;
        details.push(format!(
            "{name}: {}/100 feasible, {} optimal, {} findings",
            feasible.len(),
            optimal_hits,
            findings
        ));
    }
    report(
        "criterion 4 (NLP integrality & optimality)",
        ok,
        &details.join("; "),
    );
    assert!(ok, "{details:?}");
}

/// Criterion 5: analytic gradient vs central differences (h = 1e-6),
/// relative error <= 1e-6, 20 random states on each of 3 models.
#[test]
fn criterion_5_gradient_correctness() {
    let models = [
        find_case("reverse_cnot").unwrap().model(Variant::Nlp),
        find_case("magic").unwrap().model(Variant::Nlp),
        find_case("hadamard").unwrap().model(Variant::Nlp),
    ];
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for model in &models {
        let k = model.n_gates();
        let d = model.max_depth;
        let mm = model.layout.emb_dim * model.layout.emb_dim;
        for _ in 0..20 {
            let z: Vec<f64> = (0..k * d).map(|_| rng.random_range(0.0..1.0)).collect();
            let ghat: Vec<f64> = (0..(d - 1) * mm).map(|_| rng.random_range(-1.0..1.0)).collect();
            let multipliers: Vec<f64> = (0..d * mm).map(|_| rng.random_range(-1.0..1.0)).collect();
            let state = NlpState {
                z,
                ghat,
                multipliers,
                rho: 10.0,
                phase_index: 0,
                outer_iterations: 0,
                inner_iterations: 0,
            };
            let grad = lagrangian_gradient(&state, model);
            // Probe a spread of coordinates rather than all of them.
            let n = grad.len();
            for probe in [0, 1, n / 3, n / 2, 2 * n / 3, n - 1] {
                let mut plus = state.clone();
                let mut minus = state.clone();
                let n_z = k * d;
                if probe < n_z {
                    plus.z[probe] += h;
                    minus.z[probe] -= h;
                } else {
                    plus.ghat[probe - n_z] += h;
                    minus.ghat[probe - n_z] -= h;
                }
                let fd =
                    (lagrangian_value(&plus, model) - lagrangian_value(&minus, model)) / (2.0 * h);
                let rel = (grad[probe] - fd).abs() / fd.abs().max(1.0);
                worst = worst.max(rel);
            }
        }
    }
    let ok = worst <= 1e-6;
    report(
        "criterion 5 (gradient vs finite differences)",
        ok,
        &format!("worst relative error {worst:.2e}"),
    );
    assert!(ok);
}

/// Criterion 6: the McCormick envelope collapses to {g·z} at binary z,
/// 1000 random samples, 1e-12.
#[test]
fn criterion_6_mccormick_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let g: f64 = rng.random_range(-1.0..1.0);
        let z = f64::from(rng.random_range(0..=1u32));
        let (lo, hi) = qcsynth::model::mccormick_interval(g, z);
        worst = worst.max((lo - g * z).abs()).max((hi - g * z).abs());
    }
    let ok = worst <= 1e-12;
    report(
        "criterion 6 (McCormick exactness at binary z)",
        ok,
        &format!("max interval deviation {worst:.2e}"),
    );
    assert!(ok);
}

/// Criterion 7: embedding homomorphism on 100 random unitary pairs.
#[test]
fn criterion_7_embedding_homomorphism() {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let a = random_unitary(8, 9000 + 2 * i);
        let b = random_unitary(8, 9001 + 2 * i);
        let lhs = a.matmul(&b).embed_real();
        let rhs = a.embed_real().matmul(&b.embed_real());
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    let ok = worst <= 1e-10;
    report(
        "criterion 7 (embedding homomorphism)",
        ok,
        &format!("max deviation {worst:.2e} over 100 pairs"),
    );
    assert!(ok);
}

/// Criterion 8: symmetry cuts never change the required-tier optima.
#[test]
fn criterion_8_symmetry_safety() {
    let mut ok = true;
    let mut details = Vec::new();
    for case in builtin_suite().into_iter().filter(|c| c.tier == Tier::Required) {
        let catalog = case.spec.catalog().unwrap();
        let on = assemble(
            &catalog,
            case.spec.max_depth,
            Variant::Minlp,
            AssembleOptions {
                symmetry: true,
                ..AssembleOptions::default()
            },
        )
        .unwrap();
        let off = assemble(
            &catalog,
            case.spec.max_depth,
            Variant::Minlp,
            AssembleOptions {
                symmetry: false,
                ..AssembleOptions::default()
            },
        )
        .unwrap();
        let budget = Budget {
            time_limit_s: 600.0,
            ..Budget::default()
        };
        let sol_on = solve_global(&on, budget);
        let sol_off = solve_global(&off, budget);
        let good = sol_on.status == sol_off.status && sol_on.objective == sol_off.objective;
        ok &= good;
        details.push(format!(
            "{} on={} off={} cuts={}",
            case.name,
            sol_on.objective,
            sol_off.objective,
            on.symmetry.len()
        ));
    }
    report("criterion 8 (symmetry-cut safety)", ok, &details.join(", "));
    assert!(ok, "{details:?}");
}

/// Criterion 9: the Reverse-CNOT layout counts, by formula and by scanning
/// generated constraint rows.
#[test]
fn criterion_9_model_structure_counts() {
    let model = find_case("reverse_cnot").unwrap().model(Variant::Minlp);
    let lay = &model.layout;
    let formula_z = lay.n_z();
    let formula_ghat = lay.n_ghat();

    // Independent path: scan the rows of the linearized variant and count
    // distinct variable indices per class.
    let milp = find_case("reverse_cnot").unwrap().model(Variant::Milp);
    let mut z_seen = std::collections::HashSet::new();
    let mut ghat_seen = std::collections::HashSet::new();
    let n_z = milp.layout.n_z();
    let n_ghat = milp.layout.n_ghat();
    for row in milp.constraint_rows() {
        for &(v, _) in &row.lin {
            if v < n_z {
                z_seen.insert(v);
            } else if v < n_z + n_ghat {
                ghat_seen.insert(v);
            }
        }
        let _ = row.sense == Sense::Eq;
    }
    let ok = formula_z == 20
        && formula_ghat == 256
        && z_seen.len() == 20
        && ghat_seen.len() == 256;
    report(
        "criterion 9 (model structure counts)",
        ok,
        &format!(
            "z: formula {formula_z} / scan {}, ghat: formula {formula_ghat} / scan {}",
            z_seen.len(),
            ghat_seen.len()
        ),
    );
    assert!(ok);
}

/// Criterion 10: multistart determinism at a fixed seed.
#[test]
fn criterion_10_multistart_determinism() {
    let model = find_case("reverse_cnot").unwrap().model(Variant::Nlp);
    let opts = NlpOptions::default();
    let a = multistart(&model, 40, 7, &opts);
    let b = multistart(&model, 40, 7, &opts);
    let mut ok = a.stats.len() == b.stats.len();
    for (sa, sb) in a.stats.iter().zip(&b.stats) {
        ok &= sa.seed == sb.seed
            && sa.status == sb.status
            && sa.objective == sb.objective
            && sa.residual_inf == sb.residual_inf
            && sa.integrality_gap == sb.integrality_gap;
    }
    report(
        "criterion 10 (multistart determinism)",
        ok,
        &format!("{} starts compared twice", a.stats.len()),
    );
    assert!(ok);

    // Feasibility soundness rider: every feasible stat re-checks within
    // 1.1x the tolerance through the independent residual path.
    let feas_tol = NlpOptions::default().feas_tol;
    for stat in a.stats.iter().filter(|s| s.status == LocalStatus::Feasible) {
        let start = qcsynth::nlp::StartSample::generate(&model, stat.seed);
        let r = qcsynth::nlp::solve_local(&start, &model, &opts);
        let res = qcsynth::nlp::residuals(&r.state, &model);
        let inf = res.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(inf <= 1.1 * feas_tol, "seed {}: residual {inf}", stat.seed);
        assert!((integrality_gap(&r.state.z) - r.integrality_gap).abs() < 1e-12);
    }
}
