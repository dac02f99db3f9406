//! Command-line front end: parse decomposition specs, dispatch solvers,
//! export models, run benchmarks, print circuit diagrams.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{builtin_suite, find_case, run_suite, SolverSet, Tier};
use crate::exact::{solve_global, Budget, Solution, SolveStatus};
use crate::gates::GateKind;
use crate::model::{assemble, export_model, CircuitModel, Variant};
use crate::nlp::{multistart, round_and_verify, NlpOptions};
use crate::spec::{DecompositionSpec, PhaseSpec};

/// Exit codes: 0 success, 1 usage error, 2 infeasible, 3 budget exhausted.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "qcsynth",
    about = "Minimum-depth quantum circuit synthesis via exact search and NLP relaxation"
)]
pub struct CliArgs {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Subcommand, Debug)]
pub enum CommandArgs {
    /// Decompose a target gate into native gates.
    Decompose(DecomposeArgs),
    /// Export the optimization model in LP text format.
    Export(ExportArgs),
    /// Run the built-in benchmark suite.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Path to a decomposition spec JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub spec: Option<PathBuf>,
    /// Name of a built-in benchmark case (e.g. reverse_cnot, toffoli).
    #[arg(long)]
    pub builtin: Option<String>,
    /// Override the model variant.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Disable symmetry-breaking constraints.
    #[arg(long)]
    pub no_symmetry: bool,
    /// Override the phase set, e.g. "1,-1,i,-i" or "1".
    #[arg(long)]
    pub phase_set: Option<String>,
    /// Merge angle grids into the spec, as JSON:
    /// '{"U3": {"theta": [0, "pi/4"], "phi": [0], "lambda": [0, "pi"]}}'.
    #[arg(long)]
    pub discretization: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Which solver(s) to run.
    #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
    pub solver: SolverArg,
    /// Multi-start count for the NLP solver.
    #[arg(long, default_value_t = 100)]
    pub starts: usize,
    /// Base random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time budget per solver in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub budget_s: f64,
    /// Write the solution JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-start NLP statistics CSV here.
    #[arg(long)]
    pub stats_csv: Option<PathBuf>,
    /// Print the resolved spec JSON and exit.
    #[arg(long)]
    pub dump_spec: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ExportArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Output path for the LP file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Which tier to run.
    #[arg(long, value_enum, default_value_t = TierArg::Required)]
    pub tier: TierArg,
    /// Which solver(s) to run.
    #[arg(long, value_enum, default_value_t = SolverArg::Both)]
    pub solver: SolverArg,
    /// Time budget per case in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub budget_s: f64,
    /// Base random seed for the NLP starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multi-start count per case.
    #[arg(long, default_value_t = 100)]
    pub starts: usize,
    /// Write the report CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the report JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Exact,
    Nlp,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Minlp,
    Milp,
    Nlp,
    Lp,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Minlp => Variant::Minlp,
            VariantArg::Milp => Variant::Milp,
            VariantArg::Nlp => Variant::Nlp,
            VariantArg::Lp => Variant::Lp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Required,
    Extended,
    All,
}

/// Resolved decompose invocation.
#[derive(Debug)]
pub struct DecomposeRun {
    pub spec: DecompositionSpec,
    pub solver: SolverArg,
    pub starts: usize,
    pub seed: u64,
    pub budget_s: f64,
    pub out: Option<PathBuf>,
    pub stats_csv: Option<PathBuf>,
    pub dump_spec: bool,
}

/// Fully resolved run configuration.
#[derive(Debug)]
pub enum RunConfig {
    Decompose(DecomposeRun),
    Export {
        spec: DecompositionSpec,
        out: PathBuf,
    },
    Bench {
        tier: TierArg,
        solver: SolverArg,
        budget_s: f64,
        seed: u64,
        starts: usize,
        csv: Option<PathBuf>,
        json: Option<PathBuf>,
    },
}

fn resolve_spec(problem: &ProblemArgs) -> Result<DecompositionSpec, String> {
    let mut spec = match (&problem.spec, &problem.builtin) {
        (Some(path), None) => DecompositionSpec::from_file(path)
            .map_err(|e| format!("{}: {e}", path.display()))?,
        (None, Some(name)) => match find_case(name) {
            Some(case) => case.spec,
            None => {
                let names: Vec<&str> = builtin_suite().iter().map(|c| c.name).collect();
                return Err(format!(
                    "unknown builtin `{name}`; available: {}",
                    names.join(", ")
                ));
            }
        },
        _ => return Err("exactly one of --spec or --builtin is required".to_string()),
    };
    if let Some(v) = problem.variant {
        spec.variant = v.into();
    }
    if problem.no_symmetry {
        spec.symmetry = false;
    }
    if let Some(ps) = &problem.phase_set {
        let phases: Vec<PhaseSpec> = ps
            .split(',')
            .map(|tok| PhaseSpec::Symbol(tok.trim().to_string()))
            .collect();
        spec.phase_set = Some(phases);
    }
    if let Some(disc) = &problem.discretization {
        merge_discretization(&mut spec, disc)?;
    }
    Ok(spec)
}

/// Parses `{"U3": {"theta": [0, "pi/4"], ...}}` with numeric or
/// `pi`-fraction angle tokens and merges it into the spec.
fn merge_discretization(spec: &mut DecompositionSpec, text: &str) -> Result<(), String> {
    use serde_json::Value;
    let raw: std::collections::HashMap<String, std::collections::HashMap<String, Vec<Value>>> =
        serde_json::from_str(text).map_err(|e| format!("bad --discretization: {e}"))?;
    let angle = |v: &Value| -> Result<f64, String> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| "bad angle".to_string()),
            Value::String(s) => crate::gates::parse_angle(s),
            other => Err(format!("bad angle `{other}`")),
        }
    };
    for (gate, grids) in raw {
        let mut grid = crate::gates::AngleGrid::default();
        for (key, vals) in grids {
            let parsed: Result<Vec<f64>, String> = vals.iter().map(angle).collect();
            let parsed = parsed.map_err(|e| format!("bad --discretization: {e}"))?;
            match key.as_str() {
                "theta" => grid.theta = parsed,
                "phi" => grid.phi = parsed,
                "lambda" => grid.lambda = parsed,
                other => return Err(format!("unknown angle key `{other}`")),
            }
        }
        spec.discretization.insert(gate, grid);
    }
    Ok(())
}

/// Builds the resolved configuration from parsed arguments.
pub fn resolve(args: CliArgs) -> Result<RunConfig, String> {
    Ok(match args.command {
        CommandArgs::Decompose(a) => RunConfig::Decompose(DecomposeRun {
            spec: resolve_spec(&a.problem)?,
            solver: a.solver,
            starts: a.starts,
            seed: a.seed,
            budget_s: a.budget_s,
            out: a.out,
            stats_csv: a.stats_csv,
            dump_spec: a.dump_spec,
        }),
        CommandArgs::Export(a) => RunConfig::Export {
            spec: resolve_spec(&a.problem)?,
            out: a.out,
        },
        CommandArgs::Bench(a) => RunConfig::Bench {
            tier: a.tier,
            solver: a.solver,
            budget_s: a.budget_s,
            seed: a.seed,
            starts: a.starts,
            csv: a.csv,
            json: a.json,
        },
    })
}

fn build_model(spec: &DecompositionSpec) -> Result<CircuitModel, String> {
    let catalog = spec.catalog().map_err(|e| e.to_string())?;
    let opts = spec.assemble_options().map_err(|e| e.to_string())?;
    assemble(&catalog, spec.max_depth, spec.variant, opts).map_err(|e| e.to_string())
}

/// Renders the solution as an ASCII circuit, depth columns left to right.
/// Identities are drawn as plain wire.
pub fn render_circuit(model: &CircuitModel, solution: &Solution) -> String {
    let n = model.n_qubits();
    let mut columns: Vec<Vec<String>> = Vec::new();
    for &k in &solution.sequence {
        let mut col = vec![String::new(); n];
        match &model.catalog.inputs[k].def.kind {
            GateKind::Identity => {}
            GateKind::Column(atoms) => {
                for a in atoms {
                    let label = match &a.gate {
                        crate::gates::AtomGate::Const(g) => g.name().to_string(),
                        crate::gates::AtomGate::Param { gate, angles, .. } => match angles {
                            Some(vals) => format!(
                                "{}({})",
                                gate.name(),
                                vals.iter()
                                    .map(|v| crate::gates::fmt_angle(*v))
                                    .collect::<Vec<_>>()
                                    .join(",")
                            ),
                            None => gate.name().to_string(),
                        },
                    };
                    col[a.qubit - 1] = label;
                }
            }
            GateKind::Controlled {
                base,
                control,
                target,
            } => {
                col[control - 1] = "*".to_string();
                let label = match base {
                    crate::gates::ControlledBase::X => "X",
                    crate::gates::ControlledBase::Z => "Z",
                    crate::gates::ControlledBase::H => "H",
                    crate::gates::ControlledBase::V => "V",
                    crate::gates::ControlledBase::Vdagger => "V'",
                    crate::gates::ControlledBase::S => "S",
                    crate::gates::ControlledBase::Sdagger => "S'",
                };
                col[target - 1] = label.to_string();
                let (lo, hi) = (*control.min(target), *control.max(target));
                for q in lo + 1..hi {
                    col[q - 1] = "|".to_string();
                }
            }
        }
        columns.push(col);
    }

    let widths: Vec<usize> = columns
        .iter()
        .map(|col| col.iter().map(|s| s.len()).max().unwrap_or(0).max(1))
        .collect();
    let mut out = String::new();
    for q in 0..n {
        out.push_str(&format!("q{}: -", q + 1));
        for (col, w) in columns.iter().zip(&widths) {
            let cell = &col[q];
            if cell.is_empty() {
                out.push_str(&"-".repeat(w + 2));
            } else {
                let pad = w - cell.len();
                let left = pad / 2;
                out.push('-');
                out.push_str(&"-".repeat(left));
                out.push_str(cell);
                out.push_str(&"-".repeat(pad - left));
                out.push('-');
            }
        }
        out.push_str("-\n");
    }
    out
}

fn exit_code_for(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::BudgetExhausted => EXIT_BUDGET,
    }
}

fn run_decompose(run: DecomposeRun) -> i32 {
    let DecomposeRun {
        spec,
        solver,
        starts,
        seed,
        budget_s,
        out,
        stats_csv,
        dump_spec,
    } = run;
    if dump_spec {
        println!("{}", spec.to_json());
        return EXIT_OK;
    }
    let model = match build_model(&spec) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    println!(
        "target {} on {} qubits, {} input gates, max depth {}",
        model.catalog.target_name,
        model.n_qubits(),
        model.n_gates(),
        model.max_depth
    );

    let mut exit = EXIT_OK;
    let mut exact_obj: Option<usize> = None;
    let mut solution_to_write: Option<Solution> = None;

    if matches!(solver, SolverArg::Exact | SolverArg::Both) {
        let sol = solve_global(
            &model,
            Budget {
                time_limit_s: budget_s,
                ..Budget::default()
            },
        );
        match sol.status {
            SolveStatus::Optimal => {
                println!(
                    "exact: objective {} (phase {}, max error {:.2e}, {} nodes, {:.3}s)",
                    sol.objective,
                    sol.matched_phase,
                    sol.max_error,
                    sol.nodes_expanded,
                    sol.wall_time_s
                );
                print!("{}", render_circuit(&model, &sol));
                exact_obj = Some(sol.objective);
            }
            SolveStatus::Infeasible => {
                println!("exact: infeasible within depth {}", model.max_depth);
            }
            SolveStatus::BudgetExhausted => {
                println!("exact: budget exhausted after {:.1}s", sol.wall_time_s);
            }
        }
        exit = exit.max(exit_code_for(sol.status));
        solution_to_write = Some(sol);
    }

    if matches!(solver, SolverArg::Nlp | SolverArg::Both) {
        let opts = NlpOptions {
            time_limit_s: budget_s,
            phase_sweep: model.phase_set.len() > 1,
            ..NlpOptions::default()
        };
        let outcome = multistart(&model, starts, seed, &opts);
        let feasible = outcome
            .stats
            .iter()
            .filter(|s| s.status == crate::nlp::LocalStatus::Feasible)
            .count();
        match &outcome.best {
            Some(best) => match round_and_verify(best, &model) {
                Ok(sol) => {
                    println!(
                        "nlp: objective {} ({} of {} starts feasible, best start {:.3}s, seed {})",
                        sol.objective, feasible, starts, best.wall_time_s, best.seed
                    );
                    print!("{}", render_circuit(&model, &sol));
                    if let Some(e) = exact_obj {
                        if e == sol.objective {
                            println!("match: NLP reproduced the exact optimum ({e})");
                        } else {
                            println!("MISMATCH: exact {} vs nlp {}", e, sol.objective);
                        }
                    }
                    if solution_to_write.is_none() {
                        solution_to_write = Some(sol);
                    }
                }
                Err(rej) => {
                    println!("nlp: best feasible point rejected: {rej}");
                    exit = exit.max(EXIT_INFEASIBLE);
                }
            },
            None => {
                println!("nlp: no feasible start out of {starts}");
                exit = exit.max(EXIT_INFEASIBLE);
            }
        }
        if let Some(path) = &stats_csv {
            if let Err(e) = std::fs::write(path, outcome.stats_csv()) {
                eprintln!("error writing {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
    }

    if let (Some(path), Some(sol)) = (&out, &solution_to_write) {
        let report = sol.report(&model);
        match serde_json::to_string_pretty(&report) {
            Ok(text) => {
                if let Err(e) = std::fs::write(path, text) {
                    eprintln!("error writing {}: {e}", path.display());
                    return EXIT_USAGE;
                }
            }
            Err(e) => {
                eprintln!("error serializing solution: {e}");
                return EXIT_USAGE;
            }
        }
    }
    exit
}

fn run_bench(
    tier: TierArg,
    solver: SolverArg,
    budget_s: f64,
    seed: u64,
    starts: usize,
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
) -> i32 {
    let cases: Vec<_> = builtin_suite()
        .into_iter()
        .filter(|c| match tier {
            TierArg::Required => c.tier == Tier::Required,
            TierArg::Extended => c.tier == Tier::Extended,
            TierArg::All => true,
        })
        .collect();
    let solver_set = match solver {
        SolverArg::Exact => SolverSet::Exact,
        SolverArg::Nlp => SolverSet::Nlp,
        SolverArg::Both => SolverSet::Both,
    };
    println!("running {} cases (budget {:.0}s each)", cases.len(), budget_s);
    let report = run_suite(&cases, solver_set, budget_s, seed, starts);
    for r in &report.results {
        let exact = r
            .exact
            .as_ref()
            .map(|e| match e.objective {
                Some(o) => format!("exact {o} in {:.2}s", e.time_s),
                None => format!("exact {:?} in {:.2}s", e.status, e.time_s),
            })
            .unwrap_or_default();
        let nlp = r
            .nlp
            .as_ref()
            .map(|nl| match nl.best_objective {
                Some(o) => format!(
                    ", nlp {o} ({}/{} feasible, best {:.2}s)",
                    nl.feasible_starts, nl.n_starts, nl.best_time_s
                ),
                None => format!(", nlp no feasible start of {}", nl.n_starts),
            })
            .unwrap_or_default();
        println!(
            "  {:18} expected {:2}: {}{}{}",
            r.name,
            r.expected_optimal_depth,
            exact,
            nlp,
            if r.matched { "  [match]" } else { "  [MISMATCH]" }
        );
    }
    if let Some(s) = report.aggregates.mean_speedup {
        println!("mean exact/nlp speed-up: {s:.1}x");
    }
    if let Some(path) = &csv {
        if let Err(e) = std::fs::write(path, report.to_csv()) {
            eprintln!("error writing {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    if let Some(path) = &json {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error writing {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    if report.results.iter().all(|r| r.matched) {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

/// Executes a resolved configuration, returning the process exit code.
pub fn run(config: RunConfig) -> i32 {
    match config {
        RunConfig::Decompose(run) => run_decompose(run),
        RunConfig::Export { spec, out } => {
            let model = match build_model(&spec) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            };
            match export_model(&model, &out) {
                Ok(()) => {
                    println!(
                        "wrote {} model ({} variables) to {}",
                        model.variant.name(),
                        model.layout.total(model.variant),
                        out.display()
                    );
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_USAGE
                }
            }
        }
        RunConfig::Bench {
            tier,
            solver,
            budget_s,
            seed,
            starts,
            csv,
            json,
        } => run_bench(tier, solver, budget_s, seed, starts, csv, json),
    }
}

/// Parses argv and runs; the binary's whole main.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match CliArgs::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            // clap handles --help/--version with success exit codes.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match resolve(args) {
        Ok(config) => run(config),
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}
