use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alloc_game::removal::{expect_general, expect_series, expect_three_closed, expect_two_box_with, pmf_table, pmf_truncated};
use alloc_game::reproduce::{reproduce, CheckKind, Report, ReproduceOptions, Target};
use alloc_game::scan::{fmt_sig, scan_cutoffs, scan_ternary, write_cutoffs_csv, write_ternary_csv, ScanMode, DEFAULT_RESOLUTION};
use alloc_game::simulate::{estimate_expectation, simulate_margin, simulate_race};
use alloc_game::solver::{build_matrix, certificate_gap, solve_zero_sum};
use alloc_game::strategy::{enumerate_compositions, enumerate_monotone, enumerate_respecting_ties};
use alloc_game::{Engine, GameConfig, GameError, PayoffMatrix, ProbVector, Regime, SimResult, Strategy, Tolerance};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const EXIT_COMPARISON: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ENGINE: u8 = 3;

/// Exact and simulated analysis of the counter-removal allocation game.
///
/// Probabilities are comma lists (`0.7,0.2,0.1`) or the presets `dice`,
/// `zipf:K` and `uniform:K`. Strategies are comma lists such as `2,1,0`.
/// Results go to stdout as JSON; `--out FILE.csv` writes the table instead.
#[derive(Parser, Debug)]
#[command(name = "alloc-game", version)]
struct Cli {
    /// Write tabular output to this CSV file.
    #[arg(long, global = true, value_name = "FILE.csv")]
    out: Option<PathBuf>,

    /// Seed for every Monte Carlo run.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Monte Carlo trials (each command has its own default).
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Relative series tolerance for hypergeometric evaluations.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expected excess throws of one allocation.
    Expect {
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        probs: ProbVector,
        #[arg(long, value_enum, default_value_t = ExpectEngine::Integral)]
        engine: ExpectEngine,
    },
    /// Distribution of the excess throws.
    Pmf {
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        probs: ProbVector,
        /// Last excess to tabulate; by default the table runs until the
        /// remaining mass is below 1e-12.
        #[arg(long)]
        max_r: Option<u64>,
    },
    /// Win, draw and loss probabilities of one pairing.
    Payoff {
        #[arg(long)]
        row: Strategy,
        #[arg(long)]
        col: Strategy,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Payoff matrix over a strategy set.
    Matrix {
        #[command(flatten)]
        set: SetArgs,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Minimax solution of a game given as a matrix file or a strategy set.
    Solve {
        /// Matrix CSV as written by `matrix --out`.
        #[arg(long, conflicts_with_all = ["n", "k", "strategies", "probs"])]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        set: SetArgs,
        #[command(flatten)]
        game: OptionalGameArgs,
    },
    /// Two-box cutoff probabilities for every quota up to `n_max`.
    Cutoffs {
        #[arg(long, default_value_t = 9)]
        n_max: u32,
    },
    /// Best strategy or minimax solution over the ordered three-box triangle.
    Scan {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "expectation")]
        mode: ScanMode,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: u32,
    },
    /// Seeded simulation of one player's removal or of a race.
    Simulate {
        /// Simulate the removal time of this allocation alone.
        #[arg(long, conflicts_with_all = ["row", "col"])]
        strategy: Option<Strategy>,
        #[arg(long, requires = "col")]
        row: Option<Strategy>,
        #[arg(long, requires = "row")]
        col: Option<Strategy>,
        #[arg(long)]
        probs: ProbVector,
        #[arg(long)]
        col_probs: Option<ProbVector>,
        #[arg(long, default_value = "common")]
        regime: Regime,
        /// Report the margin of victory instead of the payoff.
        #[arg(long, requires = "row")]
        margin: bool,
    },
    /// Recompute a reference table and compare it with the published values.
    Reproduce {
        target: Target,
    },
}

#[derive(Args, Debug)]
struct GameArgs {
    #[arg(long)]
    probs: ProbVector,
    /// Column player's probabilities (separate throws only).
    #[arg(long)]
    col_probs: Option<ProbVector>,
    #[arg(long, default_value = "common")]
    regime: Regime,
    #[arg(long, value_enum, default_value_t = PayoffEngine::Exact)]
    engine: PayoffEngine,
}

#[derive(Args, Debug)]
struct OptionalGameArgs {
    #[arg(long)]
    probs: Option<ProbVector>,
    #[arg(long)]
    col_probs: Option<ProbVector>,
    #[arg(long, default_value = "common")]
    regime: Regime,
    #[arg(long, value_enum, default_value_t = PayoffEngine::Exact)]
    engine: PayoffEngine,
}

#[derive(Args, Debug)]
struct SetArgs {
    /// Quota of counters per player.
    #[arg(long)]
    n: Option<u32>,
    /// Number of boxes; defaults to the length of the probability vector.
    #[arg(long)]
    k: Option<usize>,
    /// Which allocations of `n` to include.
    #[arg(long, value_enum, default_value_t = SetKind::Ordered)]
    set: SetKind,
    /// Explicit strategies, separated by `;` (overrides `--n`).
    #[arg(long, value_delimiter = ';', conflicts_with = "n")]
    strategies: Option<Vec<Strategy>>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SetKind {
    /// Allocations never putting fewer counters on a likelier box.
    Ordered,
    /// Nonincreasing in box index.
    Monotone,
    /// Every composition.
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExpectEngine {
    /// Poisson-embedding integral (any number of boxes).
    Integral,
    /// Summed distribution.
    Series,
    /// Hypergeometric closed form (two boxes).
    TwoBox,
    /// Closed forms for three counters over three boxes.
    ThreeBox,
    /// Seeded simulation.
    MonteCarlo,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PayoffEngine {
    Exact,
    MonteCarlo,
}

/// Failure classified by exit status.
enum Failure {
    Usage(String),
    Engine(String),
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        let mut root = &e;
        while let GameError::Pair { source, .. } = root {
            root = source;
        }
        match root {
            GameError::Argument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Engine(e.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn print_json(v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Engine(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Engine(format!("cannot create {}: {e}", path.display())))
}

/// Writes rows to `--out` when given, otherwise prints `json`.
fn emit(cli: &Cli, v: Value, header: &[&str], rows: impl FnOnce() -> Vec<Vec<String>>) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => {
            let mut w = csv::Writer::from_writer(create(path)?);
            let rows = rows();
            w.write_record(header).map_err(|e| Failure::Engine(e.to_string()))?;
            for r in &rows {
                w.write_record(r).map_err(|e| Failure::Engine(e.to_string()))?;
            }
            w.flush().map_err(|e| Failure::Engine(e.to_string()))?;
            print_json(&json!({"out": path, "rows": rows.len()}))
        }
        None => print_json(&v),
    }
}

fn tolerance(cli: &Cli) -> Result<Tolerance, Failure> {
    match cli.tol {
        Some(t) => Ok(Tolerance::new(t, Tolerance::default().max_terms)?),
        None => Ok(Tolerance::default()),
    }
}

fn trials(cli: &Cli, default: u64) -> u64 {
    cli.trials.unwrap_or(default)
}

fn sim_json(sim: &SimResult) -> Value {
    json!({
        "trials": sim.trials, "mean": sim.mean, "std_error": sim.std_error,
        "wins": sim.wins, "draws": sim.draws, "losses": sim.losses, "cap_hits": sim.cap_hits,
    })
}

fn game_config(cli: &Cli, probs: ProbVector, col_probs: Option<ProbVector>, regime: Regime, engine: PayoffEngine) -> Result<GameConfig, Failure> {
    let mut cfg = GameConfig::new(regime, probs);
    cfg.tol = tolerance(cli)?;
    if let Some(q) = col_probs {
        cfg = cfg.with_col_probs(q)?;
    }
    if engine == PayoffEngine::MonteCarlo {
        cfg = cfg.with_engine(Engine::MonteCarlo { trials: trials(cli, 100_000), seed: cli.seed });
    }
    Ok(cfg)
}

fn strategy_set(set: &SetArgs, probs: &ProbVector) -> Result<Vec<Strategy>, Failure> {
    if let Some(list) = &set.strategies {
        return Ok(list.clone());
    }
    let n = set.n.ok_or_else(|| usage("give --n or --strategies"))?;
    let k = set.k.unwrap_or(probs.len());
    if k != probs.len() {
        return Err(usage(format!("--k {k} does not match {} probabilities", probs.len())));
    }
    Ok(match set.set {
        SetKind::Ordered => enumerate_respecting_ties(n, probs),
        SetKind::Monotone => enumerate_monotone(n, k),
        SetKind::All => enumerate_compositions(n, k),
    })
}

fn cmd_expect(cli: &Cli, strategy: &Strategy, probs: &ProbVector, engine: ExpectEngine) -> CmdResult {
    let mut v = json!({"strategy": strategy.to_string(), "probs": probs.probs()});
    let value = match engine {
        ExpectEngine::Integral => expect_general(strategy, probs)?,
        ExpectEngine::Series => expect_series(strategy, probs)?,
        ExpectEngine::TwoBox => {
            let c = strategy.counts();
            if c.len() != 2 || probs.len() != 2 {
                return Err(usage("the two-box engine needs two boxes"));
            }
            expect_two_box_with(c[0], c[1], probs.probs()[0], &tolerance(cli)?)?
        }
        ExpectEngine::ThreeBox => expect_three_closed(strategy, probs)?,
        ExpectEngine::MonteCarlo => {
            let sim = estimate_expectation(strategy, probs, trials(cli, 1_000_000), cli.seed)?;
            v["std_error"] = json!(sim.std_error);
            v["trials"] = json!(sim.trials);
            v["cap_hits"] = json!(sim.cap_hits);
            sim.mean
        }
    };
    v["engine"] = json!(format!("{engine:?}").to_lowercase());
    v["expectation"] = json!(value);
    let row = vec![strategy.to_string(), fmt_sig(value)];
    emit(cli, v, &["strategy", "expectation"], || vec![row])?;
    Ok(0)
}

fn cmd_pmf(cli: &Cli, strategy: &Strategy, probs: &ProbVector, max_r: Option<u64>) -> CmdResult {
    let table: Vec<(u64, f64)> = match max_r {
        Some(m) => pmf_table(strategy, probs, m)?.into_iter().enumerate().map(|(r, p)| (r as u64, p)).collect(),
        None => pmf_truncated(strategy, probs)?.into_iter().map(|x| (x.r, x.probability)).collect(),
    };
    let mass: f64 = table.iter().map(|x| x.1).sum();
    let v = json!({
        "strategy": strategy.to_string(),
        "probs": probs.probs(),
        "mass": mass,
        "pmf": table.iter().map(|&(r, p)| json!({"r": r, "probability": p})).collect::<Vec<_>>(),
    });
    emit(cli, v, &["r", "probability"], || {
        table.iter().map(|&(r, p)| vec![r.to_string(), fmt_sig(p)]).collect()
    })?;
    Ok(0)
}

fn cmd_payoff(cli: &Cli, row: &Strategy, col: &Strategy, game: &GameArgs) -> CmdResult {
    let cfg = game_config(cli, game.probs.clone(), game.col_probs.clone(), game.regime, game.engine)?;
    let mut v = json!({"row": row.to_string(), "col": col.to_string(), "regime": game.regime});
    let b = match cfg.engine {
        Engine::MonteCarlo { trials, seed } => {
            let sim = simulate_race(row, col, &cfg, trials, seed)?;
            v["std_error"] = json!(sim.std_error);
            v["trials"] = json!(trials);
            sim.breakdown()
        }
        Engine::Exact => cfg.payoff(row, col)?,
    };
    v["p_win"] = json!(b.p_win);
    v["p_draw"] = json!(b.p_draw);
    v["p_lose"] = json!(b.p_lose);
    v["value"] = json!(b.value);
    let rec = vec![row.to_string(), col.to_string(), fmt_sig(b.p_win), fmt_sig(b.p_draw), fmt_sig(b.p_lose), fmt_sig(b.value)];
    emit(cli, v, &["row", "col", "p_win", "p_draw", "p_lose", "value"], || vec![rec])?;
    Ok(0)
}

fn matrix_json(m: &PayoffMatrix) -> Value {
    json!({
        "strategies": m.strategies.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "values": m.values,
        "antisymmetry_error": m.antisymmetry_error(),
    })
}

fn cmd_matrix(cli: &Cli, set: &SetArgs, game: &GameArgs) -> CmdResult {
    let cfg = game_config(cli, game.probs.clone(), game.col_probs.clone(), game.regime, game.engine)?;
    let strats = strategy_set(set, &game.probs)?;
    let m = build_matrix(&strats, &cfg)?;
    match &cli.out {
        Some(path) => {
            m.write_csv(create(path)?)?;
            print_json(&json!({"out": path, "rows": m.len()}))?;
        }
        None => print_json(&matrix_json(&m))?,
    }
    Ok(0)
}

fn cmd_solve(cli: &Cli, matrix: Option<&Path>, set: &SetArgs, game: &OptionalGameArgs) -> CmdResult {
    let m = match matrix {
        Some(path) => {
            let f = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
            PayoffMatrix::read_csv(f)?
        }
        None => {
            let probs = game.probs.clone().ok_or_else(|| usage("give --matrix or --probs with a strategy set"))?;
            let cfg = game_config(cli, probs.clone(), game.col_probs.clone(), game.regime, game.engine)?;
            build_matrix(&strategy_set(set, &probs)?, &cfg)?
        }
    };
    let sol = solve_zero_sum(&m)?;
    let gap = certificate_gap(&m.values, &sol);
    let labels: Vec<String> = m.strategies.iter().map(|s| s.to_string()).collect();
    let v = json!({
        "value": sol.value,
        "pure": sol.pure,
        "support": sol.support.iter().map(|&i| json!({"strategy": labels[i], "weight": sol.row_mix[i]})).collect::<Vec<_>>(),
        "strategies": labels,
        "row_mix": sol.row_mix,
        "col_mix": sol.col_mix,
        "certificate_gap": gap,
    });
    emit(cli, v, &["strategy", "row_weight", "col_weight"], || {
        labels
            .iter()
            .enumerate()
            .map(|(i, s)| vec![s.clone(), fmt_sig(sol.row_mix[i]), fmt_sig(sol.col_mix[i])])
            .collect()
    })?;
    Ok(0)
}

fn cmd_cutoffs(cli: &Cli, n_max: u32) -> CmdResult {
    let rows = scan_cutoffs(n_max)?;
    match &cli.out {
        Some(path) => {
            write_cutoffs_csv(&rows, create(path)?)?;
            print_json(&json!({"out": path, "rows": rows.len()}))?;
        }
        None => print_json(&json!(rows))?,
    }
    Ok(0)
}

fn cmd_scan(cli: &Cli, n: u32, mode: ScanMode, resolution: u32) -> CmdResult {
    let points = scan_ternary(n, mode, resolution)?;
    let errors = points.iter().filter(|p| p.error.is_some()).count();
    match &cli.out {
        Some(path) => {
            write_ternary_csv(&points, create(path)?)?;
            print_json(&json!({"out": path, "rows": points.len(), "errors": errors}))?;
        }
        None => {
            let pts: Vec<Value> = points
                .iter()
                .map(|p| {
                    json!({
                        "p": p.p, "perturbed": p.perturbed, "result": p.result,
                        "support": p.support.iter().map(|(s, w)| json!({"strategy": s.to_string(), "weight": w})).collect::<Vec<_>>(),
                        "value": p.value, "error": p.error,
                    })
                })
                .collect();
            print_json(&json!({"n": n, "mode": mode, "resolution": resolution, "errors": errors, "points": pts}))?;
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    cli: &Cli,
    strategy: Option<&Strategy>,
    row: Option<&Strategy>,
    col: Option<&Strategy>,
    probs: &ProbVector,
    col_probs: Option<&ProbVector>,
    regime: Regime,
    margin: bool,
) -> CmdResult {
    let n = trials(cli, 100_000);
    let (mut v, sim) = match (strategy, row, col) {
        (Some(s), _, _) => {
            let sim = estimate_expectation(s, probs, n, cli.seed)?;
            (json!({"strategy": s.to_string(), "quantity": "excess_throws"}), sim)
        }
        (None, Some(r), Some(c)) => {
            let cfg = game_config(cli, probs.clone(), col_probs.cloned(), regime, PayoffEngine::Exact)?;
            let sim = if margin {
                simulate_margin(r, c, &cfg, n, cli.seed)?
            } else {
                simulate_race(r, c, &cfg, n, cli.seed)?
            };
            let quantity = if margin { "margin" } else { "payoff" };
            (json!({"row": r.to_string(), "col": c.to_string(), "regime": regime, "quantity": quantity}), sim)
        }
        _ => return Err(usage("give --strategy, or --row and --col")),
    };
    v["seed"] = json!(cli.seed);
    v["result"] = sim_json(&sim);
    let rec = vec![
        sim.trials.to_string(),
        fmt_sig(sim.mean),
        fmt_sig(sim.std_error),
        sim.wins.to_string(),
        sim.draws.to_string(),
        sim.losses.to_string(),
        sim.cap_hits.to_string(),
    ];
    emit(cli, v, &["trials", "mean", "std_error", "wins", "draws", "losses", "cap_hits"], || vec![rec])?;
    Ok(0)
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn cmd_reproduce(cli: &Cli, target: Target) -> CmdResult {
    let report: Report = reproduce(target, &ReproduceOptions { seed: cli.seed, trials: cli.trials })?;
    for line in report.summary_lines() {
        eprintln!("{line}");
    }
    eprintln!(
        "{target}: {} of {} assertions passed",
        report.asserted - report.failed,
        report.asserted
    );
    if let Some(path) = &cli.out {
        let mut w = csv::Writer::from_writer(create(path)?);
        let io = |e: csv::Error| Failure::Engine(e.to_string());
        w.write_record(["check", "kind", "passed", "expected", "got", "tol", "note"]).map_err(io)?;
        for c in &report.checks {
            let kind = match c.kind {
                CheckKind::Assert => "assert",
                CheckKind::Info => "info",
            };
            w.write_record([
                c.name.clone(),
                kind.to_string(),
                c.passed.map(|p| p.to_string()).unwrap_or_default(),
                opt_sig(c.expected),
                opt_sig(c.got),
                opt_sig(c.tol),
                c.note.clone(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Failure::Engine(e.to_string()))?;
    }
    print_json(&serde_json::to_value(&report).map_err(|e| Failure::Engine(e.to_string()))?)?;
    Ok(if report.passed { 0 } else { EXIT_COMPARISON })
}

fn run(cli: &Cli) -> CmdResult {
    tolerance(cli)?;
    match &cli.command {
        Command::Expect { strategy, probs, engine } => cmd_expect(cli, strategy, probs, *engine),
        Command::Pmf { strategy, probs, max_r } => cmd_pmf(cli, strategy, probs, *max_r),
        Command::Payoff { row, col, game } => cmd_payoff(cli, row, col, game),
        Command::Matrix { set, game } => cmd_matrix(cli, set, game),
        Command::Solve { matrix, set, game } => cmd_solve(cli, matrix.as_deref(), set, game),
        Command::Cutoffs { n_max } => cmd_cutoffs(cli, *n_max),
        Command::Scan { n, mode, resolution } => cmd_scan(cli, *n, *mode, *resolution),
        Command::Simulate { strategy, row, col, probs, col_probs, regime, margin } => cmd_simulate(
            cli,
            strategy.as_ref(),
            row.as_ref(),
            col.as_ref(),
            probs,
            col_probs.as_ref(),
            *regime,
            *margin,
        ),
        Command::Reproduce { target } => cmd_reproduce(cli, *target),
    }
}

/// Caps the worker pool at `ALLOC_GAME_THREADS` when set.
fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ALLOC_GAME_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("ALLOC_GAME_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Engine(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match init_threads().and_then(|_| run(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Engine(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ENGINE)
        }
    }
}
