//! Command-line runner: loads law specs from JSON, runs the library's
//! entropy/Fisher operations and theorem harnesses, writes CSV/JSON/SVG
//! artifacts, and reports results through machine-readable exit codes:
//!
//! * 0 — run succeeded and all checks passed
//! * 1 — a verified inequality or consistency check failed
//! * 2 — usage or configuration error
//! * 3 — numerical non-convergence

mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use entroflow_core::classical::{entropy, fisher, heat_flow};
use entroflow_core::extremal::{
    maximize, stationarity, ConstrainedDensityProblem, Objective,
};
use entroflow_core::free::{free_entropy, free_fisher, semicircular_flow};
use entroflow_core::harness::{
    classical_sequence, entropy_convexity_check, equality_detector, free_sequence,
    fisher_superadditivity_check, stability_check, EntropySequence, SequenceKind,
    StabilityVerdict, WeightVector,
};
use entroflow_core::measures::{law_from_spec, realize, standardize_spec};
use entroflow_core::projection::{check_inequality, project_out_common, random_family};
use entroflow_core::{Error, Grid, GridDensity, Law, LawSpec, HALF_LOG_TWO_PI_E};

use output::{
    fmt_f64, json_f64, json_f64_vec, out_path, write_csv, write_json, write_svg,
    Formats, Series,
};

#[derive(Parser)]
#[command(
    name = "entroflow",
    version,
    about = "Entropy, Fisher information and free-probability checks on laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct LawArg {
    /// Path to a law spec JSON file.
    #[arg(long)]
    law: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    /// Leftmost grid node (default depends on the command).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// Grid step.
    #[arg(long)]
    dx: Option<f64>,
    /// Number of grid nodes; must be a power of two.
    #[arg(long)]
    count: Option<usize>,
}

impl GridArgs {
    fn resolve(&self, default: Grid) -> Result<Grid, Failure> {
        let x0 = self.x0.unwrap_or(default.x0);
        let dx = self.dx.unwrap_or(default.dx);
        let count = self.count.unwrap_or(default.count);
        if !(dx > 0.0) {
            return Err(usage("--dx must be positive"));
        }
        if count < 2 || !count.is_power_of_two() {
            return Err(usage("--count must be a power of two, at least 2"));
        }
        Ok(Grid::new(x0, dx, count))
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output directory for CSV/JSON/SVG artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, default_value = "csv,json,svg")]
    formats: String,
}

impl OutArgs {
    fn formats(&self) -> Result<Formats, Failure> {
        Formats::parse(&self.formats).map_err(usage)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Classical,
    Free,
}

impl Kind {
    fn sequence_kind(self) -> SequenceKind {
        match self {
            Kind::Classical => SequenceKind::Classical,
            Kind::Free => SequenceKind::Free,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Classical => "classical",
            Kind::Free => "free",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Entropy,
    NegFisher,
    LogEnergy,
}

impl ObjectiveArg {
    fn objective(self) -> Objective {
        match self {
            ObjectiveArg::Entropy => Objective::Entropy,
            ObjectiveArg::NegFisher => Objective::NegFisher,
            ObjectiveArg::LogEnergy => Objective::LogEnergy,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ObjectiveArg::Entropy => "entropy",
            ObjectiveArg::NegFisher => "neg_fisher",
            ObjectiveArg::LogEnergy => "log_energy",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Entropy sequence H((x_1 + ... + x_n)/sqrt n) under classical
    /// convolution; checks monotonicity.
    ClassicalSeq {
        #[command(flatten)]
        law: LawArg,
        /// Sequence length N (entries n = 1..=N).
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Monotonicity slack: deltas must be >= -tol.
        #[arg(long, default_value_t = 2e-3)]
        tol: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Free entropy sequence chi((x_1 + ... + x_n)/sqrt n) under free
    /// convolution; checks monotonicity.
    FreeSeq {
        #[command(flatten)]
        law: LawArg,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2e-3)]
        tol: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Equality dichotomy: entropy plateaus must co-occur with the law
    /// being Gaussian (classical) resp. semicircular (free).
    Equality {
        #[command(flatten)]
        law: LawArg,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Plateau tolerance on entropy deltas.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Stam-type superadditivity of (free) Fisher information along
    /// weighted sums.
    Stam {
        #[command(flatten)]
        law: LawArg,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Number of leave-one-out summands (the weight vector has n+1
        /// entries).
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Randomize the weight vector from this seed (default: the
        /// symmetric weights a_j = 1/sqrt(n+1)).
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Concavity-type bound for free entropy along weighted free sums.
    Convexity {
        #[command(flatten)]
        law: LawArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Free stability: is the law preserved by free convolution of two
    /// rescaled copies?
    Stability {
        #[command(flatten)]
        law: LawArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Randomized suite for the commuting-projection inequality.
    LemmaProj {
        /// Ambient dimension D.
        #[arg(long, default_value_t = 64)]
        dim: usize,
        /// Number of projections m (2..=6; requires D >= 2^m).
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 10000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Projected-ascent maximization of entropy / -Fisher / log-energy at
    /// fixed variance.
    Extremal {
        #[arg(long, value_enum)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 1.0)]
        variance: f64,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        #[arg(long, default_value_t = 0.2)]
        step_size: f64,
        /// Optional initial law spec (default: a Laplace density at the
        /// target variance).
        #[arg(long)]
        init: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Differential (Shannon) entropy of a law.
    Entropy {
        #[command(flatten)]
        law: LawArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Free entropy chi of a law.
    FreeEntropy {
        #[command(flatten)]
        law: LawArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Classical Fisher information of a law.
    Fisher {
        #[command(flatten)]
        law: LawArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Free Fisher information, both via the conjugate variable and via
    /// the cubic density formula.
    FreeFisher {
        #[command(flatten)]
        law: LawArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Gaussian heat flow (classical) or semicircular flow (free) of a law
    /// at time t; writes the resulting density.
    Flow {
        #[command(flatten)]
        law: LawArg,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        time: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// A run failure: message goes to standard error, code becomes the exit
/// status.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn core_err(e: Error) -> Failure {
    let code = match e {
        Error::NoConvergence { .. } | Error::StalledBelowTolerance { .. } => 3,
        _ => 2,
    };
    Failure { code, message: format!("{e}") }
}

fn io_err(e: std::io::Error) -> Failure {
    Failure { code: 2, message: format!("{e}") }
}

fn load_spec(path: &Path) -> Result<LawSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| usage(format!("invalid law spec {}: {e}", path.display())))
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    std::process::exit(code);
}

/// Parallelism cap: ENTROFLOW_THREADS if set (positive), else the number of
/// available cores.
fn thread_cap() -> usize {
    std::env::var("ENTROFLOW_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
}

/// Runs `f` over trial indices, possibly across threads, and returns the
/// results aggregated in index order (so the outcome does not depend on the
/// thread count).
fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = thread_cap().min(trials.max(1));
    if threads <= 1 {
        return (0..trials).map(f).collect();
    }
    let mut out: Vec<Option<T>> = (0..trials).map(|_| None).collect();
    let chunk = trials.div_ceil(threads);
    std::thread::scope(|scope| {
        for (c, slot) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (i, s) in slot.iter_mut().enumerate() {
                    *s = Some(f(c * chunk + i));
                }
            });
        }
    });
    out.into_iter().map(|o| o.expect("every index visited")).collect()
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u1 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u1 > 0.0 {
            return (-2.0 * u1.ln()).sqrt()
                * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

fn grid_json(grid: Grid) -> serde_json::Value {
    json!({ "x0": grid.x0, "dx": grid.dx, "count": grid.count })
}

fn run(command: Command) -> Result<i32, Failure> {
    match command {
        Command::ClassicalSeq { law, n, tol, grid, out } => {
            run_sequence(Kind::Classical, &law.law, n, tol, &grid, &out)
        }
        Command::FreeSeq { law, n, tol, grid, out } => {
            run_sequence(Kind::Free, &law.law, n, tol, &grid, &out)
        }
        Command::Equality { law, kind, n, tol, grid, out } => {
            run_equality(kind, &law.law, n, tol, &grid, &out)
        }
        Command::Stam { law, kind, n, seed, grid, out } => {
            run_stam(kind, &law.law, n, seed, &grid, &out)
        }
        Command::Convexity { law, n, seed, grid, out } => {
            run_convexity(&law.law, n, seed, &grid, &out)
        }
        Command::Stability { law, grid, out } => run_stability(&law.law, &grid, &out),
        Command::LemmaProj { dim, m, trials, seed, out } => {
            run_lemma_proj(dim, m, trials, seed, &out)
        }
        Command::Extremal { objective, variance, steps, step_size, init, grid, out } => {
            run_extremal(objective, variance, steps, step_size, init.as_deref(), &grid, &out)
        }
        Command::Entropy { law, grid, out } => run_scalar(Scalar::Entropy, &law.law, &grid, &out),
        Command::FreeEntropy { law, grid, out } => {
            run_scalar(Scalar::FreeEntropy, &law.law, &grid, &out)
        }
        Command::Fisher { law, grid, out } => run_scalar(Scalar::Fisher, &law.law, &grid, &out),
        Command::FreeFisher { law, grid, out } => {
            run_scalar(Scalar::FreeFisher, &law.law, &grid, &out)
        }
        Command::Flow { law, kind, time, grid, out } => {
            run_flow(kind, &law.law, time, &grid, &out)
        }
    }
}

fn sequence_rows(seq: &EntropySequence) -> Vec<Vec<String>> {
    seq.values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let delta = if i == 0 { String::new() } else { fmt_f64(seq.deltas[i - 1]) };
            vec![format!("{}", i + 1), fmt_f64(v), delta]
        })
        .collect()
}

fn write_sequence_outputs(
    seq: &EntropySequence,
    title: &str,
    out: &OutArgs,
    report: &serde_json::Value,
) -> Result<(), Failure> {
    let formats = out.formats()?;
    if formats.csv {
        let path = out_path(&out.out, "sequence.csv").map_err(io_err)?;
        write_csv(&path, &["n", "value", "delta"], &sequence_rows(seq)).map_err(io_err)?;
    }
    if formats.json {
        let path = out_path(&out.out, "report.json").map_err(io_err)?;
        write_json(&path, report).map_err(io_err)?;
    }
    if formats.svg {
        let points: Vec<(f64, f64)> = seq
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| ((i + 1) as f64, v))
            .collect();
        let series = vec![Series { name: "entropy".to_string(), points }];
        let path = out_path(&out.out, "plot.svg").map_err(io_err)?;
        write_svg(&path, title, &series).map_err(io_err)?;
    }
    Ok(())
}

fn run_sequence(
    kind: Kind,
    law: &Path,
    n: usize,
    tol: f64,
    grid: &GridArgs,
    out: &OutArgs,
) -> Result<i32, Failure> {
    if tol <= 0.0 {
        return Err(usage("--tol must be positive"));
    }
    if !(1..=8).contains(&n) {
        return Err(usage("--n must be between 1 and 8"));
    }
    let spec = load_spec(law)?;
    let grid = grid.resolve(Grid::default_working())?;
    let seq = match kind {
        Kind::Classical => classical_sequence(&spec, n, grid),
        Kind::Free => free_sequence(&spec, n, grid),
    }
    .map_err(core_err)?;
    let bound = HALF_LOG_TWO_PI_E + 1e-3;
    let pass = seq.vacuous
        || (seq.deltas.iter().all(|&d| d >= -tol)
            && seq.values.iter().all(|&v| v <= bound));
    let report = json!({
        "command": format!("{}-seq", kind.name()),
        "law": serde_json::to_value(&spec).expect("spec serializes"),
        "grid": grid_json(grid),
        "n": n,
        "values": json_f64_vec(&seq.values),
        "deltas": json_f64_vec(&seq.deltas),
        "vacuous": seq.vacuous,
        "tolerances": { "monotone": tol, "upper_bound": HALF_LOG_TWO_PI_E, "upper_bound_slack": 1e-3 },
        "pass": pass,
    });
    write_sequence_outputs(&seq, &format!("{} entropy sequence", kind.name()), out, &report)?;
    println!(
        "{}-seq: n={} vacuous={} monotone_pass={}",
        kind.name(),
        n,
        seq.vacuous,
        pass
    );
    Ok(if pass { 0 } else { 1 })
}

fn run_equality(
    kind: Kind,
    law: &Path,
    n: usize,
    tol: f64,
    grid: &GridArgs,
    out: &OutArgs,
) -> Result<i32, Failure> {
    if tol <= 0.0 {
        return Err(usage("--tol must be positive"));
    }
    if !(2..=8).contains(&n) {
        return Err(usage("--n must be between 2 and 8"));
    }
    let spec = load_spec(law)?;
    let grid = grid.resolve(Grid::default_working())?;
    let seq = match kind {
        Kind::Classical => classical_sequence(&spec, n, grid),
        Kind::Free => free_sequence(&spec, n, grid),
    }
    .map_err(core_err)?;
    let rep = equality_detector(&seq, tol, grid).map_err(core_err)?;
    let report = json!({
        "command": "equality",
        "kind": kind.name(),
        "law": serde_json::to_value(&spec).expect("spec serializes"),
        "grid": grid_json(grid),
        "n": n,
        "values": json_f64_vec(&seq.values),
        "deltas": json_f64_vec(&seq.deltas),
        "plateaus": rep.plateaus,
        "test_pass": rep.test_pass,
        "consistent": rep.consistent,
        "vacuous": rep.vacuous,
        "tolerances": { "plateau": tol },
    });
    write_sequence_outputs(&seq, "entropy sequence (equality check)", out, &report)?;
    println!(
        "equality: kind={} test_pass={} consistent={}",
        kind.name(),
        rep.test_pass,
        rep.consistent
    );
    Ok(if rep.consistent { 0 } else { 1 })
}

/// Random superadditivity weights: `a` is a normalized vector of positive
/// entries and `b_j = sqrt(1 - a_j^2) / sum_k (1 - a_k^2)`, which satisfies
/// both weight invariants by construction.
fn random_weights(n: usize, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..n + 1)
        .map(|_| 0.2 + (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
        .collect();
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a: Vec<f64> = u.iter().map(|x| x / norm).collect();
    let s: f64 = a.iter().map(|x| 1.0 - x * x).sum();
    let b: Vec<f64> = a.iter().map(|x| (1.0 - x * x).sqrt() / s).collect();
    WeightVector::new(a, b).expect("constructed weights satisfy the invariants")
}

fn run_stam(
    kind: Kind,
    law: &Path,
    n: usize,
    seed: Option<u64>,
    grid: &GridArgs,
    out: &OutArgs,
) -> Result<i32, Failure> {
    if n < 1 {
        return Err(usage("--n must be at least 1"));
    }
    let spec = load_spec(law)?;
    let grid = grid.resolve(Grid::default_working())?;
    let w = match seed {
        None => WeightVector::symmetric(n),
        Some(s) => random_weights(n, s),
    };
    let (lhs, rhs, holds) =
        fisher_superadditivity_check(&spec, &w, kind.sequence_kind(), grid)
            .map_err(core_err)?;
    let formats = out.formats()?;
    if formats.json {
        let report = json!({
            "command": "stam",
            "kind": kind.name(),
            "law": serde_json::to_value(&spec).expect("spec serializes"),
            "grid": grid_json(grid),
            "n": n,
            "seed": seed,
            "weights": { "a": w.a, "b": w.b },
            "lhs": json_f64(lhs),
            "rhs": json_f64(rhs),
            "holds": holds,
            "tolerances": { "slack": 2e-3 },
        });
        let path = out_path(&out.out, "report.json").map_err(io_err)?;
        write_json(&path, &report).map_err(io_err)?;
    }
    println!("stam: lhs={} rhs={} holds={}", fmt_f64(lhs), fmt_f64(rhs), holds);
    Ok(if holds { 0 } else { 1 })
}

fn run_convexity(
    law: &Path,
    n: usize,
    seed: Option<u64>,
    grid: &GridArgs,
    out: &OutArgs,
) -> Result<i32, Failure> {
    if n < 1 {
        return Err(usage("--n must be at least 1"));
    }
    let spec = load_spec(law)?;
    let grid = grid.resolve(Grid::default_working())?;
    let a = match seed {
        None => vec![1.0 / ((n + 1) as f64).sqrt(); n + 1],
        Some(s) => random_weights(n, s).a,
    };
    let (lhs, rhs, holds) = entropy_convexity_check(&spec, &a, grid).map_err(core_err)?;
    let formats = out.formats()?;
    if formats.json {
        let report = json!({
            "command": "convexity",
            "law": serde_json::to_value(&spec).expect("spec serializes"),
            "grid": grid_json(grid),
            "n": n,
            "seed": seed,
            "weights": { "a": a },
            "lhs": json_f64(lhs),
            "rhs": json_f64(rhs),
            "holds": holds,
            "tolerances": { "slack": 2e-3 },
        });
        let path = out_path(&out.out, "report.json").map_err(io_err)?;
        write_json(&path, &report).map_err(io_err)?;
    }
    println!("convexity: lhs={} rhs={} holds={}", fmt_f64(lhs), fmt_f64(rhs), holds);
    Ok(if holds { 0 } else { 1 })
}

fn run_stability(law: &Path, grid: &GridArgs, out: &OutArgs) -> Result<i32, Failure> {
    let spec = load_spec(law)?;
    let grid = grid.resolve(Grid::default_working())?;
    let (std_spec, _) = standardize_spec(&spec).map_err(core_err)?;
    let std_law = law_from_spec(&std_spec, grid).map_err(core_err)?;
    let (dist, verdict) = stability_check(&std_law).map_err(core_err)?;
    let stable = verdict == StabilityVerdict::Stable;
    let chi = free_entropy(&std_law);
    let formats = out.formats()?;
    if formats.json {
        let report = json!({
            "command": "stability",
            "law": serde_json::to_value(&spec).expect("spec serializes"),
            "grid": grid_json(grid),
            "ks_distance": json_f64(dist),
            "verdict": if stable { "STABLE" } else { "NOT_STABLE" },
            // finite chi together with NOT_STABLE shows non-stability is
            // not just an artifact of divergent entropy
            "free_entropy": json_f64(chi),
            "tolerances": { "ks": 0.01 },
        });
        let path = out_path(&out.out, "report.json").map_err(io_err)?;
        write_json(&path, &report).map_err(io_err)?;
    }
    println!(
        "stability: ks={} verdict={} chi={}",
        fmt_f64(dist),
        if stable { "STABLE" } else { "NOT_STABLE" },
        fmt_f64(chi)
    );
    Ok(if stable { 0 } else { 1 })
}

fn run_lemma_proj(
    dim: usize,
    m: usize,
    trials: usize,
    seed: u64,
    out: &OutArgs,
) -> Result<i32, Failure> {
    if !(2..=6).contains(&m) {
        return Err(usage("--m must be between 2 and 6"));
    }
    if trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    // validate the dimension once up front so the parallel loop cannot fail
    random_family(dim, m, seed).map_err(core_err)?;
    let slacks: Vec<f64> = run_trials(trials, |t| {
        let trial_seed = seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let family = random_family(dim, m, trial_seed).expect("dimension validated");
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed.wrapping_add(1));
        let xis: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let raw: Vec<f64> = (0..dim).map(|_| standard_normal(&mut rng)).collect();
                project_out_common(&family, &raw)
            })
            .collect();
        let (lhs, rhs, _) =
            check_inequality(&family, &xis).expect("hypothesis enforced exactly");
        rhs - lhs
    });
    let min_slack = slacks.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = min_slack >= -1e-10;
    let formats = out.formats()?;
    if formats.csv {
        let rows: Vec<Vec<String>> = slacks
            .iter()
            .enumerate()
            .map(|(t, &s)| vec![format!("{t}"), fmt_f64(s)])
            .collect();
        let path = out_path(&out.out, "slacks.csv").map_err(io_err)?;
        write_csv(&path, &["trial", "slack"], &rows).map_err(io_err)?;
    }
    if formats.json {
        let report = json!({
            "command": "lemma-proj",
            "dim": dim,
            "m": m,
            "trials": trials,
            "seed": seed,
            "min_slack": json_f64(min_slack),
            "pass": pass,
            "tolerances": { "slack": 1e-10 },
        });
        let path = out_path(&out.out, "report.json").map_err(io_err)?;
        write_json(&path, &report).map_err(io_err)?;
    }
    println!("lemma-proj: trials={trials} min_slack={} pass={pass}", fmt_f64(min_slack));
    Ok(if pass { 0 } else { 1 })
}

fn run_extremal(
    objective: ObjectiveArg,
    variance: f64,
    steps: usize,
    step_size: f64,
    init: Option<&Path>,
    grid: &GridArgs,
    out: &OutArgs,
) -> Result<i32, Failure> {
    if !(variance > 0.0) {
        return Err(usage("--variance must be positive"));
    }
    if !(step_size > 0.0) {
        return Err(usage("--step-size must be positive"));
    }
    let grid = grid.resolve(Grid::symmetric(8.0, 1024))?;
    let init_density = match init {
        Some(path) => {
            let spec = load_spec(path)?;
            realize(&spec, grid).map_err(core_err)?
        }
        None => {
            // Laplace density at the target variance: full support, far
            // from all three optimizers
            let rate = (2.0 / variance).sqrt();
            GridDensity::from_fn(grid, |t| (-rate * t.abs()).exp()).map_err(core_err)?
        }
    };
    let problem = ConstrainedDensityProblem::new(grid, objective.objective(), variance);
    let result = maximize(&problem, &init_density, steps, step_size).map_err(core_err)?;
    let stat = stationarity(&problem, &result.density);
    let final_value = *result.trace.last().expect("trace is never empty");
    let formats = out.formats()?;
    if formats.csv {
        let rows: Vec<Vec<String>> = result
            .trace
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let delta =
                    if i == 0 { String::new() } else { fmt_f64(v - result.trace[i - 1]) };
                vec![format!("{i}"), fmt_f64(v), delta]
            })
            .collect();
        let path = out_path(&out.out, "sequence.csv").map_err(io_err)?;
        write_csv(&path, &["n", "value", "delta"], &rows).map_err(io_err)?;

        let rows: Vec<Vec<String>> = result
            .density
            .values
            .iter()
            .enumerate()
            .map(|(i, &p)| vec![fmt_f64(grid.node(i)), fmt_f64(p)])
            .collect();
        let path = out_path(&out.out, "density.csv").map_err(io_err)?;
        write_csv(&path, &["x", "density"], &rows).map_err(io_err)?;
    }
    if formats.json {
        let report = json!({
            "command": "extremal",
            "objective": objective.name(),
            "variance": variance,
            "grid": grid_json(grid),
            "steps_budget": steps,
            "steps_taken": result.trace.len() - 1,
            "final_value": json_f64(final_value),
            "stationarity": json_f64(stat),
            "tolerances": { "constraint": 1e-8, "rel_change_converged": 1e-8 },
        });
        let path = out_path(&out.out, "report.json").map_err(io_err)?;
        write_json(&path, &report).map_err(io_err)?;
    }
    if formats.svg {
        let points: Vec<(f64, f64)> = result
            .density
            .values
            .iter()
            .enumerate()
            .map(|(i, &p)| (grid.node(i), p))
            .collect();
        let series = vec![Series { name: "density".to_string(), points }];
        let path = out_path(&out.out, "plot.svg").map_err(io_err)?;
        write_svg(&path, &format!("extremal density ({})", objective.name()), &series)
            .map_err(io_err)?;
    }
    println!(
        "extremal: objective={} value={} stationarity={}",
        objective.name(),
        fmt_f64(final_value),
        fmt_f64(stat)
    );
    Ok(0)
}

enum Scalar {
    Entropy,
    FreeEntropy,
    Fisher,
    FreeFisher,
}

fn run_scalar(
    which: Scalar,
    law: &Path,
    grid: &GridArgs,
    out: &OutArgs,
) -> Result<i32, Failure> {
    let spec = load_spec(law)?;
    let grid = grid.resolve(Grid::default_working())?;
    let law_obj = law_from_spec(&spec, grid).map_err(core_err)?;
    let (name, fields) = match which {
        Scalar::Entropy => {
            let h = match &law_obj {
                Law::Grid(d) => entropy(d),
                Law::Atoms(_) => f64::NEG_INFINITY,
            };
            ("entropy", json!({ "entropy": json_f64(h) }))
        }
        Scalar::FreeEntropy => {
            let chi = free_entropy(&law_obj);
            ("free-entropy", json!({ "free_entropy": json_f64(chi) }))
        }
        Scalar::Fisher => {
            let d = law_obj
                .as_grid()
                .map_err(|_| usage("Fisher information is undefined for atomic laws"))?;
            let f = fisher(d).map_err(core_err)?;
            ("fisher", json!({ "fisher": json_f64(f) }))
        }
        Scalar::FreeFisher => {
            let d = law_obj.as_grid().map_err(|_| {
                usage("free Fisher information is undefined for atomic laws")
            })?;
            let (primary, cubic) = free_fisher(d).map_err(core_err)?;
            let rel = (primary - cubic).abs() / cubic.abs().max(1e-300);
            (
                "free-fisher",
                json!({
                    "phi_conjugate": json_f64(primary),
                    "phi_cubic": json_f64(cubic),
                    "relative_gap": json_f64(rel),
                }),
            )
        }
    };
    let formats = out.formats()?;
    if formats.json {
        let mut report = json!({
            "command": name,
            "law": serde_json::to_value(&spec).expect("spec serializes"),
            "grid": grid_json(grid),
        });
        for (k, v) in fields.as_object().expect("fields are an object") {
            report[k] = v.clone();
        }
        let path = out_path(&out.out, "report.json").map_err(io_err)?;
        write_json(&path, &report).map_err(io_err)?;
    }
    let summary: Vec<String> = fields
        .as_object()
        .expect("fields are an object")
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    println!("{name}: {}", summary.join(" "));
    Ok(0)
}

fn run_flow(
    kind: Kind,
    law: &Path,
    time: f64,
    grid: &GridArgs,
    out: &OutArgs,
) -> Result<i32, Failure> {
    if !(time >= 0.0) {
        return Err(usage("--time must be nonnegative"));
    }
    let spec = load_spec(law)?;
    let grid = grid.resolve(Grid::default_working())?;
    let law_obj = law_from_spec(&spec, grid).map_err(core_err)?;
    let density = match kind {
        Kind::Classical => match heat_flow(&law_obj, time, grid).map_err(core_err)? {
            Law::Grid(d) => d,
            Law::Atoms(_) => {
                return Err(usage("classical flow of an atomic law at t = 0 has no density"))
            }
        },
        Kind::Free => semicircular_flow(&law_obj, time).map_err(core_err)?,
    };
    let formats = out.formats()?;
    if formats.csv {
        let rows: Vec<Vec<String>> = density
            .values
            .iter()
            .enumerate()
            .map(|(i, &p)| vec![fmt_f64(density.grid.node(i)), fmt_f64(p)])
            .collect();
        let path = out_path(&out.out, "density.csv").map_err(io_err)?;
        write_csv(&path, &["x", "density"], &rows).map_err(io_err)?;
    }
    if formats.json {
        let report = json!({
            "command": "flow",
            "kind": kind.name(),
            "law": serde_json::to_value(&spec).expect("spec serializes"),
            "grid": grid_json(grid),
            "time": time,
            "mean": json_f64(density.mean()),
            "variance": json_f64(density.variance()),
            "tolerances": {},
        });
        let path = out_path(&out.out, "report.json").map_err(io_err)?;
        write_json(&path, &report).map_err(io_err)?;
    }
    if formats.svg {
        let points: Vec<(f64, f64)> = density
            .values
            .iter()
            .enumerate()
            .map(|(i, &p)| (density.grid.node(i), p))
            .collect();
        let series = vec![Series { name: "density".to_string(), points }];
        let path = out_path(&out.out, "plot.svg").map_err(io_err)?;
        write_svg(&path, &format!("{} flow at t = {time}", kind.name()), &series)
            .map_err(io_err)?;
    }
    println!(
        "flow: kind={} t={} mean={} variance={}",
        kind.name(),
        time,
        fmt_f64(density.mean()),
        fmt_f64(density.variance())
    );
    Ok(0)
}
