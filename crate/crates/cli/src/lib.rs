//! Subcommands of the `fixgame` binary. Each returns what it would print and
//! the exit code, so they can be driven in-process.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fixgame::{
    closed_form_2x2, grid_minimax, residual, EquilibriumResult, Norm, OracleError,
    ProductPoint, SolveError, SolverConfig, UniquenessReport, ValueBracket, Verdict, ZeroSumGame,
};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CERTIFIED: i32 = 3;
pub const EXIT_VIOLATED: i32 = 4;

/// Largest deviation `verify` accepts between a report and its recomputation.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

/// Exact numerators need `mesh * 2^refinements <= 2^53`.
const MANTISSA_BITS: u32 = 53;

#[derive(Debug, Parser)]
#[command(name = "fixgame", version, about = "Zero-sum games solved through approximate fixed points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a game and print a self-verifying report.
    Solve(SolveArgs),
    /// Probe whether approximate fixed points cluster as epsilon shrinks.
    Probe(ProbeArgs),
    /// Bracket the game value by exhaustive grid search (up to 4x4).
    Oracle(OracleArgs),
    /// Solve matching pennies and compare with the oracle.
    Demo,
    /// Recompute a report's numbers from its profile.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub game: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub delta: f64,
    /// Mesh of the initial grid.
    #[arg(long, default_value_t = 16)]
    pub mesh: u64,
    #[arg(long, default_value_t = Norm::Euclidean)]
    pub norm: Norm,
    /// Stages of the epsilon-halving schedule allowed.
    #[arg(long, default_value_t = 48)]
    pub max_stages: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    pub game: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3])]
    pub eps_list: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub mesh: u64,
    #[arg(long, default_value_t = Norm::Euclidean)]
    pub norm: Norm,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    pub game: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub mesh: u64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    pub game: PathBuf,
    pub report: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub payoffs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub mesh: u64,
    pub norm: Norm,
    pub max_stages: usize,
    pub max_refinements: u32,
    pub face_tracks: usize,
    pub schedule: String,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub profile: ProductPoint,
    pub value: f64,
    pub lambda: f64,
    pub lambda_prime: f64,
    #[serde(rename = "v_A")]
    pub v_a: f64,
    #[serde(rename = "v_B")]
    pub v_b: f64,
    pub duality_gap: f64,
    pub residual: f64,
    pub converged: bool,
    pub certified: bool,
    pub stages: usize,
    pub epsilon_schedule: Vec<f64>,
    pub cauchy_moduli: Vec<f64>,
    pub config: ReportConfig,
}

#[derive(Debug, Clone, Serialize)]
struct ProbeOutput {
    #[serde(flatten)]
    report: UniquenessReport,
    inconclusive: bool,
}

#[derive(Debug, Clone, Serialize)]
struct OracleOutput {
    #[serde(flatten)]
    bracket: ValueBracket,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct DemoOutput {
    solver_value: f64,
    profile: ProductPoint,
    certified: bool,
    oracle: ValueBracket,
    oracle_value: f64,
    difference: f64,
    ok: bool,
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    field: &'static str,
    reported: f64,
    recomputed: f64,
    deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
struct VerifyOutput {
    ok: bool,
    max_deviation: f64,
    checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn json(value: &impl Serialize, code: i32) -> Self {
        let mut stdout = serde_json::to_string_pretty(value).expect("reports serialize");
        stdout.push('\n');
        Self {
            stdout,
            stderr: String::new(),
            code,
        }
    }

    fn error(message: impl Display, code: i32) -> Self {
        Self {
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
            code,
        }
    }

    fn warn(mut self, message: impl Display) -> Self {
        self.stderr.push_str(&format!("warning: {message}\n"));
        self
    }
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Probe(args) => cmd_probe(&args),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Demo => cmd_demo(),
        Command::Verify(args) => cmd_verify(&args),
    }
}

pub fn parse_game(text: &str) -> Result<(ZeroSumGame, Option<String>), String> {
    let file: GameFile = serde_json::from_str(text).map_err(|e| format!("malformed game file: {e}"))?;
    let game = ZeroSumGame::new(file.payoffs).map_err(|e| e.to_string())?;
    Ok((game, file.name))
}

pub fn load_game(path: &Path) -> Result<(ZeroSumGame, Option<String>), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_game(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn solver_config(args: &SolveArgs) -> SolverConfig {
    let mut config = SolverConfig::default().with_norm(args.norm);
    config.epsilon = args.eps;
    config.delta = args.delta;
    config.max_stages = args.max_stages;
    config.search.base_mesh = args.mesh;
    let headroom = MANTISSA_BITS.saturating_sub(64 - args.mesh.max(1).leading_zeros());
    config.search.max_refinements = config.search.max_refinements.min(headroom);
    config
}

fn report(name: Option<String>, r: EquilibriumResult, config: &SolverConfig) -> Report {
    Report {
        name,
        converged: r.certified && r.trace.converged,
        certified: r.certified,
        profile: r.profile,
        value: r.value,
        lambda: r.lambda,
        lambda_prime: r.lambda_prime,
        v_a: r.v_a,
        v_b: r.v_b,
        duality_gap: r.duality_gap,
        residual: r.residual,
        stages: r.trace.iterates.len(),
        epsilon_schedule: r.trace.epsilon_schedule,
        cauchy_moduli: r.trace.cauchy_moduli,
        config: ReportConfig {
            epsilon: config.epsilon,
            delta: config.delta,
            mesh: config.search.base_mesh,
            norm: config.search.norm,
            max_stages: config.max_stages,
            max_refinements: config.search.max_refinements,
            face_tracks: config.search.face_tracks,
            schedule: "eps_k = 2^-k, k = 0, 1, ...".into(),
            tolerance: r.tolerance,
        },
    }
}

/// Solves the game and reports; `Err` carries a diagnostic for bad input.
pub fn solve_report(
    game: &ZeroSumGame,
    name: Option<String>,
    config: &SolverConfig,
) -> Result<Report, String> {
    match game.solve(config) {
        Ok(r) => Ok(report(name, r, config)),
        Err(SolveError::NotCertified { result, .. }) => Ok(report(name, *result, config)),
        Err(SolveError::Engine(e)) => Err(e.to_string()),
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Outcome {
    let (game, name) = match load_game(&args.game) {
        Ok(g) => g,
        Err(e) => return Outcome::error(e, EXIT_INPUT),
    };
    let config = solver_config(args);
    match solve_report(&game, name, &config) {
        Ok(r) if r.converged => Outcome::json(&r, EXIT_OK),
        Ok(r) => {
            let why = if r.certified {
                "last two iterates are farther apart than delta"
            } else {
                "equilibrium not certified"
            };
            Outcome::json(&r, EXIT_NOT_CERTIFIED).warn(why)
        }
        Err(e) => Outcome::error(e, EXIT_INPUT),
    }
}

pub fn cmd_probe(args: &ProbeArgs) -> Outcome {
    let (game, _) = match load_game(&args.game) {
        Ok(g) => g,
        Err(e) => return Outcome::error(e, EXIT_INPUT),
    };
    match game.assumption1_probe(args.delta, &args.eps_list, args.mesh, args.norm) {
        Ok(report) => {
            let code = if report.verdict == Verdict::Violated {
                EXIT_VIOLATED
            } else {
                EXIT_OK
            };
            let inconclusive = report.verdict == Verdict::Inconclusive;
            Outcome::json(&ProbeOutput { report, inconclusive }, code)
        }
        Err(e) => Outcome::error(e, EXIT_INPUT),
    }
}

pub fn cmd_oracle(args: &OracleArgs) -> Outcome {
    let (game, _) = match load_game(&args.game) {
        Ok(g) => g,
        Err(e) => return Outcome::error(e, EXIT_INPUT),
    };
    let bracket = match grid_minimax(&game, args.mesh) {
        Ok(b) => b,
        Err(e) => return Outcome::error(e, EXIT_INPUT),
    };
    let closed_form = match closed_form_2x2(&game) {
        Ok(cf) => Some(cf.value),
        Err(OracleError::NotTwoByTwo(..)) => None,
        Err(e) => return Outcome::error(e, EXIT_INPUT),
    };
    Outcome::json(&OracleOutput { bracket, closed_form }, EXIT_OK)
}

pub fn cmd_demo() -> Outcome {
    let game = ZeroSumGame::matching_pennies();
    let result = match game.solve(&SolverConfig::default()) {
        Ok(r) => r,
        Err(SolveError::NotCertified { result, .. }) => *result,
        Err(e) => return Outcome::error(e, EXIT_NOT_CERTIFIED),
    };
    let oracle = grid_minimax(&game, 200).expect("matching pennies is within oracle limits");
    let oracle_value = 0.5 * (oracle.lower + oracle.upper);
    let difference = (result.value - oracle_value).abs();
    let ok = difference <= 1e-2;
    let out = DemoOutput {
        solver_value: result.value,
        profile: result.profile,
        certified: result.certified,
        oracle,
        oracle_value,
        difference,
        ok,
    };
    Outcome::json(&out, if ok { EXIT_OK } else { EXIT_NOT_CERTIFIED })
}

/// Recomputes the numbers of `report` from its profile.
fn verify(game: &ZeroSumGame, report: &Report) -> Result<VerifyOutput, Box<dyn std::error::Error>> {
    let x = &report.profile;
    let excess = game.excess_lambda(x)?;
    let duality = game.check_duality(&x.row, &x.col)?;
    let recomputed = [
        ("residual", report.residual, residual(&game.gamma_map(), x, report.config.norm)?),
        ("value", report.value, game.expected_payoff(x)?),
        ("lambda", report.lambda, excess.lambda),
        ("lambda_prime", report.lambda_prime, excess.lambda_prime),
        ("v_A", report.v_a, duality.v_a),
        ("v_B", report.v_b, duality.v_b),
        ("duality_gap", report.duality_gap, duality.gap),
    ];
    let checks: Vec<Check> = recomputed
        .into_iter()
        .map(|(field, reported, recomputed)| Check {
            field,
            reported,
            recomputed,
            deviation: (reported - recomputed).abs(),
        })
        .collect();
    let max_deviation = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
    Ok(VerifyOutput {
        ok: checks.iter().all(|c| c.deviation <= VERIFY_TOLERANCE),
        max_deviation,
        checks,
    })
}

pub fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let (game, _) = match load_game(&args.game) {
        Ok(g) => g,
        Err(e) => return Outcome::error(e, EXIT_INPUT),
    };
    let report: Report = match std::fs::read_to_string(&args.report)
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
    {
        Ok(r) => r,
        Err(e) => return Outcome::error(format!("{}: {e}", args.report.display()), EXIT_INPUT),
    };
    if report.profile.dims() != game.dims() {
        return Outcome::error("report profile does not match the game", EXIT_INPUT);
    }
    match verify(&game, &report) {
        Ok(out) => {
            let code = if out.ok { EXIT_OK } else { EXIT_NOT_CERTIFIED };
            Outcome::json(&out, code)
        }
        Err(e) => Outcome::error(e, EXIT_INPUT),
    }
}
