//! Independent ground truth for small games: exhaustive grid brackets of the
//! game value and the textbook two-by-two solution.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::ZeroSumGame;
use crate::simplex::{for_each_grid_numerator, MixedStrategy, ProductPoint};

pub const MAX_ORACLE_STRATEGIES: usize = 4;
pub const MAX_ORACLE_MESH: u64 = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("closed form needs a 2x2 game, got {0}x{1}")]
    NotTwoByTwo(usize, usize),
    #[error("degenerate 2x2 game without a saddle point")]
    DegenerateGame,
}

/// `lower <= value <= upper`, from grid sweeps of both players' guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueBracket {
    pub lower: f64,
    pub upper: f64,
    pub mesh: u64,
}

impl ValueBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        self.lower - slack <= v && v <= self.upper + slack
    }
}

/// Max over grid `p` of `min_j M(p, b_j)` and min over grid `q` of
/// `max_i M(a_i, q)`.
pub fn grid_minimax(game: &ZeroSumGame, mesh: u64) -> Result<ValueBracket, OracleError> {
    let (m, n) = game.dims();
    if m > MAX_ORACLE_STRATEGIES || n > MAX_ORACLE_STRATEGIES {
        return Err(OracleError::LimitExceeded(format!(
            "{m}x{n} game, at most {MAX_ORACLE_STRATEGIES} strategies per player"
        )));
    }
    if mesh == 0 || mesh > MAX_ORACLE_MESH {
        return Err(OracleError::LimitExceeded(format!(
            "mesh {mesh}, expected 1..={MAX_ORACLE_MESH}"
        )));
    }
    let k = mesh as f64;

    let mut lower = f64::NEG_INFINITY;
    for_each_grid_numerator(m, mesh, |num| {
        let worst = (0..n)
            .map(|j| {
                (0..m)
                    .map(|i| num[i] as f64 / k * game.payoff(i, j))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        lower = lower.max(worst);
    });

    let mut upper = f64::INFINITY;
    for_each_grid_numerator(n, mesh, |num| {
        let best = (0..m)
            .map(|i| {
                (0..n)
                    .map(|j| game.payoff(i, j) * (num[j] as f64 / k))
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        upper = upper.min(best);
    });

    Ok(ValueBracket { lower, upper, mesh })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub value: f64,
    pub profile: ProductPoint,
    /// `true` when the solution is a pure saddle point.
    pub saddle: bool,
}

/// Solves `[[a, b], [c, d]]`: the first saddle point in row-major order if
/// there is one, otherwise the completely mixed solution.
pub fn closed_form_2x2(game: &ZeroSumGame) -> Result<ClosedForm, OracleError> {
    if game.dims() != (2, 2) {
        return Err(OracleError::NotTwoByTwo(game.rows(), game.cols()));
    }
    for i in 0..2 {
        for j in 0..2 {
            let v = game.payoff(i, j);
            let row_min = v <= game.payoff(i, 1 - j);
            let col_max = v >= game.payoff(1 - i, j);
            if row_min && col_max {
                return Ok(ClosedForm {
                    value: v,
                    profile: ProductPoint::new(MixedStrategy::pure(2, i), MixedStrategy::pure(2, j)),
                    saddle: true,
                });
            }
        }
    }
    let (a, b, c, d) = (
        game.payoff(0, 0),
        game.payoff(0, 1),
        game.payoff(1, 0),
        game.payoff(1, 1),
    );
    let denom = a - b - c + d;
    if denom == 0.0 {
        // a - b - c + d = 0 means one row weakly dominates, which always
        // yields a saddle above; reaching here needs non-finite payoffs.
        return Err(OracleError::DegenerateGame);
    }
    let p = (d - c) / denom;
    let q = (d - b) / denom;
    let profile = ProductPoint::from_weights(vec![p, 1.0 - p], vec![q, 1.0 - q])
        .map_err(|_| OracleError::DegenerateGame)?;
    Ok(ClosedForm {
        value: (a * d - b * c) / denom,
        profile,
        saddle: false,
    })
}
