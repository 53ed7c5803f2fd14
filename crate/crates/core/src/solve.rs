//! Solving a zero-sum game by refining approximate fixed points of its
//! excess-gain map until both excesses vanish to tolerance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    probe_sequential_uniqueness, residual, EngineError, RefinementTrace, Refinement,
    SearchParams, UniquenessReport,
};
use crate::game::ZeroSumGame;
use crate::simplex::{Norm, ProductPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Refinement stops once the schedule drops below this epsilon.
    pub epsilon: f64,
    /// Required distance between the last two iterates.
    pub delta: f64,
    pub max_stages: usize,
    pub search: SearchParams,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            delta: 1e-2,
            max_stages: 48,
            search: SearchParams {
                max_refinements: 40,
                ..SearchParams::default()
            },
        }
    }
}

impl SolverConfig {
    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.search.norm = norm;
        self
    }
}

/// A profile at the end of refinement together with its certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub profile: ProductPoint,
    /// `M(p, q)` at the profile.
    pub value: f64,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub v_a: f64,
    pub v_b: f64,
    pub duality_gap: f64,
    /// Fixed-point residual of the profile.
    pub residual: f64,
    /// Bound both excesses must meet.
    pub tolerance: f64,
    pub certified: bool,
    pub trace: RefinementTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotCertifiedReason {
    /// The search ran out of budget with an excess still above tolerance.
    ExcessAboveTolerance,
    /// The stage budget ended before the target epsilon.
    BudgetExhausted,
    /// A stage could not reach its epsilon within the refinement budget.
    NoApproxFixedPoint,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("equilibrium not certified ({reason:?}): lambda = {}, lambda' = {}, tolerance {}",
        result.lambda, result.lambda_prime, result.tolerance)]
    NotCertified {
        reason: NotCertifiedReason,
        result: Box<EquilibriumResult>,
    },
}

fn summarize(
    game: &ZeroSumGame,
    trace: RefinementTrace,
    norm: Norm,
) -> Result<EquilibriumResult, EngineError> {
    let profile = trace.final_point.clone();
    let excess = game.excess_lambda(&profile).expect("profile matches the game");
    let duality = game
        .check_duality(&profile.row, &profile.col)
        .expect("profile matches the game");
    let tolerance = game.certification_tolerance();
    Ok(EquilibriumResult {
        value: game.expected_payoff(&profile).expect("profile matches the game"),
        residual: residual(&game.gamma_map(), &profile, norm)?,
        lambda: excess.lambda,
        lambda_prime: excess.lambda_prime,
        v_a: duality.v_a,
        v_b: duality.v_b,
        duality_gap: duality.gap,
        certified: excess.lambda <= tolerance && excess.lambda_prime <= tolerance,
        tolerance,
        profile,
        trace,
    })
}

impl ZeroSumGame {
    /// Refines fixed points of [`ZeroSumGame::gamma_map`] along the halving
    /// schedule down to `config.epsilon`, then keeps halving until both
    /// excesses are within [`ZeroSumGame::certification_tolerance`].
    pub fn solve(&self, config: &SolverConfig) -> Result<EquilibriumResult, SolveError> {
        let map = self.gamma_map();
        let norm = config.search.norm;
        let mut refinement = Refinement::new(&map, &config.search, config.delta, config.max_stages)?;

        let fail = |err: EngineError, refinement: &Refinement<'_, _>, reason| {
            if refinement.stages() == 0 {
                return SolveError::Engine(err);
            }
            match summarize(self, refinement.trace(), norm) {
                Ok(result) => SolveError::NotCertified {
                    reason,
                    result: Box::new(result),
                },
                Err(e) => SolveError::Engine(e),
            }
        };
        let reason_for = |err: &EngineError| match err {
            EngineError::BudgetExhausted { .. } => Some(NotCertifiedReason::BudgetExhausted),
            EngineError::NoApproxFixedPointFound { .. } => {
                Some(NotCertifiedReason::NoApproxFixedPoint)
            }
            _ => None,
        };

        if let Err(err) = refinement.run_to(config.epsilon) {
            return Err(match reason_for(&err) {
                Some(reason) => fail(err, &refinement, reason),
                None => SolveError::Engine(err),
            });
        }
        loop {
            let last = refinement.last().expect("at least one stage ran");
            let excess = self.excess_lambda(&last.point).expect("dimensions match");
            let tolerance = self.certification_tolerance();
            if excess.lambda <= tolerance && excess.lambda_prime <= tolerance {
                return Ok(summarize(self, refinement.trace(), norm)?);
            }
            if let Err(err) = refinement.next_stage() {
                return Err(match reason_for(&err) {
                    Some(_) => fail(err, &refinement, NotCertifiedReason::ExcessAboveTolerance),
                    None => SolveError::Engine(err),
                });
            }
        }
    }

    /// Sequential-uniqueness probe of the excess-gain map.
    pub fn assumption1_probe(
        &self,
        delta: f64,
        epsilons: &[f64],
        mesh: u64,
        norm: Norm,
    ) -> Result<UniquenessReport, EngineError> {
        probe_sequential_uniqueness(&self.gamma_map(), delta, epsilons, mesh, norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Verdict;

    #[test]
    fn matching_pennies_lands_on_the_center() {
        let r = ZeroSumGame::matching_pennies()
            .solve(&SolverConfig::default())
            .unwrap();
        assert!(r.certified);
        assert_eq!(r.profile.row.weights(), &[0.5, 0.5]);
        assert_eq!(r.profile.col.weights(), &[0.5, 0.5]);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.duality_gap, 0.0);
    }

    #[test]
    fn saddle_game() {
        let g = ZeroSumGame::new(vec![vec![2.0, 1.0], vec![0.0, -1.0]]).unwrap();
        let r = g.solve(&SolverConfig::default()).unwrap();
        assert!(r.certified);
        assert!((r.value - 1.0).abs() < 1e-6);
        assert!((r.profile.row.weights()[0] - 1.0).abs() < 1e-2);
        assert!((r.profile.col.weights()[1] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn constant_game_value() {
        let g = ZeroSumGame::constant(3, 2, 2.5).unwrap();
        let r = g.solve(&SolverConfig::default()).unwrap();
        assert_eq!(r.value, 2.5);
        assert_eq!((r.lambda, r.lambda_prime), (0.0, 0.0));
    }

    #[test]
    fn tight_budget_reports_uncertified_result() {
        let g = ZeroSumGame::new(vec![vec![3.0, -1.0], vec![-2.0, 1.0]]).unwrap();
        let config = SolverConfig {
            max_stages: 2,
            ..SolverConfig::default()
        };
        match g.solve(&config) {
            Err(SolveError::NotCertified { reason, result }) => {
                assert_eq!(reason, NotCertifiedReason::BudgetExhausted);
                assert!(!result.certified || result.trace.iterates.len() == 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn probes() {
        let mp = ZeroSumGame::matching_pennies();
        let r = mp.assumption1_probe(0.1, &[1e-1, 1e-2, 1e-3], 100, Norm::Euclidean).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        let c = ZeroSumGame::constant(2, 2, 1.0).unwrap();
        let r = c.assumption1_probe(0.1, &[1e-1, 1e-2, 1e-3], 20, Norm::Euclidean).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
    }
}
