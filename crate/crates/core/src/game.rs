//! Two-player zero-sum games in mixed strategies.
//!
//! Player A picks a row, player B a column; entry `(i, j)` of the matrix is
//! A's payoff and B receives its negation. Besides the payoff sums this
//! module provides the excess-gain map [`ZeroSumGame::gamma`], whose fixed
//! points are exactly the profiles where no pure strategy beats the current
//! expected payoff for either player.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::engine::{MapError, SelfMap};
use crate::simplex::{MixedStrategy, ProductPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("payoff matrix is empty")]
    Empty,
    #[error("ragged payoff matrix: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("payoff ({row}, {col}) is not a finite number")]
    NonFinite { row: usize, col: usize },
    #[error("strategy dimensions {found:?} do not match the {expected:?} game")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("pure strategy index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Row player's payoff matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumGame {
    rows: usize,
    cols: usize,
    payoffs: Vec<f64>,
}

impl Serialize for ZeroSumGame {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl ZeroSumGame {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(GameError::Empty);
        }
        let mut payoffs = Vec::with_capacity(m * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(GameError::Ragged {
                    row: i,
                    expected: n,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(GameError::NonFinite { row: i, col: j });
            }
            payoffs.extend(row);
        }
        Ok(Self {
            rows: m,
            cols: n,
            payoffs,
        })
    }

    /// The two-by-two matching-pennies game: A wins 1 on a match, loses 1 otherwise.
    pub fn matching_pennies() -> Self {
        Self::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).expect("valid")
    }

    pub fn constant(m: usize, n: usize, c: f64) -> Result<Self, GameError> {
        Self::new(vec![vec![c; n]; m])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn payoff(&self, i: usize, j: usize) -> f64 {
        self.payoffs[i * self.cols + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.payoffs[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.payoffs.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.payoffs.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// The game with payoffs `scale * M + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self, GameError> {
        Self::new(
            self.to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|v| scale * v + shift).collect())
                .collect(),
        )
    }

    /// Threshold below which both excesses certify an equilibrium, scaled by
    /// the payoff magnitude.
    pub fn certification_tolerance(&self) -> f64 {
        1e-6 * (1.0 + self.max_abs())
    }

    fn check_profile(&self, x: &ProductPoint) -> Result<(), GameError> {
        if x.dims() != self.dims() {
            return Err(GameError::DimensionMismatch {
                expected: self.dims(),
                found: x.dims(),
            });
        }
        Ok(())
    }

    fn check_row_strategy(&self, p: &MixedStrategy) -> Result<(), GameError> {
        if p.dim() != self.rows {
            return Err(GameError::DimensionMismatch {
                expected: self.dims(),
                found: (p.dim(), self.cols),
            });
        }
        Ok(())
    }

    fn check_col_strategy(&self, q: &MixedStrategy) -> Result<(), GameError> {
        if q.dim() != self.cols {
            return Err(GameError::DimensionMismatch {
                expected: self.dims(),
                found: (self.rows, q.dim()),
            });
        }
        Ok(())
    }

    /// `M(p, q) = sum_i sum_j p_i M(a_i, b_j) q_j`.
    pub fn expected_payoff(&self, x: &ProductPoint) -> Result<f64, GameError> {
        self.check_profile(x)?;
        Ok(self.bilinear(x.row.weights(), x.col.weights()))
    }

    fn bilinear(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, &pi) in p.iter().enumerate() {
            for (&mij, &qj) in self.row(i).iter().zip(q) {
                total += pi * mij * qj;
            }
        }
        total
    }

    /// `M(a_i, q)` for every row `i`.
    fn row_payoffs(&self, q: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(q).map(|(m, q)| m * q).sum())
            .collect()
    }

    /// `M(p, b_j)` for every column `j`.
    fn col_payoffs(&self, p: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| p[i] * self.payoff(i, j)).sum())
            .collect()
    }

    /// `M(a_i, q)`: payoff of pure row `i` against `q`.
    pub fn payoff_row_pure(&self, i: usize, q: &MixedStrategy) -> Result<f64, GameError> {
        if i >= self.rows {
            return Err(GameError::IndexOutOfRange {
                index: i,
                len: self.rows,
            });
        }
        self.check_col_strategy(q)?;
        Ok(self.row(i).iter().zip(q.weights()).map(|(m, q)| m * q).sum())
    }

    /// `M(p, b_j)`: payoff of `p` against pure column `j`.
    pub fn payoff_col_pure(&self, p: &MixedStrategy, j: usize) -> Result<f64, GameError> {
        if j >= self.cols {
            return Err(GameError::IndexOutOfRange {
                index: j,
                len: self.cols,
            });
        }
        self.check_row_strategy(p)?;
        Ok(p.weights()
            .iter()
            .enumerate()
            .map(|(i, pi)| pi * self.payoff(i, j))
            .sum())
    }

    /// `v_A(p) = inf_q M(p, q)`. Bilinearity puts the infimum at a vertex, so
    /// this is the minimum over the columns.
    pub fn guaranteed_payoff_a(&self, p: &MixedStrategy) -> Result<f64, GameError> {
        self.check_row_strategy(p)?;
        Ok(self
            .col_payoffs(p.weights())
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }

    /// `v_B(q) = sup_p M(p, q)`, the maximum over the rows.
    pub fn guaranteed_payoff_b(&self, q: &MixedStrategy) -> Result<f64, GameError> {
        self.check_col_strategy(q)?;
        Ok(self
            .row_payoffs(q.weights())
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Total positive excess of the pure rows over `M(p, q)` (`lambda`) and of
    /// `M(p, q)` over the pure columns (`lambda_prime`).
    pub fn excess_lambda(&self, x: &ProductPoint) -> Result<Excess, GameError> {
        self.check_profile(x)?;
        let (row_ex, col_ex) = self.excesses(x.row.weights(), x.col.weights());
        Ok(Excess {
            lambda: row_ex.iter().sum(),
            lambda_prime: col_ex.iter().sum(),
        })
    }

    fn excesses(&self, p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let value = self.bilinear(p, q);
        let row_ex = self
            .row_payoffs(q)
            .into_iter()
            .map(|u| (u - value).max(0.0))
            .collect();
        let col_ex = self
            .col_payoffs(p)
            .into_iter()
            .map(|w| (value - w).max(0.0))
            .collect();
        (row_ex, col_ex)
    }

    /// `v_B(q) - v_A(p)`, never negative.
    pub fn check_duality(
        &self,
        p: &MixedStrategy,
        q: &MixedStrategy,
    ) -> Result<Duality, GameError> {
        let v_a = self.guaranteed_payoff_a(p)?;
        let v_b = self.guaranteed_payoff_b(q)?;
        Ok(Duality {
            v_a,
            v_b,
            gap: v_b - v_a,
        })
    }

    /// One step of the excess-gain map: each pure strategy gains its positive
    /// excess and the weights are renormalized by `1 + total excess`.
    pub fn gamma(&self, x: &ProductPoint) -> Result<ProductPoint, GameError> {
        self.check_profile(x)?;
        let (p, q) = (x.row.weights(), x.col.weights());
        let (row_ex, col_ex) = self.excesses(p, q);
        Ok(ProductPoint::new(
            MixedStrategy::from_raw(boost(p, &row_ex)),
            MixedStrategy::from_raw(boost(q, &col_ex)),
        ))
    }

    pub fn gamma_map(&self) -> GammaMap<'_> {
        GammaMap { game: self }
    }
}

fn boost(weights: &[f64], excess: &[f64]) -> Vec<f64> {
    let denom = 1.0 + excess.iter().sum::<f64>();
    weights
        .iter()
        .zip(excess)
        .map(|(w, e)| (w + e) / denom)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Excess {
    pub lambda: f64,
    pub lambda_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Duality {
    pub v_a: f64,
    pub v_b: f64,
    pub gap: f64,
}

/// [`ZeroSumGame::gamma`] as a [`SelfMap`].
#[derive(Debug, Clone, Copy)]
pub struct GammaMap<'g> {
    game: &'g ZeroSumGame,
}

impl SelfMap for GammaMap<'_> {
    fn dims(&self) -> (usize, usize) {
        self.game.dims()
    }

    fn evaluate(&self, x: &ProductPoint) -> Result<ProductPoint, MapError> {
        self.game
            .gamma(x)
            .map_err(|e| MapError::Failed(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(row: &[f64], col: &[f64]) -> ProductPoint {
        ProductPoint::from_weights(row.to_vec(), col.to_vec()).unwrap()
    }

    fn mixed(w: &[f64]) -> MixedStrategy {
        MixedStrategy::new(w.to_vec()).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert_eq!(ZeroSumGame::new(vec![]), Err(GameError::Empty));
        assert_eq!(ZeroSumGame::new(vec![vec![]]), Err(GameError::Empty));
        let ragged = ZeroSumGame::new(vec![vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(ragged.to_string().starts_with("ragged payoff matrix"));
        assert_eq!(
            ZeroSumGame::new(vec![vec![1.0, f64::INFINITY]]),
            Err(GameError::NonFinite { row: 0, col: 1 })
        );
    }

    #[test]
    fn expected_payoff_examples() {
        let g = ZeroSumGame::matching_pennies();
        assert_eq!(g.expected_payoff(&pp(&[1.0, 0.0], &[1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(g.expected_payoff(&pp(&[0.5, 0.5], &[0.5, 0.5])).unwrap(), 0.0);
        let x = pp(&[0.75, 0.25], &[0.75, 0.25]);
        // closed form (2p - 1)(2q - 1)
        assert!((g.expected_payoff(&x).unwrap() - 0.25).abs() < 1e-15);
        assert!(g.expected_payoff(&pp(&[1.0], &[1.0, 0.0])).is_err());
    }

    #[test]
    fn pure_payoffs() {
        let g = ZeroSumGame::matching_pennies();
        let q = mixed(&[0.75, 0.25]);
        assert_eq!(g.payoff_row_pure(0, &q).unwrap(), 0.5);
        assert_eq!(g.payoff_row_pure(1, &q).unwrap(), -0.5);
        assert!(matches!(
            g.payoff_row_pure(2, &q),
            Err(GameError::IndexOutOfRange { index: 2, len: 2 })
        ));
        let g = ZeroSumGame::new(vec![vec![2.0, 1.0, 7.0], vec![0.0, -1.0, 3.0]]).unwrap();
        for j in 0..3 {
            let e = MixedStrategy::pure(3, j);
            assert_eq!(g.payoff_row_pure(1, &e).unwrap(), g.payoff(1, j));
            assert_eq!(
                g.payoff_col_pure(&MixedStrategy::pure(2, 0), j).unwrap(),
                g.payoff(0, j)
            );
        }
        assert!(g.payoff_col_pure(&MixedStrategy::pure(2, 0), 3).is_err());
    }

    #[test]
    fn guaranteed_payoffs() {
        let g = ZeroSumGame::matching_pennies();
        assert_eq!(g.guaranteed_payoff_a(&mixed(&[0.5, 0.5])).unwrap(), 0.0);
        assert_eq!(g.guaranteed_payoff_a(&mixed(&[1.0, 0.0])).unwrap(), -1.0);
        let c = ZeroSumGame::constant(2, 3, 4.5).unwrap();
        assert_eq!(c.guaranteed_payoff_a(&mixed(&[0.3, 0.7])).unwrap(), 4.5);
        assert_eq!(c.guaranteed_payoff_b(&mixed(&[0.2, 0.3, 0.5])).unwrap(), 4.5);
    }

    #[test]
    fn gamma_examples() {
        let g = ZeroSumGame::matching_pennies();
        let center = pp(&[0.5, 0.5], &[0.5, 0.5]);
        assert_eq!(g.gamma(&center).unwrap(), center);

        let corner = g.gamma(&pp(&[1.0, 0.0], &[1.0, 0.0])).unwrap();
        assert_eq!(corner.row.weights(), &[1.0, 0.0]);
        assert!((corner.col.weights()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((corner.col.weights()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn excess_examples() {
        let g = ZeroSumGame::matching_pennies();
        let e = g.excess_lambda(&pp(&[0.5, 0.5], &[0.5, 0.5])).unwrap();
        assert_eq!((e.lambda, e.lambda_prime), (0.0, 0.0));
        let e = g.excess_lambda(&pp(&[1.0, 0.0], &[1.0, 0.0])).unwrap();
        assert_eq!((e.lambda, e.lambda_prime), (0.0, 2.0));
        let c = ZeroSumGame::constant(3, 2, -1.0).unwrap();
        let e = c.excess_lambda(&pp(&[0.2, 0.3, 0.5], &[0.9, 0.1])).unwrap();
        assert_eq!((e.lambda, e.lambda_prime), (0.0, 0.0));
    }

    #[test]
    fn duality_examples() {
        let g = ZeroSumGame::matching_pennies();
        let d = g.check_duality(&mixed(&[0.5, 0.5]), &mixed(&[0.5, 0.5])).unwrap();
        assert_eq!(d.gap, 0.0);
        let d = g.check_duality(&mixed(&[1.0, 0.0]), &mixed(&[1.0, 0.0])).unwrap();
        assert_eq!((d.v_a, d.v_b, d.gap), (-1.0, 1.0, 2.0));
        let c = ZeroSumGame::constant(2, 2, 3.0).unwrap();
        let d = c.check_duality(&mixed(&[0.1, 0.9]), &mixed(&[0.6, 0.4])).unwrap();
        assert_eq!(d.gap, 0.0);
    }

    #[test]
    fn serializes_as_rows() {
        let g = ZeroSumGame::new(vec![vec![1.5, -2.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(g.to_rows(), vec![vec![1.5, -2.0], vec![0.0, 3.0]]);
        assert_eq!(g.certification_tolerance(), 1e-6 * 4.0);
    }
}
