//! Standard simplices, their products, and the rational grids laid over them.
//!
//! A [`MixedStrategy`] is a validated point of a standard simplex and a
//! [`ProductPoint`] pairs one for the row player with one for the column
//! player. Grid points are built from integer numerators over a common mesh,
//! so every weight vector sums to one up to a single rounding per coordinate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance on `|sum - 1|` when validating weights.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Weights down to this value are accepted as nonnegative.
pub const NEGATIVE_SLACK: f64 = -1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error("mixed strategy needs at least one weight")]
    Empty,
    #[error("weight {index} is {value}, expected a finite nonnegative number")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 within {tolerance}")]
    NotNormalized { sum: f64, tolerance: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("invalid grid request: {0}")]
    InvalidGrid(String),
}

/// A probability vector over a finite set of pure strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MixedStrategy {
    weights: Vec<f64>,
}

impl MixedStrategy {
    /// Validates `weights` against [`SUM_TOLERANCE`]. Never renormalizes.
    pub fn new(weights: Vec<f64>) -> Result<Self, SimplexError> {
        Self::with_tolerance(weights, SUM_TOLERANCE)
    }

    pub fn with_tolerance(weights: Vec<f64>, tolerance: f64) -> Result<Self, SimplexError> {
        if weights.is_empty() {
            return Err(SimplexError::Empty);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= NEGATIVE_SLACK) || !value.is_finite() {
                return Err(SimplexError::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if !((sum - 1.0).abs() <= tolerance) {
            return Err(SimplexError::NotNormalized { sum, tolerance });
        }
        Ok(Self { weights })
    }

    /// The vertex putting all weight on `index`.
    pub fn pure(dim: usize, index: usize) -> Self {
        assert!(index < dim, "pure strategy {index} out of range for dimension {dim}");
        let mut weights = vec![0.0; dim];
        weights[index] = 1.0;
        Self { weights }
    }

    pub fn uniform(dim: usize) -> Self {
        assert!(dim > 0, "uniform strategy needs a positive dimension");
        Self::from_numerators(&vec![1; dim], dim as u64)
    }

    /// Builds `numerators / mesh`. The numerators must sum to `mesh`.
    pub fn from_numerators(numerators: &[u64], mesh: u64) -> Self {
        debug_assert_eq!(numerators.iter().sum::<u64>(), mesh);
        let denom = mesh as f64;
        Self {
            weights: numerators.iter().map(|&k| k as f64 / denom).collect(),
        }
    }

    /// Wraps weights that are nonnegative and normalized by construction.
    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Re-runs validation; used on outputs of user-supplied maps.
    pub fn is_valid(&self, tolerance: f64) -> bool {
        let sum: f64 = self.weights.iter().sum();
        !self.weights.is_empty()
            && self.weights.iter().all(|w| w.is_finite() && *w >= NEGATIVE_SLACK)
            && (sum - 1.0).abs() <= tolerance
    }
}

impl<'de> Deserialize<'de> for MixedStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let weights = Vec::<f64>::deserialize(deserializer)?;
        MixedStrategy::new(weights).map_err(serde::de::Error::custom)
    }
}

/// Validates a weight list with an explicit tolerance.
pub fn make_mixed(weights: &[f64], tolerance: f64) -> Result<MixedStrategy, SimplexError> {
    MixedStrategy::with_tolerance(weights.to_vec(), tolerance)
}

/// A profile: one mixed strategy per player, a point of `P x Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub row: MixedStrategy,
    pub col: MixedStrategy,
}

impl ProductPoint {
    pub fn new(row: MixedStrategy, col: MixedStrategy) -> Self {
        Self { row, col }
    }

    /// Convenience constructor validating both factors.
    pub fn from_weights(row: Vec<f64>, col: Vec<f64>) -> Result<Self, SimplexError> {
        Ok(Self {
            row: MixedStrategy::new(row)?,
            col: MixedStrategy::new(col)?,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.row.dim(), self.col.dim())
    }

    /// Row weights followed by column weights.
    pub fn coordinates(&self) -> impl Iterator<Item = f64> + '_ {
        self.row.weights.iter().chain(self.col.weights.iter()).copied()
    }

    pub fn is_valid(&self, tolerance: f64) -> bool {
        self.row.is_valid(tolerance) && self.col.is_valid(tolerance)
    }
}

impl fmt::Display for ProductPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.row.weights, self.col.weights)
    }
}

/// Norm used to measure distances on `P x Q`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// Euclidean norm of the concatenated coordinates.
    #[default]
    Euclidean,
    /// Largest absolute coordinate difference.
    Max,
}

impl Norm {
    pub fn as_str(self) -> &'static str {
        match self {
            Norm::Euclidean => "euclidean",
            Norm::Max => "max",
        }
    }

    /// Combines per-coordinate differences into a length.
    pub fn length(self, diffs: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::Max => diffs.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(Norm::Euclidean),
            "max" => Ok(Norm::Max),
            other => Err(format!("unknown norm `{other}` (expected euclidean or max)")),
        }
    }
}

fn check_same_dims(x: &ProductPoint, y: &ProductPoint) -> Result<(), SimplexError> {
    if x.dims() != y.dims() {
        return Err(SimplexError::DimensionMismatch {
            expected: format!("{:?}", x.dims()),
            found: format!("{:?}", y.dims()),
        });
    }
    Ok(())
}

pub fn distance(x: &ProductPoint, y: &ProductPoint, norm: Norm) -> Result<f64, SimplexError> {
    check_same_dims(x, y)?;
    Ok(distance_unchecked(x, y, norm))
}

pub(crate) fn distance_unchecked(x: &ProductPoint, y: &ProductPoint, norm: Norm) -> f64 {
    norm.length(x.coordinates().zip(y.coordinates()).map(|(a, b)| a - b))
}

/// Number of mesh-`k` grid points on a simplex with `dim` vertices,
/// `C(k + dim - 1, dim - 1)`. Saturates at `u64::MAX`.
pub fn grid_size(dim: usize, mesh: u64) -> u64 {
    if dim == 0 {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 1..dim as u128 {
        acc = acc * (mesh as u128 + i) / i;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `visit` on every composition of `mesh` into `dim` nonnegative parts,
/// in lexicographic order.
pub fn for_each_grid_numerator(dim: usize, mesh: u64, mut visit: impl FnMut(&[u64])) {
    if dim == 0 {
        return;
    }
    let mut buf = vec![0u64; dim];
    fn rec(buf: &mut [u64], pos: usize, remaining: u64, visit: &mut impl FnMut(&[u64])) {
        if pos + 1 == buf.len() {
            buf[pos] = remaining;
            visit(buf);
            return;
        }
        for k in 0..=remaining {
            buf[pos] = k;
            rec(buf, pos + 1, remaining - k, visit);
        }
    }
    rec(&mut buf, 0, mesh, &mut visit);
}

/// All numerator lists of the mesh-`k` grid, lexicographically ordered.
pub fn grid_numerators(dim: usize, mesh: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::with_capacity(grid_size(dim, mesh).min(1 << 24) as usize);
    for_each_grid_numerator(dim, mesh, |n| out.push(n.to_vec()));
    out
}

/// Every point of the simplex whose weights are multiples of `1/mesh`.
pub fn grid_points(dim: usize, mesh: u64) -> Result<Vec<MixedStrategy>, SimplexError> {
    if dim == 0 || mesh == 0 {
        return Err(SimplexError::InvalidGrid(format!(
            "dimension and mesh must be positive (got dim={dim}, mesh={mesh})"
        )));
    }
    Ok(grid_numerators(dim, mesh)
        .iter()
        .map(|n| MixedStrategy::from_numerators(n, mesh))
        .collect())
}

/// Mesh-`k` numerator lists whose points lie within `radius` of `weights` in
/// every coordinate, optionally confined to the face spanned by `support`.
/// Lexicographic order. Used to seed local neighbourhoods; the caller applies
/// the exact distance filter.
pub(crate) fn numerators_near(
    weights: &[f64],
    mesh: u64,
    radius: f64,
    support: Option<&[bool]>,
) -> Vec<Vec<u64>> {
    let k = mesh as f64;
    // One part in 1e9 of a cell absorbs rounding in the bounds.
    let slack = 1e-9;
    let bounds: Vec<(u64, u64)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if support.is_some_and(|s| !s[i]) {
                return (0, 0);
            }
            let lo = ((w - radius) * k - slack).ceil().max(0.0);
            let hi = ((w + radius) * k + slack).floor().min(k);
            (lo as u64, hi as u64)
        })
        .collect();

    let dim = weights.len();
    let mut out = Vec::new();
    if bounds.iter().any(|&(lo, hi)| lo > hi) {
        return out;
    }
    // Suffix sums of the bounds prune partial assignments that cannot close.
    let mut min_tail = vec![0u64; dim + 1];
    let mut max_tail = vec![0u64; dim + 1];
    for i in (0..dim).rev() {
        min_tail[i] = min_tail[i + 1] + bounds[i].0;
        max_tail[i] = max_tail[i + 1] + bounds[i].1;
    }
    let mut buf = vec![0u64; dim];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        buf: &mut [u64],
        pos: usize,
        remaining: u64,
        bounds: &[(u64, u64)],
        min_tail: &[u64],
        max_tail: &[u64],
        out: &mut Vec<Vec<u64>>,
    ) {
        if remaining < min_tail[pos] || remaining > max_tail[pos] {
            return;
        }
        if pos + 1 == buf.len() {
            buf[pos] = remaining;
            out.push(buf.to_vec());
            return;
        }
        let (lo, hi) = bounds[pos];
        for v in lo..=hi.min(remaining) {
            buf[pos] = v;
            rec(buf, pos + 1, remaining - v, bounds, min_tail, max_tail, out);
        }
    }
    rec(&mut buf, 0, mesh, &bounds, &min_tail, &max_tail, &mut out);
    out
}

/// Mesh-`mesh` product grid points within `radius` of `x`, in lexicographic
/// order of `(row numerators, col numerators)`, followed by `x` itself when it
/// is not a grid point.
pub fn local_grid(
    x: &ProductPoint,
    radius: f64,
    mesh: u64,
    norm: Norm,
) -> Result<Vec<ProductPoint>, SimplexError> {
    if mesh == 0 || !(radius > 0.0) {
        return Err(SimplexError::InvalidGrid(format!(
            "need radius > 0 and mesh > 0 (got radius={radius}, mesh={mesh})"
        )));
    }
    let rows = numerators_near(x.row.weights(), mesh, radius, None);
    let cols = numerators_near(x.col.weights(), mesh, radius, None);
    let mut out = Vec::new();
    let mut contains_x = false;
    for r in &rows {
        let row = MixedStrategy::from_numerators(r, mesh);
        for c in &cols {
            let candidate = ProductPoint::new(row.clone(), MixedStrategy::from_numerators(c, mesh));
            let d = distance_unchecked(x, &candidate, norm);
            if d <= radius {
                contains_x |= d == 0.0 && candidate == *x;
                out.push(candidate);
            }
        }
    }
    if !contains_x {
        out.push(x.clone());
    }
    Ok(out)
}
