//! Approximate fixed points of self-maps of `P x Q`, their refinement into a
//! Cauchy sequence, and an empirical probe of sequential uniqueness.
//!
//! The search evaluates the fixed-point residual `|x - F(x)|` on a full
//! product grid, then repeatedly zooms in around the best grid point with a
//! doubled mesh and a halved radius. Every returned point is certified by
//! direct residual evaluation; when the budget runs out the caller gets an
//! explicit error carrying the best incumbent instead of a guess.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::simplex::{
    distance_unchecked, grid_numerators, grid_size, numerators_near, MixedStrategy, Norm,
    ProductPoint, SimplexError,
};

/// Largest product grid a single sweep will evaluate.
pub const MAX_SWEEP_POINTS: u64 = 50_000_000;

/// Meshes stay below 2^53 so numerators convert to `f64` exactly.
const MAX_MESH: u64 = 1 << 53;

/// Slack used when pruning pairs by the triangle inequality.
const PRUNE_SLACK: f64 = 1e-12;

/// Re-centred sweeps allowed per refinement.
const MAX_RECENTRES: usize = 16;

/// Two diameters closer than this count as stagnated.
pub const STAGNATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("map evaluation failed: {0}")]
    Failed(String),
    #[error("map returned an invalid point: {0}")]
    InvalidOutput(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid of {points} points exceeds the sweep limit of {limit}")]
    GridTooLarge { points: u64, limit: u64 },
    #[error(
        "no point with residual below {epsilon} after {refinements} refinements (best residual {})",
        best.residual
    )]
    NoApproxFixedPointFound {
        epsilon: f64,
        refinements: u32,
        best: Box<ApproxFixedPoint>,
    },
    #[error("stage budget of {stages} exhausted before reaching the target epsilon")]
    BudgetExhausted {
        stages: usize,
        trace: Box<RefinementTrace>,
    },
}

/// A deterministic, side-effect-free self-map of `P x Q`.
pub trait SelfMap: Sync {
    /// `(m, n)`: number of row and column pure strategies.
    fn dims(&self) -> (usize, usize);

    fn evaluate(&self, x: &ProductPoint) -> Result<ProductPoint, MapError>;
}

impl<T: SelfMap + ?Sized> SelfMap for &T {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }

    fn evaluate(&self, x: &ProductPoint) -> Result<ProductPoint, MapError> {
        (**self).evaluate(x)
    }
}

/// Adapts a closure into a [`SelfMap`].
pub struct FnMap<F> {
    dims: (usize, usize),
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&ProductPoint) -> Result<ProductPoint, MapError> + Sync,
{
    pub fn new(m: usize, n: usize, f: F) -> Self {
        Self { dims: (m, n), f }
    }
}

impl<F> SelfMap for FnMap<F>
where
    F: Fn(&ProductPoint) -> Result<ProductPoint, MapError> + Sync,
{
    fn dims(&self) -> (usize, usize) {
        self.dims
    }

    fn evaluate(&self, x: &ProductPoint) -> Result<ProductPoint, MapError> {
        (self.f)(x)
    }
}

/// Every point is fixed.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMap {
    pub m: usize,
    pub n: usize,
}

impl SelfMap for IdentityMap {
    fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn evaluate(&self, x: &ProductPoint) -> Result<ProductPoint, MapError> {
        Ok(x.clone())
    }
}

/// Sends everything to one point, its unique fixed point.
#[derive(Debug, Clone)]
pub struct ConstantMap(pub ProductPoint);

impl SelfMap for ConstantMap {
    fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    fn evaluate(&self, _x: &ProductPoint) -> Result<ProductPoint, MapError> {
        Ok(self.0.clone())
    }
}

fn check_input<M: SelfMap + ?Sized>(map: &M, x: &ProductPoint) -> Result<(), EngineError> {
    if x.dims() != map.dims() {
        return Err(SimplexError::DimensionMismatch {
            expected: format!("{:?}", map.dims()),
            found: format!("{:?}", x.dims()),
        }
        .into());
    }
    Ok(())
}

fn evaluate_checked<M: SelfMap + ?Sized>(
    map: &M,
    x: &ProductPoint,
) -> Result<ProductPoint, MapError> {
    let y = map.evaluate(x)?;
    if cfg!(debug_assertions) {
        if y.dims() != map.dims() {
            return Err(MapError::InvalidOutput(format!(
                "dimensions {:?}, expected {:?}",
                y.dims(),
                map.dims()
            )));
        }
        if !y.is_valid(crate::simplex::SUM_TOLERANCE) {
            return Err(MapError::InvalidOutput(format!("{y} is not in P x Q")));
        }
    }
    Ok(y)
}

/// `|x - F(x)|` under `norm`.
pub fn residual<M: SelfMap + ?Sized>(
    map: &M,
    x: &ProductPoint,
    norm: Norm,
) -> Result<f64, EngineError> {
    check_input(map, x)?;
    let y = evaluate_checked(map, x)?;
    Ok(distance_unchecked(x, &y, norm))
}

/// Knobs of the grid search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Mesh of the initial full product grid.
    pub base_mesh: u64,
    /// Refinements allowed before giving up.
    pub max_refinements: u32,
    /// Neighbourhood radius measured in cells of the refined mesh. Constant
    /// across refinements, so the radius halves each time the mesh doubles.
    pub neighbourhood_cells: f64,
    /// Extra tracks confined to the proper faces whose best base-grid point
    /// has the smallest residual.
    pub face_tracks: usize,
    pub norm: Norm,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            base_mesh: 16,
            max_refinements: 32,
            neighbourhood_cells: 4.0,
            face_tracks: 8,
            norm: Norm::Euclidean,
        }
    }
}

impl SearchParams {
    fn validate(&self) -> Result<(), EngineError> {
        if self.base_mesh == 0 {
            return Err(EngineError::InvalidArgument("base mesh must be positive".into()));
        }
        if !(self.neighbourhood_cells >= 1.0) {
            return Err(EngineError::InvalidArgument(
                "neighbourhood must span at least one cell".into(),
            ));
        }
        let top = (self.base_mesh as u128) << self.max_refinements.min(127);
        if self.max_refinements >= 64 || top > MAX_MESH as u128 {
            return Err(EngineError::InvalidArgument(format!(
                "base mesh {} with {} refinements overflows exact numerators",
                self.base_mesh, self.max_refinements
            )));
        }
        Ok(())
    }
}

/// A point certified to move by less than `epsilon_requested` under the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxFixedPoint {
    pub point: ProductPoint,
    pub residual: f64,
    pub epsilon_requested: f64,
    /// Mesh of the grid the point was found on.
    pub mesh: u64,
}

#[derive(Debug, Clone)]
struct Scored {
    residual: f64,
    rank: (usize, usize),
    point: ProductPoint,
}

fn pick(a: Option<Scored>, b: Option<Scored>) -> Option<Scored> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            let order = a
                .residual
                .total_cmp(&b.residual)
                .then(a.rank.cmp(&b.rank));
            Some(if order.is_le() { a } else { b })
        }
    }
}

/// Best point of `rows x cols` (optionally restricted to a ball), ties broken
/// by the smallest `(row index, col index)`. Both lists must be sorted
/// lexicographically so the index order is the numerator order.
fn sweep<M: SelfMap + ?Sized>(
    map: &M,
    rows: &[Vec<u64>],
    cols: &[Vec<u64>],
    mesh: u64,
    norm: Norm,
    ball: Option<(&ProductPoint, f64)>,
) -> Result<Option<Scored>, EngineError> {
    let col_points: Vec<MixedStrategy> = cols
        .iter()
        .map(|c| MixedStrategy::from_numerators(c, mesh))
        .collect();
    par::try_reduce(rows.len(), None, pick, |ri| {
        let row = MixedStrategy::from_numerators(&rows[ri], mesh);
        let mut best = None;
        for (ci, col) in col_points.iter().enumerate() {
            let x = ProductPoint::new(row.clone(), col.clone());
            if let Some((center, radius)) = ball {
                if distance_unchecked(center, &x, norm) > radius {
                    continue;
                }
            }
            let y = evaluate_checked(map, &x)?;
            let residual = distance_unchecked(&x, &y, norm);
            best = pick(
                best,
                Some(Scored {
                    residual,
                    rank: (ri, ci),
                    point: x,
                }),
            );
        }
        Ok(best)
    })
}

fn check_sweep_size(m: usize, n: usize, mesh: u64) -> Result<(), EngineError> {
    let points = grid_size(m, mesh).saturating_mul(grid_size(n, mesh));
    if points > MAX_SWEEP_POINTS {
        return Err(EngineError::GridTooLarge {
            points,
            limit: MAX_SWEEP_POINTS,
        });
    }
    Ok(())
}

type Support = (Vec<bool>, Vec<bool>);

fn support_of(row: &[u64], col: &[u64]) -> Support {
    (
        row.iter().map(|&k| k > 0).collect(),
        col.iter().map(|&k| k > 0).collect(),
    )
}

/// Best grid point for every support pattern of the full product grid.
fn sweep_by_support<M: SelfMap + ?Sized>(
    map: &M,
    rows: &[Vec<u64>],
    cols: &[Vec<u64>],
    mesh: u64,
    norm: Norm,
) -> Result<BTreeMap<Support, Scored>, EngineError> {
    let col_points: Vec<MixedStrategy> = cols
        .iter()
        .map(|c| MixedStrategy::from_numerators(c, mesh))
        .collect();
    let merge = |mut a: BTreeMap<Support, Scored>, b: BTreeMap<Support, Scored>| {
        for (key, scored) in b {
            let slot = a.remove(&key);
            a.insert(key, pick(slot, Some(scored)).expect("nonempty"));
        }
        a
    };
    par::try_reduce(rows.len(), BTreeMap::new(), merge, |ri| {
        let row = MixedStrategy::from_numerators(&rows[ri], mesh);
        let mut best = BTreeMap::new();
        for (ci, col) in col_points.iter().enumerate() {
            let x = ProductPoint::new(row.clone(), col.clone());
            let y = evaluate_checked(map, &x)?;
            let scored = Scored {
                residual: distance_unchecked(&x, &y, norm),
                rank: (ri, ci),
                point: x,
            };
            let key = support_of(&rows[ri], &cols[ci]);
            let slot = best.remove(&key);
            best.insert(key, pick(slot, Some(scored)).expect("nonempty"));
        }
        Ok(best)
    })
}

/// One chain of local refinements. A track with a support stays on the
/// closed face that support spans.
#[derive(Debug, Clone)]
struct Track {
    support: Option<Support>,
    row: Vec<u64>,
    col: Vec<u64>,
    point: ProductPoint,
    residual: f64,
}

impl Track {
    fn key(&self) -> (f64, &[u64], &[u64]) {
        (self.residual, &self.row, &self.col)
    }

    fn refine<M: SelfMap + ?Sized>(
        &mut self,
        map: &M,
        mesh: u64,
        radius: f64,
        norm: Norm,
    ) -> Result<(), EngineError> {
        self.row.iter_mut().chain(self.col.iter_mut()).for_each(|k| *k *= 2);
        let (row_support, col_support) = match &self.support {
            Some((r, c)) => (Some(r.as_slice()), Some(c.as_slice())),
            None => (None, None),
        };
        for _ in 0..MAX_RECENTRES {
            let rows = numerators_near(self.point.row.weights(), mesh, radius, row_support);
            let cols = numerators_near(self.point.col.weights(), mesh, radius, col_support);
            let best = sweep(map, &rows, &cols, mesh, norm, Some((&self.point, radius)))?
                .expect("the incumbent lies in its own neighbourhood");
            let (row, col) = (&rows[best.rank.0], &cols[best.rank.1]);
            if *row == self.row && *col == self.col {
                break;
            }
            self.row = row.clone();
            self.col = col.clone();
            self.point = best.point;
            self.residual = best.residual;
        }
        Ok(())
    }
}

/// Incremental state of the grid search. Continuing a search to a smaller
/// epsilon gives the same result as starting a fresh one.
///
/// The first track follows the argmin of the full grid. The others start at
/// the best grid points of the most promising proper faces and stay on them:
/// a fixed point on a face can sit at the end of a long, shallow valley of
/// the residual inside the simplex, which lattice steps follow very slowly,
/// while on the face itself the residual rises steeply around it.
struct Search<'m, M: ?Sized> {
    map: &'m M,
    params: SearchParams,
    mesh: u64,
    refinements: u32,
    tracks: Vec<Track>,
    best: usize,
}

impl<'m, M: SelfMap + ?Sized> Search<'m, M> {
    fn start(map: &'m M, params: SearchParams) -> Result<Self, EngineError> {
        params.validate()?;
        let (m, n) = map.dims();
        if m == 0 || n == 0 {
            return Err(EngineError::InvalidArgument("map dimensions must be positive".into()));
        }
        check_sweep_size(m, n, params.base_mesh)?;
        let rows = grid_numerators(m, params.base_mesh);
        let cols = grid_numerators(n, params.base_mesh);
        let by_support = sweep_by_support(map, &rows, &cols, params.base_mesh, params.norm)?;

        let mut faces: Vec<(Support, Scored)> = by_support.into_iter().collect();
        faces.sort_by(|a, b| {
            a.1.residual
                .total_cmp(&b.1.residual)
                .then(a.1.rank.cmp(&b.1.rank))
        });
        let track = |support: Option<Support>, s: &Scored| Track {
            support,
            row: rows[s.rank.0].clone(),
            col: cols[s.rank.1].clone(),
            point: s.point.clone(),
            residual: s.residual,
        };
        let mut tracks = vec![track(None, &faces[0].1)];
        tracks.extend(
            faces
                .iter()
                .filter(|(support, _)| {
                    !(support.0.iter().all(|&b| b) && support.1.iter().all(|&b| b))
                })
                .take(params.face_tracks)
                .map(|(support, s)| track(Some(support.clone()), s)),
        );
        let mut search = Self {
            map,
            params,
            mesh: params.base_mesh,
            refinements: 0,
            tracks,
            best: 0,
        };
        search.update_best();
        Ok(search)
    }

    fn update_best(&mut self) {
        let mut best = 0;
        for (i, t) in self.tracks.iter().enumerate() {
            let (r, row, col) = t.key();
            let (br, brow, bcol) = self.tracks[best].key();
            if r.total_cmp(&br).then_with(|| (row, col).cmp(&(brow, bcol))).is_lt() {
                best = i;
            }
        }
        self.best = best;
    }

    fn incumbent(&self) -> &Track {
        &self.tracks[self.best]
    }

    /// Doubles the mesh and halves the radius, then moves every track to the
    /// best point of its neighbourhood. While that point is not the centre
    /// the neighbourhood is re-centred at the same mesh.
    fn refine(&mut self) -> Result<(), EngineError> {
        let mesh = self.mesh * 2;
        let radius = self.params.neighbourhood_cells / mesh as f64;
        for track in &mut self.tracks {
            track.refine(self.map, mesh, radius, self.params.norm)?;
        }
        self.mesh = mesh;
        self.refinements += 1;
        self.update_best();
        Ok(())
    }

    fn current(&self, epsilon: f64) -> ApproxFixedPoint {
        let best = self.incumbent();
        ApproxFixedPoint {
            point: best.point.clone(),
            residual: best.residual,
            epsilon_requested: epsilon,
            mesh: self.mesh,
        }
    }

    fn advance_until(&mut self, epsilon: f64) -> Result<ApproxFixedPoint, EngineError> {
        while !(self.incumbent().residual < epsilon) {
            if self.refinements >= self.params.max_refinements {
                return Err(EngineError::NoApproxFixedPointFound {
                    epsilon,
                    refinements: self.refinements,
                    best: Box::new(self.current(epsilon)),
                });
            }
            self.refine()?;
        }
        Ok(self.current(epsilon))
    }

    fn norm(&self) -> Norm {
        self.params.norm
    }
}

fn check_positive(name: &str, value: f64) -> Result<(), EngineError> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(EngineError::InvalidArgument(format!(
            "{name} must be a positive finite number, got {value}"
        )));
    }
    Ok(())
}

/// Finds a grid point whose residual is below `epsilon`.
pub fn find_approx_fixed_point<M: SelfMap + ?Sized>(
    map: &M,
    epsilon: f64,
    params: &SearchParams,
) -> Result<ApproxFixedPoint, EngineError> {
    check_positive("epsilon", epsilon)?;
    Search::start(map, *params)?.advance_until(epsilon)
}

/// Iterates of an epsilon-halving schedule and their Cauchy moduli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementTrace {
    pub iterates: Vec<ApproxFixedPoint>,
    pub epsilon_schedule: Vec<f64>,
    /// Entry `k` is the largest distance between any two iterates from `k` on.
    pub cauchy_moduli: Vec<f64>,
    pub converged: bool,
    pub final_point: ProductPoint,
}

/// Stage-by-stage driver of the schedule `eps_k = 2^-k`. Exposed so callers
/// can keep refining past the nominal target under their own stopping rule.
pub struct Refinement<'m, M: ?Sized> {
    search: Search<'m, M>,
    iterates: Vec<ApproxFixedPoint>,
    delta_target: f64,
    max_stages: usize,
}

impl<'m, M: SelfMap + ?Sized> Refinement<'m, M> {
    pub fn new(
        map: &'m M,
        params: &SearchParams,
        delta_target: f64,
        max_stages: usize,
    ) -> Result<Self, EngineError> {
        check_positive("delta", delta_target)?;
        if max_stages == 0 {
            return Err(EngineError::InvalidArgument("max_stages must be positive".into()));
        }
        Ok(Self {
            search: Search::start(map, *params)?,
            iterates: Vec::new(),
            delta_target,
            max_stages,
        })
    }

    pub fn stages(&self) -> usize {
        self.iterates.len()
    }

    /// Epsilon of the next stage.
    pub fn next_epsilon(&self) -> f64 {
        (-(self.iterates.len() as f64)).exp2()
    }

    pub fn last(&self) -> Option<&ApproxFixedPoint> {
        self.iterates.last()
    }

    pub fn next_stage(&mut self) -> Result<&ApproxFixedPoint, EngineError> {
        if self.iterates.len() >= self.max_stages {
            return Err(EngineError::BudgetExhausted {
                stages: self.max_stages,
                trace: Box::new(self.trace()),
            });
        }
        let found = self.search.advance_until(self.next_epsilon())?;
        self.iterates.push(found);
        Ok(self.iterates.last().expect("just pushed"))
    }

    /// Runs stages until the last epsilon drops below `epsilon_target`.
    pub fn run_to(&mut self, epsilon_target: f64) -> Result<(), EngineError> {
        check_positive("epsilon", epsilon_target)?;
        while self.iterates.last().is_none_or(|it| it.epsilon_requested >= epsilon_target) {
            self.next_stage()?;
        }
        Ok(())
    }

    pub fn trace(&self) -> RefinementTrace {
        let norm = self.search.norm();
        let points: Vec<&ProductPoint> = self.iterates.iter().map(|it| &it.point).collect();
        let mut cauchy_moduli = vec![0.0; points.len()];
        let mut running = 0.0f64;
        for k in (0..points.len()).rev() {
            for later in &points[k + 1..] {
                running = running.max(distance_unchecked(points[k], later, norm));
            }
            cauchy_moduli[k] = running;
        }
        let converged = match points.as_slice() {
            [] => false,
            [_] => true,
            [.., a, b] => distance_unchecked(a, b, norm) <= self.delta_target,
        };
        RefinementTrace {
            epsilon_schedule: self.iterates.iter().map(|it| it.epsilon_requested).collect(),
            final_point: points
                .last()
                .map_or_else(|| self.search.incumbent().point.clone(), |p| (*p).clone()),
            iterates: self.iterates.clone(),
            cauchy_moduli,
            converged,
        }
    }
}

/// Builds approximate fixed points along `eps_k = 2^-k` until `eps_k` drops
/// below `epsilon_target`; `converged` reports whether the last two iterates
/// are within `delta_target`.
pub fn refine_to_fixed_point<M: SelfMap + ?Sized>(
    map: &M,
    epsilon_target: f64,
    delta_target: f64,
    max_stages: usize,
    params: &SearchParams,
) -> Result<RefinementTrace, EngineError> {
    check_positive("epsilon", epsilon_target)?;
    let mut refinement = Refinement::new(map, params, delta_target, max_stages)?;
    refinement.run_to(epsilon_target)?;
    Ok(refinement.trace())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Diameter of the grid points with residual below `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRow {
    pub epsilon: f64,
    pub diameter: f64,
    /// Number of grid points in the set.
    pub members: usize,
    /// Two members realizing the diameter; `None` for an empty set.
    pub witness: Option<(ProductPoint, ProductPoint)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub delta: f64,
    /// Grid resolution the sets were sampled at. Diameters are lower bounds
    /// for the continuum sets.
    pub mesh: u64,
    pub norm: Norm,
    pub rows: Vec<UniquenessRow>,
    pub verdict: Verdict,
}

/// Largest pairwise distance among `points` with the lexicographically
/// smallest index pair attaining it. Pairs are pruned with
/// `d(x, y) <= d(x, c) + d(c, y)` around the centroid `c`.
fn diameter(points: &[Vec<f64>], norm: Norm) -> Option<(f64, usize, usize)> {
    match points.len() {
        0 => return None,
        1 => return Some((0.0, 0, 0)),
        _ => {}
    }
    let dim = points[0].len();
    let mut center = vec![0.0; dim];
    for p in points {
        for (c, v) in center.iter_mut().zip(p) {
            *c += v;
        }
    }
    for c in &mut center {
        *c /= points.len() as f64;
    }
    let dist = |a: &[f64], b: &[f64]| norm.length(a.iter().zip(b).map(|(x, y)| x - y));
    let spread: Vec<f64> = points.iter().map(|p| dist(p, &center)).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| spread[b].total_cmp(&spread[a]).then(a.cmp(&b)));

    let mut best = (f64::NEG_INFINITY, usize::MAX, usize::MAX);
    for (pos, &i) in order.iter().enumerate() {
        let Some(&next) = order.get(pos + 1) else { break };
        if spread[i] + spread[next] + PRUNE_SLACK < best.0 {
            break;
        }
        for &j in &order[pos + 1..] {
            if spread[i] + spread[j] + PRUNE_SLACK < best.0 {
                break;
            }
            let d = dist(&points[i], &points[j]);
            let pair = (i.min(j), i.max(j));
            if d > best.0 || (d == best.0 && pair < (best.1, best.2)) {
                best = (d, pair.0, pair.1);
            }
        }
    }
    Some(best)
}

/// Samples `S_eps = {x on the grid : |x - F(x)| < eps}` for each epsilon and
/// checks that the sets shrink below `delta`.
///
/// The verdict is `consistent` when the diameters are nonincreasing and the
/// last is at most `delta`; `violated` when the last exceeds `delta` and the
/// last two diameters agree within [`STAGNATION_TOLERANCE`]; `inconclusive`
/// otherwise.
pub fn probe_sequential_uniqueness<M: SelfMap + ?Sized>(
    map: &M,
    delta: f64,
    epsilons: &[f64],
    mesh: u64,
    norm: Norm,
) -> Result<UniquenessReport, EngineError> {
    check_positive("delta", delta)?;
    if epsilons.is_empty() {
        return Err(EngineError::InvalidArgument("epsilon list is empty".into()));
    }
    for &eps in epsilons {
        check_positive("epsilon", eps)?;
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(EngineError::InvalidArgument(
            "epsilon list must be strictly decreasing".into(),
        ));
    }
    if mesh == 0 {
        return Err(EngineError::InvalidArgument("mesh must be positive".into()));
    }
    let (m, n) = map.dims();
    check_sweep_size(m, n, mesh)?;

    let rows: Vec<MixedStrategy> = grid_numerators(m, mesh)
        .iter()
        .map(|r| MixedStrategy::from_numerators(r, mesh))
        .collect();
    let cols: Vec<MixedStrategy> = grid_numerators(n, mesh)
        .iter()
        .map(|c| MixedStrategy::from_numerators(c, mesh))
        .collect();
    let point_at = |idx: usize| {
        ProductPoint::new(rows[idx / cols.len()].clone(), cols[idx % cols.len()].clone())
    };

    let residuals: Vec<f64> = par::try_collect(rows.len() * cols.len(), |idx| {
        let x = point_at(idx);
        let y = evaluate_checked(map, &x)?;
        Ok::<_, EngineError>(distance_unchecked(&x, &y, norm))
    })?;

    let mut report_rows = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let members: Vec<usize> = (0..residuals.len())
            .filter(|&i| residuals[i] < epsilon)
            .collect();
        let coords: Vec<Vec<f64>> = members
            .iter()
            .map(|&i| point_at(i).coordinates().collect())
            .collect();
        let (diameter, witness) = match diameter(&coords, norm) {
            None => (0.0, None),
            Some((d, a, b)) => (d, Some((point_at(members[a]), point_at(members[b])))),
        };
        report_rows.push(UniquenessRow {
            epsilon,
            diameter,
            members: members.len(),
            witness,
        });
    }

    let diameters: Vec<f64> = report_rows.iter().map(|r| r.diameter).collect();
    let last = *diameters.last().expect("nonempty");
    let nonincreasing = diameters.windows(2).all(|w| w[1] <= w[0]);
    let stagnated = diameters.len() >= 2
        && (diameters[diameters.len() - 1] - diameters[diameters.len() - 2]).abs()
            <= STAGNATION_TOLERANCE;
    let verdict = if nonincreasing && last <= delta {
        Verdict::Consistent
    } else if last > delta && stagnated {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };

    Ok(UniquenessReport {
        delta,
        mesh,
        norm,
        rows: report_rows,
        verdict,
    })
}
