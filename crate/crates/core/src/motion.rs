//! Motion probing and invariant monitoring for petal trees, plus a grid
//! census of the single-petal configuration space.
//!
//! Every result here is about sampled frames. A clean report means no
//! violation was found at the given step size and budget; it is not a proof
//! that none exists.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point2, Tolerance};
use crate::model::{
    certify_transition, is_simple, project_lengths, validate_motion, Configuration, Edge, LinkTree, ModelError, Motion,
    MotionReport, PetalLayout, DEFAULT_MAX_STEP,
};
use crate::petal::{derive_geometry, petal_geometries, PetalError, PetalParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("expected a tree with {expected} petals around the root, found {found}")]
    PetalCount { expected: usize, found: usize },
    #[error("start configuration outside the locking hypothesis: {0}")]
    StartOutsideHypothesis(String),
    #[error("invalid probe strategy: {0}")]
    InvalidStrategy(String),
    #[error("motion failed validation at frame {}", .0.first_offending_frame().unwrap_or(0))]
    MotionInvalid(MotionReport),
    #[error("frame {frame}: petal {petal} has angle {theta} >= beta")]
    AngleReachedBeta { frame: usize, petal: usize, theta: f64 },
    #[error("grid must be at least {min}, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("anchor placement is not {0}")]
    BadAnchor(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Petal(#[from] PetalError),
}

fn root_layout(tree: &LinkTree, params: &PetalParams) -> Result<PetalLayout, MotionError> {
    let layout = PetalLayout::at(tree, tree.root())?;
    if layout.len() != params.n() {
        return Err(MotionError::PetalCount {
            expected: params.n(),
            found: layout.len(),
        });
    }
    Ok(layout)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTrace {
    pub angles: Vec<f64>,
    pub restricted: Vec<bool>,
    pub min_angle: f64,
    pub max_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub alpha: f64,
    pub beta: f64,
    pub frames: Vec<FrameTrace>,
    /// First frame with some angle `≤ α`.
    pub t_alpha: Option<usize>,
    /// First frame with some angle `≥ β`.
    pub t_beta: Option<usize>,
    /// Frame 0 is simple, every petal restricted, every angle in `(α, β)`.
    pub started_in_hypothesis: bool,
    /// Started in the hypothesis and some later angle left `(α, β)`.
    pub violation: bool,
    /// Outcome of frame-by-frame motion validation.
    pub motion_valid: bool,
    pub motion_issues: usize,
    pub first_offending_frame: Option<usize>,
}

impl MonitorReport {
    /// A violation on a motion that also passed validation.
    pub fn counterexample(&self) -> bool {
        self.violation && self.motion_valid
    }

    pub fn min_angle(&self) -> f64 {
        self.frames.iter().map(|f| f.min_angle).fold(f64::INFINITY, f64::min)
    }

    pub fn max_angle(&self) -> f64 {
        self.frames
            .iter()
            .map(|f| f.max_angle)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every petal restricted at frame 0 stays restricted in every frame.
    pub fn restricted_preserved(&self) -> bool {
        let Some(first) = self.frames.first() else {
            return true;
        };
        self.frames.iter().all(|f| {
            f.restricted
                .iter()
                .zip(&first.restricted)
                .all(|(now, then)| now | !then)
        })
    }
}

fn trace_frame(
    c: &Configuration,
    layout: &PetalLayout,
    params: &PetalParams,
    tol: &Tolerance,
) -> Result<FrameTrace, MotionError> {
    let angles = layout.angles(c)?;
    let restricted = petal_geometries(c, layout, params, tol)?
        .iter()
        .map(|g| g.restricted)
        .collect();
    Ok(FrameTrace {
        min_angle: angles.iter().copied().fold(f64::INFINITY, f64::min),
        max_angle: angles.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        angles,
        restricted,
    })
}

fn summarize(
    traces: Vec<FrameTrace>,
    first_simple: bool,
    validation: &MotionReport,
    params: &PetalParams,
) -> MonitorReport {
    let (alpha, beta) = (params.alpha(), params.beta());
    let t_alpha = traces.iter().position(|f| f.min_angle <= alpha);
    let t_beta = traces.iter().position(|f| f.max_angle >= beta);
    let started_in_hypothesis = traces
        .first()
        .is_some_and(|f| first_simple && f.restricted.iter().all(|r| *r) && f.min_angle > alpha && f.max_angle < beta);
    MonitorReport {
        alpha,
        beta,
        violation: started_in_hypothesis && (t_alpha.is_some() || t_beta.is_some()),
        frames: traces,
        t_alpha,
        t_beta,
        started_in_hypothesis,
        motion_valid: validation.is_valid(),
        motion_issues: validation.issues.len(),
        first_offending_frame: validation.first_offending_frame(),
    }
}

/// Per-frame angle and restricted traces with the first-crossing markers.
pub fn monitor(m: &Motion, params: &PetalParams, tol: &Tolerance) -> Result<MonitorReport, MotionError> {
    let Some(first) = m.frames().first() else {
        let validation = validate_motion(m, tol)?;
        return Ok(summarize(Vec::new(), false, &validation, params));
    };
    let layout = root_layout(first.tree(), params)?;
    let traces = m
        .frames()
        .iter()
        .map(|c| trace_frame(c, &layout, params, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let validation = validate_motion(m, tol)?;
    let first_simple = is_simple(first, tol)?.is_simple();
    Ok(summarize(traces, first_simple, &validation, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeKind {
    RandomWalk,
    /// Greedily prefers steps that shrink the target petal's angle.
    Squeeze {
        petal: usize,
    },
    /// Squeeze with the step size decaying by `decay` per accepted step,
    /// never below `floor`.
    Anneal {
        petal: usize,
        decay: f64,
        floor: f64,
    },
}

impl ProbeKind {
    pub const ANNEAL_DECAY: f64 = 0.999;
    pub const ANNEAL_FLOOR: f64 = 1e-6;

    pub fn anneal(petal: usize) -> Self {
        ProbeKind::Anneal {
            petal,
            decay: Self::ANNEAL_DECAY,
            floor: Self::ANNEAL_FLOOR,
        }
    }

    fn target(&self) -> Option<usize> {
        match *self {
            ProbeKind::RandomWalk => None,
            ProbeKind::Squeeze { petal } | ProbeKind::Anneal { petal, .. } => Some(petal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeStrategy {
    pub kind: ProbeKind,
    /// Largest proposal scale; proposals draw their scale log-uniformly from
    /// `[step·10⁻⁴, step]`.
    pub step: f64,
    pub seed: u64,
    /// Number of proposal rounds; 0 returns the start frame alone.
    pub budget: usize,
}

impl ProbeStrategy {
    pub fn new(kind: ProbeKind, seed: u64, budget: usize) -> Self {
        ProbeStrategy {
            kind,
            step: DEFAULT_MAX_STEP,
            seed,
            budget,
        }
    }
}

/// The serializable part of a [`ProbeOutcome`]: everything but the frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub strategy: ProbeStrategy,
    pub best_min_angle: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub frames: usize,
    pub violation: bool,
    pub motion_valid: bool,
    pub restricted_preserved: bool,
    pub summary: String,
    pub monitor: MonitorReport,
}

#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub motion: Motion,
    pub report: MonitorReport,
    pub best_min_angle: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub strategy: ProbeStrategy,
}

impl ProbeOutcome {
    pub fn record(&self) -> ProbeRecord {
        ProbeRecord {
            strategy: self.strategy,
            best_min_angle: self.best_min_angle,
            accepted: self.accepted,
            rejected: self.rejected,
            frames: self.motion.len(),
            violation: self.report.violation,
            motion_valid: self.report.motion_valid,
            restricted_preserved: self.report.restricted_preserved(),
            summary: self.summary(),
            monitor: self.report.clone(),
        }
    }

    /// One-line verdict. Never claims more than the sampled frames show.
    pub fn summary(&self) -> String {
        if self.report.counterexample() {
            format!(
                "violation found at frame {} (step size {}, budget {})",
                self.report
                    .t_alpha
                    .into_iter()
                    .chain(self.report.t_beta)
                    .min()
                    .unwrap_or(0),
                self.strategy.step,
                self.strategy.budget
            )
        } else {
            format!(
                "no violation found at step size {}, budget {}",
                self.strategy.step, self.strategy.budget
            )
        }
    }
}

const SQUEEZE_CANDIDATES: usize = 6;
const SCALE_DECADES: f64 = 4.0;

fn random_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Point2 {
    let r = radius * rng.gen::<f64>().sqrt();
    Point2::polar(r, TAU * rng.gen::<f64>())
}

/// Perturbs every non-root joint and re-imposes the link lengths outward
/// from the root.
fn propose(
    cur: &Configuration,
    layout: &PetalLayout,
    target: Option<usize>,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Point2>> {
    let tree = cur.tree();
    let root = tree.root();
    let o = cur.point(root);
    let mut pts = cur.placement().to_vec();
    for (j, p) in pts.iter_mut().enumerate() {
        if j != root {
            *p = *p + random_in_disk(rng, 0.5 * scale);
        }
    }
    if let Some(t) = target {
        // clockwise turn of the target petal closes its wedge
        let pj = layout.petals[t];
        for j in [pj.a, pj.b, pj.c] {
            pts[j] = pts[j] + (cur.point(j).rotate_about(o, -0.5 * scale) - cur.point(j));
        }
    }
    project_lengths(tree, o, &pts)
}

fn check_start(
    start: &Configuration,
    layout: &PetalLayout,
    params: &PetalParams,
    tol: &Tolerance,
) -> Result<(), MotionError> {
    if let crate::model::Simplicity::Violation(v) = is_simple(start, tol)? {
        return Err(MotionError::StartOutsideHypothesis(format!("not simple: {v}")));
    }
    let trace = trace_frame(start, layout, params, tol)?;
    if let Some(i) = trace.restricted.iter().position(|r| !r) {
        return Err(MotionError::StartOutsideHypothesis(format!("petal {i} not restricted")));
    }
    let (alpha, beta) = (params.alpha(), params.beta());
    if let Some(i) = trace.angles.iter().position(|t| !(*t > alpha && *t < beta)) {
        return Err(MotionError::StartOutsideHypothesis(format!(
            "petal {i} angle {} outside (alpha, beta)",
            trace.angles[i]
        )));
    }
    Ok(())
}

/// Random constrained motion from `start`, keeping only frames that are
/// simple, within the step bound and reached by a certified transition.
pub fn probe(
    start: &Configuration,
    strategy: ProbeStrategy,
    params: &PetalParams,
    tol: &Tolerance,
) -> Result<ProbeOutcome, MotionError> {
    if !(strategy.step > 0.0 && strategy.step <= DEFAULT_MAX_STEP) {
        return Err(MotionError::InvalidStrategy(format!(
            "step {} must lie in (0, {DEFAULT_MAX_STEP}]",
            strategy.step
        )));
    }
    let layout = root_layout(start.tree(), params)?;
    if let Some(t) = strategy.kind.target() {
        if t >= layout.len() {
            return Err(MotionError::InvalidStrategy(format!("no petal {t}")));
        }
    }
    if let ProbeKind::Anneal { decay, floor, .. } = strategy.kind {
        if !(decay > 0.0 && decay <= 1.0 && floor > 0.0 && floor <= strategy.step) {
            return Err(MotionError::InvalidStrategy(format!(
                "bad schedule decay={decay} floor={floor}"
            )));
        }
    }
    check_start(start, &layout, params, tol)?;

    let mut rng = ChaCha8Rng::seed_from_u64(strategy.seed);
    let mut motion = Motion::new(DEFAULT_MAX_STEP);
    motion.push(start.clone());
    let mut current_step = strategy.step;
    let (mut accepted, mut rejected) = (0, 0);
    let target = strategy.kind.target();
    let candidates = if target.is_some() { SQUEEZE_CANDIDATES } else { 1 };
    let progress_every = (strategy.budget / 10).max(1);
    let mut best = layout.angles(start)?.into_iter().fold(f64::INFINITY, f64::min);

    for round in 0..strategy.budget {
        let cur = motion.last().expect("motion starts non-empty").clone();
        let mut pool = Vec::with_capacity(candidates);
        for _ in 0..candidates {
            let scale = current_step * 10f64.powf(-SCALE_DECADES * rng.gen::<f64>());
            if let Some(pts) = propose(&cur, &layout, target, scale, &mut rng) {
                if let Ok(c) = Configuration::new(cur.tree().clone(), pts, tol) {
                    let key = match target {
                        Some(t) => angle_of(&c, &layout, t)?,
                        None => 0.0,
                    };
                    pool.push((key, c));
                }
            }
        }
        pool.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut took = None;
        for (_, c) in pool {
            if cur.max_displacement(&c) <= DEFAULT_MAX_STEP
                && is_simple(&c, tol)?.is_simple()
                && certify_transition(&cur, &c, tol)?
            {
                took = Some(c);
                break;
            }
        }
        match took {
            Some(c) => {
                best = best.min(layout.angles(&c)?.into_iter().fold(f64::INFINITY, f64::min));
                motion.push(c);
                accepted += 1;
                if let ProbeKind::Anneal { decay, floor, .. } = strategy.kind {
                    current_step = (current_step * decay).max(floor);
                }
            }
            None => rejected += 1,
        }
        if (round + 1) % progress_every == 0 {
            log::info!(
                "probe seed {}: round {}/{} frame {} min angle {:.6}°",
                strategy.seed,
                round + 1,
                strategy.budget,
                motion.len() - 1,
                best.to_degrees()
            );
        }
    }

    let report = monitor(&motion, params, tol)?;
    Ok(ProbeOutcome {
        motion,
        report,
        best_min_angle: best,
        accepted,
        rejected,
        strategy,
    })
}

fn angle_of(c: &Configuration, layout: &PetalLayout, petal: usize) -> Result<f64, MotionError> {
    let o = c.point(layout.center);
    Ok(crate::geom::angle_ccw(
        o,
        c.point(layout.previous_spoke(petal)),
        c.point(layout.petals[petal].a),
    )
    .map_err(ModelError::from)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceReport {
    pub frames: usize,
    pub initially_restricted: Vec<bool>,
    /// First `(frame, petal)` where a petal restricted at frame 0 is not.
    pub first_break: Option<(usize, usize)>,
    pub pass: bool,
}

/// Runs one probe per strategy on its own thread. Results come back in
/// input order.
pub fn probe_all(
    start: &Configuration,
    strategies: &[ProbeStrategy],
    params: &PetalParams,
    tol: &Tolerance,
) -> Vec<Result<ProbeOutcome, MotionError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = strategies
            .iter()
            .map(|s| scope.spawn(move || probe(start, *s, params, tol)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("probe thread panicked"))
            .collect()
    })
}

/// Checks that petals restricted at frame 0 stay restricted. The motion must
/// validate and keep every angle below `β`.
pub fn check_restricted_persists(
    m: &Motion,
    params: &PetalParams,
    tol: &Tolerance,
) -> Result<PersistenceReport, MotionError> {
    let validation = validate_motion(m, tol)?;
    if !validation.is_valid() {
        return Err(MotionError::MotionInvalid(validation));
    }
    let layout = root_layout(m.frames()[0].tree(), params)?;
    let beta = params.beta();
    let mut initially = Vec::new();
    let mut first_break = None;
    for (k, c) in m.frames().iter().enumerate() {
        let trace = trace_frame(c, &layout, params, tol)?;
        if let Some(petal) = trace.angles.iter().position(|t| *t >= beta) {
            return Err(MotionError::AngleReachedBeta {
                frame: k,
                petal,
                theta: trace.angles[petal],
            });
        }
        if k == 0 {
            initially = trace.restricted.clone();
        } else if first_break.is_none() {
            if let Some(p) = (0..initially.len()).find(|&p| initially[p] && !trace.restricted[p]) {
                first_break = Some((k, p));
            }
        }
    }
    Ok(PersistenceReport {
        frames: m.len(),
        initially_restricted: initially,
        pass: first_break.is_none(),
        first_break,
    })
}

/// One grid axis: values `lo + i·step` for `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub step: f64,
    pub count: usize,
    pub periodic: bool,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        self.lo + self.step * i as f64
    }

    /// Axis centered on `center` so that `center` is node `count / 2`.
    pub fn centered(center: f64, step: f64, count: usize) -> Self {
        Axis {
            lo: center - step * (count / 2) as f64,
            step,
            count,
            periodic: false,
        }
    }

    /// Axis spanning about `[lo, hi]` whose nodes include `through`.
    pub fn spanning(lo: f64, hi: f64, through: f64, count: usize) -> (Self, usize) {
        let step = (hi - lo) / (count - 1) as f64;
        let at = (((through - lo) / step).round().max(0.0) as usize).min(count - 1);
        (
            Axis {
                lo: through - step * at as f64,
                step,
                count,
                periodic: false,
            },
            at,
        )
    }

    /// `count` nodes covering a full turn.
    pub fn full_turn(count: usize) -> Self {
        Axis {
            lo: 0.0,
            step: TAU / count as f64,
            count,
            periodic: true,
        }
    }

    pub fn nearest(&self, x: f64) -> usize {
        let raw = (x - self.lo) / self.step;
        if self.periodic {
            (raw.round().rem_euclid(self.count as f64) as usize) % self.count
        } else {
            raw.round().clamp(0.0, (self.count - 1) as f64) as usize
        }
    }
}

/// How the third grid coordinate places `C`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CChart {
    /// Joint angle at `B`, from `B→A` to `B→C`.
    #[default]
    JointAngle,
    /// Bearing of `C` seen from `O`; `C` is the meet of that ray with the
    /// circle about `B` nearest to `O`. Only covers placements where `C`
    /// faces `O`, but there the restricted region is not thin.
    Bearing,
}

/// Grid over the single petal `O, A′, A, B, C` with `A′ = (1, 0)` fixed:
/// the petal angle `θ`, the joint angle at `A` (counterclockwise from `A→O`
/// to `A→B`) and a coordinate for `C` given by `chart`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CspaceAxes {
    pub theta: Axis,
    pub a: Axis,
    pub b: Axis,
    #[serde(default)]
    pub chart: CChart,
}

impl CspaceAxes {
    fn len(&self) -> usize {
        self.theta.count * self.a.count * self.b.count
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.a.count + j) * self.b.count + k
    }
}

pub fn single_petal_tree(params: &PetalParams) -> LinkTree {
    LinkTree::new(
        ["O", "A'", "A", "B", "C"].map(String::from).to_vec(),
        vec![
            Edge {
                from: 0,
                to: 1,
                length: 1.0,
            },
            Edge {
                from: 0,
                to: 2,
                length: 1.0,
            },
            Edge {
                from: 2,
                to: 3,
                length: params.l1(),
            },
            Edge {
                from: 3,
                to: 4,
                length: params.l2(),
            },
        ],
        0,
    )
}

/// Placement of the single petal at joint-angle coordinates `(θ, a, b)`.
pub fn single_petal_points(params: &PetalParams, theta: f64, a: f64, b: f64) -> Vec<Point2> {
    let pa = Point2::polar(1.0, theta);
    let pb = pa + Point2::polar(params.l1(), (Point2::ORIGIN - pa).angle() + a);
    let pc = pb + Point2::polar(params.l2(), (pa - pb).angle() + b);
    vec![Point2::ORIGIN, Point2::new(1.0, 0.0), pa, pb, pc]
}

/// Placement at `(θ, a, b)` read through `chart`; `None` when the bearing
/// ray misses the circle about `B`.
pub fn chart_points(params: &PetalParams, chart: CChart, theta: f64, a: f64, b: f64) -> Option<Vec<Point2>> {
    match chart {
        CChart::JointAngle => Some(single_petal_points(params, theta, a, b)),
        CChart::Bearing => {
            let mut pts = single_petal_points(params, theta, a, 0.0);
            let pb = pts[3];
            let u = Point2::polar(1.0, b);
            let ub = u.dot(pb);
            let disc = ub * ub - pb.dot(pb) + params.l2() * params.l2();
            if disc < 0.0 {
                return None;
            }
            let s = ub - disc.sqrt();
            if s <= 0.0 {
                return None;
            }
            pts[4] = u * s;
            Some(pts)
        }
    }
}

/// Joint-angle coordinates `(θ, a, b)` of a single-petal placement.
pub fn single_petal_coords(pts: &[Point2]) -> (f64, f64, f64) {
    let (o, ap, a, b, c) = (pts[0], pts[1], pts[2], pts[3], pts[4]);
    let ang = |v: Point2, from: Point2, to: Point2| crate::geom::wrap_angle((to - v).angle() - (from - v).angle());
    (ang(o, ap, a), ang(a, o, b), ang(b, a, c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentInfo {
    pub id: usize,
    pub size: usize,
    pub min_theta: f64,
    pub max_theta: f64,
    pub has_restricted: bool,
    /// Every node of the component is restricted.
    pub all_restricted: bool,
    /// Touches the edge of a non-periodic axis, so the true component may
    /// extend beyond the grid.
    pub truncated: bool,
    pub truncation: Truncation,
}

/// Which window edges a component touches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub theta_low: bool,
    pub theta_high: bool,
    pub a: bool,
    pub b: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspaceCensus {
    pub axes: CspaceAxes,
    pub nodes: usize,
    pub simple_nodes: usize,
    pub restricted_nodes: usize,
    pub component_count: usize,
    /// Components holding at least one restricted node.
    pub restricted_components: usize,
    pub anchor: Option<[usize; 3]>,
    pub anchor_component: Option<ComponentInfo>,
    /// Up to [`LISTED_COMPONENTS`] largest components.
    pub components: Vec<ComponentInfo>,
}

pub const LISTED_COMPONENTS: usize = 32;
const MIN_GRID: usize = 50;

struct Stats {
    size: usize,
    min_i: usize,
    max_i: usize,
    edge: Truncation,
    restricted: bool,
    unrestricted: bool,
}

/// Connected components of simple placements under the 6-neighborhood,
/// joining neighbors only when the transition between them is certified.
pub fn cspace_census(
    params: &PetalParams,
    axes: CspaceAxes,
    anchor: Option<[usize; 3]>,
    tol: &Tolerance,
) -> Result<CspaceCensus, MotionError> {
    let tree = Arc::new(single_petal_tree(params));
    let (na, nb) = (axes.a.count, axes.b.count);
    let total = axes.len();
    let mut simple = vec![false; total];
    let mut restricted = vec![false; total];
    let mut uf = UnionFind::<usize>::new(total);

    let node = |i: usize, j: usize, k: usize| -> Result<Option<Configuration>, MotionError> {
        let Some(pts) = chart_points(
            params,
            axes.chart,
            axes.theta.value(i),
            axes.a.value(j),
            axes.b.value(k),
        ) else {
            return Ok(None);
        };
        let c = Configuration::new(tree.clone(), pts, tol)?;
        Ok(is_simple(&c, tol)?.is_simple().then_some(c))
    };
    let link = |uf: &mut UnionFind<usize>,
                u: usize,
                cu: &Configuration,
                v: usize,
                cv: &Configuration|
     -> Result<(), MotionError> {
        if uf.find(u) != uf.find(v) && certify_transition(cu, cv, tol)? {
            uf.union(u, v);
        }
        Ok(())
    };
    let wrap = |x: usize, axis: &Axis| -> Option<usize> {
        if x + 1 < axis.count {
            Some(x + 1)
        } else if axis.periodic && axis.count > 2 {
            Some(0)
        } else {
            None
        }
    };

    let mut prev: Vec<Option<Configuration>> = Vec::new();
    let mut first_slice: Vec<Option<Configuration>> = Vec::new();
    for i in 0..axes.theta.count {
        let mut slice = Vec::with_capacity(na * nb);
        for j in 0..na {
            for k in 0..nb {
                let c = node(i, j, k)?;
                let id = axes.index(i, j, k);
                if let Some(c) = &c {
                    simple[id] = true;
                    let pts = c.placement();
                    restricted[id] = derive_geometry(params, pts[0], pts[1], pts[2], pts[3], pts[4], tol)?.restricted;
                }
                slice.push(c);
            }
        }
        for j in 0..na {
            for k in 0..nb {
                let Some(c) = &slice[j * nb + k] else { continue };
                let id = axes.index(i, j, k);
                if let Some(k2) = wrap(k, &axes.b) {
                    if let Some(c2) = &slice[j * nb + k2] {
                        link(&mut uf, id, c, axes.index(i, j, k2), c2)?;
                    }
                }
                if let Some(j2) = wrap(j, &axes.a) {
                    if let Some(c2) = &slice[j2 * nb + k] {
                        link(&mut uf, id, c, axes.index(i, j2, k), c2)?;
                    }
                }
                if i > 0 {
                    if let Some(c2) = &prev[j * nb + k] {
                        link(&mut uf, id, c, axes.index(i - 1, j, k), c2)?;
                    }
                }
            }
        }
        if i == 0 {
            first_slice = slice.clone();
        }
        if axes.theta.periodic && axes.theta.count > 2 && i + 1 == axes.theta.count {
            for (x, (c, c0)) in slice.iter().zip(&first_slice).enumerate() {
                if let (Some(c), Some(c0)) = (c, c0) {
                    let (j, k) = (x / nb, x % nb);
                    link(&mut uf, axes.index(i, j, k), c, axes.index(0, j, k), c0)?;
                }
            }
        }
        prev = slice;
    }

    let mut stats: std::collections::HashMap<usize, Stats> = std::collections::HashMap::new();
    for i in 0..axes.theta.count {
        for j in 0..na {
            for k in 0..nb {
                let id = axes.index(i, j, k);
                if !simple[id] {
                    continue;
                }
                let on_edge = |x: usize, axis: &Axis| !axis.periodic && (x == 0 || x + 1 == axis.count);
                let s = stats.entry(uf.find(id)).or_insert(Stats {
                    size: 0,
                    min_i: i,
                    max_i: i,
                    edge: Truncation::default(),
                    restricted: false,
                    unrestricted: false,
                });
                s.size += 1;
                s.min_i = s.min_i.min(i);
                s.max_i = s.max_i.max(i);
                let fixed = axes.theta.count == 1;
                s.edge.theta_low |= !fixed && !axes.theta.periodic && i == 0;
                s.edge.theta_high |= !fixed && !axes.theta.periodic && i + 1 == axes.theta.count;
                s.edge.a |= on_edge(j, &axes.a);
                s.edge.b |= on_edge(k, &axes.b);
                s.restricted |= restricted[id];
                s.unrestricted |= !restricted[id];
            }
        }
    }
    let info = |root: usize, s: &Stats| ComponentInfo {
        id: root,
        size: s.size,
        min_theta: axes.theta.value(s.min_i),
        max_theta: axes.theta.value(s.max_i),
        has_restricted: s.restricted,
        all_restricted: !s.unrestricted,
        truncated: s.edge.theta_low || s.edge.theta_high || s.edge.a || s.edge.b,
        truncation: s.edge,
    };
    let mut components: Vec<ComponentInfo> = stats.iter().map(|(r, s)| info(*r, s)).collect();
    components.sort_by(|x, y| y.size.cmp(&x.size).then(x.id.cmp(&y.id)));
    let anchor_component = match anchor {
        Some([i, j, k]) => {
            let id = axes.index(i, j, k);
            if !simple[id] {
                return Err(MotionError::BadAnchor("simple"));
            }
            let root = uf.find(id);
            Some(info(root, &stats[&root]))
        }
        None => None,
    };
    let component_count = components.len();
    let restricted_components = components.iter().filter(|c| c.has_restricted).count();
    components.truncate(LISTED_COMPONENTS);
    Ok(CspaceCensus {
        axes,
        nodes: total,
        simple_nodes: simple.iter().filter(|s| **s).count(),
        restricted_nodes: restricted.iter().filter(|s| **s).count(),
        component_count,
        restricted_components,
        anchor,
        anchor_component,
        components,
    })
}

/// The locked petal as `[O, A′, A, B, C]` with `A′ = (1, 0)`.
pub fn locked_petal_points(params: &PetalParams) -> Result<Vec<Point2>, MotionError> {
    crate::construct::locked_petal_placement(params, &Tolerance::default())
        .map(|p| p.to_vec())
        .map_err(|_| MotionError::BadAnchor("constructible"))
}

/// Joint-angle coordinates of the locked petal.
pub fn locked_petal_coords(params: &PetalParams) -> Result<(f64, f64, f64), MotionError> {
    Ok(single_petal_coords(&locked_petal_points(params)?))
}

/// Half-width of the default window in the joint angle at `A`.
pub const A_HALF_WINDOW: f64 = 1.0 * PI / 180.0;
/// Fraction of the way from `θ̄` to `β` covered by the `θ` window.
pub const THETA_REACH: f64 = 0.5;
/// Margin of the bearing window beyond `[0, β]`.
pub const BEARING_MARGIN: f64 = 1.0 * PI / 180.0;

/// Default grid: centered on the locked petal, which is a node, with `θ`
/// reaching just below `β` at the top and as far below `θ̄` at the bottom.
/// `C` is charted by bearing over the whole wedge plus a margin.
pub fn default_axes(params: &PetalParams, grid: usize) -> Result<(CspaceAxes, [usize; 3]), MotionError> {
    if grid < MIN_GRID {
        return Err(MotionError::GridTooSmall {
            min: MIN_GRID,
            got: grid,
        });
    }
    let pts = locked_petal_points(params)?;
    let (t0, a0, _) = single_petal_coords(&pts);
    let c0 = pts[4].angle();
    let half = (grid / 2) as f64;
    let (b, k) = Axis::spanning(-BEARING_MARGIN, params.beta() + BEARING_MARGIN, c0, grid);
    let axes = CspaceAxes {
        theta: Axis::centered(t0, THETA_REACH * (params.beta() - t0) / half, grid),
        a: Axis::centered(a0, A_HALF_WINDOW / half, grid),
        b,
        chart: CChart::Bearing,
    };
    Ok((axes, [grid / 2, grid / 2, k]))
}

/// Census on the default grid around the locked petal.
pub fn cspace_components(params: &PetalParams, grid: usize, tol: &Tolerance) -> Result<CspaceCensus, MotionError> {
    let (axes, anchor) = default_axes(params, grid)?;
    let census = cspace_census(params, axes, Some(anchor), tol)?;
    if census.anchor_component.as_ref().is_some_and(|c| !c.has_restricted) {
        return Err(MotionError::BadAnchor("restricted"));
    }
    Ok(census)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnlockReport {
    pub theta: f64,
    pub grid: usize,
    pub straight_node: [usize; 2],
    pub folded_node: [usize; 2],
    pub straight_component: usize,
    pub folded_component: usize,
    pub component_count: usize,
    pub connected: bool,
}

/// Joint angles of the folded placement at wedge angle `theta`: `AB` turned
/// 20° off `AO` into the wedge and `C` pointing from `B` toward `O`.
pub fn folded_coords(params: &PetalParams, theta: f64) -> (f64, f64) {
    let a = 20f64.to_radians();
    let pa = Point2::polar(1.0, theta);
    let pb = pa + Point2::polar(params.l1(), (Point2::ORIGIN - pa).angle() + a);
    let b = crate::geom::wrap_angle((Point2::ORIGIN - pb).angle() - (pa - pb).angle());
    (a, b)
}

/// Connects the straightened placement (`a = b = π`) and the folded one on a
/// full-turn grid of both joint angles with the wedge fixed at `theta`.
pub fn unlock_check(
    params: &PetalParams,
    theta: f64,
    grid: usize,
    tol: &Tolerance,
) -> Result<UnlockReport, MotionError> {
    if grid < MIN_GRID {
        return Err(MotionError::GridTooSmall {
            min: MIN_GRID,
            got: grid,
        });
    }
    let axes = CspaceAxes {
        theta: Axis {
            lo: theta,
            step: 1.0,
            count: 1,
            periodic: false,
        },
        a: Axis::full_turn(grid),
        b: Axis::full_turn(grid),
        chart: CChart::JointAngle,
    };
    let (fa, fb) = folded_coords(params, theta);
    let straight = [axes.a.nearest(PI), axes.b.nearest(PI)];
    let folded = [axes.a.nearest(fa), axes.b.nearest(fb)];
    let s = cspace_census(params, axes, Some([0, straight[0], straight[1]]), tol)?;
    let f = cspace_census(params, axes, Some([0, folded[0], folded[1]]), tol)?;
    let sc = s.anchor_component.expect("anchor given").id;
    let fc = f.anchor_component.expect("anchor given").id;
    Ok(UnlockReport {
        theta,
        grid,
        straight_node: straight,
        folded_node: folded,
        straight_component: sc,
        folded_component: fc,
        component_count: s.component_count,
        connected: sc == fc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_locked_config;

    fn published() -> PetalParams {
        PetalParams::new(5, 0.9511, 0.299).unwrap()
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn constant_motion_has_no_violation() {
        let p = published();
        let c = build_locked_config(&p).unwrap();
        let m = Motion::from_frames(vec![c.clone(), c.clone(), c], DEFAULT_MAX_STEP);
        let r = monitor(&m, &p, &tol()).unwrap();
        assert!(r.started_in_hypothesis && !r.violation && r.motion_valid);
        assert_eq!((r.t_alpha, r.t_beta), (None, None));
        assert!(check_restricted_persists(&m, &p, &tol()).unwrap().pass);
    }

    #[test]
    fn monitor_rejects_non_petal_tree() {
        let p = published();
        let c = build_locked_config(&PetalParams::new(6, 0.866_112_657_06, 0.486_746_381_49).unwrap()).unwrap();
        let m = Motion::from_frames(vec![c], DEFAULT_MAX_STEP);
        assert!(matches!(monitor(&m, &p, &tol()), Err(MotionError::PetalCount { .. })));
    }

    #[test]
    fn budget_zero_returns_start() {
        let p = published();
        let c = build_locked_config(&p).unwrap();
        let out = probe(
            &c,
            ProbeStrategy::new(ProbeKind::Squeeze { petal: 0 }, 1, 0),
            &p,
            &tol(),
        )
        .unwrap();
        assert_eq!(out.motion.len(), 1);
        assert!((out.best_min_angle - p.theta_bar()).abs() < 1e-12);
    }

    #[test]
    fn probe_is_deterministic_and_clean() {
        let p = published();
        let c = build_locked_config(&p).unwrap();
        let s = ProbeStrategy::new(ProbeKind::Squeeze { petal: 2 }, 9, 200);
        let a = probe(&c, s, &p, &tol()).unwrap();
        let b = probe(&c, s, &p, &tol()).unwrap();
        assert_eq!(a.motion.frames(), b.motion.frames());
        assert!(a.accepted > 0);
        assert!(!a.report.violation && a.report.motion_valid && a.report.restricted_preserved());
        assert!(a.best_min_angle > p.alpha());
    }

    #[test]
    fn probe_rejects_bad_start() {
        let p = published();
        let open = crate::construct::build_open_config(&p).unwrap();
        let s = ProbeStrategy::new(ProbeKind::RandomWalk, 1, 10);
        assert!(matches!(
            probe(&open, s, &p, &tol()),
            Err(MotionError::StartOutsideHypothesis(_))
        ));
        let c = build_locked_config(&p).unwrap();
        let big = ProbeStrategy { step: 0.1, ..s };
        assert!(matches!(
            probe(&c, big, &p, &tol()),
            Err(MotionError::InvalidStrategy(_))
        ));
    }

    #[test]
    fn coords_round_trip() {
        let p = published();
        let pts = single_petal_points(&p, 1.2, 0.3, 2.0);
        let (t, a, b) = single_petal_coords(&pts);
        assert!((t - 1.2).abs() < 1e-12 && (a - 0.3).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn locked_anchor_is_restricted_node() {
        let p = published();
        let (axes, [i, j, k]) = default_axes(&p, 50).unwrap();
        let pts = chart_points(&p, axes.chart, axes.theta.value(i), axes.a.value(j), axes.b.value(k)).unwrap();
        let g = derive_geometry(&p, pts[0], pts[1], pts[2], pts[3], pts[4], &tol()).unwrap();
        assert!(g.restricted);
        assert!((g.theta - p.theta_bar()).abs() < 1e-12);
    }

    fn rotate_petal(c: &Configuration, petal: usize, by: f64) -> Configuration {
        let layout = PetalLayout::at(c.tree(), c.tree().root()).unwrap();
        let pj = layout.petals[petal];
        let mut pts = c.placement().to_vec();
        for j in [pj.a, pj.b, pj.c] {
            pts[j] = pts[j].rotate(by);
        }
        Configuration::new(c.tree().clone(), pts, &tol()).unwrap()
    }

    #[test]
    fn rotating_a_petal_past_beta_is_caught() {
        let p = published();
        let c = build_locked_config(&p).unwrap();
        let total = 1.2 * (p.beta() - p.theta_bar());
        let frames = (0..=20).map(|k| rotate_petal(&c, 0, total * k as f64 / 20.0)).collect();
        let r = monitor(&Motion::from_frames(frames, DEFAULT_MAX_STEP), &p, &tol()).unwrap();
        assert!(r.started_in_hypothesis);
        assert!(r.t_beta.is_some() && r.violation);
        assert!(!r.motion_valid && !r.counterexample());
    }

    #[test]
    fn persistence_check_rejects_jump() {
        let p = published();
        let c = build_locked_config(&p).unwrap();
        let layout = PetalLayout::at(c.tree(), 0).unwrap();
        let pj = layout.petals[0];
        let mut pts = c.placement().to_vec();
        // fold C over to the far side of AB
        let (b, a) = (pts[pj.b], pts[pj.a]);
        let d = (a - b).unit().unwrap();
        let v = pts[pj.c] - b;
        pts[pj.c] = b + d * (2.0 * v.dot(d)) - v;
        let flipped = Configuration::new(c.tree().clone(), pts, &tol()).unwrap();
        let m = Motion::from_frames(vec![c, flipped], DEFAULT_MAX_STEP);
        assert!(matches!(
            check_restricted_persists(&m, &p, &tol()),
            Err(MotionError::MotionInvalid(_))
        ));
    }

    #[test]
    fn unlocks_at_wide_wedge() {
        let p = published();
        let r = unlock_check(&p, 100f64.to_radians(), 60, &tol()).unwrap();
        assert!(r.connected);
    }

    #[test]
    fn small_grid_is_rejected() {
        assert!(matches!(
            cspace_components(&published(), 10, &tol()),
            Err(MotionError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn bearing_chart_recovers_c() {
        let p = published();
        let pts = locked_petal_points(&p).unwrap();
        let (t, a, _) = single_petal_coords(&pts);
        let back = chart_points(&p, CChart::Bearing, t, a, pts[4].angle()).unwrap();
        assert!(back[4].dist(pts[4]) < 1e-12);
    }
}
