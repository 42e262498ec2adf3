//! Single-petal mathematics: the derived scalars `β`, `l_P`, `θ_m`, `α`, the
//! points `P`, `Q`, `R`, `S`, and the restricted-configuration predicate.
//!
//! A petal is the path `O-A-B-C` with `‖OA‖ = 1`, `‖AB‖ = l1`, `‖BC‖ = l2`.
//! Its angle `θ` is measured counterclockwise from the preceding spoke `OA′`
//! to `OA`. `L` is the line through `O` and `A′`, and `𝒞` the circle of
//! radius `l1` about `A`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{
    angle_ccw, angle_delta, circle_line_meet, circle_segment_meet, foot_of_perpendicular, point_in_quadrilateral,
    GeomError, Point2, QuadLocation, Tolerance,
};
use crate::model::{Configuration, PetalLayout};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PetalError {
    #[error("n > 4 violated: n = {0}")]
    InvalidN(usize),
    #[error("l1 must lie in (0, 1), got {0}")]
    L1Domain(f64),
    #[error("l2 must be positive, got {0}")]
    L2Domain(f64),
    #[error("beta must lie in (0, π/2), got {0}")]
    BetaDomain(f64),
    #[error("theta {theta} outside [0, beta = {beta}] where the circle meets the line")]
    ThetaDomain { theta: f64, beta: f64 },
    #[error("no triangle with sides 1, {l1}, {l2}: arccos argument {arg}")]
    NoTriangle { l1: f64, l2: f64, arg: f64 },
    #[error("link {link} has length {actual}, expected {expected}")]
    LengthMismatch {
        link: &'static str,
        expected: f64,
        actual: f64,
    },
    #[error("geometry is not restricted: {0}")]
    NotRestricted(RestrictedVerdict),
    #[error("grid must be at least {min}, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct RawParams {
    n: usize,
    l1: f64,
    l2: f64,
}

/// `(n, l1, l2)`; all derived angles are recomputed on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PetalParams {
    n: usize,
    l1: f64,
    l2: f64,
}

impl TryFrom<RawParams> for PetalParams {
    type Error = PetalError;
    fn try_from(r: RawParams) -> Result<Self, PetalError> {
        PetalParams::new(r.n, r.l1, r.l2)
    }
}

impl From<PetalParams> for RawParams {
    fn from(p: PetalParams) -> Self {
        RawParams {
            n: p.n,
            l1: p.l1,
            l2: p.l2,
        }
    }
}

impl PetalParams {
    pub fn new(n: usize, l1: f64, l2: f64) -> Result<Self, PetalError> {
        if n <= 4 {
            return Err(PetalError::InvalidN(n));
        }
        if !(l1 > 0.0 && l1 < 1.0) {
            return Err(PetalError::L1Domain(l1));
        }
        if !(l2 > 0.0 && l2.is_finite()) {
            return Err(PetalError::L2Domain(l2));
        }
        Ok(PetalParams { n, l1, l2 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    /// `θ̄ = 2π/n`.
    pub fn theta_bar(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn beta(&self) -> f64 {
        self.l1.asin()
    }

    pub fn alpha(&self) -> f64 {
        (TAU - self.beta()) / (self.n - 1) as f64
    }

    pub fn theta_m(&self) -> Result<f64, PetalError> {
        theta_m_of(self.l1, self.l2)
    }

    /// `l_P(θ̄)`, the upper limit for `l2`.
    pub fn l_p_bar(&self) -> Result<f64, PetalError> {
        l_p(self.theta_bar(), self.l1)
    }
}

impl fmt::Display for PetalParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} l1={} l2={}", self.n, self.l1, self.l2)
    }
}

/// `β = arcsin l1`.
pub fn beta_of(l1: f64) -> Result<f64, PetalError> {
    if !(l1 > 0.0 && l1 < 1.0) {
        return Err(PetalError::L1Domain(l1));
    }
    Ok(l1.asin())
}

/// `‖OP‖ = cos θ − √(l1² − sin²θ)`: the nearer meet of `𝒞` with `L` when the
/// petal angle is `θ`.
pub fn l_p(theta: f64, l1: f64) -> Result<f64, PetalError> {
    let beta = beta_of(l1)?;
    // admit rounding noise at the ends of the domain
    let slack = 4.0 * f64::EPSILON * beta.max(1.0);
    if !(theta >= -slack && theta <= beta + slack) {
        return Err(PetalError::ThetaDomain { theta, beta });
    }
    let theta = theta.clamp(0.0, beta);
    let s = theta.sin();
    let radicand = ((l1 - s) * (l1 + s)).max(0.0);
    Ok(theta.cos() - radicand.sqrt())
}

/// Angle opposite the side `l1` in the triangle with sides `1, l1, l2`.
pub fn theta_m_of(l1: f64, l2: f64) -> Result<f64, PetalError> {
    if !(l1 > 0.0 && l1.is_finite()) {
        return Err(PetalError::L1Domain(l1));
    }
    if !(l2 > 0.0 && l2.is_finite()) {
        return Err(PetalError::L2Domain(l2));
    }
    let arg = (1.0 - l1 * l1 + l2 * l2) / (2.0 * l2);
    if !(-1.0..=1.0).contains(&arg) {
        return Err(PetalError::NoTriangle { l1, l2, arg });
    }
    Ok(arg.acos())
}

/// `α = (2π − β)/(n − 1)`.
pub fn alpha_of(n: usize, beta: f64) -> Result<f64, PetalError> {
    if n <= 4 {
        return Err(PetalError::InvalidN(n));
    }
    if !(beta > 0.0 && beta < PI / 2.0) {
        return Err(PetalError::BetaDomain(beta));
    }
    Ok((TAU - beta) / (n - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestrictedCondition {
    /// (i) `θ < β`.
    AngleBelowBeta,
    /// (ii) `B` on the open small arc `PQ`.
    BOnOpenArc,
    /// (iii) `C` strictly inside `□ORBS`.
    CInsideQuad,
}

impl fmt::Display for RestrictedCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RestrictedCondition::AngleBelowBeta => "(i) theta < beta",
            RestrictedCondition::BOnOpenArc => "(ii) B on open arc PQ",
            RestrictedCondition::CInsideQuad => "(iii) C inside ORBS",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "condition", rename_all = "snake_case")]
pub enum RestrictedVerdict {
    Restricted,
    Fails(RestrictedCondition),
}

impl RestrictedVerdict {
    pub fn is_restricted(&self) -> bool {
        matches!(self, RestrictedVerdict::Restricted)
    }
}

impl fmt::Display for RestrictedVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestrictedVerdict::Restricted => f.write_str("restricted"),
            RestrictedVerdict::Fails(c) => write!(f, "fails {c}"),
        }
    }
}

/// Derived objects of one petal placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetalGeometry {
    pub o: Point2,
    pub a_prime: Point2,
    pub a: Point2,
    pub b: Point2,
    pub c: Point2,
    pub theta: f64,
    pub p: Option<Point2>,
    pub q: Option<Point2>,
    pub r: Option<Point2>,
    pub s: Option<Point2>,
    /// Position of `B` along the small arc, 0 at `P` and 1 at `Q`; present
    /// when `B` is on the closed arc.
    pub arc_param: Option<f64>,
    pub verdict: RestrictedVerdict,
    pub restricted: bool,
}

/// The points `P` and `Q` for a petal at `o` with spokes `a_prime`, `a`.
fn arc_ends(
    o: Point2,
    a_prime: Point2,
    a: Point2,
    l1: f64,
    tol: &Tolerance,
) -> Result<Option<(Point2, Point2)>, PetalError> {
    let theta = angle_ccw(o, a_prime, a)?;
    let beta = beta_of(l1)?;
    if theta > beta {
        return Ok(None);
    }
    let p = match circle_line_meet(a, l1, o, a_prime, tol)?.first() {
        Some(p) => *p,
        // rounding can push an exact tangency just out of reach
        None => foot_of_perpendicular(a, o, a_prime)?,
    };
    let q = match circle_segment_meet(a, l1, o, a, tol)?.first() {
        Some(q) => *q,
        None => o + (a - o).unit().ok_or(GeomError::DegenerateRay)? * (a.dist(o) - l1),
    };
    Ok(Some((p, q)))
}

/// Point at parameter `t` of the small arc from `P` (0) to `Q` (1), linear in
/// angle about `A`. `None` when `θ > β`.
pub fn arc_point(
    o: Point2,
    a_prime: Point2,
    a: Point2,
    l1: f64,
    t: f64,
    tol: &Tolerance,
) -> Result<Option<Point2>, PetalError> {
    Ok(arc_ends(o, a_prime, a, l1, tol)?.map(|(p, q)| {
        let phi_p = (p - a).angle();
        let delta = angle_delta(phi_p, (q - a).angle());
        a + Point2::polar(l1, phi_p + t * delta)
    }))
}

fn check_len(link: &'static str, u: Point2, v: Point2, expected: f64, tol: &Tolerance) -> Result<(), PetalError> {
    let actual = u.dist(v);
    if (actual - expected).abs() > tol.eps_len() {
        return Err(PetalError::LengthMismatch { link, expected, actual });
    }
    Ok(())
}

/// Computes `θ`, `P`, `Q`, `R`, `S` and the restricted verdict for one petal.
pub fn derive_geometry(
    params: &PetalParams,
    o: Point2,
    a_prime: Point2,
    a: Point2,
    b: Point2,
    c: Point2,
    tol: &Tolerance,
) -> Result<PetalGeometry, PetalError> {
    check_len("OA", o, a, 1.0, tol)?;
    check_len("AB", a, b, params.l1, tol)?;
    check_len("BC", b, c, params.l2, tol)?;
    let theta = angle_ccw(o, a_prime, a)?;
    let ends = arc_ends(o, a_prime, a, params.l1, tol)?;

    let mut arc_param = None;
    let (mut r, mut s) = (None, None);
    if let Some((p, q)) = ends {
        let phi_p = (p - a).angle();
        let delta = angle_delta(phi_p, (q - a).angle());
        let span = params.l1 * delta.abs();
        if span <= tol.eps_len() {
            if b.dist(p) <= tol.eps_len() {
                arc_param = Some(0.0);
            }
        } else {
            let t = angle_delta(phi_p, (b - a).angle()) / delta;
            let slack = tol.eps_len() / span;
            if (-slack..=1.0 + slack).contains(&t) {
                arc_param = Some(t);
            }
        }
        if arc_param.is_some() {
            r = Some(foot_of_perpendicular(b, o, a_prime)?);
            s = Some(foot_of_perpendicular(b, o, a)?);
        }
    }

    let mut g = PetalGeometry {
        o,
        a_prime,
        a,
        b,
        c,
        theta,
        p: ends.map(|e| e.0),
        q: ends.map(|e| e.1),
        r,
        s,
        arc_param,
        verdict: RestrictedVerdict::Fails(RestrictedCondition::AngleBelowBeta),
        restricted: false,
    };
    g.verdict = evaluate(&g, params, tol);
    g.restricted = g.verdict.is_restricted();
    Ok(g)
}

fn evaluate(g: &PetalGeometry, params: &PetalParams, tol: &Tolerance) -> RestrictedVerdict {
    use RestrictedCondition::*;
    if !(g.theta < params.beta() - tol.eps_ang()) {
        return RestrictedVerdict::Fails(AngleBelowBeta);
    }
    let (Some(p), Some(q), Some(t), Some(r), Some(s)) = (g.p, g.q, g.arc_param, g.r, g.s) else {
        return RestrictedVerdict::Fails(BOnOpenArc);
    };
    if !(t > 0.0 && t < 1.0) || g.b.dist(p) <= tol.eps_len() || g.b.dist(q) <= tol.eps_len() {
        return RestrictedVerdict::Fails(BOnOpenArc);
    }
    match point_in_quadrilateral(g.c, g.o, r, g.b, s, tol) {
        Ok(QuadLocation::Inside) => RestrictedVerdict::Restricted,
        _ => RestrictedVerdict::Fails(CInsideQuad),
    }
}

/// Re-evaluates the three strict conditions, reporting the first that fails.
pub fn is_restricted(g: &PetalGeometry, params: &PetalParams, tol: &Tolerance) -> RestrictedVerdict {
    evaluate(g, params, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrBsReport {
    pub br: f64,
    pub bs: f64,
    pub bound: f64,
    /// `‖OQ‖ sin θ`, the analytic cap on `‖BR‖`.
    pub oq_sin_theta: f64,
    /// `‖OP‖ sin θ`, the analytic cap on `‖BS‖`.
    pub op_sin_theta: f64,
    pub analytic_ok: bool,
    pub pass: bool,
}

/// Checks `‖BR‖ < l2` and `‖BS‖ < l2` on a restricted petal, alongside the
/// analytic caps `‖OQ‖ sin θ` and `‖OP‖ sin θ`.
pub fn check_br_bs_bound(g: &PetalGeometry, params: &PetalParams, tol: &Tolerance) -> Result<BrBsReport, PetalError> {
    let verdict = is_restricted(g, params, tol);
    let (true, Some(p), Some(q), Some(r), Some(s)) = (verdict.is_restricted(), g.p, g.q, g.r, g.s) else {
        return Err(PetalError::NotRestricted(verdict));
    };
    let br = g.b.dist(r);
    let bs = g.b.dist(s);
    let sin = g.theta.sin();
    let oq_sin_theta = g.o.dist(q) * sin;
    let op_sin_theta = g.o.dist(p) * sin;
    Ok(BrBsReport {
        br,
        bs,
        bound: params.l2,
        oq_sin_theta,
        op_sin_theta,
        analytic_ok: br <= oq_sin_theta + tol.eps_len() && bs <= op_sin_theta + tol.eps_len(),
        pass: br < params.l2 && bs < params.l2,
    })
}

/// Canonical single-petal frame: `O` at the origin, `A′ = (1, 0)`, `A` at
/// angle `θ`.
pub fn petal_frame(theta: f64) -> (Point2, Point2, Point2) {
    (Point2::ORIGIN, Point2::new(1.0, 0.0), Point2::polar(1.0, theta))
}

/// Arcs of the circle about `center` with radius `radius` that lie inside the
/// quadrilateral, as `(start angle, sweep)` pairs with positive sweep.
fn arcs_inside_quad(center: Point2, radius: f64, quad: [Point2; 4], tol: &Tolerance) -> Vec<(f64, f64)> {
    let mut cuts = Vec::new();
    for i in 0..4 {
        if let Ok(meets) = circle_segment_meet(center, radius, quad[i], quad[(i + 1) % 4], tol) {
            cuts.extend(meets.into_iter().map(|m| (m - center).angle()));
        }
    }
    let inside = |phi: f64| {
        matches!(
            point_in_quadrilateral(
                center + Point2::polar(radius, phi),
                quad[0],
                quad[1],
                quad[2],
                quad[3],
                tol
            ),
            Ok(QuadLocation::Inside)
        )
    };
    if cuts.is_empty() {
        return if inside(0.0) { vec![(0.0, TAU)] } else { Vec::new() };
    }
    cuts.sort_by(f64::total_cmp);
    let mut arcs = Vec::new();
    for i in 0..cuts.len() {
        let start = cuts[i];
        let end = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + TAU };
        let sweep = end - start;
        if sweep > 0.0 && inside(start + 0.5 * sweep) {
            arcs.push((start, sweep));
        }
    }
    arcs
}

/// Draws one single-petal placement with `θ` uniform in `theta_range`, `B` on
/// the small arc `PQ`, and `C` uniform over the part of the circle about `B`
/// inside `□ORBS`. The arc parameter is `u⁴` for uniform `u`, which
/// concentrates draws near `P` where restricted placements live. Returns the
/// first draw that passes [`is_restricted`], or `None` after `max_tries`.
pub fn sample_restricted<R: Rng>(
    params: &PetalParams,
    theta_range: (f64, f64),
    rng: &mut R,
    max_tries: usize,
    tol: &Tolerance,
) -> Result<Option<PetalGeometry>, PetalError> {
    let (lo, hi) = theta_range;
    for _ in 0..max_tries {
        let theta = lo + (hi - lo) * rng.gen::<f64>();
        let (o, a_prime, a) = petal_frame(theta);
        let u: f64 = rng.gen();
        let Some(b) = arc_point(o, a_prime, a, params.l1, u.powi(4), tol)? else {
            continue;
        };
        let (r, s) = (foot_of_perpendicular(b, o, a_prime)?, foot_of_perpendicular(b, o, a)?);
        let arcs = arcs_inside_quad(b, params.l2, [o, r, b, s], tol);
        let total: f64 = arcs.iter().map(|a| a.1).sum();
        if total <= 0.0 {
            continue;
        }
        let mut x = total * rng.gen::<f64>();
        let mut phi = arcs[0].0;
        for &(start, sweep) in &arcs {
            if x <= sweep {
                phi = start + x;
                break;
            }
            x -= sweep;
        }
        let c = b + Point2::polar(params.l2, phi);
        let g = derive_geometry(params, o, a_prime, a, b, c, tol)?;
        if g.restricted {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// Smallest petal angle among restricted placements on a uniform
/// `grid × grid × grid` sweep of `θ ∈ (0, β)`, the arc parameter in `(0, 1)`
/// and the direction of `C` about `B`. `INFINITY` when no grid point is
/// restricted.
pub fn min_restricted_angle_bruteforce(params: &PetalParams, grid: usize, tol: &Tolerance) -> Result<f64, PetalError> {
    min_restricted_angle_over(params, 0.0, params.beta(), grid, tol)
}

/// As [`min_restricted_angle_bruteforce`] with `θ` restricted to cell
/// centers of `[lo, hi]`.
pub fn min_restricted_angle_over(
    params: &PetalParams,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: &Tolerance,
) -> Result<f64, PetalError> {
    const MIN_GRID: usize = 50;
    if grid < MIN_GRID {
        return Err(PetalError::GridTooSmall {
            min: MIN_GRID,
            got: grid,
        });
    }
    let g = grid as f64;
    for k in 0..grid {
        let theta = lo + (hi - lo) * (k as f64 + 0.5) / g;
        let (o, a_prime, a) = petal_frame(theta);
        for j in 0..grid {
            let Some(b) = arc_point(o, a_prime, a, params.l1, (j as f64 + 0.5) / g, tol)? else {
                continue;
            };
            for i in 0..grid {
                let c = b + Point2::polar(params.l2, TAU * i as f64 / g);
                if derive_geometry(params, o, a_prime, a, b, c, tol)?.restricted {
                    // θ increases with k, so the first hit is the minimum
                    return Ok(theta);
                }
            }
        }
    }
    Ok(f64::INFINITY)
}

/// Geometry of every petal of `layout` in configuration `c`.
pub fn petal_geometries(
    c: &Configuration,
    layout: &PetalLayout,
    params: &PetalParams,
    tol: &Tolerance,
) -> Result<Vec<PetalGeometry>, PetalError> {
    let o = c.point(layout.center);
    layout
        .petals
        .iter()
        .enumerate()
        .map(|(i, pj)| {
            derive_geometry(
                params,
                o,
                c.point(layout.previous_spoke(i)),
                c.point(pj.a),
                c.point(pj.b),
                c.point(pj.c),
                tol,
            )
        })
        .collect()
}

/// Restricted flag of every petal of `layout` in `c`.
pub fn restricted_flags(
    c: &Configuration,
    layout: &PetalLayout,
    params: &PetalParams,
    tol: &Tolerance,
) -> Result<Vec<bool>, PetalError> {
    Ok(petal_geometries(c, layout, params, tol)?
        .iter()
        .map(|g| g.restricted)
        .collect())
}
