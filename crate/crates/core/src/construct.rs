//! Parameter selection, the constraint system, the locked and open petal-tree
//! configurations, and the chained family of lockable trees.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point2, Tolerance};
use crate::model::{is_simple, Configuration, Edge, JointId, LinkTree, ModelError, PetalLayout, Simplicity};
use crate::petal::{arc_point, l_p, petal_frame, petal_geometries, theta_m_of, PetalError, PetalParams};

const DEG: f64 = PI / 180.0;

/// Number of petals in each subtree of the chained family.
pub const CHAIN_PETALS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error("invalid epsilon {value_deg}° for n = {n}: {reason}")]
    InvalidEpsilon { n: usize, value_deg: f64, reason: String },
    #[error("parameters infeasible: {} fails", .0.first_failure().map_or("?".to_string(), |e| e.id.to_string()))]
    Infeasible(Box<ConstraintReport>),
    #[error("no arc point at the target distance {target} from O")]
    BisectionFailed { target: f64 },
    #[error("built configuration failed verification: {0}")]
    NotVerified(String),
    #[error("connector length {given} too short; subtrees need more than {minimum}")]
    ConnectorTooShort { given: f64, minimum: f64 },
    #[error("chain needs k >= 1, got {0}")]
    InvalidK(usize),
    #[error(transparent)]
    Petal(#[from] PetalError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonProvenance {
    FixedSmallN,
    Chosen,
}

/// The slack `ε` used by [`choose_params`], in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Epsilon {
    value: f64,
    provenance: EpsilonProvenance,
}

impl Epsilon {
    /// The only value admitted for `n ∈ {5, 6}`.
    pub const SMALL_N_DEG: f64 = 0.01;
    /// Exclusive upper bound for `n ≥ 7`.
    pub const MAX_DEG: f64 = 0.4;
    /// Default for `n ≥ 7`.
    pub const DEFAULT_DEG: f64 = 0.2;

    pub fn from_degrees(n: usize, deg: f64) -> Result<Self, ConstructError> {
        let bad = |reason: &str| ConstructError::InvalidEpsilon {
            n,
            value_deg: deg,
            reason: reason.to_string(),
        };
        match n {
            0..=4 => Err(bad("n > 4 violated")),
            5 | 6 => {
                if (deg - Self::SMALL_N_DEG).abs() <= 1e-12 {
                    Ok(Epsilon {
                        value: Self::SMALL_N_DEG * DEG,
                        provenance: EpsilonProvenance::FixedSmallN,
                    })
                } else {
                    Err(bad("n = 5 and n = 6 require epsilon = 0.01°"))
                }
            }
            _ => {
                if deg > 0.0 && deg < Self::MAX_DEG {
                    Ok(Epsilon {
                        value: deg * DEG,
                        provenance: EpsilonProvenance::Chosen,
                    })
                } else {
                    Err(bad("n >= 7 requires 0 < epsilon < 0.4°"))
                }
            }
        }
    }

    pub fn default_for(n: usize) -> Result<Self, ConstructError> {
        Self::from_degrees(n, if n <= 6 { Self::SMALL_N_DEG } else { Self::DEFAULT_DEG })
    }

    pub fn radians(&self) -> f64 {
        self.value
    }

    pub fn degrees(&self) -> f64 {
        self.value / DEG
    }

    pub fn provenance(&self) -> EpsilonProvenance {
        self.provenance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintId {
    NGreater4,
    L1Below1,
    ThetaBarBelowBeta,
    L2BelowLpThetaBar,
    L2AboveSinCos,
    L1PlusL2Above1,
    AlphaBelowThetaM,
}

impl ConstraintId {
    pub const ALL: [ConstraintId; 7] = [
        ConstraintId::NGreater4,
        ConstraintId::L1Below1,
        ConstraintId::ThetaBarBelowBeta,
        ConstraintId::L2BelowLpThetaBar,
        ConstraintId::L2AboveSinCos,
        ConstraintId::L1PlusL2Above1,
        ConstraintId::AlphaBelowThetaM,
    ];
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintId::NGreater4 => "n > 4",
            ConstraintId::L1Below1 => "l1 < 1",
            ConstraintId::ThetaBarBelowBeta => "θ̄ < β",
            ConstraintId::L2BelowLpThetaBar => "l2 < l_P(θ̄)",
            ConstraintId::L2AboveSinCos => "l2 > sinβcosβ",
            ConstraintId::L1PlusL2Above1 => "l1 + l2 > 1",
            ConstraintId::AlphaBelowThetaM => "α < θ_m",
        })
    }
}

/// One inequality written as `lhs < rhs`; `margin = rhs − lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
/// One constraint; `lhs` and `rhs` are the sides as the label writes them
/// and `margin` is positive exactly when it holds.
pub struct ConstraintEntry {
    pub id: ConstraintId,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub pass: bool,
}

impl ConstraintEntry {
    /// `lhs < rhs`.
    fn less(id: ConstraintId, lhs: Option<f64>, rhs: Option<f64>) -> Self {
        Self::with_margin(id, lhs, rhs, lhs.zip(rhs).map(|(l, r)| r - l))
    }

    /// `lhs > rhs`.
    fn greater(id: ConstraintId, lhs: Option<f64>, rhs: Option<f64>) -> Self {
        Self::with_margin(id, lhs, rhs, lhs.zip(rhs).map(|(l, r)| l - r))
    }

    fn with_margin(id: ConstraintId, lhs: Option<f64>, rhs: Option<f64>, margin: Option<f64>) -> Self {
        ConstraintEntry {
            id,
            lhs,
            rhs,
            margin,
            pass: margin.is_some_and(|m| m > 0.0),
        }
    }
}

/// The ordering `α < θ_m < θ̄ < β`, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingChain {
    pub alpha: Option<f64>,
    pub theta_m: Option<f64>,
    pub theta_bar: Option<f64>,
    pub beta: Option<f64>,
    /// `θ_m − α`, `θ̄ − θ_m`, `β − θ̄`.
    pub margins: [Option<f64>; 3],
    pub pass: bool,
}

impl fmt::Display for OrderingChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{:.6}", v / DEG));
        write!(
            f,
            "{} < {} < {} < {}",
            d(self.alpha),
            d(self.theta_m),
            d(self.theta_bar),
            d(self.beta)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub n: usize,
    pub l1: f64,
    pub l2: f64,
    pub entries: Vec<ConstraintEntry>,
    pub chain: OrderingChain,
}

impl ConstraintReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn first_failure(&self) -> Option<&ConstraintEntry> {
        self.entries.iter().find(|e| !e.pass)
    }

    pub fn entry(&self, id: ConstraintId) -> &ConstraintEntry {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .expect("report holds every constraint")
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.9}"));
        writeln!(f, "constraints for n={} l1={} l2={}", self.n, self.l1, self.l2)?;
        for e in &self.entries {
            writeln!(
                f,
                "  {:<14} {}  lhs={} rhs={} margin={}",
                e.id.to_string(),
                if e.pass { "pass" } else { "FAIL" },
                v(e.lhs),
                v(e.rhs),
                v(e.margin)
            )?;
        }
        write!(
            f,
            "  chain (deg)    {}  {}",
            if self.chain.pass { "pass" } else { "FAIL" },
            self.chain
        )
    }
}

/// Evaluates every constraint that is defined for the inputs; never fails.
pub fn check_constraints(n: usize, l1: f64, l2: f64) -> ConstraintReport {
    let theta_bar = (n > 0).then(|| TAU / n as f64);
    let beta = (l1 > 0.0 && l1 <= 1.0).then(|| l1.asin());
    let alpha = beta.filter(|_| n > 1).map(|b| (TAU - b) / (n - 1) as f64);
    let theta_m = theta_m_of(l1, l2).ok();
    let lp_bar = theta_bar.and_then(|t| l_p(t, l1).ok());

    use ConstraintId::*;
    let entries = vec![
        ConstraintEntry::greater(NGreater4, Some(n as f64), Some(4.0)),
        ConstraintEntry::less(L1Below1, Some(l1), Some(1.0)),
        ConstraintEntry::less(ThetaBarBelowBeta, theta_bar, beta),
        ConstraintEntry::less(L2BelowLpThetaBar, Some(l2), lp_bar),
        ConstraintEntry::greater(L2AboveSinCos, Some(l2), beta.map(|b| b.sin() * b.cos())),
        ConstraintEntry::greater(L1PlusL2Above1, Some(l1 + l2), Some(1.0)),
        ConstraintEntry::less(AlphaBelowThetaM, alpha, theta_m),
    ];
    let diff = |lo: Option<f64>, hi: Option<f64>| lo.zip(hi).map(|(l, h)| h - l);
    let margins = [diff(alpha, theta_m), diff(theta_m, theta_bar), diff(theta_bar, beta)];
    ConstraintReport {
        n,
        l1,
        l2,
        entries,
        chain: OrderingChain {
            alpha,
            theta_m,
            theta_bar,
            beta,
            margins,
            pass: margins.iter().all(|m| m.is_some_and(|m| m > 0.0)),
        },
    }
}

/// `l1 = sin(θ̄ + ε)`, `l2 = l_P(θ̄ − ε/n)`, verified against the full system.
pub fn choose_params(n: usize, eps: Epsilon) -> Result<PetalParams, ConstructError> {
    let checked = Epsilon::from_degrees(n, eps.degrees())?;
    let e = checked.radians();
    let theta_bar = TAU / n as f64;
    let l1 = (theta_bar + e).sin();
    let l2 = l_p(theta_bar - e / n as f64, l1)?;
    let report = check_constraints(n, l1, l2);
    if !report.all_pass() {
        return Err(ConstructError::Infeasible(Box::new(report)));
    }
    Ok(PetalParams::new(n, l1, l2)?)
}

fn require_feasible(params: &PetalParams) -> Result<(), ConstructError> {
    let report = check_constraints(params.n(), params.l1(), params.l2());
    if report.all_pass() {
        Ok(())
    } else {
        Err(ConstructError::Infeasible(Box::new(report)))
    }
}

/// The `n`-petal tree with joints `O, A0, B0, C0, A1, ...` and links listed
/// petal by petal as `OA_i, A_iB_i, B_iC_i`.
pub fn petal_tree(params: &PetalParams) -> LinkTree {
    let (joints, edges) = petal_parts(params, "", 0);
    LinkTree::new(joints, edges, 0)
}

fn petal_parts(params: &PetalParams, tag: &str, offset: JointId) -> (Vec<String>, Vec<Edge>) {
    let mut joints = vec![format!("O{tag}")];
    let mut edges = Vec::new();
    let sep = if tag.is_empty() { "" } else { "_" };
    for i in 0..params.n() {
        let a = offset + 1 + 3 * i;
        joints.extend(["A", "B", "C"].map(|x| format!("{x}{tag}{sep}{i}")));
        edges.push(Edge {
            from: offset,
            to: a,
            length: 1.0,
        });
        edges.push(Edge {
            from: a,
            to: a + 1,
            length: params.l1(),
        });
        edges.push(Edge {
            from: a + 1,
            to: a + 2,
            length: params.l2(),
        });
    }
    (joints, edges)
}

/// `B` and `C` of the locked petal in the canonical frame with `θ = θ̄`.
fn locked_petal(params: &PetalParams, tol: &Tolerance) -> Result<(Point2, Point2, Point2), ConstructError> {
    let theta_bar = params.theta_bar();
    let (o, a_prime, a) = petal_frame(theta_bar);
    let target = 0.5 * (params.l2() + l_p(theta_bar, params.l1())?);
    let ob = |t: f64| -> Result<f64, ConstructError> {
        Ok(arc_point(o, a_prime, a, params.l1(), t, tol)?
            .ok_or(ConstructError::BisectionFailed { target })?
            .norm())
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if !(ob(lo)? > target && ob(hi)? < target) {
        return Err(ConstructError::BisectionFailed { target });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ob(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let b = arc_point(o, a_prime, a, params.l1(), 0.5 * (lo + hi), tol)?
        .ok_or(ConstructError::BisectionFailed { target })?;
    let c = b + (o - b).unit().ok_or(ConstructError::BisectionFailed { target })? * params.l2();
    Ok((a, b, c))
}

/// The locked petal alone in the canonical frame, as `[O, A′, A, B, C]`.
/// Only needs `θ̄ < β` and `l2 < l_P(θ̄)`; the full constraint set is not
/// checked, so relaxed parameters can be explored.
pub fn locked_petal_placement(params: &PetalParams, tol: &Tolerance) -> Result<[Point2; 5], ConstructError> {
    let (o, a_prime, _) = petal_frame(params.theta_bar());
    let (a, b, c) = locked_petal(params, tol)?;
    Ok([o, a_prime, a, b, c])
}

/// Joint positions of a locked petal tree centered at the origin, petal `i`'s
/// spoke at angle `i·θ̄ + rotation`.
fn locked_points(params: &PetalParams, rotation: f64, tol: &Tolerance) -> Result<Vec<Point2>, ConstructError> {
    let (a, b, c) = locked_petal(params, tol)?;
    let mut pts = vec![Point2::ORIGIN];
    for i in 0..params.n() {
        // the canonical frame has the preceding spoke on the +x axis
        let turn = rotation + (i as f64 - 1.0) * params.theta_bar();
        pts.extend([a, b, c].map(|p| p.rotate(turn)));
    }
    Ok(pts)
}

fn open_points(params: &PetalParams, rotation: f64) -> Vec<Point2> {
    let half = 0.5 * params.alpha();
    let mut pts = vec![Point2::ORIGIN];
    for i in 0..params.n() {
        let u = Point2::polar(1.0, rotation + i as f64 * half);
        pts.extend([u, u * (1.0 + params.l1()), u * (1.0 + params.l1() + params.l2())]);
    }
    pts
}

fn verify_simple(c: &Configuration, tol: &Tolerance, what: &str) -> Result<(), ConstructError> {
    match is_simple(c, tol)? {
        Simplicity::Simple => Ok(()),
        Simplicity::Violation(v) => Err(ConstructError::NotVerified(format!("{what} is not simple: {v}"))),
    }
}

/// All petals congruent with angle `θ̄`; `B` on the open arc `PQ` where
/// `‖OB‖ = (l2 + l_P(θ̄))/2` and `C` on segment `BO`. Verified simple with
/// every petal restricted.
pub fn build_locked_config(params: &PetalParams) -> Result<Configuration, ConstructError> {
    require_feasible(params)?;
    let tol = Tolerance::default();
    let tree = Arc::new(petal_tree(params));
    let c = Configuration::new(tree, locked_points(params, 0.0, &tol)?, &tol)?;
    verify_simple(&c, &tol, "locked configuration")?;
    let layout = PetalLayout::at(c.tree(), c.tree().root())?;
    for (i, g) in petal_geometries(&c, &layout, params, &tol)?.iter().enumerate() {
        if !g.restricted {
            return Err(ConstructError::NotVerified(format!("petal {i} {}", g.verdict)));
        }
    }
    Ok(c)
}

/// Radially straightened petals with `θ_0 = 2π − (n−1)·α/2` and all other
/// petal angles `α/2`.
pub fn build_open_config(params: &PetalParams) -> Result<Configuration, ConstructError> {
    require_feasible(params)?;
    let tol = Tolerance::default();
    let tree = Arc::new(petal_tree(params));
    let c = Configuration::new(tree, open_points(params, 0.0), &tol)?;
    verify_simple(&c, &tol, "open configuration")?;
    Ok(c)
}

/// `k` copies of the eight-petal tree whose centers are joined by straight
/// connector links.
#[derive(Debug, Clone)]
pub struct ChainFamily {
    tree: Arc<LinkTree>,
    params: PetalParams,
    centers: Vec<JointId>,
    connector_length: f64,
}

impl ChainFamily {
    pub fn tree(&self) -> &Arc<LinkTree> {
        &self.tree
    }

    pub fn params(&self) -> &PetalParams {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[JointId] {
        &self.centers
    }

    pub fn connector_length(&self) -> f64 {
        self.connector_length
    }

    pub fn label_count(&self) -> usize {
        1 << self.k()
    }

    /// Label as a bit string, subtree 0 first; `1` is open, `0` locked.
    pub fn label_name(&self, label: usize) -> String {
        (0..self.k())
            .map(|s| if label >> s & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn layouts(&self) -> Result<Vec<PetalLayout>, ConstructError> {
        self.centers
            .iter()
            .map(|&c| PetalLayout::at(&self.tree, c).map_err(ConstructError::from))
            .collect()
    }

    /// The configuration for one label, verified simple.
    pub fn configuration(&self, label: usize) -> Result<Configuration, ConstructError> {
        let tol = Tolerance::default();
        let mut pts = Vec::with_capacity(self.tree.joint_count());
        let sliver = self.locked_sliver(&tol)?;
        for s in 0..self.k() {
            let shift = Point2::new(s as f64 * self.connector_length, 0.0);
            let local = if label >> s & 1 == 1 {
                // petal 0's wedge is bisected by the +y axis
                let wedge = TAU - (self.params.n() - 1) as f64 * 0.5 * self.params.alpha();
                open_points(&self.params, PI / 2.0 + 0.5 * wedge)
            } else {
                // petal 1's free sliver lies on the +x axis
                locked_points(&self.params, -sliver, &tol)?
            };
            pts.extend(local.into_iter().map(|p| p + shift));
        }
        let c = Configuration::new(self.tree.clone(), pts, &tol)?;
        verify_simple(&c, &tol, &format!("chain configuration {}", self.label_name(label)))?;
        Ok(c)
    }

    /// Half the angle between a locked petal's preceding spoke and its `B`:
    /// the direction from `O` free of links inside the petal's wedge.
    fn locked_sliver(&self, tol: &Tolerance) -> Result<f64, ConstructError> {
        let (_, b, _) = locked_petal(&self.params, tol)?;
        Ok(0.5 * b.angle())
    }
}

/// Builds the chain of `k` eight-petal trees with `ε = 0.2°`, giving
/// `24k + (k − 1)` links. `connector_length` defaults to `3(1 + l1 + l2) + 1`.
pub fn build_chain_of_trees(k: usize, connector_length: Option<f64>) -> Result<ChainFamily, ConstructError> {
    if k == 0 {
        return Err(ConstructError::InvalidK(k));
    }
    let params = choose_params(CHAIN_PETALS, Epsilon::default_for(CHAIN_PETALS)?)?;
    let reach = 1.0 + params.l1() + params.l2();
    let length = connector_length.unwrap_or(3.0 * reach + 1.0);
    let minimum = 2.0 * reach;
    if !(length.is_finite() && length > 0.0) || (k >= 2 && length <= minimum) {
        return Err(ConstructError::ConnectorTooShort { given: length, minimum });
    }
    let mut joints = Vec::new();
    let mut edges = Vec::new();
    let mut centers = Vec::new();
    for s in 0..k {
        let offset = joints.len();
        let (j, e) = petal_parts(&params, &s.to_string(), offset);
        centers.push(offset);
        joints.extend(j);
        edges.extend(e);
    }
    for w in centers.windows(2) {
        edges.push(Edge {
            from: w[0],
            to: w[1],
            length,
        });
    }
    let tree = LinkTree::new(joints, edges, 0);
    if !tree.is_valid() {
        return Err(ModelError::InvalidTree(crate::model::validate_tree(&tree)).into());
    }
    Ok(ChainFamily {
        tree: Arc::new(tree),
        params,
        centers,
        connector_length: length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::petal_angles;
    use crate::petal::restricted_flags;
    use approx::assert_abs_diff_eq;

    fn published() -> PetalParams {
        PetalParams::new(5, 0.9511, 0.299).unwrap()
    }

    #[test]
    fn epsilon_invariants() {
        assert!(Epsilon::from_degrees(5, 0.01).is_ok());
        assert!(Epsilon::from_degrees(6, 0.02).is_err());
        assert!(Epsilon::from_degrees(7, 0.4).is_err());
        assert!(Epsilon::from_degrees(7, 0.0).is_err());
        assert_eq!(
            Epsilon::from_degrees(9, 0.39).unwrap().provenance(),
            EpsilonProvenance::Chosen
        );
        assert!(Epsilon::from_degrees(4, 0.01).is_err());
    }

    #[test]
    fn choose_params_examples() {
        let p5 = choose_params(5, Epsilon::default_for(5).unwrap()).unwrap();
        // frozen from a 30-digit evaluation
        assert_abs_diff_eq!(p5.l1(), 0.951_110_435_45, epsilon = 1e-10);
        assert_abs_diff_eq!(p5.l2(), 0.297_955_968_83, epsilon = 1e-10);
        let p8 = choose_params(8, Epsilon::from_degrees(8, 0.2).unwrap()).unwrap();
        assert_abs_diff_eq!(p8.l1(), 0.709_570_736_54, epsilon = 1e-10);
        assert_abs_diff_eq!(p8.l2(), 0.644_749_767_22, epsilon = 1e-10);
    }

    #[test]
    fn published_params_pass_every_constraint() {
        let r = check_constraints(5, 0.9511, 0.299);
        assert!(r.all_pass(), "{r}");
        assert!(r.chain.pass);
        assert_eq!(r.entries.len(), 7);
    }

    #[test]
    fn n4_fails_only_n() {
        let r = check_constraints(4, 0.9, 0.3);
        assert!(!r.entry(ConstraintId::NGreater4).pass);
        assert!(r
            .entries
            .iter()
            .all(|e| e.margin.is_some() || e.id == ConstraintId::L2BelowLpThetaBar));
        assert!(r.entry(ConstraintId::L1Below1).pass);
    }

    #[test]
    fn short_l2_fails() {
        // 0.9511 + 0.05 exceeds 1, so this set fails elsewhere
        let r = check_constraints(5, 0.9511, 0.05);
        assert!(!r.all_pass());
        assert!(r.entry(ConstraintId::L1PlusL2Above1).pass);
        assert_eq!(r.first_failure().unwrap().id, ConstraintId::L2AboveSinCos);
        let r = check_constraints(5, 0.9511, 0.04);
        assert!(!r.entry(ConstraintId::L1PlusL2Above1).pass);
    }

    #[test]
    fn margins_sign_matches_pass() {
        for (n, l1, l2) in [(5, 0.9511, 0.299), (3, 1.2, -1.0), (6, 0.5, 0.5), (12, 0.1, 2.0)] {
            for e in check_constraints(n, l1, l2).entries {
                assert_eq!(e.pass, e.margin.is_some_and(|m| m > 0.0));
            }
        }
    }

    #[test]
    fn locked_published_config() {
        let p = published();
        let c = build_locked_config(&p).unwrap();
        for th in petal_angles(&c).unwrap() {
            assert_abs_diff_eq!(th, p.theta_bar(), epsilon = 1e-12);
        }
        let layout = PetalLayout::at(c.tree(), 0).unwrap();
        assert!(restricted_flags(&c, &layout, &p, &Tolerance::default())
            .unwrap()
            .iter()
            .all(|f| *f));
        for pj in &layout.petals {
            assert!(c.point(pj.b).norm() > p.l2());
        }
    }

    #[test]
    fn locked_n8_config() {
        let p = choose_params(8, Epsilon::from_degrees(8, 0.2).unwrap()).unwrap();
        assert!(build_locked_config(&p).is_ok());
    }

    #[test]
    fn open_published_config() {
        let p = published();
        let c = build_open_config(&p).unwrap();
        let th = petal_angles(&c).unwrap();
        assert_abs_diff_eq!(th[0], TAU - 2.0 * p.alpha(), epsilon = 1e-12);
        assert!(th[1..].iter().all(|t| (t - p.alpha() / 2.0).abs() < 1e-12));
        assert_abs_diff_eq!(th.iter().sum::<f64>(), TAU, epsilon = 1e-11);
        let layout = PetalLayout::at(c.tree(), 0).unwrap();
        assert!(restricted_flags(&c, &layout, &p, &Tolerance::default())
            .unwrap()
            .iter()
            .all(|f| !*f));
        assert_eq!(*c.tree(), *build_locked_config(&p).unwrap().tree());
    }

    #[test]
    fn infeasible_params_refused() {
        let p = PetalParams::new(5, 0.6, 0.3).unwrap();
        assert!(matches!(build_locked_config(&p), Err(ConstructError::Infeasible(_))));
    }

    #[test]
    fn chain_link_counts() {
        assert_eq!(build_chain_of_trees(1, None).unwrap().tree().link_count(), 24);
        assert_eq!(build_chain_of_trees(3, None).unwrap().tree().link_count(), 74);
        assert!(matches!(
            build_chain_of_trees(3, Some(0.1)),
            Err(ConstructError::ConnectorTooShort { .. })
        ));
        assert!(build_chain_of_trees(0, None).is_err());
    }

    #[test]
    fn chain_labels_are_simple_and_distinct() {
        let fam = build_chain_of_trees(2, None).unwrap();
        let tol = Tolerance::default();
        let layouts = fam.layouts().unwrap();
        let mut seen = Vec::new();
        for label in 0..fam.label_count() {
            let c = fam.configuration(label).unwrap();
            let flags: Vec<Vec<bool>> = layouts
                .iter()
                .map(|l| restricted_flags(&c, l, fam.params(), &tol).unwrap())
                .collect();
            assert!(!seen.contains(&flags));
            seen.push(flags);
        }
    }
}
