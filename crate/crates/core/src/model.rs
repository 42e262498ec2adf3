//! Tree linkages, their configurations, the simplicity predicate and
//! discretized motions.
//!
//! Configurations store absolute joint coordinates. Petal indexing is
//! counterclockwise: petal `i` occupies the wedge swept counterclockwise from
//! `A_{i-1}` to `A_i` around the center joint.

use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{
    angle_ccw, angle_delta, point_segment_distance, segment_distance, segment_relation, GeomError, Point2, Segment2,
    SegmentRelation, Tolerance,
};

pub type JointId = usize;

/// Upper bound on per-joint displacement between consecutive motion frames,
/// in units of the petal spoke length.
pub const DEFAULT_MAX_STEP: f64 = 1e-3;

/// Evaluation budget for certifying a single frame-to-frame transition.
const CERTIFY_BUDGET: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid tree: {0}")]
    InvalidTree(TreeReport),
    #[error("placement has {got} points but the tree has {expected} joints")]
    PlacementSize { expected: usize, got: usize },
    #[error("joint {joint} has a non-finite coordinate")]
    NonFiniteCoordinate { joint: JointId },
    #[error("link lengths violated: {}", fmt_list(.0))]
    LengthViolations(Vec<LengthViolation>),
    #[error("link {edge} is shorter than the length tolerance")]
    DegenerateLink { edge: usize },
    #[error("not a petal tree: {0}")]
    NotPetalTree(String),
    #[error("configurations belong to different trees")]
    TreeMismatch,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

fn fmt_list<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: JointId,
    pub to: JointId,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawTree {
    joints: Vec<String>,
    edges: Vec<Edge>,
    root: JointId,
}

/// A tree whose edges carry positive lengths.
///
/// Construction never fails; [`validate_tree`] reports what is wrong and
/// every [`Configuration`] constructor refuses an invalid tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "RawTree", into = "RawTree")]
pub struct LinkTree {
    raw: RawTree,
    adjacency: Vec<Vec<(usize, JointId)>>,
    report: TreeReport,
    /// `(parent, child, edge)` in breadth-first order from the root.
    bfs: Vec<(JointId, JointId, usize)>,
}

impl PartialEq for LinkTree {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}

impl From<RawTree> for LinkTree {
    fn from(raw: RawTree) -> Self {
        let n = raw.joints.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in raw.edges.iter().enumerate() {
            if e.from < n && e.to < n && e.from != e.to {
                adjacency[e.from].push((i, e.to));
                adjacency[e.to].push((i, e.from));
            }
        }
        let mut tree = LinkTree {
            raw,
            adjacency,
            report: TreeReport::default(),
            bfs: Vec::new(),
        };
        tree.report = compute_tree_report(&tree);
        if tree.report.is_valid() {
            tree.bfs = bfs_order(&tree);
        }
        tree
    }
}

impl From<LinkTree> for RawTree {
    fn from(t: LinkTree) -> Self {
        t.raw
    }
}

impl LinkTree {
    pub fn new(joints: Vec<String>, edges: Vec<Edge>, root: JointId) -> Self {
        RawTree { joints, edges, root }.into()
    }

    pub fn joints(&self) -> &[String] {
        &self.raw.joints
    }

    pub fn joint_count(&self) -> usize {
        self.raw.joints.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.raw.edges
    }

    pub fn link_count(&self) -> usize {
        self.raw.edges.len()
    }

    pub fn root(&self) -> JointId {
        self.raw.root
    }

    pub fn name(&self, j: JointId) -> &str {
        &self.raw.joints[j]
    }

    pub fn joint_index(&self, name: &str) -> Option<JointId> {
        self.raw.joints.iter().position(|n| n == name)
    }

    /// `(edge index, neighbor)` pairs in edge order.
    pub fn neighbors(&self, j: JointId) -> &[(usize, JointId)] {
        &self.adjacency[j]
    }

    pub fn degree(&self, j: JointId) -> usize {
        self.adjacency[j].len()
    }

    pub fn is_valid(&self) -> bool {
        self.report.is_valid()
    }

    fn shared_joint(&self, e1: usize, e2: usize) -> Option<JointId> {
        let (a, b) = (&self.raw.edges[e1], &self.raw.edges[e2]);
        [a.from, a.to].into_iter().find(|j| *j == b.from || *j == b.to)
    }
}

fn bfs_order(tree: &LinkTree) -> Vec<(JointId, JointId, usize)> {
    let mut seen = vec![false; tree.joint_count()];
    let mut order = Vec::with_capacity(tree.link_count());
    let mut queue = VecDeque::from([tree.root()]);
    seen[tree.root()] = true;
    while let Some(j) = queue.pop_front() {
        for &(e, k) in tree.neighbors(j) {
            if !seen[k] {
                seen[k] = true;
                order.push((j, k, e));
                queue.push_back(k);
            }
        }
    }
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum TreeIssue {
    NoJoints,
    RootOutOfRange {
        root: JointId,
    },
    DuplicateName {
        name: String,
    },
    UnknownJoint {
        edge: usize,
        joint: JointId,
    },
    SelfLoop {
        edge: usize,
    },
    NonPositiveLength {
        edge: usize,
        length: f64,
    },
    /// Adding this edge closed a cycle.
    NotAcyclic {
        edge: usize,
    },
    Disconnected {
        components: usize,
    },
}

impl fmt::Display for TreeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeIssue::NoJoints => write!(f, "tree has no joints"),
            TreeIssue::RootOutOfRange { root } => write!(f, "root {root} is not a joint"),
            TreeIssue::DuplicateName { name } => write!(f, "joint name {name:?} repeats"),
            TreeIssue::UnknownJoint { edge, joint } => {
                write!(f, "edge {edge} references unknown joint {joint}")
            }
            TreeIssue::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            TreeIssue::NonPositiveLength { edge, length } => {
                write!(f, "edge {edge} has nonpositive length {length}")
            }
            TreeIssue::NotAcyclic { edge } => write!(f, "not acyclic: edge {edge} closes a cycle"),
            TreeIssue::Disconnected { components } => {
                write!(f, "not connected: {components} components")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TreeReport {
    pub issues: Vec<TreeIssue>,
}

impl TreeReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for TreeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            write!(f, "valid")
        } else {
            write!(f, "{}", fmt_list(&self.issues))
        }
    }
}

/// Itemized structural check of a tree: connectivity, acyclicity and
/// positive lengths.
pub fn validate_tree(tree: &LinkTree) -> TreeReport {
    tree.report.clone()
}

fn compute_tree_report(tree: &LinkTree) -> TreeReport {
    let n = tree.joint_count();
    let mut issues = Vec::new();
    if n == 0 {
        issues.push(TreeIssue::NoJoints);
        return TreeReport { issues };
    }
    if tree.root() >= n {
        issues.push(TreeIssue::RootOutOfRange { root: tree.root() });
    }
    let mut names: Vec<&String> = tree.joints().iter().collect();
    names.sort();
    for w in names.windows(2) {
        if w[0] == w[1] && !issues.contains(&TreeIssue::DuplicateName { name: w[0].clone() }) {
            issues.push(TreeIssue::DuplicateName { name: w[0].clone() });
        }
    }

    let mut uf = UnionFind::<usize>::new(n);
    let mut components = n;
    for (i, e) in tree.edges().iter().enumerate() {
        if !(e.length > 0.0 && e.length.is_finite()) {
            issues.push(TreeIssue::NonPositiveLength {
                edge: i,
                length: e.length,
            });
        }
        let bad: Vec<_> = [e.from, e.to].into_iter().filter(|j| *j >= n).collect();
        if !bad.is_empty() {
            for joint in bad {
                issues.push(TreeIssue::UnknownJoint { edge: i, joint });
            }
            continue;
        }
        if e.from == e.to {
            issues.push(TreeIssue::SelfLoop { edge: i });
            continue;
        }
        if uf.union(e.from, e.to) {
            components -= 1;
        } else {
            issues.push(TreeIssue::NotAcyclic { edge: i });
        }
    }
    if components > 1 {
        issues.push(TreeIssue::Disconnected { components });
    }
    TreeReport { issues }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthViolation {
    pub edge: usize,
    pub from: JointId,
    pub to: JointId,
    pub expected: f64,
    pub actual: f64,
}

impl fmt::Display for LengthViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "link {} ({}-{}) has length {} instead of {}",
            self.edge, self.from, self.to, self.actual, self.expected
        )
    }
}

/// Edges whose realized length differs from the label by more than `eps_len`.
pub fn check_lengths(tree: &LinkTree, placement: &[Point2], tol: &Tolerance) -> Vec<LengthViolation> {
    tree.edges()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let actual = placement[e.from].dist(placement[e.to]);
            ((actual - e.length).abs() > tol.eps_len() || !actual.is_finite()).then_some(LengthViolation {
                edge: i,
                from: e.from,
                to: e.to,
                expected: e.length,
                actual,
            })
        })
        .collect()
}

/// A placement of every joint realizing every link length.
#[derive(Debug, Clone)]
pub struct Configuration {
    tree: Arc<LinkTree>,
    placement: Vec<Point2>,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.placement == other.placement && *self.tree == *other.tree
    }
}

impl Configuration {
    pub fn new(tree: Arc<LinkTree>, placement: Vec<Point2>, tol: &Tolerance) -> Result<Self, ModelError> {
        if !tree.is_valid() {
            return Err(ModelError::InvalidTree(validate_tree(&tree)));
        }
        if placement.len() != tree.joint_count() {
            return Err(ModelError::PlacementSize {
                expected: tree.joint_count(),
                got: placement.len(),
            });
        }
        if let Some(joint) = placement.iter().position(|p| !p.is_finite()) {
            return Err(ModelError::NonFiniteCoordinate { joint });
        }
        let bad = check_lengths(&tree, &placement, tol);
        if !bad.is_empty() {
            return Err(ModelError::LengthViolations(bad));
        }
        Ok(Configuration { tree, placement })
    }

    pub fn tree(&self) -> &Arc<LinkTree> {
        &self.tree
    }

    pub fn placement(&self) -> &[Point2] {
        &self.placement
    }

    pub fn point(&self, j: JointId) -> Point2 {
        self.placement[j]
    }

    pub fn into_placement(self) -> Vec<Point2> {
        self.placement
    }

    pub fn links(&self, tol: &Tolerance) -> Result<Vec<Segment2>, ModelError> {
        self.tree
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                Segment2::new(self.placement[e.from], self.placement[e.to], tol)
                    .map_err(|_| ModelError::DegenerateLink { edge: i })
            })
            .collect()
    }

    /// Largest distance any joint moves between `self` and `other`.
    pub fn max_displacement(&self, other: &Configuration) -> f64 {
        self.placement
            .iter()
            .zip(&other.placement)
            .map(|(a, b)| a.dist(*b))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkPairViolation {
    pub first: usize,
    pub second: usize,
    pub relation: SegmentRelation,
}

impl fmt::Display for LinkPairViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "links {} and {}: {}", self.first, self.second, self.relation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Simplicity {
    Simple,
    Violation(LinkPairViolation),
}

impl Simplicity {
    pub fn is_simple(&self) -> bool {
        matches!(self, Simplicity::Simple)
    }
}

/// Verdict for one link pair: `None` when the pair is acceptable.
///
/// Incident links must meet exactly at their shared joint; all other pairs
/// must be disjoint.
pub fn link_pair_violation(
    c: &Configuration,
    links: &[Segment2],
    i: usize,
    j: usize,
    tol: &Tolerance,
) -> Option<SegmentRelation> {
    let relation = segment_relation(&links[i], &links[j], tol);
    let ok = match c.tree.shared_joint(i, j) {
        Some(shared) => matches!(
            relation,
            SegmentRelation::TouchAtPoint(p) if p.dist(c.placement[shared]) <= tol.eps_len()
        ),
        None => relation == SegmentRelation::Disjoint,
    };
    (!ok).then_some(relation)
}

/// Simplicity test using an x-sorted sweep over link bounding boxes.
pub fn is_simple(c: &Configuration, tol: &Tolerance) -> Result<Simplicity, ModelError> {
    let bad = check_lengths(&c.tree, &c.placement, tol);
    if !bad.is_empty() {
        return Err(ModelError::LengthViolations(bad));
    }
    let links = c.links(tol)?;
    let eps = tol.eps_len();
    let boxes: Vec<[f64; 4]> = links
        .iter()
        .map(|s| {
            let (a, b) = (s.a(), s.b());
            [
                a.x.min(b.x) - eps,
                a.x.max(b.x) + eps,
                a.y.min(b.y) - eps,
                a.y.max(b.y) + eps,
            ]
        })
        .collect();
    let mut order: Vec<usize> = (0..links.len()).collect();
    order.sort_by(|&i, &j| boxes[i][0].total_cmp(&boxes[j][0]).then(i.cmp(&j)));

    let mut first: Option<LinkPairViolation> = None;
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if boxes[j][0] > boxes[i][1] {
                break;
            }
            if boxes[j][2] > boxes[i][3] || boxes[i][2] > boxes[j][3] {
                continue;
            }
            if let Some(relation) = link_pair_violation(c, &links, i, j, tol) {
                let v = LinkPairViolation {
                    first: i.min(j),
                    second: i.max(j),
                    relation,
                };
                // report the lexicographically first offending pair
                if first.is_none_or(|f| (v.first, v.second) < (f.first, f.second)) {
                    first = Some(v);
                }
            }
        }
    }
    Ok(first.map_or(Simplicity::Simple, Simplicity::Violation))
}

/// Smallest separation between links that must stay apart: segment distance
/// for non-incident pairs, and for incident pairs the distance from each far
/// endpoint to the other link. `INFINITY` for trees with fewer than two links.
pub fn clearance(c: &Configuration) -> f64 {
    let tree = &c.tree;
    let p = &c.placement;
    let edges = tree.edges();
    let mut best = f64::INFINITY;
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (e1, e2) = (&edges[i], &edges[j]);
            let d = match tree.shared_joint(i, j) {
                Some(s) => {
                    let u = if e1.from == s { e1.to } else { e1.from };
                    let w = if e2.from == s { e2.to } else { e2.from };
                    point_segment_distance(p[u], p[s], p[w]).min(point_segment_distance(p[w], p[s], p[u]))
                }
                None => {
                    let s1 = (p[e1.from], p[e1.to]);
                    let s2 = (p[e2.from], p[e2.to]);
                    raw_segment_distance(s1, s2)
                }
            };
            best = best.min(d);
        }
    }
    best
}

fn raw_segment_distance(s1: (Point2, Point2), s2: (Point2, Point2)) -> f64 {
    // Links are validated non-degenerate; a tiny tolerance only guards the
    // constructor.
    let tol = Tolerance::new(1e-300, 1e-300).expect("positive");
    match (Segment2::new(s1.0, s1.1, &tol), Segment2::new(s2.0, s2.1, &tol)) {
        (Ok(a), Ok(b)) => segment_distance(&a, &b),
        _ => 0.0,
    }
}

/// Path between two configurations of the same tree obtained by interpolating
/// the root position linearly and every link direction along its shorter
/// angular arc. Link lengths are exact along the whole path.
struct AnglePath<'a> {
    from: &'a Configuration,
    root_shift: Point2,
    /// `(parent, child, length, start direction, angular change)`.
    links: Vec<(JointId, JointId, f64, f64, f64)>,
    /// Per-joint bound on path length over the unit parameter range.
    rate: Vec<f64>,
}

impl<'a> AnglePath<'a> {
    fn new(from: &'a Configuration, to: &Configuration) -> Self {
        let tree = &from.tree;
        let root = tree.root();
        let root_shift = to.placement[root] - from.placement[root];
        let mut rate = vec![0.0; tree.joint_count()];
        rate[root] = root_shift.norm();
        let mut links = vec![(0, 0, 0.0, 0.0, 0.0); tree.link_count()];
        for &(parent, child, e) in &tree.bfs {
            let len = tree.edges()[e].length;
            let d0 = (from.placement[child] - from.placement[parent]).angle();
            let d1 = (to.placement[child] - to.placement[parent]).angle();
            let delta = angle_delta(d0, d1);
            rate[child] = rate[parent] + len * delta.abs();
            links[e] = (parent, child, len, d0, delta);
        }
        AnglePath {
            from,
            root_shift,
            links,
            rate,
        }
    }

    fn at(&self, s: f64) -> Vec<Point2> {
        let tree = &self.from.tree;
        let mut pts = vec![Point2::ORIGIN; tree.joint_count()];
        pts[tree.root()] = self.from.placement[tree.root()] + self.root_shift * s;
        for &(_, _, e) in &tree.bfs {
            let (parent, child, len, d0, delta) = self.links[e];
            pts[child] = pts[parent] + Point2::polar(len, d0 + s * delta);
        }
        pts
    }

    /// Direction of link `e` leaving joint `j` at parameter 0, and its change.
    fn direction_from(&self, e: usize, j: JointId) -> (f64, f64) {
        let (parent, _, _, d0, delta) = self.links[e];
        if parent == j {
            (d0, delta)
        } else {
            (d0 + PI, delta)
        }
    }
}

/// Whether the angle-interpolated path from `from` to `to` stays simple.
///
/// Incident links keep a linearly varying angle between them, so they are
/// checked exactly. A non-incident pair is settled on a sub-path once its
/// distance at either end exceeds the total distance its links can travel
/// over the sub-path. Unsettled pairs are bisected within a fixed evaluation
/// budget. `false` means "not certified", which includes genuinely
/// non-simple paths.
pub fn certify_transition(from: &Configuration, to: &Configuration, tol: &Tolerance) -> Result<bool, ModelError> {
    if from.tree != to.tree {
        return Err(ModelError::TreeMismatch);
    }
    if !is_simple(from, tol)?.is_simple() || !is_simple(to, tol)?.is_simple() {
        return Ok(false);
    }
    let tree = &from.tree;
    let path = AnglePath::new(from, to);

    for j in 0..tree.joint_count() {
        let nb = tree.neighbors(j);
        for x in 0..nb.len() {
            for y in x + 1..nb.len() {
                let (p1, v1) = path.direction_from(nb[x].0, j);
                let (p2, v2) = path.direction_from(nb[y].0, j);
                let gap = crate::geom::wrap_angle(p2 - p1);
                let end = gap + (v2 - v1);
                if gap <= tol.eps_ang() || end <= tol.eps_ang() || end >= TAU - tol.eps_ang() {
                    return Ok(false);
                }
            }
        }
    }

    let edges = tree.edges();
    let reach = |e: usize| path.rate[edges[e].from].max(path.rate[edges[e].to]);
    let dist = |pts: &[Point2], i: usize, j: usize| {
        raw_segment_distance(
            (pts[edges[i].from], pts[edges[i].to]),
            (pts[edges[j].from], pts[edges[j].to]),
        )
    };
    let mut pairs = Vec::new();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            if tree.shared_joint(i, j).is_none() {
                pairs.push((i, j));
            }
        }
    }
    let mut budget = CERTIFY_BUDGET;
    let start = Arc::new(from.placement.clone());
    let end = Arc::new(to.placement.clone());
    let mut stack = vec![(0.0, 1.0, start, end, pairs)];
    while let Some((s0, s1, p0, p1, pairs)) = stack.pop() {
        let w = s1 - s0;
        let open: Vec<(usize, usize)> = pairs
            .into_iter()
            .filter(|&(i, j)| w * (reach(i) + reach(j)) >= dist(&p0, i, j).max(dist(&p1, i, j)))
            .collect();
        if open.is_empty() {
            continue;
        }
        if budget == 0 {
            return Ok(false);
        }
        budget -= 1;
        let mid = 0.5 * (s0 + s1);
        let pm = Arc::new(path.at(mid));
        if open.iter().any(|&(i, j)| dist(&pm, i, j) <= tol.eps_len()) {
            return Ok(false);
        }
        stack.push((s0, mid, p0, pm.clone(), open.clone()));
        stack.push((mid, s1, pm, p1, open));
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetalJoints {
    pub a: JointId,
    pub b: JointId,
    pub c: JointId,
}

/// The petals hanging off one center joint, in counterclockwise index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetalLayout {
    pub center: JointId,
    pub petals: Vec<PetalJoints>,
}

impl PetalLayout {
    /// Petals are the three-link paths `center-A-B-C` with `A`, `B` of degree
    /// two and `C` a leaf, taken in edge order. Other neighbors are ignored.
    pub fn at(tree: &LinkTree, center: JointId) -> Result<Self, ModelError> {
        if center >= tree.joint_count() {
            return Err(ModelError::NotPetalTree(format!("no joint {center}")));
        }
        let next = |prev: JointId, j: JointId| -> Option<JointId> {
            let nb = tree.neighbors(j);
            (nb.len() == 2).then(|| if nb[0].1 == prev { nb[1].1 } else { nb[0].1 })
        };
        let petals: Vec<PetalJoints> = tree
            .neighbors(center)
            .iter()
            .filter_map(|&(_, a)| {
                let b = next(center, a)?;
                let c = next(a, b)?;
                (tree.degree(c) == 1).then_some(PetalJoints { a, b, c })
            })
            .collect();
        if petals.len() < 2 {
            return Err(ModelError::NotPetalTree(format!(
                "joint {} has {} petals",
                tree.name(center),
                petals.len()
            )));
        }
        Ok(PetalLayout { center, petals })
    }

    /// Every joint carrying exactly `n` petals whose links measure
    /// `(1, l1, l2)` within `eps_len`.
    pub fn find_all(tree: &LinkTree, n: usize, l1: f64, l2: f64, tol: &Tolerance) -> Vec<PetalLayout> {
        let len_of = |u: JointId, v: JointId| {
            tree.neighbors(u)
                .iter()
                .find(|(_, w)| *w == v)
                .map(|(e, _)| tree.edges()[*e].length)
        };
        let close = |x: Option<f64>, y: f64| x.is_some_and(|x| (x - y).abs() <= tol.eps_len());
        (0..tree.joint_count())
            .filter_map(|j| PetalLayout::at(tree, j).ok())
            .filter(|l| {
                l.petals.len() == n
                    && l.petals.iter().all(|p| {
                        close(len_of(l.center, p.a), 1.0) && close(len_of(p.a, p.b), l1) && close(len_of(p.b, p.c), l2)
                    })
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.petals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.petals.is_empty()
    }

    /// Joint preceding petal `i`'s spoke, i.e. `A_{i-1}`.
    pub fn previous_spoke(&self, i: usize) -> JointId {
        let n = self.petals.len();
        self.petals[(i + n - 1) % n].a
    }

    /// `θ_i = ∠A_{i-1} O A_i`, counterclockwise.
    pub fn angles(&self, c: &Configuration) -> Result<Vec<f64>, ModelError> {
        let o = c.point(self.center);
        (0..self.petals.len())
            .map(|i| angle_ccw(o, c.point(self.previous_spoke(i)), c.point(self.petals[i].a)).map_err(ModelError::from))
            .collect()
    }
}

/// Petal angles around the root of a petal tree.
pub fn petal_angles(c: &Configuration) -> Result<Vec<f64>, ModelError> {
    PetalLayout::at(c.tree(), c.tree().root())?.angles(c)
}

/// A time-ordered sequence of configurations of one tree.
#[derive(Debug, Clone)]
pub struct Motion {
    frames: Vec<Configuration>,
    max_step: f64,
}

impl Motion {
    pub fn new(max_step: f64) -> Self {
        Motion {
            frames: Vec::new(),
            max_step,
        }
    }

    pub fn from_frames(frames: Vec<Configuration>, max_step: f64) -> Self {
        Motion { frames, max_step }
    }

    pub fn push(&mut self, frame: Configuration) {
        self.frames.push(frame);
    }

    pub fn frames(&self) -> &[Configuration] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn max_step(&self) -> f64 {
        self.max_step
    }

    pub fn last(&self) -> Option<&Configuration> {
        self.frames.last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum MotionIssueKind {
    Empty,
    InvalidMaxStep {
        max_step: f64,
    },
    TreeMismatch,
    StepBound {
        joint: JointId,
        displacement: f64,
        max_step: f64,
    },
    NotSimple {
        violation: LinkPairViolation,
    },
    /// Both frames are simple but the path between them could not be
    /// certified free of contacts.
    UncertifiedTransition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionIssue {
    pub frame: usize,
    #[serde(flatten)]
    pub kind: MotionIssueKind,
}

impl fmt::Display for MotionIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MotionIssueKind::Empty => write!(f, "motion has no frames"),
            MotionIssueKind::InvalidMaxStep { max_step } => write!(f, "invalid max_step {max_step}"),
            MotionIssueKind::TreeMismatch => write!(f, "frame {}: different tree", self.frame),
            MotionIssueKind::StepBound {
                joint,
                displacement,
                max_step,
            } => write!(
                f,
                "frame {}: step bound exceeded by joint {joint} ({displacement} > {max_step})",
                self.frame
            ),
            MotionIssueKind::NotSimple { violation } => {
                write!(f, "frame {}: simplicity violated ({violation})", self.frame)
            }
            MotionIssueKind::UncertifiedTransition => {
                write!(f, "frame {}: transition from previous frame not certified", self.frame)
            }
        }
    }
}

/// Frame-by-frame validation result. A clean report means no violation was
/// found among the sampled frames and transitions; it does not certify any
/// continuous motion beyond them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionReport {
    pub frames: usize,
    pub issues: Vec<MotionIssue>,
}

impl MotionReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn first_offending_frame(&self) -> Option<usize> {
        self.issues.iter().map(|i| i.frame).min()
    }

    pub fn has_simplicity_failure(&self) -> bool {
        self.issues
            .iter()
            .any(|i| matches!(i.kind, MotionIssueKind::NotSimple { .. }))
    }
}

pub fn validate_motion(m: &Motion, tol: &Tolerance) -> Result<MotionReport, ModelError> {
    let mut issues = Vec::new();
    if m.frames.is_empty() {
        issues.push(MotionIssue {
            frame: 0,
            kind: MotionIssueKind::Empty,
        });
    }
    if !(m.max_step > 0.0) {
        issues.push(MotionIssue {
            frame: 0,
            kind: MotionIssueKind::InvalidMaxStep { max_step: m.max_step },
        });
    }
    let mut simple = Vec::with_capacity(m.frames.len());
    for (k, frame) in m.frames.iter().enumerate() {
        if k > 0 && frame.tree != m.frames[0].tree {
            issues.push(MotionIssue {
                frame: k,
                kind: MotionIssueKind::TreeMismatch,
            });
            simple.push(false);
            continue;
        }
        match is_simple(frame, tol)? {
            Simplicity::Simple => simple.push(true),
            Simplicity::Violation(violation) => {
                issues.push(MotionIssue {
                    frame: k,
                    kind: MotionIssueKind::NotSimple { violation },
                });
                simple.push(false);
            }
        }
        if k == 0 {
            continue;
        }
        let prev = &m.frames[k - 1];
        if frame.tree != prev.tree {
            continue;
        }
        let (joint, displacement) = prev
            .placement
            .iter()
            .zip(&frame.placement)
            .map(|(a, b)| a.dist(*b))
            .enumerate()
            .fold((0, 0.0), |best, (j, d)| if d > best.1 { (j, d) } else { best });
        if displacement > m.max_step {
            issues.push(MotionIssue {
                frame: k,
                kind: MotionIssueKind::StepBound {
                    joint,
                    displacement,
                    max_step: m.max_step,
                },
            });
        }
        if simple[k - 1] && simple[k] && !certify_transition(prev, frame, tol)? {
            issues.push(MotionIssue {
                frame: k,
                kind: MotionIssueKind::UncertifiedTransition,
            });
        }
    }
    Ok(MotionReport {
        frames: m.frames.len(),
        issues,
    })
}

/// Builds a tree from `(from, to, length)` triples with joints named by
/// index.
pub fn tree_from_edges(joint_count: usize, edges: &[(JointId, JointId, f64)], root: JointId) -> LinkTree {
    LinkTree::new(
        (0..joint_count).map(|i| format!("J{i}")).collect(),
        edges
            .iter()
            .map(|&(from, to, length)| Edge { from, to, length })
            .collect(),
        root,
    )
}

/// Places the tree so that each child joint sits at angle `dirs[child]` from
/// its parent, starting with the root at `origin`.
pub fn place_by_directions(tree: &LinkTree, origin: Point2, dirs: &[f64]) -> Vec<Point2> {
    let mut pts = vec![origin; tree.joint_count()];
    for &(parent, child, e) in &tree.bfs {
        pts[child] = pts[parent] + Point2::polar(tree.edges()[e].length, dirs[child]);
    }
    pts
}

/// Re-imposes exact link lengths on perturbed joint positions by walking each
/// link outward from the root and keeping only its direction. Returns `None`
/// if a child collapses onto its parent.
pub fn project_lengths(tree: &LinkTree, root_at: Point2, perturbed: &[Point2]) -> Option<Vec<Point2>> {
    let mut pts = vec![root_at; tree.joint_count()];
    for &(parent, child, e) in &tree.bfs {
        let dir = (perturbed[child] - pts[parent]).unit()?;
        pts[child] = pts[parent] + dir * tree.edges()[e].length;
    }
    Some(pts)
}
