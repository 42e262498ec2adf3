//! Locked planar trees: geometry predicates, linkage model, petal analysis,
//! locked constructions and motion probing.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod construct;
pub mod document;
pub mod geom;
pub mod model;
pub mod motion;
pub mod petal;
pub mod render;

pub use construct::{
    build_chain_of_trees, build_locked_config, build_open_config, check_constraints, choose_params, ChainFamily,
    ConstraintReport, ConstructError, Epsilon,
};
pub use document::{Document, DocumentError, Report};
pub use geom::{Point2, Segment2, SegmentRelation, Tolerance};
pub use model::{
    certify_transition, is_simple, validate_motion, Configuration, Edge, LinkTree, ModelError, Motion, MotionReport,
    PetalLayout, Simplicity,
};
pub use motion::{
    cspace_components, monitor, probe, probe_all, unlock_check, CspaceCensus, MonitorReport, MotionError, ProbeKind,
    ProbeOutcome, ProbeRecord, ProbeStrategy,
};
pub use petal::{is_restricted, PetalGeometry, PetalParams};
pub use render::{render_svg, RenderError, RenderStyle};
