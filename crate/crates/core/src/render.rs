//! Deterministic SVG drawings of a placement. Output uses only `svg`, `g`,
//! `line`, `circle` and `text`, one `line` per link.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point2;
use crate::model::{LinkTree, PetalLayout};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("stroke widths and joint radius must be non-negative and finite")]
    Width,
    #[error("placement has {got} points but the tree has {expected} joints")]
    PlacementSize { expected: usize, got: usize },
    #[error("highlighted petal {petal} but the root has {petals} petals")]
    NoSuchPetal { petal: usize, petals: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderStyle {
    /// Pixels per unit length.
    pub scale: f64,
    pub link_width: f64,
    pub highlight_width: f64,
    pub joint_radius: f64,
    /// Margin around the drawing in pixels.
    pub margin: f64,
    pub labels: bool,
    /// Petals around the root, by index, drawn in the highlight color.
    pub highlight: BTreeSet<usize>,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            scale: 400.0,
            link_width: 1.5,
            highlight_width: 2.5,
            joint_radius: 2.0,
            margin: 20.0,
            labels: false,
            highlight: BTreeSet::new(),
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(RenderError::Scale(self.scale));
        }
        let ok = |w: f64| w >= 0.0 && w.is_finite();
        if ![self.link_width, self.highlight_width, self.joint_radius, self.margin]
            .into_iter()
            .all(ok)
        {
            return Err(RenderError::Width);
        }
        Ok(())
    }
}

const LINK_COLOR: &str = "#222222";
const HIGHLIGHT_COLOR: &str = "#c0392b";
const JOINT_COLOR: &str = "#1f4e79";

/// Two decimals are plenty at pixel scale and keep the output stable.
fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_svg(tree: &LinkTree, placement: &[Point2], style: &RenderStyle) -> Result<String, RenderError> {
    style.validate()?;
    if placement.len() != tree.joint_count() {
        return Err(RenderError::PlacementSize {
            expected: tree.joint_count(),
            got: placement.len(),
        });
    }

    // edge index -> highlighted
    let mut hot = vec![false; tree.link_count()];
    if !style.highlight.is_empty() {
        let petals = PetalLayout::at(tree, tree.root()).map(|l| l.petals).unwrap_or_default();
        for &i in &style.highlight {
            let pj = petals.get(i).ok_or(RenderError::NoSuchPetal {
                petal: i,
                petals: petals.len(),
            })?;
            let members = [tree.root(), pj.a, pj.b, pj.c];
            for (k, e) in tree.edges().iter().enumerate() {
                if members.contains(&e.from) && members.contains(&e.to) {
                    hot[k] = true;
                }
            }
        }
    }

    let (mut lo, mut hi) = (
        Point2::new(f64::INFINITY, f64::INFINITY),
        Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in placement {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let m = style.margin;
    let width = (hi.x - lo.x) * style.scale + 2.0 * m;
    let height = (hi.y - lo.y) * style.scale + 2.0 * m;
    // y grows downward in SVG
    let map = |p: Point2| ((p.x - lo.x) * style.scale + m, (hi.y - p.y) * style.scale + m);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(width),
        h = num(height)
    );
    let _ = writeln!(
        out,
        r#"<g id="links" stroke="{LINK_COLOR}" stroke-width="{}" stroke-linecap="round">"#,
        num(style.link_width)
    );
    for (k, e) in tree.edges().iter().enumerate() {
        let (x1, y1) = map(placement[e.from]);
        let (x2, y2) = map(placement[e.to]);
        let extra = if hot[k] {
            format!(
                r#" stroke="{HIGHLIGHT_COLOR}" stroke-width="{}""#,
                num(style.highlight_width)
            )
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"{extra}/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }
    out.push_str("</g>\n");
    if style.joint_radius > 0.0 {
        let _ = writeln!(out, r#"<g id="joints" fill="{JOINT_COLOR}">"#);
        for p in placement {
            let (x, y) = map(*p);
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                num(x),
                num(y),
                num(style.joint_radius)
            );
        }
        out.push_str("</g>\n");
    }
    if style.labels {
        out.push_str("<g id=\"labels\" font-family=\"sans-serif\" font-size=\"10\">\n");
        for (j, p) in placement.iter().enumerate() {
            let (x, y) = map(*p);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}">{}</text>"#,
                num(x + 3.0),
                num(y - 3.0),
                escape(tree.name(j))
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_locked_config;
    use crate::petal::PetalParams;

    fn locked() -> crate::model::Configuration {
        build_locked_config(&PetalParams::new(5, 0.9511, 0.299).unwrap()).unwrap()
    }

    #[test]
    fn one_line_per_link() {
        let c = locked();
        let svg = render_svg(c.tree(), c.placement(), &RenderStyle::default()).unwrap();
        assert_eq!(svg.matches("<line ").count(), 15);
        assert_eq!(svg.matches("<circle ").count(), 16);
        assert!(!svg.contains("<text"));
    }

    #[test]
    fn labels_and_highlight() {
        let c = locked();
        let style = RenderStyle {
            labels: true,
            highlight: [2].into(),
            ..RenderStyle::default()
        };
        let svg = render_svg(c.tree(), c.placement(), &style).unwrap();
        assert!(svg.contains(">O</text>") && svg.contains(">C4</text>"));
        assert_eq!(svg.matches(HIGHLIGHT_COLOR).count(), 3);
    }

    #[test]
    fn deterministic() {
        let c = locked();
        let s = RenderStyle::default();
        assert_eq!(
            render_svg(c.tree(), c.placement(), &s),
            render_svg(c.tree(), c.placement(), &s)
        );
    }

    #[test]
    fn bad_style() {
        let c = locked();
        let s = RenderStyle {
            scale: 0.0,
            ..RenderStyle::default()
        };
        assert_eq!(render_svg(c.tree(), c.placement(), &s), Err(RenderError::Scale(0.0)));
        let s = RenderStyle {
            highlight: [7].into(),
            ..RenderStyle::default()
        };
        assert!(matches!(
            render_svg(c.tree(), c.placement(), &s),
            Err(RenderError::NoSuchPetal { petal: 7, .. })
        ));
    }
}
