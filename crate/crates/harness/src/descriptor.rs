//! Body and model descriptor files (TOML).
//!
//! Body:
//!
//! ```toml
//! kind = "ellipsoid"        # ball | ellipsoid | intersection | halfspace-slab
//! center = [0.0, 0.0, 0.0]
//! semi_axes = [1.0, 1.0, 1.5]
//! offset = 0.0              # optional outer parallel body
//! ```
//!
//! Intersections list their parts as `[[components]]` tables; a
//! `halfspace-slab` part has a `normal` and either a `point` (half-space) or
//! a `center` and `half_width` (slab). Normals are normalised on load.
//!
//! Model:
//!
//! ```toml
//! profile = "remark-splice" # euclidean | hyperbolic | sphere | concave
//! n = 2                     # | remark-splice | tabulated | exterior-equality
//! t0 = 1.0
//! h0 = 2.0
//! ```

use capacity_core::geometry::{ConvexBody, Shape};
use capacity_core::model::{exterior_equality_model, remark_example_model, ModelKind, Profile, WarpedModel};
use capacity_core::Vec3;
use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeDescriptor {
    Ball {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
    },
    Ellipsoid {
        #[serde(default)]
        center: [f64; 3],
        semi_axes: [f64; 3],
    },
    HalfspaceSlab {
        normal: [f64; 3],
        point: Option<[f64; 3]>,
        center: Option<[f64; 3]>,
        half_width: Option<f64>,
    },
    Intersection {
        components: Vec<ShapeDescriptor>,
    },
}

impl ShapeDescriptor {
    pub fn to_shape(&self) -> Result<Shape, HarnessError> {
        Ok(match self {
            ShapeDescriptor::Ball { center, radius } => Shape::Ball { center: Vec3(*center), radius: *radius },
            ShapeDescriptor::Ellipsoid { center, semi_axes } => Shape::Ellipsoid { center: Vec3(*center), semi_axes: *semi_axes },
            ShapeDescriptor::HalfspaceSlab { normal, point, center, half_width } => {
                let n = Vec3(*normal);
                if !(n.norm() > 0.0) {
                    return Err(HarnessError::Invalid("halfspace-slab normal must be non-zero".into()));
                }
                let normal = n.normalized();
                match (point, center, half_width) {
                    (Some(p), None, None) => Shape::HalfSpace { normal, point: Vec3(*p) },
                    (None, Some(c), Some(w)) => Shape::Slab { normal, center: Vec3(*c), half_width: *w },
                    _ => return Err(HarnessError::Invalid("halfspace-slab needs either `point` or `center` and `half_width`".into())),
                }
            }
            ShapeDescriptor::Intersection { components } => Shape::Intersection(components.iter().map(ShapeDescriptor::to_shape).collect::<Result<_, _>>()?),
        })
    }
}

/// Parses a body descriptor document.
pub fn parse_body(text: &str) -> Result<ConvexBody, HarnessError> {
    let table: toml::Table = toml::from_str(text)?;
    body_from_table(table)
}

pub(crate) fn body_from_table(mut table: toml::Table) -> Result<ConvexBody, HarnessError> {
    let offset = match table.remove("offset") {
        None => 0.0,
        Some(v) => v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).ok_or_else(|| HarnessError::Invalid("offset must be a number".into()))?,
    };
    let desc: ShapeDescriptor = toml::Value::Table(table).try_into()?;
    let body = ConvexBody::new(desc.to_shape()?)?;
    Ok(if offset != 0.0 { body.parallel_body(offset)? } else { body })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelDescriptor {
    Euclidean {
        n: usize,
    },
    Hyperbolic {
        n: usize,
        /// `g = sinh(k t)/k`
        #[serde(default = "one")]
        k: f64,
    },
    Sphere {
        n: usize,
    },
    Concave {
        n: usize,
    },
    RemarkSplice {
        n: usize,
        t0: f64,
        h0: f64,
    },
    Tabulated {
        n: usize,
        t: Vec<f64>,
        g: Vec<f64>,
        /// `closed` (pole at `t = 0`) or `exterior`
        #[serde(default = "closed")]
        kind: String,
        fiber_volume: Option<f64>,
    },
    ExteriorEquality {
        n: usize,
        h0: f64,
        boundary_area: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn closed() -> String {
    "closed".into()
}

impl ModelDescriptor {
    pub fn to_model(&self) -> Result<WarpedModel, HarnessError> {
        Ok(match self {
            ModelDescriptor::Euclidean { n } => WarpedModel::euclidean(*n)?,
            ModelDescriptor::Hyperbolic { n, k } => {
                if !(*k > 0.0) {
                    return Err(HarnessError::Invalid("hyperbolic k must be positive".into()));
                }
                WarpedModel::new(*n, Profile::Hyperbolic { k: *k }, ModelKind::Closed)?
            }
            ModelDescriptor::Sphere { n } => WarpedModel::sphere(*n)?,
            ModelDescriptor::Concave { n } => WarpedModel::concave(*n)?,
            ModelDescriptor::RemarkSplice { n, t0, h0 } => remark_example_model(*n, *t0, *h0)?,
            ModelDescriptor::Tabulated { n, t, g, kind, fiber_volume } => {
                let kind = match (kind.as_str(), fiber_volume) {
                    ("closed", None) => ModelKind::Closed,
                    ("exterior", Some(v)) => ModelKind::Exterior { fiber_volume: *v },
                    ("exterior", None) => return Err(HarnessError::Invalid("exterior tables need fiber_volume".into())),
                    ("closed", Some(_)) => return Err(HarnessError::Invalid("fiber_volume only applies to exterior tables".into())),
                    (k, _) => return Err(HarnessError::Invalid(format!("unknown model kind `{k}`"))),
                };
                WarpedModel::tabulated(*n, t.clone(), g.clone(), kind)?
            }
            ModelDescriptor::ExteriorEquality { n, h0, boundary_area } => exterior_equality_model(*n, *h0, *boundary_area)?,
        })
    }

    /// Ball radius and curvature the descriptor was built around, if any.
    pub fn splice_parameters(&self) -> Option<(f64, f64)> {
        match self {
            ModelDescriptor::RemarkSplice { t0, h0, .. } => Some((*t0, *h0)),
            _ => None,
        }
    }
}

pub fn parse_model(text: &str) -> Result<(ModelDescriptor, WarpedModel), HarnessError> {
    let desc: ModelDescriptor = toml::from_str(text)?;
    let model = desc.to_model()?;
    Ok((desc, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_kinds() {
        let b = parse_body("kind = \"ball\"\nradius = 2.0\n").unwrap();
        assert_eq!(b.ball_radius(), Some(2.0));
        let e = parse_body("kind = \"ellipsoid\"\nsemi_axes = [1.0, 1.0, 1.5]\noffset = 0.5\n").unwrap();
        assert_eq!(e.offset(), 0.5);
        let lens = parse_body(
            r#"
kind = "intersection"
[[components]]
kind = "ball"
center = [-0.5, 0.0, 0.0]
radius = 1.0
[[components]]
kind = "ball"
center = [0.5, 0.0, 0.0]
radius = 1.0
"#,
        )
        .unwrap();
        assert!(!lens.is_smooth());
        let cut = parse_body(
            r#"
kind = "intersection"
[[components]]
kind = "ball"
radius = 1.0
[[components]]
kind = "halfspace-slab"
normal = [0.0, 0.0, 2.0]
center = [0.0, 0.0, 0.0]
half_width = 0.5
"#,
        )
        .unwrap();
        assert!(cut.level(Vec3::new(0.0, 0.0, 0.6)) > 0.0);
    }

    #[test]
    fn bad_bodies_are_rejected() {
        assert!(parse_body("kind = \"ball\"\nradius = -1.0\n").is_err());
        assert!(parse_body("kind = \"cube\"\n").is_err());
        assert!(parse_body("kind = \"ball\"\nradius = 1.0\ncolour = 3\n").is_err());
        assert!(parse_body("kind = \"halfspace-slab\"\nnormal = [1.0, 0.0, 0.0]\npoint = [0.0, 0.0, 0.0]\n").is_err());
    }

    #[test]
    fn models() {
        let (d, m) = parse_model("profile = \"remark-splice\"\nn = 2\nt0 = 1.0\nh0 = 2.0\n").unwrap();
        assert_eq!(d.splice_parameters(), Some((1.0, 2.0)));
        assert_eq!(m.n(), 2);
        let (_, h) = parse_model("profile = \"hyperbolic\"\nn = 2\n").unwrap();
        assert!((h.g(1.0) - 1f64.sinh()).abs() < 1e-15);
        let (_, t) = parse_model("profile = \"tabulated\"\nn = 2\nt = [0.0, 1.0, 2.0]\ng = [0.0, 1.0, 2.0]\n").unwrap();
        assert!((t.g(0.5) - 0.5).abs() < 1e-12);
        assert!(parse_model("profile = \"remark-splice\"\nn = 2\nt0 = 1.0\nh0 = 0.5\n").is_err());
        assert!(parse_model("profile = \"tabulated\"\nn = 2\nt = [0.0, 1.0]\ng = [0.0, 1.0]\nkind = \"exterior\"\n").is_err());
    }
}
