//! Scenario documents.
//!
//! ```toml
//! id = "ellipsoid-lower"
//! kind = "cor-4.1"
//! body = "bodies/prolate.toml"   # or an inline [body] table
//! # h0 = 0.4                     # omitted: derived from the geometry
//!
//! [grid]
//! h = 0.02
//! growth = 2.0
//! ```
//!
//! Paths are relative to the scenario file. The scenario text and every
//! referenced descriptor are kept verbatim for the report.

use std::fs;
use std::path::{Path, PathBuf};

use capacity_core::geometry::ConvexBody;
use capacity_core::model::WarpedModel;
use capacity_core::report::Direction;
use capacity_core::solver::Mode;
use serde::Deserialize;

use crate::descriptor::{body_from_table, ModelDescriptor};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Thm31,
    Thm35,
    Cor41,
    Cor42,
    Cor43,
    Cor44,
    Thm45,
    SzegoMeanCurvature,
    SzegoVolume,
    PolyaSzegoRatio,
    RadialEquality,
    RiccatiSuite,
}

impl Kind {
    pub const ALL: [Kind; 12] = [
        Kind::Thm31,
        Kind::Thm35,
        Kind::Cor41,
        Kind::Cor42,
        Kind::Cor43,
        Kind::Cor44,
        Kind::Thm45,
        Kind::SzegoMeanCurvature,
        Kind::SzegoVolume,
        Kind::PolyaSzegoRatio,
        Kind::RadialEquality,
        Kind::RiccatiSuite,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Thm31 => "thm-3.1",
            Kind::Thm35 => "thm-3.5",
            Kind::Cor41 => "cor-4.1",
            Kind::Cor42 => "cor-4.2",
            Kind::Cor43 => "cor-4.3",
            Kind::Cor44 => "cor-4.4",
            Kind::Thm45 => "thm-4.5",
            Kind::SzegoMeanCurvature => "szego-mean-curvature",
            Kind::SzegoVolume => "szego-volume",
            Kind::PolyaSzegoRatio => "polya-szego-ratio",
            Kind::RadialEquality => "radial-equality",
            Kind::RiccatiSuite => "riccati-suite",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Which side of the bound the computed value must lie on.
    pub fn direction(self) -> Direction {
        match self {
            Kind::Thm35 | Kind::Cor42 | Kind::Cor44 | Kind::SzegoMeanCurvature => Direction::Upper,
            _ => Direction::Lower,
        }
    }

    /// Kinds whose `H₀` is a lower bound on principal curvatures.
    pub fn uses_kappa_min(self) -> bool {
        matches!(self, Kind::Thm31 | Kind::Cor41 | Kind::Cor43 | Kind::Thm45)
    }

    /// Kinds whose `H₀` is an upper bound on mean curvature.
    pub fn uses_h_max(self) -> bool {
        matches!(self, Kind::Thm35 | Kind::Cor42 | Kind::Cor44)
    }

    fn accepts_body(self) -> bool {
        !matches!(self, Kind::RadialEquality | Kind::RiccatiSuite)
    }

    fn accepts_model(self) -> bool {
        matches!(self, Kind::Thm31 | Kind::Thm35 | Kind::RadialEquality)
    }
}

/// Grid and exhaustion parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Finest-but-one spacing; defaults to `0.02 ×` the bounding radius.
    pub h: Option<f64>,
    /// First outer radius of the exhaustion.
    pub outer: Option<f64>,
    #[serde(default = "default_growth")]
    pub growth: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Flux offset in units of `h`.
    #[serde(default = "default_offset")]
    pub offset: f64,
    #[serde(default = "default_mode")]
    pub mode: String,
    /// Extrapolate over `h, h/2`.
    #[serde(default = "yes")]
    pub richardson: bool,
    #[serde(default = "default_stages")]
    pub max_stages: usize,
    /// Also solve the first two stages at `2h` and compare the potentials.
    #[serde(default)]
    pub monotonicity_check: bool,
}

fn default_growth() -> f64 {
    2.0
}
fn default_tol() -> f64 {
    capacity_core::solver::SOLVER_TOL
}
fn default_offset() -> f64 {
    capacity_core::solver::DEFAULT_OFFSET_FACTOR
}
fn default_mode() -> String {
    "auto".into()
}
fn yes() -> bool {
    true
}
fn default_stages() -> usize {
    6
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            h: None,
            outer: None,
            growth: default_growth(),
            tol: default_tol(),
            offset: default_offset(),
            mode: default_mode(),
            richardson: true,
            max_stages: default_stages(),
            monotonicity_check: false,
        }
    }
}

impl GridSpec {
    pub fn mode(&self) -> Result<Mode, HarnessError> {
        Mode::parse(&self.mode).ok_or_else(|| HarnessError::Invalid(format!("unknown grid mode `{}`", self.mode)))
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        if let Some(h) = self.h {
            if !(h > 0.0) {
                return bad(format!("grid.h must be positive, got {h}"));
            }
        }
        if let Some(r) = self.outer {
            if !(r > 0.0) {
                return bad(format!("grid.outer must be positive, got {r}"));
            }
        }
        if !(self.growth >= 1.5) {
            return bad(format!("grid.growth must be >= 1.5, got {}", self.growth));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("grid.tol must lie in (0, 1), got {}", self.tol));
        }
        if !(2.0..=5.0).contains(&self.offset) {
            return bad(format!("grid.offset must lie in [2, 5] (units of h), got {}", self.offset));
        }
        if self.max_stages < 3 {
            return bad("grid.max_stages must be at least 3".into());
        }
        self.mode().map(|_| ())
    }
}

/// Parameters of the randomized comparison suites.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiccatiSpec {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_riccati_tol")]
    pub tolerance: f64,
}

fn default_count() -> usize {
    200
}
fn default_r_max() -> f64 {
    4.0
}
fn default_step() -> f64 {
    0.02
}
fn default_riccati_tol() -> f64 {
    1e-6
}

impl Default for RiccatiSpec {
    fn default() -> Self {
        RiccatiSpec { count: default_count(), seed: 0, r_max: default_r_max(), step: default_step(), tolerance: default_riccati_tol() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Reference {
    Path(String),
    Inline(toml::Table),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    id: String,
    kind: String,
    description: Option<String>,
    h0: Option<f64>,
    /// `grid` or `closed-form` (balls only)
    capacity: Option<String>,
    body: Option<Reference>,
    model: Option<Reference>,
    t0: Option<f64>,
    t1: Option<f64>,
    grid: Option<GridSpec>,
    riccati: Option<RiccatiSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMethod {
    Grid,
    ClosedForm,
}

#[derive(Debug, Clone)]
pub enum Geometry {
    Body(ConvexBody),
    Model { descriptor: ModelDescriptor, model: WarpedModel },
    None,
}

/// A validated scenario with its inputs echoed verbatim.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub kind: Kind,
    pub description: Option<String>,
    pub h0: Option<f64>,
    pub capacity: CapacityMethod,
    pub geometry: Geometry,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub grid: GridSpec,
    pub riccati: RiccatiSpec,
    /// Scenario text followed by every referenced descriptor.
    pub inputs: String,
}

/// Command-line overrides applied on top of the scenario values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub h: Option<f64>,
    pub outer: Option<f64>,
    pub growth: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, HarnessError> {
        let text = fs::read_to_string(path)?;
        Scenario::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses scenario `text`, resolving descriptor paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Scenario, HarnessError> {
        let file: ScenarioFile = toml::from_str(text)?;
        let kind = Kind::parse(&file.kind).ok_or_else(|| HarnessError::Invalid(format!("unknown kind `{}`", file.kind)))?;
        let mut inputs = text.to_string();
        let mut resolve = |r: Reference, what: &str| -> Result<toml::Table, HarnessError> {
            match r {
                Reference::Inline(t) => Ok(t),
                Reference::Path(p) => {
                    let full: PathBuf = base.join(&p);
                    let body = fs::read_to_string(&full).map_err(|e| HarnessError::Invalid(format!("{what} file {}: {e}", full.display())))?;
                    inputs.push_str(&format!("\n# --- {what}: {p}\n"));
                    inputs.push_str(&body);
                    Ok(toml::from_str(&body)?)
                }
            }
        };
        let geometry = match (file.body, file.model) {
            (Some(_), Some(_)) => return Err(HarnessError::Invalid("give either a body or a model, not both".into())),
            (Some(b), None) => {
                if !kind.accepts_body() {
                    return Err(HarnessError::Invalid(format!("{} does not take a body", kind.as_str())));
                }
                Geometry::Body(body_from_table(resolve(b, "body")?)?)
            }
            (None, Some(m)) => {
                if !kind.accepts_model() {
                    return Err(HarnessError::Invalid(format!("{} does not take a model", kind.as_str())));
                }
                let descriptor: ModelDescriptor = toml::Value::Table(resolve(m, "model")?).try_into()?;
                let model = descriptor.to_model()?;
                Geometry::Model { descriptor, model }
            }
            (None, None) => {
                if kind != Kind::RiccatiSuite {
                    return Err(HarnessError::Invalid(format!("{} needs a body or a model", kind.as_str())));
                }
                Geometry::None
            }
        };
        if let Some(h0) = file.h0 {
            if !(h0 > 0.0 && h0.is_finite()) {
                return Err(HarnessError::Invalid(format!("h0 must be positive, got {h0}")));
            }
        }
        if kind == Kind::Thm45 && file.h0.is_none() {
            if let Geometry::Body(b) = &geometry {
                if !b.is_smooth() {
                    return Err(HarnessError::Invalid("thm-4.5 on a non-smooth body needs an explicit h0".into()));
                }
            }
        }
        for (name, v) in [("t0", file.t0), ("t1", file.t1)] {
            if let Some(t) = v {
                if !(t >= 0.0) {
                    return Err(HarnessError::Invalid(format!("{name} must be non-negative, got {t}")));
                }
            }
        }
        if let Geometry::Model { descriptor, .. } = &geometry {
            if file.t0.is_none() && descriptor.splice_parameters().is_none() && kind != Kind::RadialEquality {
                // closed models need a ball radius; exterior ones default to t0 = 0
                if let capacity_core::model::ModelKind::Closed = geometry_model(&geometry).kind() {
                    return Err(HarnessError::Invalid("model scenarios need t0".into()));
                }
            }
            if kind == Kind::RadialEquality && descriptor.splice_parameters().is_none() && (file.t0.is_none() || file.h0.is_none()) {
                return Err(HarnessError::Invalid("radial-equality needs t0 and h0 (or a remark-splice model)".into()));
            }
        }
        let capacity = match file.capacity.as_deref() {
            None | Some("grid") => CapacityMethod::Grid,
            Some("closed-form") => match &geometry {
                Geometry::Body(b) if b.ball_radius().is_some() => CapacityMethod::ClosedForm,
                _ => return Err(HarnessError::Invalid("closed-form capacity is only available for balls".into())),
            },
            Some(other) => return Err(HarnessError::Invalid(format!("unknown capacity method `{other}`"))),
        };
        let grid = file.grid.unwrap_or_default();
        grid.validate()?;
        let riccati = file.riccati.unwrap_or_default();
        if riccati.count == 0 || !(riccati.r_max > 0.0) || !(riccati.step > 0.0) || !(riccati.tolerance >= 0.0) {
            return Err(HarnessError::Invalid("riccati parameters must be positive".into()));
        }
        if file.id.trim().is_empty() {
            return Err(HarnessError::Invalid("empty id".into()));
        }
        Ok(Scenario { id: file.id, kind, description: file.description, h0: file.h0, capacity, geometry, t0: file.t0, t1: file.t1, grid, riccati, inputs })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), HarnessError> {
        if o.h.is_some() {
            self.grid.h = o.h;
        }
        if o.outer.is_some() {
            self.grid.outer = o.outer;
        }
        if let Some(g) = o.growth {
            self.grid.growth = g;
        }
        if let Some(t) = o.tol {
            self.grid.tol = t;
        }
        if let Some(s) = o.seed {
            self.riccati.seed = s;
        }
        self.grid.validate()
    }
}

fn geometry_model(g: &Geometry) -> &WarpedModel {
    match g {
        Geometry::Model { model, .. } => model,
        _ => unreachable!("checked by the caller"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario, HarnessError> {
        Scenario::parse(text, Path::new("."))
    }

    #[test]
    fn inline_ball() {
        let s = parse("id = \"b\"\nkind = \"thm-3.1\"\nh0 = 1.0\n[body]\nkind = \"ball\"\nradius = 1.0\n").unwrap();
        assert_eq!(s.kind, Kind::Thm31);
        assert!(matches!(s.geometry, Geometry::Body(_)));
        assert_eq!(s.grid, GridSpec::default());
    }

    #[test]
    fn validation_errors() {
        for text in [
            "id = \"b\"\nkind = \"thm-3.1\"\nh0 = 0.0\n[body]\nkind = \"ball\"\nradius = 1.0\n",
            "id = \"b\"\nkind = \"thm-3.1\"\nh0 = -2.0\n[body]\nkind = \"ball\"\nradius = 1.0\n",
            "id = \"b\"\nkind = \"thm-9\"\n[body]\nkind = \"ball\"\nradius = 1.0\n",
            "id = \"b\"\nkind = \"thm-3.1\"\n",
            "id = \"b\"\nkind = \"riccati-suite\"\n[body]\nkind = \"ball\"\nradius = 1.0\n",
            "id = \"b\"\nkind = \"cor-4.1\"\ncapacity = \"closed-form\"\n[body]\nkind = \"ellipsoid\"\nsemi_axes = [1.0, 1.0, 2.0]\n",
            "id = \"b\"\nkind = \"cor-4.1\"\n[body]\nkind = \"ball\"\nradius = 1.0\n[grid]\ngrowth = 1.2\n",
            "id = \"b\"\nkind = \"cor-4.1\"\n[body]\nkind = \"ball\"\nradius = 1.0\n[grid]\noffset = 7.0\n",
            "id = \"b\"\nkind = \"thm-3.1\"\n[model]\nprofile = \"hyperbolic\"\nn = 2\n",
            "id = \"b\"\nkind = \"cor-4.1\"\nbogus = 1\n[body]\nkind = \"ball\"\nradius = 1.0\n",
        ] {
            assert!(parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn overrides() {
        let mut s = parse("id = \"b\"\nkind = \"riccati-suite\"\n").unwrap();
        s.apply(&Overrides { h: Some(0.05), seed: Some(9), ..Overrides::default() }).unwrap();
        assert_eq!(s.grid.h, Some(0.05));
        assert_eq!(s.riccati.seed, 9);
        assert!(s.apply(&Overrides { growth: Some(1.1), ..Overrides::default() }).is_err());
    }
}
