//! Family specification files.
//!
//! ```json
//! {
//!   "kind": "plane",
//!   "points": [{"name": "p1", "germ": "t + O(t^6)"}, "t - t^4 + O(t^6)"],
//!   "angles": ["9/10", 0.9],
//!   "sections": {"s": "t - t^4 + t^5 + O(t^6)"},
//!   "verify": {"rel_tol": 1e-8, "t": 0.01, "pairs": [["p1", "p2"]]}
//! }
//! ```
//!
//! Bare germ strings in `points` are named `p1, p2, ...` by position. Every
//! field is checked before any analysis runs, and each error names the JSON
//! pointer of the field at fault.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use bubblekit::flat::{Ambient, AngleVector, FamilyConfig, FlatError};
use bubblekit::moduli::NodalCurve;
use bubblekit::numeric::QuadratureSpec;
use bubblekit::series::{Germ, PolyFamily, Rat};
use serde_json::{Map, Value};

use crate::error::{token, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Plane,
    Sphere,
    GhMonopole,
    PolyFamily,
}

impl Kind {
    fn allowed(self) -> &'static [&'static str] {
        match self {
            Kind::Plane => &["points", "angles", "sections", "verify"],
            Kind::Sphere => &["points", "angles", "sections", "curve", "verify"],
            Kind::GhMonopole => &["points", "sections", "verify"],
            Kind::PolyFamily => &["variables", "polynomial", "schedule"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Plane => "plane",
            Kind::Sphere => "sphere",
            Kind::GhMonopole => "ghmonopole",
            Kind::PolyFamily => "polyfamily",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Named {
    pub name: String,
    pub germ: Germ,
    pub pointer: String,
}

#[derive(Debug, Clone)]
pub struct WeightRow {
    pub weights: Vec<Rat>,
    pub pointer: String,
}

#[derive(Debug, Clone)]
pub struct Verify {
    pub quadrature: QuadratureSpec,
    /// Parameter value at which single-time checks freeze the family.
    pub t: f64,
    pub t_samples: Vec<f64>,
    pub pairs: Vec<(String, String, String)>,
}

impl Default for Verify {
    fn default() -> Self {
        Verify {
            quadrature: QuadratureSpec::default(),
            t: 1.0 / 64.0,
            t_samples: (4..=12).map(|k| 2f64.powi(-k)).collect(),
            pairs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spec {
    pub file: PathBuf,
    pub kind: Kind,
    pub points: Vec<Named>,
    pub angles: Option<AngleVector>,
    /// Sorted by name.
    pub sections: Vec<Named>,
    pub polynomial: Option<PolyFamily>,
    pub schedule: Vec<WeightRow>,
    pub curve: Option<NodalCurve>,
    pub verify: Verify,
}

impl Spec {
    pub fn load(file: &Path) -> Result<Spec, CliError> {
        let text = std::fs::read_to_string(file).map_err(|e| CliError::validation(file, "", e))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(file, "", format!("not valid JSON: {e}")))?;
        Spec::from_value(file, &value)
    }

    pub fn from_value(file: &Path, value: &Value) -> Result<Spec, CliError> {
        let cx = Cx { file };
        let root = value.as_object().ok_or_else(|| cx.err("", "expected a JSON object"))?;
        let kind = match root.get("kind") {
            None => return Err(cx.err("/kind", "missing field")),
            Some(Value::String(s)) => match s.as_str() {
                "plane" => Kind::Plane,
                "sphere" => Kind::Sphere,
                "ghmonopole" => Kind::GhMonopole,
                "polyfamily" => Kind::PolyFamily,
                other => {
                    return Err(cx.err(
                        "/kind",
                        format!("unknown kind {other:?}; expected plane, sphere, ghmonopole or polyfamily"),
                    ))
                }
            },
            Some(_) => return Err(cx.err("/kind", "expected a string")),
        };
        for key in root.keys() {
            if key != "kind" && key != "description" && !kind.allowed().contains(&key.as_str()) {
                return Err(cx.err(format!("/{}", token(key)), format!("field not allowed for kind {}", kind.name())));
            }
        }
        let mut spec = Spec {
            file: file.to_path_buf(),
            kind,
            points: Vec::new(),
            angles: None,
            sections: Vec::new(),
            polynomial: None,
            schedule: Vec::new(),
            curve: None,
            verify: Verify::default(),
        };
        if kind == Kind::PolyFamily {
            cx.poly_fields(root, &mut spec)?;
            return Ok(spec);
        }
        spec.points = cx.points(root)?;
        if kind != Kind::GhMonopole {
            let angles = cx.angles(root)?;
            if angles.len() != spec.points.len() {
                return Err(cx.err(
                    "/angles",
                    format!("{} angles for {} points", angles.len(), spec.points.len()),
                ));
            }
            spec.angles = Some(angles);
        }
        spec.sections = cx.sections(root)?;
        let mut names = BTreeSet::new();
        for n in spec.points.iter().chain(&spec.sections) {
            if !names.insert(n.name.as_str()) {
                return Err(cx.err(n.pointer.clone(), format!("name {:?} is used twice", n.name)));
            }
        }
        if let Some(v) = root.get("curve") {
            let curve: NodalCurve =
                serde_json::from_value(v.clone()).map_err(|e| cx.err("/curve", format!("invalid nodal curve: {e}")))?;
            spec.curve = Some(curve);
        }
        if let Some(v) = root.get("verify") {
            spec.verify = cx.verify(v, &names)?;
        }
        Ok(spec)
    }

    pub fn err(&self, pointer: impl Into<String>, message: impl std::fmt::Display) -> CliError {
        CliError::validation(&self.file, pointer, message)
    }

    pub fn numeric_err(&self, pointer: impl Into<String>, message: impl std::fmt::Display) -> CliError {
        CliError::numeric(&self.file, pointer, message)
    }

    pub fn require(&self, kinds: &[Kind], command: &str) -> Result<(), CliError> {
        if kinds.contains(&self.kind) {
            return Ok(());
        }
        let names: Vec<&str> = kinds.iter().map(|k| k.name()).collect();
        Err(self.err("/kind", format!("`{command}` needs kind {}, found {}", names.join(" or "), self.kind.name())))
    }

    pub fn point_names(&self) -> Vec<String> {
        self.points.iter().map(|p| p.name.clone()).collect()
    }

    pub fn germs(&self) -> Vec<Germ> {
        self.points.iter().map(|p| p.germ.clone()).collect()
    }

    pub fn section(&self, name: &str) -> Result<&Named, CliError> {
        self.sections.iter().find(|s| s.name == name).ok_or_else(|| {
            let known: Vec<&str> = self.sections.iter().map(|s| s.name.as_str()).collect();
            self.err("/sections", format!("no section named {name:?}; known: [{}]", known.join(", ")))
        })
    }

    /// A point or section by name.
    pub fn germ_named(&self, name: &str) -> Option<&Named> {
        self.points.iter().chain(&self.sections).find(|n| n.name == name)
    }

    pub fn family(&self) -> Result<FamilyConfig, CliError> {
        let ambient = match self.kind {
            Kind::Plane => Ambient::Plane,
            Kind::Sphere => Ambient::Sphere,
            _ => return Err(self.err("/kind", "not a cone point family")),
        };
        let angles = self.angles.clone().expect("validated");
        FamilyConfig::new(self.germs(), angles, ambient).map_err(|e| self.flat_err(&e))
    }

    /// Locates a cone point family error in the spec.
    pub fn flat_err(&self, e: &FlatError) -> CliError {
        use bubblekit::tree::TreeError;
        let pointer = match e {
            FlatError::InvalidAngle { index, .. } => format!("/angles/{index}"),
            FlatError::Tree(TreeError::AmbiguousTruncation { j, .. }) => self.points[*j].pointer.clone(),
            FlatError::Tree(TreeError::IndexOutOfRange { .. } | TreeError::DuplicateIndex { .. }) => "/points".into(),
            FlatError::Empty | FlatError::Tree(TreeError::Empty) => "/points".into(),
            _ => "/angles".into(),
        };
        self.err(pointer, e)
    }
}

struct Cx<'a> {
    file: &'a Path,
}

impl Cx<'_> {
    fn err(&self, pointer: impl Into<String>, message: impl std::fmt::Display) -> CliError {
        CliError::validation(self.file, pointer, message)
    }

    fn germ(&self, pointer: &str, v: &Value) -> Result<Germ, CliError> {
        let text = v.as_str().ok_or_else(|| self.err(pointer, "expected a germ string"))?;
        Germ::parse(text).map_err(|e| self.err(pointer, format!("bad germ {text:?}: {e}")))
    }

    fn rational(&self, pointer: &str, v: &Value) -> Result<Rat, CliError> {
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(self.err(pointer, "expected a rational, as a number or a string such as \"3/4\"")),
        };
        text.parse().map_err(|e| self.err(pointer, e))
    }

    fn array<'v>(&self, root: &'v Map<String, Value>, key: &str) -> Result<Option<&'v Vec<Value>>, CliError> {
        match root.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => Ok(Some(a)),
            Some(_) => Err(self.err(format!("/{key}"), "expected an array")),
        }
    }

    fn points(&self, root: &Map<String, Value>) -> Result<Vec<Named>, CliError> {
        let items = self.array(root, "points")?.ok_or_else(|| self.err("/points", "missing field"))?;
        if items.is_empty() {
            return Err(self.err("/points", "at least one point is needed"));
        }
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            let pointer = format!("/points/{i}");
            let named = match item {
                Value::String(_) => Named { name: format!("p{}", i + 1), germ: self.germ(&pointer, item)?, pointer },
                Value::Object(obj) => {
                    for key in obj.keys() {
                        if key != "name" && key != "germ" {
                            return Err(self.err(format!("{pointer}/{}", token(key)), "unknown field"));
                        }
                    }
                    let name = match obj.get("name") {
                        Some(Value::String(s)) if !s.is_empty() => s.clone(),
                        Some(_) => return Err(self.err(format!("{pointer}/name"), "expected a nonempty string")),
                        None => return Err(self.err(format!("{pointer}/name"), "missing field")),
                    };
                    let germ_ptr = format!("{pointer}/germ");
                    let germ = self.germ(&germ_ptr, obj.get("germ").ok_or_else(|| self.err(&germ_ptr, "missing field"))?)?;
                    Named { name, germ, pointer }
                }
                _ => return Err(self.err(pointer, "expected a germ string or {\"name\", \"germ\"}")),
            };
            out.push(named);
        }
        Ok(out)
    }

    fn angles(&self, root: &Map<String, Value>) -> Result<AngleVector, CliError> {
        let items = self.array(root, "angles")?.ok_or_else(|| self.err("/angles", "missing field"))?;
        let betas = items
            .iter()
            .enumerate()
            .map(|(i, v)| self.rational(&format!("/angles/{i}"), v))
            .collect::<Result<Vec<Rat>, _>>()?;
        AngleVector::new(betas).map_err(|e| match e {
            FlatError::InvalidAngle { index, .. } => self.err(format!("/angles/{index}"), e),
            other => self.err("/angles", other),
        })
    }

    fn sections(&self, root: &Map<String, Value>) -> Result<Vec<Named>, CliError> {
        let obj = match root.get("sections") {
            None => return Ok(Vec::new()),
            Some(Value::Object(obj)) => obj,
            Some(_) => return Err(self.err("/sections", "expected an object of named germs")),
        };
        // serde_json maps iterate in key order.
        obj.iter()
            .map(|(name, v)| {
                let pointer = format!("/sections/{}", token(name));
                Ok(Named { name: name.clone(), germ: self.germ(&pointer, v)?, pointer })
            })
            .collect()
    }

    fn number(&self, pointer: &str, v: &Value) -> Result<f64, CliError> {
        v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| self.err(pointer, "expected a finite number"))
    }

    fn verify(&self, v: &Value, names: &BTreeSet<&str>) -> Result<Verify, CliError> {
        let obj = v.as_object().ok_or_else(|| self.err("/verify", "expected an object"))?;
        let mut out = Verify::default();
        for (key, v) in obj {
            let pointer = format!("/verify/{}", token(key));
            match key.as_str() {
                "rel_tol" => {
                    let x = self.number(&pointer, v)?;
                    if !(x > 0.0 && x <= 1e-2) {
                        return Err(self.err(pointer, "must lie in (0, 1e-2]"));
                    }
                    out.quadrature.rel_tol = x;
                }
                "max_depth" => {
                    out.quadrature.max_depth = v
                        .as_u64()
                        .filter(|d| (1..=60).contains(d))
                        .ok_or_else(|| self.err(&pointer, "expected an integer in 1..=60"))?
                        as u32;
                }
                "singularity_guard" => {
                    let x = self.number(&pointer, v)?;
                    if !(x > 0.0) {
                        return Err(self.err(pointer, "must be positive"));
                    }
                    out.quadrature.singularity_guard = x;
                }
                "t" => {
                    let x = self.number(&pointer, v)?;
                    if !(x > 0.0) {
                        return Err(self.err(pointer, "must be positive"));
                    }
                    out.t = x;
                }
                "t_samples" => {
                    let items = v.as_array().ok_or_else(|| self.err(&pointer, "expected an array"))?;
                    out.t_samples = items
                        .iter()
                        .enumerate()
                        .map(|(i, x)| {
                            let p = format!("{pointer}/{i}");
                            let x = self.number(&p, x)?;
                            if x > 0.0 {
                                Ok(x)
                            } else {
                                Err(self.err(p, "must be positive"))
                            }
                        })
                        .collect::<Result<_, _>>()?;
                }
                "pairs" => {
                    let items = v.as_array().ok_or_else(|| self.err(&pointer, "expected an array"))?;
                    for (i, pair) in items.iter().enumerate() {
                        let p = format!("{pointer}/{i}");
                        let ends = pair
                            .as_array()
                            .filter(|a| a.len() == 2)
                            .ok_or_else(|| self.err(&p, "expected [name, name]"))?;
                        let mut got = Vec::new();
                        for (k, end) in ends.iter().enumerate() {
                            let name = end.as_str().ok_or_else(|| self.err(format!("{p}/{k}"), "expected a name"))?;
                            if !names.contains(name) {
                                return Err(self.err(format!("{p}/{k}"), format!("unknown point or section {name:?}")));
                            }
                            got.push(name.to_string());
                        }
                        out.pairs.push((got[0].clone(), got[1].clone(), p));
                    }
                }
                _ => return Err(self.err(pointer, "unknown field")),
            }
        }
        Ok(out)
    }

    fn poly_fields(&self, root: &Map<String, Value>, spec: &mut Spec) -> Result<(), CliError> {
        let vars = self.array(root, "variables")?.ok_or_else(|| self.err("/variables", "missing field"))?;
        let vars: Vec<String> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_str()
                    .filter(|s| !s.is_empty() && *s != "t")
                    .map(str::to_string)
                    .ok_or_else(|| self.err(format!("/variables/{i}"), "expected a variable name other than t"))
            })
            .collect::<Result<_, _>>()?;
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(self.err(format!("/variables/{i}"), format!("variable {v:?} repeated")));
            }
        }
        let text = match root.get("polynomial") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(self.err("/polynomial", "expected a string")),
            None => return Err(self.err("/polynomial", "missing field")),
        };
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        spec.polynomial =
            Some(PolyFamily::parse(text, &refs).map_err(|e| self.err("/polynomial", format!("{text:?}: {e}")))?);
        if let Some(rows) = self.array(root, "schedule")? {
            for (i, row) in rows.iter().enumerate() {
                let pointer = format!("/schedule/{i}");
                let items = row.as_array().ok_or_else(|| self.err(&pointer, "expected an array of weights"))?;
                if items.len() != vars.len() {
                    return Err(self.err(pointer, format!("{} weights for {} variables", items.len(), vars.len())));
                }
                let weights = items
                    .iter()
                    .enumerate()
                    .map(|(k, w)| self.rational(&format!("{pointer}/{k}"), w))
                    .collect::<Result<_, _>>()?;
                spec.schedule.push(WeightRow { weights, pointer });
            }
        }
        Ok(())
    }
}
