//! One function per subcommand, each rendering a report in the requested format.
//!
//! Reports are built from ordered data only (vectors and key-sorted maps), so
//! identical inputs give byte-identical output.

use std::fmt::Write as _;

use bubblekit::flat::{
    alpha_exponents, bubble_tree, BubbleModel, ConePoint, RescaledLimit, SectionAnalysis, TerminalRegime,
};
use bubblekit::gibbons_hawking::{
    ak_rescaled_limits, curvature_blowup, defining_equation, AleOrbifoldModel, Basepoint, GhError, MonopoleFamily,
};
use bubblekit::moduli::{
    bubbletree_to_nodal_curve, is_beta_stable, node_weights, non_collapse_check, principal_component, resolve,
    CP1Point, MarkedTuple, ModuliError, NodalCurve,
};
use bubblekit::numeric::{
    cone_angle_at_infinity, cone_angle_probe, scaling_slope, sphere_area, ConeConfig, NumericError, SlopeFit,
};
use bubblekit::rescale::{breakpoints, iterate_cascade, rescale, CascadePolicy, RescaleError, RescaleResult, WeightVector};
use bubblekit::series::{GaussRat, Germ, Rat};
use bubblekit::tree::{Terminal, TreeError, VanishingTree};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::spec::{Kind, Spec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Dot => "dot",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Check {
    /// Power law of the distance surrogate between each configured pair.
    Slope,
    /// Cone angles recovered by metric probes at the configured `t`.
    Probe,
    /// Total area of a sphere family at the configured `t`.
    Area,
    /// Curvature growth along each section of a monopole family.
    Curvature,
}

/// Picks the format, rejecting ones the command cannot produce.
fn choose(spec: &Spec, requested: Option<Format>, supported: &[Format], command: &str) -> Result<Format, CliError> {
    let format = requested.unwrap_or(supported[0]);
    if supported.contains(&format) {
        Ok(format)
    } else {
        let names: Vec<&str> = supported.iter().map(|f| f.name()).collect();
        Err(spec.err("", format!("`{command}` writes {}, not {}", names.join(" or "), format.name())))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn rat(r: &Rat) -> Value {
    Value::String(r.to_string())
}

fn gauss(z: &GaussRat) -> Value {
    Value::String(z.to_string())
}

fn names_of(spec: &Spec, members: &[usize]) -> Value {
    Value::from(members.iter().map(|&m| spec.points[m].name.clone()).collect::<Vec<_>>())
}

fn tree_err(spec: &Spec, e: &TreeError) -> CliError {
    match e {
        TreeError::AmbiguousTruncation { j, .. } => spec.err(spec.points[*j].pointer.clone(), e),
        TreeError::AmbiguousSection { .. } => spec.err("/sections", e),
        _ => spec.err("/points", e),
    }
}

fn tree_json(spec: &Spec, tree: &VanishingTree) -> Value {
    Value::from(
        tree.nodes()
            .iter()
            .map(|n| {
                json!({
                    "id": n.id,
                    "members": names_of(spec, &n.members),
                    "split_order": n.split_order,
                    "children": n.children,
                })
            })
            .collect::<Vec<_>>(),
    )
}

pub fn tree(spec: &Spec, format: Option<Format>) -> Result<String, CliError> {
    spec.require(&[Kind::Plane, Kind::Sphere, Kind::GhMonopole], "tree")?;
    let format = choose(spec, format, &[Format::Dot, Format::Json], "tree")?;
    let names = spec.point_names();
    // A sphere family has one tree per collision cluster.
    let trees: Vec<(Option<GaussRat>, VanishingTree)> = if spec.kind == Kind::Sphere {
        let report = bubble_tree(&spec.family()?).map_err(|e| spec.flat_err(&e))?;
        report.trees.into_iter().map(|c| (Some(c.value), c.tree)).collect()
    } else {
        vec![(None, VanishingTree::build(&spec.germs()).map_err(|e| tree_err(spec, &e))?)]
    };
    Ok(match format {
        Format::Dot => trees.iter().map(|(_, t)| t.to_dot_named(&names)).collect(),
        _ => {
            let list: Vec<Value> = trees
                .iter()
                .map(|(value, t)| json!({ "value": value.as_ref().map(gauss), "nodes": tree_json(spec, t) }))
                .collect();
            pretty(&json!({ "trees": list }))
        }
    })
}

fn cone_point_json(spec: &Spec, p: &ConePoint) -> Value {
    json!({ "position": gauss(&p.position), "angle": rat(&p.angle), "members": names_of(spec, &p.members) })
}

fn bubble_json(spec: &Spec, b: &BubbleModel) -> Value {
    json!({
        "cone_points": b.cone_points.iter().map(|p| cone_point_json(spec, p)).collect::<Vec<_>>(),
        "gamma_infinity": rat(&b.gamma_infinity),
        "basepoint": gauss(&b.basepoint),
    })
}

pub fn bubbles(spec: &Spec, format: Option<Format>) -> Result<String, CliError> {
    spec.require(&[Kind::Plane, Kind::Sphere], "bubbles")?;
    choose(spec, format, &[Format::Json], "bubbles")?;
    let report = bubble_tree(&spec.family()?).map_err(|e| spec.flat_err(&e))?;
    let bubbles: Vec<Value> = report
        .bubbles
        .iter()
        .map(|nb| {
            let tree = &report.trees[nb.tree].tree;
            let node = tree.node(nb.node).expect("bubble node");
            json!({
                "tree": nb.tree,
                "node": nb.node,
                "members": names_of(spec, &node.members),
                "split_order": node.split_order,
                "bubble": bubble_json(spec, &nb.bubble),
            })
        })
        .collect();
    Ok(pretty(&json!({
        "kind": spec.kind.name(),
        "limit": report.limit.iter().map(|p| cone_point_json(spec, p)).collect::<Vec<_>>(),
        "trees": report
            .trees
            .iter()
            .map(|c| json!({ "value": gauss(&c.value), "nodes": tree_json(spec, &c.tree) }))
            .collect::<Vec<_>>(),
        "bubbles": bubbles,
    })))
}

fn limit_text(limit: &RescaledLimit) -> String {
    match limit {
        RescaledLimit::Cone(c) => format!("cone of angle 2pi*{} at its vertex", c.gamma),
        RescaledLimit::Bubble(b) => format!(
            "bubble with {} cone point{}, angle 2pi*{} at infinity",
            b.cone_points.len(),
            if b.cone_points.len() == 1 { "" } else { "s" },
            b.gamma_infinity
        ),
        RescaledLimit::Terminal(TerminalRegime::Plane) => "flat plane".into(),
        RescaledLimit::Terminal(TerminalRegime::Cone(c)) => format!("cone of angle 2pi*{} at its vertex", c.gamma),
    }
}

/// Rows `(regime, alpha_from, alpha_to, limit)` covering `alpha > 0`.
fn regime_rows(a: &SectionAnalysis) -> Vec<[String; 4]> {
    let mut rows = Vec::new();
    let mut below = Rat::zero();
    for b in &a.breakpoints {
        rows.push([
            "cone".into(),
            below.to_string(),
            b.alpha.to_string(),
            limit_text(&RescaledLimit::Cone(b.cone.clone())),
        ]);
        rows.push([
            "bubble".into(),
            b.alpha.to_string(),
            b.alpha.to_string(),
            limit_text(&RescaledLimit::Bubble(b.bubble.clone())),
        ]);
        below = b.alpha.clone();
    }
    rows.push(["terminal".into(), below.to_string(), "inf".into(), limit_text(&RescaledLimit::Terminal(a.terminal.clone()))]);
    rows
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn section(spec: &Spec, name: &str, format: Option<Format>) -> Result<String, CliError> {
    spec.require(&[Kind::Plane, Kind::Sphere], "section")?;
    let format = choose(spec, format, &[Format::Json, Format::Csv], "section")?;
    let s = spec.section(name)?;
    let config = spec.family()?;
    let a = alpha_exponents(&config, &s.germ).map_err(|e| match e {
        bubblekit::flat::FlatError::ClusterMismatch { .. } => spec.err(s.pointer.clone(), e),
        bubblekit::flat::FlatError::Tree(TreeError::AmbiguousSection { .. }) => spec.err(s.pointer.clone(), e),
        other => spec.flat_err(&other),
    })?;
    let rows = regime_rows(&a);
    if format == Format::Csv {
        let mut out = String::from("regime,alpha_from,alpha_to,limit\n");
        for row in &rows {
            let cells: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        return Ok(out);
    }
    let path: Vec<Value> =
        a.path.nodes.iter().map(|&v| names_of(spec, &a.tree.node(v).expect("path node").members)).collect();
    let terminal = match a.path.terminal {
        Terminal::MatchesGerm(i) => json!({ "matches": spec.points[i].name }),
        Terminal::Generic => json!("generic"),
    };
    let breakpoints: Vec<Value> = a
        .breakpoints
        .iter()
        .map(|b| {
            json!({
                "d": b.d,
                "alpha": rat(&b.alpha),
                "members": names_of(spec, &b.members),
                "cone_below": rat(&b.cone.gamma),
                "bubble": bubble_json(spec, &b.bubble),
            })
        })
        .collect();
    let orders: Vec<Value> =
        a.orders.iter().map(|(j, o)| json!({ "point": spec.points[*j].name, "order": o.to_string() })).collect();
    let regimes: Vec<Value> = rows
        .iter()
        .map(|[kind, from, to, limit]| json!({ "regime": kind, "alpha_from": from, "alpha_to": to, "limit": limit }))
        .collect();
    Ok(pretty(&json!({
        "section": name,
        "germ": s.germ.to_string(),
        "cluster": names_of(spec, &a.cluster),
        "gamma": rat(&a.gamma),
        "path": path,
        "terminal": terminal,
        "orders": orders,
        "breakpoints": breakpoints,
        "regimes": regimes,
    })))
}

pub fn stability(spec: &Spec, format: Option<Format>) -> Result<String, CliError> {
    spec.require(&[Kind::Plane, Kind::Sphere], "stability")?;
    choose(spec, format, &[Format::Json], "stability")?;
    let angles = spec.angles.as_ref().expect("validated");
    let total = angles.total_defect();
    // Clusters of the t = 0 configuration.
    let mut values: Vec<GaussRat> = Vec::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, p) in spec.points.iter().enumerate() {
        let v = p.germ.value_at_zero();
        match values.iter().position(|w| *w == v) {
            Some(k) => clusters[k].push(i),
            None => {
                values.push(v);
                clusters.push(vec![i]);
            }
        }
    }
    let blocks: Vec<Value> = values
        .iter()
        .zip(&clusters)
        .map(|(v, members)| {
            let defect = angles.defect(members);
            json!({
                "value": gauss(v),
                "members": names_of(spec, members),
                "defect": rat(&defect),
                "below_one": defect < Rat::one(),
            })
        })
        .collect();
    let tuple = MarkedTuple::from_points(&values_per_point(spec));
    let mut report = json!({
        "kind": spec.kind.name(),
        "total_defect": rat(&total),
        "non_collapsing": non_collapse_check(angles),
        "limit_blocks": blocks,
        "limit_beta_stable": is_beta_stable(&tuple, angles),
    });
    let obj = report.as_object_mut().expect("object");
    match spec.kind {
        Kind::Sphere => {
            obj.insert("gauss_bonnet".into(), json!(total == Rat::integer(2)));
        }
        _ => {
            obj.insert("angle_at_infinity".into(), rat(&(&Rat::one() - &total)));
        }
    }
    Ok(pretty(&report))
}

fn values_per_point(spec: &Spec) -> Vec<CP1Point> {
    spec.points.iter().map(|p| CP1Point::Finite(p.germ.value_at_zero())).collect()
}

fn moduli_err(spec: &Spec, e: ModuliError) -> CliError {
    let pointer = match &e {
        ModuliError::Flat(f) => return spec.flat_err(f),
        ModuliError::GaussBonnet { .. } | ModuliError::LengthMismatch { .. } => "/angles",
        ModuliError::NotSphere => "/kind",
        _ if spec.curve.is_some() => "/curve",
        _ => "/angles",
    };
    spec.err(pointer, e)
}

pub fn resolve_cmd(spec: &Spec, format: Option<Format>) -> Result<String, CliError> {
    spec.require(&[Kind::Sphere], "resolve")?;
    let format = choose(spec, format, &[Format::Json, Format::Dot], "resolve")?;
    let angles = spec.angles.as_ref().expect("validated");
    let (curve, source): (NodalCurve, &str) = match &spec.curve {
        Some(c) => (c.clone(), "curve"),
        None => (bubbletree_to_nodal_curve(&spec.family()?).map_err(|e| moduli_err(spec, e))?, "bubble tree"),
    };
    if curve.num_marks() != angles.len() {
        return Err(spec.err("/curve", format!("{} marked points for {} angles", curve.num_marks(), angles.len())));
    }
    let weights = node_weights(&curve, angles).map_err(|e| moduli_err(spec, e))?;
    if format == Format::Dot {
        return Ok(curve.to_dot(Some(&weights)));
    }
    let principal = principal_component(&curve, angles).map_err(|e| moduli_err(spec, e))?;
    let tuple = resolve(&curve, angles).map_err(|e| moduli_err(spec, e))?;
    let nodes: Vec<Value> = weights
        .iter()
        .map(|((at, toward), w)| json!({ "at": at, "toward": toward, "weight": rat(w) }))
        .collect();
    Ok(pretty(&json!({
        "source": source,
        "components": curve.components().iter().map(|c| json!({ "id": c.id, "marks": c.marks })).collect::<Vec<_>>(),
        "edges": curve.edges(),
        "node_weights": nodes,
        "principal_component": principal,
        "tuple": {
            "labels": tuple.labels,
            "values": tuple.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        },
        "beta_stable": is_beta_stable(&tuple, angles),
    })))
}

fn gh_err(spec: &Spec, pointer: &str, e: GhError) -> CliError {
    match e {
        GhError::Tree(t) => tree_err(spec, &t),
        GhError::Numeric(_) | GhError::SingularPoint { .. } | GhError::StepUnderflow { .. } => {
            spec.numeric_err(pointer, e)
        }
        other => spec.err(pointer, other),
    }
}

/// The named section, the only section, or the zero section.
fn gh_section(spec: &Spec, name: Option<&str>) -> Result<(String, Germ, String), CliError> {
    match (name, spec.sections.as_slice()) {
        (Some(n), _) => {
            let s = spec.section(n)?;
            Ok((s.name.clone(), s.germ.clone(), s.pointer.clone()))
        }
        (None, [only]) => Ok((only.name.clone(), only.germ.clone(), only.pointer.clone())),
        (None, []) => {
            let trunc = spec.points.iter().map(|p| p.germ.trunc()).max().unwrap_or(1);
            Ok(("zero".into(), Germ::zero(trunc), "/sections".into()))
        }
        (None, _) => Err(spec.err("/sections", "several sections; choose one with --name")),
    }
}

fn ale_json(spec: &Spec, m: &AleOrbifoldModel) -> Result<Value, CliError> {
    let equation = defining_equation(&m.config).map_err(|e| gh_err(spec, "/points", e))?;
    Ok(json!({
        "monopoles": m.config.points().iter().map(|p| json!({
            "position": p.position.iter().map(rat).collect::<Vec<_>>(),
            "multiplicity": p.multiplicity,
        })).collect::<Vec<_>>(),
        "basepoint": match m.basepoint {
            Basepoint::Monopole(i) => json!({ "monopole": i }),
            Basepoint::Regular => json!("regular"),
        },
        "basepoint_type": m.basepoint_type,
        "a0_flag": m.a0_flag,
        "cone_order": m.cone_order(),
        "equation": equation.to_string(),
    }))
}

pub fn ghlimits(spec: &Spec, name: Option<&str>, format: Option<Format>) -> Result<String, CliError> {
    spec.require(&[Kind::GhMonopole], "ghlimits")?;
    choose(spec, format, &[Format::Json], "ghlimits")?;
    let (section_name, section, pointer) = gh_section(spec, name)?;
    let family = MonopoleFamily { z_paths: spec.germs(), section };
    let lim = ak_rescaled_limits(&family).map_err(|e| match e {
        GhError::Tree(TreeError::AmbiguousSection { .. }) => spec.err(pointer.clone(), e),
        other => gh_err(spec, &pointer, other),
    })?;
    let mut breakpoints = Vec::new();
    for b in &lim.breakpoints {
        breakpoints.push(json!({
            "d": b.d,
            "alpha": rat(&b.alpha),
            "cone_below": b.cone_below,
            "model": ale_json(spec, &b.model)?,
        }));
    }
    let orders: Vec<Value> =
        lim.orders.iter().map(|(j, o)| json!({ "path": spec.points[*j].name, "order": o.to_string() })).collect();
    Ok(pretty(&json!({
        "section": section_name,
        "orders": orders,
        "breakpoints": breakpoints,
        "terminal_order": lim.terminal_order,
    })))
}

/// How `rescale` picks its scale exponent.
#[derive(Debug, Clone)]
pub enum ScaleChoice {
    Fixed(Rat),
    Auto,
}

fn rescale_err(spec: &Spec, row: &str, e: RescaleError) -> CliError {
    let pointer = match e {
        RescaleError::ZeroFamily => "/polynomial".to_string(),
        _ => row.to_string(),
    };
    spec.err(pointer, e)
}

fn stage_json(weights: &[Rat], bps: &[Rat], r: &RescaleResult) -> Value {
    json!({
        "weights": weights.iter().map(rat).collect::<Vec<_>>(),
        "breakpoints": bps.iter().map(rat).collect::<Vec<_>>(),
        "c": rat(&r.c_used),
        "limit": r.limit.to_string(),
        "rescaled": r.rescaled.to_string(),
        "dropped_terms": r.dropped_terms,
    })
}

/// Rescales with each weight vector in turn; a single vector may use a fixed `c`.
pub fn rescale_cmd(spec: &Spec, weights: &[Vec<Rat>], choice: &ScaleChoice, format: Option<Format>) -> Result<String, CliError> {
    spec.require(&[Kind::PolyFamily], "rescale")?;
    choose(spec, format, &[Format::Json], "rescale")?;
    let family = spec.polynomial.as_ref().expect("validated");
    // Flag-given weights have no location in the file.
    let (rows, pointers): (Vec<Vec<Rat>>, Vec<String>) = if weights.is_empty() {
        spec.schedule.iter().map(|r| (r.weights.clone(), r.pointer.clone())).unzip()
    } else {
        weights.iter().map(|w| (w.clone(), String::new())).unzip()
    };
    if rows.is_empty() {
        return Err(spec.err("/schedule", "no weights: pass --weights or give a schedule"));
    }
    let schedule = rows
        .iter()
        .zip(&pointers)
        .map(|(w, p)| WeightVector::new(w.clone()).map_err(|e| spec.err(p.clone(), e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut stages = Vec::new();
    match choice {
        ScaleChoice::Fixed(c) => {
            if schedule.len() != 1 {
                return Err(spec.err("/schedule", "a fixed --c applies to a single weight vector; use --auto for a cascade"));
            }
            let bps = breakpoints(family, &schedule[0]).map_err(|e| rescale_err(spec, &pointers[0], e))?;
            let r = rescale(family, &schedule[0], c).map_err(|e| rescale_err(spec, &pointers[0], e))?;
            stages.push(stage_json(&rows[0], &bps, &r));
        }
        ScaleChoice::Auto => {
            let results =
                iterate_cascade(family, &schedule, CascadePolicy::Smallest).map_err(|e| {
                let stage = match e {
                    RescaleError::EmptyBreakpoints { stage } | RescaleError::MissingBreakpoint { stage, .. } => stage,
                    _ => 0,
                };
                rescale_err(spec, &pointers[stage.min(pointers.len() - 1)], e)
            })?;
            let mut current = family.clone();
            for ((w, row), r) in schedule.iter().zip(&rows).zip(&results) {
                let bps = breakpoints(&current, w).map_err(|e| rescale_err(spec, "", e))?;
                stages.push(stage_json(row, &bps, r));
                current = r.rescaled.clone();
            }
        }
    }
    let limit = stages.last().map(|s| s["limit"].clone()).unwrap_or(Value::Null);
    Ok(pretty(&json!({
        "family": family.to_string(),
        "variables": family.variables(),
        "policy": match choice { ScaleChoice::Fixed(_) => "fixed", ScaleChoice::Auto => "smallest breakpoint" },
        "stages": stages,
        "limit": limit,
    })))
}

fn numeric(spec: &Spec, pointer: &str, e: NumericError) -> CliError {
    match e {
        NumericError::InvalidSpec { .. } | NumericError::TooFewSamples { .. } => spec.err(pointer, e),
        other => spec.numeric_err(pointer, other),
    }
}

fn fit_json(label: &str, fit: &SlopeFit) -> Value {
    json!({
        "pair": label,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r2": fit.r2,
        "samples": fit.samples.iter().map(|(x, y)| json!({ "log_t": x, "log_value": y })).collect::<Vec<_>>(),
    })
}

fn fits_csv(fits: &[(String, SlopeFit)]) -> String {
    let mut out = String::from("series,t,value,log_t,log_value\n");
    for (label, fit) in fits {
        for line in fit.to_csv().lines().skip(1) {
            let _ = writeln!(out, "{},{line}", csv_field(label));
        }
    }
    out
}

pub fn verify(spec: &Spec, check: Check, format: Option<Format>) -> Result<String, CliError> {
    let v = &spec.verify;
    match check {
        Check::Slope => {
            spec.require(&[Kind::Plane, Kind::Sphere], "verify --check slope")?;
            let format = choose(spec, format, &[Format::Csv, Format::Json], "verify")?;
            if v.pairs.is_empty() {
                return Err(spec.err("/verify/pairs", "no pairs to measure"));
            }
            let config = spec.family()?;
            let mut fits = Vec::new();
            for (a, b, pointer) in &v.pairs {
                let ga = &spec.germ_named(a).expect("validated").germ;
                let gb = &spec.germ_named(b).expect("validated").germ;
                let fit = scaling_slope(&config, ga, gb, &v.t_samples, &v.quadrature)
                    .map_err(|e| numeric(spec, pointer, e))?;
                fits.push((format!("{a}-{b}"), fit));
            }
            Ok(match format {
                Format::Csv => fits_csv(&fits),
                _ => pretty(&json!({ "check": "slope", "fits": fits.iter().map(|(l, f)| fit_json(l, f)).collect::<Vec<_>>() })),
            })
        }
        Check::Probe => {
            spec.require(&[Kind::Plane, Kind::Sphere], "verify --check probe")?;
            choose(spec, format, &[Format::Json], "verify")?;
            let config = spec.family()?;
            let cone = ConeConfig::from_family(&config, Complex64::new(v.t, 0.0));
            let mut rows = Vec::new();
            for (i, p) in cone.positions.iter().enumerate() {
                let clearance = cone
                    .positions
                    .iter()
                    .map(|q| (q - p).norm())
                    .filter(|d| *d > 0.0)
                    .fold(f64::INFINITY, f64::min);
                if !clearance.is_finite() {
                    return Err(spec.numeric_err("/verify/t", "a single cone point leaves no length scale to probe"));
                }
                let r0 = 0.2 * clearance;
                let est = cone_angle_probe(&cone, *p, &[r0, r0 / 2.0, r0 / 4.0])
                    .map_err(|e| numeric(spec, &spec.points[i].pointer, e))?;
                rows.push(json!({ "point": spec.points[i].name, "beta": cone.betas[i], "estimate": est }));
            }
            let mut report = json!({ "check": "probe", "t": v.t, "points": rows });
            if spec.kind == Kind::Plane && cone.gamma_infinity() > 0.0 {
                let reach = cone.positions.iter().map(|p| p.norm()).fold(0.0, f64::max);
                let r0 = 4.0 * reach + 1.0;
                let est = cone_angle_at_infinity(&cone, &[r0, 2.0 * r0, 4.0 * r0, 8.0 * r0])
                    .map_err(|e| numeric(spec, "/verify", e))?;
                report["infinity"] = json!({ "gamma": cone.gamma_infinity(), "estimate": est });
            }
            Ok(pretty(&report))
        }
        Check::Area => {
            spec.require(&[Kind::Sphere], "verify --check area")?;
            choose(spec, format, &[Format::Json], "verify")?;
            let config = spec.family()?;
            let cone = ConeConfig::from_family(&config, Complex64::new(v.t, 0.0));
            let area = sphere_area(&cone, &v.quadrature).map_err(|e| numeric(spec, "/verify", e))?;
            Ok(pretty(&json!({ "check": "area", "t": v.t, "area": area })))
        }
        Check::Curvature => {
            spec.require(&[Kind::GhMonopole], "verify --check curvature")?;
            let format = choose(spec, format, &[Format::Csv, Format::Json], "verify")?;
            let targets: Vec<(String, Germ, String)> = if spec.sections.is_empty() {
                vec![gh_section(spec, None)?]
            } else {
                spec.sections.iter().map(|s| (s.name.clone(), s.germ.clone(), s.pointer.clone())).collect()
            };
            let mut fits = Vec::new();
            for (name, section, pointer) in targets {
                let family = MonopoleFamily { z_paths: spec.germs(), section };
                let (_, fit) = curvature_blowup(&family, &v.t_samples).map_err(|e| gh_err(spec, &pointer, e))?;
                fits.push((name, fit));
            }
            Ok(match format {
                Format::Csv => fits_csv(&fits),
                _ => pretty(&json!({ "check": "curvature", "fits": fits.iter().map(|(l, f)| fit_json(l, f)).collect::<Vec<_>>() })),
            })
        }
    }
}
