//! Gibbons-Hawking spaces from monopole configurations, and the rescaled
//! limits of planar monopole families seen from a section.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::numeric::{fit_power_law, NumericError, SlopeFit};
use crate::series::{GaussRat, Germ, Order, PolyFamily, Rat};
use crate::tree::{TreeError, VanishingTree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GhError {
    #[error("point coincides with monopole {index}")]
    SingularPoint { index: usize },
    #[error("distance {distance:e} to the nearest monopole forces steps below working precision")]
    StepUnderflow { distance: f64 },
    #[error("monopole {index} is off the plane x3 = 0")]
    NonPlanar { index: usize },
    #[error("monopoles {i} and {j} share a position")]
    Coincident { i: usize, j: usize },
    #[error("monopole {index} has multiplicity 0")]
    ZeroMultiplicity { index: usize },
    #[error("empty monopole configuration")]
    Empty,
    #[error("rescaling exponent must be positive, got {alpha}")]
    NonPositiveAlpha { alpha: Rat },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Monopole {
    pub position: [Rat; 3],
    pub multiplicity: u32,
}

impl Monopole {
    pub fn planar(z: &GaussRat, multiplicity: u32) -> Self {
        Monopole { position: [z.re.clone(), z.im.clone(), Rat::zero()], multiplicity }
    }

    fn to_f64(&self) -> [f64; 3] {
        [self.position[0].to_f64(), self.position[1].to_f64(), self.position[2].to_f64()]
    }
}

/// Distinct points of R^3 with positive multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct MonopoleConfig {
    points: Vec<Monopole>,
}

impl MonopoleConfig {
    pub fn new(points: Vec<Monopole>) -> Result<Self, GhError> {
        if points.is_empty() {
            return Err(GhError::Empty);
        }
        for (i, p) in points.iter().enumerate() {
            if p.multiplicity == 0 {
                return Err(GhError::ZeroMultiplicity { index: i });
            }
            if let Some(j) = points[..i].iter().position(|q| q.position == p.position) {
                return Err(GhError::Coincident { i: j, j: i });
            }
        }
        Ok(MonopoleConfig { points })
    }

    /// Planar configuration from complex positions.
    pub fn planar(points: &[(GaussRat, u32)]) -> Result<Self, GhError> {
        Self::new(points.iter().map(|(z, m)| Monopole::planar(z, *m)).collect())
    }

    pub fn points(&self) -> &[Monopole] {
        &self.points
    }

    /// Order of the group at infinity, the sum of multiplicities.
    pub fn total_multiplicity(&self) -> u32 {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Multiplies every position by `lambda`.
    pub fn scaled(&self, lambda: &Rat) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| Monopole { position: p.position.clone().map(|c| &c * lambda), multiplicity: p.multiplicity })
            .collect();
        MonopoleConfig { points }
    }

    fn nearest(&self, x: [f64; 3]) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, dist(x, p.to_f64())))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    fn potential_unchecked(&self, x: [f64; 3]) -> f64 {
        0.5 * self.points.iter().map(|p| f64::from(p.multiplicity) / dist(x, p.to_f64())).sum::<f64>()
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Harmonic potential `f(x) = 1/2 * sum m_i / |x - x_i|`.
pub fn potential(config: &MonopoleConfig, x: [f64; 3]) -> Result<f64, GhError> {
    let (index, d) = config.nearest(x);
    if d == 0.0 {
        return Err(GhError::SingularPoint { index });
    }
    Ok(config.potential_unchecked(x))
}

/// Fourth-order five-point Laplacian of `g` at `x` with step `h`.
fn laplacian<F: Fn([f64; 3]) -> f64>(g: &F, x: [f64; 3], h: f64) -> f64 {
    let centre = g(x);
    let mut acc = 0.0;
    for axis in 0..3 {
        let at = |k: f64| {
            let mut y = x;
            y[axis] += k * h;
            g(y)
        };
        acc += -at(2.0) + 16.0 * at(1.0) - 30.0 * centre + 16.0 * at(-1.0) - at(-2.0);
    }
    acc / (12.0 * h * h)
}

fn bilaplacian<F: Fn([f64; 3]) -> f64>(g: &F, x: [f64; 3], h: f64) -> f64 {
    laplacian(&|y| laplacian(g, y, h), x, h)
}

/// Curvature norm `|Riem|^2 = 1/4 * Laplacian^2 (1/f)` at `x`.
///
/// Nested fourth-order stencils at steps `h, h/2, h/4` with `h` a twelfth of
/// the distance to the nearest monopole, combined by two Richardson steps
/// that remove the `h^4` and `h^6` error terms.
pub fn curvature_norm(config: &MonopoleConfig, x: [f64; 3]) -> Result<f64, GhError> {
    let (index, d) = config.nearest(x);
    if d == 0.0 {
        return Err(GhError::SingularPoint { index });
    }
    let h = d / 12.0;
    let scale = x.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    if h / 4.0 < 1e-5 * scale {
        return Err(GhError::StepUnderflow { distance: d });
    }
    let g = |y: [f64; 3]| 1.0 / config.potential_unchecked(y);
    let l1 = bilaplacian(&g, x, h);
    let l2 = bilaplacian(&g, x, h / 2.0);
    let l3 = bilaplacian(&g, x, h / 4.0);
    let r1 = (16.0 * l2 - l1) / 15.0;
    let r2 = (16.0 * l3 - l2) / 15.0;
    Ok(0.25 * (64.0 * r2 - r1) / 63.0)
}

/// `uv - prod (z - z_i)^(m_i)` in the variables `u, v, z`.
pub fn defining_equation(config: &MonopoleConfig) -> Result<PolyFamily, GhError> {
    let vars: Vec<String> = ["u", "v", "z"].iter().map(|s| s.to_string()).collect();
    let mut product = PolyFamily::one(&vars);
    for (index, p) in config.points.iter().enumerate() {
        if !p.position[2].is_zero() {
            return Err(GhError::NonPlanar { index });
        }
        let zi = GaussRat::new(p.position[0].clone(), p.position[1].clone());
        let factor = PolyFamily::variable(&vars, 2)
            .try_sub(&PolyFamily::constant(&vars, zi))
            .expect("shared variables");
        product = product.try_mul(&factor.pow(p.multiplicity)).expect("shared variables");
    }
    let uv = PolyFamily::variable(&vars, 0).try_mul(&PolyFamily::variable(&vars, 1)).expect("shared variables");
    Ok(uv.try_sub(&product).expect("shared variables"))
}

/// `uv - prod (z - z_i(t))` for a family of planar monopoles.
pub fn family_equation(paths: &[Germ]) -> PolyFamily {
    let vars: Vec<String> = ["u", "v", "z"].iter().map(|s| s.to_string()).collect();
    let mut product = PolyFamily::one(&vars);
    for p in paths {
        let factor = PolyFamily::variable(&vars, 2)
            .try_sub(&PolyFamily::from_germ(&vars, p))
            .expect("shared variables");
        product = product.try_mul(&factor).expect("shared variables");
    }
    let uv = PolyFamily::variable(&vars, 0).try_mul(&PolyFamily::variable(&vars, 1)).expect("shared variables");
    uv.try_sub(&product).expect("shared variables")
}

/// Planar monopoles moving along `z_paths`, observed from `section`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonopoleFamily {
    pub z_paths: Vec<Germ>,
    pub section: Germ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Basepoint {
    /// The basepoint sits on this monopole.
    Monopole(usize),
    /// The basepoint is a regular point of the space.
    Regular,
}

/// A Gibbons-Hawking orbifold with a marked point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AleOrbifoldModel {
    pub config: MonopoleConfig,
    pub basepoint: Basepoint,
    /// `k` for an `A_k` point at the basepoint; 0 means smooth.
    pub basepoint_type: u32,
    /// The basepoint is on a monopole of multiplicity 1: an `A_0` point,
    /// reported as smooth.
    pub a0_flag: bool,
}

impl AleOrbifoldModel {
    /// Group order at infinity.
    pub fn cone_order(&self) -> u32 {
        self.config.total_multiplicity()
    }

    /// A single monopole position: the limit is a flat cone, pointed possibly
    /// away from its vertex.
    pub fn is_cone(&self) -> bool {
        self.config.points().len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AkLimit {
    Ale(AleOrbifoldModel),
    /// `C^2 / Gamma_order` pointed at its vertex; order 1 is flat `C^2`.
    Cone { order: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AkBreakpoint {
    pub d: u32,
    /// Distance exponent `d / 2`.
    pub alpha: Rat,
    pub model: AleOrbifoldModel,
    /// Group order of the cone for exponents just below `alpha`.
    pub cone_below: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AkLimits {
    /// `(path index, order of vanishing of z_j - s)` for paths through `s(0)`.
    pub orders: Vec<(usize, Order)>,
    pub breakpoints: Vec<AkBreakpoint>,
    /// Group order of the cone beyond the last breakpoint.
    pub terminal_order: u32,
}

impl AkLimits {
    pub fn classify(&self, alpha: &Rat) -> Result<AkLimit, GhError> {
        if !alpha.is_positive() {
            return Err(GhError::NonPositiveAlpha { alpha: alpha.clone() });
        }
        for b in &self.breakpoints {
            if *alpha < b.alpha {
                return Ok(AkLimit::Cone { order: b.cone_below });
            }
            if *alpha == b.alpha {
                return Ok(AkLimit::Ale(b.model.clone()));
            }
        }
        Ok(AkLimit::Cone { order: self.terminal_order })
    }
}

/// Pointed limits of `|t|^(-2 alpha) g_t` along the section, one per distinct
/// vanishing order of the recentred paths `z_j - s`.
///
/// At order `d` the monopoles are the `t^d` coefficients of the paths of order
/// exactly `d`, plus the origin carrying every path of higher order. Paths not
/// passing through `s(0)` escape to infinity and are ignored.
pub fn ak_rescaled_limits(family: &MonopoleFamily) -> Result<AkLimits, GhError> {
    VanishingTree::build(&family.z_paths)?;
    let s = &family.section;
    let mut orders = Vec::new();
    for (j, p) in family.z_paths.iter().enumerate() {
        let o = p.agree_order(s);
        if o.is_infinite() && s.trunc() < p.trunc() {
            return Err(TreeError::AmbiguousSection { index: j }.into());
        }
        if o > Order::Finite(0) {
            orders.push((j, o));
        }
    }
    let levels: BTreeSet<u32> = orders.iter().filter_map(|(_, o)| o.finite()).collect();
    let count_above = |d: u32| orders.iter().filter(|(_, o)| *o > Order::Finite(d)).count() as u32;
    let mut breakpoints = Vec::new();
    let mut below = orders.len() as u32;
    for &d in &levels {
        let mut monopoles: Vec<(GaussRat, u32)> = Vec::new();
        for (j, o) in &orders {
            if *o == Order::Finite(d) {
                let c = &family.z_paths[*j].coeff(d) - &s.coeff(d);
                match monopoles.iter_mut().find(|(q, _)| *q == c) {
                    Some((_, m)) => *m += 1,
                    None => monopoles.push((c, 1)),
                }
            }
        }
        let at_origin = count_above(d);
        let (basepoint, basepoint_type) = if at_origin > 0 {
            monopoles.push((GaussRat::zero(), at_origin));
            (Basepoint::Monopole(monopoles.len() - 1), at_origin - 1)
        } else {
            (Basepoint::Regular, 0)
        };
        let model = AleOrbifoldModel {
            config: MonopoleConfig::planar(&monopoles)?,
            basepoint,
            basepoint_type,
            a0_flag: at_origin == 1,
        };
        breakpoints.push(AkBreakpoint { d, alpha: Rat::new(i64::from(d), 2), model, cone_below: below });
        below = at_origin;
    }
    Ok(AkLimits { orders, breakpoints, terminal_order: below.max(1) })
}

/// Curvature norm at the section point for each `t`, with the fitted
/// power-law exponent of its growth as `t -> 0`.
///
/// `t` values are real and positive; the section point is `(s(t), 0)`.
pub fn curvature_blowup(family: &MonopoleFamily, ts: &[f64]) -> Result<(Vec<(f64, f64)>, SlopeFit), GhError> {
    let mut samples = Vec::with_capacity(ts.len());
    for &t in ts {
        let tc = num_complex::Complex64::new(t, 0.0);
        let monopoles: Vec<[f64; 3]> = family
            .z_paths
            .iter()
            .map(|p| {
                let z = p.evaluate(tc);
                [z.re, z.im, 0.0]
            })
            .collect();
        let sz = family.section.evaluate(tc);
        let cfg = FloatConfig(monopoles);
        samples.push((t, cfg.curvature([sz.re, sz.im, 0.0])?));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let fit = fit_power_law(&xs, &ys)?;
    Ok((samples, fit))
}

/// Unit monopoles at floating-point positions, for sampling along families.
struct FloatConfig(Vec<[f64; 3]>);

impl FloatConfig {
    fn curvature(&self, x: [f64; 3]) -> Result<f64, GhError> {
        let (index, d) = self
            .0
            .iter()
            .enumerate()
            .map(|(i, p)| (i, dist(x, *p)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if d == 0.0 {
            return Err(GhError::SingularPoint { index });
        }
        let h = d / 12.0;
        let scale = x.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        if h / 4.0 < 1e-5 * scale {
            return Err(GhError::StepUnderflow { distance: d });
        }
        let g = |y: [f64; 3]| 1.0 / (0.5 * self.0.iter().map(|p| 1.0 / dist(y, *p)).sum::<f64>());
        let l1 = bilaplacian(&g, x, h);
        let l2 = bilaplacian(&g, x, h / 2.0);
        let l3 = bilaplacian(&g, x, h / 4.0);
        Ok(0.25 * (64.0 * (16.0 * l3 - l2) / 15.0 - (16.0 * l2 - l1) / 15.0) / 63.0)
    }
}
