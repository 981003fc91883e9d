//! Floating-point checks of the exact predictions: lengths and areas of flat
//! conical metrics, cone-angle probes, a distance surrogate and power-law fits.
//!
//! Integrals of `prod |z - p_i|^(e_i)` with `e_i > -1` are split at every
//! cone point near the path, and each piece ending near a cone point is
//! integrated in the variable `u = r^(e+1)`, which absorbs the singular factor.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::flat::FamilyConfig;
use crate::series::Germ;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("quadrature did not converge within {max_depth} bisections")]
    MaxDepthExceeded { max_depth: u32 },
    #[error("probe radius {radius} reaches within twice its length of another cone point")]
    RadiiTooLarge { radius: f64 },
    #[error("radii must be positive and strictly monotone in the probing direction")]
    BadRadii,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample {index} is not positive and finite")]
    NonPositiveSample { index: usize },
    #[error("polyline vertices {index} and {next} coincide", next = index + 1)]
    DegenerateSegment { index: usize },
    #[error("invalid quadrature settings: {reason}")]
    InvalidSpec { reason: &'static str },
    #[error("{positions} positions but {angles} angles")]
    LengthMismatch { positions: usize, angles: usize },
    #[error("angle defects sum to {total}; a finite-area sphere needs exactly 2")]
    GaussBonnet { total: f64 },
    #[error("endpoints coincide at t = {t}")]
    CoincidentEndpoints { t: f64 },
}

/// Tolerances for adaptive quadrature.
///
/// `singularity_guard` is relative: a cone point closer to a segment than
/// `singularity_guard` times the segment length splits the segment there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub max_depth: u32,
    pub singularity_guard: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-8, max_depth: 40, singularity_guard: 0.5 }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        QuadratureSpec { rel_tol, ..Self::default() }
    }

    fn validate(&self) -> Result<(), NumericError> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(NumericError::InvalidSpec { reason: "rel_tol must lie in (0, 1e-2]" });
        }
        if self.max_depth == 0 {
            return Err(NumericError::InvalidSpec { reason: "max_depth must be positive" });
        }
        if !(self.singularity_guard >= 0.0 && self.singularity_guard.is_finite()) {
            return Err(NumericError::InvalidSpec { reason: "singularity_guard must be finite and nonnegative" });
        }
        Ok(())
    }
}

/// Cone points at fixed floating-point positions; `betas[i]` is the angle at
/// `positions[i]` as a fraction of a full turn.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeConfig {
    pub positions: Vec<Complex64>,
    pub betas: Vec<f64>,
}

impl ConeConfig {
    pub fn new(positions: Vec<Complex64>, betas: Vec<f64>) -> Result<Self, NumericError> {
        if positions.len() != betas.len() {
            return Err(NumericError::LengthMismatch { positions: positions.len(), angles: betas.len() });
        }
        Ok(ConeConfig { positions, betas })
    }

    /// The family frozen at parameter `t`.
    pub fn from_family(config: &FamilyConfig, t: Complex64) -> Self {
        ConeConfig {
            positions: config.points.iter().map(|p| p.evaluate(t)).collect(),
            betas: config.angles.betas().iter().map(|b| b.to_f64()).collect(),
        }
    }

    /// `1 - sum (1 - beta_i)`, the angle at infinity.
    pub fn gamma_infinity(&self) -> f64 {
        1.0 - self.betas.iter().map(|b| 1.0 - b).sum::<f64>()
    }

    /// Density of the line element, `prod |z - p_i|^(beta_i - 1)`.
    pub fn density(&self, z: Complex64) -> f64 {
        self.weights(1.0).value(z)
    }

    /// Factors `|z - p_i|^(scale (beta_i - 1))`.
    fn weights(&self, scale: f64) -> Weight {
        Weight::new(self.positions.iter().zip(&self.betas).map(|(p, b)| (*p, scale * (b - 1.0))).collect())
    }
}

/// `prod |z - p_i|^(e_i)`, points merged by position.
#[derive(Debug, Clone)]
struct Weight {
    factors: Vec<(Complex64, f64)>,
}

impl Weight {
    fn new(raw: Vec<(Complex64, f64)>) -> Self {
        let mut factors: Vec<(Complex64, f64)> = Vec::new();
        for (p, e) in raw {
            match factors.iter_mut().find(|(q, _)| *q == p) {
                Some((_, acc)) => *acc += e,
                None => factors.push((p, e)),
            }
        }
        factors.retain(|(_, e)| *e != 0.0);
        Weight { factors }
    }

    fn value(&self, z: Complex64) -> f64 {
        self.factors.iter().map(|(p, e)| (z - p).norm_sqr().powf(0.5 * e)).product()
    }

    /// `w(e + r dir)` with offsets formed before adding `r dir`, so that
    /// small `r` stays exact next to a factor sitting at `e`.
    fn value_along(&self, e: Complex64, dir: Complex64, r: f64) -> f64 {
        self.factors.iter().map(|(p, k)| ((e - p) + dir * r).norm_sqr().powf(0.5 * k)).product()
    }

    /// `integral_a^b w |dz|` along the straight segment.
    fn segment(&self, a: Complex64, b: Complex64, spec: &QuadratureSpec) -> Result<f64, NumericError> {
        // A canonical orientation makes the result exactly symmetric.
        let (a, b) = if (b.re, b.im) < (a.re, a.im) { (b, a) } else { (a, b) };
        let len = (b - a).norm();
        if len == 0.0 {
            return Ok(0.0);
        }
        let dir = (b - a) / len;
        let mut cuts = vec![(0.0, a), (len, b)];
        for (p, _) in &self.factors {
            let rel = (p - a) * dir.conj();
            if rel.re > 0.0 && rel.re < len && rel.im.abs() <= spec.singularity_guard * len {
                // Points on the segment up to rounding are cut at themselves.
                let at = if rel.im.abs() <= 1e-14 * len { *p } else { a + dir * rel.re };
                cuts.push((rel.re, at));
            }
        }
        cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
        // Cuts closer than rounding merge; the endpoints always survive.
        let mut merged: Vec<(f64, Complex64)> = Vec::with_capacity(cuts.len());
        for cut in cuts {
            match merged.last_mut() {
                Some(prev) if cut.0 - prev.0 <= 1e-13 * len => {
                    if cut.0 == len && prev.0 != 0.0 {
                        *prev = cut;
                    }
                }
                _ => merged.push(cut),
            }
        }
        let cuts = merged;
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let ((s0, e0), (s1, e1)) = (w[0], w[1]);
            if s1 <= s0 {
                continue;
            }
            let mid = 0.5 * (s0 + s1);
            total += self.half_piece(e0, dir, mid - s0, spec)?;
            total += self.half_piece(e1, -dir, s1 - mid, spec)?;
        }
        Ok(total)
    }

    /// `integral_0^h w(e + r dir) dr`, substituting `u = r^(k+1)` when a
    /// singular factor of exponent `k` sits within `h` of `e`.
    fn half_piece(&self, e: Complex64, dir: Complex64, h: f64, spec: &QuadratureSpec) -> Result<f64, NumericError> {
        let nearest = self
            .factors
            .iter()
            .filter(|(_, k)| *k < 0.0)
            .map(|(p, k)| ((p - e).norm(), *k))
            .filter(|(d, _)| *d <= h)
            .min_by(|x, y| x.0.total_cmp(&y.0));
        match nearest {
            Some((_, k)) => {
                let q = 1.0 / (k + 1.0);
                let top = h.powf(k + 1.0);
                integrate(
                    |u| {
                        let r = u.powf(q);
                        q * u.powf(q - 1.0) * self.value_along(e, dir, r)
                    },
                    0.0,
                    top,
                    spec,
                )
            }
            None => integrate(|r| self.value_along(e, dir, r), 0.0, h, spec),
        }
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for nodes 1, 3, 5 and the centre.
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * GK_NODES[i]) + f(c + h * GK_NODES[i]);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// `integral |f|` by the Kronrod rule, the scale of the rounding error.
fn kronrod_abs<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = GK_WEIGHTS[7] * f(c).abs();
    for i in 0..7 {
        sum += GK_WEIGHTS[i] * (f(c - h * GK_NODES[i]).abs() + f(c + h * GK_NODES[i]).abs());
    }
    (sum * h).abs()
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature, always bisecting the
/// piece with the largest error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64, NumericError> {
    spec.validate()?;
    if a == b {
        return Ok(0.0);
    }
    let (value, error) = gauss_kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error, depth: 0 });
    let (mut total, mut total_err) = (value, error);
    // Error estimates below this are rounding noise.
    let floor = 50.0 * f64::EPSILON * kronrod_abs(&f, a, b);
    let target = |total: f64| (spec.rel_tol * total.abs()).max(floor);
    while total_err > target(total) && total_err > f64::MIN_POSITIVE {
        let worst = heap.pop().expect("nonempty");
        if worst.depth >= spec.max_depth || heap.len() > 100_000 {
            return Err(NumericError::MaxDepthExceeded { max_depth: spec.max_depth });
        }
        let m = 0.5 * (worst.a + worst.b);
        let (lv, le) = gauss_kronrod(&f, worst.a, m);
        let (rv, re) = gauss_kronrod(&f, m, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Piece { a: worst.a, b: m, value: lv, error: le, depth: worst.depth + 1 });
        heap.push(Piece { a: m, b: worst.b, value: rv, error: re, depth: worst.depth + 1 });
        if total_err <= target(total) {
            // Re-sum to shed the drift of the running totals.
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    Ok(total)
}

/// Length of a polyline in the flat conical metric of `config`.
pub fn path_length(config: &ConeConfig, polyline: &[Complex64], spec: &QuadratureSpec) -> Result<f64, NumericError> {
    spec.validate()?;
    let weight = config.weights(1.0);
    let mut total = 0.0;
    for (index, w) in polyline.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(NumericError::DegenerateSegment { index });
        }
        total += weight.segment(w[0], w[1], spec)?;
    }
    Ok(total)
}

/// Metric circumference of the coordinate circle `|z - center| = r`,
/// by the trapezoid rule, which converges geometrically for a periodic
/// analytic integrand.
fn circumference(weight: &Weight, center: Complex64, r: f64, rel_tol: f64) -> f64 {
    let sample = |n: usize, odd_only: bool| -> f64 {
        let step = 2.0 * PI / n as f64;
        (0..n)
            .filter(|k| !odd_only || k % 2 == 1)
            .map(|k| weight.value(center + Complex64::from_polar(r, step * k as f64)))
            .sum::<f64>()
    };
    let mut n = 64;
    let mut sum = sample(n, false);
    let mut estimate = sum * r * 2.0 * PI / n as f64;
    while n < 1 << 20 {
        n *= 2;
        sum += sample(n, true);
        let next = sum * r * 2.0 * PI / n as f64;
        let converged = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}

const PROBE_DIRECTIONS: usize = 8;

/// Mean metric length of the radial segments from `|z - c| = r0` to `r1`.
fn mean_radial(weight: &Weight, center: Complex64, r0: f64, r1: f64, spec: &QuadratureSpec) -> Result<f64, NumericError> {
    let mut acc = 0.0;
    for k in 0..PROBE_DIRECTIONS {
        let dir = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / PROBE_DIRECTIONS as f64);
        acc += weight.segment(center + dir * r0, center + dir * r1, spec)?;
    }
    Ok(acc / PROBE_DIRECTIONS as f64)
}

/// Value at `x = 0` of the polynomial through `(x_k, y_k)`.
fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

/// Cone angle at `center` as a fraction of a full turn.
///
/// Each radius gives circumference over (2 pi times metric radius), the
/// radius averaged over eight directions; the ratios are extrapolated to
/// radius zero in `r^2` through the last three radii.
pub fn cone_angle_probe(config: &ConeConfig, center: Complex64, radii: &[f64]) -> Result<f64, NumericError> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(NumericError::BadRadii);
    }
    let clearance = config
        .positions
        .iter()
        .map(|p| (p - center).norm())
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if radii[0] >= 0.5 * clearance {
        return Err(NumericError::RadiiTooLarge { radius: radii[0] });
    }
    let spec = QuadratureSpec::with_tolerance(1e-11);
    let weight = config.weights(1.0);
    let used = &radii[radii.len().saturating_sub(3)..];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in used {
        let c = circumference(&weight, center, r, 1e-13);
        let radial = mean_radial(&weight, center, 0.0, r, &spec)?;
        xs.push(r * r);
        ys.push(c / (2.0 * PI * radial));
    }
    Ok(extrapolate_to_zero(&xs, &ys))
}

/// Cone angle at infinity as a fraction of a full turn, from circles about
/// the origin with increasing radii, each beyond twice the farthest cone point.
///
/// Consecutive radii give the growth of circumference per unit of metric
/// radial distance; these are extrapolated in `1 / r^2` through the last three.
pub fn cone_angle_at_infinity(config: &ConeConfig, radii: &[f64]) -> Result<f64, NumericError> {
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NumericError::BadRadii);
    }
    let reach = config.positions.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if radii[0] <= 2.0 * reach {
        return Err(NumericError::RadiiTooLarge { radius: radii[0] });
    }
    let spec = QuadratureSpec::with_tolerance(1e-11);
    let weight = config.weights(1.0);
    let origin = Complex64::new(0.0, 0.0);
    let circles: Vec<f64> = radii.iter().map(|&r| circumference(&weight, origin, r, 1e-13)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..radii.len() - 1 {
        let radial = mean_radial(&weight, origin, radii[k], radii[k + 1], &spec)?;
        xs.push(1.0 / (radii[k] * radii[k + 1]));
        ys.push((circles[k + 1] - circles[k]) / (2.0 * PI * radial));
    }
    let start = xs.len().saturating_sub(3);
    Ok(extrapolate_to_zero(&xs[start..], &ys[start..]))
}

/// Upper bound for the distance between `a` and `b`: the shortest polyline
/// found by coordinate descent on four interior vertices, starting from the
/// straight segment.
pub fn distance_surrogate(config: &ConeConfig, a: Complex64, b: Complex64, spec: &QuadratureSpec) -> Result<f64, NumericError> {
    spec.validate()?;
    let span = (b - a).norm();
    if span == 0.0 {
        return Ok(0.0);
    }
    let weight = config.weights(1.0);
    const INTERIOR: usize = 4;
    let mut vertices: Vec<Complex64> =
        (0..=INTERIOR + 1).map(|k| a + (b - a) * (k as f64 / (INTERIOR + 1) as f64)).collect();
    let mut pieces = Vec::with_capacity(INTERIOR + 1);
    for w in vertices.windows(2) {
        pieces.push(weight.segment(w[0], w[1], spec)?);
    }
    let moves = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
    let mut step = 0.25 * span / (INTERIOR + 1) as f64;
    for _ in 0..200 {
        if step < 1e-6 * span {
            break;
        }
        let mut improved = false;
        for v in 1..=INTERIOR {
            for m in moves {
                let trial = vertices[v] + m * step;
                if trial == vertices[v - 1] || trial == vertices[v + 1] {
                    continue;
                }
                let left = weight.segment(vertices[v - 1], trial, spec)?;
                let right = weight.segment(trial, vertices[v + 1], spec)?;
                if left + right < pieces[v - 1] + pieces[v] {
                    vertices[v] = trial;
                    pieces[v - 1] = left;
                    pieces[v] = right;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(pieces.iter().sum())
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    /// `(log |t|, log value)` pairs.
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl SlopeFit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value,log_t,log_value\n");
        for (lx, ly) in &self.samples {
            out.push_str(&format!("{:e},{:e},{},{}\n", lx.exp(), ly.exp(), lx, ly));
        }
        out
    }
}

pub const MIN_FIT_SAMPLES: usize = 4;

/// Fits `y = C x^slope`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<SlopeFit, NumericError> {
    let n = xs.len().min(ys.len());
    if n < MIN_FIT_SAMPLES {
        return Err(NumericError::TooFewSamples { needed: MIN_FIT_SAMPLES, got: n });
    }
    let mut samples = Vec::with_capacity(n);
    for index in 0..n {
        let (x, y) = (xs[index].abs(), ys[index]);
        if !(x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite()) {
            return Err(NumericError::NonPositiveSample { index });
        }
        samples.push((x.ln(), y.ln()));
    }
    let nf = n as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / nf;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / nf;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let syy: f64 = samples.iter().map(|s| (s.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit { samples, slope, intercept, r2 })
}

/// Power law of the distance surrogate between the sections `a` and `b` as
/// `t -> 0` along the positive reals.
pub fn scaling_slope(
    family: &FamilyConfig,
    a: &Germ,
    b: &Germ,
    t_samples: &[f64],
    spec: &QuadratureSpec,
) -> Result<SlopeFit, NumericError> {
    let mut values = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let tc = Complex64::new(t, 0.0);
        let (za, zb) = (a.evaluate(tc), b.evaluate(tc));
        if za == zb {
            return Err(NumericError::CoincidentEndpoints { t });
        }
        let frozen = ConeConfig::from_family(family, tc);
        values.push(distance_surrogate(&frozen, za, zb, spec)?);
    }
    fit_power_law(t_samples, &values)
}

/// Total area of `prod |z - p_i|^(2 beta_i - 2) |dz|^2` over the plane.
///
/// The plane is split by the partition of unity
/// `phi_i = |z - p_i|^(-m) / sum_j |z - p_j|^(-m)` and each share is integrated
/// in polar coordinates about its own cone point, where `u = r^(2 beta_i)`
/// makes the radial integrand regular. Past radius `R` the substitution
/// `r = R/s` maps the tail onto `[0, 1]`.
pub fn sphere_area(config: &ConeConfig, spec: &QuadratureSpec) -> Result<f64, NumericError> {
    spec.validate()?;
    let total_defect: f64 = config.betas.iter().map(|b| 1.0 - b).sum();
    if (total_defect - 2.0).abs() > 1e-9 {
        return Err(NumericError::GaussBonnet { total: total_defect });
    }
    let weight = config.weights(2.0);
    let inner = QuadratureSpec { rel_tol: spec.rel_tol * 0.1, ..*spec };
    let mut total = 0.0;
    for (i, &(center, e)) in weight.factors.iter().enumerate() {
        if e >= 0.0 {
            continue;
        }
        let reach = weight.factors.iter().map(|(p, _)| (p - center).norm()).fold(0.0, f64::max);
        let big = 2.0 * reach + 1.0;
        let two_beta = e + 2.0;
        let share = |z: Complex64| partition_share(&weight, i, z);
        let ray = |theta: f64| -> Result<f64, NumericError> {
            let dir = Complex64::from_polar(1.0, theta);
            let q = 1.0 / two_beta;
            // r^(2 beta - 1) dr = du / (2 beta)
            let near = integrate(|u| q * share(center + dir * u.powf(q)), 0.0, big.powf(two_beta), &inner)?;
            let tail = integrate(
                |s| {
                    if s == 0.0 {
                        return 0.0;
                    }
                    let r = big / s;
                    share(center + dir * r) * r.powf(two_beta - 1.0) * big / (s * s)
                },
                0.0,
                1.0,
                &inner,
            )?;
            Ok(near + tail)
        };
        let failure = std::cell::Cell::new(None);
        let value = integrate(
            |theta| match ray(theta) {
                Ok(v) => v,
                Err(err) => {
                    failure.set(Some(err));
                    0.0
                }
            },
            0.0,
            2.0 * PI,
            spec,
        )?;
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        total += value;
    }
    Ok(total)
}

/// Exponent of the partition of unity; shares vanish to order `m + 2 beta - 2`
/// at the other cone points.
const PARTITION_POWER: i32 = 4;

/// `phi_i(z) w(z) / |z - p_i|^(e_i)`: the share of cone point `i` with its own
/// singular factor removed.
fn partition_share(weight: &Weight, i: usize, z: Complex64) -> f64 {
    let (center, _) = weight.factors[i];
    let di = (z - center).norm();
    let mut denom = 0.0;
    let mut rest = 1.0;
    for (j, &(p, e)) in weight.factors.iter().enumerate() {
        let dj = (z - p).norm();
        if j == i {
            denom += 1.0;
            continue;
        }
        if e < 0.0 {
            if dj == 0.0 {
                return 0.0;
            }
            denom += (di / dj).powi(PARTITION_POWER);
        }
        rest *= dj.powf(e);
    }
    rest / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn smooth_integrals() {
        let spec = QuadratureSpec::default();
        let v = integrate(|x| x.sin(), 0.0, PI, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, &spec).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn lengths() {
        let spec = QuadratureSpec::default();
        let empty = ConeConfig::new(vec![], vec![]).unwrap();
        let l = path_length(&empty, &[c(0.0, 0.0), c(3.0, 4.0)], &spec).unwrap();
        assert!((l - 5.0).abs() < 1e-12);
        let cone = ConeConfig::new(vec![c(0.0, 0.0)], vec![0.3]).unwrap();
        let l = path_length(&cone, &[c(0.0, 0.0), c(1.0, 0.0)], &spec).unwrap();
        assert!((l / (1.0 / 0.3) - 1.0).abs() < 1e-8);
        let through = path_length(&cone, &[c(-1.0, 0.0), c(1.0, 0.0)], &spec).unwrap();
        assert!((through / (2.0 / 0.3) - 1.0).abs() < 1e-8);
        assert!(path_length(&cone, &[c(1.0, 0.0), c(1.0, 0.0)], &spec).is_err());
    }

    #[test]
    fn pure_cone_probe_is_exact() {
        let cone = ConeConfig::new(vec![c(0.0, 0.0)], vec![2.0 / 3.0]).unwrap();
        let beta = cone_angle_probe(&cone, c(0.0, 0.0), &[0.4, 0.2, 0.1]).unwrap();
        assert!((beta - 2.0 / 3.0).abs() < 1e-6, "{beta}");
        let gamma = cone_angle_at_infinity(&cone, &[4.0, 8.0, 16.0]).unwrap();
        assert!((gamma - 2.0 / 3.0).abs() < 1e-6, "{gamma}");
        assert!(matches!(
            cone_angle_probe(&ConeConfig::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![0.5, 0.5]).unwrap(), c(0.0, 0.0), &[0.6]),
            Err(NumericError::RadiiTooLarge { .. })
        ));
    }

    #[test]
    fn power_law_fit() {
        let xs = [1.0, 0.5, 0.25, 0.125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.7)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.slope - 0.7).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(fit.r2 > 0.999_999);
        assert!(fit.to_csv().starts_with("t,value,log_t,log_value\n"));
        assert!(fit_power_law(&xs[..3], &ys[..3]).is_err());
    }

    #[test]
    fn area_requires_total_defect_two() {
        let bad = ConeConfig::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)], vec![0.5, 0.75, 0.75]).unwrap();
        assert!(matches!(sphere_area(&bad, &QuadratureSpec::default()), Err(NumericError::GaussBonnet { .. })));
    }
}
