//! Random instance generators and independent oracles shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use bubblekit::flat::{Ambient, AngleVector, FamilyConfig};
use bubblekit::moduli::{non_collapse_check, Component, NodalCurve};
use bubblekit::numeric::ConeConfig;
use bubblekit::series::{GaussRat, Germ, Rat};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed from `BUBBLEKIT_SEED`, else `default`.
pub fn env_seed(default: u64) -> u64 {
    std::env::var("BUBBLEKIT_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(default)
}

pub fn r(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

pub fn germ(text: &str) -> Germ {
    Germ::parse(text).unwrap()
}

pub fn germs(texts: &[&str]) -> Vec<Germ> {
    texts.iter().map(|t| germ(t)).collect()
}

// ---------------------------------------------------------------------------
// Germ generators

/// `c0 + sum_{k=1}^{top} c_k t^k + O(t^trunc)` with small Gaussian integer coefficients.
pub fn random_germ<R: Rng>(rng: &mut R, c0: GaussRat, top: u32, trunc: u32) -> Germ {
    let mut coeffs = vec![(0, c0)];
    for k in 1..=top {
        if rng.gen_bool(0.6) {
            let re = rng.gen_range(-2..=2);
            let im = if rng.gen_bool(0.2) { rng.gen_range(-1..=1) } else { 0 };
            coeffs.push((k, GaussRat::new(Rat::integer(re), Rat::integer(im))));
        }
    }
    Germ::truncated(coeffs, trunc)
}

/// `n` pairwise distinct germs with the given constant term.
pub fn distinct_germs<R: Rng>(rng: &mut R, n: usize, c0: &GaussRat, top: u32, trunc: u32) -> Vec<Germ> {
    let mut out: Vec<Germ> = Vec::new();
    while out.len() < n {
        let g = random_germ(rng, c0.clone(), top, trunc);
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// Angle defects `1 - beta` in (0, 1) summing to `total` (or below it when
/// `total` is `None`), built from random integers.
pub fn random_defects<R: Rng>(rng: &mut R, n: usize, total: Option<&Rat>) -> Vec<Rat> {
    loop {
        let parts: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=24)).collect();
        let sum: i64 = parts.iter().sum();
        let defects: Vec<Rat> = match total {
            Some(t) => parts.iter().map(|&p| &Rat::new(p, sum) * t).collect(),
            None => {
                let extra = rng.gen_range(1..=sum);
                parts.iter().map(|&p| Rat::new(p, sum + extra)).collect()
            }
        };
        if defects.iter().all(|d| d.is_positive() && *d < 1) {
            return defects;
        }
    }
}

pub fn betas_from_defects(defects: &[Rat]) -> Vec<Rat> {
    defects.iter().map(|d| Rat::one() - d).collect()
}

/// Plane family with one collision cluster at 0 and up to two bystanders.
pub struct PlaneInstance {
    pub config: FamilyConfig,
    pub section: Germ,
}

pub fn random_plane_instance<R: Rng>(rng: &mut R) -> PlaneInstance {
    let n = rng.gen_range(2..=6);
    let mut points = distinct_germs(rng, n, &GaussRat::zero(), 4, 6);
    for k in 0..rng.gen_range(0..=2) {
        points.push(random_germ(rng, GaussRat::integer(3 + 2 * k), 3, 6));
    }
    let betas = betas_from_defects(&random_defects(rng, points.len(), None));
    let config = FamilyConfig::new(points, AngleVector::new(betas).unwrap(), Ambient::Plane).unwrap();
    let section = random_germ(rng, GaussRat::zero(), 5, 6);
    PlaneInstance { config, section }
}

/// Sphere family whose clusters at `t = 0` each carry defect below 1 and whose
/// defects total 2, with no sub-sum equal to 1.
pub fn random_sphere_family<R: Rng>(rng: &mut R) -> FamilyConfig {
    loop {
        let clusters = rng.gen_range(3..=5);
        let mut points = Vec::new();
        let mut sizes = Vec::new();
        for c in 0..clusters {
            let size = rng.gen_range(1..=4);
            points.extend(distinct_germs(rng, size, &GaussRat::integer(c as i64), 3, 5));
            sizes.push(size);
        }
        let defects = random_defects(rng, points.len(), Some(&Rat::integer(2)));
        let mut start = 0;
        let mut ok = true;
        for s in sizes {
            let sum: Rat = defects[start..start + s].iter().sum();
            ok &= sum < 1;
            start += s;
        }
        let angles = AngleVector::new(betas_from_defects(&defects)).unwrap();
        if ok && non_collapse_check(&angles) {
            return FamilyConfig::new(points, angles, Ambient::Sphere).unwrap();
        }
    }
}

/// `n` cone points at least 1/2 apart in the square `[-2, 2]^2`, total
/// defect below 0.9.
pub fn random_cone_config<R: Rng>(g: &mut R, n: usize) -> ConeConfig {
    let mut positions: Vec<Complex64> = Vec::new();
    while positions.len() < n {
        let p = Complex64::new(g.gen_range(-2.0..2.0), g.gen_range(-2.0..2.0));
        if positions.iter().all(|q| (p - q).norm() > 0.5) {
            positions.push(p);
        }
    }
    let betas = (0..n).map(|_| 1.0 - g.gen_range(0.02..0.9 / n as f64)).collect();
    ConeConfig::new(positions, betas).unwrap()
}

// ---------------------------------------------------------------------------
// Tree oracle

/// First exponent below both truncations where the coefficients differ.
pub fn oracle_agree(a: &Germ, b: &Germ) -> Option<u32> {
    (0..a.trunc().min(b.trunc())).find(|&k| a.coeff(k) != b.coeff(k))
}

/// Every node member set of the vanishing tree, each with its split order,
/// found by enumerating the classes `{j : agree(i, j) > k}`.
pub fn oracle_tree(germs: &[Germ], members: &[usize]) -> BTreeMap<Vec<usize>, Option<u32>> {
    let max_k = members
        .iter()
        .flat_map(|&i| members.iter().map(move |&j| (i, j)))
        .filter(|(i, j)| i != j)
        .filter_map(|(i, j)| oracle_agree(&germs[i], &germs[j]))
        .max()
        .unwrap_or(0);
    let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut all = members.to_vec();
    all.sort_unstable();
    sets.insert(all);
    for k in 0..=max_k {
        for &i in members {
            let mut class: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&j| j == i || oracle_agree(&germs[i], &germs[j]).is_some_and(|a| a > k))
                .collect();
            class.sort_unstable();
            sets.insert(class);
        }
    }
    sets.into_iter()
        .map(|s| {
            let split = s
                .iter()
                .flat_map(|&i| s.iter().map(move |&j| (i, j)))
                .filter(|(i, j)| i < j)
                .filter_map(|(i, j)| oracle_agree(&germs[i], &germs[j]))
                .min();
            (s, split)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Exponent oracle

/// Breakpoint orders and exponents from the vanishing orders of `p_j - s`
/// over the collision cluster, applying the exponent formula directly.
pub fn oracle_alphas(config: &FamilyConfig, s: &Germ) -> Vec<(u32, Rat)> {
    let s0 = s.coeff(0);
    let cluster: Vec<usize> = (0..config.len()).filter(|&j| config.points[j].coeff(0) == s0).collect();
    let defect = |j: usize| Rat::one() - &config.angles.betas()[j];
    let gamma = Rat::one() - cluster.iter().map(|&j| defect(j)).sum::<Rat>();
    let orders: Vec<(usize, u32)> =
        cluster.iter().filter_map(|&j| oracle_agree(&config.points[j], s).map(|d| (j, d))).collect();
    let levels: BTreeSet<u32> = orders.iter().map(|(_, d)| *d).collect();
    levels
        .into_iter()
        .map(|di| {
            let mut alpha = &gamma * &Rat::from(di);
            for (j, d) in &orders {
                if *d < di {
                    alpha += &(defect(*j) * Rat::from(di - d));
                }
            }
            (di, alpha)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Moduli generators and oracles

pub struct StableInstance {
    pub curve: NodalCurve,
    pub angles: AngleVector,
}

/// Random stable tree of lines with marks and GB-compatible, non-collapsing angles.
pub fn random_stable_curve<R: Rng>(rng: &mut R) -> StableInstance {
    let n_comp = rng.gen_range(1..=6);
    let ids: Vec<usize> = (0..n_comp).map(|i| 7 * i + 3).collect();
    let mut edges = Vec::new();
    let mut degree = vec![0usize; n_comp];
    for i in 1..n_comp {
        let j = rng.gen_range(0..i);
        edges.push((ids[j], ids[i]));
        degree[i] += 1;
        degree[j] += 1;
    }
    let mut counts: Vec<usize> = degree.iter().map(|d| 3usize.saturating_sub(*d)).collect();
    for _ in 0..rng.gen_range(0..=3) {
        let c = rng.gen_range(0..n_comp);
        counts[c] += 1;
    }
    let total: usize = counts.iter().sum();
    let mut labels: Vec<usize> = (0..total).collect();
    labels.shuffle(rng);
    let mut components = Vec::new();
    let mut next = 0;
    for (i, &k) in counts.iter().enumerate() {
        components.push(Component { id: ids[i], marks: labels[next..next + k].to_vec() });
        next += k;
    }
    let curve = NodalCurve::new(components, edges).unwrap();
    loop {
        let defects = random_defects(rng, total, Some(&Rat::integer(2)));
        let angles = AngleVector::new(betas_from_defects(&defects)).unwrap();
        if non_collapse_check(&angles) {
            return StableInstance { curve, angles };
        }
    }
}

/// Defect sum of the marks reachable from `to` without crossing `from`.
pub fn oracle_far_weight(curve: &NodalCurve, angles: &AngleVector, from: usize, to: usize) -> Rat {
    let mut seen = BTreeSet::from([from, to]);
    let mut stack = vec![to];
    let mut total = Rat::zero();
    while let Some(c) = stack.pop() {
        let comp = curve.components().iter().find(|x| x.id == c).unwrap();
        for &m in &comp.marks {
            total += &(Rat::one() - &angles.betas()[m]);
        }
        for &(a, b) in curve.edges() {
            let other = if a == c { b } else if b == c { a } else { continue };
            if seen.insert(other) {
                stack.push(other);
            }
        }
    }
    total
}

/// Components with every mark and node weight below 1, by direct scan.
pub fn oracle_principal(curve: &NodalCurve, angles: &AngleVector) -> Vec<usize> {
    curve
        .components()
        .iter()
        .filter(|c| {
            let marks_ok = c.marks.iter().all(|&m| Rat::one() - &angles.betas()[m] < 1);
            let nodes_ok = curve.edges().iter().all(|&(a, b)| {
                if a == c.id {
                    oracle_far_weight(curve, angles, a, b) < 1
                } else if b == c.id {
                    oracle_far_weight(curve, angles, b, a) < 1
                } else {
                    true
                }
            });
            marks_ok && nodes_ok
        })
        .map(|c| c.id)
        .collect()
}

// ---------------------------------------------------------------------------
// Taylor-jet oracle for the bi-Laplacian

/// Truncated Taylor polynomial in three variables up to total degree 4.
#[derive(Clone, Debug)]
pub struct Jet {
    c: Vec<f64>,
}

const JET_DEGREE: usize = 4;

fn jet_exponents() -> &'static Vec<[usize; 3]> {
    use std::sync::OnceLock;
    static EXPS: OnceLock<Vec<[usize; 3]>> = OnceLock::new();
    EXPS.get_or_init(|| {
        let mut v = Vec::new();
        for total in 0..=JET_DEGREE {
            for a in 0..=total {
                for b in 0..=total - a {
                    v.push([a, b, total - a - b]);
                }
            }
        }
        v
    })
}

fn jet_index(e: [usize; 3]) -> Option<usize> {
    jet_exponents().iter().position(|x| *x == e)
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = vec![0.0; jet_exponents().len()];
        c[0] = v;
        Jet { c }
    }

    pub fn coordinate(axis: usize) -> Self {
        let mut j = Jet::constant(0.0);
        let mut e = [0; 3];
        e[axis] = 1;
        j.c[jet_index(e).unwrap()] = 1.0;
        j
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet { c: self.c.iter().map(|a| a * k).collect() }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let exps = jet_exponents();
        let mut out = Jet::constant(0.0);
        for (i, ei) in exps.iter().enumerate() {
            if self.c[i] == 0.0 {
                continue;
            }
            for (j, ej) in exps.iter().enumerate() {
                let e = [ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2]];
                if e.iter().sum::<usize>() <= JET_DEGREE {
                    out.c[jet_index(e).unwrap()] += self.c[i] * o.c[j];
                }
            }
        }
        out
    }

    /// `(1 + u)^p` for a jet `u` with zero constant term.
    pub fn one_plus_pow(u: &Jet, p: f64) -> Jet {
        let mut out = Jet::constant(1.0);
        let mut term = Jet::constant(1.0);
        let mut binom = 1.0;
        for k in 1..=JET_DEGREE {
            term = term.mul(u);
            binom *= (p - (k as f64 - 1.0)) / k as f64;
            out = out.add(&term.scale(binom));
        }
        out
    }

    pub fn coeff(&self, e: [usize; 3]) -> f64 {
        self.c[jet_index(e).unwrap()]
    }

    /// Bi-Laplacian at the expansion point from the degree-4 coefficients.
    pub fn bilaplacian(&self) -> f64 {
        let quartic = 24.0 * (self.coeff([4, 0, 0]) + self.coeff([0, 4, 0]) + self.coeff([0, 0, 4]));
        let mixed = 8.0 * (self.coeff([2, 2, 0]) + self.coeff([2, 0, 2]) + self.coeff([0, 2, 2]));
        quartic + mixed
    }
}

/// `1/4 * bi-Laplacian of 1/f` for unit-weighted monopoles at `x`, by Taylor jets.
pub fn oracle_curvature(monopoles: &[([f64; 3], f64)], x: [f64; 3]) -> f64 {
    let mut f = Jet::constant(0.0);
    for (p, m) in monopoles {
        let a = [x[0] - p[0], x[1] - p[1], x[2] - p[2]];
        let rho2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
        let mut u = Jet::constant(0.0);
        for axis in 0..3 {
            let y = Jet::coordinate(axis);
            u = u.add(&y.scale(2.0 * a[axis])).add(&y.mul(&y));
        }
        let u = u.scale(1.0 / rho2);
        f = f.add(&Jet::one_plus_pow(&u, -0.5).scale(0.5 * m / rho2.sqrt()));
    }
    let f0 = f.coeff([0, 0, 0]);
    let v = f.add(&Jet::constant(-f0)).scale(1.0 / f0);
    let g = Jet::one_plus_pow(&v, -1.0).scale(1.0 / f0);
    0.25 * g.bilaplacian()
}

// ---------------------------------------------------------------------------
// Closed forms for flat conical metrics

pub fn beta_fn(a: f64, b: f64) -> f64 {
    (libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)).exp()
}

/// Area of `prod |w - q_i|^(2 beta_i - 2) |dw|^2` for three finite points with
/// `sum beta = 1`: a Möbius map sends the points to `0, 1, infinity`, where
/// the metric doubles a Euclidean triangle with angles `pi beta_i` whose side
/// from 0 to 1 has length `B(beta_1, beta_2)`.
pub fn oracle_three_point_area(q: [Complex64; 3], beta: [f64; 3]) -> f64 {
    use std::f64::consts::PI;
    let side = beta_fn(beta[0], beta[1]);
    let triangle = side * side * (PI * beta[0]).sin() * (PI * beta[1]).sin() / (2.0 * (PI * beta[2]).sin());
    let a = (q[1] - q[2]) / (q[1] - q[0]);
    let k = a.norm().powf(2.0 * beta[0] - 2.0)
        * (a - 1.0).norm().powf(2.0 * beta[1] - 2.0)
        * a.norm_sqr()
        * (q[0] - q[2]).norm_sqr();
    2.0 * triangle / k
}
