//! Flat conical metrics: angle bookkeeping, bubbles at tree nodes, and the
//! rescaling exponents seen from a section.
//!
//! A family is `prod |z - p_i(t)|^(beta_i - 1) |dz|` on the plane, or the same
//! line element on the sphere when the angle defects sum to 2.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::series::{GaussRat, Germ, Order, Rat};
use crate::tree::{SectionPath, Terminal, TreeError, VanishingTree};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlatError {
    #[error("angle defects of cluster {cluster:?} sum to {total}, which is not below 1")]
    CollapseViolation { cluster: Vec<usize>, total: Rat },
    #[error("angle defects sum to {total}; a sphere needs exactly 2")]
    GaussBonnet { total: Rat },
    #[error("angle {value} at index {index} is outside (0,1)")]
    InvalidAngle { index: usize, value: Rat },
    #[error("{points} points but {angles} angles")]
    LengthMismatch { points: usize, angles: usize },
    #[error("node {node} is not an interior node")]
    NotInterior { node: usize },
    #[error("section value {value} at t=0 is shared by {count} cone points; need a collision of at least 2")]
    ClusterMismatch { value: Box<GaussRat>, count: usize },
    #[error("rescaling exponent must be positive, got {alpha}")]
    NonPositiveAlpha { alpha: Rat },
    #[error("empty configuration")]
    Empty,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Cone angles `beta_i`, each in the open interval (0,1), as fractions of 2*pi.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AngleVector(Vec<Rat>);

impl AngleVector {
    pub fn new(betas: Vec<Rat>) -> Result<Self, FlatError> {
        for (index, b) in betas.iter().enumerate() {
            if !(b.is_positive() && *b < 1) {
                return Err(FlatError::InvalidAngle { index, value: b.clone() });
            }
        }
        Ok(AngleVector(betas))
    }

    pub fn betas(&self) -> &[Rat] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum (1 - beta_i)` over `indices`.
    pub fn defect(&self, indices: &[usize]) -> Rat {
        indices.iter().map(|&i| Rat::one() - &self.0[i]).sum()
    }

    pub fn total_defect(&self) -> Rat {
        self.0.iter().map(|b| Rat::one() - b).sum()
    }
}

/// The 2-cone of total angle `2*pi*gamma`; `gamma = 1` is the flat plane.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConeModel {
    pub gamma: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConePoint {
    pub position: GaussRat,
    pub angle: Rat,
    /// Original cone points merged into this one.
    pub members: Vec<usize>,
}

/// Infinite flat metric on the plane with the given cone points, asymptotic
/// to the cone of angle `gamma_infinity`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BubbleModel {
    pub cone_points: Vec<ConePoint>,
    pub gamma_infinity: Rat,
    pub basepoint: GaussRat,
}

impl BubbleModel {
    pub fn positions(&self) -> Vec<GaussRat> {
        self.cone_points.iter().map(|c| c.position.clone()).collect()
    }

    pub fn angles(&self) -> Vec<Rat> {
        self.cone_points.iter().map(|c| c.angle.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ambient {
    Plane,
    Sphere,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyConfig {
    pub points: Vec<Germ>,
    pub angles: AngleVector,
    pub ambient: Ambient,
}

impl FamilyConfig {
    /// Checks the global angle condition: defects below 1 on the plane,
    /// exactly 2 on the sphere.
    pub fn new(points: Vec<Germ>, angles: AngleVector, ambient: Ambient) -> Result<Self, FlatError> {
        if points.is_empty() {
            return Err(FlatError::Empty);
        }
        if points.len() != angles.len() {
            return Err(FlatError::LengthMismatch { points: points.len(), angles: angles.len() });
        }
        let total = angles.total_defect();
        match ambient {
            Ambient::Plane if total >= 1 => {
                return Err(FlatError::CollapseViolation { cluster: (0..points.len()).collect(), total })
            }
            Ambient::Sphere if total != 2 => return Err(FlatError::GaussBonnet { total }),
            _ => {}
        }
        Ok(FamilyConfig { points, angles, ambient })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices grouped by the value at `t = 0`, groups ordered by smallest index.
    pub fn collision_clusters(&self) -> Vec<(GaussRat, Vec<usize>)> {
        let mut out: Vec<(GaussRat, Vec<usize>)> = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            let v = p.value_at_zero();
            match out.iter_mut().find(|(q, _)| *q == v) {
                Some((_, members)) => members.push(i),
                None => out.push((v, vec![i])),
            }
        }
        out
    }

    /// Angle of the cone obtained by merging `members`.
    pub fn merged_angle(&self, members: &[usize]) -> Result<Rat, FlatError> {
        let total = self.angles.defect(members);
        if total >= 1 {
            return Err(FlatError::CollapseViolation { cluster: members.to_vec(), total });
        }
        Ok(Rat::one() - total)
    }
}

/// `gamma = 1 - sum (1 - beta_i)`.
pub fn subcone_angle(angles: &[Rat]) -> Result<Rat, FlatError> {
    let total: Rat = angles.iter().map(|b| Rat::one() - b).sum();
    if total >= 1 {
        return Err(FlatError::CollapseViolation { cluster: (0..angles.len()).collect(), total });
    }
    Ok(Rat::one() - total)
}

/// Groups `members` by `key`, merging each group into one cone point.
fn merge_points<F>(config: &FamilyConfig, members: &[usize], key: F) -> Result<Vec<ConePoint>, FlatError>
where
    F: Fn(usize) -> GaussRat,
{
    let mut groups: Vec<(GaussRat, Vec<usize>)> = Vec::new();
    for &m in members {
        let k = key(m);
        match groups.iter_mut().find(|(q, _)| *q == k) {
            Some((_, g)) => g.push(m),
            None => groups.push((k, vec![m])),
        }
    }
    groups
        .into_iter()
        .map(|(position, members)| {
            let angle = config.merged_angle(&members)?;
            Ok(ConePoint { position, angle, members })
        })
        .collect()
}

/// The bubble attached to an interior node: one cone point per child, placed at
/// the child's coefficient of `t^split`.
pub fn bubble_at_node(tree: &VanishingTree, node: usize, config: &FamilyConfig) -> Result<BubbleModel, FlatError> {
    let n = tree.node(node).ok_or(FlatError::NotInterior { node })?;
    let Some(k) = n.split_order else {
        return Err(FlatError::NotInterior { node });
    };
    let gamma_infinity = config.merged_angle(&n.members)?;
    let mut cone_points = Vec::with_capacity(n.children.len());
    for &c in &n.children {
        let members = tree.node(c).expect("child exists").members.clone();
        let position = config.points[members[0]].coeff(k);
        let angle = config.merged_angle(&members)?;
        cone_points.push(ConePoint { position, angle, members });
    }
    Ok(BubbleModel { cone_points, gamma_infinity, basepoint: GaussRat::zero() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterTree {
    /// Value shared by the cluster at `t = 0` (unused on the plane, where a
    /// single tree covers every point).
    pub value: GaussRat,
    pub tree: VanishingTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeBubble {
    /// Index into [`BubbleTreeReport::trees`].
    pub tree: usize,
    pub node: usize,
    pub bubble: BubbleModel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BubbleTreeReport {
    pub trees: Vec<ClusterTree>,
    pub bubbles: Vec<NodeBubble>,
    /// The metric at `t = 0`: collided points with merged angles.
    pub limit: Vec<ConePoint>,
}

/// Every bubble of the family.
///
/// On the plane there is one tree over all points. On the sphere each
/// collision cluster of size at least 2 gets its own tree.
pub fn bubble_tree(config: &FamilyConfig) -> Result<BubbleTreeReport, FlatError> {
    let clusters = config.collision_clusters();
    let mut limit = Vec::with_capacity(clusters.len());
    for (value, members) in &clusters {
        let angle = config.merged_angle(members)?;
        limit.push(ConePoint { position: value.clone(), angle, members: members.clone() });
    }
    let mut trees = Vec::new();
    match config.ambient {
        Ambient::Plane => {
            let tree = VanishingTree::build(&config.points)?;
            trees.push(ClusterTree { value: GaussRat::zero(), tree });
        }
        Ambient::Sphere => {
            for (value, members) in &clusters {
                if members.len() >= 2 {
                    let tree = VanishingTree::build_subset(&config.points, members)?;
                    trees.push(ClusterTree { value: value.clone(), tree });
                }
            }
        }
    }
    let mut bubbles = Vec::new();
    for (t, ct) in trees.iter().enumerate() {
        for n in ct.tree.interior_nodes() {
            bubbles.push(NodeBubble { tree: t, node: n.id, bubble: bubble_at_node(&ct.tree, n.id, config)? });
        }
    }
    Ok(BubbleTreeReport { trees, bubbles, limit })
}

/// One transition of the rescaled limits along a section.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Breakpoint {
    /// Vanishing order at which the members of this level separate from the section.
    pub d: u32,
    pub alpha: Rat,
    /// Tree node, or `None` for the final approach to a single cone point that
    /// the section does not hit.
    pub node: Option<usize>,
    pub members: Vec<usize>,
    /// Limit for exponents just below `alpha`, pointed at the vertex.
    pub cone: ConeModel,
    /// Limit at exactly `alpha`, in coordinates centred on the section.
    pub bubble: BubbleModel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TerminalRegime {
    Plane,
    Cone(ConeModel),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectionAnalysis {
    /// Points colliding with the section at `t = 0`.
    pub cluster: Vec<usize>,
    pub tree: VanishingTree,
    pub path: SectionPath,
    /// Vanishing order of `p_j - s` for each cluster member.
    pub orders: Vec<(usize, Order)>,
    /// Cone angle of the whole cluster.
    pub gamma: Rat,
    pub breakpoints: Vec<Breakpoint>,
    pub terminal: TerminalRegime,
    betas: Vec<(usize, Rat)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RescaledLimit {
    /// Cone pointed at its vertex.
    Cone(ConeModel),
    /// Bubble pointed at its basepoint.
    Bubble(BubbleModel),
    Terminal(TerminalRegime),
}

impl SectionAnalysis {
    pub fn alphas(&self) -> Vec<Rat> {
        self.breakpoints.iter().map(|b| b.alpha.clone()).collect()
    }

    /// `alpha(lambda) = gamma*lambda + sum_{d(j) < lambda} (1 - beta_j)(lambda - d(j))`.
    pub fn alpha_of_lambda(&self, lambda: &Rat) -> Rat {
        let mut acc = &self.gamma * lambda;
        for ((_, ord), (_, beta)) in self.orders.iter().zip(&self.betas) {
            if let Order::Finite(d) = ord {
                let d = Rat::from(*d);
                if d < *lambda {
                    acc += &((Rat::one() - beta) * (lambda - &d));
                }
            }
        }
        acc
    }

    /// The pointed limit of `|t|^(-2 alpha) g_t` based at the section.
    pub fn classify(&self, alpha: &Rat) -> Result<RescaledLimit, FlatError> {
        if !alpha.is_positive() {
            return Err(FlatError::NonPositiveAlpha { alpha: alpha.clone() });
        }
        for b in &self.breakpoints {
            if *alpha < b.alpha {
                return Ok(RescaledLimit::Cone(b.cone.clone()));
            }
            if *alpha == b.alpha {
                return Ok(RescaledLimit::Bubble(b.bubble.clone()));
            }
        }
        Ok(RescaledLimit::Terminal(self.terminal.clone()))
    }
}

pub fn classify_rescaled_limit(analysis: &SectionAnalysis, alpha: &Rat) -> Result<RescaledLimit, FlatError> {
    analysis.classify(alpha)
}

pub fn alpha_of_lambda(analysis: &SectionAnalysis, lambda: &Rat) -> Rat {
    analysis.alpha_of_lambda(lambda)
}

/// Rescaling exponents and bubbles seen from the section `s`.
///
/// Only the points with `p_j(0) = s(0)` take part; the others stay at
/// positive distance and do not affect the limits.
pub fn alpha_exponents(config: &FamilyConfig, section: &Germ) -> Result<SectionAnalysis, FlatError> {
    let s0 = section.value_at_zero();
    let cluster: Vec<usize> =
        (0..config.len()).filter(|&i| config.points[i].value_at_zero() == s0).collect();
    if cluster.len() < 2 {
        return Err(FlatError::ClusterMismatch { value: Box::new(s0), count: cluster.len() });
    }
    let gamma = config.merged_angle(&cluster)?;
    let tree = VanishingTree::build_subset(&config.points, &cluster)?;
    let path = tree.section_path(&config.points, section)?;
    let order_of: BTreeMap<usize, Order> =
        cluster.iter().map(|&j| (j, config.points[j].agree_order(section))).collect();
    let betas: Vec<(usize, Rat)> = cluster.iter().map(|&j| (j, config.angles.betas()[j].clone())).collect();
    let mut analysis = SectionAnalysis {
        cluster: cluster.clone(),
        tree,
        path: path.clone(),
        orders: order_of.iter().map(|(j, o)| (*j, *o)).collect(),
        gamma,
        breakpoints: Vec::new(),
        terminal: TerminalRegime::Plane,
        betas,
    };

    let centred = |j: usize, d: u32| config.points[j].coeff(d) - section.coeff(d);
    let mut breakpoints = Vec::new();
    for &v in &path.nodes {
        let members = analysis.tree.node(v).expect("path node").members.clone();
        let d = members
            .iter()
            .filter_map(|j| order_of[j].finite())
            .min()
            .expect("interior node has a member apart from the section");
        let alpha = analysis.alpha_of_lambda(&Rat::from(d));
        let cone = ConeModel { gamma: config.merged_angle(&members)? };
        let cone_points = merge_points(config, &members, |j| centred(j, d))?;
        let bubble = BubbleModel { cone_points, gamma_infinity: cone.gamma.clone(), basepoint: GaussRat::zero() };
        breakpoints.push(Breakpoint { d, alpha, node: Some(v), members, cone, bubble });
    }

    analysis.terminal = match path.terminal {
        Terminal::MatchesGerm(i) => TerminalRegime::Cone(ConeModel { gamma: config.angles.betas()[i].clone() }),
        Terminal::Generic => {
            // A lone point closer to the section than every level of the path
            // adds one more transition before the flat regime.
            let last = breakpoints.last().expect("cluster has an interior root");
            let closer: Vec<usize> = last
                .members
                .iter()
                .copied()
                .filter(|j| order_of[j] > Order::Finite(last.d))
                .collect();
            if let [j] = closer[..] {
                let d = order_of[&j].finite().expect("generic section differs from every point");
                let beta = config.angles.betas()[j].clone();
                let bubble = BubbleModel {
                    cone_points: vec![ConePoint { position: centred(j, d), angle: beta.clone(), members: vec![j] }],
                    gamma_infinity: beta.clone(),
                    basepoint: GaussRat::zero(),
                };
                breakpoints.push(Breakpoint {
                    d,
                    alpha: analysis.alpha_of_lambda(&Rat::from(d)),
                    node: None,
                    members: vec![j],
                    cone: ConeModel { gamma: beta },
                    bubble,
                });
            }
            TerminalRegime::Plane
        }
    };
    debug_assert!(breakpoints.windows(2).all(|w| w[0].d < w[1].d && w[0].alpha < w[1].alpha));
    analysis.breakpoints = breakpoints;
    Ok(analysis)
}
