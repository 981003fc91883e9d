//! Weighted point configurations on the projective line and stable nodal
//! curves, with the weights `b(x_i) = 1 - beta_i`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::flat::{bubble_tree, Ambient, AngleVector, BubbleTreeReport, FamilyConfig, FlatError};
use crate::series::{GaussRat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModuliError {
    #[error("weights sum to {total}; they must sum to exactly 2")]
    GaussBonnet { total: Rat },
    #[error("{marks} marked points but {angles} angles")]
    LengthMismatch { marks: usize, angles: usize },
    #[error("node between components {a} and {b} has weight exactly 1")]
    WeightOne { a: usize, b: usize },
    #[error("no component has all weights below 1")]
    NotFound,
    #[error("components {0:?} all have every weight below 1")]
    NotUnique(Vec<usize>),
    #[error("curve has no components")]
    NoComponents,
    #[error("duplicate component id {0}")]
    DuplicateComponent(usize),
    #[error("edge refers to unknown component {0}")]
    UnknownComponent(usize),
    #[error("edge {a}-{b} is a loop or repeated")]
    BadEdge { a: usize, b: usize },
    #[error("component graph is not connected")]
    Disconnected,
    #[error("component graph has a cycle")]
    Cyclic,
    #[error("component {id} has {special} special points; at least 3 are needed")]
    Unstable { id: usize, special: usize },
    #[error("marked point {0} appears more than once")]
    DuplicateMark(usize),
    #[error("marked points are not 0..{n}: {missing} is missing")]
    MissingMark { n: usize, missing: usize },
    #[error("family must live on the sphere")]
    NotSphere,
    #[error("{labels} labels but {values} values, or a label without a value")]
    BadTuple { labels: usize, values: usize },
    #[error("tuple values are not pairwise distinct")]
    RepeatedValue,
    #[error(transparent)]
    Flat(#[from] FlatError),
}

/// A point of the projective line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CP1Point {
    Finite(GaussRat),
    Infinity,
}

impl fmt::Display for CP1Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CP1Point::Finite(z) => write!(f, "{z}"),
            CP1Point::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for CP1Point {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            CP1Point::Finite(z) => z.serialize(serializer),
            CP1Point::Infinity => serializer.serialize_str("inf"),
        }
    }
}

/// `N` marked points given as labels into a list of distinct values; marks with
/// the same label coincide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkedTuple {
    pub labels: Vec<usize>,
    pub values: Vec<CP1Point>,
}

impl MarkedTuple {
    pub fn new(labels: Vec<usize>, values: Vec<CP1Point>) -> Result<Self, ModuliError> {
        let used: BTreeSet<usize> = labels.iter().copied().collect();
        if used.iter().any(|&l| l >= values.len()) || used.len() != values.len() {
            return Err(ModuliError::BadTuple { labels: labels.len(), values: values.len() });
        }
        let distinct: BTreeSet<&CP1Point> = values.iter().collect();
        if distinct.len() != values.len() {
            return Err(ModuliError::RepeatedValue);
        }
        Ok(MarkedTuple { labels, values })
    }

    /// Builds the partition from explicit point values.
    pub fn from_points(points: &[CP1Point]) -> Self {
        let mut values: Vec<CP1Point> = Vec::new();
        let labels = points
            .iter()
            .map(|p| match values.iter().position(|v| v == p) {
                Some(k) => k,
                None => {
                    values.push(p.clone());
                    values.len() - 1
                }
            })
            .collect();
        MarkedTuple { labels, values }
    }

    /// Marks grouped by coincidence, blocks ordered by label.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.values.len()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// True when every block of coinciding points has weight below 1.
pub fn is_beta_stable(tuple: &MarkedTuple, betas: &AngleVector) -> bool {
    assert_eq!(tuple.labels.len(), betas.len(), "one angle per marked point");
    tuple.blocks().iter().all(|b| betas.defect(b) < 1)
}

/// True when no subset of the weights sums to exactly 1.
///
/// Enumerates reachable partial sums below 1, so the cost is bounded by
/// `2^N` but in practice by the number of distinct sums under 1.
pub fn non_collapse_check(betas: &AngleVector) -> bool {
    let one = Rat::one();
    let mut sums: BTreeSet<Rat> = BTreeSet::new();
    sums.insert(Rat::zero());
    for b in betas.betas() {
        let w = &one - b;
        let mut next = Vec::new();
        for s in &sums {
            let t = s + &w;
            if t == one {
                return false;
            }
            if t < one {
                next.push(t);
            }
        }
        sums.extend(next);
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    pub marks: Vec<usize>,
}

/// Dual tree of a stable marked nodal curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodalCurve {
    components: Vec<Component>,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adjacency: BTreeMap<usize, Vec<usize>>,
    #[serde(skip)]
    mark_home: Vec<usize>,
}

#[derive(Deserialize)]
struct CurveRepr {
    components: Vec<Component>,
    edges: Vec<(usize, usize)>,
}

impl<'de> Deserialize<'de> for NodalCurve {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = CurveRepr::deserialize(deserializer)?;
        NodalCurve::new(r.components, r.edges).map_err(serde::de::Error::custom)
    }
}

impl NodalCurve {
    /// Validates connectivity, acyclicity, stability and that the marks are
    /// exactly `0..N`.
    pub fn new(mut components: Vec<Component>, edges: Vec<(usize, usize)>) -> Result<Self, ModuliError> {
        if components.is_empty() {
            return Err(ModuliError::NoComponents);
        }
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for c in &mut components {
            c.marks.sort_unstable();
            if adjacency.insert(c.id, Vec::new()).is_some() {
                return Err(ModuliError::DuplicateComponent(c.id));
            }
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &edges {
            for x in [a, b] {
                if !adjacency.contains_key(&x) {
                    return Err(ModuliError::UnknownComponent(x));
                }
            }
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                return Err(ModuliError::BadEdge { a, b });
            }
            adjacency.get_mut(&a).unwrap().push(b);
            adjacency.get_mut(&b).unwrap().push(a);
        }
        if edges.len() + 1 != components.len() {
            // A connected graph with this many edges would contain a cycle.
            return Err(if edges.len() >= components.len() { ModuliError::Cyclic } else { ModuliError::Disconnected });
        }
        let start = components[0].id;
        let mut reached = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &adjacency[&x] {
                if reached.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        if reached.len() != components.len() {
            return Err(ModuliError::Disconnected);
        }
        let n: usize = components.iter().map(|c| c.marks.len()).sum();
        let mut mark_home = vec![usize::MAX; n];
        for c in &components {
            for &m in &c.marks {
                if m >= n {
                    let missing = (0..n).find(|i| mark_home[*i] == usize::MAX).unwrap_or(0);
                    return Err(ModuliError::MissingMark { n, missing });
                }
                if mark_home[m] != usize::MAX {
                    return Err(ModuliError::DuplicateMark(m));
                }
                mark_home[m] = c.id;
            }
            let special = c.marks.len() + adjacency[&c.id].len();
            if special < 3 {
                return Err(ModuliError::Unstable { id: c.id, special });
            }
        }
        Ok(NodalCurve { components, edges, adjacency, mark_home })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_marks(&self) -> usize {
        self.mark_home.len()
    }

    pub fn component(&self, id: usize) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn neighbours(&self, id: usize) -> &[usize] {
        &self.adjacency[&id]
    }

    /// Component carrying mark `i`.
    pub fn home_of(&self, mark: usize) -> usize {
        self.mark_home[mark]
    }

    /// Marks on the side of `b` after cutting the node between `a` and `b`.
    pub fn far_side_marks(&self, a: usize, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(b, a)];
        while let Some((x, from)) = stack.pop() {
            out.extend(self.component(x).expect("known component").marks.iter().copied());
            for &y in &self.adjacency[&x] {
                if y != from {
                    stack.push((y, x));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The neighbour of `from` on the path toward `to` (`from != to`).
    pub fn step_toward(&self, from: usize, to: usize) -> usize {
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([to]);
        parent.insert(to, to);
        while let Some(x) = queue.pop_front() {
            if x == from {
                break;
            }
            for &y in &self.adjacency[&x] {
                if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(y) {
                    e.insert(x);
                    queue.push_back(y);
                }
            }
        }
        parent[&from]
    }

    /// Graphviz rendering; with weights, each edge is labelled by the node
    /// weights seen from both ends.
    pub fn to_dot(&self, weights: Option<&NodeWeighting>) -> String {
        let mut out = String::from("graph C {\n");
        for c in &self.components {
            let marks: Vec<String> = c.marks.iter().map(|m| format!("x{}", m + 1)).collect();
            let _ = writeln!(out, "  c{} [label=\"C{}: {}\"];", c.id, c.id, marks.join(", "));
        }
        for &(a, b) in &self.edges {
            match weights {
                Some(w) => {
                    let _ = writeln!(
                        out,
                        "  c{a} -- c{b} [label=\"{} | {}\"];",
                        w.weight(a, b).expect("edge weight"),
                        w.weight(b, a).expect("edge weight")
                    );
                }
                None => {
                    let _ = writeln!(out, "  c{a} -- c{b};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Weight `b(y)` of the node at component `a` facing `b`: the total weight of
/// marks on `b`'s side.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeWeighting(BTreeMap<(usize, usize), Rat>);

impl NodeWeighting {
    pub fn weight(&self, at: usize, toward: usize) -> Option<&Rat> {
        self.0.get(&(at, toward))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Rat)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Serialize for NodeWeighting {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            at: usize,
            toward: usize,
            weight: &'a Rat,
        }
        let v: Vec<Entry> = self.0.iter().map(|((a, b), w)| Entry { at: *a, toward: *b, weight: w }).collect();
        v.serialize(serializer)
    }
}

fn check_weights(curve: &NodalCurve, betas: &AngleVector) -> Result<(), ModuliError> {
    if curve.num_marks() != betas.len() {
        return Err(ModuliError::LengthMismatch { marks: curve.num_marks(), angles: betas.len() });
    }
    let total = betas.total_defect();
    if total != 2 {
        return Err(ModuliError::GaussBonnet { total });
    }
    Ok(())
}

pub fn node_weights(curve: &NodalCurve, betas: &AngleVector) -> Result<NodeWeighting, ModuliError> {
    check_weights(curve, betas)?;
    let mut map = BTreeMap::new();
    for &(a, b) in curve.edges() {
        for (x, y) in [(a, b), (b, a)] {
            let w = betas.defect(&curve.far_side_marks(x, y));
            if w == 1 {
                return Err(ModuliError::WeightOne { a: x, b: y });
            }
            map.insert((x, y), w);
        }
    }
    Ok(NodeWeighting(map))
}

/// The unique component whose marks and nodes all have weight below 1.
pub fn principal_component(curve: &NodalCurve, betas: &AngleVector) -> Result<usize, ModuliError> {
    let w = node_weights(curve, betas)?;
    let found: Vec<usize> = curve
        .components()
        .iter()
        .filter(|c| {
            c.marks.iter().all(|&m| betas.defect(&[m]) < 1)
                && curve.neighbours(c.id).iter().all(|&n| *w.weight(c.id, n).unwrap() < 1)
        })
        .map(|c| c.id)
        .collect();
    match found.len() {
        0 => Err(ModuliError::NotFound),
        1 => Ok(found[0]),
        _ => Err(ModuliError::NotUnique(found)),
    }
}

/// Contracts every component except the principal one.
///
/// The returned values are placeholders `0, 1, 2, ...` on the principal
/// component: one per mark it carries and one per node, ordered by smallest
/// mark. Only the coincidence pattern is meaningful.
pub fn resolve(curve: &NodalCurve, betas: &AngleVector) -> Result<MarkedTuple, ModuliError> {
    let p = principal_component(curve, betas)?;
    let key: Vec<(bool, usize)> = (0..curve.num_marks())
        .map(|i| {
            let home = curve.home_of(i);
            if home == p {
                (true, i)
            } else {
                (false, curve.step_toward(p, home))
            }
        })
        .collect();
    let mut order: Vec<(bool, usize)> = Vec::new();
    let labels = key
        .iter()
        .map(|k| match order.iter().position(|o| o == k) {
            Some(l) => l,
            None => {
                order.push(*k);
                order.len() - 1
            }
        })
        .collect();
    let values = (0..order.len()).map(|k| CP1Point::Finite(GaussRat::integer(k as i64))).collect();
    MarkedTuple::new(labels, values)
}

/// Nodal curve of a sphere family: the limit metric is component 0; each
/// interior node of each collision tree is a further component.
pub fn bubbletree_to_nodal_curve(config: &FamilyConfig) -> Result<NodalCurve, ModuliError> {
    if config.ambient != Ambient::Sphere {
        return Err(ModuliError::NotSphere);
    }
    let report = bubble_tree(config)?;
    let root_marks: Vec<usize> =
        report.limit.iter().filter(|p| p.members.len() == 1).map(|p| p.members[0]).collect();
    let mut components = vec![Component { id: 0, marks: root_marks }];
    let mut edges = Vec::new();
    for ct in &report.trees {
        let mut comp_of: BTreeMap<usize, usize> = BTreeMap::new();
        for n in ct.tree.nodes() {
            if n.is_leaf() {
                continue;
            }
            let id = components.len();
            comp_of.insert(n.id, id);
            let parent = match n.parent {
                Some(p) => comp_of[&p],
                None => 0,
            };
            edges.push((parent, id));
            let marks = n
                .children
                .iter()
                .map(|&c| ct.tree.node(c).unwrap())
                .filter(|c| c.is_leaf())
                .map(|c| c.members[0])
                .collect();
            components.push(Component { id, marks });
        }
    }
    NodalCurve::new(components, edges)
}

/// A cone point of a bubble: either an original marked point or the merged
/// point where a child bubble is attached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ShapePoint {
    Mark { index: usize, angle: Rat },
    Child { node: usize, angle: Rat },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShapeNode {
    /// All marks below this node.
    pub members: Vec<usize>,
    /// Angle of the cone end; `None` for the compact root.
    pub cone_end: Option<Rat>,
    /// Ordered by smallest mark.
    pub points: Vec<ShapePoint>,
}

/// Bubble tree reduced to shape and angle labels; node 0 is the root and
/// nodes are in preorder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BubbleTreeShape {
    pub nodes: Vec<ShapeNode>,
}

struct ShapeBuilder {
    nodes: Vec<ShapeNode>,
}

/// Abstract child description used by both constructions.
enum Piece {
    Mark(usize, Rat),
    Sub { members: Vec<usize>, angle: Rat, cone_end: Rat, pieces: Vec<Piece> },
}

impl Piece {
    fn min_mark(&self) -> usize {
        match self {
            Piece::Mark(i, _) => *i,
            Piece::Sub { members, .. } => members[0],
        }
    }
}

impl ShapeBuilder {
    fn push(&mut self, members: Vec<usize>, cone_end: Option<Rat>, mut pieces: Vec<Piece>) -> usize {
        pieces.sort_by_key(Piece::min_mark);
        let id = self.nodes.len();
        self.nodes.push(ShapeNode { members, cone_end, points: Vec::new() });
        let mut points = Vec::with_capacity(pieces.len());
        for piece in pieces {
            match piece {
                Piece::Mark(index, angle) => points.push(ShapePoint::Mark { index, angle }),
                Piece::Sub { members, angle, cone_end, pieces } => {
                    let node = self.push(members, Some(cone_end), pieces);
                    points.push(ShapePoint::Child { node, angle });
                }
            }
        }
        self.nodes[id].points = points;
        id
    }
}

/// Reads the bubble tree off a stable curve, rooted at the principal component.
pub fn nodal_curve_to_bubbletree_shape(
    curve: &NodalCurve,
    betas: &AngleVector,
) -> Result<BubbleTreeShape, ModuliError> {
    let w = node_weights(curve, betas)?;
    let root = principal_component(curve, betas)?;

    fn pieces_of(curve: &NodalCurve, betas: &AngleVector, w: &NodeWeighting, c: usize, from: Option<usize>) -> Vec<Piece> {
        let mut out: Vec<Piece> = curve
            .component(c)
            .unwrap()
            .marks
            .iter()
            .map(|&m| Piece::Mark(m, betas.betas()[m].clone()))
            .collect();
        for &n in curve.neighbours(c) {
            if Some(n) == from {
                continue;
            }
            let b_out = w.weight(c, n).unwrap();
            let b_back = w.weight(n, c).unwrap();
            out.push(Piece::Sub {
                members: curve.far_side_marks(c, n),
                angle: Rat::one() - b_out,
                cone_end: b_back - &Rat::one(),
                pieces: pieces_of(curve, betas, w, n, Some(c)),
            });
        }
        out
    }

    let mut b = ShapeBuilder { nodes: Vec::new() };
    b.push((0..curve.num_marks()).collect(), None, pieces_of(curve, betas, &w, root, None));
    Ok(BubbleTreeShape { nodes: b.nodes })
}

/// The same shape computed directly from the flat-metric bubble tree.
pub fn bubble_report_shape(config: &FamilyConfig, report: &BubbleTreeReport) -> BubbleTreeShape {
    fn pieces_of(config: &FamilyConfig, tree: &crate::tree::VanishingTree, node: usize) -> Vec<Piece> {
        let n = tree.node(node).unwrap();
        n.children
            .iter()
            .map(|&c| {
                let child = tree.node(c).unwrap();
                let angle = config.merged_angle(&child.members).expect("checked by bubble_tree");
                if child.is_leaf() {
                    Piece::Mark(child.members[0], angle)
                } else {
                    Piece::Sub {
                        members: child.members.clone(),
                        cone_end: angle.clone(),
                        angle,
                        pieces: pieces_of(config, tree, c),
                    }
                }
            })
            .collect()
    }

    let mut pieces = Vec::new();
    for p in &report.limit {
        if p.members.len() == 1 {
            pieces.push(Piece::Mark(p.members[0], p.angle.clone()));
        } else {
            let ct = report
                .trees
                .iter()
                .find(|ct| ct.tree.root_node().members == p.members)
                .expect("every cluster has a tree");
            pieces.push(Piece::Sub {
                members: p.members.clone(),
                angle: p.angle.clone(),
                cone_end: p.angle.clone(),
                pieces: pieces_of(config, &ct.tree, ct.tree.root),
            });
        }
    }
    let mut b = ShapeBuilder { nodes: Vec::new() };
    b.push((0..config.len()).collect(), None, pieces);
    BubbleTreeShape { nodes: b.nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Germ;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn angles(v: &[Rat]) -> AngleVector {
        AngleVector::new(v.to_vec()).unwrap()
    }

    fn two_components() -> NodalCurve {
        NodalCurve::new(
            vec![Component { id: 10, marks: vec![0, 1] }, Component { id: 20, marks: vec![2, 3] }],
            vec![(10, 20)],
        )
        .unwrap()
    }

    #[test]
    fn collapse_check() {
        assert!(!non_collapse_check(&angles(&vec![r(1, 2); 4])));
        let b = angles(&[r(7, 10), r(7, 10), r(7, 10), r(7, 10), r(1, 5)]);
        assert!(non_collapse_check(&b));
    }

    #[test]
    fn stability_walls() {
        let tuple = MarkedTuple::from_points(
            &[0, 0, 0, 1, 2].map(|k| CP1Point::Finite(GaussRat::integer(k))),
        );
        let at = |beta: Rat| {
            let last = Rat::integer(3) - Rat::integer(4) * &beta;
            angles(&[beta.clone(), beta.clone(), beta.clone(), beta, last])
        };
        assert!(is_beta_stable(&tuple, &at(r(7, 10))));
        assert!(!is_beta_stable(&tuple, &at(r(6, 10))));
        let distinct = MarkedTuple::from_points(&[0, 1, 2, 3, 4].map(|k| CP1Point::Finite(GaussRat::integer(k))));
        assert!(is_beta_stable(&distinct, &at(r(6, 10))));
    }

    #[test]
    fn weights_and_principal() {
        let c = two_components();
        let b = angles(&[r(4, 5), r(3, 4), r(3, 10), r(3, 20)]);
        let w = node_weights(&c, &b).unwrap();
        assert_eq!(w.weight(10, 20), Some(&r(31, 20)));
        assert_eq!(w.weight(20, 10), Some(&r(9, 20)));
        assert_eq!(principal_component(&c, &b).unwrap(), 20);
        let t = resolve(&c, &b).unwrap();
        assert_eq!(t.blocks(), vec![vec![0, 1], vec![2], vec![3]]);
        assert!(is_beta_stable(&t, &b));
        assert_eq!(
            node_weights(&c, &angles(&vec![r(1, 2); 4])),
            Err(ModuliError::WeightOne { a: 10, b: 20 })
        );
    }

    #[test]
    fn single_component() {
        let c = NodalCurve::new(vec![Component { id: 0, marks: vec![0, 1, 2] }], vec![]).unwrap();
        let b = angles(&vec![r(1, 3); 3]);
        assert!(node_weights(&c, &b).unwrap().is_empty());
        assert_eq!(principal_component(&c, &b).unwrap(), 0);
        assert_eq!(resolve(&c, &b).unwrap().blocks(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn curve_validation() {
        let unstable = NodalCurve::new(
            vec![Component { id: 0, marks: vec![0, 1, 2] }, Component { id: 1, marks: vec![3] }],
            vec![(0, 1)],
        );
        assert_eq!(unstable, Err(ModuliError::Unstable { id: 1, special: 2 }));
        let cyclic = NodalCurve::new(
            vec![
                Component { id: 0, marks: vec![0, 1] },
                Component { id: 1, marks: vec![2, 3] },
                Component { id: 2, marks: vec![4, 5] },
            ],
            vec![(0, 1), (1, 2), (2, 0)],
        );
        assert_eq!(cyclic, Err(ModuliError::Cyclic));
        let gap = NodalCurve::new(vec![Component { id: 0, marks: vec![0, 1, 3] }], vec![]);
        assert!(matches!(gap, Err(ModuliError::MissingMark { .. })));
    }

    #[test]
    fn json_round_trip() {
        let c = two_components();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["edges"], serde_json::json!([[10, 20]]));
        let back: NodalCurve = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    fn sphere(texts: &[&str], betas: &[Rat]) -> FamilyConfig {
        let pts = texts.iter().map(|t| Germ::parse(t).unwrap()).collect();
        FamilyConfig::new(pts, angles(betas), Ambient::Sphere).unwrap()
    }

    #[test]
    fn forward_map_examples() {
        let cfg = sphere(&["0", "1", "2", "3"], &vec![r(1, 2); 4]);
        let c = bubbletree_to_nodal_curve(&cfg).unwrap();
        assert_eq!(c.components().len(), 1);

        let cfg = sphere(&["t", "-t", "1", "2"], &[r(3, 4), r(3, 4), r(1, 4), r(1, 4)]);
        let c = bubbletree_to_nodal_curve(&cfg).unwrap();
        assert_eq!(c.components()[0].marks, vec![2, 3]);
        assert_eq!(c.components()[1].marks, vec![0, 1]);
        assert_eq!(principal_component(&c, &cfg.angles).unwrap(), 0);
    }

    #[test]
    fn four_point_cluster_on_sphere() {
        let betas = [r(9, 10), r(9, 10), r(9, 10), r(9, 10), r(1, 5), r(1, 5)];
        let cfg = sphere(
            &["t + O(t^6)", "t - t^4 + O(t^6)", "t + t^4 + O(t^6)", "t^2 + O(t^6)", "1", "2"],
            &betas,
        );
        let c = bubbletree_to_nodal_curve(&cfg).unwrap();
        assert_eq!(c.components().len(), 3);
        assert_eq!(principal_component(&c, &cfg.angles).unwrap(), 0);
        let shape = nodal_curve_to_bubbletree_shape(&c, &cfg.angles).unwrap();
        let direct = bubble_report_shape(&cfg, &bubble_tree(&cfg).unwrap());
        assert_eq!(shape, direct);
        assert_eq!(shape.nodes[1].cone_end, Some(r(6, 10)));
    }
}
