//! The vanishing tree of a finite set of germs and the path a section traces in it.
//!
//! Members are indices into the caller's germ slice. A tree may be built over a
//! subset of that slice, in which case node member lists still use the global
//! indices.

use std::fmt::Write as _;

use serde::Serialize;

use crate::series::{Germ, Order};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("germs {i} and {j} agree to their full truncation; supply more terms")]
    AmbiguousTruncation { i: usize, j: usize },
    #[error("section agrees with germ {index} only up to the section's own truncation; supply more terms")]
    AmbiguousSection { index: usize },
    #[error("empty germ set")]
    Empty,
    #[error("germ index {index} out of range")]
    IndexOutOfRange { index: usize },
    #[error("duplicate germ index {index}")]
    DuplicateIndex { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub id: usize,
    /// Sorted member indices.
    pub members: Vec<usize>,
    /// Exponent at which the members first disagree; `None` for leaves.
    pub split_order: Option<u32>,
    /// Children ordered by smallest member.
    pub children: Vec<usize>,
    #[serde(skip)]
    pub parent: Option<usize>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Nodes are stored in preorder; the root has id 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VanishingTree {
    pub root: usize,
    nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index")]
pub enum Terminal {
    MatchesGerm(usize),
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectionPath {
    /// Interior node ids from the root downward.
    pub nodes: Vec<usize>,
    pub terminal: Terminal,
}

impl VanishingTree {
    pub fn build(germs: &[Germ]) -> Result<Self, TreeError> {
        let all: Vec<usize> = (0..germs.len()).collect();
        Self::build_subset(germs, &all)
    }

    /// Tree over `germs[i]` for `i` in `indices`.
    pub fn build_subset(germs: &[Germ], indices: &[usize]) -> Result<Self, TreeError> {
        if indices.is_empty() {
            return Err(TreeError::Empty);
        }
        let mut members: Vec<usize> = indices.to_vec();
        members.sort_unstable();
        for w in members.windows(2) {
            if w[0] == w[1] {
                return Err(TreeError::DuplicateIndex { index: w[0] });
            }
        }
        if let Some(&bad) = members.iter().find(|&&i| i >= germs.len()) {
            return Err(TreeError::IndexOutOfRange { index: bad });
        }
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if germs[i].agree_order(&germs[j]).is_infinite() {
                    return Err(TreeError::AmbiguousTruncation { i, j });
                }
            }
        }
        let mut tree = VanishingTree { root: 0, nodes: Vec::new() };
        tree.grow(germs, members, None);
        Ok(tree)
    }

    fn grow(&mut self, germs: &[Germ], members: Vec<usize>, parent: Option<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode { id, members: members.clone(), split_order: None, children: Vec::new(), parent });
        if members.len() < 2 {
            return id;
        }
        let split = min_pairwise_agreement(germs, &members);
        self.nodes[id].split_order = Some(split);
        // Members are sorted, so classes come out ordered by smallest member.
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &m in &members {
            let c = germs[m].coeff(split);
            match classes.iter_mut().find(|cl| germs[cl[0]].coeff(split) == c) {
                Some(cl) => cl.push(m),
                None => classes.push(vec![m]),
            }
        }
        for class in classes {
            let child = self.grow(germs, class, Some(id));
            self.nodes[id].children.push(child);
        }
        id
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> Option<&TreeNode> {
        self.nodes.get(id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root_node(&self) -> &TreeNode {
        &self.nodes[self.root]
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| !n.is_leaf())
    }

    pub fn leaf_of(&self, member: usize) -> Option<usize> {
        self.nodes.iter().find(|n| n.is_leaf() && n.members[0] == member).map(|n| n.id)
    }

    /// Interior ancestors of a node, root first.
    pub fn ancestors(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.nodes[p].parent;
        }
        out.reverse();
        out
    }

    /// Path of interior nodes selected by the section `s`.
    ///
    /// `s` matches `germs[i]` when they agree through the whole truncation of
    /// `germs[i]`; agreement cut short by the section's own truncation is an error.
    pub fn section_path(&self, germs: &[Germ], s: &Germ) -> Result<SectionPath, TreeError> {
        let root = &self.nodes[self.root];
        let mut matched = None;
        for &i in &root.members {
            if s.agree_order(&germs[i]).is_infinite() {
                if s.trunc() < germs[i].trunc() {
                    return Err(TreeError::AmbiguousSection { index: i });
                }
                matched = Some(i);
            }
        }
        if let Some(i) = matched {
            let leaf = self.leaf_of(i).expect("member has a leaf");
            return Ok(SectionPath { nodes: self.ancestors(leaf), terminal: Terminal::MatchesGerm(i) });
        }
        let mut nodes = Vec::new();
        let mut cur = self.root;
        loop {
            let node = &self.nodes[cur];
            let Some(k) = node.split_order else { break };
            nodes.push(cur);
            let next = node.children.iter().copied().find(|&c| {
                let rep = &germs[self.nodes[c].members[0]];
                s.agree_order(rep) > Order::Finite(k)
            });
            match next {
                Some(c) => cur = c,
                None => break,
            }
        }
        Ok(SectionPath { nodes, terminal: Terminal::Generic })
    }

    /// Graphviz rendering with members labelled `p1, p2, ...`.
    pub fn to_dot(&self) -> String {
        let names: Vec<String> = (0..=self.max_member()).map(|i| format!("p{}", i + 1)).collect();
        self.to_dot_named(&names)
    }

    /// Graphviz rendering; `names[i]` labels member `i`.
    pub fn to_dot_named(&self, names: &[String]) -> String {
        let mut out = String::from("digraph T {\n  node [shape=box];\n");
        for n in &self.nodes {
            let set: Vec<&str> = n.members.iter().map(|&m| names[m].as_str()).collect();
            let mut label = format!("{{{}}}", set.join(", "));
            if let Some(k) = n.split_order {
                let _ = write!(label, "\\nsplit {k}");
            }
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, label);
        }
        for n in &self.nodes {
            for c in &n.children {
                let _ = writeln!(out, "  n{} -> n{};", n.id, c);
            }
        }
        out.push_str("}\n");
        out
    }

    fn max_member(&self) -> usize {
        self.root_node().members.iter().copied().max().unwrap_or(0)
    }
}

fn min_pairwise_agreement(germs: &[Germ], members: &[usize]) -> u32 {
    let mut best = u32::MAX;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            if let Order::Finite(k) = germs[i].agree_order(&germs[j]) {
                best = best.min(k);
            }
        }
    }
    best
}

pub fn build_tree(germs: &[Germ]) -> Result<VanishingTree, TreeError> {
    VanishingTree::build(germs)
}

pub fn section_path(germs: &[Germ], s: &Germ) -> Result<SectionPath, TreeError> {
    VanishingTree::build(germs)?.section_path(germs, s)
}
