//! Non-planar rooted trees with named edges.
//!
//! A tree is a root edge carrying either nothing (the unit tree) or a vertex
//! with a finite unordered multiset of child subtrees. A vertex with no
//! children is a stump. Edges are identified by name and names are unique
//! within a tree; a vertex is identified by the name of its outgoing edge.
//!
//! Child order is not meaningful. To make structural equality and all
//! enumeration orders deterministic, children are kept sorted by their
//! label-free shape code (AHU style) with edge names as a tiebreaker, so the
//! derived `Eq`/`Ord` on [`Tree`] compare trees as unordered structures.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type EdgeName = String;

/// Default ceiling for exhaustive tree enumeration; isomorphism-class counts
/// grow quickly past this point.
pub const DEFAULT_ENUMERATION_CEILING: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTree")]
pub struct Tree {
    edge: EdgeName,
    #[serde(skip_serializing_if = "Option::is_none")]
    node: Option<TreeNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TreeNode {
    children: Vec<Tree>,
}

/// Mirror of the wire format, prior to validation and normalization.
#[derive(Deserialize)]
struct RawTree {
    edge: String,
    #[serde(default)]
    node: Option<RawNode>,
}

#[derive(Deserialize)]
struct RawNode {
    #[serde(default)]
    children: Vec<RawTree>,
}

impl TryFrom<RawTree> for Tree {
    type Error = Error;

    fn try_from(raw: RawTree) -> Result<Tree> {
        fn build(raw: RawTree) -> Result<Tree> {
            match raw.node {
                None => Ok(Tree::leaf(raw.edge)),
                Some(n) => {
                    let children = n
                        .children
                        .into_iter()
                        .map(build)
                        .collect::<Result<Vec<_>>>()?;
                    Tree::with_node(raw.edge, children)
                }
            }
        }
        build(raw)
    }
}

impl Tree {
    /// A bare edge with no vertex above it. On its own this is the unit tree.
    pub fn leaf(edge: impl Into<EdgeName>) -> Tree {
        Tree {
            edge: edge.into(),
            node: None,
        }
    }

    /// An edge carrying a vertex with the given child subtrees. An empty
    /// child list produces a stump vertex.
    pub fn with_node(edge: impl Into<EdgeName>, children: Vec<Tree>) -> Result<Tree> {
        let mut t = Tree {
            edge: edge.into(),
            node: Some(TreeNode { children }),
        };
        t.normalize();
        t.check_distinct_names()?;
        Ok(t)
    }

    /// The unit tree: a single edge named `e0`.
    pub fn unit() -> Tree {
        Tree::leaf("e0")
    }

    /// The linear tree with `n` unary vertices and edges `e0..en`, rooted at
    /// `e0`.
    pub fn linear(n: usize) -> Tree {
        let mut t = Tree::leaf(format!("e{n}"));
        for i in (0..n).rev() {
            t = Tree {
                edge: format!("e{i}"),
                node: Some(TreeNode { children: vec![t] }),
            };
        }
        t
    }

    /// The `n`-corolla: one vertex, root `e0`, leaves `e1..en`. For `n = 0`
    /// the single vertex is a stump.
    pub fn corolla(n: usize) -> Tree {
        let children = (1..=n).map(|i| Tree::leaf(format!("e{i}"))).collect();
        Tree::with_node("e0", children).expect("corolla names are distinct")
    }

    fn normalize(&mut self) {
        if let Some(node) = &mut self.node {
            for c in &mut node.children {
                c.normalize();
            }
            node.children
                .sort_by(|a, b| a.code().cmp(&b.code()).then(a.edge.cmp(&b.edge)));
        }
    }

    fn check_distinct_names(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in self.edge_names() {
            if !seen.insert(e.to_string()) {
                return Err(Error::Validation(format!("duplicate edge name `{e}`")));
            }
        }
        Ok(())
    }

    /// Label-free canonical shape code. Two trees get the same code exactly
    /// when they are isomorphic as non-planar rooted trees.
    pub fn code(&self) -> String {
        match &self.node {
            None => "(e)".to_string(),
            Some(node) => {
                let mut s = String::from("(e[");
                let mut codes: Vec<String> = node.children.iter().map(|c| c.code()).collect();
                codes.sort();
                for c in codes {
                    s.push_str(&c);
                }
                s.push_str("])");
                s
            }
        }
    }

    pub fn root_edge(&self) -> &str {
        &self.edge
    }

    /// All edge names in preorder (root first, children in canonical order).
    pub fn edge_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_edges(&mut out);
        out
    }

    fn collect_edges<'a>(&'a self, out: &mut Vec<&'a str>) {
        out.push(&self.edge);
        if let Some(node) = &self.node {
            for c in &node.children {
                c.collect_edges(out);
            }
        }
    }

    pub fn edge_set(&self) -> BTreeSet<EdgeName> {
        self.edge_names().iter().map(|s| s.to_string()).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_names().len()
    }

    pub fn contains_edge(&self, e: &str) -> bool {
        self.subtree(e).is_some()
    }

    /// The subtree hanging from edge `e` (including `e` itself).
    pub fn subtree(&self, e: &str) -> Option<&Tree> {
        if self.edge == e {
            return Some(self);
        }
        self.node
            .as_ref()?
            .children
            .iter()
            .find_map(|c| c.subtree(e))
    }

    /// The edge directly below `e`, i.e. the outgoing edge of the vertex
    /// that `e` feeds into. `None` for the root edge.
    pub fn parent_of(&self, e: &str) -> Option<&str> {
        if let Some(node) = &self.node {
            for c in &node.children {
                if c.edge == e {
                    return Some(&self.edge);
                }
                if let Some(p) = c.parent_of(e) {
                    return Some(p);
                }
            }
        }
        None
    }

    /// Whether a vertex sits at the top of edge `e`.
    pub fn has_vertex_above(&self, e: &str) -> bool {
        self.subtree(e).is_some_and(|t| t.node.is_some())
    }

    /// An edge attached to only one vertex (a leaf or the root).
    pub fn is_outer(&self, e: &str) -> bool {
        !self.is_inner(e)
    }

    /// An edge attached to two vertices.
    pub fn is_inner(&self, e: &str) -> bool {
        e != self.edge && self.has_vertex_above(e)
    }

    /// An edge with no vertex above it.
    pub fn is_leaf(&self, e: &str) -> bool {
        self.subtree(e).is_some_and(|t| t.node.is_none())
    }

    pub fn leaves(&self) -> Vec<&str> {
        self.edge_names()
            .into_iter()
            .filter(|e| self.is_leaf(e))
            .collect()
    }

    pub fn inner_edges(&self) -> Vec<&str> {
        self.edge_names()
            .into_iter()
            .filter(|e| self.is_inner(e))
            .collect()
    }

    /// Vertices in preorder, identified by their outgoing edge.
    pub fn vertices(&self) -> Vec<&str> {
        self.edge_names()
            .into_iter()
            .filter(|e| self.has_vertex_above(e))
            .collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices().len()
    }

    /// Incoming edges of the vertex at `v`, or `None` if no vertex sits there.
    pub fn vertex_inputs(&self, v: &str) -> Option<Vec<&str>> {
        let sub = self.subtree(v)?;
        let node = sub.node.as_ref()?;
        Some(node.children.iter().map(|c| c.edge.as_str()).collect())
    }

    /// Whether the vertex at `v` is a stump (a vertex with no inputs).
    pub fn is_stump(&self, v: &str) -> bool {
        self.vertex_inputs(v).is_some_and(|i| i.is_empty())
    }

    /// A tree is open when it has no stumps.
    pub fn is_open(&self) -> bool {
        self.vertices().iter().all(|v| !self.is_stump(v))
    }

    pub fn is_unit(&self) -> bool {
        self.node.is_none()
    }

    /// The path from `e` down to the root, inclusive of both ends.
    pub fn ancestors(&self, e: &str) -> Vec<EdgeName> {
        let mut path = vec![e.to_string()];
        let mut cur = e.to_string();
        while let Some(p) = self.parent_of(&cur) {
            path.push(p.to_string());
            cur = p.to_string();
        }
        path
    }

    /// Edges lie on a common directed path exactly when one is an ancestor
    /// of the other.
    pub fn comparable(&self, a: &str, b: &str) -> bool {
        a == b
            || self.ancestors(a).iter().any(|x| x == b)
            || self.ancestors(b).iter().any(|x| x == a)
    }

    pub fn depth(&self, e: &str) -> Option<usize> {
        if !self.contains_edge(e) {
            return None;
        }
        Some(self.ancestors(e).len() - 1)
    }

    /// Edges incident to the vertex at `v`: its outgoing edge plus inputs.
    pub fn incident_edges(&self, v: &str) -> Option<Vec<EdgeName>> {
        let inputs = self.vertex_inputs(v)?;
        let mut out = vec![v.to_string()];
        out.extend(inputs.iter().map(|s| s.to_string()));
        Some(out)
    }

    /// Contract the inner edge `e`, merging its two endpoint vertices.
    pub(crate) fn contracted(&self, e: &str) -> Result<Tree> {
        if !self.contains_edge(e) {
            return Err(Error::Precondition(format!("no edge named `{e}`")));
        }
        if !self.is_inner(e) {
            return Err(Error::Precondition(format!(
                "edge `{e}` is not inner (it is the root or a leaf)"
            )));
        }
        fn rebuild(t: &Tree, e: &str) -> Tree {
            let node = t.node.as_ref().map(|node| {
                let mut children = Vec::new();
                for c in &node.children {
                    if c.edge == e {
                        // Splice the contracted edge's children into this vertex.
                        let inner = c.node.as_ref().expect("inner edge has a vertex above");
                        children.extend(inner.children.iter().cloned());
                    } else {
                        children.push(rebuild(c, e));
                    }
                }
                TreeNode { children }
            });
            let mut out = Tree {
                edge: t.edge.clone(),
                node,
            };
            out.normalize();
            out
        }
        Ok(rebuild(self, e))
    }

    /// Remove the vertex at `v` together with all outer edges attached to
    /// it. Returns the smaller tree and the set of removed edges. Defined
    /// when exactly one edge incident to `v` is inner and the tree has at
    /// least two vertices.
    pub(crate) fn outer_removed(&self, v: &str) -> Result<(Tree, BTreeSet<EdgeName>)> {
        let inputs = self
            .vertex_inputs(v)
            .ok_or_else(|| Error::Precondition(format!("no vertex at edge `{v}`")))?;
        if self.num_vertices() < 2 {
            return Err(Error::Unsupported(
                "outer faces of trees with fewer than two vertices are not defined here"
                    .to_string(),
            ));
        }
        let mut incident: Vec<String> = vec![v.to_string()];
        incident.extend(inputs.iter().map(|s| s.to_string()));
        let inner: Vec<&String> = incident.iter().filter(|e| self.is_inner(e)).collect();
        if inner.len() != 1 {
            return Err(Error::Precondition(format!(
                "vertex at `{v}` has {} inner edges attached, need exactly one",
                inner.len()
            )));
        }
        let pivot = inner[0].clone();
        if pivot == v {
            // Upper vertex: delete it and its (all outer) inputs.
            let removed: BTreeSet<EdgeName> = inputs.iter().map(|s| s.to_string()).collect();
            fn rebuild(t: &Tree, v: &str) -> Tree {
                if t.edge == v {
                    return Tree::leaf(t.edge.clone());
                }
                let node = t.node.as_ref().map(|node| TreeNode {
                    children: node.children.iter().map(|c| rebuild(c, v)).collect(),
                });
                let mut out = Tree {
                    edge: t.edge.clone(),
                    node,
                };
                out.normalize();
                out
            }
            Ok((rebuild(self, v), removed))
        } else {
            // Root vertex: delete it, the root edge, and the outer inputs;
            // the unique inner input becomes the new root.
            if v != self.edge {
                return Err(Error::Internal(format!(
                    "vertex `{v}` with one inner input is not at the root"
                )));
            }
            let keep = self.subtree(&pivot).expect("pivot edge exists").clone();
            let mut removed: BTreeSet<EdgeName> = inputs
                .iter()
                .filter(|e| **e != pivot)
                .map(|s| s.to_string())
                .collect();
            removed.insert(v.to_string());
            Ok((keep, removed))
        }
    }

    /// Delete the unary vertex at `v`, merging its two edges into one fresh
    /// edge. Returns the smaller tree, the merged edge name, and the
    /// (below, above) pair that was merged.
    pub(crate) fn unary_collapsed(
        &self,
        v: &str,
    ) -> Result<(Tree, EdgeName, (EdgeName, EdgeName))> {
        let inputs = self
            .vertex_inputs(v)
            .ok_or_else(|| Error::Precondition(format!("no vertex at edge `{v}`")))?;
        if inputs.len() != 1 {
            return Err(Error::Precondition(format!(
                "vertex at `{v}` has {} inputs, degeneracies need exactly one",
                inputs.len()
            )));
        }
        let below = v.to_string();
        let above = inputs[0].to_string();
        let mut surviving = self.edge_set();
        surviving.remove(&below);
        surviving.remove(&above);
        let merged = merged_edge_name(&below, &above, &surviving);
        fn rebuild(t: &Tree, v: &str, merged: &str) -> Tree {
            if t.edge == v {
                let child = &t.node.as_ref().expect("unary vertex").children[0];
                let mut out = child.clone();
                out.edge = merged.to_string();
                out.normalize();
                return out;
            }
            let node = t.node.as_ref().map(|node| TreeNode {
                children: node
                    .children
                    .iter()
                    .map(|c| rebuild(c, v, merged))
                    .collect(),
            });
            let mut out = Tree {
                edge: t.edge.clone(),
                node,
            };
            out.normalize();
            out
        }
        Ok((rebuild(self, v, &merged), merged.clone(), (below, above)))
    }
}

/// Deterministic name for the edge produced by merging `below` and `above`.
/// Plain concatenation with `~` keeps repeated merges associative, which the
/// degeneracy interchange law needs; primes disambiguate rare collisions
/// with pre-existing names.
pub(crate) fn merged_edge_name(below: &str, above: &str, taken: &BTreeSet<EdgeName>) -> EdgeName {
    let mut name = format!("{below}~{above}");
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            None => write!(f, "{}", self.edge),
            Some(node) => {
                write!(f, "{}(", self.edge)?;
                for (i, c) in node.children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Exhaustively enumerate one representative per isomorphism class of trees
/// with at most `max_edges` edges, in a deterministic order (by edge count,
/// then by shape code). Representatives carry edge names `e0, e1, ...` in
/// preorder.
pub fn enumerate_trees(max_edges: usize) -> Result<Vec<Tree>> {
    enumerate_trees_with_ceiling(max_edges, DEFAULT_ENUMERATION_CEILING)
}

/// As [`enumerate_trees`], with an explicit safety ceiling.
pub fn enumerate_trees_with_ceiling(max_edges: usize, ceiling: usize) -> Result<Vec<Tree>> {
    if max_edges > ceiling {
        return Err(Error::Resource(format!(
            "enumeration of trees with up to {max_edges} edges exceeds the ceiling {ceiling}"
        )));
    }
    let mut by_size: Vec<Vec<Shape>> = vec![Vec::new()];
    for k in 1..=max_edges {
        let shapes = shapes_with_edges(k, &by_size);
        by_size.push(shapes);
    }
    let mut out = Vec::new();
    for shapes in by_size.iter().skip(1) {
        for s in shapes {
            out.push(s.realize());
        }
    }
    Ok(out)
}

/// Label-free tree shape used during enumeration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Shape {
    Leaf,
    Node(Vec<Shape>),
}

impl Shape {
    fn edges(&self) -> usize {
        match self {
            Shape::Leaf => 1,
            Shape::Node(children) => 1 + children.iter().map(Shape::edges).sum::<usize>(),
        }
    }

    fn code(&self) -> String {
        match self {
            Shape::Leaf => "(e)".to_string(),
            Shape::Node(children) => {
                let mut s = String::from("(e[");
                for c in children {
                    s.push_str(&c.code());
                }
                s.push_str("])");
                s
            }
        }
    }

    fn realize(&self) -> Tree {
        fn build(s: &Shape, counter: &mut usize) -> Tree {
            let name = format!("e{}", *counter);
            *counter += 1;
            match s {
                Shape::Leaf => Tree::leaf(name),
                Shape::Node(children) => {
                    let kids = children.iter().map(|c| build(c, counter)).collect();
                    Tree::with_node(name, kids).expect("generated names are distinct")
                }
            }
        }
        let mut counter = 0;
        build(self, &mut counter)
    }
}

/// All shapes with exactly `k` edges, given the shapes of every smaller size.
fn shapes_with_edges(k: usize, smaller: &[Vec<Shape>]) -> Vec<Shape> {
    let mut out = Vec::new();
    if k == 1 {
        out.push(Shape::Leaf);
        out.push(Shape::Node(Vec::new()));
        return out;
    }
    // A k-edge tree (k >= 2) is a root edge plus a vertex with a nonempty
    // multiset of child shapes whose edge counts sum to k - 1. Children are
    // enumerated as non-decreasing sequences, one per multiset.
    let mut items: Vec<&Shape> = Vec::new();
    for level in &smaller[1..k] {
        items.extend(level.iter());
    }
    items.sort_by_key(|s| (s.edges(), s.code()));
    let mut current: Vec<Shape> = Vec::new();
    fn rec(
        items: &[&Shape],
        start: usize,
        remaining: usize,
        current: &mut Vec<Shape>,
        out: &mut Vec<Shape>,
    ) {
        if remaining == 0 {
            out.push(Shape::Node(current.clone()));
            return;
        }
        for i in start..items.len() {
            let w = items[i].edges();
            if w > remaining {
                continue;
            }
            current.push(items[i].clone());
            rec(items, i, remaining - w, current, out);
            current.pop();
        }
    }
    rec(&items, 0, k - 1, &mut current, &mut out);
    out.sort_by_key(|s| s.code());
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_tree_shape() {
        let t = Tree::unit();
        assert!(t.is_unit());
        assert_eq!(t.code(), "(e)");
        assert_eq!(t.num_vertices(), 0);
        assert!(t.is_open());
    }

    #[test]
    fn relabeling_gives_same_code() {
        let a = Tree::with_node("r", vec![Tree::leaf("a"), Tree::leaf("b")]).unwrap();
        let b = Tree::with_node("s", vec![Tree::leaf("x"), Tree::leaf("y")]).unwrap();
        assert_eq!(a.code(), b.code());
        assert_ne!(a.code(), Tree::linear(2).code());
    }

    #[test]
    fn duplicate_names_rejected() {
        let e = Tree::with_node("r", vec![Tree::leaf("r")]);
        assert!(matches!(e, Err(Error::Validation(_))));
    }

    #[test]
    fn json_round_trip_and_normalization() {
        let json = r#"{"edge":"r","node":{"children":[{"edge":"b","node":{"children":[]}},{"edge":"a"}]}}"#;
        let t: Tree = serde_json::from_str(json).unwrap();
        assert_eq!(t.root_edge(), "r");
        assert!(t.is_stump("b"));
        assert!(t.is_leaf("a"));
        let back = serde_json::to_string(&t).unwrap();
        let t2: Tree = serde_json::from_str(&back).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn stump_is_not_open() {
        assert!(!Tree::corolla(0).is_open());
        assert!(Tree::linear(3).is_open());
        assert!(Tree::corolla(2).is_open());
    }

    #[test]
    fn linear_tree_structure() {
        let t = Tree::linear(2);
        assert_eq!(t.num_edges(), 3);
        assert_eq!(t.num_vertices(), 2);
        assert_eq!(t.root_edge(), "e0");
        assert!(t.is_inner("e1"));
        assert!(t.is_leaf("e2"));
        assert_eq!(t.ancestors("e2"), vec!["e2", "e1", "e0"]);
        assert!(t.comparable("e0", "e2"));
    }

    #[test]
    fn corolla_structure() {
        let t = Tree::corolla(2);
        assert_eq!(t.vertices(), vec!["e0"]);
        assert_eq!(t.vertex_inputs("e0").unwrap().len(), 2);
        assert!(!t.comparable("e1", "e2"));
        assert_eq!(Tree::linear(0), Tree::unit());
    }

    #[test]
    fn enumerate_small_counts() {
        // One edge: the unit tree and the 0-corolla.
        let one = enumerate_trees(1).unwrap();
        assert_eq!(one.len(), 2);
        assert!(one.contains(&Tree::unit()));
        assert!(one.iter().any(|t| t.code() == Tree::corolla(0).code()));
        // Two edges adds the linear tree and its stump-capped variant.
        let two = enumerate_trees(2).unwrap();
        assert_eq!(two.len(), 4);
        assert!(two.iter().any(|t| t.code() == Tree::linear(1).code()));
    }

    #[test]
    fn enumerate_respects_ceiling() {
        assert!(matches!(enumerate_trees(9), Err(Error::Resource(_))));
        assert!(enumerate_trees_with_ceiling(9, 9).is_ok());
    }

    #[test]
    fn enumerated_codes_are_distinct() {
        let trees = enumerate_trees(5).unwrap();
        let codes: BTreeSet<String> = trees.iter().map(|t| t.code()).collect();
        assert_eq!(codes.len(), trees.len());
    }

    #[test]
    fn canonical_order_is_stable() {
        let t = Tree::with_node(
            "r",
            vec![
                Tree::linear(1),
                Tree::with_node("s", vec![]).unwrap(),
                Tree::leaf("x"),
            ],
        );
        // Names e0/e1 from linear(1) clash with nothing here.
        let t = t.unwrap();
        let reparsed: Tree = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(t, reparsed);
        assert_eq!(t.code(), reparsed.code());
    }
}
