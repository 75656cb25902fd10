//! Arrows of the category of trees: faces, degeneracies, isomorphisms, and
//! their composites.
//!
//! A morphism is stored as its source, target, and edge map, together with a
//! normal form: a composite of degeneracies, then an isomorphism, then a
//! composite of faces. Two morphisms with equal source, target, and edge map
//! are equal; normal forms are a chosen representative, not an identity
//! criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{EdgeName, Tree};

pub type EdgeMap = BTreeMap<EdgeName, EdgeName>;

#[derive(Clone, Debug)]
pub struct TreeMorphism {
    source: Tree,
    target: Tree,
    edge_map: EdgeMap,
    normal_form: NormalForm,
}

/// Factorization of a morphism as degeneracies, then an isomorphism, then
/// faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    /// Degeneracy steps applied to the source, in application order.
    pub degeneracies: Vec<DegeneracyStep>,
    /// Edge bijection from the degenerated source onto the face subobject.
    pub iso: EdgeMap,
    /// Face steps peeled off the target: `faces[0]` is a face of the target
    /// itself, each later step a face of the previous step's source.
    pub faces: Vec<FaceStep>,
}

impl NormalForm {
    pub fn identity_like(iso: EdgeMap) -> NormalForm {
        NormalForm {
            degeneracies: Vec::new(),
            iso,
            faces: Vec::new(),
        }
    }

    pub fn is_face_only(&self) -> bool {
        self.degeneracies.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegeneracyStep {
    /// Outgoing edge of the deleted unary vertex.
    pub below: EdgeName,
    /// Its incoming edge.
    pub above: EdgeName,
    /// Name of the merged edge.
    pub merged: EdgeName,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceStep {
    pub kind: FaceKind,
    /// Edges of the step's target that do not survive into its source.
    pub removed: BTreeSet<EdgeName>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceKind {
    /// Contraction of an inner edge.
    Inner(EdgeName),
    /// Removal of a vertex (named by its outgoing edge) and its outer edges.
    Outer(EdgeName),
    /// Inclusion of a single edge into a one-vertex tree.
    Edge(EdgeName),
}

impl FaceKind {
    fn anchor(&self) -> &str {
        match self {
            FaceKind::Inner(e) | FaceKind::Outer(e) | FaceKind::Edge(e) => e,
        }
    }
}

impl PartialEq for TreeMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.target == other.target
            && self.edge_map == other.edge_map
    }
}

impl Eq for TreeMorphism {}

impl fmt::Display for TreeMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_edge_map(&self.edge_map))
    }
}

/// Stable textual key for an edge map; used for deduplication and element ids.
pub fn render_edge_map(map: &EdgeMap) -> String {
    let mut s = String::new();
    for (i, (k, v)) in map.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(k);
        s.push('>');
        s.push_str(v);
    }
    s
}

impl TreeMorphism {
    pub fn source(&self) -> &Tree {
        &self.source
    }

    pub fn target(&self) -> &Tree {
        &self.target
    }

    pub fn edge_map(&self) -> &EdgeMap {
        &self.edge_map
    }

    pub fn normal_form(&self) -> &NormalForm {
        &self.normal_form
    }

    pub fn apply(&self, e: &str) -> Option<&str> {
        self.edge_map.get(e).map(|s| s.as_str())
    }

    pub fn image(&self) -> BTreeSet<EdgeName> {
        self.edge_map.values().cloned().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.edge_map.iter().all(|(k, v)| k == v)
    }

    /// Bijective on edges and structure preserving.
    pub fn is_isomorphism(&self) -> bool {
        self.image().len() == self.edge_map.len()
            && self.edge_map.len() == self.target.num_edges()
            && check_structural_iso(&self.source, &self.target, &self.edge_map)
    }

    pub fn inverse(&self) -> Option<TreeMorphism> {
        if !self.is_isomorphism() {
            return None;
        }
        let inv: EdgeMap = self
            .edge_map
            .iter()
            .map(|(k, v)| (v.clone(), k.clone()))
            .collect();
        Some(TreeMorphism {
            source: self.target.clone(),
            target: self.source.clone(),
            normal_form: NormalForm::identity_like(inv.clone()),
            edge_map: inv,
        })
    }

    pub fn identity(t: &Tree) -> TreeMorphism {
        let map: EdgeMap = t
            .edge_names()
            .into_iter()
            .map(|e| (e.to_string(), e.to_string()))
            .collect();
        TreeMorphism {
            source: t.clone(),
            target: t.clone(),
            normal_form: NormalForm::identity_like(map.clone()),
            edge_map: map,
        }
    }

    /// Build and validate a morphism from raw data. The edge map must be a
    /// legal arrow of the tree category; the canonical normal form is
    /// computed as a side effect.
    pub fn new(source: Tree, target: Tree, edge_map: EdgeMap) -> Result<TreeMorphism> {
        let nf = factorize(&source, &target, &edge_map)?;
        Ok(TreeMorphism {
            source,
            target,
            edge_map,
            normal_form: nf,
        })
    }

    /// The inner face contracting edge `e`: an arrow from the contracted
    /// tree into `t`.
    pub fn inner_face(t: &Tree, e: &str) -> Result<TreeMorphism> {
        let contracted = t.contracted(e)?;
        let map: EdgeMap = contracted
            .edge_names()
            .into_iter()
            .map(|x| (x.to_string(), x.to_string()))
            .collect();
        let mut removed = BTreeSet::new();
        removed.insert(e.to_string());
        Ok(TreeMorphism {
            normal_form: NormalForm {
                degeneracies: Vec::new(),
                iso: map.clone(),
                faces: vec![FaceStep {
                    kind: FaceKind::Inner(e.to_string()),
                    removed,
                }],
            },
            source: contracted,
            target: t.clone(),
            edge_map: map,
        })
    }

    /// The outer face deleting the vertex at `v` and its outer edges.
    pub fn outer_face(t: &Tree, v: &str) -> Result<TreeMorphism> {
        let (smaller, removed) = t.outer_removed(v)?;
        let map: EdgeMap = smaller
            .edge_names()
            .into_iter()
            .map(|x| (x.to_string(), x.to_string()))
            .collect();
        Ok(TreeMorphism {
            normal_form: NormalForm {
                degeneracies: Vec::new(),
                iso: map.clone(),
                faces: vec![FaceStep {
                    kind: FaceKind::Outer(v.to_string()),
                    removed,
                }],
            },
            source: smaller,
            target: t.clone(),
            edge_map: map,
        })
    }

    /// The face of a one-vertex tree that picks out the edge `e`.
    pub fn edge_face(t: &Tree, e: &str) -> Result<TreeMorphism> {
        if t.num_vertices() != 1 {
            return Err(Error::Precondition(
                "edge faces exist only for one-vertex trees".to_string(),
            ));
        }
        if !t.contains_edge(e) {
            return Err(Error::Precondition(format!("no edge named `{e}`")));
        }
        let source = Tree::leaf(e);
        let mut map = EdgeMap::new();
        map.insert(e.to_string(), e.to_string());
        let removed: BTreeSet<EdgeName> = t.edge_set().into_iter().filter(|x| x != e).collect();
        Ok(TreeMorphism {
            normal_form: NormalForm {
                degeneracies: Vec::new(),
                iso: map.clone(),
                faces: vec![FaceStep {
                    kind: FaceKind::Edge(e.to_string()),
                    removed,
                }],
            },
            source,
            target: t.clone(),
            edge_map: map,
        })
    }

    /// The degeneracy deleting the unary vertex at `v`: an arrow from `t`
    /// to the collapsed tree, merging the vertex's two edges.
    pub fn degeneracy(t: &Tree, v: &str) -> Result<TreeMorphism> {
        let (smaller, merged, (below, above)) = t.unary_collapsed(v)?;
        let mut map = EdgeMap::new();
        for e in t.edge_names() {
            if e == below || e == above {
                map.insert(e.to_string(), merged.clone());
            } else {
                map.insert(e.to_string(), e.to_string());
            }
        }
        let iso: EdgeMap = smaller
            .edge_names()
            .into_iter()
            .map(|x| (x.to_string(), x.to_string()))
            .collect();
        Ok(TreeMorphism {
            source: t.clone(),
            target: smaller,
            edge_map: map,
            normal_form: NormalForm {
                degeneracies: vec![DegeneracyStep {
                    below,
                    above,
                    merged,
                }],
                iso,
                faces: Vec::new(),
            },
        })
    }

    /// All elementary faces of `t`: inner faces for inner edges, outer faces
    /// for vertices with exactly one inner edge attached, and, for one-vertex
    /// trees, the edge inclusions. The unit tree has none.
    pub fn elementary_faces(t: &Tree) -> Vec<TreeMorphism> {
        let mut out = Vec::new();
        if t.num_vertices() == 0 {
            return out;
        }
        if t.num_vertices() == 1 {
            for e in t.edge_names() {
                out.push(TreeMorphism::edge_face(t, e).expect("edge face of a corolla"));
            }
            return out;
        }
        for e in t.inner_edges() {
            out.push(TreeMorphism::inner_face(t, e).expect("inner edge"));
        }
        for v in t.vertices() {
            if let Ok(m) = TreeMorphism::outer_face(t, v) {
                out.push(m);
            }
        }
        out
    }

    /// All degeneracies of `t`, one per unary vertex.
    pub fn degeneracies_of(t: &Tree) -> Vec<TreeMorphism> {
        t.vertices()
            .into_iter()
            .filter(|v| t.vertex_inputs(v).is_some_and(|i| i.len() == 1))
            .map(|v| TreeMorphism::degeneracy(t, v).expect("unary vertex"))
            .collect()
    }

    /// Composite `g` after `f`. Requires `target(f) = source(g)`.
    pub fn compose(g: &TreeMorphism, f: &TreeMorphism) -> Result<TreeMorphism> {
        if f.target != g.source {
            return Err(Error::Precondition(
                "compose: target of the first-applied morphism differs from source of the second"
                    .to_string(),
            ));
        }
        let mut map = EdgeMap::new();
        for (k, v) in &f.edge_map {
            let w = g
                .edge_map
                .get(v)
                .ok_or_else(|| Error::Internal(format!("edge `{v}` missing from composite")))?;
            map.insert(k.clone(), w.clone());
        }
        TreeMorphism::new(f.source.clone(), g.target.clone(), map)
    }
}

/// Structure-preserving check for a candidate edge bijection.
fn check_structural_iso(s: &Tree, t: &Tree, map: &EdgeMap) -> bool {
    match map.get(s.root_edge()) {
        Some(r) if r == t.root_edge() => {}
        _ => return false,
    }
    fn rec(s: &Tree, t: &Tree, map: &EdgeMap) -> bool {
        let (s_inputs, t_inputs) = match (
            s.vertex_inputs(s.root_edge()),
            t.vertex_inputs(t.root_edge()),
        ) {
            (None, None) => return true,
            (Some(a), Some(b)) => (a, b),
            _ => return false,
        };
        if s_inputs.len() != t_inputs.len() {
            return false;
        }
        for c in s_inputs {
            let Some(mapped) = map.get(c) else {
                return false;
            };
            if !t_inputs.contains(&mapped.as_str()) {
                return false;
            }
            let sc = s.subtree(c).expect("child edge");
            let tc = t.subtree(mapped).expect("mapped child edge");
            if !rec(sc, tc, map) {
                return false;
            }
        }
        true
    }
    rec(s, t, map)
}

/// Every isomorphism `s -> t`, in a deterministic order. Empty when the
/// trees have different shapes.
pub fn all_isomorphisms(s: &Tree, t: &Tree) -> Vec<TreeMorphism> {
    if s.code() != t.code() {
        return Vec::new();
    }
    let assignments = iso_assignments(s, t);
    assignments
        .into_iter()
        .map(|pairs| {
            let map: EdgeMap = pairs.into_iter().collect();
            TreeMorphism {
                source: s.clone(),
                target: t.clone(),
                normal_form: NormalForm::identity_like(map.clone()),
                edge_map: map,
            }
        })
        .collect()
}

fn iso_assignments(s: &Tree, t: &Tree) -> Vec<Vec<(EdgeName, EdgeName)>> {
    let base = (s.root_edge().to_string(), t.root_edge().to_string());
    let s_inputs = s.vertex_inputs(s.root_edge());
    let t_inputs = t.vertex_inputs(t.root_edge());
    match (s_inputs, t_inputs) {
        (None, None) => vec![vec![base]],
        (Some(si), Some(ti)) => {
            // Group children by shape code; both sides are already in
            // canonical order, so equal-code blocks align.
            let s_children: Vec<&Tree> = si.iter().map(|e| s.subtree(e).unwrap()).collect();
            let t_children: Vec<&Tree> = ti.iter().map(|e| t.subtree(e).unwrap()).collect();
            let mut blocks: Vec<(Vec<&Tree>, Vec<&Tree>)> = Vec::new();
            let mut i = 0;
            while i < s_children.len() {
                let code = s_children[i].code();
                let sa: Vec<&Tree> = s_children
                    .iter()
                    .filter(|c| c.code() == code)
                    .cloned()
                    .collect();
                let tb: Vec<&Tree> = t_children
                    .iter()
                    .filter(|c| c.code() == code)
                    .cloned()
                    .collect();
                if sa.len() != tb.len() {
                    return Vec::new();
                }
                i += sa.len();
                blocks.push((sa, tb));
            }
            let mut results: Vec<Vec<(EdgeName, EdgeName)>> = vec![vec![base]];
            for (sa, tb) in blocks {
                let mut block_options: Vec<Vec<(EdgeName, EdgeName)>> = Vec::new();
                for perm in permutations(sa.len()) {
                    // One candidate block matching: sa[i] -> tb[perm[i]].
                    let mut per_pair: Vec<Vec<Vec<(EdgeName, EdgeName)>>> = Vec::new();
                    for (i, sc) in sa.iter().enumerate() {
                        per_pair.push(iso_assignments(sc, tb[perm[i]]));
                    }
                    let mut combos: Vec<Vec<(EdgeName, EdgeName)>> = vec![Vec::new()];
                    for options in per_pair {
                        let mut next = Vec::new();
                        for c in &combos {
                            for o in &options {
                                let mut merged = c.clone();
                                merged.extend(o.iter().cloned());
                                next.push(merged);
                            }
                        }
                        combos = next;
                    }
                    block_options.extend(combos);
                }
                let mut next = Vec::new();
                for r in &results {
                    for b in &block_options {
                        let mut merged = r.clone();
                        merged.extend(b.iter().cloned());
                        next.push(merged);
                    }
                }
                results = next;
            }
            results
        }
        _ => Vec::new(),
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn rec(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            rec(items, k + 1, out);
            items.swap(k, i);
        }
    }
    rec(&mut items, 0, &mut out);
    out.sort();
    out
}

/// The deterministic isomorphism `s -> t`, if the trees are isomorphic.
pub fn isomorphism(s: &Tree, t: &Tree) -> Option<TreeMorphism> {
    all_isomorphisms(s, t).into_iter().next()
}

/// All automorphisms of `t`, identity included, in a deterministic order.
pub fn automorphisms(t: &Tree) -> Vec<TreeMorphism> {
    all_isomorphisms(t, t)
}

/// Compute the canonical normal form of an edge map, validating along the
/// way that it is a legal morphism.
fn factorize(source: &Tree, target: &Tree, map: &EdgeMap) -> Result<NormalForm> {
    let source_edges = source.edge_set();
    if map.len() != source_edges.len() || !map.keys().all(|k| source_edges.contains(k)) {
        return Err(Error::Validation(
            "edge map must be total on the source edges".to_string(),
        ));
    }
    for v in map.values() {
        if !target.contains_edge(v) {
            return Err(Error::Validation(format!(
                "edge map hits `{v}` which is not an edge of the target"
            )));
        }
    }

    // Degeneracy part: collapse unary vertices whose two edges share an
    // image, in bottom-up (depth, name) order, until the map is injective.
    let mut cur = source.clone();
    let mut cur_map = map.clone();
    let mut steps = Vec::new();
    loop {
        let mut candidate: Option<(usize, String)> = None;
        for v in cur.vertices() {
            let inputs = cur.vertex_inputs(v).unwrap();
            if inputs.len() != 1 {
                continue;
            }
            if cur_map.get(v) != cur_map.get(inputs[0]) {
                continue;
            }
            let d = cur.depth(v).unwrap();
            let key = (d, v.to_string());
            if candidate.as_ref().is_none_or(|c| key < *c) {
                candidate = Some(key);
            }
        }
        let Some((_, v)) = candidate else {
            break;
        };
        let (next, merged, (below, above)) = cur.unary_collapsed(&v)?;
        let image = cur_map
            .get(&below)
            .expect("edge present in running map")
            .clone();
        cur_map.remove(&below);
        cur_map.remove(&above);
        cur_map.insert(merged.clone(), image);
        steps.push(DegeneracyStep {
            below,
            above,
            merged,
        });
        cur = next;
    }
    let image: BTreeSet<EdgeName> = cur_map.values().cloned().collect();
    if image.len() != cur_map.len() {
        return Err(Error::Validation(
            "edge map identifies edges that no chain of degeneracies can merge".to_string(),
        ));
    }

    // Face part: peel elementary faces off the target until only the image
    // survives, landing on a tree isomorphic to the degenerated source.
    let face_path = find_face_path(target, &image, &cur, &cur_map).ok_or_else(|| {
        Error::Validation(
            "image of the edge map is not reachable by elementary faces of the target".to_string(),
        )
    })?;

    Ok(NormalForm {
        degeneracies: steps,
        iso: cur_map,
        faces: face_path,
    })
}

/// Depth-first search through face subobjects of `target` whose edges
/// contain `image`, looking for one isomorphic to `shrunk` via `phi`.
/// Distinct subobjects can share an edge set (stump removals delete no
/// edges), so visited states are keyed by the whole tree.
fn find_face_path(
    target: &Tree,
    image: &BTreeSet<EdgeName>,
    shrunk: &Tree,
    phi: &EdgeMap,
) -> Option<Vec<FaceStep>> {
    let mut visited: BTreeSet<Tree> = BTreeSet::new();
    fn dfs(
        cur: &Tree,
        image: &BTreeSet<EdgeName>,
        shrunk: &Tree,
        phi: &EdgeMap,
        visited: &mut BTreeSet<Tree>,
        path: &mut Vec<FaceStep>,
    ) -> bool {
        if cur.edge_set() == *image && check_structural_iso(shrunk, cur, phi) {
            return true;
        }
        if !visited.insert(cur.clone()) {
            return false;
        }
        let mut faces = TreeMorphism::elementary_faces(cur);
        faces.sort_by(|a, b| {
            let ka = &a.normal_form.faces[0].kind;
            let kb = &b.normal_form.faces[0].kind;
            ka.anchor().cmp(kb.anchor()).then_with(|| ka.cmp(kb))
        });
        for face in faces {
            let step = face.normal_form.faces[0].clone();
            if step.removed.iter().any(|e| image.contains(e)) {
                continue;
            }
            path.push(step);
            if dfs(face.source(), image, shrunk, phi, visited, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    if dfs(target, image, shrunk, phi, &mut visited, &mut path) {
        Some(path)
    } else {
        None
    }
}

impl FaceKind {
    /// Apply this face to `t`, returning the face morphism, if defined.
    pub fn applied_to(&self, t: &Tree) -> Result<TreeMorphism> {
        match self {
            FaceKind::Inner(e) => TreeMorphism::inner_face(t, e),
            FaceKind::Outer(v) => TreeMorphism::outer_face(t, v),
            FaceKind::Edge(e) => TreeMorphism::edge_face(t, e),
        }
    }
}

/// Rebuild the edge map encoded by a normal form, for cross-checking.
pub fn recompose(source: &Tree, target: &Tree, nf: &NormalForm) -> Result<EdgeMap> {
    let mut cur = source.clone();
    let mut map: EdgeMap = cur
        .edge_names()
        .into_iter()
        .map(|e| (e.to_string(), e.to_string()))
        .collect();
    for step in &nf.degeneracies {
        let m = TreeMorphism::degeneracy(&cur, &step.below)?;
        if m.normal_form.degeneracies[0] != *step {
            return Err(Error::Internal(
                "degeneracy step does not match the tree it is applied to".to_string(),
            ));
        }
        for v in map.values_mut() {
            if *v == step.below || *v == step.above {
                *v = step.merged.clone();
            }
        }
        cur = m.target().clone();
    }
    for (k, v) in map.iter_mut() {
        let w = nf
            .iso
            .get(v)
            .ok_or_else(|| Error::Internal(format!("iso missing edge `{v}` (source `{k}`)")))?;
        *v = w.clone();
    }
    // Face steps are name-preserving inclusions, so they leave the map alone;
    // walk them anyway to confirm they apply.
    let mut down = target.clone();
    for step in &nf.faces {
        let m = step.kind.applied_to(&down)?;
        down = m.source().clone();
    }
    Ok(map)
}

/// All morphisms `s -> t`, enumerated through normal forms and deduplicated
/// by edge map, in a deterministic order.
pub fn hom_set(s: &Tree, t: &Tree) -> Vec<TreeMorphism> {
    // Quotients of s by composites of degeneracies.
    let mut quotients: Vec<(Tree, EdgeMap)> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let id: EdgeMap = s
        .edge_names()
        .into_iter()
        .map(|e| (e.to_string(), e.to_string()))
        .collect();
    let mut queue = vec![(s.clone(), id)];
    while let Some((tree, map)) = queue.pop() {
        if !seen.insert(render_edge_map(&map)) {
            continue;
        }
        for d in TreeMorphism::degeneracies_of(&tree) {
            let mut next = map.clone();
            for v in next.values_mut() {
                let step = &d.normal_form.degeneracies[0];
                if *v == step.below || *v == step.above {
                    *v = step.merged.clone();
                }
            }
            queue.push((d.target().clone(), next));
        }
        quotients.push((tree, map));
    }

    // Face subobjects of t. Distinct subobjects may share an edge set, so
    // deduplicate by tree.
    let mut subs: Vec<Tree> = Vec::new();
    let mut seen_subs: BTreeSet<Tree> = BTreeSet::new();
    let mut queue = vec![t.clone()];
    while let Some(tree) = queue.pop() {
        if !seen_subs.insert(tree.clone()) {
            continue;
        }
        for f in TreeMorphism::elementary_faces(&tree) {
            queue.push(f.source().clone());
        }
        subs.push(tree);
    }

    let mut by_map: BTreeMap<String, EdgeMap> = BTreeMap::new();
    for (q, qmap) in &quotients {
        for sub in &subs {
            if q.code() != sub.code() {
                continue;
            }
            for iso in all_isomorphisms(q, sub) {
                let mut full = EdgeMap::new();
                for (k, v) in qmap {
                    full.insert(k.clone(), iso.edge_map[v].clone());
                }
                by_map.entry(render_edge_map(&full)).or_insert(full);
            }
        }
    }
    by_map
        .into_values()
        .map(|map| {
            TreeMorphism::new(s.clone(), t.clone(), map)
                .expect("enumerated edge maps are valid morphisms")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_normal_form_is_empty() {
        let t = Tree::linear(2);
        let id = TreeMorphism::identity(&t);
        assert!(id.normal_form().degeneracies.is_empty());
        assert!(id.normal_form().faces.is_empty());
        let rebuilt = TreeMorphism::new(t.clone(), t.clone(), id.edge_map().clone()).unwrap();
        assert!(rebuilt.normal_form().degeneracies.is_empty());
        assert!(rebuilt.normal_form().faces.is_empty());
        assert_eq!(rebuilt, id);
    }

    #[test]
    fn unit_tree_has_no_inner_faces() {
        let t = Tree::unit();
        assert!(TreeMorphism::inner_face(&t, "e0").is_err());
        assert!(TreeMorphism::elementary_faces(&t).is_empty());
    }

    #[test]
    fn inner_face_of_linear_tree() {
        // Contracting the middle edge of the 2-step linear tree gives the
        // 1-step one, matching the middle simplicial face.
        let t = Tree::linear(2);
        let f = TreeMorphism::inner_face(&t, "e1").unwrap();
        assert_eq!(f.source().num_edges(), 2);
        assert_eq!(f.source().code(), Tree::linear(1).code());
        assert_eq!(f.apply("e0"), Some("e0"));
        assert_eq!(f.apply("e2"), Some("e2"));
    }

    #[test]
    fn inner_face_merges_vertices() {
        // Two-level tree: u carries leaves a and b atop the inner edge e,
        // w carries d atop c, and e, c feed the root vertex.
        let u = Tree::with_node("e", vec![Tree::leaf("a"), Tree::leaf("b")]).unwrap();
        let w = Tree::with_node("c", vec![Tree::leaf("d")]).unwrap();
        let t = Tree::with_node("f", vec![u, w]).unwrap();
        let m = TreeMorphism::inner_face(&t, "e").unwrap();
        let src = m.source();
        assert_eq!(src.edge_set().len(), 5);
        assert!(!src.contains_edge("e"));
        // a and b now feed the root vertex directly.
        let inputs = src.vertex_inputs("f").unwrap();
        assert_eq!(inputs.len(), 3);
        for e in ["a", "b", "c"] {
            assert!(inputs.contains(&e));
        }
    }

    #[test]
    fn outer_face_top_vertex() {
        // Removing an upper vertex deletes its leaves and exposes its edge.
        let v = Tree::with_node("b", vec![Tree::leaf("e"), Tree::leaf("f")]).unwrap();
        let w = Tree::with_node("c", vec![Tree::leaf("d")]).unwrap();
        let t = Tree::with_node("a", vec![v, w]).unwrap();
        let m = TreeMorphism::outer_face(&t, "b").unwrap();
        assert_eq!(
            m.source().edge_set(),
            ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect()
        );
        assert!(m.source().is_leaf("b"));
    }

    #[test]
    fn outer_face_root_vertex() {
        // Removing the root vertex of the 2-step linear tree drops the root
        // edge, matching the bottom simplicial face.
        let t = Tree::linear(2);
        let m = TreeMorphism::outer_face(&t, "e0").unwrap();
        assert_eq!(m.source().root_edge(), "e1");
        assert_eq!(m.source().num_edges(), 2);
    }

    #[test]
    fn outer_face_removes_stump() {
        // A stump with an inner outgoing edge can be chopped; no edges are
        // removed, the edge below just becomes a leaf.
        let stump = Tree::with_node("a", vec![]).unwrap();
        let t = Tree::with_node("r", vec![stump, Tree::leaf("b")]).unwrap();
        let m = TreeMorphism::outer_face(&t, "a").unwrap();
        assert_eq!(m.source().edge_set(), t.edge_set());
        assert!(m.source().is_leaf("a"));
        assert_ne!(m.source(), &t);
    }

    #[test]
    fn outer_face_single_vertex_unsupported() {
        let t = Tree::linear(1);
        let err = TreeMorphism::outer_face(&t, "e0");
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }

    #[test]
    fn degeneracy_smallest_case() {
        let t = Tree::linear(1);
        let m = TreeMorphism::degeneracy(&t, "e0").unwrap();
        assert!(m.target().is_unit());
        assert_eq!(m.apply("e0"), m.apply("e1"));
    }

    #[test]
    fn degeneracy_requires_unary_vertex() {
        let t = Tree::corolla(2);
        assert!(TreeMorphism::degeneracy(&t, "e0").is_err());
    }

    #[test]
    fn corolla_edge_faces() {
        let t = Tree::corolla(2);
        let faces = TreeMorphism::elementary_faces(&t);
        assert_eq!(faces.len(), 3);
        for f in &faces {
            assert!(f.source().is_unit());
        }
    }

    #[test]
    fn isomorphism_examples() {
        let a = Tree::with_node("r", vec![Tree::leaf("a"), Tree::leaf("b")]).unwrap();
        let b = Tree::with_node("s", vec![Tree::leaf("x"), Tree::leaf("y")]).unwrap();
        let iso = isomorphism(&a, &b).unwrap();
        assert_eq!(iso.apply("r"), Some("s"));
        assert!(isomorphism(&a, &Tree::linear(2)).is_none());
        let id = isomorphism(&a, &a).unwrap();
        assert!(id.is_identity());
    }

    #[test]
    fn corolla_automorphism_count() {
        for n in 0..=4 {
            let t = Tree::corolla(n);
            let auts = automorphisms(&t);
            let expected: usize = (1..=n).product::<usize>().max(1);
            assert_eq!(auts.len(), expected, "corolla {n}");
            assert!(auts.iter().any(|a| a.is_identity()));
        }
        for n in 0..=4 {
            assert_eq!(automorphisms(&Tree::linear(n)).len(), 1, "linear {n}");
        }
    }

    #[test]
    fn hom_set_from_unit_counts_edges() {
        for t in [Tree::linear(3), Tree::corolla(3), Tree::corolla(0)] {
            let homs = hom_set(&Tree::unit(), &t);
            assert_eq!(homs.len(), t.num_edges(), "tree {}", t.code());
        }
    }

    #[test]
    fn hom_set_linear_matches_monotone_counts() {
        fn binom(n: usize, k: usize) -> usize {
            if k > n {
                return 0;
            }
            let mut r = 1usize;
            for i in 0..k {
                r = r * (n - i) / (i + 1);
            }
            r
        }
        for m in 0..=3 {
            for n in 0..=3 {
                let count = hom_set(&Tree::linear(m), &Tree::linear(n)).len();
                assert_eq!(count, binom(n + m + 1, m + 1), "hom(L{m}, L{n})");
            }
        }
    }

    #[test]
    fn compose_identity_neutral() {
        let t = Tree::linear(2);
        let f = TreeMorphism::inner_face(&t, "e1").unwrap();
        let idt = TreeMorphism::identity(&t);
        let ids = TreeMorphism::identity(f.source());
        assert_eq!(TreeMorphism::compose(&idt, &f).unwrap(), f);
        assert_eq!(TreeMorphism::compose(&f, &ids).unwrap(), f);
    }

    #[test]
    fn compose_checks_endpoints() {
        let f = TreeMorphism::identity(&Tree::unit());
        let g = TreeMorphism::identity(&Tree::linear(1));
        assert!(TreeMorphism::compose(&g, &f).is_err());
    }

    #[test]
    fn normal_form_recovers_mixed_morphism() {
        // Collapse the middle vertex of the 3-step linear tree and land in a
        // proper face of itself: one degeneracy, one face, and the bijection
        // in between.
        let t = Tree::linear(3);
        let mut map = EdgeMap::new();
        map.insert("e0".into(), "e0".into());
        map.insert("e1".into(), "e1".into());
        map.insert("e2".into(), "e1".into());
        map.insert("e3".into(), "e2".into());
        let m = TreeMorphism::new(t.clone(), t.clone(), map).unwrap();
        assert_eq!(m.normal_form().degeneracies.len(), 1);
        assert!(!m.normal_form().faces.is_empty());
        let rebuilt = recompose(m.source(), m.target(), m.normal_form()).unwrap();
        assert_eq!(&rebuilt, m.edge_map());
    }

    #[test]
    fn degeneracy_then_adjacent_face_is_iso() {
        // Composing a degeneracy with the inner face of an adjacent edge
        // yields the canonical relabeling isomorphism.
        let t = Tree::linear(3);
        let sigma = TreeMorphism::degeneracy(&t, "e1").unwrap();
        let face = TreeMorphism::inner_face(&t, "e2").unwrap();
        let comp = TreeMorphism::compose(&sigma, &face).unwrap();
        assert!(comp.is_isomorphism());
        assert_eq!(comp.apply("e1"), Some("e1~e2"));
    }

    #[test]
    fn invalid_edge_maps_rejected() {
        let t = Tree::corolla(2);
        // Identifying the two leaves is not a degeneracy collapse.
        let mut map = EdgeMap::new();
        map.insert("e0".into(), "e0".into());
        map.insert("e1".into(), "e1".into());
        map.insert("e2".into(), "e1".into());
        assert!(TreeMorphism::new(t.clone(), t.clone(), map).is_err());
        // Partial maps are rejected.
        let mut partial = EdgeMap::new();
        partial.insert("e0".into(), "e0".into());
        assert!(TreeMorphism::new(t.clone(), t.clone(), partial).is_err());
    }

    #[test]
    fn stump_and_leaf_sources_disambiguated() {
        // Both the identity of C0 and the edge inclusion into C0 exist; the
        // factorization must find each from its edge map.
        let c0 = Tree::corolla(0);
        let id = TreeMorphism::new(c0.clone(), c0.clone(), {
            let mut m = EdgeMap::new();
            m.insert("e0".into(), "e0".into());
            m
        })
        .unwrap();
        assert!(id.normal_form().faces.is_empty());
        let unit = Tree::leaf("e0");
        let incl = TreeMorphism::new(unit, c0.clone(), {
            let mut m = EdgeMap::new();
            m.insert("e0".into(), "e0".into());
            m
        })
        .unwrap();
        assert_eq!(incl.normal_form().faces.len(), 1);
    }
}
