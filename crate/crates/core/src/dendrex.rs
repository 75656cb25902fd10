//! Unital *-algebra presentations attached to trees.
//!
//! A tree is first modified by inserting a vertex at the tip of every leaf
//! and one below the root, so that every edge has two endpoints. The
//! presentation then has one positive generator per edge, bounded in norm by
//! the relation that all generators sum to the unit, and a monomial of
//! generators is declared zero unless its edges lie on a common directed
//! path of the modified tree. The modification adds no edges, so a set of
//! edges lies on a common path exactly when it is a chain in the ancestor
//! order of the original tree, and the zero monomials are recorded by their
//! minimal incoherent pairs.
//!
//! Morphisms of trees act contravariantly: a degeneracy sends the merged
//! edge's generator to the sum of the two generators it came from, a face
//! sends the removed edges' generators to zero, and an isomorphism relabels.
//! [`verify_hom`] checks such generator assignments against the relations
//! mechanically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphism::TreeMorphism;
use crate::tree::{EdgeName, Tree};

/// Longest zero monomials expanded by [`verify_hom`]. Pairs already
/// characterize coherence in a tree; triples are kept as a redundancy check.
pub const ZERO_MONOMIAL_CHECK_LEN: usize = 3;

/// Presentation of a unital *-algebra by positive generators of norm at most
/// one, a unit sum relation, and zero monomials recorded through their
/// minimal incoherent pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarPresentation {
    /// Generator names in a fixed order.
    pub generators: Vec<String>,
    /// Generators whose formal sum is the unit.
    pub unit_sum: Vec<String>,
    /// Unordered generator pairs whose products vanish; stored sorted.
    pub zero_pairs: BTreeSet<(String, String)>,
    pub commutative: bool,
    /// Shape code of the originating tree, or a free-form tag. In-memory
    /// metadata only, not part of the wire format.
    #[serde(skip)]
    pub origin: Option<String>,
}

impl StarPresentation {
    pub fn has_generator(&self, g: &str) -> bool {
        self.generators.iter().any(|x| x == g)
    }

    /// Whether a nonempty generator sequence is forced to zero. Depends only
    /// on the set of generators occurring in it.
    pub fn is_zero_monomial(&self, seq: &[String]) -> Result<bool> {
        if seq.is_empty() {
            return Err(Error::Precondition("empty monomial".to_string()));
        }
        for g in seq {
            if !self.has_generator(g) {
                return Err(Error::Precondition(format!("unknown generator `{g}`")));
            }
        }
        let set: BTreeSet<&String> = seq.iter().collect();
        for a in &set {
            for b in &set {
                if a < b && self.zero_pairs.contains(&((*a).clone(), (*b).clone())) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// All incoherent subsets of the given size, in generator order.
    fn incoherent_subsets(&self, len: usize) -> Vec<Vec<String>> {
        let gens = &self.generators;
        let mut out = Vec::new();
        if len > gens.len() {
            return out;
        }
        let mut idx: Vec<usize> = (0..len).collect();
        loop {
            let subset: Vec<String> = idx.iter().map(|&i| gens[i].clone()).collect();
            if self.is_zero_monomial(&subset).unwrap_or(false) {
                out.push(subset);
            }
            let mut i = len;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if idx[i] != i + gens.len() - len {
                    idx[i] += 1;
                    for j in i + 1..len {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

/// A generator-level map between presentations. Each generator goes to a
/// formal sum of distinct target generators (the empty sum is zero).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarHom {
    pub source: StarPresentation,
    pub target: StarPresentation,
    /// Generator of the source to the set of target generators it sums over.
    pub assignment: BTreeMap<String, BTreeSet<String>>,
    pub verified: bool,
}

impl StarHom {
    pub fn new(
        source: StarPresentation,
        target: StarPresentation,
        assignment: BTreeMap<String, BTreeSet<String>>,
    ) -> StarHom {
        StarHom {
            source,
            target,
            assignment,
            verified: false,
        }
    }

    /// Stable textual key for the assignment; used for element ids.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, (k, v)) in self.assignment.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(k);
            s.push_str(">{");
            for (j, g) in v.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                s.push_str(g);
            }
            s.push('}');
        }
        s
    }

    /// Composite `outer` after `inner` (apply `inner` first).
    pub fn compose(outer: &StarHom, inner: &StarHom) -> Result<StarHom> {
        if inner.target != outer.source {
            return Err(Error::Precondition(
                "compose: presentations do not line up".to_string(),
            ));
        }
        let mut assignment = BTreeMap::new();
        for (g, mids) in &inner.assignment {
            let mut out = BTreeSet::new();
            for m in mids {
                let imgs = outer.assignment.get(m).ok_or_else(|| {
                    Error::Precondition(format!("generator `{m}` missing from outer assignment"))
                })?;
                for x in imgs {
                    if !out.insert(x.clone()) {
                        return Err(Error::Precondition(format!(
                            "composite assignment of `{g}` is not a sum of distinct generators"
                        )));
                    }
                }
            }
            assignment.insert(g.clone(), out);
        }
        Ok(StarHom {
            source: inner.source.clone(),
            target: outer.target.clone(),
            assignment,
            verified: false,
        })
    }
}

impl fmt::Display for StarHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// The tree with a vertex inserted at the tip of each leaf and one below the
/// root, presented as a plain directed graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoratedGraph {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<GraphEdgeRec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub name: String,
    /// Whether this vertex was added by the modification step.
    pub inserted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdgeRec {
    pub name: EdgeName,
    /// Upper endpoint; edges are directed from top to bottom.
    pub source: String,
    /// Lower endpoint.
    pub range: String,
}

impl DecoratedGraph {
    /// All maximal directed paths, each as the list of edges traversed from
    /// top to bottom.
    pub fn maximal_paths(&self) -> Vec<Vec<EdgeName>> {
        let mut below: BTreeMap<&str, &GraphEdgeRec> = BTreeMap::new();
        for e in &self.edges {
            below.insert(&e.source, e);
        }
        let mut tops: Vec<&GraphVertex> = self
            .vertices
            .iter()
            .filter(|v| self.edges.iter().all(|e| e.range != v.name))
            .collect();
        tops.sort_by(|a, b| a.name.cmp(&b.name));
        let mut out = Vec::new();
        for top in tops {
            let mut path = Vec::new();
            let mut cur = top.name.as_str();
            while let Some(e) = below.get(cur) {
                path.push(e.name.clone());
                cur = &e.range;
            }
            out.push(path);
        }
        out
    }
}

/// Insert a vertex at each leaf tip and one below the root, so every edge
/// has two endpoint vertices. Vertex names are derived from edge names;
/// inserted vertices are marked.
pub fn modify(t: &Tree) -> DecoratedGraph {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for e in t.edge_names() {
        let upper = if t.has_vertex_above(e) {
            format!("v_{e}")
        } else {
            format!("t_{e}")
        };
        vertices.push(GraphVertex {
            name: upper.clone(),
            inserted: !t.has_vertex_above(e),
        });
        let lower = match t.parent_of(e) {
            Some(p) => format!("v_{p}"),
            None => {
                let b = format!("b_{e}");
                vertices.push(GraphVertex {
                    name: b.clone(),
                    inserted: true,
                });
                b
            }
        };
        edges.push(GraphEdgeRec {
            name: e.to_string(),
            source: upper,
            range: lower,
        });
    }
    vertices.sort_by(|a, b| a.name.cmp(&b.name));
    vertices.dedup();
    edges.sort_by(|a, b| a.name.cmp(&b.name));
    DecoratedGraph { vertices, edges }
}

/// Whether the edges of `set` lie on a common directed path of the modified
/// tree; equivalently, whether they form a chain in the ancestor order.
pub fn coherent(t: &Tree, set: &BTreeSet<EdgeName>) -> Result<bool> {
    if set.is_empty() {
        return Err(Error::Precondition("empty edge set".to_string()));
    }
    for e in set {
        if !t.contains_edge(e) {
            return Err(Error::Precondition(format!("unknown edge `{e}`")));
        }
    }
    let edges: Vec<&EdgeName> = set.iter().collect();
    for (i, a) in edges.iter().enumerate() {
        for b in edges.iter().skip(i + 1) {
            if !t.comparable(a, b) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The noncommutative presentation attached to a tree: one positive
/// generator per edge, all summing to the unit, a monomial zero unless its
/// edges are pairwise comparable.
pub fn dendrex(t: &Tree) -> StarPresentation {
    let generators: Vec<String> = t.edge_names().iter().map(|s| s.to_string()).collect();
    let mut zero_pairs = BTreeSet::new();
    for (i, a) in generators.iter().enumerate() {
        for b in generators.iter().skip(i + 1) {
            if !t.comparable(a, b) {
                let (x, y) = if a < b { (a, b) } else { (b, a) };
                zero_pairs.insert((x.clone(), y.clone()));
            }
        }
    }
    StarPresentation {
        unit_sum: generators.clone(),
        generators,
        zero_pairs,
        commutative: false,
        origin: Some(t.code()),
    }
}

/// As [`dendrex`], with commuting generators.
pub fn abelian_dendrex(t: &Tree) -> StarPresentation {
    let mut p = dendrex(t);
    p.commutative = true;
    p
}

/// Report produced by [`verify_hom`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomReport {
    pub pass: bool,
    /// First violated relation, as text.
    pub counterexample: Option<String>,
}

impl HomReport {
    fn fail(msg: String) -> HomReport {
        HomReport {
            pass: false,
            counterexample: Some(msg),
        }
    }

    fn passed() -> HomReport {
        HomReport {
            pass: true,
            counterexample: None,
        }
    }
}

/// Check a generator assignment against the target relations: every image is
/// a sum of positive generators, the images of the unit sum add up formally
/// to the target's unit sum, and every zero monomial of the source (pairs,
/// then longer incoherent subsets up to [`ZERO_MONOMIAL_CHECK_LEN`]) expands
/// to a sum of monomials that are all zero in the target.
pub fn verify_hom(h: &StarHom) -> Result<HomReport> {
    for g in &h.source.generators {
        if !h.assignment.contains_key(g) {
            return Err(Error::Precondition(format!(
                "assignment missing source generator `{g}`"
            )));
        }
    }
    for (g, img) in &h.assignment {
        if !h.source.has_generator(g) {
            return Err(Error::Precondition(format!(
                "assignment names `{g}` which is not a source generator"
            )));
        }
        for x in img {
            if !h.target.has_generator(x) {
                return Err(Error::Precondition(format!(
                    "image of `{g}` names unknown target generator `{x}`"
                )));
            }
        }
    }

    // Unit relation: the formal sum of the unit images must be exactly the
    // target's unit sum, each generator once.
    let mut counts: BTreeMap<&String, usize> = BTreeMap::new();
    for g in &h.source.unit_sum {
        for x in &h.assignment[g] {
            *counts.entry(x).or_insert(0) += 1;
        }
    }
    for u in &h.target.unit_sum {
        match counts.get(u) {
            Some(1) => {}
            n => {
                return Ok(HomReport::fail(format!(
                    "unit relation: target generator `{u}` is hit {} times",
                    n.copied().unwrap_or(0)
                )))
            }
        }
    }
    for (x, n) in &counts {
        if *n > 0 && !h.target.unit_sum.iter().any(|u| u == *x) {
            return Ok(HomReport::fail(format!(
                "unit relation: `{x}` appears in the image sum but not in the target unit"
            )));
        }
    }

    // Commutativity is only traceable through the flag: a commutative source
    // needs a commutative target.
    if h.source.commutative && !h.target.commutative {
        return Ok(HomReport::fail(
            "source is commutative but target is not".to_string(),
        ));
    }

    // Zero monomials: expand each incoherent subset of the source through
    // the assignment; every expanded monomial must be zero in the target.
    for len in 2..=ZERO_MONOMIAL_CHECK_LEN {
        for subset in h.source.incoherent_subsets(len) {
            let images: Vec<&BTreeSet<String>> = subset.iter().map(|g| &h.assignment[g]).collect();
            let mut picks: Vec<String> = Vec::new();
            if let Some(bad) = expand_and_check(&h.target, &subset, &images, &mut picks)? {
                return Ok(HomReport::fail(bad));
            }
        }
    }
    Ok(HomReport::passed())
}

fn expand_and_check(
    target: &StarPresentation,
    subset: &[String],
    images: &[&BTreeSet<String>],
    picks: &mut Vec<String>,
) -> Result<Option<String>> {
    if picks.len() == images.len() {
        if !target.is_zero_monomial(picks)? {
            return Ok(Some(format!(
                "zero monomial {subset:?} expands to nonzero monomial {picks:?}"
            )));
        }
        return Ok(None);
    }
    for x in images[picks.len()] {
        picks.push(x.clone());
        let r = expand_and_check(target, subset, images, picks)?;
        picks.pop();
        if r.is_some() {
            return Ok(r);
        }
    }
    Ok(None)
}

/// Mark a hom verified, failing if it is not.
pub fn verified(mut h: StarHom) -> Result<StarHom> {
    let report = verify_hom(&h)?;
    if !report.pass {
        return Err(Error::Verification(
            report
                .counterexample
                .unwrap_or_else(|| "unknown relation failure".to_string()),
        ));
    }
    h.verified = true;
    Ok(h)
}

/// The contravariantly induced map on presentations: a tree morphism
/// `f: S -> T` yields a hom from the presentation of `T` to that of `S`,
/// computed by composing the generator rules of the normal form. The result
/// is verified; a failure here signals a bug, not an input error.
pub fn induced_hom(f: &TreeMorphism) -> Result<StarHom> {
    let source_pres = dendrex(f.target());
    let target_pres = dendrex(f.source());
    let nf = f.normal_form();

    // Identity on the generators of the presentation of the target tree,
    // pushed through the factorization contravariantly.
    let mut assignment: BTreeMap<String, BTreeSet<String>> = source_pres
        .generators
        .iter()
        .map(|g| (g.clone(), BTreeSet::from([g.clone()])))
        .collect();

    for step in &nf.faces {
        for img in assignment.values_mut() {
            img.retain(|x| !step.removed.contains(x));
        }
    }
    // Isomorphism part: relabel through the inverse.
    let inv: BTreeMap<&String, &String> = nf.iso.iter().map(|(k, v)| (v, k)).collect();
    for img in assignment.values_mut() {
        *img = img
            .iter()
            .map(|x| {
                inv.get(x)
                    .map(|s| (*s).clone())
                    .ok_or_else(|| Error::Internal(format!("iso misses edge `{x}`")))
            })
            .collect::<Result<BTreeSet<_>>>()?;
    }
    // Degeneracy part, unwound from the source side.
    for step in nf.degeneracies.iter().rev() {
        for img in assignment.values_mut() {
            if img.remove(&step.merged) {
                img.insert(step.below.clone());
                img.insert(step.above.clone());
            }
        }
    }

    let hom = StarHom::new(source_pres, target_pres, assignment);
    let report = verify_hom(&hom)?;
    if !report.pass {
        return Err(Error::Internal(format!(
            "induced assignment of {f} fails verification: {}",
            report.counterexample.unwrap_or_default()
        )));
    }
    Ok(StarHom {
        verified: true,
        ..hom
    })
}

/// Whether every target generator appears in the image of some source
/// generator. Requires a verified hom.
pub fn is_generator_surjective(h: &StarHom) -> Result<bool> {
    if !h.verified {
        return Err(Error::Precondition(
            "is_generator_surjective expects a verified hom".to_string(),
        ));
    }
    let hit: BTreeSet<&String> = h.assignment.values().flatten().collect();
    Ok(h.target.generators.iter().all(|g| hit.contains(g)))
}

/// Functoriality sweep: over all composable pairs of morphisms among trees
/// with at most `max_edges` edges, induced homs compose contravariantly and
/// every induced hom verifies.
pub fn functoriality_suite(max_edges: usize) -> Result<crate::identities::SuiteReport> {
    functoriality_suite_with_ceiling(max_edges, crate::tree::DEFAULT_ENUMERATION_CEILING)
}

pub fn functoriality_suite_with_ceiling(
    max_edges: usize,
    ceiling: usize,
) -> Result<crate::identities::SuiteReport> {
    use crate::identities::SuiteReport;
    use crate::morphism::hom_set;
    use crate::tree::enumerate_trees_with_ceiling;

    let trees = enumerate_trees_with_ceiling(max_edges, ceiling)?;
    let mut report = SuiteReport::default();
    let mut homs: BTreeMap<(usize, usize), Vec<TreeMorphism>> = BTreeMap::new();
    for i in 0..trees.len() {
        for j in 0..trees.len() {
            homs.insert((i, j), hom_set(&trees[i], &trees[j]));
        }
    }
    let mut induced: BTreeMap<(usize, usize, usize), StarHom> = BTreeMap::new();
    for ((i, j), fs) in &homs {
        for (k, f) in fs.iter().enumerate() {
            let h = induced_hom(f)?;
            report.instances += 1;
            induced.insert((*i, *j, k), h);
        }
    }
    for i in 0..trees.len() {
        for j in 0..trees.len() {
            for k in 0..trees.len() {
                let fs = &homs[&(i, j)];
                let gs = &homs[&(j, k)];
                for (fi, f) in fs.iter().enumerate() {
                    for (gi, g) in gs.iter().enumerate() {
                        let comp = TreeMorphism::compose(g, f).map_err(|e| {
                            Error::Internal(format!("composite failed to validate: {e}"))
                        })?;
                        let composite_hom =
                            StarHom::compose(&induced[&(i, j, fi)], &induced[&(j, k, gi)])?;
                        let direct = induced_hom(&comp)?;
                        report.instances += 1;
                        if composite_hom.assignment != direct.assignment {
                            report
                                .failures
                                .push(format!("functoriality: {f} then {g} vs composite {comp}"));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}
