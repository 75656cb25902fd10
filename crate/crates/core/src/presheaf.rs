//! Finite truncations of presheaves on the category of trees.
//!
//! A truncated presheaf stores a finite set of elements over each
//! isomorphism class of trees with at most `bound` edges, together with a
//! contravariant action of every morphism between those classes. The shared
//! [`OmegaSite`] carries the classes and their full hom sets. Three backings
//! cover everything built here: hom-valued presheaves (representables and
//! their subobjects, acting by precomposition), probe presheaves (edge
//! homomorphism sets, acting by composition with induced presentation maps),
//! and explicit tables.
//!
//! Validation checks that identities act as identities, that every action
//! lands inside the recorded values, and that the action of a composite is
//! the composite of the actions; the face and degeneracy interchange laws
//! are instances of the last check.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dendrex::StarPresentation;
use crate::error::{Error, Result};
use crate::morphism::{self, render_edge_map, EdgeMap, TreeMorphism};
use crate::tree::{enumerate_trees_with_ceiling, Tree, DEFAULT_ENUMERATION_CEILING};

/// Generator assignment carried by probe elements.
pub type Assignment = BTreeMap<String, BTreeSet<String>>;

/// Key of a morphism in a site: source class, target class, position.
pub type MorKey = (usize, usize, usize);

/// The truncation of the category of trees at a fixed edge bound: canonical
/// representatives of all isomorphism classes and every morphism between
/// them.
#[derive(Debug)]
pub struct OmegaSite {
    bound: usize,
    trees: Vec<Tree>,
    code_index: BTreeMap<String, usize>,
    homs: BTreeMap<(usize, usize), Vec<TreeMorphism>>,
    by_map: BTreeMap<(usize, usize, String), usize>,
    /// Positions of morphisms whose normal form has at most one elementary
    /// step; every morphism is a composite of these.
    generators: BTreeMap<(usize, usize), Vec<usize>>,
}

impl OmegaSite {
    pub fn new(bound: usize) -> Result<Arc<OmegaSite>> {
        OmegaSite::with_ceiling(bound, DEFAULT_ENUMERATION_CEILING)
    }

    pub fn with_ceiling(bound: usize, ceiling: usize) -> Result<Arc<OmegaSite>> {
        let trees = enumerate_trees_with_ceiling(bound, ceiling)?;
        let mut code_index = BTreeMap::new();
        for (i, t) in trees.iter().enumerate() {
            code_index.insert(t.code(), i);
        }
        let mut homs = BTreeMap::new();
        let mut by_map = BTreeMap::new();
        let mut generators = BTreeMap::new();
        for i in 0..trees.len() {
            for j in 0..trees.len() {
                let fs = morphism::hom_set(&trees[i], &trees[j]);
                let mut gens = Vec::new();
                for (k, f) in fs.iter().enumerate() {
                    by_map.insert((i, j, render_edge_map(f.edge_map())), k);
                    let nf = f.normal_form();
                    if nf.faces.len() + nf.degeneracies.len() <= 1 {
                        gens.push(k);
                    }
                }
                if !gens.is_empty() {
                    generators.insert((i, j), gens);
                }
                homs.insert((i, j), fs);
            }
        }
        Ok(Arc::new(OmegaSite {
            bound,
            trees,
            code_index,
            homs,
            by_map,
            generators,
        }))
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Index of the class of `t`, if it fits the bound.
    pub fn class_of(&self, t: &Tree) -> Option<usize> {
        self.code_index.get(&t.code()).copied()
    }

    pub fn hom(&self, i: usize, j: usize) -> &[TreeMorphism] {
        &self.homs[&(i, j)]
    }

    pub fn morphism(&self, key: MorKey) -> &TreeMorphism {
        &self.homs[&(key.0, key.1)][key.2]
    }

    /// Look up a morphism between classes by its edge map.
    pub fn find(&self, i: usize, j: usize, map: &EdgeMap) -> Option<MorKey> {
        self.by_map
            .get(&(i, j, render_edge_map(map)))
            .map(|k| (i, j, *k))
    }

    /// Positions of the generating morphisms (at most one elementary step)
    /// from class `i` to class `j`.
    pub fn generator_positions(&self, i: usize, j: usize) -> &[usize] {
        self.generators
            .get(&(i, j))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// The composite of two site morphisms, as a site morphism.
    pub fn compose(&self, f: MorKey, g: MorKey) -> Result<MorKey> {
        if f.1 != g.0 {
            return Err(Error::Precondition(
                "site compose: keys do not chain".to_string(),
            ));
        }
        let fm = self.morphism(f).edge_map();
        let gm = self.morphism(g).edge_map();
        let mut map = EdgeMap::new();
        for (k, v) in fm {
            let w = gm
                .get(v)
                .ok_or_else(|| Error::Internal(format!("dangling edge `{v}` in composite")))?;
            map.insert(k.clone(), w.clone());
        }
        self.find(f.0, g.1, &map)
            .ok_or_else(|| Error::Internal("composite missing from site".to_string()))
    }
}

#[derive(Clone, Debug)]
enum Backing {
    /// Elements are morphisms into a fixed target tree; the action is
    /// precomposition.
    Hom {
        target: Tree,
        maps: Vec<BTreeMap<String, EdgeMap>>,
    },
    /// Elements are generator assignments out of a fixed presentation; the
    /// action composes with the contravariantly induced assignment.
    Probe {
        pres: StarPresentation,
        homs: Vec<BTreeMap<String, Assignment>>,
    },
    /// Explicit action tables per site morphism.
    Tables {
        tables: BTreeMap<(usize, usize, String), BTreeMap<String, String>>,
    },
}

/// A finite truncated presheaf over a shared site.
///
/// Actions are materialized at construction into position tables indexed
/// like the site's hom sets, so validation and traversal stay integer work;
/// the backing keeps the semantic payload behind the element ids.
#[derive(Clone, Debug)]
pub struct FinDendroidalSet {
    site: Arc<OmegaSite>,
    /// Sorted element ids per tree class.
    values: Vec<Vec<String>>,
    /// `tables[i * n + j][k][p]`: position over class `i` of the action of
    /// the `k`-th morphism `i -> j` on the `p`-th element over class `j`.
    tables: Vec<Vec<Vec<u32>>>,
    backing: Backing,
    /// Human-readable provenance; carried into exports.
    pub label: String,
}

/// A degree-wise inclusion of presheaves over the same site.
#[derive(Clone, Debug)]
pub struct PresheafInclusion {
    pub sub: FinDendroidalSet,
    pub sup: FinDendroidalSet,
}

/// Verdict of the free-action test behind normal monomorphisms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalityReport {
    pub normal: bool,
    /// On failure: tree code, element, and the fixing automorphism.
    pub witness: Option<(String, String, String)>,
}

/// The category of elements of a truncated presheaf.
#[derive(Clone, Debug)]
pub struct ElementCategory {
    /// Pairs of tree class index and element id, sorted.
    pub objects: Vec<(usize, String)>,
    pub arrows: Vec<ElementArrow>,
}

/// An arrow of the category of elements: a site morphism `f: S -> T`
/// together with elements matched by the action, pointing from the
/// `(S, action(f)(x))` object to the `(T, x)` object.
#[derive(Clone, Debug)]
pub struct ElementArrow {
    pub mor: MorKey,
    pub src: usize,
    pub dst: usize,
}

impl FinDendroidalSet {
    pub fn site(&self) -> &Arc<OmegaSite> {
        &self.site
    }

    /// For hom-backed presheaves, the tree the elements map into.
    pub fn hom_target(&self) -> Option<&Tree> {
        match &self.backing {
            Backing::Hom { target, .. } => Some(target),
            _ => None,
        }
    }

    /// For probe presheaves, the presentation the assignments come out of.
    pub fn probe_source(&self) -> Option<&StarPresentation> {
        match &self.backing {
            Backing::Probe { pres, .. } => Some(pres),
            _ => None,
        }
    }

    pub fn bound(&self) -> usize {
        self.site.bound()
    }

    pub fn values(&self, class: usize) -> &[String] {
        &self.values[class]
    }

    pub fn total_elements(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(|v| v.is_empty())
    }

    /// Sort values, materialize all action tables, and validate.
    fn assemble(
        site: Arc<OmegaSite>,
        mut values: Vec<Vec<String>>,
        backing: Backing,
        label: String,
    ) -> Result<FinDendroidalSet> {
        for level in &mut values {
            level.sort();
            level.dedup();
        }
        let n = site.trees().len();
        let mut tables: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n * n];
        for j in 0..n {
            if values[j].is_empty() {
                for i in 0..n {
                    tables[i * n + j] = vec![Vec::new(); site.hom(i, j).len()];
                }
                continue;
            }
            for i in 0..n {
                let homs = site.hom(i, j);
                let mut per_mor = Vec::with_capacity(homs.len());
                for f in homs {
                    let mut table = Vec::with_capacity(values[j].len());
                    for elt in &values[j] {
                        let out = raw_action(&backing, f, i, j, elt)?;
                        let pos = values[i].binary_search(&out).map_err(|_| {
                            Error::Validation(format!(
                                "action of a morphism into class {i} leaves the recorded values (element `{elt}` went to `{out}`)"
                            ))
                        })?;
                        table.push(pos as u32);
                    }
                    per_mor.push(table);
                }
                tables[i * n + j] = per_mor;
            }
        }
        let out = FinDendroidalSet {
            site,
            values,
            tables,
            backing,
            label,
        };
        out.validate()?;
        Ok(out)
    }

    /// The presheaf with no elements at all.
    pub fn empty(site: Arc<OmegaSite>) -> FinDendroidalSet {
        let n = site.trees().len();
        let mut tables: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n * n];
        for j in 0..n {
            for i in 0..n {
                tables[i * n + j] = vec![Vec::new(); site.hom(i, j).len()];
            }
        }
        FinDendroidalSet {
            site,
            values: vec![Vec::new(); n],
            tables,
            backing: Backing::Tables {
                tables: BTreeMap::new(),
            },
            label: "empty".to_string(),
        }
    }

    /// The representable presheaf of `t`: elements over a class `S` are the
    /// morphisms from `S` into `t`, acting by precomposition.
    pub fn representable(site: Arc<OmegaSite>, t: &Tree) -> Result<FinDendroidalSet> {
        if t.num_edges() > site.bound() {
            return Err(Error::Precondition(format!(
                "tree has {} edges, bound is {}",
                t.num_edges(),
                site.bound()
            )));
        }
        let j0 = site
            .class_of(t)
            .ok_or_else(|| Error::Internal("tree class missing from site".to_string()))?;
        let psi = morphism::isomorphism(&site.trees()[j0], t).ok_or_else(|| {
            Error::Internal("canonical representative not isomorphic".to_string())
        })?;
        let mut maps = Vec::new();
        let mut values = Vec::new();
        for i in 0..site.trees().len() {
            let mut level = BTreeMap::new();
            for f in site.hom(i, j0) {
                let mut map = EdgeMap::new();
                for (k, v) in f.edge_map() {
                    map.insert(k.clone(), psi.apply(v).expect("iso is total").to_string());
                }
                level.insert(render_edge_map(&map), map);
            }
            values.push(level.keys().cloned().collect());
            maps.push(level);
        }
        FinDendroidalSet::assemble(
            site,
            values,
            Backing::Hom {
                target: t.clone(),
                maps,
            },
            format!("representable {}", t.code()),
        )
    }

    /// Union of the images of the given arrows into `t` (postcomposition),
    /// as a subobject of the representable of `t`.
    fn face_image_sub(
        site: Arc<OmegaSite>,
        t: &Tree,
        arrows: &[TreeMorphism],
        label: String,
    ) -> Result<PresheafInclusion> {
        let sup = FinDendroidalSet::representable(site.clone(), t)?;
        let mut maps: Vec<BTreeMap<String, EdgeMap>> = vec![BTreeMap::new(); site.trees().len()];
        for a in arrows {
            let j = site
                .class_of(a.source())
                .ok_or_else(|| Error::Internal("face source exceeds bound".to_string()))?;
            let c = morphism::isomorphism(&site.trees()[j], a.source()).ok_or_else(|| {
                Error::Internal("face source not isomorphic to its class".to_string())
            })?;
            for (i, level) in maps.iter_mut().enumerate() {
                for g in site.hom(i, j) {
                    // a after c after g, evaluated on edge maps.
                    let mut map = EdgeMap::new();
                    for (k, v) in g.edge_map() {
                        let mid = c.apply(v).expect("iso total");
                        let w = a.apply(mid).expect("face total");
                        map.insert(k.clone(), w.to_string());
                    }
                    level.insert(render_edge_map(&map), map);
                }
            }
        }
        let values = maps.iter().map(|m| m.keys().cloned().collect()).collect();
        let sub = FinDendroidalSet::assemble(
            site,
            values,
            Backing::Hom {
                target: t.clone(),
                maps,
            },
            label,
        )?;
        let incl = PresheafInclusion { sub, sup };
        incl.validate()?;
        Ok(incl)
    }

    /// The boundary of `t`: the union of the images of all elementary faces,
    /// included into the representable.
    pub fn boundary(site: Arc<OmegaSite>, t: &Tree) -> Result<PresheafInclusion> {
        if t.num_vertices() == 0 {
            return Err(Error::Precondition(
                "the unit tree has no faces, its boundary is not defined".to_string(),
            ));
        }
        let faces = TreeMorphism::elementary_faces(t);
        FinDendroidalSet::face_image_sub(site, t, &faces, format!("boundary {}", t.code()))
    }

    /// The inner horn at an inner edge `e`: the union of the images of all
    /// elementary faces except the inner face at `e`.
    pub fn inner_horn(site: Arc<OmegaSite>, t: &Tree, e: &str) -> Result<PresheafInclusion> {
        if !t.is_inner(e) {
            return Err(Error::Precondition(format!(
                "edge `{e}` is not inner, no horn there"
            )));
        }
        let faces: Vec<TreeMorphism> = TreeMorphism::elementary_faces(t)
            .into_iter()
            .filter(|f| match &f.normal_form().faces[0].kind {
                crate::morphism::FaceKind::Inner(x) => x != e,
                _ => true,
            })
            .collect();
        FinDendroidalSet::face_image_sub(site, t, &faces, format!("horn {} at {e}", t.code()))
    }

    /// Probe presheaf: over each class `T`, a fixed set of assignments out
    /// of `pres` into the presentation of `T`, acting by composition with
    /// the induced assignment of each tree morphism.
    pub(crate) fn probe(
        site: Arc<OmegaSite>,
        pres: StarPresentation,
        homs: Vec<BTreeMap<String, Assignment>>,
        label: String,
    ) -> Result<FinDendroidalSet> {
        let values = homs.iter().map(|m| m.keys().cloned().collect()).collect();
        FinDendroidalSet::assemble(site, values, Backing::Probe { pres, homs }, label)
    }

    /// Apply the action of a site morphism to an element over its target
    /// class, producing the element over its source class.
    pub fn action(&self, key: MorKey, elt: &str) -> Result<String> {
        let (i, j, k) = key;
        let p = self.values[j]
            .binary_search_by(|x| x.as_str().cmp(elt))
            .map_err(|_| {
                Error::Precondition(format!("element `{elt}` not present over class {j}"))
            })?;
        let n = self.site.trees().len();
        let pos = self.tables[i * n + j][k][p] as usize;
        Ok(self.values[i][pos].clone())
    }

    fn action_pos(&self, key: MorKey, p: usize) -> u32 {
        let (i, j, k) = key;
        let n = self.site.trees().len();
        self.tables[i * n + j][k][p]
    }

    /// Check identity actions and functoriality of composition on pairs
    /// whose inner morphism is a generator; every morphism factors into
    /// generators, so together these force the general composition law. The
    /// interchange laws for faces and degeneracies are instances of the
    /// composition check. Closure of the actions inside the recorded values
    /// was enforced when the tables were materialized.
    pub fn validate(&self) -> Result<()> {
        let n = self.site.trees().len();
        if self.values.len() != n || self.tables.len() != n * n {
            return Err(Error::Validation(
                "value tables do not match the site".to_string(),
            ));
        }
        for j in 0..n {
            if self.values[j].is_empty() {
                continue;
            }
            for (k, f) in self.site.hom(j, j).iter().enumerate() {
                if !f.is_identity() {
                    continue;
                }
                for p in 0..self.values[j].len() {
                    if self.action_pos((j, j, k), p) as usize != p {
                        return Err(Error::Validation(format!(
                            "identity acts nontrivially on `{}`",
                            self.values[j][p]
                        )));
                    }
                }
            }
        }
        for k in 0..n {
            if self.values[k].is_empty() {
                continue;
            }
            for j in 0..n {
                if self.site.hom(j, k).is_empty() {
                    continue;
                }
                for i in 0..n {
                    for &fi in self.site.generator_positions(i, j) {
                        for (gi, _) in self.site.hom(j, k).iter().enumerate() {
                            let fkey = (i, j, fi);
                            let gkey = (j, k, gi);
                            let ckey = self.site.compose(fkey, gkey)?;
                            for p in 0..self.values[k].len() {
                                let via = self.action_pos(fkey, self.action_pos(gkey, p) as usize);
                                let direct = self.action_pos(ckey, p);
                                if via != direct {
                                    return Err(Error::Validation(format!(
                                        "composite action disagrees on `{}` (classes {i}<-{j}<-{k})",
                                        self.values[k][p]
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether an element lies in the image of some degeneracy action.
    pub fn is_degenerate(&self, class: usize, elt: &str) -> Result<bool> {
        let t = &self.site.trees()[class];
        for d in TreeMorphism::degeneracies_of(t) {
            let collapsed = d.target();
            let i = self
                .site
                .class_of(collapsed)
                .ok_or_else(|| Error::Internal("collapsed tree exceeds bound".to_string()))?;
            let c = morphism::isomorphism(collapsed, &self.site.trees()[i]).ok_or_else(|| {
                Error::Internal("collapse not isomorphic to its class".to_string())
            })?;
            let m = TreeMorphism::compose(&c, &d)
                .map_err(|e| Error::Internal(format!("degeneracy composite: {e}")))?;
            let Some(key) = self.site.find(class, i, m.edge_map()) else {
                return Err(Error::Internal("degeneracy missing from site".to_string()));
            };
            for y in &self.values[i] {
                if self.action(key, y)? == elt {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Materialize the action into explicit tables.
    pub fn to_tables(&self) -> Result<FinDendroidalSet> {
        let n = self.site.trees().len();
        let mut tables = BTreeMap::new();
        for j in 0..n {
            if self.values[j].is_empty() {
                continue;
            }
            for i in 0..n {
                for (k, f) in self.site.hom(i, j).iter().enumerate() {
                    let mut table = BTreeMap::new();
                    for elt in &self.values[j] {
                        table.insert(elt.clone(), self.action((i, j, k), elt)?);
                    }
                    tables.insert((i, j, render_edge_map(f.edge_map())), table);
                }
            }
        }
        FinDendroidalSet::assemble(
            self.site.clone(),
            self.values.clone(),
            Backing::Tables { tables },
            self.label.clone(),
        )
    }

    /// Quotient of the representable of `t` by its automorphism group:
    /// elements are orbits under postcomposition. Useful as a source of
    /// presheaves whose automorphism actions have fixed points.
    pub fn quotient_representable(site: Arc<OmegaSite>, t: &Tree) -> Result<FinDendroidalSet> {
        let rep = FinDendroidalSet::representable(site.clone(), t)?;
        let auts = morphism::automorphisms(t);
        let Backing::Hom { maps, .. } = &rep.backing else {
            return Err(Error::Internal("representable is hom-backed".to_string()));
        };
        // Orbit representative: least id in the postcomposition orbit.
        let orbit_rep = |map: &EdgeMap| -> String {
            let mut best: Option<String> = None;
            for phi in &auts {
                let mut composed = EdgeMap::new();
                for (k, v) in map {
                    composed.insert(k.clone(), phi.apply(v).expect("aut total").to_string());
                }
                let r = render_edge_map(&composed);
                if best.as_ref().is_none_or(|b| r < *b) {
                    best = Some(r);
                }
            }
            best.expect("at least the identity automorphism")
        };
        let n = site.trees().len();
        let mut tables: BTreeMap<(usize, usize, String), BTreeMap<String, String>> =
            BTreeMap::new();
        let mut values: Vec<Vec<String>> = vec![Vec::new(); n];
        for j in 0..n {
            let mut reps: BTreeSet<String> = BTreeSet::new();
            for map in maps[j].values() {
                reps.insert(orbit_rep(map));
            }
            values[j] = reps.into_iter().collect();
        }
        for j in 0..n {
            if values[j].is_empty() {
                continue;
            }
            for i in 0..n {
                for f in site.hom(i, j) {
                    let mut table = BTreeMap::new();
                    for elt in &values[j] {
                        let map = &maps[j][elt];
                        let mut composed = EdgeMap::new();
                        for (k, v) in f.edge_map() {
                            composed.insert(k.clone(), map[v].clone());
                        }
                        table.insert(elt.clone(), orbit_rep(&composed));
                    }
                    tables.insert((i, j, render_edge_map(f.edge_map())), table);
                }
            }
        }
        FinDendroidalSet::assemble(
            site,
            values,
            Backing::Tables { tables },
            format!("representable {} mod automorphisms", t.code()),
        )
    }

    /// Remove one element, keeping explicit tables; fails if the remaining
    /// data is not a presheaf (the element was hit by an action).
    pub fn without_element(&self, class: usize, elt: &str) -> Result<FinDendroidalSet> {
        let tabled = self.to_tables()?;
        let Backing::Tables { mut tables } = tabled.backing else {
            unreachable!();
        };
        let mut values = tabled.values;
        let before = values[class].len();
        values[class].retain(|x| x != elt);
        if values[class].len() == before {
            return Err(Error::Precondition(format!(
                "no element `{elt}` over class {class}"
            )));
        }
        for ((_, j, _), table) in tables.iter_mut() {
            if *j == class {
                table.remove(elt);
            }
        }
        FinDendroidalSet::assemble(
            self.site.clone(),
            values,
            Backing::Tables { tables },
            format!("{} minus one element", self.label),
        )
    }

    /// The category of elements: objects are (class, element) pairs, arrows
    /// come from every site morphism acting on every element over its
    /// target.
    pub fn category_of_elements(&self) -> Result<ElementCategory> {
        let n = self.site.trees().len();
        let mut objects = Vec::new();
        for (i, level) in self.values.iter().enumerate() {
            for elt in level {
                objects.push((i, elt.clone()));
            }
        }
        let index: BTreeMap<(usize, String), usize> = objects
            .iter()
            .enumerate()
            .map(|(k, o)| (o.clone(), k))
            .collect();
        let mut arrows = Vec::new();
        for j in 0..n {
            if self.values[j].is_empty() {
                continue;
            }
            for i in 0..n {
                for (k, _) in self.site.hom(i, j).iter().enumerate() {
                    for elt in &self.values[j] {
                        let src_elt = self.action((i, j, k), elt)?;
                        let src = index[&(i, src_elt)];
                        let dst = index[&(j, elt.clone())];
                        arrows.push(ElementArrow {
                            mor: (i, j, k),
                            src,
                            dst,
                        });
                    }
                }
            }
        }
        Ok(ElementCategory { objects, arrows })
    }
}

/// Compute the action of a tree morphism on one element directly from the
/// backing; used once per (morphism, element) pair to materialize tables.
fn raw_action(
    backing: &Backing,
    f: &TreeMorphism,
    i: usize,
    j: usize,
    elt: &str,
) -> Result<String> {
    match backing {
        Backing::Hom { maps, .. } => {
            let x = &maps[j][elt];
            let mut composed = EdgeMap::new();
            for (k, v) in f.edge_map() {
                let w = x
                    .get(v)
                    .ok_or_else(|| Error::Internal(format!("dangling edge `{v}`")))?;
                composed.insert(k.clone(), w.clone());
            }
            Ok(render_edge_map(&composed))
        }
        Backing::Probe { homs, .. } => {
            let h = &homs[j][elt];
            let mut composed: Assignment = BTreeMap::new();
            for (g, img) in h {
                // Pull the image set back through the edge map of f.
                let mut pulled = BTreeSet::new();
                for (x, fx) in f.edge_map() {
                    if img.contains(fx) {
                        pulled.insert(x.clone());
                    }
                }
                composed.insert(g.clone(), pulled);
            }
            Ok(render_assignment(&composed))
        }
        Backing::Tables { tables } => {
            let table = tables
                .get(&(i, j, render_edge_map(f.edge_map())))
                .ok_or_else(|| {
                    Error::Validation(format!(
                        "no action table for a morphism between classes {i} and {j}"
                    ))
                })?;
            table
                .get(elt)
                .cloned()
                .ok_or_else(|| Error::Validation(format!("action table misses element `{elt}`")))
        }
    }
}

pub fn render_assignment(a: &Assignment) -> String {
    let mut s = String::new();
    for (i, (k, v)) in a.iter().enumerate() {
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

impl PresheafInclusion {
    pub fn new(sub: FinDendroidalSet, sup: FinDendroidalSet) -> Result<PresheafInclusion> {
        let incl = PresheafInclusion { sub, sup };
        incl.validate()?;
        Ok(incl)
    }

    /// Degree-wise containment and action compatibility.
    pub fn validate(&self) -> Result<()> {
        if !Arc::ptr_eq(&self.sub.site, &self.sup.site)
            && self.sub.site.bound() != self.sup.site.bound()
        {
            return Err(Error::Precondition(
                "inclusion endpoints live over different sites".to_string(),
            ));
        }
        if let (Some(a), Some(b)) = (self.sub.hom_target(), self.sup.hom_target()) {
            if a != b {
                return Err(Error::Precondition(
                    "hom-backed inclusion endpoints target different trees".to_string(),
                ));
            }
        }
        let n = self.sub.site.trees().len();
        for j in 0..n {
            for elt in &self.sub.values[j] {
                if !self.sup.values[j].iter().any(|x| x == elt) {
                    return Err(Error::Precondition(format!(
                        "element `{elt}` of the subobject is missing from the ambient presheaf"
                    )));
                }
            }
        }
        for j in 0..n {
            if self.sub.values[j].is_empty() {
                continue;
            }
            for i in 0..n {
                for (k, _) in self.sub.site.hom(i, j).iter().enumerate() {
                    for elt in &self.sub.values[j] {
                        if self.sub.action((i, j, k), elt)? != self.sup.action((i, j, k), elt)? {
                            return Err(Error::Precondition(format!(
                                "actions of sub and ambient presheaf disagree on `{elt}`"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Test whether an inclusion is a normal monomorphism: every automorphism
/// group acts freely on the complement values. On failure the witness names
/// the tree, the element, and a nontrivial fixing automorphism.
pub fn is_normal_mono(incl: &PresheafInclusion) -> Result<NormalityReport> {
    let site = &incl.sup.site;
    for (i, t) in site.trees().iter().enumerate() {
        let complement: Vec<&String> = incl.sup.values[i]
            .iter()
            .filter(|x| !incl.sub.values[i].iter().any(|y| y == *x))
            .collect();
        if complement.is_empty() {
            continue;
        }
        for phi in morphism::automorphisms(t) {
            if phi.is_identity() {
                continue;
            }
            let key = site
                .find(i, i, phi.edge_map())
                .ok_or_else(|| Error::Internal("automorphism missing from site".to_string()))?;
            for y in &complement {
                if incl.sup.action(key, y)? == **y {
                    return Ok(NormalityReport {
                        normal: false,
                        witness: Some((t.code(), (*y).clone(), render_edge_map(phi.edge_map()))),
                    });
                }
            }
        }
    }
    Ok(NormalityReport {
        normal: true,
        witness: None,
    })
}

/// Wire format for truncated presheaves.
#[derive(Serialize, Deserialize)]
pub struct PresheafJson {
    pub bound: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Element ids per tree class code; empty classes omitted.
    pub values: BTreeMap<String, Vec<String>>,
    pub actions: Vec<ActionJson>,
}

#[derive(Serialize, Deserialize)]
pub struct ActionJson {
    /// Class code of the morphism's source.
    pub from: String,
    /// Class code of the morphism's target.
    pub to: String,
    pub map_kind: String,
    pub edge_map: EdgeMap,
    /// Element over `to` to element over `from`.
    pub table: BTreeMap<String, String>,
}

fn morphism_kind(f: &TreeMorphism) -> &'static str {
    if f.is_identity() {
        "identity"
    } else if f.is_isomorphism() {
        "iso"
    } else {
        let nf = f.normal_form();
        match (nf.degeneracies.is_empty(), nf.faces.is_empty()) {
            (true, false) => "face",
            (false, true) => "degeneracy",
            _ => "composite",
        }
    }
}

impl FinDendroidalSet {
    pub fn to_json(&self) -> Result<PresheafJson> {
        let mut values = BTreeMap::new();
        for (i, level) in self.values.iter().enumerate() {
            if !level.is_empty() {
                values.insert(self.site.trees()[i].code(), level.clone());
            }
        }
        let mut actions = Vec::new();
        let n = self.site.trees().len();
        for j in 0..n {
            if self.values[j].is_empty() {
                continue;
            }
            for i in 0..n {
                for (k, f) in self.site.hom(i, j).iter().enumerate() {
                    let mut table = BTreeMap::new();
                    for elt in &self.values[j] {
                        table.insert(elt.clone(), self.action((i, j, k), elt)?);
                    }
                    actions.push(ActionJson {
                        from: self.site.trees()[i].code(),
                        to: self.site.trees()[j].code(),
                        map_kind: morphism_kind(f).to_string(),
                        edge_map: f.edge_map().clone(),
                        table,
                    });
                }
            }
        }
        Ok(PresheafJson {
            bound: self.site.bound(),
            label: Some(self.label.clone()),
            values,
            actions,
        })
    }

    /// Load an explicit-table presheaf. The site is rebuilt from the stored
    /// bound and the data fully validated.
    pub fn from_json(json: &PresheafJson) -> Result<FinDendroidalSet> {
        let site = OmegaSite::new(json.bound)?;
        FinDendroidalSet::from_json_with_site(json, site)
    }

    pub fn from_json_with_site(
        json: &PresheafJson,
        site: Arc<OmegaSite>,
    ) -> Result<FinDendroidalSet> {
        if site.bound() != json.bound {
            return Err(Error::Precondition(
                "site bound differs from the stored bound".to_string(),
            ));
        }
        let n = site.trees().len();
        let mut values: Vec<Vec<String>> = vec![Vec::new(); n];
        for (code, elts) in &json.values {
            let Some(i) = site.code_index.get(code) else {
                return Err(Error::Validation(format!(
                    "unknown tree class code `{code}`"
                )));
            };
            let mut level = elts.clone();
            level.sort();
            level.dedup();
            values[*i] = level;
        }
        let mut tables = BTreeMap::new();
        for a in &json.actions {
            let Some(&i) = site.code_index.get(&a.from) else {
                return Err(Error::Validation(format!("unknown class `{}`", a.from)));
            };
            let Some(&j) = site.code_index.get(&a.to) else {
                return Err(Error::Validation(format!("unknown class `{}`", a.to)));
            };
            if site.find(i, j, &a.edge_map).is_none() {
                return Err(Error::Validation(format!(
                    "edge map {} is not a morphism between `{}` and `{}`",
                    render_edge_map(&a.edge_map),
                    a.from,
                    a.to
                )));
            }
            tables.insert((i, j, render_edge_map(&a.edge_map)), a.table.clone());
        }
        FinDendroidalSet::assemble(
            site,
            values,
            Backing::Tables { tables },
            json.label.clone().unwrap_or_else(|| "loaded".to_string()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn site3() -> Arc<OmegaSite> {
        OmegaSite::new(3).unwrap()
    }

    #[test]
    fn representable_of_unit_tree() {
        let site = site3();
        let x = FinDendroidalSet::representable(site.clone(), &Tree::unit()).unwrap();
        for (i, t) in site.trees().iter().enumerate() {
            let expected = if t.code() == Tree::linear(0).code()
                || t.code() == Tree::linear(1).code()
                || t.code() == Tree::linear(2).code()
                || t.code() == Tree::linear(3).code()
            {
                1
            } else {
                0
            };
            assert_eq!(x.values(i).len(), expected, "class {}", t.code());
        }
    }

    #[test]
    fn representable_contains_identity() {
        let site = site3();
        for t in [Tree::linear(2), Tree::corolla(2), Tree::corolla(0)] {
            let x = FinDendroidalSet::representable(site.clone(), &t).unwrap();
            let i = site.class_of(&t).unwrap();
            // The identity of the canonical representative appears once t is
            // canonical itself (our standard trees are).
            let id = render_edge_map(TreeMorphism::identity(&t).edge_map());
            assert!(x.values(i).contains(&id), "tree {}", t.code());
        }
    }

    #[test]
    fn representable_matches_monotone_counts() {
        let site = site3();
        let x = FinDendroidalSet::representable(site.clone(), &Tree::linear(1)).unwrap();
        fn binom(n: usize, k: usize) -> usize {
            let mut r = 1usize;
            for i in 0..k {
                r = r * (n - i) / (i + 1);
            }
            r
        }
        for m in 0..=2 {
            let i = site.class_of(&Tree::linear(m)).unwrap();
            assert_eq!(x.values(i).len(), binom(1 + m + 1, m + 1));
        }
    }

    #[test]
    fn boundary_of_l1_has_two_endpoints() {
        let site = site3();
        let incl = FinDendroidalSet::boundary(site.clone(), &Tree::linear(1)).unwrap();
        let unit_ix = site.class_of(&Tree::unit()).unwrap();
        assert_eq!(incl.sub.values(unit_ix).len(), 2);
        // Degenerate images of the endpoints show up one level up.
        let l1_ix = site.class_of(&Tree::linear(1)).unwrap();
        assert_eq!(incl.sub.values(l1_ix).len(), 2);
        for elt in incl.sub.values(l1_ix) {
            assert!(incl.sub.is_degenerate(l1_ix, elt).unwrap());
        }
        // The identity is never in the boundary.
        let id = render_edge_map(TreeMorphism::identity(&Tree::linear(1)).edge_map());
        assert!(!incl.sub.values(l1_ix).contains(&id));
    }

    #[test]
    fn representable_needs_a_big_enough_bound() {
        let site = site3();
        assert!(matches!(
            FinDendroidalSet::representable(site, &Tree::linear(3)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn relabeled_trees_give_isomorphic_presheaves() {
        // Arbitrary edge names exercise the canonicalization inside the
        // constructors.
        let site = site3();
        let odd = Tree::with_node("root", vec![Tree::leaf("left"), Tree::leaf("right")]).unwrap();
        let rep = FinDendroidalSet::representable(site.clone(), &odd).unwrap();
        let canon = FinDendroidalSet::representable(site.clone(), &Tree::corolla(2)).unwrap();
        for j in 0..site.trees().len() {
            assert_eq!(rep.values(j).len(), canon.values(j).len());
        }
        let incl = FinDendroidalSet::boundary(site.clone(), &odd).unwrap();
        let unit_ix = site.class_of(&Tree::unit()).unwrap();
        assert_eq!(incl.sub.values(unit_ix).len(), 3);
        assert!(is_normal_mono(&incl).unwrap().normal);
    }

    #[test]
    fn degeneracy_tracking_matches_injectivity_on_linear_trees() {
        // Over the representable of L1, an element is nondegenerate exactly
        // when its edge map is injective.
        let site = site3();
        let x = FinDendroidalSet::representable(site.clone(), &Tree::linear(1)).unwrap();
        let l1 = site.class_of(&Tree::linear(1)).unwrap();
        let nondegen: Vec<&String> = x
            .values(l1)
            .iter()
            .filter(|e| !x.is_degenerate(l1, e).unwrap())
            .collect();
        assert_eq!(nondegen.len(), 1);
        let l2 = site.class_of(&Tree::linear(2)).unwrap();
        assert_eq!(x.values(l2).len(), 4);
        for e in x.values(l2) {
            assert!(x.is_degenerate(l2, e).unwrap());
        }
    }

    #[test]
    fn boundary_of_unit_tree_rejected() {
        let site = site3();
        assert!(matches!(
            FinDendroidalSet::boundary(site, &Tree::unit()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn boundary_of_corolla_misses_aut_orbit_of_identity() {
        let site = site3();
        let t = Tree::corolla(2);
        let incl = FinDendroidalSet::boundary(site.clone(), &t).unwrap();
        let i = site.class_of(&t).unwrap();
        assert_eq!(incl.sub.values(i).len(), 0);
        assert_eq!(incl.sup.values(i).len(), 2);
        // Everything else agrees with the representable.
        for j in 0..site.trees().len() {
            if j != i {
                assert_eq!(incl.sub.values(j), incl.sup.values(j));
            }
        }
    }

    #[test]
    fn horn_is_between_boundary_and_representable() {
        let site = site3();
        let t = Tree::linear(2);
        let horn = FinDendroidalSet::inner_horn(site.clone(), &t, "e1").unwrap();
        let boundary = FinDendroidalSet::boundary(site.clone(), &t).unwrap();
        for j in 0..site.trees().len() {
            for elt in horn.sub.values(j) {
                assert!(boundary.sub.values(j).contains(elt));
            }
        }
        // Horns on non-inner edges are rejected.
        assert!(FinDendroidalSet::inner_horn(site, &t, "e2").is_err());
    }

    #[test]
    fn normal_mono_for_corolla_boundary() {
        let site = site3();
        let incl = FinDendroidalSet::boundary(site.clone(), &Tree::corolla(2)).unwrap();
        let report = is_normal_mono(&incl).unwrap();
        assert!(report.normal);
        // Trivially normal when nothing is added.
        let x = FinDendroidalSet::representable(site, &Tree::corolla(2)).unwrap();
        let refl = PresheafInclusion::new(x.clone(), x).unwrap();
        assert!(is_normal_mono(&refl).unwrap().normal);
    }

    #[test]
    fn quotient_fixture_fails_normality_with_witness() {
        let site = site3();
        let t = Tree::corolla(2);
        let q = FinDendroidalSet::quotient_representable(site.clone(), &t).unwrap();
        let i = site.class_of(&t).unwrap();
        assert_eq!(q.values(i).len(), 1);
        let top = q.values(i)[0].clone();
        let sub = q.without_element(i, &top).unwrap();
        let incl = PresheafInclusion::new(sub, q).unwrap();
        let report = is_normal_mono(&incl).unwrap();
        assert!(!report.normal);
        let (code, elt, _phi) = report.witness.unwrap();
        assert_eq!(code, t.code());
        assert_eq!(elt, top);
    }

    #[test]
    fn element_category_of_representable_has_terminal_element() {
        let site = site3();
        let t = Tree::corolla(2);
        let x = FinDendroidalSet::representable(site.clone(), &t).unwrap();
        let cat = x.category_of_elements().unwrap();
        let i = site.class_of(&t).unwrap();
        let id = render_edge_map(TreeMorphism::identity(&t).edge_map());
        let target = cat
            .objects
            .iter()
            .position(|(j, e)| *j == i && *e == id)
            .unwrap();
        // Every object has at least one arrow into the identity element.
        let mut sources: BTreeSet<usize> = BTreeSet::new();
        for a in &cat.arrows {
            if a.dst == target {
                sources.insert(a.src);
            }
        }
        assert_eq!(sources.len(), cat.objects.len());
    }

    #[test]
    fn json_round_trip_preserves_values_and_actions() {
        let site = site3();
        let incl = FinDendroidalSet::boundary(site.clone(), &Tree::linear(2)).unwrap();
        let json = incl.sub.to_json().unwrap();
        let text = serde_json::to_string(&json).unwrap();
        let parsed: PresheafJson = serde_json::from_str(&text).unwrap();
        let loaded = FinDendroidalSet::from_json_with_site(&parsed, site.clone()).unwrap();
        for j in 0..site.trees().len() {
            assert_eq!(incl.sub.values(j), loaded.values(j));
        }
        // Spot-check one action agreement.
        let unit_ix = site.class_of(&Tree::unit()).unwrap();
        let l2_ix = site.class_of(&Tree::linear(2)).unwrap();
        for (k, _) in site.hom(unit_ix, l2_ix).iter().enumerate() {
            for elt in incl.sub.values(l2_ix) {
                assert_eq!(
                    incl.sub.action((unit_ix, l2_ix, k), elt).unwrap(),
                    loaded.action((unit_ix, l2_ix, k), elt).unwrap()
                );
            }
        }
    }

    #[test]
    fn empty_presheaf_validates() {
        let site = site3();
        let e = FinDendroidalSet::empty(site);
        assert!(e.validate().is_ok());
        assert!(e.is_empty());
        assert_eq!(e.category_of_elements().unwrap().objects.len(), 0);
    }

    #[test]
    fn corrupted_table_rejected() {
        let site = site3();
        let x = FinDendroidalSet::representable(site.clone(), &Tree::linear(1)).unwrap();
        let mut json = x.to_json().unwrap();
        // Corrupt one table entry to point at a wrong element.
        let a = json
            .actions
            .iter_mut()
            .find(|a| !a.table.is_empty() && a.map_kind == "face")
            .unwrap();
        let key = a.table.keys().next().unwrap().clone();
        let other = json.values[&Tree::unit().code()]
            .iter()
            .find(|v| Some(*v) != a.table.get(&key).as_ref().map(|x| *x))
            .cloned();
        if let Some(o) = other {
            a.table.insert(key, o);
            assert!(FinDendroidalSet::from_json_with_site(&json, site).is_err());
        }
    }
}
