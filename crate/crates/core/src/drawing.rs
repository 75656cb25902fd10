//! Drawings: diagrams of presentations indexed by a presheaf's category of
//! elements.
//!
//! The drawing of a truncated presheaf assigns to every element `(T, x)` the
//! presentation of `T`, and to every arrow of the element category the
//! contravariantly induced presentation map. The colimit the diagram stands
//! for lives in a presheaf category over all separable unital C*-algebras
//! and is not evaluated; the finite diagram is the computed datum.
//!
//! Also here: `edge_homs`, the finite sub-class of generator assignments
//! sending each generator to zero, a generator, or a sum of distinct
//! generators of the target. This is a declared under-approximation of the
//! full homomorphism set (which is a continuum); every map constructed
//! elsewhere in the crate lies in it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dendrex::{
    dendrex, induced_hom, is_generator_surjective, verify_hom, StarHom, StarPresentation,
};
use crate::error::{Error, Result};
use crate::presheaf::{Assignment, ElementCategory, FinDendroidalSet, MorKey, OmegaSite};

/// A verified diagram of presentations over the category of elements of a
/// truncated presheaf.
#[derive(Clone, Debug)]
pub struct Drawing {
    pub index: ElementCategory,
    /// Presentation at each index object, parallel to `index.objects`.
    pub nodes: Vec<StarPresentation>,
    /// Induced hom at each index arrow, parallel to `index.arrows`. The
    /// arrow `(S, x) -> (T, y)` carries a map from the presentation of `T`
    /// to the presentation of `S`.
    pub arrows: Vec<StarHom>,
    pub include_degenerate: bool,
    pub label: String,
    site: Arc<OmegaSite>,
}

/// Options for [`draw`].
#[derive(Clone, Copy, Debug, Default)]
pub struct DrawOptions {
    /// Restrict the index to nondegenerate elements. The default keeps every
    /// element, matching the colimit formula; the restricted view is offered
    /// without any cofinality claim.
    pub skip_degenerate: bool,
}

/// Compute the drawing of a presheaf.
pub fn draw(x: &FinDendroidalSet) -> Result<Drawing> {
    draw_with_options(x, DrawOptions::default())
}

pub fn draw_with_options(x: &FinDendroidalSet, options: DrawOptions) -> Result<Drawing> {
    let site = x.site().clone();
    let full = x.category_of_elements()?;
    let index = if options.skip_degenerate {
        restrict_to_nondegenerate(x, &full)?
    } else {
        full
    };
    let mut nodes = Vec::with_capacity(index.objects.len());
    for (class, _) in &index.objects {
        nodes.push(dendrex(&site.trees()[*class]));
    }
    // One induced hom per distinct site morphism, shared across arrows.
    let mut cache: BTreeMap<MorKey, StarHom> = BTreeMap::new();
    let mut arrows = Vec::with_capacity(index.arrows.len());
    for a in &index.arrows {
        let hom = match cache.get(&a.mor) {
            Some(h) => h.clone(),
            None => {
                let h = induced_hom(site.morphism(a.mor))?;
                cache.insert(a.mor, h.clone());
                h
            }
        };
        arrows.push(hom);
    }
    let d = Drawing {
        index,
        nodes,
        arrows,
        include_degenerate: !options.skip_degenerate,
        label: x.label.clone(),
        site,
    };
    let report = verify_drawing(&d)?;
    if !report.pass {
        return Err(Error::Internal(format!(
            "freshly drawn diagram fails verification: {}",
            report.failure.unwrap_or_default()
        )));
    }
    Ok(d)
}

fn restrict_to_nondegenerate(
    x: &FinDendroidalSet,
    full: &ElementCategory,
) -> Result<ElementCategory> {
    let mut keep: Vec<bool> = Vec::with_capacity(full.objects.len());
    for (class, elt) in &full.objects {
        keep.push(!x.is_degenerate(*class, elt)?);
    }
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut objects = Vec::new();
    for (i, obj) in full.objects.iter().enumerate() {
        if keep[i] {
            remap.insert(i, objects.len());
            objects.push(obj.clone());
        }
    }
    let arrows = full
        .arrows
        .iter()
        .filter(|a| keep[a.src] && keep[a.dst])
        .map(|a| crate::presheaf::ElementArrow {
            mor: a.mor,
            src: remap[&a.src],
            dst: remap[&a.dst],
        })
        .collect();
    Ok(ElementCategory { objects, arrows })
}

/// Report of [`verify_drawing`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DrawingReport {
    pub pass: bool,
    pub arrows_checked: usize,
    pub squares_checked: usize,
    pub failure: Option<String>,
}

/// Re-check every arrow's relation verification and every composition
/// square of the index.
///
/// Arrows carrying the same tree morphism must carry identical assignments;
/// that uniformity is checked first, after which relation checks and the
/// assignment side of each square need to run only once per morphism. The
/// closure of the index (every square's composite arrow being present) is
/// still checked square by square.
pub fn verify_drawing(d: &Drawing) -> Result<DrawingReport> {
    let mut report = DrawingReport {
        pass: true,
        arrows_checked: 0,
        squares_checked: 0,
        failure: None,
    };
    let mut rep_by_mor: BTreeMap<MorKey, usize> = BTreeMap::new();
    for (k, a) in d.index.arrows.iter().enumerate() {
        match rep_by_mor.get(&a.mor) {
            None => {
                rep_by_mor.insert(a.mor, k);
            }
            Some(&k0) => {
                if d.arrows[k0].assignment != d.arrows[k].assignment {
                    report.pass = false;
                    report.failure = Some(format!(
                        "arrow {k} disagrees with arrow {k0} carrying the same morphism"
                    ));
                    return Ok(report);
                }
            }
        }
    }
    for &k in rep_by_mor.values() {
        report.arrows_checked += 1;
        let check = verify_hom(&d.arrows[k])?;
        if !check.pass {
            report.pass = false;
            report.failure = Some(format!(
                "arrow {k} ({} -> {}): {}",
                d.index.arrows[k].src,
                d.index.arrows[k].dst,
                check.counterexample.unwrap_or_default()
            ));
            return Ok(report);
        }
    }
    // Composition squares: arrows grouped by source object for traversal,
    // assignment composites checked once per morphism pair.
    let mut by_src: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut arrow_index: BTreeMap<(MorKey, usize, usize), usize> = BTreeMap::new();
    for (k, a) in d.index.arrows.iter().enumerate() {
        by_src.entry(a.src).or_default().push(k);
        arrow_index.insert((a.mor, a.src, a.dst), k);
    }
    let mut pair_checked: BTreeMap<(MorKey, MorKey), MorKey> = BTreeMap::new();
    for (k, a) in d.index.arrows.iter().enumerate() {
        let Some(outgoing) = by_src.get(&a.dst) else {
            continue;
        };
        for &k2 in outgoing {
            let b = &d.index.arrows[k2];
            // a: o1 -> o2, b: o2 -> o3; the index composite must exist and
            // its hom must equal the contravariant composite.
            let ckey = match pair_checked.get(&(a.mor, b.mor)) {
                Some(c) => *c,
                None => {
                    let c = d.site.compose(a.mor, b.mor)?;
                    let Some(&cr) = rep_by_mor.get(&c) else {
                        report.pass = false;
                        report.failure = Some(format!(
                            "index not closed: no arrow carries the composite of arrows {k} and {k2}"
                        ));
                        return Ok(report);
                    };
                    let composite =
                        compose_assignments(&d.arrows[k].assignment, &d.arrows[k2].assignment);
                    if composite.as_ref() != Some(&d.arrows[cr].assignment) {
                        report.pass = false;
                        report.failure = Some(format!(
                            "square at arrows {k} and {k2}: composite disagrees with arrow {cr}"
                        ));
                        return Ok(report);
                    }
                    pair_checked.insert((a.mor, b.mor), c);
                    c
                }
            };
            report.squares_checked += 1;
            if !arrow_index.contains_key(&(ckey, a.src, b.dst)) {
                report.pass = false;
                report.failure = Some(format!(
                    "index not closed: composite of arrows {k} and {k2} missing"
                ));
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Assignment composition without carrying the presentations along; `None`
/// when a coefficient would leave `{0, 1}`.
fn compose_assignments(outer: &Assignment, inner: &Assignment) -> Option<Assignment> {
    let mut out = Assignment::new();
    for (g, mids) in inner {
        let mut img = BTreeSet::new();
        for m in mids {
            for x in outer.get(m)? {
                if !img.insert(x.clone()) {
                    return None;
                }
            }
        }
        out.insert(g.clone(), img);
    }
    Some(out)
}

impl Drawing {
    /// Arrows whose underlying tree morphisms contain no degeneracies are
    /// surjective on generators; report any exception.
    pub fn face_arrow_surjectivity(&self) -> Result<(usize, Vec<usize>)> {
        let mut checked = 0;
        let mut bad = Vec::new();
        for (k, a) in self.index.arrows.iter().enumerate() {
            let f = self.site.morphism(a.mor);
            if !f.normal_form().is_face_only() {
                continue;
            }
            checked += 1;
            if !is_generator_surjective(&self.arrows[k])? {
                bad.push(k);
            }
        }
        Ok((checked, bad))
    }

    /// Whether `other` embeds into this drawing: every object and arrow of
    /// `other` appears here with identical node presentations and arrow
    /// assignments.
    pub fn embeds(&self, other: &Drawing) -> bool {
        let obj_pos: BTreeMap<&(usize, String), usize> = self
            .index
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o, i))
            .collect();
        for (i, o) in other.index.objects.iter().enumerate() {
            match obj_pos.get(o) {
                Some(&j) if self.nodes[j] == other.nodes[i] => {}
                _ => return false,
            }
        }
        type ArrowKey<'a> = (MorKey, &'a (usize, String), &'a (usize, String), String);
        let arrow_set: BTreeSet<ArrowKey> = self
            .index
            .arrows
            .iter()
            .enumerate()
            .map(|(k, a)| {
                (
                    a.mor,
                    &self.index.objects[a.src],
                    &self.index.objects[a.dst],
                    self.arrows[k].render(),
                )
            })
            .collect();
        for (k, a) in other.index.arrows.iter().enumerate() {
            let key = (
                a.mor,
                &other.index.objects[a.src],
                &other.index.objects[a.dst],
                other.arrows[k].render(),
            );
            if !arrow_set.contains(&key) {
                return false;
            }
        }
        true
    }

    /// GraphViz rendering: nodes labeled by tree codes and element ids,
    /// arrows by morphism kind.
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph drawing {{");
        let _ = writeln!(s, "  rankdir=BT;");
        let _ = writeln!(s, "  label=\"{}\";", self.label);
        for (i, (class, elt)) in self.index.objects.iter().enumerate() {
            let code = self.site.trees()[*class].code();
            let _ = writeln!(
                s,
                "  n{i} [shape=box, label=\"{} | {}\"];",
                escape(&code),
                escape(elt)
            );
        }
        for (k, a) in self.index.arrows.iter().enumerate() {
            let f = self.site.morphism(a.mor);
            if f.is_identity() {
                continue;
            }
            let kind = if f.is_isomorphism() {
                "iso"
            } else if f.normal_form().is_face_only() {
                "face"
            } else if f.normal_form().faces.is_empty() {
                "degeneracy"
            } else {
                "composite"
            };
            let _ = writeln!(s, "  n{} -> n{} [label=\"{kind}\"];", a.src, a.dst);
            let _ = k;
        }
        let _ = writeln!(s, "}}");
        s
    }

    pub fn to_json(&self) -> DrawingJson {
        DrawingJson {
            label: self.label.clone(),
            include_degenerate: self.include_degenerate,
            nodes: self
                .index
                .objects
                .iter()
                .zip(&self.nodes)
                .map(|((class, elt), pres)| DrawingNodeJson {
                    tree: self.site.trees()[*class].code(),
                    element: elt.clone(),
                    presentation: pres.clone(),
                })
                .collect(),
            arrows: self
                .index
                .arrows
                .iter()
                .zip(&self.arrows)
                .map(|(a, hom)| DrawingArrowJson {
                    src: a.src,
                    dst: a.dst,
                    edge_map: self.site.morphism(a.mor).edge_map().clone(),
                    assignment: hom.assignment.clone(),
                })
                .collect(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('"', "\\\"")
}

#[derive(Serialize, Deserialize)]
pub struct DrawingJson {
    pub label: String,
    pub include_degenerate: bool,
    pub nodes: Vec<DrawingNodeJson>,
    pub arrows: Vec<DrawingArrowJson>,
}

#[derive(Serialize, Deserialize)]
pub struct DrawingNodeJson {
    pub tree: String,
    pub element: String,
    pub presentation: StarPresentation,
}

#[derive(Serialize, Deserialize)]
pub struct DrawingArrowJson {
    pub src: usize,
    pub dst: usize,
    pub edge_map: crate::morphism::EdgeMap,
    pub assignment: Assignment,
}

/// All assignments from `a` to `b` sending each generator to a sum of
/// distinct target generators (possibly empty) that pass relation
/// verification. Since the images must partition the target's unit sum,
/// candidates are enumerated as ownership functions from target generators
/// to source generators. This is a declared sub-class of the full
/// homomorphism set, not all of it.
pub fn edge_homs(a: &StarPresentation, b: &StarPresentation) -> Result<Vec<StarHom>> {
    if a.unit_sum != a.generators || b.unit_sum != b.generators {
        return Err(Error::Precondition(
            "edge_homs expects unit-sum presentations".to_string(),
        ));
    }
    let na = a.generators.len();
    let nb = b.generators.len();
    let mut out = Vec::new();
    let mut owner = vec![0usize; nb];
    loop {
        let mut assignment: Assignment = a
            .generators
            .iter()
            .map(|g| (g.clone(), BTreeSet::new()))
            .collect();
        for (bi, &ai) in owner.iter().enumerate() {
            assignment
                .get_mut(&a.generators[ai])
                .expect("owner indexes source generators")
                .insert(b.generators[bi].clone());
        }
        let hom = StarHom::new(a.clone(), b.clone(), assignment);
        if verify_hom(&hom)?.pass {
            out.push(StarHom {
                verified: true,
                ..hom
            });
        }
        // Advance the ownership function in lexicographic order.
        let mut pos = nb;
        loop {
            if pos == 0 {
                out.sort_by_key(|h| h.render());
                return Ok(out);
            }
            pos -= 1;
            owner[pos] += 1;
            if owner[pos] < na {
                break;
            }
            owner[pos] = 0;
        }
    }
}

/// The truncated presheaf sending a tree class to the edge homs from `a`
/// into its presentation, acting by composition with induced assignments.
pub fn dendraw_probe(site: Arc<OmegaSite>, a: &StarPresentation) -> Result<FinDendroidalSet> {
    let mut homs: Vec<BTreeMap<String, Assignment>> = Vec::new();
    for t in site.trees() {
        let pres = dendrex(t);
        let mut level = BTreeMap::new();
        for h in edge_homs(a, &pres)? {
            level.insert(h.render(), h.assignment);
        }
        homs.push(level);
    }
    FinDendroidalSet::probe(
        site,
        a.clone(),
        homs,
        format!(
            "edge homs from {}",
            a.origin
                .clone()
                .unwrap_or_else(|| "presentation".to_string())
        ),
    )
}
