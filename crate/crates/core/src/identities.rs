//! Exhaustive checks of the face and degeneracy interchange laws.
//!
//! Each law is tested on every applicable instance over every tree up to a
//! given edge count. Laws (I) through (VI) are asserted as literal morphism
//! equalities (equal source, target, and edge map). Law (VII) composes a
//! degeneracy with a face induced by one of its adjacent edges (or by vertex
//! removal); the composite is the canonical relabeling isomorphism onto the
//! collapsed tree, since the merged edge carries a fresh name, and the check
//! asserts exactly that: an isomorphism fixing every edge except the
//! surviving adjacent edge, which goes to the merged edge.

use crate::error::Result;
use crate::morphism::TreeMorphism;
use crate::tree::{enumerate_trees_with_ceiling, Tree, DEFAULT_ENUMERATION_CEILING};

/// Outcome of a verification sweep.
#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub instances: usize,
    pub failures: Vec<String>,
    /// When set, each law instance also composes the contravariantly
    /// induced presentation maps of both sides and compares assignments.
    transport: bool,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, context: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures.push(context());
        }
    }

    /// Induced assignment of a composite given as (first applied, second
    /// applied); contravariance makes the second's induced map apply first.
    fn induced_side(
        pair: (&TreeMorphism, &TreeMorphism),
    ) -> Result<std::collections::BTreeMap<String, std::collections::BTreeSet<String>>> {
        let first = crate::dendrex::induced_hom(pair.0)?;
        let second = crate::dendrex::induced_hom(pair.1)?;
        Ok(crate::dendrex::StarHom::compose(&first, &second)?.assignment)
    }

    /// Compare the induced assignments of two parallel composites.
    fn check_transport(
        &mut self,
        lhs: (&TreeMorphism, &TreeMorphism),
        rhs: (&TreeMorphism, &TreeMorphism),
        context: impl Fn() -> String,
    ) {
        if !self.transport {
            return;
        }
        match (Self::induced_side(lhs), Self::induced_side(rhs)) {
            (Ok(a), Ok(b)) => self.check(a == b, || format!("transport of {}", context())),
            _ => self.check(false, || {
                format!("transport of {} failed to build", context())
            }),
        }
    }

    /// Compare the induced assignment of a composite against the induced
    /// map of a single morphism equal to it.
    fn check_transport_single(
        &mut self,
        lhs: (&TreeMorphism, &TreeMorphism),
        composite: &TreeMorphism,
        context: impl Fn() -> String,
    ) {
        if !self.transport {
            return;
        }
        let rhs = crate::dendrex::induced_hom(composite).map(|h| h.assignment);
        match (Self::induced_side(lhs), rhs) {
            (Ok(a), Ok(b)) => self.check(a == b, || format!("transport of {}", context())),
            _ => self.check(false, || {
                format!("transport of {} failed to build", context())
            }),
        }
    }
}

/// Run laws (I) through (VII) on all trees with at most `max_edges` edges.
pub fn identity_suite(max_edges: usize) -> Result<SuiteReport> {
    identity_suite_with_ceiling(max_edges, DEFAULT_ENUMERATION_CEILING)
}

pub fn identity_suite_with_ceiling(max_edges: usize, ceiling: usize) -> Result<SuiteReport> {
    run_suite(max_edges, ceiling, false)
}

/// As [`identity_suite`], additionally transporting every law instance
/// through the presentation functor.
pub fn identity_transport_suite(max_edges: usize) -> Result<SuiteReport> {
    run_suite(max_edges, DEFAULT_ENUMERATION_CEILING, true)
}

fn run_suite(max_edges: usize, ceiling: usize, transport: bool) -> Result<SuiteReport> {
    let trees = enumerate_trees_with_ceiling(max_edges, ceiling)?;
    let mut report = SuiteReport {
        transport,
        ..SuiteReport::default()
    };
    for t in &trees {
        check_inner_inner(t, &mut report);
        check_outer_outer(t, &mut report);
        check_inner_outer_disjoint(t, &mut report);
        check_inner_outer_adjacent(t, &mut report);
        check_degeneracy_degeneracy(t, &mut report);
        check_degeneracy_face(t, &mut report);
        check_degeneracy_section(t, &mut report);
    }
    Ok(report)
}

/// (I) Distinct inner edges contract in either order.
fn check_inner_inner(t: &Tree, report: &mut SuiteReport) {
    let inner: Vec<String> = t.inner_edges().iter().map(|s| s.to_string()).collect();
    for (i, e) in inner.iter().enumerate() {
        for f in inner.iter().skip(i + 1) {
            let de = TreeMorphism::inner_face(t, e).expect("inner edge");
            let df = TreeMorphism::inner_face(t, f).expect("inner edge");
            let ef = TreeMorphism::inner_face(de.source(), f).expect("still inner");
            let fe = TreeMorphism::inner_face(df.source(), e).expect("still inner");
            let lhs = TreeMorphism::compose(&de, &ef).expect("composable");
            let rhs = TreeMorphism::compose(&df, &fe).expect("composable");
            report.check(lhs == rhs && ef.source() == fe.source(), || {
                format!("(I) tree {} edges {e},{f}", t.code())
            });
            report.check_transport((&ef, &de), (&fe, &df), || {
                format!("(I) tree {} edges {e},{f}", t.code())
            });
        }
    }
}

/// (II) Distinct outer faces of a tree with at least three vertices commute,
/// and each stays defined after the other is applied.
fn check_outer_outer(t: &Tree, report: &mut SuiteReport) {
    if t.num_vertices() < 3 {
        return;
    }
    let removable: Vec<(String, TreeMorphism)> = t
        .vertices()
        .iter()
        .filter_map(|v| {
            TreeMorphism::outer_face(t, v)
                .ok()
                .map(|m| (v.to_string(), m))
        })
        .collect();
    for (i, (v, dv)) in removable.iter().enumerate() {
        for (w, dw) in removable.iter().skip(i + 1) {
            let vw = TreeMorphism::outer_face(dv.source(), w);
            let wv = TreeMorphism::outer_face(dw.source(), v);
            match (vw, wv) {
                (Ok(vw), Ok(wv)) => {
                    let lhs = TreeMorphism::compose(dv, &vw).expect("composable");
                    let rhs = TreeMorphism::compose(dw, &wv).expect("composable");
                    report.check(lhs == rhs && vw.source() == wv.source(), || {
                        format!("(II) tree {} vertices {v},{w}", t.code())
                    });
                    report.check_transport((&vw, dv), (&wv, dw), || {
                        format!("(II) tree {} vertices {v},{w}", t.code())
                    });
                }
                (vw, wv) => {
                    report.check(false, || {
                        format!(
                            "(II) tree {} vertices {v},{w}: transport failed ({}, {})",
                            t.code(),
                            vw.is_ok(),
                            wv.is_ok()
                        )
                    });
                }
            }
        }
    }
}

/// (III) An inner face and an outer face at a non-adjacent vertex commute.
fn check_inner_outer_disjoint(t: &Tree, report: &mut SuiteReport) {
    for e in t.inner_edges() {
        for v in t.vertices() {
            let incident: Vec<&str> = {
                let mut inc = vec![v];
                inc.extend(t.vertex_inputs(v).unwrap());
                inc
            };
            if incident.contains(&e) {
                continue;
            }
            let Ok(dv) = TreeMorphism::outer_face(t, v) else {
                continue;
            };
            let de = TreeMorphism::inner_face(t, e).expect("inner edge");
            let ev = TreeMorphism::outer_face(de.source(), v);
            let ve = TreeMorphism::inner_face(dv.source(), e);
            match (ev, ve) {
                (Ok(ev), Ok(ve)) => {
                    let lhs = TreeMorphism::compose(&de, &ev).expect("composable");
                    let rhs = TreeMorphism::compose(&dv, &ve).expect("composable");
                    report.check(lhs == rhs && ev.source() == ve.source(), || {
                        format!("(III) tree {} edge {e} vertex {v}", t.code())
                    });
                    report.check_transport((&ev, &de), (&ve, &dv), || {
                        format!("(III) tree {} edge {e} vertex {v}", t.code())
                    });
                }
                (ev, ve) => {
                    report.check(false, || {
                        format!(
                            "(III) tree {} edge {e} vertex {v}: transport failed ({}, {})",
                            t.code(),
                            ev.is_ok(),
                            ve.is_ok()
                        )
                    });
                }
            }
        }
    }
}

/// (IV) For an inner edge `e` adjacent to a removable vertex `v` with other
/// endpoint `w`: removing the fused vertex from the contraction is possible
/// exactly when removing `w` after `v` is, and the composites agree.
fn check_inner_outer_adjacent(t: &Tree, report: &mut SuiteReport) {
    for e in t.inner_edges() {
        let top = e.to_string();
        let bot = t
            .parent_of(e)
            .expect("inner edge has a vertex below")
            .to_string();
        for (v, w) in [(top.clone(), bot.clone()), (bot.clone(), top.clone())] {
            let Ok(dv) = TreeMorphism::outer_face(t, &v) else {
                continue;
            };
            let de = TreeMorphism::inner_face(t, e).expect("inner edge");
            // The fused vertex of the contraction sits at the outgoing edge
            // of the lower endpoint.
            let z = bot.clone();
            let dz = TreeMorphism::outer_face(de.source(), &z);
            let dw = TreeMorphism::outer_face(dv.source(), &w);
            match (dz, dw) {
                (Ok(dz), Ok(dw)) => {
                    let lhs = TreeMorphism::compose(&de, &dz).expect("composable");
                    let rhs = TreeMorphism::compose(&dv, &dw).expect("composable");
                    report.check(lhs == rhs && dz.source() == dw.source(), || {
                        format!("(IV) tree {} edge {e} vertex {v}", t.code())
                    });
                    report.check_transport((&dz, &de), (&dw, &dv), || {
                        format!("(IV) tree {} edge {e} vertex {v}", t.code())
                    });
                }
                (Err(_), Err(_)) => {
                    // Consistent: neither side exists.
                    report.check(true, String::new);
                }
                (dz, dw) => {
                    report.check(false, || {
                        format!(
                            "(IV) tree {} edge {e} vertex {v}: existence mismatch ({}, {})",
                            t.code(),
                            dz.is_ok(),
                            dw.is_ok()
                        )
                    });
                }
            }
        }
    }
}

fn unary_vertices(t: &Tree) -> Vec<String> {
    t.vertices()
        .into_iter()
        .filter(|v| t.vertex_inputs(v).is_some_and(|i| i.len() == 1))
        .map(|v| v.to_string())
        .collect()
}

/// (V) Degeneracies commute; the merged-name scheme keeps the two collapse
/// orders literally equal.
fn check_degeneracy_degeneracy(t: &Tree, report: &mut SuiteReport) {
    let unary = unary_vertices(t);
    for (i, v) in unary.iter().enumerate() {
        for w in unary.iter().skip(i + 1) {
            let sv = TreeMorphism::degeneracy(t, v).expect("unary");
            let sw = TreeMorphism::degeneracy(t, w).expect("unary");
            // Transport the other vertex through the collapse; its outgoing
            // edge may have been merged and renamed.
            let w_in = sv.apply(w).expect("edge survives").to_string();
            let v_in = sw.apply(v).expect("edge survives").to_string();
            let sw2 = TreeMorphism::degeneracy(sv.target(), &w_in).expect("still unary");
            let sv2 = TreeMorphism::degeneracy(sw.target(), &v_in).expect("still unary");
            let lhs = TreeMorphism::compose(&sw2, &sv).expect("composable");
            let rhs = TreeMorphism::compose(&sv2, &sw).expect("composable");
            report.check(lhs == rhs && sw2.target() == sv2.target(), || {
                format!("(V) tree {} vertices {v},{w}", t.code())
            });
            report.check_transport((&sv, &sw2), (&sw, &sv2), || {
                format!("(V) tree {} vertices {v},{w}", t.code())
            });
        }
    }
}

/// (VI) A face whose source keeps a unary vertex and both its edges commutes
/// with the degeneracy at that vertex.
fn check_degeneracy_face(t: &Tree, report: &mut SuiteReport) {
    for v in unary_vertices(t) {
        let above = t.vertex_inputs(&v).unwrap()[0].to_string();
        let sv = TreeMorphism::degeneracy(t, &v).expect("unary");
        for face in TreeMorphism::elementary_faces(t) {
            let sub = face.source();
            if !sub.contains_edge(&v) || !sub.contains_edge(&above) || !sub.has_vertex_above(&v) {
                continue;
            }
            let sv_sub = TreeMorphism::degeneracy(sub, &v).expect("unary in subtree");
            // The matching face of the collapsed tree removes the same edges.
            let removed = &face.normal_form().faces[0].removed;
            let candidates: Vec<TreeMorphism> = TreeMorphism::elementary_faces(sv.target())
                .into_iter()
                .filter(|g| {
                    &g.normal_form().faces[0].removed == removed && g.source() == sv_sub.target()
                })
                .collect();
            if candidates.len() != 1 {
                report.check(false, || {
                    format!(
                        "(VI) tree {} vertex {v}: {} matching faces of the collapse",
                        t.code(),
                        candidates.len()
                    )
                });
                continue;
            }
            let lhs = TreeMorphism::compose(&sv, &face).expect("composable");
            let rhs = TreeMorphism::compose(&candidates[0], &sv_sub).expect("composable");
            report.check(lhs == rhs, || {
                format!("(VI) tree {} vertex {v} face {face}", t.code())
            });
            report.check_transport((&face, &sv), (&sv_sub, &candidates[0]), || {
                format!("(VI) tree {} vertex {v} face {face}", t.code())
            });
        }
    }
}

/// (VII) A face induced by an edge adjacent to a unary vertex (or by the
/// vertex's removal) is a section of the degeneracy: the composite is the
/// canonical relabeling isomorphism onto the collapsed tree.
fn check_degeneracy_section(t: &Tree, report: &mut SuiteReport) {
    for v in unary_vertices(t) {
        let above = t.vertex_inputs(&v).unwrap()[0].to_string();
        let sv = TreeMorphism::degeneracy(t, &v).expect("unary");
        let merged = sv.apply(&v).expect("merged edge").to_string();
        let mut faces: Vec<TreeMorphism> = Vec::new();
        for e in [v.clone(), above.clone()] {
            if t.is_inner(&e) {
                faces.push(TreeMorphism::inner_face(t, &e).expect("inner"));
            }
            if t.num_vertices() == 1 {
                faces.push(TreeMorphism::edge_face(t, &e).expect("corolla edge"));
            }
        }
        if let Ok(m) = TreeMorphism::outer_face(t, &v) {
            faces.push(m);
        }
        for face in faces {
            let comp = TreeMorphism::compose(&sv, &face).expect("composable");
            let survivor = if face.source().contains_edge(&v) {
                v.clone()
            } else {
                above.clone()
            };
            let relabels_ok = comp.edge_map().iter().all(|(k, val)| {
                if *k == survivor {
                    *val == merged
                } else {
                    k == val
                }
            });
            report.check(comp.is_isomorphism() && relabels_ok, || {
                format!("(VII) tree {} vertex {v} face {face}", t.code())
            });
            report.check_transport_single((&face, &sv), &comp, || {
                format!("(VII) tree {} vertex {v} face {face}", t.code())
            });
        }
    }
}
