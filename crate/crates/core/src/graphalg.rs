//! Cuntz-Krieger presentations of finite directed graphs, and exact matrix
//! verification of the simplex/matrix zigzag for linear graphs.
//!
//! Matrix checks run in exact rational arithmetic; floating point appears
//! only in barycentric simplex evaluation, with tolerance [`SIMPLEX_TOL`].
//!
//! A note on dimensions for the linear graph with `n` edges: its graph
//! algebra is realized by Cuntz-Krieger matrices of size `n + 1`, while the
//! edge-generator presentation of the same graph is represented unitally by
//! diagonal units in dimension `n` (the unit relation over `n` generators
//! forces that dimension).

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dendrex::{abelian_dendrex, dendrex, verified, StarHom, StarPresentation};
use crate::error::{Error, Result};
use crate::tree::Tree;

pub type Rational = Ratio<i64>;

/// Tolerance for the floating-point simplex checks.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A finite directed graph with named vertices and edges; every edge has a
/// source and a range vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub name: String,
    pub source: String,
    pub range: String,
}

impl DirectedGraph {
    pub fn validate(&self) -> Result<()> {
        let vset: BTreeSet<&String> = self.vertices.iter().collect();
        if vset.len() != self.vertices.len() {
            return Err(Error::Validation("duplicate vertex names".to_string()));
        }
        let mut eset = BTreeSet::new();
        for e in &self.edges {
            if !eset.insert(&e.name) {
                return Err(Error::Validation(format!(
                    "duplicate edge name `{}`",
                    e.name
                )));
            }
            if !vset.contains(&e.source) || !vset.contains(&e.range) {
                return Err(Error::Validation(format!(
                    "edge `{}` has an endpoint outside the vertex set",
                    e.name
                )));
            }
        }
        Ok(())
    }

    /// Edges ranging at `v`.
    pub fn incoming(&self, v: &str) -> Vec<&GraphEdge> {
        self.edges.iter().filter(|e| e.range == v).collect()
    }
}

/// The linear graph with vertices `v0..vn` and edges `e1..en`, edge `ei`
/// running from `vi` down to `v(i-1)`.
pub fn linear_graph(n: usize) -> DirectedGraph {
    DirectedGraph {
        vertices: (0..=n).map(|i| format!("v{i}")).collect(),
        edges: (1..=n)
            .map(|i| GraphEdge {
                name: format!("e{i}"),
                source: format!("v{i}"),
                range: format!("v{}", i - 1),
            })
            .collect(),
    }
}

/// A Cuntz-Krieger presentation: one projection per vertex, one partial
/// isometry per edge, with the usual relations. The second relation is
/// instantiated exactly at vertices that receive edges.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CkPresentation {
    pub graph: DirectedGraph,
    pub relations: Vec<CkRelation>,
    /// True exactly when the vertex set is finite, which it always is here.
    pub unital: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CkRelation {
    /// Projections at distinct vertices are orthogonal.
    Orthogonal { v: String, w: String },
    /// The isometry of an edge squares to the projection at its source.
    Ck1 { edge: String, source: String },
    /// The projection at a receiving vertex is the sum of the range
    /// projections of its incoming edges.
    Ck2 { vertex: String, edges: Vec<String> },
    /// The projections sum to the unit.
    UnitSum { vertices: Vec<String> },
}

impl CkRelation {
    /// Canonical textual form of the relation.
    pub fn render(&self) -> String {
        match self {
            CkRelation::Orthogonal { v, w } => format!("P[{v}] P[{w}] = 0"),
            CkRelation::Ck1 { edge, source } => format!("S[{edge}]* S[{edge}] = P[{source}]"),
            CkRelation::Ck2 { vertex, edges } => {
                let sum: Vec<String> = edges.iter().map(|e| format!("S[{e}] S[{e}]*")).collect();
                format!("P[{vertex}] = {}", sum.join(" + "))
            }
            CkRelation::UnitSum { vertices } => {
                let sum: Vec<String> = vertices.iter().map(|v| format!("P[{v}]")).collect();
                format!("{} = 1", sum.join(" + "))
            }
        }
    }
}

impl CkPresentation {
    pub fn projection_name(v: &str) -> String {
        format!("P[{v}]")
    }

    pub fn isometry_name(e: &str) -> String {
        format!("S[{e}]")
    }

    /// All generator names, projections first.
    pub fn generator_names(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .graph
            .vertices
            .iter()
            .map(|v| CkPresentation::projection_name(v))
            .collect();
        out.extend(
            self.graph
                .edges
                .iter()
                .map(|e| CkPresentation::isometry_name(&e.name)),
        );
        out
    }

    pub fn rendered_relations(&self) -> Vec<String> {
        self.relations.iter().map(|r| r.render()).collect()
    }
}

/// Build the Cuntz-Krieger presentation of a finite graph.
pub fn ck_presentation(graph: &DirectedGraph) -> Result<CkPresentation> {
    graph.validate()?;
    let mut relations = Vec::new();
    for (i, v) in graph.vertices.iter().enumerate() {
        for w in graph.vertices.iter().skip(i + 1) {
            relations.push(CkRelation::Orthogonal {
                v: v.clone(),
                w: w.clone(),
            });
        }
    }
    for e in &graph.edges {
        relations.push(CkRelation::Ck1 {
            edge: e.name.clone(),
            source: e.source.clone(),
        });
    }
    for v in &graph.vertices {
        let incoming: Vec<String> = graph.incoming(v).iter().map(|e| e.name.clone()).collect();
        if !incoming.is_empty() {
            relations.push(CkRelation::Ck2 {
                vertex: v.clone(),
                edges: incoming,
            });
        }
    }
    relations.push(CkRelation::UnitSum {
        vertices: graph.vertices.clone(),
    });
    Ok(CkPresentation {
        graph: graph.clone(),
        relations,
        unital: true,
    })
}

/// Dense square matrix over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    pub dim: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zero(dim: usize) -> RatMatrix {
        RatMatrix {
            dim,
            entries: vec![Rational::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> RatMatrix {
        let mut m = RatMatrix::zero(dim);
        for i in 0..dim {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// The matrix unit with a single 1 at `(row, col)`.
    pub fn unit(dim: usize, row: usize, col: usize) -> RatMatrix {
        let mut m = RatMatrix::zero(dim);
        m.set(row, col, Rational::one());
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.entries[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: Rational) {
        self.entries[r * self.dim + c] = x;
    }

    pub fn add(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.dim != other.dim {
            return Err(Error::Precondition("matrix dimension mismatch".to_string()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(RatMatrix {
            dim: self.dim,
            entries,
        })
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.dim != other.dim {
            return Err(Error::Precondition("matrix dimension mismatch".to_string()));
        }
        let mut out = RatMatrix::zero(self.dim);
        for r in 0..self.dim {
            for k in 0..self.dim {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..self.dim {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out.set(r, c, out.get(r, c) + a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Adjoint; entries are rational (real), so this is the transpose.
    pub fn adjoint(&self) -> RatMatrix {
        let mut out = RatMatrix::zero(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.adjoint()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|r| (0..self.dim).all(|c| r == c || self.get(r, c).is_zero()))
    }

    pub fn diagonal_nonnegative(&self) -> bool {
        (0..self.dim).all(|i| !self.get(i, i).is_negative())
    }
}

impl Serialize for RatMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<(i64, i64)>> = (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| {
                        let x = self.get(r, c);
                        (*x.numer(), *x.denom())
                    })
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<(i64, i64)>> = Vec::deserialize(d)?;
        let dim = rows.len();
        let mut m = RatMatrix::zero(dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(serde::de::Error::custom("matrix is not square"));
            }
            for (c, (num, den)) in row.iter().enumerate() {
                if *den == 0 {
                    return Err(serde::de::Error::custom("zero denominator"));
                }
                m.set(r, c, Rational::new(*num, *den));
            }
        }
        Ok(m)
    }
}

/// Assignment of exact matrices to generator names.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixAssignment {
    pub dimension: usize,
    pub matrices: BTreeMap<String, RatMatrix>,
}

impl MatrixAssignment {
    fn get(&self, name: &str) -> Result<&RatMatrix> {
        self.matrices
            .get(name)
            .ok_or_else(|| Error::Precondition(format!("no matrix assigned to `{name}`")))
    }
}

/// Cuntz-Krieger matrices for the linear graph with `n` edges, in dimension
/// `n + 1`: the projection at `vi` is the diagonal unit at `i`, the isometry
/// of `ei` the matrix unit at `(i-1, i)`.
pub fn linear_graph_ck_matrices(n: usize) -> Result<MatrixAssignment> {
    if n == 0 {
        return Err(Error::Precondition("need at least one edge".to_string()));
    }
    let dim = n + 1;
    let mut matrices = BTreeMap::new();
    for i in 0..=n {
        matrices.insert(
            CkPresentation::projection_name(&format!("v{i}")),
            RatMatrix::unit(dim, i, i),
        );
    }
    for i in 1..=n {
        matrices.insert(
            CkPresentation::isometry_name(&format!("e{i}")),
            RatMatrix::unit(dim, i - 1, i),
        );
    }
    Ok(MatrixAssignment {
        dimension: dim,
        matrices,
    })
}

/// The edge-generator presentation of the linear graph with `n` edges:
/// generators `e1..en`, positive, summing to the unit, with no zero
/// monomials since all edges lie on one path.
pub fn linear_dendrex(n: usize) -> Result<StarPresentation> {
    if n == 0 {
        return Err(Error::Precondition("need at least one edge".to_string()));
    }
    let generators: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    Ok(StarPresentation {
        unit_sum: generators.clone(),
        generators,
        zero_pairs: BTreeSet::new(),
        commutative: false,
        origin: Some(format!("linear graph with {n} edges")),
    })
}

/// Diagonal-unit matrices for [`linear_dendrex`]: `ei` goes to the diagonal
/// unit at `i - 1` in dimension `n`, which is the unital dimension for `n`
/// generators summing to the identity.
pub fn matrix_rep_s(n: usize) -> Result<MatrixAssignment> {
    if n == 0 {
        return Err(Error::Precondition("need at least one edge".to_string()));
    }
    let mut matrices = BTreeMap::new();
    for i in 1..=n {
        matrices.insert(format!("e{i}"), RatMatrix::unit(n, i - 1, i - 1));
    }
    Ok(MatrixAssignment {
        dimension: n,
        matrices,
    })
}

/// The identity-on-generators hom from the presentation of the linear tree
/// with `n` unary vertices to its commutative version.
pub fn abelianization_hom(n: usize) -> Result<StarHom> {
    let t = Tree::linear(n);
    let source = dendrex(&t);
    let target = abelian_dendrex(&t);
    let assignment = source
        .generators
        .iter()
        .map(|g| (g.clone(), BTreeSet::from([g.clone()])))
        .collect();
    verified(StarHom::new(source, target, assignment))
}

/// Verification target for [`verify_matrix_assignment`].
pub enum PresentationRef<'a> {
    Star(&'a StarPresentation),
    Ck(&'a CkPresentation),
}

/// Report of a matrix relation check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixReport {
    pub pass: bool,
    pub relations_checked: usize,
    /// First violated relation, rendered.
    pub failure: Option<String>,
}

impl MatrixReport {
    fn fail(&mut self, msg: String) {
        self.pass = false;
        self.failure = Some(msg);
    }
}

/// Check a matrix assignment against a presentation, entirely in exact
/// arithmetic: positivity of generator images (symmetric with nonnegative
/// diagonal; only diagonal images are decided here), unit sums, zero
/// monomials, commutativity where declared, and the Cuntz-Krieger relation
/// instances for graph presentations.
pub fn verify_matrix_assignment(
    pres: &PresentationRef,
    m: &MatrixAssignment,
) -> Result<MatrixReport> {
    let mut report = MatrixReport {
        pass: true,
        relations_checked: 0,
        failure: None,
    };
    match pres {
        PresentationRef::Star(p) => {
            for g in &p.generators {
                let mat = m.get(g)?;
                if mat.dim != m.dimension {
                    return Err(Error::Precondition(format!(
                        "matrix for `{g}` has dimension {} instead of {}",
                        mat.dim, m.dimension
                    )));
                }
                report.relations_checked += 1;
                if !mat.is_symmetric() {
                    report.fail(format!("positivity: matrix of `{g}` is not symmetric"));
                    return Ok(report);
                }
                if mat.is_diagonal() {
                    if !mat.diagonal_nonnegative() {
                        report.fail(format!("positivity: matrix of `{g}` has a negative entry"));
                        return Ok(report);
                    }
                } else {
                    report.fail(format!(
                        "positivity of the non-diagonal matrix of `{g}` is not decided exactly here"
                    ));
                    return Ok(report);
                }
            }
            // Unit sum.
            let mut sum = RatMatrix::zero(m.dimension);
            for g in &p.unit_sum {
                sum = sum.add(m.get(g)?)?;
            }
            report.relations_checked += 1;
            if sum != RatMatrix::identity(m.dimension) {
                report.fail(
                    "unit relation: generator matrices do not sum to the identity".to_string(),
                );
                return Ok(report);
            }
            // Zero pairs, both orders.
            for (a, b) in &p.zero_pairs {
                report.relations_checked += 1;
                if !m.get(a)?.mul(m.get(b)?)?.is_zero() || !m.get(b)?.mul(m.get(a)?)?.is_zero() {
                    report.fail(format!(
                        "zero monomial: product of `{a}` and `{b}` is nonzero"
                    ));
                    return Ok(report);
                }
            }
            if p.commutative {
                for (i, a) in p.generators.iter().enumerate() {
                    for b in p.generators.iter().skip(i + 1) {
                        report.relations_checked += 1;
                        if m.get(a)?.mul(m.get(b)?)? != m.get(b)?.mul(m.get(a)?)? {
                            report.fail(format!("commutativity: `{a}` and `{b}` do not commute"));
                            return Ok(report);
                        }
                    }
                }
            }
        }
        PresentationRef::Ck(p) => {
            for name in p.generator_names() {
                let mat = m.get(&name)?;
                if mat.dim != m.dimension {
                    return Err(Error::Precondition(format!(
                        "matrix for `{name}` has dimension {} instead of {}",
                        mat.dim, m.dimension
                    )));
                }
            }
            // Projections square to themselves and are symmetric.
            for v in &p.graph.vertices {
                let pv = m.get(&CkPresentation::projection_name(v))?;
                report.relations_checked += 1;
                if !pv.is_symmetric() || pv.mul(pv)? != *pv {
                    report.fail(format!("P[{v}] is not a projection"));
                    return Ok(report);
                }
            }
            for rel in &p.relations {
                report.relations_checked += 1;
                let holds = match rel {
                    CkRelation::Orthogonal { v, w } => {
                        let pv = m.get(&CkPresentation::projection_name(v))?;
                        let pw = m.get(&CkPresentation::projection_name(w))?;
                        pv.mul(pw)?.is_zero() && pw.mul(pv)?.is_zero()
                    }
                    CkRelation::Ck1 { edge, source } => {
                        let s = m.get(&CkPresentation::isometry_name(edge))?;
                        let ps = m.get(&CkPresentation::projection_name(source))?;
                        s.adjoint().mul(s)? == *ps
                    }
                    CkRelation::Ck2 { vertex, edges } => {
                        let pv = m.get(&CkPresentation::projection_name(vertex))?;
                        let mut sum = RatMatrix::zero(m.dimension);
                        for e in edges {
                            let s = m.get(&CkPresentation::isometry_name(e))?;
                            sum = sum.add(&s.mul(&s.adjoint())?)?;
                        }
                        sum == *pv
                    }
                    CkRelation::UnitSum { vertices } => {
                        let mut sum = RatMatrix::zero(m.dimension);
                        for v in vertices {
                            sum = sum.add(m.get(&CkPresentation::projection_name(v))?)?;
                        }
                        sum == RatMatrix::identity(m.dimension)
                    }
                };
                if !holds {
                    report.fail(format!("relation violated: {}", rel.render()));
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// Barycentric evaluation of the commutative presentation of the linear
/// tree with `n` unary vertices at a point of the `n`-simplex, given as
/// `n + 1` nonnegative coordinates summing to one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimplexAssignment {
    pub presentation: StarPresentation,
    pub values: BTreeMap<String, f64>,
}

pub fn simplex_eval(n: usize, point: &[f64]) -> Result<SimplexAssignment> {
    if point.len() != n + 1 {
        return Err(Error::Precondition(format!(
            "expected {} coordinates, got {}",
            n + 1,
            point.len()
        )));
    }
    for (i, x) in point.iter().enumerate() {
        if *x < 0.0 || !x.is_finite() {
            return Err(Error::Precondition(format!(
                "coordinate {i} is negative or not finite"
            )));
        }
    }
    let sum: f64 = point.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Precondition(format!(
            "coordinates sum to {sum}, not 1 within {SIMPLEX_TOL}"
        )));
    }
    let presentation = abelian_dendrex(&Tree::linear(n));
    let values = presentation
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), point[i]))
        .collect();
    Ok(SimplexAssignment {
        presentation,
        values,
    })
}

/// Seeded sweep of [`simplex_eval`] over uniformly sampled simplex points.
pub fn simplex_sweep(n: usize, count: usize, seed: u64) -> Result<crate::identities::SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = crate::identities::SuiteReport::default();
    for k in 0..count {
        // Normalized exponential samples are uniform on the simplex.
        let mut coords: Vec<f64> = (0..=n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = coords.iter().sum();
        for c in &mut coords {
            *c /= total;
        }
        // Exact renormalization of the last coordinate guards the sum check.
        let partial: f64 = coords[..n].iter().sum();
        coords[n] = 1.0 - partial;
        if coords[n] < 0.0 {
            coords[n] = 0.0;
        }
        report.instances += 1;
        match simplex_eval(n, &coords) {
            Ok(assignment) => {
                let sum: f64 = assignment.values.values().sum();
                if (sum - 1.0).abs() > SIMPLEX_TOL || assignment.values.values().any(|x| *x < 0.0) {
                    report
                        .failures
                        .push(format!("sweep {k}: relations violated at {coords:?}"));
                }
            }
            Err(e) => report.failures.push(format!("sweep {k}: {e}")),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_graph_shape() {
        let g = linear_graph(3);
        g.validate().unwrap();
        assert_eq!(g.vertices.len(), 4);
        assert_eq!(g.edges.len(), 3);
        assert_eq!(g.edges[0].source, "v1");
        assert_eq!(g.edges[0].range, "v0");
        assert!(g.incoming("v3").is_empty());
        assert_eq!(g.incoming("v0").len(), 1);
    }

    #[test]
    fn ck_of_linear_graph_counts() {
        let p = ck_presentation(&linear_graph(2)).unwrap();
        assert!(p.unital);
        let ck1 = p
            .relations
            .iter()
            .filter(|r| matches!(r, CkRelation::Ck1 { .. }))
            .count();
        let ck2 = p
            .relations
            .iter()
            .filter(|r| matches!(r, CkRelation::Ck2 { .. }))
            .count();
        assert_eq!(ck1, 2);
        // Receiving vertices are v0 and v1 only.
        assert_eq!(ck2, 2);
    }

    #[test]
    fn ck_of_edgeless_graph() {
        let g = DirectedGraph {
            vertices: vec!["a".into(), "b".into(), "c".into()],
            edges: vec![],
        };
        let p = ck_presentation(&g).unwrap();
        assert!(p
            .relations
            .iter()
            .all(|r| !matches!(r, CkRelation::Ck1 { .. } | CkRelation::Ck2 { .. })));
        let orth = p
            .relations
            .iter()
            .filter(|r| matches!(r, CkRelation::Orthogonal { .. }))
            .count();
        assert_eq!(orth, 3);
    }

    #[test]
    fn two_loop_graph_gives_cuntz_relations() {
        let g = DirectedGraph {
            vertices: vec!["v".into()],
            edges: vec![
                GraphEdge {
                    name: "e1".into(),
                    source: "v".into(),
                    range: "v".into(),
                },
                GraphEdge {
                    name: "e2".into(),
                    source: "v".into(),
                    range: "v".into(),
                },
            ],
        };
        let p = ck_presentation(&g).unwrap();
        let rendered = p.rendered_relations();
        assert_eq!(
            rendered,
            vec![
                "S[e1]* S[e1] = P[v]",
                "S[e2]* S[e2] = P[v]",
                "P[v] = S[e1] S[e1]* + S[e2] S[e2]*",
                "P[v] = 1",
            ]
        );
    }

    #[test]
    fn ck_matrices_verify_for_small_n() {
        for n in 1..=4 {
            let p = ck_presentation(&linear_graph(n)).unwrap();
            let m = linear_graph_ck_matrices(n).unwrap();
            assert_eq!(m.dimension, n + 1);
            let report = verify_matrix_assignment(&PresentationRef::Ck(&p), &m).unwrap();
            assert!(report.pass, "n={n}: {:?}", report.failure);
        }
    }

    #[test]
    fn ck_matrices_n1_by_hand() {
        // 2x2 matrices: S*S = P[v1], SS* = P[v0].
        let m = linear_graph_ck_matrices(1).unwrap();
        let s = &m.matrices["S[e1]"];
        let p0 = &m.matrices["P[v0]"];
        let p1 = &m.matrices["P[v1]"];
        assert_eq!(s.adjoint().mul(s).unwrap(), *p1);
        assert_eq!(s.mul(&s.adjoint()).unwrap(), *p0);
        assert_eq!(p0.add(p1).unwrap(), RatMatrix::identity(2));
    }

    #[test]
    fn diagonal_matrices_verify_against_linear_dendrex() {
        for n in 1..=4 {
            let p = linear_dendrex(n).unwrap();
            let m = matrix_rep_s(n).unwrap();
            assert_eq!(m.dimension, n);
            let report = verify_matrix_assignment(&PresentationRef::Star(&p), &m).unwrap();
            assert!(report.pass, "n={n}: {:?}", report.failure);
        }
        // n=1 is the unit of dimension one.
        let m = matrix_rep_s(1).unwrap();
        assert_eq!(m.matrices["e1"], RatMatrix::identity(1));
    }

    #[test]
    fn corrupt_entry_is_named() {
        let p = ck_presentation(&linear_graph(2)).unwrap();
        let mut m = linear_graph_ck_matrices(2).unwrap();
        let s = m.matrices.get_mut("S[e1]").unwrap();
        s.set(2, 2, Rational::one());
        let report = verify_matrix_assignment(&PresentationRef::Ck(&p), &m).unwrap();
        assert!(!report.pass);
        assert!(report.failure.unwrap().contains("S[e1]"));
    }

    #[test]
    fn abelianization_hom_verifies_and_is_surjective() {
        for n in 0..=4 {
            let h = abelianization_hom(n).unwrap();
            assert!(h.verified);
            assert!(crate::dendrex::is_generator_surjective(&h).unwrap());
        }
    }

    #[test]
    fn simplex_eval_cases() {
        let a = simplex_eval(1, &[0.25, 0.75]).unwrap();
        assert_eq!(a.values["e0"], 0.25);
        assert_eq!(a.values["e1"], 0.75);
        let v = simplex_eval(2, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.values["e0"], 1.0);
        assert!(simplex_eval(1, &[-0.1, 1.1]).is_err());
        assert!(simplex_eval(1, &[0.6, 0.6]).is_err());
        assert!(simplex_eval(2, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn simplex_sweep_deterministic_and_green() {
        let a = simplex_sweep(3, 50, 7).unwrap();
        assert!(a.passed(), "{:?}", a.failures);
        let b = simplex_sweep(3, 50, 7).unwrap();
        assert_eq!(a.instances, b.instances);
    }

    #[test]
    fn matrix_serde_round_trip() {
        let m = linear_graph_ck_matrices(2).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: MatrixAssignment = serde_json::from_str(&text).unwrap();
        assert_eq!(back.dimension, 3);
        for (k, v) in &m.matrices {
            assert_eq!(&back.matrices[k], v);
        }
    }
}
