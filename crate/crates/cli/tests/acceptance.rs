//! Acceptance suite. One test per criterion, each printing a pass/fail
//! line; run with `cargo test --test acceptance -- --nocapture` to see them
//! all.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use dendroidal::dendrex::{coherent, dendrex, functoriality_suite, is_generator_surjective};
use dendroidal::drawing::{draw, verify_drawing, Drawing};
use dendroidal::graphalg::{
    abelianization_hom, ck_presentation, linear_dendrex, linear_graph, linear_graph_ck_matrices,
    matrix_rep_s, simplex_sweep, verify_matrix_assignment, DirectedGraph, GraphEdge,
    PresentationRef,
};
use dendroidal::identities::identity_suite;
use dendroidal::morphism::hom_set;
use dendroidal::presheaf::{is_normal_mono, FinDendroidalSet, OmegaSite, PresheafInclusion};
use dendroidal::tree::{enumerate_trees, Tree};

fn verdict(name: &str, pass: bool, detail: String) -> bool {
    println!(
        "criterion {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

#[test]
fn criterion_01_dendroidal_identity_suite() {
    let start = Instant::now();
    let report = identity_suite(6).unwrap();
    let elapsed = start.elapsed();
    let pass = report.passed() && elapsed.as_secs() < 60;
    assert!(
        verdict(
            "1 identity suite <=6 edges",
            pass,
            format!(
                "{} instances, {} failures, {:.2?}",
                report.instances,
                report.failures.len(),
                elapsed
            )
        ),
        "{:?}",
        report.failures.first()
    );
}

#[test]
fn criterion_02_functoriality() {
    let report = functoriality_suite(4).unwrap();
    assert!(
        verdict(
            "2 functoriality <=4 edges",
            report.passed(),
            format!(
                "{} instances, {} failures",
                report.instances,
                report.failures.len()
            )
        ),
        "{:?}",
        report.failures.first()
    );
}

/// Leaves l1, l2 into a vertex with outgoing e1; a stump on e2; e1 and e2
/// into the root vertex with root edge r.
fn stump_branch_tree() -> Tree {
    let v = Tree::with_node("e1", vec![Tree::leaf("l1"), Tree::leaf("l2")]).unwrap();
    let w = Tree::with_node("e2", vec![]).unwrap();
    Tree::with_node("r", vec![v, w]).unwrap()
}

#[test]
fn criterion_03_worked_zero_monomials() {
    let t = stump_branch_tree();
    let set =
        |edges: &[&str]| -> BTreeSet<String> { edges.iter().map(|s| s.to_string()).collect() };
    let a = !coherent(&t, &set(&["l2", "e1", "e2"])).unwrap();
    let b = coherent(&t, &set(&["r", "e1", "l1"])).unwrap();
    let c = coherent(&t, &set(&["e1", "l2"])).unwrap();
    assert!(verdict(
        "3 zero-monomial examples",
        a && b && c,
        format!("vanishing {a}, chain {b}, repetition {c}")
    ));
}

#[test]
fn criterion_04_unit_tree_presents_the_scalars() {
    let p = dendrex(&Tree::unit());
    let pass = p.generators.len() == 1 && p.unit_sum == p.generators && p.zero_pairs.is_empty();
    assert!(verdict(
        "4 unit tree gives one generator equal to 1",
        pass,
        format!("generators {:?}", p.generators)
    ));
}

/// All monotone maps from a chain of m+1 elements to one of n+1 elements.
fn monotone_maps(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; m + 1];
    loop {
        if cur.windows(2).all(|w| w[0] <= w[1]) {
            out.push(cur.clone());
        }
        let mut i = m + 1;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] <= n {
                break;
            }
            cur[i] = 0;
        }
    }
}

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

#[test]
fn criterion_05_simplicial_consistency() {
    // Hom cardinalities against the monotone-map count.
    let mut pass = true;
    let mut detail = String::new();
    for m in 0..=4 {
        for n in 0..=4 {
            let count = hom_set(&Tree::linear(m), &Tree::linear(n)).len();
            let expected = binom(n + m + 1, m + 1);
            if count != expected {
                pass = false;
                detail = format!("hom(L{m},L{n}) = {count}, expected {expected}");
            }
        }
    }
    // Boundaries and horns of linear trees against their simplicial
    // counterparts, value by value within bound 4.
    let site = OmegaSite::new(4).unwrap();
    let linear_class = |i: usize| -> Option<usize> {
        (0..=3).find(|m| site.trees()[i].code() == Tree::linear(*m).code())
    };
    for n in 1..=3 {
        let t = Tree::linear(n);
        let boundary = FinDendroidalSet::boundary(site.clone(), &t).unwrap();
        for i in 0..site.trees().len() {
            let got = boundary.sub.values(i).len();
            let expected = match linear_class(i) {
                Some(m) => monotone_maps(m, n)
                    .iter()
                    .filter(|g| (0..=n).any(|j| !g.contains(&j)))
                    .count(),
                None => 0,
            };
            if got != expected {
                pass = false;
                detail = format!(
                    "boundary(L{n}) at class {}: {got} != {expected}",
                    site.trees()[i].code()
                );
            }
        }
        for e in 1..n {
            let horn = FinDendroidalSet::inner_horn(site.clone(), &t, &format!("e{e}")).unwrap();
            for i in 0..site.trees().len() {
                let got = horn.sub.values(i).len();
                let expected = match linear_class(i) {
                    Some(m) => monotone_maps(m, n)
                        .iter()
                        .filter(|g| (0..=n).any(|j| j != e && !g.contains(&j)))
                        .count(),
                    None => 0,
                };
                if got != expected {
                    pass = false;
                    detail = format!(
                        "horn(L{n}, e{e}) at class {}: {got} != {expected}",
                        site.trees()[i].code()
                    );
                }
            }
        }
    }
    if detail.is_empty() {
        detail = "hom counts m,n <= 4; boundaries and horns of L1..L3 at bound 4".to_string();
    }
    assert!(verdict("5 simplicial consistency", pass, detail));
}

#[test]
fn criterion_06_simplex_matrix_zigzag() {
    let mut pass = true;
    let mut detail = String::new();
    for n in 1..=8 {
        let p = linear_dendrex(n).unwrap();
        let m = matrix_rep_s(n).unwrap();
        let r = verify_matrix_assignment(&PresentationRef::Star(&p), &m).unwrap();
        if !(r.pass && m.dimension == n) {
            pass = false;
            detail = format!("edge matrices at n={n}: {:?}", r.failure);
        }
        let ck = ck_presentation(&linear_graph(n)).unwrap();
        let cm = linear_graph_ck_matrices(n).unwrap();
        let r = verify_matrix_assignment(&PresentationRef::Ck(&ck), &cm).unwrap();
        if !(r.pass && cm.dimension == n + 1) {
            pass = false;
            detail = format!("graph matrices at n={n}: {:?}", r.failure);
        }
        let hom = abelianization_hom(n).unwrap();
        if !(hom.verified && is_generator_surjective(&hom).unwrap()) {
            pass = false;
            detail = format!("abelianization map at n={n}");
        }
    }
    for n in 1..=6 {
        let sweep = simplex_sweep(n, 100, 7).unwrap();
        if !sweep.passed() {
            pass = false;
            detail = format!("simplex sweep at n={n}: {:?}", sweep.failures.first());
        }
    }
    if detail.is_empty() {
        detail = "exact matrices n <= 8, simplex sweeps n <= 6 at 1e-12".to_string();
    }
    assert!(verdict("6 simplex/matrix zigzag", pass, detail));
}

#[test]
fn criterion_07_boundaries_are_normal_monos() {
    let site = OmegaSite::new(5).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    let mut checked = 0;
    for t in enumerate_trees(5).unwrap() {
        if t.num_vertices() == 0 {
            continue;
        }
        let incl = FinDendroidalSet::boundary(site.clone(), &t).unwrap();
        let report = is_normal_mono(&incl).unwrap();
        checked += 1;
        if !report.normal {
            pass = false;
            detail = format!("boundary of {} not normal: {:?}", t.code(), report.witness);
        }
    }
    // The symmetrized fixture must be rejected with a witness.
    let fixture_site = OmegaSite::new(3).unwrap();
    let c2 = Tree::corolla(2);
    let q = FinDendroidalSet::quotient_representable(fixture_site.clone(), &c2).unwrap();
    let class = fixture_site.class_of(&c2).unwrap();
    let top = q.values(class)[0].clone();
    let sub = q.without_element(class, &top).unwrap();
    let incl = PresheafInclusion::new(sub, q).unwrap();
    let report = is_normal_mono(&incl).unwrap();
    if report.normal || report.witness.is_none() {
        pass = false;
        detail = "fixture with a fixed element was not rejected".to_string();
    }
    if detail.is_empty() {
        detail = format!("{checked} boundaries normal, fixture rejected with witness");
    }
    assert!(verdict("7 normal monomorphisms", pass, detail));
}

#[test]
fn criterion_08_drawing_soundness() {
    let site = OmegaSite::new(4).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    let mut drawings = 0usize;
    let mut face_arrows = 0usize;
    for t in enumerate_trees(4).unwrap() {
        let rep = FinDendroidalSet::representable(site.clone(), &t).unwrap();
        let d_rep = draw(&rep).unwrap();
        let mut family: Vec<(String, Drawing)> = vec![(format!("rep {}", t.code()), d_rep)];
        if t.num_vertices() > 0 {
            let b = FinDendroidalSet::boundary(site.clone(), &t).unwrap();
            let d_b = draw(&b.sub).unwrap();
            if !family[0].1.embeds(&d_b) {
                pass = false;
                detail = format!("boundary drawing of {} does not embed", t.code());
            }
            family.push((format!("boundary {}", t.code()), d_b));
        }
        for e in t.inner_edges() {
            let h = FinDendroidalSet::inner_horn(site.clone(), &t, e).unwrap();
            let d_h = draw(&h.sub).unwrap();
            if !family[0].1.embeds(&d_h) {
                pass = false;
                detail = format!("horn drawing of {} at {e} does not embed", t.code());
            }
            family.push((format!("horn {} at {e}", t.code()), d_h));
        }
        for (name, d) in &family {
            drawings += 1;
            let report = verify_drawing(d).unwrap();
            if !report.pass {
                pass = false;
                detail = format!("{name}: {:?}", report.failure);
            }
            let (checked, bad) = d.face_arrow_surjectivity().unwrap();
            face_arrows += checked;
            if !bad.is_empty() {
                pass = false;
                detail = format!("{name}: non-surjective face arrow");
            }
        }
    }
    if detail.is_empty() {
        detail = format!(
            "{drawings} drawings verified, {face_arrows} face arrows all generator-surjective"
        );
    }
    assert!(verdict("8 drawing soundness", pass, detail));
}

#[test]
fn criterion_09_cuntz_example() {
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
    let expected = vec![
        "S[e1]* S[e1] = P[v]".to_string(),
        "S[e2]* S[e2] = P[v]".to_string(),
        "P[v] = S[e1] S[e1]* + S[e2] S[e2]*".to_string(),
        "P[v] = 1".to_string(),
    ];
    let got = p.rendered_relations();
    assert!(verdict(
        "9 two-loop graph emits the Cuntz relations",
        got == expected,
        format!("{} relations", got.len())
    ));
}

#[test]
fn criterion_10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_dendrex");
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, content: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, content).unwrap();
        path.to_string_lossy().to_string()
    };
    let l2 = write(
        "l2.json",
        r#"{"edge":"e0","node":{"children":[{"edge":"e1","node":{"children":[{"edge":"e2"}]}}]}}"#,
    );
    let c2 = write(
        "c2.json",
        r#"{"edge":"e0","node":{"children":[{"edge":"e1"},{"edge":"e2"}]}}"#,
    );
    let commands: Vec<Vec<String>> = vec![
        vec![
            "trees".into(),
            "enum".into(),
            "--max-edges".into(),
            "4".into(),
        ],
        vec!["tree".into(), "faces".into(), l2.clone()],
        vec!["tree".into(), "auts".into(), c2.clone()],
        vec!["omega".into(), "hom".into(), l2.clone(), l2.clone()],
        vec!["dendrex".into(), "show".into(), c2.clone()],
        vec![
            "presheaf".into(),
            "boundary".into(),
            c2.clone(),
            "--bound".into(),
            "3".into(),
        ],
        vec![
            "graph".into(),
            "linear".into(),
            "3".into(),
            "--matrices".into(),
        ],
        vec![
            "verify".into(),
            "identities".into(),
            "--max-edges".into(),
            "4".into(),
        ],
        vec!["verify".into(), "sm".into(), "4".into()],
    ];
    let mut pass = true;
    let mut detail = String::new();
    for args in &commands {
        let run = || Command::new(bin).args(args).output().expect("binary runs");
        let a = run();
        let b = run();
        if !a.status.success() || a.stdout != b.stdout || a.stderr != b.stderr {
            pass = false;
            detail = format!("command {args:?} not reproducible or failed");
            break;
        }
    }
    // The draw pipeline, through a file produced by the presheaf command.
    if pass {
        let out = Command::new(bin)
            .args(["presheaf", "boundary", &c2, "--bound", "3"])
            .output()
            .unwrap();
        let presheaf_path = write("boundary.json", &String::from_utf8_lossy(&out.stdout));
        let draw1 = Command::new(bin)
            .args(["draw", &presheaf_path])
            .output()
            .unwrap();
        let draw2 = Command::new(bin)
            .args(["draw", &presheaf_path])
            .output()
            .unwrap();
        if !draw1.status.success() || draw1.stdout != draw2.stdout {
            pass = false;
            detail = "draw output not reproducible".to_string();
        }
    }
    if detail.is_empty() {
        detail = format!("{} commands byte-identical across runs", commands.len() + 1);
    }
    assert!(verdict("10 CLI determinism", pass, detail));
}
