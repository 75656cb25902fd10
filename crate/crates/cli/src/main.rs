//! Batch command-line interface: enumeration, construction, verification,
//! and export. JSON in, JSON or DOT out. Exit status 0 on success, 1 on a
//! verification failure (with the witness printed), 2 on usage errors or
//! malformed input.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use dendroidal::dendrex::{
    abelian_dendrex, dendrex, induced_hom, is_generator_surjective, verify_hom,
};
use dendroidal::drawing::{draw_with_options, verify_drawing, DrawOptions};
use dendroidal::graphalg::{
    abelianization_hom, ck_presentation, linear_dendrex, linear_graph, linear_graph_ck_matrices,
    matrix_rep_s, simplex_sweep, verify_matrix_assignment, DirectedGraph, PresentationRef,
};
use dendroidal::identities::identity_suite_with_ceiling;
use dendroidal::morphism::{self, EdgeMap, TreeMorphism};
use dendroidal::presheaf::{FinDendroidalSet, OmegaSite, PresheafJson};
use dendroidal::tree::{enumerate_trees_with_ceiling, DEFAULT_ENUMERATION_CEILING};
use dendroidal::{Error, Tree};

/// Environment variable overriding the enumeration safety ceiling.
const CEILING_VAR: &str = "DENDREX_MAX_EDGES";

/// Default seed for randomized sweeps.
const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(
    name = "dendrex",
    about = "Trees, dendroidal presheaves, and their C*-algebraic drawings",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tree enumeration.
    Trees {
        #[command(subcommand)]
        command: TreesCommand,
    },
    /// Operations on a single tree file.
    Tree {
        #[command(subcommand)]
        command: TreeCommand,
    },
    /// The category of trees.
    Omega {
        #[command(subcommand)]
        command: OmegaCommand,
    },
    /// Presentations attached to trees.
    Dendrex {
        #[command(subcommand)]
        command: DendrexCommand,
    },
    /// Truncated presheaves.
    Presheaf {
        #[command(subcommand)]
        command: PresheafCommand,
    },
    /// Draw a presheaf as a diagram of presentations.
    Draw(DrawArgs),
    /// Directed graphs and their Cuntz-Krieger presentations.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Verification sweeps.
    Verify {
        #[command(subcommand)]
        command: VerifyCommand,
    },
}

#[derive(Subcommand)]
enum TreesCommand {
    /// One representative per isomorphism class up to an edge count.
    Enum {
        #[arg(long)]
        max_edges: usize,
    },
}

#[derive(Subcommand)]
enum TreeCommand {
    /// Elementary faces of the tree.
    Faces { file: PathBuf },
    /// Degeneracies of the tree.
    Degeneracies { file: PathBuf },
    /// Automorphisms of the tree.
    Auts { file: PathBuf },
}

#[derive(Subcommand)]
enum OmegaCommand {
    /// All morphisms between two trees.
    Hom { src: PathBuf, tgt: PathBuf },
}

#[derive(Subcommand)]
enum DendrexCommand {
    /// The presentation attached to a tree.
    Show {
        file: PathBuf,
        #[arg(long)]
        abelian: bool,
    },
    /// The induced presentation map of a tree morphism.
    Map {
        src: PathBuf,
        tgt: PathBuf,
        #[arg(long)]
        morphism: PathBuf,
    },
}

#[derive(Subcommand)]
enum PresheafCommand {
    /// The representable presheaf of a tree.
    Representable {
        file: PathBuf,
        #[arg(long)]
        bound: usize,
    },
    /// The boundary subobject of the representable.
    Boundary {
        file: PathBuf,
        #[arg(long)]
        bound: usize,
    },
    /// The inner horn at an inner edge.
    Horn {
        file: PathBuf,
        #[arg(long)]
        edge: String,
        #[arg(long)]
        bound: usize,
    },
}

#[derive(Args)]
struct DrawArgs {
    /// Presheaf JSON file.
    file: PathBuf,
    /// Restrict the index to nondegenerate elements.
    #[arg(long)]
    no_degenerate: bool,
    /// Also write a DOT rendering to this path.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum GraphCommand {
    /// The Cuntz-Krieger presentation of a graph file.
    Ck { file: PathBuf },
    /// The linear graph with n edges, optionally with verified matrices.
    Linear {
        n: usize,
        #[arg(long)]
        matrices: bool,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Face and degeneracy interchange laws over all small trees.
    Identities {
        #[arg(long)]
        max_edges: usize,
    },
    /// Contravariant functoriality of induced presentation maps.
    Functoriality {
        #[arg(long)]
        max_edges: usize,
    },
    /// The simplex/matrix checks for the linear graph with n edges.
    Sm {
        n: usize,
        /// Seed for the randomized simplex sweep.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Number of random simplex points.
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}

/// Wire format for a tree morphism; `source` and `target` are optional when
/// the surrounding command already names them.
#[derive(Serialize, Deserialize)]
struct MorphismJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<Tree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<Tree>,
    edge_map: EdgeMap,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Verification(_) | Error::Internal(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn ceiling() -> usize {
    std::env::var(CEILING_VAR)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_ENUMERATION_CEILING)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Precondition(format!(
            "malformed JSON in {} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn emit<T: Serialize>(value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    Ok(())
}

fn morphism_json(m: &TreeMorphism) -> serde_json::Value {
    json!({
        "source": m.source(),
        "target": m.target(),
        "edge_map": m.edge_map(),
    })
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Trees {
            command: TreesCommand::Enum { max_edges },
        } => {
            let trees = enumerate_trees_with_ceiling(max_edges, ceiling())?;
            let items: Vec<_> = trees
                .iter()
                .map(|t| {
                    json!({
                        "code": t.code(),
                        "edges": t.num_edges(),
                        "open": t.is_open(),
                        "tree": t,
                    })
                })
                .collect();
            emit(&json!({ "max_edges": max_edges, "count": items.len(), "trees": items }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Tree { command } => {
            match command {
                TreeCommand::Faces { file } => {
                    let t: Tree = read_json(&file)?;
                    let faces: Vec<_> = TreeMorphism::elementary_faces(&t)
                        .iter()
                        .map(|f| {
                            let step = &f.normal_form().faces[0];
                            let (kind, anchor) = match &step.kind {
                                morphism::FaceKind::Inner(e) => ("inner", e.clone()),
                                morphism::FaceKind::Outer(v) => ("outer", v.clone()),
                                morphism::FaceKind::Edge(e) => ("edge", e.clone()),
                            };
                            let mut value = morphism_json(f);
                            value["kind"] = json!(kind);
                            value["anchor"] = json!(anchor);
                            value["removed"] = json!(step.removed);
                            value
                        })
                        .collect();
                    emit(&json!({ "tree": t, "faces": faces }))?;
                }
                TreeCommand::Degeneracies { file } => {
                    let t: Tree = read_json(&file)?;
                    let degens: Vec<_> = TreeMorphism::degeneracies_of(&t)
                        .iter()
                        .map(|d| {
                            let step = &d.normal_form().degeneracies[0];
                            let mut value = morphism_json(d);
                            value["vertex"] = json!(step.below);
                            value["merged"] = json!(step.merged);
                            value
                        })
                        .collect();
                    emit(&json!({ "tree": t, "degeneracies": degens }))?;
                }
                TreeCommand::Auts { file } => {
                    let t: Tree = read_json(&file)?;
                    let auts: Vec<_> = morphism::automorphisms(&t)
                        .iter()
                        .map(|a| json!(a.edge_map()))
                        .collect();
                    emit(&json!({ "tree": t, "count": auts.len(), "automorphisms": auts }))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Omega {
            command: OmegaCommand::Hom { src, tgt },
        } => {
            let s: Tree = read_json(&src)?;
            let t: Tree = read_json(&tgt)?;
            let homs = morphism::hom_set(&s, &t);
            let maps: Vec<_> = homs.iter().map(|m| json!(m.edge_map())).collect();
            emit(&json!({
                "source": s,
                "target": t,
                "count": maps.len(),
                "morphisms": maps,
            }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Dendrex { command } => match command {
            DendrexCommand::Show { file, abelian } => {
                let t: Tree = read_json(&file)?;
                let p = if abelian {
                    abelian_dendrex(&t)
                } else {
                    dendrex(&t)
                };
                emit(&p)?;
                Ok(ExitCode::SUCCESS)
            }
            DendrexCommand::Map { src, tgt, morphism } => {
                let s: Tree = read_json(&src)?;
                let t: Tree = read_json(&tgt)?;
                let m: MorphismJson = read_json(&morphism)?;
                if let Some(ms) = &m.source {
                    if *ms != s {
                        return Err(Error::Precondition(
                            "morphism file names a different source tree".to_string(),
                        ));
                    }
                }
                if let Some(mt) = &m.target {
                    if *mt != t {
                        return Err(Error::Precondition(
                            "morphism file names a different target tree".to_string(),
                        ));
                    }
                }
                let f = TreeMorphism::new(s, t, m.edge_map)?;
                let hom = induced_hom(&f)?;
                let report = verify_hom(&hom)?;
                emit(&json!({
                    "morphism": f.edge_map(),
                    "hom": hom.assignment,
                    "source_presentation": hom.source,
                    "target_presentation": hom.target,
                    "verified": report.pass,
                    "generator_surjective": is_generator_surjective(&hom)?,
                }))?;
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Presheaf { command } => {
            let (file, bound) = match &command {
                PresheafCommand::Representable { file, bound } => (file.clone(), *bound),
                PresheafCommand::Boundary { file, bound } => (file.clone(), *bound),
                PresheafCommand::Horn { file, bound, .. } => (file.clone(), *bound),
            };
            let t: Tree = read_json(&file)?;
            let site = OmegaSite::with_ceiling(bound, ceiling())?;
            let x = match command {
                PresheafCommand::Representable { .. } => FinDendroidalSet::representable(site, &t)?,
                PresheafCommand::Boundary { .. } => FinDendroidalSet::boundary(site, &t)?.sub,
                PresheafCommand::Horn { edge, .. } => {
                    FinDendroidalSet::inner_horn(site, &t, &edge)?.sub
                }
            };
            emit(&x.to_json()?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Draw(args) => {
            let json: PresheafJson = read_json(&args.file)?;
            let x = FinDendroidalSet::from_json(&json)?;
            let d = draw_with_options(
                &x,
                DrawOptions {
                    skip_degenerate: args.no_degenerate,
                },
            )?;
            let report = verify_drawing(&d)?;
            if let Some(path) = &args.dot {
                fs::write(path, d.to_dot()).map_err(|e| {
                    Error::Precondition(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            match args.format {
                OutputFormat::Json => emit(&d.to_json())?,
                OutputFormat::Dot => print!("{}", d.to_dot()),
            }
            if !report.pass {
                eprintln!(
                    "drawing verification failed: {}",
                    report.failure.unwrap_or_default()
                );
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Graph { command } => match command {
            GraphCommand::Ck { file } => {
                let g: DirectedGraph = read_json(&file)?;
                let p = ck_presentation(&g)?;
                emit(&json!({
                    "graph": p.graph,
                    "unital": p.unital,
                    "generators": p.generator_names(),
                    "relations": p.rendered_relations(),
                }))?;
                Ok(ExitCode::SUCCESS)
            }
            GraphCommand::Linear { n, matrices } => {
                let g = linear_graph(n);
                let p = ck_presentation(&g)?;
                let mut out = json!({
                    "graph": g,
                    "generators": p.generator_names(),
                    "relations": p.rendered_relations(),
                });
                let mut ok = true;
                if matrices {
                    let ck = linear_graph_ck_matrices(n)?;
                    let ck_report = verify_matrix_assignment(&PresentationRef::Ck(&p), &ck)?;
                    let dp = linear_dendrex(n)?;
                    let dm = matrix_rep_s(n)?;
                    let dm_report = verify_matrix_assignment(&PresentationRef::Star(&dp), &dm)?;
                    ok = ck_report.pass && dm_report.pass;
                    out["ck_matrices"] = json!(ck);
                    out["ck_verification"] = json!(ck_report);
                    out["edge_presentation"] = json!(dp);
                    out["edge_matrices"] = json!(dm);
                    out["edge_verification"] = json!(dm_report);
                }
                emit(&out)?;
                Ok(if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                })
            }
        },
        Command::Verify { command } => match command {
            VerifyCommand::Identities { max_edges } => {
                let report = identity_suite_with_ceiling(max_edges, ceiling())?;
                println!(
                    "identities up to {max_edges} edges: {} instances, {} failures",
                    report.instances,
                    report.failures.len()
                );
                for f in &report.failures {
                    println!("counterexample: {f}");
                }
                Ok(if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                })
            }
            VerifyCommand::Functoriality { max_edges } => {
                let report =
                    dendroidal::dendrex::functoriality_suite_with_ceiling(max_edges, ceiling())?;
                println!(
                    "functoriality up to {max_edges} edges: {} instances, {} failures",
                    report.instances,
                    report.failures.len()
                );
                for f in &report.failures {
                    println!("counterexample: {f}");
                }
                Ok(if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                })
            }
            VerifyCommand::Sm { n, seed, points } => {
                let mut ok = true;
                let dp = linear_dendrex(n)?;
                let dm = matrix_rep_s(n)?;
                let r1 = verify_matrix_assignment(&PresentationRef::Star(&dp), &dm)?;
                println!(
                    "edge presentation in dimension {}: {}",
                    dm.dimension,
                    verdict(r1.pass, &r1.failure)
                );
                ok &= r1.pass;
                let ck = ck_presentation(&linear_graph(n))?;
                let cm = linear_graph_ck_matrices(n)?;
                let r2 = verify_matrix_assignment(&PresentationRef::Ck(&ck), &cm)?;
                println!(
                    "graph algebra in dimension {}: {}",
                    cm.dimension,
                    verdict(r2.pass, &r2.failure)
                );
                ok &= r2.pass;
                let hom = abelianization_hom(n)?;
                let surjective = is_generator_surjective(&hom)?;
                println!(
                    "abelianization map: {}",
                    verdict(
                        hom.verified && surjective,
                        &Some("not surjective or unverified".to_string())
                    )
                );
                ok &= hom.verified && surjective;
                let sweep = simplex_sweep(n, points, seed)?;
                println!(
                    "simplex sweep ({points} points, seed {seed}): {}",
                    verdict(sweep.passed(), &sweep.failures.first().cloned())
                );
                ok &= sweep.passed();
                Ok(if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                })
            }
        },
    }
}

fn verdict(pass: bool, failure: &Option<String>) -> String {
    if pass {
        "pass".to_string()
    } else {
        format!(
            "FAIL ({})",
            failure.clone().unwrap_or_else(|| "unknown".to_string())
        )
    }
}
