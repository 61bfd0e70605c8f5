//! Command-line surface for the graph-algebra regularity analyzer.
//!
//! Exit codes follow one contract everywhere: 0 when the requested property
//! holds (or the command succeeded), 1 when it fails or is only conjectural
//! (stderr explains why), and 2 on input errors.

use std::collections::BTreeSet;
use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use leavitt::classify::{regularity_report, AnalysisInput, RegularityReport, ZVerdict};
use leavitt::corpus::{count_graphs, enumerate, run_crosschecks, CorpusSpec, CrosscheckOptions};
use leavitt::desing::desingularize;
use leavitt::graph::VertexId;
use leavitt::ideals::composition_series;
use leavitt::inflow::{find_nondegenerate_extension, m2m3_hom, ExtensionOutcome, InFlowGraph};
use leavitt::io::{dot_graph, dot_mult, dot_teg, parse_document, teg_to_json, InputDoc};
use leavitt::lpa::{lpa_equal, lpa_mul, lpa_star, normal_form, parse_element};
use leavitt::{classify, ideals};

#[derive(Parser)]
#[command(
    name = "leavitt",
    about = "Regularity analysis for graph C*-algebras",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format for structured results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for the randomized corpus checks.
    #[arg(long, global = true, default_value_t = 0xC0FFEE)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full regularity report for a graph document.
    Analyze { path: String },
    /// Exit 0/1 according to a single property of the input.
    Check {
        path: String,
        #[arg(value_enum)]
        property: Property,
    },
    /// Exhaustive cross-checks over all multigraphs within bounds.
    Corpus {
        #[arg(long)]
        max_vertices: usize,
        #[arg(long)]
        max_edges: usize,
        #[arg(long)]
        allow_omega: bool,
        /// Deduplicate up to graph isomorphism before running checks.
        #[arg(long)]
        canonicalize: bool,
        /// Refuse to enumerate more than this many graphs.
        #[arg(long, default_value_t = 1_000_000)]
        max_graphs: u128,
    },
    /// DOT rendering of the input graph.
    ExportDot { path: String },
    /// Symbolic Leavitt path algebra arithmetic on the element grammar.
    Lpa {
        path: String,
        #[arg(value_enum)]
        op: LpaOp,
        element: String,
        element2: Option<String>,
    },
    /// Grow a nondegenerate in-flow extension at a vertex and print the
    /// verified matrix-unit system with its M2 ⊕ M3 homomorphism.
    Centralizer {
        path: String,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Attach tails to every omega receiver and print the presentation.
    Desingularize { path: String },
    /// Composition series of a Condition (K) graph with factor classes.
    Series { path: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    ConditionK,
    DistinctDetours,
    NoSources,
    RowFinite,
    Pure,
    Elementary,
    ZStable,
}

#[derive(Clone, Copy, ValueEnum)]
enum LpaOp {
    Mul,
    Star,
    Nf,
    Eq,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn read_doc(path: &str) -> anyhow::Result<InputDoc> {
    let text = fs::read_to_string(path)?;
    Ok(parse_document(&text)?)
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.cmd {
        Cmd::Analyze { path } => {
            let input = read_doc(path)?.into_analysis_input()?;
            let report = regularity_report(&input)?;
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
                Format::Text => print_report_text(&report),
            }
            Ok(0)
        }
        Cmd::Check { path, property } => {
            let input = read_doc(path)?.into_analysis_input()?;
            let report = regularity_report(&input)?;
            Ok(check_property(&report, *property))
        }
        Cmd::Corpus {
            max_vertices,
            max_edges,
            allow_omega,
            canonicalize,
            max_graphs,
        } => {
            let mut spec = CorpusSpec::new(*max_vertices, *max_edges)?;
            spec.allow_omega = *allow_omega;
            spec.canonicalize = *canonicalize;
            let expected = count_graphs(&spec);
            println!(
                "corpus bounds: ≤ {} vertices, ≤ {} edge classes{} — {} labeled multigraphs",
                max_vertices,
                max_edges,
                if *allow_omega { " (mult 1, 2, ω)" } else { "" },
                expected
            );
            if expected > *max_graphs {
                return Err(leavitt::Error::ResourceGuard(format!(
                    "{expected} graphs exceed the limit {max_graphs}"
                ))
                .into());
            }
            let graphs = enumerate(&spec);
            if !spec.canonicalize && graphs.len() as u128 != expected {
                return Err(leavitt::Error::Internal(format!(
                    "enumerated {} graphs but the closed form gives {expected}",
                    graphs.len()
                ))
                .into());
            }
            println!(
                "enumerated {} graphs (closed form {})",
                graphs.len(),
                expected
            );
            let report = run_crosschecks(
                &graphs,
                &CrosscheckOptions {
                    seed: cli.seed,
                    ..Default::default()
                },
            );
            println!("{:<36} {:>10}", "check", "graphs");
            for (check, count) in &report.checks_run {
                println!("{check:<36} {count:>10}");
            }
            if report.ok() {
                println!("all cross-checks passed on {} graphs", report.graphs);
                Ok(0)
            } else {
                for v in &report.violations {
                    eprintln!(
                        "violation [{}] graph #{}: {}\n  {}",
                        v.check, v.graph_index, v.detail, v.graph
                    );
                }
                eprintln!("{} violation(s)", report.violations.len());
                Ok(1)
            }
        }
        Cmd::ExportDot { path } => {
            let doc = read_doc(path)?;
            let text = match doc.into_analysis_input()? {
                AnalysisInput::Finite(g) => dot_graph(&g),
                AnalysisInput::Mult(mg) => dot_mult(&mg),
                AnalysisInput::Teg(teg) => dot_teg(&teg),
            };
            print!("{text}");
            Ok(0)
        }
        Cmd::Lpa {
            path,
            op,
            element,
            element2,
        } => {
            let g = read_doc(path)?.require_finite()?;
            let a = parse_element(&g, element)?;
            match op {
                LpaOp::Mul => {
                    let b_text = element2
                        .as_ref()
                        .ok_or_else(|| leavitt::Error::Parse("mul needs two elements".into()))?;
                    let b = parse_element(&g, b_text)?;
                    println!("{}", lpa_mul(&g, &a, &b)?);
                    Ok(0)
                }
                LpaOp::Star => {
                    println!("{}", lpa_star(&a));
                    Ok(0)
                }
                LpaOp::Nf => {
                    println!("{}", normal_form(&g, &a)?);
                    Ok(0)
                }
                LpaOp::Eq => {
                    let b_text = element2
                        .as_ref()
                        .ok_or_else(|| leavitt::Error::Parse("eq needs two elements".into()))?;
                    let b = parse_element(&g, b_text)?;
                    if lpa_equal(&g, &a, &b)? {
                        println!("equal");
                        Ok(0)
                    } else {
                        println!("not equal");
                        Ok(1)
                    }
                }
            }
        }
        Cmd::Centralizer {
            path,
            vertex,
            max_steps,
        } => {
            let g = read_doc(path)?.require_finite()?;
            let v = VertexId(vertex.clone());
            let f = InFlowGraph::root_only(&g, &v)?;
            let steps = max_steps.unwrap_or(2 * g.vertex_count() + 2);
            match find_nondegenerate_extension(&g, &f, steps)? {
                ExtensionOutcome::Nondegenerate(fp, table) => {
                    let system = m2m3_hom(&g, &f, &fp)?;
                    println!("nondegenerate extension at `{v}` verified");
                    println!(
                        "extension: {} vertices, {} edges, strict in-tree: {}",
                        fp.vertices.len(),
                        fp.edges.len(),
                        fp.strict_tree
                    );
                    for ((u, w), paths) in &table.pairs {
                        println!("pair (u = {u}, w = {w}): N = {}", paths.len());
                    }
                    for block in &system.blocks {
                        println!(
                            "block (u = {}, w = {}): N = {} = 2·{} + 3·{}",
                            block.f_source,
                            block.fp_source,
                            block.n(),
                            block.x,
                            block.y
                        );
                        for (a, row) in block.units.iter().enumerate() {
                            for (b, unit) in row.iter().enumerate() {
                                println!("  T[{a}][{b}] = {unit}");
                            }
                        }
                    }
                    if let Some(hom) = &system.hom {
                        println!("M2 generator images:");
                        for (i, row) in hom.m2.iter().enumerate() {
                            for (j, el) in row.iter().enumerate() {
                                println!("  φ(e{}{}, 0) = {el}", i + 1, j + 1);
                            }
                        }
                        println!("M3 generator images:");
                        for (i, row) in hom.m3.iter().enumerate() {
                            for (j, el) in row.iter().enumerate() {
                                println!("  φ(0, e{}{}) = {el}", i + 1, j + 1);
                            }
                        }
                    }
                    Ok(0)
                }
                ExtensionOutcome::Degenerate(ev) => {
                    eprintln!(
                        "degenerate at `{v}`: pair (u = {}, w = {}) has the unique path {} \
                         (steps: {}, fixpoint: {})",
                        ev.f_source,
                        ev.fp_source,
                        ev.unique_path.display(),
                        ev.steps_taken,
                        ev.reached_fixpoint
                    );
                    Ok(1)
                }
            }
        }
        Cmd::Desingularize { path } => {
            let doc = read_doc(path)?;
            if !doc.tails.is_empty() {
                return Err(
                    leavitt::Error::UnsupportedInput("input already carries tails".into()).into(),
                );
            }
            let teg = desingularize(&doc.graph)?;
            println!("{}", serde_json::to_string_pretty(&teg_to_json(&teg))?);
            Ok(0)
        }
        Cmd::Series { path } => {
            let g = read_doc(path)?.require_finite()?;
            match composition_series(&g) {
                Ok(chain) => {
                    let mut factors = Vec::new();
                    for w in chain.steps.windows(2) {
                        let factor = ideals::subquotient_graph(&g, &w[1], &w[0])?;
                        factors.push((w[1].clone(), classify::classify_simple_factor(&factor)?));
                    }
                    match cli.format {
                        Format::Json => {
                            let json = serde_json::json!({
                                "chain": chain.steps,
                                "factors": factors.iter().map(|(_, c)| c).collect::<Vec<_>>(),
                            });
                            println!("{}", serde_json::to_string_pretty(&json)?);
                        }
                        Format::Text => {
                            for (i, step) in chain.steps.iter().enumerate() {
                                println!("H_{i} = {}", render_set(step));
                            }
                            for (i, (_, class)) in factors.iter().enumerate() {
                                match class {
                                    classify::FactorClass::Af { source, dimension } => println!(
                                        "factor {}: AF, matrix summand of dimension {dimension} at {source}",
                                        i + 1
                                    ),
                                    classify::FactorClass::PurelyInfinite { cycle } => println!(
                                        "factor {}: purely infinite (cycle {})",
                                        i + 1,
                                        cycle.display()
                                    ),
                                }
                            }
                        }
                    }
                    Ok(0)
                }
                Err(e @ leavitt::Error::ConditionKFails { .. }) => {
                    eprintln!("{e}");
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn check_property(report: &RegularityReport, property: Property) -> u8 {
    let (name, holds, witness): (&str, bool, Option<String>) = match property {
        Property::ConditionK => (
            "condition-k",
            report.condition_k.holds,
            report.condition_k.witness.clone(),
        ),
        Property::DistinctDetours => (
            "distinct-detours",
            report.distinct_detours.holds,
            report.distinct_detours.witness.clone(),
        ),
        Property::NoSources => (
            "no-sources",
            report.no_sources,
            report.graph.sources.first().map(|v| format!("source {v}")),
        ),
        Property::RowFinite => (
            "row-finite",
            report.row_finite,
            Some("an omega multiplicity makes a vertex an infinite receiver".to_string()),
        ),
        Property::Pure => (
            "pure",
            report.pure,
            report
                .condition_k
                .witness
                .clone()
                .or_else(|| report.distinct_detours.witness.clone()),
        ),
        Property::Elementary => (
            "elementary",
            report.elementary_subquotient.present,
            report
                .elementary_subquotient
                .witness
                .as_ref()
                .map(|w| serde_json::to_string(w).unwrap_or_default()),
        ),
        Property::ZStable => {
            let verdict = report.z_stable;
            println!("z-stable: {}", z_verdict_str(verdict.verdict));
            return match verdict.verdict {
                ZVerdict::Yes => 0,
                ZVerdict::No => {
                    if let Some(w) = &report.condition_k.witness {
                        eprintln!("witness: Condition (K) fails at {w}");
                    } else if let Some(w) = &report.distinct_detours.witness {
                        eprintln!("witness: no distinct detour for {w}");
                    }
                    1
                }
                ZVerdict::ConjecturallyYes | ZVerdict::ConjecturallyNo => {
                    eprintln!(
                        "verdict is {} under the open conjecture for row-finite graphs \
                         (provenance {}); scripts must not treat it as a theorem",
                        z_verdict_str(verdict.verdict),
                        serde_json::to_value(verdict.provenance)
                            .map(|v| v.as_str().unwrap_or_default().to_string())
                            .unwrap_or_default()
                    );
                    1
                }
            };
        }
    };
    println!("{name}: {}", if holds { "holds" } else { "fails" });
    if !holds {
        if let Some(w) = witness {
            eprintln!("witness: {w}");
        }
    } else if matches!(property, Property::Elementary) {
        if let Some(w) = &report.elementary_subquotient.witness {
            println!("witness: {}", serde_json::to_string(w).unwrap_or_default());
        }
    }
    if holds {
        0
    } else {
        1
    }
}

fn z_verdict_str(v: ZVerdict) -> &'static str {
    match v {
        ZVerdict::Yes => "yes",
        ZVerdict::No => "no",
        ZVerdict::ConjecturallyYes => "conjecturally-yes",
        ZVerdict::ConjecturallyNo => "conjecturally-no",
    }
}

fn render_set(s: &BTreeSet<VertexId>) -> String {
    if s.is_empty() {
        "{}".to_string()
    } else {
        format!(
            "{{{}}}",
            s.iter()
                .map(|v| v.0.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}

fn print_report_text(r: &RegularityReport) {
    println!(
        "graph: {} vertices, {} edges, cycles: {}, tails: {}",
        r.graph.vertex_count,
        r.graph.edge_count,
        if r.graph.has_cycle { "yes" } else { "no" },
        r.graph.tails
    );
    println!("row-finite: {}", if r.row_finite { "yes" } else { "no" });
    println!(
        "condition (K): {}{}",
        if r.condition_k.holds {
            "holds"
        } else {
            "fails"
        },
        r.condition_k
            .witness
            .as_ref()
            .map(|w| format!(" (witness {w})"))
            .unwrap_or_default()
    );
    println!(
        "distinct detours: {}{}",
        if r.distinct_detours.holds {
            "holds"
        } else {
            "fails"
        },
        r.distinct_detours
            .witness
            .as_ref()
            .map(|w| format!(" (witness {w})"))
            .unwrap_or_default()
    );
    println!("no sources: {}", if r.no_sources { "yes" } else { "no" });
    match &r.ideal_count {
        classify::IdealCount::Finite(n) => println!("gauge-invariant ideals: {n}"),
        classify::IdealCount::InfiniteOrNonGauge => {
            println!("gauge-invariant ideals: infinite/non-gauge-invariant")
        }
    }
    println!(
        "elementary subquotient: {}",
        if r.elementary_subquotient.present {
            "present"
        } else {
            "absent"
        }
    );
    println!("pure: {}", if r.pure { "yes" } else { "no" });
    println!(
        "z-stable: {} [{}]",
        z_verdict_str(r.z_stable.verdict),
        serde_json::to_value(r.z_stable.provenance)
            .map(|v| v.as_str().unwrap_or_default().to_string())
            .unwrap_or_default()
    );
    if let Some(series) = &r.composition_series {
        let chain = series
            .chain
            .iter()
            .map(render_set)
            .collect::<Vec<_>>()
            .join(" ⊂ ");
        println!("composition series: {chain}");
        for (i, f) in series.factors.iter().enumerate() {
            match &f.class {
                classify::FactorClass::Af { source, dimension } => {
                    println!("  factor {}: AF, dimension {dimension} at {source}", i + 1)
                }
                classify::FactorClass::PurelyInfinite { cycle } => {
                    println!(
                        "  factor {}: purely infinite (cycle {})",
                        i + 1,
                        cycle.display()
                    )
                }
            }
        }
    }
    for note in &r.notes {
        println!("note: {note}");
    }
}
