//! Input documents and export formats.
//!
//! The graph document schema is JSON:
//!
//! ```json
//! {
//!   "vertices": ["u", "v"],
//!   "edges": [{"id": "e", "src": "u", "dst": "v", "mult": 2}],
//!   "tails": [{"base": "v", "preperiod": ["u"], "period": ["u"]}]
//! }
//! ```
//!
//! `mult` is a positive integer or the string `"omega"` and defaults to 1;
//! `tails` is optional and turns the document into a tail-extended
//! presentation (whose core must then be row-finite).

use serde::Deserialize;
use serde_json::json;

use crate::classify::AnalysisInput;
use crate::desing::{Tail, TailExtendedGraph};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Mult, MultGraph, VertexId};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    vertices: Vec<String>,
    #[serde(default)]
    edges: Vec<RawEdge>,
    #[serde(default)]
    tails: Vec<RawTail>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: String,
    src: String,
    dst: String,
    #[serde(default)]
    mult: Option<RawMult>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawMult {
    Count(u64),
    Symbol(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTail {
    base: String,
    #[serde(default)]
    preperiod: Vec<String>,
    period: Vec<String>,
}

/// A parsed document: multigraph core plus optional tails.
#[derive(Debug, Clone)]
pub struct InputDoc {
    pub graph: MultGraph,
    pub tails: Vec<Tail>,
}

pub fn parse_document(text: &str) -> Result<InputDoc> {
    let raw: RawDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("document: {e}")))?;
    let mut edges = Vec::new();
    for e in raw.edges {
        let mult = match e.mult {
            None => Mult::Finite(1),
            Some(RawMult::Count(0)) => {
                return Err(Error::Parse(format!(
                    "edge `{}`: multiplicity must be positive",
                    e.id
                )))
            }
            Some(RawMult::Count(n)) => Mult::Finite(n),
            Some(RawMult::Symbol(s)) if s == "omega" || s == "ω" => Mult::Omega,
            Some(RawMult::Symbol(s)) => {
                return Err(Error::Parse(format!(
                    "edge `{}`: multiplicity must be a positive integer or \"omega\", got \"{s}\"",
                    e.id
                )))
            }
        };
        edges.push((EdgeId(e.id), VertexId(e.src), VertexId(e.dst), mult));
    }
    let graph = MultGraph::new(raw.vertices.into_iter().map(VertexId), edges)?;
    let tails = raw
        .tails
        .into_iter()
        .map(|t| Tail {
            base: VertexId(t.base),
            preperiod: t.preperiod.into_iter().map(VertexId).collect(),
            period: t.period.into_iter().map(VertexId).collect(),
        })
        .collect();
    Ok(InputDoc { graph, tails })
}

impl InputDoc {
    /// Classify the document: a tail-extended presentation when tails are
    /// present, a multigraph when an omega multiplicity occurs, and a plain
    /// finite graph otherwise (finite multiplicities are expanded).
    pub fn into_analysis_input(self) -> Result<AnalysisInput> {
        if !self.tails.is_empty() {
            if self.graph.has_omega() {
                return Err(Error::UnsupportedInput(
                    "a tail-extended document must have a row-finite core".into(),
                ));
            }
            let core = self.graph.expand()?;
            return Ok(AnalysisInput::Teg(TailExtendedGraph::new(
                core, self.tails,
            )?));
        }
        if self.graph.has_omega() {
            Ok(AnalysisInput::Mult(self.graph))
        } else {
            Ok(AnalysisInput::Finite(self.graph.expand()?))
        }
    }

    /// The finite expansion, rejecting tails and omega multiplicities; used
    /// by commands that operate on plain graphs.
    pub fn require_finite(self) -> Result<Graph> {
        if !self.tails.is_empty() {
            return Err(Error::UnsupportedInput(
                "command requires a graph without tails".into(),
            ));
        }
        if self.graph.has_omega() {
            return Err(Error::UnsupportedInput(
                "command requires a row-finite graph (no omega multiplicities)".into(),
            ));
        }
        self.graph.expand()
    }
}

pub fn mult_graph_to_json(mg: &MultGraph) -> serde_json::Value {
    json!({
        "vertices": mg.vertices().map(|v| v.0.clone()).collect::<Vec<_>>(),
        "edges": mg.edges().map(|(id, e)| {
            let mut obj = json!({"id": id.0, "src": e.src.0, "dst": e.dst.0});
            match e.mult {
                Mult::Finite(1) => {}
                Mult::Finite(n) => { obj["mult"] = json!(n); }
                Mult::Omega => { obj["mult"] = json!("omega"); }
            }
            obj
        }).collect::<Vec<_>>(),
    })
}

pub fn teg_to_json(teg: &TailExtendedGraph) -> serde_json::Value {
    json!({
        "vertices": teg.core.vertices().map(|v| v.0.clone()).collect::<Vec<_>>(),
        "edges": teg.core.edges().map(|(id, e)| {
            json!({"id": id.0, "src": e.src.0, "dst": e.dst.0})
        }).collect::<Vec<_>>(),
        "tails": teg.tails.iter().map(|t| {
            json!({
                "base": t.base.0,
                "preperiod": t.preperiod.iter().map(|v| v.0.clone()).collect::<Vec<_>>(),
                "period": t.period.iter().map(|v| v.0.clone()).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
    })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT rendering: one node per vertex, one arrow per edge id.
pub fn dot_graph(g: &Graph) -> String {
    let mut out = String::from("digraph G {\n");
    for v in g.vertices() {
        out.push_str(&format!("  \"{}\";\n", dot_escape(&v.0)));
    }
    for (id, e) in g.edges() {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            dot_escape(&e.src.0),
            dot_escape(&e.dst.0),
            dot_escape(&id.0)
        ));
    }
    out.push_str("}\n");
    out
}

/// DOT rendering with multiplicities; omega edges are dashed and labeled ω.
pub fn dot_mult(mg: &MultGraph) -> String {
    let mut out = String::from("digraph G {\n");
    for v in mg.vertices() {
        out.push_str(&format!("  \"{}\";\n", dot_escape(&v.0)));
    }
    for (id, e) in mg.edges() {
        let (label, style) = match e.mult {
            Mult::Finite(1) => (dot_escape(&id.0), ""),
            Mult::Finite(n) => (format!("{} ×{n}", dot_escape(&id.0)), ""),
            Mult::Omega => (format!("{} (ω)", dot_escape(&id.0)), ", style=dashed"),
        };
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{label}\"{style}];\n",
            dot_escape(&e.src.0),
            dot_escape(&e.dst.0),
        ));
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a tail-extended graph: the core plus, per tail, the
/// preperiod and one period of tail vertices followed by an ellipsis node.
pub fn dot_teg(teg: &TailExtendedGraph) -> String {
    let mut out = String::from("digraph G {\n");
    for v in teg.core.vertices() {
        out.push_str(&format!("  \"{}\";\n", dot_escape(&v.0)));
    }
    for (id, e) in teg.core.edges() {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            dot_escape(&e.src.0),
            dot_escape(&e.dst.0),
            dot_escape(&id.0)
        ));
    }
    for tail in &teg.tails {
        let len = tail.preperiod.len() + tail.period.len();
        let name = |i: usize| format!("{}#t{i}", tail.base);
        let mut below = tail.base.0.clone();
        for i in 1..=len {
            let t_i = name(i);
            out.push_str(&format!("  \"{}\" [shape=box];\n", dot_escape(&t_i)));
            out.push_str(&format!(
                "  \"{}\" -> \"{}\";\n",
                dot_escape(&t_i),
                dot_escape(&below)
            ));
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [style=dotted];\n",
                dot_escape(&tail.entry_source(i).0),
                dot_escape(&t_i)
            ));
            below = t_i;
        }
        let more = format!("{}#more", tail.base);
        out.push_str(&format!(
            "  \"{}\" [label=\"⋯\", shape=plaintext];\n",
            dot_escape(&more)
        ));
        out.push_str(&format!(
            "  \"{}\" -> \"{}\";\n",
            dot_escape(&more),
            dot_escape(&below)
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let doc = parse_document(r#"{"vertices":["v"],"edges":[]}"#).unwrap();
        assert!(doc.tails.is_empty());
        match doc.into_analysis_input().unwrap() {
            AnalysisInput::Finite(g) => {
                assert_eq!(g.vertex_count(), 1);
                assert_eq!(g.edge_count(), 0);
            }
            other => panic!("expected finite, got {other:?}"),
        }

        let doc = parse_document(
            r#"{"vertices":["v"],"edges":[{"id":"e","src":"v","dst":"v","mult":"omega"}]}"#,
        )
        .unwrap();
        assert!(doc.graph.has_omega());
        assert!(!doc.graph.is_row_finite());
        assert!(matches!(
            doc.into_analysis_input().unwrap(),
            AnalysisInput::Mult(_)
        ));

        let err = parse_document(r#"{"vertices":["u"],"edges":[{"id":"e","src":"u","dst":"v"}]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::DanglingEndpoint { vertex, .. } if vertex == "v"));
    }

    #[test]
    fn parse_rejects_bad_mult_and_duplicates() {
        let err = parse_document(
            r#"{"vertices":["v"],"edges":[{"id":"e","src":"v","dst":"v","mult":0}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        let err = parse_document(
            r#"{"vertices":["v"],"edges":[{"id":"e","src":"v","dst":"v","mult":"lots"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        let err = parse_document(r#"{"vertices":["v","v"],"edges":[]}"#).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
    }

    #[test]
    fn parse_teg_document() {
        let doc = parse_document(
            r#"{"vertices":["u","v"],"edges":[],
                "tails":[{"base":"v","preperiod":[],"period":["u"]}]}"#,
        )
        .unwrap();
        match doc.into_analysis_input().unwrap() {
            AnalysisInput::Teg(teg) => {
                assert_eq!(teg.tails.len(), 1);
                assert_eq!(teg.tails[0].period, vec![VertexId::from("u")]);
            }
            other => panic!("expected teg, got {other:?}"),
        }
    }

    #[test]
    fn mult_graph_json_round_trip() {
        let mg = MultGraph::from_parts(
            &["u", "v"],
            &[
                ("e", "u", "v", Mult::Finite(2)),
                ("f", "v", "v", Mult::Omega),
                ("g", "u", "u", Mult::Finite(1)),
            ],
        )
        .unwrap();
        let text = mult_graph_to_json(&mg).to_string();
        let doc = parse_document(&text).unwrap();
        assert_eq!(doc.graph, mg);
    }

    #[test]
    fn teg_json_round_trip() {
        let mg = MultGraph::from_parts(&["u", "v"], &[("e", "u", "v", Mult::Omega)]).unwrap();
        let teg = crate::desing::desingularize(&mg).unwrap();
        let text = teg_to_json(&teg).to_string();
        let doc = parse_document(&text).unwrap();
        match doc.into_analysis_input().unwrap() {
            AnalysisInput::Teg(back) => assert_eq!(back, teg),
            other => panic!("expected teg, got {other:?}"),
        }
    }

    #[test]
    fn dot_renders() {
        let g = Graph::from_parts(&["u", "v"], &[("e", "u", "v")]).unwrap();
        let dot = dot_graph(&g);
        assert!(dot.contains("\"u\" -> \"v\" [label=\"e\"]"));

        let mg = MultGraph::from_parts(&["v"], &[("e", "v", "v", Mult::Omega)]).unwrap();
        let dot = dot_mult(&mg);
        assert!(dot.contains("(ω)"));
        assert!(dot.contains("style=dashed"));

        let teg = crate::desing::desingularize(&mg).unwrap();
        let dot = dot_teg(&teg);
        assert!(dot.contains("⋯"));
        assert!(dot.contains("v#t1"));
    }
}
