//! Exhaustive enumeration of small labeled multigraphs and the cross-check
//! battery run over them.
//!
//! The corpus for bounds (V, E) consists of every multigraph with `k ≤ V`
//! labeled vertices and a multiset of `j ≤ E` edge classes over the `k²`
//! ordered vertex pairs, each class carrying a multiplicity from {1} (or
//! {1, 2, ω} when omega is allowed). The enumeration count has the closed
//! form `Σ_k Σ_j C(k²+j−1, j) · m^j`, which the runner checks against the
//! actual count. Every cross-check pairs an implementation with an
//! independent oracle: combinatorial vs subquotient-scan elementary
//! detection, the general detour algorithm vs the no-sources shortcut,
//! fixpoint closure vs intersection of supersets, the walk trichotomy vs a
//! truncated counting enumerator, symbolic equality vs the acyclic matrix
//! representation, and desingularization round trips.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::classify::{
    elementary_subquotients, regularity_report, AnalysisInput, ElementaryMethod,
};
use crate::desing::{collapse, desingularize, distinct_detours_extended, TegDetourWitness};
use crate::error::{Error, Result};
use crate::graph::{walk_class, EdgeId, Graph, Mult, MultGraph, Path, VertexId, WalkClass};
use crate::ideals::{classify_subset, enumerate_hs, hs_closure, subquotient_graph};
use crate::inflow::{find_nondegenerate_extension, m2m3_hom, ExtensionOutcome, InFlowGraph};
use crate::io::mult_graph_to_json;
use crate::lpa::{
    lpa_equal, lpa_mul, lpa_star, normal_form, represent_acyclic, LpaElement, LpaTerm,
};
use crate::properties::distinct_detours;

/// Bounds for the exhaustive corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusSpec {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub allow_omega: bool,
    /// Deduplicate up to graph isomorphism (a speed lever, off by default).
    pub canonicalize: bool,
}

impl CorpusSpec {
    pub fn new(max_vertices: usize, max_edges: usize) -> Result<CorpusSpec> {
        if max_vertices == 0 {
            return Err(Error::Precondition("bounds must be positive".into()));
        }
        Ok(CorpusSpec {
            max_vertices,
            max_edges,
            allow_omega: false,
            canonicalize: false,
        })
    }

    fn mult_choices(&self) -> &'static [Mult] {
        if self.allow_omega {
            &[Mult::Finite(1), Mult::Finite(2), Mult::Omega]
        } else {
            &[Mult::Finite(1)]
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Closed-form count of the labeled corpus, before canonicalization.
pub fn count_graphs(spec: &CorpusSpec) -> u128 {
    let m = spec.mult_choices().len() as u128;
    let mut total = 0u128;
    for k in 1..=spec.max_vertices as u128 {
        for j in 0..=spec.max_edges as u128 {
            total += binomial(k * k + j - 1, j) * m.pow(j as u32);
        }
    }
    total
}

/// Enumerate the corpus deterministically: vertices `v1..vk`, edge classes
/// `e1..ej` over non-decreasing pair-index sequences, multiplicities in
/// lexicographic order.
pub fn enumerate(spec: &CorpusSpec) -> Vec<MultGraph> {
    let mults = spec.mult_choices();
    let mut out = Vec::new();
    let mut canon_seen: BTreeSet<(usize, Vec<(usize, usize, Mult)>)> = BTreeSet::new();
    for k in 1..=spec.max_vertices {
        let vertices: Vec<VertexId> = (1..=k).map(|i| VertexId(format!("v{i}"))).collect();
        let pair = |idx: usize| (idx / k, idx % k);
        for j in 0..=spec.max_edges {
            let mut pairs = vec![0usize; j];
            loop {
                // all multiplicity assignments for this pair multiset
                let mut assignment = vec![0usize; j];
                loop {
                    let mg = MultGraph::new(
                        vertices.iter().cloned(),
                        pairs.iter().enumerate().map(|(i, &p)| {
                            let (s, d) = pair(p);
                            (
                                EdgeId(format!("e{}", i + 1)),
                                vertices[s].clone(),
                                vertices[d].clone(),
                                mults[assignment[i]],
                            )
                        }),
                    )
                    .expect("corpus graphs are well-formed");
                    if spec.canonicalize {
                        let form = canonical_form(k, &pairs, &assignment, mults, pair);
                        if canon_seen.insert((k, form)) {
                            out.push(mg);
                        }
                    } else {
                        out.push(mg);
                    }
                    // next assignment
                    let mut i = j;
                    loop {
                        if i == 0 {
                            break;
                        }
                        i -= 1;
                        if assignment[i] + 1 < mults.len() {
                            assignment[i] += 1;
                            for a in assignment.iter_mut().skip(i + 1) {
                                *a = 0;
                            }
                            break;
                        }
                        if i == 0 {
                            i = usize::MAX;
                            break;
                        }
                    }
                    if i == usize::MAX || j == 0 {
                        break;
                    }
                }
                // next non-decreasing pair sequence
                if j == 0 {
                    break;
                }
                let mut i = j - 1;
                loop {
                    if pairs[i] + 1 < k * k {
                        pairs[i] += 1;
                        let v = pairs[i];
                        for p in pairs.iter_mut().skip(i + 1) {
                            *p = v;
                        }
                        break;
                    }
                    if i == 0 {
                        i = usize::MAX;
                        break;
                    }
                    i -= 1;
                }
                if i == usize::MAX {
                    break;
                }
            }
        }
    }
    out
}

fn canonical_form(
    k: usize,
    pairs: &[usize],
    assignment: &[usize],
    mults: &[Mult],
    pair: impl Fn(usize) -> (usize, usize),
) -> Vec<(usize, usize, Mult)> {
    let perms = permutations(k);
    let mut best: Option<Vec<(usize, usize, Mult)>> = None;
    for perm in &perms {
        let mut edges: Vec<(usize, usize, Mult)> = pairs
            .iter()
            .zip(assignment)
            .map(|(&p, &a)| {
                let (s, d) = pair(p);
                (perm[s], perm[d], mults[a])
            })
            .collect();
        edges.sort();
        if best.as_ref().map_or(true, |b| &edges < b) {
            best = Some(edges);
        }
    }
    best.unwrap_or_default()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..k).collect();
    fn heap(items: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..n {
            heap(items, n - 1, out);
            if n % 2 == 0 {
                items.swap(i, n - 1);
            } else {
                items.swap(0, n - 1);
            }
        }
    }
    heap(&mut items, k, &mut out);
    out
}

// ---------------------------------------------------------------------------
// independent oracles
// ---------------------------------------------------------------------------

/// Truncated walk counting, saturating at 2: the number of walks
/// `start → end` of length 1..=bound satisfying the same constraints as
/// [`walk_class`], counted by a direct per-length sweep.
pub fn walk_count_truncated(
    g: &Graph,
    start: &VertexId,
    end: &VertexId,
    forbidden: &BTreeSet<VertexId>,
    must_leave: Option<&BTreeSet<EdgeId>>,
    allow_trivial: bool,
    bound: usize,
) -> u32 {
    let verts: Vec<&VertexId> = g.vertices().collect();
    let idx: BTreeMap<&VertexId, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let n = verts.len();
    let state = |v: &VertexId, b: bool| 2 * idx[v] + usize::from(b);
    let edge_flag = |e: &EdgeId| must_leave.map_or(true, |ml| !ml.contains(e));
    let sat = |a: u32, b: u32| (a + b).min(2);

    let mut accepted: u32 = 0;
    if allow_trivial && start == end && must_leave.is_none() {
        accepted = 1;
    }
    if bound == 0 {
        return accepted.min(2);
    }
    let mut cur = vec![0u32; 2 * n];
    let init_flag = must_leave.is_none();
    for e in g.out_edges(start) {
        let b = init_flag || edge_flag(e);
        if g.dst(e) == end && b {
            accepted = sat(accepted, 1);
        }
        if !forbidden.contains(g.dst(e)) {
            let s = state(g.dst(e), b);
            cur[s] = sat(cur[s], 1);
        }
    }
    for _len in 2..=bound {
        let mut next = vec![0u32; 2 * n];
        for (s, &c) in cur.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let v = verts[s / 2];
            let b = s % 2 == 1;
            for e in g.out_edges(v) {
                let b2 = b || edge_flag(e);
                if g.dst(e) == end && b2 {
                    accepted = sat(accepted, c);
                }
                if !forbidden.contains(g.dst(e)) {
                    let t = state(g.dst(e), b2);
                    next[t] = sat(next[t], c);
                }
            }
        }
        cur = next;
    }
    accepted.min(2)
}

/// Closure oracle: intersect every hereditary-saturated superset found by a
/// full subset scan.
pub fn brute_force_closure(g: &Graph, s: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
    let verts: Vec<&VertexId> = g.vertices().collect();
    assert!(
        verts.len() <= 20,
        "the closure oracle scans all vertex subsets"
    );
    let mut inter: Option<BTreeSet<VertexId>> = None;
    for mask in 0u64..(1u64 << verts.len()) {
        let cand: BTreeSet<VertexId> = verts
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| (*v).clone())
            .collect();
        if !s.is_subset(&cand) {
            continue;
        }
        let (h, sat) = classify_subset(g, &cand).expect("subset of g");
        if h && sat {
            inter = Some(match inter {
                None => cand,
                Some(acc) => acc.intersection(&cand).cloned().collect(),
            });
        }
    }
    inter.expect("the full vertex set qualifies")
}

// ---------------------------------------------------------------------------
// randomized LPA material
// ---------------------------------------------------------------------------

/// A random acyclic multigraph: edges only run from lower to higher vertex
/// index, so any edge multiset is acyclic.
pub fn random_acyclic_graph(rng: &mut StdRng, max_vertices: usize, max_edges: usize) -> Graph {
    let k = rng.gen_range(1..=max_vertices.max(1));
    let vertices: Vec<VertexId> = (1..=k).map(|i| VertexId(format!("v{i}"))).collect();
    let m = if k >= 2 {
        rng.gen_range(0..=max_edges)
    } else {
        0
    };
    let mut edges = Vec::new();
    for i in 0..m {
        let a = rng.gen_range(0..k - 1);
        let b = rng.gen_range(a + 1..k);
        edges.push((
            EdgeId(format!("e{}", i + 1)),
            vertices[a].clone(),
            vertices[b].clone(),
        ));
    }
    Graph::new(vertices, edges).expect("indices are in range")
}

fn random_path_from(rng: &mut StdRng, g: &Graph, start: &VertexId, max_len: usize) -> Path {
    let mut travel: Vec<EdgeId> = Vec::new();
    let mut cur = start.clone();
    let len = rng.gen_range(0..=max_len);
    for _ in 0..len {
        let outs = g.out_edges(&cur);
        if outs.is_empty() {
            break;
        }
        let e = outs[rng.gen_range(0..outs.len())].clone();
        cur = g.dst(&e).clone();
        travel.push(e);
    }
    Path::from_travel(g, start.clone(), &travel).expect("walk is valid")
}

/// A random element with a handful of terms and small rational coefficients.
pub fn random_element(rng: &mut StdRng, g: &Graph, max_terms: usize) -> LpaElement {
    let verts: Vec<&VertexId> = g.vertices().collect();
    let mut acc = LpaElement::zero();
    let terms = rng.gen_range(1..=max_terms.max(1));
    for _ in 0..terms {
        let start = verts[rng.gen_range(0..verts.len())].clone();
        let mu = random_path_from(rng, g, &start, 2);
        let nu = random_path_from(rng, g, &start, 2);
        let num = loop {
            let n = rng.gen_range(-3i64..=3);
            if n != 0 {
                break n;
            }
        };
        let den = rng.gen_range(1i64..=3);
        let coeff = BigRational::new(num.into(), den.into());
        let term = LpaTerm::new(g, mu, nu).expect("shared source by construction");
        acc = acc.add(&LpaElement::from_term(term, coeff));
    }
    acc
}

/// A random element that is zero in `L(E)`: a two-sided multiple of a
/// Cuntz–Krieger relation `p_v − Σ_{r(e)=v} s_e s_e*`.
pub fn random_zero_element(rng: &mut StdRng, g: &Graph) -> Result<LpaElement> {
    let regular: Vec<&VertexId> = g.vertices().filter(|v| !g.in_edges(v).is_empty()).collect();
    if regular.is_empty() {
        return Ok(LpaElement::zero());
    }
    let v = regular[rng.gen_range(0..regular.len())];
    let mut rel = LpaElement::vertex(g, v)?;
    for e in g.in_edges(v) {
        let s_e = LpaElement::edge(g, e)?;
        rel = rel.sub(&lpa_mul(g, &s_e, &lpa_star(&s_e))?);
    }
    let x = random_element(rng, g, 2);
    let y = random_element(rng, g, 2);
    lpa_mul(g, &lpa_mul(g, &x, &rel)?, &y)
}

// ---------------------------------------------------------------------------
// the cross-check battery
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct Violation {
    pub graph_index: usize,
    pub graph: serde_json::Value,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct CrosscheckReport {
    pub graphs: usize,
    pub checks_run: BTreeMap<String, usize>,
    pub violations: Vec<Violation>,
}

impl CrosscheckReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CrosscheckOptions {
    pub seed: u64,
    /// Random element pairs per acyclic graph for the matrix-oracle check.
    pub lpa_samples: usize,
}

impl Default for CrosscheckOptions {
    fn default() -> Self {
        CrosscheckOptions {
            seed: 0xC0FFEE,
            lpa_samples: 5,
        }
    }
}

/// Run every cross-check pair over the corpus, fanning out per graph and
/// merging deterministically by graph index.
pub fn run_crosschecks(graphs: &[MultGraph], opts: &CrosscheckOptions) -> CrosscheckReport {
    let per_graph: Vec<(usize, BTreeMap<String, usize>, Vec<Violation>)> = graphs
        .par_iter()
        .enumerate()
        .map(|(idx, mg)| {
            let mut counts = BTreeMap::new();
            let mut violations = Vec::new();
            check_one(idx, mg, opts, &mut counts, &mut violations);
            (idx, counts, violations)
        })
        .collect();
    let mut report = CrosscheckReport {
        graphs: graphs.len(),
        ..Default::default()
    };
    let mut ordered = per_graph;
    ordered.sort_by_key(|(idx, _, _)| *idx);
    for (_, counts, violations) in ordered {
        for (k, v) in counts {
            *report.checks_run.entry(k).or_insert(0) += v;
        }
        report.violations.extend(violations);
    }
    report
}

fn check_one(
    idx: usize,
    mg: &MultGraph,
    opts: &CrosscheckOptions,
    counts: &mut BTreeMap<String, usize>,
    violations: &mut Vec<Violation>,
) {
    let fail = |check: &str, detail: String, violations: &mut Vec<Violation>| {
        violations.push(Violation {
            graph_index: idx,
            graph: mult_graph_to_json(mg),
            check: check.to_string(),
            detail,
        });
    };
    let ran = |check: &str, counts: &mut BTreeMap<String, usize>| {
        *counts.entry(check.to_string()).or_insert(0) += 1;
    };

    if mg.has_omega() {
        // desingularization round trip
        ran("desingularization-round-trip", counts);
        match desingularize(mg).and_then(|teg| collapse(&teg).map(|back| (teg, back))) {
            Ok((teg, back)) => {
                if back.multiplicity_signature() != mg.multiplicity_signature() {
                    fail(
                        "desingularization-round-trip",
                        "collapse(desingularize(mg)) differs from mg".into(),
                        violations,
                    );
                }
                if !mg.class_graph().has_cycle() {
                    ran("acyclic-omega-no-detours", counts);
                    match distinct_detours_extended(&teg) {
                        Ok(v) => {
                            if v.holds {
                                fail(
                                    "acyclic-omega-no-detours",
                                    "acyclic omega input reported distinct detours".into(),
                                    violations,
                                );
                            } else if !matches!(v.witness, Some(TegDetourWitness::TailPath { .. }))
                            {
                                fail(
                                    "acyclic-omega-no-detours",
                                    format!("expected a tail witness, got {:?}", v.witness),
                                    violations,
                                );
                            }
                        }
                        Err(e) => fail("acyclic-omega-no-detours", e.to_string(), violations),
                    }
                }
                // the truncation-based verdicts must not depend on the depth
                ran("tail-decision-stability", counts);
                match (
                    distinct_detours_extended(&teg),
                    crate::desing::distinct_detours_extended_depth(&teg, 3),
                    crate::desing::condition_k_extended(&teg),
                    crate::desing::condition_k_extended_depth(&teg, 5),
                ) {
                    (Ok(dd2), Ok(dd3), Ok(k3), Ok(k5)) => {
                        if dd2.holds != dd3.holds {
                            fail(
                                "tail-decision-stability",
                                format!("detours: depth 2 {} vs depth 3 {}", dd2.holds, dd3.holds),
                                violations,
                            );
                        }
                        if k3.holds != k5.holds {
                            fail(
                                "tail-decision-stability",
                                format!(
                                    "condition K: depth 3 {} vs depth 5 {}",
                                    k3.holds, k5.holds
                                ),
                                violations,
                            );
                        }
                    }
                    other => fail("tail-decision-stability", format!("{other:?}"), violations),
                }
                // the full report runs the extended checks on every omega
                // input; its invariants must hold there too
                ran("omega-report-coherence", counts);
                match regularity_report(&AnalysisInput::Mult(mg.clone())) {
                    Ok(r) => {
                        if r.pure != (r.condition_k.holds && r.distinct_detours.holds) {
                            fail(
                                "omega-report-coherence",
                                "pure ≠ K ∧ detours".into(),
                                violations,
                            );
                        }
                        if r.elementary_subquotient.present == r.pure {
                            fail(
                                "omega-report-coherence",
                                "elementary ≠ ¬pure".into(),
                                violations,
                            );
                        }
                        if r.z_stable.is_yes() && !r.pure {
                            fail(
                                "omega-report-coherence",
                                "z-stable yes without pureness".into(),
                                violations,
                            );
                        }
                        if r.row_finite {
                            fail(
                                "omega-report-coherence",
                                "omega input reported row-finite".into(),
                                violations,
                            );
                        }
                    }
                    Err(e) => fail("omega-report-coherence", e.to_string(), violations),
                }
            }
            Err(e) => fail("desingularization-round-trip", e.to_string(), violations),
        }
        return;
    }

    let g = mg.expand().expect("no omega multiplicities");

    // elementary subquotients: combinatorial vs oracle
    ran("elementary-agreement", counts);
    match (
        elementary_subquotients(&g, ElementaryMethod::Combinatorial),
        elementary_subquotients(&g, ElementaryMethod::Oracle),
    ) {
        (Ok(a), Ok(b)) => {
            if a.present != b.present {
                fail(
                    "elementary-agreement",
                    format!("combinatorial {} vs oracle {}", a.present, b.present),
                    violations,
                );
            }
        }
        (a, b) => fail("elementary-agreement", format!("{a:?} / {b:?}"), violations),
    }

    // z-stable iff Condition (K) and no sources, through the full report
    ran("zstable-iff-k-and-no-sources", counts);
    match regularity_report(&AnalysisInput::Finite(g.clone())) {
        Ok(r) => {
            let expected = r.condition_k.holds && r.no_sources;
            if r.z_stable.is_yes() != expected {
                fail(
                    "zstable-iff-k-and-no-sources",
                    format!("verdict {:?} vs expected {}", r.z_stable, expected),
                    violations,
                );
            }
        }
        Err(e) => fail("zstable-iff-k-and-no-sources", e.to_string(), violations),
    }

    // general detour algorithm vs the no-sources shortcut
    ran("detours-iff-no-sources", counts);
    match distinct_detours(&g) {
        Ok(v) => {
            if v.holds != g.sources().is_empty() {
                fail(
                    "detours-iff-no-sources",
                    "collapse equivalence failed".into(),
                    violations,
                );
            }
        }
        Err(e) => fail("detours-iff-no-sources", e.to_string(), violations),
    }

    // detour and pureness heredity across every hereditary-saturated subset
    ran("detour-heredity", counts);
    ran("pure-heredity", counts);
    let pure_of = |g: &Graph| -> Result<bool> {
        Ok(crate::properties::condition_k(g).holds && distinct_detours(g)?.holds)
    };
    let lattice = enumerate_hs(&g);
    let full: BTreeSet<VertexId> = g.vertices().cloned().collect();
    for h in &lattice.elements {
        let restriction = subquotient_graph(&g, h, &BTreeSet::new());
        let quotient = subquotient_graph(&g, &full, h);
        match (restriction, quotient) {
            (Ok(res), Ok(quo)) => {
                match (
                    distinct_detours(&g),
                    distinct_detours(&res),
                    distinct_detours(&quo),
                ) {
                    (Ok(whole), Ok(r), Ok(q)) => {
                        if whole.holds != (r.holds && q.holds) {
                            fail(
                                "detour-heredity",
                                format!("H = {h:?}: {} vs {} ∧ {}", whole.holds, r.holds, q.holds),
                                violations,
                            );
                        }
                    }
                    other => fail(
                        "detour-heredity",
                        format!("H = {h:?}: {other:?}"),
                        violations,
                    ),
                }
                match (pure_of(&g), pure_of(&res), pure_of(&quo)) {
                    (Ok(whole), Ok(r), Ok(q)) => {
                        if whole != (r && q) {
                            fail(
                                "pure-heredity",
                                format!("H = {h:?}: {whole} vs {r} ∧ {q}"),
                                violations,
                            );
                        }
                    }
                    other => fail("pure-heredity", format!("H = {h:?}: {other:?}"), violations),
                }
            }
            other => fail(
                "detour-heredity",
                format!("H = {h:?}: {other:?}"),
                violations,
            ),
        }
    }

    // Cuntz–Krieger identities
    ran("ck-identities", counts);
    match crate::lpa::verify_ck(&g) {
        Ok(report) => {
            for c in report.checks.iter().filter(|c| !c.pass) {
                fail("ck-identities", c.identity.clone(), violations);
            }
        }
        Err(e) => fail("ck-identities", e.to_string(), violations),
    }

    // closure fixpoint vs brute-force intersection
    ran("closure-oracle", counts);
    let verts: Vec<VertexId> = g.vertices().cloned().collect();
    for mask in 0u64..(1u64 << verts.len()) {
        let s: BTreeSet<VertexId> = verts
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v.clone())
            .collect();
        let fast = hs_closure(&g, &s).expect("subset of g").subset;
        let slow = brute_force_closure(&g, &s);
        if fast != slow {
            fail(
                "closure-oracle",
                format!("S = {s:?}: {fast:?} vs {slow:?}"),
                violations,
            );
        }
    }

    // walk trichotomy vs truncated counting
    ran("walk-oracle", counts);
    let bound = verts.len() * verts.len() + verts.len();
    let first_edge: Option<BTreeSet<EdgeId>> =
        g.edges().next().map(|(e, _)| BTreeSet::from([e.clone()]));
    for s in &verts {
        for t in &verts {
            let forbids = [
                BTreeSet::new(),
                BTreeSet::from([s.clone()]),
                BTreeSet::from([s.clone(), t.clone()]),
            ];
            for forbidden in &forbids {
                for (ml, trivial) in [(None, false), (first_edge.as_ref(), false), (None, true)] {
                    let class = walk_class(&g, s, t, forbidden, ml, trivial)
                        .expect("vertices from the graph");
                    let count = walk_count_truncated(&g, s, t, forbidden, ml, trivial, bound);
                    let agrees = match class {
                        WalkClass::Zero => count == 0,
                        WalkClass::One => count == 1,
                        WalkClass::Many => count >= 2,
                    };
                    if !agrees {
                        fail(
                            "walk-oracle",
                            format!("{s}→{t} forbid {forbidden:?}: {class:?} vs count {count}"),
                            violations,
                        );
                    }
                }
            }
        }
    }

    if g.is_acyclic() {
        // in-flow growth and the verified constructions
        ran("intree-constructions", counts);
        for v in g.vertices() {
            let f = InFlowGraph::root_only(&g, v).expect("vertex of g");
            match find_nondegenerate_extension(&g, &f, 2 * verts.len() + 2) {
                Ok(ExtensionOutcome::Nondegenerate(fp, _)) => {
                    if let Err(e) = m2m3_hom(&g, &f, &fp) {
                        fail("intree-constructions", format!("root {v}: {e}"), violations);
                    }
                }
                Ok(ExtensionOutcome::Degenerate(ev)) => {
                    if ev.unique_path.validate(&g).is_err() {
                        fail(
                            "intree-constructions",
                            format!("root {v}: invalid degenerate evidence"),
                            violations,
                        );
                    }
                }
                Err(e) => fail("intree-constructions", format!("root {v}: {e}"), violations),
            }
        }

        // symbolic equality vs the faithful matrix representation
        ran("lpa-oracle", counts);
        let mut rng = StdRng::seed_from_u64(opts.seed ^ (idx as u64).wrapping_mul(0x9E3779B9));
        for _ in 0..opts.lpa_samples {
            let a = random_element(&mut rng, &g, 3);
            let b = random_element(&mut rng, &g, 3);
            match lpa_oracle_trial(&g, &a, &b) {
                Ok(true) => {}
                Ok(false) => fail(
                    "lpa-oracle",
                    format!("equality mismatch for `{a}` vs `{b}`"),
                    violations,
                ),
                Err(e) => fail("lpa-oracle", e.to_string(), violations),
            }
        }
        // constructed equal pair: b = a + (zero element)
        let a = random_element(&mut rng, &g, 3);
        match random_zero_element(&mut rng, &g) {
            Ok(z) => {
                let b = a.add(&z);
                match lpa_equal(&g, &a, &b) {
                    Ok(true) => {}
                    Ok(false) => fail(
                        "lpa-oracle",
                        "constructed equal pair differs".into(),
                        violations,
                    ),
                    Err(e) => fail("lpa-oracle", e.to_string(), violations),
                }
            }
            Err(e) => fail("lpa-oracle", e.to_string(), violations),
        }
    }
}

/// One oracle trial: symbolic equality must coincide with equality of the
/// matrix representations, and the rewrite must preserve the matrix.
pub fn lpa_oracle_trial(g: &Graph, a: &LpaElement, b: &LpaElement) -> Result<bool> {
    let eq_sym = lpa_equal(g, a, b)?;
    let ra = represent_acyclic(g, a)?;
    let rb = represent_acyclic(g, b)?;
    let eq_mat = ra == rb;
    if eq_sym != eq_mat {
        return Ok(false);
    }
    let nf = normal_form(g, a)?;
    Ok(represent_acyclic(g, &nf)? == ra)
}
