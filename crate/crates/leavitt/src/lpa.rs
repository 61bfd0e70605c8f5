//! Exact symbolic arithmetic in the Leavitt path algebra `L(E)` over the
//! rationals.
//!
//! Elements are rational linear combinations of terms `s_μ s_ν*` with
//! `s(μ) = s(ν)`; the vertex projection `p_v` is the term with both paths
//! trivial at `v`. Products follow the factorization rule
//!
//! ```text
//!   (s_μ s_ν*)(s_γ s_λ*) = s_{μγ'} s_λ*  if γ = νγ'
//!                        = s_μ s_{λν'}*  if ν = γν'
//!                        = 0             otherwise
//! ```
//!
//! Equality is decided by a canonical normal form. For every regular vertex
//! `v` fix the special edge `γ_v`, the least-id element of `r^{-1}(v)`; a
//! term whose two paths share their final (source-side) edge `γ_v` rewrites
//!
//! ```text
//!   s_{μ'γ_v} s_{ν'γ_v}*  →  s_{μ'} s_{ν'}*  −  Σ_{e ∈ r^{-1}(v), e ≠ γ_v} s_{μ'e} s_{ν'e}*
//! ```
//!
//! The rewrite eliminates the special edge's diagonal pair rather than
//! expanding projections, which would not terminate. Every emitted sibling
//! term ends in a non-special edge and is irreducible at its last position,
//! and the remaining term is strictly shorter, so per-term reduction
//! terminates and is a well-defined linear map. On acyclic graphs the
//! path-space matrix representation gives an independent faithfulness
//! oracle.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Path, VertexId};

/// A spanning term `s_μ s_ν*` with `s(μ) = s(ν)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LpaTerm {
    mu: Path,
    nu: Path,
}

impl LpaTerm {
    pub fn new(g: &Graph, mu: Path, nu: Path) -> Result<LpaTerm> {
        mu.validate(g)?;
        nu.validate(g)?;
        if mu.source() != nu.source() {
            return Err(Error::InvalidPath(format!(
                "term paths must share a source: s(μ) = `{}`, s(ν) = `{}`",
                mu.source(),
                nu.source()
            )));
        }
        Ok(LpaTerm { mu, nu })
    }

    pub fn mu(&self) -> &Path {
        &self.mu
    }

    pub fn nu(&self) -> &Path {
        &self.nu
    }

    pub fn star(&self) -> LpaTerm {
        LpaTerm {
            mu: self.nu.clone(),
            nu: self.mu.clone(),
        }
    }
}

/// A formal rational combination of terms; the zero element stores nothing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LpaElement {
    coeffs: BTreeMap<LpaTerm, BigRational>,
}

impl LpaElement {
    pub fn zero() -> LpaElement {
        LpaElement::default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LpaTerm, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn from_term(term: LpaTerm, coeff: BigRational) -> LpaElement {
        let mut el = LpaElement::zero();
        el.add_term(term, coeff);
        el
    }

    /// The vertex projection `p_v`.
    pub fn vertex(g: &Graph, v: &VertexId) -> Result<LpaElement> {
        if !g.contains_vertex(v) {
            return Err(Error::UnknownVertex(v.0.clone()));
        }
        let t = LpaTerm::new(g, Path::trivial(v.clone()), Path::trivial(v.clone()))?;
        Ok(LpaElement::from_term(t, BigRational::one()))
    }

    /// The partial isometry `s_e`.
    pub fn edge(g: &Graph, e: &EdgeId) -> Result<LpaElement> {
        let edge = g.edge(e).ok_or_else(|| Error::UnknownEdge(e.0.clone()))?;
        let mu = Path::from_travel(g, edge.src.clone(), std::slice::from_ref(e))?;
        let nu = Path::trivial(edge.src.clone());
        Ok(LpaElement::from_term(
            LpaTerm::new(g, mu, nu)?,
            BigRational::one(),
        ))
    }

    /// The path isometry `s_μ`.
    pub fn path(g: &Graph, mu: &Path) -> Result<LpaElement> {
        mu.validate(g)?;
        let nu = Path::trivial(mu.source().clone());
        Ok(LpaElement::from_term(
            LpaTerm::new(g, mu.clone(), nu)?,
            BigRational::one(),
        ))
    }

    fn add_term(&mut self, term: LpaTerm, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.coeffs.entry(term) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &LpaElement) -> LpaElement {
        let mut out = self.clone();
        for (t, c) in &other.coeffs {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> LpaElement {
        LpaElement {
            coeffs: self
                .coeffs
                .iter()
                .map(|(t, c)| (t.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &LpaElement) -> LpaElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, q: &BigRational) -> LpaElement {
        if q.is_zero() {
            return LpaElement::zero();
        }
        LpaElement {
            coeffs: self
                .coeffs
                .iter()
                .map(|(t, c)| (t.clone(), c * q))
                .collect(),
        }
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        for t in self.coeffs.keys() {
            t.mu.validate(g)?;
            t.nu.validate(g)?;
        }
        Ok(())
    }
}

/// If `longer = shorter ∘ rest` (shorter is a range-side prefix), return `rest`.
fn strip_range_prefix(g: &Graph, longer: &Path, shorter: &Path) -> Option<Path> {
    if shorter.is_trivial() {
        if longer.range(g) == *shorter.source() {
            return Some(longer.clone());
        }
        return None;
    }
    if longer.len() < shorter.len() || longer.edges()[..shorter.len()] != *shorter.edges() {
        return None;
    }
    let rest = longer.edges()[shorter.len()..].to_vec();
    if rest.is_empty() {
        Some(Path::trivial(longer.source().clone()))
    } else {
        Some(Path::from_composition(g, rest).expect("suffix of a valid path"))
    }
}

fn term_mul(g: &Graph, a: &LpaTerm, b: &LpaTerm) -> Option<LpaTerm> {
    if let Some(rest) = strip_range_prefix(g, &b.mu, &a.nu) {
        // γ = νγ': product is s_{μγ'} s_λ*
        let mu = a.mu.compose(g, &rest).expect("composable by construction");
        return Some(LpaTerm {
            mu,
            nu: b.nu.clone(),
        });
    }
    if let Some(rest) = strip_range_prefix(g, &a.nu, &b.mu) {
        // ν = γν': product is s_μ s_{λν'}*
        let nu = b.nu.compose(g, &rest).expect("composable by construction");
        return Some(LpaTerm {
            mu: a.mu.clone(),
            nu,
        });
    }
    None
}

/// Exact bilinear product of two elements over the same ambient graph.
pub fn lpa_mul(g: &Graph, a: &LpaElement, b: &LpaElement) -> Result<LpaElement> {
    a.validate(g)?;
    b.validate(g)?;
    let mut out = LpaElement::zero();
    for (ta, ca) in &a.coeffs {
        for (tb, cb) in &b.coeffs {
            if let Some(t) = term_mul(g, ta, tb) {
                out.add_term(t, ca * cb);
            }
        }
    }
    Ok(out)
}

/// The involution: `(s_μ s_ν*)* = s_ν s_μ*`, coefficients conjugated
/// (rationals are self-conjugate).
pub fn lpa_star(a: &LpaElement) -> LpaElement {
    let mut out = LpaElement::zero();
    for (t, c) in &a.coeffs {
        out.add_term(t.star(), c.clone());
    }
    out
}

/// The special edge of each regular vertex: the least-id element of `r^{-1}(v)`.
fn special_edges(g: &Graph) -> BTreeMap<VertexId, EdgeId> {
    g.vertices()
        .filter_map(|v| g.in_edges(v).first().map(|e| (v.clone(), e.clone())))
        .collect()
}

/// Canonical normal form; `normal_form(a) = normal_form(b)` iff `a = b` in
/// `L(E)`. Requires a finite row-finite ambient graph.
pub fn normal_form(g: &Graph, a: &LpaElement) -> Result<LpaElement> {
    a.validate(g)?;
    let special = special_edges(g);
    let mut out = LpaElement::zero();
    for (t, c) in &a.coeffs {
        reduce_term(g, &special, t, c, &mut out);
    }
    Ok(out)
}

fn reduce_term(
    g: &Graph,
    special: &BTreeMap<VertexId, EdgeId>,
    t: &LpaTerm,
    coeff: &BigRational,
    out: &mut LpaElement,
) {
    let (last_mu, last_nu) = match (t.mu.edges().last(), t.nu.edges().last()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            out.add_term(t.clone(), coeff.clone());
            return;
        }
    };
    if last_mu != last_nu || special.get(g.dst(last_mu)) != Some(last_mu) {
        out.add_term(t.clone(), coeff.clone());
        return;
    }
    let v = g.dst(last_mu).clone();
    let shorten = |p: &Path| -> Path {
        let edges = p.edges()[..p.len() - 1].to_vec();
        if edges.is_empty() {
            Path::trivial(v.clone())
        } else {
            Path::from_composition(g, edges).expect("prefix of a valid path")
        }
    };
    let mu_short = shorten(&t.mu);
    let nu_short = shorten(&t.nu);
    // siblings end in a non-special edge, hence are irreducible
    for e in g.in_edges(&v) {
        if e == last_mu {
            continue;
        }
        let branch =
            Path::from_travel(g, g.src(e).clone(), std::slice::from_ref(e)).expect("edge of g");
        let mu = mu_short
            .compose(g, &branch)
            .expect("r(branch) = v = s(mu_short)");
        let nu = nu_short
            .compose(g, &branch)
            .expect("r(branch) = v = s(nu_short)");
        out.add_term(LpaTerm { mu, nu }, -coeff.clone());
    }
    reduce_term(
        g,
        special,
        &LpaTerm {
            mu: mu_short,
            nu: nu_short,
        },
        coeff,
        out,
    );
}

/// Equality in `L(E)`: `normal_form(a − b) = 0`.
pub fn lpa_equal(g: &Graph, a: &LpaElement, b: &LpaElement) -> Result<bool> {
    Ok(normal_form(g, &a.sub(b))?.is_zero())
}

/// One verified identity in a Cuntz–Krieger report.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CkCheck {
    pub identity: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CkReport {
    pub checks: Vec<CkCheck>,
}

impl CkReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Symbolically verify the Cuntz–Krieger relations together with projection
/// orthogonality and `s_e* s_f = 0` for distinct edges. Failures indicate
/// engine bugs, not graph properties.
pub fn verify_ck(g: &Graph) -> Result<CkReport> {
    let mut checks = Vec::new();
    let mut check = |name: String, lhs: &LpaElement, rhs: &LpaElement| -> Result<()> {
        let pass = lpa_equal(g, lhs, rhs)?;
        checks.push(CkCheck {
            identity: name,
            pass,
        });
        Ok(())
    };

    for (e, edge) in g.edges() {
        let s_e = LpaElement::edge(g, e)?;
        let s_e_star = lpa_star(&s_e);
        // s_e* s_e = p_{s(e)}
        let lhs = lpa_mul(g, &s_e_star, &s_e)?;
        let rhs = LpaElement::vertex(g, &edge.src)?;
        check(format!("s*_[{e}]·s_[{e}] = p_[{}]", edge.src), &lhs, &rhs)?;
        // p_{r(e)} s_e = s_e
        let p_r = LpaElement::vertex(g, &edge.dst)?;
        let lhs = lpa_mul(g, &p_r, &s_e)?;
        check(format!("p_[{}]·s_[{e}] = s_[{e}]", edge.dst), &lhs, &s_e)?;
    }
    for v in g.vertices() {
        let ins = g.in_edges(v);
        if ins.is_empty() {
            continue;
        }
        // p_v = Σ_{r(e)=v} s_e s_e*
        let mut sum = LpaElement::zero();
        for e in ins {
            let s_e = LpaElement::edge(g, e)?;
            sum = sum.add(&lpa_mul(g, &s_e, &lpa_star(&s_e))?);
        }
        let p_v = LpaElement::vertex(g, v)?;
        check(
            format!("p_[{v}] = sum of s_e·s*_e over r(e) = {v}"),
            &p_v,
            &sum,
        )?;
    }
    for v in g.vertices() {
        for w in g.vertices() {
            let p_v = LpaElement::vertex(g, v)?;
            let p_w = LpaElement::vertex(g, w)?;
            let prod = lpa_mul(g, &p_v, &p_w)?;
            let expect = if v == w {
                p_v.clone()
            } else {
                LpaElement::zero()
            };
            check(
                format!("p_[{v}]·p_[{w}] = {}", if v == w { "p" } else { "0" }),
                &prod,
                &expect,
            )?;
        }
    }
    for (e, _) in g.edges() {
        for (f, _) in g.edges() {
            if e == f {
                continue;
            }
            let lhs = lpa_mul(
                g,
                &lpa_star(&LpaElement::edge(g, e)?),
                &LpaElement::edge(g, f)?,
            )?;
            check(format!("s*_[{e}]·s_[{f}] = 0"), &lhs, &LpaElement::zero())?;
        }
    }
    Ok(CkReport { checks })
}

/// The path-space representation of an acyclic graph: one block per source
/// `w`, basis the paths with source `w`, exact rational entries. Faithful:
/// the matrix vanishes iff the element is zero in `L(E)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcyclicRep {
    pub blocks: BTreeMap<VertexId, Block>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub basis: Vec<Path>,
    pub matrix: Vec<Vec<BigRational>>,
}

impl AcyclicRep {
    pub fn is_zero(&self) -> bool {
        self.blocks
            .values()
            .all(|b| b.matrix.iter().all(|row| row.iter().all(|q| q.is_zero())))
    }
}

/// All paths of an acyclic graph grouped by source vertex, each group in
/// deterministic prefix-first lexicographic travel order.
fn paths_by_source(g: &Graph) -> BTreeMap<VertexId, Vec<Path>> {
    let mut map: BTreeMap<VertexId, Vec<Path>> = BTreeMap::new();
    for w in g.sources() {
        let mut acc = Vec::new();
        let mut travel: Vec<EdgeId> = Vec::new();
        collect_paths(g, &w, &w, &mut travel, &mut acc);
        map.insert(w, acc);
    }
    map
}

fn collect_paths(
    g: &Graph,
    origin: &VertexId,
    cur: &VertexId,
    travel: &mut Vec<EdgeId>,
    acc: &mut Vec<Path>,
) {
    acc.push(Path::from_travel(g, origin.clone(), travel).expect("valid travel"));
    for e in g.out_edges(cur) {
        travel.push(e.clone());
        collect_paths(g, origin, g.dst(e), travel, acc);
        travel.pop();
    }
}

/// Evaluate an element in the path-space representation of a finite acyclic
/// graph. The term `s_μ s_ν*` sends a basis path `λ` to `μλ'` when `λ = νλ'`
/// and to zero otherwise.
pub fn represent_acyclic(g: &Graph, a: &LpaElement) -> Result<AcyclicRep> {
    if g.has_cycle() {
        return Err(Error::CycleNotAllowed);
    }
    a.validate(g)?;
    let groups = paths_by_source(g);
    let mut blocks = BTreeMap::new();
    for (w, basis) in groups {
        let index: BTreeMap<&Path, usize> = basis.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let n = basis.len();
        let mut matrix = vec![vec![BigRational::zero(); n]; n];
        for (t, c) in a.terms() {
            for (col, lambda) in basis.iter().enumerate() {
                if let Some(rest) = strip_range_prefix(g, lambda, &t.nu) {
                    let image = t.mu.compose(g, &rest).expect("compatible by construction");
                    let row = index[&image];
                    matrix[row][col] += c.clone();
                }
            }
        }
        blocks.insert(w, Block { basis, matrix });
    }
    Ok(AcyclicRep { blocks })
}

// ---------------------------------------------------------------------------
// text grammar: `coeff·s_[e1.e2]·s*_[f1]`, `p_[v]` for trivial-trivial terms
// ---------------------------------------------------------------------------

impl fmt::Display for LpaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let render_edges = |p: &Path| -> String {
            p.edges()
                .iter()
                .map(|e| e.0.as_str())
                .collect::<Vec<_>>()
                .join(".")
        };
        match (self.mu.is_trivial(), self.nu.is_trivial()) {
            (true, true) => write!(f, "p_[{}]", self.mu.source()),
            (false, true) => write!(f, "s_[{}]", render_edges(&self.mu)),
            (true, false) => write!(f, "s*_[{}]", render_edges(&self.nu)),
            (false, false) => write!(
                f,
                "s_[{}]·s*_[{}]",
                render_edges(&self.mu),
                render_edges(&self.nu)
            ),
        }
    }
}

impl fmt::Display for LpaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (i, (t, c)) in self.coeffs.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if !mag.is_one() {
                write!(f, "{mag}·")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Parse an element in the same grammar the renderer emits. Terms are
/// separated by `+`/`-`; each term is an optional rational coefficient
/// followed by `p_[v]`, `s_[ids]`, `s*_[ids]`, or `s_[ids]·s*_[ids]`, edge
/// ids in composition order separated by `.`.
pub fn parse_element(g: &Graph, text: &str) -> Result<LpaElement> {
    let mut out = LpaElement::zero();
    let src = text.trim();
    if src == "0" {
        return Ok(out);
    }
    let bytes: Vec<char> = src.chars().collect();
    let n = bytes.len();
    let mut pos = 0usize;

    let err = |pos: usize, msg: &str| Error::Parse(format!("element, offset {pos}: {msg}"));

    fn skip_ws(bytes: &[char], pos: &mut usize) {
        while *pos < bytes.len() && bytes[*pos].is_whitespace() {
            *pos += 1;
        }
    }
    fn eat(bytes: &[char], pos: &mut usize, lit: &str) -> bool {
        let chars: Vec<char> = lit.chars().collect();
        if *pos + chars.len() <= bytes.len() && bytes[*pos..*pos + chars.len()] == chars[..] {
            *pos += chars.len();
            true
        } else {
            false
        }
    }
    fn read_bracket(bytes: &[char], pos: &mut usize) -> Result<Vec<String>> {
        if !(*pos < bytes.len() && bytes[*pos] == '[') {
            return Err(Error::Parse(format!("element, offset {pos}: expected `[`")));
        }
        *pos += 1;
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos] != ']' {
            *pos += 1;
        }
        if *pos >= bytes.len() {
            return Err(Error::Parse(format!(
                "element, offset {start}: unterminated `[`"
            )));
        }
        let inner: String = bytes[start..*pos].iter().collect();
        *pos += 1;
        Ok(inner.split('.').map(|s| s.trim().to_string()).collect())
    }

    loop {
        skip_ws(&bytes, &mut pos);
        if pos >= n {
            break;
        }
        let mut sign = BigRational::one();
        if bytes[pos] == '+' {
            pos += 1;
        } else if bytes[pos] == '-' {
            sign = -sign;
            pos += 1;
        }
        skip_ws(&bytes, &mut pos);
        // optional coefficient
        if pos < n && bytes[pos].is_ascii_digit() {
            let start = pos;
            while pos < n && (bytes[pos].is_ascii_digit() || bytes[pos] == '/') {
                pos += 1;
            }
            let tok: String = bytes[start..pos].iter().collect();
            let q: BigRational = tok
                .parse()
                .map_err(|_| err(start, "invalid rational coefficient"))?;
            sign *= q;
            skip_ws(&bytes, &mut pos);
            if pos < n && bytes[pos] == '·' {
                pos += 1;
                skip_ws(&bytes, &mut pos);
            }
        }
        // factors
        let (mu, nu);
        if eat(&bytes, &mut pos, "p_") {
            let ids = read_bracket(&bytes, &mut pos)?;
            if ids.len() != 1 {
                return Err(err(pos, "p_[] takes a single vertex"));
            }
            let v = VertexId(ids[0].clone());
            if !g.contains_vertex(&v) {
                return Err(Error::UnknownVertex(v.0));
            }
            mu = Path::trivial(v.clone());
            nu = Path::trivial(v);
        } else if eat(&bytes, &mut pos, "s*_") {
            let ids = read_bracket(&bytes, &mut pos)?;
            let p = Path::from_composition(g, ids.into_iter().map(EdgeId).collect())?;
            mu = Path::trivial(p.source().clone());
            nu = p;
        } else if eat(&bytes, &mut pos, "s_") {
            let ids = read_bracket(&bytes, &mut pos)?;
            let p = Path::from_composition(g, ids.into_iter().map(EdgeId).collect())?;
            skip_ws(&bytes, &mut pos);
            let mut probe = pos;
            if bytes.get(probe) == Some(&'·') {
                probe += 1;
                skip_ws(&bytes, &mut probe);
            }
            if eat(&bytes, &mut probe, "s*_") {
                pos = probe;
                let ids = read_bracket(&bytes, &mut pos)?;
                let q = Path::from_composition(g, ids.into_iter().map(EdgeId).collect())?;
                if p.source() != q.source() {
                    return Err(Error::InvalidPath(
                        "s and s* paths must share a source".into(),
                    ));
                }
                mu = p;
                nu = q;
            } else {
                nu = Path::trivial(p.source().clone());
                mu = p;
            }
        } else {
            return Err(err(pos, "expected p_[…], s_[…], or s*_[…]"));
        }
        out.add_term(LpaTerm::new(g, mu, nu)?, sign);
        skip_ws(&bytes, &mut pos);
        if pos < n && bytes[pos] != '+' && bytes[pos] != '-' {
            return Err(err(pos, "expected `+` or `-` between terms"));
        }
    }
    Ok(out)
}
