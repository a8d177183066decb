//! Labelled graphs on which each factor acts freely ("cover graphs"):
//! construction, validation, x-cycles, surgery, products, induced graphs
//! and export.
//!
//! A graph stores, for each factor and each nonidentity element `c`, the
//! permutation `v ↦ v·c` of the vertex set. Edges are implied: the edge
//! labelled `c` out of `v` ends at `v·c`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Permutation};
use crate::words::{FreeProduct, NormalForm};

/// Largest graph written out in full as DOT.
pub const DOT_VERTEX_CAP: usize = 5_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverGraph {
    vcount: usize,
    factors: [FiniteGroup; 2],
    /// `action[f][v][c - 1]` is the end of the `c`-edge out of `v`.
    action: [Vec<Vec<usize>>; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    provenance: Vec<String>,
}

/// One directed edge: start vertex plus label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub start: usize,
    pub factor: usize,
    pub element: usize,
}

/// A closed path spelling x^k with k minimal at its base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XCycle {
    pub base: usize,
    pub k: usize,
    pub steps: Vec<Edge>,
    pub close_edges: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SurgeryMark {
    pub vertex: usize,
    pub factor: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    /// (violated invariant, witness vertex)
    pub violation: Option<(String, usize)>,
}

impl ValidationReport {
    fn fail(what: &str, vertex: usize) -> Self {
        ValidationReport { pass: false, violation: Some((what.to_string(), vertex)) }
    }
}

impl CoverGraph {
    /// Builds a graph from raw action arrays without validating it.
    pub fn from_parts(factors: [FiniteGroup; 2], action: [Vec<Vec<usize>>; 2]) -> Result<Self> {
        let vcount = action[0].len();
        for f in 0..2 {
            if action[f].len() != vcount {
                return Err(Error::Parse("action arrays disagree on the vertex count".into()));
            }
            for row in &action[f] {
                if row.len() + 1 != factors[f].order() || row.iter().any(|&x| x >= vcount) {
                    return Err(Error::Parse(format!("malformed action row for factor {f}")));
                }
            }
        }
        Ok(CoverGraph { vcount, factors, action, provenance: Vec::new() })
    }

    /// The regular action of A×B: vertex (a, b) has index a·|B| + b.
    pub fn cayley_base(a: &FiniteGroup, b: &FiniteGroup, budget: usize) -> Result<Self> {
        let (na, nb) = (a.order(), b.order());
        let vcount = na * nb;
        if vcount > budget {
            return Err(Error::BudgetExceeded(format!("cayley base with {vcount} vertices")));
        }
        let act0 = (0..vcount).map(|v| (1..na).map(|c| a.mul(v / nb, c) * nb + v % nb).collect()).collect();
        let act1 = (0..vcount).map(|v| (1..nb).map(|c| (v / nb) * nb + b.mul(v % nb, c)).collect()).collect();
        Ok(CoverGraph {
            vcount,
            factors: [a.clone(), b.clone()],
            action: [act0, act1],
            provenance: vec!["base".into()],
        })
    }

    pub fn vcount(&self) -> usize {
        self.vcount
    }

    pub fn factors(&self) -> &[FiniteGroup; 2] {
        &self.factors
    }

    pub fn free_product(&self) -> FreeProduct {
        FreeProduct::finite(self.factors[0].clone(), self.factors[1].clone())
    }

    /// Raw action arrays, `action[f][v][c - 1]`.
    pub fn raw_action(&self) -> &[Vec<Vec<usize>>; 2] {
        &self.action
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn edge_count(&self) -> usize {
        self.vcount * (self.factors[0].order() - 1 + self.factors[1].order() - 1)
    }

    /// v·c for a factor element (identity fixes every vertex).
    #[inline]
    pub fn act(&self, v: usize, factor: usize, c: usize) -> usize {
        if c == 0 {
            v
        } else {
            self.action[factor][v][c - 1]
        }
    }

    /// Start of the `c`-edge ending at `v`.
    pub fn act_inverse(&self, v: usize, factor: usize, c: usize) -> usize {
        self.act(v, factor, self.factors[factor].inv(c))
    }

    pub fn end(&self, e: Edge) -> usize {
        self.act(e.start, e.factor, e.element)
    }

    /// Checks label bijectivity, freeness of each factor and consistency
    /// with the factor multiplication; stops at the first violation.
    pub fn validate(&self) -> ValidationReport {
        for f in 0..2 {
            for v in 0..self.vcount {
                if self.action[f][v].contains(&v) {
                    return ValidationReport::fail("freeness", v);
                }
            }
        }
        for f in 0..2 {
            for c in 1..self.factors[f].order() {
                let mut seen = vec![false; self.vcount];
                for v in 0..self.vcount {
                    let w = self.act(v, f, c);
                    if std::mem::replace(&mut seen[w], true) {
                        return ValidationReport::fail("bijectivity", w);
                    }
                }
            }
        }
        for f in 0..2 {
            let g = &self.factors[f];
            for v in 0..self.vcount {
                for c in 1..g.order() {
                    let w = self.act(v, f, c);
                    for d in 1..g.order() {
                        if self.act(w, f, d) != self.act(v, f, g.mul(c, d)) {
                            return ValidationReport::fail("group law", v);
                        }
                    }
                }
            }
        }
        ValidationReport { pass: true, violation: None }
    }

    fn check_word(&self, w: &NormalForm) -> Result<()> {
        for s in w.syllables() {
            if s.factor > 1 || s.value < 0 || s.value as usize >= self.factors[s.factor].order() {
                return Err(Error::BadSyllable(format!("{s:?} does not fit the graph's factors")));
            }
        }
        Ok(())
    }

    /// The permutation v ↦ v·w.
    pub fn word_permutation(&self, w: &NormalForm) -> Result<Permutation> {
        self.check_word(w)?;
        let map = (0..self.vcount)
            .map(|v| w.syllables().iter().fold(v, |x, s| self.act(x, s.factor, s.value as usize)))
            .collect();
        Permutation::from_vec(map)
    }

    /// Orbit id of every vertex under one factor.
    pub fn factor_orbits(&self, factor: usize) -> Vec<usize> {
        let mut id = vec![usize::MAX; self.vcount];
        let mut next = 0;
        for v in 0..self.vcount {
            if id[v] != usize::MAX {
                continue;
            }
            id[v] = next;
            for c in 1..self.factors[factor].order() {
                id[self.act(v, factor, c)] = next;
            }
            next += 1;
        }
        id
    }

    fn check_cycle_word(&self, x: &NormalForm) -> Result<()> {
        self.check_word(x)?;
        if x.is_factor_element() {
            return Err(Error::FactorElement);
        }
        if !x.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced);
        }
        Ok(())
    }

    /// All x-cycles, one per orbit of ⟨x⟩, based at the orbit minimum.
    pub fn x_cycles(&self, x: &NormalForm) -> Result<Vec<XCycle>> {
        self.x_cycles_impl(x, true)
    }

    /// Like [`x_cycles`](Self::x_cycles) but without recording steps.
    pub fn x_cycle_summary(&self, x: &NormalForm) -> Result<Vec<XCycle>> {
        self.x_cycles_impl(x, false)
    }

    fn x_cycles_impl(&self, x: &NormalForm, keep_steps: bool) -> Result<Vec<XCycle>> {
        self.check_cycle_word(x)?;
        let perm = self.word_permutation(x)?;
        let orbits = [self.factor_orbits(0), self.factor_orbits(1)];
        let mut seen = vec![false; self.vcount];
        let mut out = Vec::new();
        let mut keys: HashMap<(usize, usize), ()> = HashMap::new();
        for base in 0..self.vcount {
            if seen[base] {
                continue;
            }
            let mut k = 0;
            let mut v = base;
            while !seen[v] {
                seen[v] = true;
                v = perm.apply(v);
                k += 1;
            }
            keys.clear();
            let mut close = false;
            let mut steps = Vec::new();
            let mut v = base;
            for _ in 0..k {
                for s in x.syllables() {
                    let e = Edge { start: v, factor: s.factor, element: s.value as usize };
                    if keys.insert((s.factor, orbits[s.factor][v]), ()).is_some() {
                        close = true;
                    }
                    if keep_steps {
                        steps.push(e);
                    }
                    v = self.end(e);
                }
            }
            out.push(XCycle { base, k, steps, close_edges: close });
        }
        Ok(out)
    }

    /// True when no x-cycle has close edges.
    pub fn close_edge_free(&self, x: &NormalForm) -> Result<bool> {
        Ok(self.x_cycle_summary(x)?.iter().all(|c| !c.close_edges))
    }

    /// The t-fold copy-and-rewire construction. Vertex (v, layer i) gets
    /// index i·|V| + v. For a mark (p, K) and c ∈ K∖1, the c-edge out of
    /// p in layer i ends in layer i+1, and the c-edge into p in layer i
    /// starts in layer i+1.
    pub fn gamma_surgery(&self, t: usize, marks: &[SurgeryMark], budget: usize) -> Result<CoverGraph> {
        if t == 0 {
            return Err(Error::Precondition("surgery needs t ≥ 1".into()));
        }
        let n = self.vcount;
        let total = n.checked_mul(t).filter(|&x| x <= budget).ok_or_else(|| {
            Error::BudgetExceeded(format!("surgery of {n} vertices with t = {t} over budget {budget}"))
        })?;
        let mut marked = [vec![false; n], vec![false; n]];
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        let orbits = [self.factor_orbits(0), self.factor_orbits(1)];
        for m in marks {
            if m.factor > 1 || m.vertex >= n {
                return Err(Error::Precondition(format!("bad mark {m:?}")));
            }
            if !used.insert((m.factor, orbits[m.factor][m.vertex])) {
                return Err(Error::ConflictingMarks(format!(
                    "two marks in the factor-{} orbit of vertex {}",
                    m.factor, m.vertex
                )));
            }
            marked[m.factor][m.vertex] = true;
        }
        let mut action: [Vec<Vec<usize>>; 2] = [Vec::with_capacity(total), Vec::with_capacity(total)];
        for f in 0..2 {
            for layer in 0..t {
                for v in 0..n {
                    let row = self.action[f][v]
                        .iter()
                        .map(|&w| {
                            // shift = [v marked] − [w marked]
                            let shift = t + usize::from(marked[f][v]) - usize::from(marked[f][w]);
                            ((layer + shift) % t) * n + w
                        })
                        .collect();
                    action[f].push(row);
                }
            }
        }
        let mut provenance = self.provenance.clone();
        provenance.push(format!(
            "surgery t={t} marks=[{}]",
            marks.iter().map(|m| format!("{}:{}", m.vertex, m.factor)).collect::<Vec<_>>().join(",")
        ));
        Ok(CoverGraph { vcount: total, factors: self.factors.clone(), action, provenance })
    }

    /// Index of vertex v of the original graph in the given layer of a
    /// surgery output.
    pub fn layer_vertex(original_vcount: usize, v: usize, layer: usize) -> usize {
        layer * original_vcount + v
    }

    /// Diagonal action on vertex pairs. Keeps the full product when it fits
    /// the budget, otherwise the component of `bases`.
    pub fn synchronized_product(&self, other: &CoverGraph, bases: (usize, usize), budget: usize) -> Result<CoverGraph> {
        if self.factors != other.factors {
            return Err(Error::Precondition("product of graphs over different factors".into()));
        }
        let (n1, n2) = (self.vcount, other.vcount);
        let mut provenance = vec![format!("product of ({} | {})", self.provenance.join(" > "), other.provenance.join(" > "))];
        if let Some(total) = n1.checked_mul(n2).filter(|&x| x <= budget) {
            let mut action: [Vec<Vec<usize>>; 2] = [Vec::with_capacity(total), Vec::with_capacity(total)];
            for f in 0..2 {
                for v in 0..total {
                    let (v1, v2) = (v / n2, v % n2);
                    let row = self.action[f][v1]
                        .iter()
                        .zip(&other.action[f][v2])
                        .map(|(&w1, &w2)| w1 * n2 + w2)
                        .collect();
                    action[f].push(row);
                }
            }
            return Ok(CoverGraph { vcount: total, factors: self.factors.clone(), action, provenance });
        }
        // basepoint component by breadth-first search
        let mut index: HashMap<(usize, usize), usize> = HashMap::from([(bases, 0)]);
        let mut order = vec![bases];
        let mut head = 0;
        while head < order.len() {
            let (v1, v2) = order[head];
            head += 1;
            for f in 0..2 {
                for (&w1, &w2) in self.action[f][v1].iter().zip(&other.action[f][v2]) {
                    if let std::collections::hash_map::Entry::Vacant(e) = index.entry((w1, w2)) {
                        if order.len() >= budget {
                            return Err(Error::BudgetExceeded(format!("product component over {budget} vertices")));
                        }
                        e.insert(order.len());
                        order.push((w1, w2));
                    }
                }
            }
        }
        let mut action: [Vec<Vec<usize>>; 2] = [Vec::new(), Vec::new()];
        for f in 0..2 {
            action[f] = order
                .iter()
                .map(|&(v1, v2)| {
                    self.action[f][v1].iter().zip(&other.action[f][v2]).map(|(&a, &b)| index[&(a, b)]).collect()
                })
                .collect();
        }
        provenance[0].push_str(" [component]");
        Ok(CoverGraph { vcount: order.len(), factors: self.factors.clone(), action, provenance })
    }

    /// Action of A*B on (A×B) × Y induced from an action of the Cartesian
    /// subgroup on Y, given by one permutation of Y per commutator basis
    /// element. Vertex (a, b, y) has index (a·|B| + b)·|Y| + y.
    ///
    /// A factor-0 step (x, b, y) → (x·c, b, y·g(x,b)·g(x·c,b)⁻¹) where
    /// g(x,b) is the image of the commutator (x, b) (identity when x or b
    /// is 1); factor-1 steps leave y alone. An element w of C then acts on
    /// the fibre over the base coset by its image under the extension of ψ.
    pub fn induced_graph(a: &FiniteGroup, b: &FiniteGroup, psi: &[Permutation], budget: usize) -> Result<CoverGraph> {
        let (na, nb) = (a.order(), b.order());
        if psi.len() != (na - 1) * (nb - 1) {
            return Err(Error::Precondition(format!(
                "need {} basis images, got {}",
                (na - 1) * (nb - 1),
                psi.len()
            )));
        }
        let y = psi.first().map_or(1, Permutation::degree);
        if psi.iter().any(|g| g.degree() != y) {
            return Err(Error::Precondition("basis images of different degrees".into()));
        }
        let vcount = na
            .checked_mul(nb)
            .and_then(|x| x.checked_mul(y))
            .filter(|&x| x <= budget)
            .ok_or_else(|| Error::BudgetExceeded(format!("induced graph {na}·{nb}·{y} over budget {budget}")))?;
        let id = Permutation::identity(y);
        let gauge = |x: usize, bb: usize| -> &Permutation {
            if x == 0 || bb == 0 {
                &id
            } else {
                &psi[(x - 1) * (nb - 1) + (bb - 1)]
            }
        };
        let inverses: Vec<Permutation> = psi.iter().map(Permutation::inverse).collect();
        let gauge_inv = |x: usize, bb: usize| -> &Permutation {
            if x == 0 || bb == 0 {
                &id
            } else {
                &inverses[(x - 1) * (nb - 1) + (bb - 1)]
            }
        };
        let mut act0 = vec![Vec::with_capacity(na - 1); vcount];
        let mut act1 = vec![Vec::with_capacity(nb - 1); vcount];
        for x in 0..na {
            for bb in 0..nb {
                let coset = x * nb + bb;
                for c in 1..na {
                    let xc = a.mul(x, c);
                    let step = gauge(x, bb).then(gauge_inv(xc, bb));
                    for yy in 0..y {
                        act0[coset * y + yy].push((xc * nb + bb) * y + step.apply(yy));
                    }
                }
                for c in 1..nb {
                    let target = x * nb + b.mul(bb, c);
                    for yy in 0..y {
                        act1[coset * y + yy].push(target * y + yy);
                    }
                }
            }
        }
        Ok(CoverGraph {
            vcount,
            factors: [a.clone(), b.clone()],
            action: [act0, act1],
            provenance: vec![format!("induced fibre={y}")],
        })
    }

    pub fn push_provenance(&mut self, note: impl Into<String>) {
        self.provenance.push(note.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: CoverGraph = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut checked = CoverGraph::from_parts(g.factors, g.action)?;
        if checked.vcount != g.vcount {
            return Err(Error::Parse("vcount disagrees with the action arrays".into()));
        }
        checked.provenance = g.provenance;
        Ok(checked)
    }

    /// DOT digraph with edge labels `f<factor>:<element>`; graphs above
    /// the cap become a one-node summary.
    pub fn to_dot(&self, cap: usize) -> String {
        let mut s = String::from("digraph cover {\n");
        if self.vcount > cap {
            let _ = writeln!(
                s,
                "  summary [shape=box, label=\"{} vertices, {} edges (over the {} vertex cap)\"];",
                self.vcount,
                self.edge_count(),
                cap
            );
            s.push_str("}\n");
            return s;
        }
        for v in 0..self.vcount {
            let _ = writeln!(s, "  v{v};");
        }
        for f in 0..2 {
            for v in 0..self.vcount {
                for (i, &w) in self.action[f][v].iter().enumerate() {
                    let _ = writeln!(s, "  v{v} -> v{w} [label=\"f{f}:{}\"];", i + 1);
                }
            }
        }
        s.push_str("}\n");
        s
    }

    /// Copy with one action entry overwritten; used to build defective
    /// graphs in tests.
    pub fn with_redirected_edge(&self, factor: usize, v: usize, c: usize, target: usize) -> CoverGraph {
        let mut g = self.clone();
        g.action[factor][v][c - 1] = target;
        g
    }
}
