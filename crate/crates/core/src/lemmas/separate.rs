//! Order separation of Cartesian-subgroup elements that lie in pairwise
//! non-conjugate cyclic subgroups.
//!
//! Each step picks a fresh prime p, builds a close-edge-free p-graph and,
//! while all targets still have the same order there, enlarges the
//! longest cycle of the first target by copy-and-rewire surgery until the
//! orders split into a top set α and the rest β. The two sides are then
//! separated recursively with primes avoiding everything used so far.

use std::collections::BTreeSet;

use super::boost::boost_component;
use super::declose::{declose_component, RootData};
use super::{
    check_cartesian_targets, derive_seed, graph_orders, primes_of, Component, LemmaConfig, SeparationResult,
};
use crate::arith::fresh_prime;
use crate::error::{Error, Result};
use crate::graph::{CoverGraph, Edge, SurgeryMark, XCycle};
use crate::words::{FreeProduct, NormalForm};

/// Fresh close-edge-free graphs tried for one prime before giving up on it.
const RESEEDS: u64 = 16;

/// A path given by its start vertex and edge labels (factor, element).
#[derive(Clone, Debug, PartialEq, Eq)]
struct Path {
    start: usize,
    labels: Vec<(usize, usize)>,
}

/// Position in the cycle where the path starts, if it lies on the cycle.
fn path_position(cycle: &XCycle, path: &Path) -> Option<usize> {
    let len = cycle.steps.len();
    if path.labels.len() > len {
        return None;
    }
    (0..len).find(|&i| {
        cycle.steps[i].start == path.start
            && path.labels.iter().enumerate().all(|(j, &(f, c))| {
                let e = cycle.steps[(i + j) % len];
                e.factor == f && e.element == c
            })
    })
}

fn maximal_cycles(graph: &CoverGraph, x: &NormalForm) -> Result<Vec<XCycle>> {
    let cycles = graph.x_cycles(x)?;
    let top = cycles.iter().map(|c| c.k).max().unwrap_or(0);
    Ok(cycles.into_iter().filter(|c| c.k == top).collect())
}

/// Splits by order: α = indices of maximal order, β = the rest; None when
/// all orders agree.
fn split_by_order(subset: &[usize], orders: &[u64]) -> Option<(Vec<usize>, Vec<usize>)> {
    let top = *orders.iter().max()?;
    if orders.iter().all(|&o| o == top) {
        return None;
    }
    let (alpha, beta) = subset.iter().zip(orders).partition::<Vec<_>, _>(|&(_, &o)| o == top);
    Some((alpha.into_iter().map(|(&i, _)| i).collect(), beta.into_iter().map(|(&i, _)| i).collect()))
}

struct Separator<'a> {
    fp: &'a FreeProduct,
    data: Vec<RootData>,
    registered: Vec<NormalForm>,
    cfg: &'a LemmaConfig,
    transcript: Vec<String>,
    calls: u64,
}

impl Separator<'_> {
    fn next_seed(&mut self, tag: u64, p: u64) -> u64 {
        self.calls += 1;
        derive_seed(self.cfg.seed, &[tag, p, self.calls])
    }

    fn separate(&mut self, subset: &[usize], pi: &BTreeSet<u64>) -> Result<Vec<Component>> {
        let p = fresh_prime(pi);
        if subset.len() == 1 {
            let seed = self.next_seed(3, p);
            let c = boost_component(self.fp, &self.registered, p, 0, seed, self.cfg)?;
            self.transcript.push(format!("target {}: single boost with p={p}", subset[0]));
            return Ok(vec![c]);
        }
        let (first, alpha, beta) = match self.split(subset, p) {
            Ok(x) => x,
            Err(e) if e.is_retryable() => {
                let mut excluded = pi.clone();
                excluded.insert(p);
                let q = fresh_prime(&excluded);
                self.transcript.push(format!("p={p} failed ({e}); repair round with p={q}"));
                self.split(subset, q)?
            }
            Err(e) => return Err(e),
        };
        self.transcript.push(format!(
            "split {subset:?} with p={}: top {alpha:?}, rest {beta:?}",
            first.prime
        ));
        let mut pi1 = pi.clone();
        pi1.insert(p);
        pi1.insert(first.prime);
        let rest = self.separate(&beta, &pi1)?;
        let mut pi2 = pi1.clone();
        pi2.extend(primes_of(&rest));
        let top = self.separate(&alpha, &pi2)?;
        let mut out = vec![first];
        out.extend(rest);
        out.extend(top);
        Ok(out)
    }

    /// One p-graph on which the subset's orders are not all equal.
    fn split(&mut self, subset: &[usize], p: u64) -> Result<(Component, Vec<usize>, Vec<usize>)> {
        let sub: Vec<RootData> = subset.iter().map(|&i| self.data[i].clone()).collect();
        let targets: Vec<NormalForm> = sub.iter().map(|d| d.u.clone()).collect();
        let mut last = Error::BudgetExceeded(format!("no split found with p = {p}"));
        for round in 0..RESEEDS {
            let seed = self.next_seed(4, p);
            let comp = match declose_component(self.fp, &sub, &self.registered, p, seed, self.cfg) {
                Ok(c) => c,
                Err(e) if e.is_retryable() => {
                    last = e;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let orders = graph_orders(&comp.graph, &targets)?;
            if let Some((alpha, beta)) = split_by_order(subset, &orders) {
                return Ok((comp, alpha, beta));
            }
            match self.equalize(comp, subset, &targets) {
                Ok(x) => return Ok(x),
                Err(e @ (Error::BudgetExceeded(_) | Error::PostconditionFailed(_))) => {
                    self.transcript.push(format!("p={p} round {round}: {e}"));
                    last = e;
                }
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    /// Grows the first target's longest cycle until the orders differ.
    ///
    /// Runs the path-tracking surgeries while they fit the budget and the
    /// tracked path stays on every maximal cycle; otherwise switches to
    /// single γ_p surgeries at a (vertex, factor) touched by the maximal
    /// cycles of some targets but not others.
    fn equalize(
        &mut self,
        comp: Component,
        subset: &[usize],
        targets: &[NormalForm],
    ) -> Result<(Component, Vec<usize>, Vec<usize>)> {
        let p = comp.prime;
        let budget = self.cfg.max_vertices;
        let mut graph = comp.graph;
        let mut path: Option<Path> = None;
        let mut tracking = true;
        for k in 0..self.cfg.max_iterations {
            let stepped = if tracking {
                match self.tracking_step(&graph, &targets[0], path.take())? {
                    Some((g, r)) => {
                        graph = g;
                        path = Some(r);
                        true
                    }
                    None => {
                        self.transcript.push(format!("p={p} step {k}: path surgery over budget, touch steps follow"));
                        tracking = false;
                        false
                    }
                }
            } else {
                false
            };
            if !stepped {
                let mark = touch_mark(&graph, targets)?;
                graph = graph.gamma_surgery(p as usize, &[mark], budget)?;
            }
            let orders = graph_orders(&graph, targets)?;
            if let Some((alpha, beta)) = split_by_order(subset, &orders) {
                let note = format!("separate p={p} after {} surgeries", k + 1);
                return Ok((Component { graph, prime: p, note }, alpha, beta));
            }
            if tracking {
                if let Some(j) = self.path_property_failure(&graph, targets, path.as_ref().expect("path set"))? {
                    self.transcript.push(format!(
                        "p={p} step {k}: a maximal cycle of target {} misses the tracked path, touch steps follow",
                        subset[j]
                    ));
                    tracking = false;
                }
            }
        }
        Err(Error::IterationBudgetExceeded(self.cfg.max_iterations))
    }

    /// One path-tracking surgery: the γ_{n²}∘γ_n pair when no path exists
    /// yet, otherwise γ_n at the end of the edge following the path.
    /// None when the result would exceed the vertex budget.
    fn tracking_step(&self, graph: &CoverGraph, u1: &NormalForm, path: Option<Path>) -> Result<Option<(CoverGraph, Path)>> {
        let budget = self.cfg.max_vertices;
        let n = graph.word_permutation(u1)?.order()? as usize;
        let v = graph.vcount();
        let maximal = maximal_cycles(graph, u1)?;
        match path {
            None => {
                let s_cycle = &maximal[0];
                let (f1, f2) = (s_cycle.steps[0], s_cycle.steps[1]);
                let grown = v.checked_mul(n).and_then(|x| x.checked_mul(n.checked_mul(n)?));
                if grown.is_none_or(|x| x > budget) {
                    return Ok(None);
                }
                let (s, t) = (graph.end(f1), graph.end(f2));
                let d = f1.factor;
                let first = graph.gamma_surgery(n, &[SurgeryMark { vertex: s, factor: d }], budget)?;
                let t2 = CoverGraph::layer_vertex(v, t, 1);
                let second = first.gamma_surgery(n * n, &[SurgeryMark { vertex: t2, factor: 1 - d }], budget)?;
                // t₂ in the first copy keeps its index
                let start = second.act_inverse(t2, f2.factor, f2.element);
                Ok(Some((second, Path { start, labels: vec![(f2.factor, f2.element)] })))
            }
            Some(mut r) => {
                let (cycle, pos) = maximal
                    .iter()
                    .find_map(|c| path_position(c, &r).map(|i| (c, i)))
                    .ok_or_else(|| Error::PostconditionFailed("path left the maximal cycles".into()))?;
                let f: Edge = cycle.steps[(pos + r.labels.len()) % cycle.steps.len()];
                if v.checked_mul(n).is_none_or(|x| x > budget) {
                    return Ok(None);
                }
                let q = graph.end(f);
                let next = graph.gamma_surgery(n, &[SurgeryMark { vertex: q, factor: f.factor }], budget)?;
                r.labels.push((f.factor, f.element));
                Ok(Some((next, r)))
            }
        }
    }

    /// Index of a target with a maximal cycle avoiding the path, when the
    /// path is on some maximal first-target cycle; index 0 when it is not.
    fn path_property_failure(&self, graph: &CoverGraph, targets: &[NormalForm], r: &Path) -> Result<Option<usize>> {
        if !maximal_cycles(graph, &targets[0])?.iter().any(|c| path_position(c, r).is_some()) {
            return Ok(Some(0));
        }
        for (j, u) in targets.iter().enumerate().skip(1) {
            if maximal_cycles(graph, u)?.iter().any(|c| path_position(c, r).is_none()) {
                return Ok(Some(j));
            }
        }
        Ok(None)
    }
}

/// (vertex, factor) pairs that are endpoints of edges on maximal x-cycles.
fn touch_set(graph: &CoverGraph, x: &NormalForm) -> Result<BTreeSet<(usize, usize)>> {
    let mut out = BTreeSet::new();
    for c in maximal_cycles(graph, x)? {
        for e in c.steps {
            out.insert((e.start, e.factor));
            out.insert((graph.end(e), e.factor));
        }
    }
    Ok(out)
}

/// A mark touched by the maximal cycles of some but not all targets, or
/// the least mark touched by the first target when the touch sets agree.
/// On close-edge-free graphs γ_p at the mark multiplies exactly the orders
/// of the touching targets by p.
fn touch_mark(graph: &CoverGraph, targets: &[NormalForm]) -> Result<SurgeryMark> {
    let sets: Vec<BTreeSet<(usize, usize)>> = targets.iter().map(|u| touch_set(graph, u)).collect::<Result<_>>()?;
    let union: BTreeSet<(usize, usize)> = sets.iter().flatten().copied().collect();
    let pick = union
        .iter()
        .find(|x| sets.iter().any(|s| !s.contains(x)))
        .or_else(|| sets[0].iter().next())
        .copied()
        .ok_or_else(|| Error::Internal("no maximal cycle to mark".into()))?;
    Ok(SurgeryMark { vertex: pick.0, factor: pick.1 })
}

/// Finite permutation representation in which the targets get pairwise
/// distinct orders, all coprime to every prime in `pi`.
pub fn lemma3_separate(
    fp: &FreeProduct,
    targets: &[NormalForm],
    pi: &BTreeSet<u64>,
    cfg: &LemmaConfig,
) -> Result<SeparationResult> {
    lemma3_with_registered(fp, targets, &[], pi, cfg)
}

/// As [`lemma3_separate`], additionally making every `extra` element act
/// as a nontrivial prime-power element in each component.
pub(crate) fn lemma3_with_registered(
    fp: &FreeProduct,
    targets: &[NormalForm],
    extra: &[NormalForm],
    pi: &BTreeSet<u64>,
    cfg: &LemmaConfig,
) -> Result<SeparationResult> {
    let data: Vec<RootData> = targets.iter().map(|u| RootData::new(fp, u)).collect::<Result<_>>()?;
    for i in 0..data.len() {
        for j in i + 1..data.len() {
            if fp.is_conjugate(&data[i].root, &data[j].root, true)? {
                return Err(Error::Precondition(format!(
                    "targets {i} and {j} lie in conjugate cyclic subgroups; separate them as powers instead"
                )));
            }
        }
    }
    let mut registered = targets.to_vec();
    registered.extend_from_slice(extra);
    check_cartesian_targets(fp, &registered)?;
    let mut sep = Separator { fp, data, registered, cfg, transcript: Vec::new(), calls: 0 };
    let subset: Vec<usize> = (0..targets.len()).collect();
    let components = sep.separate(&subset, pi)?;
    let result = SeparationResult::new(components, targets, sep.transcript)?;
    for (i, &o) in result.orders.iter().enumerate() {
        if let Some(p) = pi.iter().find(|&&p| o % p == 0) {
            return Err(Error::PostconditionFailed(format!("order {o} of target {i} is divisible by {p}")));
        }
        if let Some(j) = (0..i).find(|&j| result.orders[j] == o) {
            return Err(Error::PostconditionFailed(format!("targets {j} and {i} share order {o}")));
        }
    }
    Ok(result)
}
