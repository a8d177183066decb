//! Graphs on which the cycles of given elements have no close edges.
//!
//! For u = u′^m with u′ = y₁…yₙ primitive, every pair of edges in a
//! u′-cycle that start in the same factor orbit yields an element
//! χ = (y₁…y_ν)·z·(y_μ…yₙ) lying in ⟨u′⟩ at some vertex. A component in
//! which no χ maps any vertex into its own ⟨u′⟩-orbit therefore has
//! close-edge-free u′- and u-cycles.

use std::collections::{BTreeSet, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::boost::{induced, random_assignment, rewrite_all};
use super::fibre::FibreGroup;
use super::{check_cartesian_targets, check_prime_power_orders, derive_seed, Component, LemmaConfig, SeparationResult};
use crate::error::{Error, Result};
use crate::graph::{CoverGraph, SurgeryMark};
use crate::words::{FreeProduct, NormalForm, Syllable};

/// Random fibre assignments tried with one copy of the base p-group;
/// each further direct factor gets a quarter as many.
const FIRST_LEVEL_ATTEMPTS: usize = 64;

/// A Cartesian-subgroup element u = root^m where root is not a proper
/// power and m is the least power of root landing in C.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootData {
    pub u: NormalForm,
    pub root: NormalForm,
    pub m: u64,
}

impl RootData {
    pub fn new(fp: &FreeProduct, u: &NormalForm) -> Result<Self> {
        if u.is_identity() {
            return Err(Error::TrivialTarget);
        }
        if !u.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced);
        }
        if u.is_factor_element() {
            return Err(Error::FactorElement);
        }
        if !fp.in_cartesian(u)? {
            return Err(Error::NotInCartesian);
        }
        let (root, m) = fp.primitive_root(u)?;
        let least = fp.minimal_cartesian_power(&root)?;
        if least != m {
            return Err(Error::Precondition(format!(
                "u is the {m}-th power of its root but already the {least}-th power lies in the cartesian subgroup"
            )));
        }
        Ok(RootData { u: u.clone(), root, m })
    }
}

/// One admissible (z, μ, ν) with its element χ = ν′·z·μ′.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chi {
    pub z: Option<Syllable>,
    pub mu: usize,
    pub nu: usize,
    pub chi: NormalForm,
}

/// All admissible χ for a primitive root, deduplicated, without those
/// that already lie in ⟨root⟩ as group elements.
pub fn admissible_chis(fp: &FreeProduct, root: &NormalForm) -> Result<Vec<Chi>> {
    let (a, b) = fp.finite_groups()?;
    let y = root.syllables();
    let n = y.len();
    let mut zs: Vec<Option<Syllable>> = vec![None];
    zs.extend((1..a.order()).map(|c| Some(Syllable::new(0, c as i64))));
    zs.extend((1..b.order()).map(|c| Some(Syllable::new(1, c as i64))));
    let mut powers = HashSet::new();
    for l in -2..=2i64 {
        powers.insert(fp.pow(root, l)?);
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for z in zs {
        for mu in 1..=n {
            for nu in 1..=n {
                if z.is_none() && (mu == nu + 1 || nu as i64 - mu as i64 >= n as i64 - 1) {
                    continue;
                }
                let mut raw: Vec<Syllable> = Vec::new();
                if nu < n {
                    raw.extend_from_slice(&y[..nu]);
                }
                raw.extend(z);
                if mu > 1 {
                    raw.extend_from_slice(&y[mu - 1..]);
                }
                let chi = fp.normalize(&raw)?;
                if powers.contains(&chi) || !seen.insert(chi.clone()) {
                    continue;
                }
                out.push(Chi { z, mu, nu, chi });
            }
        }
    }
    Ok(out)
}

/// Orbit id of every vertex under a permutation.
fn orbit_ids(perm: &crate::group::Permutation) -> Vec<usize> {
    let mut id = vec![usize::MAX; perm.degree()];
    let mut next = 0;
    for v in 0..perm.degree() {
        if id[v] != usize::MAX {
            continue;
        }
        let mut x = v;
        while id[x] == usize::MAX {
            id[x] = next;
            x = perm.apply(x);
        }
        next += 1;
    }
    id
}

#[derive(Debug)]
enum Defect {
    /// Vertices r with r·χ in the ⟨root⟩-orbit of r.
    Chi { target: usize, chi: usize, bad: Vec<usize> },
    Other(String),
}

fn find_defect(graph: &CoverGraph, data: &[RootData], chis: &[Vec<Chi>]) -> Result<Option<Defect>> {
    for (t, d) in data.iter().enumerate() {
        let ids = orbit_ids(&graph.word_permutation(&d.root)?);
        for (c, chi) in chis[t].iter().enumerate() {
            let perm = graph.word_permutation(&chi.chi)?;
            let bad: Vec<usize> = (0..graph.vcount()).filter(|&r| ids[perm.apply(r)] == ids[r]).collect();
            if !bad.is_empty() {
                return Ok(Some(Defect::Chi { target: t, chi: c, bad }));
            }
        }
    }
    for (t, d) in data.iter().enumerate() {
        for (name, x) in [("u", &d.u), ("root", &d.root)] {
            if let Some(c) = graph.x_cycle_summary(x)?.iter().find(|c| c.close_edges) {
                return Ok(Some(Defect::Other(format!(
                    "target {t}: {name}-cycle at vertex {} has close edges",
                    c.base
                ))));
            }
        }
        let ou = graph.word_permutation(&d.u)?.order()?;
        let or = graph.word_permutation(&d.root)?.order()?;
        if or != ou.checked_mul(d.m).unwrap_or(0) {
            return Ok(Some(Defect::Other(format!("target {t}: root order {or} ≠ {} · {ou}", d.m))));
        }
    }
    Ok(None)
}

/// The two marks of the copy-and-rewire step for one bad vertex r, with
/// D the factor of the last root syllable.
fn marks_for(graph: &CoverGraph, root: &NormalForm, chi: &NormalForm, r: usize) -> [SurgeryMark; 2] {
    let y1 = root.first().expect("hyperbolic root");
    let yn = root.last().expect("hyperbolic root");
    let d = yn.factor;
    let x1 = chi.first().expect("nontrivial chi");
    if x1.factor != d {
        let after = graph.act(r, y1.factor, y1.value as usize);
        [SurgeryMark { vertex: r, factor: d }, SurgeryMark { vertex: after, factor: d }]
    } else {
        let before = graph.act_inverse(r, d, yn.value as usize);
        [SurgeryMark { vertex: r, factor: 1 - d }, SurgeryMark { vertex: before, factor: 1 - d }]
    }
}

/// Marks for every bad vertex, dropping those whose factor orbit is
/// already marked.
fn collect_marks(graph: &CoverGraph, root: &NormalForm, chi: &NormalForm, bad: &[usize]) -> Vec<SurgeryMark> {
    let orbits = [graph.factor_orbits(0), graph.factor_orbits(1)];
    let mut used = BTreeSet::new();
    let mut out = Vec::new();
    for &r in bad {
        for mark in marks_for(graph, root, chi, r) {
            if used.insert((mark.factor, orbits[mark.factor][mark.vertex])) {
                out.push(mark);
            }
        }
    }
    out
}

/// Searches a regular-fibre component on which every u ∈ `data` has
/// close-edge-free cycles; `registered` (a superset of the u's) all act
/// as nontrivial p-elements.
pub(crate) fn declose_component(
    fp: &FreeProduct,
    data: &[RootData],
    registered: &[NormalForm],
    p: u64,
    seed: u64,
    cfg: &LemmaConfig,
) -> Result<Component> {
    check_cartesian_targets(fp, registered)?;
    let (a, b) = fp.finite_groups()?;
    let cosets = a.order() * b.order();
    let chis: Vec<Vec<Chi>> = data.iter().map(|d| admissible_chis(fp, &d.root)).collect::<Result<_>>()?;
    let basis = fp.cartesian_basis()?;
    let words = rewrite_all(fp, &basis, registered)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fallback: Option<(CoverGraph, String)> = None;
    let mut last_defect = String::from("no candidate with nontrivial images");
    for copies in 1.. {
        let fibre = match FibreGroup::regular(p, copies, cfg.max_vertices / cosets) {
            Ok(f) => f,
            Err(Error::BudgetExceeded(_)) => break,
            Err(e) => return Err(e),
        };
        let attempts = (FIRST_LEVEL_ATTEMPTS >> (2 * (copies - 1))).max(4);
        for attempt in 0..attempts {
            let Some(psi) = random_assignment(&fibre, basis.rank, &words, 1, &mut rng)? else {
                continue;
            };
            let graph = induced(a, b, &fibre, &psi, cfg.max_vertices)?;
            let note = format!("declose p={p} fibre={} attempt={attempt}", fibre.label);
            match find_defect(&graph, data, &chis)? {
                None => return finish(graph, p, note, registered),
                Some(d) => last_defect = format!("{d:?}"),
            }
            if fallback.is_none() {
                fallback = Some((graph, note));
            }
        }
    }
    // surgery on the first candidate
    if let Some((mut graph, note)) = fallback {
        for step in 0..cfg.max_iterations {
            match find_defect(&graph, data, &chis)? {
                None => return finish(graph, p, format!("{note} surgeries={step}"), registered),
                Some(Defect::Chi { target, chi, bad }) => {
                    let marks = collect_marks(&graph, &data[target].root, &chis[target][chi].chi, &bad);
                    match graph.gamma_surgery(p as usize, &marks, cfg.max_vertices) {
                        Ok(g) => graph = g,
                        Err(Error::BudgetExceeded(_)) => break,
                        Err(e) => return Err(e),
                    }
                }
                Some(Defect::Other(msg)) => {
                    last_defect = msg;
                    break;
                }
            }
        }
    }
    Err(Error::PostconditionFailed(format!("no close-edge-free component for p = {p}: {last_defect}")))
}

fn finish(graph: CoverGraph, p: u64, note: String, registered: &[NormalForm]) -> Result<Component> {
    let component = Component { graph, prime: p, note };
    check_prime_power_orders(&component, registered)?;
    Ok(component)
}

/// Builds a p-graph on which all cycles of every u ∈ S (and of its
/// primitive root) have no close edges, every u acts as a nontrivial
/// p-element, and |root| = m·|u|.
pub fn lemma2_declose(fp: &FreeProduct, s: &[NormalForm], p: u64, cfg: &LemmaConfig) -> Result<SeparationResult> {
    if !crate::arith::is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let data: Vec<RootData> = s.iter().map(|u| RootData::new(fp, u)).collect::<Result<_>>()?;
    let mut transcript = Vec::new();
    let mut failure = None;
    for round in 0..2u64 {
        match declose_component(fp, &data, s, p, derive_seed(cfg.seed, &[2, p, round]), cfg) {
            Ok(c) => {
                transcript.push(format!("{} ({} vertices)", c.note, c.graph.vcount()));
                return SeparationResult::new(vec![c], s, transcript);
            }
            Err(e) if e.is_retryable() => {
                transcript.push(format!("round {round}: {e}"));
                failure = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(failure.expect("at least one round ran"))
}
