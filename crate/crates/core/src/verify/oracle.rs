//! Exhaustive search for a small permutation representation separating
//! the target orders.
//!
//! Factor 0 acts through one representative per conjugacy class of
//! actions (multisets of transitive coset actions); factor 1 runs over
//! every homomorphism into Sym(d), built from generator images subject to
//! the factor relations. Conjugating both sides simultaneously does not
//! change orders, so this covers every homomorphism up to conjugacy.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Permutation};
use crate::pipeline::Instance;

/// Largest degree accepted.
pub const ORACLE_MAX_DEGREE: usize = 12;
/// Representation pairs examined before giving up.
const PAIR_BUDGET: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub found: bool,
    /// Degree of the witness, or the largest degree searched.
    pub degree: usize,
    /// Images of every element of each factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub images: Option<[Vec<Permutation>; 2]>,
    pub orders: Vec<u64>,
}

/// An action given as the image of every group element.
type Action = Vec<Vec<usize>>;

pub fn brute_force_search(inst: &Instance, max_degree: usize) -> Result<OracleResult> {
    let fp = inst.free_product();
    let (a, b) = fp.finite_groups()?;
    if inst.targets.len() > 3 {
        return Err(Error::Precondition("the oracle takes at most 3 targets".into()));
    }
    if max_degree > ORACLE_MAX_DEGREE {
        return Err(Error::Precondition(format!("degree bound {max_degree} exceeds {ORACLE_MAX_DEGREE}")));
    }
    let words: Vec<Vec<(usize, usize)>> = inst
        .targets
        .iter()
        .map(|t| fp.normalize(t.syllables()).map(|w| w.syllables().iter().map(|s| (s.factor, s.value as usize)).collect()))
        .collect::<Result<_>>()?;
    let coset_types = coset_actions(a);
    let gens_b = generators(b);
    let mut pairs = 0u64;
    for d in 1..=max_degree {
        let reps = actions_up_to_conjugacy(&coset_types, d);
        let homs = all_homs(b, &gens_b, d);
        for ra in &reps {
            for hb in &homs {
                pairs += 1;
                if pairs > PAIR_BUDGET {
                    return Err(Error::BudgetExceeded(format!("oracle examined {PAIR_BUDGET} pairs")));
                }
                let orders: Vec<u64> = words.iter().map(|w| word_order(w, [ra, hb], d)).collect();
                let distinct: BTreeSet<u64> = orders.iter().copied().collect();
                if distinct.len() == orders.len() {
                    let images = [to_perms(ra), to_perms(hb)];
                    return Ok(OracleResult { found: true, degree: d, images: Some(images), orders });
                }
            }
        }
    }
    Ok(OracleResult { found: false, degree: max_degree, images: None, orders: Vec::new() })
}

fn to_perms(a: &Action) -> Vec<Permutation> {
    a.iter().map(|m| Permutation::from_vec(m.clone()).expect("actions are bijective")).collect()
}

fn word_order(word: &[(usize, usize)], actions: [&Action; 2], d: usize) -> u64 {
    let image: Vec<usize> =
        (0..d).map(|x| word.iter().fold(x, |y, &(f, c)| actions[f][c][y])).collect();
    Permutation::from_vec(image).and_then(|p| p.order()).unwrap_or(0)
}

/// All subgroups, as closures grown one element at a time.
fn subgroups(g: &FiniteGroup) -> Vec<BTreeSet<usize>> {
    let mut found: BTreeSet<BTreeSet<usize>> = BTreeSet::from([BTreeSet::from([0])]);
    let mut frontier = vec![BTreeSet::from([0])];
    while let Some(h) = frontier.pop() {
        for x in 0..g.order() {
            if h.contains(&x) {
                continue;
            }
            let mut gens = h.clone();
            gens.insert(x);
            let k = g.closure(&gens);
            if found.insert(k.clone()) {
                frontier.push(k);
            }
        }
    }
    found.into_iter().collect()
}

/// Right action on the right cosets of each subgroup, one subgroup per
/// conjugacy class, as (degree, action).
fn coset_actions(g: &FiniteGroup) -> Vec<(usize, Action)> {
    let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for h in subgroups(g) {
        let class: Vec<BTreeSet<usize>> =
            (0..g.order()).map(|x| h.iter().map(|&y| g.conjugate(y, x)).collect()).collect();
        if class.iter().any(|c| seen.contains(c)) {
            continue;
        }
        seen.extend(class);
        let mut coset_of = vec![usize::MAX; g.order()];
        let mut reps = Vec::new();
        for x in 0..g.order() {
            if coset_of[x] == usize::MAX {
                for &y in &h {
                    coset_of[g.mul(y, x)] = reps.len();
                }
                reps.push(x);
            }
        }
        let action = (0..g.order()).map(|c| reps.iter().map(|&r| coset_of[g.mul(r, c)]).collect()).collect();
        out.push((reps.len(), action));
    }
    out.sort_by_key(|(d, _)| *d);
    out
}

/// Disjoint unions of transitive actions with total degree d, one per
/// multiset of coset types.
fn actions_up_to_conjugacy(types: &[(usize, Action)], d: usize) -> Vec<Action> {
    fn rec(types: &[(usize, Action)], start: usize, left: usize, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(chosen.clone());
            return;
        }
        for t in start..types.len() {
            if types[t].0 <= left {
                chosen.push(t);
                rec(types, t, left - types[t].0, chosen, out);
                chosen.pop();
            }
        }
    }
    let mut combos = Vec::new();
    rec(types, 0, d, &mut Vec::new(), &mut combos);
    let n = types.first().map_or(0, |t| t.1.len());
    combos
        .into_iter()
        .map(|combo| {
            (0..n)
                .map(|c| {
                    let mut m = Vec::with_capacity(d);
                    for &t in &combo {
                        let off = m.len();
                        m.extend(types[t].1[c].iter().map(|&x| x + off));
                    }
                    m
                })
                .collect()
        })
        .collect()
}

/// A generating set grown greedily from the smallest missing element.
fn generators(g: &FiniteGroup) -> Vec<usize> {
    let mut gens = BTreeSet::new();
    let mut span = BTreeSet::from([0]);
    while span.len() < g.order() {
        let x = (0..g.order()).find(|x| !span.contains(x)).expect("span is proper");
        gens.insert(x);
        span = g.closure(&gens);
    }
    gens.into_iter().collect()
}

/// Every homomorphism g → Sym(d).
fn all_homs(g: &FiniteGroup, gens: &[usize], d: usize) -> Vec<Action> {
    let choices: Vec<Vec<Vec<usize>>> = gens.iter().map(|&x| perms_of_order_dividing(g.element_order(x), d)).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; gens.len()];
    loop {
        let imgs: Vec<&Vec<usize>> = pick.iter().zip(&choices).map(|(&i, c)| &c[i]).collect();
        if let Some(h) = extend(g, gens, &imgs, d) {
            out.push(h);
        }
        // odometer over the choice lists
        let mut k = 0;
        loop {
            if k == pick.len() {
                return out;
            }
            pick[k] += 1;
            if pick[k] < choices[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// Extends generator images along the Cayley graph; `None` if a relation
/// fails.
fn extend(g: &FiniteGroup, gens: &[usize], imgs: &[&Vec<usize>], d: usize) -> Option<Action> {
    let mut map: Vec<Option<Vec<usize>>> = vec![None; g.order()];
    map[0] = Some((0..d).collect());
    let mut queue = vec![0usize];
    while let Some(x) = queue.pop() {
        let px = map[x].clone().expect("queued elements are mapped");
        for (&s, img) in gens.iter().zip(imgs) {
            let y = g.mul(x, s);
            let py: Vec<usize> = px.iter().map(|&z| img[z]).collect();
            match &map[y] {
                Some(q) if *q != py => return None,
                Some(_) => {}
                None => {
                    map[y] = Some(py);
                    queue.push(y);
                }
            }
        }
    }
    map.into_iter().collect()
}

/// Permutations of 0..d whose cycle lengths divide k, each listed once.
fn perms_of_order_dividing(k: u64, d: usize) -> Vec<Vec<usize>> {
    fn rec(k: u64, map: &mut Vec<usize>, free: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let Some(p) = free.iter().position(|&f| f) else {
            out.push(map.clone());
            return;
        };
        free[p] = false;
        let avail = free.iter().filter(|&&f| f).count();
        for len in (1..=avail + 1).filter(|&l| k.is_multiple_of(l as u64)) {
            let mut cycle = vec![p];
            extend_cycle(k, len, &mut cycle, map, free, out);
        }
        free[p] = true;
    }
    fn extend_cycle(
        k: u64,
        len: usize,
        cycle: &mut Vec<usize>,
        map: &mut Vec<usize>,
        free: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cycle.len() == len {
            for i in 0..len {
                map[cycle[i]] = cycle[(i + 1) % len];
            }
            rec(k, map, free, out);
            return;
        }
        for q in 0..free.len() {
            if free[q] {
                free[q] = false;
                cycle.push(q);
                extend_cycle(k, len, cycle, map, free, out);
                cycle.pop();
                free[q] = true;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, &mut (0..d).collect(), &mut vec![true; d], &mut out);
    out
}
