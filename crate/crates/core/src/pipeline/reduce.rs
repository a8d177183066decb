//! Search for finite quotients of the factors.
//!
//! Candidates for one factor come in a fixed order: quotients by normal
//! subgroups from the smallest kernel up, or Z → Z/M for M = 2, 3, ….
//! Pairs of candidates are scanned by increasing index sum so the search
//! is deterministic and favours small quotients on both sides at once.

use std::collections::BTreeSet;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::group::{FactorHom, FiniteGroup, NORMAL_SUBGROUP_BOUND};
use crate::words::{FactorSpec, FreeProduct, NormalForm, Syllable};

use super::{Checked, Partition};

/// Joint checks tried before the pair search gives up.
const JOINT_CHECK_LIMIT: usize = 20_000;
/// Largest M·M table materialized for Z/M.
const MODULUS_TABLE_LIMIT: u64 = 40_000_000;

/// One candidate quotient of a factor.
#[derive(Clone, Debug)]
pub(crate) enum Candidate {
    Quotient(FactorHom),
    Modulus(u64),
}

impl Candidate {
    /// Order of the image of a factor element.
    pub(crate) fn image_order(&self, value: i64) -> u64 {
        match self {
            Candidate::Quotient(h) => h.image_order(value),
            Candidate::Modulus(m) => m / m.gcd(&value.unsigned_abs()),
        }
    }

    pub(crate) fn kills(&self, value: i64) -> bool {
        self.image_order(value) == 1
    }

    pub(crate) fn hom(&self) -> Result<FactorHom> {
        match self {
            Candidate::Quotient(h) => Ok(h.clone()),
            Candidate::Modulus(m) => {
                if m.saturating_mul(*m) > MODULUS_TABLE_LIMIT {
                    return Err(Error::BudgetExceeded(format!("Z/{m} is too large to tabulate")));
                }
                Ok(FactorHom::modulus(*m as usize))
            }
        }
    }
}

type Filter<'a> = Box<dyn Fn(&Candidate) -> bool + 'a>;

/// Lazily extended list of the candidates of one factor that pass a filter.
struct FactorSearch<'a> {
    filter: Filter<'a>,
    found: Vec<Candidate>,
    pending: Vec<Candidate>,
    next_modulus: Option<u64>,
    bound: u64,
}

impl<'a> FactorSearch<'a> {
    fn new(spec: &FactorSpec, bound: u64, filter: Filter<'a>) -> Result<Self> {
        let (pending, next_modulus) = match spec {
            FactorSpec::Finite { table } => (quotient_candidates(table)?, None),
            FactorSpec::InfiniteCyclic => (Vec::new(), Some(2)),
        };
        let mut pending = pending;
        pending.reverse();
        Ok(FactorSearch { filter, found: Vec::new(), pending, next_modulus, bound })
    }

    fn get(&mut self, i: usize) -> Option<&Candidate> {
        while self.found.len() <= i {
            let next = if let Some(c) = self.pending.pop() {
                c
            } else {
                let m = self.next_modulus.filter(|&m| m <= self.bound)?;
                self.next_modulus = Some(m + 1);
                Candidate::Modulus(m)
            };
            if (self.filter)(&next) {
                self.found.push(next);
            }
        }
        self.found.get(i)
    }

    fn is_modulus(&self) -> bool {
        self.next_modulus.is_some()
    }
}

/// Quotient maps of a finite group, smallest kernel first. Groups too large
/// for normal subgroup enumeration only offer the identity.
fn quotient_candidates(g: &FiniteGroup) -> Result<Vec<Candidate>> {
    match g.normal_subgroups(NORMAL_SUBGROUP_BOUND) {
        Ok(subs) => subs.iter().map(|n| Ok(Candidate::Quotient(g.quotient(n)?.1))).collect(),
        Err(Error::BudgetExceeded(_)) => Ok(vec![Candidate::Quotient(FactorHom::identity(g))]),
        Err(e) => Err(e),
    }
}

/// First pair (by index sum, then factor-0 index) of filtered candidates
/// accepted by `joint`.
pub(crate) fn search_pair(
    fp: &FreeProduct,
    bound: u64,
    filters: [Filter<'_>; 2],
    mut joint: impl FnMut(&Candidate, &Candidate) -> Result<bool>,
) -> Result<[Candidate; 2]> {
    let [f0, f1] = filters;
    let mut s0 = FactorSearch::new(fp.factor(0), bound, f0)?;
    let mut s1 = FactorSearch::new(fp.factor(1), bound, f1)?;
    let exhausted = |s0: &FactorSearch, s1: &FactorSearch, what: String| {
        if s0.is_modulus() || s1.is_modulus() {
            Error::ModulusBudgetExceeded(bound)
        } else {
            Error::NoFactorHom(what)
        }
    };
    for (f, s) in [(0, &mut s0), (1, &mut s1)] {
        if s.get(0).is_none() {
            return Err(if s.is_modulus() {
                Error::ModulusBudgetExceeded(bound)
            } else {
                Error::NoFactorHom(format!("no quotient of factor {f} meets the order conditions"))
            });
        }
    }
    let mut checks = 0usize;
    for sum in 0usize.. {
        let mut any = false;
        for i in 0..=sum {
            let Some(c0) = s0.get(i).cloned() else { break };
            let Some(c1) = s1.get(sum - i).cloned() else { continue };
            any = true;
            checks += 1;
            if checks > JOINT_CHECK_LIMIT {
                return Err(exhausted(&s0, &s1, format!("{JOINT_CHECK_LIMIT} candidate pairs rejected")));
            }
            if joint(&c0, &c1)? {
                return Ok([c0, c1]);
            }
        }
        if !any {
            break;
        }
    }
    Err(exhausted(&s0, &s1, "no candidate pair meets the joint conditions".into()))
}

/// Maps a word syllable by syllable into the reduced free product.
pub(crate) fn map_word(homs: &[FactorHom; 2], reduced: &FreeProduct, w: &NormalForm) -> Result<NormalForm> {
    let raw: Vec<Syllable> =
        w.syllables().iter().map(|s| Syllable::new(s.factor, homs[s.factor].apply(s.value) as i64)).collect();
    reduced.normalize(&raw)
}

pub(crate) fn reduced_product(homs: &[FactorHom; 2]) -> FreeProduct {
    FreeProduct::finite(homs[0].target.clone(), homs[1].target.clone())
}

/// Checks that mapped targets stay pairwise non-conjugate up to inversion
/// and that hyperbolic targets keep their syllable count.
pub(crate) fn images_separable(checked: &Checked, homs: &[FactorHom; 2]) -> Result<Option<Vec<NormalForm>>> {
    let reduced = reduced_product(homs);
    let images: Vec<NormalForm> =
        checked.cores.iter().map(|w| map_word(homs, &reduced, w)).collect::<Result<_>>()?;
    for (w, img) in checked.cores.iter().zip(&images) {
        if w.len() >= 2 && img.len() != w.len() {
            return Ok(None);
        }
    }
    for i in 0..images.len() {
        for j in 0..i {
            if reduced.is_conjugate(&images[i], &images[j], true)? {
                return Ok(None);
            }
        }
    }
    Ok(Some(images))
}

/// The factor-f part of Λ: factor targets, syllables of hyperbolic
/// targets, and their pairwise quotients; then Λ′, a maximal subset of
/// pairwise non-conjugate-up-to-inversion elements containing e, chosen
/// greedily in that order.
fn lambda_sets(fp: &FreeProduct, checked: &Checked, part: &Partition, f: usize) -> (Vec<i64>, Vec<i64>) {
    let factor_targets = if f == 0 { &part.alpha } else { &part.beta };
    let mut lambda: Vec<i64> = factor_targets
        .iter()
        .map(|&i| checked.cores[i].first().map_or(0, |s| s.value))
        .collect();
    let omega: Vec<i64> = part
        .gamma
        .iter()
        .flat_map(|&i| checked.cores[i].syllables().iter().filter(|s| s.factor == f).map(|s| s.value))
        .collect();
    lambda.extend(&omega);
    for &x in &omega {
        for &y in &omega {
            lambda.push(factor_mul(fp, f, x, factor_inv(fp, f, y)));
        }
    }
    let mut seen = BTreeSet::new();
    lambda.retain(|x| seen.insert(*x));
    let mut prime = vec![0i64];
    for &x in &lambda {
        if !prime.iter().any(|&y| factor_conjugate_pm(fp, f, x, y)) {
            prime.push(x);
        }
    }
    (lambda, prime)
}

pub(crate) fn factor_mul(fp: &FreeProduct, f: usize, x: i64, y: i64) -> i64 {
    match fp.factor(f) {
        FactorSpec::Finite { table } => table.mul(x as usize, y as usize) as i64,
        FactorSpec::InfiniteCyclic => x.saturating_add(y),
    }
}

pub(crate) fn factor_inv(fp: &FreeProduct, f: usize, x: i64) -> i64 {
    match fp.factor(f) {
        FactorSpec::Finite { table } => table.inv(x as usize) as i64,
        FactorSpec::InfiniteCyclic => -x,
    }
}

fn factor_conjugate_pm(fp: &FreeProduct, f: usize, x: i64, y: i64) -> bool {
    match fp.factor(f) {
        FactorSpec::Finite { table } => {
            let (x, y) = (x as usize, y as usize);
            table.is_conjugate(x, y) || table.is_conjugate(x, table.inv(y))
        }
        FactorSpec::InfiniteCyclic => x == y || x == -y,
    }
}

/// The reduction used by the general pipeline: (a) elements of Λ′ get
/// pairwise distinct image orders, (b) no nontrivial element of Λ dies,
/// (c) factor-0 and factor-1 targets get distinct image orders, and the
/// mapped targets stay pairwise non-conjugate up to inversion.
pub(crate) fn reduce_factors(checked: &Checked, part: &Partition, bound: u64) -> Result<[FactorHom; 2]> {
    let fp = &checked.fp;
    let sets = [lambda_sets(fp, checked, part, 0), lambda_sets(fp, checked, part, 1)];
    let filter = |f: usize| -> Filter<'_> {
        let (lambda, prime) = &sets[f];
        Box::new(move |c: &Candidate| {
            if lambda.iter().any(|&x| x != 0 && c.kills(x)) {
                return false;
            }
            let mut orders = BTreeSet::new();
            prime.iter().all(|&x| orders.insert(c.image_order(x)))
        })
    };
    let value = |i: usize| checked.cores[i].first().map_or(0, |s| s.value);
    let mut joint = |c0: &Candidate, c1: &Candidate| -> Result<bool> {
        let a: BTreeSet<u64> = part.alpha.iter().map(|&i| c0.image_order(value(i))).collect();
        if part.beta.iter().any(|&i| a.contains(&c1.image_order(value(i)))) {
            return Ok(false);
        }
        let homs = [c0.hom()?, c1.hom()?];
        Ok(images_separable(checked, &homs)?.is_some())
    };
    let [c0, c1] = search_pair(fp, bound, [filter(0), filter(1)], &mut joint)?;
    Ok([c0.hom()?, c1.hom()?])
}
