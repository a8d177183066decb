//! Distinct orders for powers w^k of one Cartesian-subgroup element.
//!
//! For every prime p dividing some exponent, a p-component makes |w| a
//! power p^e with p^e above every p-part of the exponents; then the
//! p-part of |w^k| is p^(e − v_p(k)), which tells exponents with
//! different p-valuations apart.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;

use super::boost::boost_component;
use super::{derive_seed, graph_orders, Component, LemmaConfig, SeparationResult};
use crate::arith::{prime_divisors, valuation};
use crate::error::{Error, Result};
use crate::words::{FreeProduct, NormalForm};

/// Exponent n_p for each prime p of ∏|k| (nonzero k): the least n with
/// p^n not dividing the product. Falls back to {2: 1} when no prime
/// divides any exponent.
pub fn boost_plan(exponents: &[i64]) -> BTreeMap<u64, u32> {
    let mut plan: BTreeMap<u64, u32> = BTreeMap::new();
    for &k in exponents.iter().filter(|&&k| k != 0) {
        let k = k.unsigned_abs();
        for p in prime_divisors(k) {
            *plan.entry(p).or_insert(1) += valuation(k, p);
        }
    }
    if plan.is_empty() {
        plan.insert(2, 1);
    }
    plan
}

pub fn lemma4_power_separate(
    fp: &FreeProduct,
    w: &NormalForm,
    exponents: &[i64],
    cfg: &LemmaConfig,
) -> Result<SeparationResult> {
    lemma4_with_registered(fp, w, exponents, &[], cfg)
}

/// As [`lemma4_power_separate`], also making every `extra` element act as
/// a prime-power element of each component.
pub fn lemma4_with_registered(
    fp: &FreeProduct,
    w: &NormalForm,
    exponents: &[i64],
    extra: &[NormalForm],
    cfg: &LemmaConfig,
) -> Result<SeparationResult> {
    if w.is_identity() {
        return Err(Error::TrivialTarget);
    }
    if !w.is_cyclically_reduced() {
        return Err(Error::NotCyclicallyReduced);
    }
    let mut seen = BTreeSet::new();
    if let Some(k) = exponents.iter().find(|k| !seen.insert(k.unsigned_abs())) {
        return Err(Error::Precondition(format!("exponent {k} repeats an absolute value")));
    }
    let mut registered = vec![w.clone()];
    registered.extend_from_slice(extra);
    let mut components: Vec<Component> = Vec::new();
    let mut transcript = Vec::new();
    for (p, n) in boost_plan(exponents) {
        let seed = derive_seed(cfg.seed, &[5, p, n as u64]);
        let c = boost_component(fp, &registered, p, n, seed, cfg)?;
        transcript.push(format!("boost p={p} N={n}: |w| = {}", c.graph.word_permutation(w)?.order()?));
        components.push(c);
    }
    let powers: Vec<NormalForm> = exponents.iter().map(|&k| fp.pow(w, k)).collect::<Result<_>>()?;
    for c in &components {
        let o = c.graph.word_permutation(w)?.order()?;
        for (&k, ok) in exponents.iter().zip(graph_orders(&c.graph, &powers)?) {
            if ok != o / o.gcd(&k.unsigned_abs()) {
                return Err(Error::Internal(format!("|w^{k}| = {ok} disagrees with |w| = {o}")));
            }
        }
    }
    let result = SeparationResult::new(components, &powers, transcript)?;
    for i in 0..exponents.len() {
        if let Some(j) = (0..i).find(|&j| result.orders[j] == result.orders[i]) {
            return Err(Error::PostconditionFailed(format!(
                "exponents {} and {} give the same order {}",
                exponents[j], exponents[i], result.orders[i]
            )));
        }
    }
    Ok(result)
}
