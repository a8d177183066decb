//! Constructive engines on cover graphs: p-element boosting, close-edge
//! elimination, order separation of non-conjugate cyclic classes, and
//! separation of powers of one element.

mod boost;
mod declose;
mod fibre;
mod powers;
mod separate;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::arith::{checked_lcm, is_power_of};
use crate::error::{Error, Result};
use crate::graph::CoverGraph;
use crate::words::{FreeProduct, NormalForm};

pub use boost::lemma1_boost;
pub use declose::{admissible_chis, lemma2_declose, RootData};
pub use fibre::FibreGroup;
pub use powers::{boost_plan, lemma4_power_separate, lemma4_with_registered};
pub use separate::lemma3_separate;
pub(crate) use separate::lemma3_with_registered;

pub(crate) use boost::boost_component;

/// Knobs shared by all constructions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct LemmaConfig {
    pub seed: u64,
    pub max_vertices: usize,
    pub max_iterations: usize,
    /// Random assignments tried by the boosting search.
    pub attempts: usize,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig { seed: 0, max_vertices: 1_000_000, max_iterations: 64, attempts: 10_000 }
    }
}

/// One permutation representation given as a cover graph; every
/// registered target acts with order a power of `prime`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub graph: CoverGraph,
    pub prime: u64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationResult {
    pub components: Vec<Component>,
    /// Per target, the lcm of its orders over all components.
    pub orders: Vec<u64>,
    pub transcript: Vec<String>,
}

impl SeparationResult {
    pub fn new(components: Vec<Component>, targets: &[NormalForm], transcript: Vec<String>) -> Result<Self> {
        let orders = combined_orders(&components, targets)?;
        Ok(SeparationResult { components, orders, transcript })
    }
}

/// Orders of `targets` on one graph.
pub fn graph_orders(graph: &CoverGraph, targets: &[NormalForm]) -> Result<Vec<u64>> {
    targets.iter().map(|w| graph.word_permutation(w)?.order()).collect()
}

/// Orders of `targets` on the disjoint union of the components.
pub fn combined_orders(components: &[Component], targets: &[NormalForm]) -> Result<Vec<u64>> {
    let mut orders = vec![1u64; targets.len()];
    for c in components {
        for (o, x) in orders.iter_mut().zip(graph_orders(&c.graph, targets)?) {
            *o = checked_lcm(*o, x)?;
        }
    }
    Ok(orders)
}

/// Checks that every registered target has nontrivial `prime`-power order.
pub fn check_prime_power_orders(component: &Component, targets: &[NormalForm]) -> Result<Vec<u64>> {
    let orders = graph_orders(&component.graph, targets)?;
    for (i, &o) in orders.iter().enumerate() {
        if o <= 1 || !is_power_of(o, component.prime) {
            return Err(Error::PostconditionFailed(format!(
                "target {i} has order {o}, not a nontrivial power of {}",
                component.prime
            )));
        }
    }
    Ok(orders)
}

/// Nontrivial, cyclically reduced elements of the Cartesian subgroup.
pub(crate) fn check_cartesian_targets(fp: &FreeProduct, targets: &[NormalForm]) -> Result<()> {
    fp.finite_groups()?;
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    for w in targets {
        if w.is_identity() {
            return Err(Error::TrivialTarget);
        }
        if !fp.in_cartesian(w)? {
            return Err(Error::NotInCartesian);
        }
    }
    Ok(())
}

/// Deterministic sub-seed for a labelled sub-search.
pub(crate) fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    // splitmix64 over the parts
    let mut x = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        x = x.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x = z ^ (z >> 31);
    }
    x
}

pub(crate) fn primes_of(components: &[Component]) -> BTreeSet<u64> {
    components.iter().map(|c| c.prime).collect()
}
