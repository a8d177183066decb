//! Random search for induced graphs on which given Cartesian-subgroup
//! elements act as p-elements of large order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fibre::FibreGroup;
use super::{check_cartesian_targets, check_prime_power_orders, derive_seed, Component, LemmaConfig};
use crate::arith::{checked_pow, is_prime};
use crate::error::{Error, Result};
use crate::graph::CoverGraph;
use crate::group::{Permutation, WREATH_DEGREE_BOUND};
use crate::words::{BasisWord, CartesianBasis, FreeProduct, NormalForm};

/// Failures after which the tree depth grows by one.
const ATTEMPTS_PER_DEPTH: usize = 1_000;

/// Finds ψ from the free basis of C into W(p, m) such that every target
/// acts on the induced graph with p-power order greater than p^n.
pub fn lemma1_boost(fp: &FreeProduct, targets: &[NormalForm], p: u64, n: u32, cfg: &LemmaConfig) -> Result<Component> {
    boost_component(fp, targets, p, n, derive_seed(cfg.seed, &[1, p, n as u64]), cfg)
}

pub(crate) fn boost_component(
    fp: &FreeProduct,
    targets: &[NormalForm],
    p: u64,
    n: u32,
    seed: u64,
    cfg: &LemmaConfig,
) -> Result<Component> {
    check_cartesian_targets(fp, targets)?;
    if !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let (a, b) = fp.finite_groups()?;
    let cosets = a.order() * b.order();
    let threshold = checked_pow(p, n)?;
    let fits = |m: u32| -> bool {
        (p as usize)
            .checked_pow(m)
            .is_some_and(|d| d <= WREATH_DEGREE_BOUND && d.saturating_mul(cosets) <= cfg.max_vertices)
    };
    let mut m = n + 1;
    if !fits(m) {
        return Err(Error::BudgetExceeded(format!("tree depth {m} for p = {p} does not fit the vertex budget")));
    }
    let basis = fp.cartesian_basis()?;
    let words = rewrite_all(fp, &basis, targets)?;
    let mut fibre = FibreGroup::leaves(p, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..cfg.attempts {
        if attempt > 0 && attempt % ATTEMPTS_PER_DEPTH == 0 && fits(m + 1) {
            m += 1;
            fibre = FibreGroup::leaves(p, m)?;
        }
        let Some(psi) = random_assignment(&fibre, basis.rank, &words, threshold, &mut rng)? else {
            continue;
        };
        let graph = induced(a, b, &fibre, &psi, cfg.max_vertices)?;
        let component = Component {
            graph,
            prime: p,
            note: format!("boost p={p} N={n} depth={m} attempt={attempt}"),
        };
        let orders = check_prime_power_orders(&component, targets)?;
        if orders.iter().any(|&o| o <= threshold) {
            return Err(Error::Internal("graph order below the base fibre order".into()));
        }
        return Ok(component);
    }
    Err(Error::SearchBudgetExceeded { seed: cfg.seed, attempts: cfg.attempts })
}

pub(crate) fn rewrite_all(fp: &FreeProduct, basis: &CartesianBasis, targets: &[NormalForm]) -> Result<Vec<BasisWord>> {
    targets.iter().map(|w| fp.rewrite(basis, w)).collect()
}

/// Image of a basis word under ψ, composed left to right.
pub(crate) fn evaluate(psi: &[Permutation], word: &BasisWord, identity: &Permutation) -> Permutation {
    word.iter().fold(identity.clone(), |acc, &(g, positive)| {
        if positive {
            acc.then(&psi[g])
        } else {
            acc.then(&psi[g].inverse())
        }
    })
}

/// Draws ψ and keeps it when every word's image has order above
/// `threshold`.
pub(crate) fn random_assignment<R: rand::Rng>(
    fibre: &FibreGroup,
    rank: usize,
    words: &[BasisWord],
    threshold: u64,
    rng: &mut R,
) -> Result<Option<Vec<Permutation>>> {
    let psi: Vec<Permutation> = (0..rank).map(|_| fibre.random(rng)).collect();
    let id = fibre.natural_identity();
    for w in words {
        if evaluate(&psi, w, &id).order()? <= threshold {
            return Ok(None);
        }
    }
    Ok(Some(psi))
}

pub(crate) fn induced(
    a: &crate::group::FiniteGroup,
    b: &crate::group::FiniteGroup,
    fibre: &FibreGroup,
    psi: &[Permutation],
    budget: usize,
) -> Result<CoverGraph> {
    let images: Vec<Permutation> = psi.iter().map(|g| fibre.fibre_permutation(g)).collect();
    let mut graph = if images.is_empty() {
        // one factor is trivial: C is trivial and the fibre carries nothing
        CoverGraph::cayley_base(a, b, budget)?
    } else {
        CoverGraph::induced_graph(a, b, &images, budget)?
    };
    graph.push_provenance(fibre.label.clone());
    Ok(graph)
}
