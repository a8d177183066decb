//! Finite p-groups used as fibres of induced graphs.

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{EnumeratedGroup, Permutation, WreathPGroup, WREATH_DEGREE_BOUND};

/// A finite p-group together with the way it acts on fibre points:
/// either naturally on the leaves of a p-ary tree, or regularly on its
/// own elements.
#[derive(Clone, Debug)]
pub struct FibreGroup {
    pub p: u64,
    pub label: String,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Leaves(WreathPGroup),
    Regular(EnumeratedGroup),
}

impl FibreGroup {
    /// W(p, m) acting on its p^m leaves.
    pub fn leaves(p: u64, m: u32) -> Result<Self> {
        let w = WreathPGroup::new(p as usize, m, WREATH_DEGREE_BOUND)?;
        Ok(FibreGroup { p, label: format!("W({p},{m}) on leaves"), kind: Kind::Leaves(w) })
    }

    /// The `copies`-fold direct power of a small nonabelian p-group,
    /// acting regularly. Fails when the order would exceed `cap`.
    pub fn regular(p: u64, copies: usize, cap: usize) -> Result<Self> {
        let (gens, name) = small_p_group(p)?;
        let base_order = EnumeratedGroup::generate(&gens, cap)?.order();
        if base_order.checked_pow(copies as u32).is_none_or(|o| o > cap) {
            return Err(Error::BudgetExceeded(format!("{name}^{copies} has more than {cap} elements")));
        }
        let d = gens[0].degree();
        let mut all = Vec::new();
        for i in 0..copies {
            for g in &gens {
                all.push(embed(g, i, copies, d));
            }
        }
        let group = EnumeratedGroup::generate(&all, cap)?;
        Ok(FibreGroup { p, label: format!("{name}^{copies} regular"), kind: Kind::Regular(group) })
    }

    /// Number of fibre points.
    pub fn degree(&self) -> usize {
        match &self.kind {
            Kind::Leaves(w) => w.degree(),
            Kind::Regular(g) => g.order(),
        }
    }

    /// A uniformly random element in its natural (small) representation.
    pub fn random<R: Rng>(&self, rng: &mut R) -> Permutation {
        match &self.kind {
            Kind::Leaves(w) => w.random_element(rng),
            Kind::Regular(g) => g.element(rng.gen_range(0..g.order())).clone(),
        }
    }

    /// Natural-representation element as a permutation of fibre points.
    pub fn fibre_permutation(&self, g: &Permutation) -> Permutation {
        match &self.kind {
            Kind::Leaves(_) => g.clone(),
            Kind::Regular(group) => group.right_regular(g),
        }
    }

    pub fn natural_identity(&self) -> Permutation {
        match &self.kind {
            Kind::Leaves(w) => Permutation::identity(w.degree()),
            Kind::Regular(g) => g.element(0).clone(),
        }
    }
}

fn embed(g: &Permutation, block: usize, blocks: usize, d: usize) -> Permutation {
    let map = (0..blocks * d)
        .map(|x| if x / d == block { block * d + g.apply(x % d) } else { x })
        .collect();
    Permutation::from_vec(map).expect("block embedding is a permutation")
}

/// Generators of the base fibre group for prime p: W(2,3) (order 128),
/// W(3,2) (order 81), and for p ≥ 5 the order-p³ subgroup V₂⋊C_p of
/// W(p,2), where V₂ is the kernel of (σ−1)² on the base (Z/p)^p.
fn small_p_group(p: u64) -> Result<(Vec<Permutation>, String)> {
    match p {
        2 => Ok((WreathPGroup::new(2, 3, WREATH_DEGREE_BOUND)?.generators(), "W(2,3)".into())),
        3 => Ok((WreathPGroup::new(3, 2, WREATH_DEGREE_BOUND)?.generators(), "W(3,2)".into())),
        _ if crate::arith::is_prime(p) => {
            let n = p as usize;
            // points (i, j) ↦ i·p + j; σ moves the block, v shifts inside blocks
            let sigma = (0..n * n).map(|x| ((x / n + 1) % n) * n + x % n).collect();
            let coeffs = binomial_row_mod(n - 2, n);
            let v = (0..n * n).map(|x| (x / n) * n + (x % n + coeffs[x / n]) % n).collect();
            Ok((
                vec![Permutation::from_vec(sigma)?, Permutation::from_vec(v)?],
                format!("H({p})"),
            ))
        }
        _ => Err(Error::Precondition(format!("{p} is not prime"))),
    }
}

/// Coefficients of (x − 1)^e mod p, padded to length p.
fn binomial_row_mod(e: usize, p: usize) -> Vec<usize> {
    let mut row = vec![1usize];
    for _ in 0..e {
        let mut next = vec![0usize; row.len() + 1];
        for (k, &c) in row.iter().enumerate() {
            next[k + 1] = (next[k + 1] + c) % p;
            next[k] = (next[k] + p - c) % p;
        }
        row = next;
    }
    row.resize(p, 0);
    row
}
