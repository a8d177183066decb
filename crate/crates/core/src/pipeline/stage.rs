//! Separation once both factors are finite: a base A×B component, power
//! separation inside each conjugacy class of cyclic subgroups, order
//! separation across classes, and a repair loop on the original targets.

use std::collections::BTreeSet;

use crate::arith::{checked_lcm, fresh_prime, prime_divisors, valuation};
use crate::error::{Error, Result};
use crate::graph::CoverGraph;
use crate::group::FactorHom;
use crate::lemmas::{boost_component, derive_seed, lemma3_with_registered, lemma4_with_registered, LemmaConfig};
use crate::lemmas::{Component, SeparationResult};
use crate::words::{FreeProduct, NormalForm};

use super::reduce::{map_word, reduced_product};
use super::{assemble_certificate, classify_targets, CertComponent, Certificate, Checked, Instance};

/// Hyperbolic targets whose primitive roots are conjugate up to inversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperbolicClass {
    /// Primitive root shared (up to conjugacy) by the members.
    pub root: NormalForm,
    /// Least power of the root in the Cartesian subgroup.
    pub m: u64,
    /// `root^m`.
    pub w: NormalForm,
    /// (target index, e) with the target conjugate to root^e.
    pub members: Vec<(usize, i64)>,
}

/// Groups cyclically reduced hyperbolic targets by their primitive roots.
pub fn hyperbolic_classes(fp: &FreeProduct, targets: &[NormalForm], gamma: &[usize]) -> Result<Vec<HyperbolicClass>> {
    let mut classes: Vec<HyperbolicClass> = Vec::new();
    for &i in gamma {
        let (r, e) = fp.primitive_root(&targets[i])?;
        let e = e as i64;
        let mut placed = false;
        for c in classes.iter_mut() {
            let sign = if fp.is_conjugate(&r, &c.root, false)? {
                1
            } else if fp.is_conjugate(&r, &fp.invert(&c.root), false)? {
                -1
            } else {
                continue;
            };
            if c.members.iter().any(|&(_, k)| k.unsigned_abs() == e.unsigned_abs()) {
                return Err(Error::Internal(format!("target {i} repeats an exponent of its class")));
            }
            c.members.push((i, sign * e));
            placed = true;
            break;
        }
        if !placed {
            let m = fp.minimal_cartesian_power(&r)?;
            let w = fp.pow(&r, m as i64)?;
            classes.push(HyperbolicClass { root: r, m, w, members: vec![(i, e)] });
        }
    }
    Ok(classes)
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Factor,
    Hyperbolic { class: usize, exponent: i64 },
}

struct Stage<'a> {
    fp: FreeProduct,
    targets: Vec<NormalForm>,
    kinds: Vec<Kind>,
    classes: Vec<HyperbolicClass>,
    lemma: LemmaConfig,
    base_primes: BTreeSet<u64>,
    components: Vec<CertComponent>,
    transcript: &'a mut Vec<String>,
    calls: u64,
}

/// Builds and verifies a certificate for the reduced instance given by
/// `homs`.
pub(crate) fn separate_finite(
    inst: &Instance,
    checked: &Checked,
    homs: [FactorHom; 2],
    mut transcript: Vec<String>,
) -> Result<Certificate> {
    let cfg = &inst.config;
    let fp = reduced_product(&homs);
    let targets: Vec<NormalForm> = checked.cores.iter().map(|w| map_word(&homs, &fp, w)).collect::<Result<_>>()?;
    let part = classify_targets(&targets);
    let classes = hyperbolic_classes(&fp, &targets, &part.gamma)?;
    let mut kinds = vec![Kind::Factor; targets.len()];
    for (ci, c) in classes.iter().enumerate() {
        for &(i, e) in &c.members {
            kinds[i] = Kind::Hyperbolic { class: ci, exponent: e };
        }
    }
    let (a, b) = fp.finite_groups()?;
    let mut base_primes: BTreeSet<u64> = prime_divisors(a.order() as u64).into_iter().collect();
    base_primes.extend(prime_divisors(b.order() as u64));
    let base = CoverGraph::cayley_base(a, b, cfg.max_vertices)?;
    let mut stage = Stage {
        fp: fp.clone(),
        targets,
        kinds,
        classes,
        lemma: cfg.lemma_config(),
        base_primes,
        components: vec![CertComponent::Graph { graph: base, prime: None, note: "A×B regular".into() }],
        transcript: &mut transcript,
        calls: 0,
    };
    if first_collision(&stage.orders()?).is_some() {
        stage.build()?;
    } else {
        stage.transcript.push("the A×B component separates all targets".into());
    }
    let budget = cfg.max_repairs.unwrap_or(stage.targets.len() * stage.targets.len());
    stage.repair(budget)?;
    let components = stage.components;
    assemble_certificate(inst, homs, components, transcript)
}

impl Stage<'_> {
    fn next_lemma_config(&mut self, tag: u64) -> LemmaConfig {
        self.calls += 1;
        LemmaConfig { seed: derive_seed(self.lemma.seed, &[tag, self.calls]), ..self.lemma.clone() }
    }

    fn class_roots(&self) -> Vec<NormalForm> {
        self.classes.iter().map(|c| c.w.clone()).collect()
    }

    fn graph_components(res: SeparationResult) -> Vec<CertComponent> {
        res.components.into_iter().map(from_lemma).collect()
    }

    /// Power separation inside every class, then order separation of the
    /// class roots.
    fn build(&mut self) -> Result<()> {
        let roots = self.class_roots();
        for ci in 0..self.classes.len() {
            let class = self.classes[ci].clone();
            let exps: Vec<i64> = class.members.iter().map(|&(_, e)| e).collect();
            let extra: Vec<NormalForm> =
                roots.iter().enumerate().filter(|&(j, _)| j != ci).map(|(_, w)| w.clone()).collect();
            let cfg = self.next_lemma_config(4);
            let res = lemma4_with_registered(&self.fp, &class.w, &exps, &extra, &cfg)?;
            self.transcript.push(format!("class {ci}: power separation for exponents {exps:?}"));
            self.components.extend(Self::graph_components(res));
        }
        if roots.len() >= 2 {
            let pi = self.used_primes(&self.orders()?);
            let cfg = self.next_lemma_config(3);
            let res = lemma3_with_registered(&self.fp, &roots, &[], &pi, &cfg)?;
            self.transcript.push(format!("order separation of {} class roots, π = {pi:?}", roots.len()));
            self.components.extend(Self::graph_components(res));
        }
        Ok(())
    }

    fn orders_with(&self, extra: &[CertComponent]) -> Result<Vec<u64>> {
        let mut orders = vec![1u64; self.targets.len()];
        for c in self.components.iter().chain(extra) {
            for (o, w) in orders.iter_mut().zip(&self.targets) {
                *o = checked_lcm(*o, super::component_order(c, w)?)?;
            }
        }
        Ok(orders)
    }

    fn orders(&self) -> Result<Vec<u64>> {
        self.orders_with(&[])
    }

    /// Primes of the factor orders, of every component, of every current
    /// target order, and of the class powers and exponents.
    fn used_primes(&self, orders: &[u64]) -> BTreeSet<u64> {
        let mut pi = self.base_primes.clone();
        for c in &self.components {
            if let CertComponent::Graph { prime: Some(p), .. } = c {
                pi.insert(*p);
            }
        }
        for &o in orders {
            pi.extend(prime_divisors(o));
        }
        for c in &self.classes {
            pi.extend(prime_divisors(c.m));
            for &(_, e) in &c.members {
                pi.extend(prime_divisors(e.unsigned_abs()));
            }
        }
        pi
    }

    fn repair(&mut self, budget: usize) -> Result<()> {
        let mut orders = self.orders()?;
        let mut rounds = 0;
        while let Some((i, j)) = first_collision(&orders) {
            if rounds == budget {
                return Err(Error::RepairBudgetExceeded(rounds));
            }
            rounds += 1;
            let fresh = match self.repair_components(i, j, &orders) {
                Ok(c) => c,
                Err(e) if e.is_retryable() => {
                    self.transcript.push(format!("repair {rounds} for targets {i},{j} failed: {e}"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let next = self.orders_with(&fresh)?;
            if !distinct_pairs(&orders).is_subset(&distinct_pairs(&next)) {
                self.transcript.push(format!("repair {rounds} for targets {i},{j} rejected: merged orders"));
                continue;
            }
            self.transcript.push(format!("repair {rounds}: targets {i},{j} had order {}", orders[i]));
            self.components.extend(fresh);
            orders = next;
        }
        Ok(())
    }

    fn repair_components(&mut self, i: usize, j: usize, orders: &[u64]) -> Result<Vec<CertComponent>> {
        let roots = self.class_roots();
        match (self.kinds[i], self.kinds[j]) {
            (Kind::Factor, Kind::Factor) => {
                Err(Error::Internal(format!("factor targets {i} and {j} share the order {}", orders[i])))
            }
            (Kind::Hyperbolic { class: ci, exponent: ei }, Kind::Hyperbolic { class: cj, exponent: ej })
                if ci == cj =>
            {
                // a prime telling the exponents apart, boosted past every
                // p-part seen so far
                let (ei, ej) = (ei.unsigned_abs(), ej.unsigned_abs());
                let p = prime_divisors(ei * ej)
                    .into_iter()
                    .find(|&p| valuation(ei, p) != valuation(ej, p))
                    .ok_or_else(|| Error::Internal(format!("exponents {ei} and {ej} agree at every prime")))?;
                let top = orders.iter().map(|&o| valuation(o, p)).max().unwrap_or(0);
                let n = top + valuation(ei, p).max(valuation(ej, p)) + 1;
                let mut registered = vec![roots[ci].clone()];
                registered.extend(roots.iter().enumerate().filter(|&(k, _)| k != ci).map(|(_, w)| w.clone()));
                let cfg = self.next_lemma_config(41);
                let c = boost_component(&self.fp, &registered, p, n, cfg.seed, &cfg)?;
                Ok(vec![from_lemma(c)])
            }
            (Kind::Hyperbolic { class: ci, .. }, Kind::Hyperbolic { class: cj, .. }) => {
                let pi = self.used_primes(orders);
                let cfg = self.next_lemma_config(31);
                let res = lemma3_with_registered(&self.fp, &[roots[ci].clone(), roots[cj].clone()], &[], &pi, &cfg)?;
                Ok(Self::graph_components(res))
            }
            (Kind::Hyperbolic { class, .. }, Kind::Factor) | (Kind::Factor, Kind::Hyperbolic { class, .. }) => {
                let q = fresh_prime(&self.used_primes(orders));
                let cfg = self.next_lemma_config(11);
                let c = boost_component(&self.fp, &[roots[class].clone()], q, 0, cfg.seed, &cfg)?;
                Ok(vec![from_lemma(c)])
            }
        }
    }
}

fn from_lemma(c: Component) -> CertComponent {
    CertComponent::Graph { graph: c.graph, prime: Some(c.prime), note: c.note }
}

fn first_collision(orders: &[u64]) -> Option<(usize, usize)> {
    (1..orders.len()).find_map(|j| (0..j).find(|&i| orders[i] == orders[j]).map(|i| (i, j)))
}

fn distinct_pairs(orders: &[u64]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for j in 1..orders.len() {
        for i in 0..j {
            if orders[i] != orders[j] {
                out.insert((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;

    #[test]
    fn classes_by_primitive_root() {
        let fp = FreeProduct::finite(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3));
        let ab = fp.word(&[(0, 1), (1, 1)]).unwrap();
        let abab2 = fp.word(&[(0, 1), (1, 1), (0, 1), (1, 2)]).unwrap();
        let classes = hyperbolic_classes(&fp, &[ab.clone(), abab2], &[0, 1]).unwrap();
        assert_eq!(classes.len(), 2);
        let t = vec![fp.pow(&ab, 6).unwrap(), fp.pow(&ab, 12).unwrap()];
        let classes = hyperbolic_classes(&fp, &t, &[0, 1]).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].m, 6);
        assert_eq!(classes[0].w, t[0]);
        assert_eq!(classes[0].members, vec![(0, 6), (1, 12)]);
    }

    #[test]
    fn inverse_roots_share_a_class() {
        let fp = FreeProduct::finite(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3));
        let u = fp.word(&[(0, 1), (1, 1), (0, 1), (1, 1), (0, 1), (1, 2)]).unwrap();
        let t = vec![u.clone(), fp.pow(&fp.invert(&u), 2).unwrap()];
        let classes = hyperbolic_classes(&fp, &t, &[0, 1]).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].members, vec![(0, 1), (1, -2)]);
    }

    #[test]
    fn collisions_and_pairs() {
        assert_eq!(first_collision(&[2, 3, 6]), None);
        assert_eq!(first_collision(&[2, 3, 2]), Some((0, 2)));
        assert_eq!(distinct_pairs(&[1, 1, 2]), BTreeSet::from([(0, 2), (1, 2)]));
    }
}
