//! Words of a free product of two factors: normal forms, cyclic reduction,
//! conjugacy, primitive roots, the Cartesian subgroup and rewriting of its
//! elements in a free basis.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

/// One free factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FactorSpec {
    Finite { table: FiniteGroup },
    InfiniteCyclic,
}

impl FactorSpec {
    pub fn finite(g: FiniteGroup) -> Self {
        FactorSpec::Finite { table: g }
    }

    pub fn group(&self) -> Option<&FiniteGroup> {
        match self {
            FactorSpec::Finite { table } => Some(table),
            FactorSpec::InfiniteCyclic => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.group().is_some()
    }

    /// Order of an element; `None` for a nonzero exponent of Z.
    pub fn element_order(&self, value: i64) -> Option<u64> {
        match self {
            FactorSpec::Finite { table } => Some(table.element_order(value as usize)),
            FactorSpec::InfiniteCyclic => (value == 0).then_some(1),
        }
    }
}

/// A nontrivial element of one factor: an element index for finite
/// factors, a nonzero exponent for Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, i64)", into = "(usize, i64)")]
pub struct Syllable {
    pub factor: usize,
    pub value: i64,
}

impl From<(usize, i64)> for Syllable {
    fn from((factor, value): (usize, i64)) -> Self {
        Syllable { factor, value }
    }
}

impl From<Syllable> for (usize, i64) {
    fn from(s: Syllable) -> Self {
        (s.factor, s.value)
    }
}

impl Syllable {
    pub fn new(factor: usize, value: i64) -> Self {
        Syllable { factor, value }
    }
}

/// Alternating sequence of nontrivial syllables; empty means identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalForm(Vec<Syllable>);

impl NormalForm {
    pub fn identity() -> Self {
        NormalForm(Vec::new())
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Length at most one: the identity or a single factor element.
    pub fn is_factor_element(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn first(&self) -> Option<Syllable> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Syllable> {
        self.0.last().copied()
    }

    /// First/last syllables in different factors, or length ≤ 1.
    pub fn is_cyclically_reduced(&self) -> bool {
        self.0.len() <= 1 || self.0[0].factor != self.0[self.0.len() - 1].factor
    }

    pub fn rotate(&self, k: usize) -> NormalForm {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        NormalForm(v)
    }
}

/// A free product of exactly two factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeProduct {
    factors: [FactorSpec; 2],
}

/// Free basis of the Cartesian subgroup together with the coset
/// transversal it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartesianBasis {
    /// Words a·b, indexed by a·|B| + b; the identity first.
    pub transversal: Vec<NormalForm>,
    /// Commutators a·b·a⁻¹·b⁻¹ for a, b ≠ 1, indexed (a−1)(|B|−1) + (b−1).
    pub basis: Vec<NormalForm>,
    pub rank: usize,
    order_b: usize,
}

impl CartesianBasis {
    /// Basis index of the commutator with entries (a, b), both nonidentity.
    pub fn index(&self, a: usize, b: usize) -> usize {
        (a - 1) * (self.order_b - 1) + (b - 1)
    }
}

/// A word in the basis of the Cartesian subgroup: (generator, ±1) letters.
pub type BasisWord = Vec<(usize, bool)>;

impl FreeProduct {
    pub fn new(a: FactorSpec, b: FactorSpec) -> Self {
        FreeProduct { factors: [a, b] }
    }

    pub fn finite(a: FiniteGroup, b: FiniteGroup) -> Self {
        FreeProduct::new(FactorSpec::finite(a), FactorSpec::finite(b))
    }

    pub fn factor(&self, i: usize) -> &FactorSpec {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[FactorSpec; 2] {
        &self.factors
    }

    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(FactorSpec::is_finite)
    }

    /// Both factor groups, or `InfiniteFactor`.
    pub fn finite_groups(&self) -> Result<(&FiniteGroup, &FiniteGroup)> {
        match (self.factors[0].group(), self.factors[1].group()) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::InfiniteFactor),
        }
    }

    fn check_syllable(&self, s: Syllable) -> Result<()> {
        if s.factor > 1 {
            return Err(Error::BadSyllable(format!("factor index {}", s.factor)));
        }
        if let FactorSpec::Finite { table } = &self.factors[s.factor] {
            if s.value < 0 || s.value as usize >= table.order() {
                return Err(Error::BadSyllable(format!("element {} out of range for factor {}", s.value, s.factor)));
            }
        }
        Ok(())
    }

    fn mul_values(&self, factor: usize, x: i64, y: i64) -> Result<i64> {
        match &self.factors[factor] {
            FactorSpec::Finite { table } => Ok(table.mul(x as usize, y as usize) as i64),
            FactorSpec::InfiniteCyclic => {
                x.checked_add(y).ok_or_else(|| Error::Overflow(format!("exponent {x} + {y}")))
            }
        }
    }

    fn inv_value(&self, factor: usize, x: i64) -> i64 {
        match &self.factors[factor] {
            FactorSpec::Finite { table } => table.inv(x as usize) as i64,
            FactorSpec::InfiniteCyclic => -x,
        }
    }

    /// Multiplies out adjacent same-factor syllables and drops identities.
    pub fn normalize(&self, raw: &[Syllable]) -> Result<NormalForm> {
        let mut out: Vec<Syllable> = Vec::with_capacity(raw.len());
        for &s in raw {
            self.check_syllable(s)?;
            if s.value == 0 {
                continue;
            }
            match out.last_mut() {
                Some(top) if top.factor == s.factor => {
                    let v = self.mul_values(s.factor, top.value, s.value)?;
                    if v == 0 {
                        out.pop();
                    } else {
                        top.value = v;
                    }
                }
                _ => out.push(s),
            }
        }
        Ok(NormalForm(out))
    }

    /// Parses a raw syllable list into a normal form.
    pub fn word(&self, raw: &[(usize, i64)]) -> Result<NormalForm> {
        let raw: Vec<Syllable> = raw.iter().map(|&(f, v)| Syllable::new(f, v)).collect();
        self.normalize(&raw)
    }

    pub fn multiply(&self, u: &NormalForm, v: &NormalForm) -> Result<NormalForm> {
        let mut raw = u.0.clone();
        raw.extend_from_slice(&v.0);
        self.normalize(&raw)
    }

    pub fn product(&self, words: &[&NormalForm]) -> Result<NormalForm> {
        let raw: Vec<Syllable> = words.iter().flat_map(|w| w.0.iter().copied()).collect();
        self.normalize(&raw)
    }

    pub fn invert(&self, u: &NormalForm) -> NormalForm {
        NormalForm(u.0.iter().rev().map(|s| Syllable::new(s.factor, self.inv_value(s.factor, s.value))).collect())
    }

    /// u^k for any integer k.
    pub fn pow(&self, u: &NormalForm, k: i64) -> Result<NormalForm> {
        let base = if k < 0 { self.invert(u) } else { u.clone() };
        let mut acc = NormalForm::identity();
        for _ in 0..k.unsigned_abs() {
            acc = self.multiply(&acc, &base)?;
        }
        Ok(acc)
    }

    pub fn conjugate(&self, w: &NormalForm, by: &NormalForm) -> Result<NormalForm> {
        self.product(&[&self.invert(by), w, by])
    }

    /// Returns (core, conjugator) with w = conjugator · core · conjugator⁻¹.
    pub fn cyclically_reduce(&self, w: &NormalForm) -> Result<(NormalForm, NormalForm)> {
        let mut core = w.0.clone();
        let mut conj: Vec<Syllable> = Vec::new();
        while core.len() >= 2 && core[0].factor == core[core.len() - 1].factor {
            let s = core[0];
            let last = core[core.len() - 1];
            let merged = self.mul_values(s.factor, last.value, s.value)?;
            conj.push(s);
            core.pop();
            core.remove(0);
            if merged != 0 {
                core.push(Syllable::new(s.factor, merged));
            }
        }
        Ok((NormalForm(core), self.normalize(&conj)?))
    }

    /// Conjugacy in the free product, optionally up to inversion of `y`.
    pub fn is_conjugate(&self, x: &NormalForm, y: &NormalForm, allow_inverse: bool) -> Result<bool> {
        let (cx, _) = self.cyclically_reduce(x)?;
        let (cy, _) = self.cyclically_reduce(y)?;
        if self.cores_conjugate(&cx, &cy) {
            return Ok(true);
        }
        if allow_inverse {
            return Ok(self.cores_conjugate(&cx, &self.invert(&cy)));
        }
        Ok(false)
    }

    fn cores_conjugate(&self, x: &NormalForm, y: &NormalForm) -> bool {
        if x.len() != y.len() {
            return false;
        }
        match x.len() {
            0 => true,
            1 => {
                let (s, t) = (x.0[0], y.0[0]);
                if s.factor != t.factor {
                    return false;
                }
                match &self.factors[s.factor] {
                    FactorSpec::Finite { table } => table.is_conjugate(s.value as usize, t.value as usize),
                    FactorSpec::InfiniteCyclic => s.value == t.value,
                }
            }
            n => (0..n).any(|k| x.rotate(k) == *y),
        }
    }

    /// Writes a cyclically reduced nontrivial w as root^m with m maximal.
    pub fn primitive_root(&self, w: &NormalForm) -> Result<(NormalForm, u64)> {
        if w.is_identity() {
            return Err(Error::TrivialTarget);
        }
        if !w.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced);
        }
        if w.len() == 1 {
            let s = w.0[0];
            return Ok(match &self.factors[s.factor] {
                FactorSpec::InfiniteCyclic => {
                    (NormalForm(vec![Syllable::new(s.factor, s.value.signum())]), s.value.unsigned_abs())
                }
                FactorSpec::Finite { table } => {
                    let n = table.order();
                    let mut best = (s.value as usize, 1u64);
                    for r in 1..n {
                        for m in (best.1 + 1)..=(n as u64) {
                            if table.pow(r, m as i64) == s.value as usize {
                                best = (r, m);
                            }
                        }
                    }
                    (NormalForm(vec![Syllable::new(s.factor, best.0 as i64)]), best.1)
                }
            });
        }
        let n = w.len();
        let period = (1..=n)
            .find(|&d| n.is_multiple_of(d) && (0..n).all(|i| w.0[i] == w.0[(i + d) % n]))
            .unwrap_or(n);
        Ok((NormalForm(w.0[..period].to_vec()), (n / period) as u64))
    }

    /// Image of w in A×B: products of the factor-0 and factor-1 syllables.
    pub fn factor_image(&self, w: &NormalForm) -> Result<(usize, usize)> {
        let (a, b) = self.finite_groups()?;
        let mut img = (0usize, 0usize);
        for s in &w.0 {
            if s.factor == 0 {
                img.0 = a.mul(img.0, s.value as usize);
            } else {
                img.1 = b.mul(img.1, s.value as usize);
            }
        }
        Ok(img)
    }

    pub fn in_cartesian(&self, w: &NormalForm) -> Result<bool> {
        Ok(self.factor_image(w)? == (0, 0))
    }

    /// Least m ≥ 1 with w^m in the Cartesian subgroup.
    pub fn minimal_cartesian_power(&self, w: &NormalForm) -> Result<u64> {
        let (a, b) = self.finite_groups()?;
        let (x, y) = self.factor_image(w)?;
        crate::arith::checked_lcm(a.element_order(x), b.element_order(y))
    }

    pub fn cartesian_basis(&self) -> Result<CartesianBasis> {
        let (a, b) = self.finite_groups()?;
        let (na, nb) = (a.order(), b.order());
        let mut transversal = Vec::with_capacity(na * nb);
        for x in 0..na {
            for y in 0..nb {
                transversal.push(self.word(&[(0, x as i64), (1, y as i64)])?);
            }
        }
        let mut basis = Vec::with_capacity((na - 1) * (nb - 1));
        for x in 1..na {
            for y in 1..nb {
                basis.push(self.word(&[
                    (0, x as i64),
                    (1, y as i64),
                    (0, a.inv(x) as i64),
                    (1, b.inv(y) as i64),
                ])?);
            }
        }
        let rank = basis.len();
        Ok(CartesianBasis { transversal, basis, rank, order_b: nb })
    }

    /// Rewrites w ∈ C as a freely reduced word in the commutator basis.
    ///
    /// The walk of w on the coset graph A×B crosses a commutator edge (a, b)
    /// with a, b ≠ 1 positively when it arrives by a factor-1 syllable and
    /// leaves by a factor-0 syllable.
    pub fn rewrite(&self, basis: &CartesianBasis, w: &NormalForm) -> Result<BasisWord> {
        let (a, b) = self.finite_groups()?;
        if !self.in_cartesian(w)? {
            return Err(Error::NotInCartesian);
        }
        let mut out: BasisWord = Vec::new();
        let mut pos = (0usize, 0usize);
        let mut prev: Option<usize> = None;
        for s in &w.0 {
            if let Some(pf) = prev {
                if pos.0 != 0 && pos.1 != 0 {
                    let letter = (basis.index(pos.0, pos.1), pf == 1);
                    match out.last() {
                        Some(&(g, sign)) if g == letter.0 && sign != letter.1 => {
                            out.pop();
                        }
                        _ => out.push(letter),
                    }
                }
            }
            if s.factor == 0 {
                pos.0 = a.mul(pos.0, s.value as usize);
            } else {
                pos.1 = b.mul(pos.1, s.value as usize);
            }
            prev = Some(s.factor);
        }
        debug_assert_eq!(pos, (0, 0));
        Ok(out)
    }

    /// Multiplies a basis word back into a normal form.
    pub fn evaluate_basis_word(&self, basis: &CartesianBasis, word: &BasisWord) -> Result<NormalForm> {
        let mut raw = Vec::new();
        for &(g, positive) in word {
            let e = &basis.basis[g];
            if positive {
                raw.extend_from_slice(&e.0);
            } else {
                raw.extend_from_slice(&self.invert(e).0);
            }
        }
        self.normalize(&raw)
    }

    /// Random normal form with up to `max_len` syllables (finite factors
    /// draw nonidentity elements, Z factors exponents in ±1..=3).
    pub fn random_word<R: Rng>(&self, rng: &mut R, max_len: usize) -> NormalForm {
        let len = rng.gen_range(0..=max_len);
        let mut factor = rng.gen_range(0..2usize);
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let value = match &self.factors[factor] {
                FactorSpec::Finite { table } if table.order() > 1 => rng.gen_range(1..table.order()) as i64,
                FactorSpec::Finite { .. } => {
                    factor = 1 - factor;
                    continue;
                }
                FactorSpec::InfiniteCyclic => {
                    let v = rng.gen_range(1..=3i64);
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                }
            };
            out.push(Syllable::new(factor, value));
            factor = 1 - factor;
        }
        NormalForm(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    // Z/2 * Z/3 with a = (0,1), b = (1,1), b² = (1,2)
    fn g23() -> FreeProduct {
        FreeProduct::finite(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3))
    }

    fn w(g: &FreeProduct, raw: &[(usize, i64)]) -> NormalForm {
        g.word(raw).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let g = g23();
        assert!(w(&g, &[(0, 1), (0, 1)]).is_identity());
        assert_eq!(w(&g, &[(0, 1), (1, 1), (1, 2)]), w(&g, &[(0, 1)]));
        let abab2 = w(&g, &[(0, 1), (1, 1), (0, 1), (1, 2)]);
        assert_eq!(abab2.len(), 4);
        assert!(matches!(g.word(&[(0, 5)]), Err(Error::BadSyllable(_))));
    }

    #[test]
    fn multiply_and_invert() {
        let g = g23();
        let ab = w(&g, &[(0, 1), (1, 1)]);
        assert_eq!(g.multiply(&ab, &w(&g, &[(1, 2)])).unwrap(), w(&g, &[(0, 1)]));
        assert_eq!(g.invert(&ab), w(&g, &[(1, 2), (0, 1)]));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let u = g.random_word(&mut rng, 8);
            let v = g.random_word(&mut rng, 8);
            let t = g.random_word(&mut rng, 8);
            assert!(g.multiply(&u, &g.invert(&u)).unwrap().is_identity());
            assert_eq!(g.invert(&g.invert(&u)), u);
            assert_eq!(g.normalize(u.syllables()).unwrap(), u);
            let uv = g.multiply(&u, &v).unwrap();
            assert_eq!(g.invert(&uv), g.multiply(&g.invert(&v), &g.invert(&u)).unwrap());
            assert_eq!(
                g.multiply(&uv, &t).unwrap(),
                g.multiply(&u, &g.multiply(&v, &t).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn cyclic_reduction() {
        let g = g23();
        let (core, conj) = g.cyclically_reduce(&w(&g, &[(1, 1), (0, 1), (1, 2)])).unwrap();
        assert_eq!(core, w(&g, &[(0, 1)]));
        assert_eq!(conj, w(&g, &[(1, 1)]));
        // direct multiplication check
        assert_eq!(
            g.product(&[&conj, &core, &g.invert(&conj)]).unwrap(),
            w(&g, &[(1, 1), (0, 1), (1, 2)])
        );
        let ab = w(&g, &[(0, 1), (1, 1)]);
        assert_eq!(g.cyclically_reduce(&ab).unwrap(), (ab.clone(), NormalForm::identity()));
        let id = NormalForm::identity();
        assert_eq!(g.cyclically_reduce(&id).unwrap(), (id.clone(), id));

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2_000 {
            let u = g.random_word(&mut rng, 9);
            let (core, conj) = g.cyclically_reduce(&u).unwrap();
            assert!(core.is_cyclically_reduced());
            assert_eq!(g.product(&[&conj, &core, &g.invert(&conj)]).unwrap(), u);
        }
    }

    /// Searches conjugators of syllable length ≤ `len`.
    fn brute_conjugate(g: &FreeProduct, x: &NormalForm, y: &NormalForm, len: usize) -> bool {
        let mut frontier = vec![NormalForm::identity()];
        let letters = [(0, 1), (1, 1), (1, 2)];
        for _ in 0..=len {
            let mut next = Vec::new();
            for c in &frontier {
                if g.conjugate(x, c).unwrap() == *y {
                    return true;
                }
                for &(f, v) in &letters {
                    if c.last().is_none_or(|s| s.factor != f) {
                        next.push(g.multiply(c, &g.word(&[(f, v)]).unwrap()).unwrap());
                    }
                }
            }
            frontier = next;
        }
        false
    }

    #[test]
    fn conjugacy_examples() {
        let g = g23();
        let ab = w(&g, &[(0, 1), (1, 1)]);
        let ba = w(&g, &[(1, 1), (0, 1)]);
        assert!(g.is_conjugate(&ab, &ba, false).unwrap());
        assert_eq!(g.conjugate(&ab, &w(&g, &[(0, 1)])).unwrap(), ba);
        let ab2 = w(&g, &[(0, 1), (1, 2)]);
        assert!(!g.is_conjugate(&ab, &ab2, false).unwrap());
        assert!(!brute_conjugate(&g, &ab, &ab2, 6));
        let b2a = w(&g, &[(1, 2), (0, 1)]);
        assert!(g.is_conjugate(&ab, &b2a, true).unwrap());
    }

    #[test]
    fn conjugacy_agrees_with_bounded_search() {
        let g = g23();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..150 {
            let x = g.random_word(&mut rng, 4);
            let c = g.random_word(&mut rng, 3);
            let y = g.conjugate(&x, &c).unwrap();
            assert!(g.is_conjugate(&x, &y, false).unwrap());
            assert!(g.is_conjugate(&y, &x, false).unwrap());
            let z = g.random_word(&mut rng, 4);
            let fast = g.is_conjugate(&x, &z, false).unwrap();
            // conjugators of length ≤ |x| + |z| + 2 suffice for words this short
            assert_eq!(fast, brute_conjugate(&g, &x, &z, 5), "{x:?} {z:?}");
        }
    }

    #[test]
    fn powers_of_nonconjugate_hyperbolics_stay_nonconjugate() {
        let g = g23();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        while checked < 200 {
            let (x, _) = g.cyclically_reduce(&g.random_word(&mut rng, 6)).unwrap();
            let (y, _) = g.cyclically_reduce(&g.random_word(&mut rng, 6)).unwrap();
            if x.len() < 2 || y.len() < 2 || g.is_conjugate(&x, &y, false).unwrap() {
                continue;
            }
            for n in 1..=5 {
                let (xn, yn) = (g.pow(&x, n).unwrap(), g.pow(&y, n).unwrap());
                assert!(!g.is_conjugate(&xn, &yn, false).unwrap());
            }
            checked += 1;
        }
    }

    #[test]
    fn primitive_roots() {
        let g = g23();
        let ab = w(&g, &[(0, 1), (1, 1)]);
        let ababab = g.pow(&ab, 3).unwrap();
        assert_eq!(g.primitive_root(&ababab).unwrap(), (ab.clone(), 3));
        assert_eq!(g.primitive_root(&ab).unwrap(), (ab.clone(), 1));
        assert_eq!(g.primitive_root(&w(&g, &[(1, 2)])).unwrap(), (w(&g, &[(1, 1)]), 2));
        let z = FreeProduct::new(FactorSpec::InfiniteCyclic, FactorSpec::InfiniteCyclic);
        assert_eq!(z.primitive_root(&z.word(&[(0, -6)]).unwrap()).unwrap(), (z.word(&[(0, -1)]).unwrap(), 6));
        assert_eq!(g.primitive_root(&w(&g, &[(1, 1), (0, 1), (1, 1)])).unwrap_err(), Error::NotCyclicallyReduced);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let (u, _) = g.cyclically_reduce(&g.random_word(&mut rng, 4)).unwrap();
            if u.len() < 2 {
                continue;
            }
            let k = rng.gen_range(1..4);
            let x = g.pow(&u, k).unwrap();
            let (root, m) = g.primitive_root(&x).unwrap();
            assert_eq!(g.pow(&root, m as i64).unwrap(), x);
            assert_eq!(g.primitive_root(&root).unwrap().1, 1);
            assert_eq!(m % k as u64, 0);
        }
    }

    #[test]
    fn cartesian_membership() {
        let g = g23();
        let abab2 = w(&g, &[(0, 1), (1, 1), (0, 1), (1, 2)]);
        assert_eq!(g.factor_image(&abab2).unwrap(), (0, 0));
        let ab = w(&g, &[(0, 1), (1, 1)]);
        assert_eq!(g.factor_image(&ab).unwrap(), (1, 1));
        assert_eq!(g.factor_image(&NormalForm::identity()).unwrap(), (0, 0));
        assert_eq!(g.minimal_cartesian_power(&ab).unwrap(), 6);
        assert_eq!(g.minimal_cartesian_power(&abab2).unwrap(), 1);
        assert_eq!(g.minimal_cartesian_power(&w(&g, &[(0, 1)])).unwrap(), 2);
        let z = FreeProduct::new(FactorSpec::InfiniteCyclic, FactorSpec::finite(FiniteGroup::cyclic(2)));
        assert_eq!(z.factor_image(&NormalForm::identity()).unwrap_err(), Error::InfiniteFactor);
    }

    #[test]
    fn cartesian_basis_and_rewrite() {
        let g = g23();
        let basis = g.cartesian_basis().unwrap();
        assert_eq!(basis.rank, 2);
        assert_eq!(basis.transversal.len(), 6);
        assert!(basis.transversal[0].is_identity());
        for e in &basis.basis {
            assert!(g.in_cartesian(e).unwrap());
        }
        let abab2 = w(&g, &[(0, 1), (1, 1), (0, 1), (1, 2)]);
        let word = g.rewrite(&basis, &abab2).unwrap();
        assert!(!word.is_empty());
        assert_eq!(g.evaluate_basis_word(&basis, &word).unwrap(), abab2);
        assert!(g.rewrite(&basis, &NormalForm::identity()).unwrap().is_empty());
        assert_eq!(g.rewrite(&basis, &w(&g, &[(0, 1), (1, 1)])).unwrap_err(), Error::NotInCartesian);

        // ranks (|A|−1)(|B|−1) for a few more pairs
        for (na, nb) in [(2, 2), (3, 4), (4, 5)] {
            let h = FreeProduct::finite(FiniteGroup::cyclic(na), FiniteGroup::cyclic(nb));
            assert_eq!(h.cartesian_basis().unwrap().rank, (na - 1) * (nb - 1));
        }
    }

    #[test]
    fn rewrite_round_trips_on_random_cartesian_words() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for (na, nb) in [(2, 3), (3, 4), (2, 2)] {
            let g = FreeProduct::finite(FiniteGroup::cyclic(na), FiniteGroup::cyclic(nb));
            let basis = g.cartesian_basis().unwrap();
            let mut seen = 0;
            while seen < 300 {
                let u = g.random_word(&mut rng, 10);
                if g.in_cartesian(&u).unwrap() {
                    let word = g.rewrite(&basis, &u).unwrap();
                    assert_eq!(g.evaluate_basis_word(&basis, &word).unwrap(), u);
                    seen += 1;
                } else {
                    assert_ne!(g.factor_image(&u).unwrap(), (0, 0));
                }
            }
        }
    }

    #[test]
    fn words_serialize_as_pairs() {
        let g = g23();
        let ab = w(&g, &[(0, 1), (1, 1)]);
        assert_eq!(serde_json::to_string(&ab).unwrap(), "[[0,1],[1,1]]");
        let back: NormalForm = serde_json::from_str("[[0,1],[1,1]]").unwrap();
        assert_eq!(back, ab);
        let spec: FactorSpec = serde_json::from_str(r#"{"type":"infinite_cyclic"}"#).unwrap();
        assert_eq!(spec, FactorSpec::InfiniteCyclic);
    }
}
