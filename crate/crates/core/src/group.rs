//! Finite groups by multiplication table, permutations, factor
//! homomorphisms, quotients and the iterated wreath p-groups used as
//! search targets.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::checked_lcm;
use crate::error::{Error, Result};

/// Default bound for normal subgroup enumeration.
pub const NORMAL_SUBGROUP_BOUND: usize = 128;
/// Default bound on the degree of a wreath p-group.
pub const WREATH_DEGREE_BOUND: usize = 1 << 16;

/// A finite group on `0..n` with identity `0`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct FiniteGroup {
    n: usize,
    table: Vec<usize>,
    inv: Vec<usize>,
}

impl std::fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FiniteGroup(order {})", self.n)
    }
}

impl TryFrom<Vec<Vec<usize>>> for FiniteGroup {
    type Error = Error;
    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self> {
        FiniteGroup::validate(&rows)
    }
}

impl From<FiniteGroup> for Vec<Vec<usize>> {
    fn from(g: FiniteGroup) -> Self {
        g.rows()
    }
}

impl FiniteGroup {
    /// Validates a multiplication table and relabels it so that the
    /// identity is element 0.
    pub fn validate(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotAGroup(format!("row {i} has length {}", row.len())));
            }
            if let Some(&x) = row.iter().find(|&&x| x >= n) {
                return Err(Error::NotAGroup(format!("entry {x} out of range")));
            }
        }
        for i in 0..n {
            let mut seen = vec![false; n];
            for j in 0..n {
                if std::mem::replace(&mut seen[rows[i][j]], true) {
                    return Err(Error::NotAGroup(format!("row {i} not a permutation")));
                }
            }
        }
        for j in 0..n {
            let mut seen = vec![false; n];
            for i in 0..n {
                if std::mem::replace(&mut seen[rows[i][j]], true) {
                    return Err(Error::NotAGroup(format!("column {j} not a permutation")));
                }
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|i| rows[e][i] == i && rows[i][e] == i))
            .ok_or_else(|| Error::NotAGroup("no identity".into()))?;
        // relabel: swap e and 0
        let relabel = |x: usize| {
            if x == e {
                0
            } else if x == 0 {
                e
            } else {
                x
            }
        };
        let mut table = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                table[relabel(i) * n + relabel(j)] = relabel(rows[i][j]);
            }
        }
        let mut inv = vec![usize::MAX; n];
        for i in 0..n {
            for j in 0..n {
                if table[i * n + j] == 0 {
                    if table[j * n + i] != 0 {
                        return Err(Error::NotAGroup(format!("{i} has no two-sided inverse")));
                    }
                    inv[i] = j;
                }
            }
        }
        let g = FiniteGroup { n, table, inv };
        g.check_associativity()?;
        Ok(g)
    }

    fn check_associativity(&self) -> Result<()> {
        let n = self.n;
        let bad = |a: usize, b: usize, c: usize| self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c));
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if bad(a, b, c) {
                            return Err(Error::NotAGroup(format!("({a}·{b})·{c} ≠ {a}·({b}·{c})")));
                        }
                    }
                }
            }
        } else {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..10_000 {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if bad(a, b, c) {
                    return Err(Error::NotAGroup(format!("({a}·{b})·{c} ≠ {a}·({b}·{c})")));
                }
            }
        }
        Ok(())
    }

    /// Cyclic group Z/n with generator 1.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let table = (0..n * n).map(|k| (k / n + k % n) % n).collect();
        let inv = (0..n).map(|i| (n - i) % n).collect();
        FiniteGroup { n, table, inv }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn pow(&self, x: usize, k: i64) -> usize {
        let ord = self.element_order(x) as i64;
        let k = k.rem_euclid(ord);
        (0..k).fold(0, |acc, _| self.mul(acc, x))
    }

    /// Least k ≥ 1 with x^k = 1.
    pub fn element_order(&self, x: usize) -> u64 {
        let mut k = 1;
        let mut y = x;
        while y != 0 {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    /// Set of orders of nontrivial elements.
    pub fn nontrivial_orders(&self) -> BTreeSet<u64> {
        (1..self.n).map(|x| self.element_order(x)).collect()
    }

    pub fn conjugate(&self, x: usize, g: usize) -> usize {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn is_conjugate(&self, x: usize, y: usize) -> bool {
        (0..self.n).any(|g| self.conjugate(x, g) == y)
    }

    pub fn conjugacy_classes(&self) -> Vec<BTreeSet<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for x in 0..self.n {
            if seen[x] {
                continue;
            }
            let cls: BTreeSet<usize> = (0..self.n).map(|g| self.conjugate(x, g)).collect();
            for &y in &cls {
                seen[y] = true;
            }
            out.push(cls);
        }
        out
    }

    /// Subgroup generated by `gens` (closure under products).
    pub fn closure(&self, gens: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::from([0]);
        let mut frontier: Vec<usize> = vec![0];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    pub fn is_normal_subgroup(&self, sub: &BTreeSet<usize>) -> bool {
        sub.contains(&0)
            && sub.iter().all(|&x| {
                sub.contains(&self.inv(x))
                    && sub.iter().all(|&y| sub.contains(&self.mul(x, y)))
                    && (0..self.n).all(|g| sub.contains(&self.conjugate(x, g)))
            })
    }

    /// All normal subgroups, sorted by size and then lexicographically.
    /// Built as joins of normal closures of conjugacy classes.
    pub fn normal_subgroups(&self, bound: usize) -> Result<Vec<BTreeSet<usize>>> {
        if self.n > bound {
            return Err(Error::BudgetExceeded(format!(
                "normal subgroup enumeration for order {} > {bound}",
                self.n
            )));
        }
        let classes = self.conjugacy_classes();
        let mut found: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        found.insert(BTreeSet::from([0]));
        let mut frontier: Vec<BTreeSet<usize>> = vec![BTreeSet::from([0])];
        while let Some(n) = frontier.pop() {
            for cls in &classes {
                if cls.is_subset(&n) {
                    continue;
                }
                let gens: BTreeSet<usize> = n.union(cls).copied().collect();
                let joined = self.closure(&gens);
                if found.insert(joined.clone()) {
                    frontier.push(joined);
                }
            }
        }
        let mut out: Vec<_> = found.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    /// Quotient by a normal subgroup with the canonical projection.
    /// Cosets are numbered by their least element, so the identity coset is 0.
    pub fn quotient(&self, normal: &BTreeSet<usize>) -> Result<(FiniteGroup, FactorHom)> {
        if !self.is_normal_subgroup(normal) {
            return Err(Error::NotNormal);
        }
        let mut coset_of = vec![usize::MAX; self.n];
        let mut reps = Vec::new();
        for x in 0..self.n {
            if coset_of[x] != usize::MAX {
                continue;
            }
            let idx = reps.len();
            reps.push(x);
            for &k in normal {
                coset_of[self.mul(x, k)] = idx;
            }
        }
        let m = reps.len();
        let rows: Vec<Vec<usize>> = (0..m)
            .map(|i| (0..m).map(|j| coset_of[self.mul(reps[i], reps[j])]).collect())
            .collect();
        let target = FiniteGroup::validate(&rows)?;
        let hom = FactorHom::finite(self.clone(), target.clone(), coset_of)?;
        Ok((target, hom))
    }
}

/// A bijection on `0..degree`, composed left to right: `(x)(g·h) = ((x)g)h`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    map: Vec<usize>,
}

impl std::fmt::Debug for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Perm{:?}", self.map)
    }
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation { map: (0..degree).collect() }
    }

    pub fn from_vec(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &x in &map {
            if x >= map.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::Parse("permutation is not a bijection".into()));
            }
        }
        Ok(Permutation { map })
    }

    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Self {
        let mut map: Vec<usize> = (0..degree).collect();
        for c in cycles {
            for i in 0..c.len() {
                map[c[i]] = c[(i + 1) % c.len()];
            }
        }
        Permutation { map }
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// First `self`, then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation { map: self.map.iter().map(|&x| other.map[x]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            map[x] = i;
        }
        Permutation { map }
    }

    pub fn pow(&self, k: u64) -> Permutation {
        let mut acc = Permutation::identity(self.degree());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            k >>= 1;
        }
        acc
    }

    /// Cycle lengths, one entry per cycle.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.map.len()];
        let mut out = Vec::new();
        for s in 0..self.map.len() {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = self.map[x];
                len += 1;
            }
            out.push(len);
        }
        out
    }

    /// lcm of cycle lengths.
    pub fn order(&self) -> Result<u64> {
        let mut lens = self.cycle_lengths();
        lens.sort_unstable();
        lens.dedup();
        lens.into_iter().try_fold(1u64, |acc, l| checked_lcm(acc, l as u64))
    }
}

/// Either a finite group or the infinite cyclic group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomSource {
    Finite(FiniteGroup),
    InfiniteCyclic,
}

/// A homomorphism from a factor onto a finite group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FactorHomJson", into = "FactorHomJson")]
pub struct FactorHom {
    pub source: HomSource,
    pub target: FiniteGroup,
    /// Element-wise images for a finite source; a single entry (the image
    /// of the generator) for an infinite cyclic source.
    pub map: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct FactorHomJson {
    source: crate::words::FactorSpec,
    target: FiniteGroup,
    map: Vec<usize>,
}

impl From<FactorHom> for FactorHomJson {
    fn from(h: FactorHom) -> Self {
        let source = match h.source {
            HomSource::Finite(g) => crate::words::FactorSpec::finite(g),
            HomSource::InfiniteCyclic => crate::words::FactorSpec::InfiniteCyclic,
        };
        FactorHomJson { source, target: h.target, map: h.map }
    }
}

impl TryFrom<FactorHomJson> for FactorHom {
    type Error = Error;

    fn try_from(j: FactorHomJson) -> Result<Self> {
        let source = match j.source {
            crate::words::FactorSpec::Finite { table } => HomSource::Finite(table),
            crate::words::FactorSpec::InfiniteCyclic => HomSource::InfiniteCyclic,
        };
        let h = FactorHom { source, target: j.target, map: j.map };
        h.check()?;
        Ok(h)
    }
}

impl FactorHom {
    /// Element order of the image of a factor element.
    pub fn image_order(&self, value: i64) -> u64 {
        self.target.element_order(self.apply(value))
    }

    pub fn finite(source: FiniteGroup, target: FiniteGroup, map: Vec<usize>) -> Result<Self> {
        let h = FactorHom { source: HomSource::Finite(source), target, map };
        h.check()?;
        Ok(h)
    }

    pub fn identity(g: &FiniteGroup) -> Self {
        FactorHom { source: HomSource::Finite(g.clone()), target: g.clone(), map: (0..g.order()).collect() }
    }

    /// Z → Z/M, generator ↦ 1.
    pub fn modulus(m: usize) -> Self {
        FactorHom { source: HomSource::InfiniteCyclic, target: FiniteGroup::cyclic(m), map: vec![1 % m] }
    }

    /// Image order M for an infinite cyclic source.
    pub fn modulus_value(&self) -> Option<usize> {
        match self.source {
            HomSource::InfiniteCyclic => Some(self.target.order()),
            HomSource::Finite(_) => None,
        }
    }

    /// Image of an element (an index for finite sources, an exponent for Z).
    pub fn apply(&self, value: i64) -> usize {
        match &self.source {
            HomSource::Finite(_) => self.map[value as usize],
            HomSource::InfiniteCyclic => self.target.pow(self.map[0], value),
        }
    }

    /// Checks the homomorphism law exhaustively for a finite source.
    pub fn check(&self) -> Result<()> {
        match &self.source {
            HomSource::Finite(src) => {
                if self.map.len() != src.order() || self.map.iter().any(|&x| x >= self.target.order()) {
                    return Err(Error::Precondition("factor hom map has the wrong shape".into()));
                }
                for x in 0..src.order() {
                    for y in 0..src.order() {
                        if self.map[src.mul(x, y)] != self.target.mul(self.map[x], self.map[y]) {
                            return Err(Error::Precondition(format!("hom law fails at ({x},{y})")));
                        }
                    }
                }
                Ok(())
            }
            HomSource::InfiniteCyclic => {
                if self.map.len() != 1 || self.map[0] >= self.target.order() {
                    return Err(Error::Precondition("Z hom needs one generator image".into()));
                }
                Ok(())
            }
        }
    }
}

/// The iterated wreath product of m copies of Z/p acting on the p^m leaves
/// of a p-ary tree of depth m. Points are numbers in base p; the most
/// significant digit sits at the top of the tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WreathPGroup {
    pub p: usize,
    pub m: u32,
}

impl WreathPGroup {
    pub fn new(p: usize, m: u32, bound: usize) -> Result<Self> {
        if !crate::arith::is_prime(p as u64) || m == 0 {
            return Err(Error::Precondition(format!("wreath group needs a prime and m ≥ 1, got ({p},{m})")));
        }
        match p.checked_pow(m) {
            Some(d) if d <= bound => Ok(WreathPGroup { p, m }),
            _ => Err(Error::BudgetExceeded(format!("wreath degree {p}^{m} over bound {bound}"))),
        }
    }

    pub fn degree(&self) -> usize {
        self.p.pow(self.m)
    }

    /// log_p of the group order: (p^m − 1)/(p − 1).
    pub fn log_order(&self) -> u32 {
        (self.degree() as u32 - 1) / (self.p as u32 - 1)
    }

    /// Tree automorphism that adds `shift(level, prefix)` to the digit at
    /// each level, where `prefix` is the original value of the digits above.
    fn tree_automorphism(&self, mut shift: impl FnMut(u32, usize) -> usize) -> Permutation {
        let p = self.p;
        let d = self.degree();
        // shifts are looked up once per (level, prefix)
        let mut shifts: Vec<Vec<usize>> = Vec::with_capacity(self.m as usize);
        for level in 0..self.m {
            let count = p.pow(level);
            shifts.push((0..count).map(|prefix| shift(level, prefix) % p).collect());
        }
        let map = (0..d)
            .map(|x| {
                let mut out = 0;
                let mut prefix = 0;
                for level in 0..self.m {
                    let place = p.pow(self.m - 1 - level);
                    let digit = (x / place) % p;
                    let moved = (digit + shifts[level as usize][prefix]) % p;
                    out += moved * place;
                    prefix = prefix * p + digit;
                }
                out
            })
            .collect();
        Permutation { map }
    }

    /// Generators: for each level, rotate that digit when all digits above
    /// it are zero.
    pub fn generators(&self) -> Vec<Permutation> {
        (0..self.m)
            .map(|lv| self.tree_automorphism(|level, prefix| usize::from(level == lv && prefix == 0)))
            .collect()
    }

    /// The odometer x ↦ x + 1 mod p^m, an element of order p^m.
    pub fn odometer(&self) -> Permutation {
        let d = self.degree();
        Permutation { map: (0..d).map(|x| (x + 1) % d).collect() }
    }

    /// Uniformly random element.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Permutation {
        let p = self.p;
        self.tree_automorphism(|_, _| rng.gen_range(0..p))
    }
}

/// A finite permutation group listed element by element, used as the
/// fibre of regular induced graphs.
#[derive(Clone, Debug)]
pub struct EnumeratedGroup {
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
}

impl EnumeratedGroup {
    /// Closure of `gens`; identity first, then breadth-first order.
    pub fn generate(gens: &[Permutation], cap: usize) -> Result<Self> {
        let degree = gens.first().map_or(1, |g| g.degree());
        let id = Permutation::identity(degree);
        let mut elements = vec![id.clone()];
        let mut index = HashMap::from([(id, 0usize)]);
        let mut head = 0;
        while head < elements.len() {
            let x = elements[head].clone();
            head += 1;
            for g in gens {
                let y = x.then(g);
                if !index.contains_key(&y) {
                    if elements.len() >= cap {
                        return Err(Error::BudgetExceeded(format!("group closure over {cap} elements")));
                    }
                    index.insert(y.clone(), elements.len());
                    elements.push(y);
                }
            }
        }
        Ok(EnumeratedGroup { elements, index })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn index_of(&self, g: &Permutation) -> Option<usize> {
        self.index.get(g).copied()
    }

    /// The permutation h ↦ h·g of the element indices (regular action).
    pub fn right_regular(&self, g: &Permutation) -> Permutation {
        Permutation {
            map: self.elements.iter().map(|h| self.index[&h.then(g)]).collect(),
        }
    }
}

/// Direct product of permutation groups acting on the disjoint union of
/// their point sets.
pub fn disjoint_union(a: &Permutation, b: &Permutation) -> Permutation {
    let off = a.degree();
    let mut map = a.map.clone();
    map.extend(b.map.iter().map(|&x| x + off));
    Permutation { map }
}
