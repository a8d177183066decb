//! Independent certificate checking and a brute-force oracle.
//!
//! The checker reads raw action arrays and permutation images and walks
//! words itself; it shares no word-action code with the graph module.

mod oracle;

use num_integer::Integer;
use serde::Serialize;

use crate::group::{FactorHom, FiniteGroup, HomSource};
use crate::pipeline::{CertComponent, Certificate, Instance};
use crate::words::FactorSpec;

pub use oracle::{brute_force_search, OracleResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    /// Recomputed order of each original target.
    pub orders: Vec<u64>,
    /// `distinct[i][j]` whether targets i and j got different orders.
    pub distinct: Vec<Vec<bool>>,
    pub checks: Vec<String>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Element actions of one component: `act(f, c, x)` for c ≠ 0.
enum Action<'a> {
    Graph(&'a [Vec<Vec<usize>>; 2]),
    Perm(&'a [Vec<crate::group::Permutation>; 2]),
}

impl Action<'_> {
    fn act(&self, f: usize, c: usize, x: usize) -> usize {
        if c == 0 {
            return x;
        }
        match self {
            Action::Graph(a) => a[f][x][c - 1],
            Action::Perm(images) => images[f][c].as_slice()[x],
        }
    }
}

pub fn verify_certificate(inst: &Instance, cert: &Certificate) -> VerifyReport {
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    let n = inst.targets.len();
    let targets = [&cert.factor_homs[0].target, &cert.factor_homs[1].target];

    checks.push("factor homomorphisms".to_string());
    for f in 0..2 {
        if let Err(e) = check_hom(&inst.factors[f], &cert.factor_homs[f]) {
            failures.push(format!("factor hom {f}: {e}"));
        }
    }
    let mut degrees = Vec::new();
    for (k, c) in cert.components.iter().enumerate() {
        checks.push(format!("component {k} structure"));
        match check_component(c, targets) {
            Ok(d) => degrees.push(d),
            Err(e) => failures.push(format!("component {k}: {e}")),
        }
    }
    if !failures.is_empty() {
        return VerifyReport { orders: Vec::new(), distinct: Vec::new(), checks, failures, pass: false };
    }

    checks.push("target orders".to_string());
    let mut orders = vec![1u64; n];
    for (i, t) in inst.targets.iter().enumerate() {
        let Some(word) = map_target(inst, cert, t.syllables()) else {
            failures.push(format!("target {i} has a syllable outside its factor"));
            continue;
        };
        for (c, &d) in cert.components.iter().zip(&degrees) {
            let action = match c {
                CertComponent::Graph { graph, .. } => Action::Graph(graph.raw_action()),
                CertComponent::Perm { images, .. } => Action::Perm(images),
            };
            let image: Vec<usize> =
                (0..d).map(|x| word.iter().fold(x, |y, &(f, e)| action.act(f, e, y))).collect();
            match cycle_lcm(&image).and_then(|o| o.checked_lcm_u64(orders[i])) {
                Some(o) => orders[i] = o,
                None => failures.push(format!("target {i}: order overflows")),
            }
        }
    }

    checks.push("claimed orders".to_string());
    if cert.orders.len() != n || cert.orders.keys().copied().ne(0..n) {
        failures.push(format!("claimed≠recomputed: {} claims for {n} targets", cert.orders.len()));
    } else {
        for (i, &o) in orders.iter().enumerate() {
            if cert.orders[&i] != o {
                failures.push(format!("claimed≠recomputed: target {i} claims {}, recomputed {o}", cert.orders[&i]));
            }
        }
    }

    checks.push("pairwise distinct orders".to_string());
    let distinct: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || orders[i] != orders[j]).collect()).collect();
    for j in 1..n {
        for i in 0..j {
            if !distinct[i][j] {
                failures.push(format!("targets {i} and {j} share the order {}", orders[i]));
            }
        }
    }
    let pass = failures.is_empty();
    VerifyReport { orders, distinct, checks, failures, pass }
}

trait CheckedLcm {
    fn checked_lcm_u64(self, other: u64) -> Option<u64>;
}

impl CheckedLcm for u64 {
    fn checked_lcm_u64(self, other: u64) -> Option<u64> {
        (self / self.gcd(&other)).checked_mul(other)
    }
}

/// Order of a permutation given as an image list; `None` on overflow.
fn cycle_lcm(image: &[usize]) -> Option<u64> {
    let mut seen = vec![false; image.len()];
    let mut order = 1u64;
    for start in 0..image.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = image[x];
            len += 1;
        }
        order = order.checked_lcm_u64(len)?;
    }
    Some(order)
}

fn table(g: &FiniteGroup) -> Vec<Vec<usize>> {
    g.rows()
}

fn check_hom(source: &FactorSpec, hom: &FactorHom) -> Result<(), String> {
    let t = table(&hom.target);
    let n = t.len();
    if hom.map.iter().any(|&x| x >= n) {
        return Err("image outside the target".into());
    }
    match (source, &hom.source) {
        (FactorSpec::Finite { table: src }, HomSource::Finite(s)) if src == s => {
            let s = table(src);
            if hom.map.len() != s.len() {
                return Err("map length differs from the factor order".into());
            }
            for x in 0..s.len() {
                for y in 0..s.len() {
                    if hom.map[s[x][y]] != t[hom.map[x]][hom.map[y]] {
                        return Err(format!("hom law fails at ({x},{y})"));
                    }
                }
            }
            Ok(())
        }
        (FactorSpec::InfiniteCyclic, HomSource::InfiniteCyclic) if hom.map.len() == 1 => Ok(()),
        _ => Err("source does not match the instance factor".into()),
    }
}

/// Checks shapes, bijectivity (property (1)), and freeness with the group
/// law (property (2)); returns the number of points.
fn check_component(c: &CertComponent, targets: [&FiniteGroup; 2]) -> Result<usize, String> {
    match c {
        CertComponent::Graph { graph, .. } => {
            if graph.factors()[0] != *targets[0] || graph.factors()[1] != *targets[1] {
                return Err("graph factors differ from the hom targets".into());
            }
            let action = graph.raw_action();
            let v = graph.vcount();
            for f in 0..2 {
                let t = table(targets[f]);
                let k = t.len();
                if action[f].len() != v || action[f].iter().any(|row| row.len() != k - 1) {
                    return Err(format!("factor {f} action has the wrong shape"));
                }
                for c in 1..k {
                    let mut hit = vec![false; v];
                    for row in &action[f] {
                        let y = row[c - 1];
                        if y >= v || std::mem::replace(&mut hit[y], true) {
                            return Err(format!("property (1): element {c} of factor {f} is not a bijection"));
                        }
                    }
                }
                let act = |x: usize, c: usize| if c == 0 { x } else { action[f][x][c - 1] };
                for x in 0..v {
                    for c in 1..k {
                        if act(x, c) == x {
                            return Err(format!("property (2): element {c} of factor {f} fixes vertex {x}"));
                        }
                        for d in 1..k {
                            if act(act(x, c), d) != act(x, t[c][d]) {
                                return Err(format!("property (2): action law fails at vertex {x}"));
                            }
                        }
                    }
                }
            }
            Ok(v)
        }
        CertComponent::Perm { degree, images, .. } => {
            for f in 0..2 {
                let t = table(targets[f]);
                if images[f].len() != t.len() {
                    return Err(format!("factor {f} has {} images for {} elements", images[f].len(), t.len()));
                }
                for p in &images[f] {
                    let s = p.as_slice();
                    let mut hit = vec![false; *degree];
                    if s.len() != *degree || s.iter().any(|&y| y >= *degree || std::mem::replace(&mut hit[y], true)) {
                        return Err(format!("factor {f} image is not a permutation of {degree} points"));
                    }
                }
                for x in 0..t.len() {
                    for y in 0..t.len() {
                        let (px, py, pxy) = (images[f][x].as_slice(), images[f][y].as_slice(), images[f][t[x][y]].as_slice());
                        if (0..*degree).any(|z| py[px[z]] != pxy[z]) {
                            return Err(format!("factor {f} images break the hom law at ({x},{y})"));
                        }
                    }
                }
            }
            Ok(*degree)
        }
    }
}

/// Image of an instance word as (factor, target element) pairs.
fn map_target(inst: &Instance, cert: &Certificate, word: &[crate::words::Syllable]) -> Option<Vec<(usize, usize)>> {
    word.iter()
        .map(|s| {
            let hom = cert.factor_homs.get(s.factor)?;
            let t = table(&hom.target);
            let e = match &inst.factors[s.factor] {
                FactorSpec::Finite { table: src } => {
                    if s.value < 0 || s.value as usize >= src.order() {
                        return None;
                    }
                    hom.map[s.value as usize]
                }
                FactorSpec::InfiniteCyclic => {
                    let g = hom.map[0];
                    let n = t.len() as i64;
                    let k = s.value.rem_euclid(n);
                    (0..k).fold(0usize, |acc, _| t[acc][g])
                }
            };
            Some((s.factor, e))
        })
        .collect()
}
