//! Three targets, at least one lying in a factor: the factor quotients are
//! chosen so the factor targets already get distinct orders, and
//! hyperbolic targets are then separated as in the general case.

use crate::error::{Error, Result};
use crate::group::{FactorHom, Permutation};
use crate::words::NormalForm;

use super::reduce::{images_separable, search_pair, Candidate};
use super::{assemble_certificate, check_hypotheses, run_theorem12, stage, CertComponent, Certificate, Checked};
use super::Instance;

/// How the targets sit relative to the factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// `u` nontrivial in factor `fa`, `v` in the other factor or trivial,
    /// `w` hyperbolic if present.
    Mixed { fa: usize, u: usize, v: usize, w: Option<usize> },
    /// `u` and `v` in factor `fa` (`u` trivial if either is), `w`
    /// nontrivial in the other factor.
    SameFactor { fa: usize, u: usize, v: usize, w: usize },
}

fn in_factor(w: &NormalForm, f: usize) -> bool {
    w.is_identity() || (w.len() == 1 && w.first().is_some_and(|s| s.factor == f))
}

fn nontrivial_in(w: &NormalForm, f: usize) -> bool {
    w.len() == 1 && in_factor(w, f)
}

/// Matches at most three cyclically reduced targets against the two cases.
pub fn match_case(checked: &Checked) -> Option<Case> {
    let t = &checked.cores;
    if t.len() > 3 {
        return None;
    }
    for fa in 0..2 {
        let fb = 1 - fa;
        for u in (0..t.len()).filter(|&u| nontrivial_in(&t[u], fa)) {
            let others: Vec<usize> = (0..t.len()).filter(|&i| i != u).collect();
            let vs: Vec<usize> = others.iter().copied().filter(|&i| in_factor(&t[i], fb)).collect();
            let ws: Vec<usize> = others.iter().copied().filter(|&i| t[i].len() >= 2).collect();
            if vs.len() == 1 && ws.len() + 1 == others.len() && ws.len() <= 1 {
                return Some(Case::Mixed { fa, u, v: vs[0], w: ws.first().copied() });
            }
        }
    }
    if t.len() == 3 {
        for fa in 0..2 {
            let fb = 1 - fa;
            let Some(w) = (0..3).find(|&i| nontrivial_in(&t[i], fb)) else { continue };
            let mut uv: Vec<usize> = (0..3).filter(|&i| i != w).collect();
            if !uv.iter().all(|&i| in_factor(&t[i], fa)) {
                continue;
            }
            if t[uv[1]].is_identity() {
                uv.swap(0, 1);
            }
            return Some(Case::SameFactor { fa, u: uv[0], v: uv[1], w });
        }
    }
    None
}

/// Divisors d > 1 of n.
fn divisors(n: u64) -> Vec<u64> {
    (2..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Order of a factor element, `None` when infinite.
fn factor_order(checked: &Checked, w: &NormalForm) -> Option<u64> {
    match w.first() {
        None => Some(1),
        Some(s) => checked.fp.factor(s.factor).element_order(s.value),
    }
}

fn value(w: &NormalForm) -> i64 {
    w.first().map_or(0, |s| s.value)
}

/// The candidate pair reordered from (fa, fb) to factor indices.
fn by_factor<T>(fa: usize, xa: T, xb: T) -> [T; 2] {
    if fa == 0 {
        [xa, xb]
    } else {
        [xb, xa]
    }
}

/// Every syllable of `w` in factor `f` keeps a nontrivial image.
fn preserves(c: &Candidate, w: Option<&NormalForm>, f: usize) -> bool {
    w.is_none_or(|w| w.syllables().iter().filter(|s| s.factor == f).all(|s| !c.kills(s.value)))
}

pub fn run_theorem3(inst: &Instance) -> Result<Certificate> {
    let checked = check_hypotheses(inst)?;
    if checked.cores.len() > 3 {
        return Err(Error::Precondition(format!("{} targets; the mixed case takes at most 3", checked.cores.len())));
    }
    match match_case(&checked) {
        None => run_theorem12(inst),
        Some(Case::Mixed { fa, u, v, w }) => mixed(inst, &checked, fa, u, v, w),
        Some(Case::SameFactor { fa, u, v, w }) => same_factor(inst, &checked, fa, u, v, w),
    }
}

fn mixed(inst: &Instance, checked: &Checked, fa: usize, u: usize, v: usize, w: Option<usize>) -> Result<Certificate> {
    let t = &checked.cores;
    let fb = 1 - fa;
    let (uv, vv) = (value(&t[u]), value(&t[v]));
    let v_order = factor_order(checked, &t[v]);
    let w_word = w.map(|i| &t[i]);
    let filter_a = Box::new(move |c: &Candidate| {
        !c.kills(uv)
            && preserves(c, w_word, fa)
            && v_order.is_none_or(|s| divisors(s).iter().all(|&d| d % c.image_order(uv) != 0))
    });
    let filter_b = Box::new(move |c: &Candidate| preserves(c, w_word, fb));
    let filters = by_factor(fa, filter_a as Box<dyn Fn(&Candidate) -> bool>, filter_b);
    let joint = |c0: &Candidate, c1: &Candidate| -> Result<bool> {
        let [ca, cb] = by_factor(fa, c0, c1);
        if vv != 0 && ca.image_order(uv) % cb.image_order(vv) == 0 {
            return Ok(false);
        }
        Ok(images_separable(checked, &[c0.hom()?, c1.hom()?])?.is_some())
    };
    let [c0, c1] = search_pair(&checked.fp, inst.config.modulus_bound, filters, joint)?;
    let homs = [c0.hom()?, c1.hom()?];
    let transcript = vec![format!(
        "mixed case: target {u} in factor {fa}, target {v} in factor {fb}{}; quotients of orders {} and {}",
        w.map_or(String::new(), |w| format!(", target {w} hyperbolic")),
        homs[0].target.order(),
        homs[1].target.order()
    )];
    stage::separate_finite(inst, checked, homs, transcript)
}

fn same_factor(inst: &Instance, checked: &Checked, fa: usize, u: usize, v: usize, w: usize) -> Result<Certificate> {
    let t = &checked.cores;
    let fb = 1 - fa;
    let (uv, vv, wv) = (value(&t[u]), value(&t[v]), value(&t[w]));
    if uv != 0 {
        // both nontrivial: distinct orders in a quotient of factor fa,
        // certified by the retraction killing factor fb
        let filter_a = Box::new(move |c: &Candidate| {
            !c.kills(uv) && !c.kills(vv) && c.image_order(uv) != c.image_order(vv)
        }) as Box<dyn Fn(&Candidate) -> bool>;
        let filter_b = Box::new(|_: &Candidate| true) as Box<dyn Fn(&Candidate) -> bool>;
        let filters = by_factor(fa, filter_a, filter_b);
        let [c0, c1] = search_pair(&checked.fp, inst.config.modulus_bound, filters, |_, _| Ok(true))?;
        let homs = [c0.hom()?, c1.hom()?];
        let component = retraction(&homs, fa);
        let transcript = vec![format!(
            "same-factor case: targets {u},{v} in factor {fa} separated by a quotient of order {}, \
             target {w} killed by the retraction onto it",
            homs[fa].target.order()
        )];
        return assemble_certificate(inst, homs, vec![component], transcript);
    }
    // u trivial: v and w get distinct nontrivial orders in A×B quotients
    let v_order = factor_order(checked, &t[v]);
    let w_order = factor_order(checked, &t[w]);
    let w_first = w_order.is_some() || v_order.is_none();
    let filter_a = Box::new(move |c: &Candidate| {
        !c.kills(vv)
            && (!w_first || w_order.is_none_or(|s| divisors(s).iter().all(|&d| d % c.image_order(vv) != 0)))
    }) as Box<dyn Fn(&Candidate) -> bool>;
    let filter_b = Box::new(move |c: &Candidate| {
        !c.kills(wv)
            && (w_first || v_order.is_none_or(|s| divisors(s).iter().all(|&d| d % c.image_order(wv) != 0)))
    }) as Box<dyn Fn(&Candidate) -> bool>;
    let filters = by_factor(fa, filter_a, filter_b);
    let joint = |c0: &Candidate, c1: &Candidate| -> Result<bool> {
        let [ca, cb] = by_factor(fa, c0, c1);
        let (ov, ow) = (ca.image_order(vv), cb.image_order(wv));
        Ok(if w_first { ov % ow != 0 } else { ow % ov != 0 })
    };
    let [c0, c1] = search_pair(&checked.fp, inst.config.modulus_bound, filters, joint)?;
    let homs = [c0.hom()?, c1.hom()?];
    let transcript = vec![format!(
        "same-factor case with trivial target {u}: target {v} in factor {fa}, target {w} in factor {fb}; \
         quotients of orders {} and {}",
        homs[0].target.order(),
        homs[1].target.order()
    )];
    stage::separate_finite(inst, checked, homs, transcript)
}

/// Right regular action of the factor-`fa` quotient, with the other factor
/// acting trivially.
fn retraction(homs: &[FactorHom; 2], fa: usize) -> CertComponent {
    let g = &homs[fa].target;
    let n = g.order();
    let regular: Vec<Permutation> = (0..n)
        .map(|x| Permutation::from_vec((0..n).map(|y| g.mul(y, x)).collect()).expect("right multiplication"))
        .collect();
    let trivial = vec![Permutation::identity(n); homs[1 - fa].target.order()];
    let images = by_factor(fa, regular, trivial);
    CertComponent::Perm { degree: n, images, note: format!("retraction onto factor {fa}") }
}
