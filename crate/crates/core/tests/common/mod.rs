//! Helpers shared by integration tests: a word walker over raw action
//! arrays and random generators for graphs and words.

#![allow(dead_code)]

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;

use ordsep::graph::CoverGraph;
use ordsep::group::FiniteGroup;
use ordsep::words::{FreeProduct, NormalForm};

/// Order of the permutation induced by `w`, found by following the action
/// arrays syllable by syllable and taking the lcm of cycle lengths.
pub fn walk_order(g: &CoverGraph, w: &NormalForm) -> u64 {
    let action = g.raw_action();
    let n = g.vcount();
    let image: Vec<usize> = (0..n)
        .map(|v| {
            w.syllables().iter().fold(v, |x, s| {
                let c = s.value as usize;
                if c == 0 {
                    x
                } else {
                    action[s.factor][x][c - 1]
                }
            })
        })
        .collect();
    let mut seen = vec![false; n];
    let mut order = 1u64;
    for start in 0..n {
        let mut len = 0u64;
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            v = image[v];
            len += 1;
        }
        if len > 0 {
            order = order.lcm(&len);
        }
    }
    order
}

/// A random graph on which both factors act freely: each factor's vertex
/// set is cut into random blocks of the group's size, and each block is
/// labelled by a random bijection with the group.
pub fn random_cover_graph<R: Rng>(rng: &mut R, a: &FiniteGroup, b: &FiniteGroup, blocks: usize) -> CoverGraph {
    let n = blocks * a.order().lcm(&b.order());
    let mut action: [Vec<Vec<usize>>; 2] = [vec![Vec::new(); n], vec![Vec::new(); n]];
    for (f, group) in [a, b].into_iter().enumerate() {
        let k = group.order();
        let mut vertices: Vec<usize> = (0..n).collect();
        vertices.shuffle(rng);
        for block in vertices.chunks(k) {
            // block[x] carries the label x
            for (x, &v) in block.iter().enumerate() {
                action[f][v] = (1..k).map(|c| block[group.mul(x, c)]).collect();
            }
        }
    }
    CoverGraph::from_parts([a.clone(), b.clone()], action).expect("free actions")
}

/// A random cyclically reduced word of Z/2 * Z/3 alternating between the
/// factors, with an even number of syllables between 2 and `max_len`.
pub fn random_hyperbolic_word<R: Rng>(rng: &mut R, fp: &FreeProduct, max_len: usize) -> NormalForm {
    let half = rng.gen_range(1..=max_len / 2);
    let first = rng.gen_range(0..2usize);
    let raw: Vec<(usize, i64)> = (0..2 * half)
        .map(|i| {
            let f = (first + i) % 2;
            (f, if f == 0 { 1 } else { rng.gen_range(1..=2) })
        })
        .collect();
    fp.word(&raw).expect("alternating word")
}
