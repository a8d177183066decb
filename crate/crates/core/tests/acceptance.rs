//! Acceptance suite: one line per criterion, with its tolerance and
//! runtime limit. Exits nonzero if any criterion fails.
//!
//! Orders are recomputed here by walking raw action arrays, without the
//! library's word-action code.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_cover_graph, random_hyperbolic_word, walk_order};
use ordsep::graph::{CoverGraph, SurgeryMark};
use ordsep::group::FiniteGroup;
use ordsep::lemmas::{lemma1_boost, lemma2_declose, lemma3_separate, lemma4_power_separate, LemmaConfig};
use ordsep::pipeline::{run, CertComponent, Certificate, Instance, Mode};
use ordsep::verify::{brute_force_search, verify_certificate};
use ordsep::words::{FactorSpec, FreeProduct, NormalForm};
use ordsep::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn z2z3() -> FreeProduct {
    FreeProduct::finite(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3))
}

fn word(fp: &FreeProduct, raw: &[(usize, i64)]) -> NormalForm {
    fp.word(raw).expect("valid word")
}

fn instance(factors: [FactorSpec; 2], targets: &[&[(usize, i64)]]) -> Instance {
    let fp = FreeProduct::new(factors[0].clone(), factors[1].clone());
    let targets = targets.iter().map(|t| word(&fp, t)).collect();
    Instance::new(factors, targets)
}

fn cyclic(n: usize) -> FactorSpec {
    FactorSpec::finite(FiniteGroup::cyclic(n))
}

fn abab2(fp: &FreeProduct) -> NormalForm {
    word(fp, &[(0, 1), (1, 1), (0, 1), (1, 2)])
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pairwise_distinct(orders: &[u64]) -> bool {
    orders.iter().collect::<BTreeSet<_>>().len() == orders.len()
}

/// Orders of reduced words on the graph components, walked independently.
fn graph_orders(graphs: &[&CoverGraph], words: &[NormalForm]) -> Vec<u64> {
    words
        .iter()
        .map(|w| graphs.iter().fold(1u64, |acc, g| acc.lcm(&walk_order(g, w))))
        .collect()
}

fn dihedral_rejection() -> Outcome {
    let inst = instance([cyclic(2), cyclic(2)], &[&[(0, 1)], &[(1, 1)], &[(0, 1), (1, 1)]]);
    let err = run(&inst).err().ok_or("engine accepted the dihedral instance")?;
    ensure(err == Error::SharedFactorOrder(2) && err.exit_code() == 2, || format!("engine error {err:?}"))?;
    let oracle = brute_force_search(&inst, 8).map_err(|e| e.to_string())?;
    ensure(!oracle.found, || format!("oracle found a witness at degree {}", oracle.degree))?;
    Ok("SharedFactorOrder(2), exit 2; oracle found=false up to degree 8".into())
}

fn smoke_separation() -> Outcome {
    let inst = instance([cyclic(2), cyclic(3)], &[&[(0, 1)], &[(1, 1)], &[(0, 1), (1, 1)]]);
    let cert = run(&inst).map_err(|e| e.to_string())?;
    let report = verify_certificate(&inst, &cert);
    ensure(cert.verified && report.pass, || format!("verification: {:?}", report.failures))?;
    ensure(pairwise_distinct(&report.orders), || format!("orders {:?}", report.orders))?;
    let oracle = brute_force_search(&inst, 6).map_err(|e| e.to_string())?;
    ensure(oracle.found && oracle.degree <= 6, || "oracle found no witness up to degree 6".into())?;
    Ok(format!("orders {:?}; oracle witness at degree {} with orders {:?}", report.orders, oracle.degree, oracle.orders))
}

fn lemma1_contract() -> Outcome {
    let fp = z2z3();
    let w = abab2(&fp);
    let c = lemma1_boost(&fp, std::slice::from_ref(&w), 2, 2, &LemmaConfig::default()).map_err(|e| e.to_string())?;
    let o = walk_order(&c.graph, &w);
    ensure(o > 4 && o.is_power_of_two(), || format!("|w| = {o}"))?;
    for (f, n) in [(0usize, 2usize), (1, 3)] {
        let g = FiniteGroup::cyclic(n);
        for x in 1..n {
            let got = walk_order(&c.graph, &word(&fp, &[(f, x as i64)]));
            ensure(got == g.element_order(x), || format!("factor {f} element {x} has order {got}"))?;
        }
    }
    Ok(format!("|w| = {o} on {} vertices; factor orders kept", c.graph.vcount()))
}

fn lemma2_contract() -> Outcome {
    let fp = z2z3();
    let ab6 = fp.pow(&word(&fp, &[(0, 1), (1, 1)]), 6).map_err(|e| e.to_string())?;
    let mut summary = Vec::new();
    for u in [abab2(&fp), ab6] {
        let res = lemma2_declose(&fp, std::slice::from_ref(&u), 2, &LemmaConfig::default()).map_err(|e| e.to_string())?;
        let g = &res.components[0].graph;
        let (root, m) = fp.primitive_root(&u).map_err(|e| e.to_string())?;
        let mut flags = 0;
        for x in [&u, &root] {
            flags += g.x_cycles(x).map_err(|e| e.to_string())?.iter().filter(|c| c.close_edges).count();
        }
        ensure(flags == 0, || format!("{flags} cycles with close edges"))?;
        let (ou, or) = (walk_order(g, &u), walk_order(g, &root));
        ensure(or == m * ou, || format!("|root| = {or}, m·|u| = {}", m * ou))?;
        summary.push(format!("|root| = {or} = {m}·{ou} on {} vertices", g.vcount()));
    }
    Ok(format!("0 close-edge flags; {}", summary.join(", ")))
}

fn lemma3_contract() -> Outcome {
    let fp = z2z3();
    let ab6 = fp.pow(&word(&fp, &[(0, 1), (1, 1)]), 6).map_err(|e| e.to_string())?;
    let targets = vec![abab2(&fp), ab6];
    let res = lemma3_separate(&fp, &targets, &BTreeSet::from([3]), &LemmaConfig::default()).map_err(|e| e.to_string())?;
    let graphs: Vec<&CoverGraph> = res.components.iter().map(|c| &c.graph).collect();
    let orders = graph_orders(&graphs, &targets);
    ensure(orders == res.orders, || format!("claimed {:?}, recomputed {orders:?}", res.orders))?;
    ensure(pairwise_distinct(&orders), || format!("orders {orders:?}"))?;
    ensure(orders.iter().all(|o| o % 3 != 0), || format!("orders {orders:?} not coprime to 3"))?;
    Ok(format!("orders {orders:?} over {} components", graphs.len()))
}

fn lemma4_contract() -> Outcome {
    let fp = z2z3();
    let w = abab2(&fp);
    let exps = [1i64, 2, 3];
    let res = lemma4_power_separate(&fp, &w, &exps, &LemmaConfig::default()).map_err(|e| e.to_string())?;
    let powers: Vec<NormalForm> = exps.iter().map(|&k| fp.pow(&w, k).unwrap()).collect();
    for c in &res.components {
        let o = walk_order(&c.graph, &w);
        for (k, p) in exps.iter().zip(&powers) {
            let ok = walk_order(&c.graph, p);
            ensure(ok == o / o.gcd(&(*k as u64)), || format!("|w^{k}| = {ok} with |w| = {o}"))?;
        }
    }
    let graphs: Vec<&CoverGraph> = res.components.iter().map(|c| &c.graph).collect();
    let orders = graph_orders(&graphs, &powers);
    ensure(pairwise_distinct(&orders), || format!("orders {orders:?}"))?;
    Ok(format!("orders of w, w², w³: {orders:?}"))
}

/// Close-edge-free (graph, word) pairs built by close-edge removal.
fn close_edge_free_pool() -> Result<Vec<(CoverGraph, NormalForm)>, String> {
    let fp = z2z3();
    let ab6 = fp.pow(&word(&fp, &[(0, 1), (1, 1)]), 6).unwrap();
    let mut pool = Vec::new();
    for (u, p) in [(abab2(&fp), 2), (abab2(&fp), 3), (abab2(&fp), 5), (ab6.clone(), 2), (ab6, 5)] {
        let res = lemma2_declose(&fp, std::slice::from_ref(&u), p, &LemmaConfig::default()).map_err(|e| e.to_string())?;
        let g = res.components.into_iter().next().unwrap().graph;
        if !g.close_edge_free(&u).unwrap() {
            return Err("pool graph has close edges".into());
        }
        pool.push((g, u));
    }
    Ok(pool)
}

fn graph_property_suite() -> Outcome {
    const CASES: usize = 1000;
    let fp = z2z3();
    let (a, b) = (FiniteGroup::cyclic(2), FiniteGroup::cyclic(3));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();

    // surgery validity and vertex count; factor-order law; cycle-length law
    for case in 0..CASES {
        let blocks = rng.gen_range(1..=5);
        let g = random_cover_graph(&mut rng, &a, &b, blocks);
        let t = rng.gen_range(1..=4);
        let orbits = [g.factor_orbits(0), g.factor_orbits(1)];
        let mut used = BTreeSet::new();
        let marks: Vec<SurgeryMark> = (0..rng.gen_range(0..=3))
            .map(|_| SurgeryMark { vertex: rng.gen_range(0..g.vcount()), factor: rng.gen_range(0..2) })
            .filter(|m| used.insert((m.factor, orbits[m.factor][m.vertex])))
            .collect();
        let out = g.gamma_surgery(t, &marks, 1 << 20).map_err(|e| e.to_string())?;
        if !out.validate().pass || out.vcount() != t * g.vcount() {
            failures.push(format!("surgery case {case}"));
        }
        for (f, n) in [(0usize, 2usize), (1, 3)] {
            for x in 1..n {
                if walk_order(&out, &word(&fp, &[(f, x as i64)])) != FiniteGroup::cyclic(n).element_order(x) {
                    failures.push(format!("factor-order case {case}"));
                }
            }
        }
        let x = random_hyperbolic_word(&mut rng, &fp, 6);
        let ks = out.x_cycle_summary(&x).map_err(|e| e.to_string())?;
        let lcm = ks.iter().fold(1u64, |acc, c| acc.lcm(&(c.k as u64)));
        if lcm != walk_order(&out, &x) {
            failures.push(format!("cycle-lcm case {case}"));
        }
    }

    // surgery cycle law on close-edge-free inputs
    let pool = close_edge_free_pool()?;
    for case in 0..CASES {
        let (g, x) = &pool[case % pool.len()];
        let r = rng.gen_range(2..=5);
        let mark = SurgeryMark { vertex: rng.gen_range(0..g.vcount()), factor: rng.gen_range(0..2) };
        let before: BTreeSet<usize> = g.x_cycle_summary(x).unwrap().iter().map(|c| c.k).collect();
        let out = g.gamma_surgery(r, &[mark], 1 << 22).map_err(|e| e.to_string())?;
        let ok = out.x_cycle_summary(x).unwrap().iter().all(|c| before.contains(&c.k) || (c.k % r == 0 && before.contains(&(c.k / r))));
        if !ok || !out.validate().pass {
            failures.push(format!("cycle-law case {case}"));
        }
    }

    // synchronized products: close-edge-freeness and the lcm order law
    let mut nonvacuous = 0;
    for case in 0..CASES {
        let (k1, k2) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let g1 = random_cover_graph(&mut rng, &a, &b, k1);
        let g2 = random_cover_graph(&mut rng, &a, &b, k2);
        let x = random_hyperbolic_word(&mut rng, &fp, 4);
        let prod = g1.synchronized_product(&g2, (0, 0), 1 << 20).map_err(|e| e.to_string())?;
        if walk_order(&prod, &x) != walk_order(&g1, &x).lcm(&walk_order(&g2, &x)) || !prod.validate().pass {
            failures.push(format!("product-lcm case {case}"));
        }
        if g1.close_edge_free(&x).unwrap() && g2.close_edge_free(&x).unwrap() {
            nonvacuous += 1;
            if !prod.close_edge_free(&x).unwrap() {
                failures.push(format!("product close-edge case {case}"));
            }
        }
    }
    // pool graphs against surgeries of the A×B graph
    let base = CoverGraph::cayley_base(&a, &b, 6).map_err(|e| e.to_string())?;
    for case in 0..CASES {
        let (g, x) = &pool[case % pool.len()];
        let mark = SurgeryMark { vertex: rng.gen_range(0..6), factor: rng.gen_range(0..2) };
        let h = base.gamma_surgery(rng.gen_range(1..=2), &[mark], 12).unwrap();
        if !h.close_edge_free(x).unwrap() {
            continue;
        }
        nonvacuous += 1;
        let prod = g.synchronized_product(&h, (0, 0), 1 << 20).map_err(|e| e.to_string())?;
        if !prod.close_edge_free(x).unwrap() || walk_order(&prod, x) != walk_order(g, x).lcm(&walk_order(&h, x)) {
            failures.push(format!("pool product case {case}"));
        }
    }
    ensure(failures.is_empty(), || format!("{} failures, first {:?}", failures.len(), &failures[..failures.len().min(5)]))?;
    Ok(format!(
        "{CASES} cases per family; 0 failures; {nonvacuous} product cases with close-edge-free inputs"
    ))
}

fn random_instance(rng: &mut ChaCha8Rng, fp: &FreeProduct) -> Instance {
    let n = rng.gen_range(1..=3);
    let targets = (0..n)
        .map(|_| {
            let len = rng.gen_range(0..=6);
            let first = rng.gen_range(0..2usize);
            let raw: Vec<(usize, i64)> = (0..len)
                .map(|i| {
                    let f = (first + i) % 2;
                    (f, rng.gen_range(1..if f == 0 { 2 } else { 3 }))
                })
                .collect();
            fp.word(&raw).unwrap()
        })
        .collect();
    Instance::new([cyclic(2), cyclic(3)], targets)
}

fn oracle_cross_check() -> Outcome {
    let fp = z2z3();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut both, mut rejected, mut engine_only) = (0, 0, 0);
    let mut divergences = Vec::new();
    for case in 0..50 {
        let inst = random_instance(&mut rng, &fp);
        let oracle = brute_force_search(&inst, 8).map_err(|e| e.to_string())?;
        match run(&inst) {
            Ok(cert) => {
                if !verify_certificate(&inst, &cert).pass {
                    divergences.push(format!("case {case}: engine certificate fails verification"));
                }
                if oracle.found {
                    both += 1;
                } else {
                    engine_only += 1;
                }
            }
            Err(e) if e.exit_code() == 2 && !oracle.found => rejected += 1,
            Err(e) => divergences.push(format!("case {case}: engine {e}, oracle found={}", oracle.found)),
        }
    }
    ensure(divergences.is_empty(), || divergences.join("; "))?;
    Ok(format!("50 instances: {both} both succeed, {engine_only} engine only, {rejected} rejected by both; 0 divergences"))
}

fn determinism() -> Outcome {
    let fp = z2z3();
    let ab = [(0, 1), (1, 1)];
    let instances = [
        instance([cyclic(2), cyclic(3)], &[&[(0, 1)], &[(1, 1)], &[(0, 1), (1, 1)]]),
        instance([cyclic(2), cyclic(3)], &[&[(0, 1), (1, 1)], &[(0, 1), (1, 1), (0, 1), (1, 2)]]),
        instance([cyclic(2), cyclic(3)], &[&ab.repeat(6), &ab.repeat(12)]),
        instance([FactorSpec::InfiniteCyclic, FactorSpec::InfiniteCyclic], &[&[(0, 1)], &[(0, 3)]]),
        instance([FactorSpec::InfiniteCyclic, cyclic(3)], &[&[(0, 1)], &[(0, 2)], &[(1, 1)]]),
    ];
    let _ = fp;
    for (i, inst) in instances.iter().enumerate() {
        let mut inst = inst.clone();
        inst.config.seed = 11;
        let first = run(&inst).map_err(|e| format!("instance {i}: {e}"))?.to_json();
        for rep in 1..10 {
            let again = run(&inst).map_err(|e| format!("instance {i}: {e}"))?.to_json();
            ensure(again == first, || format!("instance {i} differs on repetition {rep}"))?;
        }
    }
    Ok("5 instances × 10 runs byte-identical".into())
}

fn theorem3_cases() -> Outcome {
    let z = FactorSpec::InfiniteCyclic;
    let cases: Vec<(&str, Instance)> = vec![
        ("u∈A, v∈B, w hyperbolic", instance([cyclic(2), cyclic(3)], &[&[(0, 1)], &[(1, 1)], &[(0, 1), (1, 1), (0, 1), (1, 2)]])),
        ("u,v∈A, w∈B", instance([cyclic(4), cyclic(3)], &[&[(0, 1)], &[(0, 2)], &[(1, 1)]])),
        ("u=e, v∈A, w∈B", instance([cyclic(2), cyclic(3)], &[&[], &[(0, 1)], &[(1, 1)]])),
        ("u∈A, v=e, w hyperbolic", instance([cyclic(2), cyclic(3)], &[&[(0, 1)], &[], &[(0, 1), (1, 1)]])),
        ("u=e, v∈Z, w∈B", instance([z.clone(), cyclic(3)], &[&[], &[(0, 1)], &[(1, 1)]])),
        ("u,v∈Z, w∈B", instance([z.clone(), cyclic(3)], &[&[(0, 1)], &[(0, 2)], &[(1, 1)]])),
        ("u∈Z, v∈B, w hyperbolic", instance([z, cyclic(3)], &[&[(0, 2)], &[(1, 1)], &[(0, 1), (1, 2)]])),
    ];
    let mut largest = 0;
    let mut summary = Vec::new();
    for (name, mut inst) in cases {
        inst.mode = Mode::Theorem3;
        let cert: Certificate = run(&inst).map_err(|e| format!("{name}: {e}"))?;
        let report = verify_certificate(&inst, &cert);
        ensure(cert.verified && report.pass, || format!("{name}: {:?}", report.failures))?;
        for c in &cert.components {
            if let CertComponent::Graph { graph, .. } = c {
                largest = largest.max(graph.vcount());
            }
        }
        summary.push(format!("{name} {:?}", report.orders));
    }
    ensure(largest <= 100_000, || format!("a component has {largest} vertices"))?;
    Ok(format!("{}; largest graph {largest} vertices", summary.join(", ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("dihedral rejection", Duration::from_secs(10), dihedral_rejection),
        ("smoke separation", Duration::from_secs(5), smoke_separation),
        ("p-element boosting contract", Duration::from_secs(30), lemma1_contract),
        ("close-edge removal contract", Duration::from_secs(120), lemma2_contract),
        ("order separation contract", Duration::from_secs(120), lemma3_contract),
        ("power separation contract", Duration::from_secs(60), lemma4_contract),
        ("graph property suite", Duration::from_secs(3600), graph_property_suite),
        ("oracle cross-check", Duration::from_secs(3600), oracle_cross_check),
        ("determinism", Duration::from_secs(3600), determinism),
        ("mixed three-target cases", Duration::from_secs(300), theorem3_cases),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (verdict, detail) = match outcome {
            Ok(d) if elapsed <= *limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; runtime over the {}s limit", limit.as_secs())),
            Err(e) => ("FAIL", e),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {name} [{:.2}s, limit {}s]: {detail}",
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
