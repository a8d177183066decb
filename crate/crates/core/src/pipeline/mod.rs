//! Instance-level orchestration: hypothesis checks, reduction of the
//! factors to finite quotients, dispatch to the constructions, and
//! assembly of a verified certificate.

mod reduce;
mod stage;
mod theorem3;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CoverGraph;
use crate::group::{FactorHom, Permutation};
use crate::lemmas::LemmaConfig;
use crate::words::{FactorSpec, FreeProduct, NormalForm};

pub use theorem3::run_theorem3;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Auto,
    Theorem12,
    Theorem3,
}

/// Seed and budgets for one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub max_vertices: usize,
    pub max_iterations: usize,
    /// Repair rounds; defaults to the squared number of targets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_repairs: Option<usize>,
    pub oracle_degree: usize,
    /// Largest modulus tried for an infinite cyclic factor.
    pub modulus_bound: u64,
    /// Random assignments tried by each boosting search.
    pub attempts: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            max_vertices: 1_000_000,
            max_iterations: 64,
            max_repairs: None,
            oracle_degree: 8,
            modulus_bound: 1_000_000,
            attempts: 10_000,
        }
    }
}

impl RunConfig {
    pub fn lemma_config(&self) -> LemmaConfig {
        LemmaConfig {
            seed: self.seed,
            max_vertices: self.max_vertices,
            max_iterations: self.max_iterations,
            attempts: self.attempts,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.max_vertices == 0 || self.max_iterations == 0 || self.attempts == 0 || self.modulus_bound < 2 {
            return Err(Error::Parse("budgets must be positive and modulus_bound at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(default = "schema_version")]
    pub schema: u32,
    pub factors: [FactorSpec; 2],
    pub targets: Vec<NormalForm>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub config: RunConfig,
}

impl Instance {
    pub fn new(factors: [FactorSpec; 2], targets: Vec<NormalForm>) -> Self {
        Instance { schema: SCHEMA_VERSION, factors, targets, mode: Mode::Auto, config: RunConfig::default() }
    }

    pub fn free_product(&self) -> FreeProduct {
        let [a, b] = self.factors.clone();
        FreeProduct::new(a, b)
    }

    /// Parses an instance and brings every target to normal form.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut inst: Instance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if inst.schema != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema {}", inst.schema)));
        }
        inst.config.check()?;
        let fp = inst.free_product();
        inst.targets = inst.targets.iter().map(|w| fp.normalize(w.syllables())).collect::<Result<_>>()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances serialize")
    }
}

/// One permutation representation inside a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertComponent {
    /// A cover graph over the reduced factors.
    Graph {
        graph: CoverGraph,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prime: Option<u64>,
        #[serde(default)]
        note: String,
    },
    /// Explicit images of every element of the two reduced factors.
    Perm {
        degree: usize,
        images: [Vec<Permutation>; 2],
        #[serde(default)]
        note: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(default = "schema_version")]
    pub schema: u32,
    pub factor_homs: [FactorHom; 2],
    pub components: Vec<CertComponent>,
    /// Claimed order of each original target.
    pub orders: BTreeMap<usize, u64>,
    pub verified: bool,
    pub transcript: Vec<String>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Targets after the hypothesis checks.
#[derive(Clone, Debug)]
pub struct Checked {
    pub fp: FreeProduct,
    /// Cyclically reduced targets.
    pub cores: Vec<NormalForm>,
    /// `targets[i] = conjugators[i] · cores[i] · conjugators[i]⁻¹`.
    pub conjugators: Vec<NormalForm>,
}

/// Target indices split into factor-0 elements (with the identity),
/// factor-1 elements, and hyperbolic elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub gamma: Vec<usize>,
}

/// Rejects instances outside the hypotheses: empty target lists, factors
/// sharing a nontrivial element order, and pairs conjugate up to inversion.
pub fn check_hypotheses(inst: &Instance) -> Result<Checked> {
    if inst.targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    let fp = inst.free_product();
    if let (Some(a), Some(b)) = (fp.factor(0).group(), fp.factor(1).group()) {
        if let Some(&o) = a.nontrivial_orders().intersection(&b.nontrivial_orders()).next() {
            return Err(Error::SharedFactorOrder(o));
        }
    }
    let mut cores = Vec::new();
    let mut conjugators = Vec::new();
    for t in &inst.targets {
        let t = fp.normalize(t.syllables())?;
        let (core, conj) = fp.cyclically_reduce(&t)?;
        cores.push(core);
        conjugators.push(conj);
    }
    for j in 1..cores.len() {
        for i in 0..j {
            if fp.is_conjugate(&cores[i], &cores[j], true)? {
                return Err(Error::ConjugatePair(i, j));
            }
        }
    }
    Ok(Checked { fp, cores, conjugators })
}

pub fn classify_targets(cores: &[NormalForm]) -> Partition {
    let mut part = Partition::default();
    for (i, w) in cores.iter().enumerate() {
        match w.first() {
            None => part.alpha.push(i),
            Some(s) if w.len() == 1 && s.factor == 0 => part.alpha.push(i),
            Some(_) if w.len() == 1 => part.beta.push(i),
            Some(_) => part.gamma.push(i),
        }
    }
    part
}

/// Runs the pipeline selected by the instance mode.
pub fn run(inst: &Instance) -> Result<Certificate> {
    match inst.mode {
        Mode::Theorem12 => run_theorem12(inst),
        Mode::Theorem3 => run_theorem3(inst),
        Mode::Auto => {
            let checked = check_hypotheses(inst)?;
            if theorem3::match_case(&checked).is_some() {
                run_theorem3(inst)
            } else {
                run_theorem12(inst)
            }
        }
    }
}

/// General pipeline: reduce the factors, then separate in the finite case.
pub fn run_theorem12(inst: &Instance) -> Result<Certificate> {
    let checked = check_hypotheses(inst)?;
    let part = classify_targets(&checked.cores);
    let homs = reduce::reduce_factors(&checked, &part, inst.config.modulus_bound)?;
    let transcript = vec![format!(
        "reduced factors to orders {} and {}",
        homs[0].target.order(),
        homs[1].target.order()
    )];
    stage::separate_finite(inst, &checked, homs, transcript)
}

/// Computes claimed orders, runs the independent verifier, and returns the
/// certificate only if it passes.
pub fn assemble_certificate(
    inst: &Instance,
    factor_homs: [FactorHom; 2],
    components: Vec<CertComponent>,
    transcript: Vec<String>,
) -> Result<Certificate> {
    let checked = check_hypotheses(inst)?;
    let reduced = reduce::reduced_product(&factor_homs);
    let images: Vec<NormalForm> = checked
        .cores
        .iter()
        .map(|w| reduce::map_word(&factor_homs, &reduced, w))
        .collect::<Result<_>>()?;
    let mut orders = vec![1u64; images.len()];
    for c in &components {
        for (o, w) in orders.iter_mut().zip(&images) {
            *o = crate::arith::checked_lcm(*o, component_order(c, w)?)?;
        }
    }
    let mut cert = Certificate {
        schema: SCHEMA_VERSION,
        factor_homs,
        components,
        orders: orders.into_iter().enumerate().collect(),
        verified: false,
        transcript,
    };
    let report = crate::verify::verify_certificate(inst, &cert);
    if !report.pass {
        return Err(Error::VerificationFailed(report.failures.join("; ")));
    }
    cert.verified = true;
    Ok(cert)
}

/// Order of a reduced word on one component.
pub(crate) fn component_order(c: &CertComponent, w: &NormalForm) -> Result<u64> {
    match c {
        CertComponent::Graph { graph, .. } => graph.word_permutation(w)?.order(),
        CertComponent::Perm { degree, images, .. } => {
            let mut p = Permutation::identity(*degree);
            for s in w.syllables() {
                p = p.then(&images[s.factor][s.value as usize]);
            }
            p.order()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;

    pub(crate) fn z2z3(targets: &[&[(usize, i64)]]) -> Instance {
        let fp = FreeProduct::finite(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3));
        let targets = targets.iter().map(|t| fp.word(t).unwrap()).collect();
        Instance::new(
            [FactorSpec::finite(FiniteGroup::cyclic(2)), FactorSpec::finite(FiniteGroup::cyclic(3))],
            targets,
        )
    }

    #[test]
    fn dihedral_rejected() {
        let inst = Instance::new(
            [FactorSpec::finite(FiniteGroup::cyclic(2)), FactorSpec::finite(FiniteGroup::cyclic(2))],
            vec![NormalForm::identity()],
        );
        assert_eq!(check_hypotheses(&inst).unwrap_err(), Error::SharedFactorOrder(2));
    }

    #[test]
    fn rotation_conjugates_rejected() {
        let inst = z2z3(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]]);
        assert_eq!(check_hypotheses(&inst).unwrap_err(), Error::ConjugatePair(0, 1));
        let inst = z2z3(&[&[(0, 1), (1, 1)], &[(1, 2), (0, 1)]]);
        assert_eq!(check_hypotheses(&inst).unwrap_err(), Error::ConjugatePair(0, 1));
    }

    #[test]
    fn empty_targets_rejected() {
        let inst = z2z3(&[]);
        assert_eq!(check_hypotheses(&inst).unwrap_err(), Error::EmptyTargets);
    }

    #[test]
    fn cores_and_conjugators() {
        let inst = z2z3(&[&[(1, 1), (0, 1), (1, 1), (1, 1)]]);
        let c = check_hypotheses(&inst).unwrap();
        let fp = &c.fp;
        assert!(c.cores[0].is_cyclically_reduced());
        let back = fp.product(&[&c.conjugators[0], &c.cores[0], &fp.invert(&c.conjugators[0])]).unwrap();
        assert_eq!(back, inst.targets[0]);
    }

    #[test]
    fn classification() {
        let inst = z2z3(&[&[(0, 1)], &[(1, 1)], &[(0, 1), (1, 1)], &[]]);
        let c = check_hypotheses(&inst).unwrap();
        let p = classify_targets(&c.cores);
        assert_eq!(p, Partition { alpha: vec![0, 3], beta: vec![1], gamma: vec![2] });
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = z2z3(&[&[(0, 1)], &[(1, 1)]]);
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        let raw = r#"{"factors":[{"type":"finite","table":[[0,1],[1,0]]},{"type":"infinite_cyclic"}],
                      "targets":[[[1,2],[1,-1]]]}"#;
        let inst = Instance::from_json(raw).unwrap();
        assert_eq!(inst.targets[0].syllables().len(), 1);
        assert_eq!(inst.mode, Mode::Auto);
        assert!(matches!(Instance::from_json("{").unwrap_err(), Error::Parse(_)));
    }
}
