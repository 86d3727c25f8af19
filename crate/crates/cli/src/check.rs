//! Syntactic discharge of every obligation of an outline.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use wmog_core::axioms::AxiomId;
use wmog_core::entail::entails_within;
use wmog_core::model::ModelInstance;
use wmog_core::obligations::{generate, EntailmentKind};
use wmog_core::oracle::Oracle;
use wmog_core::rules::{discharge, Derivation, DischargeOptions, Failure, RuleId, Triple};
use wmog_core::syntax::{HoareTriple, Origin, ProofOutline, Tid};

use crate::numbered_triples;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Discharged,
    Failed,
    /// Not derivable by the rules but valid on the fallback model.
    SemanticOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleRow {
    pub id: String,
    pub origin: Origin,
    pub thread: Tid,
    pub command: String,
    pub pre: String,
    pub post: String,
    pub status: Status,
    pub rules: Vec<RuleId>,
    pub axioms: BTreeSet<AxiomId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    #[serde(skip)]
    pub derivation: Option<Derivation>,
}

impl TripleRow {
    /// Rules other than glue and entailment facts.
    pub fn proper_rules(&self) -> BTreeSet<RuleId> {
        self.rules.iter().copied().filter(|r| !r.is_glue() && !r.is_fact()).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntailmentRow {
    pub id: String,
    pub kind: EntailmentKind,
    pub lhs: String,
    pub rhs: String,
    pub status: Status,
    pub facts: Vec<RuleId>,
    pub axioms: BTreeSet<AxiomId>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Counts {
    pub local: usize,
    pub global: usize,
    pub plumbing: usize,
    pub entailments: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub counts: Counts,
    pub triples: Vec<TripleRow>,
    pub entailments: Vec<EntailmentRow>,
    pub axiom_union: BTreeSet<AxiomId>,
    /// Ids of rows that are not discharged.
    pub failures: Vec<String>,
    /// Name of the model used for the semantic fallback, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semantic_fallback: Option<String>,
}

impl CheckReport {
    pub fn all_discharged(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_discharged() {
            crate::exit::OK
        } else {
            crate::exit::FAILED
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub allowed: Option<BTreeSet<AxiomId>>,
}

fn row(id: String, h: &HoareTriple, config: &wmog_core::syntax::Config, opts: &DischargeOptions) -> TripleRow {
    let goal = Triple::new(h.pre.clone(), h.thread, h.command.clone(), h.post.clone());
    let (status, rules, axioms, failure, derivation) = match discharge(&goal, config, opts) {
        Ok(d) => {
            let rules = d.rules_used().into_iter().collect();
            (Status::Discharged, rules, d.axioms.clone(), None, Some(d))
        }
        Err(f) => (Status::Failed, vec![], BTreeSet::new(), Some(f), None),
    };
    TripleRow {
        id,
        origin: h.origin.clone(),
        thread: h.thread,
        command: h.command.to_string(),
        pre: h.pre.to_string(),
        post: h.post.to_string(),
        status,
        rules,
        axioms,
        failure,
        derivation,
    }
}

pub fn check(o: &ProofOutline, opts: &CheckOptions) -> CheckReport {
    let set = generate(o);
    let config = &o.config;
    let dopts = DischargeOptions { allowed: opts.allowed.clone() };

    let triples: Vec<TripleRow> =
        numbered_triples(&set).into_par_iter().map(|(id, h)| row(id, h, config, &dopts)).collect();

    let entailments: Vec<EntailmentRow> = set
        .entailments
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let r = entails_within(&e.lhs, &e.rhs, config, opts.allowed.as_ref());
            let mut facts: Vec<RuleId> = r.facts.iter().map(|f| f.fact).collect();
            facts.sort();
            facts.dedup();
            EntailmentRow {
                id: format!("E{}", i + 1),
                kind: e.kind.clone(),
                lhs: e.lhs.to_string(),
                rhs: e.rhs.to_string(),
                status: if r.holds() { Status::Discharged } else { Status::Failed },
                facts,
                axioms: r.axioms,
            }
        })
        .collect();

    let mut report = CheckReport {
        counts: Counts {
            local: set.local_triples.len(),
            global: set.global_triples.len(),
            plumbing: set.plumbing_triples.len(),
            entailments: set.entailments.len(),
        },
        triples,
        entailments,
        axiom_union: BTreeSet::new(),
        failures: vec![],
        semantic_fallback: None,
    };
    report.refresh();
    report
}

impl CheckReport {
    fn refresh(&mut self) {
        self.axiom_union = self
            .triples
            .iter()
            .flat_map(|r| r.axioms.iter())
            .chain(self.entailments.iter().flat_map(|e| e.axioms.iter()))
            .copied()
            .collect();
        self.failures = self
            .triples
            .iter()
            .filter(|r| r.status == Status::Failed)
            .map(|r| r.id.clone())
            .chain(self.entailments.iter().filter(|e| e.status == Status::Failed).map(|e| e.id.clone()))
            .collect();
    }

    /// Re-checks failed rows on `m`; those that hold there become
    /// `SemanticOnly`. The result no longer transfers to other models.
    pub fn apply_semantic_fallback(&mut self, o: &ProofOutline, m: &ModelInstance) {
        let set = generate(o);
        let oracle = Oracle::new(m);
        for (r, (id, h)) in self.triples.iter_mut().zip(numbered_triples(&set)) {
            debug_assert_eq!(r.id, id);
            if r.status == Status::Failed && oracle.check_triple(&h.pre, h.thread, &h.command, &h.post).is_ok() {
                r.status = Status::SemanticOnly;
            }
        }
        for (e, ob) in self.entailments.iter_mut().zip(&set.entailments) {
            if e.status == Status::Failed && oracle.check_entailment(&ob.lhs, &ob.rhs).is_ok() {
                e.status = Status::SemanticOnly;
            }
        }
        self.semantic_fallback = Some(m.name.clone());
        self.refresh();
    }
}
