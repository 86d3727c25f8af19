//! Semantic checking of every obligation on one model instance.

use rayon::prelude::*;
use serde::Serialize;
use wmog_core::model::ModelInstance;
use wmog_core::obligations::generate;
use wmog_core::oracle::{Oracle, SemanticFailure};
use wmog_core::syntax::ProofOutline;

use crate::numbered_triples;

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub id: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<SemanticFailure>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub model: String,
    pub states: usize,
    pub triples: Vec<OracleRow>,
    pub entailments: Vec<OracleRow>,
}

impl OracleReport {
    pub fn rows(&self) -> impl Iterator<Item = &OracleRow> {
        self.triples.iter().chain(&self.entailments)
    }

    pub fn all_hold(&self) -> bool {
        self.rows().all(|r| r.holds)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_hold() {
            crate::exit::OK
        } else {
            crate::exit::FAILED
        }
    }
}

fn row(id: String, result: Result<(), SemanticFailure>) -> OracleRow {
    OracleRow { id, holds: result.is_ok(), counterexample: result.err() }
}

/// Row ids match those of the syntactic check report.
pub fn oracle(o: &ProofOutline, m: &ModelInstance) -> OracleReport {
    let set = generate(o);
    let triples = numbered_triples(&set)
        .into_par_iter()
        .map_init(
            || Oracle::new(m),
            |oracle, (id, h)| row(id, oracle.check_triple(&h.pre, h.thread, &h.command, &h.post)),
        )
        .collect();
    let oracle = Oracle::new(m);
    let entailments = set
        .entailments
        .iter()
        .enumerate()
        .map(|(i, e)| row(format!("E{}", i + 1), oracle.check_entailment(&e.lhs, &e.rhs)))
        .collect();
    OracleReport { model: m.name.clone(), states: m.states.len(), triples, entailments }
}
