//! Whether a proof carries over to a model.

use std::collections::BTreeSet;

use serde::Serialize;
use wmog_core::axioms::AxiomId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub model: String,
    pub proof_axioms: BTreeSet<AxiomId>,
    pub model_axioms: BTreeSet<AxiomId>,
    pub missing: BTreeSet<AxiomId>,
    /// False when the proof itself has undischarged or model-specific rows.
    pub proof_complete: bool,
    pub transferable: bool,
}

impl TransferReport {
    pub fn new(
        model: String,
        proof_axioms: BTreeSet<AxiomId>,
        model_axioms: BTreeSet<AxiomId>,
        proof_complete: bool,
    ) -> Self {
        let missing: BTreeSet<AxiomId> = proof_axioms.difference(&model_axioms).copied().collect();
        let transferable = proof_complete && missing.is_empty();
        TransferReport { model, proof_axioms, model_axioms, missing, proof_complete, transferable }
    }

    pub fn exit_code(&self) -> i32 {
        if self.transferable {
            crate::exit::OK
        } else {
            crate::exit::FAILED
        }
    }
}

/// Reads `axiom_union` and `failures` from a saved check report.
pub fn axioms_from_report(json: &str) -> Result<(BTreeSet<AxiomId>, bool), String> {
    let v: serde_json::Value = serde_json::from_str(json).map_err(|e| format!("report is not JSON: {e}"))?;
    let union = v
        .get("axiom_union")
        .and_then(|u| u.as_array())
        .ok_or("report has no `axiom_union` array")?
        .iter()
        .map(|a| {
            let s = a.as_str().ok_or("axiom names must be strings")?;
            s.parse::<AxiomId>().map_err(|e| e.to_string())
        })
        .collect::<Result<BTreeSet<_>, String>>()?;
    let complete = v.get("failures").and_then(|f| f.as_array()).is_some_and(|f| f.is_empty())
        && v.get("semantic_fallback").is_none();
    Ok((union, complete))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_axioms_are_the_set_difference() {
        let proof: BTreeSet<AxiomId> = [AxiomId::C3, AxiomId::MP].into();
        let model: BTreeSet<AxiomId> = AxiomId::ALL.into_iter().filter(|&a| a != AxiomId::MP).collect();
        let r = TransferReport::new("m".into(), proof, model, true);
        assert!(!r.transferable);
        assert_eq!(r.missing, [AxiomId::MP].into());
    }

    #[test]
    fn axiom_free_proof_transfers_anywhere() {
        let r = TransferReport::new("m".into(), BTreeSet::new(), BTreeSet::new(), true);
        assert!(r.transferable);
    }

    #[test]
    fn incomplete_proof_never_transfers() {
        let r = TransferReport::new("m".into(), BTreeSet::new(), AxiomId::ALL.into(), false);
        assert!(!r.transferable);
    }

    #[test]
    fn reads_saved_reports() {
        let (u, ok) = axioms_from_report(r#"{"axiom_union": ["C3", "MP"], "failures": []}"#).unwrap();
        assert_eq!(u, [AxiomId::C3, AxiomId::MP].into());
        assert!(ok);
        let (_, ok) = axioms_from_report(r#"{"axiom_union": [], "failures": ["G1"]}"#).unwrap();
        assert!(!ok);
        assert!(axioms_from_report(r#"{"axiom_union": ["C9"]}"#).is_err());
    }
}
