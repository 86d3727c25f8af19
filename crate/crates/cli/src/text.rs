//! Plain-text renderings of the reports.

use std::collections::BTreeSet;
use std::fmt::Write;

use wmog_core::axioms::{AxiomId, AxiomReport};
use wmog_core::litmus::LitmusReport;
use wmog_core::rules::RuleId;
use wmog_core::syntax::Origin;

use crate::check::{CheckReport, Status};
use crate::oracle::OracleReport;
use crate::transfer::TransferReport;

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    if v.is_empty() {
        "-".into()
    } else {
        v.join(",")
    }
}

fn axiom_set(s: &BTreeSet<AxiomId>) -> String {
    format!("{{{}}}", s.iter().map(AxiomId::to_string).collect::<Vec<_>>().join(", "))
}

fn origin(o: &Origin) -> String {
    match o {
        Origin::Local => "local".into(),
        Origin::Global { observer, assertion } => format!("inv {observer}.{assertion}"),
        Origin::Plumbing => "flow".into(),
    }
}

fn status(s: Status) -> &'static str {
    match s {
        Status::Discharged => "ok",
        Status::Failed => "FAILED",
        Status::SemanticOnly => "semantic",
    }
}

pub fn check(r: &CheckReport) -> String {
    let mut out = String::new();
    let c = &r.counts;
    let total = c.local + c.global + c.plumbing;
    let _ = writeln!(
        out,
        "{total} triples ({} local, {} global, {} plumbing), {} entailments",
        c.local, c.global, c.plumbing, c.entailments
    );
    let _ = writeln!(
        out,
        "{:<4} {:<8} {:<3} {:<14} {:<8} {:<36} axioms",
        "id", "origin", "t", "command", "status", "rules"
    );
    for row in &r.triples {
        let rules: Vec<RuleId> = row.proper_rules().into_iter().collect();
        let _ = writeln!(
            out,
            "{:<4} {:<8} {:<3} {:<14} {:<8} {:<36} {}",
            row.id,
            origin(&row.origin),
            row.thread.to_string(),
            row.command,
            status(row.status),
            join(rules),
            join(&row.axioms)
        );
        if let Some(f) = &row.failure {
            let _ = writeln!(out, "     {{{}}} {} {{{}}}", row.pre, row.command, row.post);
            let _ = writeln!(out, "     reason: {}", f.reason);
            for res in &f.residuals {
                let _ = writeln!(out, "     residual: {{{}}} _ {{{}}}", res.pre, res.post);
            }
        }
    }
    for e in &r.entailments {
        let _ = writeln!(
            out,
            "{:<4} {:<8} {:<3} {:<14} {:<8} {:<36} {}",
            e.id,
            "entail",
            "-",
            "-",
            status(e.status),
            join(&e.facts),
            join(&e.axioms)
        );
        if e.status == Status::Failed {
            let _ = writeln!(out, "     {}  |=  {}", e.lhs, e.rhs);
        }
    }
    let _ = writeln!(out, "axiom union: {}", axiom_set(&r.axiom_union));
    if let Some(m) = &r.semantic_fallback {
        let _ = writeln!(out, "semantic fallback on {m}: rows marked `semantic` hold only on that model");
    }
    if r.all_discharged() {
        let _ = writeln!(out, "all obligations discharged");
    } else {
        let _ = writeln!(out, "{} obligation(s) not discharged: {}", r.failures.len(), r.failures.join(", "));
    }
    out
}

pub fn oracle(r: &OracleReport) -> String {
    let mut out = String::new();
    let total = r.rows().count();
    let holding = r.rows().filter(|x| x.holds).count();
    let _ = writeln!(out, "model {} ({} states): {holding}/{total} obligations hold", r.model, r.states);
    for row in r.rows().filter(|x| !x.holds) {
        let cx = row.counterexample.as_ref().map(ToString::to_string).unwrap_or_default();
        let _ = writeln!(out, "{:<4} fails: {cx}", row.id);
    }
    out
}

pub fn axioms(r: &AxiomReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} ({} states)", r.model, r.states);
    for a in &r.results {
        let verdict = if a.holds { "holds" } else { "FAILS" };
        let _ = writeln!(out, "{:<4} {:<6} {:>10} instances", a.axiom, verdict, a.instances);
        if let Some(cx) = &a.counterexample {
            let _ = writeln!(out, "     at {}: {} [{}]", cx.instance, cx.detail, cx.state);
        }
    }
    let _ = writeln!(out, "{}/{} axioms satisfied", r.satisfied().len(), r.results.len());
    out
}

pub fn transfer(r: &TransferReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "proof uses {}", axiom_set(&r.proof_axioms));
    let _ = writeln!(out, "{} satisfies {}", r.model, axiom_set(&r.model_axioms));
    if !r.proof_complete {
        let _ = writeln!(out, "proof is incomplete: not transferable");
    } else if r.transferable {
        let _ = writeln!(out, "transferable to {}", r.model);
    } else {
        let _ = writeln!(out, "not transferable to {}: missing {}", r.model, axiom_set(&r.missing));
    }
    out
}

pub fn litmus(r: &LitmusReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}: {} configurations, {} outcomes", r.model, r.configurations, r.outcomes.len());
    for o in &r.outcomes {
        let regs: Vec<String> = o.registers.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let post = match o.post_holds {
            Some(true) => "post holds",
            Some(false) => "POST VIOLATED",
            None => "post not evaluated",
        };
        let _ = writeln!(out, "  {:<30} {post}", regs.join(" "));
    }
    out
}
