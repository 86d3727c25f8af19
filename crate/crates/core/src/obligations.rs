//! Owicki-Gries obligations of a proof outline.

use serde::Serialize;

use crate::assertion::Assertion;
use crate::syntax::{Atomic, Block, Command, HoareTriple, Origin, ProofOutline, Tid};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntailmentKind {
    /// The global precondition establishes a thread's first assertion.
    Initialization { thread: Tid },
    /// The final assertions establish the global postcondition.
    Finalization,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntailmentObligation {
    pub kind: EntailmentKind,
    pub lhs: Assertion,
    pub rhs: Assertion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObligationSet {
    pub local_triples: Vec<HoareTriple>,
    pub global_triples: Vec<HoareTriple>,
    /// Skip triples for branch entry/exit and loop invariants.
    pub plumbing_triples: Vec<HoareTriple>,
    pub entailments: Vec<EntailmentObligation>,
}

impl ObligationSet {
    pub fn triples(&self) -> impl Iterator<Item = &HoareTriple> {
        self.local_triples.iter().chain(&self.plumbing_triples).chain(&self.global_triples)
    }
}

pub fn generate(o: &ProofOutline) -> ObligationSet {
    ObligationSet {
        local_triples: generate_local(o),
        global_triples: generate_global(o),
        plumbing_triples: generate_plumbing(o),
        entailments: generate_parallel_entailments(o),
    }
}

pub fn generate_local(o: &ProofOutline) -> Vec<HoareTriple> {
    let mut out = Vec::new();
    for t in &o.threads {
        for (pre, cmd, post) in t.body.atomic_steps() {
            out.push(HoareTriple::new(pre.clone(), t.tid, cmd.clone(), post.clone()));
        }
    }
    out
}

pub fn generate_global(o: &ProofOutline) -> Vec<HoareTriple> {
    let mut out = Vec::new();
    for actor in &o.threads {
        for (pre, cmd, _) in actor.body.atomic_steps() {
            for observer in o.threads.iter().filter(|t| t.tid != actor.tid) {
                for (i, r) in observer.body.assertions().into_iter().enumerate() {
                    out.push(HoareTriple {
                        pre: Assertion::and([r.clone(), pre.clone()]),
                        thread: actor.tid,
                        command: cmd.clone(),
                        post: r.clone(),
                        origin: Origin::Global { observer: observer.tid, assertion: i },
                    });
                }
            }
        }
    }
    out
}

pub fn generate_plumbing(o: &ProofOutline) -> Vec<HoareTriple> {
    let mut out = Vec::new();
    for t in &o.threads {
        plumbing(&t.body, t.tid, &mut out);
    }
    out
}

fn plumbing(b: &Block, t: Tid, out: &mut Vec<HoareTriple>) {
    let skip = |out: &mut Vec<HoareTriple>, pre: Assertion, post: &Assertion| {
        out.push(HoareTriple { pre, thread: t, command: Atomic::Skip, post: post.clone(), origin: Origin::Plumbing });
    };
    let negated = |c: &Assertion| c.negate_local().expect("guards are local");
    let mut pre = &b.pre;
    for step in &b.steps {
        match &step.command {
            Command::Atomic(_) => {}
            Command::If { cond, then_branch, else_branch } => {
                skip(out, Assertion::and([pre.clone(), cond.clone()]), &then_branch.pre);
                skip(out, Assertion::and([pre.clone(), negated(cond)]), &else_branch.pre);
                skip(out, then_branch.post().clone(), &step.post);
                skip(out, else_branch.post().clone(), &step.post);
            }
            Command::While { cond, invariant, body } => {
                skip(out, pre.clone(), invariant);
                skip(out, Assertion::and([invariant.clone(), cond.clone()]), &body.pre);
                skip(out, body.post().clone(), invariant);
                skip(out, Assertion::and([invariant.clone(), negated(cond)]), &step.post);
            }
        }
        match &step.command {
            Command::Atomic(_) => {}
            Command::If { then_branch, else_branch, .. } => {
                plumbing(then_branch, t, out);
                plumbing(else_branch, t, out);
            }
            Command::While { body, .. } => plumbing(body, t, out),
        }
        pre = &step.post;
    }
}

pub fn generate_parallel_entailments(o: &ProofOutline) -> Vec<EntailmentObligation> {
    let mut out: Vec<EntailmentObligation> = o
        .threads
        .iter()
        .map(|t| EntailmentObligation {
            kind: EntailmentKind::Initialization { thread: t.tid },
            lhs: o.precondition.clone(),
            rhs: t.body.pre.clone(),
        })
        .collect();
    out.push(EntailmentObligation {
        kind: EntailmentKind::Finalization,
        lhs: Assertion::and(o.threads.iter().map(|t| t.body.post().clone())),
        rhs: o.postcondition.clone(),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_outline;

    #[test]
    fn skip_thread() {
        let o = parse_outline("thread 1 { {true} skip; {true} }").unwrap();
        let s = generate(&o);
        assert_eq!(s.local_triples.len(), 1);
        assert!(s.global_triples.is_empty());
        assert_eq!(s.entailments.len(), 2);
    }

    #[test]
    fn sequence_shares_middle_assertion() {
        let o = parse_outline(
            "config { threads: 1; globals: x; registers: r@1; values: 0 1; }\n\
             thread 1 { { true } x := 1; { r = 0 } r := x; { true } }",
        )
        .unwrap();
        let l = generate_local(&o);
        assert_eq!(l.len(), 2);
        assert_eq!(l[0].post, l[1].pre);
    }

    #[test]
    fn two_threads_global_count() {
        let o = parse_outline(
            "config { threads: 1 2; globals: x; registers: ; values: 0 1; }\n\
             thread 1 { { true } x := 1; { true } }\n thread 2 { { true } x := 0; { true } }",
        )
        .unwrap();
        assert_eq!(generate_global(&o).len(), 4);
    }

    #[test]
    fn branches_produce_plumbing() {
        let o = parse_outline(
            "config { threads: 1; globals: x; registers: r@1; values: 0 1; }\n\
             thread 1 { { true } if (r = 0) { { r = 0 } x := 1; { true } } else { { r != 0 } skip; { true } } { true } }",
        )
        .unwrap();
        let p = generate_plumbing(&o);
        assert_eq!(p.len(), 4);
        assert!(p.iter().all(|t| t.command == Atomic::Skip && t.origin == Origin::Plumbing));
        assert_eq!(generate_local(&o).len(), 2);
    }
}
