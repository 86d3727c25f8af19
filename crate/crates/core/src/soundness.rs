//! Exhaustive instantiation of the proof rules and entailment facts over a
//! config, and their semantic check on built models.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::assertion::atoms::*;
use crate::assertion::{Assertion, ViewAtom};
use crate::axioms::AxiomId;
use crate::entail::FactUse;
use crate::model::ModelInstance;
use crate::oracle::Oracle;
use crate::rules::{RuleId, Triple};
use crate::syntax::{Atomic, Config, Expr, Tid, Value};

fn threads(c: &Config) -> Vec<u32> {
    c.threads.iter().map(|t| t.0).collect()
}

fn view_atoms(c: &Config) -> Vec<Assertion> {
    ViewAtom::enumerate(c).into_iter().map(Assertion::View).collect()
}

fn local_literals(c: &Config) -> Vec<Assertion> {
    let mut out = Vec::new();
    for r in &c.registers {
        for &v in &c.values {
            out.push(reg_eq(&r.name, v));
            out.push(reg_ne(&r.name, v));
        }
    }
    out
}

fn reads(c: &Config) -> Vec<(String, String, bool)> {
    let mut out = Vec::new();
    for r in &c.registers {
        for x in &c.globals {
            for sync in [false, true] {
                out.push((r.name.clone(), x.clone(), sync));
            }
        }
    }
    out
}

fn writes(c: &Config) -> Vec<(String, Value, bool)> {
    let mut out = Vec::new();
    for x in &c.globals {
        for &v in &c.values {
            for sync in [false, true] {
                out.push((x.clone(), v, sync));
            }
        }
    }
    out
}

fn write(x: &str, v: Value, sync: bool) -> Atomic {
    Atomic::Write { var: x.into(), expr: Expr::Lit(v), sync }
}

fn read(r: &str, x: &str, sync: bool) -> Atomic {
    Atomic::Read { reg: r.into(), var: x.into(), sync }
}

fn all_commands(c: &Config) -> Vec<Atomic> {
    let mut out = vec![Atomic::Skip, Atomic::Fence];
    out.extend(reads(c).iter().map(|(r, x, s)| read(r, x, *s)));
    out.extend(writes(c).iter().map(|(x, v, s)| write(x, *v, *s)));
    for r in &c.registers {
        for &v in &c.values {
            out.push(Atomic::AssignLocal { reg: r.name.clone(), expr: Expr::Lit(v) });
        }
    }
    out
}

/// Every instantiation of the rule's conclusion schema over `c`; empty for
/// glue rules and facts.
pub fn rule_instances(rule: RuleId, c: &Config) -> Vec<Triple> {
    let ts = threads(c);
    let vals = &c.values;
    let globals = &c.globals;
    let mut out = Vec::new();
    let mut push = |pre: Assertion, t: u32, cmd: Atomic, post: Assertion| out.push(Triple::new(pre, Tid(t), cmd, post));
    match rule {
        RuleId::True => {
            for p in view_atoms(c).into_iter().chain(local_literals(c)) {
                for &t in &ts {
                    for cmd in all_commands(c) {
                        push(p.clone(), t, cmd, Assertion::True);
                    }
                }
            }
        }
        RuleId::False => {
            for q in view_atoms(c).into_iter().chain(local_literals(c)) {
                for &t in &ts {
                    for cmd in all_commands(c) {
                        push(Assertion::False, t, cmd, q.clone());
                    }
                }
            }
        }
        RuleId::Skip => {
            for p in view_atoms(c).into_iter().chain(local_literals(c)) {
                for &t in &ts {
                    push(p.clone(), t, Atomic::Skip, p.clone());
                }
            }
        }
        RuleId::Fence1 => {
            for p in view_atoms(c) {
                for &t in &ts {
                    push(p.clone(), t, Atomic::Fence, p.clone());
                }
            }
        }
        RuleId::Fence2 => {
            for x in globals {
                for &t in &ts {
                    for &u in &ts {
                        push(up(x, t), t, Atomic::Fence, up(x, u));
                    }
                }
            }
        }
        RuleId::Fence3 => {
            for x in globals {
                for &v in vals {
                    for &t in &ts {
                        for &u in &ts {
                            push(maxv(x, v, t), t, Atomic::Fence, maxv(x, v, u));
                        }
                    }
                }
            }
        }
        RuleId::Read1 => {
            for p in view_atoms(c) {
                for &t in &ts {
                    for (r, x, s) in reads(c) {
                        push(p.clone(), t, read(&r, &x, s), p.clone());
                    }
                }
            }
        }
        RuleId::Read2 | RuleId::Read3 => {
            for &t in &ts {
                for (r, x, s) in reads(c) {
                    for &v in vals {
                        if rule == RuleId::Read2 {
                            push(imp(&x, v, t), t, read(&r, &x, s), reg_ne(&r, v));
                        } else {
                            push(maxv(&x, v, t), t, read(&r, &x, s), reg_eq(&r, v));
                        }
                    }
                }
            }
        }
        RuleId::ConRead1 => {
            for &t in &ts {
                for (r, x, s) in reads(c).into_iter().filter(|(_, _, s)| !s) {
                    for &v in vals {
                        push(cond(&x, v, t), t, read(&r, &x, s), Assertion::or([reg_ne(&r, v), maxv(&x, v, t)]));
                    }
                }
            }
        }
        RuleId::ConRead2 => {
            for &t in &ts {
                for (r, x, s) in reads(c).into_iter().filter(|(_, _, s)| *s) {
                    for &v in vals {
                        for y in globals {
                            for &u in vals {
                                let post = Assertion::or([reg_ne(&r, v), maxv(y, u, t)]);
                                push(scond(&x, v, y, u, t), t, read(&r, &x, s), post);
                            }
                        }
                    }
                }
            }
        }
        RuleId::ReadReg => {
            for p in local_literals(c) {
                for &t in &ts {
                    for (r, x, s) in reads(c) {
                        if !p.registers().contains(&r) {
                            push(p.clone(), t, read(&r, &x, s), p.clone());
                        }
                    }
                }
            }
        }
        RuleId::LocRead => {
            for p in view_atoms(c).into_iter().chain(local_literals(c)) {
                for &t in &ts {
                    for r in &c.registers {
                        if p.registers().contains(&r.name) {
                            continue;
                        }
                        for e in exprs(c) {
                            push(p.clone(), t, Atomic::AssignLocal { reg: r.name.clone(), expr: e }, p.clone());
                        }
                    }
                }
            }
        }
        RuleId::LocAssign => {
            for q in view_atoms(c).into_iter().chain(local_literals(c)) {
                for &t in &ts {
                    for r in &c.registers {
                        for e in exprs(c) {
                            let pre = q.substitute_expr(&r.name, &e);
                            push(pre, t, Atomic::AssignLocal { reg: r.name.clone(), expr: e }, q.clone());
                        }
                    }
                }
            }
        }
        RuleId::WriteReg => {
            for p in local_literals(c) {
                for &t in &ts {
                    for (x, v, s) in writes(c) {
                        push(p.clone(), t, write(&x, v, s), p.clone());
                    }
                }
            }
        }
        RuleId::Write1 | RuleId::Write2 | RuleId::Write3 | RuleId::Write4 => {
            for &t in &ts {
                for (x, v, s) in writes(c) {
                    for y in globals.iter().filter(|y| **y != x) {
                        for &u2 in &ts {
                            let atoms: Vec<Assertion> = match rule {
                                RuleId::Write1 => vals.iter().map(|&u| imp(y, u, u2)).collect(),
                                RuleId::Write2 => vals.iter().map(|&u| def(y, u, u2)).collect(),
                                RuleId::Write3 => vec![up(y, u2)],
                                _ => vals.iter().map(|&u| maxv(y, u, u2)).collect(),
                            };
                            for p in atoms {
                                push(p.clone(), t, write(&x, v, s), p);
                            }
                        }
                    }
                }
            }
        }
        RuleId::Write5 => {
            for &t in &ts {
                for (x, v, s) in writes(c) {
                    push(up(&x, t), t, write(&x, v, s), up(&x, t));
                }
            }
        }
        RuleId::Write6 => {
            for &t in &ts {
                for (x, v, s) in writes(c) {
                    for &u in vals {
                        push(maxv(&x, u, t), t, write(&x, v, s), maxv(&x, v, t));
                    }
                }
            }
        }
        RuleId::ConWrite1 => {
            for &t in &ts {
                for (x, v, s) in writes(c) {
                    for &u2 in ts.iter().filter(|&&u2| u2 != t) {
                        for &u in vals {
                            let pre = Assertion::and([imp(&x, v, u2), maxv(&x, u, t)]);
                            push(pre, t, write(&x, v, s), cond(&x, v, u2));
                        }
                    }
                }
            }
        }
        RuleId::ConWrite2 => {
            for &t in &ts {
                for (x, v, _) in writes(c).into_iter().filter(|w| w.2) {
                    for &u2 in ts.iter().filter(|&&u2| u2 != t) {
                        for y in globals.iter().filter(|y| **y != x) {
                            for &u in vals {
                                let pre = Assertion::and([imp(&x, v, u2), maxv(y, u, t)]);
                                push(pre, t, write(&x, v, true), scond(&x, v, y, u, u2));
                            }
                        }
                    }
                }
            }
        }
        _ => {}
    }
    out
}

fn exprs(c: &Config) -> Vec<Expr> {
    let mut out: Vec<Expr> = c.values.iter().map(|&v| Expr::Lit(v)).collect();
    out.extend(c.registers.iter().map(|r| Expr::Reg(r.name.clone())));
    out
}

/// Every instance of the entailment facts over `c`.
pub fn fact_instances(c: &Config) -> Vec<FactUse> {
    let mut out = Vec::new();
    let f = |fact, lhs: Vec<ViewAtom>, rhs: Option<ViewAtom>| FactUse { fact, lhs, rhs };
    for x in &c.globals {
        for &t in &c.threads {
            let imp_all: Vec<ViewAtom> =
                c.values.iter().map(|&v| ViewAtom::Impossible { var: x.clone(), value: v, thread: t }).collect();
            out.push(f(RuleId::E4, imp_all, None));
            for &v in &c.values {
                let mv = ViewAtom::MaxValue { var: x.clone(), value: v, thread: t };
                let dv = ViewAtom::Definite { var: x.clone(), value: v, thread: t };
                let iv = ViewAtom::Impossible { var: x.clone(), value: v, thread: t };
                out.push(f(RuleId::E1, vec![mv.clone()], Some(dv.clone())));
                out.push(f(RuleId::E2, vec![mv.clone()], Some(ViewAtom::MaxView { var: x.clone(), thread: t })));
                for &u in c.values.iter().filter(|&&u| u != v) {
                    out.push(f(
                        RuleId::E3,
                        vec![dv.clone()],
                        Some(ViewAtom::Impossible { var: x.clone(), value: u, thread: t }),
                    ));
                }
                for &t2 in c.threads.iter().filter(|&&t2| t2 != t) {
                    out.push(f(
                        RuleId::E5,
                        vec![mv.clone(), ViewAtom::MaxView { var: x.clone(), thread: t2 }],
                        Some(ViewAtom::MaxValue { var: x.clone(), value: v, thread: t2 }),
                    ));
                }
                out.push(f(
                    RuleId::E7,
                    vec![iv.clone()],
                    Some(ViewAtom::CondObs { var: x.clone(), value: v, thread: t }),
                ));
                for y in &c.globals {
                    for &u in &c.values {
                        let rhs = ViewAtom::SyncedCondObs {
                            cond_var: x.clone(),
                            cond_value: v,
                            var: y.clone(),
                            value: u,
                            thread: t,
                        };
                        out.push(f(RuleId::E6, vec![iv.clone()], Some(rhs)));
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessViolation {
    pub rule: RuleId,
    pub model: String,
    pub instance: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SoundnessReport {
    /// Instance/model pairs checked.
    pub checked: usize,
    /// Rules with no instance over the config.
    pub uninstantiated: Vec<RuleId>,
    pub violations: Vec<SoundnessViolation>,
}

impl SoundnessReport {
    pub fn sound(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every rule and fact instance on each model whose satisfied axioms
/// include the rule's.
pub fn check_soundness(config: &Config, models: &[(&ModelInstance, BTreeSet<AxiomId>)]) -> SoundnessReport {
    let mut report = SoundnessReport::default();
    for rule in RuleId::ALL.into_iter().filter(|r| r.is_leaf_rule()) {
        let inst = rule_instances(rule, config);
        if inst.is_empty() {
            report.uninstantiated.push(rule);
        }
        for (m, _) in models.iter().filter(|(_, sat)| rule.axioms().is_subset(sat)) {
            let bad: Vec<SoundnessViolation> = inst
                .par_iter()
                .map_init(
                    || Oracle::new(m),
                    |o, t| {
                        o.check_triple(&t.pre, t.thread, &t.command, &t.post).err().map(|e| SoundnessViolation {
                            rule,
                            model: m.name.clone(),
                            instance: t.to_string(),
                            detail: e.to_string(),
                        })
                    },
                )
                .flatten()
                .collect();
            report.checked += inst.len();
            report.violations.extend(bad);
        }
    }
    let facts = fact_instances(config);
    for (m, sat) in models {
        let o = Oracle::new(m);
        for f in facts.iter().filter(|f| f.fact.axioms().is_subset(sat)) {
            if let Err(e) = o.check_entailment(&f.lhs_assertion(), &f.rhs_assertion()) {
                report.violations.push(SoundnessViolation {
                    rule: f.fact,
                    model: m.name.clone(),
                    instance: format!("{} |= {}", f.lhs_assertion(), f.rhs_assertion()),
                    detail: e.to_string(),
                });
            }
            report.checked += 1;
        }
    }
    report
}
