//! Exhaustive execution of outline programs, ignoring their annotations.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::assertion::Assertion;
use crate::model::{internal_closure, MemoryModel, State};
use crate::syntax::{Action, Atomic, Block, Command, Config, ProofOutline, Tid, Value};

pub const DEFAULT_CONFIG_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LitmusError {
    #[error("more than {0} configurations explored")]
    BoundExceeded(usize),
    #[error("`{expr}` has no value in the value domain at [{state}]")]
    Evaluation { state: String, expr: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Outcome {
    pub registers: BTreeMap<String, Value>,
    /// Whether the postcondition holds; `None` when it mentions view atoms.
    pub post_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LitmusReport {
    pub model: String,
    pub configurations: usize,
    pub outcomes: Vec<Outcome>,
}

impl LitmusReport {
    pub fn reachable(&self, regs: &[(&str, Value)]) -> bool {
        self.outcomes.iter().any(|o| regs.iter().all(|(r, v)| o.registers.get(*r) == Some(v)))
    }

    pub fn post_violations(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(|o| o.post_holds == Some(false))
    }
}

#[derive(Debug, Clone)]
enum Instr {
    Do(Atomic, usize),
    Branch(Assertion, usize, usize),
    End,
}

/// Flat control-flow graph for one thread, with `End` at index 0, and its
/// entry point.
fn compile(body: &Block) -> (Vec<Instr>, usize) {
    let mut code = vec![Instr::End];
    let entry = emit(body, 0, &mut code);
    (code, entry)
}

/// Emits `b` so that it continues at `next`; returns its entry point.
fn emit(b: &Block, next: usize, code: &mut Vec<Instr>) -> usize {
    let mut cont = next;
    for step in b.steps.iter().rev() {
        cont = match &step.command {
            Command::Atomic(a) => push(code, Instr::Do(a.clone(), cont)),
            Command::If { cond, then_branch, else_branch } => {
                let t = emit(then_branch, cont, code);
                let e = emit(else_branch, cont, code);
                push(code, Instr::Branch(cond.clone(), t, e))
            }
            Command::While { cond, body, .. } => {
                let head = push(code, Instr::End);
                let entry = emit(body, head, code);
                code[head] = Instr::Branch(cond.clone(), entry, cont);
                head
            }
        };
    }
    cont
}

fn push(code: &mut Vec<Instr>, i: Instr) -> usize {
    code.push(i);
    code.len() - 1
}

fn eval_guard(cond: &Assertion, s: &State, c: &Config) -> bool {
    cond.eval_with(&|r| c.register_index(r).map(|i| s.regs[i]), &mut |_| false)
}

/// All final register valuations of `o`'s program under `m`.
pub fn run_litmus(o: &ProofOutline, m: &dyn MemoryModel, cap: usize) -> Result<LitmusReport, LitmusError> {
    let c = m.config();
    let threads: Vec<(Tid, (Vec<Instr>, usize))> = o.threads.iter().map(|t| (t.tid, compile(&t.body))).collect();
    let entry: Vec<usize> = threads.iter().map(|(_, (_, e))| *e).collect();
    let eval = |s: &State, e: &crate::syntax::Expr| -> Result<Value, LitmusError> {
        match e.eval(&|r| c.register_index(r).map(|i| s.regs[i])) {
            Some(v) if c.has_value(v) => Ok(v),
            _ => Err(LitmusError::Evaluation { state: s.render(c), expr: e.to_string() }),
        }
    };

    type Conf = (Vec<usize>, State);
    let mut seen: HashSet<Conf> = HashSet::new();
    let mut stack: Vec<Conf> = Vec::new();
    let mut finals: BTreeSet<State> = BTreeSet::new();
    for s in m.initial_states() {
        let conf = (entry.clone(), s);
        if seen.insert(conf.clone()) {
            stack.push(conf);
        }
    }
    while let Some((pcs, s)) = stack.pop() {
        let mut next: Vec<Conf> = m.internal_steps(&s).into_iter().map(|n| (pcs.clone(), n)).collect();
        let mut done = true;
        for (i, (t, (prog, _))) in threads.iter().enumerate() {
            let mut at = |pc: usize, states: Vec<State>| {
                for n in states {
                    let mut p = pcs.clone();
                    p[i] = pc;
                    next.push((p, n));
                }
            };
            match &prog[pcs[i]] {
                Instr::End => {}
                Instr::Branch(cond, a, b) => {
                    done = false;
                    at(if eval_guard(cond, &s, c) { *a } else { *b }, vec![s.clone()]);
                }
                Instr::Do(cmd, pc) => {
                    done = false;
                    let out = match cmd {
                        Atomic::Skip => vec![s.clone()],
                        Atomic::Fence => m.primitive_step(&s, *t, &Action::Fence),
                        Atomic::Read { reg, var, sync } => c
                            .values
                            .iter()
                            .flat_map(|&v| {
                                let a = Action::Read { var: var.clone(), reg: reg.clone(), value: v, sync: *sync };
                                m.primitive_step(&s, *t, &a)
                            })
                            .collect(),
                        Atomic::Write { var, expr, sync } => {
                            let a = Action::Write { var: var.clone(), value: eval(&s, expr)?, sync: *sync };
                            m.primitive_step(&s, *t, &a)
                        }
                        Atomic::AssignLocal { reg, expr } => {
                            let a = Action::RegAssign { reg: reg.clone(), value: eval(&s, expr)? };
                            m.primitive_step(&s, *t, &a)
                        }
                    };
                    at(*pc, out);
                }
            }
        }
        if done {
            finals.extend(internal_closure(m, &s).into_iter().filter(|x| x.bufs.iter().all(Vec::is_empty)));
        }
        for n in next {
            if !seen.contains(&n) {
                if seen.len() >= cap {
                    return Err(LitmusError::BoundExceeded(cap));
                }
                seen.insert(n.clone());
                stack.push(n);
            }
        }
    }

    let local = o.postcondition.view_atoms().is_empty();
    let outcomes: BTreeSet<Outcome> = finals
        .iter()
        .map(|s| Outcome {
            registers: c.registers.iter().zip(&s.regs).map(|(r, &v)| (r.name.clone(), v)).collect(),
            post_holds: local.then(|| eval_guard(&o.postcondition, s, c)),
        })
        .collect();
    Ok(LitmusReport { model: m.name(), configurations: seen.len(), outcomes: outcomes.into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ScModel, TsoModel};
    use crate::parser::parse_litmus;

    const SB: &str = include_str!("../../../corpus/sb.litmus");

    #[test]
    fn store_buffering_separates_sc_from_tso() {
        let o = parse_litmus(SB).unwrap();
        let sc = run_litmus(&o, &ScModel::new(o.config.clone()), DEFAULT_CONFIG_CAP).unwrap();
        let tso = run_litmus(&o, &TsoModel::new(o.config.clone(), 2).unwrap(), DEFAULT_CONFIG_CAP).unwrap();
        assert!(!sc.reachable(&[("r1", 0), ("r2", 0)]));
        assert!(tso.reachable(&[("r1", 0), ("r2", 0)]));
        assert_eq!(sc.outcomes.len(), 3);
        assert_eq!(tso.outcomes.len(), 4);
    }

    #[test]
    fn loops_terminate_by_state_finiteness() {
        let src = "config { threads: 1; globals: x; registers: r@1; values: 0 1; }\n\
                   thread 1 { { true } while (r = 0) invariant { true } { { true } r := x; { true } } { true } }";
        let o = crate::parser::parse_outline(src).unwrap();
        let r = run_litmus(&o, &ScModel::new(o.config.clone()), 1000).unwrap();
        assert!(r.outcomes.is_empty());
    }

    #[test]
    fn branches_follow_guards() {
        let src = "config { threads: 1; globals: x; registers: r@1; values: 0 1; }\n\
                   thread 1 { { true } if (r = 0) { { true } x := 1; { true } } else { { true } skip; { true } } { true } \
                   r := x; { true } }";
        let o = crate::parser::parse_outline(src).unwrap();
        let r = run_litmus(&o, &ScModel::new(o.config.clone()), 1000).unwrap();
        assert_eq!(r.outcomes.len(), 1);
        assert!(r.reachable(&[("r", 1)]));
    }
}
