//! Semantic meaning of assertions and Hoare triples on a model instance.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;

use crate::assertion::{Assertion, ViewAtom};
use crate::model::ModelInstance;
use crate::relation::{wlp, StateSet};
use crate::syntax::{Action, Atomic, Config, Tid, Value};

/// Why a semantic check failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SemanticFailure {
    /// A step from a state satisfying the pre lands outside the post.
    Violation { from: String, to: String },
    /// A state satisfies the left side of an entailment but not the right.
    NotEntailed { state: String },
    /// An expression is undefined or leaves the value set in some state.
    Evaluation { state: String, expr: String },
}

impl std::fmt::Display for SemanticFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SemanticFailure::Violation { from, to } => write!(f, "step from [{from}] reaches [{to}]"),
            SemanticFailure::NotEntailed { state } => write!(f, "state [{state}] is a counterexample"),
            SemanticFailure::Evaluation { state, expr } => write!(f, "`{expr}` has no value in [{state}]"),
        }
    }
}

/// Denotations and checks over one instance. Atom denotations are cached.
pub struct Oracle<'m> {
    pub m: &'m ModelInstance,
    atoms: RefCell<HashMap<ViewAtom, StateSet>>,
}

fn read_actions(config: &Config, var: &str, value: Value, sync: Option<bool>) -> Vec<Action> {
    let syncs: &[bool] = match sync {
        None => &[false, true],
        Some(false) => &[false],
        Some(true) => &[true],
    };
    let mut out = Vec::new();
    for &s in syncs {
        for r in &config.registers {
            out.push(Action::Read { var: var.into(), reg: r.name.clone(), value, sync: s });
        }
    }
    out
}

impl<'m> Oracle<'m> {
    pub fn new(m: &'m ModelInstance) -> Self {
        Oracle { m, atoms: RefCell::new(HashMap::new()) }
    }

    fn n(&self) -> usize {
        self.m.len()
    }

    /// States where `t` has a successor for some action in `acts`.
    fn enabled(&self, t: Tid, acts: &[Action]) -> StateSet {
        let rels: Vec<_> = acts.iter().map(|a| self.m.trans(t, a)).collect();
        StateSet::from_fn(self.n(), |s| rels.iter().any(|r| !r.succ(s).is_empty()))
    }

    /// `wlp` over the union of `T(t, a)` for `a` in `acts`.
    fn wlp_union(&self, t: Tid, acts: &[Action], p: &StateSet) -> StateSet {
        let mut out = self.m.full();
        for a in acts {
            out.intersect_with(&wlp(self.m.trans(t, a), p));
        }
        out
    }

    pub fn impossible(&self, x: &str, v: Value, t: Tid) -> StateSet {
        self.enabled(t, &read_actions(&self.m.config, x, v, None)).complement()
    }

    pub fn definite(&self, x: &str, v: Value, t: Tid) -> StateSet {
        let mut out = self.m.full();
        for &u in &self.m.config.values {
            if u != v {
                out.intersect_with(&self.impossible(x, u, t));
            }
        }
        out
    }

    pub fn max_view(&self, x: &str, t: Tid) -> StateSet {
        let mut out = self.m.full();
        for (k, a) in self.m.actions.iter().enumerate() {
            if a.var() == Some(x) {
                out.intersect_with(self.m.vmax_at(t, k));
            }
        }
        out
    }

    pub fn atom(&self, a: &ViewAtom) -> StateSet {
        if let Some(s) = self.atoms.borrow().get(a) {
            return s.clone();
        }
        let c = &self.m.config;
        let s = match a {
            ViewAtom::Impossible { var, value, thread } => self.impossible(var, *value, *thread),
            ViewAtom::Definite { var, value, thread } => self.definite(var, *value, *thread),
            ViewAtom::MaxView { var, thread } => self.max_view(var, *thread),
            ViewAtom::MaxValue { var, value, thread } => {
                self.definite(var, *value, *thread).intersection(&self.max_view(var, *thread))
            }
            ViewAtom::SyncedCondObs { cond_var, cond_value, var, value, thread } => {
                let target = self.atom(&ViewAtom::MaxValue { var: var.clone(), value: *value, thread: *thread });
                self.wlp_union(*thread, &read_actions(c, cond_var, *cond_value, Some(true)), &target)
            }
            ViewAtom::CondObs { var, value, thread } => {
                let target = self.atom(&ViewAtom::MaxValue { var: var.clone(), value: *value, thread: *thread });
                self.wlp_union(*thread, &read_actions(c, var, *value, Some(false)), &target)
            }
        };
        self.atoms.borrow_mut().insert(a.clone(), s.clone());
        s
    }

    pub fn denote(&self, p: &Assertion) -> StateSet {
        match p {
            Assertion::True => self.m.full(),
            Assertion::False => StateSet::empty(self.n()),
            Assertion::View(a) => self.atom(a),
            Assertion::Local(c) => {
                let config = &self.m.config;
                StateSet::from_fn(self.n(), |s| {
                    let st = &self.m.states[s];
                    c.eval(&|r| config.register_index(r).map(|i| st.regs[i])).unwrap_or(false)
                })
            }
            Assertion::And(ps) => {
                let mut out = self.m.full();
                for q in ps {
                    out.intersect_with(&self.denote(q));
                }
                out
            }
            Assertion::Or(ps) => {
                let mut out = StateSet::empty(self.n());
                for q in ps {
                    out.union_with(&self.denote(q));
                }
                out
            }
        }
    }

    fn render(&self, s: usize) -> String {
        self.m.states[s].render(&self.m.config)
    }

    fn eval_at(&self, s: usize, e: &crate::syntax::Expr) -> Result<Value, SemanticFailure> {
        let st = &self.m.states[s];
        let c = &self.m.config;
        match e.eval(&|r| c.register_index(r).map(|i| st.regs[i])) {
            Some(v) if c.has_value(v) => Ok(v),
            _ => Err(SemanticFailure::Evaluation { state: self.render(s), expr: e.to_string() }),
        }
    }

    /// Successors of state `s` under `cmd` executed by `t`.
    pub fn successors(&self, t: Tid, cmd: &Atomic, s: usize) -> Result<Vec<usize>, SemanticFailure> {
        let m = self.m;
        let c = &m.config;
        let out: Vec<usize> = match cmd {
            Atomic::Skip => vec![s],
            Atomic::Fence => m.trans(t, &Action::Fence).succ(s).iter().map(|&x| x as usize).collect(),
            Atomic::Read { reg, var, sync } => c
                .values
                .iter()
                .flat_map(|&v| {
                    let a = Action::Read { var: var.clone(), reg: reg.clone(), value: v, sync: *sync };
                    m.trans(t, &a).succ(s).iter().map(|&x| x as usize)
                })
                .collect(),
            Atomic::Write { var, expr, sync } => {
                let v = self.eval_at(s, expr)?;
                let a = Action::Write { var: var.clone(), value: v, sync: *sync };
                m.trans(t, &a).succ(s).iter().map(|&x| x as usize).collect()
            }
            Atomic::AssignLocal { reg, expr } => {
                let v = self.eval_at(s, expr)?;
                match m.assign(reg, v) {
                    Some(r) => r.succ(s).iter().map(|&x| x as usize).collect(),
                    None => return Err(SemanticFailure::Evaluation { state: self.render(s), expr: expr.to_string() }),
                }
            }
        };
        Ok(out)
    }

    /// `wlp` of an atomic command, with evaluation failures as errors.
    pub fn wlp_command(&self, t: Tid, cmd: &Atomic, q: &StateSet) -> Result<StateSet, SemanticFailure> {
        let mut out = StateSet::empty(self.n());
        for s in 0..self.n() {
            if self.successors(t, cmd, s)?.iter().all(|&x| q.contains(x)) {
                out.insert(s);
            }
        }
        Ok(out)
    }

    /// `denote(pre) ⊆ wlp(T(t, cmd), denote(post))`, with a witness on failure.
    pub fn check_triple(&self, pre: &Assertion, t: Tid, cmd: &Atomic, post: &Assertion) -> Result<(), SemanticFailure> {
        let p = self.denote(pre);
        let q = self.denote(post);
        for s in p.iter() {
            for x in self.successors(t, cmd, s)? {
                if !q.contains(x) {
                    return Err(SemanticFailure::Violation { from: self.render(s), to: self.render(x) });
                }
            }
        }
        Ok(())
    }

    pub fn check_entailment(&self, p: &Assertion, q: &Assertion) -> Result<(), SemanticFailure> {
        match self.denote(p).first_outside(&self.denote(q)) {
            None => Ok(()),
            Some(s) => Err(SemanticFailure::NotEntailed { state: self.render(s) }),
        }
    }

    /// `P ⊆ wlp(β, P)`.
    pub fn is_beta_stable(&self, p: &Assertion) -> bool {
        let d = self.denote(p);
        d.is_subset(&wlp(&self.m.beta, &d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertion::atoms::*;
    use crate::model::{MemoryModel, State, TsoModel};
    use crate::syntax::{Expr, Register};

    fn wrc() -> Config {
        Config::new(
            vec![Tid(1), Tid(2), Tid(3)],
            vec!["x".into(), "y".into()],
            vec![
                Register { name: "r1".into(), owner: Tid(2) },
                Register { name: "r2".into(), owner: Tid(3) },
                Register { name: "r3".into(), owner: Tid(3) },
            ],
            vec![0, 1],
        )
        .unwrap()
    }

    #[test]
    fn sc_all_zero_state() {
        let m = ModelInstance::build_sc(&wrc()).unwrap();
        let o = Oracle::new(&m);
        let z = m.state_index(&State::zero(&m.config)).unwrap();
        assert!(o.denote(&imp("x", 1, 2)).contains(z));
        assert!(o.denote(&maxv("x", 0, 1)).contains(z));
        assert!(!o.denote(&imp("x", 0, 2)).contains(z));
    }

    #[test]
    fn tso_pending_write_visible_after_flush() {
        let c = wrc();
        let m = ModelInstance::build_tso(&c, 1).unwrap();
        let o = Oracle::new(&m);
        let tso = TsoModel::new(c.clone(), 1).unwrap();
        let s = tso.primitive_step(&State::zero(&c), Tid(1), &Action::Write { var: "x".into(), value: 1, sync: false });
        let i = m.state_index(&s[0]).unwrap();
        // Thread 2 can flush and then read 1, so the impossibility fails.
        assert!(!o.denote(&imp("x", 1, 2)).contains(i));
        assert!(o.denote(&maxv("x", 1, 1)).contains(i));
        assert!(!o.denote(&up("x", 2)).contains(i));
    }

    #[test]
    fn triple_checks() {
        let m = ModelInstance::build_sc(&wrc()).unwrap();
        let o = Oracle::new(&m);
        let write = Atomic::Write { var: "x".into(), expr: Expr::Lit(1), sync: false };
        assert!(o.check_triple(&Assertion::True, Tid(1), &write, &maxv("x", 1, 2)).is_ok());
        assert!(o.check_triple(&Assertion::True, Tid(1), &write, &maxv("x", 0, 2)).is_err());
        let read = Atomic::Read { reg: "r1".into(), var: "x".into(), sync: false };
        assert!(o.check_triple(&maxv("x", 1, 2), Tid(2), &read, &reg_eq("r1", 1)).is_ok());
        let bad = Atomic::AssignLocal { reg: "r1".into(), expr: Expr::Lit(5) };
        assert!(matches!(
            o.check_triple(&Assertion::True, Tid(2), &bad, &Assertion::True),
            Err(SemanticFailure::Evaluation { .. })
        ));
    }

    #[test]
    fn local_assertions_are_not_beta_stable() {
        // β ignores registers, so only register-free assertions are stable.
        let m = ModelInstance::build_tso(&wrc(), 1).unwrap();
        let o = Oracle::new(&m);
        assert!(o.is_beta_stable(&maxv("x", 0, 1)));
        assert!(!o.is_beta_stable(&reg_eq("r1", 1)));
    }
}
