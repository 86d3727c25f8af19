//! View-based assertions.
//!
//! Six atom forms describe what a thread can observe about a shared
//! variable; local comparisons describe registers. Atoms are combined with
//! `And`/`Or` only: view atoms are never negated, negation of a local guard
//! is pushed into its comparisons.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::syntax::{Cmp, Config, Expr, Tid, Value};

/// One of the view atoms over a shared variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "atom", rename_all = "snake_case")]
pub enum ViewAtom {
    /// `[x !~ v]@t`: thread `t` cannot read `v` for `x`.
    Impossible { var: String, value: Value, thread: Tid },
    /// `[x == v]@t`: every value other than `v` is impossible.
    Definite { var: String, value: Value, thread: Tid },
    /// `up(x)@t`: `t` is view maximal on every action on `x`.
    MaxView { var: String, thread: Tid },
    /// `[x = v]@t`: definite value plus maximal view.
    MaxValue { var: String, value: Value, thread: Tid },
    /// `<y = u>S [x = v]@t`: after a synchronized read of `u` from `y`,
    /// `[x = v]@t` holds.
    SyncedCondObs { cond_var: String, cond_value: Value, var: String, value: Value, thread: Tid },
    /// `<x = v> [x = v]@t`: after reading `v` from `x`, `[x = v]@t` holds.
    CondObs { var: String, value: Value, thread: Tid },
}

impl ViewAtom {
    pub fn thread(&self) -> Tid {
        match self {
            ViewAtom::Impossible { thread, .. }
            | ViewAtom::Definite { thread, .. }
            | ViewAtom::MaxView { thread, .. }
            | ViewAtom::MaxValue { thread, .. }
            | ViewAtom::SyncedCondObs { thread, .. }
            | ViewAtom::CondObs { thread, .. } => *thread,
        }
    }

    /// Shared variables the atom talks about.
    pub fn vars(&self) -> Vec<&str> {
        match self {
            ViewAtom::Impossible { var, .. }
            | ViewAtom::Definite { var, .. }
            | ViewAtom::MaxView { var, .. }
            | ViewAtom::MaxValue { var, .. }
            | ViewAtom::CondObs { var, .. } => vec![var],
            ViewAtom::SyncedCondObs { cond_var, var, .. } => vec![cond_var, var],
        }
    }

    /// Every atom over `config`, in a fixed order.
    pub fn enumerate(config: &Config) -> Vec<ViewAtom> {
        let mut out = Vec::new();
        for &t in &config.threads {
            for x in &config.globals {
                for &v in &config.values {
                    out.push(ViewAtom::Impossible { var: x.clone(), value: v, thread: t });
                    out.push(ViewAtom::Definite { var: x.clone(), value: v, thread: t });
                    out.push(ViewAtom::MaxValue { var: x.clone(), value: v, thread: t });
                    out.push(ViewAtom::CondObs { var: x.clone(), value: v, thread: t });
                    for y in &config.globals {
                        for &u in &config.values {
                            out.push(ViewAtom::SyncedCondObs {
                                cond_var: y.clone(),
                                cond_value: u,
                                var: x.clone(),
                                value: v,
                                thread: t,
                            });
                        }
                    }
                }
                out.push(ViewAtom::MaxView { var: x.clone(), thread: t });
            }
        }
        out
    }
}

impl fmt::Display for ViewAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViewAtom::Impossible { var, value, thread } => write!(f, "[{var} !~ {value}]@{thread}"),
            ViewAtom::Definite { var, value, thread } => write!(f, "[{var} == {value}]@{thread}"),
            ViewAtom::MaxView { var, thread } => write!(f, "up({var})@{thread}"),
            ViewAtom::MaxValue { var, value, thread } => write!(f, "[{var} = {value}]@{thread}"),
            ViewAtom::SyncedCondObs { cond_var, cond_value, var, value, thread } => {
                write!(f, "<{cond_var} = {cond_value}>S [{var} = {value}]@{thread}")
            }
            ViewAtom::CondObs { var, value, thread } => write!(f, "<{var} = {value}> [{var} = {value}]@{thread}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Assertion {
    True,
    False,
    View(ViewAtom),
    Local(Cmp),
    And(Vec<Assertion>),
    Or(Vec<Assertion>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AssertionClass {
    Global,
    Local,
    Mixed,
}

/// A leaf of a normal form: either a view atom or a register comparison.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    View(ViewAtom),
    Local(CmpKey),
}

/// `Cmp` wrapped with a total order so literals can live in ordered sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CmpKey(pub Cmp);

impl PartialOrd for CmpKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CmpKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.to_string().cmp(&other.0.to_string())
    }
}

impl Literal {
    pub fn to_assertion(&self) -> Assertion {
        match self {
            Literal::View(a) => Assertion::View(a.clone()),
            Literal::Local(c) => Assertion::Local(c.0.clone()),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::View(a) => write!(f, "{a}"),
            Literal::Local(c) => write!(f, "{}", c.0),
        }
    }
}

/// Normal forms exceeding this many clauses are rejected.
pub const NORMAL_FORM_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("normal form exceeds {NORMAL_FORM_CAP} clauses")]
pub struct NormalFormTooLarge;

/// Result of evaluating an expression against the local part of an assertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Determined {
    Value(Value),
    NotDetermined,
}

impl Assertion {
    pub fn and(parts: impl IntoIterator<Item = Assertion>) -> Assertion {
        let v: Vec<_> = parts.into_iter().collect();
        match v.len() {
            0 => Assertion::True,
            1 => v.into_iter().next().unwrap(),
            _ => Assertion::And(v),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Assertion>) -> Assertion {
        let v: Vec<_> = parts.into_iter().collect();
        match v.len() {
            0 => Assertion::False,
            1 => v.into_iter().next().unwrap(),
            _ => Assertion::Or(v),
        }
    }

    pub fn view(atom: ViewAtom) -> Assertion {
        Assertion::View(atom)
    }

    fn count_leaves(&self, view: &mut usize, local: &mut usize) {
        match self {
            Assertion::True | Assertion::False => {}
            Assertion::View(_) => *view += 1,
            Assertion::Local(_) => *local += 1,
            Assertion::And(ps) | Assertion::Or(ps) => ps.iter().for_each(|p| p.count_leaves(view, local)),
        }
    }

    /// Global iff no local leaf; Local iff only local leaves; else Mixed.
    /// Constant-only assertions are Global.
    pub fn classify(&self) -> AssertionClass {
        let (mut view, mut local) = (0, 0);
        self.count_leaves(&mut view, &mut local);
        match (view, local) {
            (_, 0) => AssertionClass::Global,
            (0, _) => AssertionClass::Local,
            _ => AssertionClass::Mixed,
        }
    }

    /// No register comparison anywhere (member of the global fragment).
    pub fn is_global(&self) -> bool {
        self.classify() == AssertionClass::Global
    }

    /// No view atom anywhere (member of the local fragment).
    pub fn is_local(&self) -> bool {
        let (mut view, mut local) = (0, 0);
        self.count_leaves(&mut view, &mut local);
        view == 0
    }

    pub fn registers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_registers(&mut out);
        out
    }

    fn collect_registers(&self, out: &mut BTreeSet<String>) {
        match self {
            Assertion::Local(c) => c.registers(out),
            Assertion::And(ps) | Assertion::Or(ps) => ps.iter().for_each(|p| p.collect_registers(out)),
            _ => {}
        }
    }

    pub fn view_atoms(&self) -> Vec<&ViewAtom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a ViewAtom>) {
        match self {
            Assertion::View(a) => out.push(a),
            Assertion::And(ps) | Assertion::Or(ps) => ps.iter().for_each(|p| p.collect_atoms(out)),
            _ => {}
        }
    }

    /// Replace register `reg` by the value `v` in every local leaf. Leaves
    /// that become closed are evaluated to `True`/`False`.
    pub fn substitute_register(&self, reg: &str, v: Value) -> Assertion {
        self.substitute_expr(reg, &Expr::Lit(v))
    }

    /// Backward substitution `P[reg := e]`.
    pub fn substitute_expr(&self, reg: &str, by: &Expr) -> Assertion {
        match self {
            Assertion::Local(c) => {
                let c = c.substitute(reg, by);
                let mut regs = BTreeSet::new();
                c.registers(&mut regs);
                if regs.is_empty() {
                    match c.eval(&|_| None) {
                        Some(true) => Assertion::True,
                        Some(false) => Assertion::False,
                        // Arithmetic overflow: keep the leaf symbolic.
                        None => Assertion::Local(c),
                    }
                } else {
                    Assertion::Local(c)
                }
            }
            Assertion::And(ps) => Assertion::And(ps.iter().map(|p| p.substitute_expr(reg, by)).collect()),
            Assertion::Or(ps) => Assertion::Or(ps.iter().map(|p| p.substitute_expr(reg, by)).collect()),
            other => other.clone(),
        }
    }

    /// Flatten nested `And`/`Or` and remove `True`/`False` units.
    pub fn normalize(&self) -> Assertion {
        match self {
            Assertion::And(ps) => {
                let mut out = Vec::new();
                for p in ps {
                    match p.normalize() {
                        Assertion::True => {}
                        Assertion::False => return Assertion::False,
                        Assertion::And(qs) => out.extend(qs),
                        q => out.push(q),
                    }
                }
                Assertion::and(out)
            }
            Assertion::Or(ps) => {
                let mut out = Vec::new();
                for p in ps {
                    match p.normalize() {
                        Assertion::False => {}
                        Assertion::True => return Assertion::True,
                        Assertion::Or(qs) => out.extend(qs),
                        q => out.push(q),
                    }
                }
                Assertion::or(out)
            }
            other => other.clone(),
        }
    }

    /// Negation of a local assertion (De Morgan down to the comparisons).
    /// Returns `None` when the assertion contains a view atom.
    pub fn negate_local(&self) -> Option<Assertion> {
        Some(match self {
            Assertion::True => Assertion::False,
            Assertion::False => Assertion::True,
            Assertion::View(_) => return None,
            Assertion::Local(c) => Assertion::Local(c.negate()),
            Assertion::And(ps) => Assertion::Or(ps.iter().map(|p| p.negate_local()).collect::<Option<_>>()?),
            Assertion::Or(ps) => Assertion::And(ps.iter().map(|p| p.negate_local()).collect::<Option<_>>()?),
        })
    }

    /// Evaluate with a register environment and an oracle for view atoms.
    /// Unknown registers make a leaf evaluate to false.
    pub fn eval_with(&self, env: &impl Fn(&str) -> Option<Value>, atom: &mut impl FnMut(&ViewAtom) -> bool) -> bool {
        match self {
            Assertion::True => true,
            Assertion::False => false,
            Assertion::View(a) => atom(a),
            Assertion::Local(c) => c.eval(env).unwrap_or(false),
            Assertion::And(ps) => ps.iter().all(|p| p.eval_with(env, atom)),
            Assertion::Or(ps) => ps.iter().any(|p| p.eval_with(env, atom)),
        }
    }

    /// Disjunctive normal form: a list of conjunctions of literals. `[]` is
    /// false, `[[]]` is true.
    pub fn dnf(&self) -> Result<Vec<BTreeSet<Literal>>, NormalFormTooLarge> {
        let mut out = match self {
            Assertion::True => vec![BTreeSet::new()],
            Assertion::False => vec![],
            Assertion::View(a) => vec![BTreeSet::from([Literal::View(a.clone())])],
            Assertion::Local(c) => vec![BTreeSet::from([Literal::Local(CmpKey(c.clone()))])],
            Assertion::Or(ps) => {
                let mut acc = Vec::new();
                for p in ps {
                    acc.extend(p.dnf()?);
                    if acc.len() > NORMAL_FORM_CAP {
                        return Err(NormalFormTooLarge);
                    }
                }
                acc
            }
            Assertion::And(ps) => {
                let mut acc = vec![BTreeSet::new()];
                for p in ps {
                    let d = p.dnf()?;
                    if acc.len().saturating_mul(d.len()) > NORMAL_FORM_CAP {
                        return Err(NormalFormTooLarge);
                    }
                    let mut next = Vec::with_capacity(acc.len() * d.len());
                    for a in &acc {
                        for b in &d {
                            next.push(a.union(b).cloned().collect());
                        }
                    }
                    acc = next;
                }
                acc
            }
        };
        dedup_sets(&mut out);
        Ok(out)
    }

    /// Conjunctive normal form: a list of clauses (disjunctions). `[]` is
    /// true, a clause `{}` is false.
    pub fn cnf(&self) -> Result<Vec<BTreeSet<Literal>>, NormalFormTooLarge> {
        let mut out = match self {
            Assertion::True => vec![],
            Assertion::False => vec![BTreeSet::new()],
            Assertion::View(a) => vec![BTreeSet::from([Literal::View(a.clone())])],
            Assertion::Local(c) => vec![BTreeSet::from([Literal::Local(CmpKey(c.clone()))])],
            Assertion::And(ps) => {
                let mut acc = Vec::new();
                for p in ps {
                    acc.extend(p.cnf()?);
                    if acc.len() > NORMAL_FORM_CAP {
                        return Err(NormalFormTooLarge);
                    }
                }
                acc
            }
            Assertion::Or(ps) => {
                let mut acc = vec![BTreeSet::new()];
                for p in ps {
                    let c = p.cnf()?;
                    if acc.len().saturating_mul(c.len()) > NORMAL_FORM_CAP {
                        return Err(NormalFormTooLarge);
                    }
                    let mut next = Vec::with_capacity(acc.len() * c.len());
                    for a in &acc {
                        for b in &c {
                            next.push(a.union(b).cloned().collect());
                        }
                    }
                    acc = next;
                }
                acc
            }
        };
        dedup_sets(&mut out);
        Ok(out)
    }

    pub fn from_conjunction(lits: &BTreeSet<Literal>) -> Assertion {
        Assertion::and(lits.iter().map(Literal::to_assertion))
    }

    pub fn from_clause(lits: &BTreeSet<Literal>) -> Assertion {
        Assertion::or(lits.iter().map(Literal::to_assertion))
    }

    /// The local leaves of a conjunction-shaped assertion.
    fn local_conjuncts(&self) -> Vec<&Cmp> {
        match self {
            Assertion::Local(c) => vec![c],
            Assertion::And(ps) => ps.iter().flat_map(|p| p.local_conjuncts()).collect(),
            _ => vec![],
        }
    }

    /// Value of `e` under every register valuation satisfying the local
    /// conjuncts of `self`, if that value is unique. Literals are always
    /// determined.
    pub fn eval_local_under(&self, e: &Expr, config: &Config) -> Determined {
        if let Some(v) = e.as_literal() {
            return Determined::Value(v);
        }
        let constraints = self.local_conjuncts();
        let mut regs = BTreeSet::new();
        e.registers(&mut regs);
        for c in &constraints {
            c.registers(&mut regs);
        }
        let regs: Vec<String> = regs.into_iter().collect();
        let mut result = None;
        let mut consistent = true;
        for_each_valuation(&regs, &config.values, &mut |vals| {
            let env = |r: &str| regs.iter().position(|x| x == r).map(|i| vals[i]);
            if constraints.iter().all(|c| c.eval(&env) == Some(true)) {
                let v = e.eval(&env);
                match (result, v) {
                    (None, Some(v)) => result = Some(v),
                    (Some(prev), Some(v)) if prev == v => {}
                    _ => consistent = false,
                }
            }
            consistent
        });
        match (consistent, result) {
            (true, Some(v)) => Determined::Value(v),
            _ => Determined::NotDetermined,
        }
    }
}

fn dedup_sets(v: &mut Vec<BTreeSet<Literal>>) {
    let mut seen = BTreeSet::new();
    v.retain(|s| seen.insert(s.clone()));
}

/// Call `f` on every assignment of `values` to `regs`; stop early when `f`
/// returns false. Returns false iff stopped early.
pub fn for_each_valuation(regs: &[String], values: &[Value], f: &mut impl FnMut(&[Value]) -> bool) -> bool {
    let mut idx = vec![0usize; regs.len()];
    let mut vals: Vec<Value> = vec![values[0]; regs.len()];
    loop {
        for (i, &k) in idx.iter().enumerate() {
            vals[i] = values[k];
        }
        if !f(&vals) {
            return false;
        }
        let mut i = 0;
        loop {
            if i == idx.len() {
                return true;
            }
            idx[i] += 1;
            if idx[i] < values.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, p: &Assertion) -> fmt::Result {
            match p {
                Assertion::And(ps) | Assertion::Or(ps) if ps.len() >= 2 => write!(f, "({p})"),
                _ => write!(f, "{p}"),
            }
        }
        match self {
            Assertion::True => write!(f, "true"),
            Assertion::False => write!(f, "false"),
            Assertion::View(a) => write!(f, "{a}"),
            Assertion::Local(c) => write!(f, "{c}"),
            Assertion::And(ps) | Assertion::Or(ps) => {
                let sep = if matches!(self, Assertion::And(_)) { " /\\ " } else { " \\/ " };
                match ps.len() {
                    0 => write!(f, "{}", if matches!(self, Assertion::And(_)) { "true" } else { "false" }),
                    1 => write!(f, "{}", ps[0]),
                    _ => {
                        for (i, p) in ps.iter().enumerate() {
                            if i > 0 {
                                write!(f, "{sep}")?;
                            }
                            child(f, p)?;
                        }
                        Ok(())
                    }
                }
            }
        }
    }
}

/// Shorthand constructors used throughout tests and the rule engine.
pub mod atoms {
    use super::*;

    pub fn imp(var: &str, value: Value, t: u32) -> Assertion {
        Assertion::View(ViewAtom::Impossible { var: var.into(), value, thread: Tid(t) })
    }
    pub fn def(var: &str, value: Value, t: u32) -> Assertion {
        Assertion::View(ViewAtom::Definite { var: var.into(), value, thread: Tid(t) })
    }
    pub fn up(var: &str, t: u32) -> Assertion {
        Assertion::View(ViewAtom::MaxView { var: var.into(), thread: Tid(t) })
    }
    pub fn maxv(var: &str, value: Value, t: u32) -> Assertion {
        Assertion::View(ViewAtom::MaxValue { var: var.into(), value, thread: Tid(t) })
    }
    pub fn scond(cond_var: &str, cond_value: Value, var: &str, value: Value, t: u32) -> Assertion {
        Assertion::View(ViewAtom::SyncedCondObs {
            cond_var: cond_var.into(),
            cond_value,
            var: var.into(),
            value,
            thread: Tid(t),
        })
    }
    pub fn cond(var: &str, value: Value, t: u32) -> Assertion {
        Assertion::View(ViewAtom::CondObs { var: var.into(), value, thread: Tid(t) })
    }
    pub fn reg_eq(reg: &str, v: Value) -> Assertion {
        Assertion::Local(Cmp::reg(reg, crate::syntax::CmpOp::Eq, v))
    }
    pub fn reg_ne(reg: &str, v: Value) -> Assertion {
        Assertion::Local(Cmp::reg(reg, crate::syntax::CmpOp::Ne, v))
    }
}

#[cfg(test)]
mod tests {
    use super::atoms::*;
    use super::*;
    use crate::syntax::{Register, Tid};

    fn cfg01() -> Config {
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
    fn classification() {
        assert_eq!(imp("y", 1, 3).classify(), AssertionClass::Global);
        assert_eq!(reg_ne("r1", 1).classify(), AssertionClass::Local);
        let p31 = Assertion::Or(vec![reg_ne("r1", 1), scond("y", 1, "x", 1, 3)]);
        assert_eq!(p31.classify(), AssertionClass::Mixed);
        assert_eq!(p31.registers(), BTreeSet::from(["r1".to_string()]));
    }

    #[test]
    fn registers_of() {
        assert!(maxv("x", 0, 1).registers().is_empty());
        let p = Assertion::And(vec![reg_eq("r1", 1), reg_eq("r2", 1)]);
        assert_eq!(p.registers(), BTreeSet::from(["r1".to_string(), "r2".to_string()]));
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(reg_ne("r1", 1).substitute_register("r2", 0), reg_ne("r1", 1));
        assert_eq!(reg_ne("r2", 1).substitute_register("r2", 3), Assertion::True);
        let p = Assertion::And(vec![maxv("x", 1, 3), reg_eq("r3", 0)]);
        assert_eq!(p.substitute_register("r3", 1), Assertion::And(vec![maxv("x", 1, 3), Assertion::False]));
    }

    #[test]
    fn eval_local_under_examples() {
        let c = cfg01();
        assert_eq!(Assertion::True.eval_local_under(&Expr::Lit(1), &c), Determined::Value(1));
        let r1 = Expr::Reg("r1".into());
        assert_eq!(reg_eq("r1", 0).eval_local_under(&r1, &c), Determined::Value(0));
        assert_eq!(Assertion::True.eval_local_under(&r1, &c), Determined::NotDetermined);
        // Unsatisfiable local content determines nothing.
        let bot = Assertion::And(vec![reg_eq("r1", 0), reg_eq("r1", 1)]);
        assert_eq!(bot.eval_local_under(&r1, &c), Determined::NotDetermined);
    }

    #[test]
    fn normalize_units() {
        let p = imp("x", 1, 2);
        assert_eq!(Assertion::And(vec![p.clone(), Assertion::True]).normalize(), p);
        assert_eq!(Assertion::Or(vec![p.clone(), Assertion::False]).normalize(), p);
        assert_eq!(Assertion::And(vec![p.clone(), Assertion::False]).normalize(), Assertion::False);
        assert_eq!(Assertion::Or(vec![p.clone(), Assertion::True]).normalize(), Assertion::True);
        let nested = Assertion::And(vec![Assertion::And(vec![p.clone(), up("x", 1)]), up("y", 2)]);
        assert_eq!(nested.normalize(), Assertion::And(vec![p, up("x", 1), up("y", 2)]));
    }

    #[test]
    fn normal_forms() {
        let p21 = Assertion::And(vec![
            imp("y", 1, 3),
            reg_ne("r2", 1),
            Assertion::Or(vec![maxv("x", 0, 2), cond("x", 1, 2)]),
        ]);
        assert_eq!(p21.dnf().unwrap().len(), 2);
        assert_eq!(p21.cnf().unwrap().len(), 3);
        assert_eq!(Assertion::True.dnf().unwrap(), vec![BTreeSet::new()]);
        assert!(Assertion::False.dnf().unwrap().is_empty());
        assert!(Assertion::True.cnf().unwrap().is_empty());
    }

    #[test]
    fn negation_is_local_only() {
        assert!(imp("x", 1, 1).negate_local().is_none());
        let g = Assertion::And(vec![reg_eq("r1", 1), reg_ne("r2", 0)]);
        assert_eq!(g.negate_local().unwrap(), Assertion::Or(vec![reg_ne("r1", 1), reg_eq("r2", 0)]));
    }

    #[test]
    fn display_syntax() {
        let p = Assertion::Or(vec![reg_ne("r1", 1), scond("y", 1, "x", 1, 3)]);
        assert_eq!(p.to_string(), "r1 != 1 \\/ <y = 1>S [x = 1]@3");
        let q = Assertion::And(vec![imp("x", 1, 2), Assertion::Or(vec![up("x", 1), def("y", 0, 2)])]);
        assert_eq!(q.to_string(), "[x !~ 1]@2 /\\ (up(x)@1 \\/ [y == 0]@2)");
    }

    #[test]
    fn atom_enumeration_size() {
        // per (t, x): 4 per value + 2*2 synced per value + maxview
        let n = ViewAtom::enumerate(&cfg01()).len();
        assert_eq!(n, 3 * 2 * (2 * (4 + 4) + 1));
    }
}
