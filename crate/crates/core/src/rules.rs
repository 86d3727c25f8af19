//! Proof rules, syntactic discharge of Hoare triples, and derivation checking.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::assertion::atoms::{cond, imp, maxv, reg_eq, reg_ne, scond, up};
use crate::assertion::{Assertion, Determined, Literal, ViewAtom};
use crate::axioms::AxiomId;
use crate::entail::{clause_entailed, entails_within, is_fact_instance, Budget, FactUse};
use crate::syntax::{Atomic, Cmp, CmpOp, Config, Expr, Tid, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    True,
    False,
    Mono,
    Conj,
    Disj,
    Fence1,
    Fence2,
    Fence3,
    Read1,
    Read2,
    Read3,
    ConRead1,
    ConRead2,
    ReadReg,
    LocRead,
    Write1,
    Write2,
    Write3,
    Write4,
    Write5,
    Write6,
    ConWrite1,
    ConWrite2,
    WriteReg,
    LocAssign,
    Skip,
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
}

impl RuleId {
    pub const ALL: [RuleId; 33] = [
        RuleId::True,
        RuleId::False,
        RuleId::Mono,
        RuleId::Conj,
        RuleId::Disj,
        RuleId::Fence1,
        RuleId::Fence2,
        RuleId::Fence3,
        RuleId::Read1,
        RuleId::Read2,
        RuleId::Read3,
        RuleId::ConRead1,
        RuleId::ConRead2,
        RuleId::ReadReg,
        RuleId::LocRead,
        RuleId::Write1,
        RuleId::Write2,
        RuleId::Write3,
        RuleId::Write4,
        RuleId::Write5,
        RuleId::Write6,
        RuleId::ConWrite1,
        RuleId::ConWrite2,
        RuleId::WriteReg,
        RuleId::LocAssign,
        RuleId::Skip,
        RuleId::E1,
        RuleId::E2,
        RuleId::E3,
        RuleId::E4,
        RuleId::E5,
        RuleId::E6,
        RuleId::E7,
    ];

    /// Command rules tried by discharge, in priority order.
    pub const READ_PRIORITY: [RuleId; 7] = [
        RuleId::ReadReg,
        RuleId::LocRead,
        RuleId::Read3,
        RuleId::Read2,
        RuleId::ConRead1,
        RuleId::ConRead2,
        RuleId::Read1,
    ];
    pub const WRITE_PRIORITY: [RuleId; 9] = [
        RuleId::WriteReg,
        RuleId::Write1,
        RuleId::Write2,
        RuleId::Write3,
        RuleId::Write4,
        RuleId::Write5,
        RuleId::Write6,
        RuleId::ConWrite1,
        RuleId::ConWrite2,
    ];
    pub const FENCE_PRIORITY: [RuleId; 3] = [RuleId::Fence1, RuleId::Fence2, RuleId::Fence3];
    pub const ASSIGN_PRIORITY: [RuleId; 2] = [RuleId::LocRead, RuleId::LocAssign];

    pub fn axioms(self) -> BTreeSet<AxiomId> {
        use AxiomId::*;
        let list: &[AxiomId] = match self {
            RuleId::Fence1 => &[C3, SV1, SV2],
            RuleId::Fence2 => &[FNC],
            RuleId::Fence3 => &[C2, C3, SV1, SV2, RW6, FNC],
            RuleId::Read1 => &[C3, SV1, SV2, RW2, RW3],
            RuleId::Write1 | RuleId::Write2 => &[C3, SV1],
            RuleId::Write3 => &[C3, SV2],
            RuleId::Write4 => &[C3, SV1, SV2],
            RuleId::Write5 => &[C3, C4],
            RuleId::Write6 => &[C3, C4, RW5, RW6],
            RuleId::ConWrite1 => &[C2, C3, C4, SV1, SV2, RW2, RW3, RW5, RW6, RW7],
            RuleId::ConWrite2 => &[C2, C3, SV1, SV2, RW2, RW3, RW6, MP],
            RuleId::E4 => &[RW4],
            RuleId::E5 => &[C2, RW6],
            _ => &[],
        };
        list.iter().copied().collect()
    }

    pub fn is_glue(self) -> bool {
        matches!(self, RuleId::Mono | RuleId::Conj | RuleId::Disj)
    }

    pub fn is_fact(self) -> bool {
        matches!(self, RuleId::E1 | RuleId::E2 | RuleId::E3 | RuleId::E4 | RuleId::E5 | RuleId::E6 | RuleId::E7)
    }

    /// Rules whose conclusion is matched against a triple directly.
    pub fn is_leaf_rule(self) -> bool {
        !self.is_glue() && !self.is_fact()
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

impl FromStr for RuleId {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

/// `{pre} command_thread {post}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Triple {
    pub pre: Assertion,
    pub thread: Tid,
    pub command: Atomic,
    pub post: Assertion,
}

impl Triple {
    pub fn new(pre: Assertion, thread: Tid, command: Atomic, post: Assertion) -> Self {
        Triple { pre, thread, command, post }
    }

    fn with(&self, pre: Assertion, post: Assertion) -> Triple {
        Triple { pre, post, thread: self.thread, command: self.command.clone() }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} {}@{} {{{}}}", self.pre, self.command, self.thread, self.post)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Judgment {
    Triple(Triple),
    Entailment { lhs: Assertion, rhs: Assertion },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub conclusion: Judgment,
    pub rule: RuleId,
    pub premises: Vec<Derivation>,
    pub side_conditions: Vec<String>,
    pub axioms: BTreeSet<AxiomId>,
}

impl Derivation {
    fn node(conclusion: Judgment, rule: RuleId, premises: Vec<Derivation>, side_conditions: Vec<String>) -> Self {
        let mut axioms = rule.axioms();
        for p in &premises {
            axioms.extend(p.axioms.iter().copied());
        }
        Derivation { conclusion, rule, premises, side_conditions, axioms }
    }

    fn fact(f: &FactUse) -> Self {
        Derivation::node(
            Judgment::Entailment { lhs: f.lhs_assertion(), rhs: f.rhs_assertion() },
            f.fact,
            vec![],
            vec![],
        )
    }

    pub fn triple(&self) -> Option<&Triple> {
        match &self.conclusion {
            Judgment::Triple(t) => Some(t),
            Judgment::Entailment { .. } => None,
        }
    }

    pub fn rules_used(&self) -> BTreeSet<RuleId> {
        let mut out = BTreeSet::from([self.rule]);
        for p in &self.premises {
            out.extend(p.rules_used());
        }
        out
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }
}

pub fn axioms_of_derivation(d: &Derivation) -> BTreeSet<AxiomId> {
    let mut out = d.rule.axioms();
    for p in &d.premises {
        out.extend(axioms_of_derivation(p));
    }
    out
}

fn lit(a: ViewAtom) -> Assertion {
    Assertion::View(a)
}

fn reg_cmp(c: &Cmp) -> Option<(&str, CmpOp, Value)> {
    match (&c.lhs, &c.rhs) {
        (Expr::Reg(r), Expr::Lit(v)) => Some((r, c.op, *v)),
        _ => None,
    }
}

/// Flattened conjuncts of an assertion.
fn conjuncts(p: &Assertion) -> Vec<&Assertion> {
    match p {
        Assertion::And(ps) => ps.iter().flat_map(conjuncts).collect(),
        _ => vec![p],
    }
}

/// Splits `pre` into its view conjuncts and checks that the rest are local
/// facts fixing `⟦e⟧`; returns that value.
fn split_valued_pre<'a>(pre: &'a Assertion, e: &Expr, config: &Config) -> Option<(Vec<&'a ViewAtom>, Value)> {
    let mut view = Vec::new();
    for c in conjuncts(pre) {
        match c {
            Assertion::View(a) => view.push(a),
            Assertion::Local(_) => {}
            _ => return None,
        }
    }
    match pre.eval_local_under(e, config) {
        Determined::Value(v) => Some((view, v)),
        Determined::NotDetermined => None,
    }
}

fn same_set(a: &[&ViewAtom], b: &[ViewAtom]) -> bool {
    a.len() == b.len() && b.iter().all(|x| a.contains(&x))
}

/// Whether `goal` is an instance of `rule`'s conclusion, with the resolved
/// side conditions.
pub fn apply_rule(rule: RuleId, goal: &Triple, config: &Config) -> Option<Vec<String>> {
    use Assertion as A;
    use ViewAtom::*;
    let t = goal.thread;
    let (pre, post) = (&goal.pre, &goal.post);
    let ok = |conds: Vec<String>| Some(conds);
    match (rule, &goal.command) {
        (RuleId::True, _) => (*post == A::True).then(Vec::new),
        (RuleId::False, _) => (*pre == A::False).then(Vec::new),
        (RuleId::Skip, Atomic::Skip) => (pre == post).then(Vec::new),
        (RuleId::Fence1, Atomic::Fence) | (RuleId::Read1, Atomic::Read { .. }) => {
            (pre == post && pre.is_global()).then(|| vec!["P ∈ G".into()])
        }
        (RuleId::Fence2, Atomic::Fence) => match (pre, post) {
            (A::View(MaxView { var: x, thread }), A::View(MaxView { var: y, .. })) if *thread == t && x == y => {
                ok(vec![])
            }
            _ => None,
        },
        (RuleId::Fence3, Atomic::Fence) => match (pre, post) {
            (A::View(MaxValue { var: x, value: v, thread }), A::View(MaxValue { var: y, value: u, .. }))
                if *thread == t && x == y && v == u =>
            {
                ok(vec![])
            }
            _ => None,
        },
        (RuleId::Read2 | RuleId::Read3, Atomic::Read { reg, var, .. }) => {
            let A::Local(c) = post else { return None };
            let (r, op, v) = reg_cmp(c)?;
            let expected = if rule == RuleId::Read2 {
                (op == CmpOp::Ne).then(|| Impossible { var: var.clone(), value: v, thread: t })
            } else {
                (op == CmpOp::Eq).then(|| MaxValue { var: var.clone(), value: v, thread: t })
            }?;
            (r == reg && *pre == A::View(expected)).then(Vec::new)
        }
        (RuleId::ConRead1, Atomic::Read { reg, var, sync: false }) => {
            let A::View(CondObs { var: x, value: v, thread }) = pre else { return None };
            (x == var && *thread == t && *post == A::or([reg_ne(reg, *v), maxv(x, *v, t.0)])).then(Vec::new)
        }
        (RuleId::ConRead2, Atomic::Read { reg, var, sync: true }) => {
            let A::View(SyncedCondObs { cond_var, cond_value, var: y, value: u, thread }) = pre else { return None };
            (cond_var == var && *thread == t && *post == A::or([reg_ne(reg, *cond_value), maxv(y, *u, t.0)]))
                .then(Vec::new)
        }
        (RuleId::ReadReg, Atomic::Read { reg, .. }) => {
            (pre == post && pre.is_local() && !pre.registers().contains(reg))
                .then(|| vec!["P ∈ L".into(), format!("{reg} ∉ reg(P)")])
        }
        (RuleId::LocRead, Atomic::AssignLocal { reg, .. }) => {
            (pre == post && !pre.registers().contains(reg)).then(|| vec![format!("{reg} ∉ reg(P)")])
        }
        (RuleId::LocAssign, Atomic::AssignLocal { reg, expr }) => {
            (*pre == post.substitute_expr(reg, expr)).then(|| vec![format!("P = Q[{expr}/{reg}]")])
        }
        (RuleId::WriteReg, Atomic::Write { .. }) => (pre == post && pre.is_local()).then(|| vec!["P ∈ L".into()]),
        (RuleId::Write1 | RuleId::Write2 | RuleId::Write3 | RuleId::Write4, Atomic::Write { var: x, .. }) => {
            if pre != post {
                return None;
            }
            let A::View(a) = pre else { return None };
            let y = match (rule, a) {
                (RuleId::Write1, Impossible { var, .. })
                | (RuleId::Write2, Definite { var, .. })
                | (RuleId::Write3, MaxView { var, .. })
                | (RuleId::Write4, MaxValue { var, .. }) => var,
                _ => return None,
            };
            (y != x).then(|| vec![format!("{x} ≠ {y}")])
        }
        (RuleId::Write5, Atomic::Write { var: x, .. }) => (pre == post && *pre == up(x, t.0)).then(Vec::new),
        (RuleId::Write6, Atomic::Write { var: x, expr, .. }) => {
            let (view, v) = split_valued_pre(pre, expr, config)?;
            let [MaxValue { var, thread, .. }] = view.as_slice() else { return None };
            (var == x && *thread == t && *post == maxv(x, v, t.0)).then(|| vec![format!("⟦{expr}⟧ = {v}")])
        }
        (RuleId::ConWrite1, Atomic::Write { var: x, expr, .. }) => {
            let A::View(CondObs { var, value: v, thread: t2 }) = post else { return None };
            let (view, val) = split_valued_pre(pre, expr, config)?;
            if var != x || val != *v || *t2 == t {
                return None;
            }
            let u = view.iter().find_map(|a| match a {
                MaxValue { var, value, thread } if var == x && *thread == t => Some(*value),
                _ => None,
            })?;
            let want = [
                Impossible { var: x.clone(), value: *v, thread: *t2 },
                MaxValue { var: x.clone(), value: u, thread: t },
            ];
            same_set(&view, &want).then(|| vec![format!("⟦{expr}⟧ = {v}"), format!("{t} ≠ {t2}")])
        }
        (RuleId::ConWrite2, Atomic::Write { var: x, expr, sync: true }) => {
            let A::View(SyncedCondObs { cond_var, cond_value: v, var: y, value: u, thread: t2 }) = post else {
                return None;
            };
            let (view, val) = split_valued_pre(pre, expr, config)?;
            if cond_var != x || val != *v || *t2 == t || y == x {
                return None;
            }
            let want = [
                Impossible { var: x.clone(), value: *v, thread: *t2 },
                MaxValue { var: y.clone(), value: *u, thread: t },
            ];
            same_set(&view, &want).then(|| vec![format!("⟦{expr}⟧ = {v}"), format!("{t} ≠ {t2}"), format!("{x} ≠ {y}")])
        }
        _ => None,
    }
}

/// Candidate `(pre, post)` instances of `rule` for the subgoal `{d} cmd {c}`.
fn instances(
    rule: RuleId,
    goal: &Triple,
    d: &BTreeSet<Literal>,
    c: &BTreeSet<Literal>,
    config: &Config,
) -> Vec<(Assertion, Assertion)> {
    let t = goal.thread;
    let tn = t.0;
    let vals = &config.values;
    let c_where = |keep: &dyn Fn(&Literal) -> bool| -> Option<Assertion> {
        let kept: BTreeSet<Literal> = c.iter().filter(|l| keep(l)).cloned().collect();
        (!kept.is_empty()).then(|| Assertion::from_clause(&kept))
    };
    let is_view = |l: &Literal| matches!(l, Literal::View(_));
    let d_locals: Vec<Assertion> =
        d.iter().filter(|l| matches!(l, Literal::Local(_))).map(Literal::to_assertion).collect();
    // Pre conjuncts fixing the written value, when it is not a literal.
    let value_of = |e: &Expr| -> Option<(Value, Vec<Assertion>)> {
        if let Some(v) = e.as_literal() {
            return Some((v, vec![]));
        }
        match Assertion::and(d_locals.clone()).eval_local_under(e, config) {
            Determined::Value(v) => Some((v, d_locals.clone())),
            Determined::NotDetermined => None,
        }
    };
    let with_locals =
        |atoms: Vec<Assertion>, locals: &[Assertion]| Assertion::and(atoms.into_iter().chain(locals.iter().cloned()));
    let same = |p: Assertion| vec![(p.clone(), p)];
    let others = || config.threads.iter().copied().filter(move |&u| u != t);
    let mut out = Vec::new();
    match (rule, &goal.command) {
        (RuleId::Skip, Atomic::Skip) => out.extend(same(Assertion::from_clause(c))),
        (RuleId::Fence1, Atomic::Fence) | (RuleId::Read1, Atomic::Read { .. }) => {
            out.extend(c_where(&is_view).map(same).unwrap_or_default())
        }
        (RuleId::Fence2, Atomic::Fence) => {
            for x in &config.globals {
                for &u in &config.threads {
                    out.push((up(x, tn), up(x, u.0)));
                }
            }
        }
        (RuleId::Fence3, Atomic::Fence) => {
            for x in &config.globals {
                for &v in vals {
                    for &u in &config.threads {
                        out.push((maxv(x, v, tn), maxv(x, v, u.0)));
                    }
                }
            }
        }
        (RuleId::ReadReg, Atomic::Read { reg, .. }) => {
            let keep = |l: &Literal| !is_view(l) && !l.to_assertion().registers().contains(reg);
            out.extend(c_where(&keep).map(same).unwrap_or_default())
        }
        (RuleId::LocRead, Atomic::AssignLocal { reg, .. }) => {
            let keep = |l: &Literal| !l.to_assertion().registers().contains(reg);
            out.extend(c_where(&keep).map(same).unwrap_or_default())
        }
        (RuleId::LocAssign, Atomic::AssignLocal { reg, expr }) => {
            let q = Assertion::from_clause(c);
            out.push((q.substitute_expr(reg, expr), q));
        }
        (RuleId::Read2, Atomic::Read { reg, var, .. }) => {
            out.extend(vals.iter().map(|&v| (imp(var, v, tn), reg_ne(reg, v))))
        }
        (RuleId::Read3, Atomic::Read { reg, var, .. }) => {
            out.extend(vals.iter().map(|&v| (maxv(var, v, tn), reg_eq(reg, v))))
        }
        (RuleId::ConRead1, Atomic::Read { reg, var, sync: false }) => {
            out.extend(vals.iter().map(|&v| (cond(var, v, tn), Assertion::or([reg_ne(reg, v), maxv(var, v, tn)]))))
        }
        (RuleId::ConRead2, Atomic::Read { reg, var, sync: true }) => {
            for &v in vals {
                for y in &config.globals {
                    for &u in vals {
                        out.push((scond(var, v, y, u, tn), Assertion::or([reg_ne(reg, v), maxv(y, u, tn)])));
                    }
                }
            }
        }
        (RuleId::WriteReg, Atomic::Write { .. }) => out.extend(c_where(&|l| !is_view(l)).map(same).unwrap_or_default()),
        (RuleId::Write1 | RuleId::Write2 | RuleId::Write3 | RuleId::Write4, Atomic::Write { var: x, .. }) => {
            for y in config.globals.iter().filter(|y| *y != x) {
                for &u in &config.threads {
                    let atoms: Vec<ViewAtom> = match rule {
                        RuleId::Write3 => vec![ViewAtom::MaxView { var: y.clone(), thread: u }],
                        _ => vals
                            .iter()
                            .map(|&v| {
                                let (var, value, thread) = (y.clone(), v, u);
                                match rule {
                                    RuleId::Write1 => ViewAtom::Impossible { var, value, thread },
                                    RuleId::Write2 => ViewAtom::Definite { var, value, thread },
                                    _ => ViewAtom::MaxValue { var, value, thread },
                                }
                            })
                            .collect(),
                    };
                    out.extend(atoms.into_iter().flat_map(|a| same(lit(a))));
                }
            }
        }
        (RuleId::Write5, Atomic::Write { var: x, .. }) => out.extend(same(up(x, tn))),
        (RuleId::Write6, Atomic::Write { var: x, expr, .. }) => {
            if let Some((v, locals)) = value_of(expr) {
                for &u in vals {
                    out.push((with_locals(vec![maxv(x, u, tn)], &locals), maxv(x, v, tn)));
                }
            }
        }
        (RuleId::ConWrite1, Atomic::Write { var: x, expr, .. }) => {
            if let Some((v, locals)) = value_of(expr) {
                for u2 in others() {
                    for &u in vals {
                        out.push((with_locals(vec![imp(x, v, u2.0), maxv(x, u, tn)], &locals), cond(x, v, u2.0)));
                    }
                }
            }
        }
        (RuleId::ConWrite2, Atomic::Write { var: x, expr, sync: true }) => {
            if let Some((v, locals)) = value_of(expr) {
                for u2 in others() {
                    for y in config.globals.iter().filter(|y| *y != x) {
                        for &u in vals {
                            out.push((
                                with_locals(vec![imp(x, v, u2.0), maxv(y, u, tn)], &locals),
                                scond(x, v, y, u, u2.0),
                            ));
                        }
                    }
                }
            }
        }
        _ => {}
    }
    out
}

fn priority(cmd: &Atomic) -> &'static [RuleId] {
    match cmd {
        Atomic::Skip => &[RuleId::Skip],
        Atomic::Fence => &RuleId::FENCE_PRIORITY,
        Atomic::Read { .. } => &RuleId::READ_PRIORITY,
        Atomic::Write { .. } => &RuleId::WRITE_PRIORITY,
        Atomic::AssignLocal { .. } => &RuleId::ASSIGN_PRIORITY,
    }
}

#[derive(Clone, Debug, Default)]
pub struct DischargeOptions {
    /// Restrict rules and facts to those whose axioms lie in this set.
    pub allowed: Option<BTreeSet<AxiomId>>,
}

impl DischargeOptions {
    fn permits(&self, rule: RuleId) -> bool {
        self.allowed.as_ref().is_none_or(|a| rule.axioms().is_subset(a))
    }
}

/// A subgoal `{pre} cmd {post}` the search could not close.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Residual {
    pub pre: Assertion,
    pub post: Assertion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub reason: String,
    pub residuals: Vec<Residual>,
}

/// Wraps `inner` with Mono when its conclusion differs from `target`.
fn mono(target: Triple, inner: Derivation, facts: Vec<FactUse>, why: Vec<String>) -> Derivation {
    if inner.triple() == Some(&target) {
        return inner;
    }
    let mut premises = vec![inner];
    let mut facts = facts;
    facts.sort();
    facts.dedup();
    premises.extend(facts.iter().map(Derivation::fact));
    Derivation::node(Judgment::Triple(target), RuleId::Mono, premises, why)
}

fn leaf(rule: RuleId, t: Triple, config: &Config) -> Derivation {
    let conds = apply_rule(rule, &t, config).expect("instance matches its own rule");
    Derivation::node(Judgment::Triple(t), rule, vec![], conds)
}

/// `{d} cmd {c}` for a conjunction `d` and a clause `c`.
fn subgoal(
    goal: &Triple,
    d: &BTreeSet<Literal>,
    c: &BTreeSet<Literal>,
    config: &Config,
    opts: &DischargeOptions,
) -> Option<Derivation> {
    let target = goal.with(Assertion::from_conjunction(d), Assertion::from_clause(c));
    let empty = BTreeSet::new();
    for last_resort in [false, true] {
        let budget = Budget::new(opts.allowed.clone(), last_resort);
        if let Some(f) = clause_entailed(&empty, c, config, &budget) {
            let inner = leaf(RuleId::True, goal.with(target.pre.clone(), Assertion::True), config);
            return Some(mono(target, inner, f, vec!["true ⊆ post".into()]));
        }
        if let Some(f) = clause_entailed(d, &empty, config, &budget) {
            let inner = leaf(RuleId::False, goal.with(Assertion::False, target.post.clone()), config);
            return Some(mono(target, inner, f, vec!["pre ⊆ false".into()]));
        }
        for &rule in priority(&goal.command) {
            if !opts.permits(rule) {
                continue;
            }
            for (p, q) in instances(rule, goal, d, c, config) {
                let Some(q_dnf) = q.dnf().ok() else { continue };
                let mut facts = Vec::new();
                let post_ok = q_dnf.iter().all(|qd| match clause_entailed(qd, c, config, &budget) {
                    Some(f) => {
                        facts.extend(f);
                        true
                    }
                    None => false,
                });
                if !post_ok {
                    continue;
                }
                let Some(p_cnf) = p.cnf().ok() else { continue };
                let pre_ok = p_cnf.iter().all(|pc| match clause_entailed(d, pc, config, &budget) {
                    Some(f) => {
                        facts.extend(f);
                        true
                    }
                    None => false,
                });
                if !pre_ok {
                    continue;
                }
                let inner = leaf(rule, goal.with(p, q), config);
                return Some(mono(target, inner, facts, vec!["pre strengthened, post weakened".into()]));
            }
        }
    }
    None
}

fn dedup(v: Vec<Assertion>) -> Vec<Assertion> {
    let mut out: Vec<Assertion> = Vec::new();
    for a in v {
        if !out.contains(&a) {
            out.push(a);
        }
    }
    out
}

fn combine(rule: RuleId, premises: Vec<Derivation>) -> Derivation {
    if premises.len() == 1 {
        return premises.into_iter().next().unwrap();
    }
    let ts: Vec<&Triple> = premises.iter().map(|p| p.triple().expect("triple premise")).collect();
    let pres = dedup(ts.iter().map(|t| t.pre.clone()).collect());
    let posts = dedup(ts.iter().map(|t| t.post.clone()).collect());
    let (pre, post) = if rule == RuleId::Conj {
        (Assertion::and(pres), Assertion::and(posts))
    } else {
        (Assertion::or(pres), Assertion::or(posts))
    };
    let t = ts[0].with(pre, post);
    Derivation::node(Judgment::Triple(t), rule, premises, vec![])
}

/// Syntactic proof of `goal` by the rules, or the subgoals left open.
pub fn discharge(goal: &Triple, config: &Config, opts: &DischargeOptions) -> Result<Derivation, Failure> {
    let too_large = |_| Failure { reason: "normal form too large".into(), residuals: vec![] };
    let dnf = goal.pre.dnf().map_err(too_large)?;
    let cnf = goal.post.cnf().map_err(too_large)?;
    let core = if cnf.is_empty() {
        leaf(RuleId::True, goal.with(goal.pre.clone(), Assertion::True), config)
    } else if dnf.is_empty() {
        leaf(RuleId::False, goal.with(Assertion::False, goal.post.clone()), config)
    } else {
        let mut residuals = Vec::new();
        let mut disjuncts = Vec::new();
        for d in &dnf {
            let mut conjuncts = Vec::new();
            for c in &cnf {
                match subgoal(goal, d, c, config, opts) {
                    Some(p) => conjuncts.push(p),
                    None => residuals
                        .push(Residual { pre: Assertion::from_conjunction(d), post: Assertion::from_clause(c) }),
                }
            }
            if residuals.is_empty() {
                disjuncts.push(combine(RuleId::Conj, conjuncts));
            }
        }
        if !residuals.is_empty() {
            return Err(Failure { reason: "no rule applies".into(), residuals });
        }
        combine(RuleId::Disj, disjuncts)
    };
    let core_t = core.triple().expect("triple").clone();
    if core_t == *goal {
        return Ok(core);
    }
    let mut facts = Vec::new();
    for (p, q) in [(&goal.pre, &core_t.pre), (&core_t.post, &goal.post)] {
        let r = entails_within(p, q, config, opts.allowed.as_ref());
        if !r.holds() {
            return Err(Failure { reason: "normal form not entailed".into(), residuals: vec![] });
        }
        facts.extend(r.facts);
    }
    Ok(mono(goal.clone(), core, facts, vec!["normal form".into()]))
}

/// Independent re-check of every node of `d`.
pub fn validate(d: &Derivation, config: &Config) -> Result<(), String> {
    let fail = |msg: &str| Err(format!("{} node: {msg}", d.rule));
    let mut expected = d.rule.axioms();
    for p in &d.premises {
        validate(p, config)?;
        expected.extend(p.axioms.iter().copied());
    }
    if expected != d.axioms {
        return fail("axiom set is not the union of its rule and premises");
    }
    match (&d.conclusion, d.rule) {
        (Judgment::Entailment { lhs, rhs }, r) if r.is_fact() => {
            if !d.premises.is_empty() {
                return fail("facts have no premises");
            }
            let lhs_atoms: Vec<ViewAtom> = conjuncts(lhs)
                .into_iter()
                .filter_map(|a| match a {
                    Assertion::View(v) => Some(v.clone()),
                    _ => None,
                })
                .collect();
            let rhs_atom = match rhs {
                Assertion::View(v) => Some(v.clone()),
                Assertion::False => None,
                _ => return fail("malformed fact"),
            };
            let f = FactUse { fact: r, lhs: lhs_atoms, rhs: rhs_atom };
            if is_fact_instance(&f, config) {
                Ok(())
            } else {
                fail("not an instance of the fact")
            }
        }
        (Judgment::Entailment { .. }, _) => fail("entailment concluded by a non-fact"),
        (Judgment::Triple(t), RuleId::Mono) => {
            let Some(inner) = d.premises.first().and_then(Derivation::triple) else {
                return fail("missing triple premise");
            };
            if inner.thread != t.thread || inner.command != t.command {
                return fail("command mismatch");
            }
            if d.premises[1..].iter().any(|p| !p.rule.is_fact()) {
                return fail("extra premises must be facts");
            }
            let allowed = d.axioms.clone();
            let pre = entails_within(&t.pre, &inner.pre, config, Some(&allowed));
            let post = entails_within(&inner.post, &t.post, config, Some(&allowed));
            if pre.holds() && post.holds() {
                Ok(())
            } else {
                fail("entailment side conditions do not hold")
            }
        }
        (Judgment::Triple(t), RuleId::Conj | RuleId::Disj) => {
            let ts: Option<Vec<&Triple>> = d.premises.iter().map(Derivation::triple).collect();
            let Some(ts) = ts.filter(|ts| ts.len() >= 2) else { return fail("needs two or more triple premises") };
            if ts.iter().any(|p| p.thread != t.thread || p.command != t.command) {
                return fail("command mismatch");
            }
            let pres = dedup(ts.iter().map(|p| p.pre.clone()).collect());
            let posts = dedup(ts.iter().map(|p| p.post.clone()).collect());
            let (pre, post) = if d.rule == RuleId::Conj {
                (Assertion::and(pres), Assertion::and(posts))
            } else {
                (Assertion::or(pres), Assertion::or(posts))
            };
            if t.pre == pre && t.post == post {
                Ok(())
            } else {
                fail("conclusion is not the combination of the premises")
            }
        }
        (Judgment::Triple(t), r) => {
            if !d.premises.is_empty() {
                return fail("leaf rules have no premises");
            }
            match apply_rule(r, t, config) {
                Some(_) => Ok(()),
                None => fail("conclusion is not an instance of the rule"),
            }
        }
    }
}
