//! Sound, incomplete entailment between assertions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::assertion::{for_each_valuation, Assertion, Literal, ViewAtom};
use crate::axioms::AxiomId;
use crate::rules::RuleId;
use crate::syntax::{Cmp, Config};

/// One use of an entailment fact: `lhs ⊆ rhs`, with `rhs = None` for false.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FactUse {
    pub fact: RuleId,
    pub lhs: Vec<ViewAtom>,
    pub rhs: Option<ViewAtom>,
}

impl FactUse {
    pub fn lhs_assertion(&self) -> Assertion {
        Assertion::and(self.lhs.iter().cloned().map(Assertion::View))
    }

    pub fn rhs_assertion(&self) -> Assertion {
        self.rhs.clone().map(Assertion::View).unwrap_or(Assertion::False)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Yes,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntailmentResult {
    pub verdict: Verdict,
    pub facts: Vec<FactUse>,
    pub axioms: BTreeSet<AxiomId>,
}

impl EntailmentResult {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Yes
    }

    fn unknown() -> Self {
        EntailmentResult { verdict: Verdict::Unknown, facts: vec![], axioms: BTreeSet::new() }
    }

    fn yes(mut facts: Vec<FactUse>) -> Self {
        facts.sort();
        facts.dedup();
        let axioms = facts.iter().flat_map(|f| f.fact.axioms()).collect();
        EntailmentResult { verdict: Verdict::Yes, facts, axioms }
    }
}

/// Which facts may be used, by the axioms they need.
#[derive(Clone, Debug)]
pub struct Budget {
    allowed: Option<BTreeSet<AxiomId>>,
    /// Whether the all-values-impossible fact may be used.
    pub last_resort: bool,
}

impl Budget {
    pub fn new(allowed: Option<BTreeSet<AxiomId>>, last_resort: bool) -> Self {
        Budget { allowed, last_resort }
    }

    pub fn unrestricted() -> Self {
        Budget { allowed: None, last_resort: true }
    }

    pub fn permits(&self, fact: RuleId) -> bool {
        if fact == RuleId::E4 && !self.last_resort {
            return false;
        }
        match &self.allowed {
            None => true,
            Some(a) => fact.axioms().is_subset(a),
        }
    }
}

/// `p ⊆ q`, first without the last-resort fact and then with it.
pub fn entails(p: &Assertion, q: &Assertion, config: &Config) -> EntailmentResult {
    entails_within(p, q, config, None)
}

pub fn entails_within(
    p: &Assertion,
    q: &Assertion,
    config: &Config,
    allowed: Option<&BTreeSet<AxiomId>>,
) -> EntailmentResult {
    let (Ok(dnf), Ok(cnf)) = (p.dnf(), q.cnf()) else {
        return EntailmentResult::unknown();
    };
    for last_resort in [false, true] {
        let budget = Budget::new(allowed.cloned(), last_resort);
        let mut facts = Vec::new();
        let ok = dnf.iter().all(|d| {
            cnf.iter().all(|c| match clause_entailed(d, c, config, &budget) {
                Some(f) => {
                    facts.extend(f);
                    true
                }
                None => false,
            })
        });
        if ok {
            return EntailmentResult::yes(facts);
        }
    }
    EntailmentResult::unknown()
}

/// Conjunction `d` entails clause `c`; returns the facts used.
pub fn clause_entailed(
    d: &BTreeSet<Literal>,
    c: &BTreeSet<Literal>,
    config: &Config,
    budget: &Budget,
) -> Option<Vec<FactUse>> {
    let view: BTreeSet<&ViewAtom> = d
        .iter()
        .filter_map(|l| match l {
            Literal::View(a) => Some(a),
            Literal::Local(_) => None,
        })
        .collect();
    for lit in c {
        if let Literal::View(a) = lit {
            if let Some(f) = derive(a, &view, config, budget, 4) {
                return Some(f);
            }
        }
    }
    let locals = |s: &BTreeSet<Literal>| -> Vec<Cmp> {
        s.iter()
            .filter_map(|l| match l {
                Literal::Local(k) => Some(k.0.clone()),
                Literal::View(_) => None,
            })
            .collect()
    };
    if local_cover(&locals(d), &locals(c), config) {
        return Some(vec![]);
    }
    if budget.permits(RuleId::E4) {
        return contradiction(&view, config, budget);
    }
    None
}

/// Every register valuation satisfying all of `hyp` satisfies one of `goal`.
fn local_cover(hyp: &[Cmp], goal: &[Cmp], config: &Config) -> bool {
    let mut regs = BTreeSet::new();
    for c in hyp.iter().chain(goal) {
        c.registers(&mut regs);
    }
    let regs: Vec<String> = regs.into_iter().collect();
    for_each_valuation(&regs, &config.values, &mut |vals| {
        let env = |r: &str| regs.iter().position(|x| x == r).map(|i| vals[i]);
        let holds = |c: &Cmp| c.eval(&env) == Some(true);
        !hyp.iter().all(holds) || goal.iter().any(holds)
    })
}

/// Derivation of `goal` from the atoms of `d` using the permitted facts.
fn derive(
    goal: &ViewAtom,
    d: &BTreeSet<&ViewAtom>,
    config: &Config,
    budget: &Budget,
    depth: u32,
) -> Option<Vec<FactUse>> {
    if d.contains(goal) {
        return Some(vec![]);
    }
    if depth == 0 {
        return None;
    }
    let step = |fact: RuleId, lhs: Vec<ViewAtom>| FactUse { fact, lhs, rhs: Some(goal.clone()) };
    let via = |fact: RuleId, premises: Vec<ViewAtom>| -> Option<Vec<FactUse>> {
        if !budget.permits(fact) {
            return None;
        }
        let mut out = vec![step(fact, premises.clone())];
        for p in &premises {
            out.extend(derive(p, d, config, budget, depth - 1)?);
        }
        Some(out)
    };
    match goal {
        ViewAtom::Definite { var, value, thread } => {
            via(RuleId::E1, vec![ViewAtom::MaxValue { var: var.clone(), value: *value, thread: *thread }])
        }
        ViewAtom::MaxView { var, thread } => config
            .values
            .iter()
            .find_map(|&v| via(RuleId::E2, vec![ViewAtom::MaxValue { var: var.clone(), value: v, thread: *thread }])),
        ViewAtom::Impossible { var, value, thread } => {
            config.values.iter().filter(|&&u| u != *value).find_map(|&u| {
                via(RuleId::E3, vec![ViewAtom::Definite { var: var.clone(), value: u, thread: *thread }])
            })
        }
        ViewAtom::MaxValue { var, value, thread } => config.threads.iter().filter(|&&t| t != *thread).find_map(|&t| {
            via(
                RuleId::E5,
                vec![
                    ViewAtom::MaxValue { var: var.clone(), value: *value, thread: t },
                    ViewAtom::MaxView { var: var.clone(), thread: *thread },
                ],
            )
        }),
        ViewAtom::SyncedCondObs { cond_var, cond_value, thread, .. } => {
            via(RuleId::E6, vec![ViewAtom::Impossible { var: cond_var.clone(), value: *cond_value, thread: *thread }])
        }
        ViewAtom::CondObs { var, value, thread } => {
            via(RuleId::E7, vec![ViewAtom::Impossible { var: var.clone(), value: *value, thread: *thread }])
        }
    }
}

/// Some thread provably reads no value at all for some variable.
fn contradiction(d: &BTreeSet<&ViewAtom>, config: &Config, budget: &Budget) -> Option<Vec<FactUse>> {
    let no_e4 = Budget { allowed: budget.allowed.clone(), last_resort: false };
    for x in &config.globals {
        for &t in &config.threads {
            let lhs: Vec<ViewAtom> =
                config.values.iter().map(|&v| ViewAtom::Impossible { var: x.clone(), value: v, thread: t }).collect();
            let mut facts = vec![FactUse { fact: RuleId::E4, lhs: lhs.clone(), rhs: None }];
            if lhs.iter().all(|a| match derive(a, d, config, &no_e4, 4) {
                Some(f) => {
                    facts.extend(f);
                    true
                }
                None => false,
            }) {
                return Some(facts);
            }
        }
    }
    None
}

/// Whether `f` is a genuine instance of its fact schema.
pub fn is_fact_instance(f: &FactUse, config: &Config) -> bool {
    use ViewAtom::*;
    match (f.fact, f.lhs.as_slice(), &f.rhs) {
        (RuleId::E1, [MaxValue { var, value, thread }], Some(Definite { var: x, value: v, thread: t })) => {
            (var, value, thread) == (x, v, t)
        }
        (RuleId::E2, [MaxValue { var, thread, .. }], Some(MaxView { var: x, thread: t })) => (var, thread) == (x, t),
        (RuleId::E3, [Definite { var, value, thread }], Some(Impossible { var: x, value: u, thread: t })) => {
            var == x && thread == t && value != u
        }
        (RuleId::E4, lhs, None) => {
            let Some(Impossible { var, thread, .. }) = lhs.first() else { return false };
            config.values.iter().all(|&v| lhs.contains(&Impossible { var: var.clone(), value: v, thread: *thread }))
        }
        (
            RuleId::E5,
            [MaxValue { var, value, thread }, MaxView { var: y, thread: t2 }],
            Some(MaxValue { var: x, value: v, thread: t }),
        ) => var == x && y == x && value == v && t2 == t && thread != t,
        (
            RuleId::E6,
            [Impossible { var, value, thread }],
            Some(SyncedCondObs { cond_var, cond_value, thread: t, .. }),
        ) => (var, value, thread) == (cond_var, cond_value, t),
        (RuleId::E7, [Impossible { var, value, thread }], Some(CondObs { var: x, value: v, thread: t })) => {
            (var, value, thread) == (x, v, t)
        }
        _ => false,
    }
}
