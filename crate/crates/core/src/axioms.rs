//! Brute-force checking of the fifteen memory-model axioms.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::ModelInstance;
use crate::oracle::Oracle;
use crate::relation::{wlp, Relation, StateSet};
use crate::syntax::{Action, Tid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AxiomId {
    C1,
    C2,
    C3,
    C4,
    SV1,
    SV2,
    RW1,
    RW2,
    RW3,
    RW4,
    RW5,
    RW6,
    RW7,
    FNC,
    MP,
}

impl AxiomId {
    pub const ALL: [AxiomId; 15] = [
        AxiomId::C1,
        AxiomId::C2,
        AxiomId::C3,
        AxiomId::C4,
        AxiomId::SV1,
        AxiomId::SV2,
        AxiomId::RW1,
        AxiomId::RW2,
        AxiomId::RW3,
        AxiomId::RW4,
        AxiomId::RW5,
        AxiomId::RW6,
        AxiomId::RW7,
        AxiomId::FNC,
        AxiomId::MP,
    ];
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown axiom `{0}`")]
pub struct UnknownAxiom(pub String);

impl FromStr for AxiomId {
    type Err = UnknownAxiom;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxiomId::ALL
            .into_iter()
            .find(|a| a.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownAxiom(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCounterexample {
    /// The quantified threads and actions.
    pub instance: String,
    pub state: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomResult {
    pub axiom: AxiomId,
    pub holds: bool,
    pub instances: usize,
    pub counterexample: Option<AxiomCounterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub model: String,
    pub states: usize,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn all_hold(&self) -> bool {
        self.results.iter().all(|r| r.holds)
    }

    pub fn satisfied(&self) -> BTreeSet<AxiomId> {
        self.results.iter().filter(|r| r.holds).map(|r| r.axiom).collect()
    }

    pub fn failed(&self) -> BTreeSet<AxiomId> {
        self.results.iter().filter(|r| !r.holds).map(|r| r.axiom).collect()
    }
}

pub fn check_all(m: &ModelInstance) -> AxiomReport {
    let results = AxiomId::ALL.par_iter().map(|&a| check_axiom(m, a)).collect();
    AxiomReport { model: m.name.clone(), states: m.len(), results }
}

/// A failure: offending state and explanation.
type Failure = (usize, String);

/// Runs instances in order, keeping the first failure.
struct Collector<'m> {
    m: &'m ModelInstance,
    instances: usize,
    found: Option<AxiomCounterexample>,
}

impl Collector<'_> {
    fn check(&mut self, describe: impl FnOnce() -> String, run: impl FnOnce() -> Option<Failure>) {
        self.instances += 1;
        if self.found.is_some() {
            return;
        }
        if let Some((s, detail)) = run() {
            self.found = Some(AxiomCounterexample {
                instance: describe(),
                state: self.m.states[s].render(&self.m.config),
                detail,
            });
        }
    }
}

/// Some state `s` with `(l1 ⨟ l2)(s) ⊄ (r1 ⨟ r2)(s)`.
fn composition_gap(l1: &Relation, l2: &Relation, r1: &Relation, r2: &Relation, m: &ModelInstance) -> Option<Failure> {
    let n = l1.universe();
    let mut mark = vec![u32::MAX; n];
    for s in 0..n {
        for &a in r1.succ(s) {
            for &b in r2.succ(a as usize) {
                mark[b as usize] = s as u32;
            }
        }
        for &a in l1.succ(s) {
            for &b in l2.succ(a as usize) {
                if mark[b as usize] != s as u32 {
                    return Some((s, format!("via {} reaches {} with no matching path", render(m, a), render(m, b))));
                }
            }
        }
    }
    None
}

/// Some state in `p` outside `q`.
fn inclusion_gap(p: &StateSet, q: &StateSet) -> Option<Failure> {
    p.first_outside(q).map(|s| (s, "in the left-hand set but not the right".to_string()))
}

fn render(m: &ModelInstance, s: u32) -> String {
    format!("[{}]", m.states[s as usize].render(&m.config))
}

fn union_rel(m: &ModelInstance, t: Tid, pred: impl Fn(&Action) -> bool) -> Relation {
    let mut succ = vec![Vec::new(); m.len()];
    for (k, a) in m.actions.iter().enumerate() {
        if pred(a) {
            for (s, out) in succ.iter_mut().enumerate() {
                out.extend_from_slice(m.trans_at(t, k).succ(s));
            }
        }
    }
    Relation::from_successors(succ)
}

pub fn check_axiom(m: &ModelInstance, id: AxiomId) -> AxiomResult {
    let mut c = Collector { m, instances: 0, found: None };
    let threads = m.config.threads.clone();
    let acts: Vec<(usize, &Action)> = m.actions.iter().enumerate().collect();
    let fence = m.action_index(&Action::Fence).expect("fence is an action");
    let all = m.full();
    let oracle = Oracle::new(m);

    match id {
        AxiomId::C1 => {
            for &t in &threads {
                for &(k, a) in &acts {
                    c.check(|| format!("t={t} a={a}"), || inclusion_gap(&m.initial, m.vmax_at(t, k)));
                }
            }
        }
        AxiomId::C2 => {
            for &t in &threads {
                for &t2 in &threads {
                    for &(k, a) in &acts {
                        c.check(|| format!("t={t} t'={t2} a={a}"), || c2_gap(m, t, t2, k));
                    }
                }
            }
        }
        AxiomId::C3 => {
            for &t in &threads {
                for &(k, a) in &acts {
                    c.check(|| format!("t={t} a={a}"), || c3_gap(m, t, k));
                }
            }
        }
        AxiomId::C4 => {
            for &t in &threads {
                for &(ka, a) in &acts {
                    for &(kb, b) in &acts {
                        c.check(
                            || format!("t={t} a={a} b={b}"),
                            || {
                                let v = m.vmax_at(t, ka);
                                inclusion_gap(v, &wlp(m.interf_at(t, kb), v))
                            },
                        );
                    }
                }
            }
        }
        AxiomId::SV1 | AxiomId::SV2 => {
            for &t in &threads {
                for &t2 in &threads {
                    for &(ka, a) in &acts {
                        for &(kb, b) in &acts {
                            if a.var() == b.var() {
                                continue;
                            }
                            let describe = || format!("t={t} t'={t2} a={a} b={b}");
                            let i = m.interf_at(t2, kb);
                            if id == AxiomId::SV1 {
                                c.check(describe, || commute_gap(i, m.trans_at(t, ka), m));
                            } else {
                                let v = m.vmax_at(t, ka);
                                c.check(describe, || inclusion_gap(v, &wlp(i, v)));
                            }
                        }
                    }
                }
            }
        }
        AxiomId::RW1 => {
            for &t in &threads {
                for &t2 in &threads {
                    for &(kr, ar) in &acts {
                        for &(kw, aw) in &acts {
                            let (ri, wi) = (ar.classify(), aw.classify());
                            if ri.is_read() && wi.is_write() && ar.var() == aw.var() && ri.rdval != wi.wrval {
                                c.check(
                                    || format!("t={t} t'={t2} a_r={ar} a_w={aw}"),
                                    || commute_gap(m.interf_at(t2, kw), m.trans_at(t, kr), m),
                                );
                            }
                        }
                    }
                }
            }
        }
        AxiomId::RW2 | AxiomId::RW3 => {
            for &t in &threads {
                for &t2 in &threads {
                    for &(ka, a) in &acts {
                        let Some(x) = a.var() else { continue };
                        for &(kr, ar) in &acts {
                            if !(ar.classify().is_read() && ar.var() == Some(x)) {
                                continue;
                            }
                            let describe = || format!("t={t} t'={t2} a={a} a_r={ar}");
                            let i = m.interf_at(t2, kr);
                            if id == AxiomId::RW2 {
                                c.check(describe, || commute_gap(i, m.trans_at(t, ka), m));
                            } else {
                                let v = m.vmax_at(t, ka);
                                c.check(describe, || inclusion_gap(v, &wlp(i, v)));
                            }
                        }
                    }
                }
            }
        }
        AxiomId::RW4 => {
            for x in &m.config.globals {
                for &t in &threads {
                    c.check(
                        || format!("x={x} t={t}"),
                        || {
                            let reads = union_rel(m, t, |a| a.classify().is_read() && a.var() == Some(x));
                            inclusion_gap(&all, &reads.domain())
                        },
                    );
                }
            }
        }
        AxiomId::RW5 => {
            for &t in &threads {
                for &(kw, aw) in &acts {
                    let wi = aw.classify();
                    if !wi.is_write() {
                        continue;
                    }
                    let (x, v) = (wi.var, wi.wrval);
                    c.check(
                        || format!("t={t} a_w={aw}"),
                        || {
                            let reads = union_rel(m, t, |a| {
                                let i = a.classify();
                                i.is_read() && i.var == x && i.rdval == v
                            });
                            inclusion_gap(&all, &wlp(m.trans_at(t, kw), &reads.domain()))
                        },
                    );
                }
            }
        }
        AxiomId::RW6 => {
            for x in &m.config.globals {
                for &t in &threads {
                    c.check(
                        || format!("x={x} t={t}"),
                        || {
                            let mut some = StateSet::empty(m.len());
                            for &v in &m.config.values {
                                some.union_with(&oracle.definite(x, v, t));
                            }
                            inclusion_gap(&oracle.max_view(x, t), &some)
                        },
                    );
                }
            }
        }
        AxiomId::RW7 => {
            for &t in &threads {
                for &t2 in &threads {
                    if t == t2 {
                        continue;
                    }
                    for &(kw, aw) in &acts {
                        for &(kr, ar) in &acts {
                            let (wi, ri) = (aw.classify(), ar.classify());
                            if !(wi.is_write() && ri.is_read() && wi.var == ri.var && wi.wrval == ri.rdval) {
                                continue;
                            }
                            let lhs = m.vmax_at(t, kw).intersection(&m.trans_at(t2, kr).domain().complement());
                            for &(ka, a) in &acts {
                                if a.var() != wi.var {
                                    continue;
                                }
                                c.check(
                                    || format!("t={t} t'={t2} a_w={aw} a_r={ar} a={a}"),
                                    || {
                                        let inner = wlp(m.trans_at(t2, kr), m.vmax_at(t2, ka));
                                        inclusion_gap(&lhs, &wlp(m.trans_at(t, kw), &inner))
                                    },
                                );
                            }
                        }
                    }
                }
            }
        }
        AxiomId::FNC => {
            for &t in &threads {
                for &t2 in &threads {
                    for &(k, a) in &acts {
                        c.check(
                            || format!("t={t} t'={t2} a={a}"),
                            || inclusion_gap(m.vmax_at(t, k), &wlp(m.trans_at(t, fence), m.vmax_at(t2, k))),
                        );
                    }
                }
            }
        }
        AxiomId::MP => {
            for &(kw, kr) in &m.sync {
                let (aw, ar) = (&m.actions[kw], &m.actions[kr]);
                let (wi, ri) = (aw.classify(), ar.classify());
                if !(wi.var == ri.var && wi.wrval == ri.rdval) {
                    continue;
                }
                for &t in &threads {
                    for &t2 in &threads {
                        if t == t2 {
                            continue;
                        }
                        for &(kb, b) in &acts {
                            if b.var() == wi.var {
                                continue;
                            }
                            c.check(
                                || format!("t={t} t'={t2} a_w={aw} a_r={ar} b={b}"),
                                || {
                                    let after_read = wlp(m.trans_at(t2, kr), m.vmax_at(t2, kb));
                                    let lhs = m.vmax_at(t, kb).intersection(&after_read);
                                    inclusion_gap(&lhs, &wlp(m.trans_at(t, kw), &after_read))
                                },
                            );
                        }
                    }
                }
            }
        }
    }
    AxiomResult { axiom: id, holds: c.found.is_none(), instances: c.instances, counterexample: c.found }
}

/// Some state where `i ⨟ tr ⊄ tr ⨟ i`.
fn commute_gap(i: &Relation, tr: &Relation, m: &ModelInstance) -> Option<Failure> {
    if i.is_identity() {
        return None;
    }
    composition_gap(i, tr, tr, i, m)
}

/// C2: every `T(t,a)` step from a `vmax(t,a)` state is matched, up to β on
/// both sides, by a `T(t',a)` step.
fn c2_gap(m: &ModelInstance, t: Tid, t2: Tid, k: usize) -> Option<Failure> {
    let tr = m.trans_at(t, k);
    let other = m.trans_at(t2, k);
    let vmax = m.vmax_at(t, k);
    let words = m.len().div_ceil(64);
    let mut reach = vec![0u64; words];
    for s in vmax.iter() {
        if tr.succ(s).is_empty() {
            continue;
        }
        reach.iter_mut().for_each(|w| *w = 0);
        for &o in other.succ(s) {
            for (d, w) in reach.iter_mut().zip(m.beta_row(o as usize)) {
                *d |= w;
            }
        }
        for &s2 in tr.succ(s) {
            if !m.beta_row(s2 as usize).iter().zip(&reach).any(|(a, b)| a & b != 0) {
                return Some((s, format!("successor {} has no common β-successor", render(m, s2))));
            }
        }
    }
    None
}

/// C3: `T(t,a) ⊆ β ⨟ interf(t,a) ⨟ β`.
fn c3_gap(m: &ModelInstance, t: Tid, k: usize) -> Option<Failure> {
    let tr = m.trans_at(t, k);
    let itf = m.interf_at(t, k);
    for s in 0..m.len() {
        for &s2 in tr.succ(s) {
            let via = |s1: usize| itf.succ(s1).iter().any(|&i| m.beta_contains(i as usize, s2 as usize));
            if !(via(s) || m.beta.succ(s).iter().any(|&s1| via(s1 as usize))) {
                return Some((s, format!("step to {} is not covered", render(m, s2))));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in AxiomId::ALL {
            assert_eq!(a.to_string().parse::<AxiomId>().unwrap(), a);
        }
        assert_eq!("fnc".parse::<AxiomId>().unwrap(), AxiomId::FNC);
        assert!("RW8".parse::<AxiomId>().is_err());
    }
}
