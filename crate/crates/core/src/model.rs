//! Finite memory models and their explicit instances.
//!
//! A [`MemoryModel`] answers local questions about single states (which
//! steps are possible, who is view maximal). [`ModelInstance::build`]
//! enumerates the reachable state space and tabulates every relation the
//! axioms talk about, including the view-preserving simulation β.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::relation::{BitMatrix, Relation, StateSet};
use crate::syntax::{Action, Config, Tid, Value};

pub const DEFAULT_STATE_CAP: usize = 20_000;

/// Memory, per-thread store buffers (empty under SC) and registers, each
/// indexed as in the config.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct State {
    pub mem: Vec<Value>,
    pub bufs: Vec<Vec<(u16, Value)>>,
    pub regs: Vec<Value>,
}

impl State {
    pub fn zero(config: &Config) -> State {
        State {
            mem: vec![0; config.globals.len()],
            bufs: vec![Vec::new(); config.threads.len()],
            regs: vec![0; config.registers.len()],
        }
    }

    pub fn render(&self, config: &Config) -> String {
        let mut s = String::new();
        for (x, v) in config.globals.iter().zip(&self.mem) {
            let _ = write!(s, "{x}={v} ");
        }
        for (t, b) in config.threads.iter().zip(&self.bufs) {
            if !b.is_empty() {
                let entries: Vec<String> =
                    b.iter().map(|(x, v)| format!("{}={v}", config.globals[*x as usize])).collect();
                let _ = write!(s, "buf{t}=[{}] ", entries.join(","));
            }
        }
        for (r, v) in config.registers.iter().zip(&self.regs) {
            let _ = write!(s, "{}={v} ", r.name);
        }
        s.trim_end().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("state space exceeds the cap of {0} states")]
    StateCapExceeded(usize),
    #[error("buffer bound must be at least 1")]
    BadBufferBound,
}

/// Single-state view of a memory model.
pub trait MemoryModel: Send + Sync {
    fn name(&self) -> String;

    fn config(&self) -> &Config;

    fn initial_states(&self) -> Vec<State> {
        vec![State::zero(self.config())]
    }

    /// One step of `a` by `t` with no internal moves.
    fn primitive_step(&self, s: &State, t: Tid, a: &Action) -> Vec<State>;

    /// Model-internal moves (store-buffer flushes).
    fn internal_steps(&self, s: &State) -> Vec<State>;

    fn view_maximal(&self, s: &State, t: Tid, a: &Action) -> bool;

    /// Native interference relation; `None` selects `β ⨟ T ⨟ β`.
    fn interference(&self, s: &State, t: Tid, a: &Action) -> Option<Vec<State>>;

    fn is_sync(&self, w: &Action, r: &Action) -> bool {
        match (w, r) {
            (Action::Write { var: x, value: v, sync: true }, Action::Read { var: y, value: u, sync: true, .. }) => {
                x == y && v == u
            }
            _ => false,
        }
    }

    /// `T(t, a)`: any number of internal moves, then the step itself.
    fn step(&self, s: &State, t: Tid, a: &Action) -> Vec<State> {
        let mut out = BTreeSet::new();
        for m in internal_closure(self, s) {
            out.extend(self.primitive_step(&m, t, a));
        }
        out.into_iter().collect()
    }
}

/// States reachable from `s` by internal moves, including `s`.
pub fn internal_closure<M: MemoryModel + ?Sized>(m: &M, s: &State) -> Vec<State> {
    let mut seen = BTreeSet::from([s.clone()]);
    let mut stack = vec![s.clone()];
    while let Some(x) = stack.pop() {
        for y in m.internal_steps(&x) {
            if seen.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    seen.into_iter().collect()
}

fn set_reg(config: &Config, s: &State, reg: &str, v: Value) -> Option<State> {
    let i = config.register_index(reg)?;
    let mut n = s.clone();
    n.regs[i] = v;
    Some(n)
}

/// Sequential consistency: one memory, no buffers.
pub struct ScModel {
    config: Config,
}

impl ScModel {
    pub fn new(config: Config) -> Self {
        ScModel { config }
    }
}

impl MemoryModel for ScModel {
    fn name(&self) -> String {
        "sc".into()
    }

    fn config(&self) -> &Config {
        &self.config
    }

    fn primitive_step(&self, s: &State, _t: Tid, a: &Action) -> Vec<State> {
        let c = &self.config;
        match a {
            Action::Read { var, reg, value, .. } => match c.global_index(var) {
                Some(x) if s.mem[x] == *value => set_reg(c, s, reg, *value).into_iter().collect(),
                _ => vec![],
            },
            Action::Write { var, value, .. } => match c.global_index(var) {
                Some(x) => {
                    let mut n = s.clone();
                    n.mem[x] = *value;
                    vec![n]
                }
                None => vec![],
            },
            Action::Fence => vec![s.clone()],
            Action::RegAssign { reg, value } => set_reg(c, s, reg, *value).into_iter().collect(),
            Action::Internal => vec![],
        }
    }

    fn internal_steps(&self, _s: &State) -> Vec<State> {
        vec![]
    }

    fn view_maximal(&self, _s: &State, _t: Tid, _a: &Action) -> bool {
        true
    }

    fn interference(&self, s: &State, t: Tid, a: &Action) -> Option<Vec<State>> {
        Some(match a {
            Action::Read { .. } | Action::Fence => vec![s.clone()],
            _ => self.primitive_step(s, t, a),
        })
    }
}

/// Total store order with bounded FIFO store buffers.
pub struct TsoModel {
    config: Config,
    bound: usize,
    vmax_always: bool,
}

impl TsoModel {
    pub fn new(config: Config, bound: usize) -> Result<Self, ModelError> {
        if bound == 0 {
            return Err(ModelError::BadBufferBound);
        }
        Ok(TsoModel { config, bound, vmax_always: false })
    }

    /// Deliberately broken variant whose `vmax` holds everywhere.
    pub fn with_trivial_vmax(config: Config, bound: usize) -> Result<Self, ModelError> {
        Ok(TsoModel { vmax_always: true, ..TsoModel::new(config, bound)? })
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    fn tix(&self, t: Tid) -> usize {
        self.config.thread_index(t).expect("declared thread")
    }

    /// Value thread `t` reads for `x`: its newest own entry, else memory.
    pub fn visible(&self, s: &State, t: Tid, x: usize) -> Value {
        s.bufs[self.tix(t)].iter().rev().find(|(y, _)| *y as usize == x).map(|&(_, v)| v).unwrap_or(s.mem[x])
    }
}

impl MemoryModel for TsoModel {
    fn name(&self) -> String {
        if self.vmax_always {
            format!("tso{}-trivial-vmax", self.bound)
        } else {
            format!("tso{}", self.bound)
        }
    }

    fn config(&self) -> &Config {
        &self.config
    }

    fn primitive_step(&self, s: &State, t: Tid, a: &Action) -> Vec<State> {
        let c = &self.config;
        let ti = self.tix(t);
        match a {
            Action::Read { var, reg, value, .. } => match c.global_index(var) {
                Some(x) if self.visible(s, t, x) == *value => set_reg(c, s, reg, *value).into_iter().collect(),
                _ => vec![],
            },
            Action::Write { var, value, .. } => match c.global_index(var) {
                Some(x) if s.bufs[ti].len() < self.bound => {
                    let mut n = s.clone();
                    n.bufs[ti].push((x as u16, *value));
                    vec![n]
                }
                _ => vec![],
            },
            Action::Fence if s.bufs[ti].is_empty() => vec![s.clone()],
            Action::Fence => vec![],
            Action::RegAssign { reg, value } => set_reg(c, s, reg, *value).into_iter().collect(),
            Action::Internal => vec![],
        }
    }

    fn internal_steps(&self, s: &State) -> Vec<State> {
        (0..s.bufs.len())
            .filter(|&i| !s.bufs[i].is_empty())
            .map(|i| {
                let mut n = s.clone();
                let (x, v) = n.bufs[i].remove(0);
                n.mem[x as usize] = v;
                n
            })
            .collect()
    }

    fn view_maximal(&self, s: &State, t: Tid, a: &Action) -> bool {
        if self.vmax_always {
            return true;
        }
        let Some(x) = a.var().and_then(|v| self.config.global_index(v)) else {
            return true;
        };
        let ti = self.tix(t);
        s.bufs.iter().enumerate().all(|(u, b)| u == ti || b.iter().all(|(y, _)| *y as usize != x))
    }

    fn interference(&self, s: &State, t: Tid, a: &Action) -> Option<Vec<State>> {
        let ti = self.tix(t);
        Some(match a {
            Action::Write { var, value, .. } => {
                let Some(x) = self.config.global_index(var) else { return Some(vec![]) };
                let mut out = vec![s.clone()];
                let mut direct = s.clone();
                direct.mem[x] = *value;
                out.push(direct);
                if s.bufs[ti].len() < self.bound {
                    for pos in 0..=s.bufs[ti].len() {
                        let mut n = s.clone();
                        n.bufs[ti].insert(pos, (x as u16, *value));
                        out.push(n);
                    }
                }
                out
            }
            Action::RegAssign { .. } | Action::Internal => self.primitive_step(s, t, a),
            _ => vec![s.clone()],
        })
    }
}

/// How the interference relation of an instance is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InterfMode {
    /// The model's own relation.
    #[default]
    Native,
    /// `β ⨟ T ⨟ β` for every action.
    Default,
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub state_cap: usize,
    pub interf: InterfMode,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { state_cap: DEFAULT_STATE_CAP, interf: InterfMode::Native }
    }
}

/// Tabulated model over its reachable states.
pub struct ModelInstance {
    pub name: String,
    pub config: Config,
    pub states: Vec<State>,
    index: HashMap<State, u32>,
    pub initial: StateSet,
    /// Model actions over the config, in canonical order.
    pub actions: Vec<Action>,
    action_index: HashMap<Action, usize>,
    trans: Vec<Relation>,
    interf: Vec<Relation>,
    vmax: Vec<StateSet>,
    assign: HashMap<(usize, Value), Relation>,
    pub internal: Relation,
    pub beta: Relation,
    beta_matrix: BitMatrix,
    /// Pairs of action indices `(write, read)` in `sync`.
    pub sync: Vec<(usize, usize)>,
}

impl ModelInstance {
    pub fn build(model: &dyn MemoryModel, opts: &BuildOptions) -> Result<ModelInstance, ModelError> {
        let config = model.config().clone();
        let actions = config.actions();
        let assigns: Vec<Action> = config
            .registers
            .iter()
            .flat_map(|r| config.values.iter().map(move |&v| Action::RegAssign { reg: r.name.clone(), value: v }))
            .collect();

        // Reachable closure under steps, interference and internal moves.
        let mut seen: HashMap<State, ()> = HashMap::new();
        let mut queue = VecDeque::new();
        for s in model.initial_states() {
            if seen.insert(s.clone(), ()).is_none() {
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            let mut next = model.internal_steps(&s);
            for &t in &config.threads {
                for a in actions.iter().chain(&assigns) {
                    next.extend(model.primitive_step(&s, t, a));
                    if let Some(i) = model.interference(&s, t, a) {
                        next.extend(i);
                    }
                }
            }
            for n in next {
                if !seen.contains_key(&n) {
                    if seen.len() >= opts.state_cap {
                        return Err(ModelError::StateCapExceeded(opts.state_cap));
                    }
                    seen.insert(n.clone(), ());
                    queue.push_back(n);
                }
            }
        }
        let mut states: Vec<State> = seen.into_keys().collect();
        states.sort();
        let index: HashMap<State, u32> = states.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        let n = states.len();
        let lookup = |s: &State| index[s];

        let initial = StateSet::from_indices(n, model.initial_states().iter().map(|s| lookup(s) as usize));
        let internal = Relation::from_successors(
            states.iter().map(|s| model.internal_steps(s).iter().map(lookup).collect()).collect(),
        );

        let mut trans = Vec::new();
        let mut native_interf = Vec::new();
        let mut vmax = Vec::new();
        for &t in &config.threads {
            for a in &actions {
                trans.push(Relation::from_successors(
                    states.iter().map(|s| model.step(s, t, a).iter().map(lookup).collect()).collect(),
                ));
                native_interf.push(Relation::from_successors(
                    states
                        .iter()
                        .map(|s| model.interference(s, t, a).unwrap_or_default().iter().map(lookup).collect())
                        .collect(),
                ));
                vmax.push(StateSet::from_fn(n, |i| model.view_maximal(&states[i], t, a)));
            }
        }
        let t0 = config.threads[0];
        let mut assign = HashMap::new();
        for a in &assigns {
            if let Action::RegAssign { reg, value } = a {
                let r = config.register_index(reg).expect("declared register");
                assign.insert(
                    (r, *value),
                    Relation::from_successors(
                        states.iter().map(|s| model.primitive_step(s, t0, a).iter().map(lookup).collect()).collect(),
                    ),
                );
            }
        }

        let beta_matrix = compute_beta(n, &trans, &vmax);
        let beta = beta_matrix.to_relation();
        let interf = match opts.interf {
            InterfMode::Native => native_interf,
            InterfMode::Default => trans.iter().map(|t| beta.compose(t).compose(&beta)).collect(),
        };

        let action_index = actions.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let mut sync = Vec::new();
        for (i, w) in actions.iter().enumerate() {
            for (j, r) in actions.iter().enumerate() {
                if model.is_sync(w, r) {
                    sync.push((i, j));
                }
            }
        }
        Ok(ModelInstance {
            name: model.name(),
            config,
            states,
            index,
            initial,
            actions,
            action_index,
            trans,
            interf,
            vmax,
            assign,
            internal,
            beta,
            beta_matrix,
            sync,
        })
    }

    pub fn build_sc(config: &Config) -> Result<ModelInstance, ModelError> {
        ModelInstance::build(&ScModel::new(config.clone()), &BuildOptions::default())
    }

    pub fn build_tso(config: &Config, bound: usize) -> Result<ModelInstance, ModelError> {
        ModelInstance::build(&TsoModel::new(config.clone(), bound)?, &BuildOptions::default())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, s: &State) -> Option<usize> {
        self.index.get(s).map(|&i| i as usize)
    }

    pub fn action_index(&self, a: &Action) -> Option<usize> {
        self.action_index.get(a).copied()
    }

    fn slot(&self, t: Tid, a: usize) -> usize {
        self.config.thread_index(t).expect("declared thread") * self.actions.len() + a
    }

    pub fn trans_at(&self, t: Tid, a: usize) -> &Relation {
        &self.trans[self.slot(t, a)]
    }

    pub fn interf_at(&self, t: Tid, a: usize) -> &Relation {
        &self.interf[self.slot(t, a)]
    }

    pub fn vmax_at(&self, t: Tid, a: usize) -> &StateSet {
        &self.vmax[self.slot(t, a)]
    }

    /// `T(t, a)`; panics on actions outside the config.
    pub fn trans(&self, t: Tid, a: &Action) -> &Relation {
        self.trans_at(t, self.action_index(a).unwrap_or_else(|| panic!("unknown action {a}")))
    }

    pub fn interf(&self, t: Tid, a: &Action) -> &Relation {
        self.interf_at(t, self.action_index(a).unwrap_or_else(|| panic!("unknown action {a}")))
    }

    pub fn vmax(&self, t: Tid, a: &Action) -> &StateSet {
        self.vmax_at(t, self.action_index(a).unwrap_or_else(|| panic!("unknown action {a}")))
    }

    /// Register assignment `reg := value`.
    pub fn assign(&self, reg: &str, value: Value) -> Option<&Relation> {
        self.assign.get(&(self.config.register_index(reg)?, value))
    }

    pub fn beta_row(&self, a: usize) -> &[u64] {
        self.beta_matrix.row(a)
    }

    pub fn beta_contains(&self, a: usize, b: usize) -> bool {
        self.beta_matrix.contains(a, b)
    }

    pub fn full(&self) -> StateSet {
        StateSet::full(self.len())
    }

    /// Text listing of states, transitions, vmax sets and β.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model {} ({} states)", self.name, self.len());
        for (i, st) in self.states.iter().enumerate() {
            let init = if self.initial.contains(i) { " (initial)" } else { "" };
            let _ = writeln!(s, "  s{i}: {}{init}", st.render(&self.config));
        }
        for &t in &self.config.threads {
            for (k, a) in self.actions.iter().enumerate() {
                let r = self.trans_at(t, k);
                if !r.is_empty() {
                    let pairs: Vec<String> = r.pairs().map(|(x, y)| format!("s{x}->s{y}")).collect();
                    let _ = writeln!(s, "T({t}, {a}): {}", pairs.join(" "));
                }
                let v = self.vmax_at(t, k);
                if v.len() != self.len() {
                    let _ = writeln!(s, "vmax({t}, {a}): {:?}", v);
                }
            }
        }
        let pairs: Vec<String> = self.beta.pairs().map(|(x, y)| format!("s{x}~s{y}")).collect();
        let _ = writeln!(s, "beta: {}", pairs.join(" "));
        s
    }
}

impl fmt::Debug for ModelInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelInstance({}, {} states)", self.name, self.len())
    }
}

/// Bit signature of a state over a family of predicates.
fn signature(n_preds: usize, mut holds: impl FnMut(usize) -> bool) -> Vec<u64> {
    let mut sig = vec![0u64; n_preds.div_ceil(64)];
    for k in 0..n_preds {
        if holds(k) {
            sig[k / 64] |= 1 << (k % 64);
        }
    }
    sig
}

fn sig_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Greatest relation `R` with `R ⨟ T(t,a) ⊆ T(t,a) ⨟ R` and
/// `vmax(t,a) ⊆ wlp(R, vmax(t,a))` for every tabulated `(t, a)`.
pub fn compute_beta(n: usize, trans: &[Relation], vmax: &[StateSet]) -> BitMatrix {
    let enabled: Vec<Vec<u64>> = (0..n).map(|s| signature(trans.len(), |k| !trans[k].succ(s).is_empty())).collect();
    let viewmax: Vec<Vec<u64>> = (0..n).map(|s| signature(vmax.len(), |k| vmax[k].contains(s))).collect();

    let mut r = BitMatrix::empty(n);
    for s1 in 0..n {
        for s2 in 0..n {
            if sig_subset(&enabled[s2], &enabled[s1]) && sig_subset(&viewmax[s1], &viewmax[s2]) {
                r.set(s1, s2, true);
            }
        }
    }

    let stride = n.div_ceil(64);
    let mut reach = vec![0u64; stride * trans.len()];
    loop {
        let mut changed = false;
        for s1 in 0..n {
            // reach[k] = union of R-rows over T_k-successors of s1.
            reach.iter_mut().for_each(|w| *w = 0);
            for (k, t) in trans.iter().enumerate() {
                let dst = &mut reach[k * stride..(k + 1) * stride];
                for &m in t.succ(s1) {
                    for (d, w) in dst.iter_mut().zip(r.row(m as usize)) {
                        *d |= w;
                    }
                }
            }
            let candidates: Vec<usize> = r.row_iter(s1).collect();
            for s2 in candidates {
                let ok = trans.iter().enumerate().all(|(k, t)| {
                    let row = &reach[k * stride..(k + 1) * stride];
                    t.succ(s2).iter().all(|&s3| row[s3 as usize / 64] >> (s3 % 64) & 1 == 1)
                });
                if !ok {
                    r.set(s1, s2, false);
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}
