//! Programs, actions and configurations.
//!
//! A [`Config`] fixes the finite universe every other component works in:
//! thread identifiers, shared variables, registers (each owned by one
//! thread) and the value domain.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::assertion::Assertion;

pub type Value = i64;

/// Thread identifier as written in outlines (`thread 1 { ... }`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Tid(pub u32);

impl fmt::Display for Tid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    pub owner: Tid,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("duplicate thread id {0}")]
    DuplicateThread(Tid),
    #[error("name `{0}` declared more than once")]
    DuplicateName(String),
    #[error("register `{0}` is owned by undeclared thread {1}")]
    UnknownOwner(String, Tid),
    #[error("value set must contain 0")]
    MissingZero,
    #[error("value set must be non-empty and free of duplicates")]
    BadValues,
    #[error("at least one thread is required")]
    NoThreads,
}

/// Threads, shared variables, registers and values of one program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Config {
    pub threads: Vec<Tid>,
    pub globals: Vec<String>,
    pub registers: Vec<Register>,
    pub values: Vec<Value>,
}

impl Config {
    pub fn new(
        threads: Vec<Tid>,
        globals: Vec<String>,
        registers: Vec<Register>,
        mut values: Vec<Value>,
    ) -> Result<Self, ConfigError> {
        if threads.is_empty() {
            return Err(ConfigError::NoThreads);
        }
        let mut seen_t = BTreeSet::new();
        for t in &threads {
            if !seen_t.insert(*t) {
                return Err(ConfigError::DuplicateThread(*t));
            }
        }
        let mut names = BTreeSet::new();
        for n in globals.iter().chain(registers.iter().map(|r| &r.name)) {
            if !names.insert(n.clone()) {
                return Err(ConfigError::DuplicateName(n.clone()));
            }
        }
        for r in &registers {
            if !seen_t.contains(&r.owner) {
                return Err(ConfigError::UnknownOwner(r.name.clone(), r.owner));
            }
        }
        let n = values.len();
        values.sort_unstable();
        values.dedup();
        if values.is_empty() || values.len() != n {
            return Err(ConfigError::BadValues);
        }
        if !values.contains(&0) {
            return Err(ConfigError::MissingZero);
        }
        Ok(Config { threads, globals, registers, values })
    }

    pub fn global_index(&self, name: &str) -> Option<usize> {
        self.globals.iter().position(|g| g == name)
    }

    pub fn register_index(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.name == name)
    }

    pub fn thread_index(&self, t: Tid) -> Option<usize> {
        self.threads.iter().position(|x| *x == t)
    }

    pub fn value_index(&self, v: Value) -> Option<usize> {
        self.values.binary_search(&v).ok()
    }

    pub fn owner(&self, reg: &str) -> Option<Tid> {
        self.registers.iter().find(|r| r.name == reg).map(|r| r.owner)
    }

    pub fn is_global(&self, name: &str) -> bool {
        self.global_index(name).is_some()
    }

    pub fn is_register(&self, name: &str) -> bool {
        self.register_index(name).is_some()
    }

    pub fn has_value(&self, v: Value) -> bool {
        self.value_index(v).is_some()
    }

    /// Every memory action over this configuration, in canonical order:
    /// plain reads, synchronized reads, plain writes, synchronized writes,
    /// then the fence.
    pub fn actions(&self) -> Vec<Action> {
        let mut out = Vec::new();
        for sync in [false, true] {
            for x in &self.globals {
                for r in &self.registers {
                    for &v in &self.values {
                        out.push(Action::Read { var: x.clone(), reg: r.name.clone(), value: v, sync });
                    }
                }
            }
        }
        for sync in [false, true] {
            for x in &self.globals {
                for &v in &self.values {
                    out.push(Action::Write { var: x.clone(), value: v, sync });
                }
            }
        }
        out.push(Action::Fence);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ActionKind {
    Read,
    ReadSync,
    Write,
    WriteSync,
    Fence,
    RegAssign,
    Internal,
}

/// A labelled memory event. Register assignments and the internal action
/// only appear in extended action sets; they are never model actions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Action {
    Read { var: String, reg: String, value: Value, sync: bool },
    Write { var: String, value: Value, sync: bool },
    Fence,
    RegAssign { reg: String, value: Value },
    Internal,
}

/// Derived attributes of an action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionInfo<'a> {
    pub var: Option<&'a str>,
    pub rdval: Option<Value>,
    pub wrval: Option<Value>,
}

impl ActionInfo<'_> {
    pub fn is_read(&self) -> bool {
        self.rdval.is_some() && self.wrval.is_none()
    }

    pub fn is_write(&self) -> bool {
        self.wrval.is_some() && self.rdval.is_none()
    }

    pub fn reads_value(&self, v: Value) -> bool {
        self.is_read() && self.rdval == Some(v)
    }

    pub fn writes_value(&self, v: Value) -> bool {
        self.is_write() && self.wrval == Some(v)
    }

    pub fn on_var(&self, x: &str) -> bool {
        self.var == Some(x)
    }
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Read { sync: false, .. } => ActionKind::Read,
            Action::Read { sync: true, .. } => ActionKind::ReadSync,
            Action::Write { sync: false, .. } => ActionKind::Write,
            Action::Write { sync: true, .. } => ActionKind::WriteSync,
            Action::Fence => ActionKind::Fence,
            Action::RegAssign { .. } => ActionKind::RegAssign,
            Action::Internal => ActionKind::Internal,
        }
    }

    pub fn classify(&self) -> ActionInfo<'_> {
        match self {
            Action::Read { var, value, .. } => ActionInfo { var: Some(var), rdval: Some(*value), wrval: None },
            Action::Write { var, value, .. } => ActionInfo { var: Some(var), rdval: None, wrval: Some(*value) },
            _ => ActionInfo { var: None, rdval: None, wrval: None },
        }
    }

    pub fn var(&self) -> Option<&str> {
        self.classify().var
    }

    /// Is this a member of `Act` (as opposed to the extended set)?
    pub fn is_memory_action(&self) -> bool {
        matches!(self, Action::Read { .. } | Action::Write { .. } | Action::Fence)
    }

    pub fn is_sync(&self) -> bool {
        matches!(self, Action::Read { sync: true, .. } | Action::Write { sync: true, .. })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Read { var, reg, value, sync } => {
                write!(f, "rd{}({var},{reg},{value})", if *sync { "^RS" } else { "" })
            }
            Action::Write { var, value, sync } => {
                write!(f, "wr{}({var},{value})", if *sync { "^WS" } else { "" })
            }
            Action::Fence => write!(f, "fence"),
            Action::RegAssign { reg, value } => write!(f, "{reg}:={value}"),
            Action::Internal => write!(f, "tau"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

/// Arithmetic expression over registers and literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    Lit(Value),
    Reg(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, env: &impl Fn(&str) -> Option<Value>) -> Option<Value> {
        match self {
            Expr::Lit(v) => Some(*v),
            Expr::Reg(r) => env(r),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(env)?, b.eval(env)?);
                match op {
                    BinOp::Add => a.checked_add(b),
                    BinOp::Sub => a.checked_sub(b),
                    BinOp::Mul => a.checked_mul(b),
                }
            }
        }
    }

    pub fn registers(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Reg(r) => {
                out.insert(r.clone());
            }
            Expr::Bin(_, a, b) => {
                a.registers(out);
                b.registers(out);
            }
        }
    }

    pub fn substitute(&self, reg: &str, by: &Expr) -> Expr {
        match self {
            Expr::Reg(r) if r == reg => by.clone(),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.substitute(reg, by)), Box::new(b.substitute(reg, by))),
            other => other.clone(),
        }
    }

    pub fn as_literal(&self) -> Option<Value> {
        match self {
            Expr::Lit(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn holds(self, a: Value, b: Value) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Comparison between two register expressions: the leaf of every local
/// assertion. Boolean structure lives one level up, in [`Assertion`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cmp {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Cmp {
    pub fn new(lhs: Expr, op: CmpOp, rhs: Expr) -> Self {
        Cmp { lhs, op, rhs }
    }

    /// `reg op value`, the common shape in outlines.
    pub fn reg(reg: &str, op: CmpOp, value: Value) -> Self {
        Cmp::new(Expr::Reg(reg.to_string()), op, Expr::Lit(value))
    }

    pub fn eval(&self, env: &impl Fn(&str) -> Option<Value>) -> Option<bool> {
        Some(self.op.holds(self.lhs.eval(env)?, self.rhs.eval(env)?))
    }

    pub fn negate(&self) -> Cmp {
        Cmp { lhs: self.lhs.clone(), op: self.op.negate(), rhs: self.rhs.clone() }
    }

    pub fn registers(&self, out: &mut BTreeSet<String>) {
        self.lhs.registers(out);
        self.rhs.registers(out);
    }

    pub fn substitute(&self, reg: &str, by: &Expr) -> Cmp {
        Cmp { lhs: self.lhs.substitute(reg, by), op: self.op, rhs: self.rhs.substitute(reg, by) }
    }
}

/// Single-step commands; the unit of a Hoare triple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Atomic {
    Skip,
    Fence,
    AssignLocal { reg: String, expr: Expr },
    Read { reg: String, var: String, sync: bool },
    Write { var: String, expr: Expr, sync: bool },
}

impl Atomic {
    /// Register written by the command, if any.
    pub fn target_register(&self) -> Option<&str> {
        match self {
            Atomic::AssignLocal { reg, .. } | Atomic::Read { reg, .. } => Some(reg),
            _ => None,
        }
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Atomic::Skip)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Command {
    Atomic(Atomic),
    /// Guards are local assertions over registers owned by the thread.
    If {
        cond: Assertion,
        then_branch: Block,
        else_branch: Block,
    },
    While {
        cond: Assertion,
        invariant: Assertion,
        body: Block,
    },
}

/// An annotated command sequence `{pre} c1 {a1} c2 {a2} ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub pre: Assertion,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub command: Command,
    pub post: Assertion,
}

impl Block {
    pub fn post(&self) -> &Assertion {
        self.steps.last().map(|s| &s.post).unwrap_or(&self.pre)
    }

    /// Every atomic command with its annotated pre/post, in program order.
    pub fn atomic_steps(&self) -> Vec<(&Assertion, &Atomic, &Assertion)> {
        let mut out = Vec::new();
        let mut pre = &self.pre;
        for step in &self.steps {
            match &step.command {
                Command::Atomic(a) => out.push((pre, a, &step.post)),
                Command::If { then_branch, else_branch, .. } => {
                    out.extend(then_branch.atomic_steps());
                    out.extend(else_branch.atomic_steps());
                }
                Command::While { body, .. } => out.extend(body.atomic_steps()),
            }
            pre = &step.post;
        }
        out
    }

    /// All program-point assertions, each once, in textual order. Loop
    /// invariants count as program points.
    pub fn assertions(&self) -> Vec<&Assertion> {
        let mut out = vec![&self.pre];
        for step in &self.steps {
            match &step.command {
                Command::Atomic(_) => {}
                Command::If { then_branch, else_branch, .. } => {
                    out.extend(then_branch.assertions());
                    out.extend(else_branch.assertions());
                }
                Command::While { invariant, body, .. } => {
                    out.push(invariant);
                    out.extend(body.assertions());
                }
            }
            out.push(&step.post);
        }
        out
    }

    pub fn is_loop_free(&self) -> bool {
        self.steps.iter().all(|s| match &s.command {
            Command::Atomic(_) => true,
            Command::If { then_branch, else_branch, .. } => then_branch.is_loop_free() && else_branch.is_loop_free(),
            Command::While { .. } => false,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThreadProgram {
    pub tid: Tid,
    pub body: Block,
}

/// A concurrent program with an assertion at every program point plus a
/// global pre- and postcondition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProofOutline {
    pub config: Config,
    pub precondition: Assertion,
    pub threads: Vec<ThreadProgram>,
    pub postcondition: Assertion,
}

impl ProofOutline {
    pub fn thread(&self, t: Tid) -> Option<&ThreadProgram> {
        self.threads.iter().find(|p| p.tid == t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    /// Local correctness of a thread's own command.
    Local,
    /// Interference freedom: assertion number `assertion` of `observer`.
    Global { observer: Tid, assertion: usize },
    /// Control-flow glue (branch entry/exit, loop invariants).
    Plumbing,
}

/// `{pre} command_thread {post}` for an atomic command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HoareTriple {
    pub pre: Assertion,
    pub thread: Tid,
    pub command: Atomic,
    pub post: Assertion,
    pub origin: Origin,
}

impl HoareTriple {
    pub fn new(pre: Assertion, thread: Tid, command: Atomic, post: Assertion) -> Self {
        HoareTriple { pre, thread, command, post, origin: Origin::Local }
    }
}

impl fmt::Display for Atomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atomic::Skip => write!(f, "skip"),
            Atomic::Fence => write!(f, "fence"),
            Atomic::AssignLocal { reg, expr } => write!(f, "{reg} := {expr}"),
            Atomic::Read { reg, var, sync } => write!(f, "{reg} :={} {var}", if *sync { "RS" } else { "" }),
            Atomic::Write { var, expr, sync } => write!(f, "{var} :={} {expr}", if *sync { "WS" } else { "" }),
        }
    }
}

impl fmt::Display for HoareTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}} {}@{} {{{}}}", self.pre, self.command, self.thread, self.post)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn prec(e: &Expr) -> u8 {
            match e {
                Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
                Expr::Bin(BinOp::Mul, ..) => 2,
                _ => 3,
            }
        }
        match self {
            Expr::Lit(v) if *v < 0 => write!(f, "({v})"),
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Reg(r) => write!(f, "{r}"),
            Expr::Bin(op, a, b) => {
                let p = prec(self);
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                };
                // Left-associative: the right operand needs parentheses at equal precedence.
                if prec(a) < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {sym} ")?;
                if prec(b) <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}
