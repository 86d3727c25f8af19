//! Parser for the `.outline` proof-outline format.
//!
//! ```text
//! config { threads: 1 2; globals: x; registers: r1@2; values: 0 1; }
//! pre { [x = 0]@1 }
//! thread 1 { {true} x := 1; {true} }
//! thread 2 { {true} r1 := x; {true} }
//! post { true }
//! ```
//!
//! Strict mode requires an assertion before, between and after every
//! command. Lenient mode (litmus files) fills missing ones with `true`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::assertion::{Assertion, ViewAtom};
use crate::syntax::{
    Atomic, BinOp, Block, Cmp, CmpOp, Command, Config, ConfigError, Expr, ProofOutline, Register, Step, ThreadProgram,
    Tid, Value,
};

const MAX_DEPTH: usize = 128;

const KEYWORDS: &[&str] = &[
    "config",
    "threads",
    "globals",
    "registers",
    "values",
    "pre",
    "post",
    "thread",
    "true",
    "false",
    "skip",
    "fence",
    "if",
    "else",
    "while",
    "invariant",
    "up",
];

/// Location of a token: one line, columns `[start_col, end_col)`, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub start_col: usize,
    pub end_col: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.start_col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    UndeclaredIdentifier,
    NonOwnerRegister,
    MissingAssertion,
    ValueOutOfRange,
    Config,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::Lexical => "lexical error",
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UndeclaredIdentifier => "undeclared identifier",
            ParseErrorKind::NonOwnerRegister => "register used by non-owner thread",
            ParseErrorKind::MissingAssertion => "missing assertion",
            ParseErrorKind::ValueOutOfRange => "value outside declared values",
            ParseErrorKind::Config => "invalid config",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{span}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Strict,
    Lenient,
}

pub fn parse_outline(text: &str) -> Result<ProofOutline, ParseError> {
    parse_outline_with(text, "<input>", Mode::Strict)
}

pub fn parse_litmus(text: &str) -> Result<ProofOutline, ParseError> {
    parse_outline_with(text, "<input>", Mode::Lenient)
}

/// Parse raw bytes; invalid UTF-8 is a lexical error.
pub fn parse_bytes(bytes: &[u8], file: &str, mode: Mode) -> Result<ProofOutline, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_outline_with(text, file, mode),
        Err(e) => {
            let prefix = &bytes[..e.valid_up_to()];
            let line = 1 + prefix.iter().filter(|&&b| b == b'\n').count();
            let col = 1 + std::str::from_utf8(prefix)
                .map(|s| s.rsplit('\n').next().unwrap_or("").chars().count())
                .unwrap_or(0);
            Err(ParseError {
                kind: ParseErrorKind::Lexical,
                message: "input is not valid UTF-8".into(),
                span: SourceSpan { file: file.into(), line, start_col: col, end_col: col + 1 },
            })
        }
    }
}

pub fn parse_outline_with(text: &str, file: &str, mode: Mode) -> Result<ProofOutline, ParseError> {
    let tokens = lex(text, file)?;
    let mut p = Parser { toks: tokens, pos: 0, mode, config: None, depth: 0 };
    p.outline()
}

/// Parse a standalone assertion against a known config (no thread context).
pub fn parse_assertion(text: &str, config: &Config) -> Result<Assertion, ParseError> {
    let tokens = lex(text, "<assertion>")?;
    let mut p = Parser { toks: tokens, pos: 0, mode: Mode::Strict, config: Some(config.clone()), depth: 0 };
    let a = p.assertion()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    EqEq,
    Ne,
    NotApprox,
    Bang,
    AndOp,
    OrOp,
    Assign,
    AssignRs,
    AssignWs,
    Colon,
    Semi,
    At,
    Plus,
    Minus,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::Int(s) => return write!(f, "`{s}`"),
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::NotApprox => "!~",
            Tok::Bang => "!",
            Tok::AndOp => "/\\",
            Tok::OrOp => "\\/",
            Tok::Assign => ":=",
            Tok::AssignRs => ":=RS",
            Tok::AssignWs => ":=WS",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::At => "@",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Eof => return write!(f, "end of input"),
        };
        write!(f, "`{s}`")
    }
}

fn lex(text: &str, file: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span =
        |line, start, len: usize| SourceSpan { file: file.into(), line, start_col: start, end_col: start + len.max(1) };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Ident(s), span(line, col, i - start)));
            col += i - start;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s), span(line, col, i - start)));
            col += i - start;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            (':', Some('=')) => {
                let word: String = chars.iter().skip(i + 2).take(2).collect();
                let after = chars.get(i + 4).copied();
                let boundary = !after.is_some_and(|a| a.is_ascii_alphanumeric() || a == '_');
                match word.as_str() {
                    "RS" if boundary => (Tok::AssignRs, 4),
                    "WS" if boundary => (Tok::AssignWs, 4),
                    _ => (Tok::Assign, 2),
                }
            }
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('!', Some('~')) => (Tok::NotApprox, 2),
            ('/', Some('\\')) => (Tok::AndOp, 2),
            ('\\', Some('/')) => (Tok::OrOp, 2),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', _) => (Tok::Eq, 1),
            ('!', _) => (Tok::Bang, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            ('@', _) => (Tok::At, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::Lexical,
                    message: format!("unexpected character {c:?}"),
                    span: span(line, col, 1),
                })
            }
        };
        out.push((tok, span(line, col, len)));
        i += len;
        col += len;
    }
    out.push((Tok::Eof, span(line, col, 1)));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    mode: Mode,
    config: Option<Config>,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1.clone()
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, kind: ParseErrorKind, message: impl Into<String>, span: SourceSpan) -> PResult<T> {
        Err(ParseError { kind, message: message.into(), span })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(ParseErrorKind::Syntax, format!("expected {wanted}, found {}", self.peek()), self.span())
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, wanted: &str) -> PResult<SourceSpan> {
        if self.peek() == t {
            Ok(self.bump().1)
        } else {
            self.unexpected(wanted)
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err(ParseErrorKind::Syntax, "nesting too deep", self.span());
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let sp = self.bump().1;
                Ok((s, sp))
            }
            _ => self.unexpected(what),
        }
    }

    fn int_literal(&mut self) -> PResult<(Value, SourceSpan)> {
        let negative = self.peek() == &Tok::Minus;
        let start = self.span();
        if negative {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Int(s) => {
                let sp = self.bump().1;
                let text = if negative { format!("-{s}") } else { s };
                match text.parse::<Value>() {
                    Ok(v) => Ok((v, if negative { start } else { sp })),
                    Err(_) => self.err(ParseErrorKind::Syntax, format!("integer literal {text} out of range"), sp),
                }
            }
            _ => self.unexpected("an integer"),
        }
    }

    fn tid(&mut self) -> PResult<(Tid, SourceSpan)> {
        match self.peek().clone() {
            Tok::Int(s) => {
                let sp = self.bump().1;
                match s.parse::<u32>() {
                    Ok(v) => Ok((Tid(v), sp)),
                    Err(_) => self.err(ParseErrorKind::Syntax, format!("thread id {s} out of range"), sp),
                }
            }
            _ => self.unexpected("a thread id"),
        }
    }

    fn config(&self) -> &Config {
        self.config.as_ref().expect("config is set before any assertion is parsed")
    }

    // ---- top level ----

    fn outline(&mut self) -> PResult<ProofOutline> {
        let config = if self.is_kw("config") { self.config_section()? } else { self.implicit_config()? };
        self.config = Some(config.clone());

        let precondition = if self.is_kw("pre") {
            self.bump();
            self.braced_assertion(None)?
        } else {
            Assertion::True
        };

        let mut threads: Vec<ThreadProgram> = Vec::new();
        while self.is_kw("thread") {
            self.bump();
            let (tid, sp) = self.tid()?;
            if !config.threads.contains(&tid) {
                return self.err(ParseErrorKind::UndeclaredIdentifier, format!("thread {tid} is not declared"), sp);
            }
            if threads.iter().any(|p| p.tid == tid) {
                return self.err(ParseErrorKind::Syntax, format!("thread {tid} defined twice"), sp);
            }
            self.expect(&Tok::LBrace, "`{`")?;
            let body = self.block(tid)?;
            self.expect(&Tok::RBrace, "`}`")?;
            threads.push(ThreadProgram { tid, body });
        }
        if threads.is_empty() {
            return self.unexpected("`thread`");
        }
        for &t in &config.threads {
            if !threads.iter().any(|p| p.tid == t) {
                threads.push(ThreadProgram { tid: t, body: Block { pre: Assertion::True, steps: vec![] } });
            }
        }
        threads.sort_by_key(|p| config.thread_index(p.tid));

        let postcondition = if self.is_kw("post") {
            self.bump();
            self.braced_assertion(None)?
        } else {
            Assertion::True
        };
        if self.peek() != &Tok::Eof {
            return self.unexpected("end of input");
        }
        Ok(ProofOutline { config, precondition, threads, postcondition })
    }

    /// Without a config section: threads are those defined, nothing else is
    /// declared, and values are {0, 1}.
    fn implicit_config(&self) -> PResult<Config> {
        let mut threads = Vec::new();
        for w in self.toks.windows(2) {
            if let (Tok::Ident(k), Tok::Int(n)) = (&w[0].0, &w[1].0) {
                if k == "thread" {
                    if let Ok(n) = n.parse::<u32>() {
                        if !threads.contains(&Tid(n)) {
                            threads.push(Tid(n));
                        }
                    }
                }
            }
        }
        if threads.is_empty() {
            return self.unexpected("`config` or `thread`");
        }
        Config::new(threads, vec![], vec![], vec![0, 1])
            .or_else(|e| self.err(ParseErrorKind::Config, e.to_string(), self.span()))
    }

    fn config_section(&mut self) -> PResult<Config> {
        let head = self.span();
        self.expect_kw("config")?;
        self.expect(&Tok::LBrace, "`{`")?;
        let (mut threads, mut globals, mut registers, mut values) = (None, None, None, None);
        while self.peek() != &Tok::RBrace {
            let (field, sp) = match self.peek().clone() {
                Tok::Ident(s) => (s, self.bump().1),
                _ => return self.unexpected("a config field"),
            };
            self.expect(&Tok::Colon, "`:`")?;
            let dup = |p: &Parser| p.err(ParseErrorKind::Syntax, format!("field `{field}` given twice"), sp.clone());
            match field.as_str() {
                "threads" => {
                    let mut ts = Vec::new();
                    while let Tok::Int(_) = self.peek() {
                        ts.push(self.tid()?.0);
                    }
                    if threads.replace(ts).is_some() {
                        return dup(self);
                    }
                }
                "globals" => {
                    let mut gs = Vec::new();
                    while let Tok::Ident(_) = self.peek() {
                        gs.push(self.ident("a variable name")?.0);
                    }
                    if globals.replace(gs).is_some() {
                        return dup(self);
                    }
                }
                "registers" => {
                    let mut rs = Vec::new();
                    while let Tok::Ident(_) = self.peek() {
                        let name = self.ident("a register name")?.0;
                        self.expect(&Tok::At, "`@` and owner thread")?;
                        let owner = self.tid()?.0;
                        rs.push(Register { name, owner });
                    }
                    if registers.replace(rs).is_some() {
                        return dup(self);
                    }
                }
                "values" => {
                    let mut vs = Vec::new();
                    while matches!(self.peek(), Tok::Int(_) | Tok::Minus) {
                        vs.push(self.int_literal()?.0);
                    }
                    if values.replace(vs).is_some() {
                        return dup(self);
                    }
                }
                other => return self.err(ParseErrorKind::Syntax, format!("unknown config field `{other}`"), sp),
            }
            self.expect(&Tok::Semi, "`;`")?;
        }
        self.bump();
        let threads = match threads {
            Some(t) => t,
            None => return self.err(ParseErrorKind::Config, "config must list threads", head),
        };
        let mut values = values.unwrap_or_else(|| vec![0, 1]);
        let declared = values.len();
        values.sort();
        values.dedup();
        if values.len() != declared {
            return self.err(ParseErrorKind::Config, ConfigError::BadValues.to_string(), head);
        }
        Config::new(threads, globals.unwrap_or_default(), registers.unwrap_or_default(), values)
            .or_else(|e| self.err(ParseErrorKind::Config, e.to_string(), head))
    }

    // ---- blocks and commands ----

    fn optional_assertion(&mut self, tid: Tid) -> PResult<Assertion> {
        if self.peek() == &Tok::LBrace {
            self.braced_assertion(Some(tid))
        } else if self.mode == Mode::Lenient {
            Ok(Assertion::True)
        } else {
            self.err(
                ParseErrorKind::MissingAssertion,
                format!("expected `{{assertion}}` before {}", self.peek()),
                self.span(),
            )
        }
    }

    /// `{A} (label? command ;? {A})*` up to, not including, the closing `}`.
    fn block(&mut self, tid: Tid) -> PResult<Block> {
        self.enter()?;
        let pre = self.optional_assertion(tid)?;
        let mut steps = Vec::new();
        while self.peek() != &Tok::RBrace && self.peek() != &Tok::Eof {
            if self.peek() == &Tok::LBrace {
                return self.err(ParseErrorKind::Syntax, "two assertions in a row", self.span());
            }
            if let (Tok::Int(_), Tok::Colon) = (self.peek(), self.peek_at(1)) {
                self.bump();
                self.bump();
            }
            let command = self.command(tid)?;
            self.eat(&Tok::Semi);
            let post = self.optional_assertion(tid)?;
            steps.push(Step { command, post });
        }
        self.leave();
        Ok(Block { pre, steps })
    }

    fn command(&mut self, tid: Tid) -> PResult<Command> {
        if self.is_kw("skip") {
            self.bump();
            return Ok(Command::Atomic(Atomic::Skip));
        }
        if self.is_kw("fence") {
            self.bump();
            return Ok(Command::Atomic(Atomic::Fence));
        }
        if self.is_kw("if") {
            self.bump();
            let cond = self.guard(tid)?;
            self.expect(&Tok::LBrace, "`{`")?;
            let then_branch = self.block(tid)?;
            self.expect(&Tok::RBrace, "`}`")?;
            self.expect_kw("else")?;
            self.expect(&Tok::LBrace, "`{`")?;
            let else_branch = self.block(tid)?;
            self.expect(&Tok::RBrace, "`}`")?;
            return Ok(Command::If { cond, then_branch, else_branch });
        }
        if self.is_kw("while") {
            self.bump();
            let cond = self.guard(tid)?;
            self.expect_kw("invariant")?;
            let invariant = self.braced_assertion(Some(tid))?;
            self.expect(&Tok::LBrace, "`{`")?;
            let body = self.block(tid)?;
            self.expect(&Tok::RBrace, "`}`")?;
            return Ok(Command::While { cond, invariant, body });
        }
        let (lhs, lsp) = self.ident("a command")?;
        let op = self.bump();
        let sync = match op.0 {
            Tok::Assign => None,
            Tok::AssignRs => Some("RS"),
            Tok::AssignWs => Some("WS"),
            _ => return self.err(ParseErrorKind::Syntax, format!("expected `:=`, found {}", op.0), op.1),
        };
        let config = self.config().clone();
        if config.is_register(&lhs) {
            self.check_owner(&lhs, tid, &lsp)?;
            if sync == Some("WS") {
                return self.err(ParseErrorKind::Syntax, "`:=WS` needs a shared variable on the left", op.1);
            }
            if let (Tok::Ident(rhs), false) = (self.peek().clone(), self.continues_expr()) {
                if config.is_global(&rhs) {
                    self.bump();
                    return Ok(Command::Atomic(Atomic::Read { reg: lhs, var: rhs, sync: sync.is_some() }));
                }
            }
            if sync == Some("RS") {
                return self.unexpected("a shared variable after `:=RS`");
            }
            let expr = self.command_expr(tid)?;
            Ok(Command::Atomic(Atomic::AssignLocal { reg: lhs, expr }))
        } else if config.is_global(&lhs) {
            if sync == Some("RS") {
                return self.err(ParseErrorKind::Syntax, "`:=RS` needs a register on the left", op.1);
            }
            let start = self.span();
            let expr = self.command_expr(tid)?;
            if let Some(v) = expr.as_literal() {
                if !config.has_value(v) {
                    return self.err(ParseErrorKind::ValueOutOfRange, format!("{v} is not a declared value"), start);
                }
            }
            Ok(Command::Atomic(Atomic::Write { var: lhs, expr, sync: sync.is_some() }))
        } else {
            self.err(ParseErrorKind::UndeclaredIdentifier, format!("`{lhs}` is not declared"), lsp)
        }
    }

    /// True when the token after the current one continues an arithmetic
    /// expression.
    fn continues_expr(&self) -> bool {
        matches!(self.peek_at(1), Tok::Plus | Tok::Minus | Tok::Star)
    }

    fn check_owner(&self, reg: &str, tid: Tid, sp: &SourceSpan) -> PResult<()> {
        match self.config().owner(reg) {
            Some(o) if o == tid => Ok(()),
            Some(o) => self.err(
                ParseErrorKind::NonOwnerRegister,
                format!("register `{reg}` belongs to thread {o}, not {tid}"),
                sp.clone(),
            ),
            None => self.err(ParseErrorKind::UndeclaredIdentifier, format!("`{reg}` is not a register"), sp.clone()),
        }
    }

    fn command_expr(&mut self, tid: Tid) -> PResult<Expr> {
        let start = self.pos;
        let e = self.expr()?;
        for (tok, sp) in &self.toks[start..self.pos] {
            if let Tok::Ident(name) = tok {
                self.check_owner(name, tid, sp)?;
            }
        }
        Ok(e)
    }

    fn guard(&mut self, tid: Tid) -> PResult<Assertion> {
        let sp = self.expect(&Tok::LParen, "`(`")?;
        let start = self.pos;
        let a = self.assertion()?;
        self.expect(&Tok::RParen, "`)`")?;
        if !a.is_local() {
            return self.err(ParseErrorKind::Syntax, "guards may only mention registers", sp);
        }
        for (tok, sp) in &self.toks[start..self.pos] {
            if let Tok::Ident(name) = tok {
                if self.config().is_register(name) {
                    self.check_owner(name, tid, sp)?;
                }
            }
        }
        Ok(a)
    }

    // ---- assertions ----

    fn braced_assertion(&mut self, _tid: Option<Tid>) -> PResult<Assertion> {
        self.expect(&Tok::LBrace, "`{`")?;
        let a = self.assertion()?;
        self.expect(&Tok::RBrace, "`}`")?;
        Ok(a)
    }

    fn assertion(&mut self) -> PResult<Assertion> {
        self.enter()?;
        let mut parts = vec![self.conjunction()?];
        while self.eat(&Tok::OrOp) {
            parts.push(self.conjunction()?);
        }
        self.leave();
        Ok(Assertion::or(parts))
    }

    fn conjunction(&mut self) -> PResult<Assertion> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::AndOp) {
            parts.push(self.unary()?);
        }
        Ok(Assertion::and(parts))
    }

    fn unary(&mut self) -> PResult<Assertion> {
        if self.peek() == &Tok::Bang {
            let sp = self.bump().1;
            self.enter()?;
            let inner = self.unary()?;
            self.leave();
            return match inner.negate_local() {
                Some(n) => Ok(n),
                None => self.err(ParseErrorKind::Syntax, "only local assertions can be negated", sp),
            };
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Assertion> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "true" => {
                self.bump();
                Ok(Assertion::True)
            }
            Tok::Ident(k) if k == "false" => {
                self.bump();
                Ok(Assertion::False)
            }
            Tok::Ident(k) if k == "up" && self.peek_at(1) == &Tok::LParen => {
                self.bump();
                self.bump();
                let var = self.global()?;
                self.expect(&Tok::RParen, "`)`")?;
                let thread = self.at_thread()?;
                Ok(Assertion::View(ViewAtom::MaxView { var, thread }))
            }
            Tok::LBrack => {
                let (var, op, value) = self.bracket_atom(&[Tok::NotApprox, Tok::EqEq, Tok::Eq])?;
                let thread = self.at_thread()?;
                Ok(Assertion::View(match op {
                    Tok::NotApprox => ViewAtom::Impossible { var, value, thread },
                    Tok::EqEq => ViewAtom::Definite { var, value, thread },
                    _ => ViewAtom::MaxValue { var, value, thread },
                }))
            }
            Tok::Lt => {
                let sp = self.bump().1;
                let cond_var = self.global()?;
                self.expect(&Tok::Eq, "`=`")?;
                let cond_value = self.value()?;
                self.expect(&Tok::Gt, "`>`")?;
                let synced = matches!(self.peek(), Tok::Ident(s) if s == "S");
                if synced {
                    self.bump();
                }
                let (var, _, value) = self.bracket_atom(&[Tok::Eq])?;
                let thread = self.at_thread()?;
                if synced {
                    Ok(Assertion::View(ViewAtom::SyncedCondObs { cond_var, cond_value, var, value, thread }))
                } else if cond_var == var && cond_value == value {
                    Ok(Assertion::View(ViewAtom::CondObs { var, value, thread }))
                } else {
                    self.err(
                        ParseErrorKind::Syntax,
                        "conditional observation `<x = v> [x = v]@t` must repeat its variable and value",
                        sp,
                    )
                }
            }
            Tok::LParen if !self.paren_is_expression() => {
                self.bump();
                let a = self.assertion()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(a)
            }
            Tok::Ident(_) | Tok::Int(_) | Tok::Minus | Tok::LParen => self.comparison(),
            _ => self.unexpected("an assertion"),
        }
    }

    /// Decide whether `(` opens an arithmetic expression by looking at the
    /// token following its matching `)`.
    fn paren_is_expression(&self) -> bool {
        let mut depth = 0usize;
        for (i, (tok, _)) in self.toks.iter().enumerate().skip(self.pos) {
            match tok {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        let after = &self.toks[(i + 1).min(self.toks.len() - 1)].0;
                        return matches!(
                            after,
                            Tok::Plus
                                | Tok::Minus
                                | Tok::Star
                                | Tok::Eq
                                | Tok::Ne
                                | Tok::Lt
                                | Tok::Le
                                | Tok::Gt
                                | Tok::Ge
                        );
                    }
                }
                Tok::Eof => return false,
                _ => {}
            }
        }
        false
    }

    fn bracket_atom(&mut self, ops: &[Tok]) -> PResult<(String, Tok, Value)> {
        self.expect(&Tok::LBrack, "`[`")?;
        let var = self.global()?;
        let op = self.peek().clone();
        if !ops.contains(&op) {
            let names: Vec<String> = ops.iter().map(|t| t.to_string()).collect();
            return self.unexpected(&names.join(" or "));
        }
        self.bump();
        let value = self.value()?;
        self.expect(&Tok::RBrack, "`]`")?;
        Ok((var, op, value))
    }

    fn global(&mut self) -> PResult<String> {
        let (name, sp) = self.ident("a shared variable")?;
        if self.config().is_global(&name) {
            Ok(name)
        } else {
            self.err(ParseErrorKind::UndeclaredIdentifier, format!("`{name}` is not a declared shared variable"), sp)
        }
    }

    fn value(&mut self) -> PResult<Value> {
        let (v, sp) = self.int_literal()?;
        if self.config().has_value(v) {
            Ok(v)
        } else {
            self.err(ParseErrorKind::ValueOutOfRange, format!("{v} is not a declared value"), sp)
        }
    }

    fn at_thread(&mut self) -> PResult<Tid> {
        self.expect(&Tok::At, "`@`")?;
        let (t, sp) = self.tid()?;
        if self.config().threads.contains(&t) {
            Ok(t)
        } else {
            self.err(ParseErrorKind::UndeclaredIdentifier, format!("thread {t} is not declared"), sp)
        }
    }

    fn comparison(&mut self) -> PResult<Assertion> {
        let start = self.pos;
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return self.unexpected("a comparison operator"),
        };
        self.bump();
        let rhs = self.expr()?;
        for (tok, sp) in &self.toks[start..self.pos] {
            if let Tok::Ident(name) = tok {
                if !self.config().is_register(name) {
                    return self.err(
                        ParseErrorKind::UndeclaredIdentifier,
                        format!("`{name}` is not a declared register"),
                        sp.clone(),
                    );
                }
            }
        }
        Ok(Assertion::Local(Cmp::new(lhs, op, rhs)))
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let mut e = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let r = self.term()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
        self.leave();
        Ok(e)
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut e = self.factor()?;
        while self.eat(&Tok::Star) {
            let r = self.factor()?;
            e = Expr::Bin(BinOp::Mul, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn factor(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Minus => Ok(Expr::Lit(self.int_literal()?.0)),
            Tok::Ident(_) => {
                let (name, sp) = self.ident("a register")?;
                if self.config().is_register(&name) {
                    Ok(Expr::Reg(name))
                } else if self.config().is_global(&name) {
                    self.err(
                        ParseErrorKind::Syntax,
                        format!("shared variable `{name}` cannot appear in an expression"),
                        sp,
                    )
                } else {
                    self.err(ParseErrorKind::UndeclaredIdentifier, format!("`{name}` is not declared"), sp)
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.unexpected("an expression"),
        }
    }
}

/// Names used by an outline that are not declared in its config. Parsing
/// already rejects these; exposed for callers building outlines by hand.
pub fn undeclared_names(o: &ProofOutline) -> BTreeSet<String> {
    let mut regs = o.precondition.registers();
    regs.extend(o.postcondition.registers());
    for t in &o.threads {
        for a in t.body.assertions() {
            regs.extend(a.registers());
        }
    }
    regs.retain(|r| !o.config.is_register(r));
    regs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertion::atoms::*;

    const MINI: &str = "config { threads: 1 2; globals: x y; registers: r1@2; values: 0 1; }\n";

    fn parse_err(src: &str) -> ParseError {
        parse_outline(src).unwrap_err()
    }

    #[test]
    fn minimal_skip_outline() {
        let o = parse_outline("thread 1 { {true} skip {true} }").unwrap();
        assert_eq!(o.threads.len(), 1);
        assert!(o.config.globals.is_empty());
        assert_eq!(o.threads[0].body.steps.len(), 1);
    }

    #[test]
    fn missing_assertion_between_commands() {
        let e = parse_err(&format!("{MINI} thread 1 {{ {{true}} x := 1; x := 0; {{true}} }}"));
        assert_eq!(e.kind, ParseErrorKind::MissingAssertion);
        assert_eq!(e.span.line, 2);
        assert_eq!(e.span.start_col, 28);
    }

    #[test]
    fn lenient_fills_true() {
        let o = parse_outline_with(&format!("{MINI} thread 1 {{ x := 1; x := 0 }}"), "t", Mode::Lenient).unwrap();
        assert_eq!(o.threads[0].body.pre, Assertion::True);
        assert_eq!(o.threads[0].body.steps.len(), 2);
    }

    #[test]
    fn error_kinds() {
        let e = parse_err(&format!("{MINI} thread 1 {{ {{true}} r1 := x {{true}} }}"));
        assert_eq!(e.kind, ParseErrorKind::NonOwnerRegister);
        let e = parse_err(&format!("{MINI} thread 1 {{ {{true}} z := 1 {{true}} }}"));
        assert_eq!(e.kind, ParseErrorKind::UndeclaredIdentifier);
        let e = parse_err(&format!("{MINI} thread 1 {{ {{true}} x := 2 {{true}} }}"));
        assert_eq!(e.kind, ParseErrorKind::ValueOutOfRange);
        let e = parse_err(&format!("{MINI} thread 1 {{ {{[x = 3]@1}} skip {{true}} }}"));
        assert_eq!(e.kind, ParseErrorKind::ValueOutOfRange);
        let e = parse_err(&format!("{MINI} thread 1 {{ {{true}} x := 1 $ {{true}} }}"));
        assert_eq!(e.kind, ParseErrorKind::Lexical);
        let e = parse_err(&format!("{MINI} thread 1 {{ {{true /\\ }} skip {{true}} }}"));
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        let e = parse_err(&format!("{MINI} thread 1 {{ {{[x = 1]@7}} skip {{true}} }}"));
        assert_eq!(e.kind, ParseErrorKind::UndeclaredIdentifier);
    }

    #[test]
    fn commands() {
        let o = parse_outline(&format!(
            "{MINI} thread 2 {{ {{true}} 1: r1 :=RS y; {{true}} x :=WS 1 {{true}} r1 := r1 + 1 {{true}} r1 := x {{true}} fence {{true}} }}"
        ))
        .unwrap();
        let steps: Vec<_> = o.threads[1].body.atomic_steps().into_iter().map(|(_, a, _)| a.clone()).collect();
        assert_eq!(steps[0], Atomic::Read { reg: "r1".into(), var: "y".into(), sync: true });
        assert_eq!(steps[1], Atomic::Write { var: "x".into(), expr: Expr::Lit(1), sync: true });
        assert!(matches!(steps[2], Atomic::AssignLocal { .. }));
        assert_eq!(steps[3], Atomic::Read { reg: "r1".into(), var: "x".into(), sync: false });
        assert_eq!(steps[4], Atomic::Fence);
    }

    #[test]
    fn atoms_and_precedence() {
        let cfg = Config::new(
            vec![Tid(1), Tid(3)],
            vec!["x".into(), "y".into()],
            vec![Register { name: "r1".into(), owner: Tid(1) }],
            vec![0, 1],
        )
        .unwrap();
        let a = parse_assertion("r1 != 1 \\/ <y = 1>S [x = 1]@3 /\\ up(x)@1", &cfg).unwrap();
        assert_eq!(a, Assertion::Or(vec![reg_ne("r1", 1), Assertion::And(vec![scond("y", 1, "x", 1, 3), up("x", 1)])]));
        assert_eq!(parse_assertion("<x = 1> [x = 1]@1", &cfg).unwrap(), cond("x", 1, 1));
        assert_eq!(parse_assertion("[y !~ 0]@3", &cfg).unwrap(), imp("y", 0, 3));
        assert_eq!(parse_assertion("[y == 0]@3", &cfg).unwrap(), def("y", 0, 3));
        assert!(parse_assertion("<x = 1> [x = 0]@1", &cfg).is_err());
        assert_eq!(parse_assertion("!(r1 = 1)", &cfg).unwrap(), reg_ne("r1", 1));
        assert!(parse_assertion("![x = 1]@1", &cfg).is_err());
        let e = parse_assertion("(r1 + 1) * 2 = 2", &cfg).unwrap();
        assert!(matches!(e, Assertion::Local(_)));
    }

    #[test]
    fn control_flow() {
        let o = parse_outline(&format!(
            "{MINI} thread 2 {{ {{true}} if (r1 = 0) {{ {{true}} skip {{true}} }} else {{ {{true}} }} {{true}} \
             while (r1 != 1) invariant {{ true }} {{ {{true}} r1 := x {{true}} }} {{r1 = 1}} }}"
        ))
        .unwrap();
        assert_eq!(o.threads[1].body.steps.len(), 2);
        assert!(!o.threads[1].body.is_loop_free());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!("{MINI} thread 1 {{ {{{}true{}}} skip {{true}} }}", "(".repeat(5000), ")".repeat(5000));
        assert_eq!(parse_err(&src).kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn invalid_utf8() {
        let e = parse_bytes(b"thread 1 { \xff }", "f", Mode::Strict).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Lexical);
    }
}
