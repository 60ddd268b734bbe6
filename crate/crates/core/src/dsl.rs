//! Textual strategy language. Every combinator and traversal scheme has a
//! name, so traversals are composed on the command line, e.g.
//! `belowlist([rule p1, rule p2], rule sortb2int)`.
//!
//! Grammar (function-call syntax; `[...]` is a predicate list):
//!
//! ```text
//! e ::= id | fail | skip
//!     | rule NAME | adhoc(e, NAME, ...) | ?x
//!     | const(L) | listof(e)
//!     | seq(e, e) | choice(e, e) | pass(e, ?x, e)
//!     | all(e) | one(e)
//!     | full_td(e) | full_bu(e) | once_td(e) | once_bu(e) | stop_td(e) | stop_bu(e)
//!     | full_tdpe(e, V, L) | once_tdpe(e, V, L)
//!     | beloweq(p, e) | below(p, e) | aboveeq(p, e) | above(p, e)
//!     | belowlist([p, ...], e) | abovelist([p, ...], e)
//!     | prepost(e, [p, ...], [p, ...])
//! V ::= env | INT | add(V, V)           (environment update expressions)
//! L ::= INT | true | false | unit | "string"
//! ```
//!
//! Inside the body of `pass(e1, ?x, e2)` the bound `?x` denotes the value
//! produced by `e1`; inside the strategy argument of the `*_tdpe` forms,
//! `env` denotes the current environment. The language is first-order:
//! no user-defined recursion at the surface level.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::effects::{Eff, EffectKind, Monoid};
use crate::error::{Error, Result};
use crate::rules::{compile_tp_group, compile_tu_group, RuleBase, RuleDef, RuleKind};
use crate::schemes::{self, Flavor, Predicate, Strat};
use crate::signature::{Signature, SortName};
use crate::strategy::{const_tu, fail_tu, id_tp, pass_tp, pass_tu, TU};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum Lit {
    Int(i64),
    Bool(bool),
    Str(String),
    Unit,
}

impl Lit {
    pub fn to_value(&self) -> Value {
        match self {
            Lit::Int(n) => Value::Int(*n),
            Lit::Bool(b) => Value::Bool(*b),
            Lit::Str(s) => Value::Str(s.clone()),
            Lit::Unit => Value::Unit,
        }
    }
}

/// Environment-update expressions for the `*_tdpe` forms.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueExpr {
    Env,
    Lit(Lit),
    Add(Box<ValueExpr>, Box<ValueExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyExpr {
    Id,
    Fail,
    Skip,
    Rule(String),
    Var(String),
    Const(Lit),
    Listof(Box<StrategyExpr>),
    Adhoc(Box<StrategyExpr>, Vec<String>),
    Seq(Box<StrategyExpr>, Box<StrategyExpr>),
    Choice(Box<StrategyExpr>, Box<StrategyExpr>),
    Pass(Box<StrategyExpr>, String, Box<StrategyExpr>),
    All(Box<StrategyExpr>),
    One(Box<StrategyExpr>),
    FullTd(Box<StrategyExpr>),
    FullBu(Box<StrategyExpr>),
    OnceTd(Box<StrategyExpr>),
    OnceBu(Box<StrategyExpr>),
    StopTd(Box<StrategyExpr>),
    StopBu(Box<StrategyExpr>),
    FullTdpe(Box<StrategyExpr>, ValueExpr, Lit),
    OnceTdpe(Box<StrategyExpr>, ValueExpr, Lit),
    Beloweq(Box<StrategyExpr>, Box<StrategyExpr>),
    Below(Box<StrategyExpr>, Box<StrategyExpr>),
    Aboveeq(Box<StrategyExpr>, Box<StrategyExpr>),
    Above(Box<StrategyExpr>, Box<StrategyExpr>),
    Belowlist(Vec<StrategyExpr>, Box<StrategyExpr>),
    Abovelist(Vec<StrategyExpr>, Box<StrategyExpr>),
    Prepost(Box<StrategyExpr>, Vec<StrategyExpr>, Vec<StrategyExpr>),
}

// ---------------------------------------------------------------------------
// Printing (canonical form; parse/print round-trips)

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(n) => write!(f, "{n}"),
            Lit::Bool(b) => write!(f, "{b}"),
            Lit::Str(s) => write!(f, "{s:?}"),
            Lit::Unit => write!(f, "unit"),
        }
    }
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueExpr::Env => write!(f, "env"),
            ValueExpr::Lit(l) => write!(f, "{l}"),
            ValueExpr::Add(a, b) => write!(f, "add({a}, {b})"),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, ps: &[StrategyExpr]) -> fmt::Result {
    write!(f, "[")?;
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{p}")?;
    }
    write!(f, "]")
}

impl fmt::Display for StrategyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StrategyExpr::*;
        match self {
            Id => write!(f, "id"),
            Fail => write!(f, "fail"),
            Skip => write!(f, "skip"),
            Rule(n) => write!(f, "rule {n}"),
            Var(x) if x == "env" => write!(f, "env"),
            Var(x) => write!(f, "?{x}"),
            Const(l) => write!(f, "const({l})"),
            Listof(e) => write!(f, "listof({e})"),
            Adhoc(base, names) => {
                write!(f, "adhoc({base}")?;
                for n in names {
                    write!(f, ", {n}")?;
                }
                write!(f, ")")
            }
            Seq(a, b) => write!(f, "seq({a}, {b})"),
            Choice(a, b) => write!(f, "choice({a}, {b})"),
            Pass(a, x, b) => write!(f, "pass({a}, ?{x}, {b})"),
            All(e) => write!(f, "all({e})"),
            One(e) => write!(f, "one({e})"),
            FullTd(e) => write!(f, "full_td({e})"),
            FullBu(e) => write!(f, "full_bu({e})"),
            OnceTd(e) => write!(f, "once_td({e})"),
            OnceBu(e) => write!(f, "once_bu({e})"),
            StopTd(e) => write!(f, "stop_td({e})"),
            StopBu(e) => write!(f, "stop_bu({e})"),
            FullTdpe(e, u, l) => write!(f, "full_tdpe({e}, {u}, {l})"),
            OnceTdpe(e, u, l) => write!(f, "once_tdpe({e}, {u}, {l})"),
            Beloweq(p, e) => write!(f, "beloweq({p}, {e})"),
            Below(p, e) => write!(f, "below({p}, {e})"),
            Aboveeq(p, e) => write!(f, "aboveeq({p}, {e})"),
            Above(p, e) => write!(f, "above({p}, {e})"),
            Belowlist(ps, e) => {
                write!(f, "belowlist(")?;
                write_list(f, ps)?;
                write!(f, ", {e})")
            }
            Abovelist(ps, e) => {
                write!(f, "abovelist(")?;
                write_list(f, ps)?;
                write!(f, ", {e})")
            }
            Prepost(e, pre, post) => {
                write!(f, "prepost({e}, ")?;
                write_list(f, pre)?;
                write!(f, ", ")?;
                write_list(f, post)?;
                write!(f, ")")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Str(String),
    LPar,
    RPar,
    LBrack,
    RBrack,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "`?{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(_) => write!(f, "string literal"),
            Tok::LPar => write!(f, "`(`"),
            Tok::RPar => write!(f, "`)`"),
            Tok::LBrack => write!(f, "`[`"),
            Tok::RBrack => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>, // token, line, col (1-based)
    pos: usize,
    end: (usize, usize),
}

fn lex(text: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    let err = |line, col, msg: String| Error::Parse { line, col, msg };
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                bump(&mut chars);
                continue;
            }
            '(' | ')' | '[' | ']' | ',' => {
                bump(&mut chars);
                let t = match c {
                    '(' => Tok::LPar,
                    ')' => Tok::RPar,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    _ => Tok::Comma,
                };
                toks.push((t, tl, tc));
            }
            '?' => {
                bump(&mut chars);
                let mut name = String::new();
                while matches!(chars.peek(), Some(c) if c.is_ascii_alphanumeric() || *c == '_') {
                    name.push(bump(&mut chars));
                }
                if name.is_empty() {
                    return Err(err(tl, tc, "expected a name after `?`".into()));
                }
                toks.push((Tok::Var(name), tl, tc));
            }
            '"' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match chars.peek() {
                        None => return Err(err(tl, tc, "unterminated string".into())),
                        Some('"') => {
                            bump(&mut chars);
                            break;
                        }
                        Some('\\') => {
                            bump(&mut chars);
                            match chars.peek() {
                                Some('"') | Some('\\') => s.push(bump(&mut chars)),
                                _ => return Err(err(tl, tc, "bad escape in string".into())),
                            }
                        }
                        Some(_) => s.push(bump(&mut chars)),
                    }
                }
                toks.push((Tok::Str(s), tl, tc));
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut s = String::new();
                s.push(bump(&mut chars));
                while matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
                    s.push(bump(&mut chars));
                }
                let n = s
                    .parse::<i64>()
                    .map_err(|_| err(tl, tc, format!("bad integer literal `{s}`")))?;
                toks.push((Tok::Int(n), tl, tc));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while matches!(chars.peek(), Some(c) if c.is_ascii_alphanumeric() || *c == '_') {
                    s.push(bump(&mut chars));
                }
                toks.push((Tok::Ident(s), tl, tc));
            }
            c => return Err(err(tl, tc, format!("unexpected character `{c}`"))),
        }
    }
    Ok(Lexer { toks, pos: 0, end: (line, col) })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|&(_, l, c)| (l, c)).unwrap_or(self.end)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse { line, col, msg: msg.into() }
    }

    fn next(&mut self, what: &str) -> Result<Tok> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| self.err(format!(
            "unexpected end of input, expected {what}"
        )))?;
        self.pos += 1;
        Ok(t.0)
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let got = self.next(&want.to_string())?;
        if got == want {
            Ok(())
        } else {
            self.pos -= 1;
            Err(self.err(format!("expected {want}, got {got}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.next(what)? {
            Tok::Ident(s) => Ok(s),
            got => {
                self.pos -= 1;
                Err(self.err(format!("expected {what}, got {got}")))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parser

pub fn parse_strategy(text: &str) -> Result<StrategyExpr> {
    let mut lx = lex(text)?;
    let e = parse_expr(&mut lx)?;
    if lx.peek().is_some() {
        return Err(lx.err("trailing input after strategy expression"));
    }
    Ok(e)
}

fn parse_lit(lx: &mut Lexer) -> Result<Lit> {
    match lx.next("a literal")? {
        Tok::Int(n) => Ok(Lit::Int(n)),
        Tok::Str(s) => Ok(Lit::Str(s)),
        Tok::Ident(s) if s == "true" => Ok(Lit::Bool(true)),
        Tok::Ident(s) if s == "false" => Ok(Lit::Bool(false)),
        Tok::Ident(s) if s == "unit" => Ok(Lit::Unit),
        got => {
            lx.pos -= 1;
            Err(lx.err(format!("expected a literal, got {got}")))
        }
    }
}

fn parse_vexpr(lx: &mut Lexer) -> Result<ValueExpr> {
    match lx.next("an environment expression")? {
        Tok::Ident(s) if s == "env" => Ok(ValueExpr::Env),
        Tok::Ident(s) if s == "add" => {
            lx.expect(Tok::LPar)?;
            let a = parse_vexpr(lx)?;
            lx.expect(Tok::Comma)?;
            let b = parse_vexpr(lx)?;
            lx.expect(Tok::RPar)?;
            Ok(ValueExpr::Add(Box::new(a), Box::new(b)))
        }
        got => {
            lx.pos -= 1;
            match got {
                Tok::Int(_) | Tok::Str(_) | Tok::Ident(_) => parse_lit(lx).map(ValueExpr::Lit),
                _ => Err(lx.err(format!("expected an environment expression, got {got}"))),
            }
        }
    }
}

fn parse_pred_list(lx: &mut Lexer) -> Result<Vec<StrategyExpr>> {
    lx.expect(Tok::LBrack)?;
    let mut ps = Vec::new();
    if lx.peek() == Some(&Tok::RBrack) {
        lx.pos += 1;
        return Ok(ps);
    }
    loop {
        ps.push(parse_expr(lx)?);
        match lx.next("`,` or `]`")? {
            Tok::Comma => continue,
            Tok::RBrack => return Ok(ps),
            got => {
                lx.pos -= 1;
                return Err(lx.err(format!("expected `,` or `]`, got {got}")));
            }
        }
    }
}

fn parse_expr(lx: &mut Lexer) -> Result<StrategyExpr> {
    use StrategyExpr::*;
    let head = match lx.next("a strategy expression")? {
        Tok::Var(x) => return Ok(Var(x)),
        Tok::Ident(s) => s,
        got => {
            lx.pos -= 1;
            return Err(lx.err(format!("expected a strategy expression, got {got}")));
        }
    };
    let unary = |lx: &mut Lexer, mk: fn(Box<StrategyExpr>) -> StrategyExpr| {
        lx.expect(Tok::LPar)?;
        let e = parse_expr(lx)?;
        lx.expect(Tok::RPar)?;
        Ok(mk(Box::new(e)))
    };
    let binary = |lx: &mut Lexer, mk: fn(Box<StrategyExpr>, Box<StrategyExpr>) -> StrategyExpr| {
        lx.expect(Tok::LPar)?;
        let a = parse_expr(lx)?;
        lx.expect(Tok::Comma)?;
        let b = parse_expr(lx)?;
        lx.expect(Tok::RPar)?;
        Ok(mk(Box::new(a), Box::new(b)))
    };
    let listed =
        |lx: &mut Lexer, mk: fn(Vec<StrategyExpr>, Box<StrategyExpr>) -> StrategyExpr| {
            lx.expect(Tok::LPar)?;
            let ps = parse_pred_list(lx)?;
            lx.expect(Tok::Comma)?;
            let e = parse_expr(lx)?;
            lx.expect(Tok::RPar)?;
            Ok(mk(ps, Box::new(e)))
        };
    let tdpe = |lx: &mut Lexer,
                mk: fn(Box<StrategyExpr>, ValueExpr, Lit) -> StrategyExpr| {
        lx.expect(Tok::LPar)?;
        let f = parse_expr(lx)?;
        lx.expect(Tok::Comma)?;
        let u = parse_vexpr(lx)?;
        lx.expect(Tok::Comma)?;
        let init = parse_lit(lx)?;
        lx.expect(Tok::RPar)?;
        Ok(mk(Box::new(f), u, init))
    };
    match head.as_str() {
        "id" => Ok(Id),
        "fail" => Ok(Fail),
        "skip" => Ok(Skip),
        "env" => Ok(Var("env".into())),
        "rule" => Ok(Rule(lx.ident("a rule name")?)),
        "const" => {
            lx.expect(Tok::LPar)?;
            let l = parse_lit(lx)?;
            lx.expect(Tok::RPar)?;
            Ok(Const(l))
        }
        "listof" => unary(lx, Listof),
        "adhoc" => {
            lx.expect(Tok::LPar)?;
            let base = parse_expr(lx)?;
            let mut names = Vec::new();
            loop {
                match lx.next("`,` or `)`")? {
                    Tok::RPar => break,
                    Tok::Comma => names.push(lx.ident("a rule name")?),
                    got => {
                        lx.pos -= 1;
                        return Err(lx.err(format!("expected `,` or `)`, got {got}")));
                    }
                }
            }
            if names.is_empty() {
                return Err(lx.err("`adhoc` needs at least one rule name"));
            }
            Ok(Adhoc(Box::new(base), names))
        }
        "seq" => binary(lx, Seq),
        "choice" => binary(lx, Choice),
        "pass" => {
            lx.expect(Tok::LPar)?;
            let a = parse_expr(lx)?;
            lx.expect(Tok::Comma)?;
            let x = match lx.next("a `?name` binder")? {
                Tok::Var(x) => x,
                got => {
                    lx.pos -= 1;
                    return Err(lx.err(format!("expected a `?name` binder, got {got}")));
                }
            };
            lx.expect(Tok::Comma)?;
            let b = parse_expr(lx)?;
            lx.expect(Tok::RPar)?;
            Ok(Pass(Box::new(a), x, Box::new(b)))
        }
        "all" => unary(lx, All),
        "one" => unary(lx, One),
        "full_td" => unary(lx, FullTd),
        "full_bu" => unary(lx, FullBu),
        "once_td" => unary(lx, OnceTd),
        "once_bu" => unary(lx, OnceBu),
        "stop_td" => unary(lx, StopTd),
        "stop_bu" => unary(lx, StopBu),
        "full_tdpe" => tdpe(lx, FullTdpe),
        "once_tdpe" => tdpe(lx, OnceTdpe),
        "beloweq" => binary(lx, Beloweq),
        "below" => binary(lx, Below),
        "aboveeq" => binary(lx, Aboveeq),
        "above" => binary(lx, Above),
        "belowlist" => listed(lx, Belowlist),
        "abovelist" => listed(lx, Abovelist),
        "prepost" => {
            lx.expect(Tok::LPar)?;
            let e = parse_expr(lx)?;
            lx.expect(Tok::Comma)?;
            let pre = parse_pred_list(lx)?;
            lx.expect(Tok::Comma)?;
            let post = parse_pred_list(lx)?;
            lx.expect(Tok::RPar)?;
            Ok(Prepost(Box::new(e), pre, post))
        }
        other => Err(lx.err(format!("unknown strategy form `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// Elaboration

type ValBinds = BTreeMap<String, Value>;

/// Everything elaboration needs; cloneable so deferred bodies (`pass`,
/// `*_tdpe`) can re-elaborate under new bindings at run time. All static
/// checking still happens up front: deferred bodies are elaborated once with
/// placeholder bindings during elaboration of the enclosing form.
#[derive(Clone)]
pub struct Elaborator {
    sig: Signature,
    rules: RuleBase,
    kind: EffectKind,
    monoid: Monoid<Value>,
}

fn mismatch(msg: impl Into<String>) -> Error {
    Error::FlavorMismatch(msg.into())
}

impl Elaborator {
    pub fn new(
        sig: Signature,
        rules: RuleBase,
        kind: EffectKind,
        monoid: Monoid<Value>,
    ) -> Elaborator {
        Elaborator { sig, rules, kind, monoid }
    }

    /// Elaborate a closed strategy expression at the requested flavor. All
    /// name resolution and flavor/effect checking happens here; the returned
    /// strategy cannot fail for static reasons.
    pub fn elaborate(&self, e: &StrategyExpr, flavor: &Flavor<Value>) -> Result<Strat<Value>> {
        self.elab(e, flavor, &ValBinds::new())
    }

    fn elab(
        &self,
        e: &StrategyExpr,
        flavor: &Flavor<Value>,
        binds: &ValBinds,
    ) -> Result<Strat<Value>> {
        use StrategyExpr::*;
        let kind = self.kind;
        match e {
            Id => match flavor {
                Flavor::Tp => Ok(Strat::Tp(id_tp(kind))),
                Flavor::Tu(_) => {
                    Err(mismatch("`id` is type-preserving; use `skip` in a type-unifying run"))
                }
            },
            Skip => Ok(schemes::skip(kind, flavor)),
            Fail => schemes::fail(kind, flavor),
            Var(x) => match flavor {
                Flavor::Tu(m) => {
                    let v = binds
                        .get(x)
                        .ok_or_else(|| Error::UnboundVariable(x.clone()))?
                        .clone();
                    Ok(Strat::Tu(const_tu(kind, v), m.clone()))
                }
                Flavor::Tp => Err(mismatch(format!(
                    "`?{x}` yields a value; it needs a type-unifying position"
                ))),
            },
            Const(l) => match flavor {
                Flavor::Tu(m) => Ok(Strat::Tu(const_tu(kind, l.to_value()), m.clone())),
                Flavor::Tp => {
                    Err(mismatch("`const` yields a value; it needs a type-unifying position"))
                }
            },
            Listof(inner) => match flavor {
                Flavor::Tu(m) => {
                    let tu = self.elab(inner, flavor, binds)?.as_tu()?.clone();
                    Ok(Strat::Tu(
                        TU::new(kind, move |t| {
                            tu.apply(t)?.try_map(|v| Ok(Value::List(vec![v])))
                        }),
                        m.clone(),
                    ))
                }
                Flavor::Tp => {
                    Err(mismatch("`listof` yields a value; it needs a type-unifying position"))
                }
            },
            Rule(name) => {
                // default adhoc base: identity for transforms, failure for
                // extract/predicate rules
                let def = self.rules.get(name)?;
                let base = match def.kind {
                    RuleKind::Transform => Strat::Tp(id_tp(kind)),
                    _ => match flavor {
                        Flavor::Tu(m) => Strat::Tu(fail_tu(kind)?, m.clone()),
                        Flavor::Tp => {
                            return Err(mismatch(format!(
                                "rule `{name}` yields a value; it needs a type-unifying position"
                            )))
                        }
                    },
                };
                self.wrap_adhoc(base, &[name.clone()], flavor)
            }
            Adhoc(base, names) => {
                let base = self.elab(base, flavor, binds)?;
                self.wrap_adhoc(base, names, flavor)
            }
            Seq(a, b) => {
                schemes::comb(&self.elab(a, flavor, binds)?, &self.elab(b, flavor, binds)?)
            }
            Choice(a, b) => {
                schemes::choice(&self.elab(a, flavor, binds)?, &self.elab(b, flavor, binds)?)
            }
            Pass(first, x, body) => {
                let first =
                    self.elab(first, &Flavor::Tu(self.monoid.clone()), binds)?.as_tu()?.clone();
                // surface static errors in the body now, with a placeholder
                let mut probe = binds.clone();
                probe.insert(x.clone(), Value::Unit);
                self.elab(body, flavor, &probe)?;
                let (me, body, x, outer) =
                    (self.clone(), (**body).clone(), x.clone(), binds.clone());
                match flavor {
                    Flavor::Tp => Ok(Strat::Tp(pass_tp(&first, move |v: &Value| {
                        let mut b = outer.clone();
                        b.insert(x.clone(), v.clone());
                        Ok(me.elab(&body, &Flavor::Tp, &b)?.as_tp()?.clone())
                    }))),
                    Flavor::Tu(m) => {
                        let fl = Flavor::Tu(m.clone());
                        Ok(Strat::Tu(
                            pass_tu(&first, move |v: &Value| {
                                let mut b = outer.clone();
                                b.insert(x.clone(), v.clone());
                                Ok(me.elab(&body, &fl, &b)?.as_tu()?.clone())
                            }),
                            m.clone(),
                        ))
                    }
                }
            }
            All(e) => Ok(schemes::all(&self.elab(e, flavor, binds)?)),
            One(e) => schemes::one(&self.elab(e, flavor, binds)?),
            FullTd(e) => Ok(schemes::full_td(&self.elab(e, flavor, binds)?)),
            FullBu(e) => Ok(schemes::full_bu(&self.elab(e, flavor, binds)?)),
            OnceTd(e) => schemes::once_td(&self.elab(e, flavor, binds)?),
            OnceBu(e) => schemes::once_bu(&self.elab(e, flavor, binds)?),
            StopTd(e) => schemes::stop_td(&self.elab(e, flavor, binds)?),
            StopBu(e) => schemes::stop_bu(&self.elab(e, flavor, binds)?),
            FullTdpe(f, u, init) => {
                let (fs, us) = self.tdpe_parts(f, u, flavor, binds)?;
                Ok(schemes::full_tdpe(kind, flavor.clone(), fs, us, init.to_value()))
            }
            OnceTdpe(f, u, init) => {
                let (fs, us) = self.tdpe_parts(f, u, flavor, binds)?;
                schemes::once_tdpe(kind, flavor.clone(), fs, us, init.to_value())
            }
            Beloweq(p, f) => {
                schemes::beloweq(&self.elab_pred(p, binds)?, &self.elab(f, flavor, binds)?)
            }
            Below(p, f) => {
                schemes::below(&self.elab_pred(p, binds)?, &self.elab(f, flavor, binds)?)
            }
            Aboveeq(p, f) => {
                schemes::aboveeq(&self.elab_pred(p, binds)?, &self.elab(f, flavor, binds)?)
            }
            Above(p, f) => {
                schemes::above(&self.elab_pred(p, binds)?, &self.elab(f, flavor, binds)?)
            }
            Belowlist(ps, f) => schemes::belowlist(
                &self.elab_preds(ps, binds)?,
                &self.elab(f, flavor, binds)?,
            ),
            Abovelist(ps, f) => schemes::abovelist(
                &self.elab_preds(ps, binds)?,
                &self.elab(f, flavor, binds)?,
            ),
            Prepost(f, pre, post) => schemes::prepost(
                &self.elab(f, flavor, binds)?,
                &self.elab_preds(pre, binds)?,
                &self.elab_preds(post, binds)?,
            ),
        }
    }

    /// Wrap a base strategy with one adhoc layer per mentioned sort; rules
    /// sharing a sort are combined with choice, in mention order.
    fn wrap_adhoc(
        &self,
        base: Strat<Value>,
        names: &[String],
        flavor: &Flavor<Value>,
    ) -> Result<Strat<Value>> {
        let mut groups: Vec<(SortName, Vec<RuleDef>)> = Vec::new();
        for name in names {
            let def = self.rules.get(name)?.clone();
            match (def.kind, flavor) {
                (RuleKind::Transform, Flavor::Tp) => {}
                (RuleKind::Extract | RuleKind::Predicate, Flavor::Tu(_)) => {}
                (RuleKind::Transform, Flavor::Tu(_)) => {
                    return Err(mismatch(format!(
                        "transform rule `{name}` used in a type-unifying position"
                    )))
                }
                (_, Flavor::Tp) => {
                    return Err(mismatch(format!(
                        "rule `{name}` yields a value; it needs a type-unifying position"
                    )))
                }
            }
            match groups.iter_mut().find(|(s, _)| s == &def.sort) {
                Some((_, g)) => g.push(def),
                None => groups.push((def.sort.clone(), vec![def])),
            }
        }
        let mut acc = base;
        for (_, defs) in groups {
            acc = match &acc {
                Strat::Tp(tp) => Strat::Tp(crate::strategy::adhoc_tp(
                    tp,
                    &compile_tp_group(defs, &self.sig, self.kind)?,
                )?),
                Strat::Tu(tu, m) => Strat::Tu(
                    crate::strategy::adhoc_tu(
                        tu,
                        &compile_tu_group(defs, &self.sig, self.kind)?,
                    )?,
                    m.clone(),
                ),
            };
        }
        Ok(acc)
    }

    /// Predicate positions: type-unifying over a trivial monoid, with rule
    /// names restricted to predicate rules; the carried values are dropped.
    fn elab_pred(&self, e: &StrategyExpr, binds: &ValBinds) -> Result<Predicate> {
        check_pred_rules(e, &self.rules)?;
        let m = Monoid::new("unit", Value::Unit, |_: &Value, _: &Value| Ok(Value::Unit));
        let tu = self.elab(e, &Flavor::Tu(m), binds)?.as_tu()?.clone();
        Ok(TU::new(self.kind, move |t| tu.apply(t)?.try_map(|_| Ok(()))))
    }

    fn elab_preds(&self, ps: &[StrategyExpr], binds: &ValBinds) -> Result<Vec<Predicate>> {
        ps.iter().map(|p| self.elab_pred(p, binds)).collect()
    }

    fn tdpe_parts(
        &self,
        f: &StrategyExpr,
        u: &ValueExpr,
        flavor: &Flavor<Value>,
        binds: &ValBinds,
    ) -> Result<(schemes::EnvStrategy<Value, Value>, schemes::EnvUpdate<Value>)> {
        // surface static errors in the body now, with a placeholder env
        let mut probe = binds.clone();
        probe.insert("env".into(), Value::Unit);
        self.elab(f, flavor, &probe)?;
        let (me, f, fl, outer) = (self.clone(), f.clone(), flavor.clone(), binds.clone());
        let fs: schemes::EnvStrategy<Value, Value> = Arc::new(move |e: &Value| {
            let mut b = outer.clone();
            b.insert("env".into(), e.clone());
            me.elab(&f, &fl, &b)
        });
        let (u, kind) = (u.clone(), self.kind);
        let us: schemes::EnvUpdate<Value> =
            Arc::new(move |e, _t| Ok(Eff::pure(kind, eval_vexpr(&u, e)?)));
        Ok((fs, us))
    }
}

/// Predicate positions only admit predicate rules.
fn check_pred_rules(e: &StrategyExpr, rules: &RuleBase) -> Result<()> {
    use StrategyExpr::*;
    let check_name = |name: &String| -> Result<()> {
        if rules.get(name)?.kind != RuleKind::Predicate {
            return Err(mismatch(format!(
                "rule `{name}` is not a predicate but is used in a predicate position"
            )));
        }
        Ok(())
    };
    match e {
        Rule(n) => check_name(n),
        Adhoc(base, names) => {
            check_pred_rules(base, rules)?;
            names.iter().try_for_each(check_name)
        }
        Listof(a) | All(a) | One(a) | FullTd(a) | FullBu(a) | OnceTd(a) | OnceBu(a)
        | StopTd(a) | StopBu(a) | FullTdpe(a, _, _) | OnceTdpe(a, _, _) => {
            check_pred_rules(a, rules)
        }
        Seq(a, b) | Choice(a, b) | Pass(a, _, b) | Beloweq(a, b) | Below(a, b)
        | Aboveeq(a, b) | Above(a, b) => {
            check_pred_rules(a, rules)?;
            check_pred_rules(b, rules)
        }
        Belowlist(ps, f) | Abovelist(ps, f) => {
            ps.iter().try_for_each(|p| check_pred_rules(p, rules))?;
            check_pred_rules(f, rules)
        }
        Prepost(f, pre, post) => {
            check_pred_rules(f, rules)?;
            pre.iter().try_for_each(|p| check_pred_rules(p, rules))?;
            post.iter().try_for_each(|p| check_pred_rules(p, rules))
        }
        Id | Fail | Skip | Var(_) | Const(_) => Ok(()),
    }
}

fn eval_vexpr(u: &ValueExpr, env: &Value) -> Result<Value> {
    match u {
        ValueExpr::Env => Ok(env.clone()),
        ValueExpr::Lit(l) => Ok(l.to_value()),
        ValueExpr::Add(a, b) => {
            match (eval_vexpr(a, env)?, eval_vexpr(b, env)?) {
                (Value::Int(x), Value::Int(y)) => Ok(Value::Int(x + y)),
                (x, y) => Err(Error::TemplateType(format!(
                    "add expects Int operands, got {x} and {y}"
                ))),
            }
        }
    }
}
