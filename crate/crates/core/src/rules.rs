//! Pattern -> template rewrite rules and predicates, compiled into the
//! monomorphic updates consumed by `adhoc`.
//!
//! Rules file format (s-expressions):
//!
//! ```text
//! (rule NAME SORT (lhs PATTERN) (rhs TEMPLATE) [ (guard EXPR) ] (kind transform|extract|predicate))
//! ```
//!
//! Patterns are constructor applications, variables `?name` (linear),
//! wildcard `_`, or primitive literals. Templates add the primitive
//! operations `neg`, `+`, `-`, `=`, `<`.

use std::collections::BTreeMap;

use crate::effects::{Eff, EffectKind};
use crate::error::{Error, Result};
use crate::sexpr::{self, Sexpr};
use crate::signature::{Signature, SortName};
use crate::strategy::{MonoTp, MonoTu};
use crate::term::{Prim, Term, TermNode};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    App { con: String, args: Vec<Pattern> },
    Var(String),
    Wildcard,
    Lit(Prim),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Template {
    App { con: String, args: Vec<Template> },
    Var(String),
    Lit(Prim),
    Neg(Box<Template>),
    Add(Box<Template>, Box<Template>),
    Sub(Box<Template>, Box<Template>),
    Eq(Box<Template>, Box<Template>),
    Lt(Box<Template>, Box<Template>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Transform,
    Extract,
    Predicate,
}

#[derive(Debug, Clone)]
pub struct RuleDef {
    pub name: String,
    pub sort: SortName,
    pub lhs: Pattern,
    pub rhs: Template,
    pub guard: Option<Template>,
    pub kind: RuleKind,
}

pub type Bindings = BTreeMap<String, Term>;

/// Most-general match of a linear pattern against a term.
pub fn match_pattern(p: &Pattern, t: &Term) -> Option<Bindings> {
    let mut b = Bindings::new();
    if match_into(p, t, &mut b) {
        Some(b)
    } else {
        None
    }
}

fn match_into(p: &Pattern, t: &Term, b: &mut Bindings) -> bool {
    match p {
        Pattern::Wildcard => true,
        Pattern::Var(name) => {
            b.insert(name.clone(), t.clone());
            true
        }
        Pattern::Lit(want) => t.prim_value() == Some(want),
        Pattern::App { con, args } => match t.node() {
            TermNode::App { con: tc, children } if tc == con && children.len() == args.len() => {
                args.iter().zip(children).all(|(p, c)| match_into(p, c, b))
            }
            _ => false,
        },
    }
}

/// Instantiate a template under bindings; constructor applications go through
/// the checked construction path, primitive operations are evaluated.
pub fn instantiate(tmpl: &Template, b: &Bindings, sig: &Signature) -> Result<Term> {
    match tmpl {
        Template::Var(name) => {
            b.get(name).cloned().ok_or_else(|| Error::UnboundVariable(name.clone()))
        }
        Template::Lit(p) => Ok(Term::prim(p.clone())),
        Template::App { con, args } => {
            let children =
                args.iter().map(|a| instantiate(a, b, sig)).collect::<Result<Vec<_>>>()?;
            Term::app(sig, con, children)
        }
        Template::Neg(x) => Ok(Term::bool(!eval_bool(x, b, sig)?)),
        Template::Add(x, y) => Ok(Term::int(eval_int(x, b, sig)? + eval_int(y, b, sig)?)),
        Template::Sub(x, y) => Ok(Term::int(eval_int(x, b, sig)? - eval_int(y, b, sig)?)),
        Template::Eq(x, y) => Ok(Term::bool(instantiate(x, b, sig)? == instantiate(y, b, sig)?)),
        Template::Lt(x, y) => Ok(Term::bool(eval_int(x, b, sig)? < eval_int(y, b, sig)?)),
    }
}

fn eval_int(tmpl: &Template, b: &Bindings, sig: &Signature) -> Result<i64> {
    match instantiate(tmpl, b, sig)?.prim_value() {
        Some(Prim::Int(n)) => Ok(*n),
        other => Err(Error::TemplateType(format!("expected Int, got {other:?}"))),
    }
}

fn eval_bool(tmpl: &Template, b: &Bindings, sig: &Signature) -> Result<bool> {
    match instantiate(tmpl, b, sig)?.prim_value() {
        Some(Prim::Bool(v)) => Ok(*v),
        other => Err(Error::TemplateType(format!("expected Bool, got {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Loading and validation

fn invalid(rule: &str, msg: impl Into<String>) -> Error {
    Error::InvalidRule { rule: rule.to_string(), msg: msg.into() }
}

fn prim_of_atom(text: &str) -> Option<Prim> {
    match text {
        "true" => Some(Prim::Bool(true)),
        "false" => Some(Prim::Bool(false)),
        "unit" => Some(Prim::Unit),
        _ => text.parse::<i64>().ok().map(Prim::Int),
    }
}

fn parse_pattern(
    e: &Sexpr,
    want: &SortName,
    sig: &Signature,
    vars: &mut BTreeMap<String, SortName>,
) -> Result<Pattern> {
    match e {
        Sexpr::Str { text, .. } => {
            if want != &SortName::str() {
                return Err(e.err(format!("string literal where sort `{want}` is expected")));
            }
            Ok(Pattern::Lit(Prim::Str(text.clone())))
        }
        Sexpr::Atom { text, .. } => {
            if text == "_" {
                return Ok(Pattern::Wildcard);
            }
            if let Some(name) = text.strip_prefix('?') {
                if vars.insert(name.to_string(), want.clone()).is_some() {
                    return Err(e.err(format!("non-linear pattern: `?{name}` occurs twice")));
                }
                return Ok(Pattern::Var(name.to_string()));
            }
            match prim_of_atom(text) {
                Some(p) if &p.sort() == want => Ok(Pattern::Lit(p)),
                Some(p) => {
                    Err(e.err(format!("literal of sort `{}` where `{want}` is expected", p.sort())))
                }
                None => Err(e.err(format!("expected a pattern, got `{text}`"))),
            }
        }
        Sexpr::List { items, .. } => {
            let con = items
                .first()
                .and_then(Sexpr::atom)
                .ok_or_else(|| e.err("expected `(Con pattern ...)`"))?;
            let decl = sig.constructor_lookup(con)?;
            if &decl.result != want {
                return Err(e.err(format!(
                    "constructor `{con}` builds sort `{}`, expected `{want}`",
                    decl.result
                )));
            }
            if items.len() - 1 != decl.args.len() {
                return Err(e.err(format!(
                    "constructor `{con}` expects {} arguments, got {}",
                    decl.args.len(),
                    items.len() - 1
                )));
            }
            let mut args = Vec::with_capacity(decl.args.len());
            for (sub, arg_sort) in items[1..].iter().zip(&decl.args) {
                args.push(parse_pattern(sub, arg_sort, sig, vars)?);
            }
            Ok(Pattern::App { con: con.to_string(), args })
        }
    }
}

fn parse_template(e: &Sexpr, sig: &Signature) -> Result<Template> {
    match e {
        Sexpr::Str { text, .. } => Ok(Template::Lit(Prim::Str(text.clone()))),
        Sexpr::Atom { text, .. } => {
            if let Some(name) = text.strip_prefix('?') {
                return Ok(Template::Var(name.to_string()));
            }
            prim_of_atom(text)
                .map(Template::Lit)
                .ok_or_else(|| e.err(format!("expected a template, got `{text}`")))
        }
        Sexpr::List { items, .. } => {
            let head = items
                .first()
                .and_then(Sexpr::atom)
                .ok_or_else(|| e.err("expected `(op ...)` or `(Con ...)`"))?;
            let sub = |i: usize| parse_template(&items[i], sig);
            let binary = |mk: fn(Box<Template>, Box<Template>) -> Template| {
                if items.len() != 3 {
                    Err(e.err(format!("`{head}` takes two operands")))
                } else {
                    Ok(mk(Box::new(sub(1)?), Box::new(sub(2)?)))
                }
            };
            match head {
                "neg" => {
                    if items.len() != 2 {
                        return Err(e.err("`neg` takes one operand"));
                    }
                    Ok(Template::Neg(Box::new(sub(1)?)))
                }
                "+" => binary(Template::Add),
                "-" => binary(Template::Sub),
                "=" => binary(Template::Eq),
                "<" => binary(Template::Lt),
                _ => {
                    let args =
                        items[1..].iter().map(|a| parse_template(a, sig)).collect::<Result<_>>()?;
                    Ok(Template::App { con: head.to_string(), args })
                }
            }
        }
    }
}

/// Static sort of a template under the pattern's variable sorts.
fn template_sort(
    tmpl: &Template,
    vars: &BTreeMap<String, SortName>,
    sig: &Signature,
) -> Result<SortName> {
    match tmpl {
        Template::Var(name) => {
            vars.get(name).cloned().ok_or_else(|| Error::UnboundVariable(name.clone()))
        }
        Template::Lit(p) => Ok(p.sort()),
        Template::App { con, args } => {
            let decl = sig.constructor_lookup(con)?;
            if decl.args.len() != args.len() {
                return Err(Error::ArityMismatch {
                    path: vec![],
                    con: con.clone(),
                    expected: decl.args.len(),
                    got: args.len(),
                });
            }
            for (a, want) in args.iter().zip(&decl.args) {
                let got = template_sort(a, vars, sig)?;
                if &got != want {
                    return Err(Error::SortMismatch {
                        path: vec![],
                        expected: want.to_string(),
                        got: got.to_string(),
                    });
                }
            }
            Ok(decl.result.clone())
        }
        Template::Neg(x) => {
            expect_sort(x, SortName::bool(), vars, sig)?;
            Ok(SortName::bool())
        }
        Template::Add(x, y) | Template::Sub(x, y) => {
            expect_sort(x, SortName::int(), vars, sig)?;
            expect_sort(y, SortName::int(), vars, sig)?;
            Ok(SortName::int())
        }
        Template::Eq(x, y) => {
            let lx = template_sort(x, vars, sig)?;
            expect_sort(y, lx, vars, sig)?;
            Ok(SortName::bool())
        }
        Template::Lt(x, y) => {
            expect_sort(x, SortName::int(), vars, sig)?;
            expect_sort(y, SortName::int(), vars, sig)?;
            Ok(SortName::bool())
        }
    }
}

fn expect_sort(
    tmpl: &Template,
    want: SortName,
    vars: &BTreeMap<String, SortName>,
    sig: &Signature,
) -> Result<()> {
    let got = template_sort(tmpl, vars, sig)?;
    if got == want {
        Ok(())
    } else {
        Err(Error::SortMismatch {
            path: vec![],
            expected: want.to_string(),
            got: got.to_string(),
        })
    }
}

fn parse_rule(form: &Sexpr, sig: &Signature) -> Result<RuleDef> {
    let items = form.items().ok_or_else(|| form.err("expected `(rule ...)`"))?;
    if items.first().and_then(Sexpr::atom) != Some("rule") || items.len() < 5 {
        return Err(form.err(
            "expected `(rule NAME SORT (lhs P) (rhs T) [(guard E)] (kind K))`",
        ));
    }
    let name =
        items[1].atom().ok_or_else(|| items[1].err("expected rule name"))?.to_string();
    let sort = SortName::new(items[2].atom().ok_or_else(|| items[2].err("expected sort"))?)?;
    if !sort.is_builtin() && !sig.has_sort(&sort) {
        return Err(Error::UndeclaredSort(sort.to_string()));
    }

    let mut lhs = None;
    let mut rhs = None;
    let mut guard = None;
    let mut kind = None;
    for part in &items[3..] {
        let sub = part.items().ok_or_else(|| part.err("expected `(lhs ...)` etc."))?;
        match sub.first().and_then(Sexpr::atom) {
            Some("lhs") if sub.len() == 2 => lhs = Some(&sub[1]),
            Some("rhs") if sub.len() == 2 => rhs = Some(&sub[1]),
            Some("guard") if sub.len() == 2 => guard = Some(&sub[1]),
            Some("kind") if sub.len() == 2 => kind = sub[1].atom(),
            _ => return Err(part.err("expected `(lhs P)`, `(rhs T)`, `(guard E)` or `(kind K)`")),
        }
    }
    let lhs = lhs.ok_or_else(|| invalid(&name, "missing (lhs ...)"))?;
    let rhs = rhs.ok_or_else(|| invalid(&name, "missing (rhs ...)"))?;
    let kind = match kind.ok_or_else(|| invalid(&name, "missing (kind ...)"))? {
        "transform" => RuleKind::Transform,
        "extract" => RuleKind::Extract,
        "predicate" => RuleKind::Predicate,
        other => return Err(invalid(&name, format!("unknown kind `{other}`"))),
    };

    let mut var_sorts = BTreeMap::new();
    let lhs = parse_pattern(lhs, &sort, sig, &mut var_sorts)?;
    let rhs = parse_template(rhs, sig)?;
    let guard = guard.map(|g| parse_template(g, sig)).transpose()?;

    // static validation of the right-hand side and guard
    let rhs_sort = template_sort(&rhs, &var_sorts, sig)
        .map_err(|e| invalid(&name, format!("invalid rhs: {e}")))?;
    match kind {
        RuleKind::Transform => {
            if rhs_sort != sort {
                return Err(invalid(
                    &name,
                    format!("transform rhs has sort `{rhs_sort}`, expected `{sort}`"),
                ));
            }
        }
        RuleKind::Extract => {
            if !rhs_sort.is_builtin() {
                return Err(invalid(
                    &name,
                    format!("extract rhs must be a primitive value, got sort `{rhs_sort}`"),
                ));
            }
        }
        RuleKind::Predicate => {
            if rhs_sort != SortName::bool() {
                return Err(invalid(
                    &name,
                    format!("predicate rhs must be Bool, got `{rhs_sort}`"),
                ));
            }
        }
    }
    if let Some(g) = &guard {
        expect_sort(g, SortName::bool(), &var_sorts, sig)
            .map_err(|e| invalid(&name, format!("invalid guard: {e}")))?;
    }

    Ok(RuleDef { name, sort, lhs, rhs, guard, kind })
}

/// A validated collection of named rules over one signature.
#[derive(Debug, Clone, Default)]
pub struct RuleBase {
    rules: BTreeMap<String, RuleDef>,
}

impl RuleBase {
    pub fn load(text: &str, sig: &Signature) -> Result<RuleBase> {
        let mut base = RuleBase::default();
        base.extend(text, sig)?;
        Ok(base)
    }

    /// Add the rules of another file; names must stay unique.
    pub fn extend(&mut self, text: &str, sig: &Signature) -> Result<()> {
        for form in sexpr::parse_many(text)? {
            let rule = parse_rule(&form, sig)?;
            if self.rules.contains_key(&rule.name) {
                return Err(invalid(&rule.name, "duplicate rule name"));
            }
            self.rules.insert(rule.name.clone(), rule);
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&RuleDef> {
        self.rules.get(name).ok_or_else(|| Error::UnknownRule(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &RuleDef> {
        self.rules.values()
    }
}

/// A rule compiled to a monomorphic update for its sort tag.
#[derive(Clone)]
pub enum CompiledRule {
    Tp(MonoTp),
    Tu(MonoTu<Value>),
}

impl RuleDef {
    /// On a matching term of the rule's sort: transform rewrites, extract
    /// yields the value, predicate yields unit iff the condition holds. A
    /// non-matching term of the right sort is an effect failure, so a
    /// surrounding `adhoc` default does not fire for same-sort non-matches.
    pub fn compile(&self, sig: &Signature, kind: EffectKind) -> Result<CompiledRule> {
        match self.kind {
            RuleKind::Transform => {
                Ok(CompiledRule::Tp(compile_tp_group(vec![self.clone()], sig, kind)?))
            }
            _ => Ok(CompiledRule::Tu(compile_tu_group(vec![self.clone()], sig, kind)?)),
        }
    }

    /// Like `fire`, but post-processed per rule kind into a `Value`: extract
    /// yields the instantiated value, predicate yields unit iff true.
    fn fire_tu(&self, sig: &Signature, t: &Term) -> Result<Option<Value>> {
        let out = match self.fire(sig, t)? {
            Some(out) => out,
            None => return Ok(None),
        };
        match self.kind {
            RuleKind::Transform => Err(Error::FlavorMismatch(format!(
                "transform rule `{}` used in a type-unifying position",
                self.name
            ))),
            RuleKind::Extract => Ok(Some(match out.prim_value() {
                Some(p) => Value::from_prim(p),
                None => Value::Term(out),
            })),
            RuleKind::Predicate => {
                if out.prim_value() == Some(&Prim::Bool(true)) {
                    Ok(Some(Value::Unit))
                } else {
                    Ok(None)
                }
            }
        }
    }

    /// Match, check the guard, instantiate. `None` is match/guard failure.
    fn fire(&self, sig: &Signature, t: &Term) -> Result<Option<Term>> {
        let bindings = match match_pattern(&self.lhs, t) {
            Some(b) => b,
            None => return Ok(None),
        };
        if let Some(g) = &self.guard {
            if !eval_bool(g, &bindings, sig)? {
                return Ok(None);
            }
        }
        instantiate(&self.rhs, &bindings, sig).map(Some)
    }
}

fn check_group(defs: &[RuleDef], kind: EffectKind) -> Result<SortName> {
    let tag = defs.first().expect("non-empty rule group").sort.clone();
    debug_assert!(defs.iter().all(|d| d.sort == tag));
    // more than one rule on a sort means choice, which needs a zero
    if defs.len() > 1 && !kind.supports_zero() {
        return Err(Error::UnsupportedEffect);
    }
    Ok(tag)
}

/// Combine transform rules on one sort into a single monomorphic update with
/// left-biased choice; under Nondet every matching rule contributes an
/// alternative, in rule order.
pub fn compile_tp_group(defs: Vec<RuleDef>, sig: &Signature, kind: EffectKind) -> Result<MonoTp> {
    let tag = check_group(&defs, kind)?;
    let sig = sig.clone();
    Ok(MonoTp::new(tag, kind, move |t| {
        if kind == EffectKind::Nondet {
            let mut outs = Vec::new();
            for d in &defs {
                outs.extend(d.fire(&sig, t)?);
            }
            return Ok(Eff::Nondet(outs));
        }
        for d in &defs {
            if let Some(out) = d.fire(&sig, t)? {
                return Ok(Eff::pure(kind, out));
            }
        }
        Eff::zero(kind)
    }))
}

/// Combine extract/predicate rules on one sort, as `compile_tp_group`.
pub fn compile_tu_group(
    defs: Vec<RuleDef>,
    sig: &Signature,
    kind: EffectKind,
) -> Result<MonoTu<Value>> {
    let tag = check_group(&defs, kind)?;
    let sig = sig.clone();
    Ok(MonoTu::new(tag, kind, move |t| {
        if kind == EffectKind::Nondet {
            let mut outs = Vec::new();
            for d in &defs {
                outs.extend(d.fire_tu(&sig, t)?);
            }
            return Ok(Eff::Nondet(outs));
        }
        for d in &defs {
            if let Some(out) = d.fire_tu(&sig, t)? {
                return Ok(Eff::pure(kind, out));
            }
        }
        Eff::zero(kind)
    }))
}
