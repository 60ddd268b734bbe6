//! Universal, immutable term representation. Primitive values are leaf terms
//! with builtin sorts, so strategies traverse into them uniformly.
//!
//! Term s-expression format: `(ConName child ...)`, integer literals,
//! `true`/`false`, double-quoted strings with `\"` and `\\` escapes, `unit`.
//! Canonical printing uses single spaces and no trailing whitespace.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sexpr::{self, Sexpr};
use crate::signature::{Signature, SortName};

/// Nominal type tag of a term node.
pub type TypeTag = SortName;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prim {
    Int(i64),
    Bool(bool),
    Str(String),
    Unit,
}

impl Prim {
    pub fn sort(&self) -> SortName {
        match self {
            Prim::Int(_) => SortName::int(),
            Prim::Bool(_) => SortName::bool(),
            Prim::Str(_) => SortName::str(),
            Prim::Unit => SortName::unit(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermNode {
    Prim(Prim),
    App { con: String, children: Vec<Term> },
}

#[derive(Debug, PartialEq, Eq)]
struct TermData {
    sort: SortName,
    node: TermNode,
}

/// Immutable tree value; cheap to clone and share. Each node caches its sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term(Arc<TermData>);

impl Term {
    pub fn prim(p: Prim) -> Term {
        let sort = p.sort();
        Term(Arc::new(TermData { sort, node: TermNode::Prim(p) }))
    }

    pub fn int(n: i64) -> Term {
        Term::prim(Prim::Int(n))
    }
    pub fn bool(b: bool) -> Term {
        Term::prim(Prim::Bool(b))
    }
    pub fn str(s: impl Into<String>) -> Term {
        Term::prim(Prim::Str(s.into()))
    }
    pub fn unit() -> Term {
        Term::prim(Prim::Unit)
    }

    /// Sort-safe construction: verifies arity and child sorts against the
    /// signature before the node exists for callers.
    pub fn app(sig: &Signature, con: &str, children: Vec<Term>) -> Result<Term> {
        let decl = sig.constructor_lookup(con)?;
        if decl.args.len() != children.len() {
            return Err(Error::ArityMismatch {
                path: vec![],
                con: con.to_string(),
                expected: decl.args.len(),
                got: children.len(),
            });
        }
        for (i, (child, want)) in children.iter().zip(&decl.args).enumerate() {
            if child.sort() != want {
                return Err(Error::SortMismatch {
                    path: vec![i],
                    expected: want.to_string(),
                    got: child.sort().to_string(),
                });
            }
        }
        Ok(Term::unchecked_app(con, decl.result.clone(), children))
    }

    /// Construction without validation. The result may be ill-sorted; it is
    /// meant for exercising `check_term` and for internal callers that have
    /// already validated.
    pub fn unchecked_app(con: &str, sort: SortName, children: Vec<Term>) -> Term {
        Term(Arc::new(TermData { sort, node: TermNode::App { con: con.to_string(), children } }))
    }

    pub fn node(&self) -> &TermNode {
        &self.0.node
    }

    pub fn sort(&self) -> &SortName {
        &self.0.sort
    }

    /// The runtime type tag of the term; alias of [`Term::sort`].
    pub fn sort_of(&self) -> &TypeTag {
        self.sort()
    }

    pub fn prim_value(&self) -> Option<&Prim> {
        match self.node() {
            TermNode::Prim(p) => Some(p),
            TermNode::App { .. } => None,
        }
    }

    pub fn constructor(&self) -> Option<&str> {
        match self.node() {
            TermNode::App { con, .. } => Some(con),
            TermNode::Prim(_) => None,
        }
    }

    /// Declared-order children; empty for primitives and nullary applications.
    pub fn children(&self) -> &[Term] {
        match self.node() {
            TermNode::Prim(_) => &[],
            TermNode::App { children, .. } => children,
        }
    }

    /// New node with the same constructor and the given children. Arity and
    /// child sorts are checked against the original children, which is
    /// equivalent to the declared argument sorts for a well-sorted subject.
    /// This is the gate through which a type-incorrect strategy result is
    /// caught.
    pub fn rebuild(&self, kids: Vec<Term>) -> Result<Term> {
        match self.node() {
            TermNode::Prim(_) => {
                if kids.is_empty() {
                    Ok(self.clone())
                } else {
                    Err(Error::ArityMismatch {
                        path: vec![],
                        con: format!("{self}"),
                        expected: 0,
                        got: kids.len(),
                    })
                }
            }
            TermNode::App { con, children } => {
                if kids.len() != children.len() {
                    return Err(Error::ArityMismatch {
                        path: vec![],
                        con: con.clone(),
                        expected: children.len(),
                        got: kids.len(),
                    });
                }
                for (i, (new, old)) in kids.iter().zip(children).enumerate() {
                    if new.sort() != old.sort() {
                        return Err(Error::SortMismatch {
                            path: vec![i],
                            expected: old.sort().to_string(),
                            got: new.sort().to_string(),
                        });
                    }
                }
                Ok(Term::unchecked_app(con, self.sort().clone(), kids))
            }
        }
    }

    /// Number of nodes in the whole tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Term::size).sum::<usize>()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            TermNode::Prim(Prim::Int(n)) => write!(f, "{n}"),
            TermNode::Prim(Prim::Bool(b)) => write!(f, "{b}"),
            TermNode::Prim(Prim::Unit) => write!(f, "unit"),
            TermNode::Prim(Prim::Str(s)) => {
                write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
            }
            TermNode::App { con, children } => {
                write!(f, "({con}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Canonical s-expression rendering; `parse_term(print_term(t), sig) == t`.
pub fn print_term(t: &Term) -> String {
    t.to_string()
}

/// Parse a term and verify it is well-sorted against `sig`.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term> {
    let e = sexpr::parse_one(text)?;
    term_of_sexpr(&e, sig)
}

fn term_of_sexpr(e: &Sexpr, sig: &Signature) -> Result<Term> {
    match e {
        Sexpr::Str { text, .. } => Ok(Term::str(text.clone())),
        Sexpr::Atom { text, .. } => match text.as_str() {
            "true" => Ok(Term::bool(true)),
            "false" => Ok(Term::bool(false)),
            "unit" => Ok(Term::unit()),
            _ => {
                if let Ok(n) = text.parse::<i64>() {
                    Ok(Term::int(n))
                } else {
                    Err(e.err(format!("expected a literal, got `{text}`")))
                }
            }
        },
        Sexpr::List { items, .. } => {
            let head = items
                .first()
                .and_then(Sexpr::atom)
                .ok_or_else(|| e.err("expected `(ConName child ...)`"))?;
            let mut children = Vec::with_capacity(items.len() - 1);
            for item in &items[1..] {
                children.push(term_of_sexpr(item, sig)?);
            }
            Term::app(sig, head, children)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::load_signature;

    fn sig() -> Signature {
        load_signature("(sort Expr) (con Lit Expr (Int)) (con Add Expr (Expr Expr))").unwrap()
    }

    #[test]
    fn parses_and_prints() {
        let sig = sig();
        let t = parse_term("(Add (Lit 1) (Lit 2))", &sig).unwrap();
        assert_eq!(print_term(&t), "(Add (Lit 1) (Lit 2))");
        assert_eq!(t.constructor(), Some("Add"));
        assert_eq!(t.children().len(), 2);
        assert_eq!(print_term(&Term::unit()), "unit");
        assert_eq!(print_term(&Term::prim(Prim::Int(1))), "1");
    }

    #[test]
    fn parse_rejects_ill_sorted() {
        let sig = sig();
        match parse_term("(Lit true)", &sig).unwrap_err() {
            Error::SortMismatch { expected, got, .. } => {
                assert_eq!(expected, "Int");
                assert_eq!(got, "Bool");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn children_of_leaves() {
        let sig = sig();
        let t = parse_term("(Lit 7)", &sig).unwrap();
        assert_eq!(t.children().len(), 1);
        assert_eq!(t.children()[0], Term::int(7));
        assert!(Term::bool(true).children().is_empty());
    }

    #[test]
    fn rebuild_checks_arity_and_sorts() {
        let sig = sig();
        let t = parse_term("(Add (Lit 1) (Lit 2))", &sig).unwrap();
        let l3 = parse_term("(Lit 3)", &sig).unwrap();
        let l4 = parse_term("(Lit 4)", &sig).unwrap();
        let r = t.rebuild(vec![l3.clone(), l4]).unwrap();
        assert_eq!(print_term(&r), "(Add (Lit 3) (Lit 4))");
        assert!(matches!(t.rebuild(vec![l3.clone()]), Err(Error::ArityMismatch { .. })));
        match t.rebuild(vec![l3, Term::bool(true)]).unwrap_err() {
            Error::SortMismatch { path, .. } => assert_eq!(path, vec![1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rebuild_identity() {
        let sig = sig();
        let t = parse_term("(Add (Add (Lit 1) (Lit 2)) (Lit 3))", &sig).unwrap();
        assert_eq!(t.rebuild(t.children().to_vec()).unwrap(), t);
    }

    #[test]
    fn sort_of_examples() {
        let sig = sig();
        assert_eq!(parse_term("(Lit 1)", &sig).unwrap().sort_of().as_str(), "Expr");
        assert_eq!(Term::int(42).sort_of().as_str(), "Int");
    }

    #[test]
    fn check_term_error_paths() {
        let sig = sig();
        let lit1 = parse_term("(Lit 1)", &sig).unwrap();
        let expr = SortName::new("Expr").unwrap();
        let short = Term::unchecked_app("Add", expr.clone(), vec![lit1.clone()]);
        match sig.check_term(&short).unwrap_err() {
            Error::ArityMismatch { path, .. } => assert!(path.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
        let bad = Term::unchecked_app("Add", expr, vec![lit1, Term::bool(true)]);
        match sig.check_term(&bad).unwrap_err() {
            Error::SortMismatch { path, expected, got } => {
                assert_eq!(path, vec![1]);
                assert_eq!(expected, "Expr");
                assert_eq!(got, "Bool");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
