//! Algebraic signatures: the declared sorts and constructors that every term
//! is checked against.
//!
//! Signature file format (UTF-8 s-expressions, `;` comments):
//!
//! ```text
//! (sort NAME)
//! (con NAME RESULT (ARG ...))
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Path, Result};
use crate::sexpr::{self, Sexpr};
use crate::term::{Term, TermNode};

/// Nominal sort tag. Equality is name equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SortName(Arc<str>);

pub const BUILTIN_SORTS: [&str; 4] = ["Int", "Bool", "Str", "Unit"];

impl SortName {
    /// Accepts identifiers matching `[A-Za-z][A-Za-z0-9_]*`.
    pub fn new(name: &str) -> Result<Self> {
        let mut chars = name.chars();
        let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok {
            return Err(Error::InvalidIdentifier(name.to_string()));
        }
        Ok(SortName(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_builtin(&self) -> bool {
        BUILTIN_SORTS.contains(&self.as_str())
    }

    pub fn int() -> Self {
        SortName(Arc::from("Int"))
    }
    pub fn bool() -> Self {
        SortName(Arc::from("Bool"))
    }
    pub fn str() -> Self {
        SortName(Arc::from("Str"))
    }
    pub fn unit() -> Self {
        SortName(Arc::from("Unit"))
    }
}

impl fmt::Display for SortName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructorDecl {
    pub name: String,
    pub result: SortName,
    pub args: Vec<SortName>,
}

/// Immutable after load; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    sorts: Vec<SortName>,
    constructors: BTreeMap<String, ConstructorDecl>,
}

impl Signature {
    pub fn sorts(&self) -> &[SortName] {
        &self.sorts
    }

    pub fn constructors(&self) -> impl Iterator<Item = &ConstructorDecl> {
        self.constructors.values()
    }

    pub fn has_sort(&self, s: &SortName) -> bool {
        s.is_builtin() || self.sorts.contains(s)
    }

    /// Total over declared constructors, unknown-constructor error otherwise.
    pub fn constructor_lookup(&self, name: &str) -> Result<&ConstructorDecl> {
        self.constructors
            .get(name)
            .ok_or_else(|| Error::UnknownConstructor(name.to_string()))
    }

    fn declare_sort(&mut self, name: &str) -> Result<()> {
        let sort = SortName::new(name)?;
        if sort.is_builtin() {
            return Err(Error::ReservedSort(name.to_string()));
        }
        if self.sorts.contains(&sort) {
            return Err(Error::DuplicateSort(name.to_string()));
        }
        self.sorts.push(sort);
        Ok(())
    }

    fn declare_constructor(&mut self, decl: ConstructorDecl) -> Result<()> {
        if self.constructors.contains_key(&decl.name) {
            return Err(Error::DuplicateConstructor(decl.name));
        }
        if decl.result.is_builtin() || !self.has_sort(&decl.result) {
            return Err(Error::UndeclaredSort(decl.result.to_string()));
        }
        for arg in &decl.args {
            if !self.has_sort(arg) {
                return Err(Error::UndeclaredSort(arg.to_string()));
            }
        }
        self.constructors.insert(decl.name.clone(), decl);
        Ok(())
    }

    /// Succeeds iff every node's constructor exists, has matching arity, and
    /// each child's sort equals the declared argument sort.
    pub fn check_term(&self, t: &Term) -> Result<()> {
        let mut path = Vec::new();
        self.check_at(t, &mut path)
    }

    fn check_at(&self, t: &Term, path: &mut Path) -> Result<()> {
        match t.node() {
            TermNode::Prim(_) => Ok(()),
            TermNode::App { con, children } => {
                let decl = self.constructor_lookup(con)?;
                if decl.args.len() != children.len() {
                    return Err(Error::ArityMismatch {
                        path: path.clone(),
                        con: con.clone(),
                        expected: decl.args.len(),
                        got: children.len(),
                    });
                }
                for (i, (child, want)) in children.iter().zip(&decl.args).enumerate() {
                    if child.sort() != want {
                        path.push(i);
                        let err = Error::SortMismatch {
                            path: path.clone(),
                            expected: want.to_string(),
                            got: child.sort().to_string(),
                        };
                        path.pop();
                        return Err(err);
                    }
                    path.push(i);
                    self.check_at(child, path)?;
                    path.pop();
                }
                Ok(())
            }
        }
    }
}

/// Parse and validate a signature file.
pub fn load_signature(text: &str) -> Result<Signature> {
    let forms = sexpr::parse_many(text)?;
    let mut sig = Signature::default();
    // Two passes so constructors may reference sorts declared later in the file.
    for form in &forms {
        let items = form.items().ok_or_else(|| form.err("expected `(sort ...)` or `(con ...)`"))?;
        match items.first().and_then(Sexpr::atom) {
            Some("sort") => {
                if items.len() != 2 {
                    return Err(form.err("expected `(sort NAME)`"));
                }
                let name = items[1].atom().ok_or_else(|| items[1].err("expected sort name"))?;
                sig.declare_sort(name)?;
            }
            Some("con") => {}
            _ => return Err(form.err("expected `(sort ...)` or `(con ...)`")),
        }
    }
    for form in &forms {
        let items = form.items().unwrap();
        if items.first().and_then(Sexpr::atom) != Some("con") {
            continue;
        }
        if items.len() != 4 {
            return Err(form.err("expected `(con NAME RESULT (ARG ...))`"));
        }
        let name = items[1].atom().ok_or_else(|| items[1].err("expected constructor name"))?;
        SortName::new(name)?; // same lexical rule as sorts
        let result = SortName::new(
            items[2].atom().ok_or_else(|| items[2].err("expected result sort"))?,
        )?;
        let arg_list = items[3].items().ok_or_else(|| items[3].err("expected `(ARG ...)`"))?;
        let mut args = Vec::with_capacity(arg_list.len());
        for a in arg_list {
            args.push(SortName::new(a.atom().ok_or_else(|| a.err("expected argument sort"))?)?);
        }
        sig.declare_constructor(ConstructorDecl { name: name.to_string(), result, args })?;
    }
    Ok(sig)
}
