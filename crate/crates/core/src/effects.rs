//! Effect disciplines for strategy application: total, partial (zero or one
//! result, failure is a value) and nondeterministic (an ordered list of
//! results), plus the monoid abstraction used by type-unifying combination.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectKind {
    Total,
    Partial,
    Nondet,
}

impl EffectKind {
    pub fn supports_zero(self) -> bool {
        !matches!(self, EffectKind::Total)
    }
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EffectKind::Total => "total",
            EffectKind::Partial => "partial",
            EffectKind::Nondet => "nondet",
        };
        f.write_str(s)
    }
}

/// An effectful result. The variant is the effect kind; strategies fix their
/// kind at construction so composed computations never mix variants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Eff<A> {
    Total(A),
    Partial(Option<A>),
    Nondet(Vec<A>),
}

impl<A> Eff<A> {
    pub fn kind(&self) -> EffectKind {
        match self {
            Eff::Total(_) => EffectKind::Total,
            Eff::Partial(_) => EffectKind::Partial,
            Eff::Nondet(_) => EffectKind::Nondet,
        }
    }

    pub fn pure(kind: EffectKind, a: A) -> Eff<A> {
        match kind {
            EffectKind::Total => Eff::Total(a),
            EffectKind::Partial => Eff::Partial(Some(a)),
            EffectKind::Nondet => Eff::Nondet(vec![a]),
        }
    }

    /// mzero; unavailable for the total kind.
    pub fn zero(kind: EffectKind) -> Result<Eff<A>> {
        match kind {
            EffectKind::Total => Err(Error::UnsupportedEffect),
            EffectKind::Partial => Ok(Eff::Partial(None)),
            EffectKind::Nondet => Ok(Eff::Nondet(vec![])),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Eff::Partial(None)) || matches!(self, Eff::Nondet(v) if v.is_empty())
    }

    pub fn results(self) -> Vec<A> {
        match self {
            Eff::Total(a) => vec![a],
            Eff::Partial(o) => o.into_iter().collect(),
            Eff::Nondet(v) => v,
        }
    }

    /// Monadic sequencing where the continuation may raise a hard error
    /// (as opposed to effect failure, which flows as an empty result).
    pub fn try_bind<B>(self, mut k: impl FnMut(A) -> Result<Eff<B>>) -> Result<Eff<B>> {
        match self {
            Eff::Total(a) => k(a),
            Eff::Partial(None) => Ok(Eff::Partial(None)),
            Eff::Partial(Some(a)) => match k(a)? {
                Eff::Partial(o) => Ok(Eff::Partial(o)),
                other => Err(kind_clash(EffectKind::Partial, other.kind())),
            },
            Eff::Nondet(items) => {
                let mut out = Vec::new();
                for a in items {
                    match k(a)? {
                        Eff::Nondet(mut v) => out.append(&mut v),
                        other => return Err(kind_clash(EffectKind::Nondet, other.kind())),
                    }
                }
                Ok(Eff::Nondet(out))
            }
        }
    }

    pub fn bind<B>(self, mut k: impl FnMut(A) -> Eff<B>) -> Eff<B> {
        self.try_bind(|a| Ok(k(a))).expect("bind continuation changed the effect kind")
    }

    pub fn try_map<B>(self, mut f: impl FnMut(A) -> Result<B>) -> Result<Eff<B>> {
        let kind = self.kind();
        self.try_bind(|a| Ok(Eff::pure(kind, f(a)?)))
    }

    pub fn map<B>(self, mut f: impl FnMut(A) -> B) -> Eff<B> {
        let kind = self.kind();
        self.bind(|a| Eff::pure(kind, f(a)))
    }

    /// mplus: left-biased first success under partial, ordered concatenation
    /// under nondet.
    pub fn plus(self, r: Eff<A>) -> Result<Eff<A>> {
        match (self, r) {
            (Eff::Partial(l), Eff::Partial(r)) => Ok(Eff::Partial(l.or(r))),
            (Eff::Nondet(mut l), Eff::Nondet(mut r)) => {
                l.append(&mut r);
                Ok(Eff::Nondet(l))
            }
            (Eff::Total(_), Eff::Total(_)) => Err(Error::UnsupportedEffect),
            (l, r) => Err(kind_clash(l.kind(), r.kind())),
        }
    }
}

fn kind_clash(l: EffectKind, r: EffectKind) -> Error {
    Error::KindMismatch(l.to_string(), r.to_string())
}

/// A monoid instance: `empty` is a two-sided identity of the associative
/// `combine`. Combination may fail on values outside the carrier, which the
/// runtime-typed CLI monoids surface as an error.
#[derive(Clone)]
pub struct Monoid<A> {
    name: String,
    empty: A,
    combine: Arc<dyn Fn(&A, &A) -> Result<A> + Send + Sync>,
}

impl<A: Clone> Monoid<A> {
    pub fn new(
        name: impl Into<String>,
        empty: A,
        combine: impl Fn(&A, &A) -> Result<A> + Send + Sync + 'static,
    ) -> Self {
        Monoid { name: name.into(), empty, combine: Arc::new(combine) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn empty(&self) -> A {
        self.empty.clone()
    }

    pub fn combine(&self, l: &A, r: &A) -> Result<A> {
        (self.combine)(l, r)
    }
}

impl<A> fmt::Debug for Monoid<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monoid({})", self.name)
    }
}

fn monoid_type_error(name: &str, l: &Value, r: &Value) -> Error {
    Error::MonoidTypeError {
        name: name.to_string(),
        lhs: l.type_name().to_string(),
        rhs: r.type_name().to_string(),
    }
}

/// The named monoid instances available to the CLI.
pub fn monoid_registry(name: &str) -> Result<Monoid<Value>> {
    match name {
        "unit" => Ok(Monoid::new("unit", Value::Unit, |_, _| Ok(Value::Unit))),
        "int_sum" => Ok(Monoid::new("int_sum", Value::Int(0), |l, r| match (l, r) {
            (Value::Int(a), Value::Int(b)) => Ok(Value::Int(a + b)),
            _ => Err(monoid_type_error("int_sum", l, r)),
        })),
        "list_concat" => Ok(Monoid::new("list_concat", Value::List(vec![]), |l, r| {
            match (l, r) {
                (Value::List(a), Value::List(b)) => {
                    Ok(Value::List(a.iter().chain(b).cloned().collect()))
                }
                _ => Err(monoid_type_error("list_concat", l, r)),
            }
        })),
        "str_concat" => Ok(Monoid::new("str_concat", Value::Str(String::new()), |l, r| {
            match (l, r) {
                (Value::Str(a), Value::Str(b)) => Ok(Value::Str(format!("{a}{b}"))),
                _ => Err(monoid_type_error("str_concat", l, r)),
            }
        })),
        other => Err(Error::UnknownMonoid(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_bind_per_kind() {
        let e = Eff::pure(EffectKind::Total, 1).bind(|x| Eff::pure(EffectKind::Total, x + 1));
        assert_eq!(e, Eff::Total(2));

        let none: Eff<i32> = Eff::Partial(None);
        assert_eq!(none.bind(|x| Eff::Partial(Some(x * 10))), Eff::Partial(None));

        let e = Eff::Nondet(vec![1, 2]).bind(|x| Eff::Nondet(vec![x, x * 10]));
        assert_eq!(e, Eff::Nondet(vec![1, 10, 2, 20]));
    }

    #[test]
    fn zero_and_plus() {
        assert_eq!(Eff::<i32>::zero(EffectKind::Partial).unwrap(), Eff::Partial(None));
        assert_eq!(Eff::<i32>::zero(EffectKind::Nondet).unwrap(), Eff::Nondet(vec![]));
        assert_eq!(Eff::<i32>::zero(EffectKind::Total).unwrap_err(), Error::UnsupportedEffect);

        assert_eq!(Eff::Partial(None).plus(Eff::Partial(Some(3))).unwrap(), Eff::Partial(Some(3)));
        assert_eq!(
            Eff::Partial(Some(1)).plus(Eff::Partial(Some(2))).unwrap(),
            Eff::Partial(Some(1))
        );
        assert_eq!(
            Eff::Nondet(vec![1]).plus(Eff::Nondet(vec![2, 3])).unwrap(),
            Eff::Nondet(vec![1, 2, 3])
        );
        assert_eq!(Eff::Total(1).plus(Eff::Total(2)).unwrap_err(), Error::UnsupportedEffect);
    }

    #[test]
    fn registry_instances() {
        let m = monoid_registry("int_sum").unwrap();
        assert_eq!(m.empty(), Value::Int(0));
        assert_eq!(m.combine(&Value::Int(2), &Value::Int(3)).unwrap(), Value::Int(5));

        let m = monoid_registry("list_concat").unwrap();
        assert_eq!(m.empty(), Value::List(vec![]));
        let l = Value::List(vec![Value::Int(1)]);
        let r = Value::List(vec![Value::Int(2)]);
        assert_eq!(
            m.combine(&l, &r).unwrap(),
            Value::List(vec![Value::Int(1), Value::Int(2)])
        );
        assert!(m.combine(&Value::Int(1), &r).is_err());

        let m = monoid_registry("unit").unwrap();
        assert_eq!(m.combine(&Value::Unit, &Value::Unit).unwrap(), Value::Unit);

        let m = monoid_registry("str_concat").unwrap();
        assert_eq!(
            m.combine(&Value::Str("ab".into()), &Value::Str("c".into())).unwrap(),
            Value::Str("abc".into())
        );

        assert_eq!(monoid_registry("max").unwrap_err(), Error::UnknownMonoid("max".into()));
    }
}
