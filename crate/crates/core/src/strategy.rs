//! First-class strategy values: type-preserving (TP) and type-unifying (TU)
//! generic functions over terms, the parametric combinators, and type-based
//! dispatch via `adhoc`.
//!
//! A strategy fixes its effect kind at construction; composing strategies of
//! different kinds is a construction-time error. Effect failure (partial
//! `none`, empty nondet) flows as a value; hard errors such as sort
//! violations are reported through `Result`.

use std::fmt;
use std::sync::Arc;

use crate::effects::{Eff, EffectKind};
use crate::error::{Error, Result};
use crate::signature::SortName;
use crate::term::Term;

/// Bound required of TU result types.
pub trait Val: Clone + Send + Sync + 'static {}
impl<T: Clone + Send + Sync + 'static> Val for T {}

type TpFn = Arc<dyn Fn(&Term) -> Result<Eff<Term>> + Send + Sync>;
type TuFn<A> = Arc<dyn Fn(&Term) -> Result<Eff<A>> + Send + Sync>;

/// Type-preserving strategy: whenever application succeeds, the output term
/// has the sort of the input. The preservation check runs at every
/// application boundary.
#[derive(Clone)]
pub struct TP {
    kind: EffectKind,
    run: TpFn,
}

impl TP {
    pub fn new(
        kind: EffectKind,
        run: impl Fn(&Term) -> Result<Eff<Term>> + Send + Sync + 'static,
    ) -> TP {
        TP { kind, run: Arc::new(run) }
    }

    pub fn kind(&self) -> EffectKind {
        self.kind
    }

    pub fn apply(&self, t: &Term) -> Result<Eff<Term>> {
        let out = (self.run)(t)?;
        check_kind(self.kind, out.kind())?;
        for r in preview(&out) {
            if r.sort() != t.sort() {
                return Err(Error::SortViolation {
                    tag: t.sort().to_string(),
                    got: r.sort().to_string(),
                });
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for TP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TP({})", self.kind)
    }
}

fn preview(e: &Eff<Term>) -> Vec<&Term> {
    match e {
        Eff::Total(t) => vec![t],
        Eff::Partial(o) => o.iter().collect(),
        Eff::Nondet(v) => v.iter().collect(),
    }
}

/// Type-unifying strategy: maps terms of any sort to values of one fixed
/// type `A`.
#[derive(Clone)]
pub struct TU<A> {
    kind: EffectKind,
    run: TuFn<A>,
}

impl<A: Val> TU<A> {
    pub fn new(
        kind: EffectKind,
        run: impl Fn(&Term) -> Result<Eff<A>> + Send + Sync + 'static,
    ) -> TU<A> {
        TU { kind, run: Arc::new(run) }
    }

    pub fn kind(&self) -> EffectKind {
        self.kind
    }

    pub fn apply(&self, t: &Term) -> Result<Eff<A>> {
        let out = (self.run)(t)?;
        check_kind(self.kind, out.kind())?;
        Ok(out)
    }
}

impl<A> fmt::Debug for TU<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TU({})", self.kind)
    }
}

fn check_kind(want: EffectKind, got: EffectKind) -> Result<()> {
    if want == got {
        Ok(())
    } else {
        Err(Error::KindMismatch(want.to_string(), got.to_string()))
    }
}

fn require_zero(kind: EffectKind) -> Result<()> {
    if kind.supports_zero() {
        Ok(())
    } else {
        Err(Error::UnsupportedEffect)
    }
}

/// The identity strategy: succeeds on every term, returns it unchanged.
pub fn id_tp(kind: EffectKind) -> TP {
    TP::new(kind, move |t| Ok(Eff::pure(kind, t.clone())))
}

/// The constant strategy: yields `a` on every input.
pub fn const_tu<A: Val>(kind: EffectKind, a: A) -> TU<A> {
    TU::new(kind, move |_| Ok(Eff::pure(kind, a.clone())))
}

/// The always failing strategy (TP flavor). Requires a zero-capable kind.
pub fn fail_tp(kind: EffectKind) -> Result<TP> {
    require_zero(kind)?;
    Ok(TP::new(kind, move |_| Eff::zero(kind)))
}

/// The always failing strategy (TU flavor). Requires a zero-capable kind.
pub fn fail_tu<A: Val>(kind: EffectKind) -> Result<TU<A>> {
    require_zero(kind)?;
    Ok(TU::new(kind, move |_| Eff::zero(kind)))
}

/// Sequence two type-preserving strategies: the first's output term is fed
/// to the second.
pub fn seq_tp(first: &TP, second: &TP) -> Result<TP> {
    check_kind(first.kind, second.kind)?;
    let (f, s) = (first.clone(), second.clone());
    Ok(TP::new(first.kind, move |t| f.apply(t)?.try_bind(|t2| s.apply(&t2))))
}

/// Sequence a type-preserving strategy into a type-unifying one.
pub fn seq_tu<A: Val>(first: &TP, second: &TU<A>) -> Result<TU<A>> {
    check_kind(first.kind, second.kind())?;
    let (f, s) = (first.clone(), second.clone());
    Ok(TU::new(first.kind, move |t| f.apply(t)?.try_bind(|t2| s.apply(&t2))))
}

/// Value passing into a type-preserving continuation: both strategies see the
/// same term; the continuation additionally receives the first's value.
pub fn pass_tp<A: Val>(
    first: &TU<A>,
    k: impl Fn(&A) -> Result<TP> + Send + Sync + 'static,
) -> TP {
    let kind = first.kind();
    let first = first.clone();
    TP::new(kind, move |t| {
        first.apply(t)?.try_bind(|a| {
            let s = k(&a)?;
            check_kind(kind, s.kind)?;
            s.apply(t)
        })
    })
}

/// Value passing into a type-unifying continuation.
pub fn pass_tu<A: Val, B: Val>(
    first: &TU<A>,
    k: impl Fn(&A) -> Result<TU<B>> + Send + Sync + 'static,
) -> TU<B> {
    let kind = first.kind();
    let first = first.clone();
    TU::new(kind, move |t| {
        first.apply(t)?.try_bind(|a| {
            let s = k(&a)?;
            check_kind(kind, s.kind())?;
            s.apply(t)
        })
    })
}

/// Alternative composition. Partial: the right side is evaluated only if the
/// left fails. Nondet: ordered concatenation of both result lists.
pub fn choice_tp(l: &TP, r: &TP) -> Result<TP> {
    check_kind(l.kind, r.kind)?;
    require_zero(l.kind)?;
    let (l, r) = (l.clone(), r.clone());
    Ok(TP::new(l.kind.clone(), move |t| alt(l.apply(t)?, || r.apply(t))))
}

/// Alternative composition for type-unifying strategies.
pub fn choice_tu<A: Val>(l: &TU<A>, r: &TU<A>) -> Result<TU<A>> {
    check_kind(l.kind, r.kind)?;
    require_zero(l.kind)?;
    let (l, r) = (l.clone(), r.clone());
    Ok(TU::new(l.kind, move |t| alt(l.apply(t)?, || r.apply(t))))
}

fn alt<A>(left: Eff<A>, right: impl FnOnce() -> Result<Eff<A>>) -> Result<Eff<A>> {
    match left {
        Eff::Partial(None) => right(),
        Eff::Partial(some) => Ok(Eff::Partial(some)),
        Eff::Nondet(l) => Eff::Nondet(l).plus(right()?),
        Eff::Total(_) => Err(Error::UnsupportedEffect),
    }
}

/// A monomorphic type-preserving update: invoked only on terms whose sort
/// equals `tag`.
#[derive(Clone)]
pub struct MonoTp {
    pub tag: SortName,
    kind: EffectKind,
    run: TpFn,
}

impl MonoTp {
    pub fn new(
        tag: SortName,
        kind: EffectKind,
        run: impl Fn(&Term) -> Result<Eff<Term>> + Send + Sync + 'static,
    ) -> MonoTp {
        MonoTp { tag, kind, run: Arc::new(run) }
    }

    pub fn kind(&self) -> EffectKind {
        self.kind
    }
}

/// A monomorphic type-unifying update.
#[derive(Clone)]
pub struct MonoTu<A> {
    pub tag: SortName,
    kind: EffectKind,
    run: TuFn<A>,
}

impl<A: Val> MonoTu<A> {
    pub fn new(
        tag: SortName,
        kind: EffectKind,
        run: impl Fn(&Term) -> Result<Eff<A>> + Send + Sync + 'static,
    ) -> MonoTu<A> {
        MonoTu { tag, kind, run: Arc::new(run) }
    }

    pub fn kind(&self) -> EffectKind {
        self.kind
    }
}

/// Type-based dispatch: on an input whose sort equals the update's tag the
/// monomorphic case runs, otherwise the generic strategy. A later update
/// shadows an earlier one with the same tag. If the monomorphic case yields
/// a term of a different sort, a sort-violation error naming the tag is
/// raised and no ill-sorted term escapes.
pub fn adhoc_tp(poly: &TP, mono: &MonoTp) -> Result<TP> {
    check_kind(poly.kind, mono.kind)?;
    let poly = poly.clone();
    let mono = mono.clone();
    Ok(TP::new(poly.kind.clone(), move |t| {
        if t.sort() == &mono.tag {
            let out = (mono.run)(t)?;
            for r in preview(&out) {
                if r.sort() != &mono.tag {
                    return Err(Error::SortViolation {
                        tag: mono.tag.to_string(),
                        got: r.sort().to_string(),
                    });
                }
            }
            Ok(out)
        } else {
            poly.apply(t)
        }
    }))
}

/// Type-based dispatch for type-unifying strategies.
pub fn adhoc_tu<A: Val>(poly: &TU<A>, mono: &MonoTu<A>) -> Result<TU<A>> {
    check_kind(poly.kind, mono.kind)?;
    let poly = poly.clone();
    let mono = mono.clone();
    Ok(TU::new(poly.kind, move |t| {
        if t.sort() == &mono.tag {
            (mono.run)(t)
        } else {
            poly.apply(t)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::load_signature;
    use crate::term::{parse_term, Prim, Term, TermNode};

    const P: EffectKind = EffectKind::Partial;
    const T: EffectKind = EffectKind::Total;

    /// adhoc(idTP, negate-on-Bool), over the total kind.
    fn negate_bool() -> TP {
        let mono = MonoTp::new(SortName::bool(), T, |t| match t.node() {
            TermNode::Prim(Prim::Bool(b)) => Ok(Eff::Total(Term::bool(!b))),
            _ => unreachable!("dispatch invariant"),
        });
        adhoc_tp(&id_tp(T), &mono).unwrap()
    }

    /// adhoc(fail, yield-Int-value), over the partial kind.
    fn return_int() -> TU<i64> {
        let mono = MonoTu::new(SortName::int(), P, |t| match t.node() {
            TermNode::Prim(Prim::Int(n)) => Ok(Eff::Partial(Some(*n))),
            _ => unreachable!("dispatch invariant"),
        });
        adhoc_tu(&fail_tu(P).unwrap(), &mono).unwrap()
    }

    #[test]
    fn id_and_const() {
        let t = Term::bool(true);
        assert_eq!(id_tp(T).apply(&t).unwrap(), Eff::Total(t.clone()));
        assert_eq!(const_tu(T, 0i64).apply(&t).unwrap(), Eff::Total(0));
        assert_eq!(const_tu(P, Vec::<i64>::new()).apply(&t).unwrap(), Eff::Partial(Some(vec![])));
    }

    #[test]
    fn fail_per_kind() {
        let t = Term::int(1);
        assert_eq!(fail_tp(P).unwrap().apply(&t).unwrap(), Eff::Partial(None));
        assert_eq!(
            fail_tu::<i64>(EffectKind::Nondet).unwrap().apply(&t).unwrap(),
            Eff::Nondet(vec![])
        );
        assert_eq!(fail_tp(T).unwrap_err(), Error::UnsupportedEffect);
    }

    #[test]
    fn negate_bool_dispatch() {
        let s = negate_bool();
        assert_eq!(s.apply(&Term::bool(true)).unwrap(), Eff::Total(Term::bool(false)));
        let sig = load_signature("(sort Expr) (con Lit Expr (Int))").unwrap();
        let lit = parse_term("(Lit 1)", &sig).unwrap();
        assert_eq!(s.apply(&lit).unwrap(), Eff::Total(lit.clone()));
    }

    #[test]
    fn return_int_dispatch() {
        let s = return_int();
        assert_eq!(s.apply(&Term::int(5)).unwrap(), Eff::Partial(Some(5)));
        assert_eq!(s.apply(&Term::bool(true)).unwrap(), Eff::Partial(None));
    }

    #[test]
    fn adhoc_sort_violation() {
        let mono = MonoTp::new(SortName::int(), T, |_| Ok(Eff::Total(Term::bool(true))));
        let s = adhoc_tp(&id_tp(T), &mono).unwrap();
        match s.apply(&Term::int(1)).unwrap_err() {
            Error::SortViolation { tag, got } => {
                assert_eq!(tag, "Int");
                assert_eq!(got, "Bool");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adhoc_shadowing_is_innermost_first() {
        let m1 = MonoTu::new(SortName::int(), P, |_| Ok(Eff::Partial(Some(1i64))));
        let m2 = MonoTu::new(SortName::int(), P, |_| Ok(Eff::Partial(Some(2i64))));
        let s = adhoc_tu(&adhoc_tu(&fail_tu(P).unwrap(), &m1).unwrap(), &m2).unwrap();
        assert_eq!(s.apply(&Term::int(0)).unwrap(), Eff::Partial(Some(2)));
    }

    #[test]
    fn seq_identities() {
        let s = negate_bool();
        let t = Term::bool(false);
        assert_eq!(seq_tp(&id_tp(T), &s).unwrap().apply(&t).unwrap(), s.apply(&t).unwrap());
        let f = fail_tp(P).unwrap();
        let id = id_tp(P);
        assert_eq!(seq_tp(&f, &id).unwrap().apply(&t).unwrap(), Eff::Partial(None));
    }

    #[test]
    fn pass_shares_the_term() {
        let s = pass_tu(&const_tu(P, 7i64), |n| {
            let n = *n;
            Ok(const_tu(P, n + 1))
        });
        assert_eq!(s.apply(&Term::unit()).unwrap(), Eff::Partial(Some(8)));

        let s = pass_tu(&fail_tu::<i64>(P).unwrap(), |_| Ok(const_tu(P, 0i64)));
        assert_eq!(s.apply(&Term::unit()).unwrap(), Eff::Partial(None));
    }

    #[test]
    fn choice_semantics() {
        let t = Term::int(1);
        let one = const_tu(P, 1i64);
        let two = const_tu(P, 2i64);
        let f = fail_tu::<i64>(P).unwrap();
        assert_eq!(choice_tu(&f, &one).unwrap().apply(&t).unwrap(), Eff::Partial(Some(1)));
        assert_eq!(choice_tu(&one, &f).unwrap().apply(&t).unwrap(), Eff::Partial(Some(1)));
        assert_eq!(choice_tu(&one, &two).unwrap().apply(&t).unwrap(), Eff::Partial(Some(1)));

        let n = EffectKind::Nondet;
        let s = choice_tu(&const_tu(n, 1i64), &const_tu(n, 2i64)).unwrap();
        assert_eq!(s.apply(&t).unwrap(), Eff::Nondet(vec![1, 2]));

        assert_eq!(choice_tu(&const_tu(T, 1i64), &const_tu(T, 2i64)).unwrap_err(), Error::UnsupportedEffect);
        assert_eq!(
            choice_tu(&const_tu(P, 1i64), &const_tu(n, 2i64)).unwrap_err(),
            Error::KindMismatch("partial".into(), "nondet".into())
        );
    }
}
