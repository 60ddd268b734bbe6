//! The fundamental fold over constructor applications and the four one-layer
//! traversal combinators derived from it. These process immediate children
//! only; recursion is added by the traversal schemes.

use std::sync::Arc;

use crate::effects::{Eff, EffectKind, Monoid};
use crate::error::{Error, Result};
use crate::strategy::{Val, TP, TU};
use crate::term::{Prim, Term, TermNode};

/// The head of a node as seen by the fold base case: the bare constructor of
/// an application, or the primitive value of a leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeHead {
    Con(String),
    Leaf(Prim),
}

impl NodeHead {
    pub fn of(t: &Term) -> NodeHead {
        match t.node() {
            TermNode::App { con, .. } => NodeHead::Con(con.clone()),
            TermNode::Prim(p) => NodeHead::Leaf(p.clone()),
        }
    }
}

/// The fold ingredients: a step function over one child and a base case for
/// the empty constructor application. The step runs exactly arity-many times
/// per fold, the base exactly once.
#[derive(Clone)]
pub struct FoldAlgebra<R> {
    pub kind: EffectKind,
    pub step: Arc<dyn Fn(&Term, R) -> Result<Eff<R>> + Send + Sync>,
    pub base: Arc<dyn Fn(&NodeHead) -> Result<Eff<R>> + Send + Sync>,
}

impl<R: Val> FoldAlgebra<R> {
    pub fn new(
        kind: EffectKind,
        step: impl Fn(&Term, R) -> Result<Eff<R>> + Send + Sync + 'static,
        base: impl Fn(&NodeHead) -> Result<Eff<R>> + Send + Sync + 'static,
    ) -> Self {
        FoldAlgebra { kind, step: Arc::new(step), base: Arc::new(base) }
    }
}

/// Fold over the children of one node. The base case receives the bare head;
/// each child is then folded in leftmost-first order, every step sequenced
/// through the effect's bind. Leaves and nullary applications yield the base
/// case directly.
pub fn hfoldr<R: Val>(alg: &FoldAlgebra<R>, t: &Term) -> Result<Eff<R>> {
    let mut acc = (alg.base)(&NodeHead::of(t))?;
    for child in t.children() {
        acc = acc.try_bind(|r| (alg.step)(child, r))?;
    }
    Ok(acc)
}

/// Process all children; preserve the constructor. Identity on leaves and
/// nullary nodes. Fails iff the argument strategy fails on some child.
pub fn all_tp(s: &TP) -> TP {
    let kind = s.kind();
    let s = s.clone();
    TP::new(kind, move |t| {
        let alg = {
            let s = s.clone();
            FoldAlgebra::new(
                kind,
                move |child: &Term, kids: Vec<Term>| {
                    s.apply(child)?.try_map(|c| {
                        let mut kids = kids.clone();
                        kids.push(c);
                        Ok(kids)
                    })
                },
                move |_| Ok(Eff::pure(kind, Vec::new())),
            )
        };
        hfoldr(&alg, t)?.try_map(|kids| t.rebuild(kids))
    })
}

/// Process all children; reduce the intermediate results with the monoid,
/// left to right. Yields the monoid's empty on leaves and nullary nodes.
pub fn all_tu<A: Val>(m: &Monoid<A>, s: &TU<A>) -> TU<A> {
    let kind = s.kind();
    let (m, s) = (m.clone(), s.clone());
    TU::new(kind, move |t| {
        let alg = {
            let (step_m, base_m, s) = (m.clone(), m.clone(), s.clone());
            FoldAlgebra::new(
                kind,
                move |child: &Term, acc: A| {
                    let m = step_m.clone();
                    s.apply(child)?.try_map(move |a| m.combine(&acc, &a))
                },
                move |_| Ok(Eff::pure(kind, base_m.empty())),
            )
        };
        hfoldr(&alg, t)
    })
}

/// Fold state for the `one` combinators: the children (or result) seen so
/// far, and whether a replacement has already happened. This is the pairing
/// that recovers the paramorphic fold from the catamorphic `hfoldr`.
#[derive(Clone)]
struct OneState<R> {
    acc: R,
    hit: bool,
}

/// Try the children until one succeeds; preserve the constructor. Partial:
/// exactly the leftmost succeeding child is replaced, the others are left
/// untouched; fails when no child succeeds (leaves always fail). Nondet: one
/// variant per succeeding child per success value, in child order.
pub fn one_tp(s: &TP) -> Result<TP> {
    let kind = s.kind();
    if !kind.supports_zero() {
        return Err(Error::UnsupportedEffect);
    }
    let s = s.clone();
    Ok(TP::new(kind, move |t| {
        let alg = {
            let s = s.clone();
            FoldAlgebra::new(
                kind,
                move |child: &Term, st: OneState<Vec<Term>>| {
                    let keep = |st: &OneState<Vec<Term>>| {
                        let mut acc = st.acc.clone();
                        acc.push(child.clone());
                        OneState { acc, hit: st.hit }
                    };
                    if st.hit {
                        return Ok(Eff::pure(kind, keep(&st)));
                    }
                    let replaced: Vec<OneState<Vec<Term>>> = s
                        .apply(child)?
                        .results()
                        .into_iter()
                        .map(|c| {
                            let mut acc = st.acc.clone();
                            acc.push(c);
                            OneState { acc, hit: true }
                        })
                        .collect();
                    match kind {
                        EffectKind::Partial => Ok(Eff::Partial(Some(
                            replaced.into_iter().next().unwrap_or_else(|| keep(&st)),
                        ))),
                        EffectKind::Nondet => {
                            let mut out = replaced;
                            out.push(keep(&st));
                            Ok(Eff::Nondet(out))
                        }
                        EffectKind::Total => Err(Error::UnsupportedEffect),
                    }
                },
                move |_| Ok(Eff::pure(kind, OneState { acc: Vec::new(), hit: false })),
            )
        };
        let folded = hfoldr(&alg, t)?;
        let rebuilt = folded.try_bind(|st| {
            if st.hit {
                Ok(Eff::pure(kind, st.acc))
            } else {
                Eff::zero(kind)
            }
        })?;
        rebuilt.try_map(|kids| t.rebuild(kids))
    }))
}

/// Try the children until one succeeds; return the processed child's result.
/// Partial: leftmost success. Nondet: concatenation of all children's
/// results in order.
pub fn one_tu<A: Val>(s: &TU<A>) -> Result<TU<A>> {
    let kind = s.kind();
    if !kind.supports_zero() {
        return Err(Error::UnsupportedEffect);
    }
    let s = s.clone();
    Ok(TU::new(kind, move |t| {
        let alg = {
            let s = s.clone();
            FoldAlgebra::new(
                kind,
                move |child: &Term, st: OneState<Vec<A>>| {
                    if kind == EffectKind::Partial && st.hit {
                        return Ok(Eff::pure(kind, st));
                    }
                    let mut acc = st.acc.clone();
                    let results = s.apply(child)?.results();
                    let hit = st.hit || !results.is_empty();
                    acc.extend(results);
                    Ok(Eff::pure(kind, OneState { acc, hit }))
                },
                move |_| Ok(Eff::pure(kind, OneState { acc: Vec::new(), hit: false })),
            )
        };
        let st = match hfoldr(&alg, t)? {
            Eff::Partial(Some(st)) => st,
            Eff::Nondet(mut v) if v.len() == 1 => v.pop().unwrap(),
            _ => return Err(Error::KindMismatch(kind.to_string(), "fold state".into())),
        };
        match kind {
            EffectKind::Partial => Ok(Eff::Partial(st.acc.into_iter().next())),
            EffectKind::Nondet => Ok(Eff::Nondet(st.acc)),
            EffectKind::Total => Err(Error::UnsupportedEffect),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{load_signature, Signature, SortName};
    use crate::strategy::{adhoc_tu, const_tu, fail_tp, fail_tu, id_tp, MonoTp, MonoTu};
    use crate::term::parse_term;

    const P: EffectKind = EffectKind::Partial;
    const N: EffectKind = EffectKind::Nondet;

    fn sig() -> Signature {
        load_signature(
            "(sort Expr) (con Lit Expr (Int)) (con Add Expr (Expr Expr)) \
             (con Pair Expr (Int Int)) (con Nil Expr ())",
        )
        .unwrap()
    }

    fn count_algebra(kind: EffectKind) -> FoldAlgebra<usize> {
        FoldAlgebra::new(
            kind,
            move |_c, acc| Ok(Eff::pure(kind, acc + 1)),
            move |_| Ok(Eff::pure(kind, 0)),
        )
    }

    /// Reconstruction algebra: base keeps the head, steps re-attach children.
    fn rebuild_algebra(kind: EffectKind) -> FoldAlgebra<Vec<Term>> {
        FoldAlgebra::new(
            kind,
            move |c: &Term, mut acc: Vec<Term>| {
                acc.push(c.clone());
                Ok(Eff::pure(kind, acc))
            },
            move |_| Ok(Eff::pure(kind, Vec::new())),
        )
    }

    fn int_incr(kind: EffectKind) -> TP {
        let mono = MonoTp::new(SortName::int(), kind, move |t| match t.node() {
            crate::term::TermNode::Prim(Prim::Int(n)) => Ok(Eff::pure(kind, Term::int(n + 1))),
            _ => unreachable!(),
        });
        crate::strategy::adhoc_tp(&fail_tp(kind).unwrap(), &mono).unwrap()
    }

    fn return_int(kind: EffectKind) -> TU<i64> {
        let mono = MonoTu::new(SortName::int(), kind, move |t| match t.node() {
            crate::term::TermNode::Prim(Prim::Int(n)) => Ok(Eff::pure(kind, *n)),
            _ => unreachable!(),
        });
        adhoc_tu(&fail_tu(kind).unwrap(), &mono).unwrap()
    }

    #[test]
    fn hfoldr_counts_arity() {
        let sig = sig();
        let t = parse_term("(Add (Lit 1) (Lit 2))", &sig).unwrap();
        assert_eq!(hfoldr(&count_algebra(P), &t).unwrap(), Eff::Partial(Some(2)));
        assert_eq!(hfoldr(&count_algebra(P), &Term::int(3)).unwrap(), Eff::Partial(Some(0)));
    }

    #[test]
    fn hfoldr_rebuild_is_identity() {
        let sig = sig();
        for text in ["(Add (Lit 1) (Lit 2))", "(Nil)", "(Pair 1 2)", "(Lit 7)"] {
            let t = parse_term(text, &sig).unwrap();
            let kids = hfoldr(&rebuild_algebra(P), &t).unwrap();
            assert_eq!(kids.try_map(|k| t.rebuild(k)).unwrap(), Eff::Partial(Some(t)));
        }
    }

    #[test]
    fn hfoldr_sees_one_layer_only() {
        // collect-ints over (Add (Lit 1) (Lit 2)): the immediate children are
        // Lit nodes, not Int leaves, so nothing is collected at this layer.
        let sig = sig();
        let t = parse_term("(Add (Lit 1) (Lit 2))", &sig).unwrap();
        let ri = return_int(P);
        let alg = FoldAlgebra::new(
            P,
            move |c: &Term, mut acc: Vec<i64>| match ri.apply(c)? {
                Eff::Partial(Some(n)) => {
                    acc.push(n);
                    Ok(Eff::Partial(Some(acc)))
                }
                _ => Ok(Eff::Partial(Some(acc))),
            },
            |_| Ok(Eff::Partial(Some(Vec::new()))),
        );
        assert_eq!(hfoldr(&alg, &t).unwrap(), Eff::Partial(Some(vec![])));
    }

    #[test]
    fn all_tp_examples() {
        let sig = sig();
        let t = parse_term("(Pair 1 2)", &sig).unwrap();
        let out = all_tp(&int_incr(P)).apply(&t).unwrap();
        assert_eq!(out, Eff::Partial(Some(parse_term("(Pair 2 3)", &sig).unwrap())));

        let id = id_tp(P);
        let big = parse_term("(Add (Pair 1 2) (Lit 3))", &sig).unwrap();
        assert_eq!(all_tp(&id).apply(&big).unwrap(), Eff::Partial(Some(big.clone())));

        // fail on a node with children fails; on a nullary node it is vacuous
        let f = fail_tp(P).unwrap();
        let lit = parse_term("(Lit 1)", &sig).unwrap();
        assert_eq!(all_tp(&f).apply(&lit).unwrap(), Eff::Partial(None));
        let nil = parse_term("(Nil)", &sig).unwrap();
        assert_eq!(all_tp(&f).apply(&nil).unwrap(), Eff::Partial(Some(nil.clone())));
        assert_eq!(all_tp(&f).apply(&Term::int(1)).unwrap(), Eff::Partial(Some(Term::int(1))));
    }

    #[test]
    fn one_tp_partial_replaces_leftmost() {
        let sig = sig();
        let t = parse_term("(Pair 1 2)", &sig).unwrap();
        let out = one_tp(&int_incr(P)).unwrap().apply(&t).unwrap();
        assert_eq!(out, Eff::Partial(Some(parse_term("(Pair 2 2)", &sig).unwrap())));

        assert_eq!(one_tp(&int_incr(P)).unwrap().apply(&Term::int(1)).unwrap(), Eff::Partial(None));
    }

    #[test]
    fn one_tp_nondet_enumerates_single_replacements() {
        let sig = sig();
        let t = parse_term("(Pair 1 2)", &sig).unwrap();
        let out = one_tp(&int_incr(N)).unwrap().apply(&t).unwrap();
        assert_eq!(
            out,
            Eff::Nondet(vec![
                parse_term("(Pair 2 2)", &sig).unwrap(),
                parse_term("(Pair 1 3)", &sig).unwrap(),
            ])
        );
    }

    #[test]
    fn all_tu_examples() {
        let sig = sig();
        let t = parse_term("(Add (Lit 1) (Lit 2))", &sig).unwrap();
        let m = Monoid::new("sum", 0i64, |a: &i64, b: &i64| Ok(a + b));
        assert_eq!(
            all_tu(&m, &const_tu(P, 1i64)).apply(&t).unwrap(),
            Eff::Partial(Some(2))
        );

        let cat = Monoid::new("cat", Vec::<i64>::new(), |a: &Vec<i64>, b: &Vec<i64>| {
            Ok(a.iter().chain(b).copied().collect())
        });
        let singleton = {
            let ri = return_int(P);
            TU::new(P, move |t| ri.apply(t)?.try_map(|n| Ok(vec![n])))
        };
        let pair = parse_term("(Pair 1 2)", &sig).unwrap();
        assert_eq!(
            all_tu(&cat, &singleton).apply(&pair).unwrap(),
            Eff::Partial(Some(vec![1, 2]))
        );

        assert_eq!(all_tu(&m, &return_int(P)).apply(&Term::bool(true)).unwrap(), Eff::Partial(Some(0)));
    }

    #[test]
    fn one_tu_examples() {
        let sig = sig();
        let pair = parse_term("(Pair 1 2)", &sig).unwrap();
        assert_eq!(
            one_tu(&return_int(P)).unwrap().apply(&pair).unwrap(),
            Eff::Partial(Some(1))
        );
        assert_eq!(
            one_tu(&return_int(P)).unwrap().apply(&Term::int(9)).unwrap(),
            Eff::Partial(None)
        );
        assert_eq!(
            one_tu(&return_int(N)).unwrap().apply(&pair).unwrap(),
            Eff::Nondet(vec![1, 2])
        );
    }

    use crate::term::Prim;
}
