//! Recursive traversal schemes over strategies of either flavor: the
//! overloaded layer (`comb`/`skip`/`all`/`one`), the traversal knot
//! `traverse` with its full/once/stop instances, top-down environment
//! propagation, and the path-constrained schemes.
//!
//! Recursion depth is bounded by term depth; callers traversing very deep
//! terms (>= 1e5 levels) should run on a thread with a large stack, as the
//! bundled CLI does.

use std::sync::Arc;

use crate::effects::{Eff, EffectKind, Monoid};
use crate::error::{Error, Result};
use crate::onelayer::{all_tp, all_tu, one_tp, one_tu};
use crate::strategy::{
    choice_tp, choice_tu, const_tu, fail_tp, fail_tu, id_tp, seq_tp, Val, TP, TU,
};
use crate::term::Term;

/// A strategy of one of the two type schemes. The type-unifying side carries
/// the monoid used to combine results.
#[derive(Clone, Debug)]
pub enum Strat<A: Val> {
    Tp(TP),
    Tu(TU<A>, Monoid<A>),
}

/// Flavor selector for building strategies without a value at hand.
#[derive(Clone, Debug)]
pub enum Flavor<A> {
    Tp,
    Tu(Monoid<A>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Td,
    Bu,
}

impl<A: Val> Strat<A> {
    pub fn kind(&self) -> EffectKind {
        match self {
            Strat::Tp(s) => s.kind(),
            Strat::Tu(s, _) => s.kind(),
        }
    }

    pub fn flavor(&self) -> Flavor<A> {
        match self {
            Strat::Tp(_) => Flavor::Tp,
            Strat::Tu(_, m) => Flavor::Tu(m.clone()),
        }
    }

    pub fn as_tp(&self) -> Result<&TP> {
        match self {
            Strat::Tp(s) => Ok(s),
            Strat::Tu(..) => Err(Error::FlavorMismatch("expected TP, got TU".into())),
        }
    }

    pub fn as_tu(&self) -> Result<&TU<A>> {
        match self {
            Strat::Tu(s, _) => Ok(s),
            Strat::Tp(_) => Err(Error::FlavorMismatch("expected TU, got TP".into())),
        }
    }
}

fn check_kind(l: EffectKind, r: EffectKind) -> Result<()> {
    if l == r {
        Ok(())
    } else {
        Err(Error::KindMismatch(l.to_string(), r.to_string()))
    }
}

/// Overloaded combination: sequential composition for TP; for TU both sides
/// see the same term and the results are combined by the monoid, left result
/// as the left operand.
pub fn comb<A: Val>(l: &Strat<A>, r: &Strat<A>) -> Result<Strat<A>> {
    match (l, r) {
        (Strat::Tp(a), Strat::Tp(b)) => Ok(Strat::Tp(seq_tp(a, b)?)),
        (Strat::Tu(a, m), Strat::Tu(b, _)) => {
            check_kind(a.kind(), b.kind())?;
            let (a, b, m) = (a.clone(), b.clone(), m.clone());
            let mc = m.clone();
            let s = TU::new(a.kind(), move |t| {
                a.apply(t)?.try_bind(|va| b.apply(t)?.try_map(|vb| mc.combine(&va, &vb)))
            });
            Ok(Strat::Tu(s, m))
        }
        _ => Err(Error::FlavorMismatch("comb of TP with TU".into())),
    }
}

/// The always succeeding strategy: identity for TP, the monoid's empty for TU.
pub fn skip<A: Val>(kind: EffectKind, flavor: &Flavor<A>) -> Strat<A> {
    match flavor {
        Flavor::Tp => Strat::Tp(id_tp(kind)),
        Flavor::Tu(m) => Strat::Tu(const_tu(kind, m.empty()), m.clone()),
    }
}

/// The always failing strategy in either flavor.
pub fn fail<A: Val>(kind: EffectKind, flavor: &Flavor<A>) -> Result<Strat<A>> {
    match flavor {
        Flavor::Tp => Ok(Strat::Tp(fail_tp(kind)?)),
        Flavor::Tu(m) => Ok(Strat::Tu(fail_tu(kind)?, m.clone())),
    }
}

/// Overloaded one-layer `all`.
pub fn all<A: Val>(s: &Strat<A>) -> Strat<A> {
    match s {
        Strat::Tp(s) => Strat::Tp(all_tp(s)),
        Strat::Tu(s, m) => Strat::Tu(all_tu(m, s), m.clone()),
    }
}

/// Overloaded one-layer `one`.
pub fn one<A: Val>(s: &Strat<A>) -> Result<Strat<A>> {
    match s {
        Strat::Tp(s) => Ok(Strat::Tp(one_tp(s)?)),
        Strat::Tu(s, m) => Ok(Strat::Tu(one_tu(s)?, m.clone())),
    }
}

/// Overloaded alternative composition.
pub fn choice<A: Val>(l: &Strat<A>, r: &Strat<A>) -> Result<Strat<A>> {
    match (l, r) {
        (Strat::Tp(a), Strat::Tp(b)) => Ok(Strat::Tp(choice_tp(a, b)?)),
        (Strat::Tu(a, m), Strat::Tu(b, _)) => Ok(Strat::Tu(choice_tu(a, b)?, m.clone())),
        _ => Err(Error::FlavorMismatch("choice of TP with TU".into())),
    }
}

pub type CombineOp<A> = Arc<dyn Fn(&Strat<A>, &Strat<A>) -> Result<Strat<A>> + Send + Sync>;
pub type DescendOp<A> = Arc<dyn Fn(&Strat<A>) -> Result<Strat<A>> + Send + Sync>;

/// The recursive traversal knot: the unique strategy satisfying
/// `traverse(op, d, f) = op(f, d(traverse(op, d, f)))`. The knot is unrolled
/// lazily, one layer per application, so it terminates on finite terms
/// whenever `d` strictly descends.
pub fn traverse<A: Val>(op: CombineOp<A>, descend: DescendOp<A>, f: &Strat<A>) -> Strat<A> {
    let kind = f.kind();
    let build = {
        let (op, descend, f) = (op.clone(), descend.clone(), f.clone());
        move || -> Result<Strat<A>> {
            let inner = traverse(op.clone(), descend.clone(), &f);
            op(&f, &descend(&inner)?)
        }
    };
    match f {
        Strat::Tp(_) => Strat::Tp(TP::new(kind, move |t| build()?.as_tp()?.apply(t))),
        Strat::Tu(_, m) => {
            Strat::Tu(TU::new(kind, move |t| build()?.as_tu()?.apply(t)), m.clone())
        }
    }
}

fn op_comb<A: Val>(dir: Direction) -> CombineOp<A> {
    match dir {
        Direction::Td => Arc::new(|f, d| comb(f, d)),
        Direction::Bu => Arc::new(|f, d| comb(d, f)),
    }
}

fn op_choice<A: Val>(dir: Direction) -> CombineOp<A> {
    match dir {
        Direction::Td => Arc::new(|f, d| choice(f, d)),
        Direction::Bu => Arc::new(|f, d| choice(d, f)),
    }
}

/// Full traversal: every node is processed; top-down applies the strategy
/// before descending, bottom-up after.
pub fn full<A: Val>(dir: Direction, f: &Strat<A>) -> Strat<A> {
    traverse(op_comb(dir), Arc::new(|s: &Strat<A>| Ok(all(s))), f)
}

/// Single-hit traversal: succeeds at the first node (preorder for td,
/// postorder for bu) where the strategy succeeds; fails if none does.
pub fn once<A: Val>(dir: Direction, f: &Strat<A>) -> Result<Strat<A>> {
    if !f.kind().supports_zero() {
        return Err(Error::UnsupportedEffect);
    }
    Ok(traverse(op_choice(dir), Arc::new(|s: &Strat<A>| one(s)), f))
}

/// Cut-off traversal: where the strategy succeeds descent stops; elsewhere
/// every child subtree must be traversed successfully.
pub fn stop<A: Val>(dir: Direction, f: &Strat<A>) -> Result<Strat<A>> {
    if !f.kind().supports_zero() {
        return Err(Error::UnsupportedEffect);
    }
    Ok(traverse(op_choice(dir), Arc::new(|s: &Strat<A>| Ok(all(s))), f))
}

pub fn full_td<A: Val>(f: &Strat<A>) -> Strat<A> {
    full(Direction::Td, f)
}
pub fn full_bu<A: Val>(f: &Strat<A>) -> Strat<A> {
    full(Direction::Bu, f)
}
pub fn once_td<A: Val>(f: &Strat<A>) -> Result<Strat<A>> {
    once(Direction::Td, f)
}
pub fn once_bu<A: Val>(f: &Strat<A>) -> Result<Strat<A>> {
    once(Direction::Bu, f)
}
pub fn stop_td<A: Val>(f: &Strat<A>) -> Result<Strat<A>> {
    stop(Direction::Td, f)
}
pub fn stop_bu<A: Val>(f: &Strat<A>) -> Result<Strat<A>> {
    stop(Direction::Bu, f)
}

pub type EnvStrategy<A, E> = Arc<dyn Fn(&E) -> Result<Strat<A>> + Send + Sync>;
pub type EnvUpdate<E> = Arc<dyn Fn(&E, &Term) -> Result<Eff<E>> + Send + Sync>;

fn make_pe<A: Val, E: Val>(
    once_mode: bool,
    kind: EffectKind,
    flavor: Flavor<A>,
    f: EnvStrategy<A, E>,
    u: EnvUpdate<E>,
    env: E,
) -> Strat<A> {
    // The environment for the children is computed from the incoming node,
    // before the node itself is processed. Effect failure of `u` propagates
    // as failure of the node.
    let step = {
        let flavor = flavor.clone();
        let (f, u) = (f.clone(), u.clone());
        move |env: &E, e2: E| -> Result<Strat<A>> {
            let cur = f(env)?;
            check_kind(kind, cur.kind())?;
            let inner = make_pe(once_mode, kind, flavor.clone(), f.clone(), u.clone(), e2);
            if once_mode {
                choice(&cur, &one(&inner)?)
            } else {
                comb(&cur, &all(&inner))
            }
        }
    };
    match flavor {
        Flavor::Tp => {
            let u = u.clone();
            Strat::Tp(TP::new(kind, move |t| {
                let envs = u(&env, t)?;
                check_kind(kind, envs.kind())?;
                envs.try_bind(|e2| step(&env, e2)?.as_tp()?.apply(t))
            }))
        }
        Flavor::Tu(ref m) => {
            let m = m.clone();
            let u = u.clone();
            Strat::Tu(
                TU::new(kind, move |t| {
                    let envs = u(&env, t)?;
                    check_kind(kind, envs.kind())?;
                    envs.try_bind(|e2| step(&env, e2)?.as_tu()?.apply(t))
                }),
                m,
            )
        }
    }
}

/// Full top-down traversal with environment propagation: at each node the
/// strategy for the current environment is combined with descent under the
/// updated environment.
pub fn full_tdpe<A: Val, E: Val>(
    kind: EffectKind,
    flavor: Flavor<A>,
    f: EnvStrategy<A, E>,
    u: EnvUpdate<E>,
    e0: E,
) -> Strat<A> {
    make_pe(false, kind, flavor, f, u, e0)
}

/// Single-hit top-down traversal with environment propagation.
pub fn once_tdpe<A: Val, E: Val>(
    kind: EffectKind,
    flavor: Flavor<A>,
    f: EnvStrategy<A, E>,
    u: EnvUpdate<E>,
    e0: E,
) -> Result<Strat<A>> {
    if !kind.supports_zero() {
        return Err(Error::UnsupportedEffect);
    }
    Ok(make_pe(true, kind, flavor, f, u, e0))
}

/// Predicates are type-unifying strategies over unit: success encodes truth.
pub type Predicate = TU<()>;

pub fn unit_monoid() -> Monoid<()> {
    Monoid::new("unit", (), |_, _| Ok(()))
}

/// An always-true predicate.
pub fn true_pred(kind: EffectKind) -> Predicate {
    const_tu(kind, ())
}

fn pred_strat(p: &Predicate) -> Strat<()> {
    Strat::Tu(p.clone(), unit_monoid())
}

fn strat_pred(s: Strat<()>) -> Result<Predicate> {
    Ok(s.as_tu()?.clone())
}

/// Both on the same term: `p` must succeed, then `q` runs.
pub fn pred_seq(p: &Predicate, q: &Predicate) -> Result<Predicate> {
    check_kind(p.kind(), q.kind())?;
    let (p, q) = (p.clone(), q.clone());
    Ok(TU::new(p.kind(), move |t| p.apply(t)?.try_bind(|()| q.apply(t))))
}

/// Constrain a strategy by a predicate on the same term.
pub fn guarded<A: Val>(p: &Predicate, s: &Strat<A>) -> Result<Strat<A>> {
    check_kind(p.kind(), s.kind())?;
    let p = p.clone();
    match s {
        Strat::Tp(tp) => {
            let tp = tp.clone();
            Ok(Strat::Tp(TP::new(tp.kind(), move |t| p.apply(t)?.try_bind(|()| tp.apply(t)))))
        }
        Strat::Tu(tu, m) => {
            let tu = tu.clone();
            let s = TU::new(tu.kind(), move |t| p.apply(t)?.try_bind(|()| tu.apply(t)));
            Ok(Strat::Tu(s, m.clone()))
        }
    }
}

/// Does `p` hold anywhere in the subtree (preorder first hit)?
pub fn once_td_pred(p: &Predicate) -> Result<Predicate> {
    strat_pred(once_td(&pred_strat(p))?)
}

fn one_pred(p: &Predicate) -> Result<Predicate> {
    strat_pred(one(&pred_strat(p))?)
}

/// Process a subterm at or below a node satisfying `p`.
pub fn beloweq<A: Val>(p: &Predicate, f: &Strat<A>) -> Result<Strat<A>> {
    once_td(&guarded(p, &once_td(f)?)?)
}

/// Process a node whose subtree (including itself) satisfies `p` somewhere.
pub fn aboveeq<A: Val>(p: &Predicate, f: &Strat<A>) -> Result<Strat<A>> {
    once_td(&guarded(&once_td_pred(p)?, f)?)
}

/// Process a subterm strictly below a node satisfying `p`.
pub fn below<A: Val>(p: &Predicate, f: &Strat<A>) -> Result<Strat<A>> {
    once_td(&guarded(p, &one(&once_td(f)?)?)?)
}

/// Process a node with a `p`-witness strictly inside it.
pub fn above<A: Val>(p: &Predicate, f: &Strat<A>) -> Result<Strat<A>> {
    once_td(&guarded(&one_pred(&once_td_pred(p)?)?, f)?)
}

/// A strictly nested chain of predicate-witnessing ancestors above the
/// processed subterm, matched outermost-first.
pub fn belowlist<A: Val>(ps: &[Predicate], f: &Strat<A>) -> Result<Strat<A>> {
    match ps.split_first() {
        None => once_td(f),
        Some((p, rest)) => once_td(&guarded(p, &one(&belowlist(rest, f)?)?)?),
    }
}

fn chain(kind: EffectKind, ps: &[Predicate]) -> Result<Predicate> {
    match ps.split_first() {
        None => Ok(true_pred(kind)),
        Some((p, rest)) => one_pred(&once_td_pred(&pred_seq(p, &chain(kind, rest)?)?)?),
    }
}

/// A strictly descending witness chain below the processed node.
pub fn abovelist<A: Val>(ps: &[Predicate], f: &Strat<A>) -> Result<Strat<A>> {
    once_td(&guarded(&chain(f.kind(), ps)?, f)?)
}

/// Combine an ancestor chain constraint with a descendant chain constraint.
pub fn prepost<A: Val>(f: &Strat<A>, pre_ps: &[Predicate], post_ps: &[Predicate]) -> Result<Strat<A>> {
    belowlist(pre_ps, &guarded(&chain(f.kind(), post_ps)?, f)?)
}
