//! Algebraic laws of the combinators, as property tests over random terms
//! and a pool of randomly chosen strategies: seq/choice identities and
//! associativity, fail as choice-identity and seq-left-zero, skip laws, and
//! the adhoc dispatch equation with shadowing.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use termstrat::effects::monoid_registry;
use termstrat::gen::random_term;
use termstrat::schemes::{self, Flavor, Strat};
use termstrat::strategy::{
    adhoc_tp, choice_tp, fail_tp, id_tp, seq_tp, MonoTp, TP,
};
use termstrat::term::TermNode;
use termstrat::{load_signature, Eff, EffectKind, Signature, SortName, Term, Value};

const P: EffectKind = EffectKind::Partial;

fn sig() -> Signature {
    load_signature(
        "(sort Expr) (con Lit Expr (Int)) (con Flag Expr (Bool)) (con Add Expr (Expr Expr))",
    )
    .unwrap()
}

fn term_from_seed(seed: u64) -> Term {
    let sig = sig();
    let sort = SortName::new("Expr").unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    random_term(&sig, &sort, 6, &mut rng).unwrap()
}

/// Rewrite (Lit n) to (Lit n+k); fail elsewhere.
fn incr_lit(k: i64) -> TP {
    let sig = sig();
    TP::new(P, move |t| match t.node() {
        TermNode::App { con, children } if con == "Lit" => {
            let n = match children[0].prim_value() {
                Some(termstrat::Prim::Int(n)) => *n,
                _ => unreachable!("well-sorted Lit carries an Int"),
            };
            Ok(Eff::Partial(Some(
                Term::app(&sig, "Lit", vec![Term::int(n + k)]).unwrap(),
            )))
        }
        _ => Ok(Eff::Partial(None)),
    })
}

/// Swap the children of Add; fail elsewhere.
fn swap_add() -> TP {
    let sig = sig();
    TP::new(P, move |t| match t.node() {
        TermNode::App { con, children } if con == "Add" => Ok(Eff::Partial(Some(
            Term::app(&sig, "Add", vec![children[1].clone(), children[0].clone()]).unwrap(),
        ))),
        _ => Ok(Eff::Partial(None)),
    })
}

fn pool_strategy(pick: u8, k: i64) -> TP {
    match pick % 4 {
        0 => id_tp(P),
        1 => fail_tp(P).unwrap(),
        2 => incr_lit(k),
        _ => swap_add(),
    }
}

fn same(l: &TP, r: &TP, t: &Term) -> bool {
    l.apply(t).unwrap() == r.apply(t).unwrap()
}

proptest! {
    #[test]
    fn seq_identities_and_associativity(
        seed in any::<u64>(), pa in any::<u8>(), pb in any::<u8>(), pc in any::<u8>(),
        k in -5i64..5,
    ) {
        let t = term_from_seed(seed);
        let (a, b, c) = (pool_strategy(pa, k), pool_strategy(pb, k), pool_strategy(pc, k));
        let id = id_tp(P);
        prop_assert!(same(&seq_tp(&id, &a).unwrap(), &a, &t));
        prop_assert!(same(&seq_tp(&a, &id).unwrap(), &a, &t));
        let left = seq_tp(&seq_tp(&a, &b).unwrap(), &c).unwrap();
        let right = seq_tp(&a, &seq_tp(&b, &c).unwrap()).unwrap();
        prop_assert!(same(&left, &right, &t));
    }

    #[test]
    fn choice_identities_and_associativity(
        seed in any::<u64>(), pa in any::<u8>(), pb in any::<u8>(), pc in any::<u8>(),
        k in -5i64..5,
    ) {
        let t = term_from_seed(seed);
        let (a, b, c) = (pool_strategy(pa, k), pool_strategy(pb, k), pool_strategy(pc, k));
        let zero = fail_tp(P).unwrap();
        prop_assert!(same(&choice_tp(&zero, &a).unwrap(), &a, &t));
        prop_assert!(same(&choice_tp(&a, &zero).unwrap(), &a, &t));
        let left = choice_tp(&choice_tp(&a, &b).unwrap(), &c).unwrap();
        let right = choice_tp(&a, &choice_tp(&b, &c).unwrap()).unwrap();
        prop_assert!(same(&left, &right, &t));
    }

    #[test]
    fn fail_is_seq_left_zero(seed in any::<u64>(), pa in any::<u8>(), k in -5i64..5) {
        let t = term_from_seed(seed);
        let a = pool_strategy(pa, k);
        let zero = fail_tp(P).unwrap();
        prop_assert!(same(&seq_tp(&zero, &a).unwrap(), &zero, &t));
    }

    #[test]
    fn skip_is_comb_identity_for_tu(seed in any::<u64>()) {
        let t = term_from_seed(seed);
        let m = monoid_registry("list_concat").unwrap();
        // s yields the singleton list of the node's size
        let s = Strat::Tu(
            termstrat::TU::new(P, |t: &Term| {
                Ok(Eff::Partial(Some(Value::List(vec![Value::Int(t.size() as i64)]))))
            }),
            m.clone(),
        );
        let skip = schemes::skip(P, &Flavor::Tu(m));
        let l = schemes::comb(&skip, &s).unwrap();
        let r = schemes::comb(&s, &skip).unwrap();
        let want = s.as_tu().unwrap().apply(&t).unwrap();
        prop_assert_eq!(l.as_tu().unwrap().apply(&t).unwrap(), want.clone());
        prop_assert_eq!(r.as_tu().unwrap().apply(&t).unwrap(), want);
    }

    #[test]
    fn adhoc_dispatches_by_sort_and_shadows(
        seed in any::<u64>(), pa in any::<u8>(), k in -5i64..5,
    ) {
        let t = term_from_seed(seed);
        let poly = pool_strategy(pa, k);
        // mono on the Int sort, with a copy of its behaviour for the oracle
        let mono_fn = move |u: &Term| match u.prim_value() {
            Some(termstrat::Prim::Int(n)) => Ok(Eff::Partial(Some(Term::int(n + k)))),
            _ => Ok(Eff::Partial(None)),
        };
        let mono = MonoTp::new(SortName::int(), P, mono_fn);
        let s = adhoc_tp(&poly, &mono).unwrap();
        // dispatch equation at every node of the term
        let mut stack = vec![t.clone()];
        while let Some(u) = stack.pop() {
            let want = if *u.sort_of() == SortName::int() {
                mono_fn(&u).unwrap()
            } else {
                poly.apply(&u).unwrap()
            };
            prop_assert_eq!(s.apply(&u).unwrap(), want);
            stack.extend(u.children().iter().cloned());
        }
        // same-tag shadowing: the outer update wins
        let m1 = MonoTp::new(SortName::int(), P, |_| Ok(Eff::Partial(None)));
        let m2 = MonoTp::new(SortName::int(), P, mono_fn);
        let nested = adhoc_tp(&adhoc_tp(&poly, &m1).unwrap(), &m2).unwrap();
        let flat = adhoc_tp(&poly, &m2).unwrap();
        let mut stack = vec![t.clone()];
        while let Some(u) = stack.pop() {
            prop_assert_eq!(nested.apply(&u).unwrap(), flat.apply(&u).unwrap());
            stack.extend(u.children().iter().cloned());
        }
    }
}
