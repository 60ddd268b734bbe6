//! Random generation of well-sorted terms for a signature. Used by the
//! property and acceptance tests; deterministic given the RNG seed.

use std::collections::BTreeMap;

use rand::prelude::*;

use crate::signature::{ConstructorDecl, Signature, SortName};
use crate::term::Term;

/// Minimal derivation depth per generatable sort, computed by fixpoint.
fn min_depths(sig: &Signature) -> BTreeMap<SortName, usize> {
    let mut depth: BTreeMap<SortName, usize> = BTreeMap::new();
    for b in [SortName::int(), SortName::bool(), SortName::str(), SortName::unit()] {
        depth.insert(b, 1);
    }
    loop {
        let mut changed = false;
        for con in sig.constructors() {
            let args: Option<usize> =
                con.args.iter().map(|a| depth.get(a).copied()).try_fold(0usize, |m, d| {
                    d.map(|d| m.max(d))
                });
            if let Some(max_arg) = args {
                let cand = 1 + max_arg;
                let cur = depth.get(&con.result).copied();
                if cur.map_or(true, |c| cand < c) {
                    depth.insert(con.result.clone(), cand);
                    changed = true;
                }
            }
        }
        if !changed {
            return depth;
        }
    }
}

fn random_prim(sort: &SortName, rng: &mut impl Rng) -> Term {
    match sort.as_str() {
        "Int" => Term::int(rng.gen_range(-9..10)),
        "Bool" => Term::bool(rng.gen()),
        "Str" => {
            let n = rng.gen_range(0..4);
            let s: String = (0..n).map(|_| rng.gen_range(b'a'..=b'd') as char).collect();
            Term::str(s)
        }
        _ => Term::unit(),
    }
}

/// Generate a random well-sorted term of the given sort with bounded depth.
/// Returns `None` when no finite term of that sort exists.
pub fn random_term(
    sig: &Signature,
    sort: &SortName,
    max_depth: usize,
    rng: &mut impl Rng,
) -> Option<Term> {
    let depths = min_depths(sig);
    gen_at(sig, &depths, sort, max_depth.max(*depths.get(sort)?), rng)
}

fn gen_at(
    sig: &Signature,
    depths: &BTreeMap<SortName, usize>,
    sort: &SortName,
    budget: usize,
    rng: &mut impl Rng,
) -> Option<Term> {
    if sort.is_builtin() {
        return Some(random_prim(sort, rng));
    }
    let generatable: Vec<&ConstructorDecl> = sig
        .constructors()
        .filter(|c| {
            &c.result == sort && c.args.iter().all(|a| depths.contains_key(a))
        })
        .collect();
    if generatable.is_empty() {
        return None;
    }
    let fitting: Vec<&&ConstructorDecl> = generatable
        .iter()
        .filter(|c| 1 + c.args.iter().map(|a| depths[a]).max().unwrap_or(0) <= budget)
        .collect();
    let con = if fitting.is_empty() {
        // over budget everywhere: take a minimal-depth constructor to terminate
        *generatable
            .iter()
            .min_by_key(|c| c.args.iter().map(|a| depths[a]).max().unwrap_or(0))
            .unwrap()
    } else {
        *fitting[rng.gen_range(0..fitting.len())]
    };
    let next = budget.saturating_sub(1);
    let mut children = Vec::with_capacity(con.args.len());
    for a in &con.args {
        children.push(gen_at(sig, depths, a, next, rng)?);
    }
    Some(Term::app(sig, &con.name, children).expect("generator builds well-sorted terms"))
}
