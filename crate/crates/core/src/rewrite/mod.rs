//! The three NDL rewritings of OWL 2 QL OMQs.
//!
//! [`rewrite_td`] handles arbitrary CQs over TBoxes of finite depth through a
//! tree decomposition, [`rewrite_slice`] emits a linear program for
//! tree-shaped CQs over finite-depth TBoxes, and [`rewrite_tw`] covers
//! tree-shaped CQs over arbitrary TBoxes through tree witnesses. All three are
//! rewritings over H-complete ABoxes; lift them with
//! [`crate::ndl::lift_to_arbitrary`] or [`crate::ndl::lift_linear`].

mod slice;
mod td;
mod tw;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use crate::dl::{exists_concept_name, CqAtom, TBox, Word};
use crate::ndl::{Atom, Clause, Program};
use crate::Result;

pub use slice::{locally_compatible, pair_compatible, rewrite_slice, slice, SliceDecomposition};
pub use td::{
    build_subtree_index, compatible_types, parse_decomposition, rewrite_td, split_node, tree_decomposition,
    Subtree, SubtreeIndex, TreeDecomposition,
};
pub use tw::{decompose_sq, middle_vertex, rewrite_tw, Origin, Subquery, SubqueryRegistry};

/// A partial map from query variables to words of `W_T`; `ε` means the
/// variable is sent to a named individual.
pub type Type = BTreeMap<String, Word>;

pub(crate) fn normalized(tbox: &TBox) -> Result<Cow<'_, TBox>> {
    if tbox.is_normalized() {
        Ok(Cow::Borrowed(tbox))
    } else {
        Ok(Cow::Owned(tbox.normalize()?))
    }
}

/// The three conditions a type must meet on a single query atom whose
/// variables it assigns. Atoms with unassigned variables pass.
pub(crate) fn atom_compatible(tbox: &TBox, atom: &CqAtom, ty: &Type) -> bool {
    match atom {
        CqAtom::Concept(a, v) => match ty.get(v) {
            Some(w) => w.last().is_none_or(|r| tbox.anonymous_satisfies(r, a)),
            None => true,
        },
        CqAtom::Role(_, u, v) if u == v => ty.get(u).is_none_or(|w| w.is_empty()),
        CqAtom::Role(r, u, v) => {
            let (Some(wu), Some(wv)) = (ty.get(u), ty.get(v)) else {
                return true;
            };
            role_step(tbox, r, wu, wv)
        }
    }
}

/// `R(u, v)` with `u ↦ wu` and `v ↦ wv`: both named, or one is a child of
/// the other along a sub-role of `R` (respectively `R⁻`).
pub(crate) fn role_step(tbox: &TBox, r: &str, wu: &Word, wv: &Word) -> bool {
    let role = crate::dl::Role::new(r);
    if wu.is_empty() && wv.is_empty() {
        return true;
    }
    if let Some(last) = wv.strip_prefix(wu) {
        if tbox.subsumes_role(last, &role) {
            return true;
        }
    }
    if let Some(last) = wu.strip_prefix(wv) {
        if tbox.subsumes_role(last, &role.inverse()) {
            return true;
        }
    }
    false
}

/// `At^s`: the body atoms for the query atoms `atoms` under type `ty`, then
/// `A_S(u)` for every variable of `scope` sent to a word starting with `S`.
pub(crate) fn at_atoms<'a>(
    atoms: impl IntoIterator<Item = &'a CqAtom>,
    ty: &Type,
    scope: &[String],
) -> Vec<Atom> {
    let eps = |v: &str| ty.get(v).is_none_or(|w| w.is_empty());
    let mut out: Vec<Atom> = Vec::new();
    let push = |a: Atom, out: &mut Vec<Atom>| {
        if !out.contains(&a) {
            out.push(a);
        }
    };
    for atom in atoms {
        match atom {
            CqAtom::Concept(a, u) => {
                if eps(u) {
                    push(Atom::vars(a.clone(), &[u]), &mut out);
                }
            }
            CqAtom::Role(r, u, v) => {
                if eps(u) && eps(v) {
                    push(Atom::vars(r.clone(), &[u, v]), &mut out);
                } else if u != v {
                    push(Atom::eq(u.clone(), v.clone()), &mut out);
                }
            }
        }
    }
    for u in scope {
        if let Some(first) = ty.get(u).and_then(|w| w.first()) {
            push(Atom::vars(exists_concept_name(first), &[u]), &mut out);
        }
    }
    out
}

/// Builds a clause, adding a `v = v` guard for every head variable the body
/// does not bind: such a variable ranges over all individuals.
pub(crate) fn guarded_clause(head: Atom, mut body: Vec<Atom>) -> Clause {
    let bound: BTreeSet<String> = body.iter().flat_map(|a| a.variables()).map(str::to_string).collect();
    let missing: Vec<String> = head
        .variables()
        .filter(|v| !bound.contains(*v))
        .map(str::to_string)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for v in missing {
        body.push(Atom::eq(v.clone(), v));
    }
    Clause::new(head, body)
}

/// Keeps the clauses that are productive and reachable from the goal, where
/// every predicate in `declared` counts as IDB even without clauses.
pub(crate) fn prune_declared(program: &Program, declared: &BTreeSet<String>) -> Program {
    let mut productive: BTreeSet<&str> = BTreeSet::new();
    let usable = |c: &Clause, productive: &BTreeSet<&str>| {
        c.body
            .iter()
            .all(|a| !declared.contains(&a.predicate) || productive.contains(a.predicate.as_str()))
    };
    loop {
        let before = productive.len();
        for c in &program.clauses {
            if usable(c, &productive) {
                productive.insert(c.head.predicate.as_str());
            }
        }
        if productive.len() == before {
            break;
        }
    }
    let mut reachable: BTreeSet<&str> = BTreeSet::from([program.goal.as_str()]);
    let mut stack = vec![program.goal.as_str()];
    while let Some(p) = stack.pop() {
        for c in program.clauses.iter().filter(|c| c.head.predicate == p && usable(c, &productive)) {
            for a in &c.body {
                if declared.contains(&a.predicate) && reachable.insert(a.predicate.as_str()) {
                    stack.push(a.predicate.as_str());
                }
            }
        }
    }
    let clauses: Vec<Clause> = program
        .clauses
        .iter()
        .filter(|c| reachable.contains(c.head.predicate.as_str()) && usable(c, &productive))
        .cloned()
        .collect();
    let kept: BTreeSet<&str> = clauses.iter().map(|c| c.head.predicate.as_str()).collect();
    Program {
        params: program
            .params
            .iter()
            .filter(|(p, _)| kept.contains(p.as_str()) || **p == program.goal)
            .map(|(p, v)| (p.clone(), v.clone()))
            .collect(),
        clauses,
        goal: program.goal.clone(),
        goal_arity: program.goal_arity,
    }
}

/// Predicate-name suffix for the words of `vars` under `ty`.
pub(crate) fn type_suffix(vars: &[String], ty: &Type) -> String {
    vars.iter()
        .map(|v| format!("_{}", ty.get(v).map(|w| w.encode()).unwrap_or_else(|| "e".into())))
        .collect()
}

/// Every total map `vars → words` accepted by `ok`, extended one variable at
/// a time in order; `ok` is called on partial maps and must be monotone.
pub(crate) fn enumerate_types(vars: &[String], words: &[Word], ok: &dyn Fn(&Type) -> bool) -> Vec<Type> {
    fn go(i: usize, vars: &[String], words: &[Word], ok: &dyn Fn(&Type) -> bool, cur: &mut Type, out: &mut Vec<Type>) {
        if i == vars.len() {
            out.push(cur.clone());
            return;
        }
        for w in words {
            cur.insert(vars[i].clone(), w.clone());
            if ok(cur) {
                go(i + 1, vars, words, ok, cur, out);
            }
        }
        cur.remove(&vars[i]);
    }
    let mut out = Vec::new();
    go(0, vars, words, ok, &mut Type::new(), &mut out);
    out
}
