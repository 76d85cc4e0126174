use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{at_atoms, enumerate_types, guarded_clause, normalized, role_step, type_suffix, Type};
use crate::dl::{Cq, CqAtom, TBox};
use crate::ndl::{Atom, Program};
use crate::{Error, Result};

/// Distance layers `z⁰ … z^M` of a tree-shaped query from a root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceDecomposition {
    pub root: String,
    /// Each slice in variable order.
    pub slices: Vec<Vec<String>>,
    answer_vars: Vec<String>,
    /// Slice index of every variable.
    level: BTreeMap<String, usize>,
    atoms: Vec<CqAtom>,
}

impl SliceDecomposition {
    /// `M`.
    pub fn max_level(&self) -> usize {
        self.slices.len() - 1
    }

    /// `z^n_∃`.
    pub fn existential(&self, n: usize) -> Vec<String> {
        self.slices[n]
            .iter()
            .filter(|v| !self.answer_vars.contains(v))
            .cloned()
            .collect()
    }

    /// `q_n`: atoms over the slices `n..=M`.
    pub fn suffix_atoms(&self, n: usize) -> Vec<&CqAtom> {
        self.atoms
            .iter()
            .filter(|a| a.vars().iter().all(|v| self.level[*v] >= n))
            .collect()
    }

    /// `x^n = var(q_n) ∩ x`, in answer order.
    pub fn answers(&self, n: usize) -> Vec<String> {
        let vars: BTreeSet<&str> = self.suffix_atoms(n).into_iter().flat_map(|a| a.vars()).collect();
        self.answer_vars
            .iter()
            .filter(|v| vars.contains(v.as_str()) || self.level.get(*v) == Some(&n))
            .cloned()
            .collect()
    }

    pub fn level(&self, v: &str) -> Option<usize> {
        self.level.get(v).copied()
    }
}

/// Breadth-first layering from `root`.
pub fn slice(cq: &Cq, root: &str) -> Result<SliceDecomposition> {
    if !cq.is_tree_shaped() {
        return Err(Error::NotTreeShaped);
    }
    if cq.var_index(root).is_none() {
        return Err(Error::OutOfRange(format!("root `{root}` is not a query variable")));
    }
    let adj = cq.gaifman();
    let mut level: BTreeMap<String, usize> = BTreeMap::from([(root.to_string(), 0)]);
    let mut queue = VecDeque::from([root.to_string()]);
    while let Some(v) = queue.pop_front() {
        let l = level[&v];
        for u in &adj[&v] {
            if !level.contains_key(u) {
                level.insert(u.clone(), l + 1);
                queue.push_back(u.clone());
            }
        }
    }
    let m = level.values().copied().max().unwrap_or(0);
    let slices = (0..=m)
        .map(|n| cq.vars().iter().filter(|v| level[*v] == n).cloned().collect())
        .collect();
    Ok(SliceDecomposition {
        root: root.to_string(),
        slices,
        answer_vars: cq.answer_vars().to_vec(),
        level,
        atoms: cq.atoms().to_vec(),
    })
}

/// Answer variables are named, concept atoms are satisfied by the last role
/// and loops stay named.
pub fn locally_compatible(tbox: &TBox, w: &Type, slice: &[String], cq: &Cq) -> bool {
    slice.iter().all(|z| {
        let Some(word) = w.get(z) else { return true };
        if word.is_empty() {
            return true;
        }
        !cq.is_answer_var(z)
            && cq.atoms().iter().all(|a| match a {
                CqAtom::Concept(c, v) if v == z => tbox.anonymous_satisfies(word.last().unwrap(), c),
                CqAtom::Role(_, u, v) if u == z && v == z => false,
                _ => true,
            })
    })
}

/// Local compatibility of both types plus one of the three cases for every
/// role atom between the slices.
pub fn pair_compatible(tbox: &TBox, w: &Type, s: &Type, slice_n: &[String], slice_n1: &[String], cq: &Cq) -> bool {
    locally_compatible(tbox, w, slice_n, cq)
        && locally_compatible(tbox, s, slice_n1, cq)
        && cq.atoms().iter().all(|a| match a {
            CqAtom::Role(r, u, v) if u != v => {
                let get = |x: &String| w.get(x).filter(|_| slice_n.contains(x)).or_else(|| s.get(x).filter(|_| slice_n1.contains(x)));
                match (slice_n.contains(u) && slice_n1.contains(v), slice_n1.contains(u) && slice_n.contains(v)) {
                    (false, false) => true,
                    _ => match (get(u), get(v)) {
                        (Some(wu), Some(wv)) => role_step(tbox, r, wu, wv),
                        _ => true,
                    },
                }
            }
            _ => true,
        })
}

/// The linear slice rewriting over H-complete ABoxes, with goal `G`.
///
/// The default root is the first answer variable, or the first variable of
/// a Boolean query. A base clause whose body would be empty is left out and
/// its atom dropped from the clauses above it.
pub fn rewrite_slice(tbox: &TBox, cq: &Cq, root: Option<&str>) -> Result<Program> {
    let tbox = normalized(tbox)?;
    let words = tbox.all_words()?;
    if !cq.is_tree_shaped() {
        return Err(Error::NotTreeShaped);
    }
    let root = match root {
        Some(r) => r.to_string(),
        None => cq.answer_vars().first().unwrap_or(&cq.vars()[0]).clone(),
    };
    let sd = slice(cq, &root)?;
    let m = sd.max_level();
    let mut program = Program::new("G", cq.answer_vars().len());
    program.params.insert("G".into(), cq.answer_vars().to_vec());

    let types: Vec<Vec<Type>> = sd
        .slices
        .iter()
        .map(|z| enumerate_types(z, &words, &|ty: &Type| locally_compatible(&tbox, ty, z, cq)))
        .collect();
    let name = |n: usize, w: &Type| format!("P{n}{}", type_suffix(&sd.slices[n], w));
    let pred = |n: usize, w: &Type| {
        let args: Vec<String> = sd.existential(n).into_iter().chain(sd.answers(n)).collect();
        Atom::vars(name(n, w), &args)
    };
    let own_atoms = |n: usize| -> Vec<&CqAtom> {
        cq.atoms()
            .iter()
            .filter(|a| {
                let ls: Vec<usize> = a.vars().iter().map(|v| sd.level[*v]).collect();
                ls.contains(&n) && ls.iter().all(|&l| l == n || l == n + 1)
            })
            .collect()
    };

    let mut trivial: BTreeSet<String> = BTreeSet::new();
    let mut heads0: Vec<Atom> = Vec::new();
    let mut note = |n: usize, head: &Atom, program: &mut Program| {
        program.params.insert(head.predicate.clone(), sd.answers(n));
        if n == 0 && !heads0.contains(head) {
            heads0.push(head.clone());
        }
    };
    let mut clauses = Vec::new();
    for w in &types[m] {
        let body = at_atoms(own_atoms(m), w, &sd.slices[m]);
        let head = pred(m, w);
        if body.is_empty() && m > 0 {
            trivial.insert(head.predicate.clone());
            continue;
        }
        note(m, &head, &mut program);
        clauses.push(guarded_clause(head, body));
    }
    for n in (0..m).rev() {
        for w in &types[n] {
            for s in &types[n + 1] {
                if !pair_compatible(&tbox, w, s, &sd.slices[n], &sd.slices[n + 1], cq) {
                    continue;
                }
                let mut ws = w.clone();
                ws.extend(s.iter().map(|(k, v)| (k.clone(), v.clone())));
                let mut body = at_atoms(own_atoms(n), &ws, &sd.slices[n]);
                let next = pred(n + 1, s);
                if !trivial.contains(&next.predicate) {
                    body.push(next);
                }
                let head = pred(n, w);
                note(n, &head, &mut program);
                clauses.push(guarded_clause(head, body));
            }
        }
    }
    clauses.reverse();
    for head in &heads0 {
        program.push(guarded_clause(Atom::vars("G", cq.answer_vars()), vec![head.clone()]));
    }
    program.clauses.extend(clauses);
    Ok(program)
}
