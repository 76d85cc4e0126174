use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use crate::dl::ABox;
use crate::ndl::{Atom, Clause, Term};

pub(crate) type Tuple = Vec<u32>;

/// A set of tuples with lazily built hash indices keyed by the bound
/// positions.
#[derive(Debug, Default)]
pub(crate) struct Relation {
    pub tuples: Vec<Tuple>,
    indices: RefCell<HashMap<u64, HashMap<Tuple, Vec<u32>>>>,
}

impl Relation {
    pub fn from_set(set: HashSet<Tuple>) -> Self {
        let mut tuples: Vec<Tuple> = set.into_iter().collect();
        tuples.sort_unstable();
        Relation {
            tuples,
            indices: RefCell::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    fn matching(&self, mask: u64, key: &Tuple) -> Vec<u32> {
        let mut indices = self.indices.borrow_mut();
        let index = indices.entry(mask).or_insert_with(|| {
            let mut index: HashMap<Tuple, Vec<u32>> = HashMap::new();
            for (i, t) in self.tuples.iter().enumerate() {
                let k = t
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| mask & (1 << p) != 0)
                    .map(|(_, v)| *v)
                    .collect();
                index.entry(k).or_default().push(i as u32);
            }
            index
        });
        index.get(key).cloned().unwrap_or_default()
    }
}

/// Interned ABox facts: the domain is `ind(A)`.
pub(crate) struct Database {
    pub names: Vec<String>,
    pub ids: HashMap<String, u32>,
    pub relations: HashMap<String, Relation>,
}

impl Database {
    pub fn new(abox: &ABox) -> Self {
        let names: Vec<String> = abox.individuals().into_iter().collect();
        let ids: HashMap<String, u32> = names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        let mut sets: HashMap<String, HashSet<Tuple>> = HashMap::new();
        for (c, a) in abox.concept_facts() {
            sets.entry(c.clone()).or_default().insert(vec![ids[a]]);
        }
        for (p, a, b) in abox.role_facts() {
            sets.entry(p.clone()).or_default().insert(vec![ids[a], ids[b]]);
        }
        Database {
            names,
            ids,
            relations: sets.into_iter().map(|(p, s)| (p, Relation::from_set(s))).collect(),
        }
    }

    pub fn domain_size(&self) -> usize {
        self.names.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Arg {
    Var(usize),
    /// A constant; `None` when it is not an individual of the ABox.
    Const(Option<u32>),
}

#[derive(Debug, Clone)]
pub(crate) struct CAtom {
    pub predicate: String,
    pub equality: bool,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone)]
pub(crate) struct CClause {
    pub head: CAtom,
    pub body: Vec<CAtom>,
    pub var_count: usize,
}

pub(crate) fn compile(clause: &Clause, ids: &HashMap<String, u32>) -> CClause {
    let vars = clause.variables();
    let pos: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let atom = |a: &Atom| CAtom {
        predicate: a.predicate.clone(),
        equality: a.is_equality(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Arg::Var(pos[v.as_str()]),
                Term::Const(c) => Arg::Const(ids.get(c).copied()),
            })
            .collect(),
    };
    CClause {
        head: atom(&clause.head),
        body: clause.body.iter().map(atom).collect(),
        var_count: vars.len(),
    }
}

pub(crate) fn value(arg: Arg, binding: &[Option<u32>]) -> Option<u32> {
    match arg {
        Arg::Var(i) => binding[i],
        Arg::Const(c) => c,
    }
}

/// Enumerates every extension of `binding` satisfying all `atoms`, reading
/// non-equality atoms from `relations` (absent relations are empty).
/// The next atom is the one with the most bound arguments, then the
/// smallest relation, then the earliest position.
pub(crate) fn join(
    atoms: &[CAtom],
    relations: &[Option<&Relation>],
    domain: usize,
    binding: &mut Vec<Option<u32>>,
    emit: &mut dyn FnMut(&[Option<u32>]),
) {
    if atoms.iter().flat_map(|a| &a.args).any(|a| *a == Arg::Const(None)) {
        return;
    }
    let mut done = vec![false; atoms.len()];
    step(atoms, relations, domain, binding, &mut done, emit);
}

fn step(
    atoms: &[CAtom],
    relations: &[Option<&Relation>],
    domain: usize,
    binding: &mut Vec<Option<u32>>,
    done: &mut Vec<bool>,
    emit: &mut dyn FnMut(&[Option<u32>]),
) {
    let mut best: Option<(usize, usize, usize)> = None;
    for (i, a) in atoms.iter().enumerate() {
        if done[i] {
            continue;
        }
        let bound = a.args.iter().filter(|&&x| value(x, binding).is_some()).count();
        let size = if a.equality {
            if bound > 0 {
                1
            } else {
                domain
            }
        } else {
            relations[i].map_or(0, |r| r.len())
        };
        let better = match best {
            None => true,
            Some((_, b, s)) => bound > b || (bound == b && size < s),
        };
        if better {
            best = Some((i, bound, size));
        }
    }
    let Some((i, _, _)) = best else {
        emit(binding);
        return;
    };
    done[i] = true;
    let atom = &atoms[i];
    if atom.equality {
        let (l, r) = (atom.args[0], atom.args[1]);
        match (value(l, binding), value(r, binding)) {
            (Some(x), Some(y)) => {
                if x == y {
                    step(atoms, relations, domain, binding, done, emit);
                }
            }
            (Some(x), None) | (None, Some(x)) => {
                let Arg::Var(free) = (if value(l, binding).is_none() { l } else { r }) else {
                    unreachable!()
                };
                binding[free] = Some(x);
                step(atoms, relations, domain, binding, done, emit);
                binding[free] = None;
            }
            (None, None) => {
                let (Arg::Var(a), Arg::Var(b)) = (l, r) else { unreachable!() };
                for x in 0..domain as u32 {
                    binding[a] = Some(x);
                    binding[b] = Some(x);
                    step(atoms, relations, domain, binding, done, emit);
                }
                binding[a] = None;
                binding[b] = None;
            }
        }
        done[i] = false;
        return;
    }
    let Some(rel) = relations[i] else {
        done[i] = false;
        return;
    };
    let mut mask = 0u64;
    let mut key = Vec::new();
    for (p, &a) in atom.args.iter().enumerate() {
        if let Some(v) = value(a, binding) {
            mask |= 1 << p;
            key.push(v);
        }
    }
    let candidates: Vec<u32> = if mask == 0 {
        (0..rel.len() as u32).collect()
    } else {
        rel.matching(mask, &key)
    };
    let mut assigned: Vec<usize> = Vec::new();
    for t in candidates {
        let tuple = &rel.tuples[t as usize];
        let mut ok = true;
        for (p, &a) in atom.args.iter().enumerate() {
            if let Arg::Var(v) = a {
                match binding[v] {
                    Some(x) if x != tuple[p] => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        binding[v] = Some(tuple[p]);
                        assigned.push(v);
                    }
                }
            }
        }
        if ok {
            step(atoms, relations, domain, binding, done, emit);
        }
        for v in assigned.drain(..) {
            binding[v] = None;
        }
    }
    done[i] = false;
}
