use std::collections::{BTreeMap, BTreeSet};

use super::{guarded_clause, normalized};
use crate::chase::{entails_from_concept, tree_witnesses, TreeWitness};
use crate::dl::{exists_concept_name, Cq, CqAtom, TBox};
use crate::ndl::{Atom, Clause, Program};
use crate::{Error, Result};

/// A vertex whose removal leaves components of at most `⌈n/2⌉` vertices:
/// the one with the smallest largest component, first in variable order.
/// With two variables and an existential one, the existential one is taken.
pub fn middle_vertex(cq: &Cq) -> Result<String> {
    if !cq.is_tree_shaped() {
        return Err(Error::NotTreeShaped);
    }
    let vars = cq.vars();
    if vars.len() == 2 {
        if let Some(v) = vars.iter().find(|v| !cq.is_answer_var(v)) {
            return Ok(v.clone());
        }
    }
    let adj = cq.gaifman();
    let largest = |v: &String| {
        let mut seen: BTreeSet<&str> = BTreeSet::from([v.as_str()]);
        adj[v]
            .iter()
            .map(|start| {
                let mut size = 0;
                let mut stack = vec![start.as_str()];
                seen.insert(start.as_str());
                while let Some(u) = stack.pop() {
                    size += 1;
                    for n in &adj[u] {
                        if seen.insert(n.as_str()) {
                            stack.push(n.as_str());
                        }
                    }
                }
                size
            })
            .max()
            .unwrap_or(0)
    };
    let mut best: Option<(usize, &String)> = None;
    for v in vars {
        let size = largest(v);
        if best.is_none_or(|(b, _)| size < b) {
            best = Some((size, v));
        }
    }
    Ok(best.expect("a query has a variable").1.clone())
}

/// How a subquery entered the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Root,
    /// From the neighbour rule applied to the given subquery.
    Neighbour(usize),
    /// From the tree-witness rule applied to the given subquery.
    Witness(usize),
}

/// A member `q(z)` of `SQ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subquery {
    /// Indices into the atoms of `q₀`.
    pub atoms: BTreeSet<usize>,
    pub z: BTreeSet<String>,
    /// `v_q`, unless every variable is in `z`.
    pub vertex: Option<String>,
    pub origin: Origin,
    /// Subqueries induced by the neighbours of `v_q`.
    pub neighbours: Vec<usize>,
    /// Tree witnesses with `t_r ≠ ∅` and `v_q ∈ t_i`, each with the
    /// subqueries for the components of `q` without `q_t`.
    pub witnesses: Vec<(TreeWitness, Vec<usize>)>,
}

/// `SQ` with `q₀` at index 0.
#[derive(Debug, Clone)]
pub struct SubqueryRegistry {
    pub queries: Vec<Subquery>,
    cq: Cq,
}

impl SubqueryRegistry {
    /// The subquery as a CQ with answer variables `z`, in the variable
    /// order of `q₀`.
    pub fn query(&self, i: usize) -> Cq {
        let q = &self.queries[i];
        let atoms: Vec<CqAtom> = q.atoms.iter().map(|&k| self.cq.atoms()[k].clone()).collect();
        let z: Vec<String> = self.cq.vars().iter().filter(|v| q.z.contains(*v)).cloned().collect();
        Cq::new(z, atoms)
    }

    /// `ν(P_q) = |q|` for every subquery predicate.
    pub fn weights(&self) -> BTreeMap<String, u64> {
        self.queries
            .iter()
            .enumerate()
            .map(|(i, q)| (format!("P{i}"), q.atoms.len() as u64))
            .collect()
    }

    fn vars(&self, atoms: &BTreeSet<usize>) -> BTreeSet<String> {
        atoms
            .iter()
            .flat_map(|&k| self.cq.atoms()[k].vars())
            .map(str::to_string)
            .collect()
    }

    fn register(&mut self, atoms: BTreeSet<usize>, z: BTreeSet<String>, origin: Origin) -> usize {
        if let Some(i) = self.queries.iter().position(|q| q.atoms == atoms && q.z == z) {
            return i;
        }
        self.queries.push(Subquery {
            atoms,
            z,
            vertex: None,
            origin,
            neighbours: Vec::new(),
            witnesses: Vec::new(),
        });
        self.queries.len() - 1
    }

    /// Splits `atoms` into classes connected through shared variables.
    fn components(&self, atoms: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
        let mut rest: Vec<usize> = atoms.iter().copied().collect();
        let mut out = Vec::new();
        while let Some(first) = rest.first().copied() {
            let mut comp = BTreeSet::from([first]);
            let mut vars: BTreeSet<&str> = self.cq.atoms()[first].vars().into_iter().collect();
            rest.remove(0);
            loop {
                let before = comp.len();
                rest.retain(|&k| {
                    let vs = self.cq.atoms()[k].vars();
                    if vs.iter().any(|v| vars.contains(v)) {
                        comp.insert(k);
                        vars.extend(vs);
                        false
                    } else {
                        true
                    }
                });
                if comp.len() == before {
                    break;
                }
            }
            out.push(comp);
        }
        out
    }
}

/// Closes `{q₀}` under the neighbour and tree-witness rules.
pub fn decompose_sq(tbox: &TBox, cq0: &Cq) -> Result<SubqueryRegistry> {
    if !cq0.is_tree_shaped() {
        return Err(Error::NotTreeShaped);
    }
    let tbox = normalized(tbox)?;
    let mut reg = SubqueryRegistry {
        queries: Vec::new(),
        cq: cq0.clone(),
    };
    let all: BTreeSet<usize> = (0..cq0.atoms().len()).collect();
    reg.register(all, cq0.answer_vars().iter().cloned().collect(), Origin::Root);
    let mut i = 0;
    while i < reg.queries.len() {
        let vars = reg.vars(&reg.queries[i].atoms);
        let z = reg.queries[i].z.clone();
        if vars.iter().all(|v| z.contains(v)) {
            i += 1;
            continue;
        }
        let q = reg.query(i);
        let v = middle_vertex(&q)?;
        let adj = q.gaifman();
        let mut neighbours = Vec::new();
        for u in &adj[&v] {
            // variables reachable from u without passing v
            let mut side: BTreeSet<&str> = BTreeSet::from([u.as_str()]);
            let mut stack = vec![u.as_str()];
            while let Some(x) = stack.pop() {
                for n in &adj[x] {
                    if n != &v && side.insert(n) {
                        stack.push(n);
                    }
                }
            }
            let atoms: BTreeSet<usize> = reg.queries[i]
                .atoms
                .iter()
                .copied()
                .filter(|&k| {
                    let vs = cq0.atoms()[k].vars();
                    vs.iter().all(|x| side.contains(x) || *x == v) && vs.iter().any(|x| side.contains(x))
                })
                .collect();
            let zi: BTreeSet<String> = reg
                .vars(&atoms)
                .into_iter()
                .filter(|x| z.contains(x) || *x == v)
                .collect();
            neighbours.push(reg.register(atoms, zi, Origin::Neighbour(i)));
        }
        let mut witnesses = Vec::new();
        for t in tree_witnesses(&tbox, &q)? {
            if t.t_r.is_empty() || !t.t_i.contains(&v) {
                continue;
            }
            let qt: BTreeSet<usize> = reg.queries[i]
                .atoms
                .iter()
                .copied()
                .filter(|&k| t.atoms.contains(&cq0.atoms()[k]))
                .collect();
            let rest: BTreeSet<usize> = reg.queries[i].atoms.difference(&qt).copied().collect();
            let mut parts = Vec::new();
            for comp in reg.components(&rest) {
                let zi: BTreeSet<String> = reg
                    .vars(&comp)
                    .into_iter()
                    .filter(|x| z.contains(x) || t.t_r.contains(x))
                    .collect();
                parts.push(reg.register(comp, zi, Origin::Witness(i)));
            }
            witnesses.push((t, parts));
        }
        let entry = &mut reg.queries[i];
        entry.vertex = Some(v);
        entry.neighbours = neighbours;
        entry.witnesses = witnesses;
        i += 1;
    }
    Ok(reg)
}

/// The tree-witness rewriting over H-complete ABoxes, with goal `P0`.
///
/// Subqueries all of whose variables are answer variables get no predicate
/// of their own: their atoms appear in the clauses that use them.
pub fn rewrite_tw(tbox: &TBox, cq0: &Cq) -> Result<Program> {
    let tbox = normalized(tbox)?;
    let reg = decompose_sq(&tbox, cq0)?;
    let answers = cq0.answer_vars();
    let mut program = Program::new("P0", answers.len());
    let head_of = |i: usize| -> Atom {
        let q = &reg.queries[i];
        let args: Vec<String> = cq0
            .vars()
            .iter()
            .filter(|v| q.z.contains(*v) && !cq0.is_answer_var(v))
            .chain(answers.iter().filter(|v| q.z.contains(*v)))
            .cloned()
            .collect();
        Atom::vars(format!("P{i}"), &args)
    };
    // a subquery with var(q) = z is inlined as its atoms
    let refer = |n: usize| -> Vec<Atom> {
        let q = &reg.queries[n];
        match q.vertex {
            Some(_) => vec![head_of(n)],
            None => q.atoms.iter().map(|&k| ndl_atom(&cq0.atoms()[k])).collect(),
        }
    };
    let mut clauses: Vec<Clause> = Vec::new();
    let mut push = |c: Clause| {
        if !clauses.contains(&c) {
            clauses.push(c);
        }
    };
    for (i, q) in reg.queries.iter().enumerate() {
        let Some(v) = &q.vertex else {
            if i == 0 {
                program.params.insert("P0".into(), answers.to_vec());
                push(guarded_clause(head_of(0), refer(0)));
            }
            continue;
        };
        let head = head_of(i);
        let params: Vec<String> = answers.iter().filter(|v| q.z.contains(*v)).cloned().collect();
        program.params.insert(head.predicate.clone(), params);
        let mut body: Vec<Atom> = q
            .atoms
            .iter()
            .map(|&k| &cq0.atoms()[k])
            .filter(|a| a.vars().iter().all(|x| x == v))
            .map(ndl_atom)
            .collect();
        body.extend(q.neighbours.iter().flat_map(|&n| refer(n)));
        push(guarded_clause(head.clone(), dedup(body)));
        for (t, parts) in &q.witnesses {
            let tr: Vec<&String> = t.t_r.iter().collect();
            for r in &t.generators {
                let mut body: Vec<Atom> = tr[1..].iter().map(|u| Atom::eq(tr[0].clone(), (*u).clone())).collect();
                body.extend(tr.iter().map(|u| Atom::vars(exists_concept_name(r), &[u])));
                body.extend(parts.iter().flat_map(|&n| refer(n)));
                push(guarded_clause(head.clone(), dedup(body)));
            }
        }
    }
    if cq0.is_boolean() {
        for a in tbox.concept_names() {
            if entails_from_concept(&tbox, a, cq0)? {
                push(Clause::new(Atom::vars("P0", &[] as &[&str]), vec![Atom::vars(a.clone(), &["x"])]));
            }
        }
    }
    program.clauses = clauses;
    Ok(program)
}

fn dedup(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::new();
    for a in atoms {
        if !out.contains(&a) {
            out.push(a);
        }
    }
    out
}

fn ndl_atom(a: &CqAtom) -> Atom {
    match a {
        CqAtom::Concept(c, v) => Atom::vars(c.clone(), &[v]),
        CqAtom::Role(r, u, v) => Atom::vars(r.clone(), &[u, v]),
    }
}
