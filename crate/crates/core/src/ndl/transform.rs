use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::program::{Atom, Clause, Program, Term};
use crate::dl::{BasicConcept, Role, TBox};
use crate::{Error, Result};

/// The least weight function: EDB predicates weigh 0 and every IDB
/// predicate `max(1, max over its clauses of the summed body weights)`.
pub fn infer_weight_function(program: &Program) -> Result<BTreeMap<String, u64>> {
    let order = program.topological_order()?;
    let defs = program.definitions();
    let mut nu: BTreeMap<String, u64> = BTreeMap::new();
    for p in order {
        let w = defs[p.as_str()]
            .iter()
            .map(|&i| {
                program.clauses[i]
                    .body
                    .iter()
                    .map(|a| nu.get(&a.predicate).copied().unwrap_or(0))
                    .fold(0u64, |s, x| s.saturating_add(x))
            })
            .max()
            .unwrap_or(0)
            .max(1);
        nu.insert(p, w);
    }
    Ok(nu)
}

/// Whether `nu` is a weight function: positive on every IDB predicate and
/// at least the summed body weights on every clause (EDB predicates weigh 0).
pub fn is_weight_function(program: &Program, nu: &BTreeMap<String, u64>) -> bool {
    let idb = program.idb();
    let weight = |p: &str| if idb.contains(p) { nu.get(p).copied() } else { Some(0) };
    idb.iter().all(|p| weight(p).is_some_and(|w| w > 0))
        && program.clauses.iter().all(|c| {
            let body: Option<u64> = c.body.iter().map(|a| weight(&a.predicate)).sum();
            matches!((weight(&c.head.predicate), body), (Some(h), Some(b)) if h >= b)
        })
}

/// Orders `vars` as non-parameters (in the given order) then parameters in
/// goal order.
fn order_vars(vars: &BTreeSet<String>, first_seen: &[String], goal_params: &[String]) -> (Vec<String>, Vec<String>) {
    let free: Vec<String> = first_seen
        .iter()
        .filter(|v| vars.contains(*v) && !goal_params.contains(v))
        .cloned()
        .collect();
    let params: Vec<String> = goal_params.iter().filter(|v| vars.contains(*v)).cloned().collect();
    (free, params)
}

fn fresh_atom(name: &str, free: &[String], params: &[String]) -> Atom {
    Atom::new(name, free.iter().chain(params).map(|v| Term::var(v.clone())).collect())
}

enum Node {
    Leaf(usize),
    Join(usize, usize),
}

/// Merges the two shallowest nodes until one is left; a join lies one level
/// above the deeper of its parts. Ties go to the lighter node, then to the
/// earlier one. Returns the join tree and the depth of its root.
fn merge_tree(leaves: &[(usize, u64)]) -> (Vec<Node>, usize) {
    let mut nodes: Vec<Node> = (0..leaves.len()).map(Node::Leaf).collect();
    let mut heap: BinaryHeap<Reverse<(usize, u64, usize)>> =
        leaves.iter().enumerate().map(|(i, &(d, w))| Reverse((d, w, i))).collect();
    while heap.len() > 1 {
        let Reverse((d1, w1, a)) = heap.pop().unwrap();
        let Reverse((d2, w2, b)) = heap.pop().unwrap();
        nodes.push(Node::Join(a, b));
        heap.push(Reverse((d1.max(d2) + 1, w1.saturating_add(w2), nodes.len() - 1)));
    }
    let Reverse((depth, _, _)) = heap.pop().unwrap();
    (nodes, depth)
}

/// Replaces every body with more than two atoms by a tree of binary clauses
/// built bottom-up from the shallowest atoms, with the weights `max(ν, 1)`
/// breaking ties. Repeated body atoms are dropped first.
pub fn to_skinny(program: &Program) -> Result<Program> {
    program.validate()?;
    let nu = infer_weight_function(program)?;
    let defs = program.definitions();
    // depth of every predicate in the output
    let mut depth: BTreeMap<String, usize> = BTreeMap::new();
    let leaves = |clause: &Clause, depth: &BTreeMap<String, usize>| -> Vec<(usize, u64)> {
        clause
            .body
            .iter()
            .map(|a| {
                let d = depth.get(&a.predicate).copied().unwrap_or(0);
                (d, nu.get(&a.predicate).copied().unwrap_or(0).max(1))
            })
            .collect()
    };
    // repeated body atoms are dropped
    let clauses: Vec<Clause> = program
        .clauses
        .iter()
        .map(|c| {
            let mut body: Vec<Atom> = Vec::new();
            for a in &c.body {
                if !body.contains(a) {
                    body.push(a.clone());
                }
            }
            Clause::new(c.head.clone(), body)
        })
        .collect();
    for p in program.topological_order()? {
        let d = defs[p.as_str()]
            .iter()
            .map(|&i| {
                let clause = &clauses[i];
                let ls = leaves(clause, &depth);
                match ls.len() {
                    0 => 0,
                    1 | 2 => 1 + ls.iter().map(|l| l.0).max().unwrap(),
                    _ => merge_tree(&ls).1,
                }
            })
            .max()
            .unwrap_or(0);
        depth.insert(p, d);
    }
    let ordered = !program.params.is_empty();
    let goal_params = program.goal_params().to_vec();
    let mut out = Program {
        clauses: Vec::new(),
        goal: program.goal.clone(),
        goal_arity: program.goal_arity,
        params: program.params.clone(),
    };
    for (ci, clause) in clauses.iter().enumerate() {
        if clause.body.len() <= 2 {
            out.push(clause.clone());
            continue;
        }
        let (nodes, _) = merge_tree(&leaves(clause, &depth));
        let root = nodes.len() - 1;
        let first_seen = clause.variables();
        let mut helpers: Vec<Clause> = Vec::new();
        let mut counter = 0;
        // returns the atom standing for node `n` and its variables
        #[allow(clippy::too_many_arguments)]
        fn realize(
            n: usize,
            nodes: &[Node],
            clause: &Clause,
            ci: usize,
            counter: &mut usize,
            first_seen: &[String],
            goal_params: &[String],
            ordered: bool,
            helpers: &mut Vec<Clause>,
            params: &mut BTreeMap<String, Vec<String>>,
        ) -> (Atom, BTreeSet<String>) {
            match nodes[n] {
                Node::Leaf(i) => {
                    let a = clause.body[i].clone();
                    let vs = a.variables().map(|v| v.to_string()).collect();
                    (a, vs)
                }
                Node::Join(l, r) => {
                    let (la, lv) = realize(l, nodes, clause, ci, counter, first_seen, goal_params, ordered, helpers, params);
                    let (ra, rv) = realize(r, nodes, clause, ci, counter, first_seen, goal_params, ordered, helpers, params);
                    let vars: BTreeSet<String> = lv.union(&rv).cloned().collect();
                    let name = format!("@h{ci}_{}", *counter);
                    *counter += 1;
                    let (free, ps) = order_vars(&vars, first_seen, goal_params);
                    let head = fresh_atom(&name, &free, &ps);
                    if ordered {
                        params.insert(name, ps);
                    }
                    helpers.push(Clause::new(head.clone(), vec![la, ra]));
                    (head, vars)
                }
            }
        }
        let Node::Join(l, r) = nodes[root] else { unreachable!() };
        let mut body = Vec::new();
        for child in [l, r] {
            let (atom, _) = realize(
                child,
                &nodes,
                clause,
                ci,
                &mut counter,
                &first_seen,
                &goal_params,
                ordered,
                &mut helpers,
                &mut out.params,
            );
            body.push(atom);
        }
        out.push(Clause::new(clause.head.clone(), body));
        out.clauses.extend(helpers);
    }
    Ok(out)
}

fn star(p: &str) -> String {
    format!("{p}*")
}

fn oriented(role: &Role, u: Term, v: Term) -> Atom {
    if role.inverse {
        Atom::new(role.name.clone(), vec![v, u])
    } else {
        Atom::new(role.name.clone(), vec![u, v])
    }
}

/// Atoms whose presence implies `atom` under the TBox, `atom` included.
/// `fresh` names the projected variable of existential concepts.
fn implying_atoms(tbox: &TBox, atom: &Atom, fresh: &str) -> Vec<Atom> {
    let mut out = vec![atom.clone()];
    match atom.args.as_slice() {
        [u] => {
            for b in tbox.sub_concepts(&BasicConcept::atomic(atom.predicate.clone())) {
                let implied = match b {
                    BasicConcept::Atomic(name) if name.starts_with('@') => continue,
                    BasicConcept::Atomic(name) => Atom::new(name, vec![u.clone()]),
                    BasicConcept::Exists(r) => oriented(&r, u.clone(), Term::var(fresh)),
                };
                if !out.contains(&implied) {
                    out.push(implied);
                }
            }
        }
        [u, v] => {
            for r in tbox.sub_roles(&Role::new(atom.predicate.clone())) {
                let implied = oriented(&r, u.clone(), v.clone());
                if !out.contains(&implied) {
                    out.push(implied);
                }
            }
        }
        _ => {}
    }
    out
}

/// Turns a rewriting over H-complete ABoxes into one over arbitrary ABoxes:
/// every predicate `S` becomes `S*`, and each EDB `S*` is defined by the
/// atoms implying `S`.
pub fn lift_to_arbitrary(program: &Program, tbox: &TBox) -> Result<Program> {
    let tbox = if tbox.is_normalized() { tbox.clone() } else { tbox.normalize()? };
    let rename = |a: &Atom| {
        if a.is_equality() {
            a.clone()
        } else {
            Atom::new(star(&a.predicate), a.args.clone())
        }
    };
    let mut out = Program {
        clauses: program
            .clauses
            .iter()
            .map(|c| Clause::new(rename(&c.head), c.body.iter().map(rename).collect()))
            .collect(),
        goal: star(&program.goal),
        goal_arity: program.goal_arity,
        params: program.params.iter().map(|(p, v)| (star(p), v.clone())).collect(),
    };
    for (pred, arity) in program.edb() {
        let vars: Vec<Term> = ["x", "y", "z"]
            .iter()
            .map(|v| Term::var(*v))
            .chain((3..arity).map(|i| Term::var(format!("x{i}"))))
            .take(arity)
            .collect();
        let template = Atom::new(pred.clone(), vars);
        let head = Atom::new(star(&pred), template.args.clone());
        for body in implying_atoms(&tbox, &template, "y") {
            out.push(Clause::new(head.clone(), vec![body]));
        }
    }
    Ok(out)
}

/// Linear rewriting over arbitrary ABoxes from a linear one over H-complete
/// ABoxes. Each clause `H ← I ∧ EQ ∧ E_1 ∧ … ∧ E_n` becomes a chain that
/// consumes one EDB atom per link, with one link variant per implying atom.
pub fn lift_linear(program: &Program, tbox: &TBox) -> Result<Program> {
    let tbox = if tbox.is_normalized() { tbox.clone() } else { tbox.normalize()? };
    let idb = program.idb();
    for c in &program.clauses {
        if c.body.iter().filter(|a| idb.contains(a.predicate.as_str())).count() > 1 {
            return Err(Error::NotLinear(c.to_string()));
        }
    }
    let ordered = !program.params.is_empty();
    let goal_params = program.goal_params().to_vec();
    let mut out = Program {
        clauses: Vec::new(),
        goal: program.goal.clone(),
        goal_arity: program.goal_arity,
        params: program.params.clone(),
    };
    for (ci, c) in program.clauses.iter().enumerate() {
        let idb_atom = c.body.iter().find(|a| idb.contains(a.predicate.as_str()));
        let eqs: Vec<Atom> = c.body.iter().filter(|a| a.is_equality()).cloned().collect();
        let edbs: Vec<&Atom> = c
            .body
            .iter()
            .filter(|a| !a.is_equality() && !idb.contains(a.predicate.as_str()))
            .collect();
        if edbs.is_empty() && idb_atom.is_none() {
            out.push(c.clone());
            continue;
        }
        let first_seen = c.variables();
        let vars_of = |atoms: &[&Atom]| -> BTreeSet<String> {
            atoms.iter().flat_map(|a| a.variables()).map(|v| v.to_string()).collect()
        };
        let mut tail: BTreeSet<String> = c.head.variables().map(|v| v.to_string()).collect();
        tail.extend(eqs.iter().flat_map(|a| a.variables()).map(|v| v.to_string()));
        let fresh = (0..)
            .map(|i| format!("@f{i}"))
            .find(|f| !first_seen.contains(f))
            .unwrap();
        let mut seen: BTreeSet<String> = idb_atom.map(|a| vars_of(&[a])).unwrap_or_default();
        let link = |k: usize, seen: &BTreeSet<String>, out: &mut Program| -> Atom {
            let mut later = tail.clone();
            later.extend(vars_of(&edbs[k..]));
            let z: BTreeSet<String> = seen.intersection(&later).cloned().collect();
            let (free, ps) = order_vars(&z, &first_seen, &goal_params);
            let name = format!("@l{ci}_{k}");
            if ordered {
                out.params.insert(name.clone(), ps.clone());
            }
            fresh_atom(&name, &free, &ps)
        };
        let mut prev: Option<Atom> = None;
        if let Some(i) = idb_atom {
            let h0 = link(0, &seen, &mut out);
            out.push(Clause::new(h0.clone(), vec![i.clone()]));
            prev = Some(h0);
        }
        for (k, e) in edbs.iter().enumerate() {
            seen.extend(e.variables().map(|v| v.to_string()));
            let h = link(k + 1, &seen, &mut out);
            for variant in implying_atoms(&tbox, e, &fresh) {
                let mut body: Vec<Atom> = prev.iter().cloned().collect();
                body.push(variant);
                out.push(Clause::new(h.clone(), body));
            }
            prev = Some(h);
        }
        let mut body = vec![prev.unwrap()];
        body.extend(eqs);
        out.push(Clause::new(c.head.clone(), body));
    }
    Ok(out)
}
