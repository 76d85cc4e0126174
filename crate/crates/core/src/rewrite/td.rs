use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{at_atoms, atom_compatible, enumerate_types, guarded_clause, normalized, prune_declared, type_suffix, Type};
use crate::dl::{Cq, CqAtom, TBox, Word};
use crate::ndl::{Atom, Program};
use crate::{Error, Result};

/// A tree decomposition of the Gaifman graph of a query. Node ids are
/// arbitrary; "ascending id order" refers to them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: BTreeMap<usize, Vec<String>>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn width(&self) -> usize {
        self.bags.values().map(|b| b.len()).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn neighbours(&self, t: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == t { Some(b) } else if b == t { Some(a) } else { None })
            .collect();
        out.sort_unstable();
        out
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        self.edges.insert((a.min(b), a.max(b)));
    }

    /// Checks the tree shape and the three decomposition conditions.
    pub fn check(&self, cq: &Cq) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidUserDecomposition(m));
        if self.bags.is_empty() {
            return bad("no bags".into());
        }
        for &(a, b) in &self.edges {
            if !self.bags.contains_key(&a) || !self.bags.contains_key(&b) || a == b {
                return bad(format!("edge {a} {b} does not join two distinct bags"));
            }
        }
        let all: BTreeSet<usize> = self.bags.keys().copied().collect();
        if self.edges.len() + 1 != self.bags.len() || self.component(&all, *self.bags.keys().next().unwrap()).len() != all.len() {
            return bad("bags do not form a tree".into());
        }
        for v in self.bags.values().flatten() {
            if cq.var_index(v).is_none() {
                return bad(format!("bag variable `{v}` is not a query variable"));
            }
        }
        for v in cq.vars() {
            let holding: BTreeSet<usize> = self.bags.iter().filter(|(_, b)| b.contains(v)).map(|(&t, _)| t).collect();
            let Some(&first) = holding.iter().next() else {
                return bad(format!("variable `{v}` is in no bag"));
            };
            if self.component(&holding, first).len() != holding.len() {
                return bad(format!("bags holding `{v}` are not connected"));
            }
        }
        for atom in cq.atoms() {
            let vars = atom.vars();
            if !self.bags.values().any(|b| vars.iter().all(|v| b.iter().any(|x| x == v))) {
                return bad(format!("no bag covers the atom {atom}"));
            }
        }
        Ok(())
    }

    /// Nodes of `within` connected to `start` inside `within`.
    fn component(&self, within: &BTreeSet<usize>, start: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(t) = queue.pop_front() {
            for n in self.neighbours(t) {
                if within.contains(&n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Nodes of `d` adjacent to a node outside `d`.
    fn boundary_nodes(&self, d: &BTreeSet<usize>) -> Vec<usize> {
        d.iter()
            .copied()
            .filter(|&t| self.neighbours(t).iter().any(|n| !d.contains(n)))
            .collect()
    }
}

/// The edge-bag decomposition for tree-shaped queries, min-fill otherwise.
pub fn tree_decomposition(cq: &Cq) -> Result<TreeDecomposition> {
    let comps = cq.component_vars();
    if comps.len() > 1 {
        return Err(Error::Disconnected(comps.len()));
    }
    let mut td = TreeDecomposition {
        bags: BTreeMap::new(),
        edges: BTreeSet::new(),
    };
    let vars = cq.vars();
    if vars.len() <= 1 {
        td.bags.insert(0, vars.to_vec());
        return Ok(td);
    }
    if cq.is_tree_shaped() {
        edge_bags(cq, &mut td);
    } else {
        min_fill(cq, &mut td);
    }
    Ok(td)
}

/// One bag `{parent, v}` per tree edge in depth-first order from the first
/// variable; a bag hangs below its parent's bag, and the root's bags hang
/// below the first of them.
fn edge_bags(cq: &Cq, td: &mut TreeDecomposition) {
    let adj = cq.gaifman();
    let order: BTreeMap<&str, usize> = cq.vars().iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let root = cq.vars()[0].clone();
    let mut bag_of: BTreeMap<String, usize> = BTreeMap::new();
    let mut first_root_bag: Option<usize> = None;
    let mut stack: Vec<(String, Option<String>)> = vec![(root.clone(), None)];
    while let Some((v, parent)) = stack.pop() {
        if let Some(p) = parent {
            let id = td.bags.len();
            td.bags.insert(id, vec![p.clone(), v.clone()]);
            bag_of.insert(v.clone(), id);
            match bag_of.get(&p) {
                Some(&pb) => td.add_edge(pb, id),
                None => match first_root_bag {
                    Some(f) => td.add_edge(f, id),
                    None => first_root_bag = Some(id),
                },
            }
        }
        let mut children: Vec<&String> = adj[&v].iter().filter(|u| !bag_of.contains_key(*u) && **u != root).collect();
        children.sort_by_key(|u| order[u.as_str()]);
        for u in children.into_iter().rev() {
            stack.push((u.clone(), Some(v.clone())));
        }
    }
}

/// Elimination by minimum fill-in (ties by variable order); each bag is
/// joined to the bag of its earliest-eliminated neighbour, and bags contained
/// in a neighbour are merged into it.
fn min_fill(cq: &Cq, td: &mut TreeDecomposition) {
    let vars = cq.vars().to_vec();
    let mut adj: BTreeMap<String, BTreeSet<String>> = cq.gaifman();
    let mut remaining: Vec<String> = vars.clone();
    let mut elim: Vec<(String, BTreeSet<String>)> = Vec::new();
    while !remaining.is_empty() {
        let fill = |v: &String| {
            let n: Vec<&String> = adj[v].iter().collect();
            let mut missing = 0;
            for i in 0..n.len() {
                for j in i + 1..n.len() {
                    if !adj[n[i]].contains(n[j]) {
                        missing += 1;
                    }
                }
            }
            missing
        };
        let (pos, _) = remaining.iter().enumerate().min_by_key(|(i, v)| (fill(v), *i)).unwrap();
        let v = remaining.remove(pos);
        let nbrs = adj.remove(&v).unwrap();
        for a in &nbrs {
            adj.get_mut(a).unwrap().remove(&v);
            for b in &nbrs {
                if a != b {
                    adj.get_mut(a).unwrap().insert(b.clone());
                }
            }
        }
        elim.push((v, nbrs));
    }
    let position: BTreeMap<&str, usize> = elim.iter().enumerate().map(|(i, (v, _))| (v.as_str(), i)).collect();
    let mut bags: Vec<BTreeSet<String>> = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    for (v, nbrs) in &elim {
        let mut bag = nbrs.clone();
        bag.insert(v.clone());
        bags.push(bag);
        parent.push(nbrs.iter().map(|u| position[u.as_str()]).min());
    }
    // merge a bag with its parent when one contains the other
    let mut alive = vec![true; bags.len()];
    for i in 0..bags.len() {
        if let Some(p) = parent[i] {
            if bags[p].is_subset(&bags[i]) {
                bags[p] = bags[i].clone();
            }
            if bags[i].is_subset(&bags[p]) {
                alive[i] = false;
                for q in parent.iter_mut() {
                    if *q == Some(i) {
                        *q = Some(p);
                    }
                }
            }
        }
    }
    // the elimination forest may be disconnected only if the graph is
    let roots: Vec<usize> = (0..bags.len()).filter(|&i| alive[i] && parent[i].is_none()).collect();
    let last_root = roots.last().copied();
    let var_order = |b: &BTreeSet<String>| -> Vec<String> { vars.iter().filter(|v| b.contains(*v)).cloned().collect() };
    let ids: BTreeMap<usize, usize> = (0..bags.len())
        .filter(|&i| alive[i])
        .rev()
        .enumerate()
        .map(|(id, i)| (i, id))
        .collect();
    for (&i, &id) in &ids {
        td.bags.insert(id, var_order(&bags[i]));
        match parent[i] {
            Some(p) => td.add_edge(id, ids[&p]),
            None if Some(i) != last_root => td.add_edge(id, ids[&last_root.unwrap()]),
            None => {}
        }
    }
}

/// Parses `bag <id>: v1 v2 ...` and `edge <id> <id>` lines (`#` comments).
pub fn parse_decomposition(text: &str, cq: &Cq) -> Result<TreeDecomposition> {
    let bad = |line: usize, m: &str| Error::InvalidUserDecomposition(format!("line {line}: {m}"));
    let mut td = TreeDecomposition {
        bags: BTreeMap::new(),
        edges: BTreeSet::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("bag ") {
            let (id, vars) = rest.split_once(':').ok_or_else(|| bad(i + 1, "expected `bag <id>: vars`"))?;
            let id: usize = id.trim().parse().map_err(|_| bad(i + 1, "bad bag id"))?;
            let mut bag: Vec<String> = Vec::new();
            for v in vars.split_whitespace() {
                if !bag.iter().any(|x| x == v) {
                    bag.push(v.to_string());
                }
            }
            if td.bags.insert(id, bag).is_some() {
                return Err(bad(i + 1, "duplicate bag id"));
            }
        } else if let Some(rest) = line.strip_prefix("edge ") {
            let ids: Vec<usize> = rest
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad(i + 1, "bad node id")))
                .collect::<Result<_>>()?;
            if ids.len() != 2 {
                return Err(bad(i + 1, "an edge joins two bags"));
            }
            td.add_edge(ids[0], ids[1]);
        } else {
            return Err(bad(i + 1, "expected `bag` or `edge`"));
        }
    }
    td.check(cq)?;
    Ok(td)
}

fn split_ok(td: &TreeDecomposition, d: &BTreeSet<usize>, t: usize) -> Option<Vec<BTreeSet<usize>>> {
    let m = d.len();
    let deg = td.boundary_nodes(d).len();
    let mut rest: BTreeSet<usize> = d.clone();
    rest.remove(&t);
    let mut parts = Vec::new();
    while let Some(&s) = rest.iter().next() {
        let part = td.component(&rest, s);
        for x in &part {
            rest.remove(x);
        }
        parts.push(part);
    }
    let mut exceptions = 0;
    for p in &parts {
        let pd = td.boundary_nodes(p).len();
        if 2 * p.len() <= m && pd <= 2 {
            continue;
        }
        if deg == 2 && pd == 1 && p.len() + 1 < m {
            exceptions += 1;
            continue;
        }
        return None;
    }
    (exceptions <= 1).then_some(parts)
}

/// The first node of `d` in ascending id order that splits it within the
/// size and degree bounds.
pub fn split_node(td: &TreeDecomposition, d: &BTreeSet<usize>) -> Result<usize> {
    d.iter()
        .copied()
        .find(|&t| split_ok(td, d, t).is_some())
        .ok_or_else(|| Error::NoSplitter(d.iter().copied().collect()))
}

/// A member `D` of `sub(T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtree {
    pub nodes: BTreeSet<usize>,
    /// `σ(D)`.
    pub sigma: usize,
    /// Indices of the `D′ ≺ D`.
    pub children: Vec<usize>,
    /// `∂D` in variable order.
    pub boundary: Vec<String>,
    /// `q_D` as indices into the query atoms.
    pub atoms: BTreeSet<usize>,
    /// `x_D`: answer variables of `q_D`, in answer order.
    pub answer_vars: Vec<String>,
    /// Answer variables of `q_D` or `∂D`, in answer order.
    pub params: Vec<String>,
    pub level: usize,
}

/// `sub(T)` with `T` at index 0 and children after their parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreeIndex {
    pub subtrees: Vec<Subtree>,
}

impl SubtreeIndex {
    /// Length of the longest `≺` chain.
    pub fn height(&self) -> usize {
        self.subtrees.iter().map(|d| d.level).max().unwrap_or(0)
    }
}

pub fn build_subtree_index(td: &TreeDecomposition, cq: &Cq) -> Result<SubtreeIndex> {
    let mut subtrees: Vec<Subtree> = Vec::new();
    let all: BTreeSet<usize> = td.bags.keys().copied().collect();
    let mut queue: VecDeque<(BTreeSet<usize>, Option<usize>, usize)> = VecDeque::from([(all, None, 0)]);
    while let Some((nodes, parent, level)) = queue.pop_front() {
        let (sigma, parts) = if nodes.len() == 1 {
            (*nodes.iter().next().unwrap(), Vec::new())
        } else {
            let t = split_node(td, &nodes)?;
            (t, split_ok(td, &nodes, t).unwrap())
        };
        let mut boundary: BTreeSet<&str> = BTreeSet::new();
        for t in &nodes {
            for n in td.neighbours(*t) {
                if !nodes.contains(&n) {
                    for v in &td.bags[t] {
                        if td.bags[&n].contains(v) {
                            boundary.insert(v);
                        }
                    }
                }
            }
        }
        let id = subtrees.len();
        if let Some(p) = parent {
            subtrees[p].children.push(id);
        }
        subtrees.push(Subtree {
            nodes,
            sigma,
            children: Vec::new(),
            boundary: cq.vars().iter().filter(|v| boundary.contains(v.as_str())).cloned().collect(),
            atoms: BTreeSet::new(),
            answer_vars: Vec::new(),
            params: Vec::new(),
            level,
        });
        for p in parts {
            queue.push_back((p, Some(id), level + 1));
        }
    }
    // q_D bottom-up: children have larger indices
    for i in (0..subtrees.len()).rev() {
        let bag = &td.bags[&subtrees[i].sigma];
        let mut atoms: BTreeSet<usize> = cq
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.vars().iter().all(|v| bag.iter().any(|x| x == v)))
            .map(|(k, _)| k)
            .collect();
        for &c in &subtrees[i].children {
            atoms.extend(subtrees[c].atoms.iter().copied());
        }
        let vars: BTreeSet<&str> = atoms.iter().flat_map(|&k| cq.atoms()[k].vars()).collect();
        let d = &mut subtrees[i];
        d.answer_vars = cq.answer_vars().iter().filter(|v| vars.contains(v.as_str())).cloned().collect();
        d.params = cq
            .answer_vars()
            .iter()
            .filter(|v| vars.contains(v.as_str()) || d.boundary.contains(v))
            .cloned()
            .collect();
        d.atoms = atoms;
    }
    Ok(SubtreeIndex { subtrees })
}

/// All total maps `bag → W_T` compatible with the bag, in lexicographic
/// order over (variable order, word order).
pub fn compatible_types(tbox: &TBox, bag: &[String], cq: &Cq) -> Result<Vec<Type>> {
    let tbox = normalized(tbox)?;
    let words = tbox.all_words()?;
    let vars: Vec<String> = cq.vars().iter().filter(|v| bag.contains(v)).cloned().collect();
    Ok(types_over(&tbox, &vars, &words, cq))
}

fn types_over(tbox: &TBox, vars: &[String], words: &[Word], cq: &Cq) -> Vec<Type> {
    let ok = |ty: &Type| {
        ty.iter().all(|(v, w)| w.is_empty() || !cq.is_answer_var(v))
            && cq.atoms().iter().all(|a| atom_compatible(tbox, a, ty))
    };
    enumerate_types(vars, words, &ok)
}

/// The tree-decomposition rewriting over H-complete ABoxes, with goal `G`.
/// Disconnected queries get one program per component and a product goal.
pub fn rewrite_td(tbox: &TBox, cq: &Cq, td: Option<&TreeDecomposition>) -> Result<Program> {
    let tbox = normalized(tbox)?;
    let words = tbox.all_words()?;
    let comps = cq.components();
    let mut program = Program::new("G", cq.answer_vars().len());
    program.params.insert("G".into(), cq.answer_vars().to_vec());
    let mut declared: BTreeSet<String> = BTreeSet::new();
    if comps.len() <= 1 {
        let decomposition = match td {
            Some(d) => {
                d.check(cq)?;
                d.clone()
            }
            None => tree_decomposition(cq)?,
        };
        component(&tbox, cq, &decomposition, &words, "", "G", &mut program, &mut declared)?;
    } else {
        if td.is_some() {
            return Err(Error::InvalidUserDecomposition(
                "a decomposition file applies to connected queries only".into(),
            ));
        }
        let mut body = Vec::new();
        for (c, q) in comps.iter().enumerate() {
            let name = format!("C{c}G");
            let d = tree_decomposition(q)?;
            component(&tbox, q, &d, &words, &format!("C{c}"), &name, &mut program, &mut declared)?;
            body.push(Atom::vars(name, q.answer_vars()));
        }
        program.push(guarded_clause(Atom::vars("G", cq.answer_vars()), body));
    }
    Ok(prune_declared(&program, &declared))
}

#[allow(clippy::too_many_arguments)]
fn component(
    tbox: &TBox,
    cq: &Cq,
    td: &TreeDecomposition,
    words: &[Word],
    prefix: &str,
    goal: &str,
    program: &mut Program,
    declared: &mut BTreeSet<String>,
) -> Result<()> {
    let index = build_subtree_index(td, cq)?;
    let subs = &index.subtrees;
    let name = |d: usize, w: &Type| {
        if d == 0 {
            goal.to_string()
        } else {
            format!("{prefix}G{d}{}", type_suffix(&subs[d].boundary, w))
        }
    };
    let args = |d: usize| -> Vec<String> {
        subs[d]
            .boundary
            .iter()
            .filter(|v| !cq.is_answer_var(v))
            .chain(&subs[d].params)
            .cloned()
            .collect()
    };
    // bag types are shared by every w of the same subtree
    let mut bag_types: BTreeMap<usize, Vec<Type>> = BTreeMap::new();
    let mut seen: BTreeSet<(usize, Type)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, Type)> = VecDeque::from([(0, Type::new())]);
    seen.insert((0, Type::new()));
    while let Some((d, w)) = queue.pop_front() {
        let head_name = name(d, &w);
        declared.insert(head_name.clone());
        program.params.insert(head_name.clone(), subs[d].params.clone());
        let bag = &td.bags[&subs[d].sigma];
        let bag_vars: Vec<String> = cq.vars().iter().filter(|v| bag.contains(v)).cloned().collect();
        let types = bag_types
            .entry(d)
            .or_insert_with(|| types_over(tbox, &bag_vars, words, cq));
        let head = Atom::vars(head_name, &args(d));
        let local: Vec<&CqAtom> = cq
            .atoms()
            .iter()
            .filter(|a| a.vars().iter().all(|v| bag.contains(&v.to_string())))
            .collect();
        for s in types.iter() {
            if w.iter().any(|(v, x)| s.get(v).is_some_and(|y| y != x)) {
                continue;
            }
            let mut body = at_atoms(local.iter().copied(), s, &bag_vars);
            let mut union = w.clone();
            union.extend(s.iter().map(|(k, v)| (k.clone(), v.clone())));
            for &c in &subs[d].children {
                let wc: Type = subs[c]
                    .boundary
                    .iter()
                    .map(|v| (v.clone(), union.get(v).cloned().unwrap_or_default()))
                    .collect();
                body.push(Atom::vars(name(c, &wc), &args(c)));
                if seen.insert((c, wc.clone())) {
                    queue.push_back((c, wc));
                }
            }
            program.push(guarded_clause(head.clone(), body));
        }
    }
    Ok(())
}
