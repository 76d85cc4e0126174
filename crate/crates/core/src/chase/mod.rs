//! Canonical models and the brute-force certain-answer oracle.
//!
//! Query answering never materializes the model: a backtracking search walks
//! the canonical model lazily from the named individuals. Anonymous subtrees
//! depend only on the last role of their root, so a homomorphism that avoids
//! the named part is searched below a single representative per role.

mod context;
mod search;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use context::{ChaseContext, Elem};
use search::{Domain, Search};

use crate::dl::{exists_concept_name, h_complete, ABox, BasicConcept, Cq, CqAtom, Role, TBox, Word};
use crate::{Error, Result};

/// A domain element `a·w`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelElement {
    pub individual: String,
    pub word: Word,
}

impl fmt::Display for ModelElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            write!(f, "{}", self.individual)
        } else {
            write!(f, "{}·{}", self.individual, self.word)
        }
    }
}

/// The canonical model cut at a word-length bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalModel {
    pub domain: BTreeSet<ModelElement>,
    pub concepts: BTreeMap<String, BTreeSet<ModelElement>>,
    pub roles: BTreeMap<String, BTreeSet<(ModelElement, ModelElement)>>,
    pub depth_bound: usize,
}

impl CanonicalModel {
    pub fn has_concept(&self, name: &str, e: &ModelElement) -> bool {
        self.concepts.get(name).is_some_and(|s| s.contains(e))
    }

    pub fn has_role(&self, name: &str, e1: &ModelElement, e2: &ModelElement) -> bool {
        self.roles
            .get(name)
            .is_some_and(|s| s.contains(&(e1.clone(), e2.clone())))
    }
}

fn normalized(tbox: &TBox) -> Result<Cow<'_, TBox>> {
    if tbox.is_normalized() {
        Ok(Cow::Borrowed(tbox))
    } else {
        Ok(Cow::Owned(tbox.normalize()?))
    }
}

/// Materializes every element `a·w` with `|w| ≤ depth_limit`.
pub fn build_chase(tbox: &TBox, abox: &ABox, depth_limit: usize) -> Result<CanonicalModel> {
    let tbox = normalized(tbox)?;
    let ctx = ChaseContext::new(&tbox, abox, Some(depth_limit));
    let completed = h_complete(&tbox, abox);
    let to_model = |e: &Elem| ModelElement {
        individual: ctx.individuals[e.ind].clone(),
        word: Word(e.word.clone()),
    };
    let mut model = CanonicalModel {
        domain: BTreeSet::new(),
        concepts: BTreeMap::new(),
        roles: BTreeMap::new(),
        depth_bound: depth_limit,
    };
    for (c, a) in completed.concept_facts() {
        model.concepts.entry(c.clone()).or_default().insert(ModelElement {
            individual: a.clone(),
            word: Word::empty(),
        });
    }
    for (p, a, b) in completed.role_facts() {
        let named = |x: &String| ModelElement {
            individual: x.clone(),
            word: Word::empty(),
        };
        model.roles.entry(p.clone()).or_default().insert((named(a), named(b)));
    }
    let mut stack: Vec<Elem> = (0..ctx.individuals.len()).map(Elem::named).collect();
    while let Some(e) = stack.pop() {
        let me = to_model(&e);
        model.domain.insert(me.clone());
        if let Some(last) = e.word.last() {
            for c in tbox.anonymous_concepts(last) {
                model.concepts.entry(c).or_default().insert(me.clone());
            }
        }
        for child in ctx.neighbours(&e) {
            if child.word.len() != e.word.len() + 1 {
                continue;
            }
            let mc = to_model(&child);
            for s in tbox.super_roles(child.word.last().unwrap()) {
                let pair = if s.inverse {
                    (mc.clone(), me.clone())
                } else {
                    (me.clone(), mc.clone())
                };
                model.roles.entry(s.name.clone()).or_default().insert(pair);
            }
            stack.push(child);
        }
    }
    Ok(model)
}

fn concept_name(b: &BasicConcept) -> String {
    match b {
        BasicConcept::Atomic(a) => a.clone(),
        BasicConcept::Exists(r) => exists_concept_name(r),
    }
}

/// Checks every disjointness axiom on the H-completed ABox and on one
/// representative anonymous element per role that occurs in the model.
pub fn is_consistent(tbox: &TBox, abox: &ABox) -> Result<bool> {
    let tbox = normalized(tbox)?;
    let completed = h_complete(&tbox, abox);
    let by_ind = completed.concepts_by_individual();
    for (b1, b2) in tbox.concept_disjointness() {
        let (n1, n2) = (concept_name(b1), concept_name(b2));
        if by_ind.values().any(|s| s.contains(&n1) && s.contains(&n2)) {
            return Ok(false);
        }
    }
    for (r1, r2) in tbox.role_disjointness() {
        for (p, a, b) in completed.role_facts() {
            let (x, y) = if r1.inverse { (b, a) } else { (a, b) };
            if r1.name == *p && completed.has_role(r2, x, y) {
                return Ok(false);
            }
        }
    }
    let ctx = ChaseContext::new(&tbox, abox, None);
    for r in ctx.anonymous_roots() {
        let here: BTreeSet<String> = tbox.anonymous_concepts(&r).into_iter().collect();
        for (b1, b2) in tbox.concept_disjointness() {
            if here.contains(&concept_name(b1)) && here.contains(&concept_name(b2)) {
                return Ok(false);
            }
        }
        for (r1, r2) in tbox.role_disjointness() {
            if tbox.subsumes_role(&r, r1) && tbox.subsumes_role(&r, r2) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Certain answers, searched with the default word-length bound `|var(q)|`.
pub fn certain_answers(tbox: &TBox, cq: &Cq, abox: &ABox) -> Result<BTreeSet<Vec<String>>> {
    certain_answers_with_limit(tbox, cq, abox, Some(cq.vars().len()))
}

/// Certain answers with an explicit word-length bound (`None` is unbounded;
/// the search terminates either way).
pub fn certain_answers_with_limit(
    tbox: &TBox,
    cq: &Cq,
    abox: &ABox,
    depth_limit: Option<usize>,
) -> Result<BTreeSet<Vec<String>>> {
    let tbox = normalized(tbox)?;
    if !is_consistent(&tbox, abox)? {
        return Err(Error::InconsistentInput);
    }
    let ctx = ChaseContext::new(&tbox, abox, depth_limit);
    Ok(answers_in(&ctx, cq, &HashMap::new()))
}

/// Whether `cq` has a match with the given variables pinned to individuals.
pub fn holds_with(tbox: &TBox, cq: &Cq, abox: &ABox, fixed: &BTreeMap<String, String>) -> Result<bool> {
    let tbox = normalized(tbox)?;
    if !is_consistent(&tbox, abox)? {
        return Err(Error::InconsistentInput);
    }
    let ctx = ChaseContext::new(&tbox, abox, Some(cq.vars().len()));
    let mut domains = HashMap::new();
    for (v, a) in fixed {
        match ctx.index.get(a) {
            Some(&i) => domains.insert(v.clone(), Domain::Fixed(Elem::named(i))),
            None => return Ok(false),
        };
    }
    Ok(!answers_in(&ctx, cq, &domains).is_empty())
}

fn answers_in(ctx: &ChaseContext<'_>, cq: &Cq, pinned: &HashMap<String, Domain>) -> BTreeSet<Vec<String>> {
    let mut partial: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    for comp in cq.components() {
        let tuples = component_answers(ctx, &comp, pinned);
        let mut next = Vec::new();
        for p in &partial {
            for t in &tuples {
                let mut m = p.clone();
                for (v, a) in comp.answer_vars().iter().zip(t) {
                    m.insert(v.clone(), a.clone());
                }
                next.push(m);
            }
        }
        partial = next;
        if partial.is_empty() {
            break;
        }
    }
    partial
        .into_iter()
        .map(|m| cq.answer_vars().iter().map(|v| m[v].clone()).collect())
        .collect()
}

fn component_answers(
    ctx: &ChaseContext<'_>,
    comp: &Cq,
    pinned: &HashMap<String, Domain>,
) -> BTreeSet<Vec<String>> {
    let named: Vec<Elem> = (0..ctx.individuals.len()).map(Elem::named).collect();
    let name_of = |t: &Vec<Elem>| t.iter().map(|e| ctx.individuals[e.ind].clone()).collect::<Vec<_>>();
    if comp.atoms().is_empty() {
        // only isolated answer variables remain
        let mut out = BTreeSet::new();
        if comp.is_boolean() {
            out.insert(Vec::new());
        } else {
            let v = &comp.answer_vars()[0];
            for e in &named {
                if pinned.get(v).is_none_or(|d| d.admits(e)) {
                    out.insert(vec![ctx.individuals[e.ind].clone()]);
                }
            }
        }
        return out;
    }
    let mut domains = pinned.clone();
    for v in comp.answer_vars() {
        domains.entry(v.clone()).or_insert(Domain::Named);
    }
    if !comp.is_boolean() {
        let gaifman = comp.gaifman();
        let start = comp
            .answer_vars()
            .iter()
            .max_by_key(|v| (gaifman[*v].len(), std::cmp::Reverse(comp.var_index(v))))
            .unwrap();
        let mut search = Search::new(ctx, comp, start, &domains);
        return search.run(&named).iter().map(name_of).collect();
    }
    let mut starts = named.clone();
    starts.extend(ctx.anonymous_roots().iter().map(|r| ctx.virtual_root(r)));
    for v in comp.vars() {
        let mut search = Search::new(ctx, comp, v, &domains);
        if !search.run(&starts).is_empty() {
            return BTreeSet::from([Vec::new()]);
        }
    }
    BTreeSet::new()
}

/// Whether `T, {A(a)} ⊨ q` for a Boolean `q`.
pub fn entails_from_concept(tbox: &TBox, concept: &str, cq: &Cq) -> Result<bool> {
    if !cq.is_boolean() {
        return Err(Error::NotBoolean(cq.answer_vars().to_vec()));
    }
    if cq.atoms().is_empty() {
        return Ok(true);
    }
    let mut abox = ABox::new();
    abox.add_concept(concept, "a");
    match certain_answers(tbox, cq, &abox) {
        Ok(ans) => Ok(!ans.is_empty()),
        // an inconsistent KB entails every query
        Err(Error::InconsistentInput) => Ok(true),
        Err(e) => Err(e),
    }
}

/// A tree witness `(t_r, t_i)` with all roles generating it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeWitness {
    pub t_r: BTreeSet<String>,
    pub t_i: BTreeSet<String>,
    pub generators: BTreeSet<Role>,
    /// `q_t`: atoms over `t_r ∪ t_i` not entirely inside `t_r`.
    pub atoms: Vec<CqAtom>,
}

impl TreeWitness {
    pub fn query(&self) -> Cq {
        Cq::new(Vec::new(), self.atoms.clone())
    }
}

/// All tree witnesses of a tree-shaped query. `t_i` ranges over connected
/// sets of existential variables and `t_r` is their boundary; a pair is a
/// witness when `q_t` maps into the model of `{A_R(a)}` with exactly `t_r`
/// sent to `a`, for some generating role `R`.
pub fn tree_witnesses(tbox: &TBox, cq: &Cq) -> Result<Vec<TreeWitness>> {
    if !cq.is_tree_shaped() {
        return Err(Error::NotTreeShaped);
    }
    let tbox = normalized(tbox)?;
    let existential = cq.existential_vars();
    if existential.is_empty() || tbox.generating_roles().is_empty() {
        return Ok(Vec::new());
    }
    let gaifman = cq.gaifman();
    let contexts: Vec<(Role, ABox)> = tbox
        .generating_roles()
        .iter()
        .map(|r| {
            let mut abox = ABox::new();
            abox.add_concept(exists_concept_name(r), "a");
            (r.clone(), abox)
        })
        .collect();
    let mut out = Vec::new();
    for t_i in connected_subsets(&existential, &gaifman) {
        let t_r: BTreeSet<String> = t_i
            .iter()
            .flat_map(|v| gaifman[v].iter())
            .filter(|u| !t_i.contains(*u))
            .cloned()
            .collect();
        let atoms: Vec<CqAtom> = cq
            .atoms()
            .iter()
            .filter(|a| {
                let vs = a.vars();
                vs.iter().all(|v| t_i.contains(*v) || t_r.contains(*v)) && vs.iter().any(|v| t_i.contains(*v))
            })
            .cloned()
            .collect();
        let q_t = Cq::new(Vec::new(), atoms.clone());
        let mut generators = BTreeSet::new();
        for (r, abox) in &contexts {
            let ctx = ChaseContext::new(&tbox, abox, None);
            if maps_as_witness(&ctx, &q_t, &t_r, &t_i) {
                generators.insert(r.clone());
            }
        }
        if !generators.is_empty() {
            out.push(TreeWitness {
                t_r,
                t_i,
                generators,
                atoms,
            });
        }
    }
    Ok(out)
}

/// Whether `q_t` maps into the model with `t_r ↦ a` and `t_i` anonymous.
fn maps_as_witness(ctx: &ChaseContext<'_>, q_t: &Cq, t_r: &BTreeSet<String>, t_i: &BTreeSet<String>) -> bool {
    let root = Elem::named(ctx.index["a"]);
    let mut domains: HashMap<String, Domain> = HashMap::new();
    for v in t_r {
        domains.insert(v.clone(), Domain::Fixed(root.clone()));
    }
    for v in t_i {
        domains.insert(v.clone(), Domain::Anonymous);
    }
    if let Some(start) = t_r.iter().next() {
        return !Search::new(ctx, q_t, start, &domains).run(&[root]).is_empty();
    }
    let starts: Vec<Elem> = ctx.anonymous_roots().iter().map(|r| ctx.virtual_root(r)).collect();
    q_t.vars()
        .iter()
        .any(|v| !Search::new(ctx, q_t, v, &domains).run(&starts).is_empty())
}

/// Connected subsets of `vars` in the Gaifman graph, ordered by size and
/// then by variable positions.
fn connected_subsets(
    vars: &[String],
    gaifman: &BTreeMap<String, BTreeSet<String>>,
) -> Vec<BTreeSet<String>> {
    let pos: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier: Vec<Vec<usize>> = (0..vars.len()).map(|i| vec![i]).collect();
    let mut all = Vec::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for set in frontier {
            if !seen.insert(set.clone()) {
                continue;
            }
            for &i in &set {
                for u in &gaifman[&vars[i]] {
                    if let Some(&j) = pos.get(u.as_str()) {
                        if !set.contains(&j) {
                            let mut bigger = set.clone();
                            bigger.push(j);
                            bigger.sort_unstable();
                            if !seen.contains(&bigger) {
                                next.push(bigger);
                            }
                        }
                    }
                }
            }
            all.push(set);
        }
        next.sort();
        next.dedup();
        frontier = next;
    }
    all.into_iter()
        .map(|s| s.into_iter().map(|i| vars[i].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests;
