use std::collections::{BTreeSet, HashMap, HashSet};

use crate::dl::{exists_concept_name, h_complete, ABox, Role, TBox};

/// Marker for elements below a virtual root: a representative of every
/// anonymous subtree whose top element ends in a given role.
pub(crate) const VIRTUAL: usize = usize::MAX;

/// An element `a·w` of the canonical model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Elem {
    pub ind: usize,
    pub word: Vec<Role>,
}

impl Elem {
    pub fn named(ind: usize) -> Self {
        Elem {
            ind,
            word: Vec::new(),
        }
    }

    pub fn is_named(&self) -> bool {
        self.word.is_empty()
    }
}

/// Lazily explored canonical model of a KB, over the H-completion of the ABox.
pub(crate) struct ChaseContext<'t> {
    pub tbox: &'t TBox,
    pub individuals: Vec<String>,
    pub index: HashMap<String, usize>,
    concepts: Vec<HashSet<String>>,
    roles: HashSet<(String, usize, usize)>,
    adjacency: Vec<BTreeSet<usize>>,
    /// Roles `R` such that `a·R` is an element, per individual.
    pub generated: Vec<Vec<Role>>,
    pub depth_limit: Option<usize>,
}

impl<'t> ChaseContext<'t> {
    /// `tbox` must be normalized.
    pub fn new(tbox: &'t TBox, abox: &ABox, depth_limit: Option<usize>) -> Self {
        let completed = h_complete(tbox, abox);
        let individuals: Vec<String> = completed.individuals().into_iter().collect();
        let index: HashMap<String, usize> = individuals
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut concepts = vec![HashSet::new(); individuals.len()];
        for (c, a) in completed.concept_facts() {
            concepts[index[a]].insert(c.clone());
        }
        let mut roles = HashSet::new();
        let mut adjacency = vec![BTreeSet::new(); individuals.len()];
        for (p, a, b) in completed.role_facts() {
            let (i, j) = (index[a], index[b]);
            roles.insert((p.clone(), i, j));
            adjacency[i].insert(j);
            adjacency[j].insert(i);
        }
        // Reserved concepts asserted directly act as existential axioms at
        // their individual; otherwise only generating roles create witnesses.
        let asserted = abox.concepts_by_individual();
        let generated = individuals
            .iter()
            .enumerate()
            .map(|(i, a)| {
                tbox.roles()
                    .iter()
                    .filter(|r| {
                        let name = exists_concept_name(r);
                        concepts[i].contains(&name)
                            && (tbox.is_generating(r)
                                || asserted.get(a).is_some_and(|s| s.contains(&name)))
                    })
                    .cloned()
                    .collect()
            })
            .collect();
        ChaseContext {
            tbox,
            individuals,
            index,
            concepts,
            roles,
            adjacency,
            generated,
            depth_limit,
        }
    }

    fn within_limit(&self, len: usize) -> bool {
        self.depth_limit.is_none_or(|d| len <= d)
    }

    pub fn holds_concept(&self, name: &str, e: &Elem) -> bool {
        match e.word.last() {
            None => self.concepts[e.ind].contains(name),
            Some(last) => self.tbox.anonymous_satisfies(last, name),
        }
    }

    pub fn holds_role(&self, name: &str, e1: &Elem, e2: &Elem) -> bool {
        if e1.is_named() && e2.is_named() {
            return self.roles.contains(&(name.to_string(), e1.ind, e2.ind));
        }
        if e1.ind != e2.ind {
            return false;
        }
        let forward = Role::new(name);
        if e2.word.len() == e1.word.len() + 1 && e2.word.starts_with(&e1.word) {
            return self.tbox.subsumes_role(e2.word.last().unwrap(), &forward);
        }
        if e1.word.len() == e2.word.len() + 1 && e1.word.starts_with(&e2.word) {
            return self.tbox.subsumes_role(e1.word.last().unwrap(), &forward.inverse());
        }
        false
    }

    fn child(&self, e: &Elem, r: &Role) -> Elem {
        let mut word = e.word.clone();
        word.push(r.clone());
        Elem { ind: e.ind, word }
    }

    /// Elements adjacent to `e` by some role edge, named neighbours first.
    pub fn neighbours(&self, e: &Elem) -> Vec<Elem> {
        let mut out = Vec::new();
        let next_len = e.word.len() + 1;
        match e.word.last() {
            None => {
                out.extend(self.adjacency[e.ind].iter().map(|&j| Elem::named(j)));
                if self.within_limit(next_len) {
                    out.extend(self.generated[e.ind].iter().map(|r| self.child(e, r)));
                }
            }
            Some(last) => {
                if e.ind != VIRTUAL || e.word.len() > 1 {
                    out.push(Elem {
                        ind: e.ind,
                        word: e.word[..e.word.len() - 1].to_vec(),
                    });
                }
                if self.within_limit(next_len) {
                    out.extend(self.tbox.word_successors(last).iter().map(|r| self.child(e, r)));
                }
            }
        }
        out
    }

    /// Last roles of all anonymous elements that occur in the model.
    pub fn anonymous_roots(&self) -> Vec<Role> {
        let mut seen: BTreeSet<Role> = self.generated.iter().flatten().cloned().collect();
        let mut stack: Vec<Role> = seen.iter().cloned().collect();
        while let Some(r) = stack.pop() {
            for s in self.tbox.word_successors(&r) {
                if seen.insert(s.clone()) {
                    stack.push(s.clone());
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn virtual_root(&self, r: &Role) -> Elem {
        Elem {
            ind: VIRTUAL,
            word: vec![r.clone()],
        }
    }
}
