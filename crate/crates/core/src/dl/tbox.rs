use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::syntax::{BasicConcept, Role, Word};
use crate::error::{Error, Result};

/// Prefix of the fresh concept `A_R` for a role name `R`.
pub const EXISTS_PREFIX: &str = "@ex_";
/// Prefix of the fresh concept `A_R` for an inverse role `R = P⁻`.
pub const EXISTS_INV_PREFIX: &str = "@exinv_";

/// Name of the concept `A_R` with `A_R ≡ ∃R` in a normalized TBox.
pub fn exists_concept_name(role: &Role) -> String {
    if role.inverse {
        format!("{EXISTS_INV_PREFIX}{}", role.name)
    } else {
        format!("{EXISTS_PREFIX}{}", role.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    ConceptInclusion(BasicConcept, BasicConcept),
    RoleInclusion(Role, Role),
    ConceptDisjoint(BasicConcept, BasicConcept),
    RoleDisjoint(Role, Role),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    Finite(usize),
    Omega,
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(d) => write!(f, "{d}"),
            Depth::Omega => write!(f, "omega"),
        }
    }
}

/// An OWL 2 QL TBox together with its positive subsumption closure.
///
/// All derived data is computed when the value is built; a `TBox` is never
/// mutated afterwards.
#[derive(Debug, Clone)]
pub struct TBox {
    concept_inclusions: BTreeSet<(BasicConcept, BasicConcept)>,
    role_inclusions: BTreeSet<(Role, Role)>,
    concept_disjointness: BTreeSet<(BasicConcept, BasicConcept)>,
    role_disjointness: BTreeSet<(Role, Role)>,
    normalized: bool,

    roles: BTreeSet<Role>,
    generating: BTreeSet<Role>,
    concept_names: BTreeSet<String>,
    role_supers: BTreeMap<Role, BTreeSet<Role>>,
    role_subs: BTreeMap<Role, BTreeSet<Role>>,
    concept_supers: BTreeMap<BasicConcept, BTreeSet<BasicConcept>>,
    concept_subs: BTreeMap<BasicConcept, BTreeSet<BasicConcept>>,
    word_successors: BTreeMap<Role, Vec<Role>>,
    depth: Depth,
}

impl PartialEq for TBox {
    fn eq(&self, other: &Self) -> bool {
        self.concept_inclusions == other.concept_inclusions
            && self.role_inclusions == other.role_inclusions
            && self.concept_disjointness == other.concept_disjointness
            && self.role_disjointness == other.role_disjointness
            && self.normalized == other.normalized
    }
}

impl Eq for TBox {}

impl Default for TBox {
    fn default() -> Self {
        TBox::from_axioms(Vec::new())
    }
}

impl TBox {
    /// Builds an un-normalized TBox. Role inclusions are closed under inversion.
    pub fn from_axioms(axioms: impl IntoIterator<Item = Axiom>) -> Self {
        let mut concept_inclusions = BTreeSet::new();
        let mut role_inclusions = BTreeSet::new();
        let mut concept_disjointness = BTreeSet::new();
        let mut role_disjointness = BTreeSet::new();
        for axiom in axioms {
            match axiom {
                Axiom::ConceptInclusion(b1, b2) => {
                    concept_inclusions.insert((b1, b2));
                }
                Axiom::RoleInclusion(r1, r2) => {
                    role_inclusions.insert((r1.inverse(), r2.inverse()));
                    role_inclusions.insert((r1, r2));
                }
                Axiom::ConceptDisjoint(b1, b2) => {
                    concept_disjointness.insert((b1, b2));
                }
                Axiom::RoleDisjoint(r1, r2) => {
                    role_disjointness.insert((r1, r2));
                }
            }
        }
        Self::build(
            concept_inclusions,
            role_inclusions,
            concept_disjointness,
            role_disjointness,
            false,
        )
    }

    fn build(
        concept_inclusions: BTreeSet<(BasicConcept, BasicConcept)>,
        role_inclusions: BTreeSet<(Role, Role)>,
        concept_disjointness: BTreeSet<(BasicConcept, BasicConcept)>,
        role_disjointness: BTreeSet<(Role, Role)>,
        normalized: bool,
    ) -> Self {
        let mut roles = BTreeSet::new();
        let mut concept_names = BTreeSet::new();
        let mut note_concept = |b: &BasicConcept, roles: &mut BTreeSet<Role>| match b {
            BasicConcept::Atomic(name) => {
                concept_names.insert(name.clone());
            }
            BasicConcept::Exists(r) => {
                roles.insert(Role::new(r.name.clone()));
                roles.insert(Role::inv(r.name.clone()));
            }
        };
        for (b1, b2) in concept_inclusions.iter().chain(&concept_disjointness) {
            note_concept(b1, &mut roles);
            note_concept(b2, &mut roles);
        }
        for (r1, r2) in role_inclusions.iter().chain(&role_disjointness) {
            for r in [r1, r2] {
                roles.insert(Role::new(r.name.clone()));
                roles.insert(Role::inv(r.name.clone()));
            }
        }

        let role_supers = reflexive_transitive_closure(roles.iter().cloned(), role_inclusions.iter().cloned());
        let role_subs = invert(&role_supers);

        let universe = concept_names
            .iter()
            .map(|n| BasicConcept::Atomic(n.clone()))
            .chain(roles.iter().map(|r| BasicConcept::Exists(r.clone())));
        let mut concept_edges: Vec<(BasicConcept, BasicConcept)> = concept_inclusions.iter().cloned().collect();
        for (r, supers) in &role_supers {
            for s in supers {
                if s != r {
                    concept_edges.push((BasicConcept::Exists(r.clone()), BasicConcept::Exists(s.clone())));
                }
            }
        }
        let concept_supers = reflexive_transitive_closure(universe, concept_edges);
        let concept_subs = invert(&concept_supers);

        // Roles whose witnesses the canonical model creates: those on the
        // right of a stated inclusion `B ⊑ ∃R` other than `A_R ⊑ ∃R`.
        let generating: BTreeSet<Role> = concept_inclusions
            .iter()
            .filter_map(|(lhs, rhs)| match rhs {
                BasicConcept::Exists(r) if *lhs != BasicConcept::Atomic(exists_concept_name(r)) => {
                    Some(r.clone())
                }
                _ => None,
            })
            .collect();

        let mut word_successors = BTreeMap::new();
        for r in &roles {
            let from = BasicConcept::Exists(r.inverse());
            let succ: Vec<Role> = generating
                .iter()
                .filter(|next| {
                    concept_supers[&from].contains(&BasicConcept::Exists((*next).clone()))
                        && !role_supers[&r.inverse()].contains(next)
                })
                .cloned()
                .collect();
            word_successors.insert(r.clone(), succ);
        }
        let depth = word_graph_depth(&generating, &word_successors);

        TBox {
            concept_inclusions,
            role_inclusions,
            concept_disjointness,
            role_disjointness,
            normalized,
            roles,
            generating,
            concept_names,
            role_supers,
            role_subs,
            concept_supers,
            concept_subs,
            word_successors,
            depth,
        }
    }

    /// Adds `A_R ≡ ∃R` for every role of the TBox. Idempotent.
    pub fn normalize(&self) -> Result<TBox> {
        if self.normalized {
            return Ok(self.clone());
        }
        if let Some(name) = self.concept_names.iter().find(|n| n.starts_with('@')) {
            return Err(Error::NameCollision(name.clone()));
        }
        let mut concept_inclusions = self.concept_inclusions.clone();
        for r in &self.roles {
            let a_r = BasicConcept::Atomic(exists_concept_name(r));
            let ex = BasicConcept::Exists(r.clone());
            concept_inclusions.insert((a_r.clone(), ex.clone()));
            concept_inclusions.insert((ex, a_r));
        }
        Ok(Self::build(
            concept_inclusions,
            self.role_inclusions.clone(),
            self.concept_disjointness.clone(),
            self.role_disjointness.clone(),
            true,
        ))
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn concept_inclusions(&self) -> &BTreeSet<(BasicConcept, BasicConcept)> {
        &self.concept_inclusions
    }

    pub fn role_inclusions(&self) -> &BTreeSet<(Role, Role)> {
        &self.role_inclusions
    }

    pub fn concept_disjointness(&self) -> &BTreeSet<(BasicConcept, BasicConcept)> {
        &self.concept_disjointness
    }

    pub fn role_disjointness(&self) -> &BTreeSet<(Role, Role)> {
        &self.role_disjointness
    }

    /// `R_T`: role names of the TBox and their inverses.
    pub fn roles(&self) -> &BTreeSet<Role> {
        &self.roles
    }

    /// Roles `R` with a stated inclusion `B ⊑ ∃R` (normalization axioms
    /// excluded). Only these occur in words of `W_T`.
    pub fn generating_roles(&self) -> &BTreeSet<Role> {
        &self.generating
    }

    pub fn is_generating(&self, role: &Role) -> bool {
        self.generating.contains(role)
    }

    pub fn concept_names(&self) -> &BTreeSet<String> {
        &self.concept_names
    }

    pub fn axioms(&self) -> Vec<Axiom> {
        let mut out: Vec<Axiom> = Vec::new();
        out.extend(
            self.concept_inclusions
                .iter()
                .map(|(a, b)| Axiom::ConceptInclusion(a.clone(), b.clone())),
        );
        out.extend(
            self.role_inclusions
                .iter()
                .map(|(a, b)| Axiom::RoleInclusion(a.clone(), b.clone())),
        );
        out.extend(
            self.concept_disjointness
                .iter()
                .map(|(a, b)| Axiom::ConceptDisjoint(a.clone(), b.clone())),
        );
        out.extend(
            self.role_disjointness
                .iter()
                .map(|(a, b)| Axiom::RoleDisjoint(a.clone(), b.clone())),
        );
        out
    }

    /// `b1 ⊑_T b2`. Concepts outside the signature only subsume themselves.
    pub fn subsumes_concept(&self, b1: &BasicConcept, b2: &BasicConcept) -> bool {
        b1 == b2 || self.concept_supers.get(b1).is_some_and(|s| s.contains(b2))
    }

    /// `r1 ⊑_T r2`.
    pub fn subsumes_role(&self, r1: &Role, r2: &Role) -> bool {
        r1 == r2 || self.role_supers.get(r1).is_some_and(|s| s.contains(r2))
    }

    /// Every role `R'` with `R' ⊑_T role`, the role itself included.
    pub fn sub_roles(&self, role: &Role) -> Vec<Role> {
        match self.role_subs.get(role) {
            Some(subs) => subs.iter().cloned().collect(),
            None => vec![role.clone()],
        }
    }

    /// Every role `R'` with `role ⊑_T R'`, the role itself included.
    pub fn super_roles(&self, role: &Role) -> Vec<Role> {
        match self.role_supers.get(role) {
            Some(sups) => sups.iter().cloned().collect(),
            None => vec![role.clone()],
        }
    }

    /// Every basic concept `B` with `B ⊑_T concept`, the concept itself included.
    pub fn sub_concepts(&self, concept: &BasicConcept) -> Vec<BasicConcept> {
        match self.concept_subs.get(concept) {
            Some(subs) => subs.iter().cloned().collect(),
            None => vec![concept.clone()],
        }
    }

    /// Concept names `A` with `concept ⊑_T A`.
    pub fn atomic_supers(&self, concept: &BasicConcept) -> Vec<String> {
        let atomic = |b: &BasicConcept| match b {
            BasicConcept::Atomic(n) => Some(n.clone()),
            BasicConcept::Exists(_) => None,
        };
        match self.concept_supers.get(concept) {
            Some(sups) => sups.iter().filter_map(atomic).collect(),
            None => atomic(concept).into_iter().collect(),
        }
    }

    /// Concept names satisfied by an anonymous element `a·w·R`, i.e. the
    /// names `A` with `∃R⁻ ⊑_T A`.
    pub fn anonymous_concepts(&self, last: &Role) -> Vec<String> {
        self.atomic_supers(&BasicConcept::Exists(last.inverse()))
    }

    /// Whether the anonymous element reached by `last` satisfies concept `name`.
    pub fn anonymous_satisfies(&self, last: &Role, name: &str) -> bool {
        self.subsumes_concept(
            &BasicConcept::Exists(last.inverse()),
            &BasicConcept::Atomic(name.to_string()),
        )
    }

    /// Roles `R'` that may follow `role` in a word of `W_T`.
    pub fn word_successors(&self, role: &Role) -> &[Role] {
        self.word_successors
            .get(role)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Whether `word` belongs to `W_T`.
    pub fn is_word(&self, word: &Word) -> bool {
        if word.roles().iter().any(|r| !self.generating.contains(r)) {
            return false;
        }
        word.roles()
            .windows(2)
            .all(|pair| self.word_successors(&pair[0]).contains(&pair[1]))
    }

    /// Maximal word length in `W_T`, found by cycle detection on the word graph
    /// over the generating roles.
    pub fn depth(&self) -> Depth {
        self.depth
    }

    /// All words of `W_T` with length at most `max_len`, shortest first and
    /// then in role order. The empty word comes first.
    pub fn words(&self, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut frontier: Vec<Word> = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                let candidates: Vec<Role> = match w.last() {
                    None => self.generating.iter().cloned().collect(),
                    Some(r) => self.word_successors(r).to_vec(),
                };
                for r in candidates {
                    next.push(w.extended(r));
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort();
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// All of `W_T` when the depth is finite.
    pub fn all_words(&self) -> Result<Vec<Word>> {
        match self.depth {
            Depth::Finite(d) => Ok(self.words(d)),
            Depth::Omega => Err(Error::InfiniteDepth),
        }
    }
}

impl fmt::Display for TBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for axiom in self.axioms() {
            match axiom {
                Axiom::ConceptInclusion(a, b) => writeln!(f, "{a} sub {b}")?,
                Axiom::RoleInclusion(a, b) => writeln!(f, "{a} rsub {b}")?,
                Axiom::ConceptDisjoint(a, b) => writeln!(f, "{a} disj {b}")?,
                Axiom::RoleDisjoint(a, b) => writeln!(f, "{a} rdisj {b}")?,
            }
        }
        Ok(())
    }
}

fn reflexive_transitive_closure<T: Ord + Clone>(
    nodes: impl IntoIterator<Item = T>,
    edges: impl IntoIterator<Item = (T, T)>,
) -> BTreeMap<T, BTreeSet<T>> {
    let mut adjacency: BTreeMap<T, BTreeSet<T>> = BTreeMap::new();
    for n in nodes {
        adjacency.entry(n).or_default();
    }
    for (a, b) in edges {
        adjacency.entry(b.clone()).or_default();
        adjacency.entry(a).or_default().insert(b);
    }
    let mut closure = BTreeMap::new();
    for start in adjacency.keys() {
        let mut seen = BTreeSet::new();
        seen.insert(start.clone());
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(n) = queue.pop_front() {
            for m in &adjacency[&n] {
                if seen.insert(m.clone()) {
                    queue.push_back(m.clone());
                }
            }
        }
        closure.insert(start.clone(), seen);
    }
    closure
}

fn invert<T: Ord + Clone>(map: &BTreeMap<T, BTreeSet<T>>) -> BTreeMap<T, BTreeSet<T>> {
    let mut out: BTreeMap<T, BTreeSet<T>> = BTreeMap::new();
    for (k, vs) in map {
        out.entry(k.clone()).or_default();
        for v in vs {
            out.entry(v.clone()).or_default().insert(k.clone());
        }
    }
    out
}

fn word_graph_depth(nodes: &BTreeSet<Role>, successors: &BTreeMap<Role, Vec<Role>>) -> Depth {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done(usize),
    }
    fn visit(
        r: &Role,
        successors: &BTreeMap<Role, Vec<Role>>,
        marks: &mut BTreeMap<Role, Mark>,
    ) -> Option<usize> {
        match marks.get(r) {
            Some(Mark::Open) => return None,
            Some(Mark::Done(d)) => return Some(*d),
            None => {}
        }
        marks.insert(r.clone(), Mark::Open);
        let mut longest = 0;
        for next in &successors[r] {
            longest = longest.max(visit(next, successors, marks)?);
        }
        marks.insert(r.clone(), Mark::Done(longest + 1));
        Some(longest + 1)
    }

    let mut marks = BTreeMap::new();
    let mut depth = 0;
    for r in nodes {
        match visit(r, successors, &mut marks) {
            Some(d) => depth = depth.max(d),
            None => return Depth::Omega,
        }
    }
    Depth::Finite(depth)
}
