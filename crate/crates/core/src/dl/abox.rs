use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::syntax::{BasicConcept, Role};
use super::tbox::TBox;

/// A finite set of concept facts `A(a)` and role facts `P(a, b)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ABox {
    concepts: BTreeSet<(String, String)>,
    roles: BTreeSet<(String, String, String)>,
}

impl ABox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_concept(&mut self, concept: impl Into<String>, ind: impl Into<String>) -> bool {
        self.concepts.insert((concept.into(), ind.into()))
    }

    pub fn add_role(
        &mut self,
        role: impl Into<String>,
        a: impl Into<String>,
        b: impl Into<String>,
    ) -> bool {
        self.roles.insert((role.into(), a.into(), b.into()))
    }

    /// Adds `R(a, b)`, storing `P(b, a)` when `R = P⁻`.
    pub fn add_role_expr(&mut self, role: &Role, a: &str, b: &str) -> bool {
        let (first, second) = role.orient(a, b);
        self.add_role(role.name.clone(), first, second)
    }

    /// Concept facts as `(concept, individual)` pairs.
    pub fn concept_facts(&self) -> &BTreeSet<(String, String)> {
        &self.concepts
    }

    /// Role facts as `(role, subject, object)` triples.
    pub fn role_facts(&self) -> &BTreeSet<(String, String, String)> {
        &self.roles
    }

    pub fn len(&self) -> usize {
        self.concepts.len() + self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.roles.is_empty()
    }

    /// `ind(A)`, sorted.
    pub fn individuals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (_, a) in &self.concepts {
            out.insert(a.clone());
        }
        for (_, a, b) in &self.roles {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        out
    }

    pub fn has_concept(&self, concept: &str, ind: &str) -> bool {
        self.concepts.contains(&(concept.to_string(), ind.to_string()))
    }

    /// `R(a, b) ∈ A`, where `P⁻(a, b)` means `P(b, a)`.
    pub fn has_role(&self, role: &Role, a: &str, b: &str) -> bool {
        let (first, second) = role.orient(a, b);
        self.roles
            .contains(&(role.name.clone(), first.to_string(), second.to_string()))
    }

    /// Whether the basic concept holds at `ind` by a fact of the ABox itself.
    pub fn has_basic(&self, concept: &BasicConcept, ind: &str) -> bool {
        match concept {
            BasicConcept::Atomic(name) => self.has_concept(name, ind),
            BasicConcept::Exists(role) => self.roles.iter().any(|(p, a, b)| {
                *p == role.name && if role.inverse { b == ind } else { a == ind }
            }),
        }
    }

    /// Concept names asserted for each individual.
    pub fn concepts_by_individual(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (c, a) in &self.concepts {
            out.entry(a.clone()).or_default().insert(c.clone());
        }
        out
    }

    pub fn union(&self, other: &ABox) -> ABox {
        let mut out = self.clone();
        out.concepts.extend(other.concepts.iter().cloned());
        out.roles.extend(other.roles.iter().cloned());
        out
    }

    pub fn is_subset(&self, other: &ABox) -> bool {
        self.concepts.is_subset(&other.concepts) && self.roles.is_subset(&other.roles)
    }
}

impl fmt::Display for ABox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, a) in &self.concepts {
            writeln!(f, "{c}({a})")?;
        }
        for (p, a, b) in &self.roles {
            writeln!(f, "{p}({a},{b})")?;
        }
        Ok(())
    }
}

/// Closes `abox` under the role and concept inclusions of `tbox`: adds
/// `P(a,b)` for `R(a,b)` with `R ⊑_T P` and `A(a)` for `B(a)` with `B ⊑_T A`.
/// No individuals are introduced. The closures of `tbox` are transitive, so a
/// single pass reaches the fixpoint.
pub fn h_complete(tbox: &TBox, abox: &ABox) -> ABox {
    let mut out = abox.clone();
    for (p, a, b) in abox.role_facts() {
        for dir in [Role::new(p.clone()), Role::inv(p.clone())] {
            let (s, o) = dir.orient(a.as_str(), b.as_str());
            // `dir(s, o)` holds; every super-role holds as well.
            for sup in tbox.super_roles(&dir) {
                out.add_role_expr(&sup, s, o);
            }
            for name in tbox.atomic_supers(&BasicConcept::Exists(dir.clone())) {
                out.add_concept(name, s);
            }
        }
    }
    for (c, a) in abox.concept_facts() {
        for name in tbox.atomic_supers(&BasicConcept::atomic(c.clone())) {
            out.add_concept(name, a.clone());
        }
    }
    out
}
