use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

/// A concept atom `A(v)` or a role atom `P(u, v)`. Variables are query-local names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CqAtom {
    Concept(String, String),
    Role(String, String, String),
}

impl CqAtom {
    pub fn concept(name: impl Into<String>, v: impl Into<String>) -> Self {
        CqAtom::Concept(name.into(), v.into())
    }

    pub fn role(name: impl Into<String>, u: impl Into<String>, v: impl Into<String>) -> Self {
        CqAtom::Role(name.into(), u.into(), v.into())
    }

    pub fn predicate(&self) -> &str {
        match self {
            CqAtom::Concept(p, _) | CqAtom::Role(p, _, _) => p,
        }
    }

    pub fn vars(&self) -> Vec<&str> {
        match self {
            CqAtom::Concept(_, v) => vec![v.as_str()],
            CqAtom::Role(_, u, v) if u == v => vec![u.as_str()],
            CqAtom::Role(_, u, v) => vec![u.as_str(), v.as_str()],
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.vars().contains(&var)
    }
}

impl fmt::Display for CqAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CqAtom::Concept(a, v) => write!(f, "{a}({v})"),
            CqAtom::Role(p, u, v) => write!(f, "{p}({u},{v})"),
        }
    }
}

/// A conjunctive query: a set of atoms with an ordered list of answer variables.
///
/// Atoms keep their first-occurrence order with duplicates removed; variables
/// are ordered by first occurrence, answer variables first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cq {
    answer_vars: Vec<String>,
    atoms: Vec<CqAtom>,
    vars: Vec<String>,
}

impl Cq {
    /// Every answer variable must occur in some atom; repeated answer
    /// variables and repeated atoms are collapsed.
    pub fn new(answer_vars: Vec<String>, atoms: Vec<CqAtom>) -> Self {
        let mut seen_atoms = BTreeSet::new();
        let atoms: Vec<CqAtom> = atoms.into_iter().filter(|a| seen_atoms.insert(a.clone())).collect();
        let mut seen_answers = BTreeSet::new();
        let answer_vars: Vec<String> = answer_vars
            .into_iter()
            .filter(|v| seen_answers.insert(v.clone()))
            .collect();
        let mut vars: Vec<String> = Vec::new();
        let mut seen = BTreeSet::new();
        for v in answer_vars.iter().map(|s| s.as_str()).chain(atoms.iter().flat_map(|a| a.vars())) {
            if seen.insert(v.to_string()) {
                vars.push(v.to_string());
            }
        }
        Cq {
            answer_vars,
            atoms,
            vars,
        }
    }

    pub fn answer_vars(&self) -> &[String] {
        &self.answer_vars
    }

    pub fn atoms(&self) -> &[CqAtom] {
        &self.atoms
    }

    /// `var(q)` in first-occurrence order.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_answer_var(&self, v: &str) -> bool {
        self.answer_vars.iter().any(|x| x == v)
    }

    pub fn existential_vars(&self) -> Vec<String> {
        self.vars
            .iter()
            .filter(|v| !self.is_answer_var(v))
            .cloned()
            .collect()
    }

    pub fn is_boolean(&self) -> bool {
        self.answer_vars.is_empty()
    }

    /// Position of a variable in `vars()`.
    pub fn var_index(&self, v: &str) -> Option<usize> {
        self.vars.iter().position(|x| x == v)
    }

    /// Adjacency of the Gaifman graph: `{u, v}` for every role atom with `u ≠ v`.
    pub fn gaifman(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut adj: BTreeMap<String, BTreeSet<String>> =
            self.vars.iter().map(|v| (v.clone(), BTreeSet::new())).collect();
        for atom in &self.atoms {
            if let CqAtom::Role(_, u, v) = atom {
                if u != v {
                    adj.get_mut(u).unwrap().insert(v.clone());
                    adj.get_mut(v).unwrap().insert(u.clone());
                }
            }
        }
        adj
    }

    /// Neighbours of `v` in the Gaifman graph, in variable order.
    pub fn neighbours(&self, v: &str) -> Vec<String> {
        let adj = self.gaifman();
        let set = adj.get(v).cloned().unwrap_or_default();
        self.vars.iter().filter(|u| set.contains(*u)).cloned().collect()
    }

    pub fn gaifman_edge_count(&self) -> usize {
        self.gaifman().values().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Connected components of the Gaifman graph, each in variable order,
    /// listed by their first variable.
    pub fn component_vars(&self) -> Vec<Vec<String>> {
        let adj = self.gaifman();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for start in &self.vars {
            if seen.contains(start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([start.clone()]);
            seen.insert(start.clone());
            while let Some(v) = queue.pop_front() {
                comp.insert(v.clone());
                for u in &adj[&v] {
                    if seen.insert(u.clone()) {
                        queue.push_back(u.clone());
                    }
                }
            }
            out.push(self.vars.iter().filter(|v| comp.contains(*v)).cloned().collect());
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.component_vars().len() <= 1
    }

    /// Whether the Gaifman graph is a tree (connected and acyclic).
    pub fn is_tree_shaped(&self) -> bool {
        self.is_connected() && self.gaifman_edge_count() + 1 == self.vars.len().max(1)
    }

    /// Vertices of degree ≤ 1 in the Gaifman graph.
    pub fn leaves(&self) -> Vec<String> {
        let adj = self.gaifman();
        self.vars
            .iter()
            .filter(|v| adj[*v].len() <= 1)
            .cloned()
            .collect()
    }

    /// The subquery over the atoms whose variables all lie in `vars`, with
    /// the given answer variables.
    pub fn restrict(&self, vars: &BTreeSet<String>, answer_vars: Vec<String>) -> Cq {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| a.vars().iter().all(|v| vars.contains(*v)))
            .cloned()
            .collect();
        Cq::new(answer_vars, atoms)
    }

    /// Connected components as queries; each keeps its own answer variables
    /// in the original order.
    pub fn components(&self) -> Vec<Cq> {
        self.component_vars()
            .into_iter()
            .map(|comp| {
                let set: BTreeSet<String> = comp.iter().cloned().collect();
                let answers = self
                    .answer_vars
                    .iter()
                    .filter(|v| set.contains(*v))
                    .cloned()
                    .collect();
                let mut q = self.restrict(&set, answers);
                // keep isolated variables that only occur as answer variables
                if q.vars.is_empty() {
                    q.vars = comp;
                }
                q
            })
            .collect()
    }
}

impl fmt::Display for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q({}) :- ", self.answer_vars.join(","))?;
        let atoms: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", atoms.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(letters: &str) -> Cq {
        let atoms = letters
            .chars()
            .enumerate()
            .map(|(i, c)| CqAtom::role(c.to_string(), format!("x{i}"), format!("x{}", i + 1)))
            .collect();
        Cq::new(vec!["x0".into(), format!("x{}", letters.len())], atoms)
    }

    #[test]
    fn chain_is_tree() {
        let q = chain("RSRRSRR");
        assert_eq!(q.vars().len(), 8);
        assert_eq!(q.vars()[1], "x7");
        assert!(q.is_tree_shaped());
        assert_eq!(q.existential_vars().len(), 6);
        assert_eq!(q.leaves(), vec!["x0".to_string(), "x7".to_string()]);
    }

    #[test]
    fn triangle_is_not_tree() {
        let q = Cq::new(
            vec![],
            vec![
                CqAtom::role("P", "x", "y"),
                CqAtom::role("P", "y", "z"),
                CqAtom::role("P", "z", "x"),
            ],
        );
        assert!(q.is_connected());
        assert!(!q.is_tree_shaped());
    }

    #[test]
    fn components_split() {
        let q = Cq::new(
            vec!["x".into()],
            vec![CqAtom::concept("A", "x"), CqAtom::role("R", "y", "z"), CqAtom::role("R", "z", "z")],
        );
        let comps = q.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].answer_vars(), ["x".to_string()]);
        assert!(comps[1].is_boolean());
        assert_eq!(comps[1].atoms().len(), 2);
        assert!(comps[1].is_tree_shaped());
    }

    #[test]
    fn duplicates_removed() {
        let q = Cq::new(vec![], vec![CqAtom::concept("A", "x"), CqAtom::concept("A", "x")]);
        assert_eq!(q.atoms().len(), 1);
    }
}
