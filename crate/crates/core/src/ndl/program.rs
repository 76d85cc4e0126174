use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::{Error, Result};

/// The built-in equality predicate, interpreted as identity on `ind(A)`.
pub const EQ: &str = "=";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "\"{c}\""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// An atom whose arguments are all variables.
    pub fn vars(predicate: impl Into<String>, vars: &[impl AsRef<str>]) -> Self {
        Atom::new(predicate, vars.iter().map(|v| Term::var(v.as_ref())).collect())
    }

    pub fn eq(left: impl Into<String>, right: impl Into<String>) -> Self {
        Atom::new(EQ, vec![Term::Var(left.into()), Term::Var(right.into())])
    }

    pub fn is_equality(&self) -> bool {
        self.predicate == EQ
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Variables in argument order, with repetitions.
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| t.as_var())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_equality() && self.args.len() == 2 {
            return write!(f, "{} = {}", self.args[0], self.args[1]);
        }
        let args: Vec<String> = self.args.iter().map(|t| t.to_string()).collect();
        write!(f, "{}({})", self.predicate, args.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Atom>) -> Self {
        Clause { head, body }
    }

    /// Distinct variables of the clause, head first, by first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in std::iter::once(&self.head).chain(&self.body).flat_map(|a| a.variables()) {
            if seen.insert(v) {
                out.push(v.to_string());
            }
        }
        out
    }

    pub fn body_variables(&self) -> BTreeSet<&str> {
        self.body.iter().flat_map(|a| a.variables()).collect()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.body.is_empty() {
            return write!(f, "{}.", self.head);
        }
        let body: Vec<String> = self.body.iter().map(|a| a.to_string()).collect();
        write!(f, "{} :- {}.", self.head, body.join(", "))
    }
}

/// An NDL query `(Π, G)`. `params` maps IDB predicates to their parameter
/// variables, which occupy the trailing argument positions of every
/// occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub goal: String,
    pub goal_arity: usize,
    pub params: BTreeMap<String, Vec<String>>,
}

/// Structural properties of a valid program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub nonrecursive: bool,
    pub ordered: bool,
    pub linear: bool,
    pub skinny: bool,
    pub depth: usize,
    pub width: usize,
    pub arity: usize,
    pub clauses: usize,
    pub idb_predicates: usize,
}

impl Program {
    pub fn new(goal: impl Into<String>, goal_arity: usize) -> Self {
        Program {
            clauses: Vec::new(),
            goal: goal.into(),
            goal_arity,
            params: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, clause: Clause) {
        self.clauses.push(clause);
    }

    /// Predicates occurring in heads.
    pub fn idb(&self) -> BTreeSet<&str> {
        self.clauses.iter().map(|c| c.head.predicate.as_str()).collect()
    }

    pub fn is_idb(&self, predicate: &str) -> bool {
        self.clauses.iter().any(|c| c.head.predicate == predicate)
    }

    /// Body predicates that never occur in a head, equality excluded.
    pub fn edb(&self) -> BTreeMap<String, usize> {
        let idb = self.idb();
        let mut out = BTreeMap::new();
        for atom in self.clauses.iter().flat_map(|c| &c.body) {
            if !atom.is_equality() && !idb.contains(atom.predicate.as_str()) {
                out.insert(atom.predicate.clone(), atom.arity());
            }
        }
        out
    }

    pub fn params_of(&self, predicate: &str) -> &[String] {
        self.params.get(predicate).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn goal_params(&self) -> &[String] {
        self.params_of(&self.goal)
    }

    /// Clause indices grouped by head predicate.
    pub fn definitions(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, c) in self.clauses.iter().enumerate() {
            out.entry(c.head.predicate.as_str()).or_default().push(i);
        }
        out
    }

    /// IDB predicates such that every body IDB predicate comes first.
    pub fn topological_order(&self) -> Result<Vec<String>> {
        let defs = self.definitions();
        let mut marks: HashMap<&str, bool> = HashMap::new();
        let mut order = Vec::new();
        let mut path: Vec<&str> = Vec::new();

        fn visit<'p>(
            p: &'p str,
            prog: &'p Program,
            defs: &BTreeMap<&'p str, Vec<usize>>,
            marks: &mut HashMap<&'p str, bool>,
            path: &mut Vec<&'p str>,
            order: &mut Vec<String>,
        ) -> Result<()> {
            match marks.get(p) {
                Some(true) => return Ok(()),
                Some(false) => {
                    let start = path.iter().position(|q| *q == p).unwrap();
                    let mut cycle: Vec<String> = path[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(p.to_string());
                    return Err(Error::RecursionDetected(cycle));
                }
                None => {}
            }
            marks.insert(p, false);
            path.push(p);
            for &i in &defs[p] {
                for atom in &prog.clauses[i].body {
                    if defs.contains_key(atom.predicate.as_str()) {
                        visit(&atom.predicate, prog, defs, marks, path, order)?;
                    }
                }
            }
            path.pop();
            marks.insert(p, true);
            order.push(p.to_string());
            Ok(())
        }

        for p in defs.keys() {
            visit(p, self, &defs, &mut marks, &mut path, &mut order)?;
        }
        Ok(order)
    }

    /// Checks nonrecursion, safety, equality placement, arities and, when
    /// parameters are declared, the ordered conditions.
    pub fn validate(&self) -> Result<Report> {
        let order = self.topological_order()?;
        let mut arities: HashMap<&str, usize> = HashMap::new();
        for c in &self.clauses {
            if c.head.is_equality() {
                return Err(Error::EqualityInHead);
            }
            for atom in std::iter::once(&c.head).chain(&c.body) {
                if atom.is_equality() {
                    if atom.arity() != 2 {
                        return Err(Error::ArityMismatch {
                            predicate: EQ.to_string(),
                            expected: 2,
                            found: atom.arity(),
                        });
                    }
                    continue;
                }
                let expected = *arities.entry(&atom.predicate).or_insert(atom.arity());
                if expected != atom.arity() {
                    return Err(Error::ArityMismatch {
                        predicate: atom.predicate.clone(),
                        expected,
                        found: atom.arity(),
                    });
                }
            }
            let body = c.body_variables();
            if let Some(v) = c.head.variables().find(|v| !body.contains(v)) {
                return Err(Error::UnsafeHead {
                    head: c.head.to_string(),
                    variable: v.to_string(),
                });
            }
        }
        if let Some(&a) = arities.get(self.goal.as_str()) {
            if a != self.goal_arity {
                return Err(Error::ArityMismatch {
                    predicate: self.goal.clone(),
                    expected: self.goal_arity,
                    found: a,
                });
            }
        }
        let ordered = if self.params.is_empty() {
            false
        } else {
            self.check_ordered()?;
            true
        };
        let depths = self.depths_in(&order);
        Ok(Report {
            nonrecursive: true,
            ordered,
            linear: self.is_linear(),
            skinny: self.is_skinny(),
            depth: depths.get(&self.goal).copied().unwrap_or(0),
            width: self.width(),
            arity: self.arity(),
            clauses: self.clauses.len(),
            idb_predicates: order.len(),
        })
    }

    fn check_ordered(&self) -> Result<()> {
        let violation = |msg: String| Err(Error::OrderedViolation(msg));
        let goal_params = self.goal_params();
        if goal_params.len() != self.goal_arity {
            return violation(format!(
                "goal {} has {} parameters, expected {}",
                self.goal,
                goal_params.len(),
                self.goal_arity
            ));
        }
        let position: HashMap<&str, usize> = goal_params.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        for (p, ps) in &self.params {
            let idx: Option<Vec<usize>> = ps.iter().map(|v| position.get(v.as_str()).copied()).collect();
            match idx {
                Some(idx) if idx.windows(2).all(|w| w[0] < w[1]) => {}
                _ => return violation(format!("parameters of {p} are not an ordered subset of the goal parameters")),
            }
        }
        let is_param = |v: &str| position.contains_key(v);
        for c in &self.clauses {
            for atom in std::iter::once(&c.head).chain(&c.body) {
                if !self.is_idb(&atom.predicate) {
                    continue;
                }
                let ps = self.params_of(&atom.predicate);
                if ps.len() > atom.arity() {
                    return violation(format!("{atom} is shorter than its parameter list"));
                }
                let tail = &atom.args[atom.arity() - ps.len()..];
                if tail.iter().zip(ps).any(|(t, v)| t.as_var() != Some(v.as_str())) {
                    return violation(format!("{atom} does not end with its parameters {}", ps.join(",")));
                }
            }
            let head_params = self.params_of(&c.head.predicate);
            for v in c.body_variables() {
                if is_param(v) && !head_params.iter().any(|h| h == v) {
                    return violation(format!(
                        "parameter {v} occurs in the body of a clause for {} but is not among its parameters",
                        c.head.predicate
                    ));
                }
            }
        }
        Ok(())
    }

    /// Depth of every IDB predicate; an EDB edge counts one.
    fn depths_in(&self, order: &[String]) -> HashMap<String, usize> {
        let mut depth: HashMap<String, usize> = HashMap::new();
        let defs = self.definitions();
        for p in order {
            let d = defs[p.as_str()]
                .iter()
                .flat_map(|&i| &self.clauses[i].body)
                .map(|a| 1 + depth.get(&a.predicate).copied().unwrap_or(0))
                .max()
                .unwrap_or(0);
            depth.insert(p.clone(), d);
        }
        depth
    }

    /// Length of the longest dependence path from the goal.
    pub fn depth(&self) -> Result<usize> {
        let order = self.topological_order()?;
        Ok(self.depths_in(&order).get(&self.goal).copied().unwrap_or(0))
    }

    /// Maximal number of non-parameter variables in a clause.
    pub fn width(&self) -> usize {
        let params: BTreeSet<&str> = self.goal_params().iter().map(|s| s.as_str()).collect();
        self.clauses
            .iter()
            .map(|c| c.variables().iter().filter(|v| !params.contains(v.as_str())).count())
            .max()
            .unwrap_or(0)
    }

    /// Maximal arity of an IDB predicate.
    pub fn arity(&self) -> usize {
        self.clauses.iter().map(|c| c.head.arity()).max().unwrap_or(0)
    }

    /// At most one IDB atom per body.
    pub fn is_linear(&self) -> bool {
        let idb = self.idb();
        self.clauses
            .iter()
            .all(|c| c.body.iter().filter(|a| idb.contains(a.predicate.as_str())).count() <= 1)
    }

    /// At most two atoms per body.
    pub fn is_skinny(&self) -> bool {
        self.clauses.iter().all(|c| c.body.len() <= 2)
    }

    /// Keeps the clauses reachable from the goal whose body predicates are
    /// all defined (EDB or productive IDB).
    pub fn prune(&self) -> Program {
        let edb = self.edb();
        let mut productive: BTreeSet<String> = BTreeSet::new();
        loop {
            let mut changed = false;
            for c in &self.clauses {
                if productive.contains(&c.head.predicate) {
                    continue;
                }
                let ok = c.body.iter().all(|a| {
                    a.is_equality() || edb.contains_key(&a.predicate) || productive.contains(&a.predicate)
                });
                if ok {
                    productive.insert(c.head.predicate.clone());
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let usable = |c: &Clause| {
            c.body
                .iter()
                .all(|a| a.is_equality() || edb.contains_key(&a.predicate) || productive.contains(&a.predicate))
        };
        let mut reachable: BTreeSet<String> = BTreeSet::from([self.goal.clone()]);
        let mut stack = vec![self.goal.clone()];
        while let Some(p) = stack.pop() {
            for c in self.clauses.iter().filter(|c| c.head.predicate == p && usable(c)) {
                for a in &c.body {
                    if productive.contains(&a.predicate) && reachable.insert(a.predicate.clone()) {
                        stack.push(a.predicate.clone());
                    }
                }
            }
        }
        let clauses: Vec<Clause> = self
            .clauses
            .iter()
            .filter(|c| reachable.contains(&c.head.predicate) && usable(c))
            .cloned()
            .collect();
        let kept: BTreeSet<&str> = clauses.iter().map(|c| c.head.predicate.as_str()).collect();
        Program {
            params: self
                .params
                .iter()
                .filter(|(p, _)| kept.contains(p.as_str()) || **p == self.goal)
                .map(|(p, v)| (p.clone(), v.clone()))
                .collect(),
            clauses,
            goal: self.goal.clone(),
            goal_arity: self.goal_arity,
        }
    }

    /// Removes equality atoms by unifying variables inside each clause.
    /// Parameters are preferred as representatives; an equality between two
    /// distinct parameters or with a constant is kept, and a variable that
    /// would otherwise vanish from the body keeps a `v = v` guard.
    pub fn inline_equalities(&self) -> Program {
        let params: BTreeSet<&str> = self.goal_params().iter().map(|s| s.as_str()).collect();
        let clauses = self.clauses.iter().map(|c| inline_clause(c, &params)).collect();
        Program {
            clauses,
            goal: self.goal.clone(),
            goal_arity: self.goal_arity,
            params: self.params.clone(),
        }
    }
}

fn inline_clause(c: &Clause, params: &BTreeSet<&str>) -> Clause {
    let mut parent: BTreeMap<String, String> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<String, String>, v: &str) -> String {
        let p = parent.get(v).cloned().unwrap_or_else(|| v.to_string());
        if p == v {
            return p;
        }
        let root = find(parent, &p);
        parent.insert(v.to_string(), root.clone());
        root
    }
    let order = c.variables();
    let rank = |v: &str| (!params.contains(v), order.iter().position(|x| x == v));
    let mut kept = Vec::new();
    for atom in &c.body {
        if !atom.is_equality() {
            continue;
        }
        match (&atom.args[0], &atom.args[1]) {
            (Term::Var(a), Term::Var(b)) => {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    continue;
                }
                if params.contains(ra.as_str()) && params.contains(rb.as_str()) {
                    kept.push(atom.clone());
                    continue;
                }
                let (root, child) = if rank(&ra) <= rank(&rb) { (ra, rb) } else { (rb, ra) };
                parent.insert(child, root);
            }
            _ => kept.push(atom.clone()),
        }
    }
    let mut subst = |t: &Term| match t {
        Term::Var(v) => Term::Var(find(&mut parent, v)),
        Term::Const(_) => t.clone(),
    };
    let mut rename = |a: &Atom| Atom::new(a.predicate.clone(), a.args.iter().map(&mut subst).collect());
    let head = rename(&c.head);
    let mut body: Vec<Atom> = c.body.iter().filter(|a| !a.is_equality()).map(&mut rename).collect();
    let kept: Vec<Atom> = kept.iter().map(&mut rename).collect();
    let guarded: BTreeSet<String> = c
        .body
        .iter()
        .filter(|a| a.is_equality())
        .flat_map(|a| a.variables())
        .map(|v| find(&mut parent, v))
        .collect();
    let mut seen_dedup = BTreeSet::new();
    body.retain(|a| seen_dedup.insert(a.clone()));
    for atom in kept {
        if seen_dedup.insert(atom.clone()) {
            body.push(atom);
        }
    }
    for v in guarded {
        if !body.iter().any(|a| a.variables().any(|x| x == v)) {
            body.push(Atom::eq(v.clone(), v));
        }
    }
    Clause::new(head, body)
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clause(head: Atom, body: Vec<Atom>) -> Clause {
        Clause::new(head, body)
    }

    fn single() -> Program {
        let mut p = Program::new("G", 1);
        p.push(clause(Atom::vars("G", &["x"]), vec![Atom::vars("E", &["x"])]));
        p
    }

    #[test]
    fn trivial_program() {
        let r = single().validate().unwrap();
        assert_eq!(r.depth, 1);
        assert!(r.linear && r.skinny && r.nonrecursive);
        assert!(!r.ordered);
    }

    #[test]
    fn branching_program() {
        let mut p = Program::new("G", 1);
        p.push(clause(Atom::vars("G", &["x"]), vec![Atom::vars("P", &["x"]), Atom::vars("Q", &["x"])]));
        p.push(clause(Atom::vars("P", &["x"]), vec![Atom::vars("E", &["x"])]));
        p.push(clause(Atom::vars("Q", &["x"]), vec![Atom::vars("E", &["x"])]));
        let r = p.validate().unwrap();
        assert_eq!(r.depth, 2);
        assert!(!r.linear);
        assert!(r.skinny);
    }

    #[test]
    fn recursion_detected() {
        let mut p = Program::new("G", 1);
        p.push(clause(Atom::vars("G", &["x"]), vec![Atom::vars("G", &["x"])]));
        match p.validate() {
            Err(Error::RecursionDetected(cycle)) => assert_eq!(cycle, vec!["G", "G"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unsafe_and_arity_errors() {
        let mut p = Program::new("G", 1);
        p.push(clause(Atom::vars("G", &["x"]), vec![Atom::vars("E", &["y"])]));
        assert!(matches!(p.validate(), Err(Error::UnsafeHead { .. })));
        let mut p = Program::new("G", 1);
        p.push(clause(Atom::vars("G", &["x"]), vec![Atom::vars("E", &["x"]), Atom::vars("E", &["x", "x"])]));
        assert!(matches!(p.validate(), Err(Error::ArityMismatch { .. })));
        let mut p = Program::new("G", 1);
        p.push(clause(Atom::eq("x", "x"), vec![Atom::vars("E", &["x"])]));
        assert!(matches!(p.validate(), Err(Error::EqualityInHead)));
    }

    #[test]
    fn ordered_conditions() {
        let mut p = Program::new("G", 1);
        p.push(clause(Atom::vars("G", &["x"]), vec![Atom::vars("P", &["y", "x"]), Atom::vars("E", &["y"])]));
        p.push(clause(Atom::vars("P", &["y", "x"]), vec![Atom::vars("R", &["y", "x"])]));
        p.params.insert("G".into(), vec!["x".into()]);
        p.params.insert("P".into(), vec!["x".into()]);
        let r = p.validate().unwrap();
        assert!(r.ordered);
        assert_eq!(r.width, 1);
        p.params.insert("P".into(), vec![]);
        assert!(matches!(p.validate(), Err(Error::OrderedViolation(_))));
    }

    #[test]
    fn pruning_drops_unproductive() {
        let mut p = single();
        p.push(clause(Atom::vars("G", &["x"]), vec![Atom::vars("U", &["x"])]));
        p.push(clause(Atom::vars("U", &["x"]), vec![Atom::vars("U2", &["x"]), Atom::vars("V", &["x"])]));
        p.push(clause(Atom::vars("U2", &["x"]), vec![Atom::vars("U", &["x"])]));
        p.push(clause(Atom::vars("H", &["x"]), vec![Atom::vars("E", &["x"])]));
        // U and U2 are mutually dependent but also never productive
        let pruned = p.prune();
        assert_eq!(pruned.clauses, single().clauses);
    }

    #[test]
    fn inline_prefers_parameters() {
        let mut p = Program::new("G", 1);
        p.params.insert("G".into(), vec!["x".into()]);
        p.push(clause(
            Atom::vars("G", &["x"]),
            vec![Atom::vars("R", &["y", "z"]), Atom::eq("y", "x"), Atom::eq("u", "u")],
        ));
        let q = p.inline_equalities();
        assert_eq!(q.clauses[0].to_string(), "G(x) :- R(x,z), u = u.");
    }
}
