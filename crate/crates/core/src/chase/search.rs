use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::context::{ChaseContext, Elem};
use crate::dl::{Cq, CqAtom};

/// Where a variable may be mapped.
#[derive(Debug, Clone)]
pub(crate) enum Domain {
    Any,
    Named,
    Anonymous,
    Fixed(Elem),
}

impl Domain {
    pub fn admits(&self, e: &Elem) -> bool {
        match self {
            Domain::Any => true,
            Domain::Named => e.is_named(),
            Domain::Anonymous => !e.is_named(),
            Domain::Fixed(f) => f == e,
        }
    }
}

enum LocalAtom {
    Concept(String, usize),
    Role(String, usize, usize),
}

/// Backtracking search for homomorphisms of a connected query into the
/// canonical model. Variables are visited in BFS order from a start
/// variable, so every later variable is adjacent to an earlier one and its
/// candidates are the model neighbours of that earlier image.
pub(crate) struct Search<'c, 't> {
    ctx: &'c ChaseContext<'t>,
    atoms: Vec<LocalAtom>,
    order: Vec<usize>,
    anchor: Vec<usize>,
    checks: Vec<Vec<usize>>,
    domains: Vec<Domain>,
    answers: Vec<usize>,
    last_answer_pos: Option<usize>,
    assignment: Vec<Option<Elem>>,
    found: BTreeSet<Vec<Elem>>,
}

impl<'c, 't> Search<'c, 't> {
    /// `cq` must be connected; `start` is one of its variables.
    pub fn new(
        ctx: &'c ChaseContext<'t>,
        cq: &Cq,
        start: &str,
        domains: &HashMap<String, Domain>,
    ) -> Self {
        let vars = cq.vars();
        let idx: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let atoms: Vec<LocalAtom> = cq
            .atoms()
            .iter()
            .map(|a| match a {
                CqAtom::Concept(c, v) => LocalAtom::Concept(c.clone(), idx[v.as_str()]),
                CqAtom::Role(p, u, v) => LocalAtom::Role(p.clone(), idx[u.as_str()], idx[v.as_str()]),
            })
            .collect();
        let adj = cq.gaifman();
        let mut order = vec![idx[start]];
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([idx[start]]);
        let mut seen = vec![false; vars.len()];
        seen[idx[start]] = true;
        while let Some(v) = queue.pop_front() {
            for u in vars {
                let j = idx[u.as_str()];
                if !seen[j] && adj[&vars[v]].contains(u) {
                    seen[j] = true;
                    parent.insert(j, v);
                    order.push(j);
                    queue.push_back(j);
                }
            }
        }
        assert_eq!(order.len(), vars.len(), "search requires a connected query");
        let mut position = vec![0; vars.len()];
        for (p, &v) in order.iter().enumerate() {
            position[v] = p;
        }
        let anchor = order.iter().map(|v| parent.get(v).copied().unwrap_or(usize::MAX)).collect();
        let mut checks = vec![Vec::new(); vars.len()];
        for (i, a) in atoms.iter().enumerate() {
            let p = match a {
                LocalAtom::Concept(_, v) => position[*v],
                LocalAtom::Role(_, u, v) => position[*u].max(position[*v]),
            };
            checks[p].push(i);
        }
        let answers: Vec<usize> = cq.answer_vars().iter().map(|v| idx[v.as_str()]).collect();
        let last_answer_pos = answers.iter().map(|&v| position[v]).max();
        let domains = vars
            .iter()
            .map(|v| domains.get(v).cloned().unwrap_or(Domain::Any))
            .collect();
        Search {
            ctx,
            atoms,
            order,
            anchor,
            checks,
            domains,
            answers,
            last_answer_pos,
            assignment: vec![None; vars.len()],
            found: BTreeSet::new(),
        }
    }

    /// Images of the answer variables over all homomorphisms whose start
    /// variable is mapped to one of `starts`. For a Boolean query the result
    /// is `{[]}` or empty.
    pub fn run(&mut self, starts: &[Elem]) -> &BTreeSet<Vec<Elem>> {
        if self.last_answer_pos.is_none() {
            if !self.found.is_empty() {
                return &self.found;
            }
            if self.descend(0, starts) {
                self.found.insert(Vec::new());
            }
        } else {
            self.descend(0, starts);
        }
        &self.found
    }

    fn satisfied(&self, pos: usize) -> bool {
        self.checks[pos].iter().all(|&i| match &self.atoms[i] {
            LocalAtom::Concept(c, v) => self.ctx.holds_concept(c, self.assignment[*v].as_ref().unwrap()),
            LocalAtom::Role(p, u, v) => self.ctx.holds_role(
                p,
                self.assignment[*u].as_ref().unwrap(),
                self.assignment[*v].as_ref().unwrap(),
            ),
        })
    }

    fn descend(&mut self, pos: usize, starts: &[Elem]) -> bool {
        if pos == self.order.len() {
            return true;
        }
        let v = self.order[pos];
        let candidates = if pos == 0 {
            starts.to_vec()
        } else {
            self.ctx.neighbours(self.assignment[self.anchor[pos]].as_ref().unwrap())
        };
        let existential = self.last_answer_pos.is_none_or(|l| pos > l);
        for c in candidates {
            if !self.domains[v].admits(&c) {
                continue;
            }
            self.assignment[v] = Some(c);
            if self.satisfied(pos) {
                if existential {
                    if self.descend(pos + 1, starts) {
                        self.assignment[v] = None;
                        return true;
                    }
                } else if Some(pos) == self.last_answer_pos {
                    let tuple: Vec<Elem> = self
                        .answers
                        .iter()
                        .map(|&a| self.assignment[a].clone().unwrap())
                        .collect();
                    if !self.found.contains(&tuple) && self.descend(pos + 1, starts) {
                        self.found.insert(tuple);
                    }
                } else {
                    self.descend(pos + 1, starts);
                }
            }
            self.assignment[v] = None;
        }
        false
    }
}
