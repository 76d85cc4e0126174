//! Evaluation of NDL queries over ABoxes.
//!
//! [`eval_seminaive`] computes all answers bottom-up, one predicate at a time
//! in dependence order. The linear and circuit engines decide a single
//! candidate tuple: with every parameter fixed to the candidate, they derive
//! the ground IDB atoms reachable from the EDB-only clauses (the grounding
//! graph, or the true gates of the circuit). Derived sets are memoized per
//! predicate and parameter values, so deciding many candidates shares work.

mod db;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use db::{compile, join, value, Arg, CClause, Database, Relation, Tuple};

use crate::dl::ABox;
use crate::ndl::Program;
use crate::{Error, Result};

/// All goal tuples, sorted lexicographically.
pub fn eval_seminaive(program: &Program, abox: &ABox) -> Result<Vec<Vec<String>>> {
    let order = program.topological_order()?;
    program.validate()?;
    let mut db = Database::new(abox);
    let defs = program.definitions();
    for p in &order {
        let mut set: HashSet<Tuple> = HashSet::new();
        for &i in &defs[p.as_str()] {
            let c = compile(&program.clauses[i], &db.ids);
            let rels: Vec<Option<&Relation>> = c.body.iter().map(|a| db.relations.get(&a.predicate)).collect();
            let mut binding = vec![None; c.var_count];
            join(&c.body, &rels, db.domain_size(), &mut binding, &mut |b| {
                if let Some(t) = head_tuple(&c, b) {
                    set.insert(t);
                }
            });
        }
        db.relations.insert(p.clone(), Relation::from_set(set));
    }
    let mut out: Vec<Vec<String>> = db
        .relations
        .get(&program.goal)
        .map(|r| {
            r.tuples
                .iter()
                .map(|t| t.iter().map(|&v| db.names[v as usize].clone()).collect())
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    Ok(out)
}

/// EDB predicates of the program that the ABox never mentions.
pub fn unknown_predicates(program: &Program, abox: &ABox) -> Vec<String> {
    let known: BTreeSet<&str> = abox
        .concept_facts()
        .iter()
        .map(|(c, _)| c.as_str())
        .chain(abox.role_facts().iter().map(|(p, _, _)| p.as_str()))
        .collect();
    program
        .edb()
        .into_keys()
        .filter(|p| !known.contains(p.as_str()))
        .collect()
}

fn head_tuple(c: &CClause, binding: &[Option<u32>]) -> Option<Tuple> {
    c.head.args.iter().map(|&a| value(a, binding)).collect()
}

/// Size measures of the grounding graph or circuit built so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Ground IDB atoms derived (graph vertices / OR gates).
    pub vertices: usize,
    /// Ground clause instances with an IDB body atom (graph edges).
    pub edges: usize,
    /// OR gates plus AND gates (one per ground clause instance).
    pub gates: usize,
    /// OR layers below the output gate.
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Linear,
    Circuit,
}

struct Derived {
    relation: Relation,
    depth: usize,
}

/// Per-candidate decision procedure shared by the linear and circuit engines.
pub struct GroundEvaluator {
    mode: Mode,
    db: Database,
    clauses: HashMap<String, Vec<CClause>>,
    /// Number of trailing bound positions of each IDB predicate.
    bound: HashMap<String, usize>,
    goal: String,
    goal_arity: usize,
    memo: HashMap<(String, Tuple), Rc<Derived>>,
    stats: EvalStats,
}

impl GroundEvaluator {
    /// Grounding-graph reachability for linear ordered programs.
    pub fn linear(program: &Program, abox: &ABox) -> Result<Self> {
        let report = program.validate()?;
        if !report.linear {
            let idb = program.idb();
            let c = program
                .clauses
                .iter()
                .find(|c| c.body.iter().filter(|a| idb.contains(a.predicate.as_str())).count() > 1)
                .unwrap();
            return Err(Error::NotLinear(c.to_string()));
        }
        Self::new(Mode::Linear, program, abox)
    }

    /// Monotone circuit evaluation for skinny programs.
    pub fn circuit(program: &Program, abox: &ABox) -> Result<Self> {
        let report = program.validate()?;
        if !report.skinny {
            let c = program.clauses.iter().find(|c| c.body.len() > 2).unwrap();
            return Err(Error::NotSkinny(c.to_string()));
        }
        Self::new(Mode::Circuit, program, abox)
    }

    fn new(mode: Mode, program: &Program, abox: &ABox) -> Result<Self> {
        let db = Database::new(abox);
        let mut clauses: HashMap<String, Vec<CClause>> = HashMap::new();
        for c in &program.clauses {
            clauses
                .entry(c.head.predicate.clone())
                .or_default()
                .push(compile(c, &db.ids));
        }
        // without declared parameters the goal is bound positionally
        let bound = program
            .idb()
            .into_iter()
            .map(|p| {
                let k = if program.params.is_empty() && p == program.goal {
                    program.goal_arity
                } else {
                    program.params_of(p).len()
                };
                (p.to_string(), k)
            })
            .collect();
        Ok(GroundEvaluator {
            mode,
            db,
            clauses,
            bound,
            goal: program.goal.clone(),
            goal_arity: program.goal_arity,
            memo: HashMap::new(),
            stats: EvalStats::default(),
        })
    }

    pub fn stats(&self) -> EvalStats {
        self.stats
    }

    /// Individuals of the ABox in interning order.
    pub fn individuals(&self) -> &[String] {
        &self.db.names
    }

    /// Whether the candidate is an answer.
    pub fn decide(&mut self, candidate: &[String]) -> Result<bool> {
        if candidate.len() != self.goal_arity {
            return Err(Error::ArityMismatch {
                predicate: self.goal.clone(),
                expected: self.goal_arity,
                found: candidate.len(),
            });
        }
        let Some(ids) = candidate.iter().map(|c| self.db.ids.get(c).copied()).collect::<Option<Tuple>>() else {
            return Ok(false);
        };
        if !self.clauses.contains_key(&self.goal) {
            return Ok(false);
        }
        let k = self.bound[&self.goal];
        let params = ids[ids.len() - k..].to_vec();
        let goal = self.goal.clone();
        let derived = self.derive(&goal, params)?;
        if self.mode == Mode::Circuit {
            self.stats.depth = self.stats.depth.max(derived.depth);
        }
        Ok(derived.relation.tuples.binary_search(&ids).is_ok())
    }

    fn derive(&mut self, predicate: &str, params: Tuple) -> Result<Rc<Derived>> {
        let key = (predicate.to_string(), params);
        if let Some(d) = self.memo.get(&key) {
            return Ok(d.clone());
        }
        let params = &key.1;
        let k = params.len();
        let clauses = self.clauses[predicate].clone();
        let mut set: HashSet<Tuple> = HashSet::new();
        let mut depth = 0;
        for c in &clauses {
            let mut binding: Vec<Option<u32>> = vec![None; c.var_count];
            let arity = c.head.args.len();
            let mut consistent = true;
            for (arg, &v) in c.head.args[arity - k..].iter().zip(params) {
                match *arg {
                    Arg::Var(i) if binding[i].is_none_or(|b| b == v) => binding[i] = Some(v),
                    Arg::Const(Some(x)) if x == v => {}
                    _ => consistent = false,
                }
            }
            if !consistent {
                continue;
            }
            let mut idb_parts: Vec<Option<Rc<Derived>>> = Vec::with_capacity(c.body.len());
            for atom in &c.body {
                if atom.equality || !self.clauses.contains_key(&atom.predicate) {
                    idb_parts.push(None);
                    continue;
                }
                let kb = self.bound[&atom.predicate];
                let n = atom.args.len();
                let sub: Option<Tuple> = atom.args[n - kb..].iter().map(|&a| value(a, &binding)).collect();
                let Some(sub) = sub else {
                    return Err(Error::NotOrdered(format!(
                        "parameters of {} are not bound by the head of a clause for {predicate}",
                        atom.predicate
                    )));
                };
                idb_parts.push(Some(self.derive(&atom.predicate, sub)?));
            }
            let has_idb = idb_parts.iter().any(|p| p.is_some());
            let rels: Vec<Option<&Relation>> = c
                .body
                .iter()
                .zip(&idb_parts)
                .map(|(a, p)| match p {
                    Some(d) => Some(&d.relation),
                    None => self.db.relations.get(&a.predicate),
                })
                .collect();
            let mut instances = 0usize;
            join(&c.body, &rels, self.db.domain_size(), &mut binding, &mut |b| {
                if let Some(t) = head_tuple(c, b) {
                    instances += 1;
                    set.insert(t);
                }
            });
            if instances > 0 {
                let below = idb_parts.iter().flatten().map(|d| d.depth).max().unwrap_or(0);
                depth = depth.max(below + 1);
            }
            self.stats.gates += instances;
            if has_idb {
                self.stats.edges += instances;
            }
        }
        self.stats.vertices += set.len();
        self.stats.gates += set.len();
        let derived = Rc::new(Derived {
            relation: Relation::from_set(set),
            depth,
        });
        self.memo.insert(key, derived.clone());
        Ok(derived)
    }
}

/// Decides one candidate with the grounding-graph engine.
pub fn eval_linear(program: &Program, abox: &ABox, candidate: &[String]) -> Result<(bool, EvalStats)> {
    let mut e = GroundEvaluator::linear(program, abox)?;
    let answer = e.decide(candidate)?;
    Ok((answer, e.stats()))
}

/// Decides one candidate with the circuit engine.
pub fn eval_circuit(program: &Program, abox: &ABox, candidate: &[String]) -> Result<(bool, EvalStats)> {
    let mut e = GroundEvaluator::circuit(program, abox)?;
    let answer = e.decide(candidate)?;
    Ok((answer, e.stats()))
}

/// Every candidate over `ind(A)` accepted by the evaluator, sorted.
pub fn all_answers(evaluator: &mut GroundEvaluator) -> Result<Vec<Vec<String>>> {
    let names = evaluator.individuals().to_vec();
    let arity = evaluator.goal_arity;
    let mut out = Vec::new();
    let mut idx = vec![0usize; arity];
    if arity > 0 && names.is_empty() {
        return Ok(out);
    }
    loop {
        let cand: Vec<String> = idx.iter().map(|&i| names[i].clone()).collect();
        if evaluator.decide(&cand)? {
            out.push(cand);
        }
        let mut p = arity;
        loop {
            if p == 0 {
                out.sort();
                return Ok(out);
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < names.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}
