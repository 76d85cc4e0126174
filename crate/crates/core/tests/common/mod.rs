#![allow(dead_code)]

use std::collections::BTreeSet;

use omq::bench::Method;
use omq::chase::{certain_answers, is_consistent};
use omq::dl::{h_complete, parse_abox, parse_cq, parse_tbox, ABox, Cq, Depth, TBox};
use omq::eval::{eval_circuit, eval_linear, eval_seminaive};
use omq::ndl::{lift_linear, lift_to_arbitrary, to_skinny, Program};
use omq::rewrite::{decompose_sq, tree_decomposition};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CONCEPTS: [&str; 3] = ["A", "B", "C"];
pub const ROLES: [&str; 3] = ["P", "Q", "R"];

pub struct Instance {
    pub tbox: TBox,
    pub cq: Cq,
    pub abox: ABox,
}

fn role(rng: &mut ChaCha8Rng) -> String {
    let r = *ROLES.choose(rng).unwrap();
    if rng.gen_bool(0.3) {
        format!("{r}-")
    } else {
        r.to_string()
    }
}

fn concept(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.5) {
        CONCEPTS.choose(rng).unwrap().to_string()
    } else {
        format!("ex {}", role(rng))
    }
}

pub fn random_tbox_text(rng: &mut ChaCha8Rng) -> String {
    let mut text = String::new();
    for _ in 0..rng.gen_range(2..=7) {
        let line = match rng.gen_range(0..12) {
            0..=5 => format!("{} sub ex {}", concept(rng), role(rng)),
            6..=7 => format!("{} sub {}", concept(rng), CONCEPTS.choose(rng).unwrap()),
            8..=10 => format!("{} rsub {}", ROLES.choose(rng).unwrap(), role(rng)),
            _ => format!("{} disj {}", CONCEPTS.choose(rng).unwrap(), concept(rng)),
        };
        text.push_str(&line);
        text.push('\n');
    }
    text
}

/// A normalized TBox of depth at most `max_depth`, or of any depth when
/// `max_depth` is `None`; with `omega`, one of depth ω.
pub fn random_tbox(rng: &mut ChaCha8Rng, max_depth: Option<usize>, omega: bool) -> TBox {
    loop {
        let mut text = random_tbox_text(rng);
        if omega {
            text.push_str("A sub ex P\nex P- sub A\n");
        }
        let t = parse_tbox(&text).unwrap().normalize().unwrap();
        match (t.depth(), max_depth) {
            (Depth::Omega, _) if omega => return t,
            (_, None) if !omega => return t,
            (Depth::Finite(d), Some(m)) if d <= m => return t,
            _ => {}
        }
    }
}

fn role_atom(rng: &mut ChaCha8Rng, u: &str, v: &str) -> String {
    let r = ROLES.choose(rng).unwrap();
    if rng.gen_bool(0.5) {
        format!("{r}({u},{v})")
    } else {
        format!("{r}({v},{u})")
    }
}

fn finish_query(rng: &mut ChaCha8Rng, vars: usize, mut atoms: Vec<String>, max_atoms: usize) -> Cq {
    while atoms.len() < max_atoms && rng.gen_bool(0.25) {
        let v = format!("y{}", rng.gen_range(0..vars));
        if rng.gen_bool(0.85) {
            atoms.push(format!("{}({v})", CONCEPTS.choose(rng).unwrap()));
        } else {
            atoms.push(format!("{}({v},{v})", ROLES.choose(rng).unwrap()));
        }
    }
    let mut answers: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let v = format!("y{}", rng.gen_range(0..vars));
        if !answers.contains(&v) {
            answers.push(v);
        }
    }
    let text = format!("q({}) :- {}", answers.join(","), atoms.join(", "));
    parse_cq(&text).unwrap()
}

/// A tree-shaped query with at most three leaves and at most `max_atoms` atoms.
pub fn random_spider(rng: &mut ChaCha8Rng, max_atoms: usize) -> Cq {
    let edges = rng.gen_range(0..max_atoms);
    let legs = rng.gen_range(1..=3).min(edges.max(1));
    let mut atoms = Vec::new();
    let mut next = 1;
    let mut ends = vec![0usize; legs];
    for e in 0..edges {
        let leg = e % legs;
        atoms.push(role_atom(rng, &format!("y{}", ends[leg]), &format!("y{next}")));
        ends[leg] = next;
        next += 1;
    }
    if atoms.is_empty() {
        atoms.push(format!("{}(y0)", CONCEPTS.choose(rng).unwrap()));
    }
    finish_query(rng, next, atoms, max_atoms)
}

/// A connected query of treewidth at most 2: a random tree, sometimes with
/// one extra edge closing a cycle.
pub fn random_tw2(rng: &mut ChaCha8Rng, max_atoms: usize) -> Cq {
    let vars = rng.gen_range(1..=max_atoms.min(6));
    let mut atoms = Vec::new();
    for v in 1..vars {
        let p = rng.gen_range(0..v);
        atoms.push(role_atom(rng, &format!("y{p}"), &format!("y{v}")));
    }
    if vars >= 3 && atoms.len() < max_atoms && rng.gen_bool(0.5) {
        let u = rng.gen_range(0..vars);
        let v = (u + rng.gen_range(1..vars)) % vars;
        atoms.push(role_atom(rng, &format!("y{u}"), &format!("y{v}")));
    }
    if atoms.is_empty() {
        atoms.push(format!("{}(y0)", CONCEPTS.choose(rng).unwrap()));
    }
    finish_query(rng, vars, atoms, max_atoms)
}

pub fn random_abox(rng: &mut ChaCha8Rng, max_individuals: usize) -> ABox {
    let n = rng.gen_range(1..=max_individuals);
    let mut text = String::new();
    for _ in 0..rng.gen_range(1..=12) {
        let a = rng.gen_range(0..n);
        if rng.gen_bool(0.5) {
            text.push_str(&format!("{}(i{a})\n", CONCEPTS.choose(rng).unwrap()));
        } else {
            let b = rng.gen_range(0..n);
            text.push_str(&format!("{}(i{a},i{b})\n", ROLES.choose(rng).unwrap()));
        }
    }
    parse_abox(&text).unwrap()
}

/// Whether the certain answers differ from plain evaluation over the
/// H-completion, i.e. some match uses anonymous elements.
pub fn needs_anonymous(inst: &Instance) -> bool {
    let complete = h_complete(&inst.tbox, &inst.abox);
    certain_answers(&TBox::default(), &inst.cq, &complete).unwrap()
        != certain_answers(&inst.tbox, &inst.cq, &inst.abox).unwrap()
}

/// `count` instances for `method`, biased towards ones that
/// [`needs_anonymous`]: depth ≤ 2 for slice and td, arbitrary
/// depth for tw with every third TBox of depth ω; consistent ABoxes over at
/// most six individuals; queries of at most eight atoms.
pub fn instances(method: Method, count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let tbox = match method {
            Method::Tw => random_tbox(&mut rng, None, out.len() % 3 == 0),
            _ => random_tbox(&mut rng, Some(2), false),
        };
        let cq = match method {
            Method::Td => random_tw2(&mut rng, 8),
            _ => random_spider(&mut rng, 8),
        };
        let abox = random_abox(&mut rng, 6);
        if !is_consistent(&tbox, &abox).unwrap() {
            continue;
        }
        let inst = Instance { tbox, cq, abox };
        if needs_anonymous(&inst) || rng.gen_bool(0.2) {
            out.push(inst);
        }
    }
    out
}

pub fn lifted(method: Method, program: &Program, tbox: &TBox) -> Program {
    match method {
        Method::Slice => lift_linear(program, tbox).unwrap(),
        _ => lift_to_arbitrary(program, tbox).unwrap(),
    }
}

/// Rewrite, lift, evaluate over the raw ABox and compare with the chase.
pub fn check_oracle(method: Method, inst: &Instance) -> Result<(), String> {
    let program = method.rewrite(&inst.tbox, &inst.cq).map_err(|e| e.to_string())?;
    let lifted = lifted(method, &program, &inst.tbox);
    let got: BTreeSet<Vec<String>> = eval_seminaive(&lifted, &inst.abox)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect();
    let expected = certain_answers(&inst.tbox, &inst.cq, &inst.abox).map_err(|e| e.to_string())?;
    if got == expected {
        Ok(())
    } else {
        Err(format!(
            "{method}: {}\nTBox:\n{:?}\nABox:\n{}\ngot {got:?}\nexpected {expected:?}",
            inst.cq,
            inst.tbox.axioms(),
            inst.abox
        ))
    }
}

/// The structural bound for the rewriting of `inst` with `method`.
pub fn check_bounds(method: Method, inst: &Instance) -> Result<(), String> {
    let program = method.rewrite(&inst.tbox, &inst.cq).map_err(|e| e.to_string())?;
    let depth = program.depth().map_err(|e| e.to_string())? as f64;
    let fail = |what: String| Err(format!("{method}: {} {what}", inst.cq));
    match method {
        Method::Slice => {
            let leaves = inst.cq.leaves().len().max(1);
            if !program.is_linear() || program.width() > 2 * leaves {
                return fail(format!("width {} with {leaves} leaves", program.width()));
            }
        }
        Method::Td => {
            let nodes = tree_decomposition(&inst.cq).map_err(|e| e.to_string())?.len() as f64;
            if depth > 2.0 * nodes.log2() + 2.0 {
                return fail(format!("depth {depth} over {nodes} nodes"));
            }
        }
        Method::Tw => {
            let size = inst.cq.atoms().len() as f64;
            if depth > size.log2() + 2.0 {
                return fail(format!("depth {depth} for {size} atoms"));
            }
            let reg = decompose_sq(&inst.tbox, &inst.cq).map_err(|e| e.to_string())?;
            if !omq::ndl::is_weight_function(&program, &reg.weights()) {
                return fail("weights are not a weight function".into());
            }
        }
    }
    Ok(())
}

/// Every tuple of arity `k` over `individuals`.
pub fn tuples(individuals: &[String], k: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                individuals.iter().map(move |a| {
                    let mut t = t.clone();
                    t.push(a.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Linear (slice) or circuit (skinny td / tw) decisions equal membership in
/// the semi-naive answers, for every candidate tuple.
pub fn check_engines(method: Method, inst: &Instance) -> Result<(), String> {
    let program = method.rewrite(&inst.tbox, &inst.cq).map_err(|e| e.to_string())?;
    let program = lifted(method, &program, &inst.tbox);
    let program = match method {
        Method::Slice => program,
        _ => to_skinny(&program).map_err(|e| e.to_string())?,
    };
    let answers: BTreeSet<Vec<String>> = eval_seminaive(&program, &inst.abox)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect();
    let individuals: Vec<String> = inst.abox.individuals().into_iter().collect();
    for t in tuples(&individuals, program.goal_arity) {
        let (ok, _) = match method {
            Method::Slice => eval_linear(&program, &inst.abox, &t),
            _ => eval_circuit(&program, &inst.abox, &t),
        }
        .map_err(|e| e.to_string())?;
        if ok != answers.contains(&t) {
            return Err(format!("{method}: {} on {t:?}: engine says {ok}", inst.cq));
        }
    }
    Ok(())
}

/// A random nonrecursive program over `A`, `B`, `P`, `R`: IDB predicates
/// `I0 … I4` in layers below the goal `G`, bodies of one to five atoms.
pub fn random_program(rng: &mut ChaCha8Rng) -> Program {
    let vars = ["x", "y", "z", "w"];
    let mut preds: Vec<(String, usize)> = vec![
        ("A".into(), 1),
        ("B".into(), 1),
        ("P".into(), 2),
        ("R".into(), 2),
    ];
    let mut text = String::new();
    let mut idb: Vec<(String, usize)> = Vec::new();
    for i in 0..5 {
        idb.push((format!("I{i}"), rng.gen_range(0..=2)));
    }
    idb.push(("G".to_string(), rng.gen_range(0..=2)));
    for (name, arity) in &idb {
        for _ in 0..rng.gen_range(1..=3) {
            let mut body = Vec::new();
            let mut bound: Vec<&str> = Vec::new();
            for _ in 0..rng.gen_range(1..=5) {
                let (p, k) = preds.choose(rng).unwrap();
                let args: Vec<&str> = (0..*k).map(|_| *vars.choose(rng).unwrap()).collect();
                bound.extend(&args);
                body.push(format!("{p}({})", args.join(",")));
            }
            if bound.is_empty() {
                body.push("A(x)".into());
                bound.push("x");
            }
            let head: Vec<&str> = (0..*arity).map(|_| *bound.choose(rng).unwrap()).collect();
            text.push_str(&format!("{name}({}) :- {}.\n", head.join(","), body.join(", ")));
        }
        preds.push((name.clone(), *arity));
    }
    let goal_arity = idb.last().unwrap().1;
    omq::ndl::parse_program(&format!("% goal: G/{goal_arity}\n{text}")).unwrap()
}
