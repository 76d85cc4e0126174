//! Benchmark inputs: the running-example ontology, the three linear query
//! sequences and Erdős–Rényi ABoxes, plus clause-count tables.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dl::{parse_tbox, ABox, Cq, CqAtom, TBox};
use crate::ndl::Program;
use crate::rewrite::{rewrite_slice, rewrite_td, rewrite_tw};
use crate::{Error, Result};

/// Identifier of the generator behind [`gen_er_abox`].
pub const RNG_ID: &str = "ChaCha8Rng (rand_chacha 0.3)";

/// The letter sequences of the three linear query families.
pub const SEQUENCES: [&str; 3] = ["RRSRSRSRRSRRSSR", "SRRRRRSRSRRRRRR", "SRRSSRSRSRRSRRSS"];

const EXAMPLE: &str = "\
A sub ex P
ex P sub A
P rsub S
P rsub R-
B sub ex Q
ex Q sub B
Q rsub R
Q rsub S-
";

/// `A ≡ ∃P`, `P ⊑ S`, `P ⊑ R⁻`, `B ≡ ∃Q`, `Q ⊑ R`, `Q ⊑ S⁻`, normalized.
pub fn example_ontology() -> TBox {
    parse_tbox(EXAMPLE)
        .and_then(|t| t.normalize())
        .expect("the example ontology is well formed")
}

/// `q(x0, xn)` with atoms `L_i(x_{i-1}, x_i)` for the first `n` letters of
/// sequence `sequence` (1, 2 or 3).
pub fn linear_query(sequence: usize, n: usize) -> Result<Cq> {
    let letters = sequence
        .checked_sub(1)
        .and_then(|i| SEQUENCES.get(i))
        .ok_or_else(|| Error::OutOfRange(format!("sequence {sequence} is not one of 1, 2, 3")))?;
    if n == 0 || n > letters.len() {
        return Err(Error::OutOfRange(format!(
            "n = {n} is outside 1..={} for sequence {sequence}",
            letters.len()
        )));
    }
    let atoms = letters
        .chars()
        .take(n)
        .enumerate()
        .map(|(i, c)| CqAtom::role(c.to_string(), format!("x{i}"), format!("x{}", i + 1)))
        .collect();
    Ok(Cq::new(vec!["x0".into(), format!("x{n}")], atoms))
}

/// Directed Erdős–Rényi graph over `v0 … v{V-1}`: every ordered pair of
/// distinct vertices gets an `R` edge with probability `p`, and every vertex
/// gets `A` and `B` independently with probability `q`.
pub fn gen_er_abox(vertices: usize, p: f64, q: f64, seed: u64) -> Result<ABox> {
    for (name, x) in [("p", p), ("q", q)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange(format!("{name} = {x} is not a probability")));
        }
    }
    if vertices == 0 {
        return Err(Error::OutOfRange("V must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..vertices).map(|i| format!("v{i}")).collect();
    let mut abox = ABox::new();
    for u in &names {
        for v in &names {
            if u != v && rng.gen_bool(p) {
                abox.add_role("R", u.clone(), v.clone());
            }
        }
    }
    for u in &names {
        if rng.gen_bool(q) {
            abox.add_concept("A", u.clone());
        }
        if rng.gen_bool(q) {
            abox.add_concept("B", u.clone());
        }
    }
    Ok(abox)
}

/// The three rewritings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Slice,
    Td,
    Tw,
}

impl Method {
    pub fn rewrite(self, tbox: &TBox, cq: &Cq) -> Result<Program> {
        match self {
            Method::Slice => rewrite_slice(tbox, cq, None),
            Method::Td => rewrite_td(tbox, cq, None),
            Method::Tw => rewrite_tw(tbox, cq),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Slice => "slice",
            Method::Td => "td",
            Method::Tw => "tw",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slice" => Ok(Method::Slice),
            "td" => Ok(Method::Td),
            "tw" => Ok(Method::Tw),
            _ => Err(Error::OutOfRange(format!("unknown method `{s}`"))),
        }
    }
}

/// CSV of clause counts over the example ontology: header `n,<method>...`,
/// then one row per `n` in `1..=n_max`.
pub fn stats_table(methods: &[Method], sequence: usize, n_max: usize) -> Result<String> {
    let tbox = example_ontology();
    let mut out = String::from("n");
    for m in methods {
        out.push(',');
        out.push_str(&m.to_string());
    }
    out.push('\n');
    for n in 1..=n_max {
        let cq = linear_query(sequence, n)?;
        out.push_str(&n.to_string());
        for m in methods {
            out.push_str(&format!(",{}", m.rewrite(&tbox, &cq)?.clauses.len()));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::{BasicConcept, Depth, Role};

    #[test]
    fn ontology() {
        let t = example_ontology();
        assert_eq!(t.depth(), Depth::Finite(1));
        assert!(t.subsumes_role(&Role::new("P"), &Role::new("S")));
        assert!(t.subsumes_concept(&BasicConcept::Exists(Role::new("Q")), &BasicConcept::Atomic("B".into())));
    }

    #[test]
    fn queries() {
        assert_eq!(
            linear_query(1, 7).unwrap().to_string(),
            "q(x0,x7) :- R(x0,x1), R(x1,x2), S(x2,x3), R(x3,x4), S(x4,x5), R(x5,x6), S(x6,x7)"
        );
        assert_eq!(linear_query(1, 1).unwrap().to_string(), "q(x0,x1) :- R(x0,x1)");
        assert_eq!(linear_query(2, 3).unwrap().to_string(), "q(x0,x3) :- S(x0,x1), R(x1,x2), R(x2,x3)");
        assert!(matches!(linear_query(1, 16), Err(Error::OutOfRange(_))));
        assert!(matches!(linear_query(4, 1), Err(Error::OutOfRange(_))));
        assert!(linear_query(3, 16).is_ok());
    }

    #[test]
    fn generator() {
        assert!(gen_er_abox(50, 0.0, 0.0, 1).unwrap().is_empty());
        assert_eq!(gen_er_abox(30, 0.2, 0.3, 9).unwrap(), gen_er_abox(30, 0.2, 0.3, 9).unwrap());
        assert_ne!(gen_er_abox(30, 0.2, 0.3, 9).unwrap(), gen_er_abox(30, 0.2, 0.3, 10).unwrap());
        let full = gen_er_abox(5, 1.0, 1.0, 0).unwrap();
        assert_eq!(full.role_facts().len(), 20);
        assert_eq!(full.concept_facts().len(), 10);
        assert!(gen_er_abox(5, 1.5, 0.0, 0).is_err());
    }

    #[test]
    fn tables() {
        assert_eq!(stats_table(&[Method::Slice], 1, 0).unwrap(), "n,slice\n");
        let t = stats_table(&[Method::Slice, Method::Td], 1, 2).unwrap();
        assert_eq!(t, "n,slice,td\n1,2,1\n2,5,2\n");
    }
}
