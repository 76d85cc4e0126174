use std::collections::BTreeMap;

use super::program::{Atom, Clause, Program, Term, EQ};
use crate::{Error, Result};

/// How equality atoms are written out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EqMode {
    /// Unify variables at emission time.
    #[default]
    Inline,
    /// Emit `X = Y` atoms verbatim.
    Explicit,
}

/// Renders a program with its `% goal` and `% params` headers.
pub fn emit_program(program: &Program, mode: EqMode) -> String {
    let program = match mode {
        EqMode::Inline => program.inline_equalities(),
        EqMode::Explicit => program.clone(),
    };
    let mut out = format!("% goal: {}/{}\n", program.goal, program.goal_arity);
    for (p, vs) in &program.params {
        if vs.is_empty() {
            out.push_str(&format!("% params: {p}\n"));
        } else {
            out.push_str(&format!("% params: {p} {}\n", vs.join(" ")));
        }
    }
    out.push_str(&program.to_string());
    out
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '@' | '*' | '\'' | '#' | '-' | '+' | '~' | '.' | '^')
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::parse(self.line, self.pos + 1, message))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        let want: Vec<char> = s.chars().collect();
        if self.chars[self.pos..].starts_with(&want) {
            self.pos += want.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    /// A name; a trailing `.` is left for the clause terminator.
    fn name(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && is_name_char(self.chars[self.pos]) {
            self.pos += 1;
        }
        while self.pos > start && self.chars[self.pos - 1] == '.' {
            self.pos -= 1;
        }
        if self.pos == start {
            return self.error("expected a name");
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn term(&mut self) -> Result<Term> {
        if self.peek() == Some('"') {
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos] != '"' {
                self.pos += 1;
            }
            if self.pos == self.chars.len() {
                return self.error("unterminated constant");
            }
            let c: String = self.chars[start..self.pos].iter().collect();
            self.pos += 1;
            return Ok(Term::Const(c));
        }
        Ok(Term::Var(self.name()?))
    }

    fn atom(&mut self) -> Result<Atom> {
        let save = self.pos;
        let first = self.term()?;
        if self.eat("=") {
            let second = self.term()?;
            return Ok(Atom::new(EQ, vec![first, second]));
        }
        let Term::Var(predicate) = first else {
            self.pos = save;
            return self.error("expected a predicate");
        };
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                args.push(self.term()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        Ok(Atom::new(predicate, args))
    }
}

/// Parses the text format. Without a `% goal` header the head of the first
/// clause is the goal.
pub fn parse_program(src: &str) -> Result<Program> {
    let mut clauses = Vec::new();
    let mut goal: Option<(String, usize)> = None;
    let mut params = BTreeMap::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('%') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("goal:") {
                let rest = rest.trim();
                let Some((name, arity)) = rest.rsplit_once('/') else {
                    return Err(Error::parse(line, 1, "goal header must be `% goal: NAME/ARITY`"));
                };
                let arity = arity
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line, 1, format!("bad goal arity `{arity}`")))?;
                goal = Some((name.trim().to_string(), arity));
            } else if let Some(rest) = comment.strip_prefix("params:") {
                let mut words = rest.split_whitespace();
                let Some(pred) = words.next() else {
                    return Err(Error::parse(line, 1, "params header needs a predicate"));
                };
                params.insert(pred.to_string(), words.map(|w| w.to_string()).collect());
            }
            continue;
        }
        let mut cur = Cursor::new(text, line);
        let head = cur.atom()?;
        let mut body = Vec::new();
        if cur.eat(":-") {
            if cur.peek() != Some('.') {
                loop {
                    body.push(cur.atom()?);
                    if !cur.eat(",") {
                        break;
                    }
                }
            }
        }
        cur.expect(".")?;
        if cur.peek().is_some() {
            return cur.error("unexpected text after clause");
        }
        clauses.push(Clause::new(head, body));
    }
    let (goal, goal_arity) = match goal {
        Some(g) => g,
        None => match clauses.first() {
            Some(c) => (c.head.predicate.clone(), c.head.arity()),
            None => return Err(Error::parse(1, 1, "empty program without a goal header")),
        },
    };
    Ok(Program {
        clauses,
        goal,
        goal_arity,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let src = "% goal: G/1\n% params: G x\n% params: P x\nG(x) :- P(y,x), R(y,\"c\").\nP(y,x) :- S(y,x), y = x.\nH() :- E(z).\nF().\n";
        let p = parse_program(src).unwrap();
        assert_eq!(p.clauses.len(), 4);
        assert_eq!(p.params["P"], vec!["x".to_string()]);
        assert!(p.clauses[1].body[1].is_equality());
        assert_eq!(p.clauses[0].body[1].args[1], Term::Const("c".into()));
        assert_eq!(emit_program(&p, EqMode::Explicit), src);
        assert_eq!(parse_program(&emit_program(&p, EqMode::Explicit)).unwrap(), p);
    }

    #[test]
    fn inline_mode_unifies() {
        let p = parse_program("% goal: G/1\n% params: G x\nG(x) :- R(x,y), y = z, S(z).\n").unwrap();
        let out = emit_program(&p, EqMode::Inline);
        assert!(out.ends_with("G(x) :- R(x,y), S(y).\n"), "{out}");
    }

    #[test]
    fn errors_have_positions() {
        match parse_program("G(x) :- E(x)\n") {
            Err(Error::Parse { line: 1, column, .. }) => assert_eq!(column, 13),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_program("G(x :- E(x)."), Err(Error::Parse { .. })));
        assert!(matches!(parse_program("% goal: G\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn starred_and_reserved_names() {
        let p = parse_program("G*(x) :- @ex_P*(x), @h0_1(x).\n").unwrap();
        assert_eq!(p.goal, "G*");
        assert_eq!(p.clauses[0].body[0].predicate, "@ex_P*");
    }
}
