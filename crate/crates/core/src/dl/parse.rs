//! Text formats for TBoxes, ABoxes and conjunctive queries.

use super::abox::ABox;
use super::cq::{Cq, CqAtom};
use super::syntax::{BasicConcept, Role};
use super::tbox::{Axiom, TBox};
use crate::error::{Error, Result};

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_individual_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

/// Whitespace-separated tokens of a line with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(s, t)| (line[..s].chars().count() + 1, t))
        .collect()
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_name(text: &str, line: usize, column: usize, what: &str) -> Result<String> {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if is_name_start(c) && chars.all(is_name_char) => Ok(text.to_string()),
        _ => Err(Error::parse(line, column, format!("expected {what}, found `{text}`"))),
    }
}

fn parse_role_token(text: &str, line: usize, column: usize) -> Result<Role> {
    match text.strip_suffix('-') {
        Some(name) => Ok(Role::inv(parse_name(name, line, column, "a role name")?)),
        None => Ok(Role::new(parse_name(text, line, column, "a role name")?)),
    }
}

/// Reads a concept from `toks[pos..]`, returning it and the number of tokens used.
fn parse_concept(toks: &[(usize, &str)], pos: usize, line: usize) -> Result<(BasicConcept, usize)> {
    let end_col = toks.last().map(|(c, t)| c + t.len()).unwrap_or(1);
    let Some(&(col, tok)) = toks.get(pos) else {
        return Err(Error::parse(line, end_col, "expected a concept"));
    };
    if tok == "ex" {
        let Some(&(rcol, rtok)) = toks.get(pos + 1) else {
            return Err(Error::parse(line, end_col, "expected a role after `ex`"));
        };
        Ok((BasicConcept::Exists(parse_role_token(rtok, line, rcol)?), 2))
    } else {
        Ok((BasicConcept::Atomic(parse_name(tok, line, col, "a concept name")?), 1))
    }
}

/// Parses one axiom per line; `#` starts a comment. The result is not normalized.
pub fn parse_tbox(text: &str) -> Result<TBox> {
    let mut axioms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(strip_comment(raw));
        if toks.is_empty() {
            continue;
        }
        let keyword_at = toks
            .iter()
            .position(|(_, t)| matches!(*t, "sub" | "rsub" | "disj" | "rdisj"))
            .ok_or_else(|| {
                Error::parse(line, toks[0].0, "expected one of `sub`, `rsub`, `disj`, `rdisj`")
            })?;
        let (kcol, keyword) = toks[keyword_at];
        let lhs = &toks[..keyword_at];
        let rhs = &toks[keyword_at + 1..];
        let axiom = match keyword {
            "sub" | "disj" => {
                let (b1, used1) = parse_concept(lhs, 0, line)?;
                if used1 != lhs.len() {
                    return Err(Error::parse(line, lhs[used1].0, "unexpected token"));
                }
                let (b2, used2) = parse_concept(rhs, 0, line).map_err(|e| match e {
                    Error::Parse { message, .. } if rhs.is_empty() => Error::parse(line, kcol + keyword.len(), message),
                    other => other,
                })?;
                if used2 != rhs.len() {
                    return Err(Error::parse(line, rhs[used2].0, "unexpected token"));
                }
                if keyword == "sub" {
                    Axiom::ConceptInclusion(b1, b2)
                } else {
                    Axiom::ConceptDisjoint(b1, b2)
                }
            }
            _ => {
                if lhs.len() != 1 {
                    let col = lhs.get(1).map(|t| t.0).unwrap_or(kcol);
                    return Err(Error::parse(line, col, "expected a single role before the keyword"));
                }
                if rhs.len() != 1 {
                    let col = rhs.get(1).map(|t| t.0).unwrap_or(kcol + keyword.len());
                    return Err(Error::parse(line, col, "expected a single role after the keyword"));
                }
                let r1 = parse_role_token(lhs[0].1, line, lhs[0].0)?;
                let r2 = parse_role_token(rhs[0].1, line, rhs[0].0)?;
                if keyword == "rsub" {
                    Axiom::RoleInclusion(r1, r2)
                } else {
                    Axiom::RoleDisjoint(r1, r2)
                }
            }
        };
        axioms.push(axiom);
    }
    Ok(TBox::from_axioms(axioms))
}

/// A predicate applied to comma-separated arguments, e.g. `P(a,b)`.
struct Application<'a> {
    name: &'a str,
    name_col: usize,
    args: Vec<(usize, &'a str)>,
}

/// Parses `name(arg, ..., arg)` starting at byte `offset` of `line_text`.
fn parse_application<'a>(text: &'a str, col0: usize, line: usize) -> Result<Application<'a>> {
    let trimmed_start = text.len() - text.trim_start().len();
    let text_t = text.trim();
    let col = col0 + text[..trimmed_start].chars().count();
    let open = text_t
        .find('(')
        .ok_or_else(|| Error::parse(line, col, format!("expected `(` in `{text_t}`")))?;
    if !text_t.ends_with(')') {
        return Err(Error::parse(
            line,
            col + text_t.chars().count().saturating_sub(1),
            "expected `)`",
        ));
    }
    let name = text_t[..open].trim_end();
    let inner = &text_t[open + 1..text_t.len() - 1];
    let mut args = Vec::new();
    if !inner.trim().is_empty() {
        let mut offset = open + 1;
        for part in inner.split(',') {
            let lead = part.len() - part.trim_start().len();
            args.push((col + text_t[..offset + lead].chars().count(), part.trim()));
            offset += part.len() + 1;
        }
    }
    Ok(Application {
        name,
        name_col: col,
        args,
    })
}

fn check_individual(text: &str, line: usize, col: usize) -> Result<()> {
    if text.is_empty() || !text.chars().all(is_individual_char) {
        return Err(Error::parse(line, col, format!("invalid individual `{text}`")));
    }
    Ok(())
}

/// Parses one fact per line, `A(a)` or `P(a,b)`; `#` starts a comment.
pub fn parse_abox(text: &str) -> Result<ABox> {
    let mut abox = ABox::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        let app = parse_application(body, 1, line)?;
        let bare = app.name.strip_prefix('@').unwrap_or(app.name);
        parse_name(bare, line, app.name_col, "a predicate name")?;
        for (col, arg) in &app.args {
            check_individual(arg, line, *col)?;
        }
        match app.args.as_slice() {
            [(_, a)] => {
                abox.add_concept(app.name, *a);
            }
            [(_, a), (_, b)] => {
                abox.add_role(app.name, *a, *b);
            }
            _ => {
                return Err(Error::parse(line, app.name_col, "facts take one or two arguments"));
            }
        }
    }
    Ok(abox)
}

/// Splits at commas that are not inside parentheses, keeping byte offsets.
fn split_top_level(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push((start, &text[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &text[start..]));
    out
}

/// Parses `q(x1,...,xk) :- atom, ..., atom` (a single line, `#` comments allowed).
pub fn parse_cq(text: &str) -> Result<Cq> {
    let mut found: Option<(usize, &str)> = None;
    for (i, raw) in text.lines().enumerate() {
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        if found.is_some() {
            return Err(Error::parse(i + 1, 1, "a query occupies a single line"));
        }
        found = Some((i + 1, body));
    }
    let (line, body) = found.ok_or_else(|| Error::parse(1, 1, "empty query"))?;
    let sep = body
        .find(":-")
        .ok_or_else(|| Error::parse(line, 1, "expected `:-`"))?;
    let head = parse_application(&body[..sep], 1, line)?;
    parse_name(head.name, line, head.name_col, "a query name")?;
    let mut answers = Vec::new();
    for (col, v) in &head.args {
        answers.push(parse_name(v, line, *col, "a variable")?);
    }
    let rest = &body[sep + 2..];
    let rest_col = body[..sep + 2].chars().count() + 1;
    let mut atoms = Vec::new();
    if !rest.trim().is_empty() {
        for (offset, part) in split_top_level(rest) {
            let col = rest_col + rest[..offset].chars().count();
            if part.trim().is_empty() {
                return Err(Error::parse(line, col, "empty atom"));
            }
            let app = parse_application(part, col, line)?;
            parse_name(app.name, line, app.name_col, "a predicate name")?;
            let mut vars = Vec::new();
            for (c, v) in &app.args {
                vars.push(parse_name(v, line, *c, "a variable")?);
            }
            match vars.len() {
                1 => atoms.push(CqAtom::Concept(app.name.to_string(), vars.remove(0))),
                2 => {
                    let v = vars.pop().unwrap();
                    let u = vars.pop().unwrap();
                    atoms.push(CqAtom::Role(app.name.to_string(), u, v));
                }
                _ => return Err(Error::parse(line, app.name_col, "atoms take one or two arguments")),
            }
        }
    }
    let q = Cq::new(answers, atoms);
    for (col, v) in &head.args {
        if !q.atoms().iter().any(|a| a.mentions(v)) {
            return Err(Error::parse(line, *col, format!("answer variable `{v}` does not occur in the body")));
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_axiom() {
        let t = parse_tbox("A sub ex P\n").unwrap();
        assert_eq!(
            t.concept_inclusions().iter().next().unwrap(),
            &(BasicConcept::atomic("A"), BasicConcept::Exists(Role::new("P")))
        );
    }

    #[test]
    fn example_two() {
        let text = "A sub ex P\nex P sub A\nP rsub S\nP rsub R-\nB sub ex Q\nex Q sub B\nQ rsub R\nQ rsub S-\n";
        let t = parse_tbox(text).unwrap();
        assert_eq!(t.concept_inclusions().len(), 4);
        assert_eq!(t.role_inclusions().len(), 8);
    }

    #[test]
    fn tbox_errors_have_positions() {
        match parse_tbox("A sub ex P\nA sob B\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 1)),
            other => panic!("{other:?}"),
        }
        match parse_tbox("A sub ex 9P") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 10)),
            other => panic!("{other:?}"),
        }
        assert!(parse_tbox("@ex_P sub A").is_err());
        assert!(parse_tbox("A sub").is_err());
    }

    #[test]
    fn abox_accepts_reserved_names() {
        let a = parse_abox("@ex_P(a)\nP(a,b)\n").unwrap();
        assert_eq!(parse_abox(&a.to_string()).unwrap(), a);
        assert!(parse_abox("@(a)").is_err());
    }

    #[test]
    fn comments_and_disjointness() {
        let t = parse_tbox("# header\nA disj B # trailing\nP rdisj S-\n").unwrap();
        assert_eq!(t.concept_disjointness().len(), 1);
        assert_eq!(t.role_disjointness().len(), 1);
    }

    #[test]
    fn abox_roundtrip() {
        let a = parse_abox("A(a)\nR(a, b.1)\n# c\n").unwrap();
        assert!(a.has_concept("A", "a"));
        assert!(a.has_role(&Role::new("R"), "a", "b.1"));
        assert_eq!(parse_abox(&a.to_string()).unwrap(), a);
        assert!(parse_abox("R(a,b,c)").is_err());
        assert!(parse_abox("R(a b)").is_err());
    }

    #[test]
    fn cq_parse() {
        let q = parse_cq("q(x,y) :- A(x), R(x,y)").unwrap();
        assert_eq!(q.answer_vars(), ["x".to_string(), "y".to_string()]);
        assert_eq!(q.atoms().len(), 2);
        let b = parse_cq("q() :- R(x,y)").unwrap();
        assert!(b.is_boolean());
        assert!(parse_cq("q(z) :- R(x,y)").is_err());
        assert!(parse_cq("q(x) R(x,y)").is_err());
        assert_eq!(parse_cq(&q.to_string()).unwrap(), q);
    }
}
