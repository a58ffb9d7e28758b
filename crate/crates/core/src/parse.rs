//! Readers for rewrite systems, terms and Minsky machines.
//!
//! A system file has sections introduced by `sig:`, `vars:`, `rules:` and
//! optionally `precedence:` (greatest symbol first). `#` starts a comment.
//!
//! ```text
//! sig: f/2 i/1 g/1 b/0 c/0
//! vars: x
//! rules:
//!   f(x,i(x)) -> g(x)
//!   [gb] g(b) -> c
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::minsky::{Action, Machine, Transition};
use crate::rewrite::{Rule, Trs};
use crate::term::{Name, Signature, Term};

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c == '\''
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn at(line: usize, column: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } | Error::At { .. } => e,
        e => Error::At {
            line,
            column,
            source: Box::new(e),
        },
    }
}

/// How identifiers that are not variables are checked.
enum Symbols<'a> {
    Declared(&'a Signature),
    /// Arities are inferred and must be used consistently.
    Inferred(&'a mut BTreeMap<Name, usize>),
}

/// Cursor over one piece of text, tracking line and column of the origin.
struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
}

impl Lexer {
    fn new(src: &str, line: usize, col0: usize) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line,
            col0,
        }
    }

    fn column(&self) -> usize {
        self.col0 + self.pos
    }

    fn err(&self, message: impl Into<String>) -> Error {
        parse_err(self.line, self.column(), message)
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

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of input".to_string(), |c| format!("'{c}'"));
            Err(self.err(format!("expected '{s}', found {found}")))
        }
    }

    fn ident(&mut self) -> Result<(Name, usize)> {
        self.skip_ws();
        let start = self.pos;
        if !self.chars.get(self.pos).is_some_and(|&c| is_ident_start(c)) {
            let found = self
                .chars
                .get(self.pos)
                .map_or("end of input".to_string(), |c| format!("'{c}'"));
            return Err(self.err(format!("expected identifier, found {found}")));
        }
        while self.chars.get(self.pos).is_some_and(|&c| is_ident_char(c)) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok((s.into(), self.col0 + start))
    }

    fn term(&mut self, vars: &BTreeSet<Name>, syms: &mut Symbols<'_>) -> Result<Term> {
        let (name, col) = self.ident()?;
        let applied = self.peek() == Some('(');
        if vars.contains(&name) {
            if applied {
                return Err(parse_err(
                    self.line,
                    col,
                    format!("variable {name} applied to arguments"),
                ));
            }
            return Ok(Term::Var(name));
        }
        let mut args = Vec::new();
        if applied {
            self.expect("(")?;
            if !(matches!(syms, Symbols::Inferred(_)) && self.eat(")")) {
                loop {
                    args.push(self.term(vars, syms)?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
        }
        let expected = match syms {
            Symbols::Declared(sig) => sig
                .arity(&name)
                .ok_or_else(|| at(self.line, col, Error::UndeclaredSymbol(name.to_string())))?,
            Symbols::Inferred(map) => *map.entry(name.clone()).or_insert(args.len()),
        };
        if expected != args.len() {
            let e = Error::ArityMismatch {
                symbol: name.to_string(),
                expected,
                found: args.len(),
            };
            return Err(at(self.line, col, e));
        }
        Ok(Term::App(name, args))
    }
}

/// Parses a single term over `trs`'s signature and variables.
pub fn parse_term(text: &str, trs: &Trs) -> Result<Term> {
    parse_term_with(text, trs.signature(), trs.variables())
}

pub fn parse_term_with(text: &str, sig: &Signature, vars: &BTreeSet<Name>) -> Result<Term> {
    let mut lx = Lexer::new(text, 1, 1);
    let t = lx.term(vars, &mut Symbols::Declared(sig))?;
    if !lx.at_end() {
        return Err(lx.err("unexpected text after term"));
    }
    Ok(t)
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Sig,
    Vars,
    Rules,
    Precedence,
}

/// One whitespace- or comma-separated token with its line and column.
fn tokens(text: &str, line: usize, col0: usize) -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    for (i, c) in text.chars().enumerate() {
        if c.is_whitespace() || c == ',' {
            if !cur.is_empty() {
                out.push((std::mem::take(&mut cur), line, col0 + start));
            }
        } else {
            if cur.is_empty() {
                start = i;
            }
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push((cur, line, col0 + start));
    }
    out
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(is_ident_start) && cs.all(is_ident_char)
}

/// Parses a system file, or the parenthesised `(VAR …)(RULES …)` format
/// when the text starts with `(`.
pub fn parse_trs(text: &str) -> Result<Trs> {
    let first = text.lines().map(|l| strip_comment(l).trim()).find(|l| !l.is_empty());
    if first.is_some_and(|l| l.starts_with('(')) {
        return parse_legacy(text);
    }

    let mut section = Section::None;
    let mut sig_tokens = Vec::new();
    let mut var_tokens = Vec::new();
    let mut prec_tokens = Vec::new();
    let mut rule_lines: Vec<(usize, usize, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        let indent = body.len() - body.trim_start().len();
        let trimmed = body.trim_start();
        let mut rest = trimmed;
        let mut col = indent + 1;
        for (kw, sec) in [
            ("sig:", Section::Sig),
            ("vars:", Section::Vars),
            ("rules:", Section::Rules),
            ("precedence:", Section::Precedence),
        ] {
            if let Some(r) = trimmed.strip_prefix(kw) {
                section = sec;
                rest = r;
                col += kw.chars().count();
                break;
            }
        }
        if rest.trim().is_empty() {
            continue;
        }
        match section {
            Section::None => return Err(parse_err(line, col, "expected a section header (sig:, vars:, rules:)")),
            Section::Sig => sig_tokens.extend(tokens(rest, line, col)),
            Section::Vars => var_tokens.extend(tokens(rest, line, col)),
            Section::Precedence => prec_tokens.extend(tokens(rest, line, col).into_iter().filter(|(t, _, _)| t != ">")),
            Section::Rules => rule_lines.push((line, col, rest)),
        }
    }

    let mut sig = Signature::new();
    for (tok, line, col) in &sig_tokens {
        let Some((name, arity)) = tok.rsplit_once('/') else {
            return Err(parse_err(*line, *col, format!("expected symbol/arity, found '{tok}'")));
        };
        if !is_identifier(name) {
            return Err(parse_err(*line, *col, format!("invalid symbol name '{name}'")));
        }
        let arity: usize = arity
            .parse()
            .map_err(|_| parse_err(*line, *col, format!("invalid arity in '{tok}'")))?;
        sig.declare(name, arity).map_err(|e| at(*line, *col, e))?;
    }
    let mut vars = BTreeSet::new();
    for (tok, line, col) in &var_tokens {
        if !is_identifier(tok) {
            return Err(parse_err(*line, *col, format!("invalid variable name '{tok}'")));
        }
        if sig.contains(tok) {
            return Err(parse_err(
                *line,
                *col,
                format!("{tok} is declared both as a symbol and a variable"),
            ));
        }
        vars.insert(Name::from(tok.as_str()));
    }

    // auto labels avoid every explicit label in the file
    let explicit: BTreeSet<&str> = rule_lines
        .iter()
        .filter_map(|(_, _, t)| t.trim_start().strip_prefix('[')?.split_once(']'))
        .map(|(l, _)| l.trim())
        .collect();
    let mut rules = Vec::new();
    let mut labels = BTreeSet::new();
    let mut next_auto = 1;
    for (line, col, text) in rule_lines.iter().copied() {
        let mut lx = Lexer::new(text, line, col);
        let label = if lx.eat("[") {
            let (l, lcol) = lx.ident()?;
            lx.expect("]")?;
            if !labels.insert(l.to_string()) {
                return Err(at(line, lcol, Error::DuplicateLabel(l.to_string())));
            }
            l.to_string()
        } else {
            while explicit.contains(format!("r{next_auto}").as_str()) {
                next_auto += 1;
            }
            let l = format!("r{next_auto}");
            next_auto += 1;
            labels.insert(l.clone());
            l
        };
        lx.skip_ws();
        let lhs_col = lx.column();
        let lhs = lx.term(&vars, &mut Symbols::Declared(&sig))?;
        lx.expect("->")?;
        lx.skip_ws();
        let rhs_col = lx.column();
        let rhs = lx.term(&vars, &mut Symbols::Declared(&sig))?;
        if !lx.at_end() {
            return Err(lx.err("unexpected text after rule"));
        }
        if lhs.is_var() {
            let e = Error::VariableViolation {
                rule: label,
                message: "left-hand side is a variable".into(),
            };
            return Err(at(line, lhs_col, e));
        }
        let lv = lhs.var_set();
        if let Some(x) = rhs.vars().into_iter().find(|x| !lv.contains(x)) {
            let e = Error::VariableViolation {
                rule: label,
                message: format!("variable {x} of the right-hand side is unbound"),
            };
            return Err(at(line, rhs_col, e));
        }
        rules.push(Rule::new(label, lhs, rhs));
    }

    let mut trs = Trs::new(sig, vars, rules)?;
    if !prec_tokens.is_empty() {
        let mut order = Vec::new();
        for (tok, line, col) in prec_tokens {
            if !trs.signature().contains(&tok) {
                return Err(at(
                    line,
                    col,
                    Error::InvalidPrecedence(format!("{tok} is not a declared symbol")),
                ));
            }
            order.push(Name::from(tok.as_str()));
        }
        if let Err(e) = crate::lpo::Precedence::new(order.clone()) {
            return Err(at(1, 1, e));
        }
        trs.precedence = Some(order);
    }
    Ok(trs)
}

/// The parenthesised format: `(VAR x y)` declares variables and `(RULES …)`
/// lists `lhs -> rhs` pairs. Arities are inferred from use. Other
/// parenthesised sections are skipped.
pub fn parse_legacy(text: &str) -> Result<Trs> {
    let cleaned: Vec<String> = text.lines().map(|l| strip_comment(l).to_string()).collect();
    let mut vars = BTreeSet::new();
    let mut arities = BTreeMap::new();
    let mut rules = Vec::new();
    let mut lx = MultiLine::new(&cleaned);
    while lx.next_open()? {
        let (kw, _) = lx.word()?;
        match kw.as_str() {
            "VAR" => {
                while !lx.close()? {
                    let (v, vcol) = lx.word()?;
                    if !is_identifier(&v) {
                        return Err(parse_err(lx.line(), vcol, format!("invalid variable name '{v}'")));
                    }
                    vars.insert(Name::from(v.as_str()));
                }
            }
            "RULES" => {
                while !lx.close()? {
                    let (l, lcol) = lx.position();
                    let lhs = lx.with_lexer(|x| x.term(&vars, &mut Symbols::Inferred(&mut arities)))?;
                    lx.with_lexer(|x| x.expect("->"))?;
                    let rhs = lx.with_lexer(|x| x.term(&vars, &mut Symbols::Inferred(&mut arities)))?;
                    let label = format!("r{}", rules.len() + 1);
                    if lhs.is_var() || !rhs.var_set().is_subset(&lhs.var_set()) {
                        let e = Error::VariableViolation {
                            rule: label,
                            message: "variable lhs or unbound rhs variable".into(),
                        };
                        return Err(at(l, lcol, e));
                    }
                    rules.push(Rule::new(label, lhs, rhs));
                }
            }
            _ => lx.skip_group()?,
        }
    }
    let mut sig = Signature::new();
    for (f, n) in &arities {
        sig.declare(f, *n)?;
    }
    if let Some(x) = vars.iter().find(|x| sig.contains(x)) {
        return Err(Error::UndeclaredSymbol(format!(
            "{x} is used both as a variable and a symbol"
        )));
    }
    Trs::new(sig, vars, rules)
}

/// Cursor over several lines for the parenthesised format, whose terms
/// may not span lines.
struct MultiLine<'a> {
    lines: &'a [String],
    line: usize,
    col: usize,
}

impl<'a> MultiLine<'a> {
    fn new(lines: &'a [String]) -> Self {
        MultiLine { lines, line: 0, col: 0 }
    }

    fn line(&self) -> usize {
        self.line + 1
    }

    fn rest(&self) -> &str {
        let l = &self.lines[self.line];
        let byte = l.char_indices().nth(self.col).map_or(l.len(), |(b, _)| b);
        &l[byte..]
    }

    // Moves to the next non-whitespace character; false at end of input.
    fn skip_ws(&mut self) -> bool {
        while self.line < self.lines.len() {
            let r = self.rest();
            let n = r.chars().take_while(|c| c.is_whitespace()).count();
            if n < r.chars().count() {
                self.col += n;
                return true;
            }
            self.line += 1;
            self.col = 0;
        }
        false
    }

    fn position(&mut self) -> (usize, usize) {
        self.skip_ws();
        (self.line + 1, self.col + 1)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        parse_err(self.line + 1, self.col + 1, message)
    }

    fn next_open(&mut self) -> Result<bool> {
        if !self.skip_ws() {
            return Ok(false);
        }
        if !self.rest().starts_with('(') {
            return Err(self.err("expected '('"));
        }
        self.col += 1;
        Ok(true)
    }

    fn close(&mut self) -> Result<bool> {
        if !self.skip_ws() {
            return Err(self.err("unexpected end of input, expected ')'"));
        }
        if self.rest().starts_with(')') {
            self.col += 1;
            return Ok(true);
        }
        Ok(false)
    }

    fn word(&mut self) -> Result<(String, usize)> {
        if !self.skip_ws() {
            return Err(self.err("unexpected end of input"));
        }
        let w: String = self.rest().chars().take_while(|&c| is_ident_char(c)).collect();
        if w.is_empty() {
            return Err(self.err("expected identifier"));
        }
        let col = self.col + 1;
        self.col += w.chars().count();
        Ok((w, col))
    }

    fn with_lexer<T>(&mut self, f: impl FnOnce(&mut Lexer) -> Result<T>) -> Result<T> {
        if !self.skip_ws() {
            return Err(self.err("unexpected end of input"));
        }
        let line = self.line + 1;
        let rest = self.rest().to_string();
        let mut lx = Lexer::new(&rest, line, self.col + 1);
        let out = f(&mut lx)?;
        self.col += lx.pos;
        Ok(out)
    }

    fn skip_group(&mut self) -> Result<()> {
        let mut depth = 1;
        while depth > 0 {
            if !self.skip_ws() {
                return Err(self.err("unbalanced parentheses"));
            }
            let c = self.rest().chars().next().expect("non-empty");
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            self.col += 1;
        }
        Ok(())
    }
}

/// Parses a machine file: `states:`, `initial:` and `final:` lines, then
/// one transition `q0 1 + q1` per line.
pub fn parse_machine(text: &str) -> Result<Machine> {
    let mut states = None;
    let mut initial = None;
    let mut final_state = None;
    let mut transitions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        let indent = body.len() - body.trim_start().len();
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut header = None;
        for kw in ["states:", "initial:", "final:"] {
            if let Some(r) = trimmed.strip_prefix(kw) {
                header = Some((kw, tokens(r, line, indent + 1 + kw.len())));
            }
        }
        let single = |toks: Vec<(String, usize, usize)>, kw: &str| -> Result<Name> {
            match toks.as_slice() {
                [(t, _, _)] => Ok(Name::from(t.as_str())),
                _ => Err(parse_err(line, indent + 1, format!("{kw} takes exactly one state"))),
            }
        };
        match header {
            Some(("states:", toks)) => {
                for (t, l, c) in &toks {
                    if !is_identifier(t) {
                        return Err(parse_err(*l, *c, format!("invalid state name '{t}'")));
                    }
                }
                states = Some(
                    toks.into_iter()
                        .map(|(t, _, _)| Name::from(t.as_str()))
                        .collect::<Vec<_>>(),
                );
            }
            Some(("initial:", toks)) => initial = Some(single(toks, "initial:")?),
            Some((_, toks)) => final_state = Some(single(toks, "final:")?),
            None => {
                let toks = tokens(trimmed, line, indent + 1);
                let [(from, ..), (j, _, jc), (x, _, xc), (to, ..)] = toks.as_slice() else {
                    return Err(parse_err(
                        line,
                        indent + 1,
                        "expected a transition 'state counter action state'",
                    ));
                };
                let counter = match j.as_str() {
                    "1" => 1,
                    "2" => 2,
                    _ => return Err(parse_err(line, *jc, format!("counter must be 1 or 2, found '{j}'"))),
                };
                let action = Action::parse(x)
                    .ok_or_else(|| parse_err(line, *xc, format!("action must be one of Z P 0 + -, found '{x}'")))?;
                transitions.push((line, Transition::new(from, counter, action, to)));
            }
        }
    }
    let missing = |what: &str| parse_err(1, 1, format!("missing {what} line"));
    let states = states.ok_or_else(|| missing("states:"))?;
    let initial = initial.ok_or_else(|| missing("initial:"))?;
    let final_state = final_state.ok_or_else(|| missing("final:"))?;
    for (line, t) in &transitions {
        for q in [&t.from, &t.to] {
            if !states.contains(q) {
                return Err(parse_err(*line, 1, format!("undeclared state {q}")));
            }
        }
    }
    Machine::new(
        states,
        initial,
        final_state,
        transitions.into_iter().map(|(_, t)| t).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str =
        "sig: f/2 i/1 g/1 b/0 c/0\nvars: x\nrules:\n  f(x,i(x)) -> g(x)\n  g(b) -> c\n  f(b,i(b)) -> c\n";

    #[test]
    fn three_rule_file_gets_auto_labels() {
        let trs = parse_trs(THREE).unwrap();
        let labels: Vec<&str> = trs.rules().iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["r1", "r2", "r3"]);
        assert_eq!(trs.rules()[0].to_string(), "f(x,i(x)) -> g(x)");
    }

    #[test]
    fn unbound_rhs_variable_is_located() {
        let err = parse_trs("sig: f/1 g/2\nvars: x y\nrules:\n  f(x) -> g(x,y)\n").unwrap_err();
        match err {
            Error::At { line, column, source } => {
                assert_eq!((line, column), (4, 11));
                assert!(matches!(*source, Error::VariableViolation { .. }));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn arity_mismatch_is_located() {
        let err = parse_trs("sig: f/1\nvars: x y\nrules:\n  f(x,y) -> f(x)\n").unwrap_err();
        match err {
            Error::At { line, column, source } => {
                assert_eq!((line, column), (4, 3));
                assert!(matches!(
                    *source,
                    Error::ArityMismatch {
                        expected: 1,
                        found: 2,
                        ..
                    }
                ));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn undeclared_symbol_and_syntax_errors() {
        let err = parse_trs("sig: f/1\nvars: x\nrules:\n  f(x) -> h(x)\n").unwrap_err();
        assert!(matches!(err, Error::At { source, .. } if matches!(*source, Error::UndeclaredSymbol(_))));
        let err = parse_trs("sig: f/1\nvars: x\nrules:\n  f(x) => x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, column: 8, .. }), "{err}");
    }

    #[test]
    fn labels_comments_and_precedence() {
        let trs = parse_trs("# lemma\nsig: f/1 g/1 h/1\nvars: x\nprecedence: f > g > h\nrules:\n [lem] f(g(h(x))) -> g(x) # only rule\n").unwrap();
        assert_eq!(trs.rules()[0].label, "lem");
        assert_eq!(trs.precedence.as_ref().unwrap().len(), 3);
        let dup = parse_trs("sig: a/0 b/0\nrules:\n[r] a -> b\n[r] b -> a\n").unwrap_err();
        assert!(matches!(dup, Error::At { source, .. } if matches!(*source, Error::DuplicateLabel(_))));
    }

    #[test]
    fn legacy_format() {
        let trs = parse_legacy("(VAR x)\n(RULES\n  f(x,i(x)) -> g(x)\n  g(b) -> c\n)\n(COMMENT anything (nested))\n")
            .unwrap();
        assert_eq!(trs.len(), 2);
        assert_eq!(trs.signature().arity("f"), Some(2));
        assert_eq!(trs.signature().arity("b"), Some(0));
        assert!(parse_trs("(VAR x)(RULES f(x) -> f(x,x))").is_err());
    }

    #[test]
    fn terms_and_machines() {
        let trs = parse_trs(THREE).unwrap();
        assert_eq!(parse_term(" f( b , i(b) ) ", &trs).unwrap().to_string(), "f(b,i(b))");
        assert!(parse_term("f(b,i(b)) c", &trs).is_err());
        let m = parse_machine("states: q0 q1 qL\ninitial: q0\nfinal: qL\nq0 1 + q1\nq1 1 + qL\n").unwrap();
        assert_eq!(m.transitions.len(), 2);
        assert!(parse_machine("states: q0\ninitial: q0\nfinal: q0\nq0 3 + q0\n").is_err());
    }
}
