//! Lexicographic path ordering and precedence search.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rewrite::Trs;
use crate::term::{Name, Symbol, Term};

/// Largest number of symbols for which all precedences are tried.
pub const MAX_SEARCH_SYMBOLS: usize = 8;

/// A strict total order on symbols, greatest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precedence {
    order: Vec<Name>,
    rank: HashMap<Name, usize>,
}

impl Precedence {
    /// Rejects repeated symbols.
    pub fn new(order: Vec<Name>) -> Result<Self> {
        let mut rank = HashMap::new();
        for (i, f) in order.iter().enumerate() {
            if rank.insert(f.clone(), order.len() - i).is_some() {
                return Err(Error::InvalidPrecedence(format!("{f} listed twice")));
            }
        }
        Ok(Precedence { order, rank })
    }

    pub fn parse(spec: &str) -> Result<Self> {
        Precedence::new(
            spec.split([',', ' ', '>'])
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(Name::from)
                .collect(),
        )
    }

    pub fn order(&self) -> &[Name] {
        &self.order
    }

    /// `f ≻ g`. Symbols outside the order are only equal to themselves.
    pub fn greater(&self, f: &str, g: &str) -> bool {
        match (self.rank.get(f), self.rank.get(g)) {
            (Some(a), Some(b)) => a > b,
            _ => false,
        }
    }

    pub fn covers(&self, f: &str) -> bool {
        self.rank.contains_key(f)
    }
}

impl fmt::Display for Precedence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.order.iter().join(" > "))
    }
}

impl Serialize for Precedence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `s >lpo t`.
pub fn lpo_greater(prec: &Precedence, s: &Term, t: &Term) -> bool {
    match (s, t) {
        (Term::Var(_), _) => false,
        (Term::App(..), Term::Var(x)) => s.contains_var(x),
        (Term::App(f, ss), Term::App(g, ts)) => {
            if ss.iter().any(|si| si == t || lpo_greater(prec, si, t)) {
                return true;
            }
            if f == g {
                ts.iter().all(|tj| lpo_greater(prec, s, tj)) && lex_greater(prec, ss, ts)
            } else {
                prec.greater(f, g) && ts.iter().all(|tj| lpo_greater(prec, s, tj))
            }
        }
    }
}

fn lex_greater(prec: &Precedence, ss: &[Term], ts: &[Term]) -> bool {
    for (a, b) in ss.iter().zip(ts) {
        if a != b {
            return lpo_greater(prec, a, b);
        }
    }
    false
}

/// Outcome of the termination check.
#[derive(Debug, Clone, Serialize)]
pub struct Termination {
    pub proved: bool,
    /// A precedence orienting every rule when `proved`.
    pub precedence: Option<Precedence>,
    /// A rule not oriented by the supplied precedence.
    pub failing_rule: Option<String>,
    pub searched: bool,
}

/// Orients every rule by LPO. With `prec` the given precedence is checked;
/// otherwise every total order of the symbols occurring in the rules is
/// tried, which requires at most [`MAX_SEARCH_SYMBOLS`] of them.
pub fn check_termination(trs: &Trs, prec: Option<&Precedence>) -> Result<Termination> {
    if let Some(p) = prec {
        let failing = trs
            .rules()
            .iter()
            .find(|r| !lpo_greater(p, &r.lhs, &r.rhs))
            .map(|r| r.label.clone());
        return Ok(Termination {
            proved: failing.is_none(),
            precedence: failing.is_none().then(|| p.clone()),
            failing_rule: failing,
            searched: false,
        });
    }
    let mut symbols = BTreeSet::new();
    for r in trs.rules() {
        r.lhs.symbols(&mut symbols);
        r.rhs.symbols(&mut symbols);
    }
    let names: Vec<Name> = symbols.into_iter().map(|s: Symbol| s.name).dedup().collect();
    if names.len() > MAX_SEARCH_SYMBOLS {
        return Err(Error::SignatureTooLarge(names.len()));
    }
    let n = names.len();
    for perm in names.into_iter().permutations(n) {
        let p = Precedence::new(perm).expect("distinct symbols");
        if trs.rules().iter().all(|r| lpo_greater(&p, &r.lhs, &r.rhs)) {
            return Ok(Termination {
                proved: true,
                precedence: Some(p),
                failing_rule: None,
                searched: true,
            });
        }
    }
    Ok(Termination {
        proved: false,
        precedence: None,
        failing_rule: None,
        searched: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::Rule;

    fn v(x: &str) -> Term {
        Term::var(x)
    }
    fn app(f: &str, a: Vec<Term>) -> Term {
        Term::app(f, a)
    }

    #[test]
    fn lemma_system_orients() {
        let r = Trs::from_rules(vec![Rule::new(
            "r",
            app("f", vec![app("g", vec![app("h", vec![v("x")])])]),
            app("g", vec![v("x")]),
        )])
        .unwrap();
        let p = Precedence::parse("f,g,h").unwrap();
        assert!(check_termination(&r, Some(&p)).unwrap().proved);
        assert!(check_termination(&r, None).unwrap().proved);
    }

    #[test]
    fn loops_never_orient() {
        let a = Term::constant("a");
        let r = Trs::from_rules(vec![Rule::new("r", a.clone(), a)]).unwrap();
        let t = check_termination(&r, None).unwrap();
        assert!(!t.proved);
    }

    #[test]
    fn lex_and_subterm_cases() {
        let p = Precedence::parse("f > g").unwrap();
        let s = app("f", vec![app("g", vec![v("x")]), v("y")]);
        let t = app("f", vec![v("x"), app("g", vec![v("y")])]);
        assert!(lpo_greater(&p, &s, &t));
        assert!(!lpo_greater(&p, &t, &s));
        assert!(lpo_greater(&p, &app("g", vec![v("x")]), &v("x")));
        assert!(!lpo_greater(&p, &v("x"), &v("x")));
    }

    #[test]
    fn oversized_signature_without_precedence_is_an_error() {
        let names = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];
        let rules = names
            .windows(2)
            .enumerate()
            .map(|(i, w)| Rule::new(format!("r{i}"), Term::constant(w[0]), Term::constant(w[1])))
            .collect();
        let r = Trs::from_rules(rules).unwrap();
        assert!(matches!(check_termination(&r, None), Err(Error::SignatureTooLarge(9))));
    }
}
