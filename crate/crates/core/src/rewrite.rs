//! Rules, rewrite systems and the rewrite relation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::subst::{match_term, rename_terms_apart, Substitution};
use crate::term::{Name, Position, Signature, Term};

/// Default step budget for normalization.
pub const DEFAULT_FUEL: usize = 10_000;

/// An oriented rule `lhs -> rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Rule {
    pub label: String,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    pub fn new(label: impl Into<String>, lhs: Term, rhs: Term) -> Self {
        Rule {
            label: label.into(),
            lhs,
            rhs,
        }
    }

    /// Variables of both sides, first occurrence order, lhs first.
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.lhs.collect_vars(&mut out);
        self.rhs.collect_vars(&mut out);
        out
    }

    pub fn var_set(&self) -> BTreeSet<Name> {
        self.vars().into_iter().collect()
    }

    /// `(root(lhs), root(rhs))`, absent when either side is a variable.
    pub fn root_pair(&self) -> Option<(Name, Name)> {
        Some((self.lhs.root()?.clone(), self.rhs.root()?.clone()))
    }

    /// A variant of the rule sharing no variable with `avoid`.
    pub fn rename_apart(&self, avoid: &BTreeSet<Name>) -> Rule {
        let (mut sides, _) = rename_terms_apart(&[&self.lhs, &self.rhs], avoid);
        let rhs = sides.pop().expect("two sides");
        let lhs = sides.pop().expect("two sides");
        Rule::new(self.label.clone(), lhs, rhs)
    }

    /// Variables of the lhs that do not occur in the rhs.
    pub fn erased_vars(&self) -> Vec<Name> {
        let rv = self.rhs.var_set();
        self.lhs.vars().into_iter().filter(|x| !rv.contains(x)).collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// A single rewrite step: rule `label` applied at `position` with `substitution`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RewriteStep {
    pub label: String,
    pub position: Position,
    pub substitution: Substitution,
}

/// A rewrite sequence from `start`. `result` is the last term reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub start: Term,
    pub steps: Vec<RewriteStep>,
    pub result: Term,
}

impl Trace {
    pub fn empty(t: Term) -> Self {
        Trace {
            start: t.clone(),
            steps: Vec::new(),
            result: t,
        }
    }

    /// The terms visited, `start` first and `result` last.
    pub fn terms(&self, trs: &Trs) -> Result<Vec<Term>> {
        let mut out = vec![self.start.clone()];
        let mut cur = self.start.clone();
        for step in &self.steps {
            cur = trs.replay(&cur, step)?;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// An ordered rewrite system with its signature and declared variables.
#[derive(Debug, Clone)]
pub struct Trs {
    signature: Signature,
    variables: BTreeSet<Name>,
    rules: Vec<Rule>,
    // root symbol -> rule indices in file order
    index: HashMap<Name, Vec<usize>>,
    /// Precedence hint carried by the file, greatest first.
    pub precedence: Option<Vec<Name>>,
}

impl PartialEq for Trs {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.variables == other.variables
            && self.rules == other.rules
            && self.precedence == other.precedence
    }
}

impl Trs {
    /// Builds a validated system. Every rule must use declared symbols with
    /// their declared arity, have a non-variable lhs, introduce no variable on
    /// the rhs and carry a unique label.
    pub fn new(signature: Signature, variables: BTreeSet<Name>, rules: Vec<Rule>) -> Result<Self> {
        let mut labels = BTreeSet::new();
        for r in &rules {
            if !labels.insert(r.label.clone()) {
                return Err(Error::DuplicateLabel(r.label.clone()));
            }
            for side in [&r.lhs, &r.rhs] {
                check_term(&signature, side)?;
            }
            if r.lhs.is_var() {
                return Err(Error::VariableViolation {
                    rule: r.label.clone(),
                    message: format!("left-hand side {} is a variable", r.lhs),
                });
            }
            let lv = r.lhs.var_set();
            if let Some(x) = r.rhs.vars().into_iter().find(|x| !lv.contains(x)) {
                return Err(Error::VariableViolation {
                    rule: r.label.clone(),
                    message: format!("variable {x} occurs on the right but not on the left"),
                });
            }
        }
        let mut index: HashMap<Name, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            let root = r.lhs.root().expect("checked non-variable").clone();
            index.entry(root).or_default().push(i);
        }
        Ok(Trs {
            signature,
            variables,
            rules,
            index,
            precedence: None,
        })
    }

    /// Builds a system whose signature and variables are read off the rules,
    /// symbols in order of first occurrence.
    pub fn from_rules(rules: Vec<Rule>) -> Result<Self> {
        let mut sig = Signature::new();
        let mut vars = BTreeSet::new();
        for r in &rules {
            for side in [&r.lhs, &r.rhs] {
                declare_all(&mut sig, side)?;
                vars.extend(side.vars());
            }
        }
        Trs::new(sig, vars, rules)
    }

    /// Same signature and variables, different rules.
    pub fn with_rules(&self, rules: Vec<Rule>) -> Result<Self> {
        let mut out = Trs::new(self.signature.clone(), self.variables.clone(), rules)?;
        out.precedence = self.precedence.clone();
        Ok(out)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn variables(&self) -> &BTreeSet<Name> {
        &self.variables
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, label: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.label == label)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn candidates(&self, t: &Term) -> &[usize] {
        match t {
            Term::App(f, _) => self.index.get(f).map(Vec::as_slice).unwrap_or(&[]),
            Term::Var(_) => &[],
        }
    }

    /// First rule in file order whose lhs matches `t`, applied at the root.
    pub fn rewrite_root(&self, t: &Term) -> Option<(Term, usize, Substitution)> {
        self.candidates(t).iter().find_map(|&i| {
            let r = &self.rules[i];
            match_term(&r.lhs, t).map(|sigma| (sigma.apply(&r.rhs), i, sigma))
        })
    }

    /// All root rewrites of `t`, one per matching rule, in file order.
    pub fn root_reducts(&self, t: &Term) -> Vec<(Term, &Rule)> {
        self.candidates(t)
            .iter()
            .filter_map(|&i| {
                let r = &self.rules[i];
                match_term(&r.lhs, t).map(|sigma| (sigma.apply(&r.rhs), r))
            })
            .collect()
    }

    /// True when some rule matches `t` at the root.
    pub fn is_root_redex(&self, t: &Term) -> bool {
        self.candidates(t)
            .iter()
            .any(|&i| match_term(&self.rules[i].lhs, t).is_some())
    }

    /// Rewrites `t` at `p` with the first matching rule.
    pub fn rewrite_at(&self, t: &Term, p: &Position) -> Result<Option<(Term, RewriteStep)>> {
        let sub = t.subterm_at(p)?;
        Ok(match self.rewrite_root(sub) {
            None => None,
            Some((contractum, i, sigma)) => Some((
                t.replace_at(p, contractum)?,
                RewriteStep {
                    label: self.rules[i].label.clone(),
                    position: p.clone(),
                    substitution: sigma,
                },
            )),
        })
    }

    /// Re-applies a recorded step, checking that it fits.
    pub fn replay(&self, t: &Term, step: &RewriteStep) -> Result<Term> {
        let rule = self
            .rule(&step.label)
            .ok_or_else(|| Error::UnknownRule(step.label.clone()))?;
        let redex = t.subterm_at(&step.position)?;
        if step.substitution.apply(&rule.lhs) != *redex {
            return Err(Error::StepMismatch {
                label: step.label.clone(),
                position: step.position.to_string(),
                term: t.to_string(),
            });
        }
        t.replace_at(&step.position, step.substitution.apply(&rule.rhs))
    }

    /// True when no subterm of `t` is a redex.
    pub fn is_irreducible(&self, t: &Term) -> bool {
        t.args().iter().all(|a| self.is_irreducible(a)) && !self.is_root_redex(t)
    }

    /// All proper subterms are irreducible.
    pub fn is_eps_irreducible(&self, t: &Term) -> bool {
        t.args().iter().all(|a| self.is_irreducible(a))
    }

    /// Every proper subterm is irreducible and `t` itself is a redex.
    pub fn is_innermost_redex(&self, t: &Term) -> bool {
        !t.is_var() && self.is_eps_irreducible(t) && self.is_root_redex(t)
    }

    /// Leftmost-innermost normalization with at most `fuel` steps.
    pub fn normalize(&self, t: &Term, fuel: usize) -> Result<Trace> {
        let mut steps = Vec::new();
        let mut left = fuel;
        let mut path = Vec::new();
        match self.norm_rec(t, &mut path, &mut left, &mut steps) {
            Some(result) => Ok(Trace {
                start: t.clone(),
                steps,
                result,
            }),
            None => Err(self.exhausted(t, steps)),
        }
    }

    /// Normal form only.
    pub fn normal_form(&self, t: &Term, fuel: usize) -> Result<Term> {
        self.normalize(t, fuel).map(|tr| tr.result)
    }

    fn exhausted(&self, t: &Term, steps: Vec<RewriteStep>) -> Error {
        let mut cur = t.clone();
        for s in &steps {
            cur = self.replay(&cur, s).expect("engine steps replay");
        }
        Error::FuelExhausted {
            partial: Box::new(Trace {
                start: t.clone(),
                steps,
                result: cur,
            }),
        }
    }

    // Normalizes arguments left to right, then the root, and repeats on the
    // contractum. This visits redexes in leftmost-innermost order. Root steps
    // loop rather than recurse, so stack depth is bounded by term depth.
    fn norm_rec(
        &self,
        t: &Term,
        path: &mut Vec<usize>,
        fuel: &mut usize,
        steps: &mut Vec<RewriteStep>,
    ) -> Option<Term> {
        let mut t = t.clone();
        loop {
            let cur = match &t {
                Term::Var(_) => return Some(t),
                Term::App(f, args) => {
                    let mut out = Vec::with_capacity(args.len());
                    for (i, a) in args.iter().enumerate() {
                        path.push(i + 1);
                        let r = self.norm_rec(a, path, fuel, steps);
                        path.pop();
                        out.push(r?);
                    }
                    Term::App(f.clone(), out)
                }
            };
            let Some((contractum, i, sigma)) = self.rewrite_root(&cur) else {
                return Some(cur);
            };
            if *fuel == 0 {
                return None;
            }
            *fuel -= 1;
            steps.push(RewriteStep {
                label: self.rules[i].label.clone(),
                position: Position(path.clone()),
                substitution: sigma,
            });
            t = contractum;
        }
    }

    /// Leftmost-outermost normalization.
    pub fn normalize_outermost(&self, t: &Term, fuel: usize) -> Result<Trace> {
        let mut cur = t.clone();
        let mut steps = Vec::new();
        loop {
            let pos = cur
                .positions(true)
                .into_iter()
                .find(|p| self.is_root_redex(cur.get(p).expect("own position")));
            let Some(p) = pos else {
                return Ok(Trace {
                    start: t.clone(),
                    steps,
                    result: cur,
                });
            };
            if steps.len() == fuel {
                return Err(self.exhausted(t, steps));
            }
            let (next, step) = self.rewrite_at(&cur, &p)?.expect("redex found");
            steps.push(step);
            cur = next;
        }
    }

    /// Normalizes every argument without rewriting at the root.
    pub fn eps_normal_form(&self, t: &Term, fuel: usize) -> Result<Term> {
        match t {
            Term::Var(_) => Ok(t.clone()),
            Term::App(f, args) => {
                let mut left = fuel;
                let mut out = Vec::with_capacity(args.len());
                for a in args {
                    let tr = self.normalize(a, left)?;
                    left -= tr.steps.len();
                    out.push(tr.result);
                }
                Ok(Term::App(f.clone(), out))
            }
        }
    }

    /// Common normal form of `s` and `t` when they have one.
    pub fn joinable(&self, s: &Term, t: &Term, fuel: usize) -> Result<Option<Term>> {
        let ns = self.normal_form(s, fuel)?;
        let nt = self.normal_form(t, fuel)?;
        Ok((ns == nt).then_some(ns))
    }
}

fn check_term(sig: &Signature, t: &Term) -> Result<()> {
    match t {
        Term::Var(_) => Ok(()),
        Term::App(f, args) => {
            match sig.arity(f) {
                None => return Err(Error::UndeclaredSymbol(f.to_string())),
                Some(a) if a != args.len() => {
                    return Err(Error::ArityMismatch {
                        symbol: f.to_string(),
                        expected: a,
                        found: args.len(),
                    })
                }
                Some(_) => {}
            }
            args.iter().try_for_each(|a| check_term(sig, a))
        }
    }
}

pub(crate) fn declare_all(sig: &mut Signature, t: &Term) -> Result<()> {
    if let Term::App(f, args) = t {
        sig.declare(f, args.len())?;
        for a in args {
            declare_all(sig, a)?;
        }
    }
    Ok(())
}

/// Positions where `s` and `t` first disagree: the symbols (or variables)
/// differ there and agree on every proper prefix.
pub fn odp(s: &Term, t: &Term) -> Vec<Position> {
    fn go(s: &Term, t: &Term, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        match (s, t) {
            (Term::App(f, fs), Term::App(g, gs)) if f == g && fs.len() == gs.len() => {
                for (i, (a, b)) in fs.iter().zip(gs).enumerate() {
                    path.push(i + 1);
                    go(a, b, path, out);
                    path.pop();
                }
            }
            (Term::Var(x), Term::Var(y)) if x == y => {}
            _ => out.push(Position(path.clone())),
        }
    }
    let mut out = Vec::new();
    go(s, t, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }
    fn c(x: &str) -> Term {
        Term::constant(x)
    }
    fn app(f: &str, a: Vec<Term>) -> Term {
        Term::app(f, a)
    }

    fn three_rules() -> Trs {
        Trs::from_rules(vec![
            Rule::new(
                "r1",
                app("f", vec![v("x"), app("i", vec![v("x")])]),
                app("g", vec![v("x")]),
            ),
            Rule::new("r2", app("g", vec![c("b")]), c("c")),
            Rule::new("r3", app("f", vec![c("b"), app("i", vec![c("b")])]), c("c")),
        ])
        .unwrap()
    }

    fn fbib() -> Term {
        app("f", vec![c("b"), app("i", vec![c("b")])])
    }

    #[test]
    fn rewrite_at_root_uses_first_rule() {
        let r = three_rules();
        let (t, step) = r.rewrite_at(&fbib(), &Position::root()).unwrap().unwrap();
        assert_eq!(t.to_string(), "g(b)");
        assert_eq!(step.label, "r1");
        let only_g = Trs::from_rules(vec![Rule::new("r", app("g", vec![c("b")]), c("c"))]).unwrap();
        assert!(only_g.rewrite_at(&fbib(), &Position::root()).unwrap().is_none());
        let t = app("f", vec![app("g", vec![c("b")]), c("a")]);
        let (t2, _) = only_g.rewrite_at(&t, &Position(vec![1])).unwrap().unwrap();
        assert_eq!(t2.to_string(), "f(c,a)");
        assert!(only_g.rewrite_at(&t, &Position(vec![3])).is_err());
    }

    #[test]
    fn normalize_records_replayable_trace() {
        let r = three_rules();
        let tr = r.normalize(&fbib(), 10).unwrap();
        assert_eq!(tr.result, c("c"));
        assert_eq!(tr.steps.len(), 2);
        let terms = tr.terms(&r).unwrap();
        assert_eq!(terms[1].to_string(), "g(b)");
        assert_eq!(*terms.last().unwrap(), tr.result);
        let irr = c("c");
        assert!(r.normalize(&irr, 10).unwrap().steps.is_empty());
    }

    #[test]
    fn fuel_exhaustion_carries_partial_trace() {
        let loop_ = Trs::from_rules(vec![Rule::new("l", c("a"), app("h", vec![c("a")]))]).unwrap();
        match loop_.normalize(&c("a"), 5) {
            Err(Error::FuelExhausted { partial }) => {
                assert_eq!(partial.steps.len(), 5);
                assert_eq!(partial.result.depth(), 6);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eps_notions() {
        let r = three_rules();
        assert!(r.is_innermost_redex(&fbib()));
        assert!(!r.is_innermost_redex(&v("x")));
        let t = app("f", vec![app("g", vec![c("b")]), c("a")]);
        assert!(!r.is_eps_irreducible(&t));
        let t = app(
            "f",
            vec![app("g", vec![c("b")]), app("i", vec![app("g", vec![c("b")])])],
        );
        assert_eq!(r.eps_normal_form(&t, 10).unwrap().to_string(), "f(c,i(c))");
    }

    #[test]
    fn odp_examples() {
        let s = app("f", vec![c("a"), c("b")]);
        assert!(odp(&s, &s).is_empty());
        let t = app("f", vec![c("a"), c("c")]);
        assert_eq!(odp(&s, &t), vec![Position(vec![2])]);
        let u = app("g", vec![c("a"), c("b")]);
        assert_eq!(odp(&s, &u), vec![Position::root()]);
    }

    #[test]
    fn joinability() {
        let r = three_rules();
        assert_eq!(r.joinable(&fbib(), &c("c"), 10).unwrap(), Some(c("c")));
        let ab = Trs::from_rules(vec![Rule::new("1", c("a"), c("b")), Rule::new("2", c("c"), c("d"))]).unwrap();
        assert!(ab.joinable(&c("a"), &c("c"), 10).unwrap().is_none());
        assert!(ab.joinable(&c("a"), &c("a"), 10).unwrap().is_some());
    }

    #[test]
    fn strategies_agree_on_convergent_system() {
        let r = three_rules();
        let t = app("f", vec![app("g", vec![c("b")]), app("i", vec![c("c")])]);
        assert_eq!(
            r.normalize(&t, 100).unwrap().result,
            r.normalize_outermost(&t, 100).unwrap().result
        );
    }

    #[test]
    fn validation_rejects_fresh_rhs_variable() {
        let bad = Trs::from_rules(vec![Rule::new(
            "r",
            app("f", vec![v("x")]),
            app("g", vec![v("x"), v("y")]),
        )]);
        assert!(matches!(bad, Err(Error::VariableViolation { .. })));
    }
}
