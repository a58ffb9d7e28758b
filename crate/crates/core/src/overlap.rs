//! Overlaps between rules: critical pairs, non-overlay superpositions,
//! right-hand-side critical pairs and paramodulation inferences.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::rewrite::{Rule, Trs};
use crate::subst::{match_all, mgu, variant_key, Substitution};
use crate::term::{Name, Position, Term};

/// A critical pair `⟨σ(l1)[σ(r2)]p, σ(r1)⟩` from `outer` overlapped by
/// `inner` at `position`.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPair {
    pub left: Term,
    pub right: Term,
    pub peak: Term,
    pub outer: String,
    pub inner: String,
    pub position: Position,
    pub mgu: Substitution,
}

impl fmt::Display for CriticalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{}, {}> from [{}] over [{}] at {}",
            self.left, self.right, self.outer, self.inner, self.position
        )
    }
}

/// Where an equation came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EquationOrigin {
    Rule { label: String },
    RhsPair { first: String, second: String },
}

/// An equation `lhs ≈ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
    pub origin: EquationOrigin,
}

impl Equation {
    pub fn from_rule(r: &Rule) -> Self {
        Equation {
            lhs: r.lhs.clone(),
            rhs: r.rhs.clone(),
            origin: EquationOrigin::Rule { label: r.label.clone() },
        }
    }

    /// Root pair as an unordered pair, absent when a side is a variable.
    pub fn root_pair(&self) -> Option<RootPair> {
        Some(RootPair::new(self.lhs.root()?.clone(), self.rhs.root()?.clone()))
    }

    /// Both sides have the same root symbol.
    pub fn is_root_stable(&self) -> bool {
        matches!((self.lhs.root(), self.rhs.root()), (Some(f), Some(g)) if f == g)
    }

    /// Key identifying the equation up to variable renaming and side swap.
    pub fn canonical_key(&self) -> Vec<Term> {
        let a = variant_key(&[&self.lhs, &self.rhs]);
        let b = variant_key(&[&self.rhs, &self.lhs]);
        a.min(b)
    }

    /// True when one substitution maps the side rooted `f` onto `s` and the
    /// other onto `t`, i.e. the equation rewrites `s` to `t` at the root.
    pub fn rewrites_at_root(&self, s: &Term, t: &Term) -> bool {
        match_all(&[(&self.lhs, s), (&self.rhs, t)]).is_some() || match_all(&[(&self.rhs, s), (&self.lhs, t)]).is_some()
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)?;
        match &self.origin {
            EquationOrigin::Rule { label } => write!(f, "  (rule {label})"),
            EquationOrigin::RhsPair { first, second } => write!(f, "  (rhs pair {first}, {second})"),
        }
    }
}

/// Unordered pair of root symbols, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootPair(pub Name, pub Name);

impl Serialize for RootPair {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl RootPair {
    pub fn new(f: Name, g: Name) -> Self {
        if f <= g {
            RootPair(f, g)
        } else {
            RootPair(g, f)
        }
    }
}

impl fmt::Display for RootPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.0, self.1)
    }
}

/// `second` renamed apart from `first`.
fn apart(first: &Rule, second: &Rule) -> Rule {
    second.rename_apart(&first.var_set())
}

/// All critical pairs: `inner` (renamed apart) overlapping `outer` at a
/// non-variable position of its lhs, except a rule with itself at the root.
/// Order: outer rule, inner rule, position (pre-order).
pub fn critical_pairs(trs: &Trs) -> Vec<CriticalPair> {
    let mut out = Vec::new();
    for (i, outer) in trs.rules().iter().enumerate() {
        for (j, inner0) in trs.rules().iter().enumerate() {
            let inner = apart(outer, inner0);
            for p in outer.lhs.fpos() {
                if i == j && p.is_root() {
                    continue;
                }
                let sub = outer.lhs.get(&p).expect("own position");
                let Some(sigma) = mgu(sub, &inner.lhs) else { continue };
                let peak = sigma.apply(&outer.lhs);
                let left = peak
                    .replace_at(&p, sigma.apply(&inner.rhs))
                    .expect("position of the instance");
                out.push(CriticalPair {
                    left,
                    right: sigma.apply(&outer.rhs),
                    peak,
                    outer: outer.label.clone(),
                    inner: inner.label.clone(),
                    position: p,
                    mgu: sigma,
                });
            }
        }
    }
    out
}

/// A non-overlay superposition `σ(l1)` with its origin.
#[derive(Debug, Clone, Serialize)]
pub struct Superposition {
    pub term: Term,
    pub outer: String,
    pub inner: String,
    pub position: Position,
}

/// Non-overlay superpositions: `σ(l1)` for every overlap of a renamed-apart
/// lhs into a non-root, non-variable position of a lhs, deduplicated up to
/// renaming.
pub fn nosup(trs: &Trs) -> Vec<Superposition> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for outer in trs.rules() {
        for inner0 in trs.rules() {
            let inner = apart(outer, inner0);
            for p in outer.lhs.fpos().into_iter().skip(1) {
                let sub = outer.lhs.get(&p).expect("own position");
                if let Some(sigma) = mgu(sub, &inner.lhs) {
                    let term = sigma.apply(&outer.lhs);
                    if seen.insert(variant_key(&[&term])) {
                        out.push(Superposition {
                            term,
                            outer: outer.label.clone(),
                            inner: inner.label.clone(),
                            position: p,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Right-hand-side critical pairs: for each ordered pair of rules (a rule
/// also paired with a renamed copy of itself) whose right-hand sides unify
/// with `σ`, the equation `σ(l1) ≈ σ(l2)` when its sides differ.
/// Deduplicated up to renaming and side swap.
pub fn rhs_critical_pairs(trs: &Trs) -> Vec<Equation> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for first in trs.rules() {
        for second0 in trs.rules() {
            let second = apart(first, second0);
            let Some(sigma) = mgu(&first.rhs, &second.rhs) else {
                continue;
            };
            let (a, b) = (sigma.apply(&first.lhs), sigma.apply(&second.lhs));
            if a == b {
                continue;
            }
            let eq = Equation {
                lhs: a,
                rhs: b,
                origin: EquationOrigin::RhsPair {
                    first: first.label.clone(),
                    second: second.label.clone(),
                },
            };
            if seen.insert(eq.canonical_key()) {
                out.push(eq);
            }
        }
    }
    out
}

/// The rules read as equations followed by their right-hand-side critical
/// pairs, deduplicated up to renaming and side swap.
pub fn rhs_closure(trs: &Trs) -> Vec<Equation> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for eq in trs
        .rules()
        .iter()
        .map(Equation::from_rule)
        .chain(rhs_critical_pairs(trs))
    {
        if seen.insert(eq.canonical_key()) {
            out.push(eq);
        }
    }
    out
}

/// One paramodulation inference: rule `rule` into side `into` of the
/// equation read off rule `target` (oriented `forward` as lhs ≈ rhs or
/// reversed) at `position`.
#[derive(Debug, Clone, Serialize)]
pub struct Paramodulant {
    pub rule: String,
    pub target: String,
    pub forward: bool,
    pub position: Position,
    pub mgu: Substitution,
    pub conclusion_lhs: Term,
    pub conclusion_rhs: Term,
}

impl fmt::Display for Paramodulant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} from [{}] into {} side of [{}] at {}",
            self.conclusion_lhs,
            self.conclusion_rhs,
            self.rule,
            if self.forward { "left" } else { "right" },
            self.target,
            self.position
        )
    }
}

/// All paramodulation inferences of a rule into a side of an equation of
/// the system, both orientations of each rule read as an equation, excluding
/// a rule into its own lhs at the root.
pub fn paramodulation_candidates(trs: &Trs) -> Vec<Paramodulant> {
    let mut out = Vec::new();
    for target in trs.rules() {
        for forward in [true, false] {
            let (u, v) = if forward {
                (&target.lhs, &target.rhs)
            } else {
                (&target.rhs, &target.lhs)
            };
            for rule0 in trs.rules() {
                let rule = apart(target, rule0);
                for p in u.fpos() {
                    if forward && p.is_root() && rule0.label == target.label {
                        continue;
                    }
                    let sub = u.get(&p).expect("own position");
                    let Some(sigma) = mgu(sub, &rule.lhs) else { continue };
                    let replaced = u.replace_at(&p, rule.rhs.clone()).expect("own position");
                    out.push(Paramodulant {
                        rule: rule.label.clone(),
                        target: target.label.clone(),
                        forward,
                        position: p,
                        conclusion_lhs: sigma.apply(&replaced),
                        conclusion_rhs: sigma.apply(v),
                        mgu: sigma,
                    });
                }
            }
        }
    }
    out
}

/// Subsumption-based redundancy of an equation: its sides are equal, or one
/// substitution maps both sides of some rule (either orientation) onto it.
pub fn equation_is_redundant(trs: &Trs, lhs: &Term, rhs: &Term) -> bool {
    lhs == rhs
        || trs.rules().iter().any(|r| {
            match_all(&[(&r.lhs, lhs), (&r.rhs, rhs)]).is_some() || match_all(&[(&r.lhs, rhs), (&r.rhs, lhs)]).is_some()
        })
}

/// Directed root pairs `(root(l), root(r))` of the rules.
pub fn root_pairs(trs: &Trs) -> BTreeSet<(Name, Name)> {
    trs.rules().iter().filter_map(Rule::root_pair).collect()
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

    fn fg_system() -> Trs {
        Trs::from_rules(vec![
            Rule::new("r1", app("f", vec![app("g", vec![v("x")])]), c("a")),
            Rule::new("r2", app("g", vec![c("b")]), c("c")),
        ])
        .unwrap()
    }

    #[test]
    fn critical_pair_example() {
        let cps = critical_pairs(&fg_system());
        assert_eq!(cps.len(), 1);
        assert_eq!(cps[0].left.to_string(), "f(c)");
        assert_eq!(cps[0].right.to_string(), "a");
        assert_eq!(cps[0].position.to_string(), "1");
        assert!(critical_pairs(&Trs::from_rules(vec![]).unwrap()).is_empty());
    }

    #[test]
    fn nosup_example() {
        let ns = nosup(&fg_system());
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0].term.to_string(), "f(g(b))");
        let ab = Trs::from_rules(vec![Rule::new("r", c("a"), c("b"))]).unwrap();
        assert!(nosup(&ab).is_empty());
    }

    #[test]
    fn rhs_pairs_examples() {
        let fxx = Trs::from_rules(vec![Rule::new("r", app("f", vec![v("x"), v("x")]), c("0"))]).unwrap();
        let eqs = rhs_critical_pairs(&fxx);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].lhs.to_string(), "f(x,x)");
        assert_eq!(eqs[0].rhs.to_string(), "f(x1,x1)");
        assert!(eqs[0].is_root_stable());

        let ab = Trs::from_rules(vec![Rule::new("1", c("a"), c("b")), Rule::new("2", c("c"), c("d"))]).unwrap();
        assert!(rhs_critical_pairs(&ab).is_empty());

        let fgh = Trs::from_rules(vec![Rule::new(
            "r",
            app("f", vec![app("g", vec![app("h", vec![v("x")])])]),
            app("g", vec![v("x")]),
        )])
        .unwrap();
        assert!(rhs_critical_pairs(&fgh).is_empty());
        assert_eq!(rhs_closure(&fgh).len(), 1);
    }

    #[test]
    fn rhs_pair_between_two_rules_is_general() {
        let r = Trs::from_rules(vec![
            Rule::new(
                "r1",
                app("f", vec![v("x"), app("s", vec![v("y")])]),
                app("s", vec![app("f", vec![v("x"), v("y")])]),
            ),
            Rule::new(
                "r2",
                app("f", vec![app("s", vec![v("x")]), v("y")]),
                app("s", vec![app("f", vec![v("y"), v("x")])]),
            ),
        ])
        .unwrap();
        let eqs = rhs_critical_pairs(&r);
        let between: Vec<_> = eqs
            .iter()
            .filter(|e| matches!(&e.origin, EquationOrigin::RhsPair { first, second } if first != second))
            .collect();
        assert_eq!(between.len(), 1);
        let e = between[0];
        assert_eq!(e.root_pair(), Some(RootPair::new("f".into(), "f".into())));
        // the ungeneralized instance f(x,s(x)) = f(s(x),x) is covered
        let inst_l = app("f", vec![v("x"), app("s", vec![v("x")])]);
        let inst_r = app("f", vec![app("s", vec![v("x")]), v("x")]);
        assert!(e.rewrites_at_root(&inst_l, &inst_r));
    }

    #[test]
    fn paramodulation_example() {
        let ps = paramodulation_candidates(&fg_system());
        assert!(ps.iter().any(|p| p.forward
            && p.position.to_string() == "1"
            && p.conclusion_lhs.to_string() == "f(c)"
            && p.conclusion_rhs.to_string() == "a"));
    }
}
