//! Substitutions, matching and syntactic unification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::term::{Name, Term};

/// Finite map from variables to terms. Identity bindings are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    map: BTreeMap<Name, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `x` to `t`, dropping the binding when it is `x ↦ x`.
    pub fn bind(&mut self, x: Name, t: Term) {
        if matches!(&t, Term::Var(y) if *y == x) {
            self.map.remove(&x);
        } else {
            self.map.insert(x, t);
        }
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.map.get(x)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Name> {
        self.map.keys()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(x) => self.map.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    /// `self ∘ other`: applying the result equals applying `other` then `self`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (x, t) in &other.map {
            out.bind(x.clone(), self.apply(t));
        }
        for (x, t) in &self.map {
            if !other.map.contains_key(x) {
                out.bind(x.clone(), t.clone());
            }
        }
        out
    }

    /// Restriction to the given variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Name>) -> Substitution {
        let mut out = Substitution::new();
        for x in vars {
            if let Some(t) = self.map.get(x) {
                out.bind(x.clone(), t.clone());
            }
        }
        out
    }

    /// True when every binding maps to a variable and no two variables share
    /// an image.
    pub fn is_renaming(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.map.values().all(|t| match t {
            Term::Var(y) => seen.insert(y.clone()),
            _ => false,
        })
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}->{t}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Substitution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromIterator<(Name, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Name, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (x, t) in iter {
            s.bind(x, t);
        }
        s
    }
}

/// One-sided matching: finds `σ` with `σ(pattern) = subject`. Variables of
/// the subject are treated as constants.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    match_into(pattern, subject, &mut sigma).then(|| normalize_identity(sigma))
}

/// Extends `sigma` so that it matches `pattern` onto `subject`.
pub fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(x), _) => match sigma.map.get(x) {
            Some(bound) => bound == subject,
            None => {
                // keep identity bindings too: they still constrain later occurrences
                sigma.map.insert(x.clone(), subject.clone());
                true
            }
        },
        (Term::App(f, fs), Term::App(g, gs)) => {
            f == g && fs.len() == gs.len() && fs.iter().zip(gs).all(|(p, s)| match_into(p, s, sigma))
        }
        (Term::App(..), Term::Var(_)) => false,
    }
}

/// Simultaneous matching of several pattern/subject pairs.
pub fn match_all(pairs: &[(&Term, &Term)]) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    for (p, s) in pairs {
        if !match_into(p, s, &mut sigma) {
            return None;
        }
    }
    Some(normalize_identity(sigma))
}

fn normalize_identity(sigma: Substitution) -> Substitution {
    sigma.map.into_iter().collect()
}

/// Most general unifier with occurs check. The result is idempotent.
pub fn mgu(s: &Term, t: &Term) -> Option<Substitution> {
    unify_all(&[(s.clone(), t.clone())])
}

/// Most general simultaneous unifier of all pairs.
pub fn unify_all(pairs: &[(Term, Term)]) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut work: Vec<(Term, Term)> = pairs.iter().rev().cloned().collect();
    while let Some((a, b)) = work.pop() {
        let a = sigma.apply(&a);
        let b = sigma.apply(&b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            // variable on the right is bound to the left one, so fresh copies
            // introduced by renaming get eliminated in favour of originals
            (_, Term::Var(y)) => {
                if a.contains_var(y) {
                    return None;
                }
                eliminate(&mut sigma, y.clone(), a.clone());
            }
            (Term::Var(x), _) => {
                if b.contains_var(x) {
                    return None;
                }
                eliminate(&mut sigma, x.clone(), b.clone());
            }
            (Term::App(f, fs), Term::App(g, gs)) => {
                if f != g || fs.len() != gs.len() {
                    return None;
                }
                for pair in fs.iter().cloned().zip(gs.iter().cloned()).rev() {
                    work.push(pair);
                }
            }
        }
    }
    Some(sigma)
}

fn eliminate(sigma: &mut Substitution, x: Name, t: Term) {
    let single: Substitution = std::iter::once((x.clone(), t.clone())).collect();
    let updated: Vec<(Name, Term)> = sigma.map.iter().map(|(y, u)| (y.clone(), single.apply(u))).collect();
    sigma.map.clear();
    for (y, u) in updated {
        sigma.bind(y, u);
    }
    sigma.bind(x, t);
}

/// Chooses a fresh name `base` + counter that avoids everything in `taken`.
pub fn fresh_name(base: &str, taken: &BTreeSet<Name>) -> Name {
    (1usize..)
        .map(|i| Name::from(format!("{base}{i}")))
        .find(|n| !taken.contains(n))
        .expect("unbounded counter")
}

/// Renames the variables of the given terms so that none occurs in `avoid`.
/// Variables that do not clash keep their names. The renaming is a bijection
/// and depends only on the inputs.
pub fn rename_terms_apart(terms: &[&Term], avoid: &BTreeSet<Name>) -> (Vec<Term>, Substitution) {
    let mut vars = Vec::new();
    for t in terms {
        t.collect_vars(&mut vars);
    }
    let mut taken: BTreeSet<Name> = avoid.iter().cloned().collect();
    taken.extend(vars.iter().cloned());
    let mut renaming = Substitution::new();
    for x in &vars {
        if avoid.contains(x) {
            let y = fresh_name(x, &taken);
            taken.insert(y.clone());
            renaming.bind(x.clone(), Term::Var(y));
        }
    }
    (terms.iter().map(|t| renaming.apply(t)).collect(), renaming)
}

/// Canonical variant of a tuple of terms: variables renamed `_1, _2, …` in
/// order of first occurrence. Two tuples are variants iff keys are equal.
pub fn variant_key(terms: &[&Term]) -> Vec<Term> {
    let mut vars = Vec::new();
    for t in terms {
        t.collect_vars(&mut vars);
    }
    let renaming: Substitution = vars
        .iter()
        .enumerate()
        .map(|(i, x)| (x.clone(), Term::var(&format!("_{}", i + 1))))
        .collect();
    terms.iter().map(|t| renaming.apply(t)).collect()
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

    #[test]
    fn matching_examples() {
        let pat = Term::app("f", vec![v("x"), Term::app("i", vec![v("x")])]);
        let subj = Term::app("f", vec![c("b"), Term::app("i", vec![c("b")])]);
        let s = match_term(&pat, &subj).unwrap();
        assert_eq!(s.get("x"), Some(&c("b")));
        assert!(match_term(
            &Term::app("f", vec![v("x"), v("x")]),
            &Term::app("f", vec![c("a"), c("b")])
        )
        .is_none());
        let s = match_term(&v("x"), &Term::app("g", vec![v("y")])).unwrap();
        assert_eq!(s.to_string(), "{x->g(y)}");
        // subject variables are rigid
        assert!(match_term(&c("a"), &v("x")).is_none());
    }

    #[test]
    fn mgu_examples() {
        let s = mgu(&Term::app("g", vec![v("x")]), &Term::app("g", vec![c("b")])).unwrap();
        assert_eq!(s.to_string(), "{x->b}");
        assert!(mgu(&v("x"), &Term::app("f", vec![v("x")])).is_none());
        assert!(mgu(&c("a"), &c("b")).is_none());
        let s = mgu(&Term::app("g", vec![v("x")]), &Term::app("g", vec![v("x1")])).unwrap();
        assert_eq!(s.to_string(), "{x1->x}");
    }

    #[test]
    fn mgu_is_idempotent() {
        let s = Term::app("f", vec![v("x"), Term::app("g", vec![v("y")]), v("y")]);
        let t = Term::app("f", vec![Term::app("g", vec![v("z")]), v("x"), c("a")]);
        let sigma = mgu(&s, &t).unwrap();
        assert_eq!(sigma.apply(&s), sigma.apply(&t));
        for (_, u) in sigma.iter() {
            assert_eq!(sigma.apply(u), *u);
        }
    }

    #[test]
    fn renaming_only_touches_clashing_variables() {
        let l = Term::app("f", vec![v("x"), v("x")]);
        let r = c("0");
        let avoid: BTreeSet<Name> = [Name::from("x")].into_iter().collect();
        let (out, ren) = rename_terms_apart(&[&l, &r], &avoid);
        assert_eq!(out[0].to_string(), "f(x1,x1)");
        assert!(ren.is_renaming());
        let g = Term::app("g", vec![v("y")]);
        let (out, _) = rename_terms_apart(&[&g], &avoid);
        assert_eq!(out[0], g);
    }

    #[test]
    fn variant_keys_identify_renamings() {
        let a = Term::app("f", vec![v("x"), v("y")]);
        let b = Term::app("f", vec![v("u"), v("w")]);
        let c2 = Term::app("f", vec![v("u"), v("u")]);
        assert_eq!(variant_key(&[&a]), variant_key(&[&b]));
        assert_ne!(variant_key(&[&a]), variant_key(&[&c2]));
    }
}
