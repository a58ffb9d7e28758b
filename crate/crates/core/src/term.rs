//! First-order terms over a ranked signature.
//!
//! Terms are plain immutable trees. Variables and function symbols live in
//! separate namespaces: a [`Term::Var`] is never confused with a constant of
//! the same spelling, and the parser refuses files that declare a name as
//! both.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Interned-ish identifier shared by variables and symbols.
pub type Name = Arc<str>;

/// A function symbol together with its arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: Name,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: &str, arity: usize) -> Self {
        Symbol {
            name: Name::from(name),
            arity,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// Ordered set of symbols. Declaration order is kept because term
/// enumeration and report output follow it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: IndexMap<Name, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a symbol. Re-declaring a name with the same arity is a no-op.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<()> {
        match self.symbols.get(name) {
            Some(&a) if a != arity => Err(Error::ArityMismatch {
                symbol: name.to_string(),
                expected: a,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.symbols.insert(Name::from(name), arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.symbols.iter().map(|(n, &a)| Symbol {
            name: n.clone(),
            arity: a,
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> + '_ {
        self.symbols.keys()
    }

    /// Symbols of arity zero, in declaration order.
    pub fn constants(&self) -> impl Iterator<Item = &Name> + '_ {
        self.symbols.iter().filter(|(_, &a)| a == 0).map(|(n, _)| n)
    }
}

/// A term: a variable or a symbol applied to arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    App(Name, Vec<Term>),
}

/// A position inside a term as a sequence of 1-based argument indices.
/// The empty sequence is the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: usize) -> Self {
        let mut steps = self.0.clone();
        steps.push(index);
        Position(steps)
    }

    /// `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Removes `prefix` from the front, if it is one.
    pub fn strip_prefix(&self, prefix: &Position) -> Option<Position> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|rest| Position(rest.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for Position {
    fn from(steps: Vec<usize>) -> Self {
        Position(steps)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Name::from(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Name::from(name), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Name::from(name), args)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Root symbol name, or `None` for a variable.
    pub fn root(&self) -> Option<&Name> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Height of the tree; leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in order of first occurrence (left to right, depth first).
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            Term::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn var_set(&self) -> BTreeSet<Name> {
        self.vars().into_iter().collect()
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Var(x) => &**x == name,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(name)),
        }
    }

    /// Every function symbol occurring in the term.
    pub fn symbols(&self, out: &mut BTreeSet<Symbol>) {
        if let Term::App(f, args) = self {
            out.insert(Symbol {
                name: f.clone(),
                arity: args.len(),
            });
            args.iter().for_each(|a| a.symbols(out));
        }
    }

    /// Positions of the term in pre-order. With `nonvar_only` only positions
    /// of non-variable subterms are returned.
    pub fn positions(&self, nonvar_only: bool) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk_positions(nonvar_only, &mut path, &mut out);
        out
    }

    fn walk_positions(&self, nonvar_only: bool, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        match self {
            Term::Var(_) => {
                if !nonvar_only {
                    out.push(Position(path.clone()));
                }
            }
            Term::App(_, args) => {
                out.push(Position(path.clone()));
                for (i, a) in args.iter().enumerate() {
                    path.push(i + 1);
                    a.walk_positions(nonvar_only, path, out);
                    path.pop();
                }
            }
        }
    }

    /// Non-variable positions.
    pub fn fpos(&self) -> Vec<Position> {
        self.positions(true)
    }

    pub fn get(&self, p: &Position) -> Option<&Term> {
        let mut cur = self;
        for &i in &p.0 {
            cur = match cur {
                Term::App(_, args) if i >= 1 && i <= args.len() => &args[i - 1],
                _ => return None,
            };
        }
        Some(cur)
    }

    /// The subterm at `p`.
    pub fn subterm_at(&self, p: &Position) -> Result<&Term> {
        self.get(p).ok_or_else(|| Error::InvalidPosition {
            position: p.to_string(),
            term: self.to_string(),
        })
    }

    /// A copy of the term with the subterm at `p` replaced by `s`.
    pub fn replace_at(&self, p: &Position, s: Term) -> Result<Term> {
        fn go(t: &Term, steps: &[usize], s: Term) -> Option<Term> {
            match steps.split_first() {
                None => Some(s),
                Some((&i, rest)) => match t {
                    Term::App(f, args) if i >= 1 && i <= args.len() => {
                        // only the siblings are copied; the path is rebuilt
                        let inner = go(&args[i - 1], rest, s)?;
                        let mut out = Vec::with_capacity(args.len());
                        out.extend_from_slice(&args[..i - 1]);
                        out.push(inner);
                        out.extend_from_slice(&args[i..]);
                        Some(Term::App(f.clone(), out))
                    }
                    _ => None,
                },
            }
        }
        go(self, &p.0, s).ok_or_else(|| Error::InvalidPosition {
            position: p.to_string(),
            term: self.to_string(),
        })
    }

    /// All subterms (including the term itself), pre-order.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            for a in t.args().iter().rev() {
                stack.push(a);
            }
        }
        out
    }

    /// Applies a variable renaming given as a closure.
    pub fn map_vars(&self, f: &mut impl FnMut(&Name) -> Term) -> Term {
        match self {
            Term::Var(x) => f(x),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::App(g, args) => {
                f.write_str(g)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Builds `s(s(...s(base)))` with `n` applications of `symbol`.
pub fn iterate_unary(symbol: &str, n: usize, base: Term) -> Term {
    (0..n).fold(base, |t, _| Term::app(symbol, vec![t]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(args: Vec<Term>) -> Term {
        Term::app("f", args)
    }

    #[test]
    fn positions_of_variable_and_applications() {
        assert!(Term::var("x").positions(true).is_empty());
        let t = f(vec![Term::var("x"), Term::constant("b")]);
        let ps: Vec<String> = t.positions(false).iter().map(|p| p.to_string()).collect();
        assert_eq!(ps, ["e", "1", "2"]);
        let t = f(vec![Term::app("g", vec![Term::constant("a")]), Term::var("x")]);
        let ps: Vec<String> = t.positions(true).iter().map(|p| p.to_string()).collect();
        assert_eq!(ps, ["e", "1", "1.1"]);
    }

    #[test]
    fn subterm_and_replace() {
        let t = f(vec![Term::app("g", vec![Term::constant("a")]), Term::constant("b")]);
        assert_eq!(t.subterm_at(&Position(vec![1, 1])).unwrap(), &Term::constant("a"));
        assert_eq!(
            t.replace_at(&Position(vec![2]), Term::constant("c"))
                .unwrap()
                .to_string(),
            "f(g(a),c)"
        );
        assert_eq!(t.replace_at(&Position::root(), Term::var("z")).unwrap(), Term::var("z"));
        assert!(matches!(
            t.subterm_at(&Position(vec![3])),
            Err(Error::InvalidPosition { .. })
        ));
        assert!(t.replace_at(&Position(vec![2, 1]), Term::var("z")).is_err());
    }

    #[test]
    fn depth_and_size() {
        let t = f(vec![Term::app("g", vec![Term::constant("a")]), Term::var("x")]);
        assert_eq!(t.depth(), 3);
        assert_eq!(t.size(), 4);
        assert_eq!(Term::constant("a").depth(), 1);
    }

    #[test]
    fn signature_rejects_conflicting_arity() {
        let mut sig = Signature::new();
        sig.declare("f", 2).unwrap();
        sig.declare("f", 2).unwrap();
        assert!(sig.declare("f", 1).is_err());
    }
}
