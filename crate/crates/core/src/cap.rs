//! Bounded forward saturation for the cap problem: which normal forms can
//! be built from the knowledge terms with the signature's symbols.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::lm::is_variable_preserving;
use crate::minsky::{CapInstance, HOLE};
use crate::rewrite::Trs;
use crate::subst::match_term;
use crate::term::{Name, Term};

/// How a deducible term was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Derivation {
    Knowledge(usize),
    Apply(Name, Vec<Derivation>),
}

impl Derivation {
    /// The construction tree with a hole for each knowledge leaf.
    pub fn cap(&self, knowledge_count: usize) -> Term {
        match self {
            Derivation::Knowledge(i) if knowledge_count == 1 && *i == 0 => Term::var(HOLE),
            Derivation::Knowledge(i) => Term::var(&format!("{HOLE}{}", i + 1)),
            Derivation::Apply(f, kids) => Term::app(f, kids.iter().map(|d| d.cap(knowledge_count)).collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapWitness {
    pub cap: Term,
    pub derivation: Derivation,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapSearch {
    pub found: Option<CapWitness>,
    pub rounds: usize,
    /// A round added nothing: no cap exists within the size bound.
    pub saturated: bool,
    pub deducible: usize,
    pub max_term_size: usize,
    pub max_rounds: usize,
    /// Sort and usefulness pruning were applied.
    pub pruned: bool,
    pub fuel_exhausted: usize,
}

#[derive(Clone)]
enum How {
    Knowledge(usize),
    Apply(Name, Vec<usize>),
}

struct DerivedTerm {
    nf: Term,
    hole: bool,
    how: How,
}

// Union-find over argument and result slots of every symbol, merged along
// the rules, the knowledge and the goal. Rewriting with a variable-preserving
// system whose rhs are not variables never removes an ill-sorted junction, so
// ill-sorted terms cannot normalize to the well-sorted goal.
struct Sorts {
    parent: Vec<usize>,
    slot: HashMap<(Name, usize), usize>,
}

impl Sorts {
    fn new() -> Self {
        Sorts {
            parent: Vec::new(),
            slot: HashMap::new(),
        }
    }

    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn slot(&mut self, f: &Name, i: usize) -> usize {
        if let Some(&s) = self.slot.get(&(f.clone(), i)) {
            return s;
        }
        let s = self.fresh();
        self.slot.insert((f.clone(), i), s);
        s
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.parent[a] = b;
    }

    fn term(&mut self, t: &Term, vars: &mut HashMap<Name, usize>) -> usize {
        match t {
            Term::Var(x) => match vars.get(x) {
                Some(&s) => s,
                None => {
                    let s = self.fresh();
                    vars.insert(x.clone(), s);
                    s
                }
            },
            Term::App(f, args) => {
                for (i, a) in args.iter().enumerate() {
                    let s = self.term(a, vars);
                    let slot = self.slot(f, i + 1);
                    self.union(s, slot);
                }
                self.slot(f, 0)
            }
        }
    }

    fn build(inst: &CapInstance) -> Self {
        let mut sorts = Sorts::new();
        for r in inst.theory.rules() {
            let mut vars = HashMap::new();
            let l = sorts.term(&r.lhs, &mut vars);
            let rs = sorts.term(&r.rhs, &mut vars);
            sorts.union(l, rs);
        }
        for t in inst.knowledge.iter().chain([&inst.goal]) {
            sorts.term(t, &mut HashMap::new());
        }
        sorts
    }

    fn of(&mut self, t: &Term) -> usize {
        let s = self.slot(t.root().expect("ground"), 0);
        self.find(s)
    }

    fn arg(&mut self, f: &Name, i: usize) -> usize {
        let s = self.slot(f, i);
        self.find(s)
    }
}

// A normal form can only contribute to the goal by surviving as one of its
// subterms or by being matched against a non-variable proper subterm of a
// lhs, whose bindings must in turn be useful.
struct Usefulness {
    goal_subterms: BTreeSet<Term>,
    patterns: Vec<Term>,
    memo: HashMap<Term, bool>,
}

impl Usefulness {
    fn new(trs: &Trs, goal: &Term) -> Self {
        let mut patterns = Vec::new();
        for r in trs.rules() {
            for p in r.lhs.fpos() {
                if !p.is_root() {
                    patterns.push(r.lhs.get(&p).expect("own position").clone());
                }
            }
        }
        Usefulness {
            goal_subterms: goal.subterms().into_iter().cloned().collect(),
            patterns,
            memo: HashMap::new(),
        }
    }

    fn useful(&mut self, t: &Term) -> bool {
        if let Some(&u) = self.memo.get(t) {
            return u;
        }
        let mut u = self.goal_subterms.contains(t);
        if !u {
            let patterns = self.patterns.clone();
            u = patterns.iter().any(|pat| match match_term(pat, t) {
                Some(sigma) => sigma.iter().all(|(_, b)| self.useful(b)),
                None => false,
            });
        }
        self.memo.insert(t.clone(), u);
        u
    }
}

/// Saturates the set of deducible normal forms, starting from the
/// normalized knowledge, by applying every symbol to every tuple of
/// deducible terms. Terms larger than `max_term_size` are discarded. A cap
/// must contain at least one hole: the goal built from public constants
/// alone does not count.
pub fn cap_search(inst: &CapInstance, max_term_size: usize, max_rounds: usize, fuel: usize) -> CapSearch {
    let trs = &inst.theory;
    let prune = is_variable_preserving(trs) && trs.rules().iter().all(|r| !r.rhs.is_var());
    let mut sorts = Sorts::build(inst);
    let mut useful = Usefulness::new(trs, &inst.goal);
    let mut entries: Vec<DerivedTerm> = Vec::new();
    let mut index: HashMap<(Term, bool), usize> = HashMap::new();
    let mut fuel_exhausted = 0;

    for (i, k) in inst.knowledge.iter().enumerate() {
        match trs.normal_form(k, fuel) {
            Ok(nf) => {
                if let Entry::Vacant(slot) = index.entry((nf.clone(), true)) {
                    slot.insert(entries.len());
                    entries.push(DerivedTerm {
                        nf,
                        hole: true,
                        how: How::Knowledge(i),
                    });
                }
            }
            Err(_) => fuel_exhausted += 1,
        }
    }
    let symbols: Vec<(Name, usize)> = trs.signature().symbols().map(|s| (s.name, s.arity)).collect();
    let goal_key = (inst.goal.clone(), true);

    let mut rounds = 0;
    let mut saturated = false;
    let mut old = 0;
    while !index.contains_key(&goal_key) && rounds < max_rounds {
        rounds += 1;
        let frontier = entries.len();
        let mut added: Vec<DerivedTerm> = Vec::new();
        for (f, n) in &symbols {
            // argument candidates per slot
            let cands: Vec<Vec<usize>> = (1..=*n)
                .map(|i| {
                    let want = prune.then(|| sorts.arg(f, i));
                    (0..frontier)
                        .filter(|&e| want.is_none_or(|w| sorts.of(&entries[e].nf) == w))
                        .collect()
                })
                .collect();
            for_each_new_tuple(&cands, old, rounds == 1, &mut |tuple| {
                let size = 1 + tuple.iter().map(|&e| entries[e].nf.size()).sum::<usize>();
                if size > max_term_size {
                    return;
                }
                let t = Term::app(f, tuple.iter().map(|&e| entries[e].nf.clone()).collect());
                let nf = match trs.normal_form(&t, fuel) {
                    Ok(nf) => nf,
                    Err(_) => {
                        fuel_exhausted += 1;
                        return;
                    }
                };
                if nf.size() > max_term_size || (prune && nf != inst.goal && !useful.useful(&nf)) {
                    return;
                }
                let hole = tuple.iter().any(|&e| entries[e].hole);
                let key = (nf, hole);
                if index.contains_key(&key) {
                    return;
                }
                index.insert(key.clone(), frontier + added.len());
                added.push(DerivedTerm {
                    nf: key.0,
                    hole,
                    how: How::Apply(f.clone(), tuple.to_vec()),
                });
            });
        }
        old = frontier;
        if added.is_empty() {
            saturated = true;
            break;
        }
        entries.extend(added);
    }

    let found = index.get(&goal_key).map(|&i| {
        let derivation = derivation(&entries, i);
        CapWitness {
            cap: derivation.cap(inst.knowledge.len()),
            derivation,
        }
    });
    CapSearch {
        found,
        rounds,
        saturated,
        deducible: entries.len(),
        max_term_size,
        max_rounds,
        pruned: prune,
        fuel_exhausted,
    }
}

fn derivation(entries: &[DerivedTerm], i: usize) -> Derivation {
    match &entries[i].how {
        How::Knowledge(k) => Derivation::Knowledge(*k),
        How::Apply(f, kids) => Derivation::Apply(f.clone(), kids.iter().map(|&k| derivation(entries, k)).collect()),
    }
}

// Calls `f` on every tuple drawn from `cands` that uses at least one entry
// with index ≥ `old`. Constants are applied only in the first round.
fn for_each_new_tuple(cands: &[Vec<usize>], old: usize, first_round: bool, f: &mut impl FnMut(&[usize])) {
    if cands.is_empty() {
        if first_round {
            f(&[]);
        }
        return;
    }
    if cands.iter().any(|c| c.is_empty()) {
        return;
    }
    // split each candidate list into old and new parts
    let split: Vec<usize> = cands.iter().map(|c| c.partition_point(|&e| e < old)).collect();
    let n = cands.len();
    let mut tuple = vec![0; n];
    // position `first` is the first argument drawn from the new part
    for first in 0..n {
        let ranges: Vec<&[usize]> = (0..n)
            .map(|i| match i.cmp(&first) {
                std::cmp::Ordering::Less => &cands[i][..split[i]],
                std::cmp::Ordering::Equal => &cands[i][split[i]..],
                std::cmp::Ordering::Greater => &cands[i][..],
            })
            .collect();
        if ranges.iter().any(|r| r.is_empty()) {
            continue;
        }
        let mut idx = vec![0; n];
        loop {
            for (i, r) in ranges.iter().enumerate() {
                tuple[i] = r[idx[i]];
            }
            f(&tuple);
            if !advance_mixed(&mut idx, &ranges) {
                break;
            }
        }
    }
}

fn advance_mixed(idx: &mut [usize], ranges: &[&[usize]]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < ranges[i].len() {
            return true;
        }
        idx[i] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minsky::{encode, plug, Action, Machine, Transition};

    fn tiny() -> Machine {
        Machine::new(
            vec!["q0".into(), "q1".into(), "qL".into()],
            "q0".into(),
            "qL".into(),
            vec![
                Transition::new("q0", 1, Action::Inc, "q1"),
                Transition::new("q1", 1, Action::Inc, "qL"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn tiny_machine_cap_is_found() {
        let inst = encode(&tiny(), 0, 0, 2, 0).unwrap();
        let res = cap_search(&inst, 30, 12, 1000);
        assert!(res.pruned);
        let w = res.found.expect("cap");
        let nf = inst.theory.normal_form(&plug(&w.cap, &inst.knowledge), 1000).unwrap();
        assert_eq!(nf, inst.goal);
        assert_eq!(res.rounds, 6);
    }

    #[test]
    fn goal_in_knowledge_is_the_empty_cap() {
        let mut inst = encode(&tiny(), 0, 0, 2, 0).unwrap();
        inst.knowledge = vec![inst.goal.clone()];
        let res = cap_search(&inst, 30, 12, 1000);
        assert_eq!(res.found.unwrap().cap, Term::var(HOLE));
        assert_eq!(res.rounds, 0);
    }

    #[test]
    fn wrong_halting_counters_are_not_deducible() {
        let inst = encode(&tiny(), 0, 0, 3, 0).unwrap();
        let res = cap_search(&inst, 12, 40, 1000);
        assert!(res.found.is_none());
        assert!(res.saturated);
    }

    #[test]
    fn tuples_are_new_exactly_once() {
        let cands = vec![vec![0, 1, 2], vec![0, 2]];
        let mut seen = Vec::new();
        for_each_new_tuple(&cands, 2, false, &mut |t| seen.push(t.to_vec()));
        seen.sort();
        assert_eq!(seen, vec![vec![0, 2], vec![1, 2], vec![2, 0], vec![2, 2]]);
    }
}
